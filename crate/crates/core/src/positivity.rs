//! Scaling limiter in the style of Zhang and Shu: each element's nodal states
//! are pulled toward the element mean until density and pressure clear a floor.
//! Only the physical block of the augmented state is touched.

use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::jinxin::AugmentedLayout;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityConfig {
    pub enabled: bool,
    /// Nodal density/pressure must reach this fraction of the element mean.
    pub floor_fraction: f64,
    pub abs_floor: f64,
    /// Also limit every stage state, not only the end-of-step state.
    pub per_stage: bool,
}

impl Default for PositivityConfig {
    fn default() -> Self {
        PositivityConfig {
            enabled: true,
            floor_fraction: 0.1,
            abs_floor: 1e-13,
            per_stage: false,
        }
    }
}

impl PositivityConfig {
    pub fn disabled() -> Self {
        PositivityConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor_fraction > 0.0 && self.floor_fraction < 1.0) {
            return Err(Error::Config(format!(
                "positivity floor fraction must lie in (0, 1), got {}",
                self.floor_fraction
            )));
        }
        if !(self.abs_floor >= 0.0) {
            return Err(Error::Config("positivity absolute floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Scaling factors applied to one element; `1.0` means untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterOutcome {
    pub theta_density: f64,
    pub theta_pressure: f64,
}

impl LimiterOutcome {
    pub const IDENTITY: LimiterOutcome = LimiterOutcome {
        theta_density: 1.0,
        theta_pressure: 1.0,
    };

    pub fn activated(&self) -> bool {
        self.theta_density < 1.0 || self.theta_pressure < 1.0
    }
}

const BISECTION_TOL: f64 = 1e-12;

/// Quadrature mean of the physical block over one element.
pub fn element_mean(states: &[f64], weights: &[f64], layout: &AugmentedLayout) -> Vec<f64> {
    let nv = layout.total();
    let m = layout.n_phys;
    let mut mean = vec![0.0; m];
    for (q, w) in weights.iter().enumerate() {
        for k in 0..m {
            mean[k] += w * states[q * nv + k];
        }
    }
    mean
}

/// Limit one element in place. `states` holds the augmented nodal states of
/// the element, `weights` the (tensor) quadrature weights summing to one.
/// `probes` is a row-major matrix, one row of nodal weights per extra point
/// (face traces) that must also clear the floors; its rows sum to one, so the
/// probe values scale toward the mean together with the nodes.
/// Scalar equations are left alone.
pub fn limit_element(
    states: &mut [f64],
    weights: &[f64],
    probes: &[f64],
    eq: &Equation,
    layout: &AugmentedLayout,
    cfg: &PositivityConfig,
) -> Result<LimiterOutcome> {
    if !cfg.enabled || !eq.is_euler() {
        return Ok(LimiterOutcome::IDENTITY);
    }
    let nv = layout.total();
    let m = layout.n_phys;
    let mean = element_mean(states, weights, layout);
    let p_mean = eq.pressure(&mean).unwrap_or(f64::NAN);
    if !(mean[0] > 0.0 && p_mean > 0.0) {
        return Err(Error::inadmissible(format!(
            "element mean {mean:?} has nonpositive density or pressure"
        )));
    }
    // Face traces only need to stay positive; the relative margin on the
    // nodes would fire the limiter on smooth flows.
    let node_floors = [
        (cfg.floor_fraction * mean[0]).max(cfg.abs_floor).min(mean[0]),
        (cfg.floor_fraction * p_mean).max(cfg.abs_floor).min(p_mean),
    ];
    let probe_floors = [cfg.abs_floor.min(mean[0]), cfg.abs_floor.min(p_mean)];
    let n_nodes = weights.len();
    let floors = |i: usize| if i < n_nodes { node_floors } else { probe_floors };

    let nq = weights.len();
    let mut points: Vec<f64> = states.chunks_exact(nv).flat_map(|s| s[..m].to_vec()).collect();
    for row in probes.chunks_exact(nq) {
        for k in 0..m {
            points.push(row.iter().enumerate().map(|(q, r)| r * states[q * nv + k]).sum());
        }
    }

    let mut theta_density = 1.0f64;
    for (i, s) in points.chunks_exact(m).enumerate() {
        let floor = floors(i)[0];
        if s[0] < floor {
            theta_density = theta_density.min(((mean[0] - floor) / (mean[0] - s[0])).clamp(0.0, 1.0));
        }
    }
    if theta_density < 1.0 {
        scale_toward(states, &mean, theta_density, nv, m);
        scale_toward(&mut points, &mean, theta_density, m, m);
    }

    let mut theta_pressure = 1.0f64;
    let mut buf = vec![0.0; m];
    for (i, s) in points.chunks_exact(m).enumerate() {
        let p_floor = floors(i)[1];
        let p = eq.pressure(s).unwrap_or(f64::NAN);
        if p >= p_floor {
            continue;
        }
        // Pressure is concave in the conservative variables, so the admissible
        // scaling factors form an interval [0, t*].
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            for k in 0..m {
                buf[k] = mean[k] + mid * (s[k] - mean[k]);
            }
            if eq.pressure(&buf).is_some_and(|pm| pm >= p_floor) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        theta_pressure = theta_pressure.min(lo);
    }
    if theta_pressure < 1.0 {
        scale_toward(states, &mean, theta_pressure, nv, m);
    }
    Ok(LimiterOutcome {
        theta_density,
        theta_pressure,
    })
}

fn scale_toward(states: &mut [f64], mean: &[f64], theta: f64, nv: usize, m: usize) {
    for s in states.chunks_exact_mut(nv) {
        for k in 0..m {
            s[k] = mean[k] + theta * (s[k] - mean[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::DEFAULT_GAMMA;
    use proptest::prelude::*;

    const E1: Equation = Equation::Euler1D { gamma: DEFAULT_GAMMA };

    fn layout() -> AugmentedLayout {
        AugmentedLayout::new(&E1)
    }

    /// Two-node element in augmented layout from conservative states.
    fn element(u: &[[f64; 3]]) -> Vec<f64> {
        let mut out = Vec::new();
        for s in u {
            out.extend_from_slice(s);
            out.extend_from_slice(&[7.0, 8.0, 9.0]);
        }
        out
    }

    #[test]
    fn admissible_element_untouched() {
        let mut st = element(&[[1.0, 0.1, 2.5], [1.2, -0.1, 2.4]]);
        let before = st.clone();
        let out = limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &PositivityConfig::default()).unwrap();
        assert_eq!(out, LimiterOutcome::IDENTITY);
        assert_eq!(st, before);
    }

    #[test]
    fn negative_density_scaled_to_floor() {
        let mut st = element(&[[-0.1, 0.0, 2.5], [2.1, 0.0, 2.5]]);
        let out = limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &PositivityConfig::default()).unwrap();
        assert!((out.theta_density - 0.9 / 1.1).abs() < 1e-14);
        assert!((st[0] - 0.1).abs() < 1e-14);
        // Relaxation block untouched.
        assert_eq!(&st[3..6], &[7.0, 8.0, 9.0]);
    }

    #[test]
    fn negative_pressure_scaled() {
        let mut st = element(&[[1.0, 0.0, 4.0], [1.0, 1.9, 1.0]]);
        let cfg = PositivityConfig::default();
        let before = element_mean(&st, &[0.5, 0.5], &layout());
        let out = limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &cfg).unwrap();
        assert!(out.theta_pressure < 1.0);
        let after = element_mean(&st, &[0.5, 0.5], &layout());
        for k in 0..3 {
            assert!((before[k] - after[k]).abs() < 1e-13);
        }
        let p_mean = E1.pressure(&after).unwrap();
        for s in st.chunks_exact(6) {
            assert!(E1.pressure(&s[..3]).unwrap() >= 0.1 * p_mean * (1.0 - 1e-9));
        }
    }

    #[test]
    fn negative_face_trace_is_limited() {
        let mut st = element(&[[0.5, 0.0, 2.5], [1.5, 0.0, 2.5]]);
        let before = st.clone();
        let cfg = PositivityConfig::default();
        let out = limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &cfg).unwrap();
        assert!(!out.activated());
        // Linear extrapolation to the left face: 2 u0 - u1 = -0.5.
        let probe = [2.0, -1.0];
        let out = limit_element(&mut st, &[0.5, 0.5], &probe, &E1, &layout(), &cfg).unwrap();
        assert!((out.theta_density - (1.0 - 1e-13) / 1.5).abs() < 1e-14);
        let face = 2.0 * st[0] - st[6];
        assert!(face >= 0.0 && face < 1e-12);
        assert!((st[0] + st[6] - before[0] - before[6]).abs() < 1e-14);
    }

    #[test]
    fn bad_mean_is_fatal() {
        let mut st = element(&[[-1.0, 0.0, 2.5], [0.5, 0.0, 2.5]]);
        assert!(limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &PositivityConfig::default()).is_err());
    }

    #[test]
    fn disabled_and_scalar_are_noops() {
        let mut st = element(&[[-0.1, 0.0, 2.5], [2.1, 0.0, 2.5]]);
        let before = st.clone();
        limit_element(&mut st, &[0.5, 0.5], &[], &E1, &layout(), &PositivityConfig::disabled()).unwrap();
        assert_eq!(st, before);
        let lay = AugmentedLayout::new(&Equation::Burgers);
        let mut sc = vec![-5.0, 1.0, 5.0, 1.0];
        limit_element(&mut sc, &[0.5, 0.5], &[], &Equation::Burgers, &lay, &PositivityConfig::default()).unwrap();
        assert_eq!(sc, vec![-5.0, 1.0, 5.0, 1.0]);
    }

    fn arb_element() -> impl Strategy<Value = Vec<f64>> {
        // Mean is kept admissible by construction: perturb an admissible base state.
        (0.5f64..2.0, -1.0f64..1.0, 1.0f64..3.0, proptest::collection::vec((-1.5f64..1.5, -2.0f64..2.0, -3.0f64..3.0), 3))
            .prop_map(|(rho, m, p, d)| {
                let e = p / 0.4 + 0.5 * m * m / rho;
                let base = [rho, m, e];
                // Zero-mean perturbations with weights (1/3, 1/3, 1/3).
                let mean_d: Vec<f64> = (0..3)
                    .map(|k| d.iter().map(|t| [t.0, t.1, t.2][k]).sum::<f64>() / 3.0)
                    .collect();
                let mut out = Vec::new();
                for t in &d {
                    let dv = [t.0, t.1, t.2];
                    for k in 0..3 {
                        out.push(base[k] + dv[k] - mean_d[k]);
                    }
                    out.extend_from_slice(&[0.0, 0.0, 0.0]);
                }
                out
            })
    }

    proptest! {
        #[test]
        fn mean_preserved_and_admissible(mut st in arb_element()) {
            let w = [1.0 / 3.0; 3];
            let lay = layout();
            let before = element_mean(&st, &w, &lay);
            limit_element(&mut st, &w, &[], &E1, &lay, &PositivityConfig::default()).unwrap();
            let after = element_mean(&st, &w, &lay);
            for k in 0..3 {
                prop_assert!((before[k] - after[k]).abs() <= 1e-13 * (1.0 + before[k].abs()));
            }
            for s in st.chunks_exact(6) {
                prop_assert!(E1.admissible(&s[..3]));
            }
        }

        #[test]
        fn idempotent(mut st in arb_element()) {
            let w = [1.0 / 3.0; 3];
            let lay = layout();
            let cfg = PositivityConfig::default();
            limit_element(&mut st, &w, &[], &E1, &lay, &cfg).unwrap();
            let once = st.clone();
            limit_element(&mut st, &w, &[], &E1, &lay, &cfg).unwrap();
            for (a, b) in once.iter().zip(&st) {
                prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
            }
        }
    }
}
