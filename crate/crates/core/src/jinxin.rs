//! The relaxation system `u_t + sum_i d_i v_i = 0`,
//! `v_i,t + a_i^2 d_i u = -(v_i - f_i(u)) / eps`.
//!
//! The augmented state at a node is laid out as `[u, v_1, (v_2)]`, each block
//! holding the `M` physical variables.

use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::field::NodalField;

/// Block layout of the augmented state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentedLayout {
    pub n_phys: usize,
    pub dim: usize,
}

impl AugmentedLayout {
    pub fn new(eq: &Equation) -> Self {
        AugmentedLayout {
            n_phys: eq.n_vars(),
            dim: eq.dim(),
        }
    }

    #[inline]
    pub fn total(&self) -> usize {
        self.n_phys * (self.dim + 1)
    }

    #[inline]
    pub fn u_range(&self) -> std::ops::Range<usize> {
        0..self.n_phys
    }

    /// Range of the relaxation block for direction `dir` (0-based).
    #[inline]
    pub fn v_range(&self, dir: usize) -> std::ops::Range<usize> {
        let start = self.n_phys * (dir + 1);
        start..start + self.n_phys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedPolicy {
    /// Speeds are supplied by the user and never changed.
    FixedUser,
    /// `a_i = sqrt(2) max |lambda_i|` in 2D, `safety * max |lambda_1|` in 1D.
    Sqrt2TimesMaxEig,
}

impl std::str::FromStr for SpeedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" | "fixeduser" | "fixed_user" => Ok(SpeedPolicy::FixedUser),
            "sqrt2" | "max_eig" | "sqrt2timesmaxeig" | "auto" => Ok(SpeedPolicy::Sqrt2TimesMaxEig),
            other => Err(Error::Config(format!("unknown speed policy `{other}`"))),
        }
    }
}

pub const DEFAULT_SAFETY_1D: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationConfig {
    /// Relaxation speeds `a_1, a_2` (the second is unused in 1D).
    pub speeds: [f64; 2],
    pub policy: SpeedPolicy,
    pub safety_1d: f64,
    /// Per-element relaxation parameter.
    pub eps: Vec<f64>,
}

impl RelaxationConfig {
    pub fn new(policy: SpeedPolicy, speeds: [f64; 2], n_elements: usize, eps: f64) -> Self {
        RelaxationConfig {
            speeds,
            policy,
            safety_1d: DEFAULT_SAFETY_1D,
            eps: vec![eps; n_elements],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.speeds[..dim].iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Config(format!(
                "relaxation speeds must be positive, got {:?}",
                &self.speeds[..dim]
            )));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::NonPositiveEps(*e));
        }
        if !(self.safety_1d >= 1.0) {
            return Err(Error::Config("1D speed safety factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Linear relaxation flux in direction `dir`: `(v_1, a_1^2 u, 0)` or `(v_2, 0, a_2^2 u)`.
#[inline]
pub fn augment_flux_into(w: &[f64], dir: usize, speeds: [f64; 2], layout: &AugmentedLayout, out: &mut [f64]) {
    let m = layout.n_phys;
    let a2 = speeds[dir] * speeds[dir];
    out[..layout.total()].fill(0.0);
    let v = layout.v_range(dir);
    for k in 0..m {
        out[k] = w[v.start + k];
        out[v.start + k] = a2 * w[k];
    }
}

pub fn augment_flux(w: &[f64], dir: usize, speeds: [f64; 2], layout: &AugmentedLayout) -> Vec<f64> {
    let mut out = vec![0.0; layout.total()];
    augment_flux_into(w, dir, speeds, layout, &mut out);
    out
}

/// Stiff relaxation source, no admissibility check.
#[inline]
pub fn source_into(w: &[f64], eps: f64, eq: &Equation, layout: &AugmentedLayout, out: &mut [f64]) {
    let m = layout.n_phys;
    let mut f = [0.0; 4];
    out[..m].fill(0.0);
    for dir in 0..layout.dim {
        eq.flux_into(&w[..m], dir, &mut f[..m]);
        let v = layout.v_range(dir);
        for k in 0..m {
            out[v.start + k] = -(w[v.start + k] - f[k]) / eps;
        }
    }
}

pub fn source(w: &[f64], eps: f64, eq: &Equation, layout: &AugmentedLayout) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEps(eps));
    }
    eq.check_admissible(&w[..layout.n_phys])?;
    let mut out = vec![0.0; layout.total()];
    source_into(w, eps, eq, layout, &mut out);
    Ok(out)
}

/// Solve the diagonal implicit stage equation
/// `v = v_expl - (dt a_ii / eps) (v - f(u))` in closed form.
///
/// `w_expl` carries every explicit contribution; its u-block is already the
/// final stage value because the u-block source vanishes.
pub fn implicit_stage_solve(
    w_expl: &[f64],
    a_ii: f64,
    dt: f64,
    eps: f64,
    eq: &Equation,
    layout: &AugmentedLayout,
    out: &mut [f64],
) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEps(eps));
    }
    let m = layout.n_phys;
    out[..m].copy_from_slice(&w_expl[..m]);
    let stiffness = dt * a_ii / eps;
    let mut f = [0.0; 4];
    for dir in 0..layout.dim {
        eq.flux_into(&w_expl[..m], dir, &mut f[..m]);
        let v = layout.v_range(dir);
        for k in 0..m {
            // v = (v_expl + K f) / (1 + K), written to be exact at equilibrium.
            out[v.start + k] = f[k] + (w_expl[v.start + k] - f[k]) / (1.0 + stiffness);
        }
    }
    Ok(())
}

/// Set every relaxation block to the physical flux of the u-block.
pub fn equilibrium_init(u0: &NodalField, eq: &Equation) -> Result<NodalField> {
    let layout = AugmentedLayout::new(eq);
    let m = layout.n_phys;
    if u0.n_vars != m {
        return Err(Error::InvalidArgument(format!(
            "expected {m} physical variables, got {}",
            u0.n_vars
        )));
    }
    let mut w = NodalField::zeros(u0.n_elements, u0.nodes_per_element, layout.total());
    w.time = u0.time;
    for e in 0..u0.n_elements {
        for q in 0..u0.nodes_per_element {
            let u = u0.state(e, q);
            eq.check_admissible(u).map_err(|err| err.at_element(e))?;
            let out = w.state_mut(e, q);
            out[..m].copy_from_slice(u);
            for dir in 0..layout.dim {
                let v = layout.v_range(dir);
                eq.flux_into(u, dir, &mut out[v]);
            }
        }
    }
    Ok(w)
}

/// Per-direction maximum wave speed over all solution points of an augmented field.
pub fn max_wave_speeds(field: &NodalField, eq: &Equation) -> Result<[f64; 2]> {
    let m = eq.n_vars();
    let mut out = [0.0f64; 2];
    for e in 0..field.n_elements {
        for q in 0..field.nodes_per_element {
            let u = &field.state(e, q)[..m];
            eq.check_admissible(u).map_err(|err| err.at_element(e))?;
            for (dir, o) in out.iter_mut().enumerate().take(eq.dim()) {
                *o = o.max(eq.max_abs_eig_unchecked(u, dir));
            }
        }
    }
    Ok(out)
}

/// Relaxation speeds for the current solution according to `cfg.policy`.
pub fn select_speeds(field: &NodalField, eq: &Equation, cfg: &RelaxationConfig) -> Result<[f64; 2]> {
    let dim = eq.dim();
    let speeds = match cfg.policy {
        SpeedPolicy::FixedUser => cfg.speeds,
        SpeedPolicy::Sqrt2TimesMaxEig => {
            let lam = max_wave_speeds(field, eq)?;
            let factor = if dim == 1 { cfg.safety_1d } else { std::f64::consts::SQRT_2 };
            [factor * lam[0], factor * lam[1]]
        }
    };
    if speeds[..dim].iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config(format!(
            "relaxation speeds {:?} are not positive; use fixed speeds for this problem",
            &speeds[..dim]
        )));
    }
    Ok(speeds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticReport {
    pub max_lhs: f64,
    pub violations: usize,
    pub points: usize,
}

const ELLIPTIC_TOL: f64 = 1e-12;

/// Pointwise `sum_i lambda_i^2 / a_i^2 <= 1` with eigenvalues standing in for
/// Jacobian norms. Diagnostic only.
pub fn check_elliptic_condition(field: &NodalField, eq: &Equation, speeds: [f64; 2]) -> EllipticReport {
    let m = eq.n_vars();
    let mut report = EllipticReport {
        max_lhs: 0.0,
        violations: 0,
        points: 0,
    };
    for u in field.states() {
        let u = &u[..m];
        report.points += 1;
        if !eq.admissible(u) {
            report.violations += 1;
            report.max_lhs = f64::INFINITY;
            continue;
        }
        let lhs: f64 = (0..eq.dim())
            .map(|d| {
                let l = eq.max_abs_eig_unchecked(u, d);
                l * l / (speeds[d] * speeds[d])
            })
            .sum();
        report.max_lhs = report.max_lhs.max(lhs);
        if lhs > 1.0 + ELLIPTIC_TOL {
            report.violations += 1;
        }
    }
    report
}
