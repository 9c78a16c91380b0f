//! Modal smoothness indicator and its mapping to the relaxation parameter.
//!
//! A scalar `q(u)` is projected onto `[0,1]`-orthonormal Legendre modes by
//! collocation quadrature. The share of energy held by the top modes flags
//! rough elements, which then get a larger relaxation parameter.

use crate::basis::BasisData;
use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::field::NodalField;

pub const DEFAULT_GAIN: f64 = 2e5;
pub const DEFAULT_EPS_MIN: f64 = 1e-12;

/// Total modal energy below which an element counts as smooth.
pub const ENERGY_FLOOR: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorQuantity {
    /// The (first) conserved variable.
    Solution,
    /// `rho * p`.
    DensityPressure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorConfig {
    pub k: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub quantity: IndicatorQuantity,
}

impl IndicatorConfig {
    pub fn new(eps_max: f64, eq: &Equation) -> Self {
        IndicatorConfig {
            k: DEFAULT_GAIN,
            eps_min: DEFAULT_EPS_MIN,
            eps_max,
            quantity: if eq.is_euler() {
                IndicatorQuantity::DensityPressure
            } else {
                IndicatorQuantity::Solution
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("indicator gain must be positive, got {}", self.k)));
        }
        if !(self.eps_min > 0.0 && self.eps_min <= self.eps_max) {
            return Err(Error::Config(format!(
                "need 0 < eps_min <= eps_max, got {} and {}",
                self.eps_min, self.eps_max
            )));
        }
        Ok(())
    }
}

/// Clip `k * energy` into `[eps_min, eps_max]`.
pub fn map_eps(energy: f64, cfg: &IndicatorConfig) -> f64 {
    (cfg.k * energy).max(cfg.eps_min).min(cfg.eps_max)
}

/// Top-mode energy share of one element's nodal values of `q`.
///
/// In 2D the modes are tensor products and "degree" means the larger of the
/// two indices, so `E_m` sums all coefficients with `max(i, j) <= m`.
pub fn modal_energy(q_nodal: &[f64], basis: &BasisData, dim: usize) -> f64 {
    let n = basis.n_nodes();
    if n < 2 {
        return 0.0;
    }
    let modal = modal_coefficients(q_nodal, basis, dim);
    // Cumulative energy up to each degree.
    let mut cumulative = vec![0.0; n];
    if dim == 1 {
        for (j, c) in modal.iter().enumerate() {
            cumulative[j] = c * c;
        }
    } else {
        for jy in 0..n {
            for jx in 0..n {
                let c = modal[jy * n + jx];
                cumulative[jx.max(jy)] += c * c;
            }
        }
    }
    for j in 1..n {
        cumulative[j] += cumulative[j - 1];
    }
    let top = n - 1;
    let total = cumulative[top];
    if total < ENERGY_FLOOR {
        return 0.0;
    }
    let share_top = (total - cumulative[top - 1]) / total;
    let below = cumulative[top - 1];
    let share_next = if below < ENERGY_FLOOR || top < 1 {
        0.0
    } else {
        let lower = if top >= 2 { cumulative[top - 2] } else { 0.0 };
        (below - lower) / below
    };
    share_top.max(share_next).clamp(0.0, 1.0)
}

/// Coefficients `c_j` of `q_h = sum_j c_j L_j(2 xi - 1)` with the standard
/// (unnormalized) Legendre polynomials, by collocation quadrature.
pub fn modal_coefficients(q_nodal: &[f64], basis: &BasisData, dim: usize) -> Vec<f64> {
    let n = basis.n_nodes();
    // The basis table holds sqrt(2j+1) L_j, so this is (2j+1) * integral(q L_j).
    let project = |vals: &dyn Fn(usize) -> f64, j: usize| -> f64 {
        let scale = ((2 * j + 1) as f64).sqrt();
        scale * (0..n).map(|q| vals(q) * basis.legendre_entry(j, q) * basis.weights[q]).sum::<f64>()
    };
    if dim == 1 {
        return (0..n).map(|j| project(&|q| q_nodal[q], j)).collect();
    }
    // x-direction first, then y.
    let mut tmp = vec![0.0; n * n];
    for iy in 0..n {
        for jx in 0..n {
            tmp[iy * n + jx] = project(&|q| q_nodal[iy * n + q], jx);
        }
    }
    let mut out = vec![0.0; n * n];
    for jy in 0..n {
        for jx in 0..n {
            out[jy * n + jx] = project(&|q| tmp[q * n + jx], jy);
        }
    }
    out
}

/// Nodal values of the indicator quantity for one element of an augmented field.
fn element_quantity(field: &NodalField, e: usize, eq: &Equation, quantity: IndicatorQuantity) -> Result<Vec<f64>> {
    let m = eq.n_vars();
    (0..field.nodes_per_element)
        .map(|q| {
            let u = &field.state(e, q)[..m];
            eq.check_admissible(u).map_err(|err| err.at_element(e))?;
            Ok(match quantity {
                IndicatorQuantity::Solution => u[0],
                IndicatorQuantity::DensityPressure => eq.indicator_quantity_unchecked(u),
            })
        })
        .collect()
}

/// Per-element relaxation parameter from the current solution.
pub fn compute_eps(
    field: &NodalField,
    eq: &Equation,
    basis: &BasisData,
    cfg: &IndicatorConfig,
    eps_out: &mut [f64],
) -> Result<()> {
    for (e, eps) in eps_out.iter_mut().enumerate().take(field.n_elements) {
        let q = element_quantity(field, e, eq, cfg.quantity)?;
        *eps = map_eps(modal_energy(&q, basis, eq.dim()), cfg);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, legendre, NodeKind};
    use proptest::prelude::*;

    fn gl3() -> BasisData {
        build_basis(3, NodeKind::GaussLegendre).unwrap()
    }

    #[test]
    fn constant_is_smooth() {
        let b = gl3();
        assert_eq!(modal_energy(&[4.0; 4], &b, 1), 0.0);
        assert_eq!(modal_energy(&[4.0; 16], &b, 2), 0.0);
        assert_eq!(modal_energy(&[0.0; 4], &b, 1), 0.0);
    }

    #[test]
    fn top_mode_is_rough() {
        let b = gl3();
        let q: Vec<f64> = b.nodes.iter().map(|x| legendre(3, 2.0 * x - 1.0)).collect();
        assert!((modal_energy(&q, &b, 1) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn small_top_mode_share() {
        let b = gl3();
        let q: Vec<f64> = b
            .nodes
            .iter()
            .map(|x| 1.0 + 0.1 * legendre(3, 2.0 * x - 1.0))
            .collect();
        let e = modal_energy(&q, &b, 1);
        assert!((e - 0.01 / 1.01).abs() < 1e-14, "{e}");
        assert!((e - 9.901e-3).abs() < 1e-6);
    }

    #[test]
    fn eps_mapping_examples() {
        let cfg = IndicatorConfig {
            k: 2e5,
            eps_min: 1e-12,
            eps_max: 2e-3,
            quantity: IndicatorQuantity::Solution,
        };
        assert_eq!(map_eps(0.0, &cfg), 1e-12);
        assert_eq!(map_eps(1.0, &cfg), 2e-3);
        assert!((map_eps(1e-9, &cfg) - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn config_validation() {
        let mut cfg = IndicatorConfig::new(1e-3, &Equation::Burgers);
        assert!(cfg.validate().is_ok());
        cfg.eps_min = 1e-2;
        assert!(cfg.validate().is_err());
        cfg.eps_min = 1e-12;
        cfg.k = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn step_is_flagged() {
        let b = gl3();
        let smooth: Vec<f64> = b.nodes.iter().map(|x| (0.3 * x).sin()).collect();
        let step: Vec<f64> = b.nodes.iter().map(|x| if *x < 0.5 { 0.0 } else { 1.0 }).collect();
        assert!(modal_energy(&step, &b, 1) > 1e3 * modal_energy(&smooth, &b, 1));
    }

    #[test]
    fn two_d_tensor_top_mode() {
        let b = gl3();
        let mut q = vec![0.0; 16];
        for iy in 0..4 {
            for ix in 0..4 {
                q[iy * 4 + ix] = 1.0 + 0.5 * legendre(3, 2.0 * b.nodes[ix] - 1.0);
            }
        }
        let e = modal_energy(&q, &b, 2);
        let expected = 0.25 / 1.25;
        assert!((e - expected).abs() < 1e-13, "{e} vs {expected}");
    }

    proptest! {
        #[test]
        fn energy_is_a_share(vals in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let b = gl3();
            let e = modal_energy(&vals, &b, 1);
            prop_assert!((0.0..=1.0).contains(&e));
        }

        #[test]
        fn energy_is_scale_invariant(vals in proptest::collection::vec(-5.0f64..5.0, 16), s in 0.01f64..100.0, neg in any::<bool>()) {
            let b = gl3();
            let s = if neg { -s } else { s };
            let scaled: Vec<f64> = vals.iter().map(|v| s * v).collect();
            for dim in [1usize, 2] {
                let n = if dim == 1 { 4 } else { 16 };
                let e0 = modal_energy(&vals[..n], &b, dim);
                let e1 = modal_energy(&scaled[..n], &b, dim);
                prop_assert!((e0 - e1).abs() < 1e-12);
            }
        }

        #[test]
        fn eps_map_monotone_and_bounded(e1 in 0.0f64..1.0, e2 in 0.0f64..1.0, log_max in -8.0f64..-2.0) {
            let cfg = IndicatorConfig { k: 2e5, eps_min: 1e-12, eps_max: 10f64.powf(log_max), quantity: IndicatorQuantity::Solution };
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let (a, b) = (map_eps(lo, &cfg), map_eps(hi, &cfg));
            prop_assert!(a <= b);
            prop_assert!(a >= cfg.eps_min && b <= cfg.eps_max);
        }
    }
}
