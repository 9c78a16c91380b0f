//! Physical conservation laws that get relaxed.

use crate::error::{Error, Result};

pub const DEFAULT_GAMMA: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// `u_t + c u_x = 0`
    LinearAdvection1D { velocity: f64 },
    /// `u_t + c_x u_x + c_y u_y = 0`
    LinearAdvection2D { velocity: [f64; 2] },
    /// `f(u) = u^2 / 2`
    Burgers,
    /// `f(u) = 4u^2 / (4u^2 + (1 - u)^2)`
    BuckleyLeverett,
    Euler1D { gamma: f64 },
    Euler2D { gamma: f64 },
}

impl Equation {
    pub fn n_vars(&self) -> usize {
        match self {
            Equation::LinearAdvection1D { .. }
            | Equation::LinearAdvection2D { .. }
            | Equation::Burgers
            | Equation::BuckleyLeverett => 1,
            Equation::Euler1D { .. } => 3,
            Equation::Euler2D { .. } => 4,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Equation::LinearAdvection2D { .. } | Equation::Euler2D { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_euler(&self) -> bool {
        matches!(self, Equation::Euler1D { .. } | Equation::Euler2D { .. })
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Equation::Euler1D { gamma } | Equation::Euler2D { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Equation::LinearAdvection1D { .. } => "linear_advection_1d",
            Equation::LinearAdvection2D { .. } => "linear_advection_2d",
            Equation::Burgers => "burgers",
            Equation::BuckleyLeverett => "buckley_leverett",
            Equation::Euler1D { .. } => "euler_1d",
            Equation::Euler2D { .. } => "euler_2d",
        }
    }

    /// Names of the output variables (primitive for Euler).
    pub fn variable_names(&self) -> &'static [&'static str] {
        match self {
            Equation::Euler1D { .. } => &["rho", "v", "p"],
            Equation::Euler2D { .. } => &["rho", "v1", "v2", "p"],
            _ => &["u"],
        }
    }

    /// Pressure of a conservative Euler state; `None` for scalar laws.
    #[inline]
    pub fn pressure(&self, u: &[f64]) -> Option<f64> {
        match *self {
            Equation::Euler1D { gamma } => Some((gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])),
            Equation::Euler2D { gamma } => Some(
                (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]),
            ),
            _ => None,
        }
    }

    /// Density and pressure positive for Euler; any finite value for scalars.
    pub fn admissible(&self, u: &[f64]) -> bool {
        if !u.iter().all(|x| x.is_finite()) {
            return false;
        }
        match self.pressure(u) {
            Some(p) => u[0] > 0.0 && p > 0.0,
            None => true,
        }
    }

    pub fn check_admissible(&self, u: &[f64]) -> Result<()> {
        if self.admissible(u) {
            Ok(())
        } else {
            Err(Error::inadmissible(format!("state {u:?}")))
        }
    }

    /// Flux in direction `dir` (0 = x, 1 = y) written to `out`. No admissibility check.
    #[inline]
    pub fn flux_into(&self, u: &[f64], dir: usize, out: &mut [f64]) {
        match *self {
            Equation::LinearAdvection1D { velocity } => out[0] = velocity * u[0],
            Equation::LinearAdvection2D { velocity } => out[0] = velocity[dir] * u[0],
            Equation::Burgers => out[0] = 0.5 * u[0] * u[0],
            Equation::BuckleyLeverett => {
                let a = 4.0 * u[0] * u[0];
                let b = (1.0 - u[0]) * (1.0 - u[0]);
                out[0] = a / (a + b);
            }
            Equation::Euler1D { .. } => {
                let p = self.pressure(u).unwrap_or_default();
                let v = u[1] / u[0];
                out[0] = u[1];
                out[1] = u[1] * v + p;
                out[2] = v * (u[2] + p);
            }
            Equation::Euler2D { .. } => {
                let p = self.pressure(u).unwrap_or_default();
                let vn = u[1 + dir] / u[0];
                out[0] = u[1 + dir];
                out[1] = u[1] * vn;
                out[2] = u[2] * vn;
                out[1 + dir] += p;
                out[3] = vn * (u[3] + p);
            }
        }
    }

    pub fn flux(&self, u: &[f64], dir: usize) -> Result<Vec<f64>> {
        self.check_admissible(u)?;
        let mut out = vec![0.0; self.n_vars()];
        self.flux_into(u, dir, &mut out);
        Ok(out)
    }

    /// Derivative of the Buckley-Leverett flux.
    pub fn buckley_leverett_slope(u: f64) -> f64 {
        let den = 4.0 * u * u + (1.0 - u) * (1.0 - u);
        8.0 * u * (1.0 - u) / (den * den)
    }

    /// Spectral radius of the flux Jacobian in direction `dir`. No admissibility check.
    #[inline]
    pub fn max_abs_eig_unchecked(&self, u: &[f64], dir: usize) -> f64 {
        match *self {
            Equation::LinearAdvection1D { velocity } => velocity.abs(),
            Equation::LinearAdvection2D { velocity } => velocity[dir].abs(),
            Equation::Burgers => u[0].abs(),
            Equation::BuckleyLeverett => Self::buckley_leverett_slope(u[0]).abs(),
            Equation::Euler1D { gamma } | Equation::Euler2D { gamma } => {
                let p = self.pressure(u).unwrap_or_default();
                let c = (gamma * p / u[0]).sqrt();
                (u[1 + dir] / u[0]).abs() + c
            }
        }
    }

    pub fn max_abs_eig(&self, u: &[f64], dir: usize) -> Result<f64> {
        self.check_admissible(u)?;
        Ok(self.max_abs_eig_unchecked(u, dir))
    }

    /// Conservative state from primitive `(rho, v.., p)`; identity for scalars.
    pub fn conservative(&self, prim: &[f64]) -> Vec<f64> {
        match *self {
            Equation::Euler1D { gamma } => {
                let (rho, v, p) = (prim[0], prim[1], prim[2]);
                vec![rho, rho * v, p / (gamma - 1.0) + 0.5 * rho * v * v]
            }
            Equation::Euler2D { gamma } => {
                let (rho, v1, v2, p) = (prim[0], prim[1], prim[2], prim[3]);
                vec![
                    rho,
                    rho * v1,
                    rho * v2,
                    p / (gamma - 1.0) + 0.5 * rho * (v1 * v1 + v2 * v2),
                ]
            }
            _ => prim.to_vec(),
        }
    }

    pub fn primitive(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Equation::Euler1D { .. } => {
                vec![u[0], u[1] / u[0], self.pressure(u).unwrap_or_default()]
            }
            Equation::Euler2D { .. } => vec![
                u[0],
                u[1] / u[0],
                u[2] / u[0],
                self.pressure(u).unwrap_or_default(),
            ],
            _ => u.to_vec(),
        }
    }

    /// Scalar whose modal decay drives the smoothness indicator:
    /// `rho * p` for Euler, the state itself for scalar laws.
    pub fn indicator_quantity(&self, u: &[f64]) -> Result<f64> {
        self.check_admissible(u)?;
        Ok(self.indicator_quantity_unchecked(u))
    }

    #[inline]
    pub(crate) fn indicator_quantity_unchecked(&self, u: &[f64]) -> f64 {
        match self.pressure(u) {
            Some(p) => u[0] * p,
            None => u[0],
        }
    }

    /// Signs mapping an interior state to its mirror image across a wall
    /// normal to `dir`: the normal momentum flips, everything else is kept.
    pub fn reflection_signs(&self, dir: usize) -> Vec<f64> {
        let mut s = vec![1.0; self.n_vars()];
        match self {
            Equation::Euler1D { .. } => s[1] = -1.0,
            Equation::Euler2D { .. } => s[1 + dir] = -1.0,
            _ => {}
        }
        s
    }
}
