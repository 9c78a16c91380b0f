//! Registry of test problems: equations, domains, boundary conditions, final
//! times, relaxation thresholds and time integrators.

use std::f64::consts::PI;

use crate::basis::BasisData;
use crate::equations::{Equation, DEFAULT_GAMMA};
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::jinxin::SpeedPolicy;
use crate::mesh::{BoundaryKind, Mesh};

/// Conservative physical state at a point.
pub type InitialCondition = fn([f64; 2]) -> Vec<f64>;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub equation: Equation,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// Default number of elements per direction.
    pub n: [usize; 2],
    pub degree: usize,
    /// Left, right, bottom, top.
    pub boundary: [BoundaryKind; 4],
    pub t_final: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub tableau: &'static str,
    pub initial: InitialCondition,
    pub positivity: bool,
    /// Also limit every stage state.
    pub positivity_per_stage: bool,
    pub speed_policy: SpeedPolicy,
    /// Used when `speed_policy` is `FixedUser`.
    pub speeds: [f64; 2],
}

pub const PROBLEM_NAMES: [&str; 7] = [
    "burgers_sine",
    "buckley_leverett",
    "wc_blast",
    "sedov_blast_2d",
    "khi_2d",
    "lin_advection_1d",
    "lin_advection_2d",
];

const PERIODIC: [BoundaryKind; 4] = [BoundaryKind::Periodic; 4];
const WALLS_1D: [BoundaryKind; 4] = [
    BoundaryKind::ReflectingWall,
    BoundaryKind::ReflectingWall,
    BoundaryKind::Periodic,
    BoundaryKind::Periodic,
];

pub fn burgers_sine_u0(x: f64) -> f64 {
    2.0 + (PI * (x - 0.7)).sin()
}

fn burgers_sine(p: [f64; 2]) -> Vec<f64> {
    vec![burgers_sine_u0(p[0])]
}

pub fn buckley_leverett_u0(x: f64) -> f64 {
    if (-0.5..=0.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

fn buckley_leverett(p: [f64; 2]) -> Vec<f64> {
    vec![buckley_leverett_u0(p[0])]
}

fn wc_blast(p: [f64; 2]) -> Vec<f64> {
    let x = p[0];
    let pressure = if x < 0.1 {
        1000.0
    } else if x < 0.9 {
        0.01
    } else {
        100.0
    };
    Equation::Euler1D { gamma: DEFAULT_GAMMA }.conservative(&[1.0, 0.0, pressure])
}

const SEDOV_SIGMA_RHO: f64 = 0.25;
const SEDOV_SIGMA_P: f64 = 0.15;

fn sedov(p: [f64; 2]) -> Vec<f64> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    let (sr, sp) = (SEDOV_SIGMA_RHO, SEDOV_SIGMA_P);
    let rho = 1.0 + (-r2 / (2.0 * sr * sr)).exp() / (4.0 * PI * sr * sr);
    let pres = 1e-5 + (DEFAULT_GAMMA - 1.0) * (-r2 / (2.0 * sp * sp)).exp() / (4.0 * PI * sp * sp);
    Equation::Euler2D { gamma: DEFAULT_GAMMA }.conservative(&[rho, 0.0, 0.0, pres])
}

fn khi(p: [f64; 2]) -> Vec<f64> {
    let (x, y) = (p[0], p[1]);
    let b = (15.0 * y + 7.5).tanh() - (15.0 * y - 7.5).tanh();
    let rho = 0.5 + 0.75 * b;
    let vx = 0.5 * (b - 1.0);
    let vy = 0.1 * (2.0 * PI * x).sin();
    Equation::Euler2D { gamma: DEFAULT_GAMMA }.conservative(&[rho, vx, vy, 1.0])
}

pub fn lin_advection_1d_u0(x: f64) -> f64 {
    (2.0 * PI * x).sin()
}

fn lin_advection_1d(p: [f64; 2]) -> Vec<f64> {
    vec![lin_advection_1d_u0(p[0])]
}

pub fn lin_advection_2d_u0(x: f64, y: f64) -> f64 {
    (2.0 * PI * (x + y)).sin()
}

fn lin_advection_2d(p: [f64; 2]) -> Vec<f64> {
    vec![lin_advection_2d_u0(p[0], p[1])]
}

/// `sup |f'|` over `[0, 1]` for the Buckley-Leverett flux, by dense sampling.
pub fn buckley_leverett_max_slope() -> f64 {
    (0..=100_000)
        .map(|i| Equation::buckley_leverett_slope(i as f64 / 100_000.0).abs())
        .fold(0.0, f64::max)
}

pub fn get_problem(name: &str) -> Result<ProblemSpec> {
    let auto = SpeedPolicy::Sqrt2TimesMaxEig;
    let spec = match name {
        "burgers_sine" => ProblemSpec {
            name: "burgers_sine",
            description: "Burgers, smooth sine steepening into a shock",
            equation: Equation::Burgers,
            lo: [-1.0, 0.0],
            hi: [1.0, 1.0],
            n: [20, 1],
            degree: 3,
            boundary: PERIODIC,
            t_final: 0.5,
            eps_max: 2e-3,
            eps_min: 1e-12,
            tableau: "SSP3-IMEX(4,3,3)",
            initial: burgers_sine,
            positivity: false,
            positivity_per_stage: false,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        "buckley_leverett" => ProblemSpec {
            name: "buckley_leverett",
            description: "Buckley-Leverett, box initial data, non-convex flux",
            equation: Equation::BuckleyLeverett,
            lo: [-1.0, 0.0],
            hi: [1.0, 1.0],
            n: [50, 1],
            degree: 3,
            boundary: PERIODIC,
            t_final: 0.15,
            eps_max: 2e-4,
            eps_min: 1e-12,
            tableau: "SSP3-IMEX(4,3,3)",
            initial: buckley_leverett,
            positivity: false,
            positivity_per_stage: false,
            // The initial data only takes the values 0 and 1 where f' = 0.
            speed_policy: SpeedPolicy::FixedUser,
            speeds: [1.1 * buckley_leverett_max_slope(), 0.0],
        },
        "wc_blast" => ProblemSpec {
            name: "wc_blast",
            description: "Woodward-Colella interacting blast waves between walls",
            equation: Equation::Euler1D { gamma: DEFAULT_GAMMA },
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            n: [400, 1],
            degree: 3,
            boundary: WALLS_1D,
            t_final: 0.038,
            eps_max: 1e-7,
            eps_min: 1e-12,
            tableau: "SSP3-IMEX(4,3,3)",
            initial: wc_blast,
            positivity: true,
            positivity_per_stage: true,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        "sedov_blast_2d" => ProblemSpec {
            name: "sedov_blast_2d",
            description: "Gaussian Sedov-type blast on a periodic square",
            equation: Equation::Euler2D { gamma: DEFAULT_GAMMA },
            lo: [-1.5, -1.5],
            hi: [1.5, 1.5],
            n: [64, 64],
            degree: 3,
            boundary: PERIODIC,
            t_final: 20.0,
            eps_max: 8e-5,
            eps_min: 1e-12,
            tableau: "BPR(3,4,3)",
            initial: sedov,
            positivity: true,
            positivity_per_stage: false,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        "khi_2d" => ProblemSpec {
            name: "khi_2d",
            description: "Kelvin-Helmholtz instability of a smoothed shear layer",
            equation: Equation::Euler2D { gamma: DEFAULT_GAMMA },
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            n: [32, 32],
            degree: 3,
            boundary: PERIODIC,
            t_final: 10.0,
            eps_max: 1e-6,
            eps_min: 1e-12,
            tableau: "BPR(3,4,3)",
            initial: khi,
            positivity: true,
            positivity_per_stage: false,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        "lin_advection_1d" => ProblemSpec {
            name: "lin_advection_1d",
            description: "Linear advection of a sine wave, one period",
            equation: Equation::LinearAdvection1D { velocity: 1.0 },
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            n: [20, 1],
            degree: 3,
            boundary: PERIODIC,
            t_final: 1.0,
            eps_max: 1e-12,
            eps_min: 1e-12,
            tableau: "SSP3-IMEX(4,3,3)",
            initial: lin_advection_1d,
            positivity: false,
            positivity_per_stage: false,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        "lin_advection_2d" => ProblemSpec {
            name: "lin_advection_2d",
            description: "Diagonal linear advection of a sine wave on the unit square",
            equation: Equation::LinearAdvection2D { velocity: [1.0, 1.0] },
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            n: [8, 8],
            degree: 3,
            boundary: PERIODIC,
            t_final: 1.0,
            eps_max: 1e-12,
            eps_min: 1e-12,
            tableau: "SSP3-IMEX(4,3,3)",
            initial: lin_advection_2d,
            positivity: false,
            positivity_per_stage: false,
            speed_policy: auto,
            speeds: [0.0; 2],
        },
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(spec)
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.equation.dim()
    }

    pub fn mesh(&self, n: [usize; 2]) -> Result<Mesh> {
        if self.dim() == 1 {
            Mesh::new_1d(self.lo[0], self.hi[0], n[0], self.boundary[0], self.boundary[1])
        } else {
            Mesh::new_2d(self.lo, self.hi, n, self.boundary)
        }
    }

    /// Physical initial field sampled pointwise at the solution points.
    pub fn sample_initial(&self, mesh: &Mesh, basis: &BasisData) -> Result<NodalField> {
        let n = basis.n_nodes();
        let np = n.pow(mesh.dim as u32);
        let m = self.equation.n_vars();
        let mut out = NodalField::zeros(mesh.n_elements(), np, m);
        for e in 0..mesh.n_elements() {
            for q in 0..np {
                let (ix, jy) = (q % n, q / n);
                let eta = if mesh.dim == 2 { basis.nodes[jy] } else { 0.0 };
                let x = mesh.ref_to_phys(e, [basis.nodes[ix], eta])?;
                let u = (self.initial)(x);
                self.equation.check_admissible(&u).map_err(|err| err.at_element(e))?;
                out.state_mut(e, q).copy_from_slice(&u);
            }
        }
        Ok(out)
    }

    /// Exact solution for the linear advection problems.
    pub fn exact(&self, x: [f64; 2], t: f64) -> Option<f64> {
        let wrap = |s: f64, lo: f64, hi: f64| lo + (s - lo).rem_euclid(hi - lo);
        match self.equation {
            Equation::LinearAdvection1D { velocity } if self.name == "lin_advection_1d" => {
                Some(lin_advection_1d_u0(wrap(x[0] - velocity * t, self.lo[0], self.hi[0])))
            }
            Equation::LinearAdvection2D { velocity } if self.name == "lin_advection_2d" => Some(lin_advection_2d_u0(
                wrap(x[0] - velocity[0] * t, self.lo[0], self.hi[0]),
                wrap(x[1] - velocity[1] * t, self.lo[1], self.hi[1]),
            )),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, NodeKind};

    #[test]
    fn every_problem_samples_admissible() {
        let basis = build_basis(3, NodeKind::GaussLegendre).unwrap();
        for name in PROBLEM_NAMES {
            let p = get_problem(name).unwrap();
            let n = if p.dim() == 2 { [8, 8] } else { [16, 1] };
            let mesh = p.mesh(n).unwrap();
            let f = p.sample_initial(&mesh, &basis).unwrap();
            assert!(f.states().all(|u| p.equation.admissible(u)), "{name}");
        }
    }

    #[test]
    fn unknown_problem() {
        assert!(matches!(get_problem("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn blast_left_state_energy() {
        let u = wc_blast([0.05, 0.0]);
        assert!((u[2] - 2500.0).abs() < 1e-9);
    }

    #[test]
    fn buckley_leverett_slope_bound() {
        let s = buckley_leverett_max_slope();
        assert!(s > Equation::buckley_leverett_slope(0.5));
        assert!(s > 2.0 && s < 2.5, "{s}");
    }

    #[test]
    fn sedov_energy_excess_is_finite_and_positive() {
        // The pressure bump integrates to (gamma - 1) / 2, so the energy
        // excess over ambient is 1/2. Midpoint rule on a fine grid.
        let p = get_problem("sedov_blast_2d").unwrap();
        let n = 600;
        let h = (p.hi[0] - p.lo[0]) / n as f64;
        let mut excess = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [p.lo[0] + (i as f64 + 0.5) * h, p.lo[1] + (j as f64 + 0.5) * h];
                excess += (sedov(x)[3] - 1e-5 / 0.4) * h * h;
            }
        }
        assert!(excess > 0.0 && excess.is_finite());
        assert!((excess - 0.5).abs() < 1e-6, "{excess}");
    }

    #[test]
    fn linear_advection_exact_is_periodic() {
        let p = get_problem("lin_advection_1d").unwrap();
        let a = p.exact([0.3, 0.0], 0.0).unwrap();
        let b = p.exact([0.3, 0.0], 1.0).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(get_problem("burgers_sine").unwrap().exact([0.0; 2], 0.0).is_none());
    }
}
