#![allow(dead_code)]

use relaxfr::basis::build_basis;
use relaxfr::basis::NodeKind;
use relaxfr::crkfr::Discretization;
use relaxfr::equations::Equation;
use relaxfr::field::NodalField;
use relaxfr::jinxin::equilibrium_init;
use relaxfr::mesh::{BoundaryKind, Mesh};
use relaxfr::runner::{RunConfig, Simulation, StepInfo};
use relaxfr::tableau::DoubleButcherTableau;

/// Physical coordinates of node `q` of element `e`.
pub fn node_x(sim: &Simulation, e: usize, q: usize) -> [f64; 2] {
    let d = &sim.disc;
    let n = d.basis.n_nodes();
    let eta = if d.mesh.dim == 2 { d.basis.nodes[q / n] } else { 0.0 };
    d.mesh.ref_to_phys(e, [d.basis.nodes[q % n], eta]).unwrap()
}

/// Quadrature integral over the domain of `g(x, state)`.
pub fn integrate(sim: &Simulation, g: impl Fn([f64; 2], &[f64]) -> f64) -> f64 {
    let vol = sim.disc.mesh.element_volume();
    let mut acc = 0.0;
    for e in 0..sim.field.n_elements {
        for (q, w) in sim.disc.weights.iter().enumerate() {
            acc += vol * w * g(node_x(sim, e, q), sim.field.state(e, q));
        }
    }
    acc
}

/// Running extremes collected from every step of a run.
#[derive(Debug, Clone)]
pub struct Extremes {
    pub u_min: f64,
    pub u_max: f64,
    pub rho_min: f64,
    pub p_min: f64,
    pub steps: usize,
}

impl Default for Extremes {
    fn default() -> Self {
        Extremes {
            u_min: f64::INFINITY,
            u_max: f64::NEG_INFINITY,
            rho_min: f64::INFINITY,
            p_min: f64::INFINITY,
            steps: 0,
        }
    }
}

impl Extremes {
    pub fn observe(&mut self, sim: &Simulation, info: &StepInfo) {
        self.steps += 1;
        for s in sim.field.states() {
            self.u_min = self.u_min.min(s[0]);
            self.u_max = self.u_max.max(s[0]);
        }
        if let Some(r) = info.min_density {
            self.rho_min = self.rho_min.min(r);
        }
        if let Some(p) = info.min_pressure {
            self.p_min = self.p_min.min(p);
        }
    }
}

pub fn config(problem: &str, settings: &[(&str, &str)]) -> RunConfig {
    let mut cfg = RunConfig::new(problem);
    for (k, v) in settings {
        cfg.set(k, v).unwrap();
    }
    cfg
}

/// Periodic discretization of `eq` on the unit interval or square.
pub fn periodic_disc(eq: Equation, n: usize, degree: usize, tableau: &str) -> Discretization {
    let basis = build_basis(degree, NodeKind::GaussLegendre).unwrap();
    let mesh = if eq.dim() == 1 {
        Mesh::new_1d(0.0, 1.0, n, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap()
    } else {
        Mesh::new_2d([0.0; 2], [1.0; 2], [n, n], [BoundaryKind::Periodic; 4]).unwrap()
    };
    Discretization::new(eq, basis, mesh, DoubleButcherTableau::by_name(tableau).unwrap()).unwrap()
}

/// Equilibrium augmented field from a conservative state at every node.
pub fn field_from(disc: &Discretization, u: impl Fn(usize, usize) -> Vec<f64>) -> NodalField {
    let m = disc.eq.n_vars();
    let np = disc.nodes_per_element();
    let n_el = disc.mesh.n_elements();
    let mut f = NodalField::zeros(n_el, np, m);
    for e in 0..n_el {
        for q in 0..np {
            f.state_mut(e, q).copy_from_slice(&u(e, q));
        }
    }
    equilibrium_init(&f, &disc.eq).unwrap()
}
