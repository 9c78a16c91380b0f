//! Nodal basis on the reference interval `[0, 1]`.
//!
//! Solution points are Gauss-Legendre or Gauss-Lobatto-Legendre nodes mapped
//! from `[-1, 1]`. Alongside the nodes the basis carries everything the FR
//! operators need: Lagrange differentiation matrix, correction-function
//! derivatives, boundary extrapolation vectors and a Legendre table for modal
//! analysis.

use crate::error::{Error, Result};

/// Family of solution points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    GaussLegendre,
    GaussLobattoLegendre,
}

impl std::str::FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" | "gauss" | "gauss-legendre" | "gausslegendre" => Ok(NodeKind::GaussLegendre),
            "gll" | "lobatto" | "gauss-lobatto-legendre" | "gausslobattolegendre" => {
                Ok(NodeKind::GaussLobattoLegendre)
            }
            other => Err(Error::Config(format!("unknown node kind `{other}`"))),
        }
    }
}

/// Legendre polynomial `P_n(x)` and its derivative, by the three-term recurrence.
pub fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k + 1) P_k
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_and_derivative(n, x).0
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
fn gauss_legendre_std(n_points: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n_points;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Roots are symmetric; start from the Chebyshev-like guess and sort later.
        let mut xi = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_and_derivative(n, xi);
            let dx = p / dp;
            xi -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, xi);
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    symmetrize(&mut x, &mut w);
    (x, w)
}

/// Gauss-Lobatto-Legendre nodes and weights on `[-1, 1]` for degree `n >= 1`.
fn gauss_lobatto_std(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n + 1];
    let mut w = vec![0.0; n + 1];
    let nf = n as f64;
    x[0] = -1.0;
    x[n] = 1.0;
    for (i, xi_out) in x.iter_mut().enumerate().take(n).skip(1) {
        let mut xi = -(std::f64::consts::PI * i as f64 / nf).cos();
        // Interior nodes are the roots of P'_n; iterate on q = P_{n-1} - x P_n,
        // which is (1 - x^2) P'_n / n.
        for _ in 0..NEWTON_MAX_ITER {
            let (pn, dpn) = legendre_and_derivative(n, xi);
            let (_, dpm) = legendre_and_derivative(n - 1, xi);
            let pm = legendre(n - 1, xi);
            let q = pm - xi * pn;
            let dq = dpm - pn - xi * dpn;
            let dx = q / dq;
            xi -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        *xi_out = xi;
    }
    for i in 0..=n {
        let p = legendre(n, x[i]);
        w[i] = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    symmetrize(&mut x, &mut w);
    (x, w)
}

fn symmetrize(x: &mut [f64], w: &mut [f64]) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ws: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
    let n = x.len();
    for i in 0..n {
        let j = n - 1 - i;
        x[i] = 0.5 * (xs[i] - xs[j]);
        w[i] = 0.5 * (ws[i] + ws[j]);
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
}

/// Immutable nodal basis data for one degree and node family.
#[derive(Debug, Clone)]
pub struct BasisData {
    pub degree: usize,
    pub node_kind: NodeKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `(N+1) x (N+1)`, `D[i][j] = l_j'(xi_i)`.
    pub diff_matrix: Vec<f64>,
    pub corr_deriv_left: Vec<f64>,
    pub corr_deriv_right: Vec<f64>,
    pub extrap_left: Vec<f64>,
    pub extrap_right: Vec<f64>,
    /// Row-major, entry `(j, q)` is the `[0,1]`-orthonormal Legendre `L_j` at node `q`.
    pub legendre_at_nodes: Vec<f64>,
}

impl BasisData {
    pub fn new(degree: usize, node_kind: NodeKind) -> Result<Self> {
        build_basis(degree, node_kind)
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.diff_matrix[i * self.n_nodes() + j]
    }

    #[inline]
    pub fn legendre_entry(&self, j: usize, q: usize) -> f64 {
        self.legendre_at_nodes[j * self.n_nodes() + q]
    }

    /// Evaluate the nodal interpolant of `values` at `xi`.
    pub fn interpolate(&self, values: &[f64], xi: f64) -> f64 {
        lagrange_values(&self.nodes, xi)
            .iter()
            .zip(values)
            .map(|(l, v)| l * v)
            .sum()
    }

    /// Quadrature average of nodal values over the element.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn build_basis(degree: usize, node_kind: NodeKind) -> Result<BasisData> {
    if node_kind == NodeKind::GaussLobattoLegendre && degree == 0 {
        return Err(Error::InvalidDegree { degree, kind: node_kind });
    }
    let n = degree + 1;
    let (x_std, w_std) = match node_kind {
        NodeKind::GaussLegendre => gauss_legendre_std(n),
        NodeKind::GaussLobattoLegendre => gauss_lobatto_std(degree),
    };
    let nodes: Vec<f64> = x_std.iter().map(|x| 0.5 * (1.0 + x)).collect();
    let weights: Vec<f64> = w_std.iter().map(|w| 0.5 * w).collect();

    let diff_matrix = differentiation_matrix(&nodes);
    let (corr_deriv_left, corr_deriv_right) = correction_derivatives_at(degree, node_kind, &nodes);
    let extrap_left = lagrange_values(&nodes, 0.0);
    let extrap_right = lagrange_values(&nodes, 1.0);
    let legendre_at_nodes = legendre_table(degree, &nodes);

    Ok(BasisData {
        degree,
        node_kind,
        nodes,
        weights,
        diff_matrix,
        corr_deriv_left,
        corr_deriv_right,
        extrap_left,
        extrap_right,
        legendre_at_nodes,
    })
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| nodes[j] - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values `l_p(xi)` of all Lagrange polynomials through `nodes`.
pub fn lagrange_values(nodes: &[f64], xi: f64) -> Vec<f64> {
    let n = nodes.len();
    if let Some(k) = nodes.iter().position(|&x| x == xi) {
        let mut out = vec![0.0; n];
        out[k] = 1.0;
        return out;
    }
    (0..n)
        .map(|p| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, &xq)| (xi - xq) / (nodes[p] - xq))
                .product()
        })
        .collect()
}

/// Barycentric differentiation matrix with rows summing to exactly zero.
fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let lambda = barycentric_weights(nodes);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = lambda[j] / lambda[i] / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    d
}

/// Right Radau polynomial `R_{R,k}` on `[-1, 1]` and its derivative.
fn right_radau(k: usize, x: f64) -> (f64, f64) {
    // R_{R,k} = (-1)^k / 2 (P_k - P_{k-1})
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (pk, dpk) = legendre_and_derivative(k, x);
    let (pm, dpm) = legendre_and_derivative(k - 1, x);
    (0.5 * sign * (pk - pm), 0.5 * sign * (dpk - dpm))
}

/// Left correction function `g_L` on `[-1, 1]` and its derivative.
///
/// Radau uses `g_L = R_{R,N+1}`; g2 uses `N/(2N+1) R_{R,N+1} + (N+1)/(2N+1) R_{R,N}`.
fn left_correction_std(degree: usize, kind: NodeKind, x: f64) -> (f64, f64) {
    match kind {
        NodeKind::GaussLegendre => right_radau(degree + 1, x),
        NodeKind::GaussLobattoLegendre => {
            let k = degree as f64;
            let (r1, dr1) = right_radau(degree + 1, x);
            let (r0, dr0) = right_radau(degree, x);
            let a = k / (2.0 * k + 1.0);
            let b = (k + 1.0) / (2.0 * k + 1.0);
            (a * r1 + b * r0, a * dr1 + b * dr0)
        }
    }
}

/// `g_L` on `[0, 1]` (used by tests and diagnostics).
pub fn correction_left(degree: usize, kind: NodeKind, xi: f64) -> f64 {
    left_correction_std(degree, kind, 2.0 * xi - 1.0).0
}

/// `g_R(xi) = g_L(1 - xi)` on `[0, 1]`.
pub fn correction_right(degree: usize, kind: NodeKind, xi: f64) -> f64 {
    correction_left(degree, kind, 1.0 - xi)
}

fn correction_derivatives_at(degree: usize, kind: NodeKind, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    // d/dxi = 2 d/dx; g_R(x) = g_L(-x) so g_R'(x) = -g_L'(-x).
    let left = nodes
        .iter()
        .map(|&xi| 2.0 * left_correction_std(degree, kind, 2.0 * xi - 1.0).1)
        .collect();
    let right = nodes
        .iter()
        .map(|&xi| -2.0 * left_correction_std(degree, kind, 1.0 - 2.0 * xi).1)
        .collect();
    (left, right)
}

/// Derivatives of the left/right correction functions at the solution points:
/// Radau for Gauss-Legendre, g2 for Gauss-Lobatto-Legendre.
pub fn correction_derivatives(degree: usize, node_kind: NodeKind) -> Result<(Vec<f64>, Vec<f64>)> {
    let basis = build_basis(degree, node_kind)?;
    Ok((basis.corr_deriv_left, basis.corr_deriv_right))
}

/// Legendre polynomials orthonormal on `[0, 1]`, `sqrt(2j+1) P_j(2 xi - 1)`,
/// evaluated at `nodes`. Row `j`, column `q`.
pub fn legendre_table(degree: usize, nodes: &[f64]) -> Vec<f64> {
    let n = degree + 1;
    let mut table = vec![0.0; n * nodes.len()];
    for j in 0..n {
        let scale = ((2 * j + 1) as f64).sqrt();
        for (q, &xi) in nodes.iter().enumerate() {
            table[j * nodes.len() + q] = scale * legendre(j, 2.0 * xi - 1.0);
        }
    }
    table
}
