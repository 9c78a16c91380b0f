//! Single-stage compact Runge-Kutta flux reconstruction with an IMEX treatment
//! of the relaxation source.
//!
//! One step has three phases separated by barriers:
//!
//! 1. Element-local stage loop. Stage derivatives use only the element's own
//!    flux polynomial, so no neighbor data is read. The loop produces the
//!    time-averaged solution `U`, source `S`, and traces of `U` and of the
//!    time-averaged flux `F = A U` on every element side.
//! 2. One Rusanov flux per face from the time-averaged traces.
//! 3. Element-local FR update `w <- w - dt d^FR F + dt S`.

use rayon::prelude::*;

use crate::basis::BasisData;
use crate::boundary::{ghost_state, mirror_signs};
use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::jinxin::{augment_flux_into, implicit_stage_solve, source_into, AugmentedLayout};
use crate::mesh::{Mesh, Neighbor, Side};
use crate::positivity::{limit_element, PositivityConfig};
use crate::tableau::DoubleButcherTableau;

/// Node index of position `pos` along a line in direction `dir`; `line` is
/// the transverse index.
#[inline]
fn node_on_line(dim: usize, dir: usize, line: usize, pos: usize, n: usize) -> usize {
    if dim == 1 {
        pos
    } else if dir == 0 {
        line * n + pos
    } else {
        pos * n + line
    }
}

/// `(1/h) D` applied along direction `dir` to every component of `vals`.
///
/// Uses `sum_j D_ij (f_j - f_i)`, which is zero for constant data in floating
/// point as well.
pub fn local_deriv(vals: &[f64], nv: usize, basis: &BasisData, dim: usize, dir: usize, inv_h: f64, out: &mut [f64]) {
    let n = basis.n_nodes();
    let lines = if dim == 1 { 1 } else { n };
    for line in 0..lines {
        for i in 0..n {
            let qi = node_on_line(dim, dir, line, i, n);
            for k in 0..nv {
                let fi = vals[qi * nv + k];
                let mut acc = 0.0;
                for j in 0..n {
                    let qj = node_on_line(dim, dir, line, j, n);
                    acc += basis.d(i, j) * (vals[qj * nv + k] - fi);
                }
                out[qi * nv + k] = acc * inv_h;
            }
        }
    }
}

/// Trace of every component on side `side` of the element, one state per
/// transverse node. Written as `v_0 + sum_p l_p (v_p - v_0)` so constants are
/// reproduced exactly.
pub fn extrapolate_side(vals: &[f64], nv: usize, basis: &BasisData, dim: usize, side: Side, out: &mut [f64]) {
    let n = basis.n_nodes();
    let dir = side.direction();
    let ell = match side {
        Side::Left | Side::Bottom => &basis.extrap_left,
        Side::Right | Side::Top => &basis.extrap_right,
    };
    let lines = if dim == 1 { 1 } else { n };
    for line in 0..lines {
        let q0 = node_on_line(dim, dir, line, 0, n);
        for k in 0..nv {
            let v0 = vals[q0 * nv + k];
            let mut acc = 0.0;
            for (p, l) in ell.iter().enumerate().skip(1) {
                acc += l * (vals[node_on_line(dim, dir, line, p, n) * nv + k] - v0);
            }
            out[line * nv + k] = v0 + acc;
        }
    }
}

/// Rusanov flux from time-averaged traces: `(F- + F+)/2 - a/2 (U+ - U-)`.
#[inline]
pub fn time_avg_numflux(u_minus: &[f64], u_plus: &[f64], f_minus: &[f64], f_plus: &[f64], a: f64, out: &mut [f64]) {
    for k in 0..out.len() {
        out[k] = 0.5 * (f_minus[k] + f_plus[k]) - 0.5 * a * (u_plus[k] - u_minus[k]);
    }
}

/// `dt = cfl min_d(dx_d / a_d) / (2N + 1)`.
pub fn compute_dt(mesh: &Mesh, degree: usize, speeds: [f64; 2], cfl: f64) -> f64 {
    let h = (0..mesh.dim)
        .map(|d| mesh.dx[d] / speeds[d])
        .fold(f64::INFINITY, f64::min);
    cfl * h / (2 * degree + 1) as f64
}

/// Per-element scratch for the stage loop and its time averages.
#[derive(Debug, Clone)]
pub struct StageWorkspace {
    pub stages: usize,
    pub len: usize,
    /// Stage states `w^(i)`, stage after stage.
    pub stage_states: Vec<f64>,
    /// Local flux divergence of each stage state.
    pub stage_derivs: Vec<f64>,
    /// Relaxation source at each post-solve stage state.
    pub stage_sources: Vec<f64>,
    /// Time-averaged solution `sum b~_i w^(i)`.
    pub u_avg: Vec<f64>,
    /// Time-averaged source `sum b_i s(w^(i))`.
    pub s_avg: Vec<f64>,
    flux: Vec<f64>,
    deriv: Vec<f64>,
    node: Vec<f64>,
}

impl StageWorkspace {
    pub fn new(stages: usize, nodes: usize, nv: usize) -> Self {
        let len = nodes * nv;
        StageWorkspace {
            stages,
            len,
            stage_states: vec![0.0; stages * len],
            stage_derivs: vec![0.0; stages * len],
            stage_sources: vec![0.0; stages * len],
            u_avg: vec![0.0; len],
            s_avg: vec![0.0; len],
            flux: vec![0.0; len],
            deriv: vec![0.0; len],
            node: vec![0.0; nv],
        }
    }

    pub fn stage(&self, i: usize) -> &[f64] {
        &self.stage_states[i * self.len..(i + 1) * self.len]
    }
}

/// Everything a step needs that does not change between steps.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub eq: Equation,
    pub layout: AugmentedLayout,
    pub basis: BasisData,
    pub mesh: Mesh,
    pub tableau: DoubleButcherTableau,
    /// Tensor-product quadrature weights of one element.
    pub weights: Vec<f64>,
    /// Nodal-to-face-trace rows handed to the positivity limiter.
    pub probes: Vec<f64>,
    mirror: [Vec<f64>; 2],
}

/// Per-step counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Stage states touched by the per-stage limiter.
    pub stage_limited: usize,
}

/// Rows mapping the nodal values of one element to every face trace point.
fn face_probes(basis: &BasisData, dim: usize) -> Vec<f64> {
    let n = basis.n_nodes();
    let sides = [&basis.extrap_left, &basis.extrap_right];
    if dim == 1 {
        return sides.iter().flat_map(|e| e.iter().copied()).collect();
    }
    let mut rows = Vec::with_capacity(4 * n * n * n);
    for ex in sides {
        for jy in 0..n {
            let mut row = vec![0.0; n * n];
            row[jy * n..(jy + 1) * n].copy_from_slice(ex);
            rows.extend(row);
        }
    }
    for ey in sides {
        for ix in 0..n {
            let mut row = vec![0.0; n * n];
            for jy in 0..n {
                row[jy * n + ix] = ey[jy];
            }
            rows.extend(row);
        }
    }
    rows
}

impl Discretization {
    pub fn new(eq: Equation, basis: BasisData, mesh: Mesh, tableau: DoubleButcherTableau) -> Result<Self> {
        if eq.dim() != mesh.dim {
            return Err(Error::Config(format!(
                "{} is {}D but the mesh is {}D",
                eq.name(),
                eq.dim(),
                mesh.dim
            )));
        }
        let layout = AugmentedLayout::new(&eq);
        let n = basis.n_nodes();
        let weights = if mesh.dim == 1 {
            basis.weights.clone()
        } else {
            let mut w = vec![0.0; n * n];
            for jy in 0..n {
                for ix in 0..n {
                    w[jy * n + ix] = basis.weights[jy] * basis.weights[ix];
                }
            }
            w
        };
        let probes = face_probes(&basis, mesh.dim);
        let mirror = [mirror_signs(&eq, &layout, 0), mirror_signs(&eq, &layout, 1.min(layout.dim - 1))];
        Ok(Discretization {
            eq,
            layout,
            basis,
            mesh,
            tableau,
            weights,
            probes,
            mirror,
        })
    }

    pub fn nodes_per_element(&self) -> usize {
        self.basis.n_nodes().pow(self.mesh.dim as u32)
    }

    /// Nodes on one element side.
    pub fn trace_points(&self) -> usize {
        if self.mesh.dim == 1 {
            1
        } else {
            self.basis.n_nodes()
        }
    }

    pub fn n_sides(&self) -> usize {
        2 * self.mesh.dim
    }

    pub fn new_workspace(&self) -> StageWorkspace {
        StageWorkspace::new(self.tableau.stages, self.nodes_per_element(), self.layout.total())
    }

    /// Local flux divergence `sum_d (1/dx_d) D_d (A_d w)` of one element.
    fn local_divergence(&self, w: &[f64], speeds: [f64; 2], flux: &mut [f64], deriv: &mut [f64], out: &mut [f64]) {
        let nv = self.layout.total();
        out.fill(0.0);
        for dir in 0..self.mesh.dim {
            for (src, dst) in w.chunks_exact(nv).zip(flux.chunks_exact_mut(nv)) {
                augment_flux_into(src, dir, speeds, &self.layout, dst);
            }
            local_deriv(flux, nv, &self.basis, self.mesh.dim, dir, 1.0 / self.mesh.dx[dir], deriv);
            for (o, d) in out.iter_mut().zip(deriv.iter()) {
                *o += d;
            }
        }
    }

    fn check_stage_state(&self, u: &[f64]) -> Result<()> {
        let ok = u.iter().all(|x| x.is_finite()) && (!self.eq.is_euler() || u[0] > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::inadmissible(format!("stage state {u:?}")))
        }
    }

    /// Inner stages of one element, filling `ws.u_avg` and `ws.s_avg`.
    /// Returns whether the per-stage limiter changed anything.
    pub fn stage_loop(
        &self,
        wn: &[f64],
        eps: f64,
        speeds: [f64; 2],
        dt: f64,
        limiter: &PositivityConfig,
        ws: &mut StageWorkspace,
    ) -> Result<bool> {
        let tab = &self.tableau;
        let s = tab.stages;
        let nv = self.layout.total();
        let m = self.layout.n_phys;
        let len = ws.len;
        ws.u_avg.fill(0.0);
        ws.s_avg.fill(0.0);
        let mut limited = false;
        for i in 0..s {
            let wi = &mut ws.stage_states[i * len..(i + 1) * len];
            wi.copy_from_slice(wn);
            for j in 0..i {
                let (ae, ai) = (tab.ae(i, j), tab.ai(i, j));
                if ae != 0.0 {
                    let lj = &ws.stage_derivs[j * len..(j + 1) * len];
                    for (x, l) in wi.iter_mut().zip(lj) {
                        *x -= dt * ae * l;
                    }
                }
                if ai != 0.0 {
                    let sj = &ws.stage_sources[j * len..(j + 1) * len];
                    for (x, sv) in wi.iter_mut().zip(sj) {
                        *x += dt * ai * sv;
                    }
                }
            }
            let aii = tab.ai(i, i);
            for state in wi.chunks_exact_mut(nv) {
                self.check_stage_state(&state[..m]).map_err(|e| e.at_stage(i))?;
                if aii != 0.0 {
                    implicit_stage_solve(state, aii, dt, eps, &self.eq, &self.layout, &mut ws.node)?;
                    state.copy_from_slice(&ws.node);
                }
            }
            if limiter.enabled && limiter.per_stage {
                let out = limit_element(wi, &self.weights, &self.probes, &self.eq, &self.layout, limiter)
                    .map_err(|e| e.at_stage(i))?;
                limited |= out.activated();
            }
            let wi = &ws.stage_states[i * len..(i + 1) * len];
            if i + 1 < s {
                let div = &mut ws.stage_derivs[i * len..(i + 1) * len];
                self.local_divergence(wi, speeds, &mut ws.flux, &mut ws.deriv, div);
            }
            let si = &mut ws.stage_sources[i * len..(i + 1) * len];
            for (state, out) in wi.chunks_exact(nv).zip(si.chunks_exact_mut(nv)) {
                source_into(state, eps, &self.eq, &self.layout, out);
            }
            let (bt, b) = (tab.b_exp[i], tab.b_imp[i]);
            for k in 0..len {
                ws.u_avg[k] += bt * wi[k];
                ws.s_avg[k] += b * si[k];
            }
        }
        Ok(limited)
    }

    /// Advance `w` by `dt` with frozen per-element `eps` and speeds.
    pub fn step(
        &self,
        w: &NodalField,
        eps: &[f64],
        speeds: [f64; 2],
        dt: f64,
        limiter: &PositivityConfig,
    ) -> Result<(NodalField, StepStats)> {
        let n_el = self.mesh.n_elements();
        let np = self.nodes_per_element();
        let nv = self.layout.total();
        let len = np * nv;
        if w.n_elements != n_el || w.nodes_per_element != np || w.n_vars != nv {
            return Err(Error::InvalidArgument("field does not match the discretization".into()));
        }
        if eps.len() != n_el {
            return Err(Error::InvalidArgument(format!("need {n_el} eps values, got {}", eps.len())));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let nt = self.trace_points();
        let sides = self.n_sides();
        let side_len = nt * nv;
        let trace_len = sides * side_len;

        // Phase 1: stage loop, time averages and side traces.
        let mut u_avg = vec![0.0; n_el * len];
        let mut s_avg = vec![0.0; n_el * len];
        let mut tr_u = vec![0.0; n_el * trace_len];
        let mut tr_f = vec![0.0; n_el * trace_len];
        let stage_limited: usize = u_avg
            .par_chunks_mut(len)
            .zip(s_avg.par_chunks_mut(len))
            .zip(tr_u.par_chunks_mut(trace_len))
            .zip(tr_f.par_chunks_mut(trace_len))
            .enumerate()
            .map_init(
                || self.new_workspace(),
                |ws, (e, (((ua, sa), tu), tf))| -> Result<usize> {
                    let limited = self
                        .stage_loop(w.element(e), eps[e], speeds, dt, limiter, ws)
                        .map_err(|err| err.at_element(e))?;
                    ua.copy_from_slice(&ws.u_avg);
                    sa.copy_from_slice(&ws.s_avg);
                    for (si, side) in Side::ALL[..sides].iter().enumerate() {
                        let tu_side = &mut tu[si * side_len..(si + 1) * side_len];
                        extrapolate_side(ua, nv, &self.basis, self.mesh.dim, *side, tu_side);
                        let tf_side = &mut tf[si * side_len..(si + 1) * side_len];
                        for (src, dst) in tu_side.chunks_exact(nv).zip(tf_side.chunks_exact_mut(nv)) {
                            augment_flux_into(src, side.direction(), speeds, &self.layout, dst);
                        }
                    }
                    Ok(limited as usize)
                },
            )
            .try_reduce(|| 0, |a, b| Ok(a + b))?;

        // Phase 2: one numerical flux per face. Each element owns its right
        // and top faces plus any wall faces on its left and bottom.
        let mut fnum = vec![0.0; n_el * trace_len];
        fnum.par_chunks_mut(trace_len).enumerate().try_for_each(|(e, fe)| -> Result<()> {
            let mut ghost_u = vec![0.0; nv];
            let mut ghost_f = vec![0.0; nv];
            for (si, side) in Side::ALL[..sides].iter().enumerate() {
                let dir = side.direction();
                let a = speeds[dir];
                let own = e * trace_len + si * side_len;
                let out = &mut fe[si * side_len..(si + 1) * side_len];
                let upper = matches!(side, Side::Right | Side::Top);
                match self.mesh.neighbor(e, *side)? {
                    Neighbor::Element(nb) if upper => {
                        let opp = e_side_offset(nb, opposite(*side), trace_len, side_len);
                        for t in 0..nt {
                            let r = t * nv..(t + 1) * nv;
                            let (mi, pi) = (own + t * nv, opp + t * nv);
                            time_avg_numflux(
                                &tr_u[mi..mi + nv],
                                &tr_u[pi..pi + nv],
                                &tr_f[mi..mi + nv],
                                &tr_f[pi..pi + nv],
                                a,
                                &mut out[r],
                            );
                        }
                    }
                    Neighbor::Element(_) => {}
                    Neighbor::Ghost(_) => {
                        for t in 0..nt {
                            let r = t * nv..(t + 1) * nv;
                            let ii = own + t * nv;
                            let (iu, iff) = (&tr_u[ii..ii + nv], &tr_f[ii..ii + nv]);
                            ghost_state(iu, iff, &self.mirror[dir], &mut ghost_u, &mut ghost_f);
                            if upper {
                                time_avg_numflux(iu, &ghost_u, iff, &ghost_f, a, &mut out[r]);
                            } else {
                                time_avg_numflux(&ghost_u, iu, &ghost_f, iff, a, &mut out[r]);
                            }
                        }
                    }
                }
            }
            Ok(())
        })?;

        // Phase 3: FR update.
        let mut next = NodalField::zeros(n_el, np, nv);
        next.time = w.time + dt;
        let n = self.basis.n_nodes();
        let dim = self.mesh.dim;
        next.data
            .par_chunks_mut(len)
            .enumerate()
            .try_for_each_init(
                || (vec![0.0; len], vec![0.0; len]),
                |(flux, deriv), (e, out)| -> Result<()> {
                    let wn = w.element(e);
                    let ua = &u_avg[e * len..(e + 1) * len];
                    let sa = &s_avg[e * len..(e + 1) * len];
                    for k in 0..len {
                        out[k] = wn[k] + dt * sa[k];
                    }
                    for dir in 0..dim {
                        for (src, dst) in ua.chunks_exact(nv).zip(flux.chunks_exact_mut(nv)) {
                            augment_flux_into(src, dir, speeds, &self.layout, dst);
                        }
                        let inv_h = 1.0 / self.mesh.dx[dir];
                        local_deriv(flux, nv, &self.basis, dim, dir, inv_h, deriv);
                        for k in 0..len {
                            out[k] -= dt * deriv[k];
                        }
                        let (lo_side, hi_side) = if dir == 0 { (Side::Left, Side::Right) } else { (Side::Bottom, Side::Top) };
                        let lo_num = self.face_flux(e, lo_side, trace_len, side_len)?;
                        let hi_num = self.face_flux(e, hi_side, trace_len, side_len)?;
                        let lo_tr = e_side_offset(e, lo_side, trace_len, side_len);
                        let hi_tr = e_side_offset(e, hi_side, trace_len, side_len);
                        let lines = if dim == 1 { 1 } else { n };
                        for line in 0..lines {
                            for pos in 0..n {
                                let q = node_on_line(dim, dir, line, pos, n);
                                let gl = self.basis.corr_deriv_left[pos] * inv_h;
                                let gr = self.basis.corr_deriv_right[pos] * inv_h;
                                for k in 0..nv {
                                    let jl = fnum[lo_num + line * nv + k] - tr_f[lo_tr + line * nv + k];
                                    let jr = fnum[hi_num + line * nv + k] - tr_f[hi_tr + line * nv + k];
                                    out[q * nv + k] -= dt * (jl * gl + jr * gr);
                                }
                            }
                        }
                    }
                    if out.iter().all(|x| x.is_finite()) {
                        Ok(())
                    } else {
                        Err(Error::NonFinite { step: None })
                    }
                },
            )?;
        Ok((next, StepStats { stage_limited }))
    }

    /// Offset into the face-flux array of the flux through `side` of `e`.
    fn face_flux(&self, e: usize, side: Side, trace_len: usize, side_len: usize) -> Result<usize> {
        match (side, self.mesh.neighbor(e, side)?) {
            (Side::Left | Side::Bottom, Neighbor::Element(nb)) => Ok(e_side_offset(nb, opposite(side), trace_len, side_len)),
            _ => Ok(e_side_offset(e, side, trace_len, side_len)),
        }
    }
}

#[inline]
fn e_side_offset(e: usize, side: Side, trace_len: usize, side_len: usize) -> usize {
    e * trace_len + side as usize * side_len
}

fn opposite(side: Side) -> Side {
    match side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
        Side::Bottom => Side::Top,
        Side::Top => Side::Bottom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, NodeKind};
    use crate::jinxin::equilibrium_init;
    use crate::mesh::BoundaryKind;

    #[test]
    fn local_deriv_examples() {
        let b = build_basis(1, NodeKind::GaussLobattoLegendre).unwrap();
        let mut out = vec![0.0; 2];
        local_deriv(&[0.0, 2.0], 1, &b, 1, 0, 1.0, &mut out);
        assert!((out[0] - 2.0).abs() < 1e-15 && (out[1] - 2.0).abs() < 1e-15);
        local_deriv(&[3.0, 3.0], 1, &b, 1, 0, 1.0, &mut out);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn local_deriv_exact_on_polynomials_2d() {
        let b = build_basis(3, NodeKind::GaussLegendre).unwrap();
        let n = 4;
        let mut vals = vec![0.0; n * n];
        for jy in 0..n {
            for ix in 0..n {
                let (x, y) = (b.nodes[ix], b.nodes[jy]);
                vals[jy * n + ix] = x * x * x * y + y * y;
            }
        }
        let mut dx = vec![0.0; n * n];
        let mut dy = vec![0.0; n * n];
        local_deriv(&vals, 1, &b, 2, 0, 2.0, &mut dx);
        local_deriv(&vals, 1, &b, 2, 1, 0.5, &mut dy);
        for jy in 0..n {
            for ix in 0..n {
                let (x, y) = (b.nodes[ix], b.nodes[jy]);
                assert!((dx[jy * n + ix] - 2.0 * 3.0 * x * x * y).abs() < 1e-12);
                assert!((dy[jy * n + ix] - 0.5 * (x * x * x + 2.0 * y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extrapolation_exact_on_polynomials() {
        let b = build_basis(3, NodeKind::GaussLegendre).unwrap();
        let vals: Vec<f64> = b.nodes.iter().map(|x| 1.0 + x - 2.0 * x * x * x).collect();
        let mut l = [0.0];
        let mut r = [0.0];
        extrapolate_side(&vals, 1, &b, 1, Side::Left, &mut l);
        extrapolate_side(&vals, 1, &b, 1, Side::Right, &mut r);
        assert!((l[0] - 1.0).abs() < 1e-14);
        assert!(r[0].abs() < 1e-14);
    }

    #[test]
    fn numflux_examples() {
        let mut out = [0.0; 2];
        time_avg_numflux(&[0.0, 0.0], &[2.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 3.0, &mut out);
        assert_eq!(out, [-3.0, 0.0]);
        time_avg_numflux(&[1.0, 2.0], &[1.0, 2.0], &[5.0, -1.0], &[5.0, -1.0], 7.0, &mut out);
        assert_eq!(out, [5.0, -1.0]);
    }

    #[test]
    fn dt_formula() {
        let mesh = Mesh::new_1d(0.0, 1.0, 10, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
        let dt = compute_dt(&mesh, 3, [2.0, 0.0], 0.5);
        assert!((dt - 0.5 * 0.1 / 2.0 / 7.0).abs() < 1e-17);
        assert!((compute_dt(&mesh, 3, [4.0, 0.0], 0.5) - 0.5 * dt).abs() < 1e-17);
        let sq = Mesh::new_2d([0.0; 2], [1.0; 2], [4, 4], [BoundaryKind::Periodic; 4]).unwrap();
        assert_eq!(compute_dt(&sq, 2, [1.5, 1.5], 0.9), 0.9 * 0.25 / 1.5 / 5.0);
    }

    fn burgers_disc(nx: usize) -> Discretization {
        Discretization::new(
            Equation::Burgers,
            build_basis(3, NodeKind::GaussLegendre).unwrap(),
            Mesh::new_1d(0.0, 1.0, nx, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap(),
            DoubleButcherTableau::ssp3_433(),
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_constant_stages_are_trivial() {
        let d = burgers_disc(1);
        let mut u0 = NodalField::zeros(1, 4, 1);
        u0.data.fill(1.5);
        let w = equilibrium_init(&u0, &Equation::Burgers).unwrap();
        let mut ws = d.new_workspace();
        d.stage_loop(w.element(0), 1e-3, [2.0, 0.0], 0.01, &PositivityConfig::disabled(), &mut ws)
            .unwrap();
        for i in 0..ws.stages {
            assert_eq!(ws.stage(i), w.element(0));
        }
        assert!(ws.s_avg.iter().all(|s| *s == 0.0));
        for (a, b) in ws.u_avg.iter().zip(w.element(0)) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn stiff_stage_relaxes_to_equilibrium() {
        let d = burgers_disc(1);
        let mut w = NodalField::zeros(1, 4, 2);
        for (q, x) in d.basis.nodes.clone().iter().enumerate() {
            let s = w.state_mut(0, q);
            s[0] = 1.0 + x;
            s[1] = 5.0;
        }
        let mut ws = d.new_workspace();
        d.stage_loop(w.element(0), 1e-16, [3.0, 0.0], 1e-3, &PositivityConfig::disabled(), &mut ws)
            .unwrap();
        for st in ws.stage(0).chunks_exact(2) {
            assert!((st[1] - 0.5 * st[0] * st[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_element_periodic_conserves() {
        // The element is its own neighbor on both sides.
        let d = burgers_disc(1);
        let mut u0 = NodalField::zeros(1, 4, 1);
        for (q, x) in d.basis.nodes.iter().enumerate() {
            u0.data[q] = 2.0 + (x * (1.0 - x)).powi(2);
        }
        let w = equilibrium_init(&u0, &Equation::Burgers).unwrap();
        let dt = 1e-3;
        let (next, _) = d.step(&w, &[1e-3], [3.0, 0.0], dt, &PositivityConfig::disabled()).unwrap();
        assert!(next.all_finite());
        let mean_before: f64 = (0..4).map(|q| d.weights[q] * w.state(0, q)[0]).sum();
        let mean_after: f64 = (0..4).map(|q| d.weights[q] * next.state(0, q)[0]).sum();
        assert!((mean_before - mean_after).abs() < 1e-14);
    }
}
