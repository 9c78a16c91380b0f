//! Reference solutions that share no code path with the relaxation solver:
//! a first-order Rusanov finite-volume scheme with forward Euler on the
//! original nonlinear law, and the characteristic solution of smooth Burgers.

use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::mesh::BoundaryKind;

pub const MAX_FV_CFL: f64 = 0.45;

/// Uniform 1D finite-volume grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvGrid {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    pub boundary: BoundaryKind,
}

impl FvGrid {
    pub fn periodic(lo: f64, hi: f64, cells: usize) -> Self {
        FvGrid {
            lo,
            hi,
            cells,
            boundary: BoundaryKind::Periodic,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.dx()
    }
}

/// Cell averages (one state per cell, `M` values each) at `t_final`.
/// Initial averages are point values at cell centers.
pub fn fv_solve(
    eq: &Equation,
    u0: &dyn Fn(f64) -> Vec<f64>,
    grid: &FvGrid,
    t_final: f64,
    cfl: f64,
) -> Result<Vec<Vec<f64>>> {
    if eq.dim() != 1 {
        return Err(Error::InvalidArgument("the finite-volume oracle is one-dimensional".into()));
    }
    if !(cfl > 0.0 && cfl <= MAX_FV_CFL) {
        return Err(Error::InvalidArgument(format!("oracle cfl must be in (0, {MAX_FV_CFL}], got {cfl}")));
    }
    let n = grid.cells;
    let dx = grid.dx();
    let mut u: Vec<Vec<f64>> = (0..n).map(|i| u0(grid.center(i))).collect();
    for (i, s) in u.iter().enumerate() {
        eq.check_admissible(s).map_err(|e| e.at_element(i))?;
    }
    let signs = eq.reflection_signs(0);
    // Scalar laws obey a maximum principle, so the sup of |f'| over the
    // initial data range bounds every wave speed. A local two-state estimate
    // is not enough for non-convex fluxes (f' can vanish at both states).
    let scalar_bound = if eq.n_vars() == 1 {
        let lo = u.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
        let hi = u.iter().map(|s| s[0]).fold(f64::NEG_INFINITY, f64::max);
        let samples = 4096;
        let mut a = 0.0f64;
        for i in 0..=samples {
            let v = lo + (hi - lo) * i as f64 / samples as f64;
            a = a.max(eq.max_abs_eig(&[v], 0)?);
        }
        Some(a * 1.01)
    } else {
        None
    };
    let m = eq.n_vars();
    let mut t = 0.0;
    let mut cell_flux = vec![0.0; n * m];
    let mut ghost_l = vec![0.0; m];
    let mut ghost_r = vec![0.0; m];
    let mut ghost_fl = vec![0.0; m];
    let mut ghost_fr = vec![0.0; m];
    let mut flux = vec![0.0; (n + 1) * m];
    while t < t_final {
        let lam_max = match scalar_bound {
            Some(a) => a,
            None => u
                .iter()
                .map(|s| eq.max_abs_eig(s, 0))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max),
        };
        let mut dt = if lam_max > 0.0 { cfl * dx / lam_max } else { t_final - t };
        if t + dt > t_final {
            dt = t_final - t;
        }
        for (i, s) in u.iter().enumerate() {
            eq.check_admissible(s).map_err(|e| e.at_element(i))?;
            eq.flux_into(s, 0, &mut cell_flux[i * m..(i + 1) * m]);
        }
        if grid.boundary == BoundaryKind::ReflectingWall {
            for k in 0..m {
                ghost_l[k] = u[0][k] * signs[k];
                ghost_r[k] = u[n - 1][k] * signs[k];
            }
            eq.flux_into(&ghost_l, 0, &mut ghost_fl);
            eq.flux_into(&ghost_r, 0, &mut ghost_fr);
        }
        for face in 0..=n {
            let (left, fl, right, fr): (&[f64], &[f64], &[f64], &[f64]) = match grid.boundary {
                BoundaryKind::Periodic => {
                    let (l, r) = ((face + n - 1) % n, face % n);
                    (&u[l], &cell_flux[l * m..(l + 1) * m], &u[r], &cell_flux[r * m..(r + 1) * m])
                }
                BoundaryKind::ReflectingWall if face == 0 => (&ghost_l, &ghost_fl, &u[0], &cell_flux[..m]),
                BoundaryKind::ReflectingWall if face == n => {
                    (&u[n - 1], &cell_flux[(n - 1) * m..], &ghost_r, &ghost_fr)
                }
                BoundaryKind::ReflectingWall => (
                    &u[face - 1],
                    &cell_flux[(face - 1) * m..face * m],
                    &u[face],
                    &cell_flux[face * m..(face + 1) * m],
                ),
            };
            let a = match scalar_bound {
                Some(a) => a,
                None => eq.max_abs_eig(left, 0)?.max(eq.max_abs_eig(right, 0)?),
            };
            let out = &mut flux[face * m..(face + 1) * m];
            for k in 0..m {
                out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * a * (right[k] - left[k]);
            }
        }
        for (i, s) in u.iter_mut().enumerate() {
            for k in 0..m {
                s[k] -= dt / dx * (flux[(i + 1) * m + k] - flux[i * m + k]);
            }
        }
        t += dt;
    }
    Ok(u)
}

/// Convenience wrapper for scalar laws.
pub fn fv_solve_scalar(eq: &Equation, u0: &dyn Fn(f64) -> f64, grid: &FvGrid, t_final: f64, cfl: f64) -> Result<Vec<f64>> {
    let wrapped = |x: f64| vec![u0(x)];
    Ok(fv_solve(eq, &wrapped, grid, t_final, cfl)?.into_iter().map(|s| s[0]).collect())
}

/// Value at `x` of the piecewise-constant reconstruction of `cells`.
pub fn sample_cells(cells: &[f64], grid: &FvGrid, x: f64) -> f64 {
    let i = ((x - grid.lo) / grid.dx()).floor();
    let i = (i.max(0.0) as usize).min(cells.len() - 1);
    cells[i]
}

/// Smooth Burgers data `u0` with known range and derivative, solved along
/// characteristics `u = u0(x - u t)` before the first shock forms.
pub struct SmoothBurgers<'a> {
    pub u0: &'a dyn Fn(f64) -> f64,
    /// Lower and upper bound of `u0`.
    pub range: (f64, f64),
    /// `-1 / min u0'`.
    pub shock_time: f64,
}

impl SmoothBurgers<'_> {
    /// `u0 = 2 + sin(pi (x - 0.7))`, shock forms at `t = 1/pi`.
    pub fn sine() -> SmoothBurgers<'static> {
        SmoothBurgers {
            u0: &crate::problems::burgers_sine_u0,
            range: (1.0, 3.0),
            shock_time: 1.0 / std::f64::consts::PI,
        }
    }

    pub fn solve(&self, x: f64, t: f64) -> Result<f64> {
        burgers_exact_smooth(self.u0, self.range, self.shock_time, x, t)
    }
}

/// Root of `g(u) = u - u0(x - u t)` on `range`. For `t` below the shock time
/// `g` is increasing, so bisection always brackets the unique root; secant
/// steps speed it up.
pub fn burgers_exact_smooth(u0: &dyn Fn(f64) -> f64, range: (f64, f64), shock_time: f64, x: f64, t: f64) -> Result<f64> {
    if t >= shock_time {
        return Err(Error::InvalidArgument(format!(
            "t = {t} is past the shock formation time {shock_time}"
        )));
    }
    let g = |u: f64| u - u0(x - u * t);
    let (mut lo, mut hi) = range;
    let (mut glo, mut ghi) = (g(lo), g(hi));
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::InvalidArgument("characteristic root not bracketed by the data range".into()));
    }
    for _ in 0..200 {
        let secant = lo - glo * (hi - lo) / (ghi - glo);
        let mid = 0.5 * (lo + hi);
        let cand = if secant > lo && secant < hi { secant } else { mid };
        let gc = g(cand);
        if gc.abs() < 1e-15 {
            return Ok(cand);
        }
        if gc < 0.0 {
            lo = cand;
            glo = gc;
        } else {
            hi = cand;
            ghi = gc;
        }
        // Alternate with a bisection step so one-sided secant stalls cannot occur.
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm < 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
