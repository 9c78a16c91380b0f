//! Ghost traces for reflecting walls.
//!
//! Periodic sides need no ghost: the mesh maps them to the wrapped neighbor.
//! At a wall normal to direction `d` the ghost solution trace is the mirror
//! image `R U`: the physical block picks up the reflection signs `S`, the
//! normal relaxation block `-S` and any tangential block `S` (the parity of the
//! corresponding Euler flux under normal-velocity reversal). The ghost flux
//! trace is the relaxation flux of the mirrored state. Because that flux is
//! linear, it equals `-R F` and never needs the relaxation speeds.

use crate::equations::Equation;
use crate::jinxin::AugmentedLayout;

/// Per-component factors of the mirror map `R` across a wall normal to `dir`.
pub fn mirror_signs(eq: &Equation, layout: &AugmentedLayout, dir: usize) -> Vec<f64> {
    let s = eq.reflection_signs(dir);
    let mut out = vec![0.0; layout.total()];
    out[layout.u_range()].copy_from_slice(&s);
    for d in 0..layout.dim {
        let sign = if d == dir { -1.0 } else { 1.0 };
        for (o, si) in out[layout.v_range(d)].iter_mut().zip(&s) {
            *o = sign * si;
        }
    }
    out
}

/// Ghost `(U, F)` traces from the interior ones at one wall point.
pub fn ghost_state(u_in: &[f64], f_in: &[f64], signs: &[f64], u_out: &mut [f64], f_out: &mut [f64]) {
    for k in 0..signs.len() {
        u_out[k] = signs[k] * u_in[k];
        f_out[k] = -signs[k] * f_in[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::DEFAULT_GAMMA;
    use crate::jinxin::{augment_flux, equilibrium_init};
    use crate::field::NodalField;

    const E1: Equation = Equation::Euler1D { gamma: DEFAULT_GAMMA };
    const E2: Equation = Equation::Euler2D { gamma: DEFAULT_GAMMA };

    #[test]
    fn velocity_negated() {
        let lay = AugmentedLayout::new(&E1);
        let s = mirror_signs(&E1, &lay, 0);
        let u = [1.0, 0.5, 2.5, 0.0, 0.0, 0.0];
        let mut ug = [0.0; 6];
        let mut fg = [0.0; 6];
        ghost_state(&u, &[0.0; 6], &s, &mut ug, &mut fg);
        assert_eq!(&ug[..3], &[1.0, -0.5, 2.5]);
    }

    #[test]
    fn stationary_equilibrium_is_its_own_mirror() {
        let lay = AugmentedLayout::new(&E1);
        let mut u0 = NodalField::zeros(1, 1, 3);
        u0.data.copy_from_slice(&[1.0, 0.0, 5.0]);
        let w = equilibrium_init(&u0, &E1).unwrap();
        let u = w.state(0, 0).to_vec();
        assert_eq!((u[3], u[5]), (0.0, 0.0));
        assert!((u[4] - 2.0).abs() < 1e-15);
        let f = augment_flux(&u, 0, [3.0, 0.0], &lay);
        let mut ug = vec![0.0; 6];
        let mut fg = vec![0.0; 6];
        ghost_state(&u, &f, &mirror_signs(&E1, &lay, 0), &mut ug, &mut fg);
        assert_eq!(ug, u);
        assert_eq!(fg, f);
    }

    #[test]
    fn ghost_flux_is_flux_of_ghost_state() {
        for (eq, dirs) in [(E1, 1usize), (E2, 2)] {
            let lay = AugmentedLayout::new(&eq);
            let w: Vec<f64> = (0..lay.total()).map(|k| 0.3 + 0.17 * k as f64).collect();
            let speeds = [2.0, 3.0];
            for dir in 0..dirs {
                let s = mirror_signs(&eq, &lay, dir);
                let f = augment_flux(&w, dir, speeds, &lay);
                let mut ug = vec![0.0; lay.total()];
                let mut fg = vec![0.0; lay.total()];
                ghost_state(&w, &f, &s, &mut ug, &mut fg);
                let direct = augment_flux(&ug, dir, speeds, &lay);
                for k in 0..lay.total() {
                    assert!((fg[k] - direct[k]).abs() < 1e-14, "{eq:?} dir {dir} k {k}");
                }
            }
        }
    }

    #[test]
    fn equilibrium_mirrors_to_equilibrium() {
        // v = f(u) on the interior implies v = f(u) on the ghost.
        let eq = E2;
        let lay = AugmentedLayout::new(&eq);
        let mut u0 = NodalField::zeros(1, 1, 4);
        u0.data.copy_from_slice(&eq.conservative(&[1.3, 0.4, -0.7, 2.0]));
        let w = equilibrium_init(&u0, &eq).unwrap();
        for dir in 0..2 {
            let s = mirror_signs(&eq, &lay, dir);
            let mut ug = vec![0.0; lay.total()];
            let mut fg = vec![0.0; lay.total()];
            ghost_state(w.state(0, 0), &vec![0.0; lay.total()], &s, &mut ug, &mut fg);
            for d in 0..2 {
                let f = eq.flux(&ug[..4], d).unwrap();
                for k in 0..4 {
                    assert!((ug[lay.v_range(d).start + k] - f[k]).abs() < 1e-14);
                }
            }
        }
    }
}
