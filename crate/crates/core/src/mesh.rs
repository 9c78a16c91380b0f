//! Uniform Cartesian meshes in one and two dimensions.
//!
//! Elements are numbered x-fastest: `e = ey * nx + ex`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    ReflectingWall,
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryKind::Periodic),
            "wall" | "reflecting" | "reflectingwall" | "reflecting_wall" => {
                Ok(BoundaryKind::ReflectingWall)
            }
            other => Err(Error::Config(format!("unknown boundary kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    fn index(self) -> usize {
        self as usize
    }

    /// Coordinate direction normal to this side (0 = x, 1 = y).
    pub fn direction(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Element(usize),
    Ghost(Side),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub n: [usize; 2],
    pub dx: [f64; 2],
    /// Indexed by `Side as usize`: left, right, bottom, top.
    pub boundary: [BoundaryKind; 4],
}

impl Mesh {
    pub fn new_1d(x_lo: f64, x_hi: f64, nx: usize, left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        let mesh = Mesh {
            dim: 1,
            lo: [x_lo, 0.0],
            hi: [x_hi, 1.0],
            n: [nx, 1],
            dx: [(x_hi - x_lo) / nx as f64, 1.0],
            boundary: [left, right, BoundaryKind::Periodic, BoundaryKind::Periodic],
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn new_2d(lo: [f64; 2], hi: [f64; 2], n: [usize; 2], boundary: [BoundaryKind; 4]) -> Result<Self> {
        let mesh = Mesh {
            dim: 2,
            lo,
            hi,
            n,
            dx: [(hi[0] - lo[0]) / n[0] as f64, (hi[1] - lo[1]) / n[1] as f64],
            boundary,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        for d in 0..self.dim {
            if self.n[d] == 0 {
                return Err(Error::Config("mesh needs at least one element per direction".into()));
            }
            if !(self.dx[d] > 0.0) || !self.dx[d].is_finite() {
                return Err(Error::Config(format!(
                    "domain bounds [{}, {}] give a non-positive element width",
                    self.lo[d], self.hi[d]
                )));
            }
            let (a, b) = (self.boundary[2 * d], self.boundary[2 * d + 1]);
            if (a == BoundaryKind::Periodic) != (b == BoundaryKind::Periodic) {
                return Err(Error::Config(
                    "periodic boundaries must be paired on opposite sides".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn boundary_kind(&self, side: Side) -> BoundaryKind {
        self.boundary[side.index()]
    }

    /// `(ex, ey)` for a linear element index.
    pub fn coords(&self, e: usize) -> (usize, usize) {
        (e % self.n[0], e / self.n[0])
    }

    pub fn index(&self, ex: usize, ey: usize) -> usize {
        ey * self.n[0] + ex
    }

    fn check(&self, e: usize) -> Result<()> {
        if e >= self.n_elements() {
            return Err(Error::ElementOutOfRange {
                index: e,
                count: self.n_elements(),
            });
        }
        Ok(())
    }

    /// Physical coordinates of reference point `xi` (second component ignored in 1D).
    pub fn ref_to_phys(&self, e: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
        self.check(e)?;
        let (ex, ey) = self.coords(e);
        let x = self.lo[0] + ex as f64 * self.dx[0] + xi[0] * self.dx[0];
        let y = if self.dim == 2 {
            self.lo[1] + ey as f64 * self.dx[1] + xi[1] * self.dx[1]
        } else {
            0.0
        };
        Ok([x, y])
    }

    pub fn phys_to_ref(&self, e: usize, x: [f64; 2]) -> Result<[f64; 2]> {
        self.check(e)?;
        let (ex, ey) = self.coords(e);
        let xi = (x[0] - (self.lo[0] + ex as f64 * self.dx[0])) / self.dx[0];
        let eta = if self.dim == 2 {
            (x[1] - (self.lo[1] + ey as f64 * self.dx[1])) / self.dx[1]
        } else {
            0.0
        };
        Ok([xi, eta])
    }

    /// Element across `side`, wrapping on periodic boundaries.
    pub fn neighbor(&self, e: usize, side: Side) -> Result<Neighbor> {
        self.check(e)?;
        let (ex, ey) = self.coords(e);
        let [nx, ny] = self.n;
        if self.dim == 1 && side.direction() == 1 {
            return Err(Error::InvalidArgument("1D mesh has no bottom/top sides".into()));
        }
        let periodic = self.boundary_kind(side) == BoundaryKind::Periodic;
        let out = match side {
            Side::Left if ex > 0 => Neighbor::Element(self.index(ex - 1, ey)),
            Side::Left if periodic => Neighbor::Element(self.index(nx - 1, ey)),
            Side::Right if ex + 1 < nx => Neighbor::Element(self.index(ex + 1, ey)),
            Side::Right if periodic => Neighbor::Element(self.index(0, ey)),
            Side::Bottom if ey > 0 => Neighbor::Element(self.index(ex, ey - 1)),
            Side::Bottom if periodic => Neighbor::Element(self.index(ex, ny - 1)),
            Side::Top if ey + 1 < ny => Neighbor::Element(self.index(ex, ey + 1)),
            Side::Top if periodic => Neighbor::Element(self.index(ex, 0)),
            _ => Neighbor::Ghost(side),
        };
        Ok(out)
    }

    pub fn element_volume(&self) -> f64 {
        if self.dim == 2 {
            self.dx[0] * self.dx[1]
        } else {
            self.dx[0]
        }
    }
}
