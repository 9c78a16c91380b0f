//! High-order flux reconstruction with Jin-Xin relaxation as the shock
//! capturing mechanism.
//!
//! A nonlinear conservation law is replaced by a linear relaxation system with
//! a stiff source. The relaxation system is advanced with a compact Runge-Kutta
//! flux reconstruction IMEX step, and the relaxation parameter is chosen per
//! element from a modal smoothness indicator: large where the solution is
//! rough, tiny where it is smooth.

pub mod basis;
pub mod boundary;
pub mod crkfr;
pub mod error;
pub mod equations;
pub mod field;
pub mod indicator;
pub mod jinxin;
pub mod mesh;
pub mod oracle_fv;
pub mod output;
pub mod positivity;
pub mod problems;
pub mod runner;
pub mod tableau;

pub use error::{Error, Result};
