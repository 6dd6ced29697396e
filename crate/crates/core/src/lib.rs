//! Numerical toolkit for one-parameter semigroups of holomorphic self-maps of the unit disk
//! with Denjoy–Wolff point 1.

pub mod error;
pub mod expr;
pub mod geometry;

pub use error::{Error, Result};
pub use expr::FunctionExpr;
pub use geometry::{Point, C64};
pub mod flow;
pub mod generator;
pub mod limits;
pub mod ode;
pub mod quad;
pub mod report;

/// Map over a slice, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, U: Send>(v: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        v.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.iter().map(f).collect()
    }
}
pub mod abel;
pub mod catalog;
pub mod classify;
pub mod conjugation;
pub mod plot;
pub mod verify;
