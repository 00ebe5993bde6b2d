//! Exact critical orbits of `z^d + c` over the rationals, the Zsigmondy sets
//! of their numerators, and numerical checks of the surrounding bounds.

pub mod aberth;
pub mod arith;
pub mod bounds;
pub mod cache;
pub mod classifier;
pub mod divisibility;
pub mod enclosure;
pub mod error;
pub mod json;
pub mod mahler;
pub mod mandelbrot;
pub mod orbit;
pub mod parse;
pub mod sweep;

pub use error::{Error, Result};
pub use orbit::{Orbit, OrbitTerm, Parameter};
