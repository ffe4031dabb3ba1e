//! Zeta-regularized determinants of Laplacians.
//!
//! Closed forms for three- and five-dimensional Heisenberg manifolds, flat
//! tori of dimension 2 to 4 and product manifolds, together with a
//! formula-free spectral oracle (heat trace plus split Mellin transform) that
//! every closed form is checked against.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

mod error;
mod fm;
mod result;

pub mod analytic;
pub mod heisenberg;
pub mod oracle;
pub mod product;
pub mod specfun;
pub mod tori;

pub use error::{Error, Result};
pub use result::DetResult;
