//! Numerical radii of operators on finite-dimensional weighted `l_p` spaces.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod index_search;
pub mod lp_space;
pub mod operator;
pub mod radii;
pub mod random;
pub mod theorem;
pub mod verification;

pub use error::{Error, Result};
pub use lp_space::{Field, LpSpace, Vector};
pub use operator::{apply, Operator};
pub use radii::{Objective, RadiusEstimate, SolverConfig};
