//! Exact finite-precision algebra for iterated Frobenius-twisted actions on
//! truncated power series over `F_p`.

pub mod arith;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod gf;
pub mod ideals;
pub mod linalg;
pub mod moore;
pub mod padic;
pub mod parse;
pub mod selftest;
pub mod series;

pub use error::{Error, Result};
pub use gf::{FieldSpec, FqElem, GaloisField};
pub use padic::{LocalFieldSpec, LocalRing, OFElem};
pub use series::{Degree, Mono, SeriesRing, TruncatedSeries};
pub use ideals::{IdealHandle, NuValue};
pub use moore::ExactPoly;
pub use dynamics::{ActionContext, GammaEndomorphism};
