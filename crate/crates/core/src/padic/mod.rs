//! p-adic scalars, extension rings and the linear algebra they share.

pub mod linalg;
pub mod ring;
pub mod scalar;
pub mod valuation;

pub use ring::{ExtElem, ExtensionRing, ModulusSpec, Ring};
pub use scalar::{ArithOp, PadicScalar, ScalarRecord};
pub use valuation::{q, qi, Val, Q};
