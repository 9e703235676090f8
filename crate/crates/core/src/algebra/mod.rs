//! Prime-field arithmetic, dense matrices and encoding matrices.

pub mod encoding;
pub mod field;
pub mod matrix;

pub use encoding::{EncodingMatrix, Flavor};
pub use field::{Fe, PrimeField};
pub use matrix::{dot, Matrix};
