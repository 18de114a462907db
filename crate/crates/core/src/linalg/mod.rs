//! Exact linear algebra over prime fields and the rationals.

pub mod field;
pub mod matrix;

pub use field::{Field, FieldSpec, Prime, PrimeField, Rationals};
pub use matrix::RowMatrix;
