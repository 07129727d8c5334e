//! Milnor–Witt K-theory of finite fields and rational function fields over
//! them: symbols and their normal form, residues at closed points of the
//! projective line, transfers along finite extensions, and Gersten complexes
//! of curves over finite fields.

pub mod audit;
pub mod config;
pub mod error;
pub mod fields;
pub mod gersten;
pub mod milnor;
pub mod mw;
pub mod quad_forms;
pub mod random;
pub mod report;
pub mod residues;

pub use error::{Error, Result};
