//! Milnor–Witt K-theory: expressions, normal forms, twists, contractions.

pub mod class;
pub mod contraction;
pub mod expr;
pub mod twist;

pub use class::{normalize, normalize_in, MwClass, MwKey};
pub use expr::{parse_expression, MwExpression, Term};
pub use twist::TwistedClass;
