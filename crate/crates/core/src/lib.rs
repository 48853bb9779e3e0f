//! Discrete Conduche fibrations and the combinatorics of their path spaces,
//! germ groupoids and Cuntz-Krieger algebras.

pub mod catalog;
pub mod ckalgebra;
pub mod cli;
pub mod error;
pub mod fibration;
pub mod fincat;
pub mod groupoid;
pub mod ids;
pub mod io;
pub mod matrix;
pub mod paths;
pub mod scalar;
pub mod span_sum;

pub use error::{Error, Result};
pub use fibration::Fibration;
pub use ids::{MorphismId, ObjectId};
