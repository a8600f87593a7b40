pub mod algebra;
pub mod calculus;
pub mod catalog;
pub mod duality;
pub mod error;
pub mod hochschild;
pub mod koszul;
pub mod linalg;
pub mod properties;
pub mod scalars;
pub mod tensor;

pub use error::{Error, Result};
