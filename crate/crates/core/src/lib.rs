pub mod abelian;
pub mod action;
pub mod error;
pub mod heisenberg;
pub mod intertwiner;
pub mod numerics;
pub mod peter_weyl;
pub mod product;
pub mod repfile;
pub mod report;
pub mod weyl;

pub use error::{Error, Result};
