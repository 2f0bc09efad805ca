pub mod error;
pub mod fitting;
pub mod jostmodel;
pub mod rmatrix;
pub mod ode;
pub mod oracle;
pub mod poles;
pub mod specfun;

pub use error::{Error, Result};
