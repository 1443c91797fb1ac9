//! Heat-flow representations of the Beurling–Ahlfors operator on
//! exterior-algebra-valued functions, with numerical checks of its norm
//! bounds.

pub mod asymptotics;
pub mod error;
pub mod exec;
pub mod exterior;
pub mod fourier;
pub mod heat_matrix;
pub mod quadrature;
pub mod special;
pub mod stochastic;

pub use error::{Error, Result};
pub use exec::Exec;
