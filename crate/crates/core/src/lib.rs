pub mod autodiff;
pub mod data;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod layers;
pub mod linalg;
pub mod ntk;
pub mod operator;
pub mod optim;
pub mod pinn;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
