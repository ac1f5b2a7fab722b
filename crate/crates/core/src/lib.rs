//! Stationary states, linear stability and dynamics of the gain/loss dimer
//! and trimer with linear and nonlinear gain and loss.

pub mod branches;
pub mod config;
pub mod continuation;
pub mod dynamics;
pub mod error;
pub mod linearization;
pub mod model;
pub mod reference;
pub mod roots;
pub mod run;
pub mod tables;
pub mod validation;

pub use error::{OligomerError, Result};
