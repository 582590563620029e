//! A laboratory for the directed configuration model.

pub mod branching;
pub mod coupling;
pub mod degrees;
pub mod error;
pub mod graph;
pub mod hopcount;
pub mod par;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use rng::Seed;
