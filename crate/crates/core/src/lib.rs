//! Transverse stability of ablation fronts in the limit of small cold-side
//! temperature.

pub mod cli;
pub mod coldzone;
pub mod error;
pub mod evans;
pub mod hotzone;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod ode;
pub mod wave;

pub use error::{Error, Result};
