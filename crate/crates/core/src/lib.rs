//! Simulation and verification toolkit for the one-dimensional classical
//! jellium (Coulomb gas in a smeared background).

pub mod background;
pub mod edge;
pub mod error;
pub mod gas;
pub mod order_stats;
pub mod ordered;
pub mod potential;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod series;
pub mod stats;

pub use background::{BackgroundSpec, BackgroundVariant};
pub use error::{Error, Result};
pub use gas::{Configuration, Gas, GasParams};
pub use potential::{ClosedForm, Potential1D};
pub use rng::StreamRng;
