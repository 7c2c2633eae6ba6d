//! Representation of tabular variables as points on a 2D latent space via a
//! beta-variational autoencoder.

pub mod categorical;
pub mod error;
pub mod gradfield;
pub mod ingest;
pub mod latent;
pub mod metadata;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod table;
pub mod vae;

pub use error::{Error, Result};
pub use table::DataTable;
