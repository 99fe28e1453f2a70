//! Sparse homological neural networks built from information filtering
//! networks.
//!
//! The pipeline runs: data → [`corr`] similarity → [`tmfg`] graph →
//! [`homology`] Hasse diagram → [`hnn`] sparse unit, with [`timeseries`]
//! wrapping the unit behind a shared LSTM encoder and [`bench`] providing
//! metrics, baselines and the ablation harness.

pub mod bench;
pub mod corr;
pub mod error;
pub mod hnn;
pub mod homology;
pub mod timeseries;
pub mod tmfg;

pub use error::{Error, Result};
