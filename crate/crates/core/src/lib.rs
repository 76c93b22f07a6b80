//! Desk-scale simulator of a recirculating-loop transmission experiment
//! comparing hollow-core fibre (HCF) and standard single-mode fibre (SMF).
//!
//! The pipeline is
//! [`transmitter`] → [`recirc::run_loop`] → [`dsp`] → [`metrics`],
//! orchestrated per sweep point by [`experiment`].

pub mod dsp;
pub mod error;
pub mod experiment;
pub mod fiber;
pub mod metrics;
pub mod recirc;
pub mod seed;
pub mod signal;
pub mod spectral;
pub mod transmitter;

pub use error::{Error, Result};
pub use signal::{ChannelGrid, SignalBlock};
