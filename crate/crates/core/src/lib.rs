//! Secrecy performance of RIS-assisted ambient backscatter networks.
//!
//! The crate has two independent routes to every outage probability:
//! [`analytic`] evaluates the closed-form and asymptotic expressions, and
//! [`montecarlo`] samples the underlying fading model directly. [`harness`]
//! drives both over parameter sweeps and cross-checks them.

pub mod analytic;
pub mod error;
pub mod harness;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
