//! Closed-form and asymptotic secrecy outage analysis.
//!
//! The LU's coherent cascade amplitude is modelled as Gamma distributed
//! with shape `α+1` and scale `β`; Eve's on-off block cascade keeps its
//! exact K-distribution. Integrals that have no closed form are evaluated
//! with a shared [`QuadratureRule`](crate::specfun::QuadratureRule).

mod cdf;
mod sop;

pub use cdf::{
    cdf_gamma_ec, cdf_gamma_ec_ipsic, cdf_gamma_ec_psic, cdf_gamma_eu, cdf_gamma_uc, cdf_gamma_uc_ipsic,
    cdf_gamma_uc_psic, cdf_gamma_uu, cdf_reference, CdfVariant,
};
pub use sop::{
    asym_sop_backscatter, asym_sop_data, diversity_order, energy_efficiency_from_throughput,
    secrecy_energy_efficiency, secrecy_throughput, sop_backscatter, sop_backscatter_ipsic, sop_backscatter_psic,
    sop_data, system_sop_independent, thresholds, throughput_from_sop, EpsilonThresholds, Throughput,
};
