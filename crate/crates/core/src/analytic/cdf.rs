//! CDFs of the four SINRs under the Gamma fit of the coherent cascade.
//!
//! The quadrature forms integrate over the residual-interference power (or,
//! for the LU data SINR, over the normalized cascade amplitude) with a
//! Gauss-Laguerre rule; each sum is accumulated in log space. The
//! `cdf_reference` family integrates the same exact integrals adaptively
//! and serves as the yardstick for the quadrature forms.

use crate::error::{Error, Result};
use crate::model::DerivedParams;
use crate::specfun::{
    integrate_semi_infinite, ln_bessel_k, ln_gamma, ln_reg_lower_gamma, log_sum_exp_iter, reg_lower_gamma,
    QuadratureRule,
};

pub(crate) fn clamp01(p: f64) -> f64 {
    if p.is_nan() {
        p
    } else {
        p.clamp(0.0, 1.0)
    }
}

/// `1 - exp(ln_survival)` without cancellation.
pub(crate) fn one_minus_exp(ln_survival: f64) -> f64 {
    clamp01(-ln_survival.exp_m1())
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("CDF argument must be >= 0, got {x}")));
    }
    Ok(())
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 || q > u32::MAX as usize {
        return Err(Error::invalid(format!("block size must be >= 1, got {q}")));
    }
    Ok(())
}

/// `ln E[exp(-(c0 + c2 t^2))]` for `t ~ Gamma(α+1, 1)`, by quadrature.
pub(crate) fn ln_gamma_laplace(dp: &DerivedParams, rule: &QuadratureRule, c0: f64, c2: f64) -> f64 {
    let a = dp.alpha;
    let norm = ln_gamma(a + 1.0).unwrap_or(f64::NAN);
    log_sum_exp_iter(rule.iter().map(|(t, lw)| lw + a * t.ln() - norm - c0 - c2 * t * t))
}

/// CDF of the LU's SINR for its own data, interference from the
/// backscatter signal treated as noise.
pub fn cdf_gamma_uu(x: f64, dp: &DerivedParams, kappa: f64, rule: &QuadratureRule) -> Result<f64> {
    check_x(x)?;
    let k2b2 = kappa * kappa * dp.beta * dp.beta;
    let c0 = x / (dp.omega_u * dp.rho);
    let c2 = x * k2b2 / dp.omega_u;
    Ok(one_minus_exp(ln_gamma_laplace(dp, rule, c0, c2)))
}

/// `Σ_d G_d P(α+1, arg(τ_d))`, summed in log space.
pub(crate) fn mixed_lower_gamma<F>(dp: &DerivedParams, rule: &QuadratureRule, arg: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let a = dp.alpha + 1.0;
    let mut terms = Vec::with_capacity(rule.order());
    for (t, lw) in rule.iter() {
        terms.push(lw + ln_reg_lower_gamma(a, arg(t))?);
    }
    Ok(clamp01(log_sum_exp_iter(terms.iter().copied()).exp()))
}

/// CDF of the LU's backscatter SINR with residual interference level
/// `varpi`; always uses the quadrature, even for `varpi = 0`.
pub fn cdf_gamma_uc_ipsic(x: f64, dp: &DerivedParams, kappa: f64, varpi: f64, rule: &QuadratureRule) -> Result<f64> {
    check_x(x)?;
    let denom = dp.rho * kappa * kappa * dp.beta * dp.beta;
    let slope = varpi * dp.rho * dp.omega_ipu;
    mixed_lower_gamma(dp, rule, |t| (x * (slope * t + 1.0) / denom).sqrt())
}

/// CDF of the LU's backscatter SINR after perfect SIC.
pub fn cdf_gamma_uc_psic(x: f64, dp: &DerivedParams, kappa: f64) -> Result<f64> {
    check_x(x)?;
    Ok(clamp01(reg_lower_gamma(dp.alpha + 1.0, (x / dp.rho).sqrt() / (dp.beta * kappa))?))
}

/// Dispatches on `varpi`: zero selects the closed form.
pub fn cdf_gamma_uc(x: f64, dp: &DerivedParams, kappa: f64, varpi: f64, rule: &QuadratureRule) -> Result<f64> {
    if varpi == 0.0 {
        cdf_gamma_uc_psic(x, dp, kappa)
    } else {
        cdf_gamma_uc_ipsic(x, dp, kappa, varpi, rule)
    }
}

/// CDF of Eve's data SINR, cascade through one on-off block of `q`
/// elements.
///
/// Nodes where the substituted variable is nonpositive lie outside its
/// support and are dropped. The substitution is not shifted to the true
/// lower limit `x/(Ω_e ρ_e)`, so accuracy degrades when the cascade term is
/// a narrow peak relative to the node spacing; [`cdf_reference`] gives the
/// exact value.
pub fn cdf_gamma_eu(x: f64, dp: &DerivedParams, kappa: f64, q: usize, rule: &QuadratureRule) -> Result<f64> {
    check_q(q)?;
    if !(x > 0.0) {
        return Err(Error::domain(format!("Eve data SINR CDF needs x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let k2 = kappa * kappa;
    let oo = dp.omega_sr * dp.omega_re;
    let qf = q as f64;
    let order = (q - 1) as u32;
    let ln_pre = (2.0 * dp.omega_e).ln() - ln_gamma(qf)? - (k2 * x).ln() - 0.5 * (qf + 1.0) * oo.ln();
    let mut terms = Vec::with_capacity(rule.order());
    for (t, lw) in rule.iter() {
        let xi = (dp.omega_e * dp.rho_e * t - x) / (k2 * dp.rho_e * x);
        if !(xi > 0.0) {
            continue;
        }
        let lk = ln_bessel_k(order, 2.0 * (xi / oo).sqrt())?;
        terms.push(lw + 0.5 * (qf - 1.0) * xi.ln() + lk);
    }
    if terms.is_empty() {
        return Ok(1.0);
    }
    Ok(one_minus_exp(ln_pre + log_sum_exp_iter(terms.iter().copied())))
}

/// `ln[(2/Γ(Q)) ξ^{Q/2} K_Q(2√ξ)]`, the log survival function of the
/// normalized block cascade power.
fn ln_block_survival(q: usize, xi: f64) -> Result<f64> {
    let qf = q as f64;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(std::f64::consts::LN_2 - ln_gamma(qf)? + 0.5 * qf * xi.ln() + ln_bessel_k(q as u32, 2.0 * xi.sqrt())?)
}

/// CDF of Eve's backscatter SINR with residual interference `varpi`;
/// always uses the quadrature.
pub fn cdf_gamma_ec_ipsic(
    x: f64,
    dp: &DerivedParams,
    kappa: f64,
    q: usize,
    varpi: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_x(x)?;
    check_q(q)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let scale = x / (kappa * kappa * dp.rho_e * dp.omega_sr * dp.omega_re);
    let slope = varpi * dp.rho_e * dp.omega_ipe;
    let mut terms = Vec::with_capacity(rule.order());
    for (t, lw) in rule.iter() {
        terms.push(lw + ln_block_survival(q, scale * (slope * t + 1.0))?);
    }
    Ok(one_minus_exp(log_sum_exp_iter(terms.iter().copied())))
}

pub fn cdf_gamma_ec_psic(x: f64, dp: &DerivedParams, kappa: f64, q: usize) -> Result<f64> {
    check_x(x)?;
    check_q(q)?;
    let xi = x / (kappa * kappa * dp.rho_e * dp.omega_sr * dp.omega_re);
    Ok(one_minus_exp(ln_block_survival(q, xi)?))
}

pub fn cdf_gamma_ec(
    x: f64,
    dp: &DerivedParams,
    kappa: f64,
    q: usize,
    varpi: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if varpi == 0.0 {
        cdf_gamma_ec_psic(x, dp, kappa, q)
    } else {
        cdf_gamma_ec_ipsic(x, dp, kappa, q, varpi, rule)
    }
}

/// Which SINR a reference CDF describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdfVariant {
    /// LU, data signal.
    UserData,
    /// LU, backscatter signal with residual interference level `varpi`.
    UserBackscatter { varpi: f64 },
    /// Eve, data signal through a `q`-element block.
    EveData { q: usize },
    /// Eve, backscatter signal through a `q`-element block.
    EveBackscatter { q: usize, varpi: f64 },
}

const REFERENCE_ABS_TOL: f64 = 1e-9;

/// Adaptive-integration value of the exact integral behind each
/// quadrature-form CDF.
pub fn cdf_reference(variant: CdfVariant, x: f64, dp: &DerivedParams, kappa: f64) -> Result<f64> {
    check_x(x)?;
    let k2 = kappa * kappa;
    let a = dp.alpha;
    let value = match variant {
        CdfVariant::UserData => {
            let norm = ln_gamma(a + 1.0)?;
            let c0 = x / (dp.omega_u * dp.rho);
            let c2 = x * k2 * dp.beta * dp.beta / dp.omega_u;
            let f = |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                (a * t.ln() - t - norm - c0 - c2 * t * t).exp()
            };
            // mode of t^α e^{-t - c2 t^2}
            let mode = if c2 > 0.0 {
                (-1.0 + (1.0 + 8.0 * c2 * a).sqrt()) / (4.0 * c2)
            } else {
                a
            };
            1.0 - integrate_semi_infinite(f, 0.0, mode.max(1e-3), REFERENCE_ABS_TOL, 0.0)?
        }
        CdfVariant::UserBackscatter { varpi } => {
            let denom = dp.rho * k2 * dp.beta * dp.beta;
            let slope = varpi * dp.rho * dp.omega_ipu;
            let f = |t: f64| {
                let arg = (x * (slope * t + 1.0) / denom).sqrt();
                (-t).exp() * reg_lower_gamma(a + 1.0, arg).unwrap_or(f64::NAN)
            };
            integrate_semi_infinite(f, 0.0, 1.0, REFERENCE_ABS_TOL, 0.0)?
        }
        CdfVariant::EveData { q } => {
            check_q(q)?;
            // Z/(Ω_sr Ω_re) has density (2/Γ(Q)) u^{(Q-1)/2} K_{Q-1}(2√u)
            let ln_norm = std::f64::consts::LN_2 - ln_gamma(q as f64)?;
            let c = x * k2 * dp.omega_sr * dp.omega_re / dp.omega_e;
            let half = 0.5 * (q as f64 - 1.0);
            let order = (q - 1) as u32;
            let f = |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let lk = ln_bessel_k(order, 2.0 * u.sqrt()).unwrap_or(f64::NAN);
                (ln_norm + half * u.ln() + lk - c * u).exp()
            };
            let width = 1.0 / (1.0 / q as f64 + c);
            let mean_factor = integrate_semi_infinite(f, 0.0, width, REFERENCE_ABS_TOL * 1e-3, 0.0)?;
            1.0 - (-x / (dp.omega_e * dp.rho_e)).exp() * mean_factor
        }
        CdfVariant::EveBackscatter { q, varpi } => {
            check_q(q)?;
            if x == 0.0 {
                return Ok(0.0);
            }
            let scale = x / (k2 * dp.rho_e * dp.omega_sr * dp.omega_re);
            let slope = varpi * dp.rho_e * dp.omega_ipe;
            let f = |t: f64| {
                let s = ln_block_survival(q, scale * (slope * t + 1.0)).unwrap_or(f64::NAN);
                (-t).exp() * (1.0 - s.exp())
            };
            integrate_semi_infinite(f, 0.0, 1.0, REFERENCE_ABS_TOL, 0.0)?
        }
    };
    if !value.is_finite() {
        return Err(Error::numeric(format!("reference CDF for {variant:?} at x={x} is not finite")));
    }
    Ok(clamp01(value))
}
