use crate::error::{Error, Result};
use crate::model::{total_power, DerivedParams, Scenario};
use crate::montecarlo::Sic;
use crate::specfun::{ln_gamma, reg_lower_gamma, QuadratureRule};

use super::cdf::{clamp01, ln_gamma_laplace, mixed_lower_gamma, one_minus_exp};

/// Effective SINR thresholds the LU must clear for each signal to stay
/// out of secrecy outage, with Eve's cascade replaced by its mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonThresholds {
    /// Data signal, on the LU's data SINR.
    pub eps_u: f64,
    /// Backscatter signal with residual interference, on `Y^2`.
    pub eps_c1: f64,
    /// Backscatter signal after perfect SIC, on `Y^2`.
    pub eps_c2: f64,
    /// High-SNR backscatter threshold, `None` when `varpi = 0`.
    pub eps_c3: Option<f64>,
}

impl EpsilonThresholds {
    pub fn eps_c3(&self) -> Result<f64> {
        self.eps_c3
            .ok_or_else(|| Error::domain("the high-SNR ipSIC threshold needs varpi > 0"))
    }
}

pub fn thresholds(s: &Scenario, dp: &DerivedParams) -> Result<EpsilonThresholds> {
    if !(s.r_u >= 0.0 && s.r_c >= 0.0) {
        return Err(Error::invalid(format!("target rates must be >= 0 (r_u={}, r_c={})", s.r_u, s.r_c)));
    }
    let k2 = s.kappa * s.kappa;
    let eve_cascade = k2 * dp.rho_e * dp.eve_cascade_mean(s.q);
    let gu = 2f64.powf(s.r_u);
    let gc = 2f64.powf(s.r_c);
    let residual = s.varpi * dp.rho_e * dp.omega_ipe;
    Ok(EpsilonThresholds {
        eps_u: gu * (1.0 + dp.rho_e * dp.omega_e / (eve_cascade + 1.0)) - 1.0,
        eps_c1: (gc * (1.0 + eve_cascade / (residual + 1.0)) - 1.0) / (k2 * dp.rho),
        eps_c2: (gc * (1.0 + eve_cascade) - 1.0) / (k2 * dp.rho),
        eps_c3: (s.varpi > 0.0).then(|| (gc * (1.0 + eve_cascade / residual) - 1.0) / k2),
    })
}

/// Secrecy outage probability of the data signal.
pub fn sop_data(s: &Scenario, dp: &DerivedParams, rule: &QuadratureRule) -> Result<f64> {
    let eps = thresholds(s, dp)?.eps_u;
    let k2b2 = s.kappa * s.kappa * dp.beta * dp.beta;
    let c0 = eps / (dp.omega_u * dp.rho);
    let c2 = eps * k2b2 / dp.omega_u;
    Ok(one_minus_exp(ln_gamma_laplace(dp, rule, c0, c2)))
}

/// Backscatter SOP with residual interference `varpi`, via the quadrature
/// regardless of `varpi`.
pub fn sop_backscatter_ipsic(s: &Scenario, dp: &DerivedParams, varpi: f64, rule: &QuadratureRule) -> Result<f64> {
    let eps = thresholds(&Scenario { varpi, ..s.clone() }, dp)?.eps_c1;
    let slope = varpi * dp.rho * dp.omega_ipu;
    mixed_lower_gamma(dp, rule, |t| (eps * (slope * t + 1.0)).sqrt() / dp.beta)
}

pub fn sop_backscatter_psic(s: &Scenario, dp: &DerivedParams) -> Result<f64> {
    let eps = thresholds(s, dp)?.eps_c2;
    Ok(clamp01(reg_lower_gamma(dp.alpha + 1.0, eps.sqrt() / dp.beta)?))
}

/// Secrecy outage probability of the backscatter signal.
pub fn sop_backscatter(s: &Scenario, dp: &DerivedParams, sic: Sic, rule: &QuadratureRule) -> Result<f64> {
    match sic {
        Sic::Ipsic if s.varpi > 0.0 => sop_backscatter_ipsic(s, dp, s.varpi, rule),
        _ => sop_backscatter_psic(s, dp),
    }
}

/// High-SNR limit of [`sop_data`]; independent of the transmit SNR.
pub fn asym_sop_data(s: &Scenario, dp: &DerivedParams, rule: &QuadratureRule) -> Result<f64> {
    let eps = thresholds(s, dp)?.eps_u;
    let c2 = eps * s.kappa * s.kappa * dp.beta * dp.beta / dp.omega_u;
    Ok(one_minus_exp(ln_gamma_laplace(dp, rule, 0.0, c2)))
}

const SERIES_MAX_TERMS: usize = 300;
const SERIES_REL_TOL: f64 = 1e-14;

/// `Σ_k u^{a+k} e^{-u} / Γ(a+k+1)` for `a = α+1`, summed in log space.
fn psic_series(alpha: f64, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let a = alpha + 1.0;
    let lu = u.ln();
    let mut ln_sum = f64::NEG_INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let ln_term = (a + kf) * lu - u - ln_gamma(a + kf + 1.0)?;
        ln_sum = if ln_sum == f64::NEG_INFINITY {
            ln_term
        } else {
            let (hi, lo) = if ln_sum > ln_term { (ln_sum, ln_term) } else { (ln_term, ln_sum) };
            hi + (lo - hi).exp().ln_1p()
        };
        // once the term ratio drops below one the tail is bounded by a
        // geometric series
        let ratio = u / (a + kf + 2.0);
        if ratio < 1.0 && ln_term - (1.0 - ratio).ln() + ratio.ln() < ln_sum + SERIES_REL_TOL.ln() {
            return Ok(clamp01(ln_sum.exp()));
        }
    }
    Err(Error::numeric(format!(
        "high-SNR pSIC series did not converge in {SERIES_MAX_TERMS} terms (argument {u:e})"
    )))
}

/// High-SNR approximation of the backscatter SOP. With residual
/// interference it is an error floor; after perfect SIC it decays with
/// slope set by the number of elements.
pub fn asym_sop_backscatter(s: &Scenario, dp: &DerivedParams, sic: Sic, rule: &QuadratureRule) -> Result<f64> {
    let th = thresholds(s, dp)?;
    match sic {
        Sic::Ipsic => {
            let eps = th.eps_c3()?;
            let scale = eps * s.varpi * dp.omega_ipu;
            mixed_lower_gamma(dp, rule, |t| (scale * t).sqrt() / dp.beta)
        }
        Sic::Psic => psic_series(dp.alpha, th.eps_c2.sqrt() / dp.beta),
    }
}

/// Negated least-squares slope of `log10 SOP` against `log10 ρ`, with the
/// SOP evaluated at `ρ = 10^k` for each `k` in `log10_rho`.
pub fn diversity_order<F>(s: &Scenario, log10_rho: &[f64], sop: F) -> Result<f64>
where
    F: Fn(&Scenario) -> Result<f64>,
{
    if log10_rho.len() < 3 {
        return Err(Error::invalid("diversity order needs at least three SNR points"));
    }
    let mut ys = Vec::with_capacity(log10_rho.len());
    for &k in log10_rho {
        let p = sop(&s.with_rho(10f64.powf(k)))?;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::numeric(format!("SOP {p:e} at rho=1e{k} has no usable logarithm")));
        }
        ys.push(p.log10());
    }
    let n = log10_rho.len() as f64;
    let mx = log10_rho.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = log10_rho.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = log10_rho.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("diversity order needs distinct SNR points"));
    }
    Ok(-sxy / sxx)
}

/// Delay-limited secrecy throughput in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub data: f64,
    pub backscatter: f64,
}

impl Throughput {
    pub fn network(&self) -> f64 {
        self.data + self.backscatter
    }
}

pub fn throughput_from_sop(s: &Scenario, sop_data: f64, sop_backscatter: f64) -> Throughput {
    Throughput {
        data: (1.0 - sop_data) * s.r_u,
        backscatter: (1.0 - sop_backscatter) * s.r_c,
    }
}

pub fn secrecy_throughput(s: &Scenario, dp: &DerivedParams, sic: Sic, rule: &QuadratureRule) -> Result<Throughput> {
    Ok(throughput_from_sop(
        s,
        sop_data(s, dp, rule)?,
        sop_backscatter(s, dp, sic, rule)?,
    ))
}

/// Network secrecy throughput per watt of total consumed power.
pub fn secrecy_energy_efficiency(s: &Scenario, dp: &DerivedParams, sic: Sic, rule: &QuadratureRule) -> Result<f64> {
    energy_efficiency_from_throughput(s, secrecy_throughput(s, dp, sic, rule)?.network())
}

pub fn energy_efficiency_from_throughput(s: &Scenario, network_throughput: f64) -> Result<f64> {
    let watts = total_power(s)? * 1e-3;
    if !(watts > 0.0) {
        return Err(Error::domain(format!("total power must be positive, got {watts} W")));
    }
    Ok(network_throughput / watts)
}

/// `1 - (1-P_u)(1-P_c)`: the system SOP if the two outage events were
/// independent. They share the cascade, so this is an approximation.
pub fn system_sop_independent(s: &Scenario, dp: &DerivedParams, sic: Sic, rule: &QuadratureRule) -> Result<f64> {
    let pu = sop_data(s, dp, rule)?;
    let pc = sop_backscatter(s, dp, sic, rule)?;
    Ok(clamp01(1.0 - (1.0 - pu) * (1.0 - pc)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn rule() -> &'static QuadratureRule {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| QuadratureRule::gauss_laguerre(300).unwrap())
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn thresholds_by_hand() {
        let s = Scenario::default();
        let dp = s.derive().unwrap();
        let th = thresholds(&s, &dp).unwrap();
        // κ²ρ_e E[Z] = 0.25·100·3.75e-11, ρ_e Ω_e = 100·1e-3/900
        let c = 0.25 * 100.0 * 3.75e-11;
        let eu = 2f64.sqrt() * (1.0 + (100.0 * 1e-3 / 900.0) / (c + 1.0)) - 1.0;
        assert!(close(th.eps_u, eu, 1e-12));
        let ec1 = (2f64.powf(0.1) * (1.0 + c / (0.01 * 100.0 * 1e-9 + 1.0)) - 1.0) / (0.25 * 1e12);
        assert!(close(th.eps_c1, ec1, 1e-12));
        let ec2 = (2f64.powf(0.1) * (1.0 + c) - 1.0) / (0.25 * 1e12);
        assert!(close(th.eps_c2, ec2, 1e-12));
        let ec3 = (2f64.powf(0.1) * (1.0 + c / (0.01 * 100.0 * 1e-9)) - 1.0) / 0.25;
        assert!(close(th.eps_c3.unwrap(), ec3, 1e-12));
    }

    #[test]
    fn threshold_edge_cases() {
        let s = Scenario { varpi: 0.0, ..Scenario::default() };
        let dp = s.derive().unwrap();
        let th = thresholds(&s, &dp).unwrap();
        assert_eq!(th.eps_c1, th.eps_c2);
        assert!(th.eps_c3.is_none());
        assert!(matches!(th.eps_c3(), Err(Error::Domain(_))));
        assert!(matches!(asym_sop_backscatter(&s, &dp, Sic::Ipsic, rule()), Err(Error::Domain(_))));

        let s = Scenario { r_u: 0.0, d_se: 1e12, ..Scenario::default() };
        let dp = s.derive().unwrap();
        assert!(thresholds(&s, &dp).unwrap().eps_u < 1e-20);
        assert!(sop_data(&s, &dp, rule()).unwrap() <= 1e-9);
    }

    #[test]
    fn zero_residual_reduction() {
        let s = Scenario::default();
        for ps in [-10.0, 0.0, 10.0] {
            let s = Scenario { ps_dbm: ps, ..s.clone() };
            let dp = s.derive().unwrap();
            let a = sop_backscatter_ipsic(&s, &dp, 0.0, rule()).unwrap();
            let b = sop_backscatter_psic(&s, &dp).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn data_sop_approaches_floor_from_above() {
        let s = Scenario::default();
        let floor = asym_sop_data(&s, &s.derive().unwrap(), rule()).unwrap();
        let mut last_gap = f64::INFINITY;
        for k in 10..=16 {
            let si = s.with_rho(10f64.powi(k));
            let gap = sop_data(&si, &si.derive().unwrap(), rule()).unwrap() - floor;
            assert!(gap >= 0.0 && gap <= last_gap, "rho=1e{k} gap={gap}");
            last_gap = gap;
        }
        // first-order gap is ε_u/(Ω_u ρ)·(1-P), about 1.7e-6 relative at ρ = 1e15
        assert!(last_gap / floor < 1e-6);
        let hi = s.with_rho(1e18);
        assert_eq!(asym_sop_data(&hi, &hi.derive().unwrap(), rule()).unwrap(), floor);
    }

    #[test]
    fn psic_series_matches_incomplete_gamma() {
        // the series sums to P(α+1, u)
        for (alpha, u) in [(18.32, 0.5), (18.32, 5.0), (2.3, 30.0), (47.0, 60.0)] {
            let series = psic_series(alpha, u).unwrap();
            let direct = reg_lower_gamma(alpha + 1.0, u).unwrap();
            assert!(close(series, direct, 1e-12), "alpha={alpha} u={u}");
        }
        assert!(psic_series(1.0, 1e4).is_err());
        assert_eq!(psic_series(5.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn psic_asymptote_tracks_exact_at_high_snr() {
        let s = Scenario::default().with_rho(1e14);
        let dp = s.derive().unwrap();
        let asym = asym_sop_backscatter(&s, &dp, Sic::Psic, rule()).unwrap();
        let exact = sop_backscatter_psic(&s, &dp).unwrap();
        assert!(close(asym, exact, 0.05));
    }

    #[test]
    fn psic_diversity_slope() {
        for (m, want) in [(4usize, 3.220), (12, 9.659)] {
            let s = Scenario::default().with_elements(m).unwrap();
            let rule = rule();
            let d = diversity_order(&s, &[12.0, 13.0, 14.0, 15.0, 16.0], |si| {
                asym_sop_backscatter(si, &si.derive()?, Sic::Psic, rule)
            })
            .unwrap();
            let exact = PI * PI * m as f64 / (2.0 * (16.0 - PI * PI));
            assert!((exact - want).abs() < 1e-3);
            assert!(close(d, exact, 0.03), "M={m} slope={d}");
        }
    }

    #[test]
    fn diversity_needs_three_points() {
        let s = Scenario::default();
        assert!(diversity_order(&s, &[1.0, 2.0], |_| Ok(0.5)).is_err());
        assert!(matches!(diversity_order(&s, &[1.0, 2.0, 3.0], |_| Ok(0.0)), Err(Error::NumericFailure(_))));
        let flat = diversity_order(&s, &[1.0, 2.0, 3.0], |_| Ok(0.25)).unwrap();
        assert_eq!(flat, 0.0);
    }

    #[test]
    fn throughput_and_efficiency() {
        let s = Scenario { r_u: 1.0, r_c: 0.7, ..Scenario::default() };
        let t = throughput_from_sop(&s, 0.0, 0.0);
        assert_eq!((t.data, t.backscatter), (1.0, 0.7));
        let t = throughput_from_sop(&s, 1.0, 1.0);
        assert_eq!(t.network(), 0.0);
        assert_eq!(energy_efficiency_from_throughput(&s, 0.0).unwrap(), 0.0);
        let heavier = Scenario {
            p_u_dbm: s.p_u_dbm + 3.0103,
            p_s_hw_dbm: s.p_s_hw_dbm + 3.0103,
            p_ris_hw_dbm: s.p_ris_hw_dbm + 3.0103,
            p_ambc_hw_dbm: s.p_ambc_hw_dbm + 3.0103,
            ..s.clone()
        };
        assert!(
            energy_efficiency_from_throughput(&heavier, 1.2).unwrap() < energy_efficiency_from_throughput(&s, 1.2).unwrap()
        );
        let dp = s.derive().unwrap();
        let net = secrecy_throughput(&s, &dp, Sic::Ipsic, rule()).unwrap().network();
        assert!(net < 1.7 && net > 1.6);
    }

    #[test]
    fn independent_system_sop_bounds() {
        let s = Scenario::default().with_rho(1e6);
        let dp = s.derive().unwrap();
        let pu = sop_data(&s, &dp, rule()).unwrap();
        let pc = sop_backscatter(&s, &dp, Sic::Ipsic, rule()).unwrap();
        let sys = system_sop_independent(&s, &dp, Sic::Ipsic, rule()).unwrap();
        assert!(sys >= pu.max(pc) && sys <= pu + pc);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn residual_only_raises_the_threshold(varpi in 0.0f64..1.0, ps in -30.0f64..60.0, r_c in 0.0f64..3.0) {
            let s = Scenario { varpi, ps_dbm: ps, r_c, ..Scenario::default() };
            let th = thresholds(&s, &s.derive().unwrap()).unwrap();
            prop_assert!(th.eps_c1 <= th.eps_c2 * (1.0 + 1e-12));
            prop_assert!(th.eps_u >= 0.0 && th.eps_c1 >= 0.0);
        }

        #[test]
        fn psic_sop_falls_with_power(ps in -40.0f64..40.0, step in 0.5f64..10.0) {
            let s = Scenario::default();
            let lo = Scenario { ps_dbm: ps, ..s.clone() };
            let hi = Scenario { ps_dbm: ps + step, ..s };
            let a = sop_backscatter_psic(&lo, &lo.derive().unwrap()).unwrap();
            let b = sop_backscatter_psic(&hi, &hi.derive().unwrap()).unwrap();
            prop_assert!(b <= a);
        }
    }
}
