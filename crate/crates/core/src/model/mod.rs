//! Scenario configuration and everything derived from it.
//!
//! Powers are carried in linear milliwatts and variances in linear units;
//! dB/dBm only appear at the config boundary ([`Scenario`] fields with a
//! `_db`/`_dbm` suffix) and in reports.

mod config;

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use config::{parse_config, CONFIG_KEYS};

/// `10^(x/10)`: dBm to milliwatts.
pub fn dbm_to_mw(x_dbm: f64) -> f64 {
    10f64.powf(x_dbm / 10.0)
}

/// `10^(x/10)` for dimensionless dB quantities.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Large-scale channel variance `η d^{-λ}` (reference distance 1 m).
pub fn path_gain(d: f64, eta_db: f64, lambda: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    Ok(db_to_linear(eta_db) * d.powf(-lambda))
}

/// Horizontal extent of the RIS placement line in the planar layout.
pub const RIS_X_RANGE: (f64, f64) = (0.0, 30.0);
const BS_POS: (f64, f64) = (0.0, 0.0);
const LU_POS: (f64, f64) = (20.0, 0.0);
const EVE_POS: (f64, f64) = (30.0, 0.0);
const RIS_HEIGHT: f64 = 2.0;

/// Distances of a RIS at `(x_ris, 2)` with BS at the origin, LU at
/// `(20, 0)` and Eve at `(30, 0)`: returns `(d_sr, d_ru, d_re)`.
pub fn ris_position_geometry(x_ris: f64) -> Result<(f64, f64, f64)> {
    if !(RIS_X_RANGE.0..=RIS_X_RANGE.1).contains(&x_ris) {
        return Err(Error::invalid(format!(
            "RIS position must be within [{}, {}] m, got {x_ris}",
            RIS_X_RANGE.0, RIS_X_RANGE.1
        )));
    }
    let dist = |p: (f64, f64)| (x_ris - p.0).hypot(RIS_HEIGHT - p.1);
    Ok((dist(BS_POS), dist(LU_POS), dist(EVE_POS)))
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// RIS element count `M = P·Q`.
    pub m: usize,
    /// Number of on-off blocks.
    pub p: usize,
    /// Elements per on-off block.
    pub q: usize,
    /// Reflecting coefficient κ.
    pub kappa: f64,
    /// Residual SIC factor ϖ; zero means perfect SIC.
    pub varpi: f64,
    /// Path-loss exponent λ.
    pub lambda: f64,
    /// Frequency-dependent factor η, dB.
    pub eta_db: f64,
    pub d_sr: f64,
    pub d_ru: f64,
    pub d_su: f64,
    pub d_se: f64,
    pub d_re: f64,
    pub sigma_u_dbm: f64,
    pub sigma_e_dbm: f64,
    /// Source transmit power `P_s`, dBm.
    pub ps_dbm: f64,
    /// Eve reference SNR override, dB. `None` means `P_s / σ_e²`.
    pub rho_e_db: Option<f64>,
    /// Target secrecy rate of the data signal, BPCU.
    pub r_u: f64,
    /// Target secrecy rate of the backscatter signal, BPCU.
    pub r_c: f64,
    pub omega_ipu_dbm: f64,
    pub omega_ipe_dbm: f64,
    /// Power-amplifier efficiency ϑ.
    pub theta_amp: f64,
    pub p_u_dbm: f64,
    pub p_s_hw_dbm: f64,
    pub p_ris_hw_dbm: f64,
    pub p_ambc_hw_dbm: f64,
    /// Gauss-Laguerre order `D`.
    pub quad_d: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Default for Scenario {
    /// Reference geometry and hardware values with the SOP-versus-power settings
    /// (`M = 12`, `P = 2`, `κ = 0.5`, `ρ_e = 20 dB`, `P_s = 30 dBm`).
    fn default() -> Self {
        Self {
            m: 12,
            p: 2,
            q: 6,
            kappa: 0.5,
            varpi: 0.01,
            lambda: 2.0,
            eta_db: -30.0,
            d_sr: 20.0,
            d_ru: 10.0,
            d_su: 20.0,
            d_se: 30.0,
            d_re: 20.0,
            sigma_u_dbm: -90.0,
            sigma_e_dbm: -90.0,
            ps_dbm: 30.0,
            rho_e_db: Some(20.0),
            r_u: 0.5,
            r_c: 0.1,
            omega_ipu_dbm: -90.0,
            omega_ipe_dbm: -90.0,
            theta_amp: 0.32,
            p_u_dbm: 10.0,
            p_s_hw_dbm: 4.0,
            p_ris_hw_dbm: 10.0,
            p_ambc_hw_dbm: -31.0,
            quad_d: 300,
            trials: 1_000_000,
            seed: 1,
        }
    }
}

impl Scenario {
    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.p == 0 || self.q == 0 || self.m != self.p * self.q {
            return bad(format!("M must equal P*Q with P, Q >= 1 (M={}, P={}, Q={})", self.m, self.p, self.q));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad(format!("kappa must lie in (0, 1), got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.varpi) {
            return bad(format!("varpi must lie in [0, 1], got {}", self.varpi));
        }
        if !(self.lambda > 0.0 && self.lambda <= 6.0) {
            return bad(format!("lambda must lie in (0, 6], got {}", self.lambda));
        }
        for (name, d) in [
            ("d_sr", self.d_sr),
            ("d_ru", self.d_ru),
            ("d_su", self.d_su),
            ("d_se", self.d_se),
            ("d_re", self.d_re),
        ] {
            if !(d > 0.0) || !d.is_finite() {
                return bad(format!("{name} must be positive, got {d}"));
            }
        }
        if !(self.r_u >= 0.0 && self.r_c >= 0.0) || !self.r_u.is_finite() || !self.r_c.is_finite() {
            return bad(format!("target rates must be >= 0 (r_u={}, r_c={})", self.r_u, self.r_c));
        }
        if !(self.theta_amp > 0.0 && self.theta_amp <= 1.0) {
            return bad(format!("theta_amp must lie in (0, 1], got {}", self.theta_amp));
        }
        if self.quad_d == 0 || self.quad_d > crate::specfun::MAX_ORDER {
            return bad(format!("quad_d must lie in 1..={}, got {}", crate::specfun::MAX_ORDER, self.quad_d));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        let finite = [
            self.eta_db,
            self.sigma_u_dbm,
            self.sigma_e_dbm,
            self.ps_dbm,
            self.omega_ipu_dbm,
            self.omega_ipe_dbm,
            self.p_u_dbm,
            self.p_s_hw_dbm,
            self.p_ris_hw_dbm,
            self.p_ambc_hw_dbm,
            self.rho_e_db.unwrap_or(0.0),
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("power and gain settings must be finite".into());
        }
        Ok(())
    }

    /// Same scenario at transmit SNR `ρ = P_s/σ_u²` (linear).
    pub fn with_rho(&self, rho: f64) -> Self {
        Self {
            ps_dbm: self.sigma_u_dbm + linear_to_db(rho),
            ..self.clone()
        }
    }

    /// Same scenario with `m` elements split into the existing `P` blocks.
    pub fn with_elements(&self, m: usize) -> Result<Self> {
        if m == 0 || m % self.p != 0 {
            return Err(Error::invalid(format!("M={m} is not a multiple of P={}", self.p)));
        }
        Ok(Self {
            m,
            q: m / self.p,
            ..self.clone()
        })
    }

    /// Same scenario with the RIS moved to `(x_ris, 2)` in the planar layout.
    pub fn with_ris_position(&self, x_ris: f64) -> Result<Self> {
        let (d_sr, d_ru, d_re) = ris_position_geometry(x_ris)?;
        Ok(Self {
            d_sr,
            d_ru,
            d_re,
            ..self.clone()
        })
    }

    /// Conventional AmBC baseline: a single backscatter element at the
    /// RIS position.
    pub fn without_ris(&self) -> Self {
        Self {
            m: 1,
            p: 1,
            q: 1,
            ..self.clone()
        }
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        derive(self)
    }
}

/// Linear-domain quantities every expression consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub omega_u: f64,
    pub omega_sr: f64,
    pub omega_ru: f64,
    pub omega_e: f64,
    pub omega_re: f64,
    pub omega_ipu: f64,
    pub omega_ipe: f64,
    /// Transmit SNR at the LU, `P_s/σ_u²`.
    pub rho: f64,
    /// Transmit SNR of the eavesdropping channels.
    pub rho_e: f64,
    /// Shape of the Gamma fit to the coherent cascaded amplitude, minus one.
    pub alpha: f64,
    /// Scale of the Gamma fit.
    pub beta: f64,
    pub sigma_u_mw: f64,
    pub sigma_e_mw: f64,
    pub ps_mw: f64,
}

impl DerivedParams {
    /// `E|v_p^H Λ_re h_sr|^2 = Q Ω_sr Ω_re` for a `q`-element block.
    pub fn eve_cascade_mean(&self, q: usize) -> f64 {
        q as f64 * self.omega_sr * self.omega_re
    }
}

/// `α = π²M/(16-π²) - 1`.
pub fn gamma_fit_alpha(m: usize) -> f64 {
    PI * PI * m as f64 / (16.0 - PI * PI) - 1.0
}

/// `β = (4/π - π/4)·sqrt(Ω_sr Ω_ru)`.
pub fn gamma_fit_beta(omega_sr: f64, omega_ru: f64) -> f64 {
    (4.0 / PI - PI / 4.0) * (omega_sr * omega_ru).sqrt()
}

pub fn derive(s: &Scenario) -> Result<DerivedParams> {
    s.validate()?;
    let gain = |d: f64| path_gain(d, s.eta_db, s.lambda);
    let omega_sr = gain(s.d_sr)?;
    let omega_ru = gain(s.d_ru)?;
    let ps_mw = dbm_to_mw(s.ps_dbm);
    let sigma_u_mw = dbm_to_mw(s.sigma_u_dbm);
    let sigma_e_mw = dbm_to_mw(s.sigma_e_dbm);
    let rho_e = match s.rho_e_db {
        Some(db) => db_to_linear(db),
        None => ps_mw / sigma_e_mw,
    };
    Ok(DerivedParams {
        omega_u: gain(s.d_su)?,
        omega_sr,
        omega_ru,
        omega_e: gain(s.d_se)?,
        omega_re: gain(s.d_re)?,
        omega_ipu: dbm_to_mw(s.omega_ipu_dbm),
        omega_ipe: dbm_to_mw(s.omega_ipe_dbm),
        rho: ps_mw / sigma_u_mw,
        rho_e,
        alpha: gamma_fit_alpha(s.m),
        beta: gamma_fit_beta(omega_sr, omega_ru),
        sigma_u_mw,
        sigma_e_mw,
        ps_mw,
    })
}

/// `P_tot = P_s/ϑ + P_u + P_s^hw + P_ris^hw + P_AmBC^hw`, milliwatts.
pub fn total_power(s: &Scenario) -> Result<f64> {
    if !(s.theta_amp > 0.0) {
        return Err(Error::domain(format!("theta_amp must be positive, got {}", s.theta_amp)));
    }
    Ok(dbm_to_mw(s.ps_dbm) / s.theta_amp
        + dbm_to_mw(s.p_u_dbm)
        + dbm_to_mw(s.p_s_hw_dbm)
        + dbm_to_mw(s.p_ris_hw_dbm)
        + dbm_to_mw(s.p_ambc_hw_dbm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn unit_conversions() {
        assert!(close(dbm_to_mw(0.0), 1.0, 1e-15));
        assert!(close(dbm_to_mw(30.0), 1000.0, 1e-14));
        assert!(close(dbm_to_mw(-90.0), 1e-9, 1e-14));
        assert!(close(db_to_linear(20.0), 100.0, 1e-14));
    }

    #[test]
    fn path_gain_values() {
        assert!(close(path_gain(20.0, -30.0, 2.0).unwrap(), 2.5e-6, 1e-12));
        assert!(close(path_gain(1.0, 0.0, 2.0).unwrap(), 1.0, 1e-15));
        assert!(close(path_gain(10.0, -30.0, 2.0).unwrap(), 1e-5, 1e-12));
        assert!(path_gain(0.0, -30.0, 2.0).is_err());
        assert!(path_gain(-1.0, -30.0, 2.0).is_err());
    }

    #[test]
    fn derived_table_one() {
        let dp = Scenario::default().derive().unwrap();
        assert!(close(dp.alpha, PI * PI * 12.0 / (16.0 - PI * PI) - 1.0, 1e-15));
        assert!((dp.alpha - 18.31935).abs() < 1e-5);
        assert!(close(dp.beta, (4.0 / PI - PI / 4.0) * (2.5e-6f64 * 1e-5).sqrt(), 1e-14));
        assert!((dp.beta - 2.43921e-6).abs() < 1e-10);
        assert!(close(dp.rho, 1e12, 1e-12));
        assert!(close(dp.rho_e, 100.0, 1e-12));
        assert!(close(dp.eve_cascade_mean(6), 3.75e-11, 1e-12));
    }

    #[test]
    fn rho_e_defaults_to_transmit_ratio() {
        let s = Scenario {
            rho_e_db: None,
            sigma_e_dbm: -80.0,
            ..Scenario::default()
        };
        assert!(close(s.derive().unwrap().rho_e, 1e11, 1e-12));
    }

    #[test]
    fn geometry() {
        let (sr, ru, re) = ris_position_geometry(10.0).unwrap();
        assert!(close(sr, 104f64.sqrt(), 1e-15));
        assert!(close(ru, 104f64.sqrt(), 1e-15));
        assert!(close(re, 404f64.sqrt(), 1e-15));
        assert_eq!(ris_position_geometry(0.0).unwrap().0, 2.0);
        assert_eq!(ris_position_geometry(20.0).unwrap().1, 2.0);
        assert!(ris_position_geometry(-0.5).is_err());
        assert!(ris_position_geometry(30.5).is_err());
    }

    #[test]
    fn total_power_values() {
        let p = total_power(&Scenario::default()).unwrap();
        let want = 1000.0 / 0.32 + 10.0 + 10f64.powf(0.4) + 10.0 + 10f64.powf(-3.1);
        assert!(close(p, want, 1e-12));
        assert!((p - 3147.51).abs() < 0.01);

        let silent = Scenario {
            ps_dbm: f64::NEG_INFINITY,
            p_u_dbm: f64::NEG_INFINITY,
            p_s_hw_dbm: f64::NEG_INFINITY,
            p_ris_hw_dbm: f64::NEG_INFINITY,
            p_ambc_hw_dbm: f64::NEG_INFINITY,
            theta_amp: 1.0,
            ..Scenario::default()
        };
        assert_eq!(total_power(&silent).unwrap(), 0.0);
        let one = Scenario { ps_dbm: 0.0, ..silent.clone() };
        assert!(close(total_power(&one).unwrap(), 1.0, 1e-15));
        let broken = Scenario { theta_amp: 0.0, ..Scenario::default() };
        assert!(total_power(&broken).is_err());
    }

    #[test]
    fn invariants_rejected() {
        let base = Scenario::default();
        assert!(Scenario { m: 10, ..base.clone() }.validate().is_err());
        assert!(Scenario { kappa: 1.0, ..base.clone() }.validate().is_err());
        assert!(Scenario { varpi: 1.5, ..base.clone() }.validate().is_err());
        assert!(Scenario { d_re: 0.0, ..base.clone() }.validate().is_err());
        assert!(Scenario { lambda: 7.0, ..base.clone() }.validate().is_err());
        assert!(Scenario { r_c: -0.1, ..base.clone() }.validate().is_err());
        assert!(base.with_elements(7).is_err());
        let m20 = base.with_elements(20).unwrap();
        assert_eq!((m20.m, m20.q), (20, 10));
        assert!(close(base.with_rho(1e15).derive().unwrap().rho, 1e15, 1e-12));
    }

    #[test]
    fn alpha_positive_for_all_sizes() {
        for m in 1..200 {
            assert!(gamma_fit_alpha(m) > 0.0);
        }
    }

    #[test]
    fn geometry_sweep_shape() {
        let total = |x: f64| {
            let (sr, ru, _) = ris_position_geometry(x).unwrap();
            sr + ru
        };
        let interior = (1..200).map(|i| total(i as f64 * 0.1)).fold(f64::INFINITY, f64::min);
        assert!(interior < total(0.0) && interior < total(20.0));
        for i in 0..=300 {
            let (sr, ru, re) = ris_position_geometry(i as f64 * 0.1).unwrap();
            assert!(sr >= 2.0 && ru >= 2.0 && re >= 2.0);
        }
    }

    proptest! {
        #[test]
        fn path_gain_decreasing(d in 1.001f64..500.0, dd in 0.01f64..10.0, lambda in 2.0f64..5.0, dl in 0.01f64..1.0) {
            let g = path_gain(d, -30.0, lambda).unwrap();
            prop_assert!(path_gain(d + dd, -30.0, lambda).unwrap() < g);
            prop_assert!(path_gain(d, -30.0, lambda + dl).unwrap() < g);
        }
    }
}
