//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys are the [`Scenario`] field names (`M`, `P`, `Q` upper-case as in the
//! usual notation). Unset keys keep their [`Scenario::default`] values;
//! unknown or repeated keys are errors. `rho_e_db = none` clears the Eve SNR
//! override.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::Scenario;
use crate::error::{Error, Result};

pub const CONFIG_KEYS: [&str; 28] = [
    "M",
    "P",
    "Q",
    "kappa",
    "varpi",
    "lambda",
    "eta_db",
    "d_sr",
    "d_ru",
    "d_su",
    "d_se",
    "d_re",
    "sigma_u_dbm",
    "sigma_e_dbm",
    "ps_dbm",
    "rho_e_db",
    "r_u",
    "r_c",
    "omega_ipu_dbm",
    "omega_ipe_dbm",
    "theta_amp",
    "p_u_dbm",
    "p_s_hw_dbm",
    "p_ris_hw_dbm",
    "p_ambc_hw_dbm",
    "quad_d",
    "trials",
    "seed",
];

/// Parses config text into a validated [`Scenario`].
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut s = Scenario::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) && CONFIG_KEYS.contains(&key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let real = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{key}` expects a number, got `{value}`")))
        };
        let count = || -> Result<u64> {
            value
                .parse::<u64>()
                .map_err(|_| err(format!("`{key}` expects a non-negative integer, got `{value}`")))
        };
        match key {
            "M" => s.m = count()? as usize,
            "P" => s.p = count()? as usize,
            "Q" => s.q = count()? as usize,
            "kappa" => s.kappa = real()?,
            "varpi" => s.varpi = real()?,
            "lambda" => s.lambda = real()?,
            "eta_db" => s.eta_db = real()?,
            "d_sr" => s.d_sr = real()?,
            "d_ru" => s.d_ru = real()?,
            "d_su" => s.d_su = real()?,
            "d_se" => s.d_se = real()?,
            "d_re" => s.d_re = real()?,
            "sigma_u_dbm" => s.sigma_u_dbm = real()?,
            "sigma_e_dbm" => s.sigma_e_dbm = real()?,
            "ps_dbm" => s.ps_dbm = real()?,
            "rho_e_db" => {
                s.rho_e_db = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(real()?)
                }
            }
            "r_u" => s.r_u = real()?,
            "r_c" => s.r_c = real()?,
            "omega_ipu_dbm" => s.omega_ipu_dbm = real()?,
            "omega_ipe_dbm" => s.omega_ipe_dbm = real()?,
            "theta_amp" => s.theta_amp = real()?,
            "p_u_dbm" => s.p_u_dbm = real()?,
            "p_s_hw_dbm" => s.p_s_hw_dbm = real()?,
            "p_ris_hw_dbm" => s.p_ris_hw_dbm = real()?,
            "p_ambc_hw_dbm" => s.p_ambc_hw_dbm = real()?,
            "quad_d" => s.quad_d = count()? as usize,
            "trials" => s.trials = count()?,
            "seed" => s.seed = count()?,
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    s.validate().map_err(|e| Error::Config {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(s)
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_config(&text)
    }

    /// Renders the scenario back into config syntax; `parse_config` of the
    /// result reproduces `self` exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("M", self.m.to_string());
        put("P", self.p.to_string());
        put("Q", self.q.to_string());
        put("kappa", fmt_real(self.kappa));
        put("varpi", fmt_real(self.varpi));
        put("lambda", fmt_real(self.lambda));
        put("eta_db", fmt_real(self.eta_db));
        put("d_sr", fmt_real(self.d_sr));
        put("d_ru", fmt_real(self.d_ru));
        put("d_su", fmt_real(self.d_su));
        put("d_se", fmt_real(self.d_se));
        put("d_re", fmt_real(self.d_re));
        put("sigma_u_dbm", fmt_real(self.sigma_u_dbm));
        put("sigma_e_dbm", fmt_real(self.sigma_e_dbm));
        put("ps_dbm", fmt_real(self.ps_dbm));
        put("rho_e_db", self.rho_e_db.map_or_else(|| "none".to_string(), fmt_real));
        put("r_u", fmt_real(self.r_u));
        put("r_c", fmt_real(self.r_c));
        put("omega_ipu_dbm", fmt_real(self.omega_ipu_dbm));
        put("omega_ipe_dbm", fmt_real(self.omega_ipe_dbm));
        put("theta_amp", fmt_real(self.theta_amp));
        put("p_u_dbm", fmt_real(self.p_u_dbm));
        put("p_s_hw_dbm", fmt_real(self.p_s_hw_dbm));
        put("p_ris_hw_dbm", fmt_real(self.p_ris_hw_dbm));
        put("p_ambc_hw_dbm", fmt_real(self.p_ambc_hw_dbm));
        put("quad_d", self.quad_d.to_string());
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        out
    }
}

// `{:?}` prints the shortest string that round-trips
fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}
