//! Verification suite: each group cross-checks one part of the analysis
//! against an independent route and reports line-oriented results.

use std::fmt;
use std::time::Instant;

use super::sweep::{csv_string, run_sweep, Method, Metric, SweepSpec, SweepVar};
use crate::analytic;
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::montecarlo::{self, Sic, Signal};
use crate::specfun::{self, QuadratureRule};

/// One measured quantity against its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {:.6e} {:.6e} {}",
            self.name,
            self.measured,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    fn check(&mut self, name: impl Into<String>, measured: f64, threshold: f64, passed: bool) {
        self.checks.push(Check { name: name.into(), measured, threshold, passed: passed && measured.is_finite() });
    }

    /// Passes when `measured <= threshold`.
    fn at_most(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        self.check(name, measured, threshold, measured <= threshold);
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn runtime(&mut self, group: &str, start: Instant, budget_s: f64) {
        self.at_most(format!("{group}_runtime_s"), start.elapsed().as_secs_f64(), budget_s);
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "NOTE {n}")?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "SUMMARY passed={} failed={}", self.checks.len() - self.failed(), self.failed())
    }
}

/// A named verification group.
pub type Group = (&'static str, fn(&Scenario) -> Result<Report>);

/// Every group, in execution order.
pub const GROUPS: [Group; 9] = [
    ("quadrature", quadrature),
    ("cascade_mean", cascade_mean),
    ("cdf_agreement", cdf_agreement),
    ("sop_agreement", sop_agreement),
    ("sic_reduction", sic_reduction),
    ("error_floors", error_floors),
    ("psic_diversity", psic_diversity),
    ("trends", trends),
    ("determinism", determinism),
];

/// Runs every group on `base`.
pub fn verify(base: &Scenario) -> Result<Report> {
    let mut report = Report::default();
    for (_, group) in GROUPS {
        report.merge(group(base)?);
    }
    Ok(report)
}

/// Special-function checks only.
pub fn selftest() -> Result<Report> {
    let mut r = quadrature(&Scenario::default())?;
    let known = [
        ("ln_gamma_half", specfun::ln_gamma(0.5)?, 0.5 * std::f64::consts::PI.ln()),
        ("ln_gamma_ten", specfun::ln_gamma(10.0)?, 362_880f64.ln()),
        ("reg_lower_gamma_exp", specfun::reg_lower_gamma(1.0, 2.0)?, 1.0 - (-2.0f64).exp()),
        ("reg_lower_gamma_half", specfun::reg_lower_gamma(0.5, 1.0)?, 0.842_700_792_949_714_9),
        ("bessel_k0", specfun::ln_bessel_k(0, 1.0)?.exp(), 0.421_024_438_240_708_3),
        ("bessel_k1", specfun::ln_bessel_k(1, 1.0)?.exp(), 0.601_907_230_197_234_6),
        ("bessel_k5_scaled", specfun::bessel_k_scaled(5, 2.0)?, 9.431_049_100_596_467 * 2f64.exp()),
    ];
    for (name, got, want) in known {
        r.at_most(format!("{name}_rel_err"), ((got - want) / want).abs(), 1e-12);
    }
    let adaptive = specfun::integrate_adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 1e-13)?;
    r.at_most("adaptive_sine_err", (adaptive - 2.0).abs(), 1e-12);
    Ok(r)
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Gauss-Laguerre moment exactness and weight normalization.
pub fn quadrature(_base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    for order in [2usize, 8, 32] {
        let rule = QuadratureRule::gauss_laguerre(order)?;
        let worst = (0..2 * order)
            .map(|k| (rule.log_integrate(|t| k as f64 * t.ln()) - ln_factorial(k)).exp_m1().abs())
            .fold(0.0, f64::max);
        r.at_most(format!("quadrature_moments_d{order}"), worst, 1e-10);
    }
    for order in [1usize, 16, 64, 128, 300] {
        let rule = QuadratureRule::gauss_laguerre(order)?;
        let total = specfun::log_sum_exp(rule.log_weights())?.exp_m1().abs();
        r.at_most(format!("quadrature_weight_sum_d{order}"), total, 1e-12);
    }
    r.runtime("quadrature", start, 1.0);
    Ok(r)
}

/// Monte Carlo mean of Eve's block cascade power against `Q Ω_sr Ω_re`.
pub fn cascade_mean(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    for q in [2usize, 6] {
        let s = Scenario { m: base.p * q, q, ..base.clone() };
        let dp = s.derive()?;
        let z = montecarlo::sample_sinrs(&s, 1_000_000, base.seed)?.z;
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let expected = dp.eve_cascade_mean(q);
        r.at_most(format!("cascade_mean_q{q}_in_std_errs"), (mean - expected).abs() / se, 3.0);
    }
    r.runtime("cascade_mean", start, 10.0);
    Ok(r)
}

fn log_grid(samples: &[f64], points: usize) -> Result<Vec<f64>> {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| *v > 0.0).collect();
    if sorted.is_empty() {
        return Err(Error::numeric("no positive samples to build a CDF grid"));
    }
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    let (lo, hi) = (at(0.001), at(0.999));
    if !(hi > lo) {
        return Err(Error::numeric("degenerate sample range for CDF grid"));
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points).map(|i| lo * (step * i as f64).exp()).collect())
}

fn sup_gap_check<F>(r: &mut Report, name: &str, samples: &[f64], floor: f64, cdf: F) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
{
    let grid = log_grid(samples, 50)?;
    let emp = montecarlo::empirical_cdf(samples, &grid)?;
    let n = samples.len() as f64;
    let mut gap: f64 = 0.0;
    let mut sigma: f64 = 0.0;
    for (&x, &e) in grid.iter().zip(&emp) {
        gap = gap.max((cdf(x)? - e).abs());
        sigma = sigma.max((e * (1.0 - e) / n).sqrt());
    }
    r.at_most(format!("cdf_{name}_sup_gap"), gap, floor.max(3.0 * sigma));
    Ok(())
}

/// Analytic SINR CDFs against empirical CDFs from one million draws.
pub fn cdf_agreement(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let s = Scenario { quad_d: 300, ..base.clone() };
    let dp = s.derive()?;
    let rule = QuadratureRule::gauss_laguerre(300)?;
    let smp = montecarlo::sample_sinrs(&s, 1_000_000, s.seed)?;
    let (k, q, w) = (s.kappa, s.q, s.varpi);
    sup_gap_check(&mut r, "user_data", &smp.uu, 0.01, |x| analytic::cdf_gamma_uu(x, &dp, k, &rule))?;
    sup_gap_check(&mut r, "user_backscatter_ipsic", &smp.uc_ipsic, 0.01, |x| {
        analytic::cdf_gamma_uc(x, &dp, k, w, &rule)
    })?;
    sup_gap_check(&mut r, "user_backscatter_psic", &smp.uc_psic, 0.01, |x| {
        analytic::cdf_gamma_uc_psic(x, &dp, k)
    })?;
    sup_gap_check(&mut r, "eve_data", &smp.eu, 0.02, |x| analytic::cdf_gamma_eu(x, &dp, k, q, &rule))?;
    sup_gap_check(&mut r, "eve_backscatter_ipsic", &smp.ec_ipsic, 0.01, |x| {
        analytic::cdf_gamma_ec(x, &dp, k, q, w, &rule)
    })?;
    sup_gap_check(&mut r, "eve_backscatter_psic", &smp.ec_psic, 0.01, |x| {
        analytic::cdf_gamma_ec_psic(x, &dp, k, q)
    })?;
    r.runtime("cdf_agreement", start, 120.0);
    Ok(r)
}

fn sop_points(r: &mut Report, base: &Scenario, powers: &[f64], label: &str, rule: &QuadratureRule) -> Result<usize> {
    let mut compared = 0;
    for &ps in powers {
        let s = Scenario { ps_dbm: ps, ..base.clone() };
        let dp = s.derive()?;
        let ip = montecarlo::outage_counts(&s, Sic::Ipsic, s.trials, s.seed)?;
        let p = montecarlo::outage_counts(&s, Sic::Psic, s.trials, s.seed)?;
        let cases = [
            ("data", analytic::sop_data(&s, &dp, rule)?, ip.sop(Signal::Data, s.seed).p_hat),
            (
                "backscatter_ipsic",
                analytic::sop_backscatter(&s, &dp, Sic::Ipsic, rule)?,
                ip.sop(Signal::Backscatter, s.seed).p_hat,
            ),
            ("backscatter_psic", analytic::sop_backscatter_psic(&s, &dp)?, p.sop(Signal::Backscatter, s.seed).p_hat),
        ];
        for (name, a, mc) in cases {
            if a.max(mc) < 1e-2 {
                continue;
            }
            compared += 1;
            r.at_most(format!("sop_{label}{name}_ps{ps}_rel_err"), (a - mc).abs() / mc, 0.15);
        }
    }
    Ok(compared)
}

/// Closed-form SOPs against Monte Carlo over the transmit-power grid.
pub fn sop_agreement(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;
    let n = sop_points(&mut r, base, &[10.0, 20.0, 30.0, 40.0], "", &rule)?;
    if n == 0 {
        r.note("sop_agreement: no SOP reaches 1e-2 at 10..40 dBm; the comparison there is vacuous");
    }
    let m = sop_points(&mut r, base, &[-30.0, -20.0, -10.0, -5.0], "low_power_", &rule)?;
    r.note(format!("sop_agreement: {n} points compared at 10..40 dBm, {m} at -30..-5 dBm"));
    r.runtime("sop_agreement", start, 120.0);
    Ok(r)
}

/// Imperfect-SIC expressions evaluated at zero residual against the
/// perfect-SIC closed forms.
pub fn sic_reduction(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;
    let dp = base.derive()?;
    let (k, q) = (base.kappa, base.q);
    let mut uc: f64 = 0.0;
    let mut ec: f64 = 0.0;
    for i in -40..=40 {
        let x = 10f64.powf(i as f64 / 4.0);
        uc = uc.max(
            (analytic::cdf_gamma_uc_ipsic(x, &dp, k, 0.0, &rule)? - analytic::cdf_gamma_uc_psic(x, &dp, k)?).abs(),
        );
        ec = ec.max(
            (analytic::cdf_gamma_ec_ipsic(x, &dp, k, q, 0.0, &rule)? - analytic::cdf_gamma_ec_psic(x, &dp, k, q)?)
                .abs(),
        );
    }
    r.at_most("sic_reduction_user_cdf", uc, 1e-12);
    r.at_most("sic_reduction_eve_cdf", ec, 1e-12);
    let mut sop: f64 = 0.0;
    for ps in [-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0] {
        let s = Scenario { ps_dbm: ps, ..base.clone() };
        let dp = s.derive()?;
        let a = analytic::sop_backscatter_ipsic(&s, &dp, 0.0, &rule)?;
        let b = analytic::sop_backscatter_psic(&s, &dp)?;
        sop = sop.max((a - b).abs());
    }
    r.at_most("sic_reduction_backscatter_sop", sop, 1e-12);
    r.runtime("sic_reduction", start, 1.0);
    Ok(r)
}

/// Exact SOPs against their high-SNR floors, and flat high-SNR slopes.
pub fn error_floors(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;

    let s = base.with_rho(1e15);
    let dp = s.derive()?;
    let exact = analytic::sop_data(&s, &dp, &rule)?;
    let floor = analytic::asym_sop_data(&s, &dp, &rule)?;
    r.at_most("floor_data_rel_gap", (exact - floor).abs() / floor, 0.01);
    let slope = analytic::diversity_order(base, &[13.0, 14.0, 15.0, 16.0], |s| {
        analytic::sop_data(s, &s.derive()?, &rule)
    })?;
    r.at_most("floor_data_slope_abs", slope.abs(), 0.05);

    if base.varpi == 0.0 {
        r.note("error_floors: varpi = 0, so the backscatter signal has no floor; skipped");
    } else {
        // Eve's SNR follows the transmit power here, as the floor assumes.
        let tracked = Scenario { rho_e_db: None, ..base.clone() };
        let s = tracked.with_rho(1e15);
        let dp = s.derive()?;
        let exact = analytic::sop_backscatter(&s, &dp, Sic::Ipsic, &rule)?;
        let floor = analytic::asym_sop_backscatter(&s, &dp, Sic::Ipsic, &rule)?;
        r.at_most("floor_backscatter_ipsic_rel_gap", (exact - floor).abs() / floor, 0.01);
        let slope = analytic::diversity_order(&tracked, &[15.0, 16.0, 17.0, 18.0], |s| {
            analytic::sop_backscatter(s, &s.derive()?, Sic::Ipsic, &rule)
        })?;
        r.at_most("floor_backscatter_ipsic_slope_abs", slope.abs(), 0.05);
    }
    r.runtime("error_floors", start, 5.0);
    Ok(r)
}

/// High-SNR slope of the perfect-SIC backscatter asymptote.
pub fn psic_diversity(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;
    let pi2 = std::f64::consts::PI.powi(2);
    for m in [4usize, 12] {
        let s = base.with_elements(m)?;
        let slope = -analytic::diversity_order(&s, &[12.0, 13.0, 14.0, 15.0, 16.0], |s| {
            analytic::asym_sop_backscatter(s, &s.derive()?, Sic::Psic, &rule)
        })?;
        let target = -pi2 * m as f64 / (2.0 * (16.0 - pi2));
        r.at_most(format!("psic_slope_m{m}_rel_err"), ((slope - target) / target).abs(), 0.03);
        r.note(format!("psic_diversity: M={m} slope {slope:.4} target {target:.4}"));
    }
    r.runtime("psic_diversity", start, 5.0);
    Ok(r)
}

fn mc_sop(s: &Scenario, signal: Signal, sic: Sic) -> Result<f64> {
    Ok(montecarlo::estimate_sop(s, signal, sic, s.trials, s.seed)?.p_hat)
}

/// Directional claims about the RIS against conventional backscatter,
/// element count, RIS placement, throughput ceiling and energy efficiency.
pub fn trends(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;

    let s = Scenario { ps_dbm: 30.0, ..base.clone() };
    let c_ris = montecarlo::outage_counts(&s, Sic::Ipsic, s.trials, s.seed)?;
    let c_no = montecarlo::outage_counts(&s.without_ris(), Sic::Ipsic, s.trials, s.seed)?;
    let (b_ris, b_no) = (c_ris.sop(Signal::Backscatter, s.seed).p_hat, c_no.sop(Signal::Backscatter, s.seed).p_hat);
    let (d_ris, d_no) = (c_ris.sop(Signal::Data, s.seed).p_hat, c_no.sop(Signal::Data, s.seed).p_hat);
    r.check("trend_ris_backscatter_below_baseline", b_ris, b_no, b_ris < b_no);
    r.check("trend_ris_data_above_baseline", d_ris, d_no, d_ris > d_no);

    let by_m = Scenario { kappa: 0.3, r_u: 0.5, r_c: 0.5, ps_dbm: 30.0, ..base.clone() };
    let mut sys = Vec::new();
    for m in [4usize, 8, 12, 16, 20, 24] {
        let s = by_m.with_elements(m)?;
        sys.push(montecarlo::estimate_system_sop(&s, Sic::Ipsic, s.trials, s.seed)?.p_hat);
    }
    let ends = sys[0].min(sys[sys.len() - 1]);
    let inner = sys[1..sys.len() - 1].iter().copied().fold(f64::INFINITY, f64::min);
    r.check("trend_system_sop_interior_minimum", inner, ends, inner < ends);
    r.note(format!("trends: system SOP over M=4..24: {sys:?}"));

    let placed = Scenario { ps_dbm: 20.0, ..base.clone() };
    let mut by_x = Vec::new();
    for x in [2.0, 10.0, 18.0] {
        let s = placed.with_ris_position(x)?;
        let dp = s.derive()?;
        by_x.push(analytic::sop_backscatter_psic(&s, &dp)?);
    }
    let edge = by_x[0].max(by_x[2]);
    r.check("trend_ris_midpoint_worst_backscatter", by_x[1], edge, by_x[1] > edge);
    let mc_mid = mc_sop(&placed.with_ris_position(10.0)?, Signal::Backscatter, Sic::Psic)?;
    r.note(format!(
        "trends: RIS placement uses the closed form; Monte Carlo at 10 m gives {mc_mid:e} with {} trials",
        base.trials
    ));

    let rates = Scenario { r_u: 1.0, r_c: 0.7, ..base.clone() };
    let (mut t_an, mut t_mc) = (0.0f64, 0.0f64);
    for ps in [-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0] {
        let s = Scenario { ps_dbm: ps, ..rates.clone() };
        let dp = s.derive()?;
        t_an = t_an.max(analytic::secrecy_throughput(&s, &dp, Sic::Ipsic, &rule)?.network());
        let c = montecarlo::outage_counts(&s, Sic::Ipsic, s.trials, s.seed)?;
        t_mc = t_mc.max(c.throughput(s.r_u, s.r_c, s.seed).value);
    }
    r.check("trend_throughput_below_ceiling_analytic", t_an, 1.7, t_an < 1.7);
    r.check("trend_throughput_below_ceiling_mc", t_mc, 1.7, t_mc < 1.7);

    let ee_base = Scenario { kappa: 0.3, r_u: 1.0, r_c: 0.1, rho_e_db: Some(10.0), ..base.with_elements(4)? };
    let powers: Vec<f64> = (-6..=8).map(|i| 5.0 * i as f64).collect();
    let mut ee = Vec::new();
    for &ps in &powers {
        let s = Scenario { ps_dbm: ps, ..ee_base.clone() };
        ee.push(analytic::secrecy_energy_efficiency(&s, &s.derive()?, Sic::Ipsic, &rule)?);
    }
    let peak = (0..ee.len()).max_by(|&a, &b| ee[a].total_cmp(&ee[b])).unwrap_or(0);
    let violations = (1..ee.len())
        .filter(|&i| if i <= peak { ee[i] < ee[i - 1] } else { ee[i] > ee[i - 1] })
        .count();
    let interior = peak > 0 && peak + 1 < ee.len();
    r.check("trend_energy_efficiency_unimodal", violations as f64, 0.0, violations == 0 && interior);
    r.note(format!("trends: energy efficiency peaks at {} dBm", powers[peak]));
    r.runtime("trends", start, 300.0);
    Ok(r)
}

fn determinism_spec() -> SweepSpec {
    SweepSpec {
        metrics: vec![Metric::SopData, Metric::SopBackscatter, Metric::SopSystem],
        methods: vec![Method::Analytic, Method::Mc],
        ..SweepSpec::new(SweepVar::PsDbm, vec![10.0, 20.0, 30.0, 40.0])
    }
}

/// Sweep CSV bytes under thread pools of 1, 4 and 8 workers.
pub fn determinism(base: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::default();
    let spec = determinism_spec();
    let mut outputs = Vec::new();
    for workers in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::numeric(format!("thread pool: {e}")))?;
        let rows = pool.install(|| run_sweep(base, &spec))?;
        outputs.push(csv_string(base, &rows)?);
    }
    let differing = outputs.iter().filter(|o| **o != outputs[0]).count();
    r.check("determinism_csv_differing_runs", differing as f64, 0.0, differing == 0);
    r.runtime("determinism", start, 60.0);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_format() {
        let mut r = Report::default();
        r.at_most("a", 0.5, 1.0);
        r.at_most("b", 2.0, 1.0);
        r.at_most("c", f64::NAN, 1.0);
        r.note("hello");
        let text = r.to_string();
        assert_eq!(
            text,
            "NOTE hello\nCHECK a 5.000000e-1 1.000000e0 PASS\nCHECK b 2.000000e0 1.000000e0 FAIL\n\
             CHECK c NaN 1.000000e0 FAIL\nSUMMARY passed=1 failed=2"
        );
        assert_eq!(r.failed(), 2);
    }

    #[test]
    fn selftest_passes() {
        let r = selftest().unwrap();
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn reduction_and_slopes_pass_at_defaults() {
        for g in [sic_reduction, error_floors, psic_diversity] {
            let r = g(&Scenario::default()).unwrap();
            assert!(r.all_passed(), "{r}");
        }
    }

    #[test]
    fn perfect_sic_config_skips_floor() {
        let r = error_floors(&Scenario { varpi: 0.0, ..Scenario::default() }).unwrap();
        assert!(r.all_passed(), "{r}");
        assert!(r.notes.iter().any(|n| n.contains("skipped")));
    }

    #[test]
    fn log_grid_spans_quantiles() {
        let samples: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        let g = log_grid(&samples, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert!((g[0] - 11.0).abs() < 1e-9 && (g[49] - 9990.0).abs() < 1e-9);
    }
}
