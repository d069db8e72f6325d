//! Seeded Monte Carlo simulation of the fading model.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]; block `b` draws
//! from a ChaCha8 stream keyed by `(seed, b)`. Workers only ever exchange
//! integer counts, so every estimate is bit-identical for any thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{total_power, DerivedParams, Scenario};

/// Trials per RNG stream.
pub const BLOCK_TRIALS: u64 = 8192;

/// Which message's secrecy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Signal {
    Data,
    Backscatter,
}

/// SIC quality at the receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sic {
    /// Residual interference with the configured `ϖ`.
    Ipsic,
    /// `ϖ = 0`.
    Psic,
}

impl Sic {
    pub fn residual(self, s: &Scenario) -> f64 {
        match self {
            Sic::Ipsic => s.varpi,
            Sic::Psic => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sic::Ipsic => "ipsic",
            Sic::Psic => "psic",
        }
    }
}

impl Signal {
    pub fn name(self) -> &'static str {
        match self {
            Signal::Data => "data",
            Signal::Backscatter => "backscatter",
        }
    }
}

impl std::fmt::Display for Sic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Sic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipsic" => Ok(Sic::Ipsic),
            "psic" => Ok(Sic::Psic),
            other => Err(Error::invalid(format!("unknown SIC mode `{other}` (expected ipsic or psic)"))),
        }
    }
}

/// One realization of every channel in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub h_u: Complex64,
    pub h_e: Complex64,
    /// `|h_sr^m|`, all `M` elements.
    pub a_sr: Vec<f64>,
    /// `|h_ru^m|`, all `M` elements.
    pub a_ru: Vec<f64>,
    /// `conj(h_re^m)·h_sr^m` for the `Q` elements of block 1.
    pub g_block: Vec<Complex64>,
    pub h_ipu: Complex64,
    pub h_ipe: Complex64,
    /// Coherent cascaded amplitude `Σ_m |h_ru^m||h_sr^m|`.
    pub y: f64,
    /// Eve's cascaded power `|Σ_block conj(h_re^m) h_sr^m|^2`.
    pub z: f64,
}

/// The four SINRs of one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinrs {
    pub uu: f64,
    pub uc: f64,
    pub eu: f64,
    pub ec: f64,
}

fn cn<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

impl ChannelDraw {
    fn empty(m: usize, q: usize) -> Self {
        Self {
            h_u: Complex64::default(),
            h_e: Complex64::default(),
            a_sr: vec![0.0; m],
            a_ru: vec![0.0; m],
            g_block: vec![Complex64::default(); q],
            h_ipu: Complex64::default(),
            h_ipe: Complex64::default(),
            y: 0.0,
            z: 0.0,
        }
    }

    fn resample<R: Rng + ?Sized>(&mut self, dp: &DerivedParams, rng: &mut R) {
        let q = self.g_block.len();
        self.h_u = cn(rng, dp.omega_u);
        self.h_e = cn(rng, dp.omega_e);
        let mut y = 0.0;
        let mut block_sum = Complex64::default();
        for m in 0..self.a_sr.len() {
            let h_sr = cn(rng, dp.omega_sr);
            let h_ru = cn(rng, dp.omega_ru);
            self.a_sr[m] = h_sr.norm();
            self.a_ru[m] = h_ru.norm();
            y += self.a_sr[m] * self.a_ru[m];
            if m < q {
                let h_re = cn(rng, dp.omega_re);
                let g = h_re.conj() * h_sr;
                self.g_block[m] = g;
                block_sum += g;
            }
        }
        self.h_ipu = cn(rng, dp.omega_ipu);
        self.h_ipe = cn(rng, dp.omega_ipe);
        self.y = y;
        self.z = block_sum.norm_sqr();
    }
}

/// Draws every channel once. Elements `0..q` form the block seen by Eve.
pub fn sample_draw<R: Rng + ?Sized>(dp: &DerivedParams, m: usize, q: usize, rng: &mut R) -> ChannelDraw {
    let mut draw = ChannelDraw::empty(m, q.min(m));
    draw.resample(dp, rng);
    draw
}

/// SINRs of the LU and Eve for both signals; `varpi = 0` is pSIC.
pub fn sinrs(draw: &ChannelDraw, dp: &DerivedParams, kappa: f64, varpi: f64) -> Sinrs {
    let k2 = kappa * kappa;
    let y2 = draw.y * draw.y;
    Sinrs {
        uu: dp.rho * draw.h_u.norm_sqr() / (k2 * y2 * dp.rho + 1.0),
        uc: k2 * y2 * dp.rho / (varpi * dp.rho * draw.h_ipu.norm_sqr() + 1.0),
        eu: dp.rho_e * draw.h_e.norm_sqr() / (k2 * draw.z * dp.rho_e + 1.0),
        ec: k2 * draw.z * dp.rho_e / (varpi * dp.rho_e * draw.h_ipe.norm_sqr() + 1.0),
    }
}

/// `[log2(1+γ_u) - log2(1+γ_e)]^+` in bits per channel use.
pub fn secrecy_capacity(gamma_u: f64, gamma_e: f64) -> f64 {
    (gamma_u.ln_1p() - gamma_e.ln_1p()).max(0.0) / std::f64::consts::LN_2
}

/// A Bernoulli proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub std_err: f64,
    pub seed: u64,
}

impl SopEstimate {
    fn from_count(count: u64, trials: u64, seed: u64) -> Self {
        let p_hat = count as f64 / trials as f64;
        Self {
            p_hat,
            trials,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
        }
    }
}

/// Outage counts of one simulation run; all counts refer to the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutageCounts {
    pub trials: u64,
    pub data: u64,
    pub backscatter: u64,
    pub both: u64,
}

impl std::ops::Add for OutageCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            data: self.data + o.data,
            backscatter: self.backscatter + o.backscatter,
            both: self.both + o.both,
        }
    }
}

impl OutageCounts {
    pub fn sop(&self, signal: Signal, seed: u64) -> SopEstimate {
        let count = match signal {
            Signal::Data => self.data,
            Signal::Backscatter => self.backscatter,
        };
        SopEstimate::from_count(count, self.trials, seed)
    }

    /// Either signal in outage.
    pub fn system_sop(&self, seed: u64) -> SopEstimate {
        SopEstimate::from_count(self.data + self.backscatter - self.both, self.trials, seed)
    }

    /// `R_u(1-P_u) + R_c(1-P_c)` and its standard error, accounting for the
    /// correlation between the two outage indicators.
    pub fn throughput(&self, r_u: f64, r_c: f64, seed: u64) -> ThroughputEstimate {
        let n = self.trials as f64;
        let pu = self.data as f64 / n;
        let pc = self.backscatter as f64 / n;
        let puc = self.both as f64 / n;
        let var = r_u * r_u * pu * (1.0 - pu) + r_c * r_c * pc * (1.0 - pc) + 2.0 * r_u * r_c * (puc - pu * pc);
        ThroughputEstimate {
            value: r_u * (1.0 - pu) + r_c * (1.0 - pc),
            std_err: (var.max(0.0) / n).sqrt(),
            trials: self.trials,
            seed,
        }
    }
}

/// A Monte Carlo mean of a nonnegative per-trial quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    pub value: f64,
    pub std_err: f64,
    pub trials: u64,
    pub seed: u64,
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_len(trials: u64, block: u64) -> u64 {
    BLOCK_TRIALS.min(trials - block * BLOCK_TRIALS)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    Ok(())
}

/// Per-block results mapped in parallel and combined in block order.
fn run_blocks<T, F>(trials: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|b| body(b, block_len(trials, b)))
        .collect()
}

/// Counts data, backscatter and joint secrecy outages over `trials` draws.
pub fn outage_counts(s: &Scenario, sic: Sic, trials: u64, seed: u64) -> Result<OutageCounts> {
    check_trials(trials)?;
    let dp = s.derive()?;
    let varpi = sic.residual(s);
    let per_block = run_blocks(trials, |b, n| {
        let mut rng = block_rng(seed, b);
        let mut draw = ChannelDraw::empty(s.m, s.q);
        let mut c = OutageCounts {
            trials: n,
            ..OutageCounts::default()
        };
        for _ in 0..n {
            draw.resample(&dp, &mut rng);
            let g = sinrs(&draw, &dp, s.kappa, varpi);
            let data = secrecy_capacity(g.uu, g.eu) < s.r_u;
            let back = secrecy_capacity(g.uc, g.ec) < s.r_c;
            c.data += data as u64;
            c.backscatter += back as u64;
            c.both += (data && back) as u64;
        }
        c
    });
    Ok(per_block.into_iter().fold(OutageCounts::default(), |a, b| a + b))
}

pub fn estimate_sop(s: &Scenario, signal: Signal, sic: Sic, trials: u64, seed: u64) -> Result<SopEstimate> {
    Ok(outage_counts(s, sic, trials, seed)?.sop(signal, seed))
}

/// Probability that at least one of the two signals is in secrecy outage,
/// both evaluated on the same draw.
pub fn estimate_system_sop(s: &Scenario, sic: Sic, trials: u64, seed: u64) -> Result<SopEstimate> {
    Ok(outage_counts(s, sic, trials, seed)?.system_sop(seed))
}

/// Conventional AmBC: one backscatter element at the RIS position.
pub fn estimate_sop_no_ris(s: &Scenario, signal: Signal, sic: Sic, trials: u64, seed: u64) -> Result<SopEstimate> {
    estimate_sop(&s.without_ris(), signal, sic, trials, seed)
}

pub fn estimate_throughput(s: &Scenario, sic: Sic, trials: u64, seed: u64) -> Result<ThroughputEstimate> {
    Ok(outage_counts(s, sic, trials, seed)?.throughput(s.r_u, s.r_c, seed))
}

/// Network secrecy throughput per watt of total consumed power.
pub fn estimate_energy_efficiency(s: &Scenario, sic: Sic, trials: u64, seed: u64) -> Result<ThroughputEstimate> {
    let t = estimate_throughput(s, sic, trials, seed)?;
    let watts = total_power(s)? * 1e-3;
    Ok(ThroughputEstimate {
        value: t.value / watts,
        std_err: t.std_err / watts,
        ..t
    })
}

/// SINR samples from a common set of draws, for CDF comparisons.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SinrSamples {
    pub uu: Vec<f64>,
    pub uc_ipsic: Vec<f64>,
    pub uc_psic: Vec<f64>,
    pub eu: Vec<f64>,
    pub ec_ipsic: Vec<f64>,
    pub ec_psic: Vec<f64>,
    /// Eve's cascaded power, retained for moment checks.
    pub z: Vec<f64>,
}

pub fn sample_sinrs(s: &Scenario, trials: u64, seed: u64) -> Result<SinrSamples> {
    check_trials(trials)?;
    let dp = s.derive()?;
    let per_block = run_blocks(trials, |b, n| {
        let mut rng = block_rng(seed, b);
        let mut draw = ChannelDraw::empty(s.m, s.q);
        let mut out = SinrSamples::default();
        for _ in 0..n {
            draw.resample(&dp, &mut rng);
            let ip = sinrs(&draw, &dp, s.kappa, s.varpi);
            let p = sinrs(&draw, &dp, s.kappa, 0.0);
            out.uu.push(ip.uu);
            out.uc_ipsic.push(ip.uc);
            out.uc_psic.push(p.uc);
            out.eu.push(ip.eu);
            out.ec_ipsic.push(ip.ec);
            out.ec_psic.push(p.ec);
            out.z.push(draw.z);
        }
        out
    });
    let mut all = SinrSamples::default();
    for blk in per_block {
        all.uu.extend(blk.uu);
        all.uc_ipsic.extend(blk.uc_ipsic);
        all.uc_psic.extend(blk.uc_psic);
        all.eu.extend(blk.eu);
        all.ec_ipsic.extend(blk.ec_ipsic);
        all.ec_psic.extend(blk.ec_psic);
        all.z.extend(blk.z);
    }
    Ok(all)
}

/// Fraction of `samples` at or below each grid point.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical CDF needs at least one sample"));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("empirical CDF grid must be sorted ascending"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| sorted.partition_point(|&v| v <= x) as f64 / n)
        .collect())
}
