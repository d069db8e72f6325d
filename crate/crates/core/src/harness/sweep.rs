//! Parameter sweeps and their CSV form.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{Scenario, RIS_X_RANGE};
use crate::montecarlo::{self, Sic, Signal};
use crate::specfun::QuadratureRule;

/// Column order of every result CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "sweep_var", "value", "metric", "method", "signal", "sic", "estimate", "std_err", "trials", "seed",
];

const NO_RIS_SUFFIX: &str = "-no-ris";

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", stringify!($name), " `{}` (expected one of: {})"),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(
    /// Scenario parameter varied along a sweep.
    SweepVar {
        PsDbm => "ps_dbm",
        MElements => "m_elements",
        XRis => "x_ris",
        Kappa => "kappa",
        Varpi => "varpi",
    }
);

named_enum!(
    Metric {
        SopData => "sop_data",
        SopBackscatter => "sop_backscatter",
        SopSystem => "sop_system",
        Throughput => "throughput",
        EnergyEff => "energy_eff",
    }
);

named_enum!(
    Method {
        Analytic => "analytic",
        Asymptotic => "asymptotic",
        Mc => "mc",
    }
);

impl Metric {
    pub fn is_probability(self) -> bool {
        matches!(self, Metric::SopData | Metric::SopBackscatter | Metric::SopSystem)
    }

    fn signal(self) -> &'static str {
        match self {
            Metric::SopData => Signal::Data.name(),
            Metric::SopBackscatter => Signal::Backscatter.name(),
            Metric::SopSystem => "system",
            Metric::Throughput | Metric::EnergyEff => "network",
        }
    }
}

impl SweepVar {
    /// The scenario at one point of the sweep.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let s = match self {
            SweepVar::PsDbm => Scenario { ps_dbm: value, ..base.clone() },
            SweepVar::MElements => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::invalid(format!("element count must be a positive integer, got {value}")));
                }
                base.with_elements(value as usize)?
            }
            SweepVar::XRis => base.with_ris_position(value)?,
            SweepVar::Kappa => Scenario { kappa: value, ..base.clone() },
            SweepVar::Varpi => Scenario { varpi: value, ..base.clone() },
        };
        s.validate()?;
        Ok(s)
    }
}

/// What to evaluate along one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub sweep_var: SweepVar,
    /// Ascending.
    pub values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub methods: Vec<Method>,
    pub sic: Vec<Sic>,
    /// Also evaluate every method for the single-element baseline.
    pub no_ris: bool,
}

impl SweepSpec {
    pub fn new(sweep_var: SweepVar, values: Vec<f64>) -> Self {
        Self {
            sweep_var,
            values,
            metrics: vec![Metric::SopData, Metric::SopBackscatter],
            methods: vec![Method::Analytic, Method::Mc],
            sic: vec![Sic::Ipsic],
            no_ris: false,
        }
    }

    pub fn validate(&self, base: &Scenario) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep needs at least one value"));
        }
        if self.metrics.is_empty() || self.methods.is_empty() || self.sic.is_empty() {
            return Err(Error::invalid("sweep needs at least one metric, method and SIC mode"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("sweep values must be strictly ascending"));
        }
        if self.sweep_var == SweepVar::XRis {
            let (lo, hi) = RIS_X_RANGE;
            if let Some(v) = self.values.iter().find(|v| !(lo..=hi).contains(*v)) {
                return Err(Error::invalid(format!("x_ris value {v} outside [{lo}, {hi}]")));
            }
        }
        for &v in &self.values {
            self.sweep_var.apply(base, v)?;
        }
        Ok(())
    }
}

/// One evaluated (point, metric, method, SIC) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub value: f64,
    pub metric: Metric,
    /// Method name, with a `-no-ris` suffix for the baseline.
    pub method: String,
    pub signal: String,
    pub sic: Sic,
    pub estimate: f64,
    pub std_err: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    fn sort_key(&self) -> (f64, &str, &str, &str, &str) {
        (self.value, self.metric.name(), &self.method, &self.signal, self.sic.name())
    }

    /// Method without the baseline suffix, and whether it was the baseline.
    pub fn base_method(&self) -> Result<(Method, bool)> {
        match self.method.strip_suffix(NO_RIS_SUFFIX) {
            Some(m) => Ok((m.parse()?, true)),
            None => Ok((self.method.parse()?, false)),
        }
    }
}

fn evaluate_analytic(s: &Scenario, metric: Metric, sic: Sic, asymptotic: bool, rule: &QuadratureRule) -> Result<f64> {
    let dp = s.derive()?;
    // with no residual interference the two SIC modes coincide
    let sic = if s.varpi == 0.0 { Sic::Psic } else { sic };
    let data = || {
        if asymptotic {
            analytic::asym_sop_data(s, &dp, rule)
        } else {
            analytic::sop_data(s, &dp, rule)
        }
    };
    let back = || {
        if asymptotic {
            analytic::asym_sop_backscatter(s, &dp, sic, rule)
        } else {
            analytic::sop_backscatter(s, &dp, sic, rule)
        }
    };
    match metric {
        Metric::SopData => data(),
        Metric::SopBackscatter => back(),
        Metric::SopSystem => {
            let (pu, pc) = (data()?, back()?);
            Ok(1.0 - (1.0 - pu) * (1.0 - pc))
        }
        Metric::Throughput => Ok(analytic::throughput_from_sop(s, data()?, back()?).network()),
        Metric::EnergyEff => {
            let t = analytic::throughput_from_sop(s, data()?, back()?).network();
            analytic::energy_efficiency_from_throughput(s, t)
        }
    }
}

fn point_rows(base: &Scenario, spec: &SweepSpec, value: f64, rule: &QuadratureRule) -> Result<Vec<ResultRow>> {
    let s_ris = spec.sweep_var.apply(base, value)?;
    let mut variants = vec![(s_ris.clone(), "")];
    if spec.no_ris {
        variants.push((s_ris.without_ris(), NO_RIS_SUFFIX));
    }
    let mut rows = Vec::new();
    for (s, suffix) in &variants {
        for &sic in &spec.sic {
            let counts = if spec.methods.contains(&Method::Mc) {
                Some(montecarlo::outage_counts(s, sic, s.trials, s.seed)?)
            } else {
                None
            };
            for &method in &spec.methods {
                for &metric in &spec.metrics {
                    let (estimate, std_err, trials, seed) = match method {
                        Method::Analytic | Method::Asymptotic => {
                            let v = evaluate_analytic(s, metric, sic, method == Method::Asymptotic, rule)?;
                            (v, None, None, None)
                        }
                        Method::Mc => {
                            let c = counts.expect("counts are computed whenever mc is requested");
                            let (v, se) = match metric {
                                Metric::SopData => {
                                    let e = c.sop(Signal::Data, s.seed);
                                    (e.p_hat, e.std_err)
                                }
                                Metric::SopBackscatter => {
                                    let e = c.sop(Signal::Backscatter, s.seed);
                                    (e.p_hat, e.std_err)
                                }
                                Metric::SopSystem => {
                                    let e = c.system_sop(s.seed);
                                    (e.p_hat, e.std_err)
                                }
                                Metric::Throughput => {
                                    let t = c.throughput(s.r_u, s.r_c, s.seed);
                                    (t.value, t.std_err)
                                }
                                Metric::EnergyEff => {
                                    let t = c.throughput(s.r_u, s.r_c, s.seed);
                                    let scale = analytic::energy_efficiency_from_throughput(s, 1.0)?;
                                    (t.value * scale, t.std_err * scale)
                                }
                            };
                            (v, Some(se), Some(c.trials), Some(s.seed))
                        }
                    };
                    rows.push(ResultRow {
                        sweep_var: spec.sweep_var,
                        value,
                        metric,
                        method: format!("{}{}", method.name(), suffix),
                        signal: metric.signal().to_string(),
                        sic,
                        estimate,
                        std_err,
                        trials,
                        seed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Evaluates `spec` around `base`, in parallel over sweep points. Rows come
/// back ordered by (value, metric, method, signal, sic).
pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate(base)?;
    let rule = QuadratureRule::gauss_laguerre(base.quad_d)?;
    let per_point: Vec<Vec<ResultRow>> = spec
        .values
        .par_iter()
        .map(|&v| point_rows(base, spec, v, &rule))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = per_point.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let (ka, kb) = (a.sort_key(), b.sort_key());
        ka.0.total_cmp(&kb.0).then_with(|| (ka.1, ka.2, ka.3, ka.4).cmp(&(kb.1, kb.2, kb.3, kb.4)))
    });
    Ok(rows)
}

/// Loads the config at `config_path`, runs the sweep and writes the CSV.
pub fn run_sweep_file(config_path: &Path, spec: &SweepSpec, out_path: &Path) -> Result<Vec<ResultRow>> {
    let base = Scenario::load(config_path)?;
    let rows = run_sweep(&base, spec)?;
    write_csv(out_path, &base, &rows)?;
    Ok(rows)
}

fn fmt_opt<T: fmt::Debug>(v: Option<T>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Renders rows as CSV text: a `#` metadata line, the header, then rows.
pub fn csv_string(base: &Scenario, rows: &[ResultRow]) -> Result<String> {
    let mut buf = format!("# quad_d={} trials={} seed={}\n", base.quad_d, base.trials, base.seed).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let fail = |e: csv::Error| Error::Format(format!("CSV encoding failed: {e}"));
        w.write_record(CSV_COLUMNS).map_err(fail)?;
        for r in rows {
            w.write_record([
                r.sweep_var.name().to_string(),
                format!("{:?}", r.value),
                r.metric.name().to_string(),
                r.method.clone(),
                r.signal.clone(),
                r.sic.name().to_string(),
                format!("{:?}", r.estimate),
                fmt_opt(r.std_err),
                fmt_opt(r.trials),
                fmt_opt(r.seed),
            ])
            .map_err(fail)?;
        }
        w.flush().map_err(|e| Error::Format(format!("CSV encoding failed: {e}")))?;
    }
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Writes the CSV through a temporary file in the destination directory,
/// so a failed run never leaves a partial file behind.
pub fn write_csv(path: &Path, base: &Scenario, rows: &[ResultRow]) -> Result<()> {
    let text = csv_string(base, rows)?;
    write_atomic(path, text.as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn parse_field<T: FromStr>(field: &str, what: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("row {line}: bad {what} `{field}`")))
}

fn parse_opt<T: FromStr>(field: &str, what: &str, line: usize) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, what, line).map(Some)
    }
}

/// Parses a result CSV, checking the header against [`CSV_COLUMNS`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Format(format!(
            "unexpected CSV columns `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_COLUMNS.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Format(format!("row {line}: {e}")))?;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let row = ResultRow {
            sweep_var: parse_field(f(0), "sweep_var", line)?,
            value: parse_field(f(1), "value", line)?,
            metric: parse_field(f(2), "metric", line)?,
            method: f(3).to_string(),
            signal: f(4).to_string(),
            sic: parse_field(f(5), "sic", line)?,
            estimate: parse_field(f(6), "estimate", line)?,
            std_err: parse_opt(f(7), "std_err", line)?,
            trials: parse_opt(f(8), "trials", line)?,
            seed: parse_opt(f(9), "seed", line)?,
        };
        row.base_method()
            .map_err(|_| Error::Format(format!("row {line}: unknown method `{}`", row.method)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Scenario {
        Scenario { trials: 20_000, quad_d: 64, ..Scenario::default() }
    }

    #[test]
    fn power_sweep_row_count_and_order() {
        let spec = SweepSpec::new(SweepVar::PsDbm, vec![10.0, 20.0, 30.0, 40.0]);
        let rows = run_sweep(&quick(), &spec).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.windows(2).all(|w| w[0].value <= w[1].value));
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.estimate));
            match r.method.as_str() {
                "mc" => assert!(r.trials == Some(20_000) && r.seed == Some(1) && r.std_err.is_some()),
                _ => assert!(r.trials.is_none() && r.std_err.is_none()),
            }
        }
    }

    #[test]
    fn baseline_rows_are_suffixed() {
        let spec = SweepSpec {
            no_ris: true,
            metrics: vec![Metric::SopBackscatter],
            ..SweepSpec::new(SweepVar::PsDbm, vec![0.0])
        };
        let rows = run_sweep(&quick(), &spec).unwrap();
        let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, ["analytic", "analytic-no-ris", "mc", "mc-no-ris"]);
    }

    #[test]
    fn csv_round_trip() {
        let spec = SweepSpec {
            metrics: Metric::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            sic: vec![Sic::Ipsic, Sic::Psic],
            ..SweepSpec::new(SweepVar::PsDbm, vec![20.0, 30.0])
        };
        let base = quick();
        let rows = run_sweep(&base, &spec).unwrap();
        let text = csv_string(&base, &rows).unwrap();
        assert!(text.starts_with("# quad_d=64 trials=20000 seed=1\nsweep_var,value,metric,method,signal,sic,estimate,std_err,trials,seed\n"));
        assert_eq!(parse_csv(&text).unwrap(), rows);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = quick();
        let bad = [
            SweepSpec::new(SweepVar::PsDbm, vec![]),
            SweepSpec::new(SweepVar::PsDbm, vec![20.0, 10.0]),
            SweepSpec::new(SweepVar::XRis, vec![2.0, 40.0]),
            SweepSpec::new(SweepVar::MElements, vec![4.0, 7.0]),
            SweepSpec::new(SweepVar::Kappa, vec![0.5, 1.5]),
            SweepSpec { metrics: vec![], ..SweepSpec::new(SweepVar::PsDbm, vec![1.0]) },
        ];
        for spec in bad {
            assert!(matches!(run_sweep(&base, &spec), Err(Error::InvalidArgument(_))), "{spec:?}");
        }
    }

    #[test]
    fn element_sweep_keeps_blocks() {
        let s = SweepVar::MElements.apply(&quick(), 8.0).unwrap();
        assert_eq!((s.m, s.p, s.q), (8, 2, 4));
        let s = SweepVar::XRis.apply(&quick(), 10.0).unwrap();
        assert!((s.d_sr - 104f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn malformed_csv_is_a_format_error() {
        assert!(matches!(parse_csv("a,b\n1,2\n"), Err(Error::Format(_))));
        let text = format!("{}\nps_dbm,1.0,sop_data,guess,data,ipsic,0.5,,,\n", CSV_COLUMNS.join(","));
        assert!(matches!(parse_csv(&text), Err(Error::Format(_))));
        let text = format!("{}\nps_dbm,x,sop_data,mc,data,ipsic,0.5,,,\n", CSV_COLUMNS.join(","));
        assert!(matches!(parse_csv(&text), Err(Error::Format(_))));
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope").join("out.csv");
        assert!(write_atomic(&missing, b"x").is_err());
        assert!(!missing.exists());
        let out = dir.path().join("out.csv");
        write_atomic(&out, b"abc").unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), b"abc");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
