use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ris_ambc::harness::{self, verify, ChartSpec, Method, Metric, SweepSpec, SweepVar};
use ris_ambc::model::Scenario;
use ris_ambc::montecarlo::Sic;
use ris_ambc::{Error, Result};

#[derive(Parser)]
#[command(name = "ris-ambc", version, about = "Secrecy outage analysis for RIS-assisted ambient backscatter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate metrics along a parameter sweep and write a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// `<var>=v1,v2,...` with var one of ps_dbm, m_elements, x_ris, kappa, varpi.
        #[arg(long)]
        sweep: String,
        #[arg(long, default_value = "sop_data,sop_backscatter")]
        metrics: String,
        #[arg(long, default_value = "analytic,mc")]
        methods: String,
        #[arg(long, default_value = "ipsic")]
        sic: String,
        /// Extra baseline curves; only `no-ris` is known.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Run the verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only the named group(s).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Special-function self checks.
    Selftest,
    /// Render a result CSV as an SVG line chart.
    Render {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
        #[arg(long)]
        metrics: Option<String>,
        /// Method column values, e.g. `analytic,mc-no-ris`.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        sic: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "quad-d")]
    quad_d: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.config {
            Some(p) => Scenario::load(p)?,
            None => Scenario::default(),
        };
        if let Some(t) = self.trials {
            s.trials = t;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(d) = self.quad_d {
            s.quad_d = d;
        }
        s.validate()?;
        Ok(s)
    }

    fn init_workers(&self) -> Result<()> {
        if let Some(n) = self.workers {
            if n == 0 {
                return Err(Error::InvalidArgument("--workers must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        }
        Ok(())
    }
}

fn parse_list<T: FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(T::from_str).collect()
}

fn parse_sweep(text: &str) -> Result<(SweepVar, Vec<f64>)> {
    let (var, values) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("--sweep expects <var>=v1,v2,..., got `{text}`")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad sweep value `{v}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((var.trim().parse()?, values))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep { common, out, sweep, metrics, methods, sic, baseline } => {
            common.init_workers()?;
            let base = common.scenario()?;
            let (sweep_var, values) = parse_sweep(&sweep)?;
            let no_ris = match baseline.as_deref() {
                None => false,
                Some("no-ris") => true,
                Some(other) => return Err(Error::InvalidArgument(format!("unknown baseline `{other}`"))),
            };
            let spec = SweepSpec {
                sweep_var,
                values,
                metrics: parse_list::<Metric>(&metrics)?,
                methods: parse_list::<Method>(&methods)?,
                sic: parse_list::<Sic>(&sic)?,
                no_ris,
            };
            let rows = harness::run_sweep(&base, &spec)?;
            harness::write_csv(&out, &base, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::Verify { common, only } => {
            common.init_workers()?;
            let base = common.scenario()?;
            for name in &only {
                if !verify::GROUPS.iter().any(|(g, _)| g == name) {
                    return Err(Error::InvalidArgument(format!("unknown verification group `{name}`")));
                }
            }
            let mut report = verify::Report::default();
            for (name, group) in verify::GROUPS {
                if only.is_empty() || only.iter().any(|o| o == name) {
                    let r = group(&base)?;
                    print!("{}", lines_only(&r));
                    report.merge(r);
                }
            }
            println!("SUMMARY passed={} failed={}", report.checks.len() - report.failed(), report.failed());
            Ok(report.all_passed())
        }
        Command::Selftest => {
            let r = verify::selftest()?;
            println!("{r}");
            Ok(r.all_passed())
        }
        Command::Render { csv, out, title, metrics, methods, sic } => {
            let spec = ChartSpec {
                title,
                metrics: metrics.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
                methods: methods
                    .map(|m| m.split(',').map(|s| s.trim().to_string()).collect())
                    .unwrap_or_default(),
                sic: sic.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            };
            harness::render_chart(&csv, &spec, &out)?;
            Ok(true)
        }
    }
}

/// Report body without the summary line, so groups can stream.
fn lines_only(r: &verify::Report) -> String {
    let text = r.to_string();
    match text.rfind("SUMMARY") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
