//! Command-line front end: exact calculators and plot-ready experiment data.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 size guard, 4 input inconsistency.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use biasfusion::analysis::{bias_sweep, CONCAVITY_TOL};
use biasfusion::decision::{DecisionPolicy, PolicyTable};
use biasfusion::experiments::{claim1_table, error_histogram, error_report, write_claim1_csv, ExperimentManifest};
use biasfusion::gains::{convergence_table, write_convergence_csv};
use biasfusion::model::{make_fully_biased_system, make_unbiased_system, Prior, RateVector, SystemSpec};
use biasfusion::montecarlo::{simulate, SimConfig};
use biasfusion::{sig17, Error};

#[derive(Parser)]
#[command(
    name = "biasfusion",
    version,
    about = "Error-optimal fusion over biased binary channels"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the artifact here; a `<path>.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum error probability of a system.
    Pe(SystemArgs),
    /// Histogram of exact errors over random systems at a fixed rate.
    Hist {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho0: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Normalized log-gain of fully-biased over unbiased systems, with bounds.
    Gains {
        #[arg(long, value_delimiter = ',', required = true)]
        rho0: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
    },
    /// Error along one channel's bias at fixed rate.
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        /// Channel index (0-based).
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Monte Carlo estimate of a policy's error.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Policy table JSON (`{"n", "bits"}`); defaults to the MAP rule.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Exact check of the central-binomial identities.
    Claim1 {
        #[arg(long, default_value_t = 64)]
        m_max: u32,
    },
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// System JSON file `{"n", "rho0", "alpha", "beta"}`.
    #[arg(long, conflicts_with_all = ["n", "rho0", "alpha", "beta", "unbiased_r", "fully_biased_r"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// `n` unbiased channels with this rate.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "fully_biased_r"])]
    unbiased_r: Option<f64>,
    /// `n` S-channels with this rate.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    fully_biased_r: Option<f64>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(Error::SizeGuard { .. }) => 3,
            Failure::Lib(Error::LengthMismatch { .. }) => 4,
            Failure::Lib(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

impl SystemArgs {
    fn resolve(&self) -> CmdResult<SystemSpec> {
        if let Some(path) = &self.spec {
            let text = fs::read_to_string(path)?;
            return Ok(SystemSpec::from_json(&text)?);
        }
        let (n, rho0) = match (self.n, self.rho0) {
            (Some(n), Some(rho0)) => (n, rho0),
            _ => {
                return Err(Failure::Usage(
                    "give --spec, or --n and --rho0 with channel parameters".into(),
                ))
            }
        };
        let prior = Prior::new(rho0)?;
        if let Some(r) = self.unbiased_r {
            return Ok(make_unbiased_system(n, prior, r)?);
        }
        if let Some(r) = self.fully_biased_r {
            return Ok(make_fully_biased_system(prior, &RateVector::uniform(n, r)?)?);
        }
        match (&self.alpha, &self.beta) {
            (Some(a), Some(b)) if a.len() == n && b.len() == n => Ok(SystemSpec::from_params(rho0, a, b)?),
            (Some(_), Some(_)) => Err(Failure::Usage(format!(
                "--alpha and --beta need exactly {n} values each"
            ))),
            _ => Err(Failure::Usage(
                "give --alpha and --beta, --unbiased-r, or --fully-biased-r".into(),
            )),
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "spec": self.spec.as_ref().map(|p| p.display().to_string()),
            "n": self.n,
            "rho0": self.rho0,
            "alpha": self.alpha,
            "beta": self.beta,
            "unbiased_r": self.unbiased_r,
            "fully_biased_r": self.fully_biased_r,
        })
    }
}

struct Output<'a> {
    path: Option<&'a Path>,
}

impl Output<'_> {
    fn emit(&self, body: &[u8], manifest: &ExperimentManifest) -> CmdResult<()> {
        let manifest_text = serde_json::to_string_pretty(manifest).map_err(Error::from)? + "\n";
        match self.path {
            Some(path) => {
                fs::write(path, body)?;
                let mut sidecar = path.as_os_str().to_owned();
                sidecar.push(".manifest.json");
                fs::write(PathBuf::from(sidecar), manifest_text)?;
            }
            None => {
                io::stdout().write_all(body)?;
                io::stderr().write_all(manifest_text.as_bytes())?;
            }
        }
        Ok(())
    }
}

fn json_line(value: &impl serde::Serialize) -> CmdResult<Vec<u8>> {
    let mut text = serde_json::to_vec(value).map_err(Error::from)?;
    text.push(b'\n');
    Ok(text)
}

fn run(cli: Cli) -> CmdResult<()> {
    let out = Output {
        path: cli.out.as_deref(),
    };
    let out_name = cli.out.as_ref().map(|p| p.display().to_string());
    let manifest = |cmd: &str, params: serde_json::Value, seed: Option<u64>| {
        ExperimentManifest::new(cmd, params, out_name.clone(), seed)
    };

    match &cli.command {
        Command::Pe(sys) => {
            let report = error_report(&sys.resolve()?)?;
            let body = match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_line(&report)?,
                Format::Csv => format!(
                    "n,p_error,log_p_error,method,product_condition\n{},{},{},{},{}\n",
                    report.n,
                    sig17(report.p_error),
                    sig17(report.log_p_error),
                    report.method,
                    report.product_condition
                )
                .into_bytes(),
            };
            out.emit(&body, &manifest("pe", sys.describe(), None))
        }
        Command::Hist {
            n,
            rho0,
            r,
            samples,
            bins,
        } => {
            let report = error_histogram(*n, Prior::new(*rho0)?, *r, *samples, cli.seed, *bins)?;
            let params = json!({"n": n, "rho0": rho0, "r": r, "samples": samples, "bins": bins});
            let body = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_line(&report)?,
                Format::Csv => {
                    let summary = json!({
                        "min": report.min, "max": report.max,
                        "fully_biased": report.fully_biased, "unbiased": report.unbiased,
                    });
                    eprintln!("{summary}");
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    buf
                }
            };
            out.emit(&body, &manifest("hist", params, Some(cli.seed)))
        }
        Command::Gains { rho0, r, n_max, n_min } => {
            if n_min > n_max {
                return Err(Failure::Usage("--n-min exceeds --n-max".into()));
            }
            let n_values: Vec<usize> = (*n_min..=*n_max).collect();
            let mut tables = Vec::new();
            for &p in rho0 {
                for &rate in r {
                    tables.push((p, rate, convergence_table(&Prior::new(p)?, rate, &n_values)?));
                }
            }
            let params = json!({"rho0": rho0, "r": r, "n_min": n_min, "n_max": n_max});
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let body: Vec<_> = tables
                        .iter()
                        .map(|(p, rate, rows)| json!({"rho0": p, "r": rate, "rows": rows}))
                        .collect();
                    out.emit(&json_line(&body)?, &manifest("gains", params, None))
                }
                Format::Csv if tables.len() > 1 && cli.out.is_some() => {
                    let dir = cli.out.as_ref().unwrap();
                    fs::create_dir_all(dir)?;
                    for (p, rate, rows) in &tables {
                        let file = dir.join(format!("gains_rho0-{p}_r-{rate}.csv"));
                        let mut buf = Vec::new();
                        write_convergence_csv(rows, &mut buf)?;
                        Output { path: Some(&file) }.emit(
                            &buf,
                            &ExperimentManifest::new(
                                "gains",
                                json!({"rho0": p, "r": rate, "n_min": n_min, "n_max": n_max}),
                                Some(file.display().to_string()),
                                None,
                            ),
                        )?;
                    }
                    Ok(())
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    for (i, (_, _, rows)) in tables.iter().enumerate() {
                        if i > 0 {
                            buf.push(b'\n');
                        }
                        write_convergence_csv(rows, &mut buf)?;
                    }
                    out.emit(&buf, &manifest("gains", params, None))
                }
            }
        }
        Command::Sweep { system, k, grid } => {
            let sweep = bias_sweep(&system.resolve()?, *k, *grid)?;
            let max_d2 = sweep.max_second_difference();
            let verdict = if sweep.is_concave(CONCAVITY_TOL) {
                format!("concave (max second diff {max_d2:.3e} <= {CONCAVITY_TOL:e})")
            } else {
                format!("not concave (max second diff {max_d2:.3e} > {CONCAVITY_TOL:e})")
            };
            let summary = json!({
                "verdict": verdict,
                "max_second_difference": max_d2,
                "local_max_alpha": sweep.local_max_alpha,
                "local_max_row": sweep.local_max_index(),
            });
            let mut params = system.describe();
            params["k"] = json!(k);
            params["grid"] = json!(grid);
            let body = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_line(&json!({
                    "alpha_k": sweep.alpha_grid,
                    "beta_k": sweep.beta_grid,
                    "p_error": sweep.p_error_at,
                    "summary": summary,
                }))?,
                Format::Csv => {
                    eprintln!("{summary}");
                    let mut buf = Vec::new();
                    sweep.write_csv(&mut buf)?;
                    buf
                }
            };
            out.emit(&body, &manifest("sweep", params, None))
        }
        Command::Simulate { system, trials, policy } => {
            let sys = system.resolve()?;
            let policy_label = policy_name(policy.as_deref());
            let policy = match policy {
                Some(path) => DecisionPolicy::from_table(&sys, PolicyTable::from_json(&fs::read_to_string(path)?)?)?,
                None => DecisionPolicy::map(&sys),
            };
            let result = simulate(&SimConfig::new(sys, *trials, cli.seed)?, &policy)?;
            let mut params = system.describe();
            params["trials"] = json!(trials);
            params["policy"] = json!(policy_label);
            let body = match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_line(&result)?,
                Format::Csv => format!(
                    "trials,errors,empirical_error,std_error,seed\n{},{},{},{},{}\n",
                    result.trials,
                    result.errors,
                    sig17(result.empirical_error),
                    sig17(result.std_error),
                    result.seed
                )
                .into_bytes(),
            };
            out.emit(&body, &manifest("simulate", params, Some(cli.seed)))
        }
        Command::Claim1 { m_max } => {
            let rows = claim1_table(*m_max)?;
            let body = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_line(&rows)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_claim1_csv(&rows, &mut buf)?;
                    buf
                }
            };
            out.emit(&body, &manifest("claim1", json!({"m_max": m_max}), None))
        }
    }
}

fn policy_name(path: Option<&Path>) -> String {
    path.map_or_else(|| "map".to_string(), |p| p.display().to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
