use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rcm_lab::connfn::GSpec;
use rcm_lab::error::{Error, Result};
use rcm_lab::experiments::{self, output, SweepConfig};
use rcm_lab::models::{ModelKind, ModelSpec};
use rcm_lab::quadrature;
use rcm_lab::simulate::BuildMode;

#[derive(Parser)]
#[command(
    name = "rcm-lab",
    version,
    about = "Random connection model simulations and isolation integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Dense,
    Extended,
    Square,
    Torus,
    Window,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Dense => ModelKind::Dense,
            ModelArg::Extended => ModelKind::Extended,
            ModelArg::Square => ModelKind::FiniteSquare,
            ModelArg::Torus => ModelKind::Torus,
            ModelArg::Window => ModelKind::InfiniteWindow,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    CellList,
}

#[derive(Args)]
struct SimArgs {
    /// Comma-separated increasing list of rho values.
    #[arg(long, value_delimiter = ',', required = true)]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    /// Connection function, e.g. `unit_disk:r0=1` or a JSON object.
    #[arg(long, default_value = "unit_disk:r0=1")]
    g: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::CellList)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1e-6)]
    tail_mass: f64,
    /// Directory for trials.jsonl and summary.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self, model: ModelKind) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::new(GSpec::parse(&self.g)?, model, self.rho.clone(), self.b, self.trials);
        cfg.base_seed = self.seed;
        cfg.mode = match self.mode {
            ModeArg::Exact => BuildMode::Exact,
            ModeArg::CellList => BuildMode::CellList {
                tail_mass: self.tail_mass,
            },
        };
        if let Some(dir) = &self.out_dir {
            cfg.outputs.trials = Some(dir.join("trials.jsonl"));
            cfg.outputs.summary = Some(dir.join("summary.csv"));
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write trials.jsonl and summary.csv here unless the config names paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Isolation integrals E(W), E(W^T), E(W^inf) and the boundary split.
    Quad {
        #[arg(long, value_enum, default_value_t = ModelArg::Square)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value = "unit_disk:r0=1")]
        g: String,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, default_value_t = quadrature::OUTER_TOL)]
        rel_tol: f64,
        #[arg(long, default_value_t = quadrature::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Integral constant, monotonicity lint and tail class of g.
    Classify {
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        b: f64,
    },
    /// Torus simulations thinned into square graphs: W = W_T + W_E per trial.
    Coupling {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Component census on the square next to the E(xi_2) estimate.
    Components {
        #[command(flatten)]
        sim: SimArgs,
        /// Monte Carlo samples for E(xi_2).
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        max_order: usize,
    },
}

fn print_rows(stats: &experiments::AggregateStats) {
    let header = output::summary_header(stats.max_order);
    for row in output::summary_rows(stats) {
        let obj: serde_json::Map<String, serde_json::Value> = header
            .iter()
            .zip(row)
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| {
                let val = v.parse::<f64>().map(|x| json!(x)).unwrap_or(json!(v));
                (k.clone(), val)
            })
            .collect();
        println!("{}", serde_json::Value::Object(obj));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let mut cfg = SweepConfig::from_path(&config)?;
            if cfg.outputs.trials.is_none() && cfg.outputs.summary.is_none() {
                cfg.outputs.trials = Some(out_dir.join("trials.jsonl"));
                cfg.outputs.summary = Some(out_dir.join("summary.csv"));
            }
            let (stats, _) = experiments::run_sweep(&cfg)?;
            print_rows(&stats);
        }
        Command::Quad {
            model,
            rho,
            b,
            g,
            margin,
            rel_tol,
            epsilon,
        } => {
            let g = GSpec::parse(&g)?.build()?;
            let c = g.integral_constant(rcm_lab::connfn::DEFAULT_REL_TOL)?;
            for r in rho {
                let mut spec = ModelSpec::with_constant(model.into(), r, b, g.clone(), c)?;
                if let Some(m) = margin {
                    spec = spec.with_margin(m)?;
                }
                let report = quadrature::isolation_report(&spec, rel_tol, epsilon)?;
                println!("{}", serde_json::to_string(&report)?);
            }
        }
        Command::Classify { g, b } => {
            let g = GSpec::parse(&g)?.build()?;
            let c = g.integral_constant(rcm_lab::connfn::DEFAULT_REL_TOL)?;
            let monotone = g.check_monotonicity(10_000);
            let out = match g.classify_tail() {
                Ok(tail) => json!({
                    "g": g.name(),
                    "C": c,
                    "monotone": monotone,
                    "tail": tail,
                    "truncation_limit": quadrature::truncation_limit(&g, b)?,
                }),
                Err(Error::Inconclusive(msg)) => json!({
                    "g": g.name(),
                    "C": c,
                    "monotone": monotone,
                    "tail": "inconclusive",
                    "reason": msg,
                }),
                Err(e) => return Err(e),
            };
            println!("{out}");
        }
        Command::Coupling { sim } => {
            let mut cfg = sim.config(ModelKind::Torus)?;
            cfg.coupling = true;
            let (stats, _) = experiments::run_sweep(&cfg)?;
            print_rows(&stats);
        }
        Command::Components {
            sim,
            samples,
            max_order,
        } => {
            let mut cfg = sim.config(ModelKind::FiniteSquare)?;
            cfg.components_samples = Some(samples);
            cfg.max_order = max_order;
            let (stats, _) = experiments::run_sweep(&cfg)?;
            print_rows(&stats);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcm-lab: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidParams(_) | Error::FrameMismatch(_) => 2,
                Error::TrialFailed { .. } => 3,
                _ => 1,
            })
        }
    }
}
