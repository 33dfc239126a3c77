//! Command-line front end: run experiments from config files, evaluate a
//! single bound query against a dataset, and run the fast invariant suite.
//!
//! Exit codes: 0 success, 1 failed selftest, 2 configuration/input error,
//! 3 numerical error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use kcbounds::bounds::{BoundConfig, BoundKind, GridRule, TimeMode};
use kcbounds::config::{KernelConfig, NoiseConfig};
use kcbounds::domain::DomainBox;
use kcbounds::error::Error;
use kcbounds::evaluate::{class_params_for, evaluate_bound, predictor_coefficients, BoundExtras, HeavyTailParams};
use kcbounds::experiments::{self, ExperimentConfig, ExperimentResult};
use kcbounds::io::read_dataset;
use kcbounds::regressor::Regressor;
use kcbounds::selftest;

#[derive(Parser)]
#[command(name = "kcbounds", version, about = "Kernel regression error bounds")]
struct Cli {
    /// Worker threads for Monte-Carlo runs (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run(RunArgs),
    /// Evaluate one bound at one point against a dataset CSV.
    Eval(EvalArgs),
    /// Run the fast invariant suite.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (JSON; one file = one experiment).
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `ci` caps runs at 20 and t_max at 300; `paper` runs the config as-is.
    #[arg(long, default_value = "ci")]
    profile: String,
    /// Output directory (default: current directory; the KC_OUTPUT_DIR
    /// environment variable overrides it).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset CSV with header x_1,...,x_d,y.
    #[arg(long)]
    data: PathBuf,
    /// Bound selector (sg, bnd, se, l2, sg_corr, sg_cond, ht,
    /// nonuniform_*, abbasi, fiedler, chowdhury).
    #[arg(long)]
    bound: String,
    /// Query point, comma-separated coordinates.
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    /// RKHS-norm bound B.
    #[arg(long, default_value_t = 1.0)]
    rkhs_bound: f64,
    /// Noise description, e.g. '{"class":"sub_gaussian","sigma2":0.01}'.
    #[arg(long)]
    noise: String,
    /// Kernel description, e.g. '{"family":"se","lengthscale":1.0}'.
    #[arg(long, default_value = r#"{"family":"se","lengthscale":1.0}"#)]
    kernel: String,
    /// Domain box, e.g. '{"dim":1,"edge":10.0,"lower":[0.0]}'; inferred from
    /// the data when omitted.
    #[arg(long)]
    domain: Option<String>,
    /// Time-uniformity mode, e.g. '{"mode":"all_times"}'.
    #[arg(long, default_value = r#"{"mode":"all_times"}"#)]
    time_mode: String,
    /// Grid-constant rule, e.g. '{"rule":"fixed_delta","target":0.001}'.
    #[arg(long, default_value = r#"{"rule":"fixed_delta","target":0.001}"#)]
    grid_rule: String,
    /// Moment order `a` for the heavy-tailed bound.
    #[arg(long)]
    ht_a: Option<f64>,
    /// Moment bound `v̄` (E|Y|^{1+a} ≤ v̄) for the heavy-tailed bound.
    #[arg(long)]
    ht_v_bar: Option<f64>,
    /// Moment parameter `v̄` (E|Y|² ≤ v̄²) for the truncated-output baseline.
    #[arg(long)]
    chowdhury_v_bar: Option<f64>,
}

/// Manifest written next to each experiment's CSV.
#[derive(Serialize)]
struct RunManifest {
    config_hash: String,
    seed: u64,
    started_at: String,
    finished_at: String,
    output_paths: Vec<String>,
    tool_version: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore failure if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Selftest => return cmd_selftest(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            match e {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("invalid {what}: {e}")))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// The `ci` profile shrinks paper-scale configs to desk scale.
fn apply_profile(config: &mut ExperimentConfig, profile: &str) -> Result<(), Error> {
    match profile {
        "paper" => Ok(()),
        "ci" => {
            config.runs = config.runs.min(20);
            config.t_max = config.t_max.min(300);
            if let Some(ts) = &mut config.ts {
                ts.retain(|t| *t <= config.t_max);
                if ts.is_empty() {
                    ts.push(config.t_max);
                }
            }
            Ok(())
        }
        other => Err(Error::config(format!("unknown profile `{other}`; use ci or paper"))),
    }
}

fn output_root(args: &RunArgs) -> PathBuf {
    if let Some(dir) = &args.output_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("KC_OUTPUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

fn write_atomic(path: &Path, content: &str) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::config(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, Error> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    apply_profile(&mut config, &args.profile)?;
    let canonical = serde_json::to_string(&config)
        .map_err(|e| Error::config(format!("cannot re-serialize config: {e}")))?;
    let config_hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));

    let root = output_root(args);
    std::fs::create_dir_all(&root)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", root.display())))?;

    let started_at = chrono::Utc::now().to_rfc3339();
    let result = experiments::run(&config)?;
    let finished_at = chrono::Utc::now().to_rfc3339();

    let csv_path = root.join(result.csv_filename());
    write_atomic(&csv_path, &result.csv())?;
    let manifest_path = csv_path.with_extension("manifest.json");
    let manifest = RunManifest {
        config_hash,
        seed: config.seed,
        started_at,
        finished_at,
        output_paths: vec![csv_path.display().to_string()],
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::config(format!("cannot serialize manifest: {e}")))?;
    write_atomic(&manifest_path, &manifest_json)?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    if let ExperimentResult::RegressionBand(band) = &result {
        println!("sigma band contained in bound band: {}", band.sigma_band_contained);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EvalOutput {
    bound: &'static str,
    t: usize,
    mean: f64,
    total: f64,
    exploration: f64,
    noise_term: f64,
    beta: f64,
    discretization: f64,
}

fn infer_domain(inputs: &[Vec<f64>]) -> Result<DomainBox, Error> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::config("empty dataset: pass --domain explicitly"))?;
    let dim = first.len();
    let mut lower = vec![f64::MAX; dim];
    let mut upper = vec![f64::MIN; dim];
    for row in inputs {
        for d in 0..dim {
            lower[d] = lower[d].min(row[d]);
            upper[d] = upper[d].max(row[d]);
        }
    }
    let edge = (0..dim).map(|d| upper[d] - lower[d]).fold(0.0f64, f64::max);
    DomainBox::new(dim, edge, lower)
}

fn cmd_eval(args: &EvalArgs) -> Result<ExitCode, Error> {
    let (inputs, outputs) = read_dataset(&args.data)?;
    let kind = BoundKind::parse(&args.bound)?;
    let x: Vec<f64> = args
        .x
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("invalid coordinate `{s}` in --x")))
        })
        .collect::<Result<_, _>>()?;

    let domain = match &args.domain {
        Some(text) => parse_json::<DomainBox>("--domain", text)?,
        None => infer_domain(&inputs)?,
    };
    let kernel_config: KernelConfig = parse_json("--kernel", &args.kernel)?;
    let kernel = kernel_config.to_kernel(&domain)?;
    let noise_config: NoiseConfig = parse_json("--noise", &args.noise)?;
    let model = noise_config.to_model(inputs.len())?;
    let time_mode: TimeMode = parse_json("--time-mode", &args.time_mode)?;
    let grid_rule: GridRule = parse_json("--grid-rule", &args.grid_rule)?;

    let t = inputs.len();
    let state = Regressor::fit(kernel.clone(), args.rho, inputs, outputs)?;
    let config = BoundConfig::new(
        class_params_for(kind, &model)?,
        args.delta,
        args.rkhs_bound,
        time_mode,
        grid_rule,
        domain,
        kernel.hoelder,
    )?;
    let extras = BoundExtras {
        heavy_tail: match (args.ht_a, args.ht_v_bar) {
            (Some(a), Some(v)) => Some(HeavyTailParams { moment_order: a, moment_bound: v }),
            (None, None) => None,
            _ => return Err(Error::config("pass both --ht-a and --ht-v-bar or neither")),
        },
        chowdhury_moment: args.chowdhury_v_bar,
    };
    let eval = evaluate_bound(kind, &state, &config, &x, &extras)?;
    let coeffs = predictor_coefficients(kind, &state, &extras)?;
    let mean = state.mean_with_coefficients(&coeffs, &x)?;
    let out = EvalOutput {
        bound: kind.name(),
        t,
        mean,
        total: eval.total,
        exploration: eval.exploration,
        noise_term: eval.noise_term,
        beta: eval.beta,
        discretization: eval.discretization,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out)
            .map_err(|e| Error::config(format!("cannot serialize output: {e}")))?
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> ExitCode {
    let outcomes = selftest::run_all();
    let mut all_passed = true;
    for o in &outcomes {
        if o.passed {
            println!("selftest [PASS] {}", o.name);
        } else {
            println!("selftest [FAIL] {}: {}", o.name, o.detail);
            all_passed = false;
        }
    }
    if all_passed {
        println!("selftest: {} checks passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
