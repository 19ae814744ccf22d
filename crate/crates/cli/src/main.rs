use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bayesbai_core::bounds::{n_v, small_delta_thresholds, upper_budget_with, verify_opt3, Opt3Grid, SigmaMin};
use bayesbai_core::harness::{
    emit, read_prior_file, run_experiment_with, ExperimentConfig, ExperimentReport, OutputFormat,
};
use bayesbai_core::prior::{delta0_from_l, hardness};
use bayesbai_core::rng::Stream;
use bayesbai_core::{PolicyKind, Prior};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bayesbai",
    version,
    about = "Bayesian fixed-confidence best-arm identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prior hardness L(H), its pairwise terms, and optionally Δ₀.
    ComputeL {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Upper-bound constants for the elimination algorithm.
    Budget {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = SigmaReading::Std)]
        sigma_min: SigmaReading,
    },
    /// Lower-bound sample floor N_V and its validity threshold.
    LowerBound {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = SigmaReading::Std)]
        sigma_min: SigmaReading,
    },
    /// Run a Monte Carlo experiment.
    Run(RunArgs),
    /// Check that the uniform allocation minimizes the relaxed objective.
    VerifyOpt3 {
        /// Two-arm prior file; the standard prior when omitted.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Pull budget; N_V when omitted.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 40)]
        cells: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaReading {
    /// (min σ)²
    Std,
    /// (min σ²)²
    Variance,
}

impl From<SigmaReading> for SigmaMin {
    fn from(r: SigmaReading) -> Self {
        match r {
            SigmaReading::Std => SigmaMin::MinStdSquared,
            SigmaReading::Variance => SigmaMin::MinVarianceSquared,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (TOML); flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    prior: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pull_cap: Option<u64>,
    #[arg(long, action = ArgAction::Set)]
    paired: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    workers: Option<usize>,
}

/// Seven significant digits, locale independent.
fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..7).contains(&exp) {
        format!("{:.*}", (6 - exp) as usize, x)
    } else {
        format!("{x:.6e}")
    }
}

fn load_prior(path: &Path) -> Result<Prior> {
    Ok(read_prior_file(path)?)
}

fn compute_l(prior: &Path, delta: Option<f64>) -> Result<()> {
    let prior = load_prior(prior)?;
    let h = hardness(&prior)?;
    for i in 0..h.k {
        for j in (i + 1)..h.k {
            println!("L_{i}{j} = {}", sig(h.pair(i, j)));
        }
    }
    println!("L(H) = {}", sig(h.total));
    if let Some(delta) = delta {
        println!("delta0 = {}", sig(delta0_from_l(h.total, delta)?));
    }
    Ok(())
}

fn budget(prior: &Path, delta: f64, reading: SigmaReading) -> Result<()> {
    let prior = load_prior(prior)?;
    let r = upper_budget_with(&prior, delta, reading.into())?;
    println!("k = {}", r.k);
    println!("delta = {}", sig(r.delta));
    println!("L(H) = {}", sig(r.l_total));
    println!("delta0 = {}", sig(r.delta0));
    println!("B = {}", sig(r.b));
    println!("B0 = {}", sig(r.b0));
    println!("delta_thr = {}", sig(r.delta_thr));
    println!("R0(delta0) = {}", r.r0_of_delta0);
    println!("T0 = {} ({})", r.t0, sig(r.t0 as f64));
    println!("N_V = {}", sig(r.n_v));
    println!("delta_L = {}", sig(r.delta_l));
    println!("D0 = {}", sig(r.d0));
    println!("D1 = {}", sig(r.d1));
    println!("D0 negative = {}", r.d0_negative);
    Ok(())
}

fn lower_bound(prior: &Path, delta: f64, reading: SigmaReading) -> Result<()> {
    let prior = load_prior(prior)?;
    let v = n_v(&prior, delta, reading.into())?;
    let t = small_delta_thresholds(&prior)?;
    println!("N_V = {}", sig(v));
    println!("delta_L = {}", sig(t.delta_l));
    println!("D0 = {}", sig(t.d0));
    println!("D1 = {}", sig(t.d1));
    println!("D0 negative = {}", t.d0_negative);
    if t.d0_negative {
        println!("note: D0 is negative, so delta_L is not a usable threshold");
    } else {
        println!("delta below delta_L = {}", delta < t.delta_l);
    }
    Ok(())
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let (Some(prior), Some(delta), Some(policy), Some(trials)) =
                (&args.prior, args.delta, args.policy, args.trials)
            else {
                bail!("without --config, --prior, --delta, --policy and --trials are required");
            };
            ExperimentConfig::new(load_prior(prior)?, delta, policy, trials, 0)
        }
    };
    if args.config.is_some() {
        if let Some(prior) = &args.prior {
            cfg.prior = load_prior(prior)?;
        }
        if let Some(delta) = args.delta {
            cfg.delta = delta;
        }
        if let Some(policy) = args.policy {
            cfg.policy = policy;
        }
        if let Some(trials) = args.trials {
            cfg.n_trials = trials;
        }
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(cap) = args.pull_cap {
        cfg.pull_cap = cap;
    }
    if let Some(paired) = args.paired {
        cfg.paired = paired;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_format(args: &RunArgs, out: &Path) -> Result<OutputFormat> {
    if let Some(f) = args.format {
        return Ok(f);
    }
    match out.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Ok(OutputFormat::Csv),
        Some(ext) if ext.eq_ignore_ascii_case("json") => Ok(OutputFormat::Json),
        _ => bail!("cannot infer the format of {}; pass --format csv|json", out.display()),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = build_config(&args)?;
    let format = match &args.out {
        Some(out) => Some(output_format(&args, out)?),
        None => None,
    };
    let summary = run_experiment_with(&cfg, args.workers)?;
    println!(
        "{:<8} {:>14} {:>14} {:>8} {:>10}",
        "policy", "Avg", "Max", "Error", "truncated"
    );
    println!(
        "{:<8} {:>14} {:>14} {:>8} {:>10}",
        cfg.policy.name(),
        sig(summary.avg_tau),
        sig(summary.max_tau as f64),
        format!("{:.1}%", 100.0 * summary.error_rate),
        summary.n_truncated
    );
    println!(
        "trials = {}, pull cap = {}, wall time = {:.2} s",
        summary.n_trials, cfg.pull_cap, summary.wall_time_s
    );
    if let (Some(out), Some(format)) = (&args.out, format) {
        let report = ExperimentReport::new(cfg, summary)?;
        emit(&report, format, out).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn opt3(
    prior: Option<&Path>,
    delta: f64,
    budget: Option<f64>,
    cells: usize,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let prior = match prior {
        Some(p) => load_prior(p)?,
        None => Prior::standard(2)?,
    };
    let budget = match budget {
        Some(b) => b,
        None => n_v(&prior, delta, SigmaMin::default())?,
    };
    let r = verify_opt3(
        &prior,
        delta,
        budget,
        Opt3Grid::with_cells(cells),
        samples,
        &mut Stream::from_seed(seed),
    )?;
    println!("gap = {}", sig(r.gap));
    println!("budget = {}", sig(r.budget));
    println!("cells = {}", r.cells);
    println!("uniform objective = {}", sig(r.uniform_value));
    println!("best sampled objective = {}", sig(r.best_sampled));
    println!("worst sampled objective = {}", sig(r.worst_sampled));
    println!(
        "uniform allocation optimal among {} samples: {}",
        r.samples,
        if r.passed { "PASS" } else { "FAIL" }
    );
    Ok(r.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ComputeL { prior, delta } => compute_l(&prior, delta).map(|_| true),
        Command::Budget {
            prior,
            delta,
            sigma_min,
        } => budget(&prior, delta, sigma_min).map(|_| true),
        Command::LowerBound {
            prior,
            delta,
            sigma_min,
        } => lower_bound(&prior, delta, sigma_min).map(|_| true),
        Command::Run(args) => run(args).map(|_| true),
        Command::VerifyOpt3 {
            prior,
            delta,
            budget,
            cells,
            samples,
            seed,
        } => opt3(prior.as_deref(), delta, budget, cells, samples, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
