//! Experiment front door: one subcommand per study, JSON configs with full
//! defaulting, CSV/JSON outputs plus a manifest in the chosen directory.

use clap::{Args, Parser, Subcommand};
use hybridpde::experiments::*;

use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "expcli",
    version,
    about = "Hybrid PDE solver experiments: validation, noise studies, perturbation scaling, corrector training"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override file values, unknown keys are
    /// rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every random stream of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Burgers solver vs the two analytic oracles.
    ValidateBurgers {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
    },
    /// ETD integrator orders and linear-subproblem exactness.
    ValidateKs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Direct vs indirect Gaussian-noise injection on both systems.
    NoiseStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        burgers_steps: Option<usize>,
        #[arg(long)]
        ks_steps: Option<usize>,
        #[arg(long)]
        ks_seeds: Option<usize>,
    },
    /// Error-dominance ratio across step sizes vs the closed-form bound.
    RkSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Lyapunov exponents and the dominating Lipschitz bound.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ks_steps: Option<usize>,
    },
    /// Train the convolutional corrector through unrolled solver steps.
    Train {
        #[command(flatten)]
        common: Common,
        /// Task preset: "burgers" (downsampled, forced) or "ks2" (coarse
        /// step).
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        unroll: Option<usize>,
    },
    /// Roll a trained (or zero) corrector against a held-out reference.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Task preset matching the checkpoint: "burgers" or "ks2".
        #[arg(long)]
        system: Option<String>,
    },
    /// Survival steps of the coarse-step first-order KS run.
    BlowupKs2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<String>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn load_or_default<T: Default + for<'de> serde::Deserialize<'de>>(
    common: &Common,
) -> Result<T, ExpError> {
    match &common.config {
        None => Ok(T::default()),
        Some(p) => load_config(p).map_err(ExpError::Config),
    }
}

fn preset(name: &str) -> Result<TrainExpConfig, ExpError> {
    match name {
        "burgers" => Ok(TrainExpConfig::default()),
        "ks2" => Ok(TrainExpConfig::ks2_default()),
        other => Err(ExpError::Config(format!(
            "unknown system '{other}', expected burgers or ks2"
        ))),
    }
}

fn run(cmd: Cmd) -> Result<String, ExpError> {
    match cmd {
        Cmd::ValidateBurgers { common, n, cfl } => {
            let mut cfg: ValidateBurgersConfig = load_or_default(&common)?;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(c) = cfl {
                cfg.cfl = c;
            }
            let s = run_validate_burgers(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::ValidateKs { common, n, t_end } => {
            let mut cfg: ValidateKsConfig = load_or_default(&common)?;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(t) = t_end {
                cfg.t_end = t;
            }
            let s = run_validate_ks(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::NoiseStudy {
            common,
            burgers_steps,
            ks_steps,
            ks_seeds,
        } => {
            let mut cfg: NoiseStudyConfig = load_or_default(&common)?;
            if let Some(v) = burgers_steps {
                cfg.burgers_steps = v;
                cfg.burgers_divergence_steps = cfg.burgers_divergence_steps.min(v);
            }
            if let Some(v) = ks_steps {
                cfg.ks_steps = v;
                cfg.ks_compare_step = cfg.ks_compare_step.min(v);
            }
            if let Some(v) = ks_seeds {
                cfg.ks_seeds = v;
            }
            let s = run_noise_study(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::RkSweep { common, k, eps } => {
            let mut cfg: RkSweepConfig = load_or_default(&common)?;
            if let Some(v) = k {
                cfg.k = v;
            }
            if let Some(v) = eps {
                cfg.eps = v;
            }
            let s = run_rk_sweep(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::Lyapunov { common, ks_steps } => {
            let mut cfg: LyapunovConfig = load_or_default(&common)?;
            if let Some(v) = ks_steps {
                cfg.ks_steps = v;
            }
            let s = run_lyapunov(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::Train {
            common,
            system,
            max_iters,
            lr,
            epochs,
            unroll,
        } => {
            let mut cfg = match (&common.config, system.as_deref()) {
                (Some(p), _) => load_config(p).map_err(ExpError::Config)?,
                (None, Some(name)) => preset(name)?,
                (None, None) => TrainExpConfig::default(),
            };
            if let Some(v) = max_iters {
                cfg.train.max_iters = Some(v);
            }
            if let Some(v) = lr {
                cfg.train.lr = v;
            }
            if let Some(v) = epochs {
                cfg.train.epochs = v;
            }
            if let Some(v) = unroll {
                cfg.train.unroll_m = v;
            }
            let s = run_train(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::Evaluate {
            common,
            checkpoint,
            steps,
            system,
        } => {
            let mut cfg: EvaluateConfig = load_or_default(&common)?;
            if let Some(name) = system.as_deref() {
                cfg.task = preset(name)?;
            }
            if let Some(c) = checkpoint {
                cfg.checkpoint = c;
            }
            if let Some(v) = steps {
                cfg.steps = v;
            }
            let s = run_evaluate(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
        Cmd::BlowupKs2 {
            common,
            checkpoint,
            seeds,
            steps,
        } => {
            let mut cfg: BlowupKs2Config = load_or_default(&common)?;
            if let Some(c) = checkpoint {
                cfg.checkpoint = c;
            }
            if let Some(v) = seeds {
                cfg.seeds = v;
            }
            if let Some(v) = steps {
                cfg.steps = v;
            }
            let s = run_blowup_ks2(&cfg, &common.out_dir, common.seed)?;
            Ok(serde_json::to_string_pretty(&s)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
