//! Experiment configurations. Every field has a default, files are JSON,
//! and unknown keys are rejected so sweep typos fail loudly.

use crate::ks::Scheme;
use crate::train::TrainConfig;

use serde::{Deserialize, Serialize};

fn is_pow2_or_even(n: usize) -> bool {
    n >= 8 && n % 2 == 0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ValidateBurgersConfig {
    pub n: usize,
    pub cfl: f64,
    /// Error-sampling interval for the homogeneous case.
    pub record_dt: f64,
    pub homogeneous_t_end: f64,
    /// Shock-free window used for the tight error threshold.
    pub pre_shock_t: f64,
    pub quadratic_t_end: f64,
    pub beta: f64,
    pub pre_shock_rel_l2_max: f64,
    pub quadratic_rel_l2_max: f64,
    /// Maximum admissible per-step total-variation growth factor.
    pub tv_growth_max: f64,
}

impl Default for ValidateBurgersConfig {
    fn default() -> Self {
        ValidateBurgersConfig {
            n: 512,
            cfl: 0.15,
            record_dt: 0.05,
            homogeneous_t_end: 2.0,
            pre_shock_t: 0.25,
            quadratic_t_end: 0.15,
            beta: -2.0,
            pre_shock_rel_l2_max: 2e-2,
            quadratic_rel_l2_max: 1e-2,
            tv_growth_max: 1.01,
        }
    }
}

impl ValidateBurgersConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !is_pow2_or_even(self.n) {
            return Err(format!("n must be even and >= 8, got {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.cfl) || self.cfl == 0.0 {
            return Err("cfl must lie in (0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ValidateKsConfig {
    pub n: usize,
    /// Domain length in units of 2 pi.
    pub length_factor: f64,
    pub t_end: f64,
    pub dts: Vec<f64>,
    /// Reference step = smallest dt divided by this.
    pub ref_divider: usize,
    pub etdrk2_order_min: f64,
    pub etd1_order_min: f64,
    pub linear_exactness_tol: f64,
}

impl Default for ValidateKsConfig {
    fn default() -> Self {
        ValidateKsConfig {
            n: 64,
            length_factor: 6.4,
            t_end: 0.8,
            dts: vec![0.05, 0.025, 0.0125],
            ref_divider: 64,
            etdrk2_order_min: 1.9,
            etd1_order_min: 0.9,
            linear_exactness_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct NoiseStudyConfig {
    pub burgers_n: usize,
    pub burgers_length: f64,
    pub burgers_dt: f64,
    pub burgers_steps: usize,
    /// Direct injection at the largest eps must diverge within this many
    /// steps.
    pub burgers_divergence_steps: usize,
    pub burgers_eps: Vec<f64>,
    pub ks_n: usize,
    pub ks_length_factor: f64,
    pub ks_dt: f64,
    pub ks_steps: usize,
    /// Step at which the direct/indirect MSE comparison is made.
    pub ks_compare_step: usize,
    pub ks_eps: Vec<f64>,
    pub ks_seeds: usize,
    pub divergence_mse: f64,
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        NoiseStudyConfig {
            burgers_n: 512,
            burgers_length: 2.0,
            burgers_dt: 1e-3,
            burgers_steps: 4000,
            burgers_divergence_steps: 500,
            burgers_eps: vec![1e-4, 1e-2, 1.0],
            ks_n: 64,
            ks_length_factor: 6.4,
            ks_dt: 1e-2,
            ks_steps: 1000,
            ks_compare_step: 1000,
            ks_eps: vec![1e-4, 1e-2, 1e-1],
            ks_seeds: 5,
            divergence_mse: 1e3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct RkSweepConfig {
    pub diffusion_n: usize,
    pub diffusion_nu: f64,
    pub diffusion_dts: Vec<f64>,
    pub burgers_n: usize,
    pub burgers_length: f64,
    pub burgers_nu: f64,
    pub burgers_dts: Vec<f64>,
    pub k: usize,
    pub eps: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub bound_factor_max: f64,
}

impl Default for RkSweepConfig {
    fn default() -> Self {
        RkSweepConfig {
            diffusion_n: 64,
            diffusion_nu: 0.24,
            diffusion_dts: vec![1e-3, 2e-3, 5e-3, 1e-2],
            burgers_n: 64,
            burgers_length: 16.0,
            burgers_nu: 0.2,
            burgers_dts: vec![1e-3, 1e-2],
            k: 10,
            eps: 1e-5,
            slope_min: -1.3,
            slope_max: -0.7,
            bound_factor_max: 3.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct LyapunovConfig {
    pub ks_n: usize,
    pub ks_length_factor: f64,
    pub ks_dt: f64,
    pub ks_steps: usize,
    pub renorm_every: usize,
    /// Attractor states sampled for the Lipschitz estimate.
    pub lipschitz_samples: usize,
    pub sample_spacing_steps: usize,
    pub diffusion_n: usize,
    pub diffusion_nu: f64,
    pub diffusion_dt: f64,
    pub diffusion_steps: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            ks_n: 64,
            ks_length_factor: 6.4,
            ks_dt: 0.01,
            ks_steps: 20_000,
            renorm_every: 20,
            lipschitz_samples: 3,
            sample_spacing_steps: 50,
            diffusion_n: 64,
            diffusion_nu: 0.24,
            diffusion_dt: 0.005,
            diffusion_steps: 2000,
        }
    }
}

/// Which system a training/evaluation run targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainSystem {
    /// Forced viscous Burgers, spatially downsampled.
    Burgers,
    /// KS at the coarse 0.5 s step with the first-order scheme.
    Ks2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct TrainExpConfig {
    pub system: TrainSystem,
    pub n_fine: usize,
    pub n_coarse: usize,
    pub length: f64,
    pub nu: f64,
    pub dt: f64,
    /// Reference trajectory length in coarse steps.
    pub traj_steps: usize,
    pub n_traj: usize,
    /// KS2: fine-to-coarse temporal stride (dt_fine = dt / stride).
    pub ks_stride: usize,
    pub ks_length_factor: f64,
    pub ks_scheme: Scheme,
    pub hidden: Vec<usize>,
    pub kernel: usize,
    pub mode: crate::correction::InjectionMode,
    pub train: TrainConfig,
    /// Checkpoint file name inside the output directory.
    pub checkpoint: String,
}

impl Default for TrainExpConfig {
    fn default() -> Self {
        TrainExpConfig {
            system: TrainSystem::Burgers,
            n_fine: 512,
            n_coarse: 64,
            length: 16.0,
            nu: 0.2,
            dt: 1e-3,
            traj_steps: 600,
            n_traj: 3,
            ks_stride: 50,
            ks_length_factor: 10.8,
            ks_scheme: Scheme::Etd1,
            hidden: vec![12, 12],
            kernel: 5,
            mode: crate::correction::InjectionMode::Indirect,
            train: TrainConfig {
                lr: 1e-3,
                // the paper-scale penalty would dwarf the desk-scale data
                // term (sum theta^2 ~ 24 at init vs a ~1e-10 loss floor)
                weight_decay: 1e-13,
                epochs: 4,
                unroll_m: 3,
                batch: 4,
                max_iters: Some(2000),
                ..Default::default()
            },
            checkpoint: "corrector.ckpt".into(),
        }
    }
}

impl TrainExpConfig {
    /// Defaults for the coarse-step KS2 task.
    pub fn ks2_default() -> TrainExpConfig {
        TrainExpConfig {
            system: TrainSystem::Ks2,
            n_fine: 64,
            n_coarse: 64,
            dt: 0.5,
            traj_steps: 60,
            n_traj: 4,
            train: TrainConfig {
                lr: 3e-3,
                epochs: 24,
                unroll_m: 2,
                batch: 4,
                staged: false,
                max_iters: Some(1600),
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct EvaluateConfig {
    /// Generation settings must match the checkpoint's training system.
    pub task: TrainExpConfig,
    /// Checkpoint path; when empty the zero corrector is evaluated (which
    /// must reproduce the bare-solver curve).
    pub checkpoint: String,
    pub steps: usize,
    pub modes: Vec<crate::correction::InjectionMode>,
    /// Seed offset distinguishing the held-out trajectory from training
    /// data.
    pub heldout_offset: u64,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            task: TrainExpConfig::default(),
            checkpoint: String::new(),
            steps: 500,
            modes: vec![
                crate::correction::InjectionMode::NoModel,
                crate::correction::InjectionMode::Indirect,
            ],
            heldout_offset: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct BlowupKs2Config {
    pub n: usize,
    /// Domain length in units of 2 pi (21.6 pi = 10.8 * 2 pi).
    pub length_factor: f64,
    pub dt: f64,
    pub steps: usize,
    pub seeds: usize,
    pub survival_max: usize,
    /// Optional corrector checkpoint to run alongside the bare solver.
    pub checkpoint: String,
}

impl Default for BlowupKs2Config {
    fn default() -> Self {
        BlowupKs2Config {
            n: 64,
            length_factor: 10.8,
            dt: 0.5,
            steps: 100,
            seeds: 5,
            survival_max: 50,
            checkpoint: String::new(),
        }
    }
}

/// Loads a config file, rejecting unknown keys.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
