//! Corrector training by backpropagation through unrolled hybrid steps.
//!
//! A loss window is `m` autoregressive hybrid steps started from a
//! reference state, scored against the next `m` reference states by spatial
//! mean squared error, plus an L2 penalty on the parameters. Gradients are
//! exact reverse-mode derivatives of that computation - solver included -
//! recorded on the crate's tape; the Lax-Friedrichs speed and adaptive step
//! sizes are the documented non-differentiated constants. Windows that blow
//! up mid-unroll contribute the sentinel loss with zeroed gradients instead
//! of crashing training.

use crate::correction::{hybrid_step_g, CorrectorG, HybridSolver, InjectionMode};
use crate::error::SolverError;
use crate::fft::{fft, ifft};
use crate::grid::{Field, Grid1D, Trajectory};
use crate::ks::{KsSolver, Scheme};
use crate::net::{NetParams, NetSpec};
use crate::rng::{uniform_index, RngStream};
use crate::scalar::Scalar;
use crate::spectral::mode_index;
use crate::tape;
use crate::cplx::Cplx;

/// Loss assigned to a window whose unroll left the stable range.
pub const BLOWUP_SENTINEL: f64 = 1e6;

/// States beyond this magnitude terminate a training unroll.
const UNROLL_LIMIT: f64 = 1e6;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    /// Steps per unrolled loss window.
    pub unroll_m: usize,
    pub lr: f64,
    /// Coefficient of the squared-L2 parameter penalty.
    pub weight_decay: f64,
    /// Windows per gradient step.
    pub batch: usize,
    pub epochs: usize,
    /// Hard iteration cap (gradient steps); `None` runs all epochs.
    pub max_iters: Option<usize>,
    /// Start at unroll 2 for the first quarter of the budget, then switch
    /// to `unroll_m`.
    pub staged: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_opt: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            unroll_m: 3,
            lr: 1e-4,
            weight_decay: 1e-7,
            batch: 4,
            epochs: 10,
            max_iters: None,
            staged: true,
            beta1: 0.9,
            beta2: 0.999,
            eps_opt: 1e-8,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) {
        assert!(self.unroll_m >= 1, "need at least one unrolled step");
        assert!(self.lr >= 0.0);
        assert!(self.batch >= 1);
        assert!((0.0..1.0).contains(&self.validation_fraction));
    }
}

/// One training trajectory with the coarse solver that tracks it (each
/// forced Burgers trajectory carries its own forcing realization).
#[derive(Clone, Debug)]
pub struct TrainItem {
    pub reference: Trajectory,
    pub solver: HybridSolver,
}

/// Generic unrolled-window loss. Returns the loss and whether the unroll
/// blew up (in which case the loss is the constant sentinel and carries no
/// gradient).
pub fn unrolled_loss_g<S: Scalar>(
    spec: &NetSpec,
    theta: &[S],
    solver: &HybridSolver,
    mode: InjectionMode,
    dt: f64,
    ref_states: &[Field],
    t0: f64,
    weight_decay: f64,
) -> (S, bool) {
    let m = ref_states.len() - 1;
    assert!(m >= 1, "window needs at least one step");
    let corr = CorrectorG::Neural { spec, theta };
    let n = ref_states[0].len();
    let mut u: Vec<S> = ref_states[0]
        .values()
        .iter()
        .map(|&v| S::from_f64(v))
        .collect();
    let mut data = S::zero();
    for s in 1..=m {
        let t = t0 + (s - 1) as f64 * dt;
        u = hybrid_step_g(solver, &u, t, dt, &corr, mode, s as u64 - 1);
        if u.iter()
            .any(|v| !v.value().is_finite() || v.value().abs() > UNROLL_LIMIT)
        {
            return (S::from_f64(BLOWUP_SENTINEL), true);
        }
        let mut step_err = S::zero();
        for (p, &r) in u.iter().zip(ref_states[s].values()) {
            let d = *p - r;
            step_err = step_err + d * d;
        }
        data = data + step_err * (1.0 / n as f64);
    }
    let mut reg = S::zero();
    for &p in theta {
        reg = reg + p * p;
    }
    (data * (1.0 / m as f64) + reg * weight_decay, false)
}

/// Eager (f64) window loss.
pub fn unrolled_loss(
    params: &NetParams,
    solver: &HybridSolver,
    mode: InjectionMode,
    dt: f64,
    ref_states: &[Field],
    t0: f64,
    weight_decay: f64,
) -> (f64, bool) {
    unrolled_loss_g(
        &params.spec,
        &params.theta,
        solver,
        mode,
        dt,
        ref_states,
        t0,
        weight_decay,
    )
}

/// Exact reverse-mode gradient of [`unrolled_loss`] with respect to every
/// parameter. Returns `(loss, gradient, blew_up)`; a blown-up window gives
/// the sentinel loss and a zero gradient.
pub fn grad_theta(
    params: &NetParams,
    solver: &HybridSolver,
    mode: InjectionMode,
    dt: f64,
    ref_states: &[Field],
    t0: f64,
    weight_decay: f64,
) -> (f64, Vec<f64>, bool) {
    tape::reset();
    let leaves: Vec<tape::Ad> = params.theta.iter().map(|&v| tape::var(v)).collect();
    let (loss, blown) = unrolled_loss_g(
        &params.spec,
        &leaves,
        solver,
        mode,
        dt,
        ref_states,
        t0,
        weight_decay,
    );
    if blown {
        tape::reset();
        return (BLOWUP_SENTINEL, vec![0.0; params.theta.len()], true);
    }
    let adj = tape::gradients(loss);
    let grad = leaves.iter().map(|&l| adj.wrt(l)).collect();
    let value = loss.value();
    tape::reset();
    (value, grad, false)
}

/// Adam optimizer state.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Adam {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        assert_eq!(theta.len(), grad.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / bc1;
            let vh = self.v[i] / bc2;
            theta[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Parameters with the best validation loss.
    pub params: NetParams,
    /// Parameters at the last iteration.
    pub final_params: NetParams,
    /// Mean batch training loss per iteration.
    pub loss_history: Vec<f64>,
    /// `(iteration, validation loss)` measured at epoch boundaries.
    pub val_history: Vec<(usize, f64)>,
    pub iterations: usize,
    pub blowup_windows: usize,
}

#[derive(Clone, Copy)]
struct WindowRef {
    item: usize,
    start: usize,
}

fn windows_for(items: &[TrainItem], m: usize) -> Vec<WindowRef> {
    let mut out = Vec::new();
    for (item, it) in items.iter().enumerate() {
        let len = it.reference.len();
        if len > m {
            for start in 0..len - m {
                out.push(WindowRef { item, start });
            }
        }
    }
    out
}

fn shuffle<T>(v: &mut [T], rng: &mut impl rand_chacha::rand_core::RngCore) {
    for i in (1..v.len()).rev() {
        v.swap(i, uniform_index(rng, i + 1));
    }
}

fn window_loss_inputs<'a>(
    items: &'a [TrainItem],
    w: WindowRef,
    m: usize,
) -> (&'a HybridSolver, &'a [Field], f64) {
    let it = &items[w.item];
    let states = &it.reference.states()[w.start..=w.start + m];
    let t0 = it.reference.times()[w.start];
    (&it.solver, states, t0)
}

/// Minibatch Adam over unrolled windows with a 10% validation holdout;
/// returns the best-validation parameters. Fully deterministic for a fixed
/// seed (single-threaded, seeded shuffles).
pub fn train(
    cfg: &TrainConfig,
    spec: &NetSpec,
    items: &[TrainItem],
    mode: InjectionMode,
    dt: f64,
) -> Result<TrainReport, SolverError> {
    cfg.validate();
    assert!(!items.is_empty(), "empty dataset");
    let stream = RngStream::new(cfg.seed, 900);
    let mut params = NetParams::init_zero_output(spec.clone(), &stream);
    let mut adam = Adam::new(
        params.theta.len(),
        cfg.lr,
        cfg.beta1,
        cfg.beta2,
        cfg.eps_opt,
    );

    // split full-length windows into train/validation once
    let mut all = windows_for(items, cfg.unroll_m);
    assert!(!all.is_empty(), "no window fits the unroll length");
    let mut rng = stream.rng_at(1);
    shuffle(&mut all, &mut rng);
    let n_val = ((all.len() as f64) * cfg.validation_fraction).round() as usize;
    let val_windows: Vec<WindowRef> = all[..n_val].to_vec();
    let train_full: Vec<WindowRef> = all[n_val..].to_vec();
    // short-unroll stage re-derives starts from the same trajectories
    let train_short: Vec<WindowRef> = if cfg.staged && cfg.unroll_m > 2 {
        windows_for(items, 2)
    } else {
        Vec::new()
    };

    let budget = cfg
        .max_iters
        .unwrap_or(usize::MAX)
        .min(cfg.epochs * (train_full.len().max(1)).div_ceil(cfg.batch));
    let stage_end = if train_short.is_empty() { 0 } else { budget / 4 };

    let val_loss = |p: &NetParams| -> f64 {
        if val_windows.is_empty() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for &w in &val_windows {
            let (solver, states, t0) = window_loss_inputs(items, w, cfg.unroll_m);
            let (l, _) = unrolled_loss(p, solver, mode, dt, states, t0, cfg.weight_decay);
            acc += l;
        }
        acc / val_windows.len() as f64
    };

    let mut best = params.clone();
    let mut best_val = val_loss(&params);
    let mut loss_history = Vec::new();
    let mut val_history = Vec::new();
    let mut iterations = 0usize;
    let mut blowups_total = 0usize;
    let mut epoch_rng = stream.rng_at(2);

    'outer: for _epoch in 0..cfg.epochs {
        let short_stage = iterations < stage_end;
        let m = if short_stage { 2 } else { cfg.unroll_m };
        let mut order: Vec<WindowRef> = if short_stage {
            train_short.clone()
        } else {
            train_full.clone()
        };
        shuffle(&mut order, &mut epoch_rng);

        let mut epoch_all_blown = true;
        for chunk in order.chunks(cfg.batch) {
            let mut grad_acc = vec![0.0; params.theta.len()];
            let mut loss_acc = 0.0;
            let mut live = 0usize;
            for &w in chunk {
                let (solver, states, t0) = window_loss_inputs(items, w, m);
                let (l, g, blown) =
                    grad_theta(&params, solver, mode, dt, states, t0, cfg.weight_decay);
                loss_acc += l;
                if blown {
                    blowups_total += 1;
                } else {
                    epoch_all_blown = false;
                    live += 1;
                    for (a, b) in grad_acc.iter_mut().zip(&g) {
                        *a += b;
                    }
                }
            }
            if live > 0 {
                for a in &mut grad_acc {
                    *a /= live as f64;
                }
                adam.step(&mut params.theta, &grad_acc);
            }
            loss_history.push(loss_acc / chunk.len() as f64);
            iterations += 1;
            if iterations >= budget {
                break 'outer;
            }
        }
        if epoch_all_blown && !order.is_empty() {
            return Err(SolverError::Diverged(format!(
                "every window blew up during epoch (iteration {iterations})"
            )));
        }
        let v = val_loss(&params);
        val_history.push((iterations, v));
        if v < best_val {
            best_val = v;
            best = params.clone();
        }
    }

    // final validation check so a best model is never missed
    let v = val_loss(&params);
    val_history.push((iterations, v));
    if v < best_val {
        best = params.clone();
    }

    Ok(TrainReport {
        params: best,
        final_params: params,
        loss_history,
        val_history,
        iterations,
        blowup_windows: blowups_total,
    })
}

/// How a fine-grid field maps onto the coarse grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Downsample {
    /// Block averages (used for Burgers); preserves the spatial mean
    /// exactly.
    MeanPool,
    /// Fourier truncation to the coarse band (used for KS); lossless for
    /// resolved modes.
    SpectralTruncate,
}

pub fn downsample_field(f: &Field, n_coarse: usize, method: Downsample) -> Field {
    let n_fine = f.len();
    assert!(
        n_fine % n_coarse == 0,
        "fine size {n_fine} not a multiple of coarse size {n_coarse}"
    );
    let coarse_grid = Grid1D::new(n_coarse, f.grid().length());
    if n_fine == n_coarse {
        return Field::new(coarse_grid, f.values().to_vec());
    }
    match method {
        Downsample::MeanPool => {
            // box filter centered on the coarse point x_j = j * factor * dx_f
            // (half-weight endpoints for even factors), so the pooled field
            // is not shifted against the coarse grid
            let factor = n_fine / n_coarse;
            let v = f.values();
            let values = (0..n_coarse)
                .map(|j| {
                    let c = j * factor;
                    let acc = if factor % 2 == 0 {
                        let half = factor / 2;
                        let mut acc = 0.5 * v[(c + n_fine - half) % n_fine]
                            + 0.5 * v[(c + half) % n_fine];
                        for i in 1..half {
                            acc += v[(c + n_fine - i) % n_fine] + v[(c + i) % n_fine];
                        }
                        acc + v[c]
                    } else {
                        let half = (factor - 1) / 2;
                        let mut acc = v[c];
                        for i in 1..=half {
                            acc += v[(c + n_fine - i) % n_fine] + v[(c + i) % n_fine];
                        }
                        acc
                    };
                    acc / factor as f64
                })
                .collect();
            Field::new(coarse_grid, values)
        }
        Downsample::SpectralTruncate => {
            let data: Vec<Cplx> = f.values().iter().map(|&v| Cplx::new(v, 0.0)).collect();
            let hat = fft(&data);
            let scale = n_coarse as f64 / n_fine as f64;
            let mut coarse = vec![Cplx::new(0.0, 0.0); n_coarse];
            let half = n_coarse as i64 / 2;
            for (j, c) in coarse.iter_mut().enumerate() {
                let m = mode_index(j, n_coarse);
                if m.abs() < half {
                    let src = if m >= 0 { m as usize } else { (n_fine as i64 + m) as usize };
                    *c = hat[src].scale(scale);
                } else {
                    // coarse Nyquist: fold the +/- fine modes into a real
                    // coefficient
                    let plus = hat[half as usize];
                    let minus = hat[n_fine - half as usize];
                    *c = (plus + minus).scale(0.5 * scale);
                }
            }
            let phys = ifft(&coarse);
            Field::new(coarse_grid, phys.iter().map(|c| c.re).collect())
        }
    }
}

/// Spatial downsampling plus temporal striding of a reference trajectory.
pub fn downsample_trajectory(
    fine: &Trajectory,
    n_coarse: usize,
    stride: usize,
    method: Downsample,
) -> Trajectory {
    assert!(stride >= 1);
    let mut out = Trajectory::new(
        fine.times()[0],
        downsample_field(fine.state(0), n_coarse, method),
    );
    let mut i = stride;
    while i < fine.len() {
        out.push(
            fine.times()[i],
            downsample_field(fine.state(i), n_coarse, method),
        );
        i += stride;
    }
    out
}

/// Box-filter attenuation of mode `l` under pooling to spacing `dx_c`:
/// the coarse solver must be driven by the filtered forcing, not the
/// pointwise one, or the mismatch shows up as an unlearnable time-dependent
/// residual.
fn pool_attenuation(l: u32, dx_c: f64, length: f64) -> f64 {
    let t = std::f64::consts::PI * l as f64 * dx_c / length;
    if t == 0.0 {
        1.0
    } else {
        t.sin() / t
    }
}

/// Forced-Burgers dataset: fine-grid references (recorded after a spin-up
/// so the flow is developed), mean-pooled onto the coarse grid, paired with
/// coarse solvers driven by the filtered forcing of each trajectory.
#[allow(clippy::too_many_arguments)]
pub fn make_dataset_burgers_opts(
    n_fine: usize,
    n_coarse: usize,
    length: f64,
    nu: f64,
    dt: f64,
    spinup_steps: usize,
    steps: usize,
    n_traj: usize,
    stream: &RngStream,
) -> Result<Vec<TrainItem>, SolverError> {
    use crate::burgers::{BurgersParams, BurgersSolver, ForcingParams, SourceTerm};
    let fine_grid = Grid1D::new(n_fine, length);
    let coarse_grid = Grid1D::new(n_coarse, length);
    let params = BurgersParams {
        nu,
        dt,
        ..Default::default()
    };
    let mut items = Vec::with_capacity(n_traj);
    for traj_id in 0..n_traj {
        let mut rng = stream.substream(traj_id as u64).rng_at(0);
        let forcing = ForcingParams::sample(&mut rng, length);
        let fine = BurgersSolver::new(fine_grid, params, SourceTerm::Forcing(forcing.clone()));
        // spin up from rest so recorded states sit on the developed flow
        let mut u = Field::zeros(fine_grid);
        for i in 0..spinup_steps {
            u = fine
                .step(&u, i as f64 * dt, dt)
                .map_err(|_| SolverError::Blowup { step: i })?;
        }
        let t0 = spinup_steps as f64 * dt;
        let mut traj = Trajectory::new(t0, u.clone());
        for i in 1..=steps {
            u = fine
                .step(&u, t0 + (i - 1) as f64 * dt, dt)
                .map_err(|_| SolverError::Blowup { step: i })?;
            traj.push(t0 + i as f64 * dt, u.clone());
        }
        let reference = downsample_trajectory(&traj, n_coarse, 1, Downsample::MeanPool);
        let mut filtered = forcing;
        for term in &mut filtered.terms {
            term.amplitude *= pool_attenuation(term.wavenumber, coarse_grid.dx(), length);
        }
        let coarse = BurgersSolver::new(coarse_grid, params, SourceTerm::Forcing(filtered));
        items.push(TrainItem {
            reference,
            solver: HybridSolver::Burgers(coarse),
        });
    }
    Ok(items)
}

/// [`make_dataset_burgers_opts`] with the default spin-up of 3000 steps.
#[allow(clippy::too_many_arguments)]
pub fn make_dataset_burgers(
    n_fine: usize,
    n_coarse: usize,
    length: f64,
    nu: f64,
    dt: f64,
    steps: usize,
    n_traj: usize,
    stream: &RngStream,
) -> Result<Vec<TrainItem>, SolverError> {
    make_dataset_burgers_opts(
        n_fine, n_coarse, length, nu, dt, 3000, steps, n_traj, stream,
    )
}

/// KS dataset: fine-timestep ETDRK2 references strided down to the coarse
/// step, paired with the coarse solver (same grid, coarse dt, chosen
/// scheme).
#[allow(clippy::too_many_arguments)]
pub fn make_dataset_ks(
    grid: Grid1D,
    dt_fine: f64,
    stride: usize,
    coarse_scheme: Scheme,
    coarse_steps: usize,
    n_traj: usize,
    stream: &RngStream,
) -> Result<Vec<TrainItem>, SolverError> {
    let mut items = Vec::with_capacity(n_traj);
    let fine = KsSolver::new(grid, dt_fine, Scheme::Etdrk2);
    let dt_coarse = dt_fine * stride as f64;
    for traj_id in 0..n_traj {
        let sub = stream.substream(traj_id as u64);
        let u0 = crate::ks::attractor_state(grid, &sub)?;
        let fine_traj = fine.run(&u0, coarse_steps * stride, 1)?;
        let reference = downsample_trajectory(&fine_traj, grid.n(), stride, Downsample::SpectralTruncate);
        let coarse = KsSolver::new(grid, dt_coarse, coarse_scheme);
        items.push(TrainItem {
            reference,
            solver: HybridSolver::Ks(coarse),
        });
    }
    Ok(items)
}
