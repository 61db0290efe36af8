//! Correction-injection topologies and the hybrid step operator.
//!
//! A correction source (zero, step-keyed Gaussian noise, or the neural
//! corrector) can enter the embedded solver in four ways:
//!
//! * `Direct`     - added to the solver output, evaluated on the output;
//! * `PreCorrect` - added to the input before the solver step;
//! * `Scaled`     - like `Direct` but multiplied by the step size;
//! * `Indirect`   - added to the right-hand side and integrated by the
//!   scheme itself (appended to the Euler source term; fused with the
//!   nonlinear term in Fourier space for ETD).
//!
//! `NoModel` runs the bare solver. With the zero source every mode is
//! bit-identical to `NoModel`, which pins the plumbing.

use crate::burgers::BurgersSolver;
use crate::error::SolverError;
use crate::grid::{Field, Grid1D, Trajectory};
use crate::ks::KsSolver;
use crate::net::{net_forward, NetParams, NetSpec};
use crate::rng::{gaussian_field, RngStream};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectionMode {
    NoModel,
    Direct,
    PreCorrect,
    Scaled,
    Indirect,
}

impl InjectionMode {
    pub const ALL: [InjectionMode; 5] = [
        InjectionMode::NoModel,
        InjectionMode::Direct,
        InjectionMode::PreCorrect,
        InjectionMode::Scaled,
        InjectionMode::Indirect,
    ];
}

/// What produces the correction field.
#[derive(Clone, Debug)]
pub enum CorrectorSource {
    Zero,
    /// Fresh zero-mean Gaussian draw per step, keyed by `(stream, step)` so
    /// resumed rollouts see identical noise.
    GaussianNoise { eps: f64, stream: RngStream },
    Neural(NetParams),
}

#[derive(Clone, Debug)]
pub struct CorrectorSpec {
    pub source: CorrectorSource,
    pub mode: InjectionMode,
}

impl CorrectorSpec {
    pub fn none() -> CorrectorSpec {
        CorrectorSpec {
            source: CorrectorSource::Zero,
            mode: InjectionMode::NoModel,
        }
    }
}

/// Generic-scalar view of a corrector; `Neural` borrows the parameter slice
/// so training can substitute tape variables.
pub enum CorrectorG<'a, S: Scalar> {
    Zero,
    Noise { eps: f64, stream: RngStream },
    Neural { spec: &'a NetSpec, theta: &'a [S] },
}

impl<'a, S: Scalar> CorrectorG<'a, S> {
    pub fn eval(&self, grid: Grid1D, u: &[S], step_index: u64) -> Vec<S> {
        match self {
            CorrectorG::Zero => vec![S::zero(); u.len()],
            CorrectorG::Noise { eps, stream } => gaussian_field(grid, *eps, stream, step_index)
                .values()
                .iter()
                .map(|&v| S::from_f64(v))
                .collect(),
            CorrectorG::Neural { spec, theta } => net_forward(spec, theta, u),
        }
    }
}

impl<'a> CorrectorG<'a, f64> {
    pub fn from_source(source: &'a CorrectorSource) -> CorrectorG<'a, f64> {
        match source {
            CorrectorSource::Zero => CorrectorG::Zero,
            CorrectorSource::GaussianNoise { eps, stream } => CorrectorG::Noise {
                eps: *eps,
                stream: *stream,
            },
            CorrectorSource::Neural(p) => CorrectorG::Neural {
                spec: &p.spec,
                theta: &p.theta,
            },
        }
    }
}

/// Evaluates a corrector on a state (zero field for `Zero`, step-keyed draw
/// for noise, network forward pass otherwise).
pub fn corrector_eval(spec: &CorrectorSpec, u: &Field, step_index: u64) -> Field {
    let corr = CorrectorG::from_source(&spec.source);
    Field::new(u.grid(), corr.eval(u.grid(), u.values(), step_index))
}

/// Plain explicit diffusion solver `u_t = nu u_xx`; the stable toy system of
/// the perturbation analysis.
#[derive(Clone, Debug)]
pub struct DiffusionSolver {
    grid: Grid1D,
    nu: f64,
}

impl DiffusionSolver {
    pub fn new(grid: Grid1D, nu: f64) -> DiffusionSolver {
        assert!(nu > 0.0);
        DiffusionSolver { grid, nu }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Analytic spectral norm of the RHS Jacobian, `4 nu / dx^2` at the
    /// Nyquist mode.
    pub fn lipschitz(&self) -> f64 {
        4.0 * self.nu / (self.grid.dx() * self.grid.dx())
    }

    pub fn rhs_g<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let n = u.len();
        let c = self.nu / (self.grid.dx() * self.grid.dx());
        (0..n)
            .map(|i| (u[(i + 1) % n] - u[i] * 2.0 + u[(i + n - 1) % n]) * c)
            .collect()
    }

    pub fn step_g<S: Scalar>(&self, u: &[S], dt: f64, extra_rhs: Option<&[S]>) -> Vec<S> {
        let rhs = self.rhs_g(u);
        match extra_rhs {
            None => u.iter().zip(&rhs).map(|(&a, &r)| a + r * dt).collect(),
            Some(e) => u
                .iter()
                .zip(rhs.iter().zip(e))
                .map(|(&a, (&r, &x))| a + (r + x) * dt)
                .collect(),
        }
    }
}

/// The embedded coarse solver of a hybrid step.
#[derive(Clone, Debug)]
pub enum HybridSolver {
    Burgers(BurgersSolver),
    Ks(KsSolver),
    Diffusion(DiffusionSolver),
}

impl HybridSolver {
    pub fn grid(&self) -> Grid1D {
        match self {
            HybridSolver::Burgers(s) => s.grid(),
            HybridSolver::Ks(s) => s.grid(),
            HybridSolver::Diffusion(s) => s.grid(),
        }
    }

    /// Bare solver step with the optional extra RHS term.
    pub fn base_step_g<S: Scalar>(
        &self,
        u: &[S],
        t: f64,
        dt: f64,
        extra_rhs: Option<&[S]>,
    ) -> Vec<S> {
        match self {
            HybridSolver::Burgers(s) => s.step_g(u, t, dt, extra_rhs),
            HybridSolver::Ks(s) => {
                assert!(
                    (dt - s.dt()).abs() <= 1e-12 * s.dt(),
                    "ETD coefficients were built for dt = {}, got {dt}",
                    s.dt()
                );
                s.step_field_g(u, extra_rhs)
            }
            HybridSolver::Diffusion(s) => s.step_g(u, dt, extra_rhs),
        }
    }

    fn blowup_limit(&self) -> f64 {
        match self {
            HybridSolver::Ks(_) => crate::ks::BLOWUP_LIMIT,
            _ => f64::INFINITY,
        }
    }
}

/// One hybrid step over a generic scalar (no blowup check; the `f64`
/// wrappers handle termination).
pub fn hybrid_step_g<S: Scalar>(
    solver: &HybridSolver,
    u: &[S],
    t: f64,
    dt: f64,
    corr: &CorrectorG<S>,
    mode: InjectionMode,
    step_index: u64,
) -> Vec<S> {
    let grid = solver.grid();
    match mode {
        InjectionMode::NoModel => solver.base_step_g(u, t, dt, None),
        InjectionMode::Direct => {
            let star = solver.base_step_g(u, t, dt, None);
            let c = corr.eval(grid, &star, step_index);
            star.iter().zip(&c).map(|(&a, &b)| a + b).collect()
        }
        InjectionMode::PreCorrect => {
            let c = corr.eval(grid, u, step_index);
            let pre: Vec<S> = u.iter().zip(&c).map(|(&a, &b)| a + b).collect();
            solver.base_step_g(&pre, t, dt, None)
        }
        InjectionMode::Scaled => {
            let star = solver.base_step_g(u, t, dt, None);
            let c = corr.eval(grid, &star, step_index);
            star.iter().zip(&c).map(|(&a, &b)| a + b * dt).collect()
        }
        InjectionMode::Indirect => {
            let c = corr.eval(grid, u, step_index);
            solver.base_step_g(u, t, dt, Some(&c))
        }
    }
}

/// One hybrid step with blowup detection.
pub fn hybrid_step(
    solver: &HybridSolver,
    u: &Field,
    t: f64,
    dt: f64,
    spec: &CorrectorSpec,
    step_index: u64,
) -> Result<Field, SolverError> {
    let corr = CorrectorG::from_source(&spec.source);
    let next = Field::new(
        solver.grid(),
        hybrid_step_g(solver, u.values(), t, dt, &corr, spec.mode, step_index),
    );
    if !next.is_finite() || next.max_abs() > solver.blowup_limit() {
        return Err(SolverError::Blowup { step: 0 });
    }
    Ok(next)
}

/// Result of an autoregressive rollout; on blowup the partial trajectory is
/// retained for diagnostics.
#[derive(Clone, Debug)]
pub struct RolloutOutcome {
    pub trajectory: Trajectory,
    pub blowup_step: Option<usize>,
}

impl RolloutOutcome {
    pub fn survived_steps(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// Autoregressive hybrid rollout. Step `i` (1-based, offset by
/// `start_step`) advances `t = (start_step + i - 1) dt` to
/// `(start_step + i) dt`; noise draws are keyed by the absolute step, so a
/// rollout resumed from any point reproduces the original one.
pub fn rollout(
    solver: &HybridSolver,
    u0: &Field,
    steps: usize,
    spec: &CorrectorSpec,
    dt: f64,
    start_step: u64,
) -> RolloutOutcome {
    let t0 = start_step as f64 * dt;
    let mut traj = Trajectory::new(t0, u0.clone());
    let mut u = u0.clone();
    for i in 1..=steps {
        let t = t0 + (i - 1) as f64 * dt;
        match hybrid_step(solver, &u, t, dt, spec, start_step + i as u64 - 1) {
            Ok(next) => {
                u = next;
                traj.push(t0 + i as f64 * dt, u.clone());
            }
            Err(_) => {
                return RolloutOutcome {
                    trajectory: traj,
                    blowup_step: Some(i),
                }
            }
        }
    }
    RolloutOutcome {
        trajectory: traj,
        blowup_step: None,
    }
}
