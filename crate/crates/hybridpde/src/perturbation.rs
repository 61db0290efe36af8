//! Executable perturbation-propagation analysis.
//!
//! How does a per-step perturbation grow over an autoregressive rollout? A
//! state perturbation `e_u` injected at step `m` is amplified by the
//! one-step matrix `G(u) = I + dt J(u)` and then by every later step's `G`;
//! a right-hand-side perturbation `e_s` enters pre-multiplied by `dt`
//! instead of `G`. This module builds those objects numerically:
//! finite-difference Jacobians, amplification matrices, the cumulative
//! linearized error, the empirical direct/indirect error-dominance ratio
//! alongside its closed-form bound `(1 + dt L)/dt`, and Lipschitz /
//! largest-Lyapunov-exponent estimators satisfying `L >= lambda_max`.
//!
//! Analysis always linearizes the explicit-Euler map `u + dt rhs(u)` of a
//! differentiable right-hand side: Burgers enters with its split speed
//! frozen, KS through its physical-space RHS even though production
//! stepping is ETD.

use crate::burgers::BurgersSolver;
use crate::correction::{
    rollout, CorrectorSource, CorrectorSpec, DiffusionSolver, HybridSolver, InjectionMode,
};
use crate::error::SolverError;
use crate::grid::{Field, Grid1D};
use crate::ks::KsSolver;
use crate::rng::{gaussian_field, RngStream};
use crate::scalar::Scalar;
use crate::tape;

use ndarray::Array2;

/// Differentiable right-hand-side operators the analysis can linearize.
#[derive(Clone, Debug)]
pub enum RhsOperator {
    /// Burgers RHS with the Lax-Friedrichs speed frozen to a constant.
    BurgersFrozenAlpha {
        solver: BurgersSolver,
        t: f64,
        alpha: f64,
    },
    /// KS right-hand side in physical space.
    KsPhysical(KsSolver),
    Diffusion(DiffusionSolver),
    /// Dense linear map (tests/toys).
    Linear(Array2<f64>),
    /// Pointwise square `rhs_i = u_i^2` (tests).
    QuadraticDiag(Grid1D),
}

impl RhsOperator {
    /// Burgers operator with alpha frozen at `max|u_base|`.
    pub fn burgers_frozen(solver: BurgersSolver, u_base: &Field, t: f64) -> RhsOperator {
        let alpha = u_base.max_abs();
        RhsOperator::BurgersFrozenAlpha { solver, t, alpha }
    }

    pub fn dim(&self) -> usize {
        match self {
            RhsOperator::BurgersFrozenAlpha { solver, .. } => solver.grid().n(),
            RhsOperator::KsPhysical(s) => s.grid().n(),
            RhsOperator::Diffusion(s) => s.grid().n(),
            RhsOperator::Linear(a) => a.nrows(),
            RhsOperator::QuadraticDiag(g) => g.n(),
        }
    }

    pub fn eval_g<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        match self {
            RhsOperator::BurgersFrozenAlpha { solver, t, alpha } => {
                solver.rhs_frozen_alpha_g(u, *t, *alpha)
            }
            RhsOperator::KsPhysical(s) => s.rhs_physical_g(u),
            RhsOperator::Diffusion(s) => s.rhs_g(u),
            RhsOperator::Linear(a) => {
                let n = a.nrows();
                (0..n)
                    .map(|i| {
                        let mut acc = S::zero();
                        for j in 0..n {
                            acc = acc + u[j] * a[[i, j]];
                        }
                        acc
                    })
                    .collect()
            }
            RhsOperator::QuadraticDiag(_) => u.iter().map(|&v| v * v).collect(),
        }
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.eval_g(u)
    }
}

/// Default central-difference step `1e-5 (1 + max|u|)`.
pub fn default_fd_step(u: &[f64]) -> f64 {
    1e-5 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Central-difference Jacobian, column `j = (rhs(u + h e_j) - rhs(u - h
/// e_j)) / 2h`.
pub fn jacobian_fd(op: &RhsOperator, u: &[f64], h: f64) -> Array2<f64> {
    assert!(h > 0.0);
    let n = u.len();
    let mut jac = Array2::zeros((n, n));
    let mut probe = u.to_vec();
    for j in 0..n {
        probe[j] = u[j] + h;
        let plus = op.eval(&probe);
        probe[j] = u[j] - h;
        let minus = op.eval(&probe);
        probe[j] = u[j];
        for i in 0..n {
            jac[[i, j]] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Vector-Jacobian product `J(u)^T w`, exact via reverse-mode
/// differentiation of the generic RHS.
pub fn vjp(op: &RhsOperator, u: &[f64], w: &[f64]) -> Vec<f64> {
    tape::reset();
    let leaves: Vec<tape::Ad> = u.iter().map(|&v| tape::var(v)).collect();
    let out = op.eval_g(&leaves);
    let mut s = tape::constant(0.0);
    for (y, &wi) in out.iter().zip(w) {
        s = s + *y * wi;
    }
    let adj = tape::gradients(s);
    let g = leaves.iter().map(|&l| adj.wrt(l)).collect();
    tape::reset();
    g
}

/// One-step error amplification matrix `G = I + dt J`.
pub fn amplification(jac: &Array2<f64>, dt: f64) -> Array2<f64> {
    let n = jac.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + dt * jac[[i, j]]
    })
}

fn matvec(m: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    (0..n)
        .map(|i| (0..m.ncols()).map(|j| m[[i, j]] * v[j]).sum())
        .collect()
}

/// Cumulative linearized error after `k` steps:
/// `sum_m (prod_{i>m} G_i) [G_m e_u^m + dt e_s^m]`, empty products being
/// the identity. Evaluated through explicit suffix products of the `G`
/// matrices (the independent recursion oracle lives in the tests).
pub fn cumulative_error_linear(
    g_seq: &[Array2<f64>],
    eps_u_seq: &[Vec<f64>],
    eps_s_seq: &[Vec<f64>],
    dt: f64,
) -> Vec<f64> {
    let k = g_seq.len();
    assert!(k > 0, "need at least one step");
    assert_eq!(eps_u_seq.len(), k);
    assert_eq!(eps_s_seq.len(), k);
    let n = g_seq[0].nrows();

    // suffix[m] = G_{k-1} .. G_{m+1}
    let mut suffix = vec![Array2::eye(n); k];
    for m in (0..k.saturating_sub(1)).rev() {
        suffix[m] = suffix[m + 1].dot(&g_seq[m + 1]);
    }

    let mut total = vec![0.0; n];
    for m in 0..k {
        let inner: Vec<f64> = matvec(&g_seq[m], &eps_u_seq[m])
            .iter()
            .zip(&eps_s_seq[m])
            .map(|(a, b)| a + dt * b)
            .collect();
        let contrib = matvec(&suffix[m], &inner);
        for (t, c) in total.iter_mut().zip(&contrib) {
            *t += c;
        }
    }
    total
}

/// Closed-form dominance-ratio bound `(1 + dt L) / dt`.
pub fn rk_bound(dt: f64, l: f64) -> f64 {
    assert!(dt > 0.0 && l >= 0.0);
    (1.0 + dt * l) / dt
}

/// Empirical error-dominance ratio: three matched rollouts from `u0`
/// (clean, noise injected directly, noise injected indirectly, identical
/// draws), returning `|delta_direct| / |delta_indirect|` after `k` steps.
pub fn rk_empirical(
    solver: &HybridSolver,
    u0: &Field,
    eps: f64,
    dt: f64,
    k: usize,
    stream: RngStream,
) -> Result<f64, SolverError> {
    assert!(k >= 1);
    let base = rollout(solver, u0, k, &CorrectorSpec::none(), dt, 0);
    let mk = |mode| CorrectorSpec {
        source: CorrectorSource::GaussianNoise { eps, stream },
        mode,
    };
    let direct = rollout(solver, u0, k, &mk(InjectionMode::Direct), dt, 0);
    let indirect = rollout(solver, u0, k, &mk(InjectionMode::Indirect), dt, 0);
    for out in [&base, &direct, &indirect] {
        if let Some(step) = out.blowup_step {
            return Err(SolverError::Blowup { step });
        }
    }
    let d_dir = direct
        .trajectory
        .last_state()
        .sub(base.trajectory.last_state())
        .norm_l2();
    let d_ind = indirect
        .trajectory
        .last_state()
        .sub(base.trajectory.last_state())
        .norm_l2();
    Ok(d_dir / d_ind)
}

const POWER_ITERS: usize = 50;
const POWER_TOL: f64 = 1e-8;

fn seeded_direction(n: usize, tag: u64) -> Vec<f64> {
    let mut rng = RngStream::new(0x9d2c_5681, tag).rng_at(0);
    let v = crate::rng::standard_normals(&mut rng, n);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Spectral norm via power iteration on `M^T M` (up to 50 iterations,
/// relative tolerance 1e-8, deterministic start vector).
pub fn spectral_norm(m: &Array2<f64>) -> f64 {
    let n = m.ncols();
    let mut v = seeded_direction(n, 1);
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERS {
        let w = matvec(m, &v);
        let mut z = vec![0.0; n];
        for i in 0..m.nrows() {
            for j in 0..n {
                z[j] += m[[i, j]] * w[i];
            }
        }
        let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if zn == 0.0 {
            return 0.0;
        }
        let new_sigma = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut z {
            *x /= zn;
        }
        v = z;
        if (new_sigma - sigma).abs() <= POWER_TOL * new_sigma.max(1e-300) {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

/// Matrix-free spectral norm of `J(u)`: forward differences for `J v`,
/// reverse-mode VJP for `J^T w`. Used above the explicit-Jacobian size cap.
pub fn spectral_norm_matfree(op: &RhsOperator, u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut v = seeded_direction(n, 2);
    let mut sigma = 0.0;
    let mut probe_plus = u.to_vec();
    let mut probe_minus = u.to_vec();
    for _ in 0..POWER_ITERS {
        for i in 0..n {
            probe_plus[i] = u[i] + h * v[i];
            probe_minus[i] = u[i] - h * v[i];
        }
        let plus = op.eval(&probe_plus);
        let minus = op.eval(&probe_minus);
        let w: Vec<f64> = plus
            .iter()
            .zip(&minus)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let z = vjp(op, u, &w);
        let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if zn == 0.0 {
            return 0.0;
        }
        let new_sigma = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = z.iter().map(|x| x / zn).collect();
        if (new_sigma - sigma).abs() <= POWER_TOL * new_sigma.max(1e-300) {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

/// Explicit Jacobians are built only up to this dimension; beyond it the
/// matrix-free route is used.
pub const EXPLICIT_JACOBIAN_CAP: usize = 128;

/// Lipschitz bound estimate `max over samples of |J(u)|_2`.
pub fn lipschitz_estimate(op: &RhsOperator, samples: &[Field]) -> f64 {
    assert!(!samples.is_empty(), "need at least one sample state");
    samples
        .iter()
        .map(|u| {
            let h = default_fd_step(u.values());
            if u.len() <= EXPLICIT_JACOBIAN_CAP {
                spectral_norm(&jacobian_fd(op, u.values(), h))
            } else {
                spectral_norm_matfree(op, u.values(), h)
            }
        })
        .fold(0.0, f64::max)
}

/// Initial separation of the two-trajectory Lyapunov estimator.
pub const LYAPUNOV_DELTA0: f64 = 1e-8;

/// Largest Lyapunov exponent by the two-trajectory method: evolve `u` and
/// `u + delta`, accumulate `ln(|delta|/delta0)` every `renorm_every` steps,
/// rescale delta back, and average the accumulated rate over the span.
pub fn lyapunov_max(
    solver: &HybridSolver,
    u0: &Field,
    dt: f64,
    total_steps: usize,
    renorm_every: usize,
    stream: &RngStream,
) -> Result<f64, SolverError> {
    assert!(renorm_every >= 1);
    assert!(total_steps >= renorm_every);
    let grid = solver.grid();
    let dir = gaussian_field(grid, 1.0, stream, 0);
    let delta0 = dir.scaled(LYAPUNOV_DELTA0 / dir.norm_l2());
    let spec = CorrectorSpec::none();

    let mut u = u0.clone();
    let mut up = u0.add(&delta0);
    let mut sum_log = 0.0;
    let mut steps_done = 0usize;
    while steps_done < total_steps {
        let chunk = renorm_every.min(total_steps - steps_done);
        for i in 0..chunk {
            let t = (steps_done + i) as f64 * dt;
            u = crate::correction::hybrid_step(solver, &u, t, dt, &spec, 0).map_err(|_| {
                SolverError::Blowup {
                    step: steps_done + i,
                }
            })?;
            up = crate::correction::hybrid_step(solver, &up, t, dt, &spec, 0).map_err(|_| {
                SolverError::Blowup {
                    step: steps_done + i,
                }
            })?;
        }
        steps_done += chunk;
        let delta = up.sub(&u);
        let r = delta.norm_l2() / LYAPUNOV_DELTA0;
        sum_log += r.ln();
        up = u.add(&delta.scaled(1.0 / r));
    }
    Ok(sum_log / (total_steps as f64 * dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::{BurgersParams, SourceTerm};
    use crate::ks::Scheme;
    use crate::rng::uniform;
    use std::f64::consts::PI;

    fn random_matrix(n: usize, scale: f64, tag: u64) -> Array2<f64> {
        let mut rng = RngStream::new(314, tag).rng_at(0);
        Array2::from_shape_fn((n, n), |_| uniform(&mut rng, -scale, scale))
    }

    fn random_vec(n: usize, scale: f64, tag: u64) -> Vec<f64> {
        let mut rng = RngStream::new(321, tag).rng_at(0);
        (0..n).map(|_| uniform(&mut rng, -scale, scale)).collect()
    }

    #[test]
    fn jacobian_recovers_linear_map() {
        let a = random_matrix(16, 1.0, 1);
        let op = RhsOperator::Linear(a.clone());
        let u = random_vec(16, 1.0, 2);
        let j = jacobian_fd(&op, &u, 1e-5);
        let mut worst = 0.0f64;
        for i in 0..16 {
            for jj in 0..16 {
                worst = worst.max((j[[i, jj]] - a[[i, jj]]).abs());
            }
        }
        assert!(worst < 1e-8, "linear map not recovered: {worst}");
    }

    #[test]
    fn jacobian_of_diffusion_is_circulant_second_difference() {
        let g = Grid1D::new(24, 3.0);
        let nu = 0.4;
        let op = RhsOperator::Diffusion(DiffusionSolver::new(g, nu));
        let u = random_vec(24, 1.0, 3);
        let j = jacobian_fd(&op, &u, 1e-5);
        let c = nu / (g.dx() * g.dx());
        for i in 0..24 {
            for jj in 0..24 {
                let expect = if i == jj {
                    -2.0 * c
                } else if (jj + 24 - i) % 24 == 1 || (i + 24 - jj) % 24 == 1 {
                    c
                } else {
                    0.0
                };
                assert!(
                    (j[[i, jj]] - expect).abs() < 1e-4 * c,
                    "entry ({i},{jj}): {} vs {expect}",
                    j[[i, jj]]
                );
            }
        }
    }

    #[test]
    fn jacobian_of_pointwise_square_is_diagonal() {
        let g = Grid1D::new(12, 1.0);
        let op = RhsOperator::QuadraticDiag(g);
        let u = random_vec(12, 1.0, 4);
        let j = jacobian_fd(&op, &u, 1e-4);
        let mut worst = 0.0f64;
        for i in 0..12 {
            for jj in 0..12 {
                let expect = if i == jj { 2.0 * u[i] } else { 0.0 };
                worst = worst.max((j[[i, jj]] - expect).abs());
            }
        }
        // central differences are exact for quadratics up to roundoff
        assert!(worst < 1e-10, "diag(2u) not recovered: {worst}");
    }

    #[test]
    fn amplification_identity_cases() {
        let z: Array2<f64> = Array2::zeros((6, 6));
        assert_eq!(amplification(&z, 0.3), Array2::<f64>::eye(6));
        let j = random_matrix(6, 2.0, 5);
        assert_eq!(amplification(&j, 0.0), Array2::<f64>::eye(6));
        // triangle inequality |G| <= 1 + dt |J|
        let dt = 0.05;
        let g = amplification(&j, dt);
        assert!(spectral_norm(&g) <= 1.0 + dt * spectral_norm(&j) + 1e-10);
    }

    #[test]
    fn cumulative_error_single_step_reduction() {
        let n = 6;
        let g0 = amplification(&random_matrix(n, 1.0, 6), 0.1);
        let eu = random_vec(n, 1e-3, 7);
        let es = random_vec(n, 1e-3, 8);
        let got = cumulative_error_linear(&[g0.clone()], &[eu.clone()], &[es.clone()], 0.1);
        let expect: Vec<f64> = matvec(&g0, &eu)
            .iter()
            .zip(&es)
            .map(|(a, b)| a + 0.1 * b)
            .collect();
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_error_zero_perturbations() {
        let n = 5;
        let gs: Vec<Array2<f64>> = (0..3)
            .map(|t| amplification(&random_matrix(n, 1.0, 10 + t), 0.05))
            .collect();
        let zeros = vec![vec![0.0; n]; 3];
        let out = cumulative_error_linear(&gs, &zeros, &zeros, 0.05);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cumulative_error_matches_recursion_oracle() {
        // independent step-by-step recursion: d <- G (d + e_u) + dt e_s
        let n = 6;
        let dt = 0.07;
        for k in 1..=5 {
            let gs: Vec<Array2<f64>> = (0..k)
                .map(|t| amplification(&random_matrix(n, 1.5, 20 + t as u64), dt))
                .collect();
            let eus: Vec<Vec<f64>> =
                (0..k).map(|t| random_vec(n, 1e-4, 40 + t as u64)).collect();
            let ess: Vec<Vec<f64>> =
                (0..k).map(|t| random_vec(n, 1e-4, 60 + t as u64)).collect();

            let closed = cumulative_error_linear(&gs, &eus, &ess, dt);

            let mut delta = vec![0.0; n];
            for m in 0..k {
                let shifted: Vec<f64> = delta.iter().zip(&eus[m]).map(|(d, e)| d + e).collect();
                delta = matvec(&gs[m], &shifted)
                    .iter()
                    .zip(&ess[m])
                    .map(|(a, b)| a + dt * b)
                    .collect();
            }

            let num: f64 = closed
                .iter()
                .zip(&delta)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den: f64 = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(num / den < 1e-12, "k={k}: relative gap {}", num / den);
        }
    }

    #[test]
    fn bound_chain_holds_on_random_instances() {
        // direct and indirect cumulative errors never exceed their
        // geometric-series bounds with L = max |J_m|
        let n = 6;
        let dt = 0.05;
        let k = 6;
        for trial in 0..5u64 {
            let js: Vec<Array2<f64>> = (0..k)
                .map(|t| random_matrix(n, 2.0, 100 + 10 * trial + t as u64))
                .collect();
            let l = js.iter().map(spectral_norm).fold(0.0, f64::max);
            let gs: Vec<Array2<f64>> = js.iter().map(|j| amplification(j, dt)).collect();
            let eps = 1e-3;
            let eus: Vec<Vec<f64>> = (0..k)
                .map(|t| {
                    let v = random_vec(n, 1.0, 200 + t as u64);
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x * eps / norm).collect()
                })
                .collect();
            let zeros = vec![vec![0.0; n]; k];

            let r = 1.0 + dt * l;
            let geo = |lo: i32, hi: i32| -> f64 { (lo..=hi).map(|p| r.powi(p)).sum() };

            let num_vec = cumulative_error_linear(&gs, &eus, &zeros, dt);
            let num: f64 = num_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(
                num <= eps * geo(1, k as i32) + 1e-12,
                "numerator bound violated"
            );

            let den_vec = cumulative_error_linear(&gs, &zeros, &eus, dt);
            let den: f64 = den_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(
                den <= dt * eps * geo(0, k as i32 - 1) + 1e-12,
                "denominator bound violated"
            );
        }
    }

    #[test]
    fn geometric_series_closed_form() {
        for &l in &[0.0, 3.0, 40.0] {
            for &dt in &[1e-3, 0.05] {
                let r: f64 = 1.0 + dt * l;
                for k in 1..=50u32 {
                    let direct: f64 = (1..=k).map(|j| r.powi(j as i32)).sum();
                    let closed = if r == 1.0 {
                        k as f64
                    } else {
                        r * (r.powi(k as i32) - 1.0) / (r - 1.0)
                    };
                    assert!(
                        (direct - closed).abs() <= 1e-12 * closed.abs().max(1.0),
                        "k={k} r={r}: {direct} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn rk_bound_values() {
        assert_eq!(rk_bound(0.01, 0.0), 100.0);
        assert!((rk_bound(0.01, 10.0) - 110.0).abs() < 1e-12);
        for &dt in &[1e-3, 0.1, 0.9] {
            assert!(rk_bound(dt, 0.0) > 1.0);
        }
    }

    fn diffusion_toy() -> (HybridSolver, Field, f64) {
        let g = Grid1D::new(64, 2.0 * PI);
        let solver = DiffusionSolver::new(g, 0.24);
        let u0 = gaussian_field(g, 1.0, &RngStream::new(55, 0), 0);
        (HybridSolver::Diffusion(solver), u0, 0.005)
    }

    #[test]
    fn rk_empirical_is_eps_invariant_in_linear_regime() {
        let (solver, u0, dt) = diffusion_toy();
        let s = RngStream::new(300, 0);
        let r1 = rk_empirical(&solver, &u0, 1e-5, dt, 10, s).unwrap();
        let r2 = rk_empirical(&solver, &u0, 2e-5, dt, 10, s).unwrap();
        assert!(
            ((r1 - r2) / r1).abs() < 0.05,
            "ratio not eps-invariant: {r1} vs {r2}"
        );
    }

    #[test]
    fn rk_empirical_within_factor_three_of_bound() {
        let (solver, u0, dt) = diffusion_toy();
        let l = match &solver {
            HybridSolver::Diffusion(d) => d.lipschitz(),
            _ => unreachable!(),
        };
        let r = rk_empirical(&solver, &u0, 1e-5, dt, 10, RngStream::new(301, 0)).unwrap();
        let bound = rk_bound(dt, l);
        assert!(r > 1.0, "dominance ratio should exceed one, got {r}");
        let factor = (bound / r).max(r / bound);
        assert!(
            factor < 3.0,
            "empirical {r} vs bound {bound}: factor {factor}"
        );
    }

    #[test]
    fn lipschitz_of_linear_map_is_state_independent() {
        let a = random_matrix(12, 1.0, 401);
        let op = RhsOperator::Linear(a.clone());
        let g = Grid1D::new(12, 1.0);
        let samples: Vec<Field> = (0..3)
            .map(|s| gaussian_field(g, 1.0, &RngStream::new(77, 3), s))
            .collect();
        let est = lipschitz_estimate(&op, &samples);
        let direct = spectral_norm(&a);
        assert!((est - direct).abs() < 1e-6 * direct);
    }

    #[test]
    fn lipschitz_of_diffusion_matches_circulant_norm() {
        let g = Grid1D::new(32, 2.0 * PI);
        let d = DiffusionSolver::new(g, 0.3);
        let analytic = d.lipschitz();
        let op = RhsOperator::Diffusion(d);
        let samples = vec![gaussian_field(g, 1.0, &RngStream::new(88, 0), 0)];
        let est = lipschitz_estimate(&op, &samples);
        assert!(
            ((est - analytic) / analytic).abs() < 0.01,
            "estimate {est} vs analytic {analytic}"
        );
    }

    #[test]
    fn lipschitz_monotone_in_samples() {
        let g = Grid1D::new(16, 1.0);
        let op = RhsOperator::QuadraticDiag(g);
        let s1 = vec![gaussian_field(g, 1.0, &RngStream::new(99, 0), 0)];
        let mut s2 = s1.clone();
        s2.push(gaussian_field(g, 2.0, &RngStream::new(99, 0), 1));
        assert!(lipschitz_estimate(&op, &s2) >= lipschitz_estimate(&op, &s1));
    }

    #[test]
    fn matfree_norm_matches_explicit_on_midsize_operator() {
        let g = Grid1D::new(96, 2.0 * PI);
        let op = RhsOperator::Diffusion(DiffusionSolver::new(g, 0.2));
        let u = gaussian_field(g, 1.0, &RngStream::new(111, 0), 0);
        let h = default_fd_step(u.values());
        let explicit = spectral_norm(&jacobian_fd(&op, u.values(), h));
        let matfree = spectral_norm_matfree(&op, u.values(), h);
        // the Nyquist eigenvalue cluster limits power-iteration resolution
        assert!(
            ((explicit - matfree) / explicit).abs() < 0.01,
            "{explicit} vs {matfree}"
        );
    }

    #[test]
    fn vjp_matches_explicit_transpose() {
        let g = Grid1D::new(16, 2.0);
        let solver = BurgersSolver::new(
            g,
            BurgersParams {
                nu: 0.1,
                ..Default::default()
            },
            SourceTerm::None,
        );
        let u = gaussian_field(g, 0.5, &RngStream::new(123, 0), 0);
        let op = RhsOperator::burgers_frozen(solver, &u, 0.0);
        let w = random_vec(16, 1.0, 500);
        let exact = vjp(&op, u.values(), &w);
        let jac = jacobian_fd(&op, u.values(), 1e-6);
        for j in 0..16 {
            let fd: f64 = (0..16).map(|i| jac[[i, j]] * w[i]).sum();
            assert!(
                (exact[j] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                "coordinate {j}: {} vs {fd}",
                exact[j]
            );
        }
    }

    #[test]
    fn linearization_residual_is_quadratic() {
        // one Euler step of the KS physical RHS: actual perturbed output
        // minus linear prediction shrinks ~4x when eps halves
        let g = Grid1D::new(32, 2.0 * PI * 3.2);
        let ks = KsSolver::new(g, 1e-3, Scheme::Etdrk2);
        let u = Field::from_fn(g, |x| (2.0 * PI * x / g.length()).sin() * 1.2);
        let op = RhsOperator::KsPhysical(ks);
        let dt = 1e-3;
        let jac = jacobian_fd(&op, u.values(), default_fd_step(u.values()));
        let g_mat = amplification(&jac, dt);
        let dir = gaussian_field(g, 1.0, &RngStream::new(222, 0), 0);
        let eta = dir.scaled(1.0 / dir.norm_l2());

        let euler = |state: &Field| -> Field {
            let rhs = op.eval(state.values());
            Field::new(
                g,
                state
                    .values()
                    .iter()
                    .zip(&rhs)
                    .map(|(a, b)| a + dt * b)
                    .collect(),
            )
        };

        let residual = |eps: f64| -> f64 {
            let pert = u.add(&eta.scaled(eps));
            let actual = euler(&pert);
            let epsu = vec![eta.scaled(eps).into_values()];
            let zeros = vec![vec![0.0; 32]];
            let lin = cumulative_error_linear(&[g_mat.clone()], &epsu, &zeros, dt);
            let predicted = Field::new(
                g,
                euler(&u)
                    .values()
                    .iter()
                    .zip(&lin)
                    .map(|(a, b)| a + b)
                    .collect(),
            );
            actual.sub(&predicted).norm_l2()
        };

        let r1 = residual(1e-3);
        let r2 = residual(5e-4);
        let r3 = residual(2.5e-4);
        assert!(r1 / r2 >= 3.5, "first halving only {}", r1 / r2);
        assert!(r2 / r3 >= 3.5, "second halving only {}", r2 / r3);
    }

    #[test]
    fn lyapunov_negative_for_diffusion() {
        let (solver, u0, dt) = diffusion_toy();
        let lam = lyapunov_max(&solver, &u0, dt, 2000, 10, &RngStream::new(400, 0)).unwrap();
        assert!(lam < -0.01, "diffusion should contract, got {lam}");
    }

    #[test]
    fn lyapunov_positive_and_below_lipschitz_for_ks() {
        let g = Grid1D::new(64, 2.0 * PI * 6.4);
        let u0 = crate::ks::attractor_state(g, &RngStream::new(500, 0)).unwrap();
        let ks = KsSolver::new(g, 0.01, Scheme::Etdrk2);
        let solver = HybridSolver::Ks(ks.clone());
        let lam = lyapunov_max(&solver, &u0, 0.01, 20_000, 20, &RngStream::new(501, 0)).unwrap();
        assert!(lam > 0.0, "KS should be chaotic, got lambda = {lam}");
        assert!(lam < 1.0, "implausibly large exponent {lam}");

        // Lipschitz bound from a few attractor samples dominates lambda
        let op = RhsOperator::KsPhysical(ks);
        let samples: Vec<Field> = {
            let mut states = Vec::new();
            let mut u = u0.clone();
            for _ in 0..3 {
                for _ in 0..50 {
                    u = crate::correction::hybrid_step(
                        &solver,
                        &u,
                        0.0,
                        0.01,
                        &CorrectorSpec::none(),
                        0,
                    )
                    .unwrap();
                }
                states.push(u.clone());
            }
            states
        };
        let l = lipschitz_estimate(&op, &samples);
        assert!(
            l >= lam,
            "Lipschitz bound {l} fails to dominate lambda_max {lam}"
        );
    }
}
