//! The experiment runners: each reproduces one desk-scale study, writes CSV
//! curves plus a JSON summary into the output directory, and finishes with
//! a manifest sufficient to re-run it byte-identically.

use super::config::*;
use super::output::{Cell, RunDir};
use crate::burgers::{oracles, BurgersParams, BurgersSolver, SourceTerm};
use crate::correction::{
    rollout, CorrectorSource, CorrectorSpec, DiffusionSolver, HybridSolver, InjectionMode,
};
use crate::grid::{Field, Grid1D, Trajectory};
use crate::ks::{attractor_state, KsSolver, Scheme};
use crate::metrics::{mse_fields, pearson_r2};
use crate::net::{NetParams, NetSpec};
use crate::perturbation::{lipschitz_estimate, lyapunov_max, rk_bound, rk_empirical, RhsOperator};
use crate::rng::RngStream;
use crate::train::{make_dataset_burgers, make_dataset_ks, train, TrainItem};

use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    /// A validated quantity exceeded its acceptance threshold.
    #[error("threshold failure: {0}")]
    Threshold(String),
    /// A rollout blew up somewhere the experiment does not expect it.
    #[error("unexpected blowup: {0}")]
    UnexpectedBlowup(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExpError {
    /// Distinct process exit codes per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Threshold(_) => 2,
            ExpError::UnexpectedBlowup(_) => 3,
            ExpError::Config(_) => 4,
            ExpError::Io(_) | ExpError::Json(_) => 5,
        }
    }
}

fn rel_l2(got: &Field, exact: &Field) -> f64 {
    got.sub(exact).norm_l2() / exact.norm_l2()
}

// ---------------------------------------------------------------- validate

#[derive(Debug, serde::Serialize)]
pub struct ValidateBurgersSummary {
    pub max_pre_shock_rel_l2: f64,
    pub max_quadratic_rel_l2: f64,
    pub max_tv_growth_post_shock: f64,
    pub pass: bool,
}

/// Homogeneous (variational-oracle) and quadratic-source
/// (characteristics-oracle) validation runs.
pub fn run_validate_burgers(
    cfg: &ValidateBurgersConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<ValidateBurgersSummary, ExpError> {
    cfg.validate().map_err(ExpError::Config)?;
    let mut dir = RunDir::create(out_dir)?;

    // homogeneous case: sin IC on [0, 2], inviscid
    let g = Grid1D::new(cfg.n, 2.0);
    let solver = BurgersSolver::new(
        g,
        BurgersParams {
            nu: 0.0,
            cfl: cfg.cfl,
            adaptive: true,
            ..Default::default()
        },
        SourceTerm::None,
    );
    let mut u = Field::from_fn(g, |x| (PI * x).sin());
    let mut t = 0.0;
    let shock_time = 1.0 / PI;
    let mut rows = vec![vec![Cell::F(0.0), Cell::F(0.0)]];
    let mut max_pre_shock = 0.0f64;
    let mut max_tv_growth = 0.0f64;
    let records = (cfg.homogeneous_t_end / cfg.record_dt).round() as usize;
    for r in 1..=records {
        let target = r as f64 * cfg.record_dt;
        while t < target - 1e-12 {
            let dt = solver.adaptive_dt(&u).min(target - t);
            let tv_before = u.total_variation();
            u = solver.step(&u, t, dt).map_err(|_| {
                ExpError::UnexpectedBlowup(format!("homogeneous case blew up at t = {t}"))
            })?;
            t += dt;
            if t > shock_time + 0.05 {
                max_tv_growth = max_tv_growth.max(u.total_variation() / tv_before);
            }
        }
        let exact = Field::from_fn(g, |x| oracles::hopf_lax_sin(x, target, 2.0));
        let err = rel_l2(&u, &exact);
        if target <= cfg.pre_shock_t {
            max_pre_shock = max_pre_shock.max(err);
        }
        rows.push(vec![Cell::F(target), Cell::F(err)]);
    }
    dir.csv("homogeneous.csv", &["time", "rel_l2_error"], &rows)?;

    // quadratic-source case on the unit domain
    let gq = Grid1D::new(cfg.n, 1.0);
    let solver_q = BurgersSolver::new(
        gq,
        BurgersParams {
            nu: 0.0,
            cfl: cfg.cfl,
            adaptive: true,
            ..Default::default()
        },
        SourceTerm::QuadraticReaction { beta: cfg.beta },
    );
    let mut uq = Field::from_fn(gq, |x| (2.0 * PI * x).sin());
    let mut tq = 0.0;
    let q_records = 12usize;
    let q_dt = cfg.quadratic_t_end / q_records as f64;
    let mut rows = vec![vec![Cell::F(0.0), Cell::F(0.0)]];
    let mut max_quadratic = 0.0f64;
    for r in 1..=q_records {
        let target = r as f64 * q_dt;
        uq = solver_q.advance_adaptive(&uq, tq, target).map_err(|_| {
            ExpError::UnexpectedBlowup(format!("quadratic-source case blew up near t = {tq}"))
        })?;
        tq = target;
        let mut exact = Vec::with_capacity(cfg.n);
        for j in 0..cfg.n {
            exact.push(
                oracles::quadratic_source(gq.x(j), target, cfg.beta).map_err(|e| {
                    ExpError::UnexpectedBlowup(format!("oracle failed at t = {target}: {e}"))
                })?,
            );
        }
        let exact = Field::new(gq, exact);
        let err = rel_l2(&uq, &exact);
        max_quadratic = max_quadratic.max(err);
        rows.push(vec![Cell::F(target), Cell::F(err)]);
    }
    dir.csv("quadratic_source.csv", &["time", "rel_l2_error"], &rows)?;

    let pass = max_pre_shock < cfg.pre_shock_rel_l2_max
        && max_quadratic < cfg.quadratic_rel_l2_max
        && max_tv_growth < cfg.tv_growth_max;
    let summary = ValidateBurgersSummary {
        max_pre_shock_rel_l2: max_pre_shock,
        max_quadratic_rel_l2: max_quadratic,
        max_tv_growth_post_shock: max_tv_growth,
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("validate-burgers", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!(
            "pre-shock {max_pre_shock:.3e} (max {}), quadratic {max_quadratic:.3e} (max {}), TV growth {max_tv_growth:.6}",
            cfg.pre_shock_rel_l2_max, cfg.quadratic_rel_l2_max
        )));
    }
    Ok(summary)
}

#[derive(Debug, serde::Serialize)]
pub struct ValidateKsSummary {
    pub etd1_orders: Vec<f64>,
    pub etdrk2_orders: Vec<f64>,
    pub linear_exactness_worst: f64,
    pub pass: bool,
}

/// Temporal self-convergence orders of ETD1/ETDRK2 plus exactness on the
/// linear subproblem.
pub fn run_validate_ks(
    cfg: &ValidateKsConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<ValidateKsSummary, ExpError> {
    if cfg.dts.len() < 2 {
        return Err(ExpError::Config("need at least two step sizes".into()));
    }
    let mut dir = RunDir::create(out_dir)?;
    let g = Grid1D::new(cfg.n, 2.0 * PI * cfg.length_factor);
    let u0 = Field::from_fn(g, |x| {
        let w = 2.0 * PI / g.length();
        (w * x).sin() + 0.5 * (2.0 * w * x).cos()
    });

    let smallest = cfg.dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let dt_ref = smallest / cfg.ref_divider as f64;
    let ref_steps = (cfg.t_end / dt_ref).round() as usize;
    let reference = KsSolver::new(g, dt_ref, Scheme::Etdrk2)
        .run(&u0, ref_steps, ref_steps)
        .map_err(|e| ExpError::UnexpectedBlowup(format!("reference run: {e}")))?;
    let u_ref = reference.last_state();

    let mut errs = vec![Vec::new(); 2];
    let mut rows = Vec::new();
    for &dt in &cfg.dts {
        let steps = (cfg.t_end / dt).round() as usize;
        let mut row = vec![Cell::F(dt)];
        for (si, scheme) in [Scheme::Etd1, Scheme::Etdrk2].into_iter().enumerate() {
            let run = KsSolver::new(g, dt, scheme)
                .run(&u0, steps, steps)
                .map_err(|e| ExpError::UnexpectedBlowup(format!("dt={dt}: {e}")))?;
            let err = rel_l2(run.last_state(), u_ref);
            errs[si].push(err);
            row.push(Cell::F(err));
        }
        rows.push(row);
    }
    dir.csv("orders.csv", &["dt", "err_etd1", "err_etdrk2"], &rows)?;

    let orders = |e: &[f64]| -> Vec<f64> {
        e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    };
    let etd1_orders = orders(&errs[0]);
    let etdrk2_orders = orders(&errs[1]);

    // exactness on the linear subproblem
    let lin = KsSolver::new(g, cfg.dts[0], Scheme::Etdrk2).with_nonlinear(false);
    let u_hat = crate::spectral::fft_forward(&u0);
    let stepped = lin.step_spectral_g(u_hat.coeffs(), None);
    let mut worst = 0.0f64;
    for j in 0..cfg.n {
        let exact = u_hat.coeffs()[j].scale((lin.coefficients().lin[j] * cfg.dts[0]).exp());
        let scale = exact.abs().max(1.0);
        worst = worst.max((stepped[j] - exact).abs() / scale);
    }

    let pass = etd1_orders.iter().all(|&o| o >= cfg.etd1_order_min)
        && etdrk2_orders.iter().all(|&o| o >= cfg.etdrk2_order_min)
        && worst < cfg.linear_exactness_tol;
    let summary = ValidateKsSummary {
        etd1_orders,
        etdrk2_orders,
        linear_exactness_worst: worst,
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("validate-ks", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!("{summary:?}")));
    }
    Ok(summary)
}

// -------------------------------------------------------------- noise study

#[derive(Debug, serde::Serialize)]
pub struct NoiseEpsSummary {
    pub eps: f64,
    pub direct_divergence_step: Option<usize>,
    pub direct_last_finite_mse: Option<f64>,
    pub indirect_final_mse: Option<f64>,
    pub indirect_diverged: bool,
}

#[derive(Debug, serde::Serialize)]
pub struct NoiseStudySummary {
    pub burgers: Vec<NoiseEpsSummary>,
    pub ks_direct_median_at_compare: Vec<Option<f64>>,
    pub ks_indirect_median_at_compare: Vec<Option<f64>>,
    pub pass: bool,
}

/// Per-step MSE of a noisy rollout against the clean baseline; `None` once
/// either run has stopped.
fn mse_curve(noisy: &Trajectory, baseline: &Trajectory, steps: usize) -> Vec<Option<f64>> {
    (1..=steps)
        .map(|i| {
            if i < noisy.len() && i < baseline.len() {
                Some(mse_fields(noisy.state(i), baseline.state(i)))
            } else {
                None
            }
        })
        .collect()
}

fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(values[values.len() / 2])
}

/// Gaussian noise injected directly vs indirectly on both systems.
pub fn run_noise_study(
    cfg: &NoiseStudyConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<NoiseStudySummary, ExpError> {
    let mut dir = RunDir::create(out_dir)?;
    let mut events: Vec<Vec<Cell>> = Vec::new();

    // Burgers: homogeneous validation configuration
    let g = Grid1D::new(cfg.burgers_n, cfg.burgers_length);
    let solver = HybridSolver::Burgers(BurgersSolver::new(
        g,
        BurgersParams::default(),
        SourceTerm::None,
    ));
    let w = 2.0 * PI / cfg.burgers_length;
    let u0 = Field::from_fn(g, |x| (w * x).sin());
    let base = rollout(
        &solver,
        &u0,
        cfg.burgers_steps,
        &CorrectorSpec::none(),
        cfg.burgers_dt,
        0,
    );
    if let Some(s) = base.blowup_step {
        return Err(ExpError::UnexpectedBlowup(format!(
            "clean Burgers baseline blew up at step {s}"
        )));
    }

    let mut burgers_summaries = Vec::new();
    for (ei, &eps) in cfg.burgers_eps.iter().enumerate() {
        let stream = RngStream::new(seed, 1000 + ei as u64);
        let mk = |mode| CorrectorSpec {
            source: CorrectorSource::GaussianNoise { eps, stream },
            mode,
        };
        let direct = rollout(
            &solver,
            &u0,
            cfg.burgers_steps,
            &mk(InjectionMode::Direct),
            cfg.burgers_dt,
            0,
        );
        let indirect = rollout(
            &solver,
            &u0,
            cfg.burgers_steps,
            &mk(InjectionMode::Indirect),
            cfg.burgers_dt,
            0,
        );
        let d_curve = mse_curve(&direct.trajectory, &base.trajectory, cfg.burgers_steps);
        let i_curve = mse_curve(&indirect.trajectory, &base.trajectory, cfg.burgers_steps);

        // divergence = blowup or MSE crossing the configured bound
        let mut divergence = direct.blowup_step;
        let mut last_finite = None;
        for (i, v) in d_curve.iter().enumerate() {
            if let Some(m) = v {
                last_finite = Some(*m);
                if *m > cfg.divergence_mse && divergence.is_none() {
                    divergence = Some(i + 1);
                    break;
                }
            }
        }
        if let Some(step) = direct.blowup_step {
            events.push(vec![
                Cell::S("burgers".into()),
                Cell::F(eps),
                Cell::S("direct".into()),
                Cell::Int(0),
                Cell::Int(step as i64),
            ]);
        }
        if let Some(step) = indirect.blowup_step {
            events.push(vec![
                Cell::S("burgers".into()),
                Cell::F(eps),
                Cell::S("indirect".into()),
                Cell::Int(0),
                Cell::Int(step as i64),
            ]);
        }

        let rows: Vec<Vec<Cell>> = (0..cfg.burgers_steps)
            .map(|i| {
                vec![
                    Cell::Int((i + 1) as i64),
                    Cell::F((i + 1) as f64 * cfg.burgers_dt),
                    d_curve[i].map_or(Cell::Missing, Cell::F),
                    i_curve[i].map_or(Cell::Missing, Cell::F),
                ]
            })
            .collect();
        dir.csv(
            &format!("noise_burgers_eps{ei}.csv"),
            &["step", "time", "mse_direct", "mse_indirect"],
            &rows,
        )?;

        burgers_summaries.push(NoiseEpsSummary {
            eps,
            direct_divergence_step: divergence,
            direct_last_finite_mse: last_finite,
            indirect_final_mse: i_curve.last().copied().flatten(),
            indirect_diverged: indirect.blowup_step.is_some(),
        });
    }

    // KS: direct vs indirect across seeds
    let gk = Grid1D::new(cfg.ks_n, 2.0 * PI * cfg.ks_length_factor);
    let ks = HybridSolver::Ks(KsSolver::new(gk, cfg.ks_dt, Scheme::Etdrk2));
    let mut ks_direct_medians = Vec::new();
    let mut ks_indirect_medians = Vec::new();
    for (ei, &eps) in cfg.ks_eps.iter().enumerate() {
        let mut header: Vec<String> = vec!["step".into(), "time".into()];
        for s in 0..cfg.ks_seeds {
            header.push(format!("mse_direct_s{s}"));
        }
        for s in 0..cfg.ks_seeds {
            header.push(format!("mse_indirect_s{s}"));
        }
        let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
        let mut at_compare: Vec<Vec<f64>> = vec![Vec::new(), Vec::new()];
        let mut compare_missing = [false, false];
        for s in 0..cfg.ks_seeds {
            let ic_stream = RngStream::new(seed, 2000 + s as u64);
            let u0 = attractor_state(gk, &ic_stream)
                .map_err(|e| ExpError::UnexpectedBlowup(format!("KS warm-up: {e}")))?;
            let base = rollout(&ks, &u0, cfg.ks_steps, &CorrectorSpec::none(), cfg.ks_dt, 0);
            if let Some(step) = base.blowup_step {
                return Err(ExpError::UnexpectedBlowup(format!(
                    "clean KS baseline blew up at step {step}"
                )));
            }
            let noise = RngStream::new(seed, 3000 + (ei * cfg.ks_seeds + s) as u64);
            for (mi, mode) in [InjectionMode::Direct, InjectionMode::Indirect]
                .into_iter()
                .enumerate()
            {
                let run = rollout(
                    &ks,
                    &u0,
                    cfg.ks_steps,
                    &CorrectorSpec {
                        source: CorrectorSource::GaussianNoise { eps, stream: noise },
                        mode,
                    },
                    cfg.ks_dt,
                    0,
                );
                if let Some(step) = run.blowup_step {
                    events.push(vec![
                        Cell::S("ks".into()),
                        Cell::F(eps),
                        Cell::S(if mi == 0 { "direct" } else { "indirect" }.into()),
                        Cell::Int(s as i64),
                        Cell::Int(step as i64),
                    ]);
                }
                let curve = mse_curve(&run.trajectory, &base.trajectory, cfg.ks_steps);
                match curve.get(cfg.ks_compare_step - 1).copied().flatten() {
                    Some(v) => at_compare[mi].push(v),
                    None => compare_missing[mi] = true,
                }
                columns.push(curve);
            }
        }
        // column order: all direct seeds then all indirect seeds
        let rows: Vec<Vec<Cell>> = (0..cfg.ks_steps)
            .map(|i| {
                let mut row = vec![
                    Cell::Int((i + 1) as i64),
                    Cell::F((i + 1) as f64 * cfg.ks_dt),
                ];
                for s in 0..cfg.ks_seeds {
                    row.push(columns[2 * s][i].map_or(Cell::Missing, Cell::F));
                }
                for s in 0..cfg.ks_seeds {
                    row.push(columns[2 * s + 1][i].map_or(Cell::Missing, Cell::F));
                }
                row
            })
            .collect();
        let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        dir.csv(&format!("noise_ks_eps{ei}.csv"), &header_refs, &rows)?;

        // a seed whose direct run died before the comparison step counts as
        // unbounded error, so the median stays comparable
        ks_direct_medians.push(if compare_missing[0] {
            None
        } else {
            median(&mut at_compare[0])
        });
        ks_indirect_medians.push(if compare_missing[1] {
            None
        } else {
            median(&mut at_compare[1])
        });
    }

    dir.csv(
        "events.csv",
        &["system", "eps", "mode", "seed", "blowup_step"],
        &events,
    )?;

    // pass criteria: largest-eps direct run diverges quickly, indirect stays
    // finite with a 10x margin; KS indirect never above direct at the
    // comparison step
    let largest = burgers_summaries
        .iter()
        .max_by(|a, b| a.eps.partial_cmp(&b.eps).unwrap())
        .unwrap();
    let burgers_ok = largest
        .direct_divergence_step
        .is_some_and(|s| s <= cfg.burgers_divergence_steps)
        && !largest.indirect_diverged
        && match (largest.indirect_final_mse, largest.direct_last_finite_mse) {
            (Some(ind), Some(dir_mse)) => ind * 10.0 <= dir_mse.max(cfg.divergence_mse),
            _ => false,
        };
    let ks_ok = ks_direct_medians
        .iter()
        .zip(&ks_indirect_medians)
        .all(|(d, i)| match (d, i) {
            (Some(d), Some(i)) => i <= d,
            (None, Some(_)) => true, // direct diverged, indirect survived
            _ => false,
        });
    let pass = burgers_ok && ks_ok;

    let summary = NoiseStudySummary {
        burgers: burgers_summaries,
        ks_direct_median_at_compare: ks_direct_medians,
        ks_indirect_median_at_compare: ks_indirect_medians,
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("noise-study", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!(
            "noise-study split failed: burgers_ok={burgers_ok} ks_ok={ks_ok}"
        )));
    }
    Ok(summary)
}

// ---------------------------------------------------------------- rk sweep

#[derive(Debug, serde::Serialize)]
pub struct RkSweepSummary {
    pub diffusion_slope: f64,
    pub diffusion_bound_factor_worst: f64,
    pub burgers_proportionality_factor: f64,
    pub all_ratios_above_one: bool,
    pub pass: bool,
}

/// Empirical error-dominance ratios across step sizes, against the
/// closed-form bound.
pub fn run_rk_sweep(
    cfg: &RkSweepConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<RkSweepSummary, ExpError> {
    if cfg.diffusion_dts.len() < 2 || cfg.burgers_dts.len() < 2 {
        return Err(ExpError::Config("need at least two step sizes".into()));
    }
    let mut dir = RunDir::create(out_dir)?;
    let blow = |e| ExpError::UnexpectedBlowup(format!("rk rollout blew up: {e}"));

    // diffusion toy with its analytic Lipschitz scale estimated on samples
    let g = Grid1D::new(cfg.diffusion_n, 2.0 * PI);
    let diffusion = DiffusionSolver::new(g, cfg.diffusion_nu);
    let op = RhsOperator::Diffusion(diffusion.clone());
    let u0 = crate::rng::gaussian_field(g, 1.0, &RngStream::new(seed, 4000), 0);
    let l_est = lipschitz_estimate(&op, &[u0.clone()]);
    let solver = HybridSolver::Diffusion(diffusion);

    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut worst_factor = 0.0f64;
    let mut all_above_one = true;
    for (i, &dt) in cfg.diffusion_dts.iter().enumerate() {
        let r = rk_empirical(&solver, &u0, cfg.eps, dt, cfg.k, RngStream::new(seed, 4100 + i as u64))
            .map_err(blow)?;
        let bound = rk_bound(dt, l_est);
        worst_factor = worst_factor.max((bound / r).max(r / bound));
        all_above_one &= r > 1.0;
        ratios.push((dt, r));
        rows.push(vec![Cell::F(dt), Cell::F(r), Cell::F(bound)]);
    }
    dir.csv("rk_diffusion.csv", &["dt", "rk_empirical", "rk_bound"], &rows)?;

    // least-squares slope of ln R against ln dt
    let xs: Vec<f64> = ratios.iter().map(|(dt, _)| dt.ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|(_, r)| r.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();

    // Burgers sweep: ratio should scale like 1/dt
    let gb = Grid1D::new(cfg.burgers_n, cfg.burgers_length);
    let burgers = HybridSolver::Burgers(BurgersSolver::new(
        gb,
        BurgersParams {
            nu: cfg.burgers_nu,
            ..Default::default()
        },
        SourceTerm::None,
    ));
    let w = 2.0 * PI / cfg.burgers_length;
    let ub = Field::from_fn(gb, |x| (w * x).sin() + 0.3 * (2.0 * w * x).cos());
    let mut rows = Vec::new();
    let mut burgers_ratios = Vec::new();
    for (i, &dt) in cfg.burgers_dts.iter().enumerate() {
        let r = rk_empirical(&burgers, &ub, cfg.eps, dt, cfg.k, RngStream::new(seed, 4200 + i as u64))
            .map_err(blow)?;
        all_above_one &= r > 1.0;
        burgers_ratios.push((dt, r));
        rows.push(vec![Cell::F(dt), Cell::F(r)]);
    }
    dir.csv("rk_burgers.csv", &["dt", "rk_empirical"], &rows)?;
    // R(dt1) dt1 / (R(dt2) dt2) within a factor two of unity
    let (dt1, r1) = burgers_ratios[0];
    let (dt2, r2) = *burgers_ratios.last().unwrap();
    let prop = (r1 * dt1) / (r2 * dt2);
    let prop_factor = prop.max(1.0 / prop);

    let pass = all_above_one
        && slope >= cfg.slope_min
        && slope <= cfg.slope_max
        && worst_factor < cfg.bound_factor_max
        && prop_factor < 2.0;
    let summary = RkSweepSummary {
        diffusion_slope: slope,
        diffusion_bound_factor_worst: worst_factor,
        burgers_proportionality_factor: prop_factor,
        all_ratios_above_one: all_above_one,
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("rk-sweep", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!("{summary:?}")));
    }
    Ok(summary)
}

// ---------------------------------------------------------------- lyapunov

#[derive(Debug, serde::Serialize)]
pub struct LyapunovSummary {
    pub ks_lambda_max: f64,
    pub ks_lipschitz: f64,
    pub diffusion_lambda_max: f64,
    pub pass: bool,
}

/// Largest Lyapunov exponents (KS chaotic, diffusion contracting) and the
/// dominating Lipschitz bound.
pub fn run_lyapunov(
    cfg: &LyapunovConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<LyapunovSummary, ExpError> {
    let mut dir = RunDir::create(out_dir)?;
    let blow = |e| ExpError::UnexpectedBlowup(format!("lyapunov rollout: {e}"));

    let g = Grid1D::new(cfg.ks_n, 2.0 * PI * cfg.ks_length_factor);
    let ks = KsSolver::new(g, cfg.ks_dt, Scheme::Etdrk2);
    let solver = HybridSolver::Ks(ks.clone());
    let u0 = attractor_state(g, &RngStream::new(seed, 5000)).map_err(blow)?;
    let ks_lambda = lyapunov_max(
        &solver,
        &u0,
        cfg.ks_dt,
        cfg.ks_steps,
        cfg.renorm_every,
        &RngStream::new(seed, 5001),
    )
    .map_err(blow)?;

    // attractor samples for the Lipschitz estimate
    let mut samples = Vec::with_capacity(cfg.lipschitz_samples);
    let mut u = u0.clone();
    for _ in 0..cfg.lipschitz_samples {
        for _ in 0..cfg.sample_spacing_steps {
            u = ks.step(&u).map_err(blow)?;
        }
        samples.push(u.clone());
    }
    let ks_lipschitz = lipschitz_estimate(&RhsOperator::KsPhysical(ks), &samples);

    let gd = Grid1D::new(cfg.diffusion_n, 2.0 * PI);
    let diffusion = HybridSolver::Diffusion(DiffusionSolver::new(gd, cfg.diffusion_nu));
    let ud = crate::rng::gaussian_field(gd, 1.0, &RngStream::new(seed, 5002), 0);
    let diffusion_lambda = lyapunov_max(
        &diffusion,
        &ud,
        cfg.diffusion_dt,
        cfg.diffusion_steps,
        cfg.renorm_every.min(cfg.diffusion_steps),
        &RngStream::new(seed, 5003),
    )
    .map_err(blow)?;

    dir.csv(
        "lyapunov.csv",
        &["system", "lambda_max", "lipschitz"],
        &[
            vec![
                Cell::S("ks".into()),
                Cell::F(ks_lambda),
                Cell::F(ks_lipschitz),
            ],
            vec![
                Cell::S("diffusion".into()),
                Cell::F(diffusion_lambda),
                Cell::Missing,
            ],
        ],
    )?;

    let pass = ks_lambda > 0.0 && ks_lipschitz >= ks_lambda && diffusion_lambda < 0.0;
    let summary = LyapunovSummary {
        ks_lambda_max: ks_lambda,
        ks_lipschitz,
        diffusion_lambda_max: diffusion_lambda,
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("lyapunov", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!("{summary:?}")));
    }
    Ok(summary)
}

// ---------------------------------------------------------------- training

fn build_dataset(cfg: &TrainExpConfig, stream: &RngStream) -> Result<Vec<TrainItem>, ExpError> {
    match cfg.system {
        TrainSystem::Burgers => make_dataset_burgers(
            cfg.n_fine,
            cfg.n_coarse,
            cfg.length,
            cfg.nu,
            cfg.dt,
            cfg.traj_steps,
            cfg.n_traj,
            stream,
        )
        .map_err(|e| ExpError::UnexpectedBlowup(format!("reference generation: {e}"))),
        TrainSystem::Ks2 => {
            let g = Grid1D::new(cfg.n_coarse, 2.0 * PI * cfg.ks_length_factor);
            make_dataset_ks(
                g,
                cfg.dt / cfg.ks_stride as f64,
                cfg.ks_stride,
                cfg.ks_scheme,
                cfg.traj_steps,
                cfg.n_traj,
                stream,
            )
            .map_err(|e| ExpError::UnexpectedBlowup(format!("reference generation: {e}")))
        }
    }
}

#[derive(Debug, serde::Serialize)]
pub struct TrainSummary {
    pub iterations: usize,
    pub param_count: usize,
    pub first_loss: f64,
    pub final_loss: f64,
    pub best_validation: Option<f64>,
    pub blowup_windows: usize,
}

/// Trains the corrector on freshly generated references and writes the
/// checkpoint plus loss curves.
pub fn run_train(cfg: &TrainExpConfig, out_dir: &Path, seed: u64) -> Result<TrainSummary, ExpError> {
    let mut dir = RunDir::create(out_dir)?;
    let mut cfg = cfg.clone();
    cfg.train.seed = seed;
    let items = build_dataset(&cfg, &RngStream::new(seed, 6000))?;
    let spec = NetSpec::conv_stack(&cfg.hidden, cfg.kernel);
    let report = train(&cfg.train, &spec, &items, cfg.mode, cfg.dt).map_err(|e| {
        ExpError::UnexpectedBlowup(format!("training diverged: {e}"))
    })?;

    let rows: Vec<Vec<Cell>> = report
        .loss_history
        .iter()
        .enumerate()
        .map(|(i, l)| vec![Cell::Int(i as i64 + 1), Cell::F(*l)])
        .collect();
    dir.csv("loss_history.csv", &["iteration", "train_loss"], &rows)?;
    let rows: Vec<Vec<Cell>> = report
        .val_history
        .iter()
        .map(|(i, l)| vec![Cell::Int(*i as i64), Cell::F(*l)])
        .collect();
    dir.csv("val_history.csv", &["iteration", "val_loss"], &rows)?;

    let ckpt = dir.file(&cfg.checkpoint);
    report.params.save(&ckpt)?;

    let summary = TrainSummary {
        iterations: report.iterations,
        param_count: spec.param_count(),
        first_loss: report.loss_history.first().copied().unwrap_or(f64::NAN),
        final_loss: report.loss_history.last().copied().unwrap_or(f64::NAN),
        best_validation: report.val_history.iter().map(|(_, v)| *v).fold(None, |m, v| {
            Some(m.map_or(v, |m: f64| m.min(v)))
        }),
        blowup_windows: report.blowup_windows,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("train", seed, &cfg)?;
    Ok(summary)
}

#[derive(Debug, serde::Serialize)]
pub struct EvaluateModeSummary {
    pub mode: InjectionMode,
    pub mean_mse: f64,
    pub final_mse: f64,
    pub blowup_step: Option<usize>,
}

#[derive(Debug, serde::Serialize)]
pub struct EvaluateSummary {
    pub modes: Vec<EvaluateModeSummary>,
}

/// Rolls the (optionally corrected) coarse solver against a held-out
/// reference and emits per-step MSE and correlation curves.
pub fn run_evaluate(cfg: &EvaluateConfig, out_dir: &Path, seed: u64) -> Result<EvaluateSummary, ExpError> {
    let mut dir = RunDir::create(out_dir)?;
    if cfg.steps + cfg.task.train.unroll_m >= cfg.task.traj_steps {
        return Err(ExpError::Config(format!(
            "steps {} exceeds held-out trajectory length {}",
            cfg.steps, cfg.task.traj_steps
        )));
    }
    let heldout_stream = RngStream::new(seed, 6000).substream(cfg.heldout_offset);
    let mut task = cfg.task.clone();
    task.n_traj = 1;
    let items = build_dataset(&task, &heldout_stream)?;
    let item = &items[0];

    let source = if cfg.checkpoint.is_empty() {
        CorrectorSource::Zero
    } else {
        let params = NetParams::load(Path::new(&cfg.checkpoint))
            .map_err(|e| ExpError::Config(format!("checkpoint {}: {e}", cfg.checkpoint)))?;
        CorrectorSource::Neural(params)
    };

    let mut summaries = Vec::new();
    for &mode in &cfg.modes {
        let spec = CorrectorSpec {
            source: source.clone(),
            mode,
        };
        let run = rollout(
            &item.solver,
            item.reference.state(0),
            cfg.steps,
            &spec,
            cfg.task.dt,
            0,
        );
        let mut rows = Vec::new();
        let mut acc = 0.0;
        let mut count = 0usize;
        let mut final_mse = f64::NAN;
        for i in 1..=cfg.steps {
            let (mse, r2) = if i < run.trajectory.len() {
                let m = mse_fields(run.trajectory.state(i), item.reference.state(i));
                let r = pearson_r2(run.trajectory.state(i), item.reference.state(i));
                acc += m;
                count += 1;
                final_mse = m;
                (Some(m), r)
            } else {
                (None, None)
            };
            rows.push(vec![
                Cell::Int(i as i64),
                Cell::F(i as f64 * cfg.task.dt),
                mse.map_or(Cell::Missing, Cell::F),
                r2.map_or(Cell::Missing, Cell::F),
            ]);
        }
        let name = format!("eval_{}.csv", mode_tag(mode));
        dir.csv(&name, &["step", "time", "mse", "r2"], &rows)?;
        summaries.push(EvaluateModeSummary {
            mode,
            mean_mse: acc / count.max(1) as f64,
            final_mse,
            blowup_step: run.blowup_step,
        });
    }
    let summary = EvaluateSummary { modes: summaries };
    dir.json("summary.json", &summary)?;
    dir.manifest("evaluate", seed, cfg)?;
    Ok(summary)
}

fn mode_tag(mode: InjectionMode) -> &'static str {
    match mode {
        InjectionMode::NoModel => "nomodel",
        InjectionMode::Direct => "direct",
        InjectionMode::PreCorrect => "precorrect",
        InjectionMode::Scaled => "scaled",
        InjectionMode::Indirect => "indirect",
    }
}

// ---------------------------------------------------------------- blowup

#[derive(Debug, serde::Serialize)]
pub struct BlowupKs2Summary {
    pub nomodel_survival: Vec<usize>,
    pub corrected_survival: Option<Vec<usize>>,
    pub pass: bool,
}

/// Coarse-step KS survival study: how many 0.5 s first-order steps before
/// blowup, bare solver vs corrected solver.
pub fn run_blowup_ks2(
    cfg: &BlowupKs2Config,
    out_dir: &Path,
    seed: u64,
) -> Result<BlowupKs2Summary, ExpError> {
    let mut dir = RunDir::create(out_dir)?;
    let g = Grid1D::new(cfg.n, 2.0 * PI * cfg.length_factor);
    let solver = HybridSolver::Ks(KsSolver::new(g, cfg.dt, Scheme::Etd1));

    let corrector = if cfg.checkpoint.is_empty() {
        None
    } else {
        Some(
            NetParams::load(Path::new(&cfg.checkpoint))
                .map_err(|e| ExpError::Config(format!("checkpoint {}: {e}", cfg.checkpoint)))?,
        )
    };

    let mut nomodel = Vec::new();
    let mut corrected: Vec<usize> = Vec::new();
    let mut rows = Vec::new();
    for s in 0..cfg.seeds {
        let u0 = attractor_state(g, &RngStream::new(seed, 7300 + s as u64))
            .map_err(|e| ExpError::UnexpectedBlowup(format!("warm-up: {e}")))?;
        let bare = rollout(&solver, &u0, cfg.steps, &CorrectorSpec::none(), cfg.dt, 0);
        let bare_steps = bare.blowup_step.map_or(cfg.steps, |b| b - 1);
        nomodel.push(bare_steps);
        let mut row = vec![Cell::Int(s as i64), Cell::Int(bare_steps as i64)];
        if let Some(p) = &corrector {
            let run = rollout(
                &solver,
                &u0,
                cfg.steps,
                &CorrectorSpec {
                    source: CorrectorSource::Neural(p.clone()),
                    mode: InjectionMode::Indirect,
                },
                cfg.dt,
                0,
            );
            let surv = run.blowup_step.map_or(cfg.steps, |b| b - 1);
            corrected.push(surv);
            row.push(Cell::Int(surv as i64));
        } else {
            row.push(Cell::Missing);
        }
        rows.push(row);
    }
    dir.csv(
        "survival.csv",
        &["seed", "nomodel_steps", "corrected_steps"],
        &rows,
    )?;

    let nomodel_ok = nomodel.iter().all(|&s| s < cfg.survival_max);
    let corrected_ok = match &corrector {
        None => true,
        Some(_) => corrected
            .iter()
            .zip(&nomodel)
            .all(|(c, n)| c > n),
    };
    let pass = nomodel_ok && corrected_ok;
    let summary = BlowupKs2Summary {
        nomodel_survival: nomodel,
        corrected_survival: corrector.as_ref().map(|_| corrected),
        pass,
    };
    dir.json("summary.json", &summary)?;
    dir.manifest("blowup-ks2", seed, cfg)?;
    if !pass {
        return Err(ExpError::Threshold(format!("{summary:?}")));
    }
    Ok(summary)
}
