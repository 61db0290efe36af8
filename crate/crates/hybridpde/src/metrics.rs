//! Trajectory comparison metrics: per-step spatial MSE and squared Pearson
//! correlation.

use crate::error::SolverError;
use crate::grid::{Field, Trajectory};

/// Spatial mean squared error between two fields on the same grid.
pub fn mse_fields(a: &Field, b: &Field) -> f64 {
    assert_eq!(a.grid(), b.grid());
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64
}

fn check_aligned(pred: &Trajectory, reference: &Trajectory) -> Result<(), SolverError> {
    if pred.len() != reference.len() {
        return Err(SolverError::LengthMismatch {
            left: pred.len(),
            right: reference.len(),
        });
    }
    assert_eq!(pred.grid(), reference.grid(), "grids differ");
    for (a, b) in pred.times().iter().zip(reference.times()) {
        assert!(
            (a - b).abs() <= 1e-9 * (1.0 + b.abs()),
            "trajectory times not aligned: {a} vs {b}"
        );
    }
    Ok(())
}

/// Per-step spatial MSE plus its trajectory mean.
pub fn metric_mse(pred: &Trajectory, reference: &Trajectory) -> Result<(Vec<f64>, f64), SolverError> {
    check_aligned(pred, reference)?;
    let per_step: Vec<f64> = pred
        .states()
        .iter()
        .zip(reference.states())
        .map(|(a, b)| mse_fields(a, b))
        .collect();
    let mean = per_step.iter().sum::<f64>() / per_step.len() as f64;
    Ok((per_step, mean))
}

/// Squared Pearson correlation between two fields; `None` when either field
/// is spatially constant (correlation undefined).
pub fn pearson_r2(a: &Field, b: &Field) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.mean();
    let mb = b.mean();
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    let scale = (a.max_abs().max(b.max_abs())).max(1e-300);
    if va <= 1e-28 * scale * scale * n || vb <= 1e-28 * scale * scale * n {
        return None;
    }
    let r = cov / (va.sqrt() * vb.sqrt());
    Some(r * r)
}

/// Per-step squared Pearson correlation; degenerate (constant-reference)
/// frames are reported as missing values.
pub fn metric_r2(
    pred: &Trajectory,
    reference: &Trajectory,
) -> Result<Vec<Option<f64>>, SolverError> {
    check_aligned(pred, reference)?;
    Ok(pred
        .states()
        .iter()
        .zip(reference.states())
        .map(|(a, b)| pearson_r2(a, b))
        .collect())
}
