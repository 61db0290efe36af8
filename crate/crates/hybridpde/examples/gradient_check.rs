//! Reverse-mode gradients through unrolled hybrid solver steps, verified
//! against central finite differences coordinate by coordinate.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use hybridpde::burgers::{BurgersParams, BurgersSolver, SourceTerm};
use hybridpde::correction::{rollout, CorrectorSpec, HybridSolver, InjectionMode};
use hybridpde::grid::{Field, Grid1D};
use hybridpde::net::{NetParams, NetSpec};
use hybridpde::rng::RngStream;
use hybridpde::train::{grad_theta, unrolled_loss};
use std::f64::consts::PI;

fn main() {
    // the split speed is pinned so the finite-difference oracle sees the
    // same function the tape differentiates (max|u| is deliberately not
    // differentiated)
    let solver = HybridSolver::Burgers(BurgersSolver::new(
        Grid1D::new(16, 4.0),
        BurgersParams {
            nu: 0.05,
            alpha_fixed: Some(2.0),
            ..Default::default()
        },
        SourceTerm::None,
    ));
    let dt = 1e-3;
    let g = solver.grid();
    let u0 = Field::from_fn(g, |x| (2.0 * PI * x / 4.0).sin());
    let reference = rollout(&solver, &u0, 3, &CorrectorSpec::none(), dt, 0).trajectory;
    let params = NetParams::init(NetSpec::conv_stack(&[6], 3), &RngStream::new(2, 0));
    let wd = 1e-7;

    for mode in [InjectionMode::Direct, InjectionMode::Indirect] {
        let (loss, grad, _) = grad_theta(&params, &solver, mode, dt, reference.states(), 0.0, wd);
        let mut worst = 0.0f64;
        for i in 0..params.theta.len() {
            let h = 1e-6;
            let mut p = params.clone();
            p.theta[i] += h;
            let (lp, _) = unrolled_loss(&p, &solver, mode, dt, reference.states(), 0.0, wd);
            p.theta[i] -= 2.0 * h;
            let (lm, _) = unrolled_loss(&p, &solver, mode, dt, reference.states(), 0.0, wd);
            let fd = (lp - lm) / (2.0 * h);
            worst = worst.max((grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6));
        }
        println!(
            "{mode:?}: loss {loss:.3e}, {} coordinates, worst relative gap vs finite differences {worst:.2e}",
            params.theta.len()
        );
    }
}
