//! Largest Lyapunov exponent by the two-trajectory method, and the
//! Lipschitz bound that must dominate it: positive for chaotic KS, negative
//! for plain diffusion.
//!
//! ```text
//! cargo run --release --example lyapunov
//! ```

use hybridpde::correction::{DiffusionSolver, HybridSolver};
use hybridpde::grid::Grid1D;
use hybridpde::ks::{attractor_state, KsSolver, Scheme};
use hybridpde::perturbation::{lipschitz_estimate, lyapunov_max, RhsOperator};
use hybridpde::rng::{gaussian_field, RngStream};
use std::f64::consts::PI;

fn main() {
    let g = Grid1D::new(64, 2.0 * PI * 6.4);
    let ks = KsSolver::new(g, 0.01, Scheme::Etdrk2);
    let u0 = attractor_state(g, &RngStream::new(11, 0)).unwrap();
    let solver = HybridSolver::Ks(ks.clone());

    print!("estimating KS lambda_max over t = 200 ... ");
    let lam = lyapunov_max(&solver, &u0, 0.01, 20_000, 20, &RngStream::new(12, 0)).unwrap();
    println!("{lam:.4}");

    let mut samples = Vec::new();
    let mut u = u0;
    for _ in 0..3 {
        for _ in 0..50 {
            u = ks.step(&u).unwrap();
        }
        samples.push(u.clone());
    }
    let l = lipschitz_estimate(&RhsOperator::KsPhysical(ks), &samples);
    println!("KS Lipschitz bound over attractor samples: {l:.1} (>= lambda_max: {})", l >= lam);

    let gd = Grid1D::new(64, 2.0 * PI);
    let diffusion = HybridSolver::Diffusion(DiffusionSolver::new(gd, 0.24));
    let ud = gaussian_field(gd, 1.0, &RngStream::new(13, 0), 0);
    let lam_d = lyapunov_max(&diffusion, &ud, 0.005, 2000, 10, &RngStream::new(14, 0)).unwrap();
    println!("diffusion lambda_max: {lam_d:.3} (contracting)");
}
