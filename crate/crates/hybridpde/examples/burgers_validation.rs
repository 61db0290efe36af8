//! Burgers solver against its two analytic oracles: the variational
//! (Hopf-Lax) entropy solution of the homogeneous equation and the
//! method-of-characteristics solution with a quadratic source.
//!
//! ```text
//! cargo run --release --example burgers_validation
//! ```

use hybridpde::burgers::{oracles, BurgersParams, BurgersSolver, SourceTerm};
use hybridpde::grid::{Field, Grid1D};
use std::f64::consts::PI;

fn main() {
    // homogeneous case: sin initial condition on [0, 2], shock at t = 1/pi
    let g = Grid1D::new(512, 2.0);
    let solver = BurgersSolver::new(
        g,
        BurgersParams {
            cfl: 0.15,
            adaptive: true,
            ..Default::default()
        },
        SourceTerm::None,
    );
    let mut u = Field::from_fn(g, |x| (PI * x).sin());
    let mut t = 0.0;
    println!("homogeneous Burgers vs entropy solution (n = 512):");
    println!("{:>6} {:>12} {:>10}", "time", "rel L2 err", "TV");
    for k in 1..=8 {
        let target = 0.25 * k as f64;
        u = solver.advance_adaptive(&u, t, target).unwrap();
        t = target;
        let exact = Field::from_fn(g, |x| oracles::hopf_lax_sin(x, t, 2.0));
        let err = u.sub(&exact).norm_l2() / exact.norm_l2();
        println!("{t:>6.2} {err:>12.3e} {:>10.4}", u.total_variation());
    }

    // quadratic source: u_t + u u_x = -2 u^2 on the unit domain
    let gq = Grid1D::new(512, 1.0);
    let solver = BurgersSolver::new(
        gq,
        BurgersParams {
            cfl: 0.15,
            adaptive: true,
            ..Default::default()
        },
        SourceTerm::QuadraticReaction { beta: -2.0 },
    );
    let mut u = Field::from_fn(gq, |x| (2.0 * PI * x).sin());
    let mut t = 0.0;
    println!("\nquadratic-source Burgers vs characteristics oracle:");
    for k in 1..=3 {
        let target = 0.05 * k as f64;
        u = solver.advance_adaptive(&u, t, target).unwrap();
        t = target;
        let exact = Field::new(
            gq,
            (0..512)
                .map(|j| oracles::quadratic_source(gq.x(j), t, -2.0).unwrap())
                .collect(),
        );
        let err = u.sub(&exact).norm_l2() / exact.norm_l2();
        println!("  t = {t:.2}: rel L2 error {err:.3e}");
    }
}
