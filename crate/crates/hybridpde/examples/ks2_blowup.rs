//! Coarse-step KS survival: at dt = 0.5 with the first-order scheme the
//! bare solver typically blows up within tens of steps; a quickly trained
//! indirect corrector keeps it alive longer.
//!
//! ```text
//! cargo run --release --example ks2_blowup
//! ```

use hybridpde::correction::{rollout, CorrectorSource, CorrectorSpec, HybridSolver, InjectionMode};
use hybridpde::grid::Grid1D;
use hybridpde::ks::{attractor_state, KsSolver, Scheme};
use hybridpde::net::NetSpec;
use hybridpde::rng::RngStream;
use hybridpde::train::{make_dataset_ks, train, TrainConfig};
use std::f64::consts::PI;

fn main() {
    let g = Grid1D::new(64, 21.6 * PI);
    print!("building strided ETDRK2 references and training (about 10 s) ... ");
    let items = make_dataset_ks(g, 0.01, 50, Scheme::Etd1, 60, 4, &RngStream::new(0, 6000)).unwrap();
    let cfg = TrainConfig {
        lr: 3e-3,
        unroll_m: 2,
        batch: 4,
        epochs: 24,
        staged: false,
        max_iters: Some(1600),
        seed: 0,
        ..Default::default()
    };
    let report = train(&cfg, &NetSpec::conv_stack(&[12, 12], 5), &items, InjectionMode::Indirect, 0.5).unwrap();
    println!("done ({} iterations)", report.iterations);

    let solver = HybridSolver::Ks(KsSolver::new(g, 0.5, Scheme::Etd1));
    println!("{:>6} {:>14} {:>14}", "seed", "bare survival", "corrected");
    for s in 0..5u64 {
        let u0 = attractor_state(g, &RngStream::new(0, 7300 + s)).unwrap();
        let survival = |spec: &CorrectorSpec| {
            let run = rollout(&solver, &u0, 100, spec, 0.5, 0);
            run.blowup_step.map_or(100, |b| b - 1)
        };
        let bare = survival(&CorrectorSpec::none());
        let corrected = survival(&CorrectorSpec {
            source: CorrectorSource::Neural(report.params.clone()),
            mode: InjectionMode::Indirect,
        });
        println!("{s:>6} {bare:>14} {corrected:>14}");
    }
    println!("(100 = completed the full 50 s horizon)");
}
