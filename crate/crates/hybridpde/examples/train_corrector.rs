//! Short corrector training on the downsampled forced-Burgers task, then a
//! held-out rollout comparison against the bare coarse solver.
//!
//! ```text
//! cargo run --release --example train_corrector
//! ```
//!
//! Matches the desk-scale run behind `expcli train --system burgers`;
//! takes roughly 15-20 seconds. Stopping much earlier can leave the
//! corrector in a state that helps one-step error but hurts long rollouts.

use hybridpde::correction::{rollout, CorrectorSource, CorrectorSpec, InjectionMode};
use hybridpde::metrics::mse_fields;
use hybridpde::net::NetSpec;
use hybridpde::rng::RngStream;
use hybridpde::train::*;

fn main() {
    print!("generating references (512 -> 64, forced, nu = 0.2) ... ");
    let items =
        make_dataset_burgers(512, 64, 16.0, 0.2, 1e-3, 600, 3, &RngStream::new(0, 6000)).unwrap();
    println!("{} trajectories", items.len());

    let cfg = TrainConfig {
        lr: 1e-3,
        weight_decay: 1e-13,
        unroll_m: 3,
        batch: 4,
        epochs: 4,
        max_iters: Some(2000),
        seed: 0,
        ..Default::default()
    };
    let spec = NetSpec::conv_stack(&[12, 12], 5);
    println!("training {} parameters (up to 2000 iterations) ...", spec.param_count());
    let report = train(&cfg, &spec, &items, InjectionMode::Indirect, 1e-3).unwrap();
    println!(
        "loss {:.3e} -> {:.3e} over {} iterations",
        report.loss_history.first().unwrap(),
        report.loss_history.last().unwrap(),
        report.iterations
    );

    // held-out comparison
    let heldout = RngStream::new(0, 6000).substream(10_000);
    let eval = make_dataset_burgers(512, 64, 16.0, 0.2, 1e-3, 600, 1, &heldout).unwrap();
    let item = &eval[0];
    for (name, spec) in [
        ("bare solver ", CorrectorSpec::none()),
        (
            "trained     ",
            CorrectorSpec {
                source: CorrectorSource::Neural(report.params.clone()),
                mode: InjectionMode::Indirect,
            },
        ),
    ] {
        let run = rollout(&item.solver, item.reference.state(0), 500, &spec, 1e-3, 0);
        let mse = mse_fields(run.trajectory.state(500), item.reference.state(500));
        println!("{name} 500-step held-out MSE: {mse:.3e}");
    }
}
