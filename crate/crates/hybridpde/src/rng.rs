//! Reproducible random streams.
//!
//! Draws are keyed by `(seed, stream, draw)`: a splitmix64 chain turns the
//! triple into a ChaCha8 key, and samples are produced with fixed-consumption
//! Box-Muller (no rejection), so any draw can be regenerated independently of
//! call order. This is what makes noise injected at step `k` of a rollout
//! identical whether the rollout ran from step 0 or resumed at step `k`.
//!
//! The generator chain (splitmix64 -> ChaCha8 -> Box-Muller) is part of the
//! crate's determinism contract; changing it invalidates frozen test vectors.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, Grid1D};

use std::f64::consts::PI;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A named random stream: `(seed, stream id)` reproduce the same draws
/// bit-exactly across runs and platforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        RngStream { seed, stream }
    }

    /// Derives an independent child stream.
    pub fn substream(&self, id: u64) -> RngStream {
        let mut st = self.seed;
        let mut mixed = splitmix64(&mut st) ^ self.stream.rotate_left(32) ^ id;
        RngStream {
            seed: self.seed,
            stream: splitmix64(&mut mixed),
        }
    }

    /// Generator for draw index `draw` within this stream.
    pub fn rng_at(&self, draw: u64) -> ChaCha8Rng {
        let mut st = self.seed;
        let a = splitmix64(&mut st);
        let mut st = a ^ self.stream;
        let b = splitmix64(&mut st);
        let mut st = b ^ draw;
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut st).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Uniform in `[0, 1)` with 53-bit resolution.
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform in `[a, b)`.
pub fn uniform(rng: &mut impl RngCore, a: f64, b: f64) -> f64 {
    a + (b - a) * uniform01(rng)
}

/// Uniform integer in `[0, k)`.
pub fn uniform_index(rng: &mut impl RngCore, k: usize) -> usize {
    (rng.next_u64() % k as u64) as usize
}

/// Standard normals via Box-Muller. Consumes exactly two `u64` per pair.
pub fn standard_normals(rng: &mut impl RngCore, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // u1 in (0, 1] so the logarithm is finite
        let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0);
        let u2 = uniform01(rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        out.push(r * c);
        if out.len() < n {
            out.push(r * s);
        }
    }
    out
}

/// I.i.d. zero-mean Gaussian field with standard deviation `eps`, keyed by
/// `(stream, draw)`.
pub fn gaussian_field(grid: Grid1D, eps: f64, stream: &RngStream, draw: u64) -> Field {
    assert!(eps >= 0.0, "noise level must be non-negative");
    if eps == 0.0 {
        return Field::zeros(grid);
    }
    let mut rng = stream.rng_at(draw);
    let values = standard_normals(&mut rng, grid.n())
        .into_iter()
        .map(|z| eps * z)
        .collect();
    Field::new(grid, values)
}
