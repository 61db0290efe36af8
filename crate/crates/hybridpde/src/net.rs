//! Small periodic convolutional corrector.
//!
//! Stacked 1D convolutions with circular padding, odd kernels in true
//! convolution orientation (kernel `(1, 0, -1)/(2 dx)` yields the central
//! first derivative), ReLU or identity activations, and a single output
//! channel. Parameters live in one flat vector so they can be swapped for
//! tape variables during training.

use crate::error::SolverError;
use crate::grid::Field;
use crate::rng::{standard_normals, RngStream};
use crate::scalar::Scalar;

use std::io::{Read, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LayerSpec {
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
    pub relu: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetSpec {
    layers: Vec<LayerSpec>,
}

impl NetSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Result<NetSpec, SolverError> {
        if layers.is_empty() {
            return Err(SolverError::ShapeMismatch("no layers".into()));
        }
        for w in layers.windows(2) {
            if w[0].c_out != w[1].c_in {
                return Err(SolverError::ShapeMismatch(format!(
                    "channel chain broken: {} -> {}",
                    w[0].c_out, w[1].c_in
                )));
            }
        }
        for l in &layers {
            if l.kernel % 2 == 0 || l.kernel == 0 {
                return Err(SolverError::ShapeMismatch(format!(
                    "kernel width must be odd, got {}",
                    l.kernel
                )));
            }
            if l.c_in == 0 || l.c_out == 0 {
                return Err(SolverError::ShapeMismatch("zero channel count".into()));
            }
        }
        if layers[0].c_in != 1 {
            return Err(SolverError::ShapeMismatch(
                "first layer must take the scalar field (1 channel)".into(),
            ));
        }
        if layers.last().unwrap().c_out != 1 {
            return Err(SolverError::ShapeMismatch(
                "last layer must emit 1 channel".into(),
            ));
        }
        Ok(NetSpec { layers })
    }

    /// Convenience constructor: channel sizes `1 -> hidden.. -> 1` with a
    /// shared kernel width, ReLU everywhere except the output layer.
    pub fn conv_stack(hidden: &[usize], kernel: usize) -> NetSpec {
        let mut chain = vec![1usize];
        chain.extend_from_slice(hidden);
        chain.push(1);
        let n = chain.len() - 1;
        let layers = (0..n)
            .map(|i| LayerSpec {
                c_in: chain[i],
                c_out: chain[i + 1],
                kernel,
                relu: i + 1 < n,
            })
            .collect();
        NetSpec::new(layers).unwrap()
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(layer_len).sum()
    }
}

/// Layer parameter layout inside the flat vector: all weights
/// `w[c_out][c_in][tap]` row-major, then the `c_out` biases.
fn layer_len(l: &LayerSpec) -> usize {
    l.c_out * l.c_in * l.kernel + l.c_out
}

/// Corrector parameters: spec plus one flat coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct NetParams {
    pub spec: NetSpec,
    pub theta: Vec<f64>,
}

impl NetParams {
    pub fn zeros(spec: NetSpec) -> NetParams {
        let n = spec.param_count();
        NetParams {
            spec,
            theta: vec![0.0; n],
        }
    }

    /// Gaussian fan-in initialization `N(0, 1/(c_in * kernel))`, with the
    /// final layer scaled by 1e-2 so the untrained corrector is a small
    /// perturbation.
    pub fn init(spec: NetSpec, stream: &RngStream) -> NetParams {
        Self::init_scaled(spec, stream, 0.01)
    }

    /// As [`NetParams::init`] but with the output layer exactly zero: the
    /// untrained corrector is a no-op, so training starts from the bare
    /// solver's loss and departs from zero only where that pays. Gradients
    /// still flow (the output-layer weights see the hidden activations).
    pub fn init_zero_output(spec: NetSpec, stream: &RngStream) -> NetParams {
        Self::init_scaled(spec, stream, 0.0)
    }

    fn init_scaled(spec: NetSpec, stream: &RngStream, out_scale: f64) -> NetParams {
        let mut rng = stream.rng_at(0);
        let mut theta = Vec::with_capacity(spec.param_count());
        let n_layers = spec.layers.len();
        for (li, l) in spec.layers.iter().enumerate() {
            let std = (1.0 / (l.c_in * l.kernel) as f64).sqrt();
            let scale = if li + 1 == n_layers { out_scale * std } else { std };
            let draws = standard_normals(&mut rng, l.c_out * l.c_in * l.kernel);
            theta.extend(draws.into_iter().map(|z| scale * z));
            theta.extend(std::iter::repeat(0.0).take(l.c_out));
        }
        NetParams { spec, theta }
    }

    pub fn forward(&self, u: &Field) -> Field {
        Field::new(u.grid(), net_forward(&self.spec, &self.theta, u.values()))
    }

    /// Writes the versioned little-endian checkpoint; round-trips bit-exactly.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&(self.spec.layers.len() as u32).to_le_bytes());
        for l in &self.spec.layers {
            buf.extend_from_slice(&(l.c_in as u32).to_le_bytes());
            buf.extend_from_slice(&(l.c_out as u32).to_le_bytes());
            buf.extend_from_slice(&(l.kernel as u32).to_le_bytes());
            buf.push(l.relu as u8);
        }
        buf.extend_from_slice(&(self.theta.len() as u64).to_le_bytes());
        for v in &self.theta {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)
    }

    pub fn load(path: &Path) -> std::io::Result<NetParams> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
        let mut at = 0usize;
        let mut take = |n: usize| -> std::io::Result<&[u8]> {
            if at + n > bytes.len() {
                return Err(bad("truncated checkpoint"));
            }
            let s = &bytes[at..at + n];
            at += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("not a corrector checkpoint"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != 1 {
            return Err(bad("unsupported checkpoint version"));
        }
        let n_layers = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let c_in = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let c_out = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let kernel = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let relu = take(1)?[0] != 0;
            layers.push(LayerSpec {
                c_in,
                c_out,
                kernel,
                relu,
            });
        }
        let spec = NetSpec::new(layers).map_err(|e| bad(&e.to_string()))?;
        let len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if len != spec.param_count() {
            return Err(bad("parameter count does not match layer spec"));
        }
        let mut theta = Vec::with_capacity(len);
        for _ in 0..len {
            theta.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        }
        Ok(NetParams { spec, theta })
    }
}

const MAGIC: &[u8; 4] = b"HPNC";

/// Forward pass over a generic scalar. `theta` must have exactly
/// `spec.param_count()` entries; `input` is the single-channel field.
pub fn net_forward<S: Scalar>(spec: &NetSpec, theta: &[S], input: &[S]) -> Vec<S> {
    assert_eq!(
        theta.len(),
        spec.param_count(),
        "parameter vector length mismatch"
    );
    let n = input.len();
    let mut channels: Vec<S> = input.to_vec(); // [c][x] layout, c_in = 1
    let mut offset = 0usize;
    for l in spec.layers() {
        let w = &theta[offset..offset + l.c_out * l.c_in * l.kernel];
        let b = &theta[offset + l.c_out * l.c_in * l.kernel..offset + layer_len(l)];
        offset += layer_len(l);
        let half = (l.kernel - 1) / 2;
        let mut out = Vec::with_capacity(l.c_out * n);
        for co in 0..l.c_out {
            for x in 0..n {
                let mut acc = b[co];
                for ci in 0..l.c_in {
                    let row = &w[(co * l.c_in + ci) * l.kernel..][..l.kernel];
                    for (t, &wt) in row.iter().enumerate() {
                        // circular true convolution: out[x] += w[t] * in[x - (t - half)]
                        let ix = (x + n + half - t) % n;
                        acc = acc + wt * channels[ci * n + ix];
                    }
                }
                out.push(if l.relu { acc.relu() } else { acc });
            }
        }
        channels = out;
    }
    channels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn zero_params_give_zero_output() {
        let spec = NetSpec::conv_stack(&[4, 4], 5);
        let p = NetParams::zeros(spec);
        let g = Grid1D::new(16, 1.0);
        let u = Field::from_fn(g, |x| x.sin() + 1.0);
        assert!(p.forward(&u).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn delta_kernel_is_identity() {
        let spec = NetSpec::new(vec![LayerSpec {
            c_in: 1,
            c_out: 1,
            kernel: 3,
            relu: false,
        }])
        .unwrap();
        let mut p = NetParams::zeros(spec);
        p.theta[1] = 1.0; // center tap
        let g = Grid1D::new(16, 1.0);
        let u = Field::from_fn(g, |x| (2.0 * PI * x).sin());
        assert_eq!(p.forward(&u).values(), u.values());
    }

    #[test]
    fn derivative_kernel_matches_central_difference() {
        let g = Grid1D::new(64, 2.0);
        let dx = g.dx();
        let spec = NetSpec::new(vec![LayerSpec {
            c_in: 1,
            c_out: 1,
            kernel: 3,
            relu: false,
        }])
        .unwrap();
        let mut p = NetParams::zeros(spec);
        p.theta[0] = 1.0 / (2.0 * dx);
        p.theta[2] = -1.0 / (2.0 * dx);
        let k = 2.0 * PI / g.length();
        let u = Field::from_fn(g, |x| (k * x).sin());
        let d = p.forward(&u);
        let mut worst = 0.0f64;
        for j in 0..64 {
            let exact = k * (k * g.x(j)).cos();
            worst = worst.max((d.values()[j] - exact).abs());
        }
        // second-order central difference accuracy
        assert!(worst < k * k * k * dx * dx, "derivative error {worst}");
    }

    #[test]
    fn spec_validation_rejects_bad_shapes() {
        assert!(NetSpec::new(vec![]).is_err());
        assert!(NetSpec::new(vec![LayerSpec {
            c_in: 1,
            c_out: 1,
            kernel: 4,
            relu: false
        }])
        .is_err());
        assert!(NetSpec::new(vec![LayerSpec {
            c_in: 1,
            c_out: 2,
            kernel: 3,
            relu: false
        }])
        .is_err());
        assert!(NetSpec::new(vec![
            LayerSpec {
                c_in: 1,
                c_out: 4,
                kernel: 3,
                relu: true
            },
            LayerSpec {
                c_in: 3,
                c_out: 1,
                kernel: 3,
                relu: false
            }
        ])
        .is_err());
    }

    #[test]
    fn init_is_deterministic_and_small_at_output() {
        let spec = NetSpec::conv_stack(&[8], 5);
        let a = NetParams::init(spec.clone(), &RngStream::new(1, 0));
        let b = NetParams::init(spec, &RngStream::new(1, 0));
        assert_eq!(a.theta, b.theta);
        let g = Grid1D::new(32, 1.0);
        let u = Field::from_fn(g, |x| (2.0 * PI * x).sin());
        let out = a.forward(&u);
        assert!(out.max_abs() < 0.1, "untrained output too large");
    }

    #[test]
    fn checkpoint_roundtrip_is_bitexact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corrector.ckpt");
        let p = NetParams::init(NetSpec::conv_stack(&[6, 6], 3), &RngStream::new(5, 2));
        p.save(&path).unwrap();
        let q = NetParams::load(&path).unwrap();
        assert_eq!(p.spec, q.spec);
        assert_eq!(p.theta.len(), q.theta.len());
        for (a, b) in p.theta.iter().zip(&q.theta) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn corrupt_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"definitely not a checkpoint").unwrap();
        assert!(NetParams::load(&path).is_err());
    }

    #[test]
    fn param_count_matches_layout() {
        let spec = NetSpec::conv_stack(&[12, 12], 5);
        // (1*12*5 + 12) + (12*12*5 + 12) + (12*1*5 + 1)
        assert_eq!(spec.param_count(), 72 + 732 + 61);
        assert!(spec.param_count() < 3000);
    }
}
