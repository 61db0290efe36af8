//! Spectral representation of real fields and the transform contract.
//!
//! Full-spectrum storage in standard transform order: slot `j` holds mode
//! `m = j` for `j <= n/2` and `m = j - n` above, i.e. modes
//! `0, 1, .., n/2, -n/2+1, .., -1`. Forward transform is the unnormalized
//! sum, the inverse divides by `n` (see [`crate::fft`]).

use crate::cplx::{CVal, Cplx};
use crate::error::SolverError;
use crate::fft;
use crate::grid::{Field, Grid1D};
use crate::scalar::Scalar;

use std::f64::consts::PI;

/// Complex Fourier coefficients of a real field (Hermitian-symmetric).
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid1D,
    coeffs: Vec<Cplx>,
}

impl SpectralField {
    pub fn new(grid: Grid1D, coeffs: Vec<Cplx>) -> SpectralField {
        assert_eq!(coeffs.len(), grid.n());
        SpectralField { grid, coeffs }
    }

    pub fn zeros(grid: Grid1D) -> SpectralField {
        SpectralField {
            grid,
            coeffs: vec![Cplx::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn coeffs(&self) -> &[Cplx] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Cplx] {
        &mut self.coeffs
    }

    /// Relative deviation from Hermitian symmetry `c[-k] == conj(c[k])`.
    pub fn hermitian_residue(&self) -> f64 {
        let n = self.grid.n();
        let norm: f64 = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = self.coeffs[0].im.abs();
        for k in 1..n {
            let diff = self.coeffs[(n - k) % n] - self.coeffs[k].conj();
            worst = worst.max(diff.abs());
        }
        worst / norm
    }
}

/// Signed mode index stored in slot `j` of an `n`-point spectrum.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

pub(crate) fn wavenumbers_raw(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|j| 2.0 * PI * mode_index(j, n) as f64 / length)
        .collect()
}

/// Wavenumbers `k = 2 pi m / L` in storage order.
pub fn wavenumbers(g: Grid1D) -> Vec<f64> {
    wavenumbers_raw(g.n(), g.length())
}

/// Forward transform of a real field (unnormalized sum convention).
pub fn fft_forward(f: &Field) -> SpectralField {
    let data: Vec<Cplx> = f.values().iter().map(|&v| Cplx::new(v, 0.0)).collect();
    SpectralField::new(f.grid(), fft::fft(&data))
}

const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Inverse transform back to a real field.
///
/// The imaginary residue left after the inverse transform is discarded when
/// below `1e-10` relative to the real part; a larger residue means the input
/// was not the spectrum of a real field.
pub fn fft_inverse(s: &SpectralField) -> Result<Field, SolverError> {
    let back = fft::ifft(s.coeffs());
    let re_norm: f64 = back.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let im_norm: f64 = back.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    let residue = if re_norm > 0.0 {
        im_norm / re_norm
    } else {
        im_norm
    };
    if residue > IMAG_RESIDUE_TOL {
        return Err(SolverError::NonHermitianInput { residue });
    }
    Ok(Field::new(s.grid(), back.iter().map(|c| c.re).collect()))
}

/// 2/3-rule dealiasing: zeroes every mode with `|m| > n/3`.
pub fn dealias_23<S: Scalar>(coeffs: &mut [CVal<S>]) {
    let n = coeffs.len();
    let cutoff = n as i64 / 3;
    for (j, c) in coeffs.iter_mut().enumerate() {
        if mode_index(j, n).abs() > cutoff {
            *c = CVal::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_field, RngStream};

    #[test]
    fn constant_field_is_dc_only() {
        let g = Grid1D::new(16, 2.0);
        let c = 1.7;
        let s = fft_forward(&Field::from_fn(g, |_| c));
        assert!((s.coeffs()[0].re - c * 16.0).abs() < 1e-12);
        assert!(s.coeffs()[0].im.abs() < 1e-12);
        for k in 1..16 {
            assert!(s.coeffs()[k].abs() < 1e-10);
        }
    }

    #[test]
    fn single_mode_lands_in_pm_one() {
        let g = Grid1D::new(8, 4.0);
        let s = fft_forward(&Field::from_fn(g, |x| (2.0 * PI * x / 4.0).sin()));
        for j in 0..8 {
            let mag = s.coeffs()[j].abs();
            if j == 1 || j == 7 {
                assert!((mag - 4.0).abs() < 1e-12, "mode {j} magnitude {mag}");
            } else {
                assert!(mag < 1e-12, "leak into mode {j}: {mag}");
            }
        }
    }

    #[test]
    fn roundtrip_random_field() {
        let g = Grid1D::new(96, 5.0); // exercises the non-power-of-two path
        let f = gaussian_field(g, 1.0, &RngStream::new(5, 0), 0);
        let back = fft_inverse(&fft_forward(&f)).unwrap();
        let err = back.sub(&f).norm_l2() / f.norm_l2();
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn parseval_under_stated_normalization() {
        let g = Grid1D::new(64, 2.0);
        let f = gaussian_field(g, 1.0, &RngStream::new(6, 0), 0);
        let s = fft_forward(&f);
        let phys: f64 = f.values().iter().map(|v| v * v).sum();
        let spec: f64 = s.coeffs().iter().map(|c| c.abs() * c.abs()).sum::<f64>() / 64.0;
        assert!((phys - spec).abs() / phys < 1e-10);
    }

    #[test]
    fn wavenumber_order_and_antisymmetry() {
        let k = wavenumbers_raw(4, 2.0 * PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, -1.0]);

        let g = Grid1D::new(32, 7.3);
        let k = wavenumbers(g);
        assert_eq!(k[0], 0.0);
        let kmax = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((kmax - PI * 32.0 / 7.3).abs() < 1e-12);
        for m in 1..16 {
            assert_eq!(k[m], -k[32 - m]);
        }
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let g = Grid1D::new(16, 1.0);
        let f = fft_inverse(&SpectralField::zeros(g)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sin_spectrum_inverts_to_samples() {
        let g = Grid1D::new(32, 6.0);
        let exact = Field::from_fn(g, |x| (2.0 * PI * x / 6.0).sin());
        let back = fft_inverse(&fft_forward(&exact)).unwrap();
        let worst = back
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_an_error() {
        let g = Grid1D::new(16, 1.0);
        let mut s = SpectralField::zeros(g);
        s.coeffs_mut()[3] = Cplx::new(1.0, 0.5); // no conjugate partner
        match fft_inverse(&s) {
            Err(SolverError::NonHermitianInput { residue }) => assert!(residue > 1e-10),
            other => panic!("expected NonHermitianInput, got {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn roundtrip_and_parseval_hold_for_any_field(
            half_n in 4usize..128,
            seed in 0u64..1000,
            length in 0.5f64..50.0,
        ) {
            let g = Grid1D::new(2 * half_n, length);
            let f = gaussian_field(g, 1.0, &RngStream::new(seed, 3), 0);
            let s = fft_forward(&f);
            let back = fft_inverse(&s).unwrap();
            let rel = back.sub(&f).norm_l2() / f.norm_l2();
            proptest::prop_assert!(rel < 1e-12, "roundtrip {}", rel);

            let phys: f64 = f.values().iter().map(|v| v * v).sum();
            let spec: f64 =
                s.coeffs().iter().map(|c| c.abs() * c.abs()).sum::<f64>() / (2 * half_n) as f64;
            proptest::prop_assert!((phys - spec).abs() <= 1e-10 * phys.max(1e-30));
        }
    }

    #[test]
    fn dealias_kills_high_modes_only() {
        let mut c: Vec<Cplx> = (0..12).map(|j| Cplx::new(j as f64 + 1.0, 0.0)).collect();
        dealias_23(&mut c);
        for (j, v) in c.iter().enumerate() {
            let m = mode_index(j, 12).abs();
            if m > 4 {
                assert_eq!(v.re, 0.0);
            } else {
                assert_ne!(v.re, 0.0);
            }
        }
    }
}
