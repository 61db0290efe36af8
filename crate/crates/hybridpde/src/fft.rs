//! Discrete Fourier transforms over generic scalars.
//!
//! Convention used throughout the crate: the forward transform is the plain
//! unnormalized sum `X_k = sum_j x_j e^{-2 pi i j k / n}`, the inverse
//! divides by `n`. Power-of-two lengths take an iterative radix-2 path;
//! other (even) lengths fall back to the direct O(n^2) sum. Both paths are
//! deterministic: twiddle factors are recomputed identically on every call.

use crate::cplx::{CVal, Cplx};
use crate::scalar::Scalar;

use std::f64::consts::PI;

/// Forward transform, unnormalized.
pub fn fft<S: Scalar>(data: &[CVal<S>]) -> Vec<CVal<S>> {
    transform(data, false)
}

/// Inverse transform, normalized by 1/n.
pub fn ifft<S: Scalar>(data: &[CVal<S>]) -> Vec<CVal<S>> {
    transform(data, true)
}

fn transform<S: Scalar>(data: &[CVal<S>], inverse: bool) -> Vec<CVal<S>> {
    let n = data.len();
    assert!(n > 0, "empty transform");
    let mut out = if n.is_power_of_two() && n > 1 {
        radix2(data, inverse)
    } else {
        naive(data, inverse)
    };
    if inverse {
        let scale = 1.0 / n as f64;
        for v in &mut out {
            *v = v.scale(scale);
        }
    }
    out
}

fn twiddles(n: usize, count: usize, inverse: bool) -> Vec<Cplx> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..count)
        .map(|j| Cplx::cis(sign * 2.0 * PI * j as f64 / n as f64))
        .collect()
}

fn radix2<S: Scalar>(data: &[CVal<S>], inverse: bool) -> Vec<CVal<S>> {
    let n = data.len();
    let tw = twiddles(n, n / 2, inverse);

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    let mut out: Vec<CVal<S>> = (0..n)
        .map(|i| data[(i.reverse_bits() >> (usize::BITS - bits)) as usize])
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let w = tw[j * step];
                let a = out[start + j];
                let b = out[start + j + half].mul_c(w);
                out[start + j] = a + b;
                out[start + j + half] = a - b;
            }
        }
        len *= 2;
    }
    out
}

fn naive<S: Scalar>(data: &[CVal<S>], inverse: bool) -> Vec<CVal<S>> {
    let n = data.len();
    let tw = twiddles(n, n, inverse);
    (0..n)
        .map(|k| {
            let mut acc = CVal::<S>::zero();
            for (j, &x) in data.iter().enumerate() {
                acc = acc + x.mul_c(tw[(j * k) % n]);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_c(v: &[f64]) -> Vec<Cplx> {
        v.iter().map(|&x| Cplx::new(x, 0.0)).collect()
    }

    #[test]
    fn roundtrip_pow2() {
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() + 0.2).collect();
        let back = ifft(&fft(&to_c(&x)));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-12);
            assert!(b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_non_pow2() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        let back = ifft(&fft(&to_c(&x)));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-12);
        }
    }

    #[test]
    fn pow2_matches_naive() {
        let x: Vec<Cplx> = (0..16)
            .map(|i| Cplx::new((i as f64).sin(), (i as f64 * 0.5).cos()))
            .collect();
        let a = radix2(&x, false);
        let b = naive(&x, false);
        for (u, v) in a.iter().zip(&b) {
            assert!((u.re - v.re).abs() < 1e-10 && (u.im - v.im).abs() < 1e-10);
        }
    }

    #[test]
    fn dc_only_for_constant() {
        let x = to_c(&[3.0; 8]);
        let s = fft(&x);
        assert!((s[0].re - 24.0).abs() < 1e-12);
        for v in &s[1..] {
            assert!(v.abs() < 1e-12);
        }
    }
}
