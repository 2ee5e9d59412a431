//! Two-dimensional FFTs with cached plans, plus spectral resampling.
//!
//! Convention: `values[i*n + j] = sum_k coeffs[k] * exp(i(k1*x1 + k2*x2))`
//! with `x = 2π(i, j)/n`. The forward transform carries the `1/n²`
//! normalization so coefficients are mode amplitudes.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct PlanCache {
    fwd: HashMap<usize, Arc<dyn Fft<f64>>>,
    inv: HashMap<usize, Arc<dyn Fft<f64>>>,
    planner: FftPlanner<f64>,
}

fn cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            fwd: HashMap::new(),
            inv: HashMap::new(),
            planner: FftPlanner::new(),
        })
    })
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut c = cache().lock().unwrap();
    let PlanCache { fwd, inv, planner } = &mut *c;
    let map = if forward { fwd } else { inv };
    map.entry(n)
        .or_insert_with(|| {
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2_rows(data: &mut [Complex64], n: usize, forward: bool) {
    let p = plan(n, forward);
    for row in data.chunks_exact_mut(n) {
        p.process(row);
    }
}

/// In-place 2D transform, physical -> spectral (with 1/n² normalization).
pub fn fft2(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    fft2_rows(data, n, true);
    transpose(data, n);
    fft2_rows(data, n, true);
    transpose(data, n);
    let scale = 1.0 / (n * n) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// In-place 2D transform, spectral -> physical.
pub fn ifft2(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    fft2_rows(data, n, false);
    transpose(data, n);
    fft2_rows(data, n, false);
    transpose(data, n);
}

/// Forward transform of real samples.
pub fn forward_real(values: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, n);
    buf
}

/// Inverse transform, taking the real part. The imaginary part must be
/// spectral-symmetry noise; callers enforce Hermitian spectra.
pub fn inverse_real(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    ifft2(&mut buf, n);
    buf.into_iter().map(|v| v.re).collect()
}

/// Signed wavenumber for storage index `i` on an `n`-grid.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    let n = n as i64;
    let i = i as i64;
    if i <= n / 2 - 1 {
        i
    } else {
        i - n
    }
}

/// Re-sample a spectrum onto a different grid size by zero padding or
/// truncation. Exact on band-limited data: modes `|k_i| < min(n,m)/2`
/// are copied, everything else is dropped or set to zero.
pub fn resample_spectrum(coeffs: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    let half = (n.min(m) / 2) as i64;
    for i in 0..n {
        let k1 = wavenumber(i, n);
        if k1 <= -half || k1 >= half {
            continue;
        }
        for j in 0..n {
            let k2 = wavenumber(j, n);
            if k2 <= -half || k2 >= half {
                continue;
            }
            let src = i * n + j;
            let di = k1.rem_euclid(m as i64) as usize;
            let dj = k2.rem_euclid(m as i64) as usize;
            out[di * m + dj] = coeffs[src];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_identity() {
        let n = 16;
        let vals: Vec<f64> = (0..n * n)
            .map(|i| ((i * 7919 + 13) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let coeffs = forward_real(&vals, n);
        let back = inverse_real(&coeffs, n);
        for (a, b) in vals.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn single_mode_coefficient() {
        let n = 16;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        // cos(3 x1): coefficients 1/2 at k=(±3, 0)
        let vals: Vec<f64> = (0..n * n)
            .map(|idx| {
                let i = idx / n;
                (3.0 * (i as f64) * h).cos()
            })
            .collect();
        let coeffs = forward_real(&vals, n);
        let c = coeffs[3 * n];
        assert!((c.re - 0.5).abs() < 1e-12 && c.im.abs() < 1e-12);
        let c_neg = coeffs[(n - 3) * n];
        assert!((c_neg.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resample_roundtrip_band_limited() {
        let n = 16;
        let m = 32;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let vals: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                (2.0 * i as f64 * h).cos() * (3.0 * j as f64 * h).sin()
            })
            .collect();
        let coeffs = forward_real(&vals, n);
        let up = resample_spectrum(&coeffs, n, m);
        let down = resample_spectrum(&up, m, n);
        for (a, b) in coeffs.iter().zip(down.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
