//! Spatial mollification with lattice-exact vanishing moments.
//!
//! The kernel is a separable polynomial-corrected Gaussian solved so that
//! its discrete moments vanish through order `L` exactly on the grid; its
//! Fourier table is then applied twice (the regularized stress uses a
//! double convolution).

use crate::error::{Result, SqgError};
use crate::field::ScalarField;
use crate::grid::TorusGrid;
use num_complex::Complex64;

/// One-dimensional kernel samples on lattice offsets `-reach..=reach`.
struct Kernel1D {
    reach: usize,
    weights: Vec<f64>, // length 2*reach+1, includes the lattice measure h
}

fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

fn build_kernel_1d(grid: TorusGrid, eps: f64, order: usize) -> Result<Kernel1D> {
    let h = grid.spacing();
    if eps < h {
        return Err(SqgError::MollifierTooNarrow { eps, spacing: h });
    }
    if order > 12 {
        return Err(SqgError::MomentOrderTooHigh(order));
    }
    let reach = ((eps / h).floor() as usize).min(grid.n() / 2 - 1).max(1);
    let sigma = eps / 3.0;
    let m = order / 2; // even moment conditions s^0, s^2, ..., s^{2m}
    // moment matrix of the truncated discrete Gaussian, in units of sigma
    let gauss: Vec<f64> = (0..=2 * reach)
        .map(|i| {
            let s = (i as f64 - reach as f64) * h;
            (-0.5 * (s / sigma).powi(2)).exp()
        })
        .collect();
    let mut mat: Vec<Vec<f64>> = vec![vec![0.0; m + 1]; m + 1];
    for r in 0..=m {
        for c in 0..=m {
            let mut acc = 0.0;
            for i in 0..=2 * reach {
                let s = (i as f64 - reach as f64) * h / sigma;
                acc += s.powi(2 * (r + c) as i32) * gauss[i] * h;
            }
            mat[r][c] = acc;
        }
    }
    let mut rhs = vec![0.0; m + 1];
    rhs[0] = 1.0;
    let mat_copy = mat.clone();
    let rhs_copy = rhs.clone();
    let mut coef =
        solve_linear(&mut mat, &mut rhs).ok_or(SqgError::MomentOrderTooHigh(order))?;
    // one step of iterative refinement for the Hankel system
    let mut resid = rhs_copy.clone();
    for r in 0..=m {
        for c in 0..=m {
            resid[r] -= mat_copy[r][c] * coef[c];
        }
    }
    let mut mat2 = mat_copy.clone();
    if let Some(dx) = solve_linear(&mut mat2, &mut resid) {
        for (x, d) in coef.iter_mut().zip(dx) {
            *x += d;
        }
    }
    let weights: Vec<f64> = (0..=2 * reach)
        .map(|i| {
            let s = (i as f64 - reach as f64) * h / sigma;
            let poly: f64 = coef
                .iter()
                .enumerate()
                .map(|(j, c)| c * s.powi(2 * j as i32))
                .sum();
            poly * gauss[i] * h
        })
        .collect();
    Ok(Kernel1D { reach, weights })
}

/// Spectral table of the 2-D kernel (single application).
pub fn kernel_symbol(grid: TorusGrid, eps: f64, order: usize) -> Result<Vec<Complex64>> {
    let k1 = build_kernel_1d(grid, eps, order)?;
    let n = grid.n();
    // place the separable kernel on the torus and transform once
    let mut vals = vec![0.0; n * n];
    let h2 = grid.spacing().powi(2);
    for a in 0..=2 * k1.reach {
        let i = (a as i64 - k1.reach as i64).rem_euclid(n as i64) as usize;
        for b in 0..=2 * k1.reach {
            let j = (b as i64 - k1.reach as i64).rem_euclid(n as i64) as usize;
            // weights already include one factor of h each
            vals[i * n + j] = k1.weights[a] * k1.weights[b] / h2;
        }
    }
    let spec = crate::fft::forward_real(&vals, n);
    // convolution theorem with the lattice measure: table = (2π)² * kernel-hat
    let scale = (2.0 * std::f64::consts::PI).powi(2);
    Ok(spec.into_iter().map(|c| c * scale).collect())
}

/// Mollify with the double convolution `η_ε * η_ε * f` (moments through
/// `order` vanish on the lattice).
pub fn mollify_space(f: &ScalarField, eps: f64, order: usize) -> Result<ScalarField> {
    let table = kernel_symbol(f.grid(), eps, order)?;
    let spec = f
        .spectrum()
        .iter()
        .zip(table.iter())
        .map(|(a, b)| a * b * b)
        .collect();
    Ok(ScalarField::from_spectrum(f.grid(), spec))
}

/// Lattice moments `Σ h^a η(h)` of the kernel for `1 <= |a| <= order`,
/// with coordinates wrapped to `[-π, π)`; used by verification.
pub fn kernel_lattice_moments(grid: TorusGrid, eps: f64, order: usize) -> Result<Vec<f64>> {
    let k1 = build_kernel_1d(grid, eps, order)?;
    let h = grid.spacing();
    let mut moments = Vec::new();
    let mom_1d = |p: usize| -> f64 {
        (0..=2 * k1.reach)
            .map(|i| {
                let s = (i as f64 - k1.reach as f64) * h;
                s.powi(p as i32) * k1.weights[i]
            })
            .sum()
    };
    for total in 1..=order {
        for a1 in 0..=total {
            let a2 = total - a1;
            moments.push(mom_1d(a1) * mom_1d(a2));
        }
    }
    Ok(moments)
}
