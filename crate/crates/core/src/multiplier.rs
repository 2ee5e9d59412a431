//! Fourier multiplier application with Hermitian-symmetry checking.

use crate::error::{Result, SqgError};
use crate::field::ScalarField;
use num_complex::Complex64;

/// A frequency symbol `k -> value` with an explicit zero-mode value.
///
/// Homogeneous negative-order symbols are singular at the origin; they
/// take `at_zero = 0`, which drops the mean.
pub struct Symbol<F: Fn(f64, f64) -> Complex64> {
    pub eval: F,
    pub at_zero: Complex64,
}

impl<F: Fn(f64, f64) -> Complex64> Symbol<F> {
    pub fn homogeneous(eval: F) -> Self {
        Symbol {
            eval,
            at_zero: Complex64::new(0.0, 0.0),
        }
    }
}

/// Tabulate a symbol over the grid's wavenumber lattice, zeroing the
/// Nyquist rows (they cannot be Hermitian-paired for odd symbols and never
/// carry energy under the dealiasing discipline).
pub fn tabulate(
    n: usize,
    symbol: &dyn Fn(f64, f64) -> Complex64,
    at_zero: Complex64,
) -> Vec<Complex64> {
    let mut table = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let k1 = crate::fft::wavenumber(i, n);
        for j in 0..n {
            let k2 = crate::fft::wavenumber(j, n);
            let idx = i * n + j;
            if k1 == 0 && k2 == 0 {
                table[idx] = at_zero;
            } else if k1.unsigned_abs() as usize * 2 == n || k2.unsigned_abs() as usize * 2 == n {
                // Nyquist rows stay zero
            } else {
                table[idx] = symbol(k1 as f64, k2 as f64);
            }
        }
    }
    table
}

fn hermitian_defect(table: &[Complex64], n: usize) -> Option<(i64, i64, f64)> {
    let mut worst: Option<(i64, i64, f64)> = None;
    let scale = table.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..n {
        let k1 = crate::fft::wavenumber(i, n);
        for j in 0..n {
            let k2 = crate::fft::wavenumber(j, n);
            let ni = (-k1).rem_euclid(n as i64) as usize;
            let nj = (-k2).rem_euclid(n as i64) as usize;
            let d = (table[i * n + j] - table[ni * n + nj].conj()).norm();
            if d > 1e-12 * scale {
                match worst {
                    Some((_, _, w)) if w >= d => {}
                    _ => worst = Some((k1, k2, d)),
                }
            }
        }
    }
    worst
}

/// Apply a multiplier table to a field. `real_output` demands Hermitian
/// symmetry of the table and rejects otherwise.
pub fn apply_table(f: &ScalarField, table: &[Complex64], real_output: bool) -> Result<ScalarField> {
    let n = f.grid().n();
    assert_eq!(table.len(), n * n);
    if real_output {
        if let Some((k1, k2, _)) = hermitian_defect(table, n) {
            return Err(SqgError::NonHermitianSymbol(k1, k2));
        }
    }
    let spec = f
        .spectrum()
        .iter()
        .zip(table.iter())
        .map(|(a, b)| a * b)
        .collect();
    Ok(ScalarField::from_spectrum(f.grid(), spec))
}

/// Apply a symbol given as a closure, with real output enforced.
pub fn apply(
    f: &ScalarField,
    symbol: &dyn Fn(f64, f64) -> Complex64,
    at_zero: Complex64,
) -> Result<ScalarField> {
    let table = tabulate(f.grid().n(), symbol, at_zero);
    apply_table(f, &table, true)
}

/// `|∇|^s` (fractional Laplacian powers), zero mean for s < 0.
pub fn fractional_laplacian(f: &ScalarField, s: f64) -> ScalarField {
    apply(
        f,
        &|k1, k2| Complex64::new((k1 * k1 + k2 * k2).sqrt().powf(s), 0.0),
        Complex64::new(if s == 0.0 { 1.0 } else { 0.0 }, 0.0),
    )
    .expect("radial real symbol is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn grid() -> TorusGrid {
        TorusGrid::new(32).unwrap()
    }

    #[test]
    fn gradient_magnitude_on_cosine() {
        // |∇| cos(x1) = cos(x1)
        let f = ScalarField::from_fn(grid(), |x, _| x.cos());
        let g = fractional_laplacian(&f, 1.0);
        assert!(g.sub(&f).linf() < 1e-12);
    }

    #[test]
    fn homogeneous_symbol_kills_constants() {
        let f = ScalarField::from_fn(grid(), |_, _| 3.25);
        let g = fractional_laplacian(&f, -0.5);
        assert!(g.linf() < 1e-13);
    }

    #[test]
    fn half_inverse_on_single_mode() {
        // |∇|^{-1/2} sin(2 x2) = 2^{-1/2} sin(2 x2)
        let f = ScalarField::from_fn(grid(), |_, y| (2.0 * y).sin());
        let g = fractional_laplacian(&f, -0.5);
        let expect = f.scale(1.0 / 2.0_f64.sqrt());
        assert!(g.sub(&expect).linf() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let f = ScalarField::random_band_limited(grid(), 5.0, 1);
        let err = apply(
            &f,
            &|k1, _| Complex64::new(0.0, k1.max(0.0)),
            Complex64::new(0.0, 0.0),
        );
        assert!(matches!(err, Err(SqgError::NonHermitianSymbol(_, _))));
    }
}
