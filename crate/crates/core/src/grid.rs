//! Discrete 2-torus grid: node coordinates and the centered wavenumber lattice.

use crate::error::{Result, SqgError};

/// Uniform grid on `[0, 2π)²` with `n` points per dimension.
///
/// Wavenumbers run over the centered integer lattice `-n/2 <= k_i < n/2`
/// in standard FFT storage order. The Nyquist row `k = -n/2` is kept but
/// every field in this crate is built band-limited below `n/3`, so it
/// never carries energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub const DIM: usize = 2;

    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SqgError::Grid(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        Ok(TorusGrid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π/n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Node coordinate of row `i`, column `j` (row-major, x1 along rows).
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    /// Signed wavenumber for storage index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 - 1 {
            i
        } else {
            i - n
        }
    }

    /// Storage index for a signed wavenumber, if representable.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k >= -n / 2 && k < n / 2 {
            Some(k.rem_euclid(n) as usize)
        } else {
            None
        }
    }

    /// Largest frequency kept active by the dealiasing rule (`n/3`).
    #[inline]
    pub fn dealias_limit(&self) -> f64 {
        self.n as f64 / 3.0
    }

    /// Flat row-major index of node `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Iterate over all spectral storage pairs `(i, j)` with their signed
    /// wavenumbers `(k1, k2)`.
    pub fn modes(&self) -> impl Iterator<Item = (usize, usize, i64, i64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| (i, j, self.wavenumber(i), self.wavenumber(j)))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_are_centered() {
        let g = TorusGrid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.wavenumber(g.index_of(k).unwrap()), k);
        }
        assert_eq!(g.index_of(4), None);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(7).is_err());
        assert!(TorusGrid::new(4).is_err());
        assert!(TorusGrid::new(12).is_err());
        assert!(TorusGrid::new(64).is_ok());
    }
}
