//! Real scalar and vector fields on the discrete torus.
//!
//! Fields are immutable after construction and carry both representations
//! lazily: real node samples and the complex Fourier spectrum. All products
//! go through zero-padded spectral convolution (3/2 rule) so that the
//! Leibniz rule and every bilinear identity in the construction hold
//! exactly on the retained modes.

use crate::error::{Result, SqgError};
use crate::fft;
use crate::grid::TorusGrid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

#[derive(Debug, Default)]
pub struct ScalarField {
    grid_n: usize,
    values: OnceLock<Vec<f64>>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for ScalarField {
    fn clone(&self) -> Self {
        let f = ScalarField {
            grid_n: self.grid_n,
            values: OnceLock::new(),
            spectrum: OnceLock::new(),
        };
        if let Some(v) = self.values.get() {
            let _ = f.values.set(v.clone());
        }
        if let Some(s) = self.spectrum.get() {
            let _ = f.spectrum.set(s.clone());
        }
        f
    }
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        let f = ScalarField {
            grid_n: grid.n(),
            values: OnceLock::new(),
            spectrum: OnceLock::new(),
        };
        let _ = f.values.set(values);
        f
    }

    pub fn from_spectrum(grid: TorusGrid, spectrum: Vec<Complex64>) -> Self {
        assert_eq!(spectrum.len(), grid.len());
        let f = ScalarField {
            grid_n: grid.n(),
            values: OnceLock::new(),
            spectrum: OnceLock::new(),
        };
        let _ = f.spectrum.set(spectrum);
        f
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                let [x, y] = grid.node(i, j);
                values[grid.idx(i, j)] = f(x, y);
            }
        }
        Self::from_values(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.grid_n).expect("grid size validated at construction")
    }

    pub fn values(&self) -> &[f64] {
        self.values.get_or_init(|| {
            let s = self.spectrum.get().expect("field has a representation");
            fft::inverse_real(s, self.grid_n)
        })
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let v = self.values.get().expect("field has a representation");
            fft::forward_real(v, self.grid_n)
        })
    }

    pub fn mean(&self) -> f64 {
        if let Some(s) = self.spectrum.get() {
            s[0].re
        } else {
            let v = self.values();
            v.iter().sum::<f64>() / v.len() as f64
        }
    }

    pub fn subtract_mean(&self) -> Self {
        let mut s = self.spectrum().to_vec();
        s[0] = Complex64::new(0.0, 0.0);
        Self::from_spectrum(self.grid(), s)
    }

    /// Lattice integral `(2π/n)² Σ f = (2π)² mean(f)`.
    pub fn integrate(&self) -> f64 {
        self.mean() * (2.0 * std::f64::consts::PI).powi(2)
    }

    pub fn linf(&self) -> f64 {
        self.values().iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Continuum `L²` norm with the lattice measure.
    pub fn l2(&self) -> f64 {
        let h2 = self.grid().spacing().powi(2);
        (self.values().iter().map(|v| v * v).sum::<f64>() * h2).sqrt()
    }

    pub fn l1(&self) -> f64 {
        let h2 = self.grid().spacing().powi(2);
        self.values().iter().map(|v| v.abs()).sum::<f64>() * h2
    }

    /// Spectral `L²` norm: `2π sqrt(Σ|f̂|²)` (Parseval partner of `l2`).
    pub fn l2_spectral(&self) -> f64 {
        let s: f64 = self.spectrum().iter().map(|c| c.norm_sqr()).sum();
        2.0 * std::f64::consts::PI * s.sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(self.grid(), self.values().iter().map(|&v| f(v)).collect())
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid_n, other.grid_n);
        let vals = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(self.grid(), vals)
    }

    pub fn scale(&self, c: f64) -> Self {
        if let Some(s) = self.spectrum.get() {
            Self::from_spectrum(self.grid(), s.iter().map(|v| v * c).collect())
        } else {
            self.map(|v| v * c)
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.grid_n, other.grid_n);
        // stay in whichever representation both sides already have
        if let (Some(s1), Some(s2)) = (self.spectrum.get(), other.spectrum.get()) {
            let s = s1
                .iter()
                .zip(s2)
                .map(|(x, y)| x * a + y * b)
                .collect();
            return Self::from_spectrum(self.grid(), s);
        }
        let vals = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self::from_values(self.grid(), vals)
    }

    /// Dealiased pointwise product (3/2-rule zero-padded convolution).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid_n, other.grid_n);
        let n = self.grid_n;
        let spec = dealiased_product(self.spectrum(), other.spectrum(), n);
        Self::from_spectrum(self.grid(), spec)
    }

    /// Spatial derivative along `axis` (0 or 1); Nyquist row is zeroed.
    pub fn deriv(&self, axis: usize) -> Self {
        let n = self.grid_n;
        let s = self.spectrum();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let k1 = fft::wavenumber(i, n);
            for j in 0..n {
                let k2 = fft::wavenumber(j, n);
                let k = if axis == 0 { k1 } else { k2 };
                if k.unsigned_abs() as usize * 2 == n {
                    continue;
                }
                out[i * n + j] = s[i * n + j] * Complex64::new(0.0, k as f64);
            }
        }
        Self::from_spectrum(self.grid(), out)
    }

    pub fn grad(&self) -> VectorField {
        VectorField::new(self.deriv(0), self.deriv(1))
    }

    /// Fraction of spectral energy outside `|k| <= kmax`.
    pub fn energy_above(&self, kmax: f64) -> f64 {
        let n = self.grid_n;
        let s = self.spectrum();
        let mut inside = 0.0;
        let mut outside = 0.0;
        for i in 0..n {
            let k1 = fft::wavenumber(i, n) as f64;
            for j in 0..n {
                let k2 = fft::wavenumber(j, n) as f64;
                let e = s[i * n + j].norm_sqr();
                if (k1 * k1 + k2 * k2).sqrt() <= kmax {
                    inside += e;
                } else {
                    outside += e;
                }
            }
        }
        if inside + outside == 0.0 {
            0.0
        } else {
            outside / (inside + outside)
        }
    }

    /// Resample onto a grid of size `m` (spectral pad/truncate).
    pub fn resample(&self, m: usize) -> Result<Self> {
        let grid = TorusGrid::new(m)?;
        let spec = fft::resample_spectrum(self.spectrum(), self.grid_n, m);
        Ok(Self::from_spectrum(grid, spec))
    }

    pub fn require_mean_zero(&self, tol: f64) -> Result<()> {
        let m = self.mean();
        if m.abs() > tol {
            Err(SqgError::NonzeroMean(m))
        } else {
            Ok(())
        }
    }

    /// Random real field with unit-scale coefficients supported in
    /// `1 <= |k| <= kmax`, mean zero.
    pub fn random_band_limited(grid: TorusGrid, kmax: f64, seed: u64) -> Self {
        let n = grid.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
        for i in 0..n {
            let k1 = fft::wavenumber(i, n);
            for j in 0..n {
                let k2 = fft::wavenumber(j, n);
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
                if kk > kmax {
                    continue;
                }
                // fill each Hermitian pair once
                if k1 < 0 || (k1 == 0 && k2 < 0) {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                spec[i * n + j] = c;
                let ni = (-k1).rem_euclid(n as i64) as usize;
                let nj = (-k2).rem_euclid(n as i64) as usize;
                spec[ni * n + nj] = c.conj();
            }
        }
        Self::from_spectrum(grid, spec)
    }
}

/// Zero-padded spectral convolution of two spectra on an `n`-grid.
pub fn dealiased_product(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = 3 * n / 2;
    let mut pa = fft::resample_spectrum(a, n, m);
    let mut pb = fft::resample_spectrum(b, n, m);
    fft::ifft2(&mut pa, m);
    fft::ifft2(&mut pb, m);
    for (x, y) in pa.iter_mut().zip(pb.iter()) {
        *x *= y;
    }
    fft::fft2(&mut pa, m);
    let mut out = fft::resample_spectrum(&pa, m, n);
    // the retained Nyquist rows cannot carry trustworthy data after a product
    for i in 0..n {
        out[(n / 2) * n + i] = Complex64::new(0.0, 0.0);
        out[i * n + n / 2] = Complex64::new(0.0, 0.0);
    }
    out
}

#[derive(Clone, Debug)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        assert_eq!(x.grid(), y.grid());
        VectorField { x, y }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.x.grid()
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        match i {
            0 => &self.x,
            1 => &self.y,
            _ => panic!("vector component index {i}"),
        }
    }

    pub fn divergence(&self) -> ScalarField {
        self.x.deriv(0).add(&self.y.deriv(1))
    }

    pub fn curl(&self) -> ScalarField {
        self.y.deriv(0).sub(&self.x.deriv(1))
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField::new(self.x.add(&other.x), self.y.add(&other.y))
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorField::new(self.x.sub(&other.x), self.y.sub(&other.y))
    }

    pub fn scale(&self, c: f64) -> Self {
        VectorField::new(self.x.scale(c), self.y.scale(c))
    }

    /// Advection term `v · ∇f` with dealiased products.
    pub fn advect_scalar(&self, f: &ScalarField) -> ScalarField {
        self.x.mul(&f.deriv(0)).add(&self.y.mul(&f.deriv(1)))
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        self.x.mul(&other.x).add(&self.y.mul(&other.y))
    }

    pub fn linf(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m, (&a, &b)| m.max((a * a + b * b).sqrt()))
    }

    pub fn resample(&self, m: usize) -> Result<Self> {
        Ok(VectorField::new(self.x.resample(m)?, self.y.resample(m)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(32).unwrap()
    }

    #[test]
    fn parseval() {
        let f = ScalarField::random_band_limited(grid(), 9.0, 7);
        let phys = f.l2();
        let spec = f.l2_spectral();
        assert!(
            (phys - spec).abs() <= 1e-12 * phys.max(1.0),
            "{phys} vs {spec}"
        );
    }

    #[test]
    fn derivative_of_sine() {
        let f = ScalarField::from_fn(grid(), |x, _| (3.0 * x).sin());
        let d = f.deriv(0);
        let expect = ScalarField::from_fn(grid(), |x, _| 3.0 * (3.0 * x).cos());
        assert!(d.sub(&expect).linf() < 1e-11);
    }

    #[test]
    fn product_leibniz_exact() {
        let f = ScalarField::random_band_limited(grid(), 8.0, 1);
        let g = ScalarField::random_band_limited(grid(), 8.0, 2);
        let lhs = f.mul(&g).deriv(0);
        let rhs = f.deriv(0).mul(&g).add(&f.mul(&g.deriv(0)));
        let scale = lhs.linf().max(1.0);
        assert!(lhs.sub(&rhs).linf() < 1e-11 * scale);
    }

    #[test]
    fn product_exact_under_dealias_limit() {
        // frequencies <= n/3 so no information is lost: compare against
        // the O(n^4) direct convolution
        let g = TorusGrid::new(16).unwrap();
        let f = ScalarField::random_band_limited(g, 5.0, 3);
        let h = ScalarField::random_band_limited(g, 5.0, 4);
        let prod = f.mul(&h);
        let n = 16usize;
        let (sf, sh) = (f.spectrum(), h.spectrum());
        let mut direct = vec![Complex64::new(0.0, 0.0); n * n];
        for (i1, j1, k1a, k1b) in g.modes() {
            for (i2, j2, k2a, k2b) in g.modes() {
                let (ka, kb) = (k1a + k2a, k1b + k2b);
                if let (Some(ia), Some(ja)) = (g.index_of(ka), g.index_of(kb)) {
                    if ka.abs() * 2 != n as i64 && kb.abs() * 2 != n as i64 {
                        direct[ia * n + ja] += sf[i1 * n + j1] * sh[i2 * n + j2];
                    }
                }
            }
        }
        let err: f64 = prod
            .spectrum()
            .iter()
            .zip(direct.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "max spectral error {err}");
    }
}
