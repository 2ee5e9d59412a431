//! Littlewood-Paley projections with a fixed smooth radial profile.
//!
//! The low-pass symbol is `eta(|k| / 2^q)` where `eta` is 1 on r <= 1/2
//! and 0 on r >= 1; the shell at level q is the exact difference
//! `leq(q+1) - leq(q)`, so telescoping partitions hold to roundoff.

use crate::field::ScalarField;
use crate::profiles::{lp_profile, transition};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpKind {
    /// `P_{<= q}`
    Leq,
    /// `P_q = P_{<= q+1} - P_{<= q}`
    Shell,
    /// `P_{~ q}`: 1 on the shell's support `[2^{q-1}, 2^{q+1}]`
    Approx,
}

#[derive(Clone, Copy, Debug)]
pub struct LpProjector {
    pub q: i32,
    pub kind: LpKind,
}

impl LpProjector {
    pub fn leq(q: i32) -> Self {
        LpProjector { q, kind: LpKind::Leq }
    }

    pub fn shell(q: i32) -> Self {
        LpProjector { q, kind: LpKind::Shell }
    }

    pub fn approx(q: i32) -> Self {
        LpProjector { q, kind: LpKind::Approx }
    }

    /// Radial symbol value at frequency magnitude `r`.
    ///
    /// Out-of-range levels degrade consistently: a `leq` far below the
    /// lattice keeps only the mean, far above it is the identity.
    pub fn symbol(&self, r: f64) -> f64 {
        let scale = |q: i32| (2.0f64).powi(q);
        match self.kind {
            LpKind::Leq => lp_profile(r / scale(self.q)),
            LpKind::Shell => lp_profile(r / scale(self.q + 1)) - lp_profile(r / scale(self.q)),
            LpKind::Approx => {
                if r == 0.0 {
                    return 0.0;
                }
                let lo = scale(self.q - 1);
                let hi = scale(self.q + 1);
                if r < lo {
                    transition((r - lo / 2.0) / (lo / 2.0))
                } else if r > hi {
                    1.0 - transition((r - hi) / hi)
                } else {
                    1.0
                }
            }
        }
    }

    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let n = f.grid().n();
        let spec = f.spectrum();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let k1 = crate::fft::wavenumber(i, n) as f64;
            for j in 0..n {
                let k2 = crate::fft::wavenumber(j, n) as f64;
                let r = (k1 * k1 + k2 * k2).sqrt();
                out[i * n + j] = spec[i * n + j] * self.symbol(r);
            }
        }
        ScalarField::from_spectrum(f.grid(), out)
    }
}

/// `P_{~q}`-style bump that is 1 on `[2^{q-2}, 2^{q+3}]` — wide enough to
/// be exact on paraproduct brackets built from a shell and a low-pass
/// factor, while still adapted to frequency `2^q`.
pub fn approx_symbol_wide(q: i32, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let lo = (2.0f64).powi(q - 2);
    let hi = (2.0f64).powi(q + 3);
    if r < lo {
        transition((r - lo / 2.0) / (lo / 2.0))
    } else if r > hi {
        1.0 - transition((r - hi) / hi)
    } else {
        1.0
    }
}

/// Dyadic level range on which shells can be nonzero for an `n`-grid
/// (top shell at the Nyquist absorbs the tail).
pub fn shell_range(n: usize) -> (i32, i32) {
    let qmax = (n as f64 / 2.0).log2().ceil() as i32;
    (-1, qmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn grid() -> TorusGrid {
        TorusGrid::new(64).unwrap()
    }

    #[test]
    fn leq_identity_well_inside() {
        let f = ScalarField::from_fn(grid(), |x, _| x.cos());
        let p = LpProjector::leq(3).apply(&f);
        assert!(p.sub(&f).linf() < 1e-13);
    }

    #[test]
    fn leq_kills_far_outside() {
        // mode |k| = 2^{q+2} with leq at q
        let f = ScalarField::from_fn(grid(), |x, _| (8.0 * x).cos());
        let p = LpProjector::leq(1).apply(&f);
        assert!(p.linf() < 1e-13);
    }

    #[test]
    fn telescoping_partition() {
        let f = ScalarField::random_band_limited(grid(), 21.0, 5);
        let q0 = -1;
        let (_, qmax) = shell_range(64);
        let mut acc = LpProjector::leq(q0).apply(&f);
        for q in q0..=qmax {
            acc = acc.add(&LpProjector::shell(q).apply(&f));
        }
        assert!(acc.sub(&f).linf() < 1e-12 * f.linf().max(1.0));
    }

    #[test]
    fn shells_far_apart_are_orthogonal() {
        let f = ScalarField::random_band_limited(grid(), 21.0, 9);
        for q in 0..4 {
            for qp in (q + 2)..6 {
                let a = LpProjector::shell(q).apply(&f);
                let b = LpProjector::shell(qp).apply(&a);
                assert!(b.linf() < 1e-13, "q={q} q'={qp}");
            }
        }
    }

    #[test]
    fn approx_fixes_shell() {
        // P_q = P_q P_{~q}
        let f = ScalarField::random_band_limited(grid(), 21.0, 11);
        for q in 1..4 {
            let shell = LpProjector::shell(q).apply(&f);
            let both = LpProjector::approx(q).apply(&shell);
            assert!(shell.sub(&both).linf() < 1e-12);
        }
    }
}
