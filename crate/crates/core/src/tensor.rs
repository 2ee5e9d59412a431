//! 2x2 tensor fields with optional symmetry and trace-free structure.

use crate::field::{ScalarField, VectorField};
use crate::grid::TorusGrid;

/// Tensor field on the torus, components indexed `(j, l)` row-major.
///
/// Symmetry and trace-freeness are enforced structurally by the
/// constructors, not merely flagged: `sym_trace_free` stores `c22 = -c11`
/// exactly, `symmetric` stores `c21 = c12` exactly.
#[derive(Clone, Debug)]
pub struct TensorField {
    comps: [ScalarField; 4],
    symmetric: bool,
    trace_free: bool,
}

impl TensorField {
    pub fn general(c11: ScalarField, c12: ScalarField, c21: ScalarField, c22: ScalarField) -> Self {
        assert_eq!(c11.grid(), c12.grid());
        assert_eq!(c11.grid(), c21.grid());
        assert_eq!(c11.grid(), c22.grid());
        TensorField {
            comps: [c11, c12, c21, c22],
            symmetric: false,
            trace_free: false,
        }
    }

    pub fn symmetric(c11: ScalarField, c12: ScalarField, c22: ScalarField) -> Self {
        let c21 = c12.clone();
        TensorField {
            comps: [c11, c12, c21, c22],
            symmetric: true,
            trace_free: false,
        }
    }

    /// Symmetric and trace-free: determined by the two fields `c11, c12`.
    pub fn sym_trace_free(c11: ScalarField, c12: ScalarField) -> Self {
        let c22 = c11.scale(-1.0);
        let c21 = c12.clone();
        TensorField {
            comps: [c11, c12, c21, c22],
            symmetric: true,
            trace_free: true,
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::sym_trace_free(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    /// Constant symmetric trace-free tensor.
    pub fn constant_sym_trace_free(grid: TorusGrid, c11: f64, c12: f64) -> Self {
        Self::sym_trace_free(
            ScalarField::from_fn(grid, |_, _| c11),
            ScalarField::from_fn(grid, |_, _| c12),
        )
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.comps[0].grid()
    }

    #[inline]
    pub fn comp(&self, j: usize, l: usize) -> &ScalarField {
        &self.comps[2 * j + l]
    }

    #[inline]
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    #[inline]
    pub fn is_trace_free(&self) -> bool {
        self.trace_free
    }

    pub fn trace(&self) -> ScalarField {
        self.comp(0, 0).add(self.comp(1, 1))
    }

    /// `∇_j out^{jl}` (divergence over the first index).
    pub fn divergence(&self) -> VectorField {
        VectorField::new(
            self.comp(0, 0).deriv(0).add(&self.comp(1, 0).deriv(1)),
            self.comp(0, 1).deriv(0).add(&self.comp(1, 1).deriv(1)),
        )
    }

    /// `∇_j ∇_l out^{jl}`.
    pub fn div_div(&self) -> ScalarField {
        self.divergence().divergence()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        if self.symmetric && self.trace_free {
            Self::sym_trace_free(self.comps[0].scale(c), self.comps[1].scale(c))
        } else if self.symmetric {
            Self::symmetric(
                self.comps[0].scale(c),
                self.comps[1].scale(c),
                self.comps[3].scale(c),
            )
        } else {
            Self::general(
                self.comps[0].scale(c),
                self.comps[1].scale(c),
                self.comps[2].scale(c),
                self.comps[3].scale(c),
            )
        }
    }

    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        if self.symmetric && self.trace_free && other.symmetric && other.trace_free {
            Self::sym_trace_free(
                self.comps[0].lin_comb(a, &other.comps[0], b),
                self.comps[1].lin_comb(a, &other.comps[1], b),
            )
        } else if self.symmetric && other.symmetric {
            Self::symmetric(
                self.comps[0].lin_comb(a, &other.comps[0], b),
                self.comps[1].lin_comb(a, &other.comps[1], b),
                self.comps[3].lin_comb(a, &other.comps[3], b),
            )
        } else {
            Self::general(
                self.comps[0].lin_comb(a, &other.comps[0], b),
                self.comps[1].lin_comb(a, &other.comps[1], b),
                self.comps[2].lin_comb(a, &other.comps[2], b),
                self.comps[3].lin_comb(a, &other.comps[3], b),
            )
        }
    }

    /// Multiply every component by a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        if self.symmetric && self.trace_free {
            Self::sym_trace_free(self.comps[0].mul(s), self.comps[1].mul(s))
        } else if self.symmetric {
            Self::symmetric(self.comps[0].mul(s), self.comps[1].mul(s), self.comps[3].mul(s))
        } else {
            Self::general(
                self.comps[0].mul(s),
                self.comps[1].mul(s),
                self.comps[2].mul(s),
                self.comps[3].mul(s),
            )
        }
    }

    pub fn linf(&self) -> f64 {
        self.comps.iter().map(|c| c.linf()).fold(0.0, f64::max)
    }

    /// Max-norm of the symmetry defect `|c12 - c21|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.comps[1].sub(&self.comps[2]).linf()
    }

    /// Max-norm of the trace.
    pub fn trace_defect(&self) -> f64 {
        self.trace().linf()
    }

    pub fn resample(&self, m: usize) -> crate::error::Result<Self> {
        if self.symmetric && self.trace_free {
            Ok(Self::sym_trace_free(
                self.comps[0].resample(m)?,
                self.comps[1].resample(m)?,
            ))
        } else if self.symmetric {
            Ok(Self::symmetric(
                self.comps[0].resample(m)?,
                self.comps[1].resample(m)?,
                self.comps[3].resample(m)?,
            ))
        } else {
            Ok(Self::general(
                self.comps[0].resample(m)?,
                self.comps[1].resample(m)?,
                self.comps[2].resample(m)?,
                self.comps[3].resample(m)?,
            ))
        }
    }
}
