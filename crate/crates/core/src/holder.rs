//! Hölder norm measurement via the Littlewood-Paley surrogate.

use crate::field::ScalarField;
use crate::lp::{shell_range, LpProjector};

/// `C^0` norm of `∇_a f` when `alpha = 0`; otherwise the LP surrogate
/// `sup_q 2^{α q} ||P_q ∇_a f||_∞` for the homogeneous seminorm (equivalent
/// to the difference-quotient seminorm up to fixed constants).
pub fn holder_norm(f: &ScalarField, derivs: &[usize], alpha: f64) -> f64 {
    assert!((0.0..1.0).contains(&alpha));
    let mut g = f.clone();
    for &axis in derivs {
        g = g.deriv(axis);
    }
    if alpha == 0.0 {
        return g.linf();
    }
    let (qlo, qhi) = shell_range(f.grid().n());
    let mut best: f64 = 0.0;
    for q in qlo..=qhi {
        let shell = LpProjector::shell(q).apply(&g);
        best = best.max((2.0f64).powi(q).powf(alpha) * shell.linf());
    }
    best
}
