//! Smooth cutoff machinery: the C-infinity transition, radial bumps, the
//! squared partition of unity in time, wide cutoffs, energy profiles, and
//! the disjoint-support oscillator family.

use std::sync::OnceLock;

/// The standard compactly supported bump `exp(-1/(1-t^2))` on (-1, 1).
#[inline]
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

const STEPS: usize = 8192;

struct TransitionTable {
    cdf: Vec<f64>,
    total: f64,
}

fn transition_table() -> &'static TransitionTable {
    static TABLE: OnceLock<TransitionTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        // cumulative Simpson over [-1, 1] of the bump
        let m = 2 * STEPS;
        let h = 2.0 / m as f64;
        let mut cdf = vec![0.0; m + 1];
        for i in 0..STEPS {
            let a = -1.0 + (2 * i) as f64 * h;
            let s = h / 3.0 * (bump(a) + 4.0 * bump(a + h) + bump(a + 2.0 * h));
            cdf[2 * i + 1] = cdf[2 * i]
                + h / 12.0 * (5.0 * bump(a) + 8.0 * bump(a + h) - bump(a + 2.0 * h));
            cdf[2 * i + 2] = cdf[2 * i] + s;
        }
        let total = cdf[m];
        TransitionTable { cdf, total }
    })
}

/// Smooth transition `S`: 0 for x <= 0, 1 for x >= 1, strictly increasing
/// in between, built from the bump's cumulative integral. Satisfies
/// `S(x) + S(1-x) = 1` to roundoff, which makes the squared partitions
/// below exact.
pub fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let t = transition_table();
    let u = 2.0 * x - 1.0; // in (-1, 1)
    let pos = (u + 1.0) / 2.0 * (t.cdf.len() - 1) as f64;
    let i = (pos.floor() as usize).min(t.cdf.len() - 2);
    let frac = pos - i as f64;
    let h = 2.0 / (t.cdf.len() - 1) as f64;
    let (a, b) = (-1.0 + i as f64 * h, -1.0 + (i + 1) as f64 * h);
    // cubic Hermite with exact endpoint slopes
    let (y0, y1) = (t.cdf[i], t.cdf[i + 1]);
    let (d0, d1) = (bump(a) * h, bump(b) * h);
    let f2 = frac * frac;
    let f3 = f2 * frac;
    let val = (2.0 * f3 - 3.0 * f2 + 1.0) * y0
        + (f3 - 2.0 * f2 + frac) * d0
        + (-2.0 * f3 + 3.0 * f2) * y1
        + (f3 - f2) * d1;
    val / t.total
}

/// Derivative of `transition`.
pub fn transition_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let t = transition_table();
    2.0 * bump(2.0 * x - 1.0) / t.total
}

/// Radial profile for Littlewood-Paley projections: 1 on r <= 1/2,
/// 0 on r >= 1.
#[inline]
pub fn lp_profile(r: f64) -> f64 {
    1.0 - transition(2.0 * r - 1.0)
}

/// Plateau bump: 1 on `[lo, hi]`, 0 outside `[lo - ramp, hi + ramp]`.
#[inline]
pub fn plateau(t: f64, lo: f64, hi: f64, ramp: f64) -> f64 {
    if t < lo {
        transition((t - (lo - ramp)) / ramp)
    } else if t > hi {
        transition(((hi + ramp) - t) / ramp)
    } else {
        1.0
    }
}

pub fn plateau_deriv(t: f64, lo: f64, hi: f64, ramp: f64) -> f64 {
    if t < lo {
        transition_deriv((t - (lo - ramp)) / ramp) / ramp
    } else if t > hi {
        -transition_deriv(((hi + ramp) - t) / ramp) / ramp
    } else {
        0.0
    }
}

/// Squared partition of unity in time: cutoffs `chi_k(t) = chi(t/tau - k)`
/// with `sum_k chi_k^2 = 1`, `supp chi` in [-2/3, 2/3] (inside the required
/// [-4/5, 4/5]) and `chi = 1` on [-1/3, 1/3].
#[derive(Clone, Copy, Debug)]
pub struct CutoffFamily {
    pub tau: f64,
}

impl CutoffFamily {
    pub fn new(tau: f64) -> Self {
        assert!(tau > 0.0);
        CutoffFamily { tau }
    }

    /// `chi^2` as a function of the unit-scaled offset.
    fn chi_sq_unit(u: f64) -> f64 {
        let a = u.abs();
        if a <= 1.0 / 3.0 {
            1.0
        } else if a >= 2.0 / 3.0 {
            0.0
        } else {
            transition(2.0 - 3.0 * a)
        }
    }

    pub fn chi_sq(&self, k: i64, t: f64) -> f64 {
        Self::chi_sq_unit(t / self.tau - k as f64)
    }

    pub fn chi(&self, k: i64, t: f64) -> f64 {
        self.chi_sq(k, t).sqrt()
    }

    /// Wide cutoff: 1 on `[k tau - 7tau/8, k tau + 7tau/8]`, support inside
    /// `(k tau - tau, k tau + tau)`.
    pub fn chi_wide(&self, k: i64, t: f64) -> f64 {
        let u = (t / self.tau - k as f64).abs();
        plateau(u, 0.0, 7.0 / 8.0, 3.0 / 32.0)
    }

    pub fn chi_wide_deriv(&self, k: i64, t: f64) -> f64 {
        let u = t / self.tau - k as f64;
        let s = if u >= 0.0 { 1.0 } else { -1.0 };
        s * plateau_deriv(u.abs(), 0.0, 7.0 / 8.0, 3.0 / 32.0) / self.tau
    }

    /// Indices whose wide cutoff can be nonzero at `t`.
    pub fn active_indices(&self, t: f64) -> Vec<i64> {
        let c = t / self.tau;
        let lo = (c - 1.0).ceil() as i64;
        let hi = (c + 1.0).floor() as i64;
        (lo..=hi).collect()
    }

    /// Index range needed to cover `[t0, t1]`.
    pub fn index_range(&self, t0: f64, t1: f64) -> (i64, i64) {
        ((t0 / self.tau - 1.0).floor() as i64, (t1 / self.tau + 1.0).ceil() as i64)
    }
}

/// Stage energy profile: equals `level` on the plateau `[lo, hi]` and
/// falls to zero over a `2 tau` ramp.
#[derive(Clone, Copy, Debug)]
pub struct EnergyProfile {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub ramp: f64,
}

impl EnergyProfile {
    pub fn eval(&self, t: f64) -> f64 {
        self.level * plateau(t, self.lo, self.hi, self.ramp)
    }

    pub fn sqrt_eval(&self, t: f64) -> f64 {
        self.eval(t).max(0.0).sqrt()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo - self.ramp, self.hi + self.ramp)
    }
}

/// Smooth 1-periodic oscillators with unit mean square and pairwise
/// disjoint supports, one per `(direction, parity, stage)` label, plus the
/// antiderivative `h(T) = ∫_0^T (1 - g^2)`.
pub struct OscillatorFamily {
    pub stages: usize,
    labels: usize,
    norm: Vec<f64>,
    // cumulative integral of g^2 over one period, per label, on a uniform grid
    cdf: Vec<Vec<f64>>,
}

const OSC_GRID: usize = 8192;

impl OscillatorFamily {
    /// `stages = Γ`; labels are (2 directions) x (2 parities) x Γ.
    pub fn build(stages: usize) -> Self {
        assert!(stages >= 1 && stages <= 8, "oscillator depth limited to 8");
        let labels = 4 * stages;
        let mut norm = Vec::with_capacity(labels);
        let mut cdf = Vec::with_capacity(labels);
        for l in 0..labels {
            // raw bump on the label's window, then L2-normalize over [0,1]
            let raw_sq_integral = {
                let (c, hw) = Self::window(l, labels);
                // Gauss-Legendre would do; composite Simpson at this
                // resolution is already far below 1e-12
                let m = 4096;
                let h = 2.0 * hw / m as f64;
                let mut s = 0.0;
                for i in 0..m / 2 {
                    let a = c - hw + (2 * i) as f64 * h;
                    let f = |x: f64| bump((x - c) / hw).powi(2);
                    s += h / 3.0 * (f(a) + 4.0 * f(a + h) + f(a + 2.0 * h));
                }
                s
            };
            let scale = 1.0 / raw_sq_integral.sqrt();
            norm.push(scale);
            // cumulative g^2 on the period grid
            let mut c_acc = vec![0.0; OSC_GRID + 1];
            let h = 1.0 / OSC_GRID as f64;
            let gsq = |x: f64| {
                let (c, hw) = Self::window(l, labels);
                let b = bump((x - c) / hw) * scale;
                b * b
            };
            for i in 0..OSC_GRID / 2 {
                let a = (2 * i) as f64 * h;
                let s = h / 3.0 * (gsq(a) + 4.0 * gsq(a + h) + gsq(a + 2.0 * h));
                c_acc[2 * i + 1] = c_acc[2 * i]
                    + h / 12.0 * (5.0 * gsq(a) + 8.0 * gsq(a + h) - gsq(a + 2.0 * h));
                c_acc[2 * i + 2] = c_acc[2 * i] + s;
            }
            // rescale so the full-period integral is exactly 1
            let total = c_acc[OSC_GRID];
            for v in c_acc.iter_mut() {
                *v /= total;
            }
            let extra = 1.0 / total;
            cdf.push(c_acc);
            // fold the cdf normalization back into the amplitude
            let last = norm.last_mut().unwrap();
            *last *= extra.sqrt();
        }
        OscillatorFamily {
            stages,
            labels,
            norm,
            cdf,
        }
    }

    fn window(label: usize, labels: usize) -> (f64, f64) {
        let w = 1.0 / labels as f64;
        let margin = w / 8.0;
        let lo = label as f64 * w + margin;
        let hi = (label + 1) as f64 * w - margin;
        ((lo + hi) / 2.0, (hi - lo) / 2.0)
    }

    pub fn label(&self, f_idx: usize, parity: usize, stage: usize) -> usize {
        debug_assert!(f_idx < 2 && parity < 2 && stage < self.stages);
        (stage * 2 + f_idx) * 2 + parity
    }

    pub fn num_labels(&self) -> usize {
        self.labels
    }

    /// `g_label(s)`, 1-periodic.
    pub fn g(&self, label: usize, s: f64) -> f64 {
        let x = s.rem_euclid(1.0);
        let (c, hw) = Self::window(label, self.labels);
        bump((x - c) / hw) * self.norm[label]
    }

    /// `h(T) = ∫_0^T (1 - g^2)`, 1-periodic since `∫_0^1 g^2 = 1`.
    pub fn h(&self, label: usize, s: f64) -> f64 {
        let x = s.rem_euclid(1.0);
        let whole = s - x; // integer part; ∫ over whole periods is 0
        let _ = whole;
        x - self.cdf_eval(label, x)
    }

    fn cdf_eval(&self, label: usize, x: f64) -> f64 {
        let c = &self.cdf[label];
        let pos = x * OSC_GRID as f64;
        let i = (pos.floor() as usize).min(OSC_GRID - 1);
        let frac = pos - i as f64;
        let h = 1.0 / OSC_GRID as f64;
        let grid_x = |k: usize| k as f64 * h;
        let g0 = self.g(label, grid_x(i));
        let g1 = self.g(label, grid_x(i + 1));
        let (y0, y1) = (c[i], c[i + 1]);
        let (d0, d1) = (g0 * g0 * h, g1 * g1 * h);
        let f2 = frac * frac;
        let f3 = f2 * frac;
        (2.0 * f3 - 3.0 * f2 + 1.0) * y0
            + (f3 - 2.0 * f2 + frac) * d0
            + (-2.0 * f3 + 3.0 * f2) * y1
            + (f3 - f2) * d1
    }

    /// Whether `g_label(s)` can be nonzero.
    pub fn is_active(&self, label: usize, s: f64) -> bool {
        let x = s.rem_euclid(1.0);
        let (c, hw) = Self::window(label, self.labels);
        (x - c).abs() < hw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_complement_exact() {
        for &x in &[0.1, 0.25, 0.5, 0.77, 0.999] {
            let s = transition(x) + transition(1.0 - x);
            assert!((s - 1.0).abs() < 1e-13, "x={x}: {s}");
        }
        assert_eq!(transition(0.0), 0.0);
        assert_eq!(transition(1.0), 1.0);
    }

    #[test]
    fn chi_squared_partition() {
        let fam = CutoffFamily::new(0.3);
        for i in 0..200 {
            let t = -1.0 + i as f64 * 0.017;
            let s: f64 = (-10..10).map(|k| fam.chi_sq(k, t)).sum();
            assert!((s - 1.0).abs() < 1e-12, "t={t}: {s}");
        }
    }

    #[test]
    fn wide_cutoff_dominates() {
        let fam = CutoffFamily::new(0.5);
        for i in 0..100 {
            let t = -0.6 + i as f64 * 0.012;
            for k in -2..=2 {
                let c = fam.chi_sq(k, t);
                if c > 0.0 {
                    assert!((fam.chi_wide(k, t) - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn oscillators_unit_mass_disjoint_periodic() {
        let fam = OscillatorFamily::build(2);
        let m = 20000;
        for l in 0..fam.num_labels() {
            let mut s = 0.0;
            for i in 0..m {
                let x = (i as f64 + 0.5) / m as f64;
                s += fam.g(l, x).powi(2) / m as f64;
            }
            assert!((s - 1.0).abs() < 1e-6, "label {l}: {s}"); // midpoint-rule check
            // h periodicity: h(T+1) = h(T)
            for &t in &[0.13, 0.77, 2.4] {
                assert!((fam.h(l, t + 1.0) - fam.h(l, t)).abs() < 1e-12);
            }
            assert!(fam.h(l, 1.0).abs() < 1e-12);
        }
        // disjoint supports
        for a in 0..fam.num_labels() {
            for b in 0..a {
                for i in 0..m {
                    let x = i as f64 / m as f64;
                    assert!(fam.g(a, x) * fam.g(b, x) == 0.0);
                }
            }
        }
    }

    #[test]
    fn h_matches_quadrature() {
        let fam = OscillatorFamily::build(1);
        // trapezoid oracle at high resolution
        let m = 400000;
        let mut acc = 0.0;
        let t_target = 0.6;
        let dt = t_target / m as f64;
        for i in 0..m {
            let x0 = i as f64 * dt;
            let x1 = x0 + dt;
            let f0 = 1.0 - fam.g(0, x0).powi(2);
            let f1 = 1.0 - fam.g(0, x1).powi(2);
            acc += 0.5 * (f0 + f1) * dt;
        }
        assert!(
            (fam.h(0, t_target) - acc).abs() < 1e-8,
            "{} vs {}",
            fam.h(0, t_target),
            acc
        );
    }
}
