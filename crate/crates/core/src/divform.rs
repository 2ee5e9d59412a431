//! The divergence form principle: frequency-localized bilinear convolution
//! kernels for odd and even multipliers, the biconvolution engine, and the
//! paraproduct anti-divergence used by the transport-elliptic solve.
//!
//! For a multiplier `m` of homogeneity `β`, smooth away from 0, the kernel
//!
//! `K̂^{jl}(ζ,η) = χ1(ζ) χ2(η) (-i) ∫_0^1 ∇^j m_reg^l(σζ - (1-σ)η) dσ`
//!
//! satisfies, exactly on band-limited data,
//!
//! `∇_j [K^{jl} * [f,g]] = (O P1 f)(P2 g) + (P1 f)(O P2 g)`  (odd `m`)
//! `∇_j [K^{jl} * [f,g]] = (O P1 f)(P2 g) - (P1 f)(O P2 g)`  (even `m`)
//!
//! where `m_reg` agrees with `m` on the localizer supports and vanishes
//! smoothly near the origin, so the σ-line integrand is never singular.

use crate::error::{Result, SqgError};
use crate::field::{ScalarField, VectorField};
use crate::grid::TorusGrid;
use crate::lp::LpProjector;
use crate::profiles::{transition, transition_deriv};
use crate::sqg::{sqg_symbol, sqg_symbol_grad_im};
use crate::tensor::TensorField;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Multipliers the construction needs in divergence form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivformMultiplier {
    /// `T^l` (degree 0, odd).
    Velocity,
    /// `∇_a T^l` with the `a` index contracted against a vector input
    /// (degree 1, even).
    GradVelocity,
}

impl DivformMultiplier {
    pub fn parity(&self) -> Parity {
        match self {
            DivformMultiplier::Velocity => Parity::Odd,
            DivformMultiplier::GradVelocity => Parity::Even,
        }
    }

    pub fn degree(&self) -> f64 {
        match self {
            DivformMultiplier::Velocity => 0.0,
            DivformMultiplier::GradVelocity => 1.0,
        }
    }

    /// Number of input slots contracted on `f`: 1 for a scalar input,
    /// 2 for the vector input of `∇_a T^l`.
    fn input_components(&self) -> usize {
        match self {
            DivformMultiplier::Velocity => 1,
            DivformMultiplier::GradVelocity => 2,
        }
    }

    /// Symbol value `m^l_{(a)}(p)`; `a` is ignored for scalar-input kinds.
    pub fn symbol(&self, a: usize, l: usize, p: [f64; 2]) -> Complex64 {
        match self {
            DivformMultiplier::Velocity => sqg_symbol(p)[l],
            DivformMultiplier::GradVelocity => Complex64::new(0.0, p[a]) * sqg_symbol(p)[l],
        }
    }

    /// Gradient `∇^j m^l_{(a)}(p)`.
    fn symbol_grad(&self, a: usize, j: usize, l: usize, p: [f64; 2]) -> Complex64 {
        let g = sqg_symbol_grad_im(p);
        match self {
            DivformMultiplier::Velocity => Complex64::new(0.0, g[j][l]),
            DivformMultiplier::GradVelocity => {
                // m_(a)^l = i p_a (i Im^l) = -p_a Im^l  (real, even)
                let im_l = sqg_symbol(p)[l].im;
                let delta = if a == j { 1.0 } else { 0.0 };
                Complex64::new(-(delta * im_l + p[a] * g[j][l]), 0.0)
            }
        }
    }
}

/// Frequency localizer symbols.
#[derive(Clone, Copy, Debug)]
pub enum Localizer {
    /// 1 on `lo <= |ξ| <= hi`, 0 outside `[lo/2, 2 hi]`.
    Annulus { lo: f64, hi: f64 },
    /// The Littlewood-Paley shell symbol at level `q`.
    Shell { q: i32 },
    /// 1 on `|ξ - center| <= radius`, 0 beyond `(1 + margin) radius`.
    Ball {
        center: [f64; 2],
        radius: f64,
        margin: f64,
    },
}

impl Localizer {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        match *self {
            Localizer::Annulus { lo, hi } => {
                if r == 0.0 {
                    0.0
                } else if r < lo {
                    transition((r - lo / 2.0) / (lo / 2.0))
                } else if r > hi {
                    1.0 - transition((r - hi) / hi)
                } else {
                    1.0
                }
            }
            Localizer::Shell { q } => LpProjector::shell(q).symbol(r),
            Localizer::Ball {
                center,
                radius,
                margin,
            } => {
                let d = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                if d <= radius {
                    1.0
                } else {
                    1.0 - transition((d - radius) / (radius * margin))
                }
            }
        }
    }

    /// Smallest `|ξ|` at which the symbol can be nonzero (sets the
    /// regularization radius of `m_reg`).
    pub fn min_active_radius(&self) -> f64 {
        match *self {
            Localizer::Annulus { lo, .. } => lo / 2.0,
            Localizer::Shell { q } => (2.0f64).powi(q - 1),
            Localizer::Ball {
                center,
                radius,
                margin,
            } => {
                let c = (center[0] * center[0] + center[1] * center[1]).sqrt();
                (c - radius * (1.0 + margin)).max(0.0)
            }
        }
    }
}

/// A frequency-pair kernel symbol with its localizers and σ-integral cache.
pub struct BilinearKernel {
    pub multiplier: DivformMultiplier,
    pub chi1: Localizer,
    pub chi2: Localizer,
    /// `m_reg = m` for `|p| >= reg_radius`, smoothly zero below half that.
    pub reg_radius: f64,
    cache: Mutex<HashMap<[i64; 4], [[Complex64; 2]; 2]>>,
}

/// Build the kernel for a declared-parity multiplier. Rejects a parity
/// declaration that does not match the multiplier.
pub fn divform_kernel(
    multiplier: DivformMultiplier,
    parity: Parity,
    chi1: Localizer,
    chi2: Localizer,
) -> Result<BilinearKernel> {
    if multiplier.parity() != parity {
        return Err(SqgError::Inadmissible(format!(
            "multiplier {multiplier:?} has parity {:?}, declared {parity:?}",
            multiplier.parity()
        )));
    }
    let r0 = chi1
        .min_active_radius()
        .min(chi2.min_active_radius())
        .max(0.25);
    Ok(BilinearKernel {
        multiplier,
        chi1,
        chi2,
        reg_radius: r0,
        cache: Mutex::new(HashMap::new()),
    })
}

impl BilinearKernel {
    /// ramp that is 1 for `|p| >= reg_radius`, 0 for `|p| <= reg_radius/2`.
    fn ramp(&self, r: f64) -> f64 {
        transition((r - self.reg_radius / 2.0) / (self.reg_radius / 2.0))
    }

    fn ramp_deriv(&self, r: f64) -> f64 {
        transition_deriv((r - self.reg_radius / 2.0) / (self.reg_radius / 2.0))
            / (self.reg_radius / 2.0)
    }

    /// `∇^j m_reg^l_{(a)}(p)` for the product-rule regularized symbol.
    fn grad_reg(&self, a: usize, j: usize, l: usize, p: [f64; 2]) -> Complex64 {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ramp = self.ramp(r);
        let mut out = Complex64::new(0.0, 0.0);
        if ramp > 0.0 {
            out += self.multiplier.symbol_grad(a, j, l, p) * ramp;
        }
        let dr = self.ramp_deriv(r);
        if dr != 0.0 {
            out += self.multiplier.symbol(a, l, p) * (dr * p[j] / r);
        }
        out
    }

    /// Bare σ-integral `∫_0^1 ∇^j m_reg^l(σζ - (1-σ)η) dσ`, cached.
    /// Indices: output `[j][l]` with `a` fixed by the cache key layout
    /// (for GradVelocity the `a` index replaces `j` pairing: see
    /// `sigma_integral_full`).
    fn sigma_integral(&self, a: usize, zeta: [i64; 2], eta: [i64; 2]) -> Result<[[Complex64; 2]; 2]> {
        let key = [
            zeta[0] * 2 + a as i64 * 1_000_003,
            zeta[1],
            eta[0],
            eta[1],
        ];
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let zf = [zeta[0] as f64, zeta[1] as f64];
        let ef = [eta[0] as f64, eta[1] as f64];
        let integrand = |sigma: f64| -> [[Complex64; 2]; 2] {
            let p = [
                sigma * zf[0] - (1.0 - sigma) * ef[0],
                sigma * zf[1] - (1.0 - sigma) * ef[1],
            ];
            let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
            for j in 0..2 {
                for l in 0..2 {
                    m[j][l] = self.grad_reg(a, j, l, p);
                }
            }
            m
        };
        // seed panels at the closest approach of the σ-line to the origin
        let sum = [zf[0] + ef[0], zf[1] + ef[1]];
        let denom = sum[0] * sum[0] + sum[1] * sum[1];
        let mut cuts = vec![0.0, 1.0];
        if denom > 0.0 {
            let s_star = (ef[0] * sum[0] + ef[1] * sum[1]) / denom;
            if s_star > 1e-9 && s_star < 1.0 - 1e-9 {
                let p_star = [
                    s_star * zf[0] - (1.0 - s_star) * ef[0],
                    s_star * zf[1] - (1.0 - s_star) * ef[1],
                ];
                let close = (p_star[0] * p_star[0] + p_star[1] * p_star[1]).sqrt();
                let scale = (zf[0] * zf[0] + zf[1] * zf[1])
                    .max(ef[0] * ef[0] + ef[1] * ef[1])
                    .sqrt();
                if close < 0.1 * scale {
                    cuts.insert(1, s_star);
                }
            }
        }
        let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
        for w in cuts.windows(2) {
            let part = adaptive_panel(&integrand, w[0], w[1], 1e-13, 0)
                .ok_or(SqgError::SigmaQuadrature(zeta, eta))?;
            for j in 0..2 {
                for l in 0..2 {
                    acc[j][l] += part[j][l];
                }
            }
        }
        self.cache.lock().unwrap().insert(key, acc);
        Ok(acc)
    }

    /// Full kernel symbol `K̂^{jl}(ζ,η)` for a scalar-input multiplier, or
    /// the `a`-slice for a vector-input multiplier.
    pub fn eval_hat(&self, a: usize, zeta: [i64; 2], eta: [i64; 2]) -> Result<[[Complex64; 2]; 2]> {
        let zf = [zeta[0] as f64, zeta[1] as f64];
        let ef = [eta[0] as f64, eta[1] as f64];
        let w = self.chi1.eval(zf) * self.chi2.eval(ef);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        if w == 0.0 {
            return Ok(out);
        }
        let raw = self.sigma_integral(a, zeta, eta)?;
        let minus_i = Complex64::new(0.0, -1.0);
        for j in 0..2 {
            for l in 0..2 {
                out[j][l] = minus_i * raw[j][l] * w;
            }
        }
        Ok(out)
    }
}

/// 15-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 15] = [
    -0.9879925180204854,
    -0.9372733924007060,
    -0.8482065834104272,
    -0.7244177313601701,
    -0.5709721726085388,
    -0.3941513470775634,
    -0.2011940939974345,
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.9372733924007060,
    0.9879925180204854,
];
const GL_WEIGHTS: [f64; 15] = [
    0.0307532419961173,
    0.0703660474881081,
    0.1071592204671719,
    0.1395706779261543,
    0.1662692058169939,
    0.1861610000155622,
    0.1984314853271116,
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
];

fn gl15(f: &dyn Fn(f64) -> [[Complex64; 2]; 2], a: f64, b: f64) -> [[Complex64; 2]; 2] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        let v = f(mid + half * x);
        for j in 0..2 {
            for l in 0..2 {
                acc[j][l] += v[j][l] * (w * half);
            }
        }
    }
    acc
}

fn panel_diff(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let mut d = 0.0f64;
    for j in 0..2 {
        for l in 0..2 {
            d = d.max((a[j][l] - b[j][l]).norm());
        }
    }
    d
}

fn adaptive_panel(
    f: &dyn Fn(f64) -> [[Complex64; 2]; 2],
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Option<[[Complex64; 2]; 2]> {
    if depth > 30 {
        return None;
    }
    let whole = gl15(f, a, b);
    let mid = 0.5 * (a + b);
    let left = gl15(f, a, mid);
    let right = gl15(f, mid, b);
    let mut two = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for l in 0..2 {
            two[j][l] = left[j][l] + right[j][l];
        }
    }
    if panel_diff(&whole, &two) <= tol {
        Some(two)
    } else {
        let l = adaptive_panel(f, a, mid, tol / 2.0, depth + 1)?;
        let r = adaptive_panel(f, mid, b, tol / 2.0, depth + 1)?;
        let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
        for j in 0..2 {
            for ll in 0..2 {
                acc[j][ll] = l[j][ll] + r[j][ll];
            }
        }
        Some(acc)
    }
}

/// Nonzero spectral modes of a field, as (signed wavenumbers, coefficient).
fn active_modes(f: &ScalarField, tol: f64) -> Vec<([i64; 2], Complex64)> {
    let n = f.grid().n();
    let s = f.spectrum();
    let mut out = Vec::new();
    for i in 0..n {
        let k1 = crate::fft::wavenumber(i, n);
        for j in 0..n {
            let k2 = crate::fft::wavenumber(j, n);
            let c = s[i * n + j];
            if c.norm() > tol {
                out.push(([k1, k2], c));
            }
        }
    }
    out
}

/// Raw biconvolution: spectra of the four output components
/// `out^{jl}(ξ) = Σ_{ζ+η=ξ} Σ_a K̂_{(a)}^{jl}(ζ,η) f̂_a(ζ) ĝ(η)`.
fn biconvolve_raw(
    k: &BilinearKernel,
    f_slices: &[&ScalarField],
    g: &ScalarField,
) -> Result<[Vec<Complex64>; 4]> {
    let grid = f_slices[0].grid();
    let n = grid.n();
    assert_eq!(g.grid(), grid);
    let mut out = [
        vec![Complex64::new(0.0, 0.0); n * n],
        vec![Complex64::new(0.0, 0.0); n * n],
        vec![Complex64::new(0.0, 0.0); n * n],
        vec![Complex64::new(0.0, 0.0); n * n],
    ];
    // drop exact zeros only; anything below f64 subnormal scale is inert
    let g_modes: Vec<_> = active_modes(g, 0.0)
        .into_iter()
        .filter(|(kk, _)| k.chi2.eval([kk[0] as f64, kk[1] as f64]) != 0.0)
        .collect();
    for (a, fa) in f_slices.iter().enumerate() {
        let f_modes: Vec<_> = active_modes(fa, 0.0)
            .into_iter()
            .filter(|(kk, _)| k.chi1.eval([kk[0] as f64, kk[1] as f64]) != 0.0)
            .collect();
        for (zeta, cf) in &f_modes {
            for (eta, cg) in &g_modes {
                let ks = [zeta[0] + eta[0], zeta[1] + eta[1]];
                let (i, j) = match (grid.index_of(ks[0]), grid.index_of(ks[1])) {
                    (Some(i), Some(j)) => (i, j),
                    _ => {
                        return Err(SqgError::NyquistOverflow(
                            (ks[0].abs().max(ks[1].abs())) as f64,
                        ))
                    }
                };
                let hat = k.eval_hat(a, *zeta, *eta)?;
                let prod = cf * cg;
                for jj in 0..2 {
                    for ll in 0..2 {
                        out[2 * jj + ll][i * n + j] += hat[jj][ll] * prod;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn spectra_to_tensor(grid: TorusGrid, spectra: [Vec<Complex64>; 4]) -> Result<TensorField> {
    // Hermitian-defect check: real tensor output expected
    let n = grid.n();
    let mut scale = 0.0f64;
    for s in spectra.iter() {
        for c in s.iter() {
            scale = scale.max(c.norm());
        }
    }
    for s in spectra.iter() {
        for i in 0..n {
            let k1 = crate::fft::wavenumber(i, n);
            for j in 0..n {
                let k2 = crate::fft::wavenumber(j, n);
                let ni = (-k1).rem_euclid(n as i64) as usize;
                let nj = (-k2).rem_euclid(n as i64) as usize;
                let d = (s[i * n + j] - s[ni * n + nj].conj()).norm();
                if d > 1e-9 * scale + 1e-16 {
                    return Err(SqgError::Inadmissible(format!(
                        "biconvolution output not real: Hermitian defect {d:.3e} at k=({k1},{k2})"
                    )));
                }
            }
        }
    }
    let [s11, s12, s21, s22] = spectra;
    Ok(TensorField::general(
        ScalarField::from_spectrum(grid, s11),
        ScalarField::from_spectrum(grid, s12),
        ScalarField::from_spectrum(grid, s21),
        ScalarField::from_spectrum(grid, s22),
    ))
}

/// Biconvolution for a scalar-input kernel (`Velocity`).
pub fn biconvolve(k: &BilinearKernel, f: &ScalarField, g: &ScalarField) -> Result<TensorField> {
    assert_eq!(k.multiplier.input_components(), 1);
    let spectra = biconvolve_raw(k, &[f], g)?;
    spectra_to_tensor(f.grid(), spectra)
}

/// Biconvolution for the vector-input kernel (`GradVelocity`), contracting
/// the internal index against `f`'s components.
pub fn biconvolve_vec(k: &BilinearKernel, f: &VectorField, g: &ScalarField) -> Result<TensorField> {
    assert_eq!(k.multiplier.input_components(), 2);
    let spectra = biconvolve_raw(k, &[&f.x, &f.y], g)?;
    spectra_to_tensor(f.grid(), spectra)
}

/// Complex-pair biconvolution used by the wave self-interactions: inputs
/// are given as spectra; no realness check (the caller pairs conjugates).
pub fn biconvolve_spectra(
    k: &BilinearKernel,
    grid: TorusGrid,
    f_spec: &[Complex64],
    g_spec: &[Complex64],
) -> Result<[Vec<Complex64>; 4]> {
    let f = ScalarField::from_spectrum(grid, f_spec.to_vec());
    let g = ScalarField::from_spectrum(grid, g_spec.to_vec());
    biconvolve_raw(k, &[&f], &g)
}

/// Apply the SQG velocity map `T^l` to a scalar (helper for identities).
fn velocity_of(f: &ScalarField) -> VectorField {
    crate::sqg::sqg_velocity(f)
}

/// `∇_a T^l` applied to a vector field, contracted over `a`:
/// `out^l = Σ_a ∇_a T^l[z^a]`.
pub fn grad_velocity_contracted(z: &VectorField) -> VectorField {
    let tx = velocity_of(&z.x);
    let ty = velocity_of(&z.y);
    VectorField::new(
        tx.x.deriv(0).add(&ty.x.deriv(1)),
        tx.y.deriv(0).add(&ty.y.deriv(1)),
    )
}

/// Localized projection by a `Localizer` symbol.
pub fn localize(f: &ScalarField, chi: &Localizer) -> ScalarField {
    let n = f.grid().n();
    let s = f.spectrum();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let k1 = crate::fft::wavenumber(i, n) as f64;
        for j in 0..n {
            let k2 = crate::fft::wavenumber(j, n) as f64;
            out[i * n + j] = s[i * n + j] * chi.eval([k1, k2]);
        }
    }
    ScalarField::from_spectrum(f.grid(), out)
}

/// The paraproduct anti-divergence `B^{jl}[z, θ]` with
/// `∇_j B^{jl} = ∇_a T^l[z^a] θ - z^a ∇_a T^l[θ]`.
///
/// Low-high and high-low bands go through the order -1 anti-divergence
/// under a wide frequency bump; the high-high band uses the even-multiplier
/// divergence form principle over the shell pairs (q,q+1), (q+1,q),
/// (q+1,q+1). `q_top` caps the shell range (pass the grid's top level).
pub fn paraproduct_antidiv(
    z: &VectorField,
    theta: &ScalarField,
    q_top: i32,
) -> Result<TensorField> {
    let grid = theta.grid();
    let tol = 1e-10 * theta.linf().max(z.linf()).max(1.0);
    theta.require_mean_zero(tol)?;
    z.x.require_mean_zero(tol)?;
    z.y.require_mean_zero(tol)?;

    // W^l = ∇_a T^l[z^a], G^{al} = ∇_a T^l[θ]
    let w = grad_velocity_contracted(z);
    let t_theta = velocity_of(theta);
    let g_al = [
        t_theta.x.deriv(0), // a=0, l=0
        t_theta.y.deriv(0), // a=0, l=1
        t_theta.x.deriv(1), // a=1, l=0
        t_theta.y.deriv(1), // a=1, l=1
    ];

    let mut acc = TensorField::zeros(grid);

    let shell = |q: i32, f: &ScalarField| LpProjector::shell(q).apply(f);
    let low = |q: i32, f: &ScalarField| LpProjector::leq(q).apply(f);

    // q = -1 brings in the (0,0) diagonal pair; everything below the unit
    // frequency is empty on the integer lattice
    for q in -1..=q_top {
        // Low slots carry `leq(q)` = the sum of shells <= q-1 on mean-zero
        // data, so together with the adjacent-shell pairs below every
        // shell pair (a, b) is covered exactly once.
        // LH: P_{<=q} W^l · P_{q+1} θ  -  P_{<=q} G^{al} · P_{q+1} z^a
        // HL: P_{q+1} W^l · P_{<=q} θ  -  P_{q+1} G^{al} · P_{<=q} z^a
        let mut bands: Vec<VectorField> = Vec::new();
        {
            let theta_hi = shell(q + 1, theta);
            let z_hi = VectorField::new(shell(q + 1, &z.x), shell(q + 1, &z.y));
            let lh_l = |l: usize| {
                let a0 = low(q, w.comp(l)).mul(&theta_hi);
                let b0 = low(q, &g_al[l]).mul(&z_hi.x);
                let b1 = low(q, &g_al[2 + l]).mul(&z_hi.y);
                a0.sub(&b0).sub(&b1)
            };
            bands.push(VectorField::new(lh_l(0), lh_l(1)));
        }
        {
            let theta_lo = low(q, theta);
            let z_lo = VectorField::new(low(q, &z.x), low(q, &z.y));
            let hl_l = |l: usize| {
                let a0 = shell(q + 1, w.comp(l)).mul(&theta_lo);
                let b0 = shell(q + 1, &g_al[l]).mul(&z_lo.x);
                let b1 = shell(q + 1, &g_al[2 + l]).mul(&z_lo.y);
                a0.sub(&b0).sub(&b1)
            };
            bands.push(VectorField::new(hl_l(0), hl_l(1)));
        }
        for band in bands {
            if band.linf() == 0.0 {
                continue;
            }
            let anti = crate::sqg::antidiv_order1(&band)?;
            // one-sided band localization: identically 1 on the band's
            // support (which reaches |ξ+η| = 1 on the lattice but stays
            // below 5·2^q), vanishing above 2^{q+4}
            let cap = |f: &ScalarField| low(q + 4, f);
            let localized =
                TensorField::sym_trace_free(cap(anti.comp(0, 0)), cap(anti.comp(0, 1)));
            acc = acc.add(&localized);
        }

        // HH via the even divergence form principle on adjacent shell pairs
        for (qa, qb) in [(q + 1, q + 1), (q + 1, q), (q, q + 1)] {
            let za = VectorField::new(shell(qa, &z.x), shell(qa, &z.y));
            if za.linf() == 0.0 {
                continue;
            }
            let tb = shell(qb, theta);
            if tb.linf() == 0.0 {
                continue;
            }
            let kernel = divform_kernel(
                DivformMultiplier::GradVelocity,
                Parity::Even,
                Localizer::Shell { q: qa },
                Localizer::Shell { q: qb },
            )?;
            // the kernel sees the full fields; its localizers apply the shells
            let hh = biconvolve_vec(&kernel, z, theta)?;
            acc = acc.add(&hh);
        }
    }
    Ok(acc)
}

/// Direct right-hand side of the paraproduct identity (for verification):
/// `∇_a T^l[z^a] θ - z^a ∇_a T^l[θ]`.
pub fn paraproduct_bracket(z: &VectorField, theta: &ScalarField) -> VectorField {
    let w = grad_velocity_contracted(z);
    let t_theta = velocity_of(theta);
    let g = |a: usize, l: usize| t_theta.comp(l).deriv(a);
    VectorField::new(
        w.x.mul(theta)
            .sub(&z.x.mul(&g(0, 0)))
            .sub(&z.y.mul(&g(1, 0))),
        w.y.mul(theta)
            .sub(&z.x.mul(&g(0, 1)))
            .sub(&z.y.mul(&g(1, 1))),
    )
}
