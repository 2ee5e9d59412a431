//! Advection solvers, flow maps, phase-function transport with the
//! linear-plus-periodic splitting, and mollification along the flow.

use crate::error::{Result, SqgError};
use crate::field::{ScalarField, VectorField};
use crate::grid::TorusGrid;
use crate::profiles::bump;
use crate::tensor::TensorField;

/// Divergence-free velocity sampled on uniform time knots with cubic
/// (Catmull-Rom) interpolation in between.
pub struct TimeSampledVelocity {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<VectorField>,
}

impl TimeSampledVelocity {
    pub fn new(t0: f64, dt: f64, samples: Vec<VectorField>) -> Self {
        assert!(dt > 0.0 && samples.len() >= 2);
        TimeSampledVelocity { t0, dt, samples }
    }

    pub fn constant(grid: TorusGrid, v: VectorField, t0: f64, t1: f64) -> Self {
        let _ = grid;
        TimeSampledVelocity {
            t0,
            dt: (t1 - t0).max(1e-9),
            samples: vec![v.clone(), v],
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.samples.len() - 1) as f64
    }

    pub fn grid(&self) -> TorusGrid {
        self.samples[0].grid()
    }

    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(|v| v.linf()).fold(0.0, f64::max)
    }

    /// Largest divergence over the samples (invariant: <= 1e-10 scale).
    pub fn divergence_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| v.divergence().linf())
            .fold(0.0, f64::max)
    }

    fn clamp_index(&self, i: i64) -> usize {
        i.clamp(0, self.samples.len() as i64 - 1) as usize
    }

    /// Catmull-Rom weights over the four knots around `t`.
    fn weights(&self, t: f64) -> ([usize; 4], [f64; 4]) {
        let pos = (t - self.t0) / self.dt;
        let i1 = pos.floor() as i64;
        let s = pos - i1 as f64;
        let idx = [
            self.clamp_index(i1 - 1),
            self.clamp_index(i1),
            self.clamp_index(i1 + 1),
            self.clamp_index(i1 + 2),
        ];
        let s2 = s * s;
        let s3 = s2 * s;
        let w = [
            0.5 * (-s3 + 2.0 * s2 - s),
            0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
            0.5 * (-3.0 * s3 + 4.0 * s2 + s),
            0.5 * (s3 - s2),
        ];
        (idx, w)
    }

    pub fn at(&self, t: f64) -> VectorField {
        let (idx, w) = self.weights(t);
        let grid = self.grid();
        let mut out = VectorField::zeros(grid);
        for (i, wi) in idx.iter().zip(w.iter()) {
            if *wi != 0.0 {
                out = out.add(&self.samples[*i].scale(*wi));
            }
        }
        out
    }

    /// Velocity at an off-grid point (bicubic in space, cubic in time).
    pub fn at_point(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let (idx, w) = self.weights(t);
        let mut out = [0.0; 2];
        for (i, wi) in idx.iter().zip(w.iter()) {
            if *wi == 0.0 {
                continue;
            }
            let v = &self.samples[*i];
            let vx = bicubic(&v.x, x);
            let vy = bicubic(&v.y, x);
            out[0] += wi * vx;
            out[1] += wi * vy;
        }
        out
    }
}

/// Periodic bicubic (4x4 Lagrange) interpolation of a field at `x`.
pub fn bicubic(f: &ScalarField, x: [f64; 2]) -> f64 {
    let grid = f.grid();
    let n = grid.n() as i64;
    let h = grid.spacing();
    let vals = f.values();
    let gx = x[0] / h;
    let gy = x[1] / h;
    let i0 = gx.floor() as i64;
    let j0 = gy.floor() as i64;
    let sx = gx - i0 as f64;
    let sy = gy - j0 as f64;
    let lw = |s: f64| {
        [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ]
    };
    let wx = lw(sx);
    let wy = lw(sy);
    let mut acc = 0.0;
    for a in 0..4 {
        let i = (i0 - 1 + a as i64).rem_euclid(n) as usize;
        for b in 0..4 {
            let j = (j0 - 1 + b as i64).rem_euclid(n) as usize;
            acc += wx[a] * wy[b] * vals[i * (n as usize) + j];
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    SpectralRk4,
    SemiLagrangian,
}

pub fn cfl_limit(grid: TorusGrid, max_speed: f64) -> f64 {
    0.5 * grid.spacing() / max_speed.max(1e-12)
}

/// Advect a scalar: solves `∂_t q + u·∇q = source` from `t0` to `t1`.
/// Time step must satisfy the CFL restriction for the spectral scheme.
pub fn advect(
    field: &ScalarField,
    u: &TimeSampledVelocity,
    t0: f64,
    t1: f64,
    scheme: Scheme,
    dt: f64,
    source: Option<&dyn Fn(f64) -> ScalarField>,
) -> Result<ScalarField> {
    let limit = cfl_limit(field.grid(), u.max_speed());
    if dt > limit {
        return Err(SqgError::Cfl { dt, limit });
    }
    if t1 == t0 {
        return Ok(field.clone());
    }
    let span = t1 - t0;
    let steps = (span.abs() / dt).ceil().max(1.0) as usize;
    let step = span / steps as f64;
    let mut q = field.clone();
    let mut t = t0;
    match scheme {
        Scheme::SpectralRk4 => {
            for _ in 0..steps {
                q = rk4_step(&q, u, t, step, source);
                t += step;
            }
        }
        Scheme::SemiLagrangian => {
            for _ in 0..steps {
                q = semi_lagrangian_step(&q, u, t, step, source);
                t += step;
            }
        }
    }
    Ok(q)
}

fn advect_rhs(
    q: &ScalarField,
    u: &TimeSampledVelocity,
    t: f64,
    source: Option<&dyn Fn(f64) -> ScalarField>,
) -> ScalarField {
    let v = u.at(t);
    let mut rhs = v.advect_scalar(q).scale(-1.0);
    if let Some(s) = source {
        rhs = rhs.add(&s(t));
    }
    rhs
}

fn rk4_step(
    q: &ScalarField,
    u: &TimeSampledVelocity,
    t: f64,
    dt: f64,
    source: Option<&dyn Fn(f64) -> ScalarField>,
) -> ScalarField {
    let k1 = advect_rhs(q, u, t, source);
    let k2 = advect_rhs(&q.lin_comb(1.0, &k1, dt / 2.0), u, t + dt / 2.0, source);
    let k3 = advect_rhs(&q.lin_comb(1.0, &k2, dt / 2.0), u, t + dt / 2.0, source);
    let k4 = advect_rhs(&q.lin_comb(1.0, &k3, dt), u, t + dt, source);
    q.lin_comb(1.0, &k1.add(&k4).add(&k2.scale(2.0)).add(&k3.scale(2.0)), dt / 6.0)
}

fn semi_lagrangian_step(
    q: &ScalarField,
    u: &TimeSampledVelocity,
    t: f64,
    dt: f64,
    source: Option<&dyn Fn(f64) -> ScalarField>,
) -> ScalarField {
    let grid = q.grid();
    let n = grid.n();
    let mut vals = vec![0.0; n * n];
    let s_old = source.map(|s| s(t));
    let s_new = source.map(|s| s(t + dt));
    for i in 0..n {
        for j in 0..n {
            let x = grid.node(i, j);
            // backward characteristic by RK4
            let dep = rk4_point(u, t + dt, x, -dt);
            let mut v = bicubic(q, dep);
            if let (Some(so), Some(sn)) = (&s_old, &s_new) {
                // trapezoidal source pickup along the characteristic
                v += 0.5 * dt * (bicubic(so, dep) + sn.values()[grid.idx(i, j)]);
            }
            vals[grid.idx(i, j)] = v;
        }
    }
    ScalarField::from_values(grid, vals)
}

/// One RK4 step of the characteristic ODE `dx/ds = u(s, x)`.
fn rk4_point(u: &TimeSampledVelocity, t: f64, x: [f64; 2], dt: f64) -> [f64; 2] {
    let k1 = u.at_point(t, x);
    let k2 = u.at_point(
        t + dt / 2.0,
        [x[0] + dt / 2.0 * k1[0], x[1] + dt / 2.0 * k1[1]],
    );
    let k3 = u.at_point(
        t + dt / 2.0,
        [x[0] + dt / 2.0 * k2[0], x[1] + dt / 2.0 * k2[1]],
    );
    let k4 = u.at_point(t + dt, [x[0] + dt * k3[0], x[1] + dt * k3[1]]);
    [
        x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Grid deformation `Φ_s(t, ·)`: node positions after flowing for time `s`
/// along `∂_t + u·∇`.
pub struct FlowMap {
    pub grid: TorusGrid,
    pub positions: Vec<[f64; 2]>,
}

impl FlowMap {
    pub fn identity(grid: TorusGrid) -> Self {
        let n = grid.n();
        let mut positions = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                positions.push(grid.node(i, j));
            }
        }
        FlowMap { grid, positions }
    }

    /// Sample a scalar field at the deformed positions.
    pub fn pull_back(&self, f: &ScalarField) -> ScalarField {
        let vals = self.positions.iter().map(|&x| bicubic(f, x)).collect();
        ScalarField::from_values(self.grid, vals)
    }
}

/// Integrate the flow map of `∂_t + u·∇` from `t` over `s` (either sign),
/// stepping with `|ds| <= dt_max`.
pub fn flow_map(u: &TimeSampledVelocity, t: f64, s: f64, dt_max: f64) -> FlowMap {
    let mut m = FlowMap::identity(u.grid());
    if s == 0.0 {
        return m;
    }
    let steps = (s.abs() / dt_max).ceil().max(1.0) as usize;
    let ds = s / steps as f64;
    let mut cur = t;
    for _ in 0..steps {
        for x in m.positions.iter_mut() {
            *x = rk4_point(u, cur, *x, ds);
        }
        cur += ds;
    }
    m
}

/// Advance an existing deformation by one increment (incremental flow
/// composition for quadrature sweeps).
pub fn flow_map_advance(m: &mut FlowMap, u: &TimeSampledVelocity, t: f64, ds: f64, dt_max: f64) {
    let steps = (ds.abs() / dt_max).ceil().max(1.0) as usize;
    let sub = ds / steps as f64;
    let mut cur = t;
    for _ in 0..steps {
        for x in m.positions.iter_mut() {
            *x = rk4_point(u, cur, *x, sub);
        }
        cur += sub;
    }
}

/// Normalized mollifier quadrature on `[-eps, eps]`: Gauss-Legendre nodes
/// against the standard bump, weights rescaled to sum exactly to one.
pub fn mollifier_quadrature(eps: f64, m: usize) -> Vec<(f64, f64)> {
    // Gauss-Legendre on [-1,1] via Newton iteration on Legendre polynomials
    let mut nodes = Vec::with_capacity(m);
    for k in 0..m {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=m {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push((x, w));
    }
    let mut out: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&(x, w)| (eps * x, w * bump(x)))
        .collect();
    let total: f64 = out.iter().map(|&(_, w)| w).sum();
    for (_, w) in out.iter_mut() {
        *w /= total;
    }
    out
}

/// Mollification along the flow:
/// `R̃(t, x) = ∫ R(t+s, Φ_s(t,x)) η_eps(s) ds`.
///
/// `stress_at` evaluates the time-sampled tensor at arbitrary times inside
/// `[t - eps_t, t + eps_t]`; insufficient coverage must error there.
pub fn mollify_along_flow(
    stress_at: &dyn Fn(f64) -> Result<TensorField>,
    u: &TimeSampledVelocity,
    t: f64,
    eps_t: f64,
    quad_points: usize,
) -> Result<TensorField> {
    let grid = u.grid();
    let quad = mollifier_quadrature(eps_t, quad_points);
    let mut order: Vec<usize> = (0..quad.len()).collect();
    order.sort_by(|&a, &b| quad[a].0.partial_cmp(&quad[b].0).unwrap());
    // sweep negative s then positive s, advancing the deformation
    let neg: Vec<usize> = order.iter().cloned().filter(|&i| quad[i].0 < 0.0).rev().collect();
    let pos: Vec<usize> = order.iter().cloned().filter(|&i| quad[i].0 >= 0.0).collect();
    let dt_max = cfl_limit(grid, u.max_speed()).max(eps_t / 8.0).min(eps_t.max(1e-12));
    let mut acc11 = ScalarField::zeros(grid);
    let mut acc12 = ScalarField::zeros(grid);
    for sweep in [neg, pos] {
        let mut map = FlowMap::identity(grid);
        let mut s_cur = 0.0;
        for idx in sweep {
            let (s, w) = quad[idx];
            flow_map_advance(&mut map, u, t + s_cur, s - s_cur, dt_max);
            s_cur = s;
            let r = stress_at(t + s)?;
            acc11 = acc11.add(&map.pull_back(r.comp(0, 0)).scale(w));
            acc12 = acc12.add(&map.pull_back(r.comp(0, 1)).scale(w));
        }
    }
    Ok(TensorField::sym_trace_free(acc11, acc12))
}

/// Phase function with the linear + periodic splitting
/// `ξ(t, x) = f·x + φ(t, x)`.
pub struct PhaseFunction {
    pub direction: [i64; 2],
    pub birth: f64,
    pub t0: f64,
    pub dt: f64,
    /// periodic parts at uniform knots
    pub phi: Vec<ScalarField>,
}

impl PhaseFunction {
    pub fn grid(&self) -> TorusGrid {
        self.phi[0].grid()
    }

    pub fn knot_time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    fn weights(&self, t: f64) -> ([usize; 4], [f64; 4]) {
        let pos = (t - self.t0) / self.dt;
        let i1 = pos.floor() as i64;
        let s = pos - i1 as f64;
        let cl = |i: i64| i.clamp(0, self.phi.len() as i64 - 1) as usize;
        let idx = [cl(i1 - 1), cl(i1), cl(i1 + 1), cl(i1 + 2)];
        let s2 = s * s;
        let s3 = s2 * s;
        let w = [
            0.5 * (-s3 + 2.0 * s2 - s),
            0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
            0.5 * (-3.0 * s3 + 4.0 * s2 + s),
            0.5 * (s3 - s2),
        ];
        (idx, w)
    }

    /// Periodic part at time `t` (cubic interpolation between knots).
    pub fn phi_at(&self, t: f64) -> ScalarField {
        let (idx, w) = self.weights(t);
        let mut out = ScalarField::zeros(self.grid());
        for (i, wi) in idx.iter().zip(w.iter()) {
            if *wi != 0.0 {
                out = out.add(&self.phi[*i].scale(*wi));
            }
        }
        out
    }

    /// Full phase gradient `∇ξ = f + ∇φ` at time `t`.
    pub fn grad_xi(&self, t: f64) -> VectorField {
        let phi = self.phi_at(t);
        let g = phi.grad();
        VectorField::new(
            g.x.map(|v| v + self.direction[0] as f64),
            g.y.map(|v| v + self.direction[1] as f64),
        )
    }
}

/// Transport the phase `(∂_t + u·∇)ξ = 0`, `ξ(birth) = f·x`, storing the
/// periodic part `φ` (which solves `∂_t φ + u·∇φ = -u·f`, `φ(birth) = 0`)
/// on knots spanning `[birth - half_window, birth + half_window]`.
pub fn transport_phase(
    direction: [i64; 2],
    birth: f64,
    u: &TimeSampledVelocity,
    half_window: f64,
    knot_dt: f64,
    substep_dt: f64,
) -> Result<PhaseFunction> {
    let limit = cfl_limit(u.grid(), u.max_speed());
    if substep_dt > limit {
        return Err(SqgError::Cfl {
            dt: substep_dt,
            limit,
        });
    }
    let need_lo = birth - half_window;
    let need_hi = birth + half_window;
    if need_lo < u.t0 - 1e-9 || need_hi > u.t_end() + 1e-9 {
        return Err(SqgError::TimeCoverage {
            have_lo: u.t0,
            have_hi: u.t_end(),
            need_lo,
            need_hi,
        });
    }
    let knots_half = (half_window / knot_dt).ceil() as usize;
    let total = 2 * knots_half + 1;
    let f = [direction[0] as f64, direction[1] as f64];
    // -u·f: the source that keeps f·x + φ transported
    let source = move |t: f64| -> ScalarField {
        let v = u.at(t);
        v.x.scale(-f[0]).add(&v.y.scale(-f[1]))
    };
    let mut phi = vec![ScalarField::zeros(u.grid()); total];
    // forward from the birth knot
    let mut cur = ScalarField::zeros(u.grid());
    phi[knots_half] = cur.clone();
    for i in (knots_half + 1)..total {
        let t_from = birth + (i as i64 - 1 - knots_half as i64) as f64 * knot_dt;
        cur = advect(
            &cur,
            u,
            t_from,
            t_from + knot_dt,
            Scheme::SpectralRk4,
            substep_dt,
            Some(&source),
        )?;
        phi[i] = cur.clone();
    }
    // backward
    cur = ScalarField::zeros(u.grid());
    for i in (0..knots_half).rev() {
        let t_from = birth + (i as i64 + 1 - knots_half as i64) as f64 * knot_dt;
        cur = advect(
            &cur,
            u,
            t_from,
            t_from - knot_dt,
            Scheme::SpectralRk4,
            substep_dt,
            Some(&source),
        )?;
        phi[i] = cur.clone();
    }
    Ok(PhaseFunction {
        direction,
        birth,
        t0: birth - knots_half as f64 * knot_dt,
        dt: knot_dt,
        phi,
    })
}

/// Sup-norm of `∇ξ_a - ∇ξ_b` per knot of `a`. Requires equal birth data.
pub fn phase_deviation(a: &PhaseFunction, b: &PhaseFunction) -> Result<Vec<(f64, f64)>> {
    if a.direction != b.direction || (a.birth - b.birth).abs() > 1e-12 {
        return Err(SqgError::PhaseBirthMismatch);
    }
    let mut out = Vec::new();
    for i in 0..a.phi.len() {
        let t = a.knot_time(i);
        let ga = a.grad_xi(t);
        let gb = b.grad_xi(t);
        out.push((t, ga.sub(&gb).linf()));
    }
    Ok(out)
}
