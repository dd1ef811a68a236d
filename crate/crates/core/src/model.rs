//! Potential families, the N-body potential and mean-field forces.
//!
//! Two potential families are shipped: isotropic quadratic wells and a
//! mollified Coulomb kernel `s * (m^2 + |x|^2)^(-1/2)`. Both are even with
//! analytic gradients and Hessian-vector products, which removes any need
//! for automatic differentiation.

use crate::error::{KinError, Result};
use crate::rng::{stream, NoiseStream};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of samples of the radial Hessian profile used to bound the
/// eigenvalues of a mollified Coulomb kernel.
const RADIAL_SCAN_POINTS: usize = 100_000;
/// Scan radius in units of the mollifier length.
const RADIAL_SCAN_SPAN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Potential {
    /// `(coefficient / 2) |x|^2`
    Quadratic(f64),
    /// `strength * (mollifier^2 + |x|^2)^(-1/2)`, strength >= 0, mollifier > 0.
    MollifiedCoulomb { strength: f64, mollifier: f64 },
}

impl Potential {
    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            Potential::Quadratic(a) => 0.5 * a * r2,
            Potential::MollifiedCoulomb { strength, mollifier } => {
                strength / (mollifier * mollifier + r2).sqrt()
            }
        }
    }

    /// Gradient, accumulated into `out` (same length as `x`).
    pub fn add_gradient(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Potential::Quadratic(a) => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += a * xi;
                }
            }
            Potential::MollifiedCoulomb { strength, mollifier } => {
                let q = mollifier * mollifier + x.iter().map(|v| v * v).sum::<f64>();
                let c = -strength * q.powf(-1.5);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += c * xi;
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_gradient(x, &mut g);
        g
    }

    /// Hessian-vector product `∇²φ(x) u`, accumulated into `out` with weight
    /// `scale`.
    pub fn add_hvp(&self, x: &[f64], u: &[f64], scale: f64, out: &mut [f64]) {
        match *self {
            Potential::Quadratic(a) => {
                for (o, ui) in out.iter_mut().zip(u) {
                    *o += scale * a * ui;
                }
            }
            Potential::MollifiedCoulomb { strength, mollifier } => {
                // ∇²φ = -s q^{-3/2} I + 3 s q^{-5/2} x xᵀ, q = m² + |x|²;
                // smooth at x = 0, no special casing required.
                let q = mollifier * mollifier + x.iter().map(|v| v * v).sum::<f64>();
                let xu: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
                let c1 = -strength * q.powf(-1.5);
                let c2 = 3.0 * strength * q.powf(-2.5) * xu;
                for ((o, ui), xi) in out.iter_mut().zip(u).zip(x) {
                    *o += scale * (c1 * ui + c2 * xi);
                }
            }
        }
    }

    /// Range `[min, max]` of the Hessian eigenvalues over all of space.
    ///
    /// Quadratic: constant Hessian. Mollified Coulomb: deterministic dense
    /// scan of the two radial eigenvalue profiles (the radial curvature
    /// `φ''(r)` and the tangential one `φ'(r)/r`).
    pub fn hessian_eigen_range(&self) -> (f64, f64) {
        match *self {
            Potential::Quadratic(a) => (a, a),
            Potential::MollifiedCoulomb { strength, mollifier } => {
                let m2 = mollifier * mollifier;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for k in 0..RADIAL_SCAN_POINTS {
                    let r = RADIAL_SCAN_SPAN * mollifier * k as f64
                        / (RADIAL_SCAN_POINTS - 1) as f64;
                    let q = m2 + r * r;
                    let radial = strength * (-q.powf(-1.5) + 3.0 * r * r * q.powf(-2.5));
                    let tangential = -strength * q.powf(-1.5);
                    lo = lo.min(radial.min(tangential));
                    hi = hi.max(radial.max(tangential));
                }
                (lo, hi)
            }
        }
    }
}

/// A validated model: potentials plus the convexity constants of the
/// admissibility condition `c2 < c1 / 2`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub v: Potential,
    pub w: Potential,
    /// Convexity lower bound of ∇²V.
    pub c1: f64,
    /// Bound on the negative part of ∇²W.
    pub c2: f64,
    pub hess_v_sup: f64,
    pub hess_w_sup: f64,
}

/// Builds and validates a model.
///
/// Fails when V is not strictly convex (`c1 <= 0`) or when the interaction is
/// too concave (`c2 >= c1 / 2`).
pub fn build_model(d: usize, gamma: f64, sigma: f64, v: Potential, w: Potential) -> Result<ModelSpec> {
    if d == 0 {
        return Err(KinError::Model("dimension must be positive".into()));
    }
    if gamma <= 0.0 || sigma <= 0.0 {
        return Err(KinError::Model(format!(
            "gamma and sigma must be positive (gamma={gamma}, sigma={sigma})"
        )));
    }
    if let Potential::MollifiedCoulomb { strength, mollifier } = v {
        if strength < 0.0 || mollifier <= 0.0 {
            return Err(KinError::Model("invalid mollified Coulomb parameters for V".into()));
        }
    }
    if let Potential::MollifiedCoulomb { strength, mollifier } = w {
        if strength < 0.0 || mollifier <= 0.0 {
            return Err(KinError::Model("invalid mollified Coulomb parameters for W".into()));
        }
    }
    let (v_lo, v_hi) = v.hessian_eigen_range();
    let (w_lo, w_hi) = w.hessian_eigen_range();
    let c1 = v_lo;
    let c2 = (-w_lo).max(0.0);
    if c1 <= 0.0 {
        return Err(KinError::Model(format!(
            "exterior potential is not strictly convex (c1 = {c1})"
        )));
    }
    if c2 >= 0.5 * c1 {
        return Err(KinError::Model(format!(
            "interaction too concave: c2 = {c2} >= c1/2 = {}",
            0.5 * c1
        )));
    }
    Ok(ModelSpec {
        d,
        gamma,
        sigma,
        v,
        w,
        c1,
        c2,
        hess_v_sup: v_lo.abs().max(v_hi.abs()),
        hess_w_sup: w_lo.abs().max(w_hi.abs()),
    })
}

impl ModelSpec {
    pub fn min_convexity(&self) -> f64 {
        self.c1 - 2.0 * self.c2
    }

    /// `true` when both potentials are quadratic (exact Gaussian flows apply).
    pub fn is_quadratic(&self) -> bool {
        matches!(
            (self.v, self.w),
            (Potential::Quadratic(_), Potential::Quadratic(_))
        )
    }

    pub fn quadratic_coefficients(&self) -> Option<(f64, f64)> {
        match (self.v, self.w) {
            (Potential::Quadratic(a), Potential::Quadratic(b)) => Some((a, b)),
            _ => None,
        }
    }
}

/// Positions and velocities of N particles in R^d, plus the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub n: usize,
    pub d: usize,
    /// Positions, row-major `n x d`.
    pub x: Vec<f64>,
    /// Velocities, row-major `n x d`.
    pub y: Vec<f64>,
    pub t: f64,
    /// Completed steps; used to address the noise stream.
    pub step: u64,
}

impl PhaseState {
    pub fn zeros(n: usize, d: usize) -> Self {
        PhaseState {
            n,
            d,
            x: vec![0.0; n * d],
            y: vec![0.0; n * d],
            t: 0.0,
            step: 0,
        }
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.y[i * self.d..(i + 1) * self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite()) && self.y.iter().all(|v| v.is_finite())
    }

    /// Mean position over particles.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.d];
        for i in 0..self.n {
            for (ck, xk) in c.iter_mut().zip(self.position(i)) {
                *ck += xk;
            }
        }
        for ck in c.iter_mut() {
            *ck /= self.n as f64;
        }
        c
    }
}

/// Mean-field force on particle `i`:
/// `∇V(x_i) + (1/N) Σ_j ∇W(x_i - x_j)` (the j = i term is zero since W is
/// even and smooth).
pub fn mean_field_force(model: &ModelSpec, state: &PhaseState, i: usize) -> Vec<f64> {
    assert!(i < state.n, "particle index out of bounds");
    let d = state.d;
    let mut f = vec![0.0; d];
    force_into(model, state, i, None, &mut f);
    f
}

fn force_into(
    model: &ModelSpec,
    state: &PhaseState,
    i: usize,
    centroid: Option<&[f64]>,
    out: &mut [f64],
) {
    let d = state.d;
    let xi = state.position(i);
    model.v.add_gradient(xi, out);
    match model.w {
        Potential::Quadratic(b) => {
            // (1/N) Σ_j b (x_i - x_j) = b (x_i - x̄)
            let owned;
            let c = match centroid {
                Some(c) => c,
                None => {
                    owned = state.centroid();
                    &owned
                }
            };
            for k in 0..d {
                out[k] += b * (xi[k] - c[k]);
            }
        }
        w => {
            let inv_n = 1.0 / state.n as f64;
            let mut diff = vec![0.0; d];
            let mut g = vec![0.0; d];
            for j in 0..state.n {
                let xj = state.position(j);
                for k in 0..d {
                    diff[k] = xi[k] - xj[k];
                }
                g.iter_mut().for_each(|v| *v = 0.0);
                w.add_gradient(&diff, &mut g);
                for k in 0..d {
                    out[k] += inv_n * g[k];
                }
            }
        }
    }
}

/// Forces on all particles, written to a flat `n x d` buffer.
///
/// Data-parallel over particles; per-particle sums run sequentially so the
/// result is independent of the worker count.
pub fn force_batch(model: &ModelSpec, state: &PhaseState, out: &mut [f64]) {
    debug_assert_eq!(out.len(), state.n * state.d);
    let centroid = state.centroid();
    #[cfg(feature = "parallel")]
    {
        let d = state.d;
        out.par_chunks_mut(d).enumerate().for_each(|(i, chunk)| {
            chunk.iter_mut().for_each(|v| *v = 0.0);
            force_into(model, state, i, Some(&centroid), chunk);
        });
    }
    #[cfg(not(feature = "parallel"))]
    force_batch_seq_impl(model, state, &centroid, out);
}

/// Sequential reference path for the batch force (always available; the
/// parallel path must agree with it bitwise).
pub fn force_batch_seq(model: &ModelSpec, state: &PhaseState, out: &mut [f64]) {
    let centroid = state.centroid();
    force_batch_seq_impl(model, state, &centroid, out);
}

fn force_batch_seq_impl(model: &ModelSpec, state: &PhaseState, centroid: &[f64], out: &mut [f64]) {
    let d = state.d;
    for (i, chunk) in out.chunks_mut(d).enumerate() {
        chunk.iter_mut().for_each(|v| *v = 0.0);
        force_into(model, state, i, Some(centroid), chunk);
    }
}

/// Brute-force pairwise force (no centroid fast path); test oracle.
pub fn mean_field_force_pairwise(model: &ModelSpec, state: &PhaseState, i: usize) -> Vec<f64> {
    let d = state.d;
    let xi = state.position(i);
    let mut f = model.v.gradient(xi);
    let inv_n = 1.0 / state.n as f64;
    let mut diff = vec![0.0; d];
    for j in 0..state.n {
        let xj = state.position(j);
        for k in 0..d {
            diff[k] = xi[k] - xj[k];
        }
        let g = model.w.gradient(&diff);
        for k in 0..d {
            f[k] += inv_n * g[k];
        }
    }
    f
}

/// Full N-body potential `U_N(x) = Σ V(x_i) + (1/2N) Σ_{i,j} W(x_i - x_j)`.
pub fn n_body_potential(model: &ModelSpec, state: &PhaseState) -> f64 {
    let mut u: f64 = (0..state.n).map(|i| model.v.value(state.position(i))).sum();
    match model.w {
        Potential::Quadratic(b) => {
            // (1/2N) Σ_{ij} (b/2)|x_i - x_j|² = (b/2)(Σ|x_i|² - N |x̄|²)
            let c = state.centroid();
            let sumsq: f64 = state.x.iter().map(|v| v * v).sum();
            let csq: f64 = c.iter().map(|v| v * v).sum();
            u += 0.5 * b * (sumsq - state.n as f64 * csq);
        }
        w => {
            let d = state.d;
            let inv_2n = 0.5 / state.n as f64;
            let mut diff = vec![0.0; d];
            for i in 0..state.n {
                for j in 0..state.n {
                    let (xi, xj) = (state.position(i), state.position(j));
                    for k in 0..d {
                        diff[k] = xi[k] - xj[k];
                    }
                    u += inv_2n * w.value(&diff);
                }
            }
        }
    }
    u
}

/// Quadratic-form probe of ∇²U_N: samples random `(x, u)` with `|u| = 1` and
/// reports the extreme Rayleigh quotients `u · ∇²U_N(x) u` observed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HessianProbeReport {
    pub min_quotient: f64,
    pub max_quotient: f64,
}

pub fn un_hessian_bound_probe(
    model: &ModelSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> HessianProbeReport {
    assert!(trials >= 1);
    let d = model.d;
    let ns = NoiseStream::new(seed);
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    for trial in 0..trials as u64 {
        let mut x = vec![0.0; n * d];
        let mut u = vec![0.0; n * d];
        for (k, v) in x.iter_mut().enumerate() {
            *v = 2.0 * ns.standard_normal(stream::SAMPLING, trial, 0, k as u64);
        }
        for (k, v) in u.iter_mut().enumerate() {
            *v = ns.standard_normal(stream::SAMPLING, trial, 1, k as u64);
        }
        let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
        let q = un_hessian_quadratic_form(model, n, &x, &u);
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    }
    HessianProbeReport {
        min_quotient: min_q,
        max_quotient: max_q,
    }
}

/// `u · ∇²U_N(x) u` assembled from the V and W Hessian-vector products:
/// `Σ_i u_i·∇²V(x_i)u_i + (1/2N) Σ_{ij} (u_i-u_j)·∇²W(x_i-x_j)(u_i-u_j)`.
pub fn un_hessian_quadratic_form(model: &ModelSpec, n: usize, x: &[f64], u: &[f64]) -> f64 {
    let d = model.d;
    let mut q = 0.0;
    let mut hv = vec![0.0; d];
    for i in 0..n {
        let (xi, ui) = (&x[i * d..(i + 1) * d], &u[i * d..(i + 1) * d]);
        hv.iter_mut().for_each(|v| *v = 0.0);
        model.v.add_hvp(xi, ui, 1.0, &mut hv);
        q += ui.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>();
    }
    let inv_2n = 0.5 / n as f64;
    let mut dx = vec![0.0; d];
    let mut du = vec![0.0; d];
    for i in 0..n {
        for j in 0..n {
            for k in 0..d {
                dx[k] = x[i * d + k] - x[j * d + k];
                du[k] = u[i * d + k] - u[j * d + k];
            }
            hv.iter_mut().for_each(|v| *v = 0.0);
            model.w.add_hvp(&dx, &du, 1.0, &mut hv);
            q += inv_2n * du.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    q
}
