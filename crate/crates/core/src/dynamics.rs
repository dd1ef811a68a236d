//! Time stepping for the interacting particle system and the nonlinear
//! (law-dependent) process, parallel couplings sharing Brownian increments,
//! and exact Gaussian moment flows for quadratic models.

use crate::error::{KinError, Result};
use crate::gaussian::GaussianLaw;
use crate::model::{force_batch, n_body_potential, ModelSpec, PhaseState, Potential};
use crate::rates::drift_matrix_quadratic;
use crate::rng::{stream, NoiseStream};
use nalgebra::{DMatrix, DVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Integration scheme for the SDE steppers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    /// Euler-Maruyama, the analysis-friendly baseline.
    EulerMaruyama,
    /// Velocity splitting with exact Ornstein-Uhlenbeck half-steps
    /// (O-B-A-B-O); extra headroom for stiff friction.
    Splitting,
}

/// Gaussian product initial law: per-coordinate means and variances for
/// positions and velocities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InitialLaw {
    pub pos_mean: f64,
    pub pos_var: f64,
    pub vel_mean: f64,
    pub vel_var: f64,
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        if self.pos_var < 0.0 || self.vel_var < 0.0 {
            return Err(KinError::Config("initial variances must be nonnegative".into()));
        }
        Ok(())
    }

    /// The law as a 2d-dimensional Gaussian, positions first.
    pub fn as_gaussian(&self, d: usize) -> GaussianLaw {
        let mut mean = vec![self.pos_mean; d];
        mean.extend(std::iter::repeat_n(self.vel_mean, d));
        let mut var = vec![self.pos_var; d];
        var.extend(std::iter::repeat_n(self.vel_var, d));
        GaussianLaw::diagonal(mean, var)
    }
}

/// I.i.d. samples of the initial law; addresses `(stream_id, 0, particle,
/// component)` so that coupled systems can reuse the exact same draw.
pub fn sample_initial(
    m0: &InitialLaw,
    n: usize,
    d: usize,
    noise: &NoiseStream,
    stream_id: u64,
) -> PhaseState {
    let mut s = PhaseState::zeros(n, d);
    let (sx, sy) = (m0.pos_var.sqrt(), m0.vel_var.sqrt());
    for i in 0..n {
        for k in 0..d {
            s.x[i * d + k] =
                m0.pos_mean + sx * noise.standard_normal(stream_id, 0, i as u64, k as u64);
            s.y[i * d + k] = m0.vel_mean
                + sy * noise.standard_normal(stream_id, 0, i as u64, (d + k) as u64);
        }
    }
    s
}

fn check_finite(state: &PhaseState, context: &str) -> Result<()> {
    if !state.is_finite() {
        return Err(KinError::Numerical(format!(
            "non-finite state at t = {} ({context}); reduce dt",
            state.t
        )));
    }
    Ok(())
}

/// One step given precomputed per-particle drift forces `f` (flat n*d).
/// Noise addresses are `(stream_id, state.step, particle, component)`.
#[allow(clippy::too_many_arguments)]
fn advance_with_forces(
    model: &ModelSpec,
    state: &PhaseState,
    dt: f64,
    forces_pre: &[f64],
    force_fn: &dyn Fn(&PhaseState, &mut [f64]),
    noise: &NoiseStream,
    stream_id: u64,
    scheme: Scheme,
) -> PhaseState {
    let (n, d) = (state.n, state.d);
    let mut next = state.clone();
    let gamma = model.gamma;
    let sigma = model.sigma;
    match scheme {
        Scheme::EulerMaruyama => {
            let sqdt = dt.sqrt();
            for i in 0..n {
                for k in 0..d {
                    let idx = i * d + k;
                    let xi = noise.standard_normal(stream_id, state.step, i as u64, k as u64);
                    next.x[idx] = state.x[idx] + state.y[idx] * dt;
                    next.y[idx] = state.y[idx]
                        - gamma * state.y[idx] * dt
                        - forces_pre[idx] * dt
                        + sigma * sqdt * xi;
                }
            }
        }
        Scheme::Splitting => {
            let h = 0.5 * dt;
            let decay = (-gamma * h).exp();
            let std = sigma * ((1.0 - (-2.0 * gamma * h).exp()) / (2.0 * gamma)).sqrt();
            // O: exact OU half-step
            for i in 0..n {
                for k in 0..d {
                    let idx = i * d + k;
                    let xi = noise.standard_normal(stream_id, state.step, i as u64, k as u64);
                    next.y[idx] = decay * state.y[idx] + std * xi;
                }
            }
            // B: half kick with pre-step forces
            for (y, f) in next.y.iter_mut().zip(forces_pre) {
                *y -= f * h;
            }
            // A: full drift
            for idx in 0..n * d {
                next.x[idx] += next.y[idx] * dt;
            }
            // B: half kick with post-drift forces
            let mut forces_post = vec![0.0; n * d];
            force_fn(&next, &mut forces_post);
            for (y, f) in next.y.iter_mut().zip(&forces_post) {
                *y -= f * h;
            }
            // O: second exact OU half-step (fresh addresses)
            for i in 0..n {
                for k in 0..d {
                    let idx = i * d + k;
                    let xi =
                        noise.standard_normal(stream_id, state.step, i as u64, (d + k) as u64);
                    next.y[idx] = decay * next.y[idx] + std * xi;
                }
            }
        }
    }
    next.t = state.t + dt;
    next.step = state.step + 1;
    next
}

fn step_with_stream(
    model: &ModelSpec,
    state: &PhaseState,
    dt: f64,
    noise: &NoiseStream,
    stream_id: u64,
    scheme: Scheme,
) -> Result<PhaseState> {
    if dt <= 0.0 {
        return Err(KinError::Config("dt must be positive".into()));
    }
    check_finite(state, "before step")?;
    let mut forces = vec![0.0; state.n * state.d];
    force_batch(model, state, &mut forces);
    let force_fn = |s: &PhaseState, out: &mut [f64]| force_batch(model, s, out);
    let next = advance_with_forces(model, state, dt, &forces, &force_fn, noise, stream_id, scheme);
    check_finite(&next, "after step")?;
    Ok(next)
}

/// One step of the interacting N-particle system.
pub fn step_interacting(
    model: &ModelSpec,
    state: &PhaseState,
    dt: f64,
    noise: &NoiseStream,
    scheme: Scheme,
) -> Result<PhaseState> {
    step_with_stream(model, state, dt, noise, stream::DYNAMICS, scheme)
}

/// Law surrogate supplying the mean-field integral `∫ ∇W(x - u) m_t(du)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SurrogateKind {
    /// Exact Gaussian moment flow (quadratic models only).
    ExactGaussian,
    /// Independently simulated interacting system of the given size.
    ReferenceEnsemble(usize),
}

/// Runtime state of a law surrogate.
#[derive(Debug, Clone)]
pub enum SurrogateState {
    ExactGaussian {
        /// Position mean of m_t, per coordinate.
        mean_x: Vec<f64>,
        /// Velocity mean of m_t, per coordinate.
        mean_y: Vec<f64>,
        t: f64,
    },
    Ensemble { system: PhaseState },
}

impl SurrogateState {
    /// Builds the surrogate at t = 0 for a given initial law.
    pub fn new(
        kind: SurrogateKind,
        model: &ModelSpec,
        m0: &InitialLaw,
        noise: &NoiseStream,
    ) -> Result<Self> {
        match kind {
            SurrogateKind::ExactGaussian => {
                if !model.is_quadratic() {
                    return Err(KinError::Model(
                        "exact Gaussian surrogate requires quadratic potentials".into(),
                    ));
                }
                Ok(SurrogateState::ExactGaussian {
                    mean_x: vec![m0.pos_mean; model.d],
                    mean_y: vec![m0.vel_mean; model.d],
                    t: 0.0,
                })
            }
            SurrogateKind::ReferenceEnsemble(m) => {
                if m == 0 {
                    return Err(KinError::Config("ensemble surrogate needs M >= 1".into()));
                }
                Ok(SurrogateState::Ensemble {
                    system: sample_initial(m0, m, model.d, noise, stream::ENSEMBLE_INIT),
                })
            }
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            SurrogateState::ExactGaussian { t, .. } => *t,
            SurrogateState::Ensemble { system } => system.t,
        }
    }

    /// Mean-field interaction drift at position `x`, accumulated into `out`.
    pub fn add_interaction_drift(&self, model: &ModelSpec, x: &[f64], out: &mut [f64]) {
        match self {
            SurrogateState::ExactGaussian { mean_x, .. } => {
                // Quadratic W: ∫ ∇W(x-u) m(du) = b (x - E_m[x])
                let b = match model.w {
                    Potential::Quadratic(b) => b,
                    _ => unreachable!("surrogate constructor enforces quadratic W"),
                };
                for k in 0..x.len() {
                    out[k] += b * (x[k] - mean_x[k]);
                }
            }
            SurrogateState::Ensemble { system } => {
                let d = system.d;
                let inv_m = 1.0 / system.n as f64;
                let mut diff = vec![0.0; d];
                let mut g = vec![0.0; d];
                for j in 0..system.n {
                    let uj = system.position(j);
                    for k in 0..d {
                        diff[k] = x[k] - uj[k];
                    }
                    g.iter_mut().for_each(|v| *v = 0.0);
                    model.w.add_gradient(&diff, &mut g);
                    for k in 0..d {
                        out[k] += inv_m * g[k];
                    }
                }
            }
        }
    }

    /// Advances the surrogate clock by dt: RK4 on the mean flow
    /// (`m_x' = m_y`, `m_y' = -gamma m_y - a m_x`; the interaction term
    /// cancels in the mean) or one step of the reference ensemble.
    pub fn advance(
        &mut self,
        model: &ModelSpec,
        dt: f64,
        noise: &NoiseStream,
        scheme: Scheme,
    ) -> Result<()> {
        match self {
            SurrogateState::ExactGaussian { mean_x, mean_y, t } => {
                let a = match model.v {
                    Potential::Quadratic(a) => a,
                    _ => unreachable!(),
                };
                let gamma = model.gamma;
                for k in 0..mean_x.len() {
                    let z0 = [mean_x[k], mean_y[k]];
                    let f = |z: [f64; 2]| [z[1], -gamma * z[1] - a * z[0]];
                    let k1 = f(z0);
                    let k2 = f([z0[0] + 0.5 * dt * k1[0], z0[1] + 0.5 * dt * k1[1]]);
                    let k3 = f([z0[0] + 0.5 * dt * k2[0], z0[1] + 0.5 * dt * k2[1]]);
                    let k4 = f([z0[0] + dt * k3[0], z0[1] + dt * k3[1]]);
                    mean_x[k] = z0[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                    mean_y[k] = z0[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                }
                *t += dt;
                Ok(())
            }
            SurrogateState::Ensemble { system } => {
                *system = step_with_stream(
                    model,
                    system,
                    dt,
                    noise,
                    stream::ENSEMBLE_DYNAMICS,
                    scheme,
                )?;
                Ok(())
            }
        }
    }
}

/// One step of the nonlinear process: the empirical force is replaced by
/// the surrogate's mean-field integral. When invoked with the same noise
/// stream and step counter as an interacting system, copy i consumes the
/// exact same Brownian increments as particle i.
pub fn step_nonlinear(
    model: &ModelSpec,
    state: &PhaseState,
    surrogate: &SurrogateState,
    dt: f64,
    noise: &NoiseStream,
    scheme: Scheme,
) -> Result<PhaseState> {
    if dt <= 0.0 {
        return Err(KinError::Config("dt must be positive".into()));
    }
    if (surrogate.time() - state.t).abs() > 0.5 * dt {
        return Err(KinError::Numerical(format!(
            "surrogate time {} does not match state time {}",
            surrogate.time(),
            state.t
        )));
    }
    check_finite(state, "before step")?;
    let (n, d) = (state.n, state.d);
    let nonlinear_forces = |s: &PhaseState, out: &mut [f64]| {
        for i in 0..n {
            let chunk = &mut out[i * d..(i + 1) * d];
            chunk.iter_mut().for_each(|v| *v = 0.0);
            model.v.add_gradient(s.position(i), chunk);
            surrogate.add_interaction_drift(model, s.position(i), chunk);
        }
    };
    let mut forces = vec![0.0; n * d];
    nonlinear_forces(state, &mut forces);
    let next = advance_with_forces(
        model,
        state,
        dt,
        &forces,
        &nonlinear_forces,
        noise,
        stream::DYNAMICS,
        scheme,
    );
    check_finite(&next, "after step")?;
    Ok(next)
}

/// Interacting system and nonlinear process driven by the same Brownian
/// increments, initialized with identical samples.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub interacting: PhaseState,
    pub nonlinear: PhaseState,
    pub surrogate: SurrogateState,
}

impl CoupledPair {
    pub fn new(
        model: &ModelSpec,
        n: usize,
        m0: &InitialLaw,
        kind: SurrogateKind,
        noise: &NoiseStream,
    ) -> Result<Self> {
        let init = sample_initial(m0, n, model.d, noise, stream::INIT);
        let surrogate = SurrogateState::new(kind, model, m0, noise)?;
        Ok(CoupledPair {
            interacting: init.clone(),
            nonlinear: init,
            surrogate,
        })
    }

    /// Advances both members by dt with shared noise addresses. The
    /// surrogate is advanced after the states (both steppers read the
    /// surrogate at the pre-step time).
    pub fn step(
        &mut self,
        model: &ModelSpec,
        dt: f64,
        noise: &NoiseStream,
        scheme: Scheme,
    ) -> Result<()> {
        debug_assert_eq!(self.interacting.step, self.nonlinear.step);
        self.interacting = step_interacting(model, &self.interacting, dt, noise, scheme)?;
        self.nonlinear =
            step_nonlinear(model, &self.nonlinear, &self.surrogate, dt, noise, scheme)?;
        self.surrogate.advance(model, dt, noise, scheme)?;
        Ok(())
    }

    /// Total squared coupling distance `|Z - Z̄|²` (positions and velocities,
    /// summed over particles).
    pub fn coupling_distance_sq(&self) -> f64 {
        let dx: f64 = self
            .interacting
            .x
            .iter()
            .zip(&self.nonlinear.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let dy: f64 = self
            .interacting
            .y
            .iter()
            .zip(&self.nonlinear.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dx + dy
    }
}

/// Which Gaussian moment flow to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianFlowKind {
    /// Full 2dN-dimensional flow of the interacting system.
    ParticleSystem(usize),
    /// 2d-dimensional flow of the nonlinear process: the mean feels the
    /// exterior coefficient only, fluctuations feel the full one.
    NonlinearFlow,
}

/// Integrates `mean' = -A mean`, `cov' = -A cov - cov Aᵀ + D` with
/// `D = diag(0, sigma² I)` by classical RK4 up to `t_target`.
pub fn propagate_gaussian(
    kind: GaussianFlowKind,
    model: &ModelSpec,
    law: &GaussianLaw,
    t_target: f64,
    dt: f64,
) -> Result<GaussianLaw> {
    let (a, b) = model
        .quadratic_coefficients()
        .ok_or_else(|| KinError::Model("gaussian moment flow requires quadratic potentials".into()))?;
    if t_target < 0.0 || dt <= 0.0 {
        return Err(KinError::Config("need t_target >= 0 and dt > 0".into()));
    }
    let d = model.d;
    let (a_mean, a_cov) = match kind {
        GaussianFlowKind::ParticleSystem(n) => {
            let m = drift_matrix_quadratic(a, b, model.gamma, n, d);
            (m.clone(), m)
        }
        GaussianFlowKind::NonlinearFlow => (
            nonlinear_drift_matrix(a, model.gamma, d),
            nonlinear_drift_matrix(a + b, model.gamma, d),
        ),
    };
    let dim = a_cov.nrows();
    if law.dim() != dim {
        return Err(KinError::Dimension(format!(
            "law dimension {} does not match flow dimension {dim}",
            law.dim()
        )));
    }
    let half = dim / 2;
    let mut diffusion = DMatrix::zeros(dim, dim);
    for i in half..dim {
        diffusion[(i, i)] = model.sigma * model.sigma;
    }

    let mut mean = law.mean.clone();
    let mut cov = law.cov.clone();
    let steps = (t_target / dt).ceil() as usize;
    let mut t = 0.0;
    for _ in 0..steps {
        let h = (t_target - t).min(dt);
        if h <= 0.0 {
            break;
        }
        mean = rk4_vec(&a_mean, &mean, h);
        cov = rk4_cov(&a_cov, &diffusion, &cov, h);
        t += h;
    }
    GaussianLaw::new(mean, cov)
}

fn nonlinear_drift_matrix(coeff: f64, gamma: f64, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        m[(k, d + k)] = -1.0;
        m[(d + k, k)] = coeff;
        m[(d + k, d + k)] = gamma;
    }
    m
}

fn rk4_vec(a: &DMatrix<f64>, v: &DVector<f64>, h: f64) -> DVector<f64> {
    let f = |x: &DVector<f64>| -(a * x);
    let k1 = f(v);
    let k2 = f(&(v + 0.5 * h * &k1));
    let k3 = f(&(v + 0.5 * h * &k2));
    let k4 = f(&(v + h * &k3));
    v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn rk4_cov(a: &DMatrix<f64>, diff: &DMatrix<f64>, c: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let f = |x: &DMatrix<f64>| -(a * x) - x * a.transpose() + diff;
    let k1 = f(c);
    let k2 = f(&(c + 0.5 * h * &k1));
    let k3 = f(&(c + 0.5 * h * &k2));
    let k4 = f(&(c + h * &k3));
    c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Gibbs law of the quadratic N-particle system: positions with covariance
/// `(sigma²/2gamma) H^{-1}` where `H = aI + b(I - pi)`, velocities
/// `(sigma²/2gamma) I`, zero means.
pub fn gibbs_particle_system(model: &ModelSpec, n: usize) -> Result<GaussianLaw> {
    let (a, b) = model
        .quadratic_coefficients()
        .ok_or_else(|| KinError::Model("closed-form Gibbs law requires quadratic potentials".into()))?;
    if a <= 0.0 || a + b <= 0.0 {
        return Err(KinError::Model("need a > 0 and a + b > 0".into()));
    }
    let d = model.d;
    let dn = n * d;
    let temp = model.sigma * model.sigma / (2.0 * model.gamma);
    let mut cov = DMatrix::zeros(2 * dn, 2 * dn);
    // H^{-1} = (1/a) pi + (1/(a+b)) (I - pi)
    for i in 0..n {
        for j in 0..n {
            for k in 0..d {
                let pi = 1.0 / n as f64;
                let hinv = pi / a + (if i == j { 1.0 - pi } else { -pi }) / (a + b);
                cov[(i * d + k, j * d + k)] = temp * hinv;
            }
        }
    }
    for i in 0..dn {
        cov[(dn + i, dn + i)] = temp;
    }
    GaussianLaw::new(DVector::zeros(2 * dn), cov)
}

/// One sampled point of the coupled diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CoupledSample {
    pub t: f64,
    /// `|Z - Z̄|²`, summed over particles (uniform in N by propagation of
    /// chaos; divide by N for the per-particle distance).
    pub msd_total: f64,
    /// Particle-averaged `|X_i|²` of the interacting system.
    pub ex1_sq: f64,
    /// Particle-averaged `|Y_i|²`.
    pub ey1_sq: f64,
    /// `U_N(x) + |y|²/2 + eps x·y` of the interacting system.
    pub lyapunov: f64,
    /// Phase-space coordinates of particle 1 in both members, for marginal
    /// clouds: (x1, y1) interacting then nonlinear.
    pub first_particle: [f64; 4],
}

/// Replica-resolved diagnostics of a coupled simulation.
#[derive(Debug, Clone)]
pub struct CoupledDiagnostics {
    pub times: Vec<f64>,
    /// `[replica][time index]`
    pub per_replica: Vec<Vec<CoupledSample>>,
}

impl CoupledDiagnostics {
    /// Replica average of a field at each output time.
    pub fn average<F: Fn(&CoupledSample) -> f64>(&self, f: F) -> Vec<f64> {
        let r = self.per_replica.len() as f64;
        (0..self.times.len())
            .map(|ti| self.per_replica.iter().map(|s| f(&s[ti])).sum::<f64>() / r)
            .collect()
    }
}

/// Simulation settings for [`simulate_coupled`].
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub n: usize,
    pub dt: f64,
    pub out_times: Vec<f64>,
    pub surrogate: SurrogateKind,
    pub m0: InitialLaw,
    pub replicas: usize,
    pub scheme: Scheme,
    /// Coupling constant of the Lyapunov function; default
    /// `0.05 min(1, gamma, c1 - 2c2)`.
    pub lyapunov_eps: Option<f64>,
}

/// Runs R independent replicas of the parallel coupling and records the
/// diagnostics at the requested output times (which must lie on the dt
/// grid). Replicas are data-parallel; each owns a derived noise stream, so
/// results do not depend on the worker count.
pub fn simulate_coupled(
    model: &ModelSpec,
    run: &CoupledRun,
    noise: &NoiseStream,
) -> Result<CoupledDiagnostics> {
    if run.replicas == 0 || run.n == 0 {
        return Err(KinError::Config("need replicas >= 1 and N >= 1".into()));
    }
    run.m0.validate()?;
    let eps = run
        .lyapunov_eps
        .unwrap_or_else(|| 0.05 * model.gamma.min(model.min_convexity()).min(1.0));
    let steps: Vec<u64> = run
        .out_times
        .iter()
        .map(|&t| {
            let s = (t / run.dt).round();
            if (s * run.dt - t).abs() > 1e-9 * run.dt.max(t.abs()) || s < 0.0 {
                Err(KinError::Config(format!("output time {t} not on the dt grid")))
            } else {
                Ok(s as u64)
            }
        })
        .collect::<Result<_>>()?;

    let one_replica = |r: usize| -> Result<Vec<CoupledSample>> {
        let ns = noise.substream(r as u64);
        let mut pair = CoupledPair::new(model, run.n, &run.m0, run.surrogate, &ns)?;
        let mut out = Vec::with_capacity(steps.len());
        let last = *steps.iter().max().unwrap_or(&0);
        let record = |pair: &CoupledPair| {
            let s = &pair.interacting;
            let nd = (s.n * s.d) as f64;
            let ex = s.x.iter().map(|v| v * v).sum::<f64>() / s.n as f64;
            let ey = s.y.iter().map(|v| v * v).sum::<f64>() / s.n as f64;
            let xy: f64 = s.x.iter().zip(&s.y).map(|(a, b)| a * b).sum();
            let _ = nd;
            CoupledSample {
                t: s.t,
                msd_total: pair.coupling_distance_sq(),
                ex1_sq: ex,
                ey1_sq: ey,
                lyapunov: n_body_potential(model, s)
                    + 0.5 * s.y.iter().map(|v| v * v).sum::<f64>()
                    + eps * xy,
                first_particle: [s.x[0], s.y[0], pair.nonlinear.x[0], pair.nonlinear.y[0]],
            }
        };
        if steps.contains(&0) {
            out.push(record(&pair));
        }
        for step in 1..=last {
            pair.step(model, run.dt, &ns, run.scheme)?;
            if steps.contains(&step) {
                out.push(record(&pair));
            }
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let per_replica: Result<Vec<_>> = (0..run.replicas).into_par_iter().map(one_replica).collect();
    #[cfg(not(feature = "parallel"))]
    let per_replica: Result<Vec<_>> = (0..run.replicas).map(one_replica).collect();

    Ok(CoupledDiagnostics {
        times: run.out_times.clone(),
        per_replica: per_replica?,
    })
}
