//! Stationary law of the nonlinear process: a Gaussian velocity marginal
//! tensorized with a self-consistent position density, solved on a 1D grid
//! by damped fixed-point iteration, plus closed forms for quadratic models
//! and equilibrium sampling.

use crate::error::{KinError, Result};
use crate::gaussian::GaussianLaw;
use crate::model::ModelSpec;
use crate::rng::{stream, NoiseStream};
use crate::transport::EmpiricalCloud;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Uniform 1D grid and options of the fixed-point solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FixedPointOptions {
    pub points: usize,
    /// Half-width of the grid in units of 1/sqrt(c1).
    pub half_width_scale: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            points: 4096,
            half_width_scale: 10.0,
            damping: 0.5,
            tol: 1e-9,
            max_iterations: 10_000,
        }
    }
}

/// Self-consistent position density on a uniform grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FixedPointDensity {
    pub lo: f64,
    pub hi: f64,
    /// Density values at cell midpoints, midpoint-rule mass 1.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Final L1 change between iterates.
    pub residual: f64,
}

impl FixedPointDensity {
    pub fn cell_width(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }

    /// Midpoint of cell i.
    pub fn grid_point(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_width()
    }

    pub fn mean(&self) -> f64 {
        let h = self.cell_width();
        (0..self.values.len())
            .map(|i| self.grid_point(i) * self.values[i] * h)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let h = self.cell_width();
        (0..self.values.len())
            .map(|i| {
                let x = self.grid_point(i) - m;
                x * x * self.values[i] * h
            })
            .sum()
    }

    /// CDF at the right edge of each cell (last entry 1 up to roundoff).
    pub fn cdf(&self) -> Vec<f64> {
        let h = self.cell_width();
        let mut acc = 0.0;
        self.values
            .iter()
            .map(|&v| {
                acc += v * h;
                acc
            })
            .collect()
    }

    /// Inverse CDF with linear interpolation inside cells.
    pub fn quantile(&self, u: f64) -> f64 {
        let cdf = self.cdf();
        let total = *cdf.last().unwrap();
        let u = (u * total).clamp(0.0, total);
        let idx = cdf.partition_point(|&c| c < u).min(self.values.len() - 1);
        let h = self.cell_width();
        let left_cdf = if idx == 0 { 0.0 } else { cdf[idx - 1] };
        let cell_mass = (cdf[idx] - left_cdf).max(f64::MIN_POSITIVE);
        let frac = ((u - left_cdf) / cell_mass).clamp(0.0, 1.0);
        self.lo + (idx as f64 + frac) * h
    }
}

/// Solves ν = normalize(exp(-(2γ/σ²)(V + W∗ν))) on a uniform grid by the
/// damped iteration ν ← (1-θ)ν + θ·map(ν); the convolution is a direct
/// midpoint-rule quadrature.
pub fn solve_fixed_point(model: &ModelSpec, opts: &FixedPointOptions) -> Result<FixedPointDensity> {
    if model.d != 1 {
        return Err(KinError::Model(
            "fixed-point solver is one-dimensional; need d = 1".into(),
        ));
    }
    if opts.points < 8 {
        return Err(KinError::Config("grid needs at least 8 points".into()));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(KinError::Config("damping must lie in (0, 1]".into()));
    }
    let half_width = opts.half_width_scale / model.c1.sqrt();
    let (lo, hi) = (-half_width, half_width);
    let g = opts.points;
    let h = (hi - lo) / g as f64;
    let grid: Vec<f64> = (0..g).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let beta = 2.0 * model.gamma / (model.sigma * model.sigma);

    let v_on_grid: Vec<f64> = grid.iter().map(|&x| model.v.value(&[x])).collect();
    // W(x_i - x_j) depends on i - j only: precompute one strip of length 2g-1.
    let w_strip: Vec<f64> = (-(g as isize - 1)..g as isize)
        .map(|k| model.w.value(&[k as f64 * h]))
        .collect();

    let mut nu = vec![1.0 / (hi - lo); g];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        iterations = it;
        // log of the unnormalized target, shifted by its max for stability
        let conv = |i: usize| -> f64 {
            let base = g - 1 + i;
            (0..g)
                .map(|j| w_strip[base - j] * nu[j])
                .sum::<f64>()
                * h
        };
        #[cfg(feature = "parallel")]
        let log_target: Vec<f64> = (0..g)
            .into_par_iter()
            .map(|i| -beta * (v_on_grid[i] + conv(i)))
            .collect();
        #[cfg(not(feature = "parallel"))]
        let log_target: Vec<f64> = (0..g)
            .map(|i| -beta * (v_on_grid[i] + conv(i)))
            .collect();
        let top = log_target.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut mapped: Vec<f64> = log_target.iter().map(|&l| (l - top).exp()).collect();
        let mass: f64 = mapped.iter().sum::<f64>() * h;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(KinError::Numerical("degenerate fixed-point iterate".into()));
        }
        mapped.iter_mut().for_each(|v| *v /= mass);

        residual = nu
            .iter()
            .zip(&mapped)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * h;
        for (cur, next) in nu.iter_mut().zip(&mapped) {
            *cur = (1.0 - opts.damping) * *cur + opts.damping * next;
        }
        if residual < opts.tol {
            break;
        }
    }
    if residual >= opts.tol {
        return Err(KinError::Numerical(format!(
            "fixed point did not converge after {iterations} iterations (residual {residual:.3e})"
        )));
    }
    // final normalization guards accumulated roundoff
    let mass: f64 = nu.iter().sum::<f64>() * h;
    nu.iter_mut().for_each(|v| *v /= mass);
    Ok(FixedPointDensity {
        lo,
        hi,
        values: nu,
        iterations,
        residual,
    })
}

/// Closed-form stationary law of the nonlinear process for quadratic
/// potentials: per coordinate, position variance σ²/(2γ(a+b)) and velocity
/// variance σ²/(2γ), zero means and cross-covariances.
pub fn equilibrium_quadratic(a: f64, b: f64, gamma: f64, sigma: f64, d: usize) -> Result<GaussianLaw> {
    if a <= 0.0 || a + b <= 0.0 {
        return Err(KinError::Model("need a > 0 and a + b > 0".into()));
    }
    if gamma <= 0.0 || sigma <= 0.0 || d == 0 {
        return Err(KinError::Config("need gamma > 0, sigma > 0, d >= 1".into()));
    }
    let temp = sigma * sigma / (2.0 * gamma);
    let mut var = vec![temp / (a + b); d];
    var.extend(std::iter::repeat_n(temp, d));
    Ok(GaussianLaw::diagonal(vec![0.0; 2 * d], var))
}

/// I.i.d. equilibrium samples in phase space (dimension 2 per point:
/// position then velocity): positions by inverse CDF of the solved density,
/// velocities centered Gaussian with variance σ²/(2γ).
pub fn sample_equilibrium(
    density: &FixedPointDensity,
    gamma: f64,
    sigma: f64,
    n: usize,
    noise: &NoiseStream,
) -> Result<EmpiricalCloud> {
    if n == 0 {
        return Err(KinError::Config("need n >= 1".into()));
    }
    let vel_std = (sigma * sigma / (2.0 * gamma)).sqrt();
    let mut points = Vec::with_capacity(2 * n);
    for i in 0..n {
        let u = noise.uniform(stream::SAMPLING, 0, i as u64, 0);
        points.push(density.quantile(u));
        points.push(vel_std * noise.standard_normal(stream::SAMPLING, 0, i as u64, 2));
    }
    EmpiricalCloud::new(n, 2, points)
}

/// Two-sided Kolmogorov-Smirnov statistic of 1D samples against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Piecewise-linear CDF of a solved density, for KS testing.
pub fn density_cdf(density: &FixedPointDensity) -> impl Fn(f64) -> f64 + '_ {
    let cdf = density.cdf();
    let h = density.cell_width();
    move |x: f64| {
        if x <= density.lo {
            return 0.0;
        }
        if x >= density.hi {
            return 1.0;
        }
        let pos = (x - density.lo) / h;
        let idx = (pos as usize).min(cdf.len() - 1);
        let left = if idx == 0 { 0.0 } else { cdf[idx - 1] };
        let frac = pos - idx as f64;
        (left + frac * (cdf[idx] - left)).clamp(0.0, 1.0)
    }
}
