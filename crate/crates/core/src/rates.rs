//! Explicit convergence-rate formulas: the hypocoercive rate certificate,
//! its kinetic instantiation, the uniform log-Sobolev constant, and the
//! exact spectral rate in the quadratic (generalized Ornstein-Uhlenbeck)
//! case.

use crate::error::{KinError, Result};
use crate::model::ModelSpec;
use nalgebra::{Complex, DMatrix};
use serde::Serialize;

/// Parameters of the abstract hypocoercivity estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypocoercivityParams {
    pub nc: u32,
    pub lambda: f64,
    pub lambda_cap: f64,
    pub m: f64,
    pub rho: f64,
    pub eta: f64,
}

impl HypocoercivityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("Lambda", self.lambda_cap),
            ("m", self.m),
            ("rho", self.rho),
            ("eta", self.eta),
        ];
        for (name, v) in fields {
            // NaN fails both branches and is rejected
            let ok = v > 0.0 || (name == "m" && v == 0.0);
            if !ok {
                return Err(KinError::Model(format!("{name} must be positive, got {v}")));
            }
        }
        if self.nc == 0 {
            return Err(KinError::Model("Nc must be >= 1".into()));
        }
        if self.lambda > self.lambda_cap {
            return Err(KinError::Model("lambda must not exceed Lambda".into()));
        }
        Ok(())
    }
}

/// `kappa = (rho/eta) * (100/lambda * (Nc^2 + Lambda^2/lambda + m))^(-20 Nc^2)`
///
/// Evaluated in log space: the 20th powers underflow long before the result
/// stops being meaningful.
pub fn kappa_explicit(p: &HypocoercivityParams) -> f64 {
    let nc2 = (p.nc as f64) * (p.nc as f64);
    let inner = 100.0 / p.lambda * (nc2 + p.lambda_cap * p.lambda_cap / p.lambda + p.m);
    let ln_kappa = p.rho.ln() - p.eta.ln() - 20.0 * nc2 * inner.ln();
    ln_kappa.exp()
}

/// The kinetic instantiation of the hypocoercive certificate for a model:
/// first-order commutator chain, `Nc = lambda = Lambda = rho = 1` and
/// `m = 2/sigma^2 + gamma^2 + (||∇²V|| + 2||∇²W||)^2`.
///
/// `eta` here is the constant that makes `kappa_explicit` coincide with the
/// explicit chi bound, i.e. `sigma^2 / (2 min(c1 - 2 c2, 1))`. Note this is
/// `2 gamma` times [`lsi_eta`]; the two normalizations differ in how the
/// carré-du-champ is scaled.
pub fn chi_bound_params(model: &ModelSpec) -> HypocoercivityParams {
    HypocoercivityParams {
        nc: 1,
        lambda: 1.0,
        lambda_cap: 1.0,
        m: 2.0 / (model.sigma * model.sigma)
            + model.gamma * model.gamma
            + (model.hess_v_sup + 2.0 * model.hess_w_sup).powi(2),
        rho: 1.0,
        eta: model.sigma * model.sigma / (2.0 * model.min_convexity().min(1.0)),
    }
}

/// Explicit lower bound on the entropic convergence rate:
/// `chi = 2 min(c1-2c2, 1) / (sigma^2 (100 (2 + 2/sigma^2 + gamma^2 + (||∇²V||+2||∇²W||)^2))^20)`
pub fn chi_bound(model: &ModelSpec) -> f64 {
    let hess = model.hess_v_sup + 2.0 * model.hess_w_sup;
    let inner = 100.0
        * (2.0 + 2.0 / (model.sigma * model.sigma) + model.gamma * model.gamma + hess * hess);
    let num = 2.0 * model.min_convexity().min(1.0);
    (num.ln() - 2.0 * model.sigma.ln() - 20.0 * inner.ln()).exp()
}

/// Uniform log-Sobolev constant of the N-particle Gibbs measure:
/// `eta = sigma^2 / (4 gamma min(c1 - 2 c2, 1))` (independent of N).
pub fn lsi_eta(model: &ModelSpec) -> f64 {
    model.sigma * model.sigma / (4.0 * model.gamma * model.min_convexity().min(1.0))
}

/// One eigenvalue of the drift matrix with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

/// Exact spectral data of the quadratic N-particle drift matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticSpectrum {
    pub spectrum: Vec<SpectrumEntry>,
    /// Minimal real part over the spectrum (positive for valid models).
    pub gap: f64,
    /// Exact convergence rate (equals the gap away from the critical case).
    pub chi_exact: f64,
    /// `gamma^2 = 4 min(a, a+b)`: the rate carries an extra polynomial
    /// factor not computed here.
    pub critical: bool,
}

/// Spectrum of `A = [[0, -I], [aI + b(I - pi), gamma I]]`:
/// for each eigenvalue `lam` of the position block (`a` with multiplicity d,
/// `a+b` with multiplicity d(N-1)`), the pair `gamma/2 ± sqrt(gamma^2/4 - lam)`.
pub fn spectrum_quadratic(a: f64, b: f64, gamma: f64, n: usize, d: usize) -> Result<QuadraticSpectrum> {
    if a <= 0.0 || a + b <= 0.0 {
        return Err(KinError::Model(format!(
            "quadratic spectrum requires a > 0 and a + b > 0 (a={a}, b={b})"
        )));
    }
    if n == 0 || d == 0 {
        return Err(KinError::Model("need N >= 1 and d >= 1".into()));
    }
    let mut spectrum = Vec::new();
    let mut push_pair = |lam: f64, mult: usize| {
        if mult == 0 {
            return;
        }
        let disc = gamma * gamma / 4.0 - lam;
        if disc >= 0.0 {
            let root = disc.sqrt();
            spectrum.push(SpectrumEntry {
                re: gamma / 2.0 - root,
                im: 0.0,
                multiplicity: mult,
            });
            spectrum.push(SpectrumEntry {
                re: gamma / 2.0 + root,
                im: 0.0,
                multiplicity: mult,
            });
        } else {
            let root = (-disc).sqrt();
            spectrum.push(SpectrumEntry {
                re: gamma / 2.0,
                im: -root,
                multiplicity: mult,
            });
            spectrum.push(SpectrumEntry {
                re: gamma / 2.0,
                im: root,
                multiplicity: mult,
            });
        }
    };
    push_pair(a, d);
    push_pair(a + b, d * (n - 1));
    let gap = spectrum.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    let lam_min = a.min(a + b);
    let disc = gamma * gamma / 4.0 - lam_min;
    let chi_exact = if disc < 0.0 {
        gamma / 2.0
    } else {
        gamma / 2.0 - disc.sqrt()
    };
    Ok(QuadraticSpectrum {
        spectrum,
        gap,
        chi_exact,
        critical: disc.abs() < 1e-12 * (1.0 + gamma * gamma),
    })
}

/// Dense drift matrix `A` of the quadratic N-particle system, coordinates
/// ordered positions-then-velocities; test oracle and report payload.
pub fn drift_matrix_quadratic(a: f64, b: f64, gamma: f64, n: usize, d: usize) -> DMatrix<f64> {
    let dn = n * d;
    let mut m = DMatrix::zeros(2 * dn, 2 * dn);
    for i in 0..dn {
        m[(i, dn + i)] = -1.0;
        m[(dn + i, dn + i)] = gamma;
    }
    // position block: aI + b(I - pi), pi averaging over particles per component
    for i in 0..n {
        for j in 0..n {
            for k in 0..d {
                let (r, c) = (dn + i * d + k, j * d + k);
                let pi = 1.0 / n as f64;
                let h = if i == j { a + b * (1.0 - pi) } else { -b * pi };
                m[(r, c)] += h;
            }
        }
    }
    m
}

/// Full rate certificate for a model.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub chi_exact: Option<f64>,
    pub chi_bound: f64,
    pub eta: f64,
    pub kappa: f64,
    pub spectrum: Option<Vec<SpectrumEntry>>,
    pub gap: Option<f64>,
    pub critical: bool,
}

/// Assembles the report; spectral entries are present for quadratic models
/// only (N enters only through multiplicities, not through the rate).
pub fn rate_report(model: &ModelSpec, n: usize) -> Result<RateReport> {
    let bound = chi_bound(model);
    let kappa = kappa_explicit(&chi_bound_params(model));
    let (chi_exact, spectrum, gap, critical) = match model.quadratic_coefficients() {
        Some((a, b)) => {
            let s = spectrum_quadratic(a, b, model.gamma, n, model.d)?;
            (Some(s.chi_exact), Some(s.spectrum), Some(s.gap), s.critical)
        }
        None => (None, None, None, false),
    };
    Ok(RateReport {
        chi_exact,
        chi_bound: bound,
        eta: lsi_eta(model),
        kappa,
        spectrum,
        gap,
        critical,
    })
}

/// Multiset comparison between an analytic spectrum (with multiplicities)
/// and a list of numerically computed eigenvalues.
pub fn spectrum_matches(
    analytic: &[SpectrumEntry],
    numeric: &[Complex<f64>],
    tol: f64,
) -> bool {
    let total: usize = analytic.iter().map(|e| e.multiplicity).sum();
    if total != numeric.len() {
        return false;
    }
    let mut expanded: Vec<(f64, f64)> = Vec::with_capacity(total);
    for e in analytic {
        for _ in 0..e.multiplicity {
            expanded.push((e.re, e.im));
        }
    }
    // multiset comparison by nearest-neighbor matching: lexicographic
    // sorting would mispair equal real parts perturbed at roundoff level
    let mut used = vec![false; total];
    for a in &expanded {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in numeric.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (a.0 - c.re).abs().max((a.1 - c.im).abs());
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, dist)) if dist <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}
