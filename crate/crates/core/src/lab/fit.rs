//! Least-squares extraction of decay rates and power-law slopes from
//! experiment series.

use crate::error::{KinError, Result};

/// Ordinary least squares of y on x with intercept.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(KinError::Config("linear fit needs >= 2 paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(KinError::Config("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // constant data is fitted exactly by the constant line
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Exponential-decay fit `value = prefactor * exp(-rate t)` over a t window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExponentialFit {
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least squares on (t, ln value) restricted to `window = [lo, hi]`; the
/// rate is minus the slope. All values in the window must be positive.
pub fn fit_exponential_rate(
    ts: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<ExponentialFit> {
    if ts.len() != values.len() {
        return Err(KinError::Config("series lengths differ".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in ts.iter().zip(values) {
        if t >= window.0 && t <= window.1 {
            if v <= 0.0 {
                return Err(KinError::Numerical(format!(
                    "nonpositive value {v} at t = {t} in fit window"
                )));
            }
            xs.push(t);
            ys.push(v.ln());
        }
    }
    if xs.len() < 4 {
        return Err(KinError::Config(format!(
            "fit window [{}, {}] contains {} points, need >= 4",
            window.0,
            window.1,
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(ExponentialFit {
        rate: -fit.slope,
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
    })
}

/// Power-law fit `value = c * N^slope`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerlawFit {
    pub slope: f64,
    pub r_squared: f64,
}

/// Least squares on (ln N, ln value); needs >= 3 distinct N and positive
/// values.
pub fn fit_powerlaw(ns: &[f64], values: &[f64]) -> Result<PowerlawFit> {
    if ns.len() != values.len() || ns.len() < 3 {
        return Err(KinError::Config("power-law fit needs >= 3 paired points".into()));
    }
    let mut distinct = ns.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(KinError::Config("power-law fit needs >= 3 distinct N".into()));
    }
    for (&n, &v) in ns.iter().zip(values) {
        if n <= 0.0 || v <= 0.0 {
            return Err(KinError::Numerical(format!(
                "power-law fit needs positive data, got ({n}, {v})"
            )));
        }
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(PowerlawFit {
        slope: fit.slope,
        r_squared: fit.r_squared,
    })
}
