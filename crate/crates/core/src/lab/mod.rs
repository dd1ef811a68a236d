//! Experiment runner: builds experiments from configs, executes them over
//! a worker pool, writes long-format CSV series plus a JSON manifest, and
//! fits the reported constants.

pub mod config;
pub mod fit;

pub use config::{build_config, parse_config_text, ExperimentConfig, ExperimentKind};
pub use fit::{fit_exponential_rate, fit_powerlaw, linear_fit, ExponentialFit, LinearFit, PowerlawFit};

use crate::dynamics::{
    gibbs_particle_system, propagate_gaussian, sample_initial, simulate_coupled, step_interacting,
    CoupledPair, CoupledRun, GaussianFlowKind, SurrogateKind,
};
use crate::equilibrium::{equilibrium_quadratic, sample_equilibrium, solve_fixed_point, FixedPointOptions};
use crate::error::{KinError, Result};
use crate::gaussian::GaussianLaw;
use crate::model::ModelSpec;
use crate::rates::rate_report;
use crate::rng::{stream, NoiseStream};
use crate::transport::{kl_gaussian, w2_empirical, EmpiricalCloud};
use nalgebra::DVector;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Outcome of one experiment run: artifact paths and fitted constants.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunRecord {
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub csv_paths: Vec<String>,
    pub rate: Option<f64>,
    pub prefactor: Option<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    /// Experiment-specific scalars (predictions, band checks, report dump).
    pub extras: serde_json::Value,
    pub wall_clock_secs: f64,
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut buf = String::with_capacity(rows.len() * 32 + header.len() + 1);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}

fn fmt(v: f64) -> String {
    // shortest round-trip decimal: stable across runs and worker counts
    format!("{v}")
}

fn steps_for(t: f64, dt: f64) -> Result<u64> {
    let s = (t / dt).round();
    if s < 0.0 || (s * dt - t).abs() > 1e-9 * dt.max(t.abs()) {
        return Err(KinError::Config(format!("time {t} is not a multiple of dt = {dt}")));
    }
    Ok(s as u64)
}

/// Executes an experiment and persists its artifacts under the config's
/// output directory. Work fans out over (replica, N) items; series are
/// assembled in deterministic order afterwards, so outputs are
/// byte-identical across worker counts.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let mut record = RunRecord {
        kind: cfg.kind.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.echo.clone(),
        csv_paths: Vec::new(),
        rate: None,
        prefactor: None,
        slope: None,
        r_squared: None,
        extras: serde_json::Value::Null,
        wall_clock_secs: 0.0,
    };
    match cfg.kind {
        ExperimentKind::EntropyDecay => entropy_decay(cfg, &mut record)?,
        ExperimentKind::ChaosScaling => chaos_scaling(cfg, &mut record)?,
        ExperimentKind::ConfidenceCurve => confidence_curve(cfg, &mut record)?,
        ExperimentKind::CouplingGrowth => coupling_growth(cfg, &mut record)?,
        ExperimentKind::EquilibriumMarginal => equilibrium_marginal(cfg, &mut record)?,
        ExperimentKind::RateCertificate => rate_certificate(cfg, &mut record)?,
    }
    record.wall_clock_secs = started.elapsed().as_secs_f64();
    write_manifest(cfg, &record)?;
    Ok(record)
}

fn write_manifest(cfg: &ExperimentConfig, record: &RunRecord) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| KinError::Numerical(format!("manifest serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

/// Relative entropy KL(m_t^(N) || Gibbs) along the Gaussian moment flow of
/// the quadratic N-particle system, one value per grid time.
pub fn entropy_series(
    model: &ModelSpec,
    n: usize,
    law0: &GaussianLaw,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let gibbs = gibbs_particle_system(model, n)?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut law = law0.clone();
    let mut t_prev = 0.0;
    for &t in t_grid {
        if t < t_prev {
            return Err(KinError::Config("t grid must be nondecreasing".into()));
        }
        if t > t_prev {
            law = propagate_gaussian(GaussianFlowKind::ParticleSystem(n), model, &law, t - t_prev, dt)?;
            t_prev = t;
        }
        out.push(kl_gaussian(&law, &gibbs)?);
    }
    Ok(out)
}

/// Product initial law of the N-particle system (positions first, then
/// velocities) from per-coordinate moments.
pub fn product_initial_law(m0: &crate::dynamics::InitialLaw, n: usize, d: usize) -> GaussianLaw {
    let dn = n * d;
    let mut mean = vec![m0.pos_mean; dn];
    mean.extend(std::iter::repeat_n(m0.vel_mean, dn));
    let mut var = vec![m0.pos_var; dn];
    var.extend(std::iter::repeat_n(m0.vel_var, dn));
    GaussianLaw::diagonal(mean, var)
}

fn entropy_decay(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    if !cfg.model.is_quadratic() {
        return Err(KinError::Config(
            "entropy decay uses closed-form Gaussian flows; quadratic potentials required".into(),
        ));
    }
    let n = cfg.n_list[0];
    let law0 = product_initial_law(&cfg.m0, n, cfg.model.d);
    let series = entropy_series(&cfg.model, n, &law0, &cfg.t_grid, cfg.dt)?;
    let rows: Vec<Vec<String>> = cfg
        .t_grid
        .iter()
        .zip(&series)
        .map(|(&t, &v)| vec!["0".to_string(), fmt(t), fmt(v)])
        .collect();
    let path = csv_path(cfg, "entropy.csv");
    write_csv(&path, "replica,t,value", &rows)?;
    record.csv_paths.push(path.display().to_string());

    let window = cfg.window();
    let positive = cfg
        .t_grid
        .iter()
        .zip(&series)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .all(|(_, v)| *v > 0.0);
    if positive {
        let fitted = fit_exponential_rate(&cfg.t_grid, &series, window)?;
        record.rate = Some(fitted.rate);
        record.prefactor = Some(fitted.prefactor);
        record.r_squared = Some(fitted.r_squared);
    }
    record.extras = serde_json::json!({
        "kl_initial": series.first(),
        "kl_final": series.last(),
        "fit_window": [window.0, window.1],
    });
    Ok(())
}

/// One point of the chaos-scaling curve: the empirical W2 between the
/// first-particle marginal of the interacting system and samples of m_t,
/// both taken across R replicas. The m_t samples come from the nonlinear
/// member of the parallel coupling, so the two clouds converge pointwise
/// and the K/sqrt(N) signal is not buried in independent-sampling noise.
#[allow(clippy::too_many_arguments)]
pub fn chaos_distance_at(
    model: &ModelSpec,
    n: usize,
    t: f64,
    dt: f64,
    replicas: usize,
    surrogate: SurrogateKind,
    m0: &crate::dynamics::InitialLaw,
    noise: &NoiseStream,
) -> Result<f64> {
    let steps = steps_for(t, dt)?;
    let d = model.d;
    let one = |r: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let ns = noise.substream(r as u64);
        let mut pair = CoupledPair::new(model, n, m0, surrogate, &ns)?;
        for _ in 0..steps {
            pair.step(model, dt, &ns, crate::dynamics::Scheme::EulerMaruyama)?;
        }
        let mut a = pair.interacting.position(0).to_vec();
        a.extend_from_slice(pair.interacting.velocity(0));
        let mut b = pair.nonlinear.position(0).to_vec();
        b.extend_from_slice(pair.nonlinear.velocity(0));
        Ok((a, b))
    };
    #[cfg(feature = "parallel")]
    let samples: Result<Vec<_>> = (0..replicas).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Result<Vec<_>> = (0..replicas).map(one).collect();
    let samples = samples?;
    let mut pa = Vec::with_capacity(replicas * 2 * d);
    let mut pb = Vec::with_capacity(replicas * 2 * d);
    for (a, b) in &samples {
        pa.extend_from_slice(a);
        pb.extend_from_slice(b);
    }
    let ca = EmpiricalCloud::new(replicas, 2 * d, pa)?;
    let cb = EmpiricalCloud::new(replicas, 2 * d, pb)?;
    Ok(w2_empirical(&ca, &cb)?.cost.sqrt())
}

fn chaos_scaling(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    let t = *cfg.t_grid.last().unwrap();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let base = NoiseStream::new(cfg.seed).substream(ni as u64);
        let w2 = chaos_distance_at(
            &cfg.model,
            n,
            t,
            cfg.dt,
            cfg.replicas,
            cfg.surrogate,
            &cfg.m0,
            &base,
        )?;
        rows.push(vec!["0".to_string(), n.to_string(), fmt(w2)]);
        values.push(w2);
    }
    let path = csv_path(cfg, "chaos.csv");
    write_csv(&path, "replica,n,value", &rows)?;
    record.csv_paths.push(path.display().to_string());

    if cfg.n_list.len() >= 3 {
        let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
        let fitted = fit_powerlaw(&ns, &values)?;
        record.slope = Some(fitted.slope);
        record.r_squared = Some(fitted.r_squared);
    }
    record.extras = serde_json::json!({
        "t": t,
        "w2_by_n": cfg.n_list.iter().zip(&values).map(|(n, v)| (n.to_string(), v)).collect::<BTreeMap<_, _>>(),
        "monotone_first_last": values.first() > values.last(),
    });
    Ok(())
}

fn equilibrium_law(cfg: &ExperimentConfig) -> Result<GaussianLaw> {
    match cfg.model.quadratic_coefficients() {
        Some((a, b)) => equilibrium_quadratic(a, b, cfg.model.gamma, cfg.model.sigma, cfg.model.d),
        None => Err(KinError::Config(
            "confidence curves need a quadratic model (closed-form equilibrium samples)".into(),
        )),
    }
}

fn confidence_curve(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    let d = cfg.model.d;
    let m_inf = if cfg.model.is_quadratic() {
        Some(equilibrium_law(cfg)?)
    } else if d == 1 {
        None // sampled from the fixed-point density below
    } else {
        return Err(KinError::Config(
            "confidence curves need a quadratic model or d = 1".into(),
        ));
    };
    let density = if m_inf.is_none() {
        Some(solve_fixed_point(&cfg.model, &FixedPointOptions::default())?)
    } else {
        None
    };

    let step_counts: Vec<u64> = cfg.t_grid.iter().map(|&t| steps_for(t, cfg.dt)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut freqs: BTreeMap<String, f64> = BTreeMap::new();
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let base = NoiseStream::new(cfg.seed).substream(1000 + ni as u64);
        let one = |r: usize| -> Result<Vec<f64>> {
            let ns = base.substream(r as u64);
            let target = match (&m_inf, &density) {
                (Some(law), _) => law.sample_cloud(n, &ns, stream::SAMPLING),
                (None, Some(dens)) => {
                    
                    sample_equilibrium(dens, cfg.model.gamma, cfg.model.sigma, n, &ns)?
                }
                _ => unreachable!(),
            };
            let mut state = sample_initial(&cfg.m0, n, d, &ns, stream::INIT);
            let mut dists = Vec::with_capacity(step_counts.len());
            let mut next_out = 0usize;
            let last = *step_counts.last().unwrap();
            let maybe_record = |state: &crate::model::PhaseState, step: u64, next_out: &mut usize, dists: &mut Vec<f64>| -> Result<()> {
                while *next_out < step_counts.len() && step_counts[*next_out] == step {
                    let mut pts = Vec::with_capacity(n * 2 * d);
                    for i in 0..n {
                        pts.extend_from_slice(state.position(i));
                        pts.extend_from_slice(state.velocity(i));
                    }
                    let cloud = EmpiricalCloud::new(n, 2 * d, pts)?;
                    dists.push(w2_empirical(&cloud, &target)?.cost.sqrt());
                    *next_out += 1;
                }
                Ok(())
            };
            maybe_record(&state, 0, &mut next_out, &mut dists)?;
            for step in 1..=last {
                state = step_interacting(&cfg.model, &state, cfg.dt, &ns, cfg.scheme)?;
                maybe_record(&state, step, &mut next_out, &mut dists)?;
            }
            Ok(dists)
        };
        #[cfg(feature = "parallel")]
        let all: Result<Vec<_>> = (0..cfg.replicas).into_par_iter().map(one).collect();
        #[cfg(not(feature = "parallel"))]
        let all: Result<Vec<_>> = (0..cfg.replicas).map(one).collect();
        let all = all?;
        for (ti, &t) in cfg.t_grid.iter().enumerate() {
            for &eps in &cfg.epsilons {
                let hits = all.iter().filter(|dists| dists[ti] >= eps).count();
                let freq = hits as f64 / cfg.replicas as f64;
                rows.push(vec![fmt(t), n.to_string(), fmt(eps), fmt(freq)]);
                freqs.insert(format!("t={t},n={n},eps={eps}"), freq);
            }
        }
    }
    let path = csv_path(cfg, "confidence.csv");
    write_csv(&path, "t,n,epsilon,value", &rows)?;
    record.csv_paths.push(path.display().to_string());
    record.extras = serde_json::json!({ "exceedance": freqs });
    Ok(())
}

fn coupling_growth(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    let mut rows_pp: Vec<Vec<String>> = Vec::new();
    let mut rows_tot: Vec<Vec<String>> = Vec::new();
    let mut avg_total_by_n: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut fit_result = None;
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let run_spec = CoupledRun {
            n,
            dt: cfg.dt,
            out_times: cfg.t_grid.clone(),
            surrogate: cfg.surrogate,
            m0: cfg.m0,
            replicas: cfg.replicas,
            scheme: cfg.scheme,
            lyapunov_eps: None,
        };
        let base = NoiseStream::new(cfg.seed).substream(2000 + ni as u64);
        let diag = simulate_coupled(&cfg.model, &run_spec, &base)?;
        for (r, series) in diag.per_replica.iter().enumerate() {
            for s in series {
                rows_tot.push(vec![r.to_string(), fmt(s.t), n.to_string(), fmt(s.msd_total)]);
                rows_pp.push(vec![
                    r.to_string(),
                    fmt(s.t),
                    n.to_string(),
                    fmt(s.msd_total / n as f64),
                ]);
            }
        }
        let avg = diag.average(|s| s.msd_total);
        // affine fit of ln E|Z - Zbar|^2 over the positive part of the grid
        // (the series starts at exactly zero)
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for (&t, &v) in cfg.t_grid.iter().zip(&avg) {
            if t > 0.0 && v > 0.0 {
                ts.push(t);
                ys.push(v.ln());
            }
        }
        if ts.len() >= 2 {
            fit_result = Some(linear_fit(&ts, &ys)?);
        }
        avg_total_by_n.insert(n.to_string(), avg);
    }
    let p1 = csv_path(cfg, "msd_total.csv");
    write_csv(&p1, "replica,t,n,value", &rows_tot)?;
    let p2 = csv_path(cfg, "msd_per_particle.csv");
    write_csv(&p2, "replica,t,n,value", &rows_pp)?;
    record.csv_paths.push(p1.display().to_string());
    record.csv_paths.push(p2.display().to_string());
    if let Some(f) = fit_result {
        record.slope = Some(f.slope);
        record.r_squared = Some(f.r_squared);
    }
    record.extras = serde_json::json!({ "avg_msd_total_by_n": avg_total_by_n });
    Ok(())
}

/// Long-run position/velocity sample variances, one pair per replica.
#[allow(clippy::too_many_arguments)]
pub fn equilibrium_marginal_samples(
    model: &ModelSpec,
    n: usize,
    t_final: f64,
    dt: f64,
    replicas: usize,
    m0: &crate::dynamics::InitialLaw,
    scheme: crate::dynamics::Scheme,
    noise: &NoiseStream,
) -> Result<Vec<(f64, f64)>> {
    let steps = steps_for(t_final, dt)?;
    let one = |r: usize| -> Result<(f64, f64)> {
        let ns = noise.substream(r as u64);
        let mut state = sample_initial(m0, n, model.d, &ns, stream::INIT);
        for _ in 0..steps {
            state = step_interacting(model, &state, dt, &ns, scheme)?;
        }
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
        };
        Ok((var(&state.x), var(&state.y)))
    };
    #[cfg(feature = "parallel")]
    let out: Result<Vec<_>> = (0..replicas).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let out: Result<Vec<_>> = (0..replicas).map(one).collect();
    out
}

fn equilibrium_marginal(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    let n = cfg.n_list[0];
    let t_final = *cfg.t_grid.last().unwrap();
    let samples = equilibrium_marginal_samples(
        &cfg.model,
        n,
        t_final,
        cfg.dt,
        cfg.replicas,
        &cfg.m0,
        cfg.scheme,
        &NoiseStream::new(cfg.seed),
    )?;
    let mut rows_pos = Vec::new();
    let mut rows_vel = Vec::new();
    for (r, (pv, vv)) in samples.iter().enumerate() {
        rows_pos.push(vec![r.to_string(), fmt(t_final), fmt(*pv)]);
        rows_vel.push(vec![r.to_string(), fmt(t_final), fmt(*vv)]);
    }
    let p1 = csv_path(cfg, "pos_var.csv");
    write_csv(&p1, "replica,t,value", &rows_pos)?;
    let p2 = csv_path(cfg, "vel_var.csv");
    write_csv(&p2, "replica,t,value", &rows_vel)?;
    record.csv_paths.push(p1.display().to_string());
    record.csv_paths.push(p2.display().to_string());

    let mean_se = |vals: Vec<f64>| {
        let r = vals.len() as f64;
        let m = vals.iter().sum::<f64>() / r;
        let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (r - 1.0).max(1.0);
        (m, (var / r).sqrt())
    };
    let (pos_mean, pos_se) = mean_se(samples.iter().map(|s| s.0).collect());
    let (vel_mean, vel_se) = mean_se(samples.iter().map(|s| s.1).collect());

    let mut extras = serde_json::json!({
        "pos_var_mean": pos_mean, "pos_var_se": pos_se,
        "vel_var_mean": vel_mean, "vel_var_se": vel_se,
    });
    if let Some((a, b)) = cfg.model.quadratic_coefficients() {
        let temp = cfg.model.sigma * cfg.model.sigma / (2.0 * cfg.model.gamma);
        extras["pos_var_predicted"] = serde_json::json!(temp / (a + b));
        extras["vel_var_predicted"] = serde_json::json!(temp);
    }
    if cfg.model.d == 1 {
        let sol = solve_fixed_point(&cfg.model, &FixedPointOptions::default())?;
        extras["fixed_point_variance"] = serde_json::json!(sol.variance());
        extras["fixed_point_iterations"] = serde_json::json!(sol.iterations);
    }
    record.extras = extras;
    Ok(())
}

fn rate_certificate(cfg: &ExperimentConfig, record: &mut RunRecord) -> Result<()> {
    let report = rate_report(&cfg.model, cfg.n_list[0])?;
    if let Some(spectrum) = &report.spectrum {
        let rows: Vec<Vec<String>> = spectrum
            .iter()
            .map(|e| vec![fmt(e.re), fmt(e.im), e.multiplicity.to_string()])
            .collect();
        let path = csv_path(cfg, "spectrum.csv");
        write_csv(&path, "re,im,multiplicity", &rows)?;
        record.csv_paths.push(path.display().to_string());
    }
    record.rate = report.chi_exact;
    record.extras = serde_json::to_value(&report)
        .map_err(|e| KinError::Numerical(format!("report serialization: {e}")))?;
    Ok(())
}

/// Raw coupled-trajectory diagnostics for the `simulate` subcommand:
/// long-format CSV with one row per (replica, t, metric).
pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let run_spec = CoupledRun {
        n: cfg.n_list[0],
        dt: cfg.dt,
        out_times: cfg.t_grid.clone(),
        surrogate: cfg.surrogate,
        m0: cfg.m0,
        replicas: cfg.replicas,
        scheme: cfg.scheme,
        lyapunov_eps: None,
    };
    let diag = simulate_coupled(&cfg.model, &run_spec, &NoiseStream::new(cfg.seed))?;
    let n = run_spec.n as f64;
    let mut rows = Vec::new();
    for (r, series) in diag.per_replica.iter().enumerate() {
        for s in series {
            for (name, value) in [
                ("msd_per_particle", s.msd_total / n),
                ("msd_total", s.msd_total),
                ("ex1_sq", s.ex1_sq),
                ("ey1_sq", s.ey1_sq),
                ("lyapunov", s.lyapunov),
            ] {
                rows.push(vec![r.to_string(), fmt(s.t), name.to_string(), fmt(value)]);
            }
        }
    }
    let path = csv_path(cfg, "trajectory.csv");
    write_csv(&path, "replica,t,metric,value", &rows)?;
    let record = RunRecord {
        kind: "trajectory".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.echo.clone(),
        csv_paths: vec![path.display().to_string()],
        rate: None,
        prefactor: None,
        slope: None,
        r_squared: None,
        extras: serde_json::Value::Null,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    write_manifest(cfg, &record)?;
    Ok(record)
}

/// Solves the stationary position density and writes it as (x, value) CSV
/// plus a JSON summary; backs the `equilibrium` CLI subcommand.
pub fn run_equilibrium_density(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let sol = solve_fixed_point(&cfg.model, &FixedPointOptions::default())?;
    let rows: Vec<Vec<String>> = (0..sol.values.len())
        .map(|i| vec![fmt(sol.grid_point(i)), fmt(sol.values[i])])
        .collect();
    let path = csv_path(cfg, "density.csv");
    write_csv(&path, "x,value", &rows)?;
    let record = RunRecord {
        kind: "equilibrium_density".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.echo.clone(),
        csv_paths: vec![path.display().to_string()],
        rate: None,
        prefactor: None,
        slope: None,
        r_squared: None,
        extras: serde_json::json!({
            "variance": sol.variance(),
            "iterations": sol.iterations,
            "residual": sol.residual,
        }),
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    write_manifest(cfg, &record)?;
    Ok(record)
}

/// The Gibbs law of the full particle system as a flat mean/cov pair; used
/// by tests that start the entropy flow at stationarity.
pub fn stationary_start(model: &ModelSpec, n: usize) -> Result<GaussianLaw> {
    let g = gibbs_particle_system(model, n)?;
    GaussianLaw::new(DVector::from(g.mean.clone()), g.cov.clone())
}
