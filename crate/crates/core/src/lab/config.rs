//! Experiment configuration: flat key/value text or JSON, identical keys
//! in both formats.

use crate::dynamics::{InitialLaw, Scheme, SurrogateKind};
use crate::error::{KinError, Result};
use crate::model::{build_model, ModelSpec, Potential};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

/// Experiment families the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExperimentKind {
    EntropyDecay,
    ChaosScaling,
    ConfidenceCurve,
    CouplingGrowth,
    EquilibriumMarginal,
    RateCertificate,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::EntropyDecay => "entropy_decay",
            ExperimentKind::ChaosScaling => "chaos_scaling",
            ExperimentKind::ConfidenceCurve => "confidence_curve",
            ExperimentKind::CouplingGrowth => "coupling_growth",
            ExperimentKind::EquilibriumMarginal => "equilibrium_marginal",
            ExperimentKind::RateCertificate => "rate_certificate",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = KinError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "entropy" | "entropydecay" => Ok(ExperimentKind::EntropyDecay),
            "chaos" | "chaosscaling" => Ok(ExperimentKind::ChaosScaling),
            "confidence" | "confidencecurve" => Ok(ExperimentKind::ConfidenceCurve),
            "coupling" | "couplinggrowth" => Ok(ExperimentKind::CouplingGrowth),
            "equilibrium" | "equilibriummarginal" => Ok(ExperimentKind::EquilibriumMarginal),
            "rates" | "ratecertificate" => Ok(ExperimentKind::RateCertificate),
            other => Err(KinError::Config(format!("unknown experiment kind '{other}'"))),
        }
    }
}

/// Parses config text into a flat string map. JSON objects (detected by a
/// leading '{') and `key = value` lines (with '#' comments) are accepted;
/// JSON arrays become comma-separated lists.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| KinError::Config(format!("invalid JSON config: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| KinError::Config("JSON config must be an object".into()))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            map.insert(k.clone(), json_scalar(v)?);
        }
        return Ok(map);
    }
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| KinError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn json_scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        serde_json::Value::Array(items) => {
            let parts: Result<Vec<String>> = items.iter().map(json_scalar).collect();
            Ok(parts?.join(","))
        }
        other => Err(KinError::Config(format!("unsupported JSON config value: {other}"))),
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    pub n_list: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub replicas: usize,
    pub surrogate: SurrogateKind,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub m0: InitialLaw,
    pub scheme: Scheme,
    /// Rate-fit t window; default is the last half of the t grid.
    pub fit_window: Option<(f64, f64)>,
    /// Echo of the raw keys, for the manifest.
    pub echo: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "kind", "d", "gamma", "sigma", "v", "w", "n", "t", "t_max", "t_points", "dt", "replicas",
    "surrogate", "epsilon", "seed", "out", "pos_mean", "pos_var", "vel_mean", "vel_var",
    "scheme", "fit_window",
];

fn parse_potential(spec: &str) -> Result<Potential> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["quadratic", c] => Ok(Potential::Quadratic(parse_f64("potential coefficient", c)?)),
        ["coulomb", s, m] => Ok(Potential::MollifiedCoulomb {
            strength: parse_f64("interaction strength", s)?,
            mollifier: parse_f64("mollifier", m)?,
        }),
        _ => Err(KinError::Config(format!(
            "potential '{spec}' not understood; use quadratic:<a> or coulomb:<strength>:<mollifier>"
        ))),
    }
}

fn parse_f64(what: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| KinError::Config(format!("{what}: '{s}' is not a number")))
}

fn parse_usize(what: &str, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| KinError::Config(format!("{what}: '{s}' is not a nonnegative integer")))
}

fn parse_list_f64(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_f64(what, p))
        .collect()
}

/// Builds the typed config from a parsed key map, applying defaults.
/// Unknown keys are rejected to catch typos early.
pub fn build_config(map: &BTreeMap<String, String>, default_kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(KinError::Config(format!("unknown config key '{key}'")));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str);

    let kind = match (get("kind"), default_kind) {
        (Some(s), _) => s.parse()?,
        (None, Some(k)) => k,
        (None, None) => return Err(KinError::Config("missing 'kind'".into())),
    };

    let d = get("d").map(|s| parse_usize("d", s)).transpose()?.unwrap_or(1);
    let gamma = get("gamma").map(|s| parse_f64("gamma", s)).transpose()?.unwrap_or(1.0);
    let sigma = get("sigma").map(|s| parse_f64("sigma", s)).transpose()?.unwrap_or(1.0);
    let v = parse_potential(get("v").unwrap_or("quadratic:1"))?;
    let w = parse_potential(get("w").unwrap_or("quadratic:1"))?;
    let model = build_model(d, gamma, sigma, v, w)?;

    let n_list: Vec<usize> = get("n")
        .unwrap_or("8")
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_usize("n", p))
        .collect::<Result<_>>()?;
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(KinError::Config("n list must contain positive entries".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) && n_list.len() > 1 {
        return Err(KinError::Config("n list must be strictly ascending".into()));
    }

    let t_grid = if let Some(ts) = get("t") {
        parse_list_f64("t", ts)?
    } else {
        let t_max = get("t_max").map(|s| parse_f64("t_max", s)).transpose()?.unwrap_or(1.0);
        let points = get("t_points").map(|s| parse_usize("t_points", s)).transpose()?.unwrap_or(20);
        if t_max <= 0.0 || points == 0 {
            return Err(KinError::Config("need t_max > 0 and t_points >= 1".into()));
        }
        (0..=points).map(|i| t_max * i as f64 / points as f64).collect()
    };
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid[0] < 0.0 {
        return Err(KinError::Config("t grid must be nonnegative and strictly increasing".into()));
    }

    let dt = get("dt").map(|s| parse_f64("dt", s)).transpose()?.unwrap_or(1e-3);
    if dt <= 0.0 {
        return Err(KinError::Config("dt must be positive".into()));
    }
    let replicas = get("replicas").map(|s| parse_usize("replicas", s)).transpose()?.unwrap_or(8);
    if replicas == 0 {
        return Err(KinError::Config("replicas must be positive".into()));
    }

    let surrogate = match get("surrogate") {
        Some(s) => {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            match parts.as_slice() {
                ["gaussian"] => SurrogateKind::ExactGaussian,
                ["ensemble", m] => SurrogateKind::ReferenceEnsemble(parse_usize("ensemble size", m)?),
                _ => {
                    return Err(KinError::Config(format!(
                        "surrogate '{s}' not understood; use gaussian or ensemble:<M>"
                    )))
                }
            }
        }
        None => {
            if model.is_quadratic() {
                SurrogateKind::ExactGaussian
            } else {
                SurrogateKind::ReferenceEnsemble(16 * n_list.last().copied().unwrap_or(8))
            }
        }
    };
    if surrogate == SurrogateKind::ExactGaussian && !model.is_quadratic() {
        return Err(KinError::Config(
            "gaussian surrogate requires quadratic potentials; use ensemble:<M>".into(),
        ));
    }

    let epsilons = get("epsilon")
        .map(|s| parse_list_f64("epsilon", s))
        .transpose()?
        .unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if epsilons.iter().any(|&e| e <= 0.0) {
        return Err(KinError::Config("epsilon values must be positive".into()));
    }

    let seed = get("seed")
        .map(|s| s.parse::<u64>().map_err(|_| KinError::Config(format!("seed: '{s}' is not a u64"))))
        .transpose()?
        .unwrap_or(0);
    let out_dir = PathBuf::from(get("out").unwrap_or("out"));

    let m0 = InitialLaw {
        pos_mean: get("pos_mean").map(|s| parse_f64("pos_mean", s)).transpose()?.unwrap_or(0.0),
        pos_var: get("pos_var").map(|s| parse_f64("pos_var", s)).transpose()?.unwrap_or(1.0),
        vel_mean: get("vel_mean").map(|s| parse_f64("vel_mean", s)).transpose()?.unwrap_or(0.0),
        vel_var: get("vel_var").map(|s| parse_f64("vel_var", s)).transpose()?.unwrap_or(0.5),
    };
    m0.validate()?;

    let scheme = match get("scheme").unwrap_or("euler") {
        "euler" | "euler_maruyama" => Scheme::EulerMaruyama,
        "splitting" => Scheme::Splitting,
        other => return Err(KinError::Config(format!("unknown scheme '{other}'"))),
    };

    let fit_window = get("fit_window")
        .map(|s| -> Result<(f64, f64)> {
            let parts = parse_list_f64("fit_window", s)?;
            if parts.len() != 2 || parts[0] >= parts[1] {
                return Err(KinError::Config("fit_window must be 'lo,hi' with lo < hi".into()));
            }
            Ok((parts[0], parts[1]))
        })
        .transpose()?;

    Ok(ExperimentConfig {
        kind,
        model,
        n_list,
        t_grid,
        dt,
        replicas,
        surrogate,
        epsilons,
        seed,
        out_dir,
        m0,
        scheme,
        fit_window,
        echo: map.clone(),
    })
}

impl ExperimentConfig {
    /// Default rate-fit window: the last half of the t grid.
    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| {
            let hi = *self.t_grid.last().unwrap();
            let lo = self.t_grid[0];
            (lo + 0.5 * (hi - lo), hi)
        })
    }
}
