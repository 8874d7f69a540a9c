//! Flat `key=value` run configuration.
//!
//! ```text
//! # Fisher reference run
//! model = fisher
//! alpha = 100
//! u0 = -0.1, 0.02, -0.002
//! K = 20
//! h0 = 0.01
//! ```

use std::fmt;
use std::path::Path;

use rigpde::integrate::RunConfig;
use rigpde::model::ModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.msg)
        } else {
            write!(f, "config line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "model", "alpha", "gamma", "q", "u0", "K", "h0", "z1_target", "tol", "shrink", "grow",
    "max_steps", "nu", "khat", "n_init", "n_min", "n_max", "max_opt_iter", "tail_tol",
    "retry_factor", "retries",
];

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, msg: msg.into() }
}

fn num(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| err(line, format!("{key}: not a number: {v:?}")))
}

fn int(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| err(line, format!("{key}: not a non-negative integer: {v:?}")))
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| num(line, key, s.trim())).collect()
}

/// Parses config text. Unknown keys and duplicates are errors; `model`, `K`
/// and `h0` are required, and `alpha` for the named models.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(i + 1, format!("expected key=value, got {line:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(err(i + 1, format!("unknown key {k:?}")));
        }
        if pairs.iter().any(|(_, p, _)| p == k) {
            return Err(err(i + 1, format!("duplicate key {k:?}")));
        }
        pairs.push((i + 1, k.to_string(), v.to_string()));
    }
    let get = |key: &str| pairs.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()));
    let need = |key: &str| get(key).ok_or_else(|| err(0, format!("missing key {key:?}")));

    let (ml, model_name) = need("model")?;
    let alpha = match get("alpha") {
        Some((l, v)) => Some(num(l, "alpha", v)?),
        None => None,
    };
    let model = match model_name {
        "fisher" | "swift-hohenberg" | "sh" => {
            let a = alpha.ok_or_else(|| err(ml, "this model needs alpha"))?;
            if model_name == "fisher" {
                ModelSpec::fisher(a)
            } else {
                ModelSpec::swift_hohenberg(a)
            }
        }
        "custom" => {
            let (gl, g) = need("gamma")?;
            let gamma = list(gl, "gamma", g)?;
            let q = match get("q") {
                Some((l, v)) => list(l, "q", v)?,
                None => Vec::new(),
            };
            ModelSpec::new("custom", gamma, q).map_err(|e| err(gl, e.to_string()))?
        }
        other => return Err(err(ml, format!("unknown model {other:?}"))),
    };
    let u0 = match get("u0") {
        Some((l, v)) => list(l, "u0", v)?,
        None => Vec::new(),
    };
    let (kl, kv) = need("K")?;
    let k = int(kl, "K", kv)?;
    let (hl, hv) = need("h0")?;
    let h0 = num(hl, "h0", hv)?;
    let mut cfg = RunConfig::new(model, u0, k, h0);

    for (l, key, v) in &pairs {
        let (l, v) = (*l, v.as_str());
        match key.as_str() {
            "z1_target" => cfg.z1_target = num(l, key, v)?,
            "tol" => cfg.tol = num(l, key, v)?,
            "shrink" => cfg.shrink = num(l, key, v)?,
            "grow" => cfg.grow = num(l, key, v)?,
            "max_steps" => cfg.max_steps = int(l, key, v)?,
            "nu" => cfg.nu = num(l, key, v)?,
            "khat" => cfg.khat = Some(int(l, key, v)?),
            "n_init" => cfg.n_init = int(l, key, v)?,
            "n_min" => cfg.n_min = int(l, key, v)?,
            "n_max" => cfg.n_max = int(l, key, v)?,
            "max_opt_iter" => cfg.max_opt_iter = int(l, key, v)?,
            "tail_tol" => cfg.tail_tol = num(l, key, v)?,
            "retry_factor" => cfg.retry_factor = num(l, key, v)?,
            "retries" => cfg.retries = int(l, key, v)?,
            _ => {}
        }
    }
    cfg.validate().map_err(|e| err(0, e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(parse_config(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fisher_text() {
        let c = parse_config(
            "model=fisher\nalpha=100\nu0=-0.1,0.02,-0.002 # paper data\nK=20\nh0=0.01\nz1_target=0.3\n",
        )
        .unwrap();
        assert_eq!(c.model, ModelSpec::fisher(100.0));
        assert_eq!(c.u0, vec![-0.1, 0.02, -0.002]);
        assert_eq!((c.k_modes, c.h0, c.z1_target), (20, 0.01, 0.3));
        assert_eq!(c.tol, 0.01);
    }

    #[test]
    fn custom_model() {
        let c = parse_config("model=custom\ngamma=-1,1\nK=4\nh0=0.1\nu0=\n").unwrap();
        assert!(c.model.is_linear());
        assert!(c.u0.is_empty());
    }

    #[test]
    fn rejects() {
        assert!(parse_config("model=fisher\nK=3\nh0=0.1\n").is_err());
        assert!(parse_config("model=fisher\nalpha=1\nK=3\nh0=0.1\nbogus=1\n").is_err());
        assert!(parse_config("model=fisher\nalpha=1\nK=3\nK=4\nh0=0.1\n").is_err());
        assert!(parse_config("model=fisher\nalpha=1\nK=3\nh0=0.1\nz1_target=1.5\n").is_err());
        let e = parse_config("model=fisher\nalpha=x\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
