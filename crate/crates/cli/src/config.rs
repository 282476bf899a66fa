//! Run configuration: TOML in, validated [`RunConfig`] out.
//!
//! Every key is optional; an empty file yields the reference setup (the
//! `-10` well of radius 8, searched with two layers in `[0, 10] x [-20, 0]`).

use std::fmt;
use std::path::{Path, PathBuf};

use layerscat::{AdmissibleBox, IrrsParams, LayeredPotential};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Wave numbers; one dataset per entry.
    pub k: Vec<f64>,
    /// Highest partial wave; `l_max + 1` shifts per dataset.
    pub l_max: usize,
    /// Noise levels `h`; inversion runs once per `(k, h)` pair.
    pub noise_levels: Vec<f64>,
    pub output_dir: PathBuf,
    /// Potential used by `forward` and for synthesizing inversion data.
    pub potential: PotentialSpec,
    pub search: SearchSpec,
    pub irrs: IrrsSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: vec![2.5],
            l_max: 30,
            noise_levels: vec![0.0],
            output_dir: PathBuf::from("out"),
            potential: PotentialSpec::default(),
            search: SearchSpec::default(),
            irrs: IrrsSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            breakpoints: vec![8.0],
            values: vec![-10.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    pub max_layers: usize,
    pub radius: f64,
    pub q_low: f64,
    pub q_high: f64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            max_layers: 2,
            radius: 10.0,
            q_low: -20.0,
            q_high: 0.0,
        }
    }
}

/// IRRS settings without the seed, which lives at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrrsSpec {
    pub batch_size: usize,
    pub gamma: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub j_max: usize,
    pub eps_r: f64,
}

impl Default for IrrsSpec {
    fn default() -> Self {
        let p = IrrsParams::default();
        Self {
            batch_size: p.batch_size,
            gamma: p.gamma,
            nu: p.nu,
            epsilon: p.epsilon,
            beta: p.beta,
            j_max: p.j_max,
            eps_r: p.eps_r,
        }
    }
}

impl RunConfig {
    pub fn irrs_params(&self) -> IrrsParams {
        let s = &self.irrs;
        IrrsParams {
            batch_size: s.batch_size,
            gamma: s.gamma,
            nu: s.nu,
            epsilon: s.epsilon,
            beta: s.beta,
            j_max: s.j_max,
            eps_r: s.eps_r,
            seed: self.seed,
        }
    }

    pub fn admissible_box(&self) -> AdmissibleBox {
        let s = &self.search;
        AdmissibleBox {
            max_layers: s.max_layers,
            radius: s.radius,
            q_low: s.q_low,
            q_high: s.q_high,
        }
    }

    pub fn true_potential(&self) -> layerscat::Result<LayeredPotential> {
        LayeredPotential::new(
            self.potential.breakpoints.clone(),
            self.potential.values.clone(),
        )
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Every violated constraint, each tagged with the offending key.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        if self.k.is_empty() {
            v.push(("k".into(), "at least one wave number is required".into()));
        }
        for &k in &self.k {
            if !(k > 0.0) || !k.is_finite() {
                v.push((
                    "k".into(),
                    format!("wave numbers must be positive (got {k})"),
                ));
            }
        }
        if self.noise_levels.is_empty() {
            v.push((
                "noise_levels".into(),
                "at least one noise level is required".into(),
            ));
        }
        for &h in &self.noise_levels {
            if !(h >= 0.0) || !h.is_finite() {
                v.push((
                    "noise_levels".into(),
                    format!("noise levels must be >= 0 (got {h})"),
                ));
            }
        }
        if let Err(e) = self.true_potential() {
            v.push(("potential".into(), e.to_string()));
        }
        for msg in self.admissible_box().violations() {
            v.push((search_key(&msg), msg));
        }
        for msg in self.irrs_params().violations() {
            v.push((irrs_key(&msg), msg));
        }
        v
    }
}

fn search_key(msg: &str) -> String {
    let field = ["max_layers", "radius", "q_low"]
        .into_iter()
        .find(|f| msg.starts_with(f))
        .unwrap_or("q_low");
    format!("search.{field}")
}

fn irrs_key(msg: &str) -> String {
    let field = if msg.starts_with("gamma * L") || msg.starts_with("nu * gamma * L") {
        "batch_size"
    } else {
        msg.split_whitespace().next().unwrap_or("")
    };
    format!("irrs.{field}")
}

/// A configuration error; `line` is 1-based when the problem has a source
/// location.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration {}:", self.path.display())?;
        for i in &self.issues {
            match i.line {
                Some(line) => writeln!(
                    f,
                    "  {}:{line}: {}: {}",
                    self.path.display(),
                    i.key,
                    i.message
                )?,
                None => writeln!(f, "  {}: {}: {}", self.path.display(), i.key, i.message)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> anyhow::Result<RunConfig> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(parse_config_str(&src, path)?)
}

/// Parses `src`; `path` is only used in messages.
pub fn parse_config_str(src: &str, path: &Path) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        issues: vec![ConfigIssue {
            key: "syntax".into(),
            line: e.span().map(|s| line_of(src, s.start)),
            message: e.message().to_string(),
        }],
    })?;
    let issues: Vec<ConfigIssue> = cfg
        .violations()
        .into_iter()
        .map(|(key, message)| ConfigIssue {
            line: key_line(src, &key),
            key,
            message,
        })
        .collect();
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError {
            path: path.to_path_buf(),
            issues,
        })
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of the dotted `key` in `src`, when it is written out explicitly.
fn key_line(src: &str, key: &str) -> Option<usize> {
    let doc = toml_edit::ImDocument::parse(src.to_owned()).ok()?;
    let mut item = doc.as_item();
    for part in key.split('.') {
        item = item.get(part)?;
    }
    let span = item
        .span()
        .or_else(|| item.as_table().and_then(|t| t.span()))?;
    Some(line_of(src, span.start))
}
