//! Experiment configuration: TOML in, validated and defaulted struct out.
//!
//! Component and matrix indices are 1-based here, as in the math; the core
//! API is 0-based. See `docs/config.md` for the grammar.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Trees deeper than this are refused: a full stochastic tree stores
/// `2^M * n * N_x` values per level.
pub const MAX_CONFIG_DEPTH: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default)]
    pub initial: ProfileConfig,
    #[serde(default)]
    pub terminal: ProfileConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub carleman: CarlemanConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_control")]
    pub control: [f64; 2],
    #[serde(default = "default_coupling")]
    pub coupling: [f64; 2],
    #[serde(default = "default_weight")]
    pub weight: [f64; 2],
    #[serde(default = "default_a0")]
    pub a0: f64,
    #[serde(default = "default_beta0")]
    pub beta0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    /// Reaction matrix `A`.
    A,
    /// Noise matrix `B`.
    B,
    /// Convection matrix `C`.
    C,
    /// Diffusion `beta^i`.
    Beta,
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::A => "a",
            EntryKind::B => "b",
            EntryKind::C => "c",
            EntryKind::Beta => "beta",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    #[default]
    Whole,
    Control,
    Coupling,
    Weight,
}

/// One coefficient entry. Exactly one of `value`, `profile` (one value per
/// interior point) or `samples` (one row per time level) must be present;
/// the result is multiplied by the indicator of `region`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub kind: EntryKind,
    pub i: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default)]
    pub region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `amplitude_i * sin(pi x)` in every component.
    #[default]
    Sine,
    Zero,
    /// Seeded standard normal samples; per leaf for terminal data.
    Random,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default)]
    pub kind: ProfileKind,
    /// One per component; empty means all ones.
    #[serde(default)]
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Direct,
    #[default]
    Transpose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub scheme: SchemeName,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "default_cg_max_iter")]
    pub cg_max_iter: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    /// Constant of the Gronwall check in `solve-adjoint`.
    #[serde(default = "default_gronwall_fit")]
    pub gronwall_fit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeName::default(),
            cg_tol: default_cg_tol(),
            cg_max_iter: default_cg_max_iter(),
            epsilons: default_epsilons(),
            rank_tol: default_rank_tol(),
            gronwall_fit: default_gronwall_fit(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_c0_cal")]
    pub c0_cal: f64,
    /// Defaults to `3(n + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default = "default_multipliers")]
    pub lambda_multipliers: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for CarlemanConfig {
    fn default() -> Self {
        Self {
            mu: default_mu(),
            c0_cal: default_c0_cal(),
            l: None,
            lambda_multipliers: default_multipliers(),
            samples: default_samples(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { horizons: default_horizons() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

fn default_seed() -> u64 {
    42
}
fn default_horizon() -> f64 {
    1.0
}
fn default_depth() -> usize {
    10
}
fn default_nx() -> usize {
    31
}
fn default_control() -> [f64; 2] {
    [0.3, 0.8]
}
fn default_coupling() -> [f64; 2] {
    [0.35, 0.75]
}
fn default_weight() -> [f64; 2] {
    [0.45, 0.65]
}
fn default_a0() -> f64 {
    0.5
}
fn default_beta0() -> f64 {
    1.0
}
fn default_cg_tol() -> f64 {
    1e-10
}
fn default_cg_max_iter() -> usize {
    500
}
fn default_epsilons() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn default_rank_tol() -> f64 {
    1e-10
}
fn default_gronwall_fit() -> f64 {
    2.0
}
fn default_mu() -> f64 {
    2.0
}
fn default_c0_cal() -> f64 {
    1.0
}
fn default_multipliers() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_samples() -> usize {
    10
}
fn default_horizons() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}
fn default_dir() -> String {
    "out".into()
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Jsonl]
}

/// A syntax error or constraint violation, located when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{}", render(.0))]
pub struct ConfigError(pub Vec<ConfigIssue>);

fn render(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        &self.0
    }

    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|i| i.key == key)
    }
}

/// Parses, fills defaults that depend on `n`, and validates.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        ConfigError(vec![ConfigIssue { key: "syntax".into(), message: e.message().trim().to_string(), line }])
    })?;
    cfg.normalize();
    let issues = cfg.check(text);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError(issues))
    }
}

/// Canonical text: every default spelled out, fixed key order.
pub fn to_canonical(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configuration is always representable as TOML")
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (or the `nth` `[[section]]`); falls back
/// to the section header, then to nothing.
fn locate(text: &str, section: &str, nth: usize, key: &str) -> Option<usize> {
    let single = format!("[{section}]");
    let array = format!("[[{section}]]");
    let mut inside = section.is_empty();
    let mut header = None;
    let mut seen = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            inside = false;
            if line == single || line == array {
                if line == array {
                    seen += 1;
                    if seen != nth + 1 {
                        continue;
                    }
                }
                inside = true;
                header = Some(idx + 1);
            }
            continue;
        }
        if inside {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(idx + 1);
                }
            }
        }
    }
    header
}

fn interval_ok(b: [f64; 2]) -> bool {
    b[0].is_finite() && b[1].is_finite() && 0.0 < b[0] && b[0] < b[1] && b[1] < 1.0
}

impl ExperimentConfig {
    /// Component count of the configured system.
    pub fn n(&self) -> usize {
        self.problem.n
    }

    pub fn l(&self) -> u32 {
        self.carleman.l.unwrap_or(3 * (self.problem.n as u32 + 1))
    }

    fn normalize(&mut self) {
        let n = self.problem.n;
        for p in [&mut self.initial, &mut self.terminal] {
            if p.amplitudes.is_empty() {
                p.amplitudes = vec![1.0; n];
            }
        }
        if self.carleman.l.is_none() {
            self.carleman.l = Some(self.l());
        }
    }

    fn check(&self, text: &str) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push = |section: &str, nth: usize, key: &str, message: String| {
            let full = if section.is_empty() {
                key.to_string()
            } else if section == "coefficients" {
                format!("coefficients[{}].{key}", nth + 1)
            } else {
                format!("{section}.{key}")
            };
            issues.push(ConfigIssue { key: full, message, line: locate(text, section, nth, key) });
        };
        let p = &self.problem;
        if p.n == 0 {
            push("problem", 0, "n", "must be at least 1".into());
        }
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            push("problem", 0, "T", format!("must be positive, got {}", p.horizon));
        }
        if p.depth == 0 || p.depth > MAX_CONFIG_DEPTH {
            push("problem", 0, "depth", format!("must be in 1..={MAX_CONFIG_DEPTH}, got {}", p.depth));
        }
        if p.nx < 3 {
            push("problem", 0, "nx", format!("must be at least 3, got {}", p.nx));
        }
        for (key, b) in [("control", p.control), ("coupling", p.coupling), ("weight", p.weight)] {
            if !interval_ok(b) {
                push("problem", 0, key, format!("must satisfy 0 < lo < hi < 1, got [{}, {}]", b[0], b[1]));
            }
        }
        if !(p.coupling[0] >= p.control[0] && p.coupling[1] <= p.control[1]) {
            push("problem", 0, "coupling", "nesting violated: coupling region must lie inside control region".into());
        }
        if !(p.weight[0] > p.coupling[0] && p.weight[1] < p.coupling[1]) {
            push(
                "problem",
                0,
                "weight",
                "nesting violated: weight region must lie strictly inside coupling region".into(),
            );
        }
        if !(p.a0 > 0.0 && p.a0.is_finite()) {
            push("problem", 0, "a0", format!("must be positive, got {}", p.a0));
        }
        if !(p.beta0 > 0.0 && p.beta0.is_finite()) {
            push("problem", 0, "beta0", format!("must be positive, got {}", p.beta0));
        }

        let mut seen = Vec::new();
        for (k, e) in self.coefficients.iter().enumerate() {
            let in_range = |v: usize| (1..=p.n).contains(&v);
            if !in_range(e.i) {
                push("coefficients", k, "i", format!("must be in 1..={}, got {}", p.n, e.i));
            }
            match (e.kind, e.j) {
                (EntryKind::Beta, Some(_)) => push("coefficients", k, "j", "not allowed for beta".into()),
                (EntryKind::Beta, None) => {}
                (_, None) => push("coefficients", k, "j", "required for a, b and c".into()),
                (_, Some(j)) if !in_range(j) => {
                    push("coefficients", k, "j", format!("must be in 1..={}, got {j}", p.n))
                }
                (kind, Some(j)) => {
                    let forbidden = match kind {
                        EntryKind::A => e.i > j + 1,
                        _ => e.i > j,
                    };
                    if forbidden {
                        push("coefficients", k, "j", format!("{kind}({},{j}) must vanish in a cascade system", e.i));
                    }
                }
            }
            let id = (e.kind, e.i, e.j);
            if seen.contains(&id) {
                push("coefficients", k, "kind", "duplicate entry".into());
            }
            seen.push(id);
            let forms = [e.value.is_some(), e.profile.is_some(), e.samples.is_some()];
            if forms.iter().filter(|&&f| f).count() != 1 {
                push("coefficients", k, "value", "exactly one of value, profile, samples is required".into());
            }
            let finite = e.value.iter().chain(e.profile.iter().flatten()).chain(e.samples.iter().flatten().flatten());
            if finite.into_iter().any(|v| !v.is_finite()) {
                push("coefficients", k, "value", "values must be finite".into());
            }
            if let Some(profile) = &e.profile {
                if profile.len() != p.nx {
                    push("coefficients", k, "profile", format!("needs {} values, got {}", p.nx, profile.len()));
                }
            }
            if let Some(samples) = &e.samples {
                if samples.len() != p.depth + 1 || samples.iter().any(|r| r.len() != p.nx) {
                    push("coefficients", k, "samples", format!("needs {} rows of {} values", p.depth + 1, p.nx));
                }
            }
            if e.kind == EntryKind::Beta {
                let low = e.value.iter().chain(e.profile.iter().flatten()).chain(e.samples.iter().flatten().flatten());
                if e.region != Region::Whole || low.into_iter().any(|&v| v < p.beta0) {
                    push(
                        "coefficients",
                        k,
                        "value",
                        format!("diffusion must be at least beta0 = {} everywhere", p.beta0),
                    );
                }
            }
        }

        for (section, profile) in [("initial", &self.initial), ("terminal", &self.terminal)] {
            if profile.amplitudes.len() != p.n || profile.amplitudes.iter().any(|a| !a.is_finite()) {
                push(section, 0, "amplitudes", format!("needs {} finite values", p.n));
            }
        }

        let s = &self.solver;
        if !(s.cg_tol > 0.0 && s.cg_tol < 1.0) {
            push("solver", 0, "cg_tol", format!("must lie in (0, 1), got {}", s.cg_tol));
        }
        if s.cg_max_iter == 0 {
            push("solver", 0, "cg_max_iter", "must be at least 1".into());
        }
        if s.epsilons.is_empty() || s.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            push("solver", 0, "epsilons", "needs at least one positive value".into());
        }
        if !(s.rank_tol > 0.0 && s.rank_tol < 1.0) {
            push("solver", 0, "rank_tol", format!("must lie in (0, 1), got {}", s.rank_tol));
        }
        if !(s.gronwall_fit > 0.0 && s.gronwall_fit.is_finite()) {
            push("solver", 0, "gronwall_fit", format!("must be positive, got {}", s.gronwall_fit));
        }

        let c = &self.carleman;
        if !(c.mu >= 1.0 && c.mu.is_finite()) {
            push("carleman", 0, "mu", format!("must be at least 1, got {}", c.mu));
        }
        if !(c.c0_cal > 0.0 && c.c0_cal.is_finite()) {
            push("carleman", 0, "c0_cal", format!("must be positive, got {}", c.c0_cal));
        }
        if self.l() < 3 {
            push("carleman", 0, "l", format!("must be at least 3, got {}", self.l()));
        }
        if c.lambda_multipliers.is_empty() || c.lambda_multipliers.iter().any(|m| !(*m >= 1.0 && m.is_finite())) {
            push("carleman", 0, "lambda_multipliers", "needs values >= 1 (lambda must not drop below lambda0)".into());
        }
        if c.samples == 0 {
            push("carleman", 0, "samples", "must be at least 1".into());
        }

        if self.sweep.horizons.is_empty() || self.sweep.horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            push("sweep", 0, "horizons", "needs at least one positive horizon".into());
        }
        if self.output.formats.is_empty() {
            push("output", 0, "formats", "needs at least one of csv, jsonl".into());
        }
        issues
    }
}
