//! The resolved run configuration and the flat key=value config grammar.
//!
//! Grammar: UTF-8 text, one `key = value` per line; `#` starts a
//! comment; `[section]` headers prefix the following keys with
//! `section.`. Every key must be known; command-line flags override
//! file values, which override the built-in defaults.

use std::fmt;

use polarsim_core::HvResponseParams;

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError {
        message: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKey {
    Classical,
    Tensor,
    Free,
}

impl ScenarioKey {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKey::Classical => "classical",
            ScenarioKey::Tensor => "tensor",
            ScenarioKey::Free => "free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Qm,
    Hv,
    Both,
}

impl ModelChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::Qm => "qm",
            ModelChoice::Hv => "hv",
            ModelChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawChoice {
    Ideal,
    Malus,
    Hv,
}

impl LawChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            LawChoice::Ideal => "ideal",
            LawChoice::Malus => "malus",
            LawChoice::Hv => "hv",
        }
    }
}

/// A degree grid `start:stop:step`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn degrees(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round() as usize;
        (0..=n)
            .map(|i| self.start + i as f64 * self.step)
            .filter(|&d| d <= self.stop + 1e-9)
            .collect()
    }
}

/// Fully resolved parameters of one run; embedded verbatim in every
/// report so runs can be reproduced from their own output.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub epsilon: f64,
    pub hv: HvResponseParams,
    pub seed: u64,
    pub n_pairs: u64,
    pub tol: f64,
    pub threads: usize,
    pub grid: GridSpec,
    pub bell_scenario: ScenarioKey,
    pub bell_dim: usize,
    pub bell_restarts: usize,
    pub bell_settings: [f64; 4],
    pub format: OutputFormat,
    pub out: Option<String>,
    pub transmit_law: LawChoice,
    pub sweep_model: ModelChoice,
    pub cascade_model: ModelChoice,
    pub cascade_axes: Vec<f64>,
    pub epr_angles: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: 0.02,
            hv: HvResponseParams::default(),
            seed: 0,
            n_pairs: 1_000_000,
            tol: 1e-9,
            threads: 0,
            grid: GridSpec {
                start: 0.0,
                stop: 90.0,
                step: 1.0,
            },
            bell_scenario: ScenarioKey::Tensor,
            bell_dim: 4,
            bell_restarts: 64,
            bell_settings: [0.0, 45.0, 22.5, 157.5],
            format: OutputFormat::Csv,
            out: None,
            transmit_law: LawChoice::Malus,
            sweep_model: ModelChoice::Qm,
            cascade_model: ModelChoice::Both,
            cascade_axes: vec![0.0, 45.0, 90.0],
            epr_angles: vec![0.0, 22.5, 45.0, 67.5, 90.0],
        }
    }
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("not a number: `{}`", t.trim())))
        })
        .collect()
}

pub fn parse_grid(s: &str) -> Result<GridSpec, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err(format!("grid must be start:stop:step, got `{s}`")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("not a number in grid: `{}`", t.trim())))
        })
        .collect::<Result<_, _>>()?;
    let g = GridSpec {
        start: nums[0],
        stop: nums[1],
        step: nums[2],
    };
    if !(g.step > 0.0) {
        return Err(err(format!("grid step must be > 0, got {}", g.step)));
    }
    if g.stop < g.start {
        return Err(err(format!("grid stop {} below start {}", g.stop, g.start)));
    }
    Ok(g)
}

impl RunConfig {
    /// Applies one `key = value` pair; the key is the full dotted name.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad_num = |k: &str, v: &str| err(format!("key `{k}`: not a number: `{v}`"));
        match key {
            "epsilon" => {
                self.epsilon = value.parse().map_err(|_| bad_num(key, value))?;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| err(format!("key `seed`: not a 64-bit integer: `{value}`")))?;
            }
            "n_pairs" => {
                self.n_pairs = value
                    .parse()
                    .map_err(|_| err(format!("key `n_pairs`: not a count: `{value}`")))?;
            }
            "tol" => {
                self.tol = value.parse().map_err(|_| bad_num(key, value))?;
            }
            "threads" => {
                self.threads = value
                    .parse()
                    .map_err(|_| err(format!("key `threads`: not a count: `{value}`")))?;
            }
            "hv.a" => self.hv.a = value.parse().map_err(|_| bad_num(key, value))?,
            "hv.e" => self.hv.e = value.parse().map_err(|_| bad_num(key, value))?,
            "hv.c" => self.hv.c = value.parse().map_err(|_| bad_num(key, value))?,
            "grid.start" => self.grid.start = value.parse().map_err(|_| bad_num(key, value))?,
            "grid.stop" => self.grid.stop = value.parse().map_err(|_| bad_num(key, value))?,
            "grid.step" => self.grid.step = value.parse().map_err(|_| bad_num(key, value))?,
            "bell.scenario" => {
                self.bell_scenario = match value {
                    "classical" => ScenarioKey::Classical,
                    "tensor" => ScenarioKey::Tensor,
                    "free" => ScenarioKey::Free,
                    other => {
                        return Err(err(format!(
                            "key `bell.scenario`: expected classical|tensor|free, got `{other}`"
                        )))
                    }
                };
            }
            "bell.dim" => {
                self.bell_dim = value
                    .parse()
                    .map_err(|_| err(format!("key `bell.dim`: not a count: `{value}`")))?;
            }
            "bell.restarts" => {
                self.bell_restarts = value
                    .parse()
                    .map_err(|_| err(format!("key `bell.restarts`: not a count: `{value}`")))?;
            }
            "bell.settings" => {
                let v = parse_f64_list(value)
                    .map_err(|e| err(format!("key `bell.settings`: {}", e.message)))?;
                if v.len() != 4 {
                    return Err(err(format!(
                        "key `bell.settings`: expected 4 angles, got {}",
                        v.len()
                    )));
                }
                self.bell_settings = [v[0], v[1], v[2], v[3]];
            }
            "output.format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(err(format!(
                            "key `output.format`: expected csv|json, got `{other}`"
                        )))
                    }
                };
            }
            "output.path" => {
                self.out = if value.is_empty() {
                    None
                } else {
                    Some(value.to_string())
                };
            }
            "transmit.law" => {
                self.transmit_law = match value {
                    "ideal" => LawChoice::Ideal,
                    "malus" => LawChoice::Malus,
                    "hv" => LawChoice::Hv,
                    other => {
                        return Err(err(format!(
                            "key `transmit.law`: expected ideal|malus|hv, got `{other}`"
                        )))
                    }
                };
            }
            "sweep.model" | "cascade.model" => {
                let m = match value {
                    "qm" => ModelChoice::Qm,
                    "hv" => ModelChoice::Hv,
                    "both" => ModelChoice::Both,
                    other => {
                        return Err(err(format!(
                            "key `{key}`: expected qm|hv|both, got `{other}`"
                        )))
                    }
                };
                if key == "sweep.model" {
                    self.sweep_model = m;
                } else {
                    self.cascade_model = m;
                }
            }
            "cascade.axes" => {
                self.cascade_axes = parse_f64_list(value)
                    .map_err(|e| err(format!("key `cascade.axes`: {}", e.message)))?;
            }
            "epr.angles" => {
                self.epr_angles = parse_f64_list(value)
                    .map_err(|e| err(format!("key `epr.angles`: {}", e.message)))?;
            }
            unknown => return Err(err(format!("unknown key `{unknown}`"))),
        }
        Ok(())
    }

    /// Range validation of the merged configuration.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.epsilon.is_finite() && (0.0..=1.0).contains(&self.epsilon)) {
            return Err(err(format!(
                "key `epsilon`: must be in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.hv.a.is_finite() && self.hv.a > 0.0) {
            return Err(err(format!("key `hv.a`: must be > 0, got {}", self.hv.a)));
        }
        if !(self.hv.e.is_finite() && self.hv.e > 0.0) {
            return Err(err(format!("key `hv.e`: must be > 0, got {}", self.hv.e)));
        }
        if !(self.hv.c.is_finite() && self.hv.c >= 0.0) {
            return Err(err(format!("key `hv.c`: must be >= 0, got {}", self.hv.c)));
        }
        if self.n_pairs == 0 {
            return Err(err("key `n_pairs`: must be >= 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(err(format!("key `tol`: must be > 0, got {}", self.tol)));
        }
        if !(self.grid.step > 0.0) {
            return Err(err(format!(
                "key `grid.step`: must be > 0, got {}",
                self.grid.step
            )));
        }
        if self.grid.stop < self.grid.start {
            return Err(err("key `grid.stop`: below grid.start"));
        }
        if ![2, 4, 8].contains(&self.bell_dim) {
            return Err(err(format!(
                "key `bell.dim`: expected 2, 4, or 8, got {}",
                self.bell_dim
            )));
        }
        if self.bell_restarts == 0 {
            return Err(err("key `bell.restarts`: must be >= 1"));
        }
        if self.epr_angles.is_empty() {
            return Err(err("key `epr.angles`: must not be empty"));
        }
        if self.cascade_axes.is_empty() {
            return Err(err("key `cascade.axes`: must not be empty"));
        }
        Ok(())
    }

    /// All keys with their resolved values, in a fixed order; feeding
    /// these lines back as a config file reproduces the run.
    pub fn resolved_pairs(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        vec![
            ("epsilon".into(), format!("{}", self.epsilon)),
            ("hv.a".into(), format!("{}", self.hv.a)),
            ("hv.e".into(), format!("{}", self.hv.e)),
            ("hv.c".into(), format!("{}", self.hv.c)),
            ("seed".into(), format!("{}", self.seed)),
            ("n_pairs".into(), format!("{}", self.n_pairs)),
            ("tol".into(), format!("{}", self.tol)),
            ("threads".into(), format!("{}", self.threads)),
            ("grid.start".into(), format!("{}", self.grid.start)),
            ("grid.stop".into(), format!("{}", self.grid.stop)),
            ("grid.step".into(), format!("{}", self.grid.step)),
            ("bell.scenario".into(), self.bell_scenario.as_str().into()),
            ("bell.dim".into(), format!("{}", self.bell_dim)),
            ("bell.restarts".into(), format!("{}", self.bell_restarts)),
            ("bell.settings".into(), list(&self.bell_settings)),
            ("output.format".into(), self.format.as_str().into()),
            (
                "output.path".into(),
                self.out.clone().unwrap_or_default(),
            ),
            ("transmit.law".into(), self.transmit_law.as_str().into()),
            ("sweep.model".into(), self.sweep_model.as_str().into()),
            ("cascade.model".into(), self.cascade_model.as_str().into()),
            ("cascade.axes".into(), list(&self.cascade_axes)),
            ("epr.angles".into(), list(&self.epr_angles)),
        ]
    }
}

/// Parses config file text and applies it over `config`.
///
/// Errors name the offending line and key; unknown keys are rejected.
pub fn apply_config_text(config: &mut RunConfig, text: &str) -> Result<(), ConfigError> {
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('[') {
            let h = h
                .strip_suffix(']')
                .ok_or_else(|| err(format!("line {}: malformed section header", lineno + 1)))?;
            section = h.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let full_key = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        config
            .apply(&full_key, value.trim())
            .map_err(|e| err(format!("line {}: {}", lineno + 1, e.message)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_keeps_defaults() {
        let mut c = RunConfig::default();
        apply_config_text(&mut c, "").unwrap();
        assert_eq!(c.hv.a, 1.95);
        assert_eq!(c.hv.e, 3.56);
        assert_eq!(c.hv.c, 500.0);
        assert_eq!(c.epsilon, 0.02);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn range_error_names_key() {
        let mut c = RunConfig::default();
        apply_config_text(&mut c, "hv.a = -1\n").unwrap();
        let e = c.validate().unwrap_err();
        assert!(e.message.contains("hv.a"), "{}", e.message);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = RunConfig::default();
        let e = apply_config_text(&mut c, "nonsense = 1\n").unwrap_err();
        assert!(e.message.contains("unknown key"), "{}", e.message);
        assert!(e.message.contains("line 1"), "{}", e.message);
    }

    #[test]
    fn sections_prefix_keys() {
        let mut c = RunConfig::default();
        apply_config_text(&mut c, "[hv]\na = 2.5\n[bell]\nrestarts = 9\n").unwrap();
        assert_eq!(c.hv.a, 2.5);
        assert_eq!(c.bell_restarts, 9);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let mut c = RunConfig::default();
        apply_config_text(&mut c, "# comment\n\nepsilon = 0.05 # trailing\n").unwrap();
        assert_eq!(c.epsilon, 0.05);
    }

    #[test]
    fn type_mismatch_names_line_and_key() {
        let mut c = RunConfig::default();
        let e = apply_config_text(&mut c, "\nseed = abc\n").unwrap_err();
        assert!(e.message.contains("line 2"), "{}", e.message);
        assert!(e.message.contains("seed"), "{}", e.message);
    }

    #[test]
    fn resolved_pairs_round_trip() {
        let mut c = RunConfig::default();
        apply_config_text(&mut c, "epsilon = 0.07\n[grid]\nstep = 2.5\n").unwrap();
        let text: String = c
            .resolved_pairs()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let mut c2 = RunConfig::default();
        apply_config_text(&mut c2, &text).unwrap();
        assert_eq!(c2.epsilon, 0.07);
        assert_eq!(c2.grid.step, 2.5);
        assert_eq!(c2.resolved_pairs(), c.resolved_pairs());
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:90:1").unwrap();
        assert_eq!(g.degrees().len(), 91);
        assert!(parse_grid("0:90:0").is_err());
        assert!(parse_grid("90:0:1").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
