//! JSON pipeline configuration.

use std::path::{Path, PathBuf};

use factorank_core::dataset::MissingPolicy;
use factorank_core::factors::{Retention, RotationMethod, VarimaxOptions};
use factorank_core::inference::{CompareConfig, LeveneCenter, StandardizeScope};
use factorank_core::ranking::{Direction, FactorSelector, DEFAULT_GROUP_SIZE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationKind {
    #[default]
    Varimax,
    None,
}

/// A factor chosen by 1-based position or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorRef {
    Position(usize),
    Name(String),
}

impl FactorRef {
    pub fn selector(&self) -> Result<FactorSelector, ConfigError> {
        match self {
            FactorRef::Position(0) => Err(ConfigError::Invalid("ranking.factor positions start at 1".into())),
            FactorRef::Position(i) => Ok(FactorSelector::Index(i - 1)),
            FactorRef::Name(n) => Ok(FactorSelector::Name(n.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorConfig {
    pub retention: Retention,
    pub rotation: RotationKind,
    pub kaiser_normalization: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// Labels for the retained factors, in order.
    pub names: Option<Vec<String>>,
}

impl Default for FactorConfig {
    fn default() -> Self {
        let v = VarimaxOptions::default();
        Self {
            retention: Retention::Kaiser,
            rotation: RotationKind::Varimax,
            kaiser_normalization: v.kaiser_normalize,
            tol: v.tol,
            max_iter: v.max_iter,
            names: None,
        }
    }
}

impl FactorConfig {
    pub fn rotation_method(&self) -> RotationMethod {
        match self.rotation {
            RotationKind::Varimax => RotationMethod::Varimax(VarimaxOptions {
                kaiser_normalize: self.kaiser_normalization,
                tol: self.tol,
                max_iter: self.max_iter,
            }),
            RotationKind::None => RotationMethod::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub factor: FactorRef,
    /// Must be given explicitly when `factor` is a name.
    pub direction: Option<Direction>,
    pub k: usize,
}

impl Default for RankingConfig {
    fn default() -> Self {
        Self { factor: FactorRef::Position(1), direction: None, k: DEFAULT_GROUP_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    /// Defaults to every indicator in the input.
    pub variables: Option<Vec<String>>,
    pub alpha: f64,
    pub alpha_levene: f64,
    pub ci_level: f64,
    pub scope: StandardizeScope,
    pub levene_center: LeveneCenter,
    /// Explicit groups, used by the `compare` command.
    pub group1: Option<Vec<String>>,
    pub group2: Option<Vec<String>>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        let c = CompareConfig::default();
        Self {
            variables: None,
            alpha: c.alpha,
            alpha_levene: c.alpha_levene,
            ci_level: c.ci_level,
            scope: c.scope,
            levene_center: c.levene_center,
            group1: None,
            group2: None,
        }
    }
}

impl ComparisonConfig {
    pub fn core(&self) -> CompareConfig {
        CompareConfig {
            alpha: self.alpha,
            alpha_levene: self.alpha_levene,
            ci_level: self.ci_level,
            scope: self.scope,
            levene_center: self.levene_center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv, Format::Text] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub id_column: Option<String>,
    pub missing: MissingPolicy,
    /// Optional `indicator,theme,subtheme` CSV.
    pub metadata: Option<PathBuf>,
    /// Indicators entering the factor analysis; defaults to all.
    pub variables: Option<Vec<String>>,
    pub factors: FactorConfig,
    pub ranking: RankingConfig,
    pub comparison: ComparisonConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Range checks that do not need the data.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.input.is_none() {
            return bad("no input file given (set \"input\" or pass --input)".into());
        }
        if let Retention::Fixed(0) = self.factors.retention {
            return bad("fixed retention needs at least one factor".into());
        }
        if self.factors.tol.is_nan() || self.factors.tol <= 0.0 {
            return bad(format!("factors.tol must be positive, got {}", self.factors.tol));
        }
        if self.factors.max_iter == 0 {
            return bad("factors.max_iter must be at least 1".into());
        }
        if self.ranking.k == 0 {
            return bad("ranking.k must be at least 1".into());
        }
        self.ranking.factor.selector()?;
        if matches!(self.ranking.factor, FactorRef::Name(_)) && self.ranking.direction.is_none() {
            return bad("ranking.direction must be stated when the factor is chosen by name".into());
        }
        let c = &self.comparison;
        for (what, v) in [("alpha", c.alpha), ("alpha_levene", c.alpha_levene), ("ci_level", c.ci_level)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("comparison.{what} must be in (0, 1), got {v}"));
            }
        }
        if c.group1.is_some() != c.group2.is_some() {
            return bad("comparison.group1 and comparison.group2 must be given together".into());
        }
        if self.output.formats.is_empty() {
            return bad("output.formats must name at least one of json, csv, text".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = PipelineConfig { input: Some("x.csv".into()), ..Default::default() };
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.ranking.k, 10);
        assert_eq!(cfg.comparison.alpha, 0.05);
    }

    #[test]
    fn parses_enumerations() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{"input": "d.csv",
                "factors": {"retention": {"fixed": 3}, "rotation": "none"},
                "ranking": {"factor": "Distress", "direction": "descending", "k": 5},
                "comparison": {"scope": "all", "levene_center": "median"},
                "output": {"formats": ["csv"]}}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.factors.retention, Retention::Fixed(3));
        assert_eq!(cfg.ranking.factor, FactorRef::Name("Distress".into()));
        assert_eq!(cfg.comparison.scope, StandardizeScope::All);
        assert_eq!(cfg.output.formats, vec![Format::Csv]);
    }

    #[test]
    fn rejects_bad_values() {
        let parse = |s: &str| serde_json::from_str::<PipelineConfig>(s);
        assert!(parse(r#"{"ranking": {"direction": "sideways"}}"#).is_err());
        assert!(parse(r#"{"output": {"formats": ["xml"]}}"#).is_err());
        assert!(parse(r#"{"unknown_key": 1}"#).is_err());

        let base = PipelineConfig { input: Some("x.csv".into()), ..Default::default() };
        let mut c = base.clone();
        c.ranking.factor = FactorRef::Name("F1".into());
        assert!(c.validate().unwrap_err().to_string().contains("direction"));
        let mut c = base.clone();
        c.comparison.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.ranking.k = 0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.ranking.factor = FactorRef::Position(0);
        assert!(c.validate().is_err());
        assert!(PipelineConfig::default().validate().is_err());
    }
}
