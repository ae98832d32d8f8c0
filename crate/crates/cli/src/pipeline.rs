//! Orchestration: load → standardize → factor model → scores → ranking →
//! group comparison, then report writing.

use std::path::PathBuf;

use factorank_core::dataset::{standardize, IndicatorDataset};
use factorank_core::factors::{FactorModel, FactorOptions, FactorScores, FactorStage};
use factorank_core::inference::{compare_groups, GroupComparisonReport};
use factorank_core::ranking::{rank_by_factor, Direction, RankedIndex};
use factorank_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig};
use crate::csv_io::{attach_metadata, load_csv, LoadError, LoadOptions};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Every stage.
    Analyze,
    /// Stop after the factor model.
    Factors,
    /// Stop after ranking and group selection.
    Rank,
    /// Compare explicitly given groups; no factor model.
    Compare,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Factors => "factors",
            Command::Rank => "rank",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{stage}: {source}")]
    Validation { stage: &'static str, source: CoreError },
    #[error("numerical failure in {stage} stage: {source}")]
    Numerical { stage: &'static str, source: CoreError },
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error("cannot serialize {what}: {source}")]
    Serialize { what: &'static str, source: Box<dyn std::error::Error + Send + Sync> },
}

impl PipelineError {
    /// 2 for bad configuration or data, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) | PipelineError::Load(_) | PipelineError::Validation { .. } => 2,
            PipelineError::Numerical { .. } => 3,
            PipelineError::Output { .. } | PipelineError::Serialize { .. } => 1,
        }
    }

    fn at(stage: &'static str, source: CoreError) -> Self {
        let numerical = matches!(
            source,
            CoreError::Singular { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::NoFactorsRetained { .. }
                | CoreError::KmoUndefined
                | CoreError::Degenerate(_)
                | CoreError::NotSymmetric { .. }
                | CoreError::NonFinite { .. }
                | CoreError::Domain { .. }
        );
        if numerical {
            PipelineError::Numerical { stage, source }
        } else {
            PipelineError::Validation { stage, source }
        }
    }
}

/// Everything a run computed, before anything is written.
#[derive(Debug, Clone)]
pub struct Results {
    pub command: Command,
    pub config: PipelineConfig,
    pub dataset: IndicatorDataset,
    pub dropped: Vec<String>,
    pub model: Option<FactorModel>,
    pub scores: Option<FactorScores>,
    pub ranking: Option<RankedIndex>,
    pub comparison: Option<GroupComparisonReport>,
    pub warnings: Vec<String>,
}

/// Runs every stage the command needs, in memory.
pub fn execute(config: &PipelineConfig, command: Command) -> Result<Results, PipelineError> {
    config.validate()?;
    if command == Command::Compare && (config.comparison.group1.is_none() || config.comparison.group2.is_none()) {
        return Err(ConfigError::Invalid("compare needs both group1 and group2 id lists".into()).into());
    }
    let input = config.input.clone().unwrap_or_default();
    let loaded = load_csv(&input, &LoadOptions { id_column: config.id_column.clone(), missing: config.missing })?;
    let mut dataset = loaded.dataset;
    if let Some(meta) = &config.metadata {
        dataset = attach_metadata(dataset, meta)?;
    }
    let mut warnings: Vec<String> = Vec::new();
    if !loaded.dropped.is_empty() {
        warnings.push(format!(
            "listwise deletion dropped {} case(s): {}",
            loaded.dropped.len(),
            loaded.dropped.join(", ")
        ));
    }
    let mut results = Results {
        command,
        config: config.clone(),
        dataset,
        dropped: loaded.dropped,
        model: None,
        scores: None,
        ranking: None,
        comparison: None,
        warnings,
    };

    let groups = if command == Command::Compare {
        let c = &config.comparison;
        Some((c.group1.clone().unwrap_or_default(), c.group2.clone().unwrap_or_default()))
    } else {
        let analysis = match &config.variables {
            Some(names) => results.dataset.select_variables(names).map_err(|e| PipelineError::at("variables", e))?,
            None => results.dataset.clone(),
        };
        let z = standardize(&analysis).map_err(|e| PipelineError::at("standardization", e))?;
        let opts = FactorOptions { retention: config.factors.retention, rotation: config.factors.rotation_method() };
        let mut model = FactorModel::fit(&z, &opts).map_err(|e| {
            let stage = e.stage.as_str();
            match (e.stage, e.source) {
                (FactorStage::Extraction, src @ CoreError::TooManyFactors { .. }) => {
                    PipelineError::Validation { stage, source: src }
                }
                (_, src) => PipelineError::at(stage, src),
            }
        })?;
        if !model.rotation_converged {
            results.warnings.push(format!(
                "varimax did not converge within {} sweeps; using the best rotation found",
                model.rotation_sweeps
            ));
        }
        if let Some(names) = &config.factors.names {
            model.set_factor_names(names.clone()).map_err(|e| PipelineError::at("factor names", e))?;
        }
        let scores = model.scores(&z).map_err(|e| PipelineError::at("scoring", e))?;
        results.model = Some(model);

        let groups = if command == Command::Factors {
            None
        } else {
            let selector = config.ranking.factor.selector()?;
            let direction = config.ranking.direction.unwrap_or(Direction::Ascending);
            results.config.ranking.direction = Some(direction);
            let mut ranked =
                rank_by_factor(&scores, &selector, direction).map_err(|e| PipelineError::at("ranking", e))?;
            let g = ranked.assign_groups(config.ranking.k).map_err(|e| PipelineError::at("ranking", e))?;
            let pair = (g.group1.clone(), g.group2.clone());
            results.ranking = Some(ranked);
            Some(pair)
        };
        results.scores = Some(scores);
        groups
    };

    if matches!(command, Command::Analyze | Command::Compare) {
        let (g1, g2) = groups.unwrap_or_default();
        let variables =
            config.comparison.variables.clone().unwrap_or_else(|| results.dataset.indicator_names().to_vec());
        let report = compare_groups(&results.dataset, &g1, &g2, &variables, &config.comparison.core())
            .map_err(|e| PipelineError::at("comparison", e))?;
        for rec in &report.records {
            if let Some(why) = &rec.degenerate {
                results.warnings.push(format!("{}: {why}", rec.variable));
            }
        }
        results.comparison = Some(report);
    }
    Ok(results)
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Computes everything, then writes the requested reports and the run summary.
/// Nothing is written when any stage fails.
pub fn run(config: &PipelineConfig, command: Command) -> Result<Outcome, PipelineError> {
    let results = execute(config, command)?;
    let files = report::write_all(&results)?;
    Ok(Outcome { files, warnings: results.warnings })
}
