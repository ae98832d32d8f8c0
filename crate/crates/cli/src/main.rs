use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use factorank::config::{ConfigError, FactorRef, Format, PipelineConfig, RotationKind};
use factorank::{Command, PipelineError};
use factorank_core::dataset::MissingPolicy;
use factorank_core::factors::Retention;
use factorank_core::inference::{LeveneCenter, StandardizeScope};
use factorank_core::ranking::Direction;

/// Factor-analytic index building, ranking and extreme-group comparison.
#[derive(Debug, Parser)]
#[command(name = "factorank", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Factor model, ranking and group comparison.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        factors: FactorArgs,
        #[command(flatten)]
        rank: RankArgs,
        #[command(flatten)]
        compare: CompareArgs,
    },
    /// Factor model only.
    Factors {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        factors: FactorArgs,
    },
    /// Factor model and ranking with extreme groups.
    Rank {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        factors: FactorArgs,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Compare two explicitly listed groups of cases.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        compare: CompareArgs,
        /// Comma-separated case ids of group 1.
        #[arg(long, value_delimiter = ',')]
        group1: Option<Vec<String>>,
        /// Comma-separated case ids of group 2.
        #[arg(long, value_delimiter = ',')]
        group2: Option<Vec<String>>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Input CSV: one identifier column plus numeric indicator columns.
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON pipeline configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output formats (repeat or comma-separate).
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<FormatArg>,
    /// Identifier column name (default: first column).
    #[arg(long)]
    id_column: Option<String>,
    /// Missing-value policy.
    #[arg(long, value_enum)]
    missing: Option<MissingArg>,
    /// CSV of indicator,theme,subtheme rows.
    #[arg(long)]
    metadata: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FactorArgs {
    /// Indicators entering the factor analysis (default: all).
    #[arg(long, value_delimiter = ',')]
    variables: Option<Vec<String>>,
    /// `kaiser` or a fixed number of factors.
    #[arg(long, value_parser = parse_retention)]
    retention: Option<Retention>,
    /// Rotation method.
    #[arg(long, value_enum)]
    rotation: Option<RotationArg>,
    /// Rotate raw rather than row-normalized loadings.
    #[arg(long)]
    no_kaiser_normalization: bool,
    /// Relative varimax convergence tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum varimax sweeps.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Labels for the retained factors, in order.
    #[arg(long, value_delimiter = ',')]
    factor_names: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Factor to rank on: 1-based position or factor name.
    #[arg(long)]
    factor: Option<String>,
    /// Ascending puts the lowest score at rank 1.
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Size of each extreme group.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Variables to compare (default: every indicator).
    #[arg(long, value_delimiter = ',')]
    compare_variables: Option<Vec<String>>,
    /// Significance level for the reported t-test.
    #[arg(long)]
    alpha: Option<f64>,
    /// Levene p at or below this selects the Welch test.
    #[arg(long)]
    alpha_levene: Option<f64>,
    /// Confidence level of the mean-difference interval.
    #[arg(long)]
    ci_level: Option<f64>,
    /// Cases over which test inputs are standardized.
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    /// Center for Levene's absolute deviations.
    #[arg(long, value_enum)]
    levene_center: Option<CenterArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MissingArg {
    Error,
    Listwise,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RotationArg {
    Varimax,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Selected,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CenterArg {
    Mean,
    Median,
}

fn parse_retention(s: &str) -> Result<Retention, String> {
    if s.eq_ignore_ascii_case("kaiser") {
        return Ok(Retention::Kaiser);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected \"kaiser\" or a positive factor count, got {s:?}")),
        Ok(n) => Ok(Retention::Fixed(n)),
    }
}

impl CommonArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &self.out_dir {
            cfg.output.dir = v.clone();
        }
        if !self.format.is_empty() {
            cfg.output.formats = self
                .format
                .iter()
                .map(|f| match f {
                    FormatArg::Json => Format::Json,
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Text => Format::Text,
                })
                .collect();
        }
        if let Some(v) = &self.id_column {
            cfg.id_column = Some(v.clone());
        }
        if let Some(m) = self.missing {
            cfg.missing = match m {
                MissingArg::Error => MissingPolicy::Error,
                MissingArg::Listwise => MissingPolicy::Listwise,
            };
        }
        if let Some(v) = &self.metadata {
            cfg.metadata = Some(v.clone());
        }
    }
}

impl FactorArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let f = &mut cfg.factors;
        if let Some(v) = &self.variables {
            cfg.variables = Some(v.clone());
        }
        if let Some(r) = self.retention {
            f.retention = r;
        }
        if let Some(r) = self.rotation {
            f.rotation = match r {
                RotationArg::Varimax => RotationKind::Varimax,
                RotationArg::None => RotationKind::None,
            };
        }
        if self.no_kaiser_normalization {
            f.kaiser_normalization = false;
        }
        if let Some(t) = self.tol {
            f.tol = t;
        }
        if let Some(m) = self.max_iter {
            f.max_iter = m;
        }
        if let Some(n) = &self.factor_names {
            f.names = Some(n.clone());
        }
    }
}

impl RankArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let r = &mut cfg.ranking;
        if let Some(f) = &self.factor {
            r.factor = match f.parse::<usize>() {
                Ok(i) => FactorRef::Position(i),
                Err(_) => FactorRef::Name(f.clone()),
            };
        }
        if let Some(d) = self.direction {
            r.direction = Some(match d {
                DirectionArg::Ascending => Direction::Ascending,
                DirectionArg::Descending => Direction::Descending,
            });
        }
        if let Some(k) = self.k {
            r.k = k;
        }
    }
}

impl CompareArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let c = &mut cfg.comparison;
        if let Some(v) = &self.compare_variables {
            c.variables = Some(v.clone());
        }
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        if let Some(a) = self.alpha_levene {
            c.alpha_levene = a;
        }
        if let Some(l) = self.ci_level {
            c.ci_level = l;
        }
        if let Some(s) = self.scope {
            c.scope = match s {
                ScopeArg::Selected => StandardizeScope::Selected,
                ScopeArg::All => StandardizeScope::All,
            };
        }
        if let Some(l) = self.levene_center {
            c.levene_center = match l {
                CenterArg::Mean => LeveneCenter::Mean,
                CenterArg::Median => LeveneCenter::Median,
            };
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<PipelineConfig, ConfigError> {
    match &common.config {
        Some(path) => PipelineConfig::from_file(path),
        None => Ok(PipelineConfig::default()),
    }
}

fn resolve(cli: &Cli) -> Result<(PipelineConfig, Command), PipelineError> {
    let (common, command) = match &cli.command {
        Cmd::Analyze { common, .. } => (common, Command::Analyze),
        Cmd::Factors { common, .. } => (common, Command::Factors),
        Cmd::Rank { common, .. } => (common, Command::Rank),
        Cmd::Compare { common, .. } => (common, Command::Compare),
    };
    let mut cfg = load_config(common)?;
    common.apply(&mut cfg);
    match &cli.command {
        Cmd::Analyze { factors, rank, compare, .. } => {
            factors.apply(&mut cfg);
            rank.apply(&mut cfg);
            compare.apply(&mut cfg);
        }
        Cmd::Factors { factors, .. } => factors.apply(&mut cfg),
        Cmd::Rank { factors, rank, .. } => {
            factors.apply(&mut cfg);
            rank.apply(&mut cfg);
        }
        Cmd::Compare { compare, group1, group2, .. } => {
            compare.apply(&mut cfg);
            if let Some(g) = group1 {
                cfg.comparison.group1 = Some(g.clone());
            }
            if let Some(g) = group2 {
                cfg.comparison.group2 = Some(g.clone());
            }
        }
    }
    Ok((cfg, command))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|(cfg, command)| factorank::run(&cfg, command));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
