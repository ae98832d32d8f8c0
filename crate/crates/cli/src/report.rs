//! Report rendering (JSON, CSV, aligned text) and the run summary.
//!
//! Every file is rendered into memory first; the directory is only touched
//! once all of them exist.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use factorank_core::factors::{FactorModel, FactorScores, Retention};
use factorank_core::inference::{GroupComparisonReport, TTestResult, TTestVariant, VariableComparison};
use factorank_core::ranking::RankedIndex;
use serde::Serialize;

use crate::config::{Format, PipelineConfig};
use crate::pipeline::{PipelineError, Results};

pub const SUMMARY_FILE: &str = "run_summary.json";

type Rendered = Vec<(String, String)>;

/// Renders every requested report plus the run summary and writes them to
/// the configured output directory. Returns the written paths.
pub fn write_all(results: &Results) -> Result<Vec<PathBuf>, PipelineError> {
    let files = render_all(results)?;
    let dir = &results.config.output.dir;
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Output { path: dir.display().to_string(), source })?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(&name);
        std::fs::write(&path, body)
            .map_err(|source| PipelineError::Output { path: path.display().to_string(), source })?;
        written.push(path);
    }
    Ok(written)
}

/// File name and contents of every output, summary last.
pub fn render_all(results: &Results) -> Result<Rendered, PipelineError> {
    let formats: BTreeSet<Format> = results.config.output.formats.iter().copied().collect();
    let mut out: Rendered = Vec::new();
    for &format in &formats {
        if let Some(model) = &results.model {
            render_factor_model(&mut out, format, model, results.scores.as_ref(), &results.config)?;
        }
        if let (Some(ranked), Some(model)) = (&results.ranking, &results.model) {
            render_ranking(&mut out, format, ranked, model)?;
        }
        if let Some(report) = &results.comparison {
            render_comparison(&mut out, format, report, results.ranking.as_ref())?;
        }
    }
    let summary = RunSummary {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        core_version: factorank_core::VERSION,
        command: results.command.as_str(),
        config: &results.config,
        n_cases: results.dataset.n_cases(),
        n_indicators: results.dataset.n_indicators(),
        dropped_cases: &results.dropped,
        warnings: &results.warnings,
        outputs: out.iter().map(|(n, _)| n.clone()).collect(),
    };
    out.push((SUMMARY_FILE.to_string(), to_json("run summary", &summary)?));
    Ok(out)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'static str,
    config: &'a PipelineConfig,
    n_cases: usize,
    n_indicators: usize,
    dropped_cases: &'a [String],
    warnings: &'a [String],
    outputs: Vec<String>,
}

fn to_json<T: Serialize>(what: &'static str, value: &T) -> Result<String, PipelineError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| PipelineError::Serialize { what, source: Box::new(e) })?;
    s.push('\n');
    Ok(s)
}

fn to_csv(what: &'static str, header: &[String], rows: &[Vec<String>]) -> Result<String, PipelineError> {
    let err = |e: csv::Error| PipelineError::Serialize { what, source: Box::new(e) };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::Serialize { what, source: Box::new(e.into_error()) })?;
    String::from_utf8(bytes).map_err(|e| PipelineError::Serialize { what, source: Box::new(e) })
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

fn strings<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Pipe-separated table; columns listed in `left` are left-aligned, the rest
/// right-aligned.
fn table(header: &[String], rows: &[Vec<String>], left: &[usize]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| if left.contains(&j) { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join(" | ").trim_end().to_string()
    };
    let mut s = line(header);
    s.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    s.push_str(&rule.join("-+-"));
    s.push('\n');
    for r in rows {
        s.push_str(&line(r));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- factor model

#[derive(Serialize)]
struct FactorModelDoc<'a> {
    #[serde(flatten)]
    model: &'a FactorModel,
    retention: Retention,
    eigenvalue_share: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case_scores: Option<&'a FactorScores>,
}

/// Variables grouped by the factor with the largest |loading|, strongest first.
fn display_order(model: &FactorModel) -> Vec<usize> {
    let l = &model.loadings_rotated;
    let dominant = |i: usize| {
        (0..l.cols()).max_by(|&a, &b| l[(i, a)].abs().total_cmp(&l[(i, b)].abs()).then(b.cmp(&a))).unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..l.rows()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (dominant(a), dominant(b));
        fa.cmp(&fb).then(l[(b, fb)].abs().total_cmp(&l[(a, fa)].abs())).then(a.cmp(&b))
    });
    order
}

fn render_factor_model(
    out: &mut Rendered,
    format: Format,
    model: &FactorModel,
    scores: Option<&FactorScores>,
    config: &PipelineConfig,
) -> Result<(), PipelineError> {
    let p = model.indicator_names.len() as f64;
    let k = model.retained;
    match format {
        Format::Json => {
            let doc = FactorModelDoc {
                model,
                retention: config.factors.retention,
                eigenvalue_share: model.eigenvalues.iter().map(|e| e / p).collect(),
                case_scores: scores,
            };
            out.push(("factor_model.json".into(), to_json("factor model", &doc)?));
        }
        Format::Csv => {
            let mut header = vec!["variable".to_string()];
            header.extend(model.factor_names.iter().cloned());
            header.push("communality".into());
            header.push("kmo_msa".into());
            let rows: Vec<Vec<String>> = (0..model.indicator_names.len())
                .map(|i| {
                    let mut r = vec![model.indicator_names[i].clone()];
                    r.extend((0..k).map(|j| num(model.loadings_rotated[(i, j)])));
                    r.push(num(model.communalities[i]));
                    r.push(opt_num(model.kmo.per_variable[i]));
                    r
                })
                .collect();
            out.push(("factor_model.csv".into(), to_csv("factor model", &header, &rows)?));

            let mut cum = 0.0;
            let rows: Vec<Vec<String>> = model
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    cum += e / p;
                    vec![(i + 1).to_string(), num(e), num(e / p), num(cum), (i < k).to_string()]
                })
                .collect();
            let header = strings(["component", "eigenvalue", "proportion", "cumulative", "retained"]);
            out.push(("factor_model_eigenvalues.csv".into(), to_csv("eigenvalues", &header, &rows)?));

            let mut header = vec!["variable".to_string()];
            header.extend(model.factor_names.iter().cloned());
            let rows: Vec<Vec<String>> = (0..model.indicator_names.len())
                .map(|i| {
                    let mut r = vec![model.indicator_names[i].clone()];
                    r.extend((0..k).map(|j| num(model.score_coefficients[(i, j)])));
                    r
                })
                .collect();
            out.push(("factor_model_score_coefficients.csv".into(), to_csv("score coefficients", &header, &rows)?));

            if let Some(s) = scores {
                let mut header = vec!["case_id".to_string()];
                header.extend(s.factor_names.iter().cloned());
                let rows: Vec<Vec<String>> = s
                    .case_ids
                    .iter()
                    .enumerate()
                    .map(|(i, id)| {
                        let mut r = vec![id.clone()];
                        r.extend(s.scores.row(i).iter().map(|&v| num(v)));
                        r
                    })
                    .collect();
                out.push(("factor_scores.csv".into(), to_csv("factor scores", &header, &rows)?));
            }
        }
        Format::Text => {
            let mut s = String::new();
            let retention = match config.factors.retention {
                Retention::Kaiser => "eigenvalue > 1".to_string(),
                Retention::Fixed(n) => format!("fixed at {n}"),
            };
            s.push_str("Factor model (principal components)\n");
            s.push_str(&format!("Indicators: {}\n", model.indicator_names.len()));
            s.push_str(&format!("Retained factors: {k} ({retention})\n"));
            s.push_str(&format!("Variance explained: {:.3}%\n", 100.0 * model.variance_explained));
            s.push_str(&format!("KMO sampling adequacy: {} ({})\n", f3(model.kmo.overall), model.kmo.label));
            let rotation = if model.rotation_sweeps == 0 && model.rotation_converged {
                "rotation: none or already simple".to_string()
            } else if model.rotation_converged {
                format!("rotation: varimax, converged after {} sweeps", model.rotation_sweeps)
            } else {
                format!("rotation: varimax, NOT converged after {} sweeps", model.rotation_sweeps)
            };
            s.push_str(&capitalize(&rotation));
            s.push_str("\n\nEigenvalues\n");
            let mut cum = 0.0;
            let rows: Vec<Vec<String>> = model
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    cum += e / p;
                    vec![
                        (i + 1).to_string(),
                        f3(e),
                        f3(100.0 * e / p),
                        f3(100.0 * cum),
                        if i < k { "yes".into() } else { String::new() },
                    ]
                })
                .collect();
            s.push_str(&table(
                &strings(["Component", "Eigenvalue", "% of Variance", "Cumulative %", "Retained"]),
                &rows,
                &[],
            ));

            s.push_str("\nRotated loadings\n");
            let mut header = vec!["Variable".to_string()];
            header.extend(model.factor_names.iter().cloned());
            header.push("Communality".into());
            header.push("MSA".into());
            let rows: Vec<Vec<String>> = display_order(model)
                .into_iter()
                .map(|i| {
                    let mut r = vec![model.indicator_names[i].clone()];
                    r.extend((0..k).map(|j| f3(model.loadings_rotated[(i, j)])));
                    r.push(f3(model.communalities[i]));
                    r.push(model.kmo.per_variable[i].map(f3).unwrap_or_else(|| "-".into()));
                    r
                })
                .collect();
            s.push_str(&table(&header, &rows, &[0]));
            out.push(("factor_model.txt".into(), s));
        }
    }
    Ok(())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

// --------------------------------------------------------------------- ranking

#[derive(Serialize)]
struct TopLoading {
    variable: String,
    loading: f64,
}

#[derive(Serialize)]
struct RankingDoc<'a> {
    /// 1-based, matching the CLI's `--factor` positions.
    factor_position: usize,
    #[serde(flatten)]
    ranking: &'a RankedIndex,
    top_loadings: Vec<TopLoading>,
}

fn top_loadings(model: &FactorModel, factor: usize) -> Vec<TopLoading> {
    model
        .top_loadings(factor, 3)
        .into_iter()
        .map(|(i, l)| TopLoading { variable: model.indicator_names[i].clone(), loading: l })
        .collect()
}

fn group_of(ranked: &RankedIndex, rank: usize) -> &'static str {
    match &ranked.groups {
        Some(g) if rank <= g.k => "1",
        Some(g) if rank > ranked.entries.len() - g.k => "2",
        _ => "",
    }
}

fn render_ranking(
    out: &mut Rendered,
    format: Format,
    ranked: &RankedIndex,
    model: &FactorModel,
) -> Result<(), PipelineError> {
    match format {
        Format::Json => {
            let doc = RankingDoc {
                factor_position: ranked.factor_index + 1,
                ranking: ranked,
                top_loadings: top_loadings(model, ranked.factor_index),
            };
            out.push(("ranking.json".into(), to_json("ranking", &doc)?));
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = ranked
                .entries
                .iter()
                .map(|e| vec![e.rank.to_string(), e.case_id.clone(), num(e.score), group_of(ranked, e.rank).into()])
                .collect();
            out.push((
                "ranking.csv".into(),
                to_csv("ranking", &strings(["rank", "case_id", "score", "group"]), &rows)?,
            ));
        }
        Format::Text => {
            let n = ranked.entries.len();
            let mut s = format!(
                "Ranking on {} (factor {}, {}; rank 1 = {} score)\n",
                ranked.factor_name,
                ranked.factor_index + 1,
                ranked.direction.as_str(),
                match ranked.direction {
                    factorank_core::ranking::Direction::Ascending => "lowest",
                    factorank_core::ranking::Direction::Descending => "highest",
                }
            );
            let tops: Vec<String> = top_loadings(model, ranked.factor_index)
                .iter()
                .map(|t| format!("{} ({})", t.variable, f3(t.loading)))
                .collect();
            s.push_str(&format!("Largest loadings: {}\n", tops.join(", ")));
            let shown: Vec<&factorank_core::ranking::RankEntry> = match &ranked.groups {
                Some(g) => {
                    s.push_str(&format!("Group 1: ranks 1-{}; group 2: ranks {}-{} of {n}\n\n", g.k, n - g.k + 1, n));
                    ranked.entries[..g.k].iter().chain(&ranked.entries[n - g.k..]).collect()
                }
                None => {
                    s.push('\n');
                    ranked.entries.iter().collect()
                }
            };
            let rows: Vec<Vec<String>> =
                shown.iter().map(|e| vec![e.rank.to_string(), e.case_id.clone(), f3(e.score)]).collect();
            let rendered = table(&strings(["Rank", "Communities", "Score"]), &rows, &[1]);
            let mut lines: Vec<&str> = rendered.lines().collect();
            let gap = "...";
            if let Some(g) = &ranked.groups {
                if n > 2 * g.k {
                    lines.insert(2 + g.k, gap);
                }
            }
            s.push_str(&lines.join("\n"));
            s.push('\n');
            out.push(("ranking.txt".into(), s));
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ comparison

#[derive(Serialize)]
struct ComparisonSummary {
    variables: usize,
    unequal_variances: usize,
    significant_at_alpha: usize,
    significant_at_05: usize,
    significant_at_10: usize,
    degenerate: usize,
}

#[derive(Serialize)]
struct ComparisonDoc<'a> {
    #[serde(flatten)]
    report: &'a GroupComparisonReport,
    summary: ComparisonSummary,
}

fn summarize(report: &GroupComparisonReport) -> ComparisonSummary {
    let r = &report.records;
    ComparisonSummary {
        variables: r.len(),
        unequal_variances: report.count_unequal_variances(),
        significant_at_alpha: report.count_significant(),
        significant_at_05: r.iter().filter(|v| v.significant_at_05).count(),
        significant_at_10: r.iter().filter(|v| v.significant_at_10).count(),
        degenerate: r.iter().filter(|v| v.degenerate.is_some()).count(),
    }
}

fn ttest_cells(t: Option<&TTestResult>) -> Vec<String> {
    match t {
        Some(t) => vec![
            num(t.t),
            num(t.df),
            num(t.p_two_tailed),
            num(t.mean_difference),
            num(t.se_difference),
            num(t.ci_low),
            num(t.ci_high),
        ],
        None => vec![String::new(); 7],
    }
}

fn comparison_csv_row(v: &VariableComparison) -> Vec<String> {
    let mut r = vec![v.variable.clone()];
    for g in [&v.group1, &v.group2] {
        r.extend([g.n.to_string(), num(g.mean), num(g.sd), num(g.sem)]);
    }
    match &v.levene {
        Some(l) => r.extend([num(l.f), l.df1.to_string(), l.df2.to_string(), num(l.p)]),
        None => r.extend(vec![String::new(); 4]),
    }
    r.extend(ttest_cells(v.pooled.as_ref()));
    r.extend(ttest_cells(v.welch.as_ref()));
    r.push(v.reported_variant.map(|t| t.as_str().to_string()).unwrap_or_default());
    r.push(v.significant.to_string());
    r.push(v.significant_at_05.to_string());
    r.push(v.significant_at_10.to_string());
    r.push(v.degenerate.clone().unwrap_or_default());
    r
}

fn comparison_csv_header() -> Vec<String> {
    let mut h = vec!["variable".to_string()];
    for g in ["group1", "group2"] {
        for c in ["n", "mean", "sd", "sem"] {
            h.push(format!("{g}_{c}"));
        }
    }
    h.extend(strings(["levene_f", "levene_df1", "levene_df2", "levene_p"]));
    for v in ["pooled", "welch"] {
        for c in ["t", "df", "p", "mean_difference", "se_difference", "ci_low", "ci_high"] {
            h.push(format!("{v}_{c}"));
        }
    }
    h.extend(strings(["reported_variant", "significant", "significant_at_05", "significant_at_10", "degenerate"]));
    h
}

fn render_comparison(
    out: &mut Rendered,
    format: Format,
    report: &GroupComparisonReport,
    ranked: Option<&RankedIndex>,
) -> Result<(), PipelineError> {
    match format {
        Format::Json => {
            let doc = ComparisonDoc { report, summary: summarize(report) };
            out.push(("comparison.json".into(), to_json("comparison", &doc)?));
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = report.records.iter().map(comparison_csv_row).collect();
            out.push(("comparison.csv".into(), to_csv("comparison", &comparison_csv_header(), &rows)?));
        }
        Format::Text => out.push(("comparison.txt".into(), comparison_text(report, ranked))),
    }
    Ok(())
}

fn comparison_text(report: &GroupComparisonReport, ranked: Option<&RankedIndex>) -> String {
    let cfg = &report.config;
    let mut s = String::new();
    s.push_str(&format!(
        "ALPHA = {} (Levene alpha = {}, {}% confidence intervals)\n",
        cfg.alpha,
        cfg.alpha_levene,
        100.0 * cfg.ci_level
    ));
    match ranked.and_then(|r| r.groups.as_ref().map(|g| (r, g))) {
        Some((r, g)) => {
            let n = r.entries.len();
            s.push_str(&format!("Group 1: ranks 1-{} on {}; group 2: ranks {}-{n}\n", g.k, r.factor_name, n - g.k + 1));
        }
        None => s.push_str(&format!(
            "Group 1: {}\nGroup 2: {}\n",
            report.group1_ids.join(", "),
            report.group2_ids.join(", ")
        )),
    }
    let scope = match cfg.scope {
        factorank_core::inference::StandardizeScope::Selected => "the selected cases",
        factorank_core::inference::StandardizeScope::All => "all cases",
    };
    s.push_str(&format!("Tests use z-scores computed over {scope}; descriptives are in raw units.\n"));

    s.push_str("\nGroup Statistics\n");
    let mut rows = Vec::new();
    for v in &report.records {
        for (label, g) in [("1", &v.group1), ("2", &v.group2)] {
            rows.push(vec![
                if label == "1" { v.variable.clone() } else { String::new() },
                label.to_string(),
                g.n.to_string(),
                f3(g.mean),
                f3(g.sd),
                f3(g.sem),
            ]);
        }
    }
    s.push_str(&table(&strings(["Variable", "Group", "N", "Mean", "Std. Deviation", "Std. Error Mean"]), &rows, &[0]));

    s.push_str("\nIndependent Samples Test\n");
    let mut rows = Vec::new();
    for v in &report.records {
        let (lf, lp) = match &v.levene {
            Some(l) => (f3(l.f), f3(l.p)),
            None => ("-".into(), "-".into()),
        };
        for (variant, t) in [(TTestVariant::Pooled, v.pooled.as_ref()), (TTestVariant::Welch, v.welch.as_ref())] {
            let first = variant == TTestVariant::Pooled;
            let mut r = vec![
                if first { v.variable.clone() } else { String::new() },
                if first { "assumed".into() } else { "not assumed".into() },
                if first { lf.clone() } else { String::new() },
                if first { lp.clone() } else { String::new() },
            ];
            match t {
                Some(t) => r.extend([
                    f3(t.t),
                    f3(t.df),
                    f3(t.p_two_tailed),
                    f3(t.mean_difference),
                    f3(t.se_difference),
                    f3(t.ci_low),
                    f3(t.ci_high),
                ]),
                None => r.extend(vec!["-".to_string(); 7]),
            }
            let reported = v.reported_variant == Some(variant);
            r.push(if reported { "*".into() } else { String::new() });
            let stars = if !reported {
                String::new()
            } else if v.significant_at_05 {
                "**".into()
            } else if v.significant_at_10 {
                "*".into()
            } else {
                String::new()
            };
            r.push(stars);
            rows.push(r);
        }
    }
    let ci = format!("{}%", 100.0 * cfg.ci_level);
    s.push_str(&table(
        &[
            "Variable".to_string(),
            "Equal variances".into(),
            "Levene F".into(),
            "Levene Sig.".into(),
            "t".into(),
            "df".into(),
            "Sig. (2-tailed)".into(),
            "Mean Difference".into(),
            "Std. Error Difference".into(),
            format!("{ci} Lower"),
            format!("{ci} Upper"),
            "Reported".into(),
            "Sig.".into(),
        ],
        &rows,
        &[0, 1],
    ));
    s.push_str("Reported: the row chosen by Levene's test. Sig.: ** p < 0.05, * p < 0.10.\n");
    for v in &report.records {
        if let Some(why) = &v.degenerate {
            s.push_str(&format!("Note: {}: {why}\n", v.variable));
        }
    }

    let sum = summarize(report);
    s.push_str(&format!(
        "\nUnequal variances (Levene p <= {}): {} of {}\n",
        cfg.alpha_levene, sum.unequal_variances, sum.variables
    ));
    s.push_str(&format!("Significant at alpha = {}: {}\n", cfg.alpha, sum.significant_at_alpha));
    s.push_str(&format!("Significant at 0.05: {}\n", sum.significant_at_05));
    s.push_str(&format!("Significant at 0.10: {}\n", sum.significant_at_10));
    s
}

/// Reads back a run summary's list of outputs; used by tests and tooling.
pub fn summary_outputs(dir: &Path) -> std::io::Result<Vec<String>> {
    let text = std::fs::read_to_string(dir.join(SUMMARY_FILE))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(std::io::Error::other)?;
    Ok(v["outputs"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str().map(str::to_owned)).collect())
        .unwrap_or_default())
}
