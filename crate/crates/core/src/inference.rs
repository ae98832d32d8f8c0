//! Two-group comparison: descriptives, Levene's test, pooled and Welch
//! t-tests with confidence intervals.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::{mean_and_sd, IndicatorDataset, ZERO_VARIANCE_TOLERANCE};
use crate::fmath;
use crate::special::{f_tail_p, t_quantile, t_two_tailed_p};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupDescriptives {
    pub n: usize,
    pub mean: f64,
    /// Sample (n − 1) standard deviation.
    pub sd: f64,
    /// Standard error of the mean, `sd / √n`.
    pub sem: f64,
}

pub fn group_descriptives(values: &[f64]) -> Result<GroupDescriptives> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewCases { found: n, required: 2 });
    }
    let (mean, sd) = mean_and_sd(values);
    Ok(GroupDescriptives { n, mean, sd, sem: sd / fmath::sqrt(n as f64) })
}

/// Center for the absolute deviations in Levene's test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LeveneCenter {
    #[default]
    Mean,
    /// Brown–Forsythe variant.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LeveneResult {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
    pub center: LeveneCenter,
}

/// One-way ANOVA F on absolute deviations from each group's center.
pub fn levene_test(g1: &[f64], g2: &[f64], center: LeveneCenter) -> Result<LeveneResult> {
    for g in [g1, g2] {
        if g.len() < 2 {
            return Err(Error::TooFewCases { found: g.len(), required: 2 });
        }
    }
    let deviations = |g: &[f64]| -> Vec<f64> {
        let c = match center {
            LeveneCenter::Mean => g.iter().sum::<f64>() / g.len() as f64,
            LeveneCenter::Median => median(g),
        };
        g.iter().map(|x| fmath::abs(x - c)).collect()
    };
    let groups = [deviations(g1), deviations(g2)];
    let total_n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / total_n as f64;

    let mut between = 0.0;
    let mut within = 0.0;
    let mut scale = 0.0;
    for d in &groups {
        let m = d.iter().sum::<f64>() / d.len() as f64;
        between += d.len() as f64 * (m - grand) * (m - grand);
        within += d.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        scale += d.iter().map(|v| v * v).sum::<f64>();
    }
    if within <= 1e-24 * scale {
        return Err(Error::Degenerate("Levene test with zero within-group deviation spread"));
    }
    let (df1, df2) = (groups.len() - 1, total_n - groups.len());
    let f = (between / df1 as f64) / (within / df2 as f64);
    let p = f_tail_p(f, df1 as f64, df2 as f64)?;
    Ok(LeveneResult { f, df1, df2, p, center })
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TTestVariant {
    /// Equal variances assumed.
    Pooled,
    /// Welch–Satterthwaite.
    Welch,
}

impl TTestVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TTestVariant::Pooled => "pooled",
            TTestVariant::Welch => "welch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TTestResult {
    pub variant: TTestVariant,
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
    /// mean(g1) − mean(g2).
    pub mean_difference: f64,
    pub se_difference: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Zero spread in both groups with equal means: reported as t = 0, p = 1.
    pub degenerate: bool,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "confidence level", value: level })
    }
}

fn finish(variant: TTestVariant, diff: f64, se: f64, df: f64, level: f64) -> Result<TTestResult> {
    if se.is_nan() || se <= 0.0 {
        if diff != 0.0 {
            return Err(Error::Degenerate("zero variance in both groups with unequal means"));
        }
        return Ok(TTestResult {
            variant,
            t: 0.0,
            df,
            p_two_tailed: 1.0,
            mean_difference: 0.0,
            se_difference: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            level,
            degenerate: true,
        });
    }
    let t = diff / se;
    let half = t_quantile(0.5 * (1.0 + level), df)? * se;
    Ok(TTestResult {
        variant,
        t,
        df,
        p_two_tailed: t_two_tailed_p(t, df)?,
        mean_difference: diff,
        se_difference: se,
        ci_low: diff - half,
        ci_high: diff + half,
        level,
        degenerate: false,
    })
}

fn moments(g1: &[f64], g2: &[f64]) -> Result<(GroupDescriptives, GroupDescriptives)> {
    Ok((group_descriptives(g1)?, group_descriptives(g2)?))
}

/// Student's t-test with pooled variance, `df = n1 + n2 − 2`.
pub fn t_test_pooled(g1: &[f64], g2: &[f64], level: f64) -> Result<TTestResult> {
    check_level(level)?;
    let (a, b) = moments(g1, g2)?;
    let (n1, n2) = (a.n as f64, b.n as f64);
    let df = n1 + n2 - 2.0;
    let pooled = ((n1 - 1.0) * a.sd * a.sd + (n2 - 1.0) * b.sd * b.sd) / df;
    let se = fmath::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
    finish(TTestVariant::Pooled, a.mean - b.mean, se, df, level)
}

/// Welch's unequal-variances t-test with Welch–Satterthwaite df.
pub fn t_test_welch(g1: &[f64], g2: &[f64], level: f64) -> Result<TTestResult> {
    check_level(level)?;
    let (a, b) = moments(g1, g2)?;
    let (n1, n2) = (a.n as f64, b.n as f64);
    let v1 = a.sd * a.sd / n1;
    let v2 = b.sd * b.sd / n2;
    let se2 = v1 + v2;
    let df = if se2 > 0.0 { se2 * se2 / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0)) } else { n1 + n2 - 2.0 };
    finish(TTestVariant::Welch, a.mean - b.mean, fmath::sqrt(se2), df, level)
}

/// Which cases the inferential z-scores are computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StandardizeScope {
    /// Only the cases of the two groups.
    #[default]
    Selected,
    /// Every case in the dataset.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompareConfig {
    pub alpha: f64,
    /// Levene p above this selects the pooled row.
    pub alpha_levene: f64,
    pub ci_level: f64,
    pub scope: StandardizeScope,
    pub levene_center: LeveneCenter,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            alpha_levene: 0.05,
            ci_level: 0.95,
            scope: StandardizeScope::Selected,
            levene_center: LeveneCenter::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariableComparison {
    pub variable: String,
    /// Raw-unit descriptives.
    pub group1: GroupDescriptives,
    pub group2: GroupDescriptives,
    pub levene: Option<LeveneResult>,
    pub pooled: Option<TTestResult>,
    pub welch: Option<TTestResult>,
    pub reported_variant: Option<TTestVariant>,
    /// At the configured alpha.
    pub significant: bool,
    pub significant_at_05: bool,
    pub significant_at_10: bool,
    /// Why the inferential columns are missing, if they are.
    pub degenerate: Option<String>,
}

impl VariableComparison {
    pub fn reported(&self) -> Option<&TTestResult> {
        match self.reported_variant? {
            TTestVariant::Pooled => self.pooled.as_ref(),
            TTestVariant::Welch => self.welch.as_ref(),
        }
    }

    /// Levene rejected equal variances.
    pub fn unequal_variances(&self) -> bool {
        self.reported_variant == Some(TTestVariant::Welch)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupComparisonReport {
    pub config: CompareConfig,
    pub group1_ids: Vec<String>,
    pub group2_ids: Vec<String>,
    pub records: Vec<VariableComparison>,
}

impl GroupComparisonReport {
    pub fn count_significant(&self) -> usize {
        self.records.iter().filter(|r| r.significant).count()
    }

    pub fn count_unequal_variances(&self) -> usize {
        self.records.iter().filter(|r| r.unequal_variances()).count()
    }
}

fn check_alpha(what: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: a })
    }
}

/// Compares two disjoint groups of cases on each named variable.
///
/// Descriptives use raw values. Levene and both t-tests use z-scores taken
/// over `config.scope`; a variable that is constant there, or whose tests
/// are undefined, is kept with `degenerate` set instead of failing the
/// whole report.
pub fn compare_groups<S: AsRef<str>>(
    ds: &IndicatorDataset,
    group1_ids: &[S],
    group2_ids: &[S],
    variables: &[S],
    config: &CompareConfig,
) -> Result<GroupComparisonReport> {
    check_alpha("alpha", config.alpha)?;
    check_alpha("Levene alpha", config.alpha_levene)?;
    check_level(config.ci_level)?;
    for g in [group1_ids, group2_ids] {
        if g.len() < 2 {
            return Err(Error::TooFewCases { found: g.len(), required: 2 });
        }
    }
    let rows = |ids: &[S]| ids.iter().map(|id| ds.case_index(id.as_ref())).collect::<Result<Vec<_>>>();
    let rows1 = rows(group1_ids)?;
    let rows2 = rows(group2_ids)?;
    let set1: BTreeSet<usize> = rows1.iter().copied().collect();
    if let Some(&dup) = rows2.iter().find(|r| set1.contains(r)) {
        return Err(Error::OverlappingGroups(ds.case_ids()[dup].clone()));
    }
    let cols = variables.iter().map(|v| ds.indicator_index(v.as_ref())).collect::<Result<Vec<_>>>()?;

    let x = ds.values();
    let mut records = Vec::with_capacity(cols.len());
    for &j in &cols {
        let name = &ds.indicator_names()[j];
        let raw1: Vec<f64> = rows1.iter().map(|&i| x[(i, j)]).collect();
        let raw2: Vec<f64> = rows2.iter().map(|&i| x[(i, j)]).collect();
        let scope_values: Vec<f64> = match config.scope {
            StandardizeScope::Selected => raw1.iter().chain(&raw2).copied().collect(),
            StandardizeScope::All => x.column(j),
        };
        let mut rec = VariableComparison {
            variable: name.clone(),
            group1: group_descriptives(&raw1)?,
            group2: group_descriptives(&raw2)?,
            levene: None,
            pooled: None,
            welch: None,
            reported_variant: None,
            significant: false,
            significant_at_05: false,
            significant_at_10: false,
            degenerate: None,
        };
        let (mean, sd) = mean_and_sd(&scope_values);
        if sd.is_nan() || sd <= ZERO_VARIANCE_TOLERANCE {
            rec.degenerate = Some(Error::ZeroVariance(name.clone()).to_string());
            records.push(rec);
            continue;
        }
        let z = |g: &[f64]| g.iter().map(|v| (v - mean) / sd).collect::<Vec<_>>();
        let (z1, z2) = (z(&raw1), z(&raw2));
        let tests = (|| -> Result<_> {
            Ok((
                levene_test(&z1, &z2, config.levene_center)?,
                t_test_pooled(&z1, &z2, config.ci_level)?,
                t_test_welch(&z1, &z2, config.ci_level)?,
            ))
        })();
        match tests {
            Ok((lev, pooled, welch)) => {
                let variant = if lev.p > config.alpha_levene { TTestVariant::Pooled } else { TTestVariant::Welch };
                let p = match variant {
                    TTestVariant::Pooled => pooled.p_two_tailed,
                    TTestVariant::Welch => welch.p_two_tailed,
                };
                rec.levene = Some(lev);
                rec.pooled = Some(pooled);
                rec.welch = Some(welch);
                rec.reported_variant = Some(variant);
                rec.significant = p < config.alpha;
                rec.significant_at_05 = p < 0.05;
                rec.significant_at_10 = p < 0.10;
            }
            Err(e) => rec.degenerate = Some(e.to_string()),
        }
        records.push(rec);
    }
    Ok(GroupComparisonReport {
        config: *config,
        group1_ids: group1_ids.iter().map(|s| s.as_ref().into()).collect(),
        group2_ids: group2_ids.iter().map(|s| s.as_ref().into()).collect(),
        records,
    })
}
