//! Property suites for standardization, ranking and two-group inference.

mod common;

use common::{dataset_from, gaussian, rng};
use factorank_core::dataset::standardize;
use factorank_core::factors::FactorScores;
use factorank_core::inference::*;
use factorank_core::ranking::{rank_by_factor, Direction, FactorSelector};
use factorank_core::special::{f_tail_p, t_quantile, t_two_tailed_p};
use factorank_core::Matrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn standardized_moments_and_round_trip() {
    let mut r = rng(41);
    let mut data = gaussian(&mut r, 20, 4);
    for row in &mut data {
        row[0] = row[0] * 1000.0 + 17_000.0;
        row[3] = row[3] * 0.01 - 3.0;
    }
    let ds = dataset_from(&data);
    let z = standardize(&ds).unwrap();
    for j in 0..4 {
        let col = z.values.column(j);
        let m = col.iter().sum::<f64>() / 20.0;
        let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 19.0;
        assert!(m.abs() < 1e-10 && (v - 1.0).abs() < 1e-10);
    }
    let back = z.unstandardize();
    for i in 0..20 {
        for j in 0..4 {
            let x = ds.values()[(i, j)];
            assert!((back[(i, j)] - x).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}

#[test]
fn selection_commutes_with_standardization() {
    let mut r = rng(42);
    let ds = dataset_from(&gaussian(&mut r, 25, 6));
    let pick = ["v4", "v1", "v2"];
    let a = standardize(&ds.select_variables(&pick).unwrap()).unwrap();
    let full = standardize(&ds).unwrap();
    let b = full.values.select_columns(&[4, 1, 2]);
    assert!(a.values.max_abs_diff(&b).unwrap() < 1e-12);
}

fn scores_of(ids: &[String], vals: &[f64]) -> FactorScores {
    FactorScores {
        case_ids: ids.to_vec(),
        factor_names: vec!["F1".into()],
        scores: Matrix::new(vals.len(), 1, vals.to_vec()).unwrap(),
    }
}

fn pairs(r: &factorank_core::ranking::RankedIndex) -> Vec<(String, usize)> {
    let mut v: Vec<_> = r.entries.iter().map(|e| (e.case_id.clone(), e.rank)).collect();
    v.sort();
    v
}

#[test]
fn ranking_ignores_input_order() {
    let mut r = rng(43);
    let ids: Vec<String> = (0..40).map(|i| format!("c{i:02}")).collect();
    // Coarse values force plenty of ties.
    let vals: Vec<f64> = gaussian(&mut r, 40, 1).iter().map(|x| (x[0] * 3.0).round()).collect();
    let base = rank_by_factor(&scores_of(&ids, &vals), &FactorSelector::Index(0), Direction::Ascending).unwrap();
    let mut idx: Vec<usize> = (0..40).collect();
    for _ in 0..50 {
        idx.shuffle(&mut r);
        let ids2: Vec<String> = idx.iter().map(|&i| ids[i].clone()).collect();
        let vals2: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
        let other = rank_by_factor(&scores_of(&ids2, &vals2), &FactorSelector::Index(0), Direction::Ascending).unwrap();
        assert_eq!(pairs(&base), pairs(&other));
    }
}

proptest! {
    #[test]
    fn ranking_direction_and_affine(vals in prop::collection::vec(-100.0f64..100.0, 2..40), a in 0.01f64..50.0, b in -10.0f64..10.0) {
        let mut uniq = vals.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        prop_assume!(uniq.len() == vals.len());
        let n = vals.len();
        let ids: Vec<String> = (0..n).map(|i| format!("id{i}")).collect();
        let sel = FactorSelector::Index(0);
        let asc = rank_by_factor(&scores_of(&ids, &vals), &sel, Direction::Ascending).unwrap();
        let desc = rank_by_factor(&scores_of(&ids, &vals), &sel, Direction::Descending).unwrap();
        for e in &asc.entries {
            prop_assert_eq!(desc.rank_of(&e.case_id).unwrap(), n + 1 - e.rank);
        }
        let moved: Vec<f64> = vals.iter().map(|x| a * x + b).collect();
        let aff = rank_by_factor(&scores_of(&ids, &moved), &sel, Direction::Ascending).unwrap();
        prop_assert_eq!(pairs(&asc), pairs(&aff));
        prop_assert!(asc.entries.windows(2).all(|w| w[0].score <= w[1].score));
    }
}

/// Welch statistic, df and p recomputed from raw sums.
fn welch_oracle(g1: &[f64], g2: &[f64]) -> (f64, f64) {
    let stats = |g: &[f64]| {
        let n = g.len() as f64;
        let m = g.iter().sum::<f64>() / n;
        (n, m, g.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    };
    let (n1, m1, v1) = stats(g1);
    let (n2, m2, v2) = stats(g2);
    let se2 = v1 / n1 + v2 / n2;
    let df = se2 * se2 / ((v1 / n1).powi(2) / (n1 - 1.0) + (v2 / n2).powi(2) / (n2 - 1.0));
    ((m1 - m2) / se2.sqrt(), df)
}

#[test]
fn welch_from_first_principles() {
    let (g1, g2) = ([1.0, 2.0, 3.0], [10.0, 20.0, 30.0]);
    let w = t_test_welch(&g1, &g2, 0.95).unwrap();
    let (t, df) = welch_oracle(&g1, &g2);
    assert!((w.t - t).abs() < 1e-10 && (w.df - df).abs() < 1e-10);
    // s1 = 1, s2 = 10, n = 3: se² = 101/3, df = (101/3)² / ((1/9 + 100²/9)/2)
    let df_exact = (101.0f64 / 3.0).powi(2) / ((1.0 / 9.0 + 10_000.0 / 9.0) / 2.0);
    assert!((w.df - df_exact).abs() < 1e-10);
}

/// Between/within sums of squares on |x − mean| for two groups.
fn levene_oracle(g1: &[f64], g2: &[f64]) -> f64 {
    let dev = |g: &[f64]| {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        g.iter().map(|x| (x - m).abs()).collect::<Vec<_>>()
    };
    let (d1, d2) = (dev(g1), dev(g2));
    let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
    let all: Vec<f64> = d1.iter().chain(&d2).copied().collect();
    let grand = mean(&all);
    let ssb = d1.len() as f64 * (mean(&d1) - grand).powi(2) + d2.len() as f64 * (mean(&d2) - grand).powi(2);
    let ssw: f64 = d1.iter().map(|x| (x - mean(&d1)).powi(2)).sum::<f64>()
        + d2.iter().map(|x| (x - mean(&d2)).powi(2)).sum::<f64>();
    ssb / (ssw / (all.len() as f64 - 2.0))
}

#[test]
fn levene_matches_anova_oracle() {
    let mut r = rng(44);
    for _ in 0..20 {
        let g = gaussian(&mut r, 20, 1);
        let g1: Vec<f64> = g[..10].iter().map(|x| x[0]).collect();
        let g2: Vec<f64> = g[10..].iter().map(|x| 3.0 * x[0] + 1.0).collect();
        let lev = levene_test(&g1, &g2, LeveneCenter::Mean).unwrap();
        assert!((lev.f - levene_oracle(&g1, &g2)).abs() < 1e-10);
        assert_eq!((lev.df1, lev.df2), (1, 18));
        let p_t = t_two_tailed_p(lev.f.sqrt(), 18.0).unwrap();
        assert!((lev.p - p_t).abs() < 1e-10);
    }
}

fn groups() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-50.0f64..50.0, 2..15), prop::collection::vec(-50.0f64..50.0, 2..15)).prop_filter(
        "non-degenerate spread",
        |(a, b)| {
            let spread = |g: &Vec<f64>| g.iter().any(|x| (x - g[0]).abs() > 1e-3);
            spread(a) || spread(b)
        },
    )
}

proptest! {
    #[test]
    fn t_tests_are_antisymmetric((g1, g2) in groups()) {
        for f in [t_test_pooled, t_test_welch] {
            let ab = f(&g1, &g2, 0.95).unwrap();
            let ba = f(&g2, &g1, 0.95).unwrap();
            prop_assert!((ab.t + ba.t).abs() < 1e-10);
            prop_assert!((ab.mean_difference + ba.mean_difference).abs() < 1e-10);
            prop_assert!((ab.p_two_tailed - ba.p_two_tailed).abs() < 1e-10);
            prop_assert!((ab.ci_low + ba.ci_high).abs() < 1e-9);
            prop_assert!((ab.t - ab.mean_difference / ab.se_difference).abs() < 1e-9);
            let q = t_quantile(0.975, ab.df).unwrap();
            prop_assert!((ab.ci_high - (ab.mean_difference + q * ab.se_difference)).abs() < 1e-9);
            prop_assert!(ab.ci_low <= ab.mean_difference && ab.mean_difference <= ab.ci_high);
        }
    }

    #[test]
    fn t_tests_are_affine_invariant((g1, g2) in groups(), a in prop::sample::select(vec![-7.5, -1.0, 0.2, 3.0, 40.0]), b in -100.0f64..100.0) {
        let m = |g: &[f64]| g.iter().map(|x| a * x + b).collect::<Vec<_>>();
        for f in [t_test_pooled, t_test_welch] {
            let x = f(&g1, &g2, 0.95).unwrap();
            let y = f(&m(&g1), &m(&g2), 0.95).unwrap();
            prop_assert!((x.t * a.signum() - y.t).abs() < 1e-10 * x.t.abs().max(1.0));
            prop_assert!((x.df - y.df).abs() < 1e-10 * x.df);
            prop_assert!((x.p_two_tailed - y.p_two_tailed).abs() < 1e-10);
        }
    }

    #[test]
    fn welch_equals_pooled_when_balanced(g in prop::collection::vec(-50.0f64..50.0, 2..15), shift in -20.0f64..20.0) {
        prop_assume!(g.iter().any(|x| (x - g[0]).abs() > 1e-3));
        // Mirror image has the same n and sd.
        let h: Vec<f64> = g.iter().map(|x| shift - x).collect();
        let p = t_test_pooled(&g, &h, 0.95).unwrap();
        let w = t_test_welch(&g, &h, 0.95).unwrap();
        prop_assert!((p.t - w.t).abs() < 1e-10 * p.t.abs().max(1.0));
        prop_assert!((p.df - w.df).abs() < 1e-10 * p.df);
    }

    #[test]
    fn levene_f_is_t_squared((g1, g2) in groups()) {
        if let Ok(lev) = levene_test(&g1, &g2, LeveneCenter::Mean) {
            let via_t = t_two_tailed_p(lev.f.sqrt(), lev.df2 as f64).unwrap();
            prop_assert!((lev.p - via_t).abs() < 1e-10);
            prop_assert!((lev.p - f_tail_p(lev.f, 1.0, lev.df2 as f64).unwrap()).abs() == 0.0);
        }
    }

    #[test]
    fn sem_law(g in prop::collection::vec(-1e4f64..1e4, 2..30)) {
        let d = group_descriptives(&g).unwrap();
        prop_assert!((d.sem * (d.n as f64).sqrt() - d.sd).abs() <= 1e-12 * d.sd.max(1.0));
    }
}

#[test]
fn compare_groups_picks_variant_and_counts() {
    let mut r = rng(45);
    let mut data = gaussian(&mut r, 30, 3);
    // Variable 0: group 2 far more spread out and shifted.
    for (i, row) in data.iter_mut().enumerate() {
        if i >= 20 {
            row[0] = row[0] * 8.0 + 5.0;
            row[1] += 4.0;
        }
    }
    let ds = dataset_from(&data);
    let g1: Vec<String> = (0..10).map(|i| format!("case{i:03}")).collect();
    let g2: Vec<String> = (20..30).map(|i| format!("case{i:03}")).collect();
    let vars = ["v0", "v1", "v2"];
    let g1r: Vec<&str> = g1.iter().map(String::as_str).collect();
    let g2r: Vec<&str> = g2.iter().map(String::as_str).collect();
    let rep = compare_groups(&ds, &g1r, &g2r, &vars, &CompareConfig::default()).unwrap();
    for rec in &rep.records {
        let lev = rec.levene.unwrap();
        let want = if lev.p > 0.05 { TTestVariant::Pooled } else { TTestVariant::Welch };
        assert_eq!(rec.reported_variant, Some(want));
        let p = rec.reported().unwrap().p_two_tailed;
        assert_eq!(rec.significant_at_05, p < 0.05);
        assert_eq!(rec.significant_at_10, p < 0.10);
    }
    assert_eq!(rep.records[0].reported_variant, Some(TTestVariant::Welch));
    assert!(rep.records[1].significant);
    // Raw descriptives, not z-scores.
    let raw_mean = (20..30).map(|i| data[i][1]).sum::<f64>() / 10.0;
    assert!((rep.records[1].group2.mean - raw_mean).abs() < 1e-12);
    assert_eq!(rep.count_unequal_variances(), rep.records.iter().filter(|r| r.unequal_variances()).count());
}
