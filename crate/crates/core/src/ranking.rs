//! Ranking cases on one factor and picking the two extreme groups.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::factors::FactorScores;
use crate::{Error, Result};

pub const DEFAULT_GROUP_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// Rank 1 is the lowest score.
    #[default]
    Ascending,
    Descending,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Ascending => "ascending",
            Direction::Descending => "descending",
        }
    }
}

/// Picks a score column by position (0-based) or by factor name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorSelector {
    Index(usize),
    Name(String),
}

impl fmt::Display for FactorSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorSelector::Index(i) => write!(f, "#{}", i + 1),
            FactorSelector::Name(n) => f.write_str(n),
        }
    }
}

impl FactorSelector {
    pub fn resolve(&self, factor_names: &[String]) -> Result<usize> {
        match self {
            FactorSelector::Index(i) if *i < factor_names.len() => Ok(*i),
            FactorSelector::Name(n) => {
                factor_names.iter().position(|f| f == n).ok_or_else(|| Error::UnknownFactor(n.clone()))
            }
            other => Err(Error::UnknownFactor(alloc::format!("{other} (model has {} factors)", factor_names.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankEntry {
    /// 1-based.
    pub rank: usize,
    pub case_id: String,
    pub score: f64,
}

/// The top-k and bottom-k cases of a ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Groups {
    pub k: usize,
    /// Ranks `1..=k`.
    pub group1: Vec<String>,
    /// Ranks `n-k+1..=n`.
    pub group2: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedIndex {
    pub factor_index: usize,
    pub factor_name: String,
    pub direction: Direction,
    pub entries: Vec<RankEntry>,
    pub groups: Option<Groups>,
}

/// Orders cases by one factor's score; ties go to the lexicographically
/// smaller case id, so the result does not depend on input order.
pub fn rank_by_factor(scores: &FactorScores, factor: &FactorSelector, direction: Direction) -> Result<RankedIndex> {
    let j = factor.resolve(&scores.factor_names)?;
    let mut order: Vec<usize> = (0..scores.case_ids.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (scores.scores[(a, j)], scores.scores[(b, j)]);
        let by_score = match direction {
            Direction::Ascending => sa.total_cmp(&sb),
            Direction::Descending => sb.total_cmp(&sa),
        };
        match by_score {
            Ordering::Equal => scores.case_ids[a].cmp(&scores.case_ids[b]),
            o => o,
        }
    });
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(pos, i)| RankEntry { rank: pos + 1, case_id: scores.case_ids[i].clone(), score: scores.scores[(i, j)] })
        .collect();
    Ok(RankedIndex { factor_index: j, factor_name: scores.factor_names[j].clone(), direction, entries, groups: None })
}

/// First `k` and last `k` ranks; requires `1 ≤ k ≤ ⌊n/2⌋`.
pub fn select_groups(ranked: &RankedIndex, k: usize) -> Result<Groups> {
    let n = ranked.entries.len();
    let max = n / 2;
    if k == 0 || k > max {
        return Err(Error::GroupSize { k, n, max });
    }
    let ids = |r: &[RankEntry]| r.iter().map(|e| e.case_id.clone()).collect();
    Ok(Groups { k, group1: ids(&ranked.entries[..k]), group2: ids(&ranked.entries[n - k..]) })
}

impl RankedIndex {
    pub fn assign_groups(&mut self, k: usize) -> Result<&Groups> {
        let g = select_groups(self, k)?;
        Ok(self.groups.insert(g))
    }

    pub fn rank_of(&self, case_id: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.case_id == case_id).map(|e| e.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;
    use alloc::string::ToString;
    use alloc::vec;

    fn scores(pairs: &[(&str, f64)]) -> FactorScores {
        FactorScores {
            case_ids: pairs.iter().map(|p| p.0.to_string()).collect(),
            factor_names: vec!["F1".into()],
            scores: Matrix::new(pairs.len(), 1, pairs.iter().map(|p| p.1).collect()).unwrap(),
        }
    }

    fn order(r: &RankedIndex) -> Vec<&str> {
        r.entries.iter().map(|e| e.case_id.as_str()).collect()
    }

    #[test]
    fn sorts_ascending_and_descending() {
        let s = scores(&[("A", -1.2), ("B", 0.5), ("C", 0.3)]);
        let asc = rank_by_factor(&s, &FactorSelector::Index(0), Direction::Ascending).unwrap();
        assert_eq!(order(&asc), ["A", "C", "B"]);
        assert_eq!(asc.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);
        let desc = rank_by_factor(&s, &FactorSelector::Name("F1".into()), Direction::Descending).unwrap();
        assert_eq!(order(&desc), ["B", "C", "A"]);
    }

    #[test]
    fn ties_break_on_case_id() {
        let s = scores(&[("B", 0.5), ("A", 0.5)]);
        let r = rank_by_factor(&s, &FactorSelector::Index(0), Direction::Ascending).unwrap();
        assert_eq!(order(&r), ["A", "B"]);
        let r = rank_by_factor(&s, &FactorSelector::Index(0), Direction::Descending).unwrap();
        assert_eq!(order(&r), ["A", "B"]);
    }

    #[test]
    fn unknown_factor() {
        let s = scores(&[("A", 1.0), ("B", 2.0)]);
        assert!(matches!(
            rank_by_factor(&s, &FactorSelector::Index(1), Direction::Ascending),
            Err(Error::UnknownFactor(_))
        ));
        assert!(matches!(
            rank_by_factor(&s, &FactorSelector::Name("Wealth".into()), Direction::Ascending),
            Err(Error::UnknownFactor(_))
        ));
    }

    #[test]
    fn group_bounds() {
        let pairs: Vec<(String, f64)> = (0..88).map(|i| (alloc::format!("c{i:02}"), i as f64)).collect();
        let refs: Vec<(&str, f64)> = pairs.iter().map(|(a, b)| (a.as_str(), *b)).collect();
        let mut r = rank_by_factor(&scores(&refs), &FactorSelector::Index(0), Direction::Ascending).unwrap();
        let g = r.assign_groups(10).unwrap().clone();
        assert_eq!(g.group1.len(), 10);
        let tail: Vec<usize> = g.group2.iter().map(|id| r.rank_of(id).unwrap()).collect();
        assert_eq!(tail, (79..=88).collect::<Vec<_>>());
        assert!(select_groups(&r, 45).is_err());

        let five = scores(&[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0), ("e", 5.0)]);
        let r5 = rank_by_factor(&five, &FactorSelector::Index(0), Direction::Ascending).unwrap();
        assert_eq!(select_groups(&r5, 3), Err(Error::GroupSize { k: 3, n: 5, max: 2 }));
        assert!(select_groups(&r5, 0).is_err());
    }

    #[test]
    fn half_split_partitions() {
        let pairs: Vec<(String, f64)> = (0..20).map(|i| (alloc::format!("c{i:02}"), -(i as f64))).collect();
        let refs: Vec<(&str, f64)> = pairs.iter().map(|(a, b)| (a.as_str(), *b)).collect();
        let r = rank_by_factor(&scores(&refs), &FactorSelector::Index(0), Direction::Ascending).unwrap();
        let g = select_groups(&r, 10).unwrap();
        let mut all: Vec<String> = g.group1.iter().chain(&g.group2).cloned().collect();
        all.sort();
        assert_eq!(all, pairs.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
    }
}
