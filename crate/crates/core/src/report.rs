//! Cohort aggregation and method ranking.
//!
//! Per-case unified scores are averaged per (method, region); methods are
//! then ranked within each region by descending mean, and overall by the
//! mean of their per-region means. Equal means are ordered by method name
//! and flagged as tied.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::EvaluationRecord;
use crate::regions::Region;
use crate::scoring::UnifiedScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScore {
    pub case_id: String,
    pub region: Region,
    pub method: String,
    pub score: UnifiedScore,
}

impl From<&EvaluationRecord> for CaseScore {
    fn from(r: &EvaluationRecord) -> Self {
        Self {
            case_id: r.case_id.clone(),
            region: r.region,
            method: r.method.clone(),
            score: r.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortResult {
    pub method: String,
    pub region: Region,
    /// Sorted by case id.
    pub per_case: Vec<(String, UnifiedScore)>,
    pub mean_score: f64,
    pub rank: usize,
    pub tied: bool,
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// `xs`, not on how the work is split.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Orders `(name, value)` by descending value then name, returning
/// `(rank, tied)` aligned with the sorted order.
fn rank_by(items: &mut [(&str, f64)]) -> Vec<(usize, bool)> {
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    (0..items.len())
        .map(|i| {
            let tied = items
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.1 == items[i].1);
            (i + 1, tied)
        })
        .collect()
}

/// Groups per-case scores by method and region, checks that every method
/// covers every (case, region) in the cohort, and ranks methods per region.
/// Output is ordered by region, then rank.
pub fn aggregate(results: &[CaseScore]) -> Result<Vec<CohortResult>> {
    if results.is_empty() {
        return Err(Error::Empty("no scores to aggregate"));
    }
    let methods: BTreeSet<&str> = results.iter().map(|r| r.method.as_str()).collect();
    let cohort: BTreeSet<(Region, &str)> = results
        .iter()
        .map(|r| (r.region, r.case_id.as_str()))
        .collect();

    let mut grouped: BTreeMap<(Region, &str), BTreeMap<&str, UnifiedScore>> = BTreeMap::new();
    for r in results {
        let slot = grouped.entry((r.region, r.method.as_str())).or_default();
        if slot.insert(r.case_id.as_str(), r.score).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate score for case `{}` region {} method `{}`",
                r.case_id, r.region, r.method
            )));
        }
    }
    for &method in &methods {
        for &(region, case_id) in &cohort {
            let present = grouped
                .get(&(region, method))
                .is_some_and(|m| m.contains_key(case_id));
            if !present {
                return Err(Error::IncompleteCohort {
                    method: method.to_string(),
                    case_id: case_id.to_string(),
                    region: region.to_string(),
                });
            }
        }
    }

    let regions: BTreeSet<Region> = cohort.iter().map(|&(r, _)| r).collect();
    let mut out = Vec::new();
    for region in regions {
        let mut means: Vec<(&str, f64)> = methods
            .iter()
            .map(|&m| {
                let scores: Vec<f64> = grouped[&(region, m)].values().map(|s| s.score).collect();
                (m, mean(&scores))
            })
            .collect();
        let ranks = rank_by(&mut means);
        for ((method, mean_score), (rank, tied)) in means.into_iter().zip(ranks) {
            out.push(CohortResult {
                method: method.to_string(),
                region,
                per_case: grouped[&(region, method)]
                    .iter()
                    .map(|(c, s)| (c.to_string(), *s))
                    .collect(),
                mean_score,
                rank,
                tied,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCell {
    pub region: Region,
    pub mean_score: f64,
    pub rank: usize,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub method: String,
    /// One cell per table region, in table column order.
    pub cells: Vec<RankCell>,
    pub overall_score: f64,
    pub overall_rank: usize,
    pub overall_tied: bool,
}

/// Method × region matrix of mean scores, rows ordered by overall rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub regions: Vec<Region>,
    pub rows: Vec<RankRow>,
}

pub fn rank_table(cohort: &[CohortResult]) -> Result<RankTable> {
    if cohort.is_empty() {
        return Err(Error::Empty("cohort is empty"));
    }
    let regions: Vec<Region> = cohort
        .iter()
        .map(|c| c.region)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut by_method: BTreeMap<&str, Vec<RankCell>> = BTreeMap::new();
    for c in cohort {
        by_method
            .entry(c.method.as_str())
            .or_default()
            .push(RankCell {
                region: c.region,
                mean_score: c.mean_score,
                rank: c.rank,
                tied: c.tied,
            });
    }
    for (method, cells) in &mut by_method {
        cells.sort_by_key(|c| c.region);
        if cells.iter().map(|c| c.region).ne(regions.iter().copied()) {
            return Err(Error::Invariant(format!(
                "method `{method}` is missing a region in the cohort"
            )));
        }
    }
    let mut overall: Vec<(&str, f64)> = by_method
        .iter()
        .map(|(&m, cells)| {
            let means: Vec<f64> = cells.iter().map(|c| c.mean_score).collect();
            (m, mean(&means))
        })
        .collect();
    let ranks = rank_by(&mut overall);
    let rows = overall
        .into_iter()
        .zip(ranks)
        .map(
            |((method, overall_score), (overall_rank, overall_tied))| RankRow {
                method: method.to_string(),
                cells: by_method.remove(method).unwrap_or_default(),
                overall_score,
                overall_rank,
                overall_tied,
            },
        )
        .collect();
    Ok(RankTable { regions, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cs(case: &str, region: Region, method: &str, score: f64) -> CaseScore {
        // aggregation reads only `score`
        CaseScore {
            case_id: case.into(),
            region,
            method: method.into(),
            score: UnifiedScore {
                auc_dice: score,
                auc_ftp: 0.0,
                auc_ftn: 0.0,
                score,
            },
        }
    }

    #[test]
    fn single_case_single_method() {
        let c = aggregate(&[cs("a", Region::WT, "m", 0.8)]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].mean_score, 0.8);
        assert_eq!(c[0].rank, 1);
        assert!(!c[0].tied);
    }

    #[test]
    fn higher_mean_ranks_first() {
        let c = aggregate(&[
            cs("a", Region::WT, "Deep Ensemble", 0.9684),
            cs("a", Region::WT, "MC-Dropout", 0.9700),
        ])
        .unwrap();
        assert_eq!((c[0].method.as_str(), c[0].rank), ("MC-Dropout", 1));
        assert_eq!((c[1].method.as_str(), c[1].rank), ("Deep Ensemble", 2));
    }

    #[test]
    fn ties_broken_by_name_and_flagged() {
        let c = aggregate(&[
            cs("a", Region::TC, "zeta", 0.5),
            cs("a", Region::TC, "alpha", 0.5),
            cs("a", Region::TC, "mid", 0.4),
        ])
        .unwrap();
        let names: Vec<_> = c
            .iter()
            .map(|r| (r.method.as_str(), r.rank, r.tied))
            .collect();
        assert_eq!(
            names,
            vec![("alpha", 1, true), ("zeta", 2, true), ("mid", 3, false)]
        );
    }

    #[test]
    fn missing_case_is_an_error() {
        let err = aggregate(&[
            cs("a", Region::WT, "m1", 0.5),
            cs("b", Region::WT, "m1", 0.5),
            cs("a", Region::WT, "m2", 0.5),
        ])
        .unwrap_err();
        assert!(
            matches!(err, Error::IncompleteCohort { ref method, ref case_id, .. } if method == "m2" && case_id == "b")
        );
        assert!(aggregate(&[
            cs("a", Region::WT, "m1", 0.5),
            cs("a", Region::WT, "m1", 0.6),
        ])
        .is_err());
        assert!(matches!(aggregate(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn table_shapes() {
        let methods = [
            "MC-Dropout",
            "Deep Ensemble",
            "Dropout Ensemble",
            "Bootstrap",
            "Dropout Bootstrap",
        ];
        let mut scores = Vec::new();
        for (i, m) in methods.iter().enumerate() {
            for r in Region::ALL {
                scores.push(cs("case", r, m, 0.9 + 0.01 * i as f64));
            }
        }
        let t = rank_table(&aggregate(&scores).unwrap()).unwrap();
        assert_eq!(t.regions, Region::ALL.to_vec());
        assert_eq!(t.rows.len(), 5);
        assert!(t.rows.iter().all(|r| r.cells.len() == 3));
        assert_eq!(t.rows[0].method, "Dropout Bootstrap");

        let single = rank_table(&aggregate(&[cs("c", Region::ET, "m", 0.5)]).unwrap()).unwrap();
        assert_eq!(single.regions, vec![Region::ET]);
        assert_eq!(single.rows[0].cells.len(), 1);

        assert!(matches!(rank_table(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    fn cohort_strategy() -> impl Strategy<Value = Vec<CaseScore>> {
        (1usize..5, 1usize..6).prop_flat_map(|(n_methods, n_cases)| {
            prop::collection::vec(0.0f64..=1.0, n_methods * n_cases * 3).prop_map(move |vals| {
                let mut out = Vec::new();
                let mut it = vals.into_iter();
                for m in 0..n_methods {
                    for c in 0..n_cases {
                        for r in Region::ALL {
                            out.push(cs(
                                &format!("case{c}"),
                                r,
                                &format!("m{m}"),
                                it.next().unwrap(),
                            ));
                        }
                    }
                }
                out
            })
        })
    }

    proptest! {
        #[test]
        fn input_order_is_irrelevant(scores in cohort_strategy(), seed in any::<u64>()) {
            let mut shuffled = scores.clone();
            let n = shuffled.len();
            // deterministic Fisher-Yates from the seed
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(aggregate(&scores).unwrap(), aggregate(&shuffled).unwrap());
        }

        #[test]
        fn affine_rescaling_keeps_ranking(
            means in prop::collection::btree_set(0u32..10_000, 2..6),
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            // well-separated per-method scores on a 1e-4 grid
            let scores: Vec<CaseScore> = means
                .iter()
                .enumerate()
                .map(|(i, &m)| cs("c", Region::WT, &format!("m{i}"), m as f64 / 10_000.0))
                .collect();
            let scaled: Vec<CaseScore> = scores
                .iter()
                .map(|s| cs("c", Region::WT, &s.method, a * s.score.score + b))
                .collect();
            let order = |v: Vec<CohortResult>| v.into_iter().map(|r| (r.method, r.rank)).collect::<Vec<_>>();
            prop_assert_eq!(order(aggregate(&scores).unwrap()), order(aggregate(&scaled).unwrap()));
        }
    }
}
