//! Welch's t-test and grouped summaries of experiment records.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use super::suite::ExperimentRecord;
use crate::sbm::Regime;

pub const HISTOGRAM_BINS: usize = 100;
pub const RHO_BUCKETS: usize = 20;
pub const N_BUCKET_WIDTH: usize = 100;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("each sample needs at least two values (got {0} and {1})")]
    TooFewSamples(usize, usize),
    #[error("no records to aggregate")]
    NoRecords,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WelchResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Two-sample t-test without the equal-variance assumption.
///
/// When both samples have zero variance the statistic is undefined; by
/// convention equal means give `t = 0, p = 1` and different means give
/// `t = ±∞, p = 0`, with `df = n_a + n_b − 2`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples(a.len(), b.len()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let diff = ma - mb;
        return Ok(WelchResult {
            t_statistic: if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            },
            degrees_of_freedom: na + nb - 2.0,
            p_value: if diff == 0.0 { 1.0 } else { 0.0 },
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
    })
}

/// Pairwise Welch tests over per-algorithm α samples, in `algos` order.
pub fn welch_matrix(samples: &[(String, Vec<f64>)]) -> Vec<(String, String, Option<WelchResult>)> {
    let mut out = Vec::new();
    for (i, (name_a, a)) in samples.iter().enumerate() {
        for (name_b, b) in &samples[i + 1..] {
            out.push((name_a.clone(), name_b.clone(), welch_t_test(a, b).ok()));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupBy {
    Algo,
    Regime,
    NBucket,
    RhoBucket,
    K,
}

impl GroupBy {
    pub fn key_column(self) -> Option<&'static str> {
        match self {
            GroupBy::Algo => None,
            GroupBy::Regime => Some("regime"),
            GroupBy::NBucket => Some("n_bucket"),
            GroupBy::RhoBucket => Some("rho_bucket"),
            GroupBy::K => Some("k"),
        }
    }
}

impl std::str::FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "algo" => GroupBy::Algo,
            "regime" => GroupBy::Regime,
            "n" | "n-bucket" => GroupBy::NBucket,
            "rho" | "rho-bucket" => GroupBy::RhoBucket,
            "k" => GroupBy::K,
            other => return Err(format!("unknown grouping `{other}`")),
        })
    }
}

/// Secondary key; ordered so rows sort naturally.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupKey {
    None,
    Regime(Regime),
    /// Lower bound of the n bucket.
    N(usize),
    /// Bucket index `0..RHO_BUCKETS`.
    Rho(usize),
    K(usize),
}

impl GroupKey {
    fn of(record: &ExperimentRecord, by: GroupBy) -> Self {
        match by {
            GroupBy::Algo => GroupKey::None,
            GroupBy::Regime => GroupKey::Regime(record.regime),
            GroupBy::NBucket => GroupKey::N(record.n / N_BUCKET_WIDTH * N_BUCKET_WIDTH),
            GroupBy::RhoBucket => GroupKey::Rho(rho_bucket(record.rho)),
            GroupBy::K => GroupKey::K(record.k),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroupKey::None => String::new(),
            GroupKey::Regime(r) => r.as_str().to_string(),
            GroupKey::N(lo) => format!("{lo}-{}", lo + N_BUCKET_WIDTH),
            GroupKey::Rho(b) => {
                let w = 1.0 / RHO_BUCKETS as f64;
                format!("{:.2}-{:.2}", *b as f64 * w, (*b + 1) as f64 * w)
            }
            GroupKey::K(k) => k.to_string(),
        }
    }
}

/// ρ in 20 equal buckets over [0, 1]; ρ = 1 goes to the last one.
pub fn rho_bucket(rho: f64) -> usize {
    ((rho * RHO_BUCKETS as f64).floor() as usize).min(RHO_BUCKETS - 1)
}

/// α in 100 equal bins over [0, 1]; α = 1 goes to the last one.
pub fn histogram_bin(alpha: f64) -> usize {
    ((alpha * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub algo: String,
    pub key: GroupKey,
    pub count: usize,
    pub mean_alpha: Option<f64>,
    pub mean_acd: Option<f64>,
    /// Mean ACD over records with α = 1; `None` when there are none.
    pub mean_acd_complete: Option<f64>,
    pub histogram: [usize; HISTOGRAM_BINS],
}

impl GroupSummary {
    /// A marker row for a group with no records.
    pub fn is_marker(&self) -> bool {
        self.count == 0
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Per-group means and α histograms. Instances carry equal weight. When
/// grouping by regime, every (algorithm, regime) combination gets a row;
/// empty ones are marker rows with `count = 0`.
pub fn aggregate(
    records: &[ExperimentRecord],
    by: GroupBy,
) -> Result<Vec<GroupSummary>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let mut groups: BTreeMap<(String, GroupKey), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algo.clone(), GroupKey::of(r, by)))
            .or_default()
            .push(r);
    }
    if by == GroupBy::Regime {
        let algos: Vec<String> = groups.keys().map(|(a, _)| a.clone()).collect();
        for algo in algos {
            for regime in Regime::ALL {
                groups
                    .entry((algo.clone(), GroupKey::Regime(regime)))
                    .or_default();
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|((algo, key), rs)| {
            let mut histogram = [0usize; HISTOGRAM_BINS];
            for r in &rs {
                histogram[histogram_bin(r.alpha)] += 1;
            }
            GroupSummary {
                algo,
                key,
                count: rs.len(),
                mean_alpha: mean(rs.iter().map(|r| r.alpha)),
                mean_acd: mean(rs.iter().map(|r| r.acd)),
                mean_acd_complete: mean(rs.iter().filter(|r| r.happy == r.n).map(|r| r.acd)),
                histogram,
            }
        })
        .collect())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// CSV with columns `algo, [group key], count, mean_alpha, mean_acd,
/// mean_acd_complete` and, with `histogram`, `hist_0..hist_99`. Missing
/// means are written as `NA`.
pub fn write_summary_csv<W: Write>(
    out: W,
    rows: &[GroupSummary],
    by: GroupBy,
    histogram: bool,
) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algo".to_string()];
    header.extend(by.key_column().map(String::from));
    header.extend(
        ["count", "mean_alpha", "mean_acd", "mean_acd_complete"]
            .iter()
            .map(|s| s.to_string()),
    );
    if histogram {
        header.extend((0..HISTOGRAM_BINS).map(|i| format!("hist_{i}")));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.algo.clone()];
        if by.key_column().is_some() {
            rec.push(row.key.label());
        }
        rec.push(row.count.to_string());
        rec.push(fmt_opt(row.mean_alpha));
        rec.push(fmt_opt(row.mean_acd));
        rec.push(fmt_opt(row.mean_acd_complete));
        if histogram {
            rec.extend(row.histogram.iter().map(|c| c.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
