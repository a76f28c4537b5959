//! Per-cell summary statistics.

use serde::{Deserialize, Serialize};

use crate::schemes::TrialRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub power_dbm: f64,
    pub kappa: f64,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub nrmse_median: f64,
    pub iters_median: f64,
}

impl Aggregate {
    pub fn same_cell(&self, r: &TrialRecord) -> bool {
        self.scheme == r.scheme
            && self.n == r.n
            && self.m == r.m
            && self.k == r.k
            && self.power_dbm == r.power_dbm
            && self.kappa == r.kappa
    }
}

/// Linearly interpolated percentile of sorted data, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

fn sorted(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Groups records by cell in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut groups: Vec<(Aggregate, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(a, _)| a.same_cell(r)) {
            Some((_, members)) => members.push(r),
            None => groups.push((
                Aggregate {
                    scheme: r.scheme.clone(),
                    n: r.n,
                    m: r.m,
                    k: r.k,
                    power_dbm: r.power_dbm,
                    kappa: r.kappa,
                    trials: 0,
                    mean: 0.0,
                    median: 0.0,
                    p10: 0.0,
                    p90: 0.0,
                    nrmse_median: 0.0,
                    iters_median: 0.0,
                },
                vec![r],
            )),
        }
    }
    groups
        .into_iter()
        .map(|(mut a, members)| {
            let rate = sorted(members.iter().map(|r| r.sum_rate));
            a.trials = members.len();
            a.mean = rate.iter().sum::<f64>() / rate.len() as f64;
            a.median = percentile(&rate, 0.5);
            a.p10 = percentile(&rate, 0.1);
            a.p90 = percentile(&rate, 0.9);
            a.nrmse_median = percentile(&sorted(members.iter().map(|r| r.nrmse)), 0.5);
            a.iters_median = percentile(&sorted(members.iter().map(|r| r.iters as f64)), 0.5);
            a
        })
        .collect()
}
