//! Ranking comparison, layer overlap, confidence intervals and the per-iteration
//! cost model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::multiplex::MultiplexNetwork;

/// Pair weights for the weighted Kendall tau. Both are additive,
/// `w(i, j) = f(i) + f(j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// `f(i) = 1 / (rho(i) + 1)` with `rho` the zero-based position of `i` in
    /// the reference ranking (highest score first, ties averaged).
    #[default]
    Hyperbolic,
    /// `f(i) = 1/2`, which makes every pair weigh one (Kendall tau-b).
    Constant,
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperbolic" => Ok(WeightScheme::Hyperbolic),
            "constant" => Ok(WeightScheme::Constant),
            _ => Err(Error::invalid(format!("unknown weight scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieCounts {
    /// Pairs tied in the reference ranking.
    pub reference: usize,
    /// Pairs tied in the compared ranking.
    pub other: usize,
    /// Pairs tied in both.
    pub joint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub tau_w: f64,
    pub n_items: usize,
    pub tie_counts: TieCounts,
}

/// Zero-based positions in decreasing score order; tied items share the mean
/// of the positions they occupy.
pub fn average_ranks_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mean = (start + end - 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

/// Per-item weight terms `f(i)` for `scheme`, computed from the reference
/// scores.
pub fn item_weights(reference: &[f64], scheme: WeightScheme) -> Vec<f64> {
    match scheme {
        WeightScheme::Constant => vec![0.5; reference.len()],
        WeightScheme::Hyperbolic => average_ranks_descending(reference)
            .into_iter()
            .map(|rho| 1.0 / (rho + 1.0))
            .collect(),
    }
}

/// Weighted Kendall tau `<r, s>_w / (||r||_w ||s||_w)` with
/// `<r, s>_w = sum_{i<j} w(i, j) sgn(r_i - r_j) sgn(s_i - s_j)`.
///
/// Runs in `O(n log n)`: tied-pair weights come from group sums and the
/// discordant weight from a merge sort that accumulates, for every inversion,
/// the additive pair weight.
pub fn weighted_kendall_tau(r: &[f64], s: &[f64], scheme: WeightScheme) -> Result<ComparisonResult> {
    if r.len() != s.len() {
        return Err(Error::Dimension {
            expected: r.len(),
            actual: s.len(),
        });
    }
    let n = r.len();
    if n < 2 {
        return Err(Error::invalid("rank correlation needs at least two items"));
    }
    if r.iter().chain(s).any(|x| x.is_nan()) {
        return Err(Error::invalid("rankings must not contain NaN"));
    }
    let f = item_weights(r, scheme);
    let total_weight = (n - 1) as f64 * f.iter().sum::<f64>();

    // Items sorted by (r, s) ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| r[a].total_cmp(&r[b]).then(s[a].total_cmp(&s[b])));

    let (tied_r, count_r) = tied_weight(&order, &f, |a, b| r[a] == r[b]);
    let (tied_joint, count_joint) = tied_weight(&order, &f, |a, b| r[a] == r[b] && s[a] == s[b]);

    let mut by_s = order.clone();
    let discordant = merge_count(&mut by_s, &f, s);
    // After merging, `by_s` is sorted by s; ties in s are contiguous.
    let (tied_s, count_s) = tied_weight(&by_s, &f, |a, b| s[a] == s[b]);

    let norm_r = total_weight - tied_r;
    let norm_s = total_weight - tied_s;
    if !(norm_r > 0.0) || !(norm_s > 0.0) {
        return Err(Error::UndefinedMeasure(
            "a ranking with every item tied has zero weighted norm".into(),
        ));
    }
    let untied_both = total_weight - tied_r - tied_s + tied_joint;
    let inner = untied_both - 2.0 * discordant;
    let tau_w = (inner / (norm_r * norm_s).sqrt()).clamp(-1.0, 1.0);
    Ok(ComparisonResult {
        tau_w,
        n_items: n,
        tie_counts: TieCounts {
            reference: count_r,
            other: count_s,
            joint: count_joint,
        },
    })
}

/// Total additive weight and number of pairs inside runs of `sorted` where
/// consecutive items satisfy `same`.
fn tied_weight(sorted: &[usize], f: &[f64], same: impl Fn(usize, usize) -> bool) -> (f64, usize) {
    let mut weight = 0.0;
    let mut pairs = 0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        let mut group_sum = f[sorted[start]];
        while end < sorted.len() && same(sorted[start], sorted[end]) {
            group_sum += f[sorted[end]];
            end += 1;
        }
        let size = end - start;
        weight += (size - 1) as f64 * group_sum;
        pairs += size * (size - 1) / 2;
        start = end;
    }
    (weight, pairs)
}

/// Stable merge sort of `items` by `key`; returns the summed weight
/// `f(i) + f(j)` over pairs that appear in strictly decreasing key order.
fn merge_count(items: &mut [usize], f: &[f64], key: &[f64]) -> f64 {
    let n = items.len();
    if n < 2 {
        return 0.0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut items[..mid], f, key) + merge_count(&mut items[mid..], f, key);
    let left = items[..mid].to_vec();
    let right = items[mid..].to_vec();
    let mut left_rest: f64 = left.iter().map(|&i| f[i]).sum();
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if key[left[i]] <= key[right[j]] {
            left_rest -= f[left[i]];
            items[k] = left[i];
            i += 1;
        } else {
            let remaining = (left.len() - i) as f64;
            count += remaining * f[right[j]] + left_rest;
            items[k] = right[j];
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        items[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        items[k] = right[j];
        j += 1;
        k += 1;
    }
    count
}

/// Replaces every run of sorted values whose consecutive gaps are at most
/// `tolerance` by the run's smallest value, so scores that differ only by
/// solver round-off compare as ties.
pub fn merge_near_ties(scores: &[f64], tolerance: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut out = scores.to_vec();
    let mut anchor = f64::NAN;
    let mut last = f64::NAN;
    for &i in &order {
        let v = scores[i];
        if !(v - last <= tolerance) {
            anchor = v;
        }
        out[i] = anchor;
        last = v;
    }
    out
}

/// Mean over ordered layer pairs `(l, l')`, `l != l'`, of the Jaccard index
/// of their edge sets. Two empty layers count as identical.
pub fn multijaccard(m: &MultiplexNetwork) -> Result<f64> {
    let layers = m.layer_count();
    if layers < 2 {
        return Err(Error::invalid("MultiJaccard needs at least two layers"));
    }
    let sets: Vec<_> = m.layers().iter().map(|l| l.edge_set()).collect();
    let mut sum = 0.0;
    for a in 0..layers {
        for b in 0..layers {
            if a == b {
                continue;
            }
            let inter = sets[a].intersection(&sets[b]).count();
            let union = sets[a].len() + sets[b].len() - inter;
            sum += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
        }
    }
    Ok(sum / (layers * (layers - 1)) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
}

/// Two-sided 95% Student-t quantile at `df` degrees of freedom.
pub fn student_t_quantile_95(df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(0.975)
}

/// `mean ± t* s / sqrt(N)` with `s` the `N - 1` sample standard deviation.
pub fn confidence_interval(samples: &[f64]) -> Result<ConfidenceInterval> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("a confidence interval needs at least two samples"));
    }
    // Shifting by the first sample keeps constant inputs exact.
    let shift = samples[0];
    let mean = shift + samples.iter().map(|x| x - shift).sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = student_t_quantile_95(n - 1) * var.sqrt() / (n as f64).sqrt();
    Ok(ConfidenceInterval {
        lo: mean - half,
        hi: mean + half,
        mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMethod {
    #[serde(rename = "pagerank")]
    PageRank,
    #[serde(rename = "pagerank-like")]
    PageRankLike,
    Hits,
    HitsLike,
    Versatile,
    VersatileLike,
    /// An arbitrary configuration of length `k`.
    Framework,
}

impl CostMethod {
    /// The six columns of the reference cost table, in order.
    pub const TABLE: [CostMethod; 6] = [
        CostMethod::PageRank,
        CostMethod::PageRankLike,
        CostMethod::Hits,
        CostMethod::HitsLike,
        CostMethod::Versatile,
        CostMethod::VersatileLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostMethod::PageRank => "pagerank",
            CostMethod::PageRankLike => "pagerank-like",
            CostMethod::Hits => "hits",
            CostMethod::HitsLike => "hits-like",
            CostMethod::Versatile => "versatile",
            CostMethod::VersatileLike => "versatile-like",
            CostMethod::Framework => "framework",
        }
    }
}

impl fmt::Display for CostMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostMethod::TABLE
            .into_iter()
            .chain([CostMethod::Framework])
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown cost-model method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModelEntry {
    pub method: CostMethod,
    pub n: u64,
    pub layers: u64,
    pub operations: u128,
}

/// Operation count of one iteration:
/// * PageRank: `L n^2`
/// * HITS: `L (n^3 + n^2)`
/// * Versatile: `n (L n) n`
/// * configuration of length `k`: `(k - 1) n^3 + n^2`, with `k = L` for
///   PageRank-like and Versatile-like and `k = 2L` for HITS-like.
///
/// `k` is only read for [`CostMethod::Framework`].
pub fn cost_model(method: CostMethod, n: u64, layers: u64, k: Option<u64>) -> Result<CostModelEntry> {
    if n == 0 || layers == 0 {
        return Err(Error::invalid("cost model needs n >= 1 and L >= 1"));
    }
    let (n128, l) = (n as u128, layers as u128);
    let framework = |k: u128| (k - 1) * n128 * n128 * n128 + n128 * n128;
    let operations = match method {
        CostMethod::PageRank => l * n128 * n128,
        CostMethod::Hits => l * (n128 * n128 * n128 + n128 * n128),
        CostMethod::Versatile => n128 * (l * n128) * n128,
        CostMethod::PageRankLike | CostMethod::VersatileLike => framework(l),
        CostMethod::HitsLike => framework(2 * l),
        CostMethod::Framework => {
            let k = k.filter(|&k| k >= 1).ok_or_else(|| Error::invalid("framework cost needs k >= 1"))?;
            framework(k as u128)
        }
    };
    Ok(CostModelEntry {
        method,
        n,
        layers,
        operations,
    })
}

/// Rows `(n, [six table columns])` for each `n`.
pub fn cost_table(ns: &[u64], layers: u64) -> Result<Vec<(u64, Vec<u128>)>> {
    ns.iter()
        .map(|&n| {
            let row = CostMethod::TABLE
                .iter()
                .map(|&m| cost_model(m, n, layers, None).map(|e| e.operations))
                .collect::<Result<Vec<_>>>()?;
            Ok((n, row))
        })
        .collect()
}

pub const DEFAULT_COST_TABLE_SIZES: [u64; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// CSV rendering of [`cost_table`].
pub fn cost_table_csv(ns: &[u64], layers: u64) -> Result<String> {
    let mut out = String::from("n");
    for m in CostMethod::TABLE {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    for (n, row) in cost_table(ns, layers)? {
        out.push_str(&n.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplex::SparseMatrix;

    #[test]
    fn identical_and_reversed() {
        let r = [0.4, 0.3, 0.2, 0.1];
        let rev = [0.1, 0.2, 0.3, 0.4];
        for scheme in [WeightScheme::Hyperbolic, WeightScheme::Constant] {
            assert!((weighted_kendall_tau(&r, &r, scheme).unwrap().tau_w - 1.0).abs() < 1e-15);
            assert!((weighted_kendall_tau(&r, &rev, scheme).unwrap().tau_w + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_at_bottom_costs_less_than_at_top() {
        let r = [3.0, 2.0, 1.0, 0.0];
        let bottom = weighted_kendall_tau(&r, &[3.0, 2.0, 0.0, 1.0], WeightScheme::Hyperbolic).unwrap();
        let top = weighted_kendall_tau(&r, &[2.0, 3.0, 1.0, 0.0], WeightScheme::Hyperbolic).unwrap();
        assert!(bottom.tau_w > top.tau_w);
        let flat = weighted_kendall_tau(&r, &[3.0, 2.0, 0.0, 1.0], WeightScheme::Constant).unwrap();
        assert!((flat.tau_w - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn tau_errors() {
        assert!(matches!(
            weighted_kendall_tau(&[1.0, 2.0], &[1.0], WeightScheme::Hyperbolic),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            weighted_kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], WeightScheme::Hyperbolic),
            Err(Error::UndefinedMeasure(_))
        ));
        assert!(weighted_kendall_tau(&[1.0], &[1.0], WeightScheme::Hyperbolic).is_err());
    }

    #[test]
    fn tie_counts() {
        let res = weighted_kendall_tau(&[1.0, 1.0, 2.0, 2.0], &[1.0, 1.0, 1.0, 3.0], WeightScheme::Constant).unwrap();
        assert_eq!(
            res.tie_counts,
            TieCounts {
                reference: 2,
                other: 3,
                joint: 1
            }
        );
    }

    #[test]
    fn average_ranks() {
        assert_eq!(average_ranks_descending(&[0.1, 0.5, 0.5, 0.9]), vec![3.0, 1.5, 1.5, 0.0]);
    }

    #[test]
    fn near_ties_merge() {
        let merged = merge_near_ties(&[0.3, 0.1 + 1e-12, 0.1, 0.5], 1e-9);
        assert_eq!(merged, vec![0.3, 0.1, 0.1, 0.5]);
    }

    #[test]
    fn multijaccard_cases() {
        let a = SparseMatrix::from_triplets(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let b = SparseMatrix::from_triplets(3, [(2, 0, 1.0)]).unwrap();
        let same = MultiplexNetwork::new(3, vec![a.clone(), a.scaled(2.0).unwrap()]).unwrap();
        assert_eq!(multijaccard(&same).unwrap(), 1.0);
        let disjoint = MultiplexNetwork::new(3, vec![a.clone(), b]).unwrap();
        assert_eq!(multijaccard(&disjoint).unwrap(), 0.0);
        let empty = MultiplexNetwork::new(3, vec![SparseMatrix::empty(3), SparseMatrix::empty(3)]).unwrap();
        assert_eq!(multijaccard(&empty).unwrap(), 1.0);
        assert!(multijaccard(&MultiplexNetwork::new(3, vec![a]).unwrap()).is_err());
    }

    #[test]
    fn constant_samples_give_zero_width() {
        let ci = confidence_interval(&[2.5; 6]).unwrap();
        assert_eq!((ci.lo, ci.mean, ci.hi), (2.5, 2.5, 2.5));
        assert!(confidence_interval(&[1.0]).is_err());
    }

    #[test]
    fn cost_model_examples() {
        let pr = cost_model(CostMethod::PageRank, 64, 2, None).unwrap();
        assert_eq!(pr.operations, 8_192);
        assert_eq!(cost_model(CostMethod::HitsLike, 64, 2, None).unwrap().operations, 790_528);
        assert_eq!(
            cost_model(CostMethod::Versatile, 1024, 2, None).unwrap().operations,
            2_147_483_648
        );
        assert_eq!(cost_model(CostMethod::Framework, 64, 2, Some(4)).unwrap().operations, 790_528);
        assert!(cost_model(CostMethod::Framework, 64, 2, None).is_err());
        assert!("bogus".parse::<CostMethod>().is_err());
    }
}
