//! Monte Carlo estimators: arm probabilities, largest-cluster and
//! long-arm-set statistics, binomial moments and arm-table diagnostics.
//!
//! Replica `i` of an experiment with master seed `s` is sampled with seed
//! `derive_stream(s, i)`. Replicas run on the current rayon pool and their
//! results are collected in index order, so every output depends on the
//! master seed only, never on the worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arm::{scale_ratio, ArmProbability};
use crate::cluster::{arm_event, arm_events, largest_cluster_in_box, long_arm_size};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::sampler::{derive_stream, Carrier, Config};
use crate::stats::{big_mean_stderr, fit_line, quantile_sorted, Estimate};

/// Run `f` on replicas `0..samples`, results in replica order.
pub fn map_replicas<T, F>(carrier: &Arc<Carrier>, p: f64, samples: u64, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Config) -> Result<T> + Sync + Send,
{
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let cfg = Config::sample(carrier.clone(), p, derive_stream(master_seed, i))?;
            f(&cfg)
        })
        .collect()
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    Ok(())
}

fn check_scale(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::InvalidParameter("scale n must be >= 1".into()));
    }
    i64::try_from(n).map_err(|_| Error::InvalidParameter(format!("scale {n} too large")))
}

fn count_true(v: &[bool]) -> u64 {
    v.iter().filter(|&&b| b).count() as u64
}

/// `π̂(m, n)`; `m == n` returns 1 without sampling.
pub fn estimate_pi(lattice: LatticeSpec, p: f64, m: u64, n: u64, samples: u64, master_seed: u64) -> Result<Estimate> {
    check_p(p)?;
    check_samples(samples)?;
    let (mi, ni) = (check_scale(m)?, check_scale(n)?);
    if m > n {
        return Err(Error::InvalidParameter(format!("need m <= n, got m={m}, n={n}")));
    }
    if m == n {
        return Ok(Estimate::proportion(samples, samples));
    }
    let carrier = Carrier::box_closure(lattice, ni)?;
    let hits = map_replicas(&carrier, p, samples, master_seed, |c| arm_event(c, mi, ni))?;
    Ok(Estimate::proportion(count_true(&hits), samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiRow {
    pub lattice: String,
    pub p: f64,
    pub m: u64,
    pub n: u64,
    pub samples: u64,
    pub successes: u64,
    pub estimate: f64,
    pub stderr: f64,
}

impl PiRow {
    pub fn as_estimate(&self) -> Estimate {
        Estimate::proportion(self.successes, self.samples)
    }
}

/// Arm-probability estimates for one `(lattice, p)`, keyed by `(m, n)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PiTable {
    rows: Vec<PiRow>,
}

impl PiTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[PiRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, row: PiRow) -> Result<()> {
        if row.m == 0 || row.m > row.n || row.successes > row.samples || !(0.0..=1.0).contains(&row.estimate) {
            return Err(Error::InvalidParameter(format!("invalid arm-table row {row:?}")));
        }
        if let Some(first) = self.rows.first() {
            if first.lattice != row.lattice || first.p != row.p {
                return Err(Error::InvalidParameter(format!(
                    "arm table holds {}/p={}, cannot add {}/p={}",
                    first.lattice, first.p, row.lattice, row.p
                )));
            }
        }
        if self.get(row.m, row.n).is_some() {
            return Err(Error::DuplicateKey(format!("({}, p={}, m={}, n={})", row.lattice, row.p, row.m, row.n)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn get(&self, m: u64, n: u64) -> Option<&PiRow> {
        self.rows.iter().find(|r| r.m == m && r.n == n)
    }

    /// `π̂(m, n)` with `π̂(m, m) = 1`.
    pub fn value(&self, m: u64, n: u64) -> Option<f64> {
        if m == n && m >= 1 {
            return Some(1.0);
        }
        self.get(m, n).map(|r| r.estimate)
    }

    fn value_or_err(&self, m: u64, n: u64) -> Result<f64> {
        self.value(m, n).ok_or_else(|| Error::MissingPi(format!("π({m}, {n})")))
    }

    fn stderr_of(&self, m: u64, n: u64) -> f64 {
        if m == n {
            0.0
        } else {
            self.get(m, n).map_or(0.0, |r| r.stderr)
        }
    }

    /// Rows sorted by `(m, n)`.
    pub fn sorted(&self) -> Vec<PiRow> {
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| (r.m, r.n));
        rows
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in self.sorted() {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(["lattice", "p", "m", "n", "samples", "successes", "estimate", "stderr"])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV schema; lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut t = PiTable::new();
        for row in rd.deserialize() {
            t.insert(row?)?;
        }
        Ok(t)
    }

    /// Synthetic table `π(m, n) = (n/m)^{-α}` for every pair in `scales`.
    pub fn power_law(scales: &[u64], alpha: f64) -> Self {
        let mut t = PiTable::new();
        for (i, &m) in scales.iter().enumerate() {
            for &n in &scales[i..] {
                let v = (n as f64 / m as f64).powf(-alpha);
                t.rows.push(PiRow {
                    lattice: "synthetic".into(),
                    p: 0.0,
                    m,
                    n,
                    samples: 0,
                    successes: 0,
                    estimate: v,
                    stderr: 0.0,
                });
            }
        }
        t
    }
}

impl ArmProbability for PiTable {
    fn pi(&self, scale: u64) -> Option<f64> {
        self.value(1, scale)
    }
}

/// One row per pair. All rows share the same replicas, sampled on the
/// carrier `Λ_N ∪ ∂Λ_N` with `N` the largest requested `n`; each replica is
/// labelled once and answers every pair.
pub fn build_pi_table(
    lattice: LatticeSpec,
    p: f64,
    scales: &[(u64, u64)],
    samples: u64,
    master_seed: u64,
) -> Result<PiTable> {
    check_p(p)?;
    let mut seen = BTreeSet::new();
    for &(m, n) in scales {
        check_scale(m)?;
        check_scale(n)?;
        if m > n {
            return Err(Error::InvalidParameter(format!("need m <= n, got m={m}, n={n}")));
        }
        if !seen.insert((m, n)) {
            return Err(Error::DuplicateKey(format!("({}, p={p}, m={m}, n={n})", lattice.name())));
        }
    }
    let mut table = PiTable::new();
    if scales.is_empty() {
        return Ok(table);
    }
    check_samples(samples)?;
    let pairs: Vec<(i64, i64)> = scales.iter().filter(|(m, n)| m < n).map(|&(m, n)| (m as i64, n as i64)).collect();
    let mut counts = vec![0u64; pairs.len()];
    if !pairs.is_empty() {
        let nmax = pairs.iter().map(|p| p.1).max().unwrap_or(1);
        let carrier = Carrier::box_closure(lattice, nmax)?;
        let hits = map_replicas(&carrier, p, samples, master_seed, |c| arm_events(c, &pairs))?;
        for h in hits {
            for (c, b) in counts.iter_mut().zip(h) {
                *c += b as u64;
            }
        }
    }
    let mut it = counts.into_iter();
    for &(m, n) in scales {
        let succ = if m == n { samples } else { it.next().expect("one count per pair") };
        let e = Estimate::proportion(succ, samples);
        table.insert(PiRow {
            lattice: lattice.name(),
            p,
            m,
            n,
            samples,
            successes: succ,
            estimate: e.point,
            stderr: e.stderr,
        })?;
    }
    Ok(table)
}

/// Empirical distribution of an integer statistic over replicas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub samples: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub mean: f64,
    pub stderr: f64,
    /// `(q, value)` nearest-rank quantiles.
    pub quantiles: Vec<(f64, u64)>,
}

pub const QUANTILES: [f64; 7] = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];

impl Distribution {
    pub fn from_values(values: &[u64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let mut histogram = BTreeMap::new();
        for &v in &sorted {
            *histogram.entry(v).or_insert(0) += 1;
        }
        let big: Vec<BigUint> = values.iter().map(|&v| BigUint::from(v)).collect();
        let (mean, stderr) = big_mean_stderr(&big);
        let quantiles = QUANTILES.iter().filter_map(|&q| quantile_sorted(&sorted, q).map(|v| (q, v))).collect();
        Distribution { samples: values.len() as u64, histogram, mean, stderr, quantiles }
    }

    /// CSV with header `value,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["value", "count"])?;
        for (v, c) in &self.histogram {
            wr.write_record([v.to_string(), c.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn mean_estimate(&self) -> Estimate {
        Estimate::mean(self.samples, self.mean, self.stderr)
    }
}

/// `|C_n^{(1)}|` for each replica.
pub fn largest_cluster_sizes(lattice: LatticeSpec, p: f64, n: u64, samples: u64, master_seed: u64) -> Result<Vec<u64>> {
    check_p(p)?;
    let ni = check_scale(n)?;
    let carrier = Carrier::box_closure(lattice, ni)?;
    map_replicas(&carrier, p, samples, master_seed, |c| largest_cluster_in_box(c, ni))
}

pub fn largest_cluster_distribution(
    lattice: LatticeSpec,
    p: f64,
    n: u64,
    samples: u64,
    master_seed: u64,
) -> Result<Distribution> {
    Ok(Distribution::from_values(&largest_cluster_sizes(lattice, p, n, samples, master_seed)?))
}

/// `|V_n|` for each replica, sampled on `Λ_{2n} ∪ ∂Λ_{2n}`.
pub fn vn_sizes(lattice: LatticeSpec, p: f64, n: u64, samples: u64, master_seed: u64) -> Result<Vec<u64>> {
    check_p(p)?;
    let ni = check_scale(n)?;
    let carrier = Carrier::box_closure(lattice, 2 * ni)?;
    map_replicas(&carrier, p, samples, master_seed, |c| long_arm_size(c, ni))
}

/// `n^d · π̂(max(1, ⌊n/u⌋))`.
pub fn tail_threshold(n: u64, d: usize, u: f64, pi: &dyn ArmProbability) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::InvalidParameter(format!("u must be >= 1, got {u}")));
    }
    Ok((n as f64).powi(d as i32) * pi.pi_or_err(scale_ratio(n, u))?)
}

/// Fraction of `values` at or above `threshold`.
pub fn fraction_at_least(values: &[u64], threshold: f64) -> Estimate {
    let hits = values.iter().filter(|&&v| v as f64 >= threshold).count() as u64;
    Estimate::proportion(hits, values.len() as u64)
}

/// Paired estimate of `P(t_lo <= X < t_hi)`, the drop of the tail between
/// two thresholds on shared replicas.
pub fn tail_drop(values: &[u64], t_lo: f64, t_hi: f64) -> Estimate {
    let hits = values.iter().filter(|&&v| v as f64 >= t_lo && (v as f64) < t_hi).count() as u64;
    Estimate::proportion(hits, values.len() as u64)
}

/// `P̂(|C_n^{(1)}| >= n^d π̂(n/u))`.
pub fn tail_probability(
    lattice: LatticeSpec,
    p: f64,
    n: u64,
    u: f64,
    samples: u64,
    pi: &dyn ArmProbability,
    master_seed: u64,
) -> Result<Estimate> {
    let t = tail_threshold(n, lattice.d, u, pi)?;
    check_samples(samples)?;
    Ok(fraction_at_least(&largest_cluster_sizes(lattice, p, n, samples, master_seed)?, t))
}

/// `P̂(|V_n| >= n^d π̂(n/u))`.
pub fn vn_tail(
    lattice: LatticeSpec,
    p: f64,
    n: u64,
    u: f64,
    samples: u64,
    pi: &dyn ArmProbability,
    master_seed: u64,
) -> Result<Estimate> {
    let t = tail_threshold(n, lattice.d, u, pi)?;
    check_samples(samples)?;
    Ok(fraction_at_least(&vn_sizes(lattice, p, n, samples, master_seed)?, t))
}

pub fn binomial(x: u64, k: u64) -> BigUint {
    if k > x {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(x - i) / BigUint::from(i + 1);
    }
    acc
}

/// Sample mean of `binom(x, k)` with exact accumulation.
pub fn binomial_moment(values: &[u64], k: u64) -> Estimate {
    let terms: Vec<BigUint> = values.iter().map(|&x| binomial(x, k)).collect();
    let (m, se) = big_mean_stderr(&terms);
    Estimate::mean(values.len() as u64, m, se)
}

/// `Ê binom(|V_n|, k)`.
pub fn moment_estimate(lattice: LatticeSpec, p: f64, n: u64, k: u64, samples: u64, master_seed: u64) -> Result<Estimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    check_samples(samples)?;
    Ok(binomial_moment(&vn_sizes(lattice, p, n, samples, master_seed)?, k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiMultRow {
    pub k: u64,
    pub l: u64,
    pub m: u64,
    /// `π̂(k,l) π̂(l,m) / π̂(k,m)`; `None` when the denominator is 0.
    pub ratio: Option<f64>,
    pub stderr: f64,
    pub zero_denominator: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiMultReport {
    pub rows: Vec<QuasiMultRow>,
    /// Empirical `C1`: the largest finite ratio.
    pub max_ratio: Option<f64>,
    pub zero_denominators: usize,
}

/// Ratio stderr by first-order propagation of the three relative errors.
pub fn check_quasi_mult(pi: &PiTable, triples: &[(u64, u64, u64)]) -> Result<QuasiMultReport> {
    let mut rows = Vec::with_capacity(triples.len());
    for &(k, l, m) in triples {
        if !(1 <= k && k <= l && l <= m) {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= l <= m, got ({k}, {l}, {m})")));
        }
        let (a, b, c) = (pi.value_or_err(k, l)?, pi.value_or_err(l, m)?, pi.value_or_err(k, m)?);
        let row = if c == 0.0 {
            QuasiMultRow { k, l, m, ratio: None, stderr: f64::NAN, zero_denominator: true }
        } else {
            let r = a * b / c;
            let rel = |v: f64, s: f64| if v > 0.0 { (s / v).powi(2) } else { 0.0 };
            let var = rel(a, pi.stderr_of(k, l)) + rel(b, pi.stderr_of(l, m)) + rel(c, pi.stderr_of(k, m));
            QuasiMultRow { k, l, m, ratio: Some(r), stderr: r * var.sqrt(), zero_denominator: false }
        };
        rows.push(row);
    }
    let max_ratio = rows.iter().filter_map(|r| r.ratio).fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let zero_denominators = rows.iter().filter(|r| r.zero_denominator).count();
    Ok(QuasiMultReport { rows, max_ratio, zero_denominators })
}

/// All strictly increasing triples from `scales`.
pub fn increasing_triples(scales: &[u64]) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for i in 0..scales.len() {
        for j in i + 1..scales.len() {
            for k in j + 1..scales.len() {
                out.push((scales[i], scales[j], scales[k]));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmFit {
    pub alpha: f64,
    /// Regression standard error of the slope.
    pub stderr: f64,
    /// Monte Carlo error of the slope from the per-scale stderrs.
    pub mc_stderr: f64,
    pub scales: Vec<u64>,
}

/// Negated least-squares slope of `log π̂(n)` against `log n`.
pub fn fit_arm_exponent(pi: &PiTable, scales: &[u64]) -> Result<ArmFit> {
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 scales, got {}", scales.len())));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut rel = Vec::new();
    for &n in scales {
        let v = pi.value_or_err(1, n)?;
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!("π̂({n}) = {v} is not positive")));
        }
        x.push((n as f64).ln());
        y.push(v.ln());
        rel.push(pi.stderr_of(1, n) / v);
    }
    let fit = fit_line(&x, &y).ok_or_else(|| Error::InvalidParameter("scales must be distinct".into()))?;
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let mc_var: f64 = x.iter().zip(&rel).map(|(a, r)| ((a - mx) / sxx).powi(2) * r * r).sum();
    Ok(ArmFit { alpha: -fit.slope, stderr: fit.slope_stderr, mc_stderr: mc_var.sqrt(), scales: scales.to_vec() })
}
