//! The acceptance checks, runnable from the library, the CLI and the test
//! suite. Every check draws its randomness from `derive_stream(master, id)`
//! and reports a deterministic JSON summary; timings are left to callers.

use std::collections::{BTreeMap, VecDeque};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arm::{ceil_root, scale_ratio};
use crate::blob::{blobs, check_radius_bound, for_each_shell_site, grow_tree, merge_radii};
use crate::bounds::{
    exp_series, generating_fn_bound, generating_fn_naive, multinomial_sweep, power_product_sweep, BoundParams,
};
use crate::cluster::{horizontal_crossing, label_clusters};
use crate::error::{Error, Result};
use crate::estimators::{
    binomial_moment, build_pi_table, check_quasi_mult, fit_arm_exponent, fraction_at_least, increasing_triples,
    largest_cluster_sizes, map_replicas, tail_drop, tail_threshold, vn_sizes,
};
use crate::lattice::{linf_distance, Grid, LatticeSpec, Region, Site};
use crate::lower::{
    estimate_rsw_constant, fkg_check, gluing_trials, lower_tail_estimate, vn_lower_constants, EventSpec, C12_GRID,
};
use crate::sampler::{derive_stream, Carrier, Config};
use crate::stats::{fit_line, Estimate};

pub const CRITERIA: [(u32, &str); 15] = [
    (1, "duality crossing, bond Z2"),
    (2, "colour-symmetry crossing, triangular site"),
    (3, "one-arm exponent fit"),
    (4, "quasi-multiplicativity"),
    (5, "merge radii against MST oracle"),
    (6, "merge radius observation"),
    (7, "shell disjointness"),
    (8, "upper tail shape"),
    (9, "lower tail construction"),
    (10, "mean long-arm size lower bound"),
    (11, "FKG on catalog pairs"),
    (12, "moment bound consistency"),
    (13, "cluster labels against flood fill"),
    (14, "bound-kit numerics"),
    (15, "determinism across worker counts"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub master_seed: u64,
    /// Multiplies every Monte Carlo sample count (1.0 = full size).
    pub sample_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { master_seed: 20240601, sample_scale: 1.0 }
    }
}

impl VerifyOptions {
    fn n(&self, full: u64) -> u64 {
        ((full as f64 * self.sample_scale).ceil() as u64).max(16)
    }

    fn seed(&self, id: u32, part: u64) -> u64 {
        derive_stream(derive_stream(self.master_seed, id as u64), part)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub details: serde_json::Value,
}

impl CriterionResult {
    fn new(id: u32, passed: bool, summary: String, details: serde_json::Value) -> Self {
        let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown").to_string();
        CriterionResult { id, name, passed, summary, details }
    }
}

pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Result<CriterionResult> {
    match id {
        1 => crossing_bond(opts),
        2 => crossing_triangular(opts),
        3 => arm_exponent(opts),
        4 => quasi_mult(opts),
        5 => blob_oracle(opts),
        6 => blob_observation(opts),
        7 => blob_disjointness(opts),
        8 => upper_tail(opts),
        9 => lower_tail(opts),
        10 => mean_vn(opts),
        11 => fkg_pairs(opts),
        12 => moment_consistency(opts),
        13 => cluster_oracle(opts),
        14 => bound_numerics(opts),
        15 => determinism(opts),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<CriterionResult>> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, opts)).collect()
}

fn tri() -> LatticeSpec {
    LatticeSpec::triangular()
}

fn crossing_estimate(lattice: LatticeSpec, rect: &Region, samples: u64, seed: u64) -> Result<Estimate> {
    let carrier = Carrier::from_region(lattice, rect)?;
    let hits = map_replicas(&carrier, 0.5, samples, seed, |c| horizontal_crossing(c, rect))?;
    Ok(Estimate::proportion(hits.iter().filter(|&&b| b).count() as u64, samples))
}

fn half_check(id: u32, lattice: LatticeSpec, rect: Region, opts: &VerifyOptions) -> Result<CriterionResult> {
    let samples = opts.n(20_000);
    let e = crossing_estimate(lattice, &rect, samples, opts.seed(id, 0))?;
    let tol = 3.0 * (0.25 / samples as f64).sqrt();
    let passed = (e.point - 0.5).abs() <= tol;
    Ok(CriterionResult::new(
        id,
        passed,
        format!("p̂ = {:.4} (N = {samples}), |p̂ - 1/2| <= {tol:.4}", e.point),
        json!({ "lattice": lattice.name(), "rect": rect, "estimate": e, "tolerance": tol }),
    ))
}

fn crossing_bond(opts: &VerifyOptions) -> Result<CriterionResult> {
    let n = 32;
    half_check(1, LatticeSpec::z2_bond(), Region::rect(Site::new(vec![-16, -16]), n + 1, n)?, opts)
}

fn crossing_triangular(opts: &VerifyOptions) -> Result<CriterionResult> {
    // 32 × 32 sites
    half_check(2, tri(), Region::rect(Site::new(vec![-16, -16]), 31, 31)?, opts)
}

pub const ARM_SCALES: [u64; 5] = [8, 16, 32, 64, 128];

fn arm_exponent(opts: &VerifyOptions) -> Result<CriterionResult> {
    let pairs: Vec<(u64, u64)> = ARM_SCALES.iter().map(|&n| (1, n)).collect();
    let table = build_pi_table(tri(), 0.5, &pairs, opts.n(10_000), opts.seed(3, 0))?;
    let fit = fit_arm_exponent(&table, &ARM_SCALES)?;
    let passed = (0.05..=0.20).contains(&fit.alpha);
    Ok(CriterionResult::new(
        3,
        passed,
        format!("α̂ = {:.4} ± {:.4} (target 5/48 ≈ 0.1042), window [0.05, 0.20]", fit.alpha, fit.stderr.max(fit.mc_stderr)),
        json!({ "table": table.sorted(), "fit": fit }),
    ))
}

pub const DYADIC: [u64; 6] = [2, 4, 8, 16, 32, 64];

fn quasi_mult(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut pairs = Vec::new();
    for (i, &a) in DYADIC.iter().enumerate() {
        for &b in &DYADIC[i + 1..] {
            pairs.push((a, b));
        }
    }
    let table = build_pi_table(tri(), 0.5, &pairs, opts.n(10_000), opts.seed(4, 0))?;
    let rep = check_quasi_mult(&table, &increasing_triples(&DYADIC))?;
    let passed = rep.zero_denominators == 0 && rep.max_ratio.is_some_and(|r| r.is_finite() && r <= 5.0);
    Ok(CriterionResult::new(
        4,
        passed,
        format!("max ratio {:.4} over {} triples (bound 5)", rep.max_ratio.unwrap_or(f64::NAN), rep.rows.len()),
        json!({ "table": table.sorted(), "report": rep }),
    ))
}

/// Random point sets shared by the blob checks: `k ∈ [2, 16]`, points in `Λ_100`.
pub fn blob_instances(seed: u64, count: usize, n: i64) -> Vec<Vec<Site>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = 2 + (rng.next_u64() % 15) as usize;
            let mut set = std::collections::BTreeSet::new();
            while set.len() < k {
                let x = (rng.next_u64() % (2 * n as u64 + 1)) as i64 - n;
                let y = (rng.next_u64() % (2 * n as u64 + 1)) as i64 - n;
                set.insert(Site::new(vec![x, y]));
            }
            // shuffle so that input order is not lexicographic
            let mut pts: Vec<Site> = set.into_iter().collect();
            for i in (1..pts.len()).rev() {
                pts.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
            }
            pts
        })
        .collect()
}

const BLOB_COUNT: usize = 1000;
const BLOB_N: i64 = 100;

/// Prim's algorithm on the complete L∞ graph; sorted edge weights.
pub fn mst_oracle(points: &[Site]) -> Vec<i64> {
    let k = points.len();
    let mut used = vec![false; k];
    let mut best = vec![i64::MAX; k];
    best[0] = 0;
    let mut w = Vec::with_capacity(k.saturating_sub(1));
    for step in 0..k {
        let j = (0..k).filter(|&i| !used[i]).min_by_key(|&i| best[i]).expect("vertex left");
        used[j] = true;
        if step > 0 {
            w.push(best[j]);
        }
        for i in 0..k {
            if !used[i] {
                best[i] = best[i].min(linf_distance(&points[i], &points[j]).expect("same dimension"));
            }
        }
    }
    w.sort_unstable();
    w
}

fn blob_oracle(opts: &VerifyOptions) -> Result<CriterionResult> {
    let inst = blob_instances(opts.seed(5, 0), BLOB_COUNT, BLOB_N);
    let mut mismatches = 0;
    for pts in &inst {
        if merge_radii(pts)? != mst_oracle(pts) {
            mismatches += 1;
        }
    }
    Ok(CriterionResult::new(
        5,
        mismatches == 0,
        format!("{mismatches} mismatches over {} instances", inst.len()),
        json!({ "instances": inst.len(), "mismatches": mismatches }),
    ))
}

fn blob_observation(opts: &VerifyOptions) -> Result<CriterionResult> {
    let inst = blob_instances(opts.seed(5, 0), BLOB_COUNT, BLOB_N);
    let (mut checks, mut violations, mut equalities) = (0, 0, Vec::new());
    for (idx, pts) in inst.iter().enumerate() {
        let rep = check_radius_bound(&grow_tree(pts)?, BLOB_N)?;
        checks += rep.checks.len();
        violations += rep.violations.len();
        for e in rep.equalities {
            equalities.push(json!({ "instance": idx, "i": e.i, "merge_index": e.merge_index, "r2": e.r2 }));
        }
    }
    Ok(CriterionResult::new(
        6,
        violations == 0,
        format!("{violations} violations in {checks} checks; {} equality cases", equalities.len()),
        json!({ "checks": checks, "violations": violations, "equalities": equalities }),
    ))
}

fn blob_disjointness(opts: &VerifyOptions) -> Result<CriterionResult> {
    let inst = blob_instances(opts.seed(5, 0), BLOB_COUNT, BLOB_N);
    let grid = Grid::centered(2, 2 * BLOB_N);
    let mut owner = vec![u32::MAX; grid.len()];
    let (mut overlaps, mut bad_instances, mut bad_counts) = (0u64, 0u64, 0u64);
    for (idx, pts) in inst.iter().enumerate() {
        owner.iter_mut().for_each(|o| *o = u32::MAX);
        let bl = blobs(&grow_tree(pts)?, BLOB_N)?;
        if bl.len() != 2 * pts.len() - 1 {
            bad_counts += 1;
        }
        let mut here = 0;
        for (b, blob) in bl.iter().enumerate() {
            for_each_shell_site(blob, BLOB_N, |w| {
                let i = grid.index_of(w).expect("shells stay in Λ_2n");
                if owner[i] != u32::MAX && owner[i] != b as u32 {
                    here += 1;
                }
                owner[i] = b as u32;
            })?;
        }
        let _ = idx;
        overlaps += here;
        bad_instances += (here > 0) as u64;
    }
    Ok(CriterionResult::new(
        7,
        overlaps == 0 && bad_counts == 0,
        format!("{overlaps} overlapping sites in {bad_instances} of {} instances", inst.len()),
        json!({ "instances": inst.len(), "overlapping_sites": overlaps, "instances_with_overlap": bad_instances, "wrong_blob_counts": bad_counts }),
    ))
}

pub const TAIL_US: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

fn upper_tail(opts: &VerifyOptions) -> Result<CriterionResult> {
    let n = 64u64;
    let samples = opts.n(10_000);
    let scales: Vec<u64> = {
        let mut s: Vec<u64> = TAIL_US.iter().map(|&u| scale_ratio(n, u)).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let pairs: Vec<(u64, u64)> = scales.iter().map(|&s| (1, s)).collect();
    let table = build_pi_table(tri(), 0.5, &pairs, samples, opts.seed(8, 0))?;
    let sizes = largest_cluster_sizes(tri(), 0.5, n, samples, opts.seed(8, 1))?;
    let thresholds: Vec<f64> = TAIL_US.iter().map(|&u| tail_threshold(n, 2, u, &table)).collect::<Result<_>>()?;
    let est: Vec<Estimate> = thresholds.iter().map(|&t| fraction_at_least(&sizes, t)).collect();
    let mut strictly = true;
    let mut drops = Vec::new();
    for i in 0..TAIL_US.len() - 1 {
        let d = tail_drop(&sizes, thresholds[i], thresholds[i + 1]);
        let ok = thresholds[i] < thresholds[i + 1] && d.point > 3.0 * d.stderr;
        strictly &= ok;
        drops.push(json!({ "from": TAIL_US[i], "to": TAIL_US[i + 1], "drop": d, "significant": ok }));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = TAIL_US
        .iter()
        .zip(&est)
        .filter(|(_, e)| e.point > 0.0)
        .map(|(u, e)| (u * u, -e.point.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    let slope_ok = xs.len() == TAIL_US.len() && fit.is_some_and(|f| f.slope > 0.0);
    Ok(CriterionResult::new(
        8,
        strictly && slope_ok,
        format!(
            "P̂ = [{}], strictly decreasing: {strictly}, slope of -log P̂ vs u²: {:.4}",
            est.iter().map(|e| format!("{:.4}", e.point)).collect::<Vec<_>>().join(", "),
            fit.map_or(f64::NAN, |f| f.slope)
        ),
        json!({ "n": n, "u": TAIL_US, "thresholds": thresholds, "estimates": est, "drops": drops, "fit": fit, "pi": table.sorted() }),
    ))
}

pub const GLUING_TARGET: u64 = 10_000;
pub const GLUING_CAP: u64 = 100_000;

fn lower_tail(opts: &VerifyOptions) -> Result<CriterionResult> {
    let (n, u) = (32i64, 2i64);
    let np = (n / u) as u64;
    let target = opts.n(GLUING_TARGET);
    let cap = opts.n(GLUING_CAP);
    let tally = gluing_trials(tri(), 0.5, n, u, target, cap, opts.seed(9, 0))?;
    let samples = opts.n(4000);
    let table = build_pi_table(tri(), 0.5, &[(1, np), (1, 3 * np), (1, 10)], opts.n(10_000), opts.seed(9, 1))?;
    let rsw = estimate_rsw_constant(tri(), 0.5, np, samples, opts.seed(9, 2))?;
    let vn = vn_lower_constants(tri(), 0.5, np, samples, &table, table.get(1, 3 * np).map_or(0.0, |r| r.stderr), &C12_GRID, opts.seed(9, 3))?;
    let row = vn
        .rows
        .iter()
        .rev()
        .find(|r| r.c13_fit.is_finite())
        .ok_or_else(|| Error::MissingConstant("finite C13 fit".into()))?;
    let mut tails = Vec::new();
    let mut tails_ok = true;
    for uu in [2u64, 3] {
        let t = lower_tail_estimate(tri(), 0.5, n as u64, uu, samples, &table, rsw.c11_fit, row.c12, row.c13_fit, opts.seed(9, 4))?;
        tails_ok &= t.consistent;
        tails.push(t);
    }
    let gluing_ok = tally.violated == 0 && tally.reached_target;
    Ok(CriterionResult::new(
        9,
        gluing_ok && tails_ok,
        format!(
            "gluing: {} accepted of {} tried (rate {:.2e}), {} violated ({} one-cluster, {} sum), target reached: {}; lower tail consistent: {tails_ok}",
            tally.accepted,
            tally.tried,
            tally.acceptance_rate(),
            tally.violated,
            tally.cluster_failures,
            tally.sum_failures,
            tally.reached_target
        ),
        json!({ "gluing": tally, "rsw": rsw, "vn_lower": vn, "c12": row.c12, "c13": row.c13_fit, "lower_tail": tails }),
    ))
}

pub const MEAN_SCALES: [u64; 3] = [8, 16, 32];

fn mean_vn(opts: &VerifyOptions) -> Result<CriterionResult> {
    let pairs: Vec<(u64, u64)> = MEAN_SCALES.iter().flat_map(|&n| [(1, n), (1, 3 * n)]).collect();
    let table = build_pi_table(tri(), 0.5, &pairs, opts.n(10_000), opts.seed(10, 0))?;
    let mut all = true;
    let mut reports = Vec::new();
    for (i, &n) in MEAN_SCALES.iter().enumerate() {
        let se = table.get(1, 3 * n).map_or(0.0, |r| r.stderr);
        let rep = vn_lower_constants(tri(), 0.5, n, opts.n(4000), &table, se, &C12_GRID, opts.seed(10, 1 + i as u64))?;
        all &= rep.mean_bound_holds;
        reports.push(rep);
    }
    Ok(CriterionResult::new(
        10,
        all,
        reports
            .iter()
            .map(|r| format!("n={}: Ê|V_n| = {:.1} vs n²π̂(3n) = {:.1}", r.n, r.mean.point, r.mean_bound))
            .collect::<Vec<_>>()
            .join("; "),
        json!({ "reports": reports, "pi": table.sorted() }),
    ))
}

fn rect(x: i64, y: i64, w: i64, h: i64) -> Region {
    Region::Rect { corner: Site::new(vec![x, y]), width: w, height: h }
}

/// Ten pairs of increasing events on the triangular lattice.
pub fn fkg_catalog_pairs() -> Vec<(EventSpec, EventSpec)> {
    use EventSpec::*;
    vec![
        (HorizontalCrossing { rect: rect(-8, -8, 16, 16) }, VerticalCrossing { rect: rect(-8, -8, 16, 16) }),
        (Arm { m: 1, n: 8 }, Arm { m: 1, n: 8 }),
        (Arm { m: 1, n: 8 }, Arm { m: 2, n: 16 }),
        (Arm { m: 1, n: 16 }, HorizontalCrossing { rect: rect(-16, -4, 32, 8) }),
        (LongArmAtLeast { n: 8, threshold: 40 }, Arm { m: 1, n: 16 }),
        (LongArmAtLeast { n: 4, threshold: 15 }, HorizontalCrossing { rect: rect(-8, -8, 16, 16) }),
        (HorizontalCrossing { rect: rect(-16, -16, 12, 12) }, HorizontalCrossing { rect: rect(4, 4, 12, 12) }),
        (VerticalCrossing { rect: rect(-4, -16, 8, 32) }, Arm { m: 2, n: 12 }),
        (HorizontalCrossing { rect: rect(0, 0, 8, 16) }, VerticalCrossing { rect: rect(0, 0, 16, 8) }),
        (LongArmAtLeast { n: 8, threshold: 60 }, LongArmAtLeast { n: 4, threshold: 20 }),
    ]
}

fn fkg_pairs(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut rows = Vec::new();
    let mut min_z = f64::INFINITY;
    for (i, (a, b)) in fkg_catalog_pairs().iter().enumerate() {
        let r = fkg_check(tri(), 0.5, a, b, opts.n(4000), opts.seed(11, i as u64))?;
        min_z = min_z.min(r.z);
        rows.push(json!({ "a": a, "b": b, "result": r }));
    }
    Ok(CriterionResult::new(
        11,
        min_z >= -3.0,
        format!("min z = {min_z:.3} over {} pairs", rows.len()),
        json!({ "pairs": rows, "min_z": min_z }),
    ))
}

pub const MOMENT_SCALES: [u64; 3] = [16, 32, 64];
pub const MOMENT_KS: [u64; 5] = [1, 2, 3, 4, 5];

fn moment_consistency(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut scales: Vec<u64> = MOMENT_SCALES
        .iter()
        .flat_map(|&n| MOMENT_KS.iter().map(move |&k| (n / ceil_root(k, 2)).max(1)))
        .collect();
    scales.sort_unstable();
    scales.dedup();
    let pairs: Vec<(u64, u64)> = scales.iter().map(|&s| (1, s)).collect();
    let table = build_pi_table(tri(), 0.5, &pairs, opts.n(10_000), opts.seed(12, 0))?;
    let mut per_n = Vec::new();
    let mut sup: f64 = 0.0;
    for (i, &n) in MOMENT_SCALES.iter().enumerate() {
        let sizes = vn_sizes(tri(), 0.5, n, opts.n(2000), opts.seed(12, 1 + i as u64))?;
        let mut best: f64 = 0.0;
        let mut ks = BTreeMap::new();
        for &k in &MOMENT_KS {
            let m = binomial_moment(&sizes, k);
            let s = (n / ceil_root(k, 2)).max(1);
            let pi = table.value(1, s).ok_or_else(|| Error::MissingPi(format!("π(1, {s})")))?;
            let c = m.point.powf(1.0 / k as f64) * k as f64 / ((n * n) as f64 * pi);
            best = best.max(c);
            ks.insert(k.to_string(), json!({ "moment": m, "scale": s, "c1": c }));
        }
        sup = sup.max(best);
        per_n.push(json!({ "n": n, "sup_k": best, "by_k": ks }));
    }
    let sups: Vec<f64> = per_n.iter().map(|v| v["sup_k"].as_f64().unwrap_or(f64::NAN)).collect();
    let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = hi / lo;
    let passed = sup.is_finite() && lo > 0.0 && spread < 2.0;
    Ok(CriterionResult::new(
        12,
        passed,
        format!("c1 fit = {sup:.4}; per-n sups {sups:.4?}, spread {spread:.3} (< 2)"),
        json!({ "c1": sup, "per_n": per_n, "spread": spread, "pi": table.sorted() }),
    ))
}

/// Labels by breadth-first search, numbered by lexicographically first site.
pub fn flood_fill_labels(config: &Config, rect: &Region) -> BTreeMap<Site, u32> {
    let sites = rect.sites();
    let lattice = config.lattice();
    let site_mode = lattice.is_site_mode();
    let offsets = lattice.neighbor_offsets();
    let mut labels: BTreeMap<Site, u32> = BTreeMap::new();
    let mut next = 0;
    for s in &sites {
        if labels.contains_key(s) || (site_mode && config.site_open(s) != Some(true)) {
            continue;
        }
        labels.insert(s.clone(), next);
        let mut queue = VecDeque::from([s.clone()]);
        while let Some(v) = queue.pop_front() {
            for o in &offsets {
                let w = v.offset(o);
                if !rect.contains(&w) || labels.contains_key(&w) {
                    continue;
                }
                let open = if site_mode { config.site_open(&w) == Some(true) } else { config.edge_open(&v, &w) == Some(true) };
                if open {
                    labels.insert(w.clone(), next);
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    labels
}

fn cluster_oracle(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed(13, 0));
    let count = 1000;
    let mut mismatches = 0;
    let mut sites_checked = 0u64;
    for i in 0..count {
        let lattice = if i % 2 == 0 { tri() } else { LatticeSpec::z2_bond() };
        let w = (rng.next_u64() % 64) as i64;
        let h = (rng.next_u64() % 64) as i64;
        let p = 0.3 + 0.4 * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let r = rect(-(w / 2), -(h / 2), w, h);
        let carrier = Carrier::from_region(lattice, &r)?;
        let cfg = Config::sample(carrier, p, rng.next_u64())?;
        let labels = label_clusters(&cfg, &r)?;
        let oracle = flood_fill_labels(&cfg, &r);
        let mut ok = true;
        for s in r.sites() {
            sites_checked += 1;
            if labels.label(&s) != oracle.get(&s).copied() {
                ok = false;
            }
        }
        mismatches += (!ok) as u64;
    }
    Ok(CriterionResult::new(
        13,
        mismatches == 0,
        format!("{mismatches} mismatching configurations out of {count} ({sites_checked} sites)"),
        json!({ "configs": count, "mismatches": mismatches, "sites": sites_checked }),
    ))
}

fn bound_numerics(_opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut worst_series: f64 = 0.0;
    let mut worst_exp: f64 = 0.0;
    let mut rows = Vec::new();
    for (alpha, c2) in [(5.0 / 48.0, 1.0), (0.5, 0.5), (1.5, 2.0)] {
        let params = BoundParams::new(2, alpha)?.with("C2", c2)?;
        for i in 0..=20 {
            let u = 1.0 + 0.5 * i as f64;
            let b = generating_fn_bound(u, 64, &params)?;
            let (f, s) = generating_fn_naive(u, &params, b.last_k)?;
            let rel = ((f + s) / b.total - 1.0).abs();
            worst_series = worst_series.max(rel);
            let x = u * u / c2;
            worst_exp = worst_exp.max((exp_series(x) / x.exp() - 1.0).abs());
        }
        rows.push(json!({ "alpha": alpha, "C2": c2 }));
    }
    let k_max = 10_000;
    let sweeps = [multinomial_sweep(k_max, 2)?, multinomial_sweep(k_max, 3)?, power_product_sweep(k_max, 2)?, power_product_sweep(k_max, 3)?];
    let finite = sweeps.iter().all(|s| s.sup.is_finite());
    let passed = worst_series <= 1e-9 && worst_exp <= 1e-9 && finite;
    Ok(CriterionResult::new(
        14,
        passed,
        format!(
            "series rel. err {worst_series:.2e}, exp identity rel. err {worst_exp:.2e}, C7 sups [{}]",
            sweeps.iter().map(|s| format!("{:.3}", s.sup)).collect::<Vec<_>>().join(", ")
        ),
        json!({ "series_rel_err": worst_series, "exp_rel_err": worst_exp, "params": rows, "sweeps": sweeps }),
    ))
}

/// A small bundle of estimators, serialised; used to compare worker counts.
pub fn determinism_probe(master_seed: u64, samples: u64) -> Result<String> {
    let table = build_pi_table(tri(), 0.5, &[(1, 4), (1, 8), (2, 8)], samples, master_seed)?;
    let sizes = largest_cluster_sizes(tri(), 0.5, 8, samples, derive_stream(master_seed, 1))?;
    let vn = vn_sizes(LatticeSpec::z2_bond(), 0.5, 4, samples, derive_stream(master_seed, 2))?;
    let fkg = fkg_check(tri(), 0.5, &EventSpec::Arm { m: 1, n: 6 }, &EventSpec::Arm { m: 2, n: 8 }, samples, derive_stream(master_seed, 3))?;
    let glue = gluing_trials(tri(), 0.5, 8, 2, 5, samples, derive_stream(master_seed, 4))?;
    Ok(serde_json::to_string(&json!({ "pi": table.sorted(), "largest": sizes, "vn": vn, "fkg": fkg, "gluing": glue }))?)
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn determinism(opts: &VerifyOptions) -> Result<CriterionResult> {
    let seed = opts.seed(15, 0);
    let samples = opts.n(400);
    let a = in_pool(1, || determinism_probe(seed, samples))??;
    let b = in_pool(8, || determinism_probe(seed, samples))??;
    let same = a == b;
    Ok(CriterionResult::new(
        15,
        same,
        format!("outputs with 1 and 8 workers identical: {same} ({} bytes)", a.len()),
        json!({ "bytes": a.len(), "identical": same }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mst_oracle_small() {
        let pts = vec![Site::new(vec![0, 0]), Site::new(vec![4, 0]), Site::new(vec![4, 3])];
        assert_eq!(mst_oracle(&pts), vec![3, 4]);
    }

    #[test]
    fn flood_fill_agrees_on_small_configs() {
        for (i, lattice) in [tri(), LatticeSpec::z2_bond()].into_iter().enumerate() {
            let r = rect(0, 0, 6, 4);
            let cfg = Config::sample(Carrier::from_region(lattice, &r).unwrap(), 0.5, i as u64).unwrap();
            let labels = label_clusters(&cfg, &r).unwrap();
            let oracle = flood_fill_labels(&cfg, &r);
            for s in r.sites() {
                assert_eq!(labels.label(&s), oracle.get(&s).copied());
            }
        }
    }

    #[test]
    fn instances_are_reproducible() {
        assert_eq!(blob_instances(3, 5, 100), blob_instances(3, 5, 100));
        assert!(blob_instances(3, 50, 100).iter().all(|x| (2..=16).contains(&x.len())));
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(16, &VerifyOptions::default()).is_err());
    }
}
