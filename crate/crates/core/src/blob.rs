//! The ball-growth merge process on a finite point set.
//!
//! Closed L∞ balls grow at unit speed around every point; two components
//! join when the first cross pair of balls touches, i.e. when the doubled
//! radius reaches the pair's L∞ distance. Radii are stored doubled (`r2`)
//! so every merge height is an exact integer. Among all cross-component
//! pairs at the current minimum distance the lexicographically smallest
//! `(u, v)` with `u < v` is taken. This is Kruskal's algorithm on the
//! complete graph with key `(distance, u, v)`, so the merge heights are the
//! single-linkage (minimum spanning tree) heights.
//!
//! Shell rasterisation: with `δ(w) = ||w - B||_∞`, a non-root blob owns
//! `{w : b2 < 2δ(w) < d2}` and the root owns `{w ∈ Λ_{2n} : 2δ(w) > b2}`.
//! The outer ball is open because two components that touch at doubled
//! radius `ρ` share the lattice sites at distance exactly `ρ/2` from both;
//! with a closed outer ball those sites would sit in two shells.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arm::ArmProbability;
use crate::error::{Error, Result};
use crate::lattice::{for_each_in_bounds, linf_distance, outer_boundary_linf, Region, Site};
use crate::union_find::DisjointSets;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEdge {
    pub u: Site,
    pub v: Site,
    /// Doubled merge radius, equal to `||u - v||_∞`.
    pub r2: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthRecord {
    /// Input points, sorted lexicographically.
    pub points: Vec<Site>,
    /// Merge edges in order; `r2` is nondecreasing.
    pub edges: Vec<MergeEdge>,
}

impl GrowthRecord {
    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// The multiset `R(X)` as doubled radii, nondecreasing.
    pub fn radii2(&self) -> Vec<i64> {
        self.edges.iter().map(|e| e.r2).collect()
    }
}

fn validate_points(points: &[Site]) -> Result<Vec<Site>> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidParameter("point set is empty".into()))?;
    let d = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicatePoint(w[0].coords().to_vec()));
        }
    }
    Ok(sorted)
}

pub fn grow_tree(points: &[Site]) -> Result<GrowthRecord> {
    let pts = validate_points(points)?;
    let k = pts.len();
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            pairs.push((linf_distance(&pts[i], &pts[j])?, i, j));
        }
    }
    pairs.sort_unstable();
    let mut ds = DisjointSets::new(k);
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    for (dist, i, j) in pairs {
        if ds.union(i as u32, j as u32).is_some() {
            edges.push(MergeEdge { u: pts[i].clone(), v: pts[j].clone(), r2: dist });
            if edges.len() == k - 1 {
                break;
            }
        }
    }
    Ok(GrowthRecord { points: pts, edges })
}

/// `R(X)` as doubled radii (each `r = r2 / 2`).
pub fn merge_radii(points: &[Site]) -> Result<Vec<i64>> {
    Ok(grow_tree(points)?.radii2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Death {
    /// Doubled radius at which the blob merged into a larger one.
    Merged(i64),
    /// The final blob `B = X`; its outer face is `∂Λ_{2n}`.
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blob {
    pub members: Vec<Site>,
    pub b2: i64,
    pub death: Death,
}

impl Blob {
    pub fn is_root(&self) -> bool {
        self.death == Death::Root
    }

    /// Doubled death radius; for the root this is the last merge height.
    pub fn d2(&self) -> i64 {
        match self.death {
            Death::Merged(d) => d,
            Death::Root => self.b2,
        }
    }

    fn dist2(&self, w: &[i64]) -> i64 {
        self.members
            .iter()
            .map(|x| x.coords().iter().zip(w).map(|(a, b)| (a - b).abs()).max().unwrap_or(0))
            .min()
            .expect("blob has members")
            * 2
    }

    fn bounds(&self, reach: i64) -> (Vec<i64>, Vec<i64>) {
        let d = self.members[0].dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for m in &self.members {
            for k in 0..d {
                lo[k] = lo[k].min(m.coords()[k] - reach);
                hi[k] = hi[k].max(m.coords()[k] + reach);
            }
        }
        (lo, hi)
    }

    fn raster(&self, reach: i64, keep: impl Fn(i64) -> bool) -> Region {
        let (lo, hi) = self.bounds(reach);
        let mut sites = std::collections::BTreeSet::new();
        for_each_in_bounds(&lo, &hi, |w| {
            if keep(self.dist2(w)) {
                sites.insert(Site::new(w.to_vec()));
            }
        });
        Region::Set { d: lo.len(), sites }
    }

    /// Union of closed balls `{w : 2δ(w) <= b2}`.
    pub fn birth_set(&self) -> Region {
        let b2 = self.b2;
        self.raster(b2 / 2, |t| t <= b2)
    }

    /// Union of open balls `{w : 2δ(w) < d2}` (non-root blobs).
    pub fn death_set(&self) -> Region {
        let d2 = self.d2();
        self.raster(d2 / 2, |t| t < d2)
    }
}

fn check_inside(points: &[Site], n: i64) -> Result<()> {
    if let Some(p) = points.iter().find(|p| p.coords().iter().any(|c| c.abs() > n)) {
        return Err(Error::InvalidParameter(format!("point {p} lies outside Λ_{n}")));
    }
    Ok(())
}

/// Every component that arises during the merge sequence, singletons first,
/// then one blob per merge in merge order; the last one is the root.
pub fn blobs(record: &GrowthRecord, n: i64) -> Result<Vec<Blob>> {
    check_inside(&record.points, n)?;
    let k = record.k();
    let index: BTreeMap<&Site, usize> = record.points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut out: Vec<Blob> = record
        .points
        .iter()
        .map(|p| Blob { members: vec![p.clone()], b2: 0, death: Death::Root })
        .collect();
    let mut ds = DisjointSets::new(k);
    let mut blob_of_root: Vec<usize> = (0..k).collect();
    for e in &record.edges {
        let (iu, iv) = (index[&e.u], index[&e.v]);
        let (ru, rv) = (ds.find(iu as u32) as usize, ds.find(iv as u32) as usize);
        let (bu, bv) = (blob_of_root[ru], blob_of_root[rv]);
        out[bu].death = Death::Merged(e.r2);
        out[bv].death = Death::Merged(e.r2);
        let mut members = out[bu].members.clone();
        members.extend(out[bv].members.iter().cloned());
        members.sort();
        let root = ds.union(iu as u32, iv as u32).expect("edges join distinct components") as usize;
        blob_of_root[root] = out.len();
        out.push(Blob { members, b2: e.r2, death: Death::Root });
    }
    Ok(out)
}

/// The shell `G(B)` (see module docs for the rasterisation).
pub fn blob_region(blob: &Blob, n: i64) -> Result<Region> {
    let mut sites = std::collections::BTreeSet::new();
    for_each_shell_site(blob, n, |w| {
        sites.insert(Site::new(w.to_vec()));
    })?;
    Ok(Region::Set { d: blob.members[0].dim(), sites })
}

/// Visits the sites of `G(B)` in lexicographic order without building the set.
pub fn for_each_shell_site(blob: &Blob, n: i64, mut f: impl FnMut(&[i64])) -> Result<()> {
    check_inside(&blob.members, n)?;
    let d = blob.members[0].dim();
    let (b2, d2) = (blob.b2, blob.d2());
    if blob.is_root() {
        for_each_in_bounds(&vec![-2 * n; d], &vec![2 * n; d], |w| {
            if blob.dist2(w) > b2 {
                f(w);
            }
        });
    } else {
        let (lo, hi) = blob.bounds(d2 / 2);
        for_each_in_bounds(&lo, &hi, |w| {
            let t = blob.dist2(w);
            if b2 < t && t < d2 {
                f(w);
            }
        });
    }
    Ok(())
}

/// `(ib, ob)`: outer boundaries (box adjacency) of the birth set and of the
/// death set; the root's outer face is `∂Λ_{2n}`.
pub fn blob_boundaries(blob: &Blob, n: i64) -> Result<(Region, Region)> {
    check_inside(&blob.members, n)?;
    let ib = outer_boundary_linf(&blob.birth_set());
    let ob = if blob.is_root() {
        outer_boundary_linf(&Region::Box { center: Site::origin(blob.members[0].dim()), radius: 2 * n })
    } else {
        outer_boundary_linf(&blob.death_set())
    };
    Ok((ib, ob))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub i: u64,
    /// 1-based merge index `k - i^d`.
    pub merge_index: usize,
    pub r2: i64,
    /// `i · r2`, compared against `2n`.
    pub lhs: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub checks: Vec<RadiusCheck>,
    pub violations: Vec<RadiusCheck>,
    pub equalities: Vec<RadiusCheck>,
}

/// For every integer `1 <= i <= (k-1)^{1/d}`, test `i · r2_{k - i^d} <= 2n`.
pub fn check_radius_bound(record: &GrowthRecord, n: i64) -> Result<RadiusReport> {
    check_inside(&record.points, n)?;
    let k = record.k() as u64;
    let d = record.dim() as u32;
    let mut report = RadiusReport::default();
    if k < 2 {
        return Ok(report);
    }
    let imax = crate::arm::floor_root(k - 1, d);
    for i in 1..=imax {
        let idx = (k - i.pow(d)) as usize;
        let r2 = record.edges[idx - 1].r2;
        let c = RadiusCheck { i, merge_index: idx, r2, lhs: i as i64 * r2, bound: 2 * n };
        if c.lhs > c.bound {
            report.violations.push(c.clone());
        } else if c.lhs == c.bound {
            report.equalities.push(c.clone());
        }
        report.checks.push(c);
    }
    Ok(report)
}

/// `O(R)`: distinct orderings of a multiset, `|R|! / Π mult!`.
pub fn ordering_count<T: Ord>(values: &[T]) -> BigUint {
    let mut counts: BTreeMap<&T, u64> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let fact = |m: u64| (1..=m).fold(BigUint::one(), |acc, x| acc * x);
    counts.values().fold(fact(values.len() as u64), |acc, &m| acc / fact(m))
}

/// `C3 π(n) Π_{r ∈ R} C3 π(⌈r⌉)`, with `R` given as doubled radii.
pub fn prob_upper_bound(radii2: &[i64], n: u64, pi: &dyn ArmProbability, c3: f64) -> Result<f64> {
    let mut acc = c3 * pi.pi_or_err(n)?;
    for &r2 in radii2 {
        if r2 <= 0 {
            return Err(Error::InvalidParameter(format!("merge radius must be positive, got {r2}/2")));
        }
        let scale = ((r2 + 1) / 2) as u64;
        acc *= c3 * pi.pi_or_err(scale)?;
    }
    Ok(acc)
}

/// `C4 O(R) n^d Π_{r ∈ R} d C4 r^{d-1}`, with `R` given as doubled radii.
pub fn count_upper_bound(radii2: &[i64], n: u64, c4: f64, d: u32) -> Result<f64> {
    if let Some(bad) = radii2.iter().find(|&&r| r <= 0) {
        return Err(Error::InvalidParameter(format!("merge radius must be positive, got {bad}/2")));
    }
    let orderings = num_traits::ToPrimitive::to_f64(&ordering_count(radii2)).unwrap_or(f64::INFINITY);
    let mut acc = c4 * orderings * (n as f64).powi(d as i32);
    for &r2 in radii2 {
        acc *= d as f64 * c4 * (r2 as f64 / 2.0).powi(d as i32 - 1);
    }
    Ok(acc)
}
