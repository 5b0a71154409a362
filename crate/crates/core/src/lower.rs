//! The planar lower-tail construction: crossing constants, FKG checks,
//! long-arm lower constants, the crossing net `D_n(u)` and its gluing
//! consequences. Two-dimensional only.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arm::{scale_ratio, ArmProbability};
use crate::cluster::{
    arm_event, cluster_bounds, horizontal_crossing, label_mask, largest_cluster_in_box, long_arm_indices,
    long_arm_size, vertical_crossing, NO_LABEL,
};
use crate::error::{Error, Result};
use crate::estimators::{check_p, map_replicas, vn_sizes};
use crate::lattice::{LatticeSpec, Region, Site};
use crate::sampler::{derive_stream, Carrier, Config};
use crate::stats::Estimate;

fn require_planar(lattice: &LatticeSpec) -> Result<()> {
    if lattice.d != 2 {
        return Err(Error::InvalidParameter(format!("planar construction needs d = 2, got d = {}", lattice.d)));
    }
    Ok(())
}

/// `-ln p̂`, infinite when `p̂ = 0`.
fn neg_log(p: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RswFit {
    pub n: u64,
    pub estimate: Estimate,
    /// `C11 = -ln p̂`; infinite when no crossing was seen.
    pub c11_fit: f64,
    pub warning: Option<String>,
}

/// `P̂(H(B(n, 2n)))` for `B(n, 2n) = [0, n] × [0, 2n]`.
pub fn estimate_rsw_constant(lattice: LatticeSpec, p: f64, n: u64, samples: u64, master_seed: u64) -> Result<RswFit> {
    require_planar(&lattice)?;
    check_p(p)?;
    if n == 0 || samples == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and samples >= 1".into()));
    }
    let n = n as i64;
    let rect = Region::rect(Site::new(vec![0, 0]), n, 2 * n)?;
    let carrier = Carrier::from_region(lattice, &rect)?;
    let hits = map_replicas(&carrier, p, samples, master_seed, |c| horizontal_crossing(c, &rect))?;
    let estimate = Estimate::proportion(hits.iter().filter(|&&b| b).count() as u64, samples);
    let c11_fit = neg_log(estimate.point);
    let warning = (estimate.successes == 0).then(|| format!("no crossing in {samples} samples; C11 fit is infinite"));
    Ok(RswFit { n: n as u64, estimate, c11_fit, warning })
}

/// The increasing events that may enter an FKG check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    HorizontalCrossing { rect: Region },
    VerticalCrossing { rect: Region },
    /// `∂Λ_m ↔ ∂Λ_n`.
    Arm { m: i64, n: i64 },
    /// `|V_n| >= threshold`.
    LongArmAtLeast { n: i64, threshold: u64 },
}

impl EventSpec {
    /// Parses a JSON event; anything outside the catalog is rejected.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::NotIncreasing(format!("{s}: {e}")))
    }

    fn radius(&self) -> Result<i64> {
        Ok(match self {
            EventSpec::HorizontalCrossing { rect } | EventSpec::VerticalCrossing { rect } => {
                if !matches!(rect, Region::Rect { .. }) {
                    return Err(Error::NotIncreasing(format!("crossing events need a rectangle, got {rect:?}")));
                }
                let (lo, hi) = rect.bounds().expect("rectangles are nonempty");
                lo.iter().chain(&hi).map(|c| c.abs()).max().unwrap_or(0)
            }
            EventSpec::Arm { m, n } => {
                if !(1 <= *m && m <= n) {
                    return Err(Error::InvalidParameter(format!("arm event needs 1 <= m <= n, got ({m}, {n})")));
                }
                *n
            }
            EventSpec::LongArmAtLeast { n, .. } => {
                if *n < 1 {
                    return Err(Error::InvalidParameter(format!("long-arm scale must be >= 1, got {n}")));
                }
                2 * n
            }
        })
    }

    pub fn holds(&self, config: &Config) -> Result<bool> {
        match self {
            EventSpec::HorizontalCrossing { rect } => horizontal_crossing(config, rect),
            EventSpec::VerticalCrossing { rect } => vertical_crossing(config, rect),
            EventSpec::Arm { m, n } => arm_event(config, *m, *n),
            EventSpec::LongArmAtLeast { n, threshold } => Ok(long_arm_size(config, *n)? >= *threshold),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgResult {
    pub samples: u64,
    pub joint: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub product: f64,
    /// Delta-method standard error of `joint - product`.
    pub stderr: f64,
    /// `(joint - product) / stderr`; 0 when both vanish.
    pub z: f64,
}

/// `(joint - product)` and its z-score from the four cell counts.
pub fn fkg_statistics(n11: u64, n10: u64, n01: u64, n00: u64) -> FkgResult {
    let n = (n11 + n10 + n01 + n00) as f64;
    let (p11, p10, p01, p00) = (n11 as f64 / n, n10 as f64 / n, n01 as f64 / n, n00 as f64 / n);
    let (pa, pb) = (p11 + p10, p11 + p01);
    let diff = p11 - pa * pb;
    let g = [1.0 - pa - pb, -pb, -pa, 0.0];
    let cells = [p11, p10, p01, p00];
    let m1: f64 = g.iter().zip(&cells).map(|(a, b)| a * b).sum();
    let m2: f64 = g.iter().zip(&cells).map(|(a, b)| a * a * b).sum();
    let stderr = ((m2 - m1 * m1).max(0.0) / n).sqrt();
    let z = if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() < 1e-15 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    FkgResult { samples: n as u64, joint: p11, p_a: pa, p_b: pb, product: pa * pb, stderr, z }
}

pub fn fkg_check(
    lattice: LatticeSpec,
    p: f64,
    a: &EventSpec,
    b: &EventSpec,
    samples: u64,
    master_seed: u64,
) -> Result<FkgResult> {
    check_p(p)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let r = a.radius()?.max(b.radius()?);
    let carrier = Carrier::box_closure(lattice, r)?;
    let outcomes = map_replicas(&carrier, p, samples, master_seed, |c| Ok((a.holds(c)?, b.holds(c)?)))?;
    let mut cells = [0u64; 4];
    for (x, y) in outcomes {
        cells[match (x, y) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }] += 1;
    }
    Ok(fkg_statistics(cells[0], cells[1], cells[2], cells[3]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C12Row {
    pub c12: f64,
    pub threshold: f64,
    pub estimate: Estimate,
    /// `C13 = -ln P̂`, infinite when the event was never seen.
    pub c13_fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnLowerReport {
    pub n: u64,
    pub mean: Estimate,
    /// `n² π̂(3n)`.
    pub mean_bound: f64,
    /// `Ê|V_n| >= n² π̂(3n)` up to three combined standard errors.
    pub mean_bound_holds: bool,
    pub rows: Vec<C12Row>,
}

pub const C12_GRID: [f64; 3] = [0.1, 0.2, 0.5];

/// `|V_n|` lower constants. `pi` must provide `π̂(n)` and `π̂(3n)`;
/// `pi_stderr` is the standard error of `π̂(3n)` (0 if exact).
#[allow(clippy::too_many_arguments)]
pub fn vn_lower_constants(
    lattice: LatticeSpec,
    p: f64,
    n: u64,
    samples: u64,
    pi: &dyn ArmProbability,
    pi3n_stderr: f64,
    c12_grid: &[f64],
    master_seed: u64,
) -> Result<VnLowerReport> {
    require_planar(&lattice)?;
    let (pi_n, pi_3n) = (pi.pi_or_err(n)?, pi.pi_or_err(3 * n)?);
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let sizes = vn_sizes(lattice, p, n, samples, master_seed)?;
    let mean = crate::estimators::binomial_moment(&sizes, 1);
    let n2 = (n * n) as f64;
    let mean_bound = n2 * pi_3n;
    let se = (mean.stderr.powi(2) + (n2 * pi3n_stderr).powi(2)).sqrt();
    let mean_bound_holds = mean.point + 3.0 * se >= mean_bound;
    let rows = c12_grid
        .iter()
        .map(|&c12| {
            let threshold = c12 * n2 * pi_n;
            let estimate = crate::estimators::fraction_at_least(&sizes, threshold);
            C12Row { c12, threshold, estimate, c13_fit: neg_log(estimate.point) }
        })
        .collect();
    Ok(VnLowerReport { n, mean, mean_bound, mean_bound_holds, rows })
}

fn check_dn_params(config: &Config, n: i64, u: i64) -> Result<i64> {
    require_planar(&config.lattice())?;
    if !(2 <= u && u <= n) {
        return Err(Error::InvalidParameter(format!("need integer u in [2, n], got u={u}, n={n}")));
    }
    Ok(n / u)
}

/// The rectangles of `D_n(u)`: for each `v ∈ Λ_u`, `H(B(n'v; n', 2n'))`
/// and `V(B(n'v; 2n', n'))` with `n' = ⌊n/u⌋`.
pub fn dn_rectangles(n: i64, u: i64) -> Vec<(Region, Region)> {
    let np = n / u;
    let mut out = Vec::with_capacity(((2 * u + 1) * (2 * u + 1)) as usize);
    for x in -u..=u {
        for y in -u..=u {
            let corner = Site::new(vec![np * x, np * y]);
            out.push((
                Region::Rect { corner: corner.clone(), width: np, height: 2 * np },
                Region::Rect { corner, width: 2 * np, height: np },
            ));
        }
    }
    out
}

/// Radius of the box carrier that holds every set the gluing check reads.
pub fn dn_carrier_radius(n: i64, u: i64) -> i64 {
    let np = n / u;
    (u * np + 2 * np).max(n - np + 2 * np + 1).max((u - 1) * np + 2 * np + 1)
}

/// All `2(2u+1)²` crossings of `D_n(u)`; stops at the first failure.
pub fn dn_event(config: &Config, n: i64, u: i64) -> Result<bool> {
    check_dn_params(config, n, u)?;
    for (h, v) in dn_rectangles(n, u) {
        if !horizontal_crossing(config, &h)? || !vertical_crossing(config, &v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GluingOutcome {
    NotApplicable,
    Holds,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingDetail {
    pub outcome: GluingOutcome,
    /// Every long-arm vertex of `Λ_{n-n'}` lies in one cluster of `Λ_n`.
    pub same_cluster: bool,
    /// `Σ_{v ∈ Λ_{u-1}} |V_{n'}(n'v)|`, boxes counted with multiplicity.
    pub vn_sum: u64,
    /// `|∪_{v ∈ Λ_{u-1}} V_{n'}(n'v)|`, reported alongside the sum.
    pub vn_union: u64,
    /// `|C_n^{(1)}|`.
    pub largest: u64,
    pub long_arm_vertices: u64,
}

/// Both consequences of `D_n(u)`: (i) all `w ∈ Λ_{n-n'}` with
/// `w ↔ ∂Λ_{2n'}(w)` share one cluster of `Λ_n`, and
/// (ii) `Σ_{v ∈ Λ_{u-1}} |V_{n'}(n'v)| <= |C_n^{(1)}|`.
pub fn gluing_detail(config: &Config, n: i64, u: i64) -> Result<GluingDetail> {
    let np = check_dn_params(config, n, u)?;
    if !dn_event(config, n, u)? {
        return Ok(GluingDetail {
            outcome: GluingOutcome::NotApplicable,
            same_cluster: false,
            vn_sum: 0,
            vn_union: 0,
            largest: 0,
            long_arm_vertices: 0,
        });
    }
    let carrier = config.carrier();
    let grid = carrier.grid();
    let origin = Site::new(vec![0, 0]);
    let reach = 2 * np + 1;
    // w ↔ ∂Λ_R(w) iff the cluster of w leaves Λ_R(w); the carrier holds the
    // first exit of any such path, so carrier clusters decide it exactly.
    carrier.box_mask(&origin, n - np + reach)?;
    let wide = label_mask(config, carrier.mask());
    let bounds = cluster_bounds(&wide);
    let inner = label_mask(config, &carrier.box_mask(&origin, n)?);
    let mut glue = NO_LABEL;
    let mut same_cluster = true;
    let mut long_arm_vertices = 0;
    let mut c = [0i64; 2];
    for i in carrier.box_mask(&origin, n - np)?.iter_ones() {
        let l = wide.label_idx(i);
        if l == NO_LABEL {
            continue;
        }
        grid.coords_into(i, &mut c);
        let (lo, hi) = &bounds[l as usize];
        let far = (0..2).map(|k| (hi[k] - c[k]).max(c[k] - lo[k])).max().unwrap_or(0);
        if far < reach {
            continue;
        }
        long_arm_vertices += 1;
        let li = inner.label_idx(i);
        if glue == NO_LABEL {
            glue = li;
        } else if li != glue {
            same_cluster = false;
        }
    }
    let mut vn_sum = 0;
    let mut union = crate::bits::BitSet::new(grid.len());
    for x in -(u - 1)..=(u - 1) {
        for y in -(u - 1)..=(u - 1) {
            let idx = long_arm_indices(config, &Site::new(vec![np * x, np * y]), np)?;
            vn_sum += idx.len() as u64;
            idx.into_iter().for_each(|i| union.insert(i));
        }
    }
    let vn_union = union.count_ones() as u64;
    let largest = inner.largest();
    let outcome = if same_cluster && vn_sum <= largest { GluingOutcome::Holds } else { GluingOutcome::Violated };
    Ok(GluingDetail { outcome, same_cluster, vn_sum, vn_union, largest, long_arm_vertices })
}

pub fn gluing_check(config: &Config, n: i64, u: i64) -> Result<GluingOutcome> {
    Ok(gluing_detail(config, n, u)?.outcome)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingTally {
    pub n: i64,
    pub u: i64,
    pub tried: u64,
    pub accepted: u64,
    pub holds: u64,
    pub violated: u64,
    /// Violations of the one-cluster property.
    pub cluster_failures: u64,
    /// Violations of the sum inequality.
    pub sum_failures: u64,
    /// Accepted samples whose union of long-arm sets exceeds `|C_n^{(1)}|`.
    pub union_failures: u64,
    pub reached_target: bool,
}

impl GluingTally {
    pub fn acceptance_rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

/// Rejection sampling on `D_n(u)`: replicas are examined in index order
/// until `target` of them satisfy the event or `cap` have been tried.
pub fn gluing_trials(
    lattice: LatticeSpec,
    p: f64,
    n: i64,
    u: i64,
    target: u64,
    cap: u64,
    master_seed: u64,
) -> Result<GluingTally> {
    require_planar(&lattice)?;
    check_p(p)?;
    let carrier = Carrier::box_closure(lattice, dn_carrier_radius(n, u))?;
    let mut tally = GluingTally { n, u, ..Default::default() };
    const BATCH: u64 = 4096;
    let mut start = 0u64;
    while tally.accepted < target && start < cap {
        let end = (start + BATCH).min(cap);
        let batch: Vec<GluingDetail> = (start..end)
            .into_par_iter()
            .map(|i| {
                let cfg = Config::sample(Arc::clone(&carrier), p, derive_stream(master_seed, i))?;
                gluing_detail(&cfg, n, u)
            })
            .collect::<Result<_>>()?;
        for d in batch {
            tally.tried += 1;
            if d.outcome == GluingOutcome::NotApplicable {
                continue;
            }
            tally.accepted += 1;
            tally.union_failures += (d.vn_union > d.largest) as u64;
            match d.outcome {
                GluingOutcome::Holds => tally.holds += 1,
                _ => {
                    tally.violated += 1;
                    tally.cluster_failures += (!d.same_cluster) as u64;
                    tally.sum_failures += (d.vn_sum > d.largest) as u64;
                }
            }
            if tally.accepted == target {
                break;
            }
        }
        start = end;
    }
    tally.reached_target = tally.accepted >= target;
    Ok(tally)
}

/// `P̂(D_n(u))` over plain replicas.
pub fn dn_probability(lattice: LatticeSpec, p: f64, n: i64, u: i64, samples: u64, master_seed: u64) -> Result<Estimate> {
    require_planar(&lattice)?;
    let carrier = Carrier::box_closure(lattice, dn_carrier_radius(n, u))?;
    let hits = map_replicas(&carrier, p, samples, master_seed, |c| dn_event(c, n, u))?;
    Ok(Estimate::proportion(hits.iter().filter(|&&b| b).count() as u64, samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerTail {
    pub n: u64,
    pub u: u64,
    pub threshold: f64,
    pub estimate: Estimate,
    /// `exp(-(2 C11 + C13) u²)`.
    pub implied_bound: f64,
    /// `estimate >= implied_bound - 3σ`.
    pub consistent: bool,
}

/// `P̂(|C_n^{(1)}| >= (C12/2) n² π̂(n/u))` against the bound implied by the
/// fitted `C11`, `C13`.
#[allow(clippy::too_many_arguments)]
pub fn lower_tail_estimate(
    lattice: LatticeSpec,
    p: f64,
    n: u64,
    u: u64,
    samples: u64,
    pi: &dyn ArmProbability,
    c11: f64,
    c12: f64,
    c13: f64,
    master_seed: u64,
) -> Result<LowerTail> {
    require_planar(&lattice)?;
    if !(2 <= u && u <= n) {
        return Err(Error::InvalidParameter(format!("need integer u in [2, n], got u={u}, n={n}")));
    }
    if !(c11.is_finite() && c12.is_finite() && c13.is_finite()) {
        return Err(Error::MissingConstant("finite fitted C11, C12, C13".into()));
    }
    let threshold = c12 / 2.0 * (n * n) as f64 * pi.pi_or_err(scale_ratio(n, u as f64))?;
    let carrier = Carrier::box_closure(lattice, n as i64)?;
    let sizes = map_replicas(&carrier, p, samples, master_seed, |c| largest_cluster_in_box(c, n as i64))?;
    let estimate = crate::estimators::fraction_at_least(&sizes, threshold);
    let implied_bound = (-(2.0 * c11 + c13) * (u * u) as f64).exp();
    let consistent = estimate.point >= implied_bound - 3.0 * estimate.stderr;
    Ok(LowerTail { n, u, threshold, estimate, implied_bound, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> LatticeSpec {
        LatticeSpec::triangular()
    }

    fn uniform(r: i64, open: bool) -> Config {
        Config::uniform(Carrier::box_closure(tri(), r).unwrap(), open)
    }

    #[test]
    fn rsw_trivial() {
        let f = estimate_rsw_constant(tri(), 1.0, 4, 10, 1).unwrap();
        assert_eq!((f.estimate.point, f.c11_fit), (1.0, 0.0));
        let f = estimate_rsw_constant(tri(), 0.0, 4, 10, 1).unwrap();
        assert!(f.c11_fit.is_infinite() && f.warning.is_some());
        assert!(estimate_rsw_constant(LatticeSpec::bond(3).unwrap(), 0.5, 4, 10, 1).is_err());
    }

    #[test]
    fn catalog_parsing() {
        let e = EventSpec::from_json(r#"{"kind":"arm","m":1,"n":4}"#).unwrap();
        assert_eq!(e, EventSpec::Arm { m: 1, n: 4 });
        let e = EventSpec::from_json(r#"{"kind":"horizontal_crossing","rect":{"rect":{"corner":[0,0],"width":3,"height":2}}}"#);
        assert!(e.is_ok());
        assert!(matches!(EventSpec::from_json(r#"{"kind":"no_crossing","m":1}"#), Err(Error::NotIncreasing(_))));
        assert!(matches!(EventSpec::from_json(r#"{"kind":"arm","m":1,"n":4,"negate":true}"#), Err(Error::NotIncreasing(_))));
    }

    #[test]
    fn fkg_identities() {
        let a = EventSpec::Arm { m: 1, n: 4 };
        let r = fkg_check(tri(), 0.5, &a, &a, 2000, 3).unwrap();
        assert_eq!(r.joint, r.p_a);
        assert!(r.joint >= r.product && r.z >= 0.0);
        let r = fkg_check(tri(), 1.0, &a, &a, 50, 3).unwrap();
        assert_eq!(r.z, 0.0);
    }

    #[test]
    fn fkg_statistics_independent_cells() {
        // exact product structure: joint = product
        let r = fkg_statistics(25, 25, 25, 25);
        assert!(r.z.abs() < 1e-12 && (r.joint - r.product).abs() < 1e-15);
        let r = fkg_statistics(50, 0, 0, 50);
        assert!(r.z > 0.0);
    }

    #[test]
    fn dn_trivial() {
        let r = dn_carrier_radius(8, 2);
        assert!(dn_event(&uniform(r, true), 8, 2).unwrap());
        assert!(!dn_event(&uniform(r, false), 8, 2).unwrap());
        assert!(dn_event(&uniform(r, true), 8, 1).is_err());
        assert!(dn_event(&uniform(4, true), 8, 2).is_err());
        assert_eq!(dn_rectangles(8, 2).len(), 25);
    }

    #[test]
    fn dn_single_block() {
        let r = dn_carrier_radius(8, 2);
        let mut cfg = uniform(r, true);
        // cut the horizontal crossing of the rectangle at corner (0, 0)
        for y in 0..=8 {
            cfg.set_site(&Site::new(vec![2, y]), false).unwrap();
        }
        assert!(!dn_event(&cfg, 8, 2).unwrap());
    }

    #[test]
    fn gluing_trivial() {
        let r = dn_carrier_radius(8, 2);
        // the nine boxes Λ_4(4v) overlap: 9 · 81 > 17²
        let d = gluing_detail(&uniform(r, true), 8, 2).unwrap();
        assert_eq!((d.outcome, d.same_cluster, d.vn_sum, d.vn_union, d.largest), (GluingOutcome::Violated, true, 729, 289, 289));
        assert_eq!(gluing_check(&uniform(r, false), 8, 2).unwrap(), GluingOutcome::NotApplicable);
    }

    #[test]
    fn vn_lower_trivial() {
        let one = crate::arm::ConstantPi(1.0);
        let rep = vn_lower_constants(tri(), 1.0, 4, 5, &one, 0.0, &[0.5, 4.0], 1).unwrap();
        assert_eq!(rep.mean.point, 81.0);
        assert!(rep.rows.iter().all(|r| r.estimate.point == 1.0 && r.c13_fit == 0.0));
        let rep = vn_lower_constants(tri(), 0.0, 4, 5, &one, 0.0, &[0.1], 1).unwrap();
        assert!(rep.rows[0].c13_fit.is_infinite());
    }

    #[test]
    fn lower_tail_trivial() {
        let one = crate::arm::ConstantPi(1.0);
        let t = lower_tail_estimate(tri(), 1.0, 8, 2, 5, &one, 0.1, 0.5, 0.2, 1).unwrap();
        assert_eq!(t.estimate.point, 1.0);
        assert!(t.consistent);
        assert!(lower_tail_estimate(tri(), 1.0, 8, 2, 5, &one, f64::INFINITY, 0.5, 0.2, 1).is_err());
    }
}
