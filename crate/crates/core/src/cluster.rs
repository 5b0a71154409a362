//! Connectivity on a sampled configuration: cluster labels, largest
//! clusters, the long-arm set `V_n`, arm events and rectangle crossings.
//!
//! Site mode: a path needs every vertex open, endpoints included. Bond
//! mode: every edge open; every vertex of the region participates, so
//! isolated vertices are clusters of size 1.
//!
//! Arm and long-arm queries may be answered on any region that contains
//! `Λ_n ∪ ∂Λ_n`: a path from inside `Λ_n` that reaches `∂Λ_n` has a prefix
//! ending at its first boundary visit, and that prefix stays in the closure.

use std::collections::VecDeque;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::lattice::{Grid, Region, Site};
use crate::sampler::{Carrier, Config};
use crate::union_find::DisjointSets;

pub const NO_LABEL: u32 = u32::MAX;

/// Cluster partition of the participating sites of a region.
#[derive(Clone, Debug)]
pub struct ClusterLabels {
    grid: Grid,
    labels: Vec<u32>,
    sizes: Vec<u64>,
    sorted: Vec<u64>,
}

impl ClusterLabels {
    /// Label of `s`; labels are numbered by first appearance in
    /// lexicographic site order.
    pub fn label(&self, s: &Site) -> Option<u32> {
        let i = self.grid.index(s)?;
        (self.labels[i] != NO_LABEL).then_some(self.labels[i])
    }

    pub(crate) fn label_idx(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn size_of(&self, label: u32) -> u64 {
        self.sizes[label as usize]
    }

    /// Cluster sizes, nonincreasing.
    pub fn sorted_sizes(&self) -> &[u64] {
        &self.sorted
    }

    pub fn largest(&self) -> u64 {
        self.sorted.first().copied().unwrap_or(0)
    }

    pub fn participating(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Members of every cluster, in lexicographic order.
    pub fn clusters(&self) -> Vec<Vec<Site>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l != NO_LABEL {
                out[l as usize].push(self.grid.site(i));
            }
        }
        out
    }
}

/// Size of the `i`-th largest cluster (1-based), 0 when there are fewer
/// than `i` clusters.
pub fn ith_largest_size(labels: &ClusterLabels, i: usize) -> Result<u64> {
    if i == 0 {
        return Err(Error::InvalidParameter("cluster rank starts at 1".into()));
    }
    Ok(labels.sorted.get(i - 1).copied().unwrap_or(0))
}

#[inline]
fn participates(cfg: &Config, site_mode: bool, i: usize) -> bool {
    !site_mode || cfg.site_open_idx(i)
}

fn forest(cfg: &Config, mask: &BitSet) -> DisjointSets {
    let carrier = cfg.carrier();
    let grid = carrier.grid();
    let offsets = carrier.forward_offsets();
    let site_mode = cfg.lattice().is_site_mode();
    let mut ds = DisjointSets::new(grid.len());
    let mut c = vec![0i64; grid.dim()];
    for i in mask.iter_ones() {
        if !participates(cfg, site_mode, i) {
            continue;
        }
        grid.coords_into(i, &mut c);
        for (a, o) in offsets.iter().enumerate() {
            let Some(j) = grid.step(i, &c, o) else { continue };
            if !mask.get(j) {
                continue;
            }
            let joined = if site_mode { cfg.site_open_idx(j) } else { cfg.edge_open_idx(i, a) };
            if joined {
                ds.union(i as u32, j as u32);
            }
        }
    }
    ds
}

pub(crate) fn label_mask(cfg: &Config, mask: &BitSet) -> ClusterLabels {
    let grid = cfg.carrier().grid().clone();
    let site_mode = cfg.lattice().is_site_mode();
    let mut ds = forest(cfg, mask);
    let mut labels = vec![NO_LABEL; grid.len()];
    let mut root_label = vec![NO_LABEL; grid.len()];
    let mut sizes: Vec<u64> = Vec::new();
    for i in mask.iter_ones() {
        if !participates(cfg, site_mode, i) {
            continue;
        }
        let r = ds.find(i as u32) as usize;
        if root_label[r] == NO_LABEL {
            root_label[r] = sizes.len() as u32;
            sizes.push(0);
        }
        let l = root_label[r];
        labels[i] = l;
        sizes[l as usize] += 1;
    }
    let mut sorted = sizes.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    ClusterLabels { grid, labels, sizes, sorted }
}

/// Two sites share a label iff an open path inside `region` joins them.
pub fn label_clusters(config: &Config, region: &Region) -> Result<ClusterLabels> {
    let mask = config.carrier().mask_of(region)?;
    Ok(label_mask(config, &mask))
}

/// `|C_n^{(1)}|`: largest open cluster of `Λ_n`, paths inside `Λ_n`.
pub fn largest_cluster_in_box(config: &Config, n: i64) -> Result<u64> {
    let mask = config.carrier().box_mask(&Site::origin(config.lattice().d), n)?;
    Ok(label_mask(config, &mask).largest())
}

/// Grid indices of `∂Λ_r(center)` under the lattice adjacency.
pub(crate) fn boundary_indices(carrier: &Carrier, center: &Site, r: i64) -> Result<Vec<usize>> {
    let grid = carrier.grid();
    let d = grid.dim();
    let offsets = carrier.lattice().neighbor_offsets();
    let cc = center.coords();
    let in_box = |c: &[i64]| c.iter().zip(cc).all(|(x, y)| (x - y).abs() <= r);
    let lo: Vec<i64> = cc.iter().map(|x| x - r - 1).collect();
    let hi: Vec<i64> = cc.iter().map(|x| x + r + 1).collect();
    let mut out = Vec::new();
    let mut probe = vec![0; d];
    let mut escape = None;
    crate::lattice::for_each_in_bounds(&lo, &hi, |c| {
        if in_box(c) {
            return;
        }
        let adjacent = offsets.iter().any(|o| {
            for k in 0..d {
                probe[k] = c[k] + o[k];
            }
            in_box(&probe)
        });
        if adjacent {
            match grid.index_of(c).filter(|&i| carrier.mask().get(i)) {
                Some(i) => out.push(i),
                None => escape = Some(c.to_vec()),
            }
        }
    });
    match escape {
        Some(c) => Err(Error::OutsideCarrier(format!(
            "boundary site {} of Λ_{r}({center}) not in carrier",
            Site::new(c)
        ))),
        None => Ok(out),
    }
}

/// Mask of `Λ_r(center) ∪ ∂Λ_r(center)`.
pub(crate) fn closure_mask(carrier: &Carrier, center: &Site, r: i64) -> Result<BitSet> {
    let mut m = carrier.box_mask(center, r)?;
    for i in boundary_indices(carrier, center, r)? {
        m.insert(i);
    }
    Ok(m)
}

/// Sites of `Λ_n` joined to `∂Λ_{2n}` inside `Λ_{2n} ∪ ∂Λ_{2n}`.
pub fn long_arm_set(config: &Config, n: i64) -> Result<Region> {
    let (labels, marked) = long_arm_labels(config, &Site::origin(config.lattice().d), n)?;
    let grid = config.carrier().grid();
    let inner = config.carrier().box_mask(&Site::origin(config.lattice().d), n)?;
    let sites = inner
        .iter_ones()
        .filter(|&i| {
            let l = labels.label_idx(i);
            l != NO_LABEL && marked[l as usize]
        })
        .map(|i| grid.site(i));
    Region::from_sites(config.lattice().d, sites)
}

fn long_arm_labels(config: &Config, center: &Site, n: i64) -> Result<(ClusterLabels, Vec<bool>)> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!("scale must be >= 0, got {n}")));
    }
    let carrier = config.carrier();
    let mask = closure_mask(carrier, center, 2 * n)?;
    let labels = label_mask(config, &mask);
    let mut marked = vec![false; labels.num_clusters()];
    for i in boundary_indices(carrier, center, 2 * n)? {
        let l = labels.label_idx(i);
        if l != NO_LABEL {
            marked[l as usize] = true;
        }
    }
    Ok((labels, marked))
}

/// `|V_n|`.
pub fn long_arm_size(config: &Config, n: i64) -> Result<u64> {
    long_arm_size_at(config, &Site::origin(config.lattice().d), n)
}

/// `|V_n(center)|` with `V_n(v) = {w ∈ Λ_n(v) : w ↔ ∂Λ_{2n}(v)}`.
pub fn long_arm_size_at(config: &Config, center: &Site, n: i64) -> Result<u64> {
    let (labels, marked) = long_arm_labels(config, center, n)?;
    let inner = config.carrier().box_mask(center, n)?;
    Ok(inner
        .iter_ones()
        .filter(|&i| {
            let l = labels.label_idx(i);
            l != NO_LABEL && marked[l as usize]
        })
        .count() as u64)
}

/// Grid indices of `V_n(center)`.
pub(crate) fn long_arm_indices(config: &Config, center: &Site, n: i64) -> Result<Vec<usize>> {
    let (labels, marked) = long_arm_labels(config, center, n)?;
    let inner = config.carrier().box_mask(center, n)?;
    Ok(inner
        .iter_ones()
        .filter(|&i| {
            let l = labels.label_idx(i);
            l != NO_LABEL && marked[l as usize]
        })
        .collect())
}

fn check_arm_scales(m: i64, n: i64) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::InvalidParameter(format!("arm scales need 1 <= m <= n, got m={m}, n={n}")));
    }
    Ok(())
}

/// `∂Λ_m ↔ ∂Λ_n` by an open path in `Λ_n ∪ ∂Λ_n`; `true` when `m = n`.
pub fn arm_event(config: &Config, m: i64, n: i64) -> Result<bool> {
    check_arm_scales(m, n)?;
    let carrier = config.carrier();
    let o = Site::origin(carrier.lattice().d);
    let allowed = closure_mask(carrier, &o, n)?;
    if m == n {
        return Ok(true);
    }
    let sources = boundary_indices(carrier, &o, m)?;
    let mut targets = BitSet::new(carrier.grid().len());
    for i in boundary_indices(carrier, &o, n)? {
        targets.insert(i);
    }
    Ok(search(config, &allowed, sources, &targets))
}

/// Many arm events on one configuration from a single labelling.
pub fn arm_events(config: &Config, pairs: &[(i64, i64)]) -> Result<Vec<bool>> {
    for &(m, n) in pairs {
        check_arm_scales(m, n)?;
    }
    let Some(nmax) = pairs.iter().map(|p| p.1).max() else {
        return Ok(Vec::new());
    };
    let carrier = config.carrier();
    let o = Site::origin(carrier.lattice().d);
    let labels = label_mask(config, &closure_mask(carrier, &o, nmax)?);
    let mut cache: std::collections::BTreeMap<i64, Vec<u32>> = Default::default();
    let mut boundary_labels = |r: i64| -> Result<Vec<u32>> {
        if let Some(v) = cache.get(&r) {
            return Ok(v.clone());
        }
        let mut ls: Vec<u32> = boundary_indices(carrier, &o, r)?
            .into_iter()
            .map(|i| labels.label_idx(i))
            .filter(|&l| l != NO_LABEL)
            .collect();
        ls.sort_unstable();
        ls.dedup();
        cache.insert(r, ls.clone());
        Ok(ls)
    };
    let mut out = Vec::with_capacity(pairs.len());
    for &(m, n) in pairs {
        if m == n {
            out.push(true);
            continue;
        }
        let a = boundary_labels(m)?;
        let b = boundary_labels(n)?;
        out.push(a.iter().any(|l| b.binary_search(l).is_ok()));
    }
    Ok(out)
}

/// Breadth-first search inside `allowed` from `sources` to `targets`.
fn search(config: &Config, allowed: &BitSet, sources: impl IntoIterator<Item = usize>, targets: &BitSet) -> bool {
    let carrier = config.carrier();
    let grid = carrier.grid();
    let site_mode = config.lattice().is_site_mode();
    let fwd = carrier.forward_offsets();
    let back: Vec<Vec<i64>> = fwd.iter().map(|o| o.iter().map(|x| -x).collect()).collect();
    let mut seen = BitSet::new(grid.len());
    let mut queue = VecDeque::new();
    for s in sources {
        if allowed.get(s) && participates(config, site_mode, s) && !seen.get(s) {
            if targets.get(s) {
                return true;
            }
            seen.insert(s);
            queue.push_back(s);
        }
    }
    let mut c = vec![0i64; grid.dim()];
    while let Some(i) = queue.pop_front() {
        grid.coords_into(i, &mut c);
        for (a, o) in fwd.iter().enumerate() {
            for (dir, forward) in [(o, true), (&back[a], false)] {
                let Some(j) = grid.step(i, &c, dir) else { continue };
                if seen.get(j) || !allowed.get(j) {
                    continue;
                }
                let ok = if site_mode {
                    config.site_open_idx(j)
                } else if forward {
                    config.edge_open_idx(i, a)
                } else {
                    config.edge_open_idx(j, a)
                };
                if ok {
                    if targets.get(j) {
                        return true;
                    }
                    seen.insert(j);
                    queue.push_back(j);
                }
            }
        }
    }
    false
}

/// `A ↔^S B`: some `a ∈ A`, `b ∈ B` joined by an open path inside `S`.
pub fn connected_in(config: &Config, s: &Region, a: &Region, b: &Region) -> Result<bool> {
    let carrier = config.carrier();
    let allowed = carrier.mask_of(s)?;
    let sources = carrier.mask_of(a)?;
    let targets = carrier.mask_of(b)?;
    Ok(search(config, &allowed, sources.iter_ones().collect::<Vec<_>>(), &targets))
}

fn rect_parts(region: &Region) -> Result<(i64, i64, i64, i64)> {
    match region {
        Region::Rect { corner, width, height } => Ok((corner.coords()[0], corner.coords()[1], *width, *height)),
        other => Err(Error::InvalidParameter(format!("expected a rectangle, got {other:?}"))),
    }
}

fn column_mask(carrier: &Carrier, x: i64, y0: i64, y1: i64) -> Result<BitSet> {
    carrier.mask_of(&Region::Rect { corner: Site::new(vec![x, y0]), width: 0, height: y1 - y0 })
}

fn row_mask(carrier: &Carrier, y: i64, x0: i64, x1: i64) -> Result<BitSet> {
    carrier.mask_of(&Region::Rect { corner: Site::new(vec![x0, y]), width: x1 - x0, height: 0 })
}

/// `H(B)`: left side `{x0} × [y0, y0+m]` joined to the right side inside `B`.
pub fn horizontal_crossing(config: &Config, rect: &Region) -> Result<bool> {
    let (x0, y0, w, h) = rect_parts(rect)?;
    let carrier = config.carrier();
    let allowed = carrier.mask_of(rect)?;
    let left = column_mask(carrier, x0, y0, y0 + h)?;
    let right = column_mask(carrier, x0 + w, y0, y0 + h)?;
    Ok(search(config, &allowed, left.iter_ones().collect::<Vec<_>>(), &right))
}

/// `V(B)`: bottom side joined to the top side inside `B`.
pub fn vertical_crossing(config: &Config, rect: &Region) -> Result<bool> {
    let (x0, y0, w, h) = rect_parts(rect)?;
    let carrier = config.carrier();
    let allowed = carrier.mask_of(rect)?;
    let bottom = row_mask(carrier, y0, x0, x0 + w)?;
    let top = row_mask(carrier, y0 + h, x0, x0 + w)?;
    Ok(search(config, &allowed, bottom.iter_ones().collect::<Vec<_>>(), &top))
}

/// Per-cluster inclusive bounding boxes, indexed by label.
pub(crate) fn cluster_bounds(labels: &ClusterLabels) -> Vec<(Vec<i64>, Vec<i64>)> {
    let d = labels.grid.dim();
    let mut out = vec![(vec![i64::MAX; d], vec![i64::MIN; d]); labels.num_clusters()];
    let mut c = vec![0i64; d];
    for (i, &l) in labels.labels.iter().enumerate() {
        if l == NO_LABEL {
            continue;
        }
        labels.grid.coords_into(i, &mut c);
        let (lo, hi) = &mut out[l as usize];
        for k in 0..d {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{box_sites, LatticeSpec};
    use crate::sampler::{derive_stream, Carrier};

    fn s(c: &[i64]) -> Site {
        Site::new(c.to_vec())
    }

    #[test]
    fn all_open_and_all_closed() {
        let tri = LatticeSpec::triangular();
        let c = Carrier::from_region(tri, &box_sites(&Site::origin(2), 2).unwrap()).unwrap();
        let open = Config::uniform(c.clone(), true);
        let l = label_clusters(&open, &box_sites(&Site::origin(2), 2).unwrap()).unwrap();
        assert_eq!(l.sorted_sizes(), &[25]);
        let closed = Config::uniform(c, false);
        let l = label_clusters(&closed, &box_sites(&Site::origin(2), 2).unwrap()).unwrap();
        assert_eq!(l.num_clusters(), 0);
        assert_eq!(ith_largest_size(&l, 1).unwrap(), 0);
    }

    #[test]
    fn bond_mode_singletons_count() {
        let c = Carrier::from_region(LatticeSpec::z2_bond(), &box_sites(&Site::origin(2), 1).unwrap()).unwrap();
        let closed = Config::uniform(c, false);
        let l = label_clusters(&closed, &box_sites(&Site::origin(2), 1).unwrap()).unwrap();
        assert_eq!(l.num_clusters(), 9);
        assert_eq!(l.participating(), 9);
    }

    #[test]
    fn hand_built_sizes() {
        // row of 7 sites on triangular lattice: open pattern 11111 0 1 ... build clusters {5,3,3,1}
        let region = Region::rect(s(&[0, 0]), 17, 0).unwrap();
        let c = Carrier::from_region(LatticeSpec::triangular(), &region).unwrap();
        let pattern = "111110111011101000";
        let open: Vec<bool> = pattern.chars().map(|ch| ch == '1').collect();
        let cfg = Config::from_element_states(c, &open).unwrap();
        let l = label_clusters(&cfg, &region).unwrap();
        assert_eq!(l.sorted_sizes(), &[5, 3, 3, 1]);
        assert_eq!(ith_largest_size(&l, 1).unwrap(), 5);
        assert_eq!(ith_largest_size(&l, 5).unwrap(), 0);
        assert!(ith_largest_size(&l, 0).is_err());
    }

    #[test]
    fn long_arm_all_open_all_closed() {
        for lat in [LatticeSpec::triangular(), LatticeSpec::z2_bond()] {
            let c = Carrier::box_closure(lat, 6).unwrap();
            let open = Config::uniform(c.clone(), true);
            assert_eq!(long_arm_size(&open, 3).unwrap(), 49);
            assert_eq!(long_arm_set(&open, 3).unwrap().len(), 49);
            let closed = Config::uniform(c, false);
            assert_eq!(long_arm_set(&closed, 3).unwrap().len(), 0);
            assert!(long_arm_size(&closed, 4).is_err());
        }
    }

    #[test]
    fn arm_conventions() {
        let c = Carrier::box_closure(LatticeSpec::triangular(), 5).unwrap();
        let closed = Config::uniform(c.clone(), false);
        assert!(arm_event(&closed, 3, 3).unwrap());
        assert!(!arm_event(&closed, 1, 5).unwrap());
        assert!(arm_event(&Config::uniform(c, true), 1, 5).unwrap());
        assert!(arm_event(&closed, 4, 3).is_err());
        assert!(arm_event(&closed, 1, 6).is_err());
    }

    #[test]
    fn arm_events_agree_with_single_queries() {
        for lat in [LatticeSpec::triangular(), LatticeSpec::z2_bond()] {
            let c = Carrier::box_closure(lat, 16).unwrap();
            let pairs: Vec<(i64, i64)> = vec![(1, 2), (1, 4), (2, 8), (1, 16), (4, 16), (8, 8)];
            for i in 0..200 {
                let cfg = Config::sample(c.clone(), 0.5, derive_stream(3, i)).unwrap();
                let many = arm_events(&cfg, &pairs).unwrap();
                for (k, &(m, n)) in pairs.iter().enumerate() {
                    assert_eq!(many[k], arm_event(&cfg, m, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn crossings_trivial_cases() {
        let rect = Region::rect(s(&[0, 0]), 6, 3).unwrap();
        for lat in [LatticeSpec::triangular(), LatticeSpec::z2_bond()] {
            let c = Carrier::from_region(lat, &rect).unwrap();
            assert!(horizontal_crossing(&Config::uniform(c.clone(), true), &rect).unwrap());
            assert!(vertical_crossing(&Config::uniform(c.clone(), true), &rect).unwrap());
            assert!(!horizontal_crossing(&Config::uniform(c.clone(), false), &rect).unwrap());
            assert!(!vertical_crossing(&Config::uniform(c, false), &rect).unwrap());
        }
        // single open row, site mode
        let c = Carrier::from_region(LatticeSpec::triangular(), &rect).unwrap();
        let mut cfg = Config::uniform(c, false);
        for x in 0..=6 {
            cfg.set_site(&s(&[x, 2]), true).unwrap();
        }
        assert!(horizontal_crossing(&cfg, &rect).unwrap());
        assert!(!vertical_crossing(&cfg, &rect).unwrap());
        assert!(horizontal_crossing(&cfg, &box_sites(&Site::origin(2), 1).unwrap()).is_err());
    }

    #[test]
    fn connected_in_cases() {
        let region = box_sites(&Site::origin(2), 3).unwrap();
        let c = Carrier::from_region(LatticeSpec::triangular(), &region).unwrap();
        let open = Config::uniform(c, true);
        let a = Region::from_sites(2, [s(&[0, 0]), s(&[1, 0])]).unwrap();
        let b = Region::from_sites(2, [s(&[1, 0]), s(&[3, 3])]).unwrap();
        assert!(connected_in(&open, &region, &a, &b).unwrap());
        // S excludes the column between A and B
        let left = Region::from_sites(2, [s(&[-3, 0])]).unwrap();
        let right = Region::from_sites(2, [s(&[3, 0])]).unwrap();
        let mut sites = region.to_set();
        sites.retain(|v| v.coords()[0] != 0);
        let cut = Region::Set { d: 2, sites };
        assert!(!connected_in(&open, &cut, &left, &right).unwrap());
    }
}
