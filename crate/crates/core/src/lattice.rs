//! Lattice geometry: sites, the two supported lattice kinds, boxes,
//! rectangles, outer vertex boundaries and the L∞ metric.
//!
//! The triangular lattice is embedded in Z² with the six neighbours
//! `(±1,0), (0,±1), (1,1), (-1,-1)`, so boxes are the usual square boxes
//! of that embedding and a single dense-grid code path serves both kinds.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice point; coordinates compare lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn offset(&self, delta: &[i64]) -> Site {
        Site(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, factor: i64) -> Site {
        Site(self.0.iter().map(|a| a * factor).collect())
    }

    /// Swap the first two coordinates.
    pub fn transposed(&self) -> Site {
        let mut c = self.0.clone();
        if c.len() >= 2 {
            c.swap(0, 1);
        }
        Site(c)
    }
}

impl<const N: usize> From<[i64; N]> for Site {
    fn from(c: [i64; N]) -> Self {
        Site(c.to_vec())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// Bond percolation on Z^d with nearest-neighbour edges.
    ZdBond,
    /// Site percolation on the triangular lattice (d = 2).
    TriangularSite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub d: usize,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidLattice(format!("dimension must be >= 2, got {d}")));
        }
        if kind == LatticeKind::TriangularSite && d != 2 {
            return Err(Error::InvalidLattice(format!(
                "triangular lattice is two-dimensional, got d = {d}"
            )));
        }
        Ok(Self { kind, d })
    }

    pub fn triangular() -> Self {
        Self { kind: LatticeKind::TriangularSite, d: 2 }
    }

    pub fn bond(d: usize) -> Result<Self> {
        Self::new(LatticeKind::ZdBond, d)
    }

    pub fn z2_bond() -> Self {
        Self { kind: LatticeKind::ZdBond, d: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.kind, self.d).map(|_| ())
    }

    pub fn is_site_mode(&self) -> bool {
        self.kind == LatticeKind::TriangularSite
    }

    /// One representative per undirected neighbour pair, each with a
    /// lexicographically positive offset. Bond edges are indexed by
    /// `(lower endpoint, position in this list)`.
    pub fn forward_offsets(&self) -> Vec<Vec<i64>> {
        match self.kind {
            LatticeKind::ZdBond => (0..self.d)
                .map(|axis| {
                    let mut e = vec![0; self.d];
                    e[axis] = 1;
                    e
                })
                .collect(),
            LatticeKind::TriangularSite => vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        }
    }

    pub fn neighbor_offsets(&self) -> Vec<Vec<i64>> {
        let fwd = self.forward_offsets();
        let mut all = fwd.clone();
        all.extend(fwd.iter().map(|o| o.iter().map(|x| -x).collect::<Vec<_>>()));
        all
    }

    pub fn name(&self) -> String {
        match self.kind {
            LatticeKind::ZdBond => format!("z{}_bond", self.d),
            LatticeKind::TriangularSite => "triangular_site".to_string(),
        }
    }

    /// Conventional critical point where it is known exactly.
    pub fn default_p(&self) -> Option<f64> {
        match (self.kind, self.d) {
            (LatticeKind::TriangularSite, _) | (LatticeKind::ZdBond, 2) => Some(0.5),
            _ => None,
        }
    }

    fn check_dim(&self, v: &Site) -> Result<()> {
        if v.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: v.dim() });
        }
        Ok(())
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LatticeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "triangular_site" || s == "triangular" {
            return Ok(Self::triangular());
        }
        let d = s
            .strip_prefix('z')
            .and_then(|r| r.strip_suffix("_bond"))
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidLattice(format!("unknown lattice name {s:?}")))?;
        Self::bond(d)
    }
}

/// A finite set of sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `{v : ||v - center||_∞ <= radius}`.
    Box { center: Site, radius: i64 },
    /// `corner + [0, width] × [0, height]` (d = 2).
    Rect { corner: Site, width: i64, height: i64 },
    Set { d: usize, sites: BTreeSet<Site> },
}

impl Region {
    pub fn from_sites(d: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let sites: BTreeSet<Site> = sites.into_iter().collect();
        if let Some(bad) = sites.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        Ok(Region::Set { d, sites })
    }

    pub fn rect(corner: Site, width: i64, height: i64) -> Result<Self> {
        if corner.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: corner.dim() });
        }
        if width < 0 || height < 0 {
            return Err(Error::InvalidParameter(format!(
                "rectangle sides must be nonnegative, got {width}×{height}"
            )));
        }
        Ok(Region::Rect { corner, width, height })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { center, .. } => center.dim(),
            Region::Rect { .. } => 2,
            Region::Set { d, .. } => *d,
        }
    }

    pub fn contains(&self, v: &Site) -> bool {
        if v.dim() != self.dim() {
            return false;
        }
        match self {
            Region::Box { center, radius } => {
                v.0.iter().zip(&center.0).all(|(a, c)| (a - c).abs() <= *radius)
            }
            Region::Rect { corner, width, height } => {
                let (x, y) = (v.0[0] - corner.0[0], v.0[1] - corner.0[1]);
                (0..=*width).contains(&x) && (0..=*height).contains(&y)
            }
            Region::Set { sites, .. } => sites.contains(v),
        }
    }

    /// Inclusive per-axis bounds, `None` for an empty region.
    pub fn bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        match self {
            Region::Box { center, radius } => Some((
                center.0.iter().map(|c| c - radius).collect(),
                center.0.iter().map(|c| c + radius).collect(),
            )),
            Region::Rect { corner, width, height } => Some((
                corner.0.clone(),
                vec![corner.0[0] + width, corner.0[1] + height],
            )),
            Region::Set { d, sites } => {
                let mut it = sites.iter();
                let first = it.next()?;
                let mut lo = first.0.clone();
                let mut hi = first.0.clone();
                for s in it {
                    for k in 0..*d {
                        lo[k] = lo[k].min(s.0[k]);
                        hi[k] = hi[k].max(s.0[k]);
                    }
                }
                Some((lo, hi))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Region::Box { center, radius } => ((2 * radius + 1) as usize).pow(center.dim() as u32),
            Region::Rect { width, height, .. } => ((width + 1) * (height + 1)) as usize,
            Region::Set { sites, .. } => sites.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All sites in lexicographic order.
    pub fn sites(&self) -> Vec<Site> {
        match self {
            Region::Set { sites, .. } => sites.iter().cloned().collect(),
            _ => {
                let (lo, hi) = self.bounds().expect("box and rect are nonempty");
                let mut out = Vec::with_capacity(self.len());
                for_each_in_bounds(&lo, &hi, |c| out.push(Site(c.to_vec())));
                out
            }
        }
    }

    pub fn to_set(&self) -> BTreeSet<Site> {
        match self {
            Region::Set { sites, .. } => sites.clone(),
            _ => self.sites().into_iter().collect(),
        }
    }

    pub fn translated(&self, delta: &Site) -> Region {
        match self {
            Region::Box { center, radius } => Region::Box { center: center.offset(&delta.0), radius: *radius },
            Region::Rect { corner, width, height } => Region::Rect {
                corner: corner.offset(&delta.0),
                width: *width,
                height: *height,
            },
            Region::Set { d, sites } => Region::Set {
                d: *d,
                sites: sites.iter().map(|s| s.offset(&delta.0)).collect(),
            },
        }
    }

    /// Mirror through the diagonal (swap the first two coordinates).
    pub fn transposed(&self) -> Region {
        match self {
            Region::Box { center, radius } => Region::Box { center: center.transposed(), radius: *radius },
            Region::Rect { corner, width, height } => Region::Rect {
                corner: corner.transposed(),
                width: *height,
                height: *width,
            },
            Region::Set { d, sites } => Region::Set {
                d: *d,
                sites: sites.iter().map(Site::transposed).collect(),
            },
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut s = self.to_set();
        s.extend(other.sites());
        Ok(Region::Set { d: self.dim(), sites: s })
    }

    /// Sites as a JSON array of integer arrays.
    pub fn to_json_sites(&self) -> serde_json::Value {
        serde_json::to_value(self.sites()).expect("sites serialize")
    }
}

/// Visit every integer point of the inclusive box `[lo, hi]` in lexicographic order.
pub(crate) fn for_each_in_bounds(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    let d = lo.len();
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}

pub fn box_sites(center: &Site, n: i64) -> Result<Region> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!("box radius must be >= 0, got {n}")));
    }
    if center.dim() < 2 {
        return Err(Error::InvalidLattice(format!("dimension must be >= 2, got {}", center.dim())));
    }
    Ok(Region::Box { center: center.clone(), radius: n })
}

pub fn neighbors(v: &Site, lattice: &LatticeSpec) -> Result<Region> {
    lattice.check_dim(v)?;
    Region::from_sites(lattice.d, lattice.neighbor_offsets().iter().map(|o| v.offset(o)))
}

pub fn linf_distance(u: &Site, v: &Site) -> Result<i64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: v.dim() });
    }
    Ok(u.0.iter().zip(&v.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0))
}

/// `∂A = {v ∉ A : v ~ u for some u ∈ A}` under the lattice adjacency.
pub fn outer_boundary(a: &Region, lattice: &LatticeSpec) -> Result<Region> {
    if a.dim() != lattice.d {
        return Err(Error::DimensionMismatch { expected: lattice.d, got: a.dim() });
    }
    Ok(boundary_with_offsets(a, &lattice.neighbor_offsets()))
}

/// Outer boundary under box adjacency (all `3^d - 1` L∞ unit neighbours),
/// which is how faces of L∞ balls are extracted.
pub fn outer_boundary_linf(a: &Region) -> Region {
    boundary_with_offsets(a, &linf_unit_offsets(a.dim()))
}

pub(crate) fn linf_unit_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_in_bounds(&vec![-1; d], &vec![1; d], |c| {
        if c.iter().any(|&x| x != 0) {
            out.push(c.to_vec());
        }
    });
    out
}

fn boundary_with_offsets(a: &Region, offsets: &[Vec<i64>]) -> Region {
    let d = a.dim();
    let mut out = BTreeSet::new();
    let contains = |s: &Site| a.contains(s);
    match a {
        Region::Box { .. } | Region::Rect { .. } => {
            // only the outer layer of the bounding box can have outside neighbours
            let (lo, hi) = a.bounds().expect("nonempty");
            let lo1: Vec<i64> = lo.iter().map(|x| x - 1).collect();
            let hi1: Vec<i64> = hi.iter().map(|x| x + 1).collect();
            for_each_in_bounds(&lo1, &hi1, |c| {
                let s = Site(c.to_vec());
                if !contains(&s) && offsets.iter().any(|o| contains(&s.offset(o))) {
                    out.insert(s);
                }
            });
        }
        Region::Set { sites, .. } => {
            for u in sites {
                for o in offsets {
                    let v = u.offset(o);
                    if !sites.contains(&v) {
                        out.insert(v);
                    }
                }
            }
        }
    }
    Region::Set { d, sites: out }
}

/// Dense row-major index over an axis-aligned box; the first coordinate is
/// most significant so index order coincides with lexicographic site order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    lo: Vec<i64>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(lo: Vec<i64>, hi: &[i64]) -> Self {
        let dims: Vec<usize> = lo.iter().zip(hi).map(|(l, h)| (h - l + 1).max(0) as usize).collect();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let len = dims.iter().product();
        Self { lo, dims, strides, len }
    }

    pub fn centered(d: usize, radius: i64) -> Self {
        Self::new(vec![-radius; d], &vec![radius; d])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    #[inline]
    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        if c.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0;
        for (k, &x) in c.iter().enumerate() {
            let off = x - self.lo[k];
            if off < 0 || off as usize >= self.dims[k] {
                return None;
            }
            idx += off as usize * self.strides[k];
        }
        Some(idx)
    }

    pub fn index(&self, s: &Site) -> Option<usize> {
        self.index_of(&s.0)
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut c = vec![0; self.dims.len()];
        self.coords_into(idx, &mut c);
        c
    }

    #[inline]
    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for ((o, lo), stride) in out.iter_mut().zip(&self.lo).zip(&self.strides) {
            *o = lo + (idx / stride) as i64;
            idx %= stride;
        }
    }

    pub fn site(&self, idx: usize) -> Site {
        Site(self.coords(idx))
    }

    /// Neighbour index for a coordinate offset, if it stays on the grid.
    #[inline]
    pub fn step(&self, idx: usize, coords: &[i64], offset: &[i64]) -> Option<usize> {
        let mut out = idx as isize;
        for k in 0..offset.len() {
            if offset[k] == 0 {
                continue;
            }
            let off = coords[k] - self.lo[k] + offset[k];
            if off < 0 || off as usize >= self.dims[k] {
                return None;
            }
            out += offset[k] as isize * self.strides[k] as isize;
        }
        Some(out as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[i64]) -> Site {
        Site::new(c.to_vec())
    }

    #[test]
    fn box_examples() {
        let b = box_sites(&Site::origin(2), 0).unwrap();
        assert_eq!(b.sites(), vec![s(&[0, 0])]);
        assert_eq!(box_sites(&Site::origin(2), 1).unwrap().sites().len(), 9);
        let b = box_sites(&s(&[3, 3]), 2).unwrap();
        let sites = b.sites();
        assert_eq!(sites.len(), 25);
        assert!(sites.iter().all(|v| v.coords().iter().all(|&c| (1..=5).contains(&c))));
        assert!(box_sites(&Site::origin(2), -1).is_err());
    }

    #[test]
    fn boundary_of_unit_box_in_z2() {
        let a = box_sites(&Site::origin(2), 1).unwrap();
        let b = outer_boundary(&a, &LatticeSpec::z2_bond()).unwrap();
        let mut expected = BTreeSet::new();
        for y in -1..=1 {
            expected.insert(s(&[2, y]));
            expected.insert(s(&[-2, y]));
            expected.insert(s(&[y, 2]));
            expected.insert(s(&[y, -2]));
        }
        assert_eq!(b.to_set(), expected);
    }

    #[test]
    fn boundary_of_point_triangular_is_its_six_neighbours() {
        let a = Region::from_sites(2, [s(&[0, 0])]).unwrap();
        let tri = LatticeSpec::triangular();
        let b = outer_boundary(&a, &tri).unwrap();
        assert_eq!(b.to_set(), neighbors(&s(&[0, 0]), &tri).unwrap().to_set());
        assert_eq!(b.len(), 6);
    }

    #[test]
    fn boundary_of_lambda2_matches_brute_force() {
        let a = box_sites(&Site::origin(2), 2).unwrap();
        let b = outer_boundary(&a, &LatticeSpec::z2_bond()).unwrap();
        // brute force: scan a large window
        let mut count = 0;
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                let v = s(&[x, y]);
                if a.contains(&v) {
                    continue;
                }
                let adj = [[1, 0], [-1, 0], [0, 1], [0, -1]]
                    .iter()
                    .any(|o| a.contains(&v.offset(o)));
                if adj {
                    count += 1;
                    assert!(b.contains(&v));
                }
            }
        }
        assert_eq!(count, 20);
        assert_eq!(b.len(), 20);
    }

    #[test]
    fn triangular_boundary_of_box_has_two_corners() {
        let a = box_sites(&Site::origin(2), 2).unwrap();
        let b = outer_boundary(&a, &LatticeSpec::triangular()).unwrap();
        assert_eq!(b.len(), 22);
        assert!(b.contains(&s(&[3, 3])) && b.contains(&s(&[-3, -3])));
        assert!(!b.contains(&s(&[3, -3])));
    }

    #[test]
    fn neighbor_examples() {
        let z2 = LatticeSpec::z2_bond();
        let n = neighbors(&s(&[0, 0]), &z2).unwrap().to_set();
        let expected: BTreeSet<_> = [s(&[1, 0]), s(&[-1, 0]), s(&[0, 1]), s(&[0, -1])].into();
        assert_eq!(n, expected);
        let t = neighbors(&s(&[0, 0]), &LatticeSpec::triangular()).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.contains(&s(&[1, 1])) && t.contains(&s(&[-1, -1])));
        let z3 = LatticeSpec::bond(3).unwrap();
        assert!(matches!(
            neighbors(&s(&[2, 5]), &z3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linf_examples() {
        assert_eq!(linf_distance(&s(&[0, 0]), &s(&[4, 3])).unwrap(), 4);
        assert_eq!(linf_distance(&s(&[1, 1]), &s(&[1, 1])).unwrap(), 0);
        assert_eq!(linf_distance(&s(&[-2, 5]), &s(&[3, 5])).unwrap(), 5);
        assert!(linf_distance(&s(&[0, 0]), &s(&[0, 0, 0])).is_err());
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeSpec::new(LatticeKind::TriangularSite, 3).is_err());
        assert!(LatticeSpec::new(LatticeKind::ZdBond, 1).is_err());
        assert_eq!("z3_bond".parse::<LatticeSpec>().unwrap(), LatticeSpec::bond(3).unwrap());
        assert_eq!("triangular_site".parse::<LatticeSpec>().unwrap(), LatticeSpec::triangular());
        assert!("hex".parse::<LatticeSpec>().is_err());
    }

    #[test]
    fn grid_index_is_lexicographic() {
        let g = Grid::new(vec![-1, -2], &[1, 2]);
        let sites = Region::Box { center: Site::origin(2), radius: 1 }.sites();
        let mut last = None;
        for v in sites {
            let i = g.index(&v).unwrap();
            assert_eq!(g.site(i), v);
            if let Some(l) = last {
                assert!(i > l);
            }
            last = Some(i);
        }
        assert_eq!(g.index(&s(&[2, 0])), None);
    }

    proptest! {
        #[test]
        fn box_cardinality(d in 2usize..4, n in 0i64..4, cx in -5i64..5) {
            let c = Site::new(vec![cx; d]);
            let b = box_sites(&c, n).unwrap();
            prop_assert_eq!(b.sites().len(), ((2 * n + 1) as usize).pow(d as u32));
        }

        #[test]
        fn boundary_disjoint_from_region(pts in prop::collection::btree_set((-4i64..4, -4i64..4), 1..12)) {
            let a = Region::from_sites(2, pts.iter().map(|&(x, y)| s(&[x, y]))).unwrap();
            for lat in [LatticeSpec::z2_bond(), LatticeSpec::triangular()] {
                let b = outer_boundary(&a, &lat).unwrap();
                for v in b.sites() {
                    prop_assert!(!a.contains(&v));
                }
            }
        }

        #[test]
        fn linf_is_a_metric(a in prop::array::uniform3(-50i64..50), b in prop::array::uniform3(-50i64..50), c in prop::array::uniform3(-50i64..50)) {
            let (a, b, c) = (Site::from(a), Site::from(b), Site::from(c));
            let ab = linf_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, linf_distance(&b, &a).unwrap());
            prop_assert!(ab <= linf_distance(&a, &c).unwrap() + linf_distance(&c, &b).unwrap());
            prop_assert_eq!(ab == 0, a == b);
        }

        #[test]
        fn neighbors_symmetric(x in -20i64..20, y in -20i64..20, tri in any::<bool>()) {
            let lat = if tri { LatticeSpec::triangular() } else { LatticeSpec::z2_bond() };
            let v = s(&[x, y]);
            for u in neighbors(&v, &lat).unwrap().sites() {
                prop_assert!(neighbors(&u, &lat).unwrap().contains(&v));
            }
        }
    }
}
