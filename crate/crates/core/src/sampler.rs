//! Seeded sampling of i.i.d. site or bond configurations.
//!
//! Elements (carrier sites in site mode, carrier edges in bond mode) are
//! visited in lexicographic order; bond edges are ordered by their lower
//! endpoint, then by the position of their offset in
//! [`LatticeSpec::forward_offsets`]. Each element consumes randomness from a
//! ChaCha8 stream seeded with `seed_from_u64(seed)`:
//!
//! * `p == 0.5`: element `k` is open iff bit `k % 64` of the `k / 64`-th
//!   `u64` output is set;
//! * otherwise element `k` draws one `u64`, keeps the top 53 bits as a
//!   uniform `x ∈ [0, 1)`, and is open iff `x < p`.
//!
//! Both rules are platform independent, so a `(lattice, carrier, p, seed)`
//! tuple pins the configuration bit for bit.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::lattice::{for_each_in_bounds, Grid, LatticeSpec, Region, Site};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` under `master`:
/// `mix64(mix64(master) + γ·(index + 1))` with the SplitMix64 finaliser and
/// γ = 0x9E3779B97F4A7C15. Injective in `index` for a fixed master.
pub fn derive_stream(master_seed: u64, replica_index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(GOLDEN_GAMMA.wrapping_mul(replica_index.wrapping_add(1))))
}

/// Shape descriptor of a carrier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierShape {
    /// `Λ_R ∪ ∂Λ_R` around the origin.
    BoxClosure { radius: i64 },
    Explicit(Region),
}

/// The finite set of sites (and the edges between them) that a
/// configuration assigns states to. Shared between replicas.
#[derive(Debug)]
pub struct Carrier {
    lattice: LatticeSpec,
    shape: CarrierShape,
    grid: Grid,
    mask: BitSet,
    offsets: Vec<Vec<i64>>,
    /// element number -> state bit
    elements: Vec<u32>,
    state_len: usize,
}

impl Carrier {
    /// `Λ_R ∪ ∂Λ_R`, the carrier on which `V_{R/2}` and arm events to `∂Λ_R`
    /// are defined.
    pub fn box_closure(lattice: LatticeSpec, radius: i64) -> Result<Arc<Self>> {
        lattice.validate()?;
        if radius < 0 {
            return Err(Error::InvalidParameter(format!("carrier radius must be >= 0, got {radius}")));
        }
        let d = lattice.d;
        let grid = Grid::centered(d, radius + 1);
        let offsets = lattice.neighbor_offsets();
        let in_box = |c: &[i64]| c.iter().all(|x| x.abs() <= radius);
        let mut mask = BitSet::new(grid.len());
        let mut probe = vec![0; d];
        for_each_in_bounds(&vec![-radius - 1; d], &vec![radius + 1; d], |c| {
            let inside = in_box(c)
                || offsets.iter().any(|o| {
                    for k in 0..d {
                        probe[k] = c[k] + o[k];
                    }
                    in_box(&probe)
                });
            if inside {
                mask.insert(grid.index_of(c).expect("on grid"));
            }
        });
        Ok(Arc::new(Self::finish(lattice, CarrierShape::BoxClosure { radius }, grid, mask)))
    }

    pub fn from_region(lattice: LatticeSpec, region: &Region) -> Result<Arc<Self>> {
        lattice.validate()?;
        if region.dim() != lattice.d {
            return Err(Error::DimensionMismatch { expected: lattice.d, got: region.dim() });
        }
        let (lo, hi) = region
            .bounds()
            .ok_or_else(|| Error::InvalidParameter("carrier region is empty".into()))?;
        let grid = Grid::new(lo, &hi);
        let mut mask = BitSet::new(grid.len());
        match region {
            Region::Set { sites, .. } => {
                for s in sites {
                    mask.insert(grid.index(s).expect("inside bounds"));
                }
            }
            _ => (0..grid.len()).for_each(|i| mask.insert(i)),
        }
        Ok(Arc::new(Self::finish(lattice, CarrierShape::Explicit(region.clone()), grid, mask)))
    }

    fn finish(lattice: LatticeSpec, shape: CarrierShape, grid: Grid, mask: BitSet) -> Self {
        let offsets = lattice.forward_offsets();
        let mut elements = Vec::new();
        let state_len;
        if lattice.is_site_mode() {
            state_len = grid.len();
            elements.extend(mask.iter_ones().map(|i| i as u32));
        } else {
            let nf = offsets.len();
            state_len = grid.len() * nf;
            for i in mask.iter_ones() {
                let c = grid.coords(i);
                for (a, o) in offsets.iter().enumerate() {
                    if let Some(j) = grid.step(i, &c, o) {
                        if mask.get(j) {
                            elements.push((i * nf + a) as u32);
                        }
                    }
                }
            }
        }
        Self { lattice, shape, grid, mask, offsets, elements, state_len }
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn shape(&self) -> &CarrierShape {
        &self.shape
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Carrier membership over grid indices.
    pub fn mask(&self) -> &BitSet {
        &self.mask
    }

    pub fn forward_offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    /// Number of random elements (sites or edges).
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_sites(&self) -> usize {
        self.mask.count_ones()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.grid.index(s).is_some_and(|i| self.mask.get(i))
    }

    /// Carrier sites as a region (materialised; use for tests and dumps).
    pub fn region(&self) -> Region {
        match &self.shape {
            CarrierShape::Explicit(r) => r.clone(),
            CarrierShape::BoxClosure { .. } => Region::Set {
                d: self.lattice.d,
                sites: self.mask.iter_ones().map(|i| self.grid.site(i)).collect(),
            },
        }
    }

    /// Grid mask for `region`, failing if any site lies outside the carrier.
    pub fn mask_of(&self, region: &Region) -> Result<BitSet> {
        if region.dim() != self.lattice.d {
            return Err(Error::DimensionMismatch { expected: self.lattice.d, got: region.dim() });
        }
        let mut out = BitSet::new(self.grid.len());
        let mut escape = None;
        let mut visit = |c: &[i64]| match self.grid.index_of(c) {
            Some(i) if self.mask.get(i) => out.insert(i),
            _ => {
                if escape.is_none() {
                    escape = Some(c.to_vec());
                }
            }
        };
        match region {
            Region::Set { sites, .. } => sites.iter().for_each(|s| visit(s.coords())),
            _ => {
                if let Some((lo, hi)) = region.bounds() {
                    for_each_in_bounds(&lo, &hi, &mut visit);
                }
            }
        }
        match escape {
            Some(c) => Err(Error::OutsideCarrier(format!("site {} not in carrier", Site::new(c)))),
            None => Ok(out),
        }
    }

    /// Mask of `Λ_r(center)`; errors if the carrier does not cover it.
    pub fn box_mask(&self, center: &Site, r: i64) -> Result<BitSet> {
        self.mask_of(&Region::Box { center: center.clone(), radius: r })
    }
}

/// One sampled configuration.
#[derive(Clone, Debug)]
pub struct Config {
    carrier: Arc<Carrier>,
    p: f64,
    seed: u64,
    states: BitSet,
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl Config {
    pub fn sample(carrier: Arc<Carrier>, p: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        let mut states = BitSet::new(carrier.state_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if p == 1.0 {
            carrier.elements.iter().for_each(|&e| states.insert(e as usize));
        } else if p == 0.5 {
            for chunk in carrier.elements.chunks(64) {
                let mut w = rng.next_u64();
                for &e in chunk {
                    if w & 1 == 1 {
                        states.insert(e as usize);
                    }
                    w >>= 1;
                }
            }
        } else if p > 0.0 {
            const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
            for &e in &carrier.elements {
                let x = (rng.next_u64() >> 11) as f64 * SCALE;
                if x < p {
                    states.insert(e as usize);
                }
            }
        }
        Ok(Self { carrier, p, seed, states })
    }

    /// Every element set to `open`.
    pub fn uniform(carrier: Arc<Carrier>, open: bool) -> Self {
        let mut states = BitSet::new(carrier.state_len);
        if open {
            carrier.elements.iter().for_each(|&e| states.insert(e as usize));
        }
        Self { carrier, p: if open { 1.0 } else { 0.0 }, seed: 0, states }
    }

    /// Build from an explicit list of element states in element order.
    pub fn from_element_states(carrier: Arc<Carrier>, open: &[bool]) -> Result<Self> {
        if open.len() != carrier.num_elements() {
            return Err(Error::InvalidParameter(format!(
                "expected {} element states, got {}",
                carrier.num_elements(),
                open.len()
            )));
        }
        let mut states = BitSet::new(carrier.state_len);
        for (&e, &o) in carrier.elements.iter().zip(open) {
            if o {
                states.insert(e as usize);
            }
        }
        Ok(Self { carrier, p: f64::NAN, seed: 0, states })
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.carrier.lattice
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn states(&self) -> &BitSet {
        &self.states
    }

    /// State of element `k` (element order as documented above).
    pub fn element(&self, k: usize) -> bool {
        self.states.get(self.carrier.elements[k] as usize)
    }

    pub fn set_element(&mut self, k: usize, open: bool) {
        let e = self.carrier.elements[k] as usize;
        self.states.set(e, open);
    }

    pub fn open_elements(&self) -> usize {
        self.states.count_ones()
    }

    #[inline]
    pub(crate) fn site_open_idx(&self, idx: usize) -> bool {
        self.states.get(idx)
    }

    #[inline]
    pub(crate) fn edge_open_idx(&self, idx: usize, dir: usize) -> bool {
        self.states.get(idx * self.carrier.offsets.len() + dir)
    }

    /// Site state (site mode); `None` outside the carrier or in bond mode.
    pub fn site_open(&self, s: &Site) -> Option<bool> {
        if !self.lattice().is_site_mode() {
            return None;
        }
        let i = self.carrier.grid.index(s)?;
        self.carrier.mask.get(i).then(|| self.states.get(i))
    }

    /// State of the edge `{u, v}` (bond mode); `None` if it is not a carrier edge.
    pub fn edge_open(&self, u: &Site, v: &Site) -> Option<bool> {
        if self.lattice().is_site_mode() {
            return None;
        }
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let delta: Vec<i64> = hi.coords().iter().zip(lo.coords()).map(|(a, b)| a - b).collect();
        let dir = self.carrier.offsets.iter().position(|o| *o == delta)?;
        let i = self.carrier.grid.index(lo)?;
        let j = self.carrier.grid.index(hi)?;
        (self.carrier.mask.get(i) && self.carrier.mask.get(j)).then(|| self.edge_open_idx(i, dir))
    }

    pub fn set_site(&mut self, s: &Site, open: bool) -> Result<()> {
        let i = self
            .carrier
            .grid
            .index(s)
            .filter(|&i| self.carrier.mask.get(i) && self.lattice().is_site_mode())
            .ok_or_else(|| Error::OutsideCarrier(format!("site {s}")))?;
        self.states.set(i, open);
        Ok(())
    }

    /// Mirror image through the diagonal (d = 2). The transposed
    /// configuration keeps `p` and `seed` as provenance only.
    pub fn transposed(&self) -> Result<Config> {
        let lat = self.lattice();
        if lat.d != 2 {
            return Err(Error::InvalidLattice("transpose needs d = 2".into()));
        }
        let carrier = match &self.carrier.shape {
            CarrierShape::BoxClosure { radius } => Carrier::box_closure(lat, *radius)?,
            CarrierShape::Explicit(r) => Carrier::from_region(lat, &r.transposed())?,
        };
        let mut states = BitSet::new(carrier.state_len);
        let src = &self.carrier;
        let nf = src.offsets.len();
        for b in self.states.iter_ones() {
            if lat.is_site_mode() {
                let s = src.grid.site(b).transposed();
                states.insert(carrier.grid.index(&s).expect("transposed carrier"));
            } else {
                let (i, dir) = (b / nf, b % nf);
                let s = src.grid.site(i).transposed();
                let tdir = match dir {
                    0 => 1,
                    1 => 0,
                    other => other,
                };
                states.insert(carrier.grid.index(&s).expect("transposed carrier") * nf + tdir);
            }
        }
        Ok(Config { carrier, p: self.p, seed: self.seed, states })
    }

    pub fn dump(&self) -> ConfigDump {
        let open: BitSet = {
            let mut b = BitSet::new(self.carrier.num_elements());
            for k in 0..self.carrier.num_elements() {
                if self.element(k) {
                    b.insert(k);
                }
            }
            b
        };
        ConfigDump {
            lattice: self.lattice(),
            region: self.carrier.shape.clone(),
            p: self.p,
            seed: self.seed,
            elements: self.carrier.num_elements(),
            states: open.to_hex(),
        }
    }

    pub fn from_dump(dump: &ConfigDump) -> Result<Self> {
        let carrier = match &dump.region {
            CarrierShape::BoxClosure { radius } => Carrier::box_closure(dump.lattice, *radius)?,
            CarrierShape::Explicit(r) => Carrier::from_region(dump.lattice, r)?,
        };
        let bits = BitSet::from_hex(&dump.states, carrier.num_elements())
            .ok_or_else(|| Error::InvalidParameter("state bit array does not match carrier".into()))?;
        let open: Vec<bool> = (0..carrier.num_elements()).map(|k| bits.get(k)).collect();
        let mut c = Config::from_element_states(carrier, &open)?;
        c.p = dump.p;
        c.seed = dump.seed;
        Ok(c)
    }
}

/// Debug dump: states are the element-ordered bit array, hex encoded
/// little-endian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigDump {
    pub lattice: LatticeSpec,
    pub region: CarrierShape,
    pub p: f64,
    pub seed: u64,
    pub elements: usize,
    pub states: String,
}

/// Sample over an arbitrary carrier region.
pub fn sample_config(lattice: LatticeSpec, region: &Region, p: f64, seed: u64) -> Result<Config> {
    check_p(p)?;
    Config::sample(Carrier::from_region(lattice, region)?, p, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::box_sites;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand_chacha::rand_core::RngCore;

    #[test]
    fn degenerate_p() {
        let c = Carrier::box_closure(LatticeSpec::triangular(), 3).unwrap();
        let all = Config::sample(c.clone(), 1.0, 7).unwrap();
        assert_eq!(all.open_elements(), c.num_elements());
        let none = Config::sample(c.clone(), 0.0, 7).unwrap();
        assert_eq!(none.open_elements(), 0);
        assert!(Config::sample(c, 1.5, 7).is_err());
    }

    #[test]
    fn box_closure_sizes() {
        // Λ_2 ∪ ∂Λ_2: 25 + 20 (square) / 25 + 22 (triangular)
        assert_eq!(Carrier::box_closure(LatticeSpec::z2_bond(), 2).unwrap().num_sites(), 45);
        assert_eq!(Carrier::box_closure(LatticeSpec::triangular(), 2).unwrap().num_sites(), 47);
    }

    #[test]
    fn bond_edges_have_both_endpoints_in_carrier() {
        let r = box_sites(&Site::origin(2), 1).unwrap();
        let c = Carrier::from_region(LatticeSpec::z2_bond(), &r).unwrap();
        // 3×3 grid: 2·3·2 = 12 edges
        assert_eq!(c.num_elements(), 12);
        let c3 = Carrier::from_region(LatticeSpec::bond(3).unwrap(), &box_sites(&Site::origin(3), 1).unwrap()).unwrap();
        assert_eq!(c3.num_elements(), 3 * 2 * 9);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        for p in [0.5, 0.3] {
            let c = Carrier::box_closure(LatticeSpec::z2_bond(), 6).unwrap();
            let a = Config::sample(c.clone(), p, 42).unwrap();
            let b = Config::sample(c.clone(), p, 42).unwrap();
            let other = Config::sample(c, p, 43).unwrap();
            assert_eq!(a.states(), b.states());
            assert_ne!(a.states(), other.states());
        }
    }

    #[test]
    fn first_draws_are_pinned() {
        // freeze the documented consumption rule
        let c = Carrier::from_region(LatticeSpec::triangular(), &box_sites(&Site::origin(2), 1).unwrap()).unwrap();
        let cfg = Config::sample(c.clone(), 0.5, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = rng.next_u64();
        for k in 0..9 {
            assert_eq!(cfg.element(k), (w >> k) & 1 == 1);
        }
        let cfg = Config::sample(c, 0.25, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..9 {
            let x = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            assert_eq!(cfg.element(k), x < 0.25);
        }
    }

    #[test]
    fn half_open_fraction_binomial() {
        let c = Carrier::box_closure(LatticeSpec::triangular(), 2).unwrap();
        let n_el = c.num_elements() as f64;
        let replicas = 100_000u64;
        let open: usize = (0..replicas)
            .map(|i| Config::sample(c.clone(), 0.5, derive_stream(11, i)).unwrap().open_elements())
            .sum();
        let total = n_el * replicas as f64;
        let mean = open as f64 / total;
        let sigma = (0.25 / total).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn derive_stream_injective_small_range() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(derive_stream(12345, i)));
        }
        assert_eq!(derive_stream(9, 0), derive_stream(9, 0));
        // pinned value guards against accidental changes of the rule
        assert_eq!(derive_stream(0, 0), mix64(mix64(0).wrapping_add(GOLDEN_GAMMA)));
    }

    #[test]
    fn streams_of_different_masters_uncorrelated() {
        let mut a = ChaCha8Rng::seed_from_u64(derive_stream(1, 0));
        let mut b = ChaCha8Rng::seed_from_u64(derive_stream(2, 0));
        let n = 1_000_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = (a.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let y = (b.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - sa * sb / nf / nf;
        let corr = cov / ((saa / nf - (sa / nf).powi(2)) * (sbb / nf - (sb / nf).powi(2))).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");
    }

    #[test]
    fn dump_round_trip() {
        let c = Carrier::box_closure(LatticeSpec::z2_bond(), 3).unwrap();
        let cfg = Config::sample(c, 0.5, 5).unwrap();
        let json = serde_json::to_string(&cfg.dump()).unwrap();
        let back: ConfigDump = serde_json::from_str(&json).unwrap();
        let cfg2 = Config::from_dump(&back).unwrap();
        assert_eq!(cfg.states(), cfg2.states());
        assert_eq!(cfg2.seed(), 5);
    }

    #[test]
    fn transpose_is_an_involution() {
        for lat in [LatticeSpec::z2_bond(), LatticeSpec::triangular()] {
            let c = Carrier::box_closure(lat, 4).unwrap();
            let cfg = Config::sample(c, 0.5, 3).unwrap();
            let tt = cfg.transposed().unwrap().transposed().unwrap();
            assert_eq!(cfg.states(), tt.states());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn open_fraction_in_binomial_band(p in 0.05f64..0.95, seed in any::<u64>()) {
            let c = Carrier::box_closure(LatticeSpec::z2_bond(), 20).unwrap();
            let cfg = Config::sample(c.clone(), p, seed).unwrap();
            let n = c.num_elements() as f64;
            let frac = cfg.open_elements() as f64 / n;
            let sigma = (p * (1.0 - p) / n).sqrt();
            prop_assert!((frac - p).abs() < 5.0 * sigma);
        }
    }
}
