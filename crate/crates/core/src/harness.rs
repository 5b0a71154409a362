//! Experiment specs and the drivers behind each CLI subcommand.
//!
//! A spec is a TOML file:
//!
//! ```toml
//! master_seed = 7
//! lattice = { kind = "triangular_site", d = 2 }
//! p = 0.5
//! sizes = [8, 16]
//! u_grid = [1.0, 2.0]
//! k_grid = [1, 2, 3]
//! samples = 1000
//! workers = 1
//! output_dir = "out"
//! pi_pairs = [[1, 8], [2, 16]]   # optional; default (1, n) for n in sizes
//!
//! [bounds]                       # optional
//! alpha = 0.1041666
//! constants = { C2 = 1.0 }
//! k_max = 10000
//!
//! [verify]                       # optional
//! sample_scale = 1.0
//! criteria = []                  # empty: all
//! ```
//!
//! Outputs are `<subcommand>-<hash16>.csv` / `.json` where the hash is the
//! SHA-256 of the canonical spec with `workers` and `output_dir` cleared,
//! so the same experiment lands in the same file whatever the pool size.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arm::{scale_ratio, PowerLaw};
use crate::blob::{
    blob_boundaries, blobs, check_radius_bound, count_upper_bound, for_each_shell_site, grow_tree, prob_upper_bound,
    Death,
};
use crate::bounds::{bound_report, BoundParams};
use crate::cluster::horizontal_crossing;
use crate::error::{Error, Result};
use crate::estimators::{
    binomial_moment, build_pi_table, fraction_at_least, largest_cluster_sizes, map_replicas, tail_threshold, vn_sizes,
    PiTable,
};
use crate::lattice::{LatticeSpec, Region, Site};
use crate::lower::{estimate_rsw_constant, gluing_trials, lower_tail_estimate, vn_lower_constants, C12_GRID};
use crate::sampler::{derive_stream, Carrier};
use crate::stats::Estimate;
use crate::verify::{run_criterion, CriterionResult, VerifyOptions, CRITERIA};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a CSV schema changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub d: Option<u32>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
}

fn default_alpha() -> f64 {
    5.0 / 48.0
}

fn default_k_max() -> u64 {
    10_000
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { alpha: default_alpha(), d: None, constants: BTreeMap::from([("C2".into(), 1.0)]), k_max: default_k_max() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "one")]
    pub sample_scale: f64,
    #[serde(default)]
    pub criteria: Vec<u32>,
}

fn one() -> f64 {
    1.0
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { sample_scale: 1.0, criteria: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub master_seed: u64,
    pub lattice: LatticeSpec,
    pub p: f64,
    pub sizes: Vec<u64>,
    #[serde(default)]
    pub u_grid: Vec<f64>,
    #[serde(default)]
    pub k_grid: Vec<u64>,
    pub samples: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub pi_pairs: Vec<(u64, u64)>,
    #[serde(default)]
    pub bounds: Option<BoundsSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

fn default_workers() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

const MAX_SIZE: u64 = 4096;
const MAX_WORKERS: usize = 1024;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

impl ExperimentSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(s).map_err(|e| invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate().map_err(|e| invalid(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if self.sizes.is_empty() {
            return Err(invalid("sizes must be nonempty"));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0 || n > MAX_SIZE) {
            return Err(invalid(format!("sizes must lie in [1, {MAX_SIZE}], got {n}")));
        }
        if let Some(&u) = self.u_grid.iter().find(|u| !(u.is_finite() && **u >= 1.0)) {
            return Err(invalid(format!("u_grid entries must be finite and >= 1, got {u}")));
        }
        if self.k_grid.contains(&0) {
            return Err(invalid("k_grid entries must be >= 1"));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be >= 1"));
        }
        if !(1..=MAX_WORKERS).contains(&self.workers) {
            return Err(invalid(format!("workers must lie in [1, {MAX_WORKERS}], got {}", self.workers)));
        }
        if let Some(&(m, n)) = self.pi_pairs.iter().find(|(m, n)| *m == 0 || m > n || *n > MAX_SIZE) {
            return Err(invalid(format!("pi_pairs need 1 <= m <= n <= {MAX_SIZE}, got ({m}, {n})")));
        }
        if let Some(b) = &self.bounds {
            self.bound_params_from(b)?;
            if b.k_max < 2 {
                return Err(invalid("bounds.k_max must be >= 2"));
            }
        }
        if let Some(v) = &self.verify {
            if !(v.sample_scale > 0.0 && v.sample_scale <= 100.0) {
                return Err(invalid(format!("verify.sample_scale must lie in (0, 100], got {}", v.sample_scale)));
            }
            if let Some(id) = v.criteria.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
                return Err(invalid(format!("unknown criterion {id}")));
            }
        }
        Ok(())
    }

    fn bound_params_from(&self, b: &BoundsSection) -> Result<BoundParams> {
        let d = b.d.unwrap_or(self.lattice.d as u32);
        let mut params = BoundParams::new(d, b.alpha).map_err(|e| invalid(e.to_string()))?;
        for (k, &v) in &b.constants {
            params = params.with(k, v).map_err(|e| invalid(e.to_string()))?;
        }
        Ok(params)
    }

    pub fn bound_params(&self) -> Result<BoundParams> {
        self.bound_params_from(&self.bounds.clone().unwrap_or_default())
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring pool size and
    /// output location.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.workers = 0;
        canon.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canon).expect("spec serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn arm_pairs(&self) -> Vec<(u64, u64)> {
        if self.pi_pairs.is_empty() {
            let mut s = self.sizes.clone();
            s.sort_unstable();
            s.dedup();
            s.into_iter().map(|n| (1, n)).collect()
        } else {
            self.pi_pairs.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

/// One result table: CSV header and rows plus a JSON mirror with any extra
/// detail.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub extra: Value,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), extra: Value::Null }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, spec_hash: &str) -> Result<String> {
        let mut buf = Vec::new();
        writeln!(buf, "# spec_hash={spec_hash},version={TOOL_VERSION},schema={SCHEMA_VERSION}")?;
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self, spec_hash: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> =
                    self.header.iter().zip(r).map(|(h, v)| (h.clone(), cell(v))).collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "spec_hash": spec_hash,
            "version": TOOL_VERSION,
            "schema": SCHEMA_VERSION,
            "table": self.name,
            "rows": rows,
            "detail": self.extra,
        })
    }
}

/// Numbers stay numbers in the JSON mirror.
fn cell(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return json!(i);
    }
    if let Ok(x) = s.parse::<f64>() {
        if x.is_finite() {
            return json!(x);
        }
    }
    match s {
        "true" => json!(true),
        "false" => json!(false),
        _ => json!(s),
    }
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

/// Writes each table as `<name>-<hash16>.{csv,json}`; returns the paths.
pub fn write_tables(dir: &Path, spec_hash: &str, tables: &[Table], format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let short = &spec_hash[..16.min(spec_hash.len())];
    let mut out = Vec::new();
    for t in tables {
        if matches!(format, Format::Csv | Format::Both) {
            let path = dir.join(format!("{}-{short}.csv", t.name));
            fs::write(&path, t.to_csv(spec_hash)?)?;
            out.push(path);
        }
        if matches!(format, Format::Json | Format::Both) {
            let path = dir.join(format!("{}-{short}.json", t.name));
            let mut text = serde_json::to_string_pretty(&t.to_json(spec_hash))?;
            text.push('\n');
            fs::write(&path, text)?;
            out.push(path);
        }
    }
    Ok(out)
}

fn estimate_cells(e: &Estimate) -> Vec<String> {
    vec![e.samples.to_string(), e.successes.to_string(), f(e.point), f(e.stderr)]
}

/// `π̂(m, n)` for every requested pair.
pub fn run_pi(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    let table = build_pi_table(spec.lattice, spec.p, &spec.arm_pairs(), spec.samples, spec.master_seed)?;
    let mut t = Table::new("pi", &["lattice", "p", "m", "n", "samples", "successes", "estimate", "stderr"]);
    for r in table.sorted() {
        t.push(vec![r.lattice, f(r.p), r.m.to_string(), r.n.to_string(), r.samples.to_string(), r.successes.to_string(), f(r.estimate), f(r.stderr)]);
    }
    Ok(vec![t])
}

fn tail_pi_table(spec: &ExperimentSpec) -> Result<PiTable> {
    let mut pairs: Vec<(u64, u64)> = spec
        .sizes
        .iter()
        .flat_map(|&n| spec.u_grid.iter().map(move |&u| (1, scale_ratio(n, u))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    build_pi_table(spec.lattice, spec.p, &pairs, spec.samples, derive_stream(spec.master_seed, 0))
}

/// Tails of `|C_n^{(1)}|` and `|V_n|` over the `u` grid, and binomial
/// moments of `|V_n|` over the `k` grid.
pub fn run_tail(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    if spec.u_grid.is_empty() && spec.k_grid.is_empty() {
        return Err(invalid("tail needs a nonempty u_grid or k_grid"));
    }
    let pi = tail_pi_table(spec)?;
    let mut tail = Table::new("tail", &["statistic", "n", "u", "threshold", "samples", "successes", "estimate", "stderr"]);
    let mut moments = Table::new("moments", &["n", "k", "samples", "estimate", "stderr"]);
    for (i, &n) in spec.sizes.iter().enumerate() {
        let largest = largest_cluster_sizes(spec.lattice, spec.p, n, spec.samples, derive_stream(spec.master_seed, 1 + 2 * i as u64))?;
        let vn = vn_sizes(spec.lattice, spec.p, n, spec.samples, derive_stream(spec.master_seed, 2 + 2 * i as u64))?;
        for &u in &spec.u_grid {
            let t = tail_threshold(n, spec.lattice.d, u, &pi)?;
            for (name, values) in [("largest_cluster", &largest), ("long_arm_set", &vn)] {
                let mut row = vec![name.to_string(), n.to_string(), f(u), f(t)];
                row.extend(estimate_cells(&fraction_at_least(values, t)));
                tail.push(row);
            }
        }
        for &k in &spec.k_grid {
            let m = binomial_moment(&vn, k);
            moments.push(vec![n.to_string(), k.to_string(), m.samples.to_string(), f(m.point), f(m.stderr)]);
        }
    }
    tail.extra = json!({ "pi": pi.sorted() });
    let mut out = Vec::new();
    if !spec.u_grid.is_empty() {
        out.push(tail);
    }
    if !spec.k_grid.is_empty() {
        out.push(moments);
    }
    Ok(out)
}

/// Horizontal crossings of the self-dual rectangle at each size: `(n+1) × n`
/// for bond `Z²`, the `n × n`-site rhombus for the triangular lattice.
pub fn run_crossing(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    if spec.lattice.d != 2 {
        return Err(invalid("crossing needs a planar lattice"));
    }
    let mut t = Table::new("crossing", &["lattice", "n", "width", "height", "samples", "successes", "estimate", "stderr"]);
    for (i, &n) in spec.sizes.iter().enumerate() {
        let n = n as i64;
        let (w, h) = if spec.lattice.is_site_mode() { (n - 1, n - 1) } else { (n + 1, n) };
        let rect = Region::rect(Site::new(vec![0, 0]), w, h)?;
        let carrier = Carrier::from_region(spec.lattice, &rect)?;
        let hits = map_replicas(&carrier, spec.p, spec.samples, derive_stream(spec.master_seed, i as u64), |c| {
            horizontal_crossing(c, &rect)
        })?;
        let e = Estimate::proportion(hits.iter().filter(|&&b| b).count() as u64, spec.samples);
        let mut row = vec![spec.lattice.name(), n.to_string(), w.to_string(), h.to_string()];
        row.extend(estimate_cells(&e));
        t.push(row);
    }
    Ok(vec![t])
}

/// Series bounds, constant fits and `C7` sweeps at the largest size.
pub fn run_bounds(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    let params = spec.bound_params()?;
    let n = *spec.sizes.iter().max().expect("validated nonempty");
    let u_grid: Vec<f64> = spec.u_grid.iter().copied().filter(|&u| u <= n as f64).collect();
    if u_grid.is_empty() {
        return Err(invalid("bounds needs u_grid entries in [1, max size]"));
    }
    let k_max = spec.bounds.as_ref().map_or(default_k_max(), |b| b.k_max);
    let rep = bound_report(&params, n, &u_grid, k_max)?;
    let mut t = Table::new("bounds", &["n", "u", "first", "second", "total", "last_k", "comparator"]);
    for s in &rep.series {
        t.push(vec![n.to_string(), f(s.u), f(s.first), f(s.second), f(s.total), s.last_k.to_string(), s.comparator.map(f).unwrap_or_default()]);
    }
    t.extra = serde_json::to_value(&rep)?;
    Ok(vec![t])
}

/// Gluing trials, fitted lower-tail constants and the direct lower-tail
/// estimate for each `n` and each integer `u >= 2` on the grid.
pub fn run_lower(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    if spec.lattice.d != 2 {
        return Err(invalid("lower needs a planar lattice"));
    }
    let mut t = Table::new(
        "lower",
        &[
            "n", "u", "tried", "accepted", "holds", "violated", "c11", "c12", "c13", "threshold", "samples", "successes",
            "estimate", "stderr", "implied_bound", "consistent",
        ],
    );
    let mut detail = Vec::new();
    let us: Vec<u64> = spec.u_grid.iter().filter(|u| u.fract() == 0.0 && **u >= 2.0).map(|&u| u as u64).collect();
    if us.is_empty() {
        return Err(invalid("lower needs integer u >= 2 in u_grid"));
    }
    for (i, &n) in spec.sizes.iter().enumerate() {
        let base = derive_stream(spec.master_seed, i as u64);
        for (j, &u) in us.iter().filter(|&&u| u <= n).enumerate() {
            let np = n / u;
            let seed = |k: u64| derive_stream(base, 8 * j as u64 + k);
            let mut pairs = vec![(1, np), (1, scale_ratio(n, u as f64)), (1, 3 * np)];
            pairs.sort_unstable();
            pairs.dedup();
            let pi = build_pi_table(spec.lattice, spec.p, &pairs, spec.samples, seed(0))?;
            let rsw = estimate_rsw_constant(spec.lattice, spec.p, np, spec.samples, seed(1))?;
            let se = pi.get(1, 3 * np).map_or(0.0, |r| r.stderr);
            let vn = vn_lower_constants(spec.lattice, spec.p, np, spec.samples, &pi, se, &C12_GRID, seed(2))?;
            let glue = gluing_trials(spec.lattice, spec.p, n as i64, u as i64, spec.samples, 10 * spec.samples, seed(3))?;
            let row = vn.rows.iter().rev().find(|r| r.c13_fit.is_finite());
            let tail = match row {
                Some(r) if rsw.c11_fit.is_finite() => Some(lower_tail_estimate(
                    spec.lattice, spec.p, n, u, spec.samples, &pi, rsw.c11_fit, r.c12, r.c13_fit, seed(4),
                )?),
                _ => None,
            };
            let mut cells = vec![
                n.to_string(),
                u.to_string(),
                glue.tried.to_string(),
                glue.accepted.to_string(),
                glue.holds.to_string(),
                glue.violated.to_string(),
                f(rsw.c11_fit),
                row.map_or(String::new(), |r| f(r.c12)),
                row.map_or(String::new(), |r| f(r.c13_fit)),
            ];
            match &tail {
                Some(lt) => {
                    cells.push(f(lt.threshold));
                    cells.extend(estimate_cells(&lt.estimate));
                    cells.push(f(lt.implied_bound));
                    cells.push(lt.consistent.to_string());
                }
                None => cells.extend(std::iter::repeat_n(String::new(), 7)),
            }
            t.push(cells);
            detail.push(json!({ "n": n, "u": u, "gluing": glue, "rsw": rsw, "vn_lower": vn, "lower_tail": tail }));
        }
    }
    t.extra = json!(detail);
    Ok(vec![t])
}

/// Blob table, radius checks and the counting bounds for a point set.
/// Arm probabilities come from the power law `n^{-alpha}` of `params`.
pub fn blob_report(points: &[Site], n: i64, params: &BoundParams) -> Result<(Table, Value)> {
    let record = grow_tree(points)?;
    let bl = blobs(&record, n)?;
    let mut t = Table::new("blob", &["index", "members", "b2", "d2", "death", "shell_sites", "inner_boundary", "outer_boundary"]);
    let mut blob_json = Vec::new();
    for (i, b) in bl.iter().enumerate() {
        let mut shell = 0u64;
        for_each_shell_site(b, n, |_| shell += 1)?;
        let (ib, ob) = blob_boundaries(b, n)?;
        let death = match b.death {
            Death::Merged(r2) => r2.to_string(),
            Death::Root => "root".into(),
        };
        t.push(vec![
            i.to_string(),
            b.members.len().to_string(),
            b.b2.to_string(),
            b.d2().to_string(),
            death,
            shell.to_string(),
            ib.len().to_string(),
            ob.len().to_string(),
        ]);
        blob_json.push(json!({ "members": b.members, "b2": b.b2, "death": b.death, "shell_sites": shell }));
    }
    let radii = record.radii2();
    let pi = PowerLaw { amplitude: 1.0, alpha: params.alpha };
    let c = |name: &str| params.get(name).unwrap_or(1.0);
    let report = json!({
        "record": record,
        "blobs": blob_json,
        "radius_check": check_radius_bound(&record, n)?,
        "bounds": {
            "prob_upper_bound": prob_upper_bound(&radii, n as u64, &pi, c("C3"))?,
            "count_upper_bound": count_upper_bound(&radii, n as u64, c("C4"), params.d)?,
            "pi_model": { "amplitude": pi.amplitude, "alpha": pi.alpha },
            "C3": c("C3"),
            "C4": c("C4"),
        },
    });
    t.extra = report.clone();
    Ok((t, report))
}

/// Parses `[[x, y], ...]`.
pub fn parse_points(s: &str) -> Result<Vec<Site>> {
    let raw: Vec<Vec<i64>> = serde_json::from_str(s).map_err(|e| invalid(format!("points: {e}")))?;
    if raw.is_empty() {
        return Err(invalid("points must be nonempty"));
    }
    Ok(raw.into_iter().map(Site::new).collect())
}

/// Hash for outputs that have no spec file: SHA-256 of the given bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn verify_options(spec: &ExperimentSpec) -> (VerifyOptions, Vec<u32>) {
    let v = spec.verify.clone().unwrap_or_default();
    let ids = if v.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { v.criteria };
    (VerifyOptions { master_seed: spec.master_seed, sample_scale: v.sample_scale }, ids)
}

/// Runs the acceptance criteria; `on_result` sees each one as it finishes.
pub fn run_verify(spec: &ExperimentSpec, mut on_result: impl FnMut(&CriterionResult)) -> Result<(Vec<Table>, bool)> {
    let (opts, ids) = verify_options(spec);
    let mut t = Table::new("verify", &["id", "name", "passed", "summary"]);
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &opts)?;
        on_result(&r);
        t.push(vec![r.id.to_string(), r.name.clone(), r.passed.to_string(), r.summary.clone()]);
        results.push(r);
    }
    let all = results.iter().all(|r| r.passed);
    t.extra = json!({ "options": opts, "results": results });
    Ok((vec![t], all))
}

/// Runs `f` inside a dedicated pool of `workers` threads.
pub fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
master_seed = 3
lattice = { kind = "triangular_site", d = 2 }
p = 0.5
sizes = [4]
samples = 200
"#;

    #[test]
    fn minimal_spec_defaults() {
        let s = ExperimentSpec::from_toml(MINIMAL).unwrap();
        assert_eq!(s.workers, 1);
        assert_eq!(s.output_dir, PathBuf::from("out"));
        assert_eq!(s.arm_pairs(), vec![(1, 4)]);
    }

    #[test]
    fn round_trip() {
        let mut s = ExperimentSpec::from_toml(MINIMAL).unwrap();
        s.u_grid = vec![1.0, 1.5, 2.0 / 3.0 + 1.0];
        s.k_grid = vec![1, 4];
        s.pi_pairs = vec![(1, 4), (2, 4)];
        s.bounds = Some(BoundsSection::default());
        s.verify = Some(VerifySection { sample_scale: 0.25, criteria: vec![5, 14] });
        let back = ExperimentSpec::from_toml(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("p = 0.5", "p = 1.5"),
            ("sizes = [4]", "sizes = []"),
            ("samples = 200", "samples = 0"),
            ("d = 2 }", "d = 3 }"),
            ("samples = 200", "samples = 200\nbogus = 1"),
        ] {
            let e = ExperimentSpec::from_toml(&MINIMAL.replace(from, to)).unwrap_err();
            assert_eq!(e.kind(), "invalid_spec", "{to}");
        }
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let a = ExperimentSpec::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.workers = 8;
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.master_seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn pi_table_output() {
        let s = ExperimentSpec::from_toml(MINIMAL).unwrap();
        let t = run_pi(&s).unwrap();
        assert_eq!(t[0].rows.len(), 1);
        let csv = t[0].to_csv(&s.hash()).unwrap();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with(&format!("# spec_hash={}", s.hash())));
        assert_eq!(lines.next().unwrap(), "lattice,p,m,n,samples,successes,estimate,stderr");
        let back = PiTable::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.len(), 1);
        let j = t[0].to_json(&s.hash());
        assert_eq!(j["rows"][0]["m"], json!(1));
        assert_eq!(j["rows"][0]["samples"], json!(200));
    }

    #[test]
    fn blob_report_small() {
        let pts = parse_points("[[0,0],[4,0],[4,3]]").unwrap();
        let params = BoundParams::new(2, 5.0 / 48.0).unwrap();
        let (t, j) = blob_report(&pts, 5, &params).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(j["record"]["edges"].as_array().unwrap().len(), 2);
        assert!(parse_points("[]").is_err());
        assert!(parse_points("nope").is_err());
    }

    #[test]
    fn cell_types() {
        assert_eq!(cell("3"), json!(3));
        assert_eq!(cell("0.5"), json!(0.5));
        assert_eq!(cell("inf"), json!("inf"));
        assert_eq!(cell("true"), json!(true));
        assert_eq!(cell("z2_bond"), json!("z2_bond"));
    }
}
