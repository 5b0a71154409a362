//! Closed-form bound evaluators and finite-sweep constant fits.
//!
//! Floating point is used only for exp/log evaluators; combinatorial
//! quantities are exact.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arm::{ceil_root, ArmProbability};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Supplied,
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

/// Dimension, exponent and the named constants `C1..C13`, `c1..c4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: u32,
    pub alpha: f64,
    #[serde(default)]
    pub constants: BTreeMap<String, Constant>,
}

const NAMES: [&str; 17] =
    ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12", "C13", "c1", "c2", "c3", "c4"];

impl BoundParams {
    pub fn new(d: u32, alpha: f64) -> Result<Self> {
        let p = BoundParams { d, alpha, constants: BTreeMap::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("d must be >= 2, got {}", self.d)));
        }
        if !(self.alpha > 0.0 && self.alpha < self.d as f64) {
            return Err(Error::InvalidParameter(format!("need 0 < alpha < d, got {}", self.alpha)));
        }
        for (k, c) in &self.constants {
            if !NAMES.contains(&k.as_str()) {
                return Err(Error::InvalidParameter(format!("unknown constant {k}")));
            }
            if !(c.value >= 0.0) {
                return Err(Error::InvalidParameter(format!("constant {k} must be nonnegative, got {}", c.value)));
            }
        }
        Ok(())
    }

    fn set(mut self, name: &str, value: f64, provenance: Provenance) -> Result<Self> {
        if !NAMES.contains(&name) {
            return Err(Error::InvalidParameter(format!("unknown constant {name}")));
        }
        if !(value >= 0.0) {
            return Err(Error::InvalidParameter(format!("constant {name} must be nonnegative, got {value}")));
        }
        self.constants.insert(name.to_string(), Constant { value, provenance });
        Ok(self)
    }

    pub fn with(self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value, Provenance::Supplied)
    }

    pub fn with_fitted(self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value, Provenance::Fitted)
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.constants.get(name).map(|c| c.value).ok_or_else(|| Error::MissingConstant(name.to_string()))
    }
}

/// `c1 exp(-c2 x)`.
pub fn bcks_bound(x: f64, params: &BoundParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("x must be >= 0, got {x}")));
    }
    Ok(params.get("c1")? * (-params.get("c2")? * x).exp())
}

/// `(c1 exp(-c2 u^d), c3 exp(-c4 u^d))`; the lower value exists for d = 2.
pub fn main_bounds(u: f64, params: &BoundParams) -> Result<(f64, f64)> {
    if !(u >= 1.0) {
        return Err(Error::InvalidParameter(format!("u must be >= 1, got {u}")));
    }
    if params.d != 2 {
        return Err(Error::InvalidParameter(format!("the lower bound is only defined for d = 2, got d = {}", params.d)));
    }
    let ud = u.powi(2);
    Ok((params.get("c1")? * (-params.get("c2")? * ud).exp(), params.get("c3")? * (-params.get("c4")? * ud).exp()))
}

/// Upper value only, any `d`.
pub fn main_upper_bound(u: f64, params: &BoundParams) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::InvalidParameter(format!("u must be >= 1, got {u}")));
    }
    Ok(params.get("c1")? * (-params.get("c2")? * u.powi(params.d as i32)).exp())
}

/// `(c1 n^d π(n/⌈k^{1/d}⌉) / k)^k`, the scale floored and clamped to 1.
pub fn moment_bound(n: u64, k: u64, pi: &dyn ArmProbability, params: &BoundParams) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("need n, k >= 1, got n={n}, k={k}")));
    }
    let scale = (n / ceil_root(k, params.d)).max(1);
    let base = params.get("c1")? * (n as f64).powi(params.d as i32) * pi.pi_or_err(scale)? / k as f64;
    Ok(base.powi(k as i32))
}

/// Smallest `C5` with `Σ_{k<=n} k^{d-1} π(k) <= C5 n^d π(n)` at this `n`.
pub fn sum_pi_bound(pi: &dyn ArmProbability, n: u64, d: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut s = 0.0;
    for k in 1..=n {
        s += (k as f64).powi(d as i32 - 1) * pi.pi_or_err(k)?;
    }
    let den = (n as f64).powi(d as i32) * pi.pi_or_err(n)?;
    if den == 0.0 {
        return Err(Error::InvalidParameter(format!("π({n}) = 0")));
    }
    Ok(s / den)
}

pub const SERIES_REL_TOL: f64 = 1e-16;
const SERIES_MAX_TERMS: u64 = 10_000_000;

/// Partial sums of `Σ_{k>=0} x^k / k!`, truncated once a term falls below
/// `1e-16` of the running sum past the peak.
pub fn exp_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0u64;
    loop {
        k += 1;
        term *= x / k as f64;
        sum += term;
        if k as f64 > x && term < SERIES_REL_TOL * sum {
            return sum;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    pub u: f64,
    /// `Σ_{k<=u^d/C2} (u^d/(C2 k))^k`, the `k = 0` term being 1.
    pub first: f64,
    /// `Σ_{k>u^d/C2} (u^d/k)^{(1-α/d)k}`.
    pub second: f64,
    pub total: f64,
    /// Index of the last term kept in the second sum.
    pub last_k: u64,
    /// `C9 exp(u^d/C2)` when `C9` is known.
    pub comparator: Option<f64>,
}

fn first_piece_term(k: u64, ud: f64, c2: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        (ud / (c2 * k as f64)).powf(k as f64)
    }
}

fn second_piece_term(k: u64, ud: f64, expo: f64) -> f64 {
    (ud / k as f64).powf(expo * k as f64)
}

/// The two-piece series bound on `E t^{|V_n|}`.
pub fn generating_fn_bound(u: f64, n: u64, params: &BoundParams) -> Result<SeriesBound> {
    params.validate()?;
    if !(u >= 1.0 && u <= n as f64) {
        return Err(Error::InvalidParameter(format!("need u in [1, n], got u={u}, n={n}")));
    }
    let c2 = params.get("C2")?;
    if c2 <= 0.0 {
        return Err(Error::InvalidParameter("C2 must be positive".into()));
    }
    let ud = u.powi(params.d as i32);
    let expo = 1.0 - params.alpha / params.d as f64;
    assert!(expo > 0.0, "second series diverges unless alpha < d");
    let split = (ud / c2).floor() as u64;
    let first: f64 = (0..=split).map(|k| first_piece_term(k, ud, c2)).sum();
    let mut second = 0.0;
    let mut k = split + 1;
    loop {
        let t = second_piece_term(k, ud, expo);
        second += t;
        let total = first + second;
        if (k as f64) > ud && t < SERIES_REL_TOL * total {
            break;
        }
        k += 1;
        if k > SERIES_MAX_TERMS {
            return Err(Error::InvalidParameter("series did not converge".into()));
        }
    }
    let total = first + second;
    let comparator = params.constants.get("C9").map(|c| c.value * (ud / c2).exp());
    Ok(SeriesBound { u, first, second, total, last_k: k, comparator })
}

/// Same sums as [`generating_fn_bound`], accumulated smallest term first
/// over a fixed range; used as an independent cross-check.
pub fn generating_fn_naive(u: f64, params: &BoundParams, last_k: u64) -> Result<(f64, f64)> {
    let c2 = params.get("C2")?;
    let ud = u.powi(params.d as i32);
    let expo = 1.0 - params.alpha / params.d as f64;
    let split = (ud / c2).floor() as u64;
    let first = (0..=split).rev().map(|k| first_piece_term(k, ud, c2)).fold(0.0, |a, t| a + t);
    let second = (split + 1..=last_k.max(split + 1)).rev().map(|k| second_piece_term(k, ud, expo)).fold(0.0, |a, t| a + t);
    Ok((first, second))
}

/// `C9` fitted as the largest ratio `total / exp(u^d/C2)` over the grid.
pub fn fit_c9(u_grid: &[f64], n: u64, params: &BoundParams) -> Result<f64> {
    let c2 = params.get("C2")?;
    let mut best: f64 = 0.0;
    for &u in u_grid {
        let b = generating_fn_bound(u, n, params)?;
        best = best.max(b.total / (u.powi(params.d as i32) / c2).exp());
    }
    Ok(best)
}

/// `Σ_{k>=0} ((t-1) C8 n^d π(n/k^{1/d}) / k)^k` with
/// `t = 1 + u^d/(C2 C8 n^d π(n/u))`, before the arm-probability bound is applied.
pub fn pi_level_series(u: f64, n: u64, params: &BoundParams, pi: &dyn ArmProbability) -> Result<f64> {
    let (c2, c8) = (params.get("C2")?, params.get("C8")?);
    let d = params.d;
    let nd = (n as f64).powi(d as i32);
    let pu = pi.pi_or_err(crate::arm::scale_ratio(n, u))?;
    let tm1 = u.powi(d as i32) / (c2 * c8 * nd * pu);
    let mut sum = 1.0;
    let mut k = 1u64;
    loop {
        let scale = ((n as f64 / (k as f64).powf(1.0 / d as f64)).floor() as u64).max(1);
        let t = (tm1 * c8 * nd * pi.pi_or_err(scale)? / k as f64).powf(k as f64);
        sum += t;
        if k as f64 > tm1 * c8 * nd && t < SERIES_REL_TOL * sum {
            return Ok(sum);
        }
        k += 1;
        if k > SERIES_MAX_TERMS {
            return Err(Error::InvalidParameter("series did not converge".into()));
        }
    }
}

/// `x_max = 1/(C2² C8)` and `C10 = ln(1 + x_max) / (x_max C2 C8)`.
pub fn fit_c10(params: &BoundParams) -> Result<f64> {
    let (c2, c8) = (params.get("C2")?, params.get("C8")?);
    let x = 1.0 / (c2 * c2 * c8);
    Ok((1.0 + x).ln() / (x * c2 * c8))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovCheck {
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
    pub log_ratio: f64,
}

/// Both sides of `t^{K n^d π(n/u)} >= exp(C10 K u^d)` in log form.
pub fn markov_threshold_bound(
    u: f64,
    n: u64,
    big_k: f64,
    params: &BoundParams,
    pi: &dyn ArmProbability,
) -> Result<MarkovCheck> {
    if !(u >= 1.0 && u <= n as f64) {
        return Err(Error::InvalidParameter(format!("need u in [1, n], got u={u}, n={n}")));
    }
    let (c2, c8, c10) = (params.get("C2")?, params.get("C8")?, params.get("C10")?);
    let ud = u.powi(params.d as i32);
    let npi = (n as f64).powi(params.d as i32) * pi.pi_or_err(crate::arm::scale_ratio(n, u))?;
    let x = ud / (c2 * c8 * npi);
    let log_lhs = big_k * npi * x.ln_1p();
    let log_rhs = c10 * big_k * ud;
    let log_ratio = log_lhs - log_rhs;
    Ok(MarkovCheck { log_lhs, log_rhs, ratio: log_ratio.exp(), log_ratio })
}

/// Parts `(2^d-1) 2^{d i}` for `i < j` and the remainder `m = k - 2^{dj}`,
/// `j = ⌊log_{2^d} k⌋`; they sum to `k - 1`.
pub fn multinomial_parts(k: u64, d: u32) -> Result<(u32, Vec<u64>, u64)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let base = 1u64
        .checked_shl(d)
        .filter(|b| *b > 1)
        .ok_or_else(|| Error::InvalidParameter(format!("d = {d} out of range")))?;
    let mut j = 0u32;
    let mut pow = 1u64;
    while let Some(next) = pow.checked_mul(base).filter(|&x| x <= k) {
        pow = next;
        j += 1;
    }
    let parts: Vec<u64> = (0..j).map(|i| (base - 1) * base.pow(i)).collect();
    let m = k - pow;
    if parts.iter().sum::<u64>() + m != k - 1 {
        return Err(Error::InvalidParameter("partition does not sum to k - 1".into()));
    }
    Ok((j, parts, m))
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, x| acc * x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultinomialConstant {
    pub k: u64,
    pub d: u32,
    pub parts: Vec<u64>,
    pub remainder: u64,
    /// Exact value, decimal.
    pub value: String,
    /// `value^{1/(k-1)}`.
    pub c7_fit: f64,
}

pub fn multinomial_constant(k: u64, d: u32) -> Result<MultinomialConstant> {
    let (_, parts, m) = multinomial_parts(k, d)?;
    let mut value = factorial(k - 1);
    for &p in parts.iter().chain(std::iter::once(&m)) {
        value /= factorial(p);
    }
    let c7_fit = (big_ln(&value) / (k - 1) as f64).exp();
    Ok(MultinomialConstant { k, d, parts, remainder: m, value: value.to_string(), c7_fit })
}

fn big_ln(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerProduct {
    pub k: u64,
    pub d: u32,
    /// The value is exactly `2^exponent2`.
    pub exponent2: i64,
    /// `(value k^k)^{1/k}`, the implied `C7`.
    pub c7_fit: f64,
}

impl PowerProduct {
    pub fn value(&self) -> BigRational {
        let two = BigInt::from(2);
        if self.exponent2 >= 0 {
            BigRational::from_integer(num_traits::pow(two, self.exponent2 as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(two, (-self.exponent2) as usize))
        }
    }
}

/// `2^{-m(j-1)d} Π_{i=1}^{j-1} 2^{-d i (2^d-1) 2^{id}}` with the partition above.
pub fn power_product_constant(k: u64, d: u32) -> Result<PowerProduct> {
    let (j, _, m) = multinomial_parts(k, d)?;
    let (j, m, dd) = (j as i64, m as i64, d as i64);
    let base = 1i64 << d;
    let mut e = -m * (j - 1) * dd;
    for i in 1..j {
        e -= dd * i * (base - 1) * base.pow(i as u32);
    }
    let c7_fit = ((e as f64 * std::f64::consts::LN_2 + k as f64 * (k as f64).ln()) / k as f64).exp();
    Ok(PowerProduct { k, d, exponent2: e, c7_fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSup {
    pub k_min: u64,
    pub k_max: u64,
    pub d: u32,
    pub sup: f64,
    pub argmax: u64,
}

fn sweep(k_max: u64, d: u32, mut f: impl FnMut(u64) -> Result<f64>) -> Result<SweepSup> {
    let mut best = (f64::NEG_INFINITY, 2);
    for k in 2..=k_max {
        let v = f(k)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok(SweepSup { k_min: 2, k_max, d, sup: best.0, argmax: best.1 })
}

/// Sup of the multinomial `C7` fit over `2 <= k <= k_max`, evaluated with
/// a running log-factorial table instead of big integers.
pub fn multinomial_sweep(k_max: u64, d: u32) -> Result<SweepSup> {
    let mut lf = vec![0.0f64; k_max as usize + 1];
    for i in 2..=k_max as usize {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    sweep(k_max, d, |k| {
        let (_, parts, m) = multinomial_parts(k, d)?;
        let ln = lf[k as usize - 1] - parts.iter().chain([m].iter()).map(|&p| lf[p as usize]).sum::<f64>();
        Ok((ln / (k - 1) as f64).exp())
    })
}

pub fn power_product_sweep(k_max: u64, d: u32) -> Result<SweepSup> {
    sweep(k_max, d, |k| Ok(power_product_constant(k, d)?.c7_fit))
}

pub const TRIANGULAR_ALPHA: (i64, i64) = (5, 48);

/// `(c1 exp(-c2 x^{96/5}), c3 exp(-c4 x^{96/5}))`.
pub fn triangular_tail(x: f64, c: (f64, f64, f64, f64)) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("x must be > 0, got {x}")));
    }
    let (num, den) = TRIANGULAR_ALPHA;
    // 2 / (5/48) = 96/5
    assert_eq!((2 * den, num), (96, 5));
    let e = (2 * den) as f64 / num as f64;
    let xe = x.powf(e);
    Ok((c.0 * (-c.1 * xe).exp(), c.2 * (-c.3 * xe).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub n: u64,
    pub u_grid: Vec<f64>,
    pub series: Vec<SeriesBound>,
    pub c9_fit: f64,
    pub c10_fit: Option<f64>,
    pub multinomial: SweepSup,
    pub power_product: SweepSup,
    pub exp_series_max_rel_err: f64,
}

/// Series on the `u` grid, `C9`/`C10` fits and the `C7` sweeps.
pub fn bound_report(params: &BoundParams, n: u64, u_grid: &[f64], k_max: u64) -> Result<BoundReport> {
    let c9 = fit_c9(u_grid, n, params)?;
    let fitted = params.clone().with_fitted("C9", c9)?;
    let series = u_grid.iter().map(|&u| generating_fn_bound(u, n, &fitted)).collect::<Result<Vec<_>>>()?;
    let c2 = params.get("C2")?;
    let exp_series_max_rel_err = u_grid
        .iter()
        .map(|&u| {
            let x = u.powi(params.d as i32) / c2;
            (exp_series(x) / x.exp() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let c10_fit = if params.constants.contains_key("C8") { Some(fit_c10(params)?) } else { None };
    Ok(BoundReport {
        params: params.clone(),
        n,
        u_grid: u_grid.to_vec(),
        series,
        c9_fit: c9,
        c10_fit,
        multinomial: multinomial_sweep(k_max, params.d)?,
        power_product: power_product_sweep(k_max, params.d)?,
        exp_series_max_rel_err,
    })
}
