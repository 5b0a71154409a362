//! Sources of one-arm probabilities `π(r) = π(1, r)` at integer scales.

/// Anything that can report `π(scale)` for integer scales `>= 1`.
pub trait ArmProbability {
    fn pi(&self, scale: u64) -> Option<f64>;

    fn pi_or_err(&self, scale: u64) -> crate::Result<f64> {
        self.pi(scale)
            .ok_or_else(|| crate::Error::MissingPi(format!("π({scale})")))
    }
}

/// `π(r) = amplitude · r^{-alpha}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub amplitude: f64,
    pub alpha: f64,
}

impl ArmProbability for PowerLaw {
    fn pi(&self, scale: u64) -> Option<f64> {
        (scale >= 1).then(|| self.amplitude * (scale as f64).powf(-self.alpha))
    }
}

/// `π ≡ value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantPi(pub f64);

impl ArmProbability for ConstantPi {
    fn pi(&self, scale: u64) -> Option<f64> {
        (scale >= 1).then_some(self.0)
    }
}

/// Adapter for closures.
pub struct FnPi<F>(pub F);

impl<F: Fn(u64) -> Option<f64>> ArmProbability for FnPi<F> {
    fn pi(&self, scale: u64) -> Option<f64> {
        (self.0)(scale)
    }
}

impl<T: ArmProbability + ?Sized> ArmProbability for &T {
    fn pi(&self, scale: u64) -> Option<f64> {
        (**self).pi(scale)
    }
}

/// The integer scale used for `n/u`: `max(1, ⌊n/u⌋)`.
pub fn scale_ratio(n: u64, u: f64) -> u64 {
    ((n as f64 / u).floor() as u64).max(1)
}

/// Smallest integer `q >= 1` with `q^d >= k`, i.e. `⌈k^{1/d}⌉`.
pub fn ceil_root(k: u64, d: u32) -> u64 {
    let mut q = (k as f64).powf(1.0 / d as f64).round().max(1.0) as u64;
    while q > 1 && (q - 1).checked_pow(d).is_some_and(|v| v >= k) {
        q -= 1;
    }
    while q.checked_pow(d).is_some_and(|v| v < k) {
        q += 1;
    }
    q
}

/// Largest integer `q` with `q^d <= k`, i.e. `⌊k^{1/d}⌋`.
pub fn floor_root(k: u64, d: u32) -> u64 {
    let q = ceil_root(k, d);
    if q.checked_pow(d).is_some_and(|v| v == k) {
        q
    } else {
        q - 1
    }
}
