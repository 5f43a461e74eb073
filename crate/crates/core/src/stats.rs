//! Streaming mean/variance accumulation and normal-theory confidence
//! intervals for the Monte-Carlo estimators.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile. Sample counts here are large enough
/// (dozens of seeds, thousands of cloud points) that the normal
/// approximation is the standard choice.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Welford accumulator: numerically stable running mean and variance.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn from_slice(values: &[f64]) -> Self {
        let mut acc = Self::new();
        for &v in values {
            acc.push(v);
        }
        acc
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    #[must_use]
    pub fn count(&self) -> u64 {
        self.count
    }

    #[must_use]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (n-1 denominator); 0 for fewer than 2 samples.
    #[must_use]
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    #[must_use]
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// Normal-theory 95% confidence interval for the mean.
    #[must_use]
    pub fn ci95(&self) -> Interval {
        let half = Z_95 * self.std_error();
        Interval {
            lo: self.mean - half,
            hi: self.mean + half,
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    #[must_use]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[must_use]
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    #[must_use]
    pub fn strictly_above(&self, x: f64) -> bool {
        self.lo > x
    }

    #[must_use]
    pub fn strictly_below(&self, x: f64) -> bool {
        self.hi < x
    }
}
