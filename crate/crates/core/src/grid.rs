//! Log-uniform grids on `R^+`.

#[allow(unused_imports)]
use crate::math::Float;
use crate::{Error, Result};

/// `r_k = exp(u_0 + k Δu)`, `k = 0..count`.
///
/// Stored in log coordinates so that sub-grids and shifted lattices share
/// nodes exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    log_min: f64,
    step: f64,
    count: usize,
}

impl LogGrid {
    /// Grid with `count ≥ 2` points from `min` to `max` inclusive.
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && min.is_finite()) {
            return Err(Error::Domain { what: "grid minimum", value: min });
        }
        if !(max > min && max.is_finite()) {
            return Err(Error::Domain { what: "grid maximum", value: max });
        }
        if count < 2 {
            return Err(Error::Domain { what: "grid count", value: count as f64 });
        }
        let log_min = min.ln();
        let step = (max.ln() - log_min) / (count - 1) as f64;
        Ok(Self { log_min, step, count })
    }

    /// Grid from its log-space origin and step.
    pub fn from_log(log_min: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain { what: "log grid step", value: step });
        }
        if count < 2 {
            return Err(Error::Domain { what: "grid count", value: count as f64 });
        }
        if !log_min.is_finite() {
            return Err(Error::Domain { what: "log grid origin", value: log_min });
        }
        Ok(Self { log_min, step, count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// `Δu`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn log_min(&self) -> f64 {
        self.log_min
    }

    pub fn log_max(&self) -> f64 {
        self.log_at(self.count - 1)
    }

    pub fn log_at(&self, k: usize) -> f64 {
        self.log_min + self.step * k as f64
    }

    pub fn at(&self, k: usize) -> f64 {
        self.log_at(k).exp()
    }

    pub fn min(&self) -> f64 {
        self.at(0)
    }

    pub fn max(&self) -> f64 {
        self.at(self.count - 1)
    }

    /// `ln(r_max / r_min)`.
    pub fn log_extent(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.at(k))
    }

    /// The nodes `first..first + count` as a grid of their own.
    pub fn sub_grid(&self, first: usize, count: usize) -> Result<Self> {
        if first + count > self.count {
            return Err(Error::GridMismatch("sub-grid runs past the parent grid"));
        }
        Self::from_log(self.log_at(first), self.step, count)
    }

    /// Index range of the nodes inside `[lo, hi]` (up to rounding in log space).
    pub fn index_range(&self, lo: f64, hi: f64) -> core::ops::Range<usize> {
        let tol = 1e-9 * self.step;
        let a = ((lo.ln() - self.log_min) / self.step - tol).ceil().max(0.0) as usize;
        let b = ((hi.ln() - self.log_min) / self.step + tol).floor();
        let b = if b < 0.0 { 0 } else { (b as usize + 1).min(self.count) };
        a.min(b)..b
    }

    /// Whether `other` uses the same step, to relative `1e-12`.
    pub fn same_step(&self, other: &Self) -> bool {
        (self.step - other.step).abs() <= 1e-12 * self.step
    }
}
