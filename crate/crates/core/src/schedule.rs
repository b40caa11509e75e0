//! Step-size schedules.
//!
//! Elapsed time is accumulated with the same operation sequence everywhere
//! (`advance`), so a chain that tracks `t` incrementally agrees bit-for-bit
//! with `elapsed(k)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant { h: f64 },
    /// `h_k = h0 / k^alpha` with `alpha` in (1/2, 1].
    PowerDecay { h0: f64, alpha: f64 },
}

impl StepSchedule {
    pub fn constant(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("h", h, "constant step must be positive and finite"));
        }
        Ok(StepSchedule::Constant { h })
    }

    pub fn power_decay(h0: f64, alpha: f64) -> Result<Self> {
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(Error::invalid("h0", h0, "initial step must be positive and finite"));
        }
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::invalid(
                "alpha",
                alpha,
                "decay exponent must lie in (1/2, 1] so that the steps sum to infinity while their squares stay summable",
            ));
        }
        Ok(StepSchedule::PowerDecay { h0, alpha })
    }

    /// `h_k` for `k >= 1`.
    pub fn step(&self, k: u64) -> f64 {
        debug_assert!(k >= 1, "steps are indexed from 1");
        match *self {
            StepSchedule::Constant { h } => h,
            StepSchedule::PowerDecay { h0, alpha } => {
                if alpha == 1.0 {
                    h0 / k as f64
                } else {
                    h0 / (k as f64).powf(alpha)
                }
            }
        }
    }

    /// Largest step the schedule ever takes.
    pub fn max_step(&self) -> f64 {
        match *self {
            StepSchedule::Constant { h } => h,
            StepSchedule::PowerDecay { h0, .. } => h0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, StepSchedule::Constant { .. })
    }

    /// Elapsed time after step `k`, given the elapsed time after step `k - 1`.
    pub fn advance(&self, prev: f64, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant { h } => k as f64 * h,
            StepSchedule::PowerDecay { .. } => prev + self.step(k),
        }
    }

    /// `tau_n = sum_{k <= n} h_k`, with `tau_0 = 0`.
    pub fn elapsed(&self, n: u64) -> f64 {
        match *self {
            StepSchedule::Constant { h } => n as f64 * h,
            StepSchedule::PowerDecay { .. } => (1..=n).fold(0.0, |t, k| self.advance(t, k)),
        }
    }

    /// `sum_{k <= n} h_k^2`.
    pub fn sum_of_squares(&self, n: u64) -> f64 {
        match *self {
            StepSchedule::Constant { h } => n as f64 * h * h,
            StepSchedule::PowerDecay { .. } => (1..=n).map(|k| self.step(k).powi(2)).sum(),
        }
    }
}
