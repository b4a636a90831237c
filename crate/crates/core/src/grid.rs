//! Nominal recording grid `t₀, t₀ + dt, …, t_end`.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    /// Returns `None` unless `t_end > t0`, `dt > 0` and all values are finite.
    /// The last interval is shortened so that the grid ends exactly at `t_end`.
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Option<TimeGrid> {
        if !(t0.is_finite() && t_end.is_finite() && dt.is_finite()) || !(t_end > t0) || !(dt > 0.0) {
            return None;
        }
        let ratio = (t_end - t0) / dt;
        let steps = libm::ceil(ratio - 1e-9 * ratio.max(1.0)).max(1.0) as usize;
        Some(TimeGrid { t0, t_end, dt, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of intervals; the grid has `steps() + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t_end
        } else {
            (self.t0 + k as f64 * self.dt).min(self.t_end)
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// True when two recorded time axes coincide up to rounding.
pub fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}
