//! Closed-form ground truth for the double integrator `x1' = x2, x2' = u`.
//!
//! In the region `½ξ2² < ξ1, ξ2 < 0, -ξ2/2 - ξ1/ξ2 < T` the L1-optimal
//! control is not unique: every `0 ≤ u ≤ 1` with
//! `∫u = -ξ2` and `∫∫u = -ξ1 - ξ2 T` is optimal. The sparsest member is the
//! unit pulse on `[t1, t2)`; a half-height pulse of twice the width is an
//! equally L1-optimal control with double the support.

use crate::error::{HandsoffError, Result};
use crate::lti::ControlSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiInstance {
    pub xi1: f64,
    pub xi2: f64,
    pub horizon: f64,
}

/// A rectangular control `height` on `[start, end)`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub start: f64,
    pub end: f64,
    pub height: f64,
}

impl Pulse {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn l1(&self) -> f64 {
        self.height.abs() * self.width()
    }

    pub fn l0(&self) -> f64 {
        if self.height == 0.0 {
            0.0
        } else {
            self.width()
        }
    }

    /// Cell-averaged samples on a uniform grid; preserves `∫u` exactly.
    pub fn sample(&self, horizon: f64, n_intervals: usize) -> Result<ControlSignal> {
        let delta = horizon / n_intervals as f64;
        let values = (0..n_intervals)
            .map(|k| {
                let (a, b) = (k as f64 * delta, (k + 1) as f64 * delta);
                let overlap = (b.min(self.end) - a.max(self.start)).max(0.0);
                let frac = overlap / delta;
                // Snap cells that are covered up to round-off.
                let frac = if (frac - 1.0).abs() < 1e-9 {
                    1.0
                } else if frac < 1e-9 {
                    0.0
                } else {
                    frac
                };
                self.height * frac
            })
            .collect();
        ControlSignal::new(horizon, values)
    }
}

impl DiInstance {
    pub fn new(xi1: f64, xi2: f64, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(HandsoffError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if !(xi1.is_finite() && xi2.is_finite()) {
            return Err(HandsoffError::NonFinite("initial state must be finite".into()));
        }
        Ok(Self { xi1, xi2, horizon })
    }

    pub fn xi(&self) -> [f64; 2] {
        [self.xi1, self.xi2]
    }

    pub fn in_nonnormal_region(&self) -> bool {
        let (x1, x2) = (self.xi1, self.xi2);
        0.5 * x2 * x2 < x1 && x2 < 0.0 && (-x2 / 2.0 - x1 / x2) < self.horizon
    }

    fn require_region(&self) -> Result<()> {
        if self.in_nonnormal_region() {
            Ok(())
        } else {
            Err(HandsoffError::RegionViolation(format!(
                "(ξ1, ξ2, T) = ({}, {}, {}) does not satisfy ½ξ2² < ξ1, ξ2 < 0, -ξ2/2 - ξ1/ξ2 < T",
                self.xi1, self.xi2, self.horizon
            )))
        }
    }

    /// Switch times `(t1, t2)` of the sparsest control `u = 1` on `[t1, t2)`.
    pub fn analytic_handsoff(&self) -> Result<(f64, f64)> {
        self.require_region()?;
        let c = -self.xi1 / self.xi2;
        Ok((self.xi2 / 2.0 + c, -self.xi2 / 2.0 + c))
    }

    pub fn handsoff_pulse(&self) -> Result<Pulse> {
        let (start, end) = self.analytic_handsoff()?;
        Ok(Pulse { start, end, height: 1.0 })
    }

    /// `(∫u, ∫_0^T ∫_0^θ u) = (-ξ2, -ξ1 - ξ2 T)`.
    pub fn moment_constraints(&self) -> (f64, f64) {
        (-self.xi2, -self.xi1 - self.xi2 * self.horizon)
    }

    /// Half-height pulse of width `2·(-ξ2)` centred on the same centroid as the
    /// sparse pulse: L1-optimal, but with twice the support.
    pub fn non_sparse_l1_pulse(&self) -> Result<Pulse> {
        self.require_region()?;
        let (m0, m1) = self.moment_constraints();
        let centroid = self.horizon - m1 / m0;
        let width = 2.0 * m0;
        let pulse = Pulse { start: centroid - width / 2.0, end: centroid + width / 2.0, height: m0 / width };
        if pulse.start < -1e-12 || pulse.end > self.horizon + 1e-12 {
            return Err(HandsoffError::Geometry(format!(
                "pulse [{}, {}] leaves [0, {}]",
                pulse.start, pulse.end, self.horizon
            )));
        }
        Ok(Pulse { start: pulse.start.max(0.0), end: pulse.end.min(self.horizon), ..pulse })
    }

    /// The wide pulse on a grid. Cell averaging alone keeps `∫u` but shifts the
    /// first moment when the pulse ends fall inside cells, so the two outermost
    /// cells are re-solved to meet both moment conditions exactly.
    pub fn non_sparse_l1_control(&self, n_intervals: usize) -> Result<ControlSignal> {
        let u = self.non_sparse_l1_pulse()?.sample(self.horizon, n_intervals)?;
        let Some((first, last)) = u.support_bounds(0.0) else {
            return Ok(u);
        };
        if first == last {
            return Ok(u);
        }
        let (m0, m1) = self.moment_constraints();
        let delta = u.delta();
        let lever = |k: usize| delta * (self.horizon - (k as f64 + 0.5) * delta);
        let mut values = u.into_values();
        let (mut r0, mut r1) = (m0, m1);
        for (k, &v) in values.iter().enumerate().take(last).skip(first + 1) {
            r0 -= v * delta;
            r1 -= v * lever(k);
        }
        // delta·(h_a + h_b) = r0,  lever_a·h_a + lever_b·h_b = r1
        let (la, lb) = (lever(first), lever(last));
        let det = delta * (lb - la);
        let h_a = (r0 * lb - r1 * delta) / det;
        let h_b = (r1 * delta - r0 * la) / det;
        if !(-1e-12..=1.0 + 1e-12).contains(&h_a) || !(-1e-12..=1.0 + 1e-12).contains(&h_b) {
            return Err(HandsoffError::Geometry(format!(
                "grid of {n_intervals} intervals too coarse for the wide pulse"
            )));
        }
        values[first] = h_a.clamp(0.0, 1.0);
        values[last] = h_b.clamp(0.0, 1.0);
        ControlSignal::new(self.horizon, values)
    }

    /// Terminal state `x(T)` under `pulse`, by double integration in closed form.
    pub fn terminal_state(&self, pulse: &Pulse) -> [f64; 2] {
        let t = self.horizon;
        let (a, b) = (pulse.start.clamp(0.0, t), pulse.end.clamp(0.0, t));
        let area = pulse.height * (b - a);
        // ∫_0^T (T - s) u(s) ds
        let lever = pulse.height * ((t - a).powi(2) - (t - b).powi(2)) / 2.0;
        [self.xi1 + self.xi2 * t + lever, self.xi2 + area]
    }
}

/// Exact moments `(∫u, ∫_0^T (T - t) u)` of a piecewise-constant signal.
pub fn signal_moments(u: &ControlSignal) -> (f64, f64) {
    let (t, delta) = (u.horizon(), u.delta());
    u.values().iter().enumerate().fold((0.0, 0.0), |(m0, m1), (k, &v)| {
        let (a, b) = (k as f64 * delta, (k + 1) as f64 * delta);
        (m0 + v * delta, m1 + v * ((t - a).powi(2) - (t - b).powi(2)) / 2.0)
    })
}
