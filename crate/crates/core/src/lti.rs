//! Plant and control-signal types, and the norms used to score controls.
//!
//! Controls are piecewise constant on a uniform grid of `N` intervals over
//! `[0, T]`; every norm below is exact for that representative.

use nalgebra::{DMatrix, DVector};

use crate::error::{HandsoffError, Result};

/// Default threshold below which a sample counts as zero in [`ControlSignal::l0_norm`].
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Single-input linear time-invariant plant `x' = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    label: Option<String>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, label: Option<String>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(HandsoffError::InvalidSystem("state dimension must be positive".into()));
        }
        if a.ncols() != n {
            return Err(HandsoffError::InvalidSystem(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != n {
            return Err(HandsoffError::InvalidSystem(format!(
                "B must have length {n}, got {}",
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(HandsoffError::NonFinite("system entries must be finite".into()));
        }
        Ok(Self { a, b, label })
    }

    /// Build from a row-major `A` and a `B` column.
    pub fn from_rows(a_rows: &[Vec<f64>], b: &[f64], label: Option<String>) -> Result<Self> {
        let n = a_rows.len();
        if a_rows.iter().any(|row| row.len() != n) {
            return Err(HandsoffError::InvalidSystem("A rows must all have length n".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| a_rows[i][j]);
        Self::new(a, DVector::from_column_slice(b), label)
    }

    /// The double integrator `x1' = x2, x2' = u`.
    pub fn double_integrator() -> Self {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DVector::from_column_slice(&[0.0, 1.0]);
        Self::new(a, b, Some("double-integrator".into())).expect("valid system")
    }

    /// The scalar integrator `x' = u`.
    pub fn scalar_integrator() -> Self {
        Self::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0), Some("scalar-integrator".into()))
            .expect("valid system")
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Rank of the Kalman matrix `[B, AB, ..., A^{n-1}B]`.
    pub fn controllability_rank(&self) -> usize {
        let n = self.n();
        let mut k = DMatrix::zeros(n, n);
        let mut col = self.b.clone();
        for j in 0..n {
            k.set_column(j, &col);
            col = &self.a * col;
        }
        let scale = k.amax().max(1.0);
        k.svd(false, false).rank(1e-10 * scale)
    }

    pub fn is_controllable(&self) -> bool {
        self.controllability_rank() == self.n()
    }
}

/// Piecewise-constant control: `values[k]` holds on `[kΔ, (k+1)Δ)`, `Δ = T/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    horizon: f64,
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(HandsoffError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if values.is_empty() {
            return Err(HandsoffError::InvalidArgument("control needs at least one interval".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HandsoffError::NonFinite("control values must be finite".into()));
        }
        Ok(Self { horizon, values })
    }

    pub fn zeros(horizon: f64, n_intervals: usize) -> Result<Self> {
        Self::new(horizon, vec![0.0; n_intervals])
    }

    /// Sample `f` at interval midpoints.
    pub fn from_fn(horizon: f64, n_intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let delta = horizon / n_intervals as f64;
        let values = (0..n_intervals).map(|k| f((k as f64 + 0.5) * delta)).collect();
        Self::new(horizon, values)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_intervals(&self) -> usize {
        self.values.len()
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn interval_start(&self, k: usize) -> f64 {
        k as f64 * self.delta()
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.delta()
    }

    /// Measure of the support: `Δ · #{k : |u_k| > zero_tol}`.
    pub fn l0_norm(&self, zero_tol: f64) -> f64 {
        let count = self.values.iter().filter(|v| v.abs() > zero_tol).count();
        count as f64 * self.delta()
    }

    /// `‖u‖_p^p = Δ Σ |u_k|^p` (the p-th power, not the quasi-norm itself).
    pub fn lp_quasinorm_pow(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
        let sum: f64 = if p == 1.0 {
            self.values.iter().map(|v| v.abs()).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        sum * self.delta()
    }

    pub fn l1_norm(&self) -> f64 {
        self.lp_quasinorm_pow(1.0)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of samples farther than `tol` from every value in `{-1, 0, 1}`.
    pub fn fractional_count(&self, tol: f64) -> usize {
        self.values.iter().filter(|&&v| !is_bang_off_bang(v, tol)).count()
    }

    /// Indices `[first, last]` of the nonzero samples, if any.
    pub fn support_bounds(&self, zero_tol: f64) -> Option<(usize, usize)> {
        let first = self.values.iter().position(|v| v.abs() > zero_tol)?;
        let last = self.values.iter().rposition(|v| v.abs() > zero_tol)?;
        Some((first, last))
    }

    /// `[start, end)` in time spanned by the outermost nonzero samples.
    pub fn support_interval(&self, zero_tol: f64) -> Option<(f64, f64)> {
        let (first, last) = self.support_bounds(zero_tol)?;
        Some((self.interval_start(first), self.interval_start(last + 1)))
    }

    pub fn norms(&self, p: f64, zero_tol: f64) -> NormReport {
        NormReport {
            l0: self.l0_norm(zero_tol),
            l1: self.l1_norm(),
            p,
            lp: self.lp_quasinorm_pow(p),
            linf: self.linf_norm(),
        }
    }
}

/// All norms of one control; `lp` holds `‖u‖_p^p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormReport {
    pub l0: f64,
    pub l1: f64,
    pub p: f64,
    pub lp: f64,
    pub linf: f64,
}

/// The L0 kernel: 1 for any nonzero value, 0 for exact zero.
pub fn l0_kernel(v: f64) -> f64 {
    if v != 0.0 {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn is_bang_off_bang(v: f64, tol: f64) -> bool {
    (v - 1.0).abs() <= tol || v.abs() <= tol || (v + 1.0).abs() <= tol
}
