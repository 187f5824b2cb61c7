//! Matrix exponential and exact quadrature of the terminal-constraint columns.

use nalgebra::{DMatrix, DVector};

use crate::error::{HandsoffError, Result};
use crate::lti::LtiSystem;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled [13/13] approximant is accurate.
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 60;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^M` by scaling and squaring with the diagonal [13/13] Padé approximant.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(HandsoffError::DimensionMismatch(format!("expm needs a square matrix, got {}x{}", n, m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(HandsoffError::NonFinite("expm input has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let norm = one_norm(m);
    let squarings = if norm > THETA13 {
        ((norm / THETA13).log2().ceil() as i32).clamp(0, MAX_SQUARINGS)
    } else {
        0
    };
    let a = m * 2f64.powi(-squarings);

    let b = &PADE13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| HandsoffError::NonFinite("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(HandsoffError::NonFinite("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// Discretized terminal constraint: column `k` is `∫_{kΔ}^{(k+1)Δ} e^{-At} B dt`,
/// so a piecewise-constant `u` is feasible iff `G u = -ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    g: DMatrix<f64>,
    horizon: f64,
}

impl ConstraintMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_intervals(&self) -> usize {
        self.g.ncols()
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.g.ncols() as f64
    }

    /// `G u` for a sample vector `u`.
    pub fn apply(&self, u: &[f64]) -> DVector<f64> {
        assert_eq!(u.len(), self.g.ncols(), "sample count must match the grid");
        let mut out = DVector::zeros(self.g.nrows());
        for (col, &uk) in self.g.column_iter().zip(u) {
            if uk != 0.0 {
                out.axpy(uk, &col, 1.0);
            }
        }
        out
    }
}

fn check_grid(horizon: f64, n_intervals: usize) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(HandsoffError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if n_intervals == 0 {
        return Err(HandsoffError::InvalidArgument("grid needs at least one interval".into()));
    }
    Ok(())
}

/// `(∫_0^h e^{-At} B dt, e^{-Ah})` from one exponential of `[[-A, B], [0, 0]]·h`.
pub fn integrated_input(sys: &LtiSystem, h: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = sys.n();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(-sys.a() * h));
    aug.view_mut((0, n), (n, 1)).copy_from(&(sys.b() * h));
    let e = expm(&aug)?;
    let integral = e.view((0, n), (n, 1)).column(0).into_owned();
    let transition = e.view((0, 0), (n, n)).into_owned();
    Ok((integral, transition))
}

pub fn build_constraint_matrix(sys: &LtiSystem, horizon: f64, n_intervals: usize) -> Result<ConstraintMatrix> {
    check_grid(horizon, n_intervals)?;
    let delta = horizon / n_intervals as f64;
    let (first, step) = integrated_input(sys, delta)?;
    let mut g = DMatrix::zeros(sys.n(), n_intervals);
    let mut col = first;
    for k in 0..n_intervals {
        g.set_column(k, &col);
        if k + 1 < n_intervals {
            col = &step * col;
        }
    }
    Ok(ConstraintMatrix { g, horizon })
}

/// `e^{-A t_k} B` at the interval midpoints `t_k = (k + ½)Δ`, one column per interval.
pub fn midpoint_input_directions(sys: &LtiSystem, horizon: f64, n_intervals: usize) -> Result<DMatrix<f64>> {
    check_grid(horizon, n_intervals)?;
    let delta = horizon / n_intervals as f64;
    let step = expm(&(-sys.a() * delta))?;
    let half = expm(&(-sys.a() * (0.5 * delta)))?;
    let mut h = DMatrix::zeros(sys.n(), n_intervals);
    let mut col = half * sys.b();
    for k in 0..n_intervals {
        h.set_column(k, &col);
        if k + 1 < n_intervals {
            col = &step * col;
        }
    }
    Ok(h)
}
