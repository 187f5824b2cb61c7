//! Minimum-principle machinery: costate propagation, the switching function
//! `s(t) = Bᵀ e^{-Aᵀt} q0`, the pointwise dead-zone law and certificate search.
//!
//! A certificate is a costate `q0` whose switching function has the sign
//! pattern the control demands at every interval midpoint. It witnesses the
//! necessary conditions only; it says nothing about global optimality.

use nalgebra::{DMatrix, DVector};

use crate::error::{HandsoffError, Result};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::lti::{ControlSignal, LtiSystem};
use crate::matexp::{expm, midpoint_input_directions};
use crate::solver::{TranscribedProblem, BANG_TOL};

/// Slack allowed on each sign condition.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Synthesis treats `||s| - 1| ≤ AMBIGUITY_TOL` as the tie set.
pub const AMBIGUITY_TOL: f64 = 1e-9;

const MARGIN_CAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CostateSpec {
    pub q0: DVector<f64>,
    pub system: LtiSystem,
}

impl CostateSpec {
    pub fn new(system: LtiSystem, q0: &[f64]) -> Result<Self> {
        if q0.len() != system.n() {
            return Err(HandsoffError::DimensionMismatch(format!(
                "costate has {} components, system has n = {}",
                q0.len(),
                system.n()
            )));
        }
        if q0.iter().any(|v| !v.is_finite()) {
            return Err(HandsoffError::NonFinite("costate must be finite".into()));
        }
        Ok(Self { q0: DVector::from_column_slice(q0), system })
    }

    /// `q(t) = e^{-Aᵀt} q0`.
    pub fn costate_at(&self, t: f64) -> Result<DVector<f64>> {
        Ok(expm(&(-self.system.a().transpose() * t))? * &self.q0)
    }

    /// `s(t_k)` at every interval midpoint.
    pub fn switching_samples(&self, horizon: f64, n_intervals: usize) -> Result<Vec<f64>> {
        let h = midpoint_input_directions(&self.system, horizon, n_intervals)?;
        Ok(h.column_iter().map(|c| c.dot(&self.q0)).collect())
    }
}

/// `s(t) = Bᵀ e^{-Aᵀt} q0`.
pub fn switching_function(spec: &CostateSpec, t: f64) -> Result<f64> {
    Ok(spec.system.b().dot(&spec.costate_at(t)?))
}

/// `H(x, q, u) = |u|^p + qᵀ(Ax + Bu)`.
pub fn hamiltonian_lp(sys: &LtiSystem, x: &DVector<f64>, q: &DVector<f64>, u: f64, p: f64) -> f64 {
    let drift = sys.a() * x + sys.b() * u;
    u.abs().powf(p) + q.dot(&drift)
}

/// Minimizers of `|u|^p + s·u` over `|u| ≤ 1`, exact case split.
pub fn pointwise_argmin(s: f64, p: f64) -> Result<&'static [i8]> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(HandsoffError::InvalidArgument(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(if s < -1.0 {
        &[1]
    } else if s == -1.0 {
        &[0, 1]
    } else if s < 1.0 {
        &[0]
    } else if s == 1.0 {
        &[-1, 0]
    } else {
        &[-1]
    })
}

/// Dead-zone law sampled at midpoints; ties at `|s| = 1` resolve to 0.
pub fn synthesize(spec: &CostateSpec, horizon: f64, n_intervals: usize) -> Result<ControlSignal> {
    let s = spec.switching_samples(horizon, n_intervals)?;
    let values = s
        .iter()
        .map(|&sk| {
            if (sk.abs() - 1.0).abs() <= AMBIGUITY_TOL {
                0.0
            } else if sk < -1.0 {
                1.0
            } else if sk > 1.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    ControlSignal::new(horizon, values)
}

/// Grid measure of `{t_k : ||s(t_k)| - 1| ≤ tol}`; positive under refinement flags non-normality.
pub fn normality_diagnostic(spec: &CostateSpec, horizon: f64, n_intervals: usize) -> Result<f64> {
    let s = spec.switching_samples(horizon, n_intervals)?;
    Ok(pinned_measure(&s, horizon / n_intervals as f64))
}

fn pinned_measure(s: &[f64], delta: f64) -> f64 {
    s.iter().filter(|v| (v.abs() - 1.0).abs() <= CERTIFICATE_TOL).count() as f64 * delta
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PmpCertificate {
    pub q0: Vec<f64>,
    /// Worst violation of the exact sign conditions over all midpoints.
    pub max_violation: f64,
    /// Grid measure where `|s|` sits within tolerance of 1.
    pub boundary_measure: f64,
    /// Margin achieved by the search LP.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SampleClass {
    Plus,
    Minus,
    Zero,
    /// `0 < u < 1`: requires `s = -1`.
    SingularPlus,
    /// `-1 < u < 0`: requires `s = 1`.
    SingularMinus,
}

fn classify(u: f64) -> SampleClass {
    if (u - 1.0).abs() <= BANG_TOL {
        SampleClass::Plus
    } else if (u + 1.0).abs() <= BANG_TOL {
        SampleClass::Minus
    } else if u.abs() <= BANG_TOL {
        SampleClass::Zero
    } else if u > 0.0 {
        SampleClass::SingularPlus
    } else {
        SampleClass::SingularMinus
    }
}

fn violation(class: SampleClass, s: f64) -> f64 {
    match class {
        SampleClass::Plus => (s + 1.0).max(0.0),
        SampleClass::Minus => (1.0 - s).max(0.0),
        SampleClass::Zero => (s.abs() - 1.0).max(0.0),
        SampleClass::SingularPlus => (s + 1.0).abs(),
        SampleClass::SingularMinus => (s - 1.0).abs(),
    }
}

/// Inequalities `aᵀq ≤ β` (before the margin) encoding one sample's sign condition.
fn sample_rows(class: SampleClass, h: &DVector<f64>, out: &mut Vec<(DVector<f64>, f64)>) {
    let tol = CERTIFICATE_TOL;
    match class {
        SampleClass::Plus => out.push((h.clone(), -1.0 + tol)),
        SampleClass::Minus => out.push((-h, -1.0 + tol)),
        SampleClass::Zero => {
            out.push((h.clone(), 1.0 + tol));
            out.push((-h, 1.0 + tol));
        }
        SampleClass::SingularPlus => {
            out.push((h.clone(), -1.0 + tol));
            out.push((-h, 1.0 + tol));
        }
        SampleClass::SingularMinus => {
            out.push((h.clone(), 1.0 + tol));
            out.push((-h, -1.0 + tol));
        }
    }
}

/// Search for a costate consistent with the sign pattern of `u`.
///
/// Maximizes a common margin `m ∈ [0, 1]` subject to `aᵢᵀq + m ≤ βᵢ`. The
/// search runs on the LP dual, which has only `n + 1` rows:
/// `min βᵀλ + μ  s.t.  Σ λᵢ aᵢ = 0,  Σ λᵢ + μ − σ = 1,  λ, μ, σ ≥ 0`,
/// whose row duals are exactly `(q, m)`. An unbounded dual means no costate
/// exists. Returns `Ok(None)` when no certificate is found.
pub fn find_certificate(problem: &TranscribedProblem, u: &ControlSignal) -> Result<Option<PmpCertificate>> {
    if u.n_intervals() != problem.n_intervals() || (u.horizon() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return Err(HandsoffError::DimensionMismatch("control grid does not match the problem grid".into()));
    }
    if u.linf_norm() > 1.0 + BANG_TOL {
        return Err(HandsoffError::InfeasibleCandidate(format!("‖u‖∞ = {} exceeds 1", u.linf_norm())));
    }
    let residual = problem.residual(u.values());
    if residual > problem.residual_tolerance() {
        return Err(HandsoffError::InfeasibleCandidate(format!("terminal residual {residual:.3e} is nonzero")));
    }

    let sys = problem.system();
    let n = sys.n();
    let h = midpoint_input_directions(sys, problem.horizon(), problem.n_intervals())?;
    let classes: Vec<SampleClass> = u.values().iter().map(|&v| classify(v)).collect();
    let mut rows = Vec::with_capacity(2 * classes.len());
    for (k, &class) in classes.iter().enumerate() {
        sample_rows(class, &h.column(k).into_owned(), &mut rows);
    }

    // Dual variables: λ_1..λ_K, μ, σ.
    let k_rows = rows.len();
    let m = k_rows + 2;
    let mut a = DMatrix::zeros(n + 1, m);
    let mut cost = vec![0.0; m];
    for (i, (coef, beta)) in rows.iter().enumerate() {
        a.view_mut((0, i), (n, 1)).copy_from(coef);
        a[(n, i)] = 1.0;
        cost[i] = *beta;
    }
    a[(n, k_rows)] = 1.0;
    cost[k_rows] = MARGIN_CAP;
    a[(n, k_rows + 1)] = -1.0;
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let dual = LinearProgram::new(cost, a, rhs, vec![0.0; m], vec![f64::INFINITY; m])?;
    let sol = lp::solve(&dual)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let q0: Vec<f64> = sol.duals[..n].to_vec();
    let margin = sol.duals[n];

    let qv = DVector::from_column_slice(&q0);
    let s: Vec<f64> = h.column_iter().map(|c| c.dot(&qv)).collect();
    let max_violation = classes.iter().zip(&s).map(|(&c, &sk)| violation(c, sk)).fold(0.0, f64::max);
    if max_violation > CERTIFICATE_TOL {
        return Ok(None);
    }
    Ok(Some(PmpCertificate { boundary_measure: pinned_measure(&s, problem.delta()), q0, max_violation, margin }))
}
