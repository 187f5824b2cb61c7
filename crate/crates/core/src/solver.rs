//! Transcription and solution of the maximum hands-off problem.
//!
//! Every solve goes through the split-variable LP
//!
//! ```text
//! min Δ Σ w_k (u⁺_k + u⁻_k)   s.t.   G (u⁺ - u⁻) = -ξ,   u⁺, u⁻ ∈ [0, 1]^N
//! ```
//!
//! followed by a tie-break pass over the optimal face: variables whose reduced
//! cost is nonzero are frozen and the second time-moment `Σ t_k² |u_k|` is
//! minimized over what is left. The tie-break never changes the primary
//! objective; it only picks a canonical vertex when the optimum is not unique
//! (the non-normal case), preferring concentrated supports.

use nalgebra::{DMatrix, DVector};

use crate::error::{HandsoffError, Result};
use crate::lp::{self, LinearProgram, LpSolution, LpStatus, OPTIMALITY_TOL};
use crate::lti::{is_bang_off_bang, ControlSignal, LtiSystem, DEFAULT_ZERO_TOL};
use crate::matexp::{build_constraint_matrix, ConstraintMatrix};

/// Samples closer than this to `{-1, 0, 1}` count as bang-off-bang.
pub const BANG_TOL: f64 = 1e-9;
/// Relative terminal-state residual accepted for a returned control.
pub const FEASIBILITY_TOL: f64 = 1e-8;

pub const DEFAULT_P: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 20;
pub const DEFAULT_INTERVALS: usize = 500;

/// Largest fractional set the exhaustive polish will enumerate (3^k candidates).
const MAX_POLISH_SET: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct TranscribedProblem {
    system: LtiSystem,
    xi: DVector<f64>,
    constraint: ConstraintMatrix,
}

pub fn transcribe(sys: &LtiSystem, xi: &[f64], horizon: f64, n_intervals: usize) -> Result<TranscribedProblem> {
    let constraint = build_constraint_matrix(sys, horizon, n_intervals)?;
    TranscribedProblem::from_parts(sys.clone(), xi, constraint)
}

impl TranscribedProblem {
    fn from_parts(system: LtiSystem, xi: &[f64], constraint: ConstraintMatrix) -> Result<Self> {
        if xi.len() != system.n() {
            return Err(HandsoffError::DimensionMismatch(format!(
                "initial state has {} components, system has n = {}",
                xi.len(),
                system.n()
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(HandsoffError::NonFinite("initial state must be finite".into()));
        }
        Ok(Self { system, xi: DVector::from_column_slice(xi), constraint })
    }

    /// Same system and grid, different initial state; reuses the constraint matrix.
    pub fn with_state(&self, xi: &[f64]) -> Result<Self> {
        Self::from_parts(self.system.clone(), xi, self.constraint.clone())
    }

    pub fn system(&self) -> &LtiSystem {
        &self.system
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn constraint(&self) -> &ConstraintMatrix {
        &self.constraint
    }

    pub fn horizon(&self) -> f64 {
        self.constraint.horizon()
    }

    pub fn n_intervals(&self) -> usize {
        self.constraint.n_intervals()
    }

    pub fn delta(&self) -> f64 {
        self.constraint.delta()
    }

    /// Right-hand side `-ξ` of `G u = -ξ`.
    pub fn rhs(&self) -> DVector<f64> {
        -&self.xi
    }

    /// `‖G u + ξ‖∞`.
    pub fn residual(&self, u: &[f64]) -> f64 {
        (self.constraint.apply(u) + &self.xi).amax()
    }

    pub fn residual_tolerance(&self) -> f64 {
        FEASIBILITY_TOL * (1.0 + self.xi.amax())
    }

    pub fn is_feasible(&self, u: &[f64]) -> bool {
        u.len() == self.n_intervals()
            && u.iter().all(|v| v.abs() <= 1.0 + BANG_TOL)
            && self.residual(u) <= self.residual_tolerance()
    }

    fn not_reachable(&self) -> HandsoffError {
        HandsoffError::NotReachable { horizon: self.horizon() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    L1Vertex,
    ReweightedLp,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::L1Vertex => "l1_vertex",
            SolveMethod::ReweightedLp => "reweighted_lp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolveResult {
    pub control: ControlSignal,
    /// Optimal L1 value (`V1(ξ)`) for LP-vertex paths; the control's L1 norm otherwise.
    pub l1_value: f64,
    /// Support measure of `control` at zero tolerance [`DEFAULT_ZERO_TOL`].
    pub l0_value: f64,
    pub fractional_count: usize,
    /// Fractional samples of the raw LP vertex, before any polishing.
    pub vertex_fractional_count: usize,
    pub method: SolveMethod,
    pub iterations: usize,
    pub converged: bool,
}

/// Variables frozen at a bound by the optimality conditions of an earlier solve.
#[derive(Debug, Clone, PartialEq)]
struct Face {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Face {
    fn full(n_vars: usize) -> Self {
        Self { lower: vec![0.0; n_vars], upper: vec![1.0; n_vars] }
    }

    /// Freeze every nonbasic variable with a nonzero reduced cost.
    fn optimal_face_of(sol: &LpSolution, base: &Face, cost_scale: f64) -> Self {
        let tol = OPTIMALITY_TOL * cost_scale.max(1.0);
        let mut face = base.clone();
        for (j, &d) in sol.reduced_costs.iter().enumerate() {
            if sol.basis.binary_search(&j).is_ok() {
                continue;
            }
            if d > tol {
                face.upper[j] = face.lower[j];
            } else if d < -tol {
                face.lower[j] = face.upper[j];
            }
        }
        face
    }
}

struct WeightedVertex {
    values: Vec<f64>,
    /// Primary objective of the stage-one LP.
    objective: f64,
    face: Face,
}

fn split_lp(problem: &TranscribedProblem, cost: Vec<f64>, face: &Face) -> Result<LinearProgram> {
    let g = problem.constraint.matrix();
    let (n, big_n) = (g.nrows(), g.ncols());
    let mut a = DMatrix::zeros(n, 2 * big_n);
    a.view_mut((0, 0), (n, big_n)).copy_from(g);
    a.view_mut((0, big_n), (n, big_n)).copy_from(&(-g));
    LinearProgram::new(cost, a, problem.rhs().iter().copied().collect(), face.lower.clone(), face.upper.clone())
}

fn merge_split(values: &[f64], big_n: usize) -> Vec<f64> {
    (0..big_n).map(|k| values[k] - values[big_n + k]).collect()
}

/// Weighted L1 vertex over `face`, with the second-moment tie-break.
fn weighted_vertex(problem: &TranscribedProblem, weights: &[f64], face: Option<&Face>) -> Result<WeightedVertex> {
    let big_n = problem.n_intervals();
    let delta = problem.delta();
    let base = face.cloned().unwrap_or_else(|| Face::full(2 * big_n));
    let cost: Vec<f64> = weights.iter().chain(weights).map(|w| delta * w).collect();
    let cost_scale = cost.iter().fold(0.0, |m: f64, c| m.max(c.abs()));

    let lp1 = split_lp(problem, cost.clone(), &base)?;
    let sol = lp::solve(&lp1)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(problem.not_reachable()),
        LpStatus::Unbounded => return Err(HandsoffError::Lp("bounded LP reported unbounded".into())),
    }
    let face = Face::optimal_face_of(&sol, &base, cost_scale);

    let horizon = problem.horizon();
    let moment: Vec<f64> = (0..big_n)
        .map(|k| {
            let t = (k as f64 + 0.5) * delta / horizon;
            delta * t * t
        })
        .collect();
    let lp2 = split_lp(problem, moment.iter().chain(&moment).copied().collect(), &face)?;
    let tie = lp::solve(&lp2)?;
    let mut values = sol.values.clone();
    if tie.status == LpStatus::Optimal {
        let primary: f64 = cost.iter().zip(&tie.values).map(|(c, v)| c * v).sum();
        if primary <= sol.objective + 1e-9 * (1.0 + sol.objective.abs()) && lp1.residual(&tie.values) <= lp1.rhs_scale() * 1e-9
        {
            values = tie.values;
        }
    }
    Ok(WeightedVertex { values: merge_split(&values, big_n), objective: sol.objective, face })
}

/// Result of snapping/rounding the fractional samples of a vertex.
#[derive(Debug, Clone)]
struct Polished {
    values: Vec<f64>,
    fractional_count: usize,
}

fn snap(v: f64) -> f64 {
    if v.abs() <= BANG_TOL {
        0.0
    } else if (v - 1.0).abs() <= BANG_TOL {
        1.0
    } else if (v + 1.0).abs() <= BANG_TOL {
        -1.0
    } else {
        v
    }
}

fn l1_sum(values: &[f64], delta: f64) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() * delta
}

/// Round the fractional samples of `u` into `{-1, 0, 1}` where the terminal
/// constraint still holds, re-solving for whichever fractional samples remain.
fn polish(problem: &TranscribedProblem, u: &[f64], l1_ref: f64) -> Polished {
    let delta = problem.delta();
    let tol = problem.residual_tolerance();
    let snapped: Vec<f64> = u.iter().map(|&v| snap(v)).collect();
    let count = |vals: &[f64]| vals.iter().filter(|&&v| !is_bang_off_bang(v, BANG_TOL)).count();

    let start = if problem.residual(&snapped) <= tol { snapped } else { u.to_vec() };
    let frac: Vec<usize> = (0..start.len()).filter(|&k| !is_bang_off_bang(start[k], BANG_TOL)).collect();
    if frac.is_empty() || frac.len() > MAX_POLISH_SET {
        let fractional_count = count(&start);
        return Polished { values: start, fractional_count };
    }

    let g = problem.constraint.matrix();
    let mut base_rhs = problem.rhs();
    for (k, &v) in start.iter().enumerate() {
        if v != 0.0 && !frac.contains(&k) {
            base_rhs.axpy(-v, &g.column(k), 1.0);
        }
    }

    for size in (1..=frac.len()).rev() {
        for subset in combinations(frac.len(), size) {
            let rounded: Vec<usize> = subset.iter().map(|&i| frac[i]).collect();
            let rest: Vec<usize> = frac.iter().copied().filter(|k| !rounded.contains(k)).collect();
            for mask in 0..(1u32 << size) {
                let mut rhs = base_rhs.clone();
                let mut candidate = start.clone();
                for (bit, &k) in rounded.iter().enumerate() {
                    let val = if mask & (1 << bit) == 0 { 0.0 } else { start[k].signum() };
                    candidate[k] = val;
                    if val != 0.0 {
                        rhs.axpy(-val, &g.column(k), 1.0);
                    }
                }
                if !rest.is_empty() {
                    let sub = DMatrix::from_fn(g.nrows(), rest.len(), |i, j| g[(i, rest[j])]);
                    let Ok(v) = sub.clone().svd(true, true).solve(&rhs, 1e-14) else {
                        continue;
                    };
                    if v.iter().any(|x| x.abs() > 1.0 + 1e-12) {
                        continue;
                    }
                    for (j, &k) in rest.iter().enumerate() {
                        candidate[k] = snap(v[j].clamp(-1.0, 1.0));
                    }
                }
                if problem.residual(&candidate) <= tol && l1_sum(&candidate, delta) <= l1_ref + 1e-8 {
                    let fractional_count = count(&candidate);
                    return Polished { values: candidate, fractional_count };
                }
            }
        }
    }
    let fractional_count = count(&start);
    Polished { values: start, fractional_count }
}

/// Index subsets of `0..n` with `k` elements, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            extend(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn support(values: &[f64]) -> Vec<bool> {
    values.iter().map(|v| v.abs() > DEFAULT_ZERO_TOL).collect()
}

fn build_result(
    problem: &TranscribedProblem,
    values: Vec<f64>,
    l1_value: Option<f64>,
    vertex_fractional_count: usize,
    method: SolveMethod,
    iterations: usize,
    converged: bool,
) -> Result<SparseSolveResult> {
    let control = ControlSignal::new(problem.horizon(), values)?;
    let l1_value = l1_value.unwrap_or_else(|| control.l1_norm());
    Ok(SparseSolveResult {
        l0_value: control.l0_norm(DEFAULT_ZERO_TOL),
        fractional_count: control.fractional_count(BANG_TOL),
        control,
        l1_value,
        vertex_fractional_count,
        method,
        iterations,
        converged,
    })
}

/// L1-optimal control at an LP vertex (at most `n` fractional samples).
pub fn solve_l1(problem: &TranscribedProblem) -> Result<SparseSolveResult> {
    let ones = vec![1.0; problem.n_intervals()];
    let v = weighted_vertex(problem, &ones, None)?;
    let frac = v.values.iter().filter(|&&x| !is_bang_off_bang(x, BANG_TOL)).count();
    build_result(problem, v.values, Some(v.objective), frac, SolveMethod::L1Vertex, 1, true)
}

/// Maximum hands-off control: L1 vertex, then polish into bang-off-bang form.
///
/// When the switch times fall between grid points no exact polish exists; the
/// control is then refined by reweighting inside the L1-optimal face and the
/// remaining fractional samples are reported in `fractional_count`.
pub fn solve_max_handsoff(problem: &TranscribedProblem) -> Result<SparseSolveResult> {
    let big_n = problem.n_intervals();
    let ones = vec![1.0; big_n];
    let vertex = weighted_vertex(problem, &ones, None)?;
    let vertex_frac = vertex.values.iter().filter(|&&x| !is_bang_off_bang(x, BANG_TOL)).count();
    let v1 = vertex.objective;
    let polished = polish(problem, &vertex.values, v1);
    if polished.fractional_count == 0 {
        return build_result(problem, polished.values, Some(v1), vertex_frac, SolveMethod::L1Vertex, 1, true);
    }

    let delta = problem.delta();
    let l0_of = |vals: &[f64]| support(vals).iter().filter(|&&s| s).count() as f64 * delta;
    let mut best = polished.values;
    let mut best_key = (l0_of(&best), polished.fractional_count);
    let mut method = SolveMethod::L1Vertex;
    let mut iterations = 1;
    let mut converged = false;
    let mut current = vertex.values.clone();
    let mut prev_support = support(&current);
    for it in 1..=DEFAULT_MAX_ITER {
        let weights: Vec<f64> = current.iter().map(|u| (u.abs() + DEFAULT_EPSILON).powf(DEFAULT_P - 1.0)).collect();
        let step = weighted_vertex(problem, &weights, Some(&vertex.face))?;
        iterations = it + 1;
        let candidate = polish(problem, &step.values, v1);
        let key = (l0_of(&candidate.values), candidate.fractional_count);
        if key.0 < best_key.0 - 0.5 * delta || (key.0 <= best_key.0 + 0.5 * delta && key.1 < best_key.1) {
            best = candidate.values;
            best_key = key;
            method = SolveMethod::ReweightedLp;
        }
        let sup = support(&step.values);
        current = step.values;
        if sup == prev_support {
            converged = true;
            break;
        }
        prev_support = sup;
    }
    build_result(problem, best, Some(v1), vertex_frac, method, iterations, converged)
}

/// Iteratively reweighted L1 surrogate for minimizing `‖u‖_p^p`, `0 < p < 1`.
///
/// Starts from unit weights and updates `w_k = (|u_k| + ε)^{p-1}` until the
/// support stops changing. Returns the sparsest iterate seen (earliest on ties).
pub fn solve_reweighted_lp(problem: &TranscribedProblem, p: f64, max_iter: usize, epsilon: f64) -> Result<SparseSolveResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(HandsoffError::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(HandsoffError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(HandsoffError::InvalidArgument("max_iter must be at least 1".into()));
    }
    let big_n = problem.n_intervals();
    let delta = problem.delta();
    let mut weights = vec![1.0; big_n];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut first_frac = 0;
    let mut prev_support: Option<Vec<bool>> = None;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=max_iter {
        iterations = it;
        let step = weighted_vertex(problem, &weights, None)?;
        let snapped: Vec<f64> = step.values.iter().map(|&v| snap(v)).collect();
        let values = if problem.residual(&snapped) <= problem.residual_tolerance() { snapped } else { step.values };
        if it == 1 {
            first_frac = values.iter().filter(|&&x| !is_bang_off_bang(x, BANG_TOL)).count();
        }
        let sup = support(&values);
        let l0 = sup.iter().filter(|&&s| s).count() as f64 * delta;
        if best.as_ref().is_none_or(|(_, b)| l0 < b - 0.5 * delta) {
            best = Some((values.clone(), l0));
        }
        if prev_support.as_ref() == Some(&sup) {
            converged = true;
            break;
        }
        weights = values.iter().map(|u| (u.abs() + epsilon).powf(p - 1.0)).collect();
        prev_support = Some(sup);
    }
    let (values, _) = best.expect("at least one iteration ran");
    build_result(problem, values, None, first_frac, SolveMethod::ReweightedLp, iterations, converged)
}

/// `V(ξ) = V1(ξ)`: the optimal L1 value, or not-reachable.
pub fn value(problem: &TranscribedProblem) -> Result<f64> {
    value_with_duals(problem).map(|(v, _)| v)
}

/// Optimal value and the row duals `y` of `G u = -ξ`; `-y` is a subgradient of `V` at `ξ`.
pub fn value_with_duals(problem: &TranscribedProblem) -> Result<(f64, Vec<f64>)> {
    let big_n = problem.n_intervals();
    let cost = vec![problem.delta(); 2 * big_n];
    let lp = split_lp(problem, cost, &Face::full(2 * big_n))?;
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.duals)),
        LpStatus::Infeasible => Err(problem.not_reachable()),
        LpStatus::Unbounded => Err(HandsoffError::Lp("bounded LP reported unbounded".into())),
    }
}

impl TranscribedProblem {
    /// Phase-1 feasibility of `G u = -ξ`, `|u_k| ≤ 1`.
    pub fn is_reachable(&self) -> Result<bool> {
        let big_n = self.n_intervals();
        let rhs: Vec<f64> = self.rhs().iter().copied().collect();
        let (ok, _) = lp::check_feasible(self.constraint.matrix(), &rhs, &vec![-1.0; big_n], &vec![1.0; big_n])?;
        Ok(ok)
    }
}

pub fn is_reachable(sys: &LtiSystem, xi: &[f64], horizon: f64, n_intervals: usize) -> Result<bool> {
    transcribe(sys, xi, horizon, n_intervals)?.is_reachable()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn di_problem(xi: [f64; 2], n: usize) -> TranscribedProblem {
        transcribe(&LtiSystem::double_integrator(), &xi, 5.0, n).unwrap()
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 2), vec![vec![0, 1]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    #[test]
    fn transcription_shape() {
        let p = di_problem([1.0, -1.0], 500);
        assert_eq!(p.constraint().matrix().shape(), (2, 500));
        assert_eq!(p.rhs().as_slice(), &[-1.0, 1.0]);
        assert!(transcribe(&LtiSystem::double_integrator(), &[1.0], 5.0, 10).is_err());
        assert!(transcribe(&LtiSystem::double_integrator(), &[1.0, 0.0], -1.0, 10).is_err());
    }

    #[test]
    fn zero_state_gives_zero_control() {
        let p = di_problem([0.0, 0.0], 100);
        for r in [solve_l1(&p).unwrap(), solve_max_handsoff(&p).unwrap()] {
            assert!(r.control.values().iter().all(|&v| v == 0.0));
            assert_eq!(r.l0_value, 0.0);
            assert!(r.l1_value.abs() < 1e-12);
        }
        let r = solve_reweighted_lp(&p, 0.5, 20, 1e-4).unwrap();
        assert_eq!(r.l0_value, 0.0);
        assert_eq!(value(&p).unwrap(), 0.0);
        let scalar = transcribe(&LtiSystem::scalar_integrator(), &[0.0], 1.0, 10).unwrap();
        assert!(scalar.is_feasible(&[0.0; 10]));
    }

    #[test]
    fn unreachable_state_is_reported() {
        let p = transcribe(&LtiSystem::scalar_integrator(), &[2.0], 1.0, 20).unwrap();
        assert!(!p.is_reachable().unwrap());
        assert!(matches!(solve_l1(&p), Err(HandsoffError::NotReachable { .. })));
        assert!(matches!(solve_max_handsoff(&p), Err(HandsoffError::NotReachable { .. })));
        assert!(matches!(value(&p), Err(HandsoffError::NotReachable { .. })));
        assert!(matches!(solve_reweighted_lp(&p, 0.5, 5, 1e-4), Err(HandsoffError::NotReachable { .. })));
    }

    #[test]
    fn example_instance_l1_value() {
        let p = di_problem([1.0, -1.0], 500);
        assert!(p.is_reachable().unwrap());
        let r = solve_l1(&p).unwrap();
        assert!((r.l1_value - 1.0).abs() < 1e-6);
        assert!(r.vertex_fractional_count <= 2);
        assert!(p.residual(r.control.values()) <= p.residual_tolerance());
        assert!((value(&p).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn example_instance_handsoff_support() {
        let p = di_problem([1.0, -1.0], 500);
        let r = solve_max_handsoff(&p).unwrap();
        assert_eq!(r.fractional_count, 0);
        let (first, last) = r.control.support_bounds(DEFAULT_ZERO_TOL).unwrap();
        assert!((r.control.interval_start(first) - 0.5).abs() <= 0.01 + 1e-12);
        assert!((r.control.interval_start(last + 1) - 1.5).abs() <= 0.01 + 1e-12);
        assert!((r.l0_value - 1.0).abs() <= 0.02);
        assert!((r.l0_value - r.l1_value).abs() <= 1e-6 * (1.0 + r.l1_value));
        assert!((r.control.l1_norm() - r.l1_value).abs() <= 1e-8);
    }

    #[test]
    fn reweighted_matches_handsoff() {
        let p = di_problem([1.0, -1.0], 500);
        let h = solve_max_handsoff(&p).unwrap();
        let r = solve_reweighted_lp(&p, 0.5, 20, 1e-4).unwrap();
        assert!((r.l0_value - h.l0_value).abs() <= 0.02 + 1e-12);
        assert!(p.is_feasible(r.control.values()));
    }

    #[test]
    fn reweighting_keeps_bang_off_bang_support() {
        let p = di_problem([1.0, -1.0], 500);
        let r = solve_max_handsoff(&p).unwrap();
        let u = r.control.values();
        let weights: Vec<f64> = u.iter().map(|x| (x.abs() + 1e-4).powf(-0.5)).collect();
        let next = weighted_vertex(&p, &weights, None).unwrap();
        assert_eq!(support(&next.values), support(u));
    }

    #[test]
    fn value_is_even_for_double_integrator() {
        let p = di_problem([0.7, -1.3], 200);
        let v = value(&p).unwrap();
        let w = value(&p.with_state(&[-0.7, 1.3]).unwrap()).unwrap();
        assert!((v - w).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_reweighting_parameters() {
        let p = di_problem([0.0, 0.0], 10);
        assert!(solve_reweighted_lp(&p, 1.0, 5, 1e-4).is_err());
        assert!(solve_reweighted_lp(&p, 0.5, 0, 1e-4).is_err());
        assert!(solve_reweighted_lp(&p, 0.5, 5, 0.0).is_err());
    }

    #[test]
    fn grid_refinement_does_not_increase_value() {
        let coarse = value(&di_problem([1.2, 0.4], 100)).unwrap();
        let fine = value(&di_problem([1.2, 0.4], 200)).unwrap();
        assert!(fine <= coarse + 1e-8);
    }
}
