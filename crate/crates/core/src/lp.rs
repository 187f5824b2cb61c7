//! Dense bounded-variable revised simplex.
//!
//! Solves `min cᵀv  s.t.  A v = b,  l ≤ v ≤ u` and returns a basic (vertex)
//! optimum together with row duals `y` and reduced costs `d = c - Aᵀy`.
//! Phase 1 drives one artificial per row to zero; phase 2 optimizes the real
//! cost with the artificials pinned at zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{HandsoffError, Result};

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const OPTIMALITY_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const RATIO_TIE_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 50;
const DEGENERACY_THRESHOLD: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Structural variables in the final basis, ascending.
    pub basis: Vec<usize>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>, eq_matrix: DMatrix<f64>, eq_rhs: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let lp = Self { cost, eq_matrix, eq_rhs, lower, upper };
        lp.validate()?;
        Ok(lp)
    }

    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn n_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let m = self.cost.len();
        let r = self.eq_rhs.len();
        if self.eq_matrix.nrows() != r || self.eq_matrix.ncols() != m {
            return Err(HandsoffError::DimensionMismatch(format!(
                "constraint matrix is {}x{}, expected {r}x{m}",
                self.eq_matrix.nrows(),
                self.eq_matrix.ncols()
            )));
        }
        if self.lower.len() != m || self.upper.len() != m {
            return Err(HandsoffError::DimensionMismatch("bound vectors must match the variable count".into()));
        }
        for j in 0..m {
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(HandsoffError::InvalidArgument(format!("variable {j} has empty bounds")));
            }
        }
        if self.cost.iter().chain(&self.eq_rhs).chain(self.eq_matrix.iter()).any(|v| !v.is_finite()) {
            return Err(HandsoffError::NonFinite("LP data must be finite".into()));
        }
        Ok(())
    }

    /// `‖A v - b‖∞`.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        let ax = &self.eq_matrix * x;
        ax.iter().zip(&self.eq_rhs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest amount by which `v` leaves its box.
    pub fn bound_violation(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .fold(0.0, |m, (&x, (&l, &u))| m.max(l - x).max(x - u))
    }

    pub fn rhs_scale(&self) -> f64 {
        1.0 + self.eq_rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()))
    }
}

impl LpSolution {
    /// `bᵀy + Σ_j d_j v_j` over the box; equals the primal objective at optimality.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let by: f64 = lp.eq_rhs.iter().zip(&self.duals).map(|(b, y)| b * y).sum();
        let bound_terms: f64 = self
            .reduced_costs
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                if d > 0.0 {
                    d * lp.lower[j]
                } else if d < 0.0 {
                    d * lp.upper[j]
                } else {
                    0.0
                }
            })
            .sum();
        by + bound_terms
    }

    /// Worst `|d_j|` times the distance of `v_j` to the bound its sign selects.
    pub fn complementary_slackness(&self, lp: &LinearProgram) -> f64 {
        self.reduced_costs
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                let gap = if d > 0.0 {
                    self.values[j] - lp.lower[j]
                } else if d < 0.0 {
                    lp.upper[j] - self.values[j]
                } else {
                    0.0
                };
                (d * gap).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Count of variables strictly inside their bounds.
    pub fn interior_count(&self, lp: &LinearProgram, tol: f64) -> usize {
        self.values
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v > lp.lower[j] + tol && v < lp.upper[j] - tol)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Free,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    r: usize,
    /// Sign of each artificial column `±e_i`.
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.n_vars();
        let r = lp.n_rows();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = vec![0.0; m + r];
        let mut state = vec![VarState::AtLower; m + r];
        for j in 0..m {
            if lower[j].is_finite() {
                x[j] = lower[j];
                state[j] = VarState::AtLower;
            } else if upper[j].is_finite() {
                x[j] = upper[j];
                state[j] = VarState::AtUpper;
            } else {
                x[j] = 0.0;
                state[j] = VarState::Free;
            }
        }
        let mut residual = DVector::from_column_slice(&lp.eq_rhs);
        for j in 0..m {
            if x[j] != 0.0 {
                residual.axpy(-x[j], &lp.eq_matrix.column(j), 1.0);
            }
        }
        let mut art_sign = vec![1.0; r];
        let mut basis = Vec::with_capacity(r);
        let mut binv = DMatrix::zeros(r, r);
        for i in 0..r {
            art_sign[i] = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
            x[m + i] = residual[i].abs();
            state[m + i] = VarState::Basic;
            basis.push(m + i);
            binv[(i, i)] = art_sign[i];
        }
        lower.extend(std::iter::repeat_n(0.0, r));
        upper.extend(std::iter::repeat_n(f64::INFINITY, r));
        Self {
            lp,
            m,
            r,
            art_sign,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            pivots_since_refactor: 0,
            iterations: 0,
            max_iterations: 100 * (m + r) + 1000,
        }
    }

    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.m {
            self.lp.eq_matrix.column(j).into_owned()
        } else {
            let mut e = DVector::zeros(self.r);
            e[j - self.m] = self.art_sign[j - self.m];
            e
        }
    }

    fn dot_column(&self, y: &DVector<f64>, j: usize) -> f64 {
        if j < self.m {
            self.lp.eq_matrix.column(j).dot(y)
        } else {
            self.art_sign[j - self.m] * y[j - self.m]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let mut bmat = DMatrix::zeros(self.r, self.r);
        for (i, &j) in self.basis.iter().enumerate() {
            bmat.set_column(i, &self.column(j));
        }
        self.binv = bmat
            .try_inverse()
            .ok_or_else(|| HandsoffError::Lp("basis matrix became singular".into()))?;
        // x_B = B⁻¹ (b - N x_N)
        let mut rhs = DVector::from_column_slice(&self.lp.eq_rhs);
        for j in 0..self.m + self.r {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                rhs.axpy(-self.x[j], &self.column(j), 1.0);
            }
        }
        let xb = &self.binv * rhs;
        for (i, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[i];
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn duals(&self, cost: &[f64]) -> DVector<f64> {
        let cb = DVector::from_iterator(self.r, self.basis.iter().map(|&j| cost[j]));
        self.binv.tr_mul(&cb)
    }

    fn replace_basis(&mut self, pos: usize, entering: usize, alpha: &DVector<f64>) {
        let pivot = alpha[pos];
        let mut prow = self.binv.row(pos).into_owned();
        prow /= pivot;
        for i in 0..self.r {
            if i != pos && alpha[i] != 0.0 {
                let f = alpha[i];
                for c in 0..self.r {
                    self.binv[(i, c)] -= f * prow[c];
                }
            }
        }
        self.binv.set_row(pos, &prow);
        self.basis[pos] = entering;
        self.pivots_since_refactor += 1;
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase> {
        let n_total = self.m + self.r;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(HandsoffError::Lp(format!("iteration limit {} reached", self.max_iterations)));
            }
            let bland = degenerate_run >= DEGENERACY_THRESHOLD;
            let y = self.duals(cost);

            // Pricing: Dantzig with lowest-index ties, Bland when stalling.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..n_total {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = cost[j] - self.dot_column(&y, j);
                let dir = match st {
                    VarState::AtLower if d < -OPTIMALITY_TOL => 1.0,
                    VarState::AtUpper if d > OPTIMALITY_TOL => -1.0,
                    VarState::Free if d.abs() > OPTIMALITY_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(Phase::Optimal);
            };

            let alpha = &self.binv * self.column(q);
            // Ratio test over basic variables plus the entering variable's own range.
            let mut theta = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0f64;
            for i in 0..self.r {
                let a = alpha[i];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basis[i];
                let delta = -dir * a;
                let (limit, to_upper) = if delta < 0.0 {
                    if !self.lower[j].is_finite() {
                        continue;
                    }
                    (((self.x[j] - self.lower[j]) / -delta).max(0.0), false)
                } else {
                    if !self.upper[j].is_finite() {
                        continue;
                    }
                    (((self.upper[j] - self.x[j]) / delta).max(0.0), true)
                };
                let better = if limit < theta - RATIO_TIE_TOL {
                    true
                } else if limit <= theta + RATIO_TIE_TOL {
                    // Ties with the bound flip keep the flip; ties between rows
                    // go to the larger pivot (Bland: the lower index).
                    match leave {
                        None => false,
                        Some((pos, _)) if bland => j < self.basis[pos],
                        Some((pos, _)) => {
                            a.abs() > leave_alpha.abs() * (1.0 + 1e-9)
                                || (a.abs() >= leave_alpha.abs() * (1.0 - 1e-9) && j < self.basis[pos])
                        }
                    }
                } else {
                    false
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                    leave_alpha = a;
                }
            }
            if theta.is_infinite() {
                return Ok(Phase::Unbounded);
            }
            self.iterations += 1;
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            if theta != 0.0 {
                self.x[q] += dir * theta;
                for i in 0..self.r {
                    if alpha[i] != 0.0 {
                        let j = self.basis[i];
                        self.x[j] -= dir * theta * alpha[i];
                    }
                }
            }
            match leave {
                None => {
                    // Bound flip; the basis is unchanged.
                    if dir > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = VarState::AtUpper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = VarState::AtLower;
                    }
                }
                Some((pos, to_upper)) => {
                    let out = self.basis[pos];
                    if to_upper {
                        self.x[out] = self.upper[out];
                        self.state[out] = VarState::AtUpper;
                    } else {
                        self.x[out] = self.lower[out];
                        self.state[out] = VarState::AtLower;
                    }
                    self.state[q] = VarState::Basic;
                    self.replace_basis(pos, q, &alpha);
                    if self.pivots_since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    /// Pivot zero-valued artificials out of the basis where a structural column allows it.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for pos in 0..self.r {
            let j = self.basis[pos];
            if j < self.m {
                continue;
            }
            let row = self.binv.row(pos).into_owned();
            let mut pick: Option<(usize, f64)> = None;
            for k in 0..self.m {
                if self.state[k] == VarState::Basic {
                    continue;
                }
                let a = (row.clone() * self.lp.eq_matrix.column(k))[(0, 0)];
                if a.abs() > 1e-9 && pick.is_none_or(|(_, b)| a.abs() > b.abs() * (1.0 + 1e-9)) {
                    pick = Some((k, a));
                }
            }
            if let Some((k, _)) = pick {
                let alpha = &self.binv * self.column(k);
                self.state[j] = VarState::AtLower;
                self.x[j] = 0.0;
                self.state[k] = VarState::Basic;
                self.replace_basis(pos, k, &alpha);
            }
        }
        self.refactor()
    }
}

/// Solve `lp` to a vertex optimum, or report infeasible/unbounded.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let (m, r) = (lp.n_vars(), lp.n_rows());
    let mut sx = Simplex::new(lp);

    let mut phase1_cost = vec![0.0; m + r];
    for c in phase1_cost.iter_mut().skip(m) {
        *c = 1.0;
    }
    sx.refactor()?;
    sx.run(&phase1_cost)?;
    sx.refactor()?;
    let infeasibility = (m..m + r).map(|j| sx.x[j].abs()).fold(0.0, f64::max);
    if infeasibility > FEASIBILITY_TOL * lp.rhs_scale() {
        return Ok(finish(&sx, LpStatus::Infeasible, &phase1_cost));
    }

    for j in m..m + r {
        sx.upper[j] = 0.0;
        if sx.state[j] != VarState::Basic {
            sx.x[j] = 0.0;
            sx.state[j] = VarState::AtLower;
        }
    }
    sx.drive_out_artificials()?;

    let mut cost = lp.cost.clone();
    cost.extend(std::iter::repeat_n(0.0, r));
    let outcome = sx.run(&cost)?;
    sx.refactor()?;
    let status = match outcome {
        Phase::Optimal => LpStatus::Optimal,
        Phase::Unbounded => LpStatus::Unbounded,
    };
    Ok(finish(&sx, status, &cost))
}

fn finish(sx: &Simplex<'_>, status: LpStatus, cost: &[f64]) -> LpSolution {
    let m = sx.m;
    let mut values: Vec<f64> = sx.x[..m].to_vec();
    // Clamp round-off so nonbasic and nearly-bound values sit exactly on the box.
    for (j, v) in values.iter_mut().enumerate() {
        *v = v.clamp(sx.lower[j], sx.upper[j]);
    }
    let y = sx.duals(cost);
    let reduced_costs = (0..m).map(|j| cost[j] - sx.dot_column(&y, j)).collect();
    let mut basis: Vec<usize> = sx.basis.iter().copied().filter(|&j| j < m).collect();
    basis.sort_unstable();
    let objective = if status == LpStatus::Optimal {
        sx.lp.cost.iter().zip(&values).map(|(c, v)| c * v).sum()
    } else {
        f64::NAN
    };
    LpSolution {
        status,
        values,
        objective,
        basis,
        duals: y.iter().copied().collect(),
        reduced_costs,
        iterations: sx.iterations,
    }
}

/// Phase-1 membership test; returns whether a feasible point exists and its residual.
pub fn check_feasible(eq_matrix: &DMatrix<f64>, eq_rhs: &[f64], lower: &[f64], upper: &[f64]) -> Result<(bool, f64)> {
    let m = eq_matrix.ncols();
    let lp = LinearProgram::new(vec![0.0; m], eq_matrix.clone(), eq_rhs.to_vec(), lower.to_vec(), upper.to_vec())?;
    let sol = solve(&lp)?;
    let residual = lp.residual(&sol.values);
    Ok((sol.status == LpStatus::Optimal, residual))
}
