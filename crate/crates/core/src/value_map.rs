//! Value-function sampling over state grids, with convexity, continuity and
//! reachable-set boundary probes. All probes re-solve the LP directly; nothing
//! is interpolated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HandsoffError, Result};
use crate::lti::LtiSystem;
use crate::solver::{self, transcribe, TranscribedProblem};

/// Slack on `V ≤ T` for reachable points.
pub const VALUE_BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || count == 0 || (count > 1 && max <= min) {
            return Err(HandsoffError::InvalidArgument(format!("bad axis {min}:{max}:{count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }
}

/// Sampled `V` over a 1-D or 2-D grid; `None` marks unreachable points.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub axes: Vec<GridAxis>,
    /// Row-major: the last axis varies fastest.
    pub values: Vec<Option<f64>>,
    pub horizon: f64,
    pub n_intervals: usize,
}

impl ValueField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.n_intervals as f64
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        let mut rest = flat;
        for (d, axis) in self.axes.iter().enumerate().rev() {
            idx[d] = rest % axis.count;
            rest /= axis.count;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, axis)| acc * axis.count + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, axis)| axis.coord(i)).collect()
    }

    pub fn get(&self, idx: &[usize]) -> Option<f64> {
        self.values[self.flat_index(idx)]
    }
}

/// Reusable evaluator of `V(ξ)` on one system and grid.
#[derive(Debug, Clone)]
pub struct ValueOracle {
    base: TranscribedProblem,
}

impl ValueOracle {
    pub fn new(sys: &LtiSystem, horizon: f64, n_intervals: usize) -> Result<Self> {
        let zero = vec![0.0; sys.n()];
        Ok(Self { base: transcribe(sys, &zero, horizon, n_intervals)? })
    }

    pub fn problem(&self, xi: &[f64]) -> Result<TranscribedProblem> {
        self.base.with_state(xi)
    }

    pub fn horizon(&self) -> f64 {
        self.base.horizon()
    }

    pub fn n_intervals(&self) -> usize {
        self.base.n_intervals()
    }

    pub fn system(&self) -> &LtiSystem {
        self.base.system()
    }

    /// `Some(V(ξ))`, or `None` when `ξ` is not reachable.
    pub fn value(&self, xi: &[f64]) -> Result<Option<f64>> {
        match solver::value(&self.problem(xi)?) {
            Ok(v) => Ok(Some(v)),
            Err(HandsoffError::NotReachable { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Value and Euclidean norm of the LP dual (a subgradient norm of `V`).
    pub fn value_and_slope(&self, xi: &[f64]) -> Result<Option<(f64, f64)>> {
        match solver::value_with_duals(&self.problem(xi)?) {
            Ok((v, y)) => Ok(Some((v, y.iter().map(|d| d * d).sum::<f64>().sqrt()))),
            Err(HandsoffError::NotReachable { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn is_reachable(&self, xi: &[f64]) -> Result<bool> {
        self.problem(xi)?.is_reachable()
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HandsoffError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// One LP solve per grid point, `workers` threads; output order is the grid order.
pub fn sample_value_field(
    sys: &LtiSystem,
    axes: &[GridAxis],
    horizon: f64,
    n_intervals: usize,
    workers: usize,
) -> Result<ValueField> {
    if sys.n() > 2 {
        return Err(HandsoffError::InvalidArgument(format!("value grids support n ≤ 2, system has n = {}", sys.n())));
    }
    if axes.len() != sys.n() {
        return Err(HandsoffError::DimensionMismatch(format!(
            "{} grid axes for a system with n = {}",
            axes.len(),
            sys.n()
        )));
    }
    let oracle = ValueOracle::new(sys, horizon, n_intervals)?;
    let mut field = ValueField { axes: axes.to_vec(), values: Vec::new(), horizon, n_intervals };
    let total: usize = axes.iter().map(|a| a.count).product();
    let points: Vec<Vec<f64>> = (0..total).map(|i| field.point(i)).collect();
    let values: Vec<Result<Option<f64>>> =
        with_workers(workers, || points.par_iter().map(|xi| oracle.value(xi)).collect())?;
    field.values = values.into_iter().collect::<Result<_>>()?;
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConvexityReport {
    pub trials: usize,
    /// `max V((1-λ)ξ + λη) - [(1-λ)V(ξ) + λV(η)]` over all trials.
    pub max_violation: f64,
}

/// Random convexity checks of `V` on reachable pairs drawn from `sample_box`.
pub fn convexity_probe(
    oracle: &ValueOracle,
    sample_box: &[(f64, f64)],
    trials: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if trials == 0 {
        return Err(HandsoffError::InvalidArgument("trials must be at least 1".into()));
    }
    if sample_box.len() != oracle.system().n() {
        return Err(HandsoffError::DimensionMismatch("sample box must have one range per state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<(Vec<f64>, f64)> {
        for _ in 0..10_000 {
            let xi: Vec<f64> = sample_box.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
            if let Some(v) = oracle.value(&xi)? {
                return Ok((xi, v));
            }
        }
        Err(HandsoffError::InvalidArgument("sample box contains no reachable states".into()))
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let (xi, v_xi) = draw(&mut rng)?;
        let (eta, v_eta) = draw(&mut rng)?;
        let lambda: f64 = rng.gen_range(0.0..1.0);
        let mid: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        let v_mid = oracle
            .value(&mid)?
            .ok_or_else(|| HandsoffError::Lp("convex combination of reachable states reported unreachable".into()))?;
        worst = worst.max(v_mid - ((1.0 - lambda) * v_xi + lambda * v_eta));
    }
    Ok(ConvexityReport { trials, max_violation: worst })
}

/// Direct convexity gap for one pair.
pub fn convexity_gap(oracle: &ValueOracle, xi: &[f64], eta: &[f64], lambda: f64) -> Result<Option<f64>> {
    let (Some(a), Some(b)) = (oracle.value(xi)?, oracle.value(eta)?) else {
        return Ok(None);
    };
    let mid: Vec<f64> = xi.iter().zip(eta).map(|(x, y)| (1.0 - lambda) * x + lambda * y).collect();
    Ok(oracle.value(&mid)?.map(|m| m - ((1.0 - lambda) * a + lambda * b)))
}

/// A grid cell whose corners straddle the level set `V = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCell {
    /// Lowest-corner multi-index.
    pub index: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Cells with one corner safely inside (`V < T - 2Δ`) and another outside
/// (unreachable or `V ≥ T - 2Δ`). Requires a controllable pair.
pub fn boundary_estimate(field: &ValueField, sys: &LtiSystem) -> Result<Vec<BoundaryCell>> {
    let rank = sys.controllability_rank();
    if rank < sys.n() {
        return Err(HandsoffError::Uncontrollable { rank, n: sys.n() });
    }
    let eps = 2.0 * field.delta();
    let level = field.horizon - eps;
    let inside = |v: Option<f64>| matches!(v, Some(x) if x < level);
    let dims = field.axes.len();
    let cell_counts: Vec<usize> = field.axes.iter().map(|a| a.count.saturating_sub(1)).collect();
    let n_cells: usize = cell_counts.iter().product();
    let mut cells = Vec::new();
    for c in 0..n_cells {
        let mut idx = vec![0; dims];
        let mut rest = c;
        for d in (0..dims).rev() {
            idx[d] = rest % cell_counts[d];
            rest /= cell_counts[d];
        }
        let (mut any_in, mut any_out) = (false, false);
        for corner in 0..(1usize << dims) {
            let cidx: Vec<usize> = (0..dims).map(|d| idx[d] + ((corner >> d) & 1)).collect();
            if inside(field.get(&cidx)) {
                any_in = true;
            } else {
                any_out = true;
            }
        }
        if any_in && any_out {
            let lower = (0..dims).map(|d| field.axes[d].coord(idx[d])).collect();
            let upper = (0..dims).map(|d| field.axes[d].coord(idx[d] + 1)).collect();
            cells.push(BoundaryCell { index: idx, lower, upper });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PointOscillation {
    pub point: Vec<f64>,
    pub oscillation: f64,
    /// Largest dual norm at the point and its neighbours: a local Lipschitz bound.
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContinuityReport {
    pub radius: f64,
    pub max_oscillation: f64,
    pub points: Vec<PointOscillation>,
    /// Indices of probe points skipped because a neighbour left the reachable set.
    pub skipped: Vec<usize>,
}

fn neighbours(xi: &[f64], radius: f64) -> Vec<Vec<f64>> {
    match xi.len() {
        1 => vec![vec![xi[0] - radius], vec![xi[0] + radius]],
        _ => (0..8)
            .map(|k| {
                let a = k as f64 * std::f64::consts::FRAC_PI_4;
                let mut p = xi.to_vec();
                p[0] += radius * a.cos();
                p[1] += radius * a.sin();
                p
            })
            .collect(),
    }
}

/// `max |V(ξ + δ) - V(ξ)|` over the neighbours of each point at `radius`.
///
/// By convexity `|V(ξ+δ) - V(ξ)| ≤ max(‖g(ξ)‖, ‖g(ξ+δ)‖)·‖δ‖` for subgradients
/// `g`, so each point also reports that dual-norm bound.
pub fn continuity_probe(oracle: &ValueOracle, points: &[Vec<f64>], radius: f64) -> Result<ContinuityReport> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(HandsoffError::InvalidArgument(format!("radius must be nonnegative, got {radius}")));
    }
    if oracle.system().n() > 2 {
        return Err(HandsoffError::InvalidArgument("continuity probe supports n ≤ 2".into()));
    }
    let mut report = ContinuityReport { radius, max_oscillation: 0.0, points: Vec::new(), skipped: Vec::new() };
    'points: for (i, xi) in points.iter().enumerate() {
        let Some((v0, slope0)) = oracle.value_and_slope(xi)? else {
            report.skipped.push(i);
            continue;
        };
        let mut osc = 0.0f64;
        let mut lipschitz = slope0;
        for nb in neighbours(xi, radius) {
            let Some((v, slope)) = oracle.value_and_slope(&nb)? else {
                report.skipped.push(i);
                continue 'points;
            };
            osc = osc.max((v - v0).abs());
            lipschitz = lipschitz.max(slope);
        }
        report.max_oscillation = report.max_oscillation.max(osc);
        report.points.push(PointOscillation { point: xi.clone(), oscillation: osc, lipschitz });
    }
    Ok(report)
}
