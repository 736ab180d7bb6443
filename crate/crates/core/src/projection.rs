//! Box-constrained posterior sets, information projection onto them, and a
//! brute-force solver for the maximin inferential-gain game.
//!
//! The statistician picks `Q`, nature picks `P` from the constraint set, and
//! the payoff is the inferential gain `I(P || B) - I(P || Q)` against the
//! benchmark `B`. The value of that game equals the smallest divergence
//! `I(P || B)` over the set, attained at the I-projection of `B`. The
//! projection is computed directly by [`i_projection`]; [`maximin_bruteforce`]
//! searches the game on a grid and never calls the projection code, so the
//! two can be compared against each other.

use rayon::prelude::*;

use crate::distributions::{
    ensure_same_atoms, kl_raw, validate_atoms, ExtendedReal, FiniteDistribution,
};
use crate::{Error, Result};

/// Slack on the feasibility sums `sum(lower) <= 1 <= sum(upper)`.
const FEASIBILITY_TOLERANCE: f64 = 1e-12;
/// Tolerance for flagging a coordinate as sitting on one of its bounds.
const ACTIVE_TOLERANCE: f64 = 1e-12;
const MULTIPLIER_TOLERANCE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;
/// Largest number of grid points per player the brute-force search accepts.
const MAX_GRID_POINTS: usize = 20_000_000;

/// Posteriors `P` with `lower[i] <= P(i) <= upper[i]` and `sum P = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    atoms: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ConstraintSet {
    pub fn new<S: Into<String>>(atoms: Vec<S>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        validate_atoms(&atoms).map_err(|e| Error::InvalidConstraints(e.to_string()))?;
        if lower.len() != atoms.len() || upper.len() != atoms.len() {
            return Err(Error::InvalidConstraints(format!(
                "{} atoms, {} lower bounds, {} upper bounds",
                atoms.len(),
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            let in_unit = |v: f64| (0.0..=1.0).contains(&v);
            if !in_unit(lo) || !in_unit(hi) || lo > hi {
                return Err(Error::InvalidConstraints(format!(
                    "atom {:?} has bounds [{lo}, {hi}]",
                    atoms[i]
                )));
            }
        }
        let set = Self {
            atoms,
            lower,
            upper,
        };
        set.check_nonempty("bounds do not admit a probability vector")?;
        Ok(set)
    }

    /// The set whose only member is `p`.
    pub fn singleton(p: &FiniteDistribution) -> Self {
        Self {
            atoms: p.atoms().to_vec(),
            lower: p.probs().to_vec(),
            upper: p.probs().to_vec(),
        }
    }

    /// The whole simplex over `atoms`.
    pub fn unconstrained<S: Into<String>>(atoms: Vec<S>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![0.0; n], vec![1.0; n])
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, p: &FiniteDistribution, tolerance: f64) -> bool {
        p.atoms() == self.atoms.as_slice() && self.contains_raw(p.probs(), tolerance)
    }

    fn contains_raw(&self, p: &[f64], tolerance: f64) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo - tolerance && v <= hi + tolerance)
    }

    /// Bounds implied jointly by the box and the simplex equality.
    pub fn effective_bounds(&self, i: usize) -> (f64, f64) {
        let sum_lower: f64 = self.lower.iter().sum();
        let sum_upper: f64 = self.upper.iter().sum();
        let others_upper = sum_upper - self.upper[i];
        let others_lower = sum_lower - self.lower[i];
        let lo = self.lower[i].max(1.0 - others_upper).max(0.0);
        let hi = self.upper[i].min(1.0 - others_lower).min(1.0);
        (lo, hi.max(lo))
    }

    fn check_nonempty(&self, reason: &str) -> Result<()> {
        let sum_lower: f64 = self.lower.iter().sum();
        let sum_upper: f64 = self.upper.iter().sum();
        if sum_lower > 1.0 + FEASIBILITY_TOLERANCE || sum_upper < 1.0 - FEASIBILITY_TOLERANCE {
            return Err(Error::Infeasible {
                atoms: self.atoms.clone(),
                reason: format!("{reason}: sum(lower) = {sum_lower}, sum(upper) = {sum_upper}"),
            });
        }
        Ok(())
    }
}

/// Where a projected coordinate sits relative to its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    AtLower,
    AtUpper,
    Interior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub projection: FiniteDistribution,
    pub divergence_to_benchmark: ExtendedReal,
    pub active_constraints: Vec<Activity>,
}

impl ProjectionResult {
    fn new(
        set: &ConstraintSet,
        projection: FiniteDistribution,
        benchmark: &FiniteDistribution,
    ) -> Self {
        let divergence_to_benchmark = kl_raw(projection.probs(), benchmark.probs());
        let active_constraints = projection
            .probs()
            .iter()
            .zip(set.lower.iter().zip(&set.upper))
            .map(|(&p, (&lo, &hi))| {
                if (p - lo).abs() <= ACTIVE_TOLERANCE {
                    Activity::AtLower
                } else if (p - hi).abs() <= ACTIVE_TOLERANCE {
                    Activity::AtUpper
                } else {
                    Activity::Interior
                }
            })
            .collect();
        Self {
            projection,
            divergence_to_benchmark,
            active_constraints,
        }
    }
}

/// Restricts `set` to members with finite divergence from `benchmark`:
/// atoms the benchmark gives zero mass get an upper bound of zero.
pub fn finite_divergence_subset(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
) -> Result<ConstraintSet> {
    ensure_same_atoms(&set.atoms, benchmark.atoms())?;
    let mut tightened = set.clone();
    let mut forced_positive = Vec::new();
    let mut zero_mass = Vec::new();
    for (i, &b) in benchmark.probs().iter().enumerate() {
        if b == 0.0 {
            zero_mass.push(set.atoms[i].clone());
            if set.lower[i] > 0.0 {
                forced_positive.push(set.atoms[i].clone());
            }
            tightened.upper[i] = 0.0;
        }
    }
    if !forced_positive.is_empty() {
        return Err(Error::Infeasible {
            atoms: forced_positive,
            reason: "lower bound is positive where the benchmark has no mass".into(),
        });
    }
    tightened
        .check_nonempty("no member has finite divergence from the benchmark")
        .map_err(|e| match e {
            Error::Infeasible { reason, .. } => Error::Infeasible {
                atoms: zero_mass,
                reason,
            },
            other => other,
        })?;
    Ok(tightened)
}

/// Minimizer of `I(. || benchmark)` over `set`.
///
/// Two atoms use the closed form (the divergence is monotone on either side
/// of the benchmark, so the answer is the benchmark clamped into the
/// feasible interval). Larger spaces use [`kkt_projection`].
pub fn i_projection(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
) -> Result<ProjectionResult> {
    let set = finite_divergence_subset(set, benchmark)?;
    if let Some(trivial) = trivial_projection(&set, benchmark) {
        return Ok(trivial);
    }
    if set.len() == 2 {
        let (lo, hi) = set.effective_bounds(0);
        let p0 = benchmark.probs()[0].clamp(lo, hi);
        let projection =
            FiniteDistribution::from_parts_unchecked(set.atoms.clone(), vec![p0, 1.0 - p0]);
        return Ok(ProjectionResult::new(&set, projection, benchmark));
    }
    solve_multiplier(&set, benchmark, 0.0)
}

/// Dual solver for the projection, started from log-multiplier `start`.
///
/// Stationarity of the Lagrangian gives `p_i = clamp(b_i * exp(nu), l_i, u_i)`;
/// the normalization multiplier `nu` is found by bracketing from `start`
/// and bisecting until the coordinates sum to one.
pub fn kkt_projection(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
    start: f64,
) -> Result<ProjectionResult> {
    let set = finite_divergence_subset(set, benchmark)?;
    if let Some(trivial) = trivial_projection(&set, benchmark) {
        return Ok(trivial);
    }
    solve_multiplier(&set, benchmark, start)
}

/// The blended posterior: the projection of `benchmark` onto the members of
/// `set` that have finite divergence from it.
pub fn blend(set: &ConstraintSet, benchmark: &FiniteDistribution) -> Result<ProjectionResult> {
    let tightened = finite_divergence_subset(set, benchmark)?;
    i_projection(&tightened, benchmark)
}

fn trivial_projection(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
) -> Option<ProjectionResult> {
    if set.contains_raw(benchmark.probs(), 0.0) {
        return Some(ProjectionResult::new(set, benchmark.clone(), benchmark));
    }
    if set.lower == set.upper {
        // A nonempty set with equal bounds already sums to one.
        let p = FiniteDistribution::from_parts_unchecked(set.atoms.clone(), set.lower.clone());
        return Some(ProjectionResult::new(set, p, benchmark));
    }
    None
}

fn solve_multiplier(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
    start: f64,
) -> Result<ProjectionResult> {
    let b = benchmark.probs();
    let coords = |nu: f64| -> Vec<f64> {
        let scale = nu.exp();
        b.iter()
            .zip(set.lower.iter().zip(&set.upper))
            .map(|(&bi, (&lo, &hi))| (bi * scale).clamp(lo, hi))
            .collect()
    };
    let excess = |nu: f64| coords(nu).iter().sum::<f64>() - 1.0;

    let sum_lower: f64 = set.lower.iter().sum();
    let sum_upper: f64 = set.upper.iter().sum();
    let finish = |probs: Vec<f64>| -> Result<ProjectionResult> {
        let p = FiniteDistribution::new(set.atoms.clone(), probs)?;
        Ok(ProjectionResult::new(set, p, benchmark))
    };
    if sum_lower >= 1.0 - MULTIPLIER_TOLERANCE {
        return finish(set.lower.clone());
    }
    if sum_upper <= 1.0 + MULTIPLIER_TOLERANCE {
        return finish(set.upper.clone());
    }

    // exp(nu) saturates to 0 or inf well inside this range.
    const NU_LIMIT: f64 = 1500.0;
    let start = if start.is_finite() {
        start.clamp(-NU_LIMIT, NU_LIMIT)
    } else {
        0.0
    };
    let (mut lo, mut hi);
    let mut step = 1.0;
    if excess(start) < 0.0 {
        lo = start;
        hi = start + step;
        while excess(hi) < 0.0 {
            if hi >= NU_LIMIT {
                return Err(Error::NoConvergence("projection multiplier bracket"));
            }
            lo = hi;
            step *= 2.0;
            hi = (hi + step).min(NU_LIMIT);
        }
    } else {
        hi = start;
        lo = start - step;
        while excess(lo) > 0.0 {
            if lo <= -NU_LIMIT {
                return Err(Error::NoConvergence("projection multiplier bracket"));
            }
            hi = lo;
            step *= 2.0;
            lo = (lo - step).max(-NU_LIMIT);
        }
    }

    let mut best = (f64::INFINITY, lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let e = excess(mid);
        if e.abs() < best.0 {
            best = (e.abs(), mid);
        }
        if e.abs() <= MULTIPLIER_TOLERANCE {
            break;
        }
        if e < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if !(hi > lo) {
            break;
        }
    }
    if best.0 > MULTIPLIER_TOLERANCE {
        return Err(Error::NoConvergence("projection multiplier bisection"));
    }
    finish(coords(best.1))
}

/// Brute-force solution of the maximin inferential-gain game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    /// `sup_Q inf_P [I(P || B) - I(P || Q)]`, in nats.
    pub value: f64,
    pub statistician: FiniteDistribution,
    pub worst_case_nature: FiniteDistribution,
    pub grid_step: f64,
}

/// Solves the game on a grid over the finite-divergence subset of `set`.
///
/// Both players range over the same candidates: exact multiples of
/// `grid_step` inside the set, every vertex of the set, and the benchmark
/// when it is feasible. Only two- and three-atom spaces are supported.
pub fn maximin_bruteforce(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
    grid_step: f64,
) -> Result<GameSolution> {
    check_game_inputs(set, grid_step)?;
    let tightened = finite_divergence_subset(set, benchmark)?;
    let candidates = grid_points(&tightened, benchmark, grid_step)?;
    solve_game(
        &tightened.atoms,
        &candidates,
        &candidates,
        benchmark,
        grid_step,
    )
}

/// Like [`maximin_bruteforce`] but lets the statistician range over the
/// whole simplex grid, not just the constraint set.
pub fn maximin_unrestricted_statistician(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
    grid_step: f64,
) -> Result<GameSolution> {
    check_game_inputs(set, grid_step)?;
    let tightened = finite_divergence_subset(set, benchmark)?;
    let nature = grid_points(&tightened, benchmark, grid_step)?;
    let everything = ConstraintSet::unconstrained(set.atoms.clone())?;
    let statistician = grid_points(&everything, benchmark, grid_step)?;
    solve_game(
        &tightened.atoms,
        &statistician,
        &nature,
        benchmark,
        grid_step,
    )
}

fn check_game_inputs(set: &ConstraintSet, grid_step: f64) -> Result<()> {
    if !(2..=3).contains(&set.len()) {
        return Err(Error::domain("atom count", set.len() as f64, "{2, 3}"));
    }
    if !(1e-5..=1e-1).contains(&grid_step) {
        return Err(Error::domain("grid_step", grid_step, "[1e-5, 1e-1]"));
    }
    let per_axis = (1.0 / grid_step).ceil() + 1.0;
    let estimate = per_axis.powi(set.len() as i32 - 1);
    if estimate > MAX_GRID_POINTS as f64 {
        return Err(Error::domain(
            "grid_step",
            grid_step,
            "coarse enough for at most 2e7 grid points",
        ));
    }
    Ok(())
}

/// Multiples of `step` in `[lo, hi]`, plus both endpoints.
fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    let mut values: Vec<f64> = (first..=last)
        .map(|k| (k as f64 * step).clamp(lo, hi))
        .collect();
    values.push(lo);
    values.push(hi);
    values
}

fn grid_points(
    set: &ConstraintSet,
    benchmark: &FiniteDistribution,
    step: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = set.len();
    let mut points: Vec<Vec<f64>> = Vec::new();
    match n {
        2 => {
            let (lo, hi) = set.effective_bounds(0);
            points.extend(axis(lo, hi, step).into_iter().map(|v| vec![v, 1.0 - v]));
        }
        3 => {
            let (lo0, hi0) = set.effective_bounds(0);
            let (lo1, hi1) = set.effective_bounds(1);
            let second = axis(lo1, hi1, step);
            for v0 in axis(lo0, hi0, step) {
                for &v1 in &second {
                    let v2 = 1.0 - v0 - v1;
                    let v2 = if v2.abs() < 1e-15 { 0.0 } else { v2 };
                    if v2 >= set.lower[2] - 1e-12 && v2 <= set.upper[2] + 1e-12 && v2 >= 0.0 {
                        points.push(vec![v0, v1, v2]);
                    }
                }
            }
            // Vertices: two coordinates on a bound, the third fills the rest.
            for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                for vi in [set.lower[i], set.upper[i]] {
                    for vj in [set.lower[j], set.upper[j]] {
                        let vk = 1.0 - vi - vj;
                        if vk >= set.lower[k] - 1e-12 && vk <= set.upper[k] + 1e-12 {
                            let mut p = vec![0.0; 3];
                            p[i] = vi;
                            p[j] = vj;
                            p[k] = vk.max(0.0);
                            points.push(p);
                        }
                    }
                }
            }
        }
        _ => unreachable!("atom count checked by caller"),
    }
    if set.contains_raw(benchmark.probs(), 0.0) {
        points.push(benchmark.probs().to_vec());
    }
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    if points.is_empty() {
        return Err(Error::Infeasible {
            atoms: set.atoms.clone(),
            reason: "no grid point lies in the constraint set".into(),
        });
    }
    Ok(points)
}

/// Scans every statistician candidate for its worst case over the nature
/// candidates, then takes the best. The gain `I(P||B) - I(P||Q)` is
/// evaluated as `sum_i P_i ln Q_i - sum_i P_i ln B_i`, the same quantity
/// with the `P ln P` terms cancelled; nature points all have finite
/// divergence from `B`.
fn solve_game(
    atoms: &[String],
    statistician: &[Vec<f64>],
    nature: &[Vec<f64>],
    benchmark: &FiniteDistribution,
    grid_step: f64,
) -> Result<GameSolution> {
    let b = benchmark.probs();
    let cross_benchmark: Vec<f64> = nature
        .iter()
        .map(|p| {
            p.iter()
                .zip(b)
                .filter(|(&pi, _)| pi > 0.0)
                .map(|(&pi, &bi)| pi * bi.ln())
                .sum()
        })
        .collect();

    let worst: Vec<(f64, usize)> = statistician
        .par_iter()
        .map(|q| {
            let log_q: Vec<f64> = q.iter().map(|v| v.ln()).collect();
            let mut best = (f64::INFINITY, 0usize);
            for (idx, (p, cb)) in nature.iter().zip(&cross_benchmark).enumerate() {
                let mut cross_q = 0.0;
                for (&pi, &lq) in p.iter().zip(&log_q) {
                    if pi > 0.0 {
                        cross_q += pi * lq;
                    }
                }
                // ln 0 = -inf makes the gain -inf, which is the right limit.
                let gain = cross_q - cb;
                if gain < best.0 {
                    best = (gain, idx);
                }
            }
            best
        })
        .collect();

    let mut chosen: Option<(f64, usize, usize)> = None;
    for (q_idx, &(value, p_idx)) in worst.iter().enumerate() {
        if chosen.is_none_or(|(v, _, _)| value > v) {
            chosen = Some((value, q_idx, p_idx));
        }
    }
    let (value, q_idx, p_idx) = chosen.expect("candidate lists are nonempty");
    if !value.is_finite() {
        return Err(Error::NoConvergence("maximin search (no finite payoff)"));
    }
    let to_dist = |v: &[f64]| FiniteDistribution::new(atoms.to_vec(), v.to_vec());
    Ok(GameSolution {
        value,
        statistician: to_dist(&statistician[q_idx])?,
        worst_case_nature: to_dist(&nature[p_idx])?,
        grid_step,
    })
}
