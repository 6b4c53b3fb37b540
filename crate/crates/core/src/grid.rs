//! Brute-force maximization over axis-aligned grids with zoom refinement.
//!
//! Every round evaluates the full tensor grid; the best point is kept across
//! rounds and only replaced by a strictly better one. Ties go to the lowest
//! flattened index, so the result does not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Axis-aligned box with a per-axis point count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    /// Each round shrinks the box 10x around the incumbent.
    pub refine_rounds: usize,
}

pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_REFINE_ROUNDS: usize = 2;
const ZOOM: f64 = 10.0;

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: usize, refine_rounds: usize) -> Result<Self> {
        let spec = Self {
            points: vec![points; lower.len()],
            lower,
            upper,
            refine_rounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, points: usize, refine_rounds: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], points, refine_rounds)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() {
            return Err(Error::InvalidGrid("grid has no axes".into()));
        }
        if self.lower.len() != self.upper.len() || self.lower.len() != self.points.len() {
            return Err(Error::InvalidGrid("axis descriptions disagree in length".into()));
        }
        for (axis, ((&lo, &hi), &n)) in self
            .lower
            .iter()
            .zip(&self.upper)
            .zip(&self.points)
            .enumerate()
        {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
            if n < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need at least 3 points, got {n}"
                )));
            }
        }
        Ok(())
    }

    /// Total number of points evaluated in one round.
    pub fn round_size(&self) -> usize {
        self.points.iter().product()
    }

    /// All points of the unrefined grid, in flattened-index order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.round_size())
            .map(|k| {
                let mut x = vec![0.0; self.dim()];
                point_at(&self.lower, &self.upper, &self.points, k, &mut x);
                x
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Result of a grid maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    /// Best value found; `-inf` if every evaluation was `-inf` (or NaN).
    pub value: f64,
    pub argmax: Option<Vec<f64>>,
    /// Number of evaluations with a value other than `-inf`.
    pub finite_evaluations: usize,
    pub evaluations: usize,
}

fn axis_point(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    // (hi - lo) * i / (n - 1) keeps integer-ratio points such as 2.0 on [-10, 10] exact.
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

fn point_at(lower: &[f64], upper: &[f64], points: &[usize], mut index: usize, out: &mut [f64]) {
    for axis in (0..lower.len()).rev() {
        let n = points[axis];
        let i = index % n;
        index /= n;
        out[axis] = axis_point(lower[axis], upper[axis], n, i);
    }
}

fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

/// Maximizes `objective` over the grid. NaN is treated as `-inf`.
pub fn maximize<F>(spec: &GridSpec, objective: F) -> Result<GridOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    Ok(maximize_validated(spec, objective))
}

/// `maximize` for a spec that already passed `validate`.
pub(crate) fn maximize_validated<F>(spec: &GridSpec, objective: F) -> GridOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = spec.dim();
    let mut lower = spec.lower.clone();
    let mut upper = spec.upper.clone();
    let mut best = f64::NEG_INFINITY;
    let mut argmax: Option<Vec<f64>> = None;
    let mut finite = 0usize;
    let mut evaluations = 0usize;

    for round in 0..=spec.refine_rounds {
        let total = spec.round_size();
        let (value, index, count) = (0..total)
            .into_par_iter()
            .map_init(
                || vec![0.0; dim],
                |buf, k| {
                    point_at(&lower, &upper, &spec.points, k, buf);
                    let v = objective(buf);
                    let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
                    (v, k, usize::from(v > f64::NEG_INFINITY))
                },
            )
            .reduce(
                || (f64::NEG_INFINITY, usize::MAX, 0),
                |a, b| {
                    let (v, k) = better((a.0, a.1), (b.0, b.1));
                    (v, k, a.2 + b.2)
                },
            );
        evaluations += total;
        finite += count;
        if value > best && index != usize::MAX {
            best = value;
            let mut x = vec![0.0; dim];
            point_at(&lower, &upper, &spec.points, index, &mut x);
            argmax = Some(x);
        }
        if best == f64::INFINITY || round == spec.refine_rounds {
            break;
        }
        let Some(center) = argmax.as_ref() else { break };
        for axis in 0..dim {
            let half = 0.5 * (upper[axis] - lower[axis]) / ZOOM;
            let (lo0, hi0) = (spec.lower[axis], spec.upper[axis]);
            let mut lo = center[axis] - half;
            let mut hi = center[axis] + half;
            if lo < lo0 {
                hi += lo0 - lo;
                lo = lo0;
            }
            if hi > hi0 {
                lo -= hi - hi0;
                hi = hi0;
            }
            lower[axis] = lo.max(lo0);
            upper[axis] = hi.min(hi0);
        }
    }

    GridOutcome {
        value: best,
        argmax,
        finite_evaluations: finite,
        evaluations,
    }
}

/// Minimizes by maximizing the negation.
pub fn minimize<F>(spec: &GridSpec, objective: F) -> Result<GridOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    Ok(minimize_validated(spec, objective))
}

pub(crate) fn minimize_validated<F>(spec: &GridSpec, objective: F) -> GridOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let out = maximize_validated(spec, |x| -objective(x));
    GridOutcome {
        value: -out.value,
        ..out
    }
}
