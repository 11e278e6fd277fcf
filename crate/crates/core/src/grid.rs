//! Rectangular forecast grids and exhaustive minimization over them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of grid points.
pub const GRID_GUARD: u128 = 10_000_000;

/// Values within this distance of the minimum count as minimizers.
pub const TIE_TOL: f64 = 1e-12;

/// Points `lo + i·step`, `i = 0, 1, …` up to `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || lo >= hi || step <= 0.0 {
            return Err(Error::Argument(format!(
                "invalid grid axis {lo}:{hi}:{step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// Parses `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Argument(format!(
                "grid axis `{s}` is not of the form lo:hi:step"
            )));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("cannot parse `{t}` in grid axis `{s}`")))
        };
        Axis::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Cartesian product of axes, enumerated in lexicographic order (last
/// coordinate fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Argument("grid needs at least one axis".into()));
        }
        let points: u128 = axes.iter().map(|a| a.len() as u128).product();
        if points > GRID_GUARD {
            return Err(Error::GridGuard {
                points,
                guard: GRID_GUARD,
            });
        }
        Ok(Self { axes })
    }

    /// The same axis repeated `dim` times.
    pub fn cube(axis: Axis, dim: usize) -> Result<Self> {
        Self::new(vec![axis; dim])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes the `idx`-th point into `out`.
    pub fn point_into(&self, mut idx: usize, out: &mut [f64]) {
        for (k, ax) in self.axes.iter().enumerate().rev() {
            let n = ax.len();
            out[k] = ax.value(idx % n);
            idx /= n;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(idx, &mut out);
        out
    }

    /// Largest step over the axes.
    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(|a| a.step).fold(0.0, f64::max)
    }

    /// Evaluates `objective` at every admissible point, in parallel but with
    /// results in grid order. Inadmissible points get `+∞`.
    pub fn evaluate<F, A>(&self, objective: F, admissible: A) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
        A: Fn(&[f64]) -> bool + Sync,
    {
        let dim = self.dim();
        (0..self.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; dim],
                |buf, i| {
                    self.point_into(i, buf);
                    if admissible(buf) {
                        objective(buf)
                    } else {
                        f64::INFINITY
                    }
                },
            )
            .collect()
    }

    /// All minimizers within [`TIE_TOL`] of the minimum.
    pub fn argmin<F, A>(&self, objective: F, admissible: A) -> Result<GridMin>
    where
        F: Fn(&[f64]) -> f64 + Sync,
        A: Fn(&[f64]) -> bool + Sync,
    {
        let values = self.evaluate(objective, admissible);
        GridMin::from_values(self, values)
    }
}

/// Result of an exhaustive grid minimization.
#[derive(Clone, Debug)]
pub struct GridMin {
    pub min: f64,
    /// Grid indices of the minimizers, ascending (hence lexicographic).
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridMin {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFinite(format!(
                "objective is NaN at {:?}",
                grid.point(i)
            )));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::NonFinite(
                "objective has no finite value on the grid".into(),
            ));
        }
        let indices = (0..values.len())
            .filter(|&i| values[i] <= min + TIE_TOL)
            .collect();
        Ok(Self {
            min,
            indices,
            values,
        })
    }

    pub fn points(&self, grid: &Grid) -> Vec<Vec<f64>> {
        self.indices.iter().map(|&i| grid.point(i)).collect()
    }
}
