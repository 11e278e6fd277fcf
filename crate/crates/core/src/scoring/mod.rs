//! Strictly consistent scoring functions.
//!
//! [`families`] holds the classical scores (Bregman, generalized piecewise
//! linear, the `(Q_p, ES_p)` and RVaR families, expectile, ratio and
//! shortfall scores). [`constructions`] lifts a score of a generator to the
//! tail pair `(Q_p, ρ)`, the left tail and the body, and restricts scores
//! back. [`repair`] turns a score into one strictly increasing in `y`.

use std::fmt;
use std::sync::Arc;

use crate::blocks::BvFunction;
use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::meta::SpecMeta;

pub mod constructions;
pub mod families;
pub mod repair;

pub use constructions::{
    body_score, conditional_score, left_tail_score, lift_score, restrict_score, restrict_score_pair,
};
pub use families::{
    bregman_score, expectile_score, fz_score, fz_score_default, level_default_g, pinball_score,
    quantile_score, ratio_score, rvar_score, rvar_score_default, shortfall_score,
};
pub use repair::{monotone_repair, RepairBound};

type ScoreEval = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// Rectangle `[lo, hi]²` over which monotonicity conditions are scanned.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for EvalBox {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
        }
    }
}

impl EvalBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Argument(format!(
                "evaluation box [{lo}, {hi}] is empty or not finite"
            )));
        }
        Ok(Self { lo, hi })
    }

    fn points(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let h = (self.hi - self.lo) / (n - 1) as f64;
        (0..n).map(move |i| self.lo + i as f64 * h)
    }
}

const SCAN_X: usize = 101;
const SCAN_Y: usize = 401;
const FD_STEP: f64 = 1e-5;

/// Scans `y ↦ f(x, y)` for strict increase on the box by central
/// differences, returning the first `(x, y, difference)` that is not
/// positive.
pub(crate) fn scan_increasing(
    bx: &EvalBox,
    f: impl Fn(f64, f64) -> f64,
) -> Option<(f64, f64, f64)> {
    for x in bx.points(SCAN_X) {
        for y in bx.points(SCAN_Y) {
            let d = f(x, y + FD_STEP) - f(x, y - FD_STEP);
            if !(d > 0.0) {
                return Some((x, y, d / (2.0 * FD_STEP)));
            }
        }
    }
    None
}

pub(crate) fn require_increasing(
    what: &str,
    bx: &EvalBox,
    f: impl Fn(f64, f64) -> f64,
) -> Result<()> {
    match scan_increasing(bx, f) {
        None => Ok(()),
        Some((x, y, slope)) => Err(Error::Monotonicity(format!(
            "{what} is not strictly increasing at x = {x}, y = {y} (slope {slope:.3e})"
        ))),
    }
}

/// A scoring function `S(forecast, y)` with forecast dimension `arity`.
#[derive(Clone)]
pub struct ScoreSpec {
    arity: usize,
    eval: Arc<ScoreEval>,
    meta: SpecMeta,
    eval_box: EvalBox,
}

impl fmt::Debug for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScoreSpec")
            .field("arity", &self.arity)
            .field("meta", &self.meta)
            .finish()
    }
}

impl ScoreSpec {
    pub(crate) fn new(
        arity: usize,
        meta: SpecMeta,
        eval_box: EvalBox,
        eval: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            arity,
            eval: Arc::new(eval),
            meta,
            eval_box,
        }
    }

    /// Wraps a user-supplied score of a one-dimensional functional.
    pub fn custom_scalar(
        name: impl Into<String>,
        s: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(1, SpecMeta::new(name), EvalBox::default(), move |f, y| {
            s(f[0], y)
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn meta(&self) -> &SpecMeta {
        &self.meta
    }

    pub fn eval_box(&self) -> EvalBox {
        self.eval_box
    }

    /// Sets the box used when this score is checked by later constructions.
    pub fn with_eval_box(mut self, bx: EvalBox) -> Self {
        self.eval_box = bx;
        self
    }

    /// Evaluates without a dimension check.
    #[inline]
    pub fn eval(&self, forecast: &[f64], y: f64) -> f64 {
        (self.eval)(forecast, y)
    }

    pub fn evaluate(&self, forecast: &[f64], y: f64) -> Result<f64> {
        self.check_dim(forecast)?;
        Ok(self.eval(forecast, y))
    }

    #[inline]
    pub(crate) fn scalar(&self, x: f64, y: f64) -> f64 {
        (self.eval)(&[x], y)
    }

    pub(crate) fn check_dim(&self, forecast: &[f64]) -> Result<()> {
        if forecast.len() != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                got: forecast.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_arity(&self, k: usize) -> Result<()> {
        if self.arity != k {
            return Err(Error::Dimension {
                expected: k,
                got: self.arity,
            });
        }
        Ok(())
    }

    /// Adds `a(y)` to the score.
    pub fn plus(&self, name: &str, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        let meta = self.meta.clone().block(name);
        Self::new(self.arity, meta, self.eval_box, move |f, y| {
            inner.eval(f, y) + a(y)
        })
    }

    /// Checks that `y ↦ S(x, y)` is strictly increasing over the box.
    pub fn check_increasing_in_y(&self) -> Result<()> {
        self.require_arity(1)?;
        require_increasing(
            &format!("{} in y", self.meta.construction),
            &self.eval_box,
            |x, y| self.scalar(x, y),
        )
    }

    /// Checks that `y ↦ S(x, y)` is strictly decreasing over the box.
    pub fn check_decreasing_in_y(&self) -> Result<()> {
        self.require_arity(1)?;
        let what = format!("-{} in y", self.meta.construction);
        require_increasing(&what, &self.eval_box, |x, y| -self.scalar(x, y))
    }
}

#[inline]
pub(crate) fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `∫ S(forecast, y) dF(y)` as an exact finite sum.
pub fn expected_score(s: &ScoreSpec, forecast: &[f64], f: &DiscreteDistribution) -> Result<f64> {
    s.check_dim(forecast)?;
    Ok(expected_score_unchecked(s, forecast, f))
}

#[inline]
pub fn expected_score_unchecked(s: &ScoreSpec, forecast: &[f64], f: &DiscreteDistribution) -> f64 {
    f.iter().map(|(y, m)| s.eval(forecast, y) * m).sum()
}

/// The signed total variation `‖u‖(y)` of `u` between 0 and `y`.
pub fn total_variation(u: &BvFunction, y: f64) -> Result<f64> {
    u.total_variation(y)
}
