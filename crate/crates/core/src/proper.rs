//! Proper scoring rules for full and tail distribution forecasts.
//!
//! All three scores are evaluated exactly: the integrands are piecewise
//! constant (CRPS) or piecewise linear in `r` (quantile-weighted CRPS) on
//! finitely many pieces.
//!
//! Two formulas deviate from their usual printed form:
//! - the tail score evaluates the CRPS of the forecast's own tail `G_p` and
//!   uses the indicator `1{y ≤ v}`;
//! - the quantile-weighted CRPS integrates `2(1{y ≤ F⁻¹(r)} − r)(F⁻¹(r) − y)`,
//!   the form that reduces to the CRPS at `p = 0`.

use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};

/// A probabilistic forecast.
pub type PredictiveDistribution = DiscreteDistribution;

/// `CRPS(F, y) = ∫ (F(z) − 1{y ≤ z})² dz`.
pub fn crps(f: &PredictiveDistribution, y: f64) -> f64 {
    let atoms = f.atoms();
    let cum = f.cumulative();
    let mut acc = 0.0;
    // Walk the merged breakpoints {atoms} ∪ {y}; between consecutive
    // breakpoints both F and the indicator are constant.
    let mut k = 0;
    let mut fz = 0.0;
    let mut y_done = false;
    let mut prev = f64::NEG_INFINITY;
    loop {
        let next_atom = atoms.get(k).copied();
        let t = match (next_atom, y_done) {
            (Some(a), false) => a.min(y),
            (Some(a), true) => a,
            (None, false) => y,
            (None, true) => break,
        };
        if prev.is_finite() && t > prev {
            let step = if y <= prev { 1.0 } else { 0.0 };
            acc += (fz - step) * (fz - step) * (t - prev);
        }
        if !y_done && y <= t {
            y_done = true;
        }
        while k < atoms.len() && atoms[k] <= t {
            fz = cum[k];
            k += 1;
        }
        prev = t;
    }
    acc
}

/// The tail score
///
/// ```text
/// S(v, G, y) = 1{y > v}(CRPS(G_p, y) + 2y) + (1{y ≤ v} − p)(CRPS(G_p, v) + 2v),
/// ```
///
/// whose expectation under `F` is minimized exactly by the forecasts with
/// `G_p = F_p` jointly with `v ∈ Q_p(F)`. Since `∂_y CRPS(G, y) = 2G(y) − 1`,
/// `y ↦ CRPS(G_p, y) + 2y` is strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCrps {
    p: Level,
}

impl TailCrps {
    pub fn new(p: Level) -> Self {
        Self { p }
    }

    pub fn level(&self) -> Level {
        self.p
    }

    pub fn score(&self, v: f64, g: &PredictiveDistribution, y: f64) -> f64 {
        self.score_tail(v, &g.tail(self.p), y)
    }

    /// As [`TailCrps::score`] with the tail `G_p` precomputed.
    pub fn score_tail(&self, v: f64, g_tail: &PredictiveDistribution, y: f64) -> f64 {
        let p = self.p.value();
        let h = |z: f64| crps(g_tail, z) + 2.0 * z;
        if y > v {
            h(y) - p * h(v)
        } else {
            (1.0 - p) * h(v)
        }
    }

    /// `∫ S(v, G, y) dF(y)`.
    pub fn expected(&self, v: f64, g: &PredictiveDistribution, f: &DiscreteDistribution) -> f64 {
        let tail = g.tail(self.p);
        f.iter()
            .map(|(y, m)| self.score_tail(v, &tail, y) * m)
            .sum()
    }
}

/// `tail_crps_score(p)`.
pub fn tail_crps_score(p: Level) -> TailCrps {
    TailCrps::new(p)
}

/// Quantile-weighted CRPS restricted to levels above `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QwCrps {
    p: f64,
}

impl QwCrps {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Argument(format!("level {p} is not in [0, 1)")));
        }
        Ok(Self { p })
    }

    /// `∫_p^1 2(1{y ≤ F⁻¹(r)} − r)(F⁻¹(r) − y) dr`, integrated exactly on
    /// each flat piece `(c_{k−1}, c_k]` of the left quantile function.
    pub fn score(&self, f: &PredictiveDistribution, y: f64) -> f64 {
        let mut prev = 0.0_f64;
        let mut acc = 0.0;
        for (&a, &c) in f.atoms().iter().zip(f.cumulative()) {
            let (lo, hi) = (prev.max(self.p), c.min(1.0));
            if hi > lo {
                let hit = if y <= a { 1.0 } else { 0.0 };
                acc += 2.0 * (a - y) * (hit * (hi - lo) - 0.5 * (hi * hi - lo * lo));
            }
            prev = c;
        }
        acc
    }
}

/// `qw_crps(p)`.
pub fn qw_crps(p: f64) -> Result<QwCrps> {
    QwCrps::new(p)
}
