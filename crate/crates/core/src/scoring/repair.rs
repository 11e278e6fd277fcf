//! Monotone repair: adding `g(y)` so that `y ↦ S*(x, y) + g(y)` is strictly
//! increasing.
//!
//! Given a lower bound `h(y) ≤ ∂_y S*(x, y)`, take `G` an antiderivative of
//! `−h` and a strictly increasing `g0`; then `S* + G + g0` is strictly
//! increasing in `y` and still strictly consistent.

use crate::blocks::{Loss, NamedFn};
use crate::error::Result;
use crate::quad;

use super::{require_increasing, ScoreSpec};

/// The lower bound `h` on `∂_y S*`.
#[derive(Clone, Debug)]
pub enum RepairBound {
    /// `h ≡ c`.
    Constant(f64),
    /// `h(y) = Σ c_i yⁱ`.
    Polynomial(Vec<f64>),
    /// `h(y) = −offset − ℓ(y)`, the natural bound for shortfall scores with
    /// `ℓ` bounded below by `−offset`.
    NegLoss { loss: Loss, offset: f64 },
    /// Arbitrary `h`; `G(y) = −∫_0^y h` by adaptive quadrature.
    Custom(NamedFn),
}

impl RepairBound {
    pub fn name(&self) -> String {
        match self {
            RepairBound::Constant(c) => format!("h.constant({c})"),
            RepairBound::Polynomial(c) => format!("h.polynomial({c:?})"),
            RepairBound::NegLoss { loss, offset } => {
                format!("h.neg_loss({},{offset})", loss.name())
            }
            RepairBound::Custom(f) => f.name().to_string(),
        }
    }

    /// `G(y)` with `G′ = −h` and `G(0) = 0`.
    pub fn antiderivative(&self, y: f64) -> Result<f64> {
        match self {
            RepairBound::Constant(c) => Ok(-c * y),
            RepairBound::Polynomial(cs) => {
                let mut acc = 0.0;
                let mut pow = y;
                for (i, c) in cs.iter().enumerate() {
                    acc -= c * pow / (i + 1) as f64;
                    pow *= y;
                }
                Ok(acc)
            }
            // ∫_0^y ℓ(w) dw = ∫_0^y ℓ(y − z) dz.
            RepairBound::NegLoss { loss, offset } => Ok(offset * y + loss.shifted_integral(y, y)?),
            RepairBound::Custom(h) => Ok(-quad::integrate(&|w| h.call(w), 0.0, y, 1e-10)?),
        }
    }
}

/// `(x, y) ↦ S*(x, y) + G(y) + g0(y)`, verified strictly increasing in `y`
/// on the evaluation box of `S*`.
pub fn monotone_repair(sstar: &ScoreSpec, h: RepairBound, g0: NamedFn) -> Result<ScoreSpec> {
    sstar.require_arity(1)?;
    h.antiderivative(sstar.eval_box().hi)?;
    let inner = sstar.clone();
    let meta = sstar
        .meta()
        .clone()
        .block(format!("repair:{}", h.name()))
        .block(g0.name());
    let repaired = ScoreSpec::new(1, meta, sstar.eval_box(), move |f, y| {
        inner.eval(f, y) + h.antiderivative(y).unwrap_or(f64::NAN) + g0.call(y)
    });
    require_increasing("repaired score in y", &repaired.eval_box(), |x, y| {
        repaired.scalar(x, y)
    })?;
    Ok(repaired)
}
