//! Strict identification functions.
//!
//! Besides the classical examples (mean, quantile, `(Q_p, ES_p)`,
//! `(Q_p, Q_q, RVaR_{p,q})`), this module lifts a strict identification
//! function `V*` of a generator to one for `(Q_p, ρ)` on the class where
//! `F(VaR⁻_p) = p`, restricts identification functions of `ρ` back to the
//! generator on distributions bounded below by `r`, and builds the body
//! version for `(Q_p, Q_q, ρ^[p,q])`.

use std::fmt;
use std::sync::Arc;

use crate::blocks::{BvFunction, Loss};
use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};
use crate::meta::SpecMeta;

/// Largest supported forecast dimension.
pub const MAX_ARITY: usize = 3;

type IdEval = dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync;

/// A vector-valued identification function `V(forecast, y)`.
///
/// `continuous[i]` records whether every component is continuous in the
/// `i`-th forecast coordinate. The oracles use it to accept sign changes
/// between neighbouring grid points as roots only along continuous axes.
#[derive(Clone)]
pub struct IdSpec {
    arity: usize,
    eval: Arc<IdEval>,
    continuous: Vec<bool>,
    meta: SpecMeta,
}

impl fmt::Debug for IdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdSpec")
            .field("arity", &self.arity)
            .field("meta", &self.meta)
            .finish()
    }
}

impl IdSpec {
    fn new(
        arity: usize,
        continuous: Vec<bool>,
        meta: SpecMeta,
        eval: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        debug_assert!(arity >= 1 && arity <= MAX_ARITY && continuous.len() == arity);
        Self {
            arity,
            eval: Arc::new(eval),
            continuous,
            meta,
        }
    }

    /// Wraps a user-supplied one-dimensional identification function.
    pub fn custom_scalar(
        name: impl Into<String>,
        continuous_in_x: bool,
        v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            1,
            vec![continuous_in_x],
            SpecMeta::new(name),
            move |f, y, out| out[0] = v(f[0], y),
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn meta(&self) -> &SpecMeta {
        &self.meta
    }

    pub fn continuous(&self) -> &[bool] {
        &self.continuous
    }

    /// Evaluates into `out[..arity]` without dimension checks.
    #[inline]
    pub fn eval_into(&self, forecast: &[f64], y: f64, out: &mut [f64]) {
        (self.eval)(forecast, y, out)
    }

    pub fn evaluate(&self, forecast: &[f64], y: f64) -> Result<Vec<f64>> {
        self.check_dim(forecast)?;
        let mut out = [0.0; MAX_ARITY];
        self.eval_into(forecast, y, &mut out);
        Ok(out[..self.arity].to_vec())
    }

    fn check_dim(&self, forecast: &[f64]) -> Result<()> {
        if forecast.len() != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                got: forecast.len(),
            });
        }
        Ok(())
    }

    /// Scalar component `V(x, y)` of an arity-one function.
    #[inline]
    fn scalar(&self, x: f64, y: f64) -> f64 {
        let mut out = [0.0; MAX_ARITY];
        self.eval_into(&[x], y, &mut out);
        out[0]
    }

    fn require_arity(&self, k: usize) -> Result<()> {
        if self.arity != k {
            return Err(Error::Dimension {
                expected: k,
                got: self.arity,
            });
        }
        Ok(())
    }
}

#[inline]
fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `V(x, y) = x − y`.
pub fn mean_id() -> IdSpec {
    IdSpec::new(1, vec![true], SpecMeta::new("mean"), |f, y, out| {
        out[0] = f[0] - y
    })
}

/// `V(x, y) = 1{y ≤ x} − p`.
pub fn quantile_id(p: Level) -> IdSpec {
    let p = p.value();
    IdSpec::new(
        1,
        vec![false],
        SpecMeta::new("quantile").param("p", p),
        move |f, y, out| out[0] = ind(y <= f[0]) - p,
    )
}

/// `V(x, y) = |1{y ≤ x} − τ|(x − y)`, strict for the `τ`-expectile.
pub fn expectile_id(tau: Level) -> IdSpec {
    let tau = tau.value();
    IdSpec::new(
        1,
        vec![true],
        SpecMeta::new("expectile").param("tau", tau),
        move |f, y, out| {
            let x = f[0];
            out[0] = (ind(y <= x) - tau).abs() * (x - y)
        },
    )
}

/// `V(m, y) = ℓ(y − m)` for the shortfall risk measure of `ℓ`.
pub fn shortfall_id(loss: Loss) -> IdSpec {
    let cont = !matches!(loss, Loss::Custom(_));
    let meta = SpecMeta::new("shortfall").block(loss.name());
    IdSpec::new(1, vec![cont], meta, move |f, y, out| {
        out[0] = loss.eval(y - f[0])
    })
}

/// `V(x, y) = x·t(y) − u(y)` for the ratio `E u / E t`.
pub fn ratio_id(u: BvFunction, t: BvFunction) -> IdSpec {
    let meta = SpecMeta::new("ratio").block(u.name()).block(t.name());
    IdSpec::new(1, vec![true], meta, move |f, y, out| {
        out[0] = f[0] * t.eval(y) - u.eval(y)
    })
}

/// The `(Q_p, ES_p)` identification function with second component
/// `x − [1{y > v}y + (1{y ≤ v} − p)v]/(1 − p)`.
pub fn var_es_id(p: Level) -> IdSpec {
    let p = p.value();
    IdSpec::new(
        2,
        vec![false, true],
        SpecMeta::new("var_es").param("p", p),
        move |f, y, out| {
            let (v, x) = (f[0], f[1]);
            let hit = ind(y <= v) - p;
            out[0] = hit;
            out[1] = x - (ind(y > v) * y + hit * v) / (1.0 - p);
        },
    )
}

/// The `(Q_p, Q_q, RVaR_{p,q})` identification function.
pub fn rvar_id(p: Level, q: Level) -> Result<IdSpec> {
    let (p, q) = check_levels(p, q)?;
    Ok(IdSpec::new(
        3,
        vec![false, false, true],
        SpecMeta::new("rvar")
            .ordered(0, 1)
            .param("p", p)
            .param("q", q),
        move |f, y, out| {
            let (v1, v2, x) = (f[0], f[1], f[2]);
            let h1 = ind(y <= v1) - p;
            let h2 = ind(y <= v2) - q;
            out[0] = h1;
            out[1] = h2;
            out[2] = x - (ind(v1 < y && y <= v2) * y + h1 * v1 - h2 * v2) / (q - p);
        },
    ))
}

fn check_levels(p: Level, q: Level) -> Result<(f64, f64)> {
    if p >= q {
        return Err(Error::Argument(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    Ok((p.value(), q.value()))
}

/// Lifts a strict identification function `V*` of the generator to
/// `(Q_p, ρ)`:
///
/// ```text
/// V(v, x, y) = ( 1{y ≤ v} − p,
///                1{y > v} V*(x, y) + (1{y ≤ v} − p) V*(x, v) )
/// ```
///
/// With `with_correction = false` the second term of the second component
/// is dropped; both variants are strict on `F(VaR⁻_p) = p`.
pub fn lift_id(vstar: &IdSpec, p: Level, with_correction: bool) -> Result<IdSpec> {
    vstar.require_arity(1)?;
    let p = p.value();
    let inner = vstar.clone();
    let meta = SpecMeta::new("lift")
        .param("p", p)
        .param("correction", ind(with_correction))
        .block(vstar.meta.construction.clone());
    Ok(IdSpec::new(
        2,
        vec![false, vstar.continuous[0]],
        meta,
        move |f, y, out| {
            let (v, x) = (f[0], f[1]);
            let hit = ind(y <= v) - p;
            out[0] = hit;
            let mut second = ind(y > v) * inner.scalar(x, y);
            if with_correction {
                second += hit * inner.scalar(x, v);
            }
            out[1] = second;
        },
    ))
}

/// Restriction of an identification function of `ρ` to the generator on
/// distributions bounded below by `r`: `(1 − p)V(x, y) + p V(x, r)`.
pub fn restrict_id(v: &IdSpec, p: Level, r: f64) -> Result<IdSpec> {
    v.require_arity(1)?;
    let p = p.value();
    let inner = v.clone();
    let meta = SpecMeta::new("restrict")
        .param("p", p)
        .param("r", r)
        .block(v.meta.construction.clone());
    Ok(IdSpec::new(
        1,
        vec![v.continuous[0]],
        meta,
        move |f, y, out| {
            let x = f[0];
            out[0] = (1.0 - p) * inner.scalar(x, y) + p * inner.scalar(x, r)
        },
    ))
}

/// Restriction of a `(Q_p, ρ)` identification function (first component the
/// quantile one) to the generator: `(1 − p)V₂(r, x, y) + p V₂(r, x, r)`.
pub fn restrict_id_pair(v: &IdSpec, p: Level, r: f64) -> Result<IdSpec> {
    v.require_arity(2)?;
    let p = p.value();
    let inner = v.clone();
    let meta = SpecMeta::new("restrict_pair")
        .param("p", p)
        .param("r", r)
        .block(v.meta.construction.clone());
    Ok(IdSpec::new(
        1,
        vec![v.continuous[1]],
        meta,
        move |f, y, out| {
            let x = f[0];
            let mut a = [0.0; MAX_ARITY];
            let mut b = [0.0; MAX_ARITY];
            inner.eval_into(&[r, x], y, &mut a);
            inner.eval_into(&[r, x], r, &mut b);
            out[0] = (1.0 - p) * a[1] + p * b[1];
        },
    ))
}

/// Identification function for `(Q_p, Q_q, ρ^[p,q])` from `V*`:
///
/// ```text
/// third = 1{v1 < y ≤ v2} V*(x, y)
///       + (1{y ≤ v1} − p) V*(x, v1) − (1{y ≤ v2} − q) V*(x, v2)
/// ```
///
/// The two correction terms are dropped when `with_correction` is false.
pub fn body_id(vstar: &IdSpec, p: Level, q: Level, with_correction: bool) -> Result<IdSpec> {
    vstar.require_arity(1)?;
    let (p, q) = check_levels(p, q)?;
    let inner = vstar.clone();
    let meta = SpecMeta::new("body")
        .ordered(0, 1)
        .param("p", p)
        .param("q", q)
        .param("correction", ind(with_correction))
        .block(vstar.meta.construction.clone());
    Ok(IdSpec::new(
        3,
        vec![false, false, vstar.continuous[0]],
        meta,
        move |f, y, out| {
            let (v1, v2, x) = (f[0], f[1], f[2]);
            let h1 = ind(y <= v1) - p;
            let h2 = ind(y <= v2) - q;
            out[0] = h1;
            out[1] = h2;
            let mut third = ind(v1 < y && y <= v2) * inner.scalar(x, y);
            if with_correction {
                third += h1 * inner.scalar(x, v1) - h2 * inner.scalar(x, v2);
            }
            out[2] = third;
        },
    ))
}

/// `∫ V(forecast, y) dF(y)` as an exact finite sum, per component.
pub fn expected_id(v: &IdSpec, forecast: &[f64], f: &DiscreteDistribution) -> Result<Vec<f64>> {
    v.check_dim(forecast)?;
    let mut acc = [0.0; MAX_ARITY];
    expected_id_into(v, forecast, f, &mut acc);
    Ok(acc[..v.arity].to_vec())
}

/// Unchecked variant writing into `acc[..arity]`.
#[inline]
pub fn expected_id_into(v: &IdSpec, forecast: &[f64], f: &DiscreteDistribution, acc: &mut [f64]) {
    let mut buf = [0.0; MAX_ARITY];
    acc[..v.arity].fill(0.0);
    for (y, m) in f.iter() {
        v.eval_into(forecast, y, &mut buf);
        for j in 0..v.arity {
            acc[j] += buf[j] * m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(p: f64) -> Level {
        Level::new(p).unwrap()
    }

    fn u4() -> DiscreteDistribution {
        DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn mean_examples() {
        let v = mean_id();
        assert_eq!(v.evaluate(&[3.5], 3.0).unwrap(), vec![0.5]);
        assert_eq!(expected_id(&v, &[2.5], &u4()).unwrap(), vec![0.0]);
        assert_eq!(expected_id(&v, &[3.0], &u4()).unwrap(), vec![0.5]);
    }

    #[test]
    fn quantile_examples() {
        let v = quantile_id(lvl(0.5));
        assert_eq!(expected_id(&v, &[2.0], &u4()).unwrap(), vec![0.0]);
        assert_eq!(expected_id(&v, &[3.0], &u4()).unwrap(), vec![0.25]);
        assert_eq!(v.evaluate(&[5.0], 7.0).unwrap(), vec![-0.5]);
    }

    #[test]
    fn var_es_examples() {
        let v = var_es_id(lvl(0.5));
        assert_eq!(expected_id(&v, &[2.0, 3.5], &u4()).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            expected_id(&v, &[2.0, 3.0], &u4()).unwrap(),
            vec![0.0, -0.5]
        );
        // 3.5 − 2·(4 + (0 − 0.5)·2)
        assert_eq!(v.evaluate(&[2.0, 3.5], 4.0).unwrap(), vec![-0.5, -2.5]);
    }

    #[test]
    fn rvar_examples() {
        let v = rvar_id(lvl(0.25), lvl(0.75)).unwrap();
        assert_eq!(
            expected_id(&v, &[1.0, 3.0, 2.5], &u4()).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            expected_id(&v, &[1.0, 3.0, 2.0], &u4()).unwrap(),
            vec![0.0, 0.0, -0.5]
        );
        // 2.5 − 2·(0 + (0 − 0.25)·1 − (0 − 0.75)·3)
        assert_eq!(v.evaluate(&[1.0, 3.0, 2.5], 4.0).unwrap()[2], -1.5);
        assert!(rvar_id(lvl(0.75), lvl(0.25)).is_err());
    }

    #[test]
    fn lift_of_mean_is_scaled_var_es() {
        let p = 0.3;
        let lifted = lift_id(&mean_id(), lvl(p), true).unwrap();
        let fz = var_es_id(lvl(p));
        for &(v, x, y) in &[
            (1.0, 2.0, 0.5),
            (1.0, 2.0, 3.0),
            (-1.0, 0.5, -1.0),
            (2.0, 2.0, 2.0),
        ] {
            let a = lifted.evaluate(&[v, x], y).unwrap();
            let b = fz.evaluate(&[v, x], y).unwrap();
            assert_eq!(a[0], b[0]);
            assert!((a[1] - (1.0 - p) * b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn lift_roots_on_u4() {
        let lifted = lift_id(&mean_id(), lvl(0.5), true).unwrap();
        assert_eq!(
            expected_id(&lifted, &[2.0, 3.5], &u4()).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            expected_id(&lifted, &[2.5, 3.5], &u4()).unwrap(),
            vec![0.0, 0.0]
        );
        // F(3) = 0.75 ≠ p: no root at the right endpoint.
        assert_ne!(expected_id(&lifted, &[3.0, 3.5], &u4()).unwrap()[0], 0.0);
    }

    #[test]
    fn correction_neutral_when_cdf_hits_level() {
        let with = lift_id(&mean_id(), lvl(0.5), true).unwrap();
        let without = lift_id(&mean_id(), lvl(0.5), false).unwrap();
        for x in [2.0, 3.0, 3.5, 5.0] {
            let a = expected_id(&with, &[2.0, x], &u4()).unwrap();
            let b = expected_id(&without, &[2.0, x], &u4()).unwrap();
            assert!(close(&a, &b, 1e-15));
        }
        // F(1) = 0.25 ≠ p: the correction term has nonzero mean.
        let a = expected_id(&with, &[1.0, 3.0], &u4()).unwrap();
        let b = expected_id(&without, &[1.0, 3.0], &u4()).unwrap();
        assert!((a[1] - b[1]).abs() > 0.1);
    }

    #[test]
    fn restrict_examples() {
        let v = restrict_id(&mean_id(), lvl(0.5), 2.0).unwrap();
        let g = DiscreteDistribution::uniform(&[3.0, 4.0]).unwrap();
        assert_eq!(expected_id(&v, &[2.75], &g).unwrap(), vec![0.0]);

        let v = restrict_id(&mean_id(), lvl(0.5), 0.0).unwrap();
        assert_eq!(v.evaluate(&[1.0], 1.0).unwrap(), vec![0.5]);

        // Restricted quantile identification roots at the level-0.8 quantile.
        let v = restrict_id(&quantile_id(lvl(0.9)), lvl(0.5), 0.0).unwrap();
        let g = DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(expected_id(&v, &[4.0], &g).unwrap()[0].abs() < 1e-15);
        assert!(expected_id(&v, &[3.0], &g).unwrap()[0] < 0.0);
        assert!(expected_id(&v, &[5.0], &g).unwrap()[0] > 0.0);
    }

    #[test]
    fn restrict_pair_examples() {
        let v = restrict_id_pair(&var_es_id(lvl(0.5)), lvl(0.5), 2.0).unwrap();
        let g = DiscreteDistribution::uniform(&[3.0, 4.0]).unwrap();
        assert_eq!(v.evaluate(&[3.5], 3.0).unwrap(), vec![0.5]);
        assert_eq!(v.evaluate(&[3.5], 4.0).unwrap(), vec![-0.5]);
        assert_eq!(expected_id(&v, &[3.5], &g).unwrap(), vec![0.0]);
        assert_eq!(expected_id(&v, &[3.0], &g).unwrap(), vec![-0.5]);

        let d = DiscreteDistribution::point_mass(2.0).unwrap();
        let full = var_es_id(lvl(0.5)).evaluate(&[2.0, 1.7], 2.0).unwrap();
        assert_eq!(expected_id(&v, &[1.7], &d).unwrap(), vec![full[1]]);
        assert!(restrict_id_pair(&mean_id(), lvl(0.5), 2.0).is_err());
    }

    #[test]
    fn body_of_mean_is_scaled_rvar() {
        let (p, q) = (0.25, 0.75);
        let b = body_id(&mean_id(), lvl(p), lvl(q), true).unwrap();
        let r = rvar_id(lvl(p), lvl(q)).unwrap();
        for &(v1, v2, x, y) in &[
            (1.0, 3.0, 2.5, 4.0),
            (1.0, 3.0, 2.0, 2.0),
            (0.0, 0.5, 1.0, 0.2),
            (1.0, 1.0, 1.0, 1.0),
        ] {
            let a = b.evaluate(&[v1, v2, x], y).unwrap();
            let c = r.evaluate(&[v1, v2, x], y).unwrap();
            assert!((a[2] - (q - p) * c[2]).abs() < 1e-14);
        }
        assert_eq!(
            expected_id(&b, &[1.0, 3.0, 2.5], &u4()).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert!(body_id(&mean_id(), lvl(q), lvl(p), true).is_err());
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            expected_id(&mean_id(), &[1.0, 2.0], &u4()),
            Err(Error::Dimension { .. })
        ));
        assert!(lift_id(&var_es_id(lvl(0.5)), lvl(0.5), true).is_err());
    }

    #[test]
    fn expectile_id_roots_at_expectile() {
        let v = expectile_id(lvl(0.8));
        let g = DiscreteDistribution::uniform(&[3.0, 4.0]).unwrap();
        assert!(expected_id(&v, &[3.8], &g).unwrap()[0].abs() < 1e-14);
    }
}
