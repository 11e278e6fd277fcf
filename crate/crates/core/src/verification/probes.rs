//! Probes for convex level sets and order sensitivity.

use serde::Serialize;

use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};
use crate::scoring::{expected_score_unchecked, ScoreSpec};

use super::{Claim, Functional};

const CXLS_TOL: f64 = 1e-10;
const ORDER_MARGIN: f64 = 1e-12;

/// Plain CxLS asks `T(F0) ∩ T(F1) ⊆ T(F_λ)`; the starred version asks for
/// equality whenever the intersection is non-empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum CxlsMode {
    Cxls,
    #[default]
    CxlsStar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CxlsMixture {
    pub lambda: f64,
    pub value: Claim,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CxlsOutcome {
    pub mode: CxlsMode,
    pub pass: bool,
    /// The intersection was empty, so nothing was required.
    pub vacuous: bool,
    pub intersection: Option<Claim>,
    pub mixtures: Vec<CxlsMixture>,
    /// First failing mixture weight.
    pub counterexample: Option<f64>,
}

/// Checks the convex-level-set property of `t` along the mixtures
/// `(1 − λ)F0 + λF1`.
pub fn cxls_probe(
    t: &Functional<'_>,
    f0: &DiscreteDistribution,
    f1: &DiscreteDistribution,
    lambdas: &[f64],
    mode: CxlsMode,
) -> Result<CxlsOutcome> {
    let (a, b) = (t(f0)?, t(f1)?);
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    let inter: Claim = a
        .iter()
        .zip(&b)
        .map(|(&(l0, h0), &(l1, h1))| (l0.max(l1), h0.min(h1)))
        .collect();
    if inter.iter().any(|&(lo, hi)| lo > hi + CXLS_TOL) {
        return Ok(CxlsOutcome {
            mode,
            pass: true,
            vacuous: true,
            intersection: None,
            mixtures: vec![],
            counterexample: None,
        });
    }
    // Singletons that agree up to rounding.
    let inter: Claim = inter
        .into_iter()
        .map(|(lo, hi)| {
            if lo > hi {
                (0.5 * (lo + hi), 0.5 * (lo + hi))
            } else {
                (lo, hi)
            }
        })
        .collect();
    let mut mixtures = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Argument(format!(
                "mixture weight {lambda} is not in [0, 1]"
            )));
        }
        let value = t(&DiscreteDistribution::mixture(f0, f1, lambda)?)?;
        let pass = value
            .iter()
            .zip(&inter)
            .all(|(&(lo, hi), &(ilo, ihi))| match mode {
                CxlsMode::Cxls => lo <= ilo + CXLS_TOL && hi >= ihi - CXLS_TOL,
                CxlsMode::CxlsStar => (lo - ilo).abs() <= CXLS_TOL && (hi - ihi).abs() <= CXLS_TOL,
            });
        mixtures.push(CxlsMixture {
            lambda,
            value,
            pass,
        });
    }
    let counterexample = mixtures.iter().find(|m| !m.pass).map(|m| m.lambda);
    Ok(CxlsOutcome {
        mode,
        pass: counterexample.is_none(),
        vacuous: false,
        intersection: Some(inter),
        mixtures,
        counterexample,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderPair {
    pub v1: f64,
    pub v2: f64,
    /// Smallest `E S(v2, x) − E S(v1, x)` over the `x` grid.
    pub pointwise_margin: f64,
    /// `min_x E S(v2, x) − min_x E S(v1, x)`.
    pub profile_margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderOutcome {
    pub pass: bool,
    pub pairs: Vec<OrderPair>,
}

/// Order sensitivity in the quantile coordinate of a score for `(Q_p, ρ)`:
/// moving `v` away from `Q_p(F)` increases the expected score, both for
/// every fixed `x` and after minimizing over `x`.
///
/// Each pair must satisfy `v2 < v1 ≤ VaR⁻_p(F)` or `VaR⁺_p(F) ≤ v1 < v2`.
pub fn order_sensitivity_probe(
    s: &ScoreSpec,
    f: &DiscreteDistribution,
    p: Level,
    pairs: &[(f64, f64)],
    xs: &[f64],
) -> Result<OrderOutcome> {
    s.require_arity(2)?;
    if xs.is_empty() {
        return Err(Error::Argument(
            "order sensitivity needs a non-empty x grid".into(),
        ));
    }
    let (lo, hi) = (f.var_minus(p), f.var_plus(p));
    let mut out = Vec::with_capacity(pairs.len());
    for &(v1, v2) in pairs {
        if !((v2 < v1 && v1 <= lo) || (hi <= v1 && v1 < v2)) {
            return Err(Error::Precondition(format!(
                "pair ({v1}, {v2}) is not on one side of Q_p = [{lo}, {hi}]"
            )));
        }
        let e1: Vec<f64> = xs
            .iter()
            .map(|&x| expected_score_unchecked(s, &[v1, x], f))
            .collect();
        let e2: Vec<f64> = xs
            .iter()
            .map(|&x| expected_score_unchecked(s, &[v2, x], f))
            .collect();
        let pointwise_margin = e1
            .iter()
            .zip(&e2)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min);
        let min = |e: &[f64]| e.iter().copied().fold(f64::INFINITY, f64::min);
        let profile_margin = min(&e2) - min(&e1);
        out.push(OrderPair {
            v1,
            v2,
            pointwise_margin,
            profile_margin,
            pass: pointwise_margin >= ORDER_MARGIN && profile_margin >= ORDER_MARGIN,
        });
    }
    Ok(OrderOutcome {
        pass: out.iter().all(|q| q.pass),
        pairs: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::es;
    use crate::scoring::fz_score_default;
    use crate::verification::quantile_claim;

    fn lvl(p: f64) -> Level {
        Level::new(p).unwrap()
    }

    fn u(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::uniform(v).unwrap()
    }

    #[test]
    fn var_es_has_cxls_star() {
        let p = lvl(0.5);
        let t = |f: &DiscreteDistribution| {
            let e = es(f, p);
            Ok(vec![quantile_claim(f, p), (e, e)])
        };
        let f0 = DiscreteDistribution::mix_with_atom(&u(&[4.0, 6.0]), p, 1.0).unwrap();
        let f1 = DiscreteDistribution::mix_with_atom(&u(&[3.0, 5.0, 7.0]), p, 1.0).unwrap();
        let r = cxls_probe(&t, &f0, &f1, &[0.1, 0.5, 0.9], CxlsMode::CxlsStar).unwrap();
        assert!(r.pass && !r.vacuous, "{r:?}");
        let inter = r.intersection.unwrap();
        assert_eq!(inter[0], (1.0, 3.0));
        assert!((inter[1].0 - 5.0).abs() < 1e-12 && inter[1].0 == inter[1].1);
        // Different ES: vacuous.
        let f2 = DiscreteDistribution::mix_with_atom(&u(&[3.0, 4.0]), p, 1.0).unwrap();
        assert!(
            cxls_probe(&t, &f0, &f2, &[0.5], CxlsMode::CxlsStar)
                .unwrap()
                .vacuous
        );
    }

    #[test]
    fn variance_fails_cxls() {
        let t = |f: &DiscreteDistribution| {
            let m = f.mean();
            let var = f.iter().map(|(x, w)| (x - m) * (x - m) * w).sum::<f64>();
            Ok(vec![(var, var)])
        };
        let r = cxls_probe(&t, &u(&[0.0, 2.0]), &u(&[5.0, 7.0]), &[0.5], CxlsMode::Cxls).unwrap();
        assert!(!r.pass);
        assert_eq!(r.counterexample, Some(0.5));
    }

    #[test]
    fn containment_is_weaker_than_equality() {
        // The convex hull of the support grows under mixing.
        let t = |f: &DiscreteDistribution| Ok(vec![(f.min_atom(), f.max_atom())]);
        let (f0, f1) = (u(&[0.0, 4.0]), u(&[1.0, 3.0]));
        assert!(
            cxls_probe(&t, &f0, &f1, &[0.5], CxlsMode::Cxls)
                .unwrap()
                .pass
        );
        assert!(
            !cxls_probe(&t, &f0, &f1, &[0.5], CxlsMode::CxlsStar)
                .unwrap()
                .pass
        );
        let p = lvl(0.5);
        let q = |f: &DiscreteDistribution| Ok(vec![quantile_claim(f, p)]);
        // Q(F1) = {4} and Q(F2) = {0}.
        let f1 = DiscreteDistribution::new([(0.0, 0.25), (4.0, 0.75)]).unwrap();
        let f2 = DiscreteDistribution::new([(0.0, 0.75), (4.0, 0.25)]).unwrap();
        assert!(
            cxls_probe(&q, &f1, &f2, &[0.5], CxlsMode::CxlsStar)
                .unwrap()
                .vacuous
        );
    }

    #[test]
    fn order_sensitivity_u4() {
        let p = lvl(0.5);
        let s = fz_score_default(p);
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let f = u(&[1.0, 2.0, 3.0, 4.0]);
        let r = order_sensitivity_probe(
            &s,
            &f,
            p,
            &[(3.0, 4.0), (2.0, 1.0), (3.5, 4.5), (1.5, 0.0)],
            &xs,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        assert!(matches!(
            order_sensitivity_probe(&s, &f, p, &[(2.5, 3.5)], &xs),
            Err(Error::Precondition(_))
        ));
    }
}
