//! Named verification suites, addressable from the command line.

use serde::Serialize;
use serde_json::{json, Value};

use crate::blocks::{ConvexSpec, NamedFn};
use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};
use crate::identification::{lift_id, mean_id};
use crate::meta::SpecMeta;
use crate::proper::{crps, qw_crps, tail_crps_score};
use crate::risk::{es, expectile, rvar};
use crate::scoring::{
    body_score, bregman_score, expectile_score, fz_score_default, level_default_g, lift_score,
    monotone_repair, rvar_score_default, RepairBound, ScoreSpec,
};

use super::{
    certify_consistency, certify_identifiability, cxls_probe, order_sensitivity_probe,
    quantile_claim, Claim, CxlsMode, Family, SCHEMA_VERSION,
};

pub const SUITES: &[&str] = &[
    "fz",
    "lift-expectile",
    "body-rvar",
    "cxls",
    "order-sensitivity",
    "proper-tail",
    "lift-mean-id",
    "broken-no-correction",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<SuiteCheck>,
}

fn lvl(p: f64) -> Level {
    Level::new(p).expect("suite level")
}

fn axis(lo: f64, hi: f64, step: f64) -> Axis {
    Axis::new(lo, hi, step).expect("suite axis")
}

fn detail<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn check<T: Serialize>(name: &str, pass: bool, x: &T) -> SuiteCheck {
    SuiteCheck {
        name: name.into(),
        pass,
        detail: detail(x),
    }
}

/// Runs the suite called `name` with family seed `seed`.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "fz" => fz(seed)?,
        "lift-expectile" => lift_expectile(seed)?,
        "body-rvar" => body_rvar(seed)?,
        "cxls" => cxls(seed)?,
        "order-sensitivity" => order_sensitivity(seed)?,
        "proper-tail" => proper_tail(seed)?,
        "lift-mean-id" => lift_mean_id(seed)?,
        "broken-no-correction" => broken_no_correction(seed)?,
        _ => {
            return Err(Error::UnknownName(format!(
                "suite `{name}` (known: {})",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        suite: name.into(),
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn var_es_claim(p: Level) -> impl Fn(&DiscreteDistribution) -> Result<Claim> + Sync {
    move |f| {
        let e = es(f, p);
        Ok(vec![quantile_claim(f, p), (e, e)])
    }
}

/// The defaults on 30 distributions in `M_(0.5)`, step 0.02.
pub fn fz(seed: u64) -> Result<Vec<SuiteCheck>> {
    let p = lvl(0.5);
    let family = Family::new(seed, 30).conditioned(p).generate()?;
    let grid = Grid::cube(axis(0.0, 10.0, 0.02), 2)?;
    let r = certify_consistency(&fz_score_default(p), &var_es_claim(p), &family, &grid)?;
    Ok(vec![check(
        "fz consistency for (Q_0.5, ES_0.5)",
        r.pass,
        &r,
    )])
}

/// Repaired expectile score, bounded-φ Bregman form, `τ = 0.8`.
pub fn repaired_expectile(tau: Level) -> Result<ScoreSpec> {
    let s = expectile_score(tau, ConvexSpec::bounded_quadratic(), NamedFn::zero());
    monotone_repair(&s, RepairBound::Constant(-2.0), NamedFn::identity())
}

/// The lifted repaired 0.8-expectile score: the U4 argmin and 30 random
/// distributions.
pub fn lift_expectile(seed: u64) -> Result<Vec<SuiteCheck>> {
    let (p, tau) = (lvl(0.5), lvl(0.8));
    let s = lift_score(&repaired_expectile(tau)?, p, NamedFn::zero())?;
    let t = move |f: &DiscreteDistribution| {
        let e = expectile(&f.tail(p), tau);
        Ok(vec![quantile_claim(f, p), (e, e)])
    };
    let grid = Grid::cube(axis(0.0, 10.0, 0.02), 2)?;
    let u4 = vec![DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0])?];
    let r_u4 = certify_consistency(&s, &t, &u4, &grid)?;
    let coarse = Grid::cube(axis(0.0, 10.0, 0.05), 2)?;
    let family = Family::new(seed, 30).generate()?;
    let r = certify_consistency(&s, &t, &family, &coarse)?;
    Ok(vec![
        check("U4 argmin ([2, 3], 3.8)", r_u4.pass, &r_u4),
        check("lifted expectile consistency", r.pass, &r),
    ])
}

/// The body score of the scaled mean score against `(Q_p, Q_q, RVaR_{p,q})`,
/// together with the explicit RVaR score.
pub fn body_rvar(seed: u64) -> Result<Vec<SuiteCheck>> {
    let (p, q) = (lvl(0.25), lvl(0.75));
    let scale = 1.0 / (q.value() - p.value());
    let sstar = bregman_score(
        ConvexSpec::bounded_quadratic().scaled(scale)?,
        NamedFn::zero(),
    );
    let g = level_default_g(scale);
    let body = body_score(&sstar, p, q, g.clone(), g, NamedFn::zero())?;
    let t = move |f: &DiscreteDistribution| {
        let r = rvar(f, p, q)?;
        Ok(vec![quantile_claim(f, p), quantile_claim(f, q), (r, r)])
    };
    let grid = Grid::cube(axis(0.0, 10.0, 0.2), 3)?;
    let family = Family::new(seed, 20).generate()?;
    let rb = certify_consistency(&body, &t, &family, &grid)?;
    let rr = certify_consistency(&rvar_score_default(p, q)?, &t, &family, &grid)?;
    Ok(vec![
        check("body score consistency", rb.pass, &rb),
        check("RVaR score consistency", rr.pass, &rr),
    ])
}

/// `(Q_p, ES_p)` along mixtures of distributions sharing their value, and
/// the variance as a known violator.
pub fn cxls(seed: u64) -> Result<Vec<SuiteCheck>> {
    let p = lvl(0.5);
    let t = var_es_claim(p);
    let lambdas = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut outcomes = Vec::new();
    let fam = Family::new(seed, 20).generate()?;
    for pair in fam.chunks(2) {
        // Tails above r = −1 with equal means; both F_i put mass p at r, so
        // they share v = r and ES.
        let (g0, g1) = (&pair[0], &pair[1]);
        let g1 = g1.shift(g0.mean() - g1.mean());
        let r = g0.min_atom().min(g1.min_atom()) - 1.0;
        let f0 = DiscreteDistribution::mix_with_atom(g0, p, r)?;
        let f1 = DiscreteDistribution::mix_with_atom(&g1, p, r)?;
        outcomes.push(cxls_probe(&t, &f0, &f1, &lambdas, CxlsMode::CxlsStar)?);
    }
    let shared = outcomes.iter().all(|o| o.pass && !o.vacuous);
    let variance = |f: &DiscreteDistribution| {
        let m = f.mean();
        let var = f.iter().map(|(x, w)| (x - m) * (x - m) * w).sum::<f64>();
        Ok(vec![(var, var)])
    };
    let u = |v: &[f64]| DiscreteDistribution::uniform(v);
    let violator = cxls_probe(
        &variance,
        &u(&[0.0, 2.0])?,
        &u(&[5.0, 7.0])?,
        &lambdas,
        CxlsMode::Cxls,
    )?;
    Ok(vec![
        check(
            "(Q_0.5, ES_0.5) on shared-value mixtures",
            shared,
            &outcomes,
        ),
        check("variance violates CxLS", !violator.pass, &violator),
    ])
}

/// Pairs of lattice points on both sides of `Q_p(F)`.
fn sided_pairs(f: &DiscreteDistribution, p: Level) -> Vec<(f64, f64)> {
    let (lo, hi) = (f.var_minus(p), f.var_plus(p));
    let pts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    let mut pairs = Vec::new();
    for &a in &pts {
        for &b in &pts {
            if (b < a && a <= lo) || (hi <= a && a < b) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// The FZ defaults on U4 and 20 random distributions.
pub fn order_sensitivity(seed: u64) -> Result<Vec<SuiteCheck>> {
    let p = lvl(0.5);
    let s = fz_score_default(p);
    let xs = axis(0.0, 10.0, 0.1).points();
    let mut dists = vec![DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0])?];
    dists.extend(Family::new(seed, 20).generate()?);
    let mut outcomes = Vec::new();
    for f in &dists {
        outcomes.push(order_sensitivity_probe(&s, f, p, &sided_pairs(f, p), &xs)?);
    }
    let pass = outcomes.iter().all(|o| o.pass && !o.pairs.is_empty());
    let pairs: usize = outcomes.iter().map(|o| o.pairs.len()).sum();
    let worst = outcomes
        .iter()
        .flat_map(|o| &o.pairs)
        .map(|q| q.pointwise_margin.min(q.profile_margin))
        .fold(f64::INFINITY, f64::min);
    Ok(vec![check(
        "order sensitivity in v",
        pass,
        &json!({ "distributions": dists.len(), "pairs": pairs, "worst_margin": worst }),
    )])
}

/// 20 candidate forecasts for U4 at p = 0.5 (half of them share the tail)
/// under the tail CRPS score; and `qw_crps(0) = crps` on random pairs.
pub fn proper_tail(seed: u64) -> Result<Vec<SuiteCheck>> {
    let p = lvl(0.5);
    let u4 = DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0])?;
    let fam = Family::new(seed, 20).generate()?;
    let mut candidates = Vec::with_capacity(20);
    for (i, g) in fam.iter().enumerate() {
        // Lower half: the family member squeezed into [0, 2.9]; upper half
        // either (U4)_p itself or a perturbation of it.
        let lower: Vec<(f64, f64)> = g.iter().map(|(a, m)| (a * 0.29, 0.5 * m)).collect();
        let upper = if i % 2 == 0 {
            vec![(3.0, 0.25), (4.0, 0.25)]
        } else {
            let shift = 0.1 * (1 + i % 5) as f64;
            vec![(3.0 + shift * (i % 3) as f64, 0.25), (4.0 + shift, 0.25)]
        };
        candidates.push(DiscreteDistribution::new(lower.into_iter().chain(upper))?);
    }
    let sharing: Vec<bool> = candidates
        .iter()
        .map(|g| g.tail(p).approx_eq(&u4.tail(p), 1e-12))
        .collect();
    let score = tail_crps_score(p);
    let vs = axis(0.0, 5.0, 0.05).points();
    let values: Vec<Vec<f64>> = candidates
        .iter()
        .map(|g| vs.iter().map(|&v| score.expected(v, g, &u4)).collect())
        .collect();
    let min = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for (c, row) in values.iter().enumerate() {
        for (&v, &e) in vs.iter().zip(row) {
            let inside = sharing[c] && (2.0 - 1e-9..=3.0 + 1e-9).contains(&v);
            if inside {
                ok &= e <= min + 1e-12;
            } else {
                margin = margin.min(e - min);
            }
        }
    }
    ok &= margin > 1e-10 && sharing.iter().any(|&s| s) && sharing.iter().any(|&s| !s);

    let q0 = qw_crps(0.0)?;
    let mut worst = 0.0_f64;
    for (i, f) in Family::new(seed ^ 0x9e37, 100)
        .generate()?
        .iter()
        .enumerate()
    {
        let y = (i as f64 * 0.37) % 11.0 - 0.5;
        worst = worst.max((q0.score(f, y) - crps(f, y)).abs());
    }
    Ok(vec![
        check(
            "tail CRPS minimized by candidates sharing (U4)_0.5, v in [2, 3]",
            ok,
            &json!({ "candidates": candidates.len(), "sharing": sharing, "min": min, "margin": margin }),
        ),
        check(
            "qw_crps(0) equals crps",
            worst <= 1e-10,
            &json!({ "max_abs_diff": worst }),
        ),
    ])
}

/// The lifted mean identification function passes on `M_(p)` and fails
/// outside it, for p in {0.25, 0.5, 0.9}.
pub fn lift_mean_id(seed: u64) -> Result<Vec<SuiteCheck>> {
    let grid = Grid::cube(axis(0.0, 10.0, 0.05), 2)?;
    let mut checks = Vec::new();
    for p in [0.25, 0.5, 0.9] {
        let p = lvl(p);
        let v = lift_id(&mean_id(), p, true)?;
        let t = var_es_claim(p);
        let good = certify_identifiability(
            &v,
            &t,
            &Family::new(seed, 20).conditioned(p).generate()?,
            &grid,
        )?;
        let raw = certify_identifiability(&v, &t, &Family::new(seed, 20).generate()?, &grid)?;
        let pv = p.value();
        checks.push(check(
            &format!("p = {pv}: passes on M_(p)"),
            good.pass,
            &good,
        ));
        checks.push(check(
            &format!("p = {pv}: fails without the M_(p) condition"),
            !raw.pass && raw.counterexample.is_some(),
            &raw,
        ));
    }
    Ok(checks)
}

/// `1{y > v}S*(x, y)` without the correction term.
pub fn uncorrected_lift(sstar: &ScoreSpec) -> Result<ScoreSpec> {
    sstar.require_arity(1)?;
    let inner = sstar.clone();
    let meta = SpecMeta::new("lift_without_correction").block(sstar.meta().construction.clone());
    Ok(ScoreSpec::new(2, meta, sstar.eval_box(), move |f, y| {
        if y > f[0] {
            inner.scalar(f[1], y)
        } else {
            0.0
        }
    }))
}

/// Deliberately broken: the lifted mean score with the correction term
/// dropped, on distributions outside `M_(p)`. Expected to fail.
pub fn broken_no_correction(seed: u64) -> Result<Vec<SuiteCheck>> {
    let p = lvl(0.5);
    let sstar = bregman_score(
        ConvexSpec::bounded_quadratic().scaled(1.0 / (1.0 - p.value()))?,
        NamedFn::zero(),
    );
    let repaired = monotone_repair(&sstar, RepairBound::Constant(-2.0), NamedFn::identity())?;
    let s = uncorrected_lift(&repaired)?;
    let family: Vec<_> = Family::new(seed, 10)
        .generate()?
        .into_iter()
        .filter(|f| !f.in_m_p(p))
        .collect();
    let grid = Grid::cube(axis(0.0, 10.0, 0.05), 2)?;
    let r = certify_consistency(&s, &var_es_claim(p), &family, &grid)?;
    Ok(vec![check("uncorrected lift consistency", r.pass, &r)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", 1), Err(Error::UnknownName(_))));
    }

    #[test]
    fn cheap_suites() {
        for name in ["cxls", "order-sensitivity", "proper-tail"] {
            let r = run_suite(name, 7).unwrap();
            assert!(
                r.pass,
                "{name}: {:?}",
                r.checks
                    .iter()
                    .map(|c| (&c.name, c.pass))
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn broken_suite_fails() {
        let r = run_suite("broken-no-correction", 7).unwrap();
        assert!(!r.pass);
    }
}
