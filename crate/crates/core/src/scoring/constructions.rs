//! Scores for tail pairs built from a score `S*` of the generator, and
//! restrictions of scores of `ρ` back to the generator.

use crate::blocks::NamedFn;
use crate::dist::Level;
use crate::error::{Error, Result};
use crate::meta::SpecMeta;

use super::{ind, require_increasing, ScoreSpec};

/// `S(v, x, y) = 1{y > v}S*(x, y) + (1{y ≤ v} − p)S*(x, v) + a(y)`.
///
/// Strictly consistent for `(Q_p, ρ)` when `S*` is strictly consistent for
/// the generator and strictly increasing in `y`; the latter is checked.
pub fn lift_score(sstar: &ScoreSpec, p: Level, a: NamedFn) -> Result<ScoreSpec> {
    sstar.check_increasing_in_y()?;
    let p = p.value();
    let inner = sstar.clone();
    let meta = SpecMeta::new("lift")
        .param("p", p)
        .block(sstar.meta().construction.clone())
        .block(a.name());
    Ok(ScoreSpec::new(2, meta, sstar.eval_box(), move |f, y| {
        let (v, x) = (f[0], f[1]);
        ind(y > v) * inner.scalar(x, y) + (ind(y <= v) - p) * inner.scalar(x, v) + a.call(y)
    }))
}

/// The `x`-slice of the lifted score at a fixed `v`; strictly consistent for
/// `ρ` on distributions with `v ∈ Q_p(F)`, with no monotonicity needed.
pub fn conditional_score(sstar: &ScoreSpec, p: Level, v: f64) -> Result<ScoreSpec> {
    sstar.require_arity(1)?;
    let p = p.value();
    let inner = sstar.clone();
    let meta = SpecMeta::new("conditional")
        .param("p", p)
        .param("v", v)
        .block(sstar.meta().construction.clone());
    Ok(ScoreSpec::new(1, meta, sstar.eval_box(), move |f, y| {
        let x = f[0];
        ind(y > v) * inner.scalar(x, y) + (ind(y <= v) - p) * inner.scalar(x, v)
    }))
}

/// `(1 − p)S(x, y) + p S(x, r)`: a score of `ρ` restricted to the generator
/// on distributions bounded below by `r`.
pub fn restrict_score(s: &ScoreSpec, p: Level, r: f64) -> Result<ScoreSpec> {
    s.require_arity(1)?;
    let p = p.value();
    let inner = s.clone();
    let meta = SpecMeta::new("restrict")
        .param("p", p)
        .param("r", r)
        .block(s.meta().construction.clone());
    Ok(ScoreSpec::new(1, meta, s.eval_box(), move |f, y| {
        (1.0 - p) * inner.scalar(f[0], y) + p * inner.scalar(f[0], r)
    }))
}

/// `(1 − p)S(r, x, y) + p S(r, x, r)` for a score of `(Q_p, ρ)`.
pub fn restrict_score_pair(s: &ScoreSpec, p: Level, r: f64) -> Result<ScoreSpec> {
    s.require_arity(2)?;
    let p = p.value();
    let inner = s.clone();
    let meta = SpecMeta::new("restrict_pair")
        .param("p", p)
        .param("r", r)
        .block(s.meta().construction.clone());
    Ok(ScoreSpec::new(1, meta, s.eval_box(), move |f, y| {
        let x = f[0];
        (1.0 - p) * inner.eval(&[r, x], y) + p * inner.eval(&[r, x], r)
    }))
}

/// `S(v, x, y) = 1{y ≤ v}S*(x, y) − (1{y ≤ v} − q)S*(x, v) + a(y)`, strictly
/// consistent for `(Q_q, ρ^q)` when `S*` is strictly decreasing in `y`.
pub fn left_tail_score(sstar: &ScoreSpec, q: Level, a: NamedFn) -> Result<ScoreSpec> {
    sstar.check_decreasing_in_y()?;
    let q = q.value();
    let inner = sstar.clone();
    let meta = SpecMeta::new("left_tail")
        .param("q", q)
        .block(sstar.meta().construction.clone())
        .block(a.name());
    Ok(ScoreSpec::new(2, meta, sstar.eval_box(), move |f, y| {
        let (v, x) = (f[0], f[1]);
        let hit = ind(y <= v);
        hit * inner.scalar(x, y) - (hit - q) * inner.scalar(x, v) + a.call(y)
    }))
}

/// The body score for `(Q_p, Q_q, ρ^[p,q])`:
///
/// ```text
/// 1{v1 < y ≤ v2}S*(x, y) + (1{y ≤ v1} − p)S*(x, v1) − (1{y ≤ v2} − q)S*(x, v2)
///   + (1{y ≤ v1} − p)g1(v1) + 1{y > v1}g1(y)
///   + (1{y ≤ v2} − q)g2(v2) + 1{y > v2}g2(y) + a(y)
/// ```
///
/// The `g2` term uses `q`, which makes the `(v2, y)`-slice a generalized
/// piecewise linear score for `Q_q`. Requires `v ↦ g1(v) + S*(x, v)` and
/// `v ↦ g2(v) − S*(x, v)` strictly increasing for every `x`.
pub fn body_score(
    sstar: &ScoreSpec,
    p: Level,
    q: Level,
    g1: NamedFn,
    g2: NamedFn,
    a: NamedFn,
) -> Result<ScoreSpec> {
    sstar.require_arity(1)?;
    if p >= q {
        return Err(Error::Argument(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    let bx = sstar.eval_box();
    require_increasing("g1(v) + S*(x, v)", &bx, |x, v| {
        g1.call(v) + sstar.scalar(x, v)
    })?;
    require_increasing("g2(v) - S*(x, v)", &bx, |x, v| {
        g2.call(v) - sstar.scalar(x, v)
    })?;
    let (p, q) = (p.value(), q.value());
    let inner = sstar.clone();
    let meta = SpecMeta::new("body")
        .ordered(0, 1)
        .param("p", p)
        .param("q", q)
        .block(sstar.meta().construction.clone())
        .block(g1.name())
        .block(g2.name())
        .block(a.name());
    Ok(ScoreSpec::new(3, meta, bx, move |f, y| {
        let (v1, v2, x) = (f[0], f[1], f[2]);
        let h1 = ind(y <= v1) - p;
        let h2 = ind(y <= v2) - q;
        ind(v1 < y && y <= v2) * inner.scalar(x, y) + h1 * inner.scalar(x, v1)
            - h2 * inner.scalar(x, v2)
            + h1 * g1.call(v1)
            + ind(y > v1) * g1.call(y)
            + h2 * g2.call(v2)
            + ind(y > v2) * g2.call(y)
            + a.call(y)
    }))
}
