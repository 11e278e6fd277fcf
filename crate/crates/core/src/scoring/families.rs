//! Classical score families.

use crate::blocks::{BvFunction, ConvexSpec, Loss, NamedFn};
use crate::dist::Level;
use crate::error::{Error, Result};
use crate::meta::SpecMeta;

use super::{ind, require_increasing, EvalBox, ScoreSpec};

/// `S(x, y) = −φ(x) + φ′(x)(x − y) + a(y)`, strictly consistent for the mean.
pub fn bregman_score(phi: ConvexSpec, a: NamedFn) -> ScoreSpec {
    let meta = SpecMeta::new("bregman").block(phi.name()).block(a.name());
    ScoreSpec::new(1, meta, EvalBox::default(), move |f, y| {
        let x = f[0];
        -phi.phi(x) + phi.dphi(x) * (x - y) + a.call(y)
    })
}

/// `S(x, y) = 1{y > x}g(y) + (1{y ≤ x} − p)g(x) + a(y)` with `g` strictly
/// increasing.
pub fn quantile_score(p: Level, g: NamedFn, a: NamedFn) -> Result<ScoreSpec> {
    let bx = EvalBox::default();
    require_increasing(g.name(), &bx, |_, v| g.call(v))?;
    let p = p.value();
    let meta = SpecMeta::new("quantile")
        .param("p", p)
        .block(g.name())
        .block(a.name());
    Ok(ScoreSpec::new(1, meta, bx, move |f, y| {
        let x = f[0];
        ind(y > x) * g.call(y) + (ind(y <= x) - p) * g.call(x) + a.call(y)
    }))
}

/// The pinball loss `(1{y ≤ x} − p)(x − y)`.
pub fn pinball_score(p: Level) -> ScoreSpec {
    let pv = p.value();
    let meta = SpecMeta::new("quantile")
        .param("p", pv)
        .block("g.identity")
        .block("a.pinball");
    ScoreSpec::new(1, meta, EvalBox::default(), move |f, y| {
        (ind(y <= f[0]) - pv) * (f[0] - y)
    })
}

/// The `(Q_p, ES_p)` score
///
/// ```text
/// S(v, x, y) = 1{y > v}g(y) + (1{y ≤ v} − p)g(v)
///            + φ′(x)(x − [1{y > v}y + (1{y ≤ v} − p)v]/(1 − p)) − φ(x) + a(y)
/// ```
///
/// requiring `v ↦ g(v) − φ′(x)v/(1 − p)` strictly increasing for every `x`.
pub fn fz_score(p: Level, phi: ConvexSpec, g: NamedFn, a: NamedFn) -> Result<ScoreSpec> {
    let bx = EvalBox::default();
    let pv = p.value();
    require_increasing("g(v) - phi'(x) v/(1 - p)", &bx, |x, v| {
        g.call(v) - phi.dphi(x) * v / (1.0 - pv)
    })?;
    let meta = SpecMeta::new("fz")
        .param("p", pv)
        .block(phi.name())
        .block(g.name())
        .block(a.name());
    Ok(ScoreSpec::new(2, meta, bx, move |f, y| {
        let (v, x) = (f[0], f[1]);
        let hit = ind(y <= v) - pv;
        let tail = (ind(y > v) * y + hit * v) / (1.0 - pv);
        ind(y > v) * g.call(y) + hit * g.call(v) + phi.dphi(x) * (x - tail) - phi.phi(x) + a.call(y)
    }))
}

/// `g(v) = v/(1 − p) + v`, valid with any `φ` whose subgradient is bounded
/// by one.
pub fn level_default_g(scale: f64) -> NamedFn {
    NamedFn::new("g.level_default", move |v| v * scale + v)
}

/// [`fz_score`] with `φ(x) = x²/(1 + |x|)`, `g(v) = v/(1 − p) + v`, `a = 0`.
pub fn fz_score_default(p: Level) -> ScoreSpec {
    let g = level_default_g(1.0 / (1.0 - p.value()));
    fz_score(p, ConvexSpec::bounded_quadratic(), g, NamedFn::zero())
        .expect("default satisfies the monotonicity condition")
}

/// The `(Q_p, Q_q, RVaR_{p,q})` score; requires `v ↦ g1(v) − φ′(x)v/(q − p)`
/// and `v ↦ g2(v) + φ′(x)v/(q − p)` strictly increasing.
pub fn rvar_score(
    p: Level,
    q: Level,
    phi: ConvexSpec,
    g1: NamedFn,
    g2: NamedFn,
    a: NamedFn,
) -> Result<ScoreSpec> {
    if p >= q {
        return Err(Error::Argument(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    let (p, q) = (p.value(), q.value());
    let w = q - p;
    let bx = EvalBox::default();
    require_increasing("g1(v) - phi'(x) v/(q - p)", &bx, |x, v| {
        g1.call(v) - phi.dphi(x) * v / w
    })?;
    require_increasing("g2(v) + phi'(x) v/(q - p)", &bx, |x, v| {
        g2.call(v) + phi.dphi(x) * v / w
    })?;
    let meta = SpecMeta::new("rvar")
        .ordered(0, 1)
        .param("p", p)
        .param("q", q)
        .block(phi.name())
        .block(g1.name())
        .block(g2.name())
        .block(a.name());
    Ok(ScoreSpec::new(3, meta, bx, move |f, y| {
        let (v1, v2, x) = (f[0], f[1], f[2]);
        let h1 = ind(y <= v1) - p;
        let h2 = ind(y <= v2) - q;
        let body = (ind(v1 < y && y <= v2) * y + h1 * v1 - h2 * v2) / w;
        ind(y > v1) * g1.call(y)
            + h1 * g1.call(v1)
            + ind(y > v2) * g2.call(y)
            + h2 * g2.call(v2)
            + phi.dphi(x) * (x - body)
            - phi.phi(x)
            + a.call(y)
    }))
}

/// [`rvar_score`] with `φ(x) = x²/(1 + |x|)`, `g1 = g2 = v/(q − p) + v`.
pub fn rvar_score_default(p: Level, q: Level) -> Result<ScoreSpec> {
    let g = level_default_g(1.0 / (q.value() - p.value()));
    rvar_score(
        p,
        q,
        ConvexSpec::bounded_quadratic(),
        g.clone(),
        g,
        NamedFn::zero(),
    )
}

/// `S(x, y) = |1{y ≤ x} − τ|(φ(y) − φ(x) + φ′(x)(x − y)) + g(y)`.
pub fn expectile_score(tau: Level, phi: ConvexSpec, g: NamedFn) -> ScoreSpec {
    let t = tau.value();
    let meta = SpecMeta::new("expectile")
        .param("tau", t)
        .block(phi.name())
        .block(g.name());
    ScoreSpec::new(1, meta, EvalBox::default(), move |f, y| {
        let x = f[0];
        (ind(y <= x) - t).abs() * (phi.phi(y) - phi.phi(x) + phi.dphi(x) * (x - y)) + g.call(y)
    })
}

/// `S(x, y) = −φ(x)t(y) + φ′(x)(x t(y) − u(y)) + g(y)` for `E u(Y) / E t(Y)`.
pub fn ratio_score(u: BvFunction, t: BvFunction, phi: ConvexSpec, g: NamedFn) -> ScoreSpec {
    let meta = SpecMeta::new("ratio")
        .block(u.name())
        .block(t.name())
        .block(phi.name())
        .block(g.name());
    ScoreSpec::new(1, meta, EvalBox::default(), move |f, y| {
        let x = f[0];
        let ty = t.eval(y);
        -phi.phi(x) * ty + phi.dphi(x) * (x * ty - u.eval(y)) + g.call(y)
    })
}

/// `S(x, y) = −∫_0^x ℓ(y − z) dz + g(y)`.
///
/// The integral is closed-form for the built-in losses. For custom losses it
/// is computed by adaptive quadrature; construction fails if quadrature does
/// not converge at the corners and centre of the evaluation box, and later
/// non-convergence evaluates to NaN.
pub fn shortfall_score(loss: Loss, g: NamedFn) -> Result<ScoreSpec> {
    let bx = EvalBox::default();
    for &(x, y) in &[
        (bx.lo, bx.lo),
        (bx.lo, bx.hi),
        (bx.hi, bx.lo),
        (bx.hi, bx.hi),
        (0.5 * (bx.lo + bx.hi), 0.0),
    ] {
        loss.shifted_integral(x, y)?;
    }
    let meta = SpecMeta::new("shortfall")
        .block(loss.name())
        .block(g.name());
    Ok(ScoreSpec::new(1, meta, bx, move |f, y| {
        match loss.shifted_integral(f[0], y) {
            Ok(v) => -v + g.call(y),
            Err(_) => f64::NAN,
        }
    }))
}
