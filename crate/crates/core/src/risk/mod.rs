//! Risk measure evaluators and the tail/body composition `ρ = ρ* ∘ transform`.

mod axioms;

pub use axioms::{axiom_probe, Axiom, ProbeInput, ProbeOutcome};

use crate::blocks::{BvFunction, Loss};
use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};

const BISECTION_ITERS: usize = 200;

/// `(1/(1 − p)) ∫_p^1 VaR⁺_r dr`, integrated exactly over the flat pieces
/// of the quantile function.
pub fn es(f: &DiscreteDistribution, p: Level) -> f64 {
    let v = p.value();
    // Clamping keeps degenerate cases exact despite the division.
    (quantile_integral(f, v, 1.0) / (1.0 - v)).clamp(f.var_minus(p), f.max_atom())
}

/// `(1/(q − p)) ∫_p^q VaR⁺_r dr`.
pub fn rvar(f: &DiscreteDistribution, p: Level, q: Level) -> Result<f64> {
    let (p, q) = (p.value(), q.value());
    if p >= q {
        return Err(Error::Argument(format!(
            "RVaR requires p < q, got p = {p}, q = {q}"
        )));
    }
    let (lo, hi) = (f.var_plus(Level::new(p)?), f.var_minus(Level::new(q)?));
    Ok((quantile_integral(f, p, q) / (q - p)).clamp(lo, hi.max(lo)))
}

/// `∫_a^b F⁻¹(r) dr` for `0 ≤ a ≤ b ≤ 1`. On `(c_{k−1}, c_k)` both quantile
/// versions equal the k-th atom, so the integral is a finite sum.
fn quantile_integral(f: &DiscreteDistribution, a: f64, b: f64) -> f64 {
    let mut prev = 0.0_f64;
    let mut acc = 0.0;
    for (&x, &c) in f.atoms().iter().zip(f.cumulative()) {
        let overlap = c.min(b) - prev.max(a);
        if overlap > 0.0 {
            acc += x * overlap;
        }
        prev = c;
    }
    acc
}

/// The `τ`-expectile: the root of `τ E(Y − x)₊ − (1 − τ) E(x − Y)₊`.
pub fn expectile(f: &DiscreteDistribution, tau: Level) -> f64 {
    let tau = tau.value();
    let h = |x: f64| {
        let mut up = 0.0;
        let mut down = 0.0;
        for (a, m) in f.iter() {
            if a > x {
                up += (a - x) * m;
            } else {
                down += (x - a) * m;
            }
        }
        tau * up - (1.0 - tau) * down
    };
    // h is continuous and strictly decreasing; positive at min − 1 and
    // negative at max + 1.
    bisect_decreasing(h, f.min_atom() - 1.0, f.max_atom() + 1.0)
}

/// Shortfall risk `inf{m : E ℓ(Y − m) ≤ 0}`.
pub fn shortfall(f: &DiscreteDistribution, loss: &Loss) -> Result<f64> {
    let h = |m: f64| f.iter().map(|(a, w)| loss.eval(a - m) * w).sum::<f64>();
    let (lo, hi) = (f.min_atom() - 1.0, f.max_atom() + 1.0);
    if !(h(lo) > 0.0 && h(hi) <= 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    Ok(bisect_decreasing(h, lo, hi))
}

/// Bisection for `inf{x : h(x) ≤ 0}` with `h(lo) > 0 ≥ h(hi)`, run to float
/// resolution or the iteration cap.
fn bisect_decreasing(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `E u(Y) / E t(Y)`.
pub fn ratio_of_expectations(
    f: &DiscreteDistribution,
    u: &BvFunction,
    t: &BvFunction,
) -> Result<f64> {
    let num = f.expectation(|y| u.eval(y))?;
    let den = f.expectation(|y| t.eval(y))?;
    if den == 0.0 {
        return Err(Error::Argument("denominator expectation is zero".into()));
    }
    Ok(num / den)
}

/// A generating risk measure `ρ*`.
#[derive(Clone, Debug)]
pub enum GeneratorSpec {
    Mean,
    VarMinus(Level),
    VarPlus(Level),
    Es(Level),
    Expectile(Level),
    Shortfall(Loss),
    Ratio { u: BvFunction, t: BvFunction },
    Rvar(Level, Level),
}

impl GeneratorSpec {
    pub fn evaluate(&self, f: &DiscreteDistribution) -> Result<f64> {
        match self {
            GeneratorSpec::Mean => Ok(f.mean()),
            GeneratorSpec::VarMinus(a) => Ok(f.var_minus(*a)),
            GeneratorSpec::VarPlus(a) => Ok(f.var_plus(*a)),
            GeneratorSpec::Es(a) => Ok(es(f, *a)),
            GeneratorSpec::Expectile(tau) => Ok(expectile(f, *tau)),
            GeneratorSpec::Shortfall(loss) => shortfall(f, loss),
            GeneratorSpec::Ratio { u, t } => ratio_of_expectations(f, u, t),
            GeneratorSpec::Rvar(a, b) => rvar(f, *a, *b),
        }
    }

    /// The left-quantile generator of `VaR⁻_α` as a `p`-tail measure:
    /// level `(α − p)/(1 − p)`.
    pub fn var_generator_for(alpha: Level, p: Level) -> Result<Self> {
        Level::new((alpha.value() - p.value()) / (1.0 - p.value())).map(GeneratorSpec::VarMinus)
    }
}

/// Which part of the distribution the generator sees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    /// `F_p`.
    RightTail(Level),
    /// `F^q`, `q ∈ (0, 1]`.
    LeftTail(f64),
    /// `F^[p,q]`.
    Body(Level, Level),
}

impl Transform {
    pub fn apply(&self, f: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        match *self {
            Transform::RightTail(p) => Ok(f.tail(p)),
            Transform::LeftTail(q) => f.left_tail(q),
            Transform::Body(p, q) => f.body(p, q),
        }
    }
}

/// A generator and the transform inducing `ρ(F) = ρ*(transform(F))`.
#[derive(Clone, Debug)]
pub struct TailPairSpec {
    pub generator: GeneratorSpec,
    pub transform: Transform,
}

impl TailPairSpec {
    pub fn right(generator: GeneratorSpec, p: Level) -> Self {
        Self {
            generator,
            transform: Transform::RightTail(p),
        }
    }

    pub fn left(generator: GeneratorSpec, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Argument(format!(
                "left-tail level {q} is not in (0, 1]"
            )));
        }
        Ok(Self {
            generator,
            transform: Transform::LeftTail(q),
        })
    }

    pub fn body(generator: GeneratorSpec, p: Level, q: Level) -> Result<Self> {
        if p >= q {
            return Err(Error::Argument(format!(
                "body requires p < q, got {p} and {q}"
            )));
        }
        Ok(Self {
            generator,
            transform: Transform::Body(p, q),
        })
    }
}

/// `ρ*(transform(F))`.
pub fn tail_risk(spec: &TailPairSpec, f: &DiscreteDistribution) -> Result<f64> {
    spec.generator.evaluate(&spec.transform.apply(f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::NamedFn;

    fn lvl(p: f64) -> Level {
        Level::new(p).unwrap()
    }

    fn u4() -> DiscreteDistribution {
        DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn delta(x: f64) -> DiscreteDistribution {
        DiscreteDistribution::point_mass(x).unwrap()
    }

    fn u01() -> DiscreteDistribution {
        DiscreteDistribution::uniform(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn es_examples() {
        assert_eq!(es(&u4(), lvl(0.5)), 3.5);
        assert_eq!(es(&delta(2.0), lvl(0.9)), 2.0);
        assert_eq!(es(&u4(), lvl(0.75)), 4.0);
    }

    #[test]
    fn rvar_examples() {
        assert_eq!(rvar(&u4(), lvl(0.25), lvl(0.75)).unwrap(), 2.5);
        assert!((rvar(&delta(2.0), lvl(0.2), lvl(0.8)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(rvar(&u4(), lvl(0.5), lvl(0.75)).unwrap(), 3.0);
        assert!(rvar(&u4(), lvl(0.5), lvl(0.5)).is_err());
    }

    #[test]
    fn expectile_examples() {
        assert!((expectile(&u4(), lvl(0.5)) - 2.5).abs() < 1e-12);
        // Two-point closed form τθ/(τθ + (1 − τ)(1 − θ)) with θ = 1/2.
        assert!((expectile(&u01(), lvl(0.8)) - 0.8).abs() < 1e-12);
        assert!((expectile(&delta(2.0), lvl(0.3)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shortfall_examples() {
        assert!((shortfall(&u4(), &Loss::Identity).unwrap() - 2.5).abs() < 1e-12);
        assert!((shortfall(&delta(2.0), &Loss::ExpMinusOne).unwrap() - 2.0).abs() < 1e-12);
        let expect = ((1.0 + std::f64::consts::E) / 2.0).ln();
        assert!((shortfall(&u01(), &Loss::ExpMinusOne).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.6201).abs() < 1e-4);
    }

    #[test]
    fn shortfall_bracket_failure() {
        // ℓ ≥ 0 everywhere: never crosses zero.
        let loss = Loss::Custom(NamedFn::new("abs", f64::abs));
        assert!(matches!(
            shortfall(&u4(), &loss),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(
            ratio_of_expectations(&u4(), &BvFunction::Identity, &BvFunction::One).unwrap(),
            2.5
        );
        assert_eq!(
            ratio_of_expectations(&u01(), &BvFunction::Square, &BvFunction::One).unwrap(),
            0.5
        );
        assert_eq!(
            ratio_of_expectations(&delta(2.0), &BvFunction::One, &BvFunction::Square).unwrap(),
            0.25
        );
        assert!(
            ratio_of_expectations(&delta(0.0), &BvFunction::One, &BvFunction::Identity).is_err()
        );
    }

    #[test]
    fn tail_risk_examples() {
        let spec = TailPairSpec::right(GeneratorSpec::Mean, lvl(0.5));
        assert_eq!(tail_risk(&spec, &u4()).unwrap(), 3.5);

        let spec = TailPairSpec::body(GeneratorSpec::Mean, lvl(0.25), lvl(0.75)).unwrap();
        assert_eq!(tail_risk(&spec, &u4()).unwrap(), 2.5);

        let spec = TailPairSpec::left(GeneratorSpec::Mean, 0.5).unwrap();
        assert_eq!(tail_risk(&spec, &u4()).unwrap(), 1.5);
    }

    #[test]
    fn var_generator_matches_var_of_original() {
        let f = DiscreteDistribution::new((0..20).map(|i| (i as f64 * 0.37, 1.0 + (i % 3) as f64)))
            .unwrap();
        for &(alpha, p) in &[(0.9, 0.5), (0.75, 0.25), (0.6, 0.1), (0.95, 0.9)] {
            let g = GeneratorSpec::var_generator_for(lvl(alpha), lvl(p)).unwrap();
            let spec = TailPairSpec::right(g, lvl(p));
            assert_eq!(
                tail_risk(&spec, &f).unwrap(),
                f.var_minus(lvl(alpha)),
                "alpha = {alpha}, p = {p}"
            );
        }
    }
}
