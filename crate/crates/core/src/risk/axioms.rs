//! Numerical probes for the monetary/coherence axioms.
//!
//! Random variables are outcome vectors on a common finite sample space with
//! equal probabilities, so sums and comonotonicity are well defined.

use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};

const AXIOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// (A1) `X ≤ Y` ⇒ `ρ(X) ≤ ρ(Y)`.
    Monotonicity,
    /// (A2) `ρ(X − m) = ρ(X) − m`.
    TranslationEquivariance,
    /// (A3) `ρ(λX + (1 − λ)Y) ≤ λρ(X) + (1 − λ)ρ(Y)`.
    Convexity,
    /// (A4) `ρ(λX) = λρ(X)` for `λ > 0`.
    PositiveHomogeneity,
    /// (A5) `ρ(X + Y) ≤ ρ(X) + ρ(Y)`.
    Subadditivity,
    /// (A6) `ρ(X + Y) = ρ(X) + ρ(Y)` for comonotonic `X, Y`.
    ComonotonicAdditivity,
}

/// One probe instance. `y` is required by the two-variable axioms and
/// `c` carries `m` (A2) or `λ` (A3, A4).
#[derive(Clone, Debug, Default)]
pub struct ProbeInput {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub c: Option<f64>,
}

impl ProbeInput {
    pub fn single(x: Vec<f64>) -> Self {
        Self {
            x,
            ..Default::default()
        }
    }

    pub fn pair(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            x,
            y: Some(y),
            c: None,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub axiom: Axiom,
    pub pass: bool,
    pub instances: usize,
    /// Index, left side and right side of the first violated instance.
    pub witness: Option<(usize, f64, f64)>,
}

fn law(x: &[f64]) -> Result<DiscreteDistribution> {
    DiscreteDistribution::uniform(x)
}

fn comonotonic(x: &[f64], y: &[f64]) -> bool {
    for i in 0..x.len() {
        for j in 0..x.len() {
            if (x[i] - x[j]) * (y[i] - y[j]) < 0.0 {
                return false;
            }
        }
    }
    true
}

/// Checks `axiom` for the law-based `measure` on every instance, stopping at
/// the first counterexample.
pub fn axiom_probe(
    measure: &dyn Fn(&DiscreteDistribution) -> Result<f64>,
    axiom: Axiom,
    inputs: &[ProbeInput],
) -> Result<ProbeOutcome> {
    let rho = |v: &[f64]| law(v).and_then(|f| measure(&f));
    for (i, inst) in inputs.iter().enumerate() {
        if inst.x.is_empty() {
            return Err(Error::Argument(format!(
                "instance {i}: empty outcome vector"
            )));
        }
        let needs_y = matches!(
            axiom,
            Axiom::Monotonicity
                | Axiom::Convexity
                | Axiom::Subadditivity
                | Axiom::ComonotonicAdditivity
        );
        let y = match (&inst.y, needs_y) {
            (Some(y), true) if y.len() == inst.x.len() => Some(y.as_slice()),
            (_, true) => {
                return Err(Error::Argument(format!(
                    "instance {i}: missing or mismatched y"
                )))
            }
            _ => None,
        };
        let c = inst.c;

        let (lhs, rhs, holds) = match axiom {
            Axiom::Monotonicity => {
                let y = y.unwrap();
                if inst.x.iter().zip(y).any(|(a, b)| a > b) {
                    return Err(Error::Argument(format!(
                        "instance {i}: X ≤ Y does not hold"
                    )));
                }
                let (l, r) = (rho(&inst.x)?, rho(y)?);
                (l, r, l <= r + AXIOM_TOL)
            }
            Axiom::TranslationEquivariance => {
                let m =
                    c.ok_or_else(|| Error::Argument(format!("instance {i}: missing shift m")))?;
                let shifted: Vec<f64> = inst.x.iter().map(|a| a - m).collect();
                let (l, r) = (rho(&shifted)?, rho(&inst.x)? - m);
                (l, r, (l - r).abs() <= AXIOM_TOL)
            }
            Axiom::Convexity => {
                let lam = c.filter(|l| (0.0..=1.0).contains(l)).ok_or_else(|| {
                    Error::Argument(format!("instance {i}: convexity weight must lie in [0, 1]"))
                })?;
                let y = y.unwrap();
                let mix: Vec<f64> = inst
                    .x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| lam * a + (1.0 - lam) * b)
                    .collect();
                let (l, r) = (rho(&mix)?, lam * rho(&inst.x)? + (1.0 - lam) * rho(y)?);
                (l, r, l <= r + AXIOM_TOL)
            }
            Axiom::PositiveHomogeneity => {
                let lam = c.filter(|l| *l > 0.0).ok_or_else(|| {
                    Error::Argument(format!("instance {i}: homogeneity factor must be positive"))
                })?;
                let scaled: Vec<f64> = inst.x.iter().map(|a| lam * a).collect();
                let (l, r) = (rho(&scaled)?, lam * rho(&inst.x)?);
                (l, r, (l - r).abs() <= AXIOM_TOL)
            }
            Axiom::Subadditivity | Axiom::ComonotonicAdditivity => {
                let y = y.unwrap();
                if axiom == Axiom::ComonotonicAdditivity && !comonotonic(&inst.x, y) {
                    return Err(Error::Argument(format!(
                        "instance {i}: X and Y are not comonotonic"
                    )));
                }
                let sum: Vec<f64> = inst.x.iter().zip(y).map(|(a, b)| a + b).collect();
                let (l, r) = (rho(&sum)?, rho(&inst.x)? + rho(y)?);
                let ok = if axiom == Axiom::Subadditivity {
                    l <= r + AXIOM_TOL
                } else {
                    (l - r).abs() <= AXIOM_TOL
                };
                (l, r, ok)
            }
        };
        if !holds {
            return Ok(ProbeOutcome {
                axiom,
                pass: false,
                instances: inputs.len(),
                witness: Some((i, lhs, rhs)),
            });
        }
    }
    Ok(ProbeOutcome {
        axiom,
        pass: true,
        instances: inputs.len(),
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Level;
    use crate::risk::{es, expectile};

    fn lvl(p: f64) -> Level {
        Level::new(p).unwrap()
    }

    const U4: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

    #[test]
    fn es_positive_homogeneity() {
        let f = DiscreteDistribution::uniform(&U4).unwrap();
        assert_eq!(es(&f.scale(2.0).unwrap(), lvl(0.5)), 7.0);
        let m = |f: &DiscreteDistribution| Ok(es(f, lvl(0.5)));
        let out = axiom_probe(
            &m,
            Axiom::PositiveHomogeneity,
            &[ProbeInput::single(U4.to_vec()).with_c(2.0)],
        )
        .unwrap();
        assert!(out.pass);
    }

    #[test]
    fn var_translation_equivariance() {
        let f = DiscreteDistribution::uniform(&U4).unwrap();
        assert_eq!(f.shift(-1.0).var_minus(lvl(0.5)), 1.0);
        let m = |f: &DiscreteDistribution| Ok(f.var_minus(lvl(0.5)));
        let out = axiom_probe(
            &m,
            Axiom::TranslationEquivariance,
            &[ProbeInput::single(U4.to_vec()).with_c(1.0)],
        )
        .unwrap();
        assert!(out.pass);
    }

    #[test]
    fn expectile_monotone_under_shift() {
        let m = |f: &DiscreteDistribution| Ok(expectile(f, lvl(0.8)));
        let shifted: Vec<f64> = U4.iter().map(|a| a + 1.0).collect();
        let out = axiom_probe(
            &m,
            Axiom::Monotonicity,
            &[ProbeInput::pair(U4.to_vec(), shifted)],
        )
        .unwrap();
        assert!(out.pass);
    }

    #[test]
    fn var_fails_subadditivity_with_witness() {
        // Classic two-loss counterexample for VaR at 0.9.
        let x = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
        let y = vec![10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let m = |f: &DiscreteDistribution| Ok(f.var_plus(lvl(0.85)));
        let out = axiom_probe(&m, Axiom::Subadditivity, &[ProbeInput::pair(x, y)]).unwrap();
        assert!(!out.pass);
        assert_eq!(out.witness.unwrap().0, 0);
    }

    #[test]
    fn es_comonotonic_additivity_and_convexity() {
        let m = |f: &DiscreteDistribution| Ok(es(f, lvl(0.5)));
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y = vec![0.5, 0.5, 2.0, 7.0];
        assert!(
            axiom_probe(
                &m,
                Axiom::ComonotonicAdditivity,
                &[ProbeInput::pair(x.clone(), y.clone())]
            )
            .unwrap()
            .pass
        );
        let z = vec![7.0, 0.5, 2.0, 0.5];
        let inst = ProbeInput::pair(x, z).with_c(0.3);
        assert!(axiom_probe(&m, Axiom::Convexity, &[inst]).unwrap().pass);
    }

    #[test]
    fn malformed_instances_error() {
        let m = |f: &DiscreteDistribution| Ok(f.mean());
        assert!(axiom_probe(&m, Axiom::Subadditivity, &[ProbeInput::single(vec![1.0])]).is_err());
        assert!(axiom_probe(
            &m,
            Axiom::Monotonicity,
            &[ProbeInput::pair(vec![2.0], vec![1.0])]
        )
        .is_err());
        assert!(axiom_probe(
            &m,
            Axiom::ComonotonicAdditivity,
            &[ProbeInput::pair(vec![1.0, 2.0], vec![2.0, 1.0])]
        )
        .is_err());
        assert!(axiom_probe(
            &m,
            Axiom::PositiveHomogeneity,
            &[ProbeInput::single(vec![1.0]).with_c(-1.0)]
        )
        .is_err());
    }
}
