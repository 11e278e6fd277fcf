//! Brute-force oracles.
//!
//! [`certify_consistency`] minimizes the exact expected score over a grid and
//! compares the minimizer set with the claimed functional value;
//! [`certify_identifiability`] does the same with the root set of the
//! expected identification function. Interval-valued components (quantiles)
//! agree if the grid set reaches within one step of both endpoints; every
//! grid point farther than one step from the claimed set must score worse by
//! more than [`MARGIN`] (or fail to be a root).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::dist::{DiscreteDistribution, Level, MASS_TOL};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMin};
use crate::identification::{expected_id_into, IdSpec, MAX_ARITY};
use crate::scoring::{expected_score_unchecked, ScoreSpec};

mod probes;
pub mod suites;

pub use probes::{cxls_probe, order_sensitivity_probe, CxlsMode, CxlsOutcome, OrderOutcome};

pub const SCHEMA_VERSION: u32 = 1;

/// Required separation of off-set expected scores from the minimum.
pub const MARGIN: f64 = 1e-10;

/// Tolerance for an expected identification component to count as zero.
pub const ROOT_TOL: f64 = 1e-10;

/// Claimed value of a functional: one closed interval per component
/// (degenerate for singleton components).
pub type Claim = Vec<(f64, f64)>;

/// A functional evaluator `F ↦ T(F)`.
pub type Functional<'a> = dyn Fn(&DiscreteDistribution) -> Result<Claim> + Sync + 'a;

/// `T(F) = Q_p(F)`.
pub fn quantile_claim(f: &DiscreteDistribution, p: Level) -> (f64, f64) {
    let q = f.quantile_interval(p);
    (q.lower, q.upper)
}

/// Seeded random distributions: 3–8 distinct atoms on the lattice
/// `{0, 0.1, …, 10}`, masses from a symmetric Dirichlet(1), optionally
/// conditioned to `F(VaR⁻_p) = p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Family {
    pub seed: u64,
    pub count: usize,
    pub condition: Option<f64>,
}

impl Family {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            condition: None,
        }
    }

    pub fn conditioned(mut self, p: Level) -> Self {
        self.condition = Some(p.value());
        self
    }

    pub fn generate(&self) -> Result<Vec<DiscreteDistribution>> {
        (0..self.count).map(|i| self.member(i)).collect()
    }

    /// The `i`-th member, drawn from stream `i`.
    pub fn member(&self, i: usize) -> Result<DiscreteDistribution> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let k = rng.random_range(3..=8);
        let mut lattice: Vec<u32> = Vec::with_capacity(k);
        while lattice.len() < k {
            let a = rng.random_range(0..=100u32);
            if !lattice.contains(&a) {
                lattice.push(a);
            }
        }
        lattice.sort_unstable();
        let weights: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
        if let Some(p) = self.condition {
            condition_masses(&mut masses, p);
        }
        DiscreteDistribution::new(lattice.iter().map(|&a| a as f64 / 10.0).zip(masses))
    }
}

/// Moves mass so that the cumulative mass at the quantile atom equals `p`.
fn condition_masses(m: &mut [f64], p: f64) {
    let k = m.len();
    let mut cum = 0.0;
    let mut j = 0;
    while j < k {
        if cum + m[j] >= p - MASS_TOL {
            break;
        }
        cum += m[j];
        j += 1;
    }
    let j = j.min(k - 1);
    if j + 1 < k {
        let excess = cum + m[j] - p;
        m[j] = p - cum;
        m[j + 1] += excess;
    } else {
        // The quantile atom is the largest one: rescale the lower atoms to
        // total mass p.
        let lower: f64 = m[..k - 1].iter().sum();
        for w in &mut m[..k - 1] {
            *w *= p / lower;
        }
        m[k - 1] = 1.0 - p;
    }
}

/// Outcome for one distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub atoms: Vec<f64>,
    pub masses: Vec<f64>,
    pub claimed: Claim,
    /// Bounding box of the grid minimizer (or root) set.
    pub found: Vec<(f64, f64)>,
    pub found_count: usize,
    /// Minimal expected score (consistency only).
    pub min_value: Option<f64>,
    /// Smallest excess score (consistency) or largest-component residual
    /// (identifiability) over grid points farther than one step from the
    /// claimed set; absent if there are none.
    pub margin: Option<f64>,
    /// Grid point violating the margin, if any.
    pub counterexample: Option<Vec<f64>>,
    pub covered: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub kind: String,
    pub construction: String,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    pub steps: Vec<f64>,
    /// Smallest margin over all cases.
    pub worst_margin: Option<f64>,
    /// First failing case.
    pub counterexample: Option<CaseReport>,
    pub case_reports: Vec<CaseReport>,
}

impl VerificationReport {
    fn new(kind: &str, construction: &str, grid: &Grid, case_reports: Vec<CaseReport>) -> Self {
        let failures = case_reports.iter().filter(|c| !c.pass).count();
        let worst_margin = case_reports
            .iter()
            .filter_map(|c| c.margin)
            .reduce(f64::min);
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            construction: construction.into(),
            pass: failures == 0 && !case_reports.is_empty(),
            cases: case_reports.len(),
            failures,
            steps: grid.axes().iter().map(|a| a.step).collect(),
            worst_margin,
            counterexample: case_reports.iter().find(|c| !c.pass).cloned(),
            case_reports,
        }
    }
}

fn check_claim(claim: &Claim, grid: &Grid) -> Result<()> {
    if claim.len() != grid.dim() {
        return Err(Error::Dimension {
            expected: grid.dim(),
            got: claim.len(),
        });
    }
    for (k, (&(lo, hi), ax)) in claim.iter().zip(grid.axes()).enumerate() {
        if !(lo <= hi) || lo < ax.lo - ax.step || hi > ax.hi + ax.step {
            return Err(Error::Precondition(format!(
                "claimed component {k} = [{lo}, {hi}] is not covered by grid axis {ax}"
            )));
        }
    }
    Ok(())
}

/// Whether `point` is farther than one grid step from the claim in some
/// coordinate.
fn is_far(point: &[f64], claim: &Claim, grid: &Grid) -> bool {
    point
        .iter()
        .zip(claim)
        .zip(grid.axes())
        .any(|((&g, &(lo, hi)), ax)| {
            let d = (lo - g).max(g - hi).max(0.0);
            d > ax.step * (1.0 + 1e-9)
        })
}

fn bounding_box(points: &[Vec<f64>], dim: usize) -> Vec<(f64, f64)> {
    (0..dim)
        .map(|k| {
            points
                .iter()
                .map(|p| p[k])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                    (a.min(v), b.max(v))
                })
        })
        .collect()
}

fn covers(found: &[(f64, f64)], claim: &Claim, grid: &Grid) -> bool {
    found
        .iter()
        .zip(claim)
        .zip(grid.axes())
        .all(|((&(flo, fhi), &(lo, hi)), ax)| {
            let tol = ax.step * (1.0 + 1e-9);
            flo.is_finite() && flo <= lo + tol && fhi >= hi - tol
        })
}

/// Certifies that `s` is strictly consistent for `t` on every member of
/// `family`, up to the grid resolution.
pub fn certify_consistency(
    s: &ScoreSpec,
    t: &Functional<'_>,
    family: &[DiscreteDistribution],
    grid: &Grid,
) -> Result<VerificationReport> {
    if grid.dim() != s.arity() {
        return Err(Error::Dimension {
            expected: s.arity(),
            got: grid.dim(),
        });
    }
    let meta = s.meta();
    let mut reports = Vec::with_capacity(family.len());
    for (index, f) in family.iter().enumerate() {
        let claim = t(f)?;
        check_claim(&claim, grid)?;
        let values = grid.evaluate(
            |p| expected_score_unchecked(s, p, f),
            |p| meta.admissible(p),
        );
        let m = GridMin::from_values(grid, values)?;
        let minimizers = m.points(grid);
        let found = bounding_box(&minimizers, grid.dim());

        let mut margin: Option<(f64, usize)> = None;
        for (i, &v) in m.values.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let excess = v - m.min;
            if margin.is_some_and(|(best, _)| excess >= best) {
                continue;
            }
            if is_far(&grid.point(i), &claim, grid) {
                margin = Some((excess, i));
            }
        }
        let covered = covers(&found, &claim, grid);
        let margin_ok = margin.is_none_or(|(e, _)| e > MARGIN);
        reports.push(CaseReport {
            index,
            atoms: f.atoms().to_vec(),
            masses: f.masses().to_vec(),
            claimed: claim,
            found,
            found_count: minimizers.len(),
            min_value: Some(m.min),
            margin: margin.map(|(e, _)| e),
            counterexample: margin.filter(|_| !margin_ok).map(|(_, i)| grid.point(i)),
            covered,
            pass: covered && margin_ok,
        });
    }
    Ok(VerificationReport::new(
        "consistency",
        &meta.construction,
        grid,
        reports,
    ))
}

/// Certifies that `v` is a strict identification function for `t` on
/// every member of `family`, up to the grid resolution.
///
/// A grid point is a root if every component either has absolute expected
/// value at most [`ROOT_TOL`] or changes sign towards the next grid point
/// along an axis in which the function is continuous.
pub fn certify_identifiability(
    v: &IdSpec,
    t: &Functional<'_>,
    family: &[DiscreteDistribution],
    grid: &Grid,
) -> Result<VerificationReport> {
    let k = v.arity();
    if grid.dim() != k {
        return Err(Error::Dimension {
            expected: k,
            got: grid.dim(),
        });
    }
    let meta = v.meta();
    let lens: Vec<usize> = grid.axes().iter().map(|a| a.len()).collect();
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * lens[i + 1];
    }
    let mut reports = Vec::with_capacity(family.len());
    for (index, f) in family.iter().enumerate() {
        let claim = t(f)?;
        check_claim(&claim, grid)?;
        // Flattened k-vectors per grid point.
        let comps: Vec<[f64; MAX_ARITY]> = {
            use rayon::prelude::*;
            (0..grid.len())
                .into_par_iter()
                .map_init(
                    || vec![0.0; k],
                    |buf, i| {
                        grid.point_into(i, buf);
                        let mut acc = [0.0; MAX_ARITY];
                        expected_id_into(v, buf, f, &mut acc);
                        acc
                    },
                )
                .collect()
        };
        let is_root = |i: usize, point: &[f64]| -> bool {
            if !meta.admissible(point) {
                return false;
            }
            (0..k).all(|j| {
                let e = comps[i][j];
                if e.abs() <= ROOT_TOL {
                    return true;
                }
                (0..k).any(|ax| {
                    if !v.continuous()[ax] {
                        return false;
                    }
                    let pos = (i / strides[ax]) % lens[ax];
                    pos + 1 < lens[ax] && e * comps[i + strides[ax]][j] < 0.0
                })
            })
        };
        let mut roots = Vec::new();
        let mut margin: Option<f64> = None;
        let mut counterexample = None;
        let mut buf = vec![0.0; k];
        for i in 0..grid.len() {
            grid.point_into(i, &mut buf);
            let root = is_root(i, &buf);
            if root {
                roots.push(buf.clone());
            }
            if is_far(&buf, &claim, grid) && meta.admissible(&buf) {
                let resid = comps[i][..k].iter().map(|e| e.abs()).fold(0.0, f64::max);
                margin = Some(margin.map_or(resid, |m: f64| m.min(resid)));
                if root && counterexample.is_none() {
                    counterexample = Some(buf.clone());
                }
            }
        }
        let found = bounding_box(&roots, k);
        let covered = !roots.is_empty() && covers(&found, &claim, grid);
        reports.push(CaseReport {
            index,
            atoms: f.atoms().to_vec(),
            masses: f.masses().to_vec(),
            claimed: claim,
            found,
            found_count: roots.len(),
            min_value: None,
            margin,
            pass: covered && counterexample.is_none(),
            counterexample,
            covered,
        });
    }
    Ok(VerificationReport::new(
        "identifiability",
        &meta.construction,
        grid,
        reports,
    ))
}
