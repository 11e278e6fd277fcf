//! M-estimation by exhaustive grid minimization of the empirical score and
//! sequential Z-estimation from lifted identification functions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{DiscreteDistribution, Level};
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid};
use crate::identification::{IdSpec, MAX_ARITY};
use crate::scoring::{expected_score_unchecked, ScoreSpec};

pub const SCHEMA_VERSION: u32 = 1;

const BISECTION_ITERS: usize = 200;
const MONOTONE_PROBES: usize = 101;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub method: String,
    pub construction: String,
    /// Lexicographically smallest minimizer (M) or `(v, x)` root (Z).
    pub point: Vec<f64>,
    /// All grid minimizers (M) or the single root (Z).
    pub set: Vec<Vec<f64>>,
    /// Minimal mean score (M) or `|mean identification|` at the root (Z).
    pub objective: f64,
    pub n: usize,
    pub grid: Vec<Axis>,
    pub warning: Option<String>,
}

fn check_sample(sample: &[f64]) -> Result<DiscreteDistribution> {
    if sample.is_empty() {
        return Err(Error::Argument("sample is empty".into()));
    }
    DiscreteDistribution::empirical(sample)
}

/// Grid minimizers of `forecast ↦ (1/n) Σ S(forecast, y_t)`.
pub fn m_estimate(s: &ScoreSpec, sample: &[f64], grid: &Grid) -> Result<EstimateReport> {
    let f = check_sample(sample)?;
    if grid.dim() != s.arity() {
        return Err(Error::Dimension {
            expected: s.arity(),
            got: grid.dim(),
        });
    }
    for ax in grid.axes() {
        if ax.lo > f.min_atom() || ax.points().last().copied().unwrap_or(ax.lo) < f.max_atom() {
            return Err(Error::Argument(format!(
                "grid axis {ax} does not cover the sample range [{}, {}]",
                f.min_atom(),
                f.max_atom()
            )));
        }
    }
    let meta = s.meta();
    let m = grid.argmin(
        |p| expected_score_unchecked(s, p, &f),
        |p| meta.admissible(p),
    )?;
    let set = m.points(grid);
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        method: "m".into(),
        construction: meta.construction.clone(),
        point: set[0].clone(),
        set,
        objective: m.min,
        n: sample.len(),
        grid: grid.axes().to_vec(),
        warning: None,
    })
}

/// Sequential Z-estimation for a two-dimensional identification function
/// whose first component is the quantile identification at level `p`
/// (read from the spec): `v` is the empirical left `p`-quantile, `x` the
/// bisection root of the mean second component given `v`.
///
/// `bracket` defaults to `[min − 1, max + 1]`; bisection stops once the
/// bracket is shorter than `tol` (use 0 for float resolution).
pub fn z_estimate(
    v: &IdSpec,
    sample: &[f64],
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> Result<EstimateReport> {
    let f = check_sample(sample)?;
    if v.arity() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: v.arity(),
        });
    }
    let p = v.meta().get("p").ok_or_else(|| {
        Error::Argument(format!("`{}` carries no level p", v.meta().construction))
    })?;
    let vq = f.var_minus(Level::new(p)?);
    let h = |x: f64| {
        let mut buf = [0.0; MAX_ARITY];
        let mut acc = 0.0;
        for (y, m) in f.iter() {
            v.eval_into(&[vq, x], y, &mut buf);
            acc += buf[1] * m;
        }
        acc
    };
    let (mut lo, mut hi) = bracket.unwrap_or((f.min_atom() - 1.0, f.max_atom() + 1.0));
    if !(lo < hi) {
        return Err(Error::Argument(format!("empty bracket [{lo}, {hi}]")));
    }
    let (hlo, hhi) = (h(lo), h(hi));
    if !(hlo.is_finite() && hhi.is_finite()) || hlo * hhi > 0.0 {
        return Err(Error::Bracket { lo, hi });
    }
    let increasing = hlo < hhi;
    let warning = monotonicity_warning(&h, lo, hi, increasing);

    let mut root = None;
    if hlo == 0.0 {
        root = Some(lo);
    } else if hhi == 0.0 {
        root = Some(hi);
    }
    if root.is_none() {
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            let hm = h(mid);
            if hm == 0.0 {
                root = Some(mid);
                break;
            }
            if (hm < 0.0) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let x = root.unwrap_or(0.5 * (lo + hi));
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        method: "z".into(),
        construction: v.meta().construction.clone(),
        point: vec![vq, x],
        set: vec![vec![vq, x]],
        objective: h(x).abs(),
        n: sample.len(),
        grid: Vec::new(),
        warning,
    })
}

fn monotonicity_warning(
    h: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    increasing: bool,
) -> Option<String> {
    let step = (hi - lo) / (MONOTONE_PROBES - 1) as f64;
    let vals: Vec<f64> = (0..MONOTONE_PROBES)
        .map(|i| h(lo + i as f64 * step))
        .collect();
    let bad = vals
        .windows(2)
        .position(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] });
    bad.map(|i| {
        format!(
            "empirical identification is not monotone near x = {}",
            lo + i as f64 * step
        )
    })
}

/// Median absolute estimation error for each sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub median_error: f64,
}

/// Draws `reps` i.i.d. samples of each size from `f`, applies `estimator`
/// and records the median of the max-norm error against `truth`.
/// Replication `r` uses stream `r` of a ChaCha generator seeded with `seed`.
pub fn monte_carlo_consistency<E>(
    f: &DiscreteDistribution,
    ns: &[usize],
    reps: usize,
    seed: u64,
    truth: &[f64],
    estimator: E,
) -> Result<Vec<ConsistencyRow>>
where
    E: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    ns.iter()
        .map(|&n| {
            let errors: Result<Vec<f64>> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
                    rng.set_stream(r as u64);
                    let sample: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
                    let est = estimator(&sample)?;
                    Ok(est
                        .iter()
                        .zip(truth)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max))
                })
                .collect();
            let mut errors = errors?;
            errors.sort_by(f64::total_cmp);
            let k = errors.len();
            let median = if k == 0 {
                f64::NAN
            } else if k % 2 == 1 {
                errors[k / 2]
            } else {
                0.5 * (errors[k / 2 - 1] + errors[k / 2])
            };
            Ok(ConsistencyRow {
                n,
                median_error: median,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identification::{expectile_id, lift_id, mean_id};
    use crate::scoring::{fz_score_default, pinball_score};

    fn lvl(p: f64) -> Level {
        Level::new(p).unwrap()
    }

    const U4: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

    #[test]
    fn m_estimate_fz() {
        let s = fz_score_default(lvl(0.5));
        let g = Grid::cube(Axis::new(0.0, 5.0, 0.05).unwrap(), 2).unwrap();
        let r = m_estimate(&s, &U4, &g).unwrap();
        assert!(!r.set.is_empty());
        for p in &r.set {
            assert!(p[0] >= 2.0 - 1e-9 && p[0] <= 3.0 + 1e-9);
            assert!((p[1] - 3.5).abs() <= 0.05);
        }
        let vs: Vec<f64> = r.set.iter().map(|p| p[0]).collect();
        assert!((vs[0] - 2.0).abs() < 1e-9 && (vs.last().unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(r.point, r.set[0]);
    }

    #[test]
    fn m_estimate_pinball_and_constant() {
        let g = Grid::new(vec![Axis::new(0.0, 5.0, 0.25).unwrap()]).unwrap();
        let r = m_estimate(&pinball_score(lvl(0.5)), &U4, &g).unwrap();
        assert_eq!(r.set.first().unwrap()[0], 2.0);
        assert_eq!(r.set.last().unwrap()[0], 3.0);

        let g2 = Grid::cube(Axis::new(0.0, 10.0, 0.5).unwrap(), 2).unwrap();
        let r = m_estimate(&fz_score_default(lvl(0.5)), &[5.0, 5.0, 5.0], &g2).unwrap();
        assert_eq!(r.set, vec![vec![5.0, 5.0]]);
    }

    #[test]
    fn m_estimate_errors() {
        let g = Grid::new(vec![Axis::new(0.0, 5.0, 0.25).unwrap()]).unwrap();
        assert!(m_estimate(&pinball_score(lvl(0.5)), &[], &g).is_err());
        assert!(m_estimate(&pinball_score(lvl(0.5)), &[7.0], &g).is_err());
        assert!(m_estimate(&fz_score_default(lvl(0.5)), &U4, &g).is_err());
    }

    #[test]
    fn z_estimate_examples() {
        let v = lift_id(&mean_id(), lvl(0.5), true).unwrap();
        let r = z_estimate(&v, &U4, None, 0.0).unwrap();
        assert_eq!(r.point[0], 2.0);
        assert!((r.point[1] - 3.5).abs() < 1e-12);
        assert!(r.warning.is_none());

        let v = lift_id(&expectile_id(lvl(0.8)), lvl(0.5), true).unwrap();
        let r = z_estimate(&v, &U4, None, 1e-12).unwrap();
        assert_eq!(r.point[0], 2.0);
        assert!((r.point[1] - 3.8).abs() < 1e-10);

        let v = lift_id(&mean_id(), lvl(0.3), true).unwrap();
        let r = z_estimate(&v, &[4.25; 5], None, 0.0).unwrap();
        assert_eq!(r.point[0], 4.25);
        assert!((r.point[1] - 4.25).abs() < 1e-12);
    }

    #[test]
    fn z_estimate_bracket_error() {
        let v = lift_id(&mean_id(), lvl(0.5), true).unwrap();
        assert!(matches!(
            z_estimate(&v, &U4, Some((5.0, 9.0)), 0.0),
            Err(Error::Bracket { .. })
        ));
        assert!(z_estimate(&mean_id(), &U4, None, 0.0).is_err());
    }

    #[test]
    fn z_estimate_flags_non_monotone() {
        let v = lift_id(
            &IdSpec::custom_scalar("wiggly", true, |x, y| (x - y) + 3.0 * (4.0 * x).sin()),
            lvl(0.5),
            true,
        )
        .unwrap();
        let r = z_estimate(&v, &U4, Some((-2.0, 9.0)), 1e-10).unwrap();
        assert!(r.warning.is_some());
    }

    #[test]
    fn monte_carlo_error_shrinks() {
        let f = DiscreteDistribution::uniform(&(0..20).map(|i| i as f64 * 0.5).collect::<Vec<_>>())
            .unwrap();
        // p strictly between cdf jumps, so the quantile is unique.
        let p = lvl(0.53);
        let truth = vec![f.var_minus(p), crate::risk::es(&f, p)];
        let v = lift_id(&mean_id(), p, true).unwrap();
        let est = |s: &[f64]| z_estimate(&v, s, None, 1e-10).map(|r| r.point);
        let rows = monte_carlo_consistency(&f, &[500, 5000], 200, 42, &truth, est).unwrap();
        assert!(rows[1].median_error < rows[0].median_error, "{rows:?}");
        let again = monte_carlo_consistency(&f, &[500], 200, 42, &truth, est).unwrap();
        assert_eq!(again[0], rows[0]);
    }
}
