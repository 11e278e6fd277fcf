//! Calibration tests from identification functions and Diebold–Mariano
//! comparisons from scores, with Bartlett-kernel long-run variances.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::identification::{IdSpec, MAX_ARITY};
use crate::io;
use crate::scoring::ScoreSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// One forecast record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub t: i64,
    pub forecast: Vec<f64>,
    pub y: f64,
}

/// Time-indexed forecasts of fixed dimension with their realizations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForecastSeries {
    arity: usize,
    records: Vec<Record>,
}

/// Forecast column names for a given dimension.
pub fn forecast_columns(arity: usize) -> Result<&'static [&'static str]> {
    match arity {
        1 => Ok(&["x"]),
        2 => Ok(&["v", "x"]),
        3 => Ok(&["v1", "v2", "x"]),
        k => Err(Error::Argument(format!(
            "unsupported forecast dimension {k}"
        ))),
    }
}

impl ForecastSeries {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Argument("forecast series is empty".into()))?;
        let arity = first.forecast.len();
        for (i, r) in records.iter().enumerate() {
            if r.forecast.len() != arity {
                return Err(Error::Dimension {
                    expected: arity,
                    got: r.forecast.len(),
                });
            }
            if !r.y.is_finite() || r.forecast.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "record {i} has a non-finite value"
                )));
            }
        }
        Ok(Self { arity, records })
    }

    /// Records indexed `0, 1, …` from parallel forecast rows and realizations.
    pub fn from_rows(forecasts: Vec<Vec<f64>>, ys: &[f64]) -> Result<Self> {
        if forecasts.len() != ys.len() {
            return Err(Error::Dimension {
                expected: ys.len(),
                got: forecasts.len(),
            });
        }
        Self::new(
            forecasts
                .into_iter()
                .zip(ys)
                .enumerate()
                .map(|(t, (f, &y))| Record {
                    t: t as i64,
                    forecast: f,
                    y,
                })
                .collect(),
        )
    }

    /// The same forecast at every time point.
    pub fn constant(forecast: &[f64], ys: &[f64]) -> Result<Self> {
        Self::from_rows(vec![forecast.to_vec(); ys.len()], ys)
    }

    /// Reads columns `y` and `x`, `v,x` or `v1,v2,x`; an optional integer
    /// column `t` provides timestamps.
    pub fn from_csv(path: impl AsRef<Path>, arity: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut names = vec!["y"];
        names.extend_from_slice(forecast_columns(arity)?);
        let has_t = io::read_headers(path)?.iter().any(|h| h == "t");
        if has_t {
            names.push("t");
        }
        let cols = io::read_columns_path(path, &names)?;
        let records = cols
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| Record {
                t: if has_t {
                    row[arity + 1] as i64
                } else {
                    i as i64
                },
                forecast: row[1..=arity].to_vec(),
                y: row[0],
            })
            .collect();
        Self::new(records)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn realizations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.y).collect()
    }
}

/// Result of a calibration or comparative test. For comparative tests
/// `mean_id` holds the single mean score difference `A − B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BacktestReport {
    pub schema_version: u32,
    pub test: String,
    pub construction: String,
    pub n: usize,
    pub lag: usize,
    pub mean_id: Vec<f64>,
    /// Bartlett-kernel (HAC) standard errors.
    pub se: Vec<f64>,
    /// Standard errors ignoring autocorrelation.
    pub se_plain: Vec<f64>,
    /// `mean / se`; absent when `se = 0`.
    pub stat: Vec<Option<f64>>,
    /// Two-sided normal p-values.
    pub p_value: Vec<Option<f64>>,
    /// Joint Wald statistic `n m' Ω⁻¹ m` and its χ² p-value.
    pub wald: Option<f64>,
    pub wald_p_value: Option<f64>,
    /// Some standard error is zero or the long-run covariance is singular.
    pub degenerate: bool,
}

/// `⌊n^{1/3}⌋`.
pub fn default_lag(n: usize) -> usize {
    let mut l = (n as f64).cbrt().floor() as usize;
    while (l + 1).pow(3) <= n {
        l += 1;
    }
    while l > 0 && l.pow(3) > n {
        l -= 1;
    }
    l
}

/// Bartlett long-run covariance `Γ0 + Σ_j (1 − j/(L+1))(Γj + Γj')` of the
/// rows of `z` about their mean, together with `Γ0`.
fn long_run_covariance(z: &[Vec<f64>], mean: &[f64], lag: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = z.len();
    let k = mean.len();
    let centred: Vec<DVector<f64>> = z
        .iter()
        .map(|row| DVector::from_iterator(k, row.iter().zip(mean).map(|(a, m)| a - m)))
        .collect();
    let gamma = |j: usize| {
        let mut g = DMatrix::zeros(k, k);
        for t in j..n {
            g += &centred[t] * centred[t - j].transpose();
        }
        g / n as f64
    };
    let g0 = gamma(0);
    let mut omega = g0.clone();
    for j in 1..=lag.min(n.saturating_sub(1)) {
        let w = 1.0 - j as f64 / (lag + 1) as f64;
        let gj = gamma(j);
        omega += (&gj + gj.transpose()) * w;
    }
    (omega, g0)
}

fn report(
    test: &str,
    construction: &str,
    z: &[Vec<f64>],
    lag: Option<usize>,
) -> Result<BacktestReport> {
    let n = z.len();
    if n == 0 {
        return Err(Error::Argument("empty series".into()));
    }
    let k = z[0].len();
    let lag = lag.unwrap_or_else(|| default_lag(n));
    let mut mean = vec![0.0; k];
    for row in z {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let (omega, g0) = long_run_covariance(z, &mean, lag);
    let nf = n as f64;
    let se: Vec<f64> = (0..k)
        .map(|i| (omega[(i, i)].max(0.0) / nf).sqrt())
        .collect();
    let se_plain: Vec<f64> = (0..k).map(|i| (g0[(i, i)].max(0.0) / nf).sqrt()).collect();
    let normal = Normal::standard();
    let mut degenerate = n < 2;
    let mut stat = Vec::with_capacity(k);
    let mut p_value = Vec::with_capacity(k);
    for i in 0..k {
        if se[i] > 0.0 && n >= 2 {
            let s = mean[i] / se[i];
            stat.push(Some(s));
            p_value.push(Some((2.0 * (1.0 - normal.cdf(s.abs()))).clamp(0.0, 1.0)));
        } else {
            degenerate = true;
            stat.push(None);
            p_value.push(None);
        }
    }
    let (mut wald, mut wald_p_value) = (None, None);
    if !degenerate {
        match omega.clone().try_inverse() {
            Some(inv) if omega.determinant().abs() > 1e-300 => {
                let m = DVector::from_vec(mean.clone());
                let w = nf * (m.transpose() * inv * &m)[(0, 0)];
                if w.is_finite() && w >= 0.0 {
                    let chi =
                        ChiSquared::new(k as f64).map_err(|e| Error::Argument(e.to_string()))?;
                    wald = Some(w);
                    wald_p_value = Some((1.0 - chi.cdf(w)).clamp(0.0, 1.0));
                } else {
                    degenerate = true;
                }
            }
            _ => degenerate = true,
        }
    }
    Ok(BacktestReport {
        schema_version: SCHEMA_VERSION,
        test: test.into(),
        construction: construction.into(),
        n,
        lag,
        mean_id: mean,
        se,
        se_plain,
        stat,
        p_value,
        wald,
        wald_p_value,
        degenerate,
    })
}

/// Means of `V(forecast_t, y_t)` with HAC standard errors, per-component
/// z-tests and a joint Wald test. `lag` defaults to `⌊n^{1/3}⌋`.
pub fn calibration_test(
    v: &IdSpec,
    series: &ForecastSeries,
    lag: Option<usize>,
) -> Result<BacktestReport> {
    if v.arity() != series.arity() {
        return Err(Error::Dimension {
            expected: v.arity(),
            got: series.arity(),
        });
    }
    let k = v.arity();
    let z: Vec<Vec<f64>> = series
        .records()
        .iter()
        .map(|r| {
            let mut buf = [0.0; MAX_ARITY];
            v.eval_into(&r.forecast, r.y, &mut buf);
            buf[..k].to_vec()
        })
        .collect();
    report("calibration", &v.meta().construction, &z, lag)
}

/// Diebold–Mariano test on `d_t = S(A_t, y_t) − S(B_t, y_t)`; negative means
/// favour `A`.
pub fn comparative_test(
    s: &ScoreSpec,
    a: &ForecastSeries,
    b: &ForecastSeries,
    lag: Option<usize>,
) -> Result<BacktestReport> {
    for series in [a, b] {
        if series.arity() != s.arity() {
            return Err(Error::Dimension {
                expected: s.arity(),
                got: series.arity(),
            });
        }
    }
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if let Some(i) = a
        .records()
        .iter()
        .zip(b.records())
        .position(|(ra, rb)| ra.y.to_bits() != rb.y.to_bits())
    {
        return Err(Error::Argument(format!(
            "realizations differ at record {i}"
        )));
    }
    let z: Vec<Vec<f64>> = a
        .records()
        .iter()
        .zip(b.records())
        .map(|(ra, rb)| vec![s.eval(&ra.forecast, ra.y) - s.eval(&rb.forecast, rb.y)])
        .collect();
    report("comparative", &s.meta().construction, &z, lag)
}
