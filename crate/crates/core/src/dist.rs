//! Finitely supported distributions and their tail and body transforms.
//!
//! Every distribution is a sorted list of atoms with strictly positive
//! masses. Cumulative masses are cached at construction so that the cdf and
//! both generalized inverses are binary searches. All tail-type transforms
//! are computed atom-wise from the transformed cdf, which keeps every
//! downstream quantity an exact finite sum.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for comparisons between probability masses.
pub const MASS_TOL: f64 = 1e-12;

/// A probability level strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Level(f64);

impl Level {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 && p < 1.0 {
            Ok(Level(p))
        } else {
            Err(Error::Argument(format!("level {p} is not in (0, 1)")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Level {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Level::new(p)
    }
}

impl From<Level> for f64 {
    fn from(l: Level) -> f64 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The interval-valued quantile `[VaR⁻, VaR⁺]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileInterval {
    pub lower: f64,
    pub upper: f64,
}

impl QuantileInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn is_singleton(&self) -> bool {
        self.lower == self.upper
    }
}

/// A finitely supported probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    masses: Vec<f64>,
    #[serde(skip)]
    cum: Vec<f64>,
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<f64>,
            masses: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.atoms.len() != raw.masses.len() {
            return Err(serde::de::Error::custom(
                "atoms and masses differ in length",
            ));
        }
        DiscreteDistribution::new(raw.atoms.into_iter().zip(raw.masses))
            .map_err(serde::de::Error::custom)
    }
}

impl DiscreteDistribution {
    /// Builds a distribution from `(value, mass)` pairs. Values are sorted,
    /// duplicates merged, zero masses dropped and the result normalized.
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::Construction("no atoms supplied".into()));
        }
        for &(x, m) in &pairs {
            if !x.is_finite() {
                return Err(Error::Construction(format!("non-finite atom {x}")));
            }
            if !m.is_finite() {
                return Err(Error::Construction(format!("non-finite mass {m} at {x}")));
            }
            if m < 0.0 {
                return Err(Error::Construction(format!("negative mass {m} at {x}")));
            }
        }
        pairs.retain(|&(_, m)| m > 0.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, m) in pairs {
            match atoms.last() {
                // -0.0 and 0.0 compare equal and are merged.
                Some(&last) if last == x => *masses.last_mut().unwrap() += m,
                _ => {
                    atoms.push(x);
                    masses.push(m);
                }
            }
        }

        let total: f64 = masses.iter().sum();
        if atoms.is_empty() || total <= 0.0 {
            return Err(Error::Construction("total mass is zero".into()));
        }
        for m in &mut masses {
            *m /= total;
        }
        Ok(Self::from_sorted_unchecked(atoms, masses))
    }

    fn from_sorted_unchecked(atoms: Vec<f64>, masses: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cum.push(acc);
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        Self { atoms, masses, cum }
    }

    /// Point mass at `x`.
    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    /// Uniform distribution on the given (not necessarily distinct) values.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| (x, 1.0)))
    }

    /// Empirical distribution of a sample: equal mass per observation.
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        Self::uniform(sample)
    }

    /// Discretizes a continuous law through its quantile function using the
    /// midpoints `(i + 1/2)/n` of an equal-mass partition.
    pub fn from_quantile_fn(n: usize, quantile: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("zero grid points".into()));
        }
        let w = 1.0 / n as f64;
        Self::new((0..n).map(|i| (quantile((i as f64 + 0.5) * w), w)))
    }

    /// Discretizes a density on `[lo, hi]` with `n` cells, one atom per cell
    /// midpoint carrying the (midpoint-rule) cell mass.
    pub fn from_density_grid(
        lo: f64,
        hi: f64,
        n: usize,
        density: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n == 0 || !(lo < hi) {
            return Err(Error::Construction("degenerate density grid".into()));
        }
        let h = (hi - lo) / n as f64;
        Self::new((0..n).map(|i| {
            let mid = lo + (i as f64 + 0.5) * h;
            (mid, density(mid).max(0.0) * h)
        }))
    }

    /// Reads column `y` of a CSV file and returns its empirical distribution.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let ys = crate::io::read_column(path, "y")?;
        Self::empirical(&ys)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Cumulative masses at each atom; the last entry is exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.masses.iter().copied())
    }

    /// `F(x) = P(Y ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `F(x−) = P(Y < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a < x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// Left generalized inverse `inf{x : F(x) ≥ p}`.
    pub fn var_minus(&self, p: Level) -> f64 {
        self.left_quantile(p.value())
    }

    /// Right generalized inverse `inf{x : F(x) > p}`.
    pub fn var_plus(&self, p: Level) -> f64 {
        self.right_quantile(p.value())
    }

    /// `inf{x : F(x) ≥ r}` for any `r ∈ [0, 1]`; `r = 0` maps to the
    /// smallest atom.
    pub fn left_quantile(&self, r: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < r - MASS_TOL);
        self.atoms[k.min(self.len() - 1)]
    }

    /// `inf{x : F(x) > r}`; levels at or above one map to the largest atom.
    pub fn right_quantile(&self, r: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= r + MASS_TOL);
        self.atoms[k.min(self.len() - 1)]
    }

    pub fn quantile_interval(&self, p: Level) -> QuantileInterval {
        QuantileInterval {
            lower: self.var_minus(p),
            upper: self.var_plus(p),
        }
    }

    /// Membership in the class where `F(F⁻¹(p)) = p`.
    pub fn in_m_p(&self, p: Level) -> bool {
        (self.cdf(self.var_minus(p)) - p.value()).abs() <= MASS_TOL
    }

    /// Rebuilds the distribution with cumulative masses mapped through a
    /// nondecreasing `transform` sending 0 to 0 and 1 to 1.
    fn map_cdf(&self, transform: impl Fn(f64) -> f64) -> Self {
        let mut atoms = Vec::with_capacity(self.len());
        let mut masses = Vec::with_capacity(self.len());
        let mut prev = 0.0;
        for (&a, &c) in self.atoms.iter().zip(&self.cum) {
            let t = transform(c);
            let m = t - prev;
            if m > MASS_TOL {
                atoms.push(a);
                masses.push(m);
            }
            prev = t;
        }
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        Self::from_sorted_unchecked(atoms, masses)
    }

    /// Tail distribution beyond the `p`-quantile, cdf `(F(x) − p)₊/(1 − p)`.
    pub fn tail(&self, p: Level) -> Self {
        let p = p.value();
        self.map_cdf(|c| {
            let d = c - p;
            if d <= MASS_TOL {
                0.0
            } else {
                d / (1.0 - p)
            }
        })
    }

    /// Left tail distribution, cdf `min(F(x), q)/q`, for `q ∈ (0, 1]`.
    pub fn left_tail(&self, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Argument(format!(
                "left-tail level {q} is not in (0, 1]"
            )));
        }
        if q == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.map_cdf(|c| if c >= q - MASS_TOL { 1.0 } else { c / q }))
    }

    /// Body distribution, cdf `(min(F(x), q) − p)₊/(q − p)`.
    pub fn body(&self, p: Level, q: Level) -> Result<Self> {
        let (p, q) = (p.value(), q.value());
        if p >= q {
            return Err(Error::Argument(format!(
                "body requires p < q, got p = {p}, q = {q}"
            )));
        }
        Ok(self.map_cdf(|c| {
            let c = if c >= q - MASS_TOL { q } else { c };
            let d = c - p;
            if d <= MASS_TOL {
                0.0
            } else {
                d / (q - p)
            }
        }))
    }

    /// The distribution `(1 − p)G + p·δ_r`, whose `p`-tail is `G` and whose
    /// left `p`-quantile is `r`, provided every atom of `G` is at least `r`.
    pub fn mix_with_atom(g: &Self, p: Level, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::Argument(format!("non-finite anchor {r}")));
        }
        if g.min_atom() < r {
            return Err(Error::Precondition(format!(
                "smallest atom {} lies below anchor {r}",
                g.min_atom()
            )));
        }
        let p = p.value();
        Self::new(std::iter::once((r, p)).chain(g.iter().map(|(a, m)| (a, (1.0 - p) * m))))
    }

    /// `(1 − λ)F₀ + λF₁`.
    pub fn mixture(f0: &Self, f1: &Self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Argument(format!(
                "mixture weight {lambda} is not in (0, 1)"
            )));
        }
        Self::new(
            f0.iter()
                .map(|(a, m)| (a, (1.0 - lambda) * m))
                .chain(f1.iter().map(|(a, m)| (a, lambda * m))),
        )
    }

    /// `E h(Y)` as an exact finite sum.
    pub fn expectation(&self, h: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (a, m) in self.iter() {
            let v = h(a);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand is {v} at atom {a}")));
            }
            acc += v * m;
        }
        Ok(acc)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(a, m)| a * m).sum()
    }

    /// Law of `Y + m`.
    pub fn shift(&self, m: f64) -> Self {
        Self::from_sorted_unchecked(
            self.atoms.iter().map(|a| a + m).collect(),
            self.masses.clone(),
        )
    }

    /// Law of `c·Y` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!(
                "scale factor {c} must be positive"
            )));
        }
        Ok(Self::from_sorted_unchecked(
            self.atoms.iter().map(|a| a * c).collect(),
            self.masses.clone(),
        ))
    }

    /// Law of `−Y`.
    pub fn reflect(&self) -> Self {
        Self::from_sorted_unchecked(
            self.atoms.iter().rev().map(|a| -a).collect(),
            self.masses.iter().rev().copied().collect(),
        )
    }

    /// Draws one observation by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cum.partition_point(|&c| c <= u);
        self.atoms[k.min(self.len() - 1)]
    }

    /// Largest atom-wise discrepancy against another distribution with the
    /// same support; `None` when the supports differ.
    pub fn max_mass_gap(&self, other: &Self) -> Option<f64> {
        if self.atoms != other.atoms {
            return None;
        }
        Some(
            self.masses
                .iter()
                .zip(&other.masses)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Same support and masses within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_mass_gap(other).is_some_and(|g| g <= tol)
    }
}
