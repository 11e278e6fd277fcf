//! Building blocks shared by scores and identification functions: real
//! functions with names, convex generators with a chosen subgradient, loss
//! functions for shortfall risk, and functions of bounded variation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// A thread-safe real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function tagged with a registry-style name.
#[derive(Clone)]
pub struct NamedFn {
    name: String,
    f: RealFn,
}

impl NamedFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn call(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0)
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x)
    }

    pub fn square() -> Self {
        Self::new("square", |x| x * x)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c)
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(format!("linear({slope})"), move |x| slope * x)
    }
}

impl fmt::Debug for NamedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NamedFn({})", self.name)
    }
}

/// A strictly convex `φ` together with a subgradient `φ′`.
#[derive(Clone)]
pub struct ConvexSpec {
    name: String,
    phi: RealFn,
    dphi: RealFn,
}

impl fmt::Debug for ConvexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexSpec({})", self.name)
    }
}

impl ConvexSpec {
    /// `φ(x) = x²/(1 + |x|)`, whose derivative is bounded by one in absolute
    /// value.
    pub fn bounded_quadratic() -> Self {
        Self {
            name: "phi.bounded_quadratic".into(),
            phi: Arc::new(|x: f64| x * x / (1.0 + x.abs())),
            dphi: Arc::new(|x: f64| {
                let a = x.abs();
                (a * a + 2.0 * a) * x.signum() / ((1.0 + a) * (1.0 + a))
            }),
        }
    }

    /// `φ(x) = x²`.
    pub fn square() -> Self {
        Self {
            name: "phi.square".into(),
            phi: Arc::new(|x| x * x),
            dphi: Arc::new(|x| 2.0 * x),
        }
    }

    /// A user-supplied pair, checked for midpoint convexity and a
    /// nondecreasing subgradient on `[-10, 10]`.
    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
        };
        spec.check_convexity(-10.0, 10.0, 401)?;
        Ok(spec)
    }

    /// Scales both `φ` and `φ′` by a positive constant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!(
                "convex scale {c} must be positive"
            )));
        }
        let (phi, dphi) = (self.phi.clone(), self.dphi.clone());
        Ok(Self {
            name: format!("{}*{c}", self.name),
            phi: Arc::new(move |x| c * phi(x)),
            dphi: Arc::new(move |x| c * dphi(x)),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    #[inline]
    pub fn dphi(&self, x: f64) -> f64 {
        (self.dphi)(x)
    }

    /// Midpoint convexity and monotone subgradient on an equispaced grid.
    pub fn check_convexity(&self, lo: f64, hi: f64, n: usize) -> Result<()> {
        let h = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        for w in xs.windows(3) {
            let (a, m, b) = (w[0], w[1], w[2]);
            if self.phi(m) >= 0.5 * (self.phi(a) + self.phi(b)) {
                return Err(Error::Argument(format!(
                    "{} is not strictly convex near {m}",
                    self.name
                )));
            }
        }
        for w in xs.windows(2) {
            if self.dphi(w[1]) < self.dphi(w[0]) {
                return Err(Error::Argument(format!(
                    "subgradient of {} decreases near {}",
                    self.name, w[0]
                )));
            }
        }
        Ok(())
    }
}

/// Loss functions inducing shortfall risk measures.
#[derive(Clone, Debug)]
pub enum Loss {
    /// `ℓ(x) = x`; the shortfall risk measure is the mean.
    Identity,
    /// `ℓ(x) = eˣ − 1`; the entropic risk measure.
    ExpMinusOne,
    /// `ℓ(x) = max(x, floor)` with `floor < 0`.
    Clipped { floor: f64 },
    /// Any left-continuous nondecreasing loss; integrals by quadrature.
    Custom(NamedFn),
}

impl Loss {
    pub fn clipped(floor: f64) -> Result<Self> {
        if floor < 0.0 && floor.is_finite() {
            Ok(Loss::Clipped { floor })
        } else {
            Err(Error::Argument(format!(
                "clipped loss floor {floor} must be negative"
            )))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Loss::Identity => "ell.identity".into(),
            Loss::ExpMinusOne => "ell.exp_minus_one".into(),
            Loss::Clipped { floor } => format!("ell.clipped({floor})"),
            Loss::Custom(f) => f.name().to_string(),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Loss::Identity => x,
            Loss::ExpMinusOne => x.exp_m1(),
            Loss::Clipped { floor } => x.max(*floor),
            Loss::Custom(f) => f.call(x),
        }
    }

    pub fn is_bounded_below(&self) -> bool {
        matches!(self, Loss::Clipped { .. })
    }

    fn antiderivative(&self, w: f64) -> Option<f64> {
        match self {
            Loss::Identity => Some(0.5 * w * w),
            Loss::ExpMinusOne => Some(w.exp() - w),
            Loss::Clipped { floor } => {
                let f = *floor;
                Some(if w >= f {
                    0.5 * w * w
                } else {
                    f * w - 0.5 * f * f
                })
            }
            Loss::Custom(_) => None,
        }
    }

    /// `∫_0^x ℓ(y − z) dz`, in closed form for the built-in losses.
    pub fn shifted_integral(&self, x: f64, y: f64) -> Result<f64> {
        match (self.antiderivative(y), self.antiderivative(y - x)) {
            (Some(a), Some(b)) => Ok(a - b),
            _ => quad::integrate(&|z| self.eval(y - z), 0.0, x, 1e-10),
        }
    }
}

/// Functions of locally bounded variation used as ratio numerators and
/// denominators.
#[derive(Clone, Debug)]
pub enum BvFunction {
    One,
    Identity,
    Square,
    /// `1_{[a, b)}`.
    Indicator {
        a: f64,
        b: f64,
    },
    Custom(NamedFn),
}

/// Partition size used for the total-variation estimate of custom functions.
pub const TV_PARTITION: usize = 1 << 14;

impl BvFunction {
    pub fn name(&self) -> String {
        match self {
            BvFunction::One => "one".into(),
            BvFunction::Identity => "identity".into(),
            BvFunction::Square => "square".into(),
            BvFunction::Indicator { a, b } => format!("indicator[{a},{b})"),
            BvFunction::Custom(f) => f.name().to_string(),
        }
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            BvFunction::One => 1.0,
            BvFunction::Identity => y,
            BvFunction::Square => y * y,
            BvFunction::Indicator { a, b } => {
                if *a <= y && y < *b {
                    1.0
                } else {
                    0.0
                }
            }
            BvFunction::Custom(f) => f.call(y),
        }
    }

    /// Signed total variation `sign(y)·TV(u; [min(0, y), max(0, y)])`.
    ///
    /// Exact for the built-in variants. For custom functions the supremum
    /// over partitions is estimated on a uniform partition of
    /// [`TV_PARTITION`] points; an estimate that still grows markedly
    /// between the half and full partition is reported as divergent.
    pub fn total_variation(&self, y: f64) -> Result<f64> {
        let (lo, hi) = (y.min(0.0), y.max(0.0));
        let s = if y > 0.0 {
            1.0
        } else if y < 0.0 {
            -1.0
        } else {
            return Ok(0.0);
        };
        let tv = match self {
            BvFunction::One => 0.0,
            BvFunction::Identity => hi - lo,
            BvFunction::Square => {
                // x² is monotone on each side of zero and the interval has
                // zero as an endpoint.
                y * y
            }
            BvFunction::Indicator { a, b } => {
                // A jump at c is seen by partitions of [lo, hi] iff a point
                // strictly left of c and the point c itself both lie inside.
                let seen = |c: f64| lo < c && c <= hi;
                (seen(*a) as u8 + (seen(*b) as u8)) as f64
            }
            BvFunction::Custom(f) => {
                let est = |n: usize| {
                    let h = (hi - lo) / (n - 1) as f64;
                    let mut prev = f.call(lo);
                    let mut acc = 0.0;
                    for i in 1..n {
                        let z = if i == n - 1 { hi } else { lo + i as f64 * h };
                        let cur = f.call(z);
                        acc += (cur - prev).abs();
                        prev = cur;
                    }
                    acc
                };
                let coarse = est(TV_PARTITION / 2);
                let fine = est(TV_PARTITION);
                if !fine.is_finite() || fine > coarse * (1.0 + 1e-2) + 1e-9 {
                    return Err(Error::Argument(format!(
                        "total variation of {} on [{lo}, {hi}] does not settle ({coarse} vs {fine})",
                        f.name()
                    )));
                }
                fine
            }
        };
        Ok(s * tv)
    }
}
