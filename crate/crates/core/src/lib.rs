//! Identification functions, strictly consistent scores and brute-force
//! oracles for tail risk measures.
//!
//! A `p`-tail risk measure depends on a distribution only through its tail
//! beyond the `p`-quantile, `ρ(F) = ρ*(F_p)`. This crate builds, for any
//! generator `ρ*` with a strict identification function or strictly
//! consistent score, the corresponding objects for the pair `(Q_p, ρ)` (and
//! for left tails and bodies `F^[p,q]`), and certifies every construction
//! against exhaustive grid searches on finitely supported distributions.
//!
//! Modules:
//! - [`dist`]: finitely supported distributions and tail/body transforms
//! - [`risk`]: ES, RVaR, expectiles, shortfall risk, ratios, `tail_risk`
//! - [`identification`], [`scoring`], [`proper`]: the function families
//! - [`estimation`], [`backtest`]: M-/Z-estimation and forecast tests
//! - [`verification`]: the oracles

pub mod backtest;
pub mod blocks;
pub mod config;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod identification;
pub mod io;
pub mod meta;
pub mod proper;
pub mod quad;
pub mod risk;
pub mod scoring;
pub mod verification;

pub use blocks::{BvFunction, ConvexSpec, Loss, NamedFn};
pub use dist::{DiscreteDistribution, Level, QuantileInterval, MASS_TOL};
pub use error::{Error, Result};
