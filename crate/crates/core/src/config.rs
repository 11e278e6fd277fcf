//! Declarative score and identification families.
//!
//! A [`FamilyConfig`] names a construction, its levels and its building
//! blocks by registry name:
//!
//! | slot | names | parameters |
//! |------|-------|------------|
//! | `phi` | `phi.bounded_quadratic`, `phi.square` | `phi.scale` |
//! | `g`, `g2` | `g.identity`, `g.zero`, `g.level_default`, `g.linear` | `g.scale`, `g.slope` |
//! | `a` | `a.zero` | |
//! | `ell` | `ell.identity`, `ell.exp_minus_one`, `ell.clipped` | `ell.floor` |
//! | `u`, `t` | `u.one`, `u.identity`, `u.square`, `u.indicator` (same for `t.`) | `u.a`, `u.b` |
//!
//! Lifted, left-tail and body constructions take a nested `generator`.
//! `repair` adds a monotone repair with constant bound `h ≡ repair`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blocks::{BvFunction, ConvexSpec, Loss, NamedFn};
use crate::dist::Level;
use crate::error::{Error, Result};
use crate::identification::{
    body_id, expectile_id, lift_id, mean_id, quantile_id, ratio_id, rvar_id, shortfall_id,
    var_es_id, IdSpec,
};
use crate::scoring::{
    body_score, bregman_score, expectile_score, fz_score, left_tail_score, level_default_g,
    lift_score, monotone_repair, pinball_score, quantile_score, ratio_score, rvar_score,
    shortfall_score, EvalBox, RepairBound, ScoreSpec,
};

pub const CONSTRUCTIONS: &[&str] = &[
    "pinball",
    "quantile",
    "bregman",
    "expectile",
    "fz",
    "rvar",
    "shortfall",
    "ratio",
    "lift",
    "left_tail",
    "body",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub construction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Box<FamilyConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_box: Option<EvalBox>,
}

fn unknown(slot: &str, name: &str) -> Error {
    Error::UnknownName(format!("{slot} `{name}`"))
}

impl FamilyConfig {
    pub fn new(construction: impl Into<String>) -> Self {
        Self {
            construction: construction.into(),
            ..Default::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Argument(format!("family config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    fn level(&self, which: &str, v: Option<f64>) -> Result<Level> {
        let v = v.ok_or_else(|| {
            Error::Argument(format!("`{}` needs level {which}", self.construction))
        })?;
        Level::new(v)
    }

    fn p(&self) -> Result<Level> {
        self.level("p", self.p)
    }

    fn pq(&self) -> Result<(Level, Level)> {
        let (p, q) = (self.p()?, self.level("q", self.q)?);
        if p >= q {
            return Err(Error::Argument(format!(
                "levels need p < q, got p = {p}, q = {q}"
            )));
        }
        Ok((p, q))
    }

    fn param(&self, key: &str, default: Option<f64>) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| Error::Argument(format!("missing parameter `{key}`")))
    }

    fn phi(&self) -> Result<ConvexSpec> {
        let name = self.phi.as_deref().unwrap_or("phi.bounded_quadratic");
        let base = match name {
            "phi.bounded_quadratic" => ConvexSpec::bounded_quadratic(),
            "phi.square" => ConvexSpec::square(),
            _ => return Err(unknown("phi", name)),
        };
        match self.params.get("phi.scale") {
            Some(&c) => base.scaled(c),
            None => Ok(base),
        }
    }

    /// `g` or `g2`; `default_scale` feeds `g.level_default`.
    fn g_slot(
        &self,
        name: Option<&str>,
        default: &str,
        default_scale: Option<f64>,
    ) -> Result<NamedFn> {
        let name = name.unwrap_or(default);
        match name {
            "g.identity" => Ok(NamedFn::identity()),
            "g.zero" => Ok(NamedFn::zero()),
            "g.level_default" => Ok(level_default_g(self.param("g.scale", default_scale)?)),
            "g.linear" => Ok(NamedFn::linear(self.param("g.slope", None)?)),
            _ => Err(unknown("g", name)),
        }
    }

    fn a(&self) -> Result<NamedFn> {
        match self.a.as_deref().unwrap_or("a.zero") {
            "a.zero" => Ok(NamedFn::zero()),
            other => Err(unknown("a", other)),
        }
    }

    fn ell(&self) -> Result<Loss> {
        match self.ell.as_deref().unwrap_or("ell.identity") {
            "ell.identity" => Ok(Loss::Identity),
            "ell.exp_minus_one" => Ok(Loss::ExpMinusOne),
            "ell.clipped" => Loss::clipped(self.param("ell.floor", Some(-1.0))?),
            other => Err(unknown("ell", other)),
        }
    }

    fn bv(&self, slot: &str, name: Option<&str>, default: &str) -> Result<BvFunction> {
        let name = name.unwrap_or(default);
        let rest = name
            .strip_prefix(slot)
            .and_then(|r| r.strip_prefix('.'))
            .ok_or_else(|| unknown(slot, name))?;
        match rest {
            "one" => Ok(BvFunction::One),
            "identity" => Ok(BvFunction::Identity),
            "square" => Ok(BvFunction::Square),
            "indicator" => Ok(BvFunction::Indicator {
                a: self.param(&format!("{slot}.a"), None)?,
                b: self.param(&format!("{slot}.b"), None)?,
            }),
            _ => Err(unknown(slot, name)),
        }
    }

    fn generator(&self) -> Result<&FamilyConfig> {
        self.generator
            .as_deref()
            .ok_or_else(|| Error::Argument(format!("`{}` needs a generator", self.construction)))
    }

    /// Builds the score; building blocks are validated as usual.
    pub fn score_spec(&self) -> Result<ScoreSpec> {
        let s = self.raw_score()?;
        let s = match self.repair {
            Some(c) => monotone_repair(&s, RepairBound::Constant(c), NamedFn::identity())?,
            None => s,
        };
        Ok(match self.eval_box {
            Some(b) => s.with_eval_box(b),
            None => s,
        })
    }

    fn raw_score(&self) -> Result<ScoreSpec> {
        match self.construction.as_str() {
            "pinball" => Ok(pinball_score(self.p()?)),
            "quantile" => quantile_score(
                self.p()?,
                self.g_slot(self.g.as_deref(), "g.identity", None)?,
                self.a()?,
            ),
            "bregman" => Ok(bregman_score(self.phi()?, self.a()?)),
            "expectile" => Ok(expectile_score(
                self.level("tau", self.tau)?,
                self.phi()?,
                self.g_slot(self.g.as_deref(), "g.zero", None)?,
            )),
            "fz" => {
                let p = self.p()?;
                let g = self.g_slot(
                    self.g.as_deref(),
                    "g.level_default",
                    Some(1.0 / (1.0 - p.value())),
                )?;
                fz_score(p, self.phi()?, g, self.a()?)
            }
            "rvar" => {
                let (p, q) = self.pq()?;
                let scale = Some(1.0 / (q.value() - p.value()));
                let g1 = self.g_slot(self.g.as_deref(), "g.level_default", scale)?;
                let g2 = self.g_slot(self.g2.as_deref(), "g.level_default", scale)?;
                rvar_score(p, q, self.phi()?, g1, g2, self.a()?)
            }
            "shortfall" => {
                shortfall_score(self.ell()?, self.g_slot(self.g.as_deref(), "g.zero", None)?)
            }
            "ratio" => Ok(ratio_score(
                self.bv("u", self.u.as_deref(), "u.identity")?,
                self.bv("t", self.t.as_deref(), "t.one")?,
                self.phi()?,
                self.g_slot(self.g.as_deref(), "g.zero", None)?,
            )),
            "lift" => lift_score(&self.generator()?.score_spec()?, self.p()?, self.a()?),
            "left_tail" => left_tail_score(&self.generator()?.score_spec()?, self.p()?, self.a()?),
            "body" => {
                let (p, q) = self.pq()?;
                let scale = Some(1.0 / (q.value() - p.value()));
                let g1 = self.g_slot(self.g.as_deref(), "g.level_default", scale)?;
                let g2 = self.g_slot(self.g2.as_deref(), "g.level_default", scale)?;
                body_score(&self.generator()?.score_spec()?, p, q, g1, g2, self.a()?)
            }
            other => Err(unknown("construction", other)),
        }
    }

    /// Builds the matching identification function.
    pub fn id_spec(&self) -> Result<IdSpec> {
        match self.construction.as_str() {
            "bregman" => Ok(mean_id()),
            "pinball" | "quantile" => Ok(quantile_id(self.p()?)),
            "expectile" => Ok(expectile_id(self.level("tau", self.tau)?)),
            "shortfall" => Ok(shortfall_id(self.ell()?)),
            "ratio" => Ok(ratio_id(
                self.bv("u", self.u.as_deref(), "u.identity")?,
                self.bv("t", self.t.as_deref(), "t.one")?,
            )),
            "fz" => Ok(var_es_id(self.p()?)),
            "rvar" => {
                let (p, q) = self.pq()?;
                rvar_id(p, q)
            }
            "lift" => lift_id(&self.generator()?.id_spec()?, self.p()?, true),
            "body" => {
                let (p, q) = self.pq()?;
                body_id(&self.generator()?.id_spec()?, p, q, true)
            }
            other => Err(unknown("identification construction", other)),
        }
    }
}
