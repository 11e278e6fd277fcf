use serde::Serialize;

/// Which construction produced a score or identification function, and
/// with which parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecMeta {
    pub construction: String,
    pub params: Vec<(String, f64)>,
    /// Names of the building blocks (φ, g, ℓ, inner functions).
    pub blocks: Vec<String>,
    /// Action domain restriction `forecast[i] ≤ forecast[j]`, used by the
    /// three-dimensional body and RVaR families.
    pub ordered: Option<(usize, usize)>,
}

impl SpecMeta {
    pub fn new(construction: impl Into<String>) -> Self {
        Self {
            construction: construction.into(),
            params: Vec::new(),
            blocks: Vec::new(),
            ordered: None,
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn block(mut self, name: impl Into<String>) -> Self {
        self.blocks.push(name.into());
        self
    }

    pub fn ordered(mut self, i: usize, j: usize) -> Self {
        self.ordered = Some((i, j));
        self
    }

    /// Whether `forecast` lies in the action domain.
    pub fn admissible(&self, forecast: &[f64]) -> bool {
        self.ordered.is_none_or(|(i, j)| forecast[i] <= forecast[j])
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}
