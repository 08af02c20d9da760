//! Desirability scoring and the available network list (ANL).
//!
//! A network's desirability over a criteria vector is
//!
//! ```text
//! D = Σ_{i ∈ V+} (K + W_i)·log10(V_i) − Σ_{j ∈ V−} (K + W_j)·log10(V_j)
//! ```
//!
//! where beneficial and detrimental weights each sum to one and every value is
//! clamped to its criterion floor before the logarithm. Criteria absent from
//! the weight profile do not contribute.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{Catalog, CriteriaVector, CriterionDef, Polarity};
use crate::Millis;

/// Tolerance on each side's weight sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Default scaling factor K.
pub const DEFAULT_K: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NetworkId(pub String);

impl NetworkId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NetworkId {
    fn from(s: &str) -> Self {
        NetworkId(s.to_owned())
    }
}

impl From<String> for NetworkId {
    fn from(s: String) -> Self {
        NetworkId(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesirabilityError {
    #[error("weight profile names unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("weight for `{0}` must lie in [0, 1]")]
    WeightOutOfRange(String),
    #[error("scaling factor K must be finite and nonnegative, got {0}")]
    InvalidScale(f64),
    #[error("{polarity:?} weights must sum to 1, got {sum}")]
    WeightSum { polarity: Polarity, sum: f64 },
    #[error("weight profile is empty")]
    EmptyProfile,
    #[error("criteria vector lacks weighted criterion `{0}`")]
    MissingCriterion(String),
    #[error("network `{0}` appears more than once")]
    DuplicateNetwork(NetworkId),
    #[error("desirability of `{0}` is not finite")]
    NonFinite(NetworkId),
}

/// Weight profile as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(default = "default_k")]
    pub k: f64,
    pub weights: BTreeMap<String, f64>,
}

fn default_k() -> f64 {
    DEFAULT_K
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    id: String,
    weight: f64,
    floor: f64,
}

/// A validated weight profile, partitioned by catalog polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    k: f64,
    beneficial: Vec<Term>,
    detrimental: Vec<Term>,
}

impl WeightProfile {
    /// Builds a profile. Each nonempty side must have weights summing to one.
    pub fn new(k: f64, weights: &BTreeMap<String, f64>, catalog: &Catalog) -> Result<Self, DesirabilityError> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(DesirabilityError::InvalidScale(k));
        }
        if weights.is_empty() {
            return Err(DesirabilityError::EmptyProfile);
        }
        let mut beneficial = Vec::new();
        let mut detrimental = Vec::new();
        for (id, &w) in weights {
            let def = catalog
                .get(id)
                .ok_or_else(|| DesirabilityError::UnknownCriterion(id.clone()))?;
            if !(0.0..=1.0).contains(&w) {
                return Err(DesirabilityError::WeightOutOfRange(id.clone()));
            }
            let term = Term {
                id: id.clone(),
                weight: w,
                floor: def.floor,
            };
            match def.polarity {
                Polarity::Beneficial => beneficial.push(term),
                Polarity::Detrimental => detrimental.push(term),
            }
        }
        for (side, polarity) in [(&beneficial, Polarity::Beneficial), (&detrimental, Polarity::Detrimental)] {
            if side.is_empty() {
                continue;
            }
            let sum: f64 = side.iter().map(|t| t.weight).sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(DesirabilityError::WeightSum { polarity, sum });
            }
        }
        Ok(Self { k, beneficial, detrimental })
    }

    pub fn from_spec(spec: &WeightSpec, catalog: &Catalog) -> Result<Self, DesirabilityError> {
        Self::new(spec.k, &spec.weights, catalog)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Weighted criterion ids, beneficial first.
    pub fn criteria(&self) -> impl Iterator<Item = &str> {
        self.beneficial.iter().chain(&self.detrimental).map(|t| t.id.as_str())
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.beneficial
            .iter()
            .chain(&self.detrimental)
            .find(|t| t.id == id)
            .map(|t| t.weight)
    }
}

/// Clamps a raw criterion value to its floor so the logarithm is defined.
pub fn normalize(raw: f64, def: &CriterionDef) -> f64 {
    clamp_to_floor(raw, def.floor)
}

fn clamp_to_floor(raw: f64, floor: f64) -> f64 {
    if raw > 0.0 {
        raw.max(floor)
    } else {
        floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesirabilityScore {
    pub network: NetworkId,
    pub value: f64,
    pub computed_at: Millis,
}

impl DesirabilityScore {
    pub fn new(network: impl Into<NetworkId>, value: f64, computed_at: Millis) -> Self {
        Self {
            network: network.into(),
            value,
            computed_at,
        }
    }
}

fn weighted_log_sum(terms: &[Term], k: f64, v: &CriteriaVector) -> Result<f64, DesirabilityError> {
    let mut sum = 0.0;
    for t in terms {
        let raw = v
            .get(&t.id)
            .ok_or_else(|| DesirabilityError::MissingCriterion(t.id.clone()))?;
        sum += (k + t.weight) * clamp_to_floor(raw, t.floor).log10();
    }
    Ok(sum)
}

/// Scores one network's criteria vector.
pub fn desirability(
    network: impl Into<NetworkId>,
    v: &CriteriaVector,
    profile: &WeightProfile,
) -> Result<DesirabilityScore, DesirabilityError> {
    let network = network.into();
    let plus = weighted_log_sum(&profile.beneficial, profile.k, v)?;
    let minus = weighted_log_sum(&profile.detrimental, profile.k, v)?;
    let value = plus - minus;
    if !value.is_finite() {
        return Err(DesirabilityError::NonFinite(network));
    }
    Ok(DesirabilityScore::new(network, value, v.timestamp))
}

/// |D_curr − D_best|.
pub fn relative_desirability(d_curr: f64, d_best: f64) -> f64 {
    (d_curr - d_best).abs()
}

/// Networks ordered from most to least desirable; ties by ascending id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AvailableNetworkList {
    entries: Vec<DesirabilityScore>,
    as_of: Millis,
}

fn anl_order(a: &DesirabilityScore, b: &DesirabilityScore) -> Ordering {
    b.value.total_cmp(&a.value).then_with(|| a.network.cmp(&b.network))
}

/// Orders scores into an ANL.
pub fn rank(scores: Vec<DesirabilityScore>, as_of: Millis) -> Result<AvailableNetworkList, DesirabilityError> {
    let mut seen = BTreeSet::new();
    for s in &scores {
        if !seen.insert(&s.network) {
            return Err(DesirabilityError::DuplicateNetwork(s.network.clone()));
        }
    }
    let mut entries = scores;
    entries.sort_by(anl_order);
    Ok(AvailableNetworkList { entries, as_of })
}

/// Head of the list, if any.
pub fn best(anl: &AvailableNetworkList) -> Option<&NetworkId> {
    anl.entries.first().map(|s| &s.network)
}

impl AvailableNetworkList {
    pub fn empty(as_of: Millis) -> Self {
        Self {
            entries: Vec::new(),
            as_of,
        }
    }

    /// Convenience constructor from `(id, value)` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, f64)], as_of: Millis) -> Result<Self, DesirabilityError> {
        rank(
            pairs
                .iter()
                .map(|(id, v)| DesirabilityScore::new(id.as_ref(), *v, as_of))
                .collect(),
            as_of,
        )
    }

    pub fn entries(&self) -> &[DesirabilityScore] {
        &self.entries
    }

    pub fn as_of(&self) -> Millis {
        self.as_of
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&NetworkId> {
        best(self)
    }

    pub fn head(&self) -> Option<&DesirabilityScore> {
        self.entries.first()
    }

    pub fn score_of(&self, id: &NetworkId) -> Option<f64> {
        self.entries.iter().find(|s| &s.network == id).map(|s| s.value)
    }

    pub fn contains(&self, id: &NetworkId) -> bool {
        self.entries.iter().any(|s| &s.network == id)
    }

    /// True when `id` is listed with the maximal desirability (the head, or
    /// tied with it).
    pub fn is_best(&self, id: &NetworkId) -> bool {
        match (self.head(), self.score_of(id)) {
            (Some(h), Some(v)) => v >= h.value,
            _ => false,
        }
    }

    /// The most desirable network other than `exclude`.
    pub fn best_other(&self, exclude: &NetworkId) -> Option<&DesirabilityScore> {
        self.entries.iter().find(|s| &s.network != exclude)
    }

    pub fn without(&self, exclude: &NetworkId) -> Self {
        Self {
            entries: self.entries.iter().filter(|s| &s.network != exclude).cloned().collect(),
            as_of: self.as_of,
        }
    }

    pub fn networks(&self) -> impl Iterator<Item = &NetworkId> {
        self.entries.iter().map(|s| &s.network)
    }
}
