//! Context sources, the criterion catalog and the feature/goal registry.
//!
//! A [`Catalog`] names every criterion a criteria vector may carry, where it
//! comes from and whether it adds to or subtracts from desirability. The
//! [`FeatureSpec`] registry turns the desired handoff features into checkable
//! goals over a metric snapshot.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Millis;

/// Where a piece of handoff context comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextSource {
    User,
    Terminal,
    Application,
    Network,
    Provider,
    /// The handoff process observing itself.
    HandoffPerformance,
}

impl ContextSource {
    pub const ALL: [ContextSource; 6] = [
        ContextSource::User,
        ContextSource::Terminal,
        ContextSource::Application,
        ContextSource::Network,
        ContextSource::Provider,
        ContextSource::HandoffPerformance,
    ];

    /// Only the handoff-performance source is internal (self-aware); the
    /// other five are external (context-aware).
    pub fn is_internal(self) -> bool {
        matches!(self, ContextSource::HandoffPerformance)
    }
}

/// Whether a criterion contributes to desirability or to undesirability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Beneficial,
    Detrimental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDef {
    pub id: String,
    pub source: ContextSource,
    pub polarity: Polarity,
    pub unit: String,
    /// Lower clamp applied before taking logarithms. Always positive.
    pub floor: f64,
}

impl CriterionDef {
    pub fn new(id: &str, source: ContextSource, polarity: Polarity, unit: &str, floor: f64) -> Self {
        Self {
            id: id.to_owned(),
            source,
            polarity,
            unit: unit.to_owned(),
            floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("criterion `{0}` has a non-finite value")]
    NonFiniteValue(String),
    #[error("criterion `{0}` is defined more than once")]
    DuplicateCriterion(String),
    #[error("criterion `{0}` must have a positive floor")]
    NonPositiveFloor(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` is undefined for this snapshot")]
    UndefinedMetric(String),
    #[error("goal on `{metric}` is malformed: {reason}")]
    MalformedGoal { metric: String, reason: String },
    #[error("goal registry must list each of the ten features exactly once (problem: {0})")]
    IncompleteRegistry(String),
    #[error("goal registry is not valid JSON: {0}")]
    Registry(String),
}

/// An ordered, id-indexed set of criterion definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CriterionDef>", into = "Vec<CriterionDef>")]
pub struct Catalog {
    defs: Vec<CriterionDef>,
    index: BTreeMap<String, usize>,
}

impl Catalog {
    pub fn new(defs: Vec<CriterionDef>) -> Result<Self, ContextError> {
        let mut index = BTreeMap::new();
        for (i, def) in defs.iter().enumerate() {
            if !(def.floor > 0.0 && def.floor.is_finite()) {
                return Err(ContextError::NonPositiveFloor(def.id.clone()));
            }
            if index.insert(def.id.clone(), i).is_some() {
                return Err(ContextError::DuplicateCriterion(def.id.clone()));
            }
        }
        Ok(Self { defs, index })
    }

    pub fn get(&self, id: &str) -> Option<&CriterionDef> {
        self.index.get(id).map(|&i| &self.defs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CriterionDef> {
        self.defs.iter()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

impl TryFrom<Vec<CriterionDef>> for Catalog {
    type Error = ContextError;

    fn try_from(defs: Vec<CriterionDef>) -> Result<Self, Self::Error> {
        Catalog::new(defs)
    }
}

impl From<Catalog> for Vec<CriterionDef> {
    fn from(c: Catalog) -> Self {
        c.defs
    }
}

impl Default for Catalog {
    fn default() -> Self {
        default_catalog()
    }
}

/// Floor used for received power, which the simulator stores in milliwatts
/// (-150 dBm).
pub const RSS_FLOOR_MW: f64 = 1e-15;

const FLOOR: f64 = 1e-6;

/// The built-in catalog covering terminal, application, network, user and
/// provider criteria.
pub fn default_catalog() -> Catalog {
    use ContextSource::*;
    use Polarity::*;
    let rows: &[(&str, ContextSource, Polarity, &str)] = &[
        // link quality
        ("RSS", Terminal, Beneficial, "mW"),
        ("SNR", Terminal, Beneficial, "ratio"),
        ("SNIR", Terminal, Beneficial, "ratio"),
        ("BER", Terminal, Detrimental, "ratio"),
        ("BLER", Terminal, Detrimental, "ratio"),
        ("SIR", Terminal, Beneficial, "ratio"),
        ("CCI", Terminal, Detrimental, "mW"),
        ("CIR", Terminal, Beneficial, "ratio"),
        // power management
        ("BL", Terminal, Beneficial, "%"),
        ("ECR", Terminal, Detrimental, "mW"),
        ("TPC", Terminal, Detrimental, "mW"),
        ("TPT", Terminal, Detrimental, "mW"),
        ("PB", Terminal, Beneficial, "mW"),
        // application QoS
        ("LP", Application, Detrimental, "pkt/s"),
        ("DP", Application, Detrimental, "pkt/s"),
        ("CP", Application, Detrimental, "pkt/s"),
        ("DuP", Application, Detrimental, "pkt/s"),
        ("DTR", Application, Beneficial, "kbit/s"),
        ("PJ", Application, Detrimental, "ms"),
        ("OOD", Application, Detrimental, "pkt/s"),
        // network
        ("NBW", Network, Beneficial, "Mbit/s"),
        ("NL", Network, Detrimental, "%"),
        ("ND", Network, Detrimental, "ms"),
        ("NJ", Network, Detrimental, "ms"),
        ("NT", Network, Beneficial, "Mbit/s"),
        ("NMTU", Network, Beneficial, "bytes"),
        // opaque user / provider scalars
        ("UPREF", User, Beneficial, "score"),
        ("FEE", Provider, Detrimental, "cost/min"),
        ("PPREF", Provider, Beneficial, "score"),
    ];
    let defs = rows
        .iter()
        .map(|&(id, src, pol, unit)| {
            let floor = if id == "RSS" { RSS_FLOOR_MW } else { FLOOR };
            CriterionDef::new(id, src, pol, unit, floor)
        })
        .collect();
    Catalog::new(defs).expect("built-in catalog is well formed")
}

/// Criterion values observed for one network at one instant.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CriteriaVector {
    pub entries: BTreeMap<String, f64>,
    pub timestamp: Millis,
}

impl CriteriaVector {
    pub fn new(timestamp: Millis) -> Self {
        Self {
            entries: BTreeMap::new(),
            timestamp,
        }
    }

    pub fn with(mut self, id: &str, value: f64) -> Self {
        self.entries.insert(id.to_owned(), value);
        self
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.get(id).copied()
    }
}

/// Checks every entry against the catalog. Entries are checked independently,
/// in id order; the first failure is returned.
pub fn validate_vector(v: &CriteriaVector, catalog: &Catalog) -> Result<(), ContextError> {
    for (id, value) in &v.entries {
        if !catalog.contains(id) {
            return Err(ContextError::UnknownCriterion(id.clone()));
        }
        if !value.is_finite() {
            return Err(ContextError::NonFiniteValue(id.clone()));
        }
    }
    Ok(())
}

/// Result of looking a metric up by its symbolic id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lookup {
    Value(f64),
    /// A known metric that has no value here (no generating mechanism, or an
    /// empty denominator).
    Undefined,
    Unknown,
}

/// Anything that can answer metric queries by symbolic id (HOR, DTIB, IL, ...).
pub trait MetricLookup {
    fn lookup(&self, metric_id: &str) -> Lookup;
}

impl MetricLookup for BTreeMap<String, f64> {
    fn lookup(&self, metric_id: &str) -> Lookup {
        match self.get(metric_id) {
            Some(v) => Lookup::Value(*v),
            None => Lookup::Unknown,
        }
    }
}

/// How a metric must behave for a goal to hold.
///
/// `Minimize` and `Maximize` carry the bound that makes them checkable and
/// behave exactly like `MaintainBelow` / `MaintainAbove`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "snake_case")]
pub enum GoalDirection {
    Minimize { bound: f64 },
    Maximize { bound: f64 },
    MaintainBelow { bound: f64 },
    MaintainAbove { bound: f64 },
    KeepWithin { lower: f64, upper: f64 },
}

impl GoalDirection {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            GoalDirection::Minimize { bound } | GoalDirection::MaintainBelow { bound } => value < bound,
            GoalDirection::Maximize { bound } | GoalDirection::MaintainAbove { bound } => value > bound,
            GoalDirection::KeepWithin { lower, upper } => lower <= value && value <= upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    #[serde(rename = "metric")]
    pub metric_id: String,
    #[serde(flatten)]
    pub direction: GoalDirection,
}

impl GoalSpec {
    pub fn new(metric_id: &str, direction: GoalDirection) -> Self {
        Self {
            metric_id: metric_id.to_owned(),
            direction,
        }
    }

    pub fn validate(&self) -> Result<(), ContextError> {
        let bad = |reason: &str| ContextError::MalformedGoal {
            metric: self.metric_id.clone(),
            reason: reason.to_owned(),
        };
        match self.direction {
            GoalDirection::KeepWithin { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(bad("bounds must be finite"));
                }
                if lower > upper {
                    return Err(bad("lower bound exceeds upper bound"));
                }
            }
            GoalDirection::Minimize { bound }
            | GoalDirection::Maximize { bound }
            | GoalDirection::MaintainBelow { bound }
            | GoalDirection::MaintainAbove { bound } => {
                if !bound.is_finite() {
                    return Err(bad("bound must be finite"));
                }
            }
        }
        Ok(())
    }
}

pub fn goal_satisfied(snapshot: &impl MetricLookup, goal: &GoalSpec) -> Result<bool, ContextError> {
    match snapshot.lookup(&goal.metric_id) {
        Lookup::Value(v) => Ok(goal.direction.holds(v)),
        Lookup::Undefined => Err(ContextError::UndefinedMetric(goal.metric_id.clone())),
        Lookup::Unknown => Err(ContextError::UnknownMetric(goal.metric_id.clone())),
    }
}

/// The ten desired handoff features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Seamlessness,
    Autonomy,
    Security,
    Correctness,
    Adaptability,
    Necessary,
    Selective,
    Efficient,
    Beneficial,
    Timely,
}

impl Feature {
    pub const ALL: [Feature; 10] = [
        Feature::Seamlessness,
        Feature::Autonomy,
        Feature::Security,
        Feature::Correctness,
        Feature::Adaptability,
        Feature::Necessary,
        Feature::Selective,
        Feature::Efficient,
        Feature::Beneficial,
        Feature::Timely,
    ];
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub feature: Feature,
    pub purpose: String,
    pub goals: Vec<GoalSpec>,
}

const DEFAULT_GOALS: &str = include_str!("../data/default_goals.json");

/// Parses and checks a goal registry: each feature exactly once, every goal
/// well formed.
pub fn parse_feature_specs(json: &str) -> Result<Vec<FeatureSpec>, ContextError> {
    let specs: Vec<FeatureSpec> = serde_json::from_str(json).map_err(|e| ContextError::Registry(e.to_string()))?;
    validate_feature_specs(&specs)?;
    Ok(specs)
}

pub fn validate_feature_specs(specs: &[FeatureSpec]) -> Result<(), ContextError> {
    for feature in Feature::ALL {
        let n = specs.iter().filter(|s| s.feature == feature).count();
        if n != 1 {
            return Err(ContextError::IncompleteRegistry(format!("{feature} listed {n} times")));
        }
    }
    if specs.len() != Feature::ALL.len() {
        return Err(ContextError::IncompleteRegistry(format!("{} entries", specs.len())));
    }
    specs.iter().flat_map(|s| &s.goals).try_for_each(GoalSpec::validate)
}

/// The shipped success ranges. The autonomy goal on IL is re-bound to the
/// application timeout.
pub fn default_feature_specs(app_timeout_ms: Millis) -> Vec<FeatureSpec> {
    let mut specs = parse_feature_specs(DEFAULT_GOALS).expect("shipped goal registry is valid");
    bind_app_timeout(&mut specs, app_timeout_ms);
    specs
}

/// Rewrites every `IL < bound` goal to `IL < app_timeout`.
pub fn bind_app_timeout(specs: &mut [FeatureSpec], app_timeout_ms: Millis) {
    for goal in specs.iter_mut().flat_map(|s| s.goals.iter_mut()) {
        if goal.metric_id == "IL" {
            if let GoalDirection::MaintainBelow { bound } = &mut goal.direction {
                *bound = app_timeout_ms as f64;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVerdict {
    pub passed: bool,
    /// No goal could be evaluated (none configured, or all undefined).
    pub vacuous: bool,
    /// Goals skipped because their metric is undefined for the snapshot.
    pub undefined: Vec<String>,
}

/// Evaluates each feature as the conjunction of its goals. Goals whose metric
/// is undefined are skipped and listed; unknown metrics are an error.
pub fn feature_report(
    snapshot: &impl MetricLookup,
    specs: &[FeatureSpec],
) -> Result<BTreeMap<Feature, FeatureVerdict>, ContextError> {
    let mut out = BTreeMap::new();
    for spec in specs {
        let mut passed = true;
        let mut evaluated = 0usize;
        let mut undefined = Vec::new();
        for goal in &spec.goals {
            match goal_satisfied(snapshot, goal) {
                Ok(ok) => {
                    evaluated += 1;
                    passed &= ok;
                }
                Err(ContextError::UndefinedMetric(id)) => undefined.push(id),
                Err(e) => return Err(e),
            }
        }
        out.insert(
            spec.feature,
            FeatureVerdict {
                passed,
                vacuous: evaluated == 0,
                undefined,
            },
        );
    }
    Ok(out)
}
