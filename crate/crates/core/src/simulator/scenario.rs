//! Scenario documents: parsing and invariant checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::synthesis::{Shape, SynthesisMode, SynthesisSpec};
use super::topology::{Topology, Waypoint};
use crate::context::{default_catalog, default_feature_specs, validate_feature_specs, Catalog, FeatureSpec, GoalSpec};
use crate::controller::{ControllerConfig, ControllerError, MethodPolicy};
use crate::desirability::{WeightProfile, WeightSpec};
use crate::Millis;

/// Criterion filled in from the radio model rather than the synthesis spec.
pub const RSS: &str = "RSS";

/// Scenario-level figures reported as-is.
pub const PASSTHROUGH_METRICS: [&str; 4] = ["AL", "SSO", "DAR", "OUIR"];

fn default_battery() -> f64 {
    100.0
}

fn default_app_type() -> String {
    "data".to_owned()
}

fn default_mobility() -> String {
    "pedestrian".to_owned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalSpec {
    pub id: String,
    pub path: Vec<Waypoint>,
    #[serde(default = "default_battery")]
    pub battery: f64,
    #[serde(default = "default_app_type")]
    pub app_type: String,
    #[serde(default = "default_mobility")]
    pub mobility: String,
}

impl TerminalSpec {
    /// A terminal parked at `pos`.
    pub fn parked(id: &str, pos: [f64; 2]) -> Self {
        Self {
            id: id.to_owned(),
            path: vec![Waypoint { t: 0, pos }],
            battery: default_battery(),
            app_type: default_app_type(),
            mobility: default_mobility(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub terminals: Vec<TerminalSpec>,
    pub weights: WeightSpec,
    pub controller: ControllerConfig,
    pub synthesis: SynthesisSpec,
    pub duration_ms: Millis,
    pub tick_ms: Millis,
    #[serde(default)]
    pub seed: u64,
    /// Replaces the built-in criterion catalog.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Catalog>,
    /// Replaces the built-in feature goal registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<Vec<FeatureSpec>>,
    /// Success regions checked when evaluating each handoff.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<GoalSpec>,
    #[serde(default)]
    pub policy: MethodPolicy,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub passthrough: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {rule}")]
    Invalid { field: String, rule: String },
    #[error("runtime failure: {0}")]
    Runtime(String),
}

fn invalid(field: impl Into<String>, rule: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        rule: rule.into(),
    }
}

/// A scenario whose invariants hold, with its resolved catalog and profile.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub catalog: Catalog,
    pub profile: WeightProfile,
    pub goals: Vec<FeatureSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        if self.tick_ms == 0 {
            return Err(invalid("tick_ms", "tick_ms > 0"));
        }
        if self.duration_ms % self.tick_ms != 0 {
            return Err(invalid("duration_ms", "duration_ms must be a multiple of tick_ms"));
        }
        self.topology.validate().map_err(|i| invalid(i.field, i.rule))?;
        self.check_terminals()?;
        self.controller.validate().map_err(|e| match e {
            ControllerError::InvalidConfig { field, rule } => invalid(format!("controller.{field}"), rule),
            other => invalid("controller", other.to_string()),
        })?;
        let catalog = self.catalog.clone().unwrap_or_else(default_catalog);
        let profile = WeightProfile::from_spec(&self.weights, &catalog).map_err(|e| invalid("weights", e.to_string()))?;
        self.check_synthesis(&catalog, &profile)?;
        for (i, r) in self.regions.iter().enumerate() {
            r.validate().map_err(|e| invalid(format!("regions[{i}]"), e.to_string()))?;
        }
        let goals = match &self.goals {
            Some(g) => {
                validate_feature_specs(g).map_err(|e| invalid("goals", e.to_string()))?;
                g.clone()
            }
            None => default_feature_specs(self.controller.app_timeout_ms),
        };
        let apps: BTreeSet<&str> = self.terminals.iter().map(|t| t.app_type.as_str()).collect();
        let mobs: BTreeSet<&str> = self.terminals.iter().map(|t| t.mobility.as_str()).collect();
        self.policy
            .check_total(apps.iter().copied(), mobs.iter().copied())
            .map_err(|e| invalid("policy", e.to_string()))?;
        for (k, v) in &self.passthrough {
            if !PASSTHROUGH_METRICS.contains(&k.as_str()) {
                return Err(invalid(format!("passthrough.{k}"), "only AL, SSO, DAR and OUIR are carried"));
            }
            if !v.is_finite() {
                return Err(invalid(format!("passthrough.{k}"), "value must be finite"));
            }
        }
        Ok(Prepared {
            scenario: self.clone(),
            catalog,
            profile,
            goals,
        })
    }

    fn check_terminals(&self) -> Result<(), ScenarioError> {
        if self.terminals.is_empty() {
            return Err(invalid("terminals", "at least one terminal"));
        }
        let mut ids = BTreeSet::new();
        for (i, t) in self.terminals.iter().enumerate() {
            let f = format!("terminals[{i}]");
            if t.id.is_empty() || t.id == super::trace::GLOBAL || !ids.insert(&t.id) {
                return Err(invalid(format!("{f}.id"), "terminal ids must be nonempty, unique and not `*`"));
            }
            if t.path.is_empty() {
                return Err(invalid(format!("{f}.path"), "path must be nonempty"));
            }
            if t.path.windows(2).any(|w| w[0].t >= w[1].t) {
                return Err(invalid(format!("{f}.path"), "waypoint times must be strictly increasing"));
            }
            if t.path.iter().any(|w| !w.pos.iter().all(|c| c.is_finite())) {
                return Err(invalid(format!("{f}.path"), "waypoint positions must be finite"));
            }
            if !(0.0..=100.0).contains(&t.battery) {
                return Err(invalid(format!("{f}.battery"), "battery must lie in [0, 100]"));
            }
        }
        Ok(())
    }

    fn check_synthesis(&self, catalog: &Catalog, profile: &WeightProfile) -> Result<(), ScenarioError> {
        let s = &self.synthesis;
        if s.mode == SynthesisMode::Stochastic {
            if !(s.rho.is_finite() && (0.0..1.0).contains(&s.rho)) {
                return Err(invalid("synthesis.rho", "rho must lie in [0, 1)"));
            }
            if !(s.sigma.is_finite() && s.sigma >= 0.0) {
                return Err(invalid("synthesis.sigma", "sigma >= 0"));
            }
        }
        let stations: BTreeSet<&str> = self.topology.stations().map(|l| l.station.id.as_str()).collect();
        let needed: Vec<&str> = profile.criteria().filter(|c| *c != RSS).collect();
        for st in &stations {
            let Some(values) = s.base.get(*st) else {
                return Err(invalid(format!("synthesis.base.{st}"), "every station needs base criteria"));
            };
            for c in &needed {
                if !values.contains_key(*c) {
                    return Err(invalid(
                        format!("synthesis.base.{st}.{c}"),
                        "every weighted criterion needs a base value",
                    ));
                }
            }
        }
        for (net, values) in s.base.iter().chain(&s.initial) {
            if !stations.contains(net.as_str()) {
                return Err(invalid(format!("synthesis.base.{net}"), "unknown station"));
            }
            for (c, v) in values {
                if !catalog.contains(c) {
                    return Err(invalid(format!("synthesis.base.{net}.{c}"), "unknown criterion"));
                }
                if !v.is_finite() {
                    return Err(invalid(format!("synthesis.base.{net}.{c}"), "value must be finite"));
                }
            }
        }
        for (net, values) in &s.initial {
            for c in values.keys() {
                if !s.base.get(net).is_some_and(|b| b.contains_key(c)) {
                    return Err(invalid(format!("synthesis.initial.{net}.{c}"), "initial value without a base value"));
                }
            }
        }
        for (i, w) in s.waves.iter().enumerate() {
            let f = format!("synthesis.waves[{i}]");
            if !s.base.get(&w.network).is_some_and(|b| b.contains_key(&w.criterion)) {
                return Err(invalid(f, "wave must target a criterion with a base value"));
            }
            let ok = match w.shape {
                Shape::Ramp { per_s } => per_s.is_finite(),
                Shape::Square {
                    amplitude, period_ms, ..
                }
                | Shape::Sine {
                    amplitude, period_ms, ..
                } => amplitude.is_finite() && period_ms > 0,
                Shape::Pulse {
                    start_ms,
                    end_ms,
                    amplitude,
                } => amplitude.is_finite() && start_ms <= end_ms,
            };
            if !ok {
                return Err(invalid(f, "wave needs finite amplitude, period > 0 and start <= end"));
            }
        }
        Ok(())
    }
}
