//! Handoff taxonomy over channels, cells, IP networks, providers and terminals.
//!
//! The infrastructure elements form a hierarchy (channel ⊂ cell ⊂ IP net ⊂
//! provider) and the terminal is an orthogonal dimension. A transition is
//! described by whether the terminal changed, the highest infrastructure level
//! that changed and, from the cell level upwards, whether the access
//! technology changed. Two terminal states times eight infrastructure outcomes
//! give sixteen combinations; the identity is not a handoff, leaving fifteen.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest element of the infrastructure hierarchy that changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfraLevel {
    None,
    Channel,
    Cell,
    Net,
    Provider,
}

impl InfraLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            InfraLevel::None => "none",
            InfraLevel::Channel => "channel",
            InfraLevel::Cell => "cell",
            InfraLevel::Net => "net",
            InfraLevel::Provider => "provider",
        }
    }

    /// Levels at which horizontal/vertical is meaningful.
    pub fn has_verticality(self) -> bool {
        self >= InfraLevel::Cell
    }
}

/// Protocol layer whose services a handoff demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
    L3,
    #[serde(rename = "L4_7")]
    L4To7,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::L1, Layer::L2, Layer::L3, Layer::L4To7];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::L1 => "L1",
            Layer::L2 => "L2",
            Layer::L3 => "L3",
            Layer::L4To7 => "L4_7",
        }
    }

    pub fn parse(s: &str) -> Option<Layer> {
        Layer::ALL.into_iter().find(|l| l.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verticality {
    Horizontal,
    Vertical,
    NotApplicable,
}

impl Verticality {
    pub fn as_str(self) -> &'static str {
        match self {
            Verticality::Horizontal => "horizontal",
            Verticality::Vertical => "vertical",
            Verticality::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("technology change is only defined at cell level or above")]
    TechChangeBelowCell,
    #[error("unknown topology element `{0}`")]
    UnknownTopologyElement(String),
    #[error("attachment field `{field}` is `{found}` but the topology says `{expected}`")]
    HierarchyMismatch {
        field: &'static str,
        found: String,
        expected: String,
    },
    #[error("attachment field `{0}` is empty")]
    EmptyId(&'static str),
    #[error("scenario dimension {0} has no instances")]
    EmptyDimension(usize),
    #[error("scenario space size overflows")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionDelta {
    pub terminal_changed: bool,
    pub infra_level: InfraLevel,
    pub tech_changed: bool,
}

impl TransitionDelta {
    pub fn new(terminal_changed: bool, infra_level: InfraLevel, tech_changed: bool) -> Result<Self, TaxonomyError> {
        if tech_changed && !infra_level.has_verticality() {
            return Err(TaxonomyError::TechChangeBelowCell);
        }
        Ok(Self {
            terminal_changed,
            infra_level,
            tech_changed,
        })
    }

    pub fn is_identity(&self) -> bool {
        !self.terminal_changed && self.infra_level == InfraLevel::None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HandoffType {
    pub code: String,
    pub delta: TransitionDelta,
    pub layer: Layer,
    pub verticality: Verticality,
}

fn layer_for(delta: &TransitionDelta) -> Layer {
    if delta.terminal_changed {
        return Layer::L4To7;
    }
    match delta.infra_level {
        InfraLevel::Channel => Layer::L1,
        InfraLevel::Cell => Layer::L2,
        InfraLevel::Net => Layer::L3,
        InfraLevel::Provider | InfraLevel::None => Layer::L4To7,
    }
}

fn verticality_for(delta: &TransitionDelta) -> Verticality {
    if !delta.infra_level.has_verticality() {
        Verticality::NotApplicable
    } else if delta.tech_changed {
        Verticality::Vertical
    } else {
        Verticality::Horizontal
    }
}

/// Every feasible delta in table order: same terminal first, then terminal
/// changed; within each, by infrastructure level, horizontal before vertical.
fn feasible_deltas() -> Vec<TransitionDelta> {
    let infra = [
        (InfraLevel::None, false),
        (InfraLevel::Channel, false),
        (InfraLevel::Cell, false),
        (InfraLevel::Cell, true),
        (InfraLevel::Net, false),
        (InfraLevel::Net, true),
        (InfraLevel::Provider, false),
        (InfraLevel::Provider, true),
    ];
    [false, true]
        .into_iter()
        .flat_map(|terminal_changed| {
            infra.into_iter().map(move |(infra_level, tech_changed)| TransitionDelta {
                terminal_changed,
                infra_level,
                tech_changed,
            })
        })
        .filter(|d| !d.is_identity())
        .collect()
}

/// The fifteen feasible handoff types, codes `HO01`..`HO15`.
pub fn enumerate_types() -> Vec<HandoffType> {
    feasible_deltas()
        .into_iter()
        .enumerate()
        .map(|(i, delta)| HandoffType {
            code: format!("HO{:02}", i + 1),
            layer: layer_for(&delta),
            verticality: verticality_for(&delta),
            delta,
        })
        .collect()
}

impl HandoffType {
    /// The type for a delta, or `None` for the identity.
    pub fn from_delta(delta: TransitionDelta) -> Option<HandoffType> {
        enumerate_types().into_iter().find(|t| t.delta == delta)
    }
}

pub fn layer_of(t: &HandoffType) -> Layer {
    t.layer
}

/// Number of scenarios spanned by independent dimensions with the given
/// cardinalities.
pub fn scenario_space_size(dims: &[u64]) -> Result<u64, TaxonomyError> {
    dims.iter().enumerate().try_fold(1u64, |acc, (i, &d)| {
        if d == 0 {
            return Err(TaxonomyError::EmptyDimension(i));
        }
        acc.checked_mul(d).ok_or(TaxonomyError::Overflow)
    })
}

/// Where a terminal is attached.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attachment {
    pub terminal: String,
    pub provider: String,
    pub net: String,
    pub cell: String,
    pub channel: String,
    pub technology: String,
}

/// What classification needs to know about a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellInfo<'a> {
    pub net: &'a str,
    pub provider: &'a str,
    pub technology: &'a str,
    pub channels: &'a [String],
}

pub trait TopologyView {
    fn locate_cell(&self, cell: &str) -> Option<CellInfo<'_>>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transition {
    NotAHandoff,
    Handoff(HandoffType),
}

fn check_against(a: &Attachment, topo: &impl TopologyView) -> Result<(), TaxonomyError> {
    for (field, v) in [
        ("terminal", &a.terminal),
        ("provider", &a.provider),
        ("net", &a.net),
        ("cell", &a.cell),
        ("channel", &a.channel),
        ("technology", &a.technology),
    ] {
        if v.is_empty() {
            return Err(TaxonomyError::EmptyId(field));
        }
    }
    let info = topo
        .locate_cell(&a.cell)
        .ok_or_else(|| TaxonomyError::UnknownTopologyElement(a.cell.clone()))?;
    let mismatch = |field: &'static str, found: &str, expected: &str| TaxonomyError::HierarchyMismatch {
        field,
        found: found.to_owned(),
        expected: expected.to_owned(),
    };
    if info.net != a.net {
        return Err(mismatch("net", &a.net, info.net));
    }
    if info.provider != a.provider {
        return Err(mismatch("provider", &a.provider, info.provider));
    }
    if info.technology != a.technology {
        return Err(mismatch("technology", &a.technology, info.technology));
    }
    if !info.channels.iter().any(|c| c == &a.channel) {
        return Err(TaxonomyError::UnknownTopologyElement(a.channel.clone()));
    }
    Ok(())
}

/// Classifies the move from `before` to `after`. Both attachments are checked
/// against the topology first.
pub fn classify(before: &Attachment, after: &Attachment, topo: &impl TopologyView) -> Result<Transition, TaxonomyError> {
    check_against(before, topo)?;
    check_against(after, topo)?;
    let infra_level = if before.provider != after.provider {
        InfraLevel::Provider
    } else if before.net != after.net {
        InfraLevel::Net
    } else if before.cell != after.cell {
        InfraLevel::Cell
    } else if before.channel != after.channel {
        InfraLevel::Channel
    } else {
        InfraLevel::None
    };
    let tech_changed = infra_level.has_verticality() && before.technology != after.technology;
    let delta = TransitionDelta::new(before.terminal != after.terminal, infra_level, tech_changed)?;
    Ok(match HandoffType::from_delta(delta) {
        Some(t) => Transition::Handoff(t),
        None => Transition::NotAHandoff,
    })
}

/// The taxonomy as CSV: `code,terminal_changed,infra_level,verticality,layer`.
pub fn taxonomy_csv() -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["code", "terminal_changed", "infra_level", "verticality", "layer"])
        .expect("in-memory write");
    for t in enumerate_types() {
        w.write_record([
            t.code.as_str(),
            if t.delta.terminal_changed { "true" } else { "false" },
            t.delta.infra_level.as_str(),
            t.verticality.as_str(),
            t.layer.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}
