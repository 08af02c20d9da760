//! Cognitive handoff decision engine and overlay-network mobility simulator.
//!
//! The crate is organised bottom-up:
//!
//! - [`context`]: context sources, the criterion catalog, criteria vectors and
//!   the feature/goal registry used to judge a run.
//! - [`desirability`]: log-weighted desirability scoring and the available
//!   network list (ANL).
//! - [`taxonomy`]: the fifteen feasible handoff types and transition
//!   classification.
//! - [`controller`]: the five-state handoff control entity (HCE), its trigger
//!   predicates and method selection.
//! - [`simulator`]: deterministic discrete-event engine driving context
//!   synthesis and the controllers.
//! - [`metrics`]: handoff-performance metrics computed from traces.

pub mod context;
pub mod controller;
pub mod desirability;
pub mod metrics;
pub mod simulator;
pub mod taxonomy;

/// Simulation time in integer milliseconds.
pub type Millis = u64;

pub use context::{Catalog, ContextSource, CriteriaVector, CriterionDef, Feature, FeatureSpec, GoalSpec, Polarity};
pub use controller::{ControllerConfig, ControllerState, HandoffReason, Hce, Strategy, TriggerPlan};
pub use desirability::{AvailableNetworkList, DesirabilityScore, NetworkId, WeightProfile};
pub use metrics::{HandoffRecord, MetricSnapshot, MetricsReport};
pub use simulator::{Scenario, Trace, TraceRecord};
pub use taxonomy::{Attachment, HandoffType, InfraLevel, Layer, Verticality};
