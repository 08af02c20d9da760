//! Deterministic overlay-network simulator.

pub mod engine;
pub mod scenario;
pub mod synthesis;
pub mod topology;
pub mod trace;

pub use engine::{run, run_prepared, EventQueue};
pub use scenario::{Prepared, Scenario, ScenarioError, TerminalSpec};
pub use synthesis::{Shape, SynthesisMode, SynthesisSpec, Synthesizer, Wave};
pub use topology::{advance_position, rss_at, BaseStation, IpNet, Isp, Tier, Topology, TopologyDirectory, Waypoint};
pub use trace::{Trace, TraceBody, TraceRecord};
