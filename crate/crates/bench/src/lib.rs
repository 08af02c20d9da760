//! Workload builders shared by the benchmarks.

use handoff_core::simulator::{Scenario, TerminalSpec, Waypoint};
use handoff_core::Millis;

const OVERLAY: &str = include_str!("../../../scenarios/overlay.json");

/// The shipped overlay scenario with `terminals` vehicles crossing it in
/// both directions, staggered across the y axis.
pub fn overlay(terminals: usize, duration_ms: Millis) -> Scenario {
    let mut sc = Scenario::from_json(OVERLAY).expect("shipped overlay scenario parses");
    sc.duration_ms = duration_ms;
    sc.terminals = (0..terminals)
        .map(|i| {
            let y = (i % 10) as f64 * 10.0;
            let (from, to) = if i % 2 == 0 { (0.0, 2000.0) } else { (2000.0, 0.0) };
            TerminalSpec {
                id: format!("MT-{i:04}"),
                path: vec![
                    Waypoint { t: 0, pos: [from, y] },
                    Waypoint {
                        t: duration_ms,
                        pos: [to, y],
                    },
                ],
                ..TerminalSpec::parked("", [0.0, 0.0])
            }
        })
        .collect();
    sc
}

/// `n` network ids with deterministic, well-spread desirability values.
pub fn scores(n: usize) -> Vec<(String, f64)> {
    (0..n).map(|i| (format!("net-{i:04}"), ((i * 7919) % 1009) as f64 / 101.0)).collect()
}
