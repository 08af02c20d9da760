//! Tick-driven discrete-event engine.
//!
//! Each tick, for every terminal in id order: move the terminal, report a lost
//! serving link, rank the covered networks into a fresh ANL and hand it to the
//! controller, fire the controller's due timers, then log end-of-tick
//! occupancy. Timers are quantized up to the next tick, so zero-latency
//! phases complete within the tick that started them.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::scenario::{Prepared, Scenario, ScenarioError, TerminalSpec, RSS};
use super::synthesis::Synthesizer;
use super::topology::{advance_position, dbm_to_mw, TopologyDirectory};
use super::trace::{AnlRecord, ScenarioHeader, StepRecord, TerminalInit, TickRecord, Trace, TraceBody, GLOBAL};
use crate::controller::{Action, ControllerState, Event, Hce, StepContext, TimerKind};
use crate::desirability::{desirability, rank, NetworkId};
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TimerEvent {
    SwitchComplete,
    Evaluation,
}

impl TimerEvent {
    fn event(self) -> Event {
        match self {
            TimerEvent::SwitchComplete => Event::SwitchComplete,
            TimerEvent::Evaluation => Event::TimerFired(TimerKind::Evaluation),
        }
    }
}

/// Pending timers of one terminal, popped by time, then kind, then insertion.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<(Millis, TimerEvent, u64)>>,
    seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, at: Millis, ev: TimerEvent) {
        self.seq += 1;
        self.heap.push(Reverse((at, ev, self.seq)));
    }

    /// Earliest timer due at or before `now`.
    pub fn pop_due(&mut self, now: Millis) -> Option<(Millis, TimerEvent)> {
        match self.heap.peek() {
            Some(Reverse((at, ev, _))) if *at <= now => {
                let (at, ev) = (*at, *ev);
                self.heap.pop();
                Some((at, ev))
            }
            _ => None,
        }
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

struct Mobile<'a> {
    spec: &'a TerminalSpec,
    hce: Hce,
    attached: Option<NetworkId>,
    link_lost_sent: bool,
    timers: EventQueue,
}

struct World<'a> {
    prepared: &'a Prepared,
    trace: Trace,
}

impl World<'_> {
    fn deliver(&mut self, m: &mut Mobile<'_>, event: Event, now: Millis, covered: &BTreeSet<&str>) -> Result<(), ScenarioError> {
        let sc = &self.prepared.scenario;
        let directory = TopologyDirectory {
            topology: &sc.topology,
            terminal: &m.spec.id,
        };
        let ctx = StepContext {
            cfg: &sc.controller,
            policy: &sc.policy,
            directory: &directory,
            regions: &sc.regions,
        };
        let from = m.hce.state().name();
        let actions = m
            .hce
            .apply(&event, &ctx, now)
            .map_err(|e| ScenarioError::Runtime(format!("terminal {} at {now} ms: {e}", m.spec.id)))?;
        let to = m.hce.state().name();
        match m.hce.state() {
            ControllerState::Disconnection => {
                m.attached = None;
                m.timers.clear();
            }
            ControllerState::Execution { .. } if event == Event::CurrentLinkLost => m.attached = None,
            _ => {}
        }
        for a in &actions {
            match a {
                Action::Connect { network } => {
                    m.attached = Some(network.clone());
                    m.link_lost_sent = false;
                }
                Action::StartSwitch { plan } => m
                    .timers
                    .push(plan.when + sc.controller.exec_latency_ms, TimerEvent::SwitchComplete),
                Action::ScheduleTimer { at, .. } => m.timers.push(*at, TimerEvent::Evaluation),
                Action::RecordHandoff { .. } => {}
            }
        }
        self.trace.push(
            now,
            &m.spec.id,
            TraceBody::Step(StepRecord {
                from: from.to_owned(),
                event: event.name().to_owned(),
                to: to.to_owned(),
                actions,
            }),
        );
        self.check_link(m, now, covered)
    }

    fn check_link(&mut self, m: &mut Mobile<'_>, now: Millis, covered: &BTreeSet<&str>) -> Result<(), ScenarioError> {
        let lost = m.attached.as_ref().is_some_and(|a| !covered.contains(a.as_str()));
        if lost && !m.link_lost_sent {
            m.link_lost_sent = true;
            self.deliver(m, Event::CurrentLinkLost, now, covered)?;
        }
        Ok(())
    }
}

/// Validates and runs a scenario.
pub fn run(scenario: &Scenario) -> Result<Trace, ScenarioError> {
    run_prepared(&scenario.prepare()?)
}

pub fn run_prepared(prepared: &Prepared) -> Result<Trace, ScenarioError> {
    let sc = &prepared.scenario;
    let mut terminals: Vec<&TerminalSpec> = sc.terminals.iter().collect();
    terminals.sort_by(|a, b| a.id.cmp(&b.id));
    let mut world = World {
        prepared,
        trace: Trace::default(),
    };
    world.trace.push(
        0,
        GLOBAL,
        TraceBody::Scenario(ScenarioHeader {
            duration_ms: sc.duration_ms,
            tick_ms: sc.tick_ms,
            seed: sc.seed,
            controller: sc.controller.clone(),
            terminals: terminals.iter().map(|t| t.id.clone()).collect(),
            passthrough: sc.passthrough.clone(),
        }),
    );
    let mut mobiles: Vec<Mobile> = terminals
        .iter()
        .map(|spec| Mobile {
            spec,
            hce: Hce::new(&spec.id, &spec.app_type, &spec.mobility),
            attached: None,
            link_lost_sent: false,
            timers: EventQueue::default(),
        })
        .collect();
    for m in &mobiles {
        world.trace.push(
            0,
            &m.spec.id,
            TraceBody::Terminal(TerminalInit {
                app_type: m.spec.app_type.clone(),
                mobility: m.spec.mobility.clone(),
                battery: m.spec.battery,
                position: advance_position(&m.spec.path, 0),
            }),
        );
    }

    let mut synth = Synthesizer::new(&sc.synthesis, sc.seed);
    for t in (0..sc.duration_ms).step_by(sc.tick_ms as usize) {
        synth.advance(t);
        for m in &mut mobiles {
            let pos = advance_position(&m.spec.path, t);
            let coverage = sc.topology.coverage(pos);
            let covered: BTreeSet<&str> = coverage.iter().map(|(s, _)| s.id.as_str()).collect();
            world.check_link(m, t, &covered)?;

            let mut scores = Vec::with_capacity(coverage.len());
            for (bs, rss) in &coverage {
                let mut v = synth.sample(&bs.id, t);
                v.entries.insert(RSS.to_owned(), dbm_to_mw(*rss));
                scores.push(
                    desirability(bs.id.as_str(), &v, &prepared.profile)
                        .map_err(|e| ScenarioError::Runtime(format!("{} at {t} ms: {e}", bs.id)))?,
                );
            }
            let anl = rank(scores, t).map_err(|e| ScenarioError::Runtime(e.to_string()))?;
            world.trace.push(
                t,
                &m.spec.id,
                TraceBody::Anl(AnlRecord {
                    position: pos,
                    anl: anl.clone(),
                }),
            );
            world.deliver(m, Event::AnlUpdated(anl.clone()), t, &covered)?;
            while let Some((_, ev)) = m.timers.pop_due(t) {
                world.deliver(m, ev.event(), t, &covered)?;
            }

            let uf = m.attached.as_ref().and_then(|a| anl.score_of(a));
            world.trace.push(
                t,
                &m.spec.id,
                TraceBody::Tick(TickRecord {
                    state: m.hce.state().name().to_owned(),
                    attached: m.attached.clone(),
                    uf,
                    best: m.attached.as_ref().map(|a| anl.is_best(a)),
                }),
            );
        }
    }
    Ok(world.trace)
}
