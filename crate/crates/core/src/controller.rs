//! Handoff control entity (HCE): the five-state handoff controller.
//!
//! States are Disconnection, Initiation, Preparation, Execution and
//! Evaluation. The controller consumes ANL updates, link-loss notices, switch
//! completions and timer expiries, and answers with actions for the engine
//! (connect, start a switch, schedule a timer, record a finished handoff).
//! Once in Execution there is no way back except through Evaluation.
//!
//! Transition table (`U` is the desirability of a network in the latest ANL):
//!
//! | state         | event                 | next                                    |
//! |---------------|-----------------------|-----------------------------------------|
//! | Disconnection | ANL nonempty          | Initiation, `Connect(head)`             |
//! | Disconnection | ANL empty             | Disconnection                           |
//! | Initiation    | ANL, prepare-entry    | Preparation (then trigger check)        |
//! | Initiation    | link lost             | Disconnection                           |
//! | Preparation   | ANL, serving best and no prepare-entry | Initiation (rollback)  |
//! | Preparation   | ANL, reason ∧ SuffB ∧ ConB ∧ Δ_PREP elapsed | Execution, `StartSwitch` |
//! | Preparation   | link lost             | Disconnection                           |
//! | Execution     | ANL / link lost       | Execution (no rollback)                 |
//! | Execution     | switch complete       | Evaluation, `Connect(target)`, eval timer |
//! | Evaluation    | ANL                   | Evaluation                              |
//! | Evaluation    | eval timer            | Initiation, `RecordHandoff`             |
//! | Evaluation    | link lost             | Disconnection, `RecordHandoff(rejected)`|
//!
//! Any other pair is an [`ControllerError::IllegalEvent`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{GoalSpec, Lookup, MetricLookup};
use crate::desirability::{AvailableNetworkList, NetworkId};
use crate::metrics::{HandoffRecord, Outcome, RejectReason};
use crate::taxonomy::{HandoffType, Layer};
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Proactive,
    Reactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandoffReason {
    Imperative,
    Opportunist,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("event {event} is not defined in state {state}")]
    IllegalEvent { state: &'static str, event: &'static str },
    #[error("proactive prediction needs at least two samples per series")]
    InsufficientSamples,
    #[error("method policy has no entry for {0}")]
    PolicyGap(String),
    #[error("no handoff type known for {from} -> {to}")]
    UnknownTransition { from: NetworkId, to: NetworkId },
    #[error("controller.{field}: {rule}")]
    InvalidConfig { field: &'static str, rule: &'static str },
}

fn default_app_timeout() -> Millis {
    1000
}

fn default_tardy_tolerance() -> Millis {
    1000
}

fn default_strategy() -> Strategy {
    Strategy::Reactive
}

/// Tunables of one controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Hysteresis margin Δ.
    pub hysteresis_delta: f64,
    pub th_sup: f64,
    pub th_inf: f64,
    /// Dwell timer SP.
    #[serde(default)]
    pub dwell_sp_ms: Millis,
    #[serde(default)]
    pub prep_latency_ms: Millis,
    #[serde(default)]
    pub exec_latency_ms: Millis,
    #[serde(default)]
    pub eval_latency_ms: Millis,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_app_timeout")]
    pub app_timeout_ms: Millis,
    /// Use the target's utility instead of the serving one in the
    /// opportunist test.
    #[serde(default)]
    pub opportunist_on_target: bool,
    /// How long the serving utility may sit below Thinf before a trigger
    /// counts as tardy.
    #[serde(default = "default_tardy_tolerance")]
    pub tardy_tolerance_ms: Millis,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            hysteresis_delta: 0.5,
            th_sup: 8.0,
            th_inf: 2.0,
            dwell_sp_ms: 0,
            prep_latency_ms: 0,
            exec_latency_ms: 0,
            eval_latency_ms: 0,
            strategy: Strategy::Reactive,
            app_timeout_ms: default_app_timeout(),
            opportunist_on_target: false,
            tardy_tolerance_ms: default_tardy_tolerance(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let bad = |field, rule| Err(ControllerError::InvalidConfig { field, rule });
        if !(self.hysteresis_delta.is_finite() && self.hysteresis_delta >= 0.0) {
            return bad("hysteresis_delta", "hysteresis_delta >= 0");
        }
        if !(self.th_inf.is_finite() && self.th_sup.is_finite()) {
            return bad("th_inf", "thresholds must be finite");
        }
        if self.th_inf >= self.th_sup {
            return bad("th_inf", "th_inf < th_sup");
        }
        Ok(())
    }
}

/// Why, where, how, who and when of a committed handoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerPlan {
    pub why: HandoffReason,
    #[serde(rename = "where")]
    pub target: NetworkId,
    pub how: String,
    pub who: String,
    pub when: Millis,
    pub from: NetworkId,
    pub ho_type: HandoffType,
}

/// Tracks since when SuffB has held without interruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DwellTracker {
    pub since: Option<Millis>,
}

/// SuffB: `uf_target > uf_curr + delta`.
pub fn sufficiently_better(uf_target: f64, uf_curr: f64, delta: f64) -> bool {
    uf_target > uf_curr + delta
}

/// ConB: SuffB has held continuously for at least `sp` (inclusive).
pub fn consistently_better(tracker: DwellTracker, now: Millis, sp: Millis, suffb_now: bool) -> (DwellTracker, bool) {
    if !suffb_now {
        return (DwellTracker { since: None }, false);
    }
    let since = tracker.since.unwrap_or(now);
    (DwellTracker { since: Some(since) }, now.saturating_sub(since) >= sp)
}

pub fn handoff_reason(uf_curr: f64, cfg: &ControllerConfig, target_conb: bool) -> Option<HandoffReason> {
    if !target_conb {
        None
    } else if uf_curr < cfg.th_inf {
        Some(HandoffReason::Imperative)
    } else if uf_curr > cfg.th_sup {
        Some(HandoffReason::Opportunist)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: Millis,
    pub value: f64,
}

impl Sample {
    pub fn new(t: Millis, value: f64) -> Self {
        Self { t, value }
    }
}

fn line_through(series: &[Sample]) -> Result<(f64, f64, f64), ControllerError> {
    match series {
        [.., a, b] if b.t > a.t => Ok((b.t as f64, b.value, (b.value - a.value) / (b.t - a.t) as f64)),
        _ => Err(ControllerError::InsufficientSamples),
    }
}

/// Decides whether to start preparing a handoff from the serving network
/// (`curr`) towards `target`.
///
/// Reactive: the target has already overtaken the serving network. Proactive:
/// two-point linear extrapolation of both series predicts the crossing within
/// the preparation latency (or it already happened).
pub fn should_enter_preparation(
    curr: &[Sample],
    target: &[Sample],
    cfg: &ControllerConfig,
    now: Millis,
) -> Result<bool, ControllerError> {
    let (Some(c), Some(t)) = (curr.last(), target.last()) else {
        return Err(ControllerError::InsufficientSamples);
    };
    match cfg.strategy {
        Strategy::Reactive => Ok(t.value > c.value),
        Strategy::Proactive => {
            let (ct, cv, cs) = line_through(curr)?;
            let (tt, tv, ts) = line_through(target)?;
            if t.value > c.value {
                return Ok(true);
            }
            let now = now as f64;
            let gap_now = (tv + ts * (now - tt)) - (cv + cs * (now - ct));
            if gap_now > 0.0 {
                return Ok(true);
            }
            let closing = ts - cs;
            if closing <= 0.0 {
                return Ok(false);
            }
            let crossing = now - gap_now / closing;
            Ok(crossing <= now + cfg.prep_latency_ms as f64)
        }
    }
}

/// A method-selection rule. Unset `app_type`/`mobility` match anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRule {
    pub layer: Layer,
    #[serde(default)]
    pub app_type: Option<String>,
    #[serde(default)]
    pub mobility: Option<String>,
    pub method: String,
}

impl PolicyRule {
    fn matches(&self, layer: Layer, app: &str, mobility: &str) -> Option<u8> {
        if self.layer != layer {
            return None;
        }
        let app_ok = self.app_type.as_deref().is_none_or(|a| a == app);
        let mob_ok = self.mobility.as_deref().is_none_or(|m| m == mobility);
        (app_ok && mob_ok).then(|| self.app_type.is_some() as u8 * 2 + self.mobility.is_some() as u8)
    }
}

/// Table choosing a mobility method/protocol label per handoff layer,
/// application and mobility state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPolicy {
    #[serde(default)]
    pub rules: Vec<PolicyRule>,
    /// Fall back to the built-in labels when no rule matches.
    #[serde(default = "yes")]
    pub extend_defaults: bool,
}

fn yes() -> bool {
    true
}

impl Default for MethodPolicy {
    fn default() -> Self {
        Self {
            rules: Vec::new(),
            extend_defaults: true,
        }
    }
}

/// Built-in label per layer.
pub fn default_method(layer: Layer) -> &'static str {
    match layer {
        Layer::L1 | Layer::L2 => "MAHO",
        Layer::L3 => "MIP",
        Layer::L4To7 => "SIP",
    }
}

impl MethodPolicy {
    pub fn lookup(&self, layer: Layer, app_type: &str, mobility: &str) -> Result<String, ControllerError> {
        let mut best: Option<(u8, &PolicyRule)> = None;
        for rule in &self.rules {
            if let Some(score) = rule.matches(layer, app_type, mobility) {
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, rule));
                }
            }
        }
        match best {
            Some((_, r)) => Ok(r.method.clone()),
            None if self.extend_defaults => Ok(default_method(layer).to_owned()),
            None => Err(ControllerError::PolicyGap(format!("{layer}/{app_type}/{mobility}"))),
        }
    }

    /// Checks the table answers every combination of the given labels.
    pub fn check_total<'a>(
        &self,
        app_types: impl IntoIterator<Item = &'a str> + Clone,
        mobilities: impl IntoIterator<Item = &'a str> + Clone,
    ) -> Result<(), ControllerError> {
        for layer in Layer::ALL {
            for app in app_types.clone() {
                for mob in mobilities.clone() {
                    self.lookup(layer, app, mob)?;
                }
            }
        }
        Ok(())
    }
}

pub fn select_method(
    ho_type: &HandoffType,
    app_type: &str,
    mobility: &str,
    policy: &MethodPolicy,
) -> Result<String, ControllerError> {
    policy.lookup(ho_type.layer, app_type, mobility)
}

/// Measures taken around a handoff, keyed by metric id (`UF`, ...).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementSet(pub BTreeMap<String, f64>);

impl MeasurementSet {
    pub fn utility(uf: f64) -> Self {
        MeasurementSet(BTreeMap::from([(UF.to_owned(), uf)]))
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }
}

impl MetricLookup for MeasurementSet {
    fn lookup(&self, metric_id: &str) -> Lookup {
        match self.0.get(metric_id) {
            Some(v) => Lookup::Value(*v),
            None => Lookup::Undefined,
        }
    }
}

const UF: &str = "UF";

/// Accepts a finished handoff iff the new network is the best in the ANL and
/// every region holds on the post-handoff measures (plus `ImpR`, the ratio of
/// post to pre utility).
pub fn evaluate(
    pre: &MeasurementSet,
    post: &MeasurementSet,
    anl: &AvailableNetworkList,
    new_network: &NetworkId,
    regions: &[GoalSpec],
) -> Outcome {
    let mut reasons = Vec::new();
    if !anl.is_best(new_network) {
        reasons.push(RejectReason::NotBest);
    }
    let mut measures = post.clone();
    if let (Some(old), Some(new)) = (pre.get(UF), post.get(UF)) {
        measures.0.insert("ImpR".to_owned(), new / old);
    }
    for region in regions {
        let ok = match measures.lookup(&region.metric_id) {
            Lookup::Value(v) => region.direction.holds(v),
            _ => false,
        };
        if !ok {
            reasons.push(RejectReason::Metric(region.metric_id.clone()));
        }
    }
    if reasons.is_empty() {
        Outcome::Accepted
    } else {
        Outcome::Rejected(reasons)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state")]
pub enum ControllerState {
    Disconnection,
    Initiation {
        serving: NetworkId,
    },
    Preparation {
        serving: NetworkId,
        target: NetworkId,
        dwell: DwellTracker,
        reason: Option<HandoffReason>,
        entered_at: Millis,
    },
    Execution {
        serving: NetworkId,
        plan: TriggerPlan,
        prep_at: Millis,
        pre: MeasurementSet,
        switch_deadline: Millis,
    },
    Evaluation {
        serving: NetworkId,
        plan: TriggerPlan,
        prep_at: Millis,
        switch_done_at: Millis,
        pre: MeasurementSet,
        deadline: Millis,
    },
}

impl ControllerState {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerState::Disconnection => "Disconnection",
            ControllerState::Initiation { .. } => "Initiation",
            ControllerState::Preparation { .. } => "Preparation",
            ControllerState::Execution { .. } => "Execution",
            ControllerState::Evaluation { .. } => "Evaluation",
        }
    }

    /// The network the terminal is attached to. During Execution that is
    /// still the source network.
    pub fn attached(&self) -> Option<&NetworkId> {
        match self {
            ControllerState::Disconnection => None,
            ControllerState::Initiation { serving }
            | ControllerState::Preparation { serving, .. }
            | ControllerState::Execution { serving, .. }
            | ControllerState::Evaluation { serving, .. } => Some(serving),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimerKind {
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "anl")]
pub enum Event {
    AnlUpdated(AvailableNetworkList),
    CurrentLinkLost,
    SwitchComplete,
    TimerFired(TimerKind),
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::AnlUpdated(_) => "AnlUpdated",
            Event::CurrentLinkLost => "CurrentLinkLost",
            Event::SwitchComplete => "SwitchComplete",
            Event::TimerFired(_) => "TimerFired",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Connect { network: NetworkId },
    StartSwitch { plan: TriggerPlan },
    RecordHandoff { record: HandoffRecord },
    ScheduleTimer { kind: TimerKind, at: Millis },
}

/// Resolves the handoff type between two candidate networks.
pub trait HandoffDirectory {
    fn handoff_type(&self, from: &NetworkId, to: &NetworkId) -> Option<HandoffType>;
}

/// Answers the same type for every pair.
#[derive(Debug, Clone)]
pub struct FixedDirectory(pub HandoffType);

impl HandoffDirectory for FixedDirectory {
    fn handoff_type(&self, _from: &NetworkId, _to: &NetworkId) -> Option<HandoffType> {
        Some(self.0.clone())
    }
}

/// Everything `step` reads besides the controller itself.
pub struct StepContext<'a> {
    pub cfg: &'a ControllerConfig,
    pub policy: &'a MethodPolicy,
    pub directory: &'a dyn HandoffDirectory,
    /// Success regions checked at evaluation.
    pub regions: &'a [GoalSpec],
}

/// Samples kept per network for extrapolation.
const HISTORY: usize = 2;

/// One terminal's controller: FSM state plus the desirability history the
/// proactive predictor needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Hce {
    terminal: String,
    app_type: String,
    mobility: String,
    state: ControllerState,
    history: BTreeMap<NetworkId, Vec<Sample>>,
    last_anl: AvailableNetworkList,
}

impl Hce {
    pub fn new(terminal: &str, app_type: &str, mobility: &str) -> Self {
        Self {
            terminal: terminal.to_owned(),
            app_type: app_type.to_owned(),
            mobility: mobility.to_owned(),
            state: ControllerState::Disconnection,
            history: BTreeMap::new(),
            last_anl: AvailableNetworkList::empty(0),
        }
    }

    pub fn terminal(&self) -> &str {
        &self.terminal
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn last_anl(&self) -> &AvailableNetworkList {
        &self.last_anl
    }

    pub fn series(&self, network: &NetworkId) -> &[Sample] {
        self.history.get(network).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Applies `event` in place. On error the controller is left unchanged.
    pub fn apply(&mut self, event: &Event, ctx: &StepContext<'_>, now: Millis) -> Result<Vec<Action>, ControllerError> {
        let (next, actions) = step(self, event, ctx, now)?;
        *self = next;
        Ok(actions)
    }

    fn observe(&mut self, anl: &AvailableNetworkList, now: Millis) {
        self.history.retain(|id, _| anl.contains(id));
        for s in anl.entries() {
            let series = self.history.entry(s.network.clone()).or_default();
            series.push(Sample::new(now, s.value));
            if series.len() > HISTORY {
                series.remove(0);
            }
        }
        self.last_anl = anl.clone();
    }

    fn prepare_entry(&self, serving: &NetworkId, target: &NetworkId, cfg: &ControllerConfig, now: Millis) -> bool {
        // Too few samples for a prediction means no prediction.
        should_enter_preparation(self.series(serving), self.series(target), cfg, now).unwrap_or(false)
    }

    fn from_initiation(&mut self, serving: NetworkId, ctx: &StepContext<'_>, now: Millis) -> Result<Vec<Action>, ControllerError> {
        if !self.last_anl.contains(&serving) {
            return Ok(vec![]);
        }
        let Some(target) = self.last_anl.best_other(&serving).map(|s| s.network.clone()) else {
            return Ok(vec![]);
        };
        if !self.prepare_entry(&serving, &target, ctx.cfg, now) {
            return Ok(vec![]);
        }
        self.state = ControllerState::Preparation {
            serving,
            target,
            dwell: DwellTracker::default(),
            reason: None,
            entered_at: now,
        };
        self.in_preparation(ctx, now)
    }

    fn in_preparation(&mut self, ctx: &StepContext<'_>, now: Millis) -> Result<Vec<Action>, ControllerError> {
        let ControllerState::Preparation {
            serving,
            target,
            dwell,
            entered_at,
            ..
        } = self.state.clone()
        else {
            unreachable!("in_preparation outside Preparation");
        };
        let cfg = ctx.cfg;
        let Some(uf_curr) = self.last_anl.score_of(&serving) else {
            return Ok(vec![]);
        };
        let candidate = self.last_anl.best_other(&serving).map(|s| (s.network.clone(), s.value));
        let Some((cand, uf_target)) = candidate else {
            self.state = ControllerState::Initiation { serving };
            return Ok(vec![]);
        };
        if self.last_anl.is_best(&serving) && !self.prepare_entry(&serving, &cand, cfg, now) {
            self.state = ControllerState::Initiation { serving };
            return Ok(vec![]);
        }
        let dwell = if cand == target { dwell } else { DwellTracker::default() };
        let suffb = sufficiently_better(uf_target, uf_curr, cfg.hysteresis_delta);
        let (dwell, conb) = consistently_better(dwell, now, cfg.dwell_sp_ms, suffb);
        let uf_for_reason = if cfg.opportunist_on_target && uf_curr >= cfg.th_inf {
            uf_target
        } else {
            uf_curr
        };
        let reason = handoff_reason(uf_for_reason, cfg, suffb && conb);
        let prepared = now.saturating_sub(entered_at) >= cfg.prep_latency_ms;
        match reason {
            Some(why) if prepared => {
                let ho_type = ctx
                    .directory
                    .handoff_type(&serving, &cand)
                    .ok_or_else(|| ControllerError::UnknownTransition {
                        from: serving.clone(),
                        to: cand.clone(),
                    })?;
                let how = select_method(&ho_type, &self.app_type, &self.mobility, ctx.policy)?;
                let plan = TriggerPlan {
                    why,
                    target: cand,
                    how,
                    who: format!("hce:{}", self.terminal),
                    when: now,
                    from: serving.clone(),
                    ho_type,
                };
                self.state = ControllerState::Execution {
                    serving,
                    plan: plan.clone(),
                    prep_at: entered_at,
                    pre: MeasurementSet::utility(uf_curr),
                    switch_deadline: now + cfg.exec_latency_ms,
                };
                Ok(vec![Action::StartSwitch { plan }])
            }
            _ => {
                self.state = ControllerState::Preparation {
                    serving,
                    target: cand,
                    dwell,
                    reason,
                    entered_at,
                };
                Ok(vec![])
            }
        }
    }

    fn finish(&self, outcome: Outcome, state: &ControllerState, now: Millis) -> HandoffRecord {
        let ControllerState::Evaluation {
            serving,
            plan,
            prep_at,
            switch_done_at,
            pre,
            ..
        } = state
        else {
            unreachable!("finish outside Evaluation");
        };
        HandoffRecord {
            terminal: self.terminal.clone(),
            t_prep: *prep_at,
            t_trigger: plan.when,
            t_switch_done: *switch_done_at,
            t_eval_done: now,
            reason: plan.why,
            ho_type: plan.ho_type.clone(),
            from: plan.from.clone(),
            to: serving.clone(),
            uf_old: pre.get(UF).unwrap_or_default(),
            uf_new: self.last_anl.score_of(serving),
            outcome,
            vho_ms: now - prep_at,
        }
    }
}

/// Pure transition function: the successor controller and emitted actions.
pub fn step(hce: &Hce, event: &Event, ctx: &StepContext<'_>, now: Millis) -> Result<(Hce, Vec<Action>), ControllerError> {
    use ControllerState as S;
    let mut next = hce.clone();
    let illegal = || ControllerError::IllegalEvent {
        state: hce.state.name(),
        event: event.name(),
    };
    let actions = match (&hce.state, event) {
        (S::Disconnection, Event::AnlUpdated(anl)) => {
            next.observe(anl, now);
            match anl.best() {
                Some(best) => {
                    next.state = S::Initiation { serving: best.clone() };
                    vec![Action::Connect { network: best.clone() }]
                }
                None => vec![],
            }
        }
        (S::Initiation { serving }, Event::AnlUpdated(anl)) => {
            next.observe(anl, now);
            next.from_initiation(serving.clone(), ctx, now)?
        }
        (S::Preparation { .. }, Event::AnlUpdated(anl)) => {
            next.observe(anl, now);
            next.in_preparation(ctx, now)?
        }
        (S::Execution { .. } | S::Evaluation { .. }, Event::AnlUpdated(anl)) => {
            next.observe(anl, now);
            vec![]
        }
        (S::Initiation { .. } | S::Preparation { .. }, Event::CurrentLinkLost) => {
            next.state = S::Disconnection;
            vec![]
        }
        (S::Execution { .. }, Event::CurrentLinkLost) => vec![],
        (
            S::Execution {
                plan, prep_at, pre, ..
            },
            Event::SwitchComplete,
        ) => {
            let deadline = now + ctx.cfg.eval_latency_ms;
            next.state = S::Evaluation {
                serving: plan.target.clone(),
                plan: plan.clone(),
                prep_at: *prep_at,
                switch_done_at: now,
                pre: pre.clone(),
                deadline,
            };
            vec![
                Action::Connect {
                    network: plan.target.clone(),
                },
                Action::ScheduleTimer {
                    kind: TimerKind::Evaluation,
                    at: deadline,
                },
            ]
        }
        (S::Evaluation { serving, pre, .. }, Event::TimerFired(TimerKind::Evaluation)) => {
            let post = hce
                .last_anl
                .score_of(serving)
                .map(MeasurementSet::utility)
                .unwrap_or_default();
            let outcome = evaluate(pre, &post, &hce.last_anl, serving, ctx.regions);
            let record = hce.finish(outcome, &hce.state, now);
            next.state = S::Initiation { serving: serving.clone() };
            vec![Action::RecordHandoff { record }]
        }
        (S::Evaluation { .. }, Event::CurrentLinkLost) => {
            let record = hce.finish(Outcome::Rejected(vec![RejectReason::LinkLost]), &hce.state, now);
            next.state = S::Disconnection;
            vec![Action::RecordHandoff { record }]
        }
        _ => return Err(illegal()),
    };
    Ok((next, actions))
}
