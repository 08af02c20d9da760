//! Handoff-performance metrics computed from a run trace.
//!
//! Rates are per second of horizon, latencies are means in milliseconds.
//! Metrics nothing in the model generates (call blocking, call dropping,
//! handoff blocking) are always absent. Security and OUIR figures are copied
//! from the scenario.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{Lookup, MetricLookup};
use crate::controller::{Action, HandoffReason};
use crate::desirability::NetworkId;
use crate::simulator::trace::{Trace, TraceBody};
use crate::taxonomy::HandoffType;
use crate::Millis;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    NotBest,
    LinkLost,
    /// A success region on this metric was violated.
    Metric(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NotBest => f.write_str("NotBest"),
            RejectReason::LinkLost => f.write_str("LinkLost"),
            RejectReason::Metric(m) => f.write_str(m),
        }
    }
}

impl From<String> for RejectReason {
    fn from(s: String) -> Self {
        match s.as_str() {
            "NotBest" => RejectReason::NotBest,
            "LinkLost" => RejectReason::LinkLost,
            _ => RejectReason::Metric(s),
        }
    }
}

impl Serialize for RejectReason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RejectReason {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(RejectReason::from)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reasons", rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Rejected(Vec<RejectReason>),
}

/// One completed handoff, from Preparation entry to the end of Evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoffRecord {
    pub terminal: String,
    pub t_prep: Millis,
    pub t_trigger: Millis,
    pub t_switch_done: Millis,
    pub t_eval_done: Millis,
    pub reason: HandoffReason,
    pub ho_type: HandoffType,
    pub from: NetworkId,
    pub to: NetworkId,
    pub uf_old: f64,
    pub uf_new: Option<f64>,
    pub outcome: Outcome,
    /// Whole Preparation-to-Evaluation span.
    pub vho_ms: Millis,
}

impl HandoffRecord {
    pub fn is_ordered(&self) -> bool {
        self.t_prep <= self.t_trigger && self.t_trigger <= self.t_switch_done && self.t_switch_done <= self.t_eval_done
    }
}

pub fn handoff_success(rec: &HandoffRecord) -> bool {
    rec.outcome == Outcome::Accepted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timeliness {
    Timely,
    Tardy,
    Premature,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

fn malformed(msg: impl Into<String>) -> MetricsError {
    MetricsError::MalformedTrace(msg.into())
}

/// Serving-network utility at the end of each tick: `(t, uf)`.
pub type UtilitySeries = [(Millis, Option<f64>)];

/// How long the serving utility had been below `th_inf` without a break when
/// the handoff was triggered.
fn below_run_before(series: &UtilitySeries, t_trigger: Millis, th_inf: f64) -> Millis {
    let mut start = None;
    for &(t, uf) in series.iter().take_while(|(t, _)| *t <= t_trigger) {
        match uf {
            Some(v) if v < th_inf => {
                start.get_or_insert(t);
            }
            _ => start = None,
        }
    }
    start.map_or(0, |s| t_trigger - s)
}

/// Tardy when the serving utility sat below `th_inf` for longer than the
/// tolerance before the trigger; otherwise premature when the new network was
/// not the best at evaluation; otherwise timely.
pub fn classify_with_series(rec: &HandoffRecord, series: &UtilitySeries, th_inf: f64, tolerance_ms: Millis) -> Timeliness {
    if below_run_before(series, rec.t_trigger, th_inf) > tolerance_ms {
        Timeliness::Tardy
    } else if matches!(&rec.outcome, Outcome::Rejected(r) if r.contains(&RejectReason::NotBest)) {
        Timeliness::Premature
    } else {
        Timeliness::Timely
    }
}

pub fn classify_timeliness(rec: &HandoffRecord, trace: &Trace, tolerance_ms: Millis) -> Result<Timeliness, MetricsError> {
    let header = trace.header().ok_or_else(|| malformed("no scenario record"))?;
    let series: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.terminal == rec.terminal)
        .filter_map(|r| match &r.body {
            TraceBody::Tick(k) => Some((r.t, k.uf)),
            _ => None,
        })
        .collect();
    Ok(classify_with_series(rec, &series, header.controller.th_inf, tolerance_ms))
}

/// Raw tallies behind a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub completed: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub imperative: u64,
    pub opportunist: u64,
    pub tardy: u64,
    pub premature: u64,
    pub timely: u64,
    pub connects: u64,
    pub disconnections: u64,
    pub interruptions: u64,
    pub degradations: u64,
    pub ticks: u64,
    pub attached_ticks: u64,
    pub best_ticks: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    counts: Counts,
    il_sum: f64,
    hol_sum: f64,
    dlat_sum: f64,
    exlat_sum: f64,
    evlat_sum: f64,
    impr_sum: f64,
    impr_n: u64,
    degraded_ms: f64,
    etslh_sum: f64,
    etslh_n: u64,
}

impl Accumulator {
    fn merge(&mut self, o: &Accumulator) {
        let c = &mut self.counts;
        let d = &o.counts;
        c.completed += d.completed;
        c.accepted += d.accepted;
        c.rejected += d.rejected;
        c.imperative += d.imperative;
        c.opportunist += d.opportunist;
        c.tardy += d.tardy;
        c.premature += d.premature;
        c.timely += d.timely;
        c.connects += d.connects;
        c.disconnections += d.disconnections;
        c.interruptions += d.interruptions;
        c.degradations += d.degradations;
        c.ticks += d.ticks;
        c.attached_ticks += d.attached_ticks;
        c.best_ticks += d.best_ticks;
        self.il_sum += o.il_sum;
        self.hol_sum += o.hol_sum;
        self.dlat_sum += o.dlat_sum;
        self.exlat_sum += o.exlat_sum;
        self.evlat_sum += o.evlat_sum;
        self.impr_sum += o.impr_sum;
        self.impr_n += o.impr_n;
        self.degraded_ms += o.degraded_ms;
        self.etslh_sum += o.etslh_sum;
        self.etslh_n += o.etslh_n;
    }

    fn snapshot(&self, horizon_ms: Millis, passthrough: &BTreeMap<String, f64>) -> MetricSnapshot {
        let c = self.counts;
        let secs = horizon_ms as f64 / 1000.0;
        let rate = |n: u64| if horizon_ms == 0 { 0.0 } else { n as f64 / secs };
        let mean = |sum: f64, n: u64| (n > 0).then(|| sum / n as f64);
        let ihor = rate(c.imperative);
        let ohor = rate(c.opportunist);
        let pass = |k: &str| passthrough.get(k).copied();
        MetricSnapshot {
            hor: ihor + ohor,
            shor: if c.completed == 0 { 0.0 } else { c.accepted as f64 / c.completed as f64 },
            shor_undefined: c.completed == 0,
            ihor,
            ohor,
            thor: rate(c.tardy),
            phor: rate(c.premature),
            dtib: (c.attached_ticks > 0).then(|| c.best_ticks as f64 / c.attached_ticks as f64),
            il: mean(self.il_sum, c.completed),
            ir: rate(c.interruptions),
            hol: mean(self.hol_sum, c.completed),
            dlat: mean(self.dlat_sum, c.completed),
            exlat: mean(self.exlat_sum, c.completed),
            evlat: mean(self.evlat_sum, c.completed),
            impr: mean(self.impr_sum, self.impr_n),
            dr: rate(c.degradations),
            dl: mean(self.degraded_ms, c.degradations),
            etslh: mean(self.etslh_sum, self.etslh_n),
            al: pass("AL"),
            sso: pass("SSO"),
            dar: pass("DAR"),
            ouir: pass("OUIR"),
            cb: None,
            cd: None,
            hob: None,
            counts: c,
        }
    }
}

/// The handoff-performance context of one terminal or of a whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub hor: f64,
    pub shor: f64,
    /// Set when no handoff completed; `shor` is then 0 by convention.
    pub shor_undefined: bool,
    pub ihor: f64,
    pub ohor: f64,
    pub thor: f64,
    pub phor: f64,
    pub dtib: Option<f64>,
    pub il: Option<f64>,
    pub ir: f64,
    pub hol: Option<f64>,
    pub dlat: Option<f64>,
    pub exlat: Option<f64>,
    pub evlat: Option<f64>,
    pub impr: Option<f64>,
    pub dr: f64,
    pub dl: Option<f64>,
    pub etslh: Option<f64>,
    pub al: Option<f64>,
    pub sso: Option<f64>,
    pub dar: Option<f64>,
    pub ouir: Option<f64>,
    pub cb: Option<f64>,
    pub cd: Option<f64>,
    pub hob: Option<f64>,
    pub counts: Counts,
}

/// Metric columns of the CSV report, in order.
pub const METRIC_COLUMNS: [&str; 25] = [
    "HOR", "SHOR", "SHOR_undefined", "IHOR", "OHOR", "THOR", "PHOR", "DTIB", "IL", "IR", "HOL", "DLat", "ExLat", "EvLat",
    "ImpR", "DR", "DL", "ETSLH", "AL", "SSO", "DAR", "OUIR", "CB", "CD", "HOB",
];

/// Count columns of the CSV report, in order.
pub const COUNT_COLUMNS: [&str; 11] = [
    "completed",
    "accepted",
    "rejected",
    "imperative",
    "opportunist",
    "tardy",
    "premature",
    "timely",
    "connects",
    "disconnections",
    "interruptions",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricSnapshot {
    pub fn get(&self, id: &str) -> Option<Option<f64>> {
        let v = match id {
            "HOR" => Some(self.hor),
            "SHOR" => (!self.shor_undefined).then_some(self.shor),
            "IHOR" => Some(self.ihor),
            "OHOR" => Some(self.ohor),
            "THOR" => Some(self.thor),
            "PHOR" => Some(self.phor),
            "DTIB" => self.dtib,
            "IL" => self.il,
            "IR" => Some(self.ir),
            "HOL" => self.hol,
            "DLat" => self.dlat,
            "ExLat" => self.exlat,
            "EvLat" => self.evlat,
            "ImpR" => self.impr,
            "DR" => Some(self.dr),
            "DL" => self.dl,
            "ETSLH" => self.etslh,
            "AL" => self.al,
            "SSO" => self.sso,
            "DAR" => self.dar,
            "OUIR" => self.ouir,
            "CB" => self.cb,
            "CD" => self.cd,
            "HOB" => self.hob,
            _ => return None,
        };
        Some(v)
    }

    /// Values for [`METRIC_COLUMNS`] then [`COUNT_COLUMNS`]; absent metrics are
    /// empty strings.
    pub fn csv_cells(&self) -> Vec<String> {
        let mut out: Vec<String> = METRIC_COLUMNS
            .iter()
            .map(|id| match *id {
                "SHOR" => self.shor.to_string(),
                "SHOR_undefined" => self.shor_undefined.to_string(),
                _ => cell(self.get(id).flatten()),
            })
            .collect();
        let c = self.counts;
        out.extend(
            [
                c.completed,
                c.accepted,
                c.rejected,
                c.imperative,
                c.opportunist,
                c.tardy,
                c.premature,
                c.timely,
                c.connects,
                c.disconnections,
                c.interruptions,
            ]
            .map(|n| n.to_string()),
        );
        out
    }
}

impl MetricLookup for MetricSnapshot {
    fn lookup(&self, metric_id: &str) -> Lookup {
        match self.get(metric_id) {
            Some(Some(v)) => Lookup::Value(v),
            Some(None) => Lookup::Undefined,
            None => Lookup::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoffSummary {
    pub record: HandoffRecord,
    pub timeliness: Timeliness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub horizon_ms: Millis,
    pub terminals: BTreeMap<String, MetricSnapshot>,
    pub aggregate: MetricSnapshot,
    pub handoffs: Vec<HandoffSummary>,
}

/// Scope column value of the aggregate CSV row.
pub const AGGREGATE: &str = "*";

impl MetricsReport {
    /// One row per terminal plus the aggregate row (`scope = *`).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["scope"];
        header.extend(METRIC_COLUMNS);
        header.extend(COUNT_COLUMNS);
        w.write_record(&header).expect("in-memory write");
        let rows = self
            .terminals
            .iter()
            .map(|(id, s)| (id.as_str(), s))
            .chain(std::iter::once((AGGREGATE, &self.aggregate)));
        for (scope, snap) in rows {
            let mut row = vec![scope.to_owned()];
            row.extend(snap.csv_cells());
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Default)]
struct TerminalWalk {
    acc: Accumulator,
    series: Vec<(Millis, Option<f64>)>,
    records: Vec<HandoffRecord>,
    was_below: bool,
    ever_attached: bool,
}

/// Computes per-terminal and aggregate metrics over `[0, horizon_ms)`.
pub fn compute_metrics(trace: &Trace, horizon_ms: Millis) -> Result<MetricsReport, MetricsError> {
    let header = trace.header().ok_or_else(|| malformed("no scenario record"))?;
    let th_inf = header.controller.th_inf;
    let tolerance = header.controller.tardy_tolerance_ms;
    let tick = header.tick_ms;
    let mut walks: BTreeMap<String, TerminalWalk> = header
        .terminals
        .iter()
        .map(|t| (t.clone(), TerminalWalk::default()))
        .collect();
    let mut last_t = 0;
    for (i, r) in trace.records.iter().enumerate() {
        if r.t < last_t {
            return Err(malformed(format!("record {i} goes back in time")));
        }
        last_t = r.t;
        if matches!(r.body, TraceBody::Scenario(_)) {
            continue;
        }
        let walk = walks
            .get_mut(&r.terminal)
            .ok_or_else(|| malformed(format!("record {i} names unknown terminal {}", r.terminal)))?;
        match &r.body {
            TraceBody::Step(s) => {
                if s.to == "Disconnection" && s.from != "Disconnection" {
                    walk.acc.counts.disconnections += 1;
                    walk.acc.counts.interruptions += 1;
                }
                for a in &s.actions {
                    match a {
                        Action::Connect { .. } => walk.acc.counts.connects += 1,
                        Action::RecordHandoff { record } => {
                            if !record.is_ordered() {
                                return Err(malformed(format!("record {i} has out-of-order handoff times")));
                            }
                            walk.records.push(record.clone());
                        }
                        _ => {}
                    }
                }
            }
            TraceBody::Tick(k) if r.t < horizon_ms => {
                let c = &mut walk.acc.counts;
                c.ticks += 1;
                if k.attached.is_some() {
                    c.attached_ticks += 1;
                    walk.ever_attached = true;
                    if k.best == Some(true) {
                        c.best_ticks += 1;
                    }
                }
                let below = matches!(k.uf, Some(v) if v < th_inf);
                if below {
                    if !walk.was_below {
                        c.degradations += 1;
                    }
                    walk.acc.degraded_ms += tick as f64;
                }
                walk.was_below = below;
                walk.series.push((r.t, k.uf));
            }
            _ => {}
        }
    }

    let mut handoffs = Vec::new();
    let mut terminals = BTreeMap::new();
    let mut total = Accumulator::default();
    for (id, mut walk) in walks {
        for rec in walk.records {
            let acc = &mut walk.acc;
            acc.counts.completed += 1;
            match rec.reason {
                HandoffReason::Imperative => acc.counts.imperative += 1,
                HandoffReason::Opportunist => acc.counts.opportunist += 1,
            }
            if handoff_success(&rec) {
                acc.counts.accepted += 1;
                if let Some(new) = rec.uf_new {
                    acc.impr_sum += new / rec.uf_old;
                    acc.impr_n += 1;
                }
            } else {
                acc.counts.rejected += 1;
            }
            if rec.t_switch_done > rec.t_trigger {
                acc.counts.interruptions += 1;
            }
            acc.il_sum += (rec.t_switch_done - rec.t_trigger) as f64;
            acc.hol_sum += (rec.t_eval_done - rec.t_prep) as f64;
            acc.dlat_sum += (rec.t_trigger - rec.t_prep) as f64;
            acc.exlat_sum += (rec.t_switch_done - rec.t_trigger) as f64;
            acc.evlat_sum += (rec.t_eval_done - rec.t_switch_done) as f64;
            let timeliness = classify_with_series(&rec, &walk.series, th_inf, tolerance);
            match timeliness {
                Timeliness::Tardy => acc.counts.tardy += 1,
                Timeliness::Premature => acc.counts.premature += 1,
                Timeliness::Timely => acc.counts.timely += 1,
            }
            handoffs.push(HandoffSummary { record: rec, timeliness });
        }
        if let Some(last) = handoffs.iter().rev().find(|h| h.record.terminal == id) {
            walk.acc.etslh_sum = horizon_ms.saturating_sub(last.record.t_eval_done) as f64;
            walk.acc.etslh_n = 1;
        }
        total.merge(&walk.acc);
        terminals.insert(id, walk.acc.snapshot(horizon_ms, &header.passthrough));
    }
    handoffs.sort_by(|a, b| (a.record.t_eval_done, &a.record.terminal).cmp(&(b.record.t_eval_done, &b.record.terminal)));
    Ok(MetricsReport {
        horizon_ms,
        terminals,
        aggregate: total.snapshot(horizon_ms, &header.passthrough),
        handoffs,
    })
}

/// Fraction of attached ticks spent on the ANL head, over all terminals.
/// `None` when nobody was ever attached.
pub fn dtib(trace: &Trace) -> Option<f64> {
    let (mut attached, mut best) = (0u64, 0u64);
    for r in &trace.records {
        if let TraceBody::Tick(k) = &r.body {
            if k.attached.is_some() {
                attached += 1;
                best += (k.best == Some(true)) as u64;
            }
        }
    }
    (attached > 0).then(|| best as f64 / attached as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControllerConfig;
    use crate::simulator::trace::{ScenarioHeader, StepRecord, TickRecord};
    use crate::taxonomy::enumerate_types;

    fn record(terminal: &str, t_trigger: Millis, reason: HandoffReason, outcome: Outcome) -> HandoffRecord {
        HandoffRecord {
            terminal: terminal.into(),
            t_prep: t_trigger,
            t_trigger,
            t_switch_done: t_trigger,
            t_eval_done: t_trigger,
            reason,
            ho_type: enumerate_types()[0].clone(),
            from: "n1".into(),
            to: "n2".into(),
            uf_old: 2.0,
            uf_new: Some(4.0),
            outcome,
            vho_ms: 0,
        }
    }

    fn header(duration_ms: Millis) -> TraceBody {
        TraceBody::Scenario(ScenarioHeader {
            duration_ms,
            tick_ms: 1000,
            seed: 0,
            controller: ControllerConfig {
                th_inf: 1.0,
                th_sup: 5.0,
                tardy_tolerance_ms: 50,
                ..ControllerConfig::default()
            },
            terminals: vec!["mt".into()],
            passthrough: BTreeMap::from([("AL".into(), 0.25)]),
        })
    }

    fn tick(attached: bool, best: bool, uf: f64) -> TraceBody {
        TraceBody::Tick(TickRecord {
            state: "Initiation".into(),
            attached: attached.then(|| "n1".into()),
            uf: attached.then_some(uf),
            best: attached.then_some(best),
        })
    }

    fn handoff_step(rec: HandoffRecord) -> TraceBody {
        TraceBody::Step(StepRecord {
            from: "Evaluation".into(),
            event: "TimerFired".into(),
            to: "Initiation".into(),
            actions: vec![Action::RecordHandoff { record: rec }],
        })
    }

    #[test]
    fn two_completed_one_accepted_over_ten_seconds() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(10_000));
        tr.push(2000, "mt", handoff_step(record("mt", 2000, HandoffReason::Opportunist, Outcome::Accepted)));
        tr.push(
            5000,
            "mt",
            handoff_step(record(
                "mt",
                5000,
                HandoffReason::Imperative,
                Outcome::Rejected(vec![RejectReason::Metric("ImpR".into())]),
            )),
        );
        let rep = compute_metrics(&tr, 10_000).unwrap();
        let s = &rep.aggregate;
        assert_eq!(s.hor, 0.2);
        assert_eq!(s.shor, 0.5);
        assert!(!s.shor_undefined);
        assert_eq!(s.ihor + s.ohor, s.hor);
        assert_eq!(s.impr, Some(2.0));
        assert_eq!(s.etslh, Some(5000.0));
        assert_eq!(s.al, Some(0.25));
        assert_eq!(s.cb, None);
        assert_eq!(s.counts.completed, 2);
    }

    #[test]
    fn zero_handoffs_flags_shor() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(2000));
        tr.push(0, "mt", tick(true, true, 3.0));
        tr.push(1000, "mt", tick(true, true, 3.0));
        let s = compute_metrics(&tr, 2000).unwrap().aggregate;
        assert_eq!(s.hor, 0.0);
        assert_eq!(s.shor, 0.0);
        assert!(s.shor_undefined);
        assert_eq!(s.lookup("SHOR"), Lookup::Undefined);
        assert_eq!(s.dtib, Some(1.0));
    }

    #[test]
    fn dtib_six_of_ten() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(12_000));
        for i in 0..12 {
            tr.push(i * 1000, "mt", tick(i < 10, i < 6, 3.0));
        }
        assert_eq!(dtib(&tr), Some(0.6));
        assert_eq!(compute_metrics(&tr, 12_000).unwrap().aggregate.dtib, Some(0.6));
    }

    #[test]
    fn dtib_never_attached_is_undefined() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(1000));
        tr.push(0, "mt", tick(false, false, 0.0));
        assert_eq!(dtib(&tr), None);
    }

    #[test]
    fn timeliness_rules() {
        let th_inf = 1.0;
        let rec = record("mt", 1000, HandoffReason::Imperative, Outcome::Accepted);
        // UF fell below at 995 ms, trigger at 1000 ms.
        let early: Vec<_> = [(990, Some(2.0)), (995, Some(0.5)), (1000, Some(0.5))].into();
        assert_eq!(classify_with_series(&rec, &early, th_inf, 50), Timeliness::Timely);
        let late: Vec<_> = [(400, Some(2.0)), (500, Some(0.5)), (1000, Some(0.5))].into();
        assert_eq!(classify_with_series(&rec, &late, th_inf, 50), Timeliness::Tardy);
        let nb = record("mt", 1000, HandoffReason::Opportunist, Outcome::Rejected(vec![RejectReason::NotBest]));
        assert_eq!(classify_with_series(&nb, &early, th_inf, 50), Timeliness::Premature);
    }

    #[test]
    fn success_keeps_reasons() {
        assert!(handoff_success(&record("mt", 0, HandoffReason::Imperative, Outcome::Accepted)));
        let both = Outcome::Rejected(vec![RejectReason::NotBest, RejectReason::Metric("ImpR".into())]);
        let r = record("mt", 0, HandoffReason::Imperative, both.clone());
        assert!(!handoff_success(&r));
        assert_eq!(r.outcome, both);
    }

    #[test]
    fn degradation_episodes() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(6000));
        for (i, uf) in [3.0, 0.5, 0.5, 3.0, 0.5, 3.0].into_iter().enumerate() {
            tr.push(i as u64 * 1000, "mt", tick(true, true, uf));
        }
        let s = compute_metrics(&tr, 6000).unwrap().aggregate;
        assert_eq!(s.counts.degradations, 2);
        assert_eq!(s.dl, Some(1500.0));
        assert_eq!(s.dr, 2.0 / 6.0);
    }

    #[test]
    fn csv_has_fixed_columns_and_empty_absent_cells() {
        let mut tr = Trace::default();
        tr.push(0, "*", header(1000));
        let csv = compute_metrics(&tr, 1000).unwrap().to_csv();
        let mut lines = csv.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("scope,HOR,SHOR,SHOR_undefined,IHOR,OHOR"));
        let row = lines.nth(1).unwrap();
        assert!(row.starts_with("*,0,0,true,0,0"));
        assert!(row.contains(",,"));
    }

    #[test]
    fn time_going_backwards_is_rejected() {
        let mut tr = Trace::default();
        tr.push(5, "*", header(1000));
        tr.push(0, "mt", tick(true, true, 1.0));
        assert!(compute_metrics(&tr, 1000).is_err());
    }

    #[test]
    fn reject_reason_serializes_as_plain_string() {
        let o = Outcome::Rejected(vec![RejectReason::NotBest, RejectReason::Metric("ImpR".into())]);
        let j = serde_json::to_string(&o).unwrap();
        assert_eq!(j, r#"{"verdict":"rejected","reasons":["NotBest","ImpR"]}"#);
        assert_eq!(serde_json::from_str::<Outcome>(&j).unwrap(), o);
    }
}
