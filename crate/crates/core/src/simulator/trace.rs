//! Append-only run log, serialized as JSON lines `{t, terminal, kind, payload}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::controller::{Action, ControllerConfig};
use crate::desirability::{AvailableNetworkList, NetworkId};
use crate::Millis;

/// Terminal id used by records that concern the whole run.
pub const GLOBAL: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioHeader {
    pub duration_ms: Millis,
    pub tick_ms: Millis,
    pub seed: u64,
    pub controller: ControllerConfig,
    pub terminals: Vec<String>,
    #[serde(default)]
    pub passthrough: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalInit {
    pub app_type: String,
    pub mobility: String,
    pub battery: f64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnlRecord {
    pub position: [f64; 2],
    pub anl: AvailableNetworkList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub from: String,
    pub event: String,
    pub to: String,
    pub actions: Vec<Action>,
}

/// End-of-tick occupancy of one terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub state: String,
    pub attached: Option<NetworkId>,
    /// Desirability of the attached network in this tick's ANL.
    pub uf: Option<f64>,
    /// Whether the attached network is (tied for) the ANL head.
    pub best: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum TraceBody {
    Scenario(ScenarioHeader),
    Terminal(TerminalInit),
    Anl(AnlRecord),
    Step(StepRecord),
    Tick(TickRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: Millis,
    pub terminal: String,
    #[serde(flatten)]
    pub body: TraceBody,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, t: Millis, terminal: &str, body: TraceBody) {
        self.records.push(TraceRecord {
            t,
            terminal: terminal.to_owned(),
            body,
        });
    }

    pub fn header(&self) -> Option<&ScenarioHeader> {
        self.records.iter().find_map(|r| match &r.body {
            TraceBody::Scenario(h) => Some(h),
            _ => None,
        })
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self, serde_json::Error> {
        let mut records = Vec::new();
        for line in r.lines() {
            let line = line.map_err(serde_json::Error::io)?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(Self { records })
    }
}
