//! Sweep grids: `delta=0,0.5;sp=0,100;strategy=proactive,reactive;th_sup=8;th_inf=2`.

use handoff_core::{ControllerConfig, Strategy};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Delta(f64),
    DwellSp(u64),
    Strategy(Strategy),
    ThSup(f64),
    ThInf(f64),
}

impl Param {
    pub fn key(&self) -> &'static str {
        match self {
            Param::Delta(_) => "delta",
            Param::DwellSp(_) => "sp",
            Param::Strategy(_) => "strategy",
            Param::ThSup(_) => "th_sup",
            Param::ThInf(_) => "th_inf",
        }
    }

    pub fn value(&self) -> String {
        match self {
            Param::Delta(x) | Param::ThSup(x) | Param::ThInf(x) => x.to_string(),
            Param::DwellSp(x) => x.to_string(),
            Param::Strategy(Strategy::Proactive) => "proactive".into(),
            Param::Strategy(Strategy::Reactive) => "reactive".into(),
        }
    }

    pub fn apply(&self, cfg: &mut ControllerConfig) {
        match *self {
            Param::Delta(x) => cfg.hysteresis_delta = x,
            Param::DwellSp(x) => cfg.dwell_sp_ms = x,
            Param::Strategy(s) => cfg.strategy = s,
            Param::ThSup(x) => cfg.th_sup = x,
            Param::ThInf(x) => cfg.th_inf = x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid entry `{0}` is not of the form key=v1,v2,...")]
    Syntax(String),
    #[error("unknown grid key `{0}` (expected delta, sp, strategy, th_sup or th_inf)")]
    UnknownKey(String),
    #[error("grid key `{0}` appears twice")]
    DuplicateKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("grid is empty")]
    Empty,
}

/// One axis per key, values in the order written.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<Param>>,
}

fn parse_value(key: &str, v: &str) -> Result<Param, GridError> {
    let bad = || GridError::BadValue {
        key: key.to_owned(),
        value: v.to_owned(),
    };
    let real = || v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    Ok(match key {
        "delta" => Param::Delta(real()?),
        "th_sup" => Param::ThSup(real()?),
        "th_inf" => Param::ThInf(real()?),
        "sp" => Param::DwellSp(v.parse().map_err(|_| bad())?),
        "strategy" => Param::Strategy(match v {
            "proactive" => Strategy::Proactive,
            "reactive" => Strategy::Reactive,
            _ => return Err(bad()),
        }),
        _ => return Err(GridError::UnknownKey(key.to_owned())),
    })
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Self, GridError> {
        let mut axes: Vec<Vec<Param>> = Vec::new();
        for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, values) = entry.split_once('=').ok_or_else(|| GridError::Syntax(entry.to_owned()))?;
            let key = key.trim();
            let axis = values
                .split(',')
                .map(|v| parse_value(key, v.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if axes.iter().any(|a| a[0].key() == axis[0].key()) {
                return Err(GridError::DuplicateKey(key.to_owned()));
            }
            axes.push(axis);
        }
        if axes.is_empty() {
            return Err(GridError::Empty);
        }
        Ok(Self { axes })
    }

    pub fn keys(&self) -> Vec<&'static str> {
        self.axes.iter().map(|a| a[0].key()).collect()
    }

    /// Cartesian product; the last axis varies fastest.
    pub fn points(&self) -> Vec<Vec<Param>> {
        self.axes.iter().fold(vec![vec![]], |acc, axis| {
            acc.iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |p| {
                        let mut next = prefix.clone();
                        next.push(*p);
                        next
                    })
                })
                .collect()
        })
    }
}
