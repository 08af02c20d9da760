//! Per-network context evolution: deterministic waveforms over a base vector,
//! optionally on top of a seeded AR(1) process.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::context::CriteriaVector;
use crate::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    Geometric,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `per_s · t`, with `t` in seconds.
    Ramp { per_s: f64 },
    /// `+amplitude` for the first half of each period, `-amplitude` after.
    Square {
        amplitude: f64,
        period_ms: Millis,
        #[serde(default)]
        phase_ms: Millis,
    },
    Sine {
        amplitude: f64,
        period_ms: Millis,
        #[serde(default)]
        phase_ms: Millis,
    },
    /// `amplitude` on `[start_ms, end_ms]`, zero elsewhere.
    Pulse { start_ms: Millis, end_ms: Millis, amplitude: f64 },
}

impl Shape {
    pub fn value(&self, t: Millis) -> f64 {
        match *self {
            Shape::Ramp { per_s } => per_s * t as f64 / 1000.0,
            Shape::Square {
                amplitude,
                period_ms,
                phase_ms,
            } => {
                if (t + phase_ms) % period_ms < period_ms.div_ceil(2) {
                    amplitude
                } else {
                    -amplitude
                }
            }
            Shape::Sine {
                amplitude,
                period_ms,
                phase_ms,
            } => amplitude * (TAU * ((t + phase_ms) % period_ms) as f64 / period_ms as f64).sin(),
            Shape::Pulse {
                start_ms,
                end_ms,
                amplitude,
            } => {
                if (start_ms..=end_ms).contains(&t) {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// A waveform added to one criterion of one network. With `log` set the
/// waveform is added to the base-10 logarithm of the value instead, i.e. the
/// value is multiplied by `10^w(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub network: String,
    pub criterion: String,
    #[serde(default)]
    pub log: bool,
    #[serde(flatten)]
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub mode: SynthesisMode,
    /// Base criteria values per network (station id).
    pub base: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub waves: Vec<Wave>,
    /// AR(1) coefficient ρ in `[0, 1)`.
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub sigma: f64,
    /// Starting values of the AR(1) process; defaults to the base.
    #[serde(default)]
    pub initial: BTreeMap<String, BTreeMap<String, f64>>,
}

impl SynthesisSpec {
    /// Constant base values, no waves.
    pub fn geometric(base: BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        Self {
            mode: SynthesisMode::Geometric,
            base,
            waves: Vec::new(),
            rho: 0.0,
            sigma: 0.0,
            initial: BTreeMap::new(),
        }
    }
}

/// Evolving context of every network in a scenario.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    spec: SynthesisSpec,
    rng: ChaCha8Rng,
    state: BTreeMap<String, BTreeMap<String, f64>>,
    started: bool,
}

impl Synthesizer {
    pub fn new(spec: &SynthesisSpec, seed: u64) -> Self {
        Self {
            spec: spec.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: BTreeMap::new(),
            started: false,
        }
    }

    /// Moves every network one tick forward to time `t`.
    pub fn advance(&mut self, _t: Millis) {
        let spec = &self.spec;
        if !self.started {
            self.started = true;
            self.state = spec
                .base
                .iter()
                .map(|(net, crit)| {
                    let init = spec.initial.get(net);
                    let values = crit
                        .iter()
                        .map(|(c, b)| (c.clone(), init.and_then(|i| i.get(c)).copied().unwrap_or(*b)))
                        .collect();
                    (net.clone(), values)
                })
                .collect();
            return;
        }
        if spec.mode == SynthesisMode::Geometric {
            return;
        }
        for (net, crit) in &mut self.state {
            for (c, x) in crit.iter_mut() {
                let base = spec.base[net][c];
                let eps: f64 = StandardNormal.sample(&mut self.rng);
                *x = base + spec.rho * (*x - base) + spec.sigma * eps;
            }
        }
    }

    /// Criteria of `network` at time `t` (the time last advanced to).
    pub fn sample(&self, network: &str, t: Millis) -> CriteriaVector {
        let mut v = CriteriaVector::new(t);
        let Some(values) = self.state.get(network) else {
            return v;
        };
        for (c, x) in values {
            let (mut lin, mut log) = (0.0, 0.0);
            for w in self.spec.waves.iter().filter(|w| w.network == network && &w.criterion == c) {
                if w.log {
                    log += w.shape.value(t);
                } else {
                    lin += w.shape.value(t);
                }
            }
            v.entries.insert(c.clone(), (x + lin) * 10f64.powf(log));
        }
        v
    }
}
