//! Overlay topology (providers, IP networks, base stations), radio model and
//! waypoint mobility.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::controller::HandoffDirectory;
use crate::desirability::NetworkId;
use crate::taxonomy::{classify, Attachment, CellInfo, HandoffType, TopologyView, Transition};
use crate::Millis;

/// Path-loss reference distance d₀ in metres.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Macro,
    Micro,
    Pico,
    Femto,
}

impl Tier {
    pub fn default_radius_m(self) -> f64 {
        match self {
            Tier::Macro => 1000.0,
            Tier::Micro => 300.0,
            Tier::Pico => 100.0,
            Tier::Femto => 30.0,
        }
    }

    /// Transmit power at d₀ in dBm.
    pub fn default_tx_power_dbm(self) -> f64 {
        match self {
            Tier::Macro => -40.0,
            Tier::Micro => -45.0,
            Tier::Pico => -50.0,
            Tier::Femto => -55.0,
        }
    }

    pub fn default_path_loss_exponent(self) -> f64 {
        match self {
            Tier::Macro => 3.0,
            Tier::Micro => 2.7,
            Tier::Pico => 2.3,
            Tier::Femto => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: String,
    pub position: [f64; 2],
    pub tier: Tier,
    pub radius: f64,
    pub technology: String,
    pub channels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
}

impl BaseStation {
    /// A station with the tier's default radius and one channel `<id>-ch1`.
    pub fn new(id: &str, position: [f64; 2], tier: Tier, technology: &str) -> Self {
        Self {
            id: id.to_owned(),
            position,
            tier,
            radius: tier.default_radius_m(),
            technology: technology.to_owned(),
            channels: vec![format!("{id}-ch1")],
            tx_power_dbm: None,
            path_loss_exponent: None,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_channels(mut self, channels: &[&str]) -> Self {
        self.channels = channels.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn distance_to(&self, pos: [f64; 2]) -> f64 {
        (self.position[0] - pos[0]).hypot(self.position[1] - pos[1])
    }

    pub fn covers(&self, pos: [f64; 2]) -> bool {
        self.distance_to(pos) <= self.radius
    }
}

/// Log-distance received power in dBm at distance `d` metres, with the
/// distance clamped to d₀ from below.
pub fn log_distance_rss(tx_power_dbm: f64, exponent: f64, d: f64) -> f64 {
    let d = d.max(REFERENCE_DISTANCE_M);
    tx_power_dbm - 10.0 * exponent * (d / REFERENCE_DISTANCE_M).log10()
}

pub fn rss_at(pos: [f64; 2], bs: &BaseStation) -> f64 {
    log_distance_rss(
        bs.tx_power_dbm.unwrap_or(bs.tier.default_tx_power_dbm()),
        bs.path_loss_exponent.unwrap_or(bs.tier.default_path_loss_exponent()),
        bs.distance_to(pos),
    )
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpNet {
    pub id: String,
    pub stations: Vec<BaseStation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Isp {
    pub id: String,
    pub nets: Vec<IpNet>,
}

/// A station together with the net and provider it belongs to.
#[derive(Debug, Clone, Copy)]
pub struct Located<'a> {
    pub provider: &'a str,
    pub net: &'a str,
    pub station: &'a BaseStation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub providers: Vec<Isp>,
}

/// A broken topology rule: the offending field path and the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyIssue {
    pub field: String,
    pub rule: String,
}

impl Topology {
    pub fn stations(&self) -> impl Iterator<Item = Located<'_>> {
        self.providers.iter().flat_map(|p| {
            p.nets.iter().flat_map(move |n| {
                n.stations.iter().map(move |s| Located {
                    provider: &p.id,
                    net: &n.id,
                    station: s,
                })
            })
        })
    }

    pub fn locate(&self, station: &str) -> Option<Located<'_>> {
        self.stations().find(|l| l.station.id == station)
    }

    /// Covering stations and their RSS in dBm, ordered by station id.
    pub fn coverage(&self, pos: [f64; 2]) -> Vec<(&BaseStation, f64)> {
        let mut out: Vec<_> = self
            .stations()
            .filter(|l| l.station.covers(pos))
            .map(|l| (l.station, rss_at(pos, l.station)))
            .collect();
        out.sort_by(|a, b| a.0.id.cmp(&b.0.id));
        out
    }

    /// Attachment of `terminal` to the first channel of `station`.
    pub fn attachment(&self, terminal: &str, station: &str) -> Option<Attachment> {
        let l = self.locate(station)?;
        Some(Attachment {
            terminal: terminal.to_owned(),
            provider: l.provider.to_owned(),
            net: l.net.to_owned(),
            cell: l.station.id.clone(),
            channel: l.station.channels.first()?.clone(),
            technology: l.station.technology.clone(),
        })
    }

    pub fn validate(&self) -> Result<(), TopologyIssue> {
        let issue = |field: String, rule: &str| {
            Err(TopologyIssue {
                field,
                rule: rule.to_owned(),
            })
        };
        let (mut providers, mut nets, mut stations, mut channels) =
            (BTreeSet::new(), BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for (pi, p) in self.providers.iter().enumerate() {
            let pf = format!("topology.providers[{pi}]");
            if p.id.is_empty() || !providers.insert(&p.id) {
                return issue(format!("{pf}.id"), "provider ids must be nonempty and unique");
            }
            for (ni, n) in p.nets.iter().enumerate() {
                let nf = format!("{pf}.nets[{ni}]");
                if n.id.is_empty() || !nets.insert(&n.id) {
                    return issue(format!("{nf}.id"), "net ids must be nonempty and unique");
                }
                for (si, s) in n.stations.iter().enumerate() {
                    let sf = format!("{nf}.stations[{si}]");
                    if s.id.is_empty() || !stations.insert(&s.id) {
                        return issue(format!("{sf}.id"), "station ids must be nonempty and unique");
                    }
                    if !(s.radius.is_finite() && s.radius > 0.0) {
                        return issue(format!("{sf}.radius"), "radius > 0");
                    }
                    if !s.position.iter().all(|c| c.is_finite()) {
                        return issue(format!("{sf}.position"), "position must be finite");
                    }
                    if s.technology.is_empty() {
                        return issue(format!("{sf}.technology"), "technology must be nonempty");
                    }
                    if s.channels.is_empty() {
                        return issue(format!("{sf}.channels"), "at least one channel");
                    }
                    for c in &s.channels {
                        if c.is_empty() || !channels.insert(c) {
                            return issue(format!("{sf}.channels"), "channel ids must be nonempty and unique");
                        }
                    }
                    if s.tx_power_dbm.is_some_and(|x| !x.is_finite()) {
                        return issue(format!("{sf}.tx_power_dbm"), "tx_power_dbm must be finite");
                    }
                    if s.path_loss_exponent.is_some_and(|x| !(x.is_finite() && x > 0.0)) {
                        return issue(format!("{sf}.path_loss_exponent"), "path_loss_exponent > 0");
                    }
                }
            }
        }
        Ok(())
    }

    /// Two providers with two IP networks of two cells each:
    /// ISP1{Net1: BS1, BS2; Net2: BS3, BS4}, ISP2{Net3: BS5, BS6; Net4: BS7, BS8}.
    /// BS2 has two channels; BS2 and BS3 differ in technology, BS6 and BS7 share one.
    pub fn reference_overlay() -> Self {
        let bs = |id: &str, x: f64, tier: Tier, tech: &str| BaseStation::new(id, [x, 0.0], tier, tech);
        let net = |id: &str, stations: Vec<BaseStation>| IpNet {
            id: id.to_owned(),
            stations,
        };
        Topology {
            providers: vec![
                Isp {
                    id: "ISP1".into(),
                    nets: vec![
                        net(
                            "Net1",
                            vec![
                                bs("BS1", 0.0, Tier::Macro, "3G"),
                                bs("BS2", 400.0, Tier::Micro, "3G").with_channels(&["BS2-ch1", "BS2-ch2"]),
                            ],
                        ),
                        net(
                            "Net2",
                            vec![
                                bs("BS3", 800.0, Tier::Pico, "WiFi"),
                                bs("BS4", 1000.0, Tier::Femto, "WiFi"),
                            ],
                        ),
                    ],
                },
                Isp {
                    id: "ISP2".into(),
                    nets: vec![
                        net(
                            "Net3",
                            vec![
                                bs("BS5", 1020.0, Tier::Macro, "LTE"),
                                bs("BS6", 1400.0, Tier::Micro, "LTE"),
                            ],
                        ),
                        net(
                            "Net4",
                            vec![
                                bs("BS7", 1600.0, Tier::Micro, "LTE"),
                                bs("BS8", 1900.0, Tier::Pico, "WiMAX"),
                            ],
                        ),
                    ],
                },
            ],
        }
    }
}

impl TopologyView for Topology {
    fn locate_cell(&self, cell: &str) -> Option<CellInfo<'_>> {
        self.locate(cell).map(|l| CellInfo {
            net: l.net,
            provider: l.provider,
            technology: &l.station.technology,
            channels: &l.station.channels,
        })
    }
}

/// Handoff types between stations for one terminal.
pub struct TopologyDirectory<'a> {
    pub topology: &'a Topology,
    pub terminal: &'a str,
}

impl HandoffDirectory for TopologyDirectory<'_> {
    fn handoff_type(&self, from: &NetworkId, to: &NetworkId) -> Option<HandoffType> {
        let a = self.topology.attachment(self.terminal, from.as_str())?;
        let b = self.topology.attachment(self.terminal, to.as_str())?;
        match classify(&a, &b, self.topology).ok()? {
            Transition::Handoff(t) => Some(t),
            Transition::NotAHandoff => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: Millis,
    pub pos: [f64; 2],
}

/// Piecewise-linear position along `path`; parks at the ends.
pub fn advance_position(path: &[Waypoint], t: Millis) -> [f64; 2] {
    let Some(first) = path.first() else {
        return [0.0, 0.0];
    };
    if t <= first.t {
        return first.pos;
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t <= b.t {
            let f = (t - a.t) as f64 / (b.t - a.t) as f64;
            return [a.pos[0] + f * (b.pos[0] - a.pos[0]), a.pos[1] + f * (b.pos[1] - a.pos[1])];
        }
    }
    path[path.len() - 1].pos
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{InfraLevel, Layer, Verticality};

    #[test]
    fn rss_reference_and_decade() {
        assert_eq!(log_distance_rss(-40.0, 3.0, 1.0), -40.0);
        assert_eq!(log_distance_rss(-40.0, 2.0, 10.0), -60.0);
        assert_eq!(log_distance_rss(-40.0, 3.0, 0.0), -40.0);
        assert!(log_distance_rss(-40.0, 2.0, 5.0) > log_distance_rss(-40.0, 2.0, 6.0));
    }

    #[test]
    fn default_radii_are_ordered() {
        let r: Vec<_> = [Tier::Macro, Tier::Micro, Tier::Pico, Tier::Femto]
            .map(Tier::default_radius_m)
            .into();
        assert!(r.windows(2).all(|w| w[0] >= w[1]));
    }

    fn one_provider(stations: Vec<BaseStation>) -> Topology {
        Topology {
            providers: vec![Isp {
                id: "P".into(),
                nets: vec![IpNet {
                    id: "N".into(),
                    stations,
                }],
            }],
        }
    }

    #[test]
    fn coverage_cases() {
        let t = one_provider(vec![
            BaseStation::new("M", [0.0, 0.0], Tier::Macro, "LTE"),
            BaseStation::new("F", [500.0, 0.0], Tier::Femto, "WiFi"),
        ]);
        let ids = |p| t.coverage(p).iter().map(|(s, _)| s.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids([0.0, 0.0]), ["M"]);
        assert!(ids([5000.0, 0.0]).is_empty());
        assert_eq!(ids([500.0, 0.0]), ["F", "M"]);
        assert_eq!(ids([1000.0, 0.0]), ["M"], "boundary distance counts as covered");
    }

    #[test]
    fn waypoints() {
        let path = [
            Waypoint { t: 0, pos: [0.0, 0.0] },
            Waypoint {
                t: 1000,
                pos: [100.0, 0.0],
            },
        ];
        assert_eq!(advance_position(&path, 1000), [100.0, 0.0]);
        assert_eq!(advance_position(&path, 500), [50.0, 0.0]);
        assert_eq!(advance_position(&path, 9000), [100.0, 0.0]);
        let late = [Waypoint { t: 100, pos: [3.0, 4.0] }];
        assert_eq!(advance_position(&late, 0), [3.0, 4.0]);
    }

    #[test]
    fn reference_overlay_is_valid_and_classifies() {
        let t = Topology::reference_overlay();
        assert_eq!(t.validate(), Ok(()));
        let d = TopologyDirectory {
            topology: &t,
            terminal: "MT",
        };
        let ty = d.handoff_type(&"BS6".into(), &"BS7".into()).unwrap();
        assert_eq!((ty.delta.infra_level, ty.layer, ty.verticality), (InfraLevel::Net, Layer::L3, Verticality::Horizontal));
        let ty = d.handoff_type(&"BS2".into(), &"BS3".into()).unwrap();
        assert_eq!(ty.verticality, Verticality::Vertical);
        assert!(d.handoff_type(&"BS1".into(), &"BS1".into()).is_none());
    }

    #[test]
    fn duplicate_channel_rejected() {
        let t = one_provider(vec![
            BaseStation::new("A", [0.0, 0.0], Tier::Macro, "LTE").with_channels(&["c"]),
            BaseStation::new("B", [0.0, 0.0], Tier::Macro, "LTE").with_channels(&["c"]),
        ]);
        let e = t.validate().unwrap_err();
        assert_eq!(e.field, "topology.providers[0].nets[0].stations[1].channels");
    }
}
