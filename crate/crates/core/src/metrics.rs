//! End-of-run measurements and their CSV export.
//!
//! All statistics are population statistics over sensors only; the sink and
//! source are excluded. Delay statistics cover delivered packets only and are
//! absent when nothing was delivered.

use std::io::Write;

use serde::Serialize;

use crate::packet::LossReason;
use crate::routing::Protocol;
use crate::topology::{FieldSpec, NodeId, Position};

/// Left edge of the first energy region, in meters.
pub const REGION_ANCHOR_M: f64 = 10.0;
pub const REGION_WIDTH_M: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeFinal {
    pub id: NodeId,
    pub position: Position,
    pub initial: f64,
    pub residual: f64,
    /// False for the sink and the source.
    pub sensor: bool,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketOutcome {
    Delivered,
    Lost(LossReason),
    /// Still in the network; never present in a finished report.
    Pending,
}

impl PacketOutcome {
    pub fn label(self) -> &'static str {
        match self {
            PacketOutcome::Delivered => "delivered",
            PacketOutcome::Lost(r) => r.as_str(),
            PacketOutcome::Pending => "pending",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketRecord {
    pub packet_id: u64,
    pub seq: u64,
    pub outcome: PacketOutcome,
    /// End-to-end delay, delivered packets only.
    pub delay: Option<f64>,
    pub hops: u32,
    /// Nodes visited, starting at the source.
    pub path: Vec<NodeId>,
}

/// Lost-packet tally per reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LossCounts([u64; LossReason::ALL.len()]);

impl LossCounts {
    fn slot(reason: LossReason) -> usize {
        LossReason::ALL.iter().position(|r| *r == reason).expect("listed")
    }

    pub fn add(&mut self, reason: LossReason) {
        self.0[Self::slot(reason)] += 1;
    }

    pub fn get(&self, reason: LossReason) -> u64 {
        self.0[Self::slot(reason)]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LossReason, u64)> + '_ {
        LossReason::ALL.iter().map(|r| (*r, self.get(*r)))
    }
}

/// Where the network's energy went.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    /// Drawn from sensor batteries by transmissions.
    pub tx: f64,
    /// Drawn from sensor batteries by receptions.
    pub rx: f64,
    /// Left in batteries of nodes that could not afford a transmission.
    pub forfeited: f64,
    /// Spent by the sink and source, which are not battery limited.
    pub exempt: f64,
}

impl EnergyLedger {
    pub fn battery_total(&self) -> f64 {
        self.tx + self.rx + self.forfeited
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionEnergy {
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub protocol: Protocol,
    pub seed: u64,
    pub n_sensors: usize,
    pub dead_nodes: usize,
    pub mean_energy: Option<f64>,
    pub energy_variance: Option<f64>,
    pub regional_mean_energy: Vec<RegionEnergy>,
    pub delay_mean: Option<f64>,
    pub delay_variance: Option<f64>,
    pub emitted: u64,
    pub delivered: u64,
    pub lost: LossCounts,
    pub per_packet_log: Vec<PacketRecord>,
    pub nodes: Vec<NodeFinal>,
    pub ledger: EnergyLedger,
    /// Simulated time at which the run stopped.
    pub end_time: f64,
}

impl MetricsReport {
    pub fn lost_total(&self) -> u64 {
        self.lost.total()
    }

    pub fn delivery_ratio(&self) -> Option<f64> {
        (self.emitted > 0).then(|| self.delivered as f64 / self.emitted as f64)
    }
}

/// Sensors whose battery is empty.
pub fn dead_node_count(nodes: &[NodeFinal]) -> usize {
    nodes.iter().filter(|n| n.sensor && n.residual <= 0.0).count()
}

fn mean_and_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var))
}

/// Population mean and variance of sensor residual energy.
pub fn energy_stats(nodes: &[NodeFinal]) -> Option<(f64, f64)> {
    let residuals: Vec<f64> = nodes.iter().filter(|n| n.sensor).map(|n| n.residual).collect();
    mean_and_variance(&residuals)
}

/// Number of 40 m regions between the anchor and the mirrored right edge.
pub fn region_count(field: &FieldSpec) -> usize {
    (((field.width - 2.0 * REGION_ANCHOR_M) / REGION_WIDTH_M).floor() as usize).max(1)
}

/// Region index for an x coordinate; out-of-range positions join the
/// first or last region.
pub fn region_of(x: f64, count: usize) -> usize {
    let raw = ((x - REGION_ANCHOR_M) / REGION_WIDTH_M).floor();
    if raw < 0.0 {
        0
    } else {
        (raw as usize).min(count - 1)
    }
}

/// Mean sensor energy per 40 m strip of x, anchored at x = 10. Empty strips
/// are omitted.
pub fn regional_energy(nodes: &[NodeFinal], field: &FieldSpec) -> Vec<RegionEnergy> {
    let count = region_count(field);
    let mut sums = vec![(0.0f64, 0usize); count];
    for n in nodes.iter().filter(|n| n.sensor) {
        let slot = &mut sums[region_of(n.position.x, count)];
        slot.0 += n.residual;
        slot.1 += 1;
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, c))| *c > 0)
        .map(|(i, (sum, c))| {
            let lo = REGION_ANCHOR_M + i as f64 * REGION_WIDTH_M;
            RegionEnergy {
                lo,
                hi: lo + REGION_WIDTH_M,
                mean: sum / c as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLoss {
    pub delay_mean: Option<f64>,
    pub delay_variance: Option<f64>,
    pub delivered: u64,
    pub lost: LossCounts,
}

/// Delay statistics over delivered packets and the loss tally.
pub fn delay_and_loss(log: &[PacketRecord]) -> DelayLoss {
    let mut lost = LossCounts::default();
    let mut delays = Vec::new();
    for r in log {
        match r.outcome {
            PacketOutcome::Delivered => delays.push(r.delay.unwrap_or(0.0)),
            PacketOutcome::Lost(reason) => lost.add(reason),
            PacketOutcome::Pending => {}
        }
    }
    let stats = mean_and_variance(&delays);
    DelayLoss {
        delay_mean: stats.map(|s| s.0),
        delay_variance: stats.map(|s| s.1),
        delivered: delays.len() as u64,
        lost,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_header() -> Vec<String> {
    let mut cols: Vec<String> = [
        "protocol",
        "seed",
        "n",
        "dead",
        "mean_e",
        "var_e",
        "delay_mean",
        "delay_var",
        "delivered",
        "lost_total",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(LossReason::ALL.iter().map(|r| format!("lost_{}", r.as_str())));
    cols.push("emitted".into());
    cols
}

pub fn summary_row(r: &MetricsReport) -> Vec<String> {
    let mut row = vec![
        r.protocol.to_string(),
        r.seed.to_string(),
        r.n_sensors.to_string(),
        r.dead_nodes.to_string(),
        opt(r.mean_energy),
        opt(r.energy_variance),
        opt(r.delay_mean),
        opt(r.delay_variance),
        r.delivered.to_string(),
        r.lost_total().to_string(),
    ];
    row.extend(r.lost.iter().map(|(_, c)| c.to_string()));
    row.push(r.emitted.to_string());
    row
}

pub const REGIONAL_HEADER: [&str; 6] = ["protocol", "seed", "n", "region_lo", "region_hi", "mean_e"];

pub fn regional_rows(r: &MetricsReport) -> Vec<Vec<String>> {
    r.regional_mean_energy
        .iter()
        .map(|g| {
            vec![
                r.protocol.to_string(),
                r.seed.to_string(),
                r.n_sensors.to_string(),
                g.lo.to_string(),
                g.hi.to_string(),
                g.mean.to_string(),
            ]
        })
        .collect()
}

pub const PACKET_HEADER: [&str; 9] = ["protocol", "seed", "n", "packet_id", "seq", "outcome", "delay", "hops", "path"];

pub fn packet_rows(r: &MetricsReport) -> Vec<Vec<String>> {
    r.per_packet_log
        .iter()
        .map(|p| {
            vec![
                r.protocol.to_string(),
                r.seed.to_string(),
                r.n_sensors.to_string(),
                p.packet_id.to_string(),
                p.seq.to_string(),
                p.outcome.label().to_string(),
                opt(p.delay),
                p.hops.to_string(),
                p.path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect()
}

/// Writes a header and rows as CSV.
pub fn write_csv<W: Write, H: AsRef<[u8]>>(writer: W, header: &[H], rows: impl IntoIterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
