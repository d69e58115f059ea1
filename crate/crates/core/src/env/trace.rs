//! Control-plane signaling trace.
//!
//! Every simulation step emits one uplink report chain per transmitter
//! (fronthaul -> F1 -> E2), then the per-transmitter reconfiguration
//! decisions, then the downlink command chain back to the radio unit. Model
//! broadcasts at round boundaries add one A1 record per agent. Records are
//! exportable as newline-delimited JSON.

use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "UL")]
    Ul,
    #[serde(rename = "DL")]
    Dl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Interface {
    #[serde(rename = "OFH")]
    Ofh,
    #[serde(rename = "F1")]
    F1,
    #[serde(rename = "E2")]
    E2,
    #[serde(rename = "A1")]
    A1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    MeasurementReport,
    KpiAggregate,
    ReconfigDecision,
    ReconfigCommand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub direction: Direction,
    pub interface: Interface,
    pub from: String,
    pub to: String,
    pub payload: PayloadKind,
}

/// Append-only record sink. When disabled every push is a no-op, so the hot
/// path stays allocation-free for metric-only runs.
#[derive(Debug, Clone, Default)]
pub struct SignalingTrace {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl SignalingTrace {
    pub fn new(enabled: bool) -> Self {
        Self { enabled, records: Vec::new() }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn push(
        &mut self,
        step: u64,
        direction: Direction,
        interface: Interface,
        from: String,
        to: String,
        payload: PayloadKind,
    ) {
        if self.enabled {
            self.records.push(TraceRecord { step, direction, interface, from, to, payload });
        }
    }

    /// Uplink measurement chain for one transmitter: radio unit to
    /// distributed unit, on to the central unit, then the KPI aggregate into
    /// the near-real-time RIC.
    pub fn record_uplink(&mut self, step: u64, tx: usize, ap: usize, ec: usize) {
        self.push(
            step,
            Direction::Ul,
            Interface::Ofh,
            format!("tx-{tx}"),
            format!("o-ru-{ap}"),
            PayloadKind::MeasurementReport,
        );
        self.push(
            step,
            Direction::Ul,
            Interface::F1,
            format!("o-du-{ec}"),
            format!("o-cu-{ec}"),
            PayloadKind::MeasurementReport,
        );
        self.push(
            step,
            Direction::Ul,
            Interface::E2,
            format!("o-cu-{ec}"),
            format!("nrt-ric-{ec}"),
            PayloadKind::KpiAggregate,
        );
    }

    /// The xApp decision leaving the near-real-time RIC over E2.
    pub fn record_decision(&mut self, step: u64, tx: usize, ec: usize) {
        self.push(
            step,
            Direction::Dl,
            Interface::E2,
            format!("xapp-{tx}"),
            format!("o-cu-{ec}"),
            PayloadKind::ReconfigDecision,
        );
    }

    /// Downlink command chain towards the radio unit of the serving AP.
    pub fn record_downlink(&mut self, step: u64, tx: usize, ap: usize, ec: usize) {
        self.push(
            step,
            Direction::Dl,
            Interface::F1,
            format!("o-cu-{ec}"),
            format!("o-du-{ec}"),
            PayloadKind::ReconfigCommand,
        );
        self.push(
            step,
            Direction::Dl,
            Interface::Ofh,
            format!("o-ru-{ap}"),
            format!("tx-{tx}"),
            PayloadKind::ReconfigCommand,
        );
    }

    /// Model delivery from the non-real-time RIC to one agent's xApp at a
    /// round boundary.
    pub fn record_a1_broadcast(&mut self, step: u64, agent: usize) {
        self.push(
            step,
            Direction::Dl,
            Interface::A1,
            "non-rt-ric".to_string(),
            format!("xapp-{agent}"),
            PayloadKind::ReconfigCommand,
        );
    }

    /// Checks the per-step phase ordering of the O-RAN interfaces: all uplink
    /// records precede decisions, which precede downlink commands. A1 records
    /// sit at round boundaries and are exempt.
    pub fn validate_step_ordering(&self) -> Result<(), String> {
        #[derive(PartialEq, PartialOrd, Clone, Copy)]
        enum Phase {
            Ul,
            Decision,
            Dl,
        }
        let mut current: Option<(u64, Phase)> = None;
        for r in &self.records {
            if r.interface == Interface::A1 {
                continue;
            }
            let phase = match (r.direction, r.payload) {
                (Direction::Ul, _) => Phase::Ul,
                (Direction::Dl, PayloadKind::ReconfigDecision) => Phase::Decision,
                (Direction::Dl, _) => Phase::Dl,
            };
            if let Some((step, prev)) = current {
                if r.step == step && phase < prev {
                    return Err(format!("step {}: {:?} after later phase", r.step, r.payload));
                }
            }
            current = Some((r.step, phase));
        }
        Ok(())
    }

    /// Writes the trace as newline-delimited JSON records.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for record in &self.records {
            let line = serde_json::to_string(record).expect("trace record serializes");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
