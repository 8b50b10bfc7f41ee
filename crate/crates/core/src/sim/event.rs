//! Time-ordered event queue with insertion-order tie-breaking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::packet::DataPacket;
use crate::topology::NodeId;

#[derive(Debug, Clone)]
pub enum EventKind {
    ImageEmission { index: u32 },
    BeaconTick { node: NodeId },
    TransmissionComplete { sender: NodeId, receiver: NodeId, packet: Box<DataPacket> },
    PacketArrival { node: NodeId, from: NodeId, packet: Box<DataPacket> },
}

#[derive(Debug, Clone)]
pub struct SimEvent {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SimEvent {}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimEvent {
    // Reversed so the max-heap pops the earliest (time, sequence).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_sequence: u64,
    now: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Schedules `kind` at `time`, which must not precede the current time.
    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        assert!(time >= self.now, "event scheduled in the past: {time} < {}", self.now);
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(SimEvent { time, sequence, kind });
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        let ev = self.heap.pop()?;
        debug_assert!(ev.time >= self.now);
        self.now = ev.time;
        Some(ev)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Empties the queue in processing order.
    pub fn drain_ordered(&mut self) -> Vec<SimEvent> {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(ev) = self.heap.pop() {
            out.push(ev);
        }
        out
    }
}
