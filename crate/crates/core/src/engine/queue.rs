//! Pending-event queue ordered by `(time, seq)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EngineError, SimTime};

/// A timestamped unit of work.
#[derive(Debug, Clone)]
pub struct SimEvent<P> {
    pub time: SimTime,
    pub seq: u64,
    pub payload: P,
}

struct Entry<P>(SimEvent<P>);

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P> Eq for Entry<P> {}

impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Entry<P> {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Event queue plus the simulation clock.
///
/// Events dispatch in non-decreasing time; ties dispatch in insertion order.
pub struct EventQueue<P> {
    heap: BinaryHeap<Entry<P>>,
    clock: SimTime,
    next_seq: u64,
}

impl<P> std::fmt::Debug for EventQueue<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventQueue")
            .field("clock", &self.clock)
            .field("pending", &self.heap.len())
            .field("next_seq", &self.next_seq)
            .finish()
    }
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            clock: 0.0,
            next_seq: 0,
        }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Enqueues `payload` at `time` and returns its sequence number.
    pub fn schedule(&mut self, time: SimTime, payload: P) -> Result<u64, EngineError> {
        if time.is_nan() || time < self.clock {
            return Err(EngineError::SchedulingInPast {
                time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry(SimEvent { time, seq, payload }));
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.0.time)
    }

    /// Removes the next event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<SimEvent<P>> {
        let Entry(ev) = self.heap.pop()?;
        self.clock = ev.time;
        Some(ev)
    }

    /// Pops the next event only if it is due at or before `limit`.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<SimEvent<P>> {
        match self.peek_time() {
            Some(t) if t <= limit => self.pop(),
            _ => None,
        }
    }

    /// Moves the clock forward without dispatching anything.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.clock {
            self.clock = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_event_dispatches_at_its_time() {
        let mut q = EventQueue::new();
        q.schedule(5.0, "a").unwrap();
        let ev = q.pop().unwrap();
        assert_eq!(ev.time, 5.0);
        assert_eq!(ev.payload, "a");
        assert_eq!(q.clock(), 5.0);
    }

    #[test]
    fn equal_times_are_fifo() {
        let mut q = EventQueue::new();
        q.schedule(3.0, "A").unwrap();
        q.schedule(3.0, "B").unwrap();
        assert_eq!(q.pop().unwrap().payload, "A");
        assert_eq!(q.pop().unwrap().payload, "B");
    }

    #[test]
    fn scheduling_in_the_past_fails() {
        let mut q = EventQueue::new();
        q.schedule(4.0, ()).unwrap();
        q.pop();
        assert!(matches!(
            q.schedule(2.0, ()),
            Err(EngineError::SchedulingInPast { .. })
        ));
        // the current instant is still allowed
        q.schedule(4.0, ()).unwrap();
    }

    #[test]
    fn pop_until_respects_limit() {
        let mut q = EventQueue::new();
        q.schedule(1.0, 1).unwrap();
        q.schedule(10.0, 2).unwrap();
        assert_eq!(q.pop_until(5.0).unwrap().payload, 1);
        assert!(q.pop_until(5.0).is_none());
        assert_eq!(q.len(), 1);
    }
}
