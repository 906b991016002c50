//! In-process Linda-style tuple space.

use std::fmt;
use std::sync::{Condvar, Mutex, MutexGuard};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tuple {
    Propose { time: usize, agent: String, actions: Vec<String> },
    Outcome { time: usize, agent: String, success: bool, reasons: Vec<String> },
    /// A pending request; `time` is when its trigger held.
    Request { id: u64, time: usize, requester: String, index: usize, target: Option<String> },
    Offer { id: u64, helper: String, requester: String },
    Accept { id: u64, helper: String, requester: String },
    Fulfilled { id: u64, helper: String, requester: String, due: usize },
    /// Engine control: run `phase` of step `time`.
    Tick { time: usize, agent: String, phase: Phase },
    Done { time: usize, agent: String, phase: Phase },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Offer,
    Accept,
    Commit,
    Propose,
    Outcome,
    Stop,
}

impl Tuple {
    pub fn tag(&self) -> &'static str {
        match self {
            Tuple::Propose { .. } => "Propose",
            Tuple::Outcome { .. } => "Outcome",
            Tuple::Request { .. } => "Request",
            Tuple::Offer { .. } => "Offer",
            Tuple::Accept { .. } => "Accept",
            Tuple::Fulfilled { .. } => "Fulfilled",
            Tuple::Tick { .. } => "Tick",
            Tuple::Done { .. } => "Done",
        }
    }

    pub fn is_control(&self) -> bool {
        matches!(self, Tuple::Tick { .. } | Tuple::Done { .. })
    }

    /// The agent on whose behalf the tuple is written, used to order events.
    pub fn actor(&self) -> &str {
        match self {
            Tuple::Propose { agent, .. } | Tuple::Outcome { agent, .. } | Tuple::Tick { agent, .. } | Tuple::Done { agent, .. } => agent,
            Tuple::Request { requester, .. } | Tuple::Accept { requester, .. } | Tuple::Fulfilled { requester, .. } => requester,
            Tuple::Offer { helper, .. } => helper,
        }
    }
}

fn list<T: fmt::Display>(v: &[T]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())?;
        match self {
            Tuple::Propose { time, agent, actions } => write!(f, "\ttime={time}\tagent={agent}\tactions={}", list(actions)),
            Tuple::Outcome { time, agent, success, reasons } => {
                write!(f, "\ttime={time}\tagent={agent}\tsuccess={success}\treasons={}", list(reasons))
            }
            Tuple::Request { id, time, requester, index, target } => write!(
                f,
                "\tid={id}\ttime={time}\trequester={requester}\tindex={index}\ttarget={}",
                target.as_deref().unwrap_or("*")
            ),
            Tuple::Offer { id, helper, requester } | Tuple::Accept { id, helper, requester } => {
                write!(f, "\tid={id}\thelper={helper}\trequester={requester}")
            }
            Tuple::Fulfilled { id, helper, requester, due } => write!(f, "\tid={id}\thelper={helper}\trequester={requester}\tdue={due}"),
            Tuple::Tick { time, agent, phase } | Tuple::Done { time, agent, phase } => write!(f, "\ttime={time}\tagent={agent}\tphase={phase:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Out,
    In,
    Rd,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Out => "out",
            Op::In => "in",
            Op::Rd => "rd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub op: Op,
    pub tuple: Tuple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("the tuple space is closed")]
pub struct SpaceClosed;

#[derive(Default)]
struct Inner {
    tuples: Vec<Tuple>,
    events: Vec<Event>,
    closed: bool,
}

/// A shared bag of tuples with atomic `out`, `rd` and `in`.
#[derive(Default)]
pub struct TupleSpace {
    inner: Mutex<Inner>,
    changed: Condvar,
}

impl TupleSpace {
    pub fn new() -> Self {
        TupleSpace::default()
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn record(inner: &mut Inner, op: Op, tuple: &Tuple) {
        if !tuple.is_control() {
            inner.events.push(Event { op, tuple: tuple.clone() });
        }
    }

    pub fn out(&self, t: Tuple) -> Result<(), SpaceClosed> {
        let mut g = self.lock();
        if g.closed {
            return Err(SpaceClosed);
        }
        Self::record(&mut g, Op::Out, &t);
        g.tuples.push(t);
        drop(g);
        self.changed.notify_all();
        Ok(())
    }

    /// Non-destructive read of the oldest matching tuple.
    pub fn rd(&self, pattern: impl Fn(&Tuple) -> bool) -> Result<Option<Tuple>, SpaceClosed> {
        let mut g = self.lock();
        if g.closed {
            return Err(SpaceClosed);
        }
        let found = g.tuples.iter().find(|t| pattern(t)).cloned();
        if let Some(t) = &found {
            Self::record(&mut g, Op::Rd, t);
        }
        Ok(found)
    }

    /// Every matching tuple, oldest first, without removing them.
    pub fn rd_all(&self, pattern: impl Fn(&Tuple) -> bool) -> Result<Vec<Tuple>, SpaceClosed> {
        let mut g = self.lock();
        if g.closed {
            return Err(SpaceClosed);
        }
        let found: Vec<Tuple> = g.tuples.iter().filter(|t| pattern(t)).cloned().collect();
        for t in &found {
            Self::record(&mut g, Op::Rd, t);
        }
        Ok(found)
    }

    /// Atomically removes and returns the oldest matching tuple.
    pub fn take(&self, pattern: impl Fn(&Tuple) -> bool) -> Result<Option<Tuple>, SpaceClosed> {
        let mut g = self.lock();
        if g.closed {
            return Err(SpaceClosed);
        }
        let Some(k) = g.tuples.iter().position(pattern) else { return Ok(None) };
        let t = g.tuples.remove(k);
        Self::record(&mut g, Op::In, &t);
        Ok(Some(t))
    }

    /// Blocking `in`: waits until a matching tuple exists.
    pub fn take_wait(&self, pattern: impl Fn(&Tuple) -> bool) -> Result<Tuple, SpaceClosed> {
        let mut g = self.lock();
        loop {
            if g.closed {
                return Err(SpaceClosed);
            }
            if let Some(k) = g.tuples.iter().position(&pattern) {
                let t = g.tuples.remove(k);
                Self::record(&mut g, Op::In, &t);
                return Ok(t);
            }
            g = self.changed.wait(g).unwrap_or_else(|e| e.into_inner());
        }
    }

    /// Blocking `rd`.
    pub fn rd_wait(&self, pattern: impl Fn(&Tuple) -> bool) -> Result<Tuple, SpaceClosed> {
        let mut g = self.lock();
        loop {
            if g.closed {
                return Err(SpaceClosed);
            }
            if let Some(t) = g.tuples.iter().find(|t| pattern(t)).cloned() {
                Self::record(&mut g, Op::Rd, &t);
                return Ok(t);
            }
            g = self.changed.wait(g).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn close(&self) {
        self.lock().closed = true;
        self.changed.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.lock().closed
    }

    /// Tuples currently stored, oldest first.
    pub fn snapshot(&self) -> Vec<Tuple> {
        self.lock().tuples.clone()
    }

    /// Drains the log of data-tuple operations.
    pub fn take_events(&self) -> Vec<Event> {
        std::mem::take(&mut self.lock().events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn offer(id: u64) -> Tuple {
        Tuple::Offer { id, helper: "h".into(), requester: "r".into() }
    }

    #[test]
    fn rd_keeps_in_removes() {
        let s = TupleSpace::new();
        s.out(offer(1)).unwrap();
        assert_eq!(s.rd(|t| *t == offer(1)).unwrap(), Some(offer(1)));
        assert_eq!(s.snapshot().len(), 1);
        assert_eq!(s.take(|t| *t == offer(1)).unwrap(), Some(offer(1)));
        assert_eq!(s.take(|t| *t == offer(1)).unwrap(), None);
        let ops: Vec<Op> = s.take_events().into_iter().map(|e| e.op).collect();
        assert_eq!(ops, vec![Op::Out, Op::Rd, Op::In]);
    }

    #[test]
    fn closed_space_rejects() {
        let s = TupleSpace::new();
        s.close();
        assert_eq!(s.out(offer(1)), Err(SpaceClosed));
        assert_eq!(s.take_wait(|_| true), Err(SpaceClosed));
    }

    #[test]
    fn concurrent_takes_remove_once() {
        for _ in 0..20 {
            let s = Arc::new(TupleSpace::new());
            s.out(offer(7)).unwrap();
            let handles: Vec<_> = (0..8)
                .map(|_| {
                    let s = Arc::clone(&s);
                    std::thread::spawn(move || s.take(|t| matches!(t, Tuple::Offer { id: 7, .. })).unwrap().is_some())
                })
                .collect();
            let wins = handles.into_iter().map(|h| h.join().unwrap()).filter(|w| *w).count();
            assert_eq!(wins, 1);
        }
    }

    #[test]
    fn blocking_take_wakes_up() {
        let s = Arc::new(TupleSpace::new());
        let s2 = Arc::clone(&s);
        let h = std::thread::spawn(move || s2.take_wait(|t| matches!(t, Tuple::Offer { id: 3, .. })));
        std::thread::sleep(std::time::Duration::from_millis(20));
        s.out(offer(3)).unwrap();
        assert_eq!(h.join().unwrap(), Ok(offer(3)));
    }

    #[test]
    fn control_tuples_are_not_logged() {
        let s = TupleSpace::new();
        s.out(Tuple::Tick { time: 0, agent: "a".into(), phase: Phase::Propose }).unwrap();
        assert!(s.take_events().is_empty());
    }
}
