use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

/// Events ordered by `(time, insertion sequence)`.
#[derive(Debug)]
pub struct EventQueue<E> {
    queue: BTreeMap<(u64, u64), E>,
    next_seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        EventQueue { queue: BTreeMap::new(), next_seq: 0 }
    }
}

impl<E> EventQueue<E> {
    pub fn push(&mut self, time: u64, event: E) {
        self.queue.insert((time, self.next_seq), event);
        self.next_seq += 1;
    }

    pub fn pop(&mut self) -> Option<(u64, E)> {
        self.queue.pop_first().map(|((t, _), e)| (t, e))
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// JSON-lines event log.
#[derive(Clone, Debug, Default)]
pub struct EventLog {
    lines: Vec<String>,
}

impl EventLog {
    pub fn emit(&mut self, time: u64, kind: &str, detail: Value, conserved: bool) {
        let mut obj = Map::new();
        obj.insert("seq".into(), json!(self.lines.len()));
        obj.insert("t".into(), json!(time));
        obj.insert("kind".into(), json!(kind));
        obj.insert("conserved".into(), json!(conserved));
        if let Value::Object(d) = detail {
            obj.extend(d);
        }
        self.lines.push(Value::Object(obj).to_string());
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}
