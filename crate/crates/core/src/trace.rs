//! Execution histories with forward and backward stepping.
//!
//! Every entry holds a full state snapshot. Environments are shared between
//! snapshots and copied on write, so stepping back is a cursor move.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{category_at, Category};
use crate::machine::{Label, Machine, Outcome, State, Status};
use crate::syntax::ProgramPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEntry {
    pub index: usize,
    /// Location of the instruction this entry applied.
    pub pre_loc: ProgramPoint,
    pub category: Category,
    pub label: Label,
    pub state: State,
}

/// A recorded run with a cursor. Entries after the cursor are kept and
/// replayed by [`History::advance`].
#[derive(Debug, Clone)]
pub struct History {
    machine: Machine,
    entries: Vec<TraceEntry>,
    cursor: usize,
}

impl History {
    pub fn new(machine: Machine) -> History {
        let s0 = machine.initial_state();
        let pre_loc = s0.top().loc;
        let entry = TraceEntry {
            index: 0,
            pre_loc,
            category: category_at(machine.program(), pre_loc),
            label: Label::Init,
            state: s0,
        };
        History {
            machine,
            entries: vec![entry],
            cursor: 0,
        }
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn current(&self) -> &TraceEntry {
        &self.entries[self.cursor]
    }

    pub fn state(&self) -> &State {
        &self.current().state
    }

    /// Moves forward one entry, computing it if it was not recorded yet.
    /// Returns false when already at a terminal state.
    pub fn advance(&mut self) -> bool {
        if self.cursor + 1 < self.entries.len() {
            self.cursor += 1;
            return true;
        }
        let cur = &self.entries[self.cursor].state;
        if cur.is_terminal() {
            return false;
        }
        let pre_loc = cur.top().loc;
        let t = self.machine.step(cur);
        self.entries.push(TraceEntry {
            index: self.entries.len(),
            pre_loc,
            category: category_at(self.machine.program(), pre_loc),
            label: t.label,
            state: t.state,
        });
        self.cursor += 1;
        true
    }

    pub fn step_back(&mut self) -> bool {
        if self.cursor == 0 {
            return false;
        }
        self.cursor -= 1;
        true
    }

    pub fn reset(&mut self) {
        self.cursor = 0;
    }

    /// Advances until a terminal state or until `max_entries` entries exist.
    pub fn run(&mut self, max_entries: usize) -> Outcome {
        while self.entries.len() < max_entries.max(1) && self.advance() {}
        self.cursor = self.entries.len() - 1;
        match self.state().status() {
            Status::Running => Outcome::Truncated,
            Status::Finished => Outcome::Finished,
            Status::Errored { .. } => Outcome::Errored,
        }
    }

    pub fn document(&self) -> TraceDocument {
        TraceDocument {
            program: self.machine.program().source_lines().to_vec(),
            entries: self.entries.clone(),
        }
    }

    /// One line per entry: `i: loc=L label=X stack=[(loc,env),...]`.
    pub fn render_text(&self) -> String {
        render_text(&self.entries)
    }
}

pub fn render_text(entries: &[TraceEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let stack: Vec<String> = e.state.continuation().map(|c| c.to_string()).collect();
        let _ = writeln!(
            out,
            "{}: loc={} label={} stack=[{}]",
            e.index,
            e.pre_loc,
            e.label,
            stack.join(",")
        );
    }
    out
}

/// Serialized form of a history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub program: Vec<String>,
    pub entries: Vec<TraceEntry>,
}

impl TraceDocument {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serializes")
    }

    /// Sorted keys, no whitespace.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("trace serializes")
    }
}
