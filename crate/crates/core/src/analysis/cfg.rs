//! Control flow graph built from the `next`/`true`/`false` maps.
//!
//! `err` edges are self-loops on every line and are left out. Calls and
//! returns go through runtime closures, so they have no static edges either.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::control::ControlMaps;
use super::{category_at, Category};
use crate::syntax::{Location, Program, ProgramPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Next,
    True,
    False,
}

impl EdgeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Next => "next",
            EdgeLabel::True => "true",
            EdgeLabel::False => "false",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgNode {
    pub loc: ProgramPoint,
    pub category: Category,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CfgEdge {
    pub from: ProgramPoint,
    pub to: ProgramPoint,
    pub label: EdgeLabel,
}

/// Nodes are the lines `1..=N+1` followed by the exit markers of functions
/// whose bodies can fall off their last line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    pub edges: Vec<CfgEdge>,
}

pub fn build_cfg(p: &Program, cm: &ControlMaps) -> Cfg {
    let mut nodes: Vec<CfgNode> = (1..=p.len() + 1)
        .map(|n| {
            let loc = ProgramPoint::line(n);
            CfgNode {
                loc,
                category: category_at(p, loc),
            }
        })
        .collect();
    let mut edges = Vec::new();
    for (map, label) in [
        (&cm.next, EdgeLabel::Next),
        (&cm.true_, EdgeLabel::True),
        (&cm.false_, EdgeLabel::False),
    ] {
        edges.extend(map.iter().map(|(from, to)| CfgEdge {
            from: ProgramPoint::Line(*from),
            to: *to,
            label,
        }));
    }
    edges.sort();
    let exits: BTreeSet<ProgramPoint> = edges
        .iter()
        .map(|e| e.to)
        .filter(|t| matches!(t, ProgramPoint::Exit(_)))
        .collect();
    nodes.extend(exits.into_iter().map(|loc| CfgNode {
        loc,
        category: Category::Exit,
    }));
    Cfg { nodes, edges }
}

fn dot_id(p: ProgramPoint) -> String {
    match p {
        ProgramPoint::Line(l) => l.0.to_string(),
        ProgramPoint::Exit(d) => format!("exit{}", d.0),
    }
}

impl Cfg {
    pub fn has_edge(&self, from: ProgramPoint, to: ProgramPoint, label: EdgeLabel) -> bool {
        self.edges.binary_search(&CfgEdge { from, to, label }).is_ok()
    }

    pub fn has_node(&self, p: ProgramPoint) -> bool {
        self.nodes.iter().any(|n| n.loc == p)
    }

    pub fn successors(&self, from: ProgramPoint) -> impl Iterator<Item = &CfgEdge> {
        self.edges.iter().filter(move |e| e.from == from)
    }

    /// Nodes reachable from line 1 along static edges.
    pub fn reachable_from_start(&self) -> BTreeSet<ProgramPoint> {
        let mut seen = BTreeSet::new();
        let start = ProgramPoint::line(1);
        if !self.has_node(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(n) = queue.pop_front() {
            for e in self.successors(n) {
                if seen.insert(e.to) {
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }

    /// Graphviz rendering. Nodes are labelled `loc: category`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cfg {\n    node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let label = match n.loc {
                ProgramPoint::Line(l) => format!("{}: {}", l.0, n.category.as_str()),
                ProgramPoint::Exit(d) => format!("exit of def@{}: return None", d.0),
            };
            let _ = writeln!(out, "    {} [label=\"{}\"];", dot_id(n.loc), label);
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "    {} -> {} [label=\"{}\"];",
                dot_id(e.from),
                dot_id(e.to),
                e.label.as_str()
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Helper for tests and tools: the single edge of `label` leaving `from`.
pub fn edge_target(cfg: &Cfg, from: Location, label: EdgeLabel) -> Option<ProgramPoint> {
    cfg.successors(ProgramPoint::Line(from))
        .find(|e| e.label == label)
        .map(|e| e.to)
}
