//! Structural invariants of the machine, checked on one program at a time.

use std::collections::BTreeSet;

use proptest::prelude::*;
use simplipy_core::analysis::EdgeLabel;
use simplipy_core::machine::{Label, Status, Value};
use simplipy_core::{parse_program, Machine, ProgramPoint, State};

pub const MAX_STATES: usize = 1500;

fn machine(src: &str) -> Machine {
    Machine::from_source(src).unwrap_or_else(|d| panic!("generated program is invalid: {d:?}\n{src}"))
}

fn edge_label(l: Label) -> Option<EdgeLabel> {
    match l {
        Label::Next => Some(EdgeLabel::Next),
        Label::True => Some(EdgeLabel::True),
        Label::False => Some(EdgeLabel::False),
        _ => None,
    }
}

fn check_hierarchy(s: &State) -> Result<(), TestCaseError> {
    let n = s.envs().len() as u32;
    prop_assert_eq!(s.hierarchy().len() as u32 + 1, n);
    for (id, parent) in s.hierarchy().iter() {
        prop_assert!(parent < id, "parent {} of {} is not older", parent, id);
        let chain: Vec<_> = s.hierarchy().chain(id).collect();
        prop_assert!(chain.len() <= n as usize);
        prop_assert!(chain.last().unwrap().is_global());
    }
    let ids: Vec<u32> = s.envs().ids().map(|e| e.0).collect();
    prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
    prop_assert!(s.depth() >= 1);
    for c in s.continuation() {
        prop_assert!(c.env.0 < n);
    }
    Ok(())
}

pub fn generated_programs_are_valid(src: &str) -> Result<(), TestCaseError> {
    let p = parse_program(src).map_err(|d| TestCaseError::fail(format!("{d:?}\n{src}")))?;
    let again = parse_program(&p.render()).unwrap();
    prop_assert_eq!(again.render(), p.render());
    prop_assert_eq!(
        again.instructions().collect::<Vec<_>>(),
        p.instructions().collect::<Vec<_>>()
    );
    prop_assert!(Machine::new(p).is_ok(), "{}", src);
    Ok(())
}

pub fn err_is_the_identity(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    for (loc, _) in m.program().instructions() {
        prop_assert_eq!(m.analysis().control.err(loc), loc);
    }
    let run = m.run(MAX_STATES);
    let last = run.last();
    if last.is_terminal() {
        prop_assert_eq!(&m.step(last).state, last);
    }
    if let Status::Errored { at, .. } = last.status() {
        prop_assert_eq!(last.top().loc, ProgramPoint::Line(*at));
    }
    Ok(())
}

pub fn hierarchy_and_env_ids(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(MAX_STATES);
    for (i, s) in run.states.iter().enumerate() {
        check_hierarchy(s)?;
        if i > 0 {
            let grew = s.envs().len() - run.states[i - 1].envs().len();
            let expect = usize::from(run.labels[i] == Label::Call);
            prop_assert_eq!(grew, expect, "env count change on {:?}", run.labels[i]);
        }
    }
    Ok(())
}

pub fn continuation_discipline(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(MAX_STATES);
    for i in 1..run.states.len() {
        let (a, b) = (run.states[i - 1].depth() as i64, run.states[i].depth() as i64);
        let want = match run.labels[i] {
            Label::Call => 1,
            Label::Return => -1,
            _ => 0,
        };
        prop_assert_eq!(b - a, want);
        prop_assert!(b >= 1);
    }
    Ok(())
}

pub fn frame_initialization(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(MAX_STATES);
    for i in 1..run.states.len() {
        if run.labels[i] != Label::Call {
            continue;
        }
        let s = &run.states[i];
        let top = s.top();
        let block = m.analysis().scopes.block_of(top.loc);
        let info = m.analysis().scopes.get(block).unwrap();
        let env = s.envs().get(top.env).unwrap();
        let domain: BTreeSet<&String> = env.keys().collect();
        let want: BTreeSet<&String> = info.locals.iter().chain(info.params.iter()).collect();
        prop_assert_eq!(domain, want);
        for (name, v) in env {
            if !info.params.contains(name) {
                prop_assert_eq!(v, &Value::Bottom, "{} should start unbound", name);
            }
        }
        prop_assert_eq!(top.env.0 as usize, s.envs().len() - 1);
    }
    Ok(())
}

pub fn cfg_conformance(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(MAX_STATES);
    let cfg = &m.analysis().cfg;
    for i in 1..run.states.len() {
        let Some(label) = edge_label(run.labels[i]) else {
            continue;
        };
        let from = run.states[i - 1].top().loc;
        let to = run.states[i].top().loc;
        prop_assert!(
            cfg.has_edge(from, to, label),
            "{} -> {} [{:?}] missing",
            from,
            to,
            label
        );
    }
    Ok(())
}

pub fn source_tracking_replays_locations(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(MAX_STATES);
    let cm = &m.analysis().control;
    for i in 1..run.states.len() {
        let pre = run.states[i - 1].top().loc;
        let post = run.states[i].top().loc;
        let Some(l) = pre.as_line() else { continue };
        let replayed = match run.labels[i] {
            Label::Next => cm.next(l),
            Label::True => cm.on_true(l),
            Label::False => cm.on_false(l),
            Label::Err => Some(ProgramPoint::Line(cm.err(l))),
            _ => continue,
        };
        prop_assert_eq!(replayed, Some(post));
    }
    Ok(())
}

pub fn determinism(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let a = m.run(400);
    let b = machine(src).run(400);
    prop_assert_eq!(a.states.len(), b.states.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        prop_assert_eq!(x.canonical(), y.canonical());
        prop_assert_eq!(&m.step(x), &m.step(y));
    }
    Ok(())
}

pub fn state_json_round_trip(src: &str) -> Result<(), TestCaseError> {
    let m = machine(src);
    let run = m.run(300);
    for s in &run.states {
        let text = s.canonical();
        let back: State = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, s);
    }
    Ok(())
}

pub type Check = fn(&str) -> Result<(), TestCaseError>;

pub const ALL: &[(&str, Check)] = &[
    ("generated_programs_are_valid", generated_programs_are_valid),
    ("err_is_the_identity", err_is_the_identity),
    ("hierarchy_and_env_ids", hierarchy_and_env_ids),
    ("continuation_discipline", continuation_discipline),
    ("frame_initialization", frame_initialization),
    ("cfg_conformance", cfg_conformance),
    ("source_tracking_replays_locations", source_tracking_replays_locations),
    ("determinism", determinism),
    ("state_json_round_trip", state_json_round_trip),
];
