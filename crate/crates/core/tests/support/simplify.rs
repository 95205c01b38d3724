//! Simplifier corpus checks: idempotence, semantic preservation against the
//! recorded CPython bindings, and diagnostics for unsupported constructs.

use simplipy_core::machine::Outcome;
use simplipy_core::{simplify, Machine, Severity};

use super::{compare_globals, corpus_dir, corpus_files, load_json};

pub const FLOAT_REL: f64 = 1e-12;

fn is_temp(name: &str) -> bool {
    name.strip_prefix("_t")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

/// The rewrite corpus, minus the generator script.
pub fn corpus() -> Vec<(String, String)> {
    corpus_files("simplify", "py")
        .into_iter()
        .filter(|(name, _)| name != "gen_expected")
        .collect()
}

pub fn check_program(name: &str, src: &str, expected: &serde_json::Value) -> Result<(), String> {
    let want = expected[name]
        .as_object()
        .ok_or(format!("{name} missing from expected.json"))?;
    let r = simplify(src);
    let out = r.output.as_deref().ok_or(format!("{name}: {:?}", r.diagnostics))?;
    if r.diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(format!("{name}: output alongside errors"));
    }
    let lines = out.lines().count() as u32;
    if (1..=lines).any(|l| !r.line_map.contains_key(&l)) {
        return Err(format!("{name}: line map does not cover the output"));
    }
    let again = simplify(out);
    if again.output.as_deref() != Some(out) {
        return Err(format!("{name}: not idempotent\n{out}\n---\n{:?}", again.output));
    }
    let m = Machine::from_source(out).map_err(|d| format!("{name}: output rejected {d:?}"))?;
    let run = m.run(1_000_000);
    if run.outcome != Outcome::Finished {
        return Err(format!(
            "{name}: ended {:?} with {:?}",
            run.outcome,
            run.last().status()
        ));
    }
    compare_globals(run.last().globals(), want, FLOAT_REL, |k| {
        is_temp(k) && !want.contains_key(k)
    })
    .map_err(|e| format!("{name}: {e}"))
}

pub fn check_corpus() -> Result<usize, String> {
    let expected = load_json(&corpus_dir("simplify").join("expected.json"));
    let programs = corpus();
    let failures: Vec<String> = programs
        .iter()
        .filter_map(|(name, src)| check_program(name, src, &expected).err())
        .collect();
    if failures.is_empty() {
        Ok(programs.len())
    } else {
        Err(failures.join("\n"))
    }
}

/// (source, construct named in the message, original line)
pub const UNSUPPORTED: &[(&str, &str, u32)] = &[
    ("lambda x: x", "lambda unsupported; bind a named def instead", 1),
    ("x = 1\n\n# loop\nfor i in x:\n    pass", "for loops", 4),
    ("xs = [1, 2]", "lists", 1),
    ("x = 1\np = (x, 2)", "tuples", 2),
    ("d = {1: 2}", "dicts", 1),
    ("class A:\n    pass", "classes", 1),
    ("import math", "imports", 1),
    ("x = 0\ntry:\n    x = 1\nexcept:\n    pass", "exceptions", 2),
    ("ys = [y for y in z]", "comprehensions", 1),
    ("a = b = 1", "chained assignment", 1),
    ("a, b = 1, 2", "multiple assignment", 1),
    ("x = 1\ny = x.real", "attribute access", 2),
    ("i = 0\nwhile i < 2:\n    i += 1\nelse:\n    pass", "while-else", 4),
];

pub fn check_unsupported(src: &str, construct: &str, line: u32) -> Result<(), String> {
    let r = simplify(src);
    if r.output.is_some() {
        return Err(format!("{src:?}: produced output"));
    }
    let hit = r.diagnostics.iter().any(|d| {
        d.severity == Severity::Error && d.code == "Unsupported" && d.line == line && d.message.contains(construct)
    });
    if hit {
        Ok(())
    } else {
        Err(format!(
            "{src:?}: expected {construct:?} at line {line}, got {:?}",
            r.diagnostics
        ))
    }
}
