//! Shared helpers for integration tests: corpus access, value comparison
//! and a generator of random valid SimpliPy programs.
#![allow(dead_code)]

pub mod errors;
pub mod invariants;
pub mod simplify;
pub mod tables;
pub mod time_travel;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use serde_json::Value as Json;
use simplipy_core::machine::{Env, Value};

/// The core crate directory, whichever crate includes this module.
pub fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .expect("crates directory")
        .join("core")
}

pub fn corpus_dir(name: &str) -> PathBuf {
    core_dir().join("tests").join("corpus").join(name)
}

/// All `*.ext` files of a corpus directory, sorted by name.
pub fn corpus_files(name: &str, ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir(name))
        .expect("corpus directory exists")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == ext).then(|| {
                let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
                (stem, fs::read_to_string(&p).expect("readable corpus file"))
            })
        })
        .collect();
    out.sort();
    out
}

pub fn load_json(path: &Path) -> Json {
    serde_json::from_str(&fs::read_to_string(path).expect("readable json")).expect("valid json")
}

/// Expected bindings as written by the corpus generator scripts:
/// `{"type": "int" | "float" | "bool" | "str" | "none", "value": ...}`.
pub fn expected_value(v: &Json) -> Value {
    match v["type"].as_str().expect("typed value") {
        "int" => Value::Int(v["value"].as_str().unwrap().parse().unwrap()),
        "float" => Value::Float(v["value"].as_f64().unwrap()),
        "bool" => Value::Bool(v["value"].as_bool().unwrap()),
        "str" => Value::Str(v["value"].as_str().unwrap().to_string()),
        "none" => Value::None,
        other => panic!("unknown type {other}"),
    }
}

/// Exact for ints, bools and strings; floats within `rel` relative error.
pub fn values_match(got: &Value, want: &Value, rel: f64) -> bool {
    match (got, want) {
        (Value::Float(a), Value::Float(b)) => {
            if a == b {
                return true;
            }
            let scale = a.abs().max(b.abs());
            (a - b).abs() <= rel * scale
        }
        _ => got == want,
    }
}

/// Compares the non-closure bindings of `globals` with `expected`, skipping
/// names for which `skip` is true.
pub fn compare_globals(
    globals: &Env,
    expected: &serde_json::Map<String, Json>,
    rel: f64,
    skip: impl Fn(&str) -> bool,
) -> Result<(), String> {
    let got: BTreeMap<&str, &Value> = globals
        .iter()
        .filter(|(k, v)| !v.is_closure() && !skip(k))
        .map(|(k, v)| (k.as_str(), v))
        .collect();
    let want: BTreeMap<&str, Value> = expected
        .iter()
        .filter(|(k, _)| !skip(k))
        .map(|(k, v)| (k.as_str(), expected_value(v)))
        .collect();
    if got.keys().ne(want.keys()) {
        return Err(format!(
            "binding sets differ: got {:?}, want {:?}",
            got.keys().collect::<Vec<_>>(),
            want.keys().collect::<Vec<_>>()
        ));
    }
    for (k, w) in &want {
        let g = got[k];
        if !values_match(g, w, rel) {
            return Err(format!("{k}: got {g}, want {w}"));
        }
    }
    Ok(())
}

// Random program generation.
//
// Programs are built from a small abstract statement language and rendered
// with every construct placed where it is valid: loops are counter loops
// that always terminate, `break`/`continue` only appear inside loops,
// functions initialise their locals first, `nonlocal` only names a local of
// an enclosing function, calls pass the right number of arguments. Calls
// may still recurse without bound, so runs can be truncated or hit the
// recursion limit.

#[derive(Debug, Clone)]
pub enum GExp {
    Var(u8),
    Const(i8),
    Bin(u8, Box<GExp>, Box<GExp>),
}

#[derive(Debug, Clone)]
pub enum GCond {
    Cmp(u8, GExp, GExp),
    Not(Box<GCond>),
    And(Box<GCond>, Box<GCond>),
    Or(Box<GCond>, Box<GCond>),
}

#[derive(Debug, Clone, Copy)]
pub enum Decl {
    None,
    Global,
    Nonlocal,
}

#[derive(Debug, Clone)]
pub enum GStmt {
    Assign(u8, GExp),
    BumpGlobal,
    If(GCond, Vec<GStmt>, Option<Vec<GStmt>>),
    Loop(u8, Vec<GStmt>),
    Break,
    Continue,
    Call(u8, u8, Vec<GExp>),
    Def {
        params: u8,
        decl: Decl,
        body: Vec<GStmt>,
        ret: Option<GExp>,
    },
}

pub fn gexp() -> impl Strategy<Value = GExp> {
    let leaf = prop_oneof![(0u8..8).prop_map(GExp::Var), (-3i8..10).prop_map(GExp::Const)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (0u8..5, inner.clone(), inner).prop_map(|(op, l, r)| GExp::Bin(op, Box::new(l), Box::new(r)))
    })
}

pub fn gcond() -> impl Strategy<Value = GCond> {
    let leaf = (0u8..6, gexp(), gexp()).prop_map(|(op, l, r)| GCond::Cmp(op, l, r));
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|c| GCond::Not(Box::new(c))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| GCond::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| GCond::Or(Box::new(a), Box::new(b))),
        ]
    })
}

pub fn gstmt() -> impl Strategy<Value = GStmt> {
    let leaf = prop_oneof![
        4 => (0u8..3, gexp()).prop_map(|(v, e)| GStmt::Assign(v, e)),
        1 => Just(GStmt::BumpGlobal),
        1 => Just(GStmt::Break),
        1 => Just(GStmt::Continue),
        2 => (0u8..3, any::<u8>(), prop::collection::vec(gexp(), 0..3))
            .prop_map(|(t, f, a)| GStmt::Call(t, f, a)),
    ];
    leaf.prop_recursive(3, 40, 4, |inner| {
        let block = prop::collection::vec(inner, 1..4);
        prop_oneof![
            (gcond(), block.clone(), prop::option::of(block.clone())).prop_map(|(c, t, e)| GStmt::If(c, t, e)),
            (1u8..4, block.clone()).prop_map(|(n, b)| GStmt::Loop(n, b)),
            (
                0u8..3,
                prop_oneof![Just(Decl::None), Just(Decl::Global), Just(Decl::Nonlocal)],
                block,
                prop::option::of(gexp())
            )
                .prop_map(|(params, decl, body, ret)| GStmt::Def {
                    params,
                    decl,
                    body,
                    ret
                }),
        ]
    })
}

/// A random program in source form.
pub fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(gstmt(), 1..6).prop_map(|stmts| render(&stmts))
}

const LOCALS: [&str; 3] = ["a", "b", "c"];

struct Scope {
    funcs: Vec<(String, u8)>,
    params: u8,
    in_def: bool,
    global_decl: bool,
    nonlocal_a: bool,
}

struct Renderer {
    out: Vec<String>,
    indent: usize,
    loops: usize,
    scopes: Vec<Scope>,
    next_fn: usize,
    next_counter: usize,
}

pub fn render(stmts: &[GStmt]) -> String {
    let mut r = Renderer {
        out: Vec::new(),
        indent: 0,
        loops: 0,
        scopes: vec![Scope {
            funcs: Vec::new(),
            params: 0,
            in_def: false,
            global_decl: false,
            nonlocal_a: false,
        }],
        next_fn: 0,
        next_counter: 0,
    };
    for (v, init) in LOCALS.iter().zip(1..) {
        r.line(format!("{v} = {init}"));
    }
    r.line("g = 0".to_string());
    r.block(stmts);
    r.out.join("\n")
}

impl Renderer {
    fn line(&mut self, s: String) {
        self.out.push(format!("{}{}", "    ".repeat(self.indent), s));
    }

    fn scope(&self) -> &Scope {
        self.scopes.last().unwrap()
    }

    fn readable(&self) -> Vec<String> {
        let mut v: Vec<String> = LOCALS.iter().map(|s| s.to_string()).collect();
        v.push("g".into());
        for i in 0..self.scope().params {
            v.push(format!("p{i}"));
        }
        v
    }

    fn exp(&self, e: &GExp) -> String {
        match e {
            GExp::Var(i) => {
                let names = self.readable();
                names[*i as usize % names.len()].clone()
            }
            GExp::Const(c) => c.to_string(),
            GExp::Bin(op, l, r) => {
                let (l, r) = (self.exp(l), self.exp(r));
                match op % 5 {
                    0 => format!("({l} + {r})"),
                    1 => format!("({l} - {r})"),
                    2 => format!("({l} * {r})"),
                    // Divisors are nonzero constants so generated programs
                    // rarely stop on a division error.
                    3 => format!("({l} // {})", (r.len() % 3) + 2),
                    _ => format!("({l} % {})", (r.len() % 4) + 2),
                }
            }
        }
    }

    fn cond(&self, c: &GCond) -> String {
        match c {
            GCond::Cmp(op, l, r) => {
                let sym = ["<", "<=", ">", ">=", "==", "!="][*op as usize % 6];
                format!("{} {sym} {}", self.exp(l), self.exp(r))
            }
            GCond::Not(c) => format!("not ({})", self.cond(c)),
            GCond::And(a, b) => format!("({}) and ({})", self.cond(a), self.cond(b)),
            GCond::Or(a, b) => format!("({}) or ({})", self.cond(a), self.cond(b)),
        }
    }

    fn block(&mut self, stmts: &[GStmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn nested(&mut self, stmts: &[GStmt]) {
        self.indent += 1;
        self.block(stmts);
        self.indent -= 1;
    }

    fn stmt(&mut self, s: &GStmt) {
        match s {
            GStmt::Assign(v, e) => {
                let name = LOCALS[*v as usize % 3];
                let e = self.exp(e);
                self.line(format!("{name} = {e}"));
            }
            GStmt::BumpGlobal => {
                let sc = self.scope();
                if !sc.in_def || sc.global_decl {
                    self.line("g = g + 1".into());
                } else {
                    self.line("pass".into());
                }
            }
            GStmt::Break => {
                let l = if self.loops > 0 { "break" } else { "pass" };
                self.line(l.into());
            }
            GStmt::Continue => {
                let l = if self.loops > 0 { "continue" } else { "pass" };
                self.line(l.into());
            }
            GStmt::If(c, t, e) => {
                let c = self.cond(c);
                self.line(format!("if {c}:"));
                self.nested(t);
                if let Some(e) = e {
                    self.line("else:".into());
                    self.nested(e);
                }
            }
            GStmt::Loop(n, body) => {
                let k = format!("k{}", self.next_counter);
                self.next_counter += 1;
                self.line(format!("{k} = 0"));
                self.line(format!("while {k} < {n}:"));
                self.indent += 1;
                self.line(format!("{k} = {k} + 1"));
                self.loops += 1;
                self.block(body);
                self.loops -= 1;
                self.indent -= 1;
            }
            GStmt::Call(t, f, args) => {
                let target = LOCALS[*t as usize % 3];
                let visible: Vec<(String, u8)> = self.scopes.iter().flat_map(|s| s.funcs.iter().cloned()).collect();
                if visible.is_empty() {
                    let e = args.first().map_or("0".to_string(), |a| self.exp(a));
                    self.line(format!("{target} = {e}"));
                    return;
                }
                let (name, arity) = &visible[*f as usize % visible.len()];
                let args: Vec<String> = (0..*arity as usize)
                    .map(|i| args.get(i).map_or("0".to_string(), |a| self.exp(a)))
                    .collect();
                self.line(format!("{target} = {name}({})", args.join(", ")));
            }
            GStmt::Def {
                params,
                decl,
                body,
                ret,
            } => {
                let name = format!("f{}", self.next_fn);
                self.next_fn += 1;
                let ps: Vec<String> = (0..*params).map(|i| format!("p{i}")).collect();
                self.line(format!("def {name}({}):", ps.join(", ")));
                self.scopes.last_mut().unwrap().funcs.push((name, *params));
                let enclosing_is_def = self.scope().in_def;
                let decl = match decl {
                    Decl::Nonlocal if !enclosing_is_def => Decl::None,
                    d => *d,
                };
                self.indent += 1;
                match decl {
                    Decl::Global => self.line("global g".into()),
                    Decl::Nonlocal => self.line("nonlocal a".into()),
                    Decl::None => {}
                }
                let nonlocal_a = matches!(decl, Decl::Nonlocal);
                for (v, init) in LOCALS.iter().zip(10..) {
                    if !(nonlocal_a && *v == "a") {
                        self.line(format!("{v} = {init}"));
                    }
                }
                self.scopes.push(Scope {
                    funcs: Vec::new(),
                    params: *params,
                    in_def: true,
                    global_decl: matches!(decl, Decl::Global),
                    nonlocal_a,
                });
                let saved_loops = std::mem::replace(&mut self.loops, 0);
                self.block(body);
                if let Some(e) = ret {
                    let e = self.exp(e);
                    self.line(format!("return {e}"));
                }
                self.loops = saved_loops;
                self.scopes.pop();
                self.indent -= 1;
            }
        }
    }
}
