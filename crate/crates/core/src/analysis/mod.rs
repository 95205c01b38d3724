//! Static artifacts computed before a program runs: lexical blocks, control
//! transfer functions, the structural abstraction and the control flow graph.

mod cfg;
mod control;
mod scope;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use cfg::{build_cfg, edge_target, Cfg, CfgEdge, CfgNode, EdgeLabel};
pub use control::{control_maps, ControlMaps};
pub use scope::{lexical_blocks, BlockId, ScopeInfo, Scopes};

use crate::diagnostic::{self, Diagnostic};
use crate::syntax::{Instr, Location, Program, ProgramPoint};
use scope::{DeclKind, Event};

/// Syntactic category of a location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Pass,
    Global,
    Nonlocal,
    Break,
    Continue,
    ExpAssign,
    CallAssign,
    If,
    Else,
    While,
    Def,
    Return,
    /// The end-of-program location `N + 1`.
    End,
    /// Implicit return point of a function that falls off its body.
    Exit,
}

impl Category {
    pub fn of(instr: &Instr) -> Category {
        match instr {
            Instr::Pass => Category::Pass,
            Instr::Global(_) => Category::Global,
            Instr::Nonlocal(_) => Category::Nonlocal,
            Instr::Break => Category::Break,
            Instr::Continue => Category::Continue,
            Instr::ExpAssign { .. } => Category::ExpAssign,
            Instr::CallAssign { .. } => Category::CallAssign,
            Instr::If(_) => Category::If,
            Instr::Else => Category::Else,
            Instr::While(_) => Category::While,
            Instr::Def { .. } => Category::Def,
            Instr::Return(_) => Category::Return,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Pass => "Pass",
            Category::Global => "Global",
            Category::Nonlocal => "Nonlocal",
            Category::Break => "Break",
            Category::Continue => "Continue",
            Category::ExpAssign => "ExpAssign",
            Category::CallAssign => "CallAssign",
            Category::If => "If",
            Category::Else => "Else",
            Category::While => "While",
            Category::Def => "Def",
            Category::Return => "Return",
            Category::End => "End",
            Category::Exit => "Exit",
        }
    }
}

pub(crate) fn category_at(p: &Program, point: ProgramPoint) -> Category {
    match point {
        ProgramPoint::Exit(_) => Category::Exit,
        ProgramPoint::Line(l) => match p.instruction_at(l) {
            Ok(i) => Category::of(i),
            Err(_) => Category::End,
        },
    }
}

/// Map from every location `1..=N+1` to its syntactic category.
pub type StructuralAbstraction = BTreeMap<Location, Category>;

pub fn structural_abstraction(p: &Program) -> StructuralAbstraction {
    (1..=p.len() + 1)
        .map(|n| (Location(n), category_at(p, ProgramPoint::line(n))))
        .collect()
}

/// All static errors of a program. An empty list means it can run.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let (scopes, facts, mut diags) = scope::analyze_blocks(p);
    diags.extend(control::build(p).1);

    for info in scopes.blocks() {
        let mut seen = BTreeSet::new();
        for param in &info.params {
            if !seen.insert(param) {
                diags.push(Diagnostic::static_error(
                    info.block.0,
                    format!("duplicate parameter '{param}'"),
                ));
            }
        }
    }

    for f in &facts {
        let info = scopes.get(f.block).expect("facts and scopes agree");
        let mut assigned: BTreeSet<&str> = BTreeSet::new();
        let mut declared: BTreeMap<&str, DeclKind> = BTreeMap::new();
        for (loc, ev) in &f.events {
            match ev {
                Event::Assign(name) => {
                    assigned.insert(name);
                }
                Event::Declare(kind, name) => {
                    let what = match kind {
                        DeclKind::Global => "global",
                        DeclKind::Nonlocal => "nonlocal",
                    };
                    if assigned.contains(name.as_str()) {
                        diags.push(Diagnostic::static_error(
                            loc.0,
                            format!("name '{name}' is assigned before {what} declaration"),
                        ));
                    }
                    if info.params.iter().any(|p| p == name) {
                        diags.push(Diagnostic::static_error(
                            loc.0,
                            format!("name '{name}' is parameter and {what}"),
                        ));
                    }
                    match declared.insert(name, *kind) {
                        Some(prev) if prev != *kind => diags.push(Diagnostic::static_error(
                            loc.0,
                            format!("name '{name}' is both nonlocal and global"),
                        )),
                        _ => {}
                    }
                }
            }
        }
    }
    diagnostic::sort(&mut diags);
    diags
}

/// Every static artifact of a validated program.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub scopes: Scopes,
    pub control: ControlMaps,
    pub cfg: Cfg,
    pub abstraction: StructuralAbstraction,
}

impl Analysis {
    pub fn new(p: &Program) -> Result<Analysis, Vec<Diagnostic>> {
        let diags = validate(p);
        if !diags.is_empty() {
            return Err(diags);
        }
        let scopes = lexical_blocks(p)?;
        let control = control_maps(p)?;
        let cfg = build_cfg(p, &control);
        Ok(Analysis {
            scopes,
            control,
            cfg,
            abstraction: structural_abstraction(p),
        })
    }
}
