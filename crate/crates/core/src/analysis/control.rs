//! The control transfer functions `next`, `true`, `false` and `err`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostic::Diagnostic;
use crate::syntax::{Instr, Location, Program, ProgramPoint, Stmt};

/// Static partial maps from locations to program points. `err` is the
/// identity on `1..=N` and is not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlMaps {
    pub next: BTreeMap<Location, ProgramPoint>,
    #[serde(rename = "true")]
    pub true_: BTreeMap<Location, ProgramPoint>,
    #[serde(rename = "false")]
    pub false_: BTreeMap<Location, ProgramPoint>,
}

impl ControlMaps {
    pub fn next(&self, loc: Location) -> Option<ProgramPoint> {
        self.next.get(&loc).copied()
    }

    pub fn on_true(&self, loc: Location) -> Option<ProgramPoint> {
        self.true_.get(&loc).copied()
    }

    pub fn on_false(&self, loc: Location) -> Option<ProgramPoint> {
        self.false_.get(&loc).copied()
    }

    /// Errors leave control where it is.
    pub fn err(&self, loc: Location) -> Location {
        loc
    }
}

/// Builds the control transfer functions. `break`/`continue` outside a
/// loop and `return` outside a function are static errors.
pub fn control_maps(p: &Program) -> Result<ControlMaps, Vec<Diagnostic>> {
    let (maps, diags) = build(p);
    if diags.is_empty() {
        Ok(maps)
    } else {
        Err(diags)
    }
}

pub(crate) fn build(p: &Program) -> (ControlMaps, Vec<Diagnostic>) {
    let mut b = Builder {
        program: p,
        maps: ControlMaps::default(),
        diags: Vec::new(),
    };
    b.block(p.body(), ProgramPoint::Line(p.end()), None, false);
    (b.maps, b.diags)
}

#[derive(Clone, Copy)]
struct Loop {
    head: Location,
    after: ProgramPoint,
}

struct Builder<'p> {
    program: &'p Program,
    maps: ControlMaps,
    diags: Vec<Diagnostic>,
}

fn entry(block: &[Stmt]) -> ProgramPoint {
    ProgramPoint::Line(block[0].head())
}

impl Builder<'_> {
    /// `follow` is where control goes after the last statement of `stmts`.
    fn block(&mut self, stmts: &[Stmt], follow: ProgramPoint, lp: Option<Loop>, in_def: bool) {
        for (i, s) in stmts.iter().enumerate() {
            let succ = stmts.get(i + 1).map_or(follow, |n| ProgramPoint::Line(n.head()));
            match s {
                Stmt::Simple(l) => self.simple(*l, succ, lp, in_def),
                Stmt::If { head, body, orelse } => {
                    self.maps.true_.insert(*head, entry(body));
                    let on_false = orelse.as_ref().map_or(succ, |arm| entry(&arm.body));
                    self.maps.false_.insert(*head, on_false);
                    self.block(body, succ, lp, in_def);
                    if let Some(arm) = orelse {
                        self.block(&arm.body, succ, lp, in_def);
                    }
                }
                Stmt::While { head, body } => {
                    self.maps.true_.insert(*head, entry(body));
                    self.maps.false_.insert(*head, succ);
                    let inner = Loop {
                        head: *head,
                        after: succ,
                    };
                    self.block(body, ProgramPoint::Line(*head), Some(inner), in_def);
                }
                Stmt::Def { head, body } => {
                    self.maps.next.insert(*head, succ);
                    self.block(body, ProgramPoint::Exit(*head), None, true);
                }
            }
        }
    }

    fn simple(&mut self, l: Location, succ: ProgramPoint, lp: Option<Loop>, in_def: bool) {
        match self.program.instr(l) {
            Instr::Break => match lp {
                Some(lp) => {
                    self.maps.next.insert(l, lp.after);
                }
                None => self.diags.push(Diagnostic::static_error(l.0, "break outside loop")),
            },
            Instr::Continue => match lp {
                Some(lp) => {
                    self.maps.next.insert(l, ProgramPoint::Line(lp.head));
                }
                None => self.diags.push(Diagnostic::static_error(l.0, "continue outside loop")),
            },
            Instr::Return(_) => {
                if !in_def {
                    self.diags
                        .push(Diagnostic::static_error(l.0, "return outside function"));
                }
            }
            _ => {
                self.maps.next.insert(l, succ);
            }
        }
    }
}
