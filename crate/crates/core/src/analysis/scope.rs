//! Lexical blocks and their declared-variable sets.
//!
//! Only the top level and `def` bodies introduce scopes; `if`, `else` and
//! `while` bodies belong to the enclosing block.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagnostic::Diagnostic;
use crate::syntax::{Instr, Location, Program, ProgramPoint, Stmt};

/// Identifies a lexical block: 0 is the top level, any other value is the
/// line of the `def` header that owns the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl BlockId {
    pub const TOP: BlockId = BlockId(0);

    pub fn is_top(self) -> bool {
        self == BlockId::TOP
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeInfo {
    pub block: BlockId,
    /// Inclusive line range. For a function this runs from the `def` header
    /// to the last line of its body; the header itself belongs to the parent.
    pub extent: (Location, Location),
    pub parent: Option<BlockId>,
    pub params: Vec<String>,
    pub locals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
    pub globals: BTreeSet<String>,
}

impl ScopeInfo {
    pub fn is_local(&self, name: &str) -> bool {
        self.locals.contains(name)
    }

    pub fn is_nonlocal(&self, name: &str) -> bool {
        self.nonlocals.contains(name)
    }

    pub fn is_global(&self, name: &str) -> bool {
        self.globals.contains(name)
    }
}

/// All lexical blocks of a program, in order of their headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scopes {
    blocks: Vec<ScopeInfo>,
    index: HashMap<BlockId, usize>,
    /// Owning block of each line `1..=N`.
    owner: Vec<BlockId>,
}

impl Scopes {
    pub fn blocks(&self) -> &[ScopeInfo] {
        &self.blocks
    }

    pub fn get(&self, block: BlockId) -> Option<&ScopeInfo> {
        self.index.get(&block).map(|&i| &self.blocks[i])
    }

    /// The block whose code is executing at `point`.
    pub fn block_of(&self, point: ProgramPoint) -> BlockId {
        match point {
            ProgramPoint::Exit(def) => BlockId(def.0),
            ProgramPoint::Line(l) => self
                .owner
                .get((l.0 as usize).wrapping_sub(1))
                .copied()
                .unwrap_or(BlockId::TOP),
        }
    }
}

impl Serialize for Scopes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DeclKind {
    Global,
    Nonlocal,
}

/// A binding-relevant event in a block, in source order.
#[derive(Debug, Clone)]
pub(crate) enum Event {
    Assign(String),
    Declare(DeclKind, String),
}

/// Per-block facts used by validation.
#[derive(Debug, Clone)]
pub(crate) struct BlockFacts {
    pub block: BlockId,
    pub events: Vec<(Location, Event)>,
}

/// Computes every lexical block. Nonlocal declarations that do not resolve
/// to an enclosing function's local, and nonlocal declarations at the top
/// level, are reported as static errors.
pub fn lexical_blocks(p: &Program) -> Result<Scopes, Vec<Diagnostic>> {
    let (scopes, _, diags) = analyze_blocks(p);
    if diags.is_empty() {
        Ok(scopes)
    } else {
        Err(diags)
    }
}

pub(crate) fn analyze_blocks(p: &Program) -> (Scopes, Vec<BlockFacts>, Vec<Diagnostic>) {
    let mut cx = Collector {
        program: p,
        blocks: Vec::new(),
        facts: Vec::new(),
        owner: vec![BlockId::TOP; p.len() as usize],
        diags: Vec::new(),
    };
    let extent = (Location(1), Location(p.len()));
    cx.collect(BlockId::TOP, None, extent, Vec::new(), p.body());
    let index = cx.blocks.iter().enumerate().map(|(i, b)| (b.block, i)).collect();
    let mut scopes = Scopes {
        blocks: cx.blocks,
        index,
        owner: cx.owner,
    };
    let mut diags = cx.diags;
    check_nonlocals(&mut scopes, &cx.facts, &mut diags);
    (scopes, cx.facts, diags)
}

struct Collector<'p> {
    program: &'p Program,
    blocks: Vec<ScopeInfo>,
    facts: Vec<BlockFacts>,
    owner: Vec<BlockId>,
    diags: Vec<Diagnostic>,
}

impl<'p> Collector<'p> {
    fn collect(
        &mut self,
        block: BlockId,
        parent: Option<BlockId>,
        extent: (Location, Location),
        params: Vec<String>,
        body: &'p [Stmt],
    ) {
        let slot = self.blocks.len();
        self.blocks.push(ScopeInfo {
            block,
            extent,
            parent,
            params: params.clone(),
            locals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
            globals: BTreeSet::new(),
        });
        self.facts.push(BlockFacts {
            block,
            events: Vec::new(),
        });

        let mut events = Vec::new();
        let mut nested = Vec::new();
        self.walk(block, body, &mut events, &mut nested);

        let mut assigned: BTreeSet<String> = params.iter().cloned().collect();
        let mut nonlocals = BTreeSet::new();
        let mut globals = BTreeSet::new();
        for (loc, ev) in &events {
            match ev {
                Event::Assign(name) => {
                    assigned.insert(name.clone());
                }
                Event::Declare(DeclKind::Global, name) => {
                    globals.insert(name.clone());
                }
                Event::Declare(DeclKind::Nonlocal, name) => {
                    if block.is_top() {
                        self.diags.push(Diagnostic::static_error(
                            loc.0,
                            format!("nonlocal declaration of '{name}' not allowed at module level"),
                        ));
                    } else {
                        nonlocals.insert(name.clone());
                    }
                }
            }
        }
        if block.is_top() {
            // Everything at the top level is already global.
            globals.clear();
        }
        let info = &mut self.blocks[slot];
        info.locals = assigned
            .into_iter()
            .filter(|n| !nonlocals.contains(n) && !globals.contains(n))
            .collect();
        info.nonlocals = nonlocals;
        info.globals = globals;
        self.facts[slot].events = events;

        for (head, def_params, def_body, last) in nested {
            self.collect(BlockId(head.0), Some(block), (head, last), def_params, def_body);
        }
    }

    #[allow(clippy::type_complexity)]
    fn walk(
        &mut self,
        block: BlockId,
        stmts: &'p [Stmt],
        events: &mut Vec<(Location, Event)>,
        nested: &mut Vec<(Location, Vec<String>, &'p [Stmt], Location)>,
    ) {
        for s in stmts {
            let head = s.head();
            self.owner[head.0 as usize - 1] = block;
            match s {
                Stmt::Simple(l) => match self.program.instr(*l) {
                    Instr::ExpAssign { target, .. } | Instr::CallAssign { target, .. } => {
                        events.push((*l, Event::Assign(target.clone())));
                    }
                    Instr::Global(names) => {
                        events.extend(names.iter().map(|n| (*l, Event::Declare(DeclKind::Global, n.clone()))));
                    }
                    Instr::Nonlocal(names) => {
                        events.extend(
                            names
                                .iter()
                                .map(|n| (*l, Event::Declare(DeclKind::Nonlocal, n.clone()))),
                        );
                    }
                    _ => {}
                },
                Stmt::If { body, orelse, .. } => {
                    self.walk(block, body, events, nested);
                    if let Some(arm) = orelse {
                        self.owner[arm.head.0 as usize - 1] = block;
                        self.walk(block, &arm.body, events, nested);
                    }
                }
                Stmt::While { body, .. } => self.walk(block, body, events, nested),
                Stmt::Def { head, body } => {
                    let Instr::Def { name, params } = self.program.instr(*head) else {
                        unreachable!("def statement without a def header");
                    };
                    events.push((*head, Event::Assign(name.clone())));
                    nested.push((*head, params.clone(), body, s.last_line()));
                }
            }
        }
    }
}

fn check_nonlocals(scopes: &mut Scopes, facts: &[BlockFacts], diags: &mut Vec<Diagnostic>) {
    for f in facts {
        for (loc, ev) in &f.events {
            let Event::Declare(DeclKind::Nonlocal, name) = ev else {
                continue;
            };
            if f.block.is_top() {
                continue;
            }
            let mut cur = scopes.get(f.block).and_then(|b| b.parent);
            let mut found = false;
            while let Some(b) = cur.filter(|b| !b.is_top()) {
                let info = scopes.get(b).expect("parent block exists");
                if info.is_local(name) {
                    found = true;
                    break;
                }
                if info.is_global(name) {
                    break;
                }
                cur = info.parent;
            }
            if !found {
                diags.push(Diagnostic::static_error(
                    loc.0,
                    format!("no binding for nonlocal '{name}' found in an enclosing function"),
                ));
            }
        }
    }
}
