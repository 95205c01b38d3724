//! Best-effort rewriting of ordinary Python into SimpliPy.
//!
//! Rules run in a fixed order: strip blank lines and comments, expand
//! augmented assignment, desugar `elif`, hoist calls out of expressions into
//! `_tN` temporaries, give bare calls a target, turn bare `return` into
//! `return None`, renumber. The result is checked with the core parser.
//!
//! Calls are hoisted innermost first and left to right. An operand that is
//! evaluated before a hoisted call is copied into a temporary first when it
//! reads a name that some function declares `global` or `nonlocal`, since
//! only those can be rebound by the call. `and`/`or` whose right operand
//! calls become an `if` on a temporary, and a `while` whose condition calls
//! becomes `while True:` with the test and a `break` at the top of the body.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagnostic::{codes, Diagnostic};
use crate::syntax::lexer::{detect_indent_width, tokenize};
use crate::syntax::surface::{self, LineErrorKind, SurfaceExp, SurfaceLine};
use crate::syntax::{build_indent_tree, parse_program, Bop, Const, Exp, IndentItem, IndentNode, Instr, Uop};

pub mod rules {
    pub const STRIP: &str = "strip-blank-lines-and-comments";
    pub const AUGMENTED: &str = "expand-augmented-assignment";
    pub const ELIF: &str = "desugar-elif";
    pub const HOIST: &str = "hoist-calls";
    pub const SHORT_CIRCUIT: &str = "short-circuit-calls";
    pub const WHILE_CALL: &str = "while-condition-calls";
    pub const BARE_CALL: &str = "bare-call-statement";
    pub const BARE_EXPR: &str = "bare-expression-statement";
    pub const BARE_RETURN: &str = "bare-return";
    pub const RENUMBER: &str = "renumber-lines";

    /// Pipeline order, used to sort the applied list.
    pub const ORDER: [&str; 10] = [
        STRIP,
        AUGMENTED,
        ELIF,
        HOIST,
        SHORT_CIRCUIT,
        WHILE_CALL,
        BARE_CALL,
        BARE_EXPR,
        BARE_RETURN,
        RENUMBER,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimplifyResult {
    /// SimpliPy source, absent when any error diagnostic was produced.
    pub output: Option<String>,
    pub applied: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    /// Output line to original line.
    pub line_map: BTreeMap<u32, u32>,
}

impl SimplifyResult {
    fn failed(mut diagnostics: Vec<Diagnostic>) -> Self {
        crate::diagnostic::sort(&mut diagnostics);
        SimplifyResult {
            output: None,
            applied: Vec::new(),
            diagnostics,
            line_map: BTreeMap::new(),
        }
    }
}

/// Block structure of the input with `elif` chains still intact.
enum Node {
    Simple(u32, SurfaceLine),
    If {
        line: u32,
        cond: SurfaceExp,
        body: Vec<Node>,
        elifs: Vec<(u32, SurfaceExp, Vec<Node>)>,
        orelse: Option<(u32, Vec<Node>)>,
    },
    While {
        line: u32,
        cond: SurfaceExp,
        body: Vec<Node>,
    },
    Def {
        line: u32,
        name: String,
        params: Vec<String>,
        body: Vec<Node>,
    },
}

pub fn simplify(source: &str) -> SimplifyResult {
    let width = detect_indent_width(source);
    let lexed = match tokenize(source, width) {
        Ok(l) => l,
        Err(d) => return SimplifyResult::failed(d),
    };
    let mut applied = BTreeSet::new();
    let mut diags = Vec::new();
    let mut lines = Vec::new();
    let mut items = Vec::new();
    for l in &lexed {
        if l.comment || l.is_empty() {
            applied.insert(rules::STRIP);
        }
        if l.is_empty() {
            continue;
        }
        match surface::parse_line(&l.tokens) {
            Ok(sl) => {
                items.push(IndentItem {
                    line: l.line,
                    indent: l.indent,
                    header: sl.is_header(),
                });
                lines.push(sl);
            }
            Err(e) => {
                let code = match e.kind {
                    LineErrorKind::Unsupported(_) => codes::UNSUPPORTED,
                    LineErrorKind::Syntax => codes::PARSE,
                };
                diags.push(Diagnostic::error(code, l.line, e.column, e.message));
            }
        }
    }
    if !diags.is_empty() {
        return SimplifyResult::failed(diags);
    }
    let tree = match build_indent_tree(&items) {
        Ok(t) => t,
        Err(d) => return SimplifyResult::failed(vec![d]),
    };
    let mut slots: Vec<Option<SurfaceLine>> = lines.into_iter().map(Some).collect();
    let nodes = match to_nodes(&tree, &items, &mut slots) {
        Ok(n) => n,
        Err(d) => return SimplifyResult::failed(vec![d]),
    };

    let mut names = BTreeSet::new();
    let mut declared = BTreeSet::new();
    collect_names(&nodes, &mut names, &mut declared);
    let mut em = Emitter {
        out: Vec::new(),
        names,
        declared,
        counter: 0,
        applied,
    };
    em.block(&nodes, 0);

    let mut text = Vec::with_capacity(em.out.len());
    let mut line_map = BTreeMap::new();
    for (i, (indent, instr, orig)) in em.out.iter().enumerate() {
        text.push(format!("{}{}", "    ".repeat(*indent), instr));
        line_map.insert(i as u32 + 1, *orig);
    }
    if line_map.iter().any(|(k, v)| k != v) {
        em.applied.insert(rules::RENUMBER);
    }
    let output = text.join("\n");
    if let Err(errs) = parse_program(&output) {
        let diags = errs
            .into_iter()
            .map(|d| {
                let orig = line_map.get(&d.line).copied().unwrap_or(d.line);
                Diagnostic::error(
                    codes::INTERNAL,
                    orig,
                    0,
                    format!("simplified program does not parse: {}", d.message),
                )
            })
            .collect();
        return SimplifyResult::failed(diags);
    }
    let applied = rules::ORDER
        .iter()
        .filter(|r| em.applied.contains(*r))
        .map(|r| r.to_string())
        .collect();
    SimplifyResult {
        output: Some(output),
        applied,
        diagnostics: Vec::new(),
        line_map,
    }
}

fn to_nodes(
    tree: &[IndentNode],
    items: &[IndentItem],
    slots: &mut [Option<SurfaceLine>],
) -> Result<Vec<Node>, Diagnostic> {
    let mut out: Vec<Node> = Vec::new();
    for n in tree {
        let line = items[n.index].line;
        let sl = slots[n.index].take().expect("each line is visited once");
        let node = match sl {
            SurfaceLine::If(cond) => Node::If {
                line,
                cond,
                body: to_nodes(&n.children, items, slots)?,
                elifs: Vec::new(),
                orelse: None,
            },
            SurfaceLine::Elif(cond) => {
                let body = to_nodes(&n.children, items, slots)?;
                match out.last_mut() {
                    Some(Node::If {
                        elifs, orelse: None, ..
                    }) => {
                        elifs.push((line, cond, body));
                        continue;
                    }
                    _ => {
                        return Err(Diagnostic::parse(
                            line,
                            1,
                            "elif without a matching if at the same depth",
                        ))
                    }
                }
            }
            SurfaceLine::Else => {
                let body = to_nodes(&n.children, items, slots)?;
                match out.last_mut() {
                    Some(Node::If {
                        orelse: slot @ None, ..
                    }) => {
                        *slot = Some((line, body));
                        continue;
                    }
                    Some(Node::While { .. }) => {
                        return Err(Diagnostic::error(codes::UNSUPPORTED, line, 1, "while-else unsupported"))
                    }
                    _ => {
                        return Err(Diagnostic::parse(
                            line,
                            1,
                            "else without a matching if at the same depth",
                        ))
                    }
                }
            }
            SurfaceLine::While(cond) => Node::While {
                line,
                cond,
                body: to_nodes(&n.children, items, slots)?,
            },
            SurfaceLine::Def { name, params } => Node::Def {
                line,
                name,
                params,
                body: to_nodes(&n.children, items, slots)?,
            },
            other => Node::Simple(line, other),
        };
        out.push(node);
    }
    Ok(out)
}

fn exp_names(e: &SurfaceExp, names: &mut BTreeSet<String>) {
    match e {
        SurfaceExp::Const(_) => {}
        SurfaceExp::Var(v) => {
            names.insert(v.clone());
        }
        SurfaceExp::Unary(_, e) => exp_names(e, names),
        SurfaceExp::Binary(_, l, r) => {
            exp_names(l, names);
            exp_names(r, names);
        }
        SurfaceExp::Call { callee, args } => {
            names.insert(callee.clone());
            for a in args {
                exp_names(a, names);
            }
        }
    }
}

fn collect_names(nodes: &[Node], names: &mut BTreeSet<String>, declared: &mut BTreeSet<String>) {
    for n in nodes {
        match n {
            Node::Simple(_, sl) => match sl {
                SurfaceLine::Global(v) | SurfaceLine::Nonlocal(v) => {
                    names.extend(v.iter().cloned());
                    declared.extend(v.iter().cloned());
                }
                SurfaceLine::Assign { target, value } | SurfaceLine::AugAssign { target, value, .. } => {
                    names.insert(target.clone());
                    exp_names(value, names);
                }
                SurfaceLine::Expr(e) | SurfaceLine::Return(Some(e)) => exp_names(e, names),
                _ => {}
            },
            Node::If {
                cond,
                body,
                elifs,
                orelse,
                ..
            } => {
                exp_names(cond, names);
                collect_names(body, names, declared);
                for (_, c, b) in elifs {
                    exp_names(c, names);
                    collect_names(b, names, declared);
                }
                if let Some((_, b)) = orelse {
                    collect_names(b, names, declared);
                }
            }
            Node::While { cond, body, .. } => {
                exp_names(cond, names);
                collect_names(body, names, declared);
            }
            Node::Def { name, params, body, .. } => {
                names.insert(name.clone());
                names.extend(params.iter().cloned());
                collect_names(body, names, declared);
            }
        }
    }
}

struct Emitter {
    out: Vec<(usize, Instr, u32)>,
    /// Every identifier in the input; temporaries avoid these.
    names: BTreeSet<String>,
    /// Names some block declares `global` or `nonlocal`.
    declared: BTreeSet<String>,
    counter: usize,
    applied: BTreeSet<&'static str>,
}

impl Emitter {
    fn fresh(&mut self) -> String {
        loop {
            let name = format!("_t{}", self.counter);
            self.counter += 1;
            if !self.names.contains(&name) {
                return name;
            }
        }
    }

    fn push(&mut self, indent: usize, instr: Instr, line: u32) {
        self.out.push((indent, instr, line));
    }

    fn block(&mut self, nodes: &[Node], indent: usize) {
        for n in nodes {
            self.node(n, indent);
        }
    }

    fn node(&mut self, n: &Node, indent: usize) {
        match n {
            Node::Simple(line, sl) => self.simple(*line, sl, indent),
            Node::If {
                line,
                cond,
                body,
                elifs,
                orelse,
            } => self.if_chain(*line, cond, body, elifs, orelse.as_ref(), indent),
            Node::While { line, cond, body } => {
                if cond.contains_call() {
                    self.applied.insert(rules::WHILE_CALL);
                    self.push(indent, Instr::While(Exp::Const(Const::Bool(true))), *line);
                    let c = self.hoist(cond, indent + 1, *line);
                    self.push(indent + 1, Instr::If(negate(c)), *line);
                    self.push(indent + 2, Instr::Break, *line);
                } else {
                    let c = cond.to_exp().expect("call-free");
                    self.push(indent, Instr::While(c), *line);
                }
                self.block(body, indent + 1);
            }
            Node::Def {
                line,
                name,
                params,
                body,
            } => {
                self.push(
                    indent,
                    Instr::Def {
                        name: name.clone(),
                        params: params.clone(),
                    },
                    *line,
                );
                self.block(body, indent + 1);
            }
        }
    }

    fn if_chain(
        &mut self,
        line: u32,
        cond: &SurfaceExp,
        body: &[Node],
        elifs: &[(u32, SurfaceExp, Vec<Node>)],
        orelse: Option<&(u32, Vec<Node>)>,
        indent: usize,
    ) {
        let c = self.hoist(cond, indent, line);
        self.push(indent, Instr::If(c), line);
        self.block(body, indent + 1);
        match elifs.split_first() {
            Some(((eline, econd, ebody), rest)) => {
                self.applied.insert(rules::ELIF);
                self.push(indent, Instr::Else, *eline);
                self.if_chain(*eline, econd, ebody, rest, orelse, indent + 1);
            }
            None => {
                if let Some((eline, ebody)) = orelse {
                    self.push(indent, Instr::Else, *eline);
                    self.block(ebody, indent + 1);
                }
            }
        }
    }

    fn simple(&mut self, line: u32, sl: &SurfaceLine, indent: usize) {
        match sl {
            SurfaceLine::Pass => self.push(indent, Instr::Pass, line),
            SurfaceLine::Global(v) => self.push(indent, Instr::Global(v.clone()), line),
            SurfaceLine::Nonlocal(v) => self.push(indent, Instr::Nonlocal(v.clone()), line),
            SurfaceLine::Break => self.push(indent, Instr::Break, line),
            SurfaceLine::Continue => self.push(indent, Instr::Continue, line),
            SurfaceLine::Assign { target, value } => self.assign(target, value, indent, line),
            SurfaceLine::AugAssign { target, op, value } => {
                self.applied.insert(rules::AUGMENTED);
                let full = SurfaceExp::Binary(
                    op.bop(),
                    Box::new(SurfaceExp::Var(target.clone())),
                    Box::new(value.clone()),
                );
                self.assign(target, &full, indent, line);
            }
            SurfaceLine::Expr(e) => {
                let rule = if matches!(e, SurfaceExp::Call { .. }) {
                    rules::BARE_CALL
                } else {
                    rules::BARE_EXPR
                };
                self.applied.insert(rule);
                let t = self.fresh();
                self.assign(&t, e, indent, line);
            }
            SurfaceLine::Return(None) => {
                self.applied.insert(rules::BARE_RETURN);
                self.push(indent, Instr::Return(Exp::Const(Const::None)), line);
            }
            SurfaceLine::Return(Some(e)) => {
                let v = self.hoist(e, indent, line);
                self.push(indent, Instr::Return(v), line);
            }
            SurfaceLine::If(_)
            | SurfaceLine::Elif(_)
            | SurfaceLine::Else
            | SurfaceLine::While(_)
            | SurfaceLine::Def { .. } => {
                unreachable!("headers are structured nodes")
            }
        }
    }

    /// Emits `target = value`, keeping a top-level call as the call itself.
    fn assign(&mut self, target: &str, value: &SurfaceExp, indent: usize, line: u32) {
        match value {
            SurfaceExp::Call { callee, args } => {
                let args = self.hoist_args(args, indent, line);
                self.push(
                    indent,
                    Instr::CallAssign {
                        target: target.to_string(),
                        callee: callee.clone(),
                        args,
                    },
                    line,
                );
            }
            other => {
                let rhs = self.hoist(other, indent, line);
                self.push(
                    indent,
                    Instr::ExpAssign {
                        target: target.to_string(),
                        rhs,
                    },
                    line,
                );
            }
        }
    }

    fn hoist_args(&mut self, args: &[SurfaceExp], indent: usize, line: u32) -> Vec<Exp> {
        let mut out = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let mut e = self.hoist(a, indent, line);
            if args[i + 1..].iter().any(SurfaceExp::contains_call) {
                e = self.snapshot(e, indent, line);
            }
            out.push(e);
        }
        out
    }

    /// Copies `e` into a temporary if a later call could change its value.
    fn snapshot(&mut self, e: Exp, indent: usize, line: u32) -> Exp {
        if !e.vars().iter().any(|v| self.declared.contains(*v)) {
            return e;
        }
        let t = self.fresh();
        self.push(
            indent,
            Instr::ExpAssign {
                target: t.clone(),
                rhs: e,
            },
            line,
        );
        Exp::Var(t)
    }

    /// Returns a call-free expression equal to `e`, emitting the hoisted
    /// calls before it.
    fn hoist(&mut self, e: &SurfaceExp, indent: usize, line: u32) -> Exp {
        match e {
            SurfaceExp::Const(c) => Exp::Const(c.clone()),
            SurfaceExp::Var(v) => Exp::Var(v.clone()),
            SurfaceExp::Unary(op, inner) => Exp::Unary(*op, Box::new(self.hoist(inner, indent, line))),
            SurfaceExp::Binary(op @ (Bop::And | Bop::Or), l, r) if r.contains_call() => {
                self.applied.insert(rules::SHORT_CIRCUIT);
                let t = self.fresh();
                self.assign(&t, l, indent, line);
                let test = if *op == Bop::And {
                    Exp::Var(t.clone())
                } else {
                    negate(Exp::Var(t.clone()))
                };
                self.push(indent, Instr::If(test), line);
                self.assign(&t, r, indent + 1, line);
                Exp::Var(t)
            }
            SurfaceExp::Binary(op, l, r) => {
                let mut lv = self.hoist(l, indent, line);
                if r.contains_call() {
                    lv = self.snapshot(lv, indent, line);
                }
                let rv = self.hoist(r, indent, line);
                Exp::Binary(*op, Box::new(lv), Box::new(rv))
            }
            SurfaceExp::Call { callee, args } => {
                self.applied.insert(rules::HOIST);
                let args = self.hoist_args(args, indent, line);
                let t = self.fresh();
                self.push(
                    indent,
                    Instr::CallAssign {
                        target: t.clone(),
                        callee: callee.clone(),
                        args,
                    },
                    line,
                );
                Exp::Var(t)
            }
        }
    }
}

fn negate(e: Exp) -> Exp {
    Exp::Unary(Uop::Not, Box::new(e))
}
