//! Tokenizing and parsing SimpliPy source into a line-indexed [`Program`].

mod ast;
pub mod lexer;
pub(crate) mod surface;

pub use ast::{Bop, Const, ElseArm, Exp, Instr, Location, OutOfRange, Program, ProgramPoint, Stmt, Uop};
pub use lexer::{detect_indent_width, tokenize, LexedLine, Token, DEFAULT_INDENT_WIDTH};

pub(crate) use ast::{quote_str, render_float};

use crate::diagnostic::{self, Diagnostic};
use surface::{LineError, LineErrorKind, SurfaceExp, SurfaceLine};

/// Parses a complete SimpliPy program.
///
/// Every physical line must hold exactly one instruction: blank lines and
/// comments are rejected (the simplifier strips them). On failure all
/// line-level diagnostics are returned, sorted by position.
pub fn parse_program(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let width = detect_indent_width(source);
    let lines = tokenize(source, width)?;
    let mut diags = Vec::new();
    let mut instrs = Vec::with_capacity(lines.len());
    for l in &lines {
        if l.is_empty() {
            let what = if l.comment { "comment line" } else { "blank line" };
            diags.push(Diagnostic::parse(
                l.line,
                0,
                format!("{what} is not an instruction; run the simplifier to strip blank lines and comments"),
            ));
            continue;
        }
        if l.comment {
            diags.push(Diagnostic::parse(
                l.line,
                0,
                "comments are not allowed; run the simplifier to strip them",
            ));
            continue;
        }
        match surface::parse_line(&l.tokens).and_then(lower_line) {
            Ok(ins) => instrs.push(ins),
            Err(e) => diags.push(Diagnostic::parse(l.line, e.column, e.message)),
        }
    }
    if !diags.is_empty() {
        diagnostic::sort(&mut diags);
        return Err(diags);
    }
    let items: Vec<IndentItem> = lines
        .iter()
        .zip(&instrs)
        .map(|(l, ins)| IndentItem {
            line: l.line,
            indent: l.indent,
            header: ins.is_header(),
        })
        .collect();
    let tree = build_indent_tree(&items).map_err(|d| vec![d])?;
    let body = to_stmts(&tree, &instrs).map_err(|d| vec![d])?;
    Ok(Program {
        indents: lines.iter().map(|l| l.indent).collect(),
        source_lines: source.lines().map(str::to_string).collect(),
        instrs,
        body,
    })
}

fn call_error() -> LineError {
    LineError {
        column: 0,
        kind: LineErrorKind::Syntax,
        message: "call not allowed inside expression".to_string(),
    }
}

fn plain(e: &SurfaceExp) -> Result<Exp, LineError> {
    e.to_exp().ok_or_else(call_error)
}

fn lower_line(line: SurfaceLine) -> Result<Instr, LineError> {
    let err = |message: &str| LineError {
        column: 0,
        kind: LineErrorKind::Syntax,
        message: message.to_string(),
    };
    Ok(match line {
        SurfaceLine::Pass => Instr::Pass,
        SurfaceLine::Global(names) => Instr::Global(names),
        SurfaceLine::Nonlocal(names) => Instr::Nonlocal(names),
        SurfaceLine::Break => Instr::Break,
        SurfaceLine::Continue => Instr::Continue,
        SurfaceLine::Assign { target, value } => match value {
            SurfaceExp::Call { callee, args } => Instr::CallAssign {
                target,
                callee,
                args: args.iter().map(plain).collect::<Result<_, _>>()?,
            },
            other => Instr::ExpAssign {
                target,
                rhs: plain(&other)?,
            },
        },
        SurfaceLine::AugAssign { .. } => {
            return Err(err(
                "augmented assignment is not an instruction; write `x = x + e` or run the simplifier",
            ))
        }
        SurfaceLine::Expr(SurfaceExp::Call { .. }) => {
            return Err(err(
                "call statements need a target, as in `r = f(x)`; the simplifier adds one",
            ))
        }
        SurfaceLine::Expr(_) => return Err(err("expression statements are not instructions")),
        SurfaceLine::Return(None) => return Err(err("bare return; write `return None`")),
        SurfaceLine::Return(Some(e)) => Instr::Return(plain(&e)?),
        SurfaceLine::If(c) => Instr::If(plain(&c)?),
        SurfaceLine::Elif(_) => return Err(err("elif is not an instruction; nest if/else or run the simplifier")),
        SurfaceLine::Else => Instr::Else,
        SurfaceLine::While(c) => Instr::While(plain(&c)?),
        SurfaceLine::Def { name, params } => Instr::Def { name, params },
    })
}

pub(crate) struct IndentItem {
    pub line: u32,
    pub indent: usize,
    pub header: bool,
}

/// A line together with the block nested under it. `index` points into the
/// item list.
#[derive(Debug)]
pub(crate) struct IndentNode {
    pub index: usize,
    pub children: Vec<IndentNode>,
}

/// Recovers block nesting from indentation levels. Each header must be
/// followed by a block exactly one level deeper; nothing else may indent.
pub(crate) fn build_indent_tree(items: &[IndentItem]) -> Result<Vec<IndentNode>, Diagnostic> {
    let mut pos = 0;
    let nodes = indent_block(items, &mut pos, 0)?;
    if let Some(item) = items.get(pos) {
        return Err(Diagnostic::parse(item.line, 1, "unexpected indent"));
    }
    Ok(nodes)
}

fn indent_block(items: &[IndentItem], pos: &mut usize, level: usize) -> Result<Vec<IndentNode>, Diagnostic> {
    let mut nodes = Vec::new();
    while let Some(item) = items.get(*pos) {
        if item.indent < level {
            break;
        }
        if item.indent > level {
            return Err(Diagnostic::parse(item.line, 1, "unexpected indent"));
        }
        let index = *pos;
        *pos += 1;
        let mut children = Vec::new();
        if item.header {
            match items.get(*pos) {
                Some(next) if next.indent == level + 1 => {
                    children = indent_block(items, pos, level + 1)?;
                }
                _ => {
                    return Err(Diagnostic::parse(
                        item.line,
                        0,
                        "expected an indented block after this line",
                    ))
                }
            }
        }
        nodes.push(IndentNode { index, children });
    }
    Ok(nodes)
}

fn to_stmts(nodes: &[IndentNode], instrs: &[Instr]) -> Result<Vec<Stmt>, Diagnostic> {
    let mut out: Vec<Stmt> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let head = Location(node.index as u32 + 1);
        let stmt = match &instrs[node.index] {
            Instr::If(_) => Stmt::If {
                head,
                body: to_stmts(&node.children, instrs)?,
                orelse: None,
            },
            Instr::While(_) => Stmt::While {
                head,
                body: to_stmts(&node.children, instrs)?,
            },
            Instr::Def { .. } => Stmt::Def {
                head,
                body: to_stmts(&node.children, instrs)?,
            },
            Instr::Else => {
                let arm = ElseArm {
                    head,
                    body: to_stmts(&node.children, instrs)?,
                };
                match out.last_mut() {
                    Some(Stmt::If {
                        orelse: slot @ None, ..
                    }) => {
                        *slot = Some(arm);
                        continue;
                    }
                    Some(Stmt::While { .. }) => {
                        return Err(Diagnostic::parse(head.0, 1, "while-else unsupported"));
                    }
                    _ => {
                        return Err(Diagnostic::parse(
                            head.0,
                            1,
                            "else without a matching if at the same depth",
                        ));
                    }
                }
            }
            _ => Stmt::Simple(head),
        };
        out.push(stmt);
    }
    Ok(out)
}
