use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 1-based physical line number. `N + 1` is the end-of-program location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Location(pub u32);

impl Location {
    pub fn get(self) -> u32 {
        self.0
    }

    pub fn next_line(self) -> Location {
        Location(self.0 + 1)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point control can be at: a source line (including the end-of-program
/// location), or the implicit return point of a function whose body falls
/// off its last line.
///
/// In JSON a line is its number and a function exit is the negated line of
/// the owning `def` header, so `-3` is "fell off the end of the def at 3".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProgramPoint {
    Line(Location),
    Exit(Location),
}

impl ProgramPoint {
    pub fn line(n: u32) -> Self {
        ProgramPoint::Line(Location(n))
    }

    pub fn as_line(self) -> Option<Location> {
        match self {
            ProgramPoint::Line(l) => Some(l),
            ProgramPoint::Exit(_) => None,
        }
    }

    pub fn to_i64(self) -> i64 {
        match self {
            ProgramPoint::Line(l) => l.0 as i64,
            ProgramPoint::Exit(d) => -(d.0 as i64),
        }
    }

    pub fn from_i64(v: i64) -> Option<Self> {
        match v {
            v if v > 0 && v <= u32::MAX as i64 => Some(ProgramPoint::line(v as u32)),
            v if v < 0 && -v <= u32::MAX as i64 => Some(ProgramPoint::Exit(Location((-v) as u32))),
            _ => None,
        }
    }
}

impl From<Location> for ProgramPoint {
    fn from(l: Location) -> Self {
        ProgramPoint::Line(l)
    }
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramPoint::Line(l) => write!(f, "{l}"),
            ProgramPoint::Exit(d) => write!(f, "exit@{d}"),
        }
    }
}

impl Serialize for ProgramPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.to_i64())
    }
}

impl<'de> Deserialize<'de> for ProgramPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        ProgramPoint::from_i64(v).ok_or_else(|| serde::de::Error::custom(format!("invalid program point {v}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Const {
    Int(BigInt),
    Float(f64),
    Bool(bool),
    Str(String),
    None,
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Float(x) => write!(f, "{}", render_float(*x)),
            Const::Bool(true) => f.write_str("True"),
            Const::Bool(false) => f.write_str("False"),
            Const::Str(s) => write!(f, "{}", quote_str(s)),
            Const::None => f.write_str("None"),
        }
    }
}

/// Renders a float so that the tokenizer reads back the same value.
pub(crate) fn render_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub(crate) fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Uop {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bop {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
    #[serde(rename = "//")]
    FloorDiv,
    #[serde(rename = "%")]
    Mod,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "and")]
    And,
    #[serde(rename = "or")]
    Or,
}

impl Bop {
    pub fn symbol(self) -> &'static str {
        match self {
            Bop::Add => "+",
            Bop::Sub => "-",
            Bop::Mul => "*",
            Bop::Div => "/",
            Bop::FloorDiv => "//",
            Bop::Mod => "%",
            Bop::Eq => "==",
            Bop::Ne => "!=",
            Bop::Lt => "<",
            Bop::Le => "<=",
            Bop::Gt => ">",
            Bop::Ge => ">=",
            Bop::And => "and",
            Bop::Or => "or",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            Bop::Or => prec::OR,
            Bop::And => prec::AND,
            Bop::Eq | Bop::Ne | Bop::Lt | Bop::Le | Bop::Gt | Bop::Ge => prec::CMP,
            Bop::Add | Bop::Sub => prec::ADD,
            Bop::Mul | Bop::Div | Bop::FloorDiv | Bop::Mod => prec::MUL,
        }
    }
}

pub(crate) mod prec {
    pub const OR: u8 = 1;
    pub const AND: u8 = 2;
    pub const NOT: u8 = 3;
    pub const CMP: u8 = 4;
    pub const ADD: u8 = 5;
    pub const MUL: u8 = 6;
    pub const NEG: u8 = 7;
    pub const ATOM: u8 = 8;
}

/// A call-free expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Exp {
    Const(Const),
    Var(String),
    Unary(Uop, Box<Exp>),
    Binary(Bop, Box<Exp>, Box<Exp>),
}

impl Exp {
    pub fn int(v: i64) -> Exp {
        Exp::Const(Const::Int(v.into()))
    }

    pub fn var(name: &str) -> Exp {
        Exp::Var(name.to_string())
    }

    pub fn binary(op: Bop, l: Exp, r: Exp) -> Exp {
        Exp::Binary(op, Box::new(l), Box::new(r))
    }

    fn precedence(&self) -> u8 {
        match self {
            Exp::Const(Const::Int(i)) if i.sign() == num_bigint::Sign::Minus => prec::NEG,
            Exp::Const(Const::Float(x)) if x.is_sign_negative() => prec::NEG,
            Exp::Const(_) | Exp::Var(_) => prec::ATOM,
            Exp::Unary(Uop::Neg, _) => prec::NEG,
            Exp::Unary(Uop::Not, _) => prec::NOT,
            Exp::Binary(op, _, _) => op.precedence(),
        }
    }

    /// Names read by the expression, in evaluation order (duplicates kept).
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Exp::Const(_) => {}
            Exp::Var(v) => out.push(v),
            Exp::Unary(_, e) => e.collect_vars(out),
            Exp::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Exp, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Const(c) => write!(f, "{c}"),
            Exp::Var(v) => f.write_str(v),
            Exp::Unary(Uop::Neg, e) => {
                f.write_str("-")?;
                write_operand(f, e, e.precedence() < prec::NEG)
            }
            Exp::Unary(Uop::Not, e) => {
                f.write_str("not ")?;
                write_operand(f, e, e.precedence() < prec::NOT)
            }
            Exp::Binary(op, l, r) => {
                let p = op.precedence();
                // Comparisons do not chain in the subset, so both sides of a
                // comparison need parentheses at equal precedence.
                let left_parens = if p == prec::CMP {
                    l.precedence() <= p
                } else {
                    l.precedence() < p
                };
                write_operand(f, l, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r, r.precedence() <= p)
            }
        }
    }
}

/// One source line of a SimpliPy program.
#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    Pass,
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Break,
    Continue,
    ExpAssign {
        target: String,
        rhs: Exp,
    },
    CallAssign {
        target: String,
        callee: String,
        args: Vec<Exp>,
    },
    If(Exp),
    Else,
    While(Exp),
    Def {
        name: String,
        params: Vec<String>,
    },
    Return(Exp),
}

impl Instr {
    /// True for lines that must be followed by an indented block.
    pub fn is_header(&self) -> bool {
        matches!(self, Instr::If(_) | Instr::Else | Instr::While(_) | Instr::Def { .. })
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Pass => f.write_str("pass"),
            Instr::Global(names) => write!(f, "global {}", names.join(", ")),
            Instr::Nonlocal(names) => write!(f, "nonlocal {}", names.join(", ")),
            Instr::Break => f.write_str("break"),
            Instr::Continue => f.write_str("continue"),
            Instr::ExpAssign { target, rhs } => write!(f, "{target} = {rhs}"),
            Instr::CallAssign { target, callee, args } => {
                write!(f, "{target} = {callee}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Instr::If(c) => write!(f, "if {c}:"),
            Instr::Else => f.write_str("else:"),
            Instr::While(c) => write!(f, "while {c}:"),
            Instr::Def { name, params } => write!(f, "def {name}({}):", params.join(", ")),
            Instr::Return(e) => write!(f, "return {e}"),
        }
    }
}

/// The block structure recovered from indentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Simple(Location),
    If {
        head: Location,
        body: Vec<Stmt>,
        orelse: Option<ElseArm>,
    },
    While {
        head: Location,
        body: Vec<Stmt>,
    },
    Def {
        head: Location,
        body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElseArm {
    pub head: Location,
    pub body: Vec<Stmt>,
}

impl Stmt {
    /// The first line of the statement, which is where control enters it.
    pub fn head(&self) -> Location {
        match self {
            Stmt::Simple(l) => *l,
            Stmt::If { head, .. } | Stmt::While { head, .. } | Stmt::Def { head, .. } => *head,
        }
    }

    /// The last line belonging to the statement.
    pub fn last_line(&self) -> Location {
        match self {
            Stmt::Simple(l) => *l,
            Stmt::If {
                body,
                orelse: Some(arm),
                ..
            } => arm.body.last().map_or(arm.head, Stmt::last_line).max(last_of(body)),
            Stmt::If { body, .. } | Stmt::While { body, .. } | Stmt::Def { body, .. } => last_of(body),
        }
    }
}

fn last_of(block: &[Stmt]) -> Location {
    block.last().map(Stmt::last_line).unwrap_or(Location(0))
}

/// A parsed program: a total map from lines `1..=N` to instructions.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub(crate) instrs: Vec<Instr>,
    pub(crate) indents: Vec<usize>,
    pub(crate) source_lines: Vec<String>,
    pub(crate) body: Vec<Stmt>,
}

/// Requested location holds no instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("location {0} holds no instruction")]
pub struct OutOfRange(pub u32);

impl Program {
    /// Number of instructions, `N`.
    pub fn len(&self) -> u32 {
        self.instrs.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// The end-of-program location `N + 1`.
    pub fn end(&self) -> Location {
        Location(self.len() + 1)
    }

    pub fn instruction_at(&self, loc: Location) -> Result<&Instr, OutOfRange> {
        match loc.0 {
            0 => Err(OutOfRange(0)),
            n => self.instrs.get(n as usize - 1).ok_or(OutOfRange(n)),
        }
    }

    /// Like [`Program::instruction_at`] for locations known to be in range.
    pub fn instr(&self, loc: Location) -> &Instr {
        &self.instrs[loc.0 as usize - 1]
    }

    pub fn instructions(&self) -> impl Iterator<Item = (Location, &Instr)> {
        self.instrs
            .iter()
            .enumerate()
            .map(|(i, ins)| (Location(i as u32 + 1), ins))
    }

    pub fn indent(&self, loc: Location) -> usize {
        self.indents[loc.0 as usize - 1]
    }

    pub fn source_lines(&self) -> &[String] {
        &self.source_lines
    }

    /// Top-level block.
    pub fn body(&self) -> &[Stmt] {
        &self.body
    }

    /// Canonical source text, four spaces per indentation level.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, ins) in self.instrs.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for _ in 0..self.indents[i] {
                out.push_str("    ");
            }
            out.push_str(&ins.to_string());
        }
        out
    }
}

// AST JSON, emitted by `simplipy parse`.

impl Serialize for Const {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        match self {
            Const::Int(i) => {
                m.serialize_entry("type", "int")?;
                match i.to_i64() {
                    Some(v) => m.serialize_entry("value", &v)?,
                    None => m.serialize_entry("value", &i.to_string())?,
                }
            }
            Const::Float(x) => {
                m.serialize_entry("type", "float")?;
                m.serialize_entry("value", x)?;
            }
            Const::Bool(b) => {
                m.serialize_entry("type", "bool")?;
                m.serialize_entry("value", b)?;
            }
            Const::Str(v) => {
                m.serialize_entry("type", "str")?;
                m.serialize_entry("value", v)?;
            }
            Const::None => {
                m.serialize_entry("type", "none")?;
                m.serialize_entry("value", &())?;
            }
        }
        m.end()
    }
}

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exp::Const(c) => {
                let mut st = s.serialize_struct("Const", 2)?;
                st.serialize_field("kind", "const")?;
                st.serialize_field("value", c)?;
                st.end()
            }
            Exp::Var(v) => {
                let mut st = s.serialize_struct("Var", 2)?;
                st.serialize_field("kind", "var")?;
                st.serialize_field("name", v)?;
                st.end()
            }
            Exp::Unary(op, e) => {
                let mut st = s.serialize_struct("Unary", 3)?;
                st.serialize_field("kind", "unary")?;
                st.serialize_field("op", op)?;
                st.serialize_field("operand", e)?;
                st.end()
            }
            Exp::Binary(op, l, r) => {
                let mut st = s.serialize_struct("Binary", 4)?;
                st.serialize_field("kind", "binary")?;
                st.serialize_field("op", op)?;
                st.serialize_field("left", l)?;
                st.serialize_field("right", r)?;
                st.end()
            }
        }
    }
}

impl Serialize for Instr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            Instr::Pass => m.serialize_entry("kind", "Pass")?,
            Instr::Global(names) => {
                m.serialize_entry("kind", "Global")?;
                m.serialize_entry("names", names)?;
            }
            Instr::Nonlocal(names) => {
                m.serialize_entry("kind", "Nonlocal")?;
                m.serialize_entry("names", names)?;
            }
            Instr::Break => m.serialize_entry("kind", "Break")?,
            Instr::Continue => m.serialize_entry("kind", "Continue")?,
            Instr::ExpAssign { target, rhs } => {
                m.serialize_entry("kind", "ExpAssign")?;
                m.serialize_entry("target", target)?;
                m.serialize_entry("rhs", rhs)?;
            }
            Instr::CallAssign { target, callee, args } => {
                m.serialize_entry("kind", "CallAssign")?;
                m.serialize_entry("target", target)?;
                m.serialize_entry("callee", callee)?;
                m.serialize_entry("args", args)?;
            }
            Instr::If(c) => {
                m.serialize_entry("kind", "If")?;
                m.serialize_entry("cond", c)?;
            }
            Instr::Else => m.serialize_entry("kind", "Else")?,
            Instr::While(c) => {
                m.serialize_entry("kind", "While")?;
                m.serialize_entry("cond", c)?;
            }
            Instr::Def { name, params } => {
                m.serialize_entry("kind", "Def")?;
                m.serialize_entry("name", name)?;
                m.serialize_entry("params", params)?;
            }
            Instr::Return(e) => {
                m.serialize_entry("kind", "Return")?;
                m.serialize_entry("rhs", e)?;
            }
        }
        m.end()
    }
}

#[derive(Serialize)]
struct LineJson<'a> {
    loc: u32,
    indent: usize,
    source: &'a str,
    instr: &'a Instr,
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let lines: Vec<LineJson<'_>> = self
            .instrs
            .iter()
            .enumerate()
            .map(|(i, instr)| LineJson {
                loc: i as u32 + 1,
                indent: self.indents[i],
                source: &self.source_lines[i],
                instr,
            })
            .collect();
        let mut st = s.serialize_struct("Program", 2)?;
        st.serialize_field("n", &self.len())?;
        st.serialize_field("lines", &lines)?;
        st.end()
    }
}
