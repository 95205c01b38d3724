//! Parser for single lines of ordinary Python.
//!
//! The grammar here is a superset of SimpliPy: it admits calls anywhere in an
//! expression, augmented assignment, `elif`, bare expression statements and
//! bare `return`. Everything else is reported as an unsupported construct by
//! name. The core parser lowers these lines into [`Instr`](super::Instr)s and
//! the simplifier rewrites them.

use super::ast::{Bop, Const, Exp, Uop};
use super::lexer::{Keyword, Op, Spanned, Token};

/// An expression that may contain calls.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SurfaceExp {
    Const(Const),
    Var(String),
    Unary(Uop, Box<SurfaceExp>),
    Binary(Bop, Box<SurfaceExp>, Box<SurfaceExp>),
    Call { callee: String, args: Vec<SurfaceExp> },
}

impl SurfaceExp {
    pub fn contains_call(&self) -> bool {
        match self {
            SurfaceExp::Const(_) | SurfaceExp::Var(_) => false,
            SurfaceExp::Unary(_, e) => e.contains_call(),
            SurfaceExp::Binary(_, l, r) => l.contains_call() || r.contains_call(),
            SurfaceExp::Call { .. } => true,
        }
    }

    /// Converts a call-free expression.
    pub fn to_exp(&self) -> Option<Exp> {
        Some(match self {
            SurfaceExp::Const(c) => Exp::Const(c.clone()),
            SurfaceExp::Var(v) => Exp::Var(v.clone()),
            SurfaceExp::Unary(op, e) => Exp::Unary(*op, Box::new(e.to_exp()?)),
            SurfaceExp::Binary(op, l, r) => Exp::Binary(*op, Box::new(l.to_exp()?), Box::new(r.to_exp()?)),
            SurfaceExp::Call { .. } => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AugOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
}

impl AugOp {
    pub fn bop(self) -> Bop {
        match self {
            AugOp::Add => Bop::Add,
            AugOp::Sub => Bop::Sub,
            AugOp::Mul => Bop::Mul,
            AugOp::Div => Bop::Div,
            AugOp::FloorDiv => Bop::FloorDiv,
            AugOp::Mod => Bop::Mod,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SurfaceLine {
    Pass,
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Break,
    Continue,
    Assign {
        target: String,
        value: SurfaceExp,
    },
    AugAssign {
        target: String,
        op: AugOp,
        value: SurfaceExp,
    },
    Expr(SurfaceExp),
    Return(Option<SurfaceExp>),
    If(SurfaceExp),
    Elif(SurfaceExp),
    Else,
    While(SurfaceExp),
    Def {
        name: String,
        params: Vec<String>,
    },
}

impl SurfaceLine {
    pub fn is_header(&self) -> bool {
        matches!(
            self,
            SurfaceLine::If(_)
                | SurfaceLine::Elif(_)
                | SurfaceLine::Else
                | SurfaceLine::While(_)
                | SurfaceLine::Def { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LineErrorKind {
    Syntax,
    /// A recognised construct outside the subset, named for the user.
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LineError {
    pub column: u32,
    pub kind: LineErrorKind,
    pub message: String,
}

impl LineError {
    fn syntax(column: u32, message: impl Into<String>) -> Self {
        LineError {
            column,
            kind: LineErrorKind::Syntax,
            message: message.into(),
        }
    }

    fn unsupported(column: u32, construct: &'static str) -> Self {
        let message = match construct {
            "lambda" => "lambda unsupported; bind a named def instead".to_string(),
            c => format!("{c} unsupported"),
        };
        LineError {
            column,
            kind: LineErrorKind::Unsupported(construct),
            message,
        }
    }
}

type PResult<T> = Result<T, LineError>;

/// Parses the tokens of one non-empty line.
pub(crate) fn parse_line(tokens: &[Spanned]) -> PResult<SurfaceLine> {
    check_brackets(tokens)?;
    let mut p = LineParser { toks: tokens, pos: 0 };
    let line = p.statement()?;
    if let Some(t) = p.peek_spanned() {
        return Err(match &t.token {
            Token::Op(Op::Semicolon) => LineError::unsupported(t.column, "multiple statements per line"),
            Token::Op(Op::Comma) => LineError::unsupported(t.column, "tuples"),
            Token::Op(Op::Assign) => LineError::unsupported(t.column, "chained assignment"),
            Token::Keyword(Keyword::If) => LineError::unsupported(t.column, "conditional expressions"),
            other => LineError::syntax(t.column, format!("unexpected {}", describe(other))),
        });
    }
    Ok(line)
}

fn check_brackets(tokens: &[Spanned]) -> PResult<()> {
    let mut stack: Vec<(Op, u32)> = Vec::new();
    for t in tokens {
        if let Token::Op(op) = t.token {
            match op {
                Op::LParen | Op::LBracket | Op::LBrace => stack.push((op, t.column)),
                Op::RParen | Op::RBracket | Op::RBrace => {
                    let expected = match op {
                        Op::RParen => Op::LParen,
                        Op::RBracket => Op::LBracket,
                        _ => Op::LBrace,
                    };
                    match stack.pop() {
                        Some((open, _)) if open == expected => {}
                        _ => return Err(LineError::syntax(t.column, format!("unmatched '{}'", op.as_str()))),
                    }
                }
                _ => {}
            }
        }
    }
    match stack.first() {
        Some((op, col)) => Err(LineError {
            column: *col,
            kind: LineErrorKind::Unsupported("multi-line statements"),
            message: format!(
                "'{}' is not closed on this line; multi-line statements unsupported",
                op.as_str()
            ),
        }),
        None => Ok(()),
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Ident(s) => format!("identifier `{s}`"),
        Token::Keyword(k) => format!("keyword `{}`", k.as_str()),
        Token::Int(_) | Token::Float(_) => "number".to_string(),
        Token::Str(_) => "string".to_string(),
        Token::Op(o) => format!("'{}'", o.as_str()),
    }
}

fn keyword_construct(k: Keyword) -> Option<&'static str> {
    Some(match k {
        Keyword::For => "for loops",
        Keyword::Class => "classes",
        Keyword::Import | Keyword::From => "imports",
        Keyword::Try | Keyword::Except | Keyword::Finally | Keyword::Raise => "exceptions",
        Keyword::With => "with statements",
        Keyword::Lambda => "lambda",
        Keyword::Yield => "generators",
        Keyword::Assert => "assert statements",
        Keyword::Del => "del statements",
        Keyword::Async | Keyword::Await => "asynchronous programming",
        Keyword::In | Keyword::Is => "membership and identity operators",
        _ => return None,
    })
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos).map(|t| &t.token)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k).map(|t| &t.token)
    }

    fn peek_spanned(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    fn column(&self) -> u32 {
        match self.toks.get(self.pos) {
            Some(t) => t.column,
            None => self.toks.last().map_or(1, |t| t.column + 1),
        }
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_op(&self, op: Op) -> bool {
        self.peek() == Some(&Token::Op(op))
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek() == Some(&Token::Keyword(kw))
    }

    fn eat_op(&mut self, op: Op) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: Op) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{}'", op.as_str())))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn unexpected(&self, wanted: &str) -> LineError {
        match self.peek_spanned() {
            Some(t) => {
                if let Token::Keyword(k) = t.token {
                    if let Some(c) = keyword_construct(k) {
                        return LineError::unsupported(t.column, c);
                    }
                }
                LineError::syntax(t.column, format!("expected {wanted}, found {}", describe(&t.token)))
            }
            None => LineError::syntax(self.column(), format!("expected {wanted} at end of line")),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn statement(&mut self) -> PResult<SurfaceLine> {
        let first = self
            .peek_spanned()
            .expect("parse_line is only called on non-empty lines");
        let col = first.column;
        match &first.token {
            Token::Keyword(k) => match k {
                Keyword::Pass => {
                    self.pos += 1;
                    Ok(SurfaceLine::Pass)
                }
                Keyword::Break => {
                    self.pos += 1;
                    Ok(SurfaceLine::Break)
                }
                Keyword::Continue => {
                    self.pos += 1;
                    Ok(SurfaceLine::Continue)
                }
                Keyword::Global | Keyword::Nonlocal => {
                    self.pos += 1;
                    let mut names = vec![self.ident()?];
                    while self.eat_op(Op::Comma) {
                        names.push(self.ident()?);
                    }
                    Ok(if *k == Keyword::Global {
                        SurfaceLine::Global(names)
                    } else {
                        SurfaceLine::Nonlocal(names)
                    })
                }
                Keyword::Return => {
                    self.pos += 1;
                    if self.at_end() {
                        return Ok(SurfaceLine::Return(None));
                    }
                    let e = self.expression()?;
                    if self.at_op(Op::Comma) {
                        return Err(LineError::unsupported(self.column(), "tuples"));
                    }
                    Ok(SurfaceLine::Return(Some(e)))
                }
                Keyword::If | Keyword::Elif | Keyword::While => {
                    self.pos += 1;
                    let cond = self.expression()?;
                    self.header_colon()?;
                    Ok(match k {
                        Keyword::If => SurfaceLine::If(cond),
                        Keyword::Elif => SurfaceLine::Elif(cond),
                        _ => SurfaceLine::While(cond),
                    })
                }
                Keyword::Else => {
                    self.pos += 1;
                    self.header_colon()?;
                    Ok(SurfaceLine::Else)
                }
                Keyword::Def => {
                    self.pos += 1;
                    let name = self.ident()?;
                    self.expect_op(Op::LParen)?;
                    let params = self.params()?;
                    if self.at_op(Op::Arrow) {
                        return Err(LineError::unsupported(self.column(), "type annotations"));
                    }
                    self.header_colon()?;
                    Ok(SurfaceLine::Def { name, params })
                }
                other => match keyword_construct(*other) {
                    Some(c) => Err(LineError::unsupported(col, c)),
                    None => self.simple_statement(),
                },
            },
            Token::Op(Op::At) => Err(LineError::unsupported(col, "decorators")),
            _ => self.simple_statement(),
        }
    }

    fn header_colon(&mut self) -> PResult<()> {
        if self.at_op(Op::Walrus) {
            return Err(LineError::unsupported(self.column(), "assignment expressions"));
        }
        self.expect_op(Op::Colon)?;
        if !self.at_end() {
            return Err(LineError::unsupported(self.column(), "block bodies on the header line"));
        }
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        let mut params = Vec::new();
        loop {
            if self.eat_op(Op::RParen) {
                return Ok(params);
            }
            if self.at_op(Op::Star) || self.at_op(Op::DoubleStar) || self.at_op(Op::Slash) {
                return Err(LineError::unsupported(self.column(), "variadic and special parameters"));
            }
            params.push(self.ident()?);
            if self.at_op(Op::Assign) {
                return Err(LineError::unsupported(self.column(), "default parameter values"));
            }
            if self.at_op(Op::Colon) {
                return Err(LineError::unsupported(self.column(), "type annotations"));
            }
            if !self.eat_op(Op::Comma) {
                self.expect_op(Op::RParen)?;
                return Ok(params);
            }
        }
    }

    fn simple_statement(&mut self) -> PResult<SurfaceLine> {
        let start_col = self.column();
        let lhs = self.expression()?;
        let aug = match self.peek() {
            Some(Token::Op(op)) => match op {
                Op::PlusAssign => Some(AugOp::Add),
                Op::MinusAssign => Some(AugOp::Sub),
                Op::StarAssign => Some(AugOp::Mul),
                Op::SlashAssign => Some(AugOp::Div),
                Op::DoubleSlashAssign => Some(AugOp::FloorDiv),
                Op::PercentAssign => Some(AugOp::Mod),
                Op::DoubleStarAssign => return Err(LineError::unsupported(self.column(), "exponentiation operator")),
                Op::OtherAssign => return Err(LineError::unsupported(self.column(), "bitwise operators")),
                _ => None,
            },
            _ => None,
        };
        if self.at_end() {
            return Ok(SurfaceLine::Expr(lhs));
        }
        if self.at_op(Op::Comma) {
            let rest_has_assign = self.toks[self.pos..].iter().any(|t| t.token == Token::Op(Op::Assign));
            let construct = if rest_has_assign {
                "multiple assignment"
            } else {
                "tuples"
            };
            return Err(LineError::unsupported(self.column(), construct));
        }
        if self.at_op(Op::Colon) {
            return Err(LineError::unsupported(self.column(), "variable annotations"));
        }
        let target = match (&lhs, aug.is_some() || self.at_op(Op::Assign)) {
            (SurfaceExp::Var(v), true) => v.clone(),
            (_, true) => return Err(LineError::syntax(start_col, "cannot assign to expression")),
            (_, false) => return Err(self.unexpected("end of line")),
        };
        self.pos += 1;
        let value = self.expression()?;
        if self.at_op(Op::Assign) {
            return Err(LineError::unsupported(self.column(), "chained assignment"));
        }
        if self.at_op(Op::Comma) {
            return Err(LineError::unsupported(self.column(), "tuples"));
        }
        Ok(match aug {
            Some(op) => SurfaceLine::AugAssign { target, op, value },
            None => SurfaceLine::Assign { target, value },
        })
    }

    pub fn expression(&mut self) -> PResult<SurfaceExp> {
        let e = self.or_expr()?;
        if self.at_kw(Keyword::If) {
            return Err(LineError::unsupported(self.column(), "conditional expressions"));
        }
        if self.at_kw(Keyword::For) {
            return Err(LineError::unsupported(self.column(), "comprehensions"));
        }
        if self.at_op(Op::Walrus) {
            return Err(LineError::unsupported(self.column(), "assignment expressions"));
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> PResult<SurfaceExp> {
        let mut e = self.and_expr()?;
        while self.at_kw(Keyword::Or) {
            self.pos += 1;
            let r = self.and_expr()?;
            e = SurfaceExp::Binary(Bop::Or, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<SurfaceExp> {
        let mut e = self.not_expr()?;
        while self.at_kw(Keyword::And) {
            self.pos += 1;
            let r = self.not_expr()?;
            e = SurfaceExp::Binary(Bop::And, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> PResult<SurfaceExp> {
        if self.at_kw(Keyword::Not) {
            self.pos += 1;
            let e = self.not_expr()?;
            return Ok(SurfaceExp::Unary(Uop::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comparison_op(&self) -> PResult<Option<Bop>> {
        Ok(match self.peek() {
            Some(Token::Op(Op::EqEq)) => Some(Bop::Eq),
            Some(Token::Op(Op::NotEq)) => Some(Bop::Ne),
            Some(Token::Op(Op::Lt)) => Some(Bop::Lt),
            Some(Token::Op(Op::Le)) => Some(Bop::Le),
            Some(Token::Op(Op::Gt)) => Some(Bop::Gt),
            Some(Token::Op(Op::Ge)) => Some(Bop::Ge),
            Some(Token::Keyword(Keyword::In | Keyword::Is)) => {
                return Err(LineError::unsupported(
                    self.column(),
                    "membership and identity operators",
                ))
            }
            Some(Token::Keyword(Keyword::Not)) if self.peek_at(1) == Some(&Token::Keyword(Keyword::In)) => {
                return Err(LineError::unsupported(
                    self.column(),
                    "membership and identity operators",
                ))
            }
            _ => None,
        })
    }

    fn comparison(&mut self) -> PResult<SurfaceExp> {
        let l = self.arith()?;
        let Some(op) = self.comparison_op()? else {
            return Ok(l);
        };
        self.pos += 1;
        let r = self.arith()?;
        if self.comparison_op()?.is_some() {
            return Err(LineError::unsupported(self.column(), "chained comparisons"));
        }
        Ok(SurfaceExp::Binary(op, Box::new(l), Box::new(r)))
    }

    fn arith(&mut self) -> PResult<SurfaceExp> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Op(Op::Plus)) => Bop::Add,
                Some(Token::Op(Op::Minus)) => Bop::Sub,
                Some(Token::Op(Op::Shl | Op::Shr | Op::Amp | Op::Pipe | Op::Caret)) => {
                    return Err(LineError::unsupported(self.column(), "bitwise operators"))
                }
                _ => return Ok(e),
            };
            self.pos += 1;
            let r = self.term()?;
            e = SurfaceExp::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn term(&mut self) -> PResult<SurfaceExp> {
        let mut e = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Token::Op(Op::Star)) => Bop::Mul,
                Some(Token::Op(Op::Slash)) => Bop::Div,
                Some(Token::Op(Op::DoubleSlash)) => Bop::FloorDiv,
                Some(Token::Op(Op::Percent)) => Bop::Mod,
                Some(Token::Op(Op::At)) => return Err(LineError::unsupported(self.column(), "matrix multiplication")),
                _ => return Ok(e),
            };
            self.pos += 1;
            let r = self.factor()?;
            e = SurfaceExp::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn factor(&mut self) -> PResult<SurfaceExp> {
        match self.peek() {
            Some(Token::Op(Op::Minus)) => {
                self.pos += 1;
                let e = self.factor()?;
                Ok(SurfaceExp::Unary(Uop::Neg, Box::new(e)))
            }
            Some(Token::Op(Op::Plus)) => Err(LineError::unsupported(self.column(), "unary plus")),
            Some(Token::Op(Op::Tilde)) => Err(LineError::unsupported(self.column(), "bitwise operators")),
            _ => {
                let e = self.atom()?;
                if self.at_op(Op::DoubleStar) {
                    return Err(LineError::unsupported(self.column(), "exponentiation operator"));
                }
                Ok(e)
            }
        }
    }

    fn atom(&mut self) -> PResult<SurfaceExp> {
        let col = self.column();
        let Some(tok) = self.bump() else {
            return Err(LineError::syntax(col, "expected an expression at end of line"));
        };
        let e = match tok {
            Token::Int(i) => SurfaceExp::Const(Const::Int(i.clone())),
            Token::Float(x) => SurfaceExp::Const(Const::Float(*x)),
            Token::Str(s) => {
                if matches!(self.peek(), Some(Token::Str(_))) {
                    return Err(LineError::unsupported(self.column(), "implicit string concatenation"));
                }
                SurfaceExp::Const(Const::Str(s.clone()))
            }
            Token::Keyword(Keyword::True) => SurfaceExp::Const(Const::Bool(true)),
            Token::Keyword(Keyword::False) => SurfaceExp::Const(Const::Bool(false)),
            Token::Keyword(Keyword::None) => SurfaceExp::Const(Const::None),
            Token::Ident(name) => {
                if self.eat_op(Op::LParen) {
                    let args = self.call_args()?;
                    SurfaceExp::Call {
                        callee: name.clone(),
                        args,
                    }
                } else {
                    SurfaceExp::Var(name.clone())
                }
            }
            Token::Op(Op::LParen) => {
                if self.at_op(Op::RParen) {
                    return Err(LineError::unsupported(col, "tuples"));
                }
                let e = self.expression()?;
                if self.at_op(Op::Comma) {
                    return Err(LineError::unsupported(col, "tuples"));
                }
                self.expect_op(Op::RParen)?;
                e
            }
            Token::Op(Op::LBracket) => {
                let construct = if self.bracket_has_for() {
                    "comprehensions"
                } else {
                    "lists"
                };
                return Err(LineError::unsupported(col, construct));
            }
            Token::Op(Op::LBrace) => {
                let construct = if self.bracket_has_for() {
                    "comprehensions"
                } else {
                    "dicts and sets"
                };
                return Err(LineError::unsupported(col, construct));
            }
            Token::Keyword(k) => {
                return Err(match keyword_construct(*k) {
                    Some(c) => LineError::unsupported(col, c),
                    None => LineError::syntax(col, format!("unexpected keyword `{}`", k.as_str())),
                })
            }
            other => return Err(LineError::syntax(col, format!("unexpected {}", describe(other)))),
        };
        self.trailers(e)
    }

    fn bracket_has_for(&self) -> bool {
        self.toks[self.pos..]
            .iter()
            .any(|t| t.token == Token::Keyword(Keyword::For))
    }

    fn trailers(&mut self, e: SurfaceExp) -> PResult<SurfaceExp> {
        match self.peek() {
            Some(Token::Op(Op::Dot)) => Err(LineError::unsupported(self.column(), "attribute access")),
            Some(Token::Op(Op::LBracket)) => Err(LineError::unsupported(self.column(), "subscripts")),
            Some(Token::Op(Op::LParen)) => Err(LineError::unsupported(self.column(), "calls of computed functions")),
            _ => Ok(e),
        }
    }

    fn call_args(&mut self) -> PResult<Vec<SurfaceExp>> {
        let mut args = Vec::new();
        loop {
            if self.eat_op(Op::RParen) {
                return Ok(args);
            }
            if self.at_op(Op::Star) || self.at_op(Op::DoubleStar) {
                return Err(LineError::unsupported(self.column(), "argument unpacking"));
            }
            if matches!(self.peek(), Some(Token::Ident(_))) && self.peek_at(1) == Some(&Token::Op(Op::Assign)) {
                return Err(LineError::unsupported(self.column(), "keyword arguments"));
            }
            args.push(self.expression()?);
            if !self.eat_op(Op::Comma) {
                self.expect_op(Op::RParen)?;
                return Ok(args);
            }
        }
    }
}
