//! Line-oriented tokenizer.
//!
//! The tokenizer understands enough of ordinary Python to give precise
//! diagnostics for constructs outside the subset; deciding what is allowed is
//! left to the parsers.

use std::fmt;

use num_bigint::BigInt;

use crate::diagnostic::Diagnostic;

pub const DEFAULT_INDENT_WIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    False,
    None,
    True,
    And,
    As,
    Assert,
    Async,
    Await,
    Break,
    Class,
    Continue,
    Def,
    Del,
    Elif,
    Else,
    Except,
    Finally,
    For,
    From,
    Global,
    If,
    Import,
    In,
    Is,
    Lambda,
    Nonlocal,
    Not,
    Or,
    Pass,
    Raise,
    Return,
    Try,
    While,
    With,
    Yield,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match s {
            "False" => False,
            "None" => None,
            "True" => True,
            "and" => And,
            "as" => As,
            "assert" => Assert,
            "async" => Async,
            "await" => Await,
            "break" => Break,
            "class" => Class,
            "continue" => Continue,
            "def" => Def,
            "del" => Del,
            "elif" => Elif,
            "else" => Else,
            "except" => Except,
            "finally" => Finally,
            "for" => For,
            "from" => From,
            "global" => Global,
            "if" => If,
            "import" => Import,
            "in" => In,
            "is" => Is,
            "lambda" => Lambda,
            "nonlocal" => Nonlocal,
            "not" => Not,
            "or" => Or,
            "pass" => Pass,
            "raise" => Raise,
            "return" => Return,
            "try" => Try,
            "while" => While,
            "with" => With,
            "yield" => Yield,
            _ => return Option::None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            False => "False",
            None => "None",
            True => "True",
            And => "and",
            As => "as",
            Assert => "assert",
            Async => "async",
            Await => "await",
            Break => "break",
            Class => "class",
            Continue => "continue",
            Def => "def",
            Del => "del",
            Elif => "elif",
            Else => "else",
            Except => "except",
            Finally => "finally",
            For => "for",
            From => "from",
            Global => "global",
            If => "if",
            Import => "import",
            In => "in",
            Is => "is",
            Lambda => "lambda",
            Nonlocal => "nonlocal",
            Not => "not",
            Or => "or",
            Pass => "pass",
            Raise => "raise",
            Return => "return",
            Try => "try",
            While => "while",
            With => "with",
            Yield => "yield",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    DoubleSlash,
    Percent,
    DoubleStar,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    DoubleSlashAssign,
    PercentAssign,
    DoubleStarAssign,
    /// Any other compound assignment (`&=`, `|=`, `^=`, `<<=`, `>>=`, `@=`).
    OtherAssign,
    Walrus,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semicolon,
    Dot,
    Arrow,
    At,
    Tilde,
    Amp,
    Pipe,
    Caret,
    Shl,
    Shr,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        use Op::*;
        match self {
            Assign => "=",
            Plus => "+",
            Minus => "-",
            Star => "*",
            Slash => "/",
            DoubleSlash => "//",
            Percent => "%",
            DoubleStar => "**",
            EqEq => "==",
            NotEq => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            PlusAssign => "+=",
            MinusAssign => "-=",
            StarAssign => "*=",
            SlashAssign => "/=",
            DoubleSlashAssign => "//=",
            PercentAssign => "%=",
            DoubleStarAssign => "**=",
            OtherAssign => "op=",
            Walrus => ":=",
            LParen => "(",
            RParen => ")",
            LBracket => "[",
            RBracket => "]",
            LBrace => "{",
            RBrace => "}",
            Comma => ",",
            Colon => ":",
            Semicolon => ";",
            Dot => ".",
            Arrow => "->",
            At => "@",
            Tilde => "~",
            Amp => "&",
            Pipe => "|",
            Caret => "^",
            Shl => "<<",
            Shr => ">>",
        }
    }
}

// Longest operators first so that maximal munch works by prefix matching.
const OPERATORS: &[(&str, Op)] = &[
    ("//=", Op::DoubleSlashAssign),
    ("**=", Op::DoubleStarAssign),
    ("<<=", Op::OtherAssign),
    (">>=", Op::OtherAssign),
    ("+=", Op::PlusAssign),
    ("-=", Op::MinusAssign),
    ("*=", Op::StarAssign),
    ("/=", Op::SlashAssign),
    ("%=", Op::PercentAssign),
    ("&=", Op::OtherAssign),
    ("|=", Op::OtherAssign),
    ("^=", Op::OtherAssign),
    ("@=", Op::OtherAssign),
    ("==", Op::EqEq),
    ("!=", Op::NotEq),
    ("<=", Op::Le),
    (">=", Op::Ge),
    ("//", Op::DoubleSlash),
    ("**", Op::DoubleStar),
    ("->", Op::Arrow),
    (":=", Op::Walrus),
    ("<<", Op::Shl),
    (">>", Op::Shr),
    ("=", Op::Assign),
    ("+", Op::Plus),
    ("-", Op::Minus),
    ("*", Op::Star),
    ("/", Op::Slash),
    ("%", Op::Percent),
    ("<", Op::Lt),
    (">", Op::Gt),
    ("(", Op::LParen),
    (")", Op::RParen),
    ("[", Op::LBracket),
    ("]", Op::RBracket),
    ("{", Op::LBrace),
    ("}", Op::RBrace),
    (",", Op::Comma),
    (":", Op::Colon),
    (";", Op::Semicolon),
    (".", Op::Dot),
    ("@", Op::At),
    ("~", Op::Tilde),
    ("&", Op::Amp),
    ("|", Op::Pipe),
    ("^", Op::Caret),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Ident(String),
    Keyword(Keyword),
    Int(BigInt),
    Float(f64),
    Str(String),
    Op(Op),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "id:{s}"),
            Token::Keyword(k) => write!(f, "kw:{}", k.as_str()),
            Token::Int(i) => write!(f, "int:{i}"),
            Token::Float(x) => write!(f, "float:{x:?}"),
            Token::Str(s) => write!(f, "str:{s:?}"),
            Token::Op(o) => write!(f, "op:{}", o.as_str()),
        }
    }
}

/// A token with its 1-based starting column.
#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub column: u32,
}

/// The tokens of one physical line.
#[derive(Debug, Clone, PartialEq)]
pub struct LexedLine {
    /// 1-based physical line number.
    pub line: u32,
    /// Indentation depth in levels of the configured width.
    pub indent: usize,
    pub tokens: Vec<Spanned>,
    /// True if the line carried a `#` comment.
    pub comment: bool,
}

impl LexedLine {
    /// Blank lines and comment-only lines have no tokens.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Counts leading spaces, rejecting tabs.
pub(crate) fn leading_spaces(text: &str, line: u32) -> Result<usize, Diagnostic> {
    let mut n = 0;
    for ch in text.chars() {
        match ch {
            ' ' => n += 1,
            '\t' => {
                return Err(Diagnostic::lex(
                    line,
                    n as u32 + 1,
                    "tab character in indentation; indent with spaces",
                ))
            }
            _ => break,
        }
    }
    Ok(n)
}

/// Finds the indentation width from the first indented non-blank line.
pub fn detect_indent_width(source: &str) -> usize {
    source
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| l.len() - l.trim_start_matches(' ').len())
        .find(|&n| n > 0)
        .unwrap_or(DEFAULT_INDENT_WIDTH)
}

/// Tokenizes every physical line of `source`.
///
/// Indentation is reported in levels of `width` spaces. All lexical errors
/// are collected; the result is `Err` if there was at least one.
pub fn tokenize(source: &str, width: usize) -> Result<Vec<LexedLine>, Vec<Diagnostic>> {
    let width = width.max(1);
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (idx, text) in source.lines().enumerate() {
        let line = idx as u32 + 1;
        match lex_line(text, line, width) {
            Ok(l) => lines.push(l),
            Err(d) => errors.push(d),
        }
    }
    if errors.is_empty() {
        Ok(lines)
    } else {
        Err(errors)
    }
}

fn lex_line(text: &str, line: u32, width: usize) -> Result<LexedLine, Diagnostic> {
    let spaces = leading_spaces(text, line)?;
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut comment = false;
    let mut i = spaces;
    while i < chars.len() {
        let c = chars[i];
        let column = i as u32 + 1;
        if c == ' ' || c == '\t' || c == '\u{c}' {
            i += 1;
            continue;
        }
        if c == '#' {
            comment = true;
            break;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if i < chars.len()
                && (chars[i] == '"' || chars[i] == '\'')
                && matches!(
                    word.to_ascii_lowercase().as_str(),
                    "f" | "r" | "b" | "u" | "rb" | "br" | "fr" | "rf"
                )
            {
                return Err(Diagnostic::lex(
                    line,
                    column,
                    format!("string prefix `{word}` unsupported (f-strings, raw and byte strings)"),
                ));
            }
            let token = match Keyword::from_ident(&word) {
                Some(k) => Token::Keyword(k),
                None => Token::Ident(word),
            };
            tokens.push(Spanned { token, column });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let (token, next) = lex_number(&chars, i, line)?;
            tokens.push(Spanned { token, column });
            i = next;
            continue;
        }
        if c == '"' || c == '\'' {
            let (token, next) = lex_string(&chars, i, line)?;
            tokens.push(Spanned { token, column });
            i = next;
            continue;
        }
        if c == '\\' {
            return Err(Diagnostic::lex(line, column, "line continuation unsupported"));
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match OPERATORS.iter().find(|(s, _)| rest.starts_with(s)) {
            Some((s, op)) => {
                tokens.push(Spanned {
                    token: Token::Op(*op),
                    column,
                });
                i += s.chars().count();
            }
            None => {
                return Err(Diagnostic::lex(line, column, format!("unknown character {c:?}")));
            }
        }
    }
    if !tokens.is_empty() && spaces % width != 0 {
        return Err(Diagnostic::lex(
            line,
            1,
            format!("indentation of {spaces} spaces is not a multiple of {width}"),
        ));
    }
    Ok(LexedLine {
        line,
        indent: spaces / width,
        tokens,
        comment,
    })
}

fn lex_number(chars: &[char], start: usize, line: u32) -> Result<(Token, usize), Diagnostic> {
    let mut i = start;
    let mut is_float = false;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        is_float = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            is_float = true;
            i = j;
        }
    }
    let text: String = chars[start..i].iter().collect();
    let column = start as u32 + 1;
    if let Some(c) = chars.get(i) {
        if c.is_alphanumeric() || *c == '_' {
            return Err(Diagnostic::lex(
                line,
                column,
                format!("invalid numeric literal starting with {text:?}"),
            ));
        }
    }
    let token = if is_float {
        Token::Float(
            text.parse()
                .map_err(|_| Diagnostic::lex(line, column, format!("invalid float literal {text:?}")))?,
        )
    } else {
        if text.len() > 1 && text.starts_with('0') && text.chars().any(|c| c != '0') {
            return Err(Diagnostic::lex(
                line,
                column,
                "leading zeros in decimal integer literals are not permitted",
            ));
        }
        Token::Int(text.parse().expect("digits parse as an integer"))
    };
    Ok((token, i))
}

fn lex_string(chars: &[char], start: usize, line: u32) -> Result<(Token, usize), Diagnostic> {
    let quote = chars[start];
    let column = start as u32 + 1;
    if chars.get(start + 1) == Some(&quote) && chars.get(start + 2) == Some(&quote) {
        return Err(Diagnostic::lex(line, column, "triple-quoted strings unsupported"));
    }
    let mut out = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        let c = chars[i];
        if c == quote {
            return Ok((Token::Str(out), i + 1));
        }
        if c == '\\' {
            let esc = chars
                .get(i + 1)
                .ok_or_else(|| Diagnostic::lex(line, column, "unterminated string literal"))?;
            out.push(match esc {
                '\\' => '\\',
                '\'' => '\'',
                '"' => '"',
                'n' => '\n',
                't' => '\t',
                other => {
                    return Err(Diagnostic::lex(
                        line,
                        i as u32 + 1,
                        format!("unsupported escape sequence \\{other}"),
                    ))
                }
            });
            i += 2;
            continue;
        }
        out.push(c);
        i += 1;
    }
    Err(Diagnostic::lex(line, column, "unterminated string literal"))
}
