//! Parsing and evaluation of the scalar coefficient functions `q(t)` and
//! `Δ(t)`.
//!
//! Two function forms are supported: an infix expression in the single
//! variable `t` (recursive-descent parser, standard precedence), and a
//! sampled table of ascending `(t, value)` pairs interpolated with a
//! monotone cubic (so a reconstructed potential can be fed back in as
//! input).
//!
//! ```
//! use slrt::expr::parse;
//!
//! let ast = parse("t*exp(-t)").unwrap();
//! assert!((ast.eval(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
//! ```

use std::fmt;
use thiserror::Error;

/// Unary operations (negation and the built-in functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
    Abs,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
        }
    }
}

/// Binary operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// An immutable expression tree in the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num(f64),
    Var,
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
}

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at offset {offset}: {message} (expected {expected})")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: &'static str,
}

/// Domain error during evaluation (log/sqrt of a negative, division by
/// zero, non-integer power of a negative base).
#[derive(Debug, Clone, Error, PartialEq)]
#[error("domain error at t={t}: {message} in `{node}`")]
pub struct EvalError {
    pub t: f64,
    pub node: String,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = self.bytes[self.pos];
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = self.pos;
            while end < self.bytes.len()
                && (self.bytes[end].is_ascii_digit() || self.bytes[end] == b'.')
            {
                end += 1;
            }
            if end < self.bytes.len() && (self.bytes[end] == b'e' || self.bytes[end] == b'E') {
                let mut exp_end = end + 1;
                if exp_end < self.bytes.len()
                    && (self.bytes[exp_end] == b'+' || self.bytes[exp_end] == b'-')
                {
                    exp_end += 1;
                }
                if exp_end < self.bytes.len() && self.bytes[exp_end].is_ascii_digit() {
                    while exp_end < self.bytes.len() && self.bytes[exp_end].is_ascii_digit() {
                        exp_end += 1;
                    }
                    end = exp_end;
                }
            }
            let text = &self.src[self.pos..end];
            let value: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
                expected: "numeric literal",
            })?;
            self.pos = end;
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = self.pos;
            while end < self.bytes.len()
                && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
            {
                end += 1;
            }
            let ident = self.src[self.pos..end].to_string();
            self.pos = end;
            return Ok((Tok::Ident(ident), start));
        }
        Err(ParseError {
            offset: start,
            message: format!("unexpected character `{}`", &self.src[start..].chars().next().unwrap()),
            expected: "token",
        })
    }
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, offset) = lexer.next()?;
        Ok(Parser { lexer, tok, offset })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.offset = offset;
        Ok(())
    }

    // sum := product (('+'|'-') product)*
    fn sum(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump()?;
            let rhs = self.product()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // product := unary (('*'|'/') unary)*
    fn product(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            let inner = self.unary()?;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right associative, binds above unary '-')
    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.bump()?;
            // Right associativity: the exponent may itself be a power or a
            // unary minus (`2^-1` is accepted).
            let exp = self.unary()?;
            return Ok(ExprAst::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(ExprAst::Num(v))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.sum()?;
                if self.tok != Tok::RParen {
                    return Err(ParseError {
                        offset: self.offset,
                        message: "unclosed parenthesis".into(),
                        expected: "`)`",
                    });
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump()?;
                match name.as_str() {
                    "t" => Ok(ExprAst::Var),
                    "pi" => Ok(ExprAst::Num(std::f64::consts::PI)),
                    "e" => Ok(ExprAst::Num(std::f64::consts::E)),
                    "sin" | "cos" | "exp" | "sqrt" | "log" | "abs" => {
                        let op = match name.as_str() {
                            "sin" => UnaryOp::Sin,
                            "cos" => UnaryOp::Cos,
                            "exp" => UnaryOp::Exp,
                            "sqrt" => UnaryOp::Sqrt,
                            "log" => UnaryOp::Log,
                            _ => UnaryOp::Abs,
                        };
                        if self.tok != Tok::LParen {
                            return Err(ParseError {
                                offset: self.offset,
                                message: format!("function `{name}` needs an argument list"),
                                expected: "`(`",
                            });
                        }
                        self.bump()?;
                        let arg = self.sum()?;
                        if self.tok != Tok::RParen {
                            return Err(ParseError {
                                offset: self.offset,
                                message: "unclosed function call".into(),
                                expected: "`)`",
                            });
                        }
                        self.bump()?;
                        Ok(ExprAst::Unary(op, Box::new(arg)))
                    }
                    other => Err(ParseError {
                        offset: self.offset.saturating_sub(other.len()),
                        message: format!("unknown identifier `{other}`"),
                        expected: "`t`, `pi`, `e`, or a function name",
                    }),
                }
            }
            _ => Err(ParseError {
                offset: self.offset,
                message: "expected expression".into(),
                expected: "number, `t`, `(` or function",
            }),
        }
    }
}

/// Parse an infix expression in the variable `t`.
///
/// Precedence (loosest to tightest): `+ -`, `* /`, unary `-`, `^` (right
/// associative). `pi` and `e` are constants; `sin cos exp sqrt log abs` are
/// the available functions.
pub fn parse(text: &str) -> Result<ExprAst, ParseError> {
    let mut parser = Parser::new(text)?;
    let ast = parser.sum()?;
    if parser.tok != Tok::End {
        return Err(ParseError {
            offset: parser.offset,
            message: "trailing input".into(),
            expected: "end of expression",
        });
    }
    Ok(ast)
}

impl ExprAst {
    /// Evaluate at `t` in IEEE double precision. Deterministic: identical
    /// input always produces the bit-identical result.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let err = |node: &ExprAst, message: &str| EvalError {
            t,
            node: node.to_string(),
            message: message.into(),
        };
        match self {
            ExprAst::Num(v) => Ok(*v),
            ExprAst::Var => Ok(t),
            ExprAst::Unary(op, a) => {
                let x = a.eval(t)?;
                let v = match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(err(self, "square root of a negative number"));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(err(self, "logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                    UnaryOp::Abs => x.abs(),
                };
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(self, "non-finite result"))
                }
            }
            ExprAst::Binary(op, a, b) => {
                let x = a.eval(t)?;
                let y = b.eval(t)?;
                let v = match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(err(self, "division by zero"));
                        }
                        x / y
                    }
                    BinaryOp::Pow => {
                        if x < 0.0 && y.fract() != 0.0 {
                            return Err(err(self, "non-integer power of a negative base"));
                        }
                        x.powf(y)
                    }
                };
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(self, "non-finite result"))
                }
            }
        }
    }
}

impl fmt::Display for ExprAst {
    /// Fully parenthesized rendering; reparsing yields a structurally
    /// identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Num(v) => {
                if *v == v.trunc() && v.abs() < 1e15 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v:e}")
                }
            }
            ExprAst::Var => write!(f, "t"),
            ExprAst::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            ExprAst::Unary(op, a) => write!(f, "{}({a})", op.name()),
            ExprAst::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

// ---------------------------------------------------------------------------
// Sampled tables

/// A function given by ascending samples, interpolated with the
/// Fritsch-Carlson monotone cubic: the interpolant has no overshoot between
/// samples, which keeps fed-back reconstructed potentials well behaved.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    ts: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Error constructing a sampled table.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum TableError {
    #[error("table needs at least 2 samples, got {0}")]
    TooFew(usize),
    #[error("table abscissae must be strictly ascending (violated at row {0})")]
    NotAscending(usize),
    #[error("table contains a non-finite entry at row {0}")]
    NonFinite(usize),
    #[error("malformed table row {0}: {1}")]
    BadRow(usize, String),
}

impl SampledTable {
    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Result<Self, TableError> {
        if ts.len() < 2 || ts.len() != values.len() {
            return Err(TableError::TooFew(ts.len().min(values.len())));
        }
        for i in 0..ts.len() {
            if !ts[i].is_finite() || !values[i].is_finite() {
                return Err(TableError::NonFinite(i));
            }
            if i > 0 && ts[i] <= ts[i - 1] {
                return Err(TableError::NotAscending(i));
            }
        }
        let slopes = monotone_slopes(&ts, &values);
        Ok(SampledTable { ts, values, slopes })
    }

    /// Parse CSV text with header `t,value`.
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('t')) {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().unwrap_or("");
            let b = parts
                .next()
                .ok_or_else(|| TableError::BadRow(i, "missing value column".into()))?;
            let t: f64 = a
                .trim()
                .parse()
                .map_err(|e| TableError::BadRow(i, format!("bad t `{a}`: {e}")))?;
            let v: f64 = b
                .trim()
                .parse()
                .map_err(|e| TableError::BadRow(i, format!("bad value `{b}`: {e}")))?;
            ts.push(t);
            values.push(v);
        }
        SampledTable::new(ts, values)
    }

    /// Evaluate by monotone cubic interpolation; clamps to the end samples
    /// outside the table range (the tables used here cover [0, π]).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.values[0];
        }
        if t >= self.ts[n - 1] {
            return self.values[n - 1];
        }
        let k = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let h = self.ts[k + 1] - self.ts[k];
        let s = (t - self.ts[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }
}

/// Fritsch-Carlson slope limiting for a monotone cubic interpolant.
fn monotone_slopes(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let d: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (ts[i + 1] - ts[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 {
            0.0
        } else {
            (d[i - 1] + d[i]) / 2.0
        };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d[i];
        let b = m[i + 1] / d[i];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * d[i];
            m[i + 1] = tau * b * d[i];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Unified function handle

/// A coefficient function: either a parsed expression or a sampled table.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Expr { source: String, ast: ExprAst },
    Table(SampledTable),
}

impl ScalarFn {
    pub fn from_expr(text: &str) -> Result<Self, ParseError> {
        Ok(ScalarFn::Expr {
            source: text.to_string(),
            ast: parse(text)?,
        })
    }

    pub fn constant(v: f64) -> Self {
        ScalarFn::Expr {
            source: format!("{v}"),
            ast: ExprAst::Num(v),
        }
    }

    pub fn from_table(table: SampledTable) -> Self {
        ScalarFn::Table(table)
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            ScalarFn::Expr { ast, .. } => ast.eval(t),
            ScalarFn::Table(tab) => Ok(tab.eval(t)),
        }
    }

    /// True if the function is the literal constant zero (used to detect
    /// the no-delay case without sampling).
    pub fn is_literal_zero(&self) -> bool {
        match self {
            ScalarFn::Expr { ast, .. } => matches!(ast, ExprAst::Num(v) if *v == 0.0),
            ScalarFn::Table(tab) => tab.values.iter().all(|v| *v == 0.0),
        }
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Expr { source, .. } => write!(f, "{source}"),
            ScalarFn::Table(tab) => write!(f, "<table with {} samples>", tab.ts.len()),
        }
    }
}
