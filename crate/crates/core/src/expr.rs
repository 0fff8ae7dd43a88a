//! A deliberately tiny expression grammar over chart coordinates.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" factor ]          (exponent must fold to a constant)
//! atom   := NUMBER | pi | e | x<k> | fn "(" expr {"," expr} ")" | "(" expr ")"
//! fn     := sin | cos | exp | log | sqrt | atan | atan2
//! ```
//!
//! Coordinates are `x1 .. xd`. Unknown identifiers are rejected at parse
//! time, as are coordinates beyond the declared dimension. There are no
//! conditionals and no loops; anything richer belongs in library code.

use crate::error::{Error, JetError, Result};
use crate::jet::Jet2;

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index.
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Constant power.
    Pow(Box<Expr>, f64),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
    Atan(Box<Expr>),
    Atan2(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Parse `src` as an expression over `dim` coordinates.
    pub fn parse(src: &str, dim: usize) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0, dim, src_len: src.len() };
        let expr = parser.expr()?;
        if parser.pos < parser.tokens.len() {
            let tok = &parser.tokens[parser.pos];
            return Err(parse_err(tok.column, format!("unexpected `{}`", tok.text)));
        }
        Ok(expr)
    }

    /// Evaluate with full second-order derivative propagation.
    pub fn eval_jet(&self, vars: &[Jet2]) -> std::result::Result<Jet2, JetError> {
        let dim = vars.first().map_or(0, Jet2::dim);
        match self {
            Expr::Const(c) => Ok(Jet2::constant(*c, dim)),
            Expr::Coord(i) => Ok(vars[*i].clone()),
            Expr::Add(a, b) => Ok(a.eval_jet(vars)? + b.eval_jet(vars)?),
            Expr::Sub(a, b) => Ok(a.eval_jet(vars)? - b.eval_jet(vars)?),
            Expr::Mul(a, b) => Ok(a.eval_jet(vars)? * b.eval_jet(vars)?),
            Expr::Div(a, b) => a.eval_jet(vars)?.div(&b.eval_jet(vars)?),
            Expr::Neg(a) => Ok(-a.eval_jet(vars)?),
            Expr::Pow(a, q) => a.eval_jet(vars)?.powf(*q),
            Expr::Sin(a) => Ok(a.eval_jet(vars)?.sin()),
            Expr::Cos(a) => Ok(a.eval_jet(vars)?.cos()),
            Expr::Exp(a) => Ok(a.eval_jet(vars)?.exp()),
            Expr::Log(a) => a.eval_jet(vars)?.ln(),
            Expr::Sqrt(a) => a.eval_jet(vars)?.sqrt(),
            Expr::Atan(a) => Ok(a.eval_jet(vars)?.atan()),
            Expr::Atan2(y, x) => Jet2::atan2(&y.eval_jet(vars)?, &x.eval_jet(vars)?),
        }
    }

    /// Value-only evaluation (no derivative propagation). This is the path
    /// finite-difference oracles use, so it stays independent of the jet
    /// derivative rules.
    pub fn eval(&self, x: &[f64]) -> std::result::Result<f64, JetError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Coord(i) => Ok(x[*i]),
            Expr::Add(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            Expr::Sub(a, b) => Ok(a.eval(x)? - b.eval(x)?),
            Expr::Mul(a, b) => Ok(a.eval(x)? * b.eval(x)?),
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(JetError::DivisionByZero);
                }
                Ok(a.eval(x)? / d)
            }
            Expr::Neg(a) => Ok(-a.eval(x)?),
            Expr::Pow(a, q) => {
                let v = a.eval(x)?;
                let integer = q.fract() == 0.0;
                if (!integer && v <= 0.0) || (integer && v == 0.0 && *q < 1.0) {
                    return Err(JetError::Domain { func: "pow", value: v });
                }
                Ok(if integer { v.powi(*q as i32) } else { v.powf(*q) })
            }
            Expr::Sin(a) => Ok(a.eval(x)?.sin()),
            Expr::Cos(a) => Ok(a.eval(x)?.cos()),
            Expr::Exp(a) => Ok(a.eval(x)?.exp()),
            Expr::Log(a) => {
                let v = a.eval(x)?;
                if v <= 0.0 {
                    return Err(JetError::Domain { func: "log", value: v });
                }
                Ok(v.ln())
            }
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v <= 0.0 {
                    return Err(JetError::Domain { func: "sqrt", value: v });
                }
                Ok(v.sqrt())
            }
            Expr::Atan(a) => Ok(a.eval(x)?.atan()),
            Expr::Atan2(y, xx) => {
                let (yv, xv) = (y.eval(x)?, xx.eval(x)?);
                if yv == 0.0 && xv == 0.0 {
                    return Err(JetError::Domain { func: "atan2", value: 0.0 });
                }
                Ok(yv.atan2(xv))
            }
        }
    }

    /// Fold to a constant if no coordinate appears.
    fn fold_const(&self) -> Option<f64> {
        match self {
            Expr::Coord(_) => None,
            _ => self.eval(&[]).ok(),
        }
    }

    fn contains_coord(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Coord(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Atan2(a, b) => a.contains_coord() || b.contains_coord(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a)
            | Expr::Log(a) | Expr::Sqrt(a) | Expr::Atan(a) => a.contains_coord(),
        }
    }
}

#[derive(Debug)]
struct Token {
    text: String,
    column: usize,
    kind: TokenKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokenKind {
    Number,
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn parse_err(column: usize, message: String) -> Error {
    Error::Parse { context: "expression".into(), column, message }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let column = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                let kind = match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    _ => TokenKind::Comma,
                };
                tokens.push(Token { text: c.to_string(), column, kind });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                // scientific notation tail
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = bytes[start..i].iter().collect();
                tokens.push(Token { text, column, kind: TokenKind::Number });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                tokens.push(Token { text, column, kind: TokenKind::Ident });
            }
            other => {
                return Err(parse_err(column, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eof_column(&self) -> usize {
        self.src_len + 1
    }

    fn next_is(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(parse_err(t.column, format!("expected {what}, found `{}`", t.text))),
            None => Err(parse_err(self.eof_column(), format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.next_is(TokenKind::Plus) {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.next_is(TokenKind::Minus) {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.next_is(TokenKind::Star) {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.next_is(TokenKind::Slash) {
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.next_is(TokenKind::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.next_is(TokenKind::Caret) {
            let caret_col = self.bump().column;
            let exponent = self.factor()?;
            if exponent.contains_coord() {
                return Err(parse_err(caret_col, "exponent must be a constant".into()));
            }
            let q = exponent
                .fold_const()
                .ok_or_else(|| parse_err(caret_col, "exponent does not fold to a number".into()))?;
            return Ok(Expr::Pow(Box::new(base), q));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let (kind, text, column) = match self.peek() {
            Some(t) => (t.kind, t.text.clone(), t.column),
            None => {
                return Err(parse_err(self.eof_column(), "expected an expression, found end of input".into()));
            }
        };
        match kind {
            TokenKind::Number => {
                self.pos += 1;
                let v: f64 = text
                    .parse()
                    .map_err(|_| parse_err(column, format!("malformed number `{text}`")))?;
                Ok(Expr::Const(v))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident => {
                self.pos += 1;
                match text.as_str() {
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    "sin" | "cos" | "exp" | "log" | "sqrt" | "atan" => {
                        self.expect(TokenKind::LParen, "`(`")?;
                        let arg = self.expr()?;
                        self.expect(TokenKind::RParen, "`)`")?;
                        let arg = Box::new(arg);
                        Ok(match text.as_str() {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            "exp" => Expr::Exp(arg),
                            "log" => Expr::Log(arg),
                            "sqrt" => Expr::Sqrt(arg),
                            _ => Expr::Atan(arg),
                        })
                    }
                    "atan2" => {
                        self.expect(TokenKind::LParen, "`(`")?;
                        let y = self.expr()?;
                        self.expect(TokenKind::Comma, "`,`")?;
                        let x = self.expr()?;
                        self.expect(TokenKind::RParen, "`)`")?;
                        Ok(Expr::Atan2(Box::new(y), Box::new(x)))
                    }
                    name => {
                        if let Some(rest) = name.strip_prefix('x')
                            && let Ok(k) = rest.parse::<usize>()
                            && k >= 1
                        {
                            if k > self.dim {
                                return Err(parse_err(
                                    column,
                                    format!("coordinate `{name}` exceeds dimension {}", self.dim),
                                ));
                            }
                            return Ok(Expr::Coord(k - 1));
                        }
                        Err(parse_err(column, format!("unknown identifier `{name}`")))
                    }
                }
            }
            _ => Err(parse_err(column, format!("expected an expression, found `{text}`"))),
        }
    }
}
