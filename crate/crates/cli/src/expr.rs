//! Arithmetic expression parser and evaluator for system files.
//!
//! Grammar, whitespace insensitive:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so
//! `-x^2` reads as `-(x^2)` and `2^-3` needs no parentheses. Names
//! resolve to coordinates first, then the builtin constants `pi`, `tau`,
//! `e`; anything else is rejected at parse time so a typo fails before
//! numerics start. The printer emits exactly the parentheses needed to
//! reparse to the same tree, which is what the round-trip tests check.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Coord(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// True when no coordinate appears, i.e. the value is position free.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Coord(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Coord(_) | Expr::Call(..) => 5,
        }
    }

    /// Renders with exactly the parentheses required so that parsing the
    /// output reproduces this tree.
    pub fn render(&self, names: &[String]) -> String {
        fn wrap(s: String, needed: bool) -> String {
            if needed {
                format!("({s})")
            } else {
                s
            }
        }
        match self {
            Expr::Num(v) => format!("{v}"),
            Expr::Coord(i) => names[*i].clone(),
            Expr::Neg(a) => {
                format!("-{}", wrap(a.render(names), a.precedence() < 3))
            }
            Expr::Add(a, b) => format!(
                "{} + {}",
                wrap(a.render(names), a.precedence() < 1),
                wrap(b.render(names), b.precedence() <= 1)
            ),
            Expr::Sub(a, b) => format!(
                "{} - {}",
                wrap(a.render(names), a.precedence() < 1),
                wrap(b.render(names), b.precedence() <= 1)
            ),
            Expr::Mul(a, b) => format!(
                "{} * {}",
                wrap(a.render(names), a.precedence() < 2),
                wrap(b.render(names), b.precedence() <= 2)
            ),
            Expr::Div(a, b) => format!(
                "{} / {}",
                wrap(a.render(names), a.precedence() < 2),
                wrap(b.render(names), b.precedence() <= 2)
            ),
            Expr::Pow(a, b) => format!(
                "{}^{}",
                wrap(a.render(names), a.precedence() <= 4),
                wrap(b.render(names), b.precedence() < 3)
            ),
            Expr::Call(f, a) => format!("{}({})", f.name(), a.render(names)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// Byte range in the input the error points at.
    pub span: (usize, usize),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at bytes {}..{})", self.message, self.span.0, self.span.1)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Token plus the byte span it came from.
type SpannedTok = (Tok, (usize, usize));

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<SpannedTok>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' => lx.number(start)?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while lx.pos < lx.src.len()
                        && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                    {
                        lx.pos += 1;
                    }
                    Tok::Name(std::str::from_utf8(&lx.src[start..lx.pos]).unwrap().to_string())
                }
                _ => {
                    return Err(ParseError {
                        message: format!("unexpected character {:?}", src[start..].chars().next().unwrap()),
                        span: (start, start + 1),
                    })
                }
            };
            out.push((tok, (start, lx.pos)));
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all: "2e" is the number 2 followed
                // by the name "e".
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            message: format!("malformed number {text:?}"),
            span: (start, self.pos),
        })
    }
}

struct Parser<'a> {
    toks: Vec<SpannedTok>,
    pos: usize,
    names: &'a [String],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or((self.end, self.end), |(_, s)| *s)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError { message: format!("expected {what}"), span: self.span() })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Num(_)) => {
                if let Tok::Num(v) = self.bump() {
                    Ok(Expr::Num(v))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen, "closing parenthesis")?;
                Ok(e)
            }
            Some(Tok::Name(_)) => {
                let name = if let Tok::Name(n) = self.bump() { n } else { unreachable!() };
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        message: format!("unknown function {name:?}"),
                        span,
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.eat(&Tok::RParen, "closing parenthesis")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                // Coordinates shadow constants, so a system may name a
                // coordinate "e" without silently meaning Euler's number.
                if let Some(i) = self.names.iter().position(|n| *n == name) {
                    return Ok(Expr::Coord(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "tau" => Ok(Expr::Num(std::f64::consts::TAU)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => Err(ParseError { message: format!("unknown name {name:?}"), span }),
                }
            }
            _ => Err(ParseError { message: "expected a value".into(), span }),
        }
    }
}

/// Parses `src` against the given coordinate names.
pub fn parse(src: &str, names: &[String]) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src)?;
    if toks.is_empty() {
        return Err(ParseError { message: "empty expression".into(), span: (0, 0) });
    }
    let mut p = Parser { toks, pos: 0, names, end: src.len() };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(ParseError { message: "unexpected trailing input".into(), span: p.span() });
    }
    Ok(e)
}
