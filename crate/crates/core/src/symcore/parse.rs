//! Expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' INT)?
//! atom   := INT ('/' INT)? | IDENT | '(' expr ')'
//! ```
//!
//! Multiplication is always explicit. Columns in errors are 1-based.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{Polynomial, Rational, SymError, VarSet};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
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

fn syntax(column: usize, message: impl Into<String>) -> SymError {
    SymError::Syntax {
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, SymError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((Tok::Int(digits.parse().expect("digits")), col));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(syntax(col, format!("unexpected character `{c}`"))),
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a VarSet,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Polynomial, SymError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, SymError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Ident(_) | Tok::Int(_) | Tok::LParen => {
                    return Err(syntax(self.column(), "implicit multiplication is not allowed; use `*`"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, SymError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, SymError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let col = self.column();
        match self.bump() {
            (Tok::Int(n), _) => {
                let e = n
                    .to_u32()
                    .ok_or_else(|| syntax(col, "exponent too large"))?;
                if *self.peek() == Tok::Caret {
                    return Err(syntax(self.column(), "chained `^` is ambiguous; use parentheses"));
                }
                Ok(base.pow(e))
            }
            (Tok::Minus, _) => Err(SymError::NegativeExponent { column: col }),
            _ => Err(syntax(col, "`^` must be followed by a nonnegative integer literal")),
        }
    }

    fn atom(&mut self) -> Result<Polynomial, SymError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(n) => {
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dcol = self.column();
                    match self.bump() {
                        (Tok::Int(d), _) if d.is_zero() => Err(syntax(dcol, "zero denominator")),
                        (Tok::Int(d), _) => Ok(Polynomial::constant(self.vars, Rational::new(n, d))),
                        _ => Err(syntax(dcol, "`/` is only allowed between integer literals")),
                    }
                } else {
                    Ok(Polynomial::constant(self.vars, Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => match self.vars.index_of(&name) {
                Some(i) => Polynomial::var(self.vars, i),
                None => Err(SymError::UnknownVariable { name, column: col }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                let rcol = self.column();
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    _ => Err(syntax(rcol, "expected `)`")),
                }
            }
            Tok::End => Err(syntax(col, "unexpected end of input")),
            other => Err(syntax(col, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a polynomial expression over the given variables.
pub fn parse(text: &str, vars: &VarSet) -> Result<Polynomial, SymError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let out = p.expr()?;
    match p.peek() {
        Tok::End => Ok(out),
        Tok::RParen => Err(syntax(p.column(), "unbalanced `)`")),
        Tok::Slash => Err(syntax(p.column(), "`/` is only allowed between integer literals")),
        _ => Err(syntax(p.column(), "unexpected trailing input")),
    }
}

/// Parses a comma separated list of expressions, e.g. a vector field `x,2*y,1`.
pub fn parse_list(text: &str, vars: &VarSet) -> Result<Vec<Polynomial>, SymError> {
    let mut offset = 0;
    let mut out = Vec::new();
    for piece in text.split(',') {
        let p = parse(piece, vars).map_err(|e| shift_column(e, offset))?;
        out.push(p);
        offset += piece.chars().count() + 1;
    }
    Ok(out)
}

fn shift_column(e: SymError, offset: usize) -> SymError {
    match e {
        SymError::Syntax { column, message } => SymError::Syntax {
            column: column + offset,
            message,
        },
        SymError::UnknownVariable { name, column } => SymError::UnknownVariable {
            name,
            column: column + offset,
        },
        SymError::NegativeExponent { column } => SymError::NegativeExponent {
            column: column + offset,
        },
        other => other,
    }
}
