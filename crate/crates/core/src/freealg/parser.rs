//! Expression grammar for free polynomials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' INT)*
//! atom   := NUMBER ['i'] | 'i' | 'z' INT | '(' expr ')'
//! ```
//!
//! Products must be written with `*`; `^k` is the `k`-fold noncommutative
//! product of its base, so `(z1*z2)^2` is `z1*z2*z1*z2`.

use super::polynomial::FreePolynomial;
use crate::error::{NcError, Result};
use crate::scalar::FromLiteral;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(String),
    Imaginary(String),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Token::Plus)),
            b'-' => out.push((start, Token::Minus)),
            b'*' => out.push((start, Token::Star)),
            b'^' => out.push((start, Token::Caret)),
            b'(' => out.push((start, Token::LParen)),
            b')' => out.push((start, Token::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let lit = text[start..i].to_string();
                if lit.matches('.').count() > 1 || lit == "." {
                    return Err(NcError::Syntax {
                        pos: start,
                        message: format!("malformed number {lit:?}"),
                    });
                }
                if i < bytes.len() && bytes[i] == b'i' {
                    i += 1;
                    out.push((start, Token::Imaginary(lit)));
                } else {
                    out.push((start, Token::Number(lit)));
                }
                continue;
            }
            b'i' => out.push((start, Token::Imaginary("1".into()))),
            b'z' | b'Z' => {
                i += 1;
                let digits_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if digits_start == i {
                    return Err(NcError::Syntax {
                        pos: start,
                        message: "variable needs an index, e.g. z1".into(),
                    });
                }
                let index = text[digits_start..i].parse().map_err(|_| NcError::Syntax {
                    pos: start,
                    message: "variable index too large".into(),
                })?;
                out.push((start, Token::Var(index)));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(NcError::Syntax {
                    pos: start,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Real(String),
    Imaginary(String),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end: usize,
    d: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Number(_) | Token::Imaginary(_) | Token::Var(_) | Token::LParen) => {
                    return Err(NcError::Syntax {
                        pos: self.offset(),
                        message: "juxtaposition is not a product; insert '*'".into(),
                    });
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Minus) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while let Some(Token::Caret) = self.peek() {
            self.bump();
            let at = self.offset();
            match self.bump() {
                Some(Token::Number(k)) => {
                    let k: u32 = k.parse().map_err(|_| NcError::Syntax {
                        pos: at,
                        message: format!("exponent {k:?} is not an integer"),
                    })?;
                    base = Expr::Pow(Box::new(base), k);
                }
                Some(Token::Minus) => return Err(NcError::NegativeExponent { pos: at }),
                _ => {
                    return Err(NcError::Syntax {
                        pos: at,
                        message: "expected an integer exponent".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Number(s)) => Ok(Expr::Real(s)),
            Some(Token::Imaginary(s)) => Ok(Expr::Imaginary(s)),
            Some(Token::Var(j)) => {
                if j == 0 || j > self.d {
                    Err(NcError::VariableOutOfRange {
                        index: j,
                        d: self.d,
                        pos: at,
                    })
                } else {
                    Ok(Expr::Var(j))
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(NcError::Syntax {
                        pos: self
                            .tokens
                            .get(self.pos - 1)
                            .map(|t| t.0)
                            .unwrap_or(self.end),
                        message: "expected ')'".into(),
                    }),
                }
            }
            Some(t) => Err(NcError::Syntax {
                pos: at,
                message: format!("unexpected {t:?}"),
            }),
            None => Err(NcError::Syntax {
                pos: at,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses an expression into its tree without expanding it.
pub fn parse_expr(text: &str, d: usize) -> Result<Expr> {
    if d == 0 {
        return Err(NcError::Invalid("dimension d must be positive".into()));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
        d,
    };
    let e = p.expr()?;
    if p.pos < tokens.len() {
        return Err(NcError::Syntax {
            pos: p.offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

impl Expr {
    /// Expands into canonical word form.
    pub fn expand<T: FromLiteral>(&self, d: usize) -> Result<FreePolynomial<T>> {
        let literal = |s: &str| {
            T::from_decimal(s).ok_or_else(|| NcError::Syntax {
                pos: 0,
                message: format!("bad literal {s:?}"),
            })
        };
        Ok(match self {
            Expr::Real(s) => FreePolynomial::constant(d, literal(s)?),
            Expr::Imaginary(s) => FreePolynomial::constant(d, literal(s)? * T::imaginary_unit()),
            Expr::Var(j) => FreePolynomial::variable(d, *j)?,
            Expr::Neg(e) => e.expand::<T>(d)?.neg(),
            Expr::Add(a, b) => a.expand::<T>(d)?.add(&b.expand(d)?)?,
            Expr::Sub(a, b) => a.expand::<T>(d)?.sub(&b.expand(d)?)?,
            Expr::Mul(a, b) => a.expand::<T>(d)?.mul(&b.expand(d)?)?,
            Expr::Pow(a, k) => a.expand::<T>(d)?.pow(*k),
        })
    }
}

/// Parses a polynomial expression over `z1..zd`.
pub fn parse<T: FromLiteral>(text: &str, d: usize) -> Result<FreePolynomial<T>> {
    parse_expr(text, d)?.expand(d)
}
