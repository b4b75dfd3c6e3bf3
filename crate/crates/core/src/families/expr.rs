//! Integer expressions over the pattern parameters `x1` and `i`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(i64),
    X1,
    I,
    Neg(Box<Expr>),
    Bin(Box<Expr>, Op, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens: &tokens, at: 0, src };
        let e = p.sum()?;
        if p.at != tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x1: i64, i: i64) -> Result<i64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::X1 => x1,
            Expr::I => i,
            Expr::Neg(e) => -e.eval(x1, i)?,
            Expr::Bin(a, op, b) => {
                let (a, b) = (a.eval(x1, i)?, b.eval(x1, i)?);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => {
                        if b == 0 || a % b != 0 {
                            return Err(Error::Fixture(format!("inexact division {a} / {b} in `{self}`")));
                        }
                        a / b
                    }
                }
            }
        })
    }

    pub fn uses_i(&self) -> bool {
        match self {
            Expr::I => true,
            Expr::Num(_) | Expr::X1 => false,
            Expr::Neg(e) => e.uses_i(),
            Expr::Bin(a, _, b) => a.uses_i() || b.uses_i(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X1 => f.write_str("x1"),
            Expr::I => f.write_str("i"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(a, op, b) => {
                let c = match op {
                    Op::Add => '+',
                    Op::Sub => '-',
                    Op::Mul => '*',
                    Op::Div => '/',
                };
                write!(f, "({a} {c} {b})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(i64),
    X1,
    I,
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(d) = chars.peek().and_then(|d| d.to_digit(10)) {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d as i64))
                        .ok_or_else(|| Error::Fixture(format!("number too large in `{src}`")))?;
                    chars.next();
                }
                out.push(Tok::Num(v));
            }
            'x' => {
                chars.next();
                if chars.next() != Some('1') {
                    return Err(Error::Fixture(format!("unknown variable in `{src}`")));
                }
                out.push(Tok::X1);
            }
            'i' => {
                chars.next();
                out.push(Tok::I);
            }
            '+' | '-' | '*' | '/' => {
                chars.next();
                out.push(Tok::Op(c));
            }
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            other => return Err(Error::Fixture(format!("unexpected `{other}` in `{src}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Tok],
    at: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Fixture(format!("{what} in expression `{}`", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.at)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { Op::Add } else { Op::Sub };
            self.at += 1;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { Op::Mul } else { Op::Div };
            self.at += 1;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.at += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| self.error("unexpected end"))?;
        self.at += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::X1 => Ok(Expr::X1),
            Tok::I => Ok(Expr::I),
            Tok::Open => {
                let e = self.sum()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(self.error("missing `)`"));
                }
                self.at += 1;
                Ok(e)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x1: i64, i: i64) -> i64 {
        Expr::parse(s).unwrap().eval(x1, i).unwrap()
    }

    #[test]
    fn precedence_and_parentheses() {
        assert_eq!(ev("2*x1 + 2*i - 4", 5, 1), 8);
        assert_eq!(ev("(x1 + 1)/2 + 2", 9, 0), 7);
        assert_eq!(ev("x1/2 + 2", 6, 0), 5);
        assert_eq!(ev("-x1 + 10", 3, 0), 7);
        assert_eq!(ev("1 - 2 - 3", 0, 0), -4);
    }

    #[test]
    fn inexact_division_is_rejected() {
        assert!(Expr::parse("x1/2").unwrap().eval(5, 0).is_err());
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in ["", "x1 +", "(x1", "x2", "y", "3 3", "x1 % 2"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tracks_use_of_i() {
        assert!(Expr::parse("x1 + 2*i").unwrap().uses_i());
        assert!(!Expr::parse("(x1 - 3)/2").unwrap().uses_i());
    }
}
