//! Small arithmetic expression language used by the JSON model files.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, the functions
//! `sin cos tan exp ln sqrt abs`, the constants `pi` and `e`, numeric
//! literals and named variables. `^` binds tighter than unary minus and
//! associates to the right, so `-x^2` is `-(x^2)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

/// A compiled expression. Variables are resolved to slot indices at compile time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parse `src`, resolving identifiers against `vars` (slot `i` is `vars[i]`).
    pub fn compile(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
            src,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in `{src}`"
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, slots: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => slots[*i],
            Expr::Neg(a) => -a.eval(slots),
            Expr::Add(a, b) => a.eval(slots) + b.eval(slots),
            Expr::Sub(a, b) => a.eval(slots) - b.eval(slots),
            Expr::Mul(a, b) => a.eval(slots) * b.eval(slots),
            Expr::Div(a, b) => a.eval(slots) / b.eval(slots),
            Expr::Pow(a, b) => {
                let base = a.eval(slots);
                match **b {
                    // integer powers keep exact arithmetic for negative bases
                    Expr::Const(k) if k.fract() == 0.0 && k.abs() <= 64.0 => base.powi(k as i32),
                    _ => base.powf(b.eval(slots)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(slots)),
        }
    }

    /// True if the expression never reads slot `i`.
    pub fn independent_of(&self, i: usize) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(j) => *j != i,
            Expr::Neg(a) | Expr::Call(_, a) => a.independent_of(i),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.independent_of(i) && b.independent_of(i),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3 or 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Expression(format!("bad number `{text}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Tok::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Tok::RParen);
            i += 1;
        } else {
            return Err(Error::Expression(format!(
                "unexpected character `{c}` in `{src}`"
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn err(&self, what: &str) -> Error {
        Error::Expression(format!("{what} in `{}`", self.src))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            // right associative; exponent may carry its own sign
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(self.err("missing `)`")),
                }
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    match self.peek() {
                        Some(Tok::LParen) => {
                            self.pos += 1;
                            let arg = self.expr()?;
                            match self.peek() {
                                Some(Tok::RParen) => {
                                    self.pos += 1;
                                    Ok(Expr::Call(f, Box::new(arg)))
                                }
                                _ => Err(self.err("missing `)` after function argument")),
                            }
                        }
                        _ => Err(self.err(&format!("function `{name}` needs an argument"))),
                    }
                } else if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::Var(i))
                } else if name == "pi" {
                    Ok(Expr::Const(std::f64::consts::PI))
                } else if name == "e" {
                    Ok(Expr::Const(std::f64::consts::E))
                } else {
                    Err(self.err(&format!("unknown identifier `{name}`")))
                }
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[&str], vals: &[f64]) -> f64 {
        Expr::compile(src, vars).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-x^2", &["x"], &[3.0]), -9.0);
        assert_eq!(ev("(1 - 2) - 3", &[], &[]), -4.0);
        assert_eq!(ev("8 / 4 / 2", &[], &[]), 1.0);
        assert_eq!(ev("2^-1", &[], &[]), 0.5);
    }

    #[test]
    fn functions_constants_and_exponents() {
        assert_eq!(ev("sin(0) + cos(0)", &[], &[]), 1.0);
        assert!((ev("pi", &[], &[]) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(ev("1e-3 * 1000", &[], &[]), 1.0);
        assert_eq!(ev("sqrt(eps1)", &["eps1"], &[4.0]), 2.0);
        assert_eq!(ev("(-2)^3", &[], &[]), -8.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::compile("1 +", &[]).is_err());
        assert!(Expr::compile("foo(1)", &[]).is_err());
        assert!(Expr::compile("z", &["x"]).is_err());
        assert!(Expr::compile("(1", &[]).is_err());
        assert!(Expr::compile("1 $ 2", &[]).is_err());
    }

    #[test]
    fn dependency_query() {
        let e = Expr::compile("x*y + 2", &["x", "y", "eps1"]).unwrap();
        assert!(!e.independent_of(0));
        assert!(e.independent_of(2));
    }
}
