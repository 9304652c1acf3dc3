//! Expression AST, recursive-descent parser and minimal-parenthesis printer.

use std::fmt;

use crate::jet::{Dual, Jet};
use crate::FieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Potential expression. Literals produced by the parser are never negative;
/// a leading minus is always [`Expr::Neg`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is 0).
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
    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => p[*i],
            Expr::Neg(a) => -a.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, b) => {
                let (x, c) = (a.eval(p), b.eval(p));
                if b.is_constant() && c.fract() == 0.0 && c.abs() < 1024.0 {
                    x.powi(c as i32)
                } else {
                    x.powf(c)
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(p);
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        }
    }

    pub(crate) fn dual(&self, p: &[f64], dim: usize) -> Dual {
        match self {
            Expr::Num(v) => Dual::constant(*v),
            Expr::Var(i) => {
                debug_assert!(*i < dim);
                Dual::variable(p[*i], *i)
            }
            Expr::Neg(a) => -a.dual(p, dim),
            Expr::Add(a, b) => a.dual(p, dim) + b.dual(p, dim),
            Expr::Sub(a, b) => a.dual(p, dim) - b.dual(p, dim),
            Expr::Mul(a, b) => a.dual(p, dim) * b.dual(p, dim),
            Expr::Div(a, b) => a.dual(p, dim) / b.dual(p, dim),
            Expr::Pow(a, b) => {
                let base = a.dual(p, dim);
                if b.is_constant() {
                    base.powc(b.eval(p))
                } else {
                    (b.dual(p, dim) * base.ln()).exp()
                }
            }
            Expr::Call(f, a) => {
                let x = a.dual(p, dim);
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        }
    }

    pub fn eval_jet(&self, p: &[f64], dim: usize) -> Jet {
        let d = self.dual(p, dim);
        debug_assert_eq!(d.value().to_bits(), d.into_jet().value.to_bits());
        d.into_jet()
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.prec() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}")?,
            Expr::Var(i) => write!(f, "x{}", i + 1)?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.write_at(f, 2)?;
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_at(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.write_at(f, 5)?;
                f.write_str("^")?;
                b.write_at(f, 3)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// Parses an expression over variables `x1`, `x2`, ... (any index; the
/// dimension check happens in [`crate::parse_field`]).
pub fn parse_expr(src: &str) -> Result<Expr, FieldError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> FieldError {
        FieldError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FieldError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, FieldError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, FieldError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.err("malformed number"));
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.err("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| FieldError::Syntax { pos: start, msg: format!("bad number `{text}`") })
    }

    fn ident(&mut self) -> Result<Expr, FieldError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.err(&format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if idx >= 1 && !name[1..].starts_with('0') {
                return Ok(Expr::Var(idx - 1));
            }
        }
        Err(FieldError::UnknownIdentifier { name: name.to_string(), pos: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("-x1^2").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        assert_eq!(parse_expr("2^3^2").unwrap().eval(&[]), 512.0);
        assert_eq!(parse_expr("8 - 2 - 1").unwrap().eval(&[]), 5.0);
        assert_eq!(parse_expr("8/2/2").unwrap().eval(&[]), 2.0);
        assert_eq!(parse_expr("2*x1^-1").unwrap().eval(&[4.0]), 0.5);
        assert_eq!(parse_expr("1.5e1 + .5").unwrap().eval(&[]), 15.5);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("x1 + * 2") {
            Err(FieldError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("2 + y") {
            Err(FieldError::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "y");
                assert_eq!(pos, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("(x1").is_err());
        assert!(parse_expr("x0").is_err());
        assert!(parse_expr("1e").is_err());
    }

    #[test]
    fn printer_minimal_parentheses() {
        let e = parse_expr("(x1^2 - 1)^2 + x2^2").unwrap();
        assert_eq!(e.to_string(), "(x1^2.0 - 1.0)^2.0 + x2^2.0");
        let e = parse_expr("a - (b - c)".replace('a', "x1").replace('b', "x2").replace('c', "3").as_str()).unwrap();
        assert_eq!(e.to_string(), "x1 - (x2 - 3.0)");
        assert_eq!(parse_expr("(-x1)^2").unwrap().to_string(), "(-x1)^2.0");
    }
}
