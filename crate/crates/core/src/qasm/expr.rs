//! Constant evaluation of gate-parameter expressions.
//!
//! Rational multiples of π stay exact as long as only `+ - * /` on integers,
//! short decimals and `pi` are involved; anything else degrades to a float.

use crate::angle::Angle;

use super::lexer::{Tok, Token};
use super::{ErrorKind, ParseError, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Value {
    /// `num / den`
    Rat(i64, i64),
    /// `num / den · π`
    PiRat(i64, i64),
    Float(f64),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

fn reduce(num: i64, den: i64) -> Option<(i64, i64)> {
    if den == 0 {
        return None;
    }
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if d < 0 {
        Some((n.checked_neg()?, d.checked_neg()?))
    } else {
        Some((n, d))
    }
}

fn rat_add(a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    let num = a.0.checked_mul(b.1)?.checked_add(b.0.checked_mul(a.1)?)?;
    reduce(num, a.1.checked_mul(b.1)?)
}

fn rat_mul(a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    reduce(a.0.checked_mul(b.0)?, a.1.checked_mul(b.1)?)
}

fn rat_div(a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    if b.0 == 0 {
        return None;
    }
    reduce(a.0.checked_mul(b.1)?, a.1.checked_mul(b.0)?)
}

impl Value {
    pub fn to_f64(self) -> f64 {
        match self {
            Value::Rat(n, d) => n as f64 / d as f64,
            Value::PiRat(n, d) => std::f64::consts::PI * n as f64 / d as f64,
            Value::Float(v) => v,
        }
    }

    pub fn to_angle(self) -> Angle {
        match self {
            Value::Rat(0, _) => Angle::ZERO,
            Value::PiRat(n, d) => Angle::pi_frac(n, d),
            v => Angle::Radians(v.to_f64()),
        }
    }

    fn exact(r: Option<(i64, i64)>, pi: bool, fallback: impl FnOnce() -> f64) -> Value {
        match (r, pi) {
            (Some((n, d)), false) => Value::Rat(n, d),
            (Some((0, _)), true) => Value::Rat(0, 1),
            (Some((n, d)), true) => Value::PiRat(n, d),
            (None, _) => Value::Float(fallback()),
        }
    }

    fn add(self, other: Value) -> Value {
        let f = || self.to_f64() + other.to_f64();
        match (self, other) {
            (Value::Rat(a, b), Value::Rat(c, d)) => Value::exact(rat_add((a, b), (c, d)), false, f),
            (Value::PiRat(a, b), Value::PiRat(c, d)) => Value::exact(rat_add((a, b), (c, d)), true, f),
            (Value::Rat(0, _), v) | (v, Value::Rat(0, _)) => v,
            _ => Value::Float(f()),
        }
    }

    fn neg(self) -> Value {
        match self {
            Value::Rat(n, d) => n.checked_neg().map_or(Value::Float(-self.to_f64()), |n| Value::Rat(n, d)),
            Value::PiRat(n, d) => n.checked_neg().map_or(Value::Float(-self.to_f64()), |n| Value::PiRat(n, d)),
            Value::Float(v) => Value::Float(-v),
        }
    }

    fn mul(self, other: Value) -> Value {
        let f = || self.to_f64() * other.to_f64();
        match (self, other) {
            (Value::Rat(a, b), Value::Rat(c, d)) => Value::exact(rat_mul((a, b), (c, d)), false, f),
            (Value::Rat(a, b), Value::PiRat(c, d)) | (Value::PiRat(a, b), Value::Rat(c, d)) => {
                Value::exact(rat_mul((a, b), (c, d)), true, f)
            }
            _ => Value::Float(f()),
        }
    }

    fn div(self, other: Value) -> Result<Value, String> {
        if other.to_f64() == 0.0 {
            return Err("division by zero".into());
        }
        let f = || self.to_f64() / other.to_f64();
        Ok(match (self, other) {
            (Value::Rat(a, b), Value::Rat(c, d)) => Value::exact(rat_div((a, b), (c, d)), false, f),
            (Value::PiRat(a, b), Value::Rat(c, d)) => Value::exact(rat_div((a, b), (c, d)), true, f),
            (Value::PiRat(a, b), Value::PiRat(c, d)) => Value::exact(rat_div((a, b), (c, d)), false, f),
            _ => Value::Float(f()),
        })
    }

    fn pow(self, other: Value) -> Value {
        if let (Value::Rat(a, b), Value::Rat(e, 1)) = (self, other) {
            if (0..=62).contains(&e) {
                let e = e as u32;
                if let (Some(n), Some(d)) = (a.checked_pow(e), b.checked_pow(e)) {
                    return Value::Rat(n, d);
                }
            }
        }
        Value::Float(self.to_f64().powf(other.to_f64()))
    }
}

/// Reads a decimal literal exactly when it has at most 15 significant digits
/// and no exponent.
pub(crate) fn decimal_value(text: &str) -> Option<Value> {
    if text.contains(['e', 'E']) {
        return text.parse().ok().map(Value::Float);
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = format!("{int}{frac}");
    let significant = digits.trim_start_matches('0');
    if significant.len() <= 15 && frac.len() <= 15 {
        let num: i64 = if significant.is_empty() { 0 } else { significant.parse().ok()? };
        let den = 10i64.pow(frac.len() as u32);
        let (n, d) = reduce(num, den)?;
        return Some(Value::Rat(n, d));
    }
    text.parse().ok().map(Value::Float)
}

pub(crate) struct ExprParser<'a> {
    pub tokens: &'a [Token],
    pub pos: usize,
}

type ExprResult = Result<Value, ParseError>;

impl<'a> ExprParser<'a> {
    fn peek(&self) -> &'a Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &'a Token {
        let t = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, sym: &'static str) -> bool {
        if self.peek().tok == Tok::Sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail(&self, span: SourceSpan, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        ParseError::new(kind, span, message)
    }

    pub fn expression(&mut self) -> ExprResult {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = acc.add(self.term()?);
            } else if self.eat("-") {
                acc = acc.add(self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> ExprResult {
        let mut acc = self.unary()?;
        loop {
            if self.eat("*") {
                acc = acc.mul(self.unary()?);
            } else if self.peek().tok == Tok::Sym("/") {
                let span = self.bump().span;
                let rhs = self.unary()?;
                acc = acc.div(rhs).map_err(|m| self.fail(span, ErrorKind::Semantic, m))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> ExprResult {
        if self.eat("-") {
            return Ok(self.unary()?.neg());
        }
        if self.eat("+") {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat("**") || self.eat("^") {
            let exponent = self.unary()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> ExprResult {
        let token = self.bump();
        match &token.tok {
            Tok::Int(v) => match i64::try_from(*v) {
                Ok(v) => Ok(Value::Rat(v, 1)),
                Err(_) => Ok(Value::Float(*v as f64)),
            },
            Tok::Float(text) => decimal_value(text)
                .ok_or_else(|| self.fail(token.span, ErrorKind::Lex, format!("malformed number `{text}`"))),
            Tok::Sym("(") => {
                let v = self.expression()?;
                self.expect_close()?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" | "π" => Ok(Value::PiRat(1, 1)),
                "tau" | "τ" => Ok(Value::PiRat(2, 1)),
                "euler" | "ℇ" => Ok(Value::Float(std::f64::consts::E)),
                f @ ("sin" | "cos" | "tan" | "arcsin" | "arccos" | "arctan" | "exp" | "ln" | "sqrt") => {
                    if !self.eat("(") {
                        return Err(self.fail(token.span, ErrorKind::Syntax, format!("expected `(` after `{f}`")));
                    }
                    let x = self.expression()?.to_f64();
                    self.expect_close()?;
                    let y = match f {
                        "sin" => x.sin(),
                        "cos" => x.cos(),
                        "tan" => x.tan(),
                        "arcsin" => x.asin(),
                        "arccos" => x.acos(),
                        "arctan" => x.atan(),
                        "exp" => x.exp(),
                        "ln" => x.ln(),
                        _ => x.sqrt(),
                    };
                    if !y.is_finite() {
                        return Err(self.fail(token.span, ErrorKind::Semantic, format!("`{f}` of {x} is not finite")));
                    }
                    Ok(Value::Float(y))
                }
                other => Err(self.fail(
                    token.span,
                    ErrorKind::Unsupported,
                    format!("identifier `{other}` in expression (classical variables are not supported)"),
                )),
            },
            Tok::Eof => Err(self.fail(token.span, ErrorKind::Syntax, "expected expression, found end of input")),
            other => Err(self.fail(token.span, ErrorKind::Syntax, format!("expected expression, found {}", describe(other)))),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let t = self.peek();
        if self.eat(")") {
            Ok(())
        } else {
            Err(self.fail(t.span, ErrorKind::Syntax, format!("expected `)`, found {}", describe(&t.tok))))
        }
    }
}

pub(crate) fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Float(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}
