//! Textual product expressions over q-Pochhammer symbols.
//!
//! The catalog states every product side as plain text in this grammar so
//! it can be read, diffed, and independently re-evaluated:
//!
//!   expr     := prod ('/' prod)?
//!   prod     := factor+
//!   factor   := '(' mono (',' mono)* ';' mono ')' '_' ('inf' | uint)
//!   mono     := ['-'] 'q' ['^' exponent]
//!   exponent := uint | '(' uint '/' uint ')'
//!
//! Whitespace is insignificant.  Exponents are literal nonnegative
//! rationals; parameters are always instantiated before rendering.  The
//! multi-argument convention (a1,...,at;z)_n is the product of the
//! single-argument symbols with the shared base z.

use crate::qfunctions::{poch_finite_signed, poch_inf_signed, QMonomial};
use crate::series::QSeries;
use crate::{Error, Rat, Result};

// ---------------------------------------------------------------------------
// Syntax tree
// ---------------------------------------------------------------------------

/// Length of a Pochhammer factor: (…)_n or (…)_inf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochLength {
    Finite(u32),
    Infinite,
}

/// One Pochhammer factor (a_1, …, a_t; ±q^base)_len.
///
/// The base exponent is positive; the base may carry a sign (triple-product
/// style factors such as (…; −q^(5/2))_inf need it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PochFactor {
    pub args: Vec<QMonomial>,
    pub base: QMonomial,
    pub length: PochLength,
}

/// A quotient of products of Pochhammer factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductExpr {
    pub numerator: Vec<PochFactor>,
    pub denominator: Vec<PochFactor>,
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser { text: text.as_bytes(), pos: 0 }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected an unsigned integer"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.error("integer literal out of range"))
    }

    /// exponent := uint | '(' uint '/' uint ')'
    fn exponent(&mut self) -> Result<Rat> {
        if self.eat(b'(') {
            let num = self.uint()?;
            self.expect(b'/')?;
            let den = self.uint()?;
            if den == 0 {
                return Err(self.error("zero denominator in exponent"));
            }
            self.expect(b')')?;
            Ok(Rat::new(num, den))
        } else {
            Ok(Rat::from_integer(self.uint()?))
        }
    }

    /// mono := ['-'] 'q' ['^' exponent]
    fn mono(&mut self) -> Result<QMonomial> {
        let sign = if self.eat(b'-') { -1 } else { 1 };
        if !self.eat(b'q') {
            return Err(self.error("expected 'q'"));
        }
        let exp = if self.eat(b'^') { self.exponent()? } else { Rat::from_integer(1) };
        Ok(QMonomial { sign, exp })
    }

    /// factor := '(' mono (',' mono)* ';' mono ')' '_' ('inf' | uint)
    fn factor(&mut self) -> Result<PochFactor> {
        self.expect(b'(')?;
        let mut args = vec![self.mono()?];
        while self.eat(b',') {
            args.push(self.mono()?);
        }
        self.expect(b';')?;
        let base = self.mono()?;
        self.expect(b')')?;
        self.expect(b'_')?;
        self.skip_ws();
        let length = if self.text[self.pos..].starts_with(b"inf") {
            self.pos += 3;
            PochLength::Infinite
        } else {
            let n = self.uint()?;
            PochLength::Finite(u32::try_from(n).map_err(|_| self.error("length out of range"))?)
        };
        let factor = PochFactor { args, base, length };
        self.check_factor(&factor)?;
        Ok(factor)
    }

    /// Semantic checks: positive base exponent always; infinite factors must
    /// satisfy the infinite-product preconditions (no vanishing +q^0 arg).
    fn check_factor(&self, f: &PochFactor) -> Result<()> {
        if f.base.exp <= Rat::from_integer(0) {
            return Err(self.error("base exponent must be positive"));
        }
        if f.length == PochLength::Infinite {
            for a in &f.args {
                if a.exp == Rat::from_integer(0) && a.sign > 0 {
                    return Err(self.error("argument q^0 with sign + makes an infinite product vanish"));
                }
            }
        }
        Ok(())
    }

    /// prod := factor+   (stops before '/' or end of input)
    fn prod(&mut self) -> Result<Vec<PochFactor>> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'(') {
            factors.push(self.factor()?);
        }
        Ok(factors)
    }

    fn expr(&mut self) -> Result<ProductExpr> {
        let numerator = self.prod()?;
        let denominator = if self.eat(b'/') { self.prod()? } else { Vec::new() };
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(ProductExpr { numerator, denominator })
    }
}

/// Parses a product expression, reporting the byte position on failure.
pub fn parse(text: &str) -> Result<ProductExpr> {
    Parser::new(text).expr()
}

// ---------------------------------------------------------------------------
// Renderer
// ---------------------------------------------------------------------------

fn render_mono(m: &QMonomial, out: &mut String) {
    if m.sign < 0 {
        out.push('-');
    }
    out.push('q');
    if !m.exp.is_integer() {
        out.push_str(&format!("^({}/{})", m.exp.numer(), m.exp.denom()));
    } else if *m.exp.numer() != 1 {
        out.push_str(&format!("^{}", m.exp.numer()));
    }
}

fn render_factor(f: &PochFactor, out: &mut String) {
    out.push('(');
    for (i, a) in f.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        render_mono(a, out);
    }
    out.push(';');
    render_mono(&f.base, out);
    out.push_str(")_");
    match f.length {
        PochLength::Infinite => out.push_str("inf"),
        PochLength::Finite(n) => out.push_str(&n.to_string()),
    }
}

/// Renders the canonical text form; `parse(render(e))` equals `e`.
pub fn render(expr: &ProductExpr) -> String {
    let mut out = String::new();
    for (i, f) in expr.numerator.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        render_factor(f, &mut out);
    }
    if !expr.denominator.is_empty() {
        out.push_str(" / ");
        for (i, f) in expr.denominator.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            render_factor(f, &mut out);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

fn eval_factor(f: &PochFactor, denom: u32, order: i64) -> Result<QSeries> {
    let mut s = QSeries::one(denom, order);
    for a in &f.args {
        let one_arg = match f.length {
            PochLength::Infinite => poch_inf_signed(*a, f.base, denom, order)?,
            PochLength::Finite(n) => poch_finite_signed(*a, f.base, n, denom, order)?,
        };
        s = s.mul(&one_arg)?;
    }
    Ok(s)
}

/// Evaluates the expression as an exact series on substrate D through
/// t^order: numerator factors multiplied out, denominator inverted once.
pub fn eval(expr: &ProductExpr, denom: u32, order: i64) -> Result<QSeries> {
    let mut num = QSeries::one(denom, order);
    for f in &expr.numerator {
        num = num.mul(&eval_factor(f, denom, order)?)?;
    }
    if expr.denominator.is_empty() {
        return Ok(num);
    }
    let mut den = QSeries::one(denom, order);
    for f in &expr.denominator {
        den = den.mul(&eval_factor(f, denom, order)?)?;
    }
    num.mul(&den.invert()?)
}

/// Convenience: parse and evaluate in one step.
pub fn eval_text(text: &str, denom: u32, order: i64) -> Result<QSeries> {
    eval(&parse(text)?, denom, order)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    #[test]
    fn parse_smallest_sentence() {
        let e = parse("(q;q)_inf").unwrap();
        assert_eq!(e.numerator.len(), 1);
        assert!(e.denominator.is_empty());
        let f = &e.numerator[0];
        assert_eq!(f.args, vec![QMonomial::plus(1, 1)]);
        assert_eq!(f.base, QMonomial::plus(1, 1));
        assert_eq!(f.length, PochLength::Infinite);
    }

    #[test]
    fn parse_multi_argument_quotient() {
        let e = parse("(-q^3,-q^7,q^10;q^10)_inf (q^4,q^16;q^20)_inf / (q^4;q^4)_inf").unwrap();
        assert_eq!(e.numerator.len(), 2);
        assert_eq!(e.denominator.len(), 1);
        assert_eq!(e.numerator[0].args.len(), 3);
        assert_eq!(e.numerator[0].args[0], QMonomial::minus(3, 1));
        assert_eq!(e.numerator[1].args[1], QMonomial::plus(16, 1));
        assert_eq!(e.denominator[0].base, QMonomial::plus(4, 1));
    }

    #[test]
    fn parse_fractional_exponents_and_whitespace() {
        let e = parse("  ( -q^(1/2) , q^(3/4) ; q )_ 5  ").unwrap();
        let f = &e.numerator[0];
        assert_eq!(f.args[0], QMonomial::minus(1, 2));
        assert_eq!(f.args[1], QMonomial::plus(3, 4));
        assert_eq!(f.length, PochLength::Finite(5));
    }

    #[test]
    fn parse_rejects_symbols_with_position() {
        let err = parse("(q^s;q)_inf").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert_eq!(pos, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_truncated_factor() {
        assert!(parse("(q;q)_").is_err());
        assert!(parse("(q;q)").is_err());
        assert!(parse("(;q)_inf").is_err());
        assert!(parse("(q;q)_inf extra").is_err());
    }

    #[test]
    fn parse_rejects_vanishing_infinite_argument() {
        assert!(parse("(q^0;q)_inf").is_err());
        // Finite length is fine: (q^0;q)_2 = 0 is a legitimate polynomial.
        assert!(parse("(q^0;q)_2").is_ok());
        // Sign − at exponent 0 is fine even for infinite length.
        assert!(parse("(-q^0;q)_inf").is_ok());
    }

    #[test]
    fn round_trip_is_idempotent() {
        for text in [
            "(q;q)_inf",
            "(-q^3,-q^7,q^10;q^10)_inf (q^4,q^16;q^20)_inf / (q^4;q^4)_inf",
            "(q^(1/2);q)_3 / (q^2,-q^2;-q^2)_inf",
            "(q^4;q^20)_7",
        ] {
            let e1 = parse(text).unwrap();
            let rendered = render(&e1);
            let e2 = parse(&rendered).unwrap();
            assert_eq!(e1, e2, "round-trip of {text}");
            assert_eq!(rendered, render(&e2));
        }
    }

    #[test]
    fn eval_cancellation_is_one() {
        let s = eval_text("(q;q)_inf / (q;q)_inf", 1, 30).unwrap();
        assert_eq!(s, QSeries::one(1, 30));
    }

    #[test]
    fn eval_pentagonal_quotient_counts_5_regular_partitions() {
        // Partitions with no part divisible by 5: 1,1,2,3,5,6 at q^0..q^5.
        let s = eval_text("(q^5;q^5)_inf / (q;q)_inf", 1, 40).unwrap();
        let got: Vec<i64> = (0..=5).map(|n| i64::try_from(&s.coeff_q(n).unwrap()).unwrap()).collect();
        assert_eq!(got, vec![1, 1, 2, 3, 5, 6]);
    }

    #[test]
    fn eval_signed_base_expansion() {
        // (q;-q)_2 = (1-q)(1+q^2) = 1 - q + q^2 - q^3.
        let s = eval_text("(q;-q)_2", 1, 10).unwrap();
        let got: Vec<i64> = (0..=4).map(|n| i64::try_from(&s.coeff_q(n).unwrap()).unwrap()).collect();
        assert_eq!(got, vec![1, -1, 1, -1, 0]);
    }

    #[test]
    fn eval_off_substrate_is_an_error() {
        assert!(eval_text("(q^(1/2);q)_inf", 1, 10).is_err());
        assert!(eval_text("(q^(1/2);q)_inf", 2, 10).is_ok());
    }

    #[test]
    fn eval_order_independence_of_factor_order() {
        let a = eval_text("(q;q)_inf (q^2;q^3)_inf", 1, 25).unwrap();
        let b = eval_text("(q^2;q^3)_inf (q;q)_inf", 1, 25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eval_finite_against_qfunctions() {
        let via_expr = eval_text("(q;q)_4", 1, 20).unwrap();
        let direct = crate::qfunctions::poch_finite(QMonomial::q(), Rat::one(), 4, 1, 20).unwrap();
        assert_eq!(via_expr, direct);
        assert_eq!(via_expr.coeff_q(0).unwrap(), BigInt::one());
    }
}
