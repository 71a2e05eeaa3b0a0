//! Expression reader and canonical printer.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor+                       juxtaposition is the product
//! factor := primary ['^' INT]
//! primary:= coeff | gen | '(' expr ')'
//! gen    := 'z' INT ['\''] | 'x'
//! coeff  := RATIONAL | RATIONAL 'i' | 'i' | 'w(' ['-'] RATIONAL ')'
//! ```
//!
//! `w(r)` is e^{2πir}; generator indices are one-based.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::context::Context;
use super::monomial::Monomial;
use super::poly::StarPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Angle, Coefficient};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Imag(BigRational),
    Phase(BigRational),
    Gen(usize, bool),
    X,
    Plus,
    Minus,
    LParen,
    RParen,
    Caret,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse { pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn number_text(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(b) = self.peek_byte() {
            if b.is_ascii_digit() || b == b'.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        // optional "/digits"
        if self.peek_byte() == Some(b'/') && self.src.get(self.pos + 1).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            while let Some(b) = self.peek_byte() {
                if b.is_ascii_digit() || b == b'.' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii")
    }

    fn ident_continues(&self) -> bool {
        self.peek_byte().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let Some(b) = self.peek_byte() else { break };
            let tok = match b {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'0'..=b'9' | b'.' => {
                    let text = self.number_text();
                    let r = parse_rational(text).ok_or_else(|| self.err(start, format!("bad number `{text}`")))?;
                    if self.peek_byte() == Some(b'i') {
                        self.pos += 1;
                        if self.ident_continues() {
                            return Err(self.err(start, "unexpected identifier after number"));
                        }
                        Tok::Imag(r)
                    } else {
                        Tok::Num(r)
                    }
                }
                b'i' => {
                    self.pos += 1;
                    if self.ident_continues() {
                        return Err(self.err(start, "unknown identifier"));
                    }
                    Tok::Imag(BigRational::one())
                }
                b'x' => {
                    self.pos += 1;
                    if self.ident_continues() {
                        return Err(Error::UnknownGenerator(self.word_from(start)));
                    }
                    Tok::X
                }
                b'w' => {
                    self.pos += 1;
                    self.skip_ws();
                    if self.peek_byte() != Some(b'(') {
                        return Err(self.err(self.pos, "expected `(` after `w`"));
                    }
                    self.pos += 1;
                    self.skip_ws();
                    let neg = if self.peek_byte() == Some(b'-') {
                        self.pos += 1;
                        self.skip_ws();
                        true
                    } else {
                        false
                    };
                    let nstart = self.pos;
                    let text = self.number_text();
                    let r = parse_rational(text).ok_or_else(|| self.err(nstart, "expected a rational inside w(...)"))?;
                    self.skip_ws();
                    if self.peek_byte() != Some(b')') {
                        return Err(self.err(self.pos, "expected `)` closing w(...)"));
                    }
                    self.pos += 1;
                    Tok::Phase(if neg { -r } else { r })
                }
                b'z' => {
                    self.pos += 1;
                    let dstart = self.pos;
                    while self.peek_byte().is_some_and(|b| b.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    if dstart == self.pos || self.ident_continues() {
                        while self.ident_continues() {
                            self.pos += 1;
                        }
                        return Err(Error::UnknownGenerator(self.word_from(start)));
                    }
                    let idx: usize = std::str::from_utf8(&self.src[dstart..self.pos])
                        .expect("ascii")
                        .parse()
                        .map_err(|_| self.err(dstart, "generator index too large"))?;
                    let star = if self.peek_byte() == Some(b'\'') {
                        self.pos += 1;
                        true
                    } else {
                        false
                    };
                    Tok::Gen(idx, star)
                }
                b if b.is_ascii_alphabetic() => {
                    while self.ident_continues() {
                        self.pos += 1;
                    }
                    return Err(Error::UnknownGenerator(self.word_from(start)));
                }
                _ => return Err(self.err(start, format!("unexpected character `{}`", b as char))),
            };
            out.push((start, tok));
        }
        Ok(out)
    }

    fn word_from(&self, start: usize) -> String {
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

struct Parser<'c> {
    ctx: &'c Arc<Context>,
    toks: Vec<(usize, Tok)>,
    idx: usize,
    len: usize,
}

impl<'c> Parser<'c> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<StarPolynomial> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                negate = true;
                self.idx += 1;
            }
            Some(Tok::Plus) => self.idx += 1,
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_) | Tok::Imag(_) | Tok::Phase(_) | Tok::Gen(..) | Tok::X | Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<StarPolynomial> {
        if !self.starts_factor() {
            return Err(self.err("expected a factor"));
        }
        let mut acc = self.factor()?;
        while self.starts_factor() {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<StarPolynomial> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            match self.peek().cloned() {
                Some(Tok::Num(r)) if r.is_integer() && !r.is_negative() => {
                    self.idx += 1;
                    let e: u32 = r
                        .to_integer()
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(self.err("expected a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<StarPolynomial> {
        let pos = self.pos();
        let ctx = self.ctx;
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.idx += 1;
        match tok {
            Tok::Num(r) => Ok(ctx.constant(ctx.scalars().rational(&r))),
            Tok::Imag(r) => {
                let i = ctx.scalars().i().map_err(|e| Error::Parse {
                    pos,
                    msg: format!("imaginary unit unavailable: {e}"),
                })?;
                Ok(ctx.constant(i.scale(&r)))
            }
            Tok::Phase(r) => {
                let angle = rational_to_angle(&r).ok_or_else(|| Error::Parse {
                    pos,
                    msg: "phase denominator too large".into(),
                })?;
                let c = ctx.scalars().phase(&angle).map_err(|e| Error::Parse {
                    pos,
                    msg: e.to_string(),
                })?;
                Ok(ctx.constant(c))
            }
            Tok::Gen(idx, star) => {
                if idx == 0 || idx > ctx.n() {
                    return Err(Error::UnknownGenerator(format!("z{idx}")));
                }
                Ok(if star { ctx.gen_star(idx - 1) } else { ctx.gen(idx - 1) })
            }
            Tok::X => ctx.x(),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.idx += 1;
                Ok(inner)
            }
            _ => {
                self.idx -= 1;
                Err(self.err("expected a factor"))
            }
        }
    }
}

fn rational_to_angle(r: &BigRational) -> Option<Angle> {
    let p: i64 = r.numer().try_into().ok()?;
    let q: i64 = r.denom().try_into().ok()?;
    Angle::exact(p, q).ok()
}

/// Parses an expression in the given context; the result is normal-ordered.
pub fn parse(text: &str, ctx: &Arc<Context>) -> Result<StarPolynomial> {
    let toks = Lexer {
        src: text.as_bytes(),
        pos: 0,
    }
    .tokens()?;
    let mut p = Parser {
        ctx,
        toks,
        idx: 0,
        len: text.len(),
    };
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let out = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

pub fn print_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    let pow = |base: String, e: u32| if e == 1 { base } else { format!("{base}^{e}") };
    for j in 0..m.n() {
        if m.a[j] > 0 {
            parts.push(pow(format!("z{}", j + 1), m.a[j]));
        }
        if m.b[j] > 0 {
            parts.push(pow(format!("z{}'", j + 1), m.b[j]));
        }
    }
    if m.c > 0 {
        parts.push(pow("x".into(), m.c));
    }
    parts.join(" ")
}

/// Sign and unsigned text of a coefficient; empty text stands for 1.
fn coefficient_parts(c: &Coefficient) -> (bool, String) {
    match c {
        Coefficient::Exact(e) => {
            let n = e.field().conductor();
            if let Some(r) = e.as_rational() {
                let neg = r.is_negative();
                let a = r.abs();
                return (neg, if a.is_one() { String::new() } else { format_rational(&a) });
            }
            if let Some((r, k)) = e.as_scaled_root() {
                let neg = r.is_negative();
                let a = r.abs();
                let phase = format!("w({})", format_rational(&BigRational::new(BigInt::from(k), BigInt::from(n))));
                return (neg, if a.is_one() { phase } else { format!("{} {phase}", format_rational(&a)) });
            }
            let mut inner = String::new();
            for (i, c) in e.numerators().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let r = BigRational::new(c.clone(), e.denominator().clone());
                let a = r.abs();
                let body = match (i, a.is_one()) {
                    (0, _) => format_rational(&a),
                    (_, true) => format!("w({})", format_rational(&BigRational::new(i.into(), n.into()))),
                    (_, false) => format!(
                        "{} w({})",
                        format_rational(&a),
                        format_rational(&BigRational::new(i.into(), n.into()))
                    ),
                };
                push_signed(&mut inner, r.is_negative(), &body);
            }
            (false, format!("({inner})"))
        }
        Coefficient::Float(z) => {
            if z.im == 0.0 {
                let a = z.re.abs();
                (z.re < 0.0, if a == 1.0 { String::new() } else { format!("{a}") })
            } else if z.re == 0.0 {
                let a = z.im.abs();
                (z.im < 0.0, format!("{a}i"))
            } else {
                let mut inner = format!("{}", z.re);
                push_signed(&mut inner, z.im < 0.0, &format!("{}i", z.im.abs()));
                (false, format!("({inner})"))
            }
        }
    }
}

fn push_signed(out: &mut String, neg: bool, body: &str) {
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    out.push_str(body);
}

/// Canonical text of a polynomial; `parse(print(p)) == p`.
pub fn print(p: &StarPolynomial) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (m, c) in p.terms() {
        let (neg, coeff) = coefficient_parts(c);
        let mono = print_monomial(m);
        let body = match (coeff.is_empty(), mono.is_empty()) {
            (true, true) => "1".to_string(),
            (true, false) => mono,
            (false, true) => coeff,
            (false, false) => format!("{coeff} {mono}"),
        };
        push_signed(&mut out, neg, &body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParameterMatrix;

    fn ctx3() -> Arc<Context> {
        let rho = ParameterMatrix::from_upper(3, |j, k| Angle::exact(1, (3 + j + k) as i64).unwrap());
        Context::new(rho, false, 4)
    }

    #[test]
    fn defining_relation_normalizes() {
        let ctx = ctx3();
        let lhs = parse("z2 z1", &ctx).unwrap();
        let rhs = &ctx.constant(ctx.rho_entry(0, 1)) * &parse("z1 z2", &ctx).unwrap();
        assert_eq!(lhs, rhs);
        assert!(parse("z2 z1 - w(1/4) z1 z2", &ctx).unwrap().is_zero());
    }

    #[test]
    fn normality_cancels() {
        let ctx = ctx3();
        assert!(parse("z1' z1 - z1 z1'", &ctx).unwrap().is_zero());
    }

    #[test]
    fn phase_literal() {
        let rho = ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap());
        let ctx = Context::odd(rho);
        let p = parse("w(1/3) z1", &ctx).unwrap();
        let (m, c) = p.as_single_term().unwrap();
        assert_eq!(m, &Monomial::gen(2, 0));
        assert!((c.to_complex() - Angle::exact(1, 3).unwrap().phase()).norm() < 1e-14);
        assert_eq!(print(&p), "w(1/3) z1");
    }

    #[test]
    fn errors_carry_positions() {
        let ctx = ctx3();
        match parse("z1 + * z2", &ctx) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("z9", &ctx), Err(Error::UnknownGenerator(_))));
        assert!(matches!(parse("y1", &ctx), Err(Error::UnknownGenerator(_))));
        assert!(matches!(parse("x z1", &ctx), Err(Error::XInOddSphere)));
        assert!(matches!(parse("(z1", &ctx), Err(Error::Parse { .. })));
        assert!(matches!(parse("", &ctx), Err(Error::Parse { .. })));
        // w(1/7) is outside Q(ζ_N) for this context
        assert!(matches!(parse("w(1/7)", &ctx), Err(Error::Parse { .. })));
    }

    #[test]
    fn printing_round_trips() {
        let ctx = ctx3();
        for src in [
            "0",
            "1",
            "-z1",
            "z1^2 z2' - 3/2 w(1/4) z3 + 2",
            "(1 + w(1/12)) z1 z1'",
            "i z2 + (z1 + z2)^2",
            "-1/3 z3'^2 z2",
        ] {
            let p = parse(src, &ctx).unwrap();
            let text = print(&p);
            assert_eq!(parse(&text, &ctx).unwrap(), p, "{src} -> {text}");
            assert_eq!(print(&parse(&text, &ctx).unwrap()), text);
        }
    }

    #[test]
    fn float_mode_round_trip() {
        let rho = ParameterMatrix::from_upper(2, |_, _| Angle::float(0.123).unwrap());
        let ctx = Context::odd(rho);
        assert!(!ctx.is_exact());
        let p = parse("z2 z1 + 0.5i z1' - 2.25", &ctx).unwrap();
        let back = parse(&print(&p), &ctx).unwrap();
        assert_eq!(back, p);
    }
}
