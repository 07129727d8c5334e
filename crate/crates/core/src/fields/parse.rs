//! Text syntax for field specifications and field elements.
//!
//! Field specs: `p=5`, `q=9`, `q=9:s^2+1`, `F=F5(t)`, `F=F9(t):s^2+1`.
//! Elements: integer arithmetic expressions in `s` (extension generator)
//! and `t` (function-field variable), e.g. `t^2+3*t+1` or `(t+1)/(t-2)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Poly, RationalFunctionField};

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

/// Parse a field specification. `q_cap` bounds the ground field size.
pub fn parse_field_spec(spec: &str, q_cap: u32) -> Result<FieldCtx> {
    let spec = spec.trim();
    let (key, rest) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidField(format!("expected key=value, got {spec:?}")))?;
    let (ground_text, rational) = match key.trim() {
        "p" | "q" => (rest.trim().to_string(), false),
        "F" => {
            let r = rest.trim();
            let r = r.strip_prefix('F').unwrap_or(r);
            let (head, tail) = match r.split_once(':') {
                Some((h, t)) => (h.trim(), Some(t.trim())),
                None => (r, None),
            };
            let head = head
                .strip_suffix("(t)")
                .ok_or_else(|| Error::InvalidField(format!("expected F=Fq(t), got {spec:?}")))?;
            let g = match tail {
                Some(m) => format!("{head}:{m}"),
                None => head.to_string(),
            };
            (g, true)
        }
        other => return Err(Error::InvalidField(format!("unknown field key {other:?}"))),
    };
    let ground = parse_finite(&ground_text)?;
    if ground.size() > q_cap {
        return Err(Error::InvalidField(format!(
            "q = {} exceeds the configured cap {q_cap}",
            ground.size()
        )));
    }
    Ok(if rational {
        FieldCtx::Rational(RationalFunctionField::new(&ground))
    } else {
        FieldCtx::Finite(ground)
    })
}

fn parse_finite(text: &str) -> Result<Arc<FiniteField>> {
    let (q_text, modulus) = match text.split_once(':') {
        Some((q, m)) => (q.trim(), Some(m.trim())),
        None => (text.trim(), None),
    };
    let q: u32 = q_text
        .parse()
        .map_err(|_| Error::InvalidField(format!("bad field size {q_text:?}")))?;
    match modulus {
        None => FiniteField::of_order(q),
        Some(m) => {
            let ps = crate::fields::finite::prime_factors(q as u64);
            if ps.len() != 1 {
                return Err(Error::InvalidField(format!("{q} is not a prime power")));
            }
            let fp = FiniteField::prime(ps[0] as u32)?;
            let poly = parse_poly(&fp, m, 's')?;
            let f = FiniteField::extension(&fp, poly, "s")?;
            if f.size() != q {
                return Err(Error::InvalidField(format!(
                    "modulus degree gives q = {}, expected {q}",
                    f.size()
                )));
            }
            Ok(f)
        }
    }
}

/// Parse a polynomial over `f` in the variable `var`.
pub fn parse_poly(f: &Arc<FiniteField>, text: &str, var: char) -> Result<Poly> {
    let mut p = Parser::new(text, 0);
    let v = p.sum(&PolyAlg { f, var })?;
    p.finish()?;
    Ok(v)
}

/// Parse a field element of `ctx`. In a finite field the variable `s` is the
/// extension generator; in `F_q(t)` both `s` (constant) and `t` are allowed.
pub fn parse_elem(ctx: &FieldCtx, text: &str) -> Result<FieldElem> {
    parse_elem_at(ctx, text, 0, None)
}

/// As [`parse_elem`], reporting positions shifted by `offset`; `t_binding`
/// overrides the meaning of `t` (used for residue fields of places).
pub fn parse_elem_at(
    ctx: &FieldCtx,
    text: &str,
    offset: usize,
    t_binding: Option<FieldElem>,
) -> Result<FieldElem> {
    let ground = ctx.ground();
    let s = ground.base().map(|_| ctx.constant(ground_var_code(ground)));
    let t = t_binding.or_else(|| match ctx {
        FieldCtx::Rational(r) => Some(FieldElem::Rational(r.t())),
        FieldCtx::Finite(_) => None,
    });
    let mut p = Parser::new(text, offset);
    let v = p.sum(&ElemAlg { ctx, s, t })?;
    p.finish()?;
    Ok(v)
}

/// Code of the generator of the top level of a finite field.
fn ground_var_code(f: &FiniteField) -> u32 {
    match f.base() {
        Some(b) => b.size(),
        None => 0,
    }
}

trait Alg {
    type V: Clone;
    fn int(&self, n: i64) -> Self::V;
    fn var(&self, name: char, pos: usize) -> Result<Self::V>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn div(&self, a: &Self::V, b: &Self::V, pos: usize) -> Result<Self::V>;
    fn pow(&self, a: &Self::V, e: i64, pos: usize) -> Result<Self::V>;
}

struct PolyAlg<'a> {
    f: &'a FiniteField,
    var: char,
}

impl Alg for PolyAlg<'_> {
    type V = Poly;
    fn int(&self, n: i64) -> Poly {
        Poly::constant(self.f.from_int(n))
    }
    fn var(&self, name: char, pos: usize) -> Result<Poly> {
        if name == self.var {
            Ok(Poly::x())
        } else {
            Err(syntax(pos, format!("unexpected variable {name}")))
        }
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a.add(b, self.f)
    }
    fn neg(&self, a: &Poly) -> Poly {
        a.neg(self.f)
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mul(b, self.f)
    }
    fn div(&self, _: &Poly, _: &Poly, pos: usize) -> Result<Poly> {
        Err(syntax(pos, "division not allowed in a polynomial"))
    }
    fn pow(&self, a: &Poly, e: i64, pos: usize) -> Result<Poly> {
        if e < 0 {
            return Err(syntax(pos, "negative exponent in a polynomial"));
        }
        Ok(a.pow(e as u64, self.f))
    }
}

struct ElemAlg<'a> {
    ctx: &'a FieldCtx,
    s: Option<FieldElem>,
    t: Option<FieldElem>,
}

impl Alg for ElemAlg<'_> {
    type V = FieldElem;
    fn int(&self, n: i64) -> FieldElem {
        self.ctx.from_int(n)
    }
    fn var(&self, name: char, pos: usize) -> Result<FieldElem> {
        let v = match name {
            's' => self.s.clone(),
            't' => self.t.clone(),
            _ => None,
        };
        v.ok_or_else(|| syntax(pos, format!("variable {name} not available in this field")))
    }
    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.ctx.add(a, b).unwrap()
    }
    fn neg(&self, a: &FieldElem) -> FieldElem {
        self.ctx.neg(a).unwrap()
    }
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.ctx.mul(a, b).unwrap()
    }
    fn div(&self, a: &FieldElem, b: &FieldElem, pos: usize) -> Result<FieldElem> {
        self.ctx.div(a, b).map_err(|_| syntax(pos, "division by zero"))
    }
    fn pow(&self, a: &FieldElem, e: i64, pos: usize) -> Result<FieldElem> {
        self.ctx.pow(a, e).map_err(|_| syntax(pos, "zero to a negative power"))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    offset: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, offset: usize) -> Self {
        Parser { s: text.as_bytes(), i: 0, offset }
    }
    fn pos(&self) -> usize {
        self.offset + self.i
    }
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }
    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(syntax(self.pos(), format!("unexpected {:?}", c as char))),
        }
    }
    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(syntax(self.pos(), "expected integer"));
        }
        std::str::from_utf8(&self.s[start..self.i])
            .unwrap()
            .parse()
            .map_err(|_| syntax(self.offset + start, "integer too large"))
    }
    fn sum<A: Alg>(&mut self, a: &A) -> Result<A::V> {
        let mut acc = self.prod(a)?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    let r = self.prod(a)?;
                    acc = a.add(&acc, &r);
                }
                Some(b'-') => {
                    self.i += 1;
                    let r = self.prod(a)?;
                    acc = a.add(&acc, &a.neg(&r));
                }
                _ => return Ok(acc),
            }
        }
    }
    fn prod<A: Alg>(&mut self, a: &A) -> Result<A::V> {
        let mut acc = self.unary(a)?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    let r = self.unary(a)?;
                    acc = a.mul(&acc, &r);
                }
                Some(b'/') => {
                    let pos = self.pos();
                    self.i += 1;
                    let r = self.unary(a)?;
                    acc = a.div(&acc, &r, pos)?;
                }
                _ => return Ok(acc),
            }
        }
    }
    fn unary<A: Alg>(&mut self, a: &A) -> Result<A::V> {
        if self.peek() == Some(b'-') {
            self.i += 1;
            let v = self.unary(a)?;
            return Ok(a.neg(&v));
        }
        self.power(a)
    }
    fn power<A: Alg>(&mut self, a: &A) -> Result<A::V> {
        let base = self.atom(a)?;
        if self.peek() == Some(b'^') {
            let pos = self.pos();
            self.i += 1;
            let neg = if self.peek() == Some(b'-') {
                self.i += 1;
                true
            } else {
                false
            };
            let e = self.int()?;
            return a.pow(&base, if neg { -e } else { e }, pos);
        }
        Ok(base)
    }
    fn atom<A: Alg>(&mut self, a: &A) -> Result<A::V> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(a.int(self.int()?)),
            Some(b'(') => {
                self.i += 1;
                let v = self.sum(a)?;
                if self.peek() != Some(b')') {
                    return Err(syntax(self.pos(), "expected ')'"));
                }
                self.i += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let pos = self.pos();
                self.i += 1;
                if self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                    return Err(syntax(pos, "unknown identifier"));
                }
                a.var(c as char, pos)
            }
            Some(c) => Err(syntax(self.pos(), format!("unexpected {:?}", c as char))),
            None => Err(syntax(self.pos(), "unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        let f = parse_field_spec("p=5", 121).unwrap();
        assert_eq!(f.ground().size(), 5);
        let f = parse_field_spec("q=9:s^2+1", 121).unwrap();
        assert_eq!(f.ground().size(), 9);
        assert_eq!(f.spec().spec, "q=9:s^2+1");
        let f = parse_field_spec("F=F5(t)", 121).unwrap();
        assert!(f.as_rational().is_some());
        assert_eq!(f.spec().spec, "F=F5(t)");
        let f = parse_field_spec("F=F9(t):s^2+1", 121).unwrap();
        assert_eq!(f.spec().spec, "F=F9(t):s^2+1");
        assert!(parse_field_spec("p=4", 121).is_err());
        assert!(parse_field_spec("p=2", 121).is_err());
        assert!(parse_field_spec("q=9:s^2+2*s+2", 121).is_ok());
        assert!(parse_field_spec("q=9:s^2+2", 121).is_err());
        assert!(parse_field_spec("p=127", 121).is_err());
    }

    #[test]
    fn elements() {
        let f = parse_field_spec("F=F5(t)", 121).unwrap();
        let a = parse_elem(&f, "(t^2+1)/(t+1)").unwrap();
        let r = f.as_rational().unwrap();
        assert_eq!(f.format(&a), "(t^2+1)/(t+1)");
        let b = parse_elem(&f, "t^2+3*t+1").unwrap();
        assert_eq!(f.format(&b), "t^2+3*t+1");
        assert_eq!(parse_elem(&f, "-1").unwrap(), f.from_int(4));
        assert!(parse_elem(&f, "1/0").is_err());
        let _ = r;
        let g = parse_field_spec("q=9:s^2+1", 121).unwrap();
        let s = parse_elem(&g, "s").unwrap();
        assert_eq!(g.mul(&s, &s).unwrap(), g.from_int(-1));
        match parse_elem(&g, "t") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("{other:?}"),
        }
    }
}
