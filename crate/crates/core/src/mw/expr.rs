//! Term language: formal integer combinations of `η^i [u_1, ..., u_m]`.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := INT | 'eta' | '[' fieldelem ']' | '<' fieldelem '>' | '(' expr ')'
//! ```
//!
//! Parsing expands products distributively, moves `η` to the front (it is
//! central) and rewrites `<a>` as `1 + η[a]`. No relation is applied.

use crate::error::{Error, Result};
use crate::fields::parse::parse_elem_at;
use crate::fields::{FieldCtx, FieldElem};

/// `coef · η^eta · [entries...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: i64,
    pub eta: u32,
    pub entries: Vec<FieldElem>,
}

impl Term {
    pub fn degree(&self) -> i32 {
        self.entries.len() as i32 - self.eta as i32
    }
}

/// A formal sum of terms of one common degree.
#[derive(Clone, Debug)]
pub struct MwExpression {
    ctx: FieldCtx,
    degree: Option<i32>,
    terms: Vec<Term>,
}

/// Terms longer than this are rejected while expanding.
const MAX_TERM_LENGTH: usize = 12;
const MAX_TERMS: usize = 1 << 14;

impl MwExpression {
    pub fn new(ctx: &FieldCtx, terms: Vec<Term>) -> Result<MwExpression> {
        let mut degree = None;
        for t in &terms {
            if t.entries.iter().any(|e| ctx.is_zero(e)) {
                return Err(Error::NonUnitEntry);
            }
            match degree {
                None => degree = Some(t.degree()),
                Some(d) if d != t.degree() => return Err(Error::DegreeMismatch(d, t.degree())),
                _ => {}
            }
        }
        Ok(MwExpression { ctx: ctx.clone(), degree, terms })
    }

    pub fn zero(ctx: &FieldCtx) -> MwExpression {
        MwExpression { ctx: ctx.clone(), degree: None, terms: Vec::new() }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    /// `None` for the empty expression, which is zero in every degree.
    pub fn degree(&self) -> Option<i32> {
        self.degree
    }
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            if t.coef.abs() != 1 || (t.eta == 0 && t.entries.is_empty()) {
                factors.push(t.coef.abs().to_string());
            }
            factors.extend((0..t.eta).map(|_| "eta".to_string()));
            factors.extend(t.entries.iter().map(|e| format!("[{}]", self.ctx.format(e))));
            match (i, t.coef < 0) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Parse an expression over `ctx`.
pub fn parse_expression(ctx: &FieldCtx, text: &str) -> Result<MwExpression> {
    parse_expression_with(ctx, text, None)
}

/// As [`parse_expression`], with `t` inside field elements bound to the
/// given element (residue-field classes written in terms of the place).
pub fn parse_expression_with(
    ctx: &FieldCtx,
    text: &str,
    t_binding: Option<FieldElem>,
) -> Result<MwExpression> {
    let mut p = ExprParser { ctx, text, pos: 0, t_binding };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    MwExpression::new(ctx, v.terms)
}

/// Expansion in progress: a term list plus its degree (`None` when the list
/// came from the literal `0` and is degree-agnostic).
struct Partial {
    degree: Option<i32>,
    terms: Vec<Term>,
}

struct ExprParser<'a> {
    ctx: &'a FieldCtx,
    text: &'a str,
    pos: usize,
    t_binding: Option<FieldElem>,
}

impl ExprParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Partial> {
        let mut negate = false;
        if self.peek() == Some('-') {
            self.pos += 1;
            negate = true;
        }
        let mut acc = self.term()?;
        if negate {
            acc = scale(acc, -1);
        }
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let t = self.term()?;
                    acc = self.sum(acc, t, at)?;
                }
                Some('-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let t = scale(self.term()?, -1);
                    acc = self.sum(acc, t, at)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn sum(&self, a: Partial, b: Partial, at: usize) -> Result<Partial> {
        let degree = match (a.degree, b.degree) {
            (Some(x), Some(y)) if x != y => {
                return Err(Error::Syntax {
                    pos: at,
                    msg: format!("degree mismatch: {x} vs {y}"),
                })
            }
            (Some(x), _) | (_, Some(x)) => Some(x),
            _ => None,
        };
        let mut terms = a.terms;
        terms.extend(b.terms);
        Ok(Partial { degree, terms })
    }

    fn term(&mut self) -> Result<Partial> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.product(acc, f)?;
        }
        Ok(acc)
    }

    fn product(&self, a: Partial, b: Partial) -> Result<Partial> {
        let degree = match (a.degree, b.degree) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        if a.terms.len() * b.terms.len() > MAX_TERMS {
            return Err(self.err("expression expands to too many terms"));
        }
        let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
        for x in &a.terms {
            for y in &b.terms {
                let mut entries = x.entries.clone();
                entries.extend(y.entries.iter().cloned());
                if entries.len() + (x.eta + y.eta) as usize > MAX_TERM_LENGTH {
                    return Err(self.err("term too long"));
                }
                terms.push(Term { coef: x.coef * y.coef, eta: x.eta + y.eta, entries });
            }
        }
        Ok(Partial { degree, terms })
    }

    fn factor(&mut self) -> Result<Partial> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end of input"))?;
        let start = self.pos;
        match c {
            '0'..='9' => {
                let digits: String = self.text[self.pos..].chars().take_while(|c| c.is_ascii_digit()).collect();
                self.pos += digits.len();
                let n: i64 = digits.parse().map_err(|_| Error::Syntax { pos: start, msg: "integer too large".into() })?;
                if n == 0 {
                    return Ok(Partial { degree: None, terms: vec![] });
                }
                Ok(Partial { degree: Some(0), terms: vec![Term { coef: n, eta: 0, entries: vec![] }] })
            }
            '(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            '[' | '<' => {
                let close = if c == '[' { ']' } else { '>' };
                self.pos += 1;
                let body_start = self.pos;
                let rel = self.text[body_start..]
                    .find(close)
                    .ok_or_else(|| Error::Syntax { pos: start, msg: format!("missing '{close}'") })?;
                let body = &self.text[body_start..body_start + rel];
                if body.trim().is_empty() {
                    return Err(Error::Syntax { pos: body_start, msg: "empty field element".into() });
                }
                let a = parse_elem_at(self.ctx, body, body_start, self.t_binding.clone())?;
                self.pos = body_start + rel + 1;
                if self.ctx.is_zero(&a) {
                    return Err(if c == '[' { Error::NonUnitEntry } else { Error::ZeroHasNoClass });
                }
                if c == '[' {
                    Ok(Partial { degree: Some(1), terms: vec![Term { coef: 1, eta: 0, entries: vec![a] }] })
                } else {
                    Ok(Partial {
                        degree: Some(0),
                        terms: vec![
                            Term { coef: 1, eta: 0, entries: vec![] },
                            Term { coef: 1, eta: 1, entries: vec![a] },
                        ],
                    })
                }
            }
            _ => {
                for kw in ["eta", "η"] {
                    if self.text[self.pos..].starts_with(kw) {
                        self.pos += kw.len();
                        return Ok(Partial {
                            degree: Some(-1),
                            terms: vec![Term { coef: 1, eta: 1, entries: vec![] }],
                        });
                    }
                }
                Err(self.err(&format!("unexpected character {c:?}")))
            }
        }
    }
}

fn scale(mut p: Partial, c: i64) -> Partial {
    for t in &mut p.terms {
        t.coef *= c;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse::parse_field_spec;

    #[test]
    fn single_product() {
        let ctx = parse_field_spec("p=7", 121).unwrap();
        let e = parse_expression(&ctx, "[2]*[3]").unwrap();
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0].eta, 0);
        assert_eq!(e.terms()[0].entries, vec![FieldElem::Finite(2), FieldElem::Finite(3)]);
        assert_eq!(e.degree(), Some(2));
    }

    #[test]
    fn mixed_terms_of_equal_degree() {
        let ctx = parse_field_spec("F=F5(t)", 121).unwrap();
        let e = parse_expression(&ctx, "eta*[t]*[t+1] + 2*[t]").unwrap();
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.degree(), Some(1));
        assert_eq!(e.terms()[0].eta, 1);
        assert_eq!(e.terms()[1].coef, 2);
    }

    #[test]
    fn errors() {
        let ctx = parse_field_spec("p=5", 121).unwrap();
        assert_eq!(parse_expression(&ctx, "[0]").unwrap_err(), Error::NonUnitEntry);
        assert_eq!(parse_expression(&ctx, "<5>").unwrap_err(), Error::ZeroHasNoClass);
        assert!(matches!(parse_expression(&ctx, "[2] + eta"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse_expression(&ctx, "[2]*"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression(&ctx, "[2"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_expression(&ctx, "[2] )"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expression(&ctx, "foo"), Err(Error::Syntax { pos: 0, .. })));
    }

    #[test]
    fn brackets_expand() {
        let ctx = parse_field_spec("p=5", 121).unwrap();
        let e = parse_expression(&ctx, "<2>*<3>").unwrap();
        assert_eq!(e.terms().len(), 4);
        assert_eq!(e.degree(), Some(0));
        let e = parse_expression(&ctx, "eta*(2 + eta*[-1])").unwrap();
        assert_eq!(e.degree(), Some(-1));
        assert_eq!(e.terms()[1], Term { coef: 1, eta: 2, entries: vec![FieldElem::Finite(4)] });
        let z = parse_expression(&ctx, "0").unwrap();
        assert_eq!(z.degree(), None);
        let e = parse_expression(&ctx, "-[2] + 0").unwrap();
        assert_eq!(e.terms()[0].coef, -1);
    }
}
