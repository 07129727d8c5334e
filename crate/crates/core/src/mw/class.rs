//! Normal form of Milnor–Witt classes as a pair (Milnor class, form class).
//!
//! Generators map as `[a] ↦ ({a}, <a> - 1)` and `η ↦ (0, 1)` one degree
//! lower. In degree `n`:
//!
//! * `n ≥ 1`: a Milnor class of degree `n` and a form in `I^n` (kept at
//!   virtual rank zero);
//! * `n = 0`: an integer and a Grothendieck–Witt class of that rank;
//! * `n < 0`: a Witt class only.

use serde_json::json;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem};
use crate::milnor::{MilnorClass, MilnorKey};
use crate::mw::expr::{MwExpression, Term};
use crate::quad_forms::{witt_class, FormClass, GwKey, WittKey};

pub const MIN_DEGREE: i32 = -4;
pub const MAX_DEGREE: i32 = 4;

/// Rational-field forms with more entries than this are re-canonicalized.
const COMPACT_THRESHOLD: usize = 48;

#[derive(Clone, Debug)]
pub struct MwClass {
    ctx: FieldCtx,
    degree: i32,
    milnor: Option<MilnorClass>,
    form: FormClass,
}

/// Canonical datum of an [`MwClass`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MwKey {
    pub degree: i32,
    pub milnor: Option<MilnorKey>,
    pub form: FormKey,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FormKey {
    Gw(GwKey),
    Witt(WittKey),
}

fn check_degree(n: i32) -> Result<()> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(Error::DegreeOverflow(n))
    }
}

impl MwClass {
    /// Assemble a class from its components. Debug builds verify the
    /// compatibility of the two parts.
    pub fn from_parts(ctx: &FieldCtx, degree: i32, milnor: Option<MilnorClass>, form: FormClass) -> Result<MwClass> {
        check_degree(degree)?;
        let form = match degree {
            0 => form.with_virtual_rank(milnor.as_ref().and_then(|m| m.as_int()).unwrap_or(0)),
            n if n > 0 => form.with_virtual_rank(0),
            _ => form,
        };
        let c = MwClass { ctx: ctx.clone(), degree, milnor, form }.compact()?;
        debug_assert!(c.compatible().unwrap_or(false), "incompatible components: {}", c.display());
        Ok(c)
    }

    pub fn zero(ctx: &FieldCtx, degree: i32) -> Result<MwClass> {
        check_degree(degree)?;
        let milnor = (degree >= 0).then(|| MilnorClass::zero(ctx, degree as u32));
        Ok(MwClass { ctx: ctx.clone(), degree, milnor, form: FormClass::zero(ctx) })
    }

    pub fn one(ctx: &FieldCtx) -> MwClass {
        MwClass {
            ctx: ctx.clone(),
            degree: 0,
            milnor: Some(MilnorClass::int(ctx, 1)),
            form: FormClass::one(ctx),
        }
    }

    /// `[a]`.
    pub fn bracket(ctx: &FieldCtx, a: &FieldElem) -> Result<MwClass> {
        normalize_term(ctx, &Term { coef: 1, eta: 0, entries: vec![a.clone()] })
    }

    /// `<a> = 1 + η[a]`.
    pub fn unit_form(ctx: &FieldCtx, a: &FieldElem) -> Result<MwClass> {
        if ctx.is_zero(a) {
            return Err(Error::ZeroHasNoClass);
        }
        Ok(Self::from_form(&FormClass::diag1(ctx, a.clone())))
    }

    /// `η` in degree -1.
    pub fn eta(ctx: &FieldCtx) -> MwClass {
        MwClass { ctx: ctx.clone(), degree: -1, milnor: None, form: FormClass::one(ctx) }
    }

    /// A Grothendieck–Witt class as a degree-0 class.
    pub fn from_form(f: &FormClass) -> MwClass {
        MwClass {
            ctx: f.ctx().clone(),
            degree: 0,
            milnor: Some(MilnorClass::int(f.ctx(), f.virtual_rank())),
            form: f.clone(),
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    pub fn degree(&self) -> i32 {
        self.degree
    }
    pub fn milnor(&self) -> Option<&MilnorClass> {
        self.milnor.as_ref()
    }
    pub fn form(&self) -> &FormClass {
        &self.form
    }

    pub fn key(&self) -> Result<MwKey> {
        let milnor = self.milnor.as_ref().map(|m| m.key()).transpose()?;
        let form = if self.degree == 0 {
            FormKey::Gw(self.form.gw_key()?)
        } else {
            FormKey::Witt(self.form.witt_key()?)
        };
        Ok(MwKey { degree: self.degree, milnor, form })
    }

    pub fn equals(&self, o: &MwClass) -> Result<bool> {
        self.ctx.check_same(&o.ctx)?;
        Ok(self.key()? == o.key()?)
    }

    pub fn is_zero(&self) -> Result<bool> {
        let milnor_zero = match &self.milnor {
            Some(m) => m.is_zero()?,
            None => true,
        };
        Ok(milnor_zero && self.form.witt_key()?.is_zero() && (self.degree != 0 || self.form.virtual_rank() == 0))
    }

    /// Replace an oversized form by its canonical Witt representative.
    fn compact(mut self) -> Result<MwClass> {
        let big = match &self.ctx {
            FieldCtx::Finite(_) => self.form.entries().len() > 2,
            FieldCtx::Rational(_) => self.form.entries().len() > COMPACT_THRESHOLD,
        };
        if big {
            let r = self.form.virtual_rank();
            let w = witt_class(&self.form)?;
            let parity_ok = (w.entries().len() as i64 - r) % 2 == 0;
            debug_assert!(parity_ok);
            self.form = w.with_virtual_rank(r);
        }
        Ok(self)
    }

    fn check_add(&self, o: &MwClass) -> Result<()> {
        self.ctx.check_same(&o.ctx)?;
        if self.degree != o.degree {
            return Err(Error::DegreeMismatch(self.degree, o.degree));
        }
        Ok(())
    }

    pub fn add(&self, o: &MwClass) -> Result<MwClass> {
        self.check_add(o)?;
        let milnor = match (&self.milnor, &o.milnor) {
            (Some(a), Some(b)) => Some(a.add(b)?),
            _ => None,
        };
        MwClass { ctx: self.ctx.clone(), degree: self.degree, milnor, form: self.form.orth_sum(&o.form)? }.compact()
    }

    pub fn neg(&self) -> Result<MwClass> {
        self.scale_int(-1)
    }

    pub fn sub(&self, o: &MwClass) -> Result<MwClass> {
        self.add(&o.neg()?)
    }

    pub fn scale_int(&self, c: i64) -> Result<MwClass> {
        let milnor = self.milnor.as_ref().map(|m| m.scale(c)).transpose()?;
        MwClass { ctx: self.ctx.clone(), degree: self.degree, milnor, form: self.form.scale_int(c) }.compact()
    }

    /// Graded product in the pair algebra.
    pub fn mul(&self, o: &MwClass) -> Result<MwClass> {
        self.ctx.check_same(&o.ctx)?;
        let n = self.degree + o.degree;
        check_degree(n)?;
        let milnor = if n < 0 {
            None
        } else {
            match (&self.milnor, &o.milnor) {
                (Some(a), Some(b)) => Some(a.mul(b)?),
                // a factor of negative degree is divisible by η
                _ => Some(MilnorClass::zero(&self.ctx, n as u32)),
            }
        };
        let form = self.form.mul(&o.form)?;
        let form = if n > 0 { form.with_virtual_rank(0) } else { form };
        MwClass { ctx: self.ctx.clone(), degree: n, milnor, form }.compact()
    }

    /// Multiplication by `η`: forget the Milnor part, keep the form.
    pub fn eta_act(&self) -> Result<MwClass> {
        let n = self.degree - 1;
        check_degree(n)?;
        let milnor = (n >= 0).then(|| MilnorClass::zero(&self.ctx, n as u32));
        let form = if n == 0 { self.form.clone().with_virtual_rank(0) } else { self.form.clone() };
        Ok(MwClass { ctx: self.ctx.clone(), degree: n, milnor, form })
    }

    /// Action of a Grothendieck–Witt class: the form part multiplies, the
    /// Milnor part is multiplied by the rank.
    pub fn gw_scale(&self, g: &FormClass) -> Result<MwClass> {
        self.ctx.check_same(g.ctx())?;
        let r = g.virtual_rank();
        let milnor = self.milnor.as_ref().map(|m| m.scale(r)).transpose()?;
        let form = self.form.mul(g)?;
        let form = match self.degree {
            0 => form.with_virtual_rank(self.form.virtual_rank() * r),
            n if n > 0 => form.with_virtual_rank(0),
            _ => form,
        };
        MwClass { ctx: self.ctx.clone(), degree: self.degree, milnor, form }.compact()
    }

    /// Apply a field homomorphism to both components.
    pub fn map_field(&self, target: &FieldCtx, f: impl Fn(&FieldElem) -> Result<FieldElem>) -> Result<MwClass> {
        let milnor = self.milnor.as_ref().map(|m| m.map_field(target, &f)).transpose()?;
        let form = self.form.map_field(target, &f)?;
        MwClass { ctx: target.clone(), degree: self.degree, milnor, form }.compact()
    }

    /// Compatibility of the two components: rank equals the integer in
    /// degree 0, discriminants match the Milnor unit in degree 1 and the
    /// tame symbols in degree 2 (mod squares), and the form vanishes where
    /// `I^n` does.
    pub fn compatible(&self) -> Result<bool> {
        let m = match (&self.milnor, self.degree) {
            (_, n) if n < 0 => return Ok(true),
            (Some(m), _) => m,
            (None, _) => return Ok(false),
        };
        if self.degree == 0 {
            return Ok(m.as_int() == Some(self.form.virtual_rank()));
        }
        if self.form.virtual_rank() != 0 {
            return Ok(false);
        }
        let finite = self.ctx.is_finite();
        match self.degree {
            1 => {
                let u = m.as_unit().unwrap();
                let d = signed_disc(&self.ctx, self.form.entries())?;
                self.ctx.is_square(&self.ctx.div(&d, u)?)
            }
            2 if !finite => {
                let r = self.ctx.as_rational().unwrap();
                let mut places = self.form.support()?;
                if let MilnorKey::Tame(map) = m.key()? {
                    places.extend(map.keys().cloned());
                }
                places.sort();
                places.dedup();
                for g in places {
                    let pl = r.place(&g)?;
                    let k = FieldCtx::Finite(pl.residue_field().clone());
                    let res = crate::quad_forms::second_residue(&self.form, &pl)?;
                    if res.entries().len() % 2 == 1 {
                        return Ok(false);
                    }
                    let d = signed_disc(&k, res.entries())?;
                    let t = m.tame_symbol(&pl)?;
                    if !k.is_square(&k.div(&d, t.as_unit().unwrap())?)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(self.form.witt_key()?.is_zero()),
        }
    }

    pub fn display(&self) -> String {
        let m = self.milnor.as_ref().map(|m| m.display()).unwrap_or_else(|| "-".into());
        format!("deg {}: ({}, {})", self.degree, m, self.form.display())
    }

    /// `{degree, milnor, form}` with canonical data.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let milnor = match &self.milnor {
            Some(m) => m.to_json()?,
            None => serde_json::Value::Null,
        };
        let mut form = self.form.witt_key()?.to_json(&self.ctx);
        if self.degree == 0 {
            form["rank"] = json!(self.form.virtual_rank());
        }
        Ok(json!({ "degree": self.degree, "milnor": milnor, "form": form }))
    }
}

/// `(-1)^{n(n-1)/2} ∏ a_i`.
pub fn signed_disc(ctx: &FieldCtx, entries: &[FieldElem]) -> Result<FieldElem> {
    let mut d = ctx.one();
    for e in entries {
        d = ctx.mul(&d, e)?;
    }
    let n = entries.len();
    if (n * n.saturating_sub(1) / 2) % 2 == 1 {
        d = ctx.neg(&d)?;
    }
    Ok(d)
}

/// `∏ (<a_j> - 1)`, the Pfister part of `[a_1, ..., a_m]`.
pub fn pfister(ctx: &FieldCtx, entries: &[FieldElem]) -> Result<FormClass> {
    let mut f = FormClass::one(ctx);
    for a in entries {
        let p = FormClass::diag1(ctx, a.clone()).sub(&FormClass::one(ctx))?;
        f = f.mul(&p)?;
        if let FieldCtx::Finite(_) = ctx {
            f = witt_class(&f)?.with_virtual_rank(f.virtual_rank());
        }
    }
    Ok(f)
}

fn normalize_term(ctx: &FieldCtx, t: &Term) -> Result<MwClass> {
    let n = t.degree();
    check_degree(n)?;
    if t.entries.iter().any(|e| ctx.is_zero(e)) {
        return Err(Error::NonUnitEntry);
    }
    let milnor = if n < 0 {
        None
    } else if t.eta == 0 {
        Some(MilnorClass::symbol_times(ctx, t.coef, &t.entries)?)
    } else {
        Some(MilnorClass::zero(ctx, n as u32))
    };
    let form = pfister(ctx, &t.entries)?.scale_int(t.coef);
    MwClass { ctx: ctx.clone(), degree: n, milnor, form }.compact()
}

/// Normal form of an expression. The empty expression is zero in degree 0;
/// see [`normalize_in`] for other degrees.
pub fn normalize(e: &MwExpression) -> Result<MwClass> {
    normalize_in(e, e.degree().unwrap_or(0))
}

/// Normal form, using `degree` when the expression is empty.
pub fn normalize_in(e: &MwExpression, degree: i32) -> Result<MwClass> {
    let n = e.degree().unwrap_or(degree);
    if n != degree {
        return Err(Error::DegreeMismatch(n, degree));
    }
    let mut acc = MwClass::zero(e.ctx(), n)?;
    for t in e.terms() {
        acc = acc.add(&normalize_term(e.ctx(), t)?)?;
    }
    debug_assert!(acc.compatible()?, "incompatible normal form: {}", acc.display());
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse::parse_field_spec;
    use crate::mw::expr::parse_expression;

    fn nf(ctx: &FieldCtx, s: &str) -> MwClass {
        normalize(&parse_expression(ctx, s).unwrap()).unwrap()
    }

    #[test]
    fn bracket_one_vanishes() {
        let c = parse_field_spec("p=7", 121).unwrap();
        assert!(nf(&c, "[1]").is_zero().unwrap());
    }

    #[test]
    fn hyperbolic_relation() {
        for spec in ["p=3", "p=5", "q=9", "F=F5(t)"] {
            let c = parse_field_spec(spec, 121).unwrap();
            let x = nf(&c, "eta*(2 + eta*[-1])");
            assert_eq!(x.degree(), -1);
            assert!(x.is_zero().unwrap(), "{spec}");
        }
    }

    #[test]
    fn steinberg_over_f7() {
        let c = parse_field_spec("p=7", 121).unwrap();
        for a in 2..7 {
            let b = (8 - a) % 7;
            assert!(nf(&c, &format!("[{a}]*[{b}]")).is_zero().unwrap());
        }
    }

    #[test]
    fn eta_bracket_is_pfister() {
        let c = parse_field_spec("p=5", 121).unwrap();
        for a in 1..5 {
            let x = MwClass::bracket(&c, &FieldElem::Finite(a)).unwrap().eta_act().unwrap();
            let y = nf(&c, &format!("<{a}> - 1"));
            assert!(x.equals(&y).unwrap());
        }
    }

    #[test]
    fn twisted_anticommutation_over_rational() {
        let c = parse_field_spec("F=F5(t)", 121).unwrap();
        let x = nf(&c, "[t]*[t+1] + <(-1)>*[t+1]*[t]");
        assert!(x.is_zero().unwrap(), "{}", x.display());
        let y = nf(&c, "[t]*[t+1] + [t+1]*[t]");
        // over F_5, -1 is a square so <-1> = 1
        assert!(y.is_zero().unwrap());
        let c7 = parse_field_spec("F=F7(t)", 121).unwrap();
        // (1 - <-1>)[t][t+1] has Milnor part 0 and form part in I^3 = 0
        let z = nf(&c7, "[t]*[t+1] + [t+1]*[t]");
        assert!(z.is_zero().unwrap());
        assert!(!nf(&c7, "[t]*[t+2]").is_zero().unwrap());
    }

    #[test]
    fn degree_window() {
        let c = parse_field_spec("p=5", 121).unwrap();
        let e = parse_expression(&c, "[2]*[2]*[2]*[2]*[2]").unwrap();
        assert_eq!(normalize(&e).unwrap_err(), Error::DegreeOverflow(5));
        let e = parse_expression(&c, "eta*eta*eta*eta*eta").unwrap();
        assert_eq!(normalize(&e).unwrap_err(), Error::DegreeOverflow(-5));
    }

    #[test]
    fn json_shape() {
        let c = parse_field_spec("p=7", 121).unwrap();
        let j = nf(&c, "[3]*[4]").to_json().unwrap();
        assert_eq!(j["degree"], json!(2));
        assert_eq!(j["milnor"], json!(0));
        let j = nf(&c, "<3>").to_json().unwrap();
        assert_eq!(j["form"]["rank"], json!(1));
        assert_eq!(j["milnor"], json!(1));
    }
}
