//! Milnor K-groups of finite fields and of `F_q(t)`, with canonical data,
//! tame symbols and norm transfers.
//!
//! Canonical data: over `F_q`, `K_0 = Z`, `K_1 = F_q^×` and `K_n = 0` for
//! `n ≥ 2`. Over `F_q(t)`, `K_1` is the multiplicative group itself, `K_2`
//! is detected by the tame symbols at the finite places, and `K_n = 0` for
//! `n ≥ 3`. Degree-2 classes over `F_q(t)` keep a symbol representative so
//! that residues at infinity are computed from symbols rather than inferred.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Place, Poly, RatFn};

pub const MAX_MILNOR_DEGREE: u32 = 4;

#[derive(Clone, Debug)]
pub enum MilnorData {
    Zero,
    Int(i64),
    /// Degree one, written multiplicatively.
    Unit(FieldElem),
    /// Degree two over `F_q(t)`: `Σ c·{a,b}`.
    Symbols(Vec<(i64, RatFn, RatFn)>),
}

/// Canonical datum deciding equality.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum MilnorKey {
    Zero,
    Int(i64),
    Unit(FieldElem),
    /// tame symbol at each finite place with nontrivial value
    Tame(BTreeMap<Poly, u32>),
}

#[derive(Clone, Debug)]
pub struct MilnorClass {
    ctx: FieldCtx,
    degree: u32,
    data: MilnorData,
}

impl PartialEq for MilnorClass {
    fn eq(&self, o: &Self) -> bool {
        self.ctx == o.ctx
            && self.degree == o.degree
            && matches!((self.key(), o.key()), (Ok(a), Ok(b)) if a == b)
    }
}

fn collapses(ctx: &FieldCtx, degree: u32) -> bool {
    match ctx {
        FieldCtx::Finite(_) => degree >= 2,
        FieldCtx::Rational(_) => degree >= 3,
    }
}

impl MilnorClass {
    pub fn zero(ctx: &FieldCtx, degree: u32) -> MilnorClass {
        let data = match degree {
            0 => MilnorData::Int(0),
            1 => MilnorData::Unit(ctx.one()),
            2 if !collapses(ctx, 2) => MilnorData::Symbols(Vec::new()),
            _ => MilnorData::Zero,
        };
        MilnorClass { ctx: ctx.clone(), degree, data }
    }

    pub fn int(ctx: &FieldCtx, n: i64) -> MilnorClass {
        MilnorClass { ctx: ctx.clone(), degree: 0, data: MilnorData::Int(n) }
    }

    /// The symbol `{a_1, ..., a_n}`.
    pub fn symbol(ctx: &FieldCtx, entries: &[FieldElem]) -> Result<MilnorClass> {
        Self::symbol_times(ctx, 1, entries)
    }

    /// `c·{a_1, ..., a_n}`.
    pub fn symbol_times(ctx: &FieldCtx, c: i64, entries: &[FieldElem]) -> Result<MilnorClass> {
        if entries.iter().any(|e| ctx.is_zero(e)) {
            return Err(Error::NonUnitEntry);
        }
        let n = entries.len() as u32;
        if n > MAX_MILNOR_DEGREE {
            return Err(Error::DegreeOverflow(n as i32));
        }
        let data = match n {
            0 => MilnorData::Int(c),
            _ if collapses(ctx, n) => MilnorData::Zero,
            1 => MilnorData::Unit(ctx.pow(&entries[0], c)?),
            2 => {
                let a = entries[0].as_rational().unwrap().clone();
                let b = entries[1].as_rational().unwrap().clone();
                MilnorData::Symbols(if c == 0 { vec![] } else { vec![(c, a, b)] })
            }
            _ => unreachable!(),
        };
        Ok(MilnorClass { ctx: ctx.clone(), degree: n, data })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn data(&self) -> &MilnorData {
        &self.data
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.data {
            MilnorData::Int(n) => Some(n),
            _ => None,
        }
    }
    pub fn as_unit(&self) -> Option<&FieldElem> {
        match &self.data {
            MilnorData::Unit(u) => Some(u),
            _ => None,
        }
    }

    pub fn key(&self) -> Result<MilnorKey> {
        Ok(match &self.data {
            MilnorData::Zero => MilnorKey::Zero,
            MilnorData::Int(n) => MilnorKey::Int(*n),
            MilnorData::Unit(u) => MilnorKey::Unit(u.clone()),
            MilnorData::Symbols(_) => {
                let r = self.ctx.as_rational().unwrap();
                let mut places = Vec::new();
                if let MilnorData::Symbols(terms) = &self.data {
                    for (_, a, b) in terms {
                        places.extend(r.support(a)?);
                        places.extend(r.support(b)?);
                    }
                }
                places.sort();
                places.dedup();
                let mut map = BTreeMap::new();
                for g in places {
                    let pl = r.place(&g)?;
                    let v = self.tame_symbol(&pl)?;
                    let u = v.as_unit().unwrap().as_finite().unwrap();
                    if u != 1 {
                        map.insert(g, u);
                    }
                }
                MilnorKey::Tame(map)
            }
        })
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(match self.key()? {
            MilnorKey::Zero => true,
            MilnorKey::Int(n) => n == 0,
            MilnorKey::Unit(u) => u == self.ctx.one(),
            MilnorKey::Tame(m) => m.is_empty(),
        })
    }

    fn check(&self, o: &MilnorClass) -> Result<()> {
        self.ctx.check_same(&o.ctx)?;
        if self.degree != o.degree {
            return Err(Error::DegreeMismatch(self.degree as i32, o.degree as i32));
        }
        Ok(())
    }

    pub fn add(&self, o: &MilnorClass) -> Result<MilnorClass> {
        self.check(o)?;
        let data = match (&self.data, &o.data) {
            (MilnorData::Zero, MilnorData::Zero) => MilnorData::Zero,
            (MilnorData::Int(a), MilnorData::Int(b)) => MilnorData::Int(a + b),
            (MilnorData::Unit(a), MilnorData::Unit(b)) => MilnorData::Unit(self.ctx.mul(a, b)?),
            (MilnorData::Symbols(a), MilnorData::Symbols(b)) => {
                MilnorData::Symbols(merge_symbols(a.iter().chain(b.iter()).cloned()))
            }
            _ => unreachable!("same degree implies same shape"),
        };
        Ok(MilnorClass { ctx: self.ctx.clone(), degree: self.degree, data })
    }

    pub fn scale(&self, c: i64) -> Result<MilnorClass> {
        let data = match &self.data {
            MilnorData::Zero => MilnorData::Zero,
            MilnorData::Int(a) => MilnorData::Int(a * c),
            MilnorData::Unit(a) => MilnorData::Unit(self.ctx.pow(a, c)?),
            MilnorData::Symbols(t) => MilnorData::Symbols(merge_symbols(
                t.iter().map(|(k, a, b)| (k * c, a.clone(), b.clone())),
            )),
        };
        Ok(MilnorClass { ctx: self.ctx.clone(), degree: self.degree, data })
    }

    pub fn neg(&self) -> Result<MilnorClass> {
        self.scale(-1)
    }

    pub fn sub(&self, o: &MilnorClass) -> Result<MilnorClass> {
        self.add(&o.neg()?)
    }

    /// Graded product.
    pub fn mul(&self, o: &MilnorClass) -> Result<MilnorClass> {
        self.ctx.check_same(&o.ctx)?;
        let n = self.degree + o.degree;
        if n > MAX_MILNOR_DEGREE {
            return Err(Error::DegreeOverflow(n as i32));
        }
        if let MilnorData::Int(c) = self.data {
            return o.scale(c);
        }
        if let MilnorData::Int(c) = o.data {
            return self.scale(c);
        }
        if collapses(&self.ctx, n) {
            return Ok(MilnorClass { ctx: self.ctx.clone(), degree: n, data: MilnorData::Zero });
        }
        // only K_1 x K_1 -> K_2 over F_q(t) remains
        match (&self.data, &o.data) {
            (MilnorData::Unit(a), MilnorData::Unit(b)) => {
                let (a, b) = (a.as_rational().unwrap().clone(), b.as_rational().unwrap().clone());
                let terms = if a.as_constant() == Some(1) || b.as_constant() == Some(1) {
                    vec![]
                } else {
                    vec![(1, a, b)]
                };
                Ok(MilnorClass { ctx: self.ctx.clone(), degree: 2, data: MilnorData::Symbols(terms) })
            }
            _ => unreachable!(),
        }
    }

    /// Tame symbol at a place of `F_q(t)`, normalized by
    /// `∂{π, u_2, ..., u_n} = {ū_2, ..., ū_n}`.
    pub fn tame_symbol(&self, pl: &Place) -> Result<MilnorClass> {
        let r = self
            .ctx
            .as_rational()
            .ok_or_else(|| Error::FieldMismatch("tame symbols need a function field".into()))?;
        if r.id() != pl.field().id() {
            return Err(Error::FieldMismatch("place belongs to another field".into()));
        }
        let k = pl.residue_field().clone();
        let kctx = FieldCtx::Finite(k.clone());
        if self.degree == 0 {
            return Err(Error::Invalid("tame symbol needs degree at least one".into()));
        }
        Ok(match &self.data {
            MilnorData::Zero => MilnorClass::zero(&kctx, self.degree - 1),
            MilnorData::Int(_) => unreachable!(),
            MilnorData::Unit(u) => {
                MilnorClass::int(&kctx, pl.valuation(u.as_rational().unwrap())?)
            }
            MilnorData::Symbols(terms) => {
                let mut acc = 1u32;
                for (c, a, b) in terms {
                    let s = tame2(&k, pl, a, b)?;
                    acc = k.mul(acc, k.pow(s, *c));
                }
                MilnorClass { ctx: kctx, degree: 1, data: MilnorData::Unit(FieldElem::Finite(acc)) }
            }
        })
    }

    /// Apply a field homomorphism (used for restriction along `K ⊆ L`).
    pub fn map_field(
        &self,
        target: &FieldCtx,
        f: impl Fn(&FieldElem) -> Result<FieldElem>,
    ) -> Result<MilnorClass> {
        let data = match &self.data {
            MilnorData::Zero => MilnorClass::zero(target, self.degree).data,
            MilnorData::Int(n) => MilnorData::Int(*n),
            MilnorData::Unit(u) => MilnorData::Unit(f(u)?),
            MilnorData::Symbols(_) if collapses(target, 2) => MilnorData::Zero,
            MilnorData::Symbols(t) => {
                let mut out = Vec::new();
                for (c, a, b) in t {
                    let a = f(&FieldElem::Rational(a.clone()))?;
                    let b = f(&FieldElem::Rational(b.clone()))?;
                    out.push((*c, a.as_rational().unwrap().clone(), b.as_rational().unwrap().clone()));
                }
                MilnorData::Symbols(out)
            }
        };
        Ok(MilnorClass { ctx: target.clone(), degree: self.degree, data })
    }

    pub fn display(&self) -> String {
        match &self.data {
            MilnorData::Zero => "0".into(),
            MilnorData::Int(n) => n.to_string(),
            MilnorData::Unit(u) => format!("{{{}}}", self.ctx.format(u)),
            MilnorData::Symbols(t) => {
                if t.is_empty() {
                    return "0".into();
                }
                let base = self.ctx.ground();
                t.iter()
                    .map(|(c, a, b)| format!("{c}*{{{},{}}}", a.display(base), b.display(base)))
                    .collect::<Vec<_>>()
                    .join(" + ")
            }
        }
    }

    /// Canonical data as JSON.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(match self.key()? {
            MilnorKey::Zero => serde_json::json!(0),
            MilnorKey::Int(n) => serde_json::json!(n),
            MilnorKey::Unit(u) => match &self.ctx {
                FieldCtx::Finite(k) => serde_json::json!({
                    "unit": k.format(u.as_finite().unwrap()),
                    "dlog": k.dlog(u.as_finite().unwrap())?,
                }),
                FieldCtx::Rational(_) => serde_json::json!({ "unit": self.ctx.format(&u) }),
            },
            MilnorKey::Tame(m) => {
                let r = self.ctx.as_rational().unwrap();
                let mut obj = serde_json::Map::new();
                for (g, u) in m {
                    let pl = r.place(&g)?;
                    obj.insert(g.display(r.base(), "t"), serde_json::json!(pl.residue_field().format(u)));
                }
                serde_json::json!({ "tame": obj })
            }
        })
    }
}

fn merge_symbols(it: impl Iterator<Item = (i64, RatFn, RatFn)>) -> Vec<(i64, RatFn, RatFn)> {
    let mut map: BTreeMap<(RatFn, RatFn), i64> = BTreeMap::new();
    for (c, a, b) in it {
        *map.entry((a, b)).or_insert(0) += c;
    }
    map.into_iter().filter(|(_, c)| *c != 0).map(|((a, b), c)| (c, a, b)).collect()
}

/// `∂{a,b} = (-1)^{v(a)v(b)} · ū_b^{v(a)} / ū_a^{v(b)}`; independent of the
/// uniformizer.
pub fn tame2(k: &FiniteField, pl: &Place, a: &RatFn, b: &RatFn) -> Result<u32> {
    let (va, ua) = pl.unit_part(a)?;
    let (vb, ub) = pl.unit_part(b)?;
    let mut s = k.div(k.pow(ub, va), k.pow(ua, vb))?;
    if (va * vb).rem_euclid(2) == 1 {
        s = k.neg(s);
    }
    Ok(s)
}

/// Transfer along a finite extension `L/K` of finite fields: multiplication
/// by `[L:K]` in degree 0 and the norm in degree 1.
pub fn milnor_transfer(l: &Arc<FiniteField>, k: &Arc<FiniteField>, m: &MilnorClass) -> Result<MilnorClass> {
    match m.ctx() {
        FieldCtx::Finite(src) if src.same(l) => {}
        _ => return Err(Error::FieldMismatch("class does not live over L".into())),
    }
    let d = l.degree_over(k)? as i64;
    let kctx = FieldCtx::Finite(k.clone());
    let data = match &m.data {
        MilnorData::Zero => MilnorData::Zero,
        MilnorData::Int(n) => MilnorData::Int(n * d),
        MilnorData::Unit(u) => MilnorData::Unit(FieldElem::Finite(l.norm_to(k, u.as_finite().unwrap())?)),
        MilnorData::Symbols(_) => unreachable!("finite fields carry no symbols"),
    };
    Ok(MilnorClass { ctx: kctx, degree: m.degree, data })
}

/// Normalize a formal sum `Σ c_i·{a_i1, ..., a_in}`.
pub fn milnor_normalize(ctx: &FieldCtx, degree: u32, terms: &[(i64, Vec<FieldElem>)]) -> Result<MilnorClass> {
    let mut acc = MilnorClass::zero(ctx, degree);
    for (c, entries) in terms {
        if entries.len() as u32 != degree {
            return Err(Error::DegreeMismatch(degree as i32, entries.len() as i32));
        }
        acc = acc.add(&MilnorClass::symbol_times(ctx, *c, entries)?)?;
    }
    Ok(acc)
}
