//! Diagonal quadratic forms, their Grothendieck–Witt and Witt classes,
//! second residues over `F_q(t)` and the trace-form (Scharlau) transfer.
//!
//! A [`FormClass`] is the virtual form `<a_1, ..., a_n> - h·H` where `H` is
//! the hyperbolic plane `<1,-1>`. Equality is decided through complete
//! invariants:
//!
//! * over `F_q`: parity of the rank and the signed discriminant classify
//!   the Witt class, and the virtual rank together with the Witt class
//!   classifies the Grothendieck–Witt class;
//! * over `F_q(t)`: the first residue at infinity (uniformizer `1/t`) and
//!   the second residues at all finite places (uniformizer `g`) give an
//!   injective homomorphism into `W(F_q) ⊕ ⊕_x W(κ(x))`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Place, Poly, RationalFunctionField};

/// Witt class over a finite field: rank parity and signed discriminant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub struct FiniteWitt {
    pub odd: bool,
    pub disc_square: bool,
}

impl FiniteWitt {
    pub const ZERO: FiniteWitt = FiniteWitt { odd: false, disc_square: true };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// Class of the diagonal form with the given nonzero entries.
    pub fn of_entries(k: &FiniteField, entries: &[u32]) -> Result<FiniteWitt> {
        let n = entries.len() as u64;
        let mut log_sum = 0u64;
        for &a in entries {
            log_sum += k.dlog(a)? as u64;
        }
        if (n * n.saturating_sub(1) / 2) % 2 == 1 {
            log_sum += k.dlog(k.neg(1))? as u64;
        }
        Ok(FiniteWitt { odd: n % 2 == 1, disc_square: log_sum.is_multiple_of(2) })
    }

    /// Anisotropic representative (rank at most two).
    pub fn representative(&self, k: &FiniteField) -> Vec<u32> {
        let d = if self.disc_square { 1 } else { k.nonsquare() };
        match (self.odd, self.disc_square) {
            (true, _) => vec![d],
            (false, true) => vec![],
            (false, false) => vec![1, k.neg(d)],
        }
    }

    pub fn add(&self, o: &FiniteWitt, k: &FiniteField) -> FiniteWitt {
        let mut e = self.representative(k);
        e.extend(o.representative(k));
        FiniteWitt::of_entries(k, &e).unwrap()
    }

    pub fn neg(&self, k: &FiniteField) -> FiniteWitt {
        let e: Vec<u32> = self.representative(k).iter().map(|&a| k.neg(a)).collect();
        FiniteWitt::of_entries(k, &e).unwrap()
    }

    pub fn describe(&self) -> String {
        format!(
            "{}{}",
            if self.odd { "odd" } else { "even" },
            if self.disc_square { "" } else { ",disc nonsquare" }
        )
    }
}

/// Canonical Witt-class datum.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum WittKey {
    Finite(FiniteWitt),
    Rational {
        /// first residue at infinity, uniformizer `1/t`
        constant: FiniteWitt,
        /// second residues at finite places with uniformizer `g`; zero
        /// entries omitted
        residues: BTreeMap<Poly, FiniteWitt>,
    },
}

impl WittKey {
    pub fn is_zero(&self) -> bool {
        match self {
            WittKey::Finite(w) => w.is_zero(),
            WittKey::Rational { constant, residues } => constant.is_zero() && residues.is_empty(),
        }
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        match self {
            WittKey::Finite(w) => serde_json::json!({ "odd": w.odd, "disc_square": w.disc_square }),
            WittKey::Rational { constant, residues } => {
                let base = ctx.ground();
                let res: serde_json::Map<String, serde_json::Value> = residues
                    .iter()
                    .map(|(g, w)| {
                        (
                            g.display(base, "t"),
                            serde_json::json!({ "odd": w.odd, "disc_square": w.disc_square }),
                        )
                    })
                    .collect();
                serde_json::json!({
                    "constant": { "odd": constant.odd, "disc_square": constant.disc_square },
                    "residues": res,
                })
            }
        }
    }
}

/// Canonical Grothendieck–Witt datum: virtual rank and Witt class.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GwKey {
    pub rank: i64,
    pub witt: WittKey,
}

/// The virtual diagonal form `<entries> - hyperbolic·H`.
#[derive(Clone, Debug)]
pub struct FormClass {
    ctx: FieldCtx,
    entries: Vec<FieldElem>,
    hyperbolic: i64,
}

impl FormClass {
    pub fn new(ctx: &FieldCtx, entries: Vec<FieldElem>) -> Result<Self> {
        if entries.iter().any(|e| ctx.is_zero(e)) {
            return Err(Error::ZeroHasNoClass);
        }
        Ok(FormClass { ctx: ctx.clone(), entries, hyperbolic: 0 })
    }

    pub(crate) fn from_parts(ctx: &FieldCtx, entries: Vec<FieldElem>, hyperbolic: i64) -> Self {
        debug_assert!(entries.iter().all(|e| !ctx.is_zero(e)));
        FormClass { ctx: ctx.clone(), entries, hyperbolic }
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        FormClass { ctx: ctx.clone(), entries: Vec::new(), hyperbolic: 0 }
    }
    pub fn one(ctx: &FieldCtx) -> Self {
        Self::diag1(ctx, ctx.one())
    }
    /// The rank-one form `<a>`; `a` must be nonzero.
    pub fn diag1(ctx: &FieldCtx, a: FieldElem) -> Self {
        debug_assert!(!ctx.is_zero(&a));
        FormClass { ctx: ctx.clone(), entries: vec![a], hyperbolic: 0 }
    }
    pub fn hyperbolic_plane(ctx: &FieldCtx) -> Self {
        FormClass { ctx: ctx.clone(), entries: vec![ctx.one(), ctx.from_int(-1)], hyperbolic: 0 }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }
    pub fn hyperbolic_offset(&self) -> i64 {
        self.hyperbolic
    }
    pub fn virtual_rank(&self) -> i64 {
        self.entries.len() as i64 - 2 * self.hyperbolic
    }

    /// Same Witt class with the offset chosen so the virtual rank is `r`.
    pub fn with_virtual_rank(mut self, r: i64) -> Self {
        let diff = self.entries.len() as i64 - r;
        debug_assert!(diff % 2 == 0, "rank parity mismatch");
        self.hyperbolic = diff / 2;
        self
    }

    /// Drop the hyperbolic offset (the Witt-level representative).
    pub fn witt_part(mut self) -> Self {
        self.hyperbolic = 0;
        self
    }

    pub fn orth_sum(&self, o: &FormClass) -> Result<FormClass> {
        self.ctx.check_same(&o.ctx)?;
        let mut entries = self.entries.clone();
        entries.extend(o.entries.iter().cloned());
        Ok(FormClass { ctx: self.ctx.clone(), entries, hyperbolic: self.hyperbolic + o.hyperbolic })
    }

    /// Additive inverse: `-<a> = <-a> - H`.
    pub fn neg(&self) -> FormClass {
        let entries: Vec<FieldElem> =
            self.entries.iter().map(|a| self.ctx.neg(a).unwrap()).collect();
        let n = entries.len() as i64;
        FormClass { ctx: self.ctx.clone(), entries, hyperbolic: n - self.hyperbolic }
    }

    pub fn sub(&self, o: &FormClass) -> Result<FormClass> {
        self.orth_sum(&o.neg())
    }

    pub fn scale_int(&self, c: i64) -> FormClass {
        let base = if c < 0 { self.neg() } else { self.clone() };
        let m = c.unsigned_abs() as usize;
        let mut entries = Vec::with_capacity(base.entries.len() * m);
        for _ in 0..m {
            entries.extend(base.entries.iter().cloned());
        }
        FormClass { ctx: self.ctx.clone(), entries, hyperbolic: base.hyperbolic * m as i64 }
    }

    /// Tensor product. `H ⊗ φ = rank(φ)·H`.
    pub fn mul(&self, o: &FormClass) -> Result<FormClass> {
        self.ctx.check_same(&o.ctx)?;
        let mut entries = Vec::with_capacity(self.entries.len() * o.entries.len());
        for a in &self.entries {
            for b in &o.entries {
                entries.push(self.ctx.mul(a, b)?);
            }
        }
        let (a, b) = (self.entries.len() as i64, o.entries.len() as i64);
        let (h, k) = (self.hyperbolic, o.hyperbolic);
        let hyperbolic = h * b + k * a - 2 * h * k;
        Ok(FormClass { ctx: self.ctx.clone(), entries, hyperbolic })
    }

    /// Multiply every entry by the unit `u` (the action of `<u>`).
    pub fn scale_by(&self, u: &FieldElem) -> Result<FormClass> {
        if self.ctx.is_zero(u) {
            return Err(Error::ZeroHasNoClass);
        }
        let entries = self
            .entries
            .iter()
            .map(|a| self.ctx.mul(a, u))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormClass { ctx: self.ctx.clone(), entries, hyperbolic: self.hyperbolic })
    }

    /// Apply a field homomorphism entry-wise.
    pub fn map_field(
        &self,
        target: &FieldCtx,
        f: impl Fn(&FieldElem) -> Result<FieldElem>,
    ) -> Result<FormClass> {
        let entries = self.entries.iter().map(&f).collect::<Result<Vec<_>>>()?;
        Ok(FormClass { ctx: target.clone(), entries, hyperbolic: self.hyperbolic })
    }

    pub fn witt_key(&self) -> Result<WittKey> {
        match &self.ctx {
            FieldCtx::Finite(k) => {
                let codes: Vec<u32> = self.entries.iter().map(|e| e.as_finite().unwrap()).collect();
                Ok(WittKey::Finite(FiniteWitt::of_entries(k, &codes)?))
            }
            FieldCtx::Rational(r) => {
                let inf = r.infinity();
                let constant = finite_witt(&first_residue(self, &inf)?)?;
                let mut residues = BTreeMap::new();
                for g in self.support()? {
                    let pl = r.place(&g)?;
                    let w = finite_witt(&second_residue(self, &pl)?)?;
                    if !w.is_zero() {
                        residues.insert(g, w);
                    }
                }
                Ok(WittKey::Rational { constant, residues })
            }
        }
    }

    pub fn gw_key(&self) -> Result<GwKey> {
        Ok(GwKey { rank: self.virtual_rank(), witt: self.witt_key()? })
    }

    /// Finite places where some entry is not a unit (function fields only).
    pub fn support(&self) -> Result<Vec<Poly>> {
        let r = match &self.ctx {
            FieldCtx::Rational(r) => r,
            FieldCtx::Finite(_) => return Ok(Vec::new()),
        };
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend(r.support(e.as_rational().unwrap())?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn display(&self) -> String {
        let inner: Vec<String> = self.entries.iter().map(|e| self.ctx.format(e)).collect();
        let mut s = format!("<{}>", inner.join(","));
        match self.hyperbolic {
            0 => {}
            h if h > 0 => s.push_str(&format!("-{h}H")),
            h => s.push_str(&format!("+{}H", -h)),
        }
        s
    }
}

fn finite_witt(f: &FormClass) -> Result<FiniteWitt> {
    match f.witt_key()? {
        WittKey::Finite(w) => Ok(w),
        WittKey::Rational { .. } => unreachable!("residue forms live over finite fields"),
    }
}

/// Equality in the Grothendieck–Witt ring.
pub fn gw_equal(f: &FormClass, g: &FormClass) -> Result<bool> {
    f.ctx.check_same(&g.ctx)?;
    Ok(f.gw_key()? == g.gw_key()?)
}

/// Equality in the Witt ring.
pub fn witt_equal(f: &FormClass, g: &FormClass) -> Result<bool> {
    f.ctx.check_same(&g.ctx)?;
    Ok(f.witt_key()? == g.witt_key()?)
}

/// Second residue at a place of `F_q(t)`: `<π^k u> ↦ <ū>` for odd `k`,
/// zero for even `k`. The result is a Witt-level form over the residue field.
pub fn second_residue(f: &FormClass, pl: &Place) -> Result<FormClass> {
    residue_by_parity(f, pl, 1)
}

/// First residue: `<π^k u> ↦ <ū>` for even `k`, zero for odd `k`.
pub fn first_residue(f: &FormClass, pl: &Place) -> Result<FormClass> {
    residue_by_parity(f, pl, 0)
}

fn residue_by_parity(f: &FormClass, pl: &Place, parity: i64) -> Result<FormClass> {
    let r = f
        .ctx
        .as_rational()
        .ok_or_else(|| Error::FieldMismatch("residues need a function field".into()))?;
    if r.id() != pl.field().id() {
        return Err(Error::FieldMismatch("place belongs to another field".into()));
    }
    let k = FieldCtx::Finite(pl.residue_field().clone());
    let mut entries = Vec::new();
    for e in &f.entries {
        let (v, u) = pl.unit_part(e.as_rational().unwrap())?;
        if v.rem_euclid(2) == parity {
            entries.push(FieldElem::Finite(u));
        }
    }
    Ok(FormClass::from_parts(&k, entries, 0))
}

/// Diagonalize a symmetric matrix over a finite field of odd characteristic.
pub fn diagonalize(k: &FiniteField, mut m: Vec<Vec<u32>>) -> Vec<u32> {
    let n = m.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if m[i][i] == 0 {
            if let Some(j) = (i + 1..n).find(|&j| m[j][j] != 0) {
                m.swap(i, j);
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| m[i][j] != 0) {
                // e_i <- e_i + e_j gives m_ii = 2 m_ij != 0
                for c in 0..n {
                    m[i][c] = k.add(m[i][c], m[j][c]);
                }
                for r in 0..n {
                    m[r][i] = k.add(m[r][i], m[r][j]);
                }
            }
        }
        let piv = m[i][i];
        if piv == 0 {
            // degenerate remainder; record zeros
            out.push(0);
            continue;
        }
        out.push(piv);
        let inv = k.inv(piv).unwrap();
        for j in i + 1..n {
            let c = k.mul(m[j][i], inv);
            if c == 0 {
                continue;
            }
            for col in 0..n {
                m[j][col] = k.sub(m[j][col], k.mul(c, m[i][col]));
            }
            for row in 0..n {
                m[row][j] = k.sub(m[row][j], k.mul(c, m[row][i]));
            }
        }
    }
    out
}

/// Gram matrix of `(x, y) ↦ Tr_{L/K}(a·x·y)` in the `K`-basis of `L` given
/// by the base-`|K|` digits of the element codes.
pub fn trace_gram(l: &FiniteField, k: &FiniteField, a: u32) -> Result<Vec<Vec<u32>>> {
    let d = l.degree_over(k)? as usize;
    let basis: Vec<u32> = (0..d).map(|j| k.size().pow(j as u32)).collect();
    let mut g = vec![vec![0u32; d]; d];
    for i in 0..d {
        for j in i..d {
            let v = l.trace_to(k, l.mul(a, l.mul(basis[i], basis[j])))?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Scharlau transfer along the trace `Tr_{L/K}`, twisted by `scale`:
/// each entry `<a>` goes to the diagonalized form `Tr(scale·a·x·y)`.
pub fn trace_transfer_scaled(
    l: &Arc<FiniteField>,
    k: &Arc<FiniteField>,
    f: &FormClass,
    scale: u32,
) -> Result<FormClass> {
    match f.ctx() {
        FieldCtx::Finite(src) if src.same(l) => {}
        _ => return Err(Error::FieldMismatch("form does not live over L".into())),
    }
    let d = l.degree_over(k)? as i64;
    let mut entries = Vec::new();
    for e in f.entries() {
        let a = l.mul(e.as_finite().unwrap(), scale);
        let diag = diagonalize(k, trace_gram(l, k, a)?);
        debug_assert!(diag.iter().all(|&x| x != 0), "trace form is nondegenerate");
        entries.extend(diag.into_iter().map(FieldElem::Finite));
    }
    Ok(FormClass::from_parts(&FieldCtx::Finite(k.clone()), entries, f.hyperbolic_offset() * d))
}

/// Scharlau transfer along the trace form.
pub fn trace_transfer(l: &Arc<FiniteField>, k: &Arc<FiniteField>, f: &FormClass) -> Result<FormClass> {
    trace_transfer_scaled(l, k, f, 1)
}

/// Canonical Witt representative: rank at most two over finite fields; over
/// `F_q(t)` the sum of lifts `<g·c(t)>` of the residues, corrected
/// recursively at lower-degree places, plus a constant form.
pub fn witt_class(f: &FormClass) -> Result<FormClass> {
    match f.witt_key()? {
        WittKey::Finite(w) => {
            let k = f.ctx().as_finite().unwrap();
            let entries = w.representative(k).into_iter().map(FieldElem::Finite).collect();
            Ok(FormClass::from_parts(f.ctx(), entries, 0))
        }
        WittKey::Rational { constant, residues } => {
            let r = f.ctx().as_rational().unwrap().clone();
            witt_from_key(&r, constant, &residues)
        }
    }
}

fn witt_from_key(
    r: &Arc<RationalFunctionField>,
    constant: FiniteWitt,
    residues: &BTreeMap<Poly, FiniteWitt>,
) -> Result<FormClass> {
    let ctx = FieldCtx::Rational(r.clone());
    let base = r.base().clone();
    let mut acc = FormClass::zero(&ctx);
    // process places from high to low degree; lifts only disturb lower degrees
    let mut pending: BTreeMap<Poly, FiniteWitt> = residues.clone();
    let mut rounds = 0;
    while let Some((g, _)) = pending.iter().next_back().map(|(g, w)| (g.clone(), *w)) {
        rounds += 1;
        if rounds > 10_000 {
            return Err(Error::ApproximationFailed { rounds, open: vec![] });
        }
        let target = pending.remove(&g).unwrap();
        let pl = r.place(&g)?;
        let k = pl.residue_field().clone();
        let current = finite_witt(&second_residue(&acc, &pl)?)?;
        let need = target.add(&current.neg(&k), &k);
        if need.is_zero() {
            continue;
        }
        let gpoly = crate::fields::RatFn::from_poly(g.clone());
        for c in need.representative(&k) {
            let lift = crate::fields::RatFn::from_poly(pl.lift(c));
            let entry = FieldElem::Rational(gpoly.mul(&lift, &base));
            acc = acc.orth_sum(&FormClass::diag1(&ctx, entry))?;
        }
        // every lower place touched by the lifts must be rechecked
        for h in acc.support()? {
            if h < g && !pending.contains_key(&h) {
                pending.insert(h.clone(), residues.get(&h).copied().unwrap_or(FiniteWitt::ZERO));
            }
        }
    }
    let inf = r.infinity();
    let current = finite_witt(&first_residue(&acc, &inf)?)?;
    let need = constant.add(&current.neg(&base), &base);
    for c in need.representative(&base) {
        acc = acc.orth_sum(&FormClass::diag1(&ctx, ctx.constant(c)))?;
    }
    Ok(acc)
}
