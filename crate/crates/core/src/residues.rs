//! Residue maps at closed points of `P^1`, prescribed-residue lifting, and
//! the two transfer constructions along finite extensions of finite fields.
//!
//! Conventions:
//! * residues are taken with respect to the place's uniformizer; the Milnor
//!   part uses the tame symbol, the form part the second residue;
//! * the geometric transfer of `β ∈ K^MW_n(L)` along a generator `x` with
//!   minimal polynomial `g` lifts `<g'(x)>·β` to `f` over `K(t)` with no
//!   other finite residues, and returns `-<-1>·∂_∞(f)` with uniformizer
//!   `1/t`. The factor `<g'(x)>` trivializes `ω_{L/K}` through `dg`; the
//!   factor `-<-1>` compares the chart at infinity with the affine chart.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Place, Poly, RatFn, RationalFunctionField};
use crate::milnor::{milnor_transfer, MilnorData};
use crate::mw::{MwClass, TwistedClass};
use crate::quad_forms::{gw_equal, second_residue, trace_transfer, FiniteWitt, FormClass, WittKey};

/// Default cap on extension degrees for transfers.
pub const DEFAULT_DEGREE_CAP: u32 = 4;
/// Default bound on correction rounds when prescribing residues.
pub const DEFAULT_MAX_ROUNDS: usize = 16;

/// A class, a place and an optional uniformizer override.
#[derive(Clone, Debug)]
pub struct ResidueRequest {
    pub cls: MwClass,
    pub place: Place,
    pub pi: Option<RatFn>,
}

impl ResidueRequest {
    pub fn run(&self) -> Result<MwClass> {
        match &self.pi {
            Some(pi) => mw_residue(&self.cls, &self.place.with_uniformizer(pi)?),
            None => mw_residue(&self.cls, &self.place),
        }
    }
}

/// The residue `∂^π_x : K^MW_n(F(t)) → K^MW_{n-1}(κ(x))`.
pub fn mw_residue(cls: &MwClass, pl: &Place) -> Result<MwClass> {
    let r = cls
        .ctx()
        .as_rational()
        .ok_or_else(|| Error::FieldMismatch("residues need a function field".into()))?;
    if r.id() != pl.field().id() {
        return Err(Error::FieldMismatch("place belongs to another field".into()));
    }
    let kctx = FieldCtx::Finite(pl.residue_field().clone());
    let n = cls.degree() - 1;
    let milnor = match cls.milnor() {
        Some(m) if n >= 0 => Some(m.tame_symbol(pl)?),
        _ => None,
    };
    let form = second_residue(cls.form(), pl)?;
    MwClass::from_parts(&kctx, n, milnor, form)
}

/// Residue of a twisted class whose section is a unit at the place; the
/// section restricts to the residue field.
pub fn mw_residue_twisted(tc: &TwistedClass, pl: &Place) -> Result<TwistedClass> {
    let s = tc.section().as_rational().ok_or_else(|| Error::FieldMismatch("section".into()))?;
    if pl.valuation(s)? != 0 {
        return Err(Error::InvalidTwist(format!("section vanishes or has a pole at {}", pl.label())));
    }
    let s_bar = FieldElem::Finite(pl.evaluate(s)?);
    TwistedClass::new(mw_residue(tc.class(), pl)?, tc.tag(), s_bar)
}

/// Specialization `s^π_x(m) = ∂^π_x([π]·m)` of a class unramified at `x`.
pub fn specialization(cls: &MwClass, pl: &Place) -> Result<MwClass> {
    let pi = MwClass::bracket(cls.ctx(), &FieldElem::Rational(pl.uniformizer().clone()))?;
    mw_residue(&pi.mul(cls)?, pl)
}

/// Finite places where some entry of the class is not a unit.
pub fn support(cls: &MwClass) -> Result<Vec<Poly>> {
    let r = match cls.ctx().as_rational() {
        Some(r) => r,
        None => return Ok(Vec::new()),
    };
    let mut out = cls.form().support()?;
    if let Some(m) = cls.milnor() {
        match m.data() {
            MilnorData::Unit(u) => out.extend(r.support(u.as_rational().unwrap())?),
            MilnorData::Symbols(t) => {
                for (_, a, b) in t {
                    out.extend(r.support(a)?);
                    out.extend(r.support(b)?);
                }
            }
            _ => {}
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Constant embedding `K → K(t)`.
pub fn constant_embed(cls: &MwClass, r: &Arc<RationalFunctionField>) -> Result<MwClass> {
    let target = FieldCtx::Rational(r.clone());
    cls.map_field(&target, |e| match e {
        FieldElem::Finite(c) => Ok(FieldElem::Rational(RatFn::constant(*c))),
        _ => Err(Error::FieldMismatch("constant embedding needs a finite field".into())),
    })
}

/// Restriction along `K ⊆ L` (identity on element codes).
pub fn restrict(cls: &MwClass, l: &Arc<FiniteField>) -> Result<MwClass> {
    let k = cls.ctx().as_finite().ok_or_else(|| Error::FieldMismatch("restriction".into()))?;
    if !l.has_subfield(k) {
        return Err(Error::NotASubfield(k.describe()));
    }
    cls.map_field(&FieldCtx::Finite(l.clone()), |e| Ok(e.clone()))
}

/// A class over `K(t)` with entries of degree `< deg x` that is a unit at `x`
/// and reduces to `γ` there.
fn lift_to_units(pl: &Place, gamma: &MwClass) -> Result<MwClass> {
    let r = pl.field();
    let ctx = FieldCtx::Rational(r.clone());
    let k = pl.residue_field();
    let lift = |c: u32| FieldElem::Rational(RatFn::from_poly(pl.lift(c)));
    let m = gamma.degree();
    match m {
        _ if m >= 2 => MwClass::zero(&ctx, m),
        1 => {
            let c = gamma.milnor().unwrap().as_unit().unwrap().as_finite().unwrap();
            MwClass::bracket(&ctx, &lift(c))
        }
        0 => {
            let rank = gamma.milnor().unwrap().as_int().unwrap();
            let kctx = gamma.ctx();
            let base = FormClass::one(kctx).scale_int(rank).sub(&FormClass::one(kctx))?;
            let d = [1, k.nonsquare()]
                .into_iter()
                .find(|&d| {
                    let cand = base.orth_sum(&FormClass::diag1(kctx, FieldElem::Finite(d))).unwrap();
                    gw_equal(&cand, gamma.form()).unwrap()
                })
                .expect("rank and discriminant classify GW over a finite field");
            let f = FormClass::one(&ctx)
                .scale_int(rank)
                .sub(&FormClass::one(&ctx))?
                .orth_sum(&FormClass::diag1(&ctx, lift(d)))?;
            Ok(MwClass::from_form(&f))
        }
        _ => {
            let w = match gamma.form().witt_key()? {
                WittKey::Finite(w) => w,
                WittKey::Rational { .. } => unreachable!(),
            };
            let entries = w.representative(k).into_iter().map(lift).collect();
            MwClass::from_parts(&ctx, m, None, FormClass::new(&ctx, entries)?)
        }
    }
}

/// `[π]·γ̃`: residue `γ` at `x`, other residues only at places of lower
/// degree (and at infinity).
fn lift_single(pl: &Place, gamma: &MwClass) -> Result<MwClass> {
    let ctx = FieldCtx::Rational(pl.field().clone());
    let pi = MwClass::bracket(&ctx, &FieldElem::Rational(pl.uniformizer().clone()))?;
    pi.mul(&lift_to_units(pl, gamma)?)
}

/// Find `f` of degree `n` over `K(t)` with the prescribed residues at the
/// given finite places and no residue at any other finite place. Each round
/// corrects every wrong residue; the largest degree of a wrong place drops
/// strictly, so the loop ends after at most `max deg + 1` rounds.
pub fn prescribe_residues(
    r: &Arc<RationalFunctionField>,
    n: i32,
    targets: &[(Place, MwClass)],
    max_rounds: usize,
) -> Result<MwClass> {
    let ctx = FieldCtx::Rational(r.clone());
    let mut places: BTreeMap<Poly, (Place, Option<MwClass>)> = BTreeMap::new();
    for (pl, m) in targets {
        let g = pl.poly().ok_or_else(|| Error::InvalidPlace("residues at infinity cannot be prescribed".into()))?;
        if m.degree() != n - 1 {
            return Err(Error::DegreeMismatch(n - 1, m.degree()));
        }
        places.insert(g.clone(), (pl.clone(), Some(m.clone())));
    }
    let mut f = MwClass::zero(&ctx, n)?;
    let mut last_max = usize::MAX;
    for _ in 0..=max_rounds {
        let mut bad = Vec::new();
        let mut keys: Vec<Poly> = places.keys().cloned().collect();
        keys.extend(support(&f)?);
        keys.sort();
        keys.dedup();
        for g in keys {
            let (pl, want) = match places.get(&g) {
                Some((pl, want)) => (pl.clone(), want.clone()),
                None => (r.place(&g)?, None),
            };
            let cur = mw_residue(&f, &pl)?;
            let diff = match want {
                Some(w) => w.sub(&cur)?,
                None => cur.neg()?,
            };
            if !diff.is_zero()? {
                bad.push((pl, diff));
            }
        }
        if bad.is_empty() {
            return Ok(f);
        }
        let max = bad.iter().map(|(pl, _)| pl.degree() as usize).max().unwrap();
        if max >= last_max {
            return Err(Error::ApproximationFailed {
                rounds: max_rounds,
                open: bad.iter().map(|(pl, _)| pl.label()).collect(),
            });
        }
        last_max = max;
        for (pl, diff) in bad {
            f = f.add(&lift_single(&pl, &diff)?)?;
        }
    }
    Err(Error::ApproximationFailed { rounds: max_rounds, open: vec![] })
}

/// `-<-1>`, the comparison factor between the chart at infinity and the
/// affine chart.
pub fn infinity_factor(k: &FieldCtx) -> FormClass {
    FormClass::diag1(k, k.from_int(-1)).neg()
}

/// Canonical transfer: norm on the Milnor part, trace form on the form part.
pub fn canonical_transfer(l: &Arc<FiniteField>, k: &Arc<FiniteField>, beta: &MwClass, cap: u32) -> Result<MwClass> {
    let d = l.degree_over(k)?;
    if d > cap {
        return Err(Error::ExtensionTooLarge(d, cap));
    }
    match beta.ctx() {
        FieldCtx::Finite(f) if f.same(l) => {}
        _ => return Err(Error::FieldMismatch("class does not live over L".into())),
    }
    let kctx = FieldCtx::Finite(k.clone());
    let milnor = beta.milnor().map(|m| milnor_transfer(l, k, m)).transpose()?;
    let form = trace_transfer(l, k, beta.form())?;
    MwClass::from_parts(&kctx, beta.degree(), milnor, form)
}

/// Caps on transfer degrees and on residue-correction rounds.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub degree_cap: u32,
    pub max_rounds: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { degree_cap: DEFAULT_DEGREE_CAP, max_rounds: DEFAULT_MAX_ROUNDS }
    }
}

/// Transfer through `H^1(P^1_K)` along the closed point cut out by the
/// minimal polynomial of the generator `x` of `L/K`.
pub fn geometric_transfer(
    k: &Arc<FiniteField>,
    l: &Arc<FiniteField>,
    x: u32,
    beta: &MwClass,
    opts: Limits,
) -> Result<MwClass> {
    let d = l.degree_over(k)?;
    if d > opts.degree_cap {
        return Err(Error::ExtensionTooLarge(d, opts.degree_cap));
    }
    match beta.ctx() {
        FieldCtx::Finite(f) if f.same(l) => {}
        _ => return Err(Error::FieldMismatch("class does not live over L".into())),
    }
    let g = l.min_poly(k, x)?;
    if g.degree() != Some(d as usize) {
        return Err(Error::Invalid(format!("{} does not generate the extension", l.format(x))));
    }
    let r = RationalFunctionField::new(k);
    let pl = r.place_with_realization(&g, l, x)?;
    let dg = pl.derivative_at_root().unwrap();
    let gamma = beta.gw_scale(&FormClass::diag1(beta.ctx(), FieldElem::Finite(dg)))?;
    let f = prescribe_residues(&r, beta.degree() + 1, &[(pl, gamma)], opts.max_rounds)?;
    let at_inf = mw_residue(&f, &r.infinity())?;
    let kctx = FieldCtx::Finite(k.clone());
    at_inf.gw_scale(&infinity_factor(&kctx))
}

/// One step `L_{i-1} ⊂ L_i = L_{i-1}(x_i)` of a tower.
#[derive(Clone, Debug)]
pub struct TowerStep {
    pub field: Arc<FiniteField>,
    pub generator: u32,
}

/// Composite of geometric step transfers down the tower `K ⊂ L_1 ⊂ ... ⊂ L_r`.
pub fn transfer_chain(
    k: &Arc<FiniteField>,
    steps: &[TowerStep],
    beta: &MwClass,
    opts: Limits,
) -> Result<MwClass> {
    if steps.is_empty() {
        return Ok(beta.clone());
    }
    let mut lower: Vec<Arc<FiniteField>> = vec![k.clone()];
    for s in &steps[..steps.len() - 1] {
        lower.push(s.field.clone());
    }
    for (i, s) in steps.iter().enumerate() {
        if !s.field.has_subfield(&lower[i]) || s.field.degree_over(&lower[i])? < 1 {
            return Err(Error::Invalid(format!("step {i} is not an extension of the previous field")));
        }
    }
    let mut cur = beta.clone();
    for (i, s) in steps.iter().enumerate().rev() {
        cur = geometric_transfer(&lower[i], &s.field, s.generator, &cur, opts)?;
    }
    Ok(cur)
}

/// Table `a ↦ P_a` with `P_a(x) = a`, `deg P_a < [L:K]`.
fn power_basis_table(k: &Arc<FiniteField>, l: &Arc<FiniteField>, x: u32) -> Result<Vec<Poly>> {
    let d = l.degree_over(k)? as usize;
    let mut table = vec![None; l.size() as usize];
    for p in Poly::monic_of_degree(k, d) {
        let mut c = p.coeffs().to_vec();
        c.pop();
        let p = Poly::from_coeffs(c);
        let v = l.eval_poly(&p, x) as usize;
        table[v] = Some(p);
    }
    table
        .into_iter()
        .map(|p| p.ok_or_else(|| Error::Invalid("generator does not generate L".into())))
        .collect()
}

/// Compare `res_{K'/K} ∘ tr_{L/K}` with `Σ_j tr_{L'_j/K'} ∘ res_{L'_j/L}`,
/// where `L ⊗_K K' = ∏ L'_j` is split by factoring the minimal polynomial of
/// `x` over `K'`.
pub fn base_change_transfer_check(
    k: &Arc<FiniteField>,
    l: &Arc<FiniteField>,
    x: u32,
    kp: &Arc<FiniteField>,
    beta: &MwClass,
    cap: u32,
) -> Result<bool> {
    let lhs = restrict(&canonical_transfer(l, k, beta, cap)?, kp)?;
    let g = l.min_poly(k, x)?;
    let table = power_basis_table(k, l, x)?;
    let kpctx = FieldCtx::Finite(kp.clone());
    let mut rhs = MwClass::zero(&kpctx, beta.degree())?;
    for (h, mult) in g.factor(kp)?.factors {
        debug_assert_eq!(mult, 1, "finite extensions are separable");
        let (lj, root) = if h.degree() == Some(1) {
            (kp.clone(), kp.neg(h.coeff(0)))
        } else {
            (FiniteField::extension(kp, h.clone(), "u")?, kp.size())
        };
        let ljctx = FieldCtx::Finite(lj.clone());
        let up = beta.map_field(&ljctx, |e| {
            let p = &table[e.as_finite().unwrap() as usize];
            Ok(FieldElem::Finite(lj.eval_poly(p, root)))
        })?;
        rhs = rhs.add(&canonical_transfer(&lj, kp, &up, cap.max(lj.degree_over(kp)?))?)?;
    }
    lhs.equals(&rhs)
}

/// Additive generators of `K^MW_n(k)` for each requested degree: `<1>` and
/// `<nonsquare>` in degree 0, `[generator]` in degree 1, the two odd Witt
/// classes in negative degrees, zero above.
pub fn spanning_classes(k: &Arc<FiniteField>, degrees: &[i32]) -> Result<Vec<MwClass>> {
    let ctx = FieldCtx::Finite(k.clone());
    let mut out = Vec::new();
    for &n in degrees {
        match n {
            0 => {
                out.push(MwClass::one(&ctx));
                out.push(MwClass::unit_form(&ctx, &FieldElem::Finite(k.nonsquare()))?);
            }
            1 => out.push(MwClass::bracket(&ctx, &FieldElem::Finite(k.generator()))?),
            n if n < 0 => {
                for w in [FiniteWitt { odd: true, disc_square: true }, FiniteWitt { odd: true, disc_square: false }] {
                    let entries = w.representative(k).into_iter().map(FieldElem::Finite).collect();
                    out.push(MwClass::from_parts(&ctx, n, None, FormClass::new(&ctx, entries)?)?);
                }
            }
            _ => out.push(MwClass::zero(&ctx, n)?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse::{parse_elem, parse_field_spec};
    use crate::mw::{normalize, parse_expression};

    fn rat(spec: &str) -> (Arc<RationalFunctionField>, FieldCtx) {
        let c = parse_field_spec(spec, 121).unwrap();
        (c.as_rational().unwrap().clone(), c)
    }

    fn nf(ctx: &FieldCtx, s: &str) -> MwClass {
        normalize(&parse_expression(ctx, s).unwrap()).unwrap()
    }

    #[test]
    fn residue_examples() {
        let (r, c) = rat("F=F5(t)");
        let pt = r.place(&Poly::x()).unwrap();
        assert!(mw_residue(&nf(&c, "[t+1]*[2]"), &pt).unwrap().is_zero().unwrap());
        let one = mw_residue(&nf(&c, "[t]"), &pt).unwrap();
        assert!(one.equals(&MwClass::one(&FieldCtx::Finite(r.base().clone()))).unwrap());

        let (r7, c7) = rat("F=F7(t)");
        let pt = r7.place(&Poly::x()).unwrap();
        let res = mw_residue(&nf(&c7, "eta*[t]*[t+3]"), &pt).unwrap();
        let k = FieldCtx::Finite(r7.base().clone());
        assert_eq!(res.degree(), 0);
        assert!(res.equals(&nf(&k, "eta*[3]")).unwrap());
        assert!(res.equals(&nf(&k, "<3> - 1")).unwrap());
    }

    #[test]
    fn residue_characterization() {
        let (r, c) = rat("F=F5(t)");
        let k = FieldCtx::Finite(r.base().clone());
        let pt = r.place(&Poly::x()).unwrap();
        let t = MwClass::bracket(&c, &parse_elem(&c, "t").unwrap()).unwrap();
        for s in ["1", "<2>", "[2]", "[3] + [2]", "eta", "eta*eta*<2>", "[2]*[3]"] {
            let beta = nf(&k, s);
            let lifted = t.mul(&constant_embed(&beta, &r).unwrap()).unwrap();
            assert!(mw_residue(&lifted, &pt).unwrap().equals(&beta).unwrap(), "{s}");
        }
    }

    #[test]
    fn rational_point_transfer_is_identity() {
        let f5 = FiniteField::prime(5).unwrap();
        for beta in spanning_classes(&f5, &[-1, 0, 1, 2]).unwrap() {
            for x in 0..5 {
                let t = geometric_transfer(&f5, &f5, x, &beta, Limits::default()).unwrap();
                assert!(t.equals(&beta).unwrap(), "x={x} {}", beta.display());
            }
        }
    }

    #[test]
    fn quadratic_cross_oracle() {
        let f5 = FiniteField::prime(5).unwrap();
        let f25 = FiniteField::extension_of_degree(&f5, 2, "s").unwrap();
        for beta in spanning_classes(&f25, &[-1, 0, 1]).unwrap() {
            let can = canonical_transfer(&f25, &f5, &beta, 4).unwrap();
            for x in f25.units().filter(|&x| f25.min_poly(&f5, x).unwrap().degree() == Some(2)).take(6) {
                let geo = geometric_transfer(&f5, &f25, x, &beta, Limits::default()).unwrap();
                assert!(geo.equals(&can).unwrap(), "x={x}: {} vs {}", geo.display(), can.display());
            }
        }
    }

    #[test]
    fn cubic_and_quartic_cross_oracle() {
        for (p, d) in [(3u32, 3u32), (3, 4), (5, 3)] {
            let k = FiniteField::prime(p).unwrap();
            let l = FiniteField::extension_of_degree(&k, d, "s").unwrap();
            let gens: Vec<u32> = l
                .units()
                .filter(|&x| l.min_poly(&k, x).unwrap().degree() == Some(d as usize))
                .step_by(7)
                .take(4)
                .collect();
            for beta in spanning_classes(&l, &[-1, 0, 1]).unwrap() {
                let can = canonical_transfer(&l, &k, &beta, 4).unwrap();
                for &x in &gens {
                    let geo = geometric_transfer(&k, &l, x, &beta, Limits::default()).unwrap();
                    assert!(geo.equals(&can).unwrap(), "p={p} d={d} x={x}: {} vs {}", geo.display(), can.display());
                }
            }
        }
    }

    #[test]
    fn prescribed_residues_on_the_affine_line() {
        let (r, c) = rat("F=F5(t)");
        let k = FieldCtx::Finite(r.base().clone());
        let pt = r.place(&Poly::x()).unwrap();
        let f = prescribe_residues(&r, 1, &[(pt.clone(), MwClass::one(&k))], 16).unwrap();
        assert!(f.equals(&nf(&c, "[t]")).unwrap());
        let g = Poly::from_coeffs(vec![2, 0, 1]);
        let q = r.place(&g).unwrap();
        let kq = FieldCtx::Finite(q.residue_field().clone());
        let beta = MwClass::bracket(&kq, &FieldElem::Finite(q.residue_field().generator())).unwrap();
        let f = prescribe_residues(&r, 2, &[(q.clone(), beta.clone())], 16).unwrap();
        assert!(mw_residue(&f, &q).unwrap().equals(&beta).unwrap());
        for h in support(&f).unwrap() {
            if h != g {
                assert!(mw_residue(&f, &r.place(&h).unwrap()).unwrap().is_zero().unwrap());
            }
        }
    }

    #[test]
    fn constant_degree_two_classes_add_over_the_function_field() {
        let (r, c) = rat("F=F5(t)");
        let k = FieldCtx::Finite(r.base().clone());
        let z = constant_embed(&nf(&k, "[2]*[3]"), &r).unwrap();
        let f = nf(&c, "[t]*[t+1]");
        assert!(f.add(&z).unwrap().equals(&f).unwrap());
        assert!(z.is_zero().unwrap());
    }

    #[test]
    fn transfer_of_zero_and_identity() {
        let f3 = FiniteField::prime(3).unwrap();
        let c3 = FieldCtx::Finite(f3.clone());
        let z = MwClass::zero(&c3, 1).unwrap();
        let f9 = FiniteField::extension_of_degree(&f3, 2, "s").unwrap();
        let z9 = MwClass::zero(&FieldCtx::Finite(f9.clone()), 0).unwrap();
        assert!(canonical_transfer(&f9, &f3, &z9, 4).unwrap().is_zero().unwrap());
        assert!(geometric_transfer(&f3, &f9, 3, &z9, Limits::default()).unwrap().is_zero().unwrap());
        assert!(canonical_transfer(&f3, &f3, &z, 4).unwrap().is_zero().unwrap());
        let b = MwClass::bracket(&c3, &FieldElem::Finite(2)).unwrap();
        assert!(canonical_transfer(&f3, &f3, &b, 4).unwrap().equals(&b).unwrap());
    }
}
