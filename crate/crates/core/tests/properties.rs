//! Property tests over `F_q(t)` and `F_q` with generated symbol expressions.

use std::sync::Arc;

use proptest::prelude::*;

use mwk_core::fields::{FieldCtx, FieldElem, FiniteField, Poly, RatFn, RationalFunctionField};
use mwk_core::gersten::{h1_p1_class, total_residue, CurveScheme, SchemeKind};
use mwk_core::mw::{normalize_in, MwClass, MwExpression, Term, TwistedClass};
use mwk_core::residues::{canonical_transfer, constant_embed, mw_residue, Limits};

type RawUnit = (Vec<u32>, Vec<u32>);
type RawTerm = (i64, u32, Vec<RawUnit>);

fn raw_unit() -> impl Strategy<Value = RawUnit> {
    (prop::collection::vec(0u32..64, 1..=3), prop::collection::vec(0u32..64, 1..=2))
}

fn raw_terms(max_len: usize) -> impl Strategy<Value = Vec<RawTerm>> {
    prop::collection::vec(
        (prop_oneof![-2i64..=-1, 1i64..=2], 0u32..=1, prop::collection::vec(raw_unit(), max_len)),
        1..=3,
    )
}

fn rat_field(q: u32) -> (Arc<RationalFunctionField>, FieldCtx) {
    let r = RationalFunctionField::new(&FiniteField::of_order(q).unwrap());
    let c = FieldCtx::Rational(r.clone());
    (r, c)
}

fn unit(r: &RationalFunctionField, raw: &RawUnit) -> FieldElem {
    let q = r.base().size();
    let poly = |v: &[u32]| {
        let p = Poly::from_coeffs(v.iter().map(|c| c % q).collect());
        if p.is_zero() {
            Poly::one()
        } else {
            p
        }
    };
    FieldElem::Rational(RatFn::new(poly(&raw.0), poly(&raw.1), r.base()).unwrap())
}

/// Class of degree `n` built from generated terms.
fn class(r: &RationalFunctionField, ctx: &FieldCtx, n: i32, raw: &[RawTerm]) -> MwClass {
    let terms = raw
        .iter()
        .map(|(coef, eta, entries)| {
            let eta = eta + (-n).max(0) as u32;
            let len = (n + eta as i32) as usize;
            Term { coef: *coef, eta, entries: entries.iter().take(len).map(|u| unit(r, u)).collect() }
        })
        .collect();
    normalize_in(&MwExpression::new(ctx, terms).unwrap(), n).unwrap()
}

fn q_strategy() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(5), Just(7)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_laws(q in q_strategy(), a in raw_terms(3), b in raw_terms(3), c in raw_terms(3), m in 0i32..=1, n in -1i32..=1) {
        let (r, ctx) = rat_field(q);
        let x = class(&r, &ctx, m, &a);
        let y = class(&r, &ctx, n, &b);
        let z = class(&r, &ctx, n, &c);
        // associativity and distributivity
        prop_assert!(x.mul(&y).unwrap().mul(&z).unwrap().equals(&x.mul(&y.mul(&z).unwrap()).unwrap()).unwrap());
        let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
        prop_assert!(lhs.equals(&x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()).unwrap());
        // ε-graded commutativity, ε = -<-1>
        let eps = MwClass::unit_form(&ctx, &ctx.from_int(-1)).unwrap().neg().unwrap();
        let mut swapped = y.mul(&x).unwrap();
        for _ in 0..(m * n).rem_euclid(2) {
            swapped = eps.mul(&swapped).unwrap();
        }
        prop_assert!(x.mul(&y).unwrap().equals(&swapped).unwrap());
        prop_assert!(x.mul(&y).unwrap().compatible().unwrap());
    }

    #[test]
    fn residues_vanish_on_the_coboundary_image(q in q_strategy(), a in raw_terms(3), n in 0i32..=2) {
        let (r, ctx) = rat_field(q);
        let f = class(&r, &ctx, n, &a);
        let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 0).unwrap();
        let fam = total_residue(&f, &p1).unwrap();
        prop_assert!(h1_p1_class(&fam, &Limits::default()).unwrap().is_zero().unwrap());
    }

    #[test]
    fn residue_is_additive_and_kills_constants(q in q_strategy(), a in raw_terms(3), b in raw_terms(3), n in 0i32..=2, g0 in 0u32..7) {
        let (r, ctx) = rat_field(q);
        let x = class(&r, &ctx, n, &a);
        let y = class(&r, &ctx, n, &b);
        let pl = r.place(&Poly::linear(r.base(), g0 % q)).unwrap();
        let sum = mw_residue(&x.add(&y).unwrap(), &pl).unwrap();
        let parts = mw_residue(&x, &pl).unwrap().add(&mw_residue(&y, &pl).unwrap()).unwrap();
        prop_assert!(sum.equals(&parts).unwrap());
        let k = FieldCtx::Finite(r.base().clone());
        let c = MwClass::bracket(&k, &FieldElem::Finite(r.base().generator())).unwrap();
        prop_assert!(mw_residue(&constant_embed(&c, &r).unwrap(), &pl).unwrap().is_zero().unwrap());
    }

    #[test]
    fn square_rebase_is_invisible(q in q_strategy(), a in raw_terms(3), s in raw_unit(), u in raw_unit(), n in -1i32..=2) {
        let (r, ctx) = rat_field(q);
        let m = class(&r, &ctx, n, &a);
        let s = unit(&r, &s);
        let u = unit(&r, &u);
        let tc = TwistedClass::new(m.clone(), "L", s.clone()).unwrap();
        let sq = ctx.mul(&u, &u).unwrap();
        let moved = tc.rebase(&ctx.div(&s, &sq).unwrap(), &sq).unwrap();
        prop_assert!(moved.class().equals(&m).unwrap());
    }

    #[test]
    fn canonical_transfer_is_additive(p in prop_oneof![Just(3u32), Just(5)], d in 2u32..=3, xs in prop::collection::vec(1u32..1000, 2), n in 0i32..=1) {
        let k = FiniteField::prime(p).unwrap();
        let l = FiniteField::extension_of_degree(&k, d, "s").unwrap();
        let lctx = FieldCtx::Finite(l.clone());
        let pick = |x: u32| FieldElem::Finite(1 + x % (l.size() - 1));
        let make = |x: u32| if n == 0 { MwClass::unit_form(&lctx, &pick(x)).unwrap() } else { MwClass::bracket(&lctx, &pick(x)).unwrap() };
        let (a, b) = (make(xs[0]), make(xs[1]));
        let tr = |c: &MwClass| canonical_transfer(&l, &k, c, 4).unwrap();
        prop_assert!(tr(&a.add(&b).unwrap()).equals(&tr(&a).add(&tr(&b)).unwrap()).unwrap());
    }
}
