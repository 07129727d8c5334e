//! Gersten complexes of A^1, P^1 and G_m through the public API.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use mwk_core::fields::{FieldCtx, FiniteField, PlaceKey, Poly, RationalFunctionField};
use mwk_core::gersten::{
    decide_coboundary, h1_p1_class, random_family, reciprocity_check, total_residue, CurveScheme, Decision,
    SchemeKind, SupportedFamily,
};
use mwk_core::mw::contraction::{contraction_embed, contraction_project};
use mwk_core::mw::{normalize, parse_expression, MwClass};
use mwk_core::random::{random_class, SampleShape};
use mwk_core::residues::{constant_embed, Limits};
use mwk_core::Error;

fn curves(p: u32) -> (std::sync::Arc<RationalFunctionField>, FieldCtx) {
    let r = RationalFunctionField::new(&FiniteField::prime(p).unwrap());
    let c = FieldCtx::Rational(r.clone());
    (r, c)
}

fn nf(ctx: &FieldCtx, s: &str) -> MwClass {
    normalize(&parse_expression(ctx, s).unwrap()).unwrap()
}

#[test]
fn constants_are_unramified_everywhere() {
    let (r, c) = curves(5);
    let k = FieldCtx::Finite(r.base().clone());
    for kind in [SchemeKind::AffineLine, SchemeKind::ProjectiveLine, SchemeKind::Gm] {
        let x = CurveScheme::over(kind, &r, 0).unwrap();
        for s in ["[2]", "<3>", "eta", "[2]*[3]"] {
            let f = constant_embed(&nf(&k, s), &r).unwrap();
            assert!(total_residue(&f, &x).unwrap().is_empty(), "{s} on {}", kind.name());
        }
        assert!(total_residue(&nf(&c, "[t]"), &x).unwrap().len() <= 2);
    }
}

#[test]
fn gm_omits_the_origin() {
    let (r, c) = curves(5);
    let gm = CurveScheme::over(SchemeKind::Gm, &r, 0).unwrap();
    assert!(total_residue(&nf(&c, "[t]"), &gm).unwrap().is_empty());
    let fam = total_residue(&nf(&c, "[t]*[t+1]"), &gm).unwrap();
    assert_eq!(fam.entries().map(|(p, _)| p.label()).collect::<Vec<_>>(), vec!["t+1".to_string()]);
    assert!(gm.place(&PlaceKey::Finite(Poly::x())).is_err());
}

#[test]
fn coboundaries_have_preimages() {
    let (r, c) = curves(7);
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..=2 {
        for _ in 0..15 {
            let f = random_class(&mut rng, &c, n, &SampleShape::default()).unwrap();
            let fam = total_residue(&f, &p1).unwrap();
            match decide_coboundary(&fam, &Limits::default()).unwrap() {
                Decision::Preimage(g) => assert!(total_residue(&g, &p1).unwrap().equals(&fam).unwrap()),
                Decision::Obstruction(o) => panic!("coboundary obstructed by {}", o.display()),
            }
        }
    }
}

#[test]
fn affine_families_always_bound() {
    let (r, _) = curves(3);
    let a1 = CurveScheme::over(SchemeKind::AffineLine, &r, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 0..=2 {
        for _ in 0..10 {
            let fam = random_family(&mut rng, &a1, n).unwrap();
            assert!(matches!(decide_coboundary(&fam, &Limits::default()).unwrap(), Decision::Preimage(_)));
        }
    }
}

#[test]
fn even_twist_families_from_json() {
    let (r, _) = curves(5);
    let p2 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 2).unwrap();
    let v = json!({"scheme": "P1", "n": 1, "entries": [
        {"place": "t", "class": "1", "twist_tag": "O(2)"},
        {"place": "t+1", "class": "-1", "twist_tag": "O(2)"},
    ]});
    let fam = SupportedFamily::from_json(&p2, 1, &v).unwrap();
    assert!(h1_p1_class(&fam, &Limits::default()).unwrap().is_zero().unwrap());
    assert!(matches!(decide_coboundary(&fam, &Limits::default()).unwrap(), Decision::Preimage(_)));
    let bad = json!({"entries": [{"place": "t", "class": "1", "twist_tag": "trivial"}]});
    assert!(matches!(SupportedFamily::from_json(&p2, 1, &bad), Err(Error::InvalidTwist(_))));
}

#[test]
fn odd_twists_and_points_are_rejected() {
    let (r, c) = curves(5);
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 1).unwrap();
    let fam = total_residue(&nf(&c, "[t+1]"), &p1).unwrap();
    assert!(matches!(h1_p1_class(&fam, &Limits::default()), Err(Error::Unsupported(_))));
    assert!(CurveScheme::over(SchemeKind::AffineLine, &r, 1).is_err());
    let pt = CurveScheme::over(SchemeKind::Point, &r, 0).unwrap();
    assert!(total_residue(&nf(&c, "[t]"), &pt).is_err());
}

#[test]
fn reciprocity_examples() {
    let (r, c) = curves(5);
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 0).unwrap();
    for s in ["[t]", "[t]*[t+1]", "[2]", "<t^2+2> - 1", "eta*[t^2+t+1]", "[t]*[t]*[t+3]"] {
        assert!(reciprocity_check(&nf(&c, s), &p1, &Limits::default()).unwrap(), "{s}");
    }
}

#[test]
fn contraction_round_trip() {
    let (r, c) = curves(5);
    let k = FieldCtx::Finite(r.base().clone());
    for s in ["1", "<2>", "[3]", "[2]*[3]"] {
        let beta = nf(&k, s);
        let back = contraction_project(&contraction_embed(&beta, &r).unwrap()).unwrap();
        assert!(back.equals(&beta).unwrap(), "{s}");
    }
    assert!(matches!(contraction_project(&nf(&c, "[t+1]")), Err(Error::NotContractible(_))));
    let (r7, c7) = curves(7);
    let one = MwClass::one(&FieldCtx::Finite(r7.base().clone()));
    assert!(contraction_project(&nf(&c7, "[t]")).unwrap().equals(&one).unwrap());
}
