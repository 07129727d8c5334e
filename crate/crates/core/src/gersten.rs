//! Gersten complexes `C^0 → C^1` of curves over a finite field `F`:
//! the point, `A^1`, `P^1` (optionally twisted by `O(d)`) and `G_m`.
//!
//! `C^0` elements are classes over `F(t)`; `C^1` elements are finitely
//! supported families of twisted classes over residue fields. At a finite
//! place `x = (g)` the residue `∂^g_x f` is recorded against the section
//! `g'(x)`, at infinity `∂^{1/t}_∞ f` against `-1`, so that the value at the
//! section `1` is the one transferred to `F`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Place, PlaceKey, Poly, RationalFunctionField};
use crate::mw::expr::parse_expression_with;
use crate::mw::{normalize_in, MwClass, TwistedClass};
use crate::quad_forms::FormClass;
use crate::random::{random_class, SampleShape};
use crate::report::{merge_checks, Check};
use crate::residues::{
    canonical_transfer, constant_embed, mw_residue, prescribe_residues, specialization, support, Limits,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SchemeKind {
    Point,
    AffineLine,
    ProjectiveLine,
    Gm,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Point => "pt",
            SchemeKind::AffineLine => "A1",
            SchemeKind::ProjectiveLine => "P1",
            SchemeKind::Gm => "Gm",
        }
    }

    pub fn parse(s: &str) -> Result<SchemeKind> {
        match s {
            "pt" | "point" => Ok(SchemeKind::Point),
            "A1" | "affine_line" => Ok(SchemeKind::AffineLine),
            "P1" | "projective_line" => Ok(SchemeKind::ProjectiveLine),
            "Gm" | "gm" => Ok(SchemeKind::Gm),
            other => Err(Error::Invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A curve over a finite field together with its function field.
#[derive(Clone, Debug)]
pub struct CurveScheme {
    kind: SchemeKind,
    ground: Arc<FiniteField>,
    twist: i32,
    ff: Arc<RationalFunctionField>,
}

impl CurveScheme {
    pub fn new(kind: SchemeKind, ground: &Arc<FiniteField>, twist: i32) -> Result<CurveScheme> {
        if twist != 0 && kind != SchemeKind::ProjectiveLine {
            return Err(Error::InvalidTwist("twists are only defined on P1".into()));
        }
        Ok(CurveScheme { kind, ground: ground.clone(), twist, ff: RationalFunctionField::new(ground) })
    }

    /// The same curve over an existing function field (sharing caches).
    pub fn over(kind: SchemeKind, ff: &Arc<RationalFunctionField>, twist: i32) -> Result<CurveScheme> {
        if twist != 0 && kind != SchemeKind::ProjectiveLine {
            return Err(Error::InvalidTwist("twists are only defined on P1".into()));
        }
        Ok(CurveScheme { kind, ground: ff.base().clone(), twist, ff: ff.clone() })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
    pub fn ground(&self) -> &Arc<FiniteField> {
        &self.ground
    }
    pub fn twist(&self) -> i32 {
        self.twist
    }
    pub fn function_field(&self) -> &Arc<RationalFunctionField> {
        &self.ff
    }
    pub fn function_ctx(&self) -> FieldCtx {
        FieldCtx::Rational(self.ff.clone())
    }
    pub fn ground_ctx(&self) -> FieldCtx {
        FieldCtx::Finite(self.ground.clone())
    }

    pub fn tag(&self) -> String {
        if self.twist == 0 {
            "trivial".into()
        } else {
            format!("O({})", self.twist)
        }
    }

    pub fn contains(&self, key: &PlaceKey) -> bool {
        match (self.kind, key) {
            (SchemeKind::Point, _) => false,
            (SchemeKind::ProjectiveLine, _) => true,
            (_, PlaceKey::Infinity) => false,
            (SchemeKind::Gm, PlaceKey::Finite(g)) => *g != Poly::x(),
            (SchemeKind::AffineLine, PlaceKey::Finite(_)) => true,
        }
    }

    pub fn place(&self, key: &PlaceKey) -> Result<Place> {
        if !self.contains(key) {
            return Err(Error::InvalidPlace(format!("not a point of {}", self.kind.name())));
        }
        self.ff.place_for_key(key)
    }

    /// Section against which residues at `pl` are recorded.
    pub fn chart_section(&self, pl: &Place) -> FieldElem {
        match pl.derivative_at_root() {
            Some(d) => FieldElem::Finite(d),
            None => FieldElem::Finite(pl.residue_field().neg(1)),
        }
    }
}

/// A finitely supported element of `C^1`; entries have degree `n - 1`.
#[derive(Clone, Debug)]
pub struct SupportedFamily {
    scheme: CurveScheme,
    degree: i32,
    entries: BTreeMap<PlaceKey, (Place, TwistedClass)>,
}

impl SupportedFamily {
    pub fn new(scheme: &CurveScheme, degree: i32) -> SupportedFamily {
        SupportedFamily { scheme: scheme.clone(), degree, entries: BTreeMap::new() }
    }

    pub fn scheme(&self) -> &CurveScheme {
        &self.scheme
    }
    pub fn degree(&self) -> i32 {
        self.degree
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn entries(&self) -> impl Iterator<Item = (&Place, &TwistedClass)> {
        self.entries.values().map(|(p, c)| (p, c))
    }

    /// Add `tc` at the place (summing with an existing entry); zero entries
    /// are dropped.
    pub fn insert(&mut self, key: &PlaceKey, tc: TwistedClass) -> Result<()> {
        let pl = self.scheme.place(key)?;
        let k = FieldCtx::Finite(pl.residue_field().clone());
        tc.class().ctx().check_same(&k)?;
        if tc.class().degree() != self.degree - 1 {
            return Err(Error::DegreeMismatch(self.degree - 1, tc.class().degree()));
        }
        let tag = self.scheme.tag();
        if tc.tag() != tag {
            return Err(Error::InvalidTwist(format!("expected tag {tag}, got {}", tc.tag())));
        }
        let merged = match self.entries.remove(key) {
            Some((_, old)) => old.add(&tc)?,
            None => tc,
        };
        if !merged.class().is_zero()? {
            self.entries.insert(key.clone(), (pl, merged));
        }
        Ok(())
    }

    /// Insert a class given against the section `1`.
    pub fn insert_class(&mut self, key: &PlaceKey, cls: MwClass) -> Result<()> {
        let one = cls.ctx().one();
        let tc = TwistedClass::new(cls, &self.scheme.tag(), one)?;
        self.insert(key, tc)
    }

    pub fn add(&self, o: &SupportedFamily) -> Result<SupportedFamily> {
        if self.degree != o.degree || self.scheme.kind != o.scheme.kind || self.scheme.twist != o.scheme.twist {
            return Err(Error::Invalid("families live on different complexes".into()));
        }
        let mut out = self.clone();
        for (key, (_, tc)) in &o.entries {
            out.insert(key, tc.clone())?;
        }
        Ok(out)
    }

    /// Value at the section `1` of the entry at `key`.
    pub fn value_at_one(&self, key: &PlaceKey) -> Result<Option<MwClass>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((_, tc)) => Ok(Some(tc.class_at(&tc.class().ctx().one())?)),
        }
    }

    /// Entry as a residue with respect to the place's default uniformizer.
    fn residue_target(&self, pl: &Place, tc: &TwistedClass) -> Result<MwClass> {
        tc.class_at(&self.scheme.chart_section(pl))
    }

    pub fn equals(&self, o: &SupportedFamily) -> Result<bool> {
        if self.degree != o.degree || self.entries.len() != o.entries.len() {
            return Ok(false);
        }
        for (key, (_, tc)) in &self.entries {
            match o.entries.get(key) {
                Some((_, tc2)) if tc.equals(tc2)? => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut entries = Vec::new();
        for (pl, tc) in self.entries.values() {
            let k = tc.class().ctx();
            entries.push(json!({
                "place": pl.label(),
                "uniformizer": pl.uniformizer_label(),
                "class": tc.class().to_json()?,
                "twist_tag": tc.tag(),
                "section": k.format(tc.section()),
            }));
        }
        Ok(json!({
            "scheme": self.scheme.kind.name(),
            "twist": self.scheme.twist,
            "n": self.degree,
            "entries": entries,
        }))
    }

    /// Parse `{scheme?, n?, entries: [{place, class, twist_tag?, section?}]}`.
    /// Classes are expressions over the residue field in which `t` denotes
    /// the image of `t`; places are polynomials in `t` or `inf`.
    pub fn from_json(scheme: &CurveScheme, degree: i32, v: &Value) -> Result<SupportedFamily> {
        let mut fam = SupportedFamily::new(scheme, degree);
        let entries = v
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Invalid("family needs an entries array".into()))?;
        for e in entries {
            let place = e
                .get("place")
                .and_then(|p| p.as_str())
                .ok_or_else(|| Error::Invalid("entry needs a place".into()))?;
            let key = parse_place_key(scheme, place)?;
            let pl = scheme.place(&key)?;
            let k = FieldCtx::Finite(pl.residue_field().clone());
            let binding = (!pl.is_infinity()).then(|| FieldElem::Finite(pl.root()));
            let text = e
                .get("class")
                .and_then(|c| c.as_str())
                .ok_or_else(|| Error::Invalid("entry needs a class expression".into()))?;
            let cls = normalize_in(&parse_expression_with(&k, text, binding.clone())?, degree - 1)?;
            let section = match e.get("section").and_then(|s| s.as_str()) {
                Some(s) => crate::fields::parse::parse_elem_at(&k, s, 0, binding)?,
                None => k.one(),
            };
            let tag = e.get("twist_tag").and_then(|t| t.as_str()).map(str::to_string).unwrap_or_else(|| scheme.tag());
            if tag != scheme.tag() {
                return Err(Error::InvalidTwist(format!("expected tag {}, got {tag}", scheme.tag())));
            }
            fam.insert(&key, TwistedClass::new(cls, &tag, section)?)?;
        }
        Ok(fam)
    }
}

/// Parse `inf` or a monic irreducible polynomial in `t`.
pub fn parse_place_key(scheme: &CurveScheme, text: &str) -> Result<PlaceKey> {
    let t = text.trim();
    if t == "inf" || t == "∞" {
        return Ok(PlaceKey::Infinity);
    }
    let g = crate::fields::parse::parse_poly(scheme.ground(), t, 't')?;
    let g = if g.is_zero() { g } else { g.monic(scheme.ground()) };
    Ok(PlaceKey::Finite(g))
}

/// The Gersten differential: residues of `f` at every point of the scheme.
pub fn total_residue(f: &MwClass, scheme: &CurveScheme) -> Result<SupportedFamily> {
    if scheme.kind == SchemeKind::Point {
        return Err(Error::Invalid("a point has no codimension-one points".into()));
    }
    f.ctx().check_same(&scheme.function_ctx())?;
    let mut fam = SupportedFamily::new(scheme, f.degree());
    let tag = scheme.tag();
    for g in support(f)? {
        let key = PlaceKey::Finite(g);
        if !scheme.contains(&key) {
            continue;
        }
        let pl = scheme.place(&key)?;
        let res = mw_residue(f, &pl)?;
        if !res.is_zero()? {
            fam.insert(&key, TwistedClass::new(res, &tag, scheme.chart_section(&pl))?)?;
        }
    }
    if scheme.kind == SchemeKind::ProjectiveLine {
        let inf = scheme.ff.infinity();
        let twisted = if scheme.twist % 2 != 0 {
            let t = FieldElem::Rational(scheme.ff.t());
            f.gw_scale(&FormClass::diag1(f.ctx(), t))?
        } else {
            f.clone()
        };
        let res = mw_residue(&twisted, &inf)?;
        if !res.is_zero()? {
            fam.insert(&PlaceKey::Infinity, TwistedClass::new(res, &tag, scheme.chart_section(&inf))?)?;
        }
    }
    Ok(fam)
}

/// Image in `H^1(P^1) ≅ K^MW_{n-1}(F)`: the sum of canonical transfers of
/// the entries evaluated at the section `1`.
pub fn h1_p1_class(fam: &SupportedFamily, limits: &Limits) -> Result<MwClass> {
    let scheme = &fam.scheme;
    if scheme.kind != SchemeKind::ProjectiveLine {
        return Err(Error::Invalid("H1 classes are computed on P1".into()));
    }
    if scheme.twist % 2 != 0 {
        return Err(Error::Unsupported("H1 of P1 with an odd twist".into()));
    }
    let k = scheme.ground_ctx();
    let mut acc = MwClass::zero(&k, fam.degree - 1)?;
    for (pl, tc) in fam.entries() {
        let v = tc.class_at(&tc.class().ctx().one())?;
        let tr = canonical_transfer(pl.residue_field(), &scheme.ground, &v, limits.degree_cap)?;
        acc = acc.add(&tr)?;
    }
    Ok(acc)
}

/// Outcome of [`decide_coboundary`].
#[derive(Clone, Debug)]
pub enum Decision {
    Preimage(MwClass),
    Obstruction(MwClass),
}

/// Find `f` with `total_residue(f) = fam`, or the obstruction in `H^1`.
pub fn decide_coboundary(fam: &SupportedFamily, limits: &Limits) -> Result<Decision> {
    let scheme = &fam.scheme;
    if scheme.kind == SchemeKind::Point {
        return Err(Error::Invalid("a point has no codimension-one points".into()));
    }
    if scheme.kind == SchemeKind::ProjectiveLine {
        let h = h1_p1_class(fam, limits)?;
        if !h.is_zero()? {
            return Ok(Decision::Obstruction(h));
        }
    }
    let mut targets = Vec::new();
    for (pl, tc) in fam.entries() {
        if !pl.is_infinity() {
            targets.push((pl.clone(), fam.residue_target(pl, tc)?));
        }
    }
    let f = prescribe_residues(&scheme.ff, fam.degree, &targets, limits.max_rounds)?;
    let back = total_residue(&f, scheme)?;
    if !back.equals(fam)? {
        return Err(Error::ApproximationFailed {
            rounds: limits.max_rounds,
            open: back.entries().map(|(p, _)| p.label()).collect(),
        });
    }
    Ok(Decision::Preimage(f))
}

/// `h1_p1_class(total_residue(f)) = 0`.
pub fn reciprocity_check(f: &MwClass, scheme: &CurveScheme, limits: &Limits) -> Result<bool> {
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &scheme.ff, scheme.twist)?;
    h1_p1_class(&total_residue(f, &p1)?, limits)?.is_zero()
}

/// Outcome of the homotopy-invariance audit.
#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub field: String,
    pub n: i32,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl HomotopyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

pub const HOMOTOPY_CHECKS: [&str; 4] = ["a_h0_affine", "b_h1_affine", "c_h0_projective", "d_h1_projective"];

/// Per-trial seed derived from the run seed.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Random monic irreducible polynomial of degree `1..=max_deg`.
pub fn random_place_poly(rng: &mut impl Rng, k: &FiniteField, max_deg: usize) -> Poly {
    loop {
        let d = rng.gen_range(1..=max_deg);
        let mut c: Vec<u32> = (0..d).map(|_| rng.gen_range(0..k.size())).collect();
        c.push(1);
        let g = Poly::from_coeffs(c);
        if g.is_irreducible(k) {
            return g;
        }
    }
}

/// Random family on `scheme` with entries at 1–3 finite places of degree
/// at most 2 and, on `P^1`, possibly at infinity.
pub fn random_family(rng: &mut impl Rng, scheme: &CurveScheme, n: i32) -> Result<SupportedFamily> {
    let mut fam = SupportedFamily::new(scheme, n);
    let shape = SampleShape::default();
    let count = rng.gen_range(1..=3);
    for _ in 0..count {
        let key = loop {
            let g = random_place_poly(rng, &scheme.ground, 2);
            let key = PlaceKey::Finite(g);
            if scheme.contains(&key) {
                break key;
            }
        };
        let pl = scheme.place(&key)?;
        let k = FieldCtx::Finite(pl.residue_field().clone());
        let cls = random_class(rng, &k, n - 1, &shape)?;
        let s = FieldElem::Finite(rng.gen_range(1..pl.residue_field().size()));
        fam.insert(&key, TwistedClass::new(cls, &scheme.tag(), s)?)?;
    }
    if scheme.kind == SchemeKind::ProjectiveLine && rng.gen_bool(0.5) {
        let cls = random_class(rng, &scheme.ground_ctx(), n - 1, &shape)?;
        fam.insert_class(&PlaceKey::Infinity, cls)?;
    }
    Ok(fam)
}

/// Run the four homotopy-invariance checks; failures are recorded with
/// witnesses rather than raised.
pub fn run_homotopy_checks(ground: &Arc<FiniteField>, n: i32, trials: usize, seed: u64, limits: &Limits) -> Result<HomotopyReport> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let ff = RationalFunctionField::new(ground);
    let per_trial: Vec<Vec<Check>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| homotopy_trial(&ff, n, trial_seed(seed, i), limits))
        .collect();
    Ok(HomotopyReport {
        field: ground.spec_string(),
        n,
        trials,
        seed,
        checks: merge_checks(&HOMOTOPY_CHECKS, per_trial),
    })
}

/// As [`run_homotopy_checks`], failing with the first witness.
pub fn homotopy_invariance_audit(ground: &Arc<FiniteField>, n: i32, trials: usize, seed: u64) -> Result<HomotopyReport> {
    let report = run_homotopy_checks(ground, n, trials, seed, &Limits::default())?;
    if let Some(c) = report.checks.iter().find(|c| !c.passed()) {
        return Err(Error::AssertionFailed {
            check: c.name.clone(),
            witness: c.witness.as_ref().map(|w| w.to_string()).unwrap_or_default(),
        });
    }
    Ok(report)
}

fn homotopy_trial(ff: &Arc<RationalFunctionField>, n: i32, seed: u64, limits: &Limits) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<Check> = HOMOTOPY_CHECKS.iter().map(|c| Check::new(c)).collect();
    let a1 = CurveScheme::over(SchemeKind::AffineLine, ff, 0).unwrap();
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, ff, 0).unwrap();
    let base = ff.base().clone();
    let kctx = FieldCtx::Finite(base.clone());
    let fctx = FieldCtx::Rational(ff.clone());
    let shape = SampleShape::default();
    let wit = |what: &str, x: &dyn Fn() -> Result<Value>| {
        let detail = x().unwrap_or_else(|e| json!(e.to_string()));
        json!({ "seed": seed, "case": what, "detail": detail })
    };

    // (a) unramified on A^1 means constant
    let f = random_class(&mut rng, &fctx, n, &shape);
    let unramified = f.and_then(|f| {
        let fam = total_residue(&f, &a1)?;
        match decide_coboundary(&fam, limits)? {
            Decision::Preimage(pre) => Ok((f.clone(), f.sub(&pre)?)),
            Decision::Obstruction(_) => Err(Error::Invalid("obstruction on A1".into())),
        }
    });
    let (f, h) = match unramified {
        Ok(x) => x,
        Err(e) => {
            checks[0].record_result(Err(e), || json!({ "seed": seed, "case": "construct" }));
            return checks;
        }
    };
    let a = rng.gen_range(0..base.size());
    let x = ff.place(&Poly::linear(&base, a)).unwrap();
    let r = (|| -> Result<bool> {
        if !total_residue(&h, &a1)?.is_empty() {
            return Ok(false);
        }
        let c = specialization(&h, &x)?;
        let y = ff.place(&Poly::linear(&base, (a + 1) % base.size())).unwrap();
        Ok(h.equals(&constant_embed(&c, ff)?)? && specialization(&h, &y)?.equals(&c)?)
    })();
    checks[0].record_result(r, || wit("h0_affine", &|| Ok(json!({ "f": f.to_json()?, "unramified": h.to_json()? }))));

    // (b) every family on A^1 bounds
    let r = (|| -> Result<bool> {
        let fam = random_family(&mut rng, &a1, n)?;
        Ok(matches!(decide_coboundary(&fam, limits)?, Decision::Preimage(_)))
    })();
    checks[1].record_result(r, || wit("h1_affine", &|| Ok(json!({ "n": n }))));

    // (c) unramified on P^1 means constant, and constants are unramified
    let c = random_class(&mut rng, &kctx, n, &shape);
    let r = c.and_then(|c| {
        let g = h.add(&constant_embed(&c, ff)?)?;
        let fam = total_residue(&g, &p1)?;
        let s = specialization(&g, &x)?;
        Ok(fam.is_empty() && g.equals(&constant_embed(&s, ff)?)?)
    });
    checks[2].record_result(r, || wit("h0_projective", &|| Ok(json!({ "unramified": h.to_json()? }))));

    // (d) H^1(P^1) ≅ K^MW_{n-1}(F): surjective on rational-place families,
    // kills coboundaries, and vanishing classes bound
    let r = (|| -> Result<bool> {
        let beta = random_class(&mut rng, &kctx, n - 1, &shape)?;
        let mut fam = SupportedFamily::new(&p1, n);
        let b = rng.gen_range(0..base.size());
        fam.insert_class(&PlaceKey::Finite(Poly::linear(&base, b)), beta.clone())?;
        if !h1_p1_class(&fam, limits)?.equals(&beta)? {
            return Ok(false);
        }
        let g = random_class(&mut rng, &fctx, n, &shape)?;
        let coboundary = total_residue(&g, &p1)?;
        if !h1_p1_class(&coboundary, limits)?.is_zero()? {
            return Ok(false);
        }
        let other = random_family(&mut rng, &p1, n)?;
        let h_other = h1_p1_class(&other, limits)?;
        if !h1_p1_class(&other.add(&coboundary)?, limits)?.equals(&h_other)? {
            return Ok(false);
        }
        match decide_coboundary(&other, limits)? {
            Decision::Obstruction(o) => Ok(o.equals(&h_other)? && !h_other.is_zero()?),
            Decision::Preimage(_) => Ok(h_other.is_zero()?),
        }
    })();
    checks[3].record_result(r, || wit("h1_projective", &|| Ok(json!({ "f": f.to_json()? }))));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mw::{normalize, parse_expression};

    fn setup(p: u32) -> (CurveScheme, CurveScheme, FieldCtx) {
        let f = FiniteField::prime(p).unwrap();
        let ff = RationalFunctionField::new(&f);
        let a1 = CurveScheme::over(SchemeKind::AffineLine, &ff, 0).unwrap();
        let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &ff, 0).unwrap();
        (a1, p1, FieldCtx::Rational(ff))
    }

    fn nf(ctx: &FieldCtx, s: &str) -> MwClass {
        normalize(&parse_expression(ctx, s).unwrap()).unwrap()
    }

    #[test]
    fn total_residue_examples() {
        let (a1, p1, c) = setup(5);
        assert!(total_residue(&nf(&c, "[2]*[3] + <2>*[4]*[3]"), &p1).unwrap().is_empty());
        let t = nf(&c, "[t]");
        let fam = total_residue(&t, &a1).unwrap();
        assert_eq!(fam.len(), 1);
        let v = fam.value_at_one(&PlaceKey::Finite(Poly::x())).unwrap().unwrap();
        assert!(v.equals(&MwClass::one(&a1.ground_ctx())).unwrap());
        let fam = total_residue(&t, &p1).unwrap();
        let keys: Vec<String> = fam.entries().map(|(p, _)| p.label()).collect();
        assert_eq!(keys, vec!["t".to_string(), "inf".to_string()]);
        assert!(reciprocity_check(&t, &p1, &Limits::default()).unwrap());
    }

    #[test]
    fn rational_point_obstruction() {
        let (_, p1, _) = setup(5);
        let k = p1.ground_ctx();
        for s in ["1", "<2>", "[3]", "eta"] {
            let beta = normalize(&parse_expression(&k, s).unwrap()).unwrap();
            let mut fam = SupportedFamily::new(&p1, beta.degree() + 1);
            fam.insert_class(&PlaceKey::Finite(Poly::x()), beta.clone()).unwrap();
            match decide_coboundary(&fam, &Limits::default()).unwrap() {
                Decision::Obstruction(o) => assert!(o.equals(&beta).unwrap()),
                Decision::Preimage(_) => panic!("{s} should be obstructed"),
            }
        }
    }

    #[test]
    fn affine_preimage_of_unit_class() {
        let (a1, _, c) = setup(5);
        let mut fam = SupportedFamily::new(&a1, 1);
        fam.insert_class(&PlaceKey::Finite(Poly::x()), MwClass::one(&a1.ground_ctx())).unwrap();
        match decide_coboundary(&fam, &Limits::default()).unwrap() {
            Decision::Preimage(f) => assert!(f.equals(&nf(&c, "[t]")).unwrap()),
            Decision::Obstruction(_) => panic!(),
        }
    }

    #[test]
    fn degree_two_place_transfers() {
        let (_, p1, _) = setup(5);
        let g = Poly::from_coeffs(vec![2, 0, 1]);
        let pl = p1.place(&PlaceKey::Finite(g.clone())).unwrap();
        let l = pl.residue_field().clone();
        let lctx = FieldCtx::Finite(l.clone());
        let beta = MwClass::bracket(&lctx, &FieldElem::Finite(l.generator())).unwrap();
        let mut fam = SupportedFamily::new(&p1, 2);
        fam.insert_class(&PlaceKey::Finite(g), beta.clone()).unwrap();
        let h = h1_p1_class(&fam, &Limits::default()).unwrap();
        assert!(h.equals(&canonical_transfer(&l, p1.ground(), &beta, 4).unwrap()).unwrap());
        assert!(h1_p1_class(&SupportedFamily::new(&p1, 2), &Limits::default()).unwrap().is_zero().unwrap());
    }

    #[test]
    fn reciprocity_on_random_classes() {
        let shape = SampleShape::default();
        for p in [3u32, 5, 7] {
            let (_, p1, c) = setup(p);
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
            for n in 0..=2 {
                for _ in 0..20 {
                    let f = random_class(&mut rng, &c, n, &shape).unwrap();
                    assert!(reciprocity_check(&f, &p1, &Limits::default()).unwrap(), "{}", f.display());
                }
            }
        }
    }

    #[test]
    fn even_twists_match_the_untwisted_complex() {
        let f = FiniteField::prime(7).unwrap();
        let ff = RationalFunctionField::new(&f);
        let c = FieldCtx::Rational(ff.clone());
        let p0 = CurveScheme::over(SchemeKind::ProjectiveLine, &ff, 0).unwrap();
        let p2 = CurveScheme::over(SchemeKind::ProjectiveLine, &ff, 2).unwrap();
        let p1odd = CurveScheme::over(SchemeKind::ProjectiveLine, &ff, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_class(&mut rng, &c, 1, &SampleShape::default()).unwrap();
            let a = h1_p1_class(&total_residue(&x, &p0).unwrap(), &Limits::default()).unwrap();
            let b = h1_p1_class(&total_residue(&x, &p2).unwrap(), &Limits::default()).unwrap();
            assert!(a.equals(&b).unwrap());
            assert!(matches!(
                h1_p1_class(&total_residue(&x, &p1odd).unwrap(), &Limits::default()),
                Err(Error::Unsupported(_))
            ));
        }
    }

    #[test]
    fn homotopy_audit_small() {
        let f = FiniteField::prime(5).unwrap();
        for n in 0..=1 {
            let r = homotopy_invariance_audit(&f, n, 10, 1).unwrap();
            assert!(r.passed());
        }
        assert!(homotopy_invariance_audit(&f, 1, 0, 1).is_err());
    }

    #[test]
    fn family_json_roundtrip() {
        let (_, p1, _) = setup(5);
        let v = json!({"entries": [
            {"place": "t^2+2", "class": "[t+1]"},
            {"place": "inf", "class": "[2]", "section": "3"},
        ]});
        let fam = SupportedFamily::from_json(&p1, 2, &v).unwrap();
        assert_eq!(fam.len(), 2);
        let j = fam.to_json().unwrap();
        assert_eq!(j["entries"].as_array().unwrap().len(), 2);
        assert!(SupportedFamily::from_json(&p1, 2, &json!({"entries": [{"place": "t^2+1", "class": "[2]"}]})).is_err());
    }
}
