//! Audit suites: every check is evaluated on many cases, counted, and the
//! first failing case is kept as a witness. Suites are deterministic
//! functions of the run configuration.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, FiniteField, Poly, RatFn, RationalFunctionField};
use crate::gersten::{random_place_poly, reciprocity_check, run_homotopy_checks, trial_seed, CurveScheme, SchemeKind};
use crate::mw::{normalize_in, MwClass, MwExpression, Term, TwistedClass};
use crate::quad_forms::FormClass;
use crate::random::{random_class, random_expression, random_unit, SampleShape};
use crate::report::{conventions_fingerprint, merge_checks, Check};
use crate::residues::{
    base_change_transfer_check, canonical_transfer, geometric_transfer, mw_residue, mw_residue_twisted,
    spanning_classes, transfer_chain, Limits, TowerStep,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Relations,
    Structure,
    Residues,
    Transfers,
    Reciprocity,
    Homotopy,
    Twists,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Relations,
        Suite::Structure,
        Suite::Residues,
        Suite::Transfers,
        Suite::Reciprocity,
        Suite::Homotopy,
        Suite::Twists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Relations => "relations",
            Suite::Structure => "structure",
            Suite::Residues => "residues",
            Suite::Transfers => "transfers",
            Suite::Reciprocity => "reciprocity",
            Suite::Homotopy => "homotopy",
            Suite::Twists => "twists",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite {s:?}")))
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Relations | Suite::Structure => 1,
            Suite::Residues => 300,
            Suite::Transfers => 3,
            Suite::Reciprocity => 500,
            Suite::Homotopy => 100,
            Suite::Twists => 200,
        }
    }
}

/// Result of one suite run. Timing is kept out of the canonical body.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub suite: Suite,
    pub header: Value,
    pub params: Value,
    pub checks: Vec<Check>,
    pub wall_ms: u128,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn cases(&self) -> u64 {
        self.checks.iter().map(|c| c.cases).sum()
    }

    /// Deterministic body: identical configurations give identical values.
    pub fn canonical(&self) -> Value {
        json!({
            "suite": self.suite.name(),
            "config": self.header,
            "params": self.params,
            "checks": self.checks,
            "cases": self.cases(),
            "passed": self.passed(),
            "conventions": conventions_fingerprint(),
        })
    }

    pub fn with_timing(&self) -> Value {
        json!({ "report": self.canonical(), "timing": { "wall_ms": self.wall_ms as u64 } })
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "suite {} on {}: {}\n",
            self.suite.name(),
            self.header["field"].as_str().unwrap_or("?"),
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            s.push_str(&format!("  {:<28} {:>7} cases {:>5} failures\n", c.name, c.cases, c.failures));
            if let Some(w) = &c.witness {
                s.push_str(&format!("    witness: {w}\n"));
            }
        }
        s.push_str(&format!("  wall time {} ms\n", self.wall_ms));
        s
    }
}

/// Options beyond the run configuration.
#[derive(Clone, Copy, Debug, Default)]
pub struct AuditFlags {
    /// replace the canonical transfer by a wrong one (negative control)
    pub corrupt_oracle: bool,
}

/// Run `suite` as configured.
pub fn run_suite(suite: Suite, cfg: &RunConfig, flags: AuditFlags) -> Result<AuditReport> {
    cfg.validate()?;
    let start = Instant::now();
    let k = cfg.ground()?;
    let trials = cfg.trials.unwrap_or(suite.default_trials());
    let limits = cfg.limits();
    let (params, checks) = match suite {
        Suite::Relations => (json!({}), relation_checks(&k)?),
        Suite::Structure => (json!({}), structure_checks(&k)?),
        Suite::Residues => (json!({ "trials": trials }), residue_checks(&k, trials, cfg.seed)?),
        Suite::Transfers => (
            json!({ "trials": trials, "corrupt_oracle": flags.corrupt_oracle }),
            transfer_checks(&k, trials, cfg.seed, cfg.q_cap, &limits, flags.corrupt_oracle)?,
        ),
        Suite::Reciprocity => {
            let ns: Vec<i32> = cfg.n.map(|n| vec![n]).unwrap_or_else(|| vec![1, 2, 3]);
            (json!({ "trials": trials, "n": ns }), reciprocity_checks(&k, &ns, trials, cfg.seed, &limits)?)
        }
        Suite::Homotopy => {
            let n = cfg.n.unwrap_or(1);
            let r = run_homotopy_checks(&k, n, trials, cfg.seed, &limits)?;
            (json!({ "trials": trials, "n": n }), r.checks)
        }
        Suite::Twists => (json!({ "trials": trials }), twist_checks(&k, trials, cfg.seed)?),
    };
    Ok(AuditReport { suite, header: cfg.header(), params, checks, wall_ms: start.elapsed().as_millis() })
}

fn fin(k: &Arc<FiniteField>) -> FieldCtx {
    FieldCtx::Finite(k.clone())
}

fn el(c: u32) -> FieldElem {
    FieldElem::Finite(c)
}

fn term(coef: i64, eta: u32, entries: &[u32]) -> Term {
    Term { coef, eta, entries: entries.iter().map(|&c| el(c)).collect() }
}

fn nf(ctx: &FieldCtx, degree: i32, terms: Vec<Term>) -> Result<MwClass> {
    normalize_in(&MwExpression::new(ctx, terms)?, degree)
}

fn equal_witness(k: &FiniteField, ab: &[u32], lhs: &Result<MwClass>, rhs: &Result<MwClass>) -> Value {
    let show = |x: &Result<MwClass>| match x {
        Ok(c) => c.display(),
        Err(e) => e.to_string(),
    };
    json!({
        "entries": ab.iter().map(|&c| k.format(c)).collect::<Vec<_>>(),
        "lhs": show(lhs),
        "rhs": show(rhs),
    })
}

fn same(lhs: &Result<MwClass>, rhs: &Result<MwClass>) -> Result<bool> {
    match (lhs, rhs) {
        (Ok(a), Ok(b)) => a.equals(b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    }
}

pub const RELATION_CHECKS: [&str; 8] = [
    "steinberg",
    "logarithm",
    "eta_central",
    "hyperbolic",
    "bracket_one",
    "form_multiplicative",
    "square_form_trivial",
    "twisted_antisymmetry",
];

/// The defining relations and their first consequences, on all pairs of
/// units. Left sides go through the normal form of symbol expressions,
/// right sides through ring operations on classes.
pub fn relation_checks(k: &Arc<FiniteField>) -> Result<Vec<Check>> {
    let ctx = fin(k);
    let units: Vec<u32> = k.units().collect();
    let per_a: Vec<Vec<Check>> = units
        .par_iter()
        .map(|&a| {
            let mut c: Vec<Check> = RELATION_CHECKS.iter().map(|n| Check::new(n)).collect();
            let eta = MwClass::eta(&ctx);
            let one = MwClass::one(&ctx);
            let br = |x: u32| MwClass::bracket(&ctx, &el(x));
            let ua = MwClass::unit_form(&ctx, &el(a));
            for &b in &units {
                let (ba, bb) = (br(a), br(b));
                if a != 1 {
                    let lhs = nf(&ctx, 2, vec![term(1, 0, &[a, k.sub(1, a)])]);
                    let z = MwClass::zero(&ctx, 2);
                    c[0].record_result(same(&lhs, &z), || equal_witness(k, &[a, k.sub(1, a)], &lhs, &z));
                }
                let lhs = nf(&ctx, 1, vec![term(1, 0, &[k.mul(a, b)])]);
                let rhs = (|| ba.clone()?.add(&bb.clone()?)?.add(&eta.mul(&ba.clone()?)?.mul(&bb.clone()?)?))();
                c[1].record_result(same(&lhs, &rhs), || equal_witness(k, &[a, b], &lhs, &rhs));

                let lhs = (|| eta.mul(&ba.clone()?)?.mul(&bb.clone()?))();
                let rhs = (|| ba.clone()?.mul(&eta)?.mul(&bb.clone()?))();
                let sym = nf(&ctx, 1, vec![term(1, 1, &[a, b])]);
                let r = same(&lhs, &rhs).and_then(|x| Ok(x && same(&lhs, &sym)?));
                c[2].record_result(r, || equal_witness(k, &[a, b], &lhs, &rhs));

                let lhs = ua.clone().and_then(|u| u.mul(&MwClass::unit_form(&ctx, &el(b))?));
                let rhs = nf(&ctx, 0, vec![term(1, 0, &[]), term(1, 1, &[k.mul(a, b)])]);
                c[5].record_result(same(&lhs, &rhs), || equal_witness(k, &[a, b], &lhs, &rhs));

                let lhs = (|| ba.clone()?.mul(&bb.clone()?))();
                let rhs = (|| {
                    MwClass::unit_form(&ctx, &el(k.neg(1)))?.mul(&bb.clone()?.mul(&ba.clone()?)?)?.neg()
                })();
                c[7].record_result(same(&lhs, &rhs), || equal_witness(k, &[a, b], &lhs, &rhs));
            }
            let sq = MwClass::unit_form(&ctx, &el(k.mul(a, a)));
            let o = Ok(one.clone());
            c[6].record_result(same(&sq, &o), || equal_witness(k, &[a], &sq, &o));
            if a == 1 {
                let lhs = nf(&ctx, 1, vec![term(1, 0, &[1])]);
                let z = MwClass::zero(&ctx, 1);
                c[4].record_result(same(&lhs, &z), || equal_witness(k, &[1], &lhs, &z));
                let lhs = nf(&ctx, -1, vec![term(2, 1, &[]), term(1, 2, &[k.neg(1)])]);
                let z = MwClass::zero(&ctx, -1);
                c[3].record_result(same(&lhs, &z), || equal_witness(k, &[], &lhs, &z));
            }
            c
        })
        .collect();
    Ok(merge_checks(&RELATION_CHECKS, per_a))
}

pub const STRUCTURE_CHECKS: [&str; 8] = [
    "degree1_count",
    "degree1_closed",
    "degree2_zero",
    "degree3_zero",
    "pfister_hyperbolic",
    "steinberg_witness",
    "degree0_classified",
    "degree0_product",
];

/// Enumerate the normal-form images in degrees 0 to 3 and compare them with
/// the classical structure of `K^MW_*(F_q)`, re-derived by counting.
pub fn structure_checks(k: &Arc<FiniteField>) -> Result<Vec<Check>> {
    let ctx = fin(k);
    let mut c: Vec<Check> = STRUCTURE_CHECKS.iter().map(|n| Check::new(n)).collect();
    let units: Vec<u32> = k.units().collect();
    let q = k.size() as u64;

    let brackets: Vec<MwClass> = units.iter().map(|&a| MwClass::bracket(&ctx, &el(a))).collect::<Result<_>>()?;
    let mut image: Vec<MwClass> = Vec::new();
    for b in &brackets {
        let mut fresh = true;
        for x in &image {
            if x.equals(b)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            image.push(b.clone());
        }
    }
    c[0].record(image.len() == units.len(), || json!({ "distinct": image.len(), "expected": units.len() }));
    for (i, x) in brackets.iter().enumerate() {
        for (j, y) in brackets.iter().enumerate() {
            let s = x.add(y)?;
            let mut found = false;
            for z in &image {
                if z.equals(&s)? {
                    found = true;
                    break;
                }
            }
            c[1].record(found, || json!({ "a": k.format(units[i]), "b": k.format(units[j]) }));
        }
    }

    for &a in &units {
        for &b in &units {
            let r = nf(&ctx, 2, vec![term(1, 0, &[a, b])]).and_then(|x| x.is_zero());
            c[2].record_result(r, || json!({ "a": k.format(a), "b": k.format(b) }));
            for &d in &units {
                let r = nf(&ctx, 3, vec![term(1, 0, &[a, b, d])]).and_then(|x| x.is_zero());
                c[3].record_result(r, || json!({ "entries": [k.format(a), k.format(b), k.format(d)] }));
            }
        }
    }

    // I^2 = 0 in W(F_q): every 2-fold Pfister form <1,-a,-b,ab> is hyperbolic,
    // i.e. has q^3 + q^2 - q isotropic vectors.
    let ns = k.nonsquare();
    let all: Vec<u32> = (0..k.size()).collect();
    let squares: Vec<u32> = all.iter().map(|&x| k.mul(x, x)).collect();
    for a in [1, ns] {
        for b in [1, ns] {
            let coeffs = [1, k.neg(a), k.neg(b), k.mul(a, b)];
            let mut zeros = 0u64;
            for &x in &squares {
                for &y in &squares {
                    let s = k.add(x, k.mul(coeffs[1], y));
                    for &z in &squares {
                        let s = k.add(s, k.mul(coeffs[2], z));
                        for &w in &squares {
                            if k.add(s, k.mul(coeffs[3], w)) == 0 {
                                zeros += 1;
                            }
                        }
                    }
                }
            }
            let want = q * q * q + q * q - q;
            c[4].record(zeros == want, || json!({ "a": k.format(a), "b": k.format(b), "zeros": zeros, "expected": want }));
        }
    }

    // {g,g} = {g,-1} has order at most 2; a Steinberg pair (c, 1-c) of two
    // nonsquares gives an odd multiple of {g,g} equal to zero, so K_2 = 0.
    let is_sq = |x: u32| squares.contains(&x);
    let witness = units.iter().find(|&&x| x != 1 && !is_sq(x) && !is_sq(k.sub(1, x)));
    c[5].record(witness.is_some(), || json!({ "q": q }));

    // Degree 0: GW(F_q) is classified by rank and discriminant.
    let reps: Vec<u32> = {
        let mut v = vec![1, k.generator(), k.mul(k.generator(), k.generator()), k.neg(1)];
        v.sort();
        v.dedup();
        v
    };
    let mut sample: Vec<(MwClass, (i64, bool))> = Vec::new();
    for c1 in -1i64..=2 {
        for c2 in -1i64..=2 {
            for &a in &reps {
                for &b in &reps {
                    let mut terms = Vec::new();
                    for (cf, x) in [(c1, a), (c2, b)] {
                        if cf != 0 {
                            terms.push(term(cf, 0, &[]));
                            terms.push(term(cf, 1, &[x]));
                        }
                    }
                    let cls = if terms.is_empty() { MwClass::zero(&ctx, 0)? } else { nf(&ctx, 0, terms)? };
                    let det = k.mul(k.pow(a, c1), k.pow(b, c2));
                    sample.push((cls, (c1 + c2, is_sq(det))));
                }
            }
        }
    }
    let canonical = |r: i64, sq: bool| -> Result<MwClass> {
        let d = if sq { 1 } else { ns };
        let f = FormClass::one(&ctx).scale_int(r - 1).orth_sum(&FormClass::diag1(&ctx, el(d)))?;
        Ok(MwClass::from_form(&f))
    };
    let inv_json = |inv: (i64, bool)| json!({ "rank": inv.0, "disc_square": inv.1 });
    let distinct = canonical(1, true)?.equals(&canonical(1, false)?)?;
    c[6].record(!distinct, || json!({ "case": "<1> and <nonsquare> coincide" }));
    for (x, inv) in &sample {
        let r = canonical(inv.0, inv.1).and_then(|w| w.equals(x));
        c[6].record_result(r, || json!({ "class": x.display(), "invariants": inv_json(*inv) }));
    }
    let products: Vec<Check> = sample
        .par_iter()
        .map(|(x, (r1, s1))| {
            let mut chk = Check::new(STRUCTURE_CHECKS[7]);
            for (y, (r2, s2)) in &sample {
                // disc(xy) = d1^{r2} d2^{r1} modulo squares
                let sq = (*s1 || r2 % 2 == 0) == (*s2 || r1 % 2 == 0);
                let r = x.mul(y).and_then(|z| Ok(z.compatible()? && z.equals(&canonical(r1 * r2, sq)?)?));
                chk.record_result(r, || json!({ "x": x.display(), "y": y.display() }));
            }
            chk
        })
        .collect();
    for p in products {
        c[7].merge(p);
    }
    Ok(c)
}

pub const RESIDUE_CHECKS: [&str; 2] = ["uniformizer_bracket", "units_vanish"];

/// `∂^π([π]·m̃) = m` and `∂^π(m̃) = 0` for random places, uniformizers,
/// classes `m` over the residue field and random unit lifts `m̃`.
pub fn residue_checks(k: &Arc<FiniteField>, trials: usize, seed: u64) -> Result<Vec<Check>> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let r = RationalFunctionField::new(k);
    let per: Vec<Vec<Check>> =
        (0..trials as u64).into_par_iter().map(|i| residue_trial(&r, trial_seed(seed, i))).collect();
    Ok(merge_checks(&RESIDUE_CHECKS, per))
}

fn random_poly(rng: &mut impl Rng, k: &FiniteField, max_deg: usize) -> Poly {
    let d = rng.gen_range(0..=max_deg);
    Poly::from_coeffs((0..=d).map(|_| rng.gen_range(0..k.size())).collect())
}

fn residue_trial(r: &Arc<RationalFunctionField>, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<Check> = RESIDUE_CHECKS.iter().map(|n| Check::new(n)).collect();
    let k = r.base().clone();
    let rctx = FieldCtx::Rational(r.clone());
    let out = (|| -> Result<(bool, bool, Value)> {
        let g = random_place_poly(&mut rng, &k, 2);
        let pl = r.place(&g)?;
        let w = loop {
            let w = RatFn::from_poly(random_poly(&mut rng, &k, 1));
            if !w.is_zero() && pl.valuation(&w)? == 0 {
                break w;
            }
        };
        let pi = RatFn::from_poly(g.clone()).mul(&w, &k);
        let plp = pl.with_uniformizer(&pi)?;
        let l = fin(pl.residue_field());
        let n = rng.gen_range(0..=3);
        let expr = random_expression(&mut rng, &l, n - 1, &SampleShape::default())?;
        let beta = normalize_in(&expr, n - 1)?;
        let mut lifted = Vec::new();
        for t in expr.terms() {
            let entries = t
                .entries
                .iter()
                .map(|e| {
                    let h = random_poly(&mut rng, &k, 1).mul(&g, &k);
                    FieldElem::Rational(RatFn::from_poly(pl.lift(e.as_finite().unwrap()).add(&h, &k)))
                })
                .collect();
            lifted.push(Term { coef: t.coef, eta: t.eta, entries });
        }
        let m = nf(&rctx, n - 1, lifted)?;
        let bracket = MwClass::bracket(&rctx, &FieldElem::Rational(pi.clone()))?;
        let res = mw_residue(&bracket.mul(&m)?, &plp)?;
        let ok1 = res.equals(&beta)?;
        let ok2 = mw_residue(&m, &plp)?.is_zero()?;
        let wit = json!({
            "seed": seed,
            "place": pl.label(),
            "uniformizer": pi.display(&k),
            "class": beta.display(),
            "lift": m.display(),
            "residue": res.display(),
        });
        Ok((ok1, ok2, wit))
    })();
    match out {
        Ok((ok1, ok2, wit)) => {
            c[0].record(ok1, || wit.clone());
            c[1].record(ok2, || wit);
        }
        Err(e) => {
            for chk in &mut c {
                chk.record_result(Err(e.clone()), || json!({ "seed": seed }));
            }
        }
    }
    c
}

pub const TRANSFER_CHECKS: [&str; 3] = ["generator_independence", "cross_oracle", "base_change"];

/// Largest extension used by the cross-oracle and base-change checks.
const TRANSFER_SIZE_CAP: u32 = 1 << 16;
const CROSS_GENERATORS: usize = 1024;

fn generators_of(k: &FiniteField, l: &FiniteField, d: u32) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for x in l.units() {
        if l.min_poly(k, x)?.degree() == Some(d as usize) {
            out.push(x);
        }
    }
    Ok(out)
}

fn spread<T: Copy>(v: &[T], n: usize) -> Vec<T> {
    if v.len() <= n {
        return v.to_vec();
    }
    (0..n).map(|i| v[i * v.len() / n]).collect()
}

/// Generator independence of the geometric transfer (every generator of
/// the quadratic extension; the quartic extension directly and through the
/// quadratic one when it fits under `q_cap`), agreement with the canonical
/// transfer for extensions of degree at most 4, and the base-change square
/// for extensions of degree at most 3.
pub fn transfer_checks(
    k: &Arc<FiniteField>,
    trials: usize,
    seed: u64,
    q_cap: u32,
    limits: &Limits,
    corrupt: bool,
) -> Result<Vec<Check>> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let mut c: Vec<Check> = TRANSFER_CHECKS.iter().map(|n| Check::new(n)).collect();
    let oracle = |l: &Arc<FiniteField>, beta: &MwClass| -> Result<MwClass> {
        let t = canonical_transfer(l, k, beta, limits.degree_cap)?;
        if corrupt {
            t.scale_int(2)
        } else {
            Ok(t)
        }
    };

    // generator independence
    let l2 = FiniteField::extension_of_degree(k, 2, "s")?;
    let mut towers: Vec<(Arc<FiniteField>, Vec<Vec<TowerStep>>)> = Vec::new();
    let g2 = generators_of(k, &l2, 2)?;
    towers.push((l2.clone(), g2.iter().map(|&x| vec![TowerStep { field: l2.clone(), generator: x }]).collect()));
    if k.size().pow(4) <= q_cap {
        let l4 = FiniteField::extension_of_degree(&l2, 2, "u")?;
        let mut chains: Vec<Vec<TowerStep>> = generators_of(k, &l4, 4)?
            .into_iter()
            .map(|x| vec![TowerStep { field: l4.clone(), generator: x }])
            .collect();
        let top = generators_of(&l2, &l4, 2)?;
        for &x1 in &g2 {
            for &x2 in &top {
                chains.push(vec![
                    TowerStep { field: l2.clone(), generator: x1 },
                    TowerStep { field: l4.clone(), generator: x2 },
                ]);
            }
        }
        towers.push((l4, chains));
    }
    for (l, chains) in &towers {
        for beta in spanning_classes(l, &[0, 1])? {
            let reference = transfer_chain(k, &chains[0], &beta, *limits)?;
            let results: Vec<(usize, Result<bool>)> = chains
                .par_iter()
                .enumerate()
                .map(|(i, ch)| (i, transfer_chain(k, ch, &beta, *limits).and_then(|t| t.equals(&reference))))
                .collect();
            for (i, r) in results {
                c[0].record_result(r, || {
                    json!({
                        "extension": l.describe(),
                        "class": beta.display(),
                        "chain": chains[i].iter().map(|s| s.field.format(s.generator)).collect::<Vec<_>>(),
                        "reference": reference.display(),
                    })
                });
            }
        }
    }

    // geometric versus canonical transfer
    for d in 1..=4u32 {
        if k.size().pow(d) > TRANSFER_SIZE_CAP || d > limits.degree_cap {
            continue;
        }
        let l = FiniteField::extension_of_degree(k, d, "s")?;
        let gens = spread(&generators_of(k, &l, d)?, CROSS_GENERATORS);
        for beta in spanning_classes(&l, &[-1, 0, 1, 2])? {
            let can = oracle(&l, &beta)?;
            let results: Vec<(u32, Result<bool>)> = gens
                .par_iter()
                .map(|&x| (x, geometric_transfer(k, &l, x, &beta, *limits).and_then(|g| g.equals(&can))))
                .collect();
            for (x, r) in results {
                c[1].record_result(r, || {
                    json!({
                        "extension": l.describe(),
                        "generator": l.format(x),
                        "class": beta.display(),
                        "canonical": can.display(),
                    })
                });
            }
        }
    }

    // base change
    let per: Vec<Check> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut chk = Check::new(TRANSFER_CHECKS[2]);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
            for dl in 1..=3u32 {
                for dk in 1..=3u32 {
                    let lcm = dl * dk / gcd(dl, dk);
                    if k.size().pow(lcm) > TRANSFER_SIZE_CAP {
                        continue;
                    }
                    let r = (|| -> Result<bool> {
                        let l = FiniteField::extension_of_degree(k, dl, "s")?;
                        let kp = FiniteField::extension_of_degree(k, dk, "w")?;
                        let gens = generators_of(k, &l, dl)?;
                        let x = gens[rng.gen_range(0..gens.len())];
                        for beta in spanning_classes(&l, &[-1, 0, 1, 2])? {
                            if !base_change_transfer_check(k, &l, x, &kp, &beta, limits.degree_cap.max(3))? {
                                return Ok(false);
                            }
                        }
                        Ok(true)
                    })();
                    chk.record_result(r, || json!({ "seed": seed, "trial": i, "deg_l": dl, "deg_k_prime": dk }));
                }
            }
            chk
        })
        .collect();
    for p in per {
        c[2].merge(p);
    }
    Ok(c)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sum of transferred residues over `P^1` of random classes vanishes.
pub fn reciprocity_checks(k: &Arc<FiniteField>, ns: &[i32], trials: usize, seed: u64, limits: &Limits) -> Result<Vec<Check>> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let r = RationalFunctionField::new(k);
    let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, &r, 0)?;
    let ctx = FieldCtx::Rational(r.clone());
    let mut out = Vec::new();
    for &n in ns {
        let name = format!("reciprocity_n{n}");
        let per: Vec<Vec<Check>> = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let s = trial_seed(seed ^ (n as u64).wrapping_mul(0x100_0193), i);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let mut chk = Check::new(&name);
                let f = random_class(&mut rng, &ctx, n, &SampleShape::default());
                let shown = f.as_ref().map(|f| f.display()).unwrap_or_default();
                let r = f.and_then(|f| reciprocity_check(&f, &p1, limits));
                chk.record_result(r, || json!({ "seed": s, "class": shown }));
                vec![chk]
            })
            .collect();
        out.extend(merge_checks(&[name.as_str()], per));
    }
    Ok(out)
}

pub const TWIST_CHECKS: [&str; 3] = ["square_rebase", "rebase_covariance", "residue_section_covariance"];

/// Twisted-class laws over `F_q` and `F_q(t)`: rebasing by squares is
/// invisible, rebasing composes, and twisted residues do not depend on the
/// local section.
pub fn twist_checks(k: &Arc<FiniteField>, trials: usize, seed: u64) -> Result<Vec<Check>> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let r = RationalFunctionField::new(k);
    let per: Vec<Vec<Check>> =
        (0..trials as u64).into_par_iter().map(|i| twist_trial(&r, trial_seed(seed, i))).collect();
    Ok(merge_checks(&TWIST_CHECKS, per))
}

fn twist_trial(r: &Arc<RationalFunctionField>, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<Check> = TWIST_CHECKS.iter().map(|n| Check::new(n)).collect();
    let k = r.base().clone();
    let shape = SampleShape::default();
    for ctx in [fin(&k), FieldCtx::Rational(r.clone())] {
        let n = rng.gen_range(-1..=2);
        let m = random_class(&mut rng, &ctx, n, &shape);
        let s = random_unit(&mut rng, &ctx, &shape);
        let u = random_unit(&mut rng, &ctx, &shape);
        let v = random_unit(&mut rng, &ctx, &shape);
        let wit = |m: &Result<MwClass>| {
            json!({
                "seed": seed,
                "field": if ctx.is_finite() { k.spec_string() } else { format!("{}(t)", k.spec_string()) },
                "class": m.as_ref().map(|m| m.display()).unwrap_or_default(),
                "section": ctx.format(&s),
                "u": ctx.format(&u),
                "v": ctx.format(&v),
            })
        };
        let r1 = (|| -> Result<bool> {
            let m = m.clone()?;
            let tc = TwistedClass::new(m.clone(), "L", s.clone())?;
            let sq = ctx.mul(&u, &u)?;
            let moved = tc.rebase(&ctx.div(&s, &sq)?, &sq)?;
            Ok(moved.class().equals(&m)? && moved.equals(&tc)?)
        })();
        c[0].record_result(r1, || wit(&m));
        let r2 = (|| -> Result<bool> {
            let m = m.clone()?;
            let tc = TwistedClass::new(m.clone(), "L", s.clone())?;
            let uv = ctx.mul(&u, &v)?;
            let target = ctx.div(&s, &uv)?;
            let twice = tc.rebase(&ctx.div(&s, &u)?, &u)?.rebase(&target, &v)?;
            let once = tc.rebase(&target, &uv)?;
            let direct = MwClass::unit_form(&ctx, &uv)?.mul(&m)?;
            Ok(twice.class().equals(once.class())? && once.class().equals(&direct)?)
        })();
        c[1].record_result(r2, || wit(&m));
        if let FieldCtx::Rational(_) = ctx {
            let r3 = (|| -> Result<bool> {
                let m = m.clone()?;
                let g = random_place_poly(&mut rng, &k, 2);
                let pl = r.place(&g)?;
                let unit_at = |rng: &mut ChaCha8Rng| -> Result<FieldElem> {
                    loop {
                        let w = RatFn::from_poly(random_poly(rng, &k, 2));
                        if !w.is_zero() && pl.valuation(&w)? == 0 {
                            return Ok(FieldElem::Rational(w));
                        }
                    }
                };
                let s = unit_at(&mut rng)?;
                let u = unit_at(&mut rng)?;
                let tc = TwistedClass::new(m, "L", s.clone())?;
                let a = mw_residue_twisted(&tc, &pl)?;
                let b = mw_residue_twisted(&tc.rebase(&ctx.div(&s, &u)?, &u)?, &pl)?;
                a.equals(&b)
            })();
            c[2].record_result(r3, || wit(&m));
        }
    }
    c
}
