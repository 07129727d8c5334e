//! Acceptance criteria. Each test prints one PASS/FAIL line (bypassing the
//! test harness capture) and then asserts.

use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use mwk_core::audit::{
    relation_checks, residue_checks, run_suite, structure_checks, transfer_checks, twist_checks, AuditFlags, Suite,
};
use mwk_core::config::RunConfig;
use mwk_core::fields::FiniteField;
use mwk_core::gersten::run_homotopy_checks;
use mwk_core::report::{canonical_json, Check};
use mwk_core::residues::Limits;

const SEED: u64 = 20_240_601;
const Q_CAP: u32 = 121;

fn field(q: u32) -> Arc<FiniteField> {
    FiniteField::of_order(q).unwrap()
}

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "acceptance {id:>2} {name:<34} {} ({:.2} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn summarize(checks: &[Check]) -> (bool, u64, Option<String>) {
    let cases = checks.iter().map(|c| c.cases).sum();
    let failed = checks.iter().find(|c| !c.passed()).map(|c| {
        format!("{}: {} failures, witness {}", c.name, c.failures, c.witness.clone().unwrap_or_default())
    });
    (failed.is_none(), cases, failed)
}

fn finish(id: u32, name: &str, start: Instant, budget: Option<Duration>, checks: Vec<Check>) {
    let elapsed = start.elapsed();
    let (ok, cases, failed) = summarize(&checks);
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let detail = match (&failed, in_time) {
        (Some(f), _) => f.clone(),
        (None, false) => format!("{cases} cases, over the {:?} budget", budget.unwrap()),
        (None, true) => format!("{cases} cases"),
    };
    report(id, name, ok && in_time, elapsed, &detail);
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time budget: {elapsed:?}");
}

fn transfer_run(q: u32) -> &'static Vec<Check> {
    static F3: OnceLock<Vec<Check>> = OnceLock::new();
    static F5: OnceLock<Vec<Check>> = OnceLock::new();
    let cell = if q == 3 { &F3 } else { &F5 };
    cell.get_or_init(|| transfer_checks(&field(q), 3, SEED, Q_CAP, &Limits::default(), false).unwrap())
}

fn transfer_criterion(id: u32, name: &str, check: &str, budget: Option<Duration>) {
    let start = Instant::now();
    let mut out = Vec::new();
    for q in [3, 5] {
        let c = transfer_run(q).iter().find(|c| c.name == check).unwrap().clone();
        assert!(c.cases > 0, "no {check} cases over F{q}");
        out.push(Check { name: format!("{}_f{q}", c.name), ..c });
    }
    finish(id, name, start, budget, out);
}

#[test]
fn criterion_01_defining_relations() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7, 9, 11] {
        all.extend(relation_checks(&field(q)).unwrap());
    }
    finish(1, "defining relations", start, Some(Duration::from_secs(30)), all);
}

#[test]
fn criterion_02_structure_enumeration() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7, 9, 11] {
        all.extend(structure_checks(&field(q)).unwrap());
    }
    finish(2, "structure enumeration", start, Some(Duration::from_secs(60)), all);
}

#[test]
fn criterion_03_residue_characterization() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7, 9, 11] {
        let checks = residue_checks(&field(q), 300, SEED).unwrap();
        assert!(checks.iter().all(|c| c.cases == 300));
        all.extend(checks);
    }
    finish(3, "residue characterization", start, None, all);
}

#[test]
fn criterion_04_transfer_well_definedness() {
    // F9/F3 and F81/F3 (directly and through F9) over F3, F25/F5 over F5
    assert!(transfer_run(3).iter().find(|c| c.name == "generator_independence").unwrap().cases > 1000);
    transfer_criterion(4, "transfer well-definedness", "generator_independence", Some(Duration::from_secs(120)));
}

#[test]
fn criterion_05_cross_oracle_transfer() {
    transfer_criterion(5, "cross-oracle transfer agreement", "cross_oracle", None);
}

#[test]
fn criterion_06_reciprocity() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7] {
        let checks = mwk_core::audit::reciprocity_checks(&field(q), &[1, 2, 3], 500, SEED, &Limits::default()).unwrap();
        all.extend(checks);
    }
    finish(6, "reciprocity", start, Some(Duration::from_secs(300)), all);
}

#[test]
fn criterion_07_homotopy_invariance() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7] {
        for n in 0..=2 {
            let r = run_homotopy_checks(&field(q), n, 100, SEED, &Limits::default()).unwrap();
            assert_eq!(r.checks.len(), 4);
            all.extend(r.checks);
        }
    }
    finish(7, "homotopy invariance", start, None, all);
}

#[test]
fn criterion_08_base_change_square() {
    transfer_criterion(8, "base-change square", "base_change", None);
}

#[test]
fn criterion_09_twist_laws() {
    let start = Instant::now();
    let mut all = Vec::new();
    for q in [3, 5, 7] {
        all.extend(twist_checks(&field(q), 200, SEED).unwrap());
    }
    finish(9, "twist laws", start, None, all);
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let mut check = Check::new("byte_identical_reports");
    for (suite, field, n, trials) in [
        (Suite::Homotopy, "p=5", Some(1), 20),
        (Suite::Reciprocity, "p=3", Some(2), 50),
        (Suite::Residues, "q=9", None, 50),
        (Suite::Twists, "p=7", None, 50),
        (Suite::Transfers, "p=3", None, 1),
    ] {
        let cfg = RunConfig { field: field.into(), n, trials: Some(trials), seed: SEED, ..RunConfig::default() };
        let a = canonical_json(&run_suite(suite, &cfg, AuditFlags::default()).unwrap().canonical());
        let b = canonical_json(&run_suite(suite, &cfg, AuditFlags::default()).unwrap().canonical());
        check.record(a == b, || serde_json::json!({ "suite": suite.name(), "field": field }));
    }
    finish(10, "determinism", start, None, vec![check]);
}
