//! Report building blocks: counted checks with witnesses, deterministic
//! JSON rendering and the conventions fingerprint.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// The sign, uniformizer and twist conventions results depend on. Any
/// change here changes the fingerprint stamped into every report.
pub const CONVENTIONS: &str = "\
conventions v1
generator map: [a] -> ({a}, <a> - 1); eta -> (0, <1>) one degree lower
tame symbol: d{a,b} = (-1)^{v(a)v(b)} * b^{v(a)} / a^{v(b)} reduced
second residue: <pi^k u> -> <u> for k odd, 0 for k even
uniformizers: g at finite places (monic irreducible g), 1/t at infinity
finite-place sections: residues at x are tagged with g'(x); value at section 1 is <g'(x)> * d^g_x
infinity section: -1; value at section 1 is <-1> * d^{1/t}_inf
geometric transfer: -<-1> * d^{1/t}_inf(f) where d^g_x f = <g'(x)> beta and f has no other finite residues
canonical transfer: norm on Milnor part, Scharlau transfer along the trace on the form part
O(d) on P1: e0 = t^d e_inf; residue at infinity of m (x) e0 is d_inf(<t^d> m) (x) e_inf
function-field Witt key: first residue at infinity (1/t) plus second residues at finite places
";

/// SHA-256 of [`CONVENTIONS`], hex encoded.
pub fn conventions_fingerprint() -> String {
    hex::encode(Sha256::digest(CONVENTIONS.as_bytes()))
}

/// A named assertion evaluated on many cases.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    /// first failing case
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(name: &str) -> Check {
        Check { name: name.to_string(), cases: 0, failures: 0, witness: None }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    /// Record an outcome that may have errored; errors count as failures.
    pub fn record_result(&mut self, r: crate::Result<bool>, witness: impl FnOnce() -> Value) {
        match r {
            Ok(ok) => self.record(ok, witness),
            Err(e) => {
                let mut w = witness();
                if let Value::Object(m) = &mut w {
                    m.insert("error".into(), Value::String(e.to_string()));
                }
                self.record(false, || w)
            }
        }
    }

    pub fn merge(&mut self, o: Check) {
        self.cases += o.cases;
        self.failures += o.failures;
        if self.witness.is_none() {
            self.witness = o.witness;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Merge per-trial checks (in trial order) into one list of named checks.
pub fn merge_checks(names: &[&str], per_trial: Vec<Vec<Check>>) -> Vec<Check> {
    let mut out: Vec<Check> = names.iter().map(|n| Check::new(n)).collect();
    for trial in per_trial {
        for c in trial {
            if let Some(slot) = out.iter_mut().find(|o| o.name == c.name) {
                slot.merge(c);
            }
        }
    }
    out
}

/// Render JSON with object keys sorted, pretty printed.
pub fn canonical_json(v: &Value) -> String {
    let sorted = sort_keys(v);
    let mut s = serde_json::to_string_pretty(&sorted).expect("serializable");
    s.push('\n');
    s
}

fn sort_keys(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = serde_json::Map::new();
            for k in keys {
                out.insert(k.clone(), sort_keys(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}
