//! Run configuration shared by the command line and the audit suites.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::parse::parse_field_spec;
use crate::fields::{FieldCtx, FiniteField};
use crate::residues::{Limits, DEFAULT_DEGREE_CAP, DEFAULT_MAX_ROUNDS};

pub const DEFAULT_Q_CAP: u32 = 121;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Text,
}

/// Everything a run depends on. Identical configurations give identical
/// canonical reports.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// `p=5`, `q=9:s^2+1`, `q=9` or `F=F5(t)`
    pub field: String,
    pub n: Option<i32>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub q_cap: u32,
    pub degree_cap: u32,
    pub max_rounds: usize,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: "p=5".into(),
            n: None,
            seed: DEFAULT_SEED,
            trials: None,
            q_cap: DEFAULT_Q_CAP,
            degree_cap: DEFAULT_DEGREE_CAP,
            max_rounds: DEFAULT_MAX_ROUNDS,
            output: None,
            format: ReportFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn limits(&self) -> Limits {
        Limits { degree_cap: self.degree_cap, max_rounds: self.max_rounds }
    }

    pub fn field_ctx(&self) -> Result<FieldCtx> {
        parse_field_spec(&self.field, self.q_cap)
    }

    /// The finite ground field (the base of `F_q(t)` for function fields).
    pub fn ground(&self) -> Result<Arc<FiniteField>> {
        Ok(match self.field_ctx()? {
            FieldCtx::Finite(k) => k,
            FieldCtx::Rational(r) => r.base().clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if self.degree_cap == 0 || self.max_rounds == 0 {
            return Err(Error::Invalid("caps must be positive".into()));
        }
        self.field_ctx().map(|_| ())
    }

    /// Header recorded in every report.
    pub fn header(&self) -> Value {
        json!({
            "field": self.field,
            "seed": self.seed,
            "q_cap": self.q_cap,
            "degree_cap": self.degree_cap,
            "max_rounds": self.max_rounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.ground().unwrap().size(), 5);
        assert!(RunConfig { trials: Some(0), ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { field: "p=4".into(), ..RunConfig::default() }.validate().is_err());
        assert_eq!(RunConfig { field: "F=F7(t)".into(), ..RunConfig::default() }.ground().unwrap().size(), 7);
    }
}
