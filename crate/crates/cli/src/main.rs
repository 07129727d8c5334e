use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mwk_core::audit::{run_suite, AuditFlags, Suite};
use mwk_core::config::{ReportFormat, RunConfig, DEFAULT_Q_CAP, DEFAULT_SEED};
use mwk_core::fields::parse::{parse_elem, parse_field_spec};
use mwk_core::fields::{FieldCtx, FieldElem, FiniteField};
use mwk_core::gersten::{
    decide_coboundary, h1_p1_class, parse_place_key, CurveScheme, Decision, SchemeKind, SupportedFamily,
};
use mwk_core::mw::{normalize, normalize_in, parse_expression};
use mwk_core::report::{canonical_json, conventions_fingerprint};
use mwk_core::residues::{canonical_transfer, geometric_transfer, mw_residue, DEFAULT_DEGREE_CAP, DEFAULT_MAX_ROUNDS};

#[derive(Parser, Debug)]
#[command(name = "mwk", version, about = "Milnor-Witt K-theory of finite fields and curves over them")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// seed for all random sampling
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// largest allowed ground field size
    #[arg(long, global = true, default_value_t = DEFAULT_Q_CAP)]
    q_cap: u32,
    /// largest extension degree a transfer may use
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_CAP)]
    degree_cap: u32,
    /// bound on residue-correction rounds
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    /// also write the report to this file
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a symbol expression
    Normalize {
        /// field spec: p=7, q=9:s^2+1 or F=F5(t)
        #[arg(long)]
        field: String,
        #[arg(long)]
        expr: String,
        /// degree, needed only for the bare literal 0
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<i32>,
    },
    /// Residue of a class over F_q(t) at a place
    Residue {
        #[arg(long)]
        field: String,
        #[arg(long)]
        expr: String,
        /// monic irreducible polynomial in t, or inf
        #[arg(long)]
        place: String,
        /// uniformizer (defaults to the place polynomial, or 1/t at inf)
        #[arg(long)]
        uniformizer: Option<String>,
    },
    /// Transfer of a class from an extension down to its prime field
    Transfer {
        /// extension field, e.g. q=9:s^2+1
        #[arg(long)]
        field: String,
        /// class over the extension, e.g. '[s]'
        #[arg(long)]
        class: String,
        /// generator used by the geometric route
        #[arg(long, default_value = "s")]
        generator: String,
    },
    /// H^1 decision for a degree-one Gersten cochain on a curve
    Cohomology {
        /// ground field, e.g. p=5
        #[arg(long, default_value = "p=5")]
        field: String,
        /// A1, P1 or Gm
        #[arg(long)]
        scheme: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i32,
        /// twist d of O(d) on P1
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i32,
        /// family JSON, or @path to read it from a file
        #[arg(long)]
        family: String,
    },
    /// Run an audit suite
    Audit {
        /// relations, structure, residues, transfers, reciprocity, homotopy or twists
        #[arg(long)]
        suite: String,
        /// ground field size
        #[arg(long, conflicts_with = "field")]
        q: Option<u32>,
        #[arg(long)]
        field: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i32>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, hide = true)]
        corrupt_oracle: bool,
    },
}

/// Failure classes mapped to exit codes.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn config(common: &Common, field: &str) -> RunConfig {
    RunConfig {
        field: field.to_string(),
        seed: common.seed,
        q_cap: common.q_cap,
        degree_cap: common.degree_cap,
        max_rounds: common.max_rounds,
        output: common.output.clone(),
        format: match common.format {
            Format::Json => ReportFormat::Json,
            Format::Text => ReportFormat::Text,
        },
        ..RunConfig::default()
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let common = &cli.common;
    match &cli.command {
        Command::Normalize { field, expr, degree } => {
            let cfg = config(common, field);
            let ctx = cfg.field_ctx()?;
            let e = parse_expression(&ctx, expr)?;
            let cls = match degree {
                Some(d) => normalize_in(&e, *d)?,
                None => normalize(&e)?,
            };
            let body = json!({
                "command": "normalize",
                "field": field,
                "expression": expr,
                "class": cls.to_json()?,
                "display": cls.display(),
                "is_zero": cls.is_zero()?,
                "conventions": conventions_fingerprint(),
            });
            let text = format!("{}\n", cls.display());
            emit(&cfg, &body, &text)?;
            Ok(Outcome::Pass)
        }
        Command::Residue { field, expr, place, uniformizer } => {
            let cfg = config(common, field);
            let ctx = cfg.field_ctx()?;
            let r = ctx.as_rational().ok_or_else(|| anyhow!("residues need a function field F=Fq(t)"))?;
            let p1 = CurveScheme::over(SchemeKind::ProjectiveLine, r, 0)?;
            let mut pl = p1.place(&parse_place_key(&p1, place)?)?;
            if let Some(u) = uniformizer {
                let pi = parse_elem(&ctx, u)?;
                let pi = pi.as_rational().ok_or_else(|| anyhow!("uniformizer must lie in F(t)"))?.clone();
                pl = pl.with_uniformizer(&pi)?;
            }
            let cls = normalize(&parse_expression(&ctx, expr)?)?;
            let res = mw_residue(&cls, &pl)?;
            let body = json!({
                "command": "residue",
                "field": field,
                "expression": expr,
                "place": pl.label(),
                "uniformizer": pl.uniformizer_label(),
                "residue_field": pl.residue_field().spec_string(),
                "residue": res.to_json()?,
                "display": res.display(),
                "conventions": conventions_fingerprint(),
            });
            let text = format!("{} at {} (uniformizer {})\n", res.display(), pl.label(), pl.uniformizer_label());
            emit(&cfg, &body, &text)?;
            Ok(Outcome::Pass)
        }
        Command::Transfer { field, class, generator } => {
            let cfg = config(common, field);
            let lctx = cfg.field_ctx()?;
            let l = lctx.as_finite().ok_or_else(|| anyhow!("transfers need a finite field"))?.clone();
            let mut k = l.clone();
            while let Some(b) = k.base() {
                k = b.clone();
            }
            let beta = normalize(&parse_expression(&lctx, class)?)?;
            let x = match parse_elem(&lctx, generator)? {
                FieldElem::Finite(x) => x,
                _ => bail!("generator must be an element of the extension"),
            };
            let can = canonical_transfer(&l, &k, &beta, cfg.degree_cap)?;
            let geo = geometric_transfer(&k, &l, x, &beta, cfg.limits())?;
            let agree = can.equals(&geo)?;
            let body = json!({
                "command": "transfer",
                "extension": l.spec_string(),
                "base": k.spec_string(),
                "class": beta.to_json()?,
                "generator": l.format(x),
                "canonical": can.to_json()?,
                "geometric": geo.to_json()?,
                "agree": agree,
                "conventions": conventions_fingerprint(),
            });
            let text = format!(
                "canonical {}\ngeometric {}\n{}\n",
                can.display(),
                geo.display(),
                if agree { "agree" } else { "DISAGREE" }
            );
            emit(&cfg, &body, &text)?;
            Ok(if agree { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Cohomology { field, scheme, n, twist, family } => {
            let cfg = config(common, field);
            let k = ground(&cfg)?;
            let kind = SchemeKind::parse(scheme)?;
            let x = CurveScheme::new(kind, &k, *twist)?;
            let text = match family.strip_prefix('@') {
                Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
                None => family.clone(),
            };
            let v: Value = serde_json::from_str(&text).context("family is not valid JSON")?;
            check_family_header(&v, kind, *n)?;
            let fam = SupportedFamily::from_json(&x, *n, &v)?;
            let h1 = if kind == SchemeKind::ProjectiveLine {
                Some(h1_p1_class(&fam, &cfg.limits())?)
            } else {
                None
            };
            let (decision, shown) = match decide_coboundary(&fam, &cfg.limits())? {
                Decision::Preimage(f) => (json!({ "preimage": f.to_json()? }), format!("coboundary of {}", f.display())),
                Decision::Obstruction(o) => (json!({ "obstruction": o.to_json()? }), format!("obstruction {}", o.display())),
            };
            let body = json!({
                "command": "cohomology",
                "field": k.spec_string(),
                "scheme": kind.name(),
                "twist": twist,
                "family": fam.to_json()?,
                "h1": h1.as_ref().map(|h| h.to_json()).transpose()?,
                "decision": decision,
                "conventions": conventions_fingerprint(),
            });
            emit(&cfg, &body, &format!("{shown}\n"))?;
            Ok(Outcome::Pass)
        }
        Command::Audit { suite, q, field, n, trials, corrupt_oracle } => {
            let suite = Suite::parse(suite)?;
            let field = match (q, field) {
                (Some(q), _) => format!("q={q}"),
                (None, Some(f)) => f.clone(),
                (None, None) => "p=5".into(),
            };
            let mut cfg = config(common, &field);
            cfg.n = *n;
            cfg.trials = *trials;
            let report = run_suite(suite, &cfg, AuditFlags { corrupt_oracle: *corrupt_oracle })?;
            emit(&cfg, &report.canonical(), &report.text())?;
            eprintln!("{}", serde_json::to_string(&json!({ "timing": { "wall_ms": report.wall_ms as u64 } }))?);
            Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn ground(cfg: &RunConfig) -> Result<std::sync::Arc<FiniteField>> {
    Ok(match parse_field_spec(&cfg.field, cfg.q_cap)? {
        FieldCtx::Finite(k) => k,
        FieldCtx::Rational(r) => r.base().clone(),
    })
}

/// The optional `scheme` and `n` keys of a family must match the flags.
fn check_family_header(v: &Value, kind: SchemeKind, n: i32) -> Result<()> {
    if let Some(s) = v.get("scheme").and_then(|s| s.as_str()) {
        if SchemeKind::parse(s)? != kind {
            bail!("family is for scheme {s}, not {}", kind.name());
        }
    }
    if let Some(m) = v.get("n").and_then(|m| m.as_i64()) {
        if m != n as i64 {
            bail!("family has n = {m}, not {n}");
        }
    }
    Ok(())
}

fn emit(cfg: &RunConfig, body: &Value, text: &str) -> Result<()> {
    let rendered = match cfg.format {
        ReportFormat::Json => canonical_json(body),
        ReportFormat::Text => text.to_string(),
    };
    print!("{rendered}");
    if let Some(path) = &cfg.output {
        fs::write(path, canonical_json(body)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
