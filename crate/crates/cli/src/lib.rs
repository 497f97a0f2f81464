//! `markov-embed`: read Markov matrices, decide embeddability and print
//! machine-readable verdicts.
//!
//! Exit codes: 0 embeddable or success, 1 not embeddable, 2 undecided,
//! 64 malformed input. Floats are printed with 17 significant digits.

mod doc;

pub use doc::{fmt_f64, parse_matrix, to_json, InputError, MatrixDocument};

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use embed_classifier::{classify, necessary_checks, CaseTag, NecessaryReport};
use embed_core::{decide, EmbeddingResult, Verdict};
use embed_inhom::{evolve, g_embed_d3, liouville_det, peano_baker, GReport, GVerdict, Schedule};
use embed_linalg::{mat_exp, principal_log, Mat, Tolerances};
use embed_models::{
    embed_equal_input, embed_k3st, embed_tn, equal_input_matrix, k3st_matrix, model_recognize, tn_matrix,
    EqualInputParams, K3STParams, ModelTag, TNParams,
};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_EMBEDDABLE: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_INPUT: i32 = 64;

/// The JSON schema of the documents printed by `classify`, `embed` and `model`.
pub const VERDICT_SCHEMA: &str = include_str!("../schema/verdict.schema.json");
/// The JSON schema of matrix documents, read by every command and printed
/// by `exp`, `log` and `simulate`.
pub const MATRIX_SCHEMA: &str = include_str!("../schema/matrix.schema.json");

#[derive(Debug, Parser)]
#[command(name = "markov-embed", version, about = "Decide whether a Markov matrix is the exponential of a rate matrix")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    /// Human-readable table instead of JSON.
    #[arg(long, global = true, conflicts_with = "json", help_heading = "Output")]
    pub table: bool,
    /// JSON output (the default).
    #[arg(long, global = true, help_heading = "Output")]
    pub json: bool,
    /// Add wall-clock timing to verdict documents.
    #[arg(long, global = true, help_heading = "Output")]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Tolerance overrides; they take precedence over a document's own.
#[derive(Debug, Args, Default)]
#[command(next_help_heading = "Tolerances")]
pub struct TolArgs {
    /// Relative radius for merging eigenvalues [default 1e-8].
    #[arg(long, global = true, value_name = "X")]
    pub tol_spec_cluster: Option<f64>,
    /// Slack for negative rates and zero entries [default 1e-10].
    #[arg(long, global = true, value_name = "X")]
    pub tol_nonneg: Option<f64>,
    /// Row-sum slack [default 1e-10].
    #[arg(long, global = true, value_name = "X")]
    pub tol_rowsum: Option<f64>,
    /// Bound on ‖exp(Q) − M‖∞ for a returned generator [default 1e-8].
    #[arg(long, global = true, value_name = "X")]
    pub tol_residual: Option<f64>,
    /// Relative singular-value cutoff for ranks [default 1e-9].
    #[arg(long, global = true, value_name = "X")]
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jordan-structure case and necessary conditions.
    Classify { input: Option<PathBuf> },
    /// Decide embeddability and list verified generators.
    Embed {
        input: Option<PathBuf>,
        /// List every generator found, not just the first.
        #[arg(long)]
        all_branches: bool,
    },
    /// Matrix exponential.
    Exp { input: Option<PathBuf> },
    /// Principal matrix logarithm.
    Log { input: Option<PathBuf> },
    /// Build a substitution-model matrix from parameters and decide it.
    Model {
        kind: ModelKind,
        /// Equal-input rates c₁,…,c_d; for `jc` the summatory parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Vec<f64>,
        /// Dimension for `jc` (default 4).
        #[arg(long)]
        dim: Option<usize>,
        /// Tamura–Nei base rates a₁,…,a₄.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        /// Rate multiplier within the first pair (states 0, 1).
        #[arg(long, allow_hyphen_values = true)]
        kappa1: Option<f64>,
        /// Rate multiplier within the second pair (states 2, 3).
        #[arg(long, allow_hyphen_values = true)]
        kappa2: Option<f64>,
        /// Kimura rates x, y, z (`k2p` uses x and y, with z = y).
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
    },
    /// Evolve a generator schedule (JSON list of {"Q", "duration"}).
    Simulate {
        schedule: Option<PathBuf>,
        /// End time; defaults to the schedule's span.
        #[arg(long)]
        t: Option<f64>,
        /// Sum the Peano–Baker series.
        #[arg(long, conflicts_with = "product")]
        pbs: bool,
        /// Multiply segment exponentials (the default).
        #[arg(long)]
        product: bool,
        /// Compare det M with the integrated trace.
        #[arg(long)]
        det_check: bool,
    },
    /// Three-state g-embeddability (time-dependent generators).
    Gcheck { input: Option<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    EqualInput,
    Tn,
    K3st,
    Jc,
    K2p,
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl RunOutput {
    fn input_error(e: impl std::fmt::Display) -> Self {
        RunOutput { stdout: String::new(), stderr: format!("error: {e}\n"), code: EXIT_INPUT }
    }
}

/// Parse `args` (including the program name) and run, reading `stdin`
/// when no input file is given.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdin),
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                RunOutput { stdout: text, stderr: String::new(), code }
            } else {
                RunOutput { stdout: String::new(), stderr: text, code }
            }
        }
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<String, InputError> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| InputError::new(None, format!("{}: {e}", p.display())))?
        }
        _ => {
            stdin.read_to_string(&mut text).map_err(|e| InputError::new(None, format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn tolerances(args: &TolArgs, doc: Option<&MatrixDocument>) -> Result<Tolerances, InputError> {
    let mut t = doc.and_then(|d| d.tolerances).unwrap_or_default();
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut t.spec_cluster, args.tol_spec_cluster);
    set(&mut t.nonneg, args.tol_nonneg);
    set(&mut t.rowsum, args.tol_rowsum);
    set(&mut t.residual, args.tol_residual);
    set(&mut t.rank, args.tol_rank);
    if !t.is_valid() {
        return Err(InputError::new(None, "tolerances must be finite and positive"));
    }
    Ok(t)
}

fn load(cli: &Cli, path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<(MatrixDocument, Mat, Tolerances), InputError> {
    let doc = parse_matrix(&read_input(path, stdin)?)?;
    let m = doc.to_mat()?;
    let tol = tolerances(&cli.tol, Some(&doc))?;
    Ok((doc, m, tol))
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::Embeddable => EXIT_OK,
        Verdict::NotEmbeddable => EXIT_NOT_EMBEDDABLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn verdict_value(input: Value, case: Option<&CaseTag>, r: &EmbeddingResult, all: bool, elapsed: Option<f64>) -> Value {
    let gens: Vec<_> = r.generators.iter().take(if all { usize::MAX } else { 1 }).collect();
    let mut v = json!({
        "input": input,
        "case_tag": case,
        "pattern": r.pattern,
        "verdict": r.verdict,
        "reason": r.reason,
        "uniqueness": r.uniqueness,
        "generator_count": r.generators.len(),
        "generators": gens,
    });
    if let Some(ms) = elapsed {
        v["timing"] = json!({ "elapsed_ms": ms });
    }
    v
}

fn emit(cli: &Cli, value: &Value, table: impl FnOnce() -> String, code: i32) -> RunOutput {
    let stdout = if cli.table { table() } else { to_json(value) };
    RunOutput { stdout, stderr: String::new(), code }
}

fn matrix_table(m: &Mat, indent: &str) -> String {
    m.rows()
        .iter()
        .map(|r| format!("{indent}{}\n", r.iter().map(|v| format!("{:>24}", fmt_f64(*v))).collect::<Vec<_>>().join(" ")))
        .collect()
}

fn result_table(case: Option<&CaseTag>, r: &EmbeddingResult, all: bool) -> String {
    let mut s = String::new();
    let pattern = r.pattern.or(case.map(|c| c.pattern));
    s += &format!("pattern     {}\n", pattern.map_or("-".to_string(), |p| p.to_string()));
    s += &format!("verdict     {:?}\n", r.verdict);
    if let Some(reason) = r.reason {
        s += &format!("reason      {}\n", serde_json::to_value(reason).unwrap_or_default().as_str().unwrap_or("?"));
    }
    s += &format!("uniqueness  {:?}\n", r.uniqueness);
    for (k, g) in r.generators.iter().take(if all { usize::MAX } else { 1 }).enumerate() {
        let how = serde_json::to_value(g.construction).unwrap_or_default();
        s += &format!(
            "generator {k}  branch {}  {}  residual {}\n",
            g.branch,
            how.as_str().unwrap_or("?"),
            fmt_f64(g.residual)
        );
        s += &matrix_table(&g.matrix, "  ");
    }
    s
}

pub fn execute(cli: &Cli, stdin: &mut dyn Read) -> RunOutput {
    match execute_inner(cli, stdin) {
        Ok(out) => out,
        Err(e) => RunOutput::input_error(e),
    }
}

fn execute_inner(cli: &Cli, stdin: &mut dyn Read) -> Result<RunOutput, InputError> {
    let start = Instant::now();
    let elapsed = || cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(match &cli.command {
        Command::Classify { input } => {
            let (doc, m, tol) = load(cli, input, stdin)?;
            let necessary: NecessaryReport = necessary_checks(&m, &tol);
            match classify(&m, &tol) {
                Ok(tag) => {
                    let v = json!({ "input": doc, "case_tag": tag, "pattern": tag.pattern, "necessary": necessary });
                    emit(cli, &v, || format!("pattern     {}\nnecessary   {}\n", tag.pattern, necessary.all_ok()), EXIT_OK)
                }
                Err(e) => {
                    let v = json!({ "input": doc, "case_tag": null, "necessary": necessary, "error": e.to_string() });
                    emit(cli, &v, || format!("pattern     -\nerror       {e}\n"), EXIT_UNDECIDED)
                }
            }
        }
        Command::Embed { input, all_branches } => {
            let (doc, m, tol) = load(cli, input, stdin)?;
            let r = decide(&m, &tol);
            let case = classify(&m, &tol).ok();
            let v = verdict_value(serde_json::to_value(&doc).unwrap_or_default(), case.as_ref(), &r, *all_branches, elapsed());
            emit(cli, &v, || result_table(case.as_ref(), &r, *all_branches), exit_for(r.verdict))
        }
        Command::Exp { input } => {
            let (doc, m, _) = load(cli, input, stdin)?;
            let out = MatrixDocument::from_mat(&mat_exp(&m), doc.label.map(|l| format!("exp({l})")));
            emit(cli, &serde_json::to_value(&out).unwrap_or_default(), || matrix_table(&mat_exp(&m), ""), EXIT_OK)
        }
        Command::Log { input } => {
            let (doc, m, _) = load(cli, input, stdin)?;
            match principal_log(&m) {
                Ok(l) => {
                    let out = MatrixDocument::from_mat(&l, doc.label.map(|s| format!("log({s})")));
                    emit(cli, &serde_json::to_value(&out).unwrap_or_default(), || matrix_table(&l, ""), EXIT_OK)
                }
                Err(e) => RunOutput {
                    stdout: String::new(),
                    stderr: format!("no principal logarithm: {e}\n"),
                    code: EXIT_NOT_EMBEDDABLE,
                },
            }
        }
        Command::Model { kind, c, dim, a, kappa1, kappa2, x, y, z } => {
            let tol = tolerances(&cli.tol, None)?;
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| InputError::new(None, format!("--{name} is required")));
            let bad = |e: embed_models::ModelError| InputError::new(None, e.to_string());
            let (params, m, r) = match kind {
                ModelKind::EqualInput | ModelKind::Jc => {
                    let p = if *kind == ModelKind::Jc {
                        let [cs] = c.as_slice() else {
                            return Err(InputError::new(None, "jc takes one summatory parameter --c"));
                        };
                        EqualInputParams::constant(dim.unwrap_or(4), *cs).map_err(bad)?
                    } else {
                        EqualInputParams::new(c.clone()).map_err(bad)?
                    };
                    let m = equal_input_matrix(&p).map_err(bad)?;
                    let r = embed_equal_input(&p, p.dim(), &tol).map_err(bad)?;
                    (serde_json::to_value(&p).unwrap_or_default(), m, r)
                }
                ModelKind::Tn => {
                    let a: [f64; 4] =
                        a.as_slice().try_into().map_err(|_| InputError::new(None, "tn takes four base rates --a"))?;
                    let p = TNParams { a, kappa1: need(*kappa1, "kappa1")?, kappa2: need(*kappa2, "kappa2")? };
                    let m = tn_matrix(&p).map_err(bad)?;
                    (serde_json::to_value(p).unwrap_or_default(), m, embed_tn(&p, &tol).map_err(bad)?)
                }
                ModelKind::K3st | ModelKind::K2p => {
                    let yv = need(*y, "y")?;
                    let zv = if *kind == ModelKind::K2p { yv } else { need(*z, "z")? };
                    let p = K3STParams { x: need(*x, "x")?, y: yv, z: zv };
                    let m = k3st_matrix(&p).map_err(bad)?;
                    (serde_json::to_value(p).unwrap_or_default(), m, embed_k3st(&p, &tol).map_err(bad)?)
                }
            };
            let tags: BTreeSet<ModelTag> = model_recognize(&m, &tol);
            let kind_name = kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            let input = json!({
                "model": kind_name,
                "params": params,
                "matrix": MatrixDocument::from_mat(&m, None),
                "classes": tags,
            });
            let case = classify(&m, &tol).ok();
            let v = verdict_value(input, case.as_ref(), &r, true, elapsed());
            emit(cli, &v, || result_table(case.as_ref(), &r, true), exit_for(r.verdict))
        }
        Command::Simulate { schedule, t, pbs, product: _, det_check } => {
            let text = read_input(schedule, stdin)?;
            let s: Schedule = serde_json::from_str(&text).map_err(doc::json_error)?;
            s.validate().map_err(|e| InputError::new(None, e.to_string()))?;
            let t = t.unwrap_or_else(|| s.span());
            let bad = |e: embed_inhom::InhomError| InputError::new(None, e.to_string());
            let (m, method) = if *pbs {
                (peano_baker(&s, t, 200, 1e-12).map_err(bad)?, "peano_baker")
            } else {
                if (t - s.span()).abs() > 1e-12 * s.span().max(1.0) {
                    return Err(InputError::new(None, "--product evolves the full schedule; use --pbs for an earlier --t"));
                }
                (evolve(&s), "product")
            };
            let mut v = serde_json::to_value(MatrixDocument::from_mat(&m, Some(format!("simulate t={}", fmt_f64(t)))))
                .unwrap_or_default();
            v["method"] = json!(method);
            if *det_check {
                let w = liouville_det(&s, t).map_err(bad)?;
                let det = m.det();
                v["determinant"] = json!({
                    "det": det,
                    "liouville": w,
                    "abs_diff": (det - w).abs(),
                    "in_unit_interval": w > 0.0 && w <= 1.0,
                });
            }
            emit(cli, &v, || matrix_table(&m, ""), EXIT_OK)
        }
        Command::Gcheck { input } => {
            let (doc, m, tol) = load(cli, input, stdin)?;
            let g: GReport = g_embed_d3(&m, &tol).map_err(|e| InputError::new(None, e.to_string()))?;
            let code = match g.verdict {
                GVerdict::GEmbeddable => EXIT_OK,
                GVerdict::NotGEmbeddable => EXIT_NOT_EMBEDDABLE,
                GVerdict::Undecided => EXIT_UNDECIDED,
            };
            let v = json!({ "input": doc, "report": g });
            emit(
                cli,
                &v,
                || format!("verdict     {:?}\nroute       {:?}\nnecessary   {}\n", g.verdict, g.route, g.necessary_ok),
                code,
            )
        }
    })
}
