//! Command-line front end. `main.rs` only parses arguments and maps
//! [`CliError`] to an exit code.

use std::io::{Read, Write};
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::builders::{build_jordan, build_shift, gallery, gallery_entry, Expectation, GalleryEntry};
use crate::classifier::{classify_simple, validate_certificate, ClassifyError, Decision, Verdict};
use crate::matrix::{CMatrix, MatrixError, Tolerance};
use crate::oracle::{si_scan, simplicity_scan, OracleBounds};
use crate::predicates::{parse_complex, JordanBlock, JordanSpec};
use crate::words::enumerate;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0} demo row(s) did not match expectations")]
    DemoMismatch(usize),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::DemoMismatch(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::NumericalFailure(m) => CliError::Numerical(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Matrix(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Si,
    Simplicity,
}

#[derive(Debug, Parser)]
#[command(name = "si-semigroup", version, about = "Decide SI and simplicity of S(T, T*) for a complex matrix T")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_abs: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_rel: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rank_cutoff: f64,
    /// Longest word W examined by the oracle.
    #[arg(long, global = true, default_value_t = 4)]
    pub w_max: usize,
    /// Longest factor word X, Y in the oracle table.
    #[arg(long, global = true, default_value_t = 8)]
    pub factor_max: usize,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub element_cap: usize,
    #[arg(long, global = true, default_value_t = 1e12)]
    pub norm_cap: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Disable parallel enumeration and scans.
    #[arg(long, global = true)]
    pub serial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify SI and simplicity, printing a verdict with certificates.
    Classify { input: String },
    /// Run the bounded oracle search.
    Oracle {
        input: String,
        #[arg(long, value_enum, default_value_t = Mode::Si)]
        mode: Mode,
    },
    /// Enumerate S(T, T*) up to a word length.
    Enumerate {
        input: String,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Print singular values.
    Svals { input: String },
    /// Emit a constructed matrix as JSON.
    Build {
        #[command(subcommand)]
        kind: BuildKind,
    },
    /// Inspect the named gallery.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Classify the gallery and cross-check against the oracle.
    Demo {
        #[arg(long)]
        only: Option<String>,
        /// Extra seeded random shifts and Jordan matrices.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum BuildKind {
    /// Jordan matrix from "lambda:size,..." (lambda as a+bi or r@theta).
    Jordan {
        #[arg(long)]
        blocks: String,
    },
    /// Lower weighted shift from comma-separated weights.
    Shift {
        #[arg(long, allow_hyphen_values = true)]
        weights: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum GalleryAction {
    List,
    Emit { name: String },
}

/// Validated run settings.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub tol: Tolerance,
    pub bounds: OracleBounds,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
        let tol = Tolerance::new(cli.tol_abs, cli.tol_rel, cli.rank_cutoff)?;
        if cli.w_max == 0 || cli.factor_max == 0 || cli.element_cap == 0 || !(cli.norm_cap > 0.0) {
            return Err(CliError::Input("oracle bounds must be positive".into()));
        }
        Ok(RunConfig {
            tol,
            bounds: OracleBounds {
                w_max: cli.w_max,
                factor_max_len: cli.factor_max,
                element_cap: cli.element_cap,
                norm_cap: cli.norm_cap,
                parallel: !cli.serial,
                stop_at_first_failure: false,
            },
            format: cli.format,
            seed: cli.seed,
        })
    }
}

/// `gallery:NAME`, `-` for stdin, or a path to matrix JSON.
pub fn load_matrix(input: &str) -> Result<CMatrix, CliError> {
    if let Some(name) = input.strip_prefix("gallery:") {
        return gallery_entry(name)
            .map(|e| e.matrix)
            .map_err(|e| CliError::Input(e.to_string()));
    }
    let text = if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(Path::new(input)).map_err(|e| CliError::Input(format!("{input}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{input}: {e}")))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::Classify { input } => {
            let a = load_matrix(input)?;
            let v = classify_simple(&a, &cfg.tol, &cfg.bounds)?;
            match cfg.format {
                Format::Json => emit_json(out, &v)?,
                Format::Text => writeln!(
                    out,
                    "si={} simple={} certificate={} rules={}",
                    v.si,
                    v.simple,
                    v.certificate.tag(),
                    v.rule_trace.join(",")
                )?,
            }
        }
        Command::Oracle { input, mode } => {
            let a = load_matrix(input)?;
            let table = cfg.bounds.table(&a, &cfg.tol);
            let report = match mode {
                Mode::Si => si_scan(&a, &cfg.bounds, &table, &cfg.tol),
                Mode::Simplicity => simplicity_scan(&a, &cfg.bounds, &table, &cfg.tol),
            };
            match cfg.format {
                Format::Json => emit_json(out, &report)?,
                Format::Text => {
                    for o in &report.outcomes {
                        let fmt = |f: &Option<crate::oracle::Factor>| f.as_ref().map_or("-".to_string(), |f| f.to_string());
                        writeln!(out, "word={} status={:?} x={} y={}", o.word, o.status, fmt(&o.x), fmt(&o.y))?;
                    }
                    match report.failure_word() {
                        Some(w) => writeln!(out, "overall=FAILURE-WITNESS word={w}")?,
                        None => writeln!(out, "overall=ALL-SOLVED")?,
                    }
                }
            }
        }
        Command::Enumerate { input, max_len } => {
            let a = load_matrix(input)?;
            let len = max_len.unwrap_or(cfg.bounds.factor_max_len);
            if len == 0 {
                return Err(CliError::Input("max-len must be positive".into()));
            }
            let table = enumerate(&a, len, &cfg.bounds.caps(), &cfg.tol);
            match cfg.format {
                Format::Text => {
                    write!(out, "{}", table.dump()?)?;
                    eprintln!(
                        "elements={} closed={} truncated={} collisions={}",
                        table.len(),
                        table.closed,
                        table.truncated,
                        table.collisions
                    );
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Element {
                        len: usize,
                        word: String,
                        norm: f64,
                        fp: String,
                    }
                    #[derive(Serialize)]
                    struct Dump {
                        max_len: usize,
                        closed: bool,
                        truncated: bool,
                        collisions: usize,
                        elements: Vec<Element>,
                    }
                    let elements = table
                        .entries
                        .iter()
                        .map(|e| {
                            Ok(Element {
                                len: e.witness.len(),
                                word: e.witness.to_string(),
                                norm: e.matrix.op_norm()?,
                                fp: e.fingerprint.hex(),
                            })
                        })
                        .collect::<Result<Vec<_>, MatrixError>>()?;
                    emit_json(
                        out,
                        &Dump {
                            max_len: len,
                            closed: table.closed,
                            truncated: table.truncated,
                            collisions: table.collisions,
                            elements,
                        },
                    )?;
                }
            }
        }
        Command::Svals { input } => {
            let sv = load_matrix(input)?.svalues()?;
            match cfg.format {
                Format::Json => emit_json(out, &sv)?,
                Format::Text => {
                    let s: Vec<String> = sv.values.iter().map(|v| v.to_string()).collect();
                    writeln!(out, "{}", s.join(" "))?;
                }
            }
        }
        Command::Build { kind } => {
            let m = match kind {
                BuildKind::Jordan { blocks } => {
                    let spec: JordanSpec = blocks.parse().map_err(|e| CliError::Input(format!("{e}")))?;
                    build_jordan(&spec)
                }
                BuildKind::Shift { weights } => build_shift(&parse_weights(weights)?),
            };
            emit_json(out, &m)?;
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => match cfg.format {
                Format::Json => {
                    let rows: Vec<_> = gallery().into_iter().map(|e| (e.name, e.expected_si, e.expected_simple)).collect();
                    emit_json(out, &rows)?;
                }
                Format::Text => {
                    for e in gallery() {
                        writeln!(
                            out,
                            "{:<22} n={} si={:?} simple={:?}  {}",
                            e.name,
                            e.matrix.n(),
                            e.expected_si,
                            e.expected_simple,
                            e.note
                        )?;
                    }
                }
            },
            GalleryAction::Emit { name } => {
                let e = gallery_entry(name).map_err(|e| CliError::Input(e.to_string()))?;
                emit_json(out, &e.matrix)?;
            }
        },
        Command::Demo { only, random } => {
            let mut entries = gallery();
            if let Some(name) = only {
                entries.retain(|e| &e.name == name);
                if entries.is_empty() {
                    return Err(CliError::Input(format!("unknown gallery entry {name:?}")));
                }
            }
            if only.is_none() {
                entries.extend(random_entries(cfg.seed, *random));
            }
            let rows = demo_rows(&entries, &cfg)?;
            match cfg.format {
                Format::Json => emit_json(out, &rows)?,
                Format::Text => write!(out, "{}", render_table(&rows))?,
            }
            let bad = rows.iter().filter(|r| !r.pass).count();
            if bad > 0 {
                return Err(CliError::DemoMismatch(bad));
            }
        }
    }
    Ok(())
}

fn parse_weights(s: &str) -> Result<Vec<num_complex::Complex64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| parse_complex(w).map_err(|e| CliError::Input(e.to_string())))
        .collect()
}

/// One line of the demo table.
#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub name: String,
    pub expected_si: Expectation,
    pub expected_simple: Expectation,
    pub got_si: Decision,
    pub got_simple: Decision,
    pub rule: String,
    pub oracle_agrees: bool,
    pub certificate_valid: bool,
    pub pass: bool,
    pub verdict: Verdict,
}

/// Oracle outcome consistent with a conclusive decision.
fn oracle_consistent(decision: Decision, all_solved: bool) -> bool {
    match decision {
        Decision::Yes => all_solved,
        Decision::No => !all_solved,
        Decision::Inconclusive => true,
    }
}

pub fn demo_row(e: &GalleryEntry, cfg: &RunConfig) -> Result<DemoRow, CliError> {
    let a = &e.matrix;
    let v = classify_simple(a, &cfg.tol, &cfg.bounds)?;
    let table = cfg.bounds.table(a, &cfg.tol);
    let si_report = si_scan(a, &cfg.bounds, &table, &cfg.tol);
    let simple_report = simplicity_scan(a, &cfg.bounds, &table, &cfg.tol);
    let oracle_agrees = oracle_consistent(v.si, si_report.all_solved())
        && oracle_consistent(v.simple, simple_report.all_solved())
        && si_report.reverify(a, crate::classifier::REVERIFY_RESIDUAL).is_some()
        && simple_report.reverify(a, crate::classifier::REVERIFY_RESIDUAL).is_some();
    let mut certificate_valid = validate_certificate(a, &v.certificate, &cfg.tol)?;
    if let Some(sc) = &v.simple_certificate {
        certificate_valid &= validate_certificate(a, sc, &cfg.tol)?;
    }
    let pass = e.expected_si.matches(v.si) && e.expected_simple.matches(v.simple) && oracle_agrees && certificate_valid;
    Ok(DemoRow {
        name: e.name.clone(),
        expected_si: e.expected_si,
        expected_simple: e.expected_simple,
        got_si: v.si,
        got_simple: v.simple,
        rule: v.rule_trace.first().cloned().unwrap_or_default(),
        oracle_agrees,
        certificate_valid,
        pass,
        verdict: v,
    })
}

pub fn demo_rows(entries: &[GalleryEntry], cfg: &RunConfig) -> Result<Vec<DemoRow>, CliError> {
    entries.iter().map(|e| demo_row(e, cfg)).collect()
}

fn expectation_str(e: Expectation) -> &'static str {
    match e {
        Expectation::Yes => "YES",
        Expectation::No => "NO",
        Expectation::Unspecified => "-",
    }
}

pub fn render_table(rows: &[DemoRow]) -> String {
    let mut s = format!(
        "{:<22} {:<10} {:<24} {:<6} {:<7} {:<6} {}\n",
        "name", "expected", "got", "rule", "oracle", "cert", "status"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<22} {:<10} {:<24} {:<6} {:<7} {:<6} {}\n",
            r.name,
            format!("{}/{}", expectation_str(r.expected_si), expectation_str(r.expected_simple)),
            format!("{}/{}", r.got_si, r.got_simple),
            r.rule,
            if r.oracle_agrees { "agree" } else { "DIFFER" },
            if r.certificate_valid { "valid" } else { "BAD" },
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}

/// Seeded shifts and Jordan matrices. Expected verdicts are left
/// unspecified; such rows pass when the classifier, oracle and certificate
/// checks agree with each other.
pub fn random_entries(seed: u64, count: usize) -> Vec<GalleryEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = [0.0, 1.0, -1.0, 0.5, -0.5];
    let lambdas = [
        num_complex::Complex64::new(0.0, 0.0),
        num_complex::Complex64::new(1.0, 0.0),
        num_complex::Complex64::new(-1.0, 0.0),
        num_complex::Complex64::new(0.0, 1.0),
        num_complex::Complex64::new(2.0, 0.0),
        num_complex::Complex64::new(0.5, 0.0),
    ];
    (0..count)
        .map(|k| {
            let (name, matrix) = if rng.random_bool(0.5) {
                let n = rng.random_range(2..=4);
                let w: Vec<_> = (0..n - 1)
                    .map(|_| num_complex::Complex64::new(weights[rng.random_range(0..weights.len())], 0.0))
                    .collect();
                (format!("random-shift-{k}"), build_shift(&w))
            } else {
                let mut blocks = Vec::new();
                let mut left = rng.random_range(1..=3usize);
                while left > 0 {
                    let size = rng.random_range(1..=left);
                    blocks.push(JordanBlock {
                        lambda: lambdas[rng.random_range(0..lambdas.len())],
                        size,
                    });
                    left -= size;
                }
                (format!("random-jordan-{k}"), build_jordan(&JordanSpec { blocks }))
            };
            GalleryEntry {
                name,
                matrix,
                expected_si: Expectation::Unspecified,
                expected_simple: Expectation::Unspecified,
                note: format!("seeded random instance (seed {seed})"),
            }
        })
        .collect()
}
