//! `maplp` — solve, decode, and verify discrete higher-order cost models.
//!
//! Exit codes: 0 success, 1 runtime error (I/O, parse, infeasible input),
//! 2 decode failure (a certificate is written), 64 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use maplp_core::decode::{
    first_supported_config, greedy_decode, DecodeError, DecodeSign, MarginalKind,
};
use maplp_core::formats::{
    model_to_scalar, parse_native, parse_uai, render_marginals_section, serialize_native, Document,
};
use maplp_core::hypersites::Hypersite;
use maplp_core::model::{conditioned_resolve, Assignment, FactorTable, Model};
use maplp_core::oracle::{
    enumerate_modes, tightness_report, verify_instance, Family, HarnessConfig,
    DEFAULT_ENUMERATION_CAP,
};
use maplp_core::orthomarginal::{PseudoMarginalSet, DEFAULT_DENSE_CAP};
use maplp_core::relaxation::{
    build_exact_em, build_pseudo_delta_emin_with, build_pseudo_emax_with, build_pseudo_emin_with,
    extract_marginals, BuildOptions, ExactSense, VariableMap,
};
use maplp_core::lp_solver::{LinearProgram, LpSolution, LpStatus};
use maplp_core::scalar::{Rat, Scalar};

const DECODE_FAILURE_EXIT: u8 = 2;
const USAGE_EXIT: u8 = 64;

#[derive(Parser)]
#[command(
    name = "maplp",
    version,
    about = "MAP inference in discrete higher-order cost models via exact LP relaxation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SenseArg {
    Min,
    Max,
    Modes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelaxationArg {
    Pseudo,
    Delta,
    Exact,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArithArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Auto,
    Native,
    Uai,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Model file (native format, or UAI MARKOV with --format uai / a .uai
    /// extension).
    model: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// Interpret UAI tables as probabilities and apply -log (float only).
    #[arg(long)]
    uai_neg_log: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a relaxation (or the exact dense program) of the model.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "min")]
        sense: SenseArg,
        #[arg(long, value_enum, default_value = "pseudo")]
        relaxation: RelaxationArg,
        #[arg(long, value_enum, default_value = "rational")]
        arith: ArithArg,
        /// Write the merged model plus the optimal marginals to a file
        /// (consumable by `decode`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the constructed program in text LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Keep one normalization row per overlap component instead of one
        /// per scope.
        #[arg(long)]
        reduce: bool,
    },
    /// Decode an integral assignment from saved optimal marginals.
    Decode {
        #[command(flatten)]
        input: InputArgs,
        /// Marginals document (defaults to a `marginals` section inside the
        /// model file itself).
        #[arg(long)]
        marginals: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "min")]
        sense: SenseArg,
        #[arg(long, value_enum, default_value = "rational")]
        arith: ArithArg,
        /// On greedy failure, fall back to clamp-and-resolve iterations.
        #[arg(long)]
        fallback: bool,
        /// Where to write the failure certificate.
        #[arg(long, default_value = "decode-failure.cert")]
        certificate: PathBuf,
    },
    /// Exhaustive modes of the model with complete argument sets.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Run the projection / delta / completion property suites on the
    /// instance (exact arithmetic).
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
    /// Generate instance families, measure relaxation tightness against
    /// enumeration, and emit replayable certificates.
    Report {
        /// Family to run, or `all`.
        #[arg(long, default_value = "all")]
        family: String,
        /// Instances per family.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        cost_lo: i64,
        #[arg(long, default_value_t = 9)]
        cost_hi: i64,
        /// Write the per-instance CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write certificates into this directory.
        #[arg(long)]
        certs: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            let benign =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(USAGE_EXIT) };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dense_cap() -> usize {
    std::env::var("MAPLP_DENSE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

fn usage_error(msg: &str) -> Result<ExitCode> {
    eprintln!("usage error: {msg}");
    Ok(ExitCode::from(USAGE_EXIT))
}

fn load_document(input: &InputArgs) -> Result<Document> {
    let text = fs::read_to_string(&input.model)
        .with_context(|| format!("reading {}", input.model.display()))?;
    let is_uai = match input.format {
        FormatArg::Uai => true,
        FormatArg::Native => false,
        FormatArg::Auto => {
            input.model.extension().is_some_and(|e| e.eq_ignore_ascii_case("uai"))
                || text.trim_start().to_ascii_uppercase().starts_with("MARKOV")
        }
    };
    if is_uai {
        Ok(Document::bare(parse_uai(&text)?))
    } else {
        Ok(parse_native(&text)?)
    }
}

/// Applies -log to every table entry; only meaningful for probability
/// tables, hence float arithmetic.
fn neg_log_model(model: &Model<Rat>) -> Result<Model<f64>> {
    let factors = model
        .factors()
        .iter()
        .map(|f| {
            let values = f
                .values()
                .iter()
                .map(|v| {
                    let p = v.to_f64();
                    if p <= 0.0 {
                        bail!("--uai-neg-log requires strictly positive table entries, got {p}");
                    }
                    Ok(-p.ln())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(FactorTable::new(f.scope().clone(), values).expect("shape preserved"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Model::new(model.num_sites(), model.num_labels(), factors)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { input, sense, relaxation, arith, out, dump_lp, reduce } => {
            if input.uai_neg_log && arith == ArithArg::Rational {
                return usage_error("--uai-neg-log requires --arith float");
            }
            let doc = load_document(&input)?;
            match arith {
                ArithArg::Rational => run_solve::<Rat>(
                    &doc.model,
                    sense,
                    relaxation,
                    out.as_deref(),
                    dump_lp.as_deref(),
                    reduce,
                ),
                ArithArg::Float => {
                    let model = if input.uai_neg_log {
                        neg_log_model(&doc.model)?
                    } else {
                        model_to_scalar::<f64>(&doc.model)
                    };
                    run_solve::<f64>(
                        &model,
                        sense,
                        relaxation,
                        out.as_deref(),
                        dump_lp.as_deref(),
                        reduce,
                    )
                }
            }
        }
        Command::Decode { input, marginals, sense, arith, fallback, certificate } => {
            if input.uai_neg_log {
                return usage_error("--uai-neg-log applies to solve only");
            }
            let sign = match sense {
                SenseArg::Min => DecodeSign::Inf,
                SenseArg::Max => DecodeSign::Sup,
                SenseArg::Modes => return usage_error("decode needs --sense min or max"),
            };
            let doc = load_document(&input)?;
            let marginals_doc = match &marginals {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    parse_native(&text)?
                }
                None => doc.clone(),
            };
            let Some((kind, tables)) = marginals_doc.marginals.clone() else {
                return usage_error("no marginals section found; pass --marginals or use a solve --out document");
            };
            match arith {
                ArithArg::Rational => {
                    run_decode::<Rat>(&doc.model, kind, tables, sign, fallback, &certificate)
                }
                ArithArg::Float => run_decode::<f64>(
                    &model_to_scalar::<f64>(&doc.model),
                    kind,
                    tables,
                    sign,
                    fallback,
                    &certificate,
                ),
            }
        }
        Command::Oracle { input, cap } => {
            let doc = load_document(&input)?;
            let modes = enumerate_modes(&doc.model, cap)?;
            println!("min {}", modes.min_value.render());
            for x in &modes.argmin {
                println!("argmin {}", join_labels(x.labels()));
            }
            println!("max {}", modes.max_value.render());
            for x in &modes.argmax {
                println!("argmax {}", join_labels(x.labels()));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { input, seed, rounds } => {
            let doc = load_document(&input)?;
            let report = verify_instance(&doc.model, seed, rounds, dense_cap())?;
            let line = |ok: bool| if ok { "PASS" } else { "FAIL" };
            println!("projection {}", line(report.projection_ok));
            println!("lifting {}", line(report.lifting_ok));
            println!("delta {}", line(report.delta_ok));
            println!("completion-lower-bound {}", line(report.completion_ok));
            println!(
                "completion-closed-form-equality {}/{}",
                report.completion_equal, report.completion_rounds
            );
            Ok(if report.all_ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Report { family, count, seed, cost_lo, cost_hi, csv, certs } => {
            let families: Vec<(Family, usize)> = if family == "all" {
                Family::ALL.iter().map(|&f| (f, count)).collect()
            } else {
                match Family::from_name(&family) {
                    Some(f) => vec![(f, count)],
                    None => return usage_error(&format!("unknown family `{family}`")),
                }
            };
            if cost_lo > cost_hi {
                return usage_error("--cost-lo must not exceed --cost-hi");
            }
            let cfg = HarnessConfig {
                families,
                seed,
                cost_range: (cost_lo, cost_hi),
                enumeration_cap: DEFAULT_ENUMERATION_CAP,
            };
            let report = tightness_report(&cfg)?;
            if let Some(path) = csv {
                fs::write(&path, report.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(dir) = certs {
                fs::create_dir_all(&dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                for cert in &report.certificates {
                    fs::write(dir.join(&cert.file_name), &cert.text)?;
                }
            }
            print!("{}", report.summary());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn join_labels(labels: &[usize]) -> String {
    labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn solved<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    let sol = lp.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        other => Err(anyhow!("program terminated with status {other:?}")),
    }
}

fn run_solve<T: Scalar>(
    model: &Model<T>,
    sense: SenseArg,
    relaxation: RelaxationArg,
    out: Option<&Path>,
    dump_lp: Option<&Path>,
    reduce: bool,
) -> Result<ExitCode> {
    let merged = model.merge_to_frontier();
    let opts = BuildOptions { reduce_normalization: reduce };
    // (value label, lp, map) triples; one entry except for `modes`.
    let mut programs: Vec<(&str, LinearProgram<T>, VariableMap, MarginalKind)> = Vec::new();
    match relaxation {
        RelaxationArg::Pseudo => match sense {
            SenseArg::Min => {
                let (lp, map) = build_pseudo_emin_with(&merged, opts)?;
                programs.push(("min_optimum", lp, map, MarginalKind::Probability));
            }
            SenseArg::Max => {
                let (lp, map) = build_pseudo_emax_with(&merged, opts)?;
                programs.push(("max_optimum", lp, map, MarginalKind::Probability));
            }
            SenseArg::Modes => {
                let (lp, map) = build_pseudo_emin_with(&merged, opts)?;
                programs.push(("min_optimum", lp, map, MarginalKind::Probability));
                let (lp, map) = build_pseudo_emax_with(&merged, opts)?;
                programs.push(("max_optimum", lp, map, MarginalKind::Probability));
            }
        },
        RelaxationArg::Delta => {
            let (lp, map) = build_pseudo_delta_emin_with(&merged, opts)?;
            programs.push(("delta_optimum", lp, map, MarginalKind::Delta));
        }
        RelaxationArg::Exact => {
            let cap = dense_cap();
            match sense {
                SenseArg::Min => {
                    let (lp, map) = build_exact_em(&merged, ExactSense::Min, cap)?;
                    programs.push(("min_optimum", lp, map, MarginalKind::Probability));
                }
                SenseArg::Max => {
                    let (lp, map) = build_exact_em(&merged, ExactSense::Max, cap)?;
                    programs.push(("max_optimum", lp, map, MarginalKind::Probability));
                }
                SenseArg::Modes => {
                    let (lp, map) = build_exact_em(&merged, ExactSense::Min, cap)?;
                    programs.push(("min_optimum", lp, map, MarginalKind::Probability));
                    let (lp, map) = build_exact_em(&merged, ExactSense::Max, cap)?;
                    programs.push(("max_optimum", lp, map, MarginalKind::Probability));
                }
            }
        }
    }

    if let Some(path) = dump_lp {
        if programs.len() != 1 {
            eprintln!("usage error: --dump-lp needs a single program; pick --sense min or max");
            return Ok(ExitCode::from(USAGE_EXIT));
        }
        fs::write(path, programs[0].1.write_lp_format())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if out.is_some() && programs.len() != 1 {
        eprintln!("usage error: --out needs a single marginal set; pick --sense min or max, or --relaxation delta");
        return Ok(ExitCode::from(USAGE_EXIT));
    }

    for (label, lp, map, kind) in &programs {
        let sol = solved(lp)?;
        let value = sol.objective.clone().expect("optimal");
        println!("{label} {}", value.render());
        let marginals = extract_marginals(&sol, map)?;
        let tables: Vec<(Hypersite, Vec<Rat>)> = marginals
            .iter()
            .map(|(h, t)| (h.clone(), t.iter().map(|v| v.to_rat()).collect()))
            .collect();
        match out {
            Some(path) => {
                let doc = Document {
                    meta: vec![
                        ("optimum".to_string(), value.render()),
                        ("program".to_string(), label.trim_end_matches("_optimum").to_string()),
                    ],
                    model: rational_model(&merged),
                    marginals: Some((*kind, tables)),
                    assignment: None,
                };
                fs::write(path, serialize_native(&doc))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            None => print!("{}", render_marginals_section(*kind, &tables)),
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Exact rational copy of a model (identity in rational mode, binary-exact
/// in float mode) for serialization.
fn rational_model<T: Scalar>(model: &Model<T>) -> Model<Rat> {
    let factors = model
        .factors()
        .iter()
        .map(|f| {
            FactorTable::new(f.scope().clone(), f.values().iter().map(|v| v.to_rat()).collect())
                .expect("shape preserved")
        })
        .collect();
    Model::new(model.num_sites(), model.num_labels(), factors).expect("shape preserved")
}

fn run_decode<T: Scalar>(
    model: &Model<T>,
    kind: MarginalKind,
    tables: Vec<(Hypersite, Vec<Rat>)>,
    sign: DecodeSign,
    fallback: bool,
    certificate: &Path,
) -> Result<ExitCode> {
    let merged = model.merge_to_frontier();
    let marginals = PseudoMarginalSet::new(
        merged.num_labels(),
        tables
            .iter()
            .map(|(h, t)| (h.clone(), t.iter().map(T::from_rat).collect()))
            .collect(),
    )?;
    match greedy_decode(&marginals, kind, sign, &merged) {
        Ok(x) => {
            let value = merged.evaluate(&x)?;
            println!("assignment {}", join_labels(x.labels()));
            println!("value {}", value.render());
            Ok(ExitCode::SUCCESS)
        }
        Err(DecodeError::Failure(failure)) => {
            if fallback {
                let x = clamp_and_resolve(&merged, kind, sign)?;
                let value = merged.evaluate(&x)?;
                println!("assignment {}", join_labels(x.labels()));
                println!("value {}", value.render());
                return Ok(ExitCode::SUCCESS);
            }
            let rat_model = rational_model(&merged);
            let mut meta = vec![
                ("kind".to_string(), "decode-failure".to_string()),
                (
                    "instance_hash".to_string(),
                    maplp_core::formats::model_fingerprint(&rat_model),
                ),
                ("step".to_string(), failure.step.to_string()),
                ("scope".to_string(), failure.scope.to_string()),
                (
                    "sign".to_string(),
                    match sign {
                        DecodeSign::Inf => "inf".to_string(),
                        DecodeSign::Sup => "sup".to_string(),
                    },
                ),
            ];
            for (cfg, mass) in &failure.candidates {
                meta.push(("candidate".to_string(), format!("{} mass {}", join_labels(cfg), mass.render())));
            }
            let doc = Document {
                meta,
                model: rat_model,
                marginals: Some((kind, tables)),
                assignment: None,
            };
            fs::write(certificate, serialize_native(&doc))
                .with_context(|| format!("writing {}", certificate.display()))?;
            println!("decode_failure step {} scope {}", failure.step, failure.scope);
            eprintln!(
                "decode failed at step {} (scope {}); certificate written to {}",
                failure.step,
                failure.scope,
                certificate.display()
            );
            Ok(ExitCode::from(DECODE_FAILURE_EXIT))
        }
        Err(e) => Err(e.into()),
    }
}

/// Fallback mode construction: repeatedly clamp the first frontier scope to
/// its smallest supported configuration (from a fresh relaxation solve of
/// the current sub-model) until every site is fixed.
fn clamp_and_resolve<T: Scalar>(
    model: &Model<T>,
    kind: MarginalKind,
    sign: DecodeSign,
) -> Result<Assignment> {
    let n = model.num_sites();
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut site_of: Vec<usize> = (1..=n).collect(); // current index -> original site
    let mut current = model.clone();
    loop {
        let merged = current.merge_to_frontier();
        let (lp, map) = match (kind, sign) {
            (MarginalKind::Delta, _) => build_pseudo_delta_emin_with(&merged, BuildOptions::default())?,
            (MarginalKind::Probability, DecodeSign::Inf) => {
                build_pseudo_emin_with(&merged, BuildOptions::default())?
            }
            (MarginalKind::Probability, DecodeSign::Sup) => {
                build_pseudo_emax_with(&merged, BuildOptions::default())?
            }
        };
        let sol = solved(&lp)?;
        let marginals = extract_marginals(&sol, &map)?;
        // Try the greedy pass on the sub-model first; it usually finishes.
        if let Ok(x) = greedy_decode(&marginals, kind, sign, &merged) {
            for (i, &label) in x.labels().iter().enumerate() {
                fixed[site_of[i] - 1] = Some(label);
            }
            break;
        }
        let scope = merged.factors()[0].scope().clone();
        let table = marginals.table(&scope).expect("solved scope table");
        let cfg = first_supported_config(table, scope.len(), merged.num_labels(), kind, sign)
            .ok_or_else(|| anyhow!("relaxation solution carries no supported configuration"))?;
        for (&site, &label) in scope.sites().iter().zip(&cfg) {
            fixed[site_of[site - 1] - 1] = Some(label);
        }
        let clamped = conditioned_resolve(&merged, &scope, &cfg)?;
        site_of = clamped.kept_sites.iter().map(|&k| site_of[k - 1]).collect();
        match clamped.model {
            Some(next) => current = next,
            None => break,
        }
    }
    // Cost-free leftovers (possible when clamping consumed every factor).
    Ok(Assignment::new(fixed.into_iter().map(|f| f.unwrap_or(0)).collect()))
}
