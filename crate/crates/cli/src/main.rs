//! `ipdecomp`: solve, analyze and generate integer programs from JSON documents.
//!
//! Exit codes: 0 optimal, 2 infeasible, 3 unbounded, 4 invalid input or a
//! failed precondition, 5 internal failure. Result documents go to standard
//! output (or `--output`), logs to standard error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ipdecomp::decomp::{solve_standard_with, support_count, DecompOptions};
use ipdecomp::gen::{generate, Family, Form, GenSpec, OracleBox};
use ipdecomp::io::{
    instance_to_json, int_to_json, ints_to_json, matrix_to_json, parse_instance, parse_matrix,
    solution_to_json, InstanceDocument,
};
use ipdecomp::linalg::{det, hnf, subdet_scan};
use ipdecomp::oracle::{brute_inequality, brute_mixed, brute_standard};
use ipdecomp::pipeline::{analyze, ceil_log2, solve_inequality_traced, AnalysisReport};
use ipdecomp::{
    c_delta_bound, dp_solve, lemma1_bound, lemma7_threshold, papadimitriou_bound, solve_mixed,
    Error, ProblemInstance, Solution, Status,
};
use log::info;
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "ipdecomp",
    version,
    about = "Exact integer programming with few rows"
)]
struct Cli {
    /// Write the result document here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance document.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Decomp)]
        method: Method,
        /// Sub-determinant bound for inequality instances (overrides the document).
        #[arg(long)]
        delta: Option<BigInt>,
        /// Oracle box radius (overrides the document).
        #[arg(long = "box")]
        box_radius: Option<BigInt>,
    },
    /// Check the reduction preconditions of an inequality instance.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        delta: Option<BigInt>,
    },
    /// Hermite Normal Form of the document's matrix `A`.
    Hnf { file: PathBuf },
    /// Evaluate the bound formulas for a sub-determinant bound.
    Bounds {
        #[arg(long)]
        delta: BigInt,
        /// Largest row count in the structure-bound table.
        #[arg(long, default_value_t = 4)]
        rows: usize,
    },
    /// Generate a seeded instance document.
    Gen {
        #[arg(long, value_enum)]
        form: FormArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: i64,
        #[arg(long)]
        seed: u64,
        /// Continuous variables (mixed form).
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Budget)]
        family: FamilyArg,
        /// Draw the right-hand side at random instead of from a planted point.
        #[arg(long)]
        random_rhs: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Decomp,
    Dp,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Standard,
    Inequality,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Budget,
    Free,
}

/// A failed command: exit code plus message.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) | Error::Overflow(_) | Error::NodeLimit(_) => 5,
            _ => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 4,
        message: message.into(),
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::Infeasible => 2,
        Status::Unbounded => 3,
    }
}

fn read_document(path: &Path) -> Result<InstanceDocument, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn form_name(doc: &InstanceDocument) -> Value {
    serde_json::to_value(doc.form()).expect("form serializes")
}

fn solve(
    path: &Path,
    method: Method,
    delta: Option<BigInt>,
    box_radius: Option<BigInt>,
) -> Result<(Value, u8), Failure> {
    let doc = read_document(path)?;
    let start = Instant::now();
    let mut trace = Map::new();
    let solution: Solution = match (&doc.instance, method) {
        (ProblemInstance::Standard(ip), Method::Decomp) => {
            let out = solve_standard_with(ip, &DecompOptions::default())?;
            trace.insert("var_bound".into(), int_to_json(&out.var_bound));
            trace.insert("supports".into(), json!(support_count(ip)));
            if let Some(w) = &out.witness {
                trace.insert("large_support".into(), json!(w.large_support));
                trace.insert("b_double_prime".into(), ints_to_json(&w.b_double_prime));
            }
            out.solution
        }
        (ProblemInstance::Standard(ip), Method::Dp) => {
            let bound = papadimitriou_bound(ip);
            trace.insert("var_bound".into(), int_to_json(&bound));
            dp_solve(ip, &bound)?
        }
        (ProblemInstance::Inequality(ip), Method::Decomp) => {
            let delta = match delta.or_else(|| doc.delta.clone()) {
                Some(d) => d,
                None => {
                    let d = subdet_scan(&ip.a)?.delta_max;
                    info!("no delta declared; using the largest sub-determinant {d}");
                    d
                }
            };
            let run = solve_inequality_traced(ip, &delta)?;
            trace.insert("delta".into(), int_to_json(&delta));
            trace.insert("k".into(), json!(run.report.k));
            trace.insert("row_permutation".into(), json!(run.trace.row_permutation));
            trace.insert("dense_rows".into(), json!(run.trace.dense_rows));
            trace.insert("slack_count".into(), json!(run.trace.slack_count));
            trace.insert("standard_rows".into(), json!(run.standard.m()));
            trace.insert("standard_vars".into(), json!(run.standard.n()));
            trace.insert(
                "objective_offset".into(),
                int_to_json(&run.trace.objective_offset),
            );
            trace.insert("row_count_ok".into(), json!(run.report.row_count_ok));
            run.solution
        }
        (ProblemInstance::Mixed(mip), Method::Decomp) => solve_mixed(mip)?,
        (_, Method::Dp) => {
            return Err(invalid("the dp method solves standard-form instances only"))
        }
        (instance, Method::Oracle) => {
            let bx = match (box_radius, &doc.oracle_box) {
                (Some(r), _) => match instance {
                    ProblemInstance::Inequality(ip) => {
                        OracleBox::Signed(vec![(-r.clone(), r); ip.n()])
                    }
                    _ => OracleBox::Nonneg(r),
                },
                (None, Some(b)) => b.clone(),
                (None, None) => return Err(invalid("the oracle needs --box or a \"box\" field")),
            };
            trace.insert("box".into(), box_json(&bx));
            match (instance, &bx) {
                (ProblemInstance::Standard(ip), OracleBox::Nonneg(r)) => brute_standard(ip, r)?,
                (ProblemInstance::Mixed(mip), OracleBox::Nonneg(r)) => brute_mixed(mip, r)?,
                (ProblemInstance::Inequality(ip), OracleBox::Signed(ranges)) => {
                    brute_inequality(ip, ranges)?
                }
                _ => return Err(invalid("box shape does not match the instance form")),
            }
        }
    };
    let elapsed = start.elapsed();
    let mut out = match solution_to_json(&solution) {
        Value::Object(o) => o,
        _ => unreachable!("solutions serialize to objects"),
    };
    out.insert("form".into(), form_name(&doc));
    out.insert(
        "method".into(),
        json!(match method {
            Method::Decomp => "decomp",
            Method::Dp => "dp",
            Method::Oracle => "oracle",
        }),
    );
    out.insert("trace".into(), Value::Object(trace));
    out.insert("timing".into(), json!({ "seconds": elapsed.as_secs_f64() }));
    Ok((Value::Object(out), status_code(solution.status)))
}

fn box_json(bx: &OracleBox) -> Value {
    match bx {
        OracleBox::Nonneg(r) => int_to_json(r),
        OracleBox::Signed(ranges) => Value::Array(
            ranges
                .iter()
                .map(|(lo, hi)| json!([int_to_json(lo), int_to_json(hi)]))
                .collect(),
        ),
    }
}

fn report_json(r: &AnalysisReport, n: usize) -> Value {
    json!({
        "rank": r.rank,
        "delta_max": int_to_json(&r.delta_max),
        "has_singular_submatrix": r.has_singular_submatrix,
        "delta_ok": r.delta_ok,
        "k": r.k,
        "hnf_diagonal": ints_to_json(&r.hnf_diagonal),
        "max_transformed_entry": int_to_json(&r.max_transformed_entry),
        "entry_bound_ok": r.entry_bound_ok,
        "row_count_ok": r.row_count_ok,
        "top_block": r.top_block,
        "blocking_failure": r.blocking_failure(n),
        "all_ok": r.all_ok(n),
    })
}

fn analyze_command(path: &Path, delta: Option<BigInt>) -> Result<(Value, u8), Failure> {
    let doc = read_document(path)?;
    let ProblemInstance::Inequality(ip) = &doc.instance else {
        return Err(invalid("analyze expects an inequality instance"));
    };
    let delta = delta
        .or_else(|| doc.delta.clone())
        .ok_or_else(|| invalid("analyze needs --delta or a \"delta\" field"))?;
    let report = analyze(ip, &delta)?;
    // a blocking failure means the reduction would refuse this instance
    let code = if report.blocking_failure(ip.n()).is_some() {
        4
    } else {
        0
    };
    let mut out = report_json(&report, ip.n());
    out["delta"] = int_to_json(&delta);
    out["c_delta_bound"] = int_to_json(&c_delta_bound(&delta)?);
    Ok((out, code))
}

fn hnf_command(path: &Path) -> Result<(Value, u8), Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    // any document with an "A" field works, instance documents included
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        invalid(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let field = v.get("A").ok_or_else(|| invalid("A: missing field"))?;
    let a = parse_matrix(field, "A", 0)?;
    if a.rows() != a.cols() {
        return Err(invalid(format!(
            "hnf needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let r = hnf(&a)?;
    let out = json!({
        "A": matrix_to_json(&a),
        "H": matrix_to_json(&r.h),
        "U": matrix_to_json(&r.u),
        "det": int_to_json(&det(&a)?),
        "det_u": int_to_json(&det(&r.u)?),
    });
    Ok((out, 0))
}

fn bounds_command(delta: &BigInt, rows: usize) -> Result<(Value, u8), Failure> {
    let table = (1..=rows)
        .map(|m| Ok(json!({ "m": m, "bound": int_to_json(&lemma1_bound(m, delta)?) })))
        .collect::<Result<Vec<_>, Error>>()?;
    let out = json!({
        "delta": int_to_json(delta),
        "ceil_log2_delta": ceil_log2(delta),
        "structure_bound": table,
        "c_delta_bound": int_to_json(&c_delta_bound(delta)?),
        "row_threshold": int_to_json(&lemma7_threshold(delta)?),
    });
    Ok((out, 0))
}

#[allow(clippy::too_many_arguments)]
fn gen_command(
    form: FormArg,
    n: usize,
    m: usize,
    delta: i64,
    seed: u64,
    l: usize,
    family: FamilyArg,
    random_rhs: bool,
) -> Result<(Value, u8), Failure> {
    let base = match form {
        FormArg::Standard => GenSpec::standard(n, m, delta, seed),
        FormArg::Inequality => GenSpec::inequality(n, m, delta, seed),
        FormArg::Mixed => GenSpec::mixed(n, m, l, delta, seed),
    };
    let spec = GenSpec {
        family: match family {
            FamilyArg::Budget => Family::Budget,
            FamilyArg::Free => Family::Free,
        },
        planted: !random_rhs,
        ..base
    };
    let g = generate(&spec)?;
    let doc = InstanceDocument {
        instance: g.instance,
        delta: Some(BigInt::from(delta)),
        oracle_box: g.oracle_box,
    };
    let mut out = instance_to_json(&doc);
    out["seed"] = json!(seed);
    out["attempts"] = json!(g.attempts);
    if spec.form == Form::Mixed {
        out["l"] = json!(l);
    }
    Ok((out, 0))
}

fn run(cli: Cli) -> Result<(Value, u8), Failure> {
    match cli.command {
        Command::Solve {
            file,
            method,
            delta,
            box_radius,
        } => solve(&file, method, delta, box_radius),
        Command::Analyze { file, delta } => analyze_command(&file, delta),
        Command::Hnf { file } => hnf_command(&file),
        Command::Bounds { delta, rows } => bounds_command(&delta, rows),
        Command::Gen {
            form,
            n,
            m,
            delta,
            seed,
            l,
            family,
            random_rhs,
        } => gen_command(form, n, m, delta, seed, l, family, random_rhs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let output = cli.output.clone();
    let (doc, code) = match run(cli) {
        Ok(r) => r,
        Err(f) => (json!({ "error": f.message, "exit_code": f.code }), f.code),
    };
    let text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text + "\n") {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(4);
            }
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    if let Some(msg) = doc.get("error").and_then(Value::as_str) {
        eprintln!("error: {msg}");
    }
    ExitCode::from(code)
}
