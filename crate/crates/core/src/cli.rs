//! The `conduche` command line: loads bundles, runs the validators and the
//! path, groupoid and algebra computations, and emits JSON reports.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::catalog;
use crate::ckalgebra::{
    check_ck_relations, default_degrees, group_regular_representation, injectivity_probe,
    path_representation, truncated_path_representation, AlgebraElement, RepAssignment,
};
use crate::error::{Error, Result};
use crate::fibration::{
    check_dcf, check_ore, check_row_finite, check_strong_surjectivity, validate_functor, Fibration,
    DEFAULT_BUDGET,
};
use crate::groupoid::{
    basis_inclusion, enumerate_germs, intersect_basis, product_basis, GermBasisSet,
};
use crate::ids::{split_top_level, MorphismId};
use crate::io::{resolve, Bundle};
use crate::paths::{
    aperiodicity_scan, canonical_splitting, cylinder_intersection, enumerate_all_paths,
    slice_objects, PathOracle,
};

/// Environment variable fixing the sampling order of randomized checks.
pub const SEED_VAR: &str = "CONDUCHE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Level bound for checks on infinite categories.
    #[arg(long, default_value_t = 4, global = true)]
    pub depth: usize,
    /// Candidate bound for fiber and completion searches.
    #[arg(long, default_value_t = DEFAULT_BUDGET, global = true)]
    pub budget: usize,
    /// Tolerance for matrix relation checks; 0 selects exact comparison.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tolerance: f64,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
}

#[derive(Debug, Parser)]
#[command(
    name = "conduche",
    version,
    about = "Discrete Conduche fibrations, path spaces, germ groupoids and Cuntz-Krieger algebras"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FibrationArg {
    /// A bundle file or the name of a bundled example.
    #[arg(long)]
    pub fibration: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the functor, factorization lifting, row finiteness, surjectivity
    /// and Ore checks.
    Validate {
        #[command(flatten)]
        fib: FibrationArg,
    },
    /// List the lifts of base morphisms into an object.
    Fiber {
        #[command(flatten)]
        fib: FibrationArg,
        #[arg(long)]
        object: String,
        /// A base morphism; every base morphism up to the depth when absent.
        #[arg(long)]
        base: Option<String>,
    },
    /// Evaluate, enumerate or scan infinite paths.
    Paths {
        #[command(flatten)]
        fib: FibrationArg,
        /// A path recorded in the bundle, or `canonical`.
        #[arg(long, default_value = "canonical")]
        path: String,
        /// Target object of the canonical path.
        #[arg(long)]
        object: Option<String>,
        /// Comma-separated base morphisms to evaluate at.
        #[arg(long)]
        eval: Option<String>,
        /// Search for distinct prefixes with equal restrictions.
        #[arg(long)]
        scan: bool,
        /// List every path (finite bases only).
        #[arg(long)]
        enumerate: bool,
    },
    /// Intersect two cylinders `Z(alpha)` and `Z(beta)`.
    Cylinder {
        #[command(flatten)]
        fib: FibrationArg,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Compare with brute-force enumeration of common extensions.
        #[arg(long)]
        oracle: bool,
    },
    /// Germ groupoid computations on basis sets `Z(mu, nu)`.
    Germ {
        #[command(flatten)]
        fib: FibrationArg,
        #[arg(long, value_enum, default_value_t = GermOp::Enumerate)]
        op: GermOp,
        /// Basis sets written `Z(mu, nu)`; binary operations take two.
        #[arg(long)]
        cell: Vec<String>,
    },
    /// Symbolic computation with words such as `s(e1)*s(e2)^*`.
    Algebra {
        #[command(flatten)]
        fib: FibrationArg,
        /// A sum of words; products are written with `*`.
        #[arg(long)]
        word: Option<String>,
        /// Read the element from a JSON dump instead.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Decide equality with this word.
        #[arg(long)]
        compare: Option<String>,
        /// Apply the involution
        #[arg(long)]
        involute: bool,
        /// Refine by a base morphism.
        #[arg(long)]
        refine: Option<String>,
        /// Rewrite into a normal form
        #[arg(long)]
        normal_form: bool,
        /// Also report the image as a function on the germ groupoid.
        #[arg(long)]
        upsilon: bool,
        /// Compare the generators `s_alpha`, `s_beta` for `alpha,beta` pairs
        /// separated by `;`.
        #[arg(long)]
        probe: Option<String>,
    },
    /// Check the Cuntz-Krieger relations for a matrix assignment.
    RepCheck {
        #[command(flatten)]
        fib: FibrationArg,
        /// A JSON file of projections and isometries.
        #[arg(long)]
        matrices: Option<PathBuf>,
        /// Use a built-in representation instead.
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        /// Truncation degree for the truncated path representation.
        #[arg(long, default_value_t = 1)]
        truncate: u32,
        /// Comma-separated base morphisms for relation 6; an integer that is
        /// not a base morphism selects every base morphism of that level.
        #[arg(long)]
        degrees: Option<String>,
        /// Require exact equality.
        #[arg(long)]
        exact: bool,
    },
    /// The bundled examples.
    Examples {
        /// List names and descriptions (the default).
        #[arg(long)]
        list: bool,
        /// Print the bundle document of an example.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GermOp {
    Enumerate,
    Invert,
    Inclusion,
    Intersect,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Regular,
    Paths,
    Truncated,
}

/// A finished command: the report and whether the checked property held.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

fn load(fib: &FibrationArg, common: &Common) -> Result<Bundle> {
    let mut bundle = resolve(&fib.fibration)?;
    if common.budget != bundle.fibration.budget() {
        bundle.fibration = bundle.fibration.with_budget(common.budget);
    }
    Ok(bundle)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn parse_list(s: &str) -> Vec<&str> {
    split_top_level(s, ',')
        .into_iter()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

fn parse_degrees(f: &Fibration, s: &str) -> Result<Vec<MorphismId>> {
    let base = f.codomain();
    let mut out = Vec::new();
    for item in parse_list(s) {
        match base.parse_morphism(item) {
            Ok(m) => out.push(m),
            Err(err) => {
                let level: usize = item.parse().map_err(|_| err)?;
                out.extend(
                    base.morphisms(level)
                        .into_iter()
                        .filter(|m| base.level(m) == level),
                );
            }
        }
    }
    out.dedup();
    Ok(out)
}

fn validate(f: &Fibration, depth: usize) -> Outcome {
    let functor = validate_functor(f, depth);
    let dcf = check_dcf(f, depth);
    let row_finite = check_row_finite(f, depth);
    let surjective = check_strong_surjectivity(f, depth);
    let ore = check_ore(f.codomain(), depth);
    let flags = f.flags(depth);
    let passed = flags.functor_valid && flags.row_finite && flags.is_kpf();
    Outcome {
        report: json!({
            "flags": flags,
            "kpf": flags.is_kpf(),
            "functor": functor,
            "dcf": dcf,
            "row_finite": row_finite,
            "strong_surjectivity": surjective,
            "ore": ore,
        }),
        passed,
    }
}

fn fiber(f: &Fibration, object: &str, base: Option<&str>, depth: usize) -> Result<Outcome> {
    let x = f.domain().parse_object(object)?;
    let targets = match base {
        Some(b) => vec![f.codomain().parse_morphism(b)?],
        None => slice_objects(f, &x, depth)?,
    };
    let mut fibers = Vec::new();
    for b in targets {
        let lifts = f.enumerate_fiber(&x, &b)?;
        fibers.push(json!({
            "base": b.to_string(),
            "count": lifts.len(),
            "lifts": lifts.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome {
        report: json!({ "object": x.to_string(), "fibers": fibers }),
        passed: true,
    })
}

fn describe_path(x: &PathOracle, bases: &[MorphismId]) -> Result<Value> {
    let mut values = Map::new();
    for b in bases {
        values.insert(b.to_string(), json!(x.eval(b)?.to_string()));
    }
    Ok(json!({
        "label": x.label(),
        "target": x.target().to_string(),
        "certified_depth": x.certified_depth(),
        "values": values,
    }))
}

struct PathsRequest<'a> {
    path: &'a str,
    object: Option<&'a str>,
    eval: Option<&'a str>,
    scan: bool,
    enumerate: bool,
}

fn paths(bundle: &Bundle, req: PathsRequest<'_>, depth: usize) -> Result<Outcome> {
    let f = &bundle.fibration;
    let mut report = Map::new();
    if req.enumerate {
        let all = enumerate_all_paths(f)?;
        let mut listed = Vec::new();
        for x in &all {
            let bases = slice_objects(f, x.target(), depth)?;
            listed.push(describe_path(x, &bases)?);
        }
        report.insert("count".into(), json!(all.len()));
        report.insert("paths".into(), Value::Array(listed));
        return Ok(Outcome {
            report: Value::Object(report),
            passed: true,
        });
    }
    let x = match (req.path, req.object) {
        ("canonical", Some(obj)) => canonical_splitting(f, &f.domain().parse_object(obj)?, depth)?,
        (name, _) => bundle.path(name, depth)?,
    };
    let bases = match req.eval {
        Some(list) => parse_list(list)
            .into_iter()
            .map(|b| f.codomain().parse_morphism(b))
            .collect::<Result<Vec<_>>>()?,
        None => slice_objects(f, x.target(), depth)?,
    };
    report.insert("path".into(), describe_path(&x, &bases)?);
    if req.scan {
        report.insert(
            "aperiodicity".into(),
            to_value(&aperiodicity_scan(&x, depth)?),
        );
    }
    Ok(Outcome {
        report: Value::Object(report),
        passed: true,
    })
}

/// Common extensions `mu` of `alpha` and `beta` up to level `depth`, each of
/// which must extend one of the returned cells, and every cell must extend
/// both `alpha` and `beta`.
fn cylinder_oracle(
    f: &Fibration,
    alpha: &MorphismId,
    beta: &MorphismId,
    cells: &[MorphismId],
    depth: usize,
) -> Result<Value> {
    let e = f.domain();
    let mut mismatches = Vec::new();
    let extends = |m: &MorphismId, prefix: &MorphismId| -> Result<bool> {
        Ok(e.target(m)? == e.target(prefix)? && !e.divide_left(prefix, m)?.is_empty())
    };
    for c in cells {
        if !extends(c, alpha)? || !extends(c, beta)? {
            mismatches.push(format!("cell {c} does not extend both"));
        }
    }
    let level = if e.is_finite() {
        usize::MAX
    } else {
        e.level(alpha).max(e.level(beta)) + depth
    };
    let mut common = 0;
    for m in e.morphisms_into(&e.target(alpha)?, level) {
        if extends(&m, alpha)? && extends(&m, beta)? {
            common += 1;
            let mut covered = false;
            for c in cells {
                if extends(&m, c)? {
                    covered = true;
                    break;
                }
            }
            if !covered {
                mismatches.push(format!("common extension {m} is in no cell"));
            }
        }
    }
    Ok(json!({
        "level": if e.is_finite() { Value::Null } else { json!(level) },
        "common_extensions": common,
        "agrees": mismatches.is_empty(),
        "mismatches": mismatches,
    }))
}

fn cylinder(f: &Fibration, alpha: &str, beta: &str, oracle: bool, depth: usize) -> Result<Outcome> {
    let e = f.domain();
    let (a, b) = (e.parse_morphism(alpha)?, e.parse_morphism(beta)?);
    let cells = cylinder_intersection(f, &a, &b)?;
    let mut report = json!({
        "alpha": a.to_string(),
        "beta": b.to_string(),
        "cells": cells.iter().map(|c| format!("Z({c})")).collect::<Vec<_>>(),
        "empty": cells.is_empty(),
    });
    let mut passed = true;
    if oracle {
        let o = cylinder_oracle(f, &a, &b, &cells, depth)?;
        passed = o["agrees"] == json!(true);
        report["oracle"] = o;
    }
    Ok(Outcome { report, passed })
}

fn germ(f: &Fibration, op: GermOp, cells: &[String]) -> Result<Outcome> {
    let parsed = cells
        .iter()
        .map(|c| GermBasisSet::parse(f, c))
        .collect::<Result<Vec<_>>>()?;
    let need = |n: usize| -> Result<()> {
        if parsed.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "this operation takes {n} --cell arguments"
            )))
        }
    };
    let show = |cs: &[GermBasisSet]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let report = match op {
        GermOp::Enumerate => {
            let table = enumerate_germs(f)?;
            let mut doc = table.to_json();
            doc["count"] = json!(table.len());
            doc
        }
        GermOp::Invert => {
            need(1)?;
            json!({ "cell": parsed[0].to_string(), "inverse": parsed[0].invert().to_string() })
        }
        GermOp::Inclusion => {
            need(2)?;
            json!({
                "small": parsed[0].to_string(),
                "big": parsed[1].to_string(),
                "inclusion": basis_inclusion(f, &parsed[0], &parsed[1])?,
            })
        }
        GermOp::Intersect => {
            need(2)?;
            json!({ "cells": show(&intersect_basis(f, &parsed[0], &parsed[1])?) })
        }
        GermOp::Product => {
            need(2)?;
            json!({ "cells": show(&product_basis(f, &parsed[0], &parsed[1])?) })
        }
    };
    Ok(Outcome {
        report,
        passed: true,
    })
}

struct AlgebraRequest<'a> {
    word: Option<&'a str>,
    input: Option<&'a PathBuf>,
    compare: Option<&'a str>,
    involute: bool,
    refine: Option<&'a str>,
    normal_form: bool,
    upsilon: bool,
    probe: Option<&'a str>,
}

fn element_report(a: &AlgebraElement) -> Value {
    json!({ "text": a.to_string(), "element": a.to_json() })
}

fn algebra(f: &Fibration, req: AlgebraRequest<'_>, depth: usize) -> Result<Outcome> {
    let mut report = Map::new();
    let mut passed = true;
    if let Some(pairs) = req.probe {
        let e = f.domain();
        let mut parsed = Vec::new();
        for pair in pairs.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let parts = parse_list(pair);
            if parts.len() != 2 {
                return Err(Error::Parse(format!("expected alpha,beta in {pair}")));
            }
            parsed.push((e.parse_morphism(parts[0])?, e.parse_morphism(parts[1])?));
        }
        report.insert(
            "probe".into(),
            to_value(&injectivity_probe(f, &parsed, depth)?),
        );
    }
    let element = match (req.word, req.input) {
        (Some(w), None) => Some(AlgebraElement::parse(f, w)?),
        (None, Some(path)) => {
            let doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            Some(AlgebraElement::from_json(f, &doc)?)
        }
        (None, None) if req.probe.is_some() => None,
        _ => {
            return Err(Error::Parse(
                "give exactly one of --word and --input".into(),
            ))
        }
    };
    if let Some(mut a) = element {
        report.insert("input".into(), element_report(&a));
        if let Some(c) = req.refine {
            a = a.refine(&f.codomain().parse_morphism(c)?)?;
        }
        if req.involute {
            a = a.involute();
        }
        if req.normal_form {
            a = a.normal_form()?;
        }
        report.insert("result".into(), element_report(&a));
        if let Some(w) = req.compare {
            let b = AlgebraElement::parse(f, w)?;
            let verdict = a.equal(&b)?;
            passed = verdict == crate::span_sum::Verdict::Equal;
            report.insert(
                "compare".into(),
                json!({ "other": element_report(&b), "verdict": verdict }),
            );
        }
        if req.upsilon {
            let g = a.upsilon();
            report.insert(
                "upsilon".into(),
                json!({ "text": g.to_string(), "function": g.to_json() }),
            );
        }
    }
    Ok(Outcome {
        report: Value::Object(report),
        passed,
    })
}

struct RepRequest<'a> {
    matrices: Option<&'a PathBuf>,
    builtin: Option<Builtin>,
    truncate: u32,
    degrees: Option<&'a str>,
    exact: bool,
}

fn rep_check(f: &Fibration, req: RepRequest<'_>, tolerance: f64) -> Result<Outcome> {
    let mut rep = match (req.matrices, req.builtin) {
        (Some(path), None) => {
            let doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let mut rep = RepAssignment::from_json(f, &doc)?;
            if doc.get("tolerance").is_none() {
                rep.tolerance = tolerance;
            }
            rep
        }
        (None, Some(Builtin::Regular)) => {
            group_regular_representation(f)?.with_tolerance(tolerance)
        }
        (None, Some(Builtin::Paths)) => path_representation(f)?.with_tolerance(tolerance),
        (None, Some(Builtin::Truncated)) => {
            truncated_path_representation(f, req.truncate)?.with_tolerance(tolerance)
        }
        _ => {
            return Err(Error::Parse(
                "give exactly one of --matrices and --builtin".into(),
            ))
        }
    };
    if req.exact {
        rep.tolerance = 0.0;
    }
    let degrees = match req.degrees {
        Some(s) => parse_degrees(f, s)?,
        None if rep.approximate => Vec::new(),
        None => default_degrees(f),
    };
    let report = check_ck_relations(f, &rep, &degrees)?;
    Ok(Outcome {
        passed: report.passed,
        report: json!({ "basis": rep.basis, "report": report }),
    })
}

fn examples(show: Option<&str>) -> Result<Outcome> {
    if let Some(name) = show {
        let text = catalog::source(name)
            .ok_or_else(|| Error::Parse(format!("no bundled example named {name}")))?;
        let mut doc: Value = serde_json::from_str(text)?;
        doc["name"] = json!(name);
        return Ok(Outcome {
            report: doc,
            passed: true,
        });
    }
    let entries: Vec<Value> = catalog::descriptions()
        .into_iter()
        .map(|(n, d)| json!({ "name": n, "description": d }))
        .collect();
    Ok(Outcome {
        report: json!({ "examples": entries }),
        passed: true,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Fiber { .. } => "fiber",
        Command::Paths { .. } => "paths",
        Command::Cylinder { .. } => "cylinder",
        Command::Germ { .. } => "germ",
        Command::Algebra { .. } => "algebra",
        Command::RepCheck { .. } => "rep-check",
        Command::Examples { .. } => "examples",
    }
}

/// Runs a parsed command. Errors are input errors; a failed property is
/// reported through [`Outcome::passed`].
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let mut warnings: Vec<String> = Vec::new();
    let mut fibration_name = None;
    let mut with_bundle = |fib: &FibrationArg| -> Result<Bundle> {
        let b = load(fib, c)?;
        warnings.extend(b.warnings.iter().cloned());
        fibration_name = Some(b.fibration.name().to_string());
        Ok(b)
    };
    let outcome = match &cli.command {
        Command::Validate { fib } => validate(&with_bundle(fib)?.fibration, c.depth),
        Command::Fiber { fib, object, base } => fiber(
            &with_bundle(fib)?.fibration,
            object,
            base.as_deref(),
            c.depth,
        )?,
        Command::Paths {
            fib,
            path,
            object,
            eval,
            scan,
            enumerate,
        } => paths(
            &with_bundle(fib)?,
            PathsRequest {
                path,
                object: object.as_deref(),
                eval: eval.as_deref(),
                scan: *scan,
                enumerate: *enumerate,
            },
            c.depth,
        )?,
        Command::Cylinder {
            fib,
            alpha,
            beta,
            oracle,
        } => cylinder(&with_bundle(fib)?.fibration, alpha, beta, *oracle, c.depth)?,
        Command::Germ { fib, op, cell } => germ(&with_bundle(fib)?.fibration, *op, cell)?,
        Command::Algebra {
            fib,
            word,
            input,
            compare,
            involute,
            refine,
            normal_form,
            upsilon,
            probe,
        } => algebra(
            &with_bundle(fib)?.fibration,
            AlgebraRequest {
                word: word.as_deref(),
                input: input.as_ref(),
                compare: compare.as_deref(),
                involute: *involute,
                refine: refine.as_deref(),
                normal_form: *normal_form,
                upsilon: *upsilon,
                probe: probe.as_deref(),
            },
            c.depth,
        )?,
        Command::RepCheck {
            fib,
            matrices,
            builtin,
            truncate,
            degrees,
            exact,
        } => rep_check(
            &with_bundle(fib)?.fibration,
            RepRequest {
                matrices: matrices.as_ref(),
                builtin: *builtin,
                truncate: *truncate,
                degrees: degrees.as_deref(),
                exact: *exact,
            },
            c.tolerance,
        )?,
        Command::Examples { show, .. } => examples(show.as_deref())?,
    };
    let seed = std::env::var(SEED_VAR).ok();
    let report = json!({
        "command": command_name(&cli.command),
        "config": {
            "fibration": fibration_name,
            "depth": c.depth,
            "budget": c.budget,
            "tolerance": c.tolerance,
            "format": c.format,
            "seed": seed,
        },
        "passed": outcome.passed,
        "warnings": warnings,
        "result": outcome.report,
    });
    Ok(Outcome {
        report,
        passed: outcome.passed,
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        other => out.push(format!("{prefix}: {other}")),
    }
}

/// Renders a report in the requested format.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut lines = Vec::new();
            flatten("", report, &mut lines);
            lines.join("\n") + "\n"
        }
    }
}

/// Parses the arguments, runs the command and writes the report. Returns
/// the process exit code: 0 on success, 1 when a checked property fails, 2
/// on input errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let text = render(&outcome.report, cli.common.format);
            let written = match &cli.common.output {
                Some(path) => std::fs::write(path, &text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Outcome {
        let cli =
            Cli::try_parse_from(std::iter::once("conduche").chain(args.iter().copied())).unwrap();
        execute(&cli).unwrap()
    }

    #[test]
    fn validate_bundled_example() {
        let o = exec(&["validate", "--fibration", "o2", "--depth", "2"]);
        assert!(o.passed);
        assert_eq!(o.report["config"]["depth"], json!(2));
        assert_eq!(o.report["result"]["flags"]["dcf"], json!(true));
    }

    #[test]
    fn degrees_accept_levels_and_morphisms() {
        let f = catalog::by_name("2-graph").unwrap();
        let d = parse_degrees(&f, "1,(2,0)").unwrap();
        let shown: Vec<String> = d.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["(0,1)", "(1,0)", "(1,1)", "(2,0)"]);
    }

    #[test]
    fn reports_are_deterministic() {
        let args = [
            "algebra",
            "--fibration",
            "o2",
            "--word",
            "s(e1)*s(e2)^*",
            "--upsilon",
        ];
        assert_eq!(
            render(&exec(&args).report, Format::Json),
            render(&exec(&args).report, Format::Json)
        );
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(
            Cli::try_parse_from(["conduche", "validate", "--fibration", "o2", "--bogus"]).is_err()
        );
        assert_eq!(run(["conduche", "validate"]), 2);
    }
}
