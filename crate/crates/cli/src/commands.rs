use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use puiseux::analysis::trace_solution;
use puiseux::bounds::{bound_report_with, foliation_bound_check, BoundOptions};
use puiseux::corpus::{covered_corpus, differential_corpus, Bivariate};
use puiseux::parser::{parse_equation, parse_series};
use puiseux::render::{render, render_svg, Format, RenderOptions};
use puiseux::solver::{expand, DicriticalPolicy, ExpandOptions};
use puiseux::{CoveredEquation, Exponent, OperatorSpec, PuiseuxPoly, Scalar};

use crate::config::{compute, operator, usage, Backend, CliError, OpKind};
use crate::{Command, Global, Input};

pub enum Output {
    Json(Value),
    /// One JSON value per line.
    Lines(Vec<Value>),
    Text(String),
}

pub struct Outcome {
    pub output: Output,
    /// False when a verification ran but some inequality failed.
    pub pass: bool,
}

fn ok(output: Output) -> Outcome {
    Outcome { output, pass: true }
}

/// Reads a text input; lines starting with `#` are comments.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    let raw = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(raw
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ")
        .trim()
        .to_string())
}

fn input_text(i: &Input) -> Result<String, CliError> {
    match (&i.eq, &i.text) {
        (Some(p), None) => read_text(p),
        (None, Some(t)) => Ok(t.clone()),
        _ => Err(usage("give exactly one of --eq FILE or --text EQUATION")),
    }
}

fn solution_text(path: &Option<PathBuf>, text: &Option<String>) -> Result<Option<String>, CliError> {
    match (path, text) {
        (Some(p), None) => read_text(p).map(Some),
        (None, Some(t)) => Ok(Some(t.clone())),
        (None, None) => Ok(None),
        _ => Err(usage("give at most one of --solution FILE or --series TEXT")),
    }
}

/// In `quadratic:d` mode every coefficient must lie in ℚ(√d).
fn check_field<S: Scalar>(backend: Backend, values: impl IntoIterator<Item = S>) -> Result<(), CliError> {
    if let Backend::Quadratic { d } = backend {
        for v in values {
            let e = v.extension();
            if e != 0 && e != d {
                return Err(usage(format!("coefficient {} is not in Q(sqrt({d}))", v.literal())));
            }
        }
    }
    Ok(())
}

fn equation<S: Scalar>(g: &Global, text: &str, op: OperatorSpec<S>) -> Result<CoveredEquation<S>, CliError> {
    let p = parse_equation::<S>(text, op).map_err(|e| usage(format!("equation: {e}")))?;
    check_field(g.backend, p.a().values().chain(p.b().values()).cloned())?;
    for w in p.validate().warnings {
        crate::log(g, &format!("warning: {w}"));
    }
    Ok(p)
}

fn series<S: Scalar>(g: &Global, text: &str) -> Result<PuiseuxPoly<S>, CliError> {
    let s = parse_series::<S>(text).map_err(|e| usage(format!("series: {e}")))?;
    check_field(g.backend, s.terms().map(|(_, c)| c.clone()))?;
    Ok(s)
}

fn global_op<S: Scalar>(g: &Global) -> Result<OperatorSpec<S>, CliError> {
    operator(g.op, g.q.as_deref(), g.q_root.as_deref())
}

fn exponent_json(e: Exponent) -> Value {
    json!([e.numer(), e.denom()])
}

pub fn run<S: Scalar>(g: &Global, cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Parse { input } => {
            let p = equation::<S>(g, &input_text(input)?, global_op(g)?)?;
            let cloud: Vec<Value> = p
                .cloud()
                .iter()
                .map(|c| json!({"at": [c.abscissa().numer(), c.abscissa().denom(), c.j], "in_a": c.in_a, "in_b": c.in_b}))
                .collect();
            Ok(ok(Output::Json(json!({
                "equation": p.render(),
                "operator": op_json(p.op()),
                "ramification": p.ram(),
                "nu0": p.nu0().ok().map(exponent_json),
                "covered": p.validate(),
                "cloud": cloud,
            }))))
        }
        Command::Polygon { input, mu, series: s } => {
            let p = equation::<S>(g, &input_text(input)?, global_op(g)?)?;
            let poly = p.newton_polygon().map_err(compute)?;
            let sides: Vec<Value> = poly
                .sides()
                .iter()
                .map(|sd| {
                    json!({
                        "mu": exponent_json(sd.mu),
                        "left": [sd.left.0.numer(), sd.left.0.denom(), sd.left.1],
                        "right": [sd.right.0.numer(), sd.right.0.denom(), sd.right.1],
                    })
                })
                .collect();
            let vertices: Vec<Value> =
                poly.vertices().iter().map(|v| json!([v.0.numer(), v.0.denom(), v.1])).collect();
            let elements = mu.iter().map(|&m| p.element(m).map(|e| json!(e))).collect::<Result<Vec<_>, _>>().map_err(compute)?;
            let mut out = json!({
                "vertices": vertices,
                "sides": sides,
                "height": poly.height(),
                "elements": elements,
            });
            if let Some(t) = s {
                let s = series::<S>(g, t)?;
                out["relative_height"] = json!(p.relative_height(&s).map_err(compute)?);
            }
            Ok(ok(Output::Json(out)))
        }
        Command::Expand { input, order, max_ram, dicritical, max_jets } => {
            let p = equation::<S>(g, &input_text(input)?, global_op(g)?)?;
            let mut opts = ExpandOptions::new(*order);
            opts.max_ramification = *max_ram;
            opts.max_jets = *max_jets;
            opts.dicritical = match dicritical.as_str() {
                "param" => DicriticalPolicy::Param,
                d => match d.strip_prefix("sample:").and_then(|n| n.parse::<u32>().ok()) {
                    Some(n) => DicriticalPolicy::Sample(n),
                    None => return Err(usage(format!("--dicritical '{d}' is neither param nor sample:N"))),
                },
            };
            let jets = expand(&p, &opts).map_err(compute)?;
            crate::log(g, &format!("{} jets", jets.len()));
            Ok(ok(Output::Json(Value::Array(jets.iter().map(|j| j.to_json()).collect()))))
        }
        Command::Trace { input, solution, series: st, steps } => {
            let p = equation::<S>(g, &input_text(input)?, global_op(g)?)?;
            let text = solution_text(solution, st)?.ok_or_else(|| usage("trace needs --solution or --series"))?;
            let s = series::<S>(g, &text)?;
            let t = trace_solution(&p, &s, *steps).map_err(compute)?;
            crate::log(g, &format!("{} steps over n = {}", t.steps.len(), t.n));
            Ok(ok(Output::Lines(t.steps.iter().map(|r| r.to_json()).collect())))
        }
        Command::Verify { fixture, input, solution, series: st, strictness, search_length, transcendental } => {
            let opts = BoundOptions { search_length: *search_length, transcendental: *transcendental };
            if !fixture.is_empty() {
                return verify_fixtures::<S>(g, fixture, &opts, *strictness);
            }
            let text = input_text(input)?;
            let sol = solution_text(solution, st)?.ok_or_else(|| usage("verify needs --fixture, or an equation and --solution"))?;
            let p = equation::<S>(g, &text, global_op(g)?)?;
            let s = series::<S>(g, &sol)?;
            let (report, pass) = equation_report(&p, &s, &opts, *strictness)?;
            Ok(Outcome { output: Output::Json(report), pass })
        }
        Command::CorpusGen { seed, genus, count, max_ram, out } => {
            let op = global_op::<S>(g)?;
            let entries = if op.is_differential() {
                differential_corpus::<S>(*seed, *count, *genus, *max_ram)
            } else {
                covered_corpus::<S>(&op, *seed, *count, *genus, *max_ram)
            };
            fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
            let mut files = Vec::new();
            for (i, e) in entries.iter().enumerate() {
                let mut v = e.to_json();
                if let Some(r) = &g.q_root {
                    v["q_root"] = json!(r);
                }
                let name = format!("{:04}.json", i);
                let path = out.join(&name);
                let body = serde_json::to_string_pretty(&v).map_err(compute)? + "\n";
                fs::write(&path, body).map_err(|e| compute(format!("{}: {e}", path.display())))?;
                files.push(name);
            }
            crate::log(g, &format!("wrote {} fixtures to {}", files.len(), out.display()));
            Ok(ok(Output::Json(json!({"out": out, "count": files.len(), "files": files}))))
        }
        Command::Render { input, format, lines, title, solution, series: st } => {
            let p = equation::<S>(g, &input_text(input)?, global_op(g)?)?;
            let fmt: Format = format.parse().map_err(usage)?;
            let sol = solution_text(solution, st)?;
            let text = match (sol, fmt) {
                // One panel per P_k along the solution.
                (Some(sol), Format::Svg) => {
                    let s = series::<S>(g, &sol)?;
                    let t = trace_solution(&p, &s, None).map_err(compute)?;
                    let panels: Vec<(String, CoveredEquation<S>)> =
                        t.equations.iter().enumerate().skip(1).map(|(k, e)| (format!("P{k}"), e.clone())).collect();
                    render_svg(&panels, lines).map_err(compute)?
                }
                (Some(_), _) => return Err(usage("--solution panels are only rendered as svg")),
                (None, _) => {
                    let opts = RenderOptions { lines: lines.clone(), title: title.clone() };
                    render(&p, fmt, &opts).map_err(compute)?
                }
            };
            Ok(ok(Output::Text(text)))
        }
    }
}

fn op_json<S: Scalar>(op: &OperatorSpec<S>) -> Value {
    json!({
        "kind": if op.is_differential() { "diff" } else { "q" },
        "q": op.q().map(|q| q.literal()),
        "q_root": op.fixed_root().map(|(n, r)| format!("{n}:{}", r.literal())),
    })
}

fn equation_report<S: Scalar>(
    p: &CoveredEquation<S>,
    s: &PuiseuxPoly<S>,
    opts: &BoundOptions,
    strict: bool,
) -> Result<(Value, bool), CliError> {
    let t = trace_solution(p, s, None).map_err(compute)?;
    let rep = bound_report_with(p, s, &t, opts).map_err(compute)?;
    let pass = rep.pass(strict);
    let mut v = rep.to_json();
    v["pass"] = json!(pass);
    if !strict {
        v["strictness"] = Value::Null;
    }
    Ok((v, pass))
}

fn fixture_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut v: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            v.sort();
            out.extend(v);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(usage(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(out)
}

fn str_field<'a>(v: &'a Value, key: &str, path: &Path) -> Result<Option<&'a str>, CliError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(usage(format!("{}: field '{key}' must be a string", path.display()))),
    }
}

/// Runs one fixture: an equation with its solution, or a 1-form `a dx + b dy`
/// with an invariant branch.
fn verify_one<S: Scalar>(
    g: &Global,
    path: &Path,
    opts: &BoundOptions,
    strict: bool,
) -> Result<(Value, bool), CliError> {
    let raw = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&raw).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let need = |key: &str| -> Result<&str, CliError> {
        str_field(&v, key, path)?.ok_or_else(|| usage(format!("{}: missing field '{key}'", path.display())))
    };
    let s = series::<S>(g, need("solution")?)?;
    if v.get("a").is_some() {
        let form = |key: &str| -> Result<Bivariate<S>, CliError> {
            let p = equation::<S>(g, need(key)?, OperatorSpec::differential())?;
            if !p.b().is_empty() {
                return Err(usage(format!("{}: '{key}' may not contain y1", path.display())));
            }
            Ok(Bivariate::new(p.a().clone()))
        };
        let seed = v.get("seed").and_then(Value::as_u64).unwrap_or(0);
        let rep = foliation_bound_check(&form("a")?, &form("b")?, &s, seed).map_err(compute)?;
        return Ok((rep.to_json(), rep.pass));
    }
    let op = match str_field(&v, "op", path)? {
        None => global_op::<S>(g)?,
        Some("diff") => OperatorSpec::differential(),
        Some("q") => operator(OpKind::Q, str_field(&v, "q", path)?, str_field(&v, "q_root", path)?)?,
        Some(o) => return Err(usage(format!("{}: unknown op '{o}'", path.display()))),
    };
    let p = equation::<S>(g, need("equation")?, op)?;
    let (mut report, mut pass) = equation_report(&p, &s, opts, strict)?;
    // Fixtures store the data relative to the grid of P, as the report does.
    if let Some(expected) = v.get("characteristic") {
        let same = report.get("characteristic") == Some(expected);
        report["characteristic_matches_fixture"] = json!(same);
        pass &= same;
    }
    Ok((report, pass))
}

fn verify_fixtures<S: Scalar>(
    g: &Global,
    paths: &[PathBuf],
    opts: &BoundOptions,
    strict: bool,
) -> Result<Outcome, CliError> {
    let files = fixture_files(paths)?;
    if files.len() == 1 && paths.len() == 1 && paths[0].is_file() {
        let (mut rep, pass) = verify_one::<S>(g, &files[0], opts, strict)?;
        rep["fixture"] = json!(files[0]);
        return Ok(Outcome { output: Output::Json(rep), pass });
    }
    let mut reports = Vec::new();
    let mut checks = 0;
    let mut failed = Vec::new();
    for f in &files {
        let (mut rep, pass) = verify_one::<S>(g, f, opts, strict)?;
        checks += rep.get("checks").and_then(Value::as_array).map_or(1, |c| c.len());
        if !pass {
            failed.push(json!(f));
            crate::log(g, &format!("FAIL {}", f.display()));
        }
        rep["fixture"] = json!(f);
        reports.push(rep);
    }
    crate::log(g, &format!("{} fixtures, {} checks, {} failing", files.len(), checks, failed.len()));
    let pass = failed.is_empty();
    Ok(Outcome {
        output: Output::Json(json!({
            "fixtures": files.len(),
            "checks": checks,
            "failed": failed,
            "pass": pass,
            "reports": reports,
        })),
        pass,
    })
}
