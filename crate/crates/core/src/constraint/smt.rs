//! SMT-LIB2 emission, solver subprocess and model parsing.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use num::{BigInt, Signed, Zero};
use thiserror::Error;
use wait_timeout::ChildExt;

use super::{Assignment, Constraint, ConstraintProblem, Poly};
use crate::annotation::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{path}`: {source}")]
    Spawn {
        path: String,
        source: std::io::Error,
    },
    #[error("solver I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse solver output: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    /// Replaces `(check-sat)` for nonlinear problems.
    pub nonlinear_check: Option<String>,
}

impl SolverConfig {
    /// Solver from `ARA_SOLVER` (default `z3`); z3 reads the script from stdin with `-in`.
    pub fn from_env() -> SolverConfig {
        let path = std::env::var("ARA_SOLVER").unwrap_or_else(|_| "z3".to_string());
        SolverConfig::for_path(&path)
    }

    pub fn for_path(path: &str) -> SolverConfig {
        let z3 = is_z3(path);
        SolverConfig {
            path: path.to_string(),
            args: if z3 {
                vec!["-in".to_string()]
            } else {
                Vec::new()
            },
            timeout: Duration::from_secs(60),
            nonlinear_check: z3.then(|| "(check-sat-using (then simplify smt))".to_string()),
        }
    }
}

fn is_z3(path: &str) -> bool {
    let name = std::path::Path::new(path)
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or(path);
    name.starts_with("z3")
}

fn real(q: &Rational) -> String {
    let lit = |n: &BigInt| format!("{n}.0");
    let body = if q.denom() == &BigInt::from(1) {
        lit(&q.numer().abs())
    } else {
        format!("(/ {} {})", lit(&q.numer().abs()), lit(q.denom()))
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn quote(name: &str) -> String {
    format!("|{name}|")
}

fn term(problem: &ConstraintProblem, p: &Poly) -> String {
    let mut parts = Vec::new();
    for (m, c) in p.terms() {
        let mut factors: Vec<String> = Vec::new();
        if m.is_empty() || c != &Rational::from_integer(BigInt::from(1)) {
            factors.push(real(c));
        }
        factors.extend(m.iter().map(|v| quote(problem.var_name(*v))));
        parts.push(if factors.len() == 1 {
            factors.remove(0)
        } else {
            format!("(* {})", factors.join(" "))
        });
    }
    match parts.len() {
        0 => "0.0".to_string(),
        1 => parts.remove(0),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn constraint(problem: &ConstraintProblem, c: &Constraint) -> String {
    match c {
        Constraint::Cmp(a, r, b) => {
            format!("({} {} {})", r.symbol(), term(problem, a), term(problem, b))
        }
        Constraint::Or(cs) => {
            let parts: Vec<String> = cs.iter().map(|c| constraint(problem, c)).collect();
            format!("(or {})", parts.join(" "))
        }
        Constraint::And(cs) => {
            let parts: Vec<String> = cs.iter().map(|c| constraint(problem, c)).collect();
            format!("(and {})", parts.join(" "))
        }
    }
}

/// Byte-deterministic SMT-LIB2 script: logic, declarations, non-negativity,
/// one assertion per atom, `check-sat`, `get-model`.
pub fn emit_smtlib(problem: &ConstraintProblem) -> String {
    emit_smtlib_with(problem, "(check-sat)")
}

/// As [`emit_smtlib`] with a custom satisfiability command.
pub fn emit_smtlib_with(problem: &ConstraintProblem, check: &str) -> String {
    let mut out = String::new();
    let logic = if problem.linear_only() {
        "QF_LRA"
    } else {
        "QF_NRA"
    };
    let _ = writeln!(out, "(set-logic {logic})");
    for v in problem.vars() {
        let _ = writeln!(out, "(declare-fun {} () Real)", quote(&v.name));
    }
    for v in problem.vars() {
        let _ = writeln!(out, "(assert (>= {} 0.0))", quote(&v.name));
    }
    for a in problem.atoms() {
        let _ = writeln!(out, "; {}", a.label.replace('\n', " "));
        let _ = writeln!(out, "(assert {})", constraint(problem, &a.constraint));
    }
    out.push_str(check);
    out.push_str("\n(get-model)\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                out.push(c.to_string());
                chars.next();
            }
            ';' => while chars.next().is_some_and(|c| c != '\n') {},
            '|' => {
                chars.next();
                let mut s = String::from("|");
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '|' {
                        break;
                    }
                }
                out.push(s);
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '"' {
                        break;
                    }
                }
                out.push(s);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push(s);
            }
        }
    }
    out
}

fn parse_sexps(tokens: &[String]) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced `)`")?
                    .push(Sexp::List(done));
            }
            _ => stack
                .last_mut()
                .expect("non-empty")
                .push(Sexp::Atom(t.clone())),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().expect("one level"))
}

fn eval_value(e: &Sexp) -> Result<Rational, String> {
    match e {
        Sexp::Atom(a) => parse_rational(a).ok_or_else(|| format!("not a rational literal: {a}")),
        Sexp::List(items) => {
            let Some(Sexp::Atom(op)) = items.first() else {
                return Err("empty value".into());
            };
            let args: Vec<Rational> = items[1..]
                .iter()
                .map(eval_value)
                .collect::<Result<_, _>>()?;
            match (op.as_str(), args.as_slice()) {
                ("-", [x]) => Ok(-x.clone()),
                ("-", [x, rest @ ..]) => Ok(rest.iter().fold(x.clone(), |a, b| a - b)),
                ("+", xs) => Ok(xs.iter().fold(Rational::zero(), |a, b| a + b)),
                ("*", xs) => Ok(xs
                    .iter()
                    .fold(Rational::from_integer(BigInt::from(1)), |a, b| a * b)),
                ("/", [x, y]) if !y.is_zero() => Ok(x / y),
                _ => Err(format!("unsupported value expression `{op}`")),
            }
        }
    }
}

fn unquote(s: &str) -> String {
    s.strip_prefix('|')
        .and_then(|s| s.strip_suffix('|'))
        .unwrap_or(s)
        .to_string()
}

fn collect_defs(e: &Sexp, out: &mut Assignment) -> Result<(), String> {
    if let Sexp::List(items) = e {
        if let [Sexp::Atom(head), Sexp::Atom(name), Sexp::List(params), _sort, value] =
            items.as_slice()
        {
            if head == "define-fun" && params.is_empty() {
                out.insert(unquote(name), eval_value(value)?);
                return Ok(());
            }
        }
        for item in items {
            collect_defs(item, out)?;
        }
    }
    Ok(())
}

/// Parses `sat`/`unsat`/`unknown` followed by an optional model. Values may be
/// integers, decimals, `(/ a b)` and `(- x)`. Values the model leaves out stay
/// out of the returned assignment.
pub fn parse_solver_output(text: &str) -> Result<SolveOutcome, SolverError> {
    let exprs = parse_sexps(&tokenize(text)).map_err(SolverError::Parse)?;
    let Some(Sexp::Atom(status)) = exprs.first() else {
        return Err(SolverError::Parse(format!(
            "no status line in {:?}",
            text.lines().next().unwrap_or("")
        )));
    };
    match status.as_str() {
        "unsat" => Ok(SolveOutcome::Unsat),
        "unknown" => Ok(SolveOutcome::Unknown("solver answered unknown".into())),
        "sat" => {
            let mut model = Assignment::new();
            for e in &exprs[1..] {
                collect_defs(e, &mut model).map_err(SolverError::Parse)?;
            }
            Ok(SolveOutcome::Sat(model))
        }
        other => Err(SolverError::Parse(format!(
            "unexpected solver status `{other}`"
        ))),
    }
}

/// Runs the external solver on the emitted script and re-checks any model in
/// exact arithmetic. Timeouts and models that fail the re-check are `Unknown`.
pub fn solve(
    problem: &ConstraintProblem,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    let script = match &config.nonlinear_check {
        Some(check) if !problem.linear_only() => emit_smtlib_with(problem, check),
        _ => emit_smtlib(problem),
    };
    let mut child = Command::new(&config.path)
        .args(&config.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn {
            path: config.path.clone(),
            source,
        })?;
    let start = Instant::now();
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || -> std::io::Result<()> {
        stdin.write_all(script.as_bytes())?;
        Ok(())
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let status = child.wait_timeout(config.timeout)?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        return Ok(SolveOutcome::Unknown(format!(
            "timeout after {:.1}s",
            start.elapsed().as_secs_f64()
        )));
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if out.trim().is_empty() {
        return Err(SolverError::Parse(format!(
            "solver produced no output; stderr: {}",
            err.trim()
        )));
    }
    let parsed = match parse_solver_output(&out) {
        // e.g. algebraic numbers in nonlinear models
        Err(SolverError::Parse(msg)) if out.trim_start().starts_with("sat") => {
            return Ok(SolveOutcome::Unknown(format!("unreadable model: {msg}")))
        }
        r => r?,
    };
    match parsed {
        SolveOutcome::Sat(model) => {
            let full = problem.complete_assignment(&model);
            let check = problem.check_assignment(&full);
            if check.ok {
                Ok(SolveOutcome::Sat(full))
            } else {
                let (_, label) = check.failing.unwrap_or_default();
                Ok(SolveOutcome::Unknown(format!(
                    "model fails exact re-check at `{label}`"
                )))
            }
        }
        other => Ok(other),
    }
}
