//! Degree search, verification and the machine-readable report.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use crate::annotation::{
    rational_string, AnnotatedSignatureTable, Annotation, Rational, SignatureDecl,
};
use crate::constraint::{solve, Assignment, HeuristicMode, SolveOutcome, SolverConfig};
use crate::inference::{analyse, Analysis, AnalysisOptions, Mode};
use crate::trs::{parse_trs, Term, Trs};
use crate::validator::{
    fit_empirical_degree, verify_potential_bound, verify_soundness, GrowthRow,
    PotentialBoundReport, VerificationReport, DEFAULT_BUDGET,
};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub max_degree: usize,
    pub heuristic: HeuristicMode,
    /// `None`: off for degree 1, on from degree 2.
    pub cost_free: Option<bool>,
    pub relative: bool,
    pub solver: SolverConfig,
    /// Maximal start-term size for verification; 0 skips it.
    pub verify_size: usize,
    pub verify_budget: u64,
    pub json_out: Option<PathBuf>,
    pub explain: bool,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            input_path: input_path.into(),
            max_degree: 3,
            heuristic: HeuristicMode::None,
            cost_free: None,
            relative: false,
            solver: SolverConfig::from_env(),
            verify_size: 6,
            verify_budget: DEFAULT_BUDGET,
            json_out: None,
            explain: false,
        }
    }

    pub fn cost_free_at(&self, degree: usize) -> bool {
        self.cost_free.unwrap_or(degree >= 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Bounded(usize),
    Maybe,
    InputError(String),
    SolverError(String),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Bounded(_) => "BOUNDED",
            Status::Maybe => "MAYBE",
            Status::InputError(_) => "INPUT_ERROR",
            Status::SolverError(_) => "SOLVER_ERROR",
        }
    }
}

pub fn exit_code(status: &Status) -> i32 {
    match status {
        Status::Bounded(_) => 0,
        Status::Maybe => 1,
        Status::InputError(_) => 2,
        Status::SolverError(_) => 3,
    }
}

#[derive(Clone, Debug)]
pub struct DegreeAttempt {
    pub degree: usize,
    pub cost_free: bool,
    pub heuristic: HeuristicMode,
    pub variables: usize,
    pub atoms: usize,
    pub linear_only: bool,
    pub outcome: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub max_size: usize,
    pub budget: u64,
    pub soundness: VerificationReport,
    pub potential_bound: PotentialBoundReport,
    pub growth: Vec<GrowthRow>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.soundness.passed() && self.potential_bound.passed()
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub input: String,
    pub status: Status,
    pub attempts: Vec<DegreeAttempt>,
    pub signatures: Option<AnnotatedSignatureTable>,
    /// Relative mode: 1-based indices of the strict rules that are counted.
    pub selected_rules: Option<Vec<usize>>,
    pub diagnostics: Vec<String>,
    pub verification: Option<Verification>,
    pub explanation: Vec<String>,
}

impl AnalysisReport {
    fn failed(input: &str, status: Status) -> AnalysisReport {
        AnalysisReport {
            input: input.to_string(),
            status,
            attempts: Vec::new(),
            signatures: None,
            selected_rules: None,
            diagnostics: Vec::new(),
            verification: None,
            explanation: Vec::new(),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        match self.status {
            Status::Bounded(d) => Some(d),
            _ => None,
        }
    }

    pub fn summary(&self) -> String {
        match &self.status {
            Status::Bounded(d) => {
                format!("BOUNDED: O(n^{d}) innermost runtime (amortised certificate)")
            }
            Status::Maybe => match self.attempts.last() {
                Some(a) => format!("MAYBE: no certificate up to degree {}", a.degree),
                None => "MAYBE".to_string(),
            },
            Status::InputError(m) => format!("INPUT_ERROR: {m}"),
            Status::SolverError(m) => format!("SOLVER_ERROR: {m}"),
        }
    }
}

/// The degree certified by a solved table: the longest argument annotation
/// of a main declaration.
pub fn certified_degree(table: &AnnotatedSignatureTable) -> usize {
    table
        .main
        .values()
        .flat_map(|d| d.args.iter().map(Annotation::len))
        .max()
        .unwrap_or(0)
}

/// Nonlinear problems in base-vector mode are first tried with the uniform
/// base guess fixed, which leaves a linear problem; a model found that way is
/// re-checked against the full problem.
const WARM_START_LIMIT: Duration = Duration::from_secs(10);

pub fn solve_analysis(
    analysis: &Analysis,
    trs: &Trs,
    solver: &SolverConfig,
) -> Result<(SolveOutcome, bool), String> {
    let problem = &analysis.problem;
    if problem.atoms().is_empty() {
        return Ok((
            SolveOutcome::Sat(problem.complete_assignment(&Assignment::new())),
            false,
        ));
    }
    if !problem.linear_only() {
        if let Some(guess) = analysis.uniform_base_guess(trs) {
            let fixed = problem.with_fixed(&guess);
            let mut quick = solver.clone();
            quick.timeout = quick.timeout.min(WARM_START_LIMIT);
            if let SolveOutcome::Sat(model) = solve(&fixed, &quick).map_err(|e| e.to_string())? {
                let full = problem.complete_assignment(&model);
                if problem.check_assignment(&full).ok {
                    return Ok((SolveOutcome::Sat(full), true));
                }
            }
        }
    }
    solve(problem, solver)
        .map(|o| (o, false))
        .map_err(|e| e.to_string())
}

pub fn run(config: &RunConfig) -> AnalysisReport {
    let input = config.input_path.display().to_string();
    let text = match std::fs::read_to_string(&config.input_path) {
        Ok(t) => t,
        Err(e) => {
            return AnalysisReport::failed(
                &input,
                Status::InputError(format!("cannot read {input}: {e}")),
            )
        }
    };
    let trs = match parse_trs(&text) {
        Ok(t) => t,
        Err(e) => {
            return AnalysisReport::failed(&input, Status::InputError(format!("{input}: {e}")))
        }
    };
    run_trs(&trs, &input, config)
}

pub fn run_trs(trs: &Trs, input: &str, config: &RunConfig) -> AnalysisReport {
    let mut report = AnalysisReport::failed(input, Status::Maybe);
    if config.max_degree == 0 {
        report.status = Status::InputError("maximal degree must be at least 1".into());
        return report;
    }
    for d in 1..=config.max_degree {
        let options = AnalysisOptions {
            degree: d,
            heuristic: config.heuristic,
            cost_free: config.cost_free_at(d),
            relative: config.relative,
        };
        let analysis = match analyse(trs, &options) {
            Ok(a) => a,
            Err(e) => {
                report.status = Status::InputError(e.to_string());
                return report;
            }
        };
        for m in &analysis.diagnostics {
            if !report.diagnostics.contains(m) {
                report.diagnostics.push(m.clone());
            }
        }
        let problem = &analysis.problem;
        let start = Instant::now();
        let outcome = solve_analysis(&analysis, trs, &config.solver);
        let mut attempt = DegreeAttempt {
            degree: d,
            cost_free: options.cost_free,
            heuristic: analysis.heuristic,
            variables: problem.vars().len(),
            atoms: problem.atoms().len(),
            linear_only: problem.linear_only(),
            outcome: String::new(),
            seconds: start.elapsed().as_secs_f64(),
        };
        let model = match outcome {
            Err(e) => {
                attempt.outcome = "error".into();
                report.attempts.push(attempt);
                report.status = Status::SolverError(e);
                return report;
            }
            Ok((SolveOutcome::Unsat, _)) => {
                attempt.outcome = "unsat".into();
                report.attempts.push(attempt);
                continue;
            }
            Ok((SolveOutcome::Unknown(why), _)) => {
                attempt.outcome = format!("unknown: {why}");
                report.attempts.push(attempt);
                continue;
            }
            Ok((SolveOutcome::Sat(model), warm)) => {
                attempt.outcome = if warm {
                    "sat (uniform bases)".into()
                } else {
                    "sat".into()
                };
                model
            }
        };
        report.attempts.push(attempt);
        let table = match problem.concretise(&model) {
            Ok(t) => t,
            Err(e) => {
                report.status = Status::SolverError(format!("model cannot be read back: {e}"));
                return report;
            }
        };
        let counted: Trs = if config.relative {
            let selected: Vec<usize> = analysis
                .selectors
                .iter()
                .filter(|(_, name)| {
                    model
                        .get(name)
                        .is_some_and(|v| *v == Rational::from_integer(1.into()))
                })
                .map(|(i, _)| *i)
                .collect();
            report.selected_rules = Some(selected.iter().map(|i| i + 1).collect());
            trs.with_counted_rules(|i| selected.contains(&i))
        } else {
            trs.clone()
        };
        if config.explain {
            let show = |p: &crate::constraint::Poly| {
                problem
                    .eval(p, &model)
                    .map(|v| rational_string(&v))
                    .unwrap_or_else(|e| e)
            };
            for ob in &analysis.obligations {
                let kind = if ob.mode == Mode::CostFree {
                    "cost-free "
                } else {
                    ""
                };
                report.explanation.push(format!(
                    "{kind}rule {}: {}\n{}",
                    ob.rule + 1,
                    trs.rules()[ob.rule],
                    ob.tree.render_with(&show)
                ));
            }
        }
        report.status = Status::Bounded(certified_degree(&table));
        if config.verify_size > 0 {
            let verification = match verify_soundness(
                &counted,
                &table,
                config.verify_size,
                config.verify_budget,
            ) {
                Ok(soundness) => Verification {
                    max_size: config.verify_size,
                    budget: config.verify_budget,
                    soundness,
                    potential_bound: verify_potential_bound(&table, config.verify_size),
                    growth: fit_empirical_degree(
                        &counted,
                        config.verify_size,
                        config.verify_budget,
                    ),
                },
                Err(e) => {
                    report.status = Status::SolverError(format!("model cannot be evaluated: {e}"));
                    return report;
                }
            };
            if !verification.passed() {
                report
                    .diagnostics
                    .push("empirical verification found a violation; certificate withdrawn".into());
                report.status = Status::Maybe;
            }
            report.verification = Some(verification);
        }
        report.signatures = Some(table);
        return report;
    }
    report
}

fn rat_json(q: &Rational) -> Value {
    Value::String(rational_string(q))
}

fn annotation_json(a: &Annotation, degree: usize) -> Value {
    Value::Array(a.padded(degree).iter().map(rat_json).collect())
}

fn decl_json(d: &SignatureDecl, degree: usize) -> Value {
    json!({
        "args": d.args.iter().map(|a| annotation_json(a, degree)).collect::<Vec<_>>(),
        "result": annotation_json(&d.result, degree),
        "cost": rat_json(&d.cost),
    })
}

fn table_json(t: &AnnotatedSignatureTable) -> Value {
    let decls = |m: &std::collections::BTreeMap<_, SignatureDecl>| {
        let mut out = Map::new();
        for (f, d) in m {
            out.insert(crate::trs::Symbol::to_string(f), decl_json(d, t.degree));
        }
        Value::Object(out)
    };
    let mut bases = Map::new();
    for (c, bs) in &t.bases {
        bases.insert(
            c.to_string(),
            Value::Array(bs.iter().map(|d| decl_json(d, t.degree)).collect()),
        );
    }
    json!({ "main": decls(&t.main), "costFree": decls(&t.cost_free), "bases": bases })
}

fn terms_json(ts: &[Term]) -> Value {
    Value::Array(ts.iter().map(|t| Value::String(t.to_string())).collect())
}

fn verification_json(v: &Verification) -> Value {
    let s = &v.soundness;
    let p = &v.potential_bound;
    json!({
        "maxSize": v.max_size,
        "budget": v.budget,
        "passed": v.passed(),
        "soundness": {
            "termsChecked": s.terms_checked,
            "maxSlack": s.max_slack.as_ref().map(rat_json),
            "violations": s.violations.iter().map(|x| json!({
                "term": x.term.to_string(),
                "strictSteps": x.strict_steps,
                "budget": rat_json(&x.budget),
            })).collect::<Vec<_>>(),
            "budgetExhausted": terms_json(&s.budget_exhausted),
        },
        "potentialBound": {
            "termsCovered": p.terms_covered.to_string(),
            "profilesChecked": p.profiles_checked,
            "annotations": p.annotations,
            "failures": p.failures.iter().map(|f| json!({
                "term": f.term.to_string(),
                "annotation": f.annotation.entries().iter().map(rat_json).collect::<Vec<_>>(),
                "potential": rat_json(&f.potential),
                "bound": rat_json(&f.bound),
            })).collect::<Vec<_>>(),
        },
        "growth": v.growth.iter().map(|r| json!({
            "size": r.size,
            "terms": r.terms,
            "maxStrictSteps": r.max_strict_steps,
            "exhausted": r.exhausted,
        })).collect::<Vec<_>>(),
    })
}

pub fn report_json(report: &AnalysisReport) -> Value {
    let message = match &report.status {
        Status::InputError(m) | Status::SolverError(m) => Some(m.clone()),
        _ => None,
    };
    let attempts: Vec<Value> = report
        .attempts
        .iter()
        .map(|a| {
            json!({
                "degree": a.degree,
                "costFree": a.cost_free,
                "heuristic": a.heuristic.name(),
                "variables": a.variables,
                "atoms": a.atoms,
                "linearOnly": a.linear_only,
                "outcome": a.outcome,
                "seconds": a.seconds,
            })
        })
        .collect();
    let constraints = report.attempts.last().map(
        |a| json!({ "variables": a.variables, "atoms": a.atoms, "linearOnly": a.linear_only }),
    );
    json!({
        "input": report.input,
        "status": report.status.name(),
        "degree": report.degree(),
        "message": message,
        "summary": report.summary(),
        "attempts": attempts,
        "constraints": constraints,
        "signatures": report.signatures.as_ref().map(table_json),
        "selectedRules": report.selected_rules,
        "diagnostics": report.diagnostics,
        "verification": report.verification.as_ref().map(verification_json),
    })
}

pub fn write_report(report: &AnalysisReport, path: &Path) -> std::io::Result<()> {
    let mut text =
        serde_json::to_string_pretty(&report_json(report)).expect("JSON values serialise");
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::rat;

    fn config(path: &str) -> RunConfig {
        let mut c = RunConfig::new(path);
        c.solver = SolverConfig::for_path("/nonexistent/solver");
        c
    }

    #[test]
    fn exit_codes_follow_status() {
        assert_eq!(exit_code(&Status::Bounded(1)), 0);
        assert_eq!(exit_code(&Status::Maybe), 1);
        assert_eq!(exit_code(&Status::InputError(String::new())), 2);
        assert_eq!(exit_code(&Status::SolverError(String::new())), 3);
    }

    #[test]
    fn syntax_errors_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.trs");
        std::fs::write(&p, "(VAR x)\n(RULES f(x -> x)").unwrap();
        let r = run(&config(p.to_str().unwrap()));
        let Status::InputError(m) = &r.status else {
            panic!("{:?}", r.status)
        };
        assert!(m.contains("at 2:12"), "{m}");
    }

    #[test]
    fn missing_solver_is_a_solver_error() {
        let trs = parse_trs("(VAR x)\n(RULES f(s(x)) -> f(x))").unwrap();
        let r = run_trs(&trs, "t", &config("t"));
        assert!(matches!(r.status, Status::SolverError(_)), "{:?}", r.status);
    }

    #[test]
    fn empty_system_needs_no_solver() {
        let trs = parse_trs("(RULES)").unwrap();
        let r = run_trs(&trs, "t", &config("t"));
        assert_eq!(r.status, Status::Bounded(0));
        assert!(r.verification.unwrap().passed());
    }

    #[test]
    fn cost_free_default_depends_on_degree() {
        let mut c = config("t");
        assert!(!c.cost_free_at(1));
        assert!(c.cost_free_at(2));
        c.cost_free = Some(true);
        assert!(c.cost_free_at(1));
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let mut table = AnnotatedSignatureTable::new(1);
        table.main.insert(
            crate::trs::Symbol::new("f"),
            SignatureDecl::new(
                vec![Annotation::from_ints(&[2])],
                Annotation::empty(),
                crate::annotation::ratio(3, 2),
            )
            .unwrap(),
        );
        let mut r = AnalysisReport::failed("x.trs", Status::Bounded(1));
        r.signatures = Some(table);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_report(&r, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v, report_json(&r));
        assert_eq!(v["signatures"]["main"]["f"]["cost"], "3/2");
        assert_eq!(v["signatures"]["main"]["f"]["args"][0][0], "2/1");
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(text.find("\"attempts\"").unwrap() < text.find("\"verification\"").unwrap());
        assert_eq!(v["degree"], 1);
    }

    #[test]
    fn maybe_report_has_null_signatures() {
        let v = report_json(&AnalysisReport::failed("x", Status::Maybe));
        assert!(v["signatures"].is_null());
        assert!(v["verification"].is_null());
        assert_eq!(v["status"], "MAYBE");
    }

    #[test]
    fn certified_degree_ignores_trailing_zeros() {
        let mut t = AnnotatedSignatureTable::new(3);
        t.main.insert(
            crate::trs::Symbol::new("f"),
            SignatureDecl::new(
                vec![Annotation::new(vec![rat(1), rat(2), rat(0)]).unwrap()],
                Annotation::empty(),
                rat(0),
            )
            .unwrap(),
        );
        assert_eq!(certified_degree(&t), 2);
    }
}
