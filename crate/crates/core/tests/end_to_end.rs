//! Full runs against an external SMT solver (`ARA_SOLVER`, default `z3`).
//! Tests return early with a note when no solver can be started.

use std::path::PathBuf;

use ara::annotation::{AnnotatedSignatureTable, Annotation, Rational};
use ara::constraint::{solve, Assignment, ConstraintProblem, Poly, SolveOutcome, SolverConfig};
use ara::inference::{analyse, AnalysisOptions, Mode};
use ara::report::{run, solve_analysis, RunConfig, Status};
use ara::trs::{enumerate_constructor_terms, parse_trs, Substitution, Trs};
use num::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SOLVED: [(&str, usize); 5] = [
    ("queue", 1),
    ("3.42", 1),
    ("double", 1),
    ("append_reverse", 2),
    ("insertionsort", 2),
];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.trs"))
}

fn solver() -> Option<SolverConfig> {
    let config = SolverConfig::from_env();
    match solve(&ConstraintProblem::new(1, "probe"), &config) {
        Ok(_) => Some(config),
        Err(e) => {
            eprintln!("skipping: {e}");
            None
        }
    }
}

#[test]
fn fixtures_reach_their_degree_and_verify() {
    let Some(solver) = solver() else { return };
    for (name, degree) in SOLVED {
        let mut config = RunConfig::new(fixture(name));
        config.solver = solver.clone();
        let report = run(&config);
        assert_eq!(
            report.status,
            Status::Bounded(degree),
            "{name}: {:?}",
            report.attempts
        );
        let verification = report.verification.as_ref().unwrap();
        assert!(verification.passed(), "{name}");
        assert!(verification.soundness.terms_checked > 0, "{name}");
        assert!(report.attempts.iter().all(|a| a.degree <= degree));
    }
}

fn ann(problem: &ConstraintProblem, model: &Assignment, polys: &[Poly]) -> Annotation {
    Annotation::new(
        polys
            .iter()
            .map(|p| problem.eval(p, model).unwrap())
            .collect(),
    )
    .unwrap()
}

fn solved(
    trs: &Trs,
    degree: usize,
    solver: &SolverConfig,
) -> (
    ara::inference::Analysis,
    Assignment,
    AnnotatedSignatureTable,
) {
    let analysis = analyse(
        trs,
        &AnalysisOptions {
            cost_free: degree >= 2,
            ..AnalysisOptions::new(degree)
        },
    )
    .unwrap();
    let (outcome, _) = solve_analysis(&analysis, trs, solver).unwrap();
    let SolveOutcome::Sat(model) = outcome else {
        panic!("no model at degree {degree}")
    };
    let table = analysis.problem.concretise(&model).unwrap();
    (analysis, model, table)
}

/// For every standard rule obligation, the potential of the instantiated
/// left-hand side arguments equals the potential freed for the variables plus
/// the freed constant.
#[test]
fn freed_potential_matches_lhs_potential() {
    let Some(solver) = solver() else { return };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, degree) in SOLVED {
        let trs = parse_trs(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let (analysis, model, table) = solved(&trs, degree, &solver);
        let p = &analysis.problem;
        let values = enumerate_constructor_terms(&trs, 5);
        for ob in analysis
            .obligations
            .iter()
            .filter(|o| o.mode == Mode::Standard)
        {
            let lhs = &trs.rules()[ob.rule].lhs;
            for _ in 0..40 {
                let sigma: Substitution = lhs
                    .vars()
                    .into_iter()
                    .map(|x| (x, values.choose(&mut rng).unwrap().clone()))
                    .collect();
                let left = lhs
                    .args()
                    .iter()
                    .zip(&ob.decl_args)
                    .map(|(l, q)| {
                        table
                            .potential(&l.substitute(&sigma), &ann(p, &model, q))
                            .unwrap()
                    })
                    .fold(Rational::zero(), |a, b| a + b);
                let freed = ob
                    .freed
                    .iter()
                    .map(|(x, q)| table.potential(&sigma[x], &ann(p, &model, q)).unwrap())
                    .fold(p.eval(&ob.freed_cost, &model).unwrap(), |a, b| a + b);
                assert_eq!(left, freed, "{name} rule {} under {sigma:?}", ob.rule + 1);
            }
        }
    }
}

#[test]
fn constraint_generation_is_deterministic() {
    for (name, degree) in SOLVED {
        let trs = parse_trs(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let opts = AnalysisOptions {
            cost_free: true,
            ..AnalysisOptions::new(degree)
        };
        let a = analyse(&trs, &opts).unwrap();
        let b = analyse(&trs, &opts).unwrap();
        assert_eq!(
            ara::constraint::emit_smtlib(&a.problem),
            ara::constraint::emit_smtlib(&b.problem),
            "{name}"
        );
    }
}

#[test]
fn relative_insertionsort_selects_strict_rules() {
    let Some(solver) = solver() else { return };
    let mut config = RunConfig::new(fixture("insertionsort"));
    config.solver = solver;
    config.relative = true;
    config.max_degree = 2;
    let report = run(&config);
    assert!(
        matches!(report.status, Status::Bounded(_)),
        "{:?}",
        report.attempts
    );
    let selected = report.selected_rules.unwrap();
    assert!(!selected.is_empty());
    let trs = parse_trs(&std::fs::read_to_string(fixture("insertionsort")).unwrap()).unwrap();
    assert!(selected.iter().all(|&i| trs.rules()[i - 1].strict));
}
