use super::*;
use crate::annotation::rat;
use crate::constraint::Assignment;
use crate::trs::parse_trs;

const QUEUE: &str = include_str!("../../fixtures/queue.trs");

fn queue() -> Trs {
    parse_trs(QUEUE).unwrap()
}

fn set_decl(a: &mut Assignment, prefix: &str, args: &[i64], result: i64, cost: i64) {
    for (i, v) in args.iter().enumerate() {
        a.insert(format!("{prefix}.arg{i}[0]"), rat(*v));
    }
    a.insert(format!("{prefix}.res[0]"), rat(result));
    a.insert(format!("{prefix}.cost"), rat(cost));
}

fn set_base(a: &mut Assignment, c: &str, args: &[i64], cost: i64) {
    for (i, v) in args.iter().enumerate() {
        a.insert(format!("{c}#b1.arg{i}[0]"), rat(*v));
    }
    a.insert(format!("{c}#b1.cost"), rat(cost));
}

/// The reference operator annotations, completed with base annotations for
/// the constructors and an annotation for `checkF`.
fn queue_model(enq_arg: i64) -> Assignment {
    let mut a = Assignment::new();
    set_decl(&mut a, "enq#main", &[enq_arg], 7, 12);
    set_decl(&mut a, "rev#main", &[1], 0, 4);
    set_decl(&mut a, "rev'#main", &[1, 0], 0, 2);
    set_decl(&mut a, "snoc#main", &[7, 0], 7, 14);
    set_decl(&mut a, "head#main", &[11], 0, 9);
    set_decl(&mut a, "tail#main", &[11], 1, 3);
    set_decl(&mut a, "checkF#main", &[7], 7, 5);
    set_base(&mut a, "queue", &[0, 1], 1);
    set_base(&mut a, "cons", &[0, 1], 1);
    set_base(&mut a, "S", &[1], 1);
    for c in ["nil", "0", "errorHead", "errorTail"] {
        set_base(&mut a, c, &[], 0);
    }
    a
}

#[test]
fn reference_queue_annotations_are_a_model() {
    let trs = queue();
    let an = analyse(&trs, &AnalysisOptions::new(1)).unwrap();
    let model = an.problem.complete_assignment(&queue_model(15));
    let check = an.problem.check_assignment(&model);
    assert!(check.ok, "{:?}", check.failing);
}

#[test]
fn enq_rule_budget_is_tight() {
    let trs = queue();
    let an = analyse(&trs, &AnalysisOptions::new(1)).unwrap();
    let model = an.problem.complete_assignment(&queue_model(15));
    let ob = an
        .obligations
        .iter()
        .find(|o| o.rule == 5 && o.mode == Mode::Standard)
        .unwrap();
    let ev = |p: &Poly| an.problem.eval(p, &model).unwrap();
    assert_eq!(ev(&ob.freed_cost), rat(15));
    assert_eq!(ev(&ob.freed[&Symbol::new("n")][0]), rat(15));
    assert_eq!(ev(&ob.rhs_cost), rat(26));
    assert_eq!(ev(&ob.rhs_context[&Symbol::new("n")][0]), rat(15));
    assert_eq!(ev(&ob.budget), rat(26));
    assert_eq!(ob.tree.children.last().unwrap().rule, "share");
}

#[test]
fn smaller_enq_argument_fails_at_its_own_rule() {
    let trs = queue();
    let an = analyse(&trs, &AnalysisOptions::new(1)).unwrap();
    let model = an.problem.complete_assignment(&queue_model(14));
    let (_, label) = an.problem.check_assignment(&model).failing.unwrap();
    assert!(label.starts_with("rule 6 "), "{label}");
    assert!(label.ends_with(": budget"), "{label}");
}

#[test]
fn direct_application_to_fresh_variables() {
    let trs = parse_trs("(VAR x y)\n(RULES f(x,y) -> g(y,x)\n g(x,y) -> x)").unwrap();
    let an = analyse(&trs, &AnalysisOptions::new(2)).unwrap();
    let rhs = an.obligations[0].tree.children.last().unwrap();
    assert_eq!(rhs.rule, "app");
    assert!(rhs.children.is_empty());
}

#[test]
fn sharing_sums_contexts() {
    let trs = parse_trs("(VAR x)\n(RULES d(x) -> p(x,x)\n p(x,y) -> x)").unwrap();
    let an = analyse(&trs, &AnalysisOptions::new(1)).unwrap();
    let ob = &an.obligations[0];
    assert_eq!(ob.tree.children.last().unwrap().rule, "share");
    let p = &an.problem.table.main[&Symbol::new("p")];
    assert_eq!(
        ob.rhs_context[&Symbol::new("x")][0],
        &p.args[0][0] + &p.args[1][0]
    );
}

#[test]
fn constructor_like_symbols_are_freed_through_their_bases() {
    let trs = parse_trs("(VAR x)\n(RULES f(g(x)) -> x\n g(x) -> x)").unwrap();
    let an = analyse(&trs, &AnalysisOptions::new(1)).unwrap();
    let p = &an.problem;
    let base = Poly::var(p.var("g#b1.arg0[0]").unwrap());
    let arg = Poly::var(p.var("f#main.arg0[0]").unwrap());
    let ob = &an.obligations[0];
    assert_eq!(ob.freed[&Symbol::new("x")][0], &base * &arg);
    assert!(p.first_atom_labelled("dominate g cost").is_some());
}

#[test]
fn atoms_stay_quadratic() {
    for src in [
        QUEUE,
        include_str!("../../fixtures/3.42.trs"),
        include_str!("../../fixtures/insertionsort.trs"),
    ] {
        let trs = parse_trs(src).unwrap();
        for d in 1..=3 {
            for cost_free in [false, true] {
                let opts = AnalysisOptions {
                    degree: d,
                    heuristic: HeuristicMode::None,
                    cost_free,
                    relative: trs.has_weak_rules(),
                };
                let an = analyse(&trs, &opts).unwrap();
                for atom in an.problem.atoms() {
                    assert!(atom.constraint.degree() <= 2, "{}", atom.label);
                }
            }
        }
    }
}

#[test]
fn heuristic_mode_uses_constant_bases() {
    let trs = queue();
    for h in [HeuristicMode::Shift, HeuristicMode::Interleave] {
        let opts = AnalysisOptions {
            degree: 2,
            heuristic: h,
            cost_free: false,
            relative: false,
        };
        let an = analyse(&trs, &opts).unwrap();
        assert_eq!(an.heuristic, h);
        assert!(an.problem.vars().iter().all(|v| !v.name.contains("#b")));
        assert!(an.problem.linear_only());
    }
}

#[test]
fn ambiguous_sorts_fall_back_to_base_vectors() {
    let trs = parse_trs("(VAR x)\n(RULES f(s(x)) -> f(x))").unwrap();
    let opts = AnalysisOptions {
        degree: 1,
        heuristic: HeuristicMode::Shift,
        cost_free: false,
        relative: false,
    };
    let an = analyse(&trs, &opts).unwrap();
    assert_eq!(an.heuristic, HeuristicMode::None);
    assert_eq!(an.diagnostics.len(), 1);
}

#[test]
fn relative_mode_adds_selectors_for_strict_rules() {
    let trs = parse_trs(include_str!("../../fixtures/insertionsort.trs")).unwrap();
    let opts = AnalysisOptions {
        degree: 1,
        heuristic: HeuristicMode::None,
        cost_free: false,
        relative: true,
    };
    let an = analyse(&trs, &opts).unwrap();
    let strict = trs.rules().iter().filter(|r| r.strict).count();
    assert_eq!(an.selectors.len(), strict);
    assert!(an
        .problem
        .first_atom_labelled("some strict rule is counted")
        .is_some());
}

#[test]
fn cost_free_obligations_cover_callees() {
    let trs = queue();
    let opts = AnalysisOptions {
        degree: 2,
        heuristic: HeuristicMode::None,
        cost_free: true,
        relative: false,
    };
    let an = analyse(&trs, &opts).unwrap();
    for f in an.problem.table.cost_free.keys() {
        let n = an
            .obligations
            .iter()
            .filter(|o| o.mode == Mode::CostFree && trs.rules()[o.rule].root() == f)
            .count();
        assert_eq!(n, trs.rules_for(f).len(), "{f}");
    }
    assert!(an.problem.table.cost_free.contains_key(&Symbol::new("enq")));
}

#[test]
fn app_rule_selection() {
    let trs = queue();
    let calls = CallGraph::new(&trs);
    let enq = Symbol::new("enq");
    let snoc = Symbol::new("snoc");
    assert_eq!(
        select_app_rule(&trs, &calls, &enq, &enq, true, false),
        AppRule::CostFree
    );
    assert_eq!(
        select_app_rule(&trs, &calls, &enq, &enq, false, false),
        AppRule::Standard
    );
    assert_eq!(
        select_app_rule(&trs, &calls, &enq, &enq, true, true),
        AppRule::Standard
    );
    assert_eq!(
        select_app_rule(&trs, &calls, &enq, &snoc, true, false),
        AppRule::Standard
    );
}

#[test]
fn zero_degree_is_rejected() {
    assert_eq!(
        analyse(&queue(), &AnalysisOptions::new(0)).unwrap_err(),
        InferenceError::ZeroDegree
    );
}
