use super::*;
use crate::annotation::{rat, Annotation, SignatureDecl};
use crate::trs::{parse_trs, terms_by_size, Symbol};

const QUEUE: &str = include_str!("../../fixtures/queue.trs");

fn decl(args: &[i64], result: i64, cost: i64) -> SignatureDecl {
    SignatureDecl::new(
        args.iter().map(|&a| Annotation::from_ints(&[a])).collect(),
        Annotation::from_ints(&[result]),
        rat(cost),
    )
    .unwrap()
}

fn base(args: &[i64], cost: i64) -> Vec<SignatureDecl> {
    vec![decl(args, 1, cost)]
}

fn queue_table(enq_arg: i64, enq_cost: i64) -> AnnotatedSignatureTable {
    let mut t = AnnotatedSignatureTable::new(1);
    let main = [
        ("enq", decl(&[enq_arg], 7, enq_cost)),
        ("rev", decl(&[1], 0, 4)),
        ("rev'", decl(&[1, 0], 0, 2)),
        ("snoc", decl(&[7, 0], 7, 14)),
        ("head", decl(&[11], 0, 9)),
        ("tail", decl(&[11], 1, 3)),
        ("checkF", decl(&[7], 7, 5)),
    ];
    for (f, d) in main {
        t.main.insert(Symbol::new(f), d);
    }
    t.bases.insert(Symbol::new("queue"), base(&[0, 1], 1));
    t.bases.insert(Symbol::new("cons"), base(&[0, 1], 1));
    t.bases.insert(Symbol::new("S"), base(&[1], 1));
    for c in ["nil", "0", "errorHead", "errorTail"] {
        t.bases.insert(Symbol::new(c), base(&[], 0));
    }
    t
}

fn s(n: usize) -> Term {
    (0..n).fold(Term::constant("0"), |t, _| Term::app("S", vec![t]))
}

#[test]
fn enq_budget_matches_hand_computation() {
    let t = Term::app("enq", vec![s(2)]);
    assert_eq!(term_budget(&queue_table(15, 12), &t).unwrap(), rat(42));
}

#[test]
fn normal_form_start_terms_have_no_steps() {
    let trs = parse_trs(QUEUE).unwrap();
    let t = Term::app("head", vec![Term::constant("nil")]);
    let r = check_term(&trs, &queue_table(15, 12), &t, DEFAULT_BUDGET).unwrap();
    assert!(r.passed());
    assert_eq!(r.max_slack, Some(rat(9)));
}

#[test]
fn queue_model_is_sound_on_small_terms() {
    let trs = parse_trs(QUEUE).unwrap();
    let r = verify_soundness(&trs, &queue_table(15, 12), 6, DEFAULT_BUDGET).unwrap();
    assert!(r.passed(), "{:?}", r.violations.first());
    assert!(r.terms_checked > 0);
    assert!(r.max_slack.unwrap() >= rat(0));
}

#[test]
fn underpriced_model_is_caught() {
    let trs = parse_trs(QUEUE).unwrap();
    let r = verify_soundness(&trs, &queue_table(0, 0), 5, DEFAULT_BUDGET).unwrap();
    assert!(!r.passed());
    assert!(r
        .violations
        .iter()
        .all(|v| v.term.root() == Some(&Symbol::new("enq"))));
}

#[test]
fn profile_classes_agree_with_direct_enumeration() {
    let table = queue_table(15, 12);
    let symbols: Vec<(Symbol, usize)> = table
        .bases
        .iter()
        .map(|(c, b)| (c.clone(), b[0].args.len()))
        .collect();
    let naive = terms_by_size(&symbols, 7);
    let levels = profile_levels(&table, 7);
    for size in 1..=7 {
        let count: u128 = levels[size].values().map(|c| c.count).sum();
        assert_eq!(count, naive[size].len() as u128, "size {size}");
        let q = Annotation::from_ints(&[3]);
        let direct: BTreeSet<Rational> = naive[size]
            .iter()
            .map(|t| table.potential(t, &q).unwrap())
            .collect();
        let grouped: BTreeSet<Rational> = levels[size].keys().map(|p| dot(&q, p)).collect();
        assert_eq!(direct, grouped, "size {size}");
        for (profile, class) in &levels[size] {
            assert_eq!(&table.potential_profile(&class.witness).unwrap(), profile);
        }
    }
}

#[test]
fn list_potential_is_linear_in_length() {
    let mut t = AnnotatedSignatureTable::new(1);
    t.main.insert(Symbol::new("f"), decl(&[5], 0, 0));
    t.bases.insert(Symbol::new("nil"), base(&[], 0));
    t.bases.insert(Symbol::new("a"), base(&[], 0));
    t.bases.insert(Symbol::new("cons"), base(&[0, 1], 1));
    let r = verify_potential_bound(&t, 10);
    assert!(r.passed());
    let list = (0..4).fold(Term::constant("nil"), |l, _| {
        Term::app("cons", vec![Term::constant("a"), l])
    });
    assert_eq!(
        t.potential(&list, &Annotation::from_ints(&[5])).unwrap(),
        rat(20)
    );
}

#[test]
fn queue_model_meets_polynomial_bound() {
    let r = verify_potential_bound(&queue_table(15, 12), 10);
    assert!(r.passed(), "{:?}", r.failures.first());
    assert_eq!(r.annotations, 5);
}

#[test]
fn doubling_successor_breaks_the_bound() {
    let mut t = AnnotatedSignatureTable::new(1);
    t.main.insert(Symbol::new("f"), decl(&[1], 0, 0));
    t.bases.insert(Symbol::new("0"), base(&[], 0));
    t.bases.insert(Symbol::new("S"), base(&[2], 1));
    let r = verify_potential_bound(&t, 10);
    let sizes: BTreeSet<usize> = r.failures.iter().map(|f| f.term.size()).collect();
    assert_eq!(sizes, (4..=10).collect());
    let worst = r.failures.iter().find(|f| f.term.size() == 10).unwrap();
    assert_eq!(worst.potential, rat(511));
}

#[test]
fn growth_table_for_empty_system_is_zero() {
    let trs = parse_trs("(RULES)").unwrap();
    let rows = fit_empirical_degree(&trs, 4, DEFAULT_BUDGET);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.terms == 0 && r.max_strict_steps == 0));
}

#[test]
fn queue_growth_is_monotone() {
    let trs = parse_trs(QUEUE).unwrap();
    let rows = fit_empirical_degree(&trs, 6, DEFAULT_BUDGET);
    assert!(rows
        .windows(2)
        .all(|w| w[0].max_strict_steps <= w[1].max_strict_steps));
    assert!(rows.iter().all(|r| r.exhausted == 0));
    assert!(rows[5].max_strict_steps > 0);
}
