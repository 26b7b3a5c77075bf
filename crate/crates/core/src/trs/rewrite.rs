//! Innermost relative rewriting on ground terms.
//!
//! One step rewrites a redex whose arguments are normal forms of R ∪ S; the
//! step is tagged `1` when the applied rule is strict and `0` when it is weak.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{Substitution, Term, Trs};

/// Upper bound on distinct terms visited from a single start term.
const MAX_STATES: usize = 250_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationResult {
    /// Maximal number of strict steps over the explored derivations.
    pub max_strict_steps: u64,
    /// Some derivation exceeded the step budget, looped, or the state space was too large.
    pub exhausted: bool,
    pub normal_forms: BTreeSet<Term>,
}

fn root_reducts(t: &Term, trs: &Trs, out: &mut Vec<(Term, u8)>) -> bool {
    let Some(f) = t.root() else { return false };
    let mut any = false;
    for &i in trs.rules_for(f) {
        let rule = &trs.rules()[i];
        let mut sigma = Substitution::new();
        if rule.lhs.matches(t, &mut sigma) {
            any = true;
            out.push((rule.rhs.substitute(&sigma), u8::from(rule.strict)));
        }
    }
    any
}

/// Returns whether `t` is a normal form and collects its one-step reducts.
fn successors_into(t: &Term, trs: &Trs, out: &mut Vec<(Term, u8)>) -> bool {
    let Term::App(f, args) = t else { return true };
    let mut args_nf = true;
    for (i, a) in args.iter().enumerate() {
        let mut inner = Vec::new();
        if !successors_into(a, trs, &mut inner) {
            args_nf = false;
            for (s, c) in inner {
                let mut new_args = args.clone();
                new_args[i] = s;
                out.push((Term::App(f.clone(), new_args), c));
            }
        }
    }
    if !args_nf {
        return false;
    }
    !root_reducts(t, trs, out)
}

/// All one-step innermost reducts of a ground term, deduplicated, in a
/// deterministic order. Empty iff `t` is a normal form of R ∪ S.
pub fn innermost_successors(t: &Term, trs: &Trs) -> Vec<(Term, u8)> {
    let mut out = Vec::new();
    successors_into(t, trs, &mut out);
    let mut seen = HashSet::new();
    out.retain(|s| seen.insert(s.clone()));
    out
}

pub fn is_normal_form(t: &Term, trs: &Trs) -> bool {
    let mut sink = Vec::new();
    successors_into(t, trs, &mut sink)
}

#[derive(Clone, Copy)]
struct Longest {
    strict: u64,
    total: u64,
}

struct Frame {
    term: Term,
    succs: Vec<(Term, u8)>,
    next: usize,
    best: Longest,
    strict_so_far: u64,
}

/// Explores every innermost derivation from `t` by memoised depth-first search.
///
/// `budget` bounds the length (strict plus weak steps) of any derivation. When a
/// derivation exceeds it, cycles, or too many states are reached, exploration
/// stops with `exhausted = true` and `max_strict_steps` is a lower bound.
pub fn explore_derivations(t: &Term, trs: &Trs, budget: u64) -> ExplorationResult {
    let mut memo: HashMap<Term, Longest> = HashMap::new();
    let mut on_path: HashSet<Term> = HashSet::new();
    let mut normal_forms = BTreeSet::new();
    let mut observed = 0u64;
    let mut exhausted = false;

    let root_succs = innermost_successors(t, trs);
    if root_succs.is_empty() {
        normal_forms.insert(t.clone());
        return ExplorationResult {
            max_strict_steps: 0,
            exhausted: false,
            normal_forms,
        };
    }
    on_path.insert(t.clone());
    let mut stack = vec![Frame {
        term: t.clone(),
        succs: root_succs,
        next: 0,
        best: Longest {
            strict: 0,
            total: 0,
        },
        strict_so_far: 0,
    }];

    'search: while let Some(top) = stack.last_mut() {
        if top.next < top.succs.len() {
            let (succ, cost) = top.succs[top.next].clone();
            top.next += 1;
            let cost = u64::from(cost);
            let depth = stack.len() as u64;
            let here = stack.last().map(|f| f.strict_so_far).unwrap_or(0) + cost;
            if let Some(l) = memo.get(&succ).copied() {
                observed = observed.max(here + l.strict);
                if depth + l.total > budget {
                    exhausted = true;
                    break 'search;
                }
                let top = stack.last_mut().expect("non-empty");
                top.best.strict = top.best.strict.max(cost + l.strict);
                top.best.total = top.best.total.max(1 + l.total);
                continue;
            }
            if on_path.contains(&succ) || depth > budget || memo.len() >= MAX_STATES {
                exhausted = true;
                break 'search;
            }
            let succs = innermost_successors(&succ, trs);
            if succs.is_empty() {
                observed = observed.max(here);
                memo.insert(
                    succ.clone(),
                    Longest {
                        strict: 0,
                        total: 0,
                    },
                );
                normal_forms.insert(succ);
                let top = stack.last_mut().expect("non-empty");
                top.best.strict = top.best.strict.max(cost);
                top.best.total = top.best.total.max(1);
                continue;
            }
            on_path.insert(succ.clone());
            stack.push(Frame {
                term: succ,
                succs,
                next: 0,
                best: Longest {
                    strict: 0,
                    total: 0,
                },
                strict_so_far: here,
            });
        } else {
            let done = stack.pop().expect("non-empty");
            on_path.remove(&done.term);
            if let Some(parent) = stack.last_mut() {
                let cost = done.strict_so_far - parent.strict_so_far;
                parent.best.strict = parent.best.strict.max(cost + done.best.strict);
                parent.best.total = parent.best.total.max(1 + done.best.total);
            } else {
                observed = observed.max(done.best.strict);
            }
            memo.insert(done.term, done.best);
        }
    }

    ExplorationResult {
        max_strict_steps: observed,
        exhausted,
        normal_forms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trs::parse_trs;

    const QUEUE: &str = include_str!("../../fixtures/queue.trs");

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn nat(n: usize) -> Term {
        (0..n).fold(c("0"), |t, _| Term::app("S", vec![t]))
    }

    #[test]
    fn rev_nil_steps_to_rev_prime() {
        let trs = parse_trs(QUEUE).unwrap();
        let t = Term::app("rev", vec![c("nil")]);
        assert_eq!(
            innermost_successors(&t, &trs),
            vec![(Term::app("rev'", vec![c("nil"), c("nil")]), 1)]
        );
    }

    #[test]
    fn constructor_term_is_normal() {
        let trs = parse_trs(QUEUE).unwrap();
        assert!(innermost_successors(&c("nil"), &trs).is_empty());
        assert!(is_normal_form(&c("nil"), &trs));
    }

    #[test]
    fn strict_and_weak_reducts_are_tagged() {
        let trs = parse_trs("(RULES a -> b a ->= c)").unwrap();
        assert_eq!(
            innermost_successors(&c("a"), &trs),
            vec![(c("b"), 1), (c("c"), 0)]
        );
    }

    #[test]
    fn only_innermost_redexes_are_contracted() {
        let trs = parse_trs("(VAR x) (RULES f(x) -> x g(x) -> x)").unwrap();
        let t = Term::app("f", vec![Term::app("g", vec![c("a")])]);
        assert_eq!(
            innermost_successors(&t, &trs),
            vec![(Term::app("f", vec![c("a")]), 1)]
        );
    }

    #[test]
    fn rev_singleton_takes_three_strict_steps() {
        let trs = parse_trs(QUEUE).unwrap();
        let t = Term::app("rev", vec![Term::app("cons", vec![c("a"), c("nil")])]);
        let res = explore_derivations(&t, &trs, 10_000);
        assert_eq!(res.max_strict_steps, 3);
        assert!(!res.exhausted);
        let expected: BTreeSet<_> = [Term::app("cons", vec![c("a"), c("nil")])]
            .into_iter()
            .collect();
        assert_eq!(res.normal_forms, expected);
    }

    #[test]
    fn normal_form_has_zero_steps() {
        let trs = parse_trs(QUEUE).unwrap();
        let res = explore_derivations(&c("nil"), &trs, 10);
        assert_eq!(res.max_strict_steps, 0);
        assert!(!res.exhausted);
    }

    /// Unmemoised maximum over all derivations.
    fn naive_max_strict(t: &Term, trs: &Trs) -> u64 {
        innermost_successors(t, trs)
            .into_iter()
            .map(|(s, c)| u64::from(c) + naive_max_strict(&s, trs))
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn enq_two_terminates_within_budget() {
        let trs = parse_trs(QUEUE).unwrap();
        let t = Term::app("enq", vec![nat(2)]);
        let res = explore_derivations(&t, &trs, 10_000);
        assert!(!res.exhausted);
        assert_eq!(res.max_strict_steps, naive_max_strict(&t, &trs));
        assert!(res.max_strict_steps > 0);
    }

    #[test]
    fn memoised_search_agrees_with_naive_search() {
        let trs = parse_trs(include_str!("../../fixtures/3.42.trs")).unwrap();
        for n in 0..5 {
            for f in ["conv", "half", "lastbit"] {
                let t = Term::app(f, vec![nat(n)]);
                assert_eq!(
                    explore_derivations(&t, &trs, 10_000).max_strict_steps,
                    naive_max_strict(&t, &trs)
                );
            }
        }
    }

    #[test]
    fn weak_loops_exhaust_the_budget() {
        let trs = parse_trs("(RULES a ->= a)").unwrap();
        let res = explore_derivations(&c("a"), &trs, 100);
        assert!(res.exhausted);
    }

    #[test]
    fn long_derivations_exhaust_small_budgets() {
        let trs = parse_trs(QUEUE).unwrap();
        let t = Term::app("enq", vec![nat(3)]);
        assert!(explore_derivations(&t, &trs, 3).exhausted);
        assert!(!explore_derivations(&t, &trs, 1000).exhausted);
    }
}
