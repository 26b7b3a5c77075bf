//! Polynomial-bound side conditions on carrier declarations and the linear
//! constructor shapes (additive shift, interleaving).

use std::ops::Add;

use num::{One, Zero};

use super::{Constraint, ConstraintProblem, Definition, Poly, Rel, SymbolicDecl};
use crate::annotation::Rational;

/// `(p1+p2, p2+p3, …, p_{k-1}+p_k, p_k)`.
pub fn shift<T: Clone + Zero + Add<Output = T>>(p: &[T]) -> Vec<T> {
    (0..p.len())
        .map(|i| match p.get(i + 1) {
            Some(next) => p[i].clone() + next.clone(),
            None => p[i].clone(),
        })
        .collect()
}

/// `(p1,q1,p2,q2,…)`, padding the shorter vector with zeros.
pub fn interleave<T: Clone + Zero>(p: &[T], q: &[T]) -> Vec<T> {
    let n = p.len().max(q.len());
    let at = |v: &[T], i: usize| v.get(i).cloned().unwrap_or_else(T::zero);
    (0..n).flat_map(|i| [at(p, i), at(q, i)]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Base declarations are unknowns (non-linear problem).
    None,
    Shift,
    Interleave,
}

impl HeuristicMode {
    pub fn name(self) -> &'static str {
        match self {
            HeuristicMode::None => "none",
            HeuristicMode::Shift => "shift",
            HeuristicMode::Interleave => "interleave",
        }
    }
}

/// Argument annotations and cost of a carrier with result `q` under a heuristic shape.
fn shape(
    q: &[Rational],
    recursive: &[bool],
    mode: HeuristicMode,
) -> (Vec<Vec<Rational>>, Rational) {
    let any_rec = recursive.iter().any(|&r| r);
    let first = |v: &[Rational]| v.first().cloned().unwrap_or_else(Rational::zero);
    match mode {
        HeuristicMode::Shift | HeuristicMode::None => {
            let s = shift(q);
            let args = recursive
                .iter()
                .map(|&r| {
                    if r {
                        s.clone()
                    } else {
                        vec![Rational::zero(); q.len()]
                    }
                })
                .collect();
            (args, if any_rec { first(q) } else { Rational::zero() })
        }
        HeuristicMode::Interleave => {
            let u: Vec<Rational> = q.iter().step_by(2).cloned().collect();
            let w: Vec<Rational> = q.iter().skip(1).step_by(2).cloned().collect();
            let rec = interleave(&shift(&u), &w);
            let plain = interleave(&vec![Rational::zero(); u.len()], &w);
            let args = recursive
                .iter()
                .map(|&r| if r { rec.clone() } else { plain.clone() })
                .collect();
            (args, if any_rec { first(&u) } else { Rational::zero() })
        }
    }
}

/// Constant base declarations `shape(e_j)`, `j = 1..degree`, for a carrier.
///
/// Because the shapes are linear in the result annotation, every instance
/// `Σ_j q_j · base_j` equals `shape(q)`, so superposition and uniqueness hold
/// and instances stay linear in the unknowns.
pub fn heuristic_constructor_decls(
    recursive: &[bool],
    degree: usize,
    mode: HeuristicMode,
) -> Vec<SymbolicDecl> {
    (1..=degree)
        .map(|j| {
            let mut e = vec![Rational::zero(); degree];
            e[j - 1] = Rational::one();
            let (args, cost) = shape(&e, recursive, mode);
            let to_poly = |v: &[Rational]| -> Vec<Poly> {
                debug_assert!(v[degree.min(v.len())..].iter().all(Zero::is_zero));
                (0..degree)
                    .map(|l| Poly::constant(v.get(l).cloned().unwrap_or_else(Rational::zero)))
                    .collect()
            };
            SymbolicDecl {
                args: args.iter().map(|a| to_poly(a)).collect(),
                result: to_poly(&e),
                cost: Poly::constant(cost),
            }
        })
        .collect()
}

fn push_nontrivial(problem: &mut ConstraintProblem, c: Constraint, label: String) {
    if let Constraint::Cmp(a, r, b) = &c {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if r.holds(&x, &y) {
                return;
            }
        }
    }
    problem.push(c, label);
}

/// The maximum of `polys`: a constant when they are all constant, the single
/// non-zero entry if there is one, and otherwise a fresh unknown pinned to the
/// maximum.
fn max_of(problem: &mut ConstraintProblem, name: String, polys: &[Poly]) -> Poly {
    let live: Vec<&Poly> = polys.iter().filter(|p| !p.is_zero()).collect();
    if live.is_empty() {
        return Poly::zero();
    }
    if live.iter().all(|p| p.as_constant().is_some()) {
        let m = live
            .iter()
            .filter_map(|p| p.as_constant())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        return Poly::constant(m);
    }
    if live.len() == 1 {
        return live[0].clone();
    }
    let m = Poly::var(problem.new_defined_var(
        name.clone(),
        Definition::Max(live.iter().map(|p| (*p).clone()).collect()),
    ));
    for (i, p) in live.iter().enumerate() {
        problem.ge(m.clone(), (*p).clone(), format!("{name} >= q{i}"));
    }
    let choices = live
        .iter()
        .map(|p| Constraint::Cmp(m.clone(), Rel::Eq, (*p).clone()))
        .collect();
    problem.push(Constraint::Or(choices), format!("{name} attained"));
    m
}

/// Side conditions guaranteeing `Φ(v:q) ≤ max q · |v|^len q` for a carrier declaration.
///
/// For every argument `p_i` there is a vector `r_i` shorter than `q` with
/// `p_i ≤ q + r_i` and `max r_i ≤ max q`, and the cost is at most `max q`.
/// The length of `q` is taken structurally (last entry that is not identically
/// zero), and each `r_il` is bounded by the maximum of the entries of `q` after
/// position `l`, which implies both `len r_i < len q` and `max r_i ≤ max q`.
pub fn thm2_constraints(problem: &mut ConstraintProblem, label: &str, decl: &SymbolicDecl) {
    let q = &decl.result;
    let k = q.iter().rposition(|p| !p.is_zero()).map_or(0, |i| i + 1);
    let max_q = max_of(problem, format!("{label}.maxq"), &q[..k]);
    push_nontrivial(
        problem,
        Constraint::Cmp(decl.cost.clone(), Rel::Le, max_q.clone()),
        format!("{label}: cost <= max q"),
    );
    let tail_max: Vec<Poly> = (0..k.saturating_sub(1))
        .map(|l| max_of(problem, format!("{label}.maxq>{l}"), &q[l + 1..k]))
        .collect();
    for (i, p) in decl.args.iter().enumerate() {
        for (l, pil) in p.iter().enumerate() {
            if pil.is_zero() {
                continue;
            }
            let ql = q.get(l).cloned().unwrap_or_else(Poly::zero);
            if l + 1 < k {
                let bound = &tail_max[l];
                if let (Some(a), Some(b), Some(c)) =
                    (pil.as_constant(), ql.as_constant(), bound.as_constant())
                {
                    // All constant: r_il = max(0, p_il - q_l) must fit under the bound.
                    let need = if a > b { a - b } else { Rational::zero() };
                    push_nontrivial(
                        problem,
                        Constraint::Cmp(Poly::constant(need), Rel::Le, Poly::constant(c)),
                        format!("{label}: r{i}[{l}] <= max q"),
                    );
                    continue;
                }
                let r = Poly::var(problem.new_defined_var(
                    format!("{label}.r{i}[{l}]"),
                    Definition::PositivePart(pil - &ql),
                ));
                problem.le(
                    pil.clone(),
                    &ql + &r,
                    format!("{label}: p{i}[{l}] <= q + r"),
                );
                problem.le(r, bound.clone(), format!("{label}: r{i}[{l}] <= max q"));
            } else {
                push_nontrivial(
                    problem,
                    Constraint::Cmp(pil.clone(), Rel::Le, ql),
                    format!("{label}: p{i}[{l}] <= q"),
                );
            }
        }
    }
}

/// Conditions under which every non-negative combination of the base
/// declarations (with results `e_1 … e_d`) again satisfies the polynomial-bound side
/// conditions: the base costs sum to at most one, and for every argument and
/// position `l`, the entries at `l` of the bases with index above `l` sum to at
/// most one.
pub fn superposition_closure_constraints(
    problem: &mut ConstraintProblem,
    label: &str,
    bases: &[SymbolicDecl],
) {
    let cost = Poly::sum(bases.iter().map(|b| b.cost.clone()));
    push_nontrivial(
        problem,
        Constraint::Cmp(cost, Rel::Le, Poly::int(1)),
        format!("{label}: base costs <= 1"),
    );
    let arity = bases.first().map_or(0, |b| b.args.len());
    for i in 0..arity {
        for l in 0..bases.len() {
            let above = Poly::sum(bases.iter().skip(l + 1).map(|b| b.args[i][l].clone()));
            push_nontrivial(
                problem,
                Constraint::Cmp(above, Rel::Le, Poly::int(1)),
                format!("{label}: arg{i}[{l}] above base {} <= 1", l + 1),
            );
        }
    }
}
