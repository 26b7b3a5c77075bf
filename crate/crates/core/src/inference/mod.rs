//! Constraint generation: symbolic signatures, derivations in the annotated
//! inference system, freed potential and resource boundedness of every rule.

mod derive;

pub use derive::{DerivationTree, Mode};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::Zero;
use thiserror::Error;

use crate::annotation::{rat, Rational};
use crate::constraint::{
    heuristic_constructor_decls, shift, superposition_closure_constraints, thm2_constraints,
    Assignment, Constraint, ConstraintProblem, HeuristicMode, Poly, Rel, SymbolicDecl,
};
use crate::trs::{infer_recursive_positions, CallGraph, Symbol, Trs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub degree: usize,
    pub heuristic: HeuristicMode,
    pub cost_free: bool,
    pub relative: bool,
}

impl AnalysisOptions {
    pub fn new(degree: usize) -> Self {
        AnalysisOptions {
            degree,
            heuristic: HeuristicMode::None,
            cost_free: false,
            relative: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("rule {rule}: defined symbol `{symbol}` below the root of the left-hand side is not supported")]
    UnsupportedLhs { rule: usize, symbol: String },
    #[error("degree must be at least 1")]
    ZeroDegree,
}

/// Which application rule a call site uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppRule {
    Standard,
    CostFree,
}

/// The cost-free application rule is used iff cost-free analysis is enabled,
/// the callee is not constructor-like, it lies in the SCC of the symbol whose
/// rules are analysed, and the current derivation is not itself a cost-free one.
pub fn select_app_rule(
    trs: &Trs,
    calls: &CallGraph,
    analysed: &Symbol,
    callee: &Symbol,
    cost_free_enabled: bool,
    in_cost_free_derivation: bool,
) -> AppRule {
    if cost_free_enabled
        && !in_cost_free_derivation
        && trs.is_defined(callee)
        && !trs.is_constructor_like(callee)
        && calls.same_scc(analysed, callee)
    {
        AppRule::CostFree
    } else {
        AppRule::Standard
    }
}

/// Symbolic data recorded for one resource-boundedness obligation.
#[derive(Clone, Debug)]
pub struct RuleObligation {
    /// 0-based index into the rules of the TRS.
    pub rule: usize,
    pub mode: Mode,
    pub decl_args: Vec<Vec<Poly>>,
    pub freed: BTreeMap<Symbol, Vec<Poly>>,
    pub freed_cost: Poly,
    pub rhs_context: BTreeMap<Symbol, Vec<Poly>>,
    pub rhs_cost: Poly,
    /// `k + ℓ − C`.
    pub budget: Poly,
    /// Label of the budget atom in the problem.
    pub budget_label: String,
    pub tree: DerivationTree,
}

/// Output of constraint generation for one degree.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub problem: ConstraintProblem,
    pub options: AnalysisOptions,
    /// The heuristic actually used (may fall back to base vectors).
    pub heuristic: HeuristicMode,
    pub obligations: Vec<RuleObligation>,
    /// Relative mode: `(rule index, selector variable name)` for each strict rule.
    pub selectors: Vec<(usize, String)>,
    pub diagnostics: Vec<String>,
}

impl Analysis {
    /// Constant values for the symbolic base declarations (none in heuristic
    /// mode): every argument of base `j` gets `shift(e_j)` and the first base
    /// costs 1 for non-nullary symbols. Fixing them makes the problem linear.
    pub fn uniform_base_guess(&self, trs: &Trs) -> Option<Assignment> {
        if self.heuristic != HeuristicMode::None {
            return None;
        }
        let d = self.options.degree;
        let mut out = Assignment::new();
        for c in trs.potential_carriers() {
            for j in 1..=d {
                let prefix = base_name(&c.name, j);
                let unit: Vec<Rational> = (0..d)
                    .map(|l| if l + 1 == j { rat(1) } else { rat(0) })
                    .collect();
                let entries = shift(&unit);
                for i in 0..c.arity {
                    for (l, e) in entries.iter().enumerate().take(j) {
                        out.insert(format!("{prefix}.arg{i}[{l}]"), e.clone());
                    }
                }
                let cost = if j == 1 && c.arity > 0 {
                    rat(1)
                } else {
                    rat(0)
                };
                out.insert(format!("{prefix}.cost"), cost);
            }
        }
        Some(out)
    }
}

pub(crate) fn main_name(f: &Symbol) -> String {
    format!("{f}#main")
}

pub(crate) fn cf_name(f: &Symbol) -> String {
    format!("{f}#cf")
}

pub(crate) fn base_name(c: &Symbol, j: usize) -> String {
    format!("{c}#b{j}")
}

fn fresh_decl(
    p: &mut ConstraintProblem,
    prefix: &str,
    arity: usize,
    degree: usize,
) -> SymbolicDecl {
    let args = (0..arity)
        .map(|i| {
            (0..degree)
                .map(|l| Poly::var(p.new_var(format!("{prefix}.arg{i}[{l}]"))))
                .collect()
        })
        .collect();
    let result = (0..degree)
        .map(|l| Poly::var(p.new_var(format!("{prefix}.res[{l}]"))))
        .collect();
    let cost = Poly::var(p.new_var(format!("{prefix}.cost")));
    SymbolicDecl { args, result, cost }
}

/// Base declaration `j` (1-based) with unknown entries; its result is `e_j`
/// and entries past position `j` are zero.
fn fresh_base(
    p: &mut ConstraintProblem,
    prefix: &str,
    arity: usize,
    degree: usize,
    j: usize,
) -> SymbolicDecl {
    let args = (0..arity)
        .map(|i| {
            (0..degree)
                .map(|l| {
                    if l < j {
                        Poly::var(p.new_var(format!("{prefix}.arg{i}[{l}]")))
                    } else {
                        Poly::zero()
                    }
                })
                .collect()
        })
        .collect();
    let result = (0..degree)
        .map(|l| {
            if l + 1 == j {
                Poly::int(1)
            } else {
                Poly::zero()
            }
        })
        .collect();
    let cost = Poly::var(p.new_var(format!("{prefix}.cost")));
    SymbolicDecl { args, result, cost }
}

/// Builds the constraint problem whose models are resource-bounded annotated
/// signatures of degree `options.degree` satisfying the polynomial-bound side
/// conditions.
pub fn analyse(trs: &Trs, options: &AnalysisOptions) -> Result<Analysis, InferenceError> {
    let d = options.degree;
    if d == 0 {
        return Err(InferenceError::ZeroDegree);
    }
    let mut diagnostics = Vec::new();
    let mut heuristic = options.heuristic;
    let recursive = if heuristic != HeuristicMode::None {
        match infer_recursive_positions(trs) {
            Ok(r) => Some(r),
            Err(e) => {
                diagnostics.push(format!("{e}; falling back to base-vector annotations"));
                heuristic = HeuristicMode::None;
                None
            }
        }
    } else {
        None
    };
    let mode_name = format!(
        "{}{}{}",
        heuristic.name(),
        if options.cost_free { "+costfree" } else { "" },
        if options.relative { "+relative" } else { "" }
    );
    let mut p = ConstraintProblem::new(d, &mode_name);

    for c in trs.potential_carriers() {
        let bases = match &recursive {
            Some(rec) => heuristic_constructor_decls(&rec[&c.name], d, heuristic),
            None => (1..=d)
                .map(|j| fresh_base(&mut p, &base_name(&c.name, j), c.arity, d, j))
                .collect(),
        };
        p.table.bases.insert(c.name.clone(), bases);
    }
    for f in trs.defined_symbols() {
        let decl = fresh_decl(&mut p, &main_name(&f.name), f.arity, d);
        p.table.main.insert(f.name.clone(), decl);
    }

    let mut b = derive::Builder::new(trs, options, p);

    for g in trs.constructor_like() {
        b.dominate_instance(&g.name);
    }
    for c in trs.potential_carriers() {
        let bases = b.problem.table.bases[&c.name].clone();
        for (j, base) in bases.iter().enumerate() {
            thm2_constraints(
                &mut b.problem,
                &format!("bound {}", base_name(&c.name, j + 1)),
                base,
            );
        }
        superposition_closure_constraints(&mut b.problem, &format!("closure {}", c.name), &bases);
    }

    let mut selectors = Vec::new();
    if options.relative {
        let mut sum = Poly::zero();
        for (i, r) in trs.rules().iter().enumerate() {
            if r.strict {
                let name = format!("sigma#{}", i + 1);
                let s = Poly::var(b.problem.new_var(name.clone()));
                b.problem.push(
                    Constraint::Or(vec![
                        Constraint::Cmp(s.clone(), Rel::Eq, Poly::zero()),
                        Constraint::Cmp(s.clone(), Rel::Eq, Poly::int(1)),
                    ]),
                    format!("{name} in {{0,1}}"),
                );
                sum = sum + s;
                selectors.push((i, name));
            }
        }
        if !selectors.is_empty() {
            b.problem
                .ge(sum, Poly::int(1), "some strict rule is counted");
        }
    }

    for (i, r) in trs.rules().iter().enumerate() {
        let f = r.root().clone();
        let decl = b.problem.table.main[&f].clone();
        let c = if !r.strict {
            Poly::zero()
        } else if options.relative {
            let name = &selectors
                .iter()
                .find(|(k, _)| *k == i)
                .expect("selector for strict rule")
                .1;
            Poly::var(b.problem.var(name).expect("declared selector"))
        } else {
            Poly::int(1)
        };
        b.rule_constraints(i, &decl, c, Mode::Standard)?;
    }

    let mut done = BTreeSet::new();
    let mut queue: VecDeque<Symbol> = VecDeque::new();
    loop {
        queue.extend(b.take_new_cost_free());
        let Some(f) = queue.pop_front() else { break };
        if !done.insert(f.clone()) {
            continue;
        }
        let decl = b.problem.table.cost_free[&f].clone();
        for &i in trs.rules_for(&f) {
            b.rule_constraints(i, &decl, Poly::zero(), Mode::CostFree)?;
        }
    }

    let (problem, obligations) = b.finish();
    Ok(Analysis {
        problem,
        options: options.clone(),
        heuristic,
        obligations,
        selectors,
        diagnostics,
    })
}

#[cfg(test)]
mod tests;
