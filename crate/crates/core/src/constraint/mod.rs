//! Constraint problems over non-negative rational unknowns, polynomial-bound side
//! conditions, heuristic constructor shapes and the external SMT back end.

mod heuristics;
mod poly;
mod smt;

pub use heuristics::{
    heuristic_constructor_decls, interleave, shift, superposition_closure_constraints,
    thm2_constraints, HeuristicMode,
};
pub use poly::{Monomial, Poly, VarId};
pub use smt::{
    emit_smtlib, emit_smtlib_with, parse_solver_output, solve, SolveOutcome, SolverConfig,
    SolverError,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{Signed, Zero};

use crate::annotation::{
    rational_string, AnnotatedSignatureTable, Annotation, Rational, SignatureDecl,
};
use crate::trs::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl Rel {
    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Rel::Le => a <= b,
            Rel::Ge => a >= b,
            Rel::Eq => a == b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Ge => ">=",
            Rel::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Cmp(Poly, Rel, Poly),
    Or(Vec<Constraint>),
    And(Vec<Constraint>),
}

impl Constraint {
    pub fn holds(&self, values: &[Rational]) -> bool {
        match self {
            Constraint::Cmp(a, r, b) => r.holds(&a.eval(values), &b.eval(values)),
            Constraint::Or(cs) => cs.iter().any(|c| c.holds(values)),
            Constraint::And(cs) => cs.iter().all(|c| c.holds(values)),
        }
    }

    pub fn substitute(&self, fixed: &BTreeMap<VarId, Rational>) -> Constraint {
        match self {
            Constraint::Cmp(a, r, b) => {
                Constraint::Cmp(a.substitute(fixed), *r, b.substitute(fixed))
            }
            Constraint::Or(cs) => Constraint::Or(cs.iter().map(|c| c.substitute(fixed)).collect()),
            Constraint::And(cs) => {
                Constraint::And(cs.iter().map(|c| c.substitute(fixed)).collect())
            }
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Constraint::Cmp(a, _, b) => a.degree().max(b.degree()),
            Constraint::Or(cs) | Constraint::And(cs) => {
                cs.iter().map(Constraint::degree).max().unwrap_or(0)
            }
        }
    }
}

/// A constraint tagged with where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub constraint: Constraint,
    pub label: String,
}

/// How an auxiliary variable is computed from earlier variables when an
/// assignment only fixes the declaration unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definition {
    Expr(Poly),
    PositivePart(Poly),
    Max(Vec<Poly>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub def: Option<Definition>,
}

/// Declaration whose entries are polynomials over the problem's unknowns.
/// Annotations are zero-padded to the analysis degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicDecl {
    pub args: Vec<Vec<Poly>>,
    pub result: Vec<Poly>,
    pub cost: Poly,
}

impl SymbolicDecl {
    pub fn zero(arity: usize, degree: usize) -> SymbolicDecl {
        SymbolicDecl {
            args: vec![vec![Poly::zero(); degree]; arity],
            result: vec![Poly::zero(); degree],
            cost: Poly::zero(),
        }
    }

    pub fn concretise(&self, values: &[Rational]) -> SignatureDecl {
        let ann = |v: &[Poly]| {
            Annotation::new(v.iter().map(|p| p.eval(values)).collect()).expect("non-negative model")
        };
        SignatureDecl::new(
            self.args.iter().map(|a| ann(a)).collect(),
            ann(&self.result),
            self.cost.eval(values),
        )
        .expect("non-negative model")
    }
}

/// Main, cost-free and base declarations with symbolic entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicTable {
    pub main: BTreeMap<Symbol, SymbolicDecl>,
    pub cost_free: BTreeMap<Symbol, SymbolicDecl>,
    pub bases: BTreeMap<Symbol, Vec<SymbolicDecl>>,
}

pub type Assignment = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub ok: bool,
    /// Index and label of the first violated atom, or a description of a bad value.
    pub failing: Option<(usize, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProblemMeta {
    pub degree: usize,
    pub mode: String,
}

/// A conjunction of polynomial (in)equalities over non-negative rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintProblem {
    vars: Vec<VarInfo>,
    index: HashMap<String, VarId>,
    atoms: Vec<Atom>,
    pub meta: ProblemMeta,
    pub table: SymbolicTable,
}

impl ConstraintProblem {
    pub fn new(degree: usize, mode: &str) -> Self {
        ConstraintProblem {
            meta: ProblemMeta {
                degree,
                mode: mode.to_string(),
            },
            ..Default::default()
        }
    }

    /// Registers a fresh unknown. Names are unique; reusing one is a bug.
    pub fn new_var(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(name.into(), None)
    }

    pub fn new_defined_var(&mut self, name: impl Into<String>, def: Definition) -> VarId {
        self.push_var(name.into(), Some(def))
    }

    fn push_var(&mut self, name: String, def: Option<Definition>) -> VarId {
        assert!(
            !self.index.contains_key(&name),
            "duplicate constraint variable {name}"
        );
        let id = VarId(self.vars.len() as u32);
        self.index.insert(name.clone(), id);
        self.vars.push(VarInfo { name, def });
        id
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn push(&mut self, constraint: Constraint, label: impl Into<String>) {
        self.atoms.push(Atom {
            constraint,
            label: label.into(),
        });
    }

    pub fn le(&mut self, a: Poly, b: Poly, label: impl Into<String>) {
        self.push(Constraint::Cmp(a, Rel::Le, b), label);
    }

    pub fn ge(&mut self, a: Poly, b: Poly, label: impl Into<String>) {
        self.push(Constraint::Cmp(a, Rel::Ge, b), label);
    }

    pub fn equate(&mut self, a: Poly, b: Poly, label: impl Into<String>) {
        self.push(Constraint::Cmp(a, Rel::Eq, b), label);
    }

    /// No atom multiplies two unknowns.
    pub fn linear_only(&self) -> bool {
        self.atoms.iter().all(|a| a.constraint.degree() <= 1)
    }

    pub fn first_atom_labelled(&self, label: &str) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.label == label)
    }

    /// Values indexed by variable id; missing names are `None`.
    pub fn values(&self, assignment: &Assignment) -> Result<Vec<Rational>, String> {
        self.vars
            .iter()
            .map(|v| {
                assignment
                    .get(&v.name)
                    .cloned()
                    .ok_or_else(|| format!("no value for `{}`", v.name))
            })
            .collect()
    }

    /// Fills in every variable missing from `partial`: defined auxiliaries are
    /// computed from their definition, all others default to zero.
    pub fn complete_assignment(&self, partial: &Assignment) -> Assignment {
        let mut values: Vec<Rational> = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let value = match (partial.get(&v.name), &v.def) {
                (Some(x), _) => x.clone(),
                (None, Some(Definition::Expr(p))) => p.eval(&values),
                (None, Some(Definition::PositivePart(p))) => {
                    let x = p.eval(&values);
                    if x.is_negative() {
                        Rational::zero()
                    } else {
                        x
                    }
                }
                (None, Some(Definition::Max(ps))) => ps
                    .iter()
                    .map(|p| p.eval(&values))
                    .fold(Rational::zero(), |a, b| if b > a { b } else { a }),
                (None, None) => Rational::zero(),
            };
            values.push(value);
        }
        self.vars
            .iter()
            .map(|v| v.name.clone())
            .zip(values)
            .collect()
    }

    /// The same problem with the named variables fixed: they are substituted
    /// into every atom and pinned by an equation, so models of the result are
    /// models of `self`.
    pub fn with_fixed(&self, fixed: &Assignment) -> ConstraintProblem {
        let ids: BTreeMap<VarId, Rational> = fixed
            .iter()
            .filter_map(|(name, x)| self.var(name).map(|v| (v, x.clone())))
            .collect();
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.constraint = a.constraint.substitute(&ids);
        }
        for (v, x) in &ids {
            let name = self.var_name(*v).to_string();
            out.equate(
                Poly::var(*v),
                Poly::constant(x.clone()),
                format!("fixed {name}"),
            );
        }
        out
    }

    /// Exact evaluation of every atom and of the non-negativity of every variable.
    pub fn check_assignment(&self, assignment: &Assignment) -> CheckResult {
        let values = match self.values(assignment) {
            Ok(v) => v,
            Err(msg) => {
                return CheckResult {
                    ok: false,
                    failing: Some((usize::MAX, msg)),
                }
            }
        };
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            let msg = format!("`{}` is negative", self.vars[i].name);
            return CheckResult {
                ok: false,
                failing: Some((usize::MAX, msg)),
            };
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.constraint.holds(&values) {
                return CheckResult {
                    ok: false,
                    failing: Some((i, a.label.clone())),
                };
            }
        }
        CheckResult {
            ok: true,
            failing: None,
        }
    }

    /// Evaluates a polynomial under an assignment.
    pub fn eval(&self, p: &Poly, assignment: &Assignment) -> Result<Rational, String> {
        Ok(p.eval(&self.values(assignment)?))
    }

    /// Concrete signature table for a (complete) model.
    pub fn concretise(&self, assignment: &Assignment) -> Result<AnnotatedSignatureTable, String> {
        let values = self.values(assignment)?;
        let mut out = AnnotatedSignatureTable::new(self.meta.degree);
        for (f, d) in &self.table.main {
            out.main.insert(f.clone(), d.concretise(&values));
        }
        for (f, d) in &self.table.cost_free {
            out.cost_free.insert(f.clone(), d.concretise(&values));
        }
        for (f, ds) in &self.table.bases {
            out.bases.insert(
                f.clone(),
                ds.iter().map(|d| d.concretise(&values)).collect(),
            );
        }
        Ok(out)
    }

    /// Human-readable rendering of a polynomial with variable names.
    pub fn render(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = p
            .terms()
            .map(|(m, c)| {
                let mut s = if m.is_empty() {
                    c.to_string()
                } else if c == &crate::annotation::rat(1) {
                    String::new()
                } else {
                    format!("{c}*")
                };
                s.push_str(
                    &m.iter()
                        .map(|v| self.var_name(*v).to_string())
                        .collect::<Vec<_>>()
                        .join("*"),
                );
                s
            })
            .collect();
        parts.join(" + ")
    }

    pub fn render_constraint(&self, c: &Constraint) -> String {
        match c {
            Constraint::Cmp(a, r, b) => {
                format!("{} {} {}", self.render(a), r.symbol(), self.render(b))
            }
            Constraint::Or(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| self.render_constraint(c)).collect();
                format!("({})", parts.join(" or "))
            }
            Constraint::And(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| self.render_constraint(c)).collect();
                format!("({})", parts.join(" and "))
            }
        }
    }
}

impl fmt::Display for ConstraintProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{}: {}", a.label, self.render_constraint(&a.constraint))?;
        }
        Ok(())
    }
}

/// Serialises an assignment with rationals as `num/den` strings.
pub fn assignment_strings(a: &Assignment) -> BTreeMap<String, String> {
    a.iter()
        .map(|(k, v)| (k.clone(), rational_string(v)))
        .collect()
}
