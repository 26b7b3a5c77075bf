use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::Zero;

use super::{
    cf_name, fresh_decl, select_app_rule, AnalysisOptions, AppRule, InferenceError, RuleObligation,
};
use crate::constraint::{Constraint, ConstraintProblem, Definition, Poly, Rel, SymbolicDecl};
use crate::trs::{linearise, CallGraph, Symbol, Term, Trs};

/// Whether a rule is checked against the main or the cost-free declaration
/// of its root symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Standard,
    CostFree,
}

/// A node of a derivation in the annotated inference system, kept for
/// `--explain` output.
#[derive(Clone, Debug)]
pub struct DerivationTree {
    pub rule: &'static str,
    pub term: Term,
    pub annotation: Vec<Poly>,
    pub cost: Poly,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    /// Renders with symbolic annotations.
    pub fn render(&self, problem: &ConstraintProblem) -> String {
        self.render_with(&|p| problem.render(p))
    }

    /// Renders with each annotation entry and cost shown by `show`.
    pub fn render_with(&self, show: &dyn Fn(&Poly) -> String) -> String {
        let mut out = String::new();
        self.render_into(show, 0, &mut out);
        out
    }

    fn render_into(&self, show: &dyn Fn(&Poly) -> String, depth: usize, out: &mut String) {
        let ann: Vec<String> = self.annotation.iter().map(show).collect();
        let _ = writeln!(
            out,
            "{:indent$}[{}] {} : ({}) cost {}",
            "",
            self.rule,
            self.term,
            ann.join(", "),
            show(&self.cost),
            indent = 2 * depth
        );
        for c in &self.children {
            c.render_into(show, depth + 1, out);
        }
    }
}

type Context = BTreeMap<Symbol, Vec<Poly>>;

#[derive(Clone, Copy)]
enum Site<'s> {
    /// Typing a left-hand-side argument: every symbol is typed by its base instance.
    Footprint { rule: usize },
    Rhs {
        analysed: &'s Symbol,
        cost_free: bool,
    },
}

pub(crate) struct Builder<'a> {
    trs: &'a Trs,
    options: &'a AnalysisOptions,
    calls: CallGraph,
    pub problem: ConstraintProblem,
    obligations: Vec<RuleObligation>,
    new_cost_free: Vec<Symbol>,
    sites: usize,
    lambdas: usize,
}

fn add_into(target: &mut Vec<Poly>, ann: &[Poly]) {
    if target.len() < ann.len() {
        target.resize(ann.len(), Poly::zero());
    }
    for (t, a) in target.iter_mut().zip(ann) {
        *t = &*t + a;
    }
}

impl<'a> Builder<'a> {
    pub fn new(trs: &'a Trs, options: &'a AnalysisOptions, problem: ConstraintProblem) -> Self {
        Builder {
            trs,
            options,
            calls: CallGraph::new(trs),
            problem,
            obligations: Vec::new(),
            new_cost_free: Vec::new(),
            sites: 0,
            lambdas: 0,
        }
    }

    pub fn finish(self) -> (ConstraintProblem, Vec<RuleObligation>) {
        (self.problem, self.obligations)
    }

    pub fn take_new_cost_free(&mut self) -> Vec<Symbol> {
        std::mem::take(&mut self.new_cost_free)
    }

    /// Adds `a rel b` unless it holds trivially.
    fn atom(&mut self, a: Poly, rel: Rel, b: Poly, label: impl Into<String>) {
        if let Some(c) = (&a - &b).as_constant() {
            if rel.holds(&c, &num::zero()) {
                return;
            }
        }
        self.problem.push(Constraint::Cmp(a, rel, b), label);
    }

    fn cost_free_decl(&mut self, f: &Symbol) -> SymbolicDecl {
        if let Some(d) = self.problem.table.cost_free.get(f) {
            return d.clone();
        }
        let arity = self.trs.arity(f).expect("known symbol");
        let decl = fresh_decl(&mut self.problem, &cf_name(f), arity, self.options.degree);
        self.problem.table.cost_free.insert(f.clone(), decl.clone());
        self.new_cost_free.push(f.clone());
        decl
    }

    /// Argument annotations and cost of the instance `Σ_j q_j · base_j` of
    /// carrier `c`.
    fn instance(&mut self, c: &Symbol, q: &[Poly]) -> (Vec<Vec<Poly>>, Poly) {
        let bases = self.problem.table.bases[c].clone();
        let constant_bases = bases.iter().all(|b| {
            b.cost.as_constant().is_some()
                && b.args.iter().flatten().all(|p| p.as_constant().is_some())
        });
        let mut coeffs = Vec::with_capacity(q.len());
        let mut used_site = false;
        for (l, ql) in q.iter().enumerate() {
            if !constant_bases && ql.degree() >= 2 {
                let n = self.sites;
                let v = self
                    .problem
                    .new_defined_var(format!("site#{n}[{l}]"), Definition::Expr(ql.clone()));
                self.problem.push(
                    Constraint::Cmp(Poly::var(v), Rel::Eq, ql.clone()),
                    format!("site {n}"),
                );
                coeffs.push(Poly::var(v));
                used_site = true;
            } else {
                coeffs.push(ql.clone());
            }
        }
        if used_site {
            self.sites += 1;
        }
        let arity = bases.first().map_or(0, |b| b.args.len());
        let d = self.options.degree;
        let mut args = vec![vec![Poly::zero(); d]; arity];
        let mut cost = Poly::zero();
        for (qj, base) in coeffs.iter().zip(&bases) {
            if qj.is_zero() {
                continue;
            }
            for (i, arg) in base.args.iter().enumerate() {
                for (l, e) in arg.iter().enumerate() {
                    args[i][l] = &args[i][l] + &(qj * e);
                }
            }
            cost = &cost + &(qj * &base.cost);
        }
        (args, cost)
    }

    /// Declaration `E` with `E = D` or `E = D + C` for the main declaration
    /// `D` and the cost-free declaration `C` of `f`, i.e. `D + λ·C` with
    /// `λ ∈ {0, 1}`, encoded without products.
    fn cost_free_site(&mut self, main: &SymbolicDecl, f: &Symbol) -> SymbolicDecl {
        let cf = self.cost_free_decl(f);
        let n = self.lambdas;
        self.lambdas += 1;
        let prefix = format!("{f}#site{n}");
        let site = fresh_decl(
            &mut self.problem,
            &prefix,
            main.args.len(),
            self.options.degree,
        );
        let pairs = |e: &SymbolicDecl| -> Vec<Poly> {
            e.args
                .iter()
                .flatten()
                .chain(&e.result)
                .chain(std::iter::once(&e.cost))
                .cloned()
                .collect()
        };
        let (e, d, c) = (pairs(&site), pairs(main), pairs(&cf));
        let plain = e
            .iter()
            .zip(&d)
            .map(|(x, y)| Constraint::Cmp(x.clone(), Rel::Eq, y.clone()))
            .collect();
        let summed = e
            .iter()
            .zip(d.iter().zip(&c))
            .map(|(x, (y, z))| Constraint::Cmp(x.clone(), Rel::Eq, y + z))
            .collect();
        self.problem.push(
            Constraint::Or(vec![Constraint::And(plain), Constraint::And(summed)]),
            format!("{prefix}: main or main plus cost-free"),
        );
        site
    }

    /// The application-rule declaration used for `f` at annotation `q`.
    fn app_decl(
        &mut self,
        f: &Symbol,
        q: &[Poly],
        site: Site<'_>,
        label: &str,
    ) -> Result<(Vec<Vec<Poly>>, Poly, &'static str), InferenceError> {
        if let Site::Footprint { rule } = site {
            if !self.trs.carries_potential(f) {
                return Err(InferenceError::UnsupportedLhs {
                    rule: rule + 1,
                    symbol: f.to_string(),
                });
            }
            let (args, cost) = self.instance(f, q);
            return Ok((args, cost, "app"));
        }
        if !self.trs.is_defined(f) {
            let (args, cost) = self.instance(f, q);
            return Ok((args, cost, "app"));
        }
        let Site::Rhs {
            analysed,
            cost_free,
        } = site
        else {
            unreachable!()
        };
        let main = self.problem.table.main[f].clone();
        let (decl, name) = if cost_free {
            if self.trs.is_constructor_like(f) {
                (main, "app")
            } else {
                (self.cost_free_decl(f), "app-cf")
            }
        } else {
            match select_app_rule(
                self.trs,
                &self.calls,
                analysed,
                f,
                self.options.cost_free,
                false,
            ) {
                AppRule::Standard => (main, "app"),
                AppRule::CostFree => (self.cost_free_site(&main, f), "app-sum"),
            }
        };
        for (l, ql) in q.iter().enumerate() {
            let r = decl.result.get(l).cloned().unwrap_or_else(Poly::zero);
            self.atom(
                r,
                Rel::Ge,
                ql.clone(),
                format!("{label}: result of {f}[{l}]"),
            );
        }
        Ok((decl.args, decl.cost, name))
    }

    /// Derives `t : q`, returning the context, the cost and the derivation.
    fn derive(
        &mut self,
        t: &Term,
        q: &[Poly],
        site: Site<'_>,
        label: &str,
    ) -> Result<(Context, Poly, DerivationTree), InferenceError> {
        if !t.is_linear() {
            let (lin, grouping) = linearise(std::slice::from_ref(t));
            let (ctx, cost, tree) = self.derive(&lin[0], q, site, label)?;
            let mut shared = Context::new();
            for (z, ann) in ctx {
                add_into(shared.entry(grouping[&z].clone()).or_default(), &ann);
            }
            let node = DerivationTree {
                rule: "share",
                term: t.clone(),
                annotation: q.to_vec(),
                cost: cost.clone(),
                children: vec![tree],
            };
            return Ok((shared, cost, node));
        }
        match t {
            Term::Var(x) => {
                let mut ctx = Context::new();
                ctx.insert(x.clone(), q.to_vec());
                Ok((
                    ctx,
                    Poly::zero(),
                    DerivationTree {
                        rule: "var",
                        term: t.clone(),
                        annotation: q.to_vec(),
                        cost: Poly::zero(),
                        children: vec![],
                    },
                ))
            }
            Term::App(f, args) => {
                let (arg_anns, app_cost, app_rule) = self.app_decl(f, q, site, label)?;
                let mut ctx = Context::new();
                let mut cost = app_cost;
                let mut children = Vec::new();
                let all_vars = args.iter().all(Term::is_var);
                for (a, ann) in args.iter().zip(&arg_anns) {
                    match a {
                        Term::Var(x) => {
                            ctx.insert(x.clone(), ann.clone());
                        }
                        _ => {
                            let (c, k, tree) = self.derive(a, ann, site, label)?;
                            ctx.extend(c);
                            cost = &cost + &k;
                            children.push(tree);
                        }
                    }
                }
                let rule = if all_vars { app_rule } else { "comp" };
                Ok((
                    ctx,
                    cost.clone(),
                    DerivationTree {
                        rule,
                        term: t.clone(),
                        annotation: q.to_vec(),
                        cost,
                        children,
                    },
                ))
            }
        }
    }

    /// Constructor-like symbols: the main declaration must dominate the base
    /// instance at its own result annotation, so stuck calls carry enough
    /// potential.
    pub fn dominate_instance(&mut self, g: &Symbol) {
        let main = self.problem.table.main[g].clone();
        let (args, cost) = self.instance(g, &main.result);
        for (i, (m, inst)) in main.args.iter().zip(&args).enumerate() {
            for (l, (a, b)) in m.iter().zip(inst).enumerate() {
                self.atom(
                    a.clone(),
                    Rel::Ge,
                    b.clone(),
                    format!("dominate {g} arg{i}[{l}]"),
                );
            }
        }
        self.atom(
            main.cost.clone(),
            Rel::Ge,
            cost,
            format!("dominate {g} cost"),
        );
    }

    /// Resource boundedness of rule `i` for `decl`, with counted cost `c`.
    pub fn rule_constraints(
        &mut self,
        i: usize,
        decl: &SymbolicDecl,
        c: Poly,
        mode: Mode,
    ) -> Result<(), InferenceError> {
        let trs = self.trs;
        let rule = &trs.rules()[i];
        let prefix = match mode {
            Mode::Standard => format!("rule {} `{}`", i + 1, rule),
            Mode::CostFree => format!("cost-free rule {} `{}`", i + 1, rule),
        };
        let (lin, grouping) = linearise(rule.lhs.args());
        let mut freed = Context::new();
        let mut freed_cost = Poly::zero();
        let mut children = Vec::new();
        for (li, pi) in lin.iter().zip(&decl.args) {
            let (ctx, cost, tree) = self.derive(li, pi, Site::Footprint { rule: i }, &prefix)?;
            for (z, ann) in ctx {
                add_into(freed.entry(grouping[&z].clone()).or_default(), &ann);
            }
            freed_cost = &freed_cost + &cost;
            children.push(tree);
        }
        let site = Site::Rhs {
            analysed: rule.root(),
            cost_free: mode == Mode::CostFree,
        };
        let (rhs_context, rhs_cost, tree) = self.derive(&rule.rhs, &decl.result, site, &prefix)?;
        children.push(tree);
        let budget = &(&decl.cost + &freed_cost) - &c;
        let budget_label = format!("{prefix}: budget");
        self.problem
            .le(rhs_cost.clone(), budget.clone(), budget_label.clone());
        self.atom(
            budget.clone(),
            Rel::Ge,
            Poly::zero(),
            format!("{prefix}: budget non-negative"),
        );
        for (y, ann) in &rhs_context {
            let available = freed.get(y).cloned().unwrap_or_default();
            for (l, a) in ann.iter().enumerate() {
                let b = available.get(l).cloned().unwrap_or_else(Poly::zero);
                self.atom(a.clone(), Rel::Le, b, format!("{prefix}: context {y}[{l}]"));
            }
        }
        let root = DerivationTree {
            rule: "rule",
            term: rule.lhs.clone(),
            annotation: decl.result.clone(),
            cost: budget.clone(),
            children,
        };
        self.obligations.push(RuleObligation {
            rule: i,
            mode,
            decl_args: decl.args.clone(),
            freed,
            freed_cost,
            rhs_context,
            rhs_cost,
            budget,
            budget_label,
            tree: root,
        });
        Ok(())
    }
}
