//! First-order (relative) term rewrite systems: representation, parsing,
//! innermost rewriting and the small analyses the amortised inference needs.

mod callgraph;
mod enumerate;
mod parse;
mod rewrite;
mod sorts;
mod term;

pub use callgraph::CallGraph;
pub use enumerate::{enumerate_basic_terms, enumerate_constructor_terms, is_basic, terms_by_size};
pub use parse::parse_trs;
pub use rewrite::{explore_derivations, innermost_successors, is_normal_form, ExplorationResult};
pub use sorts::{infer_recursive_positions, SortError};
pub use term::{linearise, Substitution, Symbol, Term};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Line/column of a token in the source text, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

fn at(pos: &Option<Pos>) -> String {
    pos.map(|p| format!(" at {p}")).unwrap_or_default()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrsError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("rule{}: left-hand side `{lhs}` is a variable", at(pos))]
    VariableLhs { lhs: String, pos: Option<Pos> },
    #[error(
        "rule{}: variable `{var}` occurs on the right-hand side but not on the left",
        at(pos)
    )]
    ExtraVariable { var: String, pos: Option<Pos> },
    #[error(
        "symbol `{symbol}` used with arity {found}{} but first used with arity {expected}",
        at(pos)
    )]
    ArityClash {
        symbol: String,
        expected: usize,
        found: usize,
        pos: Option<Pos>,
    },
    #[error("variable `{var}` applied to arguments{}", at(pos))]
    VariableApplied { var: String, pos: Option<Pos> },
}

/// A rewrite rule. Strict rules belong to R and are counted; weak rules to S.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    pub strict: bool,
}

impl Rule {
    pub fn strict(lhs: Term, rhs: Term) -> Rule {
        Rule {
            lhs,
            rhs,
            strict: true,
        }
    }

    pub fn weak(lhs: Term, rhs: Term) -> Rule {
        Rule {
            lhs,
            rhs,
            strict: false,
        }
    }

    pub fn root(&self) -> &Symbol {
        self.lhs.root().expect("rule lhs is never a variable")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.strict { "->" } else { "->=" };
        write!(f, "{} {} {}", self.lhs, arrow, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolClass {
    Defined,
    Constructor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub name: Symbol,
    pub arity: usize,
    pub class: SymbolClass,
    /// Defined symbol that occurs strictly below the root of some left-hand side.
    pub constructor_like: bool,
}

impl SymbolInfo {
    pub fn is_defined(&self) -> bool {
        self.class == SymbolClass::Defined
    }

    pub fn is_constructor(&self) -> bool {
        self.class == SymbolClass::Constructor
    }

    /// Constructors and constructor-like symbols carry potential.
    pub fn carries_potential(&self) -> bool {
        self.is_constructor() || self.constructor_like
    }
}

/// A relative term rewrite system R/S together with its classified signature.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct Trs {
    rules: Vec<Rule>,
    symbols: Vec<SymbolInfo>,
    index: HashMap<Symbol, usize>,
    rules_by_root: HashMap<Symbol, Vec<usize>>,
}

impl PartialEq for Trs {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.symbols == other.symbols
    }
}

impl Trs {
    /// Builds a TRS from rules, validating the rule invariants. `extra` lists
    /// additional `(name, arity)` symbols that occur in no rule.
    pub fn new(rules: Vec<Rule>, extra: &[(&str, usize)]) -> Result<Trs, TrsError> {
        Self::with_positions(rules.into_iter().map(|r| (r, None)).collect(), extra)
    }

    pub(crate) fn with_positions(
        rules: Vec<(Rule, Option<Pos>)>,
        extra: &[(&str, usize)],
    ) -> Result<Trs, TrsError> {
        let mut order: Vec<(Symbol, usize)> = Vec::new();
        let mut arity: HashMap<Symbol, usize> = HashMap::new();
        let mut record = |t: &Term, pos: &Option<Pos>| -> Result<(), TrsError> {
            let mut err = None;
            t.visit(&mut |s| {
                if let Term::App(f, args) = s {
                    match arity.get(f) {
                        Some(&a) if a != args.len() && err.is_none() => {
                            err = Some(TrsError::ArityClash {
                                symbol: f.to_string(),
                                expected: a,
                                found: args.len(),
                                pos: *pos,
                            });
                        }
                        Some(_) => {}
                        None => {
                            arity.insert(f.clone(), args.len());
                            order.push((f.clone(), args.len()));
                        }
                    }
                }
            });
            err.map_or(Ok(()), Err)
        };
        for (rule, pos) in &rules {
            if let Term::Var(x) = &rule.lhs {
                return Err(TrsError::VariableLhs {
                    lhs: x.to_string(),
                    pos: *pos,
                });
            }
            let lhs_vars: BTreeSet<_> = rule.lhs.vars().into_iter().collect();
            if let Some(x) = rule.rhs.vars().into_iter().find(|x| !lhs_vars.contains(x)) {
                return Err(TrsError::ExtraVariable {
                    var: x.to_string(),
                    pos: *pos,
                });
            }
            record(&rule.lhs, pos)?;
            record(&rule.rhs, pos)?;
        }
        for (name, a) in extra {
            let t = Term::App(
                Symbol::new(name),
                (0..*a).map(|i| Term::var(&format!("_{i}"))).collect(),
            );
            record(&t, &None)?;
        }

        let rules: Vec<Rule> = rules.into_iter().map(|(r, _)| r).collect();
        let defined: BTreeSet<Symbol> = rules.iter().map(|r| r.root().clone()).collect();
        let mut below_root = BTreeSet::new();
        for r in &rules {
            for a in r.lhs.args() {
                below_root.extend(a.symbols());
            }
        }
        let symbols: Vec<SymbolInfo> = order
            .into_iter()
            .map(|(name, arity)| {
                let is_def = defined.contains(&name);
                SymbolInfo {
                    constructor_like: is_def && below_root.contains(&name),
                    class: if is_def {
                        SymbolClass::Defined
                    } else {
                        SymbolClass::Constructor
                    },
                    name,
                    arity,
                }
            })
            .collect();
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), i))
            .collect();
        let mut rules_by_root: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            rules_by_root.entry(r.root().clone()).or_default().push(i);
        }
        Ok(Trs {
            rules,
            symbols,
            index,
            rules_by_root,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Signature in order of first occurrence.
    pub fn symbols(&self) -> &[SymbolInfo] {
        &self.symbols
    }

    pub fn symbol(&self, name: &Symbol) -> Option<&SymbolInfo> {
        self.index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn arity(&self, name: &Symbol) -> Option<usize> {
        self.symbol(name).map(|s| s.arity)
    }

    pub fn is_defined(&self, name: &Symbol) -> bool {
        self.symbol(name).is_some_and(SymbolInfo::is_defined)
    }

    pub fn is_constructor(&self, name: &Symbol) -> bool {
        self.symbol(name).is_some_and(SymbolInfo::is_constructor)
    }

    pub fn is_constructor_like(&self, name: &Symbol) -> bool {
        self.symbol(name).is_some_and(|s| s.constructor_like)
    }

    pub fn carries_potential(&self, name: &Symbol) -> bool {
        self.symbol(name).is_some_and(SymbolInfo::carries_potential)
    }

    pub fn defined_symbols(&self) -> impl Iterator<Item = &SymbolInfo> {
        self.symbols.iter().filter(|s| s.is_defined())
    }

    pub fn constructors(&self) -> impl Iterator<Item = &SymbolInfo> {
        self.symbols.iter().filter(|s| s.is_constructor())
    }

    pub fn constructor_like(&self) -> impl Iterator<Item = &SymbolInfo> {
        self.symbols.iter().filter(|s| s.constructor_like)
    }

    /// Constructors followed by constructor-like symbols.
    pub fn potential_carriers(&self) -> impl Iterator<Item = &SymbolInfo> {
        self.constructors().chain(self.constructor_like())
    }

    /// Indices of the rules whose left-hand side has the given root.
    pub fn rules_for(&self, root: &Symbol) -> &[usize] {
        self.rules_by_root
            .get(root)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn has_weak_rules(&self) -> bool {
        self.rules.iter().any(|r| !r.strict)
    }

    /// Copy of this system in which only the strict rules accepted by `keep`
    /// stay strict; the others become weak.
    pub fn with_counted_rules<F: Fn(usize) -> bool>(&self, keep: F) -> Trs {
        let mut out = self.clone();
        for (i, r) in out.rules.iter_mut().enumerate() {
            r.strict = r.strict && keep(i);
        }
        out
    }

    /// TPDB concrete syntax; parsing the output yields an equal system.
    pub fn to_tpdb(&self) -> String {
        let mut vars: Vec<Symbol> = Vec::new();
        for r in &self.rules {
            for x in r.lhs.vars() {
                if !vars.contains(&x) {
                    vars.push(x);
                }
            }
        }
        let mut out = String::from("(VAR");
        for x in &vars {
            out.push(' ');
            out.push_str(x.as_str());
        }
        out.push_str(")\n(RULES\n");
        for r in &self.rules {
            out.push_str(&format!("  {r}\n"));
        }
        out.push_str(")\n");
        out
    }
}
