use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An interned-by-sharing name used for both function symbols and variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A first-order term: a variable or a function symbol applied to arguments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    App(Symbol, Vec<Term>),
}

pub type Substitution = BTreeMap<Symbol, Term>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(name), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Symbol::new(name), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut BTreeSet<Symbol>, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(x) => {
                if seen.insert(x.clone()) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(seen, out);
                }
            }
        }
    }

    /// Variable occurrences in left-to-right order, with repetitions.
    pub fn var_occurrences(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Var(x) = t {
                out.push(x.clone());
            }
        });
        out
    }

    pub fn is_linear(&self) -> bool {
        let occ = self.var_occurrences();
        let distinct: BTreeSet<_> = occ.iter().collect();
        distinct.len() == occ.len()
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Term)>(&self, f: &mut F) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Every function symbol occurring in the term.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::App(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn substitute(&self, sigma: &Substitution) -> Term {
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.substitute(sigma)).collect(),
            ),
        }
    }

    /// Renames variables; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<Symbol, Symbol>) -> Term {
        match self {
            Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
        }
    }

    /// Syntactic matching of `self` (the pattern) against `subject`, extending `sigma`.
    /// Non-linear patterns require equal instances for repeated variables.
    pub fn matches(&self, subject: &Term, sigma: &mut Substitution) -> bool {
        match self {
            Term::Var(x) => match sigma.get(x) {
                Some(bound) => bound == subject,
                None => {
                    sigma.insert(x.clone(), subject.clone());
                    true
                }
            },
            Term::App(f, pargs) => match subject {
                Term::App(g, sargs) if f == g && pargs.len() == sargs.len() => {
                    pargs.iter().zip(sargs).all(|(p, s)| p.matches(s, sigma))
                }
                _ => false,
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renames a sequence of terms apart so that no variable occurs twice.
///
/// Only variables that occur more than once are renamed; the `k`-th occurrence
/// of `x` becomes `x_k` (skipping names already in use). The returned grouping
/// maps every variable of the output to the variable it replaces.
pub fn linearise(terms: &[Term]) -> (Vec<Term>, BTreeMap<Symbol, Symbol>) {
    let mut counts: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for t in terms {
        for x in t.var_occurrences() {
            used.insert(x.as_str().to_owned());
            *counts.entry(x).or_default() += 1;
        }
    }
    let mut next: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut grouping = BTreeMap::new();

    fn go(
        t: &Term,
        counts: &BTreeMap<Symbol, usize>,
        next: &mut BTreeMap<Symbol, usize>,
        used: &mut BTreeSet<String>,
        grouping: &mut BTreeMap<Symbol, Symbol>,
    ) -> Term {
        match t {
            Term::Var(x) => {
                if counts[x] <= 1 {
                    grouping.insert(x.clone(), x.clone());
                    return t.clone();
                }
                let counter = next.entry(x.clone()).or_insert(0);
                let fresh = loop {
                    *counter += 1;
                    let candidate = format!("{}_{}", x, counter);
                    if !used.contains(&candidate) {
                        break candidate;
                    }
                };
                used.insert(fresh.clone());
                let fresh = Symbol::new(&fresh);
                grouping.insert(fresh.clone(), x.clone());
                Term::Var(fresh)
            }
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter()
                    .map(|a| go(a, counts, next, used, grouping))
                    .collect(),
            ),
        }
    }

    let out = terms
        .iter()
        .map(|t| go(t, &counts, &mut next, &mut used, &mut grouping))
        .collect();
    (out, grouping)
}
