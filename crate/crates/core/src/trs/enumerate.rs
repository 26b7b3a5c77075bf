//! Exhaustive enumeration of small ground terms.

use super::{Symbol, Term, Trs};

/// Ground terms over `symbols` grouped by size: entry `n` holds every term of
/// size `n` (entry 0 is empty). Order within a size follows `symbols`, then the
/// argument tuples lexicographically by size split.
pub fn terms_by_size(symbols: &[(Symbol, usize)], max_size: usize) -> Vec<Vec<Term>> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    for n in 1..=max_size {
        let mut layer = Vec::new();
        for (f, arity) in symbols {
            if *arity == 0 {
                if n == 1 {
                    layer.push(Term::App(f.clone(), Vec::new()));
                }
                continue;
            }
            if n < 1 + arity {
                continue;
            }
            for args in tuples(&by_size, *arity, n - 1) {
                layer.push(Term::App(f.clone(), args));
            }
        }
        by_size[n] = layer;
    }
    by_size
}

/// All `arity`-tuples of already enumerated terms whose sizes sum to exactly `total`.
fn tuples(by_size: &[Vec<Term>], arity: usize, total: usize) -> Vec<Vec<Term>> {
    if arity == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(arity - 1) {
        if first >= by_size.len() || by_size[first].is_empty() {
            continue;
        }
        let rests = tuples(by_size, arity - 1, total - first);
        for t in &by_size[first] {
            for rest in &rests {
                let mut args = Vec::with_capacity(arity);
                args.push(t.clone());
                args.extend(rest.iter().cloned());
                out.push(args);
            }
        }
    }
    out
}

fn constructor_sig(trs: &Trs) -> Vec<(Symbol, usize)> {
    trs.constructors()
        .map(|s| (s.name.clone(), s.arity))
        .collect()
}

/// Ground constructor terms of size at most `max_size`, by ascending size.
pub fn enumerate_constructor_terms(trs: &Trs, max_size: usize) -> Vec<Term> {
    terms_by_size(&constructor_sig(trs), max_size)
        .into_iter()
        .flatten()
        .collect()
}

/// Ground basic terms `f(v1,…,vn)` with `f` defined, every `vi` a constructor
/// term, and total size at most `max_size`. Ordered by size, then by the
/// position of `f` in the signature.
pub fn enumerate_basic_terms(trs: &Trs, max_size: usize) -> Vec<Term> {
    if max_size == 0 {
        return Vec::new();
    }
    let values = terms_by_size(&constructor_sig(trs), max_size.saturating_sub(1));
    let mut out = Vec::new();
    for n in 1..=max_size {
        for f in trs.defined_symbols() {
            if f.arity == 0 {
                if n == 1 {
                    out.push(Term::App(f.name.clone(), Vec::new()));
                }
                continue;
            }
            if n < 1 + f.arity {
                continue;
            }
            for args in tuples(&values, f.arity, n - 1) {
                out.push(Term::App(f.name.clone(), args));
            }
        }
    }
    out
}

/// Root is defined and every argument is a ground constructor term.
pub fn is_basic(t: &Term, trs: &Trs) -> bool {
    fn constructor_only(t: &Term, trs: &Trs) -> bool {
        match t {
            Term::Var(_) => false,
            Term::App(f, args) => {
                trs.is_constructor(f) && args.iter().all(|a| constructor_only(a, trs))
            }
        }
    }
    match t {
        Term::App(f, args) => trs.is_defined(f) && args.iter().all(|a| constructor_only(a, trs)),
        Term::Var(_) => false,
    }
}
