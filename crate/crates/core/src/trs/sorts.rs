//! Monomorphic sort inference by unification over argument and result slots.
//!
//! Every symbol gets one slot for its result and one per argument; each rule
//! equates the sorts of its two sides, and every application equates an
//! argument slot with the sort of the term placed there. A constructor
//! argument position is recursive iff its slot ends up in the constructor's
//! own result sort.

use std::collections::{BTreeMap, HashMap};

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use super::{Symbol, Term, Trs};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("ambiguous sort: every constructor of the sort of {} has a recursive argument", .symbols.join(", "))]
    NoBaseCase { symbols: Vec<String> },
}

struct Slots {
    result: HashMap<Symbol, usize>,
    args: HashMap<Symbol, Vec<usize>>,
    count: usize,
}

impl Slots {
    fn fresh(&mut self) -> usize {
        self.count += 1;
        self.count - 1
    }
}

/// Recursive argument positions for every potential carrier (constructors and
/// constructor-like symbols).
pub fn infer_recursive_positions(trs: &Trs) -> Result<BTreeMap<Symbol, Vec<bool>>, SortError> {
    let mut slots = Slots {
        result: HashMap::new(),
        args: HashMap::new(),
        count: 0,
    };
    for s in trs.symbols() {
        let r = slots.fresh();
        slots.result.insert(s.name.clone(), r);
        let a = (0..s.arity).map(|_| slots.fresh()).collect();
        slots.args.insert(s.name.clone(), a);
    }
    let mut eqs: Vec<(usize, usize)> = Vec::new();

    fn sort_of(
        t: &Term,
        slots: &mut Slots,
        vars: &mut HashMap<Symbol, usize>,
        eqs: &mut Vec<(usize, usize)>,
    ) -> usize {
        match t {
            Term::Var(x) => {
                if let Some(&s) = vars.get(x) {
                    return s;
                }
                let s = slots.fresh();
                vars.insert(x.clone(), s);
                s
            }
            Term::App(f, args) => {
                for (i, a) in args.iter().enumerate() {
                    let s = sort_of(a, slots, vars, eqs);
                    eqs.push((slots.args[f][i], s));
                }
                slots.result[f]
            }
        }
    }

    for rule in trs.rules() {
        let mut vars = HashMap::new();
        let l = sort_of(&rule.lhs, &mut slots, &mut vars, &mut eqs);
        let r = sort_of(&rule.rhs, &mut slots, &mut vars, &mut eqs);
        eqs.push((l, r));
    }

    let mut uf = UnionFind::<usize>::new(slots.count);
    for (a, b) in eqs {
        uf.union(a, b);
    }

    let carriers: Vec<_> = trs.potential_carriers().collect();
    let mut out = BTreeMap::new();
    for c in &carriers {
        let res = uf.find(slots.result[&c.name]);
        let flags: Vec<bool> = slots.args[&c.name]
            .iter()
            .map(|&a| uf.find(a) == res)
            .collect();
        out.insert(c.name.clone(), flags);
    }

    let mut by_sort: BTreeMap<usize, Vec<&Symbol>> = BTreeMap::new();
    for c in &carriers {
        by_sort
            .entry(uf.find(slots.result[&c.name]))
            .or_default()
            .push(&c.name);
    }
    for members in by_sort.values() {
        let has_base = members.iter().any(|c| out[*c].iter().all(|r| !r));
        if !has_base {
            return Err(SortError::NoBaseCase {
                symbols: members.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    Ok(out)
}
