//! Call graph over defined symbols and its strongly connected components.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{Symbol, Term, Trs};

/// Edge `f -> g` iff `g` is a defined symbol occurring in the right-hand side
/// of a rule defining `f`. Components are numbered in topological order of the
/// condensation, callers before callees.
#[derive(Clone, Debug)]
pub struct CallGraph {
    scc_of: HashMap<Symbol, usize>,
    members: Vec<Vec<Symbol>>,
    recursive: Vec<bool>,
}

impl CallGraph {
    pub fn new(trs: &Trs) -> CallGraph {
        let mut graph: DiGraph<Symbol, ()> = DiGraph::new();
        let mut node: HashMap<Symbol, NodeIndex> = HashMap::new();
        for f in trs.defined_symbols() {
            node.insert(f.name.clone(), graph.add_node(f.name.clone()));
        }
        let mut self_loop: HashMap<Symbol, bool> = HashMap::new();
        for rule in trs.rules() {
            let f = rule.root();
            let mut callees = Vec::new();
            rule.rhs.visit(&mut |t: &Term| {
                if let Term::App(g, _) = t {
                    if trs.is_defined(g) {
                        callees.push(g.clone());
                    }
                }
            });
            for g in callees {
                if &g == f {
                    self_loop.insert(f.clone(), true);
                }
                if graph.find_edge(node[f], node[&g]).is_none() {
                    graph.add_edge(node[f], node[&g], ());
                }
            }
        }
        // tarjan_scc yields components in reverse topological order.
        let mut comps = tarjan_scc(&graph);
        comps.reverse();
        let mut scc_of = HashMap::new();
        let mut members = Vec::new();
        let mut recursive = Vec::new();
        for (id, comp) in comps.into_iter().enumerate() {
            let mut names: Vec<Symbol> = comp.iter().map(|&n| graph[n].clone()).collect();
            names.sort_by_key(|s| trs.symbols().iter().position(|i| &i.name == s));
            let rec = names.len() > 1 || self_loop.get(&names[0]).copied().unwrap_or(false);
            for s in &names {
                scc_of.insert(s.clone(), id);
            }
            members.push(names);
            recursive.push(rec);
        }
        CallGraph {
            scc_of,
            members,
            recursive,
        }
    }

    /// Component id of a defined symbol.
    pub fn scc(&self, f: &Symbol) -> Option<usize> {
        self.scc_of.get(f).copied()
    }

    pub fn same_scc(&self, f: &Symbol, g: &Symbol) -> bool {
        matches!((self.scc(f), self.scc(g)), (Some(a), Some(b)) if a == b)
    }

    /// Members of each component, indexed by component id.
    pub fn components(&self) -> &[Vec<Symbol>] {
        &self.members
    }

    /// The component contains a cycle (several members or a self-call).
    pub fn is_recursive(&self, f: &Symbol) -> bool {
        self.scc(f).is_some_and(|id| self.recursive[id])
    }
}
