//! Empirical checks of solved signatures: the amortised bound against
//! exhaustive innermost rewriting, and the polynomial potential bound against
//! all small constructor terms.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;
use rayon::prelude::*;

use crate::annotation::{
    AnnotatedSignatureTable, Annotation, AnnotationError, Rational, SignatureDecl,
};
use crate::trs::{enumerate_basic_terms, explore_derivations, Term, Trs};

pub const DEFAULT_MAX_SIZE: usize = 8;
pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub term: Term,
    pub strict_steps: u64,
    pub budget: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub terms_checked: usize,
    /// Minimum of `budget − strict steps` over the checked terms.
    pub max_slack: Option<Rational>,
    pub violations: Vec<Violation>,
    pub budget_exhausted: Vec<Term>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(mut self, other: VerificationReport) -> VerificationReport {
        self.terms_checked += other.terms_checked;
        self.max_slack = match (self.max_slack, other.max_slack) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.violations.extend(other.violations);
        self.budget_exhausted.extend(other.budget_exhausted);
        self
    }
}

/// `Σ_i Φ(v_i : p_i) + k` for a basic term `f(v_1, …, v_n)` and the main
/// declaration `p_1 × … × p_n → q, k` of `f`.
pub fn term_budget(table: &AnnotatedSignatureTable, t: &Term) -> Result<Rational, AnnotationError> {
    let Term::App(f, args) = t else {
        return Err(AnnotationError::NotGround(t.to_string()));
    };
    let decl = table
        .main
        .get(f)
        .ok_or_else(|| AnnotationError::MissingSymbol(f.to_string()))?;
    let mut total = decl.cost.clone();
    for (v, p) in args.iter().zip(&decl.args) {
        total += dot(p, &table.potential_profile(v)?);
    }
    Ok(total)
}

fn dot(q: &Annotation, profile: &[Rational]) -> Rational {
    profile
        .iter()
        .enumerate()
        .map(|(j, x)| q.get(j) * x)
        .fold(Rational::zero(), |a, b| a + b)
}

fn check_term(
    trs: &Trs,
    table: &AnnotatedSignatureTable,
    t: &Term,
    budget: u64,
) -> Result<VerificationReport, AnnotationError> {
    let bound = term_budget(table, t)?;
    let run = explore_derivations(t, trs, budget);
    if run.exhausted {
        return Ok(VerificationReport {
            budget_exhausted: vec![t.clone()],
            ..Default::default()
        });
    }
    let steps = Rational::from_integer(run.max_strict_steps.into());
    let slack = &bound - &steps;
    let violations = if slack < Rational::zero() {
        vec![Violation {
            term: t.clone(),
            strict_steps: run.max_strict_steps,
            budget: bound,
        }]
    } else {
        Vec::new()
    };
    Ok(VerificationReport {
        terms_checked: 1,
        max_slack: Some(slack),
        violations,
        budget_exhausted: Vec::new(),
    })
}

/// Checks `max strict steps ≤ Σ Φ(v_i:p_i) + k` for every basic term of size
/// at most `max_size`. Terms whose exploration exceeds `budget` are listed,
/// not judged.
pub fn verify_soundness(
    trs: &Trs,
    table: &AnnotatedSignatureTable,
    max_size: usize,
    budget: u64,
) -> Result<VerificationReport, AnnotationError> {
    let terms = enumerate_basic_terms(trs, max_size);
    let parts: Vec<VerificationReport> = terms
        .par_iter()
        .map(|t| check_term(trs, table, t, budget))
        .collect::<Result<_, _>>()?;
    Ok(parts
        .into_iter()
        .fold(VerificationReport::default(), VerificationReport::merge))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundFailure {
    pub term: Term,
    pub annotation: Annotation,
    pub potential: Rational,
    pub bound: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PotentialBoundReport {
    /// Number of carrier terms covered.
    pub terms_covered: u128,
    /// Distinct potential profiles actually evaluated.
    pub profiles_checked: usize,
    pub annotations: usize,
    pub failures: Vec<BoundFailure>,
}

impl PotentialBoundReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct ProfileClass {
    witness: Term,
    count: u128,
}

fn combine(bases: &[SignatureDecl], subs: &[&Vec<Rational>], degree: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); degree];
    for (j, base) in bases.iter().enumerate() {
        let mut acc = base.cost.clone();
        for (p, sub) in base.args.iter().zip(subs) {
            for (l, s) in sub.iter().enumerate() {
                acc += p.get(l) * s;
            }
        }
        out[j] = acc;
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All potential profiles of carrier terms, grouped by term size
/// (`levels[s]` for size `s`). Terms with equal profiles are merged, keeping
/// a witness and the multiplicity.
fn profile_levels(
    table: &AnnotatedSignatureTable,
    max_size: usize,
) -> Vec<BTreeMap<Vec<Rational>, ProfileClass>> {
    let d = table.degree;
    let mut levels: Vec<BTreeMap<Vec<Rational>, ProfileClass>> =
        (0..=max_size).map(|_| BTreeMap::new()).collect();
    for size in 1..=max_size {
        let mut level = BTreeMap::new();
        for (c, bases) in &table.bases {
            let arity = bases.first().map_or(0, |b| b.args.len());
            for comp in compositions(size - 1, arity) {
                let choices: Vec<Vec<(&Vec<Rational>, &ProfileClass)>> =
                    comp.iter().map(|&s| levels[s].iter().collect()).collect();
                if choices.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = vec![0usize; arity];
                'product: loop {
                    let picked: Vec<&(&Vec<Rational>, &ProfileClass)> =
                        idx.iter().zip(&choices).map(|(&i, ch)| &ch[i]).collect();
                    let profile =
                        combine(bases, &picked.iter().map(|p| p.0).collect::<Vec<_>>(), d);
                    let count = picked.iter().map(|p| p.1.count).product::<u128>();
                    let entry = level.entry(profile).or_insert_with(|| ProfileClass {
                        witness: Term::App(
                            c.clone(),
                            picked.iter().map(|p| p.1.witness.clone()).collect(),
                        ),
                        count: 0,
                    });
                    entry.count += count;
                    let mut k = arity;
                    while k > 0 {
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < choices[k].len() {
                            continue 'product;
                        }
                        idx[k] = 0;
                    }
                    break;
                }
            }
        }
        levels[size] = level;
    }
    levels
}

/// Checks `Φ(v:q) ≤ max(q) · |v|^len(q)` for every carrier term `v` with
/// `|v| ≤ max_size` and every argument annotation `q` of a defined symbol.
pub fn verify_potential_bound(
    table: &AnnotatedSignatureTable,
    max_size: usize,
) -> PotentialBoundReport {
    let annotations: BTreeSet<Vec<Rational>> = table
        .main
        .values()
        .chain(table.cost_free.values())
        .flat_map(|decl| decl.args.iter().map(|a| a.trimmed().entries().to_vec()))
        .collect();
    let annotations: Vec<Annotation> = annotations
        .into_iter()
        .map(|e| Annotation::new(e).expect("solved annotations are non-negative"))
        .collect();
    let levels = profile_levels(table, max_size);
    let mut report = PotentialBoundReport {
        annotations: annotations.len(),
        ..Default::default()
    };
    for (size, level) in levels.iter().enumerate() {
        for (profile, class) in level {
            report.terms_covered += class.count;
            report.profiles_checked += 1;
            for q in &annotations {
                let potential = dot(q, profile);
                let bound = q.max() * num::pow(Rational::from_integer(size.into()), q.len());
                if potential > bound {
                    report.failures.push(BoundFailure {
                        term: class.witness.clone(),
                        annotation: q.clone(),
                        potential,
                        bound,
                    });
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub size: usize,
    pub terms: usize,
    pub max_strict_steps: u64,
    pub exhausted: usize,
}

/// Maximal strict derivation height over all basic terms of each size.
pub fn fit_empirical_degree(trs: &Trs, max_size: usize, budget: u64) -> Vec<GrowthRow> {
    let terms = enumerate_basic_terms(trs, max_size);
    let runs: Vec<(usize, u64, bool)> = terms
        .par_iter()
        .map(|t| {
            let r = explore_derivations(t, trs, budget);
            (t.size(), r.max_strict_steps, r.exhausted)
        })
        .collect();
    let mut rows: Vec<GrowthRow> = (1..=max_size)
        .map(|size| GrowthRow {
            size,
            terms: 0,
            max_strict_steps: 0,
            exhausted: 0,
        })
        .collect();
    for (size, steps, exhausted) in runs {
        let row = &mut rows[size - 1];
        row.terms += 1;
        if exhausted {
            row.exhausted += 1;
        } else {
            row.max_strict_steps = row.max_strict_steps.max(steps);
        }
    }
    rows
}

#[cfg(test)]
mod tests;
