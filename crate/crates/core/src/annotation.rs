//! Resource annotations, annotated signatures and the potential of normal forms.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::trs::{Symbol, Term};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `num/den` (the denominator is always present).
pub fn rational_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `n`, `n/d`, or a decimal such as `-1.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac)
        .parse()
        .ok()?;
    let scale = num::pow(BigInt::from(10), frac.len());
    let q = Rational::new(digits, scale);
    Some(if neg { -q } else { q })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("annotation entry {0} is negative")]
    Negative(String),
    #[error("scaling factor {0} is negative")]
    NegativeScale(String),
    #[error("symbol `{0}` has no declaration in the signature table")]
    MissingSymbol(String),
    #[error("annotation of length {len} exceeds the degree {degree} of `{symbol}`")]
    TooLong {
        symbol: String,
        len: usize,
        degree: usize,
    },
    #[error("potential of non-ground term `{0}`")]
    NotGround(String),
}

/// A vector of non-negative rationals. Trailing zeros carry no meaning, so
/// equality ignores them.
#[derive(Clone, Default)]
pub struct Annotation(Vec<Rational>);

impl Annotation {
    pub fn new(entries: Vec<Rational>) -> Result<Annotation, AnnotationError> {
        if let Some(e) = entries.iter().find(|e| e.is_negative()) {
            return Err(AnnotationError::Negative(rational_string(e)));
        }
        Ok(Annotation(entries))
    }

    pub fn empty() -> Annotation {
        Annotation(Vec::new())
    }

    pub fn from_ints(entries: &[i64]) -> Annotation {
        Annotation::new(entries.iter().map(|&n| rat(n)).collect()).expect("non-negative integers")
    }

    /// The `j`-th unit vector (1-based).
    pub fn unit(j: usize) -> Annotation {
        let mut v = vec![Rational::zero(); j];
        v[j - 1] = Rational::one();
        Annotation(v)
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    /// Entry `i` (0-based); zero beyond the stored length.
    pub fn get(&self, i: usize) -> Rational {
        self.0.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Length after stripping trailing zeros.
    pub fn len(&self) -> usize {
        self.0
            .iter()
            .rposition(|e| !e.is_zero())
            .map_or(0, |i| i + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn trimmed(&self) -> Annotation {
        Annotation(self.0[..self.len()].to_vec())
    }

    /// Zero-padded (or truncated) to exactly `n` entries.
    pub fn padded(&self, n: usize) -> Vec<Rational> {
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn add(&self, other: &Annotation) -> Annotation {
        let n = self.0.len().max(other.0.len());
        Annotation((0..n).map(|i| self.get(i) + other.get(i)).collect())
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Annotation, AnnotationError> {
        if lambda.is_negative() {
            return Err(AnnotationError::NegativeScale(rational_string(lambda)));
        }
        Ok(Annotation(self.0.iter().map(|e| e * lambda).collect()))
    }

    /// Component-wise comparison after zero-padding.
    pub fn leq(&self, other: &Annotation) -> bool {
        let n = self.0.len().max(other.0.len());
        (0..n).all(|i| self.get(i) <= other.get(i))
    }

    /// The sharing relation: `p1 + p2 = self`.
    pub fn shares(&self, p1: &Annotation, p2: &Annotation) -> bool {
        &p1.add(p2) == self
    }

    /// Largest entry; zero for the empty annotation.
    pub fn max(&self) -> Rational {
        self.0
            .iter()
            .cloned()
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl PartialEq for Annotation {
    fn eq(&self, other: &Self) -> bool {
        let n = self.0.len().max(other.0.len());
        (0..n).all(|i| self.get(i) == other.get(i))
    }
}

impl Eq for Annotation {}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.trimmed().0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `p1 × … × pn → q` with cost `k`.
#[derive(Clone, PartialEq, Eq)]
pub struct SignatureDecl {
    pub args: Vec<Annotation>,
    pub result: Annotation,
    pub cost: Rational,
}

impl SignatureDecl {
    pub fn new(
        args: Vec<Annotation>,
        result: Annotation,
        cost: Rational,
    ) -> Result<SignatureDecl, AnnotationError> {
        if cost.is_negative() {
            return Err(AnnotationError::Negative(rational_string(&cost)));
        }
        Ok(SignatureDecl { args, result, cost })
    }

    pub fn zero(arity: usize) -> SignatureDecl {
        SignatureDecl {
            args: vec![Annotation::empty(); arity],
            result: Annotation::empty(),
            cost: Rational::zero(),
        }
    }

    pub fn add(&self, other: &SignatureDecl) -> SignatureDecl {
        SignatureDecl {
            args: self
                .args
                .iter()
                .zip(&other.args)
                .map(|(a, b)| a.add(b))
                .collect(),
            result: self.result.add(&other.result),
            cost: &self.cost + &other.cost,
        }
    }

    pub fn scale(&self, lambda: &Rational) -> Result<SignatureDecl, AnnotationError> {
        Ok(SignatureDecl {
            args: self
                .args
                .iter()
                .map(|a| a.scale(lambda))
                .collect::<Result<_, _>>()?,
            result: self.result.scale(lambda)?,
            cost: &self.cost * lambda,
        })
    }
}

impl fmt::Display for SignatureDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{a}")?;
        }
        if self.args.is_empty() {
            f.write_str("()")?;
        }
        write!(f, " -> {} [cost {}]", self.result, self.cost)
    }
}

impl fmt::Debug for SignatureDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A solved, monomorphic annotated signature.
///
/// Defined symbols have one main declaration and possibly one cost-free
/// declaration. Potential carriers (constructors and constructor-like symbols)
/// have `degree` base declarations; `bases[c][j]` has result `e_{j+1}`, and every
/// instance is the non-negative combination selected by its result.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedSignatureTable {
    pub degree: usize,
    pub main: BTreeMap<Symbol, SignatureDecl>,
    pub cost_free: BTreeMap<Symbol, SignatureDecl>,
    pub bases: BTreeMap<Symbol, Vec<SignatureDecl>>,
}

impl AnnotatedSignatureTable {
    pub fn new(degree: usize) -> Self {
        AnnotatedSignatureTable {
            degree,
            ..Default::default()
        }
    }

    /// The unique declaration of a carrier whose result is `q`: `Σ_j q_j · base_j`.
    pub fn instance_decl(
        &self,
        symbol: &Symbol,
        q: &Annotation,
    ) -> Result<SignatureDecl, AnnotationError> {
        let bases = self
            .bases
            .get(symbol)
            .ok_or_else(|| AnnotationError::MissingSymbol(symbol.to_string()))?;
        if q.len() > bases.len() {
            return Err(AnnotationError::TooLong {
                symbol: symbol.to_string(),
                len: q.len(),
                degree: bases.len(),
            });
        }
        let arity = bases.first().map_or(0, |b| b.args.len());
        let mut out = SignatureDecl::zero(arity);
        for (j, base) in bases.iter().enumerate().take(q.len()) {
            out = out.add(&base.scale(&q.get(j))?);
        }
        out.result = q.trimmed();
        Ok(out)
    }

    /// Potential `Φ(v:q)` by direct recursion over the term.
    ///
    /// Terms that contain a defined symbol without base declarations have
    /// potential zero; symbols unknown to the table are an error.
    pub fn potential(&self, v: &Term, q: &Annotation) -> Result<Rational, AnnotationError> {
        if !v.is_ground() {
            return Err(AnnotationError::NotGround(v.to_string()));
        }
        let mut carrier_only = true;
        let mut missing = None;
        v.visit(&mut |t| {
            if let Term::App(f, _) = t {
                if !self.bases.contains_key(f) {
                    carrier_only = false;
                    if !self.main.contains_key(f) && missing.is_none() {
                        missing = Some(f.to_string());
                    }
                }
            }
        });
        if let Some(f) = missing {
            return Err(AnnotationError::MissingSymbol(f));
        }
        if !carrier_only {
            return Ok(Rational::zero());
        }
        self.carrier_potential(v, q)
    }

    fn carrier_potential(&self, v: &Term, q: &Annotation) -> Result<Rational, AnnotationError> {
        let Term::App(f, args) = v else {
            unreachable!("ground")
        };
        let decl = self.instance_decl(f, q)?;
        let mut total = decl.cost.clone();
        for (a, p) in args.iter().zip(&decl.args) {
            total += self.carrier_potential(a, p)?;
        }
        Ok(total)
    }

    /// `(Φ(v:e_1), …, Φ(v:e_d))`, computed bottom-up. By additivity
    /// `Φ(v:q) = Σ_j q_j · profile_j`; zero if `v` is not built from carriers only.
    pub fn potential_profile(&self, v: &Term) -> Result<Vec<Rational>, AnnotationError> {
        let d = self.degree;
        let Term::App(f, args) = v else {
            return Err(AnnotationError::NotGround(v.to_string()));
        };
        let Some(bases) = self.bases.get(f) else {
            if self.main.contains_key(f) {
                return Ok(vec![Rational::zero(); d]);
            }
            return Err(AnnotationError::MissingSymbol(f.to_string()));
        };
        let subs: Vec<Vec<Rational>> = args
            .iter()
            .map(|a| self.potential_profile(a))
            .collect::<Result<_, _>>()?;
        let mut out = vec![Rational::zero(); d];
        if args.iter().any(|a| !self.carrier_only(a)) {
            return Ok(out);
        }
        for (j, base) in bases.iter().enumerate() {
            let mut acc = base.cost.clone();
            for (p, sub) in base.args.iter().zip(&subs) {
                for (l, s) in sub.iter().enumerate() {
                    acc += p.get(l) * s;
                }
            }
            out[j] = acc;
        }
        Ok(out)
    }

    fn carrier_only(&self, v: &Term) -> bool {
        let mut ok = true;
        v.visit(&mut |t| {
            if let Term::App(f, _) = t {
                ok &= self.bases.contains_key(f);
            }
        });
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(v: &[i64]) -> Annotation {
        Annotation::from_ints(v)
    }

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn list(n: usize) -> Term {
        (0..n).fold(c("nil"), |t, _| Term::app("cons", vec![c("a"), t]))
    }

    /// nil: () -> k cost 0, cons: (0 × k) -> k cost k, a: () -> k cost 0.
    fn list_table(degree: usize) -> AnnotatedSignatureTable {
        let mut t = AnnotatedSignatureTable::new(degree);
        let nil: Vec<_> = (1..=degree)
            .map(|j| SignatureDecl::new(vec![], Annotation::unit(j), rat(0)).unwrap())
            .collect();
        let cons: Vec<_> = (1..=degree)
            .map(|j| {
                let cost = if j == 1 { rat(1) } else { rat(0) };
                SignatureDecl::new(
                    vec![ann(&[]), Annotation::unit(j)],
                    Annotation::unit(j),
                    cost,
                )
                .unwrap()
            })
            .collect();
        t.bases.insert(Symbol::new("nil"), nil.clone());
        t.bases.insert(Symbol::new("a"), nil);
        t.bases.insert(Symbol::new("cons"), cons);
        t
    }

    #[test]
    fn addition_pads_with_zeros() {
        assert_eq!(ann(&[1, 2]).add(&ann(&[3, 4, 5])), ann(&[4, 6, 5]));
        assert_eq!(ann(&[1, 2]).add(&ann(&[])), ann(&[1, 2]));
        let half = Annotation::new(vec![ratio(1, 2)]).unwrap();
        assert_eq!(half.add(&half), ann(&[1]));
    }

    #[test]
    fn scaling() {
        assert_eq!(ann(&[6]).scale(&rat(2)).unwrap(), ann(&[12]));
        assert_eq!(ann(&[3, 1]).scale(&rat(0)).unwrap(), ann(&[]));
        assert_eq!(ann(&[3, 1]).scale(&rat(1)).unwrap(), ann(&[3, 1]));
        assert!(ann(&[1]).scale(&rat(-1)).is_err());
    }

    #[test]
    fn ordering_and_sharing() {
        assert!(ann(&[1, 2]).leq(&ann(&[1, 2, 3])));
        assert!(!ann(&[2]).leq(&ann(&[1])));
        assert!(ann(&[4, 1]).leq(&ann(&[4, 1])));
        assert!(ann(&[4]).shares(&ann(&[1]), &ann(&[3])));
        assert!(!ann(&[4]).shares(&ann(&[1]), &ann(&[2])));
        assert!(ann(&[2, 2]).shares(&ann(&[2, 0]), &ann(&[0, 2])));
    }

    #[test]
    fn trailing_zeros_are_ignored() {
        assert_eq!(ann(&[]), ann(&[0, 0]));
        assert_eq!(ann(&[1, 0]).len(), 1);
        assert!(Annotation::new(vec![rat(-1)]).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/2"), Some(ratio(3, 2)));
        assert_eq!(parse_rational("1.25"), Some(ratio(5, 4)));
        assert_eq!(parse_rational("-0.5"), Some(ratio(-1, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(rational_string(&rat(3)), "3/1");
    }

    #[test]
    fn list_potential_is_length_times_k() {
        let t = list_table(1);
        assert_eq!(t.potential(&list(2), &ann(&[2])).unwrap(), rat(4));
        assert_eq!(t.potential(&list(5), &ann(&[])).unwrap(), rat(0));
        assert_eq!(t.potential_profile(&list(3)).unwrap(), vec![rat(3)]);
    }

    #[test]
    fn example_base_constructors_combine() {
        let mut t = AnnotatedSignatureTable::new(2);
        t.bases.insert(
            Symbol::new("cons"),
            vec![
                SignatureDecl::new(vec![ann(&[0, 0]), ann(&[1, 0])], ann(&[1, 0]), rat(1)).unwrap(),
                SignatureDecl::new(vec![ann(&[0, 0]), ann(&[2, 1])], ann(&[0, 1]), rat(1)).unwrap(),
            ],
        );
        let cons = Symbol::new("cons");
        let d = t.instance_decl(&cons, &ann(&[1, 1])).unwrap();
        assert_eq!(
            d,
            SignatureDecl::new(vec![ann(&[0, 0]), ann(&[3, 1])], ann(&[1, 1]), rat(2)).unwrap()
        );
        assert_eq!(
            t.instance_decl(&cons, &ann(&[1])).unwrap(),
            t.bases[&cons][0]
        );
        assert_eq!(
            t.instance_decl(&cons, &ann(&[])).unwrap(),
            SignatureDecl::zero(2)
        );
        assert!(t.instance_decl(&cons, &ann(&[0, 0, 1])).is_err());
    }

    #[test]
    fn exponential_potential() {
        let mut t = AnnotatedSignatureTable::new(1);
        t.bases.insert(
            Symbol::new("0"),
            vec![SignatureDecl::new(vec![], ann(&[1]), rat(0)).unwrap()],
        );
        t.bases.insert(
            Symbol::new("S"),
            vec![SignatureDecl::new(vec![ann(&[2])], ann(&[1]), rat(1)).unwrap()],
        );
        let two = Term::app("S", vec![Term::app("S", vec![c("0")])]);
        assert_eq!(t.potential(&two, &ann(&[1])).unwrap(), rat(3));
    }

    #[test]
    fn defined_symbols_have_no_potential() {
        let mut t = list_table(1);
        t.main.insert(Symbol::new("f"), SignatureDecl::zero(1));
        let v = Term::app("cons", vec![Term::app("f", vec![c("a")]), list(1)]);
        assert_eq!(t.potential(&v, &ann(&[5])).unwrap(), rat(0));
        assert_eq!(t.potential_profile(&v).unwrap(), vec![rat(0)]);
        assert!(t.potential(&Term::constant("g"), &ann(&[1])).is_err());
    }
}
