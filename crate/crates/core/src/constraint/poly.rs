//! Polynomials with exact rational coefficients over constraint variables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::annotation::Rational;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A product of variables, sorted; the empty product is the constant monomial.
pub type Monomial = Vec<VarId>;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn constant(c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { terms }
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(crate::annotation::rat(n))
    }

    pub fn var(v: VarId) -> Poly {
        let mut terms = BTreeMap::new();
        terms.insert(vec![v], Rational::one());
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// The value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().flatten().copied()
    }

    /// Evaluates with `values[v.index()]` for every variable `v`.
    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for v in m {
                term *= &values[v.index()];
            }
            total += term;
        }
        total
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, k| !k.is_zero());
        }
    }

    /// Replaces the variables in `fixed` by their values.
    pub fn substitute(&self, fixed: &BTreeMap<VarId, Rational>) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for v in m {
                match fixed.get(v) {
                    Some(x) => coeff *= x,
                    None => rest.push(*v),
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    pub fn sum<I: IntoIterator<Item = Poly>>(it: I) -> Poly {
        it.into_iter().fold(Poly::default(), |a, b| a + b)
    }
}

impl Zero for Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let mut m: Monomial = m1.iter().chain(m2).copied().collect();
                m.sort();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let a = c.abs();
            if m.is_empty() || !a.is_one() {
                write!(f, "{a}")?;
            }
            for (k, v) in m.iter().enumerate() {
                if k > 0 || !a.is_one() {
                    f.write_str("*")?;
                }
                write!(f, "v{}", v.0)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{rat, ratio};

    fn v(i: u32) -> Poly {
        Poly::var(VarId(i))
    }

    #[test]
    fn arithmetic_normalises() {
        let p = &v(0) + &v(1);
        let q = &p - &v(1);
        assert_eq!(q, v(0));
        assert!((&p - &p).is_zero());
        let sq = &p * &p;
        assert_eq!(sq.degree(), 2);
        assert_eq!(sq.eval(&[rat(2), rat(3)]), rat(25));
        assert_eq!(Poly::constant(ratio(1, 2)).as_constant(), Some(ratio(1, 2)));
        assert_eq!(v(0).as_constant(), None);
        assert_eq!((&v(1) * &v(0)), (&v(0) * &v(1)));
    }

    #[test]
    fn substitution_lowers_degree() {
        let p = &(&v(0) * &v(1)) + &v(1);
        let fixed: BTreeMap<VarId, Rational> = [(VarId(0), rat(3))].into_iter().collect();
        assert_eq!(p.substitute(&fixed), v(1).scale(&rat(4)));
        let both: BTreeMap<VarId, Rational> = [(VarId(0), rat(0)), (VarId(1), rat(2))]
            .into_iter()
            .collect();
        assert_eq!(p.substitute(&both), Poly::int(2));
    }

    #[test]
    fn scaling_by_zero_vanishes() {
        assert!(v(3).scale(&rat(0)).is_zero());
        assert_eq!(
            v(3).scale(&rat(2)).eval(&[rat(0), rat(0), rat(0), rat(5)]),
            rat(10)
        );
    }
}
