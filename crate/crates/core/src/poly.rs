//! Polynomials in `z_k, z̄_k` with exact complex-rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{CRational, Coeff};

/// A variable: coordinate `k` (0-based), conjugated or not. Ordered by
/// `2k + bar`, so `z_k` and `z̄_k` are adjacent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u16);

impl Var {
    pub fn z(k: usize) -> Self {
        Var(2 * k as u16)
    }
    pub fn zb(k: usize) -> Self {
        Var(2 * k as u16 + 1)
    }
    pub fn coordinate(self) -> usize {
        (self.0 / 2) as usize
    }
    pub fn is_bar(self) -> bool {
        self.0 % 2 == 1
    }
    pub fn conj(self) -> Self {
        Var(self.0 ^ 1)
    }
}

/// Exponent vector, sorted by variable, no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub Vec<(Var, u16)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|(_, e)| *e as usize).sum()
    }

    pub fn exponent(&self, v: Var) -> u16 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Var, u16> = self.0.iter().copied().collect();
        for (v, e) in &other.0 {
            *map.entry(*v).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    pub fn conj(&self) -> Self {
        let mut v: Vec<(Var, u16)> = self.0.iter().map(|(x, e)| (x.conj(), *e)).collect();
        v.sort();
        Monomial(v)
    }

    /// `∂/∂v`, as `(factor, monomial)`; `None` when `v` does not occur.
    pub fn derive(&self, v: Var) -> Option<(u16, Self)> {
        let e = self.exponent(v);
        if e == 0 {
            return None;
        }
        let rest = self
            .0
            .iter()
            .filter_map(|(w, f)| {
                if *w == v {
                    (f > &1).then_some((*w, f - 1))
                } else {
                    Some((*w, *f))
                }
            })
            .collect();
        Some((e, Monomial(rest)))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (v, e) in &self.0 {
            let x = if v.is_bar() { z[v.coordinate()].conj() } else { z[v.coordinate()] };
            acc *= x.powu(*e as u32);
        }
        acc
    }
}

/// A polynomial with [`CRational`] coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, CRational>,
}

impl Poly {
    pub fn constant(c: CRational) -> Self {
        let mut p = Poly::default();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn monomial(m: Monomial, c: CRational) -> Self {
        let mut p = Poly::default();
        p.add_term(m, c);
        p
    }

    /// `z_k` (0-based `k`).
    pub fn z(k: usize) -> Self {
        Self::monomial(Monomial::var(Var::z(k)), CRational::one())
    }

    /// `z̄_k` (0-based `k`).
    pub fn zb(k: usize) -> Self {
        Self::monomial(Monomial::var(Var::zb(k)), CRational::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: CRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `∂/∂z_k`.
    pub fn d_z(&self, k: usize) -> Self {
        self.derive(Var::z(k))
    }

    /// `∂/∂z̄_k`.
    pub fn d_zb(&self, k: usize) -> Self {
        self.derive(Var::zb(k))
    }

    pub fn derive(&self, v: Var) -> Self {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            if let Some((e, dm)) = m.derive(v) {
                out.add_term(dm, c * CRational::from(crate::scalar::int(e as i64)));
            }
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| <Complex64 as Coeff>::from_crational(c) * m.eval(z))
            .sum()
    }

    pub fn is_real(&self) -> bool {
        Coeff::conj(self) == *self
    }

    /// Largest coordinate index used, plus one.
    pub fn coordinate_bound(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.coordinate() + 1))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", crate::scalar::format_crational(c))?;
            for (v, e) in &m.0 {
                let name = if v.is_bar() { "zb" } else { "z" };
                write!(f, "·{name}{}", v.coordinate() + 1)?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(CRational::one())
    }
}

impl Coeff for Poly {
    fn conj(&self) -> Self {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            out.add_term(m.conj(), c.conj());
        }
        out
    }

    fn from_crational(c: &CRational) -> Self {
        Poly::constant(c.clone())
    }

    fn scale_rational(&self, r: &crate::scalar::Rational) -> Self {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), CRational::new(&c.re * r, &c.im * r));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cint;

    #[test]
    fn derivatives_are_exact() {
        let f = Poly::z(0) * Poly::z(0) * Poly::zb(1);
        assert_eq!(f.d_z(0), Poly::z(0) * Poly::zb(1) * Poly::constant(cint(2, 0)));
        assert_eq!(f.d_zb(1), Poly::z(0) * Poly::z(0));
        assert!(f.d_z(1).is_zero());
    }

    #[test]
    fn conjugation_swaps_variables() {
        let f = Poly::z(0) * Poly::constant(cint(1, 2));
        assert_eq!(Coeff::conj(&f), Poly::zb(0) * Poly::constant(cint(1, -2)));
        let r = Poly::z(0) * Poly::zb(0);
        assert!(r.is_real());
    }

    #[test]
    fn evaluation() {
        let f = Poly::z(0) * Poly::zb(0);
        let v = f.eval(&[Complex64::new(3.0, 4.0)]);
        assert!((v - Complex64::new(25.0, 0.0)).norm() < 1e-12);
    }
}
