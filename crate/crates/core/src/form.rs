//! Sparse homogeneous elements of the complexified exterior algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, BitXor, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::FormError;
use crate::scalar::{CRational, Coeff};
use crate::space::{Generator, ModelSpace};

/// A wedge monomial: a set of generators stored as a bit mask.
///
/// Bit `g` is set when generator `g` occurs. Generators are always read in
/// increasing index order, which is the canonical term order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Blade(pub u64);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, g: Generator) -> bool {
        self.0 >> g.0 & 1 == 1
    }

    /// Generators in canonical order.
    pub fn generators(self) -> impl Iterator<Item = Generator> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let g = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(Generator(g))
        })
    }

    /// `(holomorphic count, antiholomorphic count)`.
    pub fn bidegree(self, space: &ModelSpace) -> (usize, usize) {
        let hol = (self.0 & space.holomorphic_mask()).count_ones() as usize;
        (hol, self.degree() - hol)
    }

    /// Sorts a generator sequence. Returns the sign of the sorting
    /// permutation and the blade, or `None` on a repeated generator.
    pub fn from_generators(gens: &[Generator]) -> Option<(i8, Blade)> {
        let mut mask = 0u64;
        let mut sign = 1i8;
        for g in gens {
            let bit = 1u64 << g.0;
            if mask & bit != 0 {
                return None;
            }
            if (mask >> g.0).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mask |= bit;
        }
        Some((sign, Blade(mask)))
    }

    /// Generators of `self` strictly between positions `a` and `b`.
    pub(crate) fn count_between(self, a: u8, b: u8) -> u32 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi - lo <= 1 {
            return 0;
        }
        let mask = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
        (self.0 & mask).count_ones()
    }
}

/// Sign of `a ∧ b` relative to the canonical blade `a | b`; zero when the
/// blades share a generator.
pub fn wedge_sign(a: Blade, b: Blade) -> i8 {
    if a.0 & b.0 != 0 {
        return 0;
    }
    let mut swaps = 0u32;
    let mut bits = b.0;
    while bits != 0 {
        let j = bits.trailing_zeros();
        bits &= bits - 1;
        swaps += (a.0 >> j).count_ones();
    }
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A homogeneous form of fixed degree.
///
/// Terms map blades to nonzero coefficients. The default coefficient ring is
/// exact ([`CRational`]).
#[derive(Clone, PartialEq)]
pub struct Form<C = CRational> {
    space: ModelSpace,
    degree: usize,
    terms: BTreeMap<Blade, C>,
}

impl<C: Coeff> Form<C> {
    pub fn zero(space: ModelSpace, degree: usize) -> Self {
        Self { space, degree, terms: BTreeMap::new() }
    }

    /// The constant 0-form `c`.
    pub fn scalar(space: ModelSpace, c: C) -> Self {
        let mut f = Self::zero(space, 0);
        f.add_term(Blade::EMPTY, c);
        f
    }

    /// The constant 0-form 1.
    pub fn one(space: ModelSpace) -> Self {
        Self::scalar(space, C::one())
    }

    /// A single generator as a 1-form.
    pub fn generator(space: ModelSpace, g: Generator) -> Self {
        Self::monomial(space, Blade(1u64 << g.0), C::one())
    }

    /// `dz_k` (1-based).
    pub fn dz(space: ModelSpace, k: usize) -> Self {
        Self::generator(space, space.dz(k))
    }

    /// `dz̄_k` (1-based).
    pub fn dzb(space: ModelSpace, k: usize) -> Self {
        Self::generator(space, space.dzb(k))
    }

    pub fn monomial(space: ModelSpace, blade: Blade, c: C) -> Self {
        let mut f = Self::zero(space, blade.degree());
        f.add_term(blade, c);
        f
    }

    /// `c · g_1 ∧ … ∧ g_k` for generators in any order.
    pub fn term(space: ModelSpace, gens: &[Generator], c: C) -> Self {
        match Blade::from_generators(gens) {
            Some((sign, blade)) => {
                let c = if sign < 0 { -c } else { c };
                Self::monomial(space, blade, c)
            }
            None => Self::zero(space, gens.len()),
        }
    }

    /// Builds a form from `(blade, coefficient)` pairs, summing duplicates.
    pub fn from_terms(
        space: ModelSpace,
        degree: usize,
        terms: impl IntoIterator<Item = (Blade, C)>,
    ) -> Result<Self, FormError> {
        let mut f = Self::zero(space, degree);
        for (b, c) in terms {
            if b.degree() != degree {
                return Err(FormError::DegreeMismatch(degree, b.degree()));
            }
            if b.0 & !space.full_mask() != 0 {
                return Err(FormError::Invalid("blade outside the space".into()));
            }
            f.add_term(b, c);
        }
        Ok(f)
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Blade, C> {
        self.terms
    }

    pub fn coefficient(&self, blade: Blade) -> C {
        self.terms.get(&blade).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c` to the coefficient of `blade`, dropping the term if it
    /// cancels.
    pub fn add_term(&mut self, blade: Blade, c: C) {
        debug_assert_eq!(blade.degree(), self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(blade) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), FormError> {
        if self.space != other.space {
            return Err(FormError::SpaceMismatch(self.space.n(), other.space.n()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.space, self.degree);
        for (b, x) in &self.terms {
            out.add_term(*b, x.clone() * c.clone());
        }
        out
    }

    /// Multiplication by `i^e`.
    pub fn scale_i(&self, e: u8) -> Self {
        self.scale(&C::i_pow(e))
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = Self::zero(self.space, self.degree + other.degree);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let s = wedge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                let c = x.clone() * y.clone();
                out.add_term(Blade(a.0 | b.0), if s < 0 { -c } else { c });
            }
        }
        Ok(out)
    }

    /// `k`-th exterior power; the 0-th power is 1.
    pub fn wedge_pow(&self, k: usize) -> Self {
        let mut out = Self::one(self.space);
        for _ in 0..k {
            out = &out ^ self;
        }
        out
    }

    /// Swaps `dz_k ↔ dz̄_k` and conjugates coefficients.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.space, self.degree);
        for (b, c) in &self.terms {
            let gens: Vec<Generator> = b.generators().map(|g| self.space.conjugate(g)).collect();
            let (sign, nb) = Blade::from_generators(&gens).expect("conjugation is a bijection");
            let c = c.conj();
            out.add_term(nb, if sign < 0 { -c } else { c });
        }
        out
    }

    /// Splits into pure bidegree components, keyed by `(p, q)`.
    pub fn bidegree_decompose(&self) -> BTreeMap<(usize, usize), Self> {
        let mut out: BTreeMap<(usize, usize), Self> = BTreeMap::new();
        for (b, c) in &self.terms {
            out.entry(b.bidegree(&self.space))
                .or_insert_with(|| Self::zero(self.space, self.degree))
                .add_term(*b, c.clone());
        }
        out
    }

    /// The `(p, q)` component.
    pub fn component(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.space, self.degree);
        for (b, c) in &self.terms {
            if b.bidegree(&self.space) == (p, q) {
                out.add_term(*b, c.clone());
            }
        }
        out
    }

    /// `Some((p, q))` when all terms share one bidegree. The zero form has
    /// every bidegree and returns `None`.
    pub fn pure_bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(|b| b.bidegree(&self.space));
        let first = it.next()?;
        it.all(|bd| bd == first).then_some(first)
    }

    /// Errors unless every term has bidegree `(p, q)` (zero passes).
    pub fn require_bidegree(&self, p: usize, q: usize) -> Result<(), FormError> {
        if self.degree != p + q {
            return Err(FormError::WrongBidegree(p, q));
        }
        if self.terms.keys().any(|b| b.bidegree(&self.space) != (p, q)) {
            return Err(FormError::WrongBidegree(p, q));
        }
        Ok(())
    }

    /// Hermitian pairing `Σ a_m · conj(b_m) · 2^k` on degree-`k` forms.
    ///
    /// The factor `2^k` makes `⟨dz_j, dz_j⟩ = 2`, so the real covectors
    /// `dx_j`, `dy_j` are orthonormal.
    pub fn euclid_pairing(&self, other: &Self) -> Result<C, FormError> {
        self.check_same(other)?;
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch(self.degree, other.degree));
        }
        let mut acc = C::zero();
        for (b, x) in &self.terms {
            if let Some(y) = other.terms.get(b) {
                acc = acc + x.clone() * y.conj();
            }
        }
        let weight = C::from_crational(&CRational::new(
            crate::scalar::int(1i64 << self.degree),
            num_rational::BigRational::zero(),
        ));
        Ok(acc * weight)
    }

    /// Coefficient of `dz_1 ∧ … ∧ dz_{2n} ∧ dz̄_1 ∧ … ∧ dz̄_{2n}`.
    pub fn top_coefficient(&self) -> C {
        self.coefficient(Blade(self.space.full_mask()))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Form<D> {
        let mut out = Form::zero(self.space, self.degree);
        for (b, c) in &self.terms {
            out.add_term(*b, f(c));
        }
        out
    }

    /// Interior product with a vector given by its values on the 4n
    /// generators (`v[g] = g(v)`).
    pub fn contract(&self, v: &[C]) -> Self {
        assert_eq!(v.len(), self.space.generator_count(), "vector length must be 4n");
        assert!(self.degree > 0, "cannot contract a 0-form");
        let mut out = Self::zero(self.space, self.degree - 1);
        for (b, c) in &self.terms {
            for (pos, g) in b.generators().enumerate() {
                let vg = &v[g.0 as usize];
                if vg.is_zero() {
                    continue;
                }
                let t = c.clone() * vg.clone();
                let nb = Blade(b.0 & !(1u64 << g.0));
                out.add_term(nb, if pos % 2 == 1 { -t } else { t });
            }
        }
        out
    }

    /// `η(v_1, …, v_k)` with the determinant convention
    /// `(e¹∧e²)(v, w) = v₁w₂ − v₂w₁`.
    pub fn evaluate(&self, vectors: &[Vec<C>]) -> C {
        assert_eq!(vectors.len(), self.degree, "need one vector per degree");
        let mut cur = self.clone();
        for v in vectors {
            cur = cur.contract(v);
        }
        cur.coefficient(Blade::EMPTY)
    }

    /// Whether every term has a holomorphic-only blade.
    pub fn is_holomorphic_type(&self) -> bool {
        let mask = self.space.holomorphic_mask();
        self.terms.keys().all(|b| b.0 & !mask == 0)
    }
}

impl<C: Coeff> fmt::Debug for Form<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(n={}, deg={}) {{", self.space.n(), self.degree)?;
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " +")?;
            }
            write!(f, " ({c:?})")?;
            for g in b.generators() {
                write!(f, "·d{}", self.space.name(g))?;
            }
        }
        write!(f, " }}")
    }
}

impl fmt::Display for Form<CRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let gens: Vec<String> = b.generators().map(|g| format!("d{}", self.space.name(g))).collect();
            let coeff = crate::scalar::format_crational(c);
            if gens.is_empty() {
                write!(f, "{coeff}")?;
            } else if c.is_one() {
                write!(f, "{}", gens.join("∧"))?;
            } else {
                write!(f, "({coeff})·{}", gens.join("∧"))?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &Form<C> {
    type Output = Form<C>;

    /// Panics on mismatched spaces or degrees; use [`Form::checked_add`] to
    /// handle those.
    fn add(self, rhs: Self) -> Form<C> {
        self.checked_add(rhs).expect("form addition")
    }
}

impl<C: Coeff> Add for Form<C> {
    type Output = Form<C>;
    fn add(self, rhs: Self) -> Form<C> {
        &self + &rhs
    }
}

impl<C: Coeff> Neg for &Form<C> {
    type Output = Form<C>;
    fn neg(self) -> Form<C> {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }
}

impl<C: Coeff> Neg for Form<C> {
    type Output = Form<C>;
    fn neg(self) -> Form<C> {
        -&self
    }
}

impl<C: Coeff> Sub for &Form<C> {
    type Output = Form<C>;
    fn sub(self, rhs: Self) -> Form<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Sub for Form<C> {
    type Output = Form<C>;
    fn sub(self, rhs: Self) -> Form<C> {
        &self - &rhs
    }
}

/// `a ^ b` is the wedge product. Panics on mismatched spaces; use
/// [`Form::wedge`] to handle that.
impl<C: Coeff> BitXor for &Form<C> {
    type Output = Form<C>;
    fn bitxor(self, rhs: Self) -> Form<C> {
        self.wedge(rhs).expect("wedge product")
    }
}

impl<C: Coeff> BitXor for Form<C> {
    type Output = Form<C>;
    fn bitxor(self, rhs: Self) -> Form<C> {
        &self ^ &rhs
    }
}

/// Sums a list of same-degree forms.
pub fn sum<C: Coeff>(space: ModelSpace, degree: usize, forms: impl IntoIterator<Item = Form<C>>) -> Form<C> {
    let mut out = Form::zero(space, degree);
    for f in forms {
        out = &out + &f;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cint, int};

    fn s(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    #[test]
    fn repeated_generator_vanishes() {
        let sp = s(1);
        let a: Form = Form::dz(sp, 1);
        assert!((&a ^ &a).is_zero());
    }

    #[test]
    fn antisymmetry() {
        let sp = s(1);
        let a: Form = Form::dz(sp, 1);
        let b: Form = Form::dz(sp, 2);
        assert_eq!(&a ^ &b, -(&b ^ &a));
    }

    #[test]
    fn bilinearity() {
        let sp = s(1);
        let lhs: Form = &(&Form::dz(sp, 1) + &Form::dz(sp, 2)) ^ &Form::dzb(sp, 1);
        let rhs = &(&Form::dz(sp, 1) ^ &Form::dzb(sp, 1)) + &(&Form::dz(sp, 2) ^ &Form::dzb(sp, 1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_examples() {
        let sp = s(1);
        assert_eq!(Form::<CRational>::dz(sp, 1).conjugate(), Form::dzb(sp, 1));
        let a: Form = (&Form::dz(sp, 1) ^ &Form::dz(sp, 2)).scale(&cint(0, 1));
        let expect: Form = (&Form::dzb(sp, 1) ^ &Form::dzb(sp, 2)).scale(&cint(0, -1));
        assert_eq!(a.conjugate(), expect);
    }

    #[test]
    fn bidegree_split() {
        let sp = s(1);
        let a: Form = &(&Form::dz(sp, 1) ^ &Form::dzb(sp, 1)) + &(&Form::dz(sp, 1) ^ &Form::dz(sp, 2));
        let parts = a.bidegree_decompose();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&(1, 1)], &Form::dz(sp, 1) ^ &Form::dzb(sp, 1));
        assert_eq!(parts[&(2, 0)], &Form::dz(sp, 1) ^ &Form::dz(sp, 2));
    }

    #[test]
    fn pairing_normalization() {
        let sp = s(1);
        let a: Form = Form::dz(sp, 1);
        let b: Form = Form::dz(sp, 2);
        assert_eq!(a.euclid_pairing(&a).unwrap(), cint(2, 0));
        assert_eq!(a.euclid_pairing(&b).unwrap(), cint(0, 0));
        assert!(a.euclid_pairing(&(&a ^ &b)).is_err());
    }

    #[test]
    fn evaluation_is_determinant() {
        let sp = s(1);
        let f: Form = &Form::dz(sp, 1) ^ &Form::dz(sp, 2);
        let v = vec![cint(1, 0), cint(2, 0), cint(0, 0), cint(0, 0)];
        let w = vec![cint(3, 0), cint(5, 0), cint(0, 0), cint(0, 0)];
        assert_eq!(f.evaluate(&[v, w]), CRational::new(int(5 - 6), int(0)));
    }

    #[test]
    fn term_sorts_with_sign() {
        let sp = s(1);
        let t: Form = Form::term(sp, &[sp.dz(2), sp.dz(1)], CRational::one());
        assert_eq!(t, -(&Form::dz(sp, 1) ^ &Form::dz(sp, 2)));
    }
}
