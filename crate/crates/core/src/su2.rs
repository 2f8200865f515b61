//! The SU(2) action on forms: generator matrices, the Casimir operator,
//! weight decomposition and the top-weight projection.
//!
//! `A_L` is the derivation extending `L` from covectors. The Casimir
//! `C = A_I² + A_J² + A_K²` is a rational matrix, and acts on the weight-`w`
//! isotypic part of `Λ^k` by `−w(w+2)`. Weights are separated exactly with
//! Lagrange interpolation polynomials in `C`, which is the same as taking
//! kernels of `C + w(w+2)` because `C` is diagonalizable with known spectrum.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::Zero;

use crate::error::FormError;
use crate::form::{Blade, Form};
use crate::linalg::Mat;
use crate::quaternion::QuatOperator;
use crate::scalar::{int, CRational, Coeff, Rational};
use crate::space::ModelSpace;

/// All blades of degree `k`, in increasing mask order.
pub fn basis(space: &ModelSpace, k: usize) -> Vec<Blade> {
    let m = space.generator_count();
    if k > m {
        return Vec::new();
    }
    if k == 0 {
        return vec![Blade::EMPTY];
    }
    // Gosper's hack; u128 avoids overflow at m = 64
    let limit: u128 = 1u128 << m;
    let mut x: u128 = (1u128 << k) - 1;
    let mut out = Vec::new();
    while x < limit {
        out.push(Blade(x as u64));
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Blades of bidegree `(p, q)`.
pub fn bidegree_basis(space: &ModelSpace, p: usize, q: usize) -> Vec<Blade> {
    basis(space, p + q)
        .into_iter()
        .filter(|b| b.bidegree(space) == (p, q))
        .collect()
}

/// `A_L` applied to one blade, as `(blade, e)` terms meaning `i^e · blade`.
fn derivation_on_blade(op: QuatOperator, space: &ModelSpace, b: Blade) -> Vec<(Blade, u8)> {
    let mut out = Vec::new();
    for g in b.generators() {
        let (e, g2) = op.image(space, g);
        if g2 == g {
            out.push((b, e));
            continue;
        }
        if b.contains(g2) {
            continue;
        }
        let nb = Blade((b.0 & !(1u64 << g.0)) | (1u64 << g2.0));
        let swaps = b.count_between(g.0, g2.0);
        let e = if swaps % 2 == 1 { (e + 2) % 4 } else { e };
        out.push((nb, e));
    }
    out
}

/// The derivation `A_L` applied to a form.
pub fn apply_derivation<C: Coeff>(op: QuatOperator, a: &Form<C>) -> Form<C> {
    let space = a.space();
    let mut out = Form::zero(space, a.degree());
    for (b, c) in a.terms() {
        for (nb, e) in derivation_on_blade(op, &space, *b) {
            out.add_term(nb, c.clone() * C::i_pow(e));
        }
    }
    out
}

/// Matrix of `A_L` on `Λ^k` in the [`basis`] order; entry `(i, j)` is the
/// coefficient of blade `i` in `A_L(blade j)`.
pub fn su2_generator_matrix(op: QuatOperator, space: &ModelSpace, k: usize) -> Mat<CRational> {
    let blades = basis(space, k);
    let index: HashMap<Blade, usize> = blades.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let mut m: Mat<CRational> = Mat::zeros(blades.len(), blades.len());
    for (j, b) in blades.iter().enumerate() {
        for (nb, e) in derivation_on_blade(op, space, *b) {
            let i = index[&nb];
            let v = m[(i, j)].clone() + <CRational as Coeff>::i_pow(e);
            m[(i, j)] = v;
        }
    }
    m
}

/// Sparse rational Casimir operator on `Λ^k`, stored by columns.
#[derive(Debug)]
pub struct Casimir {
    columns: HashMap<Blade, Vec<(Blade, Rational)>>,
}

impl Casimir {
    fn build(space: &ModelSpace, k: usize) -> Self {
        let mut columns = HashMap::new();
        for b in basis(space, k) {
            columns.insert(b, casimir_column(space, b));
        }
        Self { columns }
    }

    /// Column for one blade.
    pub fn column(&self, b: Blade) -> &[(Blade, Rational)] {
        &self.columns[&b]
    }

    pub fn apply<C: Coeff>(&self, a: &Form<C>) -> Form<C> {
        let mut out = Form::zero(a.space(), a.degree());
        for (b, c) in a.terms() {
            for (nb, r) in self.column(*b) {
                out.add_term(*nb, c.scale_rational(r));
            }
        }
        out
    }

    /// Dense matrix in [`basis`] order.
    pub fn to_matrix(&self, space: &ModelSpace, k: usize) -> Mat<Rational> {
        let blades = basis(space, k);
        let index: HashMap<Blade, usize> = blades.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let mut m = Mat::zeros(blades.len(), blades.len());
        for (j, b) in blades.iter().enumerate() {
            for (nb, r) in self.column(*b) {
                m[(index[nb], j)] = r.clone();
            }
        }
        m
    }
}

fn casimir_column(space: &ModelSpace, b: Blade) -> Vec<(Blade, Rational)> {
    let mut acc: BTreeMap<Blade, CRational> = BTreeMap::new();
    for op in QuatOperator::ALL {
        for (b1, e1) in derivation_on_blade(op, space, b) {
            for (b2, e2) in derivation_on_blade(op, space, b1) {
                let v = acc.entry(b2).or_insert_with(CRational::zero);
                *v = v.clone() + <CRational as Coeff>::i_pow((e1 + e2) % 4);
            }
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(nb, c)| {
            assert!(c.im.is_zero(), "Casimir must be real");
            (nb, c.re)
        })
        .collect()
}

type CasimirCache = RwLock<HashMap<(usize, usize), Arc<Casimir>>>;

fn cache() -> &'static CasimirCache {
    static CACHE: OnceLock<CasimirCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The Casimir on `Λ^k` of the given space, built once and shared.
pub fn casimir(space: &ModelSpace, k: usize) -> Arc<Casimir> {
    let key = (space.n(), k);
    if let Some(c) = cache().read().expect("casimir cache").get(&key) {
        return c.clone();
    }
    let built = Arc::new(Casimir::build(space, k));
    cache().write().expect("casimir cache").entry(key).or_insert(built).clone()
}

/// Weights that can occur in `Λ^k`: same parity as `k`, at most
/// `min(k, 4n − k)`.
pub fn admissible_weights(space: &ModelSpace, k: usize) -> Vec<usize> {
    let m = space.generator_count();
    if k > m {
        return Vec::new();
    }
    let top = k.min(m - k);
    (0..=top).filter(|w| w % 2 == k % 2).collect()
}

/// Casimir eigenvalue `−w(w+2)` on weight `w`.
pub fn casimir_eigenvalue(w: usize) -> Rational {
    int(-((w * (w + 2)) as i64))
}

/// Weight components of a homogeneous form.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDecomposition<C: Coeff = CRational> {
    pub degree: usize,
    pub components: BTreeMap<usize, Form<C>>,
}

impl<C: Coeff> WeightDecomposition<C> {
    /// The component of weight `w` (zero if absent).
    pub fn component(&self, w: usize, space: ModelSpace) -> Form<C> {
        self.components.get(&w).cloned().unwrap_or_else(|| Form::zero(space, self.degree))
    }
}

/// Projection onto weight `w` inside `Λ^k`:
/// `∏_{w' ≠ w} (C + w'(w'+2)) / (−w(w+2) + w'(w'+2))`.
pub fn weight_project<C: Coeff>(a: &Form<C>, w: usize) -> Form<C> {
    let space = a.space();
    let k = a.degree();
    let weights = admissible_weights(&space, k);
    if !weights.contains(&w) {
        return Form::zero(space, k);
    }
    let cas = casimir(&space, k);
    let mu = casimir_eigenvalue(w);
    let mut cur = a.clone();
    for &w2 in &weights {
        if w2 == w || cur.is_zero() {
            continue;
        }
        let mu2 = casimir_eigenvalue(w2);
        let denom = mu.clone() - mu2.clone();
        let ca = cas.apply(&cur);
        let shifted = &ca - &cur.map_coeffs(|c| c.scale_rational(&mu2));
        let inv = Rational::from_integer(1.into()) / denom;
        cur = shifted.map_coeffs(|c| c.scale_rational(&inv));
    }
    cur
}

/// Splits a form into Casimir eigencomponents.
pub fn weight_decompose<C: Coeff>(a: &Form<C>) -> WeightDecomposition<C> {
    let space = a.space();
    let mut components = BTreeMap::new();
    for w in admissible_weights(&space, a.degree()) {
        let comp = weight_project(a, w);
        if !comp.is_zero() {
            components.insert(w, comp);
        }
    }
    WeightDecomposition { degree: a.degree(), components }
}

/// `Π₊`: the top-weight component, defined for degree at most `2n`.
pub fn plus_project<C: Coeff>(a: &Form<C>) -> Result<Form<C>, FormError> {
    let space = a.space();
    let middle = space.complex_dim();
    if a.degree() > middle {
        return Err(FormError::AboveMiddle { degree: a.degree(), middle });
    }
    Ok(weight_project(a, a.degree()))
}

/// Whether `Π₊ a = a`.
pub fn is_top_weight<C: Coeff>(a: &Form<C>) -> bool {
    matches!(plus_project(a), Ok(p) if p == *a)
}

/// Verifies on `Λ^k` that `∏_{w admissible} (C + w(w+2)) = 0` and that every
/// admissible weight occurs; returns the multiplicity (eigenspace dimension)
/// of each weight.
pub fn casimir_spectrum(space: &ModelSpace, k: usize) -> Result<BTreeMap<usize, usize>, String> {
    let blades = basis(space, k);
    let weights = admissible_weights(space, k);
    let mut dims = BTreeMap::new();
    for &w in &weights {
        let cols: Vec<Vec<Rational>> = blades
            .iter()
            .map(|b| {
                let f: Form = Form::monomial(*space, *b, CRational::new(int(1), int(0)));
                let p = weight_project(&f, w);
                blades.iter().map(|bb| p.coefficient(*bb).re).collect()
            })
            .collect();
        let m = Mat::from_rows(cols).transpose();
        let rank = m.rank();
        if rank == 0 {
            return Err(format!("weight {w} is admissible in degree {k} but absent"));
        }
        dims.insert(w, rank);
    }
    // minimal polynomial check: the product of all factors kills every blade
    let cas = casimir(space, k);
    for b in &blades {
        let mut cur: Form = Form::monomial(*space, *b, CRational::new(int(1), int(0)));
        for &w in &weights {
            let mu = casimir_eigenvalue(w);
            cur = &cas.apply(&cur) - &cur.map_coeffs(|c| c.scale_rational(&mu));
        }
        if !cur.is_zero() {
            return Err(format!("Casimir on degree {k} has an eigenvalue outside the admissible weights"));
        }
    }
    let total: usize = dims.values().sum();
    if total != blades.len() {
        return Err(format!("weight spaces span {total} of {} dimensions", blades.len()));
    }
    Ok(dims)
}

/// Rank of `Π₊` restricted to `Λ^{p,q}`.
pub fn plus_rank(space: &ModelSpace, p: usize, q: usize) -> Result<usize, FormError> {
    let blades = bidegree_basis(space, p, q);
    let mut rows = Vec::with_capacity(blades.len());
    for b in &blades {
        let f: Form = Form::monomial(*space, *b, CRational::new(int(1), int(0)));
        let img = plus_project(&f)?;
        img.require_bidegree(p, q)?;
        rows.push(blades.iter().map(|bb| img.coefficient(*bb).re).collect::<Vec<_>>());
    }
    Ok(Mat::from_rows(rows).rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cint;
    use crate::scalar::binomial_u64;

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    #[test]
    fn basis_sizes() {
        let s = sp(2);
        for k in 0..=8 {
            assert_eq!(basis(&s, k).len() as u64, binomial_u64(8, k));
        }
        assert_eq!(bidegree_basis(&s, 2, 1).len(), 6 * 4);
    }

    #[test]
    fn a_i_on_holomorphic_2_form() {
        let s = sp(1);
        let f: Form = &Form::dz(s, 1) ^ &Form::dz(s, 2);
        assert_eq!(apply_derivation(QuatOperator::I, &f), f.scale(&cint(0, 2)));
    }

    #[test]
    fn casimir_on_covectors() {
        let s = sp(2);
        let m = casimir(&s, 1).to_matrix(&s, 1);
        let expect = Mat::from_fn(8, 8, |i, j| if i == j { int(-3) } else { int(0) });
        assert_eq!(m, expect);
    }

    #[test]
    fn bracket_relation() {
        for n in [1, 2] {
            let s = sp(n);
            for k in 0..=3 {
                let ai = su2_generator_matrix(QuatOperator::I, &s, k);
                let aj = su2_generator_matrix(QuatOperator::J, &s, k);
                let ak = su2_generator_matrix(QuatOperator::K, &s, k);
                let comm = Mat {
                    data: ai.mul(&aj).data.iter().zip(aj.mul(&ai).data.iter()).map(|(x, y)| x - y).collect(),
                    ..ai.clone()
                };
                let two_k = Mat { data: ak.data.iter().map(|x| x * cint(2, 0)).collect(), ..ak.clone() };
                assert_eq!(comm, two_k, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mixed_two_form_splits() {
        let s = sp(1);
        let f: Form = &Form::dz(s, 1) ^ &Form::dzb(s, 1);
        let d = weight_decompose(&f);
        assert_eq!(d.components.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        let resum = &d.components[&0] + &d.components[&2];
        assert_eq!(resum, f);
        // the weight-0 part is SU(2)-invariant
        for op in QuatOperator::ALL {
            assert!(apply_derivation(op, &d.components[&0]).is_zero());
        }
        let half = CRational::new(crate::scalar::rat(1, 2), int(0));
        let expect: Form = (&(&Form::dz(s, 1) ^ &Form::dzb(s, 1)) - &(&Form::dz(s, 2) ^ &Form::dzb(s, 2))).scale(&half);
        assert_eq!(d.components[&0], expect);
    }

    #[test]
    fn omega_is_top_weight() {
        let s = sp(2);
        let omega: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) + &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        assert_eq!(plus_project(&omega).unwrap(), omega);
        let one: Form = Form::one(s);
        assert_eq!(weight_decompose(&one).components.keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn above_middle_rejected() {
        let s = sp(1);
        let f: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) ^ &Form::dzb(s, 1);
        assert!(matches!(plus_project(&f), Err(FormError::AboveMiddle { .. })));
    }

    #[test]
    fn clebsch_gordan_on_two_forms() {
        for n in [1, 2] {
            let dims = casimir_spectrum(&sp(n), 2).unwrap();
            assert_eq!(dims.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        }
    }
}
