//! The quaternionic operators I, J, K on forms and the real structure.
//!
//! On generators:
//!
//! ```text
//! I dz_k = i dz_k            I dz̄_k = −i dz̄_k
//! J dz_{2i−1} = dz̄_{2i}      J dz_{2i} = −dz̄_{2i−1}
//! J dz̄_{2i−1} = dz_{2i}      J dz̄_{2i} = −dz_{2i−1}
//! K = I ∘ J
//! ```
//!
//! Each operator extends multiplicatively to all forms. On vectors the
//! operators act contragrediently: `ξ(L v) = −(L ξ)(v)`, which is the
//! convention under which `Ω(x, J x̄) > 0`.

use crate::error::FormError;
use crate::form::{Blade, Form};
use crate::scalar::Coeff;
use crate::space::{Generator, ModelSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuatOperator {
    I,
    J,
    K,
}

impl QuatOperator {
    pub const ALL: [QuatOperator; 3] = [QuatOperator::I, QuatOperator::J, QuatOperator::K];

    pub fn label(self) -> char {
        match self {
            QuatOperator::I => 'I',
            QuatOperator::J => 'J',
            QuatOperator::K => 'K',
        }
    }

    /// Image of a generator as `(e, g')`, meaning `L g = i^e g'`.
    pub fn image(self, space: &ModelSpace, g: Generator) -> (u8, Generator) {
        match self {
            QuatOperator::I => {
                if space.is_holomorphic(g) {
                    (1, g)
                } else {
                    (3, g)
                }
            }
            QuatOperator::J => {
                let k = space.coordinate(g);
                let partner = k ^ 1;
                // odd coordinates in 1-based numbering sit at even 0-based indices
                let first_of_pair = k.is_multiple_of(2);
                let e = if first_of_pair { 0 } else { 2 };
                let target = if space.is_holomorphic(g) {
                    space.dzb(partner + 1)
                } else {
                    space.dz(partner + 1)
                };
                (e, target)
            }
            QuatOperator::K => {
                let (e1, g1) = QuatOperator::J.image(space, g);
                let (e2, g2) = QuatOperator::I.image(space, g1);
                ((e1 + e2) % 4, g2)
            }
        }
    }
}

/// Multiplicative extension of `L` to forms.
pub fn apply_operator<C: Coeff>(op: QuatOperator, a: &Form<C>) -> Form<C> {
    let space = a.space();
    let mut out = Form::zero(space, a.degree());
    for (b, c) in a.terms() {
        let mut e_total = 0u8;
        let mut gens = Vec::with_capacity(b.degree());
        for g in b.generators() {
            let (e, g2) = op.image(&space, g);
            e_total = (e_total + e) % 4;
            gens.push(g2);
        }
        let (sign, nb) = Blade::from_generators(&gens).expect("operators permute generators");
        let e_total = if sign < 0 { (e_total + 2) % 4 } else { e_total };
        out.add_term(nb, c.clone() * C::i_pow(e_total));
    }
    out
}

/// `J⁻¹ = (−1)^k J` on degree-`k` forms.
pub fn apply_j_inverse<C: Coeff>(a: &Form<C>) -> Form<C> {
    let j = apply_operator(QuatOperator::J, a);
    if a.degree() % 2 == 1 {
        -j
    } else {
        j
    }
}

/// `J(ā)`, the real structure on even-degree forms.
pub fn real_structure<C: Coeff>(a: &Form<C>) -> Result<Form<C>, FormError> {
    if a.degree() % 2 == 1 {
        return Err(FormError::OddDegree(a.degree()));
    }
    Ok(apply_operator(QuatOperator::J, &a.conjugate()))
}

/// Whether `J(ā) = a`. Odd-degree forms are never reported real.
pub fn is_real<C: Coeff>(a: &Form<C>) -> bool {
    match real_structure(a) {
        Ok(r) => r == *a,
        Err(_) => false,
    }
}

/// Real part with respect to the real structure, `(a + J(ā)) / 2`.
pub fn real_part<C: Coeff>(a: &Form<C>) -> Result<Form<C>, FormError> {
    let r = real_structure(a)?;
    let half = crate::scalar::rat(1, 2);
    Ok((a + &r).map_coeffs(|c| c.scale_rational(&half)))
}

/// Action of `L` on vectors written by their values on the 4n generators,
/// `ξ(L v) = −(L ξ)(v)`.
pub fn apply_to_vector<C: Coeff>(op: QuatOperator, space: &ModelSpace, v: &[C]) -> Vec<C> {
    let m = space.generator_count();
    assert_eq!(v.len(), m);
    let mut out = vec![C::zero(); m];
    for (g, slot) in out.iter_mut().enumerate() {
        let (e, g2) = op.image(space, Generator(g as u8));
        *slot = -(C::i_pow(e) * v[g2.0 as usize].clone());
    }
    out
}

/// Complex conjugate of a vector: `dz_k(v̄) = conj(dz̄_k(v))`.
pub fn conjugate_vector<C: Coeff>(space: &ModelSpace, v: &[C]) -> Vec<C> {
    let m = space.generator_count();
    (0..m)
        .map(|g| v[space.conjugate(Generator(g as u8)).0 as usize].conj())
        .collect()
}

/// The (1,0) vector with the given `dz_k` components (its `dz̄` components
/// vanish).
pub fn holomorphic_vector<C: Coeff>(space: &ModelSpace, comps: &[C]) -> Vec<C> {
    let m = space.complex_dim();
    assert_eq!(comps.len(), m);
    let mut v = vec![C::zero(); 2 * m];
    v[..m].clone_from_slice(comps);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cint, CRational};
    use num_traits::One;

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    #[test]
    fn j_on_generators() {
        let s = sp(1);
        let j = |f: &Form| apply_operator(QuatOperator::J, f);
        assert_eq!(j(&Form::dz(s, 1)), Form::dzb(s, 2));
        assert_eq!(j(&Form::dz(s, 2)), -Form::<CRational>::dzb(s, 1));
        assert_eq!(j(&Form::dzb(s, 1)), Form::dz(s, 2));
        assert_eq!(j(&Form::dzb(s, 2)), -Form::<CRational>::dz(s, 1));
    }

    #[test]
    fn j_on_product() {
        let s = sp(1);
        let a: Form = &Form::dz(s, 1) ^ &Form::dz(s, 2);
        assert_eq!(apply_operator(QuatOperator::J, &a), &Form::dzb(s, 1) ^ &Form::dzb(s, 2));
    }

    #[test]
    fn quaternion_relations_on_covectors() {
        let s = sp(2);
        for k in 1..=4 {
            for f in [Form::<CRational>::dz(s, k), Form::dzb(s, k)] {
                for op in QuatOperator::ALL {
                    assert_eq!(apply_operator(op, &apply_operator(op, &f)), -f.clone());
                }
                let ij = apply_operator(QuatOperator::I, &apply_operator(QuatOperator::J, &f));
                let ji = apply_operator(QuatOperator::J, &apply_operator(QuatOperator::I, &f));
                assert_eq!(ij, -ji);
                assert_eq!(ij, apply_operator(QuatOperator::K, &f));
            }
        }
    }

    #[test]
    fn omega_is_real_and_i_omega_is_not() {
        let s = sp(2);
        let omega: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) + &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        assert!(is_real(&omega));
        let i_omega = omega.scale(&cint(0, 1));
        assert_eq!(real_structure(&i_omega).unwrap(), omega.scale(&cint(0, -1)));
        assert!(!is_real(&i_omega));
        assert!(real_structure(&Form::<CRational>::dz(s, 1)).is_err());
    }

    #[test]
    fn vector_action_is_contragredient() {
        let s = sp(1);
        let v: Vec<CRational> = vec![cint(1, 2), cint(-1, 0), cint(3, 1), cint(0, 1)];
        for op in QuatOperator::ALL {
            let lv = apply_to_vector(op, &s, &v);
            for g in 0..4 {
                let xi: Form = Form::generator(s, Generator(g));
                let lhs = xi.evaluate(std::slice::from_ref(&lv));
                let rhs = -apply_operator(op, &xi).evaluate(std::slice::from_ref(&v));
                assert_eq!(lhs, rhs);
            }
            let llv = apply_to_vector(op, &s, &lv);
            assert_eq!(llv, v.iter().map(|x| -x.clone()).collect::<Vec<_>>());
        }
        let _ = CRational::one();
    }
}
