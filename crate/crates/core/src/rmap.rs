//! The correspondence between holomorphic forms and top-weight (p,q)-forms.
//!
//! * [`rproj`] sends a `(p,q)`-form to a `(p+q,0)`-form by replacing every
//!   antiholomorphic factor `ν` with `J(ν)`.
//! * [`rmap_eval`] is the evaluation map
//!   `η ↦ η(x_1, …, x_p, J ȳ_1, …, J ȳ_q)`, computed as the bidegree-`(p,q)`
//!   part of the multiplicative extension of `ξ ↦ ξ + J⁻¹ξ`.
//! * [`rmap`] is `rmap_eval / C(p+q, q)`, the normalization that makes it the
//!   inverse of [`rproj`] on top-weight forms. It commutes with the
//!   differentials exactly; `rmap_eval` is the multiplicative one.

use crate::error::FormError;
use crate::form::{Blade, Form};
use crate::quaternion::QuatOperator;
use crate::scalar::{binomial, Coeff, Rational};

/// Replaces each antiholomorphic generator by its image under `J`.
pub fn rproj<C: Coeff>(a: &Form<C>) -> Result<Form<C>, FormError> {
    let space = a.space();
    let (p, q) = match a.pure_bidegree() {
        Some(bd) => bd,
        None if a.is_zero() => return Ok(Form::zero(space, a.degree())),
        None => return Err(FormError::Invalid("rproj needs a form of pure bidegree".into())),
    };
    let mut out = Form::zero(space, p + q);
    for (b, c) in a.terms() {
        let mut e_total = 0u8;
        let gens: Vec<_> = b
            .generators()
            .map(|g| {
                if space.is_holomorphic(g) {
                    g
                } else {
                    let (e, g2) = QuatOperator::J.image(&space, g);
                    e_total = (e_total + e) % 4;
                    g2
                }
            })
            .collect();
        let Some((sign, nb)) = Blade::from_generators(&gens) else { continue };
        let e = if sign < 0 { (e_total + 2) % 4 } else { e_total };
        out.add_term(nb, c.clone() * C::i_pow(e));
    }
    Ok(out)
}

/// Evaluation map `η ↦ η(·, …, J ·̄, …)` into bidegree `(p, q)`.
pub fn rmap_eval<C: Coeff>(p: usize, q: usize, eta: &Form<C>) -> Result<Form<C>, FormError> {
    let space = eta.space();
    eta.require_bidegree(p + q, 0)?;
    let mut out = Form::zero(space, p + q);
    for (b, c) in eta.terms() {
        let gens: Vec<_> = b.generators().collect();
        let k = gens.len();
        // choose which q positions receive J⁻¹ = −J
        for mask in 0u32..(1u32 << k) {
            if mask.count_ones() as usize != q {
                continue;
            }
            let mut e_total = 0u8;
            let mut new_gens = Vec::with_capacity(k);
            for (pos, g) in gens.iter().enumerate() {
                if mask >> pos & 1 == 1 {
                    let (e, g2) = QuatOperator::J.image(&space, *g);
                    e_total = (e_total + e + 2) % 4;
                    new_gens.push(g2);
                } else {
                    new_gens.push(*g);
                }
            }
            let (sign, nb) = Blade::from_generators(&new_gens).expect("J maps holomorphic to antiholomorphic");
            let e = if sign < 0 { (e_total + 2) % 4 } else { e_total };
            out.add_term(nb, c.clone() * C::i_pow(e));
        }
    }
    Ok(out)
}

/// `rmap_eval / C(p+q, q)`: lands in the top-weight part of `Λ^{p,q}` and
/// inverts [`rproj`] there.
pub fn rmap<C: Coeff>(p: usize, q: usize, eta: &Form<C>) -> Result<Form<C>, FormError> {
    let raw = rmap_eval(p, q, eta)?;
    let scale = Rational::from_integer(1.into()) / binomial(p + q, q);
    Ok(raw.map_coeffs(|c| c.scale_rational(&scale)))
}

/// Normalization relating [`rmap`] and [`rmap_eval`]: `rmap_eval = C(p+q,q) · rmap`.
pub fn rmap_normalization(p: usize, q: usize) -> Rational {
    binomial(p + q, q)
}

/// Bidegree convolution `Σ_{p1+p2=p, q1+q2=q} rmap_eval(a) ∧ rmap_eval(b)`,
/// the right-hand side of multiplicativity.
pub fn rmap_eval_convolution<C: Coeff>(
    p: usize,
    q: usize,
    a: &Form<C>,
    b: &Form<C>,
) -> Result<Form<C>, FormError> {
    let ka = a.degree();
    let kb = b.degree();
    if ka + kb != p + q {
        return Err(FormError::DegreeMismatch(p + q, ka + kb));
    }
    let mut out = Form::zero(a.space(), p + q);
    for q1 in 0..=q.min(ka) {
        let q2 = q - q1;
        if q2 > kb {
            continue;
        }
        let (p1, p2) = (ka - q1, kb - q2);
        let left = rmap_eval(p1, q1, a)?;
        let right = rmap_eval(p2, q2, b)?;
        out = &out + &left.wedge(&right)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cint, CRational};
    use crate::space::ModelSpace;
    use crate::su2::plus_project;
    use num_traits::One;

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    #[test]
    fn rproj_examples() {
        let s = sp(1);
        let a: Form = &Form::dz(s, 1) ^ &Form::dzb(s, 1);
        assert_eq!(rproj(&a).unwrap(), &Form::dz(s, 1) ^ &Form::dz(s, 2));
        let b: Form = &Form::dz(s, 1) ^ &Form::dzb(s, 2);
        assert!(rproj(&b).unwrap().is_zero());
    }

    #[test]
    fn rmap_of_omega_is_minus_i_omega_i() {
        let s = sp(1);
        let omega: Form = &Form::dz(s, 1) ^ &Form::dz(s, 2);
        let r = rmap(1, 1, &omega).unwrap();
        // ω_I = (i/2) Σ dz_k ∧ dz̄_k, and rmap(Ω) = ½ Σ dz_k ∧ dz̄_k = −i ω_I
        let half = CRational::new(crate::scalar::rat(1, 2), crate::scalar::int(0));
        let expect: Form =
            (&(&Form::dz(s, 1) ^ &Form::dzb(s, 1)) + &(&Form::dz(s, 2) ^ &Form::dzb(s, 2))).scale(&half);
        assert_eq!(r, expect);
        assert_eq!(plus_project(&r).unwrap(), r);
        assert_eq!(rproj(&r).unwrap(), omega);
    }

    #[test]
    fn q_zero_is_identity() {
        let s = sp(2);
        let eta: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 3)).scale(&cint(2, 1)) + &(&Form::dz(s, 2) ^ &Form::dz(s, 4));
        assert_eq!(rmap(2, 0, &eta).unwrap(), eta);
        assert!(rmap(1, 1, &Form::<CRational>::zero(s, 2)).unwrap().is_zero());
        assert!(rmap(1, 1, &Form::<CRational>::dz(s, 1)).is_err());
        let _ = CRational::one();
    }
}
