//! Differential operators on forms with polynomial coefficients.
//!
//! `∂_J` is `J ∘ ∂̄ ∘ J⁻¹` with `J⁻¹ = (−1)^deg J`. On functions this is
//! `∂_J f = Σ_k ∂f/∂z̄_k · J(dz̄_k)`, which agrees with the operator written
//! `−J ∂̄ J` on odd-degree forms and `J ∂̄ J` on even-degree forms.

use num_traits::Zero;

use crate::error::FormError;
use crate::form::{Blade, Form};
use crate::poly::Poly;
use crate::quaternion::{apply_j_inverse, apply_operator, QuatOperator};
use crate::space::ModelSpace;
use crate::su2::{is_top_weight, plus_project};

/// A form with polynomial coefficients.
pub type PolyForm = Form<Poly>;

fn differentiate(a: &PolyForm, bar: bool) -> PolyForm {
    let space = a.space();
    let m = space.complex_dim();
    let mut out = Form::zero(space, a.degree() + 1);
    for (b, f) in a.terms() {
        for k in 0..m {
            let g = if bar { space.dzb(k + 1) } else { space.dz(k + 1) };
            if b.contains(g) {
                continue;
            }
            let df = if bar { f.d_zb(k) } else { f.d_z(k) };
            if df.is_zero() {
                continue;
            }
            let below = (b.0 & ((1u64 << g.0) - 1)).count_ones();
            let nb = Blade(b.0 | (1u64 << g.0));
            out.add_term(nb, if below % 2 == 1 { -df } else { df });
        }
    }
    out
}

/// `∂`, raising the holomorphic degree.
pub fn del(a: &PolyForm) -> PolyForm {
    differentiate(a, false)
}

/// `∂̄`, raising the antiholomorphic degree.
pub fn delbar(a: &PolyForm) -> PolyForm {
    differentiate(a, true)
}

/// `d = ∂ + ∂̄`.
pub fn d(a: &PolyForm) -> PolyForm {
    &del(a) + &delbar(a)
}

/// `∂_J = J ∘ ∂̄ ∘ J⁻¹`.
pub fn del_j(a: &PolyForm) -> PolyForm {
    apply_operator(QuatOperator::J, &delbar(&apply_j_inverse(a)))
}

/// `∂ ∂_J φ` for a real polynomial potential.
pub fn hkt_from_potential(space: ModelSpace, phi: &Poly) -> Result<PolyForm, FormError> {
    if !phi.is_real() {
        return Err(FormError::NotReal);
    }
    let f = Form::scalar(space, phi.clone());
    Ok(del(&del_j(&f)))
}

/// Top-weight Hodge components `(Π₊ (da)^{p+1,q}, Π₊ (da)^{p,q+1})`.
pub fn d_plus_components(a: &PolyForm) -> Result<(PolyForm, PolyForm), FormError> {
    let space = a.space();
    if a.degree() >= space.complex_dim() {
        return Err(FormError::AboveMiddle { degree: a.degree() + 1, middle: space.complex_dim() });
    }
    if !is_top_weight(a) {
        return Err(FormError::NotTopWeight);
    }
    Ok((plus_project(&del(a))?, plus_project(&delbar(a))?))
}

/// Evaluates the coefficients at a point `z ∈ C^{2n}`.
pub fn evaluate_at(a: &PolyForm, z: &[num_complex::Complex64]) -> Form<num_complex::Complex64> {
    a.map_coeffs(|p| p.eval(z))
}

/// Embeds a constant-coefficient form.
pub fn constant_form(a: &Form) -> PolyForm {
    a.map_coeffs(|c| Poly::constant(c.clone()))
}

/// The constant term of every coefficient, when all coefficients are
/// constants.
pub fn as_constant(a: &PolyForm) -> Option<Form> {
    let mut out = Form::zero(a.space(), a.degree());
    for (b, p) in a.terms() {
        let mut c = None;
        for (m, x) in p.terms() {
            if m.degree() != 0 {
                return None;
            }
            c = Some(x.clone());
        }
        if let Some(c) = c {
            out.add_term(*b, c);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::is_real;
    use crate::scalar::cint;

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    fn scalar(s: ModelSpace, p: Poly) -> PolyForm {
        Form::scalar(s, p)
    }

    #[test]
    fn del_examples() {
        let s = sp(1);
        assert_eq!(del(&scalar(s, Poly::z(0))), Form::dz(s, 1));
        assert!(delbar(&scalar(s, Poly::z(0))).is_zero());
        let a = Form::dz(s, 2).scale(&(Poly::z(0) * Poly::zb(1)));
        assert!(del(&del(&a)).is_zero());
    }

    #[test]
    fn del_j_of_conjugate_coordinate() {
        let s = sp(1);
        // ∂_J z̄_2 = J(dz̄_2) = −dz_1
        assert_eq!(del_j(&scalar(s, Poly::zb(1))), -PolyForm::dz(s, 1));
    }

    #[test]
    fn flat_potential_gives_twice_omega() {
        let s = sp(2);
        let phi = (0..4).fold(Poly::zero(), |acc, k| acc + Poly::z(k) * Poly::zb(k));
        let eta = hkt_from_potential(s, &phi).unwrap();
        let omega: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) + &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        assert_eq!(as_constant(&eta).unwrap(), omega.scale(&cint(2, 0)));
    }

    #[test]
    fn potential_examples() {
        let s = sp(1);
        assert!(hkt_from_potential(s, &Poly::constant(cint(1, 0))).unwrap().is_zero());
        let r = Poly::z(0) * Poly::zb(0);
        let eta = hkt_from_potential(s, &(r.clone() * r)).unwrap();
        assert!(is_real(&eta));
        assert!(!eta.is_zero());
        assert!(hkt_from_potential(s, &Poly::z(0)).is_err());
    }

    #[test]
    fn d_plus_on_functions() {
        let s = sp(1);
        let f = scalar(s, Poly::z(0) * Poly::zb(1));
        let (d10, d01) = d_plus_components(&f).unwrap();
        assert_eq!(d10, del(&f));
        assert_eq!(d01, delbar(&f));
    }
}
