//! The canonical form `Φ = Ωⁿ`, the volume-pairing map `V_{p,q}`, the
//! constant `λ`, and the `Q`, `Q*`, `Ξ` machinery on the subalgebra
//! generated by `ω_I, ω_J, ω_K`.
//!
//! `V_{p,q}(η)` is the `(n+p, n+q)`-form with
//! `V_{p,q}(η) ∧ α = η ∧ R(α) ∧ Φ̄` for every `α ∈ Λ^{n−p,n−q}`. In the
//! monomial basis the system is diagonal: pairing against the complementary
//! blade isolates one coefficient.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::bridge::{omega_form, QHermForm};
use crate::error::FormError;
use crate::form::{wedge_sign, Blade, Form};
use crate::linalg::Mat;
use crate::quaternion::QuatOperator;
use crate::rmap::{rmap, rproj};
use crate::scalar::{binomial, CRational, Coeff, Rational};
use crate::space::ModelSpace;
use crate::su2::{bidegree_basis, plus_project};

/// Largest `n` for which the constants are computed by default.
pub const DEFAULT_BOUND: usize = 3;

/// `Ω = Σ dz_{2i−1} ∧ dz_{2i}`.
pub fn canonical_omega<C: Coeff>(space: ModelSpace) -> Form<C> {
    let mut out = Form::zero(space, 2);
    for i in 1..=space.n() {
        out = &out + &Form::term(space, &[space.dz(2 * i - 1), space.dz(2 * i)], C::one());
    }
    out
}

/// `Φ = Ωⁿ`, equal to `n!·dz_1 ∧ … ∧ dz_{2n}`.
pub fn canonical_phi<C: Coeff>(space: ModelSpace) -> Form<C> {
    canonical_omega::<C>(space).wedge_pow(space.n())
}

/// `ω_L` of the flat metric. `ω_I = (i/2) Σ dz_k ∧ dz̄_k`.
pub fn omega(op: QuatOperator, space: ModelSpace) -> Form {
    omega_form::<CRational>(op, &QHermForm::<Rational>::flat(space))
}

fn check_pq(space: &ModelSpace, p: usize, q: usize) -> Result<(), FormError> {
    let n = space.n();
    if p > n || q > n {
        return Err(FormError::Invalid(format!("V_{{{p},{q}}} needs p, q ≤ n = {n}")));
    }
    Ok(())
}

/// `V_{p,q}(η)` from its defining pairing.
pub fn vmap_via_pairing<C: Coeff>(p: usize, q: usize, eta: &Form<C>) -> Result<Form<C>, FormError> {
    let space = eta.space();
    eta.require_bidegree(p + q, 0)?;
    check_pq(&space, p, q)?;
    let n = space.n();
    let phi_bar: Form<C> = canonical_phi::<C>(space).conjugate();
    let full = space.full_mask();
    let top = Blade(full);
    let mut out = Form::zero(space, 2 * n + p + q);
    if eta.is_zero() {
        return Ok(out);
    }
    for m in bidegree_basis(&space, n + p, n + q) {
        let mc = Blade(full & !m.0);
        let alpha: Form<C> = Form::monomial(space, mc, C::one());
        let rhs = eta.wedge(&rproj(&alpha)?)?.wedge(&phi_bar)?.coefficient(top);
        if rhs.is_zero() {
            continue;
        }
        let s = wedge_sign(m, mc);
        out.add_term(m, if s < 0 { -rhs } else { rhs });
    }
    Ok(out)
}

/// `V_{0,0}(1)`.
pub fn v00(space: ModelSpace) -> Form {
    vmap_via_pairing(0, 0, &Form::<CRational>::one(space)).expect("degree-0 input is valid")
}

/// `V_{p,q}(η) = rmap(p,q,η) ∧ V_{0,0}(1)`.
pub fn vmap<C: Coeff>(p: usize, q: usize, eta: &Form<C>) -> Result<Form<C>, FormError> {
    let space = eta.space();
    check_pq(&space, p, q)?;
    let data = canonical_data(space.n())?;
    let v = data.v00.map_coeffs(C::from_crational);
    rmap(p, q, eta)?.wedge(&v)
}

/// The scalar `c` with `c·V_{p,p}(η)` real (conjugation-invariant) for real
/// `η`: `(−i)^{n−p}`.
pub fn vmap_reality_factor<C: Coeff>(n: usize, p: usize) -> C {
    C::i_pow((3 * (n - p) % 4) as u8)
}

/// Sign in `V_{p,q}(J η̄) = s · conj(V_{q,p}(η))`: `(−1)^{n+p}`.
pub fn vmap_conjugation_sign(n: usize, p: usize) -> i8 {
    if (n + p).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Q(1) = ω_I² + ω_J² + ω_K²`.
pub fn q_one(space: ModelSpace) -> Form {
    QuatOperator::ALL.iter().map(|&op| omega(op, space).wedge_pow(2)).fold(Form::zero(space, 4), |a, b| &a + &b)
}

/// `Q(a) = a ∧ Q(1)`.
pub fn q_operator(a: &Form) -> Form {
    a.wedge(&q_one(a.space())).expect("same space")
}

/// Adjoint of [`q_operator`] for the Euclidean pairing.
pub fn q_star(b: &Form) -> Form {
    let space = b.space();
    if b.degree() < 4 {
        return Form::zero(space, 0);
    }
    let q1 = q_one(space);
    let sixteen = Rational::from_integer(16.into());
    let mut out = Form::zero(space, b.degree() - 4);
    for (t, bt) in b.terms() {
        for (u, c) in q1.terms() {
            if t.0 & u.0 != u.0 {
                continue;
            }
            let rest = Blade(t.0 & !u.0);
            let s = wedge_sign(rest, *u);
            let sc = if s < 0 { -c.clone() } else { c.clone() };
            out.add_term(rest, (sc.conj() * bt.clone()).scale_rational(&sixteen));
        }
    }
    out
}

/// The basis `ω_I^{k−2j} ∧ (Ω ∧ Ω̄)^j` of the `(k,k)` part of the subalgebra.
pub fn a_basis(space: ModelSpace, k: usize) -> Vec<(String, Form)> {
    let wi = omega(QuatOperator::I, space);
    let omega: Form = canonical_omega(space);
    let oo = omega.wedge(&omega.conjugate()).expect("same space");
    (0..=k / 2)
        .map(|j| {
            let label = match (k - 2 * j, j) {
                (0, 0) => "1".to_string(),
                (i, 0) => format!("ω_I^{i}"),
                (0, j) => format!("(ΩΩ̄)^{j}"),
                (i, j) => format!("ω_I^{i}(ΩΩ̄)^{j}"),
            };
            let f = wi.wedge_pow(k - 2 * j).wedge(&oo.wedge_pow(j)).expect("same space");
            (label, f)
        })
        .collect()
}

/// Coordinates of `f` in the span of `basis`, if it lies there.
fn coordinates(f: &Form, basis: &[Form]) -> Option<Vec<CRational>> {
    let mut blades: Vec<Blade> = f.terms().map(|(b, _)| *b).collect();
    for g in basis {
        blades.extend(g.terms().map(|(b, _)| *b));
    }
    blades.sort();
    blades.dedup();
    let a = Mat::from_fn(blades.len(), basis.len(), |r, c| basis[c].coefficient(blades[r]));
    let rhs: Vec<CRational> = blades.iter().map(|b| f.coefficient(*b)).collect();
    a.solve(&rhs)
}

/// A row of the `Q*` table: `Q*(label) = Σ coeffs_j · basis_j` of degree
/// `2n − 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct QStarEntry {
    pub input: String,
    pub output_basis: Vec<String>,
    pub coeffs: Option<Vec<CRational>>,
}

/// Everything derived from `Φ` for one `n`.
#[derive(Clone, Debug)]
pub struct CanonicalData {
    pub n: usize,
    pub omega: Form,
    pub phi: Form,
    pub omega_i: Form,
    pub omega_j: Form,
    pub omega_k: Form,
    pub v00: Form,
    /// `top(Φ∧Φ̄) / top(ρ∧ρ)` with the real representative `ρ = iⁿ rmap(n,n,Φ)`.
    pub lambda: Rational,
    /// The same ratio with `rmap(n,n,Φ)` itself; `V_{0,0}(1) = λ_lit·rmap(n,n,Φ)`.
    pub lambda_literal: CRational,
    /// `λ` computed as `top(Φ∧Φ̄) / (γ² top(Ξ∧Ξ))`.
    pub lambda_xi_path: Rational,
    pub xi: Form,
    /// Coefficients of `Ξ` on `ω_I^{n−2j} (ΩΩ̄)^j`, leading coefficient 1.
    pub xi_coefficients: Vec<Rational>,
    pub gamma: Rational,
    /// `rmap(n,n,Φ) = κ γ Ξ`.
    pub kappa: CRational,
    /// Dimension of `ker Q* ∩ A^{n,n}`.
    pub q_star_kernel_dim: usize,
    pub q_star_table: Vec<QStarEntry>,
}

fn real(c: &CRational) -> Result<Rational, FormError> {
    if c.im.is_zero() {
        Ok(c.re.clone())
    } else {
        Err(FormError::Invalid(format!("expected a real value, got {c}")))
    }
}

fn ratio(a: &CRational, b: &CRational) -> Result<CRational, FormError> {
    if b.is_zero() {
        return Err(FormError::Invalid("zero denominator in a top-form ratio".into()));
    }
    Ok(a / b)
}

fn compute(n: usize) -> Result<CanonicalData, FormError> {
    let space = ModelSpace::new(n)?;
    let omega_f: Form = canonical_omega(space);
    let phi: Form = canonical_phi(space);
    let top = Blade(space.full_mask());
    let phi_phibar = phi.wedge(&phi.conjugate())?.coefficient(top);
    let r = rmap(n, n, &phi)?;
    let rho = r.scale_i((n % 4) as u8);
    let lambda_literal = ratio(&phi_phibar, &r.wedge(&r)?.coefficient(top))?;
    let lambda = real(&ratio(&phi_phibar, &rho.wedge(&rho)?.coefficient(top))?)?;
    let v = v00(space);
    if v != r.scale(&lambda_literal) {
        return Err(FormError::Invalid("V_{0,0}(1) is not proportional to rmap(n,n,Φ)".into()));
    }

    // Ξ: the element of A^{n,n} orthogonal to Q(A^{n−2,n−2}), leading coefficient 1
    let basis: Vec<Form> = a_basis(space, n).into_iter().map(|(_, f)| f).collect();
    let lower: Vec<Form> = if n >= 2 { a_basis(space, n - 2).into_iter().map(|(_, f)| q_operator(&f)).collect() } else { vec![] };
    let unknowns = basis.len() - 1;
    let mut xi_coefficients = vec![Rational::one()];
    if unknowns > 0 {
        let a = Mat::from_fn(lower.len(), unknowns, |i, j| basis[j + 1].euclid_pairing(&lower[i]).expect("same degree"));
        let rhs: Vec<CRational> = lower.iter().map(|l| -basis[0].euclid_pairing(l).expect("same degree")).collect();
        let c = a.solve(&rhs).ok_or_else(|| FormError::Invalid("no Ξ orthogonal to the image of Q".into()))?;
        for x in &c {
            xi_coefficients.push(real(x)?);
        }
    }
    let xi = basis
        .iter()
        .zip(&xi_coefficients)
        .map(|(f, c)| f.scale(&CRational::new(c.clone(), Rational::zero())))
        .fold(Form::zero(space, 2 * n), |a, b| &a + &b);
    let wi_n = &basis[0];
    let gamma = real(&ratio(&wi_n.euclid_pairing(&xi)?, &xi.euclid_pairing(&xi)?)?)?;
    let gamma_xi = xi.scale(&CRational::new(gamma.clone(), Rational::zero()));
    let kappa = CRational::i_pow(((4 - n % 4) % 4) as u8);
    if r != gamma_xi.scale(&kappa) {
        return Err(FormError::Invalid("rmap(n,n,Φ) is not κγΞ".into()));
    }
    let xi_xi = real(&xi.wedge(&xi)?.coefficient(top))?;
    let lambda_xi_path = real(&phi_phibar)? / (gamma.clone() * gamma.clone() * xi_xi);

    // Q* on A^{n,n}: table and kernel
    let out_basis = if n >= 2 { a_basis(space, n - 2) } else { vec![] };
    let out_forms: Vec<Form> = out_basis.iter().map(|(_, f)| f.clone()).collect();
    let labels = a_basis(space, n);
    let images: Vec<Form> = basis.iter().map(q_star).collect();
    let q_star_table = labels
        .iter()
        .zip(&images)
        .map(|((label, _), img)| QStarEntry {
            input: label.clone(),
            output_basis: out_basis.iter().map(|(l, _)| l.clone()).collect(),
            coeffs: if n >= 2 { coordinates(img, &out_forms) } else { Some(vec![]) },
        })
        .collect();
    let mut blades: Vec<Blade> = images.iter().flat_map(|f| f.terms().map(|(b, _)| *b).collect::<Vec<_>>()).collect();
    blades.sort();
    blades.dedup();
    let m = Mat::from_fn(blades.len().max(1), images.len(), |r, c| {
        blades.get(r).map_or_else(CRational::zero, |b| images[c].coefficient(*b))
    });
    let q_star_kernel_dim = m.nullspace().len();

    Ok(CanonicalData {
        n,
        omega: omega_f,
        phi,
        omega_i: omega(QuatOperator::I, space),
        omega_j: omega(QuatOperator::J, space),
        omega_k: omega(QuatOperator::K, space),
        v00: v,
        lambda,
        lambda_literal,
        lambda_xi_path,
        xi,
        xi_coefficients,
        gamma,
        kappa,
        q_star_kernel_dim,
        q_star_table,
    })
}

type Cache = Mutex<HashMap<usize, Arc<CanonicalData>>>;

/// Cached [`CanonicalData`] for `n ≤ DEFAULT_BOUND`.
pub fn canonical_data(n: usize) -> Result<Arc<CanonicalData>, FormError> {
    canonical_data_bounded(n, DEFAULT_BOUND)
}

/// Cached [`CanonicalData`] with an explicit bound on `n`.
pub fn canonical_data_bounded(n: usize, bound: usize) -> Result<Arc<CanonicalData>, FormError> {
    if n == 0 || n > bound {
        return Err(FormError::TooLarge { n, bound });
    }
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().expect("cache lock").get(&n) {
        return Ok(d.clone());
    }
    let d = Arc::new(compute(n)?);
    cache.lock().expect("cache lock").insert(n, d.clone());
    Ok(d)
}

/// `λ(n)`, positive: the top-form ratio with the real representative of
/// `rmap(n,n,Φ)`.
pub fn lambda_constant(n: usize) -> Result<Rational, FormError> {
    Ok(canonical_data(n)?.lambda.clone())
}

/// `(Ξ, γ)`.
pub fn xi_and_gamma(n: usize) -> Result<(Form, Rational), FormError> {
    let d = canonical_data(n)?;
    Ok((d.xi.clone(), d.gamma.clone()))
}

/// Whether `Π₊(ω_Iⁿ) = γ Ξ` (exact; expensive for `n = 3`).
pub fn plus_projection_matches_xi(n: usize) -> Result<bool, FormError> {
    let d = canonical_data(n)?;
    let space = ModelSpace::new(n)?;
    let wi_n = omega(QuatOperator::I, space).wedge_pow(n);
    Ok(plus_project(&wi_n)? == d.xi.scale(&CRational::new(d.gamma.clone(), Rational::zero())))
}

/// `C(2n, n)`, the closed form observed for `λ` at small `n`.
pub fn central_binomial(n: usize) -> Rational {
    binomial(2 * n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::{apply_operator, is_real};
    use crate::scalar::{cint, int, rat};

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    fn c(x: i64) -> CRational {
        cint(x, 0)
    }

    #[test]
    fn phi_examples() {
        let s = sp(1);
        assert_eq!(canonical_phi::<CRational>(s), &Form::dz(s, 1) ^ &Form::dz(s, 2));
        let s = sp(2);
        let phi: Form = canonical_phi(s);
        let expect = Form::term(s, &[s.dz(1), s.dz(2), s.dz(3), s.dz(4)], c(2));
        assert_eq!(phi, expect);
        assert!(is_real(&phi));
    }

    #[test]
    fn omega_forms() {
        let s = sp(1);
        let half_i = CRational::new(Rational::zero(), rat(1, 2));
        let wi = (&(&Form::dz(s, 1) ^ &Form::dzb(s, 1)) + &(&Form::dz(s, 2) ^ &Form::dzb(s, 2))).scale(&half_i);
        assert_eq!(omega(QuatOperator::I, s), wi);
        let o: Form = canonical_omega(s);
        // Ω ∧ Ω̄ = ω_J² + ω_K²
        let lhs = o.wedge(&o.conjugate()).unwrap();
        let rhs = &omega(QuatOperator::J, s).wedge_pow(2) + &omega(QuatOperator::K, s).wedge_pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn golden_constants() {
        let expect_gamma = [rat(1, 1), rat(2, 3), rat(2, 5)];
        for n in 1..=3 {
            let d = canonical_data(n).unwrap();
            assert_eq!(d.lambda, central_binomial(n), "n = {n}");
            assert_eq!(d.lambda, d.lambda_xi_path);
            assert_eq!(d.gamma, expect_gamma[n - 1]);
            assert_eq!(d.q_star_kernel_dim, 1);
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(d.lambda_literal, c(sign) * CRational::new(d.lambda.clone(), Rational::zero()));
        }
        assert_eq!(canonical_data(1).unwrap().xi, omega(QuatOperator::I, sp(1)));
        assert_eq!(canonical_data(2).unwrap().xi_coefficients, vec![int(1), rat(-1, 2)]);
        assert_eq!(canonical_data(3).unwrap().xi_coefficients, vec![int(1), rat(-3, 2)]);
        assert!(matches!(lambda_constant(10), Err(FormError::TooLarge { .. })));
    }

    #[test]
    fn q_star_table_values() {
        let d = canonical_data(2).unwrap();
        let vals: Vec<_> = d.q_star_table.iter().map(|e| e.coeffs.clone().unwrap()).collect();
        assert_eq!(vals, vec![vec![c(40)], vec![c(80)]]);
        let d = canonical_data(3).unwrap();
        let vals: Vec<_> = d.q_star_table.iter().map(|e| e.coeffs.clone().unwrap()).collect();
        assert_eq!(vals, vec![vec![c(168)], vec![c(112)]]);
        assert!(q_star(&d.xi).is_zero());
    }

    #[test]
    fn plus_projection_is_gamma_xi() {
        for n in 1..=2 {
            assert!(plus_projection_matches_xi(n).unwrap());
        }
    }

    #[test]
    fn adjointness() {
        let s = sp(1);
        let a: Form = Form::one(s).scale(&cint(2, 1));
        let b: Form = &q_one(s) + &Form::term(s, &[s.dz(1), s.dz(2), s.dzb(1), s.dzb(2)], cint(0, 3));
        assert_eq!(q_operator(&a).euclid_pairing(&b).unwrap(), a.euclid_pairing(&q_star(&b)).unwrap());
    }

    #[test]
    fn two_paths_agree() {
        for n in 1..=2 {
            let s = sp(n);
            for p in 0..=n {
                for q in 0..=n {
                    for b in bidegree_basis(&s, p + q, 0) {
                        let eta: Form = Form::monomial(s, b, cint(1, 2));
                        assert_eq!(vmap(p, q, &eta).unwrap(), vmap_via_pairing(p, q, &eta).unwrap(), "n={n} p={p} q={q}");
                    }
                }
            }
        }
        let s = sp(2);
        assert!(vmap_via_pairing(1, 1, &Form::<CRational>::zero(s, 2)).unwrap().is_zero());
    }

    #[test]
    fn reality_and_conjugation() {
        for n in 1..=2 {
            let s = sp(n);
            for p in 0..=n {
                for b in bidegree_basis(&s, 2 * p, 0) {
                    let eta = crate::quaternion::real_part(&Form::monomial(s, b, cint(1, 2))).unwrap();
                    let v = vmap(p, p, &eta).unwrap().scale(&vmap_reality_factor(n, p));
                    assert_eq!(v.conjugate(), v);
                }
                for q in 0..=n {
                    for b in bidegree_basis(&s, p + q, 0) {
                        let eta: Form = Form::monomial(s, b, cint(3, -1));
                        let lhs = vmap(p, q, &apply_operator(QuatOperator::J, &eta.conjugate())).unwrap();
                        let rhs = vmap(q, p, &eta).unwrap().conjugate().scale(&c(vmap_conjugation_sign(n, p) as i64));
                        assert_eq!(lhs, rhs, "n={n} p={p} q={q}");
                    }
                }
            }
        }
    }
}
