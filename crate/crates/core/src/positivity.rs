//! Decision procedures for the positive cones.
//!
//! A real `(2p,0)`-form `η` is weakly positive when
//! `η(x_1, J x̄_1, …, x_p, J x̄_p) ≥ 0` for all (1,0) vectors, and strongly
//! positive when it is a nonnegative combination of products of forms
//! `ξ ∧ J(ξ̄)`. A real `(p,p)`-form `ρ` is weakly positive when
//! `(−i)^p ρ(x_1, x̄_1, …, x_p, x̄_p) ≥ 0`.
//!
//! Certificates of positivity only come from exact criteria. Sampling can
//! only refute: a negative value found by search is rationalized and
//! re-evaluated exactly before it is reported.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::bridge::{hermitian_eigenvalues, hermitian_matrix, j_conjugate, metric_from_form, quaternionic_eigenvalues, BridgeScalar, QHermForm};
use crate::error::{BridgeError, FormError};
use crate::form::{Blade, Form};
use crate::linalg::{nonneg_solution, psd_with_witness, Definiteness, Mat};
use crate::quaternion::{apply_operator, conjugate_vector, holomorphic_vector, is_real, QuatOperator};
use crate::random::{gaussian_vector, rng};
use crate::rmap::rproj;
use crate::scalar::{binomial_u64, rational_from_f64, rational_to_f64, CRational, Coeff, Rational, Scalar};
use crate::space::ModelSpace;
use crate::su2::bidegree_basis;
use crate::vmap::canonical_omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    PositiveCertified,
    NegativeCertified,
    Unknown,
}

/// Vectors achieving a negative evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Holomorphic components of each (1,0) vector.
    pub vectors: Vec<Vec<Complex64>>,
    pub value: f64,
    /// The value recomputed exactly from rationalized vectors, when the input
    /// was exact.
    pub exact_value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchStats {
    pub samples: u64,
    /// Most negative normalized value seen.
    pub best: f64,
    pub seed: u64,
}

/// A strong-positivity certificate `η = Σ w_k G_k`, `w_k > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrongCertificate {
    pub weights: Vec<Rational>,
    pub generators: Vec<Form>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    pub stats: Option<SearchStats>,
    pub certificate: Option<StrongCertificate>,
}

impl Verdict {
    fn positive() -> Self {
        Verdict { kind: VerdictKind::PositiveCertified, witness: None, stats: None, certificate: None }
    }

    fn negative(w: Witness) -> Self {
        Verdict { kind: VerdictKind::NegativeCertified, witness: Some(w), stats: None, certificate: None }
    }

    fn unknown(stats: SearchStats) -> Self {
        Verdict { kind: VerdictKind::Unknown, witness: None, stats: Some(stats), certificate: None }
    }

    fn with_stats(mut self, stats: Option<SearchStats>) -> Self {
        if self.stats.is_none() {
            self.stats = stats;
        }
        self
    }
}

/// How to decide weak positivity when no exact criterion applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Only exact criteria; errors for `1 < p < n`.
    Exact,
    /// Complex-Gaussian tuples.
    Sampled { samples: u64, seed: u64 },
    /// Gaussian tuples followed by local descent from the best start of each
    /// chunk.
    Descent { samples: u64, seed: u64 },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Descent { samples: 4096, seed: 0 }
    }
}

/// `η(x_1, J x̄_1, …, x_p, J x̄_p)`.
pub fn quaternionic_evaluation<C: Scalar>(eta: &Form<C>, xs: &[Vec<C>]) -> C {
    let space = eta.space();
    let mut vecs = Vec::with_capacity(2 * xs.len());
    for x in xs {
        vecs.push(holomorphic_vector(&space, x));
        vecs.push(holomorphic_vector(&space, &j_conjugate(&space, x)));
    }
    eta.evaluate(&vecs)
}

/// `ρ(x_1, x̄_1, …, x_p, x̄_p)`.
pub fn classical_evaluation<C: Scalar>(rho: &Form<C>, xs: &[Vec<C>]) -> C {
    let space = rho.space();
    let mut vecs = Vec::with_capacity(2 * xs.len());
    for x in xs {
        let h = holomorphic_vector(&space, x);
        vecs.push(conjugate_vector(&space, &h));
        vecs.insert(vecs.len() - 1, h);
    }
    rho.evaluate(&vecs)
}

/// A float form flattened for fast repeated evaluation.
struct Compiled {
    terms: Vec<(Vec<usize>, Complex64)>,
}

impl Compiled {
    fn new(f: &Form<Complex64>) -> Self {
        Compiled { terms: f.terms().map(|(b, c)| (b.generators().map(|g| g.0 as usize).collect(), *c)).collect() }
    }

    fn eval(&self, vecs: &[Vec<Complex64>]) -> Complex64 {
        let k = vecs.len();
        let mut m = vec![Complex64::zero(); k * k];
        let mut acc = Complex64::zero();
        for (gens, c) in &self.terms {
            for (a, g) in gens.iter().enumerate() {
                for (b, v) in vecs.iter().enumerate() {
                    m[a * k + b] = v[*g];
                }
            }
            acc += c * det(&mut m, k);
        }
        acc
    }
}

fn det(m: &mut [Complex64], k: usize) -> Complex64 {
    let mut d = Complex64::one();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a * k + col].norm().total_cmp(&m[b * k + col].norm())).expect("nonempty");
        if m[piv * k + col].norm() == 0.0 {
            return Complex64::zero();
        }
        if piv != col {
            for j in 0..k {
                m.swap(piv * k + j, col * k + j);
            }
            d = -d;
        }
        let p = m[col * k + col];
        d *= p;
        for r in col + 1..k {
            let f = m[r * k + col] / p;
            if f != Complex64::zero() {
                for j in col..k {
                    let v = m[col * k + j];
                    m[r * k + j] -= f * v;
                }
            }
        }
    }
    d
}

const CHUNK: u64 = 128;

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Complex Gram–Schmidt. Both evaluations only pick up the factor
/// `|det A|² > 0` under a frame change `x ↦ Ax` inside the span, so the sign
/// is unchanged and the search runs over orthonormal frames.
fn orthonormalize(vs: &mut [Vec<Complex64>]) {
    for i in 0..vs.len() {
        let (done, rest) = vs.split_at_mut(i);
        let v = &mut rest[0];
        for u in done.iter() {
            let c: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(u) {
                *x -= c * a;
            }
        }
        normalize(v);
    }
}

fn random_tuple(r: &mut impl Rng, k: usize, m: usize) -> Vec<Vec<Complex64>> {
    let mut t: Vec<Vec<Complex64>> = (0..k).map(|_| gaussian_vector(r, m)).collect();
    orthonormalize(&mut t);
    t
}

fn descend(
    f: &(dyn Fn(&[Vec<Complex64>]) -> f64 + Sync),
    start: Vec<Vec<Complex64>>,
    r: &mut impl Rng,
    steps: usize,
) -> (f64, Vec<Vec<Complex64>>) {
    let m = start[0].len();
    let mut cur = start;
    let mut val = f(&cur);
    let mut step = 0.3;
    for _ in 0..steps {
        let mut cand: Vec<Vec<Complex64>> =
            cur.iter().map(|v| v.iter().zip(gaussian_vector(r, m)).map(|(a, b)| a + b * step).collect()).collect();
        orthonormalize(&mut cand);
        let cv = f(&cand);
        if cv < val {
            cur = cand;
            val = cv;
            step *= 1.5;
        } else {
            step *= 0.7;
        }
        if step < 1e-7 {
            break;
        }
    }
    (val, cur)
}

/// Minimizes `f` over tuples of `k` unit vectors in `C^m`. Work is split in
/// fixed chunks with their own streams and merged in chunk order, so the
/// result does not depend on the thread count.
pub fn search_minimum(
    k: usize,
    m: usize,
    samples: u64,
    seed: u64,
    descent: bool,
    f: &(dyn Fn(&[Vec<Complex64>]) -> f64 + Sync),
) -> (f64, Vec<Vec<Complex64>>) {
    let chunks = samples.div_ceil(CHUNK).max(1);
    let results: Vec<(f64, Vec<Vec<Complex64>>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(seed, c);
            let count = CHUNK.min(samples.saturating_sub(c * CHUNK)).max(1);
            let mut best = (f64::INFINITY, Vec::new());
            for _ in 0..count {
                let t = random_tuple(&mut r, k, m);
                let v = f(&t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            if descent {
                let (v, t) = descend(f, best.1.clone(), &mut r, 300);
                if v < best.0 {
                    best = (v, t);
                }
            }
            best
        })
        .collect();
    results.into_iter().fold((f64::INFINITY, Vec::new()), |acc, x| if x.0 < acc.0 { x } else { acc })
}

fn to_float(f: &Form) -> Form<Complex64> {
    f.map_coeffs(<Complex64 as Coeff>::from_crational)
}

fn rationalize_vectors(vs: &[Vec<Complex64>]) -> Vec<Vec<CRational>> {
    let den = 1 << 20;
    vs.iter()
        .map(|v| v.iter().map(|z| CRational::new(rational_from_f64(z.re, den), rational_from_f64(z.im, den))).collect())
        .collect()
}

fn real_value(c: &CRational) -> Rational {
    c.re.clone()
}

fn scale_of(f: &Form<Complex64>) -> f64 {
    f.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max).max(1e-300)
}

/// Which evaluation a search refutes.
#[derive(Clone, Copy)]
enum Side {
    Quaternionic,
    Classical(usize),
}

fn evaluate_side_f64(c: &Compiled, space: &ModelSpace, side: Side, xs: &[Vec<Complex64>]) -> f64 {
    let mut vecs = Vec::with_capacity(2 * xs.len());
    for x in xs {
        let h = holomorphic_vector(space, x);
        let partner = match side {
            Side::Quaternionic => holomorphic_vector(space, &j_conjugate(space, x)),
            Side::Classical(_) => conjugate_vector(space, &h),
        };
        vecs.push(h);
        vecs.push(partner);
    }
    let v = c.eval(&vecs);
    match side {
        Side::Quaternionic => v.re,
        Side::Classical(p) => (v * Complex64::i().powu(3 * p as u32)).re,
    }
}

fn evaluate_side_exact(f: &Form, side: Side, xs: &[Vec<CRational>]) -> Rational {
    match side {
        Side::Quaternionic => real_value(&quaternionic_evaluation(f, xs)),
        Side::Classical(p) => {
            let v = classical_evaluation(f, xs) * CRational::i_pow((3 * p % 4) as u8);
            real_value(&v)
        }
    }
}

fn sampled_verdict(
    float_form: &Form<Complex64>,
    exact_form: Option<&Form>,
    side: Side,
    k: usize,
    samples: u64,
    seed: u64,
    descent: bool,
) -> Verdict {
    let space = float_form.space();
    let compiled = Compiled::new(float_form);
    let scale = scale_of(float_form);
    let f = |xs: &[Vec<Complex64>]| evaluate_side_f64(&compiled, &space, side, xs) / scale;
    let (best, tuple) = search_minimum(k, space.complex_dim(), samples, seed, descent, &f);
    let stats = SearchStats { samples, best, seed };
    if best >= -1e-9 || tuple.is_empty() {
        return Verdict::unknown(stats);
    }
    let witness = match exact_form {
        Some(ef) => {
            let exact = rationalize_vectors(&tuple);
            let v = evaluate_side_exact(ef, side, &exact);
            if !v.is_negative() {
                return Verdict::unknown(stats);
            }
            let vectors = exact
                .iter()
                .map(|x| x.iter().map(<Complex64 as Coeff>::from_crational).collect())
                .collect();
            Witness { vectors, value: rational_to_f64(&v), exact_value: Some(v) }
        }
        None => Witness { vectors: tuple, value: best * scale, exact_value: None },
    };
    Verdict::negative(witness).with_stats(Some(stats))
}

fn exact_witness(vectors: Vec<Vec<CRational>>, value: Rational) -> Witness {
    Witness {
        vectors: vectors.iter().map(|x| x.iter().map(<Complex64 as Coeff>::from_crational).collect()).collect(),
        value: rational_to_f64(&value),
        exact_value: Some(value),
    }
}

/// Holomorphic components `x_k = X_{2k} + i X_{2k+1}` of a real vector.
fn holomorphic_part(x: &[Rational]) -> Vec<CRational> {
    x.chunks(2).map(|c| CRational::new(c[0].clone(), c[1].clone())).collect()
}

fn require_real_2p0(eta: &Form) -> Result<usize, BridgeError> {
    let k = eta.degree();
    if k % 2 == 1 {
        return Err(FormError::OddDegree(k).into());
    }
    eta.require_bidegree(k, 0)?;
    if !is_real(eta) {
        return Err(FormError::NotReal.into());
    }
    Ok(k / 2)
}

/// Weak positivity of a real `(2p,0)`-form. `p = 1` uses the metric, `p = n`
/// the sign against `Φ`; other `p` use `strategy`.
pub fn weakly_positive_2p0(eta: &Form, strategy: Strategy) -> Result<Verdict, BridgeError> {
    let p = require_real_2p0(eta)?;
    let space = eta.space();
    let n = space.n();
    if p == 0 {
        let c = eta.coefficient(Blade::EMPTY).re;
        return Ok(if c.is_negative() { Verdict::negative(exact_witness(vec![], c)) } else { Verdict::positive() });
    }
    if p == 1 {
        let g = metric_from_form(eta)?;
        return Ok(match psd_with_witness(g.matrix()) {
            Definiteness::Semidefinite { .. } => Verdict::positive(),
            Definiteness::Indefinite(x) => {
                let v = vec![holomorphic_part(&x)];
                let val = evaluate_side_exact(eta, Side::Quaternionic, &v);
                debug_assert!(val.is_negative());
                Verdict::negative(exact_witness(v, val))
            }
        });
    }
    if p == n {
        let top = Blade(space.holomorphic_mask());
        let c = eta.coefficient(top).re;
        if !c.is_negative() {
            return Ok(Verdict::positive());
        }
        let v: Vec<Vec<CRational>> = (0..n)
            .map(|i| {
                let mut x = vec![CRational::zero(); space.complex_dim()];
                x[2 * i] = CRational::one();
                x
            })
            .collect();
        let val = evaluate_side_exact(eta, Side::Quaternionic, &v);
        return Ok(Verdict::negative(exact_witness(v, val)));
    }
    match strategy {
        Strategy::Exact => Err(BridgeError::ExactUnavailable(p)),
        Strategy::Sampled { samples, seed } => {
            Ok(sampled_verdict(&to_float(eta), Some(eta), Side::Quaternionic, p, samples, seed, false))
        }
        Strategy::Descent { samples, seed } => {
            Ok(sampled_verdict(&to_float(eta), Some(eta), Side::Quaternionic, p, samples, seed, true))
        }
    }
}

/// Direct sampled test of the defining inequality, for any `p`, ignoring the
/// exact criteria.
pub fn sample_2p0(eta: &Form<Complex64>, samples: u64, seed: u64) -> Verdict {
    let p = eta.degree() / 2;
    sampled_verdict(eta, None, Side::Quaternionic, p, samples, seed, true)
}

/// Weak positivity of a real `(p,p)`-form (`conj(ρ) = ρ`).
pub fn weak_positive_pp(rho: &Form, strategy: Strategy) -> Result<Verdict, BridgeError> {
    let k = rho.degree();
    if k % 2 == 1 {
        return Err(FormError::OddDegree(k).into());
    }
    let p = k / 2;
    rho.require_bidegree(p, p)?;
    if rho.conjugate() != *rho {
        return Err(FormError::NotReal.into());
    }
    if p == 0 {
        let c = rho.coefficient(Blade::EMPTY).re;
        return Ok(if c.is_negative() { Verdict::negative(exact_witness(vec![], c)) } else { Verdict::positive() });
    }
    if p == 1 {
        let s = hermitian_matrix(rho)?;
        return Ok(match psd_with_witness(&s) {
            Definiteness::Semidefinite { .. } => Verdict::positive(),
            Definiteness::Indefinite(x) => {
                let v = vec![holomorphic_part(&x)];
                let val = evaluate_side_exact(rho, Side::Classical(1), &v);
                debug_assert!(val.is_negative());
                Verdict::negative(exact_witness(v, val))
            }
        });
    }
    match strategy {
        Strategy::Exact => Err(BridgeError::ExactUnavailable(p)),
        Strategy::Sampled { samples, seed } => {
            Ok(sampled_verdict(&to_float(rho), Some(rho), Side::Classical(p), p, samples, seed, false))
        }
        Strategy::Descent { samples, seed } => {
            Ok(sampled_verdict(&to_float(rho), Some(rho), Side::Classical(p), p, samples, seed, true))
        }
    }
}

/// Sampled weak positivity of a float `(p,p)`-form.
pub fn sample_pp(rho: &Form<Complex64>, samples: u64, seed: u64) -> Verdict {
    let p = rho.degree() / 2;
    sampled_verdict(rho, None, Side::Classical(p), p, samples, seed, true)
}

/// `ξ ∧ J(ξ̄)`.
pub fn generator_square<C: Coeff>(xi: &Form<C>) -> Form<C> {
    xi ^ &apply_operator(QuatOperator::J, &xi.conjugate())
}

/// Products `∏ ξ_i ∧ J(ξ̄_i)` spanning the strong cone: all coordinate
/// products, then `count` products of random Gaussian-integer `ξ_i`.
pub fn strong_generators(space: ModelSpace, p: usize, count: usize, seed: u64) -> Vec<Form> {
    let m = space.complex_dim();
    let coord: Vec<Form> = (1..=m).map(|k| generator_square(&Form::<CRational>::dz(space, k))).collect();
    let mut out = Vec::new();
    for subset in bidegree_basis(&space, p, 0) {
        let f = subset
            .generators()
            .map(|g| coord[space.coordinate(g)].clone())
            .fold(Form::one(space), |a, b| &a ^ &b);
        if !f.is_zero() {
            out.push(f);
        }
    }
    let mut r = rng(seed, u64::MAX);
    while out.len() < count + m {
        let mut prod = Form::one(space);
        for _ in 0..p {
            let mut xi = Form::zero(space, 1);
            for k in 1..=m {
                if r.gen_bool(0.5) {
                    xi = &xi + &Form::dz(space, k).scale(&crate::random::small_crational(&mut r, 1));
                }
            }
            prod = &prod ^ &generator_square(&xi);
        }
        if !prod.is_zero() {
            out.push(prod);
        }
    }
    out
}

/// Default generator count `64 · C(2n, 2p)`.
pub fn default_generator_count(space: &ModelSpace, p: usize) -> usize {
    64 * binomial_u64(space.complex_dim(), 2 * p) as usize
}

fn lp_columns(space: &ModelSpace, p: usize, forms: &[&Form]) -> Mat<Rational> {
    let blades = bidegree_basis(space, 2 * p, 0);
    Mat::from_fn(2 * blades.len(), forms.len(), |r, c| {
        let x = forms[c].coefficient(blades[r / 2]);
        if r % 2 == 0 {
            x.re
        } else {
            x.im
        }
    })
}

/// Strong positivity with the default generator sample.
pub fn strongly_positive_2p0(eta: &Form, seed: u64) -> Result<Verdict, BridgeError> {
    strongly_positive_with(eta, &[], seed)
}

/// Strong positivity, adding `extra` generators to the default sample.
pub fn strongly_positive_with(eta: &Form, extra: &[Form], seed: u64) -> Result<Verdict, BridgeError> {
    let p = require_real_2p0(eta)?;
    let space = eta.space();
    let weak = weakly_positive_2p0(eta, Strategy::Descent { samples: 2048, seed })?;
    if weak.kind == VerdictKind::NegativeCertified || p <= 1 {
        return Ok(weak);
    }
    let gens = strong_generators(space, p, default_generator_count(&space, p), seed);
    let all: Vec<&Form> = gens.iter().chain(extra.iter()).collect();
    let a = lp_columns(&space, p, &all);
    let b = lp_columns(&space, p, &[eta]).column(0);
    match nonneg_solution(&a, &b) {
        Some(x) => {
            let (weights, generators) = x
                .into_iter()
                .zip(all)
                .filter(|(w, _)| w.is_positive())
                .map(|(w, g)| (w, g.clone()))
                .unzip();
            Ok(Verdict {
                kind: VerdictKind::PositiveCertified,
                witness: None,
                stats: weak.stats,
                certificate: Some(StrongCertificate { weights, generators }),
            })
        }
        None => Ok(Verdict { kind: VerdictKind::Unknown, ..weak }),
    }
}

/// `η − h·Ω^p`, the form whose weak positivity means strict positivity with
/// margin `h`.
pub fn strict_margin(eta: &Form, h: &Rational) -> Result<Form, BridgeError> {
    let p = require_real_2p0(eta)?;
    let omega_p = canonical_omega::<CRational>(eta.space()).wedge_pow(p);
    Ok(eta - &omega_p.scale(&CRational::new(h.clone(), Rational::zero())))
}

fn tolerance(values: &[f64]) -> f64 {
    1e-9 * values.iter().fold(1.0f64, |a, v| a.max(v.abs()))
}

/// Whether every sum of `q` values is nonnegative (up to rounding).
pub fn spectrum_q_positive(values: &[f64], q: usize) -> bool {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().take(q).sum::<f64>() >= -tolerance(values)
}

/// `ω^q`-positivity of a real (1,1)-form against the background `g`.
pub fn omega_q_positive<S: BridgeScalar>(rho: &Form<S>, q: usize, g: &QHermForm<S::Real>) -> Result<bool, BridgeError> {
    let m = rho.space().complex_dim();
    if q == 0 || q > m {
        return Err(BridgeError::OutOfRange(format!("q = {q} (need 1 ≤ q ≤ {m})")));
    }
    Ok(spectrum_q_positive(&hermitian_eigenvalues(rho, g)?.values, q))
}

/// `Ω^q`-positivity of a real (2,0)-form: the `q` smallest quaternionic
/// eigenvalues against the flat metric have nonnegative sum.
pub fn big_omega_q_positive<S: BridgeScalar>(eta: &Form<S>, q: usize) -> Result<bool, BridgeError> {
    let n = eta.space().n();
    if q == 0 || q > n {
        return Err(BridgeError::OutOfRange(format!("q = {q} (need 1 ≤ q ≤ {n})")));
    }
    let g = QHermForm::<S::Real>::flat(eta.space());
    Ok(spectrum_q_positive(&quaternionic_eigenvalues(eta, &g)?.values, q))
}

/// The real (2,0)-form attached to a real (1,1)-form: `−i·R(ρ)`, so that
/// `ω_I ↦ Ω`.
pub fn transfer_image<C: Coeff>(rho: &Form<C>) -> Result<Form<C>, FormError> {
    Ok(rproj(rho)?.scale_i(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferStatus {
    /// Premise and conclusion both hold.
    Holds,
    /// The premise fails, so nothing is claimed.
    Vacuous,
    /// Premise holds but the conclusion fails.
    Violated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub premise: bool,
    pub conclusion: bool,
    pub status: TransferStatus,
}

/// Checks "`ρ` is `ω^{2n−2p}`-positive ⇒ `R(ρ)` is `Ω^{n−p}`-positive".
pub fn positivity_transfer_check<S: BridgeScalar>(rho: &Form<S>, p: usize) -> Result<TransferReport, BridgeError> {
    let space = rho.space();
    let n = space.n();
    if p >= n {
        return Err(BridgeError::OutOfRange(format!("p = {p} (need p < n = {n})")));
    }
    let g = QHermForm::<S::Real>::flat(space);
    let premise = omega_q_positive(rho, 2 * n - 2 * p, &g)?;
    let conclusion = big_omega_q_positive(&transfer_image(rho)?, n - p)?;
    let status = match (premise, conclusion) {
        (false, _) => TransferStatus::Vacuous,
        (true, true) => TransferStatus::Holds,
        (true, false) => TransferStatus::Violated,
    };
    Ok(TransferReport { premise, conclusion, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_real_form, rng};
    use crate::scalar::{cint, int, rat};
    use crate::vmap::canonical_phi;

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    fn omega_i(s: ModelSpace) -> Form {
        crate::vmap::omega(QuatOperator::I, s)
    }

    #[test]
    fn canonical_forms_are_positive() {
        for n in 1..=3 {
            let s = sp(n);
            let o: Form = canonical_omega(s);
            assert_eq!(weakly_positive_2p0(&o, Strategy::Exact).unwrap().kind, VerdictKind::PositiveCertified);
            let phi: Form = canonical_phi(s);
            assert_eq!(weakly_positive_2p0(&phi, Strategy::Exact).unwrap().kind, VerdictKind::PositiveCertified);
            assert_eq!(strongly_positive_2p0(&o, 1).unwrap().kind, VerdictKind::PositiveCertified);
        }
    }

    #[test]
    fn indefinite_two_form() {
        let s = sp(2);
        let eta: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) - &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        let v = weakly_positive_2p0(&eta, Strategy::Exact).unwrap();
        assert_eq!(v.kind, VerdictKind::NegativeCertified);
        let w = v.witness.unwrap();
        assert!(w.exact_value.unwrap().is_negative());
        // the witness lives on the second quaternionic line
        assert!(w.vectors[0][0].norm() == 0.0 && w.vectors[0][1].norm() == 0.0);
    }

    #[test]
    fn negative_top_form() {
        let s = sp(2);
        let phi: Form = canonical_phi(s);
        let v = weakly_positive_2p0(&-phi, Strategy::Exact).unwrap();
        assert_eq!(v.kind, VerdictKind::NegativeCertified);
        assert!(v.witness.unwrap().exact_value.unwrap().is_negative());
    }

    #[test]
    fn middle_degree_needs_sampling() {
        let s = sp(3);
        let o: Form = canonical_omega(s);
        let o2 = o.wedge_pow(2);
        assert!(matches!(weakly_positive_2p0(&o2, Strategy::Exact), Err(BridgeError::ExactUnavailable(2))));
        let v = weakly_positive_2p0(&o2, Strategy::Sampled { samples: 512, seed: 3 }).unwrap();
        assert_eq!(v.kind, VerdictKind::Unknown);
        assert_eq!(v.stats.as_ref().unwrap().seed, 3);
        let neg = -o2.clone();
        let v = weakly_positive_2p0(&neg, Strategy::Descent { samples: 512, seed: 3 }).unwrap();
        assert_eq!(v.kind, VerdictKind::NegativeCertified);
        assert_eq!(strongly_positive_2p0(&o2, 5).unwrap().kind, VerdictKind::PositiveCertified);
    }

    #[test]
    fn generator_products_are_strong() {
        let s = sp(3);
        let mut r = rng(9, 0);
        let xi1 = crate::random::random_form(s, 1, 0, 0.8, &mut r);
        let xi2 = crate::random::random_form(s, 1, 0, 0.8, &mut r);
        let g = &generator_square(&xi1) ^ &generator_square(&xi2);
        assert!(is_real(&g));
        let v = strongly_positive_with(&g, std::slice::from_ref(&g), 1).unwrap();
        assert_eq!(v.kind, VerdictKind::PositiveCertified);
        let cert = v.certificate.unwrap();
        let sum = cert
            .weights
            .iter()
            .zip(&cert.generators)
            .map(|(w, f)| f.scale(&CRational::new(w.clone(), Rational::zero())))
            .fold(Form::zero(s, 4), |a, b| &a + &b);
        assert_eq!(sum, g);
    }

    #[test]
    fn pp_examples() {
        let s = sp(1);
        assert_eq!(weak_positive_pp(&omega_i(s), Strategy::Exact).unwrap().kind, VerdictKind::PositiveCertified);
        let rho: Form = &(&Form::dz(s, 1) ^ &Form::dzb(s, 1)).scale(&cint(0, 1)) - &(&Form::dz(s, 2) ^ &Form::dzb(s, 2)).scale(&cint(0, 1));
        let v = weak_positive_pp(&rho, Strategy::Exact).unwrap();
        assert_eq!(v.kind, VerdictKind::NegativeCertified);
        assert!(v.witness.unwrap().exact_value.unwrap().is_negative());
        assert!(weak_positive_pp(&rho.scale(&cint(0, 1)), Strategy::Exact).is_err());
    }

    #[test]
    fn correspondence_constant() {
        // η(x, J x̄, …) = C(2p,p) · (−i)^p (i^p rmap(p,p,η))(x, x̄, …)
        let mut r = rng(4, 0);
        for (n, p) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let s = sp(n);
            let eta = random_real_form(s, 2 * p, &mut r);
            let rho = crate::rmap::rmap(p, p, &eta).unwrap().scale_i(p as u8 % 4);
            assert_eq!(rho.conjugate(), rho);
            for _ in 0..3 {
                let xs: Vec<Vec<CRational>> =
                    (0..p).map(|_| (0..2 * n).map(|_| crate::random::small_crational(&mut r, 2)).collect()).collect();
                let lhs = evaluate_side_exact(&eta, Side::Quaternionic, &xs);
                let rhs = evaluate_side_exact(&rho, Side::Classical(p), &xs);
                assert_eq!(lhs, rhs * crate::scalar::binomial(2 * p, p), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn spectrum_criteria() {
        assert!(spectrum_q_positive(&[-1.0, 2.0, 2.0], 2));
        assert!(!spectrum_q_positive(&[-3.0, 1.0, 1.0], 2));
        assert!(!spectrum_q_positive(&[-3.0, 1.0, 1.0], 1));
        assert!(spectrum_q_positive(&[0.0, 1.0, 1.0], 1));
        let s = sp(2);
        let o: Form = canonical_omega(s);
        assert!(big_omega_q_positive(&o, 1).unwrap() && big_omega_q_positive(&o, 2).unwrap());
        // quaternionic eigenvalues (−1, 3)
        let eta: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)).scale(&cint(-1, 0)) + &(&Form::dz(s, 3) ^ &Form::dz(s, 4)).scale(&cint(3, 0));
        assert!(big_omega_q_positive(&eta, 2).unwrap());
        assert!(!big_omega_q_positive(&eta, 1).unwrap());
    }

    #[test]
    fn transfer_examples() {
        let s = sp(2);
        let wi = omega_i(s);
        assert_eq!(transfer_image(&wi).unwrap(), canonical_omega(s));
        for p in 0..2 {
            assert_eq!(positivity_transfer_check(&wi, p).unwrap().status, TransferStatus::Holds);
            assert_eq!(positivity_transfer_check(&-wi.clone(), p).unwrap().status, TransferStatus::Vacuous);
        }
    }

    #[test]
    fn strict_margin_shifts() {
        let s = sp(2);
        let o: Form = canonical_omega(s);
        let shifted = strict_margin(&o.scale(&cint(2, 0)), &rat(1, 2)).unwrap();
        assert_eq!(shifted, o.scale(&CRational::new(rat(3, 2), int(0))));
    }

    #[test]
    fn search_is_deterministic() {
        let s = sp(2);
        let o: Form = canonical_omega(s);
        let f = to_float(&-o);
        let a = sample_2p0(&f, 1000, 11);
        let b = sample_2p0(&f, 1000, 11);
        assert_eq!(a, b);
        assert_eq!(a.kind, VerdictKind::NegativeCertified);
    }
}
