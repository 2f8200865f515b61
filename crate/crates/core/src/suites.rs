//! Named invariant suites.
//!
//! Each suite draws seeded random inputs, checks one family of identities or
//! properties and reports every failure. Exact suites demand exact equality;
//! sampled suites state their tolerance in the summary.

use std::fmt;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bridge::{
    form_from_metric, hermitian_eigenvalues, induced_hermitian_eigenvalues, j_conjugate, metric_from_form,
    quaternionic_eigenvalues, quaternionic_gram_schmidt, two_form_from_matrix, two_form_matrix, QHermForm,
};
use crate::calculus::{d_plus_components, del, del_j, delbar, hkt_from_potential, PolyForm};
use crate::experiments::{sanity_check, sibony_experiment, QuadratureGrid, SingularFamily, MIN_SAMPLES};
use crate::form::Form;
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::positivity::{
    big_omega_q_positive, classical_evaluation, generator_square, omega_q_positive, positivity_transfer_check,
    quaternionic_evaluation, sample_2p0, sample_pp, strongly_positive_with, weak_positive_pp, weakly_positive_2p0,
    Strategy, TransferStatus, VerdictKind,
};
use crate::quaternion::{apply_operator, is_real, real_structure, QuatOperator};
use crate::random::{
    hermitian_form_with_spectrum, random_form, random_poly, random_poly_form, random_real_form, random_unitary, rng,
    small_crational,
};
use crate::rmap::{rmap, rmap_eval, rmap_eval_convolution, rproj};
use crate::scalar::{binomial, cint, int, rat, CRational, Coeff, Rational};
use crate::space::ModelSpace;
use crate::su2::{admissible_weights, casimir_spectrum, plus_project, plus_rank};
use crate::vmap::{canonical_data, canonical_omega, omega, vmap, vmap_conjugation_sign, vmap_reality_factor, vmap_via_pairing};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Random inputs per identity and per `n`.
    pub trials: usize,
    pub seed: u64,
    /// Sample budget for sampled verdicts.
    pub samples: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { trials: 40, seed: 0, samples: 512 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} checks, {} failures)", self.name, self.checks, self.failures.len())?;
        for msg in self.failures.iter().take(5) {
            write!(f, "\n  {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    Unknown(String),
}

pub struct Suite {
    pub name: &'static str,
    pub summary: &'static str,
    run: fn(&SuiteConfig, &mut Tally),
}

/// Accumulates checks and failure messages.
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(msg());
        }
    }

    fn result<T, E: fmt::Display>(&mut self, r: Result<T, E>, ctx: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{ctx}: {e}"));
                None
            }
        }
    }
}

macro_rules! suite {
    ($name:literal, $summary:literal, $f:ident) => {
        Suite { name: $name, summary: $summary, run: $f }
    };
}

static SUITES: &[Suite] = &[
    suite!("wedge-associativity", "wedge is associative on random triples", wedge_associativity),
    suite!("graded-commutativity", "a∧b = (−1)^{|a||b|} b∧a", graded_commutativity),
    suite!("conjugation", "conjugation is an anti-linear involution", conjugation),
    suite!("bidegree-additivity", "(p,q) parts of a wedge add bidegrees", bidegree_additivity),
    suite!("pairing", "the pairing is Hermitian and positive definite", pairing),
    suite!("real-structure", "η ↦ J(η̄) is an involution in even degree", real_structure_involution),
    suite!("casimir", "Casimir spectrum of Λ^k is the admissible weight set", casimir),
    suite!("clebsch-gordan", "weights on Λ² are exactly {0, 2}", clebsch_gordan),
    suite!("plus-rank", "rank of Π₊ on Λ^{p,q} is C(2n, p+q)", plus_rank_suite),
    suite!("rproj-rmap", "rproj ∘ rmap = id", rproj_rmap),
    suite!("rproj-kernel", "rproj kills the lower-weight part", rproj_kernel),
    suite!("rmap-conjugation", "rmap(p,q,Jη̄) = (−1)^p conj rmap(q,p,η)", rmap_conjugation),
    suite!("rmap-multiplicativity", "rmap_eval of a wedge is the bidegree convolution", rmap_multiplicativity),
    suite!("nilpotency", "∂², ∂̄², ∂_J², {∂,∂̄}, {∂,∂_J} vanish", nilpotency),
    suite!("intertwining", "rmap(∂η) = d⁺¹⁰ rmap(η), rmap(∂_J η) = d⁺⁰¹ rmap(η)", intertwining),
    suite!("rproj-intertwining", "rproj(∂α) = ∂ rproj(α), rproj(∂̄α) = ∂_J rproj(α)", rproj_intertwining),
    suite!("hkt-closed", "∂∂_J φ is ∂- and ∂_J-closed and real", hkt_closed),
    suite!("bridge-roundtrip", "metric ↦ form ↦ metric is the identity", bridge_roundtrip),
    suite!("eigenvalue-pairing", "(1,1)-side eigenvalues pair up and match the quaternionic ones", eigenvalue_pairing),
    suite!("strict-positivity", "metric positive definite ⇔ quaternionic eigenvalues positive", strict_positivity),
    suite!("gram-schmidt-flag", "Gram–Schmidt keeps quaternionic spans", gram_schmidt_flag),
    suite!("vmap-two-path", "vmap agrees with the pairing definition", vmap_two_path),
    suite!("vmap-reality", "(−i)^{n−p} vmap(p,p,η) is real; positive η give positive images", vmap_reality),
    suite!("vmap-conjugation", "vmap(p,q,Jη̄) = (−1)^{n+p} conj vmap(q,p,η)", vmap_conjugation),
    suite!("vmap-intertwining", "vmap(∂η) = ∂ vmap(η), vmap(∂_J η) = ∂̄ vmap(η)", vmap_intertwining),
    suite!("lambda-two-path", "λ equals the Ξ-path value and is positive, n ≤ 3", lambda_two_path),
    suite!("q-star-kernel", "Q*(Ξ) = 0 and ker Q* ∩ A^{n,n} is a line, n ≤ 3", q_star_kernel),
    suite!("positivity-correspondence", "η(x,Jx̄,…) = C(2p,p)(−i)^p (i^p rmap η)(x,x̄,…)", positivity_correspondence),
    suite!("positivity-verdicts", "exact, sampled and (p,p)-side verdicts agree for n = 2, p = 1", positivity_verdicts),
    suite!("cone-monotonicity", "strong ⇒ not weakly negative; scaling and sums preserve cones", cone_monotonicity),
    suite!("basis-independence", "eigenvalue criteria are invariant under Sp(n) frame changes", basis_independence),
    suite!("eigenvalue-criterion", "q-sum criterion agrees with sampled positivity of η∧ω^{q−1}, n = 2", eigenvalue_criterion),
    suite!("positivity-transfer", "ω^{2n−2p}-positive ρ never has a non-Ω^{n−p}-positive image", positivity_transfer),
    suite!("experiment-sanity", "experiment forms are real, positive and ∂-closed", experiment_sanity),
    suite!("experiment-determinism", "identical seeds give identical reports", experiment_determinism),
];

pub fn suites() -> &'static [Suite] {
    SUITES
}

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.name)
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutcome, SuiteError> {
    let suite = SUITES.iter().find(|s| s.name == name).ok_or_else(|| SuiteError::Unknown(name.into()))?;
    Ok(suite.run(cfg))
}

impl Suite {
    pub fn run(&self, cfg: &SuiteConfig) -> SuiteOutcome {
        let mut t = Tally { checks: 0, failures: Vec::new() };
        (self.run)(cfg, &mut t);
        SuiteOutcome { name: self.name, checks: t.checks, failures: t.failures }
    }
}

fn sp(n: usize) -> ModelSpace {
    ModelSpace::new(n).expect("small n")
}

fn stream(cfg: &SuiteConfig, name: &str, n: usize) -> ChaCha8Rng {
    let h = name.bytes().fold(0u64, |a, b| a.wrapping_mul(131).wrapping_add(b as u64));
    rng(cfg.seed, h.wrapping_add(n as u64))
}

/// A random form of degree `k` with every bidegree present.
fn mixed_form(s: ModelSpace, k: usize, r: &mut ChaCha8Rng) -> Form {
    let m = s.complex_dim();
    let mut out = Form::zero(s, k);
    for p in k.saturating_sub(m)..=k.min(m) {
        out = &out + &random_form(s, p, k - p, 0.3, r);
    }
    out
}

fn random_degree(s: ModelSpace, max: usize, r: &mut ChaCha8Rng) -> usize {
    r.gen_range(0..=max.min(2 * s.complex_dim()))
}

fn wedge_associativity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "assoc", n);
        for _ in 0..cfg.trials {
            let top = 2 * s.complex_dim();
            let ka = random_degree(s, top, &mut r);
            let kb = random_degree(s, top - ka, &mut r);
            let kc = random_degree(s, top - ka - kb, &mut r);
            let (a, b, c) = (mixed_form(s, ka, &mut r), mixed_form(s, kb, &mut r), mixed_form(s, kc, &mut r));
            t.check(&(&a ^ &b) ^ &c == &a ^ &(&b ^ &c), || format!("n={n} degrees {ka},{kb},{kc}"));
        }
    }
}

fn graded_commutativity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "graded", n);
        for _ in 0..cfg.trials {
            let ka = random_degree(s, 2 * s.complex_dim(), &mut r);
            let kb = random_degree(s, 2 * s.complex_dim() - ka, &mut r);
            let (a, b) = (mixed_form(s, ka, &mut r), mixed_form(s, kb, &mut r));
            let ba = &b ^ &a;
            let want = if ka * kb % 2 == 1 { -ba } else { ba };
            t.check(&a ^ &b == want, || format!("n={n} degrees {ka},{kb}"));
        }
    }
}

fn conjugation(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "conj", n);
        for _ in 0..cfg.trials {
            let k = random_degree(s, 2 * s.complex_dim(), &mut r);
            let a = mixed_form(s, k, &mut r);
            let c = small_crational(&mut r, 3);
            t.check(a.scale(&c).conjugate() == a.conjugate().scale(&Coeff::conj(&c)), || format!("n={n} anti-linearity"));
            t.check(a.conjugate().conjugate() == a, || format!("n={n} involution"));
        }
    }
}

fn bidegree_additivity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "bideg", n);
        for _ in 0..cfg.trials {
            let ka = random_degree(s, 4, &mut r);
            let kb = random_degree(s, 4, &mut r);
            let (a, b) = (mixed_form(s, ka, &mut r), mixed_form(s, kb, &mut r));
            let w = &a ^ &b;
            let (da, db) = (a.bidegree_decompose(), b.bidegree_decompose());
            for ((p, q), part) in w.bidegree_decompose() {
                let mut sum = Form::zero(s, ka + kb);
                for ((p1, q1), x) in &da {
                    for ((p2, q2), y) in &db {
                        if p1 + p2 == p && q1 + q2 == q {
                            sum = &sum + &(x ^ y);
                        }
                    }
                }
                t.check(sum == part, || format!("n={n} bidegree ({p},{q})"));
            }
        }
    }
}

fn pairing(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "pairing", n);
        for _ in 0..cfg.trials {
            let k = random_degree(s, 2 * s.complex_dim(), &mut r);
            let (a, b) = (mixed_form(s, k, &mut r), mixed_form(s, k, &mut r));
            let (ab, ba, aa) = (a.euclid_pairing(&b).unwrap(), b.euclid_pairing(&a).unwrap(), a.euclid_pairing(&a).unwrap());
            t.check(ab == Coeff::conj(&ba), || format!("n={n} Hermitian symmetry"));
            t.check(aa.im.is_zero() && (aa.re.is_positive() || a.is_zero()), || format!("n={n} positivity"));
        }
    }
}

fn real_structure_involution(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "realstr", n);
        for _ in 0..cfg.trials {
            let k = 2 * r.gen_range(0..=s.complex_dim());
            let a = mixed_form(s, k, &mut r);
            let ok = real_structure(&a).and_then(|b| real_structure(&b)).map(|c| c == a);
            t.check(ok == Ok(true), || format!("n={n} degree {k}"));
        }
        let odd = Form::<CRational>::dz(s, 1);
        t.check(real_structure(&odd).is_err(), || "odd degree accepted".into());
    }
}

fn casimir(_: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        for k in 0..=2 * s.complex_dim() {
            match casimir_spectrum(&s, k) {
                Ok(spectrum) => {
                    let got: Vec<usize> = spectrum.keys().copied().collect();
                    let want = admissible_weights(&s, k);
                    t.check(got == want, || format!("n={n} k={k}: weights {got:?}, admissible {want:?}"));
                }
                Err(e) => t.check(false, || format!("n={n} k={k}: {e}")),
            }
        }
    }
}

fn clebsch_gordan(_: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let got: Option<Vec<usize>> = casimir_spectrum(&s, 2).ok().map(|m| m.keys().copied().collect());
        t.check(got == Some(vec![0, 2]), || format!("n={n}: {got:?}"));
    }
}

fn plus_rank_suite(_: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let m = s.complex_dim();
        for k in 0..=m {
            for p in 0..=k {
                let got = plus_rank(&s, p, k - p).ok();
                let want = crate::scalar::binomial_u64(m, k) as usize;
                t.check(got == Some(want), || format!("n={n} ({p},{}): rank {got:?}, want {want}", k - p));
            }
        }
    }
}

fn rproj_rmap(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "rproj-rmap", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(0..=s.complex_dim());
            let q = r.gen_range(0..=k);
            let eta = random_form(s, k, 0, 0.5, &mut r);
            let ok = rmap(k - q, q, &eta).and_then(|x| rproj(&x)).map(|y| y == eta);
            t.check(ok == Ok(true), || format!("n={n} ({},{q})", k - q));
        }
    }
}

fn rproj_kernel(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "rproj-kernel", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(1..=s.complex_dim());
            let p = r.gen_range(0..=k);
            let a = random_form(s, p, k - p, 0.4, &mut r);
            let Some(top) = t.result(plus_project(&a), "plus_project") else { continue };
            let low = &a - &top;
            t.check(rproj(&low).map(|x| x.is_zero()) == Ok(true), || format!("n={n} ({p},{})", k - p));
        }
    }
}

fn rmap_conjugation(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "rmap-conj", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(0..=s.complex_dim());
            let q = r.gen_range(0..=k);
            let p = k - q;
            let eta = random_form(s, k, 0, 0.5, &mut r);
            let lhs = rmap(p, q, &apply_operator(QuatOperator::J, &eta.conjugate()));
            let sign = if p % 2 == 0 { cint(1, 0) } else { cint(-1, 0) };
            let rhs = rmap(q, p, &eta).map(|x| x.conjugate().scale(&sign));
            t.check(lhs == rhs, || format!("n={n} ({p},{q})"));
        }
    }
}

fn rmap_multiplicativity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "rmap-mult", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(0..=s.complex_dim());
            let ka = r.gen_range(0..=k);
            let q = r.gen_range(0..=k);
            let a = random_form(s, ka, 0, 0.5, &mut r);
            let b = random_form(s, k - ka, 0, 0.5, &mut r);
            let lhs = rmap_eval(k - q, q, &(&a ^ &b));
            let rhs = rmap_eval_convolution(k - q, q, &a, &b);
            t.check(lhs == rhs, || format!("n={n} degrees {ka},{} q={q}", k - ka));
        }
    }
}

fn nilpotency(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "nilpotency", n);
        let m = s.complex_dim();
        for _ in 0..cfg.trials {
            let p = r.gen_range(0..=m);
            let q = r.gen_range(0..=m.min(3));
            let a = random_poly_form(s, p, q, &mut r);
            let ctx = || format!("n={n} ({p},{q})");
            t.check(del(&del(&a)).is_zero(), || format!("∂² {}", ctx()));
            t.check(delbar(&delbar(&a)).is_zero(), || format!("∂̄² {}", ctx()));
            t.check(del_j(&del_j(&a)).is_zero(), || format!("∂_J² {}", ctx()));
            t.check((&del(&delbar(&a)) + &delbar(&del(&a))).is_zero(), || format!("{{∂,∂̄}} {}", ctx()));
            t.check((&del(&del_j(&a)) + &del_j(&del(&a))).is_zero(), || format!("{{∂,∂_J}} {}", ctx()));
        }
    }
}

fn intertwining(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "intertwining", n);
        for _ in 0..cfg.trials {
            // η of degree k − 1, images of bidegree (p, q) with p + q = k ≤ 2n
            let k = r.gen_range(1..=s.complex_dim());
            let q = r.gen_range(0..k);
            let p = k - q;
            let eta: PolyForm = random_poly_form(s, k - 1, 0, &mut r);
            if p >= 1 {
                let lhs = rmap(p, q, &del(&eta));
                let rhs = rmap(p - 1, q, &eta).and_then(|x| d_plus_components(&x)).map(|(d10, _)| d10);
                t.check(lhs == rhs, || format!("n={n} ∂ into ({p},{q})"));
            }
            let (p2, q2) = (k - 1 - q, q + 1);
            let lhs = rmap(p2, q2, &del_j(&eta));
            let rhs = rmap(p2, q2 - 1, &eta).and_then(|x| d_plus_components(&x)).map(|(_, d01)| d01);
            t.check(lhs == rhs, || format!("n={n} ∂_J into ({p2},{q2})"));
        }
    }
}

fn rproj_intertwining(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "rproj-intertwining", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(0..s.complex_dim());
            let p = r.gen_range(0..=k);
            let a = random_poly_form(s, p, k - p, &mut r);
            let lhs = rproj(&del(&a));
            let rhs = rproj(&a).map(|x| del(&x));
            t.check(lhs == rhs, || format!("n={n} ∂ on ({p},{})", k - p));
            let lhs = rproj(&delbar(&a));
            let rhs = rproj(&a).map(|x| del_j(&x));
            t.check(lhs == rhs, || format!("n={n} ∂̄ on ({p},{})", k - p));
        }
    }
}

fn real_poly(s: &ModelSpace, r: &mut ChaCha8Rng) -> Poly {
    let p = random_poly(s, 4, 4, r);
    let half = Poly::constant(CRational::new(rat(1, 2), int(0)));
    half * (p.clone() + Coeff::conj(&p))
}

fn hkt_closed(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "hkt", n);
        for _ in 0..cfg.trials {
            let phi = real_poly(&s, &mut r);
            let Some(eta) = t.result(hkt_from_potential(s, &phi), "potential") else { continue };
            t.check(del(&eta).is_zero(), || format!("n={n} ∂η ≠ 0 for φ = {phi}"));
            t.check(del_j(&eta).is_zero(), || format!("n={n} ∂_J η ≠ 0"));
            t.check(is_real(&eta), || format!("n={n} η not real"));
        }
    }
}

fn random_metric(s: ModelSpace, r: &mut ChaCha8Rng) -> QHermForm<Rational> {
    let d = 2 * s.complex_dim();
    let mut a = Mat::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = int(r.gen_range(-3..=3));
            a[(i, j)] = v.clone();
            a[(j, i)] = v;
        }
    }
    QHermForm::average::<CRational>(s, &a)
}

fn bridge_roundtrip(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "bridge", n);
        for _ in 0..cfg.trials {
            let g = random_metric(s, &mut r);
            let eta: Form = form_from_metric::<CRational>(&g);
            t.check(metric_from_form(&eta).ok().as_ref() == Some(&g), || format!("n={n} metric → form → metric"));
            let eta2 = random_real_form(s, 2, &mut r);
            let back = metric_from_form(&eta2).map(|h| form_from_metric::<CRational>(&h));
            t.check(back.as_ref() == Ok(&eta2), || format!("n={n} form → metric → form"));
        }
    }
}

fn eigenvalue_pairing(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let flat = QHermForm::<f64>::flat(s);
        let mut r = stream(cfg, "pairing-eig", n);
        for _ in 0..cfg.trials {
            let eta = random_real_form(s, 2, &mut r).map_coeffs(<Complex64 as Coeff>::from_crational);
            let (Ok(side), Ok(quat)) = (induced_hermitian_eigenvalues(&eta, &flat), quaternionic_eigenvalues(&eta, &flat)) else {
                t.check(false, || format!("n={n} eigenvalue computation failed"));
                continue;
            };
            let tol = 1e-8 * side.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let paired = side.values.chunks(2).all(|c| (c[0] - c[1]).abs() < tol);
            let matches = side.values.chunks(2).zip(&quat.values).all(|(c, q)| (c[0] - q).abs() < tol);
            t.check(paired && matches, || format!("n={n} {:?} vs {:?}", side.values, quat.values));
        }
    }
}

fn strict_positivity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let flat = QHermForm::<Rational>::flat(s);
        let mut r = stream(cfg, "strict", n);
        for i in 0..cfg.trials {
            // alternate random forms with sums of squares, which are often definite
            let eta = if i % 2 == 0 {
                random_real_form(s, 2, &mut r)
            } else {
                (0..s.complex_dim()).fold(Form::zero(s, 2), |acc, _| &acc + &generator_square(&random_form(s, 1, 0, 0.8, &mut r)))
            };
            let Some(g) = t.result(metric_from_form(&eta), "metric") else { continue };
            let pd = <CRational as crate::bridge::BridgeScalar>::positive_definite(g.matrix());
            let Some(q) = t.result(quaternionic_eigenvalues(&eta, &flat), "eigenvalues") else { continue };
            let all_pos = q.values.iter().all(|v| *v > 1e-12);
            t.check(pd == all_pos, || format!("n={n} definite {pd}, eigenvalues {:?}", q.values));
        }
    }
}

/// Complex rank of `x_1, J x̄_1, …`.
fn quaternionic_rank(s: &ModelSpace, xs: &[Vec<CRational>]) -> usize {
    let rows: Vec<Vec<CRational>> = xs.iter().flat_map(|x| [x.clone(), j_conjugate(s, x)]).collect();
    Mat::from_rows(rows).rank()
}

fn gram_schmidt_flag(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let omega: Form = canonical_omega(s);
        let mut r = stream(cfg, "gs", n);
        for _ in 0..cfg.trials {
            let xs: Vec<Vec<CRational>> =
                (0..n).map(|_| (0..s.complex_dim()).map(|_| small_crational(&mut r, 2)).collect()).collect();
            if quaternionic_rank(&s, &xs) < 2 * n {
                continue;
            }
            let Some(ys) = t.result(quaternionic_gram_schmidt(&omega, &xs), "gram-schmidt") else { continue };
            for i in 1..=n {
                let (a, b) = (&xs[..i], &ys[..i]);
                let joint: Vec<Vec<CRational>> = a.iter().chain(b).cloned().collect();
                let ra = quaternionic_rank(&s, a);
                t.check(ra == quaternionic_rank(&s, b) && ra == quaternionic_rank(&s, &joint), || format!("n={n} flag {i}"));
            }
        }
    }
}

fn vmap_two_path(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "vmap-two-path", n);
        for _ in 0..cfg.trials {
            let k = r.gen_range(0..=s.complex_dim());
            let q = r.gen_range(0..=k.min(n).min(k));
            let p = k - q;
            if p > n || q > n {
                continue;
            }
            let eta = random_form(s, k, 0, 0.5, &mut r);
            t.check(vmap(p, q, &eta) == vmap_via_pairing(p, q, &eta), || format!("n={n} ({p},{q})"));
        }
    }
}

fn vmap_reality(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "vmap-reality", n);
        for _ in 0..cfg.trials {
            let p = r.gen_range(0..=n);
            let eta = random_real_form(s, 2 * p, &mut r);
            let v = vmap(p, p, &eta).map(|x| x.scale(&vmap_reality_factor::<CRational>(n, p)));
            t.check(v.as_ref().map(|x| x.conjugate() == *x) == Ok(true), || format!("n={n} p={p}"));
        }
        // positive inputs: products of squares
        for _ in 0..cfg.trials / 4 + 1 {
            let p = r.gen_range(0..=n);
            let eta = (0..p).fold(Form::one(s), |acc, _| &acc ^ &generator_square(&random_form(s, 1, 0, 0.8, &mut r)));
            let Some(v) = t.result(vmap(p, p, &eta), "vmap") else { continue };
            let v = v.scale(&vmap_reality_factor::<CRational>(n, p));
            let k = v.degree() / 2;
            let xs: Vec<Vec<CRational>> = (0..k).map(|_| (0..s.complex_dim()).map(|_| small_crational(&mut r, 2)).collect()).collect();
            let val = classical_evaluation(&v, &xs) * CRational::i_pow((3 * k % 4) as u8);
            t.check(val.im.is_zero() && !val.re.is_negative(), || format!("n={n} p={p}: image value {val}"));
        }
    }
}

fn vmap_conjugation(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "vmap-conj", n);
        for _ in 0..cfg.trials {
            let p = r.gen_range(0..=n);
            let q = r.gen_range(0..=n);
            let eta = random_form(s, p + q, 0, 0.5, &mut r);
            let lhs = vmap(p, q, &apply_operator(QuatOperator::J, &eta.conjugate()));
            let sign = cint(vmap_conjugation_sign(n, p) as i64, 0);
            let rhs = vmap(q, p, &eta).map(|x| x.conjugate().scale(&sign));
            t.check(lhs == rhs, || format!("n={n} ({p},{q})"));
        }
    }
}

fn vmap_intertwining(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "vmap-intertwining", n);
        for _ in 0..cfg.trials {
            let (p, q) = (r.gen_range(1..=n), r.gen_range(0..=n));
            let eta: PolyForm = random_poly_form(s, p + q - 1, 0, &mut r);
            let lhs = vmap(p, q, &del(&eta));
            let rhs = vmap(p - 1, q, &eta).map(|x| del(&x));
            t.check(lhs == rhs, || format!("n={n} ∂ into ({p},{q})"));

            let (p, q) = (r.gen_range(0..=n), r.gen_range(1..=n));
            let eta: PolyForm = random_poly_form(s, p + q - 1, 0, &mut r);
            let lhs = vmap(p, q, &del_j(&eta));
            let rhs = vmap(p, q - 1, &eta).map(|x| delbar(&x));
            t.check(lhs == rhs, || format!("n={n} ∂_J into ({p},{q})"));
        }
    }
}

fn lambda_two_path(_: &SuiteConfig, t: &mut Tally) {
    for n in 1..=3 {
        let Some(d) = t.result(canonical_data(n), "canonical data") else { continue };
        t.check(d.lambda == d.lambda_xi_path, || format!("n={n}: {} vs {}", d.lambda, d.lambda_xi_path));
        t.check(d.lambda.is_positive(), || format!("n={n}: λ = {} not positive", d.lambda));
    }
}

fn q_star_kernel(_: &SuiteConfig, t: &mut Tally) {
    for n in 1..=3 {
        let Some(d) = t.result(canonical_data(n), "canonical data") else { continue };
        t.check(d.q_star_kernel_dim == 1, || format!("n={n}: kernel dimension {}", d.q_star_kernel_dim));
        t.check(crate::vmap::q_star(&d.xi).is_zero(), || format!("n={n}: Q*(Ξ) ≠ 0"));
    }
}

fn positivity_correspondence(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let mut r = stream(cfg, "correspondence", n);
        for _ in 0..cfg.trials {
            let p = r.gen_range(1..=n);
            let eta = random_real_form(s, 2 * p, &mut r);
            let Some(rho) = t.result(rmap(p, p, &eta), "rmap") else { continue };
            let rho = rho.scale_i((p % 4) as u8);
            let xs: Vec<Vec<CRational>> = (0..p).map(|_| (0..s.complex_dim()).map(|_| small_crational(&mut r, 2)).collect()).collect();
            let lhs = quaternionic_evaluation(&eta, &xs);
            let rhs = classical_evaluation(&rho, &xs) * CRational::i_pow((3 * p % 4) as u8) * CRational::from(binomial(2 * p, p));
            t.check(lhs == rhs, || format!("n={n} p={p}: {lhs} vs {rhs}"));
        }
    }
}

/// A real (2,0)-form with quaternionic eigenvalues drawn around zero.
fn controlled_two_form(s: ModelSpace, r: &mut ChaCha8Rng) -> Form {
    match r.gen_range(0..3) {
        0 => random_real_form(s, 2, r),
        1 => (0..s.complex_dim()).fold(Form::zero(s, 2), |acc, _| &acc + &generator_square(&random_form(s, 1, 0, 0.8, r))),
        _ => {
            let pos = (0..s.complex_dim()).fold(Form::zero(s, 2), |acc, _| &acc + &generator_square(&random_form(s, 1, 0, 0.8, r)));
            &pos - &generator_square(&random_form(s, 1, 0, 0.8, r))
        }
    }
}

fn positivity_verdicts(cfg: &SuiteConfig, t: &mut Tally) {
    let s = sp(2);
    let mut r = stream(cfg, "verdicts", 2);
    for i in 0..cfg.trials {
        let eta = controlled_two_form(s, &mut r);
        let Some(exact) = t.result(weakly_positive_2p0(&eta, Strategy::Exact), "exact verdict") else { continue };
        let sampled = sample_2p0(&eta.map_coeffs(<Complex64 as Coeff>::from_crational), cfg.samples, cfg.seed.wrapping_add(i as u64));
        let agree = match exact.kind {
            VerdictKind::PositiveCertified => sampled.kind != VerdictKind::NegativeCertified,
            VerdictKind::NegativeCertified => sampled.kind == VerdictKind::NegativeCertified,
            VerdictKind::Unknown => false,
        };
        t.check(agree, || format!("trial {i}: exact {:?}, sampled {:?}", exact.kind, sampled.kind));
        let Some(rho) = t.result(rmap(1, 1, &eta), "rmap") else { continue };
        let pp = weak_positive_pp(&rho.scale_i(1), Strategy::Exact).map(|v| v.kind);
        t.check(pp == Ok(exact.kind), || format!("trial {i}: (2,0) {:?}, (1,1) {pp:?}", exact.kind));
        if let Some(w) = &exact.witness {
            t.check(w.exact_value.as_ref().is_some_and(|v| v.is_negative()), || format!("trial {i}: witness not negative"));
        }
    }
}

fn cone_monotonicity(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 2..=3 {
        let s = sp(n);
        let mut r = stream(cfg, "cones", n);
        for _ in 0..(cfg.trials / 8).max(1) {
            let sq = |r: &mut ChaCha8Rng| generator_square(&random_form(s, 1, 0, 0.8, r));
            let a = &sq(&mut r) ^ &sq(&mut r);
            let b = &sq(&mut r) ^ &sq(&mut r);
            let seed = r.gen();
            let va = strongly_positive_with(&a, &[a.clone(), b.clone()], seed);
            let Some(va) = t.result(va, "strong") else { continue };
            t.check(va.kind == VerdictKind::PositiveCertified, || format!("n={n} generator product not certified"));
            let weak = weakly_positive_2p0(&a, Strategy::Descent { samples: cfg.samples, seed });
            t.check(weak.map(|v| v.kind != VerdictKind::NegativeCertified) == Ok(true), || format!("n={n} strong but weakly negative"));
            let sum = &a + &b;
            let vs = strongly_positive_with(&sum, &[a.clone(), b.clone()], seed).map(|v| v.kind);
            t.check(vs == Ok(VerdictKind::PositiveCertified), || format!("n={n} sum not certified"));
        }
        for _ in 0..cfg.trials {
            let eta = controlled_two_form(s, &mut r);
            let c = CRational::new(int(r.gen_range(1..=5)), int(0)) / CRational::new(int(r.gen_range(1..=5)), int(0));
            let a = weakly_positive_2p0(&eta, Strategy::Exact).map(|v| v.kind);
            let b = weakly_positive_2p0(&eta.scale(&c), Strategy::Exact).map(|v| v.kind);
            t.check(a == b, || format!("n={n} scaling changed {a:?} to {b:?}"));
        }
    }
}

/// A rational orthogonal matrix commuting with `I, J, K`: the Cayley
/// transform of an averaged skew matrix.
fn random_symplectic(s: ModelSpace, r: &mut ChaCha8Rng) -> Mat<Rational> {
    let d = 2 * s.complex_dim();
    let mut a = Mat::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = rat(r.gen_range(-3..=3), 4);
            a[(i, j)] = v.clone();
            a[(j, i)] = -v;
        }
    }
    let a = QHermForm::average::<CRational>(s, &a).matrix().clone();
    let id = Mat::<Rational>::identity(d);
    let minus = Mat::from_fn(d, d, |i, j| id[(i, j)].clone() - a[(i, j)].clone());
    let plus = Mat::from_fn(d, d, |i, j| id[(i, j)].clone() + a[(i, j)].clone());
    minus.mul(&plus.inverse().expect("I + A is invertible for skew A"))
}

fn pull_back(f: &Form<Complex64>, l: &Mat<f64>) -> Form<Complex64> {
    let m = two_form_matrix(f);
    let lc = Mat::from_fn(l.rows, l.cols, |i, j| Complex64::new(l[(i, j)], 0.0));
    let g = two_form_from_matrix(f.space(), &lc.transpose().mul(&m).mul(&lc));
    // rounding leaves tiny terms in other bidegrees
    let want = f.bidegree_decompose().into_keys().next().unwrap_or((1, 1));
    g.bidegree_decompose().remove(&want).unwrap_or_else(|| Form::zero(f.space(), 2))
}

fn basis_independence(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let m = s.complex_dim();
        let flat = QHermForm::<f64>::flat(s);
        let mut r = stream(cfg, "basis", n);
        for _ in 0..cfg.trials {
            let lr = random_symplectic(s, &mut r);
            let l = Mat::from_fn(lr.rows, lr.cols, |i, j| crate::scalar::rational_to_f64(&lr[(i, j)]));
            let eta = controlled_two_form(s, &mut r).map_coeffs(<Complex64 as Coeff>::from_crational);
            let eta2 = pull_back(&eta, &l);
            for q in 1..=n {
                let (a, b) = (big_omega_q_positive(&eta, q), big_omega_q_positive(&eta2, q));
                t.check(a.is_ok() && a == b, || format!("n={n} Ω^{q}: {a:?} vs {b:?}"));
            }
            let spectrum: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..2.0)).collect();
            let rho = hermitian_form_with_spectrum(s, &spectrum, &random_unitary(&mut r, m));
            let rho2 = pull_back(&rho, &l);
            let (ea, eb) = (hermitian_eigenvalues(&rho, &flat), hermitian_eigenvalues(&rho2, &flat));
            if let (Ok(ea), Ok(eb)) = (&ea, &eb) {
                let same = ea.values.iter().zip(&eb.values).all(|(x, y)| (x - y).abs() < 1e-9);
                t.check(same, || format!("n={n} spectra {:?} vs {:?}", ea.values, eb.values));
            } else {
                t.check(false, || format!("n={n} eigenvalues failed"));
            }
            for q in 1..=m {
                let (a, b) = (omega_q_positive(&rho, q, &flat), omega_q_positive(&rho2, q, &flat));
                t.check(a.is_ok() && a == b, || format!("n={n} ω^{q}: {a:?} vs {b:?}"));
            }
        }
    }
}

/// Eigenvalues whose `q`-sums stay at least `margin` away from zero.
fn controlled_spectrum(m: usize, r: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| (r.gen_range(-2.0f64..3.0) * 4.0).round() / 4.0).collect();
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        let clear = sorted.iter().all(|x| {
            acc += x;
            acc.abs() >= margin
        });
        if clear {
            return v;
        }
    }
}

fn eigenvalue_criterion(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let m = s.complex_dim();
        let flat = QHermForm::<f64>::flat(s);
        let omega_i = omega(QuatOperator::I, s).map_coeffs(<Complex64 as Coeff>::from_crational);
        let mut r = stream(cfg, "criterion", n);
        for i in 0..cfg.trials {
            let spectrum = controlled_spectrum(m, &mut r, 0.25);
            let rho = hermitian_form_with_spectrum(s, &spectrum, &random_unitary(&mut r, m));
            for q in 1..=m.min(3) {
                let Some(criterion) = t.result(omega_q_positive(&rho, q, &flat), "criterion") else { continue };
                let prod = &rho ^ &omega_i.wedge_pow(q - 1);
                let sampled = sample_pp(&prod, cfg.samples, cfg.seed.wrapping_add((i * 4 + q) as u64));
                let agree = criterion == (sampled.kind != VerdictKind::NegativeCertified);
                t.check(agree, || format!("n={n} q={q} spectrum {spectrum:?}: criterion {criterion}, sampled {:?}", sampled.kind));
            }
        }
    }
}

fn positivity_transfer(cfg: &SuiteConfig, t: &mut Tally) {
    for n in 1..=2 {
        let s = sp(n);
        let m = s.complex_dim();
        let mut r = stream(cfg, "transfer", n);
        for _ in 0..cfg.trials {
            let spectrum = controlled_spectrum(m, &mut r, 0.0);
            let rho = hermitian_form_with_spectrum(s, &spectrum, &random_unitary(&mut r, m));
            for p in 0..n {
                let Some(rep) = t.result(positivity_transfer_check(&rho, p), "transfer") else { continue };
                t.check(rep.status != TransferStatus::Violated, || format!("n={n} p={p} spectrum {spectrum:?}"));
            }
        }
    }
}

fn experiment_sanity(cfg: &SuiteConfig, t: &mut Tally) {
    for fam in [SingularFamily::point(2, 1.0), SingularFamily::smooth(2), SingularFamily::coordinate_pole(2, 1.0)] {
        let Some(fam) = t.result(fam, "family") else { continue };
        let ok = sanity_check(&fam, 16, cfg.seed);
        t.check(ok.is_ok(), || format!("{}: {ok:?}", fam.label()));
    }
}

fn experiment_determinism(cfg: &SuiteConfig, t: &mut Tally) {
    let Some(fam) = t.result(SingularFamily::point(2, 1.0), "family") else { return };
    let grid = QuadratureGrid::dyadic(4, MIN_SAMPLES.max(cfg.samples), cfg.seed);
    let a = sibony_experiment(&fam, &grid).map(|r| r.render());
    let b = sibony_experiment(&fam, &grid).map(|r| r.render());
    t.check(a.is_ok() && a == b, || "reports differ".into());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_at_small_size() {
        let cfg = SuiteConfig { trials: 6, seed: 1, samples: 256 };
        for s in suites() {
            let out = s.run(&cfg);
            assert!(out.passed(), "{out}");
            assert!(out.checks > 0, "{} ran no checks", s.name);
        }
    }

    #[test]
    fn unknown_suite() {
        assert_eq!(run_suite("nope", &SuiteConfig::default()), Err(SuiteError::Unknown("nope".into())));
        assert_eq!(suite_names().count(), suites().len());
    }
}
