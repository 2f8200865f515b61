use proptest::prelude::*;
use proptest::sample::subsequence;

use quatforms::bridge::{form_from_metric, metric_from_form};
use quatforms::calculus::{d, del, del_j, delbar};
use quatforms::format::{form_to_record, parse_forms};
use quatforms::form::Form;
use quatforms::positivity::{generator_square, weakly_positive_2p0, Strategy as Search, VerdictKind};
use quatforms::quaternion::{apply_operator, real_structure, QuatOperator};
use quatforms::random::{random_form, random_poly_form, random_real_form, rng};
use quatforms::rmap::{rmap, rproj};
use quatforms::scalar::{int, CRational};
use quatforms::space::{Generator, ModelSpace};
use quatforms::su2::{plus_project, weight_decompose};

fn coeff() -> impl Strategy<Value = CRational> {
    (-4i64..=4, -4i64..=4).prop_map(|(a, b)| CRational::new(int(a), int(b)))
}

/// A form of the given degree on `n`, with up to five terms.
fn form_on(n: usize, degree: usize) -> impl Strategy<Value = Form> {
    let gens: Vec<u8> = (0..4 * n as u8).collect();
    prop::collection::vec((subsequence(gens, degree), coeff()), 0..5).prop_map(move |terms| {
        let s = ModelSpace::new(n).unwrap();
        terms.into_iter().fold(Form::zero(s, degree), |acc, (g, c)| {
            let g: Vec<Generator> = g.into_iter().map(Generator).collect();
            &acc + &Form::term(s, &g, c)
        })
    })
}

fn form() -> impl Strategy<Value = Form> {
    (1usize..=2).prop_flat_map(|n| (0..=4 * n).prop_flat_map(move |k| form_on(n, k)))
}

/// Three forms on one space.
fn triple() -> impl Strategy<Value = (Form, Form, Form)> {
    (1usize..=2, 0usize..=3, 0usize..=3, 0usize..=2).prop_flat_map(|(n, a, b, c)| {
        (form_on(n, a), form_on(n, b), form_on(n, c))
    })
}

fn sign_power(k: usize) -> CRational {
    CRational::new(int(if k.is_multiple_of(2) { 1 } else { -1 }), int(0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_associative((a, b, c) in triple()) {
        prop_assert_eq!(&(&a ^ &b) ^ &c, &a ^ &(&b ^ &c));
    }

    #[test]
    fn wedge_is_graded_commutative((a, b, _) in triple()) {
        prop_assert_eq!(&a ^ &b, (&b ^ &a).scale(&sign_power(a.degree() * b.degree())));
    }

    #[test]
    fn conjugation_is_an_antilinear_involution(a in form(), c in coeff()) {
        prop_assert_eq!(a.conjugate().conjugate(), a.clone());
        prop_assert_eq!(a.scale(&c).conjugate(), a.conjugate().scale(&CRational::new(c.re.clone(), -c.im.clone())));
    }

    #[test]
    fn pairing_is_hermitian_and_positive(a in form(), c in coeff()) {
        let b = a.scale(&c).conjugate().conjugate();
        let ab = a.euclid_pairing(&b).unwrap();
        let ba = b.euclid_pairing(&a).unwrap();
        prop_assert_eq!(ab.clone(), CRational::new(ba.re.clone(), -ba.im.clone()));
        let aa = a.euclid_pairing(&a).unwrap();
        prop_assert!(aa.im == int(0));
        prop_assert!(a.is_zero() || aa.re > int(0));
    }

    #[test]
    fn bidegrees_add_under_wedge((a, b, _) in triple()) {
        let w = &a ^ &b;
        for ((p, q), x) in a.bidegree_decompose() {
            for ((r, s), y) in b.bidegree_decompose() {
                let prod = &x ^ &y;
                prop_assert!(prod.is_zero() || prod.pure_bidegree() == Some((p + r, q + s)));
            }
        }
        let parts = w.bidegree_decompose().into_values().fold(Form::zero(w.space(), w.degree()), |acc, x| &acc + &x);
        prop_assert_eq!(parts, w);
    }

    #[test]
    fn operators_square_to_the_degree_sign(a in form()) {
        let sign = sign_power(a.degree());
        for op in [QuatOperator::I, QuatOperator::J, QuatOperator::K] {
            prop_assert_eq!(apply_operator(op, &apply_operator(op, &a)), a.scale(&sign));
        }
        let ij = apply_operator(QuatOperator::I, &apply_operator(QuatOperator::J, &a));
        prop_assert_eq!(apply_operator(QuatOperator::K, &a), ij);
    }

    #[test]
    fn operators_are_algebra_automorphisms((a, b, _) in triple()) {
        for op in [QuatOperator::I, QuatOperator::J, QuatOperator::K] {
            prop_assert_eq!(apply_operator(op, &(&a ^ &b)), &apply_operator(op, &a) ^ &apply_operator(op, &b));
        }
    }

    #[test]
    fn real_structure_is_an_involution(a in (1usize..=2).prop_flat_map(|n| (0..=2 * n).prop_flat_map(move |k| form_on(n, 2 * k)))) {
        prop_assert_eq!(real_structure(&real_structure(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn weight_components_sum_back(a in (1usize..=2).prop_flat_map(|n| (0..=4 * n).prop_flat_map(move |k| form_on(n, k)))) {
        let dec = weight_decompose(&a);
        let sum = dec.components.values().fold(Form::zero(a.space(), a.degree()), |acc, x| &acc + x);
        prop_assert_eq!(sum, a.clone());
        for (w, c) in &dec.components {
            prop_assert_eq!(weight_decompose(c).components.keys().copied().collect::<Vec<_>>(), vec![*w]);
        }
    }

    #[test]
    fn top_weight_projection_is_idempotent(a in (1usize..=2).prop_flat_map(|n| (0..=2 * n).prop_flat_map(move |k| form_on(n, k)))) {
        let p = plus_project(&a).unwrap();
        prop_assert_eq!(plus_project(&p).unwrap(), p);
    }

    #[test]
    fn rproj_inverts_rmap(seed in any::<u64>(), n in 1usize..=2, k in 0usize..=4, q in 0usize..=4) {
        let s = ModelSpace::new(n).unwrap();
        let k = k.min(2 * n);
        let q = q.min(k);
        let eta = random_form(s, k, 0, 0.5, &mut rng(seed, 0));
        prop_assert_eq!(rproj(&rmap(k - q, q, &eta).unwrap()).unwrap(), eta);
    }

    #[test]
    fn differentials_square_to_zero(seed in any::<u64>(), n in 1usize..=2, p in 0usize..=3, q in 0usize..=3) {
        let s = ModelSpace::new(n).unwrap();
        let a = random_poly_form(s, p.min(2 * n), q.min(2 * n), &mut rng(seed, 1));
        prop_assert!(d(&d(&a)).is_zero());
        prop_assert!(delbar(&delbar(&a)).is_zero());
        prop_assert!(del_j(&del_j(&a)).is_zero());
        prop_assert!((&del(&del_j(&a)) + &del_j(&del(&a))).is_zero());
    }

    #[test]
    fn metric_roundtrip(seed in any::<u64>(), n in 1usize..=2) {
        let s = ModelSpace::new(n).unwrap();
        let eta = random_real_form(s, 2, &mut rng(seed, 2));
        let g = metric_from_form(&eta).unwrap();
        prop_assert_eq!(form_from_metric::<CRational>(&g), eta);
    }

    #[test]
    fn squares_are_weakly_positive_and_scaling_keeps_verdicts(seed in any::<u64>(), n in 1usize..=2, c in 1i64..=9) {
        let s = ModelSpace::new(n).unwrap();
        let mut r = rng(seed, 3);
        let sq = generator_square(&random_form(s, 1, 0, 0.8, &mut r));
        let v = weakly_positive_2p0(&sq, Search::Exact).unwrap();
        prop_assert_eq!(v.kind, VerdictKind::PositiveCertified);
        let eta = random_real_form(s, 2, &mut r);
        let scaled = eta.scale(&CRational::new(int(c), int(0)));
        prop_assert_eq!(
            weakly_positive_2p0(&eta, Search::Exact).unwrap().kind,
            weakly_positive_2p0(&scaled, Search::Exact).unwrap().kind
        );
    }

    #[test]
    fn records_roundtrip(a in form()) {
        let parsed = parse_forms(&form_to_record(&a)).unwrap();
        prop_assert_eq!(parsed, vec![a]);
    }
}
