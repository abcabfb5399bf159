use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Rational64;
use num_traits::Zero;
use proptest::prelude::*;

use ncball::freealg::{parse, FreePolynomial, Word};
use ncball::linalg::{self, CMat};
use ncball::mattuple::MatrixTuple;
use ncball::ncdiff::{self, NcFunction};
use ncball::opball::{self, OperatorBall};
use ncball::probe;
use ncball::realize::{example_5_2, Realization};
use ncball::varieties::example_4_12;
use ncball::{ExactPoly, Poly64};

type C = Complex<f64>;
type Q = Complex<Rational64>;

fn exact_poly(d: usize, max_len: usize, max_terms: usize) -> impl Strategy<Value = ExactPoly> {
    prop::collection::vec(
        (
            prop::collection::vec(1..=d, 0..=max_len),
            -6i64..=6,
            1i64..=4,
            -3i64..=3,
        ),
        0..=max_terms,
    )
    .prop_map(move |terms| {
        terms
            .into_iter()
            .fold(FreePolynomial::zero(d), |acc, (letters, a, b, im)| {
                let w = Word::new(d, letters).unwrap();
                acc.add(&FreePolynomial::monomial(
                    w,
                    Q::new(Rational64::new(a, b), Rational64::from_integer(im)),
                ))
                .unwrap()
            })
    })
}

fn float_poly(d: usize, max_len: usize) -> impl Strategy<Value = Poly64> {
    prop::collection::vec(
        (
            prop::collection::vec(1..=d, 0..=max_len),
            -2.0f64..2.0,
            -2.0f64..2.0,
        ),
        0..6,
    )
    .prop_map(move |terms| {
        terms
            .into_iter()
            .fold(FreePolynomial::zero(d), |acc, (letters, re, im)| {
                acc.add(&FreePolynomial::monomial(
                    Word::new(d, letters).unwrap(),
                    C::new(re, im),
                ))
                .unwrap()
            })
    })
}

/// Seeded point of the polydisk at level `n` with the given margin.
fn point(d: usize, n: usize, margin: f64, seed: u64) -> MatrixTuple<f64> {
    probe::sample_in_ball(
        &OperatorBall::polydisk(d),
        n,
        margin,
        &mut probe::sample_rng(seed, 0),
    )
    .unwrap()
}

fn to_float(p: &ExactPoly) -> Poly64 {
    let r = |q: &Rational64| *q.numer() as f64 / *q.denom() as f64;
    p.map_coefficients(|c| C::new(r(&c.re), r(&c.im)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn format_then_parse_roundtrips(p in float_poly(3, 4)) {
        let back: Poly64 = parse(&p.format(), 3).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn multiplication_is_associative_and_distributive(
        a in exact_poly(2, 2, 3), b in exact_poly(2, 2, 3), c in exact_poly(2, 2, 3)
    ) {
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(b.add(&c).unwrap().mul(&a).unwrap(), b.mul(&a).unwrap().add(&c.mul(&a).unwrap()).unwrap());
    }

    #[test]
    fn homogeneous_components_sum_to_the_polynomial(p in exact_poly(3, 4, 8)) {
        let sum = p.homogeneous_components().iter().fold(FreePolynomial::zero(3), |acc, q| acc.add(q).unwrap());
        prop_assert_eq!(sum, p);
    }

    #[test]
    fn left_division_reconstructs(p in exact_poly(3, 5, 8), order in 1usize..=3) {
        let high = p.homogeneous_components().into_iter().skip(order).fold(FreePolynomial::zero(3), |acc, q| acc.add(&q).unwrap());
        let quotients = high.left_divide(order).unwrap();
        prop_assert_eq!(quotients.reconstruct(), high.clone());
        for (w, q) in quotients.nonzero() {
            prop_assert_eq!(w.len(), order);
            prop_assert!(!q.is_zero());
        }
        if p.lowest_degree().is_some_and(|k| k < order) {
            prop_assert!(p.left_divide(order).is_err());
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in exact_poly(2, 3, 4), b in exact_poly(2, 3, 4), n in 1usize..=3, seed in any::<u64>()) {
        let x = point(2, n, 0.3, seed);
        let (fa, fb) = (to_float(&a), to_float(&b));
        let ea = x.eval_poly(&fa).unwrap();
        let eb = x.eval_poly(&fb).unwrap();
        let prod = x.eval_poly(&to_float(&a.mul(&b).unwrap())).unwrap();
        let sum = x.eval_poly(&to_float(&a.add(&b).unwrap())).unwrap();
        prop_assert!(linalg::max_abs_diff(&prod, &(&ea * &eb)) < 1e-9);
        prop_assert!(linalg::max_abs_diff(&sum, &(&ea + &eb)) < 1e-12);
    }

    #[test]
    fn realization_respects_direct_sums(n in 1usize..=3, m in 1usize..=3, seed in any::<u64>()) {
        let f = example_5_2::<f64>();
        let x = point(2, n, 0.1, seed);
        let y = point(2, m, 0.01, seed.wrapping_add(1));
        let lhs = f.eval(&x.direct_sum(&y).unwrap()).unwrap();
        let rhs = linalg::block_diag(&f.eval(&x).unwrap(), &f.eval(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn similarity_is_intertwined(p in float_poly(2, 3), n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = probe::sample_rng(seed, 1);
        let x = point(2, n, 0.4, seed);
        let s = probe::random_similarity::<f64>(n, &mut rng);
        let cond = linalg::condition(&s);
        let sx = x.similarity(&s).unwrap();
        let s_inv = s.clone().try_inverse().unwrap();
        let want = &s_inv * x.eval_poly(&p).unwrap() * &s;
        prop_assert!(linalg::max_abs_diff(&sx.eval_poly(&p).unwrap(), &want) <= 1e-10 * cond);
    }

    #[test]
    fn compressions_stay_in_the_ball(kind in 0usize..3, d in 1usize..=4, n in 1usize..=4, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let ball = match kind { 0 => OperatorBall::<f64>::row_ball(d), 1 => OperatorBall::polydisk(d), _ => OperatorBall::column_ball(d) };
        let mut rng = probe::sample_rng(seed, 0);
        let x = probe::sample_in_ball(&ball, n, 0.001, &mut rng).unwrap();
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let v = probe::random_isometry::<f64>(n, k, &mut rng).unwrap();
        let y = opball::ucp_compression(&x, &v).unwrap();
        prop_assert!(ball.pencil_norm(&y).unwrap() <= ball.pencil_norm(&x).unwrap() + 1e-12);
    }

    #[test]
    fn operator_norm_agrees_with_power_iteration(n in 1usize..=5, m in 1usize..=5, seed in any::<u64>()) {
        let mut rng = probe::sample_rng(seed, 0);
        let a: CMat<f64> = probe::random_similarity::<f64>(n.max(m), &mut rng).view((0, 0), (n, m)).into_owned();
        let gram = a.adjoint() * &a;
        let mut v = DMatrix::from_element(m, 1, C::new(1.0, 0.5));
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let w = &gram * &v;
            let norm = w.norm();
            if norm == 0.0 { break; }
            lambda = norm / v.norm();
            v = w / C::new(norm, 0.0);
        }
        let sigma = linalg::op_norm(&a);
        prop_assert!((lambda.sqrt() - sigma).abs() <= 1e-6 * sigma.max(1.0));
    }

    #[test]
    fn first_difference_is_linear_in_direction(
        x in prop::array::uniform2((-0.6f64..0.6, -0.6f64..0.6)),
        h in prop::array::uniform2((-2.0f64..2.0, -2.0f64..2.0)),
        k in prop::array::uniform2((-2.0f64..2.0, -2.0f64..2.0)),
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let f = example_5_2::<f64>();
        let x = [C::new(x[0].0, x[0].1), C::new(x[1].0, x[1].1)];
        let h = [C::new(h[0].0, h[0].1), C::new(h[1].0, h[1].1)];
        let k = [C::new(k[0].0, k[0].1), C::new(k[1].0, k[1].1)];
        let alpha = C::new(alpha.0, alpha.1);
        let combo = [alpha * h[0] + k[0], alpha * h[1] + k[1]];
        let lhs = ncdiff::delta_first(&f, &x, &combo).unwrap();
        let rhs = alpha * ncdiff::delta_first(&f, &x, &h).unwrap() + ncdiff::delta_first(&f, &x, &k).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn first_difference_matches_remainder_factor(seed in any::<u64>()) {
        let f = Arc::new(example_5_2::<f64>());
        let x = point(2, 1, 0.05, seed);
        let s = x.as_scalars().unwrap();
        for j in 1..=2 {
            let delta = ncdiff::delta_first(f.as_ref(), &s, &ncdiff::unit_direction(2, j)).unwrap();
            let g = f.remainder_factor(&Word::letter(2, j).unwrap()).unwrap().eval(&x).unwrap()[(0, 0)];
            prop_assert!((delta - g).norm() <= 1e-10);
        }
    }

    #[test]
    fn cesaro_error_obeys_the_triangle_bound(seed in any::<u64>(), order in 1usize..=80) {
        let f = example_5_2::<f64>();
        let x = point(2, 1, 0.5, seed);
        let fx = f.eval(&x).unwrap()[(0, 0)];
        let err = (f.cesaro_eval(&x, order).unwrap()[(0, 0)] - fx).norm();
        let parts = f.homogeneous_evals(&x, order + 400).unwrap();
        let bound: f64 = parts.iter().enumerate().map(|(k, p)| {
            let w = if k < order { k as f64 / order as f64 } else { 1.0 };
            w * p[(0, 0)].norm()
        }).sum();
        prop_assert!(err <= bound + 1e-12);
    }

    #[test]
    fn variety_points_are_closed_under_direct_sums(n in 1usize..=3, m in 1usize..=3, seed in any::<u64>()) {
        let pair = example_4_12::<f64>();
        let mut rng = probe::sample_rng(seed, 0);
        let t = ncball::varieties::sample_contraction::<f64>(n, 0.1, &mut rng).unwrap();
        let u = ncball::varieties::sample_contraction::<f64>(m, 0.1, &mut rng).unwrap();
        let x = ncball::varieties::graph_point(&t, 2).unwrap();
        let y = ncball::varieties::graph_point(&u, 2).unwrap();
        prop_assert!(pair.v1.contains(&x.direct_sum(&y).unwrap()).unwrap());
    }

    #[test]
    fn probe_best_is_monotone_in_budget(seed in 0u64..1000, b in 1usize..80, extra in 0usize..80) {
        let f = example_5_2::<f64>();
        let ball = OperatorBall::polydisk(2);
        let small = probe::estimate_sup(&f, &ball, 1, b, seed).unwrap();
        let large = probe::estimate_sup(&f, &ball, 1, b + extra, seed).unwrap();
        prop_assert!(large.best >= small.best);
        prop_assert!(large.best <= 1.0 + 1e-6);
        prop_assert!(small.replay_defect(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn word_keys_roundtrip(letters in prop::collection::vec(1usize..=12, 0..6)) {
        let w = Word::new(12, letters).unwrap();
        prop_assert_eq!(Word::parse(12, &w.key()).unwrap(), w);
    }
}

#[test]
fn single_precision_matches_double() {
    let f32_real: Realization<f32> = example_5_2();
    let f64_real: Realization<f64> = example_5_2();
    let x64 = point(2, 3, 0.2, 5);
    let x32 = MatrixTuple::<f32>::new(
        x64.coords()
            .iter()
            .map(|m| m.map(|z| Complex::new(z.re as f32, z.im as f32)))
            .collect(),
    )
    .unwrap();
    let a = f32_real.eval(&x32).unwrap();
    let b = f64_real.eval(&x64).unwrap();
    let diff = a
        .iter()
        .zip(b.iter())
        .map(|(p, q)| (Complex::new(p.re as f64, p.im as f64) - q).norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-5, "{diff}");
    let g: Poly64 = parse("z1*z2 - z2*z1", 2).unwrap();
    let g32 = g.map_coefficients(|c| Complex::new(c.re as f32, c.im as f32));
    assert!(
        NcFunction::<f32>::eval(&g32, &MatrixTuple::<f32>::zeros(2, 2))
            .unwrap()
            .iter()
            .all(|z| z.is_zero())
    );
}

#[test]
fn finite_difference_controls_first_difference() {
    let f = example_5_2::<f64>();
    let tau = 1e-5;
    let zero = [C::zero(), C::zero()];
    let f0 = f.eval(&MatrixTuple::scalar(&zero).unwrap()).unwrap()[(0, 0)];
    for j in 1..=2 {
        let e = ncdiff::unit_direction::<f64>(2, j);
        let step: Vec<C> = e.iter().map(|z| z * tau).collect();
        let ft = f.eval(&MatrixTuple::scalar(&step).unwrap()).unwrap()[(0, 0)];
        let delta = ncdiff::delta_first(&f, &zero, &e).unwrap();
        assert!(((ft - f0) / tau - delta).norm() < 1e-3);
    }
}
