use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsdiff::nilalg::{nil_invert, nil_mul, sample, NilAlgebra, NilElement, WCtx};
use qsdiff::qgroups::{giii_inv, giii_mul, hq_mul, GIIIElement, HqElement};
use qsdiff::qscalar::{eval_numeric, q_binom, q_int, q_pow};
use qsdiff::seqring::{seq_n, seq_q, seq_shift, Seq};
use qsdiff::twisted::TwistedSeries;
use qsdiff::{Frac, Rat, Var};

fn small_frac() -> impl Strategy<Value = Frac> {
    (-3i64..=3, -3i64..=3, -2i64..=2, 1i64..=3).prop_map(|(a, b, c, d)| {
        let q = Frac::var(Var::Q);
        let t = Frac::var(Var::T);
        let num = &(&Frac::int(a) + &(&Frac::int(b) * &q)) + &(&Frac::int(c) * &t);
        let den = &Frac::int(d) + &(&q * &t);
        &num / &den
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn binom(m: u32, n: u32) -> Rat {
    (0..n).fold(Rat::from_integer(1.into()), |acc, k| {
        acc * Rat::from_integer((m - k).into()) / Rat::from_integer((k + 1).into())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frac_field_laws(a in small_frac(), b in small_frac(), c in small_frac()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn q_binomial_symmetry_and_classical_limit(m in 0u32..10, n in 0u32..10) {
        prop_assume!(n <= m);
        prop_assert_eq!(q_binom(m, n), q_binom(m, m - n));
        let one = Rat::from_integer(1.into());
        let v = eval_numeric(&q_binom(m, n), &one, &one, &one).unwrap();
        prop_assert_eq!(v, binom(m, n));
    }

    #[test]
    fn q_integers_telescope(n in 1u32..15) {
        // [n]_q = 1 + q·[n−1]_q
        let lhs = q_int(n);
        let rhs = &Frac::one() + &(&q_pow(1) * &q_int(n - 1));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn nil_mul_associative_in_quantum_plane(seed in any::<u64>()) {
        let alg = NilAlgebra::qplane(4);
        let mut g = rng(seed);
        let [a, b, c] = [0, 1, 2].map(|_| sample::unipotent(&alg, &[0, 1], &mut g));
        prop_assert_eq!(nil_mul(&nil_mul(&a, &b), &c), nil_mul(&a, &nil_mul(&b, &c)));
    }

    #[test]
    fn nil_inverse_is_two_sided(seed in any::<u64>()) {
        let alg = NilAlgebra::qplane(4);
        let mut g = rng(seed);
        let a = sample::unipotent(&alg, &[0, 1], &mut g);
        let ai = nil_invert(&a).unwrap();
        let one = NilElement::one(&alg);
        prop_assert_eq!(nil_mul(&a, &ai), one.clone());
        prop_assert_eq!(nil_mul(&ai, &a), one);
    }

    #[test]
    fn nilpotents_vanish_at_nildeg(seed in any::<u64>()) {
        let alg = NilAlgebra::qplane(3);
        let mut g = rng(seed);
        let x = sample::nilpotent(&alg, &[0, 1], &mut g);
        prop_assert!(x.pow(alg.nildeg()).is_zero());
    }

    #[test]
    fn w_substitution_is_multiplicative(seed in any::<u64>()) {
        let alg = NilAlgebra::comm(3);
        let ctx = WCtx::new(&alg, 3);
        let mut g = rng(seed);
        let a = sample::nil_series(&ctx, &[0, 1], &mut g);
        let b = sample::nil_series(&ctx, &[0, 1], &mut g);
        let e = sample::unipotent(&alg, &[0, 1], &mut g);
        let u = sample::nilpotent(&alg, &[0, 1], &mut g);
        let lhs = a.mul(&b).subst_w1(&e, &u).unwrap();
        let rhs = a.subst_w1(&e, &u).unwrap().mul(&b.subst_w1(&e, &u).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn giii_law_is_associative_with_inverses(seed in any::<u64>()) {
        let alg = NilAlgebra::comm(3);
        let ctx = WCtx::new(&alg, 3);
        let mut g = rng(seed);
        let mut el = || GIIIElement::new(sample::unipotent(&alg, &[0, 1], &mut g), sample::nil_series(&ctx, &[0, 1], &mut g)).unwrap();
        let (x, y, z) = (el(), el(), el());
        let l = giii_mul(&giii_mul(&x, &y).unwrap(), &z).unwrap();
        let r = giii_mul(&x, &giii_mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        let xi = giii_inv(&x).unwrap();
        prop_assert_eq!(giii_mul(&x, &xi).unwrap(), GIIIElement::unit(&ctx));
        prop_assert_eq!(giii_mul(&xi, &x).unwrap(), GIIIElement::unit(&ctx));
    }

    #[test]
    fn shift_is_a_ring_map(k in 0i64..4, c in small_frac()) {
        let a = Seq::constant(c).add(&seq_n());
        let b = seq_q().scale(&Frac::int(k + 1));
        prop_assert_eq!(seq_shift(&a.mul(&b)), seq_shift(&a).mul(&seq_shift(&b)));
    }

    #[test]
    fn hat_sigma_is_multiplicative(c0 in small_frac(), c1 in small_frac(), c2 in small_frac()) {
        let one = Frac::one();
        let qq = Frac::var(Var::SeqQ);
        let a = TwistedSeries::from_closed(3, vec![&one + &c0, &c1 * &qq, c2.clone()], &one);
        let b = TwistedSeries::from_closed(3, vec![c1.clone(), one.clone(), &c0 * &qq], &one);
        prop_assert!(a.mul(&b).hat_sigma().eq_trusted(&a.hat_sigma().mul(&b.hat_sigma()), 6));
    }

    #[test]
    fn twisted_inverse_is_two_sided(c0 in small_frac(), c1 in small_frac(), c2 in small_frac()) {
        prop_assume!(!c0.is_zero());
        let one = Frac::one();
        let a = TwistedSeries::from_closed(4, vec![c0, c1, c2], &one);
        let ai = a.try_invert().unwrap();
        let unit = TwistedSeries::constant(4, one);
        prop_assert!(a.mul(&ai).eq_trusted(&unit, 6));
        prop_assert!(ai.mul(&a).eq_trusted(&unit, 6));
    }

    #[test]
    fn hq_product_is_associative(a in -2i32..=2, b in 0u32..3, c in -2i32..=2, d in 0u32..3, k in 1i64..4) {
        let x = HqElement::mono(a, b).add(&HqElement::u());
        let y = HqElement::mono(c, d).scale(&Frac::int(k)).add(&HqElement::v());
        let z = HqElement::u_inv().add(&HqElement::v());
        prop_assert_eq!(hq_mul(&hq_mul(&x, &y), &z), hq_mul(&x, &hq_mul(&y, &z)));
        prop_assert_eq!(hq_mul(&HqElement::u(), &HqElement::u_inv()), HqElement::one());
    }
}
