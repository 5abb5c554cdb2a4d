mod common;

use apdiv::arith::{crt_pair, factorize, inv_mod, multiplicative_profile, nearest_int_distance};
use apdiv::bounds_opt::{
    divisorthm_rhs, exponent_fit, factorize_to_windows, shortkloost_rhs, standard_windows,
    target_sizes, WindowSpec,
};
use apdiv::divisor_ap::{divisor_sum_ap, error_term, ApQuery, DivisorMethod, Rational};
use apdiv::kloosterman::{
    complete_kloosterman, incomplete_kloosterman, kloosterman_crt, IntegerInterval,
};
use apdiv::vdc_lab::{
    interval_fourier, shifted_product_sum_direct, shifted_product_sum_squarefree,
    IntervalTransform, ModulusSplit,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn squarefree_q(max: u64) -> impl Strategy<Value = u64> {
    (1..=max).prop_filter("squarefree", |&q| common::squarefree(q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn divisor_sums_of_multiplicative_functions(n in 1u64..=10_000, l in 3u32..6) {
        let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        let mut mu_sum = 0i64;
        let mut phi_sum = 0u64;
        let mut tau_prev_sum = 0u64;
        for &d in &divisors {
            let p = multiplicative_profile(&factorize(d).unwrap(), l - 1).unwrap();
            mu_sum += p.mu as i64;
            phi_sum += p.phi;
            tau_prev_sum += p.tau_l;
        }
        prop_assert_eq!(mu_sum, i64::from(n == 1));
        prop_assert_eq!(phi_sum, n);
        prop_assert_eq!(multiplicative_profile(&factorize(n).unwrap(), l).unwrap().tau_l, tau_prev_sum);
        // τ_2 against τ_1 ≡ 1
        prop_assert_eq!(multiplicative_profile(&factorize(n).unwrap(), 2).unwrap().tau_l, divisors.len() as u64);
    }

    #[test]
    fn inverse_round_trip(a in -1_000_000i64..1_000_000, q in 2u64..1_000_000) {
        match inv_mod(a, q) {
            Ok(b) => prop_assert_eq!((common::modp(a, q) as u128 * b as u128 % q as u128) as u64, 1),
            Err(_) => prop_assert!(common::gcd(common::modp(a, q), q) > 1),
        }
    }

    #[test]
    fn crt_round_trip(q1 in 1u64..1000, q2 in 1u64..1000, n in 0u64..1_000_000) {
        prop_assume!(common::gcd(q1, q2) == 1);
        let n = n % (q1 * q2);
        prop_assert_eq!(crt_pair((n % q1) as i64, q1, (n % q2) as i64, q2).unwrap(), n);
    }

    #[test]
    fn nearest_int_symmetries(x in -1e6f64..1e6) {
        let d = nearest_int_distance(x);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - nearest_int_distance(-x)).abs() < 1e-9);
        prop_assert!((d - nearest_int_distance(x + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn kloosterman_real_and_symmetric(a in -500i64..500, b in -500i64..500, q in 1u64..=300) {
        let s = complete_kloosterman(a, b, q).unwrap();
        let t = complete_kloosterman(b, a, q).unwrap();
        prop_assert!(s.is_real());
        prop_assert!(s.agrees_with(&t));
        let o = common::kloosterman(a, b, q);
        prop_assert!(common::dist((s.re, s.im), o) < 1e-9);
    }

    #[test]
    fn twisted_multiplicativity(q in squarefree_q(1000), pick in 0usize..64, a in 0i64..1000, b in 0i64..1000) {
        let divisors = factorize(q).unwrap().divisors();
        let q0 = divisors[pick % divisors.len()];
        let crt = kloosterman_crt(a, b, &ModulusSplit::new(vec![q0, q / q0]).unwrap()).unwrap();
        let full = complete_kloosterman(a, b, q).unwrap();
        prop_assert!(crt.agrees_with(&full), "q0={} q={}: {:?} vs {:?}", q0, q, crt, full);
    }

    #[test]
    fn incomplete_trivial_bound(a in 1i64..500, q in 1u64..500, m in -1000i64..1000, n in 0u64..500) {
        prop_assume!(n <= q && common::gcd(common::modp(a, q), q) == 1);
        let s = incomplete_kloosterman(a, q, IntegerInterval::new(m, n)).unwrap();
        let count = (m..m + n as i64).filter(|&k| common::gcd(common::modp(k, q), q) == 1).count();
        prop_assert!(s.abs() <= count as f64 + s.err);
    }

    #[test]
    fn fourier_parseval_and_decay(q in 1u64..=200, m in -300i64..300, n in 0u64..=200) {
        let n = n.min(q);
        let interval = IntegerInterval::new(m, n);
        let t = IntervalTransform::new(interval, q).unwrap();
        let energy: f64 = t.values().iter().map(|f| f.abs().powi(2)).sum();
        let target = (q * n) as f64;
        prop_assert!((energy - target).abs() <= 1e-9 * target.max(1.0), "{} vs {}", energy, target);
        for k in 1..q {
            let f = interval_fourier(interval, q, k as i64).unwrap();
            let cap = (n as f64).min(1.0 / (2.0 * nearest_int_distance(k as f64 / q as f64)));
            prop_assert!(f.abs() <= cap + f.err + 1e-12, "q={} k={} |f|={} cap={}", q, k, f.abs(), cap);
        }
    }

    #[test]
    fn divisor_partition_and_monotonicity(x in 1u64..3000, q in 1u64..60) {
        let total = divisor_sum_ap(&ApQuery::new(x, 1, 0).unwrap(), DivisorMethod::Hyperbola).unwrap();
        let mut sum = 0;
        let mut zero = Rational::from_integer(0);
        for a in 0..q as i64 {
            let query = ApQuery::new(x, q, a).unwrap();
            let d = divisor_sum_ap(&query, DivisorMethod::Hyperbola).unwrap();
            let next = divisor_sum_ap(&ApQuery::new(x + 1, q, a).unwrap(), DivisorMethod::Hyperbola).unwrap();
            prop_assert!(next >= d);
            sum += d;
            if common::gcd(a as u64, q) == 1 {
                zero += error_term(&query).unwrap();
            }
        }
        prop_assert_eq!(sum, total);
        prop_assert_eq!(zero, Rational::from_integer(0));
    }

    #[test]
    fn product_sum_crt_equals_direct(
        q in squarefree_q(210),
        a in 1i64..210,
        shifts in proptest::collection::vec(-20i64..20, 0..=2),
        b in 0i64..2,
    ) {
        prop_assume!(common::gcd(a as u64, q) == 1);
        let crt = shifted_product_sum_squarefree(a, &shifts, b, &factorize(q).unwrap()).unwrap();
        let direct = shifted_product_sum_direct(a, &shifts, b, q).unwrap();
        prop_assert!(crt.agrees_with(&direct), "{:?} vs {:?}", crt, direct);
    }

    #[test]
    fn target_product(x in 1u64..1_000_000_000_000, q in 1u64..1_000_000_000) {
        let t = target_sizes(x, q).unwrap();
        prop_assert!((t.iter().product::<f64>() / q as f64 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bounds_monotone(e1 in 0.0f64..0.5, de in 0.0f64..0.5, j in 0usize..4, bump in 2u64..5) {
        let parts = vec![13u64, 7, 5, 3];
        let mut bigger = parts.clone();
        // bump one part to a coprime, squarefree larger value
        bigger[j] *= [17u64, 19, 23][bump as usize % 3];
        let s0 = ModulusSplit::new(parts).unwrap();
        let s1 = ModulusSplit::new(bigger).unwrap();
        let x = 100_000_000;
        let d0 = divisorthm_rhs(x, &s0, 0.05, e1).unwrap();
        let d1 = divisorthm_rhs(x, &s0, 0.05, e1 + de).unwrap();
        prop_assert!(d1.at_eps.total >= d0.at_eps.total);
        let k0 = shortkloost_rhs(50, &s0, e1).unwrap();
        let k1 = shortkloost_rhs(50, &s0, e1 + de).unwrap();
        prop_assert!(k1.at_eps.total >= k0.at_eps.total);
        // every term but the leading x^{1-δ}/q one is non-decreasing in q_j
        let g0 = divisorthm_rhs(x, &s0, 0.05, 0.0).unwrap().at_zero;
        let g1 = divisorthm_rhs(x, &s1, 0.05, 0.0).unwrap().at_zero;
        for (t0, t1) in g0.terms.iter().zip(&g1.terms).skip(1) {
            prop_assert!(t1.value >= t0.value, "{} shrank", t0.name);
        }
        let h0 = shortkloost_rhs(50, &s0, 0.0).unwrap().at_zero;
        let h1 = shortkloost_rhs(50, &s1, 0.0).unwrap().at_zero;
        for (t0, t1) in h0.terms.iter().zip(&h1.terms) {
            prop_assert!(t1.value >= t0.value, "{} shrank", t0.name);
        }
    }

    #[test]
    fn windows_match_oracle(q in squarefree_q(30_000), seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let windows = [(); 4].map(|_| {
            let lo = rng.gen_range(1.0..(q as f64).sqrt().max(2.0));
            (lo, lo * rng.gen_range(1.0..20.0))
        });
        let spec = WindowSpec::new(windows).unwrap();
        let got = factorize_to_windows(&factorize(q).unwrap(), &spec).unwrap();
        let want = common::window_oracle(q, &windows);
        prop_assert_eq!(got.split().map(|s| s.parts().to_vec()), want.map(|w| w.to_vec()));
    }
}

#[test]
fn window_lower_ends_exceed_smoothness_at_admissible_points() {
    // (varpi, eta) with 246 varpi + 18 eta < 1 and q = x^{2/3 + varpi}
    for (varpi, eta) in [(0.001, 0.04), (0.002, 0.025), (0.0, 0.05)] {
        assert!(apdiv::bounds_opt::admissible(varpi, eta));
        for x in [1_000_000u64, 10_000_000, 100_000_000, 1_000_000_000] {
            let q = (x as f64).powf(2.0 / 3.0 + varpi) as u64;
            let xe = (x as f64).powf(eta);
            for &t in &target_sizes(x, q).unwrap() {
                assert!(t > (x as f64).powf(1.0 / 18.0) && t > xe);
            }
            for &(lo, _) in standard_windows(x, q, eta).unwrap().windows() {
                assert!(lo > xe, "x={x} eta={eta}: lo {lo} <= x^eta {xe}");
            }
        }
    }
}

#[test]
fn exponent_fit_recovers_noisy_slope() {
    // fixed seed; log-normal noise of σ = 0.05 around value = 3 scale^1.5
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let noise = Normal::<f64>::new(0.0, 0.05).unwrap();
    let points: Vec<(f64, f64)> = (0..40)
        .map(|i| {
            let s = 10f64.powf(1.0 + i as f64 / 10.0);
            (s, 3.0 * s.powf(1.5) * noise.sample(&mut rng).exp())
        })
        .collect();
    let fit = exponent_fit(&points).unwrap();
    let logs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let sxx: f64 = logs.iter().map(|l| (l - mean).powi(2)).sum();
    let sigma = fit.residual / sxx.sqrt();
    assert!(
        (fit.slope - 1.5).abs() <= 3.0 * sigma,
        "slope {} ± {}",
        fit.slope,
        sigma
    );
    assert!((fit.residual - 0.05).abs() < 0.02);
}
