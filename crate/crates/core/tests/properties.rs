use delrate::bounds::{compute, en_prime_upper, BoundKind, EfficientBoundConfig};
use delrate::channelsim::{
    count_subsequences_exact, count_subsequences_log, estimate_en, sample_output, sample_rng,
    BitString,
};
use delrate::numerics::{
    binom_pmf_log, entropy, kl_bernoulli, log_binomial, log_sum, stirling_lower_log_binomial,
    BernoulliPair,
};
use delrate::oracle::{exact_agree_prob, exact_en, exact_en_prime, exact_pi};
use delrate::walkdp::{agree_prob_log, agreement_weight_slice, pi_table, WalkParams};
use delrate::LogValue;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;

const RATES: [f64; 5] = [0.0, 0.3, 0.5, 0.9, 1.0];

fn close_log(a: LogValue, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        return a.is_zero();
    }
    (a.log2() - b.log2()).abs() <= tol
}

#[test]
fn agreement_dp_matches_enumeration() {
    for n in 0..=7 {
        for &a in &RATES {
            for &b in &RATES {
                let dp = agree_prob_log(&WalkParams::new(n, a, b).unwrap());
                let exact = exact_agree_prob(n, a, b).unwrap();
                assert!(
                    close_log(dp, exact, 1e-10),
                    "n={n} a={a} b={b}: {dp:?} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn weighted_slices_match_enumeration() {
    for n in 1..=6 {
        for ell in 0..=n {
            let slice = agreement_weight_slice(n, ell).unwrap();
            for (u, &v) in slice.iter().enumerate() {
                let exact = exact_pi(n, ell, u).unwrap();
                assert!(
                    close_log(v, exact, 1e-10),
                    "n={n} ell={ell} u={u}: {v:?} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn slices_marginalize_to_agreement() {
    for n in [1, 2, 5, 8, 17, 32, 64, 100] {
        for ell in 0..=n {
            let total = log_sum(agreement_weight_slice(n, ell).unwrap());
            let p = ell as f64 / n as f64;
            let agree = agree_prob_log(&WalkParams::new(n, p, p).unwrap());
            assert!(
                (total.log2() - agree.log2()).abs() <= 1e-9,
                "n={n} ell={ell}: {total:?} vs {agree:?}"
            );
        }
    }
}

#[test]
fn stirling_below_log_binomial_exhaustive() {
    for n in 1..=2000u64 {
        for u in 0..=n {
            let lower = stirling_lower_log_binomial(n, u).unwrap();
            let exact = log_binomial(n, u).unwrap();
            assert!(lower <= exact + 1e-9, "n={n} u={u}: {lower} > {exact}");
        }
    }
}

#[test]
fn log_binomial_against_big_integers() {
    for (n, u) in [
        (1000u64, 500u64),
        (1000, 3),
        (2000, 1000),
        (200, 77),
        (10000, 4321),
    ] {
        let mut c = BigUint::from(1u32);
        for i in 0..u {
            c = c * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        let bits = c.bits();
        let shift = bits.saturating_sub(60);
        let top = (&c >> shift).to_f64().unwrap();
        let exact = top.log2() + shift as f64;
        let got = log_binomial(n, u).unwrap();
        assert!(
            (got - exact).abs() <= 1e-12 * exact.max(1.0),
            "n={n} u={u}: {got} vs {exact}"
        );
    }
}

#[test]
fn binomial_pmf_sums_to_one() {
    for n in [1u64, 2, 10, 99, 500, 1000, 2500, 5000] {
        for i in 1..=9 {
            let d = i as f64 / 10.0;
            let total: f64 = (0..=n)
                .map(|u| binom_pmf_log(n, d, u).unwrap().to_linear())
                .sum();
            assert!((total - 1.0).abs() <= 1e-10, "n={n} d={d}: {total}");
        }
    }
}

#[test]
fn kl_vanishes_only_on_the_diagonal() {
    for i in 0..=20 {
        for j in 0..=20 {
            let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
            let kl = kl_bernoulli(BernoulliPair::new(a, b).unwrap());
            assert!(kl >= 0.0);
            assert_eq!(kl == 0.0, i == j, "a={a} b={b}: {kl}");
        }
    }
}

#[test]
fn bounds_dominate_exact_en_at_small_n() {
    let cfg = EfficientBoundConfig::default();
    for n in 1..=6 {
        let table = pi_table(n).unwrap();
        for i in 1..=9 {
            let d = i as f64 / 10.0;
            let exact = exact_en(n, d).unwrap();
            for kind in BoundKind::ALL {
                match compute(kind, n, d, Some(&table), &cfg) {
                    Ok(r) => assert!(
                        r.e_inf_upper >= exact - 1e-12,
                        "{kind} n={n} d={d}: {} < {exact}",
                        r.e_inf_upper
                    ),
                    // the simplified bound needs (d - δ)n >= 1, out of reach for some tiny n
                    Err(_) => assert_eq!(kind, BoundKind::Corollary, "n={n} d={d}"),
                }
            }
        }
    }
}

#[test]
fn en_prime_bound_dominates_exact() {
    for n in 1..=6 {
        for u in 0..=n {
            let pi = LogValue::from_linear(exact_pi(n, u, u).unwrap());
            let bound = en_prime_upper(n, u, pi).unwrap();
            let exact = exact_en_prime(n, u).unwrap();
            assert!(bound >= exact - 1e-12, "n={n} u={u}: {bound} < {exact}");
        }
    }
}

#[test]
fn jensen_dominance() {
    for n in 1..=7 {
        for i in 0..=10 {
            let d = i as f64 / 10.0;
            let agree = agree_prob_log(&WalkParams::new(n, d, 0.5).unwrap());
            let jensen = 1.0 + agree.log2() / n as f64;
            let exact = exact_en(n, d).unwrap();
            assert!(jensen >= exact - 1e-12, "n={n} d={d}: {jensen} < {exact}");
        }
    }
}

#[test]
fn counting_matches_big_integers() {
    let mut rng = sample_rng(2024, 0);
    for _ in 0..10_000 {
        let n = rng.random_range(0..=200);
        let d = rng.random::<f64>();
        let x = BitString::random(n, &mut rng);
        let (y, _) = sample_output(&x, d, &mut rng).unwrap();
        let approx = count_subsequences_log(&x, &y).unwrap();
        let exact = count_subsequences_exact(&x, &y).unwrap();
        assert!(!approx.is_zero(), "the generating pattern is a witness");
        let bits = exact.bits();
        let shift = bits.saturating_sub(60);
        let exact_log = ((&exact >> shift).to_f64().unwrap()).log2() + shift as f64;
        // relative 1e-9 on the count is 1.45e-9 bits in the log domain
        assert!(
            (approx.log2() - exact_log).abs() <= 1e-9 / std::f64::consts::LN_2,
            "x={x} y={y}: {approx:?} vs 2^{exact_log}"
        );
    }
}

#[test]
fn confidence_interval_coverage() {
    let exact = exact_en(6, 0.5).unwrap();
    let covered = (0..200u64)
        .filter(|&seed| {
            let est = estimate_en(6, 0.5, 200, seed, 0.99).unwrap();
            (est.mean - exact).abs() <= est.half_width
        })
        .count();
    assert!(covered >= 190, "covered {covered} of 200");
}

proptest! {
    #[test]
    fn entropy_is_symmetric(p in 0.0f64..=1.0) {
        prop_assert!((entropy(p).unwrap() - entropy(1.0 - p).unwrap()).abs() <= 1e-15);
        // when 1 - p is exact the two evaluations agree bit for bit
        let dyadic = (p * 1024.0).round() / 1024.0;
        prop_assert_eq!(entropy(dyadic).unwrap().to_bits(), entropy(1.0 - dyadic).unwrap().to_bits());
    }

    #[test]
    fn log_sum_permutation_invariant(
        mut xs in prop::collection::vec(prop_oneof![Just(f64::NEG_INFINITY), -200.0f64..50.0], 0..24),
        seed in any::<u64>(),
    ) {
        let a = log_sum(xs.iter().map(|&l| LogValue::from_log2(l)));
        let mut rng = sample_rng(seed, 0);
        for i in (1..xs.len()).rev() {
            xs.swap(i, rng.random_range(0..=i));
        }
        let b = log_sum(xs.iter().map(|&l| LogValue::from_log2(l)));
        let all_zero = xs.iter().all(|l| l.is_infinite());
        prop_assert_eq!(a.is_zero(), all_zero);
        prop_assert_eq!(b.is_zero(), all_zero);
        if !all_zero {
            prop_assert!((a.log2() - b.log2()).abs() <= 1e-12);
        }
    }

    #[test]
    fn walk_distribution_is_a_distribution(n in 0usize..60, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let layer = delrate::walkdp::walk_distribution(&WalkParams::new(n, a, b).unwrap());
        let total = log_sum(layer.iter().map(|(_, v)| v));
        prop_assert!(total.log2().abs() <= 1e-9, "total {:?}", total);
    }

    #[test]
    fn agreement_is_symmetric(n in 0usize..40, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let ab = agree_prob_log(&WalkParams::new(n, a, b).unwrap());
        let ba = agree_prob_log(&WalkParams::new(n, b, a).unwrap());
        prop_assert!(ab.is_zero() == ba.is_zero());
        if !ab.is_zero() {
            prop_assert!((ab.log2() - ba.log2()).abs() <= 1e-9);
        }
    }

    #[test]
    fn samples_lie_in_unit_interval(n in 1usize..80, d in 0.0f64..=1.0, seed in any::<u64>()) {
        let est = estimate_en(n, d, 8, seed, 0.9).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.mean));
    }
}
