use asw_core::charsum::*;
use asw_core::ring_tower::CyclotomicInt;
use asw_core::tower::TowerSpec;
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn rank_one() -> TowerSpec {
    TowerSpec::from_prime_coeffs(3, 1, 1, &[0, 1, 1]).unwrap()
}

/// `sum alpha^k` for `P(s) = prod (1 - alpha s)`, by Newton's identities.
fn reciprocal_power_sums(c: &[BigInt], kmax: usize) -> Vec<BigInt> {
    let mut ps = vec![BigInt::zero(); kmax + 1];
    for k in 1..=kmax {
        let mut acc = BigInt::from(k as i64) * c.get(k).cloned().unwrap_or_default();
        for j in 1..k {
            acc += c.get(j).cloned().unwrap_or_default() * &ps[k - j];
        }
        ps[k] = -acc;
    }
    ps
}

fn point_counts_match(spec: &TowerSpec, kmax: usize) {
    let z = zeta_product(spec, 1, kmax, DEFAULT_BUDGET).unwrap();
    let ps = reciprocal_power_sums(&z.numerator, kmax);
    let q = BigInt::from(spec.q());
    for k in 1..=kmax {
        let predicted = q.pow(k as u32) - &ps[k];
        assert_eq!(predicted, affine_points_level_one(spec, k).unwrap(), "k={k}");
    }
}

#[test]
fn zeta_numerator_counts_points_rank_one() {
    point_counts_match(&rank_one(), 4);
}

#[test]
fn zeta_numerator_counts_points_rank_two() {
    point_counts_match(&TowerSpec::standard_small(), 3);
}

#[test]
fn zeta_series_starts_with_one() {
    let z = zeta_product(&TowerSpec::standard_small(), 2, 3, DEFAULT_BUDGET).unwrap();
    assert!(z.series[0].is_one());
    // 72 characters of conductor 2 with degree 5 plus 8 of degree 1
    assert_eq!(z.numerator.len() - 1, 72 * 5 + 8);
}

#[test]
fn zeta_budget_guard() {
    let e = zeta_product(&TowerSpec::standard_small(), 2, 3, 10).unwrap_err();
    assert!(matches!(e, asw_core::Error::Budget(_)));
}

#[test]
fn lstar_degree_values() {
    let s = rank_one();
    assert_eq!(lstar_degree(&s, 1), 2);
    assert_eq!(lstar_degree(&s, 2), 6);
}

#[test]
fn l_degree_and_trivial_factor() {
    let s = rank_one();
    for chi in CharacterSpec::all_of_conductor(3, 1, 2) {
        let ls = l_star(&s, &chi, 2).unwrap();
        assert_eq!(ls.degree(), 6);
        let l = l_from_lstar(&s, &ls).unwrap();
        assert_eq!(l.degree(), 5);
        assert_eq!(l.tag, LTag::L);
    }
}

#[test]
fn corrupted_lstar_is_not_divisible() {
    let s = rank_one();
    let chi = CharacterSpec::new(3, 1, vec![1]).unwrap();
    let mut ls = l_star(&s, &chi, 0).unwrap();
    ls.coeffs[1] = ls.coeffs[1].add(&CyclotomicInt::one(3, 1));
    assert!(matches!(l_from_lstar(&s, &ls), Err(asw_core::Error::InexactDivision)));
}

#[test]
fn galois_conjugate_sums_are_conjugate() {
    let s = TowerSpec::standard_small();
    let chi = CharacterSpec::new(3, 2, vec![4, 2]).unwrap();
    for k in 1..=2 {
        let a = exp_sum(&s, &chi, k).unwrap();
        let b = exp_sum(&s, &chi.galois(2), k).unwrap();
        assert_eq!(a.galois(2), b);
    }
}

#[test]
fn bad_conductor_rejected() {
    assert!(CharacterSpec::new(3, 1, vec![3, 0]).is_err());
    assert!(CharacterSpec::new(3, 2, vec![3, 6]).is_err());
}

#[test]
fn cstar_from_l_starts_like_lstar() {
    let s = rank_one();
    let chi = CharacterSpec::new(3, 2, vec![1]).unwrap();
    let ls = l_star(&s, &chi, 0).unwrap();
    let c = c_star_from_l(&s, &ls, 2, 6);
    assert_eq!(c.tag, LTag::CstarTruncation);
    assert!(c.coeffs[0].congruent_mod_pk(&CyclotomicInt::one(3, 2), 6));
    // [s^1] of prod_i L*(q^i s) is c_1 (1 + q + q^2 + ...)
    let geometric: i64 = (0..6).map(|i| 3i64.pow(i)).sum();
    assert!(c.coeffs[1].congruent_mod_pk(&ls.coeffs[1].scale(&BigInt::from(geometric)), 6));
}
