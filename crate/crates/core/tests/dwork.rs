use asw_core::dwork::*;
use asw_core::mvseries::MvSeries;
use asw_core::tower::{TowerRings, TowerSpec};

#[test]
fn recurrence_holds_through_n40() {
    let s = TowerSpec::standard_small();
    let r = TowerRings::new(&s, 3).unwrap();
    let ec = expansion_coefficients_in(&r, 40, 20).unwrap();
    let rep = verify_recurrence(&ec, &r).unwrap();
    assert!(rep.pass(), "{rep:?}");
    assert_eq!(rep.checked_upto, 40);
}

#[test]
fn recurrence_at_three_two_ways() {
    let s = TowerSpec::from_prime_coeffs(3, 1, 1, &[0, 1, 1]).unwrap();
    let r = TowerRings::new(&s, 4).unwrap();
    let ec = expansion_coefficients_in(&r, 3, 3).unwrap();
    assert_eq!(ec.e[3].scale_int(3), recurrence_rhs(&ec, &r, 3).unwrap());
}

#[test]
fn corrupted_coefficient_is_caught() {
    let s = TowerSpec::standard_small();
    let r = TowerRings::new(&s, 3).unwrap();
    let mut ec = expansion_coefficients_in(&r, 12, 8).unwrap();
    let mut bad = ec.e[7].clone();
    let mut c = bad.coeff(&[2, 2]);
    c[0] = (c[0] + 1) % 27;
    bad.set_coeff(&[2, 2], &c);
    ec.e[7] = bad;
    let rep = verify_recurrence(&ec, &r).unwrap();
    assert_eq!(rep.failure.map(|f| f.0), Some(7));
}

#[test]
fn trivial_character_gives_one_minus_s() {
    let s = TowerSpec::standard_small();
    let cs = char_series(&s, 4, 3, 8).unwrap();
    let consts: Vec<Vec<u64>> = cs.w_t.iter().map(|w| w.coeff(&[0, 0])).collect();
    assert_eq!(consts, vec![vec![1], vec![26], vec![0], vec![0], vec![0]]);
}

#[test]
fn enlarging_k_changes_nothing() {
    let s = TowerSpec::standard_small();
    let r = TowerRings::new(&s, 3).unwrap();
    let base = char_series_with(&r, 3, 10, &CharSeriesOptions::default()).unwrap();
    let k = base.manifest.k;
    let big = char_series_with(&r, 3, 10, &CharSeriesOptions { k_override: Some(2 * k), ..Default::default() }).unwrap();
    assert_eq!(base.w_pi, big.w_pi);
}

#[test]
fn size_guard_reports_dimension() {
    let s = TowerSpec::standard_small();
    let r = TowerRings::new(&s, 2).unwrap();
    let e = char_series_with(&r, 3, 10, &CharSeriesOptions { k_override: None, size_limit: 4 }).unwrap_err();
    assert!(matches!(e, asw_core::Error::SizeGuard { limit: 4, .. }));
}

#[test]
fn non_teichmuller_basis_is_refused() {
    let mut s = TowerSpec::standard_small();
    s.basis = asw_core::tower::Basis::Explicit(vec![vec![1, 0], vec![1, 1]]);
    s.validate().unwrap();
    assert!(matches!(char_series(&s, 2, 2, 4).unwrap_err(), asw_core::Error::NonTeichmullerBasis(1)));
}

#[test]
fn goth_s_rank_two_is_galois_invariant() {
    let s = TowerSpec::standard_small();
    let r = TowerRings::new(&s, 4).unwrap();
    let g = goth_s(&r, 2).unwrap();
    assert_eq!(g.order(), Some(2));
    // default basis 1, w with w^2 = -1: (T1 + sigma(w) T2)(T1 + w T2) = T1^2 + T2^2
    let mut want = MvSeries::zero(&r.zp, 2, 2);
    want.set_coeff(&[2, 0], &[1]);
    want.set_coeff(&[0, 2], &[1]);
    assert_eq!(g, want);
}

#[test]
fn minor_first_entries() {
    let s = TowerSpec::from_prime_coeffs(3, 2, 1, &[0, 1, 1]).unwrap();
    let m1 = minor_mod_p(&s, 1, 6).unwrap();
    assert_eq!(m1.leading_exponent(), Some(0));
    let m2 = minor_mod_p(&s, 2, 6).unwrap();
    assert_eq!(m2.leading_exponent(), Some(1));
}

#[test]
fn minor_does_not_depend_on_rank() {
    let s1 = TowerSpec::from_prime_coeffs(3, 2, 1, &[0, 1, 1]).unwrap();
    let s2 = TowerSpec::from_prime_coeffs(3, 2, 2, &[0, 1, 1]).unwrap();
    for k in 1..=5 {
        let a = minor_mod_p(&s1, k, 12).unwrap();
        let b = minor_mod_p(&s2, k, 12).unwrap();
        assert_eq!(a, b, "k = {k}");
    }
}

#[test]
fn series_text_round_trip() {
    let s = TowerSpec::standard_small();
    let cs = char_series(&s, 3, 3, 8).unwrap();
    for t in [true, false] {
        let text = format!("# config-sha256 abc\n{}", cs.to_text(t));
        let back = CharSeries::from_text(&text).unwrap();
        assert_eq!(back.w_pi, cs.w_pi);
        assert_eq!(back.w_t, cs.w_t);
        assert_eq!(back.manifest, cs.manifest);
    }
}
