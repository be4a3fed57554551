//! One checker per claim, each returning a serializable [`VerifyReport`].
//!
//! Checkers come in two halves: a driver that runs the pipelines, and an
//! `*_on` / `*_witness` function that only inspects data, so corrupted inputs
//! can be fed to the second half directly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, phi_prime_power};
use crate::charsum::{c_star_from_l, l_from_lstar, l_star_from_sums, lstar_degree, power_sums, CharacterSpec, LPolynomial};
use crate::dwork::{
    build_block, char_series_with, expansion_coefficients_in, goth_s, lambda, minor_mod_p, truncation_size, verify_recurrence,
    CharSeries, CharSeriesOptions, LinearFormSeries,
};
use crate::error::{Error, Result};
use crate::linalg::det;
use crate::mvseries::{artin_hasse, MvSeries};
use crate::polygon::{hodge_comparison_q, q_adic_polygon, slope_pattern_check, val_q_mod};
use crate::ring_tower::{teichmuller, CyclotomicInt, ZqElement, ZqRing};
use crate::tower::{Basis, TowerRings, TowerSpec};
use crate::valuation::Valuation;

type Q = Ratio<i64>;

pub const HODGE_BOUND: &str = "hodge-bound";
pub const LEADING_TERM: &str = "leading-term";
pub const RANK_INDEPENDENCE: &str = "rank-independence";
pub const BASIS_INDEPENDENCE: &str = "basis-independence";
pub const ADMISSIBLE_LOCUS: &str = "admissible-locus";
pub const ORACLE_EQUIVALENCE: &str = "oracle-equivalence";
pub const SLOPE_CLUSTERING: &str = "slope-clustering";
pub const LFUNCTION_SLOPES: &str = "lfunction-slopes";
pub const CHARSERIES_HODGE: &str = "charseries-hodge";
pub const RECURRENCE: &str = "recurrence";
pub const INCREMENTAL_BOUND: &str = "incremental-bound";
pub const TRUNCATION_SUFFICIENCY: &str = "truncation-sufficiency";
pub const ARTIN_HASSE_INTEGRALITY: &str = "artin-hasse-integrality";
pub const TEICHMULLER_FIXED_POINT: &str = "teichmuller-fixed-point";

pub const CLAIMS: &[&str] = &[
    ADMISSIBLE_LOCUS,
    ARTIN_HASSE_INTEGRALITY,
    BASIS_INDEPENDENCE,
    CHARSERIES_HODGE,
    HODGE_BOUND,
    INCREMENTAL_BOUND,
    LEADING_TERM,
    LFUNCTION_SLOPES,
    ORACLE_EQUIVALENCE,
    RANK_INDEPENDENCE,
    RECURRENCE,
    SLOPE_CLUSTERING,
    TEICHMULLER_FIXED_POINT,
    TRUNCATION_SUFFICIENCY,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub index: String,
    pub data: String,
}

impl Witness {
    fn new(index: impl Into<String>, data: impl Into<String>) -> Self {
        Witness { index: index.into(), data: data.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxdeg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub characters: Vec<CharacterSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub claim_id: String,
    pub spec: TowerSpec,
    pub parameters: Parameters,
    pub verdict: Verdict,
    /// Number of individual assertions evaluated.
    pub checked: usize,
    pub witnesses: Vec<Witness>,
}

impl VerifyReport {
    fn new(claim_id: &str, spec: &TowerSpec, parameters: Parameters) -> Self {
        VerifyReport {
            claim_id: claim_id.to_string(),
            spec: spec.clone(),
            parameters,
            verdict: Verdict::Pass,
            checked: 0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, w: Option<Witness>) {
        self.checked += 1;
        if let Some(w) = w {
            self.witnesses.push(w);
        }
    }

    fn finish(mut self) -> Self {
        self.verdict = if self.witnesses.is_empty() { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Fixed-width table, one row per report, ordered by claim id.
pub fn summary_table(reports: &[VerifyReport]) -> String {
    let mut rows: Vec<&VerifyReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    let mut out = format!("{:<24} {:<7} {:>8}  {}\n", "claim", "verdict", "checked", "first witness");
    for r in rows {
        let w = r.witnesses.first().map(|w| format!("{}: {}", w.index, w.data)).unwrap_or_default();
        let v = if r.passed() { "pass" } else { "FAIL" };
        out.push_str(&format!("{:<24} {:<7} {:>8}  {}\n", r.claim_id, v, r.checked, w));
    }
    out
}

fn params(precision: u32, maxdeg: usize, kmax: usize) -> Parameters {
    Parameters { precision: Some(precision), maxdeg: Some(maxdeg), kmax: Some(kmax), ..Default::default() }
}

fn fmt_q(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn fmt_val(v: &Valuation) -> String {
    match v {
        Valuation::Finite(q) => fmt_q(q),
        Valuation::Infinite => "inf".into(),
    }
}

// ---------------------------------------------------------------- Dwork side

fn series_for(spec: &TowerSpec, kmax: usize, precision: u32, maxdeg: usize, k: Option<usize>) -> Result<CharSeries> {
    let rings = TowerRings::new(spec, precision)?;
    char_series_with(&rings, kmax, maxdeg, &CharSeriesOptions { k_override: k, ..Default::default() })
}

/// `w_k(T)` has no terms of total degree below `ceil(lambda_k)` mod `p^M`.
pub fn check_hodge_bound(spec: &TowerSpec, kmax: usize, precision: u32, maxdeg: usize) -> Result<VerifyReport> {
    let cs = series_for(spec, kmax, precision, maxdeg, None)?;
    Ok(check_hodge_bound_on(&cs))
}

pub fn check_hodge_bound_on(cs: &CharSeries) -> VerifyReport {
    let m = &cs.manifest;
    let mut p = params(m.precision, m.maxdeg, m.kmax);
    p.k = Some(m.k);
    let mut rep = VerifyReport::new(HODGE_BOUND, &m.spec, p);
    for (k, w) in cs.w_t.iter().enumerate() {
        let l = lambda(&m.spec, k).ceil().to_integer() as usize;
        let bad = w.terms().find(|(e, _)| (e.iter().sum::<u32>() as usize) < l);
        rep.record(bad.map(|(e, c)| Witness::new(format!("k={k}"), format!("monomial {e:?} coefficient {c:?} below degree {l}"))));
    }
    rep.finish()
}

/// Whether `lambda_k` is an integer not exceeding the truncation degree.
pub fn lambda_fits(spec: &TowerSpec, k: usize, maxdeg: usize) -> bool {
    let l = lambda(spec, k);
    l.is_integer() && l.to_integer() as usize <= maxdeg
}

/// `k = nd, nd + 1` for `n` in `ns`.
pub fn leading_indices(d: usize, ns: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    ns.flat_map(|n| [n * d, n * d + 1]).filter(|&k| k > 0).collect()
}

/// `w_k = u 𝔖^{lambda_k/l} mod (p I^{lambda_k} + I^{lambda_k + 1})` with `u` a unit.
pub fn check_leading_term(spec: &TowerSpec, ns: std::ops::RangeInclusive<usize>, precision: u32, maxdeg: usize) -> Result<VerifyReport> {
    let ks = leading_indices(spec.d, ns);
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let cs = series_for(spec, kmax, precision, maxdeg, None)?;
    let rings = TowerRings::new(spec, precision)?;
    let g = goth_s(&rings, maxdeg)?;
    Ok(check_leading_term_on(&cs, &g, &ks))
}

/// The scalar `u` with `w_k = u 𝔖^{lambda_k/l}` in degree `lambda_k` mod `p`, or a witness.
pub fn leading_unit(w: &MvSeries, g: &MvSeries, ell: usize, lam: usize) -> std::result::Result<u64, String> {
    let p = w.ring.p();
    if lam > w.maxdeg() {
        return Err(format!("truncation degree {} below lambda = {lam}", w.maxdeg()));
    }
    if let Some((e, c)) = w.terms().find(|(e, _)| (e.iter().sum::<u32>() as usize) < lam) {
        return Err(format!("monomial {e:?} coefficient {c:?} below degree {lam}"));
    }
    let gp = g.pow((lam / ell) as u64);
    let t = &w.table;
    let range = t.deg_start[lam]..t.deg_start[lam + 1];
    let Some(r) = range.clone().find(|&i| !gp.coeff_at(i)[0].is_multiple_of(p)) else {
        return Err("goth_S power vanishes mod p in degree lambda".into());
    };
    let u = (w.coeff_at(r)[0] % p) * inv_mod(gp.coeff_at(r)[0] % p, p).expect("unit") % p;
    if u == 0 {
        return Err(format!("u = 0 mod p at reference monomial {:?}", t.exps[r]));
    }
    for i in range {
        if !(w.coeff_at(i)[0] + p * p - u * (gp.coeff_at(i)[0] % p)).is_multiple_of(p) {
            return Err(format!("monomial {:?} breaks w = {u} * goth_S^{} mod p", t.exps[i], lam / ell));
        }
    }
    Ok(u)
}

pub fn check_leading_term_on(cs: &CharSeries, g: &MvSeries, ks: &[usize]) -> VerifyReport {
    let m = &cs.manifest;
    let mut p = params(m.precision, m.maxdeg, m.kmax);
    p.k = Some(m.k);
    p.extra.insert("indices".into(), format!("{ks:?}"));
    let mut rep = VerifyReport::new(LEADING_TERM, &m.spec, p);
    for &k in ks {
        let lam = lambda(&m.spec, k);
        let Some(w) = cs.w_t.get(k) else {
            rep.record(Some(Witness::new(format!("k={k}"), "beyond kmax")));
            continue;
        };
        if !lam.is_integer() || !(lam / m.spec.ell as i64).is_integer() {
            rep.record(Some(Witness::new(format!("k={k}"), format!("lambda = {} not a multiple of l", fmt_q(&lam)))));
            continue;
        }
        let lam = lam.to_integer() as usize;
        let res = leading_unit(w, g, m.spec.ell, lam);
        rep.record(res.as_ref().err().map(|e| Witness::new(format!("k={k}"), e.clone())));
        // u a unit forces val_I(w_k) = lambda_k exactly
        let vi = w.val_i();
        rep.record((res.is_ok() && vi != Some(lam)).then(|| Witness::new(format!("k={k}"), format!("val_I = {vi:?}, lambda = {lam}"))));
    }
    rep.finish()
}

/// First index where two linear-form series differ.
pub fn linear_form_difference(a: &LinearFormSeries, b: &LinearFormSeries) -> Option<usize> {
    let n = a.coeffs.len().max(b.coeffs.len());
    (0..n).find(|&i| a.coeffs.get(i) != b.coeffs.get(i))
}

/// Leading minors of `N` mod `p` agree as series in `sum_j cbar_j pi_j` for ranks `l` and `1`.
pub fn check_rank_independence(spec_hi: &TowerSpec, spec_lo: &TowerSpec, kmax: usize, maxdeg: usize) -> Result<VerifyReport> {
    if spec_hi.p != spec_lo.p || spec_hi.a != spec_lo.a || spec_hi.d != spec_lo.d {
        return Err(Error::InvalidParameter("rank comparison needs equal p, a and d".into()));
    }
    let mut p = params(1, maxdeg, kmax);
    p.extra.insert("rank_one_spec".into(), serde_json::to_string(spec_lo).expect("spec serializes"));
    let mut rep = VerifyReport::new(RANK_INDEPENDENCE, spec_hi, p);
    let results: Vec<(Result<LinearFormSeries>, Result<LinearFormSeries>)> =
        (1..=kmax).into_par_iter().map(|k| (minor_mod_p(spec_hi, k, maxdeg), minor_mod_p(spec_lo, k, maxdeg))).collect();
    for (k, (a, b)) in (1..=kmax).zip(results) {
        let w = match (a, b) {
            (Ok(a), Ok(b)) => linear_form_difference(&a, &b).map(|i| {
                Witness::new(format!("k={k}"), format!("coefficient of X^{i}: {:?} vs {:?}", a.coeffs.get(i), b.coeffs.get(i)))
            }),
            (Err(Error::NotInLinearForm { monomial }), _) | (_, Err(Error::NotInLinearForm { monomial })) => {
                Some(Witness::new(format!("k={k}"), format!("not a series in the linear form at {monomial:?}")))
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        rep.record(w);
    }
    Ok(rep.finish())
}

/// `n e_n` against the recurrence right-hand side for `n <= nmax`.
pub fn check_recurrence(spec: &TowerSpec, nmax: usize, precision: u32, maxdeg: usize) -> Result<VerifyReport> {
    let rings = TowerRings::new(spec, precision)?;
    let ec = expansion_coefficients_in(&rings, nmax, maxdeg)?;
    let r = verify_recurrence(&ec, &rings)?;
    let mut p = params(precision, maxdeg, 0);
    p.kmax = None;
    p.extra.insert("nmax".into(), nmax.to_string());
    let mut rep = VerifyReport::new(RECURRENCE, spec, p);
    for n in 1..=nmax {
        let bad = r.failure.as_ref().filter(|f| f.0 == n);
        rep.record(bad.map(|(n, m)| Witness::new(format!("n={n}"), format!("sides differ at monomial {m:?}"))));
    }
    Ok(rep.finish())
}

/// Entry bounds on `sigma^i(N)` for every twist, plus the minor bound
/// `val_I >= sum (p m_i - n_i) / d` on random minors.
pub fn check_incremental_bound(spec: &TowerSpec, k: usize, precision: u32, maxdeg: usize, minors: usize, seed: u64) -> Result<VerifyReport> {
    let rings = TowerRings::new(spec, precision)?;
    let p = spec.p as usize;
    let nmax = ((k - 1) * p).min(spec.d * maxdeg);
    let ec = expansion_coefficients_in(&rings, nmax, maxdeg)?;
    let mut par = params(precision, maxdeg, 0);
    par.kmax = None;
    par.k = Some(k);
    par.extra.insert("minors".into(), minors.to_string());
    par.extra.insert("seed".into(), seed.to_string());
    let mut rep = VerifyReport::new(INCREMENTAL_BOUND, spec, par);
    let mats: Vec<Vec<Vec<MvSeries>>> = (0..spec.a).map(|t| build_block(&ec, k, k, t).map(|m| m.entries)).collect::<Result<_>>()?;
    for (t, mat) in mats.iter().enumerate() {
        for (mi, row) in mat.iter().enumerate() {
            for (ni, e) in row.iter().enumerate() {
                let need = (mi * p).saturating_sub(ni).div_ceil(spec.d);
                let ok = e.order().is_none_or(|o| o >= need);
                rep.record((!ok).then(|| Witness::new(format!("twist={t} ({mi},{ni})"), format!("order {:?} below {need}", e.order()))));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = &mats[0];
    let samples: Vec<(Vec<usize>, Vec<usize>)> = (0..minors)
        .map(|_| {
            let size = rng.gen_range(1..=4.min(k));
            (sample_sorted(&mut rng, k, size), sample_sorted(&mut rng, k, size))
        })
        .collect();
    let results: Vec<Option<Witness>> = samples
        .par_iter()
        .map(|(rows, cols)| {
            let sub: Vec<Vec<MvSeries>> = rows.iter().map(|&r| cols.iter().map(|&c| n[r][c].clone()).collect()).collect();
            let dv = det(&sub).expect("nonempty");
            let total: i64 = rows.iter().zip(cols).map(|(&m, &c)| (p * m) as i64 - c as i64).sum();
            let need = Q::new(total, spec.d as i64).ceil().to_integer().max(0) as usize;
            let ok = dv.order().is_none_or(|o| o >= need);
            (!ok).then(|| Witness::new(format!("rows {rows:?} cols {cols:?}"), format!("order {:?} below {need}", dv.order())))
        })
        .collect();
    for w in results {
        rep.record(w);
    }
    Ok(rep.finish())
}

fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = rand::seq::index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Doubling `K` leaves `w_0..w_kmax` unchanged.
pub fn check_truncation_sufficiency(spec: &TowerSpec, kmax: usize, precision: u32, maxdeg: usize) -> Result<VerifyReport> {
    let k = truncation_size(spec, kmax, maxdeg);
    let base = series_for(spec, kmax, precision, maxdeg, Some(k))?;
    let big = series_for(spec, kmax, precision, maxdeg, Some(2 * k))?;
    let mut par = params(precision, maxdeg, kmax);
    par.k = Some(k);
    let mut rep = VerifyReport::new(TRUNCATION_SUFFICIENCY, spec, par);
    for (i, (a, b)) in base.w_pi.iter().zip(&big.w_pi).enumerate() {
        let diff = (0..a.table.len()).find(|&j| a.coeff_at(j) != b.coeff_at(j));
        rep.record(diff.map(|j| Witness::new(format!("k={i}"), format!("K={k} and K={} differ at {:?}", 2 * k, a.table.exps[j]))));
    }
    Ok(rep.finish())
}

/// Artin-Hasse coefficients through `maxdeg` are `p`-integral.
pub fn check_artin_hasse(primes: &[u64], maxdeg: usize) -> VerifyReport {
    let spec = TowerSpec::standard_small();
    let mut par = Parameters { maxdeg: Some(maxdeg), ..Default::default() };
    par.extra.insert("primes".into(), format!("{primes:?}"));
    let mut rep = VerifyReport::new(ARTIN_HASSE_INTEGRALITY, &spec, par);
    for &p in primes {
        let t = artin_hasse(p, maxdeg, 1);
        for (n, c) in t.exact.iter().enumerate() {
            let ok = crate::arith::v_p_bigint(c.denom(), p) == Some(0);
            rep.record((!ok).then(|| Witness::new(format!("p={p} n={n}"), format!("denominator {}", c.denom()))));
        }
    }
    rep.finish()
}

/// `omega(x)^{p^n} = omega(x)` and `omega(x) = x mod p` on every element of `F_{p^n}`.
pub fn check_teichmuller(fields: &[(u64, usize)], precision: u32) -> Result<VerifyReport> {
    let spec = TowerSpec::standard_small();
    let mut par = Parameters { precision: Some(precision), ..Default::default() };
    par.extra.insert("fields".into(), format!("{fields:?}"));
    let mut rep = VerifyReport::new(TEICHMULLER_FIXED_POINT, &spec, par);
    for &(p, n) in fields {
        let ring = ZqRing::new(p, n, precision)?;
        let q = ring.residue_field().order();
        for x in ring.residue_field().elements() {
            let w = teichmuller(&ring, &x);
            let ok = w.pow(q) == w && w.residue() == x;
            rep.record((!ok).then(|| Witness::new(format!("F_{p}^{n}"), format!("element {x:?}"))));
        }
    }
    Ok(rep.finish())
}

// -------------------------------------------------------- basis changes

/// Elementary generators of `GL_l(Z_p)` acting on rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Elementary {
    Swap(usize, usize),
    Scale(usize, u64),
    /// Row `i` += `u` times row `j`.
    Add(usize, usize, u64),
}

pub fn apply_elementary(a: &mut [Vec<u64>], op: &Elementary) {
    match *op {
        Elementary::Swap(i, j) => a.swap(i, j),
        Elementary::Scale(i, u) => a[i].iter_mut().for_each(|x| *x *= u),
        Elementary::Add(i, j, u) => {
            let rj = a[j].clone();
            a[i].iter_mut().zip(rj).for_each(|(x, y)| *x += u * y);
        }
    }
}

pub fn random_elementary(rng: &mut ChaCha8Rng, ell: usize, p: u64) -> Elementary {
    let unit = |rng: &mut ChaCha8Rng| loop {
        let u = rng.gen_range(1..p * p);
        if u % p != 0 {
            break u;
        }
    };
    if ell == 1 {
        return Elementary::Scale(0, unit(rng));
    }
    let i = rng.gen_range(0..ell);
    let j = (i + rng.gen_range(1..ell)) % ell;
    match rng.gen_range(0..3) {
        0 => Elementary::Swap(i, j),
        1 => Elementary::Scale(i, unit(rng)),
        _ => Elementary::Add(i, j, rng.gen_range(1..p * p)),
    }
}

/// The tower with basis `c' = A c`.
pub fn changed_spec(rings: &TowerRings, a: &[Vec<u64>]) -> Result<TowerSpec> {
    let c = &rings.dual.c;
    let zl = &rings.zl;
    let m = zl.modulus_int();
    let mut out = Vec::new();
    for row in a {
        let mut acc = zl.zero_raw();
        for (coef, cj) in row.iter().zip(c) {
            let s: Vec<u64> = cj.coords.iter().map(|&x| crate::arith::mul_mod(x, coef % m, m)).collect();
            acc = zl.add_raw(&acc, &s);
        }
        out.push(acc.into_iter().map(|x| x as i64).collect());
    }
    let mut s = rings.spec.clone();
    s.basis = Basis::Explicit(out);
    Ok(s)
}

/// Compare `𝔖` for the basis `A_basis c` with the old `𝔖` under
/// `1 + T_j = prod_i (1 + T'_i)^{A_subs[i][j]}`; the two matrices coincide in a real check.
pub fn basis_change_witness(rings: &TowerRings, a_basis: &[Vec<u64>], a_subs: &[Vec<u64>]) -> Result<Option<String>> {
    let ell = rings.spec.ell;
    let new_spec = changed_spec(rings, a_basis)?;
    let new_rings = TowerRings::new(&new_spec, rings.precision)?;
    let deg = ell + 1;
    let g_old = goth_s(rings, deg)?;
    let g_new = goth_s(&new_rings, deg)?;
    let zp = &rings.zp;
    let one = MvSeries::one(zp, ell, deg);
    let subs: Vec<MvSeries> = (0..ell)
        .map(|j| {
            let mut acc = one.clone();
            for (i, row) in a_subs.iter().enumerate() {
                let base = one.add(&MvSeries::var(zp, ell, deg, i))?;
                acc = acc.mul(&base.pow(row[j]))?;
            }
            acc.sub(&one)
        })
        .collect::<Result<_>>()?;
    let moved = g_old.compose(&subs)?;
    let p = zp.p();
    let t = &moved.table;
    for i in 0..t.deg_start[ell + 1] {
        let (x, y) = (moved.coeff_at(i)[0], g_new.coeff_at(i)[0]);
        let deg_i = t.degree_of(i);
        let bad = if deg_i < ell { x != 0 || y != 0 } else { x % p != y % p };
        if bad {
            return Ok(Some(format!("monomial {:?}: transformed {x} vs recomputed {y}", t.exps[i])));
        }
    }
    Ok(None)
}

/// `𝔖` is basis-independent mod `p I^l + I^{l+1}` over random words in the elementary generators.
pub fn check_basis_independence(spec: &TowerSpec, trials: usize, seed: u64, precision: u32) -> Result<VerifyReport> {
    let rings = TowerRings::new(spec, precision)?;
    let mut par = Parameters { precision: Some(precision), ..Default::default() };
    par.extra.insert("trials".into(), trials.to_string());
    par.extra.insert("seed".into(), seed.to_string());
    let mut rep = VerifyReport::new(BASIS_INDEPENDENCE, spec, par);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let len = rng.gen_range(1..=3);
        let ops: Vec<Elementary> = (0..len).map(|_| random_elementary(&mut rng, spec.ell, spec.p)).collect();
        let mut a: Vec<Vec<u64>> = (0..spec.ell).map(|i| (0..spec.ell).map(|j| u64::from(i == j)).collect()).collect();
        for op in &ops {
            apply_elementary(&mut a, op);
        }
        let w = basis_change_witness(&rings, &a, &a)?;
        rep.record(w.map(|w| Witness::new(format!("trial={trial} ops={ops:?}"), w)));
    }
    Ok(rep.finish())
}

// ------------------------------------------------------- admissible locus

/// Element of `Z_{p^l}[zeta_{p^m}]`, stored as `sum_r y^r x_r` with `x_r` in
/// `Z[zeta_{p^m}]`; coordinates are kept reduced mod `p^M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtCyclotomic {
    pub parts: Vec<CyclotomicInt>,
}

impl ExtCyclotomic {
    pub fn from_cyclotomic(ell: usize, x: &CyclotomicInt) -> Self {
        let mut parts = vec![CyclotomicInt::zero(x.p(), x.conductor()); ell];
        parts[0] = x.clone();
        ExtCyclotomic { parts }
    }

    pub fn from_zl(x: &ZqElement, p: u64, m: u32) -> Self {
        ExtCyclotomic { parts: x.coords.iter().map(|&c| CyclotomicInt::from_int(p, m, c)).collect() }
    }

    fn reduced(parts: Vec<CyclotomicInt>, pm: &BigInt) -> Self {
        ExtCyclotomic { parts: parts.into_iter().map(|c| CyclotomicInt::from_coords(c.p(), c.conductor(), c.reduce_mod(pm))).collect() }
    }

    pub fn add(&self, other: &Self, zl: &ZqRing) -> Self {
        let pm = BigInt::from(zl.modulus_int());
        Self::reduced(self.parts.iter().zip(&other.parts).map(|(a, b)| a.add(b)).collect(), &pm)
    }

    pub fn mul(&self, other: &Self, zl: &ZqRing) -> Self {
        let ell = self.parts.len();
        let (p, m) = (self.parts[0].p(), self.parts[0].conductor());
        let mut out = vec![CyclotomicInt::zero(p, m); ell];
        for (r, a) in self.parts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (s, b) in other.parts.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a.mul(b);
                let mut yr = zl.zero_raw();
                yr[r] = 1;
                let mut ys = zl.zero_raw();
                ys[s] = 1;
                for (t, &c) in zl.mul_raw(&yr, &ys).iter().enumerate() {
                    if c != 0 {
                        out[t] = out[t].add(&ab.scale(&BigInt::from(c)));
                    }
                }
            }
        }
        Self::reduced(out, &BigInt::from(zl.modulus_int()))
    }

    /// `val_q`, minimised over the `y`-components; infinite once everything vanishes mod `p^M`.
    pub fn val_q(&self, a: u32, precision: u32) -> Valuation {
        self.parts.iter().map(|c| val_q_mod(c, a, precision)).min().unwrap_or(Valuation::Infinite)
    }
}

/// `𝔖(t) = prod_{i=1}^{l} sum_j sigma^i(c_j) t_j` evaluated in `Z_{p^l}[zeta]`.
pub fn goth_s_value(rings: &TowerRings, t: &[ExtCyclotomic]) -> ExtCyclotomic {
    let zl = &rings.zl;
    let (p, m) = (t[0].parts[0].p(), t[0].parts[0].conductor());
    let mut acc = ExtCyclotomic::from_zl(&ZqElement::one(zl), p, m);
    for i in 1..=rings.spec.ell {
        let mut lin = ExtCyclotomic::from_zl(&ZqElement::zero(zl), p, m);
        for (cj, tj) in rings.dual.c.iter().zip(t) {
            lin = lin.add(&ExtCyclotomic::from_zl(&cj.frobenius_pow(i), p, m).mul(tj, zl), zl);
        }
        acc = acc.mul(&lin, zl);
    }
    acc
}

/// Witness text unless `val_q(𝔖(t)) = l min_j val_q(t_j)`, and (when given)
/// `min_j val_q(t_j)` equals `expected_min`.
pub fn admissibility_witness(rings: &TowerRings, t: &[ExtCyclotomic], expected_min: Option<Q>) -> Option<String> {
    let a = rings.spec.a as u32;
    let prec = rings.precision;
    let min = t.iter().map(|x| x.val_q(a, prec)).min().unwrap_or(Valuation::Infinite);
    if let Some(e) = expected_min {
        if min != Valuation::Finite(e) {
            return Some(format!("min val_q(t_j) = {}, expected {}", fmt_val(&min), fmt_q(&e)));
        }
    }
    let Valuation::Finite(mq) = min else {
        return Some("all coordinates vanish".into());
    };
    let rhs = mq * rings.spec.ell as i64;
    let lhs = goth_s_value(rings, t).val_q(a, prec);
    match lhs {
        Valuation::Finite(v) if v == rhs => None,
        Valuation::Finite(v) if v < rhs => Some(format!("val_q(goth_S(t)) = {} below l * min = {}", fmt_q(&v), fmt_q(&rhs))),
        v => Some(format!("strict inequality: val_q(goth_S(t)) = {} > l * min = {}", fmt_val(&v), fmt_q(&rhs))),
    }
}

/// `t_1 = -t_2 c_2 / c_1`, `t_2 = zeta - 1`: a point where the `sigma^l` factor of `𝔖` vanishes.
pub fn near_kernel_point(rings: &TowerRings, m: u32) -> Result<Vec<ExtCyclotomic>> {
    let ell = rings.spec.ell;
    if ell < 2 {
        return Err(Error::InvalidParameter("near-kernel point needs l >= 2".into()));
    }
    let p = rings.spec.p;
    let zl = &rings.zl;
    let c = &rings.dual.c;
    let ratio = c[1].mul(&c[0].inverse()?)?.neg();
    let pi = ExtCyclotomic::from_cyclotomic(ell, &CyclotomicInt::pi(p, m));
    let mut t = vec![ExtCyclotomic::from_zl(&ZqElement::zero(zl), p, m); ell];
    t[1] = pi.clone();
    t[0] = ExtCyclotomic::from_zl(&ratio, p, m).mul(&pi, zl);
    Ok(t)
}

/// `min_j val_q(t_j) = 1/(a p^{m-1}(p-1))` at a character of conductor `m`.
pub fn expected_min_val(spec: &TowerSpec, m: u32) -> Q {
    Q::new(1, spec.a as i64 * phi_prime_power(spec.p, m) as i64)
}

pub fn check_admissible_locus(spec: &TowerSpec, chars: &[CharacterSpec], precision: u32) -> Result<VerifyReport> {
    let rings = TowerRings::new(spec, precision)?;
    let par = Parameters { precision: Some(precision), characters: chars.to_vec(), ..Default::default() };
    let mut rep = VerifyReport::new(ADMISSIBLE_LOCUS, spec, par);
    for chi in chars {
        if chi.is_trivial() {
            return Err(Error::InvalidParameter("admissibility needs nontrivial characters".into()));
        }
        let t: Vec<ExtCyclotomic> = chi.t_coords().iter().map(|x| ExtCyclotomic::from_cyclotomic(spec.ell, x)).collect();
        let w = admissibility_witness(&rings, &t, Some(expected_min_val(spec, chi.m)));
        rep.record(w.map(|w| Witness::new(format!("chi m={} b={:?}", chi.m, chi.b), w)));
    }
    Ok(rep.finish())
}

// ----------------------------------------------------------- oracle side

/// `L*` for each character, sharing exponential-sum tables per conductor.
pub fn lstar_batch(spec: &TowerSpec, chars: &[CharacterSpec], extra: usize) -> Result<Vec<LPolynomial>> {
    let mut out: Vec<Option<LPolynomial>> = vec![None; chars.len()];
    let mut levels: Vec<u32> = chars.iter().map(|c| c.m).collect();
    levels.sort_unstable();
    levels.dedup();
    for m in levels {
        if m == 0 {
            return Err(Error::InvalidParameter("L* of the trivial character is not a polynomial".into()));
        }
        let idx: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].m == m).collect();
        let group: Vec<CharacterSpec> = idx.iter().map(|&i| chars[i].clone()).collect();
        let sums = power_sums(spec, &group, lstar_degree(spec, m) + extra)?;
        for ((i, chi), s) in idx.iter().zip(&group).zip(&sums) {
            out[*i] = Some(l_star_from_sums(spec, chi, s)?);
        }
    }
    Ok(out.into_iter().map(|x| x.expect("filled")).collect())
}

/// Dwork-route `w_k(chi)` and the comparison precision `M'`.
pub fn dwork_values(cs: &CharSeries, chi: &CharacterSpec) -> Result<(Vec<CyclotomicInt>, u32)> {
    let spec = &cs.manifest.spec;
    let t = chi.t_coords();
    let mut out = Vec::new();
    let mut mp = cs.manifest.precision;
    for w in &cs.w_t {
        let (v, err) = w.specialize(&t, spec.a as u32)?;
        if let Valuation::Finite(e) = err {
            mp = mp.min((e * spec.a as i64).floor().to_integer().max(0) as u32);
        }
        out.push(v);
    }
    Ok((out, mp))
}

/// First `k` where the two value lists differ mod `p^{M'}`.
pub fn first_mismatch(dw: &[CyclotomicInt], oracle: &[CyclotomicInt], precision: u32) -> Option<usize> {
    let pm = BigInt::from(dw.first()?.p()).pow(precision);
    (0..dw.len().max(oracle.len())).find(|&k| match (dw.get(k), oracle.get(k)) {
        (Some(a), Some(b)) => a.reduce_mod(&pm) != b.reduce_mod(&pm),
        _ => true,
    })
}

pub fn check_oracle_equivalence(spec: &TowerSpec, chars: &[CharacterSpec], kmax: usize, precision: u32, maxdeg: usize) -> Result<VerifyReport> {
    let cs = series_for(spec, kmax, precision, maxdeg, None)?;
    let lstars = lstar_batch(spec, chars, 0)?;
    let mut par = params(precision, maxdeg, kmax);
    par.k = Some(cs.manifest.k);
    par.characters = chars.to_vec();
    let mut rep = VerifyReport::new(ORACLE_EQUIVALENCE, spec, par);
    for (chi, ls) in chars.iter().zip(&lstars) {
        let (dw, mp) = dwork_values(&cs, chi)?;
        rep.parameters.extra.insert(format!("M' m={} b={:?}", chi.m, chi.b), mp.to_string());
        if mp == 0 {
            rep.record(Some(Witness::new(format!("chi b={:?}", chi.b), "truncation error leaves no usable precision")));
            continue;
        }
        let oracle = c_star_from_l(spec, ls, kmax, mp).coeffs;
        let bad = first_mismatch(&dw, &oracle, mp);
        rep.record(bad.map(|k| Witness::new(format!("chi m={} b={:?} k={k}", chi.m, chi.b), format!("Dwork and oracle differ mod p^{mp}"))));
    }
    Ok(rep.finish())
}

/// `val_q(w_k(chi))` for `k <= kmax` from the oracle, at a precision large
/// enough that every unresolved value lies above the Hodge bound at `kmax`.
pub fn oracle_cstar_valuations(spec: &TowerSpec, lstar: &LPolynomial, kmax: usize) -> Vec<Valuation> {
    let m = lstar.chi.m;
    let top = Q::new((kmax * kmax.saturating_sub(1)) as i64, 2 * spec.d as i64 * spec.p.pow(m - 1) as i64);
    let precision = (top * spec.a as i64).ceil().to_integer() as u32 + 2;
    let cs = c_star_from_l(spec, lstar, kmax, precision);
    cs.coeffs.iter().map(|c| val_q_mod(c, spec.a as u32, precision)).collect()
}

/// The largest `k <= kmax` with `k = 0, 1 mod d`.
pub fn vertex_cutoff(d: usize, kmax: usize) -> usize {
    (0..=kmax).rev().find(|k| k % d <= 1).unwrap_or(0)
}

/// Slopes of `C*(chi)` divided by `val_q(𝔖(t))`, in units of `a(p-1)/l`, sit at
/// integers (once each) and in `[n + 1/d, n + (d-1)/d]` (`d - 1` times each).
pub fn slope_clustering_witness(vals: &[Valuation], goth_val: Q, spec: &TowerSpec) -> Option<String> {
    let pts: Vec<(i64, Valuation)> = vals.iter().enumerate().map(|(k, v)| (k as i64, *v)).collect();
    let poly = match crate::polygon::lower_hull(&pts) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    if poly.vertices.last().map(|v| v.0) != Some(vals.len() as i64 - 1) {
        return Some(format!("index {} is not a vertex", vals.len() - 1));
    }
    let unit = goth_val * Q::new(spec.a as i64 * (spec.p as i64 - 1), spec.ell as i64);
    let d = spec.d as i64;
    let mut points: BTreeMap<i64, usize> = BTreeMap::new();
    let mut intervals: BTreeMap<i64, usize> = BTreeMap::new();
    for s in poly.slope_list() {
        let r = s / unit;
        let n = r.floor().to_integer();
        let frac = r - Q::from_integer(n);
        if frac.is_integer() {
            *points.entry(n).or_default() += 1;
        } else if frac >= Q::new(1, d) && frac <= Q::new(d - 1, d) {
            *intervals.entry(n).or_default() += 1;
        } else {
            return Some(format!("slope {} gives ratio {} outside every cluster", fmt_q(&s), fmt_q(&r)));
        }
    }
    let total = vals.len() as i64 - 1;
    let full = total / d;
    for n in 0..full {
        let (pc, ic) = (points.get(&n).copied().unwrap_or(0), intervals.get(&n).copied().unwrap_or(0));
        if pc != 1 || ic as i64 != d - 1 {
            return Some(format!("cluster {n}: {pc} integer slopes and {ic} interval slopes"));
        }
    }
    if total % d == 1 && points.get(&full) != Some(&1) {
        return Some(format!("cluster {full}: missing integer slope"));
    }
    None
}

pub fn check_slope_clustering(spec: &TowerSpec, chars: &[CharacterSpec], kmax: usize) -> Result<VerifyReport> {
    let lstars = lstar_batch(spec, chars, 0)?;
    let kcut = vertex_cutoff(spec.d, kmax);
    let gprec = spec.ell as u32 + 2;
    let rings = TowerRings::new(spec, gprec)?;
    let mut par = Parameters { kmax: Some(kcut), characters: chars.to_vec(), ..Default::default() };
    par.extra.insert("goth_s_precision".into(), gprec.to_string());
    let mut rep = VerifyReport::new(SLOPE_CLUSTERING, spec, par);
    for (chi, ls) in chars.iter().zip(&lstars) {
        let vals = oracle_cstar_valuations(spec, ls, kcut);
        let t: Vec<ExtCyclotomic> = chi.t_coords().iter().map(|x| ExtCyclotomic::from_cyclotomic(spec.ell, x)).collect();
        let w = match goth_s_value(&rings, &t).val_q(spec.a as u32, gprec) {
            Valuation::Finite(g) => slope_clustering_witness(&vals, g, spec),
            Valuation::Infinite => Some("goth_S(t) vanishes to working precision".into()),
        };
        rep.record(w.map(|w| Witness::new(format!("chi m={} b={:?}", chi.m, chi.b), w)));
    }
    Ok(rep.finish())
}

/// Degree, forced valuations at `nd - 1` and `nd`, and the block pattern of `L(chi, s)`.
pub fn lfunction_witness(spec: &TowerSpec, l: &LPolynomial) -> Option<String> {
    let m = l.chi.m;
    let pm1 = spec.p.pow(m - 1) as i64;
    let deg = lstar_degree(spec, m) - 1;
    if l.coeffs.len() != deg + 1 || l.coeffs[deg].is_zero() {
        return Some(format!("degree {} instead of {deg}", l.degree()));
    }
    let poly = match q_adic_polygon(&l.coeffs, spec.a as u32) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    let d = spec.d as i64;
    for n in 1..=pm1 {
        for (idx, num) in [(n * d - 1, n * (n * d - 1)), (n * d, n * (n * d + 1))] {
            if idx as usize > deg {
                continue;
            }
            let want = Q::new(num, 2 * pm1);
            let got = l.coeffs[idx as usize].val_q(spec.a as u32);
            if got != Valuation::Finite(want) {
                return Some(format!("val_q(c_{idx}) = {}, expected {}", fmt_val(&got), fmt_q(&want)));
            }
            if poly.height_at(idx) != Some(want) {
                return Some(format!("polygon misses ({idx}, {})", fmt_q(&want)));
            }
        }
    }
    let pat = slope_pattern_check(&poly, spec.d, m, spec.p);
    pat.witness.map(|(b, j, s)| format!("block {b} position {j}: slope {}", fmt_q(&s)))
}

/// The `L`-polynomial values and Newton polygons for each character.
pub fn check_lfunction_slopes(spec: &TowerSpec, chars: &[CharacterSpec], extra: usize) -> Result<VerifyReport> {
    let lstars = lstar_batch(spec, chars, extra)?;
    let mut par = Parameters { characters: chars.to_vec(), ..Default::default() };
    par.extra.insert("extra_degrees".into(), extra.to_string());
    let mut rep = VerifyReport::new(LFUNCTION_SLOPES, spec, par);
    for (chi, ls) in chars.iter().zip(&lstars) {
        let w = match l_from_lstar(spec, ls) {
            Ok(l) => lfunction_witness(spec, &l),
            Err(e) => Some(e.to_string()),
        };
        rep.record(w.map(|w| Witness::new(format!("chi m={} b={:?}", chi.m, chi.b), w)));
    }
    Ok(rep.finish())
}

/// `val_q(w_k(chi)) >= k(k-1)/(2 d p^{m-1})`, with equality at `k = nd, nd + 1`.
pub fn check_charseries_hodge(spec: &TowerSpec, chars: &[CharacterSpec], kmax: usize) -> Result<VerifyReport> {
    let lstars = lstar_batch(spec, chars, 0)?;
    let par = Parameters { kmax: Some(kmax), characters: chars.to_vec(), ..Default::default() };
    let mut rep = VerifyReport::new(CHARSERIES_HODGE, spec, par);
    for (chi, ls) in chars.iter().zip(&lstars) {
        let vals = oracle_cstar_valuations(spec, ls, kmax);
        let h = hodge_comparison_q(&vals, spec.d, chi.m, spec.p);
        rep.record(h.first_violation.map(|k| Witness::new(format!("chi m={} b={:?} k={k}", chi.m, chi.b), format!("val_q = {}", fmt_val(&vals[k])))));
    }
    Ok(rep.finish())
}

// ------------------------------------------------------------------ suite

/// Parameters shared by the default suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub precision: u32,
    pub maxdeg: usize,
    pub kmax: usize,
    /// Characters for the oracle-side claims; `None` means every character of conductor 1 and 2.
    #[serde(default)]
    pub characters: Option<Vec<CharacterSpec>>,
    pub seed: u64,
    pub trials: usize,
    pub minor_kmax: usize,
    pub minor_maxdeg: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { precision: 4, maxdeg: 23, kmax: 5, characters: None, seed: 1, trials: 50, minor_kmax: 8, minor_maxdeg: 30 }
    }
}

fn default_characters(spec: &TowerSpec) -> Vec<CharacterSpec> {
    let mut v = CharacterSpec::all_of_conductor(spec.p, spec.ell, 1);
    v.extend(CharacterSpec::all_of_conductor(spec.p, spec.ell, 2));
    v
}

/// Run one claim with suite defaults.
pub fn run_claim(claim: &str, spec: &TowerSpec, sp: &SuiteParams) -> Result<VerifyReport> {
    let chars = sp.characters.clone().unwrap_or_else(|| default_characters(spec));
    let conductor_one: Vec<CharacterSpec> = chars.iter().filter(|c| c.m == 1).cloned().collect();
    let (m, dg, km) = (sp.precision, sp.maxdeg, sp.kmax);
    match claim {
        HODGE_BOUND => check_hodge_bound(spec, km, m, dg),
        LEADING_TERM => {
            let nmax = km.saturating_sub(1) / spec.d;
            check_leading_term(spec, 1..=nmax.max(1), m, dg)
        }
        RANK_INDEPENDENCE => {
            let mut lo = spec.clone();
            lo.ell = 1;
            lo.basis = Basis::Teichmuller(vec![vec![1]]);
            check_rank_independence(spec, &lo, sp.minor_kmax, sp.minor_maxdeg)
        }
        BASIS_INDEPENDENCE => check_basis_independence(spec, sp.trials, sp.seed, m),
        ADMISSIBLE_LOCUS => check_admissible_locus(spec, &chars, m.max(spec.ell as u32 + 2)),
        ORACLE_EQUIVALENCE => check_oracle_equivalence(spec, &conductor_one, km.min(4), m, dg),
        SLOPE_CLUSTERING => check_slope_clustering(spec, &chars, 2 * spec.d * spec.p as usize + 1),
        LFUNCTION_SLOPES => check_lfunction_slopes(spec, &chars, 0),
        CHARSERIES_HODGE => check_charseries_hodge(spec, &chars, km),
        RECURRENCE => check_recurrence(spec, 40, m, 20),
        INCREMENTAL_BOUND => check_incremental_bound(spec, 16, m, dg.min(20), 50, sp.seed),
        TRUNCATION_SUFFICIENCY => check_truncation_sufficiency(spec, km.min(4), m, dg.min(15)),
        ARTIN_HASSE_INTEGRALITY => Ok(check_artin_hasse(&[2, 3, 5, 7], 50)),
        TEICHMULLER_FIXED_POINT => check_teichmuller(&[(2, 3), (3, 2), (3, 3), (5, 2)], m),
        other => Err(Error::InvalidParameter(format!("unknown claim id {other:?}; known: {}", CLAIMS.join(", ")))),
    }
}

/// Run claims in parallel; reports come back ordered by claim id.
pub fn run_suite(claims: &[&str], spec: &TowerSpec, sp: &SuiteParams) -> Result<Vec<VerifyReport>> {
    let mut reports: Vec<VerifyReport> = claims.par_iter().map(|c| run_claim(c, spec, sp)).collect::<Result<_>>()?;
    reports.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    Ok(reports)
}
