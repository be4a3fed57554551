//! Brute-force side: finite characters of `Z_{p^l}`, the sums `S*(k, chi)` in
//! `Z[zeta_{p^m}]`, and the polynomials `L*`, `L`, `C*` assembled from them.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring_tower::{CyclotomicInt, RingEmbedding, ZqElement, ZqRing};
use crate::tower::{TowerRings, TowerSpec};

/// Largest histogram (`p^{lm}` buckets) or character count accepted.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// `chi(x) = zeta_{p^m}^{sum_j b_j Tr(x c_j)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub p: u64,
    pub m: u32,
    pub b: Vec<u64>,
}

impl CharacterSpec {
    pub fn new(p: u64, m: u32, b: Vec<u64>) -> Result<Self> {
        let pm = p.pow(m);
        if b.iter().any(|&x| x >= pm) {
            return Err(Error::InvalidParameter(format!("character coordinates must lie in [0, {pm})")));
        }
        if m >= 1 && b.iter().all(|&x| x % p == 0) {
            return Err(Error::BadConductor { m });
        }
        Ok(CharacterSpec { p, m, b })
    }

    pub fn trivial(p: u64, ell: usize) -> Self {
        CharacterSpec { p, m: 0, b: vec![0; ell] }
    }

    pub fn ell(&self) -> usize {
        self.b.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.m == 0
    }

    /// All characters of conductor exactly `m`, lexicographic in `b`.
    pub fn all_of_conductor(p: u64, ell: usize, m: u32) -> Vec<Self> {
        if m == 0 {
            return vec![Self::trivial(p, ell)];
        }
        let pm = p.pow(m);
        let total = pm.pow(ell as u32);
        (0..total)
            .map(|mut idx| {
                let mut b = vec![0; ell];
                for j in (0..ell).rev() {
                    b[j] = idx % pm;
                    idx /= pm;
                }
                b
            })
            .filter(|b| b.iter().any(|&x| x % p != 0))
            .map(|b| CharacterSpec { p, m, b })
            .collect()
    }

    /// `t_j = chi(c_j^*) - 1 = zeta^{b_j} - 1`.
    pub fn t_coords(&self) -> Vec<CyclotomicInt> {
        let one = CyclotomicInt::one(self.p, self.m);
        self.b.iter().map(|&bj| CyclotomicInt::zeta_pow(self.p, self.m, bj as i64).sub(&one)).collect()
    }

    /// `chi^u`, i.e. `b -> u b`.
    pub fn galois(&self, u: u64) -> Self {
        let pm = self.p.pow(self.m);
        CharacterSpec { p: self.p, m: self.m, b: self.b.iter().map(|&x| (x * u) % pm.max(1)).collect() }
    }

    /// Exponent `sum_j b_j Tr_{Z_{p^l}/Z_p}(x c_j) mod p^m` for `x` in `Z_{p^l}` at precision `>= m`.
    pub fn exponent(&self, x: &ZqElement, c: &[ZqElement]) -> Result<u64> {
        let pm = self.p.pow(self.m);
        let mut e = 0u64;
        for (bj, cj) in self.b.iter().zip(c) {
            e = (e + bj * (x.mul(cj)?.trace_to_zp() % pm.max(1))) % pm.max(1);
        }
        Ok(e)
    }

    pub fn value(&self, x: &ZqElement, c: &[ZqElement]) -> Result<CyclotomicInt> {
        Ok(CyclotomicInt::zeta_pow(self.p, self.m, self.exponent(x, c)? as i64))
    }
}

/// Histogram over `F_{q^k}^x` of the trace vector
/// `(Tr_{q^k/p}(c_j f(omega(x))) mod p^m)_j`, from which every `S*(k, chi)`
/// of conductor `<= m` is a weighted sum of roots of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSumTable {
    pub p: u64,
    pub m: u32,
    pub k: usize,
    pub ell: usize,
    pub hist: Vec<u64>,
}

impl ExpSumTable {
    pub fn new(spec: &TowerSpec, m: u32, k: usize) -> Result<Self> {
        Self::with_budget(spec, m, k, DEFAULT_BUDGET)
    }

    pub fn with_budget(spec: &TowerSpec, m: u32, k: usize, budget: u64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidParameter("need m >= 1 and k >= 1".into()));
        }
        let p = spec.p;
        let pm = p.pow(m);
        let buckets = pm.checked_pow(spec.ell as u32).filter(|&b| b <= budget);
        let Some(buckets) = buckets else {
            return Err(Error::Budget(format!("p^(lm) histogram exceeds {budget} buckets")));
        };
        let rings = TowerRings::new(spec, m)?;
        let zk = ZqRing::new(p, spec.a * k, m)?;
        let emb = RingEmbedding::new(&rings.zq, &zk)?;
        let f: Vec<Vec<u64>> = rings.f_q.iter().map(|a| emb.map(a).map(|x| x.coords)).collect::<Result<_>>()?;
        let c: Vec<ZqElement> = rings.c_q.iter().map(|x| emb.map(x)).collect::<Result<_>>()?;
        let n = zk.degree();
        // tau[j][i] = Tr(c_j y^i)
        let tau: Vec<Vec<u64>> = c
            .iter()
            .map(|cj| {
                (0..n)
                    .map(|i| {
                        let mut y = zk.zero_raw();
                        y[i] = 1;
                        zk.trace_to_zp_raw(&zk.mul_raw(&cj.coords, &y))
                    })
                    .collect()
            })
            .collect();
        let order = zk.residue_field().order() - 1;
        let g = zk.teichmuller_raw(zk.residue_field().generator());
        let chunks = (rayon::current_num_threads() as u64 * 8).min(order).max(1);
        let hist = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let start = order * ci / chunks;
                let end = order * (ci + 1) / chunks;
                let mut h = vec![0u64; buckets as usize];
                let mut x = ZqElement::new(&zk, g.clone()).expect("reduced").pow(start).coords;
                for _ in start..end {
                    let mut fx = f[spec.d].clone();
                    for a in f[..spec.d].iter().rev() {
                        fx = zk.add_raw(&zk.mul_raw(&fx, &x), a);
                    }
                    let mut idx = 0u64;
                    for t in tau.iter().rev() {
                        let mut u = 0u128;
                        for (ti, fi) in t.iter().zip(&fx) {
                            u += *ti as u128 * *fi as u128;
                        }
                        idx = idx * pm + (u % pm as u128) as u64;
                    }
                    h[idx as usize] += 1;
                    x = zk.mul_raw(&x, &g);
                }
                h
            })
            .reduce(
                || vec![0u64; buckets as usize],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(ExpSumTable { p, m, k, ell: spec.ell, hist })
    }

    /// `S*(k, chi)` for `chi` of conductor `<= m`.
    pub fn sum(&self, chi: &CharacterSpec) -> CyclotomicInt {
        assert!(chi.m <= self.m && chi.ell() == self.ell, "character does not fit the table");
        let pm = self.p.pow(self.m);
        let pc = self.p.pow(chi.m);
        let mut by_exp = vec![0u64; pc as usize];
        for (mut idx, &cnt) in self.hist.iter().enumerate().map(|(i, c)| (i as u64, c)) {
            if cnt == 0 {
                continue;
            }
            let mut e = 0u64;
            for &bj in &chi.b {
                e = (e + bj * (idx % pm)) % pc;
                idx /= pm;
            }
            by_exp[e as usize] += cnt;
        }
        let mut wide = CyclotomicInt::zero(self.p, chi.m);
        for (e, &cnt) in by_exp.iter().enumerate() {
            if cnt > 0 {
                wide = wide.add(&CyclotomicInt::zeta_pow(self.p, chi.m, e as i64).scale(&BigInt::from(cnt)));
            }
        }
        wide
    }
}

/// `S*(k, chi) = sum_{x in F_{q^k}^x} chi(Tr_{q^k/p^l} f(omega(x)))`.
pub fn exp_sum(spec: &TowerSpec, chi: &CharacterSpec, k: usize) -> Result<CyclotomicInt> {
    if chi.is_trivial() {
        return Ok(CyclotomicInt::from_int(spec.p, 0, BigInt::from(spec.q()).pow(k as u32) - 1));
    }
    Ok(ExpSumTable::new(spec, chi.m, k)?.sum(chi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LTag {
    L,
    Lstar,
    CstarTruncation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPolynomial {
    pub tag: LTag,
    pub chi: CharacterSpec,
    pub coeffs: Vec<CyclotomicInt>,
}

impl LPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Header lines, then one line of power-basis coordinates per coefficient.
    pub fn to_text(&self, spec: &TowerSpec) -> String {
        let mut out = format!(
            "# spec {}\n# character {}\n# tag {:?}\n",
            serde_json::to_string(spec).expect("spec serializes"),
            serde_json::to_string(&self.chi).expect("character serializes"),
            self.tag
        );
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{i} : {}\n", c.to_text()));
        }
        out
    }
}

/// Expected degree of `L*(chi, s)`: `d p^{m-1}`.
pub fn lstar_degree(spec: &TowerSpec, m: u32) -> usize {
    spec.d * spec.p.pow(m - 1) as usize
}

/// Coefficients of `exp(sum_k S_k s^k / k)` from `S_1..S_n`.
pub fn exp_of_power_sums(sums: &[CyclotomicInt]) -> Result<Vec<CyclotomicInt>> {
    let (p, m) = (sums[0].p(), sums[0].conductor());
    let mut c = vec![CyclotomicInt::one(p, m)];
    for n in 1..=sums.len() {
        let mut acc = CyclotomicInt::zero(p, m);
        for k in 1..=n {
            acc = acc.add(&sums[k - 1].mul(&c[n - k]));
        }
        let nb = BigInt::from(n);
        if !acc.divisible_by(&nb) {
            return Err(Error::NonIntegral { degree: n });
        }
        c.push(CyclotomicInt::from_coords(p, m, acc.coords.iter().map(|x| x / &nb).collect()));
    }
    Ok(c)
}

/// Sums `S*(1..=kmax, chi)` for every character in `chis` (all of one conductor).
pub fn power_sums(spec: &TowerSpec, chis: &[CharacterSpec], kmax: usize) -> Result<Vec<Vec<CyclotomicInt>>> {
    let m = chis.iter().map(|c| c.m).max().unwrap_or(0);
    if m == 0 {
        return chis.iter().map(|c| (1..=kmax).map(|k| exp_sum(spec, c, k)).collect()).collect();
    }
    let tables: Vec<ExpSumTable> = (1..=kmax).map(|k| ExpSumTable::new(spec, m, k)).collect::<Result<_>>()?;
    Ok(chis.iter().map(|c| tables.iter().map(|t| t.sum(c)).collect()).collect())
}

/// `L*(chi, s)` through its expected degree, plus `extra` further degrees that must vanish.
pub fn l_star(spec: &TowerSpec, chi: &CharacterSpec, extra: usize) -> Result<LPolynomial> {
    let sums = power_sums(spec, std::slice::from_ref(chi), lstar_degree_checked(spec, chi)? + extra)?;
    l_star_from_sums(spec, chi, &sums[0])
}

fn lstar_degree_checked(spec: &TowerSpec, chi: &CharacterSpec) -> Result<usize> {
    if chi.is_trivial() {
        return Err(Error::InvalidParameter("L* of the trivial character is not a polynomial".into()));
    }
    Ok(lstar_degree(spec, chi.m))
}

pub fn l_star_from_sums(spec: &TowerSpec, chi: &CharacterSpec, sums: &[CyclotomicInt]) -> Result<LPolynomial> {
    let deg = lstar_degree_checked(spec, chi)?;
    let mut coeffs = exp_of_power_sums(sums)?;
    if let Some(k) = (deg + 1..coeffs.len()).find(|&k| !coeffs[k].is_zero()) {
        return Err(Error::DegreeExceeded { degree: k, expected: deg });
    }
    coeffs.resize(deg + 1, CyclotomicInt::zero(spec.p, chi.m));
    Ok(LPolynomial { tag: LTag::Lstar, chi: chi.clone(), coeffs })
}

/// `chi(Tr_{Q_q/Q_{p^l}} f(0))` as a power of `zeta`.
pub fn trivial_factor_exponent(spec: &TowerSpec, chi: &CharacterSpec) -> Result<u64> {
    if chi.is_trivial() {
        return Ok(0);
    }
    let rings = TowerRings::new(spec, chi.m)?;
    let pm = spec.p.pow(chi.m);
    let mut e = 0u64;
    for (bj, cj) in chi.b.iter().zip(&rings.c_q) {
        e = (e + bj * (cj.mul(&rings.f_q[0])?.trace_to_zp() % pm)) % pm;
    }
    Ok(e)
}

/// Divide `L*` by `1 - chi(Tr f(0)) s`.
pub fn l_from_lstar(spec: &TowerSpec, lstar: &LPolynomial) -> Result<LPolynomial> {
    let chi = &lstar.chi;
    let z = CyclotomicInt::zeta_pow(spec.p, chi.m, trivial_factor_exponent(spec, chi)? as i64);
    let deg = lstar.coeffs.len() - 1;
    let mut l: Vec<CyclotomicInt> = vec![CyclotomicInt::one(spec.p, chi.m)];
    for n in 1..deg {
        l.push(lstar.coeffs[n].add(&z.mul(&l[n - 1])));
    }
    if !lstar.coeffs[deg].add(&z.mul(&l[deg - 1])).is_zero() {
        return Err(Error::InexactDivision);
    }
    Ok(LPolynomial { tag: LTag::L, chi: chi.clone(), coeffs: l })
}

fn poly_mul_trunc(a: &[CyclotomicInt], b: &[CyclotomicInt], n: usize) -> Vec<CyclotomicInt> {
    let zero = CyclotomicInt::zero(a[0].p(), a[0].conductor());
    let mut out = vec![zero; n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// `w_0..w_kmax` of `prod_{i >= 0} L*(q^i s)`, coordinates reduced into `[0, p^P)`.
///
/// Factors with `a i >= P` are `1 mod p^P` and are skipped.
pub fn c_star_from_l(spec: &TowerSpec, lstar: &LPolynomial, kmax: usize, precision: u32) -> LPolynomial {
    let (p, m) = (spec.p, lstar.chi.m);
    let pm = BigInt::from(p).pow(precision);
    let reduce = |v: Vec<CyclotomicInt>| -> Vec<CyclotomicInt> {
        v.into_iter().map(|c| CyclotomicInt::from_coords(p, m, c.reduce_mod(&pm))).collect()
    };
    let q = BigInt::from(spec.q());
    let mut acc = vec![CyclotomicInt::one(p, m)];
    acc.resize(kmax + 1, CyclotomicInt::zero(p, m));
    let mut i = 0u32;
    while (spec.a as u32) * i < precision || i == 0 {
        let qi = q.pow(i);
        let mut scale = BigInt::one();
        let factor: Vec<CyclotomicInt> = lstar
            .coeffs
            .iter()
            .map(|c| {
                let out = c.scale(&scale);
                scale *= &qi;
                out
            })
            .collect();
        acc = reduce(poly_mul_trunc(&acc, &factor, kmax));
        i += 1;
    }
    LPolynomial { tag: LTag::CstarTruncation, chi: lstar.chi.clone(), coeffs: acc }
}

/// `Z(C_m, s) = prod_chi L(chi, s)` over all characters of `Z_{p^l}/p^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaProduct {
    /// Product over the nontrivial characters, an integer polynomial.
    pub numerator: Vec<BigInt>,
    /// Power-series coefficients of `numerator / (1 - q s)` through `s^kmax`.
    pub series: Vec<BigInt>,
}

pub fn zeta_product(spec: &TowerSpec, m: u32, kmax: usize, budget: u64) -> Result<ZetaProduct> {
    let p = spec.p;
    let count = p.checked_pow(spec.ell as u32 * m).filter(|&c| c <= budget);
    if count.is_none() {
        return Err(Error::Budget(format!("more than {budget} characters")));
    }
    let mut num = vec![CyclotomicInt::one(p, m)];
    for level in 1..=m {
        let chis = CharacterSpec::all_of_conductor(p, spec.ell, level);
        let deg = lstar_degree(spec, level);
        let sums = power_sums(spec, &chis, deg)?;
        let ls: Vec<LPolynomial> = chis
            .par_iter()
            .zip(sums.par_iter())
            .map(|(chi, s)| l_from_lstar(spec, &l_star_from_sums(spec, chi, s)?))
            .collect::<Result<_>>()?;
        for l in ls {
            let lifted: Vec<CyclotomicInt> = l.coeffs.iter().map(|c| c.embed(m)).collect();
            let n = num.len() + lifted.len() - 2;
            num = poly_mul_trunc(&num, &lifted, n);
        }
    }
    let mut numerator = Vec::with_capacity(num.len());
    for (deg, c) in num.iter().enumerate() {
        if c.coords[1..].iter().any(|x| !x.is_zero()) {
            return Err(Error::NonIntegral { degree: deg });
        }
        numerator.push(c.coords[0].clone());
    }
    let q = BigInt::from(spec.q());
    let mut series = Vec::with_capacity(kmax + 1);
    let mut prev = BigInt::zero();
    for k in 0..=kmax {
        let c = numerator.get(k).cloned().unwrap_or_default();
        prev = c + &q * &prev;
        series.push(prev.clone());
    }
    Ok(ZetaProduct { numerator, series })
}

/// Affine point count of `C_1` over `F_{q^k}` by direct enumeration:
/// `p^l #{x : Tr_{q^k/p^l} fbar(x) = 0}`.  Used only as a test oracle.
pub fn affine_points_level_one(spec: &TowerSpec, k: usize) -> Result<BigInt> {
    let rings = TowerRings::new(spec, 1)?;
    let zk = ZqRing::new(spec.p, spec.a * k, 1)?;
    let emb = RingEmbedding::new(&rings.zq, &zk)?;
    let f: Vec<Vec<u64>> = rings.f_q.iter().map(|a| emb.map(a).map(|x| x.coords)).collect::<Result<_>>()?;
    let field = Arc::clone(zk.residue_field());
    let sub = spec.ell;
    let mut hits = 0u64;
    for x in field.elements() {
        let mut fx = f[spec.d].clone();
        for a in f[..spec.d].iter().rev() {
            fx = field.add(&field.mul(&fx, &x), a);
        }
        let el = ZqElement::new(&zk, fx)?;
        if el.trace(sub)?.is_zero() {
            hits += 1;
        }
    }
    Ok(BigInt::from(spec.p.pow(spec.ell as u32)) * hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_one() -> TowerSpec {
        TowerSpec::from_prime_coeffs(3, 1, 1, &[0, 1, 1]).unwrap()
    }

    #[test]
    fn conductor_check() {
        assert_eq!(CharacterSpec::new(3, 2, vec![3, 6]).unwrap_err(), Error::BadConductor { m: 2 });
        assert!(CharacterSpec::new(3, 2, vec![3, 1]).is_ok());
        assert_eq!(CharacterSpec::all_of_conductor(3, 2, 1).len(), 8);
        assert_eq!(CharacterSpec::all_of_conductor(3, 2, 2).len(), 72);
    }

    #[test]
    fn trivial_sum_is_q_power_minus_one() {
        let s = TowerSpec::standard_small();
        let v = exp_sum(&s, &CharacterSpec::trivial(3, 2), 2).unwrap();
        assert_eq!(v.coords, vec![BigInt::from(80)]);
    }

    #[test]
    fn histogram_counts_every_unit() {
        let s = TowerSpec::standard_small();
        let t = ExpSumTable::new(&s, 1, 2).unwrap();
        assert_eq!(t.hist.iter().sum::<u64>(), 80);
    }

    #[test]
    fn rank_one_conductor_one_l_has_slope_half() {
        let s = rank_one();
        let chi = CharacterSpec::new(3, 1, vec![1]).unwrap();
        let ls = l_star(&s, &chi, 2).unwrap();
        assert_eq!(ls.degree(), 2);
        let l = l_from_lstar(&s, &ls).unwrap();
        assert_eq!(l.coeffs.len(), 2);
        assert_eq!(l.coeffs[1].val_q(1), crate::Valuation::Finite(num_rational::Ratio::new(1, 2)));
    }

    #[test]
    fn trivial_character_power_sums_give_rational_function() {
        // exp(sum (q^k - 1) s^k / k) = (1 - s) / (1 - q s)
        let s = rank_one();
        let sums: Vec<CyclotomicInt> = (1..=5).map(|k| exp_sum(&s, &CharacterSpec::trivial(3, 1), k).unwrap()).collect();
        let c = exp_of_power_sums(&sums).unwrap();
        let want: Vec<i64> = vec![1, 2, 6, 18, 54, 162];
        assert_eq!(c.iter().map(|x| x.coords[0].clone()).collect::<Vec<_>>(), want.into_iter().map(BigInt::from).collect::<Vec<_>>());
    }
}
