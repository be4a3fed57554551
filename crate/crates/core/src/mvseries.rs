//! Truncated multivariate power series in `pi_1..pi_l` over `Z_q / p^M`.
//!
//! Storage is dense and graded: monomials of total degree `<= D` are ordered
//! by (total degree, ascending lexicographic exponent), and each monomial owns
//! `n` consecutive coordinates of the coefficient ring.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::{AddAssign, Mul};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use crate::arith::{phi_prime_power, reduce_bigint, v_p_bigint};
use crate::error::{Error, Result};
use crate::ring_tower::{CyclotomicInt, ZqRing};
use crate::valuation::Valuation;

#[derive(Debug)]
pub struct MonomialTable {
    pub nvars: usize,
    pub maxdeg: usize,
    pub exps: Vec<Vec<u32>>,
    /// `deg_start[e]` is the index of the first monomial of degree `e`;
    /// length `maxdeg + 2`.
    pub deg_start: Vec<usize>,
    degs: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
    /// `prod[i][j]` = index of `exps[i] + exps[j]`, for all `j` with
    /// `deg(i) + deg(j) <= maxdeg`.
    prod: Vec<Vec<u32>>,
}

fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    if nvars == 1 {
        return vec![vec![deg]];
    }
    let mut out = Vec::new();
    for first in 0..=deg {
        for mut rest in monomials_of_degree(nvars - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>;

impl MonomialTable {
    /// Shared table for `(nvars, maxdeg)`.
    pub fn get(nvars: usize, maxdeg: usize) -> Arc<MonomialTable> {
        static CACHE: OnceLock<TableCache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap();
        guard.entry((nvars, maxdeg)).or_insert_with(|| Arc::new(Self::build(nvars, maxdeg))).clone()
    }

    fn build(nvars: usize, maxdeg: usize) -> Self {
        assert!(nvars >= 1, "need at least one variable");
        let mut exps = Vec::new();
        let mut deg_start = Vec::new();
        let mut degs = Vec::new();
        for e in 0..=maxdeg {
            deg_start.push(exps.len());
            for m in monomials_of_degree(nvars, e as u32) {
                exps.push(m);
                degs.push(e);
            }
        }
        deg_start.push(exps.len());
        let index: HashMap<Vec<u32>, usize> = exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let prod = exps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let lim = deg_start[maxdeg - degs[i] + 1];
                exps[..lim]
                    .iter()
                    .map(|b| {
                        let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        index[&s] as u32
                    })
                    .collect()
            })
            .collect();
        MonomialTable { nvars, maxdeg, exps, deg_start, degs, index, prod }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degs[i]
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// Truncated power series with coefficients in a [`ZqRing`].
#[derive(Clone)]
pub struct MvSeries {
    pub table: Arc<MonomialTable>,
    pub ring: Arc<ZqRing>,
    coeffs: Vec<u64>,
}

impl PartialEq for MvSeries {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) && self.ring == other.ring && self.coeffs == other.coeffs
    }
}

impl Eq for MvSeries {}

impl std::fmt::Debug for MvSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl MvSeries {
    pub fn zero(ring: &Arc<ZqRing>, nvars: usize, maxdeg: usize) -> Self {
        let table = MonomialTable::get(nvars, maxdeg);
        let coeffs = vec![0; table.len() * ring.degree()];
        MvSeries { table, ring: ring.clone(), coeffs }
    }

    pub fn constant(ring: &Arc<ZqRing>, nvars: usize, maxdeg: usize, c: &[u64]) -> Self {
        let mut s = Self::zero(ring, nvars, maxdeg);
        s.set_coeff_at(0, c);
        s
    }

    pub fn one(ring: &Arc<ZqRing>, nvars: usize, maxdeg: usize) -> Self {
        Self::constant(ring, nvars, maxdeg, &ring.one_raw())
    }

    /// The variable `pi_j` (0-based `j`).
    pub fn var(ring: &Arc<ZqRing>, nvars: usize, maxdeg: usize, j: usize) -> Self {
        let mut s = Self::zero(ring, nvars, maxdeg);
        if maxdeg >= 1 {
            let mut e = vec![0; nvars];
            e[j] = 1;
            s.set_coeff(&e, &ring.one_raw());
        }
        s
    }

    pub fn zero_like(&self) -> Self {
        MvSeries { table: self.table.clone(), ring: self.ring.clone(), coeffs: vec![0; self.coeffs.len()] }
    }

    pub fn one_like(&self) -> Self {
        let mut s = self.zero_like();
        s.set_coeff_at(0, &self.ring.one_raw());
        s
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars
    }

    pub fn maxdeg(&self) -> usize {
        self.table.maxdeg
    }

    fn stride(&self) -> usize {
        self.ring.degree()
    }

    pub fn raw_coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff_at(&self, i: usize) -> &[u64] {
        let n = self.stride();
        &self.coeffs[i * n..(i + 1) * n]
    }

    pub fn set_coeff_at(&mut self, i: usize, c: &[u64]) {
        let n = self.stride();
        let m = self.ring.modulus_int();
        for (dst, &src) in self.coeffs[i * n..(i + 1) * n].iter_mut().zip(c) {
            *dst = src % m;
        }
    }

    /// Coefficient of `pi^e`; zero beyond the truncation.
    pub fn coeff(&self, e: &[u32]) -> Vec<u64> {
        match self.table.index_of(e) {
            Some(i) => self.coeff_at(i).to_vec(),
            None => self.ring.zero_raw(),
        }
    }

    /// Set the coefficient of `pi^e`; terms beyond the truncation are dropped.
    pub fn set_coeff(&mut self, e: &[u32], c: &[u64]) {
        if let Some(i) = self.table.index_of(e) {
            self.set_coeff_at(i, c);
        }
    }

    /// Iterate `(exponent, coefficient)` over nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &[u64])> + '_ {
        (0..self.table.len())
            .map(move |i| (self.table.exps[i].as_slice(), self.coeff_at(i)))
            .filter(|(_, c)| c.iter().any(|&x| x != 0))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.table, &other.table) || self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "series ({} vars, deg {}, {:?}) vs ({} vars, deg {}, {:?})",
                self.nvars(),
                self.maxdeg(),
                self.ring,
                other.nvars(),
                other.maxdeg(),
                other.ring
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let m = self.ring.modulus_int();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| {
                let s = a + b;
                if s >= m {
                    s - m
                } else {
                    s
                }
            })
            .collect();
        Ok(MvSeries { table: self.table.clone(), ring: self.ring.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let m = self.ring.modulus_int();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| if a >= b { a - b } else { a + m - b }).collect();
        Ok(MvSeries { table: self.table.clone(), ring: self.ring.clone(), coeffs })
    }

    pub fn neg(&self) -> Self {
        let m = self.ring.modulus_int();
        let coeffs = self.coeffs.iter().map(|&a| if a == 0 { 0 } else { m - a }).collect();
        MvSeries { table: self.table.clone(), ring: self.ring.clone(), coeffs }
    }

    /// Multiply every coefficient by the ring element `c`.
    pub fn scale(&self, c: &[u64]) -> Self {
        let n = self.stride();
        let mut out = self.zero_like();
        for i in 0..self.table.len() {
            let x = self.coeff_at(i);
            if x.iter().any(|&v| v != 0) {
                out.coeffs[i * n..(i + 1) * n].copy_from_slice(&self.ring.mul_raw(x, c));
            }
        }
        out
    }

    pub fn scale_int(&self, c: i64) -> Self {
        let mut k = self.ring.zero_raw();
        k[0] = crate::arith::reduce_i64(c, self.ring.modulus_int());
        self.scale(&k)
    }

    fn first_nonzero(&self) -> Option<usize> {
        let n = self.stride();
        self.coeffs.iter().position(|&x| x != 0).map(|p| p / n)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (Some(ia), Some(ib)) = (self.first_nonzero(), other.first_nonzero()) else {
            return Ok(self.zero_like());
        };
        let m = self.ring.modulus_int() as u128;
        let w = 2 * self.stride() - 1;
        // bound on the number of products landing in one accumulator slot
        let terms = (self.table.len() * self.stride()) as u128;
        if (m - 1) * (m - 1) * terms < u64::MAX as u128 {
            Ok(self.mul_kernel::<u64>(other, ia, ib, w))
        } else {
            Ok(self.mul_kernel::<u128>(other, ia, ib, w))
        }
    }

    fn mul_kernel<A>(&self, other: &Self, ia: usize, ib: usize, w: usize) -> Self
    where
        A: Copy + Default + AddAssign + Mul<Output = A> + From<u64> + Into<u128>,
    {
        let n = self.stride();
        let t = &self.table;
        let mut acc = vec![A::default(); t.len() * w];
        for i in ia..t.len() {
            let a = &self.coeffs[i * n..(i + 1) * n];
            if a.iter().all(|&x| x == 0) {
                continue;
            }
            let row = &t.prod[i];
            if ib >= row.len() {
                // every later monomial has larger degree, so nothing fits
                break;
            }
            for (j, &k) in row.iter().enumerate().skip(ib) {
                let b = &other.coeffs[j * n..(j + 1) * n];
                let slot = &mut acc[k as usize * w..(k as usize + 1) * w];
                for (s, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    let xa = A::from(x);
                    for (u, &y) in b.iter().enumerate() {
                        slot[s + u] += xa * A::from(y);
                    }
                }
            }
        }
        let mut out = self.zero_like();
        let mut wide = vec![0u128; w];
        for k in 0..t.len() {
            let slot = &acc[k * w..(k + 1) * w];
            for (dst, &src) in wide.iter_mut().zip(slot) {
                *dst = src.into();
            }
            if wide.iter().all(|&x| x == 0) {
                continue;
            }
            let red = self.ring.reduce_wide(&mut wide);
            out.coeffs[k * n..(k + 1) * n].copy_from_slice(&red);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        acc
    }

    /// `self += c * pi^e * other`, truncated at the common degree bound.
    pub fn add_mul_monomial(&mut self, other: &Self, e: &[u32], c: &[u64]) -> Result<()> {
        self.check(other)?;
        let Some(im) = self.table.index_of(e) else {
            return Ok(());
        };
        let n = self.stride();
        let lim = self.table.deg_start[self.maxdeg() - self.table.degree_of(im) + 1];
        for i in 0..lim {
            let src = other.coeff_at(i);
            if src.iter().all(|&x| x == 0) {
                continue;
            }
            let t = self.table.prod[im][i] as usize;
            let prod = self.ring.mul_raw(src, c);
            let sum = self.ring.add_raw(&self.coeffs[t * n..(t + 1) * n], &prod);
            self.coeffs[t * n..(t + 1) * n].copy_from_slice(&sum);
        }
        Ok(())
    }

    /// Apply `sigma^k` to every coefficient.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        if k.is_multiple_of(self.stride()) {
            return self.clone();
        }
        let n = self.stride();
        let mut out = self.zero_like();
        for i in 0..self.table.len() {
            let c = self.coeff_at(i);
            if c.iter().any(|&x| x != 0) {
                out.coeffs[i * n..(i + 1) * n].copy_from_slice(&self.ring.frobenius_pow_raw(c, k));
            }
        }
        out
    }

    /// Least total degree carrying a coefficient nonzero mod `p^M`.
    pub fn order(&self) -> Option<usize> {
        self.first_nonzero().map(|i| self.table.degree_of(i))
    }

    /// `val_I`: least total degree with a coefficient nonzero mod `p`; `None`
    /// stands for `+inf`.
    pub fn val_i(&self) -> Option<usize> {
        let p = self.ring.p();
        let n = self.stride();
        self.coeffs.iter().position(|&x| x % p != 0).map(|pos| self.table.degree_of(pos / n))
    }

    /// Nonzero terms of total degree exactly `deg`.
    pub fn homogeneous_part(&self, deg: usize) -> Vec<(Vec<u32>, Vec<u64>)> {
        if deg > self.maxdeg() {
            return Vec::new();
        }
        (self.table.deg_start[deg]..self.table.deg_start[deg + 1])
            .map(|i| (self.table.exps[i].clone(), self.coeff_at(i).to_vec()))
            .filter(|(_, c)| c.iter().any(|&x| x != 0))
            .collect()
    }

    /// The same series with the terms of degree `> d` dropped.
    pub fn truncate(&self, d: usize) -> Self {
        let mut out = self.clone();
        if d < self.maxdeg() {
            let start = self.table.deg_start[d + 1] * self.stride();
            out.coeffs[start..].iter_mut().for_each(|x| *x = 0);
        }
        out
    }

    /// Re-truncate into a table of another degree bound (drops or zero-pads).
    pub fn with_maxdeg(&self, maxdeg: usize) -> Self {
        let mut out = Self::zero(&self.ring, self.nvars(), maxdeg);
        for (e, c) in self.terms() {
            out.set_coeff(e, c);
        }
        out
    }

    /// Map coefficients into another ring through `f`.
    pub fn map_coeffs(&self, ring: &Arc<ZqRing>, f: impl Fn(&[u64]) -> Vec<u64>) -> Self {
        let mut out = Self::zero(ring, self.nvars(), self.maxdeg());
        for i in 0..self.table.len() {
            let c = self.coeff_at(i);
            if c.iter().any(|&x| x != 0) {
                out.set_coeff_at(i, &f(c));
            }
        }
        out
    }

    /// Substitute `pi_j -> subs[j]`; each substitute must have zero constant term.
    pub fn compose(&self, subs: &[MvSeries]) -> Result<Self> {
        if subs.len() != self.nvars() {
            return Err(Error::InvalidParameter("compose needs one substitute per variable".into()));
        }
        let first = subs.first().ok_or_else(|| Error::InvalidParameter("no variables".into()))?;
        for s in subs {
            first.check(s)?;
            if s.order() == Some(0) {
                return Err(Error::InvalidParameter("substitute has a constant term".into()));
            }
        }
        if first.ring != self.ring {
            return Err(Error::RingMismatch("compose across coefficient rings".into()));
        }
        let d = first.maxdeg();
        // powers[j][k] = subs[j]^k for k <= d
        let powers: Vec<Vec<MvSeries>> = subs
            .iter()
            .map(|s| {
                let mut v = vec![s.one_like()];
                for k in 1..=d {
                    let next = v[k - 1].mul(s).unwrap();
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = first.zero_like();
        for (e, c) in self.terms() {
            let deg: u32 = e.iter().sum();
            if deg as usize > d {
                continue;
            }
            let mut term = powers[0][e[0] as usize].clone();
            for j in 1..e.len() {
                if e[j] > 0 {
                    term = term.mul(&powers[j][e[j] as usize])?;
                }
            }
            out = out.add(&term.scale(c))?;
        }
        Ok(out)
    }

    /// Evaluate at points `t_j` of `Z[zeta_{p^m}]`, reducing mod `p^M`.
    /// Returns the value and a lower bound (in `val_q` units, `q = p^a`) for
    /// the valuation of the truncation error.
    pub fn specialize(&self, t: &[CyclotomicInt], a: u32) -> Result<(CyclotomicInt, Valuation)> {
        if t.len() != self.nvars() {
            return Err(Error::InvalidParameter("one point per variable required".into()));
        }
        let p = self.ring.p();
        let m = t[0].conductor();
        let mut min_val = Valuation::Infinite;
        for (j, tj) in t.iter().enumerate() {
            let v = tj.val_q(a);
            if v <= Valuation::int(0) || tj.conductor() != m {
                return Err(Error::NonPositiveValuation { index: j });
            }
            min_val = min_val.min(v);
        }
        let pm = BigInt::from(self.ring.modulus_int());
        let reduce = |x: CyclotomicInt| CyclotomicInt::from_coords(p, m, x.reduce_mod(&pm));
        let d = self.maxdeg();
        let powers: Vec<Vec<CyclotomicInt>> = t
            .iter()
            .map(|tj| {
                let mut v = vec![CyclotomicInt::one(p, m)];
                for k in 1..=d {
                    let next = reduce(v[k - 1].mul(tj));
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = CyclotomicInt::zero(p, m);
        for (e, c) in self.terms() {
            if c[1..].iter().any(|&x| x != 0) {
                return Err(Error::NotZp { monomial: e.to_vec() });
            }
            let mut term = CyclotomicInt::from_int(p, m, c[0]);
            for (j, &ej) in e.iter().enumerate() {
                if ej > 0 {
                    term = reduce(term.mul(&powers[j][ej as usize]));
                }
            }
            acc = acc.add(&term);
        }
        let err = match min_val {
            Valuation::Finite(v) => Valuation::Finite(v * Ratio::from_integer(d as i64 + 1)),
            Valuation::Infinite => Valuation::Infinite,
        };
        Ok((reduce(acc), err))
    }

    /// Canonical text form: header lines starting with `#`, then one line per
    /// nonzero monomial `e_1 ... e_l : c_0 ... c_{n-1}`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let modulus: Vec<String> = self.ring.modulus().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(
            s,
            "# nvars={} maxdeg={} p={} precision={} modulus={}",
            self.nvars(),
            self.maxdeg(),
            self.ring.p(),
            self.ring.precision(),
            modulus.join(",")
        );
        for (e, c) in self.terms() {
            let es: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{} : {}", es.join(" "), cs.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty series text"))?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for kv in header.trim_start_matches('#').split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed header"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing header field {k}")));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(&format!("bad header field {k}"))) };
        let nvars = num("nvars")? as usize;
        let maxdeg = num("maxdeg")? as usize;
        let p = num("p")?;
        let precision = num("precision")? as u32;
        let modulus: Vec<u64> =
            get("modulus")?.split(',').map(|c| c.parse().map_err(|_| bad("bad modulus"))).collect::<Result<_>>()?;
        let field = crate::ring_tower::FieldDesc::with_modulus(p, modulus)?;
        let ring = ZqRing::over(field, precision)?;
        let mut s = Self::zero(&ring, nvars, maxdeg);
        for line in lines.filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (es, cs) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let e: Vec<u32> = es.split_whitespace().map(|x| x.parse().map_err(|_| bad("bad exponent"))).collect::<Result<_>>()?;
            let c: Vec<u64> =
                cs.split_whitespace().map(|x| x.parse().map_err(|_| bad("bad coefficient"))).collect::<Result<_>>()?;
            if e.len() != nvars || c.len() != ring.degree() {
                return Err(bad("wrong arity"));
            }
            let i = s.table.index_of(&e).ok_or_else(|| bad("monomial beyond truncation"))?;
            s.set_coeff_at(i, &c);
        }
        Ok(s)
    }
}

/// Coefficients of the Artin-Hasse exponential `E(x) = exp(sum_i x^{p^i}/p^i)`.
#[derive(Clone, Debug)]
pub struct ArtinHasseTable {
    pub p: u64,
    pub exact: Vec<BigRational>,
    /// `exact` reduced mod `p^M`.
    pub reduced: Vec<u64>,
    pub modulus: u64,
}

/// `E(x)` through degree `maxdeg`, via `n E_n = sum_{p^i <= n} E_{n - p^i}`.
/// Panics if a coefficient is not `p`-integral, which would be an arithmetic
/// bug rather than a user error.
pub fn artin_hasse(p: u64, maxdeg: usize, precision: u32) -> ArtinHasseTable {
    let mut exact: Vec<BigRational> = vec![BigRational::one()];
    for n in 1..=maxdeg {
        let mut s = BigRational::zero();
        let mut pi = 1usize;
        while pi <= n {
            s += &exact[n - pi];
            pi *= p as usize;
        }
        exact.push(s / BigRational::from_integer(BigInt::from(n)));
    }
    let modulus = p.pow(precision);
    let reduced = exact
        .iter()
        .enumerate()
        .map(|(n, c)| {
            assert!(v_p_bigint(c.denom(), p) == Some(0), "Artin-Hasse coefficient {n} is not p-integral");
            let num = reduce_bigint(c.numer(), modulus);
            let den = reduce_bigint(c.denom(), modulus);
            let inv = crate::arith::inv_mod(den, modulus).expect("denominator prime to p");
            crate::arith::mul_mod(num, inv, modulus)
        })
        .collect();
    ArtinHasseTable { p, exact, reduced, modulus }
}

fn univariate(ring: &Arc<ZqRing>, nvars: usize, maxdeg: usize, j: usize, coeffs: &[u64]) -> MvSeries {
    let mut s = MvSeries::zero(ring, nvars, maxdeg);
    for (k, &c) in coeffs.iter().enumerate().take(maxdeg + 1) {
        let mut e = vec![0; nvars];
        e[j] = k as u32;
        let mut cc = ring.zero_raw();
        cc[0] = c;
        s.set_coeff(&e, &cc);
    }
    s
}

/// Coefficients of `g(x) = E(x) - 1` and of its compositional inverse `h`,
/// both mod `p^M` through degree `maxdeg`.
pub fn coordinate_change_series(p: u64, maxdeg: usize, precision: u32) -> (Vec<u64>, Vec<u64>) {
    let ah = artin_hasse(p, maxdeg, precision);
    let m = ah.modulus;
    let mut g = ah.reduced.clone();
    g[0] = 0;
    // h by coefficient-wise reversion: [x^n] g(h(x)) = delta_{n,1}
    let mut h = vec![0u64; maxdeg + 1];
    if maxdeg >= 1 {
        h[1] = 1;
    }
    let mul_trunc = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; maxdeg + 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(maxdeg + 1 - i) {
                out[i + j] = (out[i + j] + crate::arith::mul_mod(x, y, m)) % m;
            }
        }
        out
    };
    for n in 2..=maxdeg {
        // with h_n = 0, the x^n coefficient of g(h) must vanish once h_n is added
        let mut comp = vec![0u64; maxdeg + 1];
        let mut hp = vec![0u64; maxdeg + 1];
        hp[0] = 1;
        for gk in g.iter().take(n + 1).skip(1) {
            hp = mul_trunc(&hp, &h);
            for i in 0..=maxdeg {
                comp[i] = (comp[i] + crate::arith::mul_mod(*gk, hp[i], m)) % m;
            }
        }
        h[n] = (m - comp[n]) % m;
    }
    (g, h)
}

/// Rewrite a series given in `pi`-coordinates in the coordinates
/// `T_j = E(pi_j) - 1`.
pub fn to_t_coords(s: &MvSeries) -> Result<MvSeries> {
    let (_, h) = coordinate_change_series(s.ring.p(), s.maxdeg(), s.ring.precision());
    let subs: Vec<MvSeries> = (0..s.nvars()).map(|j| univariate(&s.ring, s.nvars(), s.maxdeg(), j, &h)).collect();
    s.compose(&subs)
}

/// Inverse of [`to_t_coords`].
pub fn to_pi_coords(s: &MvSeries) -> Result<MvSeries> {
    let (g, _) = coordinate_change_series(s.ring.p(), s.maxdeg(), s.ring.precision());
    let subs: Vec<MvSeries> = (0..s.nvars()).map(|j| univariate(&s.ring, s.nvars(), s.maxdeg(), j, &g)).collect();
    s.compose(&subs)
}

/// Truncation degree that exposes the leading form of `w_k` plus one further
/// homogeneous degree: `ceil(lambda_k) + l + 1`.
pub fn min_degree_for(lambda_k: Ratio<i64>, ell: usize) -> usize {
    lambda_k.ceil().to_integer() as usize + ell + 1
}

/// `val_q` of the uniformizer of `Z[zeta_{p^m}]` with `q = p^a`.
pub fn uniformizer_val_q(p: u64, m: u32, a: u32) -> Ratio<i64> {
    Ratio::new(1, a as i64 * phi_prime_power(p, m) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(p: u64, m: u32) -> Arc<ZqRing> {
        ZqRing::new(p, 1, m).unwrap()
    }

    #[test]
    fn artin_hasse_small_coefficients() {
        let t = artin_hasse(3, 3, 2);
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(t.exact, vec![r(1, 1), r(1, 1), r(1, 2), r(1, 2)]);
        assert_eq!(artin_hasse(2, 2, 3).exact[2], r(1, 1));
        assert_eq!(t.reduced[2], 5); // 1/2 mod 9
    }

    #[test]
    fn binomial_square() {
        let r = zp(3, 3);
        let x = MvSeries::var(&r, 2, 4, 0).add(&MvSeries::var(&r, 2, 4, 1)).unwrap();
        let sq = x.pow(2);
        assert_eq!(sq.coeff(&[2, 0]), vec![1]);
        assert_eq!(sq.coeff(&[1, 1]), vec![2]);
        assert_eq!(sq.coeff(&[0, 2]), vec![1]);
        assert_eq!(sq.terms().count(), 3);
        assert_eq!(x.mul(&x.one_like()).unwrap(), x);
    }

    #[test]
    fn truncation_drops_high_terms() {
        let r = zp(3, 3);
        let a = MvSeries::var(&r, 2, 3, 0).pow(3);
        let b = MvSeries::var(&r, 2, 3, 1);
        assert!(a.mul(&b).unwrap().is_zero());
    }

    #[test]
    fn val_i_conventions() {
        let r = zp(3, 3);
        let x = MvSeries::var(&r, 2, 5, 0);
        let y = MvSeries::var(&r, 2, 5, 1);
        assert_eq!(x.pow(2).mul(&y).unwrap().val_i(), Some(3));
        assert_eq!(x.scale_int(3).val_i(), None);
        assert_eq!(x.scale_int(3).order(), Some(1));
        assert_eq!(x.add(&x.one_like()).unwrap().val_i(), Some(0));
    }

    #[test]
    fn coordinate_change_round_trip() {
        let r = zp(3, 4);
        let (g, h) = coordinate_change_series(3, 8, 4);
        assert_eq!((g[1], h[1]), (1, 1));
        let x = MvSeries::var(&r, 2, 8, 0);
        let s = x.add(&MvSeries::var(&r, 2, 8, 1).pow(2)).unwrap();
        let t = to_t_coords(&s).unwrap();
        assert_eq!(to_pi_coords(&t).unwrap(), s);
        let c = MvSeries::constant(&r, 2, 8, &[5]);
        assert_eq!(to_t_coords(&c).unwrap(), c);
        // T = pi + O(deg 2)
        let tx = to_pi_coords(&x).unwrap();
        assert_eq!(tx.homogeneous_part(1), vec![(vec![1, 0], vec![1])]);
    }

    #[test]
    fn text_round_trip() {
        let r = ZqRing::new(3, 2, 3).unwrap();
        let s = MvSeries::var(&r, 2, 4, 0).scale(&[4, 7]).add(&MvSeries::one(&r, 2, 4)).unwrap();
        assert_eq!(MvSeries::from_text(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn specialize_simple() {
        let r = zp(3, 2);
        let pi = CyclotomicInt::pi(3, 1);
        let c = MvSeries::constant(&r, 1, 10, &[4]);
        assert_eq!(c.specialize(std::slice::from_ref(&pi), 1).unwrap().0, CyclotomicInt::from_int(3, 1, 4));
        let x = MvSeries::var(&r, 1, 10, 0);
        let (v, err) = x.specialize(std::slice::from_ref(&pi), 1).unwrap();
        assert_eq!(v, CyclotomicInt::from_coords(3, 1, vec![8.into(), 1.into()]));
        assert_eq!(err, Valuation::Finite(Ratio::new(11, 2)));
        assert!(x.specialize(&[CyclotomicInt::one(3, 1)], 1).is_err());
    }

    #[test]
    fn artin_hasse_at_reverted_point_is_zeta() {
        // solve E(x) = zeta_3 via T = zeta_3 - 1 and x = h(T), substitute back
        let r = zp(3, 2);
        let (_, h) = coordinate_change_series(3, 10, 2);
        let e = univariate(&r, 1, 10, 0, &artin_hasse(3, 10, 2).reduced);
        let comp = e.compose(&[univariate(&r, 1, 10, 0, &h)]).unwrap();
        let (val, err) = comp.specialize(&[CyclotomicInt::pi(3, 1)], 1).unwrap();
        let zeta = CyclotomicInt::zeta_pow(3, 1, 1);
        assert!(err >= Valuation::int(2));
        assert!(val.congruent_mod_pk(&zeta, 2));
    }
}
