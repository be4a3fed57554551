//! Finite fields `F_{p^n} = F_p[y]/(g)` with a deterministic choice of `g`.

use std::sync::Arc;

use super::polymod::PolyMod;
use crate::arith::{factor, inv_mod, is_prime, mul_mod};
use crate::error::{Error, Result};

/// Residue-field element: `n` coordinates in `[0, p)`, low degree first.
pub type Fe = Vec<u64>;

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FieldDesc {
    pub(crate) ring: PolyMod,
    p: u64,
    order: u64,
    generator: Fe,
}

impl FieldDesc {
    /// `F_{p^n}` defined by the lexicographically first monic irreducible of
    /// degree `n`.  Polynomials are ordered by the integer `sum c_i p^i` of
    /// their non-leading coefficients.
    pub fn new(p: u64, n: usize) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("field degree must be positive".into()));
        }
        let count = p
            .checked_pow(n as u32)
            .filter(|&q| q <= 1 << 32)
            .ok_or_else(|| Error::InvalidParameter(format!("field {p}^{n} too large")))?;
        for t in 0..count {
            let mut g = digits(t, p, n);
            g.push(1);
            if is_irreducible(p, &g) {
                return Self::with_modulus(p, g);
            }
        }
        unreachable!("every degree has an irreducible polynomial")
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() % p != 1 {
            return Err(Error::InvalidParameter("modulus must be monic of positive degree".into()));
        }
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        if !is_irreducible(p, &modulus) {
            return Err(Error::NotIrreducible { p });
        }
        let n = modulus.len() - 1;
        let ring = PolyMod::new(p, modulus);
        let order = p.pow(n as u32);
        let mut f = FieldDesc { ring, p, order, generator: Vec::new() };
        f.generator = f.find_generator();
        Ok(Arc::new(f))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.ring.n()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.ring.modulus
    }

    pub fn zero(&self) -> Fe {
        self.ring.zero()
    }

    pub fn one(&self) -> Fe {
        self.ring.one()
    }

    pub fn from_int(&self, c: i64) -> Fe {
        let mut v = self.zero();
        v[0] = c.rem_euclid(self.p as i64) as u64;
        v
    }

    /// Element whose coordinates are the base-`p` digits of `index`.
    pub fn from_index(&self, index: u64) -> Fe {
        digits(index, self.p, self.degree())
    }

    pub fn index(&self, x: &[u64]) -> u64 {
        x.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Fe {
        self.ring.add(a, b)
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Fe {
        self.ring.sub(a, b)
    }

    pub fn neg(&self, a: &[u64]) -> Fe {
        self.ring.neg(a)
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Fe {
        self.ring.mul(a, b)
    }

    pub fn scale(&self, a: &[u64], c: u64) -> Fe {
        self.ring.scale(a, c)
    }

    pub fn pow(&self, a: &[u64], e: u64) -> Fe {
        self.ring.pow(a, e)
    }

    pub fn frobenius(&self, a: &[u64]) -> Fe {
        self.pow(a, self.p)
    }

    pub fn inv(&self, a: &[u64]) -> Result<Fe> {
        if PolyMod::is_zero(a) {
            return Err(Error::NotInvertible);
        }
        Ok(self.pow(a, self.order - 2))
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        PolyMod::is_zero(a)
    }

    /// Least-index element generating `F^×`.
    pub fn generator(&self) -> &Fe {
        &self.generator
    }

    fn find_generator(&self) -> Fe {
        let n1 = self.order - 1;
        let primes: Vec<u64> = factor(n1).into_iter().map(|(r, _)| r).collect();
        let one = self.one();
        (1..self.order)
            .map(|i| self.from_index(i))
            .find(|g| primes.iter().all(|&r| self.pow(g, n1 / r) != one))
            .expect("multiplicative group is cyclic")
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.order).map(|i| self.from_index(i))
    }

    /// Evaluate an `F_p`-coefficient polynomial (low degree first) at `x`.
    pub fn eval_fp_poly(&self, coeffs: &[u64], x: &[u64]) -> Fe {
        self.ring.eval_poly(coeffs, x)
    }

    /// Roots of `g` lying in the subfield of degree `sub`, in index order.
    pub fn roots_in_subfield(&self, g: &[u64], sub: usize) -> Result<Vec<Fe>> {
        let n = self.degree();
        if sub == 0 || !n.is_multiple_of(sub) {
            return Err(Error::DegreeNotDivisible { sub, degree: n });
        }
        let sub_order = self.p.pow(sub as u32);
        let h = self.pow(&self.generator, (self.order - 1) / (sub_order - 1));
        let mut roots = Vec::new();
        let mut z = self.zero();
        if PolyMod::is_zero(&self.eval_fp_poly(g, &z)) {
            roots.push(z.clone());
        }
        z = self.one();
        for _ in 0..sub_order - 1 {
            if PolyMod::is_zero(&self.eval_fp_poly(g, &z)) {
                roots.push(z.clone());
            }
            z = self.mul(&z, &h);
        }
        roots.sort_by_key(|r| self.index(r));
        Ok(roots)
    }
}

/// Embedding `F_{p^a} -> F_{p^N}` sending the generator `y` to the smallest
/// root of the source modulus.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    pub src: Arc<FieldDesc>,
    pub dst: Arc<FieldDesc>,
    pub image_of_y: Fe,
}

impl FieldEmbedding {
    pub fn new(src: Arc<FieldDesc>, dst: Arc<FieldDesc>) -> Result<Self> {
        if src.p != dst.p {
            return Err(Error::RingMismatch("different characteristics".into()));
        }
        let roots = dst.roots_in_subfield(src.modulus(), src.degree())?;
        let image_of_y = roots.into_iter().next().ok_or(Error::NotIrreducible { p: src.p })?;
        debug_assert!(dst.is_zero(&dst.eval_fp_poly(src.modulus(), &image_of_y)));
        Ok(FieldEmbedding { src, dst, image_of_y })
    }

    pub fn map(&self, x: &[u64]) -> Fe {
        self.dst.eval_fp_poly(x, &self.image_of_y)
    }
}

fn digits(mut t: u64, p: u64, n: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(t % p);
        t /= p;
    }
    v
}

// ---- polynomials over F_p with an arbitrary modulus (irreducibility) ----

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
    while r.len() > db {
        let c = mul_mod(*r.last().unwrap(), lead_inv, p);
        let shift = r.len() - 1 - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mul_mod(c, bi, p)) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's test for a monic `g`.
pub fn is_irreducible(p: u64, g: &[u64]) -> bool {
    let n = g.len() - 1;
    if n == 1 {
        return true;
    }
    if g[0] == 0 {
        return false;
    }
    let ring = PolyMod::new(p, g.to_vec());
    let mut x = ring.zero();
    x[1] = 1;
    // xp[i] = x^{p^i} mod g
    let mut xp = vec![x.clone()];
    for i in 1..=n {
        let next = ring.pow(&xp[i - 1], p);
        xp.push(next);
    }
    if xp[n] != x {
        return false;
    }
    for (r, _) in factor(n as u64) {
        let mut h = ring.sub(&xp[n / r as usize], &x);
        trim(&mut h);
        if h.is_empty() {
            return false;
        }
        if poly_gcd(g, &h, p).len() != 1 {
            return false;
        }
    }
    true
}
