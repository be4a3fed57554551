//! Exact elements of `Z[zeta_{p^m}] = Z[x]/(Phi_{p^m}(x))`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::arith::{phi_prime_power, v_p_bigint};
use crate::valuation::Valuation;

/// Element of `Z[zeta_{p^m}]` in the power basis `1, zeta, ..., zeta^{phi-1}`.
/// For `m = 0` the ring is `Z`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    p: u64,
    m: u32,
    pub coords: Vec<BigInt>,
}

impl fmt::Debug for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "Z[zeta_{}^{}]({})", self.p, self.m, parts.join(","))
    }
}

impl CyclotomicInt {
    pub fn zero(p: u64, m: u32) -> Self {
        CyclotomicInt { p, m, coords: vec![BigInt::zero(); phi_prime_power(p, m)] }
    }

    pub fn from_int(p: u64, m: u32, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(p, m);
        z.coords[0] = c.into();
        z
    }

    pub fn one(p: u64, m: u32) -> Self {
        Self::from_int(p, m, 1)
    }

    pub fn from_coords(p: u64, m: u32, coords: Vec<BigInt>) -> Self {
        assert_eq!(coords.len(), phi_prime_power(p, m), "coordinate count");
        CyclotomicInt { p, m, coords }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    fn phi(&self) -> usize {
        self.coords.len()
    }

    /// `zeta^e` for any integer `e`.
    pub fn zeta_pow(p: u64, m: u32, e: i64) -> Self {
        let order = p.pow(m) as i64;
        let e = e.rem_euclid(order) as usize;
        let mut wide = vec![BigInt::zero(); (order as usize).max(1)];
        wide[e] = BigInt::one();
        Self::reduce(p, m, wide)
    }

    /// `zeta - 1`, the uniformizer.
    pub fn pi(p: u64, m: u32) -> Self {
        Self::zeta_pow(p, m, 1).sub(&Self::one(p, m))
    }

    /// Reduce a polynomial in `x` of any degree modulo `Phi_{p^m}` (and `x^{p^m} - 1`).
    fn reduce(p: u64, m: u32, mut wide: Vec<BigInt>) -> Self {
        let phi = phi_prime_power(p, m);
        if m == 0 {
            let s = wide.into_iter().fold(BigInt::zero(), |a, b| a + b);
            return Self::from_int(p, 0, s);
        }
        let order = p.pow(m) as usize;
        // fold x^order = 1 first
        if wide.len() > order {
            for i in order..wide.len() {
                let c = std::mem::take(&mut wide[i]);
                wide[i % order] += c;
            }
            wide.truncate(order);
        }
        let step = p.pow(m - 1) as usize;
        // x^{phi + r} = -sum_{i=0}^{p-2} x^{r + i*step}
        for e in (phi..wide.len()).rev() {
            let c = std::mem::take(&mut wide[e]);
            if c.is_zero() {
                continue;
            }
            let r = e - phi;
            for i in 0..(p as usize - 1) {
                wide[r + i * step] -= &c;
            }
        }
        wide.resize(phi, BigInt::zero());
        CyclotomicInt { p, m, coords: wide }
    }

    fn check(&self, other: &Self) {
        assert!(self.p == other.p && self.m == other.m, "cyclotomic ring mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        CyclotomicInt { p: self.p, m: self.m, coords }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        CyclotomicInt { p: self.p, m: self.m, coords }
    }

    pub fn neg(&self) -> Self {
        CyclotomicInt { p: self.p, m: self.m, coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        CyclotomicInt { p: self.p, m: self.m, coords: self.coords.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let n = self.phi();
        let mut wide = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if !b.is_zero() {
                    wide[i + j] += a * b;
                }
            }
        }
        Self::reduce(self.p, self.m, wide)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p, self.m);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Galois action `zeta -> zeta^u` for `u` prime to `p`.
    pub fn galois(&self, u: i64) -> Self {
        assert!(u.rem_euclid(self.p as i64) != 0, "Galois exponent must be prime to p");
        if self.m == 0 {
            return self.clone();
        }
        let order = self.p.pow(self.m) as i64;
        let mut wide = vec![BigInt::zero(); order as usize];
        for (i, c) in self.coords.iter().enumerate() {
            wide[(i as i64 * u).rem_euclid(order) as usize] += c;
        }
        Self::reduce(self.p, self.m, wide)
    }

    /// Image in `Z[zeta_{p^{m2}}]` for `m2 >= m`, via `zeta_{p^m} = zeta_{p^{m2}}^{p^{m2-m}}`.
    pub fn embed(&self, m2: u32) -> Self {
        assert!(m2 >= self.m, "can only embed into a larger conductor");
        if m2 == self.m {
            return self.clone();
        }
        let stride = self.p.pow(m2 - self.m) as usize;
        let order = self.p.pow(m2) as usize;
        let mut wide = vec![BigInt::zero(); order];
        for (i, c) in self.coords.iter().enumerate() {
            wide[(i * stride) % order] += c;
        }
        Self::reduce(self.p, m2, wide)
    }

    /// Coordinates reduced into `[0, p^M)`.
    pub fn reduce_mod(&self, pm: &BigInt) -> Vec<BigInt> {
        self.coords.iter().map(|c| c.mod_floor(pm)).collect()
    }

    /// Whether every coordinate is divisible by `modulus`.
    pub fn divisible_by(&self, modulus: &BigInt) -> bool {
        self.coords.iter().all(|c| c.is_multiple_of(modulus))
    }

    /// Exact quotient by `pi = zeta - 1`, or `None` if not divisible.
    pub fn divide_by_pi(&self) -> Option<Self> {
        assert!(self.m >= 1, "no uniformizer in Z");
        let p = BigInt::from(self.p);
        let s: BigInt = self.coords.iter().sum();
        let (c, r) = s.div_rem(&p);
        if !r.is_zero() {
            return None;
        }
        // w = v - c * Phi has w(1) = 0 and degree phi
        let phi = self.phi();
        let step = self.p.pow(self.m - 1) as usize;
        let mut w: Vec<BigInt> = self.coords.clone();
        w.push(BigInt::zero());
        for i in 0..self.p as usize {
            w[i * step] -= &c;
        }
        // synthetic division by (x - 1)
        let mut q = vec![BigInt::zero(); phi];
        q[phi - 1] = w[phi].clone();
        for i in (1..phi).rev() {
            q[i - 1] = &w[i] + &q[i];
        }
        debug_assert!((&w[0] + &q[0]).is_zero());
        Some(CyclotomicInt { p: self.p, m: self.m, coords: q })
    }

    /// Largest `n` with `self` in `(zeta - 1)^n`; `None` for zero.  For `m = 0`
    /// this is the `p`-adic valuation of the integer.
    pub fn val_pi(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        // p = unit * pi^phi, so pull out the content's p-power first
        let content = self.coords.iter().filter(|c| !c.is_zero()).filter_map(|c| v_p_bigint(c, self.p)).min().unwrap();
        if self.m == 0 {
            return Some(content as u64);
        }
        let pk = BigInt::from(self.p).pow(content);
        let mut cur = CyclotomicInt {
            p: self.p,
            m: self.m,
            coords: self.coords.iter().map(|c| c / &pk).collect(),
        };
        let mut n = content as u64 * self.phi() as u64;
        while let Some(q) = cur.divide_by_pi() {
            cur = q;
            n += 1;
        }
        Some(n)
    }

    /// Valuation normalised so that `val_q(q) = 1` with `q = p^a`.
    pub fn val_q(&self, a: u32) -> Valuation {
        match self.val_pi() {
            None => Valuation::Infinite,
            Some(n) => {
                let e = a as i64 * phi_prime_power(self.p, self.m) as i64;
                Valuation::Finite(Ratio::new(n as i64, e))
            }
        }
    }

    /// Whether `(self - other)` is divisible by `p^k` coordinatewise.
    pub fn congruent_mod_pk(&self, other: &Self, k: u32) -> bool {
        self.sub(other).divisible_by(&BigInt::from(self.p).pow(k))
    }

    pub fn to_text(&self) -> String {
        self.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }

    /// Sum of absolute coordinate values, a crude size measure.
    pub fn l1(&self) -> BigInt {
        self.coords.iter().map(|c| c.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniformizer_power_is_p_times_unit() {
        for (p, m) in [(3u64, 1u32), (3, 2), (2, 3), (5, 1)] {
            let phi = phi_prime_power(p, m) as u64;
            let x = CyclotomicInt::pi(p, m).pow(phi);
            assert_eq!(x.val_pi(), Some(phi));
            assert!(x.divisible_by(&BigInt::from(p)));
            let unit = CyclotomicInt::from_coords(p, m, x.coords.iter().map(|c| c / p).collect());
            assert_eq!(unit.val_pi(), Some(0));
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(CyclotomicInt::from_int(3, 2, 3).val_q(1), Valuation::int(1));
        assert_eq!(CyclotomicInt::pi(3, 2).val_q(1), Valuation::Finite(Ratio::new(1, 6)));
        assert_eq!(CyclotomicInt::zero(3, 2).val_q(1), Valuation::Infinite);
        assert_eq!(CyclotomicInt::from_int(3, 0, 18).val_q(2), Valuation::Finite(Ratio::new(1, 1)));
    }

    #[test]
    fn zeta_order_and_galois() {
        let z = CyclotomicInt::zeta_pow(3, 2, 1);
        assert_eq!(z.pow(9), CyclotomicInt::one(3, 2));
        assert_ne!(z.pow(3), CyclotomicInt::one(3, 2));
        let s = (0..9).fold(CyclotomicInt::zero(3, 2), |acc, e| acc.add(&CyclotomicInt::zeta_pow(3, 2, e)));
        assert!(s.is_zero());
        assert_eq!(z.galois(2), CyclotomicInt::zeta_pow(3, 2, 2));
        assert_eq!(CyclotomicInt::zeta_pow(3, 1, 1).embed(2), CyclotomicInt::zeta_pow(3, 2, 3));
    }

    #[test]
    fn division_by_pi_inverts_multiplication() {
        let pi = CyclotomicInt::pi(5, 2);
        let u = CyclotomicInt::from_coords(5, 2, (0..20).map(|i| BigInt::from(i * 7 % 11 + 1)).collect());
        let prod = pi.mul(&u);
        assert_eq!(prod.divide_by_pi().unwrap(), u);
    }
}
