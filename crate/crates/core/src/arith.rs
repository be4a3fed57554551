//! Word-sized integer helpers shared by the finite-field and p-adic layers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Prime factorisation by trial division, primes ascending.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            let mut e = 0;
            while n.is_multiple_of(f) {
                n /= f;
                e += 1;
            }
            out.push((f, e));
        }
        f += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into `[0, m)`.
pub fn reduce_i64(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

pub fn reduce_bigint(x: &BigInt, m: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(m));
    r.to_u64_digits().1.first().copied().unwrap_or(0)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn v_p_u64(mut n: u64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    Some(v)
}

pub fn v_p_bigint(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// Euler's totient of `p^m`.
pub fn phi_prime_power(p: u64, m: u32) -> usize {
    if m == 0 {
        1
    } else {
        ((p - 1) * p.pow(m - 1)) as usize
    }
}

/// Inverse of a square matrix over `Z/m`, `m = p^M`, by Gauss-Jordan with
/// unit pivots.  `None` if the matrix is singular mod `p`.
pub fn mat_inv_mod(a: &[Vec<u64>], p: u64, m: u64) -> Option<Vec<Vec<u64>>> {
    let n = a.len();
    let mut w: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u64> = row.iter().map(|&x| x % m).collect();
            r.extend((0..n).map(|j| (i == j) as u64 % m));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !w[r][col].is_multiple_of(p))?;
        w.swap(col, piv);
        let inv = inv_mod(w[col][col], m)?;
        for x in w[col].iter_mut() {
            *x = mul_mod(*x, inv, m);
        }
        for r in 0..n {
            if r == col || w[r][col] == 0 {
                continue;
            }
            let f = w[r][col];
            for c in 0..2 * n {
                let sub = mul_mod(f, w[col][c], m);
                w[r][c] = (w[r][c] + m - sub) % m;
            }
        }
    }
    Some(w.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solve `B c = x` over `Z/m` (`m = p^M`) for a tall `rows x cols` matrix `B`
/// whose columns are independent mod `p`.  `None` if `x` is not in the column
/// span.
pub fn solve_mod(b: &[Vec<u64>], x: &[u64], p: u64, m: u64) -> Option<Vec<u64>> {
    let rows = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut w: Vec<Vec<u64>> = b
        .iter()
        .zip(x)
        .map(|(r, &xi)| {
            let mut v: Vec<u64> = r.iter().map(|&e| e % m).collect();
            v.push(xi % m);
            v
        })
        .collect();
    for col in 0..cols {
        let piv = (col..rows).find(|&r| !w[r][col].is_multiple_of(p))?;
        w.swap(col, piv);
        let inv = inv_mod(w[col][col], m)?;
        for e in w[col].iter_mut() {
            *e = mul_mod(*e, inv, m);
        }
        for r in 0..rows {
            if r == col || w[r][col] == 0 {
                continue;
            }
            let f = w[r][col];
            for c in 0..=cols {
                let sub = mul_mod(f, w[col][c], m);
                w[r][c] = (w[r][c] + m - sub) % m;
            }
        }
    }
    if w[cols..].iter().any(|r| r[cols] != 0) {
        return None;
    }
    Some(w[..cols].iter().map(|r| r[cols]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_primes() {
        assert_eq!(factor(728), vec![(2, 3), (7, 1), (13, 1)]);
        assert_eq!(factor(1), vec![]);
        assert!(is_prime(3) && is_prime(7) && !is_prime(9) && !is_prime(1));
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(2, 25), Some(13));
        assert_eq!(inv_mod(5, 25), None);
        assert_eq!(mul_mod(inv_mod(7, 81).unwrap(), 7, 81), 1);
    }

    #[test]
    fn matrix_inverse() {
        let a = vec![vec![3, 1], vec![1, 1]];
        let inv = mat_inv_mod(&a, 3, 27).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = (0..2).map(|k| a[i][k] * inv[k][j]).sum::<u64>() % 27;
                assert_eq!(s, (i == j) as u64);
            }
        }
        assert!(mat_inv_mod(&[vec![3, 0], vec![0, 1]], 3, 27).is_none());
    }

    #[test]
    fn valuations() {
        assert_eq!(v_p_u64(54, 3), Some(3));
        assert_eq!(v_p_u64(0, 3), None);
        assert_eq!(v_p_bigint(&BigInt::from(-18), 3), Some(2));
        assert_eq!(phi_prime_power(3, 2), 6);
        assert_eq!(phi_prime_power(5, 0), 1);
    }
}
