//! Division-free determinants over commutative rings.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::mvseries::MvSeries;

/// The commutative-ring operations the determinant needs.
pub trait CommRing: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl CommRing for MvSeries {
    fn zero_like(&self) -> Self {
        MvSeries::zero_like(self)
    }
    fn one_like(&self) -> Self {
        MvSeries::one_like(self)
    }
    fn add(&self, other: &Self) -> Self {
        MvSeries::add(self, other).expect("matrix entries share one series ring")
    }
    fn sub(&self, other: &Self) -> Self {
        MvSeries::sub(self, other).expect("matrix entries share one series ring")
    }
    fn mul(&self, other: &Self) -> Self {
        MvSeries::mul(self, other).expect("matrix entries share one series ring")
    }
    fn is_zero(&self) -> bool {
        MvSeries::is_zero(self)
    }
}

impl CommRing for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

fn dot<R: CommRing>(a: &[R], b: &[R], zero: &R) -> R {
    let mut acc = zero.clone();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc.add(&x.mul(y));
        }
    }
    acc
}

/// Coefficients `c_0..c_kmax` of `det(I - s A)` for a square matrix `A`.
///
/// Berkowitz-style: bordering the leading `r x r` block by column `S`, row `R`
/// and corner `a` multiplies the determinant by
/// `1 - s a - sum_{i >= 0} s^{i+2} R A_r^i S`, truncated at `s^kmax`.
pub fn det_one_minus_s<R: CommRing>(a: &[Vec<R>], kmax: usize) -> Vec<R> {
    let k = a.len();
    assert!(a.iter().all(|row| row.len() == k), "square matrix required");
    let Some(sample) = a.first().and_then(|r| r.first()) else {
        return vec![];
    };
    let zero = sample.zero_like();
    let one = sample.one_like();
    let mut poly: Vec<R> = (0..=kmax).map(|i| if i == 0 { one.clone() } else { zero.clone() }).collect();
    for r in 0..k {
        let mut f: Vec<R> = vec![zero.clone(); kmax + 1];
        f[0] = one.clone();
        if kmax >= 1 {
            f[1] = zero.sub(&a[r][r]);
        }
        if kmax >= 2 && r > 0 {
            let row = &a[r][..r];
            let mut v: Vec<R> = (0..r).map(|i| a[i][r].clone()).collect();
            for i in 0..=kmax - 2 {
                f[i + 2] = zero.sub(&dot(row, &v, &zero));
                if i + 2 < kmax {
                    v = (0..r).into_par_iter().map(|row_i| dot(&a[row_i][..r], &v, &zero)).collect();
                }
            }
        }
        poly = (0..=kmax)
            .map(|n| {
                let mut acc = zero.clone();
                for i in 0..=n {
                    if !poly[i].is_zero() && !f[n - i].is_zero() {
                        acc = acc.add(&poly[i].mul(&f[n - i]));
                    }
                }
                acc
            })
            .collect();
    }
    poly
}

/// `det(A) = (-1)^k [s^k] det(I - s A)`.
pub fn det<R: CommRing>(a: &[Vec<R>]) -> Option<R> {
    let k = a.len();
    let c = det_one_minus_s(a, k).pop()?;
    Some(if k.is_multiple_of(2) { c } else { c.zero_like().sub(&c) })
}

/// Product of two rectangular matrices, parallel over output rows.
pub fn mat_mul<R: CommRing>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let zero = b[0][0].zero_like();
    a.par_iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "dimension mismatch");
            (0..cols)
                .map(|j| {
                    let mut acc = zero.clone();
                    for (t, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[t][j].is_zero() {
                            acc = acc.add(&x.mul(&b[t][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leibniz(a: &[Vec<BigInt>]) -> BigInt {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = BigInt::zero();
        permute(&mut perm, 0, a, &mut total);
        total
    }

    fn permute(perm: &mut Vec<usize>, k: usize, a: &[Vec<BigInt>], total: &mut BigInt) {
        let n = perm.len();
        if k == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if perm[i] > perm[j] {
                        inv += 1;
                    }
                }
            }
            let mut t = BigInt::one();
            for i in 0..n {
                t *= &a[i][perm[i]];
            }
            if inv % 2 == 1 {
                t = -t;
            }
            *total += t;
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            permute(perm, k + 1, a, total);
            perm.swap(k, i);
        }
    }

    /// `det(I - sA)` coefficient `s^j` is `(-1)^j` times the sum of principal
    /// `j x j` minors.
    fn principal_minor_sum(a: &[Vec<BigInt>], j: usize) -> BigInt {
        let n = a.len();
        let mut total = BigInt::zero();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != j {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<BigInt>> = idx.iter().map(|&r| idx.iter().map(|&c| a[r][c].clone()).collect()).collect();
            total += if j == 0 { BigInt::one() } else { leibniz(&sub) };
        }
        if j % 2 == 1 {
            -total
        } else {
            total
        }
    }

    fn matrix() -> impl Strategy<Value = Vec<Vec<BigInt>>> {
        (1usize..6).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec((-9i64..10).prop_map(BigInt::from), n), n)
        })
    }

    proptest! {
        #[test]
        fn berkowitz_matches_minor_expansion(a in matrix()) {
            let n = a.len();
            let c = det_one_minus_s(&a, n);
            for j in 0..=n {
                prop_assert_eq!(&c[j], &principal_minor_sum(&a, j));
            }
            prop_assert_eq!(det(&a).unwrap(), leibniz(&a));
        }

        #[test]
        fn truncation_agrees_with_full(a in matrix(), kmax in 0usize..4) {
            let full = det_one_minus_s(&a, a.len() + 3);
            let trunc = det_one_minus_s(&a, kmax);
            prop_assert_eq!(&full[..=kmax], &trunc[..]);
        }
    }
}
