//! Arithmetic in `(Z/m)[y] / (g(y))` for a monic `g`, on coordinate slices.
//!
//! Both the residue fields (`m = p`) and the truncated unramified rings
//! (`m = p^M`) are instances.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PolyMod {
    pub(crate) m: u64,
    /// Monic modulus, low degree first, length `n + 1`.
    pub(crate) modulus: Vec<u64>,
}

impl PolyMod {
    pub(crate) fn new(m: u64, modulus: Vec<u64>) -> Self {
        let modulus = modulus.into_iter().map(|c| c % m).collect();
        PolyMod { m, modulus }
    }

    #[inline]
    pub(crate) fn n(&self) -> usize {
        self.modulus.len() - 1
    }

    pub(crate) fn zero(&self) -> Vec<u64> {
        vec![0; self.n()]
    }

    pub(crate) fn one(&self) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = 1 % self.m;
        v
    }

    pub(crate) fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.m {
                    s - self.m
                } else {
                    s
                }
            })
            .collect()
    }

    pub(crate) fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| if x >= y { x - y } else { x + self.m - y })
            .collect()
    }

    pub(crate) fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter()
            .map(|&x| if x == 0 { 0 } else { self.m - x })
            .collect()
    }

    pub(crate) fn scale(&self, a: &[u64], c: u64) -> Vec<u64> {
        a.iter()
            .map(|&x| ((x as u128 * c as u128) % self.m as u128) as u64)
            .collect()
    }

    /// Reduce a wide (length up to `2n - 1`) accumulator modulo `m` and `g`.
    pub(crate) fn reduce_wide(&self, wide: &mut [u128]) -> Vec<u64> {
        let n = self.n();
        let m = self.m as u128;
        for i in (n..wide.len()).rev() {
            let c = wide[i] % m;
            wide[i] = 0;
            if c == 0 {
                continue;
            }
            // y^n = -sum g_j y^j
            let neg_c = m - c;
            for j in 0..n {
                let g = self.modulus[j] as u128;
                if g != 0 {
                    wide[i - n + j] += (neg_c * g) % m;
                }
            }
        }
        wide[..n].iter().map(|&x| (x % m) as u64).collect()
    }

    pub(crate) fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.n();
        if n == 1 {
            return vec![((a[0] as u128 * b[0] as u128) % self.m as u128) as u64];
        }
        let mut wide = vec![0u128; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                wide[i + j] += x as u128 * y as u128;
            }
        }
        self.reduce_wide(&mut wide)
    }

    pub(crate) fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Evaluate an integer-coefficient polynomial (low degree first) at `x`.
    pub(crate) fn eval_poly(&self, coeffs: &[u64], x: &[u64]) -> Vec<u64> {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc[0] = (acc[0] + c % self.m) % self.m;
        }
        acc
    }

    pub(crate) fn is_zero(a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }
}
