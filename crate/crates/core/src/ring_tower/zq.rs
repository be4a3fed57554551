//! Truncated unramified rings `Z_{p^n} / p^M` in the power basis of the lifted
//! residue modulus.

use std::fmt;
use std::sync::Arc;

use super::field::{Fe, FieldDesc, FieldEmbedding};
use super::polymod::PolyMod;
use crate::arith::{inv_mod, mat_inv_mod, mul_mod, solve_mod};
use crate::error::{Error, Result};

/// Largest admissible `p^M`; keeps every product of two coordinates in 62 bits.
pub const MAX_MODULUS: u64 = 1 << 31;

pub struct ZqRing {
    pub(crate) ring: PolyMod,
    residue: Arc<FieldDesc>,
    precision: u32,
    /// `frob[k][j][i]`: coordinate `j` of `sigma^k(y^i)`, for `k < n`.
    frob: Vec<Vec<Vec<u64>>>,
    /// `Tr_{Z_{p^n}/Z_p}(y^i)`.
    trace_vec: Vec<u64>,
}

impl fmt::Debug for ZqRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{{{}^{}}}/{}^{}", self.p(), self.degree(), self.p(), self.precision)
    }
}

impl PartialEq for ZqRing {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.ring == other.ring && self.precision == other.precision)
    }
}

impl Eq for ZqRing {}

impl ZqRing {
    pub fn new(p: u64, n: usize, precision: u32) -> Result<Arc<Self>> {
        Self::over(FieldDesc::new(p, n)?, precision)
    }

    /// The ring whose reduction mod `p` is `residue`.
    pub fn over(residue: Arc<FieldDesc>, precision: u32) -> Result<Arc<Self>> {
        let p = residue.p();
        if precision == 0 {
            return Err(Error::InvalidParameter("precision must be at least 1".into()));
        }
        let pm = p
            .checked_pow(precision)
            .filter(|&m| m < MAX_MODULUS)
            .ok_or(Error::PrecisionTooLarge { p, precision })?;
        let n = residue.degree();
        let ring = PolyMod::new(pm, residue.modulus().to_vec());
        let mut r = ZqRing { ring, residue, precision, frob: Vec::new(), trace_vec: Vec::new() };

        let sigma_y = if n == 1 {
            vec![0]
        } else {
            let mut yp = r.residue.zero();
            yp[1] = 1;
            let start = r.residue.pow(&yp, p);
            r.hensel_root(r.residue.modulus(), start)
        };
        let mut images = vec![{
            let mut y = r.ring.zero();
            if n > 1 {
                y[1] = 1;
            } else {
                y[0] = 0;
            }
            y
        }];
        for k in 1..n {
            let prev = images[k - 1].clone();
            let next = if k == 1 { sigma_y.clone() } else { r.ring.eval_poly(&sigma_y, &prev) };
            images.push(next);
        }
        r.frob = images
            .iter()
            .map(|img| {
                let mut cols = Vec::with_capacity(n);
                let mut acc = r.ring.one();
                for _ in 0..n {
                    cols.push(acc.clone());
                    acc = r.ring.mul(&acc, img);
                }
                (0..n).map(|j| (0..n).map(|i| cols[i][j]).collect()).collect()
            })
            .collect();
        if n > 1 {
            let back = r.ring.eval_poly(&sigma_y, &images[n - 1]);
            assert_eq!(back, images[0], "sigma^n must fix y");
        }
        r.trace_vec = (0..n)
            .map(|i| {
                let mut yi = r.ring.zero();
                yi[i] = 1;
                let t = r.trace_raw(&yi, 1);
                debug_assert!(t[1..].iter().all(|&c| c == 0));
                t[0]
            })
            .collect();
        Ok(Arc::new(r))
    }

    pub fn p(&self) -> u64 {
        self.residue.p()
    }

    pub fn degree(&self) -> usize {
        self.ring.n()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^M`.
    pub fn modulus_int(&self) -> u64 {
        self.ring.m
    }

    pub fn residue_field(&self) -> &Arc<FieldDesc> {
        &self.residue
    }

    pub fn modulus(&self) -> &[u64] {
        &self.ring.modulus
    }

    /// Root of `g` (integer coefficients) congruent to `start` mod `p`.
    fn hensel_root(&self, g: &[u64], start: Fe) -> Vec<u64> {
        let dg: Vec<u64> = g.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64, self.ring.m)).collect();
        let mut r = start;
        for _ in 0..64 {
            let val = self.ring.eval_poly(g, &r);
            if PolyMod::is_zero(&val) {
                return r;
            }
            let der = self.ring.eval_poly(&dg, &r);
            let inv = self.inv_raw(&der).expect("separable modulus");
            r = self.ring.sub(&r, &self.ring.mul(&val, &inv));
        }
        panic!("Hensel iteration did not converge")
    }

    // ---- raw coordinate operations ----

    pub fn zero_raw(&self) -> Vec<u64> {
        self.ring.zero()
    }

    pub fn one_raw(&self) -> Vec<u64> {
        self.ring.one()
    }

    pub fn add_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.ring.add(a, b)
    }

    pub fn sub_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.ring.sub(a, b)
    }

    pub fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.ring.mul(a, b)
    }

    pub fn reduce_wide(&self, wide: &mut [u128]) -> Vec<u64> {
        self.ring.reduce_wide(wide)
    }

    pub fn frobenius_pow_raw(&self, a: &[u64], k: usize) -> Vec<u64> {
        let n = self.degree();
        let mat = &self.frob[k % n];
        let m = self.ring.m as u128;
        (0..n)
            .map(|j| {
                let s: u128 = mat[j].iter().zip(a).map(|(&f, &x)| f as u128 * x as u128).sum();
                (s % m) as u64
            })
            .collect()
    }

    fn trace_raw(&self, a: &[u64], sub: usize) -> Vec<u64> {
        let n = self.degree();
        let mut acc = self.ring.zero();
        for i in 0..n / sub {
            acc = self.ring.add(&acc, &self.frobenius_pow_raw(a, sub * i));
        }
        acc
    }

    /// `Tr_{Z_{p^n}/Z_p}(a)` as an integer mod `p^M`.
    pub fn trace_to_zp_raw(&self, a: &[u64]) -> u64 {
        let m = self.ring.m as u128;
        let s: u128 = self.trace_vec.iter().zip(a).map(|(&t, &x)| t as u128 * x as u128).sum();
        (s % m) as u64
    }

    pub fn inv_raw(&self, a: &[u64]) -> Result<Vec<u64>> {
        let p = self.p();
        let abar: Fe = a.iter().map(|&c| c % p).collect();
        let mut x = self.residue.inv(&abar)?;
        let two = {
            let mut t = self.ring.zero();
            t[0] = 2 % self.ring.m;
            t
        };
        for _ in 0..=self.precision.ilog2() + 1 {
            let ax = self.ring.mul(a, &x);
            x = self.ring.mul(&x, &self.ring.sub(&two, &ax));
        }
        debug_assert_eq!(self.ring.mul(a, &x), self.ring.one());
        Ok(x)
    }

    /// Teichmuller lift of a residue-field element.
    pub fn teichmuller_raw(&self, x: &[u64]) -> Vec<u64> {
        let q = self.residue.order();
        let mut z: Vec<u64> = x.to_vec();
        for _ in 0..self.precision + 2 {
            let next = self.ring.pow(&z, q);
            if next == z {
                return z;
            }
            z = next;
        }
        panic!("{}", Error::TeichmullerDiverged(self.precision + 2))
    }
}

/// Element of a [`ZqRing`].
#[derive(Clone, PartialEq, Eq)]
pub struct ZqElement {
    pub ring: Arc<ZqRing>,
    pub coords: Vec<u64>,
}

impl fmt::Debug for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl ZqElement {
    pub fn new(ring: &Arc<ZqRing>, coords: Vec<u64>) -> Result<Self> {
        if coords.len() != ring.degree() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                ring.degree(),
                coords.len()
            )));
        }
        let m = ring.modulus_int();
        Ok(ZqElement { ring: ring.clone(), coords: coords.into_iter().map(|c| c % m).collect() })
    }

    pub fn from_int(ring: &Arc<ZqRing>, c: i64) -> Self {
        let mut coords = ring.zero_raw();
        coords[0] = crate::arith::reduce_i64(c, ring.modulus_int());
        ZqElement { ring: ring.clone(), coords }
    }

    pub fn zero(ring: &Arc<ZqRing>) -> Self {
        Self::from_int(ring, 0)
    }

    pub fn one(ring: &Arc<ZqRing>) -> Self {
        Self::from_int(ring, 1)
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!("{:?} vs {:?}", self.ring, other.ring)))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.with(self.ring.add_raw(&self.coords, &other.coords)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.with(self.ring.sub_raw(&self.coords, &other.coords)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.with(self.ring.mul_raw(&self.coords, &other.coords)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.ring.ring.neg(&self.coords))
    }

    pub fn scale(&self, c: i64) -> Self {
        let m = self.ring.modulus_int();
        self.with(self.ring.ring.scale(&self.coords, crate::arith::reduce_i64(c, m)))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.with(self.ring.ring.pow(&self.coords, e))
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(self.with(self.ring.inv_raw(&self.coords)?))
    }

    pub fn is_zero(&self) -> bool {
        PolyMod::is_zero(&self.coords)
    }

    /// Reduction mod `p` in the residue field.
    pub fn residue(&self) -> Fe {
        let p = self.ring.p();
        self.coords.iter().map(|&c| c % p).collect()
    }

    /// The integer `c` if this element lies in `Z_p / p^M`.
    pub fn as_zp(&self) -> Option<u64> {
        self.coords[1..].iter().all(|&c| c == 0).then(|| self.coords[0])
    }

    pub fn frobenius(&self) -> Self {
        self.frobenius_pow(1)
    }

    pub fn frobenius_pow(&self, k: usize) -> Self {
        self.with(self.ring.frobenius_pow_raw(&self.coords, k))
    }

    /// `sum_{i < n/sub} sigma^{sub*i}(self)`, an element fixed by `sigma^sub`.
    pub fn trace(&self, sub: usize) -> Result<Self> {
        let n = self.ring.degree();
        if sub == 0 || !n.is_multiple_of(sub) {
            return Err(Error::DegreeNotDivisible { sub, degree: n });
        }
        Ok(self.with(self.ring.trace_raw(&self.coords, sub)))
    }

    pub fn trace_to_zp(&self) -> u64 {
        self.ring.trace_to_zp_raw(&self.coords)
    }

    /// Whether this is the Teichmuller lift of its residue.
    pub fn is_teichmuller(&self) -> bool {
        self.pow(self.ring.residue_field().order()) == *self
    }

    fn with(&self, coords: Vec<u64>) -> Self {
        ZqElement { ring: self.ring.clone(), coords }
    }
}

pub fn teichmuller(ring: &Arc<ZqRing>, x: &[u64]) -> ZqElement {
    ZqElement { ring: ring.clone(), coords: ring.teichmuller_raw(x) }
}

/// A basis `c` of `Z_{p^l}` over `Z_p` together with its trace-dual basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualBasis {
    pub c: Vec<ZqElement>,
    pub c_star: Vec<ZqElement>,
}

pub fn dual_basis(c: &[ZqElement]) -> Result<DualBasis> {
    let ring = c.first().ok_or(Error::NotABasis)?.ring.clone();
    if c.len() != ring.degree() {
        return Err(Error::NotABasis);
    }
    for x in c {
        x.same_ring(&c[0])?;
    }
    let n = c.len();
    let m = ring.modulus_int();
    let gram: Vec<Vec<u64>> =
        (0..n).map(|i| (0..n).map(|j| ring.trace_to_zp_raw(&ring.mul_raw(&c[i].coords, &c[j].coords))).collect()).collect();
    let ginv = mat_inv_mod(&gram, ring.p(), m).ok_or(Error::NotABasis)?;
    let c_star = (0..n)
        .map(|i| {
            let mut acc = ring.zero_raw();
            for k in 0..n {
                acc = ring.add_raw(&acc, &ring.ring.scale(&c[k].coords, ginv[i][k]));
            }
            ZqElement { ring: ring.clone(), coords: acc }
        })
        .collect();
    Ok(DualBasis { c: c.to_vec(), c_star })
}

/// Embedding `Z_{p^n}/p^M -> Z_{p^N}/p^M` lifting the residue embedding.
#[derive(Clone, Debug)]
pub struct RingEmbedding {
    pub src: Arc<ZqRing>,
    pub dst: Arc<ZqRing>,
    pub image_of_y: Vec<u64>,
    /// `columns[i]` = image of `y^i`, used for preimages.
    columns: Vec<Vec<u64>>,
}

impl RingEmbedding {
    pub fn new(src: &Arc<ZqRing>, dst: &Arc<ZqRing>) -> Result<Self> {
        if src.precision() != dst.precision() {
            return Err(Error::RingMismatch("embedding requires equal precision".into()));
        }
        let fe = FieldEmbedding::new(src.residue_field().clone(), dst.residue_field().clone())?;
        let image_of_y = if src.degree() == 1 {
            dst.zero_raw()
        } else {
            dst.hensel_root(src.modulus(), fe.image_of_y.clone())
        };
        let mut columns = Vec::new();
        let mut acc = dst.one_raw();
        for _ in 0..src.degree() {
            columns.push(acc.clone());
            acc = dst.mul_raw(&acc, &image_of_y);
        }
        Ok(RingEmbedding { src: src.clone(), dst: dst.clone(), image_of_y, columns })
    }

    pub fn map(&self, x: &ZqElement) -> Result<ZqElement> {
        x.same_ring(&ZqElement::zero(&self.src))?;
        if self.src.degree() == 1 {
            return Ok(ZqElement::from_int(&self.dst, x.coords[0] as i64));
        }
        Ok(ZqElement { ring: self.dst.clone(), coords: self.dst.ring.eval_poly(&x.coords, &self.image_of_y) })
    }

    /// Inverse image of an element of the embedded subring.
    pub fn preimage(&self, x: &ZqElement) -> Result<ZqElement> {
        x.same_ring(&ZqElement::zero(&self.dst))?;
        let n = self.dst.degree();
        let b: Vec<Vec<u64>> = (0..n).map(|j| self.columns.iter().map(|c| c[j]).collect()).collect();
        let coords = solve_mod(&b, &x.coords, self.dst.p(), self.dst.modulus_int())
            .ok_or_else(|| Error::RingMismatch("element is not in the embedded subring".into()))?;
        Ok(ZqElement { ring: self.src.clone(), coords })
    }
}

/// Inverse of `a` in `Z/p^M` for a unit `a`.
pub fn zp_inverse(a: u64, pm: u64) -> Result<u64> {
    inv_mod(a, pm).ok_or(Error::NotInvertible)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_of_two_mod_25() {
        let r = ZqRing::new(5, 1, 2).unwrap();
        let t = teichmuller(&r, &[2]);
        assert_eq!(t.coords, vec![7]);
        assert_eq!(t.pow(4), ZqElement::one(&r));
        assert_eq!(teichmuller(&r, &[0]).coords, vec![0]);
        assert_eq!(teichmuller(&r, &[1]).coords, vec![1]);
    }

    #[test]
    fn trace_of_one_is_degree() {
        let r = ZqRing::new(3, 2, 4).unwrap();
        assert_eq!(ZqElement::one(&r).trace(1).unwrap(), ZqElement::from_int(&r, 2));
        assert_eq!(ZqElement::one(&r).trace_to_zp(), 2);
        assert!(ZqElement::one(&r).trace(3).is_err());
    }

    #[test]
    fn frobenius_reduces_to_pth_power() {
        let r = ZqRing::new(3, 4, 3).unwrap();
        let f = r.residue_field().clone();
        for x in f.elements().step_by(7) {
            let lift = ZqElement::new(&r, x.clone()).unwrap();
            assert_eq!(lift.frobenius().residue(), f.frobenius(&x));
            let t = teichmuller(&r, &x);
            assert_eq!(t.frobenius(), t.pow(3));
        }
    }

    #[test]
    fn dual_basis_and_non_basis() {
        let r = ZqRing::new(3, 2, 3).unwrap();
        let f = r.residue_field().clone();
        let c = vec![ZqElement::one(&r), teichmuller(&r, &f.from_index(3))];
        let db = dual_basis(&c).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(db.c_star[i].mul(&c[j]).unwrap().trace_to_zp(), (i == j) as u64);
            }
        }
        let bad = vec![c[0].clone(), c[0].scale(3)];
        assert_eq!(dual_basis(&bad).unwrap_err(), Error::NotABasis);
        let one = ZqRing::new(3, 1, 3).unwrap();
        assert_eq!(dual_basis(&[ZqElement::one(&one)]).unwrap().c_star[0], ZqElement::one(&one));
    }

    #[test]
    fn embedding_round_trip() {
        let src = ZqRing::new(3, 2, 3).unwrap();
        let dst = ZqRing::new(3, 4, 3).unwrap();
        let e = RingEmbedding::new(&src, &dst).unwrap();
        let x = ZqElement::new(&src, vec![5, 11]).unwrap();
        let y = ZqElement::new(&src, vec![7, 2]).unwrap();
        let ex = e.map(&x).unwrap();
        assert_eq!(e.map(&x.mul(&y).unwrap()).unwrap(), ex.mul(&e.map(&y).unwrap()).unwrap());
        assert_eq!(e.map(&x.frobenius()).unwrap(), ex.frobenius());
        assert_eq!(e.preimage(&ex).unwrap(), x);
        // the trace down to the subring is sigma^2-invariant and lands in the image
        let z = ZqElement::new(&dst, vec![1, 2, 3, 4]).unwrap();
        let t = z.trace(2).unwrap();
        assert_eq!(t.frobenius_pow(2), t);
        assert!(e.preimage(&t).is_ok());
    }

    #[test]
    fn inverse_of_unit() {
        let r = ZqRing::new(5, 3, 4).unwrap();
        let x = ZqElement::new(&r, vec![3, 10, 17]).unwrap();
        assert_eq!(x.mul(&x.inverse().unwrap()).unwrap(), ZqElement::one(&r));
        assert!(ZqElement::new(&r, vec![5, 10, 0]).unwrap().inverse().is_err());
    }
}
