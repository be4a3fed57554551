//! The data `(p, a, l, d, fbar, c)` defining one `Z_{p^l}` Artin-Schreier-Witt tower.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::ring_tower::{dual_basis, teichmuller, DualBasis, FieldDesc, RingEmbedding, ZqElement, ZqRing};

/// A `Z_p`-basis `c_1..c_l` of `Z_{p^l}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Basis {
    /// Teichmuller lifts of the given `F_{p^l}` elements (coordinate vectors).
    Teichmuller(Vec<Vec<u64>>),
    /// Explicit power-basis coordinates in `Z_{p^l}`, reduced mod `p^M` on use.
    Explicit(Vec<Vec<i64>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerSpec {
    pub p: u64,
    pub a: usize,
    pub ell: usize,
    pub d: usize,
    /// Coefficients `abar_0..abar_d` of `fbar` as `F_q` coordinate vectors.
    pub fbar: Vec<Vec<u64>>,
    pub basis: Basis,
}

impl TowerSpec {
    /// Spec with the default basis: Teichmuller lifts of `1, y, .., y^{l-1}`.
    pub fn with_default_basis(p: u64, a: usize, ell: usize, fbar: Vec<Vec<u64>>) -> Result<Self> {
        let d = fbar.len().saturating_sub(1);
        let residues = (0..ell)
            .map(|i| {
                let mut v = vec![0; ell];
                v[i] = 1;
                v
            })
            .collect();
        let s = TowerSpec { p, a, ell, d, fbar, basis: Basis::Teichmuller(residues) };
        s.validate()?;
        Ok(s)
    }

    /// Shorthand for `fbar` with coefficients in the prime field.
    pub fn from_prime_coeffs(p: u64, a: usize, ell: usize, coeffs: &[u64]) -> Result<Self> {
        let fbar = coeffs
            .iter()
            .map(|&c| {
                let mut v = vec![0; a];
                v[0] = c % p;
                v
            })
            .collect();
        Self::with_default_basis(p, a, ell, fbar)
    }

    /// `p = 3, a = l = 2, fbar = x^2 + x`.
    pub fn standard_small() -> Self {
        Self::from_prime_coeffs(3, 2, 2, &[0, 1, 1]).expect("valid spec")
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.a as u32)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.a == 0 || self.ell == 0 || !self.a.is_multiple_of(self.ell) {
            return bad(format!("l = {} must divide a = {}", self.ell, self.a));
        }
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if (self.d as u64).is_multiple_of(self.p) {
            return bad("d must be prime to p".into());
        }
        if self.fbar.len() != self.d + 1 {
            return bad(format!("fbar needs d + 1 = {} coefficients", self.d + 1));
        }
        for c in &self.fbar {
            if c.len() != self.a || c.iter().any(|&x| x >= self.p) {
                return bad("fbar coefficients must be F_q coordinate vectors with entries in [0, p)".into());
            }
        }
        let lead = &self.fbar[self.d];
        if lead[0] != 1 || lead[1..].iter().any(|&x| x != 0) {
            return bad("fbar must be monic".into());
        }
        match &self.basis {
            Basis::Teichmuller(v) => {
                if v.len() != self.ell || v.iter().any(|c| c.len() != self.ell || c.iter().any(|&x| x >= self.p)) {
                    return bad("basis needs l residues of F_{p^l}".into());
                }
            }
            Basis::Explicit(v) => {
                if v.len() != self.ell || v.iter().any(|c| c.len() != self.ell) {
                    return bad("basis needs l coordinate vectors of length l".into());
                }
            }
        }
        // Gram test at precision 1
        TowerRings::new(self, 1).map(|_| ())
    }

    pub fn is_teichmuller_basis(&self) -> bool {
        matches!(self.basis, Basis::Teichmuller(_))
    }
}

/// Rings and lifted data of a [`TowerSpec`] at a fixed precision `M`.
#[derive(Clone, Debug)]
pub struct TowerRings {
    pub spec: TowerSpec,
    pub precision: u32,
    /// `Z_q / p^M`.
    pub zq: Arc<ZqRing>,
    /// `Z_{p^l} / p^M`.
    pub zl: Arc<ZqRing>,
    /// `Z_p / p^M`.
    pub zp: Arc<ZqRing>,
    pub emb: RingEmbedding,
    /// Basis and dual basis in `Z_{p^l}`.
    pub dual: DualBasis,
    /// Basis embedded in `Z_q`.
    pub c_q: Vec<ZqElement>,
    /// Teichmuller lift `a_0..a_d` of `fbar` in `Z_q`.
    pub f_q: Vec<ZqElement>,
}

impl TowerRings {
    pub fn new(spec: &TowerSpec, precision: u32) -> Result<Self> {
        let fq = FieldDesc::new(spec.p, spec.a)?;
        let zq = ZqRing::over(fq, precision)?;
        let zl = ZqRing::new(spec.p, spec.ell, precision)?;
        let zp = ZqRing::new(spec.p, 1, precision)?;
        let emb = RingEmbedding::new(&zl, &zq)?;
        let c_l: Vec<ZqElement> = match &spec.basis {
            Basis::Teichmuller(res) => res.iter().map(|r| teichmuller(&zl, r)).collect(),
            Basis::Explicit(coords) => coords
                .iter()
                .map(|c| {
                    let m = zl.modulus_int();
                    ZqElement::new(&zl, c.iter().map(|&x| crate::arith::reduce_i64(x, m)).collect())
                })
                .collect::<Result<_>>()?,
        };
        let dual = dual_basis(&c_l)?;
        let c_q = c_l.iter().map(|c| emb.map(c)).collect::<Result<_>>()?;
        let f_q = spec.fbar.iter().map(|a| teichmuller(&zq, a)).collect();
        Ok(TowerRings { spec: spec.clone(), precision, zq, zl, zp, emb, dual, c_q, f_q })
    }
}
