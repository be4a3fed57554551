//! Dwork side: the coefficients `e_n(pi)`, the matrix `N`, and the
//! characteristic series `C*(pi, s) = det(1 - s sigma^{a-1}(N)..sigma(N)N)`.

use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, det_one_minus_s, mat_mul};
use crate::mvseries::{artin_hasse, to_pi_coords, to_t_coords, MvSeries};
use crate::ring_tower::{Fe, FieldDesc, ZqRing};
use crate::tower::{TowerRings, TowerSpec};

/// Default cap on the truncation size `K`.
pub const DEFAULT_SIZE_LIMIT: usize = 512;

/// `lambda_k = a k (k-1) (p-1) / (2d)`.
pub fn lambda(spec: &TowerSpec, k: usize) -> Ratio<i64> {
    let (p, a, d) = (spec.p as i64, spec.a as i64, spec.d as i64);
    let k = k as i64;
    let l = Ratio::new(a * k * (k - 1) * (p - 1), 2 * d);
    if k % d == 0 || k % d == 1 {
        assert!((l / spec.ell as i64).is_integer(), "lambda_{k}/l is not an integer");
    }
    l
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// `e_0, .., e_nmax` with `prod_j prod_i E(c_j a_i pi_j x^i) = sum_n e_n x^n`.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub e: Vec<MvSeries>,
    pub d: usize,
    pub maxdeg: usize,
    zero: MvSeries,
}

impl ExpansionCoefficients {
    /// `e_n`; indices past `d * maxdeg` are zero in the truncation.
    pub fn get(&self, n: usize) -> Result<&MvSeries> {
        if let Some(e) = self.e.get(n) {
            Ok(e)
        } else if n > self.d * self.maxdeg {
            Ok(&self.zero)
        } else {
            Err(Error::InsufficientCoefficients(n))
        }
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

fn unit_exp(nvars: usize, j: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; nvars];
    e[j] = k;
    e
}

pub fn expansion_coefficients(spec: &TowerSpec, nmax: usize, precision: u32, maxdeg: usize) -> Result<ExpansionCoefficients> {
    let rings = TowerRings::new(spec, precision)?;
    expansion_coefficients_in(&rings, nmax, maxdeg)
}

pub fn expansion_coefficients_in(rings: &TowerRings, nmax: usize, maxdeg: usize) -> Result<ExpansionCoefficients> {
    let spec = &rings.spec;
    let d = spec.d;
    let need = ceil_div(nmax, d);
    if need > maxdeg {
        return Err(Error::DegreeTooSmall { have: maxdeg, need });
    }
    let zq = &rings.zq;
    let nv = spec.ell;
    let ah = artin_hasse(spec.p, maxdeg, rings.precision).reduced;
    let zero = MvSeries::zero(zq, nv, maxdeg);
    let mut poly = vec![zero.clone(); nmax + 1];
    poly[0] = zero.one_like();
    for j in 0..nv {
        for i in 0..=d {
            let ca = rings.c_q[j].mul(&rings.f_q[i])?;
            if ca.is_zero() {
                continue;
            }
            // coefficient of pi_j^k x^{ik} in E(c_j a_i pi_j x^i)
            let mut coef = Vec::with_capacity(maxdeg + 1);
            let mut pw = zq.one_raw();
            for &h in &ah {
                let mut c = pw.clone();
                for x in c.iter_mut() {
                    *x = crate::arith::mul_mod(*x, h, zq.modulus_int());
                }
                coef.push(c);
                pw = zq.mul_raw(&pw, &ca.coords);
            }
            if i == 0 {
                let mut ser = zero.clone();
                for (k, c) in coef.iter().enumerate() {
                    ser.set_coeff(&unit_exp(nv, j, k as u32), c);
                }
                poly = poly.par_iter().map(|x| x.mul(&ser)).collect::<Result<_>>()?;
            } else {
                poly = (0..=nmax)
                    .into_par_iter()
                    .map(|n| {
                        let mut acc = zero.clone();
                        for (k, c) in coef.iter().enumerate().take(n / i + 1) {
                            acc.add_mul_monomial(&poly[n - i * k], &unit_exp(nv, j, k as u32), c)?;
                        }
                        Ok(acc)
                    })
                    .collect::<Result<_>>()?;
            }
        }
    }
    for (n, e) in poly.iter().enumerate() {
        if let Some(o) = e.order() {
            assert!(o >= ceil_div(n, d), "e_{n} has order {o} below ceil(n/d)");
        }
    }
    Ok(ExpansionCoefficients { e: poly, d, maxdeg, zero })
}

/// Right-hand side of `n e_n = sum_{i, r} i e_{n - i p^r} a_i^{p^r} sum_j (c_j pi_j)^{p^r}`.
pub fn recurrence_rhs(ec: &ExpansionCoefficients, rings: &TowerRings, n: usize) -> Result<MvSeries> {
    let spec = &rings.spec;
    let zq = &rings.zq;
    let mut acc = ec.zero.clone();
    for i in 1..=spec.d {
        let mut pr = 1usize;
        while i * pr <= n {
            let ai = rings.f_q[i].pow(pr as u64).scale(i as i64);
            for j in 0..spec.ell {
                let c = zq.mul_raw(&ai.coords, &rings.c_q[j].pow(pr as u64).coords);
                acc.add_mul_monomial(ec.get(n - i * pr)?, &unit_exp(spec.ell, j, pr as u32), &c)?;
            }
            pr *= spec.p as usize;
        }
    }
    Ok(acc)
}

/// Outcome of sweeping the recurrence over an e-list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub checked_upto: usize,
    /// First `n` where the two sides differ, with a differing monomial.
    pub failure: Option<(usize, Vec<u32>)>,
}

impl RecurrenceReport {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
    }
}

fn first_difference(a: &MvSeries, b: &MvSeries) -> Option<Vec<u32>> {
    (0..a.table.len()).find(|&i| a.coeff_at(i) != b.coeff_at(i)).map(|i| a.table.exps[i].clone())
}

pub fn verify_recurrence(ec: &ExpansionCoefficients, rings: &TowerRings) -> Result<RecurrenceReport> {
    let diffs: Vec<Option<(usize, Vec<u32>)>> = (1..ec.len())
        .into_par_iter()
        .map(|n| {
            let lhs = ec.e[n].scale_int(n as i64);
            let rhs = recurrence_rhs(ec, rings, n)?;
            Ok(first_difference(&lhs, &rhs).map(|m| (n, m)))
        })
        .collect::<Result<_>>()?;
    Ok(RecurrenceReport { checked_upto: ec.len().saturating_sub(1), failure: diffs.into_iter().flatten().next() })
}

/// Truncation of `sigma^twist(N)` to `rows x cols`.
#[derive(Clone, Debug)]
pub struct DworkMatrix {
    pub rows: usize,
    pub cols: usize,
    pub twist: usize,
    pub entries: Vec<Vec<MvSeries>>,
}

pub fn build_matrix(ec: &ExpansionCoefficients, k: usize, twist: usize) -> Result<DworkMatrix> {
    build_block(ec, k, k, twist)
}

/// Entry `(m, n)` is `sigma^twist(e_{mp - n})`, zero when `mp < n`.
pub fn build_block(ec: &ExpansionCoefficients, rows: usize, cols: usize, twist: usize) -> Result<DworkMatrix> {
    let p = ec.zero.ring.p() as usize;
    let entries = (0..rows)
        .into_par_iter()
        .map(|m| {
            (0..cols)
                .map(|n| {
                    if m * p < n {
                        return Ok(ec.zero.clone());
                    }
                    let idx = m * p - n;
                    let e = ec.get(idx)?.frobenius_pow(twist);
                    if let Some(o) = e.order() {
                        assert!(o >= ceil_div(idx, ec.d), "entry ({m},{n}) breaks the incremental bound");
                    }
                    Ok(e)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DworkMatrix { rows, cols, twist, entries })
}

/// `K = max(ceil(dD/(a(p-1))) + kmax + 1, floor(dD p^{a-1}/(p^a - 1)) + 1)`.
pub fn truncation_size(spec: &TowerSpec, kmax: usize, maxdeg: usize) -> usize {
    let (p, a, d) = (spec.p as usize, spec.a as u32, spec.d);
    let base = ceil_div(d * maxdeg, spec.a * (p - 1)) + kmax + 1;
    let chain = (d * maxdeg * p.pow(a - 1)) / (p.pow(a) - 1) + 1;
    base.max(chain)
}

/// Inner index bound for the `a`-fold product: any chain through a larger
/// index picks up an entry of order above `D`.
pub fn inner_size(spec: &TowerSpec, k: usize, maxdeg: usize) -> usize {
    if spec.a == 1 {
        return k;
    }
    k.max((spec.d * maxdeg + k - 1) / (spec.p as usize - 1) + 1)
}

#[derive(Clone, Debug)]
pub struct CharSeriesOptions {
    pub k_override: Option<usize>,
    pub size_limit: usize,
}

impl Default for CharSeriesOptions {
    fn default() -> Self {
        CharSeriesOptions { k_override: None, size_limit: DEFAULT_SIZE_LIMIT }
    }
}

/// Everything needed to reproduce a [`CharSeries`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: TowerSpec,
    pub precision: u32,
    pub maxdeg: usize,
    pub kmax: usize,
    pub k: usize,
    pub inner: usize,
}

/// `w_0..w_kmax` of `C*(pi, s)`, with `Z_p` coefficients, in both coordinate systems.
#[derive(Clone, Debug)]
pub struct CharSeries {
    pub w_pi: Vec<MvSeries>,
    /// The same series in `T_j = E(pi_j) - 1`.
    pub w_t: Vec<MvSeries>,
    pub manifest: RunManifest,
}

impl CharSeries {
    pub fn kmax(&self) -> usize {
        self.manifest.kmax
    }

    /// Manifest line followed by each `w_k` in canonical text form.
    pub fn to_text(&self, t_coords: bool) -> String {
        let mut out = format!("# manifest {}\n", serde_json::to_string(&self.manifest).expect("manifest serializes"));
        out.push_str(if t_coords { "# coords T\n" } else { "# coords pi\n" });
        let ws = if t_coords { &self.w_t } else { &self.w_pi };
        for (k, w) in ws.iter().enumerate() {
            out.push_str(&format!("## w_{k}\n"));
            out.push_str(&w.to_text());
        }
        out
    }

    /// Inverse of [`CharSeries::to_text`]; lines before the manifest are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let start = text.find("# manifest ").ok_or_else(|| bad("no manifest line"))?;
        let mut lines = text[start..].lines();
        let manifest: RunManifest = serde_json::from_str(lines.next().unwrap_or_default().trim_start_matches("# manifest "))
            .map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        let t_coords = match lines.next() {
            Some("# coords T") => true,
            Some("# coords pi") => false,
            _ => return Err(bad("missing coords line")),
        };
        let mut chunks: Vec<String> = Vec::new();
        for line in lines {
            if line.starts_with("## w_") {
                chunks.push(String::new());
            } else if let Some(c) = chunks.last_mut() {
                c.push_str(line);
                c.push('\n');
            }
        }
        if chunks.len() != manifest.kmax + 1 {
            return Err(bad("series count differs from manifest kmax"));
        }
        let ws: Vec<MvSeries> = chunks.iter().map(|c| MvSeries::from_text(c)).collect::<Result<_>>()?;
        let (w_pi, w_t) = if t_coords {
            (ws.iter().map(to_pi_coords).collect::<Result<_>>()?, ws)
        } else {
            let t = ws.iter().map(to_t_coords).collect::<Result<_>>()?;
            (ws, t)
        };
        Ok(CharSeries { w_pi, w_t, manifest })
    }
}

fn to_zp(s: &MvSeries, zp: &Arc<ZqRing>) -> Result<MvSeries> {
    if let Some((e, _)) = s.terms().find(|(_, c)| c[1..].iter().any(|&x| x != 0)) {
        return Err(Error::NotZp { monomial: e.to_vec() });
    }
    Ok(s.map_coeffs(zp, |c| vec![c[0]]))
}

pub fn char_series(spec: &TowerSpec, kmax: usize, precision: u32, maxdeg: usize) -> Result<CharSeries> {
    let rings = TowerRings::new(spec, precision)?;
    char_series_with(&rings, kmax, maxdeg, &CharSeriesOptions::default())
}

pub fn char_series_with(rings: &TowerRings, kmax: usize, maxdeg: usize, opts: &CharSeriesOptions) -> Result<CharSeries> {
    let spec = &rings.spec;
    if let Some(j) = rings.c_q.iter().position(|c| !c.is_teichmuller()) {
        return Err(Error::NonTeichmullerBasis(j));
    }
    let k = opts.k_override.unwrap_or_else(|| truncation_size(spec, kmax, maxdeg));
    let inner = inner_size(spec, k, maxdeg);
    if inner > opts.size_limit {
        return Err(Error::SizeGuard { dim: inner, limit: opts.size_limit });
    }
    let p = spec.p as usize;
    let nmax = (spec.d * maxdeg).min((inner - 1) * p);
    let ec = expansion_coefficients_in(rings, nmax, maxdeg)?;
    for (n, e) in ec.e.iter().enumerate() {
        assert!(e.frobenius_pow(spec.a) == *e, "sigma^a moves e_{n}");
    }
    let a = spec.a;
    let mut prod = if a == 1 { build_block(&ec, k, k, 0)? } else { build_block(&ec, inner, k, 0)? }.entries;
    for t in 1..a {
        let rows = if t == a - 1 { k } else { inner };
        let m = build_block(&ec, rows, inner, t)?;
        prod = mat_mul(&m.entries, &prod);
    }
    let w = det_one_minus_s(&prod, kmax);
    let mut w_pi = Vec::with_capacity(kmax + 1);
    for (i, wk) in w.iter().enumerate() {
        let z = to_zp(wk, &rings.zp)?;
        if let Some(o) = z.order() {
            let l = lambda(spec, i).ceil().to_integer() as usize;
            assert!(o >= l, "w_{i} has order {o} below lambda_{i}");
        }
        w_pi.push(z);
    }
    // det_one_minus_s returns nothing for an empty matrix
    while w_pi.len() <= kmax {
        let z = MvSeries::zero(&rings.zp, spec.ell, maxdeg);
        w_pi.push(if w_pi.is_empty() { z.one_like() } else { z });
    }
    let w_t = w_pi.par_iter().map(to_t_coords).collect::<Result<_>>()?;
    let manifest = RunManifest { spec: spec.clone(), precision: rings.precision, maxdeg, kmax, k, inner };
    Ok(CharSeries { w_pi, w_t, manifest })
}

/// `goth_S(T) = prod_{i=1}^{l} sum_j sigma^i(c_j) T_j`, with coefficients in `Z_p / p^M`.
pub fn goth_s(rings: &TowerRings, maxdeg: usize) -> Result<MvSeries> {
    let ell = rings.spec.ell;
    let zl = &rings.zl;
    let mut acc = MvSeries::one(zl, ell, maxdeg);
    for i in 1..=ell {
        let mut lin = MvSeries::zero(zl, ell, maxdeg);
        for (j, c) in rings.dual.c.iter().enumerate() {
            lin.set_coeff(&unit_exp(ell, j, 1), &c.frobenius_pow(i).coords);
        }
        acc = acc.mul(&lin)?;
    }
    to_zp(&acc, &rings.zp)
}

/// A power series `sum_n v_n X^n` over `F_q`, in the linear form `X = sum_j cbar_j pi_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearFormSeries {
    pub coeffs: Vec<Fe>,
}

impl LinearFormSeries {
    pub fn leading_exponent(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.iter().any(|&x| x != 0))
    }
}

/// Express `s` (over `F_q` = `Z_q / p`) as a series in `lin`.
pub fn in_linear_form(s: &MvSeries, lin: &MvSeries, field: &FieldDesc) -> Result<LinearFormSeries> {
    let mut coeffs = Vec::with_capacity(s.maxdeg() + 1);
    let mut pw = lin.one_like();
    for n in 0..=s.maxdeg() {
        let table = &s.table;
        let range = table.deg_start[n]..table.deg_start[n + 1];
        let v = match range.clone().find(|&i| pw.coeff_at(i).iter().any(|&x| x != 0)) {
            Some(r) => field.mul(s.coeff_at(r), &field.inv(pw.coeff_at(r))?),
            None => field.zero(),
        };
        for i in range {
            if field.mul(&v, pw.coeff_at(i)) != s.coeff_at(i) {
                return Err(Error::NotInLinearForm { monomial: table.exps[i].clone() });
            }
        }
        coeffs.push(v);
        pw = pw.mul(lin)?;
    }
    Ok(LinearFormSeries { coeffs })
}

/// The leading `k x k` minor of `N` mod `p`, as a series in `sum_j cbar_j pi_j`.
pub fn minor_mod_p(spec: &TowerSpec, k: usize, maxdeg: usize) -> Result<LinearFormSeries> {
    if k == 0 {
        return Err(Error::InvalidParameter("minor size must be positive".into()));
    }
    let rings = TowerRings::new(spec, 1)?;
    let nmax = ((k - 1) * spec.p as usize).min(spec.d * maxdeg);
    let ec = expansion_coefficients_in(&rings, nmax, maxdeg)?;
    let m = build_matrix(&ec, k, 0)?;
    let minor = det(&m.entries).expect("k >= 1");
    let mut lin = MvSeries::zero(&rings.zq, spec.ell, maxdeg);
    for (j, c) in rings.c_q.iter().enumerate() {
        lin.set_coeff(&unit_exp(spec.ell, j, 1), &c.coords);
    }
    in_linear_form(&minor, &lin, rings.zq.residue_field())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_values() {
        let s = TowerSpec::standard_small();
        assert_eq!(lambda(&s, 0), Ratio::from_integer(0));
        assert_eq!(lambda(&s, 1), Ratio::from_integer(0));
        assert_eq!(lambda(&s, 2), Ratio::from_integer(2));
        assert_eq!(lambda(&s, 3), Ratio::from_integer(6));
    }

    #[test]
    fn rank_one_linear_f_gives_artin_hasse() {
        let s = TowerSpec::from_prime_coeffs(5, 1, 1, &[0, 1]).unwrap();
        let ec = expansion_coefficients(&s, 12, 4, 12).unwrap();
        let ah = artin_hasse(5, 12, 4).reduced;
        for n in 0..=12 {
            let mut want = MvSeries::zero(&ec.e[0].ring, 1, 12);
            want.set_coeff(&[n as u32], &[ah[n]]);
            assert_eq!(ec.e[n], want, "n = {n}");
        }
    }

    #[test]
    fn e_list_refuses_small_degree() {
        let s = TowerSpec::standard_small();
        assert_eq!(expansion_coefficients(&s, 9, 2, 4).unwrap_err(), Error::DegreeTooSmall { have: 4, need: 5 });
    }

    #[test]
    fn matrix_shape() {
        let s = TowerSpec::standard_small();
        let ec = expansion_coefficients(&s, 12, 2, 6).unwrap();
        let m = build_matrix(&ec, 4, 1).unwrap();
        assert_eq!(m.entries[0][0], ec.e[0].one_like());
        assert!(m.entries[0][1..].iter().all(|e| e.is_zero()));
        assert_eq!(m.entries[1][0], ec.e[3].frobenius_pow(1));
        assert_eq!(m.entries[1][3], ec.e[0].one_like());
    }

    #[test]
    fn goth_s_rank_one_is_t() {
        let s = TowerSpec::from_prime_coeffs(3, 2, 1, &[0, 1, 1]).unwrap();
        let r = TowerRings::new(&s, 3).unwrap();
        let g = goth_s(&r, 3).unwrap();
        assert_eq!(g, MvSeries::var(&r.zp, 1, 3, 0));
    }
}
