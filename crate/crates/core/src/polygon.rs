//! Newton polygons with exact rational heights, Hodge-bound comparison and
//! slope-pattern extraction.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring_tower::CyclotomicInt;
use crate::valuation::Valuation;

type Q = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(i64, Q)>,
    /// Distinct slopes in increasing order with multiplicities.
    pub slopes: Vec<(Q, usize)>,
    /// Number of trailing infinite-height points dropped from the end.
    pub trailing_infinite: usize,
}

impl NewtonPolygon {
    /// Slopes listed with multiplicity.
    pub fn slope_list(&self) -> Vec<Q> {
        self.slopes.iter().flat_map(|&(s, n)| std::iter::repeat_n(s, n)).collect()
    }

    /// Height of the polygon at `x`, if `x` is within its span.
    pub fn height_at(&self, x: i64) -> Option<Q> {
        let w = self.vertices.windows(2).find(|w| w[0].0 <= x && x <= w[1].0);
        match w {
            Some(w) => {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                Some(y0 + (y1 - y0) * Q::new(x - x0, x1 - x0))
            }
            None => self.vertices.iter().find(|v| v.0 == x).map(|v| v.1),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,height_num,height_den\n");
        for (x, y) in &self.vertices {
            out.push_str(&format!("{x},{},{}\n", y.numer(), y.denom()));
        }
        out
    }

    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("slope_num,slope_den,multiplicity\n");
        for (s, n) in &self.slopes {
            out.push_str(&format!("{},{},{n}\n", s.numer(), s.denom()));
        }
        out
    }
}

/// Lower convex hull of `(x, height)` points; infinite heights are skipped
/// and collinear interior points are not vertices.
pub fn lower_hull(points: &[(i64, Valuation)]) -> Result<NewtonPolygon> {
    let mut pts: Vec<(i64, Q)> = points
        .iter()
        .filter_map(|(x, v)| match v {
            Valuation::Finite(r) => Some((*x, *r)),
            Valuation::Infinite => None,
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidParameter("Newton polygon of no finite points".into()));
    }
    pts.sort_by_key(|p| p.0);
    let last_x = pts.last().unwrap().0;
    let trailing_infinite = points.iter().filter(|(x, v)| *x > last_x && v.is_infinite()).count();
    let mut hull: Vec<(i64, Q)> = Vec::new();
    for pt in pts {
        if let Some(last) = hull.last() {
            if last.0 == pt.0 {
                if pt.1 < last.1 {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord a-pt
            let lhs = (b.1 - a.1) * Q::from_integer(pt.0 - a.0);
            let rhs = (pt.1 - a.1) * Q::from_integer(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let slopes = hull
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / Q::from_integer(w[1].0 - w[0].0), (w[1].0 - w[0].0) as usize))
        .collect();
    Ok(NewtonPolygon { vertices: hull, slopes, trailing_infinite })
}

/// Hull of `(k, val_q(c_k))`.
pub fn q_adic_polygon(coeffs: &[CyclotomicInt], a: u32) -> Result<NewtonPolygon> {
    let pts: Vec<(i64, Valuation)> = coeffs.iter().enumerate().map(|(k, c)| (k as i64, c.val_q(a))).collect();
    lower_hull(&pts)
}

/// `val_q` of an element known only mod `p^P`: anything divisible by `p^P` is
/// reported as infinite.
pub fn val_q_mod(x: &CyclotomicInt, a: u32, precision: u32) -> Valuation {
    let v = x.val_q(a);
    match v {
        Valuation::Finite(r) if r * (a as i64) < Q::from_integer(precision as i64) => v,
        _ => Valuation::Infinite,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    pub pass: bool,
    /// `(block, position, slope)` of the first violation.
    pub witness: Option<(usize, usize, Q)>,
}

/// Slopes of a conductor-`m` `L`-polynomial, with the removed `0` put back,
/// split into `p^{m-1}` blocks of `d`: block `i` starts at `(i-1)/p^{m-1}` and
/// its other slopes lie strictly inside `((i-1)/p^{m-1}, i/p^{m-1})`.
pub fn slope_pattern_check(poly: &NewtonPolygon, d: usize, m: u32, p: u64) -> PatternReport {
    let mut s = vec![Q::from_integer(0)];
    s.extend(poly.slope_list());
    let pm1 = p.pow(m - 1) as i64;
    let fail = |b: usize, j: usize, v: Q| PatternReport { pass: false, witness: Some((b, j, v)) };
    if s.len() != d * pm1 as usize {
        return fail(0, s.len(), Q::from_integer(0));
    }
    for (bi, block) in s.chunks(d).enumerate() {
        let lo = Q::new(bi as i64, pm1);
        let hi = Q::new(bi as i64 + 1, pm1);
        for (j, &v) in block.iter().enumerate() {
            let ok = if j == 0 { v == lo } else { lo < v && v < hi };
            if !ok {
                return fail(bi + 1, j + 1, v);
            }
        }
    }
    PatternReport { pass: true, witness: None }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeReport {
    pub pass: bool,
    /// Indices where equality was required and found.
    pub touch_points: Vec<usize>,
    pub first_violation: Option<usize>,
}

/// `val(w_k) >= bound_k` for all `k`, with equality at every `k` in `touch`.
pub fn hodge_comparison(vals: &[Valuation], bounds: &[Q], touch: &[usize]) -> HodgeReport {
    let mut touched = Vec::new();
    for (k, (v, b)) in vals.iter().zip(bounds).enumerate() {
        let bound = Valuation::Finite(*b);
        let must_touch = touch.contains(&k);
        if *v < bound || (must_touch && *v != bound) {
            return HodgeReport { pass: false, touch_points: touched, first_violation: Some(k) };
        }
        if must_touch {
            touched.push(k);
        }
    }
    HodgeReport { pass: true, touch_points: touched, first_violation: None }
}

/// `k = nd, nd + 1` up to `kmax`.
pub fn touch_indices(d: usize, kmax: usize) -> Vec<usize> {
    (0..=kmax).filter(|k| k % d == 0 || k % d == 1).collect()
}

/// q-adic lower bound `k(k-1)/(2 d p^{m-1})`.
pub fn q_adic_hodge_bounds(d: usize, m: u32, p: u64, kmax: usize) -> Vec<Q> {
    let den = 2 * d as i64 * p.pow(m - 1) as i64;
    (0..=kmax as i64).map(|k| Q::new(k * (k - 1), den)).collect()
}

/// `val_q(w_k(chi))` against `k(k-1)/(2 d p^{m-1})`.
pub fn hodge_comparison_q(vals: &[Valuation], d: usize, m: u32, p: u64) -> HodgeReport {
    let kmax = vals.len().saturating_sub(1);
    hodge_comparison(vals, &q_adic_hodge_bounds(d, m, p, kmax), &touch_indices(d, kmax))
}

/// `val_I(w_k)` against `ceil(lambda_k)`.
pub fn hodge_comparison_i(vals: &[Valuation], lambdas: &[Q], d: usize) -> HodgeReport {
    let bounds: Vec<Q> = lambdas.iter().map(|l| l.ceil()).collect();
    hodge_comparison(vals, &bounds, &touch_indices(d, vals.len().saturating_sub(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: i64, d: i64) -> Valuation {
        Valuation::Finite(Q::new(n, d))
    }

    #[test]
    fn two_segment_hull() {
        let p = lower_hull(&[(0, v(0, 1)), (1, v(1, 6)), (2, v(1, 2))]).unwrap();
        assert_eq!(p.slope_list(), vec![Q::new(1, 6), Q::new(1, 3)]);
    }

    #[test]
    fn infinite_points_skipped() {
        let p = lower_hull(&[(0, v(0, 1)), (1, Valuation::Infinite), (2, v(1, 1))]).unwrap();
        assert_eq!(p.slopes, vec![(Q::new(1, 2), 2)]);
        let p = lower_hull(&[(0, v(0, 1)), (1, v(1, 1)), (2, v(1, 1))]).unwrap();
        assert_eq!(p.slope_list(), vec![Q::new(1, 2), Q::new(1, 2)]);
        assert_eq!(p.vertices.len(), 2);
    }

    #[test]
    fn trailing_infinite_reported() {
        let p = lower_hull(&[(0, v(0, 1)), (1, v(1, 1)), (2, Valuation::Infinite)]).unwrap();
        assert_eq!(p.trailing_infinite, 1);
        assert!(lower_hull(&[]).is_err());
    }

    #[test]
    fn pattern_blocks() {
        let pts: Vec<(i64, Valuation)> = [(0, 0, 1), (1, 1, 6), (2, 1, 2), (3, 1, 1), (4, 5, 3), (5, 5, 2)]
            .iter()
            .map(|&(x, n, d)| (x, v(n, d)))
            .collect();
        let poly = lower_hull(&pts).unwrap();
        assert!(slope_pattern_check(&poly, 2, 2, 3).pass);
        // slope 1/3 injected next to 1/2: three slopes for one block of two
        let bad = lower_hull(&[(0, v(0, 1)), (1, v(1, 3)), (2, v(5, 6))]).unwrap();
        let r = slope_pattern_check(&bad, 2, 1, 3);
        assert!(!r.pass);
        assert_eq!(r.witness, Some((0, 3, Q::from_integer(0))));
        // too few slopes for three blocks
        let shifted = lower_hull(&[(0, v(0, 1)), (1, v(1, 6)), (2, v(7, 12)), (3, v(13, 12))]).unwrap();
        assert!(!slope_pattern_check(&shifted, 2, 2, 3).pass);
        let good = lower_hull(&[(0, v(0, 1)), (1, v(1, 2))]).unwrap();
        assert!(slope_pattern_check(&good, 2, 1, 3).pass);
    }

    #[test]
    fn hodge_touch() {
        let vals = vec![v(0, 1), v(0, 1), v(1, 2), v(3, 2)];
        let r = hodge_comparison_q(&vals, 2, 1, 3);
        assert!(r.pass);
        assert_eq!(r.touch_points, vec![0, 1, 2, 3]);
        let r = hodge_comparison_q(&[v(0, 1), v(0, 1), v(1, 1)], 2, 1, 3);
        assert_eq!(r.first_violation, Some(2));
    }

    #[test]
    fn csv_forms() {
        let p = lower_hull(&[(0, v(0, 1)), (1, v(1, 2))]).unwrap();
        assert_eq!(p.to_csv(), "index,height_num,height_den\n0,0,1\n1,1,2\n");
        assert_eq!(p.slopes_csv(), "slope_num,slope_den,multiplicity\n1,2,1\n");
    }
}
