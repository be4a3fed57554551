use asw_core::polygon::*;
use asw_core::valuation::Valuation;
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i64>;

fn points() -> impl Strategy<Value = Vec<(i64, Valuation)>> {
    proptest::collection::vec(prop_oneof![4 => (0i64..40, 1i64..7).prop_map(|(n, d)| Valuation::Finite(Q::new(n, d))), 1 => Just(Valuation::Infinite)], 2..12)
        .prop_map(|mut v| {
            v[0] = Valuation::Finite(Q::from_integer(0));
            v.into_iter().enumerate().map(|(i, x)| (i as i64, x)).collect()
        })
}

proptest! {
    #[test]
    fn hull_lies_below_points_and_is_convex(pts in points()) {
        let poly = lower_hull(&pts).unwrap();
        let slopes = poly.slope_list();
        for w in slopes.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (x, v) in &pts {
            if let (Valuation::Finite(y), Some(h)) = (v, poly.height_at(*x)) {
                prop_assert!(h <= *y);
            }
        }
        for (x, y) in &poly.vertices {
            prop_assert!(pts.iter().any(|(px, pv)| px == x && *pv == Valuation::Finite(*y)));
        }
    }

    #[test]
    fn hull_of_convex_sequence_keeps_every_point(slopes in proptest::collection::vec(0i64..5, 1..8)) {
        let mut s = slopes.clone();
        s.sort();
        s.dedup();
        let mut pts = vec![(0i64, Valuation::Finite(Q::from_integer(0)))];
        let mut h = Q::from_integer(0);
        for (i, m) in s.iter().enumerate() {
            h += Q::new(*m, 3);
            pts.push((i as i64 + 1, Valuation::Finite(h)));
        }
        let poly = lower_hull(&pts).unwrap();
        prop_assert_eq!(poly.vertices.len(), pts.len());
    }
}

#[test]
fn hodge_bounds_touch_pattern() {
    let b = q_adic_hodge_bounds(2, 2, 3, 5);
    assert_eq!(b, vec![Q::from_integer(0), Q::from_integer(0), Q::new(1, 6), Q::new(1, 2), Q::from_integer(1), Q::new(5, 3)]);
    assert_eq!(touch_indices(2, 5), vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(touch_indices(3, 7), vec![0, 1, 3, 4, 6, 7]);
}
