use nalgebra::DMatrix;
use proptest::prelude::*;
use wsos::interpolation::*;

fn distinct_and_inside(pts: &PointSet) -> bool {
    let inside = pts.points().iter().all(|p| pts.domain().contains(p, 0.0));
    let distinct = pts
        .points()
        .iter()
        .enumerate()
        .all(|(i, p)| pts.points()[..i].iter().all(|q| q != p));
    inside && distinct
}

fn boxes(n: usize) -> impl Strategy<Value = BoxDomain> {
    (prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(0.1..4.0f64, n)).prop_map(|(lo, w)| {
        let up = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
        BoxDomain::new(lo, up).unwrap()
    })
}

#[test]
fn cardinalities() {
    for d in 0..=20 {
        assert_eq!(cheb1_points(d).len(), d + 1);
    }
    for d in 1..=20 {
        assert_eq!(cheb2_points(d).unwrap().len(), d + 1);
    }
    for d in 1..=30 {
        let p = padua_points(d).unwrap();
        assert_eq!(p.len(), (d + 1) * (d + 2) / 2);
        assert!(distinct_and_inside(&p), "padua {d}");
    }
    for (n, deg) in [(3, 2), (3, 4), (4, 3), (5, 2)] {
        let p = approx_fekete_points(n, deg, &BoxDomain::reference(n)).unwrap();
        assert_eq!(p.len(), binomial(n + deg, n));
        assert!(distinct_and_inside(&p));
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

#[test]
fn standard_points_are_unisolvent() {
    for (n, deg) in [(1, 1), (1, 30), (2, 2), (2, 16), (3, 4), (3, 6), (4, 4)] {
        let p = standard_points(n, deg, &BoxDomain::reference(n)).unwrap();
        assert_eq!(p.len(), poly_space_dim(n, deg));
        assert!(vandermonde_inverse_condition(&p, deg) > 1e-10, "({n},{deg})");
    }
}

#[test]
fn fekete_beats_random_subset_conditioning() {
    // the greedy selection should be far better than the first U grid points
    let dom = BoxDomain::reference(3);
    let p = approx_fekete_points(3, 4, &dom).unwrap();
    assert!(vandermonde_inverse_condition(&p, 4) > 1e-3);
}

#[test]
fn chebyshev_values_match_cosine_form() {
    for &t in &[-1.0, -0.3, 0.0, 0.55, 1.0] {
        let vals = chebyshev_values(t, 12);
        let theta = f64::acos(t);
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (k as f64 * theta).cos()).abs() < 1e-13);
        }
    }
}

#[test]
fn cheb2_quadrature_example() {
    for d in 1..=10 {
        let pts = cheb2_points(2 * d).unwrap();
        let w = box_quadrature_weights(&pts, 2 * d).unwrap();
        assert!((w.sum() - 2.0).abs() < 1e-12);
        let t2: f64 = w.iter().zip(pts.points()).map(|(w, t)| w * t[0] * t[0]).sum();
        assert!((t2 - 2.0 / 3.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_round_trip(dom in boxes(2), d in 1usize..10) {
        let p = padua_points(d).unwrap();
        let q = scale_to_box(&p, &dom).unwrap();
        prop_assert!(q.points().iter().all(|t| dom.contains(t, 1e-14)));
        let back = scale_to_box(&q, &BoxDomain::reference(2)).unwrap();
        for (a, b) in p.points().iter().zip(back.points()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn quadrature_is_exact_on_boxes(dom in boxes(2), d in 1usize..12) {
        let pts = scale_to_box(&padua_points(d).unwrap(), &dom).unwrap();
        let w = box_quadrature_weights(&pts, d).unwrap();
        // every tensor Chebyshev basis polynomial of degree <= d
        let v = cheb_vandermonde(&pts, d).values;
        let jac = dom.volume() / 4.0;
        for (j, alpha) in multi_indices(2, d).iter().enumerate() {
            let exact = jac * chebyshev_moment(alpha[0]) * chebyshev_moment(alpha[1]);
            let got = v.column(j).dot(&w);
            prop_assert!((got - exact).abs() <= 1e-10 * dom.volume().max(1.0), "{alpha:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn orthonormalize_spans_the_same_space(rows in 4usize..30, cols in 1usize..4, seed in any::<u64>()) {
        let cols = cols.min(rows);
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as f64 / 1000.0 - 1.0
        };
        let m = DMatrix::from_fn(rows, cols, |_, _| next());
        prop_assume!(m.clone().svd(false, false).singular_values.min() > 1e-6);
        let q = orthonormalize(&BasisMatrix::new(m.clone())).unwrap();
        prop_assert!(q.orthonormal);
        let qtq = q.values.transpose() * &q.values;
        prop_assert!((qtq - DMatrix::identity(cols, cols)).amax() <= 1e-12);
        let proj = &q.values * (q.values.transpose() * &m);
        prop_assert!((&m - proj).norm() <= 1e-10 * m.norm());
    }
}
