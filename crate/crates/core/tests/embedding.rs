use proptest::prelude::*;
use unitdist::embed::{
    embed, kite_skeleton, render_svg, subset_echo, trilaterate, EmbedError, Point,
};
use unitdist::rational::{from_f64, rat, Rational};
use unitdist::witness::{build_witness, derive_membership};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn exact_sq(a: &[f64], b: &[f64]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = from_f64(*x).unwrap() - from_f64(*y).unwrap();
            &d * &d
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trilateration_round_trip(
        n in 1usize..=5,
        raw in prop::collection::vec(-8i32..=8, 36),
        target in prop::collection::vec(-8i32..=8, 6),
    ) {
        // anchors on a small integer grid (exact in binary); the simplex
        // e_0 = 0, e_i = unit vectors is added to keep them independent
        let anchors: Vec<Point> = (0..=n)
            .map(|i| (0..n).map(|j| {
                let base = if i > 0 && j == i - 1 { 4.0 } else { 0.0 };
                base + raw[i * 6 + j] as f64 / 4.0
            }).collect())
            .collect();
        let p: Point = target[..n].iter().map(|&v| v as f64 / 2.0).collect();
        let sq: Vec<Rational> = anchors.iter().map(|a| exact_sq(a, &p)).collect();
        match trilaterate(&anchors, &sq) {
            Ok(q) => {
                let scale = 1.0 + p.iter().map(|v| v.abs()).fold(0.0, f64::max);
                prop_assert!(sq_dist(&p, &q).sqrt() <= 1e-7 * scale, "{p:?} vs {q:?}");
            }
            Err(EmbedError::DependentAnchors) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn embeddings_are_deterministic_and_seed_sensitive() {
    let g = build_witness(&derive_membership(3, 1, 0).unwrap()).unwrap();
    let a = embed(&g, 5).unwrap();
    let b = embed(&g, 5).unwrap();
    let c = embed(&g, 6).unwrap();
    assert_eq!(a.coords, b.coords);
    assert_ne!(a.coords, c.coords);
}

#[test]
fn every_unit_edge_is_unit() {
    for (n, k, l) in [
        (2, 0, 1),
        (2, 1, 0),
        (3, 1, 0),
        (4, 1, 0),
        (5, 2, 0),
        (3, 1, 1),
    ] {
        let g = build_witness(&derive_membership(n, k, l).unwrap()).unwrap();
        let e = embed(&g, 1).unwrap();
        for &(u, v) in &g.unit_edges {
            let d = sq_dist(&e.coords[u], &e.coords[v]).sqrt();
            assert!((d - 1.0).abs() <= 1e-9, "({n},{k},{l}) edge {u}-{v}: {d}");
        }
        let (x, y) = g.distinguished;
        let want = unitdist::rational::to_f64(&g.target_sq).sqrt();
        assert!((sq_dist(&e.coords[x], &e.coords[y]).sqrt() - want).abs() <= 1e-9);
        assert!(e.coords.iter().all(|p| p.len() == n));
        assert!(subset_echo(&g, &e, 10, 1).holds(1e-6));
    }
}

#[test]
fn kite_skeleton_distances() {
    let e = kite_skeleton(&rat(1, 1));
    assert_eq!(e.coords.len(), 7);
    assert_eq!(e.segments.len(), 11);
    assert!(e.report().max_residual <= 1e-9);
    let (x, y) = e.distinguished;
    let d2 = sq_dist(&e.coords[x], &e.coords[y]);
    assert!((d2 - 11.0 / 25.0).abs() <= 1e-12, "{d2}");
}

#[test]
fn svg_only_in_the_plane() {
    let g = build_witness(&derive_membership(3, 1, 0).unwrap()).unwrap();
    let e = embed(&g, 0).unwrap();
    assert!(matches!(render_svg(&e), Err(EmbedError::NotPlanar(3))));
    let g = build_witness(&derive_membership(2, 1, 0).unwrap()).unwrap();
    let doc = render_svg(&embed(&g, 0).unwrap()).unwrap();
    assert_eq!(doc.matches("class=\"distinguished\"").count(), 1);
}
