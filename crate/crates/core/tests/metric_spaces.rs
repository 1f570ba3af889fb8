use proptest::prelude::*;
use urysohn::hamming::{discrete_pair, HammingPower};
use urysohn::metric::{
    amalgamate, displaced_copy, epsilon_neighborhood, katetov_extend, path_metric, validate, KatetovFunction, Neighborhood,
    PointedEmbedding, WeightedGraph,
};
use urysohn::{FiniteMetricSpace, MetricSpace, Rational};

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize, i128)>)> {
    (2usize..8).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n, 1i128..20), 0..16);
        (Just(n), edges)
    })
}

fn connected(n: usize, edges: &[(usize, usize, i128)]) -> WeightedGraph {
    let mut g = WeightedGraph::with_vertices(n);
    for i in 1..n {
        g.add_edge(i - 1, i, r(20, 3));
    }
    for &(u, v, w) in edges {
        if u != v {
            g.add_edge(u, v, r(w, 3));
        }
    }
    g
}

proptest! {
    #[test]
    fn path_metrics_are_metrics((n, edges) in graph_strategy()) {
        let space = path_metric(&connected(n, &edges)).unwrap();
        prop_assert!(validate(&space).is_empty());
    }

    #[test]
    fn distance_plus_half_is_katetov((n, edges) in graph_strategy(), p in 0usize..8) {
        let space = path_metric(&connected(n, &edges)).unwrap();
        let f = KatetovFunction::distance_from(&space, p % n, r(1, 2));
        prop_assert!(f.check(&space).is_ok());
        let grown = katetov_extend(&space, &f, "new").unwrap();
        prop_assert!(validate(&grown).is_empty());
        prop_assert_eq!(grown.dist(n, p % n), r(1, 2));
    }

    #[test]
    fn amalgam_of_two_points_is_the_infimum((n, edges) in graph_strategy(), p in 0usize..8, q in 0usize..8) {
        let x = path_metric(&connected(n, &edges)).unwrap();
        let f = KatetovFunction::distance_from(&x, p % n, r(1, 3));
        let g = KatetovFunction::distance_from(&x, q % n, r(1, 4));
        let y = katetov_extend(&x, &f, "y").unwrap();
        let z = katetov_extend(&x, &g, "z").unwrap();
        let a = amalgamate(&y, &z, &x, &PointedEmbedding::identity(n), &PointedEmbedding::identity(n)).unwrap();
        prop_assert!(validate(&a.space).is_empty());
        let expected = (0..n).map(|i| f.values[i] + g.values[i]).min().unwrap();
        prop_assert_eq!(a.space.dist(a.from_y[n], a.from_z[n]), expected);
    }
}

#[test]
fn powers_keep_the_diameter() {
    let base = path_metric(WeightedGraph::with_vertices(3).add_edge(0, 1, r(1, 2)).add_edge(1, 2, r(3, 4))).unwrap();
    for m in 1..=3 {
        let power = HammingPower::new(base.clone(), m).unwrap();
        let full = power.materialize(64).unwrap();
        assert_eq!(full.diameter(), base.diameter());
        assert_eq!(power.diameter(), base.diameter());
    }
}

#[test]
fn cube_neighbourhood_of_a_corner() {
    let cube = HammingPower::new(discrete_pair(), 4).unwrap();
    let space = cube.materialize(16).unwrap();
    let origin = cube.encode(&[0, 0, 0, 0]);
    let closed = epsilon_neighborhood(&space, &[origin], r(1, 4), Neighborhood::Closed);
    let open = epsilon_neighborhood(&space, &[origin], r(1, 4), Neighborhood::Open);
    assert_eq!(closed.len(), 5);
    assert_eq!(open, vec![origin]);
}

#[test]
fn displaced_copy_sits_at_the_offset() {
    let x = FiniteMetricSpace::equilateral(3, Rational::one());
    let (w, copy) = displaced_copy(&x, &[0, 1, 2], r(1, 8)).unwrap();
    assert!(validate(&w).is_empty());
    for i in 0..3 {
        assert_eq!(w.dist(i, copy[i]), r(1, 8));
        for j in 0..3 {
            assert_eq!(w.dist(copy[i], copy[j]), x.dist(i, j));
        }
    }
}

#[test]
fn triangle_violation_is_reported() {
    let ids = vec!["a".into(), "b".into(), "c".into()];
    let bad = vec![
        vec![r(0, 1), r(1, 1), r(3, 1)],
        vec![r(1, 1), r(0, 1), r(1, 1)],
        vec![r(3, 1), r(1, 1), r(0, 1)],
    ];
    let space = FiniteMetricSpace::new(ids, bad, false).unwrap();
    let violations = validate(&space);
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0].to_string(), "triangle (0, 1, 2): d(0, 2) > d(0, 1) + d(1, 2)");
}
