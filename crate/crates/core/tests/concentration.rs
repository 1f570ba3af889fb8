use urysohn::concentration::{
    concentration_exact, concentration_power_witness, concentration_witness, hamming_bound, product_bound,
    separation_distance, witness_candidates, MMSpace,
};
use urysohn::hamming::{discrete_pair, HammingPower};
use urysohn::metric::Neighborhood;
use urysohn::{FiniteMetricSpace, Rational};

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn square() -> MMSpace {
    MMSpace::uniform(HammingPower::new(discrete_pair(), 2).unwrap().materialize(4).unwrap())
}

#[test]
fn square_curve_is_frozen() {
    let mm = square();
    let expected = [(r(1, 8), r(1, 2)), (r(1, 4), r(1, 2)), (r(1, 2), r(0, 1)), (r(3, 4), r(0, 1)), (r(1, 1), r(0, 1))];
    for (eps, alpha) in expected {
        assert_eq!(concentration_exact(&mm, eps, Neighborhood::Closed, 16).unwrap().alpha, alpha, "ε = {eps}");
    }
    assert_eq!(concentration_exact(&mm, Rational::zero(), Neighborhood::Closed, 16).unwrap().alpha, r(1, 2));
}

#[test]
fn two_points_at_half() {
    let mm = MMSpace::uniform(discrete_pair());
    assert_eq!(concentration_exact(&mm, r(1, 2), Neighborhood::Closed, 16).unwrap().alpha, r(1, 2));
    assert_eq!(concentration_exact(&mm, r(1, 1), Neighborhood::Closed, 16).unwrap().alpha, r(0, 1));
}

#[test]
fn witnesses_never_exceed_the_exact_value() {
    let cube = MMSpace::uniform(HammingPower::new(discrete_pair(), 3).unwrap().materialize(8).unwrap());
    for eps in [r(1, 3), r(1, 2), r(2, 3)] {
        let exact = concentration_exact(&cube, eps, Neighborhood::Closed, 16).unwrap().alpha;
        let candidates = witness_candidates(&cube, 32, 5);
        let witness = concentration_witness(&cube, eps, Neighborhood::Closed, &candidates).unwrap();
        assert!(witness.alpha_lower <= exact);
    }
    let power = HammingPower::new(discrete_pair(), 3).unwrap();
    let pw = concentration_power_witness(&power, &[r(1, 2), r(1, 2)], r(1, 2)).unwrap();
    let exact = concentration_exact(&cube, r(1, 2), Neighborhood::Closed, 16).unwrap().alpha;
    assert!(pw.alpha_lower <= exact.to_f64() + 1e-12);
}

#[test]
fn bounds_match_closed_forms() {
    assert!((product_bound(&[1.0], 8f64.sqrt()) - 2.0 * (-1f64).exp()).abs() < 1e-12);
    assert!((hamming_bound(4, 1.0, 1.0) - 2.0 * (-0.5f64).exp()).abs() < 1e-12);
    assert_eq!(hamming_bound(3, 1.0, 0.0), 2.0);
}

#[test]
fn separation_on_a_line() {
    let line = FiniteMetricSpace::from_fn((0..4).map(|i| format!("p{i}")).collect(), false, |i, j| {
        Rational::from((i as i128 - j as i128).abs())
    });
    let mm = MMSpace::uniform(line);
    assert_eq!(separation_distance(&mm, r(1, 4), r(1, 4), 16).unwrap(), Rational::from(3));
    assert_eq!(separation_distance(&mm, r(1, 2), r(1, 2), 16).unwrap(), Rational::from(1));
    assert_eq!(separation_distance(&mm, r(3, 4), r(1, 2), 16).unwrap(), Rational::zero());
}
