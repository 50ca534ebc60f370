mod common;

use common::oracles::{normal_equations, random_points};
use emr_bench::report::ols_fit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let pts = random_points(&mut rng);
        let fit = ols_fit(&pts).unwrap();
        let (slope, intercept, r2) = normal_equations(&pts);
        assert!((fit.slope - slope).abs() <= 1e-9, "{} vs {slope}", fit.slope);
        assert!((fit.intercept - intercept).abs() <= 1e-9);
        assert!((fit.r_squared - r2).abs() <= 1e-9);
        assert_eq!(fit.n_points, pts.len());
    }
}

#[test]
fn collinear_points_are_recovered_exactly() {
    let pts: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, 2.5 * i as f64 - 3.0)).collect();
    let fit = ols_fit(&pts).unwrap();
    assert_eq!(fit.slope, 2.5);
    assert_eq!(fit.intercept, -3.0);
    assert_eq!(fit.r_squared, 1.0);
}

#[test]
fn degenerate_inputs_are_errors() {
    assert!(ols_fit(&[(1.0, 2.0)]).is_err());
    assert!(ols_fit(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
    let flat = ols_fit(&[(1.0, 0.5), (2.0, 0.5), (4.0, 0.5)]).unwrap();
    assert_eq!((flat.slope, flat.r_squared), (0.0, 1.0));
}
