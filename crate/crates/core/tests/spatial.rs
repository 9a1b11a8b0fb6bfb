use approx::assert_abs_diff_eq;
use degent_core::spbasis::{solve_potential_fn, Grid, HarmonicBasis, NumericBasis, SpatialBasis};
use degent_core::Error;

fn oscillator(grid: Grid, k_max: usize) -> NumericBasis {
    solve_potential_fn(grid, |x| 0.5 * x * x, k_max).unwrap()
}

fn gram_residual(basis: &dyn SpatialBasis, modes: usize) -> f64 {
    let samples: Vec<Vec<f64>> = (0..modes).map(|n| basis.sample_mode(n).unwrap()).collect();
    let mut worst = 0.0_f64;
    for m in 0..modes {
        for n in 0..modes {
            let product: Vec<f64> = samples[m].iter().zip(&samples[n]).map(|(a, b)| a * b).collect();
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((basis.quadrature().integrate(&product) - target).abs());
        }
    }
    worst
}

#[test]
fn hermite_modes_are_orthonormal() {
    for omega in [0.5, 1.0, 3.0] {
        let basis = HarmonicBasis::new(omega).unwrap();
        assert!(gram_residual(&basis, 31) < 1e-10, "omega {omega}");
    }
}

#[test]
fn hermite_parity() {
    let basis = HarmonicBasis::new(1.3).unwrap();
    for n in 0..20 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for k in 0..50 {
            let x = 0.13 * k as f64;
            assert!((basis.hermite_mode(n, x) - sign * basis.hermite_mode(n, -x)).abs() <= 1e-8);
        }
    }
}

#[test]
fn oscillator_spectrum_on_fine_grid() {
    let basis = oscillator(Grid::new(-8.0, 8.0, 6401).unwrap(), 4);
    for (n, e) in basis.eigenvalues().iter().enumerate() {
        assert_abs_diff_eq!(*e, n as f64 + 0.5, epsilon = 1e-5);
    }
    assert!(basis.eigenvalues().windows(2).all(|w| w[1] > w[0]));
    assert!(gram_residual(&basis, 4) < 1e-8);
}

#[test]
fn numeric_modes_follow_hermite_with_fixed_sign() {
    let grid = Grid::oscillator_default(1.0).unwrap();
    let numeric = oscillator(grid, 4);
    let analytic = HarmonicBasis::new(1.0).unwrap();
    for n in 0..4 {
        // positive first lobe from the left: odd modes flip relative to Hermite
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let deviation = grid
            .nodes()
            .iter()
            .zip(numeric.eigenfunction(n).unwrap())
            .fold(0.0_f64, |m, (x, v)| m.max((v - sign * analytic.hermite_mode(n, *x)).abs()));
        assert!(deviation <= 1e-4, "mode {n}: {deviation:e}");
    }
}

#[test]
fn numeric_parity_and_nodes() {
    let grid = Grid::new(-6.0, 6.0, 1201).unwrap();
    let basis = solve_potential_fn(grid, |x| x.powi(4) - 0.5 * x * x, 6).unwrap();
    assert!(basis.has_parity());
    for k in 0..6 {
        let f = basis.eigenfunction(k).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let n = f.len();
        for i in 0..n {
            assert!((f[i] - sign * f[n - 1 - i]).abs() <= 1e-5);
        }
        let peak = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let significant: Vec<f64> = f.iter().copied().filter(|v| v.abs() > 1e-6 * peak).collect();
        let nodes = significant.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert_eq!(nodes, k);
    }
}

#[test]
fn asymmetric_potential_has_no_parity() {
    let grid = Grid::new(-8.0, 8.0, 1601).unwrap();
    let basis = solve_potential_fn(grid, |x| 0.5 * x * x + 0.3 * x, 3).unwrap();
    assert!(!basis.has_parity());
    // shifted oscillator: ω(n + ½) − 0.045
    for (n, e) in basis.eigenvalues().iter().enumerate() {
        assert_abs_diff_eq!(*e, n as f64 + 0.5 - 0.045, epsilon = 1e-3);
    }
}

#[test]
fn quartic_ground_state_converges_under_refinement() {
    let coarse = solve_potential_fn(Grid::new(-5.0, 5.0, 2001).unwrap(), |x| x.powi(4), 1).unwrap();
    let fine = solve_potential_fn(Grid::new(-5.0, 5.0, 4001).unwrap(), |x| x.powi(4), 1).unwrap();
    assert!((coarse.eigenvalues()[0] - fine.eigenvalues()[0]).abs() <= 1e-4);
    // reference value of the ground state of −½ d²/dx² + x⁴
    assert_abs_diff_eq!(fine.eigenvalues()[0], 0.667_986_259_2, epsilon = 1e-5);
}

#[test]
fn finite_differences_converge_at_second_order() {
    let error = |points| (oscillator(Grid::new(-8.0, 8.0, points).unwrap(), 3).eigenvalues()[2] - 2.5).abs();
    let (e1, e2, e3) = (error(801), error(1601), error(3201));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn narrow_grid_is_rejected_with_offending_mode() {
    let err = solve_potential_fn(Grid::new(-6.5, 6.5, 1301).unwrap(), |x| 0.5 * x * x, 8).unwrap_err();
    assert!(matches!(err, Error::BoundaryDecay { mode, .. } if mode > 0));
}

#[test]
fn numeric_position_elements_match_analytic() {
    let numeric = oscillator(Grid::new(-9.0, 9.0, 3601).unwrap(), 5);
    let analytic = HarmonicBasis::new(1.0).unwrap();
    let flip = |n: usize| if n % 2 == 0 { 1.0 } else { -1.0 };
    for a in 0..5 {
        for c in 0..5 {
            let sign = flip(a) * flip(c);
            assert_abs_diff_eq!(
                numeric.position(a, c).unwrap(),
                sign * analytic.position(a, c).unwrap(),
                epsilon = 1e-4
            );
            assert_abs_diff_eq!(
                numeric.position_squared(a, c).unwrap(),
                sign * analytic.position_squared(a, c).unwrap(),
                epsilon = 1e-4
            );
        }
    }
}
