//! Library results against independently computed references.

use modflow_core::chebyshev::{
    certified_degree_for_log, clenshaw, degree_for_log, log_series_coefficients, rigorous_log_error_bound,
    truncation_error_bound,
};
use modflow_core::dct;
use modflow_core::encoding::{parse_json, purify, reduced_density, Loaded};
use modflow_core::estimators::{correlator, entropy_functional, entropy_qpe, shots_required, CorrelatorMode};
use modflow_core::flow::{approx_flow, exact_flow, query_count};
use modflow_core::matfun::{eig_hermitian, operator_norm};
use modflow_core::mh_poly::{modular_hamiltonian_poly, rect_poly, sign_poly, trig_polys};
use modflow_core::random::{random_density, random_hermitian, rng};
use modflow_core::special::{bessel_j_sequence, scaled_bessel_i_sequence};
use modflow_core::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn bessel_j_series(n: usize, x: f64) -> f64 {
    (0..40)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * (x / 2.0).powi((2 * m + n) as i32) / (factorial(m) * factorial(m + n))
        })
        .sum()
}

fn bessel_i_series(n: usize, z: f64) -> f64 {
    (0..60).map(|m| (z / 2.0).powi((2 * m + n) as i32) / (factorial(m) * factorial(m + n))).sum()
}

/// `ρ^{-it} O ρ^{it}` for diagonal ρ: entry (j, k) picks up `(λ_k/λ_j)^{it}`.
fn diagonal_flow(lambda: &[f64], o: &ComplexMatrix, t: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(o.rows(), o.cols(), |j, k| {
        Complex64::from_polar(1.0, t * (lambda[k].ln() - lambda[j].ln())) * o[(j, k)]
    })
}

fn sample_operator() -> ComplexMatrix {
    let entries = [
        [c(0.3, 0.0), c(0.1, 0.2), c(-0.2, 0.05)],
        [c(0.1, -0.2), c(-0.4, 0.0), c(0.15, 0.1)],
        [c(-0.2, -0.05), c(0.15, -0.1), c(0.2, 0.0)],
    ];
    ComplexMatrix::from_fn(3, 3, |i, j| entries[i][j])
}

#[test]
fn clenshaw_matches_trigonometric_definition() {
    let coeffs = [0.5, -1.25, 0.75, 0.0, 2.0, -0.1];
    for i in 0..=40 {
        let x = -1.0 + i as f64 / 20.0;
        let direct: f64 = coeffs.iter().enumerate().map(|(k, a)| a * (k as f64 * x.acos()).cos()).sum();
        assert!((clenshaw(&coeffs, x) - direct).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn log_series_partial_sums() {
    // ln x = -ln 2 + Σ (-1)^{n+1} T_{2n}(x) / n
    for terms in [1, 5, 40] {
        let s = log_series_coefficients(terms);
        for &x in &[0.2, 0.55, 0.9, -0.7] {
            let theta = f64::acos(x);
            let direct: f64 = -std::f64::consts::LN_2
                + (1..=terms)
                    .map(|n| {
                        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                        sign * (2.0 * n as f64 * theta).cos() / n as f64
                    })
                    .sum::<f64>();
            assert!((s.eval(x) - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn certified_degree_meets_tolerance_on_dense_grid() {
    for &(kappa, eps) in &[(4.0, 1e-2), (8.0, 1e-3), (16.0, 1e-2), (64.0, 1e-1)] {
        let n = certified_degree_for_log(kappa, eps).unwrap();
        let s = log_series_coefficients(n);
        let worst = (0..=2000)
            .map(|i| 1.0 / kappa + (1.0 - 1.0 / kappa) * i as f64 / 2000.0)
            .map(|x| (s.eval(x) - x.ln()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= eps, "κ={kappa} ε={eps}: {worst}");
        assert!(rigorous_log_error_bound(1.0 / kappa, n) <= eps);
    }
}

#[test]
fn closed_form_degree_agrees_with_its_bound() {
    for &(kappa, eps) in &[(4.0, 1e-2), (8.0, 1e-3), (64.0, 1e-1)] {
        let n = degree_for_log(kappa, eps).unwrap();
        assert!(truncation_error_bound(kappa, n) <= eps);
        if n > 0 {
            assert!(truncation_error_bound(kappa, n - 1) > eps);
        }
    }
}

#[test]
fn bessel_sequences_match_power_series() {
    for &x in &[0.3, 1.0, -2.5, 6.0] {
        let j = bessel_j_sequence(x, 12);
        for (n, &v) in j.iter().enumerate() {
            assert!((v - bessel_j_series(n, x)).abs() < 1e-11, "J_{n}({x})");
        }
    }
    for &z in &[0.0, 0.5, 3.0, 10.0] {
        let i = scaled_bessel_i_sequence(z, 10);
        for (n, &v) in i.iter().enumerate() {
            let reference = (-z).exp() * bessel_i_series(n, z);
            assert!((v - reference).abs() < 1e-12 * (1.0 + reference), "I_{n}({z})");
        }
    }
}

#[test]
fn dct_recovers_a_single_chebyshev_polynomial() {
    let a = dct::project(|x| (3.0 * x.acos()).cos(), 16);
    for (k, v) in a.iter().enumerate() {
        let expected = if k == 3 { 1.0 } else { 0.0 };
        assert!((v - expected).abs() < 1e-13, "coefficient {k} = {v}");
    }
    // (T_1)^2 = (T_0 + T_2)/2
    let sq = dct::multiply(&[0.0, 1.0], &[0.0, 1.0]);
    for (got, want) in sq.iter().zip([0.5, 0.0, 0.5]) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn two_by_two_eigenvalues() {
    let (a, d, b) = (0.7, -0.2, c(0.3, -0.4));
    let m = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(a, 0.0),
        (1, 1) => c(d, 0.0),
        (0, 1) => b,
        _ => b.conj(),
    });
    let mid = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let mut got = eig_hermitian(&m).unwrap().eigenvalues.clone();
    got.sort_by(f64::total_cmp);
    assert!((got[0] - (mid - r)).abs() < 1e-13 && (got[1] - (mid + r)).abs() < 1e-13);
    assert!((operator_norm(&m) - (mid.abs() + r)).abs() < 1e-12);
}

#[test]
fn exact_flow_on_diagonal_state() {
    let lambda = [0.5, 0.3, 0.2];
    let rho = DensityMatrix::from_diagonal(&lambda).unwrap();
    let o = sample_operator();
    for &t in &[0.0, 0.4, -1.7, 5.0] {
        let got = exact_flow(&rho, &o, t).unwrap();
        let want = diagonal_flow(&lambda, &o, t);
        assert!((&got - &want).max_abs() < 1e-13, "t = {t}");
    }
}

#[test]
fn approximate_flow_within_epsilon_of_diagonal_reference() {
    let lambda = [0.25, 0.45, 0.3];
    let rho = DensityMatrix::from_diagonal(&lambda).unwrap();
    let o = sample_operator();
    let scale = operator_norm(&o);
    assert!(scale <= 1.0);
    for &(t, eps) in &[(0.8, 1e-2), (-2.0, 1e-3)] {
        let r = approx_flow(&rho, &o, t, eps, None).unwrap();
        let err = operator_norm(&(&r.approx_operator - &diagonal_flow(&lambda, &o, t)));
        assert!(err < eps, "t={t} ε={eps}: {err}");
        assert!((err - r.error_norm).abs() < 1e-12);
    }
}

#[test]
fn modular_hamiltonian_polynomial_contract() {
    let (kappa, eps) = (16.0, 1e-2);
    let (p, _) = modular_hamiltonian_poly(kappa, eps).unwrap();
    let beta = (2.0 * kappa).ln();
    for i in 0..=500 {
        let x = 1.0 / kappa + (1.0 - 1.0 / kappa) * i as f64 / 500.0;
        assert!((2.0 * beta * p.eval(x) + x.ln()).abs() <= eps, "x = {x}");
        assert!((p.eval(-x) - p.eval(x)).abs() < 1e-12);
    }
    for i in 0..=4000 {
        let x = -1.0 + i as f64 / 2000.0;
        assert!(p.eval(x).abs() <= 1.0 + 1e-9);
    }
}

#[test]
fn building_block_polynomials() {
    let sign = sign_poly(0.2, 1e-3).unwrap();
    for &x in &[0.1, 0.3, 0.99] {
        assert!((sign.eval(x) - 1.0).abs() <= 1e-3 && (sign.eval(-x) + 1.0).abs() <= 1e-3);
    }
    let rect = rect_poly(8.0, 1e-3).unwrap();
    assert!((rect.eval(0.125) - 1.0).abs() <= 1e-3 && (rect.eval(-0.8) - 1.0).abs() <= 1e-3);
    assert!(rect.eval(0.0625).abs() <= 1e-3 && rect.eval(0.0).abs() <= 1e-3);
    let (cos_p, sin_p) = trig_polys(7.5, 1e-6).unwrap();
    for &x in &[-0.9, -0.2, 0.0, 0.4, 1.0] {
        assert!((cos_p.eval(x) - (7.5 * x).cos()).abs() <= 5e-7);
        assert!((sin_p.eval(x) - (7.5 * x).sin()).abs() <= 5e-7);
    }
}

#[test]
fn ledger_example_values() {
    let l = query_count(8.0, 1e-2, 1.0).unwrap();
    assert_eq!(l.total_queries, (l.log_poly_degree + l.rect_poly_degree) * l.trig_degree);
    // A fifth of the budget goes to the log polynomial, which gets half of it.
    assert_eq!(l.log_poly_degree, 2 * certified_degree_for_log(8.0, 1e-2 / 5.0 / 2.0).unwrap() as u64);
    let longer = query_count(8.0, 1e-2, 4.0).unwrap();
    assert!(longer.total_queries > l.total_queries);
}

#[test]
fn entropy_estimators_on_diagonal_states() {
    let p: [f64; 4] = [0.6, 0.25, 0.1, 0.05];
    let exact: f64 = p.iter().map(|x| -x * x.ln()).sum();
    let rho = DensityMatrix::from_diagonal(&p).unwrap();
    assert!((rho.von_neumann_entropy() - exact).abs() < 1e-14);
    let f = entropy_functional(&rho, 0.1).unwrap();
    assert!((f.value - exact).abs() <= 0.1);

    let mixed = DensityMatrix::maximally_mixed(4);
    let q = entropy_qpe(&mixed, 0.1, 0.1, 7).unwrap();
    assert!((q.value - 4f64.ln()).abs() < 1e-12);
    assert_eq!(q.shots, Some(shots_required(4.0, 0.1, 0.1)));
    assert_eq!(shots_required(4.0, 0.1, 0.1), (4f64.ln().powi(2) / 1e-3).ceil() as u64);
}

#[test]
fn correlator_with_maximally_mixed_state() {
    // ρ = I/d is invariant under the flow, so W = (2/d) Tr(ψ_r ψ_l(t)).
    let d = 3;
    let rho = DensityMatrix::maximally_mixed(d);
    let mut r = rng(11);
    let psi_r = random_hermitian(d, &mut r);
    let psi_l = random_hermitian(d, &mut r);
    let h = [0.3, -0.5, 0.9];
    let hm = ComplexMatrix::from_real_diagonal(&h);
    let t = 1.3;
    let evolved = ComplexMatrix::from_fn(d, d, |x, y| Complex64::from_polar(1.0, (h[x] - h[y]) * t) * psi_l[(x, y)]);
    let want = (&psi_r * &evolved).trace() * (2.0 / d as f64);
    let got = correlator(&rho, &psi_r, &psi_l, 0.9, t, Some(&hm), CorrelatorMode::Exact).unwrap();
    assert!((got.value - want).norm() < 1e-13);
    let poly = correlator(&rho, &psi_r, &psi_l, 0.9, t, Some(&hm), CorrelatorMode::Polynomial { epsilon: 1e-2 }).unwrap();
    assert!((poly.value - want).norm() <= 1e-2);
}

#[test]
fn purification_reduces_to_the_state() {
    let mut r = rng(3);
    let rho = DensityMatrix::new(&random_density(3, 10.0, &mut r)).unwrap();
    let psi = purify(&rho);
    assert_eq!(psi.dims(), &[3, 3]);
    let back = modflow_core::encoding::reduced_density_pure(&psi, &[0]).unwrap();
    assert!((back.matrix() - rho.matrix()).max_abs() < 1e-12);
}

#[test]
fn partial_trace_of_product_state() {
    let a = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
    let b = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
    let ab = DensityMatrix::new(&a.matrix().kron(b.matrix())).unwrap().with_dims(vec![2, 3]).unwrap();
    let ra = reduced_density(&ab, &[0]).unwrap();
    let rb = reduced_density(&ab, &[1]).unwrap();
    assert!((ra.matrix() - a.matrix()).max_abs() < 1e-14);
    assert!((rb.matrix() - b.matrix()).max_abs() < 1e-14);
}

#[test]
fn json_inputs_round_trip() {
    let text = r#"{"kind": "density", "dims": [2], "entries": [[0.75, 0.0], [0.0, 0.0], [0.0, 0.0], [0.25, 0.0]]}"#;
    match parse_json(text).unwrap() {
        Loaded::Density(rho) => {
            assert_eq!(rho.eigenvalues().len(), 2);
            assert!((rho.von_neumann_entropy() - (-0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln())).abs() < 1e-15);
        }
        _ => panic!("wrong kind"),
    }
    let trace_two = r#"{"kind": "density", "dims": [2], "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}"#;
    assert!(parse_json(trace_two).is_err());
    let untagged = r#"{"dims": [1], "entries": [[2, 1]]}"#;
    assert!(matches!(parse_json(untagged).unwrap(), Loaded::Operator { .. }));
}
