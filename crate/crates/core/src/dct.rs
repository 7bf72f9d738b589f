//! Chebyshev transforms at first-kind nodes `x_j = cos(π(j + ½)/M)` via a
//! length-`2M` complex FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// First-kind Chebyshev nodes, in decreasing order.
pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos())
        .collect()
}

/// Interpolating Chebyshev coefficients `a_0..a_{M-1}` of the samples
/// `values[j] = f(x_j)`.
pub fn coefficients_from_values(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = values
        .iter()
        .chain(values.iter().rev())
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let mut out: Vec<f64> = (0..m)
        .map(|k| {
            let w = Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2.0 * m as f64));
            (w * buf[k]).re * scale
        })
        .collect();
    out[0] *= 0.5;
    out
}

/// Samples `f(x_j)` of `Σ a_n T_n` at `m` first-kind nodes (`m ≥ coeffs.len()`).
pub fn values_at_nodes(coeffs: &[f64], m: usize) -> Vec<f64> {
    assert!(m >= coeffs.len(), "need at least as many nodes as coefficients");
    if m == 0 {
        return Vec::new();
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
    for (n, &a) in coeffs.iter().enumerate() {
        buf[n] = a * Complex64::from_polar(1.0, std::f64::consts::PI * n as f64 / (2.0 * m as f64));
    }
    FftPlanner::new().plan_fft_inverse(2 * m).process(&mut buf);
    buf[..m].iter().map(|z| z.re).collect()
}

/// Chebyshev coefficients of `f` sampled at `m` nodes.
pub fn project(f: impl Fn(f64) -> f64, m: usize) -> Vec<f64> {
    let values: Vec<f64> = chebyshev_nodes(m).into_iter().map(f).collect();
    coefficients_from_values(&values)
}

/// Coefficients of the product of two Chebyshev series (exact up to rounding).
pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let m = len.next_power_of_two();
    let va = values_at_nodes(a, m);
    let vb = values_at_nodes(b, m);
    let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
    let mut c = coefficients_from_values(&prod);
    c.truncate(len);
    c
}

/// Max of `|Σ a_n T_n|` over `m` first-kind nodes.
pub fn max_abs_on_nodes(coeffs: &[f64], m: usize) -> f64 {
    values_at_nodes(coeffs, m.max(coeffs.len())).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::clenshaw;

    #[test]
    fn round_trip() {
        let coeffs: Vec<f64> = (0..37).map(|n| ((n * 7 % 11) as f64 - 5.0) / (n + 1) as f64).collect();
        let vals = values_at_nodes(&coeffs, 64);
        let nodes = chebyshev_nodes(64);
        for (v, x) in vals.iter().zip(&nodes) {
            assert!((v - clenshaw(&coeffs, *x)).abs() < 1e-13);
        }
        let back = coefficients_from_values(&vals);
        for n in 0..64 {
            let expected = coeffs.get(n).copied().unwrap_or(0.0);
            assert!((back[n] - expected).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn projection_of_polynomial_is_exact() {
        // x³ = (3T_1 + T_3)/4
        let c = project(|x| x * x * x, 8);
        assert!((c[1] - 0.75).abs() < 1e-15);
        assert!((c[3] - 0.25).abs() < 1e-15);
        assert!(c[0].abs() < 1e-15 && c[2].abs() < 1e-15 && c[5].abs() < 1e-15);
    }

    #[test]
    fn product_identity() {
        // T_m T_n = (T_{m+n} + T_{|m-n|})/2
        let mut a = vec![0.0; 4];
        a[3] = 1.0;
        let mut b = vec![0.0; 6];
        b[5] = 1.0;
        let c = multiply(&a, &b);
        assert_eq!(c.len(), 9);
        for (n, v) in c.iter().enumerate() {
            let expected = if n == 8 || n == 2 { 0.5 } else { 0.0 };
            assert!((v - expected).abs() < 1e-14, "n={n}");
        }
    }
}
