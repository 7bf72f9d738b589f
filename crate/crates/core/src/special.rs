//! Bessel sequences by Miller's downward recurrence.

use statrs::function::gamma::ln_gamma;

const RESCALE_AT: f64 = 1e250;

/// Smallest start order `S ≥ floor` with `(|x|/2)^S / S! < 1e-30`.
fn miller_start(x: f64, floor: usize) -> usize {
    let half = x.abs() / 2.0;
    let mut s = floor.max(x.abs().ceil() as usize) + 16;
    if half == 0.0 {
        return s;
    }
    let target = -30.0 * std::f64::consts::LN_10;
    while s as f64 * half.ln() - ln_gamma(s as f64 + 1.0) >= target {
        s += 8;
    }
    s
}

/// `J_0(x), …, J_{n_max}(x)`, normalized by `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = miller_start(ax, n_max);
    let mut values = vec![0.0; start + 2];
    values[start] = 1e-300;
    let mut hi = 0.0; // J_{n+1}
    let mut cur = 1e-300; // J_n
    for n in (1..=start).rev() {
        let lower = (2.0 * n as f64 / ax) * cur - hi;
        hi = cur;
        cur = lower;
        values[n - 1] = cur;
        if cur.abs() > RESCALE_AT {
            let s = 1.0 / cur.abs();
            hi *= s;
            cur *= s;
            for v in values[n - 1..].iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    for (n, o) in out.iter_mut().enumerate() {
        let v = if n < values.len() { values[n] / norm } else { 0.0 };
        // J_n(-x) = (-1)^n J_n(x)
        *o = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// `e^{-z} I_0(z), …, e^{-z} I_{n_max}(z)` for `z ≥ 0`, normalized by
/// `Ĩ_0 + 2 Σ_{k≥1} Ĩ_k = 1`.
pub fn scaled_bessel_i_sequence(z: f64, n_max: usize) -> Vec<f64> {
    assert!(z >= 0.0, "scaled_bessel_i_sequence needs z >= 0");
    let mut out = vec![0.0; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // I_n/I_0 ≈ exp(-n²/(2z)) for large z; the max covers both regimes.
    let gaussian = (2.0 * z * 80.0).sqrt().ceil() as usize + 32;
    let start = miller_start(z, n_max).max(n_max + gaussian);
    let mut values = vec![0.0; start + 2];
    values[start] = 1e-300;
    let mut hi = 0.0;
    let mut cur = 1e-300;
    for n in (1..=start).rev() {
        let lower = (2.0 * n as f64 / z) * cur + hi;
        hi = cur;
        cur = lower;
        values[n - 1] = cur;
        if cur > RESCALE_AT {
            let s = 1.0 / cur;
            hi *= s;
            cur *= s;
            for v in values[n - 1..].iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = values[0] + 2.0 * values[1..].iter().sum::<f64>();
    for (n, o) in out.iter_mut().enumerate() {
        *o = if n < values.len() { values[n] / norm } else { 0.0 };
    }
    out
}
