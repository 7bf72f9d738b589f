//! Chebyshev-T series and the log expansion.
//!
//! The partial sums
//!
//! ```text
//! f_N(x) = -ln 2 + Σ_{n=1}^{N} (-1)^{n-1}/n · T_{2n}(x)
//! ```
//!
//! converge to `ln|x|` on `[-1, 1] \ {0}`. Two degree rules are exposed:
//! [`degree_for_log`] solves the closed-form geometric bound
//! `κ²(1 - 2/κ²)^{N+1}/2 ≤ ε`, and [`certified_degree_for_log`] uses the
//! summation-by-parts bound `|f_N(x) - ln|x|| ≤ 1/((N+1)|x|)`, which is the
//! one that actually holds on `[1/κ, 1]`. The pipeline uses the latter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Coefficients in the Chebyshev-T basis; index `n` multiplies `T_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSeries {
    coefficients: Vec<f64>,
    parity: Parity,
}

impl ChebyshevSeries {
    /// Builds a series and infers its parity from the exact zero pattern.
    /// Trailing zeros are dropped; the empty list is the zero polynomial.
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("Chebyshev coefficients must be finite".into()));
        }
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        let odd_zero = coefficients.iter().skip(1).step_by(2).all(|&c| c == 0.0);
        let even_zero = coefficients.iter().step_by(2).all(|&c| c == 0.0);
        let parity = if odd_zero {
            Parity::Even
        } else if even_zero {
            Parity::Odd
        } else {
            Parity::None
        };
        Ok(Self { coefficients, parity })
    }

    /// Builds a series that must have the declared parity.
    pub fn with_parity(coefficients: Vec<f64>, parity: Parity) -> Result<Self> {
        let s = Self::new(coefficients)?;
        let ok = match parity {
            Parity::None => true,
            // The zero polynomial is both even and odd.
            Parity::Odd => s.parity == Parity::Odd || s.coefficients.is_empty(),
            Parity::Even => s.parity == Parity::Even,
        };
        if !ok {
            return Err(Error::Parameter(format!(
                "coefficients do not have {parity:?} parity"
            )));
        }
        Ok(Self { parity, ..s })
    }

    pub fn zero() -> Self {
        Self { coefficients: Vec::new(), parity: Parity::Even }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Highest index with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Sum of absolute coefficients, an upper bound on the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self { coefficients: Vec::new(), parity: self.parity };
        }
        Self {
            coefficients: self.coefficients.iter().map(|c| c * s).collect(),
            parity: self.parity,
        }
    }

    /// Evaluation without the domain check; stable outside `[-1, 1]` only
    /// for modest excursions.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coefficients, x)
    }
}

/// Backward Clenshaw recurrence for `Σ c_n T_n(x)`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    match coeffs.len() {
        0 => return 0.0,
        1 => return coeffs[0],
        _ => {}
    }
    let two_x = 2.0 * x;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let b0 = two_x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coeffs[0]
}

/// `Σ c_n T_n(x)` for `|x| ≤ 1`.
pub fn clenshaw_eval(series: &ChebyshevSeries, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("Chebyshev evaluation point {x} outside [-1, 1]")));
    }
    Ok(series.eval(x))
}

/// `f_N`: `c_0 = -ln 2`, `c_{2n} = (-1)^{n-1}/n` for `1 ≤ n ≤ N`.
pub fn log_series_coefficients(n_terms: usize) -> ChebyshevSeries {
    let mut c = vec![0.0; 2 * n_terms + 1];
    c[0] = -std::f64::consts::LN_2;
    for n in 1..=n_terms {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        c[2 * n] = sign / n as f64;
    }
    ChebyshevSeries { coefficients: c, parity: Parity::Even }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be a finite number > 1, got {kappa}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Smallest `N ≥ 0` with `κ²(1 - 2/κ²)^{N+1}/2 ≤ ε`.
pub fn degree_for_log(kappa: f64, epsilon: f64) -> Result<usize> {
    check_kappa(kappa)?;
    check_epsilon(epsilon)?;
    let k2 = kappa * kappa;
    let rate = -bound_base(kappa).abs().ln();
    let raw = ((k2 / (2.0 * epsilon)).ln() / rate).ceil() - 1.0;
    let mut n = if raw.is_finite() { raw.max(0.0) as usize } else { 0 };
    // Guard the ceiling against rounding at exact boundaries.
    while n > 0 && truncation_error_bound(kappa, n - 1) <= epsilon {
        n -= 1;
    }
    while truncation_error_bound(kappa, n) > epsilon {
        n += 1;
    }
    Ok(n)
}

/// `1 - 2/κ²`; negative for `κ < √2`, where its magnitude is used.
fn bound_base(kappa: f64) -> f64 {
    1.0 - 2.0 / (kappa * kappa)
}

/// `κ²(1 - 2/κ²)^{N+1}/2` (in magnitude).
pub fn truncation_error_bound(kappa: f64, n_terms: usize) -> f64 {
    let k2 = kappa * kappa;
    k2 * bound_base(kappa).abs().powf(n_terms as f64 + 1.0) / 2.0
}

/// `1/((N+1)·x_min)`: a bound on `|f_N(x) - ln|x||` valid for `|x| ≥ x_min`.
///
/// With `x = cos θ` the tail is `Σ_{n>N} (-1)^{n-1} cos(2nθ)/n`; summation by
/// parts against the Dirichlet-type kernel of `(-1)^n cos(2nθ)`, which is
/// bounded by `1/(2|cos θ|)`, gives `1/((N+1)|x|)`.
pub fn rigorous_log_error_bound(x_min: f64, n_terms: usize) -> f64 {
    1.0 / ((n_terms as f64 + 1.0) * x_min)
}

/// Smallest `N` with `κ/(N+1) ≤ ε`, so `f_N` is ε-accurate on `[1/κ, 1]`.
pub fn certified_degree_for_log(kappa: f64, epsilon: f64) -> Result<usize> {
    check_kappa(kappa)?;
    check_epsilon(epsilon)?;
    let mut n = ((kappa / epsilon).ceil() - 1.0).max(0.0) as usize;
    while n > 0 && rigorous_log_error_bound(1.0 / kappa, n - 1) <= epsilon {
        n -= 1;
    }
    while rigorous_log_error_bound(1.0 / kappa, n) > epsilon {
        n += 1;
    }
    Ok(n)
}

/// Selects which log-degree rule a caller wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeRule {
    /// The closed-form geometric rule ([`degree_for_log`]).
    ClosedForm,
    /// The summation-by-parts rule ([`certified_degree_for_log`]).
    Certified,
}

impl DegreeRule {
    pub fn degree(self, kappa: f64, epsilon: f64) -> Result<usize> {
        match self {
            DegreeRule::ClosedForm => degree_for_log(kappa, epsilon),
            DegreeRule::Certified => certified_degree_for_log(kappa, epsilon),
        }
    }

    pub fn bound(self, kappa: f64, n_terms: usize) -> f64 {
        match self {
            DegreeRule::ClosedForm => truncation_error_bound(kappa, n_terms),
            DegreeRule::Certified => rigorous_log_error_bound(1.0 / kappa, n_terms),
        }
    }
}

/// Max of `|f_N(x) - ln x|` over `points` evenly spaced in `[lo, 1]`.
pub fn log_grid_error(series: &ChebyshevSeries, lo: f64, points: usize) -> f64 {
    grid(lo, 1.0, points)
        .map(|x| (series.eval(x) - x.ln()).abs())
        .fold(0.0, f64::max)
}

/// `points` evenly spaced values covering `[lo, hi]` inclusive.
pub fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    (0..points).map(move |i| if i + 1 == points && points > 1 { hi } else { lo + step * i as f64 })
}
