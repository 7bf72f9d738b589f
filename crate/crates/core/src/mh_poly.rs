//! Bounded, parity-definite polynomials for the modular-flow pipeline.
//!
//! The modular-Hamiltonian polynomial is kept in factored form
//! `-(1/2β) · f_N(x) · R(x)`; its factors commute as matrix functions, so the
//! pipeline applies each by matrix Clenshaw and multiplies the results.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::chebyshev::{certified_degree_for_log, log_series_coefficients, ChebyshevSeries, Parity};
use crate::dct;
use crate::error::{Error, Result};
use crate::matfun::{clenshaw_matrix, eig_hermitian, ComplexMatrix, SPECTRUM_SLACK};
use crate::special::{bessel_j_sequence, scaled_bessel_i_sequence};

/// Tolerance on the sup norm for admissibility.
pub const ADMISSIBLE_SLACK: f64 = 1e-9;

/// Grids larger than this many nodes are not built; an analytic bound is used.
pub const AUDIT_MAX_NODES: usize = 1 << 23;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolyForm {
    Series(ChebyshevSeries),
    /// `scale · Π factors`.
    Product { factors: Vec<ChebyshevSeries>, scale: f64 },
}

/// How `sup_norm_bound` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SupCertificate {
    /// Max over `nodes` first-kind Chebyshev nodes plus `x ∈ {-1, 0, 1}`.
    Grid { nodes: usize },
    /// Bound assembled from the factors' own certificates.
    Analytic,
}

/// A polynomial with its certified sup norm and approximation guarantee.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolySpec {
    pub form: PolyForm,
    pub parity: Parity,
    pub degree: usize,
    pub sup_norm_bound: f64,
    pub certificate: SupCertificate,
    pub target: String,
    /// Intervals where `|P - target| ≤ guarantee_epsilon`.
    pub valid_region: Vec<(f64, f64)>,
    pub guarantee_epsilon: f64,
}

impl PolySpec {
    fn from_series(series: ChebyshevSeries, target: String, valid_region: Vec<(f64, f64)>, eps: f64) -> Self {
        let parity = series.parity();
        let degree = series.degree();
        let nodes = audit_nodes(degree);
        let sup = audit_series(&series, nodes);
        Self {
            form: PolyForm::Series(series),
            parity,
            degree,
            sup_norm_bound: sup,
            certificate: if nodes > AUDIT_MAX_NODES {
                SupCertificate::Analytic
            } else {
                SupCertificate::Grid { nodes }
            },
            target,
            valid_region,
            guarantee_epsilon: eps,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            PolyForm::Series(s) => s.eval(x),
            PolyForm::Product { factors, scale } => factors.iter().fold(*scale, |acc, f| acc * f.eval(x)),
        }
    }

    /// Expanded Chebyshev series (products are multiplied out by FFT).
    pub fn series(&self) -> ChebyshevSeries {
        match &self.form {
            PolyForm::Series(s) => s.clone(),
            PolyForm::Product { factors, scale } => {
                let mut coeffs = vec![*scale];
                for f in factors {
                    coeffs = dct::multiply(&coeffs, f.coefficients());
                }
                // Products of same-parity factors keep parity; clear rounding residue.
                if self.parity != Parity::None {
                    let skip = if self.parity == Parity::Even { 1 } else { 0 };
                    for c in coeffs.iter_mut().skip(skip).step_by(2) {
                        *c = 0.0;
                    }
                }
                ChebyshevSeries::with_parity(coeffs, self.parity).expect("parity cleared above")
            }
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.sup_norm_bound <= 1.0 + ADMISSIBLE_SLACK && self.parity != Parity::None
    }

    /// `P(M)` for Hermitian `M` with spectrum in `[-1, 1]` (matrix Clenshaw per factor).
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let spectral = eig_hermitian(m)?;
        let lo = spectral.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = spectral.eigenvalues.last().copied().unwrap_or(0.0);
        if lo < -1.0 - SPECTRUM_SLACK || hi > 1.0 + SPECTRUM_SLACK {
            return Err(Error::Domain(format!("spectrum [{lo}, {hi}] lies outside [-1, 1]")));
        }
        Ok(self.apply_unchecked(m))
    }

    pub(crate) fn apply_unchecked(&self, m: &ComplexMatrix) -> ComplexMatrix {
        match &self.form {
            PolyForm::Series(s) => clenshaw_matrix(m, s),
            PolyForm::Product { factors, scale } => {
                let mut acc = ComplexMatrix::identity(m.rows()).scale_real(*scale);
                for f in factors {
                    acc = &acc * &clenshaw_matrix(m, f);
                }
                acc
            }
        }
    }
}

/// Normalization of the modular-Hamiltonian polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationInfo {
    /// `ln(2κ)`; the polynomial approximates `-ln|x| / (2β)`.
    pub beta: f64,
    pub kappa: f64,
    pub epsilon_prime: f64,
    /// Number of log-series terms `N` (the log factor has degree `2N`).
    pub log_terms: usize,
}

impl NormalizationInfo {
    /// `2β`, the factor converting normalized values back to `-ln x`.
    pub fn scale(&self) -> f64 {
        2.0 * self.beta
    }
}

/// Degrees and parameters of `P^MH(κ, ε)` without building the polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhPlan {
    pub kappa: f64,
    pub epsilon: f64,
    pub log_epsilon: f64,
    pub beta: f64,
    pub log_terms: usize,
    pub epsilon_prime: f64,
}

impl MhPlan {
    pub fn new(kappa: f64, epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be a finite number > 1, got {kappa}")));
        }
        let log_epsilon = epsilon / 2.0;
        let log_terms = certified_degree_for_log(kappa, log_epsilon)?.max(1);
        let beta = (2.0 * kappa).ln();
        let epsilon_prime = (2.0 * epsilon / (5.0 * kappa.ln()))
            .min(beta / log_terms as f64)
            .min(0.2);
        Ok(Self { kappa, epsilon, log_epsilon, beta, log_terms, epsilon_prime })
    }

    pub fn log_degree(&self) -> usize {
        2 * self.log_terms
    }

    pub fn normalization(&self) -> NormalizationInfo {
        NormalizationInfo {
            beta: self.beta,
            kappa: self.kappa,
            epsilon_prime: self.epsilon_prime,
            log_terms: self.log_terms,
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

/// Node count for an audit of a degree-`deg` polynomial.
pub fn audit_nodes(deg: usize) -> usize {
    (4 * deg).max(256).next_power_of_two()
}

fn audit_values(series: &ChebyshevSeries, nodes: usize) -> Vec<f64> {
    let mut v = dct::values_at_nodes(series.coefficients(), nodes.max(series.coefficients().len()));
    v.extend([-1.0, 0.0, 1.0].iter().map(|&x| series.eval(x)));
    v
}

/// Max of `|P|` over the audit grid (nodes plus `-1, 0, 1`).
pub fn audit_series(series: &ChebyshevSeries, nodes: usize) -> f64 {
    if nodes > AUDIT_MAX_NODES {
        return series.l1_norm();
    }
    audit_values(series, nodes).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Max of `|P|` over the audit grid for an arbitrary spec.
pub fn audit_spec(spec: &PolySpec) -> Option<f64> {
    let nodes = audit_nodes(spec.degree);
    if nodes > AUDIT_MAX_NODES {
        return None;
    }
    Some(grid_values(spec, nodes).iter().map(|v| v.abs()).fold(0.0, f64::max))
}

fn grid_values(spec: &PolySpec, nodes: usize) -> Vec<f64> {
    match &spec.form {
        PolyForm::Series(s) => audit_values(s, nodes),
        PolyForm::Product { factors, scale } => {
            let mut acc = vec![*scale; nodes + 3];
            for f in factors {
                for (a, v) in acc.iter_mut().zip(audit_values(f, nodes)) {
                    *a *= v;
                }
            }
            acc
        }
    }
}

/// Drops the smallest-index tail whose absolute sum is at most `budget`;
/// returns the kept length and the dropped mass.
fn truncate_by_tail(coeffs: &[f64], budget: f64) -> (usize, f64) {
    let mut tail = 0.0;
    let mut keep = coeffs.len();
    while keep > 1 {
        let next = tail + coeffs[keep - 1].abs();
        if next > budget {
            break;
        }
        tail = next;
        keep -= 1;
    }
    (keep, tail)
}

/// Divides by `1 + dropped`, so a truncation of a function bounded by 1
/// stays bounded by 1 everywhere, not only on the audit grid.
fn rescale_for_tail(series: ChebyshevSeries, dropped: f64) -> ChebyshevSeries {
    if dropped > 0.0 {
        series.scaled(1.0 / (1.0 + dropped))
    } else {
        series
    }
}

/// Odd polynomial within ε of `sign(x)` for `|x| ≥ gap/2`, bounded by 1.
///
/// Truncated Chebyshev expansion of `erf(kx)` with `erf(k·gap/2) = 1 - ε/2`.
pub fn sign_poly(gap: f64, epsilon: f64) -> Result<PolySpec> {
    if !(gap > 0.0 && gap < 2.0) {
        return Err(Error::Domain(format!("gap must lie in (0, 2), got {gap}")));
    }
    check_unit("epsilon", epsilon)?;
    let k = erfc_inv(epsilon / 2.0) / (gap / 2.0);
    let z = k * k / 2.0;
    // Ĩ_j decays like exp(-j²/(2z)), so this order is far past underflow.
    let j_max = (2.0 * z * 80.0).sqrt().ceil() as usize + 64;
    let scaled_i = scaled_bessel_i_sequence(z, j_max + 1);
    let pref = 2.0 * k / std::f64::consts::PI.sqrt();
    let mut coeffs = vec![0.0; 2 * j_max + 2];
    for j in 0..j_max {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[2 * j + 1] = pref * sign * (scaled_i[j] + scaled_i[j + 1]) / (2 * j + 1) as f64;
    }
    let (keep, dropped) = truncate_by_tail(&coeffs, epsilon / 4.0);
    coeffs.truncate(keep);
    let series = rescale_for_tail(ChebyshevSeries::with_parity(coeffs, Parity::Odd)?, dropped);
    Ok(PolySpec::from_series(
        series,
        "sign(x)".into(),
        vec![(-1.0, -gap / 2.0), (gap / 2.0, 1.0)],
        epsilon,
    ))
}

/// Rect polynomial with its grid audit over the well `|x| ≤ 1/(2κ)`.
#[derive(Debug, Clone)]
struct RectBuild {
    spec: PolySpec,
    well_sup: f64,
}

/// `1 - (erf(k(x + c)) - erf(k(x - c)))/2` with `c = 3/(4κ)`.
fn rect_exact(x: f64, k: f64, c: f64) -> f64 {
    // Written through erfc on the side away from the step for accuracy.
    let a = k * (x + c);
    let b = k * (x - c);
    if b >= 0.0 {
        1.0 - 0.5 * (erfc(b) - erfc(a))
    } else if a <= 0.0 {
        1.0 - 0.5 * (erfc(-a) - erfc(-b))
    } else {
        0.5 * (erfc(a) + erfc(-b))
    }
}

fn build_rect(kappa: f64, epsilon_prime: f64) -> Result<RectBuild> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be a finite number > 1, got {kappa}")));
    }
    check_unit("epsilon_prime", epsilon_prime)?;
    let half_width = 1.0 / (4.0 * kappa);
    let center = 3.0 * half_width;
    let eta = epsilon_prime / 2.0;
    let k = erfc_inv(eta) / half_width;
    // Polynomial error budget beyond the exact function's own ≤ η/2 deviation.
    let tail_budget = eta / 64.0;
    let estimate = 2.6 * k * ((1.0 / tail_budget).ln()).sqrt() + 64.0;
    let mut nodes = (estimate.ceil() as usize).next_power_of_two().max(256);
    let (coeffs, aliasing) = loop {
        let c = dct::project(|x| rect_exact(x, k, center), nodes);
        let last_quarter = c[3 * nodes / 4..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        // Converged once the top quarter is at the rounding floor or far below budget.
        if last_quarter <= (1e-3 * tail_budget / nodes as f64).max(64.0 * f64::EPSILON) {
            break (c, last_quarter * nodes as f64);
        }
        if nodes >= AUDIT_MAX_NODES {
            return Err(Error::Resource {
                projected_degree: nodes as u64,
                cap: AUDIT_MAX_NODES as u64,
            });
        }
        nodes *= 2;
    };
    let mut coeffs = coeffs;
    for c in coeffs.iter_mut().skip(1).step_by(2) {
        *c = 0.0;
    }
    let (keep, dropped) = truncate_by_tail(&coeffs, tail_budget);
    coeffs.truncate(keep);
    let tail = dropped + aliasing;
    let series = rescale_for_tail(ChebyshevSeries::with_parity(coeffs, Parity::Even)?, tail);
    let degree = series.degree();
    let audit = audit_nodes(degree);
    let well_edge = 1.0 / (2.0 * kappa);
    let (sup, well_sup, certificate) = if audit <= AUDIT_MAX_NODES {
        let vals = dct::values_at_nodes(series.coefficients(), audit);
        let nodes_x = dct::chebyshev_nodes(audit);
        let mut sup: f64 = [-1.0, 0.0, 1.0].iter().map(|&x| series.eval(x).abs()).fold(0.0, f64::max);
        let mut well: f64 = [0.0, well_edge].iter().map(|&x| series.eval(x).abs()).fold(0.0, f64::max);
        for (v, x) in vals.iter().zip(&nodes_x) {
            sup = sup.max(v.abs());
            if x.abs() <= well_edge {
                well = well.max(v.abs());
            }
        }
        (sup, well, SupCertificate::Grid { nodes: audit })
    } else {
        // |R·(1 + tail) - R_exact| ≤ tail, R_exact ∈ [0, 1], R_exact ≤ η/2 on the well.
        (1.0, (eta / 2.0 + tail) / (1.0 + tail), SupCertificate::Analytic)
    };
    let spec = PolySpec {
        parity: Parity::Even,
        degree,
        form: PolyForm::Series(series),
        sup_norm_bound: sup,
        certificate,
        target: format!("rect: 1 for |x| >= {}, 0 for |x| <= {}", 1.0 / kappa, well_edge),
        valid_region: vec![(-1.0, -1.0 / kappa), (-well_edge, well_edge), (1.0 / kappa, 1.0)],
        guarantee_epsilon: epsilon_prime,
    };
    Ok(RectBuild { spec, well_sup })
}

/// Even polynomial ε′-close to 1 on `1/κ ≤ |x| ≤ 1` and to 0 on `|x| ≤ 1/(2κ)`.
pub fn rect_poly(kappa: f64, epsilon_prime: f64) -> Result<PolySpec> {
    Ok(build_rect(kappa, epsilon_prime)?.spec)
}

/// Degree of [`rect_poly`] (builds the polynomial).
pub fn rect_degree(kappa: f64, epsilon_prime: f64) -> Result<usize> {
    Ok(build_rect(kappa, epsilon_prime)?.spec.degree)
}

/// `P^MH(x) = -f_N(x)·R(x)/(2β)`, approximating `-ln|x|/(2β)` within
/// `ε/(2β)` on `1/κ ≤ |x| ≤ 1`, with sup norm at most 1.
pub fn modular_hamiltonian_poly(kappa: f64, epsilon: f64) -> Result<(PolySpec, NormalizationInfo)> {
    let plan = MhPlan::new(kappa, epsilon)?;
    let rect = build_rect(kappa, plan.epsilon_prime)?;
    build_mh(&plan, rect)
}

fn build_mh(plan: &MhPlan, rect: RectBuild) -> Result<(PolySpec, NormalizationInfo)> {
    let log = log_series_coefficients(plan.log_terms);
    let norm = plan.normalization();
    let scale = -1.0 / norm.scale();
    let rect_series = match rect.spec.form {
        PolyForm::Series(s) => s,
        PolyForm::Product { .. } => unreachable!("rect is a plain series"),
    };
    let degree = log.degree() + rect_series.degree();

    // Analytic certificate: |f_N| ≤ ln 2 + H_N everywhere and
    // |f_N(x)| ≤ ln(1/|x|) + 1/((N+1)|x|) for x ≠ 0.
    let n = plan.log_terms as f64;
    let harmonic: f64 = (1..=plan.log_terms).map(|k| 1.0 / k as f64).sum();
    let well_bound = (std::f64::consts::LN_2 + harmonic) * rect.well_sup;
    let outer_bound = (plan.beta + 2.0 * plan.kappa / (n + 1.0)) * rect.spec.sup_norm_bound;
    let analytic = well_bound.max(outer_bound) / norm.scale();

    let mut spec = PolySpec {
        form: PolyForm::Product { factors: vec![log, rect_series], scale },
        parity: Parity::Even,
        degree,
        sup_norm_bound: analytic,
        certificate: SupCertificate::Analytic,
        target: format!("-ln|x| / (2 ln(2*{}))", plan.kappa),
        valid_region: vec![(-1.0, -1.0 / plan.kappa), (1.0 / plan.kappa, 1.0)],
        guarantee_epsilon: plan.epsilon / norm.scale(),
    };
    let nodes = audit_nodes(degree);
    if let Some(sup) = audit_spec(&spec) {
        spec.sup_norm_bound = sup;
        spec.certificate = SupCertificate::Grid { nodes };
    }
    Ok((spec, norm))
}

/// Degree of `P^MH(κ, ε)` split as (log factor, rect factor).
pub fn mh_degrees(kappa: f64, epsilon: f64) -> Result<(usize, usize)> {
    let plan = MhPlan::new(kappa, epsilon)?;
    Ok((plan.log_degree(), rect_degree(kappa, plan.epsilon_prime)?))
}

/// Jacobi–Anger truncations of `cos(t·x)` and `sin(t·x)`, each within ε/2
/// on `[-1, 1]` and bounded by 1.
pub fn trig_polys(t_eff: f64, epsilon: f64) -> Result<(PolySpec, PolySpec)> {
    check_unit("epsilon", epsilon)?;
    if !t_eff.is_finite() {
        return Err(Error::Parameter(format!("time must be finite, got {t_eff}")));
    }
    let ((cos_c, cos_dropped), (sin_c, sin_dropped)) = trig_coefficients(t_eff, epsilon);
    let cos_s = rescale_for_tail(ChebyshevSeries::with_parity(cos_c, Parity::Even)?, cos_dropped);
    let sin_s = rescale_for_tail(ChebyshevSeries::with_parity(sin_c, Parity::Odd)?, sin_dropped);
    let full = vec![(-1.0, 1.0)];
    Ok((
        PolySpec::from_series(cos_s, format!("cos({t_eff} x)"), full.clone(), epsilon / 2.0),
        PolySpec::from_series(sin_s, format!("sin({t_eff} x)"), full, epsilon / 2.0),
    ))
}

type Truncated = (Vec<f64>, f64);

fn trig_coefficients(t: f64, epsilon: f64) -> (Truncated, Truncated) {
    if t == 0.0 {
        return ((vec![1.0], 0.0), (Vec::new(), 0.0));
    }
    let n_max = (t.abs().ceil() as usize) * 2 + 64;
    let j = bessel_j_sequence(t, n_max);
    let mut cos_c = vec![0.0; n_max + 1];
    let mut sin_c = vec![0.0; n_max + 1];
    for (n, &jn) in j.iter().enumerate() {
        // i^n: cos collects even n with (-1)^{n/2}, sin odd n with (-1)^{(n-1)/2}.
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let weight = if n == 0 { 1.0 } else { 2.0 };
        if n % 2 == 0 {
            cos_c[n] = sign * weight * jn;
        } else {
            sin_c[n] = sign * weight * jn;
        }
    }
    // Beyond n_max the tail is below (|t|/2)^n/n! summed, negligible by construction.
    let (kc, cos_dropped) = truncate_by_tail(&cos_c, epsilon / 4.0);
    let (ks, sin_dropped) = truncate_by_tail(&sin_c, epsilon / 4.0);
    cos_c.truncate(kc);
    sin_c.truncate(ks);
    if sin_c.len() == 1 {
        sin_c.clear();
    }
    ((cos_c, cos_dropped), (sin_c, sin_dropped))
}

/// Number of block-encoding calls for Hamiltonian simulation at `t_eff`.
pub fn trig_degree(t_eff: f64, epsilon: f64) -> Result<usize> {
    check_unit("epsilon", epsilon)?;
    let ((c, _), (s, _)) = trig_coefficients(t_eff, epsilon);
    Ok(c.len().saturating_sub(1).max(s.len().saturating_sub(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::grid;

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        num / den
    }

    #[test]
    fn sign_poly_contract() {
        let p = sign_poly(0.5, 0.1).unwrap();
        assert_eq!(p.parity, Parity::Odd);
        assert_eq!(p.eval(0.0), 0.0);
        assert!((p.eval(1.0) - 1.0).abs() <= 0.1);
        for x in grid(0.25, 1.0, 1000) {
            assert!((p.eval(x) - 1.0).abs() <= 0.1, "x={x}");
            assert_eq!(p.eval(-x), -p.eval(x));
        }
        let sup = grid(-1.0, 1.0, 4001).map(|x| p.eval(x).abs()).fold(0.0, f64::max);
        assert!(sup <= 1.0 + ADMISSIBLE_SLACK && p.is_admissible());
        assert!(matches!(sign_poly(2.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn sign_degree_scales_inverse_gap() {
        let d1 = sign_poly(0.2, 1e-3).unwrap().degree as f64;
        let d2 = sign_poly(0.05, 1e-3).unwrap().degree as f64;
        let s = (d2 / d1).ln() / 4f64.ln();
        assert!((s - 1.0).abs() < 0.2, "slope {s}");
    }

    #[test]
    fn rect_contracts_kappa_4() {
        let kappa = 4.0;
        let ep = 0.05;
        let r = rect_poly(kappa, ep).unwrap();
        assert_eq!(r.parity, Parity::Even);
        assert!((r.eval(1.0) - 1.0).abs() <= ep);
        assert!(r.eval(0.0).abs() <= ep);
        for x in grid(1.0 / kappa, 1.0, 1000) {
            assert!((r.eval(x) - 1.0).abs() <= ep);
        }
        for x in grid(-1.0 / (2.0 * kappa), 1.0 / (2.0 * kappa), 1000) {
            assert!(r.eval(x).abs() <= ep);
        }
        let sup = grid(-1.0, 1.0, 8001).map(|x| r.eval(x).abs()).fold(0.0, f64::max);
        assert!(sup <= 1.0 + ADMISSIBLE_SLACK && r.is_admissible());
    }

    #[test]
    fn rect_degree_linear_in_kappa() {
        let ks = [4.0, 8.0, 16.0, 32.0, 64.0];
        let ds: Vec<f64> = ks.iter().map(|&k| rect_degree(k, 1e-3).unwrap() as f64).collect();
        let s = slope(&ks, &ds);
        assert!(s <= 1.2 && s > 0.8, "slope {s}");
    }

    #[test]
    fn mh_endpoint_and_plateau_value() {
        let (p, info) = modular_hamiltonian_poly(8.0, 0.01).unwrap();
        let tol = 0.01 / (2.0 * info.beta);
        assert!((info.beta - 16f64.ln()).abs() < 1e-15);
        assert!(p.eval(1.0).abs() <= tol);
        let target = 8f64.ln() / (2.0 * 16f64.ln());
        assert!((target - 0.375).abs() < 1e-12);
        assert!((p.eval(1.0 / 8.0) - target).abs() <= tol);
        assert_eq!(p.degree, 2 * info.log_terms + rect_degree(8.0, info.epsilon_prime).unwrap());
        assert!(p.is_admissible());
    }

    #[test]
    fn mh_contract_grid() {
        for &kappa in &[4.0, 8.0, 16.0] {
            for &eps in &[1e-1, 1e-2, 1e-3] {
                let (p, info) = modular_hamiltonian_poly(kappa, eps).unwrap();
                let tol = eps / (2.0 * info.beta);
                for x in grid(1.0 / kappa, 1.0, 1000) {
                    let target = -x.ln() / (2.0 * info.beta);
                    assert!((p.eval(x) - target).abs() <= tol, "κ={kappa} ε={eps} x={x}");
                }
                assert!(p.is_admissible(), "sup {}", p.sup_norm_bound);
                assert!(matches!(p.certificate, SupCertificate::Grid { .. }));
            }
        }
    }

    #[test]
    fn mh_epsilon_prime_rule() {
        let plan = MhPlan::new(8.0, 0.01).unwrap();
        let expected = (2.0 * 0.01 / (5.0 * 8f64.ln())).min(16f64.ln() / plan.log_terms as f64);
        assert_eq!(plan.epsilon_prime, expected.min(0.2));
    }

    #[test]
    fn analytic_certificate_dominates_grid() {
        let plan = MhPlan::new(16.0, 0.05).unwrap();
        let rect = build_rect(16.0, plan.epsilon_prime).unwrap();
        let (p, _) = build_mh(&plan, rect.clone()).unwrap();
        let grid_sup = p.sup_norm_bound;
        let rect_series = match rect.spec.form {
            PolyForm::Series(ref s) => s.clone(),
            _ => unreachable!(),
        };
        let harmonic: f64 = (1..=plan.log_terms).map(|k| 1.0 / k as f64).sum();
        let well = (std::f64::consts::LN_2 + harmonic) * rect.well_sup;
        let outer = (plan.beta + 32.0 / (plan.log_terms as f64 + 1.0)) * rect.spec.sup_norm_bound;
        let analytic = well.max(outer) / (2.0 * plan.beta);
        assert!(grid_sup <= analytic, "{grid_sup} > {analytic}");
        assert!(analytic <= 1.0);
        assert!(rect_series.degree() > 0);
    }

    #[test]
    fn product_expansion_matches_factors() {
        let (p, _) = modular_hamiltonian_poly(4.0, 0.1).unwrap();
        let s = p.series();
        assert_eq!(s.degree(), p.degree);
        assert_eq!(s.parity(), Parity::Even);
        for x in grid(-1.0, 1.0, 501) {
            assert!((s.eval(x) - p.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_zero_time() {
        let (c, s) = trig_polys(0.0, 0.1).unwrap();
        assert_eq!(c.series().coefficients(), &[1.0]);
        assert!(s.series().is_zero());
        assert_eq!(s.parity, Parity::Odd);
    }

    #[test]
    fn trig_accuracy() {
        let (c, s) = trig_polys(1.0, 1e-6).unwrap();
        for x in grid(-1.0, 1.0, 1000) {
            assert!((c.eval(x) - x.cos()).abs() <= 1e-6);
            assert!((s.eval(x) - x.sin()).abs() <= 1e-6);
        }
        for &t in &[-7.5, 30.0, 200.0] {
            let (c, s) = trig_polys(t, 1e-3).unwrap();
            for x in grid(-1.0, 1.0, 1000) {
                assert!((c.eval(x) - (t * x).cos()).abs() <= 5e-4, "t={t}");
                assert!((s.eval(x) - (t * x).sin()).abs() <= 5e-4, "t={t}");
            }
            assert!(c.is_admissible() && s.is_admissible());
        }
    }

    #[test]
    fn trig_degree_linear_in_time() {
        let ts: Vec<f64> = (0..7).map(|k| 2f64.powi(k)).collect();
        let ds: Vec<f64> = ts.iter().map(|&t| trig_degree(t, 1e-2).unwrap() as f64).collect();
        let tail_ts = &ts[3..];
        let tail_ds = &ds[3..];
        let s = slope(tail_ts, tail_ds);
        assert!((s - 1.0).abs() <= 0.2, "slope {s}, degrees {ds:?}");
    }
}
