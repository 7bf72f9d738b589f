//! Entropy estimators, the two-sided correlator and entropy under flow.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::encoding::{partial_trace, spectral_floor, DensityMatrix};
use crate::error::{Error, Result};
use crate::flow::{approx_flow, exact_flow, hamiltonian_evolution, modular_unitary};
use crate::matfun::{eig_hermitian, ComplexMatrix};
use crate::mh_poly::{modular_hamiltonian_poly, NormalizationInfo, PolySpec};
use crate::random::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    QpeSampled,
    DeterministicFunctional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Nats.
    pub value: f64,
    pub epsilon: f64,
    /// Failure probability; only meaningful for sampled estimates.
    pub delta: Option<f64>,
    pub shots: Option<u64>,
    pub method: EntropyMethod,
    pub kappa_used: f64,
    pub note: Option<String>,
}

/// Idealized QPE on a mixed state: shot `k` returns `phases[k]` with
/// probability `λ_k` (eigenvalues ascending). With `rounding_bits = Some(m)`
/// the phase is rounded to a multiple of `2π/2^m`.
pub fn qpe_sample(
    rho: &DensityMatrix,
    phases: &[f64],
    shots: u64,
    seed: u64,
    rounding_bits: Option<u32>,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    if phases.len() != rho.dim() {
        return Err(Error::Shape(format!("{} phases for a dimension-{} state", phases.len(), rho.dim())));
    }
    let weights: Vec<f64> = rho.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Parameter(format!("bad weights: {e}")))?;
    let mut r = rng(seed);
    let step = rounding_bits.map(|m| 2.0 * std::f64::consts::PI / 2f64.powi(m as i32));
    Ok((0..shots)
        .map(|_| {
            let theta = phases[dist.sample(&mut r)];
            match step {
                Some(s) => (theta / s).round() * s,
                None => theta,
            }
        })
        .collect())
}

/// `max(1, ceil((ln κ)² / (δ ε²)))`.
pub fn shots_required(kappa: f64, epsilon: f64, delta: f64) -> u64 {
    let n = (kappa.ln().powi(2) / (delta * epsilon * epsilon)).ceil();
    (n as u64).max(1)
}

/// QPE-sampled entropy with phases `θ_k = -π ln λ_k / ln κ` and estimate
/// `(ln κ / π)·mean(θ)`, clamped to `[0, ln d]`.
pub fn entropy_qpe(rho: &DensityMatrix, epsilon: f64, delta: f64, seed: u64) -> Result<EntropyEstimate> {
    entropy_qpe_with(rho, epsilon, delta, seed, None)
}

pub fn entropy_qpe_with(
    rho: &DensityMatrix,
    epsilon: f64,
    delta: f64,
    seed: u64,
    rounding_bits: Option<u32>,
) -> Result<EntropyEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("need epsilon, delta in (0, 1); got {epsilon}, {delta}")));
    }
    let kappa = spectral_floor(rho)?;
    let shots = shots_required(kappa, epsilon, delta);
    let log_kappa = kappa.ln();
    if log_kappa <= 1e-12 {
        return Ok(EntropyEstimate {
            value: 0.0,
            epsilon,
            delta: Some(delta),
            shots: Some(shots),
            method: EntropyMethod::QpeSampled,
            kappa_used: kappa,
            note: Some("pure state: kappa = 1, entropy is 0 without sampling".into()),
        });
    }
    let tol = rho.zero_tol();
    let phases: Vec<f64> = rho
        .eigenvalues()
        .iter()
        .map(|&l| if l > tol { -std::f64::consts::PI * l.ln() / log_kappa } else { std::f64::consts::PI })
        .collect();
    let samples = qpe_sample(rho, &phases, shots, seed, rounding_bits)?;
    let mean = samples.iter().sum::<f64>() / shots as f64;
    let raw = log_kappa / std::f64::consts::PI * mean;
    let value = raw.clamp(0.0, (rho.dim() as f64).ln());
    Ok(EntropyEstimate {
        value,
        epsilon,
        delta: Some(delta),
        shots: Some(shots),
        method: EntropyMethod::QpeSampled,
        kappa_used: kappa,
        note: None,
    })
}

/// `κ′ = ceil(n ln n / ε) + 1`.
pub fn functional_kappa(n: usize, epsilon: f64) -> f64 {
    let nf = n as f64;
    (nf * nf.ln() / epsilon).ceil() + 1.0
}

/// Reusable deterministic entropy functional for states of dimension `n`.
#[derive(Debug, Clone)]
pub struct EntropyFunctional {
    pub n: usize,
    pub epsilon: f64,
    pub kappa: f64,
    pub poly: PolySpec,
    pub normalization: NormalizationInfo,
}

impl EntropyFunctional {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("the entropy functional needs dimension at least 2".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let kappa = functional_kappa(n, epsilon);
        let (poly, normalization) = modular_hamiltonian_poly(kappa, epsilon / 2.0)?;
        Ok(Self { n, epsilon, kappa, poly, normalization })
    }

    /// `Tr(ρ · 2β · P^MH(ρ))`, evaluated on the spectrum.
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<EntropyEstimate> {
        if rho.dim() != self.n {
            return Err(Error::Shape(format!("functional built for n = {}, state has {}", self.n, rho.dim())));
        }
        let scale = self.normalization.scale();
        let value = rho
            .eigenvalues()
            .iter()
            .map(|&l| {
                let l = l.clamp(0.0, 1.0);
                l * scale * self.poly.eval(l)
            })
            .sum();
        Ok(EntropyEstimate {
            value,
            epsilon: self.epsilon,
            delta: None,
            shots: None,
            method: EntropyMethod::DeterministicFunctional,
            kappa_used: self.kappa,
            note: None,
        })
    }
}

/// Deterministic entropy estimate from the log polynomial at `κ′`.
pub fn entropy_functional(rho: &DensityMatrix, epsilon: f64) -> Result<EntropyEstimate> {
    if rho.dim() == 1 {
        return Ok(EntropyEstimate {
            value: 0.0,
            epsilon,
            delta: None,
            shots: None,
            method: EntropyMethod::DeterministicFunctional,
            kappa_used: 1.0,
            note: Some("one-dimensional state".into()),
        });
    }
    EntropyFunctional::new(rho.dim(), epsilon)?.evaluate(rho)
}

/// How [`correlator`] realizes the modular flow and time evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelatorMode {
    Exact,
    /// Polynomial pipeline with overall accuracy `epsilon`.
    Polynomial { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorPoint {
    pub s: f64,
    pub t: f64,
    pub value: Complex64,
    /// Bound on the deviation from the exact value (polynomial mode).
    pub error_bound: Option<f64>,
}

fn same_dim(rho: &DensityMatrix, m: &ComplexMatrix, name: &str) -> Result<()> {
    if !m.is_square() || m.rows() != rho.dim() {
        return Err(Error::Shape(format!(
            "{name} is {}x{} but the state has dimension {}",
            m.rows(),
            m.cols(),
            rho.dim()
        )));
    }
    Ok(())
}

/// `W(s, t) = Tr(ρ {ρ^{-is} ψ_r ρ^{is}, ψ_l(t)})` with
/// `ψ_l(t) = e^{i H_l t} ψ_l e^{-i H_l t}` when `h_l` is given.
pub fn correlator(
    rho: &DensityMatrix,
    psi_r: &ComplexMatrix,
    psi_l: &ComplexMatrix,
    s: f64,
    t: f64,
    h_l: Option<&ComplexMatrix>,
    mode: CorrelatorMode,
) -> Result<CorrelatorPoint> {
    same_dim(rho, psi_r, "psi_r")?;
    same_dim(rho, psi_l, "psi_l")?;
    if let Some(h) = h_l {
        same_dim(rho, h, "H_l")?;
    }
    let (flowed, evolved, bound) = match mode {
        CorrelatorMode::Exact => {
            let flowed = exact_flow(rho, psi_r, s)?;
            let evolved = match h_l {
                Some(h) if t != 0.0 => {
                    let u = eig_hermitian(h)?.map_complex(|l| Complex64::from_polar(1.0, l * t));
                    &(&u * psi_l) * &u.adjoint()
                }
                _ => psi_l.clone(),
            };
            (flowed, evolved, None)
        }
        CorrelatorMode::Polynomial { epsilon } => {
            let flow_eps = epsilon / 5.0;
            let r = approx_flow(rho, psi_r, s, flow_eps, None)?;
            let (evolved, evolve_err) = match h_l {
                Some(h) if t != 0.0 => {
                    let unit_eps = epsilon / 10.0;
                    let (u, _) = hamiltonian_evolution(h, t, unit_eps)?;
                    let norm_l = crate::matfun::operator_norm(psi_l);
                    (&(&u * psi_l) * &u.adjoint(), unit_eps * (2.0 + unit_eps) * norm_l)
                }
                _ => (psi_l.clone(), 0.0),
            };
            let norm_r = crate::matfun::operator_norm(psi_r);
            let norm_l = crate::matfun::operator_norm(psi_l);
            let bound = 2.0 * flow_eps * (norm_l + evolve_err) + 2.0 * (norm_r + flow_eps) * evolve_err;
            (r.approx_operator, evolved, Some(bound))
        }
    };
    let anti = &(&flowed * &evolved) + &(&evolved * &flowed);
    let value = (rho.matrix() * &anti).trace();
    Ok(CorrelatorPoint { s, t, value, error_bound: bound })
}

/// `-Σ λ ln λ` for a Hermitian PSD matrix (eigenvalues below 1e-14 dropped).
pub fn entropy_of(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| -l * l.ln())
        .sum())
}

fn check_tripartite(sigma: &DensityMatrix, dims: (usize, usize, usize)) -> Result<[usize; 3]> {
    let d = [dims.0, dims.1, dims.2];
    if d.iter().any(|&x| x == 0) || d.iter().product::<usize>() != sigma.dim() {
        return Err(Error::Shape(format!("dims {d:?} do not factor dimension {}", sigma.dim())));
    }
    Ok(d)
}

/// `σ(t) = (ρ_AB^{-it} ⊗ I_C) σ (ρ_AB^{it} ⊗ I_C)`.
pub fn flowed_tripartite(sigma: &DensityMatrix, dims: (usize, usize, usize), t: f64) -> Result<ComplexMatrix> {
    let d = check_tripartite(sigma, dims)?;
    let (ab, _) = partial_trace(sigma.matrix(), &d, &[0, 1])?;
    let rho_ab = DensityMatrix::new(&(&ab + &ab.adjoint()).scale_real(0.5))?;
    let u = modular_unitary(&rho_ab, t).kron(&ComplexMatrix::identity(d[2]));
    Ok(&(&u.adjoint() * sigma.matrix()) * &u)
}

/// `S(Tr_A σ(t))`.
pub fn entropy_under_flow(sigma: &DensityMatrix, dims: (usize, usize, usize), t: f64) -> Result<f64> {
    let d = check_tripartite(sigma, dims)?;
    let flowed = flowed_tripartite(sigma, dims, t)?;
    let (bc, _) = partial_trace(&flowed, &d, &[1, 2])?;
    entropy_of(&(&bc + &bc.adjoint()).scale_real(0.5))
}

/// `3 (S(t₂) - S(t₁)) / (π (t₂ - t₁))`.
pub fn chiral_slope(sigma: &DensityMatrix, dims: (usize, usize, usize), t1: f64, t2: f64) -> Result<f64> {
    if t1 == t2 {
        return Err(Error::Parameter("chiral slope needs two distinct times".into()));
    }
    let s1 = entropy_under_flow(sigma, dims, t1)?;
    let s2 = entropy_under_flow(sigma, dims, t2)?;
    Ok(slope_from_entropies(s1, s2, t1, t2))
}

pub fn slope_from_entropies(s1: f64, s2: f64, t1: f64, t2: f64) -> f64 {
    3.0 * (s2 - s1) / (std::f64::consts::PI * (t2 - t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{reduced_density, DensityMatrix};
    use crate::random::{random_density, random_density_rank, random_hermitian};

    #[test]
    fn qpe_pure_state_always_first_phase() {
        let rho = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        // Eigenvalues ascend: index 1 carries the weight.
        let s = qpe_sample(&rho, &[0.3, 1.7], 500, 1, None).unwrap();
        assert!(s.iter().all(|&x| x == 1.7));
        assert!(matches!(qpe_sample(&rho, &[0.3, 1.7], 0, 1, None), Err(Error::Parameter(_))));
        assert!(matches!(qpe_sample(&rho, &[0.3], 5, 1, None), Err(Error::Shape(_))));
    }

    #[test]
    fn qpe_binomial_mean() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let pi = std::f64::consts::PI;
        let s = qpe_sample(&rho, &[0.0, pi], 10_000, 42, None).unwrap();
        let mean = s.iter().sum::<f64>() / 1e4;
        assert!((mean - pi / 2.0).abs() <= 3.0 * (pi / 2.0) / 100.0);
    }

    #[test]
    fn qpe_chi_square() {
        let rho = DensityMatrix::from_diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = qpe_sample(&rho, &[0.0, 1.0, 2.0, 3.0], 10_000, 7, None).unwrap();
        let mut counts = [0f64; 4];
        for x in s {
            counts[x as usize] += 1.0;
        }
        let chi2: f64 = counts
            .iter()
            .zip(rho.eigenvalues())
            .map(|(o, p)| (o - 1e4 * p).powi(2) / (1e4 * p))
            .sum();
        // 99.9% quantile of χ² with 3 degrees of freedom.
        assert!(chi2 < 16.27, "χ² = {chi2}");
    }

    #[test]
    fn qpe_rounding() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let s = qpe_sample(&rho, &[0.1, 1.0], 50, 3, Some(3)).unwrap();
        let step = std::f64::consts::PI / 4.0;
        assert!(s.iter().all(|&x| ((x / step).round() * step - x).abs() < 1e-15));
    }

    #[test]
    fn shots_examples() {
        assert_eq!(shots_required(10.0, 0.1, 0.1), 5302);
        let base = shots_required(50.0, 0.05, 0.1);
        let doubled_eps = shots_required(50.0, 0.1, 0.1);
        assert!((base as f64 / 4.0 - doubled_eps as f64).abs() <= 1.0);
        let halved_delta = shots_required(50.0, 0.05, 0.05);
        assert!((halved_delta as f64 - 2.0 * base as f64).abs() <= 2.0);
    }

    #[test]
    fn qpe_entropy_examples() {
        let mixed = DensityMatrix::maximally_mixed(4);
        let hits = (0..100).filter(|&seed| {
            let e = entropy_qpe(&mixed, 0.1, 0.1, seed).unwrap();
            (e.value - 4f64.ln()).abs() <= 0.1
        });
        assert!(hits.count() >= 90);
        let rho = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let e = entropy_qpe(&rho, 0.1, 0.1, 0).unwrap();
        assert!((e.value - 0.562_335_144_618_808_4).abs() <= 0.1);
        assert!(e.value >= 0.0 && e.value <= 2f64.ln() + 0.1);
        let pure = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        let e = entropy_qpe(&pure, 0.1, 0.1, 0).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.note.is_some());
    }

    #[test]
    fn functional_examples() {
        let half = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let e = entropy_functional(&half, 0.05).unwrap();
        assert!((e.value - 2f64.ln()).abs() <= 0.05);
        let padded = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let e = entropy_functional(&padded, 0.05).unwrap();
        assert!((e.value - 2f64.ln()).abs() <= 0.05);
        assert_eq!(functional_kappa(2, 0.05), (2.0 * 2f64.ln() / 0.05).ceil() + 1.0);
    }

    #[test]
    fn functional_random_n4() {
        let f = EntropyFunctional::new(4, 0.1).unwrap();
        for seed in 0..50 {
            let m = if seed % 5 == 0 {
                random_density_rank(4, 2, &mut rng(seed))
            } else {
                random_density_rank(4, 4, &mut rng(seed))
            };
            let rho = DensityMatrix::new(&m).unwrap();
            let err = (f.evaluate(&rho).unwrap().value - rho.von_neumann_entropy()).abs();
            assert!(err <= 0.1, "seed {seed}: {err}");
        }
    }

    #[test]
    fn correlator_identity_and_zero_s() {
        let rho = DensityMatrix::new(&random_density(3, 6.0, &mut rng(1))).unwrap();
        let id = ComplexMatrix::identity(3);
        for &(s, t) in &[(0.0, 0.0), (1.5, -2.0)] {
            let w = correlator(&rho, &id, &id, s, t, Some(&random_hermitian(3, &mut rng(2))), CorrelatorMode::Exact)
                .unwrap();
            assert!((w.value - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        }
        let a = random_hermitian(3, &mut rng(3));
        let b = random_hermitian(3, &mut rng(4));
        let w = correlator(&rho, &a, &b, 0.0, 0.0, None, CorrelatorMode::Exact).unwrap();
        let direct = (rho.matrix() * &(&(&a * &b) + &(&b * &a))).trace();
        assert!((w.value - direct).norm() < 1e-12);
        assert!(w.value.im.abs() < 1e-12);
    }

    #[test]
    fn correlator_polynomial_close_to_exact() {
        let rho = DensityMatrix::new(&random_density(4, 8.0, &mut rng(5))).unwrap();
        let a = random_hermitian(4, &mut rng(6));
        let b = random_hermitian(4, &mut rng(7));
        let h = random_hermitian(4, &mut rng(8));
        let ex = correlator(&rho, &a, &b, 1.0, 1.0, Some(&h), CorrelatorMode::Exact).unwrap();
        let po = correlator(&rho, &a, &b, 1.0, 1.0, Some(&h), CorrelatorMode::Polynomial { epsilon: 1e-2 }).unwrap();
        assert!((ex.value - po.value).norm() <= 1e-2);
        assert!((ex.value - po.value).norm() <= po.error_bound.unwrap());
    }

    #[test]
    fn correlator_shape_error() {
        let rho = DensityMatrix::maximally_mixed(2);
        let r = correlator(&rho, &ComplexMatrix::identity(3), &ComplexMatrix::identity(2), 0.0, 0.0, None, CorrelatorMode::Exact);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    fn tripartite(seed: u64) -> DensityMatrix {
        DensityMatrix::new(&random_density_rank(8, 8, &mut rng(seed))).unwrap().with_dims(vec![2, 2, 2]).unwrap()
    }

    #[test]
    fn entropy_under_flow_zero_time() {
        let sigma = tripartite(3);
        let s0 = entropy_under_flow(&sigma, (2, 2, 2), 0.0).unwrap();
        let bc = reduced_density(&sigma, &[1, 2]).unwrap();
        assert!((s0 - bc.von_neumann_entropy()).abs() < 1e-10);
    }

    #[test]
    fn trivial_ab_flow_is_flat() {
        // σ = I_AB/4 ⊗ τ_C makes ρ_AB ∝ I.
        let tau = random_density_rank(2, 2, &mut rng(9));
        let sigma = ComplexMatrix::identity(4).scale_real(0.25).kron(&tau);
        let sigma = DensityMatrix::new(&sigma).unwrap();
        let s: Vec<f64> = [0.0, 0.7, 3.0].iter().map(|&t| entropy_under_flow(&sigma, (2, 2, 2), t).unwrap()).collect();
        assert!((s[0] - s[1]).abs() < 1e-12 && (s[0] - s[2]).abs() < 1e-12);
        assert!(chiral_slope(&sigma, (2, 2, 2), 0.0, 1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn flow_keeps_global_spectrum() {
        let sigma = tripartite(4);
        let a = eig_hermitian(sigma.matrix()).unwrap().eigenvalues;
        for &t in &[0.5, -2.0] {
            let f = flowed_tripartite(&sigma, (2, 2, 2), t).unwrap();
            let b = eig_hermitian(&(&f + &f.adjoint()).scale_real(0.5)).unwrap().eigenvalues;
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn slope_is_finite_difference() {
        let sigma = tripartite(5);
        let (t1, t2) = (0.3, 1.1);
        let s1 = entropy_under_flow(&sigma, (2, 2, 2), t1).unwrap();
        let s2 = entropy_under_flow(&sigma, (2, 2, 2), t2).unwrap();
        let c = chiral_slope(&sigma, (2, 2, 2), t1, t2).unwrap();
        assert!((c - 3.0 * (s2 - s1) / (std::f64::consts::PI * (t2 - t1))).abs() < 1e-10);
        assert!(matches!(chiral_slope(&sigma, (2, 2, 2), 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(entropy_under_flow(&sigma, (2, 3, 2), 1.0), Err(Error::Shape(_))));
    }

    #[test]
    fn half_flows_compose() {
        let sigma = tripartite(6);
        let t = 1.4;
        let full = flowed_tripartite(&sigma, (2, 2, 2), t).unwrap();
        let half = flowed_tripartite(&sigma, (2, 2, 2), t / 2.0).unwrap();
        // ρ_AB is invariant under its own flow, so flowing the half-flowed state again composes.
        let half_state = DensityMatrix::new(&(&half + &half.adjoint()).scale_real(0.5)).unwrap();
        let twice = flowed_tripartite(&half_state, (2, 2, 2), t / 2.0).unwrap();
        assert!((&full - &twice).max_abs() < 1e-10);
    }
}
