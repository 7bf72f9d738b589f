//! Modular flow `O(t) = ρ^{-it} O ρ^{it}`: the exact reference, the
//! polynomial pipeline, its query ledger, and the purified-state variant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{reduced_density_pure, spectral_floor, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::matfun::{operator_norm, ComplexMatrix};
use crate::mh_poly::{modular_hamiltonian_poly, rect_degree, trig_degree, trig_polys, MhPlan, PolySpec};

/// Fraction of the flow budget given to each unitary-error source.
const BUDGET_PARTS: f64 = 5.0;

/// `ρ^{it}` on the support of ρ, identity on its kernel.
pub fn modular_unitary(rho: &DensityMatrix, t: f64) -> ComplexMatrix {
    let tol = rho.zero_tol();
    rho.spectral()
        .map_complex(|l| if l > tol { Complex64::from_polar(1.0, t * l.ln()) } else { Complex64::new(1.0, 0.0) })
}

fn check_operator(rho: &DensityMatrix, o: &ComplexMatrix) -> Result<()> {
    if !o.is_square() || o.rows() != rho.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{} but the state has dimension {}",
            o.rows(),
            o.cols(),
            rho.dim()
        )));
    }
    Ok(())
}

/// `ρ^{-it} O ρ^{it}` from the eigendecomposition of ρ.
pub fn exact_flow(rho: &DensityMatrix, o: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_operator(rho, o)?;
    if t == 0.0 {
        return Ok(o.clone());
    }
    let u = modular_unitary(rho, t);
    Ok(&(&u.adjoint() * o) * &u)
}

/// Block-encoding queries of one flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub log_poly_degree: u64,
    pub rect_poly_degree: u64,
    pub trig_degree: u64,
    /// `(log + rect) × trig`.
    pub total_queries: u64,
    /// `κ² ln(κ²/ε) · (|t| ln κ + ln(1/ε) / ln(e + ln(1/ε)/(|t| ln κ)))`, unit constants.
    pub predicted_bound: f64,
    /// `total_queries / predicted_bound`; absent when the prediction is zero.
    pub constant: Option<f64>,
}

impl QueryLedger {
    fn new(log: usize, rect: usize, trig: usize, kappa: f64, epsilon: f64, t: f64) -> Self {
        let total = (log as u64 + rect as u64) * trig as u64;
        let predicted = predicted_queries(kappa, epsilon, t);
        Self {
            log_poly_degree: log as u64,
            rect_poly_degree: rect as u64,
            trig_degree: trig as u64,
            total_queries: total,
            predicted_bound: predicted,
            constant: (predicted > 0.0).then(|| total as f64 / predicted),
        }
    }

    pub fn mh_degree(&self) -> u64 {
        self.log_poly_degree + self.rect_poly_degree
    }
}

/// Closed-form query scaling with unit constants.
pub fn predicted_queries(kappa: f64, epsilon: f64, t: f64) -> f64 {
    let k2 = kappa * kappa;
    let first = k2 * (k2 / epsilon).ln();
    let tl = t.abs() * kappa.ln();
    if tl == 0.0 {
        return 0.0;
    }
    let l = (1.0 / epsilon).ln();
    first * (tl + l / (std::f64::consts::E + l / tl).ln())
}

/// Error allocation of one flow run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Log-unit accuracy of the modular-Hamiltonian polynomial on `[1/κ, 1]`.
    pub epsilon_mh: f64,
    /// Accuracy of `cos + i sin` truncation.
    pub epsilon_hs: f64,
    /// `|t|·ε_MH`, the unitary error from the Hamiltonian approximation.
    pub propagated_mh: f64,
    /// `|t_eff · P(0)|`, the phase picked up on the kernel of ρ.
    pub kernel_phase: f64,
    /// Bound on `‖Ũ - ρ^{it}‖` on the support above `1/κ`.
    pub unitary_bound: f64,
    /// Bound on the flowed-operator error `δ(2 + δ)‖O‖`.
    pub total_bound: f64,
}

/// Parameters and degrees of the pipeline for `(κ, ε, t)` without matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowPlan {
    pub kappa: f64,
    pub epsilon: f64,
    pub t: f64,
    pub t_eff: f64,
    pub epsilon_mh: f64,
    pub epsilon_hs: f64,
    pub mh: MhPlan,
}

impl FlowPlan {
    /// The flow budget ε is split as `ε_HS = ε/5` and `ε_MH = ε/(5·max(|t|, 1))`.
    pub fn new(kappa: f64, epsilon: f64, t: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let epsilon_hs = epsilon / BUDGET_PARTS;
        let epsilon_mh = epsilon / (BUDGET_PARTS * t.abs().max(1.0));
        Self::with_split(kappa, epsilon, t, epsilon_mh, epsilon_hs)
    }

    pub fn with_split(kappa: f64, epsilon: f64, t: f64, epsilon_mh: f64, epsilon_hs: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Parameter(format!("time must be finite, got {t}")));
        }
        let mh = MhPlan::new(kappa, epsilon_mh)?;
        // H̃ ≈ -ln ρ / (2β), so ρ^{it} = exp(i (−2βt) H̃).
        let t_eff = -2.0 * mh.beta * t;
        Ok(Self { kappa, epsilon, t, t_eff, epsilon_mh, epsilon_hs, mh })
    }

    /// Degrees of all three stages; fails before the rect build if the log
    /// factor alone already exceeds `cap`.
    pub fn ledger(&self, cap: Option<u64>) -> Result<QueryLedger> {
        let log = self.mh.log_degree();
        check_cap(log as u64, cap)?;
        let rect = rect_degree(self.kappa, self.mh.epsilon_prime)?;
        check_cap(log as u64 + rect as u64, cap)?;
        let trig = trig_degree(self.t_eff, self.epsilon_hs)?;
        Ok(QueryLedger::new(log, rect, trig, self.kappa, self.epsilon, self.t))
    }
}

fn check_cap(projected: u64, cap: Option<u64>) -> Result<()> {
    match cap {
        Some(cap) if projected > cap => Err(Error::Resource { projected_degree: projected, cap }),
        _ => Ok(()),
    }
}

/// Ledger of the pipeline at `(κ, ε, t)`, built from the actual polynomials.
pub fn query_count(kappa: f64, epsilon: f64, t: f64) -> Result<QueryLedger> {
    FlowPlan::new(kappa, epsilon, t)?.ledger(None)
}

/// `Ũ ≈ ρ^{it}` from the polynomial pipeline.
#[derive(Debug, Clone)]
pub struct ApproxUnitary {
    pub unitary: ComplexMatrix,
    /// `H̃ = P^MH(ρ)`.
    pub hamiltonian: ComplexMatrix,
    pub mh_poly: PolySpec,
    pub ledger: QueryLedger,
    pub kernel_phase: f64,
}

/// Runs the two polynomial stages for a validated plan.
pub fn approximate_modular_unitary(rho: &DensityMatrix, plan: &FlowPlan, cap: Option<u64>) -> Result<ApproxUnitary> {
    let ledger = plan.ledger(cap)?;
    let (mh_poly, _) = modular_hamiltonian_poly(plan.kappa, plan.epsilon_mh)?;
    if !mh_poly.is_admissible() {
        return Err(Error::Domain(format!("P^MH sup norm {} exceeds 1", mh_poly.sup_norm_bound)));
    }
    let h = mh_poly.apply_unchecked(rho.matrix());
    let h = (&h + &h.adjoint()).scale_real(0.5);
    let (cos_p, sin_p) = trig_polys(plan.t_eff, plan.epsilon_hs)?;
    let c = cos_p.apply_unchecked(&h);
    let s = sin_p.apply_unchecked(&h);
    let unitary = &c + &s.scale(Complex64::new(0.0, 1.0));
    let kernel_phase = (plan.t_eff * mh_poly.eval(0.0)).abs();
    Ok(ApproxUnitary { unitary, hamiltonian: h, mh_poly, ledger, kernel_phase })
}

/// Options for [`approx_flow_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowOptions {
    pub kappa_override: Option<f64>,
    /// Maximum matrix-applied degree (`log + rect`); `None` means unlimited.
    pub degree_cap: Option<u64>,
}

/// Approximate flow and its comparison with the exact reference.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub approx_operator: ComplexMatrix,
    pub exact_operator: ComplexMatrix,
    pub error_norm: f64,
    pub query_ledger: QueryLedger,
    pub kappa: f64,
    pub epsilon: f64,
    pub t: f64,
    pub budget: ErrorBudget,
    /// `‖O‖` when O was rescaled to norm 1, else 1.
    pub operator_scale: f64,
    pub warnings: Vec<String>,
}

pub fn approx_flow(
    rho: &DensityMatrix,
    o: &ComplexMatrix,
    t: f64,
    epsilon: f64,
    kappa_override: Option<f64>,
) -> Result<FlowResult> {
    approx_flow_with(rho, o, t, epsilon, &FlowOptions { kappa_override, degree_cap: None })
}

/// Smallest κ the polynomial constructions accept.
const KAPPA_MIN: f64 = 2.0;

pub fn approx_flow_with(
    rho: &DensityMatrix,
    o: &ComplexMatrix,
    t: f64,
    epsilon: f64,
    options: &FlowOptions,
) -> Result<FlowResult> {
    check_operator(rho, o)?;
    let mut warnings = Vec::new();
    let floor = spectral_floor(rho)?;
    let kappa = match options.kappa_override {
        Some(k) => {
            if !(k > 1.0) {
                return Err(Error::Domain(format!("kappa override must exceed 1, got {k}")));
            }
            let below = rho.eigenvalues_below(k);
            if !below.is_empty() {
                warnings.push(format!(
                    "{} eigenvalue(s) of rho lie below 1/kappa = {:.6e} (smallest {:.6e}); the accuracy guarantee does not cover them",
                    below.len(),
                    1.0 / k,
                    below[0]
                ));
            }
            k
        }
        None => floor,
    };
    let kappa = if kappa < KAPPA_MIN {
        warnings.push(format!("kappa {kappa} raised to {KAPPA_MIN}"));
        KAPPA_MIN
    } else {
        kappa
    };
    let norm = operator_norm(o);
    let (o_unit, scale) = if norm > 1.0 + 1e-12 {
        warnings.push(format!("operator norm {norm:.6e} > 1; flowed O/{norm:.6e} and rescaled"));
        (o.scale_real(1.0 / norm), norm)
    } else {
        (o.clone(), 1.0)
    };
    let inner_eps = epsilon / scale;
    let plan = FlowPlan::new(kappa, inner_eps, t)?;
    let approx = approximate_modular_unitary(rho, &plan, options.degree_cap)?;
    let u = &approx.unitary;
    let approx_op = (&(&u.adjoint() * &o_unit) * u).scale_real(scale);
    let exact_op = exact_flow(rho, o, t)?;
    let error_norm = operator_norm(&(&approx_op - &exact_op));

    let propagated = t.abs() * plan.epsilon_mh;
    let unitary_bound = plan.epsilon_hs + propagated;
    let delta = unitary_bound + approx.kernel_phase;
    let budget = ErrorBudget {
        epsilon_mh: plan.epsilon_mh,
        epsilon_hs: plan.epsilon_hs,
        propagated_mh: propagated,
        kernel_phase: approx.kernel_phase,
        unitary_bound,
        total_bound: delta * (2.0 + delta) * scale,
    };
    Ok(FlowResult {
        approx_operator: approx_op,
        exact_operator: exact_op,
        error_norm,
        query_ledger: approx.ledger,
        kappa,
        epsilon,
        t,
        budget,
        operator_scale: scale,
        warnings,
    })
}

/// Approximation of `e^{iHt}` for Hermitian `H` by the trig polynomials.
pub fn hamiltonian_evolution(h: &ComplexMatrix, t: f64, epsilon: f64) -> Result<(ComplexMatrix, usize)> {
    let norm = operator_norm(h);
    if norm == 0.0 || t == 0.0 {
        return Ok((ComplexMatrix::identity(h.rows()), 0));
    }
    let unit = h.scale_real(1.0 / norm);
    let (c, s) = trig_polys(t * norm, epsilon)?;
    let degree = c.degree.max(s.degree);
    let u = &c.apply(&unit)? + &s.apply_unchecked(&unit).scale(Complex64::new(0.0, 1.0));
    Ok((u, degree))
}

/// Output of [`purified_flow`].
#[derive(Debug, Clone)]
pub struct PurifiedFlowResult {
    /// `(Ũ ⊗ I)|ψ⟩` as produced (not renormalized).
    pub amplitudes: Vec<Complex64>,
    /// `(ρ_A^{it} ⊗ I)|ψ⟩`.
    pub exact: PureState,
    pub distance: f64,
    /// `3 d^{2/3} (|t| ε)^{1/3}`.
    pub bound: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub ledger: Option<QueryLedger>,
}

impl PurifiedFlowResult {
    /// The output renormalized to a unit vector.
    pub fn state(&self) -> PureState {
        let n = self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps = self.amplitudes.iter().map(|z| z / n).collect();
        PureState::new(amps, self.exact.dims().to_vec()).expect("normalized")
    }
}

/// Constant in `ε = c δ³ / (d² |t|)`; `3 c^{1/3} < 1` keeps the bound below δ.
pub const PURIFIED_CONSTANT: f64 = 1.0 / 32.0;

/// `(O ⊗ I)|ψ⟩` for `O` acting on the first factor.
fn apply_first_factor(op: &ComplexMatrix, psi: &[Complex64], d_a: usize, d_b: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d_a * d_b];
    for a in 0..d_a {
        for a2 in 0..d_a {
            let w = op[(a, a2)];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..d_b {
                out[a * d_b + b] += w * psi[a2 * d_b + b];
            }
        }
    }
    out
}

/// Approximate `(ρ_A^{it} ⊗ I)|ψ⟩` at accuracy δ, with κ chosen to balance
/// the polynomial error against the weight of eigenvalues below `1/κ`.
pub fn purified_flow(psi: &PureState, t: f64, delta: f64, degree_cap: Option<u64>) -> Result<PurifiedFlowResult> {
    if psi.dims().len() != 2 {
        return Err(Error::Shape(format!("expected a bipartite state, got dims {:?}", psi.dims())));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let (d_a, d_b) = (psi.dims()[0], psi.dims()[1]);
    let rho_a = reduced_density_pure(psi, &[0])?;
    let exact_amps = apply_first_factor(&modular_unitary(&rho_a, t), psi.amplitudes(), d_a, d_b);
    let exact = PureState::new(exact_amps, psi.dims().to_vec())?;
    if t == 0.0 {
        return Ok(PurifiedFlowResult {
            amplitudes: psi.amplitudes().to_vec(),
            exact,
            distance: 0.0,
            bound: 0.0,
            kappa: f64::NAN,
            epsilon: f64::NAN,
            ledger: None,
        });
    }
    let d = d_a as f64;
    let epsilon = PURIFIED_CONSTANT * delta.powi(3) / (d * d * t.abs());
    let kappa = (d / (t.abs() * epsilon)).powf(2.0 / 3.0).max(KAPPA_MIN);
    let bound = 3.0 * d.powf(2.0 / 3.0) * (t.abs() * epsilon).cbrt();
    // Unitary accuracy |t|εκ = d^{2/3}(|t|ε)^{1/3}, a third of the bound.
    let epsilon_u = t.abs() * epsilon * kappa;
    let plan = FlowPlan::with_split(kappa, epsilon_u, t, epsilon_u / (2.0 * t.abs()), epsilon_u / 2.0)?;
    let approx = approximate_modular_unitary(&rho_a, &plan, degree_cap)?;
    let amplitudes = apply_first_factor(&approx.unitary, psi.amplitudes(), d_a, d_b);
    let distance = amplitudes
        .iter()
        .zip(exact.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(PurifiedFlowResult { amplitudes, exact, distance, bound, kappa, epsilon, ledger: Some(approx.ledger) })
}
