use std::time::Instant;

use modflow_core::estimators::{correlator as correlator_point, CorrelatorMode};
use modflow_core::matfun::{eig_hermitian, HERMITIAN_TOL};
use modflow_core::random::{random_density, random_hermitian, rng};
use modflow_core::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;

use super::{check_count, check_finite, check_nonempty, check_open_unit, Ctx};
use crate::args::{CorrelatorArgs, ModeArg};
use crate::error::{CliError, CliResult, Context};
use crate::inputs::{required, InputBytes};
use crate::report::{Cell, Report};

/// Exact-mode agreement with the eigenbasis evaluation.
const EXACT_TOL: f64 = 1e-10;
/// Largest imaginary part accepted when all inputs are Hermitian.
const IMAG_TOL: f64 = 1e-9;

struct Instance {
    rho: DensityMatrix,
    psi_r: ComplexMatrix,
    psi_l: ComplexMatrix,
    h_l: Option<ComplexMatrix>,
}

/// `Σ_{jk} λ_j (A_{jk} B_{kj} + B_{jk} A_{kj})` in the eigenbasis of ρ, with
/// `A = ρ^{-is} ψ_r ρ^{is}` obtained by entrywise phases and `B = ψ_l(t)`
/// from the eigenbasis of `H_l`.
pub(crate) fn eigenbasis_correlator(
    rho: &DensityMatrix,
    psi_r: &ComplexMatrix,
    psi_l: &ComplexMatrix,
    s: f64,
    t: f64,
    h_l: Option<&ComplexMatrix>,
) -> CliResult<Complex64> {
    let sp = rho.spectral();
    let v = &sp.eigenvectors;
    let vh = v.adjoint();
    let d = rho.dim();
    let tol = rho.zero_tol();
    let phase: Vec<Complex64> = sp
        .eigenvalues
        .iter()
        .map(|&l| if l > tol { Complex64::from_polar(1.0, s * l.ln()) } else { Complex64::new(1.0, 0.0) })
        .collect();
    let a0 = &(&vh * psi_r) * v;
    let a = ComplexMatrix::from_fn(d, d, |j, k| phase[j].conj() * a0[(j, k)] * phase[k]);
    let evolved = match h_l {
        Some(h) if t != 0.0 => {
            let eh = eig_hermitian(h).field("--hamiltonian")?;
            let w = &eh.eigenvectors;
            let b0 = &(&w.adjoint() * psi_l) * w;
            let mu = &eh.eigenvalues;
            let b1 = ComplexMatrix::from_fn(d, d, |x, y| Complex64::from_polar(1.0, (mu[x] - mu[y]) * t) * b0[(x, y)]);
            &(w * &b1) * &w.adjoint()
        }
        _ => psi_l.clone(),
    };
    let b = &(&vh * &evolved) * v;
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..d {
        let lj = sp.eigenvalues[j];
        for k in 0..d {
            total += lj * (a[(j, k)] * b[(k, j)] + b[(j, k)] * a[(k, j)]);
        }
    }
    Ok(total)
}

pub fn correlator(a: &CorrelatorArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--s", &a.s)?;
    check_nonempty("--t", &a.t)?;
    for &x in a.s.iter().chain(&a.t) {
        check_finite("--s/--t", x)?;
    }
    if a.mode == ModeArg::Polynomial {
        check_open_unit("--epsilon", a.epsilon)?;
    }
    let mut inputs = InputBytes::default();
    let instances: Vec<Instance> = match a.random {
        Some(n) => {
            check_count("--random", n, 1)?;
            check_count("--dim", a.dim, 1)?;
            if !(a.max_kappa >= a.dim as f64) {
                return Err(CliError::usage("--max-kappa", "must be at least --dim"));
            }
            let mut r = rng(ctx.seed);
            (0..n)
                .map(|_| {
                    let rho = DensityMatrix::new(&random_density(a.dim, a.max_kappa, &mut r)).expect("valid");
                    let psi_r = random_hermitian(a.dim, &mut r);
                    let psi_l = random_hermitian(a.dim, &mut r);
                    let h_l = Some(random_hermitian(a.dim, &mut r));
                    Instance { rho, psi_r, psi_l, h_l }
                })
                .collect()
        }
        None => {
            let rho = inputs.density("--state", required("--state", &a.state)?)?;
            let psi_r = inputs.operator("--psi-r", required("--psi-r", &a.psi_r)?)?;
            let psi_l = inputs.operator("--psi-l", required("--psi-l", &a.psi_l)?)?;
            let h_l = match &a.hamiltonian {
                Some(p) => Some(inputs.operator("--hamiltonian", p)?),
                None => None,
            };
            vec![Instance { rho, psi_r, psi_l, h_l }]
        }
    };

    let columns = [
        "instance",
        "s",
        "t",
        "mode",
        "value_re",
        "value_im",
        "reference_re",
        "reference_im",
        "deviation",
        "bound",
        "error_bound",
        "imag_abs",
        "hermitian_inputs",
    ];
    let mut report = ctx.report("correlator", &columns, &inputs);
    let mut worst = 0.0f64;
    for (i, inst) in instances.iter().enumerate() {
        let hermitian = inst.psi_r.is_hermitian(HERMITIAN_TOL)
            && inst.psi_l.is_hermitian(HERMITIAN_TOL)
            && inst.h_l.as_ref().is_none_or(|h| h.is_hermitian(HERMITIAN_TOL));
        for &s in &a.s {
            for &t in &a.t {
                let started = Instant::now();
                let h = inst.h_l.as_ref();
                let exact = correlator_point(&inst.rho, &inst.psi_r, &inst.psi_l, s, t, h, CorrelatorMode::Exact)
                    .field("correlator")?;
                let (value, reference, bound, error_bound, mode) = match a.mode {
                    ModeArg::Exact => {
                        let reference = eigenbasis_correlator(&inst.rho, &inst.psi_r, &inst.psi_l, s, t, h)?;
                        (exact.value, reference, EXACT_TOL, None, "exact")
                    }
                    ModeArg::Polynomial => {
                        let mode = CorrelatorMode::Polynomial { epsilon: a.epsilon };
                        let p = correlator_point(&inst.rho, &inst.psi_r, &inst.psi_l, s, t, h, mode)
                            .map_err(|e| CliError::core("correlator", e))?;
                        (p.value, exact.value, a.epsilon, p.error_bound, "polynomial")
                    }
                };
                let dev = (value - reference).norm();
                worst = worst.max(dev / bound);
                let imag = value.im.abs();
                let pass = dev <= bound && (!hermitian || imag <= IMAG_TOL);
                let cells: Vec<Cell> = vec![
                    i.into(),
                    s.into(),
                    t.into(),
                    mode.into(),
                    value.re.into(),
                    value.im.into(),
                    reference.re.into(),
                    reference.im.into(),
                    dev.into(),
                    bound.into(),
                    error_bound.into(),
                    imag.into(),
                    hermitian.into(),
                ];
                report.push(cells, Some(pass), started);
            }
        }
    }
    report.set("instances", instances.len());
    report.set("mode", a.mode);
    report.set("max_deviation_over_bound", worst);
    Ok(report)
}
