use std::collections::HashMap;
use std::time::Instant;

use modflow_core::encoding::reduced_density;
use modflow_core::estimators::{
    chiral_slope, entropy_qpe_with, entropy_under_flow, flowed_tripartite, functional_kappa, slope_from_entropies,
    EntropyFunctional,
};
use modflow_core::matfun::eig_hermitian;
use modflow_core::mh_poly::MhPlan;
use modflow_core::random::{random_density_rank, rng};
use modflow_core::DensityMatrix;
use rand::Rng;

use super::{check_count, check_finite, check_nonempty, check_open_unit, Ctx};
use crate::args::{CccArgs, EntropyArgs, MethodArg};
use crate::error::{CliError, CliResult, Context};
use crate::inputs::{required, InputBytes};
use crate::report::{Cell, Report};

/// Agreement required of quantities that are equal in exact arithmetic.
const IDENTITY_TOL: f64 = 1e-10;

/// Random states cycle through full-rank, rank-deficient and diagonal ones
/// with exact zeros on the diagonal.
fn random_state<R: Rng>(n: usize, index: usize, r: &mut R) -> (DensityMatrix, &'static str) {
    match index % 3 {
        0 => (DensityMatrix::new(&random_density_rank(n, n, r)).expect("valid"), "full-rank"),
        1 => {
            let rank = if n > 1 { r.random_range(1..n) } else { 1 };
            (DensityMatrix::new(&random_density_rank(n, rank, r)).expect("valid"), "rank-deficient")
        }
        _ => {
            let mut w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
            let zeros = if n > 1 { r.random_range(1..n) } else { 0 };
            for k in rand::seq::index::sample(r, n, zeros) {
                w[k] = 0.0;
            }
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let total: f64 = w.iter().sum();
            let diag: Vec<f64> = w.iter().map(|x| x / total).collect();
            (DensityMatrix::from_diagonal(&diag).expect("valid"), "diagonal-with-zeros")
        }
    }
}

pub fn entropy(a: &EntropyArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--epsilon", &a.epsilon)?;
    for &e in &a.epsilon {
        check_open_unit("--epsilon", e)?;
    }
    check_open_unit("--delta", a.delta)?;
    check_count("--repetitions", a.repetitions, 1)?;
    let mut inputs = InputBytes::default();
    let states: Vec<(DensityMatrix, &'static str)> = match a.random {
        Some(count) => {
            check_count("--random", count, 1)?;
            check_nonempty("--dim", &a.dim)?;
            let mut r = rng(ctx.seed);
            let mut v = Vec::new();
            for &n in &a.dim {
                check_count("--dim", n, 1)?;
                for i in 0..count {
                    v.push(random_state(n, i, &mut r));
                }
            }
            v
        }
        None => vec![(inputs.density("--state", required("--state", &a.state)?)?, "file")],
    };

    let columns = [
        "instance",
        "dim",
        "state_kind",
        "method",
        "epsilon",
        "row_kind",
        "repetition",
        "seed",
        "kappa_used",
        "shots",
        "value",
        "exact",
        "error",
        "bound",
        "within_epsilon",
    ];
    let mut report = ctx.report("entropy", &columns, &inputs);
    let mut functionals: HashMap<(usize, u64), EntropyFunctional> = HashMap::new();
    let mut worst = 0.0f64;
    let mut shot_seed = ctx.seed;
    for (i, (rho, kind)) in states.iter().enumerate() {
        let exact = rho.von_neumann_entropy();
        for &epsilon in &a.epsilon {
            let head = |row_kind: &str| -> Vec<Cell> {
                vec![
                    i.into(),
                    rho.dim().into(),
                    (*kind).into(),
                    match a.method {
                        MethodArg::Qpe => "qpe",
                        MethodArg::Functional => "functional",
                    }
                    .into(),
                    epsilon.into(),
                    row_kind.into(),
                ]
            };
            match a.method {
                MethodArg::Functional => {
                    let started = Instant::now();
                    let est = if rho.dim() < 2 {
                        None
                    } else {
                        let key = (rho.dim(), epsilon.to_bits());
                        if !functionals.contains_key(&key) {
                            let plan = MhPlan::new(functional_kappa(rho.dim(), epsilon), epsilon / 2.0).field("--epsilon")?;
                            ctx.check_cap("--degree-cap", 2 * plan.log_terms as u64)?;
                            let f = EntropyFunctional::new(rho.dim(), epsilon).field("--epsilon")?;
                            ctx.check_cap("--degree-cap", f.poly.degree as u64)?;
                            functionals.insert(key, f);
                        }
                        Some(functionals[&key].evaluate(rho).field("entropy")?)
                    };
                    let (value, kappa) = est.as_ref().map_or((0.0, 1.0), |e| (e.value, e.kappa_used));
                    let err = (value - exact).abs();
                    worst = worst.max(err / epsilon);
                    let mut cells = head("estimate");
                    cells.extend([
                        Cell::Empty,
                        Cell::Empty,
                        kappa.into(),
                        Cell::Empty,
                        value.into(),
                        exact.into(),
                        err.into(),
                        epsilon.into(),
                        (err <= epsilon).into(),
                    ]);
                    report.push(cells, Some(err <= epsilon), started);
                }
                MethodArg::Qpe => {
                    let block = Instant::now();
                    let mut failures = 0usize;
                    for rep in 0..a.repetitions {
                        let started = Instant::now();
                        let seed = shot_seed;
                        shot_seed = shot_seed.wrapping_add(1);
                        let est = entropy_qpe_with(rho, epsilon, a.delta, seed, a.rounding_bits).field("entropy")?;
                        if let Some(note) = &est.note {
                            report.warn(format!("instance {i}: {note}"));
                        }
                        let err = (est.value - exact).abs();
                        let within = err <= epsilon;
                        failures += usize::from(!within);
                        let mut cells = head("estimate");
                        cells.extend([
                            rep.into(),
                            seed.into(),
                            est.kappa_used.into(),
                            est.shots.into(),
                            est.value.into(),
                            exact.into(),
                            err.into(),
                            epsilon.into(),
                            within.into(),
                        ]);
                        report.push(cells, None, started);
                    }
                    let rate = failures as f64 / a.repetitions as f64;
                    worst = worst.max(rate);
                    let mut cells = head("failure_rate");
                    cells.extend([
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        rate.into(),
                        Cell::Empty,
                        Cell::Empty,
                        a.delta.into(),
                        Cell::Empty,
                    ]);
                    report.push(cells, Some(rate <= a.delta), block);
                }
            }
        }
    }
    report.set("states", states.len());
    report.set("method", a.method);
    match a.method {
        MethodArg::Functional => report.set("max_error_over_epsilon", worst),
        MethodArg::Qpe => report.set("max_failure_rate", worst),
    }
    Ok(report)
}

pub fn ccc(a: &CccArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--times", &a.times)?;
    for &t in &a.times {
        check_finite("--times", t)?;
    }
    let mut inputs = InputBytes::default();
    let (sigmas, dims): (Vec<DensityMatrix>, Vec<usize>) = match a.random {
        Some(count) => {
            check_count("--random", count, 1)?;
            if a.dims.len() != 3 || a.dims.contains(&0) {
                return Err(CliError::usage("--dims", format!("need three positive factors, got {:?}", a.dims)));
            }
            let total: usize = a.dims.iter().product();
            let mut r = rng(ctx.seed);
            let v = (0..count)
                .map(|_| DensityMatrix::new(&random_density_rank(total, total, &mut r)).expect("valid"))
                .collect();
            (v, a.dims.clone())
        }
        None => {
            let sigma = inputs.density("--state", required("--state", &a.state)?)?;
            let dims = sigma.dims().to_vec();
            if dims.len() != 3 {
                return Err(CliError::usage("--state", format!("dims must have three factors, got {dims:?}")));
            }
            (vec![sigma], dims)
        }
    };
    let tri = (dims[0], dims[1], dims[2]);

    let columns = ["instance", "quantity", "t1", "t2", "measured", "reference", "deviation", "bound"];
    let mut report = ctx.report("ccc", &columns, &inputs);
    for (i, sigma) in sigmas.iter().enumerate() {
        let sigma = sigma.clone().with_dims(dims.clone()).field("--state")?;
        let direct = reduced_density(&sigma, &[1, 2]).field("ccc")?.von_neumann_entropy();
        let spectrum = sigma.eigenvalues().to_vec();
        let mut entropies = Vec::with_capacity(a.times.len());
        for &t in &a.times {
            let started = Instant::now();
            let s = entropy_under_flow(&sigma, tri, t).field("ccc")?;
            entropies.push(s);
            let mut cells: Vec<Cell> = vec![i.into(), "entropy_bc".into(), t.into(), Cell::Empty, s.into()];
            if t == 0.0 {
                let dev = (s - direct).abs();
                cells.extend([direct.into(), dev.into(), IDENTITY_TOL.into()]);
                report.push(cells, Some(dev <= IDENTITY_TOL), started);
            } else {
                cells.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
                report.push(cells, None, started);
            }

            let started = Instant::now();
            let flowed = flowed_tripartite(&sigma, tri, t).field("ccc")?;
            let eig = eig_hermitian(&flowed).field("ccc")?.eigenvalues;
            let dev = eig.iter().zip(&spectrum).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let cells = vec![
                i.into(),
                "spectrum".into(),
                t.into(),
                Cell::Empty,
                dev.into(),
                0.0.into(),
                dev.into(),
                IDENTITY_TOL.into(),
            ];
            report.push(cells, Some(dev <= IDENTITY_TOL), started);
        }
        for k in 1..a.times.len() {
            let (t1, t2) = (a.times[k - 1], a.times[k]);
            if t1 == t2 {
                continue;
            }
            let started = Instant::now();
            let slope = chiral_slope(&sigma, tri, t1, t2).field("ccc")?;
            let recomputed = slope_from_entropies(entropies[k - 1], entropies[k], t1, t2);
            let dev = (slope - recomputed).abs();
            let cells = vec![
                i.into(),
                "chiral_slope".into(),
                t1.into(),
                t2.into(),
                slope.into(),
                recomputed.into(),
                dev.into(),
                IDENTITY_TOL.into(),
            ];
            report.push(cells, Some(dev <= IDENTITY_TOL), started);
        }
    }
    report.set("instances", sigmas.len());
    report.set("dims", &dims);
    Ok(report)
}
