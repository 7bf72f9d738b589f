use std::time::Instant;

use modflow_core::flow::{approx_flow_with, exact_flow, purified_flow, FlowOptions};
use modflow_core::matfun::operator_norm;
use modflow_core::random::{random_density, random_hermitian, random_pure_state, rng};
use modflow_core::{ComplexMatrix, DensityMatrix, PureState, QueryLedger};
use rand::Rng;

use super::{check_count, check_finite, check_kappa, check_nonempty, check_open_unit, Ctx};
use crate::args::{FlowArgs, ModeArg, PurifiedFlowArgs};
use crate::error::{CliError, CliResult, Context};
use crate::inputs::{required, InputBytes};
use crate::report::{Cell, Report};

/// Tolerance for the norm-preservation check of the exact mode.
const EXACT_TOL: f64 = 1e-10;

struct FlowInstance {
    rho: DensityMatrix,
    operator: ComplexMatrix,
    t: f64,
    epsilon: f64,
}

fn ledger_cells(ledger: Option<&QueryLedger>) -> Vec<Cell> {
    match ledger {
        Some(l) => vec![
            l.log_poly_degree.into(),
            l.rect_poly_degree.into(),
            l.trig_degree.into(),
            l.total_queries.into(),
        ],
        None => vec![Cell::Empty; 4],
    }
}

pub fn flow(a: &FlowArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--epsilon", &a.epsilon)?;
    for &e in &a.epsilon {
        check_open_unit("--epsilon", e)?;
    }
    if let Some(k) = a.kappa {
        check_kappa("--kappa", k)?;
    }
    let mut inputs = InputBytes::default();
    let instances: Vec<FlowInstance> = match a.random {
        Some(n) => {
            check_count("--random", n, 1)?;
            check_count("--max-dim", a.max_dim, 2)?;
            check_finite("--max-time", a.max_time)?;
            if !(a.max_kappa >= a.max_dim as f64) {
                return Err(CliError::usage("--max-kappa", "must be at least --max-dim"));
            }
            let mut r = rng(ctx.seed);
            (0..n)
                .map(|i| {
                    let d = r.random_range(2..=a.max_dim);
                    let rho = DensityMatrix::new(&random_density(d, a.max_kappa, &mut r)).expect("valid random state");
                    let operator = random_hermitian(d, &mut r);
                    let t = r.random_range(-a.max_time.abs()..=a.max_time.abs());
                    FlowInstance { rho, operator, t, epsilon: a.epsilon[i % a.epsilon.len()] }
                })
                .collect()
        }
        None => {
            let rho = inputs.density("--state", required("--state", &a.state)?)?;
            let operator = inputs.operator("--operator", required("--operator", &a.operator)?)?;
            if operator.rows() != rho.dim() {
                return Err(CliError::usage(
                    "--operator",
                    format!("dimension {} does not match the state's {}", operator.rows(), rho.dim()),
                ));
            }
            check_nonempty("--time", &a.time)?;
            let mut v = Vec::new();
            for &t in &a.time {
                check_finite("--time", t)?;
                for &epsilon in &a.epsilon {
                    v.push(FlowInstance { rho: rho.clone(), operator: operator.clone(), t, epsilon });
                }
            }
            v
        }
    };

    let columns = [
        "instance",
        "dim",
        "t",
        "epsilon",
        "mode",
        "kappa",
        "deviation",
        "bound",
        "budget_bound",
        "log_degree",
        "rect_degree",
        "trig_degree",
        "total_queries",
    ];
    let mut report = ctx.report("flow", &columns, &inputs);
    let options = FlowOptions { kappa_override: a.kappa, degree_cap: ctx.cap() };
    let mut worst_ratio = 0.0f64;
    for (i, inst) in instances.iter().enumerate() {
        let started = Instant::now();
        let head: Vec<Cell> = vec![i.into(), inst.rho.dim().into(), inst.t.into(), inst.epsilon.into()];
        let mut cells = head;
        match a.mode {
            ModeArg::Polynomial => {
                let r = approx_flow_with(&inst.rho, &inst.operator, inst.t, inst.epsilon, &options).field("flow")?;
                for w in &r.warnings {
                    report.warn(format!("instance {i}: {w}"));
                }
                worst_ratio = worst_ratio.max(r.error_norm / inst.epsilon);
                cells.extend([
                    "polynomial".into(),
                    r.kappa.into(),
                    r.error_norm.into(),
                    inst.epsilon.into(),
                    r.budget.total_bound.into(),
                ]);
                cells.extend(ledger_cells(Some(&r.query_ledger)));
                report.push(cells, Some(r.error_norm < inst.epsilon), started);
            }
            ModeArg::Exact => {
                let flowed = exact_flow(&inst.rho, &inst.operator, inst.t).field("flow")?;
                let dev = (operator_norm(&flowed) - operator_norm(&inst.operator)).abs();
                cells.extend(["exact".into(), Cell::Empty, dev.into(), EXACT_TOL.into(), Cell::Empty]);
                cells.extend(ledger_cells(None));
                report.push(cells, Some(dev <= EXACT_TOL), started);
            }
        }
    }
    report.set("instances", instances.len());
    report.set("mode", a.mode);
    if a.mode == ModeArg::Polynomial {
        report.set("max_error_over_epsilon", worst_ratio);
    }
    Ok(report)
}

pub fn purified(a: &PurifiedFlowArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--delta", &a.delta)?;
    for &d in &a.delta {
        check_open_unit("--delta", d)?;
    }
    let mut inputs = InputBytes::default();
    let instances: Vec<(PureState, f64, f64)> = match a.random {
        Some(n) => {
            check_count("--random", n, 1)?;
            check_nonempty("--dims", &a.dims)?;
            for &d in &a.dims {
                check_count("--dims", d, 1)?;
            }
            check_finite("--max-time", a.max_time)?;
            let mut r = rng(ctx.seed);
            (0..n)
                .map(|i| {
                    let d = a.dims[i % a.dims.len()];
                    let delta = a.delta[(i / a.dims.len()) % a.delta.len()];
                    let psi = PureState::new(random_pure_state(d * d, &mut r), vec![d, d]).expect("normalized");
                    let t = r.random_range(-a.max_time.abs()..=a.max_time.abs());
                    (psi, t, delta)
                })
                .collect()
        }
        None => {
            let psi = inputs.pure_or_purified("--state", required("--state", &a.state)?)?;
            if psi.dims().len() != 2 {
                return Err(CliError::usage("--state", format!("expected two factors, got dims {:?}", psi.dims())));
            }
            check_nonempty("--time", &a.time)?;
            let mut v = Vec::new();
            for &t in &a.time {
                check_finite("--time", t)?;
                for &delta in &a.delta {
                    v.push((psi.clone(), t, delta));
                }
            }
            v
        }
    };

    let columns = [
        "instance",
        "dim_a",
        "t",
        "delta",
        "kappa",
        "epsilon",
        "distance",
        "bound",
        "log_degree",
        "rect_degree",
        "trig_degree",
        "total_queries",
    ];
    let mut report = ctx.report("purified-flow", &columns, &inputs);
    let finite = |x: f64| if x.is_finite() { Cell::Float(x) } else { Cell::Empty };
    let mut worst = 0.0f64;
    for (i, (psi, t, delta)) in instances.iter().enumerate() {
        let started = Instant::now();
        let r = purified_flow(psi, *t, *delta, ctx.cap()).field("purified-flow")?;
        worst = worst.max(r.distance / delta);
        let mut cells: Vec<Cell> = vec![
            i.into(),
            psi.dims()[0].into(),
            (*t).into(),
            (*delta).into(),
            finite(r.kappa),
            finite(r.epsilon),
            r.distance.into(),
            r.bound.into(),
        ];
        cells.extend(ledger_cells(r.ledger.as_ref()));
        report.push(cells, Some(r.distance <= r.bound && r.bound <= *delta), started);
    }
    report.set("instances", instances.len());
    report.set("max_distance_over_delta", worst);
    Ok(report)
}
