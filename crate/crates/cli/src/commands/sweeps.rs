use std::time::Instant;

use modflow_core::flow::FlowPlan;
use modflow_core::QueryLedger;

use super::{check_finite, check_kappa, check_nonempty, check_open_unit, Ctx};
use crate::args::{QueryCountArgs, SweepKappaArgs, SweepTimeArgs};
use crate::error::{CliResult, Context};
use crate::inputs::InputBytes;
use crate::report::{Cell, Report};

const SWEEP_COLUMNS: [&str; 14] = [
    "row_kind",
    "kappa",
    "epsilon",
    "t",
    "log_degree",
    "rect_degree",
    "trig_degree",
    "total_queries",
    "predicted_bound",
    "constant",
    "measured_slope",
    "expected_slope",
    "tolerance",
    "diagnostic",
];

fn ledger(kappa: f64, epsilon: f64, t: f64, cap: Option<u64>) -> modflow_core::Result<QueryLedger> {
    FlowPlan::new(kappa, epsilon, t)?.ledger(cap)
}

fn ledger_cells(l: &QueryLedger) -> [Cell; 6] {
    [
        l.log_poly_degree.into(),
        l.rect_poly_degree.into(),
        l.trig_degree.into(),
        l.total_queries.into(),
        l.predicted_bound.into(),
        l.constant.into(),
    ]
}

/// Least-squares slope of `ln y` against `ln x`.
pub(crate) fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One row per point (failed points included, with diagnostics) and a fit row.
fn sweep(
    experiment: &'static str,
    ctx: &Ctx,
    points: &[(f64, f64, f64)],
    abscissa: impl Fn(&(f64, f64, f64)) -> f64,
    expected: f64,
    tolerance: f64,
) -> Report {
    let mut report = ctx.report(experiment, &SWEEP_COLUMNS, &InputBytes::default());
    let mut fit = Vec::new();
    for p in points {
        let started = Instant::now();
        let &(kappa, epsilon, t) = p;
        let mut cells: Vec<Cell> = vec!["point".into(), kappa.into(), epsilon.into(), t.into()];
        match ledger(kappa, epsilon, t, ctx.cap()) {
            Ok(l) => {
                let x = abscissa(p);
                let usable = l.total_queries > 0 && x > 0.0;
                if usable {
                    fit.push((x, l.total_queries as f64));
                }
                cells.extend(ledger_cells(&l));
                cells.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
                cells.push(if usable { Cell::Empty } else { "excluded from fit: zero queries or abscissa".into() });
                report.push(cells, Some(true), started);
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(Cell::Empty, 9));
                cells.push(e.to_string().into());
                report.push(cells, Some(false), started);
            }
        }
    }
    let started = Instant::now();
    let slope = log_log_slope(&fit);
    let mut cells: Vec<Cell> = vec!["fit".into()];
    cells.extend(std::iter::repeat_n(Cell::Empty, 9));
    cells.extend([slope.into(), expected.into(), tolerance.into()]);
    cells.push(if slope.is_none() { "fewer than two usable points".into() } else { Cell::Empty });
    let pass = slope.is_some_and(|s| (s - expected).abs() <= tolerance);
    report.push(cells, Some(pass), started);
    report.set("measured_slope", slope);
    report.set("expected_slope", expected);
    report.set("tolerance", tolerance);
    report.set("points_in_fit", fit.len());
    report
}

pub fn sweep_kappa(a: &SweepKappaArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--kappas", &a.kappas)?;
    for &k in &a.kappas {
        check_kappa("--kappas", k)?;
    }
    check_open_unit("--epsilon", a.epsilon)?;
    check_finite("--time", a.time)?;
    let points: Vec<_> = a.kappas.iter().map(|&k| (k, a.epsilon, a.time)).collect();
    Ok(sweep("sweep-kappa", ctx, &points, |p| p.0, a.expected_slope, a.slope_tolerance))
}

pub fn sweep_time(a: &SweepTimeArgs, ctx: &Ctx) -> CliResult<Report> {
    check_nonempty("--times", &a.times)?;
    for &t in &a.times {
        check_finite("--times", t)?;
    }
    check_kappa("--kappa", a.kappa)?;
    check_open_unit("--epsilon", a.epsilon)?;
    let points: Vec<_> = a.times.iter().map(|&t| (a.kappa, a.epsilon, t)).collect();
    Ok(sweep("sweep-time", ctx, &points, |p| p.2.abs(), a.expected_slope, a.slope_tolerance))
}

pub fn query_count(a: &QueryCountArgs, ctx: &Ctx) -> CliResult<Report> {
    for &k in &a.kappa {
        check_kappa("--kappa", k)?;
    }
    for &e in &a.epsilon {
        check_open_unit("--epsilon", e)?;
    }
    for &t in &a.time {
        check_finite("--time", t)?;
    }
    let columns = [
        "kappa",
        "epsilon",
        "t",
        "log_degree",
        "rect_degree",
        "trig_degree",
        "total_queries",
        "predicted_bound",
        "constant",
    ];
    let mut report = ctx.report("query-count", &columns, &InputBytes::default());
    for &kappa in &a.kappa {
        for &epsilon in &a.epsilon {
            for &t in &a.time {
                let started = Instant::now();
                let l = ledger(kappa, epsilon, t, ctx.cap()).field("query-count")?;
                let mut cells: Vec<Cell> = vec![kappa.into(), epsilon.into(), t.into()];
                cells.extend(ledger_cells(&l));
                report.push(cells, None, started);
            }
        }
    }
    Ok(report)
}
