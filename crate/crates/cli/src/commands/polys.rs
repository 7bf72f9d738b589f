use std::time::Instant;

use modflow_core::chebyshev::{grid, log_series_coefficients, DegreeRule};
use modflow_core::mh_poly::{audit_spec, modular_hamiltonian_poly, MhPlan, SupCertificate, ADMISSIBLE_SLACK};
use modflow_core::Parity;

use super::{check_count, check_kappa, check_open_unit, Ctx};
use crate::args::{ApproxLogArgs, MhPolyArgs, RuleArg};
use crate::error::{CliResult, Context};
use crate::inputs::InputBytes;
use crate::report::{Cell, Report};

pub fn approx_log(a: &ApproxLogArgs, ctx: &Ctx) -> CliResult<Report> {
    check_kappa("--kappa", a.kappa)?;
    check_open_unit("--epsilon", a.epsilon)?;
    check_count("--grid", a.grid, 2)?;
    let rule = match a.degree_rule {
        RuleArg::ClosedForm => DegreeRule::ClosedForm,
        RuleArg::Certified => DegreeRule::Certified,
    };
    let terms = rule.degree(a.kappa, a.epsilon).field("--kappa/--epsilon")?;
    ctx.check_cap("--degree-cap", 2 * terms as u64)?;
    let series = log_series_coefficients(terms);
    let bound = rule.bound(a.kappa, terms);

    let mut report = ctx.report("approx-log", &["x", "f_n", "ln_x", "error", "bound"], &InputBytes::default());
    let (mut worst, mut worst_x) = (0.0f64, 1.0);
    for x in grid(1.0 / a.kappa, 1.0, a.grid) {
        let started = Instant::now();
        let f = series.eval(x);
        let err = (f - x.ln()).abs();
        if err > worst {
            (worst, worst_x) = (err, x);
        }
        report.push(vec![x.into(), f.into(), x.ln().into(), err.into(), bound.into()], Some(err <= bound), started);
    }
    report.set("kappa", a.kappa);
    report.set("epsilon", a.epsilon);
    report.set("degree_rule", a.degree_rule);
    report.set("terms", terms);
    report.set("polynomial_degree", 2 * terms);
    report.set("bound", bound);
    report.set("max_error", worst);
    report.set("max_error_x", worst_x);
    report.set("max_error_within_epsilon", worst <= a.epsilon);
    Ok(report)
}

pub fn mh_poly(a: &MhPolyArgs, ctx: &Ctx) -> CliResult<Report> {
    check_kappa("--kappa", a.kappa)?;
    check_open_unit("--epsilon", a.epsilon)?;
    check_count("--grid", a.grid, 2)?;
    let plan = MhPlan::new(a.kappa, a.epsilon).field("--kappa/--epsilon")?;
    ctx.check_cap("--degree-cap", 2 * plan.log_terms as u64)?;
    let (p, info) = modular_hamiltonian_poly(a.kappa, a.epsilon).field("--kappa/--epsilon")?;
    ctx.check_cap("--degree-cap", p.degree as u64)?;

    let columns = ["kind", "x", "value", "target", "error", "bound", "detail"];
    let mut report = ctx.report("mh-poly", &columns, &InputBytes::default());
    let scale = info.scale();
    let tol = a.epsilon / scale;
    let mut worst = 0.0f64;
    for x in grid(1.0 / a.kappa, 1.0, a.grid) {
        let started = Instant::now();
        let v = p.eval(x);
        let target = -x.ln() / scale;
        let err = (v - target).abs();
        worst = worst.max(err);
        let cells = vec!["contract".into(), x.into(), v.into(), target.into(), err.into(), tol.into(), Cell::Empty];
        report.push(cells, Some(err <= tol), started);
    }

    let started = Instant::now();
    let sup_limit = 1.0 + ADMISSIBLE_SLACK;
    let (sup, detail) = match (audit_spec(&p), &p.certificate) {
        (Some(s), _) => (s, "chebyshev-grid".to_string()),
        (None, SupCertificate::Analytic) => (p.sup_norm_bound, "analytic".to_string()),
        (None, SupCertificate::Grid { nodes }) => (p.sup_norm_bound, format!("grid:{nodes}")),
    };
    let cells = vec!["sup".into(), Cell::Empty, sup.into(), Cell::Empty, Cell::Empty, sup_limit.into(), detail.into()];
    report.push(cells, Some(sup <= sup_limit), started);

    let started = Instant::now();
    let series = p.series();
    let odd = series.coefficients().iter().skip(1).step_by(2).map(|c| c.abs()).fold(0.0, f64::max);
    let parity_ok = odd == 0.0 && p.parity == Parity::Even && series.parity() == Parity::Even;
    let cells = vec!["parity".into(), Cell::Empty, odd.into(), Cell::Empty, Cell::Empty, 0.0.into(), "even".into()];
    report.push(cells, Some(parity_ok), started);

    report.set("kappa", a.kappa);
    report.set("epsilon", a.epsilon);
    report.set("degree", p.degree);
    report.set("log_terms", info.log_terms);
    report.set("beta", info.beta);
    report.set("epsilon_prime", info.epsilon_prime);
    report.set("sup_norm_bound", p.sup_norm_bound);
    report.set("certificate", &p.certificate);
    report.set("admissible", p.is_admissible());
    report.set("max_contract_error", worst);
    Ok(report)
}
