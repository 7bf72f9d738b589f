mod correlator;
mod entropy;
mod flow;
mod polys;
mod sweeps;

use serde_json::Value as Json;

use crate::args::Command;
use crate::error::{CliError, CliResult};
use crate::inputs::InputBytes;
use crate::report::{input_digest, Report};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub seed: u64,
    pub degree_cap: u64,
    pub record_timing: bool,
    /// The subcommand's arguments as JSON, for the digest and the summary.
    pub parameters: Json,
}

impl Ctx {
    pub fn report(&self, experiment: &'static str, columns: &[&'static str], inputs: &InputBytes) -> Report {
        let digest = input_digest(experiment, &self.parameters, self.seed, self.degree_cap, &inputs.0);
        Report::new(experiment, digest, columns, self.record_timing)
    }

    pub fn cap(&self) -> Option<u64> {
        Some(self.degree_cap)
    }

    /// Fails fast with a resource error when `degree` exceeds the cap.
    pub fn check_cap(&self, field: &str, degree: u64) -> CliResult<()> {
        if degree > self.degree_cap {
            return Err(CliError::core(
                field,
                modflow_core::Error::Resource { projected_degree: degree, cap: self.degree_cap },
            ));
        }
        Ok(())
    }
}

pub fn run(command: &Command, ctx: &Ctx) -> CliResult<Report> {
    match command {
        Command::ApproxLog(a) => polys::approx_log(a, ctx),
        Command::MhPoly(a) => polys::mh_poly(a, ctx),
        Command::Flow(a) => flow::flow(a, ctx),
        Command::PurifiedFlow(a) => flow::purified(a, ctx),
        Command::Entropy(a) => entropy::entropy(a, ctx),
        Command::Correlator(a) => correlator::correlator(a, ctx),
        Command::Ccc(a) => entropy::ccc(a, ctx),
        Command::SweepKappa(a) => sweeps::sweep_kappa(a, ctx),
        Command::SweepTime(a) => sweeps::sweep_time(a, ctx),
        Command::QueryCount(a) => sweeps::query_count(a, ctx),
    }
}

pub(crate) fn check_kappa(field: &str, kappa: f64) -> CliResult<()> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(CliError::usage(field, format!("must be a finite number > 1, got {kappa}")));
    }
    Ok(())
}

pub(crate) fn check_open_unit(field: &str, v: f64) -> CliResult<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(CliError::usage(field, format!("must lie in (0, 1), got {v}")));
    }
    Ok(())
}

pub(crate) fn check_finite(field: &str, v: f64) -> CliResult<()> {
    if !v.is_finite() {
        return Err(CliError::usage(field, format!("must be finite, got {v}")));
    }
    Ok(())
}

pub(crate) fn check_nonempty<T>(field: &str, v: &[T]) -> CliResult<()> {
    if v.is_empty() {
        return Err(CliError::usage(field, "needs at least one value"));
    }
    Ok(())
}

pub(crate) fn check_count(field: &str, n: usize, min: usize) -> CliResult<()> {
    if n < min {
        return Err(CliError::usage(field, format!("must be at least {min}, got {n}")));
    }
    Ok(())
}
