//! The commands behind the `pliag` binary: configured runs, the rate table
//! and the bundled verification suites.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::aggregation::DelayKind;
use crate::config::{CertificateChoice, RunConfig};
use crate::diagnostics::{certify_descent, certify_holder, certify_linear, certify_sublinear, Certificate};
use crate::problems::ProblemSpec;
use crate::solver::{run, SolverConfig, Trace};
use crate::stepsizes::{rate_bound_best, rate_bound_result04, StepPolicy};
use crate::verify::{self, SuiteSummary};
use crate::{Error, Result};

/// Exit code of a passing command.
pub const EXIT_PASS: i32 = 0;
/// Exit code of a command that failed with an error.
pub const EXIT_ERROR: i32 = 1;
/// Exit code of a run whose certificate failed.
pub const EXIT_CERTIFICATE_FAIL: i32 = 2;

/// Everything written to the report JSON of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub method: String,
    pub tau: usize,
    pub delay_kind: String,
    pub seed: u64,
    pub step_mode: String,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub iterations: usize,
    pub completed_iterations: usize,
    pub guard_tripped: Option<usize>,
    pub pass: bool,
    pub certificates: Vec<Certificate>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_CERTIFICATE_FAIL
        }
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trace CSV with columns `k, phi, bregman_step, delay_max, alpha`.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("k,phi,bregman_step,delay_max,alpha\n");
    for k in 0..=trace.len() {
        let (step, delay) = if k == 0 {
            (0.0, 0)
        } else {
            (trace.bregman_steps[k - 1], trace.delays[k - 1].iter().copied().max().unwrap_or(0))
        };
        let _ = writeln!(
            out,
            "{k},{},{},{delay},{}",
            format_float(trace.objective[k]),
            format_float(step),
            format_float(trace.alpha)
        );
    }
    out
}

fn certificates(
    choice: CertificateChoice,
    step: StepPolicy,
    trace: &Trace,
    problem: &ProblemSpec,
) -> Result<Vec<Certificate>> {
    let choice = match choice {
        CertificateChoice::Auto => match step {
            StepPolicy::Linear => CertificateChoice::Linear,
            StepPolicy::PiagHolder => CertificateChoice::Holder,
            _ => CertificateChoice::Sublinear,
        },
        other => other,
    };
    let mut certs = Vec::with_capacity(2);
    match choice {
        CertificateChoice::Sublinear => {
            let x_ref = problem.known_solutions()?[0].clone();
            certs.push(certify_sublinear(trace, problem, &x_ref)?);
        }
        CertificateChoice::Linear => certs.push(certify_linear(trace, problem)?),
        CertificateChoice::Holder => certs.push(certify_holder(trace, problem)?),
        CertificateChoice::DescentOnly | CertificateChoice::Auto => {}
    }
    certs.push(certify_descent(trace, problem)?);
    Ok(certs)
}

/// Runs a parsed configuration and returns the trace with its report.
pub fn execute(config: &RunConfig) -> Result<(Trace, RunReport)> {
    let solver: SolverConfig = config.solver_config()?;
    let trace = run(&solver)?;
    let certs = certificates(config.certificate, config.step, &trace, &solver.problem)?;
    let method = match config.method {
        Some(tag) => tag.to_string(),
        None => solver.selection.name().to_string(),
    };
    let delay_kind = match solver.delays.kind {
        DelayKind::Zero => "zero",
        DelayKind::Constant { .. } => "constant",
        DelayKind::Cyclic => "cyclic",
        DelayKind::UniformRandom { .. } => "uniform_random",
    };
    let report = RunReport {
        problem: config.problem.name().to_string(),
        method,
        tau: solver.tau(),
        delay_kind: delay_kind.to_string(),
        seed: config.effective_seed()?,
        step_mode: config.step.name().to_string(),
        alpha: trace.alpha,
        iterations: config.iterations,
        completed_iterations: trace.len(),
        guard_tripped: trace.guard_tripped,
        pass: certs.iter().all(|c| c.pass),
        certificates: certs,
    };
    Ok((trace, report))
}

/// `run <config>`: writes the trace CSV and the report JSON named in the
/// config and returns the report.
pub fn cmd_run(path: &Path) -> Result<RunReport> {
    let config = RunConfig::load(path)?;
    let (trace, report) = execute(&config)?;
    std::fs::write(&config.trace_csv, trace_csv(&trace))?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(&config.report_json, json)?;
    Ok(report)
}

/// One row of the rate table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub q: f64,
    pub tau: usize,
    pub rate_result04: f64,
    pub rate_best: f64,
}

impl RateRow {
    /// `result04` when its factor is at most the other one, `best` otherwise.
    pub fn better(&self) -> &'static str {
        if self.rate_result04 <= self.rate_best {
            "result04"
        } else {
            "best"
        }
    }
}

/// Both linear rate factors with `ℓ` the identity.
pub fn rate_table(qs: &[f64], taus: &[usize]) -> Result<Vec<RateRow>> {
    if let Some(&q) = qs.iter().find(|&&q| !(q >= 1.0 && q.is_finite())) {
        return Err(Error::InvalidArgument(format!("Q = {q} must be >= 1")));
    }
    Ok(qs
        .iter()
        .flat_map(|&q| {
            taus.iter().map(move |&tau| RateRow {
                q,
                tau,
                rate_result04: rate_bound_result04(q, tau, tau as f64 + 1.0),
                rate_best: rate_bound_best(q, tau),
            })
        })
        .collect())
}

/// `rates --q ... --tau ...`: CSV with columns `Q, tau, rate_result04,
/// rate_best, better`.
pub fn cmd_rates(qs: &[f64], taus: &[usize]) -> Result<String> {
    let mut out = String::from("Q,tau,rate_result04,rate_best,better\n");
    for row in rate_table(qs, taus)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_float(row.q),
            row.tau,
            format_float(row.rate_result04),
            format_float(row.rate_best),
            row.better()
        );
    }
    Ok(out)
}

/// `verify <suite>`: runs a bundled suite.
pub fn cmd_verify(suite: &str) -> Result<SuiteSummary> {
    verify::run_suite(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        let rows = rate_table(&[10.0], &[3]).unwrap();
        assert!((rows[0].rate_best - 0.9994898).abs() < 1e-7);
        let rows = rate_table(&[1.0], &[0]).unwrap();
        assert_eq!(rows[0].rate_result04, 0.5);
        assert!(rate_table(&[0.5], &[0]).is_err());
    }

    #[test]
    fn crossover_at_47() {
        let taus: Vec<usize> = (0..=100).collect();
        for row in rate_table(&[100.0], &taus).unwrap() {
            let expected = if row.tau <= 47 { "result04" } else { "best" };
            assert_eq!(row.better(), expected, "tau = {}", row.tau);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = cmd_rates(&[2.0], &[0, 1]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Q,tau,rate_result04,rate_best,better");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("2.0000000000000000e0,0,"));
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
