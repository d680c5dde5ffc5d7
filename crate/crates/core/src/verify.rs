//! Bundled invariant suites run by `pliag verify <suite>`.
//!
//! Every suite is deterministic (fixed seeds) and finishes in a few seconds.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::aggregation::DelaySchedule;
use crate::diagnostics::{
    bdg_estimate, certify_descent, certify_holder, certify_linear, certify_sublinear,
    log_rate_slope, lyapunov_gamma, recursion_oracle_42, recursion_oracle_51, Certificate,
    RecursionInstance, SufficientCondition,
};
use crate::kernels::{symmetry_ratio_min, CoordBox, LegendreKernel};
use crate::problems::{self, relative_smoothness_margin, ProblemSpec};
use crate::sampling::{PointSampler, UniformBox};
use crate::solver::{named_method, run, MethodTag, SolverConfig, Trace};
use crate::stepsizes::{rate_linear, StepPolicy};
use crate::{Error, Point, Result};

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &["kernels", "descent", "sublinear", "linear", "holder", "recursion", "appendixB"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<SuiteCheck>,
}

#[derive(Default)]
struct Checks(Vec<SuiteCheck>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.0.push(SuiteCheck { name: name.into(), pass, detail: detail.into() });
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name, value >= limit, format!("{value:e} >= {limit:e}"));
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name, value <= limit, format!("{value:e} <= {limit:e}"));
    }

    fn certificate(&mut self, name: impl Into<String>, cert: &Certificate) {
        self.push(
            name,
            cert.pass,
            format!("max_violation {:e} over K = {}", cert.max_violation, cert.iterations),
        );
    }
}

pub fn run_suite(name: &str) -> Result<SuiteSummary> {
    let mut checks = Checks::default();
    match name {
        "kernels" => kernels(&mut checks)?,
        "descent" => descent(&mut checks)?,
        "sublinear" => sublinear(&mut checks)?,
        "linear" => linear(&mut checks)?,
        "holder" => holder(&mut checks)?,
        "recursion" => recursion(&mut checks)?,
        "appendixB" => appendix_b(&mut checks)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite `{other}` (expected one of {})",
                SUITES.join(", ")
            )))
        }
    }
    Ok(SuiteSummary {
        suite: name.to_string(),
        pass: checks.0.iter().all(|c| c.pass),
        checks: checks.0,
    })
}

pub fn summary_json(summary: &SuiteSummary) -> Result<String> {
    Ok(serde_json::to_string_pretty(summary)?)
}

/// Lasso with constant delays `τ`.
pub fn lasso_run(tau: usize, step: StepPolicy, iterations: usize) -> Result<(ProblemSpec, Trace)> {
    let problem = problems::desk_lasso()?;
    let mut cfg = SolverConfig::new(problem.clone(), iterations);
    cfg.delays = delays(tau);
    cfg.step = step;
    Ok((problem, run(&cfg)?))
}

/// Quartic model (`E = C = I₂`, `A = 0`) with the kernel box `[−1, 1]²`
/// (needed for `ℓ` once `τ > 0`), started at `(1, −½)`.
pub fn quartic_run(tau: usize, iterations: usize) -> Result<(ProblemSpec, Trace)> {
    let mut problem = problems::desk_quartic()?;
    problem.kernel = problem.kernel.clone().with_box(-1.0, 1.0)?;
    let mut cfg = SolverConfig::new(problem.clone(), iterations);
    cfg.delays = delays(tau);
    cfg.step = StepPolicy::Linear;
    cfg.x0 = Point::from_row_slice(&[1.0, -0.5]);
    Ok((problem, run(&cfg)?))
}

/// Hölder toy (`ε = 0`) from `x₀ = 0.9`.
pub fn holder_run(tau: usize, iterations: usize) -> Result<(ProblemSpec, Trace)> {
    let problem = problems::make_holder_toy(0.0)?;
    let mut cfg = SolverConfig::new(problem.clone(), iterations);
    cfg.delays = delays(tau);
    cfg.step = StepPolicy::PiagHolder;
    cfg.x0 = Point::from_element(1, 0.9);
    Ok((problem, run(&cfg)?))
}

fn delays(tau: usize) -> DelaySchedule {
    if tau == 0 {
        DelaySchedule::zero()
    } else {
        DelaySchedule::constant(tau)
    }
}

fn kernels(checks: &mut Checks) -> Result<()> {
    let e2 = LegendreKernel::euclidean(2);
    let p = |v: &[f64]| Point::from_row_slice(v);
    checks.push("euclidean value", e2.value(&p(&[3.0, 4.0]))? == 12.5, "w(3,4) = 12.5");
    checks.push("euclidean gradient", e2.gradient(&p(&[3.0, 4.0]))? == p(&[3.0, 4.0]), "∇w = x");
    checks.push("euclidean bregman", e2.bregman(&p(&[1.0, 2.0]), &p(&[0.0, 0.0]))? == 2.5, "D = 2.5");
    let burg = LegendreKernel::burg(2);
    checks.push("burg value at ones", burg.value(&p(&[1.0, 1.0]))? == 0.0, "−Σlog 1 = 0");
    checks.push(
        "burg rejects zero",
        matches!(burg.value(&p(&[0.0, 1.0])), Err(Error::DomainViolation(_))),
        "DomainViolation",
    );
    let quartic = LegendreKernel::quartic(2, 1.0, 1.0)?;
    checks.push("quartic value", (quartic.value(&p(&[1.0, 0.0]))? - 0.75).abs() < 1e-15, "w(1,0) = 0.75");

    let cases: Vec<(LegendreKernel, f64, f64)> = vec![
        (LegendreKernel::euclidean(3), -5.0, 5.0),
        (LegendreKernel::burg(3), 0.1, 10.0),
        (LegendreKernel::burg_with_quadratic(3, 0.5)?, 0.1, 10.0),
        (LegendreKernel::quartic(3, 2.0, 1.0)?, -5.0, 5.0),
    ];
    for (k, lo, hi) in &cases {
        let mut s = UniformBox::new(3, *lo, *hi, 11);
        let (mut worst_neg, mut worst_three) = (0.0f64, 0.0f64);
        for _ in 0..2000 {
            let (x, y, z) = (s.sample(), s.sample(), s.sample());
            worst_neg = worst_neg.min(k.bregman(&x, &y)?);
            let scale = 1.0 + k.bregman(&x, &z)?.abs();
            worst_three = worst_three.max(k.three_point_residual(&x, &y, &z)? / scale);
        }
        checks.at_least(format!("{} nonnegative", k.name()), worst_neg, 0.0);
        checks.at_most(format!("{} three-point identity", k.name()), worst_three, 1e-10);
    }
    let mut s = UniformBox::new(2, -5.0, 5.0, 12);
    checks.push(
        "euclidean symmetry",
        symmetry_ratio_min(&e2, &mut s, 1000)? >= 1.0 - 1e-12,
        "ratio 1",
    );
    checks.push("ell identity", e2.ell(3)? == 3.0, "ℓ(3) = 3");
    let boxed = LegendreKernel::burg(2).with_box(0.5, 2.0)?;
    let ells: Vec<f64> = (1..=6).map(|k| boxed.ell(k)).collect::<Result<_>>()?;
    checks.push(
        "ell monotone with ell(1) = 1",
        ells[0] == 1.0 && ells.windows(2).all(|w| w[0] <= w[1]),
        format!("{ells:?}"),
    );
    checks.push(
        "ell needs moduli",
        matches!(LegendreKernel::burg(2).ell(2), Err(Error::MissingModuli(_))),
        "MissingModuli",
    );
    // D(x_k, x_j) ≤ ℓ(k−j)·Σ D(x_{i+1}, x_i) along random chains in the box.
    for k in [boxed.clone(), LegendreKernel::quartic(2, 1.0, 1.0)?.with_box(-1.0, 1.0)?] {
        let CoordBox { lower: l, upper: u } = k.bounds().expect("boxed kernel");
        let mut s = UniformBox::new(2, l, u, 13);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..500 {
            let chain: Vec<Point> = (0..5).map(|_| s.sample()).collect();
            let sum: f64 = chain.windows(2).map(|w| k.bregman(&w[1], &w[0])).sum::<Result<f64>>()?;
            let lhs = k.bregman(&chain[4], &chain[0])?;
            worst = worst.max(lhs - k.ell(4)? * sum);
        }
        checks.at_most(format!("{} delayed chain bound", k.name()), worst, 1e-12);
    }
    Ok(())
}

fn descent(checks: &mut Checks) -> Result<()> {
    for tau in [0, 3, 5] {
        let (p, t) = lasso_run(tau, StepPolicy::Sublinear, 2000)?;
        checks.certificate(format!("lasso tau={tau} sublinear step"), &certify_descent(&t, &p)?);
    }
    for tau in [0, 3] {
        let (p, t) = lasso_run(tau, StepPolicy::Linear, 1000)?;
        checks.certificate(format!("lasso tau={tau} linear step"), &certify_descent(&t, &p)?);
        let (p, t) = quartic_run(tau, 1000)?;
        checks.certificate(format!("quartic tau={tau}"), &certify_descent(&t, &p)?);
    }
    for tau in [0, 2] {
        let (p, t) = holder_run(tau, 1000)?;
        checks.certificate(format!("holder toy tau={tau}"), &certify_descent(&t, &p)?);
    }
    let poisson = problems::desk_poisson(0.0, 0.1)?;
    let t = run(&named_method(MethodTag::Nolips, poisson.clone(), 0, 500)?)?;
    checks.certificate("poisson nolips", &certify_descent(&t, &poisson)?);
    Ok(())
}

fn sublinear(checks: &mut Checks) -> Result<()> {
    for tau in [0, 3, 5] {
        let (p, t) = lasso_run(tau, StepPolicy::Sublinear, 2000)?;
        let x_star = p.known_solutions()?[0].clone();
        checks.certificate(format!("lasso tau={tau}"), &certify_sublinear(&t, &p, &x_star)?);
    }
    let mut quartic = problems::desk_quartic()?;
    quartic.kernel = quartic.kernel.clone().with_box(-1.0, 1.0)?;
    let mut cfg = named_method(MethodTag::NeIap, quartic.clone(), 1, 500)?;
    cfg.x0 = Point::from_row_slice(&[0.5, 0.5]);
    let t = run(&cfg)?;
    let x_star = quartic.known_solutions()?[0].clone();
    checks.certificate("quartic ne_iap tau=1", &certify_sublinear(&t, &quartic, &x_star)?);
    Ok(())
}

fn linear(checks: &mut Checks) -> Result<()> {
    for tau in [0, 3] {
        let (p, t) = quartic_run(tau, 1000)?;
        checks.certificate(format!("quartic tau={tau}"), &certify_linear(&t, &p)?);
        let gamma: Vec<f64> =
            (0..=t.len()).map(|k| lyapunov_gamma(&t, &p, k, t.alpha)).collect::<Result<_>>()?;
        let mu = p.growth.ok_or(Error::MissingGrowth)?.mu;
        let slope = log_rate_slope(&gamma).unwrap_or(f64::NEG_INFINITY);
        checks.at_most(format!("quartic tau={tau} fitted log-rate"), slope, rate_linear(t.alpha, mu).ln() + 1e-6);
        let (p, t) = lasso_run(tau, StepPolicy::Linear, 1000)?;
        checks.certificate(format!("lasso tau={tau}"), &certify_linear(&t, &p)?);
    }
    Ok(())
}

fn holder(checks: &mut Checks) -> Result<()> {
    for tau in [0, 2] {
        let (p, t) = holder_run(tau, 1000)?;
        checks.certificate(format!("holder toy tau={tau}"), &certify_holder(&t, &p)?);
    }
    Ok(())
}

fn instance_family(a_values: [f64; 5]) -> Vec<RecursionInstance> {
    let mut out = Vec::new();
    for a in a_values {
        for &(k0, frac) in &[(0usize, 0.99), (1, 0.5), (2, 1.0), (4, 0.9)] {
            let b = 1.0;
            let c = frac * b / crate::stepsizes::recursion_condition_value(a, 1.0, k0);
            out.push(RecursionInstance { a, b, c, d: 0.0, theta: 1.0, k0, initial: 1.0 });
        }
    }
    out
}

/// Twenty valid instances of the first recursion lemma, with `c` at a
/// fraction of the largest value the condition allows.
pub fn valid_instances_42() -> Vec<RecursionInstance> {
    instance_family([0.3, 0.5, 0.8, 0.95, 1.0])
}

/// Twenty valid instances of the second recursion lemma (`a + d = 1`,
/// `V₀ ≤ 1`).
pub fn valid_instances_51() -> Vec<RecursionInstance> {
    instance_family([0.3, 0.5, 0.8, 0.95, 0.99])
        .into_iter()
        .enumerate()
        .map(|(n, i)| RecursionInstance {
            d: 1.0 - i.a,
            theta: [0.25, 0.5, 0.75, 1.0][n % 4],
            initial: [1.0, 0.5, 0.1][n % 3],
            ..i
        })
        .collect()
}

/// Instances that break the condition: `c` just above the allowed value.
pub fn invalid_instances() -> Vec<RecursionInstance> {
    valid_instances_42()
        .into_iter()
        .map(|i| {
            let limit = i.b / crate::stepsizes::recursion_condition_value(i.a, 1.0, i.k0);
            RecursionInstance { c: limit * 1.01, d: 1.0 - i.a, theta: 0.5, ..i }
        })
        .collect()
}

fn recursion(checks: &mut Checks) -> Result<()> {
    let spot = RecursionInstance { a: 0.5, b: 1.0, c: 0.1, d: 0.0, theta: 1.0, k0: 1, initial: 1.0 };
    for (n, inst) in std::iter::once(spot).chain(valid_instances_42()).enumerate() {
        let out = recursion_oracle_42(&inst, 1000, 200, n as u64)?;
        checks.push(
            format!("delayed recursion oracle #{n}"),
            out.pass,
            format!("{} violations, worst ratio {:e}", out.violations, out.worst_ratio),
        );
    }
    let spot = RecursionInstance { a: 0.5, b: 1.0, c: 0.1, d: 0.5, theta: 0.5, k0: 1, initial: 1.0 };
    for (n, inst) in std::iter::once(spot).chain(valid_instances_51()).enumerate() {
        let out = recursion_oracle_51(&inst, 1000, 200, n as u64)?;
        checks.push(
            format!("generalized recursion oracle #{n}"),
            out.pass,
            format!("{} violations, worst log-excess {:e}", out.violations, out.worst_ratio),
        );
    }
    let rejected = invalid_instances()
        .iter()
        .filter(|i| {
            matches!(recursion_oracle_42(i, 1, 1, 0), Err(Error::ConditionViolated { .. }))
                && matches!(recursion_oracle_51(i, 1, 1, 0), Err(Error::ConditionViolated { .. }))
        })
        .count();
    let total = invalid_instances().len();
    checks.push("invalid instances rejected", rejected == total, format!("{rejected}/{total}"));
    Ok(())
}

fn appendix_b(checks: &mut Checks) -> Result<()> {
    let mut s = UniformBox::new(2, -5.0, 5.0, 21);
    let q11 = LegendreKernel::quartic(2, 1.0, 1.0)?;
    checks.at_least("symmetry quartic(1,1)", symmetry_ratio_min(&q11, &mut s, 100_000)?, 0.2 - 1e-9);
    let q21 = LegendreKernel::quartic(2, 2.0, 1.0)?;
    checks.at_least("symmetry quartic(2,1)", symmetry_ratio_min(&q21, &mut s, 100_000)?, 0.1 - 1e-9);

    let poisson = problems::desk_poisson(0.0, 0.0)?;
    let mut s = UniformBox::new(3, 0.01, 10.0, 22);
    for (n, comp) in poisson.components.iter().enumerate() {
        let m = relative_smoothness_margin(comp, &poisson.kernel, &mut s, 10_000)?;
        checks.at_least(format!("poisson component {n} relative smoothness"), m, -1e-9);
    }
    let quartic = problems::desk_quartic()?;
    let mut s = UniformBox::new(2, -5.0, 5.0, 23);
    for (n, comp) in quartic.components.iter().enumerate() {
        let m = relative_smoothness_margin(comp, &quartic.kernel, &mut s, 10_000)?;
        checks.at_least(format!("quartic component {n} relative smoothness"), m, -1e-9);
    }
    let mu = problems::quartic_rsc_constant(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2));
    let rsc = crate::diagnostics::sufficient_condition_check(
        &quartic,
        SufficientCondition::RelativeStrongConvexity { mu },
        &mut s,
        10_000,
    )?;
    checks.at_least("quartic relative strong convexity", rsc, -1e-9);
    let c2 = crate::diagnostics::sufficient_condition_check(
        &quartic,
        SufficientCondition::C2 { mu: mu / 5.0 },
        &mut s,
        10_000,
    )?;
    checks.at_least("quartic C2 with symmetry factor", c2, -1e-9);
    let mut shells = crate::sampling::RadialShells::new(Point::zeros(2), 1e-3, 10.0, 24);
    checks.at_least("quartic bregman growth estimate", bdg_estimate(&quartic, &mut shells, 10_000)?, 0.29);
    Ok(())
}
