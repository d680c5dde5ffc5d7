//! Lyapunov functionals, rate certificates, growth estimators and
//! brute-force oracles for the two recursion lemmas.
//!
//! Certificates compare an observed trajectory quantity against its
//! theoretical bound at every iteration; a violation is measured relative to
//! the bound as `(observed − bound) / max(1, |bound|)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernels::KernelKind;
use crate::problems::{GrowthMode, ProblemSpec};
use crate::sampling::PointSampler;
use crate::solver::Trace;
use crate::stepsizes::{holder_eta, rate_linear, recursion_condition, recursion_condition_value};
use crate::{Error, Point, Result};

/// Tolerance of the rate certificates.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Slack allowed when checking that `T_k` is nonincreasing.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Tolerance of the descent-lemma residual.
pub const DESCENT_TOL: f64 = 1e-8;
/// Safety factor applied to sampled growth constants.
pub const GROWTH_SAFETY: f64 = 0.9;

fn relative_violation(observed: f64, bound: f64) -> f64 {
    (observed - bound) / bound.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Sublinear,
    LinearGamma,
    HolderDistance,
    Descent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub k: usize,
    pub observed: f64,
    pub bound: f64,
}

/// One inequality family checked by a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    #[serde(rename = "K")]
    pub iterations: usize,
    pub alpha: f64,
    pub mu: Option<f64>,
    pub max_violation: f64,
    pub pass: bool,
    pub per_k: Vec<CertificateEntry>,
    pub checks: Vec<CheckSummary>,
    pub notes: Vec<String>,
}

struct Builder {
    cert: Certificate,
}

impl Builder {
    fn new(kind: CertificateKind, trace: &Trace, mu: Option<f64>) -> Self {
        let mut notes = Vec::new();
        if let Some(k) = trace.guard_tripped {
            notes.push(format!("divergence guard tripped at iteration {k}"));
        }
        if !trace.box_violations.is_empty() {
            notes.push(format!(
                "{} iterates left the kernel box (first at k = {}); ell is not certified there",
                trace.box_violations.len(),
                trace.box_violations[0]
            ));
        }
        Self {
            cert: Certificate {
                kind,
                iterations: trace.len(),
                alpha: trace.alpha,
                mu,
                max_violation: f64::NEG_INFINITY,
                pass: true,
                per_k: Vec::new(),
                checks: Vec::new(),
                notes,
            },
        }
    }

    fn check(&mut self, name: &str, violations: impl IntoIterator<Item = f64>, tol: f64) {
        let worst = violations.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let pass = !(worst > tol) && !worst.is_nan();
        self.cert.checks.push(CheckSummary {
            name: name.into(),
            max_violation: worst,
            tolerance: tol,
            pass,
        });
        self.cert.max_violation = self.cert.max_violation.max(worst);
        self.cert.pass &= pass;
    }

    fn finish(mut self, trace: &Trace, problem: &ProblemSpec) -> Certificate {
        if let Some(k) = trace.guard_tripped {
            let phi0 = trace.objective[0];
            let rise = relative_violation(trace.objective[k], phi0);
            self.check("divergence_guard", [rise], 0.0);
        }
        if matches!(problem.kernel.kind(), KernelKind::Burg { .. }) {
            self.cert.notes.push(
                "Bregman growth for the Burg kernel is only established on a bounded box; \
                 the growth constant is a sampled estimate"
                    .into(),
            );
        }
        if self.cert.max_violation == f64::NEG_INFINITY {
            self.cert.max_violation = 0.0;
        }
        self.cert
    }
}

fn check_index(trace: &Trace, k: usize) -> Result<()> {
    if k > trace.len() {
        Err(Error::IndexOutOfTrace { index: k, len: trace.len() + 1 })
    } else {
        Ok(())
    }
}

/// `T_k(x) = Φ(x_k) − Φ(x) + L·ℓ(τ+1)·Σ_{i=1}^{τ} i·D_w(x_{k−τ+i}, x_{k−τ+i−1})`
/// with the constants recorded in the trace.
pub fn lyapunov_t(trace: &Trace, problem: &ProblemSpec, k: usize, x_ref: &Point) -> Result<f64> {
    let phi_ref = problem.objective(x_ref)?;
    lyapunov_t_with(trace, k, phi_ref, trace.smoothness, trace.tau, trace.ell)
}

/// [`lyapunov_t`] with explicit `Φ(x)`, `L`, `τ` and `ℓ(τ+1)`.
pub fn lyapunov_t_with(
    trace: &Trace,
    k: usize,
    phi_ref: f64,
    l: f64,
    tau: usize,
    ell: f64,
) -> Result<f64> {
    check_index(trace, k)?;
    let weighted: f64 = (1..=tau)
        .map(|i| i as f64 * trace.increment(k as i64 - tau as i64 + i as i64))
        .sum();
    Ok(trace.objective[k] - phi_ref + l * ell * weighted)
}

/// `Γ_α(x_k) = Φ(x_k) − Φ* + (1/α)·min_{z∈X} D_w(z, x_k)`.
pub fn lyapunov_gamma(trace: &Trace, problem: &ProblemSpec, k: usize, alpha: f64) -> Result<f64> {
    check_index(trace, k)?;
    let phi_star = problem.optimal_value.ok_or(Error::UnknownSolutionSet)?;
    let dist = problem.bregman_to_solutions(&trace.iterates[k])?;
    Ok(trace.objective[k] - phi_star + dist / alpha)
}

/// `T_k(x) ≤ D_w(x, x₀)/(αk)` for `1 ≤ k ≤ K`, and `T_k` nonincreasing.
pub fn certify_sublinear(trace: &Trace, problem: &ProblemSpec, x_ref: &Point) -> Result<Certificate> {
    let mut b = Builder::new(CertificateKind::Sublinear, trace, None);
    let phi_ref = problem.objective(x_ref)?;
    let d0 = problem.kernel.bregman(x_ref, &trace.iterates[0])?;
    let t: Vec<f64> = (0..=trace.len())
        .map(|k| lyapunov_t_with(trace, k, phi_ref, trace.smoothness, trace.tau, trace.ell))
        .collect::<Result<_>>()?;
    for (k, &tk) in t.iter().enumerate().skip(1) {
        b.cert.per_k.push(CertificateEntry { k, observed: tk, bound: d0 / (trace.alpha * k as f64) });
    }
    let bound_violations: Vec<f64> =
        b.cert.per_k.iter().map(|e| relative_violation(e.observed, e.bound)).collect();
    b.check("lyapunov_bound", bound_violations, CERTIFICATE_TOL);
    let monotone = t.windows(2).map(|w| relative_violation(w[1], w[0]));
    b.check("lyapunov_nonincreasing", monotone, MONOTONE_TOL);
    Ok(b.finish(trace, problem))
}

/// `Γ_α(x_k) ≤ r^k Γ_α(x₀)`, `Φ(x_k) − Φ* ≤ r^k Γ_α(x₀)` and
/// `min D_w(z, x_k) ≤ α Γ_α(x₀) r^{k+1}` with `r = 1/(1+αμ)`.
pub fn certify_linear(trace: &Trace, problem: &ProblemSpec) -> Result<Certificate> {
    let mu = problem.growth.ok_or(Error::MissingGrowth)?.mu;
    certify_linear_with(trace, problem, mu)
}

pub fn certify_linear_with(trace: &Trace, problem: &ProblemSpec, mu: f64) -> Result<Certificate> {
    let alpha = trace.alpha;
    let phi_star = problem.optimal_value.ok_or(Error::UnknownSolutionSet)?;
    let mut b = Builder::new(CertificateKind::LinearGamma, trace, Some(mu));
    let r = rate_linear(alpha, mu);
    let gamma0 = lyapunov_gamma(trace, problem, 0, alpha)?;
    let (mut gamma_v, mut value_v, mut dist_v) = (Vec::new(), Vec::new(), Vec::new());
    let mut rk = 1.0;
    for k in 0..=trace.len() {
        let dist = problem.bregman_to_solutions(&trace.iterates[k])?;
        let gap = trace.objective[k] - phi_star;
        let gamma = gap + dist / alpha;
        let bound = rk * gamma0;
        b.cert.per_k.push(CertificateEntry { k, observed: gamma, bound });
        gamma_v.push(relative_violation(gamma, bound));
        value_v.push(relative_violation(gap, bound));
        dist_v.push(relative_violation(dist, alpha * bound * r));
        rk *= r;
    }
    b.check("gamma_bound", gamma_v, CERTIFICATE_TOL);
    b.check("function_value_bound", value_v, CERTIFICATE_TOL);
    b.check("distance_bound", dist_v, CERTIFICATE_TOL);
    Ok(b.finish(trace, problem))
}

/// `d²(x_k, X) ≤ r^{k/η} d²(x₀, X)` for the euclidean kernel.
pub fn certify_holder(trace: &Trace, problem: &ProblemSpec) -> Result<Certificate> {
    let g = problem.growth.ok_or(Error::MissingGrowth)?;
    if !problem.kernel.is_euclidean() {
        return Err(Error::InvalidArgument("the distance certificate needs the euclidean kernel".into()));
    }
    let alpha = trace.alpha;
    let d0 = problem.distance_to_solutions(&trace.iterates[0])?;
    if d0 > 1.0 {
        return Err(Error::InitialDistanceTooLarge(d0));
    }
    let eta = holder_eta(alpha, g.mu, g.theta);
    let r = rate_linear(alpha, g.mu);
    let mut b = Builder::new(CertificateKind::HolderDistance, trace, Some(g.mu));
    b.cert.notes.push(format!("theta = {}, eta = {eta}", g.theta));
    let mut violations = Vec::new();
    for (k, x) in trace.iterates.iter().enumerate() {
        let d2 = problem.distance_to_solutions(x)?.powi(2);
        let bound = r.powf(k as f64 / eta) * d0 * d0;
        b.cert.per_k.push(CertificateEntry { k, observed: d2, bound });
        violations.push(relative_violation(d2, bound));
    }
    b.check("distance_bound", violations, CERTIFICATE_TOL);
    Ok(b.finish(trace, problem))
}

/// Descent lemma with delayed terms, at `x = x_k` and at every stored
/// solution:
/// `Φ(x_{k+1}) ≤ Φ(x) + (1/α)[D(x,x_k) − D(x,x_{k+1}) − D(x_{k+1},x_k)] + Δ_k`,
/// `Δ_k = L·ℓ(τ+1)·Σ_{j=k−τ}^{k} D(x_{j+1}, x_j)`.
pub fn certify_descent(trace: &Trace, problem: &ProblemSpec) -> Result<Certificate> {
    let mut b = Builder::new(CertificateKind::Descent, trace, None);
    let alpha = trace.alpha;
    let kernel = &problem.kernel;
    let refs: Vec<(Point, f64)> = match problem.solutions.as_ref() {
        Some(xs) => xs
            .iter()
            .map(|z| Ok((z.clone(), problem.objective(z)?)))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let (mut at_iterate, mut at_solution) = (Vec::new(), Vec::new());
    for k in 0..trace.len() {
        let (xk, xk1) = (&trace.iterates[k], &trace.iterates[k + 1]);
        let window: f64 = (k as i64 - trace.tau as i64..=k as i64)
            .map(|j| trace.increment(j + 1))
            .sum();
        let delta = trace.smoothness * trace.ell * window;
        let step = trace.bregman_steps[k];
        let lhs = trace.objective[k + 1];
        let rhs_iterate = trace.objective[k] - (kernel.bregman(xk, xk1)? + step) / alpha + delta;
        b.cert.per_k.push(CertificateEntry { k, observed: lhs, bound: rhs_iterate });
        at_iterate.push(relative_violation(lhs, rhs_iterate));
        for (z, phi_z) in &refs {
            let rhs = phi_z + (kernel.bregman(z, xk)? - kernel.bregman(z, xk1)? - step) / alpha + delta;
            at_solution.push(relative_violation(lhs, rhs));
        }
    }
    b.check("descent_at_iterate", at_iterate, DESCENT_TOL);
    if !refs.is_empty() {
        b.check("descent_at_solution", at_solution, DESCENT_TOL);
    }
    Ok(b.finish(trace, problem))
}

/// Least-squares slope of `log v_k` against `k` over the positive prefix.
pub fn log_rate_slope(values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .take_while(|&&v| v > f64::MIN_POSITIVE)
        .enumerate()
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn growth_estimate<S, F>(problem: &ProblemSpec, sampler: &mut S, n: usize, denom: F) -> Result<f64>
where
    S: PointSampler + ?Sized,
    F: Fn(&Point) -> Result<f64>,
{
    let phi_star = problem.optimal_value.ok_or(Error::UnknownSolutionSet)?;
    problem.known_solutions()?;
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let y = sampler.sample();
        problem.kernel.check_domain(&y)?;
        let phi = problem.objective(&y)?;
        if !phi.is_finite() {
            continue;
        }
        let d = denom(&y)?;
        if d < 1e-14 {
            continue;
        }
        best = best.min((phi - phi_star) / d);
    }
    if best.is_finite() {
        Ok(GROWTH_SAFETY * best)
    } else {
        Err(Error::DegenerateSample)
    }
}

/// `0.9 · min (Φ(y) − Φ*) / min_{z∈X} D_w(z, y)` over samples.
pub fn bdg_estimate<S: PointSampler + ?Sized>(
    problem: &ProblemSpec,
    sampler: &mut S,
    n: usize,
) -> Result<f64> {
    growth_estimate(problem, sampler, n, |y| problem.bregman_to_solutions(y))
}

/// `0.9 · min (Φ(y) − Φ*) / (½d²(y, X))` over samples.
pub fn quadratic_growth_estimate<S: PointSampler + ?Sized>(
    problem: &ProblemSpec,
    sampler: &mut S,
    n: usize,
) -> Result<f64> {
    growth_estimate(problem, sampler, n, |y| Ok(0.5 * problem.distance_to_solutions(y)?.powi(2)))
}

/// Sufficient conditions for Bregman distance growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SufficientCondition {
    /// Quadratic growth plus a Lipschitz kernel gradient: checks
    /// `Φ(y) − Φ* ≥ (ν/L_w)·min D_w(z, y)`.
    C1,
    /// `F(y) ≥ F(x) + ⟨∇F(x), y−x⟩ + μ·D_w(x, y)`.
    C2 { mu: f64 },
    /// `F(y) ≥ F(x) + ⟨∇F(x), y−x⟩ + μ·D_w(y, x)`.
    RelativeStrongConvexity { mu: f64 },
}

/// Minimum slack of the condition's defining inequality over `n` samples.
pub fn sufficient_condition_check<S: PointSampler + ?Sized>(
    problem: &ProblemSpec,
    mode: SufficientCondition,
    sampler: &mut S,
    n: usize,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    match mode {
        SufficientCondition::C1 => {
            let growth = problem.growth.ok_or(Error::MissingGrowth)?;
            if growth.mode != GrowthMode::Quadratic {
                return Err(Error::InvalidArgument("C1 needs a quadratic growth record".into()));
            }
            let moduli =
                problem.kernel.moduli().ok_or_else(|| Error::MissingModuli(problem.kernel.name()))?;
            let phi_star = problem.optimal_value.ok_or(Error::UnknownSolutionSet)?;
            let c = growth.mu / moduli.smooth;
            for _ in 0..n {
                let y = sampler.sample();
                let phi = problem.objective(&y)?;
                if phi.is_finite() {
                    worst = worst.min(phi - phi_star - c * problem.bregman_to_solutions(&y)?);
                }
            }
        }
        SufficientCondition::C2 { mu } | SufficientCondition::RelativeStrongConvexity { mu } => {
            let swap = matches!(mode, SufficientCondition::RelativeStrongConvexity { .. });
            for _ in 0..n {
                let x = sampler.sample();
                let y = sampler.sample();
                let d = if swap {
                    problem.kernel.bregman(&y, &x)?
                } else {
                    problem.kernel.bregman(&x, &y)?
                };
                let lower = problem.smooth_value(&x)?
                    + problem.smooth_gradient(&x)?.dot(&(&y - &x))
                    + mu * d;
                worst = worst.min(problem.smooth_value(&y)? - lower);
            }
        }
    }
    if worst.is_finite() {
        Ok(worst)
    } else {
        Err(Error::DegenerateSample)
    }
}

/// Parameters of the two recursion lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionInstance {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
    pub k0: usize,
    /// `V₀`.
    pub initial: f64,
}

impl RecursionInstance {
    pub fn rho(&self) -> f64 {
        (1.0 - self.a) * self.theta + self.a
    }

    pub fn condition_value(&self) -> f64 {
        recursion_condition_value(self.a, self.c, self.k0)
    }

    fn check_condition(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a <= 1.0 && self.b >= 0.0 && self.c >= 0.0) {
            return Err(Error::InvalidInstance(format!(
                "need a in (0,1], b, c >= 0 (got a={}, b={}, c={})",
                self.a, self.b, self.c
            )));
        }
        if !(self.initial >= 0.0) {
            return Err(Error::InvalidInstance("V0 must be nonnegative".into()));
        }
        if recursion_condition(self.a, self.b, self.c, self.k0) {
            Ok(())
        } else {
            Err(Error::ConditionViolated { value: self.condition_value(), b: self.b })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub pass: bool,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed `V_k / (a^k V₀)` (or its power-`ρ` analog).
    pub worst_ratio: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random choice of `w_k ∈ [0, cap]`: the tight extreme, zero, or uniform.
fn choose_w(rng: &mut ChaCha8Rng, cap: f64) -> f64 {
    if !(cap > 0.0) {
        return 0.0;
    }
    match rng.random_range(0..3u8) {
        0 => cap,
        1 => 0.0,
        _ => rng.random_range(0.0..=cap),
    }
}

/// Simulates `V_{k+1} = aV_k − b w_k + c Σ_{j=k−k₀}^{k} w_j` with nonnegative
/// random `w_k` (including the extreme `w_k` that drives `V_{k+1}` to zero)
/// and checks `V_k ≤ a^k V₀`.
pub fn recursion_oracle_42(
    inst: &RecursionInstance,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<OracleOutcome> {
    inst.check_condition()?;
    Ok(simulate_42(inst, trials, horizon, seed))
}

fn simulate_42(inst: &RecursionInstance, trials: usize, horizon: usize, seed: u64) -> OracleOutcome {
    let RecursionInstance { a, b, c, k0, initial, .. } = *inst;
    let results: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            // Scaled U_k = V_k/a^k and W_k = w_k/a^{k+1}:
            // U_{k+1} = U_k − bW_k + c Σ_{j=k−k₀}^{k} W_j a^{j−k}.
            let mut u = initial;
            let mut ws: Vec<f64> = Vec::with_capacity(horizon);
            let mut worst: f64 = 1.0;
            for k in 0..horizon {
                let carried: f64 = (k.saturating_sub(k0)..k)
                    .map(|j| ws[j] * a.powi(j as i32 - k as i32))
                    .sum();
                let available = u + c * carried;
                let w = if b > c {
                    choose_w(&mut rng, available / (b - c))
                } else {
                    // b = c (only possible with k₀ = 0): w_k cancels out.
                    choose_w(&mut rng, 1.0 + available)
                };
                ws.push(w);
                u = (available - (b - c) * w).max(0.0);
                if initial > 0.0 {
                    worst = worst.max(u / initial);
                } else if u > 0.0 {
                    worst = f64::INFINITY;
                }
            }
            worst
        })
        .collect();
    outcome(&results, 1.0 + CERTIFICATE_TOL)
}

fn outcome(ratios: &[f64], limit: f64) -> OracleOutcome {
    let violations = ratios.iter().filter(|&&r| !(r <= limit)).count();
    OracleOutcome {
        pass: violations == 0,
        trials: ratios.len(),
        violations,
        worst_ratio: ratios.iter().copied().fold(0.0, f64::max),
    }
}

/// Solves `d·V^θ + a·V = r` for `V ≥ 0` by bisection.
fn solve_generalized(a: f64, d: f64, theta: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let mut hi = r / a;
    if d > 0.0 {
        hi = hi.min((r / d).powf(1.0 / theta));
    }
    let mut lo = 0.0;
    let g = |v: f64| d * v.powf(theta) + a * v - r;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Simulates `d V_{k+1}^θ + a V_{k+1} = aV_k − b w_k + c Σ w_j` and checks
/// `V_k^ρ ≤ a^k V₀` with `ρ = (1 − a)θ + a`.
pub fn recursion_oracle_51(
    inst: &RecursionInstance,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<OracleOutcome> {
    if (inst.a + inst.d - 1.0).abs() > 1e-12 || inst.d < 0.0 {
        return Err(Error::InvalidInstance(format!("a + d = {} must equal 1", inst.a + inst.d)));
    }
    if inst.initial > 1.0 {
        return Err(Error::InvalidInstance(format!("V0 = {} must be at most 1", inst.initial)));
    }
    if !(inst.theta > 0.0 && inst.theta <= 1.0) {
        return Err(Error::InvalidInstance(format!("theta = {} must lie in (0, 1]", inst.theta)));
    }
    inst.check_condition()?;
    let RecursionInstance { a, b, c, d, theta, k0, initial } = *inst;
    let rho = inst.rho();
    let (ln_a, ln_v0) = (a.ln(), initial.ln());
    let results: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut v = initial;
            let mut ws: Vec<f64> = Vec::with_capacity(horizon);
            let mut worst = f64::NEG_INFINITY;
            for k in 0..horizon {
                let carried: f64 = ws[k.saturating_sub(k0)..k].iter().sum();
                let available = a * v + c * carried;
                let w = if b > c {
                    choose_w(&mut rng, available / (b - c))
                } else {
                    choose_w(&mut rng, 1.0 + available)
                };
                ws.push(w);
                v = solve_generalized(a, d, theta, available - (b - c) * w);
                if v > 0.0 {
                    // ρ ln V_{k+1} − ((k+1) ln a + ln V₀), ≤ 0 when the bound holds.
                    worst = worst.max(rho * v.ln() - ((k + 1) as f64 * ln_a + ln_v0));
                }
            }
            worst
        })
        .collect();
    Ok(outcome(&results, CERTIFICATE_TOL))
}
