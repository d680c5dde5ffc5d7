//! The iteration engine.
//!
//! Each iteration picks `(I_k, J_k)`, refreshes the stored gradients of `J_k`
//! at their delayed iterates, and solves
//! `x_{k+1} = argmin { h + Σ_{I_k} f_i + ⟨Σ_{J_k} g_j, ·⟩ + (1/α)D_w(·, x_k) }`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::{DelaySchedule, GradientTable, IterateHistory, SelectionPolicy};
use crate::kernels::KernelKind;
use crate::problems::{ProblemSpec, Regularizer};
use crate::stepsizes::StepPolicy;
use crate::subproblems::{self, SubproblemInstance};
use crate::{Error, Point, Result};

pub const DEFAULT_GUARD_FACTOR: f64 = 1e3;

/// What to do when the objective blows past the divergence guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardPolicy {
    Error,
    /// Stop and mark the trace.
    Record,
}

/// The named schemes recovered by particular configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Pg,
    Nolips,
    Iag,
    Iap,
    Piag,
    NePiag,
    NeIap,
}

impl MethodTag {
    pub const ALL: [MethodTag; 7] = [
        MethodTag::Pg,
        MethodTag::Nolips,
        MethodTag::Iag,
        MethodTag::Iap,
        MethodTag::Piag,
        MethodTag::NePiag,
        MethodTag::NeIap,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Pg => "pg",
            MethodTag::Nolips => "nolips",
            MethodTag::Iag => "iag",
            MethodTag::Iap => "iap",
            MethodTag::Piag => "piag",
            MethodTag::NePiag => "ne_piag",
            MethodTag::NeIap => "ne_iap",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub problem: ProblemSpec,
    pub selection: SelectionPolicy,
    pub delays: DelaySchedule,
    pub step: StepPolicy,
    pub iterations: usize,
    pub x0: Point,
    pub guard_factor: f64,
    pub guard_policy: GuardPolicy,
}

impl SolverConfig {
    /// Full aggregation, zero delays, sublinear step, default initial point.
    pub fn new(problem: ProblemSpec, iterations: usize) -> Self {
        let x0 = default_x0(&problem);
        Self {
            problem,
            selection: SelectionPolicy::FullAggregate,
            delays: DelaySchedule::zero(),
            step: StepPolicy::Sublinear,
            iterations,
            x0,
            guard_factor: DEFAULT_GUARD_FACTOR,
            guard_policy: GuardPolicy::Error,
        }
    }

    pub fn tau(&self) -> usize {
        self.delays.bound
    }

    /// `L = max_k Σ_{j∈J_k} L_j`.
    pub fn smoothness(&self) -> f64 {
        self.selection.worst_case_smoothness(&self.problem)
    }

    /// `ℓ(τ+1)`.
    pub fn ell(&self) -> Result<f64> {
        self.problem.kernel.ell(self.tau() + 1)
    }

    pub fn alpha(&self) -> Result<f64> {
        let mu = self.problem.growth.map(|g| g.mu);
        self.step.resolve(self.smoothness(), mu, self.tau(), self.ell()?)
    }

    /// Check the configuration invariants and return `α`.
    pub fn validate(&self) -> Result<f64> {
        let n = self.problem.len();
        self.selection.validate(n)?;
        self.delays.validate()?;
        if self.x0.len() != self.problem.dim() {
            return Err(Error::Dimension { expected: self.problem.dim(), got: self.x0.len() });
        }
        self.problem.kernel.check_domain(&self.x0)?;
        if self.problem.regularizer.value(&self.x0).is_infinite() {
            return Err(Error::InvalidArgument("x0 is outside dom h".into()));
        }
        if !(self.guard_factor > 0.0) {
            return Err(Error::InvalidArgument("guard factor must be positive".into()));
        }
        let alpha = self.alpha()?;
        if self.selection != SelectionPolicy::FullAggregate {
            let l = self.smoothness();
            let amplification =
                if self.tau() == 0 { 1.0 } else { self.problem.kernel.ell(2)? };
            if l > 0.0 {
                let bound = 1.0 / (amplification * l);
                if alpha > bound * (1.0 + 1e-12) {
                    return Err(Error::StepTooLarge { alpha, bound });
                }
            }
        }
        Ok(alpha)
    }
}

/// `x₀ = 1` on the Burg domain, `0` elsewhere.
pub fn default_x0(problem: &ProblemSpec) -> Point {
    match problem.kernel.kind() {
        KernelKind::Burg { .. } => Point::from_element(problem.dim(), 1.0),
        _ => Point::zeros(problem.dim()),
    }
}

/// Configuration of a named scheme on `problem` with delay bound `τ`
/// (worst-case constant delays).
pub fn named_method(
    tag: MethodTag,
    problem: ProblemSpec,
    tau: usize,
    iterations: usize,
) -> Result<SolverConfig> {
    let incompatible = |reason: &str| {
        Err(Error::IncompatibleTag { tag: tag.to_string(), reason: reason.into() })
    };
    let euclidean = problem.kernel.is_euclidean();
    let h = problem.regularizer;
    let (selection, tau) = match tag {
        MethodTag::Pg | MethodTag::Nolips => (SelectionPolicy::FullAggregate, 0),
        MethodTag::Iag | MethodTag::Piag | MethodTag::NePiag => {
            (SelectionPolicy::FullAggregate, tau)
        }
        MethodTag::Iap | MethodTag::NeIap => (SelectionPolicy::IapCyclic, tau),
    };
    match tag {
        MethodTag::Pg | MethodTag::Iag | MethodTag::Iap | MethodTag::Piag if !euclidean => {
            return incompatible("needs the euclidean kernel");
        }
        MethodTag::NePiag | MethodTag::NeIap if euclidean => {
            return incompatible("needs a non-euclidean kernel");
        }
        MethodTag::Iag | MethodTag::NeIap if !h.is_zero() => {
            return incompatible("needs h = 0");
        }
        MethodTag::Iap if !matches!(h, Regularizer::Zero | Regularizer::IndicatorBox { .. }) => {
            return incompatible("needs h = 0 or a box indicator");
        }
        MethodTag::Iap | MethodTag::NeIap if problem.len() < 2 => {
            return incompatible("needs at least two components");
        }
        _ => {}
    }
    let mut cfg = SolverConfig::new(problem, iterations);
    cfg.selection = selection;
    cfg.delays = if tau == 0 { DelaySchedule::zero() } else { DelaySchedule::constant(tau) };
    Ok(cfg)
}

/// Everything recorded along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `x_0, …, x_K`.
    pub iterates: Vec<Point>,
    /// `Φ(x_0), …, Φ(x_K)`.
    pub objective: Vec<f64>,
    /// `D_w(x_{k+1}, x_k)` for `k = 0..K`.
    pub bregman_steps: Vec<f64>,
    /// `τ_k^n` for every component, per iteration.
    pub delays: Vec<Vec<usize>>,
    /// `max_{j∈J_k} (k − e_j)`, per iteration.
    pub staleness: Vec<usize>,
    /// `I_k`, per iteration.
    pub kept: Vec<Vec<usize>>,
    pub alpha: f64,
    pub smoothness: f64,
    /// `ℓ(τ+1)`.
    pub ell: f64,
    pub tau: usize,
    /// Iteration at which the divergence guard fired.
    pub guard_tripped: Option<usize>,
    /// Iterates that left the kernel's declared box.
    pub box_violations: Vec<usize>,
}

impl Trace {
    /// Number of completed iterations.
    pub fn len(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("trace holds x0")
    }

    /// `D_w(x_k, x_{k−1})` (zero for `k ≤ 0`).
    pub fn increment(&self, k: i64) -> f64 {
        if k <= 0 {
            0.0
        } else {
            self.bregman_steps.get(k as usize - 1).copied().unwrap_or(0.0)
        }
    }
}

pub fn run(config: &SolverConfig) -> Result<Trace> {
    let alpha = config.validate()?;
    let problem = &config.problem;
    let n = problem.len();
    let tau = config.tau();
    let phi0 = problem.objective(&config.x0)?;
    let guard_level = phi0 + config.guard_factor * phi0.abs().max(1.0);

    let mut history = IterateHistory::new(config.x0.clone(), tau);
    let mut table = GradientTable::new(n);
    let mut trace = Trace {
        iterates: vec![config.x0.clone()],
        objective: vec![phi0],
        bregman_steps: Vec::with_capacity(config.iterations),
        delays: Vec::with_capacity(config.iterations),
        staleness: Vec::with_capacity(config.iterations),
        kept: Vec::with_capacity(config.iterations),
        alpha,
        smoothness: config.smoothness(),
        ell: config.ell()?,
        tau,
        guard_tripped: None,
        box_violations: Vec::new(),
    };
    if !problem.kernel.in_box(&config.x0) {
        trace.box_violations.push(0);
    }

    for k in 0..config.iterations {
        let part = config.selection.partition(k, n);
        let delays = config.delays.delays_at(k, n);
        table.refresh(problem, &history, k, &delays, &part.linearized)?;
        let s = table.aggregate(&part.linearized)?;
        let inst = SubproblemInstance {
            kernel: &problem.kernel,
            regularizer: problem.regularizer,
            kept: part.kept.iter().map(|&i| &problem.components[i]).collect(),
            aggregated: s,
            anchor: history.latest().clone(),
            step: alpha,
        };
        let next = subproblems::solve(&inst)?;
        let step = problem.kernel.bregman(&next, history.latest())?;
        let phi = problem.objective(&next)?;

        trace.staleness.push(table.staleness(k, &part.linearized));
        trace.delays.push(delays);
        trace.kept.push(part.kept);
        trace.bregman_steps.push(step);
        trace.objective.push(phi);
        if !problem.kernel.in_box(&next) {
            trace.box_violations.push(k + 1);
        }
        trace.iterates.push(next.clone());
        history.push(next);

        if !(phi <= guard_level) {
            match config.guard_policy {
                GuardPolicy::Error => {
                    return Err(Error::DivergenceGuard { iteration: k + 1, value: phi })
                }
                GuardPolicy::Record => {
                    trace.guard_tripped = Some(k + 1);
                    break;
                }
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::soft_threshold;
    use crate::problems::{self, ComponentKind, ComponentOracle};
    use crate::kernels::LegendreKernel;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn quadratic_problem(weights: &[f64], targets: &[f64]) -> ProblemSpec {
        // f_i(x) = (w_i/2)(x − t_i)², written as a least-squares row.
        let components = weights
            .iter()
            .zip(targets)
            .map(|(&w, &t)| {
                let r = w.sqrt();
                ComponentOracle::new(
                    ComponentKind::LeastSquaresRow { row: p(&[r]), target: r * t },
                    w,
                )
            })
            .collect();
        ProblemSpec {
            name: "quadratics".into(),
            components,
            regularizer: Regularizer::Zero,
            kernel: LegendreKernel::euclidean(1),
            solutions: None,
            optimal_value: None,
            growth: None,
        }
    }

    #[test]
    fn pg_one_step_on_lasso() {
        let spec = problems::make_lasso(&DMatrix::from_element(1, 1, 1.0), &p(&[2.0]), 1.0, 3.0)
            .unwrap();
        let mut cfg = named_method(MethodTag::Pg, spec, 5, 1).unwrap();
        cfg.step = StepPolicy::Manual { alpha: 1.0 };
        let t = run(&cfg).unwrap();
        assert_eq!(t.iterates[1], soft_threshold(&p(&[2.0]), 1.0));
        assert_eq!(t.iterates[1], p(&[1.0]));
    }

    #[test]
    fn gradient_step_exact_on_half_square() {
        let spec = quadratic_problem(&[1.0], &[0.0]);
        let mut cfg = SolverConfig::new(spec, 1);
        cfg.x0 = p(&[1.0]);
        cfg.step = StepPolicy::Manual { alpha: 1.0 };
        assert_eq!(run(&cfg).unwrap().iterates[1], p(&[0.0]));
    }

    #[test]
    fn iap_matches_hand_simulation() {
        let spec = quadratic_problem(&[1.0, 2.0], &[1.0, -1.0]);
        let alpha = 0.2;
        let mut cfg = named_method(MethodTag::Iap, spec, 0, 3).unwrap();
        cfg.step = StepPolicy::Manual { alpha };
        cfg.x0 = p(&[0.5]);
        let t = run(&cfg).unwrap();
        // x⁺ = argmin f_i(u) + ∇f_j(x)·u + (u − x)²/(2α).
        let (w, tg) = ([1.0, 2.0], [1.0, -1.0]);
        let mut x = 0.5;
        for k in 0..3 {
            let i = k % 2;
            let j = 1 - i;
            let s = w[j] * (x - tg[j]);
            x = (w[i] * tg[i] - s + x / alpha) / (w[i] + 1.0 / alpha);
            assert_abs_diff_eq!(t.iterates[k + 1][0], x, epsilon = 1e-14);
        }
    }

    #[test]
    fn named_method_rules() {
        let lasso = problems::desk_lasso().unwrap();
        let cfg = named_method(MethodTag::Pg, lasso.clone(), 4, 10).unwrap();
        assert_eq!(cfg.tau(), 0);
        assert_eq!(cfg.selection, SelectionPolicy::FullAggregate);
        assert!(matches!(
            named_method(MethodTag::Iag, lasso.clone(), 2, 10),
            Err(Error::IncompatibleTag { .. })
        ));
        assert!(named_method(MethodTag::NePiag, lasso, 2, 10).is_err());
        let poisson = problems::desk_poisson(0.0, 0.1).unwrap();
        let cfg = named_method(MethodTag::Nolips, poisson, 3, 10).unwrap();
        assert_eq!(cfg.tau(), 0);
        assert_eq!(cfg.x0, Point::from_element(3, 1.0));
        let quartic = problems::desk_quartic().unwrap();
        let cfg = named_method(MethodTag::NeIap, quartic, 0, 10).unwrap();
        let part = cfg.selection.partition(3, cfg.problem.len());
        assert_eq!(part.kept, vec![1]);
        assert!(cfg.problem.regularizer.is_zero());
    }

    #[test]
    fn kept_step_bound_enforced() {
        let spec = quadratic_problem(&[1.0, 2.0], &[1.0, -1.0]);
        let mut cfg = named_method(MethodTag::Iap, spec, 0, 3).unwrap();
        cfg.step = StepPolicy::Manual { alpha: 0.6 };
        assert!(matches!(run(&cfg), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn guard_policies() {
        let spec = quadratic_problem(&[1.0], &[0.0]);
        let mut cfg = SolverConfig::new(spec, 100);
        cfg.x0 = p(&[1.0]);
        cfg.step = StepPolicy::Manual { alpha: 10.0 };
        assert!(matches!(run(&cfg), Err(Error::DivergenceGuard { .. })));
        cfg.guard_policy = GuardPolicy::Record;
        let t = run(&cfg).unwrap();
        assert!(t.guard_tripped.is_some());
        assert!(t.len() < 100);
    }

    #[test]
    fn staleness_never_exceeds_tau() {
        let spec = problems::desk_lasso().unwrap();
        for delays in [
            DelaySchedule::constant(3),
            DelaySchedule::cyclic(3),
            DelaySchedule::uniform_random(3, 5),
        ] {
            let mut cfg = SolverConfig::new(spec.clone(), 50);
            cfg.delays = delays;
            let t = run(&cfg).unwrap();
            assert!(t.staleness.iter().all(|&s| s <= 3));
            assert_eq!(t.iterates.len(), 51);
        }
    }
}
