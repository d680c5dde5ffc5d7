//! Exact solvers for the per-iteration subproblem
//!
//! `x⁺ = argmin_u { h(u) + Σ_{i∈I} f_i(u) + ⟨s, u⟩ + (1/α)·D_w(u, x_k) }`.
//!
//! [`solve`] picks a registered solver from the kernel family, the
//! regularizer kind and the class of the kept components, and fails with
//! [`Error::UnsupportedCombination`] when none applies.

use nalgebra::DMatrix;

use crate::kernels::{KernelKind, LegendreKernel};
use crate::linalg::soft_threshold;
use crate::problems::{ComponentKind, ComponentOracle, Regularizer};
use crate::{Error, Point, Result};

#[derive(Debug, Clone)]
pub struct SubproblemInstance<'a> {
    pub kernel: &'a LegendreKernel,
    pub regularizer: Regularizer,
    pub kept: Vec<&'a ComponentOracle>,
    /// The aggregated delayed gradient `s_k`.
    pub aggregated: Point,
    pub anchor: Point,
    pub step: f64,
}

/// The registered solver families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// `prox_{αh}(x_k − αs)`.
    EuclideanProx,
    /// Coordinate-wise closed form for Burg (with optional `(γ/2)‖·‖²` and a
    /// kept `β‖·‖²`).
    BurgClosedForm,
    /// Mirror step through the radial cubic.
    QuarticRadial,
    /// Kept quadratic components on the euclidean kernel.
    EuclideanKeptQuadratic,
    /// Damped Newton for smooth kept components with `h = 0`.
    SmoothNewton,
    /// Bisection on a one-dimensional subproblem with kept components.
    OneDimensional,
    /// Coordinate bisection for separable kernel and regularizer.
    GenericSeparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeptClass {
    None,
    SquaredNorm,
    Quadratic,
    Smooth,
}

impl KeptClass {
    fn name(self) -> &'static str {
        match self {
            KeptClass::None => "none",
            KeptClass::SquaredNorm => "squared_norm",
            KeptClass::Quadratic => "quadratic",
            KeptClass::Smooth => "smooth",
        }
    }
}

impl<'a> SubproblemInstance<'a> {
    /// Kept linear components folded into `s`, the rest returned.
    fn merged(&self) -> (Point, Vec<&'a ComponentOracle>) {
        let mut s = self.aggregated.clone();
        let mut rest = Vec::new();
        for &c in &self.kept {
            match &c.kind {
                ComponentKind::Linear { q } => s += q,
                _ => rest.push(c),
            }
        }
        (s, rest)
    }

    fn kept_class(rest: &[&ComponentOracle]) -> KeptClass {
        if rest.is_empty() {
            KeptClass::None
        } else if rest.iter().all(|c| matches!(c.kind, ComponentKind::SquaredNorm { .. })) {
            KeptClass::SquaredNorm
        } else if rest.iter().all(|c| c.quadratic_form(1).is_some()) {
            KeptClass::Quadratic
        } else {
            KeptClass::Smooth
        }
    }

    fn registry_key(&self, class: KeptClass) -> String {
        format!("({}, {}, {})", self.kernel.name(), self.regularizer.kind_name(), class.name())
    }

    /// The solver [`solve`] would use.
    pub fn solver_kind(&self) -> Result<SolverKind> {
        let (_, rest) = self.merged();
        let class = Self::kept_class(&rest);
        let h = self.regularizer;
        let radius = matches!(h, Regularizer::L1 { radius: Some(_), .. });
        let kind = match (self.kernel.kind(), class) {
            (KernelKind::Euclidean, KeptClass::None) => Some(SolverKind::EuclideanProx),
            (KernelKind::Euclidean, KeptClass::SquaredNorm | KeptClass::Quadratic) if !radius => {
                Some(SolverKind::EuclideanKeptQuadratic)
            }
            (KernelKind::Burg { .. }, KeptClass::None | KeptClass::SquaredNorm) if !radius => {
                Some(SolverKind::BurgClosedForm)
            }
            (KernelKind::Quartic { .. }, KeptClass::None)
                if matches!(h, Regularizer::Zero | Regularizer::L1 { radius: None, .. }) =>
            {
                Some(SolverKind::QuarticRadial)
            }
            _ => None,
        };
        let kind = kind.or(match class {
            KeptClass::None if self.kernel.is_separable() && !radius => {
                Some(SolverKind::GenericSeparable)
            }
            KeptClass::None => None,
            _ if h.is_zero() => Some(SolverKind::SmoothNewton),
            _ if self.anchor.len() == 1 && !radius => Some(SolverKind::OneDimensional),
            _ => None,
        });
        kind.ok_or_else(|| Error::UnsupportedCombination(self.registry_key(class)))
    }

    /// `‖r‖_∞` for the smallest `r ∈ Σ_I∇f_i(u) + s + ∂h(u) + (1/α)(∇w(u) − ∇w(x_k))`.
    pub fn optimality_residual(&self, u: &Point) -> Result<f64> {
        let mut g = self.aggregated.clone();
        for c in &self.kept {
            g += c.gradient(u)?;
        }
        g += (self.kernel.gradient(u)? - self.kernel.gradient(&self.anchor)?) / self.step;
        Ok(self.regularizer.stationarity_vector(u, &g).amax())
    }

    /// `h(u) + Σ_I f_i(u) + ⟨s, u⟩ + (1/α)D_w(u, x_k)`.
    pub fn objective(&self, u: &Point) -> Result<f64> {
        let mut v = self.regularizer.value(u) + self.aggregated.dot(u);
        for c in &self.kept {
            v += c.value(u)?;
        }
        Ok(v + self.kernel.bregman(u, &self.anchor)? / self.step)
    }
}

/// The unique minimizer of the subproblem.
pub fn solve(inst: &SubproblemInstance) -> Result<Point> {
    if !(inst.step > 0.0 && inst.step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {} must be positive", inst.step)));
    }
    inst.kernel.check_domain(&inst.anchor)?;
    if inst.aggregated.len() != inst.anchor.len() {
        return Err(Error::Dimension { expected: inst.anchor.len(), got: inst.aggregated.len() });
    }
    let x = match inst.solver_kind()? {
        SolverKind::EuclideanProx => {
            let (s, _) = inst.merged();
            inst.regularizer.prox(&(&inst.anchor - s * inst.step), inst.step)
        }
        SolverKind::BurgClosedForm => burg_closed_form(inst)?,
        SolverKind::QuarticRadial => {
            let (s, _) = inst.merged();
            quartic_step(inst.kernel, &s, &inst.anchor, inst.step, inst.regularizer)?
        }
        SolverKind::EuclideanKeptQuadratic => kept_component_update(inst)?,
        SolverKind::SmoothNewton => smooth_newton(inst)?,
        SolverKind::OneDimensional => one_dimensional(inst)?,
        SolverKind::GenericSeparable => generic_separable_update(inst)?,
    };
    inst.kernel.check_domain(&x)?;
    Ok(x)
}

/// Stable positive root of `A u² + B u − x = 0` (`A ≥ 0`, `x > 0`).
fn positive_root(a: f64, b: f64, x: f64) -> Option<f64> {
    if a == 0.0 {
        return (b > 0.0).then(|| x / b);
    }
    let disc = (b * b + 4.0 * a * x).sqrt();
    Some(if b >= 0.0 { 2.0 * x / (b + disc) } else { (disc - b) / (2.0 * a) })
}

/// One Burg coordinate: minimize
/// `c·u + β_k u² + (1/α)[u/x − log(u/x) + (γ/2)(u − x)²]` over `u > 0`.
fn burg_coordinate(alpha: f64, c: f64, kept_beta: f64, gamma: f64, x: f64) -> Option<f64> {
    // Stationarity times αxu: (2αβ_k + γ)x u² + (αcx + 1 − γx²)u − x = 0.
    let a = (2.0 * alpha * kept_beta + gamma) * x;
    let b = alpha * c * x + 1.0 - gamma * x * x;
    positive_root(a, b, x)
}

/// Closed-form coordinate update of the elastic-net subproblem
/// `min_u μu + γu + βu² + (1/λ)(u/x − log(u/x)) + β(u − x)²`, `u > 0`.
pub fn elastic_net_coordinate_update(
    lambda: f64,
    mu: f64,
    gamma: f64,
    beta: f64,
    x: f64,
) -> Result<f64> {
    if beta <= f64::EPSILON {
        return Err(Error::DegenerateBeta(beta));
    }
    if !(lambda > 0.0 && x > 0.0 && mu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 0, x > 0, mu >= 0 (got {lambda}, {x}, {mu})"
        )));
    }
    // Kernel quadratic (1/λ)(γ_w/2)(u−x)² = β(u−x)² means γ_w = 2λβ.
    burg_coordinate(lambda, mu + gamma, beta, 2.0 * lambda * beta, x)
        .ok_or(Error::BracketFailure(0))
}

fn burg_closed_form(inst: &SubproblemInstance) -> Result<Point> {
    let KernelKind::Burg { gamma } = inst.kernel.kind() else {
        unreachable!("registry only routes burg kernels here");
    };
    let (s, rest) = inst.merged();
    let kept_beta: f64 = rest
        .iter()
        .map(|c| match c.kind {
            ComponentKind::SquaredNorm { weight } => weight,
            _ => 0.0,
        })
        .sum();
    let (l1, lower, upper) = match inst.regularizer {
        Regularizer::Zero => (0.0, 0.0, f64::INFINITY),
        Regularizer::L1 { weight, .. } | Regularizer::L1Positive { weight } => {
            (weight, 0.0, f64::INFINITY)
        }
        Regularizer::IndicatorBox { lower, upper } => (0.0, lower, upper),
    };
    let alpha = inst.step;
    let mut out = inst.anchor.clone();
    for j in 0..out.len() {
        let x = inst.anchor[j];
        let u = burg_coordinate(alpha, s[j] + l1, kept_beta, gamma, x)
            .ok_or(Error::BracketFailure(j))?;
        out[j] = if u < lower {
            lower
        } else if u > upper {
            upper
        } else {
            u
        };
    }
    Ok(out)
}

/// Mirror step for `w = (β/4)‖x‖⁴ + (γ/2)‖x‖²`: `∇w(x⁺) = ∇w(x_k) − αs`.
pub fn quartic_kernel_update(
    kernel: &LegendreKernel,
    s: &Point,
    anchor: &Point,
    alpha: f64,
) -> Result<Point> {
    quartic_step(kernel, s, anchor, alpha, Regularizer::Zero)
}

fn quartic_step(
    kernel: &LegendreKernel,
    s: &Point,
    anchor: &Point,
    alpha: f64,
    h: Regularizer,
) -> Result<Point> {
    let KernelKind::Quartic { beta, gamma } = kernel.kind() else {
        return Err(Error::UnsupportedCombination(format!("({}, radial step)", kernel.name())));
    };
    let mut v = kernel.gradient(anchor)? - s * alpha;
    match h {
        Regularizer::Zero => {}
        Regularizer::L1 { weight, radius: None } => v = soft_threshold(&v, alpha * weight),
        other => {
            return Err(Error::UnsupportedCombination(format!(
                "({}, {}, none)",
                kernel.name(),
                other.kind_name()
            )))
        }
    }
    let r = radial_cubic_root(beta, gamma, v.norm());
    Ok(v / (beta * r * r + gamma))
}

/// The unique real root of `βr³ + γr = t`, `t ≥ 0`.
pub fn radial_cubic_root(beta: f64, gamma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let f = |r: f64| beta * r * r * r + gamma * r - t;
    // Both bounds dominate the root: γr ≤ t and βr³ ≤ t.
    let mut r = (t / gamma).min((t / beta).cbrt());
    // Newton from above on a convex increasing function decreases monotonically.
    for _ in 0..100 {
        let step = f(r) / (3.0 * beta * r * r + gamma);
        let next = r - step;
        if !(next < r) || next <= 0.0 {
            break;
        }
        r = next;
    }
    r
}

/// Kept quadratic components on the euclidean kernel: minimize
/// `½uᵀMu + bᵀu + h(u)` with `M = P + I/α`, `b = s + q − x_k/α`.
pub fn kept_component_update(inst: &SubproblemInstance) -> Result<Point> {
    let (s, rest) = inst.merged();
    if !inst.kernel.is_euclidean() {
        return Err(Error::UnsupportedKeptComponent(format!(
            "closed linear solve needs the euclidean kernel, got {}",
            inst.kernel.name()
        )));
    }
    let d = inst.anchor.len();
    let mut m = DMatrix::identity(d, d) / inst.step;
    let mut b = s - &inst.anchor / inst.step;
    for c in &rest {
        let (p, q) = c
            .quadratic_form(d)
            .ok_or_else(|| Error::UnsupportedKeptComponent(c.name().into()))?;
        m += p;
        b += q;
    }
    match inst.regularizer {
        Regularizer::Zero => m
            .cholesky()
            .map(|ch| ch.solve(&-b))
            .ok_or_else(|| Error::SingularInput("kept system not positive definite".into())),
        Regularizer::L1 { radius: Some(_), .. } => Err(Error::UnsupportedCombination(
            "(euclidean, l1 ball, quadratic)".into(),
        )),
        h => quadratic_coordinate_descent(&m, &b, h, inst.anchor.clone()),
    }
}

/// Cyclic coordinate descent on `½uᵀMu + bᵀu + h(u)` for separable `h`.
fn quadratic_coordinate_descent(
    m: &DMatrix<f64>,
    b: &Point,
    h: Regularizer,
    mut u: Point,
) -> Result<Point> {
    let d = u.len();
    let residual = |u: &Point| h.stationarity_vector(u, &(m * u + b)).amax();
    for sweep in 0..200_000 {
        for j in 0..d {
            let mjj = m[(j, j)];
            let grad_j = m.row(j).dot(&u.transpose()) + b[j];
            let v = Point::from_element(1, u[j] - grad_j / mjj);
            u[j] = h.prox(&v, 1.0 / mjj)[0];
        }
        if sweep % 8 == 0 && residual(&u) <= 1e-13 {
            return Ok(u);
        }
    }
    let r = residual(&u);
    if r <= 1e-9 {
        Ok(u)
    } else {
        Err(Error::NonConvergence { residual: r })
    }
}

/// Damped Newton for `h = 0` and smooth kept components.
fn smooth_newton(inst: &SubproblemInstance) -> Result<Point> {
    let (s, rest) = inst.merged();
    let alpha = inst.step;
    let grad_w_anchor = inst.kernel.gradient(&inst.anchor)?;
    let gradient = |u: &Point| -> Result<Point> {
        let mut g = &s + (inst.kernel.gradient(u)? - &grad_w_anchor) / alpha;
        for c in &rest {
            g += c.gradient(u)?;
        }
        Ok(g)
    };
    let value = |u: &Point| -> f64 {
        let eval = || -> Result<f64> {
            let mut v = s.dot(u) + inst.kernel.bregman(u, &inst.anchor)? / alpha;
            for c in &rest {
                v += c.value(u)?;
            }
            Ok(v)
        };
        eval().unwrap_or(f64::INFINITY)
    };
    let mut u = inst.anchor.clone();
    let scale = 1.0 + s.amax() + grad_w_anchor.amax() / alpha;
    for _ in 0..200 {
        let g = gradient(&u)?;
        if g.amax() <= 1e-13 * scale {
            return Ok(u);
        }
        let mut hess = inst.kernel.hessian(&u)? / alpha;
        for c in &rest {
            hess += c.hessian(&u)?;
        }
        let dir = hess
            .cholesky()
            .ok_or_else(|| Error::SingularInput("subproblem Hessian".into()))?
            .solve(&g);
        let f0 = value(&u);
        let slope = g.dot(&dir);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-20 {
            let cand = &u - &dir * t;
            let fc = value(&cand);
            // Near the minimizer objective differences drown in rounding;
            // a halved gradient is accepted as progress instead.
            let gradient_drop = fc.is_finite()
                && gradient(&cand).is_ok_and(|gc| gc.amax() <= 0.5 * g.amax());
            if fc <= f0 - 1e-4 * t * slope || gradient_drop {
                u = cand;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let r = gradient(&u)?.amax();
    if r <= 1e-9 {
        Ok(u)
    } else {
        Err(Error::NonConvergence { residual: r })
    }
}

/// One-dimensional subproblem with kept components and separable `h`.
fn one_dimensional(inst: &SubproblemInstance) -> Result<Point> {
    let (s, rest) = inst.merged();
    let alpha = inst.step;
    let x = inst.anchor[0];
    let grad_w = inst.kernel.gradient(&inst.anchor)?[0];
    let kernel = inst.kernel;
    let q = |u: f64| -> f64 {
        let p = Point::from_element(1, u);
        let mut g = s[0] + (kernel.gradient_unchecked(&p)[0] - grad_w) / alpha;
        for c in &rest {
            match c.gradient(&p) {
                Ok(v) => g += v[0],
                Err(_) => return f64::NAN,
            }
        }
        g
    };
    let u = separable_minimizer(&q, domain_lower(kernel), inst.regularizer, x, 0)?;
    Ok(Point::from_element(1, u))
}

/// Coordinate-wise bisection for a separable kernel and regularizer, `I = ∅`.
pub fn generic_separable_update(inst: &SubproblemInstance) -> Result<Point> {
    let (s, rest) = inst.merged();
    if !rest.is_empty() {
        return Err(Error::UnsupportedKeptComponent(rest[0].name().into()));
    }
    if !inst.kernel.is_separable() {
        return Err(Error::UnsupportedCombination(format!(
            "({}, {}, none) is not separable",
            inst.kernel.name(),
            inst.regularizer.kind_name()
        )));
    }
    if matches!(inst.regularizer, Regularizer::L1 { radius: Some(_), .. }) {
        return Err(Error::UnsupportedCombination("l1 ball is not separable".into()));
    }
    let kernel = inst.kernel;
    let alpha = inst.step;
    let mut out = inst.anchor.clone();
    for j in 0..out.len() {
        let x = inst.anchor[j];
        let wx = coordinate_gradient(kernel, x);
        let q = |u: f64| s[j] + (coordinate_gradient(kernel, u) - wx) / alpha;
        out[j] = separable_minimizer(&q, domain_lower(kernel), inst.regularizer, x, j)?;
    }
    Ok(out)
}

fn coordinate_gradient(kernel: &LegendreKernel, u: f64) -> f64 {
    match kernel.kind() {
        KernelKind::Euclidean => u,
        KernelKind::Burg { gamma } => -1.0 / u + gamma * u,
        KernelKind::Quartic { .. } => unreachable!("quartic kernel is not separable"),
    }
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Closed(f64),
    Open(f64),
    Infinite,
}

fn domain_lower(kernel: &LegendreKernel) -> Bound {
    match kernel.kind() {
        KernelKind::Burg { .. } => Bound::Open(0.0),
        _ => Bound::Infinite,
    }
}

fn max_bound(a: Bound, b: Bound) -> Bound {
    let v = |x: Bound| match x {
        Bound::Closed(v) | Bound::Open(v) => v,
        Bound::Infinite => f64::NEG_INFINITY,
    };
    match (a, b) {
        (Bound::Infinite, o) | (o, Bound::Infinite) => o,
        _ if v(a) > v(b) => a,
        _ if v(b) > v(a) => b,
        (Bound::Open(x), _) | (_, Bound::Open(x)) => Bound::Open(x),
        _ => a,
    }
}

/// Minimizer of `∫q + h_1` where `q` is the increasing derivative of the
/// smooth part, over the interval allowed by the kernel domain and `h`.
fn separable_minimizer(
    q: &dyn Fn(f64) -> f64,
    dom: Bound,
    h: Regularizer,
    start: f64,
    coord: usize,
) -> Result<f64> {
    match h {
        Regularizer::Zero => increasing_root(q, dom, Bound::Infinite, start, coord),
        Regularizer::L1Positive { weight } => {
            let lo = max_bound(dom, Bound::Closed(0.0));
            increasing_root(&|u| q(u) + weight, lo, Bound::Infinite, start, coord)
        }
        Regularizer::IndicatorBox { lower, upper } => {
            let lo = max_bound(dom, Bound::Closed(lower));
            increasing_root(q, lo, Bound::Closed(upper), start, coord)
        }
        Regularizer::L1 { weight, .. } => {
            if let Bound::Open(v) | Bound::Closed(v) = dom {
                if v >= 0.0 {
                    return increasing_root(&|u| q(u) + weight, dom, Bound::Infinite, start, coord);
                }
            }
            let q0 = q(0.0);
            if q0 + weight < 0.0 {
                increasing_root(&|u| q(u) + weight, Bound::Closed(0.0), Bound::Infinite, start, coord)
            } else if q0 - weight > 0.0 {
                increasing_root(&|u| q(u) - weight, dom, Bound::Closed(0.0), start, coord)
            } else {
                Ok(0.0)
            }
        }
    }
}

/// Zero of an increasing `f` on `[lo, hi]`, clamped to the closed ends.
fn increasing_root(
    f: &dyn Fn(f64) -> f64,
    lo: Bound,
    hi: Bound,
    start: f64,
    coord: usize,
) -> Result<f64> {
    if let Bound::Closed(l) = lo {
        if f(l) >= 0.0 {
            return Ok(l);
        }
    }
    if let Bound::Closed(u) = hi {
        if f(u) <= 0.0 {
            return Ok(u);
        }
    }
    let lo_v = match lo {
        Bound::Closed(v) | Bound::Open(v) => v,
        Bound::Infinite => f64::NEG_INFINITY,
    };
    let hi_v = match hi {
        Bound::Closed(v) | Bound::Open(v) => v,
        Bound::Infinite => f64::INFINITY,
    };
    let mut t = start;
    if !(t > lo_v && t < hi_v) {
        t = match (lo_v.is_finite(), hi_v.is_finite()) {
            (true, true) => 0.5 * (lo_v + hi_v),
            (true, false) => lo_v + 1.0_f64.max(lo_v.abs()),
            (false, true) => hi_v - 1.0_f64.max(hi_v.abs()),
            (false, false) => 0.0,
        };
    }
    let ft = f(t);
    if ft == 0.0 {
        return Ok(t);
    }
    let (mut a, mut b);
    if ft < 0.0 {
        a = t;
        b = f64::NAN;
        if hi_v.is_finite() {
            b = hi_v;
        } else {
            let mut delta = 1.0_f64.max(t.abs());
            for _ in 0..2000 {
                let c = t + delta;
                if f(c) > 0.0 {
                    b = c;
                    break;
                }
                a = c;
                delta *= 2.0;
                if !c.is_finite() {
                    break;
                }
            }
        }
    } else {
        b = t;
        a = f64::NAN;
        if let Bound::Closed(l) = lo {
            a = l;
        } else if lo_v.is_finite() {
            let mut gap = t - lo_v;
            for _ in 0..2000 {
                gap *= 0.5;
                let c = lo_v + gap;
                if c <= lo_v {
                    break;
                }
                let fc = f(c);
                if fc < 0.0 {
                    a = c;
                    break;
                }
                b = c;
            }
        } else {
            let mut delta = 1.0_f64.max(t.abs());
            for _ in 0..2000 {
                let c = t - delta;
                if f(c) < 0.0 {
                    a = c;
                    break;
                }
                b = c;
                delta *= 2.0;
                if !c.is_finite() {
                    break;
                }
            }
        }
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::BracketFailure(coord));
    }
    for _ in 0..2200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::BracketFailure(coord));
        }
        if fm < 0.0 {
            a = mid;
        } else if fm > 0.0 {
            b = mid;
        } else {
            return Ok(mid);
        }
    }
    // Pick the endpoint with the smaller |f|.
    Ok(if f(a).abs() <= f(b).abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ComponentOracle;
    use approx::assert_abs_diff_eq;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn instance<'a>(
        kernel: &'a LegendreKernel,
        h: Regularizer,
        kept: Vec<&'a ComponentOracle>,
        s: Point,
        x: Point,
        step: f64,
    ) -> SubproblemInstance<'a> {
        SubproblemInstance { kernel, regularizer: h, kept, aggregated: s, anchor: x, step }
    }

    #[test]
    fn euclidean_examples() {
        let k = LegendreKernel::euclidean(2);
        let i = instance(&k, Regularizer::Zero, vec![], p(&[1.0, -2.0]), p(&[3.0, 0.5]), 0.5);
        assert_eq!(solve(&i).unwrap(), p(&[2.5, 1.5]));
        let h = Regularizer::L1 { weight: 0.4, radius: None };
        let i = instance(&k, h, vec![], p(&[1.0, -2.0]), p(&[3.0, 0.5]), 0.5);
        assert_eq!(solve(&i).unwrap(), soft_threshold(&p(&[2.5, 1.5]), 0.2));
    }

    #[test]
    fn elastic_net_examples() {
        let u = elastic_net_coordinate_update(1.0, 0.1, 0.2, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(u, 0.636073, epsilon = 1e-6);
        // Fixed point: choose γ so that stationarity holds at u = x.
        let (lambda, mu, beta, x) = (0.3, 0.2, 0.7, 2.5);
        let gamma = -mu - 2.0 * beta * x;
        let u = elastic_net_coordinate_update(lambda, mu, gamma, beta, x).unwrap();
        assert_abs_diff_eq!(u, x, epsilon = 1e-10);
        assert!(matches!(
            elastic_net_coordinate_update(1.0, 0.1, 0.2, 0.0, 1.0),
            Err(Error::DegenerateBeta(_))
        ));
    }

    #[test]
    fn elastic_net_matches_generic_solver() {
        // Kernel burg + (β/L)‖·‖² at α = 1/L gives the (u−x)² weight β.
        let (l, beta) = (4.0, 0.6);
        let alpha = 1.0 / l;
        let k = LegendreKernel::burg_with_quadratic(2, 2.0 * beta / l).unwrap();
        let kept = ComponentOracle::new(ComponentKind::SquaredNorm { weight: beta }, l);
        let h = Regularizer::L1Positive { weight: 0.3 };
        let s = p(&[0.4, -0.9]);
        let x = p(&[1.2, 0.7]);
        let i = instance(&k, h, vec![&kept], s.clone(), x.clone(), alpha);
        let u = solve(&i).unwrap();
        for j in 0..2 {
            let e = elastic_net_coordinate_update(alpha, 0.3, s[j], beta, x[j]).unwrap();
            assert_abs_diff_eq!(u[j], e, epsilon = 1e-10);
        }
        assert!(i.optimality_residual(&u).unwrap() <= 1e-8);
    }

    #[test]
    fn burg_closed_form_matches_bisection() {
        let k = LegendreKernel::burg(3);
        let h = Regularizer::L1Positive { weight: 0.2 };
        let i = instance(&k, h, vec![], p(&[0.5, -0.3, 1.0]), p(&[1.0, 2.0, 0.5]), 0.7);
        let closed = solve(&i).unwrap();
        let generic = generic_separable_update(&i).unwrap();
        assert!((&closed - &generic).amax() <= 1e-8);
        // β = 0 NoLips form x/(1 + αx(μ+γ)).
        for j in 0..3 {
            let x = i.anchor[j];
            assert_abs_diff_eq!(closed[j], x / (1.0 + 0.7 * x * (0.2 + i.aggregated[j])), epsilon = 1e-14);
        }
    }

    #[test]
    fn burg_unbounded_subproblem_fails() {
        // s + μ ≤ −1/(αx) makes the 1-D objective decrease forever.
        let k = LegendreKernel::burg(1);
        let i = instance(&k, Regularizer::Zero, vec![], p(&[-2.0]), p(&[1.0]), 1.0);
        assert!(matches!(solve(&i), Err(Error::BracketFailure(0))));
    }

    #[test]
    fn quartic_examples() {
        let k = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        let x = p(&[0.3, -0.4]);
        assert!((quartic_kernel_update(&k, &Point::zeros(2), &x, 0.5).unwrap() - &x).amax() < 1e-15);
        // v = ∇w(0) − αs = (2, 0).
        let u = quartic_kernel_update(&k, &p(&[-2.0, 0.0]), &Point::zeros(2), 1.0).unwrap();
        assert!((u - p(&[1.0, 0.0])).amax() <= 1e-15);
        for t in [1e-9, 0.1, 3.0, 1e6] {
            let r = radial_cubic_root(1.0, 1.0, t);
            assert!((r * r * r + r - t).abs() <= 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn kept_component_examples() {
        let k = LegendreKernel::euclidean(1);
        let half = ComponentOracle::new(ComponentKind::SquaredNorm { weight: 0.5 }, 1.0);
        let i = instance(&k, Regularizer::Zero, vec![&half], p(&[0.0]), p(&[2.0]), 1.0);
        assert_abs_diff_eq!(solve(&i).unwrap()[0], 1.0, epsilon = 1e-15);
        // A kept linear term merges into s.
        let lin = ComponentOracle::new(ComponentKind::Linear { q: p(&[0.5]) }, 0.0);
        let a = instance(&k, Regularizer::Zero, vec![&lin], p(&[1.0]), p(&[2.0]), 0.5);
        let b = instance(&k, Regularizer::Zero, vec![], p(&[1.5]), p(&[2.0]), 0.5);
        assert_eq!(solve(&a).unwrap(), solve(&b).unwrap());
        // Box-constrained 1-D quadratic against a grid.
        let h = Regularizer::IndicatorBox { lower: -0.5, upper: 0.8 };
        let i = instance(&k, h, vec![&half], p(&[-3.0]), p(&[0.2]), 0.9);
        let u = solve(&i).unwrap()[0];
        let grid = (0..=130_000)
            .map(|n| -0.5 + n as f64 * 1e-5)
            .min_by(|a, b| {
                let f = |u: f64| i.objective(&Point::from_element(1, u)).unwrap();
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((u - grid).abs() <= 1e-5 + 1e-8);
        assert_eq!(u, 0.8);
    }

    #[test]
    fn smooth_newton_on_quartic_kept() {
        let k = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        let comp = ComponentOracle::new(
            ComponentKind::QuarticNorm { e: DMatrix::identity(2, 2) },
            3.0,
        );
        let i = instance(&k, Regularizer::Zero, vec![&comp], p(&[0.2, -0.1]), p(&[1.0, 0.5]), 0.25);
        let u = solve(&i).unwrap();
        assert!(i.optimality_residual(&u).unwrap() <= 1e-10);
    }

    #[test]
    fn one_dimensional_with_kept_poisson() {
        let k = LegendreKernel::burg(1);
        let comp = ComponentOracle::new(ComponentKind::Poisson { row: p(&[1.0]), count: 2.0 }, 2.0);
        let h = Regularizer::L1Positive { weight: 0.1 };
        let i = instance(&k, h, vec![&comp], p(&[0.3]), p(&[1.5]), 0.5);
        let u = solve(&i).unwrap();
        assert!(i.optimality_residual(&u).unwrap() <= 1e-9);
    }

    #[test]
    fn generic_matches_soft_threshold() {
        let k = LegendreKernel::euclidean(3);
        let h = Regularizer::L1 { weight: 0.5, radius: None };
        let i = instance(&k, h, vec![], p(&[1.0, -0.1, 0.0]), p(&[0.2, 0.3, -2.0]), 0.8);
        let closed = solve(&i).unwrap();
        let generic = generic_separable_update(&i).unwrap();
        assert!((closed - generic).amax() <= 1e-10);
        let i = instance(&k, Regularizer::Zero, vec![], p(&[1.0, -0.1, 0.0]), p(&[0.2, 0.3, -2.0]), 0.8);
        let g = generic_separable_update(&i).unwrap();
        assert!((g - p(&[-0.6, 0.38, -2.0])).amax() <= 1e-12);
    }

    #[test]
    fn unsupported_combinations_fail_loudly() {
        let k = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        let h = Regularizer::IndicatorBox { lower: 0.0, upper: 1.0 };
        let i = instance(&k, h, vec![], p(&[0.0, 0.0]), p(&[0.5, 0.5]), 1.0);
        assert!(matches!(solve(&i), Err(Error::UnsupportedCombination(_))));
    }
}
