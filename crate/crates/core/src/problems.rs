//! Component oracles, regularizers and the bundled problem library.
//!
//! A problem is `Φ(x) = Σ_n f_n(x) + h(x)` together with the Legendre kernel
//! `w` relative to which each `f_n` is `L_n`-smooth (`L_n·w − f_n` convex).

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::LegendreKernel;
use crate::linalg::{
    operator_norm, project_l1_ball, smallest_singular_value, soft_threshold, soft_threshold_scalar,
};
use crate::sampling::{self, PointSampler};
use crate::{Error, Point, Result};

/// The functional form of one smooth component `f_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentKind {
    /// `½(⟨a, x⟩ − b)²`
    LeastSquaresRow { row: Point, target: f64 },
    /// `⟨q, x⟩`
    Linear { q: Point },
    /// `⟨a, x⟩ − b·log⟨a, x⟩`, defined for `⟨a, x⟩ > 0`.
    Poisson { row: Point, count: f64 },
    /// `weight·‖x‖²`
    SquaredNorm { weight: f64 },
    /// `¼‖Ex‖⁴`
    QuarticNorm { e: DMatrix<f64> },
    /// `¼‖Ax − b‖₄⁴`
    QuarticResidual { a: DMatrix<f64>, b: Point },
    /// `½‖Cx − d‖²`
    QuadraticResidual { c: DMatrix<f64>, d: Point },
    /// `(α/2)·shrink_μ(⟨a, x⟩)²`
    ShrinkSquare { col: Point, alpha: f64, mu: f64 },
}

/// A component `f_n` with its relative-smoothness constant `L_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentOracle {
    pub kind: ComponentKind,
    pub smoothness: f64,
}

impl ComponentOracle {
    pub fn new(kind: ComponentKind, smoothness: f64) -> Self {
        Self { kind, smoothness }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ComponentKind::LeastSquaresRow { .. } => "least_squares_row",
            ComponentKind::Linear { .. } => "linear",
            ComponentKind::Poisson { .. } => "poisson",
            ComponentKind::SquaredNorm { .. } => "squared_norm",
            ComponentKind::QuarticNorm { .. } => "quartic_norm",
            ComponentKind::QuarticResidual { .. } => "quartic_residual",
            ComponentKind::QuadraticResidual { .. } => "quadratic_residual",
            ComponentKind::ShrinkSquare { .. } => "shrink_square",
        }
    }

    fn poisson_inner(row: &Point, x: &Point) -> Result<f64> {
        let t = row.dot(x);
        if t > 0.0 {
            Ok(t)
        } else {
            Err(Error::DomainViolation(format!("<a, x> = {t} must be positive")))
        }
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        Ok(match &self.kind {
            ComponentKind::LeastSquaresRow { row, target } => 0.5 * (row.dot(x) - target).powi(2),
            ComponentKind::Linear { q } => q.dot(x),
            ComponentKind::Poisson { row, count } => {
                let t = Self::poisson_inner(row, x)?;
                t - count * t.ln()
            }
            ComponentKind::SquaredNorm { weight } => weight * x.norm_squared(),
            ComponentKind::QuarticNorm { e } => 0.25 * (e * x).norm_squared().powi(2),
            ComponentKind::QuarticResidual { a, b } => {
                0.25 * (a * x - b).iter().map(|r| r.powi(4)).sum::<f64>()
            }
            ComponentKind::QuadraticResidual { c, d } => 0.5 * (c * x - d).norm_squared(),
            ComponentKind::ShrinkSquare { col, alpha, mu } => {
                0.5 * alpha * soft_threshold_scalar(col.dot(x), *mu).powi(2)
            }
        })
    }

    pub fn gradient(&self, x: &Point) -> Result<Point> {
        Ok(match &self.kind {
            ComponentKind::LeastSquaresRow { row, target } => row * (row.dot(x) - target),
            ComponentKind::Linear { q } => q.clone(),
            ComponentKind::Poisson { row, count } => {
                let t = Self::poisson_inner(row, x)?;
                row * (1.0 - count / t)
            }
            ComponentKind::SquaredNorm { weight } => x * (2.0 * weight),
            ComponentKind::QuarticNorm { e } => {
                let ex = e * x;
                e.tr_mul(&ex) * ex.norm_squared()
            }
            ComponentKind::QuarticResidual { a, b } => {
                let r = (a * x - b).map(|v| v * v * v);
                a.tr_mul(&r)
            }
            ComponentKind::QuadraticResidual { c, d } => c.tr_mul(&(c * x - d)),
            ComponentKind::ShrinkSquare { col, alpha, mu } => {
                col * (alpha * soft_threshold_scalar(col.dot(x), *mu))
            }
        })
    }

    /// `∇²f(x)`; for the shrink component this is the generalized Hessian
    /// (zero on the flat region).
    pub fn hessian(&self, x: &Point) -> Result<DMatrix<f64>> {
        let d = x.len();
        Ok(match &self.kind {
            ComponentKind::LeastSquaresRow { row, .. } => row * row.transpose(),
            ComponentKind::Linear { .. } => DMatrix::zeros(d, d),
            ComponentKind::Poisson { row, count } => {
                let t = Self::poisson_inner(row, x)?;
                row * row.transpose() * (count / (t * t))
            }
            ComponentKind::SquaredNorm { weight } => DMatrix::identity(d, d) * (2.0 * weight),
            ComponentKind::QuarticNorm { e } => {
                let ete = e.tr_mul(e);
                let g = &ete * x;
                &ete * (e * x).norm_squared() + &g * g.transpose() * 2.0
            }
            ComponentKind::QuarticResidual { a, b } => {
                let r = a * x - b;
                let weights = DMatrix::from_diagonal(&r.map(|v| 3.0 * v * v));
                a.tr_mul(&(weights * a))
            }
            ComponentKind::QuadraticResidual { c, .. } => c.tr_mul(c),
            ComponentKind::ShrinkSquare { col, alpha, mu } => {
                if col.dot(x).abs() > *mu {
                    col * col.transpose() * *alpha
                } else {
                    DMatrix::zeros(d, d)
                }
            }
        })
    }

    /// `(P, q)` with `f(x) = ½xᵀPx + qᵀx + const` when `f` is quadratic.
    pub fn quadratic_form(&self, dim: usize) -> Option<(DMatrix<f64>, Point)> {
        match &self.kind {
            ComponentKind::LeastSquaresRow { row, target } => {
                Some((row * row.transpose(), row * -target))
            }
            ComponentKind::Linear { q } => Some((DMatrix::zeros(dim, dim), q.clone())),
            ComponentKind::SquaredNorm { weight } => {
                Some((DMatrix::identity(dim, dim) * (2.0 * weight), Point::zeros(dim)))
            }
            ComponentKind::QuadraticResidual { c, d } => Some((c.tr_mul(c), -c.tr_mul(d))),
            _ => None,
        }
    }
}

/// The nonsmooth part `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    Zero,
    /// `weight·‖x‖₁`, plus the indicator of `{‖x‖₁ ≤ radius}` when a radius is set.
    L1 { weight: f64, radius: Option<f64> },
    /// `weight·‖x‖₁ + δ_{x ≥ 0}`
    L1Positive { weight: f64 },
    /// `δ_{[lower, upper]^d}`
    IndicatorBox { lower: f64, upper: f64 },
}

const FEASIBILITY_TOL: f64 = 1e-12;

impl Regularizer {
    /// `|x|` in one dimension.
    pub fn abs() -> Self {
        Regularizer::L1 { weight: 1.0, radius: None }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Regularizer::Zero => "zero",
            Regularizer::L1 { .. } => "l1",
            Regularizer::L1Positive { .. } => "l1_plus_positivity",
            Regularizer::IndicatorBox { .. } => "indicator_box",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Regularizer::Zero)
    }

    /// `h(x)`, `+∞` outside `dom h`.
    pub fn value(&self, x: &Point) -> f64 {
        match *self {
            Regularizer::Zero => 0.0,
            Regularizer::L1 { weight, radius } => {
                let n1 = x.lp_norm(1);
                match radius {
                    Some(r) if n1 > r * (1.0 + FEASIBILITY_TOL) => f64::INFINITY,
                    _ => weight * n1,
                }
            }
            Regularizer::L1Positive { weight } => {
                if x.iter().any(|&v| v < 0.0) {
                    f64::INFINITY
                } else {
                    weight * x.sum()
                }
            }
            Regularizer::IndicatorBox { lower, upper } => {
                let slack = FEASIBILITY_TOL * (1.0 + lower.abs().max(upper.abs()));
                if x.iter().all(|&v| v >= lower - slack && v <= upper + slack) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `prox_{t·h}(v)`.
    pub fn prox(&self, v: &Point, t: f64) -> Point {
        match *self {
            Regularizer::Zero => v.clone(),
            Regularizer::L1 { weight, radius } => {
                let s = soft_threshold(v, t * weight);
                match radius {
                    Some(r) => project_l1_ball(&s, r),
                    None => s,
                }
            }
            Regularizer::L1Positive { weight } => v.map(|x| (x - t * weight).max(0.0)),
            Regularizer::IndicatorBox { lower, upper } => v.map(|x| x.clamp(lower, upper)),
        }
    }

    /// `dist(0, g + ∂h(x))`, the stationarity residual of `⟨g,·⟩ + h` at `x`.
    pub fn stationarity_residual(&self, x: &Point, g: &Point) -> f64 {
        self.stationarity_vector(x, g).norm()
    }

    /// An element of `g + ∂h(x)` of (near) minimal norm.
    pub fn stationarity_vector(&self, x: &Point, g: &Point) -> Point {
        match *self {
            Regularizer::Zero => g.clone(),
            Regularizer::L1 { weight, radius } => {
                let on_boundary =
                    radius.is_some_and(|r| x.lp_norm(1) >= r * (1.0 - 1e-10) && r > 0.0);
                if !on_boundary {
                    return l1_residual(x, g, weight);
                }
                // Normal cone of the ball is `t·∂‖x‖₁`, so the multiplier of
                // `∂‖x‖₁` ranges over `[weight, ∞)`; the residual is convex in it.
                let (mut lo, mut hi) = (weight, weight + g.amax() + 1.0);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if l1_residual(x, g, m1).norm() <= l1_residual(x, g, m2).norm() {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                l1_residual(x, g, 0.5 * (lo + hi))
            }
            Regularizer::L1Positive { weight } => x.zip_map(g, |xj, gj| {
                let gj = gj + weight;
                if xj > 0.0 {
                    gj
                } else {
                    gj.min(0.0)
                }
            }),
            Regularizer::IndicatorBox { lower, upper } => x.zip_map(g, |xj, gj| {
                if xj <= lower && xj >= upper {
                    0.0
                } else if xj <= lower {
                    gj.min(0.0)
                } else if xj >= upper {
                    gj.max(0.0)
                } else {
                    gj
                }
            }),
        }
    }
}

fn l1_residual(x: &Point, g: &Point, weight: f64) -> Point {
    x.zip_map(g, |xj, gj| {
        if xj > 0.0 {
            gj + weight
        } else if xj < 0.0 {
            gj - weight
        } else {
            soft_threshold_scalar(gj, weight)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    Quadratic,
    Bregman,
    Holder,
}

/// A declared growth condition: `Φ − Φ* ≥ (μ/2)d²`, `≥ μ·min D_w(z,·)` or
/// `≥ (μ/2)d^{2θ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub mode: GrowthMode,
    pub mu: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub components: Vec<ComponentOracle>,
    pub regularizer: Regularizer,
    pub kernel: LegendreKernel,
    pub solutions: Option<Vec<Point>>,
    pub optimal_value: Option<f64>,
    pub growth: Option<Growth>,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.kernel.check_domain(x)
    }

    /// `F(x) = Σ f_n(x)`.
    pub fn smooth_value(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.components.iter().map(|c| c.value(x)).sum()
    }

    pub fn smooth_gradient(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let mut g = Point::zeros(self.dim());
        for c in &self.components {
            g += c.gradient(x)?;
        }
        Ok(g)
    }

    /// `Φ(x) = F(x) + h(x)`; `+∞` outside `dom h`.
    pub fn objective(&self, x: &Point) -> Result<f64> {
        let h = self.regularizer.value(x);
        if h.is_infinite() {
            self.check_point(x)?;
            return Ok(f64::INFINITY);
        }
        Ok(self.smooth_value(x)? + h)
    }

    /// `Σ_n L_n`.
    pub fn total_smoothness(&self) -> f64 {
        self.components.iter().map(|c| c.smoothness).sum()
    }

    pub fn smoothness_over(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.components[i].smoothness).sum()
    }

    pub fn known_solutions(&self) -> Result<&[Point]> {
        self.solutions.as_deref().ok_or(Error::UnknownSolutionSet)
    }

    /// `d(x, X)` over the stored finite solution set.
    pub fn distance_to_solutions(&self, x: &Point) -> Result<f64> {
        let xs = self.known_solutions()?;
        Ok(xs.iter().map(|z| (x - z).norm()).fold(f64::INFINITY, f64::min))
    }

    /// `min_{z∈X} D_w(z, y)`.
    pub fn bregman_to_solutions(&self, y: &Point) -> Result<f64> {
        let xs = self.known_solutions()?;
        let mut best = f64::INFINITY;
        for z in xs {
            best = best.min(self.kernel.bregman(z, y)?);
        }
        Ok(best)
    }

    /// Slack of the declared growth inequality at `y` (negative = violated).
    pub fn growth_slack(&self, y: &Point) -> Result<f64> {
        let g = self.growth.ok_or(Error::MissingGrowth)?;
        let phi_star = self.optimal_value.ok_or(Error::UnknownSolutionSet)?;
        let gap = self.objective(y)? - phi_star;
        let bound = match g.mode {
            GrowthMode::Quadratic => 0.5 * g.mu * self.distance_to_solutions(y)?.powi(2),
            GrowthMode::Bregman => g.mu * self.bregman_to_solutions(y)?,
            GrowthMode::Holder => {
                0.5 * g.mu * self.distance_to_solutions(y)?.powf(2.0 * g.theta)
            }
        };
        Ok(gap - bound)
    }
}

/// `sign(s)·max(|s| − μ, 0)` component-wise.
pub fn shrink(s: &Point, mu: f64) -> Point {
    soft_threshold(s, mu)
}

fn check_finite_matrix(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidData(format!("{what} has non-finite entries")))
    }
}

/// Row-wise least squares with `h = λ‖·‖₁ + δ_{‖x‖₁ ≤ R}` on the euclidean
/// kernel. The quadratic-growth constant is estimated by sampling the ball.
pub fn make_lasso(a: &DMatrix<f64>, b: &Point, lambda: f64, radius: f64) -> Result<ProblemSpec> {
    check_finite_matrix(a, "A")?;
    if a.nrows() != b.len() {
        return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidData(format!("lambda {lambda} must be positive")));
    }
    let min = b.norm_squared() / (2.0 * lambda);
    if !(radius > min) {
        return Err(Error::InvalidRadius { radius, min });
    }
    let d = a.ncols();
    let components = a
        .row_iter()
        .zip(b.iter())
        .map(|(row, &target)| {
            let row = row.transpose();
            let l = row.norm_squared();
            ComponentOracle::new(ComponentKind::LeastSquaresRow { row, target }, l)
        })
        .collect();
    let mut spec = ProblemSpec {
        name: "lasso".into(),
        components,
        regularizer: Regularizer::L1 { weight: lambda, radius: Some(radius) },
        kernel: LegendreKernel::euclidean(d),
        solutions: None,
        optimal_value: None,
        growth: None,
    };
    let x_star = lasso_solution(a, b, lambda)?;
    spec.optimal_value = Some(spec.objective(&x_star)?);
    spec.solutions = Some(vec![x_star.clone()]);
    let mu = estimate_growth_on_ball(&spec, a, &x_star, radius, 20_000, 0x1a55_0)?;
    spec.growth = Some(Growth { mode: GrowthMode::Quadratic, mu, theta: 1.0 });
    Ok(spec)
}

/// Cyclic coordinate descent on `½‖Ax − b‖² + λ‖x‖₁` to a KKT residual of 1e-12.
fn lasso_solution(a: &DMatrix<f64>, b: &Point, lambda: f64) -> Result<Point> {
    let d = a.ncols();
    let col_sq: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
    let mut x = Point::zeros(d);
    let mut r = -b.clone();
    let kkt = |x: &Point, r: &Point| l1_residual(x, &a.tr_mul(r), lambda).norm();
    for sweep in 0..200_000 {
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = a.column(j);
            let rho = col_sq[j] * x[j] - col.dot(&r);
            let new = soft_threshold_scalar(rho, lambda) / col_sq[j];
            let delta = new - x[j];
            if delta != 0.0 {
                r.axpy(delta, &col, 1.0);
                x[j] = new;
            }
        }
        if sweep % 16 == 0 {
            // Refresh the residual against drift before testing.
            r = a * &x - b;
            if kkt(&x, &r) <= 1e-12 {
                return Ok(x);
            }
        }
    }
    let res = kkt(&x, &(a * &x - b));
    if res <= 1e-10 {
        Ok(x)
    } else {
        Err(Error::NonConvergence { residual: res })
    }
}

fn estimate_growth_on_ball(
    spec: &ProblemSpec,
    a: &DMatrix<f64>,
    center: &Point,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let d = center.len();
    let eig = a.tr_mul(a).symmetric_eigen();
    let directions: Vec<Point> = eig.eigenvectors.column_iter().map(|c| c.into_owned()).collect();
    let mut rng = sampling::rng(seed);
    let (t_lo, t_hi) = (1e-4_f64.ln(), (2.0 * radius).ln());
    let mut count = 0usize;
    let mut sampler = move || {
        count += 1;
        let t = rng.random_range(t_lo..t_hi).exp();
        let dir = match count % 4 {
            0 if !directions.is_empty() => {
                let v = &directions[rng.random_range(0..directions.len())];
                if rng.random_bool(0.5) { v.clone() } else { -v.clone() }
            }
            1 => {
                let mut v = Point::zeros(d);
                v[rng.random_range(0..d)] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                v
            }
            _ => sampling::unit_direction(&mut rng, d),
        };
        project_l1_ball(&(center + dir * t), radius)
    };
    crate::diagnostics::quadratic_growth_estimate(spec, &mut sampler, n)
}

/// `Σ_i {⟨a_i,x⟩ − b_i log⟨a_i,x⟩} + β‖x‖² + μ‖x‖₁` over `x > 0`.
///
/// With `β > 0` the kernel is `burg + (β/L)‖x‖²`, `L = Σ b_i`, and `β‖x‖²` is
/// a separate component with constant `L` relative to that kernel.
pub fn make_poisson_elastic_net(
    rows: &[Point],
    counts: &[f64],
    beta: f64,
    mu_l1: f64,
) -> Result<ProblemSpec> {
    if rows.is_empty() || rows.len() != counts.len() {
        return Err(Error::InvalidData(format!(
            "need matching non-empty rows and counts ({} vs {})",
            rows.len(),
            counts.len()
        )));
    }
    let d = rows[0].len();
    for (i, (a, &b)) in rows.iter().zip(counts).enumerate() {
        if a.len() != d {
            return Err(Error::Dimension { expected: d, got: a.len() });
        }
        if a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || a.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidData(format!("row {i} must be nonnegative and nonzero")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidData(format!("count {i} must be positive")));
        }
    }
    if !(beta >= 0.0 && mu_l1 >= 0.0) {
        return Err(Error::InvalidData("beta and mu must be nonnegative".into()));
    }
    let l: f64 = counts.iter().sum();
    let mut components: Vec<ComponentOracle> = rows
        .iter()
        .zip(counts)
        .map(|(a, &b)| ComponentOracle::new(ComponentKind::Poisson { row: a.clone(), count: b }, b))
        .collect();
    let kernel = if beta > 0.0 {
        components.push(ComponentOracle::new(ComponentKind::SquaredNorm { weight: beta }, l));
        LegendreKernel::burg_with_quadratic(d, 2.0 * beta / l)?
    } else {
        LegendreKernel::burg(d)
    };
    let mut spec = ProblemSpec {
        name: "poisson_elastic_net".into(),
        components,
        regularizer: Regularizer::L1Positive { weight: mu_l1 },
        kernel,
        solutions: None,
        optimal_value: None,
        growth: None,
    };
    if d == 1 {
        // 2βx² + (Σa + μ)x − Σb = 0
        let s = rows.iter().map(|a| a[0]).sum::<f64>() + mu_l1;
        let x = 2.0 * l / (s + (s * s + 8.0 * beta * l).sqrt());
        let x = Point::from_element(1, x);
        spec.optimal_value = Some(spec.objective(&x)?);
        spec.solutions = Some(vec![x]);
    }
    Ok(spec)
}

/// `¼‖Ex‖⁴ + ¼‖Ax − b‖₄⁴ + ½‖Cx − d‖²` on the `quartic(1, 1)` kernel.
pub fn make_quartic_problem(
    e: &DMatrix<f64>,
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    b: &Point,
    d: &Point,
) -> Result<ProblemSpec> {
    for (m, name) in [(e, "E"), (a, "A"), (c, "C")] {
        check_finite_matrix(m, name)?;
    }
    let dim = e.ncols();
    for m in [a, c] {
        if m.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: m.ncols() });
        }
    }
    if a.nrows() != b.len() {
        return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
    }
    if c.nrows() != d.len() {
        return Err(Error::Dimension { expected: c.nrows(), got: d.len() });
    }
    let sigma_e = smallest_singular_value(e);
    let sigma_c = smallest_singular_value(c);
    if sigma_e <= 0.0 {
        return Err(Error::SingularInput("sigma_min(E) = 0".into()));
    }
    if sigma_c <= 0.0 {
        return Err(Error::SingularInput("sigma_min(C) = 0".into()));
    }
    let (ne, na, nc, nb) = (operator_norm(e), operator_norm(a), operator_norm(c), b.norm());
    let l_e = 3.0 * ne.powi(4);
    let l_a = 3.0 * na.powi(4) + 6.0 * na.powi(3) * nb + 3.0 * na * na * nb * nb;
    let l_c = nc * nc;
    let mut components = vec![ComponentOracle::new(ComponentKind::QuarticNorm { e: e.clone() }, l_e)];
    if na > 0.0 || nb > 0.0 {
        components.push(ComponentOracle::new(
            ComponentKind::QuarticResidual { a: a.clone(), b: b.clone() },
            l_a,
        ));
    }
    components.push(ComponentOracle::new(
        ComponentKind::QuadraticResidual { c: c.clone(), d: d.clone() },
        l_c,
    ));
    let mu_rsc = (sigma_e.powi(4) / 3.0).min(sigma_c * sigma_c);
    let homogeneous = nb == 0.0 && d.iter().all(|&v| v == 0.0);
    let mut spec = ProblemSpec {
        name: "quartic".into(),
        components,
        regularizer: Regularizer::Zero,
        kernel: LegendreKernel::quartic(dim, 1.0, 1.0)?,
        solutions: None,
        optimal_value: None,
        growth: Some(Growth {
            mode: GrowthMode::Bregman,
            mu: if homogeneous { mu_rsc } else { mu_rsc / 5.0 },
            theta: 1.0,
        }),
    };
    let x_star = if homogeneous { Point::zeros(dim) } else { newton_minimize(&spec, Point::zeros(dim))? };
    spec.optimal_value = Some(spec.objective(&x_star)?);
    spec.solutions = Some(vec![x_star]);
    Ok(spec)
}

/// Relative strong convexity constant `min{σ_E⁴/3, σ_C²}` of the quartic model.
pub fn quartic_rsc_constant(e: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    (smallest_singular_value(e).powi(4) / 3.0).min(smallest_singular_value(c).powi(2))
}

/// Damped Newton on a smooth strongly convex `F` (used for the quartic model).
fn newton_minimize(spec: &ProblemSpec, mut x: Point) -> Result<Point> {
    let hess = |x: &Point| -> Result<DMatrix<f64>> {
        let d = x.len();
        let mut h = DMatrix::zeros(d, d);
        for c in &spec.components {
            h += c.hessian(x)?;
        }
        Ok(h)
    };
    for _ in 0..200 {
        let g = spec.smooth_gradient(&x)?;
        if g.norm() <= 1e-13 {
            return Ok(x);
        }
        let step = hess(&x)?
            .cholesky()
            .ok_or_else(|| Error::SingularInput("Hessian not positive definite".into()))?
            .solve(&g);
        let f0 = spec.smooth_value(&x)?;
        let mut t = 1.0;
        loop {
            let cand = &x - &step * t;
            if spec.smooth_value(&cand)? <= f0 - 0.25 * t * g.dot(&step) || t < 1e-12 {
                x = cand;
                break;
            }
            t *= 0.5;
        }
    }
    let res = spec.smooth_gradient(&x)?.norm();
    if res <= 1e-10 {
        Ok(x)
    } else {
        Err(Error::NonConvergence { residual: res })
    }
}

/// `F(x) = −bᵀx + (α/2)‖shrink_μ(Aᵀx)‖²` on the euclidean kernel, split into
/// the linear term and one shrink term per column of `A`.
pub fn make_dual_cs(a: &DMatrix<f64>, b: &Point, alpha: f64, mu: f64) -> Result<ProblemSpec> {
    check_finite_matrix(a, "A")?;
    if a.nrows() != b.len() {
        return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
    }
    if !(alpha > 0.0 && mu > 0.0) {
        return Err(Error::InvalidData("alpha and mu must be positive".into()));
    }
    let m = a.nrows();
    let mut components = vec![ComponentOracle::new(ComponentKind::Linear { q: -b.clone() }, 0.0)];
    for col in a.column_iter() {
        let col = col.into_owned();
        let l = alpha * col.norm_squared();
        components.push(ComponentOracle::new(ComponentKind::ShrinkSquare { col, alpha, mu }, l));
    }
    let mut spec = ProblemSpec {
        name: "dual_cs".into(),
        components,
        regularizer: Regularizer::Zero,
        kernel: LegendreKernel::euclidean(m),
        solutions: None,
        optimal_value: None,
        growth: None,
    };
    let x_star = if m == 1 && a.ncols() == 1 && a[(0, 0)] != 0.0 {
        // α·a·shrink_μ(a x) = b
        let a0 = a[(0, 0)];
        let s = b[0] / (alpha * a0);
        let t = if s > 0.0 { s + mu } else if s < 0.0 { s - mu } else { 0.0 };
        Some(Point::from_element(1, t / a0))
    } else {
        gradient_descent(&spec, Point::zeros(m))
    };
    if let Some(x) = x_star {
        spec.optimal_value = Some(spec.objective(&x)?);
        spec.solutions = Some(vec![x]);
    }
    Ok(spec)
}

fn gradient_descent(spec: &ProblemSpec, mut x: Point) -> Option<Point> {
    let l = spec.total_smoothness();
    if l == 0.0 {
        return spec.smooth_gradient(&x).ok().filter(|g| g.norm() == 0.0).map(|_| x);
    }
    for _ in 0..1_000_000 {
        let g = spec.smooth_gradient(&x).ok()?;
        if g.norm() <= 1e-12 {
            return Some(x);
        }
        x -= g / l;
    }
    None
}

/// `εx² + |x|` in one dimension with Hölderian growth `θ = ½`, `μ = 1` on `|x| ≤ 1`.
pub fn make_holder_toy(epsilon: f64) -> Result<ProblemSpec> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidData(format!("epsilon {epsilon} must be >= 0")));
    }
    Ok(ProblemSpec {
        name: "holder_toy".into(),
        components: vec![ComponentOracle::new(
            ComponentKind::SquaredNorm { weight: epsilon },
            (2.0 * epsilon).max(1.0),
        )],
        regularizer: Regularizer::abs(),
        kernel: LegendreKernel::euclidean(1),
        solutions: Some(vec![Point::zeros(1)]),
        optimal_value: Some(0.0),
        growth: Some(Growth { mode: GrowthMode::Holder, mu: 1.0, theta: 0.5 }),
    })
}

/// `min [f(x) + ⟨∇f(x), y−x⟩ + L·D_w(y,x) − f(y)]` over sampled pairs.
pub fn relative_smoothness_margin<S: PointSampler + ?Sized>(
    component: &ComponentOracle,
    kernel: &LegendreKernel,
    sampler: &mut S,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut worst = f64::INFINITY;
    for _ in 0..n {
        let x = sampler.sample();
        let y = sampler.sample();
        kernel.check_domain(&x)?;
        kernel.check_domain(&y)?;
        let upper = component.value(&x)?
            + component.gradient(&x)?.dot(&(&y - &x))
            + component.smoothness * kernel.bregman(&y, &x)?;
        worst = worst.min(upper - component.value(&y)?);
    }
    Ok(worst)
}

/// Seeded 5×5 lasso used by the bundled runs and acceptance checks.
pub fn desk_lasso() -> Result<ProblemSpec> {
    let (a, b) = desk_lasso_data();
    let lambda = 0.5;
    let radius = b.norm_squared() / (2.0 * lambda) + 1.0;
    make_lasso(&a, &b, lambda, radius)
}

/// `(A, b)` of [`desk_lasso`].
pub fn desk_lasso_data() -> (DMatrix<f64>, Point) {
    let mut rng = sampling::rng(20_180_101);
    let a = DMatrix::from_fn(5, 5, |i, j| {
        let v: f64 = rng.sample(rand_distr::StandardNormal);
        v + if i == j { 2.0 } else { 0.0 }
    });
    let b = Point::from_fn(5, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    (a, b)
}

/// The quartic model with `E = C = I₂`, `A = 0`, `b = d = 0`.
pub fn desk_quartic() -> Result<ProblemSpec> {
    let i2 = DMatrix::identity(2, 2);
    make_quartic_problem(&i2, &DMatrix::zeros(1, 2), &i2, &Point::zeros(1), &Point::zeros(2))
}

/// A 3-variable Poisson elastic net with four measurements.
pub fn desk_poisson(beta: f64, mu_l1: f64) -> Result<ProblemSpec> {
    let rows = [
        [1.0, 0.5, 0.2],
        [0.3, 1.2, 0.4],
        [0.1, 0.6, 1.5],
        [0.8, 0.0, 0.7],
    ]
    .iter()
    .map(|r| Point::from_row_slice(r))
    .collect::<Vec<_>>();
    make_poisson_elastic_net(&rows, &[2.0, 1.5, 3.0, 0.5], beta, mu_l1)
}

/// Dual compressed-sensing instance whose unique minimizer is known exactly:
/// `b = αA·shrink_μ(Aᵀt)` with every `|(Aᵀt)_j| > μ`.
pub fn desk_dual_cs() -> Result<ProblemSpec> {
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.3, 1.5, 0.4, 0.0, 0.2, 1.8]);
    let (alpha, mu) = (1.0, 0.1);
    let t = Point::from_row_slice(&[1.0, -0.8, 0.6]);
    let b = &a * shrink(&a.tr_mul(&t), mu) * alpha;
    let mut spec = make_dual_cs(&a, &b, alpha, mu)?;
    spec.optimal_value = Some(spec.objective(&t)?);
    spec.solutions = Some(vec![t]);
    Ok(spec)
}
