//! Small dense helpers shared by the problem library and subproblem solvers.

use nalgebra::DMatrix;

use crate::Point;

/// Spectral norm `‖M‖₂`.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest singular value of an `p × d` matrix as an operator on `ℝ^d`.
/// Zero when `p < d`.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() < m.ncols() || m.is_empty() {
        return 0.0;
    }
    m.singular_values().min()
}

/// Power iteration on `MᵀM`, stopping at relative change `tol`.
pub fn operator_norm_power(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut v = Point::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let w = m.transpose() * (m * &v);
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        v = w / lambda;
        if (lambda - prev).abs() <= tol * lambda {
            return lambda.sqrt();
        }
        prev = lambda;
    }
    prev.sqrt()
}

pub fn soft_threshold_scalar(s: f64, t: f64) -> f64 {
    if s > t {
        s - t
    } else if s < -t {
        s + t
    } else {
        0.0
    }
}

pub fn soft_threshold(s: &Point, t: f64) -> Point {
    s.map(|v| soft_threshold_scalar(v, t))
}

/// Euclidean projection onto `{x : ‖x‖₁ ≤ r}` (sort-based, exact).
pub fn project_l1_ball(v: &Point, r: f64) -> Point {
    if v.lp_norm(1) <= r {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - r) / (j + 1) as f64;
        if m > t {
            theta = t;
        }
    }
    soft_threshold(v, theta.max(0.0))
}

pub fn l_inf(v: &Point) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
