//! Legendre kernels and Bregman distances.
//!
//! Three families are supported, all of the form "separable or radial part
//! plus `(γ/2)‖x‖²`":
//!
//! | kernel            | `w(x)`                                 | domain   |
//! |-------------------|----------------------------------------|----------|
//! | `euclidean`       | `½‖x‖²`                                | `ℝ^d`    |
//! | `burg` (γ ≥ 0)    | `−Σ log x_j + (γ/2)‖x‖²`               | `ℝ^d_++` |
//! | `quartic(β, γ)`   | `(β/4)‖x‖⁴ + (γ/2)‖x‖²`                | `ℝ^d`    |
//!
//! A coordinate box `[l, u]^d` can be attached; it yields the moduli
//! `(μ_w, L_w)` with `(μ_w/2)‖x−y‖² ≤ D_w(x,y) ≤ (L_w/2)‖x−y‖²` on the box,
//! from which the amplification function `ℓ(k) = k·L_w/μ_w` is built.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::sampling::PointSampler;
use crate::{Error, Point, Result};

/// Default strict-positivity margin for the Burg domain test.
pub const BURG_DOMAIN_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum KernelKind {
    Euclidean,
    Burg { gamma: f64 },
    Quartic { beta: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moduli {
    pub strong: f64,
    pub smooth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub lower: f64,
    pub upper: f64,
}

impl CoordBox {
    pub fn contains(&self, x: &Point) -> bool {
        x.iter().all(|&v| v >= self.lower && v <= self.upper)
    }
}

/// Configuration record for building a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub box_lower: Option<f64>,
    #[serde(default)]
    pub box_upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreKernel {
    kind: KernelKind,
    dim: usize,
    moduli: Option<Moduli>,
    bounds: Option<CoordBox>,
    domain_margin: f64,
}

impl LegendreKernel {
    pub fn euclidean(dim: usize) -> Self {
        Self::raw(KernelKind::Euclidean, dim)
    }

    pub fn burg(dim: usize) -> Self {
        Self::raw(KernelKind::Burg { gamma: 0.0 }, dim)
    }

    /// Burg entropy plus `(γ/2)‖x‖²`.
    pub fn burg_with_quadratic(dim: usize, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("burg gamma {gamma} must be >= 0")));
        }
        Ok(Self::raw(KernelKind::Burg { gamma }, dim))
    }

    pub fn quartic(dim: usize, beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "quartic kernel needs beta, gamma > 0 (got {beta}, {gamma})"
            )));
        }
        Ok(Self::raw(KernelKind::Quartic { beta, gamma }, dim))
    }

    fn raw(kind: KernelKind, dim: usize) -> Self {
        let moduli = match kind {
            KernelKind::Euclidean => Some(Moduli { strong: 1.0, smooth: 1.0 }),
            _ => None,
        };
        Self {
            kind,
            dim,
            moduli,
            bounds: None,
            domain_margin: BURG_DOMAIN_MARGIN,
        }
    }

    /// Attach the coordinate box `[lower, upper]^d` and derive moduli on it.
    pub fn with_box(mut self, lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidArgument(format!("bad box [{lower}, {upper}]")));
        }
        let moduli = match self.kind {
            KernelKind::Euclidean => Moduli { strong: 1.0, smooth: 1.0 },
            KernelKind::Burg { gamma } => {
                if lower <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "burg box needs 0 < lower (got {lower})"
                    )));
                }
                // Hessian diag(1/x_j² + γ).
                Moduli {
                    strong: 1.0 / (upper * upper) + gamma,
                    smooth: 1.0 / (lower * lower) + gamma,
                }
            }
            KernelKind::Quartic { beta, gamma } => {
                // Hessian (β‖x‖² + γ)I + 2βxxᵀ, eigenvalues in [γ, γ + 3β‖x‖²].
                let m = lower.abs().max(upper.abs());
                Moduli {
                    strong: gamma,
                    smooth: gamma + 3.0 * beta * self.dim as f64 * m * m,
                }
            }
        };
        self.moduli = Some(moduli);
        self.bounds = Some(CoordBox { lower, upper });
        Ok(self)
    }

    pub fn with_domain_margin(mut self, margin: f64) -> Self {
        self.domain_margin = margin;
        self
    }

    pub fn from_record(rec: &KernelRecord) -> Result<Self> {
        if rec.dimension == 0 {
            return Err(Error::InvalidArgument("kernel dimension must be positive".into()));
        }
        let k = match rec.name.as_str() {
            "euclidean" => Self::euclidean(rec.dimension),
            "burg" => Self::burg_with_quadratic(rec.dimension, rec.gamma.unwrap_or(0.0))?,
            "quartic" => Self::quartic(
                rec.dimension,
                rec.beta.unwrap_or(1.0),
                rec.gamma.unwrap_or(1.0),
            )?,
            other => return Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
        };
        match (rec.box_lower, rec.box_upper) {
            (Some(l), Some(u)) => k.with_box(l, u),
            (None, None) => Ok(k),
            _ => Err(Error::InvalidArgument("box needs both bounds".into())),
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moduli(&self) -> Option<Moduli> {
        self.moduli
    }

    pub fn bounds(&self) -> Option<CoordBox> {
        self.bounds
    }

    pub fn name(&self) -> String {
        match self.kind {
            KernelKind::Euclidean => "euclidean".into(),
            KernelKind::Burg { gamma } if gamma == 0.0 => "burg".into(),
            KernelKind::Burg { gamma } => format!("burg(gamma={gamma})"),
            KernelKind::Quartic { beta, gamma } => format!("quartic({beta},{gamma})"),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, KernelKind::Euclidean)
    }

    /// Whether `w` is a sum of one-dimensional functions of the coordinates.
    pub fn is_separable(&self) -> bool {
        !matches!(self.kind, KernelKind::Quartic { .. })
    }

    pub fn in_box(&self, x: &Point) -> bool {
        self.bounds.map_or(true, |b| b.contains(x))
    }

    /// Interior-of-domain test.
    pub fn check_domain(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::DomainViolation(format!("coordinate {j} is not finite")));
        }
        if let KernelKind::Burg { .. } = self.kind {
            if let Some(j) = x.iter().position(|&v| v <= self.domain_margin) {
                return Err(Error::DomainViolation(format!(
                    "burg needs x_{j} > {} (got {})",
                    self.domain_margin, x[j]
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.check_domain(x).is_ok()
    }

    /// `w(x)`.
    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check_domain(x)?;
        let sq = x.norm_squared();
        Ok(match self.kind {
            KernelKind::Euclidean => 0.5 * sq,
            KernelKind::Burg { gamma } => -x.iter().map(|v| v.ln()).sum::<f64>() + 0.5 * gamma * sq,
            KernelKind::Quartic { beta, gamma } => 0.25 * beta * sq * sq + 0.5 * gamma * sq,
        })
    }

    /// `∇w(x)`.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        self.check_domain(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &Point) -> Point {
        match self.kind {
            KernelKind::Euclidean => x.clone(),
            KernelKind::Burg { gamma } => x.map(|v| -1.0 / v + gamma * v),
            KernelKind::Quartic { beta, gamma } => x * (beta * x.norm_squared() + gamma),
        }
    }

    /// `∇²w(x)`.
    pub fn hessian(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let d = self.dim;
        Ok(match self.kind {
            KernelKind::Euclidean => DMatrix::identity(d, d),
            KernelKind::Burg { gamma } => {
                DMatrix::from_diagonal(&x.map(|v| 1.0 / (v * v) + gamma))
            }
            KernelKind::Quartic { beta, gamma } => {
                DMatrix::identity(d, d) * (beta * x.norm_squared() + gamma)
                    + (x * x.transpose()) * (2.0 * beta)
            }
        })
    }

    /// `D_w(y, x) = w(y) − w(x) − ⟨∇w(x), y − x⟩`, evaluated in a
    /// cancellation-free form for every kernel.
    pub fn bregman(&self, y: &Point, x: &Point) -> Result<f64> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        let diff = y - x;
        let half_sq = 0.5 * diff.norm_squared();
        Ok(match self.kind {
            KernelKind::Euclidean => half_sq,
            KernelKind::Burg { gamma } => {
                let entropy: f64 = y
                    .iter()
                    .zip(x.iter())
                    .map(|(&yj, &xj)| {
                        let t = (yj - xj) / xj;
                        t - t.ln_1p()
                    })
                    .sum();
                entropy + gamma * half_sq
            }
            KernelKind::Quartic { beta, gamma } => {
                // D_{¼‖·‖⁴}(y,x) = ¼(‖y‖²−‖x‖²)² + ½‖y−x‖²‖x‖²
                let gap = diff.dot(&(y + x));
                let quartic = 0.25 * gap * gap + half_sq * x.norm_squared();
                beta * quartic + gamma * half_sq
            }
        })
    }

    /// The amplification function `ℓ` of the delayed-Bregman bound.
    pub fn ell(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("ell is defined for k >= 1".into()));
        }
        if self.is_euclidean() {
            return Ok(k as f64);
        }
        if k == 1 {
            return Ok(1.0);
        }
        let m = self.moduli.ok_or_else(|| Error::MissingModuli(self.name()))?;
        Ok(k as f64 * m.smooth / m.strong)
    }

    /// `|D(x,z) − D(x,y) − D(y,z) − ⟨∇w(y) − ∇w(z), x − y⟩|`.
    pub fn three_point_residual(&self, x: &Point, y: &Point, z: &Point) -> Result<f64> {
        let lhs = self.bregman(x, z)? - self.bregman(x, y)? - self.bregman(y, z)?;
        let rhs = (self.gradient(y)? - self.gradient(z)?).dot(&(x - y));
        Ok((lhs - rhs).abs())
    }
}

/// `min D_w(x,y)/D_w(y,x)` over `n` sampled pairs: an upper estimate of the
/// symmetry coefficient.
pub fn symmetry_ratio_min<S: PointSampler + ?Sized>(
    kernel: &LegendreKernel,
    sampler: &mut S,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let x = sampler.sample();
        let y = sampler.sample();
        if x == y {
            return Err(Error::DegeneratePair);
        }
        let forward = kernel.bregman(&x, &y)?;
        let backward = kernel.bregman(&y, &x)?;
        if backward == 0.0 {
            return Err(Error::DegeneratePair);
        }
        best = best.min(forward / backward);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::UniformBox;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn all_kernels(dim: usize) -> Vec<LegendreKernel> {
        vec![
            LegendreKernel::euclidean(dim),
            LegendreKernel::burg(dim),
            LegendreKernel::burg_with_quadratic(dim, 0.7).unwrap(),
            LegendreKernel::quartic(dim, 1.0, 1.0).unwrap(),
            LegendreKernel::quartic(dim, 2.0, 0.5).unwrap(),
        ]
    }

    fn sampler_for(k: &LegendreKernel, seed: u64) -> UniformBox {
        match k.kind() {
            KernelKind::Burg { .. } => UniformBox::new(k.dim(), 0.05, 5.0, seed),
            _ => UniformBox::new(k.dim(), -3.0, 3.0, seed),
        }
    }

    #[test]
    fn values() {
        assert_eq!(LegendreKernel::euclidean(2).value(&p(&[3.0, 4.0])).unwrap(), 12.5);
        assert_eq!(LegendreKernel::burg(2).value(&p(&[1.0, 1.0])).unwrap(), 0.0);
        let q = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        assert!((q.value(&p(&[1.0, 0.0])).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn gradients() {
        assert_eq!(
            LegendreKernel::euclidean(2).gradient(&p(&[3.0, 4.0])).unwrap(),
            p(&[3.0, 4.0])
        );
        assert_eq!(
            LegendreKernel::burg(2).gradient(&p(&[2.0, 4.0])).unwrap(),
            p(&[-0.5, -0.25])
        );
        let q = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        assert_eq!(q.gradient(&p(&[1.0, 0.0])).unwrap(), p(&[2.0, 0.0]));
    }

    #[test]
    fn bregman_examples() {
        let e = LegendreKernel::euclidean(2);
        assert_eq!(e.bregman(&p(&[1.0, 2.0]), &p(&[0.0, 0.0])).unwrap(), 2.5);
        let b = LegendreKernel::burg(1);
        let d = b.bregman(&p(&[2.0]), &p(&[1.0])).unwrap();
        assert!((d - (1.0 - 2f64.ln())).abs() < 1e-15);
        let q = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        assert!((q.bregman(&p(&[1.0, 0.0]), &p(&[0.0, 0.0])).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn burg_rejects_nonpositive() {
        let b = LegendreKernel::burg(2);
        assert!(matches!(b.value(&p(&[1.0, 0.0])), Err(Error::DomainViolation(_))));
        assert!(matches!(b.gradient(&p(&[-1.0, 1.0])), Err(Error::DomainViolation(_))));
        assert!(matches!(
            b.bregman(&p(&[1.0, 1.0]), &p(&[1.0, 1e-13])),
            Err(Error::DomainViolation(_))
        ));
        let relaxed = LegendreKernel::burg(1).with_domain_margin(0.0);
        assert!(relaxed.value(&p(&[1e-13])).is_ok());
    }

    #[test]
    fn quartic_bregman_matches_generic_formula() {
        let q = LegendreKernel::quartic(3, 1.5, 0.5).unwrap();
        let mut s = UniformBox::new(3, -2.0, 2.0, 11);
        for _ in 0..200 {
            let (x, y) = (s.sample(), s.sample());
            let generic = q.value(&y).unwrap()
                - q.value(&x).unwrap()
                - q.gradient(&x).unwrap().dot(&(&y - &x));
            let d = q.bregman(&y, &x).unwrap();
            assert!((d - generic).abs() <= 1e-11 * (1.0 + generic.abs()));
        }
    }

    #[test]
    fn linear_additivity_quartic() {
        let (beta, gamma) = (2.5, 0.3);
        let q = LegendreKernel::quartic(2, beta, gamma).unwrap();
        let w1 = |y: &Point, x: &Point| {
            0.25 * y.norm_squared().powi(2) + 0.75 * x.norm_squared().powi(2)
                - x.norm_squared() * x.dot(y)
        };
        let mut s = UniformBox::new(2, -4.0, 4.0, 3);
        for _ in 0..1000 {
            let (x, y) = (s.sample(), s.sample());
            let split = beta * w1(&y, &x) + gamma * 0.5 * (&y - &x).norm_squared();
            let d = q.bregman(&y, &x).unwrap();
            assert!((d - split).abs() <= 1e-10 * (1.0 + d));
        }
    }

    #[test]
    fn nonnegativity_and_identity() {
        for k in all_kernels(3) {
            let mut s = sampler_for(&k, 5);
            for _ in 0..1000 {
                let (x, y) = (s.sample(), s.sample());
                assert!(k.bregman(&y, &x).unwrap() > 0.0);
                assert!(k.bregman(&x, &x).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn three_point_identity() {
        for k in all_kernels(3) {
            let mut s = sampler_for(&k, 7);
            for _ in 0..1000 {
                let (x, y, z) = (s.sample(), s.sample(), s.sample());
                let r = k.three_point_residual(&x, &y, &z).unwrap();
                let scale = 1.0
                    + k.bregman(&x, &z).unwrap()
                    + k.bregman(&x, &y).unwrap()
                    + k.bregman(&y, &z).unwrap();
                assert!(r <= 1e-9 * scale, "{}: residual {r}", k.name());
            }
        }
        let e = LegendreKernel::euclidean(2);
        let r = e
            .three_point_residual(&p(&[1.0, -2.0]), &p(&[0.5, 3.0]), &p(&[-4.0, 1.0]))
            .unwrap();
        assert!(r <= 1e-12);
        let ones = p(&[1.0, 1.0, 1.0]);
        assert_eq!(LegendreKernel::burg(3).three_point_residual(&ones, &ones, &ones).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for k in all_kernels(3) {
            let mut s = sampler_for(&k, 9);
            for _ in 0..1000 {
                let x = s.sample();
                let g = k.gradient(&x).unwrap();
                for j in 0..3 {
                    let h = 1e-6 * x[j].abs().max(1e-2);
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (k.value(&xp).unwrap() - k.value(&xm).unwrap()) / (2.0 * h);
                    let rel = (fd - g[j]).abs() / g[j].abs().max(1.0);
                    assert!(rel <= 1e-6, "{} coord {j}: fd {fd} vs {}", k.name(), g[j]);
                }
            }
        }
    }

    #[test]
    fn moduli_sandwich_on_box() {
        let kernels = vec![
            LegendreKernel::burg(2).with_box(0.5, 3.0).unwrap(),
            LegendreKernel::burg_with_quadratic(2, 0.4).unwrap().with_box(0.2, 2.0).unwrap(),
            LegendreKernel::quartic(2, 1.0, 1.0).unwrap().with_box(-1.5, 1.5).unwrap(),
        ];
        for k in kernels {
            let b = k.bounds().unwrap();
            let m = k.moduli().unwrap();
            let mut s = UniformBox::new(2, b.lower, b.upper, 13);
            for _ in 0..1000 {
                let (x, y) = (s.sample(), s.sample());
                let d = k.bregman(&x, &y).unwrap();
                let sq = (&x - &y).norm_squared();
                assert!(0.5 * m.strong * sq <= d * (1.0 + 1e-12) + 1e-15);
                assert!(d <= 0.5 * m.smooth * sq * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn ell_values() {
        assert_eq!(LegendreKernel::euclidean(2).ell(3).unwrap(), 3.0);
        let q = LegendreKernel::quartic(2, 1.0, 1.0).unwrap();
        assert_eq!(q.ell(1).unwrap(), 1.0);
        assert!(matches!(q.ell(2), Err(Error::MissingModuli(_))));
        // μ_w = 1/u² = 1, L_w = 1/l² = 4 on [0.5, 1]
        let b = LegendreKernel::burg(1).with_box(0.5, 1.0).unwrap();
        assert_eq!(b.moduli().unwrap(), Moduli { strong: 1.0, smooth: 4.0 });
        assert_eq!(b.ell(2).unwrap(), 8.0);
        for k in [LegendreKernel::euclidean(1), b, q.with_box(-1.0, 2.0).unwrap()] {
            for i in 1..64 {
                assert!(k.ell(i + 1).unwrap() >= k.ell(i).unwrap());
            }
        }
    }

    #[test]
    fn ell_satisfies_delayed_chain_on_box() {
        // D(v_k, v_j) <= ℓ(k−j) Σ D(v_{i+1}, v_i) for sequences inside the box.
        let k = LegendreKernel::burg(2).with_box(0.3, 2.0).unwrap();
        let mut s = UniformBox::new(2, 0.3, 2.0, 17);
        for _ in 0..300 {
            let seq: Vec<Point> = (0..6).map(|_| s.sample()).collect();
            for len in 2..6 {
                let lhs = k.bregman(&seq[len], &seq[0]).unwrap();
                let chain: f64 = (0..len).map(|i| k.bregman(&seq[i + 1], &seq[i]).unwrap()).sum();
                assert!(lhs <= k.ell(len).unwrap() * chain * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn symmetry_ratio() {
        let e = LegendreKernel::euclidean(2);
        let mut s = UniformBox::new(2, -1.0, 1.0, 1);
        let r = symmetry_ratio_min(&e, &mut s, 100).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let mut same = || Point::from_row_slice(&[1.0, 1.0]);
        assert!(matches!(symmetry_ratio_min(&e, &mut same, 3), Err(Error::DegeneratePair)));
    }

    #[test]
    fn record_construction() {
        let rec = KernelRecord {
            name: "burg".into(),
            dimension: 3,
            beta: None,
            gamma: None,
            box_lower: Some(0.1),
            box_upper: Some(10.0),
        };
        let k = LegendreKernel::from_record(&rec).unwrap();
        assert_eq!(k.name(), "burg");
        assert!(k.moduli().is_some());
        let bad = KernelRecord { name: "entropy".into(), ..rec.clone() };
        assert!(LegendreKernel::from_record(&bad).is_err());
        let half = KernelRecord { box_upper: None, ..rec };
        assert!(LegendreKernel::from_record(&half).is_err());
    }
}
