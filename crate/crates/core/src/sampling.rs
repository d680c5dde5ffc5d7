//! Seeded point samplers for the property checks and growth estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Point;

/// Anything that can hand out sample points.
pub trait PointSampler {
    fn sample(&mut self) -> Point;
}

impl<F: FnMut() -> Point> PointSampler for F {
    fn sample(&mut self) -> Point {
        self()
    }
}

/// Uniform samples from the box `[lower, upper]^d`.
#[derive(Debug, Clone)]
pub struct UniformBox {
    rng: ChaCha8Rng,
    lower: f64,
    upper: f64,
    dim: usize,
}

impl UniformBox {
    pub fn new(dim: usize, lower: f64, upper: f64, seed: u64) -> Self {
        assert!(lower < upper, "empty sampling box");
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lower,
            upper,
            dim,
        }
    }
}

impl PointSampler for UniformBox {
    fn sample(&mut self) -> Point {
        let (lo, hi) = (self.lower, self.upper);
        Point::from_fn(self.dim, |_, _| self.rng.random_range(lo..hi))
    }
}

/// Samples `center + t·u` with `u` uniform on the unit sphere and `t`
/// log-uniform on `[t_min, t_max]`. Used to probe growth conditions at every
/// scale around a known minimizer.
#[derive(Debug, Clone)]
pub struct RadialShells {
    rng: ChaCha8Rng,
    center: Point,
    t_min: f64,
    t_max: f64,
}

impl RadialShells {
    pub fn new(center: Point, t_min: f64, t_max: f64, seed: u64) -> Self {
        assert!(0.0 < t_min && t_min < t_max);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            center,
            t_min,
            t_max,
        }
    }
}

impl PointSampler for RadialShells {
    fn sample(&mut self) -> Point {
        let dir = unit_direction(&mut self.rng, self.center.len());
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let t = self.rng.random_range(a..b).exp();
        &self.center + dir * t
    }
}

/// A uniformly distributed unit vector.
pub fn unit_direction<R: Rng>(rng: &mut R, dim: usize) -> Point {
    loop {
        let v = Point::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
