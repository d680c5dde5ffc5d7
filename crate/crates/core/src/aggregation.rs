//! Delay schedules, the stored-gradient table and `(I_k, J_k)` selection.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::problems::ProblemSpec;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayKind {
    Zero,
    Constant { c: usize },
    /// Component `n` at iteration `k` sees delay `(k − n) mod (τ + 1)`.
    Cyclic,
    UniformRandom { seed: u64 },
}

/// Bounded delays `τ_k^n ∈ {0, …, min(k, τ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySchedule {
    pub kind: DelayKind,
    pub bound: usize,
}

impl DelaySchedule {
    pub fn zero() -> Self {
        Self { kind: DelayKind::Zero, bound: 0 }
    }

    /// Always-maximal delays `τ_k^n = τ`.
    pub fn constant(tau: usize) -> Self {
        Self { kind: DelayKind::Constant { c: tau }, bound: tau }
    }

    pub fn cyclic(tau: usize) -> Self {
        Self { kind: DelayKind::Cyclic, bound: tau }
    }

    pub fn uniform_random(tau: usize, seed: u64) -> Self {
        Self { kind: DelayKind::UniformRandom { seed }, bound: tau }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DelayKind::Zero if self.bound != 0 => Err(Error::InvalidArgument(
                "zero delay schedule must have bound 0".into(),
            )),
            DelayKind::Constant { c } if c > self.bound => Err(Error::InvalidArgument(format!(
                "constant delay {c} exceeds bound {}",
                self.bound
            ))),
            _ => Ok(()),
        }
    }

    /// `(τ_k^1, …, τ_k^N)`, each clipped to `k`.
    pub fn delays_at(&self, k: usize, n: usize) -> Vec<usize> {
        let tau = self.bound;
        let raw: Vec<usize> = match self.kind {
            DelayKind::Zero => vec![0; n],
            DelayKind::Constant { c } => vec![c.min(tau); n],
            DelayKind::Cyclic => (0..n)
                .map(|i| (k as i64 - i as i64).rem_euclid(tau as i64 + 1) as usize)
                .collect(),
            DelayKind::UniformRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..n)
                    .map(|i| {
                        // One 64-bit draw consumes two words; leave headroom for
                        // rejection sampling so each (k, n) owns its block.
                        rng.set_word_pos(16 * i as u128);
                        rng.random_range(0..=tau)
                    })
                    .collect()
            }
        };
        raw.into_iter().map(|d| d.min(k)).collect()
    }
}

/// Stored component gradients `g_n = ∇f_n(x_{e_n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTable {
    entries: Vec<Option<(Point, usize)>>,
}

impl GradientTable {
    pub fn new(n: usize) -> Self {
        Self { entries: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn store(&mut self, n: usize, gradient: Point, evaluated_at: usize) {
        self.entries[n] = Some((gradient, evaluated_at));
    }

    pub fn gradient(&self, n: usize) -> Option<&Point> {
        self.entries.get(n)?.as_ref().map(|(g, _)| g)
    }

    pub fn evaluation_iteration(&self, n: usize) -> Option<usize> {
        self.entries.get(n)?.as_ref().map(|&(_, e)| e)
    }

    /// `Σ_{j∈J} g_j` summed in ascending index order.
    pub fn aggregate(&self, indices: &[usize]) -> Result<Point> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let mut sum: Option<Point> = None;
        for j in sorted {
            let g = self.gradient(j).ok_or(Error::Uninitialized(j))?;
            match sum.as_mut() {
                Some(s) => *s += g,
                None => sum = Some(g.clone()),
            }
        }
        sum.ok_or_else(|| Error::InvalidArgument("empty aggregation set".into()))
    }

    /// Store `∇f_j(x_{k−τ_k^j})` for every `j ∈ J`.
    pub fn refresh(
        &mut self,
        problem: &ProblemSpec,
        history: &IterateHistory,
        k: usize,
        delays: &[usize],
        indices: &[usize],
    ) -> Result<()> {
        for &j in indices {
            let e = k - delays[j].min(k);
            if self.evaluation_iteration(j) == Some(e) {
                continue;
            }
            let x = history.get(e)?;
            problem.kernel.check_domain(x)?;
            let g = problem.components[j].gradient(x)?;
            self.store(j, g, e);
        }
        Ok(())
    }

    /// `max_{j∈J} (k − e_j)`.
    pub fn staleness(&self, k: usize, indices: &[usize]) -> usize {
        indices
            .iter()
            .filter_map(|&j| self.evaluation_iteration(j))
            .map(|e| k.saturating_sub(e))
            .max()
            .unwrap_or(0)
    }
}

/// The last `τ + 1` iterates, pre-filled with `x₀` for negative indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateHistory {
    window: VecDeque<Point>,
    latest: usize,
}

impl IterateHistory {
    pub fn new(x0: Point, tau: usize) -> Self {
        Self { window: std::iter::repeat_n(x0, tau + 1).collect(), latest: 0 }
    }

    pub fn latest_index(&self) -> usize {
        self.latest
    }

    pub fn latest(&self) -> &Point {
        self.window.back().expect("window is never empty")
    }

    /// Append `x_{latest+1}`.
    pub fn push(&mut self, x: Point) {
        self.window.pop_front();
        self.window.push_back(x);
        self.latest += 1;
    }

    /// `x_j` for `latest − τ ≤ j ≤ latest`.
    pub fn get(&self, j: usize) -> Result<&Point> {
        let back = self.latest.checked_sub(j).filter(|&b| b < self.window.len());
        match back {
            Some(b) => Ok(&self.window[self.window.len() - 1 - b]),
            None => Err(Error::IndexOutOfTrace { index: j, len: self.latest + 1 }),
        }
    }
}

/// How the components split into kept `I_k` and linearized `J_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionPolicy {
    FullAggregate,
    /// `I_k = {k mod N}`.
    IapCyclic,
    IapFixed { index: usize },
    /// The kept sets cycle through the listed patterns.
    Custom { kept: Vec<Vec<usize>> },
}

/// One iteration's partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub kept: Vec<usize>,
    pub linearized: Vec<usize>,
}

impl SelectionPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::FullAggregate => "full_aggregate",
            SelectionPolicy::IapCyclic => "iap_cyclic",
            SelectionPolicy::IapFixed { .. } => "iap_fixed",
            SelectionPolicy::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("problem has no components".into()));
        }
        let patterns: Vec<Vec<usize>> = match self {
            SelectionPolicy::FullAggregate => return Ok(()),
            SelectionPolicy::IapCyclic => (0..n).map(|i| vec![i]).collect(),
            SelectionPolicy::IapFixed { index } => vec![vec![*index]],
            SelectionPolicy::Custom { kept } => {
                if kept.is_empty() {
                    return Err(Error::InvalidArgument("custom selection has no patterns".into()));
                }
                kept.clone()
            }
        };
        for p in &patterns {
            if let Some(&bad) = p.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidArgument(format!(
                    "kept index {bad} out of range for {n} components"
                )));
            }
            let mut s = p.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != p.len() {
                return Err(Error::InvalidArgument("kept set has duplicates".into()));
            }
            if s.len() >= n {
                return Err(Error::InvalidArgument(
                    "kept set covers every component; J_k would be empty".into(),
                ));
            }
        }
        Ok(())
    }

    /// `(I_k, J_k)` with `J_k = {0..N} \ I_k`, both ascending.
    pub fn partition(&self, k: usize, n: usize) -> Partition {
        let mut kept: Vec<usize> = match self {
            SelectionPolicy::FullAggregate => Vec::new(),
            SelectionPolicy::IapCyclic => vec![k % n],
            SelectionPolicy::IapFixed { index } => vec![*index],
            SelectionPolicy::Custom { kept } => kept[k % kept.len()].clone(),
        };
        kept.sort_unstable();
        let linearized = (0..n).filter(|i| kept.binary_search(i).is_err()).collect();
        Partition { kept, linearized }
    }

    /// `max_k Σ_{j∈J_k} L_j`.
    pub fn worst_case_smoothness(&self, problem: &ProblemSpec) -> f64 {
        let n = problem.len();
        let period = match self {
            SelectionPolicy::FullAggregate | SelectionPolicy::IapFixed { .. } => 1,
            SelectionPolicy::IapCyclic => n,
            SelectionPolicy::Custom { kept } => kept.len(),
        };
        (0..period)
            .map(|k| problem.smoothness_over(&self.partition(k, n).linearized))
            .fold(0.0, f64::max)
    }
}
