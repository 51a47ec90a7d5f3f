//! Seeded Monte Carlo estimators, the independent statistical oracle.
//!
//! Reproducibility contract: one root seed, one ChaCha stream per sample
//! index. Outcomes are summed as integers, so estimates are identical for
//! any partition of the index range across workers.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::measure::StepMeasure;
use crate::word::{Run, Word};
use crate::{Error, Result};

/// Bernoulli Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// `sqrt(mean(1−mean)/n)` for the Bernoulli estimator.
    pub stderr: f64,
    pub n_samples: u64,
    pub cutoff_steps: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, n_samples: u64, cutoff_steps: u64, seed: u64) -> McEstimate {
        let mean = hits as f64 / n_samples as f64;
        let stderr = libm::sqrt(mean * (1.0 - mean) / n_samples as f64);
        McEstimate { mean, stderr, n_samples, cutoff_steps, seed }
    }

    /// `mean ± k·stderr` as a bracket clamped to `[0, 1]`.
    pub fn bracket(&self, k_sigma: f64) -> crate::bracket::Bracket {
        crate::bracket::Bracket::new(
            (self.mean - k_sigma * self.stderr).max(0.0),
            (self.mean + k_sigma * self.stderr).min(1.0),
        )
    }
}

/// Step distribution table plus run-level word state for fast simulation.
struct Walker {
    cumulative: Vec<(f64, Vec<Run>)>,
    runs: Vec<Run>,
    len: u64,
}

impl Walker {
    fn new(mu: &StepMeasure) -> Walker {
        let mut cumulative = Vec::with_capacity(mu.support_size());
        let mut acc = 0.0f64;
        for (w, p) in mu.entries() {
            acc += p;
            cumulative.push((acc, w.runs().to_vec()));
        }
        // Guard the final bucket against rounding.
        if let Some(last) = cumulative.last_mut() {
            last.0 = 1.0 + 1e-9;
        }
        Walker { cumulative, runs: Vec::with_capacity(64), len: 0 }
    }

    fn reset(&mut self, start: &Word) {
        self.runs.clear();
        self.runs.extend_from_slice(start.runs());
        self.len = start.len() as u64;
    }

    fn step(&mut self, rng: &mut impl RngCore) {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        let idx = match self
            .cumulative
            .binary_search_by(|probe| probe.0.partial_cmp(&u).unwrap())
        {
            Ok(i) => i + 1,
            Err(i) => i,
        };
        let idx = idx.min(self.cumulative.len() - 1);
        let step_runs = &self.cumulative[idx].1;
        for run in step_runs {
            match self.runs.last_mut() {
                Some(last) if last.generator == run.generator => {
                    let before = last.exponent.unsigned_abs() as u64;
                    let sum = last.exponent + run.exponent;
                    if sum == 0 {
                        self.runs.pop();
                        self.len -= before;
                    } else {
                        last.exponent = sum;
                        self.len = self.len - before + sum.unsigned_abs() as u64;
                    }
                }
                _ => {
                    self.runs.push(*run);
                    self.len += run.exponent.unsigned_abs() as u64;
                }
            }
        }
    }

    fn matches(&self, runs: &[Run]) -> bool {
        self.runs == runs
    }

    fn has_prefix(&self, g: &Word) -> bool {
        let mut ours = self
            .runs
            .iter()
            .flat_map(|r| {
                let sign = r.exponent > 0;
                (0..r.exponent.unsigned_abs()).map(move |_| (r.generator, sign))
            });
        for r in g.runs() {
            let sign = r.exponent > 0;
            for _ in 0..r.exponent.unsigned_abs() {
                if ours.next() != Some((r.generator, sign)) {
                    return false;
                }
            }
        }
        true
    }
}

fn stream_rng(seed: u64, index: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One path sample of the first-passage event: does the walk from `x`
/// reach `y` before touching `avoid`, within `cutoff_steps`?
pub fn sample_first_passage(
    mu: &StepMeasure,
    x: &Word,
    y: &Word,
    avoid: &[Word],
    cutoff_steps: u64,
    seed: u64,
    index: u64,
) -> bool {
    let mut walker = Walker::new(mu);
    sample_first_passage_with(&mut walker, x, y, avoid, cutoff_steps, seed, index)
}

fn sample_first_passage_with(
    walker: &mut Walker,
    x: &Word,
    y: &Word,
    avoid: &[Word],
    cutoff_steps: u64,
    seed: u64,
    index: u64,
) -> bool {
    let mut rng = stream_rng(seed, index);
    walker.reset(x);
    let y_len = y.len() as u64;
    let y_runs = y.runs();
    let max_avoid = avoid.iter().map(Word::len).max().unwrap_or(0) as u64;
    if walker.len == y_len && walker.matches(y_runs) {
        return true;
    }
    if avoid.iter().any(|a| walker.matches(a.runs())) {
        return false;
    }
    for _ in 0..cutoff_steps {
        walker.step(&mut rng);
        if walker.len == y_len && walker.matches(y_runs) {
            return true;
        }
        if walker.len <= max_avoid && avoid.iter().any(|a| walker.matches(a.runs())) {
            return false;
        }
    }
    false
}

/// Monte Carlo estimate of `F(x, y; avoid)`: the fraction of paths hitting
/// `y` before `avoid` within `cutoff_steps`. Lower-biased by the cutoff.
pub fn estimate_first_passage(
    mu: &StepMeasure,
    x: &Word,
    y: &Word,
    avoid: &[Word],
    n_samples: u64,
    cutoff_steps: u64,
    seed: u64,
) -> Result<McEstimate> {
    if avoid.iter().any(|a| a == y) {
        return Err(Error::TargetInAvoid);
    }
    if n_samples == 0 {
        return Err(Error::BadParameter(alloc::string::String::from(
            "n_samples must be positive",
        )));
    }
    let mut walker = Walker::new(mu);
    let mut hits = 0u64;
    for index in 0..n_samples {
        if sample_first_passage_with(&mut walker, x, y, avoid, cutoff_steps, seed, index) {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, n_samples, cutoff_steps, seed))
}

/// One path sample of the cylinder event: run until `|X_t| ≥ threshold`
/// and report whether the exit position lies in `C_fin(g)`.
pub fn sample_cylinder(
    mu: &StepMeasure,
    g: &Word,
    distance_threshold: u64,
    seed: u64,
    index: u64,
) -> bool {
    let mut walker = Walker::new(mu);
    sample_cylinder_with(&mut walker, g, distance_threshold, seed, index)
}

fn sample_cylinder_with(
    walker: &mut Walker,
    g: &Word,
    distance_threshold: u64,
    seed: u64,
    index: u64,
) -> bool {
    let mut rng = stream_rng(seed, index);
    walker.reset(&Word::identity());
    while walker.len < distance_threshold {
        walker.step(&mut rng);
    }
    walker.has_prefix(g)
}

/// Monte Carlo estimate of the cylinder measure `ν(C(g))` from the
/// position at first exit past `distance_threshold`.
pub fn estimate_cylinder(
    mu: &StepMeasure,
    g: &Word,
    n_samples: u64,
    distance_threshold: u64,
    seed: u64,
) -> Result<McEstimate> {
    if g.is_identity() {
        return Err(Error::IdentityNotAllowed("cylinder root"));
    }
    if distance_threshold < (g.len() + 2 * mu.max_range()) as u64 {
        return Err(Error::BadParameter(alloc::format!(
            "distance threshold {distance_threshold} below |g| + 2·max_range = {}",
            g.len() + 2 * mu.max_range()
        )));
    }
    if n_samples == 0 {
        return Err(Error::BadParameter(alloc::string::String::from(
            "n_samples must be positive",
        )));
    }
    let mut walker = Walker::new(mu);
    let mut hits = 0u64;
    for index in 0..n_samples {
        if sample_cylinder_with(&mut walker, g, distance_threshold, seed, index) {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, n_samples, 0, seed))
}

/// Bias diagnostic for the cylinder estimator: the same estimate at twice
/// the exit threshold, with the drift between the two means.
pub fn cylinder_drift_diagnostic(
    mu: &StepMeasure,
    g: &Word,
    n_samples: u64,
    distance_threshold: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate, f64)> {
    let base = estimate_cylinder(mu, g, n_samples, distance_threshold, seed)?;
    let doubled = estimate_cylinder(mu, g, n_samples, 2 * distance_threshold, seed + 1)?;
    let drift = libm::fabs(base.mean - doubled.mean);
    Ok((base, doubled, drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn seeded_reproducibility() {
        let mu = presets::nn_uniform_f2();
        let a = estimate_cylinder(&mu, &Word::power(1, 1), 2_000, 30, 7).unwrap();
        let b = estimate_cylinder(&mu, &Word::power(1, 1), 2_000, 30, 7).unwrap();
        assert_eq!(a, b);
        let c = estimate_cylinder(&mu, &Word::power(1, 1), 2_000, 30, 8).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn chunked_summation_matches_sequential() {
        // The per-index streams make any partition of indices equivalent.
        let mu = presets::nn_uniform_f2();
        let n = 1_000u64;
        let full = estimate_cylinder(&mu, &Word::power(1, 1), n, 30, 42).unwrap();
        let mut hits = 0u64;
        for chunk in [(0u64, 250u64), (250, 700), (700, 1000)] {
            for index in chunk.0..chunk.1 {
                if sample_cylinder(&mu, &Word::power(1, 1), 30, 42, index) {
                    hits += 1;
                }
            }
        }
        assert_eq!(full.mean, hits as f64 / n as f64);
    }

    #[test]
    fn one_step_truncation_is_step_probability() {
        // cutoff 1: the estimate is exactly the one-step mass on y.
        let mu = presets::nn_uniform_f2();
        let est = estimate_first_passage(
            &mu,
            &Word::identity(),
            &Word::power(1, 1),
            &[],
            200_000,
            1,
            11,
        )
        .unwrap();
        assert!((est.mean - 0.25).abs() < 4.0 * est.stderr, "{}", est.mean);
    }

    #[test]
    fn blocked_paths_never_hit() {
        // Avoid set = the whole one-ball around e; no path reaches a1^2.
        let mu = presets::nn_uniform_f2();
        let avoid: Vec<Word> = crate::word::ball(&Word::identity(), 1, 2)
            .filter(|w| !w.is_identity())
            .filter(|w| *w != Word::power(1, 2))
            .collect();
        let est = estimate_first_passage(
            &mu,
            &Word::identity(),
            &Word::power(1, 2),
            &avoid,
            5_000,
            100,
            3,
        )
        .unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn cylinder_quarter_for_uniform_nn() {
        let mu = presets::nn_uniform_f2();
        let est = estimate_cylinder(&mu, &Word::power(1, 1), 40_000, 40, 5).unwrap();
        assert!(
            (est.mean - 0.25).abs() < 4.0 * est.stderr,
            "mean {} stderr {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn threshold_precondition() {
        let mu = presets::powers_n2_f2();
        assert!(estimate_cylinder(&mu, &Word::power(1, 3), 10, 4, 1).is_err());
    }
}
