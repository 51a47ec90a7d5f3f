//! First-passage functions `F_μ(x, y; S_bad)` with certified lower bounds.
//!
//! Conventions follow the definition
//! `F(x, y; S) = Σ_k P(X_0 = x, X_k = y, X_j ∉ S for j < k)`:
//! the zero-step path gives `F(x, x; S) = 1`, and a start inside `S` (with
//! `x ≠ y`) gives 0. Everything is computed at the identity after a left
//! translation, which makes `F(x, y; S) = F(e, x^{-1}y; x^{-1}S)` hold
//! bit-exactly.

mod chain;
mod nn;
mod returns;

pub use nn::nn_exact_first_passage;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bracket::Bracket;
use crate::measure::StepMeasure;
use crate::word::{Word, WordMap};
use crate::{Error, Result};

use returns::Returns;

/// Default tolerance for library calls.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Interval-valued first-passage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpValue {
    /// Certified lower bound: the true value is at least this.
    pub lower: f64,
    /// Heuristic upper bound (geometric-tail extrapolation); may be 1.
    pub upper: f64,
    /// Total value-iteration sweeps used.
    pub iterations: u64,
    /// Final micro-ball depth of the radius schedule.
    pub radius_used: u32,
    /// True when the radius increments fell below the tolerance and the
    /// bracket closed to within ten times the tolerance.
    pub converged: bool,
}

impl FpValue {
    pub fn exact(v: f64) -> FpValue {
        FpValue { lower: v, upper: v, iterations: 0, radius_used: 0, converged: true }
    }

    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lower, self.upper)
    }

    fn combine_meta(mut self, other: &FpValue) -> FpValue {
        self.iterations += other.iterations;
        self.radius_used = self.radius_used.max(other.radius_used);
        self.converged &= other.converged;
        self
    }
}

/// Finite set of forbidden states for restricted first passage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AvoidSet {
    words: BTreeSet<Word>,
}

impl AvoidSet {
    pub fn empty() -> AvoidSet {
        AvoidSet { words: BTreeSet::new() }
    }

    pub fn new<I: IntoIterator<Item = Word>>(words: I) -> AvoidSet {
        AvoidSet { words: words.into_iter().collect() }
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.contains(w)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    pub fn without(&self, w: &Word) -> AvoidSet {
        let mut words = self.words.clone();
        words.remove(w);
        AvoidSet { words }
    }

    pub fn union(&self, other: &AvoidSet) -> AvoidSet {
        AvoidSet { words: self.words.union(&other.words).cloned().collect() }
    }
}

impl FromIterator<Word> for AvoidSet {
    fn from_iter<T: IntoIterator<Item = Word>>(iter: T) -> Self {
        AvoidSet::new(iter)
    }
}

/// Tuning knobs of the engine.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Sweep budget per value iteration.
    pub sweep_cap: u64,
    /// Sweep budget for the excursion-return fixed point.
    pub returns_sweep_cap: u64,
    /// Number of radius rounds (the schedule starts at `max_range` and
    /// grows by `max_range` each round).
    pub radius_rounds: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { sweep_cap: 100_000, returns_sweep_cap: 200_000, radius_rounds: 2 }
    }
}

/// First-passage engine for one step measure.
///
/// Construction computes the excursion return matrices once; queries then
/// run value iteration on small reduced chains around each query's hull.
pub struct Solver<'a> {
    mu: &'a StepMeasure,
    returns: Returns,
    opts: SolverOptions,
}

impl<'a> Solver<'a> {
    pub fn new(mu: &'a StepMeasure) -> Solver<'a> {
        Solver::with_options(mu, SolverOptions::default())
    }

    pub fn with_options(mu: &'a StepMeasure, opts: SolverOptions) -> Solver<'a> {
        let returns = Returns::compute(mu, opts.returns_sweep_cap);
        Solver { mu, returns, opts }
    }

    pub fn measure(&self) -> &StepMeasure {
        self.mu
    }

    /// True when the return fixed point converged; queries against a
    /// non-converged engine still certify lower bounds but never report
    /// `converged`.
    pub fn returns_converged(&self) -> bool {
        self.returns.converged
    }

    /// Restricted first passage `F(x, y; avoid)` with certified lower bound.
    pub fn first_passage(
        &self,
        x: &Word,
        y: &Word,
        avoid: &AvoidSet,
        tol: f64,
    ) -> Result<FpValue> {
        if !(tol > 0.0) {
            return Err(Error::NonPositiveTolerance);
        }
        if avoid.contains(y) {
            return Err(Error::TargetInAvoid);
        }
        if x == y {
            return Ok(FpValue::exact(1.0));
        }
        if avoid.contains(x) {
            return Ok(FpValue::exact(0.0));
        }

        // Translate the query to start at the identity; this makes left
        // invariance exact.
        let x_inv = x.inverse();
        let target = x_inv.mul(y);
        let avoid_set: BTreeSet<Word> = avoid.iter().map(|a| x_inv.mul(a)).collect();

        let n = self.mu.max_range().max(1);
        let mut lower = 0.0f64;
        let mut tail = 1.0f64;
        let mut iterations = 0u64;
        let mut radius = 0u32;
        let mut chain_converged = true;
        let mut last_increment = f64::INFINITY;
        for round in 1..=self.opts.radius_rounds {
            let depth_cap = (round as usize) * n;
            let outcome = chain::hitting_probability(
                self.mu,
                &self.returns,
                &target,
                &avoid_set,
                depth_cap,
                tol / 10.0,
                self.opts.sweep_cap,
            );
            iterations += outcome.sweeps;
            radius = depth_cap as u32;
            chain_converged &= outcome.converged;
            last_increment = (outcome.lower - lower).max(0.0);
            lower = lower.max(outcome.lower);
            tail = outcome.tail;
            if round > 1 && last_increment < tol {
                break;
            }
        }
        // Geometric-tail extrapolation of the radius increments plus the
        // iteration tail; heuristic by design.
        let radius_tail = last_increment.min(1.0);
        let upper = (lower + tail + radius_tail).min(1.0);
        let converged = chain_converged
            && self.returns.converged
            && last_increment < tol
            && (upper - lower) < 10.0 * tol;
        Ok(FpValue { lower, upper, iterations, radius_used: radius, converged })
    }

    /// Escape probability `F(x ↛ A) = 1 − Σ_{a ∈ A} F(x, a; A∖{a})`.
    ///
    /// Bounds combine conservatively: the lower end of the escape uses the
    /// upper ends of the passages and vice versa.
    pub fn escape_probability(&self, x: &Word, a: &AvoidSet, tol: f64) -> Result<FpValue> {
        if a.contains(x) {
            return Err(Error::StartInSet);
        }
        if a.is_empty() {
            return Ok(FpValue::exact(1.0));
        }
        let mut sum = Bracket::point(0.0);
        let mut meta = FpValue::exact(0.0);
        for target in a.iter() {
            let fp = self.first_passage(x, target, &a.without(target), tol)?;
            sum = sum.add(fp.bracket());
            meta = meta.combine_meta(&fp);
        }
        let escape = sum.one_minus();
        Ok(FpValue {
            lower: escape.lo,
            upper: escape.hi,
            iterations: meta.iterations,
            radius_used: meta.radius_used,
            converged: meta.converged,
        })
    }

    /// Chained passage `F(x → A_1 → … → A_{r−1} ↛ A_r)`, defined
    /// inductively with the escape probability as the terminal step.
    pub fn chained_passage(&self, x: &Word, chain: &[AvoidSet], tol: f64) -> Result<FpValue> {
        if chain.is_empty() {
            return Err(Error::BadParameter(alloc::string::String::from(
                "chain must contain at least one set",
            )));
        }
        for (i, pair) in chain.windows(2).enumerate() {
            if pair[0].iter().any(|w| pair[1].contains(w)) {
                return Err(Error::ChainOverlap { position: i });
            }
        }
        if chain[0].contains(x) {
            return Err(Error::StartInSet);
        }
        let mut memo: WordMap<Vec<Option<FpValue>>> = WordMap::new();
        self.chained_inner(x, chain, 0, tol, &mut memo)
    }

    fn chained_inner(
        &self,
        x: &Word,
        chain: &[AvoidSet],
        pos: usize,
        tol: f64,
        memo: &mut WordMap<Vec<Option<FpValue>>>,
    ) -> Result<FpValue> {
        if pos + 1 == chain.len() {
            return self.escape_probability(x, &chain[pos], tol);
        }
        if let Some(hit) = memo.get(x).and_then(|v| v.get(pos).copied().flatten()) {
            return Ok(hit);
        }
        let mut total = Bracket::point(0.0);
        let mut meta = FpValue::exact(0.0);
        for a in chain[pos].iter() {
            let fp = self.first_passage(x, a, &chain[pos].without(a), tol)?;
            meta = meta.combine_meta(&fp);
            if fp.upper == 0.0 {
                continue;
            }
            let rest = self.chained_inner(a, chain, pos + 1, tol, memo)?;
            meta = meta.combine_meta(&rest);
            total = total.add(fp.bracket().mul(rest.bracket()));
        }
        let value = FpValue {
            lower: total.lo,
            upper: total.hi.min(1.0),
            iterations: meta.iterations,
            radius_used: meta.radius_used,
            converged: meta.converged,
        };
        memo.entry(x.clone())
            .or_insert_with(|| alloc::vec![None; chain.len()])
            [pos] = Some(value);
        Ok(value)
    }
}

/// One-shot wrapper around [`Solver::first_passage`].
pub fn first_passage(
    mu: &StepMeasure,
    x: &Word,
    y: &Word,
    avoid: &AvoidSet,
    tol: f64,
) -> Result<FpValue> {
    Solver::new(mu).first_passage(x, y, avoid, tol)
}

/// One-shot wrapper around [`Solver::escape_probability`].
pub fn escape_probability(mu: &StepMeasure, x: &Word, a: &AvoidSet, tol: f64) -> Result<FpValue> {
    Solver::new(mu).escape_probability(x, a, tol)
}

/// One-shot wrapper around [`Solver::chained_passage`].
pub fn chained_passage(
    mu: &StepMeasure,
    x: &Word,
    chain: &[AvoidSet],
    tol: f64,
) -> Result<FpValue> {
    Solver::new(mu).chained_passage(x, chain, tol)
}

/// The sequence `F(e, a_i^k)` for `k = 1..=k_max` with consecutive ratios.
#[derive(Debug, Clone)]
pub struct RatioSequence {
    pub generator: usize,
    /// `values[k-1]` brackets `F(e, a_i^k)`.
    pub values: Vec<Bracket>,
    /// `ratios[j]` brackets `values[j+1] / values[j]`; empty when only one
    /// value was requested.
    pub ratios: Vec<Bracket>,
    /// Index (1-based k) from which values come from the certified barrier
    /// recursion rather than direct evaluation; `None` if all direct.
    pub recursion_from: Option<usize>,
    /// Direct and recursive routes agreed within combined widths where
    /// both were computed.
    pub consistent: bool,
    pub converged: bool,
}

impl<'a> Solver<'a> {
    /// First-passage values along the geodesic of powers of `a_i` and their
    /// consecutive ratios.
    ///
    /// For powers-of-generators supports with the canonical barrier
    /// verified, values beyond `max_range + 1` are extended by the exact
    /// linear recursion `F(e, a^k) = Σ_j p_j F(e, a^{k-j})` with interval
    /// coefficients; otherwise every value is computed directly.
    pub fn fp_ratio_sequence(&self, generator: usize, k_max: usize, tol: f64) -> Result<RatioSequence> {
        let n = self.mu.max_range();
        if k_max < 1 {
            return Err(Error::BadParameter(alloc::string::String::from(
                "k_max must be at least 1",
            )));
        }
        if generator < 1 || generator > self.mu.rank() {
            return Err(Error::GeneratorOutOfRange { index: generator, rank: self.mu.rank() });
        }

        let class = crate::measure::classify(self.mu, crate::measure::default_search_radius(self.mu));
        let use_recursion = class.powers_of_generators
            && crate::barrier::is_barrier(
                self.mu,
                &crate::barrier::canonical_power_barrier(self.mu, generator)?,
                &Word::generator(generator),
            )?
            .verdict;

        let mut converged = true;
        let direct_upto = if use_recursion { (n + 1).min(k_max) } else { k_max };
        let mut values: Vec<Bracket> = Vec::with_capacity(k_max);
        for k in 1..=direct_upto {
            let fp = self.first_passage(
                &Word::identity(),
                &Word::power(generator, k as i32),
                &AvoidSet::empty(),
                tol,
            )?;
            converged &= fp.converged;
            values.push(fp.bracket());
        }

        let mut recursion_from = None;
        let mut consistent = true;
        if use_recursion && k_max > n {
            let p = crate::barrier::compute_p_vector(self.mu, generator, tol)?;
            let p_brackets: Vec<Bracket> = p.values.iter().map(FpValue::bracket).collect();
            converged &= p.values.iter().all(|v| v.converged);
            // Check the recursion against the directly computed overlap.
            for k in (n.max(2))..=direct_upto {
                let mut acc = Bracket::point(0.0);
                for (j, pj) in p_brackets.iter().enumerate() {
                    let idx = k as i64 - (j as i64 + 1);
                    let prev = match idx {
                        0 => Bracket::point(1.0),
                        i if i > 0 => values[(i - 1) as usize],
                        _ => continue,
                    };
                    acc = acc.add(pj.mul(prev));
                }
                if !acc.consistent_with(values[k - 1], 1e-9) {
                    consistent = false;
                }
            }
            if direct_upto < k_max {
                recursion_from = Some(direct_upto + 1);
            }
            for k in (direct_upto + 1)..=k_max {
                let mut acc = Bracket::point(0.0);
                for (j, pj) in p_brackets.iter().enumerate() {
                    let idx = k as i64 - (j as i64 + 1);
                    let prev = match idx {
                        0 => Bracket::point(1.0),
                        i if i > 0 => values[(i - 1) as usize],
                        _ => unreachable!("recursion only used for k > n"),
                    };
                    acc = acc.add(pj.mul(prev));
                }
                values.push(acc);
            }
        }

        let mut ratios = Vec::with_capacity(values.len().saturating_sub(1));
        for pair in values.windows(2) {
            if pair[0].lo <= 0.0 {
                ratios.push(Bracket::new(0.0, 1.0));
                converged = false;
            } else {
                ratios.push(pair[1].div(pair[0]));
            }
        }

        Ok(RatioSequence {
            generator,
            values,
            ratios,
            recursion_from,
            consistent,
            converged,
        })
    }
}

/// One-shot wrapper around [`Solver::fp_ratio_sequence`].
pub fn fp_ratio_sequence(
    mu: &StepMeasure,
    generator: usize,
    k_max: usize,
    tol: f64,
) -> Result<RatioSequence> {
    Solver::new(mu).fp_ratio_sequence(generator, k_max, tol)
}
