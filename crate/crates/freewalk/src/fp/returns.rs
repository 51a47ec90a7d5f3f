//! Excursion return matrices for the hanging subtrees of `F_m`.
//!
//! Fix a vertex `v` and a letter `δ` such that the tree step `v → v·δ`
//! points toward the region of interest. The branch behind `v` is
//! `T = { v·q : q reduced, first(q) ≠ δ }`, and it contains no target or
//! avoid state in every use below. A walk inside `T` either escapes to the
//! boundary within `T` or leaves `T`; because steps have length at most
//! `n`, the first position outside `T` is `v·w` for a reduced word `w`
//! with `first(w) = δ` and `|w| ≤ n`, and the excursion starts at a depth
//! `≤ n−1` inside `T`. Left-invariance makes the matrix
//!
//! `E_δ[q][w] = P(first exit from T at v·w | start at v·q)`
//!
//! independent of `v`. The matrices solve a monotone polynomial fixed
//! point (excursions into deeper branches are themselves described by the
//! same matrices); Kleene iteration from zero converges to the minimal
//! solution, which is the probabilistic one, so every iterate is a
//! certified lower bound.

use alloc::vec;
use alloc::vec::Vec;

use crate::measure::StepMeasure;
use crate::word::{Letter, Word, WordMap};

/// Reduced words with lengths in `lo..=hi` whose first letter satisfies
/// `first_ok`, in canonical order.
fn enumerate_relative(
    rank: usize,
    lo: usize,
    hi: usize,
    first_ok: impl Fn(Letter) -> bool,
) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer: Vec<Word> = vec![Word::identity()];
    for depth in 1..=hi {
        let mut next = Vec::new();
        for w in &layer {
            let forbidden = w.last_letter().map(Letter::inverse);
            for l in Letter::alphabet(rank) {
                if Some(l) == forbidden {
                    continue;
                }
                if depth == 1 && !first_ok(l) {
                    continue;
                }
                let mut grown = w.clone();
                grown.push_letter(l);
                next.push(grown);
            }
        }
        if depth >= lo {
            out.extend(next.iter().cloned());
        }
        layer = next;
    }
    if lo == 0 {
        out.insert(0, Word::identity());
    }
    out.sort();
    out
}

enum StepOutcome {
    /// The step left the subtree at this exit index.
    Exit(u32),
    /// The step stayed inside; continue from this state.
    Go(u32),
}

enum StateRow {
    /// Interior state at depth `≤ n−1`: one entry per support step.
    Pattern(Vec<(f64, StepOutcome)>),
    /// Excursion into a deeper branch: triples
    /// `(sub-entry state, sub-exit index, continuation state)`.
    Dive(Vec<(u32, u32, u32)>),
}

/// Return matrices `E_δ` for all `2m` directions, with iteration metadata.
pub(crate) struct Returns {
    rank: usize,
    range: usize,
    /// `exits[d]`: reduced words `w`, `1 ≤ |w| ≤ n`, `first(w) = δ_d`.
    exits: Vec<Vec<Word>>,
    exit_index: Vec<WordMap<u32>>,
    /// `patterns[d]`: reduced words `q`, `|q| ≤ n−1`, `first(q) ≠ δ_d`.
    pattern_state: Vec<WordMap<u32>>,
    /// Flattened state values: `values[state][exit-of-its-direction]`.
    values: Vec<Vec<f64>>,
    state_dir: Vec<u32>,
    pub sweeps: u64,
    pub final_delta: f64,
    pub tail_estimate: f64,
    pub converged: bool,
}

impl Returns {
    pub fn direction_count(&self) -> usize {
        2 * self.rank
    }

    pub fn exits(&self, dir: u32) -> &[Word] {
        &self.exits[dir as usize]
    }

    /// Row of `E_δ` for an entry pattern `q` (`|q| ≤ n−1`, `first(q) ≠ δ`).
    pub fn row(&self, dir: u32, pattern: &Word) -> &[f64] {
        let state = self.pattern_state[dir as usize]
            .get(pattern)
            .copied()
            .expect("entry pattern within collar depth");
        &self.values[state as usize]
    }

    /// Computes the return matrices for `μ` by Kleene iteration.
    pub fn compute(mu: &StepMeasure, sweep_cap: u64) -> Returns {
        let rank = mu.rank();
        let n = mu.max_range();
        let dirs = 2 * rank;
        let support: Vec<(Word, f64)> =
            mu.entries().map(|(w, p)| (w.clone(), p)).collect();

        let mut exits = Vec::with_capacity(dirs);
        let mut exit_index = Vec::with_capacity(dirs);
        let mut state_words: Vec<Vec<Word>> = Vec::with_capacity(dirs);
        for d in 0..dirs {
            let delta = Letter::from_code(d as u32);
            let ex = enumerate_relative(rank, 1, n, |l| l == delta);
            let mut idx = WordMap::new();
            for (i, w) in ex.iter().enumerate() {
                idx.insert(w.clone(), i as u32);
            }
            exits.push(ex);
            exit_index.push(idx);
            // Interior states: depths 0..=n−1 directly, n..=2n−1 as dives.
            state_words.push(enumerate_relative(rank, 0, 2 * n - 1, |l| l != delta));
        }

        // Flatten (direction, relative word) into global state ids.
        let mut state_dir = Vec::new();
        let mut state_id: Vec<WordMap<u32>> = vec![WordMap::new(); dirs];
        let mut flat_words: Vec<Word> = Vec::new();
        for d in 0..dirs {
            for w in &state_words[d] {
                state_id[d].insert(w.clone(), state_dir.len() as u32);
                state_dir.push(d as u32);
                flat_words.push(w.clone());
            }
        }

        let mut pattern_state: Vec<WordMap<u32>> = vec![WordMap::new(); dirs];
        for d in 0..dirs {
            for (w, &id) in &state_id[d] {
                if w.len() <= n.saturating_sub(1) {
                    pattern_state[d].insert(w.clone(), id);
                }
            }
        }

        let classify = |d: usize, u: &Word| -> StepOutcome {
            let delta = Letter::from_code(d as u32);
            if u.first_letter() == Some(delta) {
                StepOutcome::Exit(exit_index[d][u])
            } else {
                StepOutcome::Go(state_id[d][u])
            }
        };

        let mut rows: Vec<StateRow> = Vec::with_capacity(state_dir.len());
        for (id, word) in flat_words.iter().enumerate() {
            let d = state_dir[id] as usize;
            if word.len() < n || n == 0 {
                let mut row = Vec::with_capacity(support.len());
                for (s, p) in &support {
                    row.push((*p, classify(d, &word.mul(s))));
                }
                rows.push(StateRow::Pattern(row));
            } else {
                // Depth n..2n−1: excursion below the relative gate
                // `g = prefix_n(word)` typed by the direction back up.
                let gate = word.prefix(n);
                let tail = word.suffix(n);
                let sub_dir =
                    gate.last_letter().expect("gate is nonempty").inverse().code() as usize;
                let entry = state_id[sub_dir][&tail];
                let mut triples = Vec::new();
                for w_prime in &exits[sub_dir] {
                    let wi = exit_index[sub_dir][w_prime];
                    let landing = gate.mul(w_prime);
                    let cont = match classify(d, &landing) {
                        StepOutcome::Go(id) => id,
                        StepOutcome::Exit(_) => {
                            unreachable!("returns from a deeper branch stay inside")
                        }
                    };
                    triples.push((entry, wi, cont));
                }
                rows.push(StateRow::Dive(triples));
            }
        }

        let n_states = state_dir.len();
        let mut values: Vec<Vec<f64>> = (0..n_states)
            .map(|i| vec![0.0; exits[state_dir[i] as usize].len()])
            .collect();
        let mut scratch = values.clone();

        let mut sweeps = 0u64;
        let mut delta = f64::INFINITY;
        let mut prev_delta = f64::INFINITY;
        let mut stall = 0u32;
        let floor = 1e-16;
        while sweeps < sweep_cap {
            delta = 0.0;
            for (i, row) in rows.iter().enumerate() {
                let dim = values[i].len();
                let out = &mut scratch[i];
                out.iter_mut().for_each(|v| *v = 0.0);
                match row {
                    StateRow::Pattern(steps) => {
                        for (p, outcome) in steps {
                            match outcome {
                                StepOutcome::Exit(wi) => out[*wi as usize] += p,
                                StepOutcome::Go(id) => {
                                    let src = &values[*id as usize];
                                    for w in 0..dim {
                                        out[w] += p * src[w];
                                    }
                                }
                            }
                        }
                    }
                    StateRow::Dive(triples) => {
                        for &(entry, wi, cont) in triples {
                            let weight = values[entry as usize][wi as usize];
                            if weight == 0.0 {
                                continue;
                            }
                            let src = &values[cont as usize];
                            for w in 0..dim {
                                out[w] += weight * src[w];
                            }
                        }
                    }
                }
                for w in 0..dim {
                    let d_abs = libm::fabs(out[w] - values[i][w]);
                    if d_abs > delta {
                        delta = d_abs;
                    }
                }
            }
            core::mem::swap(&mut values, &mut scratch);
            sweeps += 1;
            if delta < floor {
                break;
            }
            if delta >= prev_delta {
                stall += 1;
                if stall > 64 {
                    break;
                }
            } else {
                stall = 0;
            }
            prev_delta = delta;
        }

        let rate = if prev_delta.is_finite() && prev_delta > 0.0 {
            (delta / prev_delta).clamp(0.0, 0.9999)
        } else {
            0.5
        };
        let tail_estimate = if delta.is_finite() {
            delta * rate / (1.0 - rate)
        } else {
            1.0
        };
        let converged = delta < 1e-13;

        Returns {
            rank,
            range: n,
            exits,
            exit_index,
            pattern_state,
            values,
            state_dir,
            sweeps,
            final_delta: delta,
            tail_estimate,
            converged,
        }
    }

    pub fn range(&self) -> usize {
        self.range
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn nn_returns_match_scalar_oracle() {
        // For a range-1 walk the single-pattern exit probability is the
        // first-passage value F(e, δ) of the scalar oracle.
        let mu = presets::nn_uniform_f2();
        let returns = Returns::compute(&mu, 200_000);
        assert!(returns.converged);
        let oracle = crate::fp::nn_exact_first_passage(&mu).unwrap();
        for d in 0..returns.direction_count() {
            let row = returns.row(d as u32, &Word::identity());
            assert_eq!(row.len(), 1);
            let delta = Letter::from_code(d as u32);
            let expected = oracle[&Word::letter(delta)];
            assert!(
                (row[0] - expected).abs() < 1e-12,
                "direction {d}: {} vs {}",
                row[0],
                expected
            );
        }
    }

    #[test]
    fn exit_rows_are_substochastic() {
        for mu in [presets::powers_n2_f2(), presets::example_2_8(), presets::example_4_1_antisym()] {
            let returns = Returns::compute(&mu, 200_000);
            assert!(returns.converged);
            for d in 0..returns.direction_count() as u32 {
                for (q, &_state) in &returns.pattern_state[d as usize] {
                    let total: f64 = returns.row(d, q).iter().sum();
                    assert!(total <= 1.0 + 1e-12, "row sum {total} for dir {d} pattern {q}");
                    assert!(total > 0.0);
                }
            }
        }
    }
}
