//! Absorbing-chain evaluation of restricted first-passage probabilities.
//!
//! For a query `F(e, y; S)` the state space is the ball of a chosen depth
//! `D` around the tree hull of `{e, y} ∪ S` (the hull is prefix-closed, so
//! the depth of any word is its length minus its longest hull prefix).
//! Branches hanging deeper than `D` carry no target or avoid state; a jump
//! into such a branch is resolved through the excursion return matrices of
//! [`super::returns`], which under-approximate the true return kernel and
//! keep every iterate a certified lower bound. Value iteration runs in
//! Jacobi order from zero, so sweeps are monotone and deterministic.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::measure::StepMeasure;
use crate::word::{Word, WordMap};

use super::returns::Returns;

pub(crate) struct ChainOutcome {
    pub lower: f64,
    pub tail: f64,
    pub sweeps: u64,
    pub converged: bool,
}

struct Row {
    base: f64,
    terms: Vec<(u32, f64)>,
}

enum Target {
    Win,
    Dead,
    State(u32),
}

struct ChainBuilder<'a> {
    support: &'a [(Word, f64)],
    returns: &'a Returns,
    target: &'a Word,
    avoid: &'a BTreeSet<Word>,
    hull: BTreeSet<Word>,
    depth_cap: usize,
    micro_id: WordMap<u32>,
    gate_id: WordMap<u32>,
    words: Vec<Word>,
    rows: Vec<Option<Row>>,
    pending: Vec<u32>,
}

impl<'a> ChainBuilder<'a> {
    fn hull_depth(&self, z: &Word) -> usize {
        // Longest prefix of z inside the prefix-closed hull.
        let mut best = 0;
        for k in (0..=z.len()).rev() {
            if self.hull.contains(&z.prefix(k)) {
                best = k;
                break;
            }
        }
        z.len() - best
    }

    fn classify(&mut self, z: Word) -> Target {
        if z == *self.target {
            return Target::Win;
        }
        if self.avoid.contains(&z) {
            return Target::Dead;
        }
        if let Some(&id) = self.micro_id.get(&z) {
            return Target::State(id);
        }
        debug_assert!(self.hull_depth(&z) > self.depth_cap, "micro state missing from index");
        // Beyond the micro ball: the state is a point of a hanging branch;
        // key it by its full word (gate and pattern are recovered lazily).
        if let Some(&id) = self.gate_id.get(&z) {
            return Target::State(id);
        }
        let id = self.words.len() as u32;
        self.gate_id.insert(z.clone(), id);
        self.words.push(z);
        self.rows.push(None);
        self.pending.push(id);
        Target::State(id)
    }

    fn build_micro_row(&mut self, z: &Word) -> Row {
        let mut row = Row { base: 0.0, terms: Vec::with_capacity(self.support.len()) };
        for k in 0..self.support.len() {
            let (s, p) = (self.support[k].0.clone(), self.support[k].1);
            match self.classify(z.mul(&s)) {
                Target::Win => row.base += p,
                Target::Dead => {}
                Target::State(id) => row.terms.push((id, p)),
            }
        }
        row
    }

    fn build_gate_row(&mut self, z: &Word) -> Row {
        let depth = self.hull_depth(z);
        let gate_len = z.len() - depth + self.depth_cap + 1;
        let gate = z.prefix(gate_len);
        let pattern = z.suffix(gate_len);
        let dir = gate
            .last_letter()
            .expect("gate words are nonempty")
            .inverse()
            .code();
        let coeffs: Vec<f64> = self.returns.row(dir, &pattern).to_vec();
        let exits: Vec<Word> = self.returns.exits(dir).to_vec();
        let mut row = Row { base: 0.0, terms: Vec::new() };
        for (w, &c) in exits.iter().zip(coeffs.iter()) {
            if c == 0.0 {
                continue;
            }
            match self.classify(gate.mul(w)) {
                Target::Win => row.base += c,
                Target::Dead => {}
                Target::State(id) => row.terms.push((id, c)),
            }
        }
        row
    }
}

/// Evaluates `F(e, target; avoid)` on the reduced chain at micro depth
/// `depth_cap`, sweeping until the Jacobi delta drops below `sweep_tol`.
pub(crate) fn hitting_probability(
    mu: &StepMeasure,
    returns: &Returns,
    target: &Word,
    avoid: &BTreeSet<Word>,
    depth_cap: usize,
    sweep_tol: f64,
    sweep_cap: u64,
) -> ChainOutcome {
    debug_assert!(!avoid.contains(target));
    debug_assert!(!target.is_identity());
    debug_assert!(!avoid.contains(&Word::identity()));

    // Prefix-closed hull of {e, target} ∪ avoid.
    let mut hull = BTreeSet::new();
    for k in 0..=target.len() {
        hull.insert(target.prefix(k));
    }
    for a in avoid {
        for k in 0..=a.len() {
            hull.insert(a.prefix(k));
        }
    }

    // Micro states: ball of depth_cap around the hull, enumerated by
    // outward tree expansion; canonical order for determinism.
    let mut micro: BTreeSet<Word> = hull.clone();
    let mut layer: Vec<Word> = hull.iter().cloned().collect();
    for _ in 0..depth_cap {
        let mut next = Vec::new();
        for w in &layer {
            for l in crate::word::Letter::alphabet(mu.rank()) {
                let mut grown = w.clone();
                grown.push_letter(l);
                if !micro.contains(&grown) {
                    micro.insert(grown.clone());
                    next.push(grown);
                }
            }
        }
        layer = next;
    }

    let support: Vec<(Word, f64)> = mu.entries().map(|(w, p)| (w.clone(), p)).collect();
    let mut builder = ChainBuilder {
        support: &support,
        returns,
        target,
        avoid,
        hull,
        depth_cap,
        micro_id: WordMap::new(),
        gate_id: WordMap::new(),
        words: Vec::new(),
        rows: Vec::new(),
        pending: Vec::new(),
    };

    let mut start_id = None;
    for z in &micro {
        if z == target || avoid.contains(z) {
            continue;
        }
        let id = builder.words.len() as u32;
        builder.micro_id.insert(z.clone(), id);
        builder.words.push(z.clone());
        builder.rows.push(None);
        if z.is_identity() {
            start_id = Some(id);
        }
    }
    let start_id = start_id.expect("identity is a live micro state");

    // Rows for micro states first, then lazily discovered gate states.
    for id in 0..builder.rows.len() as u32 {
        if builder.rows[id as usize].is_none() {
            let z = builder.words[id as usize].clone();
            let row = builder.build_micro_row(&z);
            builder.rows[id as usize] = Some(row);
        }
    }
    while let Some(id) = builder.pending.pop() {
        let z = builder.words[id as usize].clone();
        let row = builder.build_gate_row(&z);
        builder.rows[id as usize] = Some(row);
    }

    let rows: Vec<Row> = builder.rows.into_iter().map(Option::unwrap).collect();
    let n_states = rows.len();

    let mut values = vec![0.0f64; n_states];
    let mut scratch = vec![0.0f64; n_states];
    let mut sweeps = 0u64;
    let mut delta = f64::INFINITY;
    let mut prev_delta = f64::INFINITY;
    let mut stall = 0u32;
    let floor = 5e-17;
    let threshold = sweep_tol.max(floor);
    while sweeps < sweep_cap {
        delta = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let mut v = row.base;
            for &(j, p) in &row.terms {
                v += p * values[j as usize];
            }
            let d_abs = libm::fabs(v - values[i]);
            if d_abs > delta {
                delta = d_abs;
            }
            scratch[i] = v;
        }
        core::mem::swap(&mut values, &mut scratch);
        sweeps += 1;
        if delta < threshold {
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
    let iter_tail = if delta.is_finite() { delta * rate / (1.0 - rate) } else { 1.0 };
    let tail = iter_tail + 10.0 * returns.tail_estimate + 1e-15;

    ChainOutcome {
        lower: values[start_id as usize],
        tail,
        sweeps,
        converged: delta <= threshold,
    }
}
