//! Finitely supported step measures `μ` on `F_m` and their classification.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::word::{Letter, Word, WordMap};
use crate::{Error, Result};

/// Tolerance for the total-mass check; probabilities must sum to 1 within this.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A finitely supported probability measure on nonidentity reduced words.
///
/// Validation is strict: words must be reduced and distinct, probabilities
/// positive, and the total mass 1 within [`MASS_TOLERANCE`]. No
/// renormalization is performed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    rank: usize,
    entries: WordMap<f64>,
    max_range: usize,
}

impl StepMeasure {
    /// Validates and builds a step measure of the given rank.
    pub fn new(rank: usize, entries: Vec<(Word, f64)>) -> Result<StepMeasure> {
        if rank < 2 {
            return Err(Error::InvalidMeasure(String::from("rank must be at least 2")));
        }
        let mut map = WordMap::new();
        let mut total = 0.0f64;
        for (word, prob) in entries {
            if word.is_identity() {
                return Err(Error::InvalidMeasure(String::from(
                    "support word is the identity",
                )));
            }
            if word.max_generator() > rank {
                return Err(Error::GeneratorOutOfRange {
                    index: word.max_generator(),
                    rank,
                });
            }
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(Error::InvalidMeasure(alloc::format!(
                    "probability {prob} for `{word}` not in (0, 1]"
                )));
            }
            total += prob;
            if map.insert(word.clone(), prob).is_some() {
                return Err(Error::InvalidMeasure(alloc::format!(
                    "duplicate support word `{word}`"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidMeasure(String::from("empty support")));
        }
        if libm::fabs(total - 1.0) > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(alloc::format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let max_range = map.keys().map(Word::len).max().unwrap_or(0);
        Ok(StepMeasure { rank, entries: map, max_range })
    }

    /// Rank `m` of the ambient free group.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Maximal word length in the support.
    pub fn max_range(&self) -> usize {
        self.max_range
    }

    /// Probability of one step `w`, or 0 if `w` is not in the support.
    pub fn prob(&self, w: &Word) -> f64 {
        self.entries.get(w).copied().unwrap_or(0.0)
    }

    /// Support words with their probabilities, in canonical word order.
    pub fn entries(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.entries.iter().map(|(w, &p)| (w, p))
    }

    /// Support words in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.entries.keys()
    }

    /// Number of support words.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Pushforward `s_*(μ)` under the endomorphism given by generator images.
    ///
    /// Fails if two support words collide under `s` (the pushforward would
    /// need mass aggregation) or if an image is the identity.
    pub fn pushforward(&self, images: &[Word]) -> Result<StepMeasure> {
        let mut moved = Vec::new();
        for (w, p) in self.entries() {
            moved.push((crate::word::apply_endomorphism(images, w)?, p));
        }
        StepMeasure::new(self.rank, moved)
    }

    /// Largest exponent in the support restricted to powers of `a_i`,
    /// or 0 when no such power occurs.
    pub fn power_range(&self, generator: usize) -> usize {
        self.entries
            .keys()
            .filter_map(|w| match w.runs() {
                [run] if run.generator as usize == generator => {
                    Some(run.exponent.unsigned_abs() as usize)
                }
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Outcome of the bounded admissibility search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    /// Every single letter was reached as a product of support words.
    Verified,
    /// Some generator index never occurs in the support, so its letters
    /// can never be reached.
    Failed,
    /// The bounded closure neither reached all letters nor ruled them out.
    Inconclusive,
}

/// Structural classification of a step measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureClass {
    /// `μ(g) = μ(g^{-1})` on the support.
    pub symmetric: bool,
    /// `μ(g) = μ(ĝ)` for the automorphism `a_i ↦ a_i^{-1}`.
    pub antisymmetric: bool,
    /// Every support word is a pure power `a_i^j`.
    pub powers_of_generators: bool,
    /// Verdict of the bounded semigroup-closure admissibility check.
    pub admissible: Admissibility,
}

/// Default closure radius used by pipelines: `3·max_range + 3`.
pub fn default_search_radius(mu: &StepMeasure) -> usize {
    3 * mu.max_range() + 3
}

/// Classifies `μ`: symmetry, antisymmetry, powers shape, admissibility.
///
/// Admissibility is checked semi-decidably: the semigroup generated by the
/// support is closed within the ball of `search_radius`; if every single
/// letter appears the verdict is `Verified`. A generator index absent from
/// the whole support makes its letters unreachable (products never introduce
/// new indices), which yields `Failed`; anything else is `Inconclusive`.
pub fn classify(mu: &StepMeasure, search_radius: usize) -> MeasureClass {
    let prob_eq = |a: f64, b: f64| libm::fabs(a - b) <= 1e-15;

    let mut symmetric = true;
    let mut antisymmetric = true;
    let mut powers = true;
    for (w, p) in mu.entries() {
        if !prob_eq(mu.prob(&w.inverse()), p) {
            symmetric = false;
        }
        if !prob_eq(mu.prob(&w.hat()), p) {
            antisymmetric = false;
        }
        if w.runs().len() != 1 {
            powers = false;
        }
    }

    let mut used_indices = BTreeSet::new();
    for w in mu.support() {
        for r in w.runs() {
            used_indices.insert(r.generator as usize);
        }
    }
    let admissible = if (1..=mu.rank()).any(|i| !used_indices.contains(&i)) {
        Admissibility::Failed
    } else {
        bounded_closure_verdict(mu, search_radius)
    };

    MeasureClass { symmetric, antisymmetric, powers_of_generators: powers, admissible }
}

fn bounded_closure_verdict(mu: &StepMeasure, search_radius: usize) -> Admissibility {
    let radius = search_radius.max(mu.max_range());
    let mut closure: BTreeSet<Word> = mu.support().cloned().collect();
    let mut frontier: Vec<Word> = closure.iter().cloned().collect();
    while let Some(next) = {
        let mut added = Vec::new();
        for w in &frontier {
            for s in mu.support() {
                let prod = w.mul(s);
                if prod.len() <= radius && !prod.is_identity() && !closure.contains(&prod) {
                    added.push(prod);
                }
            }
        }
        if added.is_empty() { None } else { Some(added) }
    } {
        for w in &next {
            closure.insert(w.clone());
        }
        frontier = next;
    }
    let all_letters = Letter::alphabet(mu.rank()).all(|l| closure.contains(&Word::letter(l)));
    if all_letters {
        Admissibility::Verified
    } else {
        Admissibility::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn word(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    #[test]
    fn uniform_nn_valid() {
        let mu = presets::nn_uniform_f2();
        assert_eq!(mu.max_range(), 1);
        assert_eq!(mu.support_size(), 4);
        let class = classify(&mu, default_search_radius(&mu));
        assert!(class.symmetric);
        assert!(class.antisymmetric);
        assert!(class.powers_of_generators);
        assert_eq!(class.admissible, Admissibility::Verified);
    }

    #[test]
    fn bad_total_mass_rejected() {
        let entries = alloc::vec![
            (word("a1"), 0.45),
            (word("a1^-1"), 0.45),
        ];
        assert!(matches!(
            StepMeasure::new(2, entries),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn identity_and_duplicates_rejected() {
        let entries = alloc::vec![(Word::identity(), 1.0)];
        assert!(StepMeasure::new(2, entries).is_err());
        let entries = alloc::vec![
            (word("a1 a1^-1 a2"), 0.5),
            (word("a2"), 0.5),
        ];
        assert!(matches!(
            StepMeasure::new(2, entries),
            Err(Error::InvalidMeasure(msg)) if msg.contains("duplicate")
        ));
    }

    #[test]
    fn example_28_classification() {
        let mu = presets::example_2_8();
        assert_eq!(mu.max_range(), 2);
        let class = classify(&mu, 4);
        assert!(class.symmetric);
        // hat(a1 a2) = a1^-1 a2^-1 is not in the support.
        assert!(!class.antisymmetric);
        assert!(!class.powers_of_generators);
        // a2 = a1^-1 · (a1 a2) lies in the bounded closure.
        assert_eq!(class.admissible, Admissibility::Verified);
    }

    #[test]
    fn single_generator_support_fails_admissibility() {
        let entries = alloc::vec![(word("a1"), 0.5), (word("a1^-1"), 0.5)];
        let mu = StepMeasure::new(2, entries).unwrap();
        let class = classify(&mu, 6);
        assert_eq!(class.admissible, Admissibility::Failed);
    }

    #[test]
    fn classification_invariant_under_generator_permutation() {
        let mu = presets::example_4_1_antisym();
        // Swap a1 and a2 everywhere.
        let swapped: Vec<(Word, f64)> = mu
            .entries()
            .map(|(w, p)| {
                let mapped = Word::from_letters(w.letters().map(|l| {
                    Letter::new(3 - l.generator_index(), l.exponent_sign() > 0)
                }));
                (mapped, p)
            })
            .collect();
        let nu = StepMeasure::new(2, swapped).unwrap();
        let r = default_search_radius(&mu);
        assert_eq!(classify(&mu, r), classify(&nu, r));
    }

    #[test]
    fn antisymmetric_example() {
        let mu = presets::example_4_1_antisym();
        let class = classify(&mu, default_search_radius(&mu));
        assert!(class.antisymmetric);
        assert!(!class.symmetric);
        assert!(!class.powers_of_generators);
        assert_eq!(class.admissible, Admissibility::Verified);
    }

    #[test]
    fn pushforward_example_42() {
        // s : a ↦ a, b ↦ a^-1 b sends the Example 2.8 support to the
        // nearest-neighbour support.
        let mu = presets::example_2_8();
        let images = alloc::vec![word("a1"), word("a1^-1 a2")];
        let pushed = mu.pushforward(&images).unwrap();
        assert_eq!(pushed.max_range(), 1);
        assert_eq!(pushed, presets::nn_uniform_f2());
    }
}
