//! Reduced words of the free group `F_m`.
//!
//! Words are stored as runs `(generator, signed exponent)` so that powers
//! `a_i^k` stay O(1)-sized; barriers and the geodesics of powers live on
//! such words. All operations keep words fully reduced.
//!
//! Grammar (canonical, bit-exact): tokens separated by single spaces,
//! `a<k>` for generator `k`, `a<k>^<e>` with a nonzero signed integer `e`,
//! and the single token `e` for the identity.

use alloc::collections::btree_map::BTreeMap;
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::{Error, Result};

/// A single letter `a_i^{±1}` of the alphabet of `F_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    code: u32,
}

impl Letter {
    /// Builds a letter from a 1-based generator index and an exponent sign.
    pub fn new(generator_index: usize, positive: bool) -> Letter {
        debug_assert!(generator_index >= 1);
        Letter {
            code: ((generator_index - 1) as u32) << 1 | u32::from(!positive),
        }
    }

    pub(crate) fn from_code(code: u32) -> Letter {
        Letter { code }
    }

    pub(crate) fn code(self) -> u32 {
        self.code
    }

    /// 1-based generator index.
    pub fn generator_index(self) -> usize {
        (self.code >> 1) as usize + 1
    }

    /// `+1` or `-1`.
    pub fn exponent_sign(self) -> i32 {
        if self.code & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// The inverse letter.
    pub fn inverse(self) -> Letter {
        Letter { code: self.code ^ 1 }
    }

    /// Image under the automorphism `a_i ↦ a_i^{-1}`.
    pub fn hat(self) -> Letter {
        self.inverse()
    }

    /// All `2m` letters of `F_m`, in code order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
        (0..(2 * rank) as u32).map(Letter::from_code)
    }
}

/// One run of a reduced word: `generator^exponent` with a nonzero exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    /// 1-based generator index.
    pub generator: u16,
    /// Nonzero signed exponent.
    pub exponent: i32,
}

/// A reduced word of `F_m`; the empty word is the identity `e`.
///
/// Invariant: adjacent runs use distinct generators and every exponent is
/// nonzero, so the letter sequence is reduced and the representation is
/// canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    runs: Vec<Run>,
}

impl Word {
    /// The identity `e`.
    pub fn identity() -> Word {
        Word { runs: Vec::new() }
    }

    /// The single letter `a_i` (1-based index).
    pub fn generator(index: usize) -> Word {
        Word::power(index, 1)
    }

    /// The power `a_i^k`; `k = 0` gives the identity.
    pub fn power(index: usize, k: i32) -> Word {
        debug_assert!(index >= 1 && index <= u16::MAX as usize);
        if k == 0 {
            return Word::identity();
        }
        Word {
            runs: alloc::vec![Run { generator: index as u16, exponent: k }],
        }
    }

    /// Builds a word from a single letter.
    pub fn letter(l: Letter) -> Word {
        Word::power(l.generator_index(), l.exponent_sign())
    }

    /// Builds the reduced word equal to the product of the given letters.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut w = Word::identity();
        for l in letters {
            w.push_letter(l);
        }
        w
    }

    pub(crate) fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// Word length `|w| = d_w(e, w)`.
    pub fn len(&self) -> usize {
        self.runs.iter().map(|r| r.exponent.unsigned_abs() as usize).sum()
    }

    /// True iff this is the identity.
    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    /// Iterates over the letters of the reduced representation.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.runs.iter().flat_map(|r| {
            let l = Letter::new(r.generator as usize, r.exponent > 0);
            (0..r.exponent.unsigned_abs()).map(move |_| l)
        })
    }

    /// First letter, if any.
    pub fn first_letter(&self) -> Option<Letter> {
        self.runs
            .first()
            .map(|r| Letter::new(r.generator as usize, r.exponent > 0))
    }

    /// Last letter, if any.
    pub fn last_letter(&self) -> Option<Letter> {
        self.runs
            .last()
            .map(|r| Letter::new(r.generator as usize, r.exponent > 0))
    }

    /// Appends one letter, cancelling if it inverts the current last letter.
    pub fn push_letter(&mut self, l: Letter) {
        let generator = l.generator_index() as u16;
        let delta = l.exponent_sign();
        if let Some(last) = self.runs.last_mut() {
            if last.generator == generator {
                last.exponent += delta;
                if last.exponent == 0 {
                    self.runs.pop();
                }
                return;
            }
        }
        self.runs.push(Run { generator, exponent: delta });
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    /// In-place reduced product.
    pub fn mul_assign(&mut self, other: &Word) {
        for &run in &other.runs {
            match self.runs.last_mut() {
                Some(last) if last.generator == run.generator => {
                    let sum = last.exponent + run.exponent;
                    if sum == 0 {
                        self.runs.pop();
                    } else {
                        last.exponent = sum;
                    }
                }
                _ => self.runs.push(run),
            }
        }
    }

    /// The inverse word.
    pub fn inverse(&self) -> Word {
        Word {
            runs: self
                .runs
                .iter()
                .rev()
                .map(|r| Run { generator: r.generator, exponent: -r.exponent })
                .collect(),
        }
    }

    /// Image under the automorphism defined by `a_i ↦ a_i^{-1}`.
    ///
    /// This negates every exponent in place (no reversal); it is an
    /// involution and preserves word length.
    pub fn hat(&self) -> Word {
        Word {
            runs: self
                .runs
                .iter()
                .map(|r| Run { generator: r.generator, exponent: -r.exponent })
                .collect(),
        }
    }

    /// Prefix consisting of the first `k` letters (`k ≤ |w|`).
    pub fn prefix(&self, k: usize) -> Word {
        debug_assert!(k <= self.len());
        let mut out = Vec::new();
        let mut left = k;
        for r in &self.runs {
            if left == 0 {
                break;
            }
            let take = left.min(r.exponent.unsigned_abs() as usize);
            let signed = if r.exponent > 0 { take as i32 } else { -(take as i32) };
            out.push(Run { generator: r.generator, exponent: signed });
            left -= take;
        }
        Word { runs: out }
    }

    /// Suffix after removing the first `k` letters.
    pub fn suffix(&self, k: usize) -> Word {
        debug_assert!(k <= self.len());
        let mut out = Vec::new();
        let mut skip = k;
        for r in &self.runs {
            let run_len = r.exponent.unsigned_abs() as usize;
            if skip >= run_len {
                skip -= run_len;
                continue;
            }
            let take = run_len - skip;
            let signed = if r.exponent > 0 { take as i32 } else { -(take as i32) };
            out.push(Run { generator: r.generator, exponent: signed });
            skip = 0;
        }
        Word { runs: out }
    }

    /// Length of the longest common prefix with `other`, in letters.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        let mut n = 0usize;
        let mut it_a = self.letters();
        let mut it_b = other.letters();
        loop {
            match (it_a.next(), it_b.next()) {
                (Some(a), Some(b)) if a == b => n += 1,
                _ => return n,
            }
        }
    }

    /// True iff `self` is a prefix of `other` as reduced words.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len() <= other.len() && self.common_prefix_len(other) == self.len()
    }

    /// Tree (word) distance `d_w(self, other)`.
    pub fn distance(&self, other: &Word) -> usize {
        let c = self.common_prefix_len(other);
        self.len() + other.len() - 2 * c
    }

    /// Total order: by length, then lexicographically on letter codes.
    ///
    /// Used for deterministic tie-breaking in breadth-first searches.
    pub fn length_lex_cmp(&self, other: &Word) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters().map(Letter::code).cmp(other.letters().map(Letter::code)))
    }

    /// Largest generator index used, or 0 for the identity.
    pub fn max_generator(&self) -> usize {
        self.runs.iter().map(|r| r.generator as usize).max().unwrap_or(0)
    }

    /// Parses a word in the grammar above, validating indices against `rank`.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::WordSyntax(String::from("empty input")));
        }
        if trimmed == "e" {
            return Ok(Word::identity());
        }
        let mut word = Word::identity();
        for token in trimmed.split_whitespace() {
            let rest = token.strip_prefix('a').ok_or_else(|| {
                Error::WordSyntax(alloc::format!("token `{token}` must start with `a`"))
            })?;
            let (idx_text, exp_text) = match rest.split_once('^') {
                Some((i, e)) => (i, Some(e)),
                None => (rest, None),
            };
            let index: usize = idx_text.parse().map_err(|_| {
                Error::WordSyntax(alloc::format!("bad generator index in `{token}`"))
            })?;
            if index < 1 || index > rank {
                return Err(Error::GeneratorOutOfRange { index, rank });
            }
            let exponent: i32 = match exp_text {
                None => 1,
                Some(e) => e.parse().map_err(|_| {
                    Error::WordSyntax(alloc::format!("bad exponent in `{token}`"))
                })?,
            };
            if exponent == 0 {
                return Err(Error::WordSyntax(alloc::format!(
                    "zero exponent in `{token}`"
                )));
            }
            word.mul_assign(&Word::power(index, exponent));
        }
        Ok(word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("e");
        }
        for (i, r) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if r.exponent == 1 {
                write!(f, "a{}", r.generator)?;
            } else {
                write!(f, "a{}^{}", r.generator, r.exponent)?;
            }
        }
        Ok(())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length_lex_cmp(other)
    }
}

/// The shadow `C_fin(g) = { gx : |gx| = |g| + |x| }` of a nonidentity `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shadow {
    root: Word,
}

impl Shadow {
    /// Builds the `g`-shadow; rejects the identity.
    pub fn new(root: Word) -> Result<Shadow> {
        if root.is_identity() {
            return Err(Error::IdentityNotAllowed("shadow root"));
        }
        Ok(Shadow { root })
    }

    pub fn root(&self) -> &Word {
        &self.root
    }

    /// Membership test: `h ∈ C_fin(g)` iff `g` is a prefix of `h`.
    pub fn contains(&self, h: &Word) -> bool {
        self.root.is_prefix_of(h)
    }
}

/// `h ∈ C_fin(g)`? Rejects `g = e`.
pub fn in_shadow(h: &Word, g: &Word) -> Result<bool> {
    if g.is_identity() {
        return Err(Error::IdentityNotAllowed("shadow root"));
    }
    Ok(g.is_prefix_of(h))
}

/// Applies the endomorphism sending `a_i` to `images[i-1]` to `w`.
///
/// The extension is multiplicative: inverse letters map to inverse images,
/// and the result is fully reduced.
pub fn apply_endomorphism(images: &[Word], w: &Word) -> Result<Word> {
    let needed = w.max_generator();
    if needed > images.len() {
        return Err(Error::GeneratorOutOfRange { index: needed, rank: images.len() });
    }
    let mut out = Word::identity();
    for l in w.letters() {
        let img = &images[l.generator_index() - 1];
        if l.exponent_sign() > 0 {
            out.mul_assign(img);
        } else {
            out.mul_assign(&img.inverse());
        }
    }
    Ok(out)
}

/// Streaming enumeration of the metric ball `B(center, radius)`.
///
/// Yields `center · q` over all reduced words `q` with `|q| ≤ radius`,
/// in breadth-first order (`center` first). Left-invariance of the word
/// metric makes this exactly the ball.
pub fn ball(center: &Word, radius: usize, rank: usize) -> BallIter {
    let mut queue = VecDeque::new();
    queue.push_back((center.clone(), Word::identity(), 0));
    BallIter { rank, radius, queue }
}

/// Iterator produced by [`ball`].
pub struct BallIter {
    rank: usize,
    radius: usize,
    // (center·q, relative word q, |q|)
    queue: VecDeque<(Word, Word, usize)>,
}

impl Iterator for BallIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let (abs, rel, depth) = self.queue.pop_front()?;
        if depth < self.radius {
            let forbidden = rel.last_letter().map(Letter::inverse);
            for l in Letter::alphabet(self.rank) {
                if Some(l) == forbidden {
                    continue;
                }
                let mut rel_next = rel.clone();
                rel_next.push_letter(l);
                let mut abs_next = abs.clone();
                abs_next.push_letter(l);
                self.queue.push_back((abs_next, rel_next, depth + 1));
            }
        }
        Some(abs)
    }
}

/// All vertices of the tree geodesic from `from` to `to`, inclusive.
pub fn geodesic(from: &Word, to: &Word) -> Vec<Word> {
    let c = from.common_prefix_len(to);
    let mut out = Vec::new();
    for k in (c..=from.len()).rev() {
        out.push(from.prefix(k));
    }
    for k in (c + 1)..=to.len() {
        out.push(to.prefix(k));
    }
    out
}

/// Set of all prefixes of `w` (including `e` and `w` itself).
pub fn prefixes(w: &Word) -> Vec<Word> {
    (0..=w.len()).map(|k| w.prefix(k)).collect()
}

/// Exact ball cardinality `1 + 2m((2m-1)^r - 1)/(2m-2)` for `m ≥ 2`.
pub fn ball_cardinality(rank: usize, radius: usize) -> u128 {
    let m2 = 2 * rank as u128;
    if radius == 0 {
        return 1;
    }
    if m2 == 2 {
        return 1 + 2 * radius as u128;
    }
    let q = m2 - 1;
    let mut pow = 1u128;
    for _ in 0..radius {
        pow *= q;
    }
    1 + m2 * (pow - 1) / (m2 - 2)
}

/// Deduplicating set of words keyed by the canonical order.
pub(crate) type WordSet = alloc::collections::BTreeSet<Word>;

/// Map from words, used throughout for deterministic iteration order.
pub(crate) type WordMap<V> = BTreeMap<Word, V>;

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn w(text: &str) -> Word {
        Word::parse(text, 4).unwrap()
    }

    #[test]
    fn parse_cancellation() {
        assert_eq!(w("a1 a1^-1 a2"), w("a2"));
        assert_eq!(w("a1^3").len(), 3);
        assert_eq!(w("a1 a2^-2").len(), 3);
        assert_eq!(w("e"), Word::identity());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Word::parse("a5", 2), Err(Error::GeneratorOutOfRange { .. })));
        assert!(matches!(Word::parse("b2", 2), Err(Error::WordSyntax(_))));
        assert!(matches!(Word::parse("a1^0", 2), Err(Error::WordSyntax(_))));
        assert!(matches!(Word::parse("a1^x", 2), Err(Error::WordSyntax(_))));
        assert!(matches!(Word::parse("", 2), Err(Error::WordSyntax(_))));
    }

    #[test]
    fn display_roundtrip() {
        for text in ["e", "a1", "a1^-3", "a1 a2^2 a1^-1", "a2^-1 a1^-1"] {
            let word = w(text);
            assert_eq!(Word::parse(&alloc::format!("{word}"), 4).unwrap(), word);
        }
        assert_eq!(alloc::format!("{}", w("a1 a1 a2^-1")), "a1^2 a2^-1");
    }

    #[test]
    fn multiply_basics() {
        assert_eq!(w("a1").mul(&w("a1^-1")), Word::identity());
        assert_eq!(w("a1 a2").mul(&w("a2^-1 a1")), w("a1^2"));
        assert_eq!(Word::identity().mul(&w("a2 a1")), w("a2 a1"));
    }

    #[test]
    fn inverse_and_hat() {
        assert_eq!(w("a1 a2").inverse(), w("a2^-1 a1^-1"));
        assert_eq!(Word::identity().inverse(), Word::identity());
        assert_eq!(w("a1^3").inverse(), w("a1^-3"));
        assert_eq!(w("a1 a2^-1").hat(), w("a1^-1 a2"));
        assert_eq!(Word::identity().hat(), Word::identity());
        assert_eq!(w("a1^2").hat(), w("a1^-2"));
        let word = w("a1 a2^-2 a1^3");
        assert_eq!(word.hat().hat(), word);
        assert_eq!(word.hat().len(), word.len());
    }

    #[test]
    fn shadow_membership() {
        assert!(in_shadow(&w("a1 a2"), &w("a1")).unwrap());
        assert!(!in_shadow(&w("a1"), &w("a1 a2")).unwrap());
        assert!(!in_shadow(&w("a1^-1 a2"), &w("a1")).unwrap());
        assert!(in_shadow(&w("a1"), &w("a1")).unwrap());
        assert!(matches!(
            in_shadow(&w("a1"), &Word::identity()),
            Err(Error::IdentityNotAllowed(_))
        ));
        // |h| = |g| + |g^{-1} h| characterization.
        let g = w("a1 a2");
        for h in ball(&Word::identity(), 4, 2) {
            let alt = h.len() == g.len() + g.inverse().mul(&h).len();
            assert_eq!(in_shadow(&h, &g).unwrap(), alt);
        }
    }

    #[test]
    fn endomorphism_examples() {
        // s(a) = a, s(b) = a^-1 b applied to "a b" gives "b".
        let images = vec![w("a1"), w("a1^-1 a2")];
        assert_eq!(apply_endomorphism(&images, &w("a1 a2")).unwrap(), w("a2"));
        assert_eq!(
            apply_endomorphism(&images, &Word::identity()).unwrap(),
            Word::identity()
        );
    }

    #[test]
    fn hat_as_endomorphism_exhaustive() {
        let images = vec![w("a1^-1"), w("a2^-1")];
        for word in ball(&Word::identity(), 4, 2) {
            assert_eq!(apply_endomorphism(&images, &word).unwrap(), word.hat());
        }
    }

    #[test]
    fn ball_counts() {
        assert_eq!(ball(&Word::identity(), 0, 2).count(), 1);
        assert_eq!(ball(&Word::identity(), 1, 2).count(), 5);
        // 1 + 4 + 12 by the tree count.
        assert_eq!(ball(&Word::identity(), 2, 2).count(), 17);
        assert_eq!(ball_cardinality(2, 2), 17);
        for r in 0..5 {
            assert_eq!(
                ball(&Word::identity(), r, 2).count() as u128,
                ball_cardinality(2, r)
            );
        }
        // Ball around a non-identity center has the same cardinality.
        assert_eq!(ball(&w("a1 a2"), 2, 2).count(), 17);
    }

    #[test]
    fn geodesic_vertices() {
        let path = geodesic(&w("a1 a2"), &w("a1 a1"));
        assert_eq!(path, vec![w("a1 a2"), w("a1"), w("a1 a1")]);
        assert_eq!(geodesic(&w("a1"), &w("a1")), vec![w("a1")]);
        assert_eq!(w("a1 a2").distance(&w("a1 a1")), 2);
    }

    #[test]
    fn prefix_suffix() {
        let word = w("a1^2 a2^-1 a1");
        assert_eq!(word.prefix(0), Word::identity());
        assert_eq!(word.prefix(3), w("a1^2 a2^-1"));
        assert_eq!(word.suffix(2), w("a2^-1 a1"));
        assert_eq!(word.suffix(word.len()), Word::identity());
    }
}
