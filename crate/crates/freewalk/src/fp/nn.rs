//! Exact one-step oracle for nearest-neighbour supports.

use crate::measure::StepMeasure;
use crate::word::{Letter, Word, WordMap};
use crate::{Error, Result};

/// Solves the nearest-neighbour first-passage system
///
/// `F_s = μ(s) + Σ_{t ≠ s} μ(t) · F_{t^{-1}} · F_s`
///
/// by monotone iteration from zero, returning the minimal nonnegative
/// solution as a map from single-letter words to `F(e, s)`.
///
/// Requires `max_range == 1`. This is independent of the main engine and
/// serves as its oracle in tests.
pub fn nn_exact_first_passage(mu: &StepMeasure) -> Result<WordMap<f64>> {
    if mu.max_range() != 1 {
        return Err(Error::NotNearestNeighbour { max_range: mu.max_range() });
    }
    let letters: alloc::vec::Vec<Letter> = Letter::alphabet(mu.rank()).collect();
    let prob = |l: Letter| mu.prob(&Word::letter(l));

    let mut f = alloc::vec![0.0f64; letters.len()];
    let mut next = f.clone();
    for _ in 0..1_000_000u32 {
        let mut delta = 0.0f64;
        for (i, &s) in letters.iter().enumerate() {
            let mut v = prob(s);
            for (j, &t) in letters.iter().enumerate() {
                if j == i {
                    continue;
                }
                let t_inv = t.inverse().code() as usize;
                v += prob(t) * f[t_inv] * f[i];
            }
            delta = delta.max(libm::fabs(v - f[i]));
            next[i] = v;
        }
        core::mem::swap(&mut f, &mut next);
        if delta < 1e-15 {
            break;
        }
    }

    let mut out = WordMap::new();
    for (i, &l) in letters.iter().enumerate() {
        out.insert(Word::letter(l), f[i]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use alloc::vec;

    #[test]
    fn uniform_nn_is_one_third() {
        // Fixed point of F = 1/4 + (3/4)F², the minimal root 1/3.
        let f = nn_exact_first_passage(&presets::nn_uniform_f2()).unwrap();
        for (_, &v) in &f {
            assert!((v - 1.0 / 3.0).abs() < 1e-12, "got {v}");
        }
    }

    #[test]
    fn asymmetric_rates_order() {
        let mu = StepMeasure::new(
            2,
            vec![
                (Word::power(1, 1), 0.4),
                (Word::power(1, -1), 0.4),
                (Word::power(2, 1), 0.1),
                (Word::power(2, -1), 0.1),
            ],
        )
        .unwrap();
        let f = nn_exact_first_passage(&mu).unwrap();
        let fa = f[&Word::power(1, 1)];
        let fb = f[&Word::power(2, 1)];
        assert!(fa > fb, "F_a = {fa} should exceed F_b = {fb}");
        assert!(fa > 0.0 && fa < 1.0 && fb > 0.0 && fb < 1.0);
    }

    #[test]
    fn near_degenerate_monotone_scan() {
        // μ(a^{±1}) = 0.5 − ε, μ(b^{±1}) = ε: F_a increases toward 1 as ε → 0.
        let walk = |eps: f64| {
            StepMeasure::new(
                2,
                vec![
                    (Word::power(1, 1), 0.5 - eps),
                    (Word::power(1, -1), 0.5 - eps),
                    (Word::power(2, 1), eps),
                    (Word::power(2, -1), eps),
                ],
            )
            .unwrap()
        };
        let f1 = nn_exact_first_passage(&walk(0.1)).unwrap()[&Word::power(1, 1)];
        let f2 = nn_exact_first_passage(&walk(0.01)).unwrap()[&Word::power(1, 1)];
        assert!(f1 < f2 && f2 < 1.0);
        assert!(f2 > 0.9);
    }

    #[test]
    fn rejects_long_range() {
        let err = nn_exact_first_passage(&presets::powers_n2_f2());
        assert!(matches!(err, Err(Error::NotNearestNeighbour { max_range: 2 })));
    }
}
