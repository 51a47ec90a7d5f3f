//! Named walks used throughout the test suites and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use crate::measure::StepMeasure;
use crate::word::Word;
use crate::{Error, Result};

/// Preset identifiers accepted by the CLI.
pub const NAMES: &[&str] = &[
    "nn-uniform-f2",
    "powers-n2-f2",
    "example-2.8",
    "example-4.1-antisym",
    "example-4.2-symmetric",
];

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Result<StepMeasure> {
    match name {
        "nn-uniform-f2" => Ok(nn_uniform_f2()),
        "powers-n2-f2" => Ok(powers_n2_f2()),
        "example-2.8" => Ok(example_2_8()),
        "example-4.1-antisym" => Ok(example_4_1_antisym()),
        "example-4.2-symmetric" => Ok(example_4_2_symmetric()),
        other => Err(Error::BadParameter(alloc::format!("unknown preset `{other}`"))),
    }
}

fn build(rank: usize, entries: Vec<(Word, f64)>) -> StepMeasure {
    StepMeasure::new(rank, entries).expect("preset measures are valid")
}

/// Uniform nearest-neighbour walk on `F_2`: each of `a^{±1}, b^{±1}` at 1/4.
pub fn nn_uniform_f2() -> StepMeasure {
    build(
        2,
        vec![
            (Word::power(1, 1), 0.25),
            (Word::power(1, -1), 0.25),
            (Word::power(2, 1), 0.25),
            (Word::power(2, -1), 0.25),
        ],
    )
}

/// Powers walk on `F_2` with range 2: each of `a^{±1}, a^{±2}, b^{±1}, b^{±2}` at 1/8.
pub fn powers_n2_f2() -> StepMeasure {
    build(
        2,
        vec![
            (Word::power(1, 1), 0.125),
            (Word::power(1, -1), 0.125),
            (Word::power(1, 2), 0.125),
            (Word::power(1, -2), 0.125),
            (Word::power(2, 1), 0.125),
            (Word::power(2, -1), 0.125),
            (Word::power(2, 2), 0.125),
            (Word::power(2, -2), 0.125),
        ],
    )
}

/// Symmetric walk on `F_2` supported on `{a, a^{-1}, ab, b^{-1}a^{-1}}`, each 1/4.
pub fn example_2_8() -> StepMeasure {
    let ab = Word::power(1, 1).mul(&Word::power(2, 1));
    build(
        2,
        vec![
            (Word::power(1, 1), 0.25),
            (Word::power(1, -1), 0.25),
            (ab.clone(), 0.25),
            (ab.inverse(), 0.25),
        ],
    )
}

/// Antisymmetric walk on `F_2` supported on
/// `{a, a^{-1}, b, b^{-1}, ab, a^{-1}b^{-1}}`, each 1/6.
pub fn example_4_1_antisym() -> StepMeasure {
    let sixth = 1.0 / 6.0;
    let ab = Word::power(1, 1).mul(&Word::power(2, 1));
    build(
        2,
        vec![
            (Word::power(1, 1), sixth),
            (Word::power(1, -1), sixth),
            (Word::power(2, 1), sixth),
            (Word::power(2, -1), sixth),
            (ab.clone(), sixth),
            (ab.hat(), sixth),
        ],
    )
}

/// The symmetric counterexample walk; same measure as [`example_2_8`].
pub fn example_4_2_symmetric() -> StepMeasure {
    example_2_8()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_by_name() {
        for name in NAMES {
            assert!(by_name(name).is_ok(), "preset {name} must load");
        }
        assert!(by_name("no-such-walk").is_err());
    }

    #[test]
    fn antisym_support_shape() {
        let mu = example_4_1_antisym();
        let ab = Word::parse("a1 a2", 2).unwrap();
        let ab_hat = Word::parse("a1^-1 a2^-1", 2).unwrap();
        assert!(mu.prob(&ab) > 0.0);
        assert!(mu.prob(&ab_hat) > 0.0);
        assert_eq!(mu.prob(&ab.inverse()), 0.0);
    }
}
