//! Two-sided brackets `[lo, hi]` for probabilities and derived quantities.
//!
//! All derived matrices and reported values carry such a bracket: the lower
//! end is certified by construction, the upper end from the heuristic tail
//! estimate of the producing computation. Arithmetic assumes nonnegative
//! operands, which holds for every quantity in this crate.

use core::fmt;

/// A closed interval `[lo, hi]` with `0 ≤ lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Bracket {
        debug_assert!(lo <= hi, "bracket bounds out of order: {lo} > {hi}");
        Bracket { lo: lo.max(0.0), hi: hi.max(0.0) }
    }

    /// Degenerate bracket `[v, v]`.
    pub fn point(v: f64) -> Bracket {
        Bracket::new(v, v)
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn add(self, other: Bracket) -> Bracket {
        Bracket::new(self.lo + other.lo, self.hi + other.hi)
    }

    /// Product of nonnegative brackets.
    pub fn mul(self, other: Bracket) -> Bracket {
        Bracket::new(self.lo * other.lo, self.hi * other.hi)
    }

    pub fn scale(self, c: f64) -> Bracket {
        debug_assert!(c >= 0.0);
        Bracket::new(self.lo * c, self.hi * c)
    }

    /// `1 − x` for probability brackets, clamped to `[0, 1]`.
    pub fn one_minus(self) -> Bracket {
        Bracket::new((1.0 - self.hi).max(0.0), (1.0 - self.lo).clamp(0.0, 1.0))
    }

    /// Quotient of nonnegative brackets; the divisor must be positive.
    pub fn div(self, other: Bracket) -> Bracket {
        debug_assert!(other.lo > 0.0, "bracket division by an interval touching 0");
        Bracket::new(self.lo / other.hi, self.hi / other.lo)
    }

    /// Smallest bracket containing both.
    pub fn hull(self, other: Bracket) -> Bracket {
        Bracket::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Sum over an iterator of brackets.
    pub fn sum<I: IntoIterator<Item = Bracket>>(items: I) -> Bracket {
        items
            .into_iter()
            .fold(Bracket::point(0.0), |acc, b| acc.add(b))
    }

    /// True iff the two brackets intersect after widening both by `slack`.
    pub fn consistent_with(self, other: Bracket, slack: f64) -> bool {
        self.lo - slack <= other.hi && other.lo - slack <= self.hi
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Bracket::new(0.2, 0.3);
        let b = Bracket::new(0.1, 0.1);
        assert_eq!(a.add(b), Bracket::new(0.30000000000000004, 0.4));
        assert!(a.mul(b).contains(0.025));
        assert_eq!(a.one_minus(), Bracket::new(0.7, 0.8));
        assert!(a.div(Bracket::point(0.5)).contains(0.5));
        assert!(a.hull(b).contains(0.1) && a.hull(b).contains(0.3));
        assert!(a.consistent_with(Bracket::new(0.29, 0.5), 0.0));
        assert!(!a.consistent_with(Bracket::new(0.4, 0.5), 0.05));
    }
}
