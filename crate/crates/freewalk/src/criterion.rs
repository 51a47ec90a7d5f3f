//! The free-group boundary singularity criterion
//! `S = Σ_i [1/(1+ρ(a_i)^{-1}) + 1/(1+ρ(a_i^{-1})^{-1})] ≥ 1`
//! and the pipelines certifying it (or its failure) on the walks of
//! interest. The Fuchsian consequence is reported as an implication
//! string only; no hyperbolic geometry is computed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::barrier::is_barrier;
use crate::bracket::Bracket;
use crate::fp::{AvoidSet, Solver};
use crate::mc::{estimate_cylinder, McEstimate};
use crate::measure::{classify, default_search_radius, StepMeasure};
use crate::spectral::{verify_one_geodesic, SpectralOptions, SpectralReport};
use crate::word::{Letter, Word, WordMap};
use crate::{Error, Result};

/// Reported when `S ≥ 1` holds for the free-group lift: the hitting
/// measure of the projected Fuchsian walk is singular by the paper's
/// reduction. Reported as a string only; the Γ-side is out of scope.
pub const FUCHSIAN_IMPLICATION: &str = "criterion satisfied: for any cocompact Fuchsian group \
with centrally symmetric fundamental polygon whose side-pairing walk lifts to this measure, \
the hitting measure on the circle is singular";

/// How a ρ value was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    /// Perron root of the companion polynomial (powers walks).
    PowersPerronRoot,
    /// `ρ = F(e, a)` via a singleton barrier ({a} an a- or a²-barrier).
    SingletonBarrier,
    /// `F(e, a^k)^{1/k}` at finite k: a certified lower bound only.
    KthRootLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Per-letter contribution to the criterion sum.
#[derive(Debug, Clone)]
pub struct GeneratorRho {
    pub letter: Word,
    pub rho: Bracket,
    /// `1/(1 + ρ^{-1}) = ρ/(1+ρ)`.
    pub term: Bracket,
    pub method: RhoMethod,
}

/// Result of evaluating the criterion sum.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub per_generator: Vec<GeneratorRho>,
    pub total: Bracket,
    pub verdict: Verdict,
    /// `S − 1` at midpoints.
    pub margin: f64,
    /// Set when the verdict is `Satisfied`.
    pub implication: Option<&'static str>,
}

fn criterion_term(rho: Bracket) -> Bracket {
    // ρ ↦ ρ/(1+ρ) is increasing.
    Bracket::new(rho.lo / (1.0 + rho.lo), rho.hi / (1.0 + rho.hi))
}

/// Evaluates the criterion sum from per-letter ρ brackets. The map must
/// contain one entry for every letter `a_i^{±1}`.
pub fn criterion_sum(rhos: &WordMap<(Bracket, RhoMethod)>, rank: usize) -> Result<CriterionReport> {
    let mut per_generator = Vec::new();
    let mut total = Bracket::point(0.0);
    for l in Letter::alphabet(rank) {
        let key = Word::letter(l);
        let (rho, method) = rhos
            .get(&key)
            .copied()
            .ok_or_else(|| Error::MissingValue(alloc::format!("ρ({key})")))?;
        let term = criterion_term(rho);
        total = total.add(term);
        per_generator.push(GeneratorRho { letter: key, rho, term, method });
    }
    let margin = total.mid() - 1.0;
    let equality_slack = 1e-7 + 2.0 * total.width();
    let verdict = if total.lo >= 1.0 {
        Verdict::Satisfied
    } else if total.hi < 1.0 {
        Verdict::Violated
    } else if total.lo >= 1.0 - equality_slack {
        // Equality case: the certified sum touches 1 within numerical slack.
        Verdict::Satisfied
    } else {
        Verdict::Inconclusive
    };
    let implication = (verdict == Verdict::Satisfied).then_some(FUCHSIAN_IMPLICATION);
    Ok(CriterionReport { per_generator, total, verdict, margin, implication })
}

/// Chooses ρ per letter the way the paper's machinery certifies it, then
/// evaluates the criterion.
pub fn criterion_for_measure(mu: &StepMeasure, tol: f64, k_max: usize) -> Result<CriterionReport> {
    let class = classify(mu, default_search_radius(mu));
    if class.powers_of_generators && class.symmetric {
        let mut rhos = WordMap::new();
        for i in 1..=mu.rank() {
            let report = verify_one_geodesic(mu, i, SpectralOptions { tol, k_max, ..Default::default() })?;
            let rho = report.lambda1_bracket;
            rhos.insert(Word::power(i, 1), (rho, RhoMethod::PowersPerronRoot));
            // Symmetric measure: F(e, a^{-k}) = F(e, a^k), so ρ agrees.
            rhos.insert(Word::power(i, -1), (rho, RhoMethod::PowersPerronRoot));
        }
        return criterion_sum(&rhos, mu.rank());
    }

    let solver = Solver::new(mu);
    let mut rhos = WordMap::new();
    for l in Letter::alphabet(mu.rank()) {
        let letter = Word::letter(l);
        let singleton: BTreeSet<Word> = [letter.clone()].into_iter().collect();
        let square = letter.mul(&letter);
        let multiplicative = is_barrier(mu, &singleton, &letter)?.verdict
            || is_barrier(mu, &singleton, &square)?.verdict;
        if multiplicative {
            let fp = solver.first_passage(&Word::identity(), &letter, &AvoidSet::empty(), tol)?;
            rhos.insert(letter, (fp.bracket(), RhoMethod::SingletonBarrier));
        } else {
            let seq = solver.fp_ratio_sequence(l.generator_index(), k_max, tol)?;
            let value = if l.exponent_sign() > 0 {
                *seq.values.last().unwrap()
            } else {
                // Ratio sequences run over positive powers; inverse letters
                // get their own direct tail value.
                let target = Word::power(l.generator_index(), -(seq.values.len() as i32));
                solver
                    .first_passage(&Word::identity(), &target, &AvoidSet::empty(), tol)?
                    .bracket()
            };
            let k = seq.values.len() as f64;
            // Supermultiplicativity makes the k-th root a lower bound; no
            // finite k bounds ρ from above.
            let lower = libm::pow(value.lo, 1.0 / k);
            rhos.insert(letter, (Bracket::new(lower, 1.0), RhoMethod::KthRootLowerBound));
        }
    }
    criterion_sum(&rhos, mu.rank())
}

/// One check line of a pipeline report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub label: String,
    /// Observed residual (≤ allowed passes) or margin (> allowed passes).
    pub observed: f64,
    pub allowed: f64,
    pub is_margin: bool,
    pub pass: bool,
}

impl CheckLine {
    pub fn residual(label: String, observed: f64, allowed: f64) -> CheckLine {
        CheckLine { label, observed, allowed, is_margin: false, pass: observed <= allowed }
    }

    pub fn margin(label: String, observed: f64, allowed: f64) -> CheckLine {
        CheckLine { label, observed, allowed, is_margin: true, pass: observed > allowed }
    }
}

/// Corollary pipeline: for symmetric powers walks, derives
/// `1/(1+ρ(a_i)^{-1}) ≥ ν(C(a_i))` per generator and `S ≥ 2Σν = 1`.
#[derive(Debug, Clone)]
pub struct CorollaryReport {
    pub spectral: Vec<SpectralReport>,
    pub criterion: CriterionReport,
    pub checks: Vec<CheckLine>,
    pub pass: bool,
}

pub fn corollary_pipeline(mu: &StepMeasure, opts: SpectralOptions) -> Result<CorollaryReport> {
    let mut spectral = Vec::new();
    let mut rhos = WordMap::new();
    let mut checks = Vec::new();
    let mut nu_sum = 0.0f64;
    for i in 1..=mu.rank() {
        let report = verify_one_geodesic(mu, i, opts)?;
        let rho = report.lambda1_bracket;
        rhos.insert(Word::power(i, 1), (rho, RhoMethod::PowersPerronRoot));
        rhos.insert(Word::power(i, -1), (rho, RhoMethod::PowersPerronRoot));
        let nu1 = report.cylinders.nu[0];
        nu_sum += nu1;
        let term = criterion_term(rho);
        checks.push(CheckLine::residual(
            alloc::format!("1/(1+ρ(a{i})^-1) ≥ ν(C(a{i})) (defect)"),
            (nu1 - term.hi).max(0.0),
            opts.tol.max(1e-6),
        ));
        checks.push(CheckLine::residual(
            alloc::format!("one-geodesic certificate for a{i} passes"),
            if report.pass { 0.0 } else { 1.0 },
            0.0,
        ));
        spectral.push(report);
    }
    // Disjoint cylinders partition the boundary: 2·Σ ν(C(a_i)) = 1.
    checks.push(CheckLine::residual(
        String::from("2·Σ ν(C(a_i)) = 1 (partition identity)"),
        libm::fabs(2.0 * nu_sum - 1.0),
        1e-8,
    ));
    let criterion = criterion_sum(&rhos, mu.rank())?;
    checks.push(CheckLine::residual(
        String::from("S ≥ 1 (defect below 1)"),
        (1.0 - criterion.total.hi).max(0.0),
        1e-8,
    ));
    let pass = checks.iter().all(|c| c.pass) && criterion.verdict == Verdict::Satisfied;
    Ok(CorollaryReport { spectral, criterion, checks, pass })
}

/// One generator's legs of the disproof pipeline.
#[derive(Debug, Clone)]
pub struct DisproofLeg {
    pub generator: usize,
    /// `F(e, a_j)` from the engine.
    pub f_value: Bracket,
    /// Monte Carlo estimate of `ν(C(a_j))`.
    pub nu_mc: McEstimate,
    /// `ν/(1−ν)` propagated from the MC bracket at 3σ.
    pub ratio: Bracket,
    /// True on the designated generator with the strict inequality.
    pub is_strict: bool,
    pub check: CheckLine,
}

/// Report of the antisymmetric counterexample certification.
#[derive(Debug, Clone)]
pub struct DisproofReport {
    /// The generator `i` whose singleton fails to be an `a_i`-barrier;
    /// `None` degenerates to equality on every generator.
    pub special: Option<usize>,
    pub legs: Vec<DisproofLeg>,
    pub multiplicativity: Vec<CheckLine>,
    pub criterion: CriterionReport,
    pub strict_margin: Option<f64>,
    pub pass: bool,
}

/// Options controlling the Monte Carlo legs of the pipelines.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    pub distance_threshold: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { samples: 200_000, seed: 20_240_817, distance_threshold: 48 }
    }
}

/// Certifies the theorem disproving the criterion on antisymmetric walks
/// whose singletons `{a_j}` are `a_j`-barriers except one `a_i` that is
/// only an `a_i²`-barrier:
/// `ρ(a_j) = F(e,a_j) = ν(C(a_j))/(1−ν(C(a_j)))` for `j ≠ i` and a strict
/// `<` at `i`.
pub fn disproof_pipeline(mu: &StepMeasure, tol: f64, mc: McOptions) -> Result<DisproofReport> {
    let class = classify(mu, default_search_radius(mu));
    if !class.antisymmetric {
        return Err(Error::NotAntisymmetric);
    }

    // Locate the structure: singletons must be barriers except at most one
    // generator whose singleton still bars the doubled target.
    let mut failing: Vec<usize> = Vec::new();
    for i in 1..=mu.rank() {
        let letter = Word::power(i, 1);
        let singleton: BTreeSet<Word> = [letter.clone()].into_iter().collect();
        if !is_barrier(mu, &singleton, &letter)?.verdict {
            failing.push(i);
        }
    }
    let special = match failing.len() {
        0 => None,
        1 => {
            let i = failing[0];
            let letter = Word::power(i, 1);
            let singleton: BTreeSet<Word> = [letter.clone()].into_iter().collect();
            let squared = is_barrier(mu, &singleton, &Word::power(i, 2))?;
            if !squared.verdict {
                return Err(Error::BarrierPrecondition(alloc::format!(
                    "{{a{i}}} is neither an a{i}- nor an a{i}²-barrier"
                )));
            }
            Some(i)
        }
        _ => {
            return Err(Error::BarrierPrecondition(String::from(
                "more than one generator lacks a singleton barrier",
            )))
        }
    };

    let solver = Solver::new(mu);
    let mut legs = Vec::new();
    let mut multiplicativity = Vec::new();
    let mut rhos = WordMap::new();
    let mut strict_margin = None;
    for i in 1..=mu.rank() {
        let letter = Word::power(i, 1);
        let f = solver.first_passage(&Word::identity(), &letter, &AvoidSet::empty(), tol)?;
        let f_b = f.bracket();
        // Multiplicativity from the barrier structure: F(e, a^2) = F(e, a)².
        let f2 = solver.first_passage(&Word::identity(), &Word::power(i, 2), &AvoidSet::empty(), tol)?;
        let expect = f_b.mul(f_b);
        multiplicativity.push(CheckLine::residual(
            alloc::format!("F(e, a{i}^2) = F(e, a{i})²"),
            libm::fabs(f2.bracket().mid() - expect.mid()),
            f2.bracket().width() + expect.width() + tol.max(1e-8) * 100.0,
        ));
        let nu_mc = estimate_cylinder(mu, &letter, mc.samples, mc.distance_threshold, mc.seed + i as u64)?;
        let nu_b = nu_mc.bracket(3.0);
        let ratio = nu_b.div(nu_b.one_minus());
        let is_strict = special == Some(i);
        let check = if is_strict {
            let margin = ratio.mid() - f_b.hi;
            strict_margin = Some(margin);
            CheckLine::margin(
                alloc::format!("F(e, a{i}) < ν(C(a{i}))/(1−ν(C(a{i})))"),
                margin,
                3.0 * nu_mc.stderr / (1.0 - nu_b.hi).max(0.25),
            )
        } else {
            CheckLine::residual(
                alloc::format!("F(e, a{i}) = ν(C(a{i}))/(1−ν(C(a{i})))"),
                libm::fabs(ratio.mid() - f_b.mid()),
                ratio.width() * 0.5 + f_b.width() + tol.max(1e-6),
            )
        };
        legs.push(DisproofLeg { generator: i, f_value: f_b, nu_mc, ratio, is_strict, check });
        // Antisymmetry: ρ(a_i^{-1}) = ρ(a_i) = F(e, a_i).
        rhos.insert(Word::power(i, 1), (f_b, RhoMethod::SingletonBarrier));
        rhos.insert(Word::power(i, -1), (f_b, RhoMethod::SingletonBarrier));
    }
    let criterion = criterion_sum(&rhos, mu.rank())?;
    let expected_verdict = if special.is_some() {
        Verdict::Violated
    } else {
        criterion.verdict
    };
    let pass = legs.iter().all(|l| l.check.pass)
        && multiplicativity.iter().all(|c| c.pass)
        && criterion.verdict == expected_verdict;
    Ok(DisproofReport { special, legs, multiplicativity, criterion, strict_margin, pass })
}

/// Report of the symmetric counterexample chain.
#[derive(Debug, Clone)]
pub struct SymmetricCounterexampleReport {
    /// `F_μ(e, a)` and `F_μ(e, b)` under the counterexample walk.
    pub f_a: Bracket,
    pub f_b: Bracket,
    /// The same quantities after the automorphism pushforward.
    pub f_a_pushed: Bracket,
    pub f_ab_pushed: Bracket,
    pub checks: Vec<CheckLine>,
    pub criterion: CriterionReport,
    /// Margin of the final strict inequality.
    pub strict_margin: f64,
    pub pass: bool,
}

/// Certifies the symmetric counterexample: the walk on
/// `{a, a^{-1}, ab, b^{-1}a^{-1}}` (each 1/4) composed with the
/// automorphism `a ↦ a, b ↦ a^{-1}b` lands on the uniform
/// nearest-neighbour walk, and the criterion sum stays strictly below 1.
pub fn example_symmetric_counterexample(tol: f64) -> Result<SymmetricCounterexampleReport> {
    let mu = crate::presets::example_4_2_symmetric();
    let rank = mu.rank();
    let a = Word::power(1, 1);
    let b = Word::power(2, 1);
    let mut checks = Vec::new();

    // Barrier legs: {b} is a b-barrier, {a^{-1}} an a^{-1}-barrier.
    let b_singleton: BTreeSet<Word> = [b.clone()].into_iter().collect();
    let a_inv = Word::power(1, -1);
    let a_inv_singleton: BTreeSet<Word> = [a_inv.clone()].into_iter().collect();
    checks.push(CheckLine::residual(
        String::from("{b} is a b-barrier"),
        if is_barrier(&mu, &b_singleton, &b)?.verdict { 0.0 } else { 1.0 },
        0.0,
    ));
    checks.push(CheckLine::residual(
        String::from("{a^-1} is an a^-1-barrier"),
        if is_barrier(&mu, &a_inv_singleton, &a_inv)?.verdict { 0.0 } else { 1.0 },
        0.0,
    ));

    let solver = Solver::new(&mu);
    let f_a = solver.first_passage(&Word::identity(), &a, &AvoidSet::empty(), tol)?.bracket();
    let f_b = solver.first_passage(&Word::identity(), &b, &AvoidSet::empty(), tol)?.bracket();

    // Multiplicativity legs from the singleton barriers (plus symmetry).
    for (label, target, base, power) in [
        ("F(e, a^-2) = F(e, a^-1)²", Word::power(1, -2), f_a, 2u32),
        ("F(e, b^2) = F(e, b)²", Word::power(2, 2), f_b, 2),
        ("F(e, b^3) = F(e, b)³", Word::power(2, 3), f_b, 3),
    ] {
        let direct = solver
            .first_passage(&Word::identity(), &target, &AvoidSet::empty(), tol)?
            .bracket();
        let mut expected = base;
        for _ in 1..power {
            expected = expected.mul(base);
        }
        checks.push(CheckLine::residual(
            String::from(label),
            libm::fabs(direct.mid() - expected.mid()),
            direct.width() + expected.width() + tol.max(1e-8) * 100.0,
        ));
    }

    // Pushforward by s: a ↦ a, b ↦ a^{-1} b gives the uniform NN walk.
    let images = alloc::vec![a.clone(), Word::power(1, -1).mul(&b)];
    let pushed = mu.pushforward(&images)?;
    checks.push(CheckLine::residual(
        String::from("s_*(μ) is the uniform nearest-neighbour walk"),
        if pushed == crate::presets::nn_uniform_f2() { 0.0 } else { 1.0 },
        0.0,
    ));

    let pushed_solver = Solver::new(&pushed);
    let f_a_pushed = pushed_solver
        .first_passage(&Word::identity(), &a, &AvoidSet::empty(), tol)?
        .bracket();
    let a_inv_b = Word::power(1, -1).mul(&b);
    let f_ab_pushed = pushed_solver
        .first_passage(&Word::identity(), &a_inv_b, &AvoidSet::empty(), tol)?
        .bracket();
    let f_b_pushed = pushed_solver
        .first_passage(&Word::identity(), &b, &AvoidSet::empty(), tol)?
        .bracket();

    // Automorphism invariance of first passage.
    checks.push(CheckLine::residual(
        String::from("F_μ(e, a) = F_{μ'}(e, a)"),
        libm::fabs(f_a.mid() - f_a_pushed.mid()),
        1e-6,
    ));
    checks.push(CheckLine::residual(
        String::from("F_μ(e, b) = F_{μ'}(e, a^-1 b)"),
        libm::fabs(f_b.mid() - f_ab_pushed.mid()),
        1e-6,
    ));
    // NN multiplicativity splits the pushed target.
    checks.push(CheckLine::residual(
        String::from("F_{μ'}(e, a^-1 b) = F_{μ'}(e, a) F_{μ'}(e, b)"),
        libm::fabs(f_ab_pushed.mid() - f_a_pushed.mul(f_b_pushed).mid()),
        f_ab_pushed.width() + f_a_pushed.width() + f_b_pushed.width() + 1e-7,
    ));

    // ν′ values from the cylinder systems of the pushed walk.
    let mut nu_prime_sum = 0.0;
    for i in 1..=rank {
        let p = crate::barrier::compute_p_vector(&pushed, i, tol)?;
        let sol = crate::cylinder::solve_cylinders(&crate::cylinder::assemble_power_system(&p))?;
        nu_prime_sum += sol.nu[0];
    }
    checks.push(CheckLine::residual(
        String::from("ν'(C(a)) + ν'(C(b)) = 1/2"),
        libm::fabs(nu_prime_sum - 0.5),
        1e-8,
    ));

    let term = |f: Bracket| criterion_term(f);
    let lhs = term(f_a).add(term(f_b));
    let mid = term(f_a_pushed).add(term(f_ab_pushed));
    checks.push(CheckLine::residual(
        String::from("criterion halves agree under the automorphism"),
        libm::fabs(lhs.mid() - mid.mid()),
        lhs.width() + mid.width() + 1e-6,
    ));
    let rhs_strict = term(f_a_pushed).add(term(f_b_pushed));
    let strict_margin = rhs_strict.mid() - mid.mid();
    checks.push(CheckLine::margin(
        String::from("strict drop against ν'(C(a)) + ν'(C(b))"),
        strict_margin,
        0.0,
    ));
    checks.push(CheckLine::residual(
        String::from("ν'(C(a)) + ν'(C(b)) equals the relaxed half-sum"),
        libm::fabs(rhs_strict.mid() - nu_prime_sum),
        rhs_strict.width() + 1e-7,
    ));

    // ρ = F via the singleton barriers and symmetry; S = 2·(half-sum) < 1.
    let mut rhos = WordMap::new();
    rhos.insert(Word::power(1, 1), (f_a, RhoMethod::SingletonBarrier));
    rhos.insert(Word::power(1, -1), (f_a, RhoMethod::SingletonBarrier));
    rhos.insert(Word::power(2, 1), (f_b, RhoMethod::SingletonBarrier));
    rhos.insert(Word::power(2, -1), (f_b, RhoMethod::SingletonBarrier));
    let criterion = criterion_sum(&rhos, rank)?;
    checks.push(CheckLine::residual(
        String::from("criterion verdict is `violated`"),
        if criterion.verdict == Verdict::Violated { 0.0 } else { 1.0 },
        0.0,
    ));

    let pass = checks.iter().all(|c| c.pass);
    Ok(SymmetricCounterexampleReport {
        f_a,
        f_b,
        f_a_pushed,
        f_ab_pushed,
        checks,
        criterion,
        strict_margin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn criterion_sum_uniform_nn_equality() {
        let third = Bracket::point(1.0 / 3.0);
        let mut rhos = WordMap::new();
        for l in Letter::alphabet(2) {
            rhos.insert(Word::letter(l), (third, RhoMethod::SingletonBarrier));
        }
        let report = criterion_sum(&rhos, 2).unwrap();
        assert!((report.total.mid() - 1.0).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::Satisfied);
        assert!(report.margin.abs() < 1e-12);
        assert!(report.implication.is_some());
    }

    #[test]
    fn criterion_sum_limits() {
        let mut rhos = WordMap::new();
        for l in Letter::alphabet(2) {
            rhos.insert(Word::letter(l), (Bracket::point(1e-6), RhoMethod::SingletonBarrier));
        }
        let report = criterion_sum(&rhos, 2).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.margin < 0.0);

        // Missing letters are rejected.
        let mut partial = WordMap::new();
        partial.insert(Word::power(1, 1), (Bracket::point(0.5), RhoMethod::SingletonBarrier));
        assert!(criterion_sum(&partial, 2).is_err());
    }

    #[test]
    fn disproof_rejects_symmetric_walk() {
        let mu = presets::example_2_8();
        assert!(matches!(
            disproof_pipeline(&mu, 1e-8, McOptions { samples: 100, ..Default::default() }),
            Err(Error::NotAntisymmetric)
        ));
    }

    #[test]
    fn paired_terms_equal_for_antisymmetric() {
        // ρ(a_i) and ρ(a_i^{-1}) enter equally, so the sum is twice one side.
        let mu = presets::example_4_1_antisym();
        let report = disproof_pipeline(
            &mu,
            1e-8,
            McOptions { samples: 4_000, seed: 1, distance_threshold: 24 },
        )
        .unwrap();
        let total = report.criterion.total;
        let half: Bracket = Bracket::sum(
            report
                .criterion
                .per_generator
                .iter()
                .filter(|g| g.letter.first_letter().unwrap().exponent_sign() > 0)
                .map(|g| g.term),
        );
        assert!((total.mid() - 2.0 * half.mid()).abs() < 1e-12);
        assert_eq!(report.special, Some(1));
    }
}
