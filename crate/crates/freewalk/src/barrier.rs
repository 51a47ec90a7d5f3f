//! Barrier and strong-barrier certificates, canonical power barriers, and
//! the matrices built from restricted first-passage values.
//!
//! A finite `B` is a `g`-barrier when no support-step path from `e` can
//! reach the shadow `C_fin(g)` while avoiding `B`. Any step entering the
//! shadow jumps from `u ∉ C_fin(g)` to `v ∈ C_fin(g)`; its tree geodesic
//! passes through `g`, so both endpoints lie in `B(g, max_range)`. The
//! decision is therefore a breadth-first search over the exterior inside a
//! finite ball, recorded in the certificate.
//!
//! A strong `g`-barrier additionally lies inside the shadow and blocks
//! entry from every exterior start. Since every exterior vertex is itself
//! an admissible start, the decision reduces to scanning all entry steps
//! from the frontier `B(g, max_range) ∖ C_fin(g)`: the barrier is strong
//! iff every such step lands in `B`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::bracket::Bracket;
use crate::fp::{AvoidSet, FpValue, Solver};
use crate::measure::{classify, default_search_radius, StepMeasure};
use crate::word::{ball, Word, WordMap};
use crate::{Error, Result};

/// Which property a certificate decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    Barrier,
    StrongBarrier,
}

/// Why a negative verdict was reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BarrierFailure {
    /// A support-step path reaches the shadow while avoiding the set;
    /// the path is stored as the certificate witness.
    EntryBreach,
    /// Strong barriers must lie inside the shadow; this member does not.
    MemberOutsideShadow(Word),
}

/// Verdict of a (strong) barrier test with supporting evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierCertificate {
    pub barrier_set: Vec<Word>,
    pub target: Word,
    pub kind: BarrierKind,
    pub verdict: bool,
    /// Present iff the verdict is negative for a path-based reason: a
    /// support-step path from the tested source into `C_fin(target) ∖ B`
    /// avoiding `B` throughout.
    pub witness: Option<Vec<Word>>,
    pub failure: Option<BarrierFailure>,
    /// Radius of the exterior search ball used by the decision.
    pub search_radius: usize,
    /// The finiteness argument backing the verdict.
    pub soundness: String,
}

fn sorted_words(set: &BTreeSet<Word>) -> Vec<Word> {
    set.iter().cloned().collect()
}

/// Decides whether `B` is a `g`-barrier, searching the exterior ball of
/// the default radius `|g| + max|B| + 2·max_range`.
pub fn is_barrier(mu: &StepMeasure, b: &BTreeSet<Word>, g: &Word) -> Result<BarrierCertificate> {
    let max_b = b.iter().map(Word::len).max().unwrap_or(0);
    let radius = g.len() + max_b + 2 * mu.max_range();
    is_barrier_with_radius(mu, b, g, radius)
}

/// [`is_barrier`] with an explicit search radius (used by the soundness
/// regression that enlarges the ball).
pub fn is_barrier_with_radius(
    mu: &StepMeasure,
    b: &BTreeSet<Word>,
    g: &Word,
    radius: usize,
) -> Result<BarrierCertificate> {
    blocks_shadow_from(mu, &Word::identity(), b, g, radius)
}

/// Core reachability decision: can a support-step path from `source`
/// (outside `C_fin(g)`) reach `C_fin(g) ∖ B` avoiding `B` throughout?
///
/// Exterior states are explored breadth-first inside `ball(e, radius)`,
/// layer by layer in canonical word order so witnesses are deterministic:
/// shortest first, ties broken lexicographically.
pub(crate) fn blocks_shadow_from(
    mu: &StepMeasure,
    source: &Word,
    b: &BTreeSet<Word>,
    g: &Word,
    radius: usize,
) -> Result<BarrierCertificate> {
    if g.is_identity() {
        return Err(Error::IdentityNotAllowed("barrier target"));
    }
    let soundness = alloc::format!(
        "entry steps into C_fin({g}) have both endpoints within distance {} of {g}; \
         exterior reachability searched in the ball of radius {radius} about e",
        mu.max_range()
    );

    let support: Vec<Word> = mu.support().cloned().collect();
    let mut parents: WordMap<Option<Word>> = WordMap::new();
    let mut certificate = BarrierCertificate {
        barrier_set: sorted_words(b),
        target: g.clone(),
        kind: BarrierKind::Barrier,
        verdict: true,
        witness: None,
        failure: None,
        search_radius: radius,
        soundness,
    };

    if g.is_prefix_of(source) {
        return Err(Error::BarrierPrecondition(alloc::format!(
            "source `{source}` already lies in C_fin({g})"
        )));
    }
    if b.contains(source) {
        // Paths must avoid B from time zero; a caught source blocks trivially.
        return Ok(certificate);
    }

    parents.insert(source.clone(), None);
    let mut layer: Vec<Word> = alloc::vec![source.clone()];
    while !layer.is_empty() {
        layer.sort();
        let mut next_layer: Vec<Word> = Vec::new();
        for u in &layer {
            for s in &support {
                let v = u.mul(s);
                let entered = g.is_prefix_of(&v);
                if entered {
                    if !b.contains(&v) {
                        // Witness: replayable support-step path source → v.
                        let mut path = alloc::vec![v.clone()];
                        let mut back = Some(u.clone());
                        while let Some(w) = back {
                            back = parents[&w].clone();
                            path.push(w);
                        }
                        path.reverse();
                        certificate.verdict = false;
                        certificate.witness = Some(path);
                        certificate.failure = Some(BarrierFailure::EntryBreach);
                        return Ok(certificate);
                    }
                    continue;
                }
                if b.contains(&v) || v.len() > radius || parents.contains_key(&v) {
                    continue;
                }
                parents.insert(v.clone(), Some(u.clone()));
                next_layer.push(v);
            }
        }
        layer = next_layer;
    }
    Ok(certificate)
}

/// Decides whether `B` is a strong `g`-barrier.
///
/// The scan is exact: entries happen inside `ball(g, max_range)` and every
/// exterior vertex is an admissible source, so no reachability closure is
/// needed beyond the frontier itself.
pub fn is_strong_barrier(
    mu: &StepMeasure,
    b: &BTreeSet<Word>,
    g: &Word,
) -> Result<BarrierCertificate> {
    if g.is_identity() {
        return Err(Error::IdentityNotAllowed("barrier target"));
    }
    let n = mu.max_range();
    let mut certificate = BarrierCertificate {
        barrier_set: sorted_words(b),
        target: g.clone(),
        kind: BarrierKind::StrongBarrier,
        verdict: true,
        witness: None,
        failure: None,
        search_radius: n,
        soundness: alloc::format!(
            "entry steps into C_fin({g}) start and land within distance {n} of {g}; \
             every exterior vertex is an admissible source, so scanning the frontier \
             ball({g}, {n}) ∖ C_fin({g}) decides the property exactly"
        ),
    };

    for member in b {
        if !g.is_prefix_of(member) {
            certificate.verdict = false;
            certificate.failure = Some(BarrierFailure::MemberOutsideShadow(member.clone()));
            return Ok(certificate);
        }
    }

    let mut frontier: Vec<Word> = ball(g, n, mu.rank())
        .filter(|u| !g.is_prefix_of(u))
        .collect();
    frontier.sort();
    for u in frontier {
        for s in mu.support() {
            let v = u.mul(s);
            if g.is_prefix_of(&v) && !b.contains(&v) {
                certificate.verdict = false;
                certificate.witness = Some(alloc::vec![u.clone(), v]);
                certificate.failure = Some(BarrierFailure::EntryBreach);
                return Ok(certificate);
            }
        }
    }
    Ok(certificate)
}

/// The canonical barrier `{a_i, a_i^2, …, a_i^n}` of a powers walk, where
/// `n` is the largest exponent of `a_i` in the support.
pub fn canonical_power_barrier(mu: &StepMeasure, generator: usize) -> Result<BTreeSet<Word>> {
    let class = classify(mu, default_search_radius(mu));
    if !class.powers_of_generators {
        return Err(Error::NotPowersSupport);
    }
    if generator < 1 || generator > mu.rank() {
        return Err(Error::GeneratorOutOfRange { index: generator, rank: mu.rank() });
    }
    let n = mu.power_range(generator);
    if n == 0 {
        return Err(Error::NotPowersSupport);
    }
    Ok((1..=n as i32).map(|k| Word::power(generator, k)).collect())
}

/// The restricted first-passage vector `p_k = F(e, a_i^k; B ∖ {a_i^k})`
/// along the canonical barrier of a powers walk.
#[derive(Debug, Clone)]
pub struct PVector {
    pub generator: usize,
    pub values: Vec<FpValue>,
}

impl PVector {
    pub fn brackets(&self) -> Vec<Bracket> {
        self.values.iter().map(FpValue::bracket).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.bracket().mid()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computes the p-vector of a powers walk for one generator.
pub fn compute_p_vector(mu: &StepMeasure, generator: usize, tol: f64) -> Result<PVector> {
    let solver = Solver::new(mu);
    compute_p_vector_with(&solver, generator, tol)
}

/// [`compute_p_vector`] reusing an existing engine.
pub fn compute_p_vector_with(solver: &Solver<'_>, generator: usize, tol: f64) -> Result<PVector> {
    let mu = solver.measure();
    let barrier = canonical_power_barrier(mu, generator)?;
    let avoid = AvoidSet::new(barrier.iter().cloned());
    let mut values = Vec::new();
    for k in 1..=barrier.len() {
        let target = Word::power(generator, k as i32);
        values.push(solver.first_passage(
            &Word::identity(),
            &target,
            &avoid.without(&target),
            tol,
        )?);
    }
    Ok(PVector { generator, values })
}

/// Interval-valued square matrix of restricted first-passage entries.
#[derive(Debug, Clone)]
pub struct BarrierMatrix {
    /// Barrier elements fixing the row/column order.
    pub order: Vec<Word>,
    /// Row-major entries.
    pub entries: Vec<FpValue>,
}

impl BarrierMatrix {
    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &FpValue {
        &self.entries[i * self.order.len() + j]
    }

    pub fn bracket(&self, i: usize, j: usize) -> Bracket {
        self.entry(i, j).bracket()
    }

    pub fn midpoint_matrix(&self) -> crate::linalg::Matrix {
        let n = self.size();
        let mut m = crate::linalg::Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.bracket(i, j).mid();
            }
        }
        m
    }

    /// Maximal interval width over the entries.
    pub fn max_width(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.bracket().width())
            .fold(0.0, f64::max)
    }

    /// Row sums must stay within `[0, 1]` up to interval slack.
    pub fn row_sums_substochastic(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            let total: f64 = (0..n).map(|j| self.bracket(i, j).lo).sum();
            total <= 1.0 + 1e-9
        })
    }
}

/// The matrix `(P_B)_{j1,j2} = F(a_i · hat(b_{j1}), b_{j2}; B ∖ {b_{j2}})`
/// of an antisymmetric walk for a verified strong `a_i`-barrier `B`.
///
/// `B` is taken in canonical word order.
pub fn compute_p_b(
    mu: &StepMeasure,
    generator: usize,
    b: &BTreeSet<Word>,
    tol: f64,
) -> Result<BarrierMatrix> {
    let class = classify(mu, default_search_radius(mu));
    if !class.antisymmetric {
        return Err(Error::NotAntisymmetric);
    }
    let g = Word::generator(generator);
    let strong = is_strong_barrier(mu, b, &g)?;
    if !strong.verdict {
        return Err(Error::BarrierPrecondition(alloc::format!(
            "{{{}}} is not a strong {g}-barrier",
            strong
                .barrier_set
                .iter()
                .map(|w| alloc::format!("{w}"))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let order: Vec<Word> = b.iter().cloned().collect();
    let avoid = AvoidSet::new(order.iter().cloned());
    let solver = Solver::new(mu);
    let mut entries = Vec::with_capacity(order.len() * order.len());
    for b1 in &order {
        let source = g.mul(&b1.hat());
        for b2 in &order {
            entries.push(solver.first_passage(&source, b2, &avoid.without(b2), tol)?);
        }
    }
    Ok(BarrierMatrix { order, entries })
}

/// Crossing matrix `p_{jk} = F(a_i^{-n+j}, a_i^k; B ∖ {a_i^k})` of a powers
/// walk, for `1 ≤ j, k ≤ n`.
pub fn compute_crossing_matrix(mu: &StepMeasure, generator: usize, tol: f64) -> Result<BarrierMatrix> {
    let barrier = canonical_power_barrier(mu, generator)?;
    let n = barrier.len();
    let solver = Solver::new(mu);
    let order: Vec<Word> = barrier.iter().cloned().collect();
    let avoid = AvoidSet::new(order.iter().cloned());
    let mut entries = Vec::with_capacity(n * n);
    for j in 1..=n {
        let source = Word::power(generator, j as i32 - n as i32);
        for k in 1..=n {
            let target = Word::power(generator, k as i32);
            entries.push(solver.first_passage(&source, &target, &avoid.without(&target), tol)?);
        }
    }
    Ok(BarrierMatrix { order, entries })
}

/// One row of the crossing family for arbitrary `j ≥ 0`:
/// `(F(a_i^{-n+j}, a_i^k; B ∖ {a_i^k}))_k`. Row `j = n` is the p-vector.
pub fn crossing_row(mu: &StepMeasure, generator: usize, j: usize, tol: f64) -> Result<Vec<FpValue>> {
    let barrier = canonical_power_barrier(mu, generator)?;
    let n = barrier.len();
    if j > n {
        return Err(Error::BadParameter(alloc::format!("row index {j} exceeds n = {n}")));
    }
    let solver = Solver::new(mu);
    let order: Vec<Word> = barrier.iter().cloned().collect();
    let avoid = AvoidSet::new(order.iter().cloned());
    let source = Word::power(generator, j as i32 - n as i32);
    let mut row = Vec::with_capacity(n);
    for k in 1..=n {
        let target = Word::power(generator, k as i32);
        row.push(solver.first_passage(&source, &target, &avoid.without(&target), tol)?);
    }
    Ok(row)
}

/// Residual report shared by the identity checks of this crate.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// `(label, |lhs − rhs| at midpoints, allowed slack)` per checked row.
    pub rows: Vec<(String, f64, f64)>,
    pub max_residual: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn from_rows(rows: Vec<(String, f64, f64)>) -> ResidualReport {
        let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let pass = rows.iter().all(|r| r.1 <= r.2);
        ResidualReport { rows, max_residual, pass }
    }
}

/// Checks the two-barrier decomposition
/// `F(x, b; B∖{b}) = Σ_{b' ∈ B' ∖ (B∖{b})} F(x, b'; B'∖{b'}) · F(b', b; B∖{b})`
/// for every `b ∈ B`, valid when `B` is a strong `g`-barrier, `x ∉ C_fin(g)`,
/// and every path from `x` into `C_fin(g)` meets `B'`.
pub fn lemma6_check(
    mu: &StepMeasure,
    g: &Word,
    b: &BTreeSet<Word>,
    b_prime: &BTreeSet<Word>,
    x: &Word,
    tol: f64,
) -> Result<ResidualReport> {
    let strong = is_strong_barrier(mu, b, g)?;
    if !strong.verdict {
        return Err(Error::BarrierPrecondition(String::from(
            "B must be a strong g-barrier",
        )));
    }
    if g.is_prefix_of(x) {
        return Err(Error::BarrierPrecondition(String::from("x must lie outside C_fin(g)")));
    }
    // B' must intercept every path from x into the shadow.
    let max_bp = b_prime.iter().map(Word::len).max().unwrap_or(0);
    let radius = x.len() + g.len() + max_bp + 2 * mu.max_range();
    let blocks = blocks_shadow_from(mu, x, b_prime, g, radius)?;
    if !blocks.verdict {
        return Err(Error::BarrierPrecondition(String::from(
            "B' does not block every path from x into C_fin(g)",
        )));
    }

    let solver = Solver::new(mu);
    let avoid_b = AvoidSet::new(b.iter().cloned());
    let avoid_bp = AvoidSet::new(b_prime.iter().cloned());
    let mut rows = Vec::new();
    for target in b {
        let lhs = solver.first_passage(x, target, &avoid_b.without(target), tol)?;
        let b_minus = avoid_b.without(target);
        let mut rhs = Bracket::point(0.0);
        let mut width_budget = lhs.bracket().width();
        for bp in b_prime {
            if b_minus.contains(bp) {
                continue;
            }
            let leg1 = solver.first_passage(x, bp, &avoid_bp.without(bp), tol)?;
            let leg2 = solver.first_passage(bp, target, &b_minus, tol)?;
            width_budget += leg1.bracket().width() + leg2.bracket().width();
            rhs = rhs.add(leg1.bracket().mul(leg2.bracket()));
        }
        let resid = libm::fabs(lhs.bracket().mid() - rhs.mid());
        let allowed = width_budget + tol.max(1e-12) * 100.0;
        rows.push((alloc::format!("b = {target}"), resid, allowed));
    }
    Ok(ResidualReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn word(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    fn set(words: &[&str]) -> BTreeSet<Word> {
        words.iter().map(|t| word(t)).collect()
    }

    #[test]
    fn example_28_a_barrier() {
        let mu = presets::example_2_8();
        let cert = is_barrier(&mu, &set(&["a1", "a1 a2"]), &word("a1")).unwrap();
        assert!(cert.verdict, "{{a, ab}} is an a-barrier");
        assert!(cert.witness.is_none());
    }

    #[test]
    fn example_28_singleton_fails_with_witness() {
        let mu = presets::example_2_8();
        let cert = is_barrier(&mu, &set(&["a1"]), &word("a1")).unwrap();
        assert!(!cert.verdict);
        let witness = cert.witness.expect("negative verdict carries a witness");
        // The single support step ab lands in C_fin(a) avoiding {a}.
        assert_eq!(witness, alloc::vec![Word::identity(), word("a1 a2")]);
    }

    #[test]
    fn powers_canonical_barrier() {
        let mu = presets::powers_n2_f2();
        let b = canonical_power_barrier(&mu, 1).unwrap();
        assert_eq!(b, set(&["a1", "a1^2"]));
        let cert = is_barrier(&mu, &b, &word("a1")).unwrap();
        assert!(cert.verdict);
        // Minimality: removing either element breaks it.
        for drop in &b {
            let mut smaller = b.clone();
            smaller.remove(drop);
            let cert = is_barrier(&mu, &smaller, &word("a1")).unwrap();
            assert!(!cert.verdict, "removing {drop} must break the barrier");
            assert!(cert.witness.is_some());
        }
        // NN walk: canonical barrier is the singleton.
        let nn = presets::nn_uniform_f2();
        assert_eq!(canonical_power_barrier(&nn, 1).unwrap(), set(&["a1"]));
        // Mixed support is rejected.
        assert!(matches!(
            canonical_power_barrier(&presets::example_2_8(), 1),
            Err(Error::NotPowersSupport)
        ));
    }

    #[test]
    fn strong_barrier_cases() {
        let powers = presets::powers_n2_f2();
        let cert = is_strong_barrier(&powers, &set(&["a1", "a1^2"]), &word("a1")).unwrap();
        assert!(cert.verdict, "canonical powers barrier is strong");

        // Strong implies barrier.
        let plain = is_barrier(&powers, &set(&["a1", "a1^2"]), &word("a1")).unwrap();
        assert!(plain.verdict);

        // A set reaching outside the shadow is rejected by the first clause.
        let cert = is_strong_barrier(&powers, &set(&["a1", "a2"]), &word("a1")).unwrap();
        assert!(!cert.verdict);
        assert!(matches!(cert.failure, Some(BarrierFailure::MemberOutsideShadow(_))));

        // Example 2.8: {a, ab} also blocks every exterior entry.
        let mu28 = presets::example_2_8();
        let cert = is_strong_barrier(&mu28, &set(&["a1", "a1 a2"]), &word("a1")).unwrap();
        assert!(cert.verdict);

        // Example 4.1: {a} alone is not strong for a (the step ab enters).
        let mu41 = presets::example_4_1_antisym();
        let cert = is_strong_barrier(&mu41, &set(&["a1"]), &word("a1")).unwrap();
        assert!(!cert.verdict);
        assert!(cert.witness.is_some());
    }

    #[test]
    fn witness_replays_under_support_steps() {
        let mu = presets::example_4_1_antisym();
        let cert = is_barrier(&mu, &set(&["a1"]), &word("a1")).unwrap();
        assert!(!cert.verdict);
        let path = cert.witness.unwrap();
        for pair in path.windows(2) {
            let step = pair[0].inverse().mul(&pair[1]);
            assert!(mu.prob(&step) > 0.0, "step {step} must be in the support");
        }
        let b = set(&["a1"]);
        for state in &path[..path.len() - 1] {
            assert!(!b.contains(state));
        }
        assert!(word("a1").is_prefix_of(path.last().unwrap()));
    }

    #[test]
    fn positive_verdicts_stable_under_radius_growth() {
        let mu = presets::example_2_8();
        let b = set(&["a1", "a1 a2"]);
        let g = word("a1");
        let base = is_barrier(&mu, &b, &g).unwrap();
        assert!(base.verdict);
        let bigger = is_barrier_with_radius(&mu, &b, &g, base.search_radius + mu.max_range())
            .unwrap();
        assert!(bigger.verdict);
    }

    #[test]
    fn p_vector_positive_for_powers_walks() {
        let mu = presets::powers_n2_f2();
        let p = compute_p_vector(&mu, 1, 1e-10).unwrap();
        assert_eq!(p.len(), 2);
        for v in &p.values {
            assert!(v.lower > 0.0);
            assert!(v.converged);
        }
        let nn = presets::nn_uniform_f2();
        let p1 = compute_p_vector(&nn, 1, 1e-10).unwrap();
        assert_eq!(p1.len(), 1);
        assert!((p1.values[0].bracket().mid() - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn p_b_rejects_non_antisymmetric() {
        let mu = presets::example_2_8();
        assert!(matches!(
            compute_p_b(&mu, 1, &set(&["a1", "a1 a2"]), 1e-8),
            Err(Error::NotAntisymmetric)
        ));
    }

    #[test]
    fn crossing_matrix_last_row_is_p_vector() {
        let mu = presets::powers_n2_f2();
        let crossing = compute_crossing_matrix(&mu, 1, 1e-10).unwrap();
        let p = compute_p_vector(&mu, 1, 1e-10).unwrap();
        let n = crossing.size();
        for k in 0..n {
            let a = crossing.bracket(n - 1, k).mid();
            let b = p.values[k].bracket().mid();
            assert!((a - b).abs() < 1e-9, "row n entry {k}: {a} vs {b}");
        }
    }
}
