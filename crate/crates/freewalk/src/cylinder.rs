//! Linear systems tying restricted first-passage values to the hitting
//! measure of boundary cylinders.

use alloc::string::String;
use alloc::vec::Vec;

use crate::barrier::{
    blocks_shadow_from, is_barrier, is_strong_barrier, BarrierMatrix, PVector, ResidualReport,
};
use crate::bracket::Bracket;
use crate::fp::{AvoidSet, Solver};
use crate::linalg::Matrix;
use crate::word::{ball, Word, WordMap};
use crate::{Error, Result};

/// The `n × n` system of Eq. (7) type for a powers walk:
/// `ν_k = Σ_{j<k} p_j ν_{k-j} + Σ_{j≥k} p_j (1 − ν_{j-k+1})`.
#[derive(Debug, Clone)]
pub struct CylinderSystem {
    /// Variable labels `ν(C(a_i^k))`, k = 1..n.
    pub labels: Vec<Word>,
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    /// The p-vector the system was assembled from (kept for residuals).
    pub p: Vec<Bracket>,
}

/// Assembles the cylinder system from a p-vector (midpoint coefficients).
pub fn assemble_power_system(p: &PVector) -> CylinderSystem {
    let n = p.len();
    let mids = p.midpoints();
    let mut matrix = Matrix::zeros(n);
    let mut rhs = alloc::vec![0.0; n];
    for k in 1..=n {
        let row = k - 1;
        matrix[(row, k - 1)] += 1.0;
        for j in 1..k {
            // −p_j ν_{k−j}
            matrix[(row, k - j - 1)] -= mids[j - 1];
        }
        for j in k..=n {
            // +p_j ν_{j−k+1} moved left; RHS collects Σ_{j≥k} p_j.
            matrix[(row, j - k)] += mids[j - 1];
            rhs[row] += mids[j - 1];
        }
    }
    let labels = (1..=n as i32).map(|k| Word::power(p.generator, k)).collect();
    CylinderSystem { labels, matrix, rhs, p: p.brackets() }
}

/// Solution of a cylinder system with the ordering hypothesis verdict.
#[derive(Debug, Clone)]
pub struct CylinderSolution {
    /// `ν_1, …, ν_n`.
    pub nu: Vec<f64>,
    /// `0 < ν_n < … < ν_1 < 1/2` held strictly.
    pub ordering_verified: bool,
    /// Max row defect of the original system at the solved values.
    pub residual: f64,
}

/// Solves the system by partial-pivot elimination and evaluates the defect
/// in the original equations.
pub fn solve_cylinders(system: &CylinderSystem) -> Result<CylinderSolution> {
    let nu = system.matrix.solve(&system.rhs)?;
    let n = nu.len();
    let p: Vec<f64> = system.p.iter().map(|b| b.mid()).collect();
    let mut residual = 0.0f64;
    for k in 1..=n {
        let mut rhs = 0.0;
        for j in 1..k {
            rhs += p[j - 1] * nu[k - j - 1];
        }
        for j in k..=n {
            rhs += p[j - 1] * (1.0 - nu[j - k]);
        }
        residual = residual.max(libm::fabs(nu[k - 1] - rhs));
    }
    let mut ordering = nu[0] < 0.5;
    for w in nu.windows(2) {
        ordering &= w[1] < w[0];
    }
    ordering &= *nu.last().unwrap() > 0.0;
    Ok(CylinderSolution { nu, ordering_verified: ordering, residual })
}

/// Evaluates `(Id + P_B)^{-1} P_B · 1`, the vector of `ν(C(b_j^{-1}))` for
/// an antisymmetric walk and a strong barrier (enforced upstream).
///
/// The solve uses midpoint entries; the returned brackets widen the result
/// by a first-order perturbation bound from the entry widths.
pub fn nu_from_matrix_identity(p_b: &BarrierMatrix) -> Result<Vec<Bracket>> {
    let n = p_b.size();
    let p = p_b.midpoint_matrix();
    let a = Matrix::identity(n).add(&p);
    let ones = alloc::vec![1.0; n];
    let rhs = p.mul_vec(&ones);
    let nu = a.solve(&rhs)?;
    // Overestimate of ‖(I+P)^{-1}‖_∞ from the n unit right-hand sides.
    let mut max_entry = 0.0f64;
    for i in 0..n {
        let mut e = alloc::vec![0.0; n];
        e[i] = 1.0;
        for v in a.solve(&e)? {
            max_entry = max_entry.max(libm::fabs(v));
        }
    }
    let opnorm = max_entry * n as f64;
    let width = 2.0 * opnorm * p_b.max_width().max(1e-15);
    Ok(nu
        .iter()
        .map(|&v| {
            if !(0.0..=1.0).contains(&v) {
                // Substochastic P_B keeps ν in (0,1); flag wild solves.
                Bracket::new(0.0, 1.0)
            } else {
                Bracket::new((v - width).max(0.0), (v + width).min(1.0))
            }
        })
        .collect())
}

/// Needed cylinder keys for [`prop_residual_check`].
pub fn prop_check_keys(b: &alloc::collections::BTreeSet<Word>, h: &Word, x: &Word) -> Vec<Word> {
    debug_assert!(!h.is_identity());
    let mut keys = alloc::vec![x.inverse().mul(h)];
    let h_parent = h.prefix(h.len() - 1);
    for member in b {
        if h.is_prefix_of(member) {
            // b ∈ C_fin(h): the identity uses ν(C(b^{-1} h_1…h_{l-1})).
            keys.push(member.inverse().mul(&h_parent));
        } else {
            keys.push(member.inverse().mul(h));
        }
    }
    keys.sort();
    keys.dedup();
    keys
}

/// Checks the barrier identity for cylinder measures:
///
/// `ν(C(x^{-1}h)) = Σ_{b ∈ B ∩ C_fin(h)} F(x,b;B∖{b})(1 − ν(C(b^{-1}h_1…h_{l-1})))`
/// `             + Σ_{b ∈ B ∖ C_fin(h)} F(x,b;B∖{b}) ν(C(b^{-1}h))`
///
/// with `x = e` under a plain barrier and general `x ∉ C_fin(g)` under a
/// strong barrier. `nu_estimates` must supply every key from
/// [`prop_check_keys`]; the tolerance combines interval widths with the
/// supplied estimate widths (MC standard errors enter as bracket widths).
pub fn prop_residual_check(
    mu: &crate::measure::StepMeasure,
    b: &alloc::collections::BTreeSet<Word>,
    g: &Word,
    h: &Word,
    x: &Word,
    nu_estimates: &WordMap<Bracket>,
    tol: f64,
) -> Result<ResidualReport> {
    if !g.is_prefix_of(h) {
        return Err(Error::BarrierPrecondition(alloc::format!(
            "h = {h} must lie in C_fin({g})"
        )));
    }
    if x.is_identity() {
        let cert = is_barrier(mu, b, g)?;
        if !cert.verdict {
            return Err(Error::BarrierPrecondition(String::from("B is not a g-barrier")));
        }
    } else {
        let cert = is_strong_barrier(mu, b, g)?;
        if !cert.verdict {
            return Err(Error::BarrierPrecondition(String::from(
                "B is not a strong g-barrier",
            )));
        }
        if g.is_prefix_of(x) {
            return Err(Error::BarrierPrecondition(String::from(
                "x must lie outside C_fin(g)",
            )));
        }
    }

    let lookup = |w: &Word| -> Result<Bracket> {
        nu_estimates
            .get(w)
            .copied()
            .ok_or_else(|| Error::MissingValue(alloc::format!("ν(C({w}))")))
    };

    let lhs = lookup(&x.inverse().mul(h))?;
    let h_parent = h.prefix(h.len() - 1);
    let solver = Solver::new(mu);
    let avoid = AvoidSet::new(b.iter().cloned());
    let mut rhs = Bracket::point(0.0);
    let mut width_budget = lhs.width();
    for member in b {
        let fp = solver.first_passage(x, member, &avoid.without(member), tol)?;
        width_budget += fp.bracket().width();
        let factor = if h.is_prefix_of(member) {
            // b ∈ B ∩ C_fin(h).
            let nu = lookup(&member.inverse().mul(&h_parent))?;
            width_budget += nu.width();
            nu.one_minus()
        } else {
            let nu = lookup(&member.inverse().mul(h))?;
            width_budget += nu.width();
            nu
        };
        rhs = rhs.add(fp.bracket().mul(factor));
    }
    let resid = libm::fabs(lhs.mid() - rhs.mid());
    let allowed = width_budget.max(1e-12) + 100.0 * tol;
    Ok(ResidualReport::from_rows(alloc::vec![(
        alloc::format!("ν(C({})) decomposition over {} barrier elements", x.inverse().mul(h), b.len()),
        resid,
        allowed,
    )]))
}

/// Truncated return-series lower bounds for `ν(C(h))`.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    /// `terms[k]` brackets the k-return term of the series.
    pub terms: Vec<Bracket>,
    /// `partial[k]` brackets `Σ_{j ≤ k}`; its lower ends are certified
    /// lower bounds for `ν(C(h))`, monotone in `k`.
    pub partial: Vec<Bracket>,
}

/// Evaluates the series
/// `ν(C(h)) = Σ_k F(e → S_ent (→ S_exit → S_ent)^k ↛ S_exit)`
/// truncated at `k_max`, with
/// `S_ent = C_fin(h) ∩ B(h, n)` and `S_exit = B(h, n) ∖ C_fin(h)`.
pub fn nu_via_returns(
    mu: &crate::measure::StepMeasure,
    h: &Word,
    k_max: usize,
    tol: f64,
) -> Result<ReturnSeries> {
    if h.is_identity() {
        return Err(Error::IdentityNotAllowed("cylinder root"));
    }
    let n = mu.max_range();
    let mut s_ent: Vec<Word> = Vec::new();
    let mut s_exit: Vec<Word> = Vec::new();
    for w in ball(h, n, mu.rank()) {
        if h.is_prefix_of(&w) {
            s_ent.push(w);
        } else {
            s_exit.push(w);
        }
    }
    s_ent.sort();
    s_exit.sort();

    let solver = Solver::new(mu);
    let ent_avoid = AvoidSet::new(s_ent.iter().cloned());
    let exit_avoid = AvoidSet::new(s_exit.iter().cloned());

    // Backward tables over the alternating chain. All levels reuse three
    // first-passage tables, so deep truncations cost only arithmetic.
    let mut escape: WordMap<Bracket> = WordMap::new();
    for a in &s_ent {
        let esc = solver.escape_probability(a, &exit_avoid, tol)?;
        escape.insert(a.clone(), esc.bracket());
    }
    // F(x, a; S_ent ∖ {a}) for x ∈ {e} ∪ S_exit.
    let mut into_ent: WordMap<Vec<Bracket>> = WordMap::new();
    let mut sources: Vec<Word> = s_exit.clone();
    sources.push(Word::identity());
    sources.sort();
    sources.dedup();
    for x in &sources {
        let mut row = Vec::with_capacity(s_ent.len());
        for a in &s_ent {
            if ent_avoid.without(a).contains(x) {
                row.push(Bracket::point(0.0));
                continue;
            }
            row.push(solver.first_passage(x, a, &ent_avoid.without(a), tol)?.bracket());
        }
        into_ent.insert(x.clone(), row);
    }
    // F(a, x; S_exit ∖ {x}) for a ∈ S_ent.
    let mut into_exit: WordMap<Vec<Bracket>> = WordMap::new();
    for a in &s_ent {
        let mut row = Vec::with_capacity(s_exit.len());
        for x in &s_exit {
            if exit_avoid.without(x).contains(a) {
                row.push(Bracket::point(0.0));
                continue;
            }
            row.push(solver.first_passage(a, x, &exit_avoid.without(x), tol)?.bracket());
        }
        into_exit.insert(a.clone(), row);
    }

    // v_ent[a] = value of the remaining chain starting at a ∈ S_ent with
    // the next arrow pointing at S_exit; level 0 is the terminal escape.
    let mut v_ent: Vec<Bracket> = s_ent.iter().map(|a| escape[a]).collect();
    let mut terms = Vec::with_capacity(k_max + 1);
    let mut partial = Vec::with_capacity(k_max + 1);
    let mut running = Bracket::point(0.0);
    for k in 0..=k_max {
        // Term k: e → S_ent, then the current v_ent.
        let row = &into_ent[&Word::identity()];
        let term = Bracket::sum(row.iter().zip(&v_ent).map(|(f, v)| f.mul(*v)));
        running = running.add(term);
        terms.push(term);
        partial.push(running);
        if k == k_max {
            break;
        }
        // Grow the chain by one return: S_exit → S_ent, then S_ent → S_exit.
        let v_exit: Vec<Bracket> = s_exit
            .iter()
            .map(|x| {
                let row = &into_ent[x];
                Bracket::sum(row.iter().zip(&v_ent).map(|(f, v)| f.mul(*v)))
            })
            .collect();
        v_ent = s_ent
            .iter()
            .map(|a| {
                let row = &into_exit[a];
                Bracket::sum(row.iter().zip(&v_exit).map(|(f, v)| f.mul(*v)))
            })
            .collect();
    }
    Ok(ReturnSeries { terms, partial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::compute_p_vector;
    use crate::presets;

    #[test]
    fn n1_system_closed_form() {
        // Single equation ν = p(1−ν), so ν = p/(1+p); p = 1/3 gives 1/4.
        let mu = presets::nn_uniform_f2();
        let p = compute_p_vector(&mu, 1, 1e-10).unwrap();
        let system = assemble_power_system(&p);
        let sol = solve_cylinders(&system).unwrap();
        assert_eq!(sol.nu.len(), 1);
        assert!((sol.nu[0] - 0.25).abs() < 1e-8, "ν = {}", sol.nu[0]);
        assert!(sol.ordering_verified);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn zero_p_vector_gives_zero_solution() {
        let system = CylinderSystem {
            labels: alloc::vec![Word::power(1, 1)],
            matrix: Matrix::from_rows(&[alloc::vec![1.0]]),
            rhs: alloc::vec![0.0],
            p: alloc::vec![Bracket::point(0.0)],
        };
        let sol = solve_cylinders(&system).unwrap();
        assert_eq!(sol.nu, alloc::vec![0.0]);
        assert!(!sol.ordering_verified);
    }

    #[test]
    fn scalar_matrix_identity() {
        // 1×1 case: ν = p/(1+p).
        let fp = crate::fp::FpValue { lower: 1.0 / 3.0, upper: 1.0 / 3.0, iterations: 0, radius_used: 0, converged: true };
        let m = BarrierMatrix { order: alloc::vec![Word::power(1, 1)], entries: alloc::vec![fp] };
        let nu = nu_from_matrix_identity(&m).unwrap();
        assert!(nu[0].contains(0.25));
        assert!(nu[0].width() < 1e-9);
    }

    #[test]
    fn return_series_monotone_and_bounded() {
        let mu = presets::nn_uniform_f2();
        let series = nu_via_returns(&mu, &Word::power(1, 1), 10, 1e-8).unwrap();
        for pair in series.partial.windows(2) {
            assert!(pair[1].lo >= pair[0].lo - 1e-14);
        }
        let last = series.partial.last().unwrap();
        // Converges to ν(C(a)) = 1/4 from below.
        assert!(last.lo <= 0.25 + 1e-9);
        assert!((last.mid() - 0.25).abs() < 1e-3, "got {last}");
        // First term alone is already a valid lower bound.
        assert!(series.partial[0].lo > 0.0);
        assert!(series.partial[0].lo <= 0.25);
    }
}
