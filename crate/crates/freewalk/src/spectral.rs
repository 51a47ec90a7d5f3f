//! Companion-matrix spectral computations: the Perron root of
//! `x^n − p_1 x^{n-1} − … − p_n`, Collatz–Wielandt brackets from
//! first-passage ratios, and the decomposition `F_B^n = S · P_B`.

use alloc::vec::Vec;

use crate::barrier::{compute_crossing_matrix, compute_p_vector, crossing_row, PVector};
use crate::bracket::Bracket;
use crate::cylinder::{assemble_power_system, solve_cylinders, CylinderSolution};
use crate::fp::{fp_ratio_sequence, RatioSequence};
use crate::linalg::Matrix;
use crate::measure::{classify, default_search_radius, StepMeasure};
use crate::{Error, Result};

/// Unique positive root of `x^n − Σ p_k x^{n−k}` for nonnegative `p` with
/// `p_n > 0`, by bisection of the monotone map `x ↦ Σ p_k x^{−k}`.
pub fn perron_root(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::BadParameter(alloc::string::String::from("empty p-vector")));
    }
    if p.iter().any(|&v| v < 0.0) {
        return Err(Error::BadParameter(alloc::string::String::from(
            "p-vector entries must be nonnegative",
        )));
    }
    if *p.last().unwrap() <= 0.0 {
        return Err(Error::BadParameter(alloc::string::String::from(
            "p_n must be positive (companion matrix irreducible)",
        )));
    }
    Ok(positive_root_unchecked(p))
}

/// Bisection core; tolerates `p_n = 0` (used for interval endpoints).
fn positive_root_unchecked(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    // φ(x) = Σ p_k x^{-k} − 1 is strictly decreasing on (0, ∞).
    let phi = |x: f64| -> f64 {
        let mut acc = 0.0;
        let mut inv = 1.0;
        for &pk in p {
            inv /= x;
            if pk > 0.0 {
                acc += pk * inv;
            }
        }
        acc - 1.0
    };
    let mut lo = 0.0f64;
    let mut hi = total + 1.0;
    debug_assert!(phi(hi) < 0.0);
    for _ in 0..240 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Interval Perron root from an interval p-vector (the root is monotone
/// increasing in every coefficient).
pub fn perron_root_bracket(p: &[Bracket]) -> Result<Bracket> {
    let lows: Vec<f64> = p.iter().map(|b| b.lo).collect();
    let highs: Vec<f64> = p.iter().map(|b| b.hi).collect();
    if highs.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::BadParameter(alloc::string::String::from(
            "p_n must be positive",
        )));
    }
    Ok(Bracket::new(
        positive_root_unchecked(&lows),
        positive_root_unchecked(&highs),
    ))
}

/// Collatz–Wielandt bounds from a window of `n` consecutive ratios
/// `F(e, a^k)/F(e, a^{k-1})`: the min and max bracket the Perron root for
/// any positive seed vector.
pub fn collatz_wielandt_bounds(ratios: &[Bracket], n: usize) -> Result<(f64, f64)> {
    if ratios.len() < n || n == 0 {
        return Err(Error::BadParameter(alloc::format!(
            "need a window of {n} ratios, have {}",
            ratios.len()
        )));
    }
    let window = &ratios[ratios.len() - n..];
    let lo = window.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min);
    let hi = window.iter().map(|b| b.hi).fold(0.0f64, f64::max);
    Ok((lo, hi))
}

/// Report of the per-`j` telescoping identities and the decomposition
/// `F_B^n = S · P_B` with entries computed from independent sources.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// `‖F_B^n − S·P_B‖_max` at midpoints.
    pub residual: f64,
    /// Combined interval widths, the allowed slack for `residual`.
    pub allowed: f64,
    /// Midpoint residuals of `F_B · M_j = M_{j-1}` for `j = n, n-1, …, 1`.
    pub per_j: Vec<f64>,
    pub pass: bool,
}

/// Verifies the decomposition identity on a powers walk.
pub fn verify_decomposition(mu: &StepMeasure, generator: usize, tol: f64) -> Result<DecompositionReport> {
    let p = compute_p_vector(mu, generator, tol)?;
    let n = p.len();
    let crossing = compute_crossing_matrix(mu, generator, tol)?;

    let f_b = Matrix::companion(&p.midpoints());
    let mut f_pow = Matrix::identity(n);
    for _ in 0..n {
        f_pow = f_b.mul(&f_pow);
    }
    let s_pb = crossing.midpoint_matrix();
    let residual = f_pow.max_abs_diff(&s_pb);

    // Width budget: n-fold products of p-brackets against crossing widths.
    let p_width: f64 = p.brackets().iter().map(Bracket::width).fold(0.0, f64::max);
    let allowed = (n as f64) * (n as f64) * p_width + crossing.max_width() * (n as f64) + 1e-9;

    // Telescoping: M_j has crossing rows j..n above shifted identity rows;
    // F_B · M_j = M_{j-1}, with the j = 1 step landing on the row of
    // sources a_i^{-n} (computed independently).
    let build_m = |j: usize| -> Matrix {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for row in j..=n {
            rows.push((0..n).map(|k| crossing.bracket(row - 1, k).mid()).collect());
        }
        let mut shift = 0;
        while rows.len() < n {
            let mut unit = alloc::vec![0.0; n];
            unit[shift] = 1.0;
            rows.push(unit);
            shift += 1;
        }
        Matrix::from_rows(&rows)
    };
    let mut per_j = Vec::new();
    for j in (2..=n).rev() {
        let lhs = f_b.mul(&build_m(j));
        let rhs = build_m(j - 1);
        per_j.push(lhs.max_abs_diff(&rhs));
    }
    // j = 1: top row of F_B · M_1 equals the j = 0 crossing row.
    let row0 = crossing_row(mu, generator, 0, tol)?;
    let lhs = f_b.mul(&build_m(1));
    let mut max_j1 = 0.0f64;
    for k in 0..n {
        max_j1 = max_j1.max(libm::fabs(lhs[(0, k)] - row0[k].bracket().mid()));
    }
    // Remaining rows of F_B·M_1 must reproduce crossing rows 1..n-1.
    for i in 1..n {
        for k in 0..n {
            max_j1 = max_j1.max(libm::fabs(lhs[(i, k)] - crossing.bracket(i - 1, k).mid()));
        }
    }
    per_j.push(max_j1);

    let pass = residual <= allowed && per_j.iter().all(|&r| r <= allowed);
    Ok(DecompositionReport { residual, allowed, per_j, pass })
}

/// Verdict of the ordered-solution inequalities and cone memberships.
#[derive(Debug, Clone)]
pub struct Lemma32Report {
    /// `(i, slack)` of `ν_1/(1−ν_1) ≤ (1−ν_i)/(1−ν_{i+1})`.
    pub ratio_slacks: Vec<(usize, f64)>,
    /// `(j, slack)` of the cone membership of `(ν_j, ν_{j+1})`.
    pub cone_slacks: Vec<(usize, f64)>,
    pub hypothesis_met: bool,
    pub pass: bool,
}

/// Checks the conclusion `ν₁/(1−ν₁) ≤ (1−ν_i)/(1−ν_{i+1})` and the
/// positive-span memberships used in its proof.
pub fn lemma32_check(solution: &CylinderSolution) -> Lemma32Report {
    let nu = &solution.nu;
    let n = nu.len();
    if !solution.ordering_verified {
        return Lemma32Report {
            ratio_slacks: Vec::new(),
            cone_slacks: Vec::new(),
            hypothesis_met: false,
            pass: false,
        };
    }
    let base = nu[0] / (1.0 - nu[0]);
    let mut ratio_slacks = Vec::new();
    for i in 1..n {
        let rhs = (1.0 - nu[i - 1]) / (1.0 - nu[i]);
        ratio_slacks.push((i, rhs - base));
    }

    // Rows j and j+1 of the system stack into vectors
    // v_l = (w_{j,l}, w_{j+1,l}); (ν_j, ν_{j+1}) must lie in their cone.
    let w = |k: usize, l: usize| -> f64 {
        if l < k {
            nu[k - l - 1]
        } else {
            1.0 - nu[l - k]
        }
    };
    let mut cone_slacks = Vec::new();
    for j in 1..n {
        let mut min_slope = f64::INFINITY;
        let mut max_slope = 0.0f64;
        for l in 1..=n {
            let vx = w(j, l);
            let vy = w(j + 1, l);
            if vx <= 0.0 {
                continue;
            }
            let slope = vy / vx;
            min_slope = min_slope.min(slope);
            max_slope = max_slope.max(slope);
        }
        let slope = nu[j] / nu[j - 1];
        let slack = (slope - min_slope).min(max_slope - slope);
        cone_slacks.push((j, slack));
    }

    let pass = ratio_slacks.iter().all(|&(_, s)| s >= -1e-9)
        && cone_slacks.iter().all(|&(_, s)| s >= -1e-9);
    Lemma32Report { ratio_slacks, cone_slacks, hypothesis_met: true, pass }
}

/// Full certification of the spectral inequality for one generator of a
/// symmetric powers walk.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub generator: usize,
    pub p_vector: PVector,
    /// Midpoint Perron root of `x^n − Σ p_k x^{n−k}`.
    pub lambda1: f64,
    /// Rigorous bracket of the root from the p-vector intervals.
    pub lambda1_bracket: Bracket,
    /// Power iteration agreement `|λ₁(bisect) − λ₁(power)|`.
    pub power_iteration_gap: f64,
    pub cw_lower: f64,
    pub cw_upper: f64,
    /// `ν₁ / (1 − ν₁)` from the cylinder system.
    pub nu_ratio: f64,
    /// `λ₁ − ν₁/(1−ν₁)`, the certified inequality margin.
    pub inequality_gap: f64,
    /// `F(e, a_i^{k_max})^{1/k_max}`.
    pub rho_estimate: f64,
    pub decomposition_residual: f64,
    pub cylinders: CylinderSolution,
    pub lemma32: Lemma32Report,
    pub ratios: RatioSequence,
    /// Ordering hypothesis `0 < ν_n < … < ν_1 < 1/2` held.
    pub hypothesis_met: bool,
    /// All component checks passed at their tolerances.
    pub pass: bool,
}

/// Options for [`verify_one_geodesic`].
#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub tol: f64,
    pub k_max: usize,
    /// Width required of the Collatz–Wielandt bracket at `k_max`.
    pub cw_width_target: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { tol: 1e-10, k_max: 30, cw_width_target: 1e-4 }
    }
}

/// Certifies `λ₁ ≥ ν₁/(1−ν₁)` and `lim F(e,a^k)^{1/k} = λ₁` (via the
/// Collatz–Wielandt bracket) for a symmetric powers walk.
pub fn verify_one_geodesic(
    mu: &StepMeasure,
    generator: usize,
    opts: SpectralOptions,
) -> Result<SpectralReport> {
    let class = classify(mu, default_search_radius(mu));
    if !class.powers_of_generators {
        return Err(Error::NotPowersSupport);
    }
    if !class.symmetric {
        return Err(Error::NotSymmetric);
    }

    let p = compute_p_vector(mu, generator, opts.tol)?;
    let mids = p.midpoints();
    let lambda1 = perron_root(&mids)?;
    let lambda1_bracket = perron_root_bracket(&p.brackets())?;
    let power_lambda = Matrix::companion(&mids).power_iteration(1e-14, 1_000_000)?;
    let power_iteration_gap = libm::fabs(lambda1 - power_lambda);

    let system = assemble_power_system(&p);
    let cylinders = solve_cylinders(&system)?;
    let hypothesis_met = cylinders.ordering_verified;
    let nu_ratio = cylinders.nu[0] / (1.0 - cylinders.nu[0]);
    let lemma32 = lemma32_check(&cylinders);

    let ratios = fp_ratio_sequence(mu, generator, opts.k_max, opts.tol)?;
    let (cw_lower, cw_upper) = collatz_wielandt_bounds(&ratios.ratios, p.len())?;
    let k = ratios.values.len();
    let last = ratios.values[k - 1];
    let rho_estimate = libm::pow(last.mid(), 1.0 / k as f64);

    let decomposition = verify_decomposition(mu, generator, opts.tol)?;

    let inequality_gap = lambda1 - nu_ratio;
    let pass = hypothesis_met
        && inequality_gap >= -opts.tol.max(1e-6)
        && cw_lower - 1e-9 <= lambda1_bracket.hi
        && lambda1_bracket.lo <= cw_upper + 1e-9
        && (cw_upper - cw_lower) < opts.cw_width_target
        && power_iteration_gap < 1e-10
        && decomposition.pass
        && lemma32.pass;

    Ok(SpectralReport {
        generator,
        p_vector: p,
        lambda1,
        lambda1_bracket,
        power_iteration_gap,
        cw_lower,
        cw_upper,
        nu_ratio,
        inequality_gap,
        rho_estimate,
        decomposition_residual: decomposition.residual,
        cylinders,
        lemma32,
        ratios,
        hypothesis_met,
        pass,
    })
}

/// Raw `ρ` diagnostics for one generator: the `k`-th root of
/// `F(e, a_i^{k_max})` with the ratio sequence alongside.
#[derive(Debug, Clone)]
pub struct RhoReport {
    pub generator: usize,
    pub kth_root: Bracket,
    pub ratios: RatioSequence,
    /// For powers walks: `|kth_root − λ₁|`.
    pub lambda_agreement: Option<f64>,
}

/// Estimates `ρ_μ(a_i) = liminf F(e, a_i^k)^{1/k}` at a finite `k_max`.
pub fn rho_estimate(mu: &StepMeasure, generator: usize, k_max: usize, tol: f64) -> Result<RhoReport> {
    if k_max < 3 || k_max < mu.max_range() {
        return Err(Error::BadParameter(alloc::format!(
            "k_max = {k_max} must be at least max(3, max_range)"
        )));
    }
    let ratios = fp_ratio_sequence(mu, generator, k_max, tol)?;
    let last = *ratios.values.last().unwrap();
    let k = ratios.values.len() as f64;
    let kth_root = Bracket::new(libm::pow(last.lo, 1.0 / k), libm::pow(last.hi, 1.0 / k));
    let class = classify(mu, default_search_radius(mu));
    let lambda_agreement = if class.powers_of_generators {
        let p = compute_p_vector(mu, generator, tol)?;
        let lambda = perron_root(&p.midpoints())?;
        Some(libm::fabs(kth_root.mid() - lambda))
    } else {
        None
    };
    Ok(RhoReport { generator, kth_root, ratios, lambda_agreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn perron_root_closed_forms() {
        // n = 1 linear case.
        assert!((perron_root(&[1.0 / 3.0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // x² − x/2 − 1/2 = (x − 1)(x + 1/2).
        assert!((perron_root(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        // Reducible case rejected.
        assert!(perron_root(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn perron_root_monotone_in_p() {
        let base = perron_root(&[0.3, 0.2]).unwrap();
        assert!(perron_root(&[0.31, 0.2]).unwrap() > base);
        assert!(perron_root(&[0.3, 0.21]).unwrap() > base);
    }

    #[test]
    fn bisection_matches_power_iteration() {
        for p in [alloc::vec![0.4, 0.1], alloc::vec![0.25, 0.2, 0.05]] {
            let root = perron_root(&p).unwrap();
            let power = Matrix::companion(&p).power_iteration(1e-14, 1_000_000).unwrap();
            assert!((root - power).abs() < 1e-10, "{root} vs {power}");
        }
    }

    #[test]
    fn cw_window_basics() {
        let flat = alloc::vec![Bracket::point(1.0 / 3.0); 5];
        let (lo, hi) = collatz_wielandt_bounds(&flat, 1).unwrap();
        assert_eq!((lo, hi), (1.0 / 3.0, 1.0 / 3.0));
        // Order-free within the window.
        let mixed = alloc::vec![Bracket::point(0.4), Bracket::point(0.3)];
        let (lo, hi) = collatz_wielandt_bounds(&mixed, 2).unwrap();
        assert_eq!((lo, hi), (0.3, 0.4));
        assert!(collatz_wielandt_bounds(&mixed, 3).is_err());
    }

    #[test]
    fn nn_geodesic_degenerate_equality() {
        // n = 1: λ₁ = p₁ = F(e,a) and ν/(1−ν) = λ₁ exactly.
        let mu = presets::nn_uniform_f2();
        let report = verify_one_geodesic(&mu, 1, SpectralOptions::default()).unwrap();
        assert!(report.pass, "report must certify: gap {}", report.inequality_gap);
        assert!((report.lambda1 - 1.0 / 3.0).abs() < 1e-9);
        assert!(report.inequality_gap.abs() < 1e-8);
        assert!((report.nu_ratio - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mu = presets::example_4_1_antisym();
        assert!(verify_one_geodesic(&mu, 1, SpectralOptions::default()).is_err());
    }

    #[test]
    fn rho_estimate_k_guard() {
        let mu = presets::nn_uniform_f2();
        assert!(rho_estimate(&mu, 1, 2, 1e-8).is_err());
        let report = rho_estimate(&mu, 1, 12, 1e-8).unwrap();
        // Multiplicative walk: exactly F(e,a) = 1/3 at every k.
        assert!((report.kth_root.mid() - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(report.lambda_agreement.is_some(), true);
    }
}
