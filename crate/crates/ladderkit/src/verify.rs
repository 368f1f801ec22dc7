//! Residual checks across a chain: level-coupling conditions, adjointness
//! under the weighted products, boundary certificates, and agreement of the
//! expanded operator with its factorized forms.
//!
//! Condition residuals are evaluated in cross-multiplied form so zeros of
//! `b` never force a division.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{
    apply_annihilation, apply_creation, apply_factored_lower, compose_hamiltonian, ChainSpec,
    OperatorSide,
};
use crate::error::Result;
use crate::exec;
use crate::grid::LevelSequence;
use crate::weight::{inner_product, weighted_norm, BoundaryReport};

/// Max absolute residual of the three coupling conditions between level
/// `level` and `level + 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionResiduals {
    pub level: usize,
    pub condition5: f64,
    pub condition6: f64,
    pub condition7: f64,
}

/// Evaluates the coupling conditions for every consecutive level pair.
///
/// With data for levels `k` and `k+1` the three residuals are, per index:
/// the transport of `f` (cross-multiplied by `b_{k+1}`), the transport of
/// `c` (cross-multiplied by `b_k`), and the balance of the diagonal terms
/// (cross-multiplied by `b_{k+1}`).
pub fn check_chain_conditions(chain: &ChainSpec) -> Vec<ConditionResiduals> {
    let g = chain.grid();
    let mut rows = Vec::new();
    for k in 0..chain.top_level() {
        let lo = chain.level_data(k);
        let hi = chain.level_data(k + 1);
        let dalpha = chain.alpha_at(k + 1) - chain.alpha_at(k);
        let mut r5: f64 = 0.0;
        let mut r6: f64 = 0.0;
        let mut r7: f64 = 0.0;
        for n in g.left()..=(g.right() + 1) {
            let res5 = hi.b().value(n) * (hi.f().value(n) - 1.0)
                - lo.b().value(n) * (lo.f().value(n - 1) - 1.0);
            let res6 = lo.b().value(n) * hi.c().value(n) - hi.b().value(n) * lo.c().value(n - 1);
            r5 = r5.max(res5.abs());
            r6 = r6.max(res6.abs());
            if n <= g.right() {
                let fm1 = lo.f().value(n) - 1.0;
                let fm1_prev = lo.f().value(n - 1) - 1.0;
                let res7 = hi.b().value(n)
                    * (lo.b().value(n) - hi.b().value(n + 1) - dalpha + fm1 * fm1 * lo.c().value(n))
                    - lo.b().value(n) * fm1_prev * fm1_prev * lo.c().value(n - 1);
                r7 = r7.max(res7.abs());
            }
        }
        rows.push(ConditionResiduals {
            level: k,
            condition5: r5,
            condition6: r6,
            condition7: r7,
        });
    }
    rows
}

/// Result of the randomized adjointness probe for one lowering/raising pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdjointnessReport {
    pub level: usize,
    pub trials: usize,
    /// `max |<A* x | y>_k - <x | A y>_{k-1}| / (|x| |y|)` over the trials.
    pub max_relative_residual: f64,
    pub boundary: BoundaryReport,
}

fn mix_seed(base: u64, level: usize, trial: usize) -> u64 {
    // splitmix64 over a tuple so parallel and sequential runs agree
    let mut z = base
        .wrapping_add((level as u64).wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add((trial as u64 + 1).wrapping_mul(0xBF58476D1CE4E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub(crate) fn random_sequence(level: usize, grid: crate::grid::Grid, seed: u64) -> LevelSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..grid.extended_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    LevelSequence::from_values(level, grid, values).expect("finite random values")
}

fn adjointness_trial(chain: &ChainSpec, k: usize, seed: u64) -> Result<f64> {
    let g = chain.grid();
    let x = random_sequence(k - 1, g, seed);
    let y = random_sequence(k, g, seed.wrapping_add(0x5851F42D4C957F2D));
    let raised = apply_creation(chain, k, &x)?;
    let lowered = apply_annihilation(chain, k, &y)?;
    let lhs = inner_product(&raised, &y, chain.weight(k))?;
    let rhs = inner_product(&x, &lowered, chain.weight(k - 1))?;
    let nx = weighted_norm(&x, chain.weight(k - 1))?;
    let ny = weighted_norm(&y, chain.weight(k))?;
    Ok((lhs - rhs).abs() / (nx * ny).max(f64::MIN_POSITIVE))
}

fn verify_adjointness_with<M>(chain: &ChainSpec, k: usize, trials: usize, map: M) -> Result<AdjointnessReport>
where
    M: Fn(usize) -> Vec<Result<f64>>,
{
    let mut max_rel: f64 = 0.0;
    for r in map(trials) {
        max_rel = max_rel.max(r?);
    }
    let boundary = chain
        .weight(k)
        .boundary(chain.level_data(k).b(), chain.tolerances().boundary);
    Ok(AdjointnessReport {
        level: k,
        trials,
        max_relative_residual: max_rel,
        boundary,
    })
}

/// Probes `<A_k* x | y>_k = <x | A_k y>_{k-1}` on random pairs drawn from
/// the full extended window, and reports the level-`k` boundary residuals
/// that bound the expected defect.
pub fn verify_adjointness(chain: &ChainSpec, k: usize, trials: usize, rng_seed: u64) -> Result<AdjointnessReport> {
    verify_adjointness_with(chain, k, trials, |n| {
        exec::map_indices(n, |t| adjointness_trial(chain, k, mix_seed(rng_seed, k, t)))
    })
}

/// Sequential variant of [`verify_adjointness`].
pub fn verify_adjointness_seq(chain: &ChainSpec, k: usize, trials: usize, rng_seed: u64) -> Result<AdjointnessReport> {
    verify_adjointness_with(chain, k, trials, |n| {
        exec::map_indices_seq(n, |t| adjointness_trial(chain, k, mix_seed(rng_seed, k, t)))
    })
}

/// Max over random `x` of `|H_k x - (A_k*(A_k x) + alpha_k x)|_inf / |x|_inf`:
/// the expanded stencil against the literally composed factor operators.
pub fn factorization_residual(chain: &ChainSpec, k: usize, trials: usize, rng_seed: u64) -> Result<f64> {
    let h = compose_hamiltonian(chain, k, OperatorSide::Lower)?;
    let g = chain.grid();
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let x = random_sequence(k, g, mix_seed(rng_seed ^ 0xFAC7, k, t));
        let expanded = h.apply(&x)?;
        let composed = apply_factored_lower(chain, k, &x)?;
        let scale = x.max_abs_interior().max(f64::MIN_POSITIVE);
        for n in g.interior() {
            worst = worst.max((expanded.value(n) - composed.value(n)).abs() / scale);
        }
    }
    Ok(worst)
}

/// Max over random `x` of the disagreement between the two factorized forms
/// of the same operator, relative to `|x|_inf`. Needs `k < K`.
pub fn dual_residual(chain: &ChainSpec, k: usize, trials: usize, rng_seed: u64) -> Result<f64> {
    let lower = compose_hamiltonian(chain, k, OperatorSide::Lower)?;
    let upper = compose_hamiltonian(chain, k, OperatorSide::Upper)?;
    let g = chain.grid();
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let x = random_sequence(k, g, mix_seed(rng_seed ^ 0xD0A1, k, t));
        let lo = lower.apply(&x)?;
        let up = upper.apply(&x)?;
        let scale = x.max_abs_interior().max(f64::MIN_POSITIVE);
        for n in g.interior() {
            worst = worst.max((lo.value(n) - up.value(n)).abs() / scale);
        }
    }
    Ok(worst)
}

/// One row of the verification report. Couplings are absent at the top
/// level, adjointness at level 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelVerification {
    pub level: usize,
    pub condition5: Option<f64>,
    pub condition6: Option<f64>,
    pub condition7: Option<f64>,
    pub adjointness: Option<f64>,
    pub boundary_left: f64,
    pub boundary_right: f64,
}

/// Aggregate verification outcome for a chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainVerification {
    pub levels: Vec<LevelVerification>,
    /// Worst factorization residual over all levels.
    pub factorization: f64,
    /// Worst lower-vs-upper residual over all level pairs.
    pub dual: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Runs every chain-wide check against the chain's tolerances.
pub fn verify_chain(chain: &ChainSpec, trials: usize, rng_seed: u64) -> Result<ChainVerification> {
    let tol = chain.tolerances();
    let conditions = check_chain_conditions(chain);
    let mut failures = Vec::new();
    let mut levels = Vec::with_capacity(chain.top_level() + 1);
    for k in 0..=chain.top_level() {
        let row = conditions.iter().find(|r| r.level == k);
        let adjointness = if k >= 1 {
            Some(verify_adjointness(chain, k, trials, rng_seed)?.max_relative_residual)
        } else {
            None
        };
        let boundary = chain
            .weight(k)
            .boundary(chain.level_data(k).b(), tol.boundary);
        if let Some(r) = row {
            for (name, value) in [
                ("condition5", r.condition5),
                ("condition6", r.condition6),
                ("condition7", r.condition7),
            ] {
                if value > tol.condition {
                    failures.push(format!(
                        "{name} at level {k}: {value:.3e} exceeds {:.3e}",
                        tol.condition
                    ));
                }
            }
        }
        if let Some(adj) = adjointness {
            if adj > tol.adjoint {
                failures.push(format!(
                    "adjointness at level {k}: {adj:.3e} exceeds {:.3e}",
                    tol.adjoint
                ));
            }
        }
        if !boundary.pass {
            failures.push(format!(
                "boundary at level {k}: left {:.3e}, right {:.3e} exceed {:.3e}",
                boundary.left, boundary.right, tol.boundary
            ));
        }
        levels.push(LevelVerification {
            level: k,
            condition5: row.map(|r| r.condition5),
            condition6: row.map(|r| r.condition6),
            condition7: row.map(|r| r.condition7),
            adjointness,
            boundary_left: boundary.left,
            boundary_right: boundary.right,
        });
    }
    let mut factorization: f64 = 0.0;
    for k in 0..=chain.top_level() {
        factorization = factorization.max(factorization_residual(chain, k, trials, rng_seed)?);
    }
    if factorization > tol.factorization {
        failures.push(format!(
            "factorization: {factorization:.3e} exceeds {:.3e}",
            tol.factorization
        ));
    }
    let mut dual: f64 = 0.0;
    for k in 0..chain.top_level() {
        dual = dual.max(dual_residual(chain, k, trials, rng_seed)?);
    }
    if dual > tol.dual {
        failures.push(format!("dual factorization: {dual:.3e} exceeds {:.3e}", tol.dual));
    }
    Ok(ChainVerification {
        levels,
        factorization,
        dual,
        pass: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainTolerances, FaultTarget};
    use crate::families::{build_hypergeometric, classical_preset, ClassicalFamily};
    use crate::grid::Grid;

    fn charlier(mu: f64, b: i64, levels: usize) -> ChainSpec {
        let grid = Grid::new(0, b).unwrap();
        let params = classical_preset(ClassicalFamily::Charlier { mu }, grid, levels).unwrap();
        build_hypergeometric(&params, ChainTolerances::default()).unwrap()
    }

    #[test]
    fn built_chain_has_vanishing_condition_residuals() {
        let chain = charlier(1.0, 20, 4);
        for row in check_chain_conditions(&chain) {
            assert!(row.condition5 <= 1e-13);
            assert!(row.condition6 <= 1e-13);
            assert!(row.condition7 <= 1e-13);
        }
    }

    #[test]
    fn perturbed_coefficient_is_detected_by_the_conditions() {
        let mut chain = charlier(1.0, 20, 3);
        chain.inject_fault(FaultTarget::C, 1, 5, 1e-3).unwrap();
        let rows = check_chain_conditions(&chain);
        let hit = rows
            .iter()
            .map(|r| r.condition6.max(r.condition7))
            .fold(0.0f64, f64::max);
        assert!(hit >= 5e-4, "perturbation visible at {hit:.3e}");
    }

    #[test]
    fn adjointness_residual_small_on_decaying_weight() {
        let chain = charlier(1.0, 40, 3);
        let report = verify_adjointness(&chain, 2, 25, 42).unwrap();
        assert!(report.max_relative_residual <= 1e-12);
        assert!(report.boundary.pass);
    }

    #[test]
    fn parallel_and_sequential_adjointness_agree_bitwise() {
        let chain = charlier(2.0, 25, 3);
        let a = verify_adjointness(&chain, 1, 16, 7).unwrap();
        let b = verify_adjointness_seq(&chain, 1, 16, 7).unwrap();
        assert_eq!(a.max_relative_residual, b.max_relative_residual);
    }

    #[test]
    fn factorization_and_dual_residuals_are_at_rounding_level() {
        let chain = charlier(1.0, 30, 4);
        for k in 0..=3 {
            assert!(factorization_residual(&chain, k, 10, 3).unwrap() <= 1e-13);
        }
        for k in 0..3 {
            assert!(dual_residual(&chain, k, 10, 3).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn verify_chain_passes_and_reports_rows() {
        let chain = charlier(1.0, 40, 3);
        let v = verify_chain(&chain, 10, 42).unwrap();
        assert!(v.pass, "failures: {:?}", v.failures);
        assert_eq!(v.levels.len(), 4);
        assert!(v.levels[0].adjointness.is_none());
        assert!(v.levels[3].condition5.is_none());
        assert!(v.levels[1].adjointness.is_some());
    }

    #[test]
    fn verify_chain_names_the_failing_residual() {
        let mut chain = charlier(1.0, 30, 3);
        chain.inject_fault(FaultTarget::C, 0, 2, 1e-3).unwrap();
        let v = verify_chain(&chain, 10, 42).unwrap();
        assert!(!v.pass);
        assert!(v.failures.iter().any(|f| f.contains("condition6")), "{:?}", v.failures);
    }
}
