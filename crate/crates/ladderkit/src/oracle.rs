//! Independent spectral path: the second-order operator realized as a
//! symmetric tridiagonal matrix in the weighted space, and a bisection
//! eigensolver on Sturm sequence counts. No external linear algebra.
//!
//! The similarity transform by `diag(sqrt(rho))` sends the stencil to a
//! symmetric matrix: the superdiagonal becomes
//! `z(n) sqrt(rho(n)/rho(n+1))`, equal under the weight recursion to
//! `w(n+1) sqrt(rho(n+1)/rho(n))`; the disagreement of the two routes is
//! the reported asymmetry.

use serde::Serialize;

use crate::chain::{EigenPair, SecondOrderOperator};
use crate::error::{Error, Result};
use crate::exec;
use crate::weight::WeightLevel;

/// Symmetric tridiagonal matrix stored as its two bands.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Realized matrix plus the worst relative asymmetry between the two
/// equivalent off-diagonal routes.
#[derive(Clone, Debug)]
pub struct RealizedMatrix {
    pub matrix: TridiagonalMatrix,
    pub asymmetry: f64,
}

const MAX_BISECTIONS: usize = 160;

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len().max(1).saturating_sub(1),
                got: off.len(),
            });
        }
        for (i, v) in diag.iter().chain(off.iter()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i as i64 });
            }
        }
        Ok(TridiagonalMatrix { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x`, from the inertia of the
    /// shifted LDL factorization.
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0usize;
        let mut d = 1.0f64;
        for i in 0..self.dim() {
            let off2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            d = self.diag[i] - x - off2 / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bisect_one(&self, j: usize, lo0: f64, hi0: f64, pivmin: f64) -> Result<f64> {
        let mut lo = lo0;
        let mut hi = hi0;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid.clamp(lo, hi));
            }
            if self.count_below(mid, pivmin) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
            if hi - lo <= tol {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::NoConvergence { index: j })
    }

    fn eigenvalues_with<M>(&self, map: M) -> Result<Vec<f64>>
    where
        M: Fn(usize, f64, f64, f64) -> Vec<Result<f64>>,
    {
        let radius = self.norm_bound();
        let pad = 2.0 * f64::EPSILON * radius.max(1.0);
        let lo = -radius - pad;
        let hi = radius + pad;
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * radius.max(1.0));
        let results = map(self.dim(), lo, hi, pivmin);
        let mut eigs = Vec::with_capacity(self.dim());
        for r in results {
            eigs.push(r?);
        }
        Ok(eigs)
    }

    /// All eigenvalues in ascending order, each bisected independently.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.eigenvalues_with(|n, lo, hi, pivmin| {
            exec::map_indices(n, |j| self.bisect_one(j, lo, hi, pivmin))
        })
    }

    /// Sequential variant of [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvalues_seq(&self) -> Result<Vec<f64>> {
        self.eigenvalues_with(|n, lo, hi, pivmin| {
            exec::map_indices_seq(n, |j| self.bisect_one(j, lo, hi, pivmin))
        })
    }

    /// `M u` for a dense vector.
    pub fn multiply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * u[i];
            if i > 0 {
                acc += self.off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * u[i + 1];
            }
            out[i] = acc;
        }
        out
    }
}

/// Symmetrizes a second-order operator under its level weight.
///
/// `diag(i) = v(a+i)`; `off(i)` is taken from the `z` route after checking
/// it against the `w` route at `tol` relative.
pub fn realize_matrix(h: &SecondOrderOperator, w: &WeightLevel, tol: f64) -> Result<RealizedMatrix> {
    if h.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if h.level() != w.level() {
        return Err(Error::LevelMismatch {
            expected: h.level(),
            got: w.level(),
        });
    }
    let g = h.grid();
    let n = g.interior_len();
    let diag = h.diagonal().to_vec();
    let mut off = Vec::with_capacity(n - 1);
    let mut asymmetry: f64 = 0.0;
    for i in 0..(n - 1) {
        let n_idx = g.left() + i as i64;
        let rho_here = w.rho(n_idx);
        let rho_next = w.rho(n_idx + 1);
        let from_z = h.forward()[i] * (rho_here / rho_next).sqrt();
        let from_w = h.backward()[i + 1] * (rho_next / rho_here).sqrt();
        let scale = from_z.abs().max(from_w.abs()).max(f64::MIN_POSITIVE);
        let rel = (from_z - from_w).abs() / scale;
        if rel > tol {
            return Err(Error::Asymmetry {
                index: i,
                residual: rel,
                tol,
            });
        }
        asymmetry = asymmetry.max(rel);
        off.push(from_z);
    }
    Ok(RealizedMatrix {
        matrix: TridiagonalMatrix::new(diag, off)?,
        asymmetry,
    })
}

/// One ladder eigenvalue matched against the oracle spectrum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumRow {
    /// Ground level the ladder vector was raised from.
    pub p: usize,
    pub alpha_p: f64,
    pub nearest_oracle: f64,
    pub abs_err: f64,
    /// `|M u - alpha_p u|_inf / |u|_inf` for the symmetrized ladder vector.
    pub vector_residual: f64,
}

/// Outcome of the ladder-vs-oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    pub tol: f64,
    pub pass: bool,
}

/// Matches each ladder eigenvalue to its nearest oracle eigenvalue and
/// computes the symmetrized eigenvector residuals.
pub fn compare_spectra(
    ladder: &[EigenPair],
    oracle: &[f64],
    matrix: &TridiagonalMatrix,
    w: &WeightLevel,
    tol: f64,
) -> SpectrumReport {
    let g = w.grid();
    let mut rows = Vec::with_capacity(ladder.len());
    for pair in ladder {
        let (mut nearest, mut err) = (f64::NAN, f64::INFINITY);
        for &ev in oracle {
            let d = (ev - pair.lambda).abs();
            if d < err {
                err = d;
                nearest = ev;
            }
        }
        let u: Vec<f64> = g
            .interior()
            .map(|n| w.rho(n).sqrt() * pair.vector.value(n))
            .collect();
        let mu = matrix.multiply(&u);
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let vector_residual = u
            .iter()
            .zip(mu.iter())
            .fold(0.0f64, |m, (ui, mui)| m.max((mui - pair.lambda * ui).abs()))
            / scale;
        let p = pair.level - pair.ladder_index;
        rows.push(SpectrumRow {
            p,
            alpha_p: pair.lambda,
            nearest_oracle: nearest,
            abs_err: err,
            vector_residual,
        });
    }
    let pass = rows.iter().all(|r| r.abs_err <= tol);
    SpectrumReport { rows, tol, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{compose_hamiltonian, ChainTolerances, OperatorSide};
    use crate::families::{build_hypergeometric, classical_preset, ClassicalFamily};
    use crate::grid::Grid;

    #[test]
    fn one_by_one_matrix() {
        let m = TridiagonalMatrix::new(vec![5.0], vec![]).unwrap();
        let e = m.eigenvalues().unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] - 5.0).abs() <= 1e-13);
    }

    #[test]
    fn two_by_two_coupled_pair() {
        let m = TridiagonalMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let e = m.eigenvalues().unwrap();
        assert!((e[0] + 1.0).abs() <= 1e-14);
        assert!((e[1] - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn three_by_three_toeplitz() {
        let m = TridiagonalMatrix::new(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]).unwrap();
        let e = m.eigenvalues().unwrap();
        let s = 2.0f64.sqrt();
        assert!((e[0] - (2.0 - s)).abs() <= 1e-13);
        assert!((e[1] - 2.0).abs() <= 1e-13);
        assert!((e[2] - (2.0 + s)).abs() <= 1e-13);
    }

    #[test]
    fn diagonal_matrix_eigenvalues_sort() {
        let m = TridiagonalMatrix::new(vec![3.0, -1.0, 2.0, -1.0], vec![0.0, 0.0, 0.0]).unwrap();
        let expect = [-1.0, -1.0, 2.0, 3.0];
        for (e, x) in m.eigenvalues().unwrap().iter().zip(expect.iter()) {
            assert!((e - x).abs() <= 1e-13);
        }
    }

    #[test]
    fn parallel_and_sequential_spectra_are_identical() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = TridiagonalMatrix::new(diag, off).unwrap();
        assert_eq!(m.eigenvalues().unwrap(), m.eigenvalues_seq().unwrap());
    }

    #[test]
    fn trace_and_frobenius_identities_hold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m = TridiagonalMatrix::new(diag.clone(), off.clone()).unwrap();
        let e = m.eigenvalues().unwrap();
        let trace: f64 = diag.iter().sum();
        let fro2: f64 = diag.iter().map(|d| d * d).sum::<f64>()
            + 2.0 * off.iter().map(|o| o * o).sum::<f64>();
        let sum: f64 = e.iter().sum();
        let sum2: f64 = e.iter().map(|v| v * v).sum();
        assert!((sum - trace).abs() <= 1e-10 * trace.abs().max(1.0));
        assert!((sum2 - fro2).abs() <= 1e-10 * fro2.max(1.0));
    }

    fn charlier_matrix(mu: f64, b: i64, levels: usize, k: usize) -> (RealizedMatrix, crate::chain::ChainSpec) {
        let grid = Grid::new(0, b).unwrap();
        let params = classical_preset(ClassicalFamily::Charlier { mu }, grid, levels).unwrap();
        let chain = build_hypergeometric(&params, ChainTolerances::default()).unwrap();
        let h = compose_hamiltonian(&chain, k, OperatorSide::Lower).unwrap();
        let m = realize_matrix(&h, chain.weight(k), 1e-10).unwrap();
        (m, chain)
    }

    #[test]
    fn symmetrized_bands_match_the_closed_form() {
        let mu = 1.0;
        let k = 2;
        let (r, _) = charlier_matrix(mu, 12, 3, k);
        assert!(r.asymmetry <= 1e-12);
        for (i, d) in r.matrix.diag().iter().enumerate() {
            assert_eq!(*d, i as f64 + mu - k as f64);
        }
        for (i, o) in r.matrix.off().iter().enumerate() {
            // off(i) = -sqrt(mu (i+1))
            assert!((o + (mu * (i as f64 + 1.0)).sqrt()).abs() <= 1e-13);
        }
    }

    #[test]
    fn ladder_values_sit_inside_the_oracle_spectrum() {
        let (r, chain) = charlier_matrix(1.0, 40, 4, 3);
        let eigs = r.matrix.eigenvalues().unwrap();
        let ladder = crate::chain::solve_chain_eigens(&chain, 3).unwrap();
        let report = compare_spectra(&ladder.pairs, &eigs, &r.matrix, chain.weight(3), 1e-6);
        assert!(report.pass);
        for row in &report.rows {
            assert!(row.abs_err <= 1e-8, "p = {}, err = {}", row.p, row.abs_err);
            assert!(row.vector_residual <= 1e-9);
        }
    }

    #[test]
    fn diagonal_operator_realizes_with_zero_off_band() {
        // f = 1 wipes both shift coefficients
        use crate::chain::{ChainSpec, Family, LevelData};
        use crate::grid::LevelSequence;
        let grid = Grid::new(0, 5).unwrap();
        let b = LevelSequence::from_fn(0, grid, |n| n as f64 + 1.0).unwrap();
        let c = LevelSequence::constant(0, grid, 2.0);
        let f = LevelSequence::constant(0, grid, 1.0);
        let chain = ChainSpec::assemble(
            grid,
            vec![LevelData::new(b, c, f).unwrap()],
            vec![0.0],
            Family::Explicit,
            ChainTolerances::default(),
        )
        .unwrap();
        let h = compose_hamiltonian(&chain, 0, OperatorSide::Lower).unwrap();
        let r = realize_matrix(&h, chain.weight(0), 1e-10).unwrap();
        assert!(r.matrix.off().iter().all(|&o| o == 0.0));
        assert_eq!(r.asymmetry, 0.0);
    }

    #[test]
    fn empty_ladder_gives_empty_report() {
        let (r, chain) = charlier_matrix(1.0, 10, 2, 1);
        let eigs = r.matrix.eigenvalues().unwrap();
        let report = compare_spectra(&[], &eigs, &r.matrix, chain.weight(1), 1e-6);
        assert!(report.rows.is_empty());
        assert!(report.pass);
    }

    #[test]
    fn zero_tolerance_documents_float_mismatch() {
        let (r, chain) = charlier_matrix(1.0, 20, 2, 2);
        let eigs = r.matrix.eigenvalues().unwrap();
        let ladder = crate::chain::solve_chain_eigens(&chain, 2).unwrap();
        let report = compare_spectra(&ladder.pairs, &eigs, &r.matrix, chain.weight(2), 0.0);
        assert!(!report.pass);
    }

    #[test]
    fn asymmetric_weight_pairing_is_refused() {
        // mismatched weight level makes the balance fail
        let grid = Grid::new(0, 10).unwrap();
        let params = classical_preset(ClassicalFamily::Charlier { mu: 1.0 }, grid, 2).unwrap();
        let chain = build_hypergeometric(&params, ChainTolerances::default()).unwrap();
        let h = compose_hamiltonian(&chain, 2, OperatorSide::Lower).unwrap();
        assert!(matches!(
            realize_matrix(&h, chain.weight(1), 1e-10),
            Err(Error::LevelMismatch { .. })
        ));
    }
}
