//! The geometrically scaled family: `b_{k+1}(n) = gamma_k b_k(n)` with
//! every `gamma_k` outside `{0, 1}`.
//!
//! Level data follows the constant-ratio transport
//! `f_k - 1 = (gamma_0 ... gamma_{k-1})^{-1} (f_0(n-k) - 1)` and
//! `c_k = (gamma_0 ... gamma_{k-1}) c_0(n-k)`. The diagonal balance turns
//! into a two-term recursion whose closed form recovers `b_k`; agreement
//! between the supplied data and that recovery is checked, not assumed.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ChainTolerances, Family, LevelData};
use crate::error::{Error, Result};
use crate::grid::{Grid, LevelSequence};
use crate::sequence::SequenceSpec;

use super::FamilyDiagnostics;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricParams {
    /// Scale constants `gamma_0..gamma_{K-1}`, each outside `{0, 1}`.
    pub gamma: Vec<f64>,
    /// Full list `alpha_0..alpha_K`.
    pub alpha: Vec<f64>,
    pub f0: SequenceSpec,
    pub c0: SequenceSpec,
    pub b0: SequenceSpec,
    /// Anchors `R_k(0)` for `k = 0..K-1`; derived from the other data when
    /// absent, cross-checked when present.
    #[serde(default)]
    pub r0: Option<Vec<f64>>,
    pub grid: Grid,
}

/// Geometric sum `sum_{j=0}^{n-1} x^j`, extended to negative `n` through
/// `(1 - x^n)/(1 - x)`. Evaluated by explicit summation below 64 terms so
/// `x` near one stays exact; the ratio form is only used for long sums.
fn gsum(x: f64, n: i64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n < 0 {
        return -x.powi(n as i32) * gsum(x, -n);
    }
    if n <= 64 {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for _ in 0..n {
            acc += pw;
            pw *= x;
        }
        acc
    } else {
        (1.0 - x.powi(n as i32)) / (1.0 - x)
    }
}

/// Orbit of the affine recursion `r(n) = x r(n-1) + d` from `r(0) = seed`.
///
/// For `|x| <= 1` the direct form `x^n seed + d gsum(x, n)` keeps every
/// piece bounded. For `|x| > 1` that grouping cancels catastrophically
/// whenever the orbit is far smaller than its pieces, so the fixed-point
/// grouping `x^n (seed - d/(1-x)) + d/(1-x)` is used, with the deviation
/// computed as a single quotient to keep exact flat orbits exact.
fn affine_orbit(x: f64, seed: f64, d: f64, n: i64) -> f64 {
    if x.abs() <= 1.0 {
        x.powi(n as i32) * seed + d * gsum(x, n)
    } else {
        let one_minus = 1.0 - x;
        let deviation = (seed * one_minus - d) / one_minus;
        x.powi(n as i32) * deviation + d / one_minus
    }
}

struct Scaled<'a> {
    p: &'a GeometricParams,
    /// `prod[k] = gamma_0 ... gamma_{k-1}`.
    prod: Vec<f64>,
}

impl<'a> Scaled<'a> {
    fn new(p: &'a GeometricParams) -> Result<Self> {
        for (i, g) in p.gamma.iter().enumerate() {
            if !g.is_finite() || *g == 0.0 || *g == 1.0 {
                return Err(Error::InvalidGamma { index: i, value: *g });
            }
        }
        if p.alpha.len() != p.gamma.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: p.gamma.len() + 1,
                got: p.alpha.len(),
            });
        }
        let mut prod = vec![1.0];
        for g in &p.gamma {
            prod.push(prod.last().unwrap() * g);
        }
        Ok(Scaled { p, prod })
    }

    fn top(&self) -> usize {
        self.p.gamma.len()
    }

    fn f(&self, k: usize, n: i64) -> Result<f64> {
        Ok((self.p.f0.eval(n - k as i64)? - 1.0) / self.prod[k] + 1.0)
    }

    fn c(&self, k: usize, n: i64) -> Result<f64> {
        Ok(self.prod[k] * self.p.c0.eval(n - k as i64)?)
    }

    fn b(&self, k: usize, n: i64) -> Result<f64> {
        Ok(self.prod[k] * self.p.b0.eval(n)?)
    }

    /// Diagonal term `(f_k(n)-1)^2 c_k(n)`, which collapses to
    /// `prod_k^{-1} (f_0(n-k)-1)^2 c_0(n-k)`.
    fn diagonal(&self, k: usize, n: i64) -> Result<f64> {
        let fm1 = self.p.f0.eval(n - k as i64)? - 1.0;
        Ok(fm1 * fm1 * self.p.c0.eval(n - k as i64)? / self.prod[k])
    }

    /// Anchor `R_k(0) = (f_k(0)-1)^2 c_k(0) - gamma_k b_k(1)`.
    fn derive_r0(&self, k: usize) -> Result<f64> {
        Ok(self.diagonal(k, 0)? - self.p.gamma[k] * self.b(k, 1)?)
    }

    fn r_closed(&self, k: usize, n: i64, r0: f64) -> f64 {
        let ginv = 1.0 / self.p.gamma[k];
        let dalpha = self.p.alpha[k + 1] - self.p.alpha[k];
        affine_orbit(ginv, r0, dalpha, n)
    }

    /// `S_k(0)` from the definition `prod_k^{-1} (f_0(-k)-1)^2 c_0(-k)`.
    fn s_anchor(&self, k: usize) -> Result<f64> {
        self.diagonal(k, 0)
    }

    /// Closed form of the consistency recursion
    /// `S(n) = x1 x2 S(n-1) + T(n)` with
    /// `T(m) = -x1^{m+1} R_{k+1}(0) + x2^m R_k(0) - x1 gsum(x1, m) d_{k+1}
    ///  + gsum(x2, m) d_k`, `x1 = 1/gamma_{k+1}`, `x2 = 1/gamma_k`.
    ///
    /// Away from unit scales `T` is split into its constant and two pure
    /// power parts, turning the iterated sum into one affine orbit plus two
    /// bounded cross sums; near unit scales the direct double sum is benign
    /// and avoids the `1/(1-x)` factors.
    fn s_closed(&self, k: usize, n: i64, s0: f64, r0_k: f64, r0_k1: f64) -> f64 {
        let x2 = 1.0 / self.p.gamma[k];
        let x1 = 1.0 / self.p.gamma[k + 1];
        let q = x1 * x2;
        let d_k = self.p.alpha[k + 1] - self.p.alpha[k];
        let d_k1 = self.p.alpha[k + 2] - self.p.alpha[k + 1];
        if (1.0 - x1).abs() < 1e-4 || (1.0 - x2).abs() < 1e-4 {
            let mut value = q.powi(n as i32) * s0
                - x1.powi(n as i32 + 1) * gsum(x2, n) * r0_k1
                + x2.powi(n as i32) * gsum(x1, n) * r0_k;
            let mut qi = 1.0;
            for i in 0..n {
                value += qi * (-x1 * d_k1 * gsum(x1, n - i) + d_k * gsum(x2, n - i));
                qi *= q;
            }
            value
        } else {
            let t0 = -x1 * d_k1 / (1.0 - x1) + d_k / (1.0 - x2);
            let t1 = x1 * (d_k1 / (1.0 - x1) - r0_k1);
            let t2 = r0_k - d_k / (1.0 - x2);
            affine_orbit(q, s0, t0, n)
                + t1 * x1.powi(n as i32) * gsum(x2, n)
                + t2 * x2.powi(n as i32) * gsum(x1, n)
        }
    }
}

/// Evaluates the closed forms `(R_k(n), S_k(n))` at `n >= 0`. The anchors
/// come from the supplied `r0` list when present, otherwise from the data.
pub fn geometric_closed_forms(p: &GeometricParams, k: usize, n: i64) -> Result<(f64, f64)> {
    let scaled = Scaled::new(p)?;
    if k + 2 > scaled.top() {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: scaled.top().saturating_sub(2),
        });
    }
    if n < 0 {
        return Err(Error::ParameterRange {
            name: "n".to_string(),
            value: n as f64,
            hint: "closed forms are anchored at n = 0".to_string(),
        });
    }
    let r0_at = |j: usize| -> Result<f64> {
        match &p.r0 {
            Some(list) => list.get(j).copied().ok_or(Error::LengthMismatch {
                expected: scaled.top(),
                got: list.len(),
            }),
            None => scaled.derive_r0(j),
        }
    };
    let r0_k = r0_at(k)?;
    let r0_k1 = r0_at(k + 1)?;
    let r = scaled.r_closed(k, n, r0_k);
    let s = scaled.s_closed(k, n, scaled.s_anchor(k)?, r0_k, r0_k1);
    Ok((r, s))
}

/// Builds the scaled chain. The supplied `b_0` is cross-checked against the
/// recovery `b_k(m) = ((f_k(m-1)-1)^2 c_k(m-1) - R_k(m-1)) / gamma_k`, and
/// the definition of `S_k` must satisfy its own recursion; both checks run
/// at the chain's consistency tolerance.
pub fn build_geometric(p: &GeometricParams, tol: ChainTolerances) -> Result<(ChainSpec, FamilyDiagnostics)> {
    let scaled = Scaled::new(p)?;
    let top = scaled.top();
    let grid = p.grid;
    // anchors: derived, then reconciled with any supplied list
    let mut r0 = Vec::with_capacity(top);
    for k in 0..top {
        r0.push(scaled.derive_r0(k)?);
    }
    if let Some(supplied) = &p.r0 {
        if supplied.len() != top {
            return Err(Error::LengthMismatch {
                expected: top,
                got: supplied.len(),
            });
        }
        for k in 0..top {
            let residual = (supplied[k] - r0[k]).abs();
            if residual > tol.consistency * r0[k].abs().max(1.0) {
                return Err(Error::ConsistencyFailure {
                    level: k,
                    index: 0,
                    residual,
                    tol: tol.consistency * r0[k].abs().max(1.0),
                });
            }
        }
        r0 = supplied.clone();
    }
    // the closed-form recovery of b must reproduce the scaled ansatz
    for (k, &r0_k) in r0.iter().enumerate() {
        for m in grid.extended() {
            let recovered = (scaled.diagonal(k, m - 1)? - scaled.r_closed(k, m - 1, r0_k)) / p.gamma[k];
            let ansatz = scaled.b(k, m)?;
            let residual = (recovered - ansatz).abs();
            if residual > tol.consistency * ansatz.abs().max(1.0) {
                return Err(Error::ConsistencyFailure {
                    level: k,
                    index: m,
                    residual,
                    tol: tol.consistency * ansatz.abs().max(1.0),
                });
            }
        }
    }
    // the definition of S_k must track its closed form
    let mut s_tables = Vec::new();
    for k in 0..top.saturating_sub(1) {
        let s0 = scaled.s_anchor(k)?;
        let mut table = Vec::with_capacity(grid.extended_len());
        for n in grid.extended() {
            let closed = scaled.s_closed(k, n.max(0), s0, r0[k], r0[k + 1]);
            if n >= 0 {
                let defined = scaled.diagonal(k, n)?;
                let residual = (defined - closed).abs();
                if residual > tol.consistency * defined.abs().max(1.0) {
                    return Err(Error::ConsistencyFailure {
                        level: k,
                        index: n,
                        residual,
                        tol: tol.consistency * defined.abs().max(1.0),
                    });
                }
            }
            table.push(if n >= 0 { closed } else { scaled.diagonal(k, n)? });
        }
        s_tables.push(table);
    }
    let mut r_tables = Vec::with_capacity(top);
    for (k, &r0_k) in r0.iter().enumerate() {
        r_tables.push(grid.extended().map(|n| scaled.r_closed(k, n, r0_k)).collect());
    }
    let mut levels = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut b_vals = Vec::with_capacity(grid.extended_len());
        let mut c_vals = Vec::with_capacity(grid.extended_len());
        let mut f_vals = Vec::with_capacity(grid.extended_len());
        for n in grid.extended() {
            b_vals.push(scaled.b(k, n)?);
            c_vals.push(scaled.c(k, n)?);
            f_vals.push(scaled.f(k, n)?);
        }
        levels.push(LevelData::new(
            LevelSequence::from_values(k, grid, b_vals)?,
            LevelSequence::from_values(k, grid, c_vals)?,
            LevelSequence::from_values(k, grid, f_vals)?,
        )?);
    }
    let family = Family::Geometric {
        gamma: p.gamma.clone(),
        r0: r0.clone(),
    };
    let chain = ChainSpec::assemble(grid, levels, p.alpha.clone(), family, tol)?;
    let diagnostics = FamilyDiagnostics {
        g_anchors: Vec::new(),
        quad_profile: Vec::new(),
        r_tables,
        s_tables,
    };
    Ok((chain, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Constant instance: `b_0 = B`, `c_0 = C`, `f_0 = 0`, all `gamma`
    /// equal. Consistency forces `alpha_{k+1} - alpha_k = R_k(0)(1 - 1/gamma)`
    /// with `R_k(0) = C / prod_k - gamma prod_k B`.
    pub(super) fn constant_instance(gammas: &[f64], b: f64, c: f64, grid: Grid) -> GeometricParams {
        let mut prod = 1.0;
        let mut alpha = vec![0.0];
        for &g in gammas {
            let r0 = c / prod - g * prod * b;
            alpha.push(alpha.last().unwrap() + r0 * (1.0 - 1.0 / g));
            prod *= g;
        }
        GeometricParams {
            gamma: gammas.to_vec(),
            alpha,
            f0: SequenceSpec::Constant(0.0),
            c0: SequenceSpec::Constant(c),
            b0: SequenceSpec::Constant(b),
            r0: None,
            grid,
        }
    }

    #[test]
    fn gsum_handles_short_long_and_negative_ranges() {
        assert_eq!(gsum(0.5, 0), 0.0);
        assert_eq!(gsum(0.5, 3), 1.75);
        assert_eq!(gsum(2.0, -1), -0.5);
        // long branch against the explicit loop
        let x: f64 = 1.01;
        let mut acc = 0.0;
        let mut pw = 1.0;
        for _ in 0..100 {
            acc += pw;
            pw *= x;
        }
        assert!((gsum(x, 100) - acc).abs() <= 1e-10 * acc);
    }

    #[test]
    fn hand_evaluated_closed_form() {
        // gamma = 2, R(0) = 1, successive shift difference 1, n = 3
        let p = GeometricParams {
            gamma: vec![2.0, 2.0],
            alpha: vec![0.0, 1.0, 2.0],
            f0: SequenceSpec::Constant(0.0),
            c0: SequenceSpec::Constant(1.0),
            b0: SequenceSpec::Constant(1.0),
            r0: Some(vec![1.0, 1.0]),
            grid: Grid::new(0, 6).unwrap(),
        };
        let scaled = Scaled::new(&p).unwrap();
        let r3 = scaled.r_closed(0, 3, 1.0);
        assert!((r3 - 1.875).abs() <= 1e-15);
    }

    #[test]
    fn zero_steps_return_the_anchors() {
        let grid = Grid::new(0, 8).unwrap();
        let p = constant_instance(&[2.0, 0.5, 2.0], 2.0, 3.0, grid);
        let scaled = Scaled::new(&p).unwrap();
        let (r, s) = geometric_closed_forms(&p, 0, 0).unwrap();
        assert_eq!(r, scaled.derive_r0(0).unwrap());
        assert_eq!(s, scaled.s_anchor(0).unwrap());
    }

    #[test]
    fn closed_forms_match_direct_recursion_iterates() {
        let grid = Grid::new(0, 6).unwrap();
        for &g in &[0.5f64, 0.9, 1.1, 2.0] {
            let gammas = vec![g; 6];
            let p = constant_instance(&gammas, 2.0, 3.0, grid);
            let scaled = Scaled::new(&p).unwrap();
            for k in 0..=4usize {
                let r0 = scaled.derive_r0(k).unwrap();
                let r0k1 = scaled.derive_r0(k + 1).unwrap();
                let s0 = scaled.s_anchor(k).unwrap();
                let d_k = p.alpha[k + 1] - p.alpha[k];
                let d_k1 = p.alpha[k + 2] - p.alpha[k + 1];
                let (gk, gk1) = (1.0 / g, 1.0 / g);
                let mut r_iter = r0;
                let mut s_iter = s0;
                for n in 1..=30i64 {
                    r_iter = gk * r_iter + d_k;
                    s_iter = gk1 * gk * s_iter - gk1.powi(n as i32 + 1) * r0k1
                        + gk.powi(n as i32) * r0
                        - gk1 * gsum(gk1, n) * d_k1
                        + gsum(gk, n) * d_k;
                    let (r, s) = geometric_closed_forms(&p, k, n).unwrap();
                    let scale_r = r_iter.abs().max(1.0);
                    let scale_s = s_iter.abs().max(1.0);
                    assert!((r - r_iter).abs() <= 1e-10 * scale_r, "gamma {g} k {k} n {n}");
                    assert!((s - s_iter).abs() <= 1e-10 * scale_s, "gamma {g} k {k} n {n}");
                }
            }
        }
    }

    #[test]
    fn gamma_one_and_zero_are_rejected() {
        let grid = Grid::new(0, 5).unwrap();
        for bad in [1.0, 0.0] {
            let p = GeometricParams {
                gamma: vec![2.0, bad],
                alpha: vec![0.0; 3],
                f0: SequenceSpec::Constant(0.0),
                c0: SequenceSpec::Constant(1.0),
                b0: SequenceSpec::Constant(1.0),
                r0: None,
                grid,
            };
            assert!(matches!(
                build_geometric(&p, ChainTolerances::default()),
                Err(Error::InvalidGamma { index: 1, .. })
            ));
        }
    }

    #[test]
    fn constant_instance_builds_with_clean_conditions() {
        let grid = Grid::new(0, 10).unwrap();
        let p = constant_instance(&[2.0, 0.5, 2.0], 2.0, 3.0, grid);
        let (chain, diag) = build_geometric(&p, ChainTolerances::default()).unwrap();
        assert_eq!(chain.top_level(), 3);
        assert_eq!(diag.r_tables.len(), 3);
        assert_eq!(diag.s_tables.len(), 2);
        for row in crate::verify::check_chain_conditions(&chain) {
            assert!(row.condition5 <= 1e-12);
            assert!(row.condition6 <= 1e-12);
            assert!(row.condition7 <= 1e-12);
        }
    }

    #[test]
    fn exponential_instance_with_flat_shifts_builds() {
        // b_0 and c_0 proportional to gamma^{-n} keep R_k flat with
        // alpha constant across levels
        let g = 2.0f64;
        let grid = Grid::new(0, 8).unwrap();
        let pow = |n: i64| g.powi(-n as i32);
        let values_b: Vec<f64> = (-10..=10).map(|n| 2.0 * pow(n)).collect();
        let values_c: Vec<f64> = (-10..=10).map(|n| 3.0 * pow(n)).collect();
        let p = GeometricParams {
            gamma: vec![g, g],
            alpha: vec![0.5, 0.5, 0.5],
            f0: SequenceSpec::Constant(0.0),
            c0: SequenceSpec::Table { start: -10, values: values_c },
            b0: SequenceSpec::Table { start: -10, values: values_b },
            r0: None,
            grid,
        };
        let (chain, _) = build_geometric(&p, ChainTolerances::default()).unwrap();
        // b scales by gamma per level
        for n in grid.interior() {
            let b0 = chain.level_data(0).b().value(n);
            let b1 = chain.level_data(1).b().value(n);
            assert!((b1 - g * b0).abs() <= 1e-12 * b0.abs());
        }
    }

    #[test]
    fn inconsistent_supplied_anchors_are_rejected() {
        let grid = Grid::new(0, 6).unwrap();
        let mut p = constant_instance(&[2.0, 0.5], 2.0, 3.0, grid);
        let scaled = Scaled::new(&p).unwrap();
        let good = [scaled.derive_r0(0).unwrap(), scaled.derive_r0(1).unwrap()];
        p.r0 = Some(vec![good[0] + 1e-3, good[1]]);
        assert!(matches!(
            build_geometric(&p, ChainTolerances::default()),
            Err(Error::ConsistencyFailure { level: 0, .. })
        ));
    }

    #[test]
    fn inconsistent_profile_fails_the_s_check() {
        let grid = Grid::new(0, 6).unwrap();
        let mut p = constant_instance(&[2.0, 0.5, 2.0], 2.0, 3.0, grid);
        // break the c profile away from the consistent constant
        p.c0 = SequenceSpec::Poly(vec![3.0, 0.01]);
        assert!(build_geometric(&p, ChainTolerances::default()).is_err());
    }
}
