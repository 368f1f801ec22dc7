//! Weight sequences and the weighted scalar product.
//!
//! A weight at level `k` is built by telescoping the first-order recursion
//! `b(n+1) rho(n+1) = c(n) rho(n)` from a positive seed at `n = a`, and the
//! level below is obtained by the pointwise descent `rho_{k-1} = c_k rho_k`.
//! Truncation of infinite-support weights is certified by the boundary
//! residuals `|b rho|` at both ends, never assumed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, LevelSequence};

/// Positive weight sequence for level `k`, stored on `[a, b+1]`.
///
/// The ghost value at `b+1` exists only for the boundary check.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightLevel {
    level: usize,
    grid: Grid,
    rho: Vec<f64>,
}

/// Outcome of the truncation certificate at both grid ends.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryReport {
    pub level: usize,
    /// `|b_k(a) rho_k(a)|`
    pub left: f64,
    /// `|b_k(b+1) rho_k(b+1)|`
    pub right: f64,
    pub tol: f64,
    pub pass: bool,
}

impl WeightLevel {
    fn widx(&self, n: i64) -> usize {
        debug_assert!(n >= self.grid.left() && n <= self.grid.right() + 1);
        (n - self.grid.left()) as usize
    }

    /// Solves the weight recursion `rho(n+1) = c(n) rho(n) / b(n+1)` with
    /// `rho(a) = seed`.
    pub fn build(bk: &LevelSequence, ck: &LevelSequence, seed: f64) -> Result<Self> {
        if bk.grid() != ck.grid() {
            return Err(Error::GridMismatch);
        }
        if bk.level() != ck.level() {
            return Err(Error::LevelMismatch {
                expected: bk.level(),
                got: ck.level(),
            });
        }
        if seed <= 0.0 || seed.is_nan() {
            return Err(Error::NonPositiveWeight {
                index: bk.grid().left(),
                value: seed,
            });
        }
        let grid = bk.grid();
        let mut rho = Vec::with_capacity(grid.interior_len() + 1);
        rho.push(seed);
        for n in grid.left()..=grid.right() {
            let pivot = bk.value(n + 1);
            if pivot == 0.0 {
                return Err(Error::SingularPivot { index: n + 1 });
            }
            let next = ck.value(n) * rho.last().unwrap() / pivot;
            if !next.is_finite() {
                return Err(Error::NonFinite { index: n + 1 });
            }
            rho.push(next);
        }
        let w = WeightLevel {
            level: bk.level(),
            grid,
            rho,
        };
        w.check_positive()?;
        Ok(w)
    }

    /// Wraps explicit values on `[a, b+1]`; interior must be positive.
    pub fn from_values(level: usize, grid: Grid, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.interior_len() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.interior_len() + 1,
                got: rho.len(),
            });
        }
        for (i, v) in rho.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: grid.left() + i as i64,
                });
            }
        }
        let w = WeightLevel { level, grid, rho };
        w.check_positive()?;
        Ok(w)
    }

    fn check_positive(&self) -> Result<()> {
        for n in self.grid.interior() {
            let v = self.rho(n);
            if v <= 0.0 {
                return Err(Error::NonPositiveWeight { index: n, value: v });
            }
        }
        Ok(())
    }

    /// Level `k-1` weight via `rho_{k-1}(n) = c_k(n) rho_k(n)`.
    pub fn descend(&self, ck: &LevelSequence) -> Result<WeightLevel> {
        if ck.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if ck.level() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: ck.level(),
            });
        }
        if self.level == 0 {
            return Err(Error::LevelOutOfRange {
                level: 0,
                max: 0,
            });
        }
        let rho = ((self.grid.left())..=(self.grid.right() + 1))
            .map(|n| ck.value(n) * self.rho(n))
            .collect();
        let w = WeightLevel {
            level: self.level - 1,
            grid: self.grid,
            rho,
        };
        w.check_positive()?;
        Ok(w)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Weight value at `n in [a, b+1]`.
    pub fn rho(&self, n: i64) -> f64 {
        self.rho[self.widx(n)]
    }

    /// Sum of the interior weights, compensated.
    pub fn interior_sum(&self) -> f64 {
        neumaier_sum(self.grid.interior().map(|n| self.rho(n)))
    }

    /// Rescaled copy with interior sum one.
    pub fn normalized(&self) -> WeightLevel {
        let s = self.interior_sum();
        WeightLevel {
            level: self.level,
            grid: self.grid,
            rho: self.rho.iter().map(|v| v / s).collect(),
        }
    }

    /// Max absolute defect of the recursion `b(n+1) rho(n+1) - c(n) rho(n)`,
    /// together with the scale `max |b rho|` it should be compared against.
    pub fn pearson_residual(&self, bk: &LevelSequence, ck: &LevelSequence) -> (f64, f64) {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for n in self.grid.interior() {
            let lhs = bk.value(n + 1) * self.rho(n + 1);
            let rhs = ck.value(n) * self.rho(n);
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(lhs.abs());
        }
        (worst, scale)
    }

    /// Truncation certificate `|b rho|` at both ends against `tol`.
    pub fn boundary(&self, bk: &LevelSequence, tol: f64) -> BoundaryReport {
        let a = self.grid.left();
        let b1 = self.grid.right() + 1;
        let left = (bk.value(a) * self.rho(a)).abs();
        let right = (bk.value(b1) * self.rho(b1)).abs();
        BoundaryReport {
            level: self.level,
            left,
            right,
            tol,
            pass: left <= tol && right <= tol,
        }
    }
}

/// Weighted scalar product `sum_{n=a}^{b} x(n) y(n) rho_k(n)`.
pub fn inner_product(x: &LevelSequence, y: &LevelSequence, w: &WeightLevel) -> Result<f64> {
    if x.grid() != y.grid() || x.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if x.level() != w.level() {
        return Err(Error::LevelMismatch {
            expected: w.level(),
            got: x.level(),
        });
    }
    if y.level() != w.level() {
        return Err(Error::LevelMismatch {
            expected: w.level(),
            got: y.level(),
        });
    }
    Ok(neumaier_sum(
        w.grid().interior().map(|n| x.value(n) * y.value(n) * w.rho(n)),
    ))
}

/// Weighted 2-norm `sqrt(<x|x>_k)`.
pub fn weighted_norm(x: &LevelSequence, w: &WeightLevel) -> Result<f64> {
    inner_product(x, x, w).map(f64::sqrt)
}

/// Compensated summation (Neumaier variant).
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid(a: i64, b: i64) -> Grid {
        Grid::new(a, b).unwrap()
    }

    fn seq(level: usize, g: Grid, f: impl Fn(i64) -> f64) -> LevelSequence {
        LevelSequence::from_fn(level, g, f).unwrap()
    }

    #[test]
    fn factorial_weight_from_unit_coefficients() {
        // b(n) = n, c(n) = 1 telescopes to rho(n) = 1/n!
        let g = grid(0, 4);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |_| 1.0);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(w.rho(n as i64), *e);
        }
    }

    #[test]
    fn poisson_type_weight_closed_form() {
        // b(n) = n, c(n) = mu gives rho(n) = mu^n / n!
        let g = grid(0, 12);
        let mu = 2.0;
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |_| mu);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let mut expect = 1.0;
        for n in 0..=12i64 {
            assert!((w.rho(n) - expect).abs() <= 1e-15 * expect.max(1.0));
            expect *= mu / (n + 1) as f64;
        }
    }

    #[test]
    fn shifted_coefficients_give_flat_weight() {
        // c(n) = b(n+1) makes every recursion ratio one
        let g = grid(0, 9);
        let b = seq(0, g, |n| (n * n + 1) as f64);
        let c = seq(0, g, |n| ((n + 1) * (n + 1) + 1) as f64);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        for n in 0..=10i64 {
            assert_eq!(w.rho(n), 1.0);
        }
    }

    #[test]
    fn singular_pivot_is_reported() {
        let g = grid(0, 4);
        let b = seq(0, g, |n| (n - 2) as f64); // b(2) = 0 hit at n = 1
        let c = seq(0, g, |_| 1.0);
        assert_eq!(
            WeightLevel::build(&b, &c, 1.0),
            Err(Error::SingularPivot { index: 2 })
        );
    }

    #[test]
    fn sign_flip_fails_positivity() {
        let g = grid(0, 3);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |n| if n == 1 { -1.0 } else { 1.0 });
        assert!(matches!(
            WeightLevel::build(&b, &c, 1.0),
            Err(Error::NonPositiveWeight { index: 2, .. })
        ));
    }

    #[test]
    fn descend_with_unit_multiplier_is_identity() {
        let g = grid(0, 5);
        let b = seq(3, g, |n| n as f64);
        let c = seq(3, g, |_| 1.0);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let d = w.descend(&c).unwrap();
        assert_eq!(d.level(), 2);
        for n in 0..=6i64 {
            assert_eq!(d.rho(n), w.rho(n));
        }
    }

    #[test]
    fn descend_scales_pointwise() {
        let g = grid(0, 6);
        let mu = 2.0;
        let b = seq(1, g, |n| n as f64);
        let c = seq(1, g, |_| mu);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let d = w.descend(&c).unwrap();
        for n in 0..=7i64 {
            assert_eq!(d.rho(n), mu * w.rho(n));
        }
    }

    #[test]
    fn pearson_residual_of_built_weight_is_tiny() {
        let g = grid(0, 30);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |n| 1.5 + 0.25 * (n as f64).cos());
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let (res, scale) = w.pearson_residual(&b, &c);
        assert!(res <= 1e-14 * scale.max(1.0), "residual {res} vs scale {scale}");
    }

    #[test]
    fn boundary_certificate_for_truncated_factorial_weight() {
        let g = grid(0, 40);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |_| 1.0);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let report = w.boundary(&b, 1e-10);
        // left end vanishes exactly because b(0) = 0
        assert_eq!(report.left, 0.0);
        // right end is 41/41!, computed here by direct product
        let mut fact = 1.0f64;
        for n in 1..=41i64 {
            fact *= n as f64;
        }
        let expect = 41.0 / fact;
        assert!((report.right - expect).abs() <= 1e-12 * expect);
        assert!(report.pass);
    }

    #[test]
    fn short_grid_fails_boundary_certificate() {
        let g = grid(0, 3);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |_| 1.0);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap();
        let report = w.boundary(&b, 1e-10);
        assert!((report.right - 4.0 / 24.0).abs() < 1e-15);
        assert!(!report.pass);
    }

    #[test]
    fn hand_summed_inner_product() {
        let g = grid(0, 2);
        let w = WeightLevel::from_values(0, g, vec![1.0, 1.0, 0.5, 0.5]).unwrap();
        let x = seq(0, g, |_| 1.0);
        let y = seq(0, g, |n| n as f64);
        assert_eq!(inner_product(&x, &y, &w).unwrap(), 2.0);
    }

    #[test]
    fn inner_product_with_zero_argument_vanishes() {
        let g = grid(0, 2);
        let w = WeightLevel::from_values(0, g, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let x = LevelSequence::zeros(0, g);
        let y = seq(0, g, |n| (n * n) as f64);
        assert_eq!(inner_product(&x, &y, &w).unwrap(), 0.0);
    }

    #[test]
    fn counting_measure_inner_product() {
        let g = grid(0, 2);
        let w = WeightLevel::from_values(0, g, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let x = seq(0, g, |_| 1.0);
        assert_eq!(inner_product(&x, &x, &w).unwrap(), 3.0);
    }

    #[test]
    fn level_mismatch_is_an_error() {
        let g = grid(0, 2);
        let w = WeightLevel::from_values(1, g, vec![1.0; 4]).unwrap();
        let x = seq(0, g, |_| 1.0);
        let y = seq(1, g, |_| 1.0);
        assert!(matches!(
            inner_product(&x, &y, &w),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn normalized_weight_sums_to_one() {
        let g = grid(0, 20);
        let b = seq(0, g, |n| n as f64);
        let c = seq(0, g, |_| 3.0);
        let w = WeightLevel::build(&b, &c, 1.0).unwrap().normalized();
        assert!((w.interior_sum() - 1.0).abs() <= 1e-14);
    }
}
