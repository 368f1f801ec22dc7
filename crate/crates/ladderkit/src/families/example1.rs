//! The level-shift family with a free lowering profile.
//!
//! `b` does not depend on the level, `f_k(n) = f_0(n-k)` and
//! `c_k(n) = c_0(n-k)`. The pair `(f_0, c_0)` is accepted jointly and must
//! satisfy the quadratic constraint
//! `(f_0(n)-1)^2 c_0(n) = F(0) + n g_diff - n(n+1)/2 curvature`;
//! `b` is then recovered from the constraint profile, which is defined at
//! every integer.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ChainTolerances, Family, LevelData};
use crate::error::{Error, Result};
use crate::grid::{Grid, LevelSequence};
use crate::sequence::SequenceSpec;

use super::alpha::{alpha_closed_form, alpha_table};
use super::FamilyDiagnostics;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Params {
    pub alpha: [f64; 3],
    pub f0: SequenceSpec,
    pub c0: SequenceSpec,
    /// Quadratic profile value at `n = 0`, i.e. `(f_0(0)-1)^2 c_0(0)`.
    pub f_origin: f64,
    /// Level-0 anchor of the diagonal balance.
    pub g0_origin: f64,
    /// Level-1 anchor of the diagonal balance.
    pub g1_origin: f64,
    pub grid: Grid,
    pub levels: usize,
}

impl Example1Params {
    fn curvature(&self) -> f64 {
        self.alpha[2] - 2.0 * self.alpha[1] + self.alpha[0]
    }

    fn g_diff(&self) -> f64 {
        self.g0_origin - self.g1_origin
    }

    /// The constraint profile `F(n)`.
    pub fn quad_profile(&self, n: i64) -> f64 {
        let x = n as f64;
        self.f_origin + x * self.g_diff() - x * (x + 1.0) / 2.0 * self.curvature()
    }

    /// Per-level anchor `G_k(0)`.
    pub fn g_anchor(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.g0_origin + kf * (self.g1_origin - self.g0_origin)
            - kf * (kf - 1.0) / 2.0 * self.curvature()
    }

    /// `b` recovered from the profile (level eliminated through the
    /// constraint): `b(m) = F(m-1) - G_0(0) - (m-1)(alpha_1 - alpha_0)`.
    pub fn b_closed_form(&self, m: i64) -> f64 {
        self.quad_profile(m - 1) - self.g0_origin - (m - 1) as f64 * (self.alpha[1] - self.alpha[0])
    }
}

/// Evaluates the level-`k` recovery of `b` from the supplied `(f_0, c_0)`
/// data, over `m = a ..= b+1`:
/// `b(m) = (f_0(m-1-k)-1)^2 c_0(m-1-k) - G_k(0) - (m-1)(alpha_{k+1}-alpha_k)`.
/// The same values must come out for every `k`.
pub fn example1_b_profile(p: &Example1Params, k: usize) -> Result<Vec<f64>> {
    let ki = k as i64;
    let dalpha = alpha_closed_form(p.alpha, ki + 1) - alpha_closed_form(p.alpha, ki);
    let anchor = p.g_anchor(k);
    let mut out = Vec::with_capacity(p.grid.interior_len() + 1);
    for m in p.grid.left()..=(p.grid.right() + 1) {
        let j = m - 1 - ki;
        let fm1 = p.f0.eval(j)? - 1.0;
        out.push(fm1 * fm1 * p.c0.eval(j)? - anchor - (m - 1) as f64 * dalpha);
    }
    Ok(out)
}

/// Builds the chain and returns it with the profile diagnostics.
pub fn build_example1(p: &Example1Params, tol: ChainTolerances) -> Result<(ChainSpec, FamilyDiagnostics)> {
    let grid = p.grid;
    // the supplied pair must reproduce the quadratic profile wherever the
    // shifted level data samples it
    for n in (grid.left() - 1 - p.levels as i64)..=(grid.right() + 1) {
        let fm1 = p.f0.eval(n)? - 1.0;
        let residual = (fm1 * fm1 * p.c0.eval(n)? - p.quad_profile(n)).abs();
        if residual > tol.condition {
            return Err(Error::ConstraintViolation {
                index: n,
                residual,
                tol: tol.condition,
            });
        }
    }
    let mut levels = Vec::with_capacity(p.levels + 1);
    for k in 0..=p.levels {
        let ki = k as i64;
        let b = LevelSequence::from_fn(k, grid, |m| p.b_closed_form(m))?;
        let mut c_vals = Vec::with_capacity(grid.extended_len());
        let mut f_vals = Vec::with_capacity(grid.extended_len());
        for n in grid.extended() {
            c_vals.push(p.c0.eval(n - ki)?);
            f_vals.push(p.f0.eval(n - ki)?);
        }
        let c = LevelSequence::from_values(k, grid, c_vals)?;
        let f = LevelSequence::from_values(k, grid, f_vals)?;
        levels.push(LevelData::new(b, c, f)?);
    }
    let alpha = alpha_table(p.alpha, p.levels);
    let chain = ChainSpec::assemble(grid, levels, alpha, Family::Example1, tol)?;
    let diagnostics = FamilyDiagnostics {
        g_anchors: (0..=p.levels).map(|k| p.g_anchor(k)).collect(),
        quad_profile: grid.extended().map(|n| p.quad_profile(n)).collect(),
        r_tables: Vec::new(),
        s_tables: Vec::new(),
    };
    Ok((chain, diagnostics))
}
