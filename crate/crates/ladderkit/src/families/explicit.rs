//! Reconstruction of a chain from explicit stencil coefficients.
//!
//! Given `z, w, v` for one operator, the only constructive inverse among
//! the solved families is the `f = 0` shape: `b = -w`, `c = -z`, with the
//! diagonal shift `v + w + z` constant and `c` an exact quadratic. The
//! reconstruction is validated by rebuilding the operator from the fitted
//! parameters; anything outside that shape is refused.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ChainTolerances, Family};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sequence::SequenceSpec;

use super::hypergeometric::{build_with_family_tag, HypergeometricParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    /// Coefficient of `x(n+1)`.
    pub z: SequenceSpec,
    /// Coefficient of `x(n-1)`.
    pub w: SequenceSpec,
    /// Coefficient of `x(n)`.
    pub v: SequenceSpec,
    pub grid: Grid,
    /// Number of levels to extend the reconstructed chain upward.
    pub levels: usize,
}

/// Fits the `f = 0` family to the supplied coefficients, treating them as
/// level 0, and builds the chain. Returns `NotFactorizable` when the data
/// does not match the shape.
pub fn build_explicit(p: &ExplicitParams, tol: ChainTolerances) -> Result<ChainSpec> {
    let grid = p.grid;
    let c_at = |n: i64| -> Result<f64> { Ok(-p.z.eval(n)?) };
    let b_at = |n: i64| -> Result<f64> { Ok(-p.w.eval(n)?) };
    // quadratic fit of c through n = 0, 1, 2
    let (c0, c1, c2) = (c_at(0)?, c_at(1)?, c_at(2)?);
    let quad = (c2 - 2.0 * c1 + c0) / 2.0;
    let lin = c1 - c0 - quad;
    let c_fit = |n: i64| {
        let x = n as f64;
        c0 + lin * x + quad * x * x
    };
    let scale = grid
        .extended()
        .map(|n| c_at(n).map(f64::abs).unwrap_or(0.0))
        .fold(1.0f64, f64::max);
    for n in grid.extended() {
        if (c_at(n)? - c_fit(n)).abs() > tol.condition * scale {
            return Err(Error::NotFactorizable(
                "forward coefficient is not an exact quadratic".to_string(),
            ));
        }
    }
    // the diagonal shift must be constant
    let shift0 = p.v.eval(grid.left())? + p.w.eval(grid.left())? + p.z.eval(grid.left())?;
    let vscale = grid
        .extended()
        .map(|n| p.v.eval(n).map(f64::abs).unwrap_or(0.0))
        .fold(1.0f64, f64::max);
    for n in grid.extended() {
        let shift = p.v.eval(n)? + p.w.eval(n)? + p.z.eval(n)?;
        if (shift - shift0).abs() > tol.condition * vscale {
            return Err(Error::NotFactorizable(
                "diagonal shift is not constant across the grid".to_string(),
            ));
        }
    }
    // anchor constants of the reconstructed family
    let curvature = -2.0 * quad;
    let alpha0 = shift0;
    let alpha1 = alpha0 + b_at(0)? - b_at(1)? - c_fit(-1) + c_fit(0);
    let alpha2 = alpha1 + (alpha1 - alpha0) + curvature;
    let params = HypergeometricParams {
        alpha: [alpha0, alpha1, alpha2],
        b_origin: b_at(0)?,
        c_origin: c0,
        g_diff: lin + curvature / 2.0,
        grid,
        levels: p.levels,
    };
    let chain = build_with_family_tag(&params, tol, Some(Family::Explicit)).map_err(|e| match e {
        Error::ConsistencyFailure { .. } => Error::NotFactorizable(
            "backward coefficient is inconsistent with the level-shift balance".to_string(),
        ),
        other => other,
    })?;
    // the reconstruction must reproduce the inputs at level 0
    let data = chain.level_data(0);
    let bscale = grid
        .extended()
        .map(|n| b_at(n).map(f64::abs).unwrap_or(0.0))
        .fold(1.0f64, f64::max);
    for n in grid.extended() {
        let db = (data.b().value(n) - b_at(n)?).abs();
        let dc = (data.c().value(n) - c_at(n)?).abs();
        if db > tol.condition * bscale || dc > tol.condition * scale {
            return Err(Error::NotFactorizable(
                "coefficients are inconsistent with a level-shift chain".to_string(),
            ));
        }
    }
    for n in grid.interior() {
        let v_rebuilt = data.b().value(n) + data.c().value(n) + chain.alpha_at(0);
        if (v_rebuilt - p.v.eval(n)?).abs() > tol.condition * vscale {
            return Err(Error::NotFactorizable(
                "diagonal coefficient does not match the factorized form".to_string(),
            ));
        }
    }
    Ok(chain)
}
