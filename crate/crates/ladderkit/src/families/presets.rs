//! Parameter maps from the classical discrete orthogonal polynomial
//! families onto the `f = 0` chain.
//!
//! Each preset pins the anchor triple and the two origin constants so the
//! generated weight matches the family's weight up to normalization.
//! Finite-support and decaying weights are truncation-certified by the
//! boundary check; the orthogonality suite validates every map.

use crate::error::{Error, Result};
use crate::grid::Grid;

use super::hypergeometric::HypergeometricParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassicalFamily {
    /// Weight `mu^n / n!` on `[0, inf)`, `mu > 0`.
    Charlier { mu: f64 },
    /// Weight `c^n (beta)_n / n!` on `[0, inf)`, `beta > K`, `0 < c < 1`.
    Meixner { beta: f64, c: f64 },
    /// Weight `C(N, n) p^n (1-p)^{N-n}` on `[0, N]`, `0 < p < 1`;
    /// `N` is the grid's right endpoint.
    Kravchuk { p: f64 },
    /// Weight `C(alpha+n, n) C(beta+N-n, N-n)` on `[0, N]`,
    /// `alpha > K-1`, `beta > 0`; `N` is the grid's right endpoint.
    Hahn { alpha: f64, beta: f64 },
}

fn require(ok: bool, name: &str, value: f64, hint: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterRange {
            name: name.to_string(),
            value,
            hint: hint.to_string(),
        })
    }
}

fn require_anchored(grid: Grid, family: &str) -> Result<()> {
    require(
        grid.left() == 0,
        "grid.a",
        grid.left() as f64,
        &format!("the {family} preset is anchored at a = 0"),
    )
}

/// Maps a classical family onto chain parameters for `levels` raising steps
/// on `grid`.
pub fn classical_preset(family: ClassicalFamily, grid: Grid, levels: usize) -> Result<HypergeometricParams> {
    match family {
        ClassicalFamily::Charlier { mu } => {
            require(mu > 0.0, "mu", mu, "needs mu > 0")?;
            Ok(HypergeometricParams {
                alpha: [0.0, -1.0, -2.0],
                b_origin: 0.0,
                c_origin: mu,
                g_diff: 0.0,
                grid,
                levels,
            })
        }
        ClassicalFamily::Meixner { beta, c } => {
            require(c > 0.0 && c < 1.0, "c", c, "needs 0 < c < 1")?;
            let floor = levels as f64 - grid.left() as f64;
            require(beta > floor, "beta", beta, "needs beta > K - a for positive weights")?;
            let slope = c - 1.0;
            Ok(HypergeometricParams {
                alpha: [0.0, slope, 2.0 * slope],
                b_origin: 0.0,
                c_origin: c * beta,
                g_diff: c,
                grid,
                levels,
            })
        }
        ClassicalFamily::Kravchuk { p } => {
            require(p > 0.0 && p < 1.0, "p", p, "needs 0 < p < 1")?;
            require_anchored(grid, "kravchuk")?;
            let n_max = grid.right() as f64;
            let q = 1.0 - p;
            let slope = -1.0 / q;
            Ok(HypergeometricParams {
                alpha: [0.0, slope, 2.0 * slope],
                b_origin: 0.0,
                c_origin: p * n_max / q,
                g_diff: -p / q,
                grid,
                levels,
            })
        }
        ClassicalFamily::Hahn { alpha, beta } => {
            require(
                alpha > levels as f64 - 1.0,
                "alpha",
                alpha,
                "needs alpha > K - 1 for positive weights",
            )?;
            require(beta > 0.0, "beta", beta, "needs beta > 0")?;
            require_anchored(grid, "hahn")?;
            let n_max = grid.right() as f64;
            let slope = -(alpha + beta);
            Ok(HypergeometricParams {
                alpha: [0.0, slope, 2.0 + 2.0 * slope],
                b_origin: 0.0,
                c_origin: (alpha + 1.0) * n_max,
                g_diff: n_max - alpha,
                grid,
                levels,
            })
        }
    }
}
