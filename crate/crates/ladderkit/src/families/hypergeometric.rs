//! The `f = 0` family: quadratic `c_0`, `b` independent of the level, and
//! the polynomial eigenfunctions of the resulting operator of
//! hypergeometric type `sigma(n) DN x + tau(n) D x + lambda x = 0`
//! (`D` forward, `N` backward difference).

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ChainTolerances, Family, LevelData};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, LevelSequence};
use crate::weight::inner_product;

use super::alpha::{alpha_closed_form, alpha_table};

/// Parameters of the `f = 0` family. `c_0` is generated, never supplied:
/// `c_0(n) = c_origin + n g_diff - n(n+1)/2 (alpha_2 - 2 alpha_1 + alpha_0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergeometricParams {
    pub alpha: [f64; 3],
    /// `b_0(0)`.
    pub b_origin: f64,
    /// `c_0(0)`.
    pub c_origin: f64,
    /// Slope constant of the quadratic profile.
    pub g_diff: f64,
    pub grid: Grid,
    /// Top level `K`.
    pub levels: usize,
}

impl HypergeometricParams {
    pub(crate) fn curvature(&self) -> f64 {
        self.alpha[2] - 2.0 * self.alpha[1] + self.alpha[0]
    }

    /// Coefficients of `c_0`, constant term first.
    pub fn c0_coeffs(&self) -> [f64; 3] {
        let a = self.curvature();
        [self.c_origin, self.g_diff - a / 2.0, -a / 2.0]
    }

    /// Coefficients of `b_0`, constant term first. Derived by eliminating
    /// the level from the induction form
    /// `b_0(n) = b_0(0) - n (alpha_{k+1} - alpha_k) - c_0(-1-k) + c_0(n-1-k)`.
    pub fn b0_coeffs(&self) -> [f64; 3] {
        let a = self.curvature();
        let slope = self.alpha[1] - self.alpha[0];
        [self.b_origin, self.g_diff - slope + a / 2.0, -a / 2.0]
    }

    /// The induction form of `b_0` evaluated with the level still in place;
    /// must agree with [`Self::b0_coeffs`] for every `k`.
    pub fn b0_induction(&self, k: usize, n: i64) -> f64 {
        let c0 = self.c0_coeffs();
        let eval = |m: i64| {
            let x = m as f64;
            c0[0] + c0[1] * x + c0[2] * x * x
        };
        let ki = k as i64;
        let dalpha = alpha_closed_form(self.alpha, ki + 1) - alpha_closed_form(self.alpha, ki);
        self.b_origin - n as f64 * dalpha - eval(-1 - ki) + eval(n - 1 - ki)
    }
}

fn eval_poly(coeffs: &[f64; 3], n: i64) -> f64 {
    let x = n as f64;
    coeffs[0] + coeffs[1] * x + coeffs[2] * x * x
}

/// Builds the `f = 0` chain: every level shares `b_0`, `c_k(n) = c_0(n-k)`,
/// and the shift constants come from the three anchors.
pub fn build_hypergeometric(p: &HypergeometricParams, tol: ChainTolerances) -> Result<ChainSpec> {
    build_with_family_tag(p, tol, None)
}

pub(crate) fn build_with_family_tag(
    p: &HypergeometricParams,
    tol: ChainTolerances,
    tag: Option<Family>,
) -> Result<ChainSpec> {
    let grid = p.grid;
    let b0 = p.b0_coeffs();
    let c0 = p.c0_coeffs();
    // the level must drop out of the induction form
    let scale = grid
        .extended()
        .map(|n| eval_poly(&b0, n).abs())
        .fold(1.0f64, f64::max);
    for k in 0..=2usize {
        for n in grid.extended() {
            let residual = (p.b0_induction(k, n) - eval_poly(&b0, n)).abs();
            if residual > 1e-12 * scale {
                return Err(Error::ConsistencyFailure {
                    level: k,
                    index: n,
                    residual,
                    tol: 1e-12 * scale,
                });
            }
        }
    }
    let mut levels = Vec::with_capacity(p.levels + 1);
    for k in 0..=p.levels {
        let b = LevelSequence::from_fn(k, grid, |n| eval_poly(&b0, n))?;
        let c = LevelSequence::from_fn(k, grid, |n| eval_poly(&c0, n - k as i64))?;
        let f = LevelSequence::zeros(k, grid);
        levels.push(LevelData::new(b, c, f)?);
    }
    let alpha = alpha_table(p.alpha, p.levels);
    let family = tag.unwrap_or(Family::Hypergeometric {
        alpha: p.alpha,
        b0,
        c0,
    });
    ChainSpec::assemble(grid, levels, alpha, family, tol)
}

/// Standard form of the level-`k` eigenvalue problem for ladder index `l`:
/// `sigma(n) DN x + tau(n) D x + lambda x = 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HypergeometricForm {
    /// Quadratic coefficients of `sigma = -b_0`, constant term first.
    pub sigma: [f64; 3],
    /// Linear coefficients of `tau(n) = b_0(n) - c_0(n-k)`.
    pub tau: [f64; 2],
    /// `alpha_k - alpha_{k-l}`.
    pub lambda: f64,
    pub level: usize,
    pub ladder_index: usize,
}

impl HypergeometricForm {
    /// The eigenvalue reproduced from the polynomial data alone:
    /// `-l (tau' + (l-1)/2 sigma'')`.
    pub fn index_rule_lambda(&self) -> f64 {
        let l = self.ladder_index as f64;
        -l * (self.tau[1] + (l - 1.0) / 2.0 * (2.0 * self.sigma[2]))
    }
}

/// Extracts the standard form at level `k`, ladder index `l`, and verifies
/// the eigenvalue against the index rule.
pub fn hypergeometric_form(chain: &ChainSpec, k: usize, l: usize) -> Result<HypergeometricForm> {
    let (alpha, b0, c0) = match chain.family() {
        Family::Hypergeometric { alpha, b0, c0 } => (*alpha, *b0, *c0),
        other => {
            return Err(Error::WrongFamily {
                family: other.name().to_string(),
            })
        }
    };
    if k > chain.top_level() {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: chain.top_level(),
        });
    }
    let kf = k as f64;
    // c_0(n - k) re-expanded around n
    let shifted_c = [
        c0[0] - c0[1] * kf + c0[2] * kf * kf,
        c0[1] - 2.0 * c0[2] * kf,
        c0[2],
    ];
    let sigma = [-b0[0], -b0[1], -b0[2]];
    let tau = [b0[0] - shifted_c[0], b0[1] - shifted_c[1]];
    let lambda = alpha_closed_form(alpha, k as i64) - alpha_closed_form(alpha, k as i64 - l as i64);
    let form = HypergeometricForm {
        sigma,
        tau,
        lambda,
        level: k,
        ladder_index: l,
    };
    let rule = form.index_rule_lambda();
    let residual = (lambda - rule).abs();
    if residual > 1e-12 * lambda.abs().max(1.0) {
        return Err(Error::ConsistencyFailure {
            level: k,
            index: l as i64,
            residual,
            tol: 1e-12 * lambda.abs().max(1.0),
        });
    }
    Ok(form)
}

/// Generates `P_0..P_lmax` at level `k` by the operator product
/// `P_l = prod_{i=0}^{l-1} (b_0(n) S^- - c_0(n-k+i)) 1`, innermost factor
/// first. Evaluation runs on a window extended `lmax` cells to the left so
/// every returned value, ghosts included, is exact.
pub fn generate_polynomials(chain: &ChainSpec, k: usize, lmax: usize) -> Result<Vec<LevelSequence>> {
    let (b0, c0) = match chain.family() {
        Family::Hypergeometric { b0, c0, .. } => (*b0, *c0),
        other => {
            return Err(Error::WrongFamily {
                family: other.name().to_string(),
            })
        }
    };
    if k > chain.top_level() {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: chain.top_level(),
        });
    }
    let grid = chain.grid();
    let capacity = grid.interior_len() - 1;
    if lmax > capacity {
        return Err(Error::DegreeExceedsGrid {
            degree: lmax,
            max: capacity,
        });
    }
    let start = grid.left() - 1 - lmax as i64;
    let len = (grid.right() + 1 - start + 1) as usize;
    let at = |m: i64| (m - start) as usize;
    let mut out = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        let mut values = vec![1.0f64; len];
        // apply the raising factors j = k-l+1 ..= k in increasing order
        for step in 0..l {
            let j = k as i64 - l as i64 + 1 + step as i64;
            let lo = start + 1 + step as i64;
            let mut next = vec![0.0f64; len];
            for m in lo..=(grid.right() + 1) {
                next[at(m)] =
                    eval_poly(&b0, m) * values[at(m - 1)] - eval_poly(&c0, m - j) * values[at(m)];
            }
            values = next;
        }
        let window: Vec<f64> = grid.extended().map(|n| values[at(n)]).collect();
        out.push(LevelSequence::from_values(k, grid, window)?);
    }
    Ok(out)
}

fn gram_with<M>(chain: &ChainSpec, k: usize, polys: &[LevelSequence], map: M) -> Result<Vec<Vec<f64>>>
where
    M: Fn(usize) -> Vec<Result<Vec<f64>>>,
{
    if k > chain.top_level() {
        return Err(Error::LevelOutOfRange {
            level: k,
            max: chain.top_level(),
        });
    }
    let rows = map(polys.len());
    let mut gram = Vec::with_capacity(polys.len());
    for r in rows {
        gram.push(r?);
    }
    Ok(gram)
}

/// Pairwise products `<P_l | P_m>_k` under the level-`k` weight.
pub fn polynomial_gram(chain: &ChainSpec, k: usize, polys: &[LevelSequence]) -> Result<Vec<Vec<f64>>> {
    gram_with(chain, k, polys, |n| {
        exec::map_indices(n, |l| {
            polys
                .iter()
                .map(|pm| inner_product(&polys[l], pm, chain.weight(k)))
                .collect()
        })
    })
}

/// Sequential variant of [`polynomial_gram`].
pub fn polynomial_gram_seq(chain: &ChainSpec, k: usize, polys: &[LevelSequence]) -> Result<Vec<Vec<f64>>> {
    gram_with(chain, k, polys, |n| {
        exec::map_indices_seq(n, |l| {
            polys
                .iter()
                .map(|pm| inner_product(&polys[l], pm, chain.weight(k)))
                .collect()
        })
    })
}

/// Largest `|G_lm| / sqrt(G_ll G_mm)` over `l != m`.
pub fn max_offdiagonal_rel(gram: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 0..gram.len() {
        for m in 0..gram.len() {
            if l != m {
                let scale = (gram[l][l] * gram[m][m]).sqrt().max(f64::MIN_POSITIVE);
                worst = worst.max(gram[l][m].abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{classical_preset, ClassicalFamily};
    use crate::weight::weighted_norm;

    fn charlier(mu: f64, b: i64, levels: usize) -> ChainSpec {
        let grid = Grid::new(0, b).unwrap();
        let params = classical_preset(ClassicalFamily::Charlier { mu }, grid, levels).unwrap();
        build_hypergeometric(&params, ChainTolerances::default()).unwrap()
    }

    #[test]
    fn charlier_parameters_reproduce_the_known_data() {
        let chain = charlier(1.5, 20, 3);
        for k in 0..=3usize {
            let data = chain.level_data(k);
            for n in chain.grid().extended() {
                assert_eq!(data.b().value(n), n as f64);
                assert_eq!(data.c().value(n), 1.5);
                assert_eq!(data.f().value(n), 0.0);
            }
            assert_eq!(chain.alpha_at(k), -(k as f64));
        }
    }

    #[test]
    fn charlier_weight_is_the_scaled_factorial_weight() {
        let chain = charlier(1.0, 15, 2);
        let w = chain.weight(2);
        let mut fact = 1.0;
        for n in 0..=15i64 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((w.rho(n) - 1.0 / fact).abs() <= 1e-15 / fact);
        }
    }

    #[test]
    fn induction_form_is_level_independent() {
        let p = HypergeometricParams {
            alpha: [0.0, -1.5, -3.5],
            b_origin: 0.5,
            c_origin: 4.0,
            g_diff: 0.5,
            grid: Grid::new(0, 10).unwrap(),
            levels: 2,
        };
        let b0 = p.b0_coeffs();
        for k in [0usize, 2] {
            for n in -3..=12i64 {
                assert!((p.b0_induction(k, n) - eval_poly(&b0, n)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn vanishing_curvature_gives_affine_b_and_constant_slope_c() {
        let p = HypergeometricParams {
            alpha: [0.0, -2.0, -4.0],
            b_origin: 0.0,
            c_origin: 3.0,
            g_diff: 0.0,
            grid: Grid::new(0, 8).unwrap(),
            levels: 1,
        };
        assert_eq!(p.c0_coeffs(), [3.0, 0.0, 0.0]);
        assert_eq!(p.b0_coeffs(), [0.0, 2.0, 0.0]);
    }

    #[test]
    fn standard_form_for_charlier_is_linear() {
        let mu = 1.0;
        let chain = charlier(mu, 20, 4);
        let form = hypergeometric_form(&chain, 3, 2).unwrap();
        // sigma(n) = -n, tau(n) = n - mu, lambda = -l
        assert_eq!(form.sigma, [0.0, -1.0, 0.0]);
        assert_eq!(form.tau, [-mu, 1.0]);
        assert_eq!(form.lambda, -2.0);
        assert_eq!(form.index_rule_lambda(), -2.0);
    }

    #[test]
    fn ground_index_gives_zero_eigenvalue() {
        let chain = charlier(1.0, 10, 2);
        let form = hypergeometric_form(&chain, 2, 0).unwrap();
        assert_eq!(form.lambda, 0.0);
    }

    #[test]
    fn index_rule_matches_anchor_differences_for_generic_parameters() {
        let p = HypergeometricParams {
            alpha: [0.25, -1.5, -3.5],
            b_origin: 0.0,
            c_origin: 10.0,
            g_diff: 0.75,
            grid: Grid::new(0, 30).unwrap(),
            levels: 6,
        };
        let chain = build_hypergeometric(&p, ChainTolerances::default()).unwrap();
        for l in 0..=6usize {
            let form = hypergeometric_form(&chain, 6, l).unwrap();
            assert!((form.lambda - form.index_rule_lambda()).abs() <= 1e-12 * form.lambda.abs().max(1.0));
        }
    }

    #[test]
    fn first_polynomials_match_the_single_factor() {
        let mu = 1.0;
        let chain = charlier(mu, 12, 3);
        let polys = generate_polynomials(&chain, 3, 2).unwrap();
        for n in -1..=13i64 {
            assert_eq!(polys[0].value(n), 1.0);
            // P_1(n) = b_0(n) - c_0(n-k) = n - mu
            assert_eq!(polys[1].value(n), n as f64 - mu);
        }
    }

    #[test]
    fn polynomials_match_the_raising_chain_up_to_scale() {
        let chain = charlier(2.0, 25, 5);
        let polys = generate_polynomials(&chain, 5, 4).unwrap();
        for (l, poly) in polys.iter().enumerate().skip(1) {
            let ground = crate::chain::ground_state(&chain, 5 - l).unwrap();
            let raised = crate::chain::raise_state(&chain, &ground, 5).unwrap();
            let w = chain.weight(5);
            let dot = inner_product(poly, &raised.vector, w).unwrap();
            let np = weighted_norm(poly, w).unwrap();
            let nr = weighted_norm(&raised.vector, w).unwrap();
            let cosine = dot / (np * nr);
            assert!((cosine.abs() - 1.0).abs() <= 1e-10, "l = {l}, cosine = {cosine}");
        }
    }

    #[test]
    fn truncated_series_orthogonality_of_the_first_two() {
        // <P_0 | P_1> at mu = 1 telescopes to -1/40! plus rounding
        let chain = charlier(1.0, 40, 2);
        let polys = generate_polynomials(&chain, 2, 1).unwrap();
        let g = polynomial_gram(&chain, 2, &polys).unwrap();
        assert!(g[0][1].abs() <= 1e-10);
        assert_eq!(g[0][1], g[1][0]);
    }

    #[test]
    fn parallel_and_sequential_gram_agree() {
        let chain = charlier(1.0, 20, 4);
        let polys = generate_polynomials(&chain, 4, 3).unwrap();
        let a = polynomial_gram(&chain, 4, &polys).unwrap();
        let b = polynomial_gram_seq(&chain, 4, &polys).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degree_capacity_is_enforced() {
        let chain = charlier(1.0, 4, 2);
        assert!(matches!(
            generate_polynomials(&chain, 2, 5),
            Err(Error::DegreeExceedsGrid { degree: 5, max: 4 })
        ));
    }

    #[test]
    fn non_hypergeometric_chains_are_rejected() {
        use crate::families::{build_geometric, GeometricParams};
        use crate::sequence::SequenceSpec;
        let p = GeometricParams {
            gamma: vec![2.0],
            alpha: vec![0.0, -0.5],
            f0: SequenceSpec::Constant(0.0),
            c0: SequenceSpec::Constant(3.0),
            b0: SequenceSpec::Constant(2.0),
            r0: None,
            grid: Grid::new(0, 8).unwrap(),
        };
        let (chain, _) = build_geometric(&p, ChainTolerances::default()).unwrap();
        assert!(matches!(
            hypergeometric_form(&chain, 1, 0),
            Err(Error::WrongFamily { .. })
        ));
        assert!(matches!(
            generate_polynomials(&chain, 1, 1),
            Err(Error::WrongFamily { .. })
        ));
    }
}
