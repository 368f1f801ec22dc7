//! Factorization chains: per-level coefficient data, the first-order
//! lowering/raising operators, the second-order operator they compose to,
//! and the eigen-chain built by raising ground states.
//!
//! A chain holds levels `k = 0..=K`. The lowering operator at level `k`
//! acts as `x(n+1) + (f_k(n) - 1) x(n)` and maps level `k` to `k-1`; its
//! adjoint acts as `b_k(n) y(n-1) + (f_k(n) - 1) c_k(n) y(n)` and maps
//! level `k-1` to `k`. Weights are built once at the top level and pushed
//! down by the descent relation so that adjointness holds without
//! per-level renormalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, LevelSequence};
use crate::sequence::SequenceSpec;
use crate::weight::WeightLevel;

/// Residual tolerances attached to a chain. All configurable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainTolerances {
    /// Cross-multiplied level-coupling conditions.
    pub condition: f64,
    /// Truncation certificate `|b rho|` at the grid ends.
    pub boundary: f64,
    /// Relative adjointness defect over random pairs.
    pub adjoint: f64,
    /// Eigenpair residual relative to the sup norm.
    pub eigen: f64,
    /// Factorized vs expanded operator application.
    pub factorization: f64,
    /// Lower vs upper factorized form.
    pub dual: f64,
    /// Ladder eigenvalue vs matrix spectrum distance.
    pub spectrum: f64,
    /// Closed form vs recursion iterate agreement.
    pub consistency: f64,
}

impl Default for ChainTolerances {
    fn default() -> Self {
        ChainTolerances {
            condition: 1e-10,
            boundary: 1e-10,
            adjoint: 1e-9,
            eigen: 1e-8,
            factorization: 1e-12,
            dual: 1e-10,
            spectrum: 1e-6,
            consistency: 1e-10,
        }
    }
}

/// Coefficient data of one chain level: `b_k`, `c_k`, `f_k` on `[a-1, b+1]`.
#[derive(Clone, Debug)]
pub struct LevelData {
    b: LevelSequence,
    c: LevelSequence,
    f: LevelSequence,
}

impl LevelData {
    pub fn new(b: LevelSequence, c: LevelSequence, f: LevelSequence) -> Result<Self> {
        if b.grid() != c.grid() || b.grid() != f.grid() {
            return Err(Error::GridMismatch);
        }
        if b.level() != c.level() || b.level() != f.level() {
            return Err(Error::LevelMismatch {
                expected: b.level(),
                got: c.level().max(f.level()),
            });
        }
        Ok(LevelData { b, c, f })
    }

    pub fn b(&self) -> &LevelSequence {
        &self.b
    }

    pub fn c(&self) -> &LevelSequence {
        &self.c
    }

    pub fn f(&self) -> &LevelSequence {
        &self.f
    }
}

/// Tag identifying which builder produced a chain, with the data later
/// operations need back out of it.
#[derive(Clone, Debug)]
pub enum Family {
    Example1,
    /// `f = 0` chain; carries the anchor triple and the generating
    /// polynomials (coefficients from the constant term upward).
    Hypergeometric {
        alpha: [f64; 3],
        b0: [f64; 3],
        c0: [f64; 3],
    },
    Geometric {
        gamma: Vec<f64>,
        r0: Vec<f64>,
    },
    Explicit,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Hypergeometric { .. } => "hypergeometric",
            Family::Geometric { .. } => "geometric",
            Family::Explicit => "explicit",
        }
    }
}

/// Target of an injected coefficient fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultTarget {
    B,
    C,
    F,
}

/// A complete factorization chain over levels `0..=K`.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    grid: Grid,
    levels: Vec<LevelData>,
    alpha: Vec<f64>,
    weights: Vec<WeightLevel>,
    family: Family,
    tol: ChainTolerances,
}

impl ChainSpec {
    /// Assembles a chain from per-level data: builds the top-level weight by
    /// the first-order recursion (seed 1), descends it through the levels,
    /// and verifies the level-coupling conditions against `tol.condition`.
    pub(crate) fn assemble(
        grid: Grid,
        levels: Vec<LevelData>,
        alpha: Vec<f64>,
        family: Family,
        tol: ChainTolerances,
    ) -> Result<Self> {
        assert!(!levels.is_empty(), "a chain needs at least level 0");
        if alpha.len() != levels.len() {
            return Err(Error::LengthMismatch {
                expected: levels.len(),
                got: alpha.len(),
            });
        }
        let top = levels.len() - 1;
        let mut weights = vec![WeightLevel::build(levels[top].b(), levels[top].c(), 1.0)?];
        for k in (1..=top).rev() {
            let lower = weights.last().unwrap().descend(levels[k].c())?;
            weights.push(lower);
        }
        weights.reverse();
        let chain = ChainSpec {
            grid,
            levels,
            alpha,
            weights,
            family,
            tol,
        };
        for row in crate::verify::check_chain_conditions(&chain) {
            for (which, residual) in [
                (5u8, row.condition5),
                (6u8, row.condition6),
                (7u8, row.condition7),
            ] {
                if residual > tol.condition {
                    return Err(Error::ConditionResidual {
                        which,
                        level: row.level,
                        residual,
                        tol: tol.condition,
                    });
                }
            }
        }
        Ok(chain)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Highest level index `K`.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_at(&self, k: usize) -> f64 {
        self.alpha[k]
    }

    pub fn level_data(&self, k: usize) -> &LevelData {
        &self.levels[k]
    }

    pub fn weight(&self, k: usize) -> &WeightLevel {
        &self.weights[k]
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tolerances(&self) -> ChainTolerances {
        self.tol
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.top_level() {
            Err(Error::LevelOutOfRange {
                level: k,
                max: self.top_level(),
            })
        } else {
            Ok(())
        }
    }

    /// Adds `delta` to one stored coefficient value. Weights are left as
    /// built, so downstream checks see the inconsistency. Intended for
    /// fault-injection in verification tests.
    pub fn inject_fault(&mut self, target: FaultTarget, level: usize, n: i64, delta: f64) -> Result<()> {
        self.check_level(level)?;
        if !self.grid.contains_extended(n) {
            return Err(Error::FaultIndex {
                index: n,
                start: self.grid.left() - 1,
                end: self.grid.right() + 1,
            });
        }
        let data = &mut self.levels[level];
        let seq = match target {
            FaultTarget::B => &mut data.b,
            FaultTarget::C => &mut data.c,
            FaultTarget::F => &mut data.f,
        };
        let v = seq.value(n);
        seq.set_value(n, v + delta);
        Ok(())
    }
}

/// Lowering maps level `k` to `k-1`; raising maps `k-1` to `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilation,
    Creation,
}

/// First-order operator bound to one level of a chain.
#[derive(Clone, Copy)]
pub struct FirstOrderOperator<'a> {
    chain: &'a ChainSpec,
    kind: OperatorKind,
    level: usize,
}

impl<'a> FirstOrderOperator<'a> {
    pub fn new(chain: &'a ChainSpec, kind: OperatorKind, level: usize) -> Result<Self> {
        chain.check_level(level)?;
        if level == 0 {
            return Err(Error::LevelOutOfRange {
                level: 0,
                max: chain.top_level(),
            });
        }
        Ok(FirstOrderOperator { chain, kind, level })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn apply(&self, x: &LevelSequence) -> Result<LevelSequence> {
        match self.kind {
            OperatorKind::Annihilation => apply_annihilation(self.chain, self.level, x),
            OperatorKind::Creation => apply_creation(self.chain, self.level, x),
        }
    }
}

/// Lowering step: `(x(n+1) + (f_k(n) - 1) x(n))` carried to level `k-1`.
///
/// The result is filled on `[a-1, b]`; the right ghost is vacated.
pub fn apply_annihilation(chain: &ChainSpec, k: usize, x: &LevelSequence) -> Result<LevelSequence> {
    chain.check_level(k)?;
    if k == 0 {
        return Err(Error::LevelOutOfRange {
            level: 0,
            max: chain.top_level(),
        });
    }
    if x.level() != k {
        return Err(Error::LevelMismatch {
            expected: k,
            got: x.level(),
        });
    }
    if x.grid() != chain.grid {
        return Err(Error::GridMismatch);
    }
    if !x.right_ghost_valid() {
        return Err(Error::GhostInvalid {
            index: chain.grid.right() + 1,
        });
    }
    let f = chain.level_data(k).f();
    let g = chain.grid;
    let mut out = LevelSequence::zeros(k - 1, g);
    for n in g.left()..=g.right() {
        out.set_value(n, x.value(n + 1) + (f.value(n) - 1.0) * x.value(n));
    }
    let ghost = g.left() - 1;
    if x.left_ghost_valid() {
        out.set_value(ghost, x.value(ghost + 1) + (f.value(ghost) - 1.0) * x.value(ghost));
    } else {
        out.invalidate_left_ghost();
    }
    out.invalidate_right_ghost();
    Ok(out)
}

/// Raising step: `(b_k(n) y(n-1) + (f_k(n) - 1) c_k(n) y(n))` carried to
/// level `k`.
///
/// The input lives at level `k-1`. An invalid left ghost of `y` is accepted
/// only when `b_k(a) = 0`, which removes it from the interior output.
pub fn apply_creation(chain: &ChainSpec, k: usize, y: &LevelSequence) -> Result<LevelSequence> {
    chain.check_level(k)?;
    if k == 0 {
        return Err(Error::LevelOutOfRange {
            level: 0,
            max: chain.top_level(),
        });
    }
    if y.level() != k - 1 {
        return Err(Error::LevelMismatch {
            expected: k - 1,
            got: y.level(),
        });
    }
    if y.grid() != chain.grid {
        return Err(Error::GridMismatch);
    }
    let data = chain.level_data(k);
    let (b, c, f) = (data.b(), data.c(), data.f());
    let g = chain.grid;
    if !y.left_ghost_valid() && b.value(g.left()) != 0.0 {
        return Err(Error::GhostInvalid {
            index: g.left() - 1,
        });
    }
    let mut out = LevelSequence::zeros(k, g);
    for n in g.left()..=g.right() {
        out.set_value(n, b.value(n) * y.value(n - 1) + (f.value(n) - 1.0) * c.value(n) * y.value(n));
    }
    let right = g.right() + 1;
    if y.right_ghost_valid() {
        out.set_value(
            right,
            b.value(right) * y.value(right - 1) + (f.value(right) - 1.0) * c.value(right) * y.value(right),
        );
    } else {
        out.invalidate_right_ghost();
    }
    out.invalidate_left_ghost();
    Ok(out)
}

/// Applies `(A_k* A_k + alpha_k) x` through the factor formulas, without
/// expanding the stencil. For `k >= 1` this routes through the public
/// lowering and raising operators; at `k = 0` the lowered intermediate has
/// no representable level, so the same two formulas are evaluated inline.
pub fn apply_factored_lower(chain: &ChainSpec, k: usize, x: &LevelSequence) -> Result<LevelSequence> {
    chain.check_level(k)?;
    if x.level() != k {
        return Err(Error::LevelMismatch {
            expected: k,
            got: x.level(),
        });
    }
    let alpha = chain.alpha_at(k);
    let composed = if k >= 1 {
        apply_creation(chain, k, &apply_annihilation(chain, k, x)?)?
    } else {
        if !x.right_ghost_valid() {
            return Err(Error::GhostInvalid {
                index: chain.grid.right() + 1,
            });
        }
        let data = chain.level_data(0);
        let (b, c, f) = (data.b(), data.c(), data.f());
        let g = chain.grid;
        if !x.left_ghost_valid() && b.value(g.left()) != 0.0 {
            return Err(Error::GhostInvalid {
                index: g.left() - 1,
            });
        }
        let lowered = |n: i64| x.value(n + 1) + (f.value(n) - 1.0) * x.value(n);
        let mut out = LevelSequence::zeros(0, g);
        for n in g.interior() {
            out.set_value(n, b.value(n) * lowered(n - 1) + (f.value(n) - 1.0) * c.value(n) * lowered(n));
        }
        out.invalidate_left_ghost();
        out.invalidate_right_ghost();
        out
    };
    let mut out = LevelSequence::zeros(k, chain.grid);
    for n in chain.grid.interior() {
        out.set_value(n, composed.value(n) + alpha * x.value(n));
    }
    out.invalidate_left_ghost();
    out.invalidate_right_ghost();
    Ok(out)
}

/// Which factorized form the second-order operator is expanded from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorSide {
    /// Raising-after-lowering at level `k`, shifted by `alpha_k`.
    Lower,
    /// Lowering-after-raising through level `k+1`, shifted by `alpha_{k+1}`.
    Upper,
}

/// Second-order operator `z(n) S^+ + w(n) S^- + v(n)` on the interior.
#[derive(Clone, Debug)]
pub struct SecondOrderOperator {
    level: usize,
    grid: Grid,
    forward: Vec<f64>,
    backward: Vec<f64>,
    diagonal: Vec<f64>,
}

impl SecondOrderOperator {
    fn oidx(&self, n: i64) -> usize {
        (n - self.grid.left()) as usize
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Coefficient of `x(n+1)`, indexed from `a`.
    pub fn forward(&self) -> &[f64] {
        &self.forward
    }

    /// Coefficient of `x(n-1)`, indexed from `a`.
    pub fn backward(&self) -> &[f64] {
        &self.backward
    }

    /// Coefficient of `x(n)`, indexed from `a`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Applies the operator on the interior. Invalid ghosts of `x` are
    /// tolerated only where the matching coefficient vanishes.
    pub fn apply(&self, x: &LevelSequence) -> Result<LevelSequence> {
        if x.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if x.level() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: x.level(),
            });
        }
        let g = self.grid;
        if !x.left_ghost_valid() && self.backward[0] != 0.0 {
            return Err(Error::GhostInvalid {
                index: g.left() - 1,
            });
        }
        if !x.right_ghost_valid() && self.forward[self.forward.len() - 1] != 0.0 {
            return Err(Error::GhostInvalid {
                index: g.right() + 1,
            });
        }
        let mut out = LevelSequence::zeros(self.level, g);
        for n in g.left()..=g.right() {
            let i = self.oidx(n);
            out.set_value(
                n,
                self.forward[i] * x.value(n + 1)
                    + self.backward[i] * x.value(n - 1)
                    + self.diagonal[i] * x.value(n),
            );
        }
        out.invalidate_left_ghost();
        out.invalidate_right_ghost();
        Ok(out)
    }

    /// Max of `|H x - lambda x|` over every interior index where the stencil
    /// is fully backed by valid data, together with that index range.
    pub fn residual(&self, x: &LevelSequence, lambda: f64) -> Result<OperatorResidual> {
        if x.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if x.level() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: x.level(),
            });
        }
        let g = self.grid;
        let mut from = g.left();
        if !x.left_ghost_valid() && self.backward[0] != 0.0 {
            from += 1;
        }
        let mut to = g.right();
        if !x.right_ghost_valid() && self.forward[self.forward.len() - 1] != 0.0 {
            to -= 1;
        }
        let mut max_abs: f64 = 0.0;
        for n in from..=to {
            let i = self.oidx(n);
            let hx = self.forward[i] * x.value(n + 1)
                + self.backward[i] * x.value(n - 1)
                + self.diagonal[i] * x.value(n);
            max_abs = max_abs.max((hx - lambda * x.value(n)).abs());
        }
        Ok(OperatorResidual { max_abs, from, to })
    }
}

/// Residual of an eigen relation over the sound index range.
#[derive(Clone, Copy, Debug)]
pub struct OperatorResidual {
    pub max_abs: f64,
    pub from: i64,
    pub to: i64,
}

/// Expands a factorized form into explicit stencil coefficients.
pub fn compose_hamiltonian(chain: &ChainSpec, k: usize, side: OperatorSide) -> Result<SecondOrderOperator> {
    chain.check_level(k)?;
    let g = chain.grid;
    let n_pts = g.interior_len();
    let mut forward = Vec::with_capacity(n_pts);
    let mut backward = Vec::with_capacity(n_pts);
    let mut diagonal = Vec::with_capacity(n_pts);
    match side {
        OperatorSide::Lower => {
            let data = chain.level_data(k);
            let (b, c, f) = (data.b(), data.c(), data.f());
            let shift = chain.alpha_at(k);
            for n in g.interior() {
                let fm1 = f.value(n) - 1.0;
                forward.push(fm1 * c.value(n));
                backward.push(b.value(n) * (f.value(n - 1) - 1.0));
                diagonal.push(b.value(n) + fm1 * fm1 * c.value(n) + shift);
            }
        }
        OperatorSide::Upper => {
            chain.check_level(k + 1)?;
            let data = chain.level_data(k + 1);
            let (b, c, f) = (data.b(), data.c(), data.f());
            let shift = chain.alpha_at(k + 1);
            for n in g.interior() {
                let fm1 = f.value(n) - 1.0;
                forward.push((f.value(n + 1) - 1.0) * c.value(n + 1));
                backward.push(fm1 * b.value(n));
                diagonal.push(b.value(n + 1) + fm1 * fm1 * c.value(n) + shift);
            }
        }
    }
    Ok(SecondOrderOperator {
        level: k,
        grid: g,
        forward,
        backward,
        diagonal,
    })
}

/// Eigenvector of `H_k` tagged with its eigenvalue and ladder position.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: LevelSequence,
    pub level: usize,
    pub ladder_index: usize,
    /// `max |H x - lambda x| / max |x|` over the sound range.
    pub residual: f64,
}

fn relative_residual(chain: &ChainSpec, k: usize, x: &LevelSequence, lambda: f64) -> Result<f64> {
    let h = compose_hamiltonian(chain, k, OperatorSide::Lower)?;
    let r = h.residual(x, lambda)?;
    let scale = x.max_abs_interior().max(f64::MIN_POSITIVE);
    Ok(r.max_abs / scale)
}

/// Solves the lowering kernel `x(n+1) = (1 - f_p(n)) x(n)` forward from
/// `x(a) = 1` and normalizes to unit sup norm. Eigenvalue `alpha_p`.
///
/// An index with `f_p(n) = 1` zeroes everything past it; this is allowed
/// but logged, since the lowering operator loses injectivity there.
pub fn ground_state(chain: &ChainSpec, p: usize) -> Result<EigenPair> {
    chain.check_level(p)?;
    let g = chain.grid;
    let f = chain.level_data(p).f();
    let mut x = LevelSequence::zeros(p, g);
    x.set_value(g.left(), 1.0);
    let mut barrier: Option<i64> = None;
    for n in g.left()..=g.right() {
        let factor = 1.0 - f.value(n);
        if factor == 0.0 && barrier.is_none() {
            barrier = Some(n);
        }
        x.set_value(n + 1, factor * x.value(n));
    }
    if let Some(n) = barrier {
        log::warn!("ground state at level {p} vanishes past n = {n} (f = 1 barrier)");
    }
    // fill the left ghost by running the recursion backward when possible
    let ghost = g.left() - 1;
    let factor = 1.0 - f.value(ghost);
    if factor != 0.0 {
        let v = x.value(g.left()) / factor;
        if v.is_finite() {
            x.set_value(ghost, v);
        } else {
            x.invalidate_left_ghost();
        }
    } else {
        x.invalidate_left_ghost();
    }
    let scale = x.max_abs_interior();
    // x(a) = 1 guarantees a nonzero interior
    let mut normalized = x.clone();
    for n in g.extended() {
        normalized.set_value(n, x.value(n) / scale);
    }
    if !x.left_ghost_valid() {
        normalized.invalidate_left_ghost();
    }
    let lambda = chain.alpha_at(p);
    let residual = relative_residual(chain, p, &normalized, lambda)?;
    Ok(EigenPair {
        lambda,
        vector: normalized,
        level: p,
        ladder_index: 0,
        residual,
    })
}

/// Applies the raising steps `p+1, ..., k` to an eigenpair at level `p`.
/// The eigenvalue is carried unchanged; the ladder index grows by `k - p`.
pub fn raise_state(chain: &ChainSpec, pair: &EigenPair, k: usize) -> Result<EigenPair> {
    chain.check_level(k)?;
    let p = pair.level;
    if p > k {
        return Err(Error::LadderOrder { from: p, to: k });
    }
    let mut v = pair.vector.clone();
    for j in (p + 1)..=k {
        v = apply_creation(chain, j, &v)?;
    }
    let residual = relative_residual(chain, k, &v, pair.lambda)?;
    Ok(EigenPair {
        lambda: pair.lambda,
        vector: v,
        level: k,
        ladder_index: pair.ladder_index + (k - p),
        residual,
    })
}

/// Eigenpairs of `H_k` produced by the raising construction, ordered by the
/// ground level `p = 0..=k`.
#[derive(Clone, Debug)]
pub struct ChainEigens {
    pub pairs: Vec<EigenPair>,
    /// Ground-level index pairs with exactly equal eigenvalues.
    pub degenerate: Vec<(usize, usize)>,
}

fn solve_chain_eigens_with<M>(chain: &ChainSpec, k: usize, map: M) -> Result<ChainEigens>
where
    M: Fn(usize) -> Vec<Result<EigenPair>>,
{
    chain.check_level(k)?;
    let results = map(k + 1);
    let mut pairs = Vec::with_capacity(k + 1);
    for r in results {
        pairs.push(r?);
    }
    let tol = chain.tolerances().eigen;
    for pair in &pairs {
        if pair.residual > tol {
            return Err(Error::EigenResidual {
                level: pair.level,
                ladder: pair.ladder_index,
                residual: pair.residual,
                tol,
            });
        }
    }
    let mut degenerate = Vec::new();
    for i in 0..pairs.len() {
        for j in (i + 1)..pairs.len() {
            if pairs[i].lambda == pairs[j].lambda {
                degenerate.push((i, j));
            }
        }
    }
    if !degenerate.is_empty() {
        log::warn!("ladder at level {k} has {} duplicate eigenvalue pair(s)", degenerate.len());
    }
    Ok(ChainEigens { pairs, degenerate })
}

/// Builds the `k+1` ladder eigenpairs of `H_k`, one per ground level.
pub fn solve_chain_eigens(chain: &ChainSpec, k: usize) -> Result<ChainEigens> {
    solve_chain_eigens_with(chain, k, |count| {
        exec::map_indices(count, |p| ground_state(chain, p).and_then(|g| raise_state(chain, &g, k)))
    })
}

/// Sequential variant of [`solve_chain_eigens`].
pub fn solve_chain_eigens_seq(chain: &ChainSpec, k: usize) -> Result<ChainEigens> {
    solve_chain_eigens_with(chain, k, |count| {
        exec::map_indices_seq(count, |p| ground_state(chain, p).and_then(|g| raise_state(chain, &g, k)))
    })
}

/// Shared propagation of `(f_k, c_k)` from level-0 data through the ratios
/// of consecutive `b` sequences:
///
/// `f_k(n) - 1 = prod_i b_{k-i}(n-i+1)/b_{k-i+1}(n-i+1) * (f_0(n-k) - 1)`
/// and the reciprocal product on `c`. Level `k` of the output satisfies the
/// two transport conditions against level `k+1` by construction.
pub fn propagate_level_data(
    b_levels: &[SequenceSpec],
    f0: &SequenceSpec,
    c0: &SequenceSpec,
    grid: Grid,
) -> Result<Vec<(LevelSequence, LevelSequence)>> {
    let mut out = Vec::with_capacity(b_levels.len());
    for k in 0..b_levels.len() {
        let mut f_vals = Vec::with_capacity(grid.extended_len());
        let mut c_vals = Vec::with_capacity(grid.extended_len());
        for n in grid.extended() {
            let mut ratio_f = 1.0;
            let mut ratio_c = 1.0;
            for i in 1..=k {
                let m = n - i as i64 + 1;
                let num = b_levels[k - i].eval(m)?;
                let den = b_levels[k - i + 1].eval(m)?;
                if den == 0.0 || num == 0.0 {
                    return Err(Error::SingularRatio {
                        level: k,
                        index: n,
                        factor: i,
                    });
                }
                ratio_f *= num / den;
                ratio_c *= den / num;
            }
            f_vals.push(ratio_f * (f0.eval(n - k as i64)? - 1.0) + 1.0);
            c_vals.push(ratio_c * c0.eval(n - k as i64)?);
        }
        out.push((
            LevelSequence::from_values(k, grid, f_vals)?,
            LevelSequence::from_values(k, grid, c_vals)?,
        ));
    }
    Ok(out)
}
