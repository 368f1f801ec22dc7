//! Integer grids and level-attached sequences.
//!
//! Every sequence lives on the closed window `[a-1, b+1]`: the interior
//! `[a, b]` carries the contractual values, the two ghost cells house the
//! shifted boundary terms. Operators that vacate a ghost cell fill it with
//! zero and mark it invalid; only the interior is contractual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite integer interval `[a, b]` carrying all sequences of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    a: i64,
    b: i64,
}

impl Grid {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a < b {
            Ok(Grid { a, b })
        } else {
            Err(Error::InvalidGrid { a, b })
        }
    }

    pub fn left(&self) -> i64 {
        self.a
    }

    pub fn right(&self) -> i64 {
        self.b
    }

    /// Number of interior points `b - a + 1`.
    pub fn interior_len(&self) -> usize {
        (self.b - self.a + 1) as usize
    }

    /// Interior plus the two ghost cells.
    pub fn extended_len(&self) -> usize {
        self.interior_len() + 2
    }

    pub fn interior(&self) -> impl Iterator<Item = i64> {
        self.a..=self.b
    }

    pub fn extended(&self) -> impl Iterator<Item = i64> {
        (self.a - 1)..=(self.b + 1)
    }

    pub fn contains_extended(&self, n: i64) -> bool {
        n >= self.a - 1 && n <= self.b + 1
    }

    /// Storage index of `n` within the extended window.
    pub(crate) fn ext_index(&self, n: i64) -> usize {
        debug_assert!(self.contains_extended(n), "index {n} outside extended window");
        (n - (self.a - 1)) as usize
    }
}

/// Direction for shifts and differences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Real-valued sequence attached to chain level `k`, stored on `[a-1, b+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSequence {
    level: usize,
    grid: Grid,
    values: Vec<f64>,
    left_ghost_valid: bool,
    right_ghost_valid: bool,
}

impl LevelSequence {
    /// Builds a sequence from explicit values over the extended window.
    pub fn from_values(level: usize, grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.extended_len() {
            return Err(Error::LengthMismatch {
                expected: grid.extended_len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: grid.left() - 1 + i as i64,
                });
            }
        }
        Ok(LevelSequence {
            level,
            grid,
            values,
            left_ghost_valid: true,
            right_ghost_valid: true,
        })
    }

    /// Evaluates `f` over the extended window.
    pub fn from_fn(level: usize, grid: Grid, f: impl Fn(i64) -> f64) -> Result<Self> {
        Self::from_values(level, grid, grid.extended().map(f).collect())
    }

    pub fn constant(level: usize, grid: Grid, value: f64) -> Self {
        LevelSequence {
            level,
            grid,
            values: vec![value; grid.extended_len()],
            left_ghost_valid: true,
            right_ghost_valid: true,
        }
    }

    pub fn zeros(level: usize, grid: Grid) -> Self {
        Self::constant(level, grid, 0.0)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Value at `n`; panics outside `[a-1, b+1]`.
    pub fn value(&self, n: i64) -> f64 {
        self.values[self.grid.ext_index(n)]
    }

    pub(crate) fn set_value(&mut self, n: i64, v: f64) {
        let i = self.grid.ext_index(n);
        self.values[i] = v;
    }

    pub(crate) fn invalidate_left_ghost(&mut self) {
        self.left_ghost_valid = false;
        let i = self.grid.ext_index(self.grid.left() - 1);
        self.values[i] = 0.0;
    }

    pub(crate) fn invalidate_right_ghost(&mut self) {
        self.right_ghost_valid = false;
        let i = self.grid.ext_index(self.grid.right() + 1);
        self.values[i] = 0.0;
    }

    pub fn left_ghost_valid(&self) -> bool {
        self.left_ghost_valid
    }

    pub fn right_ghost_valid(&self) -> bool {
        self.right_ghost_valid
    }

    /// Interior slice, `n = a..=b`.
    pub fn interior_values(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.interior_values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: other.level,
            });
        }
        Ok(())
    }

    /// Shift `x(n) -> x(n +/- 1)`.
    ///
    /// Forward consumes the right ghost and vacates it in the result;
    /// backward mirrors this on the left.
    pub fn shift(&self, dir: Direction) -> Result<LevelSequence> {
        let g = self.grid;
        let mut out = LevelSequence::zeros(self.level, g);
        match dir {
            Direction::Forward => {
                if !self.right_ghost_valid {
                    return Err(Error::GhostInvalid { index: g.right() + 1 });
                }
                for n in (g.left() - 1)..=g.right() {
                    out.set_value(n, self.value(n + 1));
                }
                out.invalidate_right_ghost();
            }
            Direction::Backward => {
                if !self.left_ghost_valid {
                    return Err(Error::GhostInvalid { index: g.left() - 1 });
                }
                for n in g.left()..=(g.right() + 1) {
                    out.set_value(n, self.value(n - 1));
                }
                out.invalidate_left_ghost();
            }
        }
        Ok(out)
    }

    /// Forward difference `x(n+1) - x(n)` or backward difference `x(n) - x(n-1)`.
    pub fn difference(&self, dir: Direction) -> Result<LevelSequence> {
        let g = self.grid;
        let mut out = LevelSequence::zeros(self.level, g);
        match dir {
            Direction::Forward => {
                if !self.right_ghost_valid {
                    return Err(Error::GhostInvalid { index: g.right() + 1 });
                }
                for n in (g.left() - 1)..=g.right() {
                    out.set_value(n, self.value(n + 1) - self.value(n));
                }
                out.invalidate_right_ghost();
            }
            Direction::Backward => {
                if !self.left_ghost_valid {
                    return Err(Error::GhostInvalid { index: g.left() - 1 });
                }
                for n in g.left()..=(g.right() + 1) {
                    out.set_value(n, self.value(n) - self.value(n - 1));
                }
                out.invalidate_left_ghost();
            }
        }
        Ok(out)
    }

    /// Pointwise linear combination `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<LevelSequence> {
        self.require_same_shape(other)?;
        let mut out = self.clone();
        for i in 0..out.values.len() {
            out.values[i] = alpha * self.values[i] + beta * other.values[i];
        }
        out.left_ghost_valid = self.left_ghost_valid && other.left_ghost_valid;
        out.right_ghost_valid = self.right_ghost_valid && other.right_ghost_valid;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: i64, b: i64) -> Grid {
        Grid::new(a, b).unwrap()
    }

    #[test]
    fn grid_rejects_degenerate_interval() {
        assert!(Grid::new(3, 3).is_err());
        assert!(Grid::new(4, 1).is_err());
    }

    #[test]
    fn forward_shift_reads_the_next_entry() {
        // x(n) = n + 1 on the extended window of [0, 2]
        let x = LevelSequence::from_fn(0, grid(0, 2), |n| (n + 1) as f64).unwrap();
        let s = x.shift(Direction::Forward).unwrap();
        assert_eq!(s.value(0), 2.0);
        assert_eq!(s.value(2), 4.0);
        assert!(!s.right_ghost_valid());
    }

    #[test]
    fn shifting_zero_stays_zero() {
        let z = LevelSequence::zeros(1, grid(-2, 5));
        for dir in [Direction::Forward, Direction::Backward] {
            let s = z.shift(dir).unwrap();
            assert!(s.interior_values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn backward_shift_of_identity_drops_by_one() {
        // x(n) = n on [-1..4] (grid [0, 3]); S^- x (n) = n - 1 on [0, 3]
        let x = LevelSequence::from_fn(0, grid(0, 3), |n| n as f64).unwrap();
        let s = x.shift(Direction::Backward).unwrap();
        for n in 0..=3 {
            assert_eq!(s.value(n), (n - 1) as f64);
        }
    }

    #[test]
    fn difference_of_constant_vanishes() {
        let c = LevelSequence::constant(2, grid(0, 6), 7.5);
        for dir in [Direction::Forward, Direction::Backward] {
            let d = c.difference(dir).unwrap();
            assert!(d.interior_values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn forward_difference_of_squares() {
        let x = LevelSequence::from_fn(0, grid(0, 4), |n| (n * n) as f64).unwrap();
        let d = x.difference(Direction::Forward).unwrap();
        for n in 0..=4 {
            assert_eq!(d.value(n), (2 * n + 1) as f64);
        }
    }

    #[test]
    fn mixed_differences_commute_exactly() {
        let x = LevelSequence::from_fn(0, grid(0, 9), |n| ((n * 37 + 11) % 17) as f64 * 0.25).unwrap();
        let dn = x.difference(Direction::Forward).unwrap().difference(Direction::Backward).unwrap();
        let nd = x.difference(Direction::Backward).unwrap().difference(Direction::Forward).unwrap();
        for n in 0..=9 {
            assert_eq!(dn.value(n), nd.value(n));
        }
    }

    #[test]
    fn invalid_ghost_is_refused_when_consumed() {
        let x = LevelSequence::from_fn(0, grid(0, 3), |n| n as f64).unwrap();
        let s = x.shift(Direction::Forward).unwrap();
        assert!(matches!(s.shift(Direction::Forward), Err(Error::GhostInvalid { .. })));
        // but the untouched side still works
        assert!(s.shift(Direction::Backward).is_ok());
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut vals = vec![0.0; grid(0, 2).extended_len()];
        vals[2] = f64::NAN;
        assert!(matches!(
            LevelSequence::from_values(0, grid(0, 2), vals),
            Err(Error::NonFinite { index: 1 })
        ));
    }
}
