//! Evaluable sequence descriptions for chain builders.
//!
//! Level-`k` data sampled at the ghost cell `a-1` pulls the generating
//! sequences at `a-1-k`, outside any fixed storage window. Builders
//! therefore take sequences in an evaluable form: polynomial coefficients,
//! a constant, or an explicit table that must cover every index asked for.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, LevelSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceSpec {
    /// Constant sequence.
    Constant(f64),
    /// Polynomial in `n`, coefficients from constant term upward.
    Poly(Vec<f64>),
    /// Explicit values for `n = start, start+1, ...`; out-of-range is an error.
    Table { start: i64, values: Vec<f64> },
}

impl SequenceSpec {
    pub fn eval(&self, n: i64) -> Result<f64> {
        match self {
            SequenceSpec::Constant(v) => Ok(*v),
            SequenceSpec::Poly(coeffs) => {
                let x = n as f64;
                Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            }
            SequenceSpec::Table { start, values } => {
                let end = start + values.len() as i64 - 1;
                if n < *start || n > end {
                    Err(Error::TableOutOfRange {
                        index: n,
                        start: *start,
                        end,
                    })
                } else {
                    Ok(values[(n - start) as usize])
                }
            }
        }
    }

    /// Samples the sequence over the extended window of `grid` at `level`.
    pub fn sample(&self, level: usize, grid: Grid) -> Result<LevelSequence> {
        let mut values = Vec::with_capacity(grid.extended_len());
        for n in grid.extended() {
            values.push(self.eval(n)?);
        }
        LevelSequence::from_values(level, grid, values)
    }

    /// Same sequence scaled by a constant factor.
    pub fn scaled(&self, factor: f64) -> SequenceSpec {
        match self {
            SequenceSpec::Constant(v) => SequenceSpec::Constant(factor * v),
            SequenceSpec::Poly(coeffs) => {
                SequenceSpec::Poly(coeffs.iter().map(|c| factor * c).collect())
            }
            SequenceSpec::Table { start, values } => SequenceSpec::Table {
                start: *start,
                values: values.iter().map(|v| factor * v).collect(),
            },
        }
    }
}
