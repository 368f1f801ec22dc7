//! Construction, verification and spectral solution of factorization
//! chains of second-order linear difference operators on finite integer
//! grids.
//!
//! A chain couples levels of coefficient data `(b_k, c_k, f_k)` so that on
//! each level the second-order operator splits into a product of a
//! first-order lowering operator and its adjoint in two ways, shifted by
//! the constants `alpha_k`. Ground states of the lowering operators raise
//! into complete eigen-ladders; with `f = 0` and a quadratic profile the
//! eigenvectors are the classical discrete orthogonal polynomials. Every
//! construction is cross-checked: coupling conditions in cross-multiplied
//! form, adjointness under the weighted products, truncation certificates
//! at the grid ends, and an independent tridiagonal eigensolver on the
//! symmetrized operator.
//!
//! The `parallel` feature (default) runs the data-parallel loops through
//! rayon; sequential `_seq` variants of those entry points always exist.

pub mod chain;
pub mod error;
mod exec;
pub mod families;
pub mod grid;
pub mod oracle;
pub mod report;
pub mod sequence;
pub mod verify;
pub mod weight;

pub use chain::{
    apply_annihilation, apply_creation, apply_factored_lower, compose_hamiltonian, ground_state,
    propagate_level_data, raise_state, solve_chain_eigens, solve_chain_eigens_seq, ChainEigens,
    ChainSpec, ChainTolerances, EigenPair, Family, FaultTarget, FirstOrderOperator, LevelData,
    OperatorKind, OperatorSide, SecondOrderOperator,
};
pub use error::{Error, Result};
pub use families::{
    alpha_closed_form, alpha_table, build_example1, build_explicit, build_geometric,
    build_hypergeometric, classical_preset, example1_b_profile, generate_polynomials,
    geometric_closed_forms, hypergeometric_form, max_offdiagonal_rel, polynomial_gram,
    polynomial_gram_seq, ClassicalFamily, Example1Params, ExplicitParams, FamilyDiagnostics,
    GeometricParams, HypergeometricForm, HypergeometricParams,
};
pub use grid::{Direction, Grid, LevelSequence};
pub use oracle::{compare_spectra, realize_matrix, RealizedMatrix, SpectrumReport, TridiagonalMatrix};
pub use sequence::SequenceSpec;
pub use verify::{
    check_chain_conditions, dual_residual, factorization_residual, verify_adjointness,
    verify_adjointness_seq, verify_chain, AdjointnessReport, ChainVerification,
    ConditionResiduals, LevelVerification,
};
pub use weight::{inner_product, weighted_norm, BoundaryReport, WeightLevel};
