//! Builders for the solved chain families: the level-shift family with a
//! free profile (`example1`), its `f = 0` specialization generating the
//! classical discrete orthogonal polynomials, the geometrically scaled
//! family, and the reconstruction of explicit stencil coefficients.

mod alpha;
mod example1;
mod explicit;
mod geometric;
mod hypergeometric;
mod presets;

pub use alpha::{alpha_closed_form, alpha_table};
pub use example1::{build_example1, example1_b_profile, Example1Params};
pub use explicit::{build_explicit, ExplicitParams};
pub use geometric::{build_geometric, geometric_closed_forms, GeometricParams};
pub use hypergeometric::{
    build_hypergeometric, generate_polynomials, hypergeometric_form, max_offdiagonal_rel,
    polynomial_gram, polynomial_gram_seq, HypergeometricForm, HypergeometricParams,
};
pub use presets::{classical_preset, ClassicalFamily};

/// Internal consistency data a builder leaves behind: anchors and tables
/// that can be recomputed from the chain and must match their recursions.
#[derive(Clone, Debug, Default)]
pub struct FamilyDiagnostics {
    /// Per-level anchor constants of the diagonal balance (level-shift
    /// families). Empty for the scaled family.
    pub g_anchors: Vec<f64>,
    /// Quadratic profile values over the extended window (level-shift
    /// families).
    pub quad_profile: Vec<f64>,
    /// Per-level scale-recursion tables over the extended window
    /// (scaled family).
    pub r_tables: Vec<Vec<f64>>,
    /// Per-level consistency tables over the extended window
    /// (scaled family).
    pub s_tables: Vec<Vec<f64>>,
}
