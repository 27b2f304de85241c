//! Central numerical tolerances.
//!
//! Everything scale-sensitive in the crate routes through these constants so
//! the test suite and the CLI agree on what "passes" means.

/// Relative symmetry defect accepted when ingesting a shape matrix; anything
/// worse is rejected instead of silently symmetrized.
pub const SYMMETRY_REL: f64 = 1e-12;

/// Relative residual allowed for the pure matrix-algebra identities
/// (recursion vs. explicit sum, commutation, trace formulas).
pub const ALGEBRA_REL: f64 = 1e-12;

/// Relative bound for the Cayley–Hamilton degeneracy `P_n = 0`; the recursion
/// loses a couple of digits over the plain identities.
pub const CAYLEY_HAMILTON_REL: f64 = 1e-10;

/// Absolute defect allowed in the ambient quadric constraint `<x,x> = c`.
pub const CONSTRAINT_ABS: f64 = 1e-10;

/// Relative agreement expected of derivative cross-checks at chart level.
pub const DERIV_REL: f64 = 1e-6;

/// Relative dual-path agreement for `L_k` applied to the position vector.
pub const LK_POSITION_REL: f64 = 1e-5;

/// Relative dual-path agreement for `L_k` applied to the Gauss map (one more
/// derivative level than the position check, hence the looser bound).
pub const LK_GAUSS_REL: f64 = 1e-4;

/// Default classification tolerance.
pub const CLASS_DEFAULT: f64 = 1e-4;

/// Minimum gap separating distinct principal-curvature clusters.
pub const CURVATURE_GAP: f64 = 1e-3;

/// Bound on the normalized self-adjointness defect of fitted operators.
pub const SELFADJOINT_DEFECT: f64 = 1e-6;

/// Entrywise match required between fitted and predicted `(A, b)`,
/// relative to `1 + ||A||`.
pub const FIT_MATCH_REL: f64 = 1e-4;

/// Quadratic shape-relation defect for isoparametric products.
pub const QUADRATIC_DEFECT: f64 = 1e-8;

/// Bound on the pointwise Weingarten-type and decomposition residuals tying
/// fitted constants to sampled geometry.
pub const STRUCTURAL_REL: f64 = 1e-4;

/// Allowed spread of the slice constant `<b,x> - c_k H_k` across samples.
pub const SLICE_CONSTANT_STD: f64 = 1e-6;

/// Base step for first-order central differences (scaled by `max(1, |u|)`).
pub const STEP_FIRST: f64 = 1e-4;

/// Base step for second-order central differences.
pub const STEP_SECOND: f64 = 1e-3;

/// Relative singular-value cutoff used for rank decisions in least squares.
pub const RANK_REL: f64 = 1e-10;

/// Condition-number ceiling for the induced metric before a chart is
/// declared ill-conditioned.
pub const COND_LIMIT: f64 = 1e12;
