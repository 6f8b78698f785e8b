//! Exact symbolic engine for two-dimensional superintegrable systems with a
//! rational frequency/angle ratio `k = p/q`.
//!
//! The crate constructs ladder operators and symmetry operators for five
//! families of systems, realizes them as one-variable difference operators
//! with exact rational-function coefficients, and verifies the full set of
//! structure equations (commutators, anticommutators, symmetrized cubes and
//! Casimir relations) as exact operator identities.  A numerics layer
//! cross-checks the underlying special-function recurrences in floating
//! point, and a representation layer instantiates finite-dimensional models
//! with exact rational matrices.
//!
//! Module map:
//! - [`exactalg`]: arbitrary-precision rationals, multivariate polynomials,
//!   normalized rational functions.
//! - [`shiftops`]: difference operators in one index variable (shift terms
//!   with rational-function coefficients) and their algebra.
//! - [`systems`]: the five system families, their one-variable models and
//!   ladder-operator constructions.
//! - [`structure`]: ladder products, closure polynomials, structure-equation
//!   verification, the extra odd-order symmetry, and the coupling/energy
//!   exchange map to the deformed Coulomb family.
//! - [`reps`]: finite-dimensional representations on bounded label grids.
//! - [`numerics`]: floating-point checks of recurrences, differential
//!   equations, Wronskians and ladder compositions.

pub mod exactalg;
pub mod numerics;
pub mod reps;
pub mod shiftops;
pub mod structure;
pub mod systems;
