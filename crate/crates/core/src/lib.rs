//! Riemann integration of locally band preserving functions on the atomic
//! f-algebra `R^A`.
//!
//! Elements of `R^A` are finite vectors; bands are coordinate subsets and band
//! projections zero out the complementary coordinates. On this carrier a
//! continuous function is locally band preserving exactly when it acts
//! coordinatewise, which is what [`LatticeFunction::coordinatewise`] builds.
//!
//! ```
//! use lattice_riemann::{integrate, Element, LatticeFunction, OrderInterval, ToleranceSchedule};
//!
//! let f = LatticeFunction::parse(&["t^2"], 2).unwrap();
//! let i = OrderInterval::new(Element::zero(2).unwrap(), Element::new(vec![1.0, 2.0]).unwrap()).unwrap();
//! let r = integrate(&f, &i, &ToleranceSchedule::default()).unwrap();
//! assert!((r.value.get(1) - 8.0 / 3.0).abs() < 1e-5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod expr;
pub mod function;
pub mod integrator;
pub mod lattice;
pub mod partition;

pub use calculus::{
    antiderivative, mvt_integral_solve, numeric_derivative, verify_by_parts, verify_ftc1,
    verify_ftc2, verify_ftc2_pairs, verify_mvt, verify_mvt_pairs, verify_substitution,
    Antiderivative, DerivativeEstimate, MvtSolution, SampleResidual, VerificationReport,
    VerifyOptions,
};
pub use error::{Error, Result};
pub use expr::{differentiate, eval_expr, parse, print_expr, Expr, Func};
pub use function::{
    continuity_modulus, extrema, lbp_check, ExtremaMethod, ExtremaPair, FunctionDescriptor,
    LatticeFunction, LbpVerdict, Monotonicity, ScalarKernel,
};
pub use integrator::{
    darboux_sums, integrate, integrate_with, riemann_sum, signed_integrate, split_integrate,
    staircase_partition, DarbouxSums, Execution, IntegralResult, ToleranceSchedule,
};
pub use lattice::{
    band_eq, band_leq, band_lt, totally_ordered_decomposition, totord, totord_lattice_polynomial,
    trichotomy, Band, BandDecomposition, Element, OrderInterval,
};
pub use partition::{Partition, TagRule, TaggedPartition};
