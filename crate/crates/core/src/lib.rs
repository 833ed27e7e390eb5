//! Exact-arithmetic solver for disjoint bilinear programs whose second
//! feasible set is a "perfect" polytope (no redundant facets, bounded with
//! nonempty interior, every rank-m subsystem pinning a vertex, every vertex
//! simple).
//!
//! The crate is organized in layers:
//!
//! * [`exact`] — arbitrary-precision rationals, dense linear algebra and
//!   continued-fraction rational recovery. Nothing here ever rounds.
//! * [`lp`] — an exact primal simplex with Bland's rule, explicit tableaus
//!   and substitution-verified certificates.
//! * [`instance`] — the problem type, perfect-polytope validation, Farkas
//!   redundancy classification, vertex enumeration and encoding-length
//!   bounds.
//! * [`reductions`] — boolean feasibility, big-M boolean optimization and
//!   piecewise-linear concave programs rewritten as bilinear instances.
//! * [`criterion`] — the membership criterion: decides `Y ⊄ Y_h` from a
//!   basic feasible solution of one structured equality system.
//! * [`solver`] — bisection on the level parameter with exact rational
//!   recovery of the optimum.
//! * [`oracle`] — independent brute-force ground truth by vertex
//!   enumeration, used to confirm or falsify every solver verdict.
//! * [`harness`] — seeded randomized campaigns comparing solver and oracle,
//!   with reproducer files for every disagreement.
//! * [`cli`] — the `dbp` command-line interface.

pub mod cli;
pub mod criterion;
pub mod exact;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod reductions;
pub mod solver;

pub use exact::{Matrix, Rational};

