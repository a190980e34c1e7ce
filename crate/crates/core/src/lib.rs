//! Exact-arithmetic Nielsen fixed point theory.
//!
//! Everything here is computed over the integers or the rationals, never
//! floating point: fixed point indices as determinant signs, twisted
//! conjugacy classes of finitely generated groups, Reidemeister traces and
//! Nielsen numbers, reductions under finite group actions, and the Fuller
//! transform machinery for periodic points. Torus endomorphisms serve as
//! the fully computable model on which every abstract operation can be
//! cross-checked by brute force.

pub mod equivariant;
pub mod fuller;
pub mod group;
pub mod index;
pub mod matrix;
pub mod torus;
pub mod trace;

mod error;

pub use equivariant::{
    assemble_equivariant_invariant, fuller_gap_report, gap_condition_report, invariant_vanishes,
    subgroup_conjugacy_classes, subgroup_conjugacy_classes_bounded, EquivariantInvariant,
    GapReport, SubgroupClass,
};
pub use error::{Error, Result};
pub use fuller::{
    conjecture_comparison, divisors, fuller_class_correspondence, periodic_obstruction_presentation,
    periodic_obstruction_torus, ConjectureComparison, FullerComponent, PeriodicObstruction,
};
pub use group::{
    reidemeister_classes, reidemeister_classes_with_rho, reidemeister_classes_with_words,
    twisted_conjugate, ClassId, ClassOutcome, ClassStructure, Endomorphism, ExtraRelations,
    FiniteGroupTable, GroupModel, GroupWord, ReidemeisterClassSet,
};
pub use index::{
    chain_jacobian, fuller_block_jacobian, fuller_determinant_identity, generic_index,
    iterate_index_invariance, DeterminantIdentity, IndexValue, JacobianChain,
};
pub use matrix::{smith_normal_form, IntMatrix, SmithDecomposition};
pub use torus::{
    torus_class_bijection_check, torus_fixed_points, torus_iterate, torus_trace, TorusFixedPoints,
    TorusMap,
};
pub use trace::{
    check_orbit_index_constancy, nielsen_number, reduce_trace, reidemeister_trace,
    trace_orbit_constancy, vanishing_equivalence, ClassAction, Exactness, FixedPointRecord,
    ReducedTrace, Trace,
};
