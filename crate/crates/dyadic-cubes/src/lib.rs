//! Dyadic cube systems on finite metric spaces.
//!
//! This crate builds nested families of "dyadic cubes" for a finite metric
//! space: one partition of the space per scale level, refining from a coarse
//! root down to singleton leaves, with every cube sandwiched between an inner
//! and an outer ball around its center. On top of the construction it decides
//! a converse question: given a subset `E`, can some system of this kind have
//! `E` as one of its cubes? The answer is characterized by interior
//! accessibility (plumpness) of `E` and of its complement, and both the
//! construction and the decision produce machine-checkable certificates.
//!
//! The main entry points are:
//!
//! * [`metric::FiniteMetricSpace`]: validated distance matrices, balls,
//!   doubling bounds.
//! * [`plumpness`]: plumpness checks at all radii or along a geometric scale
//!   ladder, with witness maps and counterexamples.
//! * [`nets`] and [`order`]: separated center sets per level and the parent
//!   relation linking consecutive levels.
//! * [`cubes`]: the cube systems themselves, with exhaustive verification.
//! * [`characterization`]: plumpness of every built cube, and the certified
//!   decision procedure for cube candidacy.

pub mod characterization;
pub mod cubes;
pub mod io;
pub mod json;
pub mod metric;
pub mod nets;
pub mod order;
pub mod plumpness;
pub mod set;

pub use characterization::{auto_params, certify_cube_candidate, cube_plumpness_params, verify_all_cubes_plump};
pub use cubes::{build_cube_system, locate, verify_cube_system, CubeParams, CubeSystem};
pub use metric::{validate_metric, FiniteMetricSpace};
pub use nets::{build_adapted_points, build_plain_points, verify_point_system, DyadicPointSystem, NetParams};
pub use order::{build_order, descendants, verify_order, ParentOrder};
pub use plumpness::{
    check_dplump, check_plump, dplump_to_plump, plump_to_dplump, weaken_plump_params, DPlumpParams,
    PlumpParams, PlumpnessVerdict,
};
pub use set::SubsetMask;

/// Caps the global thread pool used by the parallel verification passes.
/// Call once at startup; later calls have no effect and report `false`.
pub fn set_verification_threads(threads: Option<usize>) -> bool {
    match threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_ok(),
        _ => true,
    }
}
