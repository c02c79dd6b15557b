//! Exact finite-n moments of secular coefficients and cycle counts, each
//! paired with a brute-force enumeration.

mod delta;
mod fkg;
mod poly;
mod secular_sq;
mod targets;

pub use delta::{
    delta_bruteforce, delta_by_distribution, delta_case, delta_closed_form, delta_suite, DeltaCase,
    DeltaReport, SubsetPair, BRUTEFORCE_MAX_SIZE, DISTRIBUTION_MAX_N,
};
pub use fkg::{
    cycle_digraph, fkg_bound_check, fkg_suite, small_cycles, FkgReport, FkgSuiteReport,
    FKG_MAX_UNION_EDGES, FKG_MAX_VERTICES,
};
pub use poly::PolynomialInP;
pub use secular_sq::{
    deltak_suite, expected_sq_bruteforce, expected_sq_collapsed, expected_sq_secular,
    expected_sq_secular_at, tightness_bound_check, BracketVariant, IdentityReport, TightnessReport,
    TightnessRow,
};
pub use targets::{
    loopsoup_by_vertex_sets, loopsoup_direct, moment_targets, MomentTarget, TargetValue,
    LOOPSOUP_DIRECT_MAX_N, LOOPSOUP_MAX_WEIGHT,
};
