//! The radius inequalities as checkable computations on concrete operators.

pub mod certificate;
pub mod complexification;
pub mod corollaries;

pub use certificate::{
    build_certificate_thm1, default_t_grid, log_t_grid, lskf_test_points, verify_lskf, BoundSample, LskfCheck,
    Theorem1Certificate,
};
pub use complexification::{
    alpha_matrix, complexify, sign_pattern_max, verify_thm2_chain, vertex_objective, ComplexificationReport,
};
pub use corollaries::{
    certified_radii, certified_radii_with_grid, verify_corollaries, CertifiedRadii, CorollaryReport, InequalityCheck,
};
