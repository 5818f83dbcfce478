//! Support-function geometry for random convex hulls.
//!
//! Everything in this crate works through support functions: a convex body is
//! described analytically, the convex hull of a sample is evaluated as the
//! maximum of dot products over its points, and distances between the two are
//! suprema (or L^p norms) of support-function differences over the unit
//! sphere. No facet of a sampled hull is ever enumerated.
//!
//! The crate is `no_std` with `alloc`. IO, the experiment harness and the CLI
//! live in the companion `randhull` crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod hull;
pub mod nets;
pub mod quadrature;
pub mod refine;
pub mod rng;
pub mod samplers;
pub mod vector;

pub use bounds::{
    check_class_membership, class_params_boundary, class_params_smooth,
    deviation_bound, fit_class_constant, rate_exponent, ClassParams, DeviationBound,
    MembershipOptions, MembershipReport, RateFamily,
};
pub use error::{Error, Result};
pub use estimators::{
    d_l_estimate, d_l_estimate_on_directions, functional_s, functional_t, hausdorff_to_body,
    hull_support, lp_error, sup_norm_bracket, DistanceResult, Norm, SphereQuadrature,
};
pub use geometry::{
    ball_volume, bump_eta, bump_profile, c_alpha, c_alpha_grid, cap_area_sphere,
    cap_volume_ball, polar_support_identity_check, sphere_area, BodySpec, Direction,
    SupportFunction,
};
pub use hull::HullSupport;
pub use nets::{build_net, certified_sup_deficit, decompose, Decomposition, NetOptions, SphereNet};
pub use refine::{refine_sup_deficit, RefineOptions, SupBracket};
pub use samplers::{empirical_cap_probability, sample, sample_with_rng, Mode, SampleCloud};
