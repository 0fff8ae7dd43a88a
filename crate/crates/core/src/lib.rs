//! Numerics for infinity harmonic maps between chart-represented Riemannian
//! manifolds.
//!
//! The crate computes energy densities, infinity Laplacians, tension fields,
//! and p-Laplacians of smooth maps; classifies maps against the horizontally
//! weakly conformal / horizontally homothetic / infinity-harmonic-morphism
//! chain; solves the rotationally symmetric profile reductions into spheres;
//! and verifies the model-space (sphere and hyperbolic) equations obtained by
//! conformal change.
//!
//! Everything is built on one engine: second-order forward-mode jets
//! ([`jet::Jet2`]), which deliver exact gradients and Hessians of map
//! components and metric entries in a single pass.

pub mod catalog;
pub mod conformal;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod operators;
pub mod reductions;

pub use catalog::{
    CatalogEntry, EnergyExpectation, IdentityCheck, build_direct_sum, build_eikonal_tuple,
    build_line_map, build_product_map, catalog_entries, catalog_get, catalog_ids,
    check_identity_map,
};
pub use conformal::{
    ConformalFactor, conformal_inf_laplacian, conformal_inf_laplacian_direct,
    hyperbolic_equation_residual, sphere_equation_residual, sphere_restriction_residual,
    sphere_restriction_via_chart,
};
pub use error::{Error, JetError, Result};
pub use expr::Expr;
pub use geometry::{
    Chart, DEFAULT_RANK_TOL, Metric, MetricPoint, PointFrame, SmoothMap, christoffel,
    differential_frame, metric_gradient, metric_gradient_norm_sq,
};
pub use jet::Jet2;
pub use operators::{
    Classification, MapReport, Verdict, classify, classify_with_reports, energy_density,
    inf_laplacian_function, inf_laplacian_map, linear_morphism_check, morphism_blowup_probe,
    p_laplacian, pullback_energy_check, tension_field,
};
pub use reductions::{
    ProfileSign, ReductionKind, ReductionSolution, VerifySummary, cylinder_constant,
    cylinder_kink, cylinder_pendulum, equator_solution, reconstruct_and_verify,
    solve_ball_profile,
};
