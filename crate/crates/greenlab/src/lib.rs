//! greenlab: a numerical laboratory for the pluripotential dynamics of
//! holomorphic endomorphisms of complex projective space and of regular
//! polynomial automorphisms of affine space.
//!
//! The crate computes Green functions by certified escape-rate telescoping,
//! normalized pull-back potentials of hypersurfaces, Lelong-number estimates
//! by sup-over-shrinking-balls regression, backward-orbit measures with exact
//! multiplicity accounting, totally invariant coordinate subspaces, and
//! derivative-contraction probes along orbits.  Everything is deterministic:
//! all randomness flows through an explicit seeded counter-based generator,
//! and all reductions are fixed-shape, so results are independent of the
//! worker count.

pub mod contraction;
pub mod equidist;
pub mod experiments;
pub mod green;
pub mod invariant_sets;
pub mod lelong;
pub mod poly;
pub mod projective;
pub mod pullback;
pub mod rng;
pub mod roots;
mod util;

pub use contraction::{
    orbit_inradius_estimate, volume_image_probe, ContractionProbeReport, ContractionRow,
    VolumeProbeReport, VolumeProbeRow,
};
pub use equidist::{
    backward_orbit_measure, potential_residual, preimages, EmpiricalMeasure,
    PotentialResidualReport, PreimageSolverSpec,
};
pub use experiments::{
    run_experiment, seed_override_from_env, ExperimentConfig, ExperimentKind, MapSpec,
    RunOptions, RunReport, SEED_ENV_VAR,
};
pub use green::{green_lift, green_potential, henon_green_plus, GreenValue, OrbitAccumulator};
pub use invariant_sets::{
    check_total_invariance, enumerate_invariant_coordinate_subspaces,
    restricted_topological_degree, CoordinateSubspace, InvarianceMethod, InvarianceReport,
    RestrictedDegreeReport,
};
pub use lelong::{lelong_estimate, lelong_pullback_comparison, LelongComparison, LelongEstimate};
pub use poly::{
    eval_map, eval_poly, jacobian_affine, jacobian_lift, make_henon, make_perturbed_power_map,
    make_power_map, make_ueda_map, AffinePolynomial, HomogeneousPolynomial, LiftedEndomorphism,
    Monomial, RegularAutomorphism,
};
pub use projective::{
    fs_distance, normalize, sample_fs_ball, sample_fs_uniform, BallSample, ProjectivePoint,
};
pub use pullback::{
    convergence_report, henon_pullback_report, invariance_residual, modulo_potential,
    pullback_potential, AffineRegion, ConvergenceReport, ConvergenceRow, HypersurfaceCurrent,
    InvarianceResidualReport, NonEscapingSummary, PullbackPotentialSample,
};
pub use rng::SplitMix64;

/// Magnitudes of `log|·|` are clipped at this floor so that exact zeros on
/// analytic sets produce a finite flagged value instead of `-inf`.
pub const LOG_CLIP_FLOOR: f64 = -700.0;

/// Errors produced across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("zero vector cannot represent a projective point")]
    ZeroVector,

    #[error("map rejected as degenerate: min sphere norm {min_norm:.3e} < 1e-3 at sample {sample:?}")]
    Degenerate {
        min_norm: f64,
        sample: Vec<num_complex::Complex64>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config field `{field}` invalid: {reason}")]
    Validation { field: String, reason: String },

    #[error("root solver failed: {0}")]
    Solver(String),

    #[error("internal invariant violation: {0}")]
    Invariant(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
