//! Config-driven experiment runner: the engine behind the `greenlab` binary.
//!
//! An experiment is described by one JSON config file and produces, inside
//! one output directory, CSV tables (plus a portable graymap raster for grid
//! experiments) and a `manifest.json` that echoes the config, the effective
//! seed, and the certified constants the run relied on — enough to reproduce
//! every number in the tables.
//!
//! # Config format
//!
//! ```json
//! {
//!   "experiment": "lelong",
//!   "map": { "family": "power", "k": 2, "d": 2 },
//!   "params": {
//!     "hypersurface": { "coordinate": 0 },
//!     "center": [[0.0, 0.0], [1.0, 0.0], [0.3, 0.0]],
//!     "r_max": 0.1,
//!     "levels": 6,
//!     "samples_per_radius": 2000
//!   },
//!   "seed": 7,
//!   "out": "runs/lelong-demo"
//! }
//! ```
//!
//! `experiment` selects the runner, `params` carries its inputs (see the
//! `*Params` structs for the exact fields and defaults), `seed` drives all
//! sampling, and the optional `out` names a default output directory.
//! Complex scalars are `[re, im]` pairs; points are lists of such pairs.
//! The `map` block is required for every experiment except the two Hénon
//! ones, which define their map through `params.a` and `params.c`.
//!
//! Map families: `power` (`z_i ↦ z_i^d`), `perturbed-power` (power plus
//! `epsilon` times seeded dense noise), `symmetric-product` (the map of
//! `P^k` induced by a one-variable polynomial or rational map, ascending
//! coefficients), and `custom` (explicit homogeneous components in the
//! [`text`] format).
//!
//! Every config is validated against the target computation's preconditions
//! before any computation starts; a violation is reported as
//! [`Error::Validation`] naming the offending field path (for example
//! `lelong.r_max`).  Numerical degeneracies discovered *during* a run (orbits
//! that never certify escape, all-clipped potentials, floored differential
//! steps) are not errors: the run completes and records them as flags in the
//! manifest.
//!
//! Outputs are deterministic byte-for-byte: reruns with the same config and
//! seed reproduce every CSV and raster exactly, independent of the worker
//! count.  The manifest (which records the wall time) is the only file that
//! may differ between reruns.

mod emit;
mod runners;
pub mod text;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::green::{DEFAULT_N_MAX, DEFAULT_TOL};
use crate::poly::{
    make_henon, make_perturbed_power_map, make_power_map, make_ueda_map, make_ueda_map_rational,
    LiftedEndomorphism, RegularAutomorphism,
};
use crate::projective::{normalize, ProjectivePoint};
use crate::pullback::{AffineRegion, HypersurfaceCurrent};
use crate::{Error, Result};
use num_complex::Complex64;

pub use emit::{fmt_f64, GrayRaster, Table};

/// Environment variable that overrides the config's seed when set.
pub const SEED_ENV_VAR: &str = "GREENLAB_SEED";

/// The experiments the runner knows how to execute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Green potential over a 2-D affine-chart grid (CSV + raster).
    GreenGrid,
    /// Decay of normalized pull-back potentials of a hypersurface.
    PullbackConverge,
    /// Lelong-number estimate of a pulled-back potential at a point.
    Lelong,
    /// Normalized backward-orbit measure of a point, plus potential tests.
    BackwardSample,
    /// Classification of coordinate subspaces by total invariance.
    InvarianceCheck,
    /// Derivative-contraction probe along one orbit.
    ContractionProbe,
    /// Forward Green function of a Hénon map on sampled affine points.
    HenonGreen,
    /// Pull-back statistic of an affine curve under a Hénon map.
    HenonPullback,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::GreenGrid,
        ExperimentKind::PullbackConverge,
        ExperimentKind::Lelong,
        ExperimentKind::BackwardSample,
        ExperimentKind::InvarianceCheck,
        ExperimentKind::ContractionProbe,
        ExperimentKind::HenonGreen,
        ExperimentKind::HenonPullback,
    ];

    /// The kebab-case name used in configs, on the command line, and as the
    /// stem of the output files.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GreenGrid => "green-grid",
            ExperimentKind::PullbackConverge => "pullback-converge",
            ExperimentKind::Lelong => "lelong",
            ExperimentKind::BackwardSample => "backward-sample",
            ExperimentKind::InvarianceCheck => "invariance-check",
            ExperimentKind::ContractionProbe => "contraction-probe",
            ExperimentKind::HenonGreen => "henon-green",
            ExperimentKind::HenonPullback => "henon-pullback",
        }
    }

    pub fn parse(name: &str) -> Option<ExperimentKind> {
        ExperimentKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Whether the config must carry a top-level `map` block.
    fn needs_map(self) -> bool {
        !matches!(
            self,
            ExperimentKind::HenonGreen | ExperimentKind::HenonPullback
        )
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How to build the endomorphism of `P^k` an experiment acts on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MapSpec {
    /// `z_i ↦ z_i^d` on `P^k`.
    Power { k: usize, d: u32 },
    /// Power map plus `epsilon` times dense degree-`d` noise with
    /// coefficients drawn by the seeded generator.
    PerturbedPower {
        k: usize,
        d: u32,
        epsilon: f64,
        #[serde(default)]
        perturbation_seed: u64,
    },
    /// Endomorphism of `P^k` induced on symmetric products by a one-variable
    /// polynomial (or rational map `numerator/denominator`); coefficients
    /// ascending, `[re, im]` pairs.
    SymmetricProduct {
        k: usize,
        numerator: Vec<[f64; 2]>,
        #[serde(default)]
        denominator: Vec<[f64; 2]>,
    },
    /// Explicit homogeneous components in the [`text`] format, one entry per
    /// component; nondegeneracy is certified on construction.
    Custom { components: Vec<String> },
}

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn cx_vec(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&p| cx(p)).collect()
}

fn all_finite(v: &[[f64; 2]]) -> bool {
    v.iter().all(|p| p[0].is_finite() && p[1].is_finite())
}

impl MapSpec {
    /// Build the endomorphism, converting construction failures into
    /// validation errors on the `map` block.
    pub fn build(&self) -> Result<LiftedEndomorphism> {
        let reject = |field: &str, reason: String| Error::Validation {
            field: field.to_string(),
            reason,
        };
        match self {
            MapSpec::Power { k, d } => {
                make_power_map(*k, *d).map_err(|e| reject("map", e.to_string()))
            }
            MapSpec::PerturbedPower {
                k,
                d,
                epsilon,
                perturbation_seed,
            } => {
                if !(epsilon.is_finite() && *epsilon >= 0.0) {
                    return Err(reject(
                        "map.epsilon",
                        format!("must be finite and nonnegative, got {epsilon}"),
                    ));
                }
                make_perturbed_power_map(*k, *d, *epsilon, *perturbation_seed)
                    .map_err(|e| reject("map", e.to_string()))
            }
            MapSpec::SymmetricProduct {
                k,
                numerator,
                denominator,
            } => {
                if numerator.is_empty() || !all_finite(numerator) {
                    return Err(reject("map.numerator", "coefficients must be finite".into()));
                }
                if !all_finite(denominator) {
                    return Err(reject(
                        "map.denominator",
                        "coefficients must be finite".into(),
                    ));
                }
                let num = cx_vec(numerator);
                let result = if denominator.is_empty() {
                    make_ueda_map(&num, *k)
                } else {
                    make_ueda_map_rational(&num, &cx_vec(denominator), *k)
                };
                result.map_err(|e| reject("map", e.to_string()))
            }
            MapSpec::Custom { components } => {
                text::parse_endomorphism(components).map_err(|e| reject("map", e.to_string()))
            }
        }
    }
}

/// Which preimage solver backs backward-orbit expansion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolverChoice {
    /// Pick from the map: the root solver on `P^1`, coordinatewise roots for
    /// monomial maps, product unsymmetrization for symmetric-product maps.
    #[default]
    Auto,
    /// Roots of the associated binary form (`k = 1` only).
    Univariate,
    /// Coordinatewise d-th roots (single-monomial components only).
    PowerMap,
    /// Unsymmetrize, pull back on `P^1`, re-symmetrize; the coefficients
    /// (ascending, `[re, im]`) must reproduce the map.
    SymmetricProduct {
        numerator: Vec<[f64; 2]>,
        #[serde(default)]
        denominator: Vec<[f64; 2]>,
    },
}

/// A hypersurface given either as a coordinate hyperplane index or as a
/// homogeneous polynomial in the [`text`] format (exactly one of the two).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
}

impl HypersurfaceSpec {
    fn build(&self, k: usize, kind: ExperimentKind) -> Result<HypersurfaceCurrent> {
        match (self.coordinate, &self.polynomial) {
            (Some(i), None) => HypersurfaceCurrent::coordinate_hyperplane(k, i)
                .map_err(|e| invalid(kind, "hypersurface.coordinate", e)),
            (None, Some(source)) => {
                let poly = text::parse_homogeneous_polynomial(source, k + 1)
                    .map_err(|e| invalid(kind, "hypersurface.polynomial", e))?;
                HypersurfaceCurrent::new(poly)
                    .map_err(|e| invalid(kind, "hypersurface.polynomial", e))
            }
            _ => Err(invalid(
                kind,
                "hypersurface",
                "give exactly one of `coordinate` or `polynomial`",
            )),
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

fn default_true() -> bool {
    true
}

/// Parameters of the `green-grid` experiment: the Green potential sampled
/// over an inclusive `nx × ny` grid in one affine chart.  The grid varies
/// the first chart coordinate over `[x_min, x_max] × [y_min, y_max]` (real
/// and imaginary part); for `k ≥ 2` the remaining `k − 1` chart coordinates
/// are fixed to `slice`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenGridParams {
    pub chart: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub slice: Vec<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Also write a grayscale raster of the grid.
    #[serde(default = "default_true")]
    pub raster: bool,
}

/// Parameters of the `pullback-converge` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackConvergeParams {
    pub hypersurface: HypersurfaceSpec,
    /// Pull-back depths, strictly increasing.
    pub n_list: Vec<usize>,
    pub sample_count: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// Parameters of the `lelong` experiment: sup of the depth-`depth`
/// normalized pull-back potential over shrinking balls at `center`,
/// regressed against `log r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LelongParams {
    pub hypersurface: HypersurfaceSpec,
    /// Homogeneous coordinates of the probe point, `k + 1` pairs.
    pub center: Vec<[f64; 2]>,
    /// Pull-back depth of the potential (0 probes the hypersurface itself).
    #[serde(default)]
    pub depth: usize,
    pub r_max: f64,
    pub levels: usize,
    pub samples_per_radius: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// Parameters of the `backward-sample` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackwardSampleParams {
    /// Homogeneous coordinates of the pulled-back point, `k + 1` pairs.
    pub a: Vec<[f64; 2]>,
    /// Backward depth.
    pub n: usize,
    /// Atom cap; deeper levels are resampled down to this size.
    pub max_atoms: usize,
    #[serde(default)]
    pub solver: SolverChoice,
    /// Affine test values `t` (chart `z1/z0`) for the potential comparison;
    /// used on `P^1` only.
    #[serde(default)]
    pub test_points: Vec<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// Parameters of the `invariance-check` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceCheckParams {
    /// Largest codimension to enumerate (default: `k`, everything proper).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_codim: Option<usize>,
    /// Sample budget per subspace for maps without exact bookkeeping.
    pub sample_count: usize,
    /// When positive, also count preimages of this many generic points on
    /// each totally invariant subspace (writes `restricted-degree.csv`).
    #[serde(default)]
    pub restricted_degree_trials: usize,
}

/// Parameters of the `contraction-probe` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionProbeParams {
    /// Homogeneous coordinates of the orbit start, `k + 1` pairs.
    pub start: Vec<[f64; 2]>,
    /// Source ball radius in `(0, 0.25)`.
    pub r: f64,
    /// Orbit length, at most 25.
    pub n_max: usize,
}

/// Parameters of the `henon-green` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HenonGreenParams {
    /// Hénon parameters of `(x, y) ↦ (y, y² + c − a·x)`.
    pub a: [f64; 2],
    pub c: [f64; 2],
    pub region: AffineRegion,
    pub sample_count: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

/// Parameters of the `henon-pullback` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HenonPullbackParams {
    pub a: [f64; 2],
    pub c: [f64; 2],
    /// Affine curve `{Q(x, y) = 0}` in the [`text`] format (variables
    /// `z0 = x`, `z1 = y`), nonconstant.
    pub q: String,
    /// Pull-back depths, strictly increasing.
    pub n_list: Vec<usize>,
    pub region: AffineRegion,
    pub sample_count: usize,
}

/// The per-experiment parameter block of a parsed config.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    GreenGrid(GreenGridParams),
    PullbackConverge(PullbackConvergeParams),
    Lelong(LelongParams),
    BackwardSample(BackwardSampleParams),
    InvarianceCheck(InvarianceCheckParams),
    ContractionProbe(ContractionProbeParams),
    HenonGreen(HenonGreenParams),
    HenonPullback(HenonPullbackParams),
}

impl Params {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Params::GreenGrid(_) => ExperimentKind::GreenGrid,
            Params::PullbackConverge(_) => ExperimentKind::PullbackConverge,
            Params::Lelong(_) => ExperimentKind::Lelong,
            Params::BackwardSample(_) => ExperimentKind::BackwardSample,
            Params::InvarianceCheck(_) => ExperimentKind::InvarianceCheck,
            Params::ContractionProbe(_) => ExperimentKind::ContractionProbe,
            Params::HenonGreen(_) => ExperimentKind::HenonGreen,
            Params::HenonPullback(_) => ExperimentKind::HenonPullback,
        }
    }

    fn from_value(kind: ExperimentKind, value: Value) -> Result<Params> {
        if value.is_null() {
            return Err(Error::Validation {
                field: "params".into(),
                reason: format!("experiment `{kind}` needs a params object"),
            });
        }
        let wrap = |e: serde_json::Error| Error::Validation {
            field: format!("{kind}.params"),
            reason: e.to_string(),
        };
        Ok(match kind {
            ExperimentKind::GreenGrid => {
                Params::GreenGrid(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::PullbackConverge => {
                Params::PullbackConverge(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::Lelong => Params::Lelong(serde_json::from_value(value).map_err(wrap)?),
            ExperimentKind::BackwardSample => {
                Params::BackwardSample(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::InvarianceCheck => {
                Params::InvarianceCheck(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::ContractionProbe => {
                Params::ContractionProbe(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::HenonGreen => {
                Params::HenonGreen(serde_json::from_value(value).map_err(wrap)?)
            }
            ExperimentKind::HenonPullback => {
                Params::HenonPullback(serde_json::from_value(value).map_err(wrap)?)
            }
        })
    }

    fn to_value(&self) -> Result<Value> {
        let v = match self {
            Params::GreenGrid(p) => serde_json::to_value(p)?,
            Params::PullbackConverge(p) => serde_json::to_value(p)?,
            Params::Lelong(p) => serde_json::to_value(p)?,
            Params::BackwardSample(p) => serde_json::to_value(p)?,
            Params::InvarianceCheck(p) => serde_json::to_value(p)?,
            Params::ContractionProbe(p) => serde_json::to_value(p)?,
            Params::HenonGreen(p) => serde_json::to_value(p)?,
            Params::HenonPullback(p) => serde_json::to_value(p)?,
        };
        Ok(v)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    #[serde(default)]
    map: Option<Value>,
    #[serde(default)]
    params: Option<Value>,
    seed: u64,
    #[serde(default)]
    out: Option<String>,
}

/// One fully parsed experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Present exactly when the experiment acts through an endomorphism of
    /// `P^k` (everything except the Hénon experiments).
    pub map: Option<MapSpec>,
    pub params: Params,
    pub seed: u64,
    /// Default output directory; the command line may override it.
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parse a JSON config.  Structural problems are reported as
    /// [`Error::Validation`] naming the field; range checks against the
    /// runner's preconditions happen in [`run_experiment`].
    pub fn from_json(source: &str) -> Result<ExperimentConfig> {
        let raw: RawConfig = serde_json::from_str(source).map_err(|e| Error::Validation {
            field: "config".into(),
            reason: e.to_string(),
        })?;
        let kind = ExperimentKind::parse(&raw.experiment).ok_or_else(|| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            Error::Validation {
                field: "experiment".into(),
                reason: format!(
                    "unknown experiment `{}`; expected one of: {}",
                    raw.experiment,
                    names.join(", ")
                ),
            }
        })?;
        let map = match (kind.needs_map(), raw.map) {
            (true, Some(v)) => Some(serde_json::from_value::<MapSpec>(v).map_err(|e| {
                Error::Validation {
                    field: "map".into(),
                    reason: e.to_string(),
                }
            })?),
            (true, None) => {
                return Err(Error::Validation {
                    field: "map".into(),
                    reason: format!("experiment `{kind}` needs a map block"),
                })
            }
            (false, None) => None,
            (false, Some(_)) => {
                return Err(Error::Validation {
                    field: "map".into(),
                    reason: format!(
                        "experiment `{kind}` defines its map through params.a and params.c; \
                         drop the map block"
                    ),
                })
            }
        };
        let params = Params::from_value(kind, raw.params.unwrap_or(Value::Null))?;
        Ok(ExperimentConfig {
            kind,
            map,
            params,
            seed: raw.seed,
            out: raw.out.map(PathBuf::from),
        })
    }

    /// Read and parse a config file.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let source = std::fs::read_to_string(path)?;
        ExperimentConfig::from_json(&source)
    }

    /// The config as JSON, as echoed into the manifest; feeding this back
    /// through [`ExperimentConfig::from_json`] reproduces the config.
    pub fn to_json(&self) -> Result<Value> {
        let mut m = serde_json::Map::new();
        m.insert("experiment".into(), Value::String(self.kind.name().into()));
        if let Some(spec) = &self.map {
            m.insert("map".into(), serde_json::to_value(spec)?);
        }
        m.insert("params".into(), self.params.to_value()?);
        m.insert("seed".into(), self.seed.into());
        if let Some(out) = &self.out {
            m.insert("out".into(), Value::String(out.display().to_string()));
        }
        Ok(Value::Object(m))
    }
}

/// A validation error on `<experiment>.<field>`.
pub(crate) fn invalid(
    kind: ExperimentKind,
    field: &str,
    reason: impl std::fmt::Display,
) -> Error {
    Error::Validation {
        field: format!("{}.{}", kind.name(), field),
        reason: reason.to_string(),
    }
}

/// Parse and normalize a point given as homogeneous `[re, im]` pairs.
pub(crate) fn point_from(
    kind: ExperimentKind,
    field: &str,
    coords: &[[f64; 2]],
    expect_len: usize,
) -> Result<ProjectivePoint> {
    if coords.len() != expect_len {
        return Err(invalid(
            kind,
            field,
            format!(
                "expected {expect_len} homogeneous coordinate pairs, got {}",
                coords.len()
            ),
        ));
    }
    if !all_finite(coords) {
        return Err(invalid(kind, field, "coordinates must be finite"));
    }
    normalize(&cx_vec(coords)).map_err(|e| invalid(kind, field, e))
}

/// Build a Hénon automorphism from `[re, im]` parameter pairs.
pub(crate) fn henon_from(
    kind: ExperimentKind,
    a: [f64; 2],
    c: [f64; 2],
) -> Result<RegularAutomorphism> {
    if !(a[0].is_finite() && a[1].is_finite()) {
        return Err(invalid(kind, "a", "must be finite"));
    }
    if !(c[0].is_finite() && c[1].is_finite()) {
        return Err(invalid(kind, "c", "must be finite"));
    }
    make_henon(cx(a), cx(c)).map_err(|e| invalid(kind, "a", e))
}

/// In-memory result of one experiment: named files plus manifest metadata.
#[derive(Debug)]
pub(crate) struct Outputs {
    files: Vec<(String, String)>,
    flags: Vec<String>,
    constants: serde_json::Map<String, Value>,
}

impl Outputs {
    fn new() -> Outputs {
        Outputs {
            files: Vec::new(),
            flags: Vec::new(),
            constants: serde_json::Map::new(),
        }
    }

    fn add_file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn add_table(&mut self, name: &str, table: &Table) {
        self.add_file(name, table.render());
    }

    fn flag(&mut self, message: impl Into<String>) {
        self.flags.push(message.into());
    }

    fn constant(&mut self, key: &str, value: impl Into<Value>) {
        self.constants.insert(key.to_string(), value.into());
    }

    /// Record a float constant; non-finite values fall back to their string
    /// rendering (JSON numbers cannot carry them).
    fn constant_f64(&mut self, key: &str, value: f64) {
        let v = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(fmt_f64(value)));
        self.constants.insert(key.to_string(), v);
    }
}

/// Runtime options of [`run_experiment`] that live outside the config file.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Size of the worker pool (`None`: the library default).  Results are
    /// identical for every worker count.
    pub workers: Option<usize>,
    /// Replaces the config's seed (the CLI fills this from `GREENLAB_SEED`).
    pub seed_override: Option<u64>,
}

/// What [`run_experiment`] wrote and observed.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Every file written, `manifest.json` last.
    pub outputs: Vec<PathBuf>,
    /// Numerical degeneracies observed during the run (also in the
    /// manifest); never fatal.
    pub flags: Vec<String>,
    /// The seed actually used.
    pub seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config: Value,
    seed: u64,
    seed_source: &'static str,
    workers: Option<usize>,
    outputs: Vec<String>,
    flags: &'a [String],
    constants: &'a serde_json::Map<String, Value>,
    versions: BTreeMap<&'static str, &'static str>,
    wall_seconds: f64,
}

/// Read `GREENLAB_SEED` from the environment, if set.
pub fn seed_override_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => parse_seed_text(&text).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Validation {
            field: SEED_ENV_VAR.into(),
            reason: e.to_string(),
        }),
    }
}

fn parse_seed_text(text: &str) -> Result<u64> {
    text.trim().parse::<u64>().map_err(|e| Error::Validation {
        field: SEED_ENV_VAR.into(),
        reason: format!("expected an unsigned 64-bit integer, got `{text}`: {e}"),
    })
}

/// Execute one experiment and write its outputs into `out_dir` (created if
/// missing; nothing is written anywhere else).  Returns the written paths
/// and the degeneracy flags; every error before this returns has already
/// been classified (validation errors name the config field).
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<RunReport> {
    if options.workers == Some(0) {
        return Err(Error::Validation {
            field: "workers".into(),
            reason: "worker count must be at least 1".into(),
        });
    }
    let seed = options.seed_override.unwrap_or(config.seed);
    let started = std::time::Instant::now();

    let work = || compute(config, seed);
    let outputs = match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| {
                Error::InvalidArgument(format!("cannot build a {n}-thread worker pool: {e}"))
            })?
            .install(work),
        None => work(),
    }?;

    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (name, content) in &outputs.files {
        let path = out_dir.join(name);
        std::fs::write(&path, content)?;
        names.push(name.clone());
        written.push(path);
    }
    names.push("manifest.json".into());

    let manifest = Manifest {
        experiment: config.kind.name(),
        config: config.to_json()?,
        seed,
        seed_source: if options.seed_override.is_some() {
            "override"
        } else {
            "config"
        },
        workers: options.workers,
        outputs: names,
        flags: &outputs.flags,
        constants: &outputs.constants,
        versions: BTreeMap::from([("greenlab", env!("CARGO_PKG_VERSION"))]),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    written.push(manifest_path);

    Ok(RunReport {
        outputs: written,
        flags: outputs.flags,
        seed,
    })
}

fn compute(config: &ExperimentConfig, seed: u64) -> Result<Outputs> {
    let built_map = |spec: &Option<MapSpec>| -> Result<LiftedEndomorphism> {
        spec.as_ref()
            .expect("map presence is enforced when parsing the config")
            .build()
    };
    match &config.params {
        Params::GreenGrid(p) => runners::green_grid(&built_map(&config.map)?, p),
        Params::PullbackConverge(p) => {
            runners::pullback_converge(&built_map(&config.map)?, p, seed)
        }
        Params::Lelong(p) => runners::lelong(&built_map(&config.map)?, p, seed),
        Params::BackwardSample(p) => {
            let spec = config.map.as_ref().expect("map presence enforced");
            runners::backward_sample(&spec.build()?, spec, p, seed)
        }
        Params::InvarianceCheck(p) => {
            let spec = config.map.as_ref().expect("map presence enforced");
            runners::invariance_check(&spec.build()?, spec, p, seed)
        }
        Params::ContractionProbe(p) => runners::contraction_probe(&built_map(&config.map)?, p),
        Params::HenonGreen(p) => runners::henon_green(p, seed),
        Params::HenonPullback(p) => runners::henon_pullback(p, seed),
    }
}

/// Resolve the preimage solver an experiment should use.
pub(crate) fn resolve_solver(
    choice: &SolverChoice,
    map_spec: &MapSpec,
    map: &LiftedEndomorphism,
    kind: ExperimentKind,
) -> Result<crate::equidist::PreimageSolverSpec> {
    use crate::equidist::PreimageSolverSpec as Spec;
    let product_spec = |numerator: &[[f64; 2]], denominator: &[[f64; 2]]| Spec::UedaProduct {
        numerator: cx_vec(numerator),
        denominator: if denominator.is_empty() {
            vec![Complex64::new(1.0, 0.0)]
        } else {
            cx_vec(denominator)
        },
    };
    match choice {
        SolverChoice::Auto => {
            if map.k() == 1 {
                return Ok(Spec::Univariate);
            }
            if let MapSpec::SymmetricProduct {
                numerator,
                denominator,
                ..
            } = map_spec
            {
                return Ok(product_spec(numerator, denominator));
            }
            if map.is_monomial_map() {
                return Ok(Spec::PowerMap);
            }
            Err(invalid(
                kind,
                "solver",
                "no automatic preimage solver applies to this map; set params.solver",
            ))
        }
        SolverChoice::Univariate => {
            if map.k() != 1 {
                return Err(invalid(
                    kind,
                    "solver",
                    "the univariate solver needs a map of P^1",
                ));
            }
            Ok(Spec::Univariate)
        }
        SolverChoice::PowerMap => {
            if !map.is_monomial_map() {
                return Err(invalid(
                    kind,
                    "solver",
                    "the power-map solver needs single-monomial components",
                ));
            }
            Ok(Spec::PowerMap)
        }
        SolverChoice::SymmetricProduct {
            numerator,
            denominator,
        } => Ok(product_spec(numerator, denominator)),
    }
}
