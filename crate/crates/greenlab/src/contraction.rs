//! Orbit-scale probes of ball contraction and image-volume lower bounds.
//!
//! Forward images of a small ball `B(x, r)` under a degree-`d` endomorphism
//! of projective space still contain balls, whose radius shrinks at worst
//! doubly exponentially: `f^n(B)` contains a ball of radius
//! `exp(-c · r^{-2k} · d^n)`. Likewise the volume of the image of a region
//! `Z` is bounded below by `exp(-c' · vol(Z)^{-1} · d^n)`. Neither constant
//! is effective, so the probes here check the *shape* of the bounds along
//! concrete orbits rather than the constants:
//!
//! - [`orbit_inradius_estimate`] accumulates `log σ_min` of the chart
//!   differential along an orbit — a first-order proxy for the log-inradius
//!   of `f^n(B(x, r))` — and fits the lower envelope `-c_fit · r^{-2k}` of
//!   the normalized column `d^{-n} · log r_n`.
//! - [`volume_image_probe`] pushes a sample cloud of `Z` forward and
//!   lower-bounds the image volume by counting occupied cells of an
//!   FS-adapted grid, comparing against `exp(-C · vol(Z)^{-1} · d^n)` with
//!   `C` fitted from the small-`n` rows.
//!
//! Orbit differentials escape the `f64` range within a dozen steps (the
//! chart coordinate of the n-th iterate of `t ↦ t²` has magnitude
//! `2^(2^n)`), so every scalar on the inradius path is carried as a
//! unit-modulus phase plus a separate log-magnitude, and the matrix product
//! is renormalized at every step with the log of the scale accumulated
//! outside the matrix.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::poly::{HomogeneousPolynomial, LiftedEndomorphism};
use crate::projective::{normalize, ProjectivePoint};
use crate::{Error, Result};

/// Per-step floor for `σ_min`: a step below it (a near-critical orbit point,
/// or an orbit that reaches the chart hyperplane) is clamped to the floor
/// and flags every row from there on.
pub const SIGMA_MIN_FLOOR: f64 = 1e-12;

/// Default edge length (chart units) of the FS-adapted grid cells used by
/// [`volume_image_probe`].
pub const DEFAULT_GRID_RESOLUTION: f64 = 0.01;

/// Occupied-cell budget; past it the tally restarts with a doubled cell
/// size, annotated in the report.
const GRID_CELL_CAP: usize = 1 << 22;

/// Rows up to this iterate take their `normalized` value from the
/// matrix-product column (the sharper of the two accumulations).
const PRODUCT_COLUMN_ROWS: usize = 15;

// ---------------------------------------------------------------------------
// Log-scaled complex arithmetic
// ---------------------------------------------------------------------------

/// A complex number stored as `phase · exp(log_mag)` with `|phase| = 1`;
/// the exact zero is `log_mag = -∞, phase = 0`. Multiplication adds logs,
/// so chains of values spanning thousands of orders of magnitude stay
/// representable; sums factor the largest magnitude out first.
#[derive(Clone, Copy, Debug)]
struct LogComplex {
    log_mag: f64,
    phase: Complex64,
}

impl LogComplex {
    fn zero() -> Self {
        LogComplex {
            log_mag: f64::NEG_INFINITY,
            phase: Complex64::new(0.0, 0.0),
        }
    }

    fn from_complex(z: Complex64) -> Self {
        let m = z.norm();
        if m == 0.0 {
            return LogComplex::zero();
        }
        LogComplex {
            log_mag: m.ln(),
            phase: z / m,
        }
    }

    fn is_zero(self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return LogComplex::zero();
        }
        let p = self.phase * other.phase;
        let m = p.norm();
        LogComplex {
            log_mag: self.log_mag + other.log_mag + m.ln(),
            phase: p / m,
        }
    }

    /// Reciprocal; `|phase| = 1` makes `1/phase = conj(phase)`.
    fn recip(self) -> LogComplex {
        LogComplex {
            log_mag: -self.log_mag,
            phase: self.phase.conj(),
        }
    }

    fn powu(self, e: u32) -> LogComplex {
        if e == 0 {
            return LogComplex::from_complex(Complex64::new(1.0, 0.0));
        }
        if self.is_zero() {
            return LogComplex::zero();
        }
        let p = self.phase.powu(e);
        let m = p.norm();
        LogComplex {
            log_mag: self.log_mag * f64::from(e) + m.ln(),
            phase: p / m,
        }
    }

    fn sub(self, other: LogComplex) -> LogComplex {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return LogComplex {
                log_mag: other.log_mag,
                phase: -other.phase,
            };
        }
        let top = self.log_mag.max(other.log_mag);
        let d = self.phase * (self.log_mag - top).exp() - other.phase * (other.log_mag - top).exp();
        let m = d.norm();
        if m == 0.0 {
            return LogComplex::zero();
        }
        LogComplex {
            log_mag: top + m.ln(),
            phase: d / m,
        }
    }

    /// The represented value divided by `exp(offset)`.
    fn scaled_to(self, offset: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * (self.log_mag - offset).exp()
    }
}

/// Evaluate a homogeneous polynomial at a point with log-scaled
/// coordinates, factoring the largest term magnitude out of the sum so the
/// arithmetic never leaves the `f64` range.
fn eval_scaled(p: &HomogeneousPolynomial, z: &[LogComplex]) -> LogComplex {
    let mut terms: Vec<LogComplex> = Vec::with_capacity(p.terms().len());
    for t in p.terms() {
        let mut term = LogComplex::from_complex(t.coefficient);
        for (j, &e) in t.exponents.iter().enumerate() {
            if e > 0 {
                term = term.mul(z[j].powu(e));
            }
        }
        if !term.is_zero() {
            terms.push(term);
        }
    }
    let top = terms
        .iter()
        .map(|t| t.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return LogComplex::zero();
    }
    let acc: Complex64 = terms.iter().map(|t| t.scaled_to(top)).sum();
    let m = acc.norm();
    if m == 0.0 {
        return LogComplex::zero();
    }
    LogComplex {
        log_mag: top + m.ln(),
        phase: acc / m,
    }
}

/// One forward orbit step in log-scaled coordinates, re-gauged so the
/// largest coordinate has log-magnitude zero.
fn orbit_step_scaled(map: &LiftedEndomorphism, z: &[LogComplex]) -> Result<Vec<LogComplex>> {
    let mut w: Vec<LogComplex> = map.components().iter().map(|c| eval_scaled(c, z)).collect();
    let top = w
        .iter()
        .map(|c| c.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Solver(
            "orbit evaluation collapsed to the zero vector".into(),
        ));
    }
    for c in &mut w {
        if !c.is_zero() {
            c.log_mag -= top;
        }
    }
    Ok(w)
}

/// Differential of the induced map at a log-scaled orbit point, represented
/// in the affine chart of coordinate 0 on both sides:
///
/// `M_ij = z_0 · (∂_i F_j · F_0 − F_j · ∂_i F_0)(z) / F_0(z)²`
///
/// over the non-chart indices `i, j` (the expression is invariant under
/// rescaling of the representative, so the gauge of `z` does not matter).
/// Returns the matrix factored as `exp(scale) · unit` with the largest
/// `unit` entry of modulus one, or `None` when the representation
/// degenerates: the point or its image lies on the chart hyperplane, or the
/// matrix vanishes identically (a critical point).
fn chart_differential(
    map: &LiftedEndomorphism,
    partials: &[Vec<HomogeneousPolynomial>],
    z: &[LogComplex],
) -> Option<(f64, DMatrix<Complex64>)> {
    let k = map.k();
    let f0 = eval_scaled(&map.components()[0], z);
    if z[0].is_zero() || f0.is_zero() {
        return None;
    }
    let prefactor = z[0].mul(f0.mul(f0).recip());
    let mut entries = vec![LogComplex::zero(); k * k];
    for j in 0..k {
        let fj = eval_scaled(&map.components()[j + 1], z);
        for i in 0..k {
            let dfj = eval_scaled(&partials[j + 1][i], z);
            let df0 = eval_scaled(&partials[0][i], z);
            let n_ij = dfj.mul(f0).sub(fj.mul(df0));
            entries[j * k + i] = prefactor.mul(n_ij);
        }
    }
    let top = entries
        .iter()
        .map(|e| e.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || !top.is_finite() {
        return None;
    }
    let unit = DMatrix::from_fn(k, k, |row, col| entries[row * k + col].scaled_to(top));
    Some((top, unit))
}

fn sigma_min(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Orbit inradius estimate
// ---------------------------------------------------------------------------

/// One orbit row of a [`ContractionProbeReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionRow {
    /// Iterate index; row 0 is the starting ball with no steps applied.
    pub n: usize,
    /// `log r + Σ_{i<n} log σ_min(Df at x_i)`, each step clamped below at
    /// [`SIGMA_MIN_FLOOR`] — a first-order proxy (an estimate, not a bound)
    /// for the log-inradius of `f^n(B(x, r))` in the chart metric.
    pub log_rn_estimate: f64,
    /// `log σ_min(D(f^n) at x)` from the accumulated matrix product with
    /// per-step renormalization; degenerate steps substitute
    /// `floor · identity` so the column stays finite.
    pub log_sigma_min_product: f64,
    /// `d^{-n}` times the log-inradius proxy. Rows up to `n = 15` use the
    /// matrix-product column (the sharper accumulation); later rows the
    /// per-step sum.
    pub normalized: f64,
    /// True once any step up to `n` fell below [`SIGMA_MIN_FLOOR`] or the
    /// orbit left the chart of coordinate 0.
    pub flagged: bool,
}

/// Singular-value accumulation along one orbit: a first-order inradius
/// proxy for `f^n(B(center, r))`, its `d^{-n}`-normalized column, and the
/// fitted lower envelope `-c_fit · r^{-2k}` of that column.
#[derive(Clone, Debug)]
pub struct ContractionProbeReport {
    /// Orbit start.
    pub center: ProjectivePoint,
    /// Initial ball radius.
    pub r: f64,
    /// Rows `n = 0..=n_max`, ordered by `n`.
    pub rows: Vec<ContractionRow>,
    /// Envelope constant: the smallest `c` with
    /// `normalized(n) ≥ -c · r^{-2k}` across all rows (negative when every
    /// row sits above zero).
    pub c_fit: f64,
    /// Whether the expanding-window envelope constant varied by less than
    /// 20% over the last five rows — i.e. late rows stopped moving the fit.
    pub stable: bool,
}

/// Accumulate `log σ_min` of the chart differential along the orbit of `x`,
/// reporting `log r_n = log r + Σ_{i<n} log σ_min(Df at x_i)` as a
/// first-order estimate of the log-inradius of `f^n(B(x, r))`, together
/// with the true `σ_min` of the accumulated differential product, the
/// `d^{-n}`-normalized column, and its fitted lower envelope.
///
/// The differential is represented in the affine chart of coordinate 0.
/// Steps whose `σ_min` falls below [`SIGMA_MIN_FLOOR`] — critical orbit
/// points, or orbits on the chart hyperplane where the representation
/// degenerates — are clamped to the floor and flag every subsequent row;
/// the matrix-product column substitutes `floor · identity` for fully
/// degenerate steps so both columns stay finite.
pub fn orbit_inradius_estimate(
    map: &LiftedEndomorphism,
    x: &ProjectivePoint,
    r: f64,
    n_max: usize,
) -> Result<ContractionProbeReport> {
    if !(r > 0.0 && r < 0.25) {
        return Err(Error::Validation {
            field: "r".into(),
            reason: format!("initial radius must lie in (0, 0.25), got {r}"),
        });
    }
    if n_max == 0 || n_max > 25 {
        return Err(Error::Validation {
            field: "n_max".into(),
            reason: format!("orbit length must lie in 1..=25, got {n_max}"),
        });
    }
    let k = map.k();
    if x.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "map acts on P^{} but the start lives in P^{}",
            k,
            x.k()
        )));
    }

    let d = f64::from(map.degree());
    let log_r = r.ln();
    let floor_log = SIGMA_MIN_FLOOR.ln();
    // Symbolic partials ∂_i F_b for the non-chart coordinates i = 1..=k.
    let partials: Vec<Vec<HomogeneousPolynomial>> = map
        .components()
        .iter()
        .map(|comp| (1..=k).map(|i| comp.partial(i)).collect())
        .collect();

    let mut z: Vec<LogComplex> = x
        .coords()
        .iter()
        .map(|&c| LogComplex::from_complex(c))
        .collect();
    let top = z
        .iter()
        .map(|c| c.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    for c in &mut z {
        if !c.is_zero() {
            c.log_mag -= top;
        }
    }

    let mut step_sum = 0.0_f64;
    let mut flagged = z[0].is_zero();
    let mut prod = DMatrix::<Complex64>::identity(k, k);
    let mut prod_log = 0.0_f64;

    let mut rows = Vec::with_capacity(n_max + 1);
    rows.push(ContractionRow {
        n: 0,
        log_rn_estimate: log_r,
        log_sigma_min_product: 0.0,
        normalized: log_r,
        flagged,
    });

    for n in 1..=n_max {
        // Differential at x_{n-1} (z currently holds the (n-1)-th iterate).
        let step = chart_differential(map, &partials, &z);
        match step {
            Some((scale, unit)) => {
                let s = sigma_min(&unit);
                if s > 0.0 && s.is_finite() {
                    let log_sigma = scale + s.ln();
                    if log_sigma < floor_log {
                        step_sum += floor_log;
                        flagged = true;
                    } else {
                        step_sum += log_sigma;
                    }
                    prod = &unit * &prod;
                    prod_log += scale;
                    let fro = prod.norm();
                    if fro > 0.0 && fro.is_finite() {
                        prod.unscale_mut(fro);
                        prod_log += fro.ln();
                    } else {
                        // Complete numerical collapse of the product; fall
                        // back to the flagged surrogate step.
                        prod = DMatrix::identity(k, k);
                        prod_log += floor_log;
                        flagged = true;
                    }
                } else {
                    // Finite matrix but exactly singular: once multiplied in,
                    // the product could never leave the kernel again, so both
                    // columns take the flagged floor surrogate instead.
                    step_sum += floor_log;
                    prod_log += floor_log;
                    flagged = true;
                }
            }
            None => {
                step_sum += floor_log;
                prod_log += floor_log;
                flagged = true;
            }
        }

        let log_rn = log_r + step_sum;
        let prod_sigma = sigma_min(&prod).max(f64::MIN_POSITIVE);
        let log_prod = prod_log + prod_sigma.ln();
        let dn = d.powi(n as i32);
        let normalized = if n <= PRODUCT_COLUMN_ROWS {
            (log_r + log_prod) / dn
        } else {
            log_rn / dn
        };
        rows.push(ContractionRow {
            n,
            log_rn_estimate: log_rn,
            log_sigma_min_product: log_prod,
            normalized,
            flagged,
        });

        if n < n_max {
            z = orbit_step_scaled(map, &z)?;
        }
    }

    let (c_fit, stable) = envelope_fit(&rows, r, k);
    Ok(ContractionProbeReport {
        center: x.clone(),
        r,
        rows,
        c_fit,
        stable,
    })
}

/// Lower-envelope constant of the normalized column against the template
/// `-c · r^{-2k}`, fitted over expanding row windows: `c(m)` is the
/// envelope using rows `0..=m`, `c_fit = c(last)`, and the fit counts as
/// stable when `c(m)` moved by less than 20% across the last five rows.
fn envelope_fit(rows: &[ContractionRow], r: f64, k: usize) -> (f64, bool) {
    let scale = r.powi(2 * k as i32);
    let mut running = f64::NEG_INFINITY;
    let mut c_by_row = Vec::with_capacity(rows.len());
    for row in rows {
        running = running.max(-row.normalized * scale);
        c_by_row.push(running);
    }
    let c_fit = *c_by_row.last().expect("at least one row");
    let w = c_by_row.len().min(5);
    let tail = &c_by_row[c_by_row.len() - w..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = tail.iter().sum::<f64>() / w as f64;
    let stable = (hi - lo) <= 0.2 * mean.abs().max(1e-12);
    (c_fit, stable)
}

// ---------------------------------------------------------------------------
// Volume image probe
// ---------------------------------------------------------------------------

/// One pushforward level of a [`VolumeProbeReport`].
#[derive(Clone, Debug)]
pub struct VolumeProbeRow {
    /// Pushforward depth; row 0 is the source sample itself.
    pub n: usize,
    /// Number of occupied FS-adapted grid cells at this level.
    pub occupied_cells: usize,
    /// Cell-count × cell-volume lower estimate of `vol(f^n(Z))`.
    pub volume_estimate: f64,
    /// `ln volume_estimate`.
    pub log_volume: f64,
    /// `-C · vol(Z)^{-1} · d^n` with `C` fitted from the small-`n` rows.
    pub bound_log_volume: f64,
    /// Whether the estimate clears the fitted bound.
    pub feasible: bool,
}

/// Image volumes of a region sample pushed forward step by step, with the
/// doubly-exponential feasibility comparison.
#[derive(Clone, Debug)]
pub struct VolumeProbeReport {
    /// Rows `n = 0..=n_max`.
    pub rows: Vec<VolumeProbeRow>,
    /// Fitted constant of the `exp(-C · vol(Z)^{-1} · d^n)` comparison.
    pub c_fit: f64,
    /// Source volume supplied by the caller.
    pub source_volume: f64,
    /// Grid cell edge actually used (doubled from the requested value when
    /// the occupied-cell budget was exceeded).
    pub h: f64,
    /// Whether the resolution had to be coarsened.
    pub coarsened: bool,
}

/// Push a sample cloud of a region `Z ⊂ ℙᵏ` forward `n` steps and
/// lower-bound each image volume by the total FS volume of the occupied
/// cells of a chart-local grid (cell edge `grid_h`, default
/// [`DEFAULT_GRID_RESOLUTION`]); cells carry the FS density correction
/// `k!/πᵏ · (1 + ‖w‖²)^{-(k+1)}` at their center. Each level is compared
/// against `exp(-C · vol_z^{-1} · dᵐ)` with `C` fitted from the rows
/// `m ≤ 2`, recording a per-row feasibility flag.
///
/// The estimate is one-sided by construction: only cells actually hit by a
/// sample point count, and straddle cells whose center belongs to another
/// chart's tiling are skipped rather than double-counted. Accuracy
/// therefore depends on the sample being dense at the grid scale — a grid
/// fill of `Z` with spacing below `grid_h / 2` reproduces `vol_z` up to
/// boundary effects, while a sparse cloud undercounts.
pub fn volume_image_probe(
    map: &LiftedEndomorphism,
    sample: &[ProjectivePoint],
    vol_z: f64,
    n: usize,
    grid_h: Option<f64>,
) -> Result<VolumeProbeReport> {
    let k = map.k();
    if k > 2 {
        return Err(Error::Unsupported(format!(
            "volume probe grids are limited to k ≤ 2, got k = {k}"
        )));
    }
    if n > 10 {
        return Err(Error::Validation {
            field: "n".into(),
            reason: format!("pushforward depth must be at most 10, got {n}"),
        });
    }
    if sample.len() < 10_000 {
        return Err(Error::Validation {
            field: "sample".into(),
            reason: format!(
                "volume estimation needs at least 10^4 sample points, got {}",
                sample.len()
            ),
        });
    }
    if !vol_z.is_finite() || vol_z <= 0.0 {
        return Err(Error::Validation {
            field: "vol_z".into(),
            reason: format!("source volume must be positive and finite, got {vol_z}"),
        });
    }
    let h0 = grid_h.unwrap_or(DEFAULT_GRID_RESOLUTION);
    if !h0.is_finite() || h0 <= 0.0 || h0 > 0.5 {
        return Err(Error::Validation {
            field: "grid_h".into(),
            reason: format!("cell edge must lie in (0, 0.5], got {h0}"),
        });
    }
    if let Some(bad) = sample.iter().find(|p| p.k() != k) {
        return Err(Error::DimensionMismatch(format!(
            "map acts on P^{} but a sample point lives in P^{}",
            k,
            bad.k()
        )));
    }

    // All pushforward levels first, so a coarsening retry re-tallies every
    // level at the same resolution.
    let mut clouds: Vec<Vec<ProjectivePoint>> = Vec::with_capacity(n + 1);
    clouds.push(sample.to_vec());
    for _ in 1..=n {
        let next = clouds
            .last()
            .expect("previous level exists")
            .par_iter()
            .map(|p| normalize(&map.eval(p.coords())))
            .collect::<Result<Vec<_>>>()?;
        clouds.push(next);
    }

    let mut h = h0;
    let mut coarsened = false;
    let levels: Vec<(usize, f64)> = loop {
        let tallies: Option<Vec<(usize, f64)>> = clouds
            .iter()
            .map(|cloud| occupied_volume(cloud, k, h))
            .collect();
        match tallies {
            Some(v) => break v,
            None => {
                h *= 2.0;
                coarsened = true;
            }
        }
    };

    let d = f64::from(map.degree());
    let mut c_fit = f64::NEG_INFINITY;
    for (m, &(_, v)) in levels.iter().enumerate().take(n.min(2) + 1) {
        let log_v = v.max(f64::MIN_POSITIVE).ln();
        c_fit = c_fit.max(-log_v * vol_z / d.powi(m as i32));
    }
    let c_fit = c_fit.max(1e-6);

    let rows = levels
        .iter()
        .enumerate()
        .map(|(m, &(cells, v))| {
            let log_volume = v.max(f64::MIN_POSITIVE).ln();
            let bound_log_volume = -c_fit / vol_z * d.powi(m as i32);
            VolumeProbeRow {
                n: m,
                occupied_cells: cells,
                volume_estimate: v,
                log_volume,
                bound_log_volume,
                feasible: log_volume >= bound_log_volume - 1e-9,
            }
        })
        .collect();

    Ok(VolumeProbeReport {
        rows,
        c_fit,
        source_volume: vol_z,
        h,
        coarsened,
    })
}

/// Tally the occupied cells of the chart-local grid at cell edge `h` and
/// their total FS volume. Every point is bucketed into the chart of its
/// largest coordinate (so its chart coordinates sit in the unit polydisk);
/// a cell contributes volume only if its own center also belongs to that
/// chart's tiling, which keeps the charts' tilings disjoint up to a
/// one-cell seam. Returns `None` when the occupied-cell budget is exceeded.
fn occupied_volume(points: &[ProjectivePoint], k: usize, h: f64) -> Option<(usize, f64)> {
    let mut cells: BTreeSet<(usize, [(i64, i64); 2])> = BTreeSet::new();
    for p in points {
        let coords = p.coords();
        let chart = coords
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.norm()
                    .partial_cmp(&b.1.norm())
                    .expect("coordinates are finite")
            })
            .map(|(i, _)| i)
            .expect("points have coordinates");
        let mut key = [(0_i64, 0_i64); 2];
        for (slot, j) in (0..=k).filter(|&j| j != chart).enumerate() {
            let w = coords[j] / coords[chart];
            key[slot] = ((w.re / h).floor() as i64, (w.im / h).floor() as i64);
        }
        cells.insert((chart, key));
        if cells.len() > GRID_CELL_CAP {
            return None;
        }
    }

    let mut volume = 0.0;
    'cells: for &(_, key) in &cells {
        let mut wsq = 0.0;
        for &(ix, iy) in key.iter().take(k) {
            let center = Complex64::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
            if center.norm() > 1.0 {
                // The center lies deeper in another chart; that chart's
                // tiling owns this region.
                continue 'cells;
            }
            wsq += center.norm_sqr();
        }
        volume += h.powi(2 * k as i32) * fs_density(wsq, k);
    }
    Some((cells.len(), volume))
}

/// FS volume density (total mass 1) at squared chart radius `wsq`:
/// `k!/πᵏ · (1 + ‖w‖²)^{-(k+1)}`.
fn fs_density(wsq: f64, k: usize) -> f64 {
    let k_factorial = if k == 1 { 1.0 } else { 2.0 };
    k_factorial / PI.powi(k as i32) / (1.0 + wsq).powi(k as i32 + 1)
}
