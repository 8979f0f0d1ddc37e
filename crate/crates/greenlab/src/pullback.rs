//! Pull-back potentials of hypersurfaces and their convergence diagnostics.
//!
//! A hypersurface `H = {P = 0}` of degree `s` carries the normalized current
//! of integration `s^{-1}[H]`.  Against the invariant current of a degree-d
//! endomorphism it has a bounded "modulo" potential
//!
//! ```text
//! u([z]) = s^{-1} log |P(z)| - G(z),
//! ```
//!
//! well defined on projective space because both terms shift by `log|λ|`
//! under rescaling.  The normalized pull-backs `d^{-n} (f^n)^* s^{-1}[H]`
//! then have potentials `u_n = d^{-n} · u ∘ f^n`, and `u_n → 0` in `L¹`
//! exactly when no irreducible component of `H` is totally invariant under
//! some iterate (the exceptional case, where `u_n` stalls).  The reports in
//! this module estimate that decay empirically, using `L¹` convergence of
//! potentials as the numerical proxy for convergence of the currents; no
//! weak-* pairing against smooth forms is attempted, since that would need
//! numerical differentiation of nonsmooth potentials.
//!
//! The same diagnostics exist for the quadratic Hénon family, where the role
//! of `u` is played by `deg(Q)^{-1} log |Q| - G⁺` for a nonconstant affine
//! polynomial `Q`, restricted to orbits with a certified escape.

use crate::green::{henon_green_plus, OrbitAccumulator, DEFAULT_N_MAX, DEFAULT_TOL};
use crate::poly::{AffinePolynomial, HomogeneousPolynomial, LiftedEndomorphism, RegularAutomorphism};
use crate::projective::{normalize, sample_fs_uniform, ProjectivePoint};
use crate::rng::SplitMix64;
use crate::util::{linear_fit, pairwise_sum};
use crate::{Error, Result, LOG_CLIP_FLOOR};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A hypersurface `{P = 0}` in `P^k`, carrying the normalized current
/// `s^{-1}[H]` where `s = deg P`.
///
/// Reducible hypersurfaces are represented by the product polynomial
/// (degrees add), matching the identity `[H] = Σ components·multiplicity`.
#[derive(Clone, Debug)]
pub struct HypersurfaceCurrent {
    poly: HomogeneousPolynomial,
}

impl HypersurfaceCurrent {
    pub fn new(poly: HomogeneousPolynomial) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::InvalidArgument(
                "hypersurface polynomial must not be identically zero".into(),
            ));
        }
        if poly.degree() < 1 {
            return Err(Error::InvalidArgument(
                "hypersurface polynomial must have degree >= 1".into(),
            ));
        }
        Ok(HypersurfaceCurrent { poly })
    }

    /// The coordinate hyperplane `{z_index = 0}` in `P^k`.
    pub fn coordinate_hyperplane(k: usize, index: usize) -> Result<Self> {
        if index > k {
            return Err(Error::InvalidArgument(format!(
                "coordinate index {index} out of range for P^{k}"
            )));
        }
        HypersurfaceCurrent::new(HomogeneousPolynomial::coordinate_power(k + 1, index, 1))
    }

    pub fn polynomial(&self) -> &HomogeneousPolynomial {
        &self.poly
    }

    /// Degree `s` of the defining polynomial.
    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    /// Number of homogeneous coordinates (`k + 1` on `P^k`).
    pub fn vars(&self) -> usize {
        self.poly.vars()
    }

    fn label(&self) -> String {
        format!("deg{} {{{}}}", self.degree(), self.poly)
    }
}

/// One evaluation of the normalized pull-back potential `u_n`.
#[derive(Clone, Debug)]
pub struct PullbackPotentialSample {
    /// Where the potential was evaluated.
    pub point: ProjectivePoint,
    /// Pull-back depth.
    pub n: usize,
    /// `u_n(point)`, clipped from below at [`LOG_CLIP_FLOOR`].
    pub u_n: f64,
    /// Whether the value hit the clip floor (the point's n-th image lies on,
    /// or numerically under, the hypersurface).
    pub clipped: bool,
    /// The Green tail `G_n(z) - G(z)` actually substituted into `u_n`.
    pub correction: f64,
    /// Certified bound for `|correction|`, from the same accumulator run.
    pub green_error_bound: f64,
}

/// One aggregated row of a convergence report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// Pull-back depth.
    pub n: usize,
    /// Mean of `|u_n|` over the non-clipped samples.
    pub mean_abs_u: f64,
    /// Max of `|u_n|` over the non-clipped samples.
    pub max_abs_u: f64,
    /// Samples excluded from the mean because they hit the clip floor.
    pub clipped_count: usize,
    /// Samples contributing to the mean.
    pub samples_used: usize,
}

/// Statistics over the samples whose orbits never certified escape
/// (Hénon reports only).  For these `G⁺ = 0` and the residual statistic is
/// still recorded.
#[derive(Clone, Debug)]
pub struct NonEscapingSummary {
    pub count: usize,
    pub rows: Vec<ConvergenceRow>,
}

/// Decay diagnostics for the normalized pull-back potentials of one
/// hypersurface under one map.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub map_id: String,
    pub hypersurface_id: String,
    pub sample_count: usize,
    pub seed: u64,
    /// Rows ordered by increasing `n`.
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log mean|u_n|` against `n`, fitted over the
    /// rows with `n >= 2` (the transient is excluded by convention); `None`
    /// when fewer than two rows are usable.
    pub fitted_rate: Option<f64>,
    /// Set when some row lost all of its samples to clipping (projective
    /// reports) or no sample certified escape (Hénon reports).
    pub degenerate: bool,
    /// Hénon reports only: the non-escaping samples, kept separate.
    pub non_escaping: Option<NonEscapingSummary>,
}

/// A bounded affine sampling region in `C^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum AffineRegion {
    /// Complex ball `||z|| <= radius`.
    Ball { radius: f64 },
    /// Complex annulus `r_min <= ||z|| <= r_max`.
    Annulus { r_min: f64, r_max: f64 },
    /// Ball of radius `radius` inside the real slice `R^k ⊂ C^k`.
    RealBall { radius: f64 },
}

impl AffineRegion {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AffineRegion::Ball { radius } | AffineRegion::RealBall { radius } => {
                radius.is_finite() && radius > 0.0
            }
            AffineRegion::Annulus { r_min, r_max } => {
                r_min.is_finite() && r_max.is_finite() && 0.0 <= r_min && r_min < r_max
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "sampling region {self:?} is empty or unbounded"
            )))
        }
    }

    /// Deterministic sample `index` of the region in `C^k` under `seed`.
    ///
    /// Uniform with respect to Lebesgue measure on the region (on the real
    /// slice for [`AffineRegion::RealBall`]).
    pub fn sample(&self, k: usize, seed: u64, index: u64) -> Vec<Complex64> {
        let mut gen = SplitMix64::substream(seed, index);
        match *self {
            AffineRegion::Ball { radius } => {
                let r = radius * gen.next_f64().powf(0.5 / k as f64);
                scaled_complex_direction(&mut gen, k, r)
            }
            AffineRegion::Annulus { r_min, r_max } => {
                let lo = r_min.powi(2 * k as i32);
                let hi = r_max.powi(2 * k as i32);
                let r = (lo + gen.next_f64() * (hi - lo)).powf(0.5 / k as f64);
                scaled_complex_direction(&mut gen, k, r)
            }
            AffineRegion::RealBall { radius } => {
                let r = radius * gen.next_f64().powf(1.0 / k as f64);
                let dir: Vec<f64> = (0..k)
                    .map(|_| {
                        let (g, _) = gen.next_gaussian_pair();
                        g
                    })
                    .collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return vec![Complex64::new(0.0, 0.0); k];
                }
                dir.iter()
                    .map(|v| Complex64::new(v * r / norm, 0.0))
                    .collect()
            }
        }
    }
}

fn scaled_complex_direction(gen: &mut SplitMix64, k: usize, r: f64) -> Vec<Complex64> {
    let dir: Vec<Complex64> = (0..k).map(|_| gen.next_complex_gaussian()).collect();
    let norm = dir.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![Complex64::new(0.0, 0.0); k];
    }
    dir.into_iter().map(|v| v * (r / norm)).collect()
}

fn map_label(map: &LiftedEndomorphism) -> String {
    let terms: usize = map.components().iter().map(|p| p.terms().len()).sum();
    format!("P{} deg-{} lift ({terms} terms)", map.k(), map.degree())
}

fn check_dimensions(h: &HypersurfaceCurrent, map: &LiftedEndomorphism) -> Result<()> {
    if h.vars() != map.k() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "hypersurface lives in {} homogeneous variables, map expects {}",
            h.vars(),
            map.k() + 1
        )));
    }
    Ok(())
}

/// The modulo potential `u([z]) = s^{-1} log|P(z)| - G(z)` of the normalized
/// current `s^{-1}[H]` at `p`, clipped from below at [`LOG_CLIP_FLOOR`].
///
/// A clipped evaluation (a point of `H`) returns exactly the floor; use
/// [`pullback_potential`] with `n = 0` for the flagged form.
pub fn modulo_potential(
    h: &HypersurfaceCurrent,
    map: &LiftedEndomorphism,
    p: &ProjectivePoint,
    tol: f64,
) -> Result<f64> {
    Ok(pullback_potential(h, map, p, 0, tol)?.u_n)
}

/// The normalized pull-back potential `u_n(p) = d^{-n} · u(f^n(p))`,
/// computed without ever forming `f^n(p)` in linear coordinates:
///
/// ```text
/// u_n(p) = d^{-n} s^{-1} log |P(w_n)|  +  (G_n(z) - G(z)),
/// ```
///
/// where `w_n` is the renormalized n-th iterate of the unit representative
/// `z` and `G_n`, `G` come from the same orbit accumulator.  The identity
/// follows from `log|P(F^n z)| = log|P(w_n)| + s·log‖F^n z‖` together with
/// homogeneity of the Green function, so the only inexactness is the Green
/// tail recorded in `correction`.
pub fn pullback_potential(
    h: &HypersurfaceCurrent,
    map: &LiftedEndomorphism,
    p: &ProjectivePoint,
    n: usize,
    tol: f64,
) -> Result<PullbackPotentialSample> {
    check_dimensions(h, map)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (u_n, clipped, correction, bound) =
        potentials_along_orbit(h, map, p, &[n], tol).map(|mut v| v.pop().expect("one depth"))?;
    Ok(PullbackPotentialSample {
        point: p.clone(),
        n,
        u_n,
        clipped,
        correction,
        green_error_bound: bound,
    })
}

/// One renormalized orbit pass evaluating `u_n` at every depth in `n_list`
/// (strictly increasing).  Returns `(u_n, clipped, correction, bound)` per
/// depth; all depths share the same Green limit estimate, so differences of
/// the returned values telescope exactly.
fn potentials_along_orbit(
    h: &HypersurfaceCurrent,
    map: &LiftedEndomorphism,
    p: &ProjectivePoint,
    n_list: &[usize],
    tol: f64,
) -> Result<Vec<(f64, bool, f64, f64)>> {
    let s = h.degree() as f64;
    let d = map.degree() as f64;
    let n_last = *n_list.last().expect("n_list is nonempty");

    let mut acc = OrbitAccumulator::new(map, p.coords())?;
    // (n, log|P(w_n)|, G_n, tail bound at n) at each requested depth.
    let mut stations = Vec::with_capacity(n_list.len());
    let mut idx = 0;
    loop {
        while idx < n_list.len() && n_list[idx] == acc.n() {
            let logp = h.poly.eval(acc.current()).norm().ln();
            stations.push((acc.n(), logp, acc.partial(), acc.error_bound()));
            idx += 1;
        }
        if acc.n() >= n_last {
            break;
        }
        acc.step()?;
    }
    let mut extra = 0;
    while acc.error_bound() > tol && extra < DEFAULT_N_MAX {
        acc.step()?;
        extra += 1;
    }
    let g_est = acc.partial();
    let final_bound = acc.error_bound();

    Ok(stations
        .into_iter()
        .map(|(n, logp, g_n, bound_n)| {
            let correction = g_n - g_est;
            let u_raw = d.powi(-(n as i32)) * logp / s + correction;
            let clipped = !(u_raw.is_finite() && u_raw >= LOG_CLIP_FLOOR);
            (
                if clipped { LOG_CLIP_FLOOR } else { u_raw },
                clipped,
                correction,
                bound_n + final_bound,
            )
        })
        .collect())
}

/// Decay report for `mean |u_n|` over a shared (paired) Fubini–Study-uniform
/// sample set: every depth in `n_list` is evaluated on the same points, so
/// rows are directly comparable.  Clipped samples are excluded from the mean
/// and max but counted per row; a row losing all samples marks the report
/// degenerate.
pub fn convergence_report(
    h: &HypersurfaceCurrent,
    map: &LiftedEndomorphism,
    n_list: &[usize],
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<ConvergenceReport> {
    check_dimensions(h, map)?;
    validate_depths(n_list)?;
    if sample_count < 100 {
        return Err(Error::InvalidArgument(format!(
            "convergence reports need at least 100 samples, got {sample_count}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let points = sample_fs_uniform(sample_count, map.k(), seed);
    let per_sample: Vec<Vec<(f64, bool)>> = points
        .par_iter()
        .map(|p| {
            potentials_along_orbit(h, map, p, n_list, tol)
                .map(|v| v.into_iter().map(|(u, c, _, _)| (u, c)).collect())
        })
        .collect::<Result<_>>()?;

    let (rows, degenerate) = aggregate_rows(n_list, &per_sample);
    let fitted_rate = fit_decay_rate(&rows);
    Ok(ConvergenceReport {
        map_id: map_label(map),
        hypersurface_id: h.label(),
        sample_count,
        seed,
        rows,
        fitted_rate,
        degenerate,
        non_escaping: None,
    })
}

/// Result of an invariance scan: how far `s^{-1}[H]` is from satisfying
/// `f^* T = d·T` on a sample set.
#[derive(Clone, Copy, Debug)]
pub struct InvarianceResidualReport {
    /// `max |d^{-1} u(f(p)) - u(p)|` over the usable samples.
    pub max_residual: f64,
    /// Samples contributing to the max.
    pub samples_used: usize,
    /// Samples skipped because either potential hit the clip floor.
    pub clipped_skipped: usize,
}

/// Maximum of `|d^{-1} u(f(p)) - u(p)|` over a Fubini–Study-uniform sample
/// set — near zero exactly when `H` behaves as a totally invariant
/// hypersurface on the samples.  Clipped samples are skipped and counted.
pub fn invariance_residual(
    h: &HypersurfaceCurrent,
    map: &LiftedEndomorphism,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<InvarianceResidualReport> {
    check_dimensions(h, map)?;
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be positive".into()));
    }
    let d = map.degree() as f64;
    let points = sample_fs_uniform(sample_count, map.k(), seed);
    let residuals: Vec<Option<f64>> = points
        .par_iter()
        .map(|p| -> Result<Option<f64>> {
            let up = pullback_potential(h, map, p, 0, tol)?;
            let fp = normalize(&map.eval(p.coords()))?;
            let ufp = pullback_potential(h, map, &fp, 0, tol)?;
            if up.clipped || ufp.clipped {
                return Ok(None);
            }
            Ok(Some((ufp.u_n / d - up.u_n).abs()))
        })
        .collect::<Result<_>>()?;

    let mut max_residual = 0.0f64;
    let mut used = 0;
    for r in residuals.iter().flatten() {
        max_residual = max_residual.max(*r);
        used += 1;
    }
    Ok(InvarianceResidualReport {
        max_residual,
        samples_used: used,
        clipped_skipped: sample_count - used,
    })
}

/// Decay report for the forward Hénon statistic
/// `| 2^{-n} deg(Q)^{-1} log |Q(f^n(z))| - G⁺(z) |` over samples of a
/// bounded affine region, restricted to orbits with a certified escape.
/// Non-escaping samples (`G⁺ = 0`) are aggregated separately.
///
/// The orbit statistic is evaluated in renormalized logarithmic coordinates
/// once the orbit enters the escape region, so depths far beyond floating-
/// point range (`|y_n| ~ exp(2^n)`) remain exact.
pub fn henon_pullback_report(
    aut: &RegularAutomorphism,
    q: &AffinePolynomial,
    n_list: &[usize],
    region: &AffineRegion,
    sample_count: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    let (a, c) = aut.henon_parameters().ok_or_else(|| {
        Error::Unsupported("pull-back reports are implemented for the quadratic family".into())
    })?;
    if q.vars() != aut.k() {
        return Err(Error::DimensionMismatch(format!(
            "polynomial has {} variables, automorphism acts on C^{}",
            q.vars(),
            aut.k()
        )));
    }
    if q.total_degree() == 0 {
        return Err(Error::InvalidArgument(
            "the test polynomial Q must be nonconstant".into(),
        ));
    }
    validate_depths(n_list)?;
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be positive".into()));
    }
    region.validate()?;

    let r = aut.filtration_radius();
    let n_last = *n_list.last().expect("n_list is nonempty");
    let deg_q = q.total_degree() as f64;

    // (escaped, per-depth residual + clip flag)
    let per_sample: Vec<(bool, Vec<(f64, bool)>)> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, Vec<(f64, bool)>)> {
            let z = region.sample(aut.k(), seed, i);
            let g = henon_green_plus(aut, &z, DEFAULT_TOL, DEFAULT_N_MAX)?;
            let stats = henon_log_q_along_orbit(q, a, c, r, &z, n_list, n_last)?;
            let rows = stats
                .into_iter()
                .zip(n_list)
                .map(|(logq, &n)| {
                    if logq <= LOG_CLIP_FLOOR || !logq.is_finite() {
                        (0.0, true)
                    } else {
                        let stat = 0.5f64.powi(n as i32) * logq / deg_q;
                        ((stat - g.value).abs(), false)
                    }
                })
                .collect();
            Ok((g.escaped, rows))
        })
        .collect::<Result<_>>()?;

    let escaping: Vec<Vec<(f64, bool)>> = per_sample
        .iter()
        .filter(|(esc, _)| *esc)
        .map(|(_, rows)| rows.clone())
        .collect();
    let bounded: Vec<Vec<(f64, bool)>> = per_sample
        .iter()
        .filter(|(esc, _)| !*esc)
        .map(|(_, rows)| rows.clone())
        .collect();

    let (rows, row_degenerate) = aggregate_rows(n_list, &escaping);
    let fitted_rate = fit_decay_rate(&rows);
    let (non_rows, _) = aggregate_rows(n_list, &bounded);
    Ok(ConvergenceReport {
        map_id: format!("henon a={a} c={c}"),
        hypersurface_id: format!("deg{} {{{}}}", q.total_degree(), q),
        sample_count,
        seed,
        rows,
        fitted_rate,
        degenerate: escaping.is_empty() || row_degenerate,
        non_escaping: Some(NonEscapingSummary {
            count: bounded.len(),
            rows: non_rows,
        }),
    })
}

/// `log |Q(f^n(z))|` at every depth in `n_list`, switching from direct
/// iteration to the logarithmic frame `(x, y) = (u_x e^{l_x + L}, ŷ e^L)`
/// once the orbit enters the escape region `|y| >= max(|x|, R)`.
fn henon_log_q_along_orbit(
    q: &AffinePolynomial,
    a: Complex64,
    c: Complex64,
    r: f64,
    z: &[Complex64],
    n_list: &[usize],
    n_last: usize,
) -> Result<Vec<f64>> {
    enum Frame {
        Direct { x: Complex64, y: Complex64 },
        Log { ux: Complex64, lx: f64, yh: Complex64, l: f64 },
    }
    let mut frame = Frame::Direct { x: z[0], y: z[1] };
    let mut out = Vec::with_capacity(n_list.len());
    let mut idx = 0;
    for n in 0..=n_last {
        // Promote to the logarithmic frame as soon as escape is certified.
        if let Frame::Direct { x, y } = frame {
            if y.norm() >= r && y.norm() >= x.norm() {
                let l = y.norm().ln();
                let (ux, lx) = if x.norm() == 0.0 {
                    (Complex64::new(1.0, 0.0), f64::NEG_INFINITY)
                } else {
                    (x / x.norm(), x.norm().ln() - l)
                };
                frame = Frame::Log { ux, lx, yh: y / y.norm(), l };
            }
        }
        if idx < n_list.len() && n_list[idx] == n {
            out.push(match &frame {
                Frame::Direct { x, y } => q.eval(&[*x, *y]).norm().ln(),
                Frame::Log { ux, lx, yh, l } => log_abs_affine(q, *ux, *lx, *yh, *l),
            });
            idx += 1;
        }
        if n == n_last {
            break;
        }
        frame = match frame {
            Frame::Direct { x, y } => {
                if x.norm() > 1e280 || y.norm() > 1e280 {
                    return Err(Error::Solver(
                        "orbit overflow outside the escape funnel".into(),
                    ));
                }
                Frame::Direct { x: y, y: y * y + c - a * x }
            }
            Frame::Log { ux, lx, yh, l } => {
                // One Hénon step: y' = y² + c - a x, so with y = ŷ e^L the
                // bracket is q = ŷ² + c e^{-2L} - a u_x e^{l_x - L} and
                // L' = 2L + ln|q|; exponents are combined before
                // exponentiating so no factor ever under- or overflows.
                let qq = yh * yh + c * (-2.0 * l).exp()
                    - a * ux * if lx.is_finite() { (lx - l).exp() } else { 0.0 };
                let qn = qq.norm();
                let l_next = 2.0 * l + qn.ln();
                Frame::Log {
                    ux: yh,
                    lx: l - l_next,
                    yh: qq / qn,
                    l: l_next,
                }
            }
        };
    }
    Ok(out)
}

/// `log |Q(x, y)|` for `x = u_x e^{l_x + L}`, `y = ŷ e^L` with `|u_x| = |ŷ| = 1`,
/// evaluated stably for arbitrarily large `L` by factoring the dominant
/// log-magnitude out of the monomial sum (log-sum-exp with phases).
fn log_abs_affine(q: &AffinePolynomial, ux: Complex64, lx: f64, yh: Complex64, l: f64) -> f64 {
    let mut mags = Vec::with_capacity(q.terms().len());
    let mut phases = Vec::with_capacity(q.terms().len());
    for t in q.terms() {
        let cm = t.coefficient.norm();
        if cm == 0.0 {
            continue;
        }
        let alpha = t.exponents[0];
        let beta = t.exponents[1];
        let mag_x = if alpha == 0 { 0.0 } else { alpha as f64 * (lx + l) };
        let mag = cm.ln() + mag_x + beta as f64 * l;
        if mag == f64::NEG_INFINITY {
            continue;
        }
        mags.push(mag);
        phases.push((t.coefficient / cm) * ux.powu(alpha) * yh.powu(beta));
    }
    if mags.is_empty() {
        return f64::NEG_INFINITY;
    }
    let top = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: Complex64 = mags
        .iter()
        .zip(&phases)
        .map(|(m, p)| p * (m - top).exp())
        .sum();
    top + sum.norm().ln()
}

fn validate_depths(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("depth list must be nonempty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "depth list must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Per-row aggregation with clipped samples excluded from mean/max but
/// counted.  The mean reduces with a fixed-shape pairwise tree in sample
/// order, so results are independent of the worker count.
fn aggregate_rows(n_list: &[usize], per_sample: &[Vec<(f64, bool)>]) -> (Vec<ConvergenceRow>, bool) {
    let mut degenerate = false;
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let vals: Vec<f64> = per_sample
                .iter()
                .filter(|s| !s[j].1)
                .map(|s| s[j].0.abs())
                .collect();
            let samples_used = vals.len();
            if samples_used == 0 {
                degenerate = true;
            }
            let mean_abs_u = if samples_used == 0 {
                0.0
            } else {
                pairwise_sum(&vals) / samples_used as f64
            };
            let max_abs_u = vals.iter().copied().fold(0.0, f64::max);
            ConvergenceRow {
                n,
                mean_abs_u,
                max_abs_u,
                clipped_count: per_sample.len() - samples_used,
                samples_used,
            }
        })
        .collect();
    (rows, degenerate)
}

/// Least-squares slope of `log mean|u_n|` vs `n` over the rows with `n >= 2`
/// (transient excluded) that kept samples and a positive mean.
fn fit_decay_rate(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 2 && r.samples_used > 0 && r.mean_abs_u > 0.0)
        .map(|r| (r.n as f64, r.mean_abs_u.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Some(linear_fit(&xs, &ys).0)
}
