//! Escape-rate (Green) functions with certified error bounds.
//!
//! For a degree-d lift `F` the Green function is
//! `G(z) = lim d^{-n} log ||F^n(z)||`.  Iterating `F` directly overflows
//! after a handful of steps, so the orbit is renormalized to the unit sphere
//! and the limit is accumulated as a telescoping series
//!
//! ```text
//! G_n(z) = log ||z|| + sum_{j<n} d^{-(j+1)} log ||F(w_j)||,   w_0 = z/||z||,
//! w_{j+1} = F(w_j)/||F(w_j)||,
//! ```
//!
//! whose tail is bounded by `C d^{-n} / (d - 1)` with
//! `C = sup_{||w||=1} | log ||F(w)|| |` (estimated by the construction-time
//! sphere battery of the map).  The same strategy in logarithmic coordinates
//! handles the forward Green function of a Henon map, where the escape region
//! `|y| >= max(|x|, R)` certifies divergence and doubles `|y|` every step.

use crate::poly::{LiftedEndomorphism, RegularAutomorphism};
use crate::projective::ProjectivePoint;
use crate::util::complex_norm;
use crate::{Error, Result};
use num_complex::Complex64;

/// Default tail-bound tolerance for escape-rate evaluations.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration horizon.
pub const DEFAULT_N_MAX: usize = 200;

/// A Green-function value with its certificate.
#[derive(Clone, Copy, Debug)]
pub struct GreenValue {
    /// The partial sum `G_n(z)`.
    pub value: f64,
    /// Number of renormalized iterations accumulated.
    pub n_used: usize,
    /// Certified bound for `|G(z) - value|`.
    pub error_bound: f64,
    /// Whether `error_bound <= tol` was reached within the horizon.
    pub converged: bool,
}

/// Incremental escape-rate accumulator over the renormalized orbit.
///
/// Exposes the current unit-sphere representative, which pull-back potential
/// evaluations reuse to avoid a second orbit pass.
#[derive(Clone, Debug)]
pub struct OrbitAccumulator<'a> {
    map: &'a LiftedEndomorphism,
    w: Vec<Complex64>,
    partial: f64,
    n: usize,
    /// `d^{-n}` for the current `n`.
    inv_dn: f64,
}

impl<'a> OrbitAccumulator<'a> {
    pub fn new(map: &'a LiftedEndomorphism, z: &[Complex64]) -> Result<Self> {
        if z.len() != map.k() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, map expects {}",
                z.len(),
                map.k() + 1
            )));
        }
        if map.degree() < 2 {
            return Err(Error::InvalidArgument(
                "escape rates need a map of degree >= 2".into(),
            ));
        }
        let n0 = complex_norm(z);
        if n0 == 0.0 || !n0.is_finite() {
            return Err(Error::ZeroVector);
        }
        let w = z.iter().map(|c| c / n0).collect();
        Ok(OrbitAccumulator {
            map,
            w,
            partial: n0.ln(),
            n: 0,
            inv_dn: 1.0,
        })
    }

    /// Number of accumulated iterations.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Current unit-sphere representative `w_n` of the orbit.
    pub fn current(&self) -> &[Complex64] {
        &self.w
    }

    /// The partial sum `G_n(z)`.
    pub fn partial(&self) -> f64 {
        self.partial
    }

    /// Certified tail bound `C d^{-n} / (d-1)` at the current `n`.
    pub fn error_bound(&self) -> f64 {
        self.map.log_norm_bound() * self.inv_dn / (self.map.degree() as f64 - 1.0)
    }

    /// Advance the renormalized orbit by one iteration.
    pub fn step(&mut self) -> Result<()> {
        let image = self.map.eval(&self.w);
        let norm = complex_norm(&image);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::Solver(format!(
                "renormalized orbit hit ||F|| = {norm:e} at step {}; \
                 the lift is numerically degenerate along this orbit",
                self.n
            )));
        }
        self.inv_dn /= self.map.degree() as f64;
        self.partial += self.inv_dn * norm.ln();
        self.w = image.into_iter().map(|c| c / norm).collect();
        self.n += 1;
        Ok(())
    }
}

/// Green function of the lift at `z in C^{k+1}`, iterated until the certified
/// tail bound drops below `tol` or `n_max` steps elapse.
pub fn green_lift(
    map: &LiftedEndomorphism,
    z: &[Complex64],
    tol: f64,
    n_max: usize,
) -> Result<GreenValue> {
    let mut acc = OrbitAccumulator::new(map, z)?;
    loop {
        if acc.error_bound() <= tol {
            return Ok(GreenValue {
                value: acc.partial(),
                n_used: acc.n(),
                error_bound: acc.error_bound(),
                converged: true,
            });
        }
        if acc.n() >= n_max {
            return Ok(GreenValue {
                value: acc.partial(),
                n_used: acc.n(),
                error_bound: acc.error_bound(),
                converged: false,
            });
        }
        acc.step()?;
    }
}

/// Green potential at a point of P^k: the Green function of the canonical
/// unit representative.  This is the local potential of the invariant
/// Fubini-Study-normalized current.
pub fn green_potential(
    map: &LiftedEndomorphism,
    p: &ProjectivePoint,
    tol: f64,
    n_max: usize,
) -> Result<GreenValue> {
    green_lift(map, p.coords(), tol, n_max)
}

/// Forward Green value of a Henon orbit.
#[derive(Clone, Copy, Debug)]
pub struct HenonGreenValue {
    /// `G^+(z)`; exactly `0.0` when escape was not certified.
    pub value: f64,
    /// Whether the orbit entered the escape region within the horizon.
    pub escaped: bool,
    /// Plain iterations before the escape region was reached.
    pub n_direct: usize,
    /// Log-coordinate iterations performed after entry.
    pub n_renormalized: usize,
    /// Certified bound for `|G^+(z) - value|` when escaped; infinite when the
    /// horizon was exhausted without an escape certificate.
    pub error_bound: f64,
}

/// Forward Green function `G^+(z) = lim 2^{-n} log^+ ||f^n(z)||` of a
/// quadratic Henon map `f(x, y) = (y, y^2 + c - a x)`.
///
/// Escape is certified by entry into `V+ = { |y| >= max(|x|, R) }` with `R`
/// the filtration radius: on `V+` the second coordinate at least doubles
/// every step, so the orbit provably diverges.  Once inside, iteration
/// continues on `(x/|y|, y/|y|, log |y|)`, which never overflows, and the
/// tail of `2^{-n} log |y_n|` is bounded by `2^{-n} * 2(|a|+|c|) e^{-L_n}` --
/// doubly exponentially small.  Orbits that fail to enter `V+` within
/// `n_max` steps are reported with `escaped = false` and the uncertified
/// value `0`.
pub fn henon_green_plus(
    aut: &RegularAutomorphism,
    z: &[Complex64],
    tol: f64,
    n_max: usize,
) -> Result<HenonGreenValue> {
    let (a, c) = aut.henon_parameters().ok_or_else(|| {
        Error::Unsupported("forward Green values are implemented for the quadratic family".into())
    })?;
    if z.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, expected 2",
            z.len()
        )));
    }
    let r = aut.filtration_radius();
    let (mut x, mut y) = (z[0], z[1]);

    let mut n_direct = 0usize;
    while !(y.norm() >= r && y.norm() >= x.norm()) {
        if n_direct >= n_max {
            return Ok(HenonGreenValue {
                value: 0.0,
                escaped: false,
                n_direct,
                n_renormalized: 0,
                error_bound: f64::INFINITY,
            });
        }
        if x.norm() > 1e280 || y.norm() > 1e280 {
            return Err(Error::Solver(
                "orbit overflow outside the escape funnel".into(),
            ));
        }
        let y_next = y * y + c - a * x;
        x = y;
        y = y_next;
        n_direct += 1;
    }

    // Renormalized phase in log coordinates: the point is (xh e^L, yh e^L)
    // with |yh| = 1.  One Henon step sends L to 2L + ln|q| with
    // q = yh^2 + c e^{-2L} - a xh e^{-L}, and |q| >= 1 - (|a|+|c|)/R > 0.
    let mut l = y.norm().ln();
    let mut yh = y / y.norm();
    let mut xh = x / y.norm();
    let mut m = 0usize;
    let tail = |l: f64, m: usize| -> f64 {
        2.0 * (a.norm() + c.norm()) * (-l).exp() * 0.5f64.powi((n_direct + m) as i32)
    };
    while tail(l, m) > tol && m < 64 {
        let el = (-l).exp();
        let q = yh * yh + c * (el * el) - a * xh * el;
        let qn = q.norm();
        let l_next = 2.0 * l + qn.ln();
        xh = yh * el / qn;
        yh = q / qn;
        l = l_next;
        m += 1;
    }

    Ok(HenonGreenValue {
        value: l * 0.5f64.powi((n_direct + m) as i32),
        escaped: true,
        n_direct,
        n_renormalized: m,
        error_bound: tail(l, m),
    })
}
