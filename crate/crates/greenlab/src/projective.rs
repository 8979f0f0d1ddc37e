//! Points of complex projective space, Fubini-Study geometry, and
//! deterministic samplers.

use crate::rng::SplitMix64;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// A point of P^k held by a unit-norm representative, together with the
/// log-norm discarded at normalization (the gauge), so the original vector
/// is recoverable as `exp(gauge) * coords`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
    gauge: f64,
}

impl ProjectivePoint {
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// `log ||z||` of the vector that was normalized to produce this point.
    pub fn gauge(&self) -> f64 {
        self.gauge
    }

    pub fn k(&self) -> usize {
        self.coords.len() - 1
    }

    /// Affine coordinates in the chart `z_chart = 1`, or `None` when the
    /// chart coordinate vanishes.
    pub fn affine_chart(&self, chart: usize) -> Option<Vec<Complex64>> {
        let pivot = self.coords[chart];
        if pivot.norm() == 0.0 {
            return None;
        }
        Some(
            self.coords
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != chart)
                .map(|(_, c)| c / pivot)
                .collect(),
        )
    }
}

fn vec_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit representative `z/||z||` of a nonzero vector, with the discarded
/// log-norm kept as the gauge.  Overflow-safe: the vector is pre-scaled by
/// its largest component magnitude, so inputs up to ~1e308 normalize exactly.
pub fn normalize(z: &[Complex64]) -> Result<ProjectivePoint> {
    let m = z
        .iter()
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0f64, f64::max);
    if m == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !m.is_finite() {
        return Err(Error::InvalidArgument(
            "non-finite coordinate in projective point".into(),
        ));
    }
    let scaled: Vec<Complex64> = z.iter().map(|c| c / m).collect();
    let n = vec_norm(&scaled);
    Ok(ProjectivePoint {
        coords: scaled.iter().map(|c| c / n).collect(),
        gauge: m.ln() + n.ln(),
    })
}

/// Fubini-Study distance `arccos |<p, q>|`, valued in `[0, pi/2]`.
pub fn fs_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    let ip: Complex64 = p
        .coords
        .iter()
        .zip(&q.coords)
        .map(|(a, b)| a * b.conj())
        .sum();
    ip.norm().clamp(0.0, 1.0).acos()
}

/// Fubini-Study-uniform sample of `count` points of P^k.  Sample `i` draws
/// from substream `i` of `seed`, so the batch is reproducible and
/// independent of scheduling.
pub fn sample_fs_uniform(count: usize, k: usize, seed: u64) -> Vec<ProjectivePoint> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut gen = SplitMix64::substream(seed, i as u64);
            loop {
                let z: Vec<Complex64> = (0..=k).map(|_| gen.next_complex_gaussian()).collect();
                if let Ok(p) = normalize(&z) {
                    return p;
                }
            }
        })
        .collect()
}

/// A batch of ball samples plus the rejection statistics of the sampler.
#[derive(Clone, Debug)]
pub struct BallSample {
    pub points: Vec<ProjectivePoint>,
    /// Fraction of raw draws that fell outside the ball and were retried.
    pub rejection_rate: f64,
}

/// Unitary matrix whose first column is the unit vector `center`; the
/// remaining columns form an orthonormal basis of the orthogonal complement.
pub(crate) fn unitary_with_first_column(center: &[Complex64]) -> DMatrix<Complex64> {
    let n = center.len();
    let one = Complex64::new(1.0, 0.0);
    let c0 = center[0];
    let alpha = if c0.norm() > 0.0 { c0 / c0.norm() } else { one };
    // Rotate so the pivot is real, reflect e_0 onto the rotated center, then
    // restore the phase: U = alpha * (I - 2 v v* / v*v), v = e_0 - center'.
    let center_rot: Vec<Complex64> = center.iter().map(|c| c * alpha.conj()).collect();
    let mut v: Vec<Complex64> = center_rot.iter().map(|c| -c).collect();
    v[0] += one;
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut u = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { one } else { Complex64::new(0.0, 0.0) };
        if vv > 1e-30 {
            delta - v[i] * v[j].conj() * (2.0 / vv)
        } else {
            delta
        }
    });
    u *= alpha;
    u
}

/// Sample `count` points of the Fubini-Study ball of radius `r` around
/// `center` (`0 < r < pi/2`): Gaussian draws in the unitary affine chart
/// centered there, rejecting draws that land outside the ball.
pub fn sample_fs_ball(
    center: &ProjectivePoint,
    r: f64,
    count: usize,
    seed: u64,
) -> Result<BallSample> {
    if !(r > 0.0 && r < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "ball radius {r} outside (0, pi/2)"
        )));
    }
    let k = center.k();
    let chart_radius = r.tan();
    let sigma = chart_radius / (2.0 * (k as f64).sqrt());
    let u = unitary_with_first_column(center.coords());

    let draws: Vec<(ProjectivePoint, u64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut gen = SplitMix64::substream(seed, i as u64);
            let mut attempts = 0u64;
            loop {
                attempts += 1;
                let w: Vec<Complex64> = (0..k)
                    .map(|_| gen.next_complex_gaussian() * sigma)
                    .collect();
                let wn = vec_norm(&w);
                if wn > chart_radius {
                    if attempts > 10_000 {
                        // Unreachable for r in range; keep the loop total.
                        attempts -= 1;
                        continue;
                    }
                    continue;
                }
                let scale = 1.0 / (1.0 + wn * wn).sqrt();
                let mut rep = Vec::with_capacity(k + 1);
                rep.push(Complex64::new(scale, 0.0));
                rep.extend(w.iter().map(|c| c * scale));
                let coords: Vec<Complex64> = (0..=k)
                    .map(|row| (0..=k).map(|col| u[(row, col)] * rep[col]).sum())
                    .collect();
                match normalize(&coords) {
                    Ok(p) => return (p, attempts),
                    Err(_) => continue,
                }
            }
        })
        .collect();

    let total_attempts: u64 = draws.iter().map(|(_, a)| a).sum();
    let points = draws.into_iter().map(|(p, _)| p).collect();
    Ok(BallSample {
        points,
        rejection_rate: 1.0 - count as f64 / total_attempts.max(1) as f64,
    })
}

/// Fubini-Study volume of a ball of radius `r` in P^k, normalized so the
/// whole space has volume one.
pub fn fs_ball_volume(k: usize, r: f64) -> f64 {
    r.sin().powi(2 * k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            normalize(&[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::ZeroVector)
        ));
    }

    /// Projective equality modulo phase: compare after dividing by the first
    /// nonzero coordinate.
    fn same_projective_point(p: &ProjectivePoint, q: &ProjectivePoint, tol: f64) -> bool {
        let pivot = p.coords().iter().position(|z| z.norm() > 1e-12).unwrap();
        let (a, b) = (p.coords()[pivot], q.coords()[pivot]);
        if b.norm() < 1e-12 {
            return false;
        }
        p.coords()
            .iter()
            .zip(q.coords())
            .all(|(x, y)| (x / a - y / b).norm() < tol)
    }

    #[test]
    fn normalize_keeps_representative_and_gauge() {
        let p = normalize(&[c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!((p.coords()[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((p.coords()[1] - c(0.8, 0.0)).norm() < 1e-15);
        assert!((p.gauge() - 5.0f64.ln()).abs() < 1e-15);
        let n: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalize_is_overflow_safe() {
        let p = normalize(&[c(200f64.exp(), 0.0), c(0.0, 0.0)]).unwrap();
        assert!((p.coords()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.gauge() - 200.0).abs() < 1e-12);
        // Beyond the naive ||z||^2 overflow threshold.
        let p = normalize(&[c(1e300, 0.0), c(1e300, 0.0)]).unwrap();
        assert!(p.coords().iter().all(|z| z.norm().is_finite()));
        assert!((p.gauge() - (1e300f64.ln() + 0.5 * 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn normalize_inverts_via_gauge() {
        let z = [c(0.3, -1.2), c(2.0, 0.7), c(-0.4, 0.0)];
        let p = normalize(&z).unwrap();
        let scale = p.gauge().exp();
        for (orig, unit) in z.iter().zip(p.coords()) {
            assert!((orig - unit * scale).norm() <= 1e-14 * orig.norm().max(1.0));
        }
    }

    #[test]
    fn normalize_is_scale_invariant() {
        let z = [c(0.0, 2.0), c(2.0, -2.0)];
        let lambda = c(1.0, 2.0);
        let lz: Vec<Complex64> = z.iter().map(|v| v * lambda).collect();
        let p = normalize(&z).unwrap();
        let q = normalize(&lz).unwrap();
        assert!(same_projective_point(&p, &q, 1e-14));
    }

    #[test]
    fn fs_distance_basics() {
        let e0 = normalize(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = normalize(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(fs_distance(&e0, &e0) < 1e-7);
        assert!((fs_distance(&e0, &e1) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let p = normalize(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((fs_distance(&e0, &p) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn fs_uniform_first_coordinate_moment() {
        // E |z_0|^2 = 1/(k+1).
        let pts = sample_fs_uniform(100_000, 1, 7);
        let mean: f64 =
            pts.iter().map(|p| p.coords()[0].norm_sqr()).sum::<f64>() / pts.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        let pts = sample_fs_uniform(60_000, 2, 8);
        let mean: f64 =
            pts.iter().map(|p| p.coords()[0].norm_sqr()).sum::<f64>() / pts.len() as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn fs_uniform_is_deterministic() {
        let a = sample_fs_uniform(100, 2, 999);
        let b = sample_fs_uniform(100, 2, 999);
        assert_eq!(a, b);
    }

    #[test]
    fn ball_samples_stay_in_ball() {
        let center = normalize(&[c(0.3, 0.1), c(-0.5, 0.9), c(0.2, 0.0)]).unwrap();
        let r = 0.05;
        let batch = sample_fs_ball(&center, r, 2_000, 31).unwrap();
        assert_eq!(batch.points.len(), 2_000);
        for p in &batch.points {
            assert!(fs_distance(&center, p) <= r + 1e-12);
        }
        assert!(batch.rejection_rate < 0.9);
        // Boundary region is actually explored: some sample beyond 0.8 r.
        let max_d = batch
            .points
            .iter()
            .map(|p| fs_distance(&center, p))
            .fold(0.0, f64::max);
        assert!(max_d > 0.8 * r, "max distance {max_d}");
    }

    #[test]
    fn ball_radius_is_validated() {
        let center = normalize(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(sample_fs_ball(&center, 0.0, 10, 1).is_err());
        assert!(sample_fs_ball(&center, 1.6, 10, 1).is_err());
    }

    #[test]
    fn unitary_chart_columns_are_orthonormal() {
        let center = normalize(&[c(0.0, 0.0), c(0.3, -0.4), c(0.5, 0.1)]).unwrap();
        let u = unitary_with_first_column(center.coords());
        for (i, cc) in center.coords().iter().enumerate() {
            assert!((u[(i, 0)] - cc).norm() < 1e-12, "first column is the center");
        }
        for a in 0..3 {
            for b in 0..3 {
                let ip: Complex64 = (0..3).map(|r| u[(r, a)] * u[(r, b)].conj()).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip.norm() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_volume_formula_matches_monte_carlo() {
        // Fraction of FS-uniform points inside B(center, r) is sin^2k(r).
        let center = normalize(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = 0.9;
        let pts = sample_fs_uniform(200_000, 1, 77);
        let inside = pts
            .iter()
            .filter(|p| fs_distance(&center, p) <= r)
            .count() as f64
            / pts.len() as f64;
        let predicted = fs_ball_volume(1, r);
        assert!(
            (inside - predicted).abs() < 0.005,
            "mc {inside} vs formula {predicted}"
        );
    }
}
