//! Univariate complex polynomial roots.
//!
//! Closed forms handle degrees one and two; higher degrees use simultaneous
//! Aberth-Ehrlich iteration from a deterministic circular initialization, so
//! the returned root order is reproducible.  Vanishing leading coefficients
//! are reported as a degree drop rather than as spurious huge roots: callers
//! working on the projective line convert the drop into points at infinity.

use crate::{Error, Result};
use num_complex::Complex64;

/// Roots of a polynomial, plus how far its effective degree fell short of
/// the nominal one (leading coefficients that vanished).
#[derive(Clone, Debug)]
pub struct RootSet {
    /// Roots of the trimmed polynomial, multiplicity reflected by clustering.
    pub finite: Vec<Complex64>,
    /// Nominal degree minus effective degree.
    pub degree_drop: usize,
}

/// Relative threshold below which a leading coefficient is treated as zero.
const LEADING_EPS: f64 = 1e-14;

/// Convergence target for the simultaneous iteration.
const STEP_EPS: f64 = 1e-14;

const MAX_ITERATIONS: usize = 300;

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // Evaluate p and p' together; coeffs are ascending.
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn solve_linear(c0: Complex64, c1: Complex64) -> Vec<Complex64> {
    vec![-c0 / c1]
}

fn solve_quadratic(c0: Complex64, c1: Complex64, c2: Complex64) -> Vec<Complex64> {
    // Stable form: pick the sign that avoids cancellation in -b -+ sqrt(disc).
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    let plus = -c1 + disc;
    let minus = -c1 - disc;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    if big.norm() == 0.0 {
        // b = 0 and disc = 0: double root at the origin of the shifted form.
        let r = -c1 / (2.0 * c2);
        return vec![r, r];
    }
    let r1 = big / (2.0 * c2);
    let r2 = 2.0 * c0 / big;
    vec![r1, r2]
}

/// All complex roots of `coeffs[0] + coeffs[1] x + ... + coeffs[d] x^d`.
///
/// Leading coefficients smaller than `1e-14 * max |coeff|` are trimmed and
/// counted in `degree_drop`.  The all-zero polynomial is rejected.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<RootSet> {
    if coeffs.is_empty() {
        return Err(Error::Solver("empty coefficient list".into()));
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Solver(
            "zero polynomial has no well-defined root set".into(),
        ));
    }
    let nominal = coeffs.len() - 1;
    let mut top = nominal;
    while top > 0 && coeffs[top].norm() <= LEADING_EPS * scale {
        top -= 1;
    }
    if top == 0 {
        // Constant (nonzero, else a lower coefficient would carry the scale).
        return Ok(RootSet {
            finite: Vec::new(),
            degree_drop: nominal,
        });
    }
    let trimmed = &coeffs[..=top];
    let finite = match top {
        1 => solve_linear(trimmed[0], trimmed[1]),
        2 => solve_quadratic(trimmed[0], trimmed[1], trimmed[2]),
        _ => aberth_ehrlich(trimmed),
    };
    Ok(RootSet {
        finite,
        degree_drop: nominal - top,
    })
}

fn aberth_ehrlich(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();

    // Cauchy-type inclusion radius, with a fixed angular offset so real
    // symmetric polynomials do not start on a stalling symmetric orbit.
    let radius = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = if dp.norm() > 0.0 {
                p / dp
            } else {
                // Critical point: nudge off it deterministically.
                z[i] += Complex64::new(1e-8, 1e-8);
                continue;
            };
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 1e-300 { ratio / denom } else { ratio };
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= STEP_EPS {
            break;
        }
    }

    // Final Newton polish tightens simple roots to machine precision.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *zi);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.norm() < 1.0 {
                    *zi -= step;
                }
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sort_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn linear_and_quadratic_closed_forms() {
        let r = polynomial_roots(&[c(6.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(r.degree_drop, 0);
        assert!((r.finite[0] - c(-3.0, 0.0)).norm() < 1e-15);

        // x^2 - 5x + 6 = (x-2)(x-3)
        let r = polynomial_roots(&[c(6.0, 0.0), c(-5.0, 0.0), c(1.0, 0.0)]).unwrap();
        let roots = sort_by_re(r.finite);
        assert!((roots[0] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((roots[1] - c(3.0, 0.0)).norm() < 1e-14);

        // x^2 + 1 = (x-i)(x+i)
        let r = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut ims: Vec<f64> = r.finite.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(r.finite.iter().all(|z| z.re.abs() < 1e-14));
    }

    #[test]
    fn quadratic_cancellation_is_stable() {
        // x^2 - 1e8 x + 1: roots ~1e8 and ~1e-8; naive formula loses the
        // small one to cancellation.
        let r = polynomial_roots(&[c(1.0, 0.0), c(-1e8, 0.0), c(1.0, 0.0)]).unwrap();
        let small = r.finite.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        assert!((small - 1e-8).abs() < 1e-20);
    }

    #[test]
    fn quintic_with_integer_roots() {
        // (x-1)(x-2)(x-3)(x-4)(x-5)
        let coeffs = [
            c(-120.0, 0.0),
            c(274.0, 0.0),
            c(-225.0, 0.0),
            c(85.0, 0.0),
            c(-15.0, 0.0),
            c(1.0, 0.0),
        ];
        let r = polynomial_roots(&coeffs).unwrap();
        let roots = sort_by_re(r.finite);
        for (got, want) in roots.iter().zip(1..=5) {
            assert!(
                (got - c(want as f64, 0.0)).norm() < 1e-9,
                "got {got}, want {want}"
            );
        }
    }

    #[test]
    fn roots_of_unity() {
        let d = 16;
        let mut coeffs = vec![c(0.0, 0.0); d + 1];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[d] = c(1.0, 0.0);
        let r = polynomial_roots(&coeffs).unwrap();
        assert_eq!(r.finite.len(), d);
        for root in &r.finite {
            assert!((root.norm() - 1.0).abs() < 1e-12);
            let (p, _) = horner(&coeffs, *root);
            assert!(p.norm() < 1e-12);
        }
        // All d roots are distinct.
        for i in 0..d {
            for j in (i + 1)..d {
                assert!((r.finite[i] - r.finite[j]).norm() > 0.1);
            }
        }
    }

    #[test]
    fn degree_drop_counts_roots_at_infinity() {
        // 0 x^3 + 0 x^2 + x + 1 declared as degree 3.
        let r = polynomial_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.degree_drop, 2);
        assert_eq!(r.finite.len(), 1);
        assert!((r.finite[0] + c(1.0, 0.0)).norm() < 1e-14);

        let r = polynomial_roots(&[c(5.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.degree_drop, 1);
        assert!(r.finite.is_empty());

        assert!(polynomial_roots(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn double_root_clusters() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let r = polynomial_roots(&[c(2.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut near_one = 0;
        let mut near_minus_two = 0;
        for root in &r.finite {
            if (root - c(1.0, 0.0)).norm() < 1e-6 {
                near_one += 1;
            }
            if (root - c(-2.0, 0.0)).norm() < 1e-10 {
                near_minus_two += 1;
            }
        }
        assert_eq!(near_one, 2);
        assert_eq!(near_minus_two, 1);
    }

    #[test]
    fn random_polynomials_reconstruct() {
        let mut gen = SplitMix64::substream(314, 0);
        for _ in 0..20 {
            let d = 8;
            let coeffs: Vec<Complex64> = (0..=d).map(|_| gen.next_complex_gaussian()).collect();
            let r = polynomial_roots(&coeffs).unwrap();
            assert_eq!(r.finite.len() + r.degree_drop, d);
            // Rebuild lead * prod (x - r_i) and compare coefficients.
            let mut rebuilt = vec![Complex64::new(0.0, 0.0); 1];
            rebuilt[0] = coeffs[d - r.degree_drop];
            for root in &r.finite {
                let mut next = vec![Complex64::new(0.0, 0.0); rebuilt.len() + 1];
                for (j, &b) in rebuilt.iter().enumerate() {
                    next[j + 1] += b;
                    next[j] -= b * root;
                }
                rebuilt = next;
            }
            let scale = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for (got, want) in rebuilt.iter().zip(coeffs.iter()) {
                assert!(
                    (got - want).norm() < 1e-7 * scale.max(1.0),
                    "rebuilt {got} vs {want}"
                );
            }
        }
    }
}
