//! Product-structure endomorphisms of P^k.
//!
//! P^k is the k-fold symmetric product of P^1: an unordered k-tuple of points
//! `[x_i : y_i]` corresponds to the coefficient vector of the binary form
//! `prod_i (x_i T + y_i)`.  A rational self-map h of P^1 therefore induces an
//! endomorphism f of P^k acting on unordered tuples coordinatewise, and f is
//! polynomial in the symmetric-product coordinates: each coefficient of the
//! image form is a symmetric function of the inputs, hence a polynomial in
//! the elementary symmetric functions.  This module carries out that
//! elimination symbolically and returns the lifted endomorphism.

use super::{HomogeneousPolynomial, LiftedEndomorphism, Monomial};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Sparse polynomial in `k` affine variables, keyed by exponent vector.  The
/// BTreeMap key order (lexicographic on the exponent vector) doubles as the
/// monomial order used by the symmetric-function elimination.
type MPoly = BTreeMap<Vec<u32>, Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn mp_const(k: usize, c: Complex64) -> MPoly {
    let mut p = MPoly::new();
    if c != ZERO {
        p.insert(vec![0; k], c);
    }
    p
}

fn mp_add_assign(p: &mut MPoly, q: &MPoly) {
    for (e, c) in q {
        let entry = p.entry(e.clone()).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            p.remove(e);
        }
    }
}

fn mp_mul(a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = MPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let entry = out.entry(e).or_insert(ZERO);
            *entry += ca * cb;
        }
    }
    out.retain(|_, c| *c != ZERO);
    out
}

fn mp_axpy(p: &mut MPoly, scale: Complex64, q: &MPoly) {
    for (e, c) in q {
        let entry = p.entry(e.clone()).or_insert(ZERO);
        *entry += scale * c;
        if *entry == ZERO {
            p.remove(e);
        }
    }
}

fn mp_max_abs(p: &MPoly) -> f64 {
    p.values().map(|c| c.norm()).fold(0.0, f64::max)
}

fn mp_cleanup(p: &mut MPoly, threshold: f64) {
    p.retain(|_, c| c.norm() > threshold);
}

/// The univariate polynomial `coeffs` evaluated at variable `var` of `k`.
fn univariate_in(coeffs: &[Complex64], var: usize, k: usize) -> MPoly {
    let mut p = MPoly::new();
    for (e, &c) in coeffs.iter().enumerate() {
        if c != ZERO {
            let mut exps = vec![0u32; k];
            exps[var] = e as u32;
            p.insert(exps, c);
        }
    }
    p
}

/// Elementary symmetric polynomial `sigma_j` in `k` variables.
fn sigma(j: usize, k: usize) -> MPoly {
    let mut p = MPoly::new();
    let mut choose = vec![0usize; j];
    // Iterate over j-subsets of {0..k} in lexicographic order.
    fn rec(start: usize, slot: usize, j: usize, k: usize, choose: &mut Vec<usize>, p: &mut MPoly) {
        if slot == j {
            let mut exps = vec![0u32; k];
            for &v in choose.iter() {
                exps[v] = 1;
            }
            p.insert(exps, Complex64::new(1.0, 0.0));
            return;
        }
        for v in start..k {
            choose[slot] = v;
            rec(v + 1, slot + 1, j, k, choose, p);
        }
    }
    if j == 0 {
        return mp_const(k, Complex64::new(1.0, 0.0));
    }
    rec(0, 0, j, k, &mut choose, &mut p);
    p
}

/// Expand the product `prod_t sigma_t^{a_t}` as a polynomial in the x's.
fn sigma_monomial(a: &[u32], k: usize) -> MPoly {
    let mut out = mp_const(k, Complex64::new(1.0, 0.0));
    for (t, &e) in a.iter().enumerate() {
        let s = sigma(t + 1, k);
        for _ in 0..e {
            out = mp_mul(&out, &s);
        }
    }
    out
}

/// Write a symmetric polynomial as a polynomial in the elementary symmetric
/// functions by repeated leading-term subtraction.  Returns pairs
/// `(a, coeff)` meaning `coeff * prod_t sigma_t^{a_t}` (`a` has length `k`;
/// the empty product is the constant term).  Fails with an invariant
/// violation if the input is not symmetric.
fn decompose_symmetric(p: &MPoly, k: usize) -> Result<Vec<(Vec<u32>, Complex64)>> {
    let scale = mp_max_abs(p).max(1.0);
    let threshold = 1e-10 * scale;
    let mut rem = p.clone();
    mp_cleanup(&mut rem, threshold);
    let mut out = Vec::new();
    while let Some((lead_exps, &lead_coeff)) = rem.iter().next_back() {
        let lead_exps = lead_exps.clone();
        // A symmetric polynomial's lexicographic leading exponent is a
        // partition (non-increasing); anything else means the intermediate
        // lost symmetry.
        if lead_exps.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invariant(format!(
                "symmetric reduction hit non-partition leading exponent {lead_exps:?}"
            )));
        }
        let mut a = vec![0u32; k];
        for t in 0..k {
            let next = if t + 1 < k { lead_exps[t + 1] } else { 0 };
            a[t] = lead_exps[t] - next;
        }
        let expansion = sigma_monomial(&a, k);
        mp_axpy(&mut rem, -lead_coeff, &expansion);
        rem.remove(&lead_exps); // force progress against roundoff residue
        mp_cleanup(&mut rem, threshold);
        out.push((a, lead_coeff));
    }
    Ok(out)
}

/// Coefficients of the image binary form: for each `j`,
/// `c'_j = sum_{|S| = j} prod_{i in S} n(x_i) prod_{i not in S} m(x_i)`,
/// computed by one pass of dynamic programming over the variables.
fn image_form_coefficients(num: &[Complex64], den: &[Complex64], k: usize) -> Vec<MPoly> {
    let mut e: Vec<MPoly> = vec![MPoly::new(); k + 1];
    e[0] = mp_const(k, Complex64::new(1.0, 0.0));
    for i in 0..k {
        let n_i = univariate_in(num, i, k);
        let m_i = univariate_in(den, i, k);
        for j in (1..=i + 1).rev() {
            let keep = mp_mul(&e[j], &m_i);
            let take = mp_mul(&e[j - 1], &n_i);
            let mut
                merged = keep;
            mp_add_assign(&mut merged, &take);
            e[j] = merged;
        }
        e[0] = mp_mul(&e[0], &m_i);
    }
    e
}

fn trim_trailing_zeros(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut v = coeffs.to_vec();
    while v.len() > 1 && *v.last().unwrap() == ZERO {
        v.pop();
    }
    v
}

fn build_components(
    num: &[Complex64],
    den: &[Complex64],
    k: usize,
    d: u32,
) -> Result<Vec<HomogeneousPolynomial>> {
    let forms = image_form_coefficients(num, den, k);
    let vars = k + 1;
    let mut components = Vec::with_capacity(vars);
    for form in &forms {
        let sigma_terms = decompose_symmetric(form, k)?;
        let mut terms = Vec::with_capacity(sigma_terms.len());
        for (a, coeff) in sigma_terms {
            let weight: u32 = a.iter().sum();
            if weight > d {
                return Err(Error::Invariant(format!(
                    "symmetric image needs sigma-degree {weight} > map degree {d}"
                )));
            }
            let mut exps = Vec::with_capacity(vars);
            exps.push(d - weight);
            exps.extend_from_slice(&a);
            terms.push(Monomial::new(coeff, exps));
        }
        components.push(HomogeneousPolynomial::new(vars, d, terms)?);
    }
    Ok(components)
}

/// Endomorphism of P^k induced by a polynomial self-map of P^1.
///
/// `h` holds the coefficients of the one-variable polynomial in ascending
/// order; its exact degree (at least 2) becomes the degree of the induced
/// map.  For `k = 1` the result is the homogenization of `h` itself.
pub fn make_ueda_map(h: &[Complex64], k: usize) -> Result<LiftedEndomorphism> {
    let h = trim_trailing_zeros(h);
    let d = h.len() as u32 - 1;
    if d < 2 {
        return Err(Error::InvalidArgument(
            "product construction needs a polynomial of degree >= 2".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let den = vec![Complex64::new(1.0, 0.0)];
    let components = build_components(&h, &den, k, d)?;
    // A polynomial h of exact degree d induces a genuine endomorphism: the
    // homogenized pair (numerator, y^d) only vanishes together at the origin.
    LiftedEndomorphism::with_symbolic_certificate(components)
}

/// Rational variant: `h = num/den` in lowest terms, degree
/// `d = max(deg num, deg den) >= 2`.  Nondegeneracy of the induced lift is
/// certified probabilistically.
pub fn make_ueda_map_rational(
    num: &[Complex64],
    den: &[Complex64],
    k: usize,
) -> Result<LiftedEndomorphism> {
    let num = trim_trailing_zeros(num);
    let den = trim_trailing_zeros(den);
    if den.iter().all(|c| *c == ZERO) {
        return Err(Error::InvalidArgument("denominator is zero".into()));
    }
    let d = (num.len().max(den.len()) as u32).saturating_sub(1);
    if d < 2 {
        return Err(Error::InvalidArgument(
            "product construction needs degree >= 2".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let components = build_components(&num, &den, k, d)?;
    LiftedEndomorphism::from_components(components)
}

/// The symmetric-product chart map: send points `[x_i : y_i]` of P^1 to the
/// coefficient vector of `prod_i (x_i T + y_i)`, a point of P^k.  Index `j`
/// of the result carries the coefficient of `T^j`.
pub fn symmetrize_points(points: &[(Complex64, Complex64)]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &(x, y) in points {
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            next[j] += c * y;
            next[j + 1] += c * x;
        }
        coeffs = next;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::super::eval_map;
    use super::*;
    use crate::rng::SplitMix64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn projectively_close(u: &[Complex64], v: &[Complex64], tol: f64) -> bool {
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
        (1.0 - ip.norm() / (nu * nv)).abs() < tol
    }

    #[test]
    fn square_map_on_p2_has_classical_components() {
        // h(x) = x^2, k = 2: (s0, s1, s2) -> (s0^2, s1^2 - 2 s0 s2, s2^2).
        let f = make_ueda_map(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 2).unwrap();
        let expected = [
            "(1.0,0.0)*z0^2*z1^0*z2^0",
            "(-2.0,0.0)*z0^1*z1^0*z2^1 + (1.0,0.0)*z0^0*z1^2*z2^0",
            "(1.0,0.0)*z0^0*z1^0*z2^2",
        ];
        for (comp, want) in f.components().iter().zip(expected) {
            assert_eq!(comp.to_string(), want);
        }
    }

    #[test]
    fn k1_reduces_to_homogenization() {
        // h(x) = x^2 + c: F = (s0^2, c s0^2 + s1^2).
        let cc = c(0.3, -0.2);
        let f = make_ueda_map(&[cc, c(0.0, 0.0), c(1.0, 0.0)], 1).unwrap();
        let z = [c(1.0, 0.0), c(0.7, 0.4)];
        let w = eval_map(&f, &z).unwrap();
        assert!((w[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w[1] - (z[1] * z[1] + cc)).norm() < 1e-15);
    }

    #[test]
    fn semiconjugacy_with_coordinatewise_action() {
        // f(pi(x1..xk)) is projectively pi(h(x1)..h(xk)).
        let coeffs = [c(0.3, -0.2), c(0.0, 0.0), c(1.0, 0.0)]; // x^2 + c
        for k in [2usize, 3] {
            let f = make_ueda_map(&coeffs, k).unwrap();
            let mut gen = SplitMix64::substream(2024, k as u64);
            for _ in 0..100 {
                let xs: Vec<Complex64> = (0..k).map(|_| gen.next_complex_gaussian()).collect();
                let one = c(1.0, 0.0);
                let pi_x = symmetrize_points(
                    &xs.iter().map(|&x| (x, one)).collect::<Vec<_>>(),
                );
                let hx: Vec<(Complex64, Complex64)> = xs
                    .iter()
                    .map(|&x| (x * x + coeffs[0], one))
                    .collect();
                let pi_hx = symmetrize_points(&hx);
                let f_pi_x = eval_map(&f, &pi_x).unwrap();
                assert!(
                    projectively_close(&f_pi_x, &pi_hx, 1e-9),
                    "semiconjugacy failed for k={k}"
                );
            }
        }
    }

    #[test]
    fn rational_reciprocal_square() {
        // h = 1/x^2 on P^1: [s0 : s1] -> [s1^2 : s0^2].
        let f = make_ueda_map_rational(
            &[c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            1,
        )
        .unwrap();
        let w = eval_map(&f, &[c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        // Affine s = s1/s0 = 3 maps to 1/9.
        let affine = w[1] / w[0];
        assert!((affine - c(1.0 / 9.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degree_one_rejected() {
        assert!(make_ueda_map(&[c(1.0, 0.0), c(2.0, 0.0)], 2).is_err());
    }

    #[test]
    fn nonsymmetric_input_trips_invariant() {
        // x_1 alone is not symmetric in two variables.
        let mut p = MPoly::new();
        p.insert(vec![1, 0], c(1.0, 0.0));
        let err = decompose_symmetric(&p, 2).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn symmetrize_is_projective_product_form() {
        // Two points 4, 9 (affine): form (T+... ) coefficients (36, 13, 1)?
        // prod (x_i T + 1) with x = 4, 9: (4T+1)(9T+1) = 36T^2 + 13T + 1.
        let one = c(1.0, 0.0);
        let coeffs = symmetrize_points(&[(c(4.0, 0.0), one), (c(9.0, 0.0), one)]);
        assert_eq!(coeffs[0], c(1.0, 0.0));
        assert_eq!(coeffs[1], c(13.0, 0.0));
        assert_eq!(coeffs[2], c(36.0, 0.0));
    }
}
