//! Plain-text format for polynomials and maps.
//!
//! One polynomial per string: terms joined by `+`, each term a product of
//! an optional complex coefficient and variable powers, for example
//!
//! ```text
//! (1,0)*z0^2 + (0,-0.5)*z1*z2 + z2^2
//! ```
//!
//! Coefficients are `(re,im)` pairs or plain real literals (`-3`, `1e-2`);
//! a term without a coefficient factor means coefficient 1.  Variables are
//! `z0..z{vars-1}`, `^1` may be omitted, and repeated variable factors
//! multiply.  Signs live in the coefficients: terms are joined by `+` only.
//!
//! A map is one component polynomial per line (or per list entry), all
//! homogeneous of the same degree in the same variables.

use num_complex::Complex64;

use crate::poly::{AffinePolynomial, HomogeneousPolynomial, LiftedEndomorphism, Monomial};
use crate::{Error, Result};

fn bad(text: &str, what: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("cannot parse `{text}`: {what}"))
}

/// Split at top-level occurrences of `sep`: separators inside parentheses
/// are skipped, and a `+` immediately following `e`/`E` is part of a float
/// exponent (`1e+3`), not a term boundary.
fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    let mut prev = ' ';
    for ch in s.chars() {
        if ch == '(' {
            depth += 1;
        } else if ch == ')' {
            depth = depth.saturating_sub(1);
        }
        if ch == sep && depth == 0 && !(sep == '+' && matches!(prev, 'e' | 'E')) {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
        if !ch.is_whitespace() {
            prev = ch;
        }
    }
    out.push(cur);
    out
}

/// A complex scalar: `(re,im)` or a plain real literal.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s = text.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (re, im) = inner
            .split_once(',')
            .ok_or_else(|| bad(s, "expected `(re,im)`"))?;
        let re: f64 = re.trim().parse().map_err(|e| bad(s, format!("real part: {e}")))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|e| bad(s, format!("imaginary part: {e}")))?;
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|e| bad(s, e))?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// One term over `vars` variables.
pub fn parse_monomial(text: &str, vars: usize) -> Result<Monomial> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad(text, "empty term"));
    }
    let mut coefficient = Complex64::new(1.0, 0.0);
    let mut saw_coefficient = false;
    let mut exponents = vec![0u32; vars];
    for factor in split_top(trimmed, '*') {
        let f = factor.trim();
        if f.is_empty() {
            return Err(bad(trimmed, "empty factor"));
        }
        if let Some(rest) = f.strip_prefix('z') {
            let (index, exponent) = match rest.split_once('^') {
                Some((i, e)) => (i, Some(e)),
                None => (rest, None),
            };
            let j: usize = index
                .trim()
                .parse()
                .map_err(|_| bad(trimmed, format!("bad variable `{f}`")))?;
            if j >= vars {
                return Err(bad(
                    trimmed,
                    format!("variable z{j} out of range: the polynomial has {vars} variables"),
                ));
            }
            let e: u32 = match exponent {
                Some(e) => e
                    .trim()
                    .parse()
                    .map_err(|_| bad(trimmed, format!("bad exponent in `{f}`")))?,
                None => 1,
            };
            exponents[j] += e;
        } else {
            if saw_coefficient {
                return Err(bad(trimmed, "more than one coefficient factor"));
            }
            saw_coefficient = true;
            coefficient = parse_complex(f)?;
        }
    }
    Ok(Monomial::new(coefficient, exponents))
}

fn parse_terms(text: &str, vars: usize) -> Result<Vec<Monomial>> {
    if text.trim().is_empty() {
        return Err(bad(text, "empty polynomial"));
    }
    split_top(text, '+')
        .iter()
        .map(|t| parse_monomial(t, vars))
        .collect()
}

/// A homogeneous polynomial in `vars` variables; the degree is inferred
/// from the first term and every term must match it.
pub fn parse_homogeneous_polynomial(text: &str, vars: usize) -> Result<HomogeneousPolynomial> {
    let terms = parse_terms(text, vars)?;
    let degree = terms[0].total_degree();
    if let Some(t) = terms.iter().find(|t| t.total_degree() != degree) {
        return Err(bad(
            text,
            format!(
                "not homogeneous: term degrees {} and {} differ",
                degree,
                t.total_degree()
            ),
        ));
    }
    HomogeneousPolynomial::new(vars, degree, terms)
}

/// A polynomial in `vars` affine variables (mixed degrees allowed).
pub fn parse_affine_polynomial(text: &str, vars: usize) -> Result<AffinePolynomial> {
    AffinePolynomial::new(vars, parse_terms(text, vars)?)
}

/// An endomorphism of `P^{n-1}` from `n` component lines, all homogeneous
/// of one degree; the nondegeneracy certificate is computed on construction.
pub fn parse_endomorphism(components: &[String]) -> Result<LiftedEndomorphism> {
    if components.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a map of P^k needs k+1 >= 2 component polynomials, got {}",
            components.len()
        )));
    }
    let vars = components.len();
    let polys = components
        .iter()
        .map(|line| parse_homogeneous_polynomial(line, vars))
        .collect::<Result<Vec<_>>>()?;
    LiftedEndomorphism::from_components(polys)
}

/// Render a complex scalar in the `(re,im)` form accepted by the parser.
pub fn format_complex(c: Complex64) -> String {
    format!("({},{})", c.re, c.im)
}

fn format_terms(terms: &[Monomial]) -> String {
    terms
        .iter()
        .map(|t| {
            let mut s = format_complex(t.coefficient);
            for (j, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    s.push_str(&format!("*z{j}^{e}"));
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Render a homogeneous polynomial in the text format; parses back to an
/// equal polynomial.
pub fn format_homogeneous_polynomial(p: &HomogeneousPolynomial) -> String {
    format_terms(p.terms())
}

/// Render an affine polynomial in the text format.
pub fn format_affine_polynomial(p: &AffinePolynomial) -> String {
    format_terms(p.terms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::make_power_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals_parse_in_both_forms() {
        assert_eq!(parse_complex("(1,-2.5)").unwrap(), c(1.0, -2.5));
        assert_eq!(parse_complex(" ( 1e+3 , -0.5 ) ").unwrap(), c(1000.0, -0.5));
        assert_eq!(parse_complex("-3").unwrap(), c(-3.0, 0.0));
        assert_eq!(parse_complex("2.5e-2").unwrap(), c(0.025, 0.0));
        assert!(parse_complex("(1)").is_err());
        assert!(parse_complex("one").is_err());
    }

    #[test]
    fn monomials_accumulate_exponents_and_default_coefficients() {
        let m = parse_monomial("(0,1)*z0^2*z1", 3).unwrap();
        assert_eq!(m.coefficient, c(0.0, 1.0));
        assert_eq!(m.exponents, vec![2, 1, 0]);

        let m = parse_monomial("z1*z1*z2^3", 3).unwrap();
        assert_eq!(m.coefficient, c(1.0, 0.0));
        assert_eq!(m.exponents, vec![0, 2, 3]);

        let m = parse_monomial("7", 2).unwrap();
        assert_eq!(m.exponents, vec![0, 0]);
        assert_eq!(m.coefficient, c(7.0, 0.0));

        assert!(parse_monomial("z5", 2).is_err());
        assert!(parse_monomial("(1,0)*(2,0)", 2).is_err());
        assert!(parse_monomial("z0^x", 2).is_err());
        assert!(parse_monomial("", 2).is_err());
    }

    #[test]
    fn scientific_notation_plus_is_not_a_term_separator() {
        let p = parse_homogeneous_polynomial("1e+0*z0^2 + (1e+1,0)*z1^2", 2).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.degree(), 2);
        let v = p.eval(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((v - c(11.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn homogeneous_parse_rejects_mixed_degrees() {
        let err = parse_homogeneous_polynomial("z0^2 + z1", 2).unwrap_err();
        assert!(err.to_string().contains("not homogeneous"), "{err}");
    }

    #[test]
    fn affine_polynomials_allow_mixed_degrees() {
        let p = parse_affine_polynomial("z0^2 + (-1,0)*z1 + 0.5", 2).unwrap();
        assert_eq!(p.total_degree(), 2);
        let v = p.eval(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert!((v - c(1.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn endomorphism_round_trips_through_the_text_format() {
        let map = make_power_map(2, 3).unwrap();
        let lines: Vec<String> = map
            .components()
            .iter()
            .map(format_homogeneous_polynomial)
            .collect();
        assert_eq!(lines[0], "(1,0)*z0^3");
        let back = parse_endomorphism(&lines).unwrap();
        assert_eq!(back.degree(), 3);
        assert_eq!(back.k(), 2);
        let z = [c(0.3, 0.1), c(-0.2, 0.8), c(1.0, -0.4)];
        let a = map.eval(&z);
        let b = back.eval(&z);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn degenerate_text_maps_are_rejected() {
        // Both components share the factor z0: the common zero [0:1] makes
        // this a rational map, not an endomorphism — the certificate fails.
        let lines = vec!["z0^2".to_string(), "z0*z1".to_string()];
        assert!(parse_endomorphism(&lines).is_err());
        assert!(parse_endomorphism(&["z0^2".to_string()]).is_err());
    }
}
