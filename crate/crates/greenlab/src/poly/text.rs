//! Text round trip for sparse polynomials.
//!
//! Each term prints as `(re,im)*z0^e0*z1^e1*...` with every variable listed,
//! terms joined by ` + `.  Coefficients use the shortest representation that
//! parses back to the same float, so printing then parsing is exact.

use super::{AffinePolynomial, HomogeneousPolynomial, LiftedEndomorphism, Monomial};
use crate::{Error, Result};
use num_complex::Complex64;
use std::fmt;

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Monomial], vars: usize) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "(0,0)*{}", zero_exponents(vars));
    }
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        write!(f, "({:?},{:?})", t.coefficient.re, t.coefficient.im)?;
        for (v, &e) in t.exponents.iter().enumerate() {
            write!(f, "*z{v}^{e}")?;
        }
    }
    Ok(())
}

fn zero_exponents(vars: usize) -> String {
    (0..vars)
        .map(|v| format!("z{v}^0"))
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms(), self.vars())
    }
}

impl fmt::Display for AffinePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms(), self.vars())
    }
}

fn parse_term(s: &str, vars: usize) -> Result<Monomial> {
    let s = s.trim();
    let bad = |msg: &str| Error::InvalidArgument(format!("cannot parse term `{s}`: {msg}"));
    if !s.starts_with('(') {
        return Err(bad("expected coefficient `(re,im)`"));
    }
    let close = s.find(')').ok_or_else(|| bad("unclosed coefficient"))?;
    let coeff_body = &s[1..close];
    let (re_str, im_str) = coeff_body
        .split_once(',')
        .ok_or_else(|| bad("coefficient needs `re,im`"))?;
    let re: f64 = re_str
        .trim()
        .parse()
        .map_err(|_| bad("real part is not a float"))?;
    let im: f64 = im_str
        .trim()
        .parse()
        .map_err(|_| bad("imaginary part is not a float"))?;

    let mut exponents = vec![0u32; vars];
    let mut seen = vec![false; vars];
    let rest = &s[close + 1..];
    for factor in rest.split('*').filter(|f| !f.trim().is_empty()) {
        let factor = factor.trim();
        let body = factor
            .strip_prefix('z')
            .ok_or_else(|| bad("factor must look like `z<idx>^<exp>`"))?;
        let (idx_str, exp_str) = body
            .split_once('^')
            .ok_or_else(|| bad("factor must look like `z<idx>^<exp>`"))?;
        let idx: usize = idx_str
            .parse()
            .map_err(|_| bad("variable index is not an integer"))?;
        let exp: u32 = exp_str
            .parse()
            .map_err(|_| bad("exponent is not a nonnegative integer"))?;
        if idx >= vars {
            return Err(bad(&format!("variable z{idx} out of range for {vars} variables")));
        }
        if seen[idx] {
            return Err(bad(&format!("variable z{idx} repeated")));
        }
        seen[idx] = true;
        exponents[idx] = exp;
    }
    Ok(Monomial::new(Complex64::new(re, im), exponents))
}

fn parse_terms(s: &str, vars: usize) -> Result<Vec<Monomial>> {
    s.split(" + ").map(|t| parse_term(t, vars)).collect()
}

impl HomogeneousPolynomial {
    /// Parse the display format; `vars` fixes the variable count and the
    /// degree is taken from the terms (which must agree).
    pub fn parse(s: &str, vars: usize) -> Result<Self> {
        let terms = parse_terms(s, vars)?;
        let nonzero: Vec<&Monomial> = terms
            .iter()
            .filter(|t| t.coefficient != Complex64::new(0.0, 0.0))
            .collect();
        let degree = nonzero.first().map(|t| t.total_degree()).unwrap_or(0);
        HomogeneousPolynomial::new(
            vars,
            degree,
            terms
                .into_iter()
                .filter(|t| t.coefficient != Complex64::new(0.0, 0.0))
                .collect(),
        )
    }
}

impl AffinePolynomial {
    pub fn parse(s: &str, vars: usize) -> Result<Self> {
        AffinePolynomial::new(vars, parse_terms(s, vars)?)
    }
}

impl LiftedEndomorphism {
    /// One text line per component.
    pub fn to_text(&self) -> Vec<String> {
        self.components().iter().map(|c| c.to_string()).collect()
    }

    /// Parse components (one string each) and certify the resulting lift.
    pub fn from_text(lines: &[&str]) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::InvalidArgument("no components given".into()));
        }
        let vars = lines.len();
        let components = lines
            .iter()
            .map(|l| HomogeneousPolynomial::parse(l, vars))
            .collect::<Result<Vec<_>>>()?;
        LiftedEndomorphism::from_components(components)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_perturbed_power_map, make_power_map};
    use super::*;

    #[test]
    fn display_example() {
        let p = HomogeneousPolynomial::coordinate_power(2, 0, 2);
        assert_eq!(p.to_string(), "(1.0,0.0)*z0^2*z1^0");
    }

    #[test]
    fn roundtrip_power_map() {
        let f = make_power_map(2, 3).unwrap();
        let lines = f.to_text();
        let line_refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let g = LiftedEndomorphism::from_text(&line_refs).unwrap();
        assert_eq!(f.components(), g.components());
    }

    #[test]
    fn roundtrip_random_coefficients_exactly() {
        let f = make_perturbed_power_map(2, 2, 0.37, 1234).unwrap();
        for c in f.components() {
            let s = c.to_string();
            let back = HomogeneousPolynomial::parse(&s, 3).unwrap();
            assert_eq!(c, &back, "round trip failed for {s}");
        }
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(HomogeneousPolynomial::parse("1.0*z0^2", 2).is_err());
        assert!(HomogeneousPolynomial::parse("(1,0)*z5^2", 2).is_err());
        assert!(HomogeneousPolynomial::parse("(1,0)*z0^2*z0^1", 2).is_err());
        assert!(HomogeneousPolynomial::parse("(1,0)*z0^x", 2).is_err());
    }

    #[test]
    fn zero_polynomial_prints_and_parses() {
        let z = HomogeneousPolynomial::zero(2, 2);
        let s = z.to_string();
        let back = HomogeneousPolynomial::parse(&s, 2).unwrap();
        assert!(back.is_zero());
    }
}
