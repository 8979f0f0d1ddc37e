//! Sparse complex polynomials, lifted endomorphisms of projective space, and
//! regular polynomial automorphisms of the affine plane.
//!
//! A degree-d endomorphism of P^k is represented by its lift: k+1 homogeneous
//! polynomials of common degree d on C^{k+1} with no common zero besides the
//! origin.  Nondegeneracy is certified either symbolically (built-in families
//! whose structure guarantees it) or probabilistically by a unit-sphere
//! sample battery.

mod text;
mod ueda;

pub use ueda::{make_ueda_map, make_ueda_map_rational, symmetrize_points};

use crate::rng::SplitMix64;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Seed for the internal certification battery; fixed so that map
/// construction is deterministic.
const CERT_SEED: u64 = 0x6772_6565_6e6c_6162; // "greenlab"

/// Number of unit-sphere samples used to certify nondegeneracy and to bound
/// `log ||F||` on the sphere.
const CERT_SAMPLES: usize = 10_000;

/// Rejection threshold: a candidate lift with `min ||F(w)|| < 1e-3` over the
/// certification battery is refused as (numerically) degenerate.
const DEGENERACY_THRESHOLD: f64 = 1e-3;

/// Relative rejection threshold for the descent refinement: starting from the
/// battery argmin, projected gradient descent on `||F||^2` that reaches below
/// `1e-6 * max ||F||` is treated as having found a common zero.
const DEGENERACY_REFINED: f64 = 1e-6;

/// Safety factor applied to the sampled supremum of `|log ||F|||` on the
/// sphere, compensating for the gap between a sampled and a true supremum.
const LOG_BOUND_SAFETY: f64 = 1.1;

/// One term of a sparse polynomial: coefficient times a product of powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: Complex64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: Complex64, exponents: Vec<u32>) -> Self {
        Monomial {
            coefficient,
            exponents,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = self.coefficient;
        for (zi, &e) in z.iter().zip(&self.exponents) {
            if e > 0 {
                acc *= zi.powu(e);
            }
        }
        acc
    }
}

/// Descending lexicographic order on exponent vectors; within a homogeneous
/// polynomial all terms share the total degree, so this is graded-lex.
fn lex_desc(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    b.cmp(a)
}

/// Merge duplicate exponent vectors, drop exact-zero coefficients, sort.
/// `graded` additionally sorts by descending total degree first (used for
/// affine polynomials with mixed degrees).
fn canonicalize(mut terms: Vec<Monomial>, graded: bool) -> Vec<Monomial> {
    if graded {
        terms.sort_by(|s, t| {
            t.total_degree()
                .cmp(&s.total_degree())
                .then_with(|| lex_desc(&s.exponents, &t.exponents))
        });
    } else {
        terms.sort_by(|s, t| lex_desc(&s.exponents, &t.exponents));
    }
    let mut out: Vec<Monomial> = Vec::with_capacity(terms.len());
    for term in terms {
        match out.last_mut() {
            Some(last) if last.exponents == term.exponents => {
                last.coefficient += term.coefficient;
            }
            _ => out.push(term),
        }
    }
    out.retain(|t| t.coefficient != Complex64::new(0.0, 0.0));
    out
}

/// Homogeneous polynomial on C^{vars} in canonical merged graded-lex form.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    vars: usize,
    degree: u32,
    terms: Vec<Monomial>,
}

impl HomogeneousPolynomial {
    pub fn new(vars: usize, degree: u32, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != vars {
                return Err(Error::DimensionMismatch(format!(
                    "monomial has {} exponents, expected {vars}",
                    t.exponents.len()
                )));
            }
            if t.total_degree() != degree {
                return Err(Error::DegreeMismatch(format!(
                    "monomial of degree {} in a polynomial declared degree {degree}",
                    t.total_degree()
                )));
            }
        }
        Ok(HomogeneousPolynomial {
            vars,
            degree,
            terms: canonicalize(terms, false),
        })
    }

    pub fn zero(vars: usize, degree: u32) -> Self {
        HomogeneousPolynomial {
            vars,
            degree,
            terms: Vec::new(),
        }
    }

    /// The single monomial `z_idx^degree`.
    pub fn coordinate_power(vars: usize, idx: usize, degree: u32) -> Self {
        let mut exps = vec![0u32; vars];
        exps[idx] = degree;
        HomogeneousPolynomial {
            vars,
            degree,
            terms: vec![Monomial::new(Complex64::new(1.0, 0.0), exps)],
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the polynomial is a single monomial (possibly scaled).
    pub fn is_single_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.eval(z);
        }
        acc
    }

    /// Partial derivative with respect to variable `j`.
    pub fn partial(&self, j: usize) -> HomogeneousPolynomial {
        let mut terms = Vec::new();
        for t in &self.terms {
            let e = t.exponents[j];
            if e > 0 {
                let mut exps = t.exponents.clone();
                exps[j] = e - 1;
                terms.push(Monomial::new(t.coefficient * e as f64, exps));
            }
        }
        HomogeneousPolynomial {
            vars: self.vars,
            degree: self.degree.saturating_sub(1),
            terms: canonicalize(terms, false),
        }
    }

    pub fn scale(&self, c: Complex64) -> HomogeneousPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial::new(t.coefficient * c, t.exponents.clone()))
            .collect();
        HomogeneousPolynomial {
            vars: self.vars,
            degree: self.degree,
            terms: canonicalize(terms, false),
        }
    }

    pub fn add(&self, other: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch(
                "adding polynomials in different variable counts".into(),
            ));
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch(
                "adding homogeneous polynomials of different degrees".into(),
            ));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(HomogeneousPolynomial {
            vars: self.vars,
            degree: self.degree.max(other.degree),
            terms: canonicalize(terms, false),
        })
    }

    pub fn mul(&self, other: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch(
                "multiplying polynomials in different variable counts".into(),
            ));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                let exps = s
                    .exponents
                    .iter()
                    .zip(&t.exponents)
                    .map(|(a, b)| a + b)
                    .collect();
                terms.push(Monomial::new(s.coefficient * t.coefficient, exps));
            }
        }
        Ok(HomogeneousPolynomial {
            vars: self.vars,
            degree: self.degree + other.degree,
            terms: canonicalize(terms, false),
        })
    }
}

/// Evaluate a homogeneous polynomial; terms are summed in canonical order, so
/// the result is deterministic.
pub fn eval_poly(p: &HomogeneousPolynomial, z: &[Complex64]) -> Result<Complex64> {
    if z.len() != p.vars() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, polynomial expects {}",
            z.len(),
            p.vars()
        )));
    }
    Ok(p.eval(z))
}

/// Affine polynomial on C^{vars}: sparse terms of mixed total degree, kept in
/// graded-lex descending canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePolynomial {
    vars: usize,
    terms: Vec<Monomial>,
}

impl AffinePolynomial {
    pub fn new(vars: usize, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != vars {
                return Err(Error::DimensionMismatch(format!(
                    "monomial has {} exponents, expected {vars}",
                    t.exponents.len()
                )));
            }
        }
        Ok(AffinePolynomial {
            vars,
            terms: canonicalize(terms, true),
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.eval(z);
        }
        acc
    }

    pub fn partial(&self, j: usize) -> AffinePolynomial {
        let mut terms = Vec::new();
        for t in &self.terms {
            let e = t.exponents[j];
            if e > 0 {
                let mut exps = t.exponents.clone();
                exps[j] = e - 1;
                terms.push(Monomial::new(t.coefficient * e as f64, exps));
            }
        }
        AffinePolynomial {
            vars: self.vars,
            terms: canonicalize(terms, true),
        }
    }
}

/// How the nondegeneracy of a lift was established.
#[derive(Clone, Debug, PartialEq)]
pub enum NondegeneracyCertificate {
    /// Structure of the family guarantees the lift has no nontrivial zero.
    Symbolic,
    /// Unit-sphere battery: `min ||F(w)||` over the recorded sample count
    /// stayed above the rejection threshold.
    Probabilistic { samples: usize, min_norm: f64 },
}

/// Lift of a holomorphic endomorphism of P^k: k+1 homogeneous polynomials of
/// a common degree with (certified) no common zero off the origin.
#[derive(Clone, Debug)]
pub struct LiftedEndomorphism {
    k: usize,
    degree: u32,
    components: Vec<HomogeneousPolynomial>,
    partials: Vec<Vec<HomogeneousPolynomial>>,
    certificate: NondegeneracyCertificate,
    log_norm_bound: f64,
}

impl LiftedEndomorphism {
    /// Build from explicit components, certifying nondegeneracy with the
    /// sphere battery.
    pub fn from_components(components: Vec<HomogeneousPolynomial>) -> Result<Self> {
        Self::build(components, None)
    }

    /// Built-in families whose construction guarantees nondegeneracy.
    fn with_symbolic_certificate(components: Vec<HomogeneousPolynomial>) -> Result<Self> {
        Self::build(components, Some(NondegeneracyCertificate::Symbolic))
    }

    fn build(
        components: Vec<HomogeneousPolynomial>,
        certificate: Option<NondegeneracyCertificate>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("map with no components".into()));
        }
        let vars = components[0].vars();
        let degree = components[0].degree();
        if vars != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} components but {} variables; a self-map of P^k needs k+1 of each",
                components.len(),
                vars
            )));
        }
        for c in &components {
            if c.vars() != vars {
                return Err(Error::DimensionMismatch(
                    "components in different variable counts".into(),
                ));
            }
            if c.degree() != degree {
                return Err(Error::DegreeMismatch(
                    "components of different degrees".into(),
                ));
            }
        }
        if degree < 1 {
            return Err(Error::InvalidArgument(
                "map components must have degree >= 1".into(),
            ));
        }

        let k = vars - 1;
        let partials: Vec<Vec<HomogeneousPolynomial>> = components
            .iter()
            .map(|c| (0..vars).map(|j| c.partial(j)).collect())
            .collect();
        let battery = sphere_battery(&components);
        let certificate = match certificate {
            Some(c) => c,
            None => {
                if battery.min_norm < DEGENERACY_THRESHOLD {
                    return Err(Error::Degenerate {
                        min_norm: battery.min_norm,
                        sample: battery.min_sample,
                    });
                }
                // Random sampling alone cannot witness a high-codimension
                // common zero; descend from the argmin to look for one.
                let (refined, refined_at) =
                    refine_min_norm(&components, &partials, &battery.min_sample);
                if refined < DEGENERACY_REFINED * battery.max_norm {
                    return Err(Error::Degenerate {
                        min_norm: refined,
                        sample: refined_at,
                    });
                }
                NondegeneracyCertificate::Probabilistic {
                    samples: CERT_SAMPLES,
                    min_norm: battery.min_norm,
                }
            }
        };

        Ok(LiftedEndomorphism {
            k,
            degree,
            components,
            partials,
            certificate,
            log_norm_bound: battery.log_bound,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[HomogeneousPolynomial] {
        &self.components
    }

    pub fn certificate(&self) -> &NondegeneracyCertificate {
        &self.certificate
    }

    /// Upper bound for `sup { |log ||F(w)||| : ||w|| = 1 }`, estimated from
    /// the certification battery with a safety factor.  Controls the
    /// geometric tail of escape-rate telescoping.
    pub fn log_norm_bound(&self) -> f64 {
        self.log_norm_bound
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    /// True when every component is a single monomial.
    pub fn is_monomial_map(&self) -> bool {
        self.components.iter().all(|c| c.is_single_monomial())
    }
}

fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

struct SphereBattery {
    min_norm: f64,
    min_sample: Vec<Complex64>,
    max_norm: f64,
    log_bound: f64,
}

/// Sample the unit sphere, recording the extremes of `||F||` and the
/// safety-scaled maximum of `|log ||F|||`.
fn sphere_battery(components: &[HomogeneousPolynomial]) -> SphereBattery {
    let vars = components[0].vars();
    let mut min_norm = f64::INFINITY;
    let mut min_sample = vec![Complex64::new(0.0, 0.0); vars];
    let mut max_norm: f64 = 0.0;
    let mut max_abs_log: f64 = 0.0;
    for i in 0..CERT_SAMPLES {
        let mut gen = SplitMix64::substream(CERT_SEED, i as u64);
        let mut w: Vec<Complex64> = (0..vars).map(|_| gen.next_complex_gaussian()).collect();
        let n = norm(&w);
        if n == 0.0 {
            continue;
        }
        for c in w.iter_mut() {
            *c /= n;
        }
        let image: Vec<Complex64> = components.iter().map(|c| c.eval(&w)).collect();
        let image_norm = norm(&image);
        if image_norm < min_norm {
            min_norm = image_norm;
            min_sample = w.clone();
        }
        max_norm = max_norm.max(image_norm);
        if image_norm > 0.0 {
            max_abs_log = max_abs_log.max(image_norm.ln().abs());
        } else {
            max_abs_log = f64::INFINITY;
        }
    }
    SphereBattery {
        min_norm,
        min_sample,
        max_norm,
        log_bound: max_abs_log * LOG_BOUND_SAFETY,
    }
}

/// Projected gradient descent on `||F(w)||^2` over the unit sphere.  A common
/// zero of the components is a global minimum at zero, so driving the value
/// toward zero is a direct degeneracy witness; stalling at a positive local
/// minimum leaves the candidate accepted.
fn refine_min_norm(
    components: &[HomogeneousPolynomial],
    partials: &[Vec<HomogeneousPolynomial>],
    start: &[Complex64],
) -> (f64, Vec<Complex64>) {
    let vars = components[0].vars();
    let value = |w: &[Complex64]| -> f64 {
        norm(&components.iter().map(|c| c.eval(w)).collect::<Vec<_>>())
    };
    let mut w = start.to_vec();
    let mut val = value(&w);
    let mut step = 0.25;
    for _ in 0..200 {
        if val < 1e-12 || step < 1e-12 {
            break;
        }
        let fw: Vec<Complex64> = components.iter().map(|c| c.eval(&w)).collect();
        // Wirtinger gradient of ||F||^2 with respect to conj(w): J^H F.
        let mut g = vec![Complex64::new(0.0, 0.0); vars];
        for (i, row) in partials.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                g[j] += p.eval(&w).conj() * fw[i];
            }
        }
        let gn = norm(&g);
        if gn < 1e-18 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut cand: Vec<Complex64> = w
                .iter()
                .zip(&g)
                .map(|(wi, gi)| wi - gi * (step / gn))
                .collect();
            let cn = norm(&cand);
            if cn > 0.0 {
                for c in cand.iter_mut() {
                    *c /= cn;
                }
                let cval = value(&cand);
                if cval < val {
                    w = cand;
                    val = cval;
                    improved = true;
                    step = (step * 2.0).min(0.25);
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (val, w)
}

/// Evaluate a lifted endomorphism at a point of C^{k+1}.
pub fn eval_map(map: &LiftedEndomorphism, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != map.k() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, map expects {}",
            z.len(),
            map.k() + 1
        )));
    }
    Ok(map.eval(z))
}

/// Jacobian matrix of the lift at `z`: row `i`, column `j` holds
/// `dF_i/dz_j (z)`.
pub fn jacobian_lift(map: &LiftedEndomorphism, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let vars = map.k() + 1;
    if z.len() != vars {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, map expects {vars}",
            z.len()
        )));
    }
    Ok(DMatrix::from_fn(vars, vars, |i, j| {
        map.partials[i][j].eval(z)
    }))
}

/// Jacobian of a tuple of affine polynomials (rows follow component order).
pub fn jacobian_affine(
    components: &[AffinePolynomial],
    z: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    if components.is_empty() {
        return Err(Error::InvalidArgument("empty component list".into()));
    }
    let vars = components[0].vars();
    if z.len() != vars {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, map expects {vars}",
            z.len()
        )));
    }
    let rows = components.len();
    let mut partials = Vec::with_capacity(rows);
    for c in components {
        if c.vars() != vars {
            return Err(Error::DimensionMismatch(
                "affine components in different variable counts".into(),
            ));
        }
        partials.push((0..vars).map(|j| c.partial(j)).collect::<Vec<_>>());
    }
    Ok(DMatrix::from_fn(rows, vars, |i, j| partials[i][j].eval(z)))
}

/// The coordinatewise power map `[z_0 : ... : z_k] -> [z_0^d : ... : z_k^d]`.
pub fn make_power_map(k: usize, d: u32) -> Result<LiftedEndomorphism> {
    if k < 1 {
        return Err(Error::InvalidArgument("power map needs k >= 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("power map needs degree >= 2".into()));
    }
    let vars = k + 1;
    let components = (0..vars)
        .map(|i| HomogeneousPolynomial::coordinate_power(vars, i, d))
        .collect();
    LiftedEndomorphism::with_symbolic_certificate(components)
}

/// All exponent vectors of total degree `d` in `parts` variables, descending
/// lexicographic order.
fn compositions(d: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut tail in compositions(d - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.append(&mut tail);
            out.push(v);
        }
    }
    out
}

/// Power map perturbed by dense random homogeneous polynomials:
/// `F_i = z_i^d + epsilon * Q_i` with `Q_i` coefficients drawn from the unit
/// disk by the seeded generator.  The construction is rejected if the sphere
/// battery detects near-degeneracy.
pub fn make_perturbed_power_map(
    k: usize,
    d: u32,
    epsilon: f64,
    seed: u64,
) -> Result<LiftedEndomorphism> {
    if k < 1 || d < 2 {
        return Err(Error::InvalidArgument(
            "perturbed power map needs k >= 1 and degree >= 2".into(),
        ));
    }
    let vars = k + 1;
    let exponents = compositions(d, vars);
    let mut components = Vec::with_capacity(vars);
    for i in 0..vars {
        let mut gen = SplitMix64::substream(seed, i as u64);
        let mut terms = Vec::with_capacity(exponents.len());
        for exps in &exponents {
            // Uniform on the unit disk: sqrt of a uniform radius squared.
            let r = gen.next_f64().sqrt();
            let coeff = gen.next_unit_complex() * r * epsilon;
            terms.push(Monomial::new(coeff, exps.clone()));
        }
        let q = HomogeneousPolynomial::new(vars, d, terms)?;
        let base = HomogeneousPolynomial::coordinate_power(vars, i, d);
        components.push(base.add(&q)?);
    }
    LiftedEndomorphism::from_components(components)
}

/// Regular polynomial automorphism of C^2 (Henon family), stored with its
/// inverse, algebraic degrees, and escape filtration radius.
#[derive(Clone, Debug)]
pub struct RegularAutomorphism {
    k: usize,
    forward: Vec<AffinePolynomial>,
    backward: Vec<AffinePolynomial>,
    d_plus: u32,
    d_minus: u32,
    s: u32,
    filtration_radius: f64,
    indeterminacy_plus: Option<Vec<Complex64>>,
    indeterminacy_minus: Option<Vec<Complex64>>,
    henon_params: Option<(Complex64, Complex64)>,
}

impl RegularAutomorphism {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn forward(&self) -> &[AffinePolynomial] {
        &self.forward
    }

    pub fn backward(&self) -> &[AffinePolynomial] {
        &self.backward
    }

    pub fn d_plus(&self) -> u32 {
        self.d_plus
    }

    pub fn d_minus(&self) -> u32 {
        self.d_minus
    }

    /// Codimension parameter linking the two degrees: `d_plus^(k-s) = d_minus^s`.
    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn filtration_radius(&self) -> f64 {
        self.filtration_radius
    }

    /// Forward indeterminacy point of the projective extension, in
    /// homogeneous coordinates `[t : x : y]` (built-in families only).
    pub fn indeterminacy_plus(&self) -> Option<&[Complex64]> {
        self.indeterminacy_plus.as_deref()
    }

    pub fn indeterminacy_minus(&self) -> Option<&[Complex64]> {
        self.indeterminacy_minus.as_deref()
    }

    /// `(a, c)` for maps built by [`make_henon`]; `None` for other families.
    pub fn henon_parameters(&self) -> Option<(Complex64, Complex64)> {
        self.henon_params
    }

    pub fn forward_eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.forward.iter().map(|p| p.eval(z)).collect()
    }

    pub fn backward_eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.backward.iter().map(|p| p.eval(z)).collect()
    }
}

/// Quadratic Henon automorphism `(x, y) -> (y, y^2 + c - a x)` with inverse
/// `(x, y) -> ((x^2 + c - y)/a, x)`; requires `a != 0`.
pub fn make_henon(a: Complex64, c: Complex64) -> Result<RegularAutomorphism> {
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument(
            "henon map needs a != 0 to be invertible".into(),
        ));
    }
    let one = Complex64::new(1.0, 0.0);
    // Variables ordered (x, y) = (z0, z1).
    let forward = vec![
        AffinePolynomial::new(2, vec![Monomial::new(one, vec![0, 1])])?,
        AffinePolynomial::new(
            2,
            vec![
                Monomial::new(one, vec![0, 2]),
                Monomial::new(c, vec![0, 0]),
                Monomial::new(-a, vec![1, 0]),
            ],
        )?,
    ];
    let inv_a = one / a;
    let backward = vec![
        AffinePolynomial::new(
            2,
            vec![
                Monomial::new(inv_a, vec![2, 0]),
                Monomial::new(c * inv_a, vec![0, 0]),
                Monomial::new(-inv_a, vec![0, 1]),
            ],
        )?,
        AffinePolynomial::new(2, vec![Monomial::new(one, vec![1, 0])])?,
    ];
    let zero = Complex64::new(0.0, 0.0);
    Ok(RegularAutomorphism {
        k: 2,
        forward,
        backward,
        d_plus: 2,
        d_minus: 2,
        s: 1,
        filtration_radius: 3.0f64.max(a.norm() + c.norm() + 2.0),
        indeterminacy_plus: Some(vec![zero, one, zero]),
        indeterminacy_minus: Some(vec![zero, zero, one]),
        henon_params: Some((a, c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_map_evaluates_coordinatewise() {
        let f = make_power_map(2, 2).unwrap();
        let z = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)];
        let w = eval_map(&f, &z).unwrap();
        assert_eq!(w[0], c(1.0, 0.0));
        assert_eq!(w[1], c(4.0, 0.0));
        assert_eq!(w[2], c(-1.0, 0.0));
    }

    #[test]
    fn perturbed_power_map_matches_hand_example() {
        // F = (z0^2 + eps z1^2, z1^2), eps = 0.1, z = (1, 1) -> (1.1, 1).
        let q = HomogeneousPolynomial::new(
            2,
            2,
            vec![Monomial::new(c(0.1, 0.0), vec![0, 2])],
        )
        .unwrap();
        let f0 = HomogeneousPolynomial::coordinate_power(2, 0, 2)
            .add(&q)
            .unwrap();
        let f1 = HomogeneousPolynomial::coordinate_power(2, 1, 2);
        let f = LiftedEndomorphism::from_components(vec![f0, f1]).unwrap();
        let w = eval_map(&f, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((w[0] - c(1.1, 0.0)).norm() < 1e-15);
        assert!((w[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn perturbed_builder_is_deterministic() {
        let f = make_perturbed_power_map(1, 2, 0.05, 42).unwrap();
        let g = make_perturbed_power_map(1, 2, 0.05, 42).unwrap();
        for (a, b) in f.components().iter().zip(g.components()) {
            assert_eq!(a, b);
        }
        let h = make_perturbed_power_map(1, 2, 0.05, 43).unwrap();
        assert_ne!(f.components()[0], h.components()[0]);
    }

    #[test]
    fn homogeneity_on_random_samples() {
        // ||F(lambda z) - lambda^d F(z)|| <= 1e-10 * ||F(lambda z)|| on 100 draws.
        let f = make_perturbed_power_map(2, 3, 0.2, 7).unwrap();
        let d = f.degree();
        for i in 0..100u64 {
            let mut gen = SplitMix64::substream(99, i);
            let z: Vec<Complex64> = (0..3).map(|_| gen.next_complex_gaussian()).collect();
            let lambda = gen.next_complex_gaussian();
            let lz: Vec<Complex64> = z.iter().map(|v| v * lambda).collect();
            let flz = f.eval(&lz);
            let fz = f.eval(&z);
            let scale = lambda.powu(d);
            let diff: f64 = flz
                .iter()
                .zip(&fz)
                .map(|(a, b)| (a - b * scale).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let denom: f64 = flz.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(diff <= 1e-10 * denom.max(1e-300), "i={i} diff={diff}");
        }
    }

    #[test]
    fn euler_identity_jacobian_times_point() {
        // J(z) * z = d * F(z) for homogeneous maps.
        let f = make_perturbed_power_map(2, 2, 0.3, 11).unwrap();
        let mut gen = SplitMix64::substream(5, 0);
        for _ in 0..20 {
            let z: Vec<Complex64> = (0..3).map(|_| gen.next_complex_gaussian()).collect();
            let j = jacobian_lift(&f, &z).unwrap();
            let zv = nalgebra::DVector::from_column_slice(&z);
            let jz = &j * &zv;
            let fz = f.eval(&z);
            for (row, fi) in jz.iter().zip(&fz) {
                assert!((row - fi * 2.0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_lift_is_rejected_with_sample() {
        // Components share the common zero z0 = z1, a full line.
        let p = HomogeneousPolynomial::new(
            2,
            2,
            vec![
                Monomial::new(c(1.0, 0.0), vec![2, 0]),
                Monomial::new(c(-1.0, 0.0), vec![0, 2]),
            ],
        )
        .unwrap();
        let err = LiftedEndomorphism::from_components(vec![p.clone(), p]).unwrap_err();
        match err {
            Error::Degenerate { min_norm, sample } => {
                assert!(min_norm < 1e-3);
                assert_eq!(sample.len(), 2);
            }
            other => panic!("expected Degenerate, got {other}"),
        }
    }

    #[test]
    fn henon_jacobian_at_origin() {
        let f = make_henon(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let j = jacobian_affine(f.forward(), &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(j[(0, 0)], c(0.0, 0.0));
        assert_eq!(j[(0, 1)], c(1.0, 0.0));
        assert_eq!(j[(1, 0)], c(-1.0, 0.0));
        assert_eq!(j[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn henon_forward_backward_roundtrip() {
        let f = make_henon(c(0.3, 0.1), c(-0.2, 0.4)).unwrap();
        let mut gen = SplitMix64::substream(17, 0);
        for _ in 0..10_000 {
            let z = [gen.next_complex_gaussian(), gen.next_complex_gaussian()];
            let w = f.backward_eval(&f.forward_eval(&z));
            assert!((w[0] - z[0]).norm() < 1e-10 * (1.0 + z[0].norm()));
            assert!((w[1] - z[1]).norm() < 1e-10 * (1.0 + z[1].norm()));
            let v = f.forward_eval(&f.backward_eval(&z));
            assert!((v[0] - z[0]).norm() < 1e-10 * (1.0 + z[0].norm()));
            assert!((v[1] - z[1]).norm() < 1e-10 * (1.0 + z[1].norm()));
        }
    }

    #[test]
    fn henon_degree_relation_and_radius() {
        let f = make_henon(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        // d_plus^(k-s) = d_minus^s
        assert_eq!(
            f.d_plus().pow(f.k() as u32 - f.s()),
            f.d_minus().pow(f.s())
        );
        assert_eq!(f.filtration_radius(), 3.5);
        let g = make_henon(c(0.1, 0.0), c(0.1, 0.0)).unwrap();
        assert_eq!(g.filtration_radius(), 3.0);
        assert!(make_henon(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn canonical_form_merges_and_sorts() {
        let p = HomogeneousPolynomial::new(
            2,
            2,
            vec![
                Monomial::new(c(1.0, 0.0), vec![0, 2]),
                Monomial::new(c(2.0, 0.0), vec![1, 1]),
                Monomial::new(c(3.0, 0.0), vec![0, 2]),
                Monomial::new(c(-2.0, 0.0), vec![1, 1]),
            ],
        )
        .unwrap();
        // The [1,1] terms cancel; [2,0]-free, so the single survivor is 4*z1^2.
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].exponents, vec![0, 2]);
        assert_eq!(p.terms()[0].coefficient, c(4.0, 0.0));
    }

    #[test]
    fn mixed_degree_terms_are_rejected() {
        let bad = HomogeneousPolynomial::new(
            2,
            2,
            vec![
                Monomial::new(c(1.0, 0.0), vec![2, 0]),
                Monomial::new(c(1.0, 0.0), vec![1, 0]),
            ],
        );
        assert!(bad.is_err());
    }
}
