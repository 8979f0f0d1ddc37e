//! Backward-orbit sampling of the equilibrium measure.
//!
//! For a degree-d endomorphism of `P^k` the normalized pull-backs
//! `d^{-kn} (f^n)^* δ_a` of a point mass converge (weakly) to the
//! equilibrium measure μ — for every starting point `a` outside the
//! exceptional set.  This module materializes those pull-backs as empirical
//! measures by exact preimage solving with multiplicity bookkeeping
//! (`Σ multiplicities = d^k` at every step), caps their growth by seeded
//! systematic resampling, and tests convergence through potentials:
//! logarithmic potentials against the affine Green function for `k = 1`,
//! moment dictionaries against the torus oracle for coordinatewise power
//! maps when `k ≥ 2`.  Exceptional starting points are detected by the
//! measure *failing* those tests while collapsing onto the exceptional
//! orbit — the dichotomy this module exists to exhibit.

use crate::green::green_lift;
use crate::poly::{
    make_ueda_map, make_ueda_map_rational, symmetrize_points, LiftedEndomorphism,
};
use crate::projective::{fs_distance, normalize, ProjectivePoint};
use crate::rng::SplitMix64;
use crate::roots::polynomial_roots;
use crate::util::pairwise_sum;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Default cap on the atom count of a backward-orbit measure.
pub const DEFAULT_MAX_ATOMS: usize = 1 << 14;

/// A finitely supported positive measure on `P^k`.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    atoms: Vec<(ProjectivePoint, f64)>,
    total: f64,
}

impl EmpiricalMeasure {
    /// Build a measure from explicit atoms; weights must be positive.
    pub fn from_atoms(atoms: Vec<(ProjectivePoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("a measure needs at least one atom".into()));
        }
        if atoms.iter().any(|(_, w)| w.is_nan() || *w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("atom weights must be positive and finite".into()));
        }
        let weights: Vec<f64> = atoms.iter().map(|(_, w)| *w).collect();
        let total = pairwise_sum(&weights);
        Ok(EmpiricalMeasure { atoms, total })
    }

    /// The unit point mass at `p`.
    pub fn dirac(p: ProjectivePoint) -> Self {
        EmpiricalMeasure { atoms: vec![(p, 1.0)], total: 1.0 }
    }

    pub fn atoms(&self) -> &[(ProjectivePoint, f64)] {
        &self.atoms
    }

    /// Sum of the atom weights (1 for normalized measures).
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weighted mean of a function over the atoms, reduced pairwise in atom
    /// order (deterministic).
    pub fn integrate<F: Fn(&ProjectivePoint) -> f64>(&self, phi: F) -> f64 {
        let terms: Vec<f64> = self.atoms.iter().map(|(p, w)| w * phi(p)).collect();
        pairwise_sum(&terms)
    }
}

/// Which preimage algorithm applies to a map.
///
/// General polynomial-system solving is out of scope on purpose; these three
/// cover every built-in family.  The product solver carries the coefficients
/// of the one-variable map `h = numerator/denominator` (ascending order) that
/// induced the endomorphism, because the symmetrized components do not expose
/// them; [`preimages`] verifies the data actually reproduces the map before
/// trusting it.
#[derive(Clone, Debug, PartialEq)]
pub enum PreimageSolverSpec {
    /// `k = 1`: roots of the binary form `w₁·F₀(z) − w₀·F₁(z)`, with
    /// vanishing leading coefficients converted into preimages at `[0:1]`.
    Univariate,
    /// Coordinatewise d-th roots for maps whose components are
    /// `c_i · z_{σ(i)}^d` for a permutation `σ` — power maps and their
    /// coordinate permutations (`d^k` branches after quotienting the global
    /// root of unity).
    PowerMap,
    /// Symmetric products of a one-variable map: unsymmetrize the target into
    /// `k` points of `P^1`, pull each back with the univariate solver, and
    /// re-symmetrize every choice tuple, merging projectively equal results.
    UedaProduct {
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
    },
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Norm of the projective wedge `u ∧ v` for unit vectors — the sine of the
/// Fubini–Study angle, zero exactly when `[u] = [v]`.
fn wedge_norm(u: &[Complex64], v: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            s += (u[i] * v[j] - u[j] * v[i]).norm_sqr();
        }
    }
    s.sqrt()
}

/// All preimages `f^{-1}(w)` with multiplicities summing to exactly `d^k`.
///
/// Every returned point is verified to map back onto `w` with projective
/// residual `‖f(p) ∧ w‖ < 1e-6`; a violation aborts with the worst offender.
pub fn preimages(
    map: &LiftedEndomorphism,
    w: &ProjectivePoint,
    spec: &PreimageSolverSpec,
) -> Result<Vec<(ProjectivePoint, usize)>> {
    if w.coords().len() != map.k() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, map expects {}",
            w.coords().len(),
            map.k() + 1
        )));
    }
    let found = match spec {
        PreimageSolverSpec::Univariate => univariate_preimages(map, w)?,
        PreimageSolverSpec::PowerMap => power_map_preimages(map, w)?,
        PreimageSolverSpec::UedaProduct { numerator, denominator } => {
            ueda_preimages(map, w, numerator, denominator)?
        }
    };

    let weighted: usize = found.iter().map(|(_, m)| m).sum();
    let expected = (map.degree() as usize).pow(map.k() as u32);
    if weighted != expected {
        return Err(Error::Invariant(format!(
            "preimage multiplicities sum to {weighted}, expected d^k = {expected}"
        )));
    }
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for (p, _) in &found {
        let image = normalize(&map.eval(p.coords()))?;
        let res = wedge_norm(image.coords(), w.coords());
        if res > worst {
            worst = res;
            worst_at = Some(p.clone());
        }
    }
    if worst > 1e-6 {
        return Err(Error::Solver(format!(
            "preimage residual {worst:.3e} exceeds 1e-6 at {:?}",
            worst_at.expect("worst offender exists").coords()
        )));
    }
    Ok(found)
}

fn univariate_preimages(
    map: &LiftedEndomorphism,
    w: &ProjectivePoint,
) -> Result<Vec<(ProjectivePoint, usize)>> {
    if map.k() != 1 {
        return Err(Error::Unsupported(
            "the univariate solver applies to maps of P^1 only".into(),
        ));
    }
    let d = map.degree() as usize;
    let (w0, w1) = (w.coords()[0], w.coords()[1]);
    // f(z) ∥ w  ⟺  the degree-d binary form w₁·F₀(z) − w₀·F₁(z) vanishes.
    // Dehomogenized in the chart t = z1/z0, the coefficient of t^e collects
    // the monomials with z1-exponent e; missing leading coefficients are
    // roots at the chart's infinity [0:1].
    let mut coeffs = vec![ZERO; d + 1];
    for t in map.components()[0].terms() {
        coeffs[t.exponents[1] as usize] += w1 * t.coefficient;
    }
    for t in map.components()[1].terms() {
        coeffs[t.exponents[1] as usize] -= w0 * t.coefficient;
    }
    let roots = polynomial_roots(&coeffs)?;
    let mut out = Vec::with_capacity(roots.finite.len() + 1);
    for r in roots.finite {
        out.push((normalize(&[ONE, r])?, 1));
    }
    if roots.degree_drop > 0 {
        out.push((normalize(&[ZERO, ONE])?, roots.degree_drop));
    }
    Ok(out)
}

/// If every component of `map` is `c_i · z_{σ(i)}^d` for a permutation `σ`,
/// return `(σ, [c_i])`.  Power maps and their coordinate permutations — the
/// family the [`PreimageSolverSpec::PowerMap`] solver covers.
pub(crate) fn permuted_power_structure(
    map: &LiftedEndomorphism,
) -> Option<(Vec<usize>, Vec<Complex64>)> {
    let d = map.degree();
    let k = map.k();
    let mut sigma = Vec::with_capacity(k + 1);
    let mut scales = Vec::with_capacity(k + 1);
    for comp in map.components() {
        let terms = comp.terms();
        if terms.len() != 1 {
            return None;
        }
        let mut target = None;
        for (j, &e) in terms[0].exponents.iter().enumerate() {
            match (e, target) {
                (0, _) => {}
                (exp, None) if exp == d => target = Some(j),
                _ => return None,
            }
        }
        sigma.push(target?);
        scales.push(terms[0].coefficient);
    }
    let mut seen = vec![false; k + 1];
    for &j in &sigma {
        if seen[j] {
            return None;
        }
        seen[j] = true;
    }
    Some((sigma, scales))
}

fn power_map_preimages(
    map: &LiftedEndomorphism,
    w: &ProjectivePoint,
) -> Result<Vec<(ProjectivePoint, usize)>> {
    let d = map.degree();
    let k = map.k();
    let Some((sigma, scales)) = permuted_power_structure(map) else {
        return Err(Error::Unsupported(
            "the power-map solver needs components of the form c_i * z_sigma(i)^d".into(),
        ));
    };

    // Component i pins coordinate sigma(i): z_{sigma(i)}^d = w_i / c_i.
    let coords = w.coords();
    // Anchor the global d-th root of unity on the largest component value:
    // its branch is fixed to the principal root, leaving d^k genuine
    // branches.
    let anchor = (0..=k)
        .max_by(|&i, &j| coords[i].norm().total_cmp(&coords[j].norm()))
        .expect("nonempty coordinates");
    let mut principal = vec![ZERO; k + 1];
    for i in 0..=k {
        let ratio = coords[i] / scales[i];
        if ratio.norm() > 0.0 {
            principal[sigma[i]] =
                Complex64::from_polar(ratio.norm().powf(1.0 / d as f64), ratio.arg() / d as f64);
        }
    }
    let free: Vec<usize> = (0..=k)
        .filter(|&i| i != anchor && coords[i].norm() > 0.0)
        .map(|i| sigma[i])
        .collect();
    let zeros = k - free.len();
    // A vanishing component pins its coordinate to the single branch 0 with
    // local multiplicity d, keeping the weighted total at d^k.
    let multiplicity = (d as usize).pow(zeros as u32);

    let branch_count = (d as usize).pow(free.len() as u32);
    let mut out = Vec::with_capacity(branch_count);
    let mut choice = vec![0u32; free.len()];
    loop {
        let mut z = principal.clone();
        for (slot, &v) in free.iter().enumerate() {
            let angle = std::f64::consts::TAU * choice[slot] as f64 / d as f64;
            z[v] *= Complex64::from_polar(1.0, angle);
        }
        out.push((normalize(&z)?, multiplicity));

        // Odometer over {0..d-1}^free.
        let mut slot = 0;
        loop {
            if slot == choice.len() {
                debug_assert_eq!(out.len(), branch_count);
                return Ok(out);
            }
            choice[slot] += 1;
            if choice[slot] < d {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }
}

fn ueda_preimages(
    map: &LiftedEndomorphism,
    w: &ProjectivePoint,
    numerator: &[Complex64],
    denominator: &[Complex64],
) -> Result<Vec<(ProjectivePoint, usize)>> {
    let k = map.k();
    let d = map.degree() as usize;
    verify_ueda_data(map, numerator, denominator)?;
    let mut num = numerator.to_vec();
    let mut den = denominator.to_vec();
    num.resize(d + 1, ZERO);
    den.resize(d + 1, ZERO);

    // A point of P^k is the coefficient vector of a degree-k binary form in
    // T; its roots are the k unordered P^1 factor points (x, y) with affine
    // coordinate u = x/y, the degree drop landing at u = ∞.
    let factors = polynomial_roots(w.coords())?;
    let mut factor_points: Vec<(Complex64, Complex64)> = factors
        .finite
        .iter()
        .map(|&t| (ONE, -t))
        .collect();
    factor_points.extend(std::iter::repeat_n((ZERO, ONE), factors.degree_drop));

    // Pull each factor point back through h: roots of y_q·num(u) − x_q·den(u).
    let mut per_factor: Vec<Vec<((Complex64, Complex64), usize)>> = Vec::with_capacity(k);
    for &(xq, yq) in &factor_points {
        let coeffs: Vec<Complex64> = (0..=d).map(|j| yq * num[j] - xq * den[j]).collect();
        let roots = polynomial_roots(&coeffs)?;
        let mut v: Vec<((Complex64, Complex64), usize)> =
            roots.finite.iter().map(|&u| ((u, ONE), 1)).collect();
        if roots.degree_drop > 0 {
            v.push(((ONE, ZERO), roots.degree_drop));
        }
        per_factor.push(v);
    }

    // Cartesian product of per-factor choices, re-symmetrized; tuples that
    // land on the same projective point merge with added multiplicity (this
    // is what makes the weighted count exactly d^k when factors coincide).
    let mut tuples: Vec<(Vec<(Complex64, Complex64)>, usize)> = vec![(Vec::new(), 1)];
    for factor in &per_factor {
        let mut next = Vec::with_capacity(tuples.len() * factor.len());
        for (prefix, m) in &tuples {
            for (pt, pm) in factor {
                let mut t = prefix.clone();
                t.push(*pt);
                next.push((t, m * pm));
            }
        }
        tuples = next;
    }
    // Merge tolerance sits above the arccos cancellation floor (~1.5e-8 for
    // points equal to the last ulp) yet far below genuine branch separation.
    let mut merged: Vec<(ProjectivePoint, usize)> = Vec::new();
    for (points, m) in tuples {
        let p = normalize(&symmetrize_points(&points))?;
        match merged.iter_mut().find(|(q, _)| fs_distance(q, &p) < 1e-7) {
            Some(entry) => entry.1 += m,
            None => merged.push((p, m)),
        }
    }
    Ok(merged)
}

/// The product solver's data must reproduce the map it is used on.
fn verify_ueda_data(
    map: &LiftedEndomorphism,
    numerator: &[Complex64],
    denominator: &[Complex64],
) -> Result<()> {
    let polynomial_den = denominator.len() == 1 && (denominator[0] - ONE).norm() < 1e-12;
    let rebuilt = if polynomial_den {
        make_ueda_map(numerator, map.k())?
    } else {
        make_ueda_map_rational(numerator, denominator, map.k())?
    };
    let same = rebuilt.degree() == map.degree()
        && rebuilt
            .components()
            .iter()
            .zip(map.components())
            .all(|(a, b)| {
                a.terms().len() == b.terms().len()
                    && a.terms().iter().zip(b.terms()).all(|(s, t)| {
                        s.exponents == t.exponents && (s.coefficient - t.coefficient).norm() < 1e-9
                    })
            });
    if same {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "product-solver coefficients do not reproduce the map".into(),
        ))
    }
}

/// The empirical measure `d^{-kn} (f^n)^* δ_a`.
///
/// Levels expand exactly while the atom count stays within `max_atoms`;
/// past the cap each level is reduced by multiplicity-proportional
/// stratified resampling (seeded per level), which preserves total mass
/// exactly and atom frequencies in expectation.
pub fn backward_orbit_measure(
    map: &LiftedEndomorphism,
    a: &ProjectivePoint,
    n: usize,
    max_atoms: usize,
    seed: u64,
    spec: &PreimageSolverSpec,
) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one backward step".into()));
    }
    if max_atoms < 1000 {
        return Err(Error::InvalidArgument(format!(
            "max_atoms must be at least 1000, got {max_atoms}"
        )));
    }
    let dk = (map.degree() as f64).powi(map.k() as i32);
    let mut atoms = vec![(a.clone(), 1.0f64)];
    for level in 1..=n {
        let expanded: Vec<Vec<(ProjectivePoint, f64)>> = atoms
            .par_iter()
            .map(|(p, weight)| -> Result<Vec<(ProjectivePoint, f64)>> {
                let pres = preimages(map, p, spec).map_err(|e| {
                    Error::Solver(format!(
                        "backward expansion failed at level {level}, atom {:?}: {e}",
                        p.coords()
                    ))
                })?;
                Ok(pres
                    .into_iter()
                    .map(|(q, m)| (q, weight * m as f64 / dk))
                    .collect())
            })
            .collect::<Result<_>>()?;
        let expanded: Vec<(ProjectivePoint, f64)> = expanded.into_iter().flatten().collect();
        atoms = if expanded.len() > max_atoms {
            resample_stratified(expanded, max_atoms, seed, level as u64)
        } else {
            expanded
        };
    }
    EmpiricalMeasure::from_atoms(atoms)
}

/// Stratified resampling down to `target` atoms of equal weight: the mass
/// axis is cut into `target` strata and each stratum draws one threshold
/// with its own jitter.  Mass is preserved exactly and every atom survives
/// with probability proportional to its weight.
///
/// The jitter must be independent per stratum, not shared.  With a shared
/// jitter (classical "systematic" resampling) and a tree whose parents all
/// have equally weighted children, every stratum crosses its parent block at
/// the same offset, so the sweep keeps the *same* inverse branch of every
/// parent and the measure collapses onto a single backward orbit.
fn resample_stratified(
    atoms: Vec<(ProjectivePoint, f64)>,
    target: usize,
    seed: u64,
    level: u64,
) -> Vec<(ProjectivePoint, f64)> {
    let weights: Vec<f64> = atoms.iter().map(|(_, w)| *w).collect();
    let total = pairwise_sum(&weights);
    let mut gen = SplitMix64::substream(seed, level);
    let step = total / target as f64;
    // Strictly increasing thresholds: (j + U_j) * step with U_j in [0, 1).
    let thresholds: Vec<f64> = (0..target).map(|j| (j as f64 + gen.next_f64()) * step).collect();
    let out_weight = total / target as f64;
    let mut out = Vec::with_capacity(target);
    let mut cumulative = 0.0;
    let mut slot = 0;
    for (p, w) in &atoms {
        cumulative += w;
        while slot < target && thresholds[slot] < cumulative {
            out.push((p.clone(), out_weight));
            slot += 1;
        }
    }
    // Guard against the last threshold slipping past the final cumulative
    // value by rounding: top up with the heaviest tail atom.
    while out.len() < target {
        out.push((atoms.last().expect("nonempty atoms").0.clone(), out_weight));
    }
    out
}

/// How a measure compared against its closed-form oracle.
#[derive(Clone, Copy, Debug)]
pub struct PotentialResidualReport {
    /// Max deviation over the usable test statistics.
    pub max_residual: f64,
    /// Test points (k = 1) or dictionary statistics (k ≥ 2) that contributed.
    pub points_used: usize,
    /// Test points excluded for sitting too close to the support or to the
    /// chart's hyperplane at infinity.
    pub points_excluded: usize,
}

/// Minimum affine distance from a test point to the support before the
/// logarithmic kernel is considered singular and the point is excluded.
const SUPPORT_EXCLUSION: f64 = 0.05;

/// Affine-chart magnitude past which a point counts as "at infinity".
const CHART_LIMIT: f64 = 1e6;

/// Deviation of an empirical measure from the equilibrium measure, through
/// potentials.
///
/// For `k = 1` this is the classical logarithmic-potential comparison in the
/// affine chart `t = z1/z0`:
/// `max_t | Σ w_i log|t − t_i|  −  G(1, t) |`,
/// whose reference is the affine escape potential (`log⁺|t|` for `z ↦ z^d`).
/// Test points that fall within 0.05 of the support, or outside the chart,
/// are excluded and counted.
///
/// For `k ≥ 2` the comparison runs over a fixed dictionary of smooth
/// statistics (squared coordinate moduli, pairwise Hermitian products, one
/// quartic) whose closed-form values are known for the Haar measure on the
/// unit torus — the equilibrium measure of every coordinatewise power map,
/// the only family for which this oracle is claimed.  `test_points` is
/// ignored in that branch.
pub fn potential_residual(
    measure: &EmpiricalMeasure,
    map: &LiftedEndomorphism,
    test_points: &[ProjectivePoint],
    tol: f64,
) -> Result<PotentialResidualReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if map.k() == 1 {
        potential_residual_k1(measure, map, test_points, tol)
    } else {
        moment_residual(measure, map)
    }
}

fn potential_residual_k1(
    measure: &EmpiricalMeasure,
    map: &LiftedEndomorphism,
    test_points: &[ProjectivePoint],
    tol: f64,
) -> Result<PotentialResidualReport> {
    let mut support = Vec::with_capacity(measure.len());
    for (p, w) in measure.atoms() {
        let chart = p.affine_chart(0).filter(|c| c[0].norm() <= CHART_LIMIT);
        match chart {
            Some(c) => support.push((c[0], *w)),
            None => {
                return Err(Error::Unsupported(
                    "the potential comparison needs the support inside the affine chart t = z1/z0"
                        .into(),
                ))
            }
        }
    }

    let mut max_residual = 0.0f64;
    let mut used = 0;
    let mut excluded = 0;
    for point in test_points {
        let t = match point.affine_chart(0).map(|c| c[0]) {
            Some(t) if t.norm() <= CHART_LIMIT => t,
            _ => {
                excluded += 1;
                continue;
            }
        };
        if support.iter().any(|(ti, _)| (t - ti).norm() < SUPPORT_EXCLUSION) {
            excluded += 1;
            continue;
        }
        let terms: Vec<f64> = support.iter().map(|(ti, w)| w * (t - ti).norm().ln()).collect();
        let potential = pairwise_sum(&terms);
        let reference = green_lift(map, &[ONE, t], tol, 400)?.value;
        max_residual = max_residual.max((potential - reference).abs());
        used += 1;
    }
    Ok(PotentialResidualReport {
        max_residual,
        points_used: used,
        points_excluded: excluded,
    })
}

fn moment_residual(
    measure: &EmpiricalMeasure,
    map: &LiftedEndomorphism,
) -> Result<PotentialResidualReport> {
    let k = map.k();
    let unit_power = map.components().iter().enumerate().all(|(i, comp)| {
        comp.terms().len() == 1
            && (comp.terms()[0].coefficient - ONE).norm() < 1e-12
            && comp
                .terms()[0]
                .exponents
                .iter()
                .enumerate()
                .all(|(j, &e)| e == if j == i { map.degree() } else { 0 })
    });
    if !unit_power {
        return Err(Error::Unsupported(
            "the moment oracle is known only for coordinatewise power maps (Haar on the torus)"
                .into(),
        ));
    }

    // Dictionary: |z_i|² (oracle 1/(k+1)), Re/Im(z_i conj(z_j)) for i < j
    // (oracle 0), and |z_0|⁴ (oracle 1/(k+1)²) — evaluated on unit
    // representatives, where the torus measure makes them constant.
    let dim = (k + 1) as f64;
    let mut residuals = Vec::new();
    for i in 0..=k {
        let m = measure.integrate(|p| p.coords()[i].norm_sqr());
        residuals.push((m - 1.0 / dim).abs());
    }
    for i in 0..=k {
        for j in (i + 1)..=k {
            let re = measure.integrate(|p| (p.coords()[i] * p.coords()[j].conj()).re);
            let im = measure.integrate(|p| (p.coords()[i] * p.coords()[j].conj()).im);
            residuals.push(re.abs());
            residuals.push(im.abs());
        }
    }
    let quartic = measure.integrate(|p| p.coords()[0].norm_sqr().powi(2));
    residuals.push((quartic - 1.0 / (dim * dim)).abs());

    Ok(PotentialResidualReport {
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        points_used: residuals.len(),
        points_excluded: 0,
    })
}
