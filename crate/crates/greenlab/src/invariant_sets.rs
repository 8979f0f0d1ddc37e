//! Totally invariant coordinate subspaces.
//!
//! A set `E` is totally invariant under `f` when `f⁻¹(E) = f(E) = E`.  For
//! maps whose components are single monomials, invariance of a coordinate
//! subspace `{z_i = 0 : i ∈ S}` is a finite combinatorial statement about
//! the exponent supports and is decided exactly; for anything else the
//! module falls back to seeded sampling, which can refute invariance but
//! never certify it — reports carry the method so the two cannot be
//! conflated.  The union of the *minimal* totally invariant subspaces is
//! the candidate for the exceptional set of a monomial family, and the
//! restricted topological degree `d^p` on a `p`-dimensional invariant
//! subspace is verified by preimage counting.

use crate::equidist::{permuted_power_structure, preimages, PreimageSolverSpec};
use crate::poly::{HomogeneousPolynomial, LiftedEndomorphism, Monomial};
use crate::projective::{fs_distance, normalize, sample_fs_uniform, ProjectivePoint};
use crate::rng::SplitMix64;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Residual below which a sampled invariance check counts as "on the
/// subspace" (monomial maps land at rounding error; genuine perturbations
/// sit orders of magnitude above).
pub const INVARIANCE_RESIDUAL_TOL: f64 = 1e-8;

/// The linear subspace `{z_i = 0 : i ∈ zero_set}` of `P^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateSubspace {
    k: usize,
    zero_set: Vec<usize>,
}

impl CoordinateSubspace {
    /// Build the subspace of `P^k` where the listed coordinates vanish.
    /// The zero set may be empty (the whole space) but must leave at least
    /// one coordinate free.
    pub fn new(k: usize, zero_set: &[usize]) -> Result<Self> {
        let mut indices = zero_set.to_vec();
        indices.sort_unstable();
        indices.dedup();
        if indices.len() != zero_set.len() {
            return Err(Error::InvalidArgument("zero set has repeated indices".into()));
        }
        if indices.iter().any(|&i| i > k) {
            return Err(Error::InvalidArgument(format!(
                "coordinate index out of range for P^{k}"
            )));
        }
        if indices.len() > k {
            return Err(Error::InvalidArgument(
                "zeroing every coordinate leaves no projective point".into(),
            ));
        }
        Ok(CoordinateSubspace { k, zero_set: indices })
    }

    /// Ambient dimension `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Sorted vanishing coordinate indices.
    pub fn zero_set(&self) -> &[usize] {
        &self.zero_set
    }

    /// Complex dimension, `k − |zero_set|`.
    pub fn dimension(&self) -> usize {
        self.k - self.zero_set.len()
    }

    /// The coordinate indices that stay free, ascending.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..=self.k).filter(|i| !self.zero_set.contains(i)).collect()
    }

    /// Sine of the Fubini–Study distance from `p` to the subspace: the norm
    /// of the vanishing coordinates of a unit representative.
    pub fn distance(&self, p: &ProjectivePoint) -> f64 {
        self.zero_set
            .iter()
            .map(|&i| p.coords()[i].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Whether `other` is contained in `self` as a set (its zero set is a
    /// superset of ours).
    pub fn contains(&self, other: &CoordinateSubspace) -> bool {
        self.k == other.k && self.zero_set.iter().all(|i| other.zero_set.contains(i))
    }

    /// FS-uniform points of the subspace: a uniform sample of `P^dim`
    /// scattered into the free coordinates.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<ProjectivePoint> {
        let free = self.free_indices();
        sample_fs_uniform(count, self.dimension(), seed)
            .into_iter()
            .map(|q| {
                let mut coords = vec![Complex64::ZERO; self.k + 1];
                for (slot, &i) in free.iter().enumerate() {
                    coords[i] = q.coords()[slot];
                }
                normalize(&coords).expect("unit sample stays nonzero")
            })
            .collect()
    }
}

/// How an invariance verdict was reached.
#[derive(Clone, Debug)]
pub enum InvarianceMethod {
    /// Exact exponent bookkeeping — available for monomial maps only.
    Symbolic,
    /// Monte Carlo residuals; refutes invariance but cannot certify it.
    Sampled {
        forward_residual: f64,
        /// `None` when no preimage solver applies to the map.
        backward_residual: Option<f64>,
        samples: usize,
    },
}

/// Verdict on the total invariance of one coordinate subspace.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub subspace: CoordinateSubspace,
    /// `f(sub) = sub` (not mere containment: a forward image collapsing
    /// into a smaller subspace is reported as not invariant).
    pub forward_invariant: bool,
    /// `f⁻¹(sub) = sub`; `None` when the backward direction could not be
    /// tested (no preimage solver for the map).
    pub backward_invariant: Option<bool>,
    pub method: InvarianceMethod,
}

impl InvarianceReport {
    /// `f⁻¹(sub) = f(sub) = sub`, counting an untested backward direction
    /// as failure to certify.
    pub fn totally_invariant(&self) -> bool {
        self.forward_invariant && self.backward_invariant == Some(true)
    }
}

/// Decide (monomial maps) or probe (anything else) whether
/// `f⁻¹(sub) = f(sub) = sub`.
///
/// Monomial maps take the exact symbolic path and ignore
/// `sample_count`/`seed`.  Other maps sample `sample_count` points on the
/// subspace for the forward direction, and — when a preimage solver applies
/// (currently: maps of `P^1`) — pull sampled subspace points back for the
/// backward direction; with no solver the backward field is `None`.
pub fn check_total_invariance(
    map: &LiftedEndomorphism,
    sub: &CoordinateSubspace,
    sample_count: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    check_ambient(map, sub)?;
    if map.is_monomial_map() {
        Ok(symbolic_invariance(map, sub))
    } else {
        check_total_invariance_sampled(map, sub, sample_count, seed)
    }
}

fn check_ambient(map: &LiftedEndomorphism, sub: &CoordinateSubspace) -> Result<()> {
    if sub.k() != map.k() {
        return Err(Error::DimensionMismatch(format!(
            "subspace lives in P^{}, map acts on P^{}",
            sub.k(),
            map.k()
        )));
    }
    Ok(())
}

/// Exponent support of each monomial component.
fn monomial_supports(map: &LiftedEndomorphism) -> Vec<Vec<usize>> {
    map.components()
        .iter()
        .map(|c| {
            let m = &c.terms()[0];
            m.exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

fn symbolic_invariance(map: &LiftedEndomorphism, sub: &CoordinateSubspace) -> InvarianceReport {
    let supports = monomial_supports(map);
    let s = sub.zero_set();
    let hits_s = |support: &[usize]| support.iter().any(|j| s.contains(j));

    // The zero pattern of f at a generic point of the subspace: component i
    // vanishes exactly when one of its factors is a vanishing coordinate.
    let image_pattern: Vec<usize> = (0..supports.len())
        .filter(|&i| hits_s(&supports[i]))
        .collect();
    let forward = image_pattern == s;

    // f⁻¹(sub) ⊆ sub: every zero pattern Z that kills all components of S
    // must already contain S.  Zero patterns are subsets of the coordinates
    // leaving at least one alive, finitely many in small dimension.
    let kplus = map.k() + 1;
    let mut backward_tight = true;
    'patterns: for mask in 0..(1u32 << kplus) - 1 {
        let z: Vec<usize> = (0..kplus).filter(|&j| mask >> j & 1 == 1).collect();
        let kills_s = s
            .iter()
            .all(|&i| supports[i].iter().any(|j| z.contains(j)));
        if kills_s && !s.iter().all(|i| z.contains(i)) {
            backward_tight = false;
            break 'patterns;
        }
    }
    // f⁻¹(sub) ⊇ sub is exactly f(sub) ⊆ sub, i.e. the image pattern covers S.
    let backward_cover = s.iter().all(|i| image_pattern.contains(i));

    InvarianceReport {
        subspace: sub.clone(),
        forward_invariant: forward,
        backward_invariant: Some(backward_tight && backward_cover),
        method: InvarianceMethod::Symbolic,
    }
}

/// The Monte Carlo invariance check, exposed separately so the exact path
/// can be cross-validated against it on monomial maps.
pub fn check_total_invariance_sampled(
    map: &LiftedEndomorphism,
    sub: &CoordinateSubspace,
    sample_count: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    check_ambient(map, sub)?;
    if sample_count == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let points = sub.sample(sample_count, seed);
    let forward_residual = points
        .par_iter()
        .map(|p| -> Result<f64> { Ok(sub.distance(&normalize(&map.eval(p.coords()))?)) })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let solver = if permuted_power_structure(map).is_some() {
        Some(PreimageSolverSpec::PowerMap)
    } else if map.k() == 1 {
        Some(PreimageSolverSpec::Univariate)
    } else {
        None
    };
    let backward_residual = match solver {
        None => None,
        Some(spec) => {
            let worst = points
                .par_iter()
                .map(|p| -> Result<f64> {
                    let pres = preimages(map, p, &spec)?;
                    Ok(pres
                        .iter()
                        .map(|(q, _)| sub.distance(q))
                        .fold(0.0, f64::max))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Some(worst)
        }
    };

    // Forward equality needs more than containment: the image must not
    // collapse into a smaller subspace.  Verified by checking that the free
    // coordinates of image points do not all vanish — equivalently, that
    // some image point sits at distance < tol with a genuinely generic
    // position.  A collapse would push images onto a deeper subspace, which
    // still has distance 0 to this one, so probe the free coordinates of
    // one image explicitly.
    let strictly_onto = {
        let image = normalize(&map.eval(points[0].coords()))?;
        let free = sub.free_indices();
        let live = free.iter().filter(|&&i| image.coords()[i].norm() > 1e-8).count();
        live == free.len()
    };

    Ok(InvarianceReport {
        subspace: sub.clone(),
        forward_invariant: forward_residual < INVARIANCE_RESIDUAL_TOL && strictly_onto,
        backward_invariant: backward_residual
            .map(|r| r < INVARIANCE_RESIDUAL_TOL && forward_residual < INVARIANCE_RESIDUAL_TOL),
        method: InvarianceMethod::Sampled {
            forward_residual,
            backward_residual,
            samples: sample_count,
        },
    })
}

/// Topological-degree statistics of `f` restricted to an invariant
/// coordinate subspace.
#[derive(Clone, Debug)]
pub struct RestrictedDegreeReport {
    pub subspace: CoordinateSubspace,
    /// Distinct-preimage count at each accepted generic trial point.
    pub counts: Vec<usize>,
    /// Trials redrawn because the preimage set looked non-generic (multiple
    /// roots or a preimage pair closer than the clustering threshold).
    pub resampled: usize,
    /// `d^p` for `p` the subspace dimension — the expected constant count.
    pub expected: usize,
}

impl RestrictedDegreeReport {
    /// Histogram of counts as (count, occurrences), ascending.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut h: Vec<(usize, usize)> = Vec::new();
        for &c in &self.counts {
            match h.iter_mut().find(|(v, _)| *v == c) {
                Some((_, n)) => *n += 1,
                None => h.push((c, 1)),
            }
        }
        h.sort_unstable();
        h
    }
}

/// Count distinct preimages of generic points of `sub` under `f` restricted
/// to `sub`; on a `p`-dimensional totally invariant subspace the count is
/// `d^p` away from a proper subvariety.
///
/// The restriction of a monomial map to a coordinate subspace is again a
/// monomial endomorphism on the free coordinates and is solved directly;
/// the ambient subspace (empty zero set) uses `spec` on the map itself.
/// Trial points whose preimage sets carry multiplicity or near-coincident
/// pairs (closer than 1e-5) are redrawn deterministically and counted.
pub fn restricted_topological_degree(
    map: &LiftedEndomorphism,
    sub: &CoordinateSubspace,
    trial_points: usize,
    seed: u64,
    spec: &PreimageSolverSpec,
) -> Result<RestrictedDegreeReport> {
    check_ambient(map, sub)?;
    if trial_points == 0 {
        return Err(Error::InvalidArgument("need at least one trial point".into()));
    }
    let p = sub.dimension();
    let expected = (map.degree() as usize).pow(p as u32);

    if p == 0 {
        // A point maps to a point: the restricted degree is 1, no solving.
        return Ok(RestrictedDegreeReport {
            subspace: sub.clone(),
            counts: vec![1; trial_points],
            resampled: 0,
            expected,
        });
    }

    let (restricted, restricted_spec) = restricted_map(map, sub, spec)?;

    let results: Vec<(usize, usize)> = (0..trial_points)
        .into_par_iter()
        .map(|t| -> Result<(usize, usize)> {
            let mut redraws = 0;
            loop {
                let stream = (t as u64) * 64 + redraws as u64;
                let w = sample_fs_uniform(1, p, SplitMix64::substream(seed, stream).next_u64())
                    .pop()
                    .expect("one sample");
                let pres = preimages(&restricted, &w, &restricted_spec)?;
                let degenerate = pres.iter().any(|(_, m)| *m > 1)
                    || pres.iter().enumerate().any(|(i, (a, _))| {
                        pres[i + 1..].iter().any(|(b, _)| fs_distance(a, b) < 1e-5)
                    });
                if !degenerate {
                    return Ok((pres.len(), redraws));
                }
                redraws += 1;
                if redraws > 32 {
                    return Err(Error::Solver(format!(
                        "trial {t}: preimage sets stayed non-generic after 32 redraws"
                    )));
                }
            }
        })
        .collect::<Result<_>>()?;

    Ok(RestrictedDegreeReport {
        subspace: sub.clone(),
        counts: results.iter().map(|(c, _)| *c).collect(),
        resampled: results.iter().map(|(_, r)| r).sum(),
        expected,
    })
}

/// Build `f` restricted to the free coordinates of `sub`, with a solver for
/// it.  The ambient subspace returns the map itself with the caller's spec.
fn restricted_map(
    map: &LiftedEndomorphism,
    sub: &CoordinateSubspace,
    ambient_spec: &PreimageSolverSpec,
) -> Result<(LiftedEndomorphism, PreimageSolverSpec)> {
    if sub.zero_set().is_empty() {
        return Ok((map.clone(), ambient_spec.clone()));
    }
    if !map.is_monomial_map() {
        return Err(Error::Unsupported(
            "restriction to a proper subspace is implemented for monomial maps only".into(),
        ));
    }
    let free = sub.free_indices();
    let supports = monomial_supports(map);
    for &i in &free {
        if supports[i].iter().any(|j| sub.zero_set().contains(j)) {
            return Err(Error::InvalidArgument(
                "component of a free coordinate vanishes on the subspace; is it invariant?".into(),
            ));
        }
    }
    let vars = free.len();
    let components: Vec<HomogeneousPolynomial> = free
        .iter()
        .map(|&i| {
            let m = &map.components()[i].terms()[0];
            let exponents: Vec<u32> = free.iter().map(|&j| m.exponents[j]).collect();
            HomogeneousPolynomial::new(
                vars,
                map.degree(),
                vec![Monomial::new(m.coefficient, exponents)],
            )
        })
        .collect::<Result<_>>()?;
    let restricted = LiftedEndomorphism::from_components(components)?;
    let spec = if permuted_power_structure(&restricted).is_some() {
        PreimageSolverSpec::PowerMap
    } else if restricted.k() == 1 {
        PreimageSolverSpec::Univariate
    } else {
        return Err(Error::Unsupported(
            "no preimage solver for this restricted map (mixed-exponent monomial, dimension > 1)"
                .into(),
        ));
    };
    Ok((restricted, spec))
}

/// Exhaustively classify the proper coordinate subspaces of codimension at
/// most `max_codim` by exact symbolic invariance, and mark the minimal
/// totally invariant ones (those containing no smaller totally invariant
/// subspace within the enumerated family).  The union of the minimal
/// elements is the exceptional-set candidate for the monomial family.
///
/// Monomial maps only: sampling cannot certify invariance.
pub fn enumerate_invariant_coordinate_subspaces(
    map: &LiftedEndomorphism,
    max_codim: usize,
) -> Result<Vec<(CoordinateSubspace, bool)>> {
    if !map.is_monomial_map() {
        return Err(Error::Unsupported(
            "exact invariance enumeration needs monomial components".into(),
        ));
    }
    let k = map.k();
    let kplus = k + 1;
    let mut invariant: Vec<CoordinateSubspace> = Vec::new();
    for mask in 1u32..(1 << kplus) {
        let zero_set: Vec<usize> = (0..kplus).filter(|&j| mask >> j & 1 == 1).collect();
        if zero_set.len() > k || zero_set.len() > max_codim {
            continue;
        }
        let sub = CoordinateSubspace::new(k, &zero_set)?;
        let report = symbolic_invariance(map, &sub);
        if report.totally_invariant() {
            invariant.push(sub);
        }
    }
    let flags: Vec<bool> = invariant
        .iter()
        .map(|a| {
            !invariant
                .iter()
                .any(|b| b != a && a.contains(b))
        })
        .collect();
    Ok(invariant.into_iter().zip(flags).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{make_perturbed_power_map, make_power_map};

    fn permuted_square_map() -> LiftedEndomorphism {
        // (z0, z1, z2) ↦ (z1², z0², z2²): swaps the first two coordinate
        // directions while squaring.
        let comps = vec![
            HomogeneousPolynomial::new(3, 2, vec![Monomial::new(Complex64::ONE, vec![0, 2, 0])])
                .unwrap(),
            HomogeneousPolynomial::new(3, 2, vec![Monomial::new(Complex64::ONE, vec![2, 0, 0])])
                .unwrap(),
            HomogeneousPolynomial::new(3, 2, vec![Monomial::new(Complex64::ONE, vec![0, 0, 2])])
                .unwrap(),
        ];
        LiftedEndomorphism::from_components(comps).unwrap()
    }

    #[test]
    fn subspace_bookkeeping() {
        let sub = CoordinateSubspace::new(2, &[1, 0]).unwrap();
        assert_eq!(sub.zero_set(), &[0, 1]);
        assert_eq!(sub.dimension(), 0);
        assert_eq!(sub.free_indices(), vec![2]);
        assert!(CoordinateSubspace::new(2, &[0, 1, 2]).is_err());
        assert!(CoordinateSubspace::new(2, &[3]).is_err());
        assert!(CoordinateSubspace::new(2, &[1, 1]).is_err());

        let line = CoordinateSubspace::new(2, &[0]).unwrap();
        let point = CoordinateSubspace::new(2, &[0, 1]).unwrap();
        assert!(line.contains(&point));
        assert!(!point.contains(&line));
        let p = normalize(&[Complex64::ZERO, Complex64::ONE, Complex64::ONE]).unwrap();
        assert!(line.distance(&p) < 1e-15);
        assert!((point.distance(&p) - (0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn subspace_samples_lie_on_the_subspace() {
        let sub = CoordinateSubspace::new(2, &[1]).unwrap();
        for p in sub.sample(50, 9) {
            assert!(sub.distance(&p) < 1e-15);
            assert!((crate::util::complex_norm(p.coords()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_map_hyperplane_is_totally_invariant_symbolically() {
        let f = make_power_map(2, 2).unwrap();
        let sub = CoordinateSubspace::new(2, &[0]).unwrap();
        let report = check_total_invariance(&f, &sub, 10, 1).unwrap();
        assert!(matches!(report.method, InvarianceMethod::Symbolic));
        assert!(report.forward_invariant);
        assert_eq!(report.backward_invariant, Some(true));
        assert!(report.totally_invariant());
    }

    #[test]
    fn power_map_coordinate_point_is_totally_invariant() {
        let f = make_power_map(2, 2).unwrap();
        let sub = CoordinateSubspace::new(2, &[0, 1]).unwrap();
        let report = check_total_invariance(&f, &sub, 10, 1).unwrap();
        assert!(report.totally_invariant());
    }

    #[test]
    fn perturbed_power_map_breaks_invariance_with_visible_residual() {
        let f = make_perturbed_power_map(1, 2, 0.05, 7).unwrap();
        let sub = CoordinateSubspace::new(1, &[0]).unwrap();
        let report = check_total_invariance(&f, &sub, 50, 3).unwrap();
        match report.method {
            InvarianceMethod::Sampled { forward_residual, backward_residual, samples } => {
                assert_eq!(samples, 50);
                assert!(forward_residual > 1e-3, "residual {forward_residual}");
                assert!(backward_residual.expect("solver exists for P^1") > 1e-3);
            }
            InvarianceMethod::Symbolic => panic!("perturbed map is not monomial"),
        }
        assert!(!report.forward_invariant);
        assert_eq!(report.backward_invariant, Some(false));
    }

    #[test]
    fn sampled_and_symbolic_paths_agree_on_monomial_maps() {
        let power = make_power_map(2, 2).unwrap();
        let permuted = permuted_square_map();
        for (map, zero_set, expect) in [
            (&power, vec![0usize], true),
            (&power, vec![0, 2], true),
            (&permuted, vec![0], false),
            (&permuted, vec![0, 1], true),
            (&permuted, vec![2], true),
        ] {
            let sub = CoordinateSubspace::new(2, &zero_set).unwrap();
            let symbolic = check_total_invariance(map, &sub, 1, 1).unwrap();
            assert_eq!(symbolic.totally_invariant(), expect, "symbolic at {zero_set:?}");
            let sampled = check_total_invariance_sampled(map, &sub, 40, 11).unwrap();
            assert_eq!(
                sampled.totally_invariant(),
                expect,
                "sampled path disagrees at {zero_set:?}"
            );
            if let InvarianceMethod::Sampled { forward_residual, backward_residual, .. } =
                sampled.method
            {
                if expect {
                    assert!(forward_residual < 1e-10);
                    assert!(backward_residual.unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn restricted_degree_matches_d_to_the_dimension() {
        let f = make_power_map(2, 2).unwrap();
        let spec = PreimageSolverSpec::PowerMap;

        let line = CoordinateSubspace::new(2, &[0]).unwrap();
        let rep = restricted_topological_degree(&f, &line, 25, 5, &spec).unwrap();
        assert_eq!(rep.expected, 2);
        assert!(rep.counts.iter().all(|&c| c == 2), "histogram {:?}", rep.histogram());

        let point = CoordinateSubspace::new(2, &[0, 1]).unwrap();
        let rep = restricted_topological_degree(&f, &point, 5, 5, &spec).unwrap();
        assert_eq!(rep.expected, 1);
        assert!(rep.counts.iter().all(|&c| c == 1));

        let ambient = CoordinateSubspace::new(2, &[]).unwrap();
        let rep = restricted_topological_degree(&f, &ambient, 25, 5, &spec).unwrap();
        assert_eq!(rep.expected, 4);
        assert!(rep.counts.iter().all(|&c| c == 4), "histogram {:?}", rep.histogram());
    }

    #[test]
    fn power_map_enumeration_finds_three_minimal_points_among_six() {
        let f = make_power_map(2, 2).unwrap();
        let all = enumerate_invariant_coordinate_subspaces(&f, 2).unwrap();
        assert_eq!(all.len(), 6);
        let minimal: Vec<_> = all.iter().filter(|(_, m)| *m).collect();
        assert_eq!(minimal.len(), 3);
        for (sub, _) in &minimal {
            assert_eq!(sub.dimension(), 0, "minimal elements are the coordinate points");
        }
        // No two minimal subspaces nest.
        for (a, _) in &minimal {
            for (b, _) in &minimal {
                if a != b {
                    assert!(!a.contains(b) && !b.contains(a));
                }
            }
        }
    }

    #[test]
    fn projective_line_power_map_has_two_exceptional_points() {
        let f = make_power_map(1, 3).unwrap();
        let all = enumerate_invariant_coordinate_subspaces(&f, 1).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|(sub, minimal)| sub.dimension() == 0 && *minimal));
    }

    #[test]
    fn permuted_map_respects_only_orbit_compatible_subspaces() {
        let f = permuted_square_map();
        let all = enumerate_invariant_coordinate_subspaces(&f, 2).unwrap();
        let zero_sets: Vec<Vec<usize>> =
            all.iter().map(|(s, _)| s.zero_set().to_vec()).collect();
        assert_eq!(zero_sets, vec![vec![0, 1], vec![2]]);
        assert!(all.iter().all(|(_, minimal)| *minimal));
    }

    #[test]
    fn enumeration_rejects_non_monomial_maps() {
        let f = make_perturbed_power_map(2, 2, 0.05, 3).unwrap();
        assert!(enumerate_invariant_coordinate_subspaces(&f, 2).is_err());
    }
}
