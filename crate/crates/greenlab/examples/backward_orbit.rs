//! Backward orbits: equidistribution from a generic point, collapse from an
//! exceptional one.
//!
//! Pulling a point mass `delta_a` back through `f^n` and dividing by `d^n`
//! produces a probability measure on the `d^n` preimages (counted with
//! multiplicity).  For `f([z0 : z1]) = [z0^2 : z1^2]`:
//!   * from the generic point a = [1 : 2] the preimages are 2^n-th roots
//!     scattered around a circle — the angular distribution flattens toward
//!     uniform, which is the invariant measure on |z| = 1 in this chart;
//!   * from the exceptional point a = [1 : 0] every preimage is again
//!     [1 : 0]: the backward orbit never leaves the exceptional set and the
//!     measure stays a single atom forever.
//!
//! The flattening is quantified with a Kolmogorov-Smirnov statistic of the
//! preimage angles against the uniform law, and the quality of the measure
//! from the generic point is cross-checked by comparing its logarithmic
//! potential against the known Green potential of the map.
//!
//! Run with: `cargo run --example backward_orbit`

use greenlab::{
    backward_orbit_measure, make_power_map, normalize, potential_residual, EmpiricalMeasure,
    PreimageSolverSpec, Result,
};
use num_complex::Complex64;

/// Kolmogorov-Smirnov distance between atom angles (weighted) and the
/// uniform distribution on the circle.
fn angular_ks(measure: &EmpiricalMeasure) -> f64 {
    let mut angles: Vec<(f64, f64)> = measure
        .atoms()
        .iter()
        .map(|(p, w)| {
            // Chart coordinate z1/z0; all atoms here stay away from [1:0].
            let t = p.coords()[1] / p.coords()[0];
            let angle = t.arg().rem_euclid(std::f64::consts::TAU);
            (angle / std::f64::consts::TAU, *w)
        })
        .collect();
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = angles.iter().map(|(_, w)| w).sum();
    let mut cdf = 0.0;
    let mut ks = 0.0f64;
    for (u, w) in angles {
        ks = ks.max((cdf - u).abs());
        cdf += w / total;
        ks = ks.max((cdf - u).abs());
    }
    ks
}

fn main() -> Result<()> {
    let map = make_power_map(1, 2)?;
    let one = Complex64::new(1.0, 0.0);

    println!("backward orbit of a = [1 : 2] under z -> z^2");
    println!("{:>3} {:>8} {:>12}", "n", "atoms", "angular KS");
    let a = normalize(&[one, Complex64::new(2.0, 0.0)])?;
    for n in [1usize, 2, 4, 8, 12] {
        let mu = backward_orbit_measure(&map, &a, n, 1 << 13, 5, &PreimageSolverSpec::Univariate)?;
        println!("{n:>3} {:>8} {:>12.5}", mu.len(), angular_ks(&mu));
    }

    // Potential cross-check: the logarithmic potential of the depth-12
    // backward measure should match the Green potential of the map at
    // points away from the support.
    let mu = backward_orbit_measure(&map, &a, 12, 1 << 13, 5, &PreimageSolverSpec::Univariate)?;
    let tests: Vec<_> = [3.0, -2.5, 4.0]
        .iter()
        .map(|&t| normalize(&[one, Complex64::new(t, 0.7)]))
        .collect::<Result<_>>()?;
    let residual = potential_residual(&mu, &map, &tests, 1e-10)?;
    println!(
        "max potential residual at {} off-support test points: {:.2e}",
        residual.points_used, residual.max_residual
    );

    // The exceptional point: total collapse instead of equidistribution.
    // Every preimage of [1 : 0] is [1 : 0] again (with multiplicity d, kept
    // as repeated atoms), so the backward measure IS the point mass delta_a.
    println!("\nbackward orbit of the fixed critical point a = [1 : 0]:");
    let a = normalize(&[one, Complex64::new(0.0, 0.0)])?;
    for n in [1usize, 6, 12] {
        let mu = backward_orbit_measure(&map, &a, n, 1 << 13, 5, &PreimageSolverSpec::Univariate)?;
        let spread = mu
            .atoms()
            .iter()
            .map(|(p, _)| greenlab::fs_distance(p, &a))
            .fold(0.0f64, f64::max);
        let mass_at_a: f64 = mu.atoms().iter().map(|(_, w)| w).sum();
        println!(
            "  n = {n:>2}: {:>4} atoms, max distance from a: {spread:.1e}, total mass {mass_at_a}",
            mu.len(),
        );
    }
    println!("the dichotomy in action: nothing escapes an exceptional set backwards");
    Ok(())
}
