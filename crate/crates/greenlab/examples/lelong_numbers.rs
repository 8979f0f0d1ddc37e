//! Lelong numbers read off numerically from sup-over-shrinking-balls slopes.
//!
//! The Lelong number of a current `dd^c u` at a point measures how much mass
//! the current charges there.  The estimator samples Fubini-Study balls of
//! dyadically shrinking radius `r`, records `sup u` on each, and regresses
//! sup against `log r`: the slope is the Lelong number.
//!
//! Hypersurface potentials here are normalized to unit mass (`u` carries a
//! `1/deg` factor), so the slope at a point equals
//!
//!     (vanishing order of Q there) / (deg Q),
//!
//! and a singular curve shows different slopes at different points.  The
//! cuspidal cubic `z1^2 z2 = z0^3` gives the cleanest picture: order 2 at
//! the cusp, order 1 along the rest of the curve, order 0 off it.
//!
//! Run with: `cargo run --example lelong_numbers`

use greenlab::experiments::text::parse_homogeneous_polynomial;
use greenlab::{
    lelong_estimate, lelong_pullback_comparison, make_power_map, normalize, pullback_potential,
    HypersurfaceCurrent, Result,
};
use num_complex::Complex64;

fn probe(
    label: &str,
    h: &HypersurfaceCurrent,
    map: &greenlab::LiftedEndomorphism,
    center: &[Complex64],
    expected: &str,
) -> Result<()> {
    let center = normalize(center)?;
    let est = lelong_estimate(
        |q| Ok(pullback_potential(h, map, q, 0, 1e-10)?.u_n),
        &center,
        0.05,
        8,
        4000,
        23,
    )?;
    println!(
        "{label:<44} slope {:>8.4}  (expected {expected}, fit r^2 {:.3})",
        est.slope, est.r_squared
    );
    Ok(())
}

fn main() -> Result<()> {
    let map = make_power_map(2, 2)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    let hyperplane = HypersurfaceCurrent::coordinate_hyperplane(2, 0)?;
    let cubic = HypersurfaceCurrent::new(parse_homogeneous_polynomial(
        "z1^2*z2 + (-1,0)*z0^3",
        3,
    )?)?;
    let on_h = [zero, one, Complex64::new(0.3, 0.7)];
    let off = [one, Complex64::new(2.0, 0.0), Complex64::new(0.5, -1.0)];
    let smooth = [one, one, one]; // t = 1 on the parametrization (t^2, t^3, 1)
    let cusp = [zero, zero, one];

    println!("sup-slope estimates of Lelong numbers on P^2:");
    probe("hyperplane {z0 = 0}, on it", &hyperplane, &map, &on_h, "1")?;
    probe("cuspidal cubic, smooth point [1:1:1]", &cubic, &map, &smooth, "1/3")?;
    probe("cuspidal cubic, at the cusp [0:0:1]", &cubic, &map, &cusp, "2/3")?;
    probe("hyperplane {z0 = 0}, away from it", &hyperplane, &map, &off, "0")?;

    // Pull-back comparison: nu(u_n, x) against nu(u_0, f^n(x)), with the
    // local topological degree of f^n at x bounding the ratio.
    println!("\nmass transport under pull-back by [z0^2 : z1^2 : z2^2], n = 2:");
    let center = normalize(&on_h)?;
    let cmp = lelong_pullback_comparison(&hyperplane, &map, &center, 2)?;
    println!("  nu(u_0, f^n(center))          = {:.4}", cmp.nu_downstairs);
    println!("  d^n * nu(u_n, center)         = {:.4}", cmp.nu_upstairs);
    println!("  local degree of f^n at center = {:.1}", cmp.local_degree_estimate);
    println!(
        "  sandwich delta^-k * nu <= nu' <= delta * nu: {:.4} <= {:.4} <= {:.4}",
        cmp.nu_downstairs / cmp.local_degree_estimate.powi(2),
        cmp.nu_upstairs,
        cmp.nu_downstairs * cmp.local_degree_estimate,
    );
    Ok(())
}
