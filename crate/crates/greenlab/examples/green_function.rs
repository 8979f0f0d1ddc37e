//! Certified Green potentials of endomorphisms of projective space.
//!
//! Three checks, each printable against something exact:
//!   1. For the coordinatewise power map the Green function of the lift is
//!      exactly `max_i log|z_i|`, so every certified value can be compared
//!      to a closed form.
//!   2. The functional equation `G(F(z)) = d * G(z)` holds for any lift of
//!      any map in the family, exact up to the certified error bounds.
//!   3. The error bound is honest: tightening `tol` shrinks the distance to
//!      the closed form at the advertised geometric rate.
//!
//! Run with: `cargo run --example green_function`

use greenlab::{
    eval_map, green_lift, green_potential, make_perturbed_power_map, make_power_map, normalize,
    sample_fs_uniform, Result,
};
use num_complex::Complex64;

fn main() -> Result<()> {
    // --- 1. Power maps against the closed form -------------------------
    println!("power map z -> z^d on P^k: certified value vs max_i log|z_i|");
    println!("{:>3} {:>3} {:>22} {:>22} {:>11} {:>9}", "k", "d", "computed", "exact", "|diff|", "bound");
    for (k, d) in [(1usize, 2u32), (1, 3), (2, 2), (3, 2)] {
        let map = make_power_map(k, d)?;
        for p in sample_fs_uniform(3, k, 7 + k as u64 * 10 + d as u64) {
            let g = green_potential(&map, &p, 1e-12, 300)?;
            let exact = p
                .coords()
                .iter()
                .map(|z| z.norm().ln())
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{k:>3} {d:>3} {:>22.16} {exact:>22.16} {:>11.3e} {:>9.1e}",
                g.value,
                (g.value - exact).abs(),
                g.error_bound,
            );
            assert!((g.value - exact).abs() <= g.error_bound.max(1e-12));
        }
    }

    // --- 2. The functional equation for a perturbed map ----------------
    // No closed form exists here; the dynamical identity still pins the
    // computation down to the certified bounds.
    let d = 2;
    let map = make_perturbed_power_map(2, d, 0.05, 1)?;
    println!("\nperturbed map on P^2 (epsilon = 0.05): |G(F(z)) - d*G(z)|");
    let mut worst: f64 = 0.0;
    for p in sample_fs_uniform(200, 2, 11) {
        let g_z = green_lift(&map, p.coords(), 1e-12, 300)?;
        let fz = eval_map(&map, p.coords())?;
        let g_fz = green_lift(&map, &fz, 1e-12, 300)?;
        let defect = (g_fz.value - d as f64 * g_z.value).abs();
        let budget = g_fz.error_bound + d as f64 * g_z.error_bound;
        assert!(defect <= budget.max(1e-10), "defect {defect} > budget {budget}");
        worst = worst.max(defect);
    }
    println!("  max defect over 200 Fubini-Study-uniform points: {worst:.3e}");

    // --- 3. The bound is a contract -------------------------------------
    println!("\ntol -> (n_used, |computed - exact|) at [1 : 2] under z -> z^2:");
    let map = make_power_map(1, 2)?;
    let p = normalize(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)])?;
    let exact = (2.0f64 / 5.0f64.sqrt()).ln();
    for tol in [1e-2, 1e-4, 1e-8, 1e-12] {
        let g = green_potential(&map, &p, tol, 300)?;
        println!(
            "  tol {tol:>7.0e}: n_used {:>2}, error {:.3e} (bound {:.3e}, converged {})",
            g.n_used,
            (g.value - exact).abs(),
            g.error_bound,
            g.converged,
        );
        assert!((g.value - exact).abs() <= g.error_bound);
    }
    Ok(())
}
