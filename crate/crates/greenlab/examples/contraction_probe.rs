//! Exponential-loss probe: how fast can iterated preimages contract balls?
//!
//! Following a forward orbit `x, f(x), f^2(x), ...` and multiplying the
//! smallest singular values of the chart differentials along it estimates
//! the inradius `r_n` of the largest ball around `x` that the branch of
//! `f^{-n}` through `x` can produce from a ball of radius `r` around
//! `f^n(x)`.  Writing `r_n >= c^{d^n}` — a doubly exponential loss — the
//! probe reports `log r_n / d^n`, which must stay bounded below if the
//! loss really is at most doubly exponential with a uniform base.
//!
//! The example runs the probe on a power map (where the contraction along
//! the orbit of a point with coordinates off the unit circle is genuinely
//! doubly exponential) and prints the stabilizing normalized column.
//!
//! Run with: `cargo run --example contraction_probe`

use greenlab::{make_perturbed_power_map, make_power_map, normalize, orbit_inradius_estimate, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    let map = make_power_map(1, 2)?;
    let start = normalize(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)])?;

    println!("orbit of [1 : 2] under z -> z^2, ball radius r = 0.1:");
    println!("{:>3} {:>16} {:>18}", "n", "log r_n", "log(r_n)/d^n");
    let report = orbit_inradius_estimate(&map, &start, 0.1, 14)?;
    for row in &report.rows {
        println!(
            "{:>3} {:>16.6} {:>18.8}{}",
            row.n,
            row.log_rn_estimate,
            row.normalized,
            if row.flagged { "  (degenerate step)" } else { "" },
        );
    }
    println!(
        "fitted base c = {:.6e}; normalized column stabilized: {}",
        report.c_fit, report.stable,
    );
    let tail: Vec<f64> = report.rows.iter().rev().take(5).map(|r| r.normalized).collect();
    let spread = (tail.iter().cloned().fold(f64::MIN, f64::max)
        - tail.iter().cloned().fold(f64::MAX, f64::min))
        / tail.iter().sum::<f64>().abs()
        * 5.0;
    println!("relative spread over the last five rows: {spread:.2e}");

    // The same probe on a perturbed map, where no closed form exists at all;
    // boundedness of the normalized column is exactly what the probe tests.
    let map = make_perturbed_power_map(1, 2, 0.05, 3)?;
    let report = orbit_inradius_estimate(&map, &start, 0.1, 14)?;
    println!("\nsame orbit data for a perturbed map (epsilon = 0.05):");
    let normals: Vec<String> = report.rows.iter().map(|r| format!("{:.4}", r.normalized)).collect();
    println!("normalized column: {}", normals.join(", "));
    println!("fitted base c = {:.6e}; stable: {}", report.c_fit, report.stable);
    Ok(())
}
