//! Equidistribution of pulled-back hypersurfaces, watched through potentials.
//!
//! For an endomorphism `f` of `P^k` of degree `d` and a hypersurface `H` of
//! degree `m`, the normalized pull-backs `d^{-n} (f^n)^* [H]` converge to
//! `m` times the invariant current — unless `H` is exceptional.  At the
//! level of potentials this is the statement that
//!
//!     u_n = d^{-n} log(|Q ∘ F^n| / ||·||^{m d^n})  ->  u_infinity = 0
//!
//! in L^1 against the Fubini-Study measure, at the geometric rate `1/d`
//! once the starting potential is bounded.  The example contrasts:
//!   * a generic line under the squaring map of P^2  (converges at rate 1/2),
//!   * the coordinate hyperplane {z_0 = 0}           (totally invariant:
//!     its potential statistic is frozen — the mean never moves at all).
//!
//! Run with: `cargo run --example pullback_convergence`

use greenlab::experiments::text::parse_homogeneous_polynomial;
use greenlab::{convergence_report, make_power_map, HypersurfaceCurrent, Result};

fn main() -> Result<()> {
    let map = make_power_map(2, 2)?;
    let depths: Vec<usize> = (0..=10).collect();

    // A line with no particular relation to the coordinate axes.
    let generic = HypersurfaceCurrent::new(parse_homogeneous_polynomial(
        "(0.3,0.4)*z0^1 + (-1,0.2)*z1^1 + (0.7,-0.5)*z2^1",
        3,
    )?)?;
    let report = convergence_report(&generic, &map, &depths, 4000, 17, 1e-10)?;
    println!("generic line under [z0^2 : z1^2 : z2^2]:");
    println!("{:>4} {:>14} {:>14} {:>9}", "n", "mean|u_n|", "max|u_n|", "clipped");
    for row in &report.rows {
        println!(
            "{:>4} {:>14.6e} {:>14.6e} {:>9}",
            row.n, row.mean_abs_u, row.max_abs_u, row.clipped_count
        );
    }
    match report.fitted_rate {
        Some(rate) => println!(
            "fitted decay of mean|u_n|: x{:.4} per step (exact rate 1/d = 0.5)",
            rate.exp()
        ),
        None => println!("fitted decay rate: not available (statistic vanished or clipped)"),
    }

    // The exceptional case: {z_0 = 0} pulls back to itself with multiplicity
    // d, so u_n = u_0 identically and the statistic freezes.  Deep iterates
    // eventually underflow double precision near the hyperplane (|z0|^(2^n)
    // falls below the clip floor) — the clipped column reports exactly when
    // the frozen regime ends, so the drift check uses unclipped depths only.
    let exceptional = HypersurfaceCurrent::coordinate_hyperplane(2, 0)?;
    let frozen = convergence_report(&exceptional, &map, &depths, 4000, 17, 1e-10)?;
    println!("\ntotally invariant hyperplane {{z0 = 0}} under the same map:");
    println!("{:>4} {:>14} {:>9}", "n", "mean|u_n|", "clipped");
    for row in &frozen.rows {
        println!("{:>4} {:>14.6e} {:>9}", row.n, row.mean_abs_u, row.clipped_count);
    }
    let drift = frozen
        .rows
        .iter()
        .filter(|r| r.clipped_count == 0)
        .map(|r| (r.mean_abs_u - frozen.rows[0].mean_abs_u).abs())
        .fold(0.0f64, f64::max);
    println!("max drift of the mean over unclipped depths: {drift:.3e} (frozen)");
    Ok(())
}
