//! Totally invariant coordinate subspaces and their restricted degrees.
//!
//! A subspace `V` is totally invariant when `f^{-1}(V) = V`.  For the power
//! map every coordinate subspace qualifies; the minimal ones (containing no
//! smaller invariant coordinate subspace) are the fixed coordinate points.
//! Generic perturbations destroy all of them at once — a numerically visible
//! form of the fact that maps with large exceptional sets are rare.
//!
//! Restricting the map to an invariant subspace of dimension `p` produces an
//! endomorphism of `P^p` whose own degree is `d^p`-to-1 onto itself; the
//! example verifies the count by explicitly solving for preimages of random
//! points inside the subspace.
//!
//! Run with: `cargo run --example invariant_sets`

use greenlab::{
    check_total_invariance, enumerate_invariant_coordinate_subspaces, make_perturbed_power_map,
    make_power_map, restricted_topological_degree, CoordinateSubspace, InvarianceMethod,
    PreimageSolverSpec, Result,
};

fn main() -> Result<()> {
    let k = 2;
    let map = make_power_map(k, 2)?;

    println!("invariant coordinate subspaces of [z0^2 : z1^2 : z2^2] on P^2:");
    let mut fixed_points = 0;
    for (sub, minimal) in enumerate_invariant_coordinate_subspaces(&map, k)? {
        let indices: Vec<String> = sub.zero_set().iter().map(usize::to_string).collect();
        println!(
            "  {{z_{} = 0}}: dimension {}, minimal: {minimal}",
            indices.join(" = z_"),
            sub.dimension(),
        );
        if minimal {
            fixed_points += 1;
        }
    }
    println!("minimal invariant subspaces (vertices of the simplex): {fixed_points}");

    // Restricted topological degree on the invariant line {z0 = 0}: the
    // squaring map restricted to that P^1 is again 2-to-1, so every generic
    // point inside the line must have exactly 2 preimages inside the line.
    let line = CoordinateSubspace::new(k, &[0])?;
    let report =
        restricted_topological_degree(&map, &line, 50, 31, &PreimageSolverSpec::PowerMap)?;
    let constant = report.counts.iter().all(|&c| c == report.expected);
    println!(
        "\nrestricted degree on {{z0 = 0}}: expected d^p = {}, observed constant: {constant} \
         over {} trials",
        report.expected,
        report.counts.len(),
    );

    // Now perturb. Total invariance is rigid: an epsilon of generic noise
    // wipes out every proper invariant subspace simultaneously.
    let eps = 0.05;
    let perturbed = make_perturbed_power_map(k, 2, eps, 1)?;
    println!("\nthe same subspaces under a generic degree-2 perturbation (epsilon = {eps}):");
    for mask in 1u32..(1 << (k + 1)) {
        let zero_set: Vec<usize> = (0..=k).filter(|&j| mask >> j & 1 == 1).collect();
        if zero_set.len() > k {
            continue;
        }
        let sub = CoordinateSubspace::new(k, &zero_set)?;
        let report = check_total_invariance(&perturbed, &sub, 64, 77)?;
        let verdict = match &report.method {
            InvarianceMethod::Symbolic => "symbolically".to_string(),
            InvarianceMethod::Sampled {
                forward_residual, ..
            } => format!("forward residual {forward_residual:.2e}"),
        };
        let indices: Vec<String> = sub.zero_set().iter().map(usize::to_string).collect();
        println!(
            "  {{z_{} = 0}}: invariant: {} ({verdict})",
            indices.join(" = z_"),
            report.totally_invariant(),
        );
    }
    println!("every proper coordinate subspace loses invariance at once");
    Ok(())
}
