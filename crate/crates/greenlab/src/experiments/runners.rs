//! One function per experiment: validate the parameter block against the
//! target computation's preconditions (errors name `<experiment>.<field>`),
//! run it, and package CSV tables, rasters, flags, and manifest constants.

use num_complex::Complex64;
use rayon::prelude::*;

use super::emit::{fmt_f64, GrayRaster, Table};
use super::{
    cx, henon_from, invalid, point_from, resolve_solver, text, BackwardSampleParams,
    ContractionProbeParams, ExperimentKind, GreenGridParams, HenonGreenParams,
    HenonPullbackParams, InvarianceCheckParams, LelongParams, MapSpec, Outputs,
    PullbackConvergeParams, SolverChoice,
};
use crate::contraction::orbit_inradius_estimate;
use crate::equidist::{backward_orbit_measure, potential_residual};
use crate::green::{green_potential, henon_green_plus};
use crate::invariant_sets::{
    check_total_invariance, enumerate_invariant_coordinate_subspaces,
    restricted_topological_degree, CoordinateSubspace, InvarianceMethod,
};
use crate::lelong::lelong_estimate;
use crate::poly::LiftedEndomorphism;
use crate::projective::normalize;
use crate::pullback::{
    convergence_report, henon_pullback_report, pullback_potential, ConvergenceReport,
};
use crate::rng::SplitMix64;
use crate::Result;

const ONE_C: Complex64 = Complex64::new(1.0, 0.0);

/// Largest grid/sample/trial budgets the runner accepts; configs beyond
/// these are more likely typos than intent, and the caps keep validation
/// errors in front of hour-long accidents.
const MAX_GRID_CELLS: usize = 4_000_000;
const MAX_SAMPLES: usize = 1_000_000;
const MAX_ATOM_CAP: usize = 4_000_000;
const MAX_DEPTH: usize = 60;
const MAX_TRIALS: usize = 1_000;

fn validate_depths(kind: ExperimentKind, n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(
            kind,
            "n_list",
            "depths must be nonempty and strictly increasing",
        ));
    }
    if *n_list.last().expect("nonempty") > MAX_DEPTH {
        return Err(invalid(
            kind,
            "n_list",
            format!("depths beyond {MAX_DEPTH} are not supported"),
        ));
    }
    Ok(())
}

fn validate_tol(kind: ExperimentKind, tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        Err(invalid(kind, "tol", format!("must be positive, got {tol}")))
    } else {
        Ok(())
    }
}

/// The shared CSV shape of the pull-back convergence experiments.
fn convergence_table(report: &ConvergenceReport) -> Table {
    let mut table = Table::new(&[
        "n",
        "mean_abs_u",
        "max_abs_u",
        "clipped_count",
        "samples_used",
    ]);
    for row in &report.rows {
        table.push_row(vec![
            row.n.to_string(),
            fmt_f64(row.mean_abs_u),
            fmt_f64(row.max_abs_u),
            row.clipped_count.to_string(),
            row.samples_used.to_string(),
        ]);
    }
    table.push_footer(
        "fitted_rate",
        fmt_f64(report.fitted_rate.unwrap_or(f64::NAN)),
    );
    table
}

struct GridCell {
    x: f64,
    y: f64,
    g: f64,
    bound: f64,
    converged: bool,
    error: Option<String>,
}

pub(crate) fn green_grid(map: &LiftedEndomorphism, p: &GreenGridParams) -> Result<Outputs> {
    let kind = ExperimentKind::GreenGrid;
    let k = map.k();
    if p.chart > k {
        return Err(invalid(
            kind,
            "chart",
            format!("chart index {} out of range for P^{k}", p.chart),
        ));
    }
    if p.slice.len() != k - 1 {
        return Err(invalid(
            kind,
            "slice",
            format!(
                "need {} fixed chart coordinates for P^{k}, got {}",
                k - 1,
                p.slice.len()
            ),
        ));
    }
    if !super::all_finite(&p.slice) {
        return Err(invalid(kind, "slice", "coordinates must be finite"));
    }
    if !p.x_min.is_finite() {
        return Err(invalid(kind, "x_min", "must be finite"));
    }
    if !(p.x_max.is_finite() && p.x_max > p.x_min) {
        return Err(invalid(kind, "x_max", "must be finite and exceed x_min"));
    }
    if !p.y_min.is_finite() {
        return Err(invalid(kind, "y_min", "must be finite"));
    }
    if !(p.y_max.is_finite() && p.y_max > p.y_min) {
        return Err(invalid(kind, "y_max", "must be finite and exceed y_min"));
    }
    if p.nx < 2 {
        return Err(invalid(kind, "nx", "need at least 2 grid columns"));
    }
    if p.ny < 2 {
        return Err(invalid(kind, "ny", "need at least 2 grid rows"));
    }
    if p.nx.saturating_mul(p.ny) > MAX_GRID_CELLS {
        return Err(invalid(
            kind,
            "nx",
            format!("nx*ny = {} exceeds {MAX_GRID_CELLS} cells", p.nx * p.ny),
        ));
    }
    validate_tol(kind, p.tol)?;
    if p.n_max == 0 {
        return Err(invalid(kind, "n_max", "need at least one iteration"));
    }

    let dx = (p.x_max - p.x_min) / (p.nx - 1) as f64;
    let dy = (p.y_max - p.y_min) / (p.ny - 1) as f64;
    let slice: Vec<Complex64> = p.slice.iter().map(|&v| cx(v)).collect();

    let cells: Vec<GridCell> = (0..p.nx * p.ny)
        .into_par_iter()
        .map(|idx| {
            let ix = idx % p.nx;
            let iy = idx / p.nx;
            let x = p.x_min + ix as f64 * dx;
            let y = p.y_min + iy as f64 * dy;
            let mut rest = std::iter::once(Complex64::new(x, y)).chain(slice.iter().copied());
            let mut z = Vec::with_capacity(k + 1);
            for j in 0..=k {
                if j == p.chart {
                    z.push(ONE_C);
                } else {
                    z.push(rest.next().expect("k chart coordinates"));
                }
            }
            match normalize(&z).and_then(|pt| green_potential(map, &pt, p.tol, p.n_max)) {
                Ok(g) => GridCell {
                    x,
                    y,
                    g: g.value,
                    bound: g.error_bound,
                    converged: g.converged,
                    error: None,
                },
                Err(e) => GridCell {
                    x,
                    y,
                    g: f64::NAN,
                    bound: f64::INFINITY,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut out = Outputs::new();
    let mut table = Table::new(&["chart", "x", "y", "g_value", "error_bound"]);
    for cell in &cells {
        table.push_row(vec![
            p.chart.to_string(),
            fmt_f64(cell.x),
            fmt_f64(cell.y),
            fmt_f64(cell.g),
            fmt_f64(cell.bound),
        ]);
    }
    out.add_table("green-grid.csv", &table);

    if p.raster {
        // Raster rows run top-down (largest y first); the CSV runs bottom-up.
        let mut values = vec![0.0; cells.len()];
        for (idx, cell) in cells.iter().enumerate() {
            let ix = idx % p.nx;
            let iy = idx / p.nx;
            values[(p.ny - 1 - iy) * p.nx + ix] = cell.g;
        }
        out.add_file(
            "green-grid.ppm",
            GrayRaster::from_values(&values, p.nx, p.ny).render_pgm(),
        );
    }

    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    let unconverged = cells
        .iter()
        .filter(|c| c.error.is_none() && !c.converged)
        .count();
    if failed > 0 {
        let first = cells
            .iter()
            .find_map(|c| c.error.clone())
            .expect("failed cells exist");
        out.flag(format!(
            "{failed} grid points failed to evaluate (recorded as NaN); first error: {first}"
        ));
    }
    if unconverged > 0 {
        out.flag(format!(
            "{unconverged} grid points did not reach tol within n_max; \
             their error_bound column is the certified bound actually achieved"
        ));
    }
    out.constant_f64("log_norm_bound", map.log_norm_bound());
    out.constant("degree", map.degree());
    out.constant("failed_cells", failed);
    out.constant("unconverged_cells", unconverged);
    Ok(out)
}

pub(crate) fn pullback_converge(
    map: &LiftedEndomorphism,
    p: &PullbackConvergeParams,
    seed: u64,
) -> Result<Outputs> {
    let kind = ExperimentKind::PullbackConverge;
    let h = p.hypersurface.build(map.k(), kind)?;
    validate_depths(kind, &p.n_list)?;
    if !(100..=MAX_SAMPLES).contains(&p.sample_count) {
        return Err(invalid(
            kind,
            "sample_count",
            format!("must lie in 100..={MAX_SAMPLES}"),
        ));
    }
    validate_tol(kind, p.tol)?;

    let report = convergence_report(&h, map, &p.n_list, p.sample_count, seed, p.tol)?;
    let mut out = Outputs::new();
    out.add_table("pullback-converge.csv", &convergence_table(&report));
    if report.degenerate {
        out.flag("some depth lost every sample to potential clipping");
    }
    out.constant("map_id", report.map_id.clone());
    out.constant("hypersurface_id", report.hypersurface_id.clone());
    out.constant_f64("log_norm_bound", map.log_norm_bound());
    out.constant_f64("fitted_rate", report.fitted_rate.unwrap_or(f64::NAN));
    Ok(out)
}

pub(crate) fn lelong(map: &LiftedEndomorphism, p: &LelongParams, seed: u64) -> Result<Outputs> {
    let kind = ExperimentKind::Lelong;
    let h = p.hypersurface.build(map.k(), kind)?;
    let center = point_from(kind, "center", &p.center, map.k() + 1)?;
    if p.depth > MAX_DEPTH {
        return Err(invalid(kind, "depth", format!("must be at most {MAX_DEPTH}")));
    }
    if !(p.r_max > 0.0 && p.r_max <= 0.25) {
        return Err(invalid(
            kind,
            "r_max",
            format!("must lie in (0, 0.25], got {}", p.r_max),
        ));
    }
    if !(4..=40).contains(&p.levels) {
        return Err(invalid(kind, "levels", "must lie in 4..=40"));
    }
    if !(500..=MAX_SAMPLES).contains(&p.samples_per_radius) {
        return Err(invalid(
            kind,
            "samples_per_radius",
            format!("must lie in 500..={MAX_SAMPLES}"),
        ));
    }
    validate_tol(kind, p.tol)?;

    let estimate = lelong_estimate(
        |q| Ok(pullback_potential(&h, map, q, p.depth, p.tol)?.u_n),
        &center,
        p.r_max,
        p.levels,
        p.samples_per_radius,
        seed,
    )?;

    let mut out = Outputs::new();
    let mut table = Table::new(&["log_r", "sup_u"]);
    for (r, sup) in estimate.radii.iter().zip(&estimate.sups) {
        table.push_row(vec![fmt_f64(r.ln()), fmt_f64(*sup)]);
    }
    table.push_footer("slope", fmt_f64(estimate.slope));
    table.push_footer("r_squared", fmt_f64(estimate.r_squared));
    out.add_table("lelong.csv", &table);

    if estimate.infinite {
        out.flag(
            "every sample clipped: the potential is -inf on an analytic set \
             through the center, and the slope is reported as inf",
        );
    }
    out.constant_f64("slope", estimate.slope);
    out.constant_f64("r_squared", estimate.r_squared);
    out.constant("infinite", estimate.infinite);
    Ok(out)
}

pub(crate) fn backward_sample(
    map: &LiftedEndomorphism,
    map_spec: &MapSpec,
    p: &BackwardSampleParams,
    seed: u64,
) -> Result<Outputs> {
    let kind = ExperimentKind::BackwardSample;
    let k = map.k();
    let a = point_from(kind, "a", &p.a, k + 1)?;
    if !(1..=40).contains(&p.n) {
        return Err(invalid(kind, "n", "must lie in 1..=40"));
    }
    if !(1000..=MAX_ATOM_CAP).contains(&p.max_atoms) {
        return Err(invalid(
            kind,
            "max_atoms",
            format!("must lie in 1000..={MAX_ATOM_CAP}"),
        ));
    }
    if !super::all_finite(&p.test_points) {
        return Err(invalid(kind, "test_points", "coordinates must be finite"));
    }
    validate_tol(kind, p.tol)?;
    let solver = resolve_solver(&p.solver, map_spec, map, kind)?;

    let measure = backward_orbit_measure(map, &a, p.n, p.max_atoms, seed, &solver)?;

    let mut out = Outputs::new();
    let mut columns = Vec::with_capacity(2 * (k + 1) + 1);
    for j in 0..=k {
        columns.push(format!("re_{j}"));
        columns.push(format!("im_{j}"));
    }
    columns.push("weight".into());
    let mut table = Table::with_columns(columns);
    for (point, weight) in measure.atoms() {
        let mut row = Vec::with_capacity(2 * (k + 1) + 1);
        for z in point.coords() {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.push(fmt_f64(*weight));
        table.push_row(row);
    }
    out.add_table("backward-sample.csv", &table);

    let exact_branches = (map.degree() as f64).powi((k * p.n) as i32);
    if exact_branches > p.max_atoms as f64 {
        out.flag(format!(
            "exact expansion would hold {exact_branches:.3e} atoms; levels past \
             the cap were stratified-resampled down to {}",
            p.max_atoms
        ));
    }
    out.constant("atom_count", measure.len());
    out.constant_f64("total_mass", measure.total());
    out.constant_f64("exact_branch_count", exact_branches);

    if k == 1 && !p.test_points.is_empty() {
        let mut table = Table::new(&["re_t", "im_t", "residual", "used", "excluded"]);
        for tp in &p.test_points {
            let pt = normalize(&[ONE_C, cx(*tp)])?;
            let rep = potential_residual(&measure, map, std::slice::from_ref(&pt), p.tol)?;
            table.push_row(vec![
                fmt_f64(tp[0]),
                fmt_f64(tp[1]),
                fmt_f64(rep.max_residual),
                rep.points_used.to_string(),
                rep.points_excluded.to_string(),
            ]);
        }
        out.add_table("measure-test.csv", &table);
    } else if !p.test_points.is_empty() {
        match potential_residual(&measure, map, &[], p.tol) {
            Ok(rep) => {
                out.constant_f64("moment_residual", rep.max_residual);
                out.flag(
                    "test points apply to maps of P^1 only; recorded the \
                     moment-dictionary residual in the manifest constants instead",
                );
            }
            Err(e) => out.flag(format!("no potential oracle applies to this map: {e}")),
        }
    }
    Ok(out)
}

pub(crate) fn invariance_check(
    map: &LiftedEndomorphism,
    map_spec: &MapSpec,
    p: &InvarianceCheckParams,
    seed: u64,
) -> Result<Outputs> {
    let kind = ExperimentKind::InvarianceCheck;
    let k = map.k();
    let max_codim = p.max_codim.unwrap_or(k);
    if !(1..=k).contains(&max_codim) {
        return Err(invalid(kind, "max_codim", format!("must lie in 1..={k}")));
    }
    if !(10..=MAX_SAMPLES).contains(&p.sample_count) {
        return Err(invalid(
            kind,
            "sample_count",
            format!("must lie in 10..={MAX_SAMPLES}"),
        ));
    }
    if p.restricted_degree_trials > MAX_TRIALS {
        return Err(invalid(
            kind,
            "restricted_degree_trials",
            format!("must be at most {MAX_TRIALS}"),
        ));
    }

    // Exact minimality flags exist for monomial maps only.
    let minimal_lookup: Option<std::collections::BTreeMap<Vec<usize>, bool>> =
        if map.is_monomial_map() {
            Some(
                enumerate_invariant_coordinate_subspaces(map, max_codim)?
                    .into_iter()
                    .map(|(sub, minimal)| (sub.zero_set().to_vec(), minimal))
                    .collect(),
            )
        } else {
            None
        };

    let mut out = Outputs::new();
    let mut table = Table::new(&[
        "indices",
        "codim",
        "dimension",
        "forward",
        "backward",
        "method",
        "forward_residual",
        "backward_residual",
        "minimal",
    ]);
    let mut invariant: Vec<CoordinateSubspace> = Vec::new();
    let mut sampled_any = false;
    for mask in 1u32..(1u32 << (k + 1)) {
        let zero_set: Vec<usize> = (0..=k).filter(|&j| mask >> j & 1 == 1).collect();
        if zero_set.len() > k.min(max_codim) {
            continue;
        }
        let sub = CoordinateSubspace::new(k, &zero_set)?;
        let sub_seed = SplitMix64::substream(seed, mask as u64).next_u64();
        let report = check_total_invariance(map, &sub, p.sample_count, sub_seed)?;
        let (method, forward_res, backward_res) = match &report.method {
            InvarianceMethod::Symbolic => ("symbolic", String::new(), String::new()),
            InvarianceMethod::Sampled {
                forward_residual,
                backward_residual,
                ..
            } => {
                sampled_any = true;
                (
                    "sampled",
                    fmt_f64(*forward_residual),
                    backward_residual.map(fmt_f64).unwrap_or_default(),
                )
            }
        };
        let minimal_cell = match &minimal_lookup {
            Some(lookup) if report.totally_invariant() => lookup
                .get(&zero_set)
                .map(|m| m.to_string())
                .unwrap_or_default(),
            _ => String::new(),
        };
        let indices: Vec<String> = zero_set.iter().map(|j| j.to_string()).collect();
        table.push_row(vec![
            indices.join(";"),
            zero_set.len().to_string(),
            sub.dimension().to_string(),
            report.forward_invariant.to_string(),
            report
                .backward_invariant
                .map(|b| b.to_string())
                .unwrap_or_default(),
            method.into(),
            forward_res,
            backward_res,
            minimal_cell,
        ]);
        if report.totally_invariant() {
            invariant.push(sub);
        }
    }
    out.add_table("invariance-check.csv", &table);

    let minimal_count = minimal_lookup
        .as_ref()
        .map(|l| l.values().filter(|&&m| m).count());
    out.constant("totally_invariant_count", invariant.len());
    if let Some(mc) = minimal_count {
        out.constant("minimal_count", mc);
    }
    if sampled_any {
        out.flag("sampled verdicts can refute invariance but not certify it");
    }

    if p.restricted_degree_trials > 0 {
        match resolve_solver(&SolverChoice::Auto, map_spec, map, kind) {
            Ok(solver) => {
                let mut table = Table::new(&[
                    "indices",
                    "dimension",
                    "trials",
                    "expected",
                    "observed_min",
                    "observed_max",
                    "constant",
                    "resampled",
                ]);
                for (i, sub) in invariant.iter().enumerate() {
                    let rd_seed = SplitMix64::substream(seed, 1_000_000 + i as u64).next_u64();
                    let report = restricted_topological_degree(
                        map,
                        sub,
                        p.restricted_degree_trials,
                        rd_seed,
                        &solver,
                    )?;
                    let lo = report.counts.iter().min().copied().unwrap_or(0);
                    let hi = report.counts.iter().max().copied().unwrap_or(0);
                    let indices: Vec<String> =
                        sub.zero_set().iter().map(|j| j.to_string()).collect();
                    table.push_row(vec![
                        indices.join(";"),
                        sub.dimension().to_string(),
                        report.counts.len().to_string(),
                        report.expected.to_string(),
                        lo.to_string(),
                        hi.to_string(),
                        (lo == report.expected && hi == report.expected).to_string(),
                        report.resampled.to_string(),
                    ]);
                }
                out.add_table("restricted-degree.csv", &table);
            }
            Err(_) => out.flag(
                "restricted-degree table skipped: no preimage solver applies to this map",
            ),
        }
    }
    Ok(out)
}

pub(crate) fn contraction_probe(
    map: &LiftedEndomorphism,
    p: &ContractionProbeParams,
) -> Result<Outputs> {
    let kind = ExperimentKind::ContractionProbe;
    let start = point_from(kind, "start", &p.start, map.k() + 1)?;
    if !(p.r > 0.0 && p.r < 0.25) {
        return Err(invalid(
            kind,
            "r",
            format!("must lie in (0, 0.25), got {}", p.r),
        ));
    }
    if !(1..=25).contains(&p.n_max) {
        return Err(invalid(kind, "n_max", "must lie in 1..=25"));
    }

    let report = orbit_inradius_estimate(map, &start, p.r, p.n_max)?;
    let mut out = Outputs::new();
    let mut table = Table::new(&[
        "n",
        "log_rn_estimate",
        "log_sigma_min_product",
        "normalized",
        "flagged",
    ]);
    for row in &report.rows {
        table.push_row(vec![
            row.n.to_string(),
            fmt_f64(row.log_rn_estimate),
            fmt_f64(row.log_sigma_min_product),
            fmt_f64(row.normalized),
            row.flagged.to_string(),
        ]);
    }
    table.push_footer("c_fit", fmt_f64(report.c_fit));
    table.push_footer("stable", report.stable.to_string());
    out.add_table("contraction-probe.csv", &table);

    let flagged = report.rows.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        out.flag(format!(
            "{flagged} rows hit the degenerate-step floor; their product \
             column is a surrogate lower envelope, not a measured value"
        ));
    }
    out.constant_f64("c_fit", report.c_fit);
    out.constant("stable", report.stable);
    out.constant("flagged_rows", flagged);
    Ok(out)
}

struct HenonSample {
    z: Vec<Complex64>,
    g: f64,
    escaped: bool,
    n_direct: usize,
    n_renormalized: usize,
    bound: f64,
    error: Option<String>,
}

pub(crate) fn henon_green(p: &HenonGreenParams, seed: u64) -> Result<Outputs> {
    let kind = ExperimentKind::HenonGreen;
    let aut = henon_from(kind, p.a, p.c)?;
    p.region
        .validate()
        .map_err(|e| invalid(kind, "region", e))?;
    if !(1..=MAX_SAMPLES).contains(&p.sample_count) {
        return Err(invalid(
            kind,
            "sample_count",
            format!("must lie in 1..={MAX_SAMPLES}"),
        ));
    }
    validate_tol(kind, p.tol)?;
    if p.n_max == 0 {
        return Err(invalid(kind, "n_max", "need at least one iteration"));
    }

    let rows: Vec<HenonSample> = (0..p.sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let z = p.region.sample(2, seed, i);
            match henon_green_plus(&aut, &z, p.tol, p.n_max) {
                Ok(v) => HenonSample {
                    z,
                    g: v.value,
                    escaped: v.escaped,
                    n_direct: v.n_direct,
                    n_renormalized: v.n_renormalized,
                    bound: v.error_bound,
                    error: None,
                },
                Err(e) => HenonSample {
                    z,
                    g: f64::NAN,
                    escaped: false,
                    n_direct: 0,
                    n_renormalized: 0,
                    bound: f64::INFINITY,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut out = Outputs::new();
    let mut table = Table::new(&[
        "re_0",
        "im_0",
        "re_1",
        "im_1",
        "g_plus",
        "escaped",
        "n_direct",
        "n_renormalized",
        "error_bound",
    ]);
    for s in &rows {
        table.push_row(vec![
            fmt_f64(s.z[0].re),
            fmt_f64(s.z[0].im),
            fmt_f64(s.z[1].re),
            fmt_f64(s.z[1].im),
            fmt_f64(s.g),
            s.escaped.to_string(),
            s.n_direct.to_string(),
            s.n_renormalized.to_string(),
            fmt_f64(s.bound),
        ]);
    }
    out.add_table("henon-green.csv", &table);

    let escaped = rows.iter().filter(|s| s.escaped).count();
    let failed = rows.iter().filter(|s| s.error.is_some()).count();
    let interior = rows.len() - escaped - failed;
    if failed > 0 {
        let first = rows
            .iter()
            .find_map(|s| s.error.clone())
            .expect("failed rows exist");
        out.flag(format!(
            "{failed} orbits overflowed before certifying escape (rows carry \
             NaN); first error: {first}"
        ));
    }
    if interior > 0 {
        out.flag(format!(
            "{interior} orbits stayed bounded within n_max: their G+ value 0 \
             carries an infinite error bound (escape was never certified)"
        ));
    }
    out.constant_f64("filtration_radius", aut.filtration_radius());
    out.constant("escaped_count", escaped);
    out.constant("interior_count", interior);
    out.constant("failed_count", failed);
    Ok(out)
}

pub(crate) fn henon_pullback(p: &HenonPullbackParams, seed: u64) -> Result<Outputs> {
    let kind = ExperimentKind::HenonPullback;
    let aut = henon_from(kind, p.a, p.c)?;
    let q = text::parse_affine_polynomial(&p.q, 2).map_err(|e| invalid(kind, "q", e))?;
    if q.total_degree() == 0 {
        return Err(invalid(kind, "q", "must be nonconstant"));
    }
    validate_depths(kind, &p.n_list)?;
    p.region
        .validate()
        .map_err(|e| invalid(kind, "region", e))?;
    if !(1..=MAX_SAMPLES).contains(&p.sample_count) {
        return Err(invalid(
            kind,
            "sample_count",
            format!("must lie in 1..={MAX_SAMPLES}"),
        ));
    }

    let report = henon_pullback_report(&aut, &q, &p.n_list, &p.region, p.sample_count, seed)?;
    let mut out = Outputs::new();
    let non_escaping_count = report.non_escaping.as_ref().map_or(0, |s| s.count);
    let mut table = convergence_table(&report);
    table.push_footer("non_escaping_count", non_escaping_count.to_string());
    out.add_table("henon-pullback.csv", &table);

    if let Some(summary) = &report.non_escaping {
        if !summary.rows.is_empty() {
            let mut table = Table::new(&[
                "n",
                "mean_abs_u",
                "max_abs_u",
                "clipped_count",
                "samples_used",
            ]);
            for row in &summary.rows {
                table.push_row(vec![
                    row.n.to_string(),
                    fmt_f64(row.mean_abs_u),
                    fmt_f64(row.max_abs_u),
                    row.clipped_count.to_string(),
                    row.samples_used.to_string(),
                ]);
            }
            out.add_table("henon-pullback-nonescaping.csv", &table);
        }
    }

    if report.degenerate {
        out.flag("no sample certified escape at some depth");
    }
    if non_escaping_count > 0 {
        out.flag(format!(
            "{non_escaping_count} samples never certified escape; their \
             statistics are kept in the non-escaping table"
        ));
    }
    out.constant("map_id", report.map_id.clone());
    out.constant("hypersurface_id", report.hypersurface_id.clone());
    out.constant("non_escaping_count", non_escaping_count);
    out.constant_f64("fitted_rate", report.fitted_rate.unwrap_or(f64::NAN));
    out.constant_f64("filtration_radius", aut.filtration_radius());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{ExperimentConfig, HypersurfaceSpec};
    use super::*;
    use crate::poly::{make_perturbed_power_map, make_power_map};
    use crate::pullback::AffineRegion;
    use crate::Error;

    fn find_file<'a>(out: &'a Outputs, name: &str) -> &'a str {
        &out.files
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("missing output file {name}"))
            .1
    }

    fn csv_rows(content: &str) -> Vec<Vec<String>> {
        content
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    fn footer_value(content: &str, key: &str) -> String {
        let prefix = format!("# {key},");
        content
            .lines()
            .find_map(|l| l.strip_prefix(&prefix))
            .unwrap_or_else(|| panic!("missing footer {key}"))
            .to_string()
    }

    fn field_of(err: &Error) -> &str {
        match err {
            Error::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn green_grid_cells_match_direct_potential_evaluation() {
        let map = make_power_map(1, 2).unwrap();
        let params = GreenGridParams {
            chart: 0,
            x_min: -2.0,
            x_max: 2.0,
            y_min: -2.0,
            y_max: 2.0,
            nx: 5,
            ny: 5,
            slice: vec![],
            tol: 1e-10,
            n_max: 200,
            raster: true,
        };
        let out = green_grid(&map, &params).unwrap();
        let csv = find_file(&out, "green-grid.csv");
        let rows = csv_rows(csv);
        assert_eq!(rows.len(), 25);

        // The grid point t = 2 must carry exactly the library's value.
        let row = rows
            .iter()
            .find(|r| r[1] == "2" && r[2] == "0")
            .expect("grid point (2, 0)");
        let direct = green_potential(
            &map,
            &normalize(&[ONE_C, Complex64::new(2.0, 0.0)]).unwrap(),
            1e-10,
            200,
        )
        .unwrap();
        let g: f64 = row[3].parse().unwrap();
        assert_eq!(g.to_bits(), direct.value.to_bits());
        // On the unit-sphere representative of [1 : 2] the squaring map's
        // potential is max_i log|z_i| = log 2 - (1/2) log 5.
        assert!((g - (2.0f64.ln() - 0.5 * 5.0f64.ln())).abs() < 1e-6, "{g}");

        let pgm = find_file(&out, "green-grid.ppm");
        assert!(pgm.starts_with("P2\n5 5\n255\n"), "{pgm}");
        assert_eq!(pgm.lines().count(), 8);
        assert!(out.flags.is_empty(), "{:?}", out.flags);
    }

    #[test]
    fn green_grid_validation_names_the_field() {
        let map = make_power_map(1, 2).unwrap();
        let base = GreenGridParams {
            chart: 0,
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
            nx: 3,
            ny: 3,
            slice: vec![],
            tol: 1e-10,
            n_max: 200,
            raster: false,
        };

        let mut p = base.clone();
        p.chart = 2;
        assert_eq!(field_of(&green_grid(&map, &p).unwrap_err()), "green-grid.chart");

        let mut p = base.clone();
        p.x_max = -1.0;
        assert_eq!(field_of(&green_grid(&map, &p).unwrap_err()), "green-grid.x_max");

        let mut p = base.clone();
        p.ny = 1;
        assert_eq!(field_of(&green_grid(&map, &p).unwrap_err()), "green-grid.ny");

        let map2 = make_power_map(2, 2).unwrap();
        assert_eq!(
            field_of(&green_grid(&map2, &base).unwrap_err()),
            "green-grid.slice"
        );
    }

    #[test]
    fn pullback_rows_reproduce_the_library_report() {
        let map = make_power_map(1, 2).unwrap();
        let params = PullbackConvergeParams {
            hypersurface: HypersurfaceSpec {
                coordinate: Some(1),
                polynomial: None,
            },
            n_list: vec![0, 2, 4],
            sample_count: 200,
            tol: 1e-10,
        };
        let out = pullback_converge(&map, &params, 11).unwrap();
        let csv = find_file(&out, "pullback-converge.csv");
        let rows = csv_rows(csv);

        let h = crate::pullback::HypersurfaceCurrent::coordinate_hyperplane(1, 1).unwrap();
        let report = convergence_report(&h, &map, &[0, 2, 4], 200, 11, 1e-10).unwrap();
        assert_eq!(rows.len(), report.rows.len());
        for (row, direct) in rows.iter().zip(&report.rows) {
            assert_eq!(row[0].parse::<usize>().unwrap(), direct.n);
            let mean: f64 = row[1].parse().unwrap();
            assert_eq!(mean.to_bits(), direct.mean_abs_u.to_bits());
            assert_eq!(row[4].parse::<usize>().unwrap(), direct.samples_used);
        }
        let rate: f64 = footer_value(csv, "fitted_rate").parse().unwrap();
        assert_eq!(rate.to_bits(), report.fitted_rate.unwrap().to_bits());
    }

    #[test]
    fn lelong_probe_regresses_the_hyperplane_mass() {
        let map = make_power_map(1, 2).unwrap();
        let params = LelongParams {
            hypersurface: HypersurfaceSpec {
                coordinate: Some(0),
                polynomial: None,
            },
            center: vec![[0.0, 0.0], [1.0, 0.0]],
            depth: 0,
            r_max: 0.1,
            levels: 5,
            samples_per_radius: 600,
            tol: 1e-9,
        };
        let out = lelong(&map, &params, 3).unwrap();
        let csv = find_file(&out, "lelong.csv");
        assert_eq!(csv_rows(csv).len(), 5);
        let slope: f64 = footer_value(csv, "slope").parse().unwrap();
        assert!((slope - 1.0).abs() < 0.2, "slope {slope}");
        assert!(footer_value(csv, "r_squared").parse::<f64>().unwrap() > 0.9);

        let mut p = params.clone();
        p.r_max = 0.5;
        assert_eq!(field_of(&lelong(&map, &p, 3).unwrap_err()), "lelong.r_max");
    }

    #[test]
    fn backward_sample_emits_atoms_and_test_residuals() {
        let map = make_power_map(1, 2).unwrap();
        let spec = MapSpec::Power { k: 1, d: 2 };
        let params = BackwardSampleParams {
            a: vec![[1.0, 0.0], [2.0, 0.0]],
            n: 3,
            max_atoms: 1000,
            solver: SolverChoice::Auto,
            test_points: vec![[3.0, 0.0], [0.0, 3.0]],
            tol: 1e-10,
        };
        let out = backward_sample(&map, &spec, &params, 5).unwrap();

        let atoms = csv_rows(find_file(&out, "backward-sample.csv"));
        assert_eq!(atoms.len(), 8);
        let mass: f64 = atoms.iter().map(|r| r[4].parse::<f64>().unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        for row in &atoms {
            let norm_sqr: f64 = row[..4]
                .iter()
                .map(|v| v.parse::<f64>().unwrap().powi(2))
                .sum();
            assert!((norm_sqr - 1.0).abs() < 1e-12, "atoms are unit-normalized");
        }

        let tests = csv_rows(find_file(&out, "measure-test.csv"));
        assert_eq!(tests.len(), 2);
        for row in &tests {
            assert_eq!(row[3], "1", "test point must be usable");
            let residual: f64 = row[2].parse().unwrap();
            assert!(residual.is_finite() && residual < 0.5, "residual {residual}");
        }
        assert!(out.flags.is_empty(), "no resampling at 8 atoms: {:?}", out.flags);
    }

    #[test]
    fn invariance_rows_cover_every_proper_subspace() {
        let map = make_power_map(2, 2).unwrap();
        let spec = MapSpec::Power { k: 2, d: 2 };
        let params = InvarianceCheckParams {
            max_codim: None,
            sample_count: 20,
            restricted_degree_trials: 3,
        };
        let out = invariance_check(&map, &spec, &params, 9).unwrap();
        let rows = csv_rows(find_file(&out, "invariance-check.csv"));
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row[5], "symbolic");
            assert_eq!(row[3], "true");
            assert_eq!(row[4], "true");
            // Codimension-2 subspaces (the fixed points) are the minimal
            // totally invariant ones; the coordinate lines contain them.
            let expected_minimal = if row[1] == "2" { "true" } else { "false" };
            assert_eq!(row[8], expected_minimal, "row {row:?}");
        }

        let degrees = csv_rows(find_file(&out, "restricted-degree.csv"));
        assert_eq!(degrees.len(), 6);
        for row in &degrees {
            let expected: usize = row[3].parse().unwrap();
            let dim: usize = row[1].parse().unwrap();
            assert_eq!(expected, 2usize.pow(dim as u32));
            assert_eq!(row[6], "true", "constant observed degree: {row:?}");
        }

        let perturbed = make_perturbed_power_map(2, 2, 0.05, 1).unwrap();
        let pspec = MapSpec::PerturbedPower {
            k: 2,
            d: 2,
            epsilon: 0.05,
            perturbation_seed: 1,
        };
        let out = invariance_check(&perturbed, &pspec, &params, 9).unwrap();
        let rows = csv_rows(find_file(&out, "invariance-check.csv"));
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row[5], "sampled");
            assert_eq!(row[3], "false", "no invariant subspace survives noise");
            let residual: f64 = row[6].parse().unwrap();
            assert!(residual > 1e-3, "forward residual {residual}");
        }
        assert!(out.flags.iter().any(|f| f.contains("refute")));
    }

    #[test]
    fn contraction_probe_rows_and_footers_are_consistent() {
        let map = make_power_map(1, 2).unwrap();
        let params = ContractionProbeParams {
            start: vec![[1.0, 0.0], [2.0, 0.0]],
            r: 0.1,
            n_max: 6,
        };
        let out = contraction_probe(&map, &params).unwrap();
        let csv = find_file(&out, "contraction-probe.csv");
        let rows = csv_rows(csv);
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.1f64.ln());
        assert!(rows.iter().all(|r| r[4] == "false"));
        let c_fit: f64 = footer_value(csv, "c_fit").parse().unwrap();
        assert!(c_fit > 0.0);
        assert!(out.flags.is_empty());

        let mut p = params.clone();
        p.r = 0.3;
        assert_eq!(
            field_of(&contraction_probe(&map, &p).unwrap_err()),
            "contraction-probe.r"
        );
    }

    #[test]
    fn henon_green_accounts_for_every_sample() {
        let params = HenonGreenParams {
            a: [1.0, 0.0],
            c: [0.0, 0.0],
            region: AffineRegion::Ball { radius: 2.0 },
            sample_count: 100,
            tol: 1e-8,
            n_max: 100,
        };
        let out = henon_green(&params, 21).unwrap();
        let rows = csv_rows(find_file(&out, "henon-green.csv"));
        assert_eq!(rows.len(), 100);
        let escaped = rows.iter().filter(|r| r[5] == "true").count();
        assert!(escaped > 0, "a radius-2 ball contains escaping points");
        for row in rows.iter().filter(|r| r[5] == "true") {
            let g: f64 = row[4].parse().unwrap();
            let bound: f64 = row[8].parse().unwrap();
            assert!(g > 0.0 && bound < 1e-8);
        }
        for row in rows.iter().filter(|r| r[5] == "false") {
            assert_eq!(row[4], "0", "non-escaping rows carry exactly 0");
        }
    }

    #[test]
    fn henon_pullback_reports_escaping_statistics() {
        let params = HenonPullbackParams {
            a: [1.0, 0.0],
            c: [0.0, 0.0],
            q: "z0".into(),
            n_list: vec![0, 2, 4],
            region: AffineRegion::Annulus {
                r_min: 2.0,
                r_max: 3.0,
            },
            sample_count: 100,
        };
        let out = henon_pullback(&params, 13).unwrap();
        let csv = find_file(&out, "henon-pullback.csv");
        let rows = csv_rows(csv);
        assert_eq!(rows.len(), 3);
        let first: f64 = rows[0][1].parse().unwrap();
        let last: f64 = rows[2][1].parse().unwrap();
        assert!(
            last < first,
            "the pull-back statistic contracts: {first} -> {last}"
        );
        let _ = footer_value(csv, "fitted_rate");
        let _ = footer_value(csv, "non_escaping_count");

        let mut p = params.clone();
        p.q = "(3,0)".into();
        assert_eq!(field_of(&henon_pullback(&p, 13).unwrap_err()), "henon-pullback.q");
        let mut p = params.clone();
        p.n_list = vec![2, 2];
        assert_eq!(
            field_of(&henon_pullback(&p, 13).unwrap_err()),
            "henon-pullback.n_list"
        );
    }

    #[test]
    fn run_experiment_writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let source = r#"{
            "experiment": "contraction-probe",
            "map": {"family": "power", "k": 1, "d": 2},
            "params": {"start": [[1.0, 0.0], [2.0, 0.0]], "r": 0.1, "n_max": 6},
            "seed": 7
        }"#;
        let config = ExperimentConfig::from_json(source).unwrap();
        let report = super::super::run_experiment(
            &config,
            dir.path(),
            &super::super::RunOptions::default(),
        )
        .unwrap();
        assert_eq!(report.seed, 7);
        assert!(dir.path().join("contraction-probe.csv").is_file());
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["experiment"], "contraction-probe");
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["seed_source"], "config");
        assert_eq!(manifest["config"]["map"]["family"], "power");
        assert!(manifest["constants"]["c_fit"].is_number());
        let outputs = manifest["outputs"].as_array().unwrap();
        assert_eq!(outputs.len(), 2);

        // A seed override is recorded as such.
        let dir2 = tempfile::tempdir().unwrap();
        let report = super::super::run_experiment(
            &config,
            dir2.path(),
            &super::super::RunOptions {
                workers: None,
                seed_override: Some(99),
            },
        )
        .unwrap();
        assert_eq!(report.seed, 99);
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir2.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["seed"], 99);
        assert_eq!(manifest["seed_source"], "override");
    }

    #[test]
    fn reruns_and_worker_counts_reproduce_identical_bytes() {
        let source = r#"{
            "experiment": "pullback-converge",
            "map": {"family": "perturbed-power", "k": 1, "d": 2, "epsilon": 0.05},
            "params": {
                "hypersurface": {"polynomial": "z0^1 + (-1,0)*z1^1"},
                "n_list": [0, 1, 2, 3],
                "sample_count": 150
            },
            "seed": 42
        }"#;
        let config = ExperimentConfig::from_json(source).unwrap();
        let mut renders = Vec::new();
        for workers in [Some(1), Some(4), None, None] {
            let dir = tempfile::tempdir().unwrap();
            super::super::run_experiment(
                &config,
                dir.path(),
                &super::super::RunOptions {
                    workers,
                    seed_override: None,
                },
            )
            .unwrap();
            renders.push(
                std::fs::read_to_string(dir.path().join("pullback-converge.csv")).unwrap(),
            );
        }
        assert_eq!(renders[0], renders[1], "1 vs 4 workers");
        assert_eq!(renders[1], renders[2], "pool vs library default");
        assert_eq!(renders[2], renders[3], "rerun");
    }
}
