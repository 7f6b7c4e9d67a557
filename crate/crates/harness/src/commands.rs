//! The six experiments. Each returns a report and writes its tables into the
//! output directory when one is given.

use crate::config::{
    digest, CgoGrid, Correction, GeneratorSpec, IncidentSpec, MediumSpec, ProbeConfig, Scenario,
};
use crate::error::HarnessError;
use crate::experiments::{
    admissibility, mesh_options, monotonicity_deviations, noise_floor, pattern, sweep_media,
    Discrepancy,
};
use crate::report::{write_report, Field, Report, Status, Table};
use num_complex::Complex64;
use polyscat_core::cgo::{
    edge_integral_exact, edge_integral_quad, sector_integral_exact, sector_integral_quad,
    tail_bound, tail_bound_valid, tail_integral_quad, weighted_bound, weighted_integral_quad,
    SectorSpec,
};
use polyscat_core::corner_probe::{
    extract_eta_diff, extract_omega_diff, identity_closure, run_probe, CorrectionMode,
    FieldSampler, FourierBesselPair, LiftedPair, ProbeOptions, ProbeScenario,
};
use polyscat_core::forward::{farfield_diff, total_field_at, uniform_angles, SolverOptions};
use polyscat_core::geometry::{validate_cells, validate_nest, CellPartition, CornerSector, Point2};
use polyscat_core::medium::{IncidentKind, Medium};
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

/// Command-line overrides shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub mesh_level: Option<usize>,
    pub s_grid: Option<Vec<f64>>,
    pub tol: Option<f64>,
    /// cgo-verify only: perturb the constant of the exact sector identity.
    pub corrupt_constant: bool,
}

impl RunOptions {
    fn solver_tol(&self) -> f64 {
        self.tol.unwrap_or(SolverOptions::default().tol)
    }
}

fn finish(
    mut report: Report,
    tables: &[Table],
    opts: &RunOptions,
    start: Instant,
) -> Result<Report, HarnessError> {
    report.files = tables.iter().map(|t| t.name.clone()).collect();
    report.wall_clock_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &opts.out {
        for t in tables {
            t.write(dir)?;
        }
        write_report(dir, &report)?;
    }
    Ok(report)
}

fn partition_report(spec: &MediumSpec) -> Option<Vec<String>> {
    use polyscat_core::geometry::{NestPartition, Polygon};
    let poly =
        |v: &Vec<[f64; 2]>| Polygon::new(v.iter().map(|p| Point2::new(p[0], p[1])).collect());
    let rep = match spec {
        MediumSpec::Nest { layers, .. } => {
            let layers = layers
                .iter()
                .map(poly)
                .collect::<Result<Vec<_>, _>>()
                .ok()?;
            validate_nest(&NestPartition { layers })
        }
        MediumSpec::Cells { hull, cells, .. } => {
            let hull = poly(hull).ok()?;
            let cells = cells.iter().map(poly).collect::<Result<Vec<_>, _>>().ok()?;
            validate_cells(&CellPartition { hull, cells })
        }
    };
    Some(
        rep.violations
            .iter()
            .map(|v| format!("{}: {}", v.rule, v.message))
            .collect(),
    )
}

/// Geometry and medium validation. Refused when anything is invalid.
pub fn cmd_validate(scenario: &Scenario, opts: &RunOptions) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let mut report = Report::new("validate", digest(scenario), 0.0);
    // The partition alone lists every violation, not just the first.
    let violations = partition_report(&scenario.medium).unwrap_or_default();
    if !violations.is_empty() {
        return Err(HarnessError::Refused(violations.join("; ")));
    }
    let medium = scenario.medium.build()?;
    let inc = scenario.incident.build()?;
    inc.validate_against(&medium)?;
    let notes = match &medium {
        Medium::Nest(n) => validate_nest(&n.partition).notes,
        Medium::Cells(c) => validate_cells(&c.partition).notes,
    };
    report.diagnostics.extend(notes);
    report.metrics = json!({
        "regions": medium.region_count(),
        "segments": medium.segments().len(),
        "k": medium.k(),
    });
    finish(report, &[], opts, start)
}

/// Forward solve: far-field table and optionally the total field on a grid.
pub fn cmd_forward(scenario: &Scenario, opts: &RunOptions) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let tol = opts.solver_tol();
    let mut report = Report::new("forward", digest(scenario), tol);
    let medium = scenario.medium.build()?;
    let inc = scenario.incident.build()?;
    let mesh = mesh_options(&scenario.mesh, opts.mesh_level);
    let sr = polyscat_core::forward::solve_with_mesh_options(
        &medium,
        &inc,
        mesh,
        SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )?;
    if !sr.converged {
        report.fail(format!("solver residual {:e} above {tol:e}", sr.residual));
    }
    if sr.ill_conditioned {
        report.fail(format!("condition estimate {:e} above limit", sr.condition));
    }
    let angles = uniform_angles(scenario.outputs.far_field_angles);
    let pattern = polyscat_core::forward::far_field(&medium, &inc, &sr, &angles)?;
    let mut ff = Table::new("far_field.csv", &["angle_rad", "re", "im", "tolerance"]);
    for (a, v) in pattern.angles.iter().zip(&pattern.values) {
        ff.row(&[(*a).into(), v.re.into(), v.im.into(), tol.into()]);
    }
    let mut tables = vec![ff];
    if let Some(g) = &scenario.outputs.near_field {
        let mut nf = Table::new("near_field.csv", &["x", "y", "re", "im", "tolerance"]);
        let coord = |r: [f64; 2], n: usize, i: usize| {
            if n <= 1 {
                r[0]
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
            }
        };
        let mut skipped = 0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let x = Point2::new(coord(g.x_range, g.nx, i), coord(g.y_range, g.ny, j));
                match total_field_at(&medium, &inc, &sr, x) {
                    Ok(u) => {
                        nf.row(&[x.x.into(), x.y.into(), u.re.into(), u.im.into(), tol.into()])
                    }
                    Err(_) => {
                        skipped += 1;
                        nf.row(&[
                            x.x.into(),
                            x.y.into(),
                            Field::Empty,
                            Field::Empty,
                            tol.into(),
                        ]);
                    }
                }
            }
        }
        if skipped > 0 {
            report.diagnostics.push(format!(
                "{skipped} near-field points on interfaces or at the source left empty"
            ));
        }
        tables.push(nf);
    }
    report.metrics = json!({
        "nodes_per_edge": mesh.nodes_per_edge,
        "grading": mesh.grading,
        "unknowns": sr.mesh.unknowns(),
        "residual": sr.residual,
        "condition": sr.condition,
        "far_field_sup": pattern.sup_norm(),
        "far_field_l2": pattern.l2_norm(),
    });
    finish(report, &tables, opts, start)
}

fn sector_params(sec: &SectorSpec) -> String {
    format!("theta_m={:e};theta_max={:e}", sec.theta_m, sec.theta_max)
}

/// CGO checks: exact sector identity, weighted and tail bounds, edge identity.
/// Fails when any row fails.
pub fn cmd_cgo_verify(grid: &CgoGrid, opts: &RunOptions) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let rel_tol = opts.tol.unwrap_or(grid.sector_rel_tol);
    let mut report = Report::new("cgo-verify", digest(grid), rel_tol);
    let sectors = grid
        .sectors
        .iter()
        .map(|s| SectorSpec::new(s[0], s[1]))
        .collect::<Result<Vec<_>, _>>()?;
    if grid
        .s
        .iter()
        .chain(&grid.h)
        .any(|&x| !(x > 0.0 && x.is_finite()))
        || grid.alpha.iter().any(|&a| !(0.0..=1.0).contains(&a))
    {
        return Err(HarnessError::Refused(
            "s and h must be positive, alpha must lie in [0, 1]".into(),
        ));
    }
    let constant = if opts.corrupt_constant {
        1.0 + 1e-6
    } else {
        1.0
    };
    let mut t = Table::new(
        "cgo_verify.csv",
        &[
            "identity",
            "params",
            "lhs_re",
            "lhs_im",
            "rhs_re",
            "rhs_im",
            "margin",
            "tolerance",
            "pass",
        ],
    );
    let mut failures = Vec::new();
    let mut counts = std::collections::BTreeMap::<&str, (usize, usize)>::new();
    let mut push = |t: &mut Table,
                    id: &'static str,
                    params: String,
                    lhs: Complex64,
                    rhs: Complex64,
                    margin: f64,
                    tol: f64| {
        let pass = margin >= 0.0;
        let c = counts.entry(id).or_default();
        c.0 += 1;
        if !pass {
            c.1 += 1;
            failures.push(format!("{id} {params}"));
        }
        t.row(&[
            id.into(),
            params.into(),
            lhs.re.into(),
            lhs.im.into(),
            rhs.re.into(),
            rhs.im.into(),
            margin.into(),
            tol.into(),
            if pass { "true" } else { "false" }.into(),
        ]);
    };
    for sec in &sectors {
        for &s in &grid.s {
            let exact = sector_integral_exact(sec, s) * constant;
            let q = sector_integral_quad(sec, s, None, 1e-3 * rel_tol * exact.norm())?;
            let rel = (q.value - exact).norm() / exact.norm();
            push(
                &mut t,
                "sector_exact",
                format!("{};s={s:e}", sector_params(sec)),
                q.value,
                exact,
                rel_tol - rel,
                rel_tol,
            );
        }
    }
    for sec in &sectors {
        for &alpha in &grid.alpha {
            for &s in &grid.s {
                let lhs = weighted_integral_quad(sec, alpha, s, 1e-10).value.re;
                let rhs = weighted_bound(sec, alpha, s);
                push(
                    &mut t,
                    "weighted_bound",
                    format!("{};alpha={alpha:e};s={s:e}", sector_params(sec)),
                    lhs.into(),
                    rhs.into(),
                    rhs - lhs,
                    0.0,
                );
            }
        }
    }
    for sec in &sectors {
        for &h in &grid.h {
            for &s in &grid.s {
                let lhs = tail_integral_quad(sec, s, h, 1e-10).value.re;
                let params = format!("{};h={h:e};s={s:e}", sector_params(sec));
                let published = tail_bound(sec, s, h);
                push(
                    &mut t,
                    "tail_bound",
                    params.clone(),
                    lhs.into(),
                    published.into(),
                    published - lhs,
                    0.0,
                );
                let provable = tail_bound_valid(sec, s, h);
                push(
                    &mut t,
                    "tail_bound_provable",
                    params,
                    lhs.into(),
                    provable.into(),
                    provable - lhs,
                    0.0,
                );
            }
        }
    }
    for (theta, s, h) in edge_triples(grid.edge_samples, grid.seed) {
        let exact = edge_integral_exact(theta, s, h);
        let q = edge_integral_quad(theta, s, h, 1e-3 * grid.edge_abs_tol);
        push(
            &mut t,
            "edge_exact",
            format!("theta={theta:e};s={s:e};h={h:e}"),
            q.value,
            exact,
            grid.edge_abs_tol - (q.value - exact).norm(),
            grid.edge_abs_tol,
        );
    }
    if !failures.is_empty() {
        report.fail(format!(
            "{} failed checks: {}",
            failures.len(),
            failures.join(", ")
        ));
    }
    report.metrics = json!({
        "checks": counts
            .iter()
            .map(|(k, (n, f))| (k.to_string(), json!({"rows": n, "failed": f})))
            .collect::<serde_json::Map<_, _>>(),
        "corrupted_constant": opts.corrupt_constant,
    });
    finish(report, &[t], opts, start)
}

/// Seeded `(theta, s, h)` triples: `theta` in `[-3pi/4, 3pi/4]`,
/// `s` log-uniform in `[1, 100]`, `h` in `[0.1, 2]`.
pub fn edge_triples(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let span = 0.75 * std::f64::consts::PI;
    (0..n)
        .map(|_| {
            let theta = rng.gen_range(-span..=span);
            let s = 10f64.powf(rng.gen_range(0.0..=2.0));
            let h = rng.gen_range(0.1..=2.0);
            (theta, s, h)
        })
        .collect()
}

/// Far-field discrepancies of `others` against the base medium, with the
/// noise floor and an admissibility gate on the base scenario.
fn compare_media(
    command: &str,
    scenario: &Scenario,
    others: Vec<(String, Option<f64>, MediumSpec)>,
    opts: &RunOptions,
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let tol = opts.solver_tol();
    let mut report = Report::new(command, digest(scenario), tol);
    let base = scenario.medium.build()?;
    let inc = scenario.incident.build()?;
    inc.validate_against(&base)?;
    let built = others
        .into_iter()
        .map(|(label, m, spec)| {
            let medium = spec
                .build()
                .map_err(|e| HarnessError::Refused(format!("compared medium {label}: {e}")))?;
            inc.validate_against(&medium)
                .map_err(|e| HarnessError::Refused(format!("compared medium {label}: {e}")))?;
            Ok((label, m, medium))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mesh = mesh_options(&scenario.mesh, opts.mesh_level);
    let angles = scenario.outputs.far_field_angles;
    let (base_pattern, sr) = pattern(&base, &inc, mesh, tol, angles)?;
    let adm = admissibility(&base, &inc, &sr)?;
    if !adm.admissible() {
        return Err(HarnessError::Refused(format!(
            "base scenario is not admissible: {}",
            adm.offenders()
        )));
    }
    let floor = noise_floor(&base, &inc, mesh, tol, &base_pattern)?;
    let mut rows = Vec::new();
    for (label, magnitude, medium) in built {
        let (p, _) = pattern(&medium, &inc, mesh, tol, angles)?;
        let d = farfield_diff(&base_pattern, &p)?;
        rows.push(Discrepancy {
            label,
            magnitude,
            farfield_diff: d,
            ratio: d / floor,
        });
    }
    let mut t = Table::new(
        &format!("{command}.csv"),
        &[
            "label",
            "magnitude",
            "farfield_diff",
            "noise_floor",
            "ratio",
            "tolerance",
        ],
    );
    for r in &rows {
        t.row(&[
            r.label.clone().into(),
            r.magnitude.map_or(Field::Empty, Field::Num),
            r.farfield_diff.into(),
            floor.into(),
            r.ratio.into(),
            tol.into(),
        ]);
    }
    let deviations = monotonicity_deviations(&rows, floor);
    for &i in &deviations {
        report.diagnostics.push(format!(
            "discrepancy not monotone at {}: {:e}",
            rows[i].label, rows[i].farfield_diff
        ));
    }
    report.metrics = json!({
        "nodes_per_edge": mesh.nodes_per_edge,
        "noise_floor": floor,
        "noise_floor_levels": [mesh.nodes_per_edge, 2 * mesh.nodes_per_edge],
        "rows": rows,
        "monotonicity_deviations": deviations.len(),
        "admissibility": adm,
    });
    finish(report, &[t], opts, start)
}

/// Single-measurement far-field discrepancy against perturbed media.
pub fn cmd_sweep(scenario: &Scenario, opts: &RunOptions) -> Result<Report, HarnessError> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Refused("scenario has no sweep section".into()))?;
    if matches!(scenario.incident, IncidentSpec::None) {
        return Err(HarnessError::Refused(
            "sweep needs an incident field".into(),
        ));
    }
    let others = sweep_media(&scenario.medium, sweep)?;
    compare_media("sweep", scenario, others, opts)
}

/// Point-source excitation of two media, or of the base medium and its
/// sweep perturbations.
pub fn cmd_passive(scenario: &Scenario, opts: &RunOptions) -> Result<Report, HarnessError> {
    let inc = scenario.incident.build()?;
    if !matches!(inc.kind, IncidentKind::PointSource { .. }) {
        return Err(HarnessError::Refused(
            "passive runs need a point-source incident field".into(),
        ));
    }
    let mut others = Vec::new();
    if let Some(second) = scenario
        .passive
        .as_ref()
        .and_then(|p| p.second_medium.clone())
    {
        others.push(("second_medium".to_string(), None, second));
    }
    if let Some(sweep) = &scenario.sweep {
        others.extend(sweep_media(&scenario.medium, sweep)?);
    }
    if others.is_empty() {
        return Err(HarnessError::Refused(
            "passive run needs passive.second_medium or a sweep section".into(),
        ));
    }
    compare_media("passive", scenario, others, opts)
}

/// Manufactured corner pair and the scenario it defines.
pub enum ProbePair {
    Lifted(LiftedPair),
    FourierBessel(FourierBesselPair),
}

impl ProbePair {
    pub fn build(cfg: &ProbeConfig) -> Result<(Self, CornerSector), HarnessError> {
        let p = &cfg.probe;
        let sector = CornerSector::new(p.sector.theta_m, p.sector.theta_max, p.sector.h)?;
        let pair = match p.generator {
            GeneratorSpec::Lifting => ProbePair::Lifted(LiftedPair::new(
                &sector, p.k, p.omega1, p.omega2, p.eta_diff,
            )),
            GeneratorSpec::FourierBessel {
                order,
                apex_value,
                regularization,
            } => ProbePair::FourierBessel(FourierBesselPair::fit(
                &sector,
                p.k,
                p.omega1,
                p.omega2,
                p.eta_diff,
                order,
                apex_value,
                regularization,
            )?),
        };
        Ok((pair, sector))
    }

    pub fn fields(&self) -> (&dyn FieldSampler, &dyn FieldSampler) {
        match self {
            ProbePair::Lifted(p) => (&p.u1, &p.u2),
            ProbePair::FourierBessel(p) => (&p.u1, &p.u2),
        }
    }
}

/// Corner extraction of `eta1 - eta2` then `omega2 - omega1` on a
/// manufactured pair.
pub fn cmd_probe(cfg: &ProbeConfig, opts: &RunOptions) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let p = &cfg.probe;
    let defaults = ProbeOptions::default();
    let popts = ProbeOptions {
        tol: opts.tol.unwrap_or(defaults.tol),
        mode: match p.correction {
            Correction::Full => CorrectionMode::Full,
            Correction::LeadingOrder => CorrectionMode::LeadingOrder,
        },
        ..defaults
    };
    let grid = opts.s_grid.clone().unwrap_or_else(|| p.s_grid.clone());
    let mut report = Report::new("probe", digest(cfg), popts.tol);
    let (pair, sector) = ProbePair::build(cfg)?;
    let (u1, u2) = pair.fields();
    let sc = ProbeScenario {
        sector,
        k: p.k,
        omega1: p.omega1,
        omega2: p.omega2,
        eta1: p.eta_diff,
        eta2: Complex64::new(0.0, 0.0),
        u1,
        u2,
    };
    let (eta, omega) = match p.assume_eta_diff {
        None => run_probe(&sc, &grid, &popts)?,
        Some(d) => (
            extract_eta_diff(&sc, &grid, &popts)?,
            extract_omega_diff(&sc, &grid, d, &popts)?,
        ),
    };
    let mut t = Table::new(
        "probe.csv",
        &[
            "s",
            "re_eta",
            "im_eta",
            "re_omega",
            "im_omega",
            "residual",
            "tolerance",
        ],
    );
    let mut closures = Vec::new();
    for (e, o) in eta.samples.iter().zip(&omega.samples) {
        t.row(&[
            e.s.into(),
            e.estimate.re.into(),
            e.estimate.im.into(),
            o.estimate.re.into(),
            o.estimate.im.into(),
            e.residual.max(o.residual).into(),
            popts.abs_tol(e.s).into(),
        ]);
        let c = identity_closure(&sc, e.s, &popts)?;
        closures.push(json!({"s": c.s, "residual": c.residual, "tolerance": c.tolerance}));
    }
    let (ex_eta, ex_omega) = (eta.extrapolated, omega.extrapolated);
    t.row(&[
        "inf".into(),
        ex_eta.value.re.into(),
        ex_eta.value.im.into(),
        ex_omega.value.re.into(),
        ex_omega.value.im.into(),
        ex_eta.error.max(ex_omega.error).into(),
        popts.tol.into(),
    ]);
    let relative = |est: Complex64, truth: Complex64| {
        if truth.norm() > 0.0 {
            (est - truth).norm() / truth.norm()
        } else {
            est.norm()
        }
    };
    let last_omega = omega.samples.last().map(|s| s.estimate).unwrap_or_default();
    report.metrics = json!({
        "s_grid": grid,
        "omega_step_eta_diff": match p.assume_eta_diff {
            Some(d) => json!({"assumed": [d.re, d.im]}),
            None => json!({"extrapolated": [ex_eta.value.re, ex_eta.value.im]}),
        },
        "true_eta_diff": [sc.true_eta_diff().re, sc.true_eta_diff().im],
        "true_omega_diff": [sc.true_omega_diff().re, sc.true_omega_diff().im],
        "eta_extrapolated": [ex_eta.value.re, ex_eta.value.im],
        "eta_extrapolation_error": ex_eta.error,
        "eta_relative_error": relative(ex_eta.value, sc.true_eta_diff()),
        "omega_extrapolated": [ex_omega.value.re, ex_omega.value.im],
        "omega_extrapolation_error": ex_omega.error,
        "omega_relative_error_at_largest_s": relative(last_omega, sc.true_omega_diff()),
        "closure": closures,
        "fit_relative_misfit": match &pair {
            ProbePair::FourierBessel(f) => Some(f.relative_misfit),
            ProbePair::Lifted(_) => None,
        },
    });
    finish(report, &[t], opts, start)
}

/// Runs a command and turns errors into a refused or failed report.
pub fn run_reported<F>(command: &str, opts: &RunOptions, f: F) -> (Report, Option<HarnessError>)
where
    F: FnOnce() -> Result<Report, HarnessError>,
{
    match f() {
        Ok(r) => (r, None),
        Err(e) => {
            let mut r = Report::new(command, String::new(), opts.tol.unwrap_or(0.0));
            r.status = if e.exit_code() == 1 {
                Status::Refused
            } else {
                Status::Failed
            };
            r.diagnostics.push(e.to_string());
            if let Some(dir) = &opts.out {
                let _ = write_report(dir, &r);
            }
            (r, Some(e))
        }
    }
}
