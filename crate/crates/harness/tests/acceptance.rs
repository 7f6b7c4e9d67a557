//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 7 are unattainable as stated (the published tail constant
//! is not an upper bound; the truncated series pair cannot meet the 1%
//! target). They still print FAIL. The run exits nonzero on any other
//! failure, if a known failure starts passing, or on any failure when
//! `POLYSCAT_ACCEPTANCE_STRICT=1`.

use num_complex::Complex64;
use polyscat_core::cgo::{
    edge_integral_exact, edge_integral_quad, sector_integral_exact, sector_integral_quad,
    tail_bound, tail_integral_quad, weighted_bound, weighted_integral_quad, SectorSpec,
};
use polyscat_core::corner_probe::{
    extract_eta_diff, extract_omega_diff, identity_closure, loglog_slope, FieldSampler,
    FourierBesselPair, LiftedPair, ProbeOptions, ProbeScenario,
};
use polyscat_core::forward::{
    disk_series_oracle, far_field, farfield_diff, solve_with_mesh_options, uniform_angles,
    FarFieldPattern, MeshOptions, SolveResult, SolverOptions,
};
use polyscat_core::geometry::{CornerSector, NestPartition, Point2, Polygon};
use polyscat_core::medium::{IncidentField, Medium, NestMedium};
use polyscat_harness::commands::edge_triples;
use polyscat_harness::config::{load, PerturbationTarget, Scenario, SweepSpec};
use polyscat_harness::experiments::admissibility;
use polyscat_harness::{cmd_passive, cmd_sweep, RunOptions};
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sectors() -> Vec<SectorSpec> {
    [
        (0.0, PI / 2.0),
        (-PI / 4.0, PI / 4.0),
        (-PI / 3.0, PI / 6.0),
    ]
    .iter()
    .map(|&(a, b)| SectorSpec::new(a, b).unwrap())
    .collect()
}

fn square(half: f64) -> Polygon {
    Polygon::new(vec![
        Point2::new(-half, -half),
        Point2::new(half, -half),
        Point2::new(half, half),
        Point2::new(-half, half),
    ])
    .unwrap()
}

fn nest(layers: Vec<Polygon>, q: &[Complex64], lambda: &[Complex64], k: f64) -> Medium {
    Medium::Nest(NestMedium::new(NestPartition { layers }, q.to_vec(), lambda.to_vec(), k).unwrap())
}

fn solve(m: &Medium, inc: &IncidentField, n: usize) -> Result<SolveResult, String> {
    let mesh = MeshOptions {
        nodes_per_edge: n,
        grading: 3.0,
    };
    let sr = solve_with_mesh_options(m, inc, mesh, SolverOptions::default())
        .map_err(|e| e.to_string())?;
    if !sr.converged || sr.ill_conditioned {
        return Err(format!(
            "solve at {n} nodes per edge: residual {:e}, condition {:e}",
            sr.residual, sr.condition
        ));
    }
    Ok(sr)
}

fn pattern(
    m: &Medium,
    inc: &IncidentField,
    n: usize,
    angles: &[f64],
) -> Result<FarFieldPattern, String> {
    let sr = solve(m, inc, n)?;
    far_field(m, inc, &sr, angles).map_err(|e| e.to_string())
}

fn plane(theta: f64) -> IncidentField {
    IncidentField::plane_wave(Point2::from_polar(1.0, theta)).unwrap()
}

fn sector_exact_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for sec in sectors() {
        for s in [1.0, 10.0, 100.0] {
            let exact = sector_integral_exact(&sec, s);
            let q = sector_integral_quad(&sec, s, None, 1e-10 * exact.norm())
                .map_err(|e| e.to_string())?;
            worst = worst.max((q.value - exact).norm() / exact.norm());
        }
    }
    let t = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-8 && t < 10.0,
        format!("9 cases, max relative error {worst:.2e} (< 1e-8), {t:.2} s (< 10 s)"),
    ))
}

fn published_bounds() -> Outcome {
    let start = Instant::now();
    let (mut weighted, mut tail) = (0, 0);
    let mut worst = (0.0, String::new());
    for sec in sectors() {
        for s in [1.0, 10.0, 100.0] {
            for alpha in [0.25, 0.5, 0.75] {
                let lhs = weighted_integral_quad(&sec, alpha, s, 1e-10).value.re;
                if lhs > weighted_bound(&sec, alpha, s) {
                    weighted += 1;
                }
            }
            for h in [0.5, 1.0, 2.0] {
                let lhs = tail_integral_quad(&sec, s, h, 1e-10).value.re;
                let rhs = tail_bound(&sec, s, h);
                if lhs > rhs {
                    tail += 1;
                    if lhs / rhs > worst.0 {
                        worst = (
                            lhs / rhs,
                            format!("({:.4}, {:.4}) s={s} h={h}", sec.theta_m, sec.theta_max),
                        );
                    }
                }
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    let mut detail =
        format!("violations: weighted {weighted}/27, tail {tail}/27; {t:.2} s (< 30 s)");
    if tail > 0 {
        detail += &format!("; worst tail LHS/RHS {:.3e} at {}", worst.0, worst.1);
    }
    Ok((weighted + tail == 0 && t < 30.0, detail))
}

fn edge_identity() -> Outcome {
    let triples = edge_triples(27, 20);
    let worst = triples
        .iter()
        .map(|&(theta, s, h)| {
            (edge_integral_quad(theta, s, h, 1e-13).value - edge_integral_exact(theta, s, h)).norm()
        })
        .fold(0.0, f64::max);
    Ok((
        worst < 1e-10,
        format!("27 seeded triples, max absolute error {worst:.2e} (< 1e-10)"),
    ))
}

/// Two concentric regular polygons against the disk series. The 64-node
/// level is out of memory reach; 16 nodes per edge is used, with a mesh
/// guard showing the mesh change is below the polygon-refinement gain.
fn disk_oracle() -> Outcome {
    let start = Instant::now();
    let angles = uniform_angles(64);
    let d = Point2::new(1.0, 0.0);
    let q = [c(2.0, 0.0), c(3.0, 0.0)];
    let lam = [c(0.0, 0.5), c(0.0, 0.0)];
    let oracle = disk_series_oracle(&[1.0, 0.5], &q, &lam, 1.0, d, 40, &angles)
        .map_err(|e| e.to_string())?;
    let inc = IncidentField::plane_wave(d).unwrap();
    let run = |sides: usize, n: usize| -> Result<FarFieldPattern, String> {
        let o = Point2::new(0.0, 0.0);
        let layers = vec![
            Polygon::regular(sides, 1.0, o, 0.0).map_err(|e| e.to_string())?,
            Polygon::regular(sides, 0.5, o, 0.0).map_err(|e| e.to_string())?,
        ];
        pattern(&nest(layers, &q, &lam, 1.0), &inc, n, &angles)
    };
    let p64_8 = run(64, 8)?;
    let p64_16 = run(64, 16)?;
    let p128_8 = run(128, 8)?;
    let err = |p: &FarFieldPattern| farfield_diff(&oracle, p).map_err(|e| e.to_string());
    let (e64, e128) = (err(&p64_16)?, err(&p128_8)?);
    let mesh_change = farfield_diff(&p64_16, &p64_8).map_err(|e| e.to_string())?;
    let t = start.elapsed().as_secs_f64();
    Ok((
        e64 < 1e-2 && e128 < e64 && mesh_change < e64 - e128 && t < 300.0,
        format!(
            "64-gon (16 nodes/edge) {e64:.3e} (< 1e-2), 128-gon (8 nodes/edge) {e128:.3e} (decreasing), \
             mesh change 8->16 {mesh_change:.2e} (< gain {:.2e}), {t:.0} s (< 300 s)",
            e64 - e128
        ),
    ))
}

fn zero_contrast() -> Outcome {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let m = nest(
        vec![square(1.0), square(0.5)],
        &[one, one],
        &[zero, zero],
        1.0,
    );
    let p = pattern(&m, &plane(0.0), 96, &uniform_angles(256))?;
    let sup = p.sup_norm();
    Ok((
        sup < 1e-10,
        format!("nested squares, 96 nodes/edge, far-field sup {sup:.2e} (< 1e-10)"),
    ))
}

/// Unit square with q = 2, lambda = 0.5i.
fn square_scenario(k: f64) -> Medium {
    nest(vec![square(0.5)], &[c(2.0, 0.0)], &[c(0.0, 0.5)], k)
}

fn reciprocity() -> Outcome {
    let m = square_scenario(1.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let wrap = |t: f64| t.rem_euclid(2.0 * PI);
    // Far-field value at one angle, read off a two-angle grid.
    let one = |t_inc: f64, t_obs: f64| -> Result<Complex64, String> {
        let t_obs = wrap(t_obs);
        let (grid, i) = if t_obs < PI {
            ([t_obs, t_obs + 1.0], 0)
        } else {
            ([t_obs - 1.0, t_obs], 1)
        };
        Ok(pattern(&m, &plane(wrap(t_inc)), 128, &grid)?.values[i])
    };
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (td, tx) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let a = one(td, tx)?;
        let b = one(tx + PI, td + PI)?;
        worst = worst.max((a - b).norm());
    }
    Ok((
        worst < 1e-6,
        format!(
            "unit square, 128 nodes/edge, 5 seeded pairs, max |difference| {worst:.2e} (< 1e-6)"
        ),
    ))
}

fn quarter() -> CornerSector {
    CornerSector::new(0.0, PI / 2.0, 1.0).unwrap()
}

const S_GRID: [f64; 5] = [50.0, 100.0, 200.0, 400.0, 800.0];

fn scenario<'a>(
    omega: (Complex64, Complex64),
    eta_diff: Complex64,
    u1: &'a dyn FieldSampler,
    u2: &'a dyn FieldSampler,
) -> ProbeScenario<'a> {
    ProbeScenario {
        sector: quarter(),
        k: c(1.0, 0.0),
        omega1: omega.0,
        omega2: omega.1,
        eta1: eta_diff,
        eta2: c(0.0, 0.0),
        u1,
        u2,
    }
}

fn fourier_bessel(
    omega: (Complex64, Complex64),
    eta_diff: Complex64,
) -> Result<FourierBesselPair, String> {
    FourierBesselPair::fit(
        &quarter(),
        c(1.0, 0.0),
        omega.0,
        omega.1,
        eta_diff,
        20,
        c(1.0, 0.0),
        0.0,
    )
    .map_err(|e| e.to_string())
}

fn eta_recovery() -> Outcome {
    let start = Instant::now();
    let opts = ProbeOptions::default();
    let w = c(2.0, 0.0);
    let de = c(0.3, 0.1);
    let fb = fourier_bessel((w, w), de)?;
    let eta = extract_eta_diff(&scenario((w, w), de, &fb.u1, &fb.u2), &S_GRID, &opts)
        .map_err(|e| e.to_string())?;
    let rel = (eta.extrapolated.value - de).norm() / de.norm();

    // With eta1 = eta2 the per-s estimate is the omega-driven bias alone.
    let w2 = c(2.5, 0.0);
    let zero = c(0.0, 0.0);
    let fb0 = fourier_bessel((w, w2), zero)?;
    let bias = extract_eta_diff(&scenario((w, w2), zero, &fb0.u1, &fb0.u2), &S_GRID, &opts)
        .map_err(|e| e.to_string())?;
    let pts: Vec<(f64, Complex64)> = bias.samples.iter().map(|p| (p.s, p.estimate)).collect();
    let slope = loglog_slope(&pts);
    let t = start.elapsed().as_secs_f64();
    Ok((
        rel < 1e-2 && (slope + 1.0).abs() <= 0.1 && t < 120.0,
        format!(
            "Fourier-Bessel order 20 (misfit {:.1e}): extrapolated {:.5} relative error {rel:.2e} (< 1e-2); \
             bias slope {slope:.3} (-1 +- 0.1); {t:.0} s (< 120 s)",
            fb.relative_misfit, eta.extrapolated.value
        ),
    ))
}

/// Same checks on the exact-jump lifting pair, printed for comparison.
fn eta_recovery_lifting() -> Result<String, String> {
    let opts = ProbeOptions::default();
    let w = c(2.0, 0.0);
    let de = c(0.3, 0.1);
    let lp = LiftedPair::new(&quarter(), c(1.0, 0.0), w, w, de);
    let eta = extract_eta_diff(&scenario((w, w), de, &lp.u1, &lp.u2), &S_GRID, &opts)
        .map_err(|e| e.to_string())?;
    let rel = (eta.extrapolated.value - de).norm() / de.norm();
    let (w2, zero) = (c(2.5, 0.0), c(0.0, 0.0));
    let lp0 = LiftedPair::new(&quarter(), c(1.0, 0.0), w, w2, zero);
    let bias = extract_eta_diff(&scenario((w, w2), zero, &lp0.u1, &lp0.u2), &S_GRID, &opts)
        .map_err(|e| e.to_string())?;
    let pts: Vec<(f64, Complex64)> = bias.samples.iter().map(|p| (p.s, p.estimate)).collect();
    Ok(format!(
        "lifting pair: relative error {rel:.2e}, bias slope {:.3}",
        loglog_slope(&pts)
    ))
}

fn omega_recovery() -> Outcome {
    let (w1, w2, zero) = (c(2.0, 0.0), c(2.5, 0.0), c(0.0, 0.0));
    let fb = fourier_bessel((w1, w2), zero)?;
    let sc = scenario((w1, w2), zero, &fb.u1, &fb.u2);
    // eta1 = eta2 is known for this scenario; the extrapolated eta estimate
    // would enter multiplied by s.
    let om = extract_omega_diff(&sc, &S_GRID, zero, &ProbeOptions::default())
        .map_err(|e| e.to_string())?;
    let last = om.samples.last().unwrap().estimate;
    let rel = (last - (w2 - w1)).norm() / (w2 - w1).norm();
    Ok((
        rel < 2e-2,
        format!("Fourier-Bessel order 20: estimate at s=800 {last:.5}, relative error {rel:.2e} (< 2e-2)"),
    ))
}

fn identity_closure_check() -> Outcome {
    let (w1, w2, de) = (c(2.0, 0.0), c(2.5, 0.3), c(0.3, 0.1));
    let lp = LiftedPair::new(&quarter(), c(1.0, 0.0), w1, w2, de);
    let sc = scenario((w1, w2), de, &lp.u1, &lp.u2);
    let opts = ProbeOptions::default();
    let mut worst: f64 = 0.0;
    for s in S_GRID {
        let r = identity_closure(&sc, s, &opts).map_err(|e| e.to_string())?;
        worst = worst.max(r.residual / r.tolerance);
    }
    Ok((
        worst < 10.0,
        format!("lifting pair, max residual / tolerance {worst:.2e} over s in 50..800 (< 10)"),
    ))
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Per-row `(magnitude, diff, floor)` for `target` at magnitudes `[0, 0.1]`.
fn compare(
    file: &str,
    target: PerturbationTarget,
    run: fn(
        &Scenario,
        &RunOptions,
    ) -> Result<polyscat_harness::Report, polyscat_harness::HarnessError>,
) -> Result<(f64, f64, f64), String> {
    let mut s: Scenario = load(&configs().join(file)).map_err(|e| e.to_string())?;
    s.passive = None;
    s.sweep = Some(SweepSpec {
        target,
        magnitudes: vec![0.0, 0.1],
        direction: c(1.0, 0.0),
    });
    let r = run(&s, &RunOptions::default()).map_err(|e| e.to_string())?;
    let floor = r.metrics["noise_floor"].as_f64().unwrap();
    let diff = |i: usize| r.metrics["rows"][i]["farfield_diff"].as_f64().unwrap();
    Ok((diff(0), diff(1), floor))
}

fn uniqueness_sweep() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (file, label, run) in [
        ("nested_squares.json", "sweep", cmd_sweep as fn(&_, &_) -> _),
        ("passive.json", "passive", cmd_passive as fn(&_, &_) -> _),
    ] {
        for (name, target) in [
            ("q2", PerturbationTarget::Q { index: 2 }),
            ("lambda1", PerturbationTarget::Lambda { index: 1 }),
        ] {
            let (zero, moved, floor) = compare(file, target, run)?;
            ok &= moved > 10.0 * floor && zero <= floor;
            parts.push(format!(
                "{label} {name}+0.1 ratio {:.0}, zero {zero:.1e} vs floor {floor:.1e}",
                moved / floor
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn vertex_moduli(m: &Medium) -> Result<(f64, bool, f64, usize), String> {
    let inc = plane(0.0);
    let sr = solve(m, &inc, 32)?;
    let adm = admissibility(m, &inc, &sr).map_err(|e| e.to_string())?;
    let min = adm
        .vertices
        .iter()
        .map(|v| v.modulus)
        .fold(f64::INFINITY, f64::min);
    Ok((min, adm.admissible(), adm.threshold, adm.vertices.len()))
}

fn admissibility_low_k() -> Outcome {
    let (min, admissible, threshold, n) = vertex_moduli(&square_scenario(0.1))?;
    // The low-frequency response to lambda grows with size: a side-2 square
    // drops below 0.5 at its vertices.
    let big = nest(vec![square(1.0)], &[c(2.0, 0.0)], &[c(0.0, 0.5)], 0.1);
    let (min_big, _, _, _) = vertex_moduli(&big)?;
    Ok((
        n == 4 && min > 0.5 && admissible,
        format!(
            "unit square at k=0.1: min vertex |u| {min:.4} (> 0.5), threshold {threshold:.2e}, \
             all admissible: {admissible}; side-2 square min |u| {min_big:.4}"
        ),
    ))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 11] = [
        ("CGO exact sector identity", sector_exact_identity),
        ("CGO published bounds", published_bounds),
        ("edge identity", edge_identity),
        ("forward disk oracle", disk_oracle),
        ("zero contrast", zero_contrast),
        ("reciprocity", reciprocity),
        ("probe eta recovery", eta_recovery),
        ("probe omega recovery", omega_recovery),
        ("identity closure", identity_closure_check),
        ("uniqueness sweep and passive", uniqueness_sweep),
        ("vertex admissibility", admissibility_low_k),
    ];
    const KNOWN_FAILURES: [usize; 2] = [2, 7];
    let strict = std::env::var("POLYSCAT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed.push(i + 1);
        }
        println!(
            "{} {:>2} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
        if i == 6 {
            match eta_recovery_lifting() {
                Ok(s) => println!("     7 (for comparison) {s}"),
                Err(e) => println!("     7 (for comparison) error: {e}"),
            }
        }
    }
    println!(
        "{} of {} criteria passed; failed: {failed:?}; known failures: {KNOWN_FAILURES:?}",
        criteria.len() - failed.len(),
        criteria.len()
    );
    let unexpected = failed != KNOWN_FAILURES;
    if unexpected || (strict && !failed.is_empty()) {
        if unexpected {
            println!("failures differ from the known set");
        }
        std::process::exit(1);
    }
}
