//! Building blocks shared by the commands: solves, admissibility of vertices,
//! and perturbed media.

use crate::config::{MediumSpec, MeshSpec, PerturbationTarget, SweepSpec};
use crate::error::HarnessError;
use num_complex::Complex64;
use polyscat_core::corner_probe::{admissibility_check, admissibility_threshold, VertexReport};
use polyscat_core::forward::{
    far_field, farfield_diff, solve_with_mesh_options, total_field_at, uniform_angles,
    FarFieldPattern, MeshOptions, SolveResult, SolverOptions,
};
use polyscat_core::geometry::{Point2, Polygon};
use polyscat_core::medium::{IncidentField, Medium};
use serde::Serialize;

pub fn mesh_options(mesh: &MeshSpec, level: Option<usize>) -> MeshOptions {
    MeshOptions {
        nodes_per_edge: level.unwrap_or(mesh.nodes_per_edge),
        grading: mesh.grading,
    }
}

/// Solves and requires convergence.
pub fn solve(
    medium: &Medium,
    inc: &IncidentField,
    mesh: MeshOptions,
    tol: f64,
) -> Result<SolveResult, HarnessError> {
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    let sr = solve_with_mesh_options(medium, inc, mesh, opts)?;
    if !sr.converged || sr.ill_conditioned {
        return Err(HarnessError::Numerical(format!(
            "solver did not converge at {} nodes per edge: residual {:e}, condition {:e}",
            mesh.nodes_per_edge, sr.residual, sr.condition
        )));
    }
    Ok(sr)
}

pub fn pattern(
    medium: &Medium,
    inc: &IncidentField,
    mesh: MeshOptions,
    tol: f64,
    angles: usize,
) -> Result<(FarFieldPattern, SolveResult), HarnessError> {
    let sr = solve(medium, inc, mesh, tol)?;
    let p = far_field(medium, inc, &sr, &uniform_angles(angles))?;
    Ok((p, sr))
}

/// Far-field difference between mesh levels `n` and `2n` of one scenario.
pub fn noise_floor(
    medium: &Medium,
    inc: &IncidentField,
    mesh: MeshOptions,
    tol: f64,
    base: &FarFieldPattern,
) -> Result<f64, HarnessError> {
    let fine = MeshOptions {
        nodes_per_edge: 2 * mesh.nodes_per_edge,
        ..mesh
    };
    let (p, _) = pattern(medium, inc, fine, tol, base.len())?;
    Ok(farfield_diff(&p, base)?)
}

/// Polygons whose vertices are probed: all nest layers, or all cells.
pub fn polygons(medium: &Medium) -> Vec<&Polygon> {
    match medium {
        Medium::Nest(n) => n.partition.layers.iter().collect(),
        Medium::Cells(c) => c.partition.cells.iter().collect(),
    }
}

fn outer(medium: &Medium) -> &Polygon {
    match medium {
        Medium::Nest(n) => &n.partition.layers[0],
        Medium::Cells(c) => &c.partition.hull,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexValue {
    /// 1-based polygon index.
    pub polygon: usize,
    /// 0-based vertex index in counterclockwise order.
    pub vertex: usize,
    pub position: [f64; 2],
    pub value: [f64; 2],
    pub modulus: f64,
    pub extrapolation_error: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub threshold: f64,
    pub vertices: Vec<VertexValue>,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.vertices.iter().all(|v| v.admissible)
    }

    pub fn offenders(&self) -> String {
        self.vertices
            .iter()
            .filter(|v| !v.admissible)
            .map(|v| {
                format!(
                    "polygon {} vertex {} has |u| = {:e} (threshold {:e})",
                    v.polygon, v.vertex, v.modulus, self.threshold
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Total-field values at every vertex, extrapolated along interior bisectors,
/// against `1e-6` times the largest field modulus on a circle of twice the
/// scatterer diameter.
pub fn admissibility(
    medium: &Medium,
    inc: &IncidentField,
    sr: &SolveResult,
) -> Result<Admissibility, HarnessError> {
    let field = |x: Point2| total_field_at(medium, inc, sr, x);
    let threshold = admissibility_threshold(field, outer(medium), 64)?;
    let mut vertices = Vec::new();
    for (p, poly) in polygons(medium).into_iter().enumerate() {
        let shortest = poly
            .edges()
            .map(|(a, b)| (b - a).norm())
            .fold(f64::INFINITY, f64::min);
        let reports = admissibility_check(field, poly, threshold, 0.02 * shortest)?;
        vertices.extend(reports.into_iter().map(|r: VertexReport| VertexValue {
            polygon: p + 1,
            vertex: r.vertex,
            position: [r.position.x, r.position.y],
            value: [r.value.re, r.value.im],
            modulus: r.value.norm(),
            extrapolation_error: r.extrapolation_error,
            admissible: r.admissible,
        }));
    }
    Ok(Admissibility {
        threshold,
        vertices,
    })
}

fn slot<'a, T>(v: &'a mut [T], index: usize, what: &str) -> Result<&'a mut T, HarnessError> {
    let n = v.len();
    if index == 0 || index > n {
        return Err(HarnessError::Refused(format!(
            "{what} index {index} out of range 1..={n}"
        )));
    }
    Ok(&mut v[index - 1])
}

/// The medium with `target` moved by `magnitude` (times `direction` for
/// parameters).
pub fn perturb(
    base: &MediumSpec,
    target: &PerturbationTarget,
    magnitude: f64,
    direction: Complex64,
) -> Result<MediumSpec, HarnessError> {
    let mut m = base.clone();
    let delta = direction * magnitude;
    match (&mut m, target) {
        (
            MediumSpec::Nest { q, .. } | MediumSpec::Cells { q, .. },
            PerturbationTarget::Q { index },
        ) => {
            *slot(q, *index, "potential")? += delta;
        }
        (MediumSpec::Nest { lambda, .. }, PerturbationTarget::Lambda { index }) => {
            *slot(lambda, *index, "interface")? += delta;
        }
        (MediumSpec::Cells { lambda_star, .. }, PerturbationTarget::LambdaStar) => {
            *lambda_star += delta;
        }
        (
            MediumSpec::Nest { layers: polys, .. } | MediumSpec::Cells { cells: polys, .. },
            PerturbationTarget::Vertex {
                polygon,
                vertex,
                direction_angle,
            },
        ) => {
            let poly = slot(polys, *polygon, "polygon")?;
            let n = poly.len();
            let v = poly.get_mut(*vertex).ok_or_else(|| {
                HarnessError::Refused(format!("vertex index {vertex} out of range 0..{n}"))
            })?;
            v[0] += magnitude * direction_angle.cos();
            v[1] += magnitude * direction_angle.sin();
        }
        (MediumSpec::Nest { .. }, PerturbationTarget::LambdaStar) => {
            return Err(HarnessError::Refused(
                "lambda_star applies to cell media; use lambda with an interface index".into(),
            ))
        }
        (MediumSpec::Cells { .. }, PerturbationTarget::Lambda { .. }) => {
            return Err(HarnessError::Refused(
                "cell media carry a single lambda_star".into(),
            ))
        }
    }
    Ok(m)
}

/// One compared medium in a sweep or passive run.
#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub label: String,
    pub magnitude: Option<f64>,
    pub farfield_diff: f64,
    /// `farfield_diff / noise_floor`.
    pub ratio: f64,
}

pub fn sweep_media(
    base: &MediumSpec,
    sweep: &SweepSpec,
) -> Result<Vec<(String, Option<f64>, MediumSpec)>, HarnessError> {
    sweep
        .magnitudes
        .iter()
        .map(|&m| {
            let spec = perturb(base, &sweep.target, m, sweep.direction)?;
            Ok((format!("{m:e}"), Some(m), spec))
        })
        .collect()
}

/// Indices `i` where the discrepancy drops between consecutive magnitudes
/// while both stay above the noise floor.
pub fn monotonicity_deviations(rows: &[Discrepancy], floor: f64) -> Vec<usize> {
    let mut swept: Vec<(usize, f64, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.magnitude.map(|m| (i, m.abs(), r.farfield_diff)))
        .collect();
    swept.sort_by(|a, b| a.1.total_cmp(&b.1));
    swept
        .windows(2)
        .filter(|w| w[1].2 < w[0].2 && w[1].2 > floor && w[0].2 > floor)
        .map(|w| w[1].0)
        .collect()
}
