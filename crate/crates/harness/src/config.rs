//! Scenario documents.
//!
//! Every document is JSON with a `schema_version` field. Points are `[x, y]`
//! pairs and complex numbers `[re, im]` pairs; indices of layers, cells and
//! interfaces are 1-based, outermost first.

use crate::error::HarnessError;
use num_complex::Complex64;
use polyscat_core::geometry::{CellPartition, NestPartition, Point2, Polygon};
use polyscat_core::medium::{CellMedium, IncidentField, IncidentKind, Medium, NestMedium};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn to_point(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

fn polygon(vertices: &[[f64; 2]]) -> polyscat_core::Result<Polygon> {
    Polygon::new(vertices.iter().copied().map(to_point).collect())
}

fn vertex_list(p: &Polygon) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v.x, v.y]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediumSpec {
    Nest {
        /// Outermost layer first.
        layers: Vec<Vec<[f64; 2]>>,
        q: Vec<Complex64>,
        lambda: Vec<Complex64>,
        k: f64,
    },
    Cells {
        hull: Vec<[f64; 2]>,
        cells: Vec<Vec<[f64; 2]>>,
        q: Vec<Complex64>,
        lambda_star: Complex64,
        k: f64,
    },
}

impl MediumSpec {
    pub fn build(&self) -> Result<Medium, HarnessError> {
        let m = match self {
            MediumSpec::Nest {
                layers,
                q,
                lambda,
                k,
            } => {
                let layers = layers
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        polygon(l)
                            .map_err(|e| HarnessError::field(format!("medium.layers[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Medium::Nest(NestMedium::new(
                    NestPartition { layers },
                    q.clone(),
                    lambda.clone(),
                    *k,
                )?)
            }
            MediumSpec::Cells {
                hull,
                cells,
                q,
                lambda_star,
                k,
            } => {
                let hull =
                    polygon(hull).map_err(|e| HarnessError::field("medium.hull".into(), e))?;
                let cells = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        polygon(c).map_err(|e| HarnessError::field(format!("medium.cells[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Medium::Cells(CellMedium::new(
                    CellPartition { hull, cells },
                    q.clone(),
                    *lambda_star,
                    *k,
                )?)
            }
        };
        Ok(m)
    }

    pub fn from_medium(m: &Medium) -> Self {
        match m {
            Medium::Nest(n) => MediumSpec::Nest {
                layers: n.partition.layers.iter().map(vertex_list).collect(),
                q: n.q.clone(),
                lambda: n.lambda.clone(),
                k: n.k,
            },
            Medium::Cells(c) => MediumSpec::Cells {
                hull: vertex_list(&c.partition.hull),
                cells: c.partition.cells.iter().map(vertex_list).collect(),
                q: c.q.clone(),
                lambda_star: c.lambda_star,
                k: c.k,
            },
        }
    }

    pub fn k(&self) -> f64 {
        match self {
            MediumSpec::Nest { k, .. } | MediumSpec::Cells { k, .. } => *k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentSpec {
    PlaneWave {
        /// Propagation direction `(cos a, sin a)`.
        direction_angle: f64,
        #[serde(default = "one")]
        amplitude: Complex64,
    },
    PointSource {
        location: [f64; 2],
        #[serde(default = "one")]
        amplitude: Complex64,
    },
    None,
}

impl Default for IncidentSpec {
    fn default() -> Self {
        IncidentSpec::PlaneWave {
            direction_angle: 0.0,
            amplitude: one(),
        }
    }
}

impl IncidentSpec {
    pub fn build(&self) -> Result<IncidentField, HarnessError> {
        let f = match *self {
            IncidentSpec::PlaneWave {
                direction_angle,
                amplitude,
            } => IncidentField {
                kind: IncidentKind::PlaneWave {
                    direction: Point2::from_polar(1.0, direction_angle),
                },
                amplitude,
            },
            IncidentSpec::PointSource {
                location,
                amplitude,
            } => IncidentField {
                kind: IncidentKind::PointSource {
                    location: to_point(location),
                },
                amplitude,
            },
            IncidentSpec::None => IncidentField::none(),
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub nodes_per_edge: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_grading() -> f64 {
    3.0
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            nodes_per_edge: 32,
            grading: default_grading(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearFieldGrid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_angles")]
    pub far_field_angles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_field: Option<NearFieldGrid>,
}

fn default_angles() -> usize {
    256
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            far_field_angles: default_angles(),
            near_field: None,
        }
    }
}

/// What a sweep perturbs. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationTarget {
    /// Potential of nest layer or cell `index`.
    Q { index: usize },
    /// Conductive parameter of nest interface `index`.
    Lambda { index: usize },
    /// The single conductive parameter of a cell medium.
    LambdaStar,
    /// Moves vertex `vertex` of polygon `polygon` (nest layer or cell) along
    /// `(cos a, sin a)`.
    Vertex {
        polygon: usize,
        vertex: usize,
        direction_angle: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: PerturbationTarget,
    pub magnitudes: Vec<f64>,
    /// Complex direction of parameter perturbations; ignored for vertices.
    #[serde(default = "one")]
    pub direction: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveSpec {
    /// Explicit second medium compared against the base one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_medium: Option<MediumSpec>,
}

/// Forward-problem document used by validate, forward, sweep and passive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub medium: MediumSpec,
    #[serde(default)]
    pub incident: IncidentSpec,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passive: Option<PassiveSpec>,
}

impl Scenario {
    pub fn new(medium: MediumSpec, incident: IncidentSpec) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            medium,
            incident,
            mesh: MeshSpec::default(),
            outputs: OutputSpec::default(),
            sweep: None,
            passive: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub theta_m: f64,
    pub theta_max: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Plane-wave sum lifted to carry the exact jumps.
    Lifting,
    /// Least-squares Fourier-Bessel pair.
    FourierBessel {
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "one")]
        apex_value: Complex64,
        #[serde(default)]
        regularization: f64,
    },
}

fn default_order() -> usize {
    20
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    Full,
    LeadingOrder,
}

pub fn default_s_grid() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0, 800.0]
}

/// Manufactured corner scenario: `eta_diff = eta1 - eta2`, with `eta2 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub generator: GeneratorSpec,
    pub sector: SectorConfig,
    #[serde(default = "one")]
    pub k: Complex64,
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub eta_diff: Complex64,
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub correction: Correction,
    /// `eta1 - eta2` used by the omega step once it is known, for example zero
    /// after the eta step has shown it vanishes. The extrapolated estimate
    /// is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assume_eta_diff: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub schema_version: u32,
    pub probe: ProbeSpec,
}

/// Grid for the CGO verification table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgoGrid {
    pub schema_version: u32,
    /// `(theta_m, theta_max)` pairs.
    pub sectors: Vec<[f64; 2]>,
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub h: Vec<f64>,
    /// Random `(theta, s, h)` triples for the edge identity.
    pub edge_samples: usize,
    pub seed: u64,
    /// Relative tolerance of the exact sector identity.
    pub sector_rel_tol: f64,
    /// Absolute tolerance of the edge identity.
    pub edge_abs_tol: f64,
}

impl Default for CgoGrid {
    fn default() -> Self {
        CgoGrid {
            schema_version: SCHEMA_VERSION,
            sectors: vec![
                [0.0, PI / 2.0],
                [-PI / 4.0, PI / 4.0],
                [-PI / 3.0, PI / 6.0],
            ],
            s: vec![1.0, 10.0, 100.0],
            alpha: vec![0.25, 0.5, 0.75],
            h: vec![0.5, 1.0, 2.0],
            edge_samples: 27,
            seed: 20,
            sector_rel_tol: 1e-8,
            edge_abs_tol: 1e-10,
        }
    }
}

/// Documents carrying a schema version.
pub trait Versioned {
    fn schema_version(&self) -> u32;
}

impl Versioned for Scenario {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl Versioned for ProbeConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl Versioned for CgoGrid {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

/// Parses a document, reporting the failing field path with line and column.
pub fn parse<T: DeserializeOwned + Versioned>(text: &str) -> Result<T, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        HarnessError::Parse {
            line: inner.line(),
            column: inner.column(),
            field: path,
            message: inner.to_string(),
        }
    })?;
    if doc.schema_version() != SCHEMA_VERSION {
        return Err(HarnessError::Parse {
            line: 0,
            column: 0,
            field: "schema_version".into(),
            message: format!(
                "unsupported schema version {}, expected {SCHEMA_VERSION}",
                doc.schema_version()
            ),
        });
    }
    Ok(doc)
}

pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Read {
        path: path.display().to_string(),
        source: e,
    })?;
    parse(&text)
}

/// Hex SHA-256 of the canonical serialization.
pub fn digest<T: Serialize>(doc: &T) -> String {
    let bytes = serde_json::to_vec(doc).expect("config types serialize");
    format!("{:x}", Sha256::digest(&bytes))
}
