//! Media (potential and conductivity per region/interface) and incident fields.

use crate::error::{Error, Result};
use crate::geometry::{
    geometric_tolerance, locate_cells, locate_nest, point_segment_distance, validate_cells,
    validate_nest, CellPartition, InterfaceId, NestPartition, Point2, RegionLabel,
};
use crate::special::hankel01;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Region index: 0 is the exterior, `l >= 1` is layer/cell `l`.
pub type RegionId = usize;

/// Oriented straight interface piece. The normal `(t_y, -t_x)` points from
/// `inner` into `outer`; for counterclockwise boundaries `inner` is the
/// enclosed region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point2,
    pub end: Point2,
    pub inner: RegionId,
    pub outer: RegionId,
    pub lambda: Complex64,
    pub interface: InterfaceId,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
    pub fn normal(&self) -> Point2 {
        let t = (self.end - self.start).scale(1.0 / self.length());
        Point2::new(t.y, -t.x)
    }
}

fn check_lambda(lambda: Complex64, what: &str) -> Result<()> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidMedium(format!(
            "{what}: non-finite conductivity"
        )));
    }
    let in_cones = lambda.im >= 0.0 || lambda.re >= 0.0;
    if !in_cones {
        return Err(Error::InvalidMedium(format!(
            "{what}: conductivity {lambda} outside the admissible set (Im >= 0 or Re >= 0)"
        )));
    }
    Ok(())
}

fn check_q(q: Complex64, what: &str, require_nonnegative_im: bool) -> Result<()> {
    if !q.re.is_finite() || !q.im.is_finite() {
        return Err(Error::InvalidMedium(format!(
            "{what}: non-finite potential {q}"
        )));
    }
    if q.re <= 0.0 {
        return Err(Error::InvalidMedium(format!(
            "{what}: Re q must be positive, got {q}"
        )));
    }
    if require_nonnegative_im && q.im < 0.0 {
        return Err(Error::InvalidMedium(format!(
            "{what}: Im q must be nonnegative, got {q}"
        )));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidMedium(format!(
            "wavenumber k = {k} must be positive"
        )));
    }
    Ok(())
}

/// Nested medium: `q_l` on `U_l = Sigma_l \ Sigma_{l+1}`, `lambda_l` on `∂Sigma_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestMedium {
    pub partition: NestPartition,
    pub q: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub k: f64,
}

impl NestMedium {
    pub fn new(
        partition: NestPartition,
        q: Vec<Complex64>,
        lambda: Vec<Complex64>,
        k: f64,
    ) -> Result<Self> {
        let m = NestMedium {
            partition,
            q,
            lambda,
            k,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        let rep = validate_nest(&self.partition);
        if !rep.is_ok() {
            return Err(Error::InvalidMedium(rep.to_string()));
        }
        let n = self.partition.layers.len();
        if self.q.len() != n || self.lambda.len() != n {
            return Err(Error::InvalidMedium(format!(
                "{n} layers but {} potentials and {} conductivities",
                self.q.len(),
                self.lambda.len()
            )));
        }
        for (l, &q) in self.q.iter().enumerate() {
            check_q(q, &format!("layer {}", l + 1), false)?;
        }
        for (l, &lam) in self.lambda.iter().enumerate() {
            check_lambda(lam, &format!("interface {}", l + 1))?;
        }
        Ok(())
    }
}

/// Cell medium: `q_l` on each cell, one `lambda_star` on all interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMedium {
    pub partition: CellPartition,
    pub q: Vec<Complex64>,
    pub lambda_star: Complex64,
    pub k: f64,
}

impl CellMedium {
    pub fn new(
        partition: CellPartition,
        q: Vec<Complex64>,
        lambda_star: Complex64,
        k: f64,
    ) -> Result<Self> {
        let m = CellMedium {
            partition,
            q,
            lambda_star,
            k,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        let rep = validate_cells(&self.partition);
        if !rep.is_ok() {
            return Err(Error::InvalidMedium(rep.to_string()));
        }
        if self.q.len() != self.partition.cells.len() {
            return Err(Error::InvalidMedium(format!(
                "{} cells but {} potentials",
                self.partition.cells.len(),
                self.q.len()
            )));
        }
        for (l, &q) in self.q.iter().enumerate() {
            check_q(q, &format!("cell {}", l + 1), true)?;
        }
        check_lambda(self.lambda_star, "lambda_star")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Medium {
    Nest(NestMedium),
    Cells(CellMedium),
}

impl Medium {
    pub fn validate(&self) -> Result<()> {
        match self {
            Medium::Nest(m) => m.validate(),
            Medium::Cells(m) => m.validate(),
        }
    }

    pub fn k(&self) -> f64 {
        match self {
            Medium::Nest(m) => m.k,
            Medium::Cells(m) => m.k,
        }
    }

    pub fn region_count(&self) -> usize {
        match self {
            Medium::Nest(m) => m.q.len(),
            Medium::Cells(m) => m.q.len(),
        }
    }

    /// Outer boundary `∂Omega` vertices.
    pub fn hull_vertices(&self) -> &[Point2] {
        match self {
            Medium::Nest(m) => m.partition.layers[0].vertices(),
            Medium::Cells(m) => m.partition.hull.vertices(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        geometric_tolerance(self.hull_vertices())
    }

    /// Potential of a region; 1 in the exterior.
    pub fn region_q(&self, region: RegionId) -> Complex64 {
        if region == 0 {
            return Complex64::new(1.0, 0.0);
        }
        match self {
            Medium::Nest(m) => m.q[region - 1],
            Medium::Cells(m) => m.q[region - 1],
        }
    }

    /// Wavenumber `k sqrt(q)` of a region, principal branch.
    pub fn region_wavenumber(&self, region: RegionId) -> Complex64 {
        self.region_q(region).sqrt() * self.k()
    }

    pub fn locate(&self, x: Point2) -> RegionLabel {
        match self {
            Medium::Nest(m) => locate_nest(&m.partition, x),
            Medium::Cells(m) => match locate_cells(&m.partition, x) {
                RegionLabel::OnInterface(_) => {
                    let tol = self.tolerance();
                    let id = self
                        .segments()
                        .iter()
                        .position(|s| point_segment_distance(x, s.start, s.end) <= tol)
                        .map(|i| i + 1)
                        .unwrap_or(0);
                    RegionLabel::OnInterface(InterfaceId(id))
                }
                other => other,
            },
        }
    }

    /// Potential at a point. Fails on interfaces.
    pub fn potential_at(&self, x: Point2) -> Result<Complex64> {
        match self.locate(x) {
            RegionLabel::Region(l) => Ok(self.region_q(l)),
            RegionLabel::Exterior => Ok(Complex64::new(1.0, 0.0)),
            RegionLabel::OnInterface(_) => Err(Error::OnInterface { x: x.x, y: x.y }),
        }
    }

    /// Conductivity on an interface. Constant per interface, so the arclength
    /// position is accepted for interface compatibility but not used.
    pub fn lambda_at(&self, id: InterfaceId, _arclength: f64) -> Result<Complex64> {
        match self {
            Medium::Nest(m) => {
                if id.0 == 0 || id.0 > m.lambda.len() {
                    return Err(Error::UnknownInterface(id.0));
                }
                Ok(m.lambda[id.0 - 1])
            }
            Medium::Cells(m) => {
                if id.0 == 0 || id.0 > self.segments().len() {
                    return Err(Error::UnknownInterface(id.0));
                }
                Ok(m.lambda_star)
            }
        }
    }

    /// Interface segments, each shared interface listed once.
    pub fn segments(&self) -> Vec<Segment> {
        match self {
            Medium::Nest(m) => {
                let mut out = Vec::new();
                for (l, layer) in m.partition.layers.iter().enumerate() {
                    for (a, b) in layer.edges() {
                        out.push(Segment {
                            start: a,
                            end: b,
                            inner: l + 1,
                            outer: l,
                            lambda: m.lambda[l],
                            interface: InterfaceId(l + 1),
                        });
                    }
                }
                out
            }
            Medium::Cells(m) => cell_segments(m),
        }
    }
}

/// Cell edges split at every vertex lying on them, then paired: an edge
/// whose reverse belongs to another cell becomes one shared segment, and an
/// unpaired edge lies on the hull boundary.
fn cell_segments(m: &CellMedium) -> Vec<Segment> {
    let tol = geometric_tolerance(m.partition.hull.vertices());
    let all_vertices: Vec<Point2> = m
        .partition
        .cells
        .iter()
        .flat_map(|c| c.vertices().iter().copied())
        .chain(m.partition.hull.vertices().iter().copied())
        .collect();
    let mut pieces: Vec<(usize, Point2, Point2)> = Vec::new();
    for (ci, cell) in m.partition.cells.iter().enumerate() {
        for (a, b) in cell.edges() {
            let d = b - a;
            let len2 = d.dot(d);
            let mut ts: Vec<f64> = all_vertices
                .iter()
                .filter(|&&v| point_segment_distance(v, a, b) <= tol)
                .map(|&v| (v - a).dot(d) / len2)
                .filter(|&t| t > 1e-12 && t < 1.0 - 1e-12)
                .collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
            let mut prev = a;
            for t in ts {
                let p = a + d.scale(t);
                pieces.push((ci, prev, p));
                prev = p;
            }
            pieces.push((ci, prev, b));
        }
    }
    let same = |p: Point2, q: Point2| (p - q).norm() <= tol;
    let mut used = vec![false; pieces.len()];
    let mut out = Vec::new();
    for i in 0..pieces.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (ci, a, b) = pieces[i];
        let partner = (0..pieces.len()).find(|&j| {
            !used[j] && pieces[j].0 != ci && same(pieces[j].1, b) && same(pieces[j].2, a)
        });
        let outer = match partner {
            Some(j) => {
                used[j] = true;
                pieces[j].0 + 1
            }
            None => 0,
        };
        out.push(Segment {
            start: a,
            end: b,
            inner: ci + 1,
            outer,
            lambda: m.lambda_star,
            interface: InterfaceId(out.len() + 1),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncidentKind {
    PlaneWave { direction: Point2 },
    PointSource { location: Point2 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentField {
    pub kind: IncidentKind,
    pub amplitude: Complex64,
}

impl IncidentField {
    pub fn plane_wave(direction: Point2) -> Result<Self> {
        let f = IncidentField {
            kind: IncidentKind::PlaneWave { direction },
            amplitude: Complex64::new(1.0, 0.0),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn point_source(location: Point2) -> Self {
        IncidentField {
            kind: IncidentKind::PointSource { location },
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn none() -> Self {
        IncidentField {
            kind: IncidentKind::None,
            amplitude: Complex64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let IncidentKind::PlaneWave { direction } = self.kind {
            if (direction.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidIncident(format!(
                    "plane-wave direction has norm {}, need 1",
                    direction.norm()
                )));
            }
        }
        Ok(())
    }

    /// Point sources must sit strictly outside the closed scatterer.
    pub fn validate_against(&self, medium: &Medium) -> Result<()> {
        self.validate()?;
        if let IncidentKind::PointSource { location } = self.kind {
            if medium.locate(location) != RegionLabel::Exterior {
                return Err(Error::InvalidIncident(
                    "point source must lie strictly outside the scatterer".into(),
                ));
            }
        }
        Ok(())
    }

    /// Value and gradient at `x` for exterior wavenumber `k`.
    pub fn eval(&self, k: f64, x: Point2) -> Result<(Complex64, [Complex64; 2])> {
        let zero = Complex64::new(0.0, 0.0);
        match self.kind {
            IncidentKind::None => Ok((zero, [zero, zero])),
            IncidentKind::PlaneWave { direction: d } => {
                let u = self.amplitude * Complex64::new(0.0, k * d.dot(x)).exp();
                let ik = Complex64::new(0.0, k);
                Ok((u, [ik * d.x * u, ik * d.y * u]))
            }
            IncidentKind::PointSource { location } => {
                let z = x - location;
                let r = z.norm();
                if r <= 1e-14 * (1.0 + location.norm()) {
                    return Err(Error::AtSource);
                }
                let (h0, h1) = hankel01(Complex64::new(k * r, 0.0));
                let i4 = Complex64::new(0.0, 0.25) * self.amplitude;
                let u = i4 * h0;
                let dr = -i4 * k * h1;
                Ok((u, [dr * (z.x / r), dr * (z.y / r)]))
            }
        }
    }
}
