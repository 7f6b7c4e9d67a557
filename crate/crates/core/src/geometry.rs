//! Polygons, nest and cell partitions, point location and corner sectors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }
    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
    /// Counterclockwise rotation by `angle`.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
    pub fn from_polar(r: f64, theta: f64) -> Point2 {
        Point2::new(r * theta.cos(), r * theta.sin())
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (p - (a + d.scale(t))).norm()
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Proper crossing of open segments: interiors intersect in a single point
/// that is not an endpoint of either.
fn segments_cross_properly(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let scale_ab = (b - a).norm();
    let scale_cd = (d - c).norm();
    let o1 = orient(a, b, c) / scale_ab;
    let o2 = orient(a, b, d) / scale_ab;
    let o3 = orient(c, d, a) / scale_cd;
    let o4 = orient(c, d, b) / scale_cd;
    o1.abs() > tol
        && o2.abs() > tol
        && o3.abs() > tol
        && o4.abs() > tol
        && (o1 > 0.0) != (o2 > 0.0)
        && (o3 > 0.0) != (o4 > 0.0)
}

/// Closed segments intersect (including touching and collinear overlap).
fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    if segments_cross_properly(a, b, c, d, tol) {
        return true;
    }
    point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
        || point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
}

/// A simple polygon with counterclockwise vertex order.
///
/// Straight angles (three consecutive collinear vertices with the middle one
/// between its neighbours) are allowed; spikes are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn bbox_diameter(v: &[Point2]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in v {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0).hypot(y1 - y0)
}

impl Polygon {
    /// Validates and normalizes to counterclockwise order.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!(
                "{n} vertices, need at least 3"
            )));
        }
        if vertices
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let diam = bbox_diameter(&vertices);
        let tol = 1e-12 * diam;
        for i in 0..n {
            if (vertices[(i + 1) % n] - vertices[i]).norm() <= tol {
                return Err(Error::InvalidPolygon(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= 1e-14 * diam * diam {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            let p = vertices[(i + n - 1) % n];
            let v = vertices[i];
            let q = vertices[(i + 1) % n];
            let a = v - p;
            let b = q - v;
            if a.cross(b).abs() <= 1e-12 * a.norm() * b.norm() && a.dot(b) < 0.0 {
                return Err(Error::InvalidPolygon(format!("spike at vertex {i}")));
            }
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_touch(a, b, c, d, tol) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// Regular polygon with `n` vertices on the circle of radius `r`, first vertex at angle `phase`.
    pub fn regular(n: usize, r: f64, center: Point2, phase: f64) -> Result<Self> {
        Polygon::new(
            (0..n)
                .map(|i| center + Point2::from_polar(r, phase + 2.0 * PI * i as f64 / n as f64))
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges `(v_i, v_{i+1})` in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let a6 = 6.0 * self.area();
        Point2::new(cx / a6, cy / a6)
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding-number containment; boundary points are ambiguous and must be
    /// screened with [`Polygon::boundary_distance`] first.
    pub fn contains(&self, p: Point2) -> bool {
        let mut wn = 0i32;
        for (a, b) in self.edges() {
            if a.y <= p.y {
                if b.y > p.y && orient(a, b, p) > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && orient(a, b, p) < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    /// Convex, allowing straight angles.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[(i + 1) % n] - self.vertices[i];
            let b = self.vertices[(i + 2) % n] - self.vertices[(i + 1) % n];
            a.cross(b) >= -1e-12 * a.norm() * b.norm()
        })
    }

    /// A point strictly inside, found by stepping inward from an edge midpoint.
    pub fn interior_point(&self) -> Point2 {
        let diam = self.diameter();
        for (a, b) in self.edges() {
            let t = b - a;
            let inward = Point2::new(-t.y, t.x).scale(1.0 / t.norm());
            let mid = a + t.scale(0.5);
            let mut eps = 1e-3 * t.norm();
            while eps > 1e-9 * diam {
                let p = mid + inward.scale(eps);
                if self.contains(p) && self.boundary_distance(p) > 0.5 * eps {
                    return p;
                }
                eps *= 0.5;
            }
        }
        self.centroid()
    }
}

/// Geometric tolerance for a point set: `1e-12` times its bounding-box diagonal.
pub fn geometric_tolerance(points: &[Point2]) -> f64 {
    1e-12 * bbox_diameter(points)
}

/// Nested convex layers `Sigma_1 ⊃ Sigma_2 ⊃ ... ⊃ Sigma_N`, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestPartition {
    pub layers: Vec<Polygon>,
}

/// Cells tiling the hull `Omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub hull: Polygon,
    pub cells: Vec<Polygon>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

/// Outcome of partition validation. Violations are blocking; notes are not.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
    fn violate(&mut self, rule: &'static str, message: String) {
        self.violations.push(Violation { rule, message });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")?;
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", v.message)?;
        }
        Ok(())
    }
}

pub fn validate_nest(p: &NestPartition) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if p.layers.is_empty() {
        rep.violate("nonempty", "nest has no layers".into());
        return rep;
    }
    for (i, layer) in p.layers.iter().enumerate() {
        if !layer.is_convex() {
            rep.violate("convex", format!("layer {} not convex", i + 1));
        }
    }
    let tol = geometric_tolerance(p.layers[0].vertices());
    for i in 1..p.layers.len() {
        let outer = &p.layers[i - 1];
        let inner = &p.layers[i];
        let vertices_inside = inner
            .vertices()
            .iter()
            .all(|&v| outer.contains(v) && outer.boundary_distance(v) > tol);
        let crossing = inner
            .edges()
            .any(|(a, b)| outer.edges().any(|(c, d)| segments_touch(a, b, c, d, tol)));
        if !vertices_inside || crossing {
            rep.violate("nested", format!("layer {} not inside layer {}", i + 1, i));
        }
    }
    rep
}

fn strictly_inside(poly: &Polygon, p: Point2, tol: f64) -> bool {
    poly.contains(p) && poly.boundary_distance(p) > tol
}

fn interiors_overlap(a: &Polygon, b: &Polygon, tol: f64) -> bool {
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if segments_cross_properly(p, q, r, s, tol) {
                return true;
            }
        }
    }
    let probes = |x: &Polygon, y: &Polygon| {
        x.vertices().iter().any(|&v| strictly_inside(y, v, tol))
            || x.edges()
                .any(|(p, q)| strictly_inside(y, p + (q - p).scale(0.5), tol))
            || strictly_inside(y, x.interior_point(), tol)
    };
    probes(a, b) || probes(b, a)
}

fn segment_on_boundary(poly: &Polygon, a: Point2, b: Point2, tol: f64) -> bool {
    (0..=4).all(|i| {
        let t = i as f64 / 4.0;
        poly.boundary_distance(a + (b - a).scale(t)) <= tol
    })
}

pub fn validate_cells(p: &CellPartition) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if p.cells.is_empty() {
        rep.violate("nonempty", "partition has no cells".into());
        return rep;
    }
    let tol = geometric_tolerance(p.hull.vertices());
    let area_tol = 1e-9 * p.hull.area().abs();

    for i in 0..p.cells.len() {
        for j in (i + 1)..p.cells.len() {
            if interiors_overlap(&p.cells[i], &p.cells[j], tol) {
                rep.violate("disjoint", format!("cells {},{} overlap", i + 1, j + 1));
            }
        }
    }
    for (i, c) in p.cells.iter().enumerate() {
        let vertices_in = c
            .vertices()
            .iter()
            .all(|&v| p.hull.contains(v) || p.hull.boundary_distance(v) <= tol);
        let edges_in = c.edges().all(|(a, b)| {
            let m = a + (b - a).scale(0.5);
            p.hull.contains(m) || p.hull.boundary_distance(m) <= tol
        });
        let crosses = c.edges().any(|(a, b)| {
            p.hull
                .edges()
                .any(|(r, s)| segments_cross_properly(a, b, r, s, tol))
        });
        if !vertices_in || !edges_in || crosses {
            rep.violate("contained", format!("cell {} leaves the hull", i + 1));
        }
    }
    let total: f64 = p.cells.iter().map(|c| c.area()).sum();
    if (total - p.hull.area()).abs() > area_tol {
        rep.violate(
            "covering",
            format!(
                "cells cover area {total} but the hull has area {}",
                p.hull.area()
            ),
        );
    }
    for (i, c) in p.cells.iter().enumerate() {
        let v = c.vertices();
        let n = v.len();
        let has_hull_vertex = (0..n).any(|k| {
            let prev = v[(k + n - 1) % n];
            let next = v[(k + 1) % n];
            segment_on_boundary(&p.hull, prev, v[k], tol)
                && segment_on_boundary(&p.hull, v[k], next, tol)
        });
        if !has_hull_vertex {
            rep.violate("hull-vertex", format!("cell {} has no hull vertex", i + 1));
        }
    }
    // Cells meeting at a single point only are allowed but reported.
    for i in 0..p.cells.len() {
        for j in (i + 1)..p.cells.len() {
            let a = &p.cells[i];
            let b = &p.cells[j];
            let shares_edge = a.edges().any(|(p0, p1)| {
                b.edges().any(|(q0, q1)| {
                    let m = p0 + (p1 - p0).scale(0.5);
                    let n = q0 + (q1 - q0).scale(0.5);
                    point_segment_distance(m, q0, q1) <= tol
                        || point_segment_distance(n, p0, p1) <= tol
                })
            });
            let touches = a.vertices().iter().any(|&v| b.boundary_distance(v) <= tol);
            if touches && !shares_edge {
                rep.notes
                    .push(format!("cells {},{} meet only at a vertex", i + 1, j + 1));
            }
        }
    }
    rep
}

/// Interface identifier: for nests, `l` names `∂Sigma_l`; for cells, it
/// indexes the interface segment list of the medium (both 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterfaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// `U_l` for nests, cell `l` for cell partitions (1-based).
    Region(usize),
    Exterior,
    OnInterface(InterfaceId),
}

/// Region containing `x` in a nest. Points within the geometric tolerance
/// of some `∂Sigma_l` are reported as on that interface.
pub fn locate_nest(p: &NestPartition, x: Point2) -> RegionLabel {
    let tol = geometric_tolerance(p.layers[0].vertices());
    for (l, layer) in p.layers.iter().enumerate() {
        if layer.boundary_distance(x) <= tol {
            return RegionLabel::OnInterface(InterfaceId(l + 1));
        }
    }
    let mut label = RegionLabel::Exterior;
    for (l, layer) in p.layers.iter().enumerate() {
        if layer.contains(x) {
            label = RegionLabel::Region(l + 1);
        } else {
            break;
        }
    }
    label
}

/// Region containing `x` in a cell partition. Interface ids on the boundary
/// are not resolved here (the medium owns the segment list); any boundary
/// point gets `InterfaceId(0)`.
pub fn locate_cells(p: &CellPartition, x: Point2) -> RegionLabel {
    let tol = geometric_tolerance(p.hull.vertices());
    for c in &p.cells {
        if c.boundary_distance(x) <= tol {
            return RegionLabel::OnInterface(InterfaceId(0));
        }
    }
    for (l, c) in p.cells.iter().enumerate() {
        if c.contains(x) {
            return RegionLabel::Region(l + 1);
        }
    }
    RegionLabel::Exterior
}

/// Truncated corner sector `S_h` at a polygon vertex, in the local frame
/// where the apex is the origin and the sector opens over `(theta_m, theta_max)`.
///
/// A global point is `apex + rotate(local, rotation)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSector {
    pub apex: Point2,
    pub theta_m: f64,
    pub theta_max: f64,
    pub h: f64,
    pub rotation: f64,
    /// Opening angle numerically equal to pi (a straight vertex).
    pub degenerate: bool,
}

impl CornerSector {
    /// Sector at the origin without rotation.
    pub fn new(theta_m: f64, theta_max: f64, h: f64) -> Result<Self> {
        let s = CornerSector {
            apex: Point2::new(0.0, 0.0),
            theta_m,
            theta_max,
            h,
            rotation: 0.0,
            degenerate: (theta_max - theta_m - PI).abs() < 1e-12,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if !(-PI < self.theta_m && self.theta_m < self.theta_max && self.theta_max < PI) {
            return Err(Error::InvalidSector(format!(
                "need -pi < theta_m < theta_max < pi, got ({}, {})",
                self.theta_m, self.theta_max
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidSector(format!(
                "radius h = {} must be positive",
                self.h
            )));
        }
        Ok(())
    }

    pub fn opening(&self) -> f64 {
        self.theta_max - self.theta_m
    }

    pub fn to_global(&self, local: Point2) -> Point2 {
        self.apex + local.rotate(self.rotation)
    }

    pub fn to_local(&self, global: Point2) -> Point2 {
        (global - self.apex).rotate(-self.rotation)
    }

    /// Global unit vector along the local direction `theta`.
    pub fn direction(&self, theta: f64) -> Point2 {
        Point2::from_polar(1.0, theta + self.rotation)
    }
}

/// Corner sectors at every vertex of a counterclockwise polygon.
///
/// Raw edge angles are used when they fit in `(-pi, pi)`; otherwise the
/// sector is rotated to be symmetric about the local positive x-axis.
pub fn corner_sectors(poly: &Polygon, h: f64) -> Result<Vec<CornerSector>> {
    let v = poly.vertices();
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let apex = v[i];
        let next = v[(i + 1) % n];
        let prev = v[(i + n - 1) % n];
        let limit = 0.5
            * (0..n)
                .filter(|&j| j != i && (j + 1) % n != i)
                .map(|j| point_segment_distance(apex, v[j], v[(j + 1) % n]))
                .fold(f64::INFINITY, f64::min);
        if !(h > 0.0) || h > limit {
            return Err(Error::SectorTooLarge {
                vertex: i,
                h,
                limit,
            });
        }
        let d1 = next - apex;
        let d2 = prev - apex;
        let mut opening = d2.arg() - d1.arg();
        if opening <= 0.0 {
            opening += 2.0 * PI;
        }
        let start = d1.arg();
        let (theta_m, theta_max, rotation) = if start > -PI && start + opening < PI {
            (start, start + opening, 0.0)
        } else {
            (-0.5 * opening, 0.5 * opening, start + 0.5 * opening)
        };
        out.push(CornerSector {
            apex,
            theta_m,
            theta_max,
            h,
            rotation,
            degenerate: (opening - PI).abs() < 1e-10,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn square_origin_sector() {
        let s = corner_sectors(&square(), 0.1).unwrap();
        assert!((s[0].theta_m - 0.0).abs() < 1e-15);
        assert!((s[0].theta_max - PI / 2.0).abs() < 1e-15);
        assert_eq!(s[0].rotation, 0.0);
        // vertex (1,1): edges toward -x and -y, rotated
        assert!((s[2].opening() - PI / 2.0).abs() < 1e-14);
        assert!(s[2].theta_m > -PI && s[2].theta_max < PI);
        let mid = s[2].to_global(Point2::from_polar(
            0.05,
            0.5 * (s[2].theta_m + s[2].theta_max),
        ));
        assert!(square().contains(mid));
    }

    #[test]
    fn oversized_sector_fails() {
        let r = corner_sectors(&square(), 0.6);
        assert!(matches!(r, Err(Error::SectorTooLarge { .. })));
    }

    #[test]
    fn straight_vertex_is_flagged() {
        let p = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let s = corner_sectors(&p, 0.1).unwrap();
        assert!(s[1].degenerate);
        assert!(!s[0].degenerate);
    }

    #[test]
    fn stacked_rectangles_need_hull_vertices() {
        let rect = |x0: f64| {
            Polygon::new(vec![
                Point2::new(x0, 0.0),
                Point2::new(x0 + 1.0, 0.0),
                Point2::new(x0 + 1.0, 1.0),
                Point2::new(x0, 1.0),
            ])
            .unwrap()
        };
        let hull = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let rep = validate_cells(&CellPartition {
            hull,
            cells: vec![rect(0.0), rect(1.0), rect(2.0)],
        });
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].message, "cell 2 has no hull vertex");
    }

    #[test]
    fn overlapping_cells_are_reported() {
        let hull = square();
        let a = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.6, 0.0),
            Point2::new(0.6, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let b = Polygon::new(vec![
            Point2::new(0.4, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.4, 1.0),
        ])
        .unwrap();
        let rep = validate_cells(&CellPartition {
            hull,
            cells: vec![a, b],
        });
        assert!(rep
            .violations
            .iter()
            .any(|v| v.message == "cells 1,2 overlap"));
    }

    #[test]
    fn diagonal_cells_touching_at_a_point_are_noted() {
        let q = |x0: f64, y0: f64| {
            Polygon::new(vec![
                Point2::new(x0, y0),
                Point2::new(x0 + 0.5, y0),
                Point2::new(x0 + 0.5, y0 + 0.5),
                Point2::new(x0, y0 + 0.5),
            ])
            .unwrap()
        };
        let rep = validate_cells(&CellPartition {
            hull: square(),
            cells: vec![q(0.0, 0.0), q(0.5, 0.0), q(0.5, 0.5), q(0.0, 0.5)],
        });
        assert!(rep.is_ok(), "{rep}");
        assert_eq!(rep.notes.len(), 2);
    }

    #[test]
    fn nest_violations() {
        let big = Polygon::regular(6, 1.0, Point2::new(0.0, 0.0), 0.0).unwrap();
        let shifted = Polygon::regular(6, 0.5, Point2::new(0.7, 0.0), 0.0).unwrap();
        let rep = validate_nest(&NestPartition {
            layers: vec![big, shifted],
        });
        assert_eq!(rep.violations[0].message, "layer 2 not inside layer 1");

        let l = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        let rep = validate_nest(&NestPartition { layers: vec![l] });
        assert_eq!(rep.violations[0].message, "layer 1 not convex");
    }

    #[test]
    fn locate_reports_interfaces() {
        let nest = NestPartition {
            layers: vec![
                Polygon::regular(4, 2.0, Point2::new(0.0, 0.0), 0.0).unwrap(),
                Polygon::regular(4, 1.0, Point2::new(0.0, 0.0), 0.0).unwrap(),
            ],
        };
        assert_eq!(
            locate_nest(&nest, Point2::new(0.0, 0.0)),
            RegionLabel::Region(2)
        );
        assert_eq!(
            locate_nest(&nest, Point2::new(1.5, 0.0)),
            RegionLabel::Region(1)
        );
        assert_eq!(
            locate_nest(&nest, Point2::new(3.0, 0.0)),
            RegionLabel::Exterior
        );
        assert_eq!(
            locate_nest(&nest, Point2::new(1.0, 0.0)),
            RegionLabel::OnInterface(InterfaceId(2))
        );
    }
}
