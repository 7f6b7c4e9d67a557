//! Graded Nyström meshes on interface segments.
//!
//! Each segment `[P, Q]` is parametrized over `[0, 2 pi]` by
//! `x(s) = P + w(s)/(2 pi) (Q - P)` with Kress' sigmoidal grading `w`, which
//! vanishes to order `p` at both ends; nodes sit at `s_i = 2 pi (i + 1/2)/n`.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::medium::{Medium, Segment};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Nodes per segment; even, at least 4.
    pub nodes_per_edge: usize,
    /// Grading exponent `p >= 2`.
    pub grading: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            nodes_per_edge: 64,
            grading: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SegmentMesh {
    pub segment: Segment,
    /// Parameter values `s_i`.
    pub params: Vec<f64>,
    /// `w(s_i) / (2 pi)` in `(0, 1)`.
    pub fractions: Vec<f64>,
    pub points: Vec<Point2>,
    /// `|x'(s_i)|`.
    pub speed: Vec<f64>,
    pub normal: Point2,
}

impl SegmentMesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    /// Trapezoid weight of node `j`: `(2 pi / n) |x'(s_j)|`.
    pub fn weight(&self, j: usize) -> f64 {
        2.0 * PI / self.len() as f64 * self.speed[j]
    }
    /// Distance between nodes `i` and `j`, computed from parameters to avoid
    /// cancellation near the ends.
    pub fn node_distance(&self, i: usize, j: usize) -> f64 {
        self.segment.length() * (self.fractions[i] - self.fractions[j]).abs()
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub segments: Vec<SegmentMesh>,
    pub options: MeshOptions,
}

fn v(s: f64, p: f64) -> f64 {
    (1.0 / p - 0.5) * ((PI - s) / PI).powi(3) + (1.0 / p) * (s - PI) / PI + 0.5
}

fn dv(s: f64, p: f64) -> f64 {
    -3.0 * (1.0 / p - 0.5) * (PI - s).powi(2) / PI.powi(3) + 1.0 / (p * PI)
}

/// Grading map `w(s)` and its derivative.
pub fn grading(s: f64, p: f64) -> (f64, f64) {
    let a = v(s, p).powf(p);
    let b = v(2.0 * PI - s, p).powf(p);
    let da = p * v(s, p).powf(p - 1.0) * dv(s, p);
    let db = -p * v(2.0 * PI - s, p).powf(p - 1.0) * dv(2.0 * PI - s, p);
    let w = 2.0 * PI * a / (a + b);
    let dw = 2.0 * PI * (da * b - a * db) / ((a + b) * (a + b));
    (w, dw)
}

impl BoundaryMesh {
    pub fn build(medium: &Medium, options: MeshOptions) -> Result<Self> {
        let n = options.nodes_per_edge;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidMesh(format!(
                "nodes per edge must be even and at least 4, got {n}"
            )));
        }
        if !(options.grading >= 2.0 && options.grading.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "grading exponent must be at least 2, got {}",
                options.grading
            )));
        }
        let segments = medium
            .segments()
            .into_iter()
            .map(|seg| mesh_segment(seg, n, options.grading))
            .collect();
        Ok(BoundaryMesh { segments, options })
    }

    pub fn node_count(&self) -> usize {
        self.segments.iter().map(|s| s.len()).sum()
    }

    /// Two unknowns (trace and inner normal derivative) per node.
    pub fn unknowns(&self) -> usize {
        2 * self.node_count()
    }
}

fn mesh_segment(segment: Segment, n: usize, p: f64) -> SegmentMesh {
    let len = segment.length();
    let dir = segment.end - segment.start;
    let mut params = Vec::with_capacity(n);
    let mut fractions = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    for i in 0..n {
        let s = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        let (w, dw) = grading(s, p);
        let f = w / (2.0 * PI);
        params.push(s);
        fractions.push(f);
        points.push(segment.start + dir.scale(f));
        speed.push(len * dw / (2.0 * PI));
    }
    SegmentMesh {
        normal: segment.normal(),
        segment,
        params,
        fractions,
        points,
        speed,
    }
}

/// Quadrature weights `R_j(t_i)` of the periodic log kernel
/// `ln(4 sin^2((t - s)/2))`, indexed by `(i - j) mod n`.
pub fn log_weights(n: usize) -> Vec<f64> {
    let m = n / 2;
    (0..n)
        .map(|k| {
            let d = 2.0 * PI * k as f64 / n as f64;
            let mut sum = 0.0;
            for j in 1..m {
                sum += (j as f64 * d).cos() / j as f64;
            }
            -(2.0 * PI / m as f64) * sum - PI / (m * m) as f64 * (m as f64 * d).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_endpoints_and_monotonicity() {
        let p = 3.0;
        assert!(grading(0.0, p).0.abs() < 1e-15);
        assert!((grading(2.0 * PI, p).0 - 2.0 * PI).abs() < 1e-12);
        assert!((grading(PI, p).0 - PI).abs() < 1e-12);
        let mut last = 0.0;
        for i in 1..100 {
            let (w, dw) = grading(2.0 * PI * i as f64 / 100.0, p);
            assert!(w > last && dw > 0.0);
            last = w;
        }
    }

    #[test]
    fn grading_derivative_matches_difference_quotient() {
        for &s in &[0.3, 1.1, 3.0, 5.9] {
            let h = 1e-6;
            let fd = (grading(s + h, 3.0).0 - grading(s - h, 3.0).0) / (2.0 * h);
            assert!((fd - grading(s, 3.0).1).abs() < 1e-7);
        }
    }

    #[test]
    fn node_spacing_is_algebraic_near_ends() {
        // w(s) ~ c s^p: the ratio of the first two fractions is (3/1)^p.
        let (w0, _) = grading(PI / 256.0, 3.0);
        let (w1, _) = grading(3.0 * PI / 256.0, 3.0);
        assert!(((w1 / w0) - 27.0).abs() < 0.5);
    }

    #[test]
    fn log_weights_integrate_trig_polynomials() {
        // int_0^{2pi} ln(4 sin^2(s/2)) cos(m s) ds = -2 pi / m for m >= 1, 0 for m = 0.
        let n = 16;
        let r = log_weights(n);
        for m in 0..(n / 2) {
            let q: f64 = (0..n)
                .map(|j| r[j] * (m as f64 * 2.0 * PI * j as f64 / n as f64).cos())
                .sum();
            let exact = if m == 0 { 0.0 } else { -2.0 * PI / m as f64 };
            assert!((q - exact).abs() < 1e-12, "m={m}: {q} vs {exact}");
        }
    }
}
