//! Helmholtz layer-potential kernels for `G(x, y) = (i/4) H0(kappa |x - y|)`,
//! single and as differences at two wavenumbers, plus the logarithmic
//! splittings `k = A(r) ln r + B(r)` used on a straight segment.

use crate::geometry::Point2;
use crate::special::{hankel01, j01, y1_regular, EULER_GAMMA};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);
const I4: Complex64 = Complex64::new(0.0, 0.25);

/// Values of the four kernels at one `(x, y)` pair.
///
/// `s = G`, `d = dG/dnu_y`, `kp = dG/dnu_x`, `t = d^2 G/(dnu_x dnu_y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelSet {
    pub s: Complex64,
    pub d: Complex64,
    pub kp: Complex64,
    pub t: Complex64,
}

struct Geometry {
    r: f64,
    zx: f64,
    zy: f64,
    nxy: f64,
}

fn pair_geometry(x: Point2, y: Point2, nx: Point2, ny: Point2) -> Geometry {
    let z = x - y;
    let r = z.norm();
    let zh = z.scale(1.0 / r);
    Geometry {
        r,
        zx: zh.dot(nx),
        zy: zh.dot(ny),
        nxy: nx.dot(ny),
    }
}

fn assemble(g: &Geometry, g0: Complex64, g1: Complex64, g2: Complex64) -> KernelSet {
    KernelSet {
        s: g0,
        d: -g1 * g.zy,
        kp: g1 * g.zx,
        t: -(g2 * (g.zx * g.zy) + g1 / g.r * (g.nxy - g.zx * g.zy)),
    }
}

/// Kernels at wavenumber `kappa`; requires `x != y`.
pub fn kernels(kappa: Complex64, x: Point2, y: Point2, nx: Point2, ny: Point2) -> KernelSet {
    let g = pair_geometry(x, y, nx, ny);
    let z = kappa * g.r;
    let (h0, h1) = hankel01(z);
    let g0 = I4 * h0;
    let g1 = -I4 * kappa * h1;
    let g2 = -I4 * kappa * kappa * (h0 - h1 / z);
    assemble(&g, g0, g1, g2)
}

/// `kappa H1(kappa r)` and `H0(kappa r)` with the `2i/(pi r)` pole of the
/// former removed (it is the same for every wavenumber).
fn regular_parts(kappa: Complex64, r: f64) -> (Complex64, Complex64) {
    let z = kappa * r;
    let (h0, _) = hankel01(z);
    let (_, j1) = j01(z);
    let kh1_reg = kappa * (j1 + I * y1_regular(z));
    (h0, kh1_reg)
}

/// Kernels at `a` minus kernels at `b`, with the leading singularities
/// cancelled analytically; requires `x != y`.
pub fn kernel_difference(
    a: Complex64,
    b: Complex64,
    x: Point2,
    y: Point2,
    nx: Point2,
    ny: Point2,
) -> KernelSet {
    if a == b {
        return KernelSet::default();
    }
    let g = pair_geometry(x, y, nx, ny);
    let (g0, g1, g2) = difference_radial(a, b, g.r);
    assemble(&g, g0, g1, g2)
}

/// `(G_a - G_b, G_a' - G_b', G_a'' - G_b'')` as functions of `r > 0`.
fn difference_radial(a: Complex64, b: Complex64, r: f64) -> (Complex64, Complex64, Complex64) {
    let (h0a, kh1a) = regular_parts(a, r);
    let (h0b, kh1b) = regular_parts(b, r);
    let dh1 = kh1a - kh1b;
    let g0 = I4 * (h0a - h0b);
    let g1 = -I4 * dh1;
    let g2 = -I4 * (a * a * h0a - b * b * h0b - dh1 / r);
    (g0, g1, g2)
}

/// Log-split kernel `A(r) ln r + B(r)` with its `r -> 0` limits.
pub trait SplitKernel {
    /// `(A(r), B(r))` for `r > 0`.
    fn split(&self, r: f64) -> (Complex64, Complex64);
    /// `(A(0), B(0))`.
    fn at_zero(&self) -> (Complex64, Complex64);
}

/// Single-layer kernel `G_a` on a straight segment.
pub struct SingleLayer(pub Complex64);

impl SplitKernel for SingleLayer {
    fn split(&self, r: f64) -> (Complex64, Complex64) {
        let a = self.0;
        let z = a * r;
        let (h0, _) = hankel01(z);
        let (j0, _) = j01(z);
        let big_a = -j0 / (2.0 * PI);
        (big_a, I4 * h0 - big_a * r.ln())
    }
    fn at_zero(&self) -> (Complex64, Complex64) {
        let a = self.0;
        let b0 = I4 - ((a * 0.5).ln() + EULER_GAMMA) / (2.0 * PI);
        (Complex64::new(-1.0 / (2.0 * PI), 0.0), b0)
    }
}

/// `G_a - G_b` on a straight segment.
pub struct SingleLayerDifference(pub Complex64, pub Complex64);

impl SplitKernel for SingleLayerDifference {
    fn split(&self, r: f64) -> (Complex64, Complex64) {
        let (a, b) = (self.0, self.1);
        let (j0a, _) = j01(a * r);
        let (j0b, _) = j01(b * r);
        let big_a = -(j0a - j0b) / (2.0 * PI);
        let (g0, _, _) = difference_radial(a, b, r);
        (big_a, g0 - big_a * r.ln())
    }
    fn at_zero(&self) -> (Complex64, Complex64) {
        let (a, b) = (self.0, self.1);
        (Complex64::new(0.0, 0.0), -(a.ln() - b.ln()) / (2.0 * PI))
    }
}

/// `T_a - T_b` on a straight segment, where it reduces to `-(G_a' - G_b')/r`.
pub struct HypersingularDifference(pub Complex64, pub Complex64);

impl SplitKernel for HypersingularDifference {
    fn split(&self, r: f64) -> (Complex64, Complex64) {
        let (a, b) = (self.0, self.1);
        let (_, j1a) = j01(a * r);
        let (_, j1b) = j01(b * r);
        let big_a = -(a * j1a - b * j1b) / (2.0 * PI * r);
        let (_, g1, _) = difference_radial(a, b, r);
        (big_a, -g1 / r - big_a * r.ln())
    }
    fn at_zero(&self) -> (Complex64, Complex64) {
        let (a, b) = (self.0, self.1);
        let (a2, b2) = (a * a, b * b);
        let big_a = -(a2 - b2) / (4.0 * PI);
        let b0 = I * (a2 - b2) / 8.0 - (a2 * (a * 0.5).ln() - b2 * (b * 0.5).ln()) / (4.0 * PI)
            + (a2 - b2) * (1.0 - 2.0 * EULER_GAMMA) / (8.0 * PI);
        (big_a, b0)
    }
}
