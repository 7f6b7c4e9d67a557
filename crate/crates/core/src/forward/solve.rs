//! Direct second-kind boundary integral formulation and dense solve.
//!
//! Unknowns per segment are the trace `phi` and the inner normal derivative
//! `psi`; the outer derivative is `psi - lambda phi`. In a region `U` the
//! field is represented by Green's formula over the segments bounding `U`:
//! `S psi - D phi` where `U` is the inner side, `-S (psi - lambda phi) + D phi`
//! where it is the outer side, plus `u^i` in the exterior. Adding the two
//! one-sided limits of each representation cancels the hypersingular and
//! log-singular parts on every segment.

use super::kernels::{
    kernel_difference, kernels, HypersingularDifference, KernelSet, SingleLayer,
    SingleLayerDifference, SplitKernel,
};
use super::mesh::{grading, log_weights, BoundaryMesh, MeshOptions, SegmentMesh};
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point2, RegionLabel};
use crate::medium::{IncidentField, Medium, RegionId};
use crate::quadrature::{gauss_legendre_on, integrate_best_effort, AdaptiveOptions};
use lax::{layout::MatrixLayout, Lapack, NormType, Transpose};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative residual above which the result is flagged non-converged.
    pub tol: f64,
    /// Condition estimate above which the result is flagged.
    pub condition_limit: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            condition_limit: 1e12,
        }
    }
}

/// Nodal densities on one segment.
#[derive(Debug, Clone)]
pub struct SegmentDensity {
    pub phi: Vec<Complex64>,
    pub psi: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub mesh: BoundaryMesh,
    pub densities: Vec<SegmentDensity>,
    /// `||A x - b|| / ||b||` (or `||A x||` when `b = 0`).
    pub residual: f64,
    /// 1-norm condition estimate.
    pub condition: f64,
    pub converged: bool,
    pub ill_conditioned: bool,
    /// Region wavenumbers, index 0 is the exterior.
    pub wavenumbers: Vec<Complex64>,
    pub k: f64,
}

/// Dense column-major complex matrix.
struct Dense {
    n: usize,
    data: Vec<Complex64>,
}

impl Dense {
    fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![ZERO; n * n],
        }
    }
    #[inline]
    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.n + i] += v;
    }
    fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        for j in 0..self.n {
            let xj = x[j];
            let col = &self.data[j * self.n..(j + 1) * self.n];
            for (yi, a) in y.iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
        y
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Coefficients of a region representation on source node `j`:
/// `R = cs * (S-kernel) + cd * (D-kernel)` acting on `(phi_j, psi_j)`.
/// Returned as the contributions to the A-row (value) and B-row (normal derivative).
#[derive(Default, Clone, Copy)]
struct RowContribution {
    a_phi: Complex64,
    a_psi: Complex64,
    b_phi: Complex64,
    b_psi: Complex64,
}

/// Field value and normal-derivative contributions of the representation of
/// the region(s) shared by the target and a source segment, per unit density.
fn cross_contribution(
    target_regions: (RegionId, RegionId),
    src: &SegmentMesh,
    wavenumbers: &[Complex64],
    x: Point2,
    nx: Point2,
    j: usize,
) -> RowContribution {
    let y = src.points[j];
    let ny = src.normal;
    let lam = src.segment.lambda;
    let (ti, to) = target_regions;
    let borders = |u: RegionId| u == ti || u == to;
    let inner_shared = borders(src.segment.inner);
    let outer_shared = borders(src.segment.outer);
    let mut c = RowContribution::default();
    match (inner_shared, outer_shared) {
        (true, true) => {
            // R_I + R_O = -(S_O - S_I) psi + (D_O - D_I) phi + lambda S_O phi
            let a = wavenumbers[src.segment.outer];
            let b = wavenumbers[src.segment.inner];
            let kd = kernel_difference(a, b, x, y, nx, ny);
            let ko = kernels(a, x, y, nx, ny);
            c.a_phi = kd.d + lam * ko.s;
            c.a_psi = -kd.s;
            c.b_phi = kd.t + lam * ko.kp;
            c.b_psi = -kd.kp;
        }
        (true, false) => {
            let k = kernels(wavenumbers[src.segment.inner], x, y, nx, ny);
            inner_terms(&mut c, &k);
        }
        (false, true) => {
            let k = kernels(wavenumbers[src.segment.outer], x, y, nx, ny);
            outer_terms(&mut c, &k, lam);
        }
        (false, false) => {}
    }
    c
}

fn inner_terms(c: &mut RowContribution, k: &KernelSet) {
    // R = S psi - D phi
    c.a_phi = -k.d;
    c.a_psi = k.s;
    c.b_phi = -k.t;
    c.b_psi = k.kp;
}

fn outer_terms(c: &mut RowContribution, k: &KernelSet, lam: Complex64) {
    // R = -S psi + lambda S phi + D phi
    c.a_phi = k.d + lam * k.s;
    c.a_psi = -k.s;
    c.b_phi = k.t + lam * k.kp;
    c.b_psi = -k.kp;
}

/// Log-split Nyström matrix of a straight-segment kernel, scaled by `scale`,
/// added into `dst(i, j)` at the given offsets.
fn add_split_block<K: SplitKernel>(
    dst: &mut Dense,
    row0: usize,
    col0: usize,
    seg: &SegmentMesh,
    kernel: &K,
    scale: Complex64,
    rw: &[f64],
) {
    let n = seg.len();
    let h = 2.0 * PI / n as f64;
    let (a0, b0) = kernel.at_zero();
    for i in 0..n {
        for j in 0..n {
            let sp = seg.speed[j];
            let (m1, m2) = if i == j {
                (a0 * (0.5 * sp), (a0 * sp.ln() + b0) * sp)
            } else {
                let r = seg.node_distance(i, j);
                let (a, b) = kernel.split(r);
                let half = 0.5 * (seg.params[i] - seg.params[j]);
                let four_sin2 = 4.0 * half.sin().powi(2);
                let m2 = (a * (0.5 * (r * r / four_sin2).ln()) + b) * sp;
                (a * (0.5 * sp), m2)
            };
            let k = (i + n - j) % n;
            dst.add(row0 + i, col0 + j, (m1 * rw[k] + m2 * h) * scale);
        }
    }
}

fn region_wavenumbers(medium: &Medium) -> Vec<Complex64> {
    (0..=medium.region_count())
        .map(|r| medium.region_wavenumber(r))
        .collect()
}

/// Solve the transmission problem on the given mesh.
pub fn solve_scatter(
    medium: &Medium,
    inc: &IncidentField,
    mesh: &BoundaryMesh,
    opts: SolverOptions,
) -> Result<SolveResult> {
    medium.validate()?;
    inc.validate_against(medium)?;
    let k = medium.k();
    let wn = region_wavenumbers(medium);
    let segs = &mesh.segments;
    let mut offsets = Vec::with_capacity(segs.len());
    let mut acc = 0;
    for s in segs {
        offsets.push(acc);
        acc += 2 * s.len();
    }
    let nu = acc;
    let mut a = Dense::zeros(nu);
    let mut rhs = vec![ZERO; nu];

    let mut rw_cache: Vec<(usize, Vec<f64>)> = Vec::new();
    for (e, seg) in segs.iter().enumerate() {
        let n = seg.len();
        let off = offsets[e];
        let (row_a, row_b) = (off, off + n);
        let (col_phi, col_psi) = (off, off + n);
        let outer = wn[seg.segment.outer];
        let inner = wn[seg.segment.inner];
        let lam = seg.segment.lambda;

        let rw = match rw_cache.iter().find(|(m, _)| *m == n) {
            Some((_, w)) => w.clone(),
            None => {
                let w = log_weights(n);
                rw_cache.push((n, w.clone()));
                w
            }
        };

        // Self block.
        for i in 0..n {
            a.add(row_a + i, col_phi + i, Complex64::new(1.0, 0.0));
            a.add(row_b + i, col_psi + i, Complex64::new(1.0, 0.0));
            a.add(row_b + i, col_phi + i, -lam * 0.5);
        }
        if lam != ZERO {
            add_split_block(&mut a, row_a, col_phi, seg, &SingleLayer(outer), -lam, &rw);
        }
        if outer != inner {
            add_split_block(
                &mut a,
                row_a,
                col_psi,
                seg,
                &SingleLayerDifference(outer, inner),
                Complex64::new(1.0, 0.0),
                &rw,
            );
            add_split_block(
                &mut a,
                row_b,
                col_phi,
                seg,
                &HypersingularDifference(outer, inner),
                Complex64::new(-1.0, 0.0),
                &rw,
            );
        }

        // Cross blocks.
        let regions = (seg.segment.inner, seg.segment.outer);
        for (f, src) in segs.iter().enumerate() {
            if f == e {
                continue;
            }
            let shares = [src.segment.inner, src.segment.outer]
                .iter()
                .any(|&u| u == regions.0 || u == regions.1);
            if !shares {
                continue;
            }
            let m = src.len();
            let (sc_phi, sc_psi) = (offsets[f], offsets[f] + m);
            for i in 0..n {
                let x = seg.points[i];
                for j in 0..m {
                    let c = cross_contribution(regions, src, &wn, x, seg.normal, j);
                    let w = src.weight(j);
                    a.add(row_a + i, sc_phi + j, -c.a_phi * w);
                    a.add(row_a + i, sc_psi + j, -c.a_psi * w);
                    a.add(row_b + i, sc_phi + j, -c.b_phi * w);
                    a.add(row_b + i, sc_psi + j, -c.b_psi * w);
                }
            }
        }

        if seg.segment.outer == 0 {
            for i in 0..n {
                let (u, g) = inc.eval(k, seg.points[i])?;
                rhs[row_a + i] = u;
                rhs[row_b + i] = g[0] * seg.normal.x + g[1] * seg.normal.y;
            }
        }
    }

    let layout = MatrixLayout::F {
        col: nu as i32,
        lda: nu as i32,
    };
    let anorm = Complex64::opnorm(NormType::One, layout, &a.data);
    let mut lu = a.data.clone();
    let pivot = Complex64::lu(layout, &mut lu).map_err(|e| Error::LinearSolve(e.to_string()))?;
    let rcond =
        Complex64::rcond(layout, &lu, anorm).map_err(|e| Error::LinearSolve(e.to_string()))?;
    let mut x = rhs.clone();
    Complex64::solve(layout, Transpose::No, &lu, &pivot, &mut x)
        .map_err(|e| Error::LinearSolve(e.to_string()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::LinearSolve("non-finite solution".into()));
    }
    let ax = a.matvec(&x);
    let diff: Vec<Complex64> = ax.iter().zip(&rhs).map(|(p, q)| p - q).collect();
    let bnorm = norm2(&rhs);
    let residual = if bnorm > 0.0 {
        norm2(&diff) / bnorm
    } else {
        norm2(&diff)
    };
    let condition = if rcond > 0.0 {
        1.0 / rcond
    } else {
        f64::INFINITY
    };

    let densities = segs
        .iter()
        .zip(&offsets)
        .map(|(s, &off)| SegmentDensity {
            phi: x[off..off + s.len()].to_vec(),
            psi: x[off + s.len()..off + 2 * s.len()].to_vec(),
        })
        .collect();
    Ok(SolveResult {
        mesh: mesh.clone(),
        densities,
        residual,
        condition,
        converged: residual <= opts.tol,
        ill_conditioned: condition > opts.condition_limit,
        wavenumbers: wn,
        k,
    })
}

/// Builds the mesh and solves.
pub fn solve_with_mesh_options(
    medium: &Medium,
    inc: &IncidentField,
    mesh_opts: MeshOptions,
    opts: SolverOptions,
) -> Result<SolveResult> {
    let mesh = BoundaryMesh::build(medium, mesh_opts)?;
    solve_scatter(medium, inc, &mesh, opts)
}

/// Incident value and normal derivative at node `j` of an exterior segment.
fn incident_cauchy(
    inc: &IncidentField,
    k: f64,
    seg: &SegmentMesh,
    j: usize,
) -> Result<(Complex64, Complex64)> {
    let (u, g) = inc.eval(k, seg.points[j])?;
    Ok((u, g[0] * seg.normal.x + g[1] * seg.normal.y))
}

/// Per-node layer densities of one segment as seen from one region:
/// the region's field gets `sum_j w_j (S a_j + D b_j)`.
fn layer_densities(
    inc: &IncidentField,
    k: f64,
    seg: &SegmentMesh,
    dens: &SegmentDensity,
    region: RegionId,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let lam = seg.segment.lambda;
    let n = seg.len();
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let (phi, psi) = (dens.phi[j], dens.psi[j]);
        if seg.segment.inner == region {
            a.push(psi);
            b.push(-phi);
        } else {
            let (mut phi, mut psi_out) = (phi, psi - lam * phi);
            if region == 0 {
                let (ui, dui) = incident_cauchy(inc, k, seg, j)?;
                phi -= ui;
                psi_out -= dui;
            }
            a.push(-psi_out);
            b.push(phi);
        }
    }
    Ok((a, b))
}

/// Lagrange interpolation of `speed * density` in the mesh parameter, with
/// the zeros at both segment ends added as nodes.
struct ParamInterpolant {
    s: Vec<f64>,
    g: Vec<Complex64>,
}

const STENCIL: usize = 12;

impl ParamInterpolant {
    fn new(seg: &SegmentMesh, vals: &[Complex64]) -> Self {
        let mut s = vec![0.0];
        let mut g = vec![ZERO];
        for j in 0..seg.len() {
            s.push(seg.params[j]);
            g.push(vals[j] * seg.speed[j]);
        }
        s.push(2.0 * PI);
        g.push(ZERO);
        ParamInterpolant { s, g }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let m = self.s.len();
        // Coarse meshes have fewer points than the stencil.
        let width = STENCIL.min(m);
        let pos = self.s.partition_point(|&v| v < t);
        let lo = pos.saturating_sub(width / 2).min(m - width);
        let mut acc = ZERO;
        for i in lo..lo + width {
            let mut l = 1.0;
            for j in lo..lo + width {
                if j != i {
                    l *= (t - self.s[j]) / (self.s[i] - self.s[j]);
                }
            }
            acc += self.g[i] * l;
        }
        acc
    }
}

/// Parameter of the point of `seg` closest to `x`.
fn closest_param(seg: &SegmentMesh, x: Point2, p: f64) -> f64 {
    let d = seg.segment.end - seg.segment.start;
    let f = ((x - seg.segment.start).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0, 2.0 * PI);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if grading(mid, p).0 / (2.0 * PI) < f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive evaluation of one segment's layer potentials at a target close
/// to it, where the nodal rule loses accuracy.
fn near_segment_field(
    kappa: Complex64,
    x: Point2,
    seg: &SegmentMesh,
    a: &[Complex64],
    b: &[Complex64],
    grading_p: f64,
) -> Complex64 {
    let ia = ParamInterpolant::new(seg, a);
    let ib = ParamInterpolant::new(seg, b);
    let dir = seg.segment.end - seg.segment.start;
    let zero_n = Point2::new(0.0, 0.0);
    let mut f = |t: f64| {
        let y = seg.segment.start + dir.scale(grading(t, grading_p).0 / (2.0 * PI));
        let kv = kernels(kappa, x, y, zero_n, seg.normal);
        kv.s * ia.eval(t) + kv.d * ib.eval(t)
    };
    let t0 = closest_param(seg, x, grading_p);
    let mut breaks = vec![0.0];
    for &t in &[t0 - 0.1, t0, t0 + 0.1] {
        if t > 1e-9 && t < 2.0 * PI - 1e-9 {
            breaks.push(t);
        }
    }
    breaks.push(2.0 * PI);
    let opts = AdaptiveOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    integrate_best_effort(&mut f, &breaks, opts).value
}

/// Composite Gauss rule over the mesh cells with interpolated densities; the
/// nodal rule alone is only fourth-order accurate for smooth integrands.
fn refined_segment_field(
    kappa: Complex64,
    x: Point2,
    seg: &SegmentMesh,
    a: &[Complex64],
    b: &[Complex64],
    grading_p: f64,
) -> Complex64 {
    let ia = ParamInterpolant::new(seg, a);
    let ib = ParamInterpolant::new(seg, b);
    let dir = seg.segment.end - seg.segment.start;
    let zero_n = Point2::new(0.0, 0.0);
    let n = seg.len();
    let h = 2.0 * PI / n as f64;
    let mut acc = ZERO;
    for cell in 0..n {
        for (t, w) in gauss_legendre_on(CELL_POINTS, cell as f64 * h, (cell + 1) as f64 * h) {
            let y = seg.segment.start + dir.scale(grading(t, grading_p).0 / (2.0 * PI));
            let kv = kernels(kappa, x, y, zero_n, seg.normal);
            acc += (kv.s * ia.eval(t) + kv.d * ib.eval(t)) * w;
        }
    }
    acc
}

const CELL_POINTS: usize = 4;

/// Total field at a point off the interfaces.
///
/// Densities are interpolated in the mesh parameter; targets within a few
/// node spacings of a segment integrate that segment adaptively.
pub fn total_field_at(
    medium: &Medium,
    inc: &IncidentField,
    sr: &SolveResult,
    x: Point2,
) -> Result<Complex64> {
    let region = match medium.locate(x) {
        RegionLabel::OnInterface(_) => return Err(Error::OnInterface { x: x.x, y: x.y }),
        RegionLabel::Exterior => 0,
        RegionLabel::Region(l) => l,
    };
    let kappa = sr.wavenumbers[region];
    let mut u = ZERO;
    if region == 0 {
        u += inc.eval(sr.k, x)?.0;
    }
    for (seg, dens) in sr.mesh.segments.iter().zip(&sr.densities) {
        if seg.segment.inner != region && seg.segment.outer != region {
            continue;
        }
        let (a, b) = layer_densities(inc, sr.k, seg, dens, region)?;
        let spacing = (0..seg.len()).map(|j| seg.weight(j)).fold(0.0, f64::max);
        let dist = point_segment_distance(x, seg.segment.start, seg.segment.end);
        let p = sr.mesh.options.grading;
        u += if dist < NEAR_FACTOR * spacing {
            near_segment_field(kappa, x, seg, &a, &b, p)
        } else {
            refined_segment_field(kappa, x, seg, &a, &b, p)
        };
    }
    Ok(u)
}

/// Targets closer than this many maximal node spacings take the near route.
const NEAR_FACTOR: f64 = 5.0;

/// Far-field amplitude `u^inf(xhat)` at angle `theta`.
pub fn far_field_at(inc: &IncidentField, sr: &SolveResult, theta: f64) -> Result<Complex64> {
    let k = sr.k;
    let xh = Point2::from_polar(1.0, theta);
    let gamma = Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt();
    let mut acc = ZERO;
    for (seg, dens) in sr.mesh.segments.iter().zip(&sr.densities) {
        if seg.segment.outer != 0 {
            continue;
        }
        let lam = seg.segment.lambda;
        let nd = xh.dot(seg.normal);
        for j in 0..seg.len() {
            let y = seg.points[j];
            let e = Complex64::from_polar(1.0, -k * xh.dot(y));
            let (ui, dui) = incident_cauchy(inc, k, seg, j)?;
            let phi = dens.phi[j] - ui;
            let psi_out = dens.psi[j] - lam * dens.phi[j] - dui;
            let de = Complex64::new(0.0, -k * nd) * e;
            acc += (de * phi - e * psi_out) * seg.weight(j);
        }
    }
    Ok(gamma * acc)
}
