//! Corner probe: the CGO integral identity on a truncated corner sector
//! `S_h` and the large-`s` extraction of the conductive difference
//! `eta1 - eta2` and the potential difference `omega2 - omega1`.
//!
//! Fields are given in sector-local coordinates (apex at the origin, the
//! sector opening over `(theta_m, theta_max)`). With `v = u1 - u2`,
//! `F_j = Δu_j + k² ω_j u_j` (zero for exact solutions) and exact jumps
//! `v = 0`, `∂_ν v = (eta1 - eta2) u2` on both edges, Green's formula gives
//!
//! `k² (ω2 - ω1) A2 = k² ω1 V + (eta1 - eta2) E2 + I1 - D`
//!
//! where `A2 = ∫_{S_h} u2 u0`, `V = ∫_{S_h} v u0`, `E2 = ∫_{Γ±} u2 u0`,
//! `D = ∫_{S_h} (F1 - F2) u0` and `u0 = u0(s x)`.

use crate::cgo::{
    edge_integral_exact, edge_integral_leading, mu, omega_w, polar_integral, radial_breaks,
    sector_integral_exact, tail_bound, tail_bound_valid, tail_complex_quad, u0_polar,
    weighted_bound, PolarOptions, SectorSpec, POLAR_BUDGET,
};
use crate::error::{Error, Result};
use crate::geometry::{CornerSector, Point2, Polygon};
use crate::quadrature::{integrate_best_effort, AdaptiveOptions, Estimate};
use crate::richardson::{extrapolate_in_inverse_s, extrapolate_to_zero, Extrapolation};
use crate::special::{bessel_j_orders, derivative_from_orders};
use lax::{layout::MatrixLayout, Lapack};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hölder exponent and constant of a field, used only to report bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub constant: f64,
}

/// A field on the closed sector, in sector-local coordinates.
pub trait FieldSampler: Send + Sync {
    /// Value and gradient at `x`.
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]);

    /// `Δu + k² ω u` for the field's own equation; zero for exact solutions.
    fn defect(&self, _x: Point2) -> Complex64 {
        ZERO
    }

    /// Whether [`FieldSampler::defect`] can be nonzero.
    fn has_defect(&self) -> bool {
        false
    }

    fn holder(&self) -> Option<HolderEstimate> {
        None
    }

    /// Bound on the absolute rounding error of the value and gradient
    /// components within `radius` of the apex.
    fn roundoff(&self, _radius: f64) -> f64 {
        0.0
    }
}

fn value_at(f: &dyn FieldSampler, x: Point2) -> Complex64 {
    f.eval(x).0
}

/// `a - b`, including defects.
pub struct Difference<'a> {
    pub a: &'a dyn FieldSampler,
    pub b: &'a dyn FieldSampler,
}

impl FieldSampler for Difference<'_> {
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]) {
        let (va, ga) = self.a.eval(x);
        let (vb, gb) = self.b.eval(x);
        (va - vb, [ga[0] - gb[0], ga[1] - gb[1]])
    }
    fn defect(&self, x: Point2) -> Complex64 {
        self.a.defect(x) - self.b.defect(x)
    }
    fn has_defect(&self) -> bool {
        self.a.has_defect() || self.b.has_defect()
    }
    fn roundoff(&self, radius: f64) -> f64 {
        self.a.roundoff(radius) + self.b.roundoff(radius)
    }
}

/// Sum of plane waves `sum_j c_j exp(i kappa d_j · x)`.
#[derive(Debug, Clone)]
pub struct PlaneWaveSum {
    pub kappa: Complex64,
    pub terms: Vec<(Complex64, Point2)>,
}

impl FieldSampler for PlaneWaveSum {
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]) {
        let ik = Complex64::i() * self.kappa;
        let mut u = ZERO;
        let mut g = [ZERO, ZERO];
        for &(c, d) in &self.terms {
            let e = c * (ik * d.dot(x)).exp();
            u += e;
            g[0] += ik * d.x * e;
            g[1] += ik * d.y * e;
        }
        (u, g)
    }
}

/// Fourier–Bessel series `sum_n c_n J_n(kappa r) e^{i n theta}`, an exact
/// solution of `Δu + kappa² u = 0`.
#[derive(Debug, Clone)]
pub struct BesselModes {
    pub kappa: Complex64,
    /// `(n, c_n)` pairs.
    pub modes: Vec<(i32, Complex64)>,
}

impl BesselModes {
    fn max_order(&self) -> usize {
        self.modes
            .iter()
            .map(|m| m.0.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// `J_n` and `J_n'` at `z` for signed `n`, from nonnegative orders.
fn signed_j(jv: &[Complex64], n: i32) -> (Complex64, Complex64) {
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    (jv[m] * sign, derivative_from_orders(jv, m) * sign)
}

impl FieldSampler for BesselModes {
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]) {
        let r = x.norm();
        if r == 0.0 {
            let mut u = ZERO;
            let mut g = [ZERO, ZERO];
            let half = self.kappa * 0.5;
            for &(n, c) in &self.modes {
                match n {
                    0 => u += c,
                    1 => {
                        g[0] += c * half;
                        g[1] += c * half * Complex64::i();
                    }
                    -1 => {
                        g[0] -= c * half;
                        g[1] += c * half * Complex64::i();
                    }
                    _ => {}
                }
            }
            return (u, g);
        }
        let theta = x.arg();
        let jv = bessel_j_orders(self.max_order() + 1, self.kappa * r);
        let mut u = ZERO;
        let mut dr = ZERO;
        let mut dt = ZERO;
        for &(n, c) in &self.modes {
            let (j, dj) = signed_j(&jv, n);
            let e = Complex64::from_polar(1.0, n as f64 * theta);
            u += c * j * e;
            dr += c * self.kappa * dj * e;
            dt += c * j * e * Complex64::new(0.0, n as f64 / r);
        }
        let (ct, st) = (theta.cos(), theta.sin());
        (u, [dr * ct - dt * st, dr * st + dt * ct])
    }

    // Summation error: eps times the sum of term magnitudes, with a factor
    // for the derivative terms.
    fn roundoff(&self, radius: f64) -> f64 {
        let nmax = self.max_order();
        let mut peak = vec![0.0f64; nmax + 2];
        for j in 1..=32 {
            let jv = bessel_j_orders(nmax + 1, self.kappa * (radius * j as f64 / 32.0));
            for (p, v) in peak.iter_mut().zip(&jv) {
                *p = p.max(v.norm());
            }
        }
        let sum: f64 = self
            .modes
            .iter()
            .map(|&(n, c)| {
                let m = n.unsigned_abs() as usize;
                c.norm()
                    * peak[m]
                        .max(peak[m + 1])
                        .max(if m > 0 { peak[m - 1] } else { 0.0 })
                    * (1.0 + m as f64)
            })
            .sum();
        16.0 * f64::EPSILON * sum * (1.0 + self.kappa.norm())
    }
}

/// `phi(x) = r g(theta)` with `g = -(theta - theta_m)(theta_max - theta)/Θ`:
/// zero on both edges with outward normal derivative 1 on each.
#[derive(Debug, Clone, Copy)]
struct EdgeLift {
    theta_m: f64,
    theta_max: f64,
}

impl EdgeLift {
    fn opening(&self) -> f64 {
        self.theta_max - self.theta_m
    }
    /// `(phi, grad phi, Δphi)` at `x != 0`.
    fn eval(&self, x: Point2) -> (f64, [f64; 2], f64) {
        let r = x.norm();
        let th = x.arg();
        let w = self.opening();
        let g = -(th - self.theta_m) * (self.theta_max - th) / w;
        let dg = -((self.theta_max - th) - (th - self.theta_m)) / w;
        let d2g = 2.0 / w;
        let (ct, st) = (th.cos(), th.sin());
        let grad = [g * ct - dg * st, g * st + dg * ct];
        (r * g, grad, (g + d2g) / r)
    }
}

/// `B (1 + beta phi)` for a base field `B` with `ΔB = -base_k2 B`. It
/// matches `B` on both edges, its outward normal derivative exceeds that of
/// `B` by `beta B`, and its defect relative to `Δu + target_k2 u` is known
/// in closed form.
pub struct LiftedField<B: FieldSampler> {
    pub base: B,
    pub base_k2: Complex64,
    pub target_k2: Complex64,
    pub beta: Complex64,
    lift: EdgeLift,
}

impl<B: FieldSampler> LiftedField<B> {
    pub fn new(
        base: B,
        base_k2: Complex64,
        target_k2: Complex64,
        beta: Complex64,
        sector: &CornerSector,
    ) -> Self {
        LiftedField {
            base,
            base_k2,
            target_k2,
            beta,
            lift: EdgeLift {
                theta_m: sector.theta_m,
                theta_max: sector.theta_max,
            },
        }
    }
}

impl<B: FieldSampler> FieldSampler for LiftedField<B> {
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]) {
        let (b, gb) = self.base.eval(x);
        if x.norm() == 0.0 {
            return (b, gb);
        }
        let (phi, gphi, _) = self.lift.eval(x);
        let f = Complex64::new(1.0, 0.0) + self.beta * phi;
        (
            b * f,
            [
                gb[0] * f + self.beta * b * gphi[0],
                gb[1] * f + self.beta * b * gphi[1],
            ],
        )
    }
    fn defect(&self, x: Point2) -> Complex64 {
        let (b, gb) = self.base.eval(x);
        let (phi, gphi, lap) = self.lift.eval(x);
        let f = Complex64::new(1.0, 0.0) + self.beta * phi;
        (self.target_k2 - self.base_k2) * b * f
            + self.beta * 2.0 * (gb[0] * gphi[0] + gb[1] * gphi[1])
            + self.beta * b * lap
            + self.base.defect(x) * f
    }
    fn has_defect(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Functionals

/// Quadrature controls. Every functional at parameter `s` is integrated to
/// absolute tolerance `tol * s^-2`, the natural size of the area terms.
#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub tol: f64,
    pub mode: CorrectionMode,
    /// Smallest admissible `|u(0)|` in the extraction denominators.
    pub apex_threshold: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            tol: 1e-8,
            mode: CorrectionMode::Full,
            apex_threshold: 1e-8,
        }
    }
}

impl ProbeOptions {
    pub fn abs_tol(&self, s: f64) -> f64 {
        self.tol / (s * s)
    }
}

/// Whether the exponential corrections `e^{-sqrt(s h) mu}` of the edge
/// integrals are kept in the extraction denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    Full,
    LeadingOrder,
}

fn spec_of(sector: &CornerSector) -> Result<SectorSpec> {
    sector.check()?;
    SectorSpec::new(sector.theta_m, sector.theta_max)
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("s = {s} must be positive")));
    }
    Ok(())
}

/// Strict functionals fail when the error estimate exceeds the tolerance;
/// best-effort ones only when it is not finite, and carry the achieved
/// error forward into the probe residuals.
#[derive(Debug, Clone, Copy)]
enum Check {
    Strict,
    /// Carries the sampler's roundoff bound.
    BestEffort(f64),
}

impl Check {
    // Best-effort budgets bound the work spent on integrands whose roundoff
    // exceeds the requested tolerance.
    fn polar_budget(self) -> usize {
        match self {
            Check::Strict => POLAR_BUDGET,
            Check::BestEffort(_) => 60,
        }
    }
    fn noise(self) -> f64 {
        match self {
            Check::Strict => 0.0,
            Check::BestEffort(e) => e,
        }
    }
    fn line_budget(self) -> usize {
        match self {
            Check::Strict => 2000,
            Check::BestEffort(_) => 300,
        }
    }
}

/// `floor` is the integrand roundoff propagated through the integral; it
/// bounds the reported error from below.
fn guard(est: Estimate, tol: f64, floor: f64, check: Check) -> Result<Estimate> {
    match check {
        Check::Strict => checked(est, tol),
        Check::BestEffort(_) if est.error.is_finite() && est.value.is_finite() => Ok(Estimate {
            value: est.value,
            error: est.error.max(floor),
        }),
        Check::BestEffort(_) => Err(Error::Quadrature {
            tol,
            estimate: est.error,
        }),
    }
}

fn checked(est: Estimate, tol: f64) -> Result<Estimate> {
    if !(est.error <= tol) {
        return Err(Error::Quadrature {
            tol,
            estimate: est.error,
        });
    }
    Ok(est)
}

fn t_scale(spec: &SectorSpec, s: f64) -> f64 {
    1.0 / (s.sqrt() * spec.delta_w())
}

/// `∫_{S_h} f(x) u0(s x) dx` by polar quadrature in `t = sqrt(r)`.
fn area_integral<F: Fn(Point2) -> Complex64>(
    sector: &CornerSector,
    s: f64,
    tol: f64,
    check: Check,
    f: F,
) -> Result<Estimate> {
    let spec = spec_of(sector)?;
    check_s(s)?;
    let floor = check.noise() * weighted_bound(&spec, 0.0, s);
    let tol = tol.max(floor);
    let est = polar_integral(
        |r, th| f(Point2::from_polar(r, th)) * u0_polar(r, th, s),
        sector.theta_m,
        sector.theta_max,
        0.0,
        sector.h,
        t_scale(&spec, s),
        PolarOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            budget: check.polar_budget(),
        },
    );
    guard(est, tol, floor, check)
}

/// `∫_0^h f(r e_theta) u0(s r e_theta) dr` in `t = sqrt(r)`.
fn edge_integral<F: Fn(Point2) -> Complex64>(
    theta: f64,
    h: f64,
    s: f64,
    tol: f64,
    check: Check,
    f: F,
) -> Result<Estimate> {
    check_s(s)?;
    let ts = 1.0 / (s.sqrt() * omega_w(theta));
    // ∫_0^∞ |u0(s r e_theta)| dr = 2 / (s omega(theta)²).
    let floor = check.noise() * 2.0 / (s * omega_w(theta).powi(2));
    let tol = tol.max(floor);
    let breaks = radial_breaks(0.0, h.sqrt(), ts);
    let dir = Point2::from_polar(1.0, theta);
    let est = integrate_best_effort(
        &mut |t: f64| {
            let r = t * t;
            f(dir.scale(r)) * u0_polar(r, theta, s) * (2.0 * t)
        },
        &breaks,
        AdaptiveOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: check.line_budget(),
        },
    );
    guard(est, tol, floor, check)
}

/// `I1 = ∫_{Λ_h} (∂_ν v u0(s x) - ∂_ν u0(s x) v) dσ` over the arc `r = h`.
pub fn eval_i1(v: &dyn FieldSampler, sector: &CornerSector, s: f64, tol: f64) -> Result<Estimate> {
    i1_with(v, sector, s, tol, Check::Strict)
}

fn i1_with(
    v: &dyn FieldSampler,
    sector: &CornerSector,
    s: f64,
    tol: f64,
    check: Check,
) -> Result<Estimate> {
    let spec = spec_of(sector)?;
    check_s(s)?;
    let h = sector.h;
    let floor = check.noise()
        * (1.0 + s.sqrt() / (2.0 * h.sqrt()))
        * h
        * spec.opening()
        * (-(s * h).sqrt() * spec.delta_w()).exp();
    let tol = tol.max(floor);
    let est = integrate_best_effort(
        &mut |th: f64| {
            let x = Point2::from_polar(h, th);
            let (val, g) = v.eval(x);
            let dnv = g[0] * th.cos() + g[1] * th.sin();
            let u0 = u0_polar(h, th, s);
            let dnu0 = -u0 * mu(th) * (s.sqrt() / (2.0 * h.sqrt()));
            (dnv * u0 - dnu0 * val) * h
        },
        &[sector.theta_m, sector.theta_max],
        AdaptiveOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: check.line_budget(),
        },
    );
    guard(est, tol, floor, check)
}

/// `I2 = ∫_{S_h} (v(x) - v(0)) u0(s x) dx`.
pub fn eval_i2(v: &dyn FieldSampler, sector: &CornerSector, s: f64, tol: f64) -> Result<Estimate> {
    centered_area(v, sector, s, tol, Check::Strict)
}

/// `∫_{S_h} (f(x) - f(0)) u0(s x) dx`.
fn centered_area(
    f: &dyn FieldSampler,
    sector: &CornerSector,
    s: f64,
    tol: f64,
    check: Check,
) -> Result<Estimate> {
    let f0 = value_at(f, Point2::new(0.0, 0.0));
    area_integral(sector, s, tol, check, |x| value_at(f, x) - f0)
}

/// Which edge of the sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `theta = theta_max`.
    Plus,
    /// `theta = theta_m`.
    Minus,
}

impl Side {
    fn angle(self, sector: &CornerSector) -> f64 {
        match self {
            Side::Plus => sector.theta_max,
            Side::Minus => sector.theta_m,
        }
    }
}

/// Edge functional split as `total = eta_diff (u2(0) I31 + I32)`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParts {
    pub total: Complex64,
    /// `∫_0^h u0(s x) dr`, in closed form.
    pub i31: Complex64,
    /// `∫_0^h (u2(x) - u2(0)) u0(s x) dr`.
    pub i32: Estimate,
}

pub fn eval_i3(
    u2: &dyn FieldSampler,
    sector: &CornerSector,
    s: f64,
    side: Side,
    eta_diff: Complex64,
    tol: f64,
) -> Result<EdgeParts> {
    i3_with(u2, sector, s, side, eta_diff, tol, Check::Strict)
}

fn i3_with(
    u2: &dyn FieldSampler,
    sector: &CornerSector,
    s: f64,
    side: Side,
    eta_diff: Complex64,
    tol: f64,
    check: Check,
) -> Result<EdgeParts> {
    spec_of(sector)?;
    let theta = side.angle(sector);
    let u20 = value_at(u2, Point2::new(0.0, 0.0));
    let i31 = edge_integral_exact(theta, s, sector.h);
    let i32 = edge_integral(theta, sector.h, s, tol, check, |x| value_at(u2, x) - u20)?;
    Ok(EdgeParts {
        total: eta_diff * (u20 * i31 + i32.value),
        i31,
        i32,
    })
}

/// The tail `I4 = ∫_{W \ B_h} u0(s x) dx`: published and provable bounds on
/// its modulus integral, and its complex value by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct TailReport {
    pub published_bound: f64,
    pub valid_bound: f64,
    pub value: Estimate,
}

pub fn eval_i4(sector: &CornerSector, s: f64, tol: f64) -> Result<TailReport> {
    i4_with(sector, s, tol, Check::Strict)
}

fn i4_with(sector: &CornerSector, s: f64, tol: f64, check: Check) -> Result<TailReport> {
    let spec = spec_of(sector)?;
    check_s(s)?;
    let value = guard(tail_complex_quad(&spec, s, sector.h, tol), tol, 0.0, check)?;
    Ok(TailReport {
        published_bound: tail_bound(&spec, s, sector.h),
        valid_bound: tail_bound_valid(&spec, s, sector.h),
        value,
    })
}

/// `I5 = ∫_{S_h} (u2(x) - u2(0)) u0(s x) dx`, with the weighted bound
/// `2 Θ Γ(2α+4)/δ_W^{2α+4} C_α s^{-α-2}` when the sampler reports a Hölder estimate.
pub fn eval_i5(
    u2: &dyn FieldSampler,
    sector: &CornerSector,
    s: f64,
    tol: f64,
) -> Result<(Estimate, Option<f64>)> {
    let spec = spec_of(sector)?;
    let est = centered_area(u2, sector, s, tol, Check::Strict)?;
    let bound = u2
        .holder()
        .map(|h| weighted_bound(&spec, h.alpha, s) * h.constant);
    Ok((est, bound))
}

// ---------------------------------------------------------------------------
// Scenario and extraction

/// Two interior fields at a corner with their medium parameters.
pub struct ProbeScenario<'a> {
    pub sector: CornerSector,
    pub k: Complex64,
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub u1: &'a dyn FieldSampler,
    pub u2: &'a dyn FieldSampler,
}

impl ProbeScenario<'_> {
    pub fn validate(&self) -> Result<()> {
        spec_of(&self.sector)?;
        if self.k == ZERO || !self.k.re.is_finite() || !self.k.im.is_finite() {
            return Err(Error::InvalidArgument("k must be nonzero".into()));
        }
        for (name, w) in [("omega1", self.omega1), ("omega2", self.omega2)] {
            if !(w.re > 0.0) {
                return Err(Error::InvalidMedium(format!(
                    "{name}: Re q must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn true_eta_diff(&self) -> Complex64 {
        self.eta1 - self.eta2
    }

    pub fn true_omega_diff(&self) -> Complex64 {
        self.omega2 - self.omega1
    }
}

/// All functionals of the identity at one `s`.
#[derive(Debug, Clone, Copy)]
pub struct Functionals {
    pub s: f64,
    pub u1_0: Complex64,
    pub u2_0: Complex64,
    pub v_0: Complex64,
    pub i1: Estimate,
    pub i2: Estimate,
    pub i31_plus: Complex64,
    pub i31_minus: Complex64,
    pub i32_plus: Estimate,
    pub i32_minus: Estimate,
    pub i4: TailReport,
    pub i5: Estimate,
    /// `∫_{S_h} (F1 - F2) u0`.
    pub defect: Estimate,
    /// `∫_W u0(s x) dx`.
    pub sector_exact: Complex64,
    pub k2: Complex64,
    pub omega1: Complex64,
}

impl Functionals {
    /// `∫_{S_h} u0(s x) dx`.
    pub fn truncated_sector(&self) -> Complex64 {
        self.sector_exact - self.i4.value.value
    }
    /// `A2 = ∫_{S_h} u2 u0`.
    pub fn a2(&self) -> Estimate {
        Estimate {
            value: self.u2_0 * self.truncated_sector() + self.i5.value,
            error: self.u2_0.norm() * self.i4.value.error + self.i5.error,
        }
    }
    /// `V = ∫_{S_h} v u0`.
    pub fn v_integral(&self) -> Estimate {
        Estimate {
            value: self.v_0 * self.truncated_sector() + self.i2.value,
            error: self.v_0.norm() * self.i4.value.error + self.i2.error,
        }
    }
    /// `E2 = ∫_{Γ±} u2 u0`; the leading-order variant drops the exponential
    /// corrections of the closed-form edge integrals.
    pub fn e2(&self, mode: CorrectionMode, sector: &CornerSector) -> Estimate {
        let i31 = match mode {
            CorrectionMode::Full => self.i31_plus + self.i31_minus,
            CorrectionMode::LeadingOrder => {
                edge_integral_leading(sector.theta_max, self.s)
                    + edge_integral_leading(sector.theta_m, self.s)
            }
        };
        Estimate {
            value: self.u2_0 * i31 + self.i32_plus.value + self.i32_minus.value,
            error: self.i32_plus.error + self.i32_minus.error,
        }
    }
    /// `A2` without the exponentially small tail `I4` in the leading-order mode.
    fn a2_mode(&self, mode: CorrectionMode) -> Estimate {
        match mode {
            CorrectionMode::Full => self.a2(),
            CorrectionMode::LeadingOrder => Estimate {
                value: self.u2_0 * self.sector_exact + self.i5.value,
                error: self.i5.error,
            },
        }
    }
}

/// Evaluates every functional of the identity at `s`.
pub fn probe_functionals(sc: &ProbeScenario, s: f64, opts: &ProbeOptions) -> Result<Functionals> {
    sc.validate()?;
    check_s(s)?;
    let tol = opts.abs_tol(s);
    let spec = spec_of(&sc.sector)?;
    let v = Difference { a: sc.u1, b: sc.u2 };
    let origin = Point2::new(0.0, 0.0);
    let u1_0 = value_at(sc.u1, origin);
    let u2_0 = value_at(sc.u2, origin);
    let be = Check::BestEffort(0.0);
    let bv = Check::BestEffort(v.roundoff(sc.sector.h));
    let b2 = Check::BestEffort(sc.u2.roundoff(sc.sector.h));
    let one = Complex64::new(1.0, 0.0);
    let plus = i3_with(sc.u2, &sc.sector, s, Side::Plus, one, tol, b2)?;
    let minus = i3_with(sc.u2, &sc.sector, s, Side::Minus, one, tol, b2)?;
    let defect = if v.has_defect() {
        area_integral(&sc.sector, s, tol, be, |x| v.defect(x))?
    } else {
        Estimate::zero()
    };
    Ok(Functionals {
        s,
        u1_0,
        u2_0,
        v_0: u1_0 - u2_0,
        i1: i1_with(&v, &sc.sector, s, tol, bv)?,
        i2: centered_area(&v, &sc.sector, s, tol, bv)?,
        i31_plus: plus.i31,
        i31_minus: minus.i31,
        i32_plus: plus.i32,
        i32_minus: minus.i32,
        i4: i4_with(&sc.sector, s, tol, be)?,
        i5: centered_area(sc.u2, &sc.sector, s, tol, b2)?,
        defect,
        sector_exact: sector_integral_exact(&spec, s),
        k2: sc.k * sc.k,
        omega1: sc.omega1,
    })
}

/// Which difference a [`ProbeResult`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `eta1 - eta2`.
    EtaDiff,
    /// `omega2 - omega1`.
    OmegaDiff,
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeSample {
    pub s: f64,
    pub estimate: Complex64,
    /// Quadrature error propagated through the estimator.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub quantity: Quantity,
    pub samples: Vec<ProbeSample>,
    /// Richardson extrapolation in `1/s` over all samples.
    pub extrapolated: Extrapolation,
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::InvalidArgument("empty s grid".into()));
    }
    for &s in s_grid {
        check_s(s)?;
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "s values must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_apex(value: Complex64, opts: &ProbeOptions) -> Result<()> {
    if !(value.norm() >= opts.apex_threshold) {
        return Err(Error::VanishingApexValue {
            value: value.norm(),
        });
    }
    Ok(())
}

/// `2 (mu(theta_max)^-2 + mu(theta_m)^-2)`: `s` times the leading edge term per unit `u2(0)`.
pub fn eta_denominator(sector: &CornerSector) -> Complex64 {
    (mu(sector.theta_max).powi(-2) + mu(sector.theta_m).powi(-2)) * 2.0
}

/// `6i (e^{-2i theta_max} - e^{-2i theta_m})`: `s²` times `∫_W u0`.
pub fn omega_denominator(sector: &CornerSector) -> Complex64 {
    let e = |t: f64| Complex64::from_polar(1.0, -2.0 * t);
    Complex64::new(0.0, 6.0) * (e(sector.theta_max) - e(sector.theta_m))
}

fn check_denominator(d: Complex64) -> Result<()> {
    if !(d.norm() >= 1e-12) {
        return Err(Error::DegenerateDenominator(d.norm()));
    }
    Ok(())
}

fn ratio(num: Estimate, den: Estimate) -> (Complex64, f64) {
    let q = num.value / den.value;
    (q, (num.error + q.norm() * den.error) / den.value.norm())
}

/// Per-`s` estimate of `eta1 - eta2`: `(D - k² ω1 V - I1) / E2`. The omitted
/// `k² (ω2 - ω1) A2 / E2` term is `O(1/s)` and removed by extrapolation.
pub fn eta_estimate(
    f: &Functionals,
    sector: &CornerSector,
    mode: CorrectionMode,
) -> (Complex64, f64) {
    let v = f.v_integral();
    let num = Estimate {
        value: f.defect.value - f.k2 * f.omega1 * v.value - f.i1.value,
        error: f.defect.error + (f.k2 * f.omega1).norm() * v.error + f.i1.error,
    };
    ratio(num, f.e2(mode, sector))
}

/// Per-`s` estimate of `omega2 - omega1` given `eta1 - eta2`:
/// `(k² ω1 V + eta_diff E2 + I1 - D) / (k² A2)`.
pub fn omega_estimate(
    f: &Functionals,
    sector: &CornerSector,
    eta_diff: Complex64,
    mode: CorrectionMode,
) -> (Complex64, f64) {
    let v = f.v_integral();
    let e2 = f.e2(mode, sector);
    let num = Estimate {
        value: f.k2 * f.omega1 * v.value + eta_diff * e2.value + f.i1.value - f.defect.value,
        error: (f.k2 * f.omega1).norm() * v.error
            + eta_diff.norm() * e2.error
            + f.i1.error
            + f.defect.error,
    };
    let a2 = f.a2_mode(mode);
    let den = Estimate {
        value: f.k2 * a2.value,
        error: f.k2.norm() * a2.error,
    };
    ratio(num, den)
}

fn finish(quantity: Quantity, samples: Vec<ProbeSample>) -> ProbeResult {
    let s: Vec<f64> = samples.iter().map(|p| p.s).collect();
    let v: Vec<Complex64> = samples.iter().map(|p| p.estimate).collect();
    ProbeResult {
        quantity,
        extrapolated: extrapolate_in_inverse_s(&s, &v),
        samples,
    }
}

fn eta_from(sc: &ProbeScenario, fs: &[Functionals], opts: &ProbeOptions) -> Result<ProbeResult> {
    check_apex(fs[0].u2_0, opts)?;
    check_denominator(eta_denominator(&sc.sector) * fs[0].u2_0)?;
    let samples = fs
        .iter()
        .map(|f| {
            let (estimate, residual) = eta_estimate(f, &sc.sector, opts.mode);
            ProbeSample {
                s: f.s,
                estimate,
                residual,
            }
        })
        .collect();
    Ok(finish(Quantity::EtaDiff, samples))
}

fn omega_from(
    sc: &ProbeScenario,
    fs: &[Functionals],
    eta_diff: Complex64,
    opts: &ProbeOptions,
) -> Result<ProbeResult> {
    check_apex(fs[0].u1_0, opts)?;
    check_apex(fs[0].u2_0, opts)?;
    check_denominator(omega_denominator(&sc.sector) * fs[0].u1_0 * fs[0].k2)?;
    let samples = fs
        .iter()
        .map(|f| {
            let (estimate, residual) = omega_estimate(f, &sc.sector, eta_diff, opts.mode);
            ProbeSample {
                s: f.s,
                estimate,
                residual,
            }
        })
        .collect();
    Ok(finish(Quantity::OmegaDiff, samples))
}

fn all_functionals(
    sc: &ProbeScenario,
    s_grid: &[f64],
    opts: &ProbeOptions,
) -> Result<Vec<Functionals>> {
    check_grid(s_grid)?;
    s_grid
        .iter()
        .map(|&s| probe_functionals(sc, s, opts))
        .collect()
}

/// Estimates `eta1 - eta2` on the `s` grid and extrapolates to `s = ∞`.
pub fn extract_eta_diff(
    sc: &ProbeScenario,
    s_grid: &[f64],
    opts: &ProbeOptions,
) -> Result<ProbeResult> {
    let fs = all_functionals(sc, s_grid, opts)?;
    eta_from(sc, &fs, opts)
}

/// Estimates `omega2 - omega1` on the `s` grid given `eta1 - eta2`.
pub fn extract_omega_diff(
    sc: &ProbeScenario,
    s_grid: &[f64],
    eta_diff: Complex64,
    opts: &ProbeOptions,
) -> Result<ProbeResult> {
    let fs = all_functionals(sc, s_grid, opts)?;
    omega_from(sc, &fs, eta_diff, opts)
}

/// Both extractions from one set of functionals; the `omega` step uses the
/// extrapolated `eta` estimate.
pub fn run_probe(
    sc: &ProbeScenario,
    s_grid: &[f64],
    opts: &ProbeOptions,
) -> Result<(ProbeResult, ProbeResult)> {
    let fs = all_functionals(sc, s_grid, opts)?;
    let eta = eta_from(sc, &fs, opts)?;
    let omega = omega_from(sc, &fs, eta.extrapolated.value, opts)?;
    Ok((eta, omega))
}

/// Balance of the identity at one `s`.
#[derive(Debug, Clone, Copy)]
pub struct ClosureReport {
    pub s: f64,
    /// `k² (ω2 - ω1) A2`.
    pub lhs: Complex64,
    /// `k² ω1 V + (eta1 - eta2) E2 + I1 - D`.
    pub rhs: Complex64,
    pub residual: f64,
    /// Absolute quadrature tolerance of each functional at this `s`.
    pub tolerance: f64,
}

/// Assembles both sides of the identity with the scenario's true parameter
/// differences.
pub fn identity_closure(sc: &ProbeScenario, s: f64, opts: &ProbeOptions) -> Result<ClosureReport> {
    let f = probe_functionals(sc, s, opts)?;
    let lhs = f.k2 * sc.true_omega_diff() * f.a2().value;
    let rhs = f.k2 * f.omega1 * f.v_integral().value
        + sc.true_eta_diff() * f.e2(CorrectionMode::Full, &sc.sector).value
        + f.i1.value
        - f.defect.value;
    Ok(ClosureReport {
        s,
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        tolerance: opts.abs_tol(s),
    })
}

// ---------------------------------------------------------------------------
// Manufactured pairs

/// Exact-jump pair: `u2` is a sum of plane waves solving `Δu + k² ω2 u = 0`
/// and `u1 = u2 (1 + (eta1 - eta2) phi)` matches it on both edges with the
/// prescribed normal-derivative jump. `u1` carries a known interior defect.
pub struct LiftedPair {
    pub u1: LiftedField<PlaneWaveSum>,
    pub u2: PlaneWaveSum,
}

impl LiftedPair {
    pub fn new(
        sector: &CornerSector,
        k: Complex64,
        omega1: Complex64,
        omega2: Complex64,
        eta_diff: Complex64,
    ) -> Self {
        let kappa2 = k * omega2.sqrt();
        let u2 = PlaneWaveSum {
            kappa: kappa2,
            terms: vec![
                (Complex64::new(1.0, 0.0), Point2::from_polar(1.0, 0.3)),
                (Complex64::new(0.5, 0.0), Point2::from_polar(1.0, 2.0)),
            ],
        };
        let u1 = LiftedField::new(
            u2.clone(),
            kappa2 * kappa2,
            k * k * omega1,
            eta_diff,
            sector,
        );
        LiftedPair { u1, u2 }
    }
}

/// Least-squares Fourier–Bessel pair: `u_j = sum_{|n| <= N} c_n^j J_n(k sqrt(ω_j) r) e^{i n theta}`
/// with `u2(0)` fixed and the remaining coefficients chosen to minimize the
/// weighted `L2` misfit of `v = 0` and `∂_ν v = (eta1 - eta2) u2` on both edges.
pub struct FourierBesselPair {
    pub u1: BesselModes,
    pub u2: BesselModes,
    /// `||misfit|| / ||data||` of the fit.
    pub relative_misfit: f64,
}

impl FourierBesselPair {
    pub fn fit(
        sector: &CornerSector,
        k: Complex64,
        omega1: Complex64,
        omega2: Complex64,
        eta_diff: Complex64,
        order: usize,
        apex_value: Complex64,
        regularization: f64,
    ) -> Result<Self> {
        spec_of(sector)?;
        if order == 0 {
            return Err(Error::InvalidArgument(
                "series order must be positive".into(),
            ));
        }
        let n = order as i32;
        let kappa1 = k * omega1.sqrt();
        let kappa2 = k * omega2.sqrt();
        let orders: Vec<i32> = (-n..=n).collect();
        let a_orders: Vec<i32> = orders.iter().copied().filter(|&m| m != 0).collect();
        let cols = orders.len() + a_orders.len();

        let nodes = 4 * order + 40;
        let (gx, gw) = crate::quadrature::gauss_legendre(nodes);
        let th_sqrt = sector.h.sqrt();
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        let mut rhs: Vec<Complex64> = Vec::new();
        for side in [Side::Plus, Side::Minus] {
            let theta = side.angle(sector);
            let sign = if side == Side::Plus { 1.0 } else { -1.0 };
            for (x, w) in gx.iter().zip(&gw) {
                // r = t², t uniform in Gauss nodes on [0, sqrt h]; dr = 2 t dt.
                let t = 0.5 * th_sqrt * (x + 1.0);
                let r = t * t;
                let weight = (0.5 * th_sqrt * w * 2.0 * t).sqrt();
                let j1 = bessel_j_orders(order + 1, kappa1 * r);
                let j2 = bessel_j_orders(order + 1, kappa2 * r);
                let mode = |jv: &[Complex64], m: i32| {
                    let (j, _) = signed_j(jv, m);
                    let e = Complex64::from_polar(1.0, m as f64 * theta);
                    // (value, outward normal derivative = sign (i m / r) value)
                    (j * e, j * e * Complex64::new(0.0, sign * m as f64 / r))
                };
                let mut row_v = vec![ZERO; cols];
                let mut row_n = vec![ZERO; cols];
                for (c, &m) in orders.iter().enumerate() {
                    let (b, db) = mode(&j1, m);
                    row_v[c] = b * weight;
                    row_n[c] = db * weight;
                }
                for (c, &m) in a_orders.iter().enumerate() {
                    let (a, da) = mode(&j2, m);
                    row_v[orders.len() + c] = -a * weight;
                    row_n[orders.len() + c] = -(da + eta_diff * a) * weight;
                }
                let (a0, _) = mode(&j2, 0);
                rows.push(row_v);
                rhs.push(apex_value * a0 * weight);
                rows.push(row_n);
                rhs.push(apex_value * eta_diff * a0 * weight);
            }
        }
        let m_fit = rows.len();
        let mut scale = vec![0.0; cols];
        for row in &rows {
            for (c, v) in row.iter().enumerate() {
                scale[c] += v.norm_sqr();
            }
        }
        for sc in scale.iter_mut() {
            *sc = if *sc > 0.0 { sc.sqrt() } else { 1.0 };
        }
        // Tikhonov rows on the column-normalized coefficients.
        let m_rows = m_fit + cols;
        let data: f64 = rhs.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
        let mut a = vec![ZERO; m_rows * cols];
        for (i, row) in rows.iter().enumerate() {
            for c in 0..cols {
                a[c * m_rows + i] = row[c] / scale[c];
            }
        }
        for c in 0..cols {
            a[c * m_rows + m_fit + c] = Complex64::new(regularization * data, 0.0);
        }
        let mut b = rhs.clone();
        b.resize(m_rows, ZERO);
        let layout = MatrixLayout::F {
            col: cols as i32,
            lda: m_rows as i32,
        };
        Complex64::least_squares(layout, &mut a, &mut b)
            .map_err(|e| Error::LinearSolve(e.to_string()))?;
        let coef: Vec<Complex64> = (0..cols).map(|c| b[c] / scale[c]).collect();

        let misfit: f64 = rows
            .iter()
            .zip(&rhs)
            .map(|(row, r)| {
                let fit: Complex64 = row.iter().zip(&coef).map(|(x, y)| x * y).sum();
                (fit - r).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();

        let u1 = BesselModes {
            kappa: kappa1,
            modes: orders
                .iter()
                .copied()
                .zip(coef[..orders.len()].iter().copied())
                .collect(),
        };
        let mut u2_modes = vec![(0, apex_value)];
        u2_modes.extend(
            a_orders
                .iter()
                .copied()
                .zip(coef[orders.len()..].iter().copied()),
        );
        Ok(FourierBesselPair {
            u1,
            u2: BesselModes {
                kappa: kappa2,
                modes: u2_modes,
            },
            relative_misfit: if data > 0.0 { misfit / data } else { misfit },
        })
    }
}

// ---------------------------------------------------------------------------
// Vertex values and admissibility

/// Value at a vertex by polynomial extrapolation of interior samples along
/// `direction` at distances `step * j`, `j = 1..=points`.
pub fn vertex_value_by_extrapolation<F>(
    field: F,
    apex: Point2,
    direction: Point2,
    step: f64,
    points: usize,
) -> Result<Extrapolation>
where
    F: Fn(Point2) -> Result<Complex64>,
{
    if points < 2 || !(step > 0.0) {
        return Err(Error::InvalidArgument(
            "need at least two samples and a positive step".into(),
        ));
    }
    let d = direction.scale(1.0 / direction.norm());
    let samples = (1..=points)
        .map(|j| {
            let t = step * j as f64;
            field(apex + d.scale(t)).map(|u| (t, u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(extrapolate_to_zero(&samples))
}

/// Unit vector from vertex `i` into the polygon along the interior bisector.
pub fn interior_bisector(poly: &Polygon, i: usize) -> Point2 {
    let v = poly.vertices();
    let n = v.len();
    let p = v[i];
    let a = v[(i + n - 1) % n] - p;
    let b = v[(i + 1) % n] - p;
    let a = a.scale(1.0 / a.norm());
    let b = b.scale(1.0 / b.norm());
    let sum = a + b;
    // Counterclockwise polygon: the interior lies to the left of each edge.
    let inward_normal = Point2::new(-b.y, b.x);
    let mut d = if sum.norm() < 1e-9 {
        inward_normal
    } else {
        sum.scale(1.0 / sum.norm())
    };
    if d.dot(inward_normal) < 0.0 {
        d = d.scale(-1.0);
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct VertexReport {
    pub vertex: usize,
    pub position: Point2,
    pub value: Complex64,
    pub extrapolation_error: f64,
    pub admissible: bool,
}

/// `|u(x_c)| > tau` at every vertex, with vertex values extrapolated along
/// the interior bisectors at steps of `step`.
pub fn admissibility_check<F>(
    field: F,
    poly: &Polygon,
    tau: f64,
    step: f64,
) -> Result<Vec<VertexReport>>
where
    F: Fn(Point2) -> Result<Complex64>,
{
    (0..poly.len())
        .map(|i| {
            let p = poly.vertices()[i];
            let e = vertex_value_by_extrapolation(&field, p, interior_bisector(poly, i), step, 4)?;
            Ok(VertexReport {
                vertex: i,
                position: p,
                value: e.value,
                extrapolation_error: e.error,
                admissible: e.value.norm() > tau,
            })
        })
        .collect()
}

/// Default threshold `1e-6 max |u|` over the circle of radius `2 diam`
/// about the polygon's centroid, sampled at `m` points.
pub fn admissibility_threshold<F>(field: F, poly: &Polygon, m: usize) -> Result<f64>
where
    F: Fn(Point2) -> Result<Complex64>,
{
    let c = poly.centroid();
    let r = 2.0 * poly.diameter();
    let mut max = 0.0f64;
    for j in 0..m.max(1) {
        let x = c + Point2::from_polar(r, 2.0 * PI * j as f64 / m.max(1) as f64);
        max = max.max(field(x)?.norm());
    }
    Ok(1e-6 * max)
}

// ---------------------------------------------------------------------------
// Vanishing test

/// Decay of the identity functional for a pair `(v, w)` with
/// `Δw + k² q w = 0`, `Δv + k² v = 0`, `w = v` and `∂_ν v + λ v = ∂_ν w` on
/// both edges.
#[derive(Debug, Clone)]
pub struct VanishingReport {
    /// `(s, Φ(s))`; `Φ(s) -> v(0)` as `s -> ∞`.
    pub samples: Vec<(f64, Complex64)>,
    /// Least-squares slope of `ln |Φ|` against `ln s`.
    pub slope: f64,
    pub extrapolated: Extrapolation,
}

/// Evaluates `Φ(s)`, normalized so that it tends to `v(0)`:
/// with `λ != 0`, `s (∫(G_w - G_v + k² v - k² q w) u0 - I1[w - v]) / (λ 2(mu_M^-2 + mu_m^-2))`;
/// with `λ = 0`, `s² (I1[w - v] - ∫(G_w - G_v) u0) / (k² (1 - q) 6i(e^{-2i theta_M} - e^{-2i theta_m}))`,
/// where `G` are the samplers' defects.
#[allow(clippy::too_many_arguments)]
pub fn vanishing_test(
    v: &dyn FieldSampler,
    w: &dyn FieldSampler,
    sector: &CornerSector,
    s_grid: &[f64],
    k: Complex64,
    q: Complex64,
    lambda: Complex64,
    opts: &ProbeOptions,
) -> Result<VanishingReport> {
    spec_of(sector)?;
    check_grid(s_grid)?;
    let k2 = k * k;
    let z = Difference { a: w, b: v };
    let lambda_case = lambda != ZERO;
    let den = if lambda_case {
        lambda * eta_denominator(sector)
    } else {
        k2 * (Complex64::new(1.0, 0.0) - q) * omega_denominator(sector)
    };
    check_denominator(den)?;
    let mut samples = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let tol = opts.abs_tol(s);
        let i1 = i1_with(&z, sector, s, tol, Check::BestEffort(z.roundoff(sector.h)))?.value;
        let defects = if z.has_defect() {
            area_integral(sector, s, tol, Check::BestEffort(0.0), |x| z.defect(x))?.value
        } else {
            ZERO
        };
        let phi = if lambda_case {
            let noise = k2.norm() * (v.roundoff(sector.h) + q.norm() * w.roundoff(sector.h));
            let vol = area_integral(sector, s, tol, Check::BestEffort(noise), |x| {
                k2 * (value_at(v, x) - q * value_at(w, x))
            })?
            .value;
            s * (defects + vol - i1) / den
        } else {
            s * s * (i1 - defects) / den
        };
        samples.push((s, phi));
    }
    let slope = loglog_slope(&samples);
    let s: Vec<f64> = samples.iter().map(|p| p.0).collect();
    let vals: Vec<Complex64> = samples.iter().map(|p| p.1).collect();
    Ok(VanishingReport {
        extrapolated: extrapolate_in_inverse_s(&s, &vals),
        samples,
        slope,
    })
}

/// Least-squares slope of `ln |y|` against `ln s`.
pub fn loglog_slope(samples: &[(f64, Complex64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|(s, y)| (s.ln(), y.norm().max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
