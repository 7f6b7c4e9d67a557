//! The CGO harmonic function `u0(x) = exp(-sqrt(r) e^{i theta/2})`, its
//! closed-form sector and edge integrals, decay bounds, and polar
//! quadratures that serve as independent checks of the closed forms.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::quadrature::{integrate_best_effort, AdaptiveOptions, Estimate};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Angular span of an infinite sector `W` with apex at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec {
    pub theta_m: f64,
    pub theta_max: f64,
}

impl SectorSpec {
    /// Requires `-pi < theta_m < theta_max < pi` and an opening other than pi.
    pub fn new(theta_m: f64, theta_max: f64) -> Result<Self> {
        if !(-PI < theta_m && theta_m < theta_max && theta_max < PI) {
            return Err(Error::InvalidSector(format!(
                "need -pi < theta_m < theta_max < pi, got ({theta_m}, {theta_max})"
            )));
        }
        if (theta_max - theta_m - PI).abs() < 1e-12 {
            return Err(Error::InvalidSector(
                "opening angle equal to pi is excluded (straight vertex)".into(),
            ));
        }
        Ok(SectorSpec { theta_m, theta_max })
    }

    pub fn opening(&self) -> f64 {
        self.theta_max - self.theta_m
    }

    /// `min cos(theta/2)` over the span; positive for every admissible span.
    pub fn delta_w(&self) -> f64 {
        (0.5 * self.theta_m).cos().min((0.5 * self.theta_max).cos())
    }
}

/// `mu(theta) = e^{i theta/2}`.
pub fn mu(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * theta)
}

/// `omega(theta) = cos(theta/2) = Re mu(theta)`.
pub fn omega_w(theta: f64) -> f64 {
    (0.5 * theta).cos()
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("s = {s} must be positive")));
    }
    Ok(())
}

/// `u0(s x)` in polar coordinates, no branch checks.
#[inline]
pub fn u0_polar(r: f64, theta: f64, s: f64) -> Complex64 {
    (-(s * r).sqrt() * mu(theta)).exp()
}

/// `u0(s x)`.
pub fn u0_eval(x: Point2, s: f64) -> Result<Complex64> {
    check_s(s)?;
    let (r, theta) = checked_polar(x)?;
    Ok(u0_polar(r, theta, s))
}

/// `u0(s x)` and its gradient with respect to `x`.
pub fn u0_with_gradient(x: Point2, s: f64) -> Result<(Complex64, [Complex64; 2])> {
    check_s(s)?;
    let (r, theta) = checked_polar(x)?;
    let u = u0_polar(r, theta, s);
    // u = exp(-sqrt(s) w^{1/2}) with w = x1 + i x2, so du/dw = -sqrt(s) u / (2 sqrt(w)),
    // and for a holomorphic function the gradient is (f', i f').
    let sqrt_w = Complex64::from_polar(r.sqrt(), 0.5 * theta);
    let d = -u * s.sqrt() / (sqrt_w * 2.0);
    Ok((u, [d, d * Complex64::i()]))
}

fn checked_polar(x: Point2) -> Result<(f64, f64)> {
    let r = x.norm();
    let theta = x.arg();
    if r == 0.0 || PI - theta.abs() < 1e-14 {
        return Err(Error::BranchCut { x: x.x, y: x.y });
    }
    Ok((r, theta))
}

/// `int_W u0(s x) dx = 6i (e^{-2i theta_max} - e^{-2i theta_m}) s^{-2}`.
pub fn sector_integral_exact(sec: &SectorSpec, s: f64) -> Complex64 {
    let e = |t: f64| Complex64::from_polar(1.0, -2.0 * t);
    Complex64::new(0.0, 6.0) * (e(sec.theta_max) - e(sec.theta_m)) / (s * s)
}

/// Upper bound on `int_W |u0(s x)| |x|^alpha dx`:
/// `2 (theta_max - theta_m) Gamma(2 alpha + 4) / delta_W^{2 alpha + 4} s^{-alpha - 2}`.
pub fn weighted_bound(sec: &SectorSpec, alpha: f64, s: f64) -> f64 {
    let p = 2.0 * alpha + 4.0;
    2.0 * sec.opening() * libm::tgamma(p) / sec.delta_w().powf(p) * s.powf(-alpha - 2.0)
}

/// Tail estimate `6 (theta_max - theta_m) / delta_W^4 s^{-2} e^{-delta_W sqrt(h s)/2}`
/// as published. This is not an upper bound for moderate `delta_W sqrt(h s)`;
/// see [`tail_bound_valid`].
pub fn tail_bound(sec: &SectorSpec, s: f64, h: f64) -> f64 {
    tail_bound_with_constant(sec, s, h, 6.0)
}

/// A provable tail bound: the same form with constant 192, from
/// `2 int_a^inf t^3 e^{-d t} dt <= e^{-d a/2} 2 int_0^inf t^3 e^{-d t/2} dt = 192 e^{-d a/2} / d^4`.
pub fn tail_bound_valid(sec: &SectorSpec, s: f64, h: f64) -> f64 {
    tail_bound_with_constant(sec, s, h, 192.0)
}

fn tail_bound_with_constant(sec: &SectorSpec, s: f64, h: f64, c: f64) -> f64 {
    let d = sec.delta_w();
    c * sec.opening() / d.powi(4) / (s * s) * (-d * (h * s).sqrt() / 2.0).exp()
}

/// Exact tail of the modulus integral in the worst direction, times the opening:
/// `2 (theta_max - theta_m) s^{-2} e^{-d a} (a^3/d + 3a^2/d^2 + 6a/d^3 + 6/d^4)` with `a = sqrt(s h)`.
/// An upper bound that is tight for thin sectors.
pub fn tail_majorant(sec: &SectorSpec, s: f64, h: f64) -> f64 {
    let d = sec.delta_w();
    let a = (s * h).sqrt();
    let poly = a.powi(3) / d + 3.0 * a * a / (d * d) + 6.0 * a / d.powi(3) + 6.0 / d.powi(4);
    2.0 * sec.opening() / (s * s) * (-d * a).exp() * poly
}

/// `int_0^h e^{-sqrt(s r) mu(theta)} dr`
/// `= 2 s^{-1} (mu^{-2} - mu^{-2} e^{-sqrt(s h) mu} - mu^{-1} sqrt(s h) e^{-sqrt(s h) mu})`.
pub fn edge_integral_exact(theta: f64, s: f64, h: f64) -> Complex64 {
    let m = mu(theta);
    let a = (s * h).sqrt();
    let e = (-a * m).exp();
    let minv = m.inv();
    (minv * minv - minv * minv * e - minv * a * e) * (2.0 / s)
}

/// Leading part `2 s^{-1} mu^{-2}` of [`edge_integral_exact`].
pub fn edge_integral_leading(theta: f64, s: f64) -> Complex64 {
    let m = mu(theta);
    (m * m).inv() * (2.0 / s)
}

/// Options for the polar quadratures.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolarOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Interval budget of each radial integration; the angular one gets half.
    pub budget: usize,
}

pub(crate) const POLAR_BUDGET: usize = 400;

/// `int_{theta_a}^{theta_b} int_{r_a}^{r_b} f(r, theta) r dr dtheta` with the
/// radial variable `t = sqrt(r)` (smooth for CGO-type integrands) and
/// radial breakpoints on the scale `t_scale`, doubling outward.
pub(crate) fn polar_integral<F>(
    f: F,
    theta_a: f64,
    theta_b: f64,
    r_a: f64,
    r_b: f64,
    t_scale: f64,
    opts: PolarOptions,
) -> Estimate
where
    F: Fn(f64, f64) -> Complex64,
{
    let ta = r_a.sqrt();
    let tb = r_b.sqrt();
    let breaks = radial_breaks(ta, tb, t_scale);
    let width = theta_b - theta_a;
    let inner_opts = AdaptiveOptions {
        abs_tol: opts.abs_tol / width.max(1e-300) * 0.1,
        rel_tol: opts.rel_tol * 0.1,
        max_intervals: opts.budget,
    };
    let inner_error = std::cell::Cell::new(0.0f64);
    let mut outer = |theta: f64| {
        let est = integrate_best_effort(
            &mut |t: f64| {
                let r = t * t;
                f(r, theta) * (2.0 * t * t * t)
            },
            &breaks,
            inner_opts,
        );
        inner_error.set(inner_error.get().max(est.error));
        est.value
    };
    let outer_opts = AdaptiveOptions {
        abs_tol: opts.abs_tol * 0.5,
        rel_tol: opts.rel_tol * 0.5,
        max_intervals: (opts.budget / 2).max(1),
    };
    let est = integrate_best_effort(&mut outer, &[theta_a, theta_b], outer_opts);
    Estimate {
        value: est.value,
        error: est.error + width * inner_error.get(),
    }
}

/// Breakpoints on `[ta, tb]` at `ta + t_scale * 2^j`, plus a geometric
/// refinement toward `ta` when it is zero.
pub(crate) fn radial_breaks(ta: f64, tb: f64, t_scale: f64) -> Vec<f64> {
    let mut pts = vec![ta];
    let mut x = t_scale / 16.0;
    while ta + x < tb {
        pts.push(ta + x);
        x *= 2.0;
    }
    pts.push(tb);
    pts
}

/// Result of a truncated quadrature over the infinite sector.
#[derive(Debug, Clone, Copy)]
pub struct SectorQuadrature {
    pub value: Complex64,
    /// Quadrature error estimate plus the truncation bound.
    pub error_estimate: f64,
    pub rmax: f64,
    pub truncation_bound: f64,
    /// `error_estimate <= tol`.
    pub within_tol: bool,
}

fn t_scale(sec: &SectorSpec, s: f64) -> f64 {
    1.0 / (s.sqrt() * sec.delta_w())
}

/// Smallest radius (by doubling then bisection) at which the provable tail
/// bound drops below `target`.
pub fn truncation_radius(sec: &SectorSpec, s: f64, target: f64) -> f64 {
    let mut hi = 1.0 / s;
    while tail_bound_valid(sec, s, hi) > target {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail_bound_valid(sec, s, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Polar quadrature of `int_{W ∩ B_rmax} u0(s x) dx`. With `rmax = None`
/// the radius is chosen so the truncation bound is at most `tol / 10`.
pub fn sector_integral_quad(
    sec: &SectorSpec,
    s: f64,
    rmax: Option<f64>,
    tol: f64,
) -> Result<SectorQuadrature> {
    check_s(s)?;
    let rmax = rmax.unwrap_or_else(|| truncation_radius(sec, s, tol / 10.0));
    let trunc = tail_bound_valid(sec, s, rmax);
    let est = polar_integral(
        |r, th| u0_polar(r, th, s),
        sec.theta_m,
        sec.theta_max,
        0.0,
        rmax,
        t_scale(sec, s),
        PolarOptions {
            abs_tol: 0.5 * tol,
            rel_tol: 0.0,
            budget: POLAR_BUDGET,
        },
    );
    if est.error > tol {
        return Err(Error::Quadrature {
            tol,
            estimate: est.error,
        });
    }
    let error_estimate = est.error + trunc;
    Ok(SectorQuadrature {
        value: est.value,
        error_estimate,
        rmax,
        truncation_bound: trunc,
        within_tol: error_estimate <= tol,
    })
}

/// Radius beyond which `|u0(s x)| |x|^p` is below `1e-18` relative in every direction.
fn negligible_radius(sec: &SectorSpec, s: f64, h: f64) -> f64 {
    let d = sec.delta_w();
    let a = (s * h).sqrt();
    let t_end = a + 90.0 / d;
    t_end * t_end / s
}

/// Quadrature of `int_W |u0(s x)| |x|^alpha dx`.
pub fn weighted_integral_quad(sec: &SectorSpec, alpha: f64, s: f64, rel_tol: f64) -> Estimate {
    let rmax = negligible_radius(sec, s, 0.0) * (1.0 + alpha);
    polar_integral(
        |r, th| Complex64::new(u0_polar(r, th, s).norm() * r.powf(alpha), 0.0),
        sec.theta_m,
        sec.theta_max,
        0.0,
        rmax,
        t_scale(sec, s),
        PolarOptions {
            abs_tol: 0.0,
            rel_tol,
            budget: POLAR_BUDGET,
        },
    )
}

/// Quadrature of `int_{W \ B_h} |u0(s x)| dx`.
pub fn tail_integral_quad(sec: &SectorSpec, s: f64, h: f64, rel_tol: f64) -> Estimate {
    let rmax = negligible_radius(sec, s, h);
    polar_integral(
        |r, th| Complex64::new(u0_polar(r, th, s).norm(), 0.0),
        sec.theta_m,
        sec.theta_max,
        h,
        rmax,
        t_scale(sec, s),
        PolarOptions {
            abs_tol: 0.0,
            rel_tol,
            budget: POLAR_BUDGET,
        },
    )
}

/// Quadrature of the complex tail `int_{W \ B_h} u0(s x) dx`.
pub fn tail_complex_quad(sec: &SectorSpec, s: f64, h: f64, abs_tol: f64) -> Estimate {
    let rmax = negligible_radius(sec, s, h);
    polar_integral(
        |r, th| u0_polar(r, th, s),
        sec.theta_m,
        sec.theta_max,
        h,
        rmax,
        t_scale(sec, s),
        PolarOptions {
            abs_tol,
            rel_tol: 0.0,
            budget: POLAR_BUDGET,
        },
    )
}

/// Quadrature of `int_0^h e^{-sqrt(s r) mu(theta)} dr` in `t = sqrt(r)`.
pub fn edge_integral_quad(theta: f64, s: f64, h: f64, abs_tol: f64) -> Estimate {
    let m = mu(theta);
    let ts = 1.0 / (s.sqrt() * omega_w(theta));
    let breaks = radial_breaks(0.0, h.sqrt(), ts);
    integrate_best_effort(
        &mut |t: f64| (-(s.sqrt() * t) * m).exp() * (2.0 * t),
        &breaks,
        AdaptiveOptions {
            abs_tol,
            rel_tol: 0.0,
            max_intervals: 2000,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn reference_points() {
        let v = u0_eval(Point2::new(1.0, 0.0), 1.0).unwrap();
        assert!((v - Complex64::new((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        let v = u0_eval(Point2::new(0.0, 1.0), 4.0).unwrap();
        let r2 = 2.0f64.sqrt();
        let expect = Complex64::new(r2.cos(), -r2.sin()) * (-r2).exp();
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn branch_cut_and_origin_are_refused() {
        assert!(u0_eval(Point2::new(0.0, 0.0), 1.0).is_err());
        assert!(u0_eval(Point2::new(-1.0, 0.0), 1.0).is_err());
        assert!(u0_eval(Point2::new(-1.0, 1e-6), 1.0).is_ok());
    }

    #[test]
    fn symmetric_sector_integral_is_real() {
        let sec = SectorSpec::new(-PI / 4.0, PI / 4.0).unwrap();
        let v = sector_integral_exact(&sec, 100.0);
        assert!((v.re - 1.2e-3).abs() < 1e-15);
        assert!(v.im.abs() < 1e-18);
    }

    #[test]
    fn edge_closed_form_example() {
        let v = edge_integral_exact(0.0, 1.0, 1.0);
        let expect = 2.0 - 4.0 / 1f64.exp();
        assert!((v.re - expect).abs() < 1e-15 && v.im.abs() < 1e-16);
        let q = edge_integral_quad(0.0, 1.0, 1.0, 1e-14);
        assert!((q.value - v).norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let x = Point2::new(0.3, 0.4);
        let (_, g) = u0_with_gradient(x, 7.0).unwrap();
        let h = 1e-6;
        let fx = (u0_eval(Point2::new(0.3 + h, 0.4), 7.0).unwrap()
            - u0_eval(Point2::new(0.3 - h, 0.4), 7.0).unwrap())
            / (2.0 * h);
        let fy = (u0_eval(Point2::new(0.3, 0.4 + h), 7.0).unwrap()
            - u0_eval(Point2::new(0.3, 0.4 - h), 7.0).unwrap())
            / (2.0 * h);
        assert!((fx - g[0]).norm() < 1e-8);
        assert!((fy - g[1]).norm() < 1e-8);
    }

    #[test]
    fn published_tail_estimate_fails_where_the_valid_bound_holds() {
        // (0, pi/2), s = 1, h = 1: the modulus integral exceeds the published
        // right-hand side but sits below the constant-192 bound.
        let sec = SectorSpec::new(0.0, FRAC_PI_2).unwrap();
        let lhs = tail_integral_quad(&sec, 1.0, 1.0, 1e-12).value.re;
        assert!(lhs > tail_bound(&sec, 1.0, 1.0));
        assert!(lhs <= tail_bound_valid(&sec, 1.0, 1.0));
        assert!(lhs <= tail_majorant(&sec, 1.0, 1.0));
    }

    #[test]
    fn too_small_radius_is_flagged() {
        let sec = SectorSpec::new(0.0, FRAC_PI_2).unwrap();
        let q = sector_integral_quad(&sec, 1.0, Some(0.5), 1e-10).unwrap();
        assert!(!q.within_tol);
        let q = sector_integral_quad(&sec, 1.0, None, 1e-10).unwrap();
        assert!(q.within_tol);
    }
}
