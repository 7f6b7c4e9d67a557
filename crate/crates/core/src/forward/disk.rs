//! Separable solution for concentric circular interfaces, used as an
//! independent check of the boundary integral solver.
//!
//! Interface `l` (0-based) has radius `radii[l]`, separates region `l`
//! (outside, `l = 0` is the exterior) from region `l + 1`, and carries
//! `lambda[l]`; region `l + 1` has potential `q[l]`.

use super::farfield::{check_angles, FarFieldPattern};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::special::{bessel_j_orders, bessel_y_orders, derivative_from_orders};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Values and radial derivatives of `J_n`, `Y_n` at `kappa r` for `n = 0..=m`.
struct Cylinder {
    j: Vec<Complex64>,
    dj: Vec<Complex64>,
    y: Vec<Complex64>,
    dy: Vec<Complex64>,
}

fn cylinder(m: usize, kappa: Complex64, r: f64) -> Cylinder {
    let z = kappa * r;
    let jv = bessel_j_orders(m + 1, z);
    let yv = bessel_y_orders(m + 1, z);
    Cylinder {
        dj: (0..=m)
            .map(|n| kappa * derivative_from_orders(&jv, n))
            .collect(),
        dy: (0..=m)
            .map(|n| kappa * derivative_from_orders(&yv, n))
            .collect(),
        j: jv[..=m].to_vec(),
        y: yv[..=m].to_vec(),
    }
}

fn principal_sqrt(q: Complex64) -> Complex64 {
    q.sqrt()
}

fn check_inputs(
    radii: &[f64],
    q: &[Complex64],
    lambda: &[Complex64],
    k: f64,
    m_trunc: usize,
) -> Result<()> {
    if radii.is_empty() || q.len() != radii.len() || lambda.len() != radii.len() {
        return Err(Error::InvalidArgument(
            "radii, q and lambda must be non-empty and of equal length".into(),
        ));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if (m_trunc as f64) < k * radii[0] + 20.0 {
        return Err(Error::InvalidArgument(format!(
            "truncation order {m_trunc} is below k * max radius + 20"
        )));
    }
    Ok(())
}

/// Scattering ratios `t_n = b_n / a_n`, `n = 0..=m_trunc`, where the exterior
/// field is `sum_n a_n J_n(kr) + b_n H_n(kr)` per angular order. The ratio is
/// the same for `-n`.
pub fn disk_mode_ratios(
    radii: &[f64],
    q: &[Complex64],
    lambda: &[Complex64],
    k: f64,
    m_trunc: usize,
) -> Result<Vec<Complex64>> {
    check_inputs(radii, q, lambda, k, m_trunc)?;
    let nl = radii.len();
    let kk = Complex64::new(k, 0.0);
    let wavenumber = |region: usize| {
        if region == 0 {
            kk
        } else {
            kk * principal_sqrt(q[region - 1])
        }
    };
    // Both sides of each interface.
    let sides: Vec<(Cylinder, Cylinder)> = (0..nl)
        .map(|l| {
            (
                cylinder(m_trunc, wavenumber(l), radii[l]),
                cylinder(m_trunc, wavenumber(l + 1), radii[l]),
            )
        })
        .collect();

    // Unknowns: b (exterior H_n), then (c_l, d_l) for annuli 1..nl-1, then c_core.
    let size = 2 * nl;
    let col_j = |region: usize| {
        if region == nl {
            size - 1
        } else {
            2 * region - 1
        }
    };
    let col_y = |region: usize| 2 * region;
    let mut out = Vec::with_capacity(m_trunc + 1);
    for n in 0..=m_trunc {
        let mut a = vec![vec![ZERO; size]; size];
        let mut rhs = vec![ZERO; size];
        for l in 0..nl {
            let (o, i) = (&sides[l].0, &sides[l].1);
            let lam = lambda[l];
            let (rv, rd) = (2 * l, 2 * l + 1);
            // Outer side: u_out - u_in = 0, u_out' + lam u_out - u_in' = 0.
            if l == 0 {
                let h = o.j[n] + Complex64::i() * o.y[n];
                let dh = o.dj[n] + Complex64::i() * o.dy[n];
                a[rv][0] += h;
                a[rd][0] += dh + lam * h;
                rhs[rv] -= o.j[n];
                rhs[rd] -= o.dj[n] + lam * o.j[n];
            } else {
                a[rv][col_j(l)] += o.j[n];
                a[rv][col_y(l)] += o.y[n];
                a[rd][col_j(l)] += o.dj[n] + lam * o.j[n];
                a[rd][col_y(l)] += o.dy[n] + lam * o.y[n];
            }
            let inner = l + 1;
            a[rv][col_j(inner)] -= i.j[n];
            a[rd][col_j(inner)] -= i.dj[n];
            if inner < nl {
                a[rv][col_y(inner)] -= i.y[n];
                a[rd][col_y(inner)] -= i.dy[n];
            }
        }
        let x = gauss_solve(a, rhs).ok_or(Error::SingularMode(n as i64))?;
        out.push(x[0]);
    }
    Ok(out)
}

/// Column-scaled Gaussian elimination with partial pivoting; `None` when a
/// pivot is negligible relative to its column scale.
fn gauss_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    let scale: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[i][j].norm()).fold(0.0, f64::max))
        .collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return None;
    }
    for row in a.iter_mut() {
        for (v, s) in row.iter_mut().zip(&scale) {
            *v /= *s;
        }
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))?;
        if a[p][c].norm() < 1e-13 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            if f != ZERO {
                for cc in c..n {
                    let t = a[c][cc];
                    a[r][cc] -= f * t;
                }
                let t = b[c];
                b[r] -= f * t;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in (r + 1)..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

/// `sqrt(2/(pi k)) e^{-i pi/4} sum_n t_|n| e^{i n (theta - theta_d)}`.
fn pattern_from_ratios(
    t: &[Complex64],
    k: f64,
    direction: Point2,
    angles: &[f64],
) -> Result<FarFieldPattern> {
    check_angles(angles)?;
    let c = Complex64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0);
    let td = direction.arg();
    let values = angles
        .iter()
        .map(|&th| {
            let mut s = t[0];
            for (n, tn) in t.iter().enumerate().skip(1) {
                s += tn * (2.0 * (n as f64 * (th - td)).cos());
            }
            c * s
        })
        .collect();
    FarFieldPattern::new(angles.to_vec(), values)
}

/// Far-field pattern of a plane wave with unit `direction` scattered by
/// concentric disks.
pub fn disk_series_oracle(
    radii: &[f64],
    q: &[Complex64],
    lambda: &[Complex64],
    k: f64,
    direction: Point2,
    m_trunc: usize,
    angles: &[f64],
) -> Result<FarFieldPattern> {
    if ((direction.norm() - 1.0).abs()) > 1e-12 {
        return Err(Error::InvalidIncident(
            "direction must be a unit vector".into(),
        ));
    }
    let t = disk_mode_ratios(radii, q, lambda, k, m_trunc)?;
    pattern_from_ratios(&t, k, direction, angles)
}

/// Classical ratios for one disk of radius `r` and potential `q` without a
/// conductive jump.
pub fn textbook_disk_ratios(r: f64, q: Complex64, k: f64, m_trunc: usize) -> Vec<Complex64> {
    let kk = Complex64::new(k, 0.0);
    let kappa = kk * principal_sqrt(q);
    let o = cylinder(m_trunc, kk, r);
    let i = cylinder(m_trunc, kappa, r);
    (0..=m_trunc)
        .map(|n| {
            let h = o.j[n] + Complex64::i() * o.y[n];
            let dh = o.dj[n] + Complex64::i() * o.dy[n];
            let num = i.dj[n] * o.j[n] - o.dj[n] * i.j[n];
            let den = i.dj[n] * h - dh * i.j[n];
            -num / den
        })
        .collect()
}

/// Far-field pattern from the classical single-disk formula.
pub fn textbook_disk_pattern(
    r: f64,
    q: Complex64,
    k: f64,
    direction: Point2,
    m_trunc: usize,
    angles: &[f64],
) -> Result<FarFieldPattern> {
    pattern_from_ratios(
        &textbook_disk_ratios(r, q, k, m_trunc),
        k,
        direction,
        angles,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::farfield::{farfield_diff, uniform_angles};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_disk_matches_textbook_formula() {
        let a = uniform_angles(64);
        let d = Point2::new(1.0, 0.0);
        for &(q, k) in &[(c(2.0, 0.0), 1.0), (c(4.0, 0.5), 2.5)] {
            let g = disk_series_oracle(&[1.0], &[q], &[c(0.0, 0.0)], k, d, 30, &a).unwrap();
            let t = textbook_disk_pattern(1.0, q, k, d, 30, &a).unwrap();
            assert!(farfield_diff(&t, &g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn zero_contrast_gives_zero_pattern() {
        let a = uniform_angles(32);
        let p = disk_series_oracle(
            &[1.0, 0.5],
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0)],
            1.0,
            Point2::new(0.0, 1.0),
            25,
            &a,
        )
        .unwrap();
        assert!(p.sup_norm() < 1e-14);
    }

    #[test]
    fn truncation_tail_is_negligible() {
        let a = uniform_angles(64);
        let d = Point2::new(0.6, 0.8);
        let args = (
            [1.0, 0.5],
            [c(2.0, 0.0), c(3.0, 0.0)],
            [c(0.0, 0.5), c(0.0, 0.0)],
        );
        let p1 = disk_series_oracle(&args.0, &args.1, &args.2, 1.0, d, 21, &a).unwrap();
        let p2 = disk_series_oracle(&args.0, &args.1, &args.2, 1.0, d, 31, &a).unwrap();
        let diff: f64 = p1
            .values
            .iter()
            .zip(&p2.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn lambda_changes_the_pattern() {
        let a = uniform_angles(32);
        let d = Point2::new(1.0, 0.0);
        let p0 =
            disk_series_oracle(&[1.0], &[c(2.0, 0.0)], &[c(0.0, 0.0)], 1.0, d, 21, &a).unwrap();
        let p1 =
            disk_series_oracle(&[1.0], &[c(2.0, 0.0)], &[c(0.0, 0.5)], 1.0, d, 21, &a).unwrap();
        assert!(farfield_diff(&p0, &p1).unwrap() > 1e-2);
    }

    #[test]
    fn inputs_are_checked() {
        let a = uniform_angles(8);
        let d = Point2::new(1.0, 0.0);
        let one = [c(2.0, 0.0)];
        let zero = [c(0.0, 0.0)];
        assert!(disk_series_oracle(&[1.0], &one, &zero, 1.0, d, 5, &a).is_err());
        assert!(
            disk_series_oracle(&[0.5, 1.0], &[one[0]; 2], &[zero[0]; 2], 1.0, d, 30, &a).is_err()
        );
    }
}
