//! Bessel and Hankel functions of integer order for complex arguments.
//!
//! Ascending series are used for `|z| <= SERIES_RADIUS` and the Hankel
//! asymptotic expansion (optimally truncated) beyond it. For `|arg z| < pi/4`,
//! the range the solver and the corner fields use, the worse of the two at
//! the switch is about 1e-11 relative, the accuracy floor of everything
//! built on top.
//!
//! `H^(1)` is exponentially small for `Im z > 0` while `J` and `Y` are large,
//! so `J + iY` from the series loses about `e^{|z| + Im z}` ulps; it switches
//! to the asymptotic expansion, whose relative error is about `e^{-2|z|}`,
//! where the two error estimates cross.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_RADIUS: f64 = 14.0;

/// `3|z| + Im z` above which the asymptotic `H^(1)` beats `J + iY` from the series.
const HANKEL_SWITCH: f64 = 35.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `J_0(z)` and `J_1(z)`.
pub fn j01(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= SERIES_RADIUS {
        (j_series(0, z), j_series(1, z))
    } else {
        let (h0, h1) = hankel01_asymptotic(z, 1.0);
        let (g0, g1) = hankel01_asymptotic(z, -1.0);
        ((h0 + g0) * 0.5, (h1 + g1) * 0.5)
    }
}

/// `Y_0(z)` and `Y_1(z)`.
pub fn y01(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= SERIES_RADIUS {
        let (j0, j1) = (j_series(0, z), j_series(1, z));
        y01_series(z, j0, j1)
    } else {
        let (h0, h1) = hankel01_asymptotic(z, 1.0);
        let (g0, g1) = hankel01_asymptotic(z, -1.0);
        let i2 = Complex64::new(0.0, 2.0);
        ((h0 - g0) / i2, (h1 - g1) / i2)
    }
}

/// `H^(1)_0(z)` and `H^(1)_1(z)`.
pub fn hankel01(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= SERIES_RADIUS && 3.0 * z.norm() + z.im <= HANKEL_SWITCH {
        let (j0, j1) = (j_series(0, z), j_series(1, z));
        let (y0, y1) = y01_series(z, j0, j1);
        let i = Complex64::i();
        (j0 + i * y0, j1 + i * y1)
    } else {
        hankel01_asymptotic(z, 1.0)
    }
}

/// `Y_1(z) + 2/(pi z)`, the part of `Y_1` without the pole. Differences of
/// kernels at two wavenumbers cancel the pole exactly through this.
pub fn y1_regular(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_RADIUS {
        let half = z * 0.5;
        let q = -half * half;
        let j1 = j_series(1, z);
        let mut term = half;
        let mut psi_k1 = -EULER_GAMMA;
        let mut psi_k2 = 1.0 - EULER_GAMMA;
        let mut acc = term * (psi_k1 + psi_k2);
        for k in 1..400 {
            term = term * q / (k as f64 * (k + 1) as f64);
            psi_k1 += 1.0 / k as f64;
            psi_k2 += 1.0 / (k + 1) as f64;
            let add = term * (psi_k1 + psi_k2);
            acc += add;
            if add.norm() <= 1e-17 * acc.norm() && k > 2 {
                break;
            }
        }
        if z.norm() == 0.0 {
            return c(0.0);
        }
        (half.ln() * j1) * (2.0 / PI) - acc / PI
    } else {
        y01(z).1 + c(2.0 / PI) / z
    }
}

/// Ascending series for `J_n(z)`, `n >= 0`.
fn j_series(n: u32, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let q = -half * half;
    let mut lead = c(1.0);
    for k in 1..=n {
        lead = lead * half / k as f64;
    }
    let mut term = lead;
    let mut sum = term;
    for k in 1..400 {
        term = term * q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn y01_series(z: Complex64, j0: Complex64, j1: Complex64) -> (Complex64, Complex64) {
    let half = z * 0.5;
    let q = -half * half;
    let log_term = (half).ln() + EULER_GAMMA;

    // Y0 = (2/pi) [ (ln(z/2) + gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k (z^2/4)^k / (k!)^2 ]
    let mut term = c(1.0);
    let mut harmonic = 0.0;
    let mut acc = c(0.0);
    for k in 1..400 {
        term = term * q / (k as f64 * k as f64);
        harmonic += 1.0 / k as f64;
        let add = -term * harmonic;
        acc += add;
        if add.norm() <= 1e-17 * acc.norm().max(1e-300) && k > 2 {
            break;
        }
    }
    let y0 = (log_term * j0 + acc) * (2.0 / PI);

    // Y1 = (2/pi) ln(z/2) J1 - 2/(pi z)
    //      - (1/pi) sum_{k>=0} (-1)^k (psi(k+1) + psi(k+2)) (z/2)^{2k+1} / (k! (k+1)!)
    let mut term = half;
    let mut psi_k1 = -EULER_GAMMA; // psi(1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(2)
    let mut acc = term * (psi_k1 + psi_k2);
    for k in 1..400 {
        term = term * q / (k as f64 * (k + 1) as f64);
        psi_k1 += 1.0 / k as f64;
        psi_k2 += 1.0 / (k + 1) as f64;
        let add = term * (psi_k1 + psi_k2);
        acc += add;
        if add.norm() <= 1e-17 * acc.norm() && k > 2 {
            break;
        }
    }
    let y1 = (half.ln() * j1) * (2.0 / PI) - c(2.0 / PI) / z - acc / PI;
    (y0, y1)
}

/// Hankel asymptotic expansion; `kind = 1.0` gives `H^(1)`, `-1.0` gives `H^(2)`.
fn hankel01_asymptotic(z: Complex64, kind: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, kind);
    let pref = (c(2.0 / PI) / z).sqrt();
    let series = |n: f64| -> Complex64 {
        let mu = 4.0 * n * n;
        let mut term = c(1.0);
        let mut sum = term;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            let next = term * i * (mu - odd * odd) / (kf * 8.0) / z;
            let size = next.norm();
            if size >= last {
                break;
            }
            sum += next;
            term = next;
            last = size;
            if size < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    };
    let phase0 = z - FRAC_PI_4;
    let phase1 = z - FRAC_PI_2 - FRAC_PI_4;
    let h0 = pref * (i * phase0).exp() * series(0.0);
    let h1 = pref * (i * phase1).exp() * series(1.0);
    (h0, h1)
}

/// `J_n(z)` for `n = 0..=nmax`.
pub fn bessel_j_orders(nmax: usize, z: Complex64) -> Vec<Complex64> {
    if z.norm() <= SERIES_RADIUS {
        return (0..=nmax).map(|n| j_series(n as u32, z)).collect();
    }
    // Forward recurrence is stable up to about n = |z|; Miller's backward
    // recurrence above it, matched to the forward values at the turning order.
    let (j0, j1) = j01(z);
    let turn = (z.norm() as usize).clamp(1, nmax.max(1));
    let mut out = vec![j0, j1];
    for n in 1..turn {
        let next = out[n] * (2.0 * n as f64) / z - out[n - 1];
        out.push(next);
    }
    out.truncate(nmax + 1);
    if nmax <= turn {
        return out;
    }
    let start = nmax + 30 + (2.0 * z.norm()) as usize;
    let mut vals = vec![c(0.0); start + 2];
    vals[start] = c(1e-300);
    for n in (turn..=start).rev() {
        vals[n - 1] = vals[n] * (2.0 * n as f64) / z - vals[n + 1];
        if vals[n - 1].norm() > 1e250 {
            for v in vals.iter_mut().skip(n - 1) {
                *v *= 1e-250;
            }
        }
    }
    // Normalize on whichever of the two overlap orders is larger.
    let m = if out[turn].norm() >= out[turn - 1].norm() {
        turn
    } else {
        turn - 1
    };
    // Complex division squares the modulus, which underflows for Miller values.
    let unit = 1.0 / vals[m].norm();
    let scale = out[m] / (vals[m] * unit) * unit;
    out.extend(vals[turn + 1..=nmax].iter().map(|v| v * scale));
    out
}

/// `Y_n(z)` for `n = 0..=nmax`, by forward recurrence (stable for the dominant solution).
pub fn bessel_y_orders(nmax: usize, z: Complex64) -> Vec<Complex64> {
    let (y0, y1) = y01(z);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for n in 1..nmax {
        let next = out[n] * (2.0 * n as f64) / z - out[n - 1];
        out.push(next);
    }
    out
}

/// Derivatives from neighbouring orders: `C_n' = (C_{n-1} - C_{n+1}) / 2`, with `C_{-1} = -C_1`.
pub fn derivative_from_orders(vals: &[Complex64], n: usize) -> Complex64 {
    let prev = if n == 0 { -vals[1] } else { vals[n - 1] };
    (prev - vals[n + 1]) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    // Reference values from mpmath (50 digits), rounded.
    #[test]
    fn real_argument_reference_values() {
        let z = c(1.0);
        let (j0, j1) = j01(z);
        let (y0, y1) = y01(z);
        assert!(close(j0, c(0.765_197_686_557_966_6), 1e-14));
        assert!(close(j1, c(0.440_050_585_744_933_5), 1e-14));
        assert!(close(y0, c(0.088_256_964_215_676_96), 1e-13));
        assert!(close(y1, c(-0.781_212_821_300_288_7), 1e-13));

        let z = c(20.0);
        let (j0, j1) = j01(z);
        let (y0, y1) = y01(z);
        assert!(close(j0, c(0.167_024_664_340_583_4), 1e-12));
        assert!(close(j1, c(0.066_833_124_175_850_04), 1e-11));
        assert!(close(y0, c(0.062_640_596_809_383_94), 1e-11));
        assert!(close(y1, c(-0.165_511_614_362_521_6), 1e-12));
    }

    #[test]
    fn branches_agree_at_the_real_switch() {
        for re in [11.0, 11.7, 12.5] {
            let z = c(re);
            let (j0, j1) = (j_series(0, z), j_series(1, z));
            let (y0, y1) = y01_series(z, j0, j1);
            let (s0, s1) = (j0 + Complex64::i() * y0, j1 + Complex64::i() * y1);
            let (a0, a1) = hankel01_asymptotic(z, 1.0);
            assert!(close(s0, a0, 1e-10), "H0 mismatch at {z}: {s0} vs {a0}");
            assert!(close(s1, a1, 1e-10), "H1 mismatch at {z}: {s1} vs {a1}");
        }
    }

    #[test]
    fn hankel_reference_values_off_the_real_axis() {
        // mpmath at 30 digits.
        let cases = [
            (
                (13.0, 5.4),
                (8.125847711280931e-4, -5.055959992244798e-4),
                (-4.8640836376569955e-4, -8.403372592138462e-4),
            ),
            (
                (9.9, 9.9),
                (-8.070602131374472e-6, 6.9212967003177445e-6),
                (6.896972485189737e-6, 8.444768740527993e-6),
            ),
            (
                (10.5, 4.0),
                (-4.320279284045049e-3, -4.238014663740958e-4),
                (-6.07478031588901e-4, 4.374244911917867e-3),
            ),
            (
                (8.0, 3.0),
                (9.988744812887702e-3, 9.10100131433073e-3),
                (9.833622412605042e-3, -9.717266231758278e-3),
            ),
        ];
        for ((re, im), h0, h1) in cases {
            let (a0, a1) = hankel01(Complex64::new(re, im));
            assert!(
                close(a0, Complex64::new(h0.0, h0.1), 1e-10),
                "H0 at {re}+{im}i: {a0}"
            );
            assert!(
                close(a1, Complex64::new(h1.0, h1.1), 1e-10),
                "H1 at {re}+{im}i: {a1}"
            );
        }
    }

    #[test]
    fn integer_orders_match_reference_values_beyond_the_series_radius() {
        // mpmath at 30 digits.
        let cases: [(Complex64, &[(usize, f64, f64)]); 2] = [
            (
                Complex64::new(30.0, 0.5),
                &[
                    (0, -0.0968744124131019, 0.061936361276666886),
                    (1, -0.13424630250808522, -0.042853081658686454),
                    (10, -0.1448689375766098, -0.03539121146516819),
                    (29, 0.18719274152378623, 0.017985021261325163),
                    (31, 0.10162282700317123, 0.019192140008207393),
                    (40, 3.277829846948376e-4, 1.5863363097520016e-4),
                ],
            ),
            (
                Complex64::new(15.0, 2.0),
                &[
                    (5, 0.40673412991399077, -0.5625491213597389),
                    (14, 0.31615297607172266, 0.14549988110129758),
                    (20, -2.3841014640908964e-3, 9.163453359446226e-3),
                    (30, -1.3332993284896e-7, -4.431481845806416e-8),
                    (40, 9.360214222589679e-15, -4.3635749385049974e-14),
                ],
            ),
        ];
        for (z, refs) in cases {
            let j = bessel_j_orders(40, z);
            for &(n, re, im) in refs {
                assert!(
                    close(j[n], Complex64::new(re, im), 1e-9),
                    "J_{n}({z}) = {}",
                    j[n]
                );
            }
        }
    }

    #[test]
    fn wronskian_holds_for_complex_arguments() {
        // J1 Y0 - J0 Y1 = 2 / (pi z)
        for &(re, im) in &[(0.3, 0.1), (1.7, 0.4), (4.2, 2.0), (8.0, 0.0), (25.0, 1.0)] {
            let z = Complex64::new(re, im);
            let (j0, j1) = j01(z);
            let (y0, y1) = y01(z);
            let w = j1 * y0 - j0 * y1;
            assert!(close(w, c(2.0 / PI) / z, 1e-11), "wronskian at {z}");
        }
    }

    #[test]
    fn higher_orders_follow_recurrence() {
        let z = Complex64::new(2.5, 0.7);
        let j = bessel_j_orders(30, z);
        let y = bessel_y_orders(30, z);
        for n in 1..29 {
            let rj = j[n + 1] + j[n - 1] - j[n] * (2.0 * n as f64) / z;
            assert!(rj.norm() <= 1e-12 * j[n - 1].norm().max(j[n].norm()));
        }
        // Wronskian for order n: J_{n+1} Y_n - J_n Y_{n+1} = 2/(pi z)
        for n in 0..29 {
            let w = j[n + 1] * y[n] - j[n] * y[n + 1];
            assert!(close(w, c(2.0 / PI) / z, 1e-9), "order {n}");
        }
    }
}
