//! Polynomial extrapolation to zero (Neville's scheme).

use num_complex::Complex64;

/// Extrapolated value at `x = 0` with an error indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: Complex64,
    /// Difference between the two highest-order tableau entries.
    pub error: f64,
}

/// Extrapolates samples `(x_i, y_i)` to `x = 0` through the interpolating
/// polynomial of full degree.
pub fn extrapolate_to_zero(samples: &[(f64, Complex64)]) -> Extrapolation {
    let n = samples.len();
    assert!(n >= 1, "need at least one sample");
    let x: Vec<f64> = samples.iter().map(|p| p.0).collect();
    let mut p: Vec<Complex64> = samples.iter().map(|p| p.1).collect();
    let mut prev_top = p[n - 1];
    for m in 1..n {
        prev_top = p[n - 1 - m + 1];
        for i in 0..(n - m) {
            // p[i] = P_{i..i+m}(0)
            let num = p[i + 1] * x[i] - p[i] * x[i + m];
            p[i] = num / (x[i] - x[i + m]);
        }
    }
    let value = p[0];
    let error = if n == 1 {
        f64::INFINITY
    } else {
        (value - prev_top).norm()
    };
    Extrapolation { value, error }
}

/// Extrapolation in `1/s` of values sampled at the given `s`.
pub fn extrapolate_in_inverse_s(s: &[f64], values: &[Complex64]) -> Extrapolation {
    let samples: Vec<(f64, Complex64)> =
        s.iter().zip(values).map(|(&s, &v)| (1.0 / s, v)).collect();
    extrapolate_to_zero(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_in_x_is_recovered_exactly() {
        let f = |x: f64| Complex64::new(2.0 - 3.0 * x + 0.5 * x * x, 1.0 + x * x * x);
        let samples: Vec<_> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&x| (x, f(x)))
            .collect();
        let e = extrapolate_to_zero(&samples);
        assert!((e.value - Complex64::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn single_sample_is_returned_unchanged() {
        let e = extrapolate_to_zero(&[(0.3, Complex64::new(4.0, 0.0))]);
        assert_eq!(e.value, Complex64::new(4.0, 0.0));
    }
}
