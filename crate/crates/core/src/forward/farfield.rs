//! Far-field patterns on the unit circle and their comparison.

use super::solve::{far_field_at, SolveResult};
use crate::error::{Error, Result};
use crate::medium::{IncidentField, Medium};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples of `u^inf` at strictly increasing angles in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldPattern {
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(angles: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_angles(&angles)?;
        if angles.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} angles but {} values",
                angles.len(),
                values.len()
            )));
        }
        Ok(FarFieldPattern { angles, values })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete L2 norm on the circle.
    pub fn l2_norm(&self) -> f64 {
        let w = arc_weights(&self.angles);
        self.values
            .iter()
            .zip(&w)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// `m` equispaced angles `2 pi j / m`.
pub fn uniform_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

pub(crate) fn check_angles(angles: &[f64]) -> Result<()> {
    if angles.len() < 2 {
        return Err(Error::InvalidArgument(
            "a far-field grid needs at least 2 angles".into(),
        ));
    }
    if angles.iter().any(|&a| !(0.0..2.0 * PI).contains(&a)) {
        return Err(Error::InvalidArgument(
            "far-field angles must lie in [0, 2 pi)".into(),
        ));
    }
    if angles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "far-field angles must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Periodic trapezoid weights: half the two adjacent gaps.
fn arc_weights(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    (0..m)
        .map(|j| {
            let next = if j + 1 < m {
                angles[j + 1]
            } else {
                angles[0] + 2.0 * PI
            };
            let prev = if j > 0 {
                angles[j - 1]
            } else {
                angles[m - 1] - 2.0 * PI
            };
            0.5 * (next - prev)
        })
        .collect()
}

/// Far-field pattern of a solved problem at the given angles.
pub fn far_field(
    medium: &Medium,
    inc: &IncidentField,
    sr: &SolveResult,
    angles: &[f64],
) -> Result<FarFieldPattern> {
    check_angles(angles)?;
    inc.validate_against(medium)?;
    let values = angles
        .iter()
        .map(|&t| far_field_at(inc, sr, t))
        .collect::<Result<Vec<_>>>()?;
    FarFieldPattern::new(angles.to_vec(), values)
}

/// Relative L2 difference `||p1 - p2|| / max(||p1||, eps)`.
pub fn farfield_diff(p1: &FarFieldPattern, p2: &FarFieldPattern) -> Result<f64> {
    if p1.angles.len() != p2.angles.len()
        || p1
            .angles
            .iter()
            .zip(&p2.angles)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::GridMismatch);
    }
    let w = arc_weights(&p1.angles);
    let num: f64 = p1
        .values
        .iter()
        .zip(&p2.values)
        .zip(&w)
        .map(|((a, b), w)| (a - b).norm_sqr() * w)
        .sum::<f64>()
        .sqrt();
    Ok(num / p1.l2_norm().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(m: usize) -> FarFieldPattern {
        let a = uniform_angles(m);
        let v = a
            .iter()
            .map(|t| Complex64::new(t.cos(), (2.0 * t).sin()))
            .collect();
        FarFieldPattern::new(a, v).unwrap()
    }

    #[test]
    fn identical_patterns_have_zero_difference() {
        let p = pattern(32);
        assert_eq!(farfield_diff(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn single_sample_perturbation() {
        let p = pattern(64);
        let mut q = p.clone();
        let delta = 1e-3;
        q.values[5] += delta;
        let w = 2.0 * PI / 64.0;
        let expected = delta * w.sqrt() / p.l2_norm();
        assert!((farfield_diff(&p, &q).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        assert!(matches!(
            farfield_diff(&pattern(8), &pattern(16)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn grid_invariants_are_enforced() {
        assert!(FarFieldPattern::new(vec![0.0], vec![Complex64::new(0.0, 0.0)]).is_err());
        assert!(FarFieldPattern::new(vec![1.0, 0.5], vec![Complex64::new(0.0, 0.0); 2]).is_err());
        assert!(
            FarFieldPattern::new(vec![0.0, 2.0 * PI], vec![Complex64::new(0.0, 0.0); 2]).is_err()
        );
    }
}
