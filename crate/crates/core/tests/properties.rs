use num_complex::Complex64;
use polyscat_core::cgo::{mu, u0_eval, weighted_bound, weighted_integral_quad, SectorSpec};
use polyscat_core::corner_probe::*;
use polyscat_core::forward::{farfield_diff, uniform_angles, FarFieldPattern};
use polyscat_core::geometry::{
    corner_sectors, locate_nest, CornerSector, NestPartition, Point2, Polygon, RegionLabel,
};
use polyscat_core::medium::{IncidentField, NestMedium};
use polyscat_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Star-shaped polygon about the origin from sorted angle gaps and radii.
fn star_polygon(gaps: &[f64], radii: &[f64]) -> Polygon {
    let total: f64 = gaps.iter().sum();
    let mut theta = 0.0;
    let pts = gaps
        .iter()
        .zip(radii)
        .map(|(g, r)| {
            let p = Point2::from_polar(*r, theta);
            theta += 2.0 * PI * g / total;
            p
        })
        .collect();
    Polygon::new(pts).unwrap()
}

/// `s` times a sampler.
struct Scaled<'a> {
    factor: Complex64,
    inner: &'a dyn FieldSampler,
}

impl FieldSampler for Scaled<'_> {
    fn eval(&self, x: Point2) -> (Complex64, [Complex64; 2]) {
        let (u, g) = self.inner.eval(x);
        (u * self.factor, [g[0] * self.factor, g[1] * self.factor])
    }
    fn defect(&self, x: Point2) -> Complex64 {
        self.inner.defect(x) * self.factor
    }
    fn has_defect(&self) -> bool {
        self.inner.has_defect()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corner_sector_midlines_point_inside(
        gaps in prop::collection::vec(1.0f64..2.0, 3..9),
        radii in prop::collection::vec(0.6f64..1.4, 9),
    ) {
        let poly = star_polygon(&gaps, &radii[..gaps.len()]);
        let h = 1e-2;
        let sectors = match corner_sectors(&poly, h) {
            Ok(s) => s,
            Err(Error::SectorTooLarge { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for sec in sectors {
            prop_assert!(sec.opening() > 0.0 && sec.opening() < 2.0 * PI);
            let mid = 0.5 * (sec.theta_m + sec.theta_max);
            let x = sec.to_global(Point2::from_polar(0.5 * h, mid));
            prop_assert!(poly.contains(x));
        }
    }

    #[test]
    fn nest_labels_decrease_outward(
        scales in prop::collection::vec(0.2f64..1.0, 1..4),
        phase in 0.0f64..1.0,
        ray in 0.0f64..(2.0 * PI),
    ) {
        let mut scales = scales;
        scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
        scales.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let layers = scales
            .iter()
            .map(|&r| Polygon::regular(5, r * 2.0, Point2::new(0.0, 0.0), phase).unwrap())
            .collect();
        let nest = NestPartition { layers };
        let mut last = usize::MAX;
        let mut outside = false;
        for j in 0..200 {
            let x = Point2::from_polar(3.0 * j as f64 / 200.0 + 1e-3, ray);
            match locate_nest(&nest, x) {
                RegionLabel::Region(l) => {
                    prop_assert!(!outside && l <= last);
                    last = l;
                }
                RegionLabel::Exterior => outside = true,
                RegionLabel::OnInterface(_) => {}
            }
        }
        prop_assert!(outside);
    }

    #[test]
    fn incident_fields_solve_helmholtz(
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
        angle in 0.0f64..(2.0 * PI),
        k in 0.5f64..3.0,
    ) {
        let p = Point2::new(x, y);
        let src = Point2::new(3.0, 0.0);
        let fields = [
            IncidentField::plane_wave(Point2::from_polar(1.0, angle)).unwrap(),
            IncidentField::point_source(src),
        ];
        let h = 1e-3;
        for f in fields {
            let u = |q: Point2| f.eval(k, q).unwrap().0;
            let lap = (u(p + Point2::new(h, 0.0)) + u(p - Point2::new(h, 0.0))
                + u(p + Point2::new(0.0, h)) + u(p - Point2::new(0.0, h))
                - u(p) * 4.0) / (h * h);
            let scale = u(p).norm().max(1e-3) * k.powi(4);
            prop_assert!((lap + u(p) * (k * k)).norm() < 1e-4 * scale + 1e-6);
        }
    }

    #[test]
    fn nonpositive_real_potential_is_rejected(re in -2.0f64..=0.0, im in -1.0f64..1.0) {
        let nest = NestPartition {
            layers: vec![Polygon::regular(4, 1.0, Point2::new(0.0, 0.0), 0.0).unwrap()],
        };
        prop_assert!(NestMedium::new(nest, vec![c(re, im)], vec![c(0.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn cgo_solution_is_harmonic(r in 0.2f64..2.0, theta in -3.0f64..3.0, s in 0.5f64..20.0) {
        let x = Point2::from_polar(r, theta);
        let h = 1e-4 * r;
        let u = |q: Point2| u0_eval(q, s).unwrap();
        let lap = (u(x + Point2::new(h, 0.0)) + u(x - Point2::new(h, 0.0))
            + u(x + Point2::new(0.0, h)) + u(x - Point2::new(0.0, h))
            - u(x) * 4.0) / (h * h);
        // Local scale of the second derivatives: |u| s / r.
        prop_assert!(lap.norm() < 1e-4 * u(x).norm() * (1.0 + s / r));
    }

    #[test]
    fn cgo_decays_on_the_arc(
        theta_m in -3.0f64..0.0,
        width in 0.1f64..3.0,
        s in 1.0f64..500.0,
        h in 0.1f64..2.0,
        t in 0.0f64..1.0,
    ) {
        let theta_max = (theta_m + width).min(3.0);
        prop_assume!(theta_max > theta_m && ((theta_max - theta_m) - PI).abs() > 1e-6);
        let spec = SectorSpec::new(theta_m, theta_max).unwrap();
        let theta = theta_m + t * (theta_max - theta_m);
        let u = u0_eval(Point2::from_polar(h, theta), s).unwrap();
        prop_assert!(u.norm() <= (-spec.delta_w() * (s * h).sqrt()).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn eta_denominator_never_vanishes(theta_m in -3.1f64..3.0, width in 0.01f64..6.0) {
        let theta_max = theta_m + width;
        prop_assume!(theta_max < PI && (width - PI).abs() > 1e-6);
        let d = mu(theta_max).powi(-2) + mu(theta_m).powi(-2);
        // |e^{-i theta_max} + e^{-i theta_m}| = 2 |cos(width / 2)|.
        prop_assert!((d.norm() - 2.0 * (width / 2.0).cos().abs()).abs() < 1e-12);
        prop_assert!(d.norm() > 0.0);
    }

    #[test]
    fn farfield_diff_is_zero_only_for_equal_patterns(
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        bump in 1e-6f64..1.0,
        at in 0usize..16,
    ) {
        let values: Vec<Complex64> = vals.iter().map(|&(a, b)| c(a, b) + 2.0).collect();
        let p = FarFieldPattern::new(uniform_angles(16), values.clone()).unwrap();
        prop_assert_eq!(farfield_diff(&p, &p).unwrap(), 0.0);
        let mut other = values;
        other[at] += bump;
        let q = FarFieldPattern::new(uniform_angles(16), other).unwrap();
        let d = farfield_diff(&p, &q).unwrap();
        prop_assert!(d > 0.0);
        // Common rescaling leaves the relative difference unchanged.
        let scale = |f: &FarFieldPattern| {
            FarFieldPattern::new(f.angles.clone(), f.values.iter().map(|v| v * c(0.0, 3.0)).collect()).unwrap()
        };
        prop_assert!((farfield_diff(&scale(&p), &scale(&q)).unwrap() - d).abs() < 1e-12 * d.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn weighted_integral_stays_below_its_bound(
        theta_m in -2.5f64..0.0,
        width in 0.3f64..2.5,
        alpha in 0.1f64..1.0,
        s in 1.0f64..100.0,
    ) {
        let theta_max = (theta_m + width).min(2.9);
        prop_assume!((theta_max - theta_m - PI).abs() > 1e-3);
        let spec = SectorSpec::new(theta_m, theta_max).unwrap();
        let q = weighted_integral_quad(&spec, alpha, s, 1e-8);
        prop_assert!(q.value.re <= weighted_bound(&spec, alpha, s));
    }

    #[test]
    fn probe_estimates_are_scale_invariant(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        de_re in -0.5f64..0.5,
        de_im in -0.5f64..0.5,
    ) {
        let factor = c(re, im);
        prop_assume!(factor.norm() > 0.1);
        let sec = CornerSector::new(0.0, PI / 2.0, 1.0).unwrap();
        let (w1, w2) = (c(2.0, 0.0), c(2.3, 0.1));
        let de = c(de_re, de_im);
        let pair = LiftedPair::new(&sec, c(1.0, 0.0), w1, w2, de);
        let grid = [50.0, 200.0];
        let opts = ProbeOptions::default();
        let base = ProbeScenario {
            sector: sec, k: c(1.0, 0.0), omega1: w1, omega2: w2,
            eta1: de, eta2: c(0.0, 0.0), u1: &pair.u1, u2: &pair.u2,
        };
        let (s1, s2) = (Scaled { factor, inner: &pair.u1 }, Scaled { factor, inner: &pair.u2 });
        let scaled = ProbeScenario { u1: &s1, u2: &s2, ..base };
        let (e0, o0) = run_probe(&base, &grid, &opts).unwrap();
        let (e1, o1) = run_probe(&scaled, &grid, &opts).unwrap();
        for (a, b) in e0.samples.iter().zip(&e1.samples).chain(o0.samples.iter().zip(&o1.samples)) {
            let tol = 1e-9 * (1.0 + a.estimate.norm()) + 10.0 * (a.residual + b.residual);
            prop_assert!((a.estimate - b.estimate).norm() < tol, "{} vs {}", a.estimate, b.estimate);
        }
    }

    #[test]
    fn identity_closes_for_random_parameters(
        de_re in -1.0f64..1.0,
        de_im in -1.0f64..1.0,
        w1 in 1.0f64..4.0,
        w2 in 1.0f64..4.0,
        w2_im in 0.0f64..0.5,
        theta_m in -1.5f64..0.0,
        width in 0.3f64..2.8,
    ) {
        let theta_max = theta_m + width;
        prop_assume!(theta_max < 3.0 && (width - PI).abs() > 0.05);
        let sec = CornerSector::new(theta_m, theta_max, 1.0).unwrap();
        let (w1, w2) = (c(w1, 0.0), c(w2, w2_im));
        let de = c(de_re, de_im);
        let pair = LiftedPair::new(&sec, c(1.0, 0.0), w1, w2, de);
        let sc = ProbeScenario {
            sector: sec, k: c(1.0, 0.0), omega1: w1, omega2: w2,
            eta1: de, eta2: c(0.0, 0.0), u1: &pair.u1, u2: &pair.u2,
        };
        let opts = ProbeOptions::default();
        for s in [50.0, 400.0] {
            let r = identity_closure(&sc, s, &opts).unwrap();
            prop_assert!(r.residual < 10.0 * r.tolerance, "s={}: {} vs {}", s, r.residual, r.tolerance);
        }
    }
}
