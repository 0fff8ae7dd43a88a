//! The mathematical property suite: the p -> infinity limit law, the two-p
//! criterion, agreement between ambient-embedding and intrinsic-chart
//! computations for sphere targets, the metric-projection instance, the
//! Euclidean component system, and the pullback-energy identity.

mod common;

use infharm::catalog::{annulus_grid, catalog_get};
use infharm::operators::{
    euclidean_system_residual, inf_laplacian_map, map_report, p_laplacian, pullback_energy_check,
};
use infharm::{
    Chart, DEFAULT_RANK_TOL, Jet2, Metric, SmoothMap, Verdict, classify, classify_with_reports,
    differential_frame, energy_density, morphism_blowup_probe, tension_field,
};

fn h_norm(h: &Metric, y: &[f64], v: &nalgebra::DVector<f64>) -> f64 {
    h.at(y).unwrap().norm(v)
}

/// Rearranged p-harmonic residual |d phi|^2 tau / (p-2) + Delta_inf phi,
/// measured through the p-Laplacian itself.
fn rearranged_residual(entry: &infharm::CatalogEntry, x: &[f64], p: f64) -> f64 {
    let e = energy_density(&entry.map, &entry.source_metric, &entry.target_metric, x)
        .unwrap()
        .value();
    let v = p_laplacian(&entry.map, &entry.source_metric, &entry.target_metric, x, p).unwrap();
    let scaled = v / ((p - 2.0) * e.powf((p - 4.0) / 2.0));
    let y = entry.map.eval_values(x).unwrap();
    h_norm(&entry.target_metric, &y, &scaled)
}

/// Least-squares slope of ln(residual) against ln(p - 2).
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(p, r) in points {
        let (x, y) = ((p - 2.0).ln(), r.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// For infinity harmonic maps with nonconstant energy and nonvanishing
/// tension, the rearranged p-harmonic residual decays like 1/(p - 2):
/// log-log slope -1 +/- 0.1. (Warped-product projections such as the Sol and
/// Clifford maps are harmonic with vertical energy gradient, hence
/// p-harmonic for every p: their residual is identically zero and they
/// cannot drive this law.)
#[test]
fn p_limit_law_slope_is_minus_one() {
    let ids = ["aronsson", "product_aronsson", "radial_to_sphere", "circle_projection"];
    let ps = [4.0, 8.0, 16.0, 32.0, 64.0];
    let mut verified = 0;
    for id in ids {
        let entry = catalog_get(id).unwrap();
        let points: Vec<&Vec<f64>> = entry.samples.iter().step_by(37).collect();
        let data: Vec<(f64, f64)> = ps
            .iter()
            .map(|&p| {
                let worst = points
                    .iter()
                    .map(|x| rearranged_residual(entry, x, p))
                    .fold(0.0_f64, f64::max);
                (p, worst)
            })
            .collect();
        // decay must be monotone in p
        assert!(
            data.windows(2).all(|w| w[1].1 < w[0].1),
            "{id}: residuals not monotone: {data:?}"
        );
        let slope = log_log_slope(&data);
        assert!((slope + 1.0).abs() < 0.1, "{id}: slope {slope}");
        verified += 1;
    }
    assert!(verified >= 3);
}

/// A map that is p-harmonic for two different p values (3 and 5 here) is
/// infinity harmonic. Exercised over the chart-target catalog entries;
/// non-vacuous for the constant-energy harmonic ones.
#[test]
fn two_p_harmonic_implies_infinity_harmonic() {
    let mut nonvacuous = 0;
    for entry in infharm::catalog_entries() {
        // Ambient-embedded targets carry extrinsic tension; the two-p
        // criterion is about honest chart targets.
        if entry.map.target().manifold_dim() != entry.map.target().dim() {
            continue;
        }
        let points: Vec<&Vec<f64>> = entry.samples.iter().step_by(11).collect();
        let mut worst_p = 0.0_f64;
        let mut worst_inf = 0.0_f64;
        let mut evaluable = true;
        for x in &points {
            for p in [3.0, 5.0] {
                match p_laplacian(&entry.map, &entry.source_metric, &entry.target_metric, x, p) {
                    Ok(v) => {
                        let y = entry.map.eval_values(x).unwrap();
                        worst_p = worst_p.max(h_norm(&entry.target_metric, &y, &v));
                    }
                    Err(_) => {
                        evaluable = false;
                    }
                }
            }
            let v =
                inf_laplacian_map(&entry.map, &entry.source_metric, &entry.target_metric, x)
                    .unwrap();
            let y = entry.map.eval_values(x).unwrap();
            worst_inf = worst_inf.max(h_norm(&entry.target_metric, &y, &v));
        }
        if evaluable && worst_p < 1e-8 {
            assert!(
                worst_inf < 1e-6,
                "{}: p-harmonic for p = 3, 5 but infinity residual {worst_inf:.3e}",
                entry.id
            );
            nonvacuous += 1;
        }
    }
    assert!(nonvacuous >= 2, "only {nonvacuous} entries exercised the implication");
}

/// Build the intrinsic chart version of the radial projection onto S^2:
/// x -> (rho, phi) = (atan2(sqrt(x1^2 + x2^2), x3), atan2(x2, x1)).
fn radial_projection_chart() -> (SmoothMap, Metric, Metric) {
    let pi = std::f64::consts::PI;
    let source = Chart::new(3, "R^3 minus the x3 axis", |x| {
        x[0] * x[0] + x[1] * x[1] > 0.0
    });
    let target = Chart::new(2, "geodesic polar chart of S^2", move |y| {
        y[0] > 0.0 && y[0] < pi
    });
    let map = SmoothMap::new(source.clone(), target.clone(), |v| {
        let planar = (&(&v[0] * &v[0]) + &(&v[1] * &v[1])).sqrt()?;
        Ok(vec![Jet2::atan2(&planar, &v[2])?, Jet2::atan2(&v[1], &v[0])?])
    });
    let g = Metric::euclidean_on(source);
    let h = Metric::diagonal(target, |vars| {
        let s = vars[0].sin();
        Ok(vec![Jet2::constant(1.0, 2), &s * &s])
    });
    (map, g, h)
}

/// Ambient and intrinsic computations of the radial projection agree: the
/// energy densities match exactly and the infinity Laplacians match after
/// pushing the chart vector through the embedding differential.
#[test]
fn ambient_and_chart_paths_agree_for_radial_projection() {
    let ambient = catalog_get("radial_to_sphere").unwrap();
    let (chart_map, g, h) = radial_projection_chart();
    for x in ambient.samples.iter().step_by(9) {
        let e_ambient =
            energy_density(&ambient.map, &ambient.source_metric, &ambient.target_metric, x)
                .unwrap()
                .value();
        let e_chart = energy_density(&chart_map, &g, &h, x).unwrap().value();
        assert!(
            (e_ambient - e_chart).abs() < 1e-10 * e_ambient,
            "energy mismatch at {x:?}: {e_ambient} vs {e_chart}"
        );

        let inf_chart = inf_laplacian_map(&chart_map, &g, &h, x).unwrap();
        let inf_ambient =
            inf_laplacian_map(&ambient.map, &ambient.source_metric, &ambient.target_metric, x)
                .unwrap();
        // push the chart vector through the embedding differential at (rho, phi)
        let y = chart_map.eval_values(x).unwrap();
        let (rho, phi) = (y[0], y[1]);
        let embedding = nalgebra::DMatrix::from_row_slice(
            3,
            2,
            &[
                rho.cos() * phi.cos(),
                -rho.sin() * phi.sin(),
                rho.cos() * phi.sin(),
                rho.sin() * phi.cos(),
                -rho.sin(),
                0.0,
            ],
        );
        let pushed = embedding * inf_chart;
        assert!(
            (pushed - inf_ambient).norm() < 1e-6,
            "infinity Laplacian mismatch at {x:?}"
        );
    }
}

/// Same two-path agreement for the quadratic eigenmap (Hopf fibration):
/// chart version (t, t1, t2) -> (pi - 2t, t1 - t2) into the polar chart.
#[test]
fn ambient_and_chart_paths_agree_for_eigenmap() {
    let pi = std::f64::consts::PI;
    let ambient = catalog_get("hopf_eigenmap").unwrap();
    let source = ambient.map.source().clone();
    let target = Chart::new(2, "geodesic polar chart of S^2", move |y| {
        y[0] > 0.0 && y[0] < pi
    });
    let chart_map = SmoothMap::new(source, target.clone(), move |v| {
        let rho = &Jet2::constant(pi, 3) - &v[0].scale(2.0);
        Ok(vec![rho, &v[1] - &v[2]])
    });
    let h = Metric::diagonal(target, |vars| {
        let s = vars[0].sin();
        Ok(vec![Jet2::constant(1.0, 2), &s * &s])
    });
    for x in ambient.samples.iter().step_by(13) {
        let e_ambient =
            energy_density(&ambient.map, &ambient.source_metric, &ambient.target_metric, x)
                .unwrap()
                .value();
        let e_chart = energy_density(&chart_map, &ambient.source_metric, &h, x).unwrap().value();
        assert!((e_ambient - e_chart).abs() < 1e-10 * e_ambient);
        // both sides are infinity harmonic here; compare norms directly
        let inf_chart = inf_laplacian_map(&chart_map, &ambient.source_metric, &h, x).unwrap();
        let y = chart_map.eval_values(x).unwrap();
        assert!(h.at(&y).unwrap().norm(&inf_chart) < 1e-6);
    }
}

/// The metric projection of the punctured plane onto the unit circle is
/// infinity harmonic: raw residual below 1e-8 on a 100-point annulus grid.
#[test]
fn circle_metric_projection_is_infinity_harmonic() {
    let entry = catalog_get("circle_projection").unwrap();
    let grid = annulus_grid((0.5, 1.5), 10, 10);
    assert_eq!(grid.len(), 100);
    for x in &grid {
        let v = inf_laplacian_map(&entry.map, &entry.source_metric, &entry.target_metric, x)
            .unwrap();
        assert!(v.norm() < 1e-8, "residual {} at {x:?}", v.norm());
    }
}

/// Componentwise Euclidean system versus the metric machinery: identical to
/// machine precision for flat source and target, across several maps.
#[test]
fn euclidean_system_agrees_with_metric_path() {
    for id in ["affine", "exp_trig", "cyclic_trig", "anisotropic_pullback", "eikonal_pair"] {
        let entry = catalog_get(id).unwrap();
        for x in entry.samples.iter().step_by(17) {
            let system = euclidean_system_residual(&entry.map, x).unwrap();
            let metric =
                inf_laplacian_map(&entry.map, &entry.source_metric, &entry.target_metric, x)
                    .unwrap();
            let scale = system.norm().max(1.0);
            assert!(
                (system - metric).norm() / scale < 1e-12,
                "{id}: paths disagree at {x:?}"
            );
        }
    }
}

/// The radial projection recovers its dilation lambda = 1/|x| from the
/// differential at every sample point.
#[test]
fn radial_projection_recovers_dilation() {
    let entry = catalog_get("radial_to_sphere").unwrap();
    let (c, reports) = classify_with_reports(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &entry.samples,
        1e-6,
    )
    .unwrap();
    assert!(c.has(Verdict::InfinityHarmonicMorphism));
    for r in &reports {
        let expected = 1.0 / r.point.iter().map(|v| v * v).sum::<f64>();
        assert!(
            (r.dilation_sq - expected).abs() < 1e-6,
            "dilation^2 {} vs 1/|x|^2 {} at {:?}",
            r.dilation_sq,
            expected,
            r.point
        );
    }
}

/// The quartic-root function |x|^{4/3} - |y|^{4/3} is infinity harmonic
/// everywhere off its axes: raw residuals below 1e-8 across the shipped
/// grid, including at (1, 1).
#[test]
fn quartic_root_function_is_infinity_harmonic_off_axes() {
    use infharm::inf_laplacian_function;
    let entry = catalog_get("aronsson").unwrap();
    let at_one_one =
        inf_laplacian_function(&entry.map, &entry.source_metric, &[1.0, 1.0]).unwrap();
    assert!(at_one_one.abs() < 1e-8, "residual {at_one_one} at (1,1)");
    for x in &entry.samples {
        let r = inf_laplacian_function(&entry.map, &entry.source_metric, x).unwrap();
        assert!(r.abs() < 1e-8, "residual {r} at {x:?}");
    }
}

/// At t = pi/4 the Clifford projection has rank 2 with vertical space
/// spanned by the t-direction (the projection kills it by construction).
#[test]
fn clifford_frame_at_diagonal_point() {
    let entry = catalog_get("clifford_torus").unwrap();
    let x = vec![std::f64::consts::FRAC_PI_4, 0.8, 1.9];
    let frame = differential_frame(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &x,
        DEFAULT_RANK_TOL,
    )
    .unwrap();
    assert_eq!(frame.rank, 2);
    assert_eq!(frame.vertical.len(), 1);
    assert!((frame.vertical[0][0].abs() - 1.0).abs() < 1e-10);
    assert!(frame.vertical[0][1].abs() < 1e-10);
    assert!(frame.vertical[0][2].abs() < 1e-10);
    // both dilations equal 2 at the diagonal point
    assert!((frame.dilations_sq[0] - 2.0).abs() < 1e-10);
    assert!((frame.dilations_sq[1] - 2.0).abs() < 1e-10);
}

/// Two distinct horizontal dilations on the Clifford projection at t = pi/6,
/// and the corresponding pullback-energy failure witness for theta_1.
#[test]
fn clifford_projection_is_not_conformal() {
    let entry = catalog_get("clifford_torus").unwrap();
    let x = vec![std::f64::consts::FRAC_PI_6, 1.0, 2.0];
    let frame = differential_frame(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &x,
        DEFAULT_RANK_TOL,
    )
    .unwrap();
    assert_eq!(frame.rank, 2);
    // dilations 1/sin^2, 1/cos^2 at t = pi/6: 4 and 4/3.
    assert!((frame.dilations_sq[0] - 4.0).abs() < 1e-10);
    assert!((frame.dilations_sq[1] - 4.0 / 3.0).abs() < 1e-10);

    let f = SmoothMap::scalar(Chart::euclidean(2), |v| Ok(v[0].clone()));
    let worst = pullback_energy_check(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &f,
        &[x],
    )
    .unwrap();
    assert!(worst > 0.1, "pullback witness too small: {worst}");
}

/// Pullback-energy identity holds for genuine morphisms: the radial
/// projection with an ambient coordinate function, lambda^2 = 1/|x|^2.
#[test]
fn pullback_energy_identity_for_radial_projection() {
    let entry = catalog_get("radial_to_sphere").unwrap();
    let f = SmoothMap::scalar(Chart::euclidean(3), |v| Ok(v[2].clone()));
    let samples: Vec<Vec<f64>> = entry.samples.iter().step_by(4).cloned().collect();
    let worst = pullback_energy_check(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &f,
        &samples,
    )
    .unwrap();
    assert!(worst < 1e-8, "worst residual {worst}");
}

/// The blow-up probe diverges like 1/r on anisotropic linear maps: a factor
/// over 10 across two decades of radius.
#[test]
fn blowup_probe_diverges_over_two_decades() {
    let a = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let radii = [1.0, 0.31622776601683794, 0.1, 0.03162277660168379, 0.01];
    let seq = morphism_blowup_probe(&a, &radii).unwrap();
    assert!(seq.windows(2).all(|w| w[1] > w[0]), "not increasing: {seq:?}");
    assert!(seq[4] / seq[0] > 10.0, "growth ratio {}", seq[4] / seq[0]);
}

/// Immersion criterion: since the differential of an immersion is
/// injective, the infinity Laplacian vanishes exactly where the energy
/// gradient does. An arc-length curve (constant energy) is infinity
/// harmonic; the same circle traversed at quadratic speed is not, and its
/// residual tracks the energy gradient pointwise.
#[test]
fn immersions_are_infinity_harmonic_iff_energy_is_constant() {
    let g = Metric::euclidean(1);
    let h = Metric::euclidean(2);
    // unit-speed circle: energy 1, infinity harmonic
    let unit_speed = catalog_get("arc_length_circle").unwrap();
    for x in unit_speed.samples.iter().step_by(20) {
        let v = inf_laplacian_map(&unit_speed.map, &g, &h, x).unwrap();
        assert!(v.norm() < 1e-12);
    }
    // reparameterized circle s -> (cos s^2, sin s^2): energy 4 s^2
    let quadratic = SmoothMap::new(Chart::euclidean(1), Chart::euclidean(2), |v| {
        let s2 = &v[0] * &v[0];
        Ok(vec![s2.cos(), s2.sin()])
    });
    for s in [0.5_f64, 1.0, 1.7] {
        let x = [s];
        let e = energy_density(&quadratic, &g, &h, &x).unwrap();
        assert!((e.value() - 4.0 * s * s).abs() < 1e-12);
        let residual = inf_laplacian_map(&quadratic, &g, &h, &x).unwrap().norm();
        // |Delta_inf| = (1/2) |d gamma(e')| = |e'| |gamma'| / 2 = 8 s^2
        assert!((residual - 8.0 * s * s).abs() < 1e-10, "residual {residual} at s = {s}");
    }
}

/// Tension and infinity Laplacian of the arc-length circle: tau is the
/// curvature vector while the infinity Laplacian vanishes.
#[test]
fn arc_length_curve_report() {
    let entry = catalog_get("arc_length_circle").unwrap();
    let report = map_report(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &[1.2],
        DEFAULT_RANK_TOL,
    )
    .unwrap();
    assert!((report.energy_density - 1.0).abs() < 1e-12);
    assert!((report.tension.norm() - 1.0).abs() < 1e-10);
    assert!(report.infinity_residual < 1e-10);
    assert_eq!(report.rank, 1);
    assert!(!report.onto);
}

/// Sol-space projection: the energy gradient is vertical (the defining
/// mechanism for warped-product projections), so the map is infinity
/// harmonic without being conformal. It is also an honest harmonic map
/// (vanishing tension), so it sits in the p-harmonic-for-every-p class.
#[test]
fn sol_projection_energy_gradient_is_vertical() {
    let entry = catalog_get("sol_projection").unwrap();
    let c = classify(
        &entry.map,
        &entry.source_metric,
        &entry.target_metric,
        &entry.samples,
        1e-6,
    )
    .unwrap();
    assert!(c.has(Verdict::InfinityHarmonic));
    assert!(!c.has(Verdict::Hwc));
    assert!(c.worst.verticality < 1e-10, "verticality {}", c.worst.verticality);
    let x = vec![0.3, -0.5, 0.4];
    let tau = tension_field(&entry.map, &entry.source_metric, &entry.target_metric, &x).unwrap();
    assert!(tau.norm() < 1e-12, "Sol projection is harmonic; tau = {}", tau.norm());
    for p in [3.0, 5.0, 9.0] {
        let v = p_laplacian(&entry.map, &entry.source_metric, &entry.target_metric, &x, p)
            .unwrap();
        assert!(v.norm() < 1e-12, "p = {p}");
    }
}
