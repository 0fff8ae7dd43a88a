//! Builders for composite infinity harmonic maps, and a registry of worked
//! example maps.
//!
//! The builders cover the standard ways of composing infinity harmonic maps
//! into Euclidean space: scaling a function along a fixed line, tuples of
//! eikonal infinity harmonic functions, products over product metrics, and
//! direct sums. Each builder validates its hypotheses numerically before
//! handing back the composite map.
//!
//! The catalog ships every explicit example map in scope, bundled with its
//! source and target metrics, a singularity-free sample grid, its expected
//! energy density (closed form where one exists), and its expected
//! classification. Catalog ids are stable public strings.

use std::collections::BTreeSet;
use std::sync::{Arc, LazyLock};

use crate::error::{Error, Result};
use crate::geometry::{Chart, Metric, SmoothMap, metric_gradient_norm_sq};
use crate::jet::Jet2;
use crate::operators::{Verdict, energy_density, inf_laplacian_map};

/// Closed-form energy profile as a function of the sample point.
pub type EnergyProfile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Expected energy density of a catalog entry.
#[derive(Clone)]
pub enum EnergyExpectation {
    /// Constant on the whole sample region.
    Constant(f64),
    /// Closed-form profile as a function of the sample point.
    Profile(EnergyProfile),
    /// No closed form shipped.
    Nonconstant,
}

impl std::fmt::Debug for EnergyExpectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnergyExpectation::Constant(c) => write!(f, "Constant({c})"),
            EnergyExpectation::Profile(_) => write!(f, "Profile(..)"),
            EnergyExpectation::Nonconstant => write!(f, "Nonconstant"),
        }
    }
}

/// A registered example map with everything needed to verify it.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: &'static str,
    /// What the map is, in words.
    pub description: &'static str,
    pub map: SmoothMap,
    pub source_metric: Metric,
    pub target_metric: Metric,
    pub expected_energy: EnergyExpectation,
    /// Exact expected verdict set at the catalog tolerance.
    pub expected_verdicts: BTreeSet<Verdict>,
    /// Shipped singularity-free sample grid.
    pub samples: Vec<Vec<f64>>,
    /// For negative controls: the classification's worst normalized
    /// infinity-harmonicity residual must exceed this at some grid point.
    pub min_infinity_residual: Option<f64>,
}

/// Uniform tensor grid over per-axis ranges (inclusive endpoints).
pub fn tensor_grid(ranges: &[(f64, f64)], counts: &[usize]) -> Vec<Vec<f64>> {
    assert_eq!(ranges.len(), counts.len());
    let axes: Vec<Vec<f64>> = ranges
        .iter()
        .zip(counts)
        .map(|(&(lo, hi), &n)| {
            assert!(n >= 1);
            if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// Polar annulus grid in the plane: radii x angles mapped to Cartesian.
pub fn annulus_grid(r_range: (f64, f64), radii: usize, angles: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let r = r_range.0
            + (r_range.1 - r_range.0) * i as f64 / (radii.max(2) - 1) as f64;
        for j in 0..angles {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
            out.push(vec![r * theta.cos(), r * theta.sin()]);
        }
    }
    out
}

fn validate_scalar_component(
    index: usize,
    u: &SmoothMap,
    g: &Metric,
    samples: &[Vec<f64>],
    tol: f64,
    require_eikonal: bool,
) -> Result<()> {
    if u.target().dim() != 1 {
        return Err(Error::InvalidComponent { index, reason: "component is not scalar".into() });
    }
    let mut norms = Vec::with_capacity(samples.len());
    for x in samples {
        let residual = inf_laplacian_map(u, g, &Metric::euclidean(1), x)?.norm();
        if residual > tol {
            return Err(Error::InvalidComponent {
                index,
                reason: format!(
                    "infinity Laplacian residual {residual:.3e} exceeds {tol:.1e} at {x:?}"
                ),
            });
        }
        norms.push(metric_gradient_norm_sq(u, g, x)?);
    }
    if require_eikonal {
        let max = norms.iter().cloned().fold(f64::MIN, f64::max);
        let min = norms.iter().cloned().fold(f64::MAX, f64::min);
        if max - min > tol * max.abs().max(1.0) {
            return Err(Error::InvalidComponent {
                index,
                reason: format!("|grad|^2 is not constant: spread {:.3e}", max - min),
            });
        }
    }
    Ok(())
}

/// Scale an infinity harmonic function along a fixed direction:
/// x -> u(x) (a_1, ..., a_n). Post-composition with a homothetic line
/// preserves infinity harmonicity.
pub fn build_line_map(u: &SmoothMap, direction: &[f64]) -> Result<SmoothMap> {
    if u.target().dim() != 1 {
        return Err(Error::InvalidArgument("line map needs a scalar function".into()));
    }
    if direction.is_empty() || direction.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidArgument("line map direction must be nonzero".into()));
    }
    let dir = direction.to_vec();
    let u = u.clone();
    Ok(SmoothMap::from_point_fn(
        u.source().clone(),
        Chart::euclidean(dir.len()),
        move |x| {
            let jet = u.eval_jets(x)?.pop().expect("scalar component");
            Ok(dir.iter().map(|&a| jet.scale(a)).collect())
        },
    ))
}

/// Tuple of eikonal infinity harmonic functions on a shared source.
///
/// Each component must be infinity harmonic with constant |grad|^2 on the
/// validation samples (tolerance `tol`); the tuple then has constant energy
/// density, hence is infinity harmonic.
pub fn build_eikonal_tuple(
    components: &[SmoothMap],
    g: &Metric,
    validation: &[Vec<f64>],
    tol: f64,
) -> Result<SmoothMap> {
    if components.is_empty() {
        return Err(Error::InvalidArgument("eikonal tuple needs at least one component".into()));
    }
    if validation.is_empty() {
        return Err(Error::InvalidArgument("eikonal tuple needs validation samples".into()));
    }
    for (k, u) in components.iter().enumerate() {
        validate_scalar_component(k, u, g, validation, tol, true)?;
    }
    let comps: Vec<SmoothMap> = components.to_vec();
    let target = Chart::euclidean(comps.len());
    Ok(SmoothMap::from_point_fn(components[0].source().clone(), target, move |x| {
        comps
            .iter()
            .map(|u| Ok(u.eval_jets(x)?.pop().expect("scalar component")))
            .collect()
    }))
}

/// Map (x, y) -> (u(x), v(y)) on the product chart with metric g + h,
/// from two infinity harmonic functions on the factors.
pub fn build_product_map(
    u: &SmoothMap,
    g: &Metric,
    v: &SmoothMap,
    h: &Metric,
    validation_u: &[Vec<f64>],
    validation_v: &[Vec<f64>],
    tol: f64,
) -> Result<(SmoothMap, Metric)> {
    validate_scalar_component(0, u, g, validation_u, tol, false)?;
    validate_scalar_component(1, v, h, validation_v, tol, false)?;
    let m = u.source().dim();
    let n = v.source().dim();
    let chart = product_chart(u.source(), v.source());
    let metric = product_metric(&chart, g, h);
    let (u, v) = (u.clone(), v.clone());
    let map = SmoothMap::from_point_fn(chart, Chart::euclidean(2), move |x| {
        let ju = u.eval_jets(&x[..m])?.pop().expect("scalar");
        let jv = v.eval_jets(&x[m..])?.pop().expect("scalar");
        Ok(vec![ju.extended(m + n, 0), jv.extended(m + n, m)])
    });
    Ok((map, metric))
}

/// Direct sum (phi + psi)(p, q) = phi(p) + psi(q) of two infinity harmonic
/// maps into the same Euclidean target, on the product source.
pub fn build_direct_sum(
    phi: &SmoothMap,
    g: &Metric,
    psi: &SmoothMap,
    h: &Metric,
    validation_phi: &[Vec<f64>],
    validation_psi: &[Vec<f64>],
    tol: f64,
) -> Result<(SmoothMap, Metric)> {
    let n = phi.target().dim();
    if psi.target().dim() != n {
        return Err(Error::InvalidArgument(format!(
            "direct sum needs matching targets: {} vs {}",
            n,
            psi.target().dim()
        )));
    }
    for (index, (map, metric, samples)) in
        [(phi, g, validation_phi), (psi, h, validation_psi)].iter().enumerate()
    {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("direct sum needs validation samples".into()));
        }
        for x in *samples {
            let target = Metric::euclidean(n);
            let residual = inf_laplacian_map(map, metric, &target, x)?.norm();
            if residual > tol {
                return Err(Error::InvalidComponent {
                    index,
                    reason: format!(
                        "infinity Laplacian residual {residual:.3e} exceeds {tol:.1e} at {x:?}"
                    ),
                });
            }
        }
    }
    let m = phi.source().dim();
    let k = psi.source().dim();
    let chart = product_chart(phi.source(), psi.source());
    let metric = product_metric(&chart, g, h);
    let (phi, psi) = (phi.clone(), psi.clone());
    let map = SmoothMap::from_point_fn(chart, Chart::euclidean(n), move |x| {
        let ja = phi.eval_jets(&x[..m])?;
        let jb = psi.eval_jets(&x[m..])?;
        Ok(ja
            .iter()
            .zip(&jb)
            .map(|(a, b)| &a.extended(m + k, 0) + &b.extended(m + k, m))
            .collect())
    });
    Ok((map, metric))
}

fn product_chart(a: &Chart, b: &Chart) -> Chart {
    let (m, n) = (a.dim(), b.dim());
    let label = format!("{} x {}", a.label(), b.label());
    let (a, b) = (a.clone(), b.clone());
    Chart::new(m + n, label, move |x| a.contains(&x[..m]) && b.contains(&x[m..]))
}

fn product_metric(chart: &Chart, g: &Metric, h: &Metric) -> Metric {
    let m = g.chart().dim();
    let n = h.chart().dim();
    let total = m + n;
    let (g, h) = (g.clone(), h.clone());
    Metric::new(chart.clone(), move |x| {
        let gp = g.at(&x[..m])?;
        let hp = h.at(&x[m..])?;
        let mut entries = vec![Jet2::constant(0.0, total); total * total];
        for i in 0..m {
            for j in 0..m {
                entries[i * total + j] = gp.jet(i, j).extended(total, 0);
            }
        }
        for i in 0..n {
            for j in 0..n {
                entries[(m + i) * total + (m + j)] = hp.jet(i, j).extended(total, m);
            }
        }
        Ok(entries)
    })
}

/// Result of the identity-map trace criterion.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub is_inf_harmonic: bool,
    /// Trace_g h at each sample, in sample order.
    pub trace_values: Vec<f64>,
}

/// The identity map (M, g) -> (M, h) is infinity harmonic exactly when
/// Trace_g h = g^{ab} h_{ab} is constant.
pub fn check_identity_map(
    g: &Metric,
    h: &Metric,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<IdentityCheck> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("identity check needs samples".into()));
    }
    let d = g.chart().dim();
    let mut traces = Vec::with_capacity(samples.len());
    for x in samples {
        let ginv = g.at(x)?.inverse().clone();
        let hp = h.at(x)?;
        let mut trace = 0.0;
        for a in 0..d {
            for b in 0..d {
                trace += ginv[(a, b)] * hp.values()[(a, b)];
            }
        }
        traces.push(trace);
    }
    let max = traces.iter().cloned().fold(f64::MIN, f64::max);
    let min = traces.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max - min;
    Ok(IdentityCheck { is_inf_harmonic: spread < tol * max.abs().max(1.0), trace_values: traces })
}

fn verdicts(list: &[Verdict]) -> BTreeSet<Verdict> {
    list.iter().copied().collect()
}

fn morphism_verdicts() -> BTreeSet<Verdict> {
    verdicts(&[
        Verdict::InfinityHarmonic,
        Verdict::Hwc,
        Verdict::HorizontallyHomothetic,
        Verdict::InfinityHarmonicMorphism,
    ])
}

fn norm_sq_jet(vars: &[Jet2]) -> Jet2 {
    let mut sum = Jet2::constant(0.0, vars[0].dim());
    for v in vars {
        sum = &sum + &(v * v);
    }
    sum
}

/// Clifford chart (t, theta1, theta2) on (0, pi/2) x S^1 x S^1 with metric
/// dt^2 + sin^2 t dtheta1^2 + cos^2 t dtheta2^2.
fn clifford_chart_and_metric() -> (Chart, Metric) {
    let chart = Chart::new(3, "(0, pi/2) x S^1 x S^1", |x| {
        x[0] > 0.0 && x[0] < std::f64::consts::FRAC_PI_2
    });
    let metric = Metric::diagonal(chart.clone(), |vars| {
        let s = vars[0].sin();
        let c = vars[0].cos();
        Ok(vec![Jet2::constant(1.0, 3), &s * &s, &c * &c])
    });
    (chart, metric)
}

fn arctan_ratio_map() -> SmoothMap {
    SmoothMap::scalar(Chart::new(2, "half plane x2 > 0", |x| x[1] > 0.0), |vars| {
        Ok(vars[0].div(&vars[1])?.atan())
    })
}

fn aronsson_map() -> SmoothMap {
    SmoothMap::scalar(Chart::new(2, "plane minus axes", |x| x[0] != 0.0 && x[1] != 0.0), |vars| {
        Ok(&vars[0].abs_powf(4.0 / 3.0)? - &vars[1].abs_powf(4.0 / 3.0)?)
    })
}

fn aronsson_samples() -> Vec<Vec<f64>> {
    let mut pts = tensor_grid(&[(0.1, 1.1), (0.1, 1.1)], &[6, 6]);
    pts.extend(tensor_grid(&[(-1.1, -0.1), (0.1, 1.1)], &[6, 6]));
    pts
}

fn build_catalog() -> Vec<CatalogEntry> {
    let mut entries = Vec::new();
    let pi = std::f64::consts::PI;
    let half_pi = std::f64::consts::FRAC_PI_2;

    // Affine map R^3 -> R^2 with A = [[1,2,0],[0,1,1]], b = (1,-1):
    // constant energy density sum a_ij^2 = 7.
    entries.push(CatalogEntry {
        id: "affine",
        description: "affine map X -> AX + b between Euclidean spaces",
        map: SmoothMap::new(Chart::euclidean(3), Chart::euclidean(2), |v| {
            Ok(vec![
                &(&v[0] + &v[1].scale(2.0)) + &Jet2::constant(1.0, 3),
                &(&v[1] + &v[2]) + &Jet2::constant(-1.0, 3),
            ])
        }),
        source_metric: Metric::euclidean(3),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(7.0),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], &[6, 6, 6]),
        min_infinity_residual: None,
    });

    // x -> sum_k lambda_k e^{i x_k} with lambda = (1,1,1): energy 3.
    entries.push(CatalogEntry {
        id: "exp_trig",
        description: "complex-exponential sum (sum cos x_k, sum sin x_k), unit weights",
        map: SmoothMap::new(Chart::euclidean(3), Chart::euclidean(2), |v| {
            let re = &(&v[0].cos() + &v[1].cos()) + &v[2].cos();
            let im = &(&v[0].sin() + &v[1].sin()) + &v[2].sin();
            Ok(vec![re, im])
        }),
        source_metric: Metric::euclidean(3),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(3.0),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)], &[6, 6, 6]),
        min_infinity_residual: None,
    });

    // Cyclic trigonometric self-map of R^3: energy m = 3.
    entries.push(CatalogEntry {
        id: "cyclic_trig",
        description: "cyclic map (cos x1 + sin x2, cos x2 + sin x3, cos x3 + sin x1)",
        map: SmoothMap::new(Chart::euclidean(3), Chart::euclidean(3), |v| {
            Ok(vec![
                &v[0].cos() + &v[1].sin(),
                &v[1].cos() + &v[2].sin(),
                &v[2].cos() + &v[0].sin(),
            ])
        }),
        source_metric: Metric::euclidean(3),
        target_metric: Metric::euclidean(3),
        expected_energy: EnergyExpectation::Constant(3.0),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)], &[6, 6, 6]),
        min_infinity_residual: None,
    });

    // Identity of the Euclidean plane: an isometry, hence a morphism.
    entries.push(CatalogEntry {
        id: "identity_plane",
        description: "identity map of the Euclidean plane",
        map: SmoothMap::identity(Chart::euclidean(2)),
        source_metric: Metric::euclidean(2),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(2.0),
        expected_verdicts: morphism_verdicts(),
        samples: tensor_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[7, 7]),
        min_infinity_residual: None,
    });

    // Unit-speed circle in the plane: an arc-length curve, energy 1.
    entries.push(CatalogEntry {
        id: "arc_length_circle",
        description: "unit circle traversed by arc length",
        map: SmoothMap::new(Chart::euclidean(1), Chart::euclidean(2), |v| {
            Ok(vec![v[0].cos(), v[0].sin()])
        }),
        source_metric: Metric::euclidean(1),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(1.0),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(0.0, 6.2)], &[120]),
        min_infinity_residual: None,
    });

    // Projection of the Sol geometry (e^{2z} dx^2 + e^{-2z} dy^2 + dz^2)
    // onto the flat (x, y) plane: a multiply warped product projection with
    // energy e^{-2z} + e^{2z} (the reciprocal warpings).
    entries.push(CatalogEntry {
        id: "sol_projection",
        description: "projection of the Sol geometry onto its flat (x, y) plane",
        map: SmoothMap::new(Chart::euclidean(3), Chart::euclidean(2), |v| {
            Ok(vec![v[0].clone(), v[1].clone()])
        }),
        source_metric: Metric::diagonal(Chart::euclidean(3), |vars| {
            let e2z = vars[2].scale(2.0).exp();
            let em2z = vars[2].scale(-2.0).exp();
            Ok(vec![e2z, em2z, Jet2::constant(1.0, 3)])
        }),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
            (-2.0 * x[2]).exp() + (2.0 * x[2]).exp()
        })),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(-1.0, 1.0), (-1.0, 1.0), (-0.8, 0.8)], &[5, 5, 9]),
        min_infinity_residual: None,
    });

    // Projection of the round 3-sphere minus two great circles onto the
    // Clifford torus: energy 1/sin^2 t + 1/cos^2 t, never conformal.
    {
        let (chart, metric) = clifford_chart_and_metric();
        entries.push(CatalogEntry {
            id: "clifford_torus",
            description: "projection of the 3-sphere onto the Clifford torus",
            map: SmoothMap::new(chart, Chart::euclidean(2), |v| {
                Ok(vec![v[1].clone(), v[2].clone()])
            }),
            source_metric: metric,
            target_metric: Metric::euclidean(2),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
                 1.0 / x[0].sin().powi(2) + 1.0 / x[0].cos().powi(2)
            })),
            expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
            samples: tensor_grid(&[(0.1, half_pi - 0.1), (0.0, 6.0), (0.0, 6.0)], &[7, 6, 6]),
            min_infinity_residual: None,
        });
    }

    // Orthogonal projection R^3 -> R^2: a Riemannian submersion.
    entries.push(CatalogEntry {
        id: "orthogonal_projection",
        description: "orthogonal projection of R^3 onto R^2",
        map: SmoothMap::new(Chart::euclidean(3), Chart::euclidean(2), |v| {
            Ok(vec![v[0].clone(), v[1].clone()])
        }),
        source_metric: Metric::euclidean(3),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(2.0),
        expected_verdicts: morphism_verdicts(),
        samples: tensor_grid(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], &[5, 5, 5]),
        min_infinity_residual: None,
    });

    // Radial projection of R^3 minus the origin onto the unit sphere,
    // through the ambient embedding: dilation 1/|x|, energy 2/|x|^2.
    entries.push(CatalogEntry {
        id: "radial_to_sphere",
        description: "radial projection x -> x/|x| onto the unit 2-sphere (ambient)",
        map: SmoothMap::new(
            Chart::new(3, "R^3 minus origin", |x| x.iter().any(|&c| c != 0.0)),
            Chart::embedded(3, 2, "unit sphere in R^3", |y| y.iter().any(|&c| c != 0.0)),
            |v| {
                let r = norm_sq_jet(v).sqrt()?;
                v.iter().map(|c| c.div(&r)).collect()
            },
        ),
        source_metric: Metric::euclidean_on(Chart::new(3, "R^3 minus origin", |x| {
            x.iter().any(|&c| c != 0.0)
        })),
        target_metric: Metric::euclidean(3),
        expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
            2.0 / x.iter().map(|c| c * c).sum::<f64>()
        })),
        expected_verdicts: morphism_verdicts(),
        samples: tensor_grid(&[(0.3, 1.1), (0.3, 1.1), (0.3, 1.1)], &[6, 6, 6]),
        min_infinity_residual: None,
    });

    // The 2-sphere minus its poles projected onto a circle along latitudes:
    // dilation 1/sin(phi).
    {
        let chart = Chart::new(2, "sphere minus poles (polar angle, longitude)", move |x| {
            x[0] > 0.0 && x[0] < pi
        });
        entries.push(CatalogEntry {
            id: "sphere_to_circle",
            description: "projection of the round 2-sphere minus poles onto a circle",
            map: SmoothMap::new(chart.clone(), Chart::euclidean(1), |v| Ok(vec![v[1].clone()])),
            source_metric: Metric::diagonal(chart, |vars| {
                let s = vars[0].sin();
                Ok(vec![Jet2::constant(1.0, 2), &s * &s])
            }),
            target_metric: Metric::euclidean(1),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| 1.0 / x[0].sin().powi(2))),
            expected_verdicts: morphism_verdicts(),
            samples: tensor_grid(&[(0.4, pi - 0.4), (0.0, 6.0)], &[8, 8]),
            min_infinity_residual: None,
        });
    }

    // Flat cone minus its apex projected onto a circle: dilation 1/r.
    {
        let chart = Chart::new(2, "cone minus apex (r, theta)", |x| x[0] > 0.0);
        entries.push(CatalogEntry {
            id: "cone_to_circle",
            description: "projection of a cone without its apex onto a circle",
            map: SmoothMap::new(chart.clone(), Chart::euclidean(1), |v| Ok(vec![v[1].clone()])),
            source_metric: Metric::diagonal(chart, |vars| {
                Ok(vec![Jet2::constant(1.0, 2), &vars[0] * &vars[0]])
            }),
            target_metric: Metric::euclidean(1),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| 1.0 / (x[0] * x[0]))),
            expected_verdicts: morphism_verdicts(),
            samples: tensor_grid(&[(0.5, 2.0), (0.0, 6.0)], &[8, 8]),
            min_infinity_residual: None,
        });
    }

    // arctan(x1/x2): an infinity harmonic function, hence a morphism.
    entries.push(CatalogEntry {
        id: "arctan_function",
        description: "the angle function arctan(x1/x2) on a half plane",
        map: arctan_ratio_map(),
        source_metric: Metric::euclidean_on(Chart::new(2, "half plane x2 > 0", |x| x[1] > 0.0)),
        target_metric: Metric::euclidean(1),
        expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
            1.0 / (x[0] * x[0] + x[1] * x[1])
        })),
        expected_verdicts: morphism_verdicts(),
        samples: tensor_grid(&[(-1.0, 1.0), (0.4, 1.4)], &[8, 8]),
        min_infinity_residual: None,
    });

    // Metric projection of the punctured plane onto the unit circle
    // (ambient): the orbit projection of the rotation action.
    entries.push(CatalogEntry {
        id: "circle_projection",
        description: "metric projection x -> x/|x| of the punctured plane onto the unit circle",
        map: SmoothMap::new(
            Chart::new(2, "plane minus origin", |x| x[0] != 0.0 || x[1] != 0.0),
            Chart::embedded(2, 1, "unit circle in R^2", |y| y.iter().any(|&c| c != 0.0)),
            |v| {
                let r = norm_sq_jet(v).sqrt()?;
                v.iter().map(|c| c.div(&r)).collect()
            },
        ),
        source_metric: Metric::euclidean_on(Chart::new(2, "plane minus origin", |x| {
            x[0] != 0.0 || x[1] != 0.0
        })),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
            1.0 / (x[0] * x[0] + x[1] * x[1])
        })),
        expected_verdicts: morphism_verdicts(),
        samples: annulus_grid((0.5, 1.5), 10, 10),
        min_infinity_residual: None,
    });

    // Degree-2 eigenmap: the Hopf fibration written on the Clifford chart of
    // S^3, composed into the ambient R^3 of the target 2-sphere. Constant
    // energy 8 and uniform dilation 2.
    {
        let (chart, metric) = clifford_chart_and_metric();
        entries.push(CatalogEntry {
            id: "hopf_eigenmap",
            description: "Hopf fibration S^3 -> S^2 as a quadratic eigenmap (ambient target)",
            map: SmoothMap::new(
                chart,
                Chart::embedded(3, 2, "unit sphere in R^3", |y| y.iter().any(|&c| c != 0.0)),
                |v| {
                    let two_t = v[0].scale(2.0);
                    let delta = &v[1] - &v[2];
                    Ok(vec![
                        &two_t.sin() * &delta.cos(),
                        &two_t.sin() * &delta.sin(),
                        -two_t.cos(),
                    ])
                },
            ),
            source_metric: metric,
            target_metric: Metric::euclidean(3),
            expected_energy: EnergyExpectation::Constant(8.0),
            expected_verdicts: morphism_verdicts(),
            samples: tensor_grid(&[(0.12, half_pi - 0.12), (0.0, 6.0), (0.0, 6.0)], &[7, 6, 6]),
            min_infinity_residual: None,
        });
    }

    // Eikonal pair (a x + b y + c, sqrt(x^2 + y^2)) on the punctured plane:
    // constant energy a^2 + b^2 + 1.
    {
        let chart = Chart::new(2, "plane minus origin", |x| x[0] != 0.0 || x[1] != 0.0);
        let g = Metric::euclidean_on(chart.clone());
        let linear = SmoothMap::scalar(chart.clone(), |v| {
            Ok(&(&v[0] + &v[1].scale(2.0)) + &Jet2::constant(0.5, 2))
        });
        let dist = SmoothMap::scalar(chart, |v| norm_sq_jet(v).sqrt());
        let mut samples = tensor_grid(&[(0.3, 1.2), (0.3, 1.2)], &[7, 7]);
        samples.extend(tensor_grid(&[(-1.2, -0.3), (0.3, 1.2)], &[7, 7]));
        let map = build_eikonal_tuple(&[linear, dist], &g, &samples, 1e-8)
            .expect("eikonal pair validates");
        entries.push(CatalogEntry {
            id: "eikonal_pair",
            description: "tuple of a linear function and the distance from the origin",
            map,
            source_metric: g,
            target_metric: Metric::euclidean(2),
            expected_energy: EnergyExpectation::Constant(6.0),
            expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
            samples,
            min_infinity_residual: None,
        });
    }

    // The classical C^{1,1/3} function |x|^{4/3} - |y|^{4/3}, smooth away
    // from the axes. As a nonvanishing-gradient scalar it is a morphism.
    entries.push(CatalogEntry {
        id: "aronsson",
        description: "the classical quartic-root function |x|^{4/3} - |y|^{4/3} off its axes",
        map: aronsson_map(),
        source_metric: Metric::euclidean_on(Chart::new(2, "plane minus axes", |x| {
            x[0] != 0.0 && x[1] != 0.0
        })),
        target_metric: Metric::euclidean(1),
        expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
            16.0 / 9.0 * (x[0].abs().powf(2.0 / 3.0) + x[1].abs().powf(2.0 / 3.0))
        })),
        expected_verdicts: morphism_verdicts(),
        samples: aronsson_samples(),
        min_infinity_residual: None,
    });

    // Product of two copies of the previous function: R^4 -> R^2 with
    // nonconstant energy (16/9) sum |x_i|^{2/3}.
    {
        let u = aronsson_map();
        let g = Metric::euclidean_on(Chart::new(2, "plane minus axes", |x| {
            x[0] != 0.0 && x[1] != 0.0
        }));
        let validation = aronsson_samples();
        let (map, metric) = build_product_map(&u, &g, &u, &g, &validation, &validation, 1e-8)
            .expect("product of infinity harmonic functions validates");
        entries.push(CatalogEntry {
            id: "product_aronsson",
            description: "product map pairing two quartic-root functions on R^4",
            map,
            source_metric: metric,
            target_metric: Metric::euclidean(2),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
                16.0 / 9.0 * x.iter().map(|c| c.abs().powf(2.0 / 3.0)).sum::<f64>()
            })),
            expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
            samples: tensor_grid(
                &[(0.15, 1.15), (0.15, 1.15), (0.15, 1.15), (0.15, 1.15)],
                &[5, 5, 5, 5],
            ),
            min_infinity_residual: None,
        });
    }

    // Identity of a unit ball near (2,2,2), Euclidean to the squared-ratio
    // metric sum (x_i^2/|x|^2) dx_i^2: Trace_g h = 1 identically.
    {
        let center = [2.0, 2.0, 2.0];
        let chart = Chart::new(3, "unit ball at (2,2,2)", move |x| {
            x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < 1.0
        });
        entries.push(CatalogEntry {
            id: "ball_identity",
            description: "identity of a unit ball, Euclidean metric to squared-ratio metric",
            map: SmoothMap::identity(chart.clone()),
            source_metric: Metric::euclidean_on(chart.clone()),
            target_metric: Metric::diagonal(chart, |vars| {
                let r2 = norm_sq_jet(vars);
                vars.iter().map(|v| (v * v).div(&r2)).collect()
            }),
            expected_energy: EnergyExpectation::Constant(1.0),
            expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
            samples: tensor_grid(&[(1.55, 2.45), (1.55, 2.45), (1.55, 2.45)], &[6, 6, 6]),
            min_infinity_residual: None,
        });
    }

    // arctan scaled along the direction (1, 1): a line map over an infinity
    // harmonic function, energy 2/|x|^2.
    {
        let map = build_line_map(&arctan_ratio_map(), &[1.0, 1.0]).expect("nonzero direction");
        entries.push(CatalogEntry {
            id: "line_map_arctan",
            description: "the angle function scaled along the line through (1, 1)",
            map,
            source_metric: Metric::euclidean_on(Chart::new(2, "half plane x2 > 0", |x| {
                x[1] > 0.0
            })),
            target_metric: Metric::euclidean(2),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
                2.0 / (x[0] * x[0] + x[1] * x[1])
            })),
            expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
            samples: tensor_grid(&[(-1.0, 1.0), (0.4, 1.4)], &[8, 8]),
            min_infinity_residual: None,
        });
    }

    // arctan(x1/x2) against the round-sphere metric in stereographic-type
    // coordinates F^{-2} delta with F = (1 + |x|^2)/2.
    {
        let chart = Chart::new(2, "stereographic plane, x2 > 0", |x| x[1] > 0.0);
        let factor = SmoothMap::scalar(chart.clone(), |v| {
            Ok((&norm_sq_jet(v) + &Jet2::constant(1.0, 2)).scale(0.5))
        });
        let g = Metric::scaled(&Metric::euclidean_on(chart.clone()), &factor, -2);
        entries.push(CatalogEntry {
            id: "sphere_arctan",
            description: "the angle function on the round sphere in stereographic coordinates",
            map: SmoothMap::scalar(chart, |vars| Ok(vars[0].div(&vars[1])?.atan())),
            source_metric: g,
            target_metric: Metric::euclidean(1),
            expected_energy: EnergyExpectation::Profile(Arc::new(|x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let f = 0.5 * (1.0 + r2);
                f * f / r2
            })),
            expected_verdicts: morphism_verdicts(),
            samples: tensor_grid(&[(-1.0, 1.0), (0.4, 1.4)], &[8, 8]),
            min_infinity_residual: None,
        });
    }

    // (a1 x1 + a2 x2) / (1 + |x|^2 - 2 x3) on the hyperbolic ball model
    // F^{-2} delta with F = (1 - |x|^2)/2, coefficients (1, 2).
    {
        let chart = Chart::new(3, "open unit ball", |x| {
            x.iter().map(|c| c * c).sum::<f64>() < 1.0
        });
        let factor = SmoothMap::scalar(chart.clone(), |v| {
            Ok((&Jet2::constant(1.0, 3) - &norm_sq_jet(v)).scale(0.5))
        });
        let g = Metric::scaled(&Metric::euclidean_on(chart.clone()), &factor, -2);
        entries.push(CatalogEntry {
            id: "hyperbolic_linear_fraction",
            description: "linear-fractional harmonic function on the hyperbolic ball model",
            map: SmoothMap::scalar(chart, |v| {
                let numerator = &v[0] + &v[1].scale(2.0);
                let denominator = &(&Jet2::constant(1.0, 3) + &norm_sq_jet(v)) - &v[2].scale(2.0);
                numerator.div(&denominator)
            }),
            source_metric: g,
            target_metric: Metric::euclidean(1),
            expected_energy: EnergyExpectation::Nonconstant,
            expected_verdicts: morphism_verdicts(),
            samples: tensor_grid(&[(-0.3, 0.3), (-0.3, 0.3), (-0.3, 0.3)], &[6, 6, 6]),
            min_infinity_residual: None,
        });
    }

    // diag(1, 2): constant energy (so infinity harmonic) but anisotropic,
    // hence not horizontally weakly conformal and not a morphism.
    entries.push(CatalogEntry {
        id: "anisotropic_linear",
        description: "the linear map diag(1, 2) of the plane",
        map: SmoothMap::new(Chart::euclidean(2), Chart::euclidean(2), |v| {
            Ok(vec![v[0].clone(), v[1].scale(2.0)])
        }),
        source_metric: Metric::euclidean(2),
        target_metric: Metric::euclidean(2),
        expected_energy: EnergyExpectation::Constant(5.0),
        expected_verdicts: verdicts(&[Verdict::InfinityHarmonic]),
        samples: tensor_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[6, 6]),
        min_infinity_residual: None,
    });

    // Negative control: distance function pulled back through the doubly
    // warped projection (warpings 1 + t^2 and 2 + t^2). The pullback is a
    // horizontally weakly conformal scalar but NOT infinity harmonic.
    {
        let chart = Chart::new(3, "doubly warped block", |x| x[1] != 0.0 || x[2] != 0.0);
        entries.push(CatalogEntry {
            id: "doubly_warped_composition",
            description: "distance function composed with a doubly warped product projection",
            map: SmoothMap::scalar(chart.clone(), |v| {
                (&(&v[1] * &v[1]) + &(&v[2] * &v[2])).sqrt()
            }),
            source_metric: Metric::diagonal(chart, |vars| {
                let alpha = &Jet2::constant(1.0, 3) + &(&vars[0] * &vars[0]);
                let beta = &Jet2::constant(2.0, 3) + &(&vars[0] * &vars[0]);
                Ok(vec![Jet2::constant(1.0, 3), &alpha * &alpha, &beta * &beta])
            }),
            target_metric: Metric::euclidean(1),
            expected_energy: EnergyExpectation::Nonconstant,
            expected_verdicts: verdicts(&[Verdict::Hwc]),
            samples: tensor_grid(&[(0.5, 1.5), (0.3, 1.0), (0.3, 1.0)], &[5, 5, 5]),
            min_infinity_residual: Some(1e-3),
        });
    }

    // Negative control: distance from the origin pulled back through
    // diag(1, 2). Horizontally weakly conformal as a scalar, not infinity
    // harmonic; its infinity Laplacian blows up toward the origin.
    entries.push(CatalogEntry {
        id: "anisotropic_pullback",
        description: "distance from the origin pulled back through diag(1, 2)",
        map: SmoothMap::scalar(Chart::new(2, "plane minus origin", |x| {
            x[0] != 0.0 || x[1] != 0.0
        }), |v| {
            (&(&v[0] * &v[0]) + &(&v[1] * &v[1]).scale(4.0)).sqrt()
        }),
        source_metric: Metric::euclidean_on(Chart::new(2, "plane minus origin", |x| {
            x[0] != 0.0 || x[1] != 0.0
        })),
        target_metric: Metric::euclidean(1),
        expected_energy: EnergyExpectation::Nonconstant,
        expected_verdicts: verdicts(&[Verdict::Hwc]),
        samples: annulus_grid((0.5, 1.5), 10, 10),
        min_infinity_residual: Some(1e-3),
    });

    entries
}

static CATALOG: LazyLock<Vec<CatalogEntry>> = LazyLock::new(build_catalog);

/// All registered catalog ids, sorted.
pub fn catalog_ids() -> Vec<&'static str> {
    let mut ids: Vec<&'static str> = CATALOG.iter().map(|e| e.id).collect();
    ids.sort_unstable();
    ids
}

/// Iterate over the registered entries in id order.
pub fn catalog_entries() -> Vec<&'static CatalogEntry> {
    let mut entries: Vec<&'static CatalogEntry> = CATALOG.iter().collect();
    entries.sort_by_key(|e| e.id);
    entries
}

/// Look up one entry by id.
pub fn catalog_get(id: &str) -> Result<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// Verify a single entry's energy expectation on its shipped grid; returns
/// the worst relative error (0 for entries without a closed form).
pub fn energy_check(entry: &CatalogEntry, rel_tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    match &entry.expected_energy {
        EnergyExpectation::Nonconstant => Ok(0.0),
        expectation => {
            for x in &entry.samples {
                let measured =
                    energy_density(&entry.map, &entry.source_metric, &entry.target_metric, x)?
                        .value();
                let expected = match expectation {
                    EnergyExpectation::Constant(c) => *c,
                    EnergyExpectation::Profile(f) => f(x),
                    EnergyExpectation::Nonconstant => unreachable!(),
                };
                let rel = (measured - expected).abs() / expected.abs().max(1e-300);
                worst = worst.max(rel);
                if rel > rel_tol {
                    return Err(Error::InvalidArgument(format!(
                        "entry `{}` energy mismatch at {:?}: measured {measured}, expected {expected}",
                        entry.id, x
                    )));
                }
            }
            Ok(worst)
        }
    }
}
