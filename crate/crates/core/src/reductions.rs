//! Rotationally symmetric profile reductions for maps into spheres.
//!
//! Two families are covered: maps of the punctured ball B^n into S^n of the
//! form (r, theta) -> (rho(r), theta), whose non-equator branch satisfies
//!
//! ```text
//! rho'^2 + (n - 1) sin^2(rho) / r^2 = C,
//! ```
//!
//! and maps of the flat cylinder into S^2 of the form
//! (s, t) -> (cos a(s), sin a(s) e^{ikt}), whose profile satisfies
//! a'^2 + k^2 sin^2 a = C. The latter splits into three branches: constant
//! profiles, the closed-form separatrix a = 2 arctan(e^{ks + A}) - pi/2 at
//! C = k^2, and circulating profiles for C > k^2 where theta = 2a solves the
//! undamped pendulum equation theta'' + k^2 sin theta = 0.
//!
//! Integration is classical fixed-step RK4: reproducible sample grids, drift
//! of the conserved quantity O(step^4). Solutions reconstruct into full
//! [`SmoothMap`]s over their sample parameters so the generic operators can
//! verify them end to end.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{Chart, Metric, SmoothMap};
use crate::jet::Jet2;
use crate::operators::{energy_density, inf_laplacian_map};

/// Which reduction a solution came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    /// rho = pi/2: the equator map x -> x/|x| on the punctured ball.
    Equator,
    /// rho(r) integrated from the profile equation on the ball.
    BallProfile,
    /// Constant cylinder profile (projection followed by a homothetic
    /// immersion onto a latitude circle).
    CylinderConstant,
    /// The closed-form separatrix profile at C = k^2.
    CylinderKink,
    /// Circulating pendulum profile with C > k^2.
    CylinderPendulum,
}

/// One profile sample: parameter, value, derivative.
#[derive(Clone, Copy, Debug)]
pub struct ProfileSample {
    pub parameter: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Parameters a solution was produced with.
#[derive(Clone, Debug, Default)]
pub struct ReductionParams {
    pub n: Option<usize>,
    pub k: Option<i32>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub initial: Option<(f64, f64)>,
    pub step: f64,
    /// Detected circulation period of the pendulum branch.
    pub period: Option<f64>,
}

/// A sampled profile with its conserved quantity.
#[derive(Clone, Debug)]
pub struct ReductionSolution {
    pub kind: ReductionKind,
    pub samples: Vec<ProfileSample>,
    /// The constant C of the profile equation. `None` for the equator
    /// branch, whose profile-equation quantity (n-1)/r^2 genuinely varies;
    /// its energy profile is checked pointwise instead.
    pub conserved_constant: Option<f64>,
    pub params: ReductionParams,
    /// Parameter at which the square root in the ball equation turned
    /// negative and integration stopped.
    pub turning_point: Option<f64>,
}

impl ReductionSolution {
    /// Profile-equation residual at sample `i` (zero for the equator kind).
    pub fn invariant_residual(&self, i: usize) -> f64 {
        let s = &self.samples[i];
        match (self.kind, self.conserved_constant) {
            (ReductionKind::Equator, _) => 0.0,
            (ReductionKind::BallProfile, Some(c)) => {
                let n = self.params.n.expect("ball profile stores n") as f64;
                (s.derivative * s.derivative
                    + (n - 1.0) * s.value.sin().powi(2) / (s.parameter * s.parameter)
                    - c)
                    .abs()
            }
            (_, Some(c)) => {
                let k = f64::from(self.params.k.expect("cylinder kinds store k"));
                (s.derivative * s.derivative + k * k * s.value.sin().powi(2) - c).abs()
            }
            (_, None) => 0.0,
        }
    }

    pub fn max_invariant_residual(&self) -> f64 {
        (0..self.samples.len()).map(|i| self.invariant_residual(i)).fold(0.0, f64::max)
    }

    /// Second derivative of the profile at sample `i`, from the branch's own
    /// differential equation (not from finite differences).
    pub fn second_derivative(&self, i: usize) -> f64 {
        let s = &self.samples[i];
        match self.kind {
            ReductionKind::Equator | ReductionKind::CylinderConstant => 0.0,
            ReductionKind::CylinderKink | ReductionKind::CylinderPendulum => {
                let k = f64::from(self.params.k.expect("cylinder kinds store k"));
                -k * k * s.value.sin() * s.value.cos()
            }
            ReductionKind::BallProfile => {
                // rho'' = d/dr f(r, rho) with rho' = f = sign sqrt(C - (n-1) sin^2 rho / r^2)
                let n = self.params.n.expect("ball profile stores n") as f64;
                let (r, rho, drho) = (s.parameter, s.value, s.derivative);
                if drho == 0.0 {
                    return 0.0;
                }
                ((n - 1.0) * rho.sin().powi(2) / (r * r * r)
                    - (n - 1.0) * rho.sin() * rho.cos() * drho / (r * r))
                    / drho
            }
        }
    }

    /// Write `parameter,value,derivative,invariant_residual` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "parameter,value,derivative,invariant_residual")?;
        for i in 0..self.samples.len() {
            let s = &self.samples[i];
            writeln!(
                w,
                "{},{},{},{}",
                s.parameter,
                s.value,
                s.derivative,
                self.invariant_residual(i)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// One classical RK4 step for a first-order system.
fn rk4_step<F: Fn(f64, &[f64]) -> Option<Vec<f64>>>(
    f: &F,
    t: f64,
    y: &[f64],
    h: f64,
) -> Option<Vec<f64>> {
    let k1 = f(t, y)?;
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(yi, ki)| yi + 0.5 * h * ki).collect();
    let k2 = f(t + 0.5 * h, &y2)?;
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(yi, ki)| yi + 0.5 * h * ki).collect();
    let k3 = f(t + 0.5 * h, &y3)?;
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(yi, ki)| yi + h * ki).collect();
    let k4 = f(t + h, &y4)?;
    Some(
        y.iter()
            .enumerate()
            .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect(),
    )
}

/// Sign of the profile slope chosen by the caller; the profile equation is
/// first order in rho'^2, so the branch is a modeling decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileSign {
    Increasing,
    Decreasing,
}

impl ProfileSign {
    fn factor(self) -> f64 {
        match self {
            ProfileSign::Increasing => 1.0,
            ProfileSign::Decreasing => -1.0,
        }
    }
}

/// Integrate the ball profile rho' = sign sqrt(C - (n-1) sin^2 rho / r^2)
/// backwards from rho(1) = pi/2 down to `r_min`.
///
/// Needs C >= n - 1 for a real slope at r = 1. If the square-root argument
/// turns negative along the way, integration stops there and the turning
/// point is recorded on the solution.
pub fn solve_ball_profile(
    n: usize,
    c: f64,
    r_min: f64,
    sign: ProfileSign,
    step: f64,
) -> Result<ReductionSolution> {
    if n < 2 {
        return Err(Error::InvalidArgument("ball profile needs n >= 2".into()));
    }
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::InvalidArgument("ball profile needs 0 < r_min < 1".into()));
    }
    if step <= 0.0 {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let minimum = (n - 1) as f64;
    if c < minimum {
        return Err(Error::InfeasibleConstant { c, minimum });
    }
    let nm1 = (n - 1) as f64;
    let slope = move |r: f64, y: &[f64]| -> Option<Vec<f64>> {
        let arg = c - nm1 * y[0].sin().powi(2) / (r * r);
        if arg < 0.0 {
            return None;
        }
        Some(vec![sign.factor() * arg.sqrt()])
    };

    let mut samples = Vec::new();
    let mut turning_point = None;
    let mut r = 1.0;
    let mut y = vec![std::f64::consts::FRAC_PI_2];
    let record =
        |samples: &mut Vec<ProfileSample>, r: f64, rho: f64, drho: f64| {
            samples.push(ProfileSample { parameter: r, value: rho, derivative: drho });
        };
    match slope(r, &y) {
        Some(d) => record(&mut samples, r, y[0], d[0]),
        None => return Err(Error::InfeasibleConstant { c, minimum }),
    }
    while r > r_min + 1e-12 {
        let h = -step.min(r - r_min);
        match rk4_step(&slope, r, &y, h) {
            Some(next) => {
                r += h;
                y = next;
                match slope(r, &y) {
                    Some(d) => record(&mut samples, r, y[0], d[0]),
                    None => {
                        turning_point = Some(r);
                        break;
                    }
                }
            }
            None => {
                turning_point = Some(r);
                break;
            }
        }
    }
    samples.reverse();
    Ok(ReductionSolution {
        kind: ReductionKind::BallProfile,
        samples,
        conserved_constant: Some(c),
        params: ReductionParams { n: Some(n), c: Some(c), step, ..Default::default() },
        turning_point,
    })
}

/// The equator branch rho = pi/2 on the annulus r in [r_min, 1], sampled for
/// reconstruction. Its energy profile is (n-1)/r^2, not a constant.
pub fn equator_solution(n: usize, r_min: f64, step: f64) -> Result<ReductionSolution> {
    if n < 2 {
        return Err(Error::InvalidArgument("equator map needs n >= 2".into()));
    }
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::InvalidArgument("equator map needs 0 < r_min < 1".into()));
    }
    let count = ((1.0 - r_min) / step).ceil() as usize + 1;
    let samples = (0..count)
        .map(|i| {
            let r = (r_min + i as f64 * step).min(1.0);
            ProfileSample { parameter: r, value: std::f64::consts::FRAC_PI_2, derivative: 0.0 }
        })
        .collect();
    Ok(ReductionSolution {
        kind: ReductionKind::Equator,
        samples,
        conserved_constant: None,
        params: ReductionParams { n: Some(n), step, ..Default::default() },
        turning_point: None,
    })
}

/// Sample the closed-form separatrix a(s) = 2 arctan(e^{ks + A}) - pi/2.
///
/// Analytically a' = k / cosh(ks + A) and sin a = tanh(ks + A), so
/// a'^2 + k^2 sin^2 a = k^2 exactly.
pub fn cylinder_kink(k: i32, a: f64, s_range: (f64, f64), step: f64) -> Result<ReductionSolution> {
    if k == 0 {
        return Err(Error::InvalidArgument("cylinder profile needs k != 0".into()));
    }
    if step <= 0.0 || s_range.1 <= s_range.0 {
        return Err(Error::InvalidArgument("kink needs a positive step and a proper range".into()));
    }
    let kf = f64::from(k);
    let count = ((s_range.1 - s_range.0) / step).round() as usize + 1;
    let samples = (0..count)
        .map(|i| {
            let s = s_range.0 + i as f64 * step;
            let w = kf * s + a;
            ProfileSample {
                parameter: s,
                value: 2.0 * w.exp().atan() - std::f64::consts::FRAC_PI_2,
                derivative: kf / w.cosh(),
            }
        })
        .collect();
    Ok(ReductionSolution {
        kind: ReductionKind::CylinderKink,
        samples,
        conserved_constant: Some(kf * kf),
        params: ReductionParams { k: Some(k), a: Some(a), c: Some(kf * kf), step, ..Default::default() },
        turning_point: None,
    })
}

/// Constant cylinder profile a = alpha0 (projection onto the second factor
/// followed by a homothetic immersion onto a latitude circle).
pub fn cylinder_constant(
    k: i32,
    alpha0: f64,
    s_range: (f64, f64),
    step: f64,
) -> Result<ReductionSolution> {
    if k == 0 {
        return Err(Error::InvalidArgument("cylinder profile needs k != 0".into()));
    }
    if step <= 0.0 || s_range.1 <= s_range.0 {
        return Err(Error::InvalidArgument("constant branch needs a positive step and range".into()));
    }
    let kf = f64::from(k);
    let c = kf * kf * alpha0.sin().powi(2);
    let count = ((s_range.1 - s_range.0) / step).round() as usize + 1;
    let samples = (0..count)
        .map(|i| ProfileSample {
            parameter: s_range.0 + i as f64 * step,
            value: alpha0,
            derivative: 0.0,
        })
        .collect();
    Ok(ReductionSolution {
        kind: ReductionKind::CylinderConstant,
        samples,
        conserved_constant: Some(c),
        params: ReductionParams {
            k: Some(k),
            c: Some(c),
            initial: Some((alpha0, 0.0)),
            step,
            ..Default::default()
        },
        turning_point: None,
    })
}

/// Integrate the circulating pendulum branch: theta = 2a solves
/// theta'' + k^2 sin theta = 0, with C = a'^2 + k^2 sin^2 a > k^2.
///
/// Initial data (alpha0, dalpha0) must satisfy the constant C. The detected
/// period T is the first return of (a mod 2pi, a') to the initial data,
/// located by linear interpolation between steps; the map then factors
/// through the torus R/(T Z) x S^1.
pub fn cylinder_pendulum(
    k: i32,
    c: f64,
    alpha0: f64,
    dalpha0: f64,
    s_max: f64,
    step: f64,
) -> Result<ReductionSolution> {
    if k == 0 {
        return Err(Error::InvalidArgument("cylinder profile needs k != 0".into()));
    }
    if step <= 0.0 || s_max <= 0.0 {
        return Err(Error::InvalidArgument("pendulum needs a positive step and horizon".into()));
    }
    let kf = f64::from(k);
    let k_sq = kf * kf;
    if c <= k_sq {
        let hint = if (c - k_sq).abs() <= 1e-12 * k_sq.max(1.0) {
            "C = k^2 is the separatrix; use the kink branch".to_string()
        } else {
            "C < k^2 has no circulating profile; use the constant branch (or the kink at C = k^2)"
                .to_string()
        };
        return Err(Error::WrongRegime { c, k_sq, hint });
    }
    let measured = dalpha0 * dalpha0 + k_sq * alpha0.sin().powi(2);
    if (measured - c).abs() > 1e-9 * c.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "initial data gives a'^2 + k^2 sin^2 a = {measured}, not the requested C = {c}"
        )));
    }

    // Integrate theta = 2 a.
    let f = |_s: f64, y: &[f64]| -> Option<Vec<f64>> { Some(vec![y[1], -k_sq * y[0].sin()]) };
    let mut samples = Vec::new();
    let mut s = 0.0;
    let mut y = vec![2.0 * alpha0, 2.0 * dalpha0];
    samples.push(ProfileSample { parameter: s, value: y[0] / 2.0, derivative: y[1] / 2.0 });

    let target = 2.0 * std::f64::consts::PI * dalpha0.signum();
    let mut period = None;
    while s < s_max - 1e-12 {
        let h = step.min(s_max - s);
        let next = rk4_step(&f, s, &y, h).expect("pendulum field is total");
        let prev_alpha = y[0] / 2.0;
        s += h;
        y = next;
        let alpha = y[0] / 2.0;
        samples.push(ProfileSample { parameter: s, value: alpha, derivative: y[1] / 2.0 });
        if period.is_none() && dalpha0 != 0.0 {
            let before = prev_alpha - alpha0 - target;
            let after = alpha - alpha0 - target;
            if before.signum() != after.signum() && before != 0.0 {
                // Linear interpolation of the crossing inside the step.
                let frac = before.abs() / (before.abs() + after.abs());
                period = Some(s - h + frac * h);
            }
        }
    }

    Ok(ReductionSolution {
        kind: ReductionKind::CylinderPendulum,
        samples,
        conserved_constant: Some(c),
        params: ReductionParams {
            k: Some(k),
            c: Some(c),
            initial: Some((alpha0, dalpha0)),
            step,
            period,
            ..Default::default()
        },
        turning_point: None,
    })
}

/// Summary of an end-to-end verification run.
#[derive(Clone, Copy, Debug)]
pub struct VerifySummary {
    pub grid_points: usize,
    /// Max |Delta_infinity phi|_h over the grid.
    pub max_inf_residual: f64,
    /// Max deviation of the measured energy density from the branch's
    /// prediction (the constant C, or (n-1)/r^2 for the equator).
    pub max_energy_error: f64,
    pub energy_range: (f64, f64),
}

/// A profile function backed by the solution's samples: exact value, first
/// derivative from the integrator state, second derivative from the branch
/// ODE. Evaluation is only defined at sample parameters.
struct ProfileTable {
    parameters: Vec<f64>,
    values: Vec<f64>,
    derivatives: Vec<f64>,
    second_derivatives: Vec<f64>,
}

impl ProfileTable {
    fn new(sol: &ReductionSolution, stride: usize) -> ProfileTable {
        let idx: Vec<usize> = (0..sol.samples.len()).step_by(stride.max(1)).collect();
        ProfileTable {
            parameters: idx.iter().map(|&i| sol.samples[i].parameter).collect(),
            values: idx.iter().map(|&i| sol.samples[i].value).collect(),
            derivatives: idx.iter().map(|&i| sol.samples[i].derivative).collect(),
            second_derivatives: idx.iter().map(|&i| sol.second_derivative(i)).collect(),
        }
    }

    /// Jet of the profile in variable `slot` of a `total`-variable chart, at
    /// an exact sample parameter.
    fn jet_at(&self, p: f64, total: usize, slot: usize) -> Result<Jet2> {
        let i = self
            .parameters
            .binary_search_by(|q| q.partial_cmp(&p).expect("finite parameters"))
            .or_else(|ins| {
                // accept tiny float drift against the stored grid
                for cand in [ins.wrapping_sub(1), ins] {
                    if let Some(q) = self.parameters.get(cand)
                        && (q - p).abs() < 1e-9
                    {
                        return Ok(cand);
                    }
                }
                Err(ins)
            })
            .map_err(|_| {
                Error::InvalidArgument(format!("parameter {p} is not on the profile grid"))
            })?;
        let mut gradient = nalgebra::DVector::zeros(total);
        gradient[slot] = self.derivatives[i];
        let mut hessian = nalgebra::DMatrix::zeros(total, total);
        hessian[(slot, slot)] = self.second_derivatives[i];
        Ok(Jet2::from_parts(self.values[i], gradient, hessian))
    }
}

/// Rebuild the full map a solution encodes and drive the generic operators
/// over a grid built from the profile samples crossed with `transverse`
/// points of the symmetry circle.
///
/// Cylinder kinds become maps of the flat cylinder into the ambient R^3 of
/// the unit sphere; ball kinds become maps of the punctured polar ball into
/// the geodesic polar chart of S^n (n = 2 or 3).
pub fn reconstruct_and_verify(sol: &ReductionSolution, transverse: usize) -> Result<VerifySummary> {
    if sol.samples.is_empty() {
        return Err(Error::InvalidArgument("solution has no samples".into()));
    }
    let transverse = transverse.max(2);
    // Keep the verification grid around transverse x transverse.
    let stride = (sol.samples.len() / transverse).max(1);
    let table = ProfileTable::new(sol, stride);

    match sol.kind {
        ReductionKind::CylinderConstant | ReductionKind::CylinderKink
        | ReductionKind::CylinderPendulum => {
            let k = f64::from(sol.params.k.expect("cylinder kinds store k"));
            let c = sol.conserved_constant.expect("cylinder kinds store C");
            verify_cylinder(&table, k, c, transverse)
        }
        ReductionKind::BallProfile | ReductionKind::Equator => {
            let n = sol.params.n.expect("ball kinds store n");
            let expected = match sol.kind {
                ReductionKind::BallProfile => {
                    let c = sol.conserved_constant.expect("profile stores C");
                    EnergyPrediction::Constant(c)
                }
                _ => EnergyPrediction::EquatorProfile { n },
            };
            verify_ball(&table, n, expected, transverse)
        }
    }
}

enum EnergyPrediction {
    Constant(f64),
    EquatorProfile { n: usize },
}

impl EnergyPrediction {
    fn at(&self, x: &[f64]) -> f64 {
        match self {
            EnergyPrediction::Constant(c) => *c,
            EnergyPrediction::EquatorProfile { n } => (*n as f64 - 1.0) / (x[0] * x[0]),
        }
    }
}

fn verify_cylinder(
    table: &ProfileTable,
    k: f64,
    c: f64,
    transverse: usize,
) -> Result<VerifySummary> {
    let s_lo = *table.parameters.first().expect("nonempty profile") - 1.0;
    let s_hi = *table.parameters.last().expect("nonempty profile") + 1.0;
    let chart = Chart::new(2, "flat cylinder (s, t)", move |x| x[0] > s_lo && x[0] < s_hi);
    let g = Metric::euclidean_on(chart.clone());
    let h = Metric::euclidean(3);
    let target = Chart::embedded(3, 2, "unit sphere in R^3", |y| y.iter().any(|&v| v != 0.0));

    let params = table.parameters.clone();
    let (values, derivs, seconds) =
        (table.values.clone(), table.derivatives.clone(), table.second_derivatives.clone());
    let profile = ProfileTable {
        parameters: params,
        values,
        derivatives: derivs,
        second_derivatives: seconds,
    };
    let map = SmoothMap::from_point_fn(chart, target, move |x| {
        let alpha = profile.jet_at(x[0], 2, 0)?;
        let t = Jet2::lift(x, 1).expect("slot 1");
        let kt = t.scale(k);
        Ok(vec![alpha.cos(), &alpha.sin() * &kt.cos(), &alpha.sin() * &kt.sin()])
    });

    let mut grid = Vec::new();
    for &s in &table.parameters {
        for j in 0..transverse {
            let t = 2.0 * std::f64::consts::PI * j as f64 / transverse as f64;
            grid.push(vec![s, t]);
        }
    }
    summarize(&map, &g, &h, &grid, &EnergyPrediction::Constant(c))
}

fn verify_ball(
    table: &ProfileTable,
    n: usize,
    expected: EnergyPrediction,
    transverse: usize,
) -> Result<VerifySummary> {
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidArgument(
            "reconstruction of ball profiles is implemented for n = 2 and n = 3".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let source = if n == 2 {
        Chart::new(2, "punctured polar disk (r, theta)", |x| x[0] > 0.0)
    } else {
        Chart::new(3, "punctured polar ball (r, theta, phi)", move |x| {
            x[0] > 0.0 && x[1] > 0.0 && x[1] < pi
        })
    };
    let g = if n == 2 {
        Metric::diagonal(source.clone(), |vars| {
            Ok(vec![Jet2::constant(1.0, 2), &vars[0] * &vars[0]])
        })
    } else {
        Metric::diagonal(source.clone(), |vars| {
            let r2 = &vars[0] * &vars[0];
            let st = vars[1].sin();
            Ok(vec![Jet2::constant(1.0, 3), r2.clone(), &r2 * &(&st * &st)])
        })
    };
    let target = if n == 2 {
        Chart::new(2, "geodesic polar chart of S^2", move |y| y[0] > 0.0 && y[0] < pi)
    } else {
        Chart::new(3, "geodesic polar chart of S^3", move |y| {
            y[0] > 0.0 && y[0] < pi && y[1] > 0.0 && y[1] < pi
        })
    };
    let h = if n == 2 {
        Metric::diagonal(target.clone(), |vars| {
            let s = vars[0].sin();
            Ok(vec![Jet2::constant(1.0, 2), &s * &s])
        })
    } else {
        Metric::diagonal(target.clone(), |vars| {
            let s = vars[0].sin();
            let st = vars[1].sin();
            let s2 = &s * &s;
            Ok(vec![Jet2::constant(1.0, 3), s2.clone(), &s2 * &(&st * &st)])
        })
    };

    let params = table.parameters.clone();
    let (values, derivs, seconds) =
        (table.values.clone(), table.derivatives.clone(), table.second_derivatives.clone());
    let profile = ProfileTable {
        parameters: params,
        values,
        derivatives: derivs,
        second_derivatives: seconds,
    };
    let dim = n;
    let map = SmoothMap::from_point_fn(source, target, move |x| {
        let rho = profile.jet_at(x[0], dim, 0)?;
        let mut comps = vec![rho];
        for slot in 1..dim {
            comps.push(Jet2::lift(x, slot).expect("angle slot"));
        }
        Ok(comps)
    });

    let mut grid = Vec::new();
    for &r in &table.parameters {
        for j in 0..transverse {
            let theta = 0.3 + (2.0 * pi - 0.6) * j as f64 / transverse as f64;
            if n == 2 {
                grid.push(vec![r, theta]);
            } else {
                let phi_angle = 0.4 + (pi - 0.8) * j as f64 / transverse as f64;
                grid.push(vec![r, phi_angle, theta]);
            }
        }
    }
    summarize(&map, &g, &h, &grid, &expected)
}

fn summarize(
    map: &SmoothMap,
    g: &Metric,
    h: &Metric,
    grid: &[Vec<f64>],
    expected: &EnergyPrediction,
) -> Result<VerifySummary> {
    let mut max_inf = 0.0_f64;
    let mut max_energy_err = 0.0_f64;
    let mut e_min = f64::MAX;
    let mut e_max = f64::MIN;
    for x in grid {
        let y = map.eval_values(x)?;
        let hp = h.at(&y)?;
        let residual = inf_laplacian_map(map, g, h, x)?;
        max_inf = max_inf.max(hp.norm(&residual));
        let e = energy_density(map, g, h, x)?.value();
        e_min = e_min.min(e);
        e_max = e_max.max(e);
        max_energy_err = max_energy_err.max((e - expected.at(x)).abs());
    }
    Ok(VerifySummary {
        grid_points: grid.len(),
        max_inf_residual: max_inf,
        max_energy_error: max_energy_err,
        energy_range: (e_min, e_max),
    })
}
