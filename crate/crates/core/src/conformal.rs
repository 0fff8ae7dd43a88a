//! Conformal change of the infinity Laplacian and the model-space equations.
//!
//! For a conformal metric g-bar = F^{-2} g the infinity Laplacian transforms
//! as
//!
//! ```text
//! Delta-bar_inf u = F^4 Delta_inf u + F^3 |grad u|^2 g(grad u, grad F).
//! ```
//!
//! Specializing F = (1 + |x|^2)/2 identifies the punctured round sphere with
//! the flat plane and turns the sphere equation into
//! `Delta_inf u + 2 |grad u|^2 <x, grad u> / (1 + |x|^2) = 0`; the open-ball
//! hyperbolic model uses F = (1 - |x|^2)/2 and flips the sign. Only the
//! equations are contractual here; the chart identification is the standard
//! stereographic-type one with exactly these factors.
//!
//! The sphere-restriction formula expresses the intrinsic infinity Laplacian
//! of u restricted to the unit sphere through ambient derivatives of u, with
//! the radial derivative read off as <x, grad u>.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Chart, Metric, SmoothMap, metric_gradient};
use crate::jet::Jet2;
use crate::operators::inf_laplacian_function;

/// A strictly positive scalar field driving a conformal change g-bar = F^{-2} g.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    map: SmoothMap,
}

impl ConformalFactor {
    pub fn new(map: SmoothMap) -> Result<Self> {
        if map.target().dim() != 1 {
            return Err(Error::InvalidArgument("conformal factor must be scalar".into()));
        }
        Ok(ConformalFactor { map })
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    /// Jet of F at `x`, rejecting non-positive values.
    pub fn eval(&self, x: &[f64]) -> Result<Jet2> {
        let jet = self.map.eval_jets(x)?.pop().expect("scalar component");
        if jet.value() <= 0.0 {
            return Err(Error::InvalidFactor { point: x.to_vec(), value: jet.value() });
        }
        Ok(jet)
    }

    /// The conformal metric F^{-2} g.
    pub fn conformal_metric(&self, g: &Metric) -> Metric {
        Metric::scaled(g, &self.map, -2)
    }
}

/// Infinity Laplacian of `u` under the conformal metric F^{-2} g, computed
/// through the transformation law (not by rebuilding the metric):
/// F^4 Delta_inf u + F^3 |grad u|^2 g(grad u, grad F).
pub fn conformal_inf_laplacian(
    u: &SmoothMap,
    g: &Metric,
    factor: &ConformalFactor,
    x: &[f64],
) -> Result<f64> {
    let f_jet = factor.eval(x)?;
    let f = f_jet.value();
    let gp = g.at(x)?;
    let (grad_u, norm_sq) = metric_gradient(u, g, x)?;
    let grad_f = gp.inverse() * f_jet.gradient();
    let base = inf_laplacian_function(u, g, x)?;
    Ok(f.powi(4) * base + f.powi(3) * norm_sq.value() * gp.inner(&grad_u, &grad_f))
}

/// Infinity Laplacian of `u` under F^{-2} g evaluated directly on the scaled
/// metric. Independent code path against [`conformal_inf_laplacian`].
pub fn conformal_inf_laplacian_direct(
    u: &SmoothMap,
    g: &Metric,
    factor: &ConformalFactor,
    x: &[f64],
) -> Result<f64> {
    factor.eval(x)?;
    let scaled = factor.conformal_metric(g);
    inf_laplacian_function(u, &scaled, x)
}

fn euclidean_scalar_data(u: &SmoothMap, x: &[f64]) -> Result<(Jet2, f64, DVector<f64>, f64)> {
    assert_eq!(u.target().dim(), 1, "model-space residuals expect a scalar");
    let jet = u.eval_jets(x)?.pop().expect("scalar component");
    let grad = jet.gradient().clone();
    let norm_sq = grad.norm_squared();
    // Delta_inf u = (1/2) <grad u, grad |grad u|^2> = grad^T H grad.
    let h_grad = jet.hessian() * &grad;
    let delta_inf = grad.dot(&h_grad);
    Ok((jet, norm_sq, grad, delta_inf))
}

/// Left-hand side of the sphere equation in stereographic-type coordinates:
/// Delta_inf u + 2 |grad u|^2 <x, grad u> / (1 + |x|^2), all Euclidean.
/// Zero exactly when u is infinity harmonic on the punctured round sphere.
pub fn sphere_equation_residual(u: &SmoothMap, x: &[f64]) -> Result<f64> {
    let (_, norm_sq, grad, delta_inf) = euclidean_scalar_data(u, x)?;
    let xv = DVector::from_column_slice(x);
    let r2 = xv.norm_squared();
    Ok(delta_inf + 2.0 * norm_sq * xv.dot(&grad) / (1.0 + r2))
}

/// Left-hand side of the hyperbolic (open ball model) equation:
/// Delta_inf u - 2 |grad u|^2 <x, grad u> / (1 - |x|^2). Needs |x| < 1.
pub fn hyperbolic_equation_residual(u: &SmoothMap, x: &[f64]) -> Result<f64> {
    let xv = DVector::from_column_slice(x);
    let r2 = xv.norm_squared();
    if r2 >= 1.0 {
        return Err(Error::OutOfDomain {
            point: x.to_vec(),
            reason: "hyperbolic ball model needs |x| < 1".into(),
        });
    }
    let (_, norm_sq, grad, delta_inf) = euclidean_scalar_data(u, x)?;
    Ok(delta_inf - 2.0 * norm_sq * xv.dot(&grad) / (1.0 - r2))
}

/// Intrinsic infinity Laplacian of u restricted to the unit sphere, via the
/// ambient formula
///
/// ```text
/// Delta_inf^{S} u~ = Delta_inf u - (1/2) <grad u, grad (du/dr)^2>
///                    - (1/2) (du/dr) d/dr (|grad u|^2 - (du/dr)^2),
/// ```
///
/// with du/dr = <x, grad u> and every radial derivative taken as <x, grad .>.
/// The point must lie on the unit sphere (tolerance 1e-12); the formula is
/// not extended off the sphere.
pub fn sphere_restriction_residual(u: &SmoothMap, x: &[f64]) -> Result<f64> {
    let xv = DVector::from_column_slice(x);
    let r = xv.norm();
    if (r - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfDomain {
            point: x.to_vec(),
            reason: "restriction formula is only defined on the unit sphere".into(),
        });
    }
    let (jet, _, grad, delta_inf) = euclidean_scalar_data(u, x)?;
    let hess = jet.hessian();
    // du/dr and the gradients of the derived scalars, exact from the jet:
    // grad <x, grad u> = grad u + H x, grad |grad u|^2 = 2 H grad u.
    let du_dr = xv.dot(&grad);
    let grad_du_dr = &grad + hess * &xv;
    let grad_q = &grad_du_dr * (2.0 * du_dr); // grad (du/dr)^2
    let grad_e = hess * &grad * 2.0; // grad |grad u|^2
    let term_mixed = 0.5 * grad.dot(&grad_q);
    let radial = xv.dot(&(&grad_e - &grad_q));
    let term_radial = 0.5 * du_dr * radial;
    Ok(delta_inf - term_mixed - term_radial)
}

/// The same quantity computed intrinsically on the geodesic polar chart of
/// S^2 (independent path for the two-dimensional cross-check): pull u back
/// through the embedding (rho, phi) -> (sin rho cos phi, sin rho sin phi,
/// cos rho) and apply the chart infinity Laplacian under diag(1, sin^2 rho).
pub fn sphere_restriction_via_chart(u: &SmoothMap, x: &[f64]) -> Result<f64> {
    if u.source().dim() != 3 {
        return Err(Error::InvalidArgument("chart cross-check is for functions on R^3".into()));
    }
    let xv = DVector::from_column_slice(x);
    if (xv.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfDomain {
            point: x.to_vec(),
            reason: "restriction formula is only defined on the unit sphere".into(),
        });
    }
    let pi = std::f64::consts::PI;
    let rho = x[2].clamp(-1.0, 1.0).acos();
    let phi = x[1].atan2(x[0]);
    if rho < 1e-6 || rho > pi - 1e-6 {
        return Err(Error::OutOfDomain {
            point: x.to_vec(),
            reason: "polar chart degenerates at the poles".into(),
        });
    }

    let chart = Chart::new(2, "geodesic polar chart of S^2", move |p| p[0] > 0.0 && p[0] < pi);
    let metric = Metric::diagonal(chart.clone(), |vars| {
        let s = vars[0].sin();
        Ok(vec![Jet2::constant(1.0, 2), &s * &s])
    });
    let ambient = u.clone();
    let restricted = SmoothMap::from_point_fn(chart, Chart::euclidean(1), move |p| {
        let vars = Jet2::vars(p);
        let s = vars[0].sin();
        let c = vars[0].cos();
        let embed = vec![&s * &vars[1].cos(), &s * &vars[1].sin(), c];
        let point: Vec<f64> = embed.iter().map(Jet2::value).collect();
        let outer = ambient.eval_jets(&point)?.pop().expect("scalar component");
        Ok(vec![Jet2::compose(&outer, &embed)])
    });
    inf_laplacian_function(&restricted, &metric, &[rho, phi])
}
