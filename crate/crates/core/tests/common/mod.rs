//! Shared test oracles: central finite differences over value-only
//! evaluation, and a fixed battery of expressions exercised by the
//! derivative cross-validation suites.
//!
//! The finite-difference path consumes only expression *values*, so it stays
//! independent of the jet propagation rules it is used to check.

// Each test binary uses its own subset of these helpers.
#![allow(dead_code)]

use infharm::{Expr, Jet2};

pub const FD_STEP: f64 = 1e-5;

/// Central-difference gradient of a value-only function.
pub fn fd_gradient<F: Fn(&[f64]) -> Option<f64>>(f: &F, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let d = x.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        out.push((f(&xp)? - f(&xm)?) / (2.0 * h));
    }
    Some(out)
}

/// Central-difference Hessian of a value-only function.
pub fn fd_hessian<F: Fn(&[f64]) -> Option<f64>>(f: &F, x: &[f64], h: f64) -> Option<Vec<Vec<f64>>> {
    let d = x.len();
    let f0 = f(x)?;
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        out[i][i] = (f(&xp)? - 2.0 * f0 + f(&xm)?) / (h * h);
        for j in (i + 1)..d {
            let mut xpp = x.to_vec();
            let mut xpm = x.to_vec();
            let mut xmp = x.to_vec();
            let mut xmm = x.to_vec();
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            let v = (f(&xpp)? - f(&xpm)? - f(&xmp)? + f(&xmm)?) / (4.0 * h * h);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Some(out)
}

/// The fixed expression battery: polynomials, trig, quotients, and
/// compositions up to depth five, over one to three variables. All members
/// are smooth on the positive box [0.2, 1.3]^d.
pub fn expression_battery() -> Vec<(usize, Expr)> {
    let sources: &[(usize, &str)] = &[
        (1, "x1^3 - 2 * x1 + 1"),
        (1, "sin(x1) * exp(x1 / 2)"),
        (1, "1 / (1 + x1^2)"),
        (1, "x1^(4/3)"),
        (2, "x1^2 * x2 + sin(x1)"),
        (2, "exp(x1 / 2) * cos(x2)"),
        (2, "atan(x1 / x2)"),
        (2, "atan2(x1, x2)"),
        (2, "sqrt(x1^2 + x2^2)"),
        (2, "log(1 + x1^2 + x2^2)"),
        (2, "x1^(4/3) - x2^(4/3)"),
        (2, "cos(x1) + sin(x2) * x1^2"),
        (2, "sqrt(1 + x1^2 * x2^2)"),
        (2, "(x1 + x2) / (1 + x1 * x2)"),
        (3, "x1 * x2 * x3 + x3^3"),
        (3, "sin(x1 * x2) * exp(x3 / 3)"),
        (3, "sqrt(x1^2 + x2^2 + x3^2)"),
        (3, "atan(x1 / x2) * cos(x3)"),
        (3, "log(x1 + x2 * x3)"),
        (3, "(x1 + x2^2) / (x3 + 2)"),
    ];
    sources
        .iter()
        .map(|&(dim, src)| (dim, Expr::parse(src, dim).expect("battery member parses")))
        .collect()
}

/// Deterministic stream of sample points for the cross-validation suites.
pub struct PointStream {
    rng: rand_chacha::ChaCha8Rng,
}

impl PointStream {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        PointStream { rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_unit(&mut self) -> f64 {
        use rand::Rng;
        self.rng.random_range(0.0..1.0)
    }

    /// A point in [lo, hi]^dim.
    pub fn point(&mut self, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
        use rand::Rng;
        (0..dim).map(|_| self.rng.random_range(lo..hi)).collect()
    }
}

/// Compare a jet against finite differences of the expression's value path.
/// Returns the worst relative defect over the gradient and Hessian.
pub fn jet_vs_fd_defect(expr: &Expr, x: &[f64]) -> Option<f64> {
    let jet = expr.eval_jet(&Jet2::vars(x)).ok()?;
    let value_path = |p: &[f64]| expr.eval(p).ok();
    let grad = fd_gradient(&value_path, x, FD_STEP)?;
    let hess = fd_hessian(&value_path, x, FD_STEP)?;
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let scale = jet.gradient()[i].abs().max(1.0);
        worst = worst.max((jet.gradient()[i] - grad[i]).abs() / scale);
        for j in 0..x.len() {
            let scale = jet.hessian()[(i, j)].abs().max(1.0);
            worst = worst.max((jet.hessian()[(i, j)] - hess[i][j]).abs() / scale);
        }
    }
    Some(worst)
}
