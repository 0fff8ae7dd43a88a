//! Charts, Riemannian metrics, and smooth maps between charts.
//!
//! A manifold is represented by a single chart: an open subset of R^d with a
//! membership predicate. Metrics are fields of symmetric positive-definite
//! matrices whose entries are evaluated as jets, so first and second
//! derivatives of g_ij come out of the same pass that produces the values.
//! Sphere targets are handled through their ambient Euclidean embedding
//! (post-composition with an isometric immersion does not change infinity
//! harmonicity), which is what [`Chart::embedded`] is for.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, JetError, Result};
use crate::expr::Expr;
use crate::jet::Jet2;

/// Default relative cutoff for rank decisions in [`differential_frame`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Relative eigenvalue floor below which a metric counts as degenerate.
const METRIC_SPD_TOL: f64 = 1e-12;

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// An open subset of R^dim with a name.
///
/// `manifold_dim` is the intrinsic dimension of the manifold the chart
/// represents. It equals `dim` except for ambient-embedded targets such as
/// S^n sitting inside R^{n+1}, where rank decisions must compare against n,
/// not n+1.
#[derive(Clone)]
pub struct Chart {
    dim: usize,
    manifold_dim: usize,
    label: String,
    membership: Predicate,
}

impl std::fmt::Debug for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chart")
            .field("dim", &self.dim)
            .field("manifold_dim", &self.manifold_dim)
            .field("label", &self.label)
            .finish()
    }
}

impl Chart {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 1, "chart dimension must be at least 1");
        Chart { dim, manifold_dim: dim, label: label.into(), membership: Arc::new(membership) }
    }

    /// All of R^dim.
    pub fn euclidean(dim: usize) -> Self {
        Chart::new(dim, format!("R^{dim}"), |_| true)
    }

    /// Ambient chart for an embedded submanifold of dimension `manifold_dim`.
    pub fn embedded(
        dim: usize,
        manifold_dim: usize,
        label: impl Into<String>,
        membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        assert!(manifold_dim >= 1 && manifold_dim <= dim);
        Chart { dim, manifold_dim, label: label.into(), membership: Arc::new(membership) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn manifold_dim(&self) -> usize {
        self.manifold_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && (self.membership)(x)
    }
}

type MetricFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Jet2>> + Send + Sync>;

/// A smooth field of symmetric positive-definite bilinear forms on a chart.
///
/// The entry function returns the row-major d*d matrix of g_ij as jets at a
/// point; derivatives of the entries feed Christoffel symbols and the
/// gradients of derived scalars.
#[derive(Clone)]
pub struct Metric {
    chart: Chart,
    entries: MetricFn,
}

impl std::fmt::Debug for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Metric").field("chart", &self.chart).finish()
    }
}

impl Metric {
    pub fn new(
        chart: Chart,
        entries: impl Fn(&[f64]) -> Result<Vec<Jet2>> + Send + Sync + 'static,
    ) -> Self {
        Metric { chart, entries: Arc::new(entries) }
    }

    /// The flat metric delta_ij on R^dim.
    pub fn euclidean(dim: usize) -> Self {
        Self::euclidean_on(Chart::euclidean(dim))
    }

    /// The flat metric on an arbitrary chart (e.g. an annulus or a box).
    pub fn euclidean_on(chart: Chart) -> Self {
        let dim = chart.dim();
        Metric::new(chart, move |_| {
            let mut entries = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    entries.push(Jet2::constant(if i == j { 1.0 } else { 0.0 }, dim));
                }
            }
            Ok(entries)
        })
    }

    /// Diagonal metric with jet-valued entries produced by `diag`.
    pub fn diagonal(
        chart: Chart,
        diag: impl Fn(&[Jet2]) -> std::result::Result<Vec<Jet2>, JetError> + Send + Sync + 'static,
    ) -> Self {
        let dim = chart.dim();
        Metric::new(chart, move |x| {
            let vars = Jet2::vars(x);
            let d = diag(&vars).map_err(|e| Error::at_point(x, e))?;
            assert_eq!(d.len(), dim, "diagonal entry count mismatch");
            let mut entries = vec![Jet2::constant(0.0, dim); dim * dim];
            for (i, jet) in d.into_iter().enumerate() {
                entries[i * dim + i] = jet;
            }
            Ok(entries)
        })
    }

    /// Metric from parsed expressions for the upper triangle (row-major full
    /// matrix accepted; the strict lower triangle is mirrored from the upper
    /// one so the result is symmetric by construction).
    pub fn from_exprs(chart: Chart, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let dim = chart.dim();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "metric needs a {dim}x{dim} matrix of expressions"
            )));
        }
        let rows = Arc::new(rows);
        Ok(Metric::new(chart, move |x| {
            let vars = Jet2::vars(x);
            let mut entries = vec![Jet2::constant(0.0, dim); dim * dim];
            for i in 0..dim {
                for j in i..dim {
                    let jet = rows[i][j].eval_jet(&vars).map_err(|e| Error::at_point(x, e))?;
                    entries[i * dim + j] = jet.clone();
                    entries[j * dim + i] = jet;
                }
            }
            Ok(entries)
        }))
    }

    /// Pointwise scaling `factor^power * g`, with the factor a scalar map on
    /// the same chart. `power = -2` gives the conformal metric F^-2 g.
    pub fn scaled(base: &Metric, factor: &SmoothMap, power: i32) -> Self {
        assert_eq!(factor.target.dim(), 1, "scaling factor must be scalar");
        let base_entries = base.entries.clone();
        let factor = factor.clone();
        Metric::new(base.chart.clone(), move |x| {
            let f = factor.eval_jets(x)?.pop().expect("scalar component");
            let fpow = f.powf(f64::from(power)).map_err(|e| Error::at_point(x, e))?;
            let entries = base_entries(x)?;
            Ok(entries.into_iter().map(|g| &g * &fpow).collect())
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Evaluate the metric at `x`: jets, values, inverse, Cholesky factor.
    /// Fails with a degenerate-metric error when the value matrix is not
    /// positive definite (relative eigenvalue floor 1e-12).
    pub fn at(&self, x: &[f64]) -> Result<MetricPoint> {
        let dim = self.chart.dim();
        let jets = (self.entries)(x)?;
        assert_eq!(jets.len(), dim * dim, "metric entry count mismatch");
        let mut values = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                values[(i, j)] = jets[i * dim + j].value();
            }
        }
        let eigen = values.clone().symmetric_eigen();
        let max_eig = eigen.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let min_eig = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let positive_definite = min_eig.is_finite() && min_eig > METRIC_SPD_TOL * max_eig;
        if !positive_definite {
            return Err(Error::DegenerateMetric { point: x.to_vec() });
        }
        let chol = Cholesky::new(values.clone())
            .ok_or_else(|| Error::DegenerateMetric { point: x.to_vec() })?;
        let inverse = chol.inverse();
        let lower = chol.unpack();
        Ok(MetricPoint { point: x.to_vec(), dim, jets, values, inverse, lower })
    }
}

/// Metric data evaluated at one point.
#[derive(Clone, Debug)]
pub struct MetricPoint {
    point: Vec<f64>,
    dim: usize,
    jets: Vec<Jet2>,
    values: DMatrix<f64>,
    inverse: DMatrix<f64>,
    lower: DMatrix<f64>,
}

impl MetricPoint {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn jet(&self, i: usize, j: usize) -> &Jet2 {
        &self.jets[i * self.dim + j]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Lower Cholesky factor L with g = L L^T.
    pub fn cholesky_lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Inner product of two coordinate vectors under g.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.values * b)[(0, 0)]
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Inverse metric entries as jets: exact first and second derivatives by
    /// differentiating g g^-1 = I twice.
    pub fn inverse_jets(&self) -> Vec<Jet2> {
        let d = self.dim;
        let inv = &self.inverse;
        // First derivatives of g as matrices.
        let dg: Vec<DMatrix<f64>> = (0..d)
            .map(|k| {
                DMatrix::from_fn(d, d, |i, j| self.jet(i, j).gradient()[k])
            })
            .collect();
        // d_k(g^-1) = -g^-1 (d_k g) g^-1
        let dinv: Vec<DMatrix<f64>> = dg.iter().map(|dgk| -(inv * dgk * inv)).collect();
        let mut jets = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let gradient = DVector::from_fn(d, |k, _| dinv[k][(i, j)]);
                let mut hessian = DMatrix::zeros(d, d);
                for k in 0..d {
                    for l in k..d {
                        let d2g = DMatrix::from_fn(d, d, |a, b| self.jet(a, b).hessian()[(k, l)]);
                        // d_k d_l (g^-1) = -g^-1 d2g g^-1
                        //   + g^-1 (d_k g) g^-1 (d_l g) g^-1
                        //   + g^-1 (d_l g) g^-1 (d_k g) g^-1
                        let m = -(inv * &d2g * inv)
                            + inv * &dg[k] * inv * &dg[l] * inv
                            + inv * &dg[l] * inv * &dg[k] * inv;
                        hessian[(k, l)] = m[(i, j)];
                        hessian[(l, k)] = m[(i, j)];
                    }
                }
                jets.push(Jet2::from_parts(inv[(i, j)], gradient, hessian));
            }
        }
        jets
    }

    /// Christoffel symbols of the second kind, indexed `[k][(i, j)]`.
    /// Symmetric in the lower pair by construction (only i <= j is computed).
    pub fn christoffel(&self) -> Vec<DMatrix<f64>> {
        let d = self.dim;
        let mut out = vec![DMatrix::zeros(d, d); d];
        for i in 0..d {
            for j in i..d {
                for (k, out_k) in out.iter_mut().enumerate() {
                    let mut sum = 0.0;
                    for l in 0..d {
                        let term = self.jet(j, l).gradient()[i] + self.jet(i, l).gradient()[j]
                            - self.jet(i, j).gradient()[l];
                        sum += self.inverse[(k, l)] * term;
                    }
                    let val = 0.5 * sum;
                    out_k[(i, j)] = val;
                    out_k[(j, i)] = val;
                }
            }
        }
        out
    }
}

/// Christoffel symbols of `g` at `x`, indexed `[k][(i, j)]`.
pub fn christoffel(g: &Metric, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    Ok(g.at(x)?.christoffel())
}

type MapFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Jet2>> + Send + Sync>;

/// A map between charts evaluable to second order.
#[derive(Clone)]
pub struct SmoothMap {
    source: Chart,
    target: Chart,
    components: MapFn,
}

impl std::fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothMap")
            .field("source", &self.source)
            .field("target", &self.target)
            .finish()
    }
}

impl SmoothMap {
    /// Build from a closure producing the component jets. The closure works
    /// on raw jet errors; the wrapper attaches the evaluation point.
    pub fn new(
        source: Chart,
        target: Chart,
        components: impl Fn(&[Jet2]) -> std::result::Result<Vec<Jet2>, JetError> + Send + Sync + 'static,
    ) -> Self {
        SmoothMap {
            source,
            target,
            components: Arc::new(move |x: &[f64]| {
                let vars = Jet2::vars(x);
                components(&vars).map_err(|e| Error::at_point(x, e))
            }),
        }
    }

    /// Build from a closure that receives the raw point (for maps backed by
    /// tabulated data rather than jet arithmetic).
    pub fn from_point_fn(
        source: Chart,
        target: Chart,
        components: impl Fn(&[f64]) -> Result<Vec<Jet2>> + Send + Sync + 'static,
    ) -> Self {
        SmoothMap { source, target, components: Arc::new(components) }
    }

    pub fn from_exprs(source: Chart, target: Chart, exprs: Vec<Expr>) -> Result<Self> {
        if exprs.len() != target.dim() {
            return Err(Error::InvalidArgument(format!(
                "map needs {} components, got {}",
                target.dim(),
                exprs.len()
            )));
        }
        Ok(SmoothMap::new(source, target, move |vars| {
            exprs.iter().map(|e| e.eval_jet(vars)).collect()
        }))
    }

    /// Scalar-valued map (target R).
    pub fn scalar(
        source: Chart,
        component: impl Fn(&[Jet2]) -> std::result::Result<Jet2, JetError> + Send + Sync + 'static,
    ) -> Self {
        SmoothMap::new(source, Chart::euclidean(1), move |vars| Ok(vec![component(vars)?]))
    }

    pub fn scalar_from_expr(source: Chart, expr: Expr) -> Self {
        SmoothMap::scalar(source, move |vars| expr.eval_jet(vars))
    }

    pub fn identity(chart: Chart) -> Self {
        let target = chart.clone();
        SmoothMap::new(chart, target, |vars| Ok(vars.to_vec()))
    }

    /// Pullback `f . self` of a scalar on the target.
    pub fn pullback_scalar(&self, f: &SmoothMap) -> SmoothMap {
        assert_eq!(f.source.dim(), self.target.dim(), "pullback chart mismatch");
        assert_eq!(f.target.dim(), 1, "pullback expects a scalar");
        let inner = self.clone();
        let outer = f.clone();
        SmoothMap::from_point_fn(self.source.clone(), Chart::euclidean(1), move |x| {
            let inner_jets = inner.eval_jets(x)?;
            let y: Vec<f64> = inner_jets.iter().map(Jet2::value).collect();
            let outer_jet = outer.eval_jets(&y)?.pop().expect("scalar component");
            Ok(vec![Jet2::compose(&outer_jet, &inner_jets)])
        })
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    /// Component jets at `x`. Rejects points outside the source domain and
    /// non-finite results (singular points must error, never produce NaN).
    pub fn eval_jets(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        if !self.source.contains(x) {
            return Err(Error::OutOfDomain {
                point: x.to_vec(),
                reason: format!("not in chart `{}`", self.source.label()),
            });
        }
        let jets = (self.components)(x)?;
        assert_eq!(jets.len(), self.target.dim(), "component count mismatch");
        for jet in &jets {
            if !jet.is_finite() {
                return Err(Error::at_point(
                    x,
                    JetError::Domain { func: "map component", value: f64::NAN },
                ));
            }
        }
        Ok(jets)
    }

    pub fn eval_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jets(x)?.iter().map(Jet2::value).collect())
    }

    /// The differential d(phi) at `x` as an n x m matrix (rows are component
    /// gradients).
    pub fn differential(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.eval_jets(x)?;
        let n = self.target.dim();
        let m = self.source.dim();
        Ok(DMatrix::from_fn(n, m, |i, j| jets[i].gradient()[j]))
    }
}

/// The gradient of a scalar map with respect to `g`, together with
/// |grad u|^2_g as a jet.
///
/// The returned jet's value and gradient are exact; its Hessian is truncated
/// (it would need third derivatives of `u`). Downstream consumers only read
/// the gradient, which is what the infinity Laplacian needs.
pub fn metric_gradient(u: &SmoothMap, g: &Metric, x: &[f64]) -> Result<(DVector<f64>, Jet2)> {
    assert_eq!(u.target().dim(), 1, "metric_gradient expects a scalar map");
    let jet = u.eval_jets(x)?.pop().expect("scalar component");
    let gp = g.at(x)?;
    let d = gp.dim();
    let grad = gp.inverse() * jet.gradient();
    let ginv_jets = gp.inverse_jets();
    // |grad u|^2 = g^{ij} u_i u_j with u_i treated as first-order jets.
    let partials: Vec<Jet2> = (0..d)
        .map(|i| Jet2::first_order(jet.gradient()[i], jet.hessian().row(i).transpose()))
        .collect();
    let mut norm_sq = Jet2::constant(0.0, d);
    for i in 0..d {
        for j in 0..d {
            norm_sq = &norm_sq + &(&(&ginv_jets[i * d + j] * &partials[i]) * &partials[j]);
        }
    }
    Ok((grad, norm_sq))
}

/// Value of |grad u|^2_g at `x`.
pub fn metric_gradient_norm_sq(u: &SmoothMap, g: &Metric, x: &[f64]) -> Result<f64> {
    Ok(metric_gradient(u, g, x)?.1.value())
}

/// Orthogonal decomposition of the source tangent space at a point into the
/// kernel of d(phi) and its g-complement.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub point: Vec<f64>,
    /// Number of singular values above the rank cutoff.
    pub rank: usize,
    /// g-orthonormal basis of ker d(phi).
    pub vertical: Vec<DVector<f64>>,
    /// g-orthonormal basis of the g-orthogonal complement of the kernel.
    pub horizontal: Vec<DVector<f64>>,
    /// Squared singular values of the metric-adjusted differential, in
    /// descending order. For a horizontally conformal map the first `rank`
    /// of these all equal the squared dilation.
    pub dilations_sq: Vec<f64>,
    /// Some singular value sits within two orders of magnitude of the rank
    /// cutoff; the rank decision is fragile here.
    pub near_degenerate: bool,
}

/// Compute the horizontal/vertical splitting of d(phi) at `x`.
///
/// Singular values of L_h^T J L_g^{-T} below `rank_tol` times the largest
/// count as zero ([`DEFAULT_RANK_TOL`] when in doubt). Rank 0 (a critical
/// point) is a valid outcome, not an error. The returned bases are
/// orthonormalized against g by modified Gram-Schmidt with largest-norm
/// pivoting.
pub fn differential_frame(
    phi: &SmoothMap,
    g: &Metric,
    h: &Metric,
    x: &[f64],
    rank_tol: f64,
) -> Result<PointFrame> {
    let m = phi.source().dim();
    let jac = phi.differential(x)?;
    let y = phi.eval_values(x)?;
    let gp = g.at(x)?;
    let hp = h.at(&y)?;

    // Adjusted differential: orthonormal coordinates on both sides.
    let lg = gp.cholesky_lower();
    let lh = hp.cholesky_lower();
    let lg_inv_t = lg
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric { point: x.to_vec() })?
        .transpose();
    let adjusted = lh.transpose() * &jac * &lg_inv_t;

    let svd = adjusted.clone().svd(false, true);
    let mut sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * sigma_max;
    let rank = if sigma_max == 0.0 { 0 } else { sigma.iter().filter(|&&s| s > cutoff).count() };
    let near_degenerate = sigma_max > 0.0
        && sigma
            .iter()
            .any(|&s| s > cutoff * 1e-2 && s < cutoff * 1e2);

    // Right singular vectors in g-orthonormal y-coordinates; map back with
    // x = L_g^{-T} y and split by singular value.
    let v_t = svd.v_t.expect("requested v_t");
    let mut horizontal = Vec::with_capacity(rank);
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max > 0.0 && s > cutoff {
            let v = v_t.row(idx).transpose();
            horizontal.push(&lg_inv_t * v);
        }
    }
    horizontal = mgs_orthonormalize(&horizontal, &gp, 1e-12);

    // Extend to a full basis: coordinate directions projected off the
    // horizontal space span the kernel.
    let mut basis = horizontal.clone();
    let mut candidates: Vec<DVector<f64>> =
        (0..m).map(|i| DVector::from_fn(m, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    while basis.len() < m {
        // pivot on the candidate with the largest residual g-norm
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for (ci, cand) in candidates.iter().enumerate() {
            let mut residual = cand.clone();
            for b in &basis {
                let coeff = gp.inner(&residual, b);
                residual -= b * coeff;
            }
            let norm = gp.norm(&residual);
            if best.as_ref().is_none_or(|(_, n, _)| norm > *n) {
                best = Some((ci, norm, residual));
            }
        }
        let (ci, norm, residual) = best.expect("nonempty candidate set");
        candidates.swap_remove(ci);
        if norm <= 1e-12 {
            continue;
        }
        basis.push(residual / norm);
    }
    let vertical = basis.split_off(horizontal.len());

    Ok(PointFrame {
        point: x.to_vec(),
        rank,
        vertical,
        horizontal,
        dilations_sq: sigma.iter().map(|s| s * s).collect(),
        near_degenerate,
    })
}

/// Modified Gram-Schmidt against the metric inner product, pivoting on the
/// largest remaining norm. Vectors whose residual norm falls below
/// `drop_tol` times the largest initial norm are dropped.
pub(crate) fn mgs_orthonormalize(
    vectors: &[DVector<f64>],
    gp: &MetricPoint,
    drop_tol: f64,
) -> Vec<DVector<f64>> {
    let mut remaining: Vec<DVector<f64>> = vectors.to_vec();
    let scale = remaining.iter().map(|v| gp.norm(v)).fold(0.0_f64, f64::max);
    let mut out: Vec<DVector<f64>> = Vec::new();
    while !remaining.is_empty() {
        let (idx, norm) = remaining
            .iter()
            .enumerate()
            .map(|(i, v)| (i, gp.norm(v)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite norms"))
            .expect("nonempty");
        let v = remaining.swap_remove(idx);
        if norm <= drop_tol * scale {
            continue;
        }
        let q = &v / norm;
        for r in &mut remaining {
            let coeff = gp.inner(r, &q);
            *r -= &q * coeff;
        }
        out.push(q);
    }
    out
}
