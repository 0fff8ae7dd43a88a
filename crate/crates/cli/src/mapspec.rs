//! Declarative map descriptions loaded from TOML files.
//!
//! A file names the source and target charts with their metrics, the map
//! components as expression strings over `x1 .. xd`, and a sampling region.
//! The grammar is the library's expression grammar; unknown identifiers and
//! out-of-range coordinates are rejected at load time with the offending
//! field and column.
//!
//! ```toml
//! [source]
//! dim = 3
//! metric = "euclidean"            # or { diag = [..] } or { rows = [[..]] }
//!
//! [target]
//! dim = 2
//! metric = "euclidean"
//! # manifold_dim = 2              # for ambient-embedded targets
//!
//! [map]
//! components = ["x1", "x2"]
//!
//! [samples]
//! box = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
//! grid = 4                        # points per axis
//! random = 0                      # extra seeded random points in the box
//! # exclude = [{ center = [0.0, 0.0, 0.0], radius = 0.1 }]
//! ```

use infharm::{Chart, Error, Expr, Metric, SmoothMap};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpecFile {
    pub source: ChartSpec,
    pub target: ChartSpec,
    pub map: MapSection,
    pub samples: SampleSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub dim: usize,
    pub metric: MetricSpec,
    pub manifold_dim: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Named(String),
    Diag { diag: Vec<String> },
    Rows { rows: Vec<Vec<String>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub box_ranges: Option<Vec<[f64; 2]>>,
    #[serde(rename = "box")]
    pub box_alias: Option<Vec<[f64; 2]>>,
    pub grid: Option<usize>,
    pub random: Option<usize>,
    pub exclude: Option<Vec<Exclusion>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Everything a classification run needs, loaded and validated.
#[derive(Debug)]
pub struct LoadedMapSpec {
    pub map: SmoothMap,
    pub source_metric: Metric,
    pub target_metric: Metric,
    pub samples: Vec<Vec<f64>>,
}

fn parse_expr(field: &str, src: &str, dim: usize) -> Result<Expr, Error> {
    Expr::parse(src, dim).map_err(|e| match e {
        Error::Parse { column, message, .. } => {
            Error::Parse { context: format!("{field} (`{src}`)"), column, message }
        }
        other => other,
    })
}

fn build_metric(field: &str, spec: &MetricSpec, chart: Chart) -> Result<Metric, Error> {
    let dim = chart.dim();
    match spec {
        MetricSpec::Named(name) if name == "euclidean" => Ok(Metric::euclidean_on(chart)),
        MetricSpec::Named(name) => Err(Error::InvalidArgument(format!(
            "{field}: unknown metric `{name}` (only \"euclidean\", diag, or rows)"
        ))),
        MetricSpec::Diag { diag } => {
            if diag.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "{field}: diagonal needs {dim} entries, got {}",
                    diag.len()
                )));
            }
            let mut rows = vec![vec![Expr::Const(0.0); dim]; dim];
            for (i, src) in diag.iter().enumerate() {
                rows[i][i] = parse_expr(&format!("{field}.diag[{i}]"), src, dim)?;
            }
            Metric::from_exprs(chart, rows)
        }
        MetricSpec::Rows { rows } => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::InvalidArgument(format!(
                    "{field}: rows must form a {dim}x{dim} matrix"
                )));
            }
            let mut parsed = Vec::with_capacity(dim);
            for (i, row) in rows.iter().enumerate() {
                let mut out = Vec::with_capacity(dim);
                for (j, src) in row.iter().enumerate() {
                    out.push(parse_expr(&format!("{field}.rows[{i}][{j}]"), src, dim)?);
                }
                parsed.push(out);
            }
            // the upper triangle is authoritative; reject visibly asymmetric input
            for (i, row) in rows.iter().enumerate() {
                for (j, entry) in row.iter().enumerate().skip(i + 1) {
                    if *entry != rows[j][i] {
                        return Err(Error::InvalidArgument(format!(
                            "{field}: rows[{i}][{j}] and rows[{j}][{i}] differ; metrics are symmetric"
                        )));
                    }
                }
            }
            Metric::from_exprs(chart, parsed)
        }
    }
}

impl MapSpecFile {
    pub fn parse(text: &str) -> Result<MapSpecFile, Error> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("map description: {}", e.message())))
    }

    /// Validate and lower into library objects. `seed` drives the optional
    /// random samples; fixed seed means byte-identical sample sets.
    pub fn load(&self, seed: u64) -> Result<LoadedMapSpec, Error> {
        if self.source.dim == 0 || self.target.dim == 0 {
            return Err(Error::InvalidArgument("chart dimensions must be at least 1".into()));
        }
        if let Some(md) = self.target.manifold_dim
            && !(1..=self.target.dim).contains(&md)
        {
            return Err(Error::InvalidArgument(
                "target manifold_dim must lie in 1..=dim".into(),
            ));
        }
        if self.map.components.len() != self.target.dim {
            return Err(Error::InvalidArgument(format!(
                "map needs {} components, got {}",
                self.target.dim,
                self.map.components.len()
            )));
        }

        let source_chart = Chart::euclidean(self.source.dim);
        let target_chart = match self.target.manifold_dim {
            Some(md) => Chart::embedded(self.target.dim, md, "target", |_| true),
            None => Chart::euclidean(self.target.dim),
        };

        let mut exprs = Vec::with_capacity(self.map.components.len());
        for (i, src) in self.map.components.iter().enumerate() {
            exprs.push(parse_expr(&format!("map.components[{i}]"), src, self.source.dim)?);
        }
        let map = SmoothMap::from_exprs(source_chart.clone(), target_chart.clone(), exprs)?;
        let source_metric = build_metric("source.metric", &self.source.metric, source_chart)?;
        let target_metric = build_metric("target.metric", &self.target.metric, target_chart)?;

        let samples = self.sample_points(seed)?;
        if samples.is_empty() {
            return Err(Error::InvalidArgument(
                "sampling produced no points (exclusions too aggressive?)".into(),
            ));
        }
        Ok(LoadedMapSpec { map, source_metric, target_metric, samples })
    }

    fn sample_points(&self, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
        let ranges = self
            .samples
            .box_ranges
            .as_ref()
            .or(self.samples.box_alias.as_ref())
            .ok_or_else(|| Error::InvalidArgument("samples.box is required".into()))?;
        if ranges.len() != self.source.dim {
            return Err(Error::InvalidArgument(format!(
                "samples.box needs {} ranges, got {}",
                self.source.dim,
                ranges.len()
            )));
        }
        let excluded = |p: &[f64]| -> bool {
            self.samples.exclude.iter().flatten().any(|e| {
                e.center.len() == p.len()
                    && p.iter()
                        .zip(&e.center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        < e.radius
            })
        };

        let mut points = Vec::new();
        let per_axis = self.samples.grid.unwrap_or(4).max(1);
        let pairs: Vec<(f64, f64)> = ranges.iter().map(|r| (r[0], r[1])).collect();
        let counts = vec![per_axis; pairs.len()];
        for p in infharm::catalog::tensor_grid(&pairs, &counts) {
            if !excluded(&p) {
                points.push(p);
            }
        }
        let random = self.samples.random.unwrap_or(0);
        if random > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut produced = 0;
            let mut attempts = 0;
            while produced < random && attempts < random * 100 {
                attempts += 1;
                let p: Vec<f64> =
                    pairs.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
                if !excluded(&p) {
                    points.push(p);
                    produced += 1;
                }
            }
        }
        Ok(points)
    }
}
