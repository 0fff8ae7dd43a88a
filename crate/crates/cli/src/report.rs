//! Report types emitted by the CLI. The JSON schema is versioned through
//! `schema_version` (currently 1) and kept stable for downstream scripts;
//! reports are deterministic for a fixed seed and configuration.

use infharm::Verdict;
use infharm::operators::WorstResiduals;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub tolerance: f64,
    pub seed: u64,
    pub entries: Vec<EntryReport>,
    pub all_passed: bool,
}

#[derive(Serialize)]
pub struct EntryReport {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub expected_verdicts: Vec<Verdict>,
    pub verdicts: Vec<Verdict>,
    pub worst_residuals: WorstResiduals,
    /// Worst relative error against the closed-form energy; absent when the
    /// entry ships no closed form.
    pub energy_max_rel_error: Option<f64>,
    pub sample_count: usize,
    pub critical_points: usize,
    pub near_degenerate_points: usize,
    pub rank_deficient_points: usize,
    /// For negative controls: the witness threshold and what was measured.
    pub negative_witness: Option<NegativeWitness>,
}

#[derive(Serialize)]
pub struct NegativeWitness {
    pub required_above: f64,
    pub measured: f64,
}

#[derive(Serialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub file: String,
    pub tolerance: f64,
    pub seed: u64,
    pub sample_count: usize,
    pub verdicts: Vec<Verdict>,
    pub worst_residuals: WorstResiduals,
    pub critical_points: usize,
    pub near_degenerate_points: usize,
    pub rank_deficient_points: usize,
}

#[derive(Serialize)]
pub struct ReduceReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub branch: String,
    pub sample_count: usize,
    pub conserved_constant: Option<f64>,
    pub max_invariant_residual: f64,
    pub turning_point: Option<f64>,
    pub period: Option<f64>,
    pub verification: VerificationReport,
    pub csv_path: Option<String>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct VerificationReport {
    pub grid_points: usize,
    pub max_inf_residual: f64,
    pub max_energy_error: f64,
    pub energy_min: f64,
    pub energy_max: f64,
}

#[derive(Serialize)]
pub struct ConformalReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub space: String,
    pub expression: String,
    pub dim: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_abs_residual: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct CatalogReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub entries: Vec<CatalogListing>,
}

#[derive(Serialize)]
pub struct CatalogListing {
    pub id: String,
    pub description: String,
    pub expected_verdicts: Vec<Verdict>,
    pub sample_count: usize,
}

pub fn verdict_names(verdicts: &[Verdict]) -> String {
    if verdicts.is_empty() {
        return "none".into();
    }
    verdicts
        .iter()
        .map(|v| {
            serde_json::to_value(v)
                .expect("verdict serializes")
                .as_str()
                .expect("verdict is a string")
                .to_string()
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl CheckReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "id,passed,verdicts,worst_infinity,worst_conformality,worst_verticality,worst_homothety,energy_max_rel_error\n",
                );
                for e in &self.entries {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        e.id,
                        e.passed,
                        verdict_names(&e.verdicts),
                        e.worst_residuals.infinity_harmonic,
                        e.worst_residuals.conformality,
                        e.worst_residuals.verticality,
                        e.worst_residuals.homothety,
                        e.energy_max_rel_error.map_or(String::from(""), |v| v.to_string()),
                    ));
                }
                out
            }
            OutputFormat::Human => {
                let mut out = format!(
                    "catalog check (tolerance {:.1e}, {} entries)\n",
                    self.tolerance,
                    self.entries.len()
                );
                for e in &self.entries {
                    out.push_str(&format!(
                        "  {:<28} {}  verdicts: {}  worst inf {:.2e}\n",
                        e.id,
                        if e.passed { "PASS" } else { "FAIL" },
                        verdict_names(&e.verdicts),
                        e.worst_residuals.infinity_harmonic,
                    ));
                }
                out.push_str(if self.all_passed { "all entries passed\n" } else { "FAILURES present\n" });
                out
            }
        }
    }
}

impl ClassifyReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => format!(
                "verdicts,worst_infinity,worst_conformality,worst_verticality,worst_homothety,samples\n{},{},{},{},{},{}\n",
                verdict_names(&self.verdicts),
                self.worst_residuals.infinity_harmonic,
                self.worst_residuals.conformality,
                self.worst_residuals.verticality,
                self.worst_residuals.homothety,
                self.sample_count,
            ),
            OutputFormat::Human => {
                let w = &self.worst_residuals;
                format!(
                    "classification of {} ({} samples, tolerance {:.1e})\n\
                     verdicts: {}\n\
                     residuals:\n\
                     \x20 infinity harmonicity  {:.3e}\n\
                     \x20 conformality          {:.3e}\n\
                     \x20 verticality           {:.3e}\n\
                     \x20 homothety             {:.3e}\n\
                     points: {} critical, {} near-degenerate, {} rank-deficient\n",
                    self.file,
                    self.sample_count,
                    self.tolerance,
                    verdict_names(&self.verdicts),
                    w.infinity_harmonic,
                    w.conformality,
                    w.verticality,
                    w.homothety,
                    self.critical_points,
                    self.near_degenerate_points,
                    self.rank_deficient_points,
                )
            }
        }
    }
}

impl ReduceReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv | OutputFormat::Human => {
                let v = &self.verification;
                format!(
                    "reduction `{}`: {}\n\
                     \x20 samples                {}\n\
                     \x20 conserved constant     {}\n\
                     \x20 max invariant residual {:.3e}\n\
                     \x20 turning point          {}\n\
                     \x20 period                 {}\n\
                     \x20 verification: {} grid points, max |inf laplacian| {:.3e}, max energy error {:.3e}\n{}",
                    self.branch,
                    if self.passed { "PASS" } else { "FAIL" },
                    self.sample_count,
                    self.conserved_constant.map_or("-".into(), |c| format!("{c}")),
                    self.max_invariant_residual,
                    self.turning_point.map_or("-".into(), |t| format!("{t}")),
                    self.period.map_or("-".into(), |t| format!("{t}")),
                    v.grid_points,
                    v.max_inf_residual,
                    v.max_energy_error,
                    self.csv_path
                        .as_ref()
                        .map_or(String::new(), |p| format!("  profile csv            {p}\n")),
                )
            }
        }
    }
}

impl ConformalReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv | OutputFormat::Human => format!(
                "{} equation residual for `{}` (dim {}, {} samples): max {:.3e} -> {}\n",
                self.space,
                self.expression,
                self.dim,
                self.sample_count,
                self.max_abs_residual,
                if self.passed { "PASS" } else { "FAIL" }
            ),
        }
    }
}

impl CatalogReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("id,expected_verdicts,samples,description\n");
                for e in &self.entries {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        e.id,
                        verdict_names(&e.expected_verdicts),
                        e.sample_count,
                        e.description
                    ));
                }
                out
            }
            OutputFormat::Human => {
                let mut out = String::from("catalog entries:\n");
                for e in &self.entries {
                    out.push_str(&format!(
                        "  {:<28} [{}] {}\n",
                        e.id,
                        verdict_names(&e.expected_verdicts),
                        e.description
                    ));
                }
                out
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
