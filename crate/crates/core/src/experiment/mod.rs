//! Config-driven experiments and the report bundle they write:
//! `results.csv`, `series.csv`, `verdicts.json` and `chart.svg`.

mod config;
mod run;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::check::Check;
use crate::error::{LabError, Result};
use crate::forward::ForwardSpec;
use crate::generator::GeneratorSpec;

pub use config::{
    ConverseGrid, Enlargement, Expectation, ExperimentConfig, ExperimentKind, ForwardChoice, ProbeConfig, RawConfig,
    TerminalSpec,
};
pub use run::run_experiment;
pub use svg::{Chart, Line};

/// Settings given on the command line rather than in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: None,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Io(e.to_string()))
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Num(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub kind: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub version: String,
}

impl Provenance {
    pub fn new(config_text: &str, kind: ExperimentKind, seed: u64, tolerance_scale: f64) -> Self {
        let digest = Sha256::digest(config_text.as_bytes());
        Provenance {
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            kind: kind.name().to_string(),
            seed,
            tolerance_scale,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub provenance: Provenance,
    pub results: Table,
    pub series: Option<Table>,
    pub chart: Option<Chart>,
    pub verdicts: Vec<Check>,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    provenance: &'a Provenance,
    pass: bool,
    verdicts: &'a [Check],
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdicts_json(&self) -> Result<String> {
        let file = VerdictFile {
            provenance: &self.provenance,
            pass: self.all_pass(),
            verdicts: &self.verdicts,
        };
        let mut s = serde_json::to_string_pretty(&file).map_err(|e| LabError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes the bundle into `dir` and returns the files written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
            out.push(path);
            Ok(())
        };
        put("results.csv", self.results.to_csv()?)?;
        if let Some(series) = &self.series {
            put("series.csv", series.to_csv()?)?;
        }
        put("verdicts.json", self.verdicts_json()?)?;
        if let Some(chart) = &self.chart {
            put("chart.svg", chart.render())?;
        }
        Ok(out)
    }
}

fn flag_cell(name: &str, v: bool) -> String {
    format!("{name}={v}")
}

/// Sorted listing of built-in generators, forward models, terminals and
/// experiment kinds.
pub fn catalog_listing() -> String {
    let mut out = String::from("generators\n");
    let mut gens: Vec<GeneratorSpec> = GeneratorSpec::catalog();
    gens.sort_by_key(|g| g.to_string());
    for g in gens {
        let f = g.flags();
        let name = g.to_string();
        let family = name.split('(').next().unwrap_or_default().to_string();
        out.push_str(&format!(
            "  {family:<12} {name:<18} K={:<6} {} {} {} {} {}\n",
            g.lipschitz(1),
            flag_cell("independent_of_y", f.independent_of_y),
            flag_cell("positively_homogeneous", f.positively_homogeneous),
            flag_cell("subadditive", f.subadditive),
            flag_cell("convex_in_z", f.convex_in_z),
            flag_cell("satisfies_a5", f.satisfies_a5),
        ));
    }
    out.push_str("forward models\n");
    let mut models = [
        ForwardSpec::Brownian,
        ForwardSpec::Linear { a: 1.0, b0: 0.0, c: 1.0 },
        ForwardSpec::Sine,
    ];
    models.sort_by_key(|m| m.label());
    for m in models {
        let model = m.build();
        out.push_str(&format!(
            "  {:<18} L1={} L2={}\n",
            m.label(),
            model.lipschitz(),
            model.growth()
        ));
    }
    out.push_str("terminals\n");
    let mut terms = TerminalSpec::catalog();
    terms.sort_by_key(|t| t.to_string());
    for t in terms {
        out.push_str(&format!("  {:<22} {}\n", t.to_string(), t.describe()));
    }
    out.push_str("experiments\n");
    for k in ExperimentKind::ALL {
        out.push_str(&format!("  {}\n", k.name()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_formats_floats() {
        let mut t = Table::new(&["name", "value", "n", "ok", "blank"]);
        t.push(vec!["a,b".into(), 0.1.into(), 3usize.into(), true.into(), Cell::Empty]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "name,value,n,ok,blank\n\"a,b\",1.0000000000000001e-1,3,true,\n");
        assert_eq!(t.column("value").unwrap(), vec![0.1]);
        assert!(t.column("name").is_none());
    }

    #[test]
    fn listing_is_sorted_and_flags_kappa() {
        let a = catalog_listing();
        assert_eq!(a, catalog_listing());
        let line = a.lines().find(|l| l.contains("kappa_abs_z")).unwrap();
        assert!(line.contains("convex_in_z=true"));
        let gens: Vec<&str> = a
            .lines()
            .skip(1)
            .take_while(|l| l.starts_with("  "))
            .map(|l| l.split_whitespace().next().unwrap())
            .collect();
        let mut sorted = gens.clone();
        sorted.sort();
        assert_eq!(gens, sorted);
    }

    #[test]
    fn provenance_hash_is_stable() {
        let a = Provenance::new("grid.T = 1\n", ExperimentKind::Solve, 7, 1.0);
        let b = Provenance::new("grid.T = 1\n", ExperimentKind::Solve, 7, 1.0);
        assert_eq!(a, b);
        assert_eq!(a.config_sha256.len(), 64);
        assert_ne!(a.config_sha256, Provenance::new("grid.T = 2\n", ExperimentKind::Solve, 7, 1.0).config_sha256);
    }
}
