//! Experiment reports and their CSV / JSON forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Band, ExperimentConfig};
use crate::io::{fmt_float, to_json_string, Table};
use crate::LabError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One aggregate statistic and its verdict against the configured band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Band>,
    /// `None` when no band is configured for this statistic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub aggregate: BTreeMap<String, Statistic>,
    /// The first table holds the per-run metrics.
    pub tables: Vec<Table>,
    pub pass: bool,
    #[serde(default)]
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Report {
            version: VERSION.to_string(),
            config,
            aggregate: BTreeMap::new(),
            tables: Vec::new(),
            pass: true,
            wall_clock_seconds: 0.0,
        }
    }

    /// Records a statistic, judged by the band of the same name if any.
    pub fn stat(&mut self, name: &str, value: f64, stderr: Option<f64>) {
        let band = self.config.bands.get(name).copied();
        let pass = band.map(|b| b.contains(value));
        let stderr = stderr.filter(|s| s.is_finite());
        let value = if value.is_finite() { value } else { f64::MAX.copysign(value) };
        self.aggregate.insert(name.to_string(), Statistic { value, stderr, band, pass });
        self.pass = self.aggregate.values().all(|s| s.pass != Some(false));
    }

    pub fn metrics(&self) -> Option<&Table> {
        self.tables.first()
    }

    /// Bands in the config with no statistic of that name.
    pub fn unmatched_bands(&self) -> Vec<&str> {
        self.config.bands.keys().filter(|k| !self.aggregate.contains_key(*k)).map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Columns of the CSV form of a report.
pub const REPORT_CSV_HEADER: &str = "statistic,value,stderr,band_min,band_max,pass";

/// Serialises a report. The CSV form holds the aggregate section only and no
/// wall-clock time, so it is reproducible byte for byte.
pub fn emit_report(report: &Report, format: Format) -> Result<Vec<u8>, LabError> {
    match format {
        Format::Json => {
            let v = serde_json::to_value(report).map_err(|e| LabError::Config(e.to_string()))?;
            Ok(to_json_string(&v).into_bytes())
        }
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
            let mut out = String::from(REPORT_CSV_HEADER);
            out.push('\n');
            for (name, s) in &report.aggregate {
                let band = s.band.unwrap_or_default();
                let pass = s.pass.map(|p| p.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{name},{},{},{},{},{pass}\n",
                    fmt_float(s.value),
                    opt(s.stderr),
                    opt(band.min),
                    opt(band.max)
                ));
            }
            Ok(out.into_bytes())
        }
    }
}

/// Reads the JSON form back.
pub fn parse_report(bytes: &[u8]) -> Result<Report, LabError> {
    serde_json::from_slice(bytes).map_err(|e| LabError::Config(format!("report: {e}")))
}
