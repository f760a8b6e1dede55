//! Uniform result reporting for the command-line tool: plain text, versioned
//! JSON, or CSV rows of (experiment, key, value, unit).

use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub key: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub experiment: String,
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            report_version: REPORT_VERSION,
            experiment: experiment.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: f64, unit: impl Into<String>) {
        self.entries.push(ReportEntry {
            key: key.into(),
            value,
            unit: unit.into(),
        });
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut out = String::from("experiment,key,value,unit\n");
                for e in &self.entries {
                    out.push_str(&format!("{},{},{},{}\n", self.experiment, e.key, e.value, e.unit));
                }
                out
            }
            OutputFormat::Text => {
                let width = self.entries.iter().map(|e| e.key.len()).max().unwrap_or(0);
                let mut out = format!("[{}]\n", self.experiment);
                for e in &self.entries {
                    out.push_str(&format!("  {:width$}  {:.6}", e.key, e.value));
                    if !e.unit.is_empty() {
                        out.push(' ');
                        out.push_str(&e.unit);
                    }
                    out.push('\n');
                }
                out
            }
        }
    }
}
