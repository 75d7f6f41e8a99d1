use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::experiment::ExperimentConfig;
use crate::error::{Error, Result};
use crate::model::CostBreakdown;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCost {
    pub start: usize,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFailure {
    pub start: usize,
    /// `convergence`, `infeasible`, `config` or `other`.
    pub kind: String,
    pub message: String,
}

impl WindowFailure {
    pub fn new(start: usize, error: &Error) -> Self {
        let kind = match error {
            Error::Convergence { .. } => "convergence",
            Error::Infeasible(_) => "infeasible",
            Error::Config(_) | Error::Domain(_) => "config",
            _ => "other",
        };
        WindowFailure {
            start,
            kind: kind.to_string(),
            message: error.to_string(),
        }
    }
}

/// One policy's costs over all windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub policy: String,
    /// Arithmetic mean over successful windows; `None` if every window failed.
    pub mean: Option<CostBreakdown>,
    pub successful: usize,
    pub windows: Vec<WindowCost>,
    pub failures: Vec<WindowFailure>,
    pub warnings: Vec<String>,
}

impl ReportRow {
    pub fn new(policy: &str) -> Self {
        ReportRow {
            policy: policy.to_string(),
            mean: None,
            successful: 0,
            windows: Vec::new(),
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn recompute_means(&mut self) {
        self.successful = self.windows.len();
        if self.windows.is_empty() {
            self.mean = None;
            return;
        }
        let k = self.windows.len() as f64;
        let sum = |f: fn(&CostBreakdown) -> f64| self.windows.iter().map(|w| f(&w.cost)).sum::<f64>() / k;
        self.mean = Some(CostBreakdown {
            hitting: sum(|c| c.hitting),
            switching: sum(|c| c.switching),
            fairness: sum(|c| c.fairness),
            total: sum(|c| c.total),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    /// SHA-256 of the config's JSON form.
    pub config_hash: String,
    pub seed: u64,
    pub horizon: usize,
    pub window_count: usize,
    pub rows: Vec<ReportRow>,
}

pub(crate) fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_string(config).map_err(|e| Error::Config(e.to_string()))?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

impl Report {
    pub fn new(config: &ExperimentConfig, horizon: usize, window_count: usize, rows: Vec<ReportRow>) -> Result<Self> {
        Ok(Report {
            config: config.clone(),
            config_hash: config_hash(config)?,
            seed: config.seed,
            horizon,
            window_count,
            rows,
        })
    }

    pub fn row(&self, policy: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.policy.eq_ignore_ascii_case(policy))
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| !r.failures.is_empty())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            file: "report".into(),
            row: e.line(),
            column: e.column().to_string(),
            message: e.to_string(),
        })
    }

    /// Metrics down, policies across.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config sha256 {}", self.config_hash);
        let _ = writeln!(
            out,
            "# seed {}  horizon {}  windows {} (W = {}, stride {})",
            self.seed, self.horizon, self.window_count, self.config.window, self.config.stride
        );
        let label_width = 15;
        let width = self.rows.iter().map(|r| r.policy.len()).max().unwrap_or(0).max(10) + 2;
        let _ = write!(out, "{:<label_width$}", "Metrics");
        for row in &self.rows {
            let _ = write!(out, "{:>width$}", row.policy);
        }
        out.push('\n');
        let metrics: [(&str, fn(&CostBreakdown) -> f64); 4] = [
            ("Hitting Cost", |c| c.hitting),
            ("Switching Cost", |c| c.switching),
            ("Fairness Cost", |c| c.fairness),
            ("Total Cost", |c| c.total),
        ];
        for (name, get) in metrics {
            let _ = write!(out, "{name:<label_width$}");
            for row in &self.rows {
                match &row.mean {
                    Some(c) => {
                        let _ = write!(out, "{:>width$.2}", get(c));
                    }
                    None => {
                        let _ = write!(out, "{:>width$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        for row in &self.rows {
            if !row.failures.is_empty() {
                let _ = writeln!(
                    out,
                    "# {}: {} of {} windows failed (means over {} windows)",
                    row.policy,
                    row.failures.len(),
                    self.window_count,
                    row.successful
                );
            }
            if !row.warnings.is_empty() {
                let _ = writeln!(out, "# {}: {} solver warnings", row.policy, row.warnings.len());
            }
        }
        out
    }
}
