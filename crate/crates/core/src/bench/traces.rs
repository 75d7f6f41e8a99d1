//! Workload and price traces for the provisioning experiment.
//!
//! On disk a trace set is a workload file (`timestamp,workload`), one price
//! file per data center (`timestamp,electricity_price,health_price`) and a
//! TOML file listing the data centers:
//!
//! ```toml
//! [[datacenter]]
//! name = "arizona"
//! pue = 1.18
//! capacity = 1.0
//! series_path = "arizona.csv"
//! ```
//!
//! Relative series paths are resolved against the TOML file's directory.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location, average health price, average electricity price and PUE of the
/// reference sites the synthetic generator is calibrated on.
pub const REFERENCE_SITES: [(&str, f64, f64, f64); 7] = [
    ("arizona", 17.29, 77.7, 1.18),
    ("iowa", 62.81, 62.6, 1.16),
    ("illinois", 49.93, 82.6, 1.35),
    ("texas", 48.19, 63.0, 1.28),
    ("virginia", 52.68, 87.0, 1.14),
    ("washington", 17.55, 62.0, 1.15),
    ("wyoming", 34.79, 76.1, 1.11),
];

/// Range synthetic health prices are kept in.
pub const HEALTH_PRICE_RANGE: (f64, f64) = (17.0, 63.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatacenterSpec {
    pub name: String,
    /// Power usage effectiveness `γ_i ≥ 1`.
    pub pue: f64,
    /// Capacity `M_i > 0`.
    pub capacity: f64,
    /// $/MWh per hour.
    pub electricity_price: Vec<f64>,
    /// $/MWh per hour.
    pub health_price: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub timestamps: Vec<String>,
    /// Normalized so that its maximum equals the total capacity.
    pub workload: Vec<f64>,
    pub datacenters: Vec<DatacenterSpec>,
}

impl Traces {
    pub fn horizon(&self) -> usize {
        self.workload.len()
    }

    pub fn total_capacity(&self) -> f64 {
        self.datacenters.iter().map(|d| d.capacity).sum()
    }

    /// Checks lengths, signs and the workload range.
    pub fn validate(&self) -> Result<()> {
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(Error::Alignment("trace horizon is zero".into()));
        }
        if self.datacenters.is_empty() {
            return Err(Error::Config("at least one data center is required".into()));
        }
        if self.timestamps.len() != horizon {
            return Err(Error::Alignment(format!(
                "{} timestamps for {horizon} workload values",
                self.timestamps.len()
            )));
        }
        for dc in &self.datacenters {
            if dc.electricity_price.len() != horizon || dc.health_price.len() != horizon {
                return Err(Error::Alignment(format!(
                    "data center '{}' has {} electricity and {} health prices, workload has {horizon}",
                    dc.name,
                    dc.electricity_price.len(),
                    dc.health_price.len()
                )));
            }
            if !(dc.pue >= 1.0) || !dc.pue.is_finite() {
                return Err(Error::Config(format!("data center '{}' has PUE {} < 1", dc.name, dc.pue)));
            }
            if !(dc.capacity > 0.0) || !dc.capacity.is_finite() {
                return Err(Error::Config(format!("data center '{}' needs positive capacity", dc.name)));
            }
            if dc.electricity_price.iter().chain(&dc.health_price).any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Config(format!("data center '{}' has a negative or non-finite price", dc.name)));
            }
        }
        let cap = self.total_capacity();
        if let Some(t) = self.workload.iter().position(|&w| !(w >= 0.0) || w > cap * (1.0 + 1e-12)) {
            return Err(Error::Infeasible(format!(
                "workload {} at hour {t} outside [0, {cap}]",
                self.workload[t]
            )));
        }
        Ok(())
    }

    /// Rescales the workload so that its peak equals the total capacity.
    pub fn normalize_workload(&mut self) {
        let peak = self.workload.iter().copied().fold(0.0, f64::max);
        if peak > 0.0 {
            let scale = self.total_capacity() / peak;
            for w in &mut self.workload {
                *w *= scale;
            }
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct DatacenterEntry {
    name: String,
    pue: f64,
    capacity: f64,
    series_path: PathBuf,
}

#[derive(Debug, Deserialize, Serialize)]
struct DatacenterFile {
    datacenter: Vec<DatacenterEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
struct WorkloadRow {
    timestamp: String,
    workload: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct PriceRow {
    timestamp: String,
    electricity_price: f64,
    health_price: f64,
}

fn parse_error(file: &Path, headers: Option<&csv::StringRecord>, err: csv::Error) -> Error {
    let row = err.position().map_or(0, |p| p.line() as usize);
    let column = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.field().map_or_else(
            || "?".to_string(),
            |i| {
                headers
                    .and_then(|h| h.get(i as usize))
                    .map_or_else(|| i.to_string(), str::to_string)
            },
        ),
        _ => "?".to_string(),
    };
    Error::Parse {
        file: file.display().to_string(),
        row,
        column,
        message: err.to_string(),
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse {
                file: path.display().to_string(),
                row: 0,
                column: "?".into(),
                message: format!("{other:?}"),
            },
        })?;
    let headers = reader.headers().ok().cloned();
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| parse_error(path, headers.as_ref(), e))?;
    if rows.is_empty() {
        return Err(Error::Parse {
            file: path.display().to_string(),
            row: 1,
            column: "*".into(),
            message: "file has no data rows".into(),
        });
    }
    Ok(rows)
}

/// Reads a workload file and a data-center list, aligns every series on the
/// workload timestamps and normalizes the workload peak to total capacity.
pub fn load_traces(workload_path: &Path, datacenter_config_path: &Path) -> Result<Traces> {
    let workload_rows: Vec<WorkloadRow> = read_rows(workload_path)?;
    if let Some((i, row)) = workload_rows.iter().enumerate().find(|(_, r)| !(r.workload >= 0.0)) {
        return Err(Error::Parse {
            file: workload_path.display().to_string(),
            row: i + 2,
            column: "workload".into(),
            message: format!("workload must be nonnegative, got {}", row.workload),
        });
    }
    let timestamps: Vec<String> = workload_rows.iter().map(|r| r.timestamp.clone()).collect();
    let workload: Vec<f64> = workload_rows.iter().map(|r| r.workload).collect();

    let text = fs::read_to_string(datacenter_config_path)?;
    let config: DatacenterFile = toml::from_str(&text).map_err(|e| Error::Parse {
        file: datacenter_config_path.display().to_string(),
        row: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
        column: "datacenter".into(),
        message: e.message().to_string(),
    })?;
    let base = datacenter_config_path.parent().unwrap_or(Path::new("."));

    let mut datacenters = Vec::with_capacity(config.datacenter.len());
    for entry in config.datacenter {
        let path = if entry.series_path.is_absolute() {
            entry.series_path.clone()
        } else {
            base.join(&entry.series_path)
        };
        let rows: Vec<PriceRow> = read_rows(&path)?;
        if rows.len() != timestamps.len() {
            return Err(Error::Alignment(format!(
                "data center '{}' has {} rows, workload has {}",
                entry.name,
                rows.len(),
                timestamps.len()
            )));
        }
        if let Some((i, (row, ts))) = rows.iter().zip(&timestamps).enumerate().find(|(_, (r, ts))| &r.timestamp != *ts) {
            return Err(Error::Alignment(format!(
                "data center '{}' row {} has timestamp '{}', workload has '{ts}'",
                entry.name,
                i + 2,
                row.timestamp
            )));
        }
        datacenters.push(DatacenterSpec {
            name: entry.name,
            pue: entry.pue,
            capacity: entry.capacity,
            electricity_price: rows.iter().map(|r| r.electricity_price).collect(),
            health_price: rows.iter().map(|r| r.health_price).collect(),
        });
    }
    let mut traces = Traces {
        timestamps,
        workload,
        datacenters,
    };
    traces.normalize_workload();
    traces.validate()?;
    Ok(traces)
}

/// Writes `traces` in the on-disk format under `dir`. Returns the workload
/// and data-center config paths.
pub fn write_traces(traces: &Traces, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_err = |path: &Path, e: csv::Error| parse_error(path, None, e);
    let workload_path = dir.join("workload.csv");
    let mut writer = csv::Writer::from_path(&workload_path).map_err(|e| csv_err(&workload_path, e))?;
    for (timestamp, &workload) in traces.timestamps.iter().zip(&traces.workload) {
        writer
            .serialize(WorkloadRow {
                timestamp: timestamp.clone(),
                workload,
            })
            .map_err(|e| csv_err(&workload_path, e))?;
    }
    writer.flush()?;

    let mut entries = Vec::new();
    for dc in &traces.datacenters {
        let file = format!("{}.csv", dc.name);
        let path = dir.join(&file);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        for (t, timestamp) in traces.timestamps.iter().enumerate() {
            writer
                .serialize(PriceRow {
                    timestamp: timestamp.clone(),
                    electricity_price: dc.electricity_price[t],
                    health_price: dc.health_price[t],
                })
                .map_err(|e| csv_err(&path, e))?;
        }
        writer.flush()?;
        entries.push(DatacenterEntry {
            name: dc.name.clone(),
            pue: dc.pue,
            capacity: dc.capacity,
            series_path: PathBuf::from(file),
        });
    }
    let config_path = dir.join("datacenters.toml");
    let text = toml::to_string(&DatacenterFile { datacenter: entries })
        .map_err(|e| Error::Config(format!("cannot serialize data-center list: {e}")))?;
    fs::write(&config_path, text)?;
    Ok((workload_path, config_path))
}

/// Deterministic diurnal traces for `n` unit-capacity data centers over
/// `days` days, calibrated on [`REFERENCE_SITES`].
pub fn synth_trace(seed: u64, days: usize, n: usize) -> Traces {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 24 * days;
    let hour = |t: usize| 2.0 * PI * (t % 24) as f64 / 24.0;

    let workload: Vec<f64> = (0..horizon)
        .map(|t| {
            let daily = 0.5 + 0.5 * (hour(t) - 0.6 * PI).sin();
            let noise: f64 = rng.random_range(-0.05..0.05);
            (0.25 + daily.powf(1.5) + noise).max(0.02)
        })
        .collect();

    let datacenters = (0..n)
        .map(|i| {
            let (site, health, electricity, pue) = REFERENCE_SITES[i % REFERENCE_SITES.len()];
            let name = if i < REFERENCE_SITES.len() {
                site.to_string()
            } else {
                format!("{site}{}", i / REFERENCE_SITES.len() + 1)
            };
            // Each site follows its own local clock.
            let phase = 2.0 * PI * i as f64 / n as f64 + rng.random_range(0.0..0.5);
            let electricity_price = (0..horizon)
                .map(|t| {
                    let wave = (hour(t) - phase).sin();
                    let noise: f64 = rng.random_range(-0.03..0.03);
                    (electricity * (1.0 + 0.15 * wave + noise)).max(0.0)
                })
                .collect();
            let health_price = (0..horizon)
                .map(|t| {
                    let wave = (hour(t) - phase + 0.5 * PI).sin();
                    let noise: f64 = rng.random_range(-0.04..0.04);
                    (health * (1.0 + 0.3 * wave + noise)).clamp(HEALTH_PRICE_RANGE.0, HEALTH_PRICE_RANGE.1)
                })
                .collect();
            DatacenterSpec {
                name,
                pue,
                capacity: 1.0,
                electricity_price,
                health_price,
            }
        })
        .collect();

    let mut traces = Traces {
        timestamps: (0..horizon).map(|t| format!("d{}h{:02}", t / 24, t % 24)).collect(),
        workload,
        datacenters,
    };
    traces.normalize_workload();
    traces
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_shape_and_determinism() {
        let a = synth_trace(0, 7, 7);
        let b = synth_trace(0, 7, 7);
        assert_eq!(a, b);
        assert_eq!(a.horizon(), 168);
        assert_eq!(a.datacenters.len(), 7);
        assert!(a.validate().is_ok());
        let peak = a.workload.iter().copied().fold(0.0, f64::max);
        assert!((peak - 7.0).abs() < 1e-12);
        for dc in &a.datacenters {
            assert!(dc.health_price.iter().all(|&h| (17.0..=63.0).contains(&h)));
        }
        assert_ne!(synth_trace(1, 7, 7), a);
    }
}
