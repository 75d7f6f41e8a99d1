use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Report, ReportRow, WindowCost, WindowFailure};
use super::traces::{load_traces, synth_trace, Traces};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::model::{ContextStep, CostBreakdown, Episode, FairnessSpec, QuadraticHitting};
use crate::policies::{optimal_lambdas, run_episode, HyperParams, PolicyKind};
use crate::solvers::{solve_fair_opt, solve_offline_opt, SolveOptions};

/// Label of the offline optimum in reports.
pub const OPT: &str = "OPT";
/// Label of the fairness-only offline optimum in reports.
pub const FAIR_OPT: &str = "FairOPT";

/// Where the experiment takes its traces from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum TraceSource {
    Synthetic { days: usize, datacenters: usize },
    Files { workload: PathBuf, datacenters: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Weight of the quadratic load regularizer.
    pub u1: f64,
    /// Switching weight.
    pub u2: f64,
    /// Fairness weight.
    pub u3: f64,
    /// Power drawn per unit of provisioned capacity.
    pub q: f64,
    #[serde(with = "crate::model::norm_order")]
    pub p: f64,
    pub window: usize,
    pub stride: usize,
    pub policies: Vec<PolicyKind>,
    /// Also solve the two offline benchmarks per window.
    pub offline: bool,
    pub fairobd: HyperParams,
    pub dmd: HyperParams,
    /// `None` picks the balanced weights for the episode's curvature and
    /// switching weight.
    pub robd: Option<HyperParams>,
    pub seed: u64,
    pub traces: TraceSource,
    pub solver: SolveOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            u1: 10.0,
            u2: 1000.0,
            u3: 3.5,
            q: 1.0,
            p: f64::INFINITY,
            window: 72,
            stride: 1,
            policies: PolicyKind::ALL.to_vec(),
            offline: true,
            fairobd: HyperParams::experiment(),
            dmd: HyperParams::experiment(),
            robd: None,
            seed: 0,
            traces: TraceSource::Synthetic {
                days: 7,
                datacenters: 7,
            },
            solver: SolveOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("u1", self.u1), ("u2", self.u2), ("u3", self.u3), ("q", self.q)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite and nonnegative")));
            }
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::Config(format!("norm order p = {} must be at least 1", self.p)));
        }
        if self.window == 0 || self.stride == 0 {
            return Err(Error::Config("window and stride must be positive".into()));
        }
        self.fairobd.validate(PolicyKind::FairObd)?;
        self.dmd.validate(PolicyKind::Dmd)?;
        if let Some(robd) = &self.robd {
            robd.validate(PolicyKind::Robd)?;
        }
        self.solver.validate()
    }

    /// Sets the constant learning rate of both dual policies.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.fairobd = self.fairobd.with_eta(eta);
        self.dmd = self.dmd.with_eta(eta);
        self
    }

    /// Loads or generates the traces this config points at.
    pub fn load_traces(&self) -> Result<Traces> {
        match &self.traces {
            TraceSource::Synthetic { days, datacenters } => {
                if *days == 0 || *datacenters == 0 {
                    return Err(Error::Config("synthetic traces need at least one day and one data center".into()));
                }
                Ok(synth_trace(self.seed, *days, *datacenters))
            }
            TraceSource::Files { workload, datacenters } => load_traces(workload, datacenters),
        }
    }

    fn hyper_for(&self, kind: PolicyKind) -> Result<HyperParams> {
        match kind {
            PolicyKind::FairObd => Ok(self.fairobd.clone()),
            PolicyKind::Dmd => Ok(self.dmd.clone()),
            PolicyKind::Robd => match &self.robd {
                Some(h) => Ok(h.clone()),
                None => HyperParams::robd(2.0 * self.u1, self.u2),
            },
            PolicyKind::HitMin => Ok(HyperParams::experiment()),
        }
    }
}

/// Start indices of the sliding windows: `floor((H − W)/stride) + 1` of them.
pub fn windows(horizon: usize, window: usize, stride: usize) -> Result<Vec<usize>> {
    if window == 0 || stride == 0 {
        return Err(Error::Config("window and stride must be positive".into()));
    }
    if window > horizon {
        return Err(Error::Config(format!("window {window} exceeds trace length {horizon}")));
    }
    Ok((0..=(horizon - window) / stride).map(|k| k * stride).collect())
}

/// The provisioning episode on hours `start .. start + W`.
///
/// Round `t` has hitting cost `Σ_i pᵉ_{i,t}γ_i q x_i + u₁‖x‖²`, fairness
/// matrix `diag(γ_i pʰ_{i,t} q)` and action set `{Σx = w_t, 0 ≤ x ≤ M}`.
/// The initial action splits the first hour's workload in proportion to
/// capacity.
pub fn build_episode(config: &ExperimentConfig, traces: &Traces, start: usize) -> Result<Episode> {
    let n = traces.datacenters.len();
    let end = start + config.window;
    if n == 0 {
        return Err(Error::Config("no data centers".into()));
    }
    if end > traces.horizon() {
        return Err(Error::Config(format!(
            "window [{start}, {end}) exceeds trace length {}",
            traces.horizon()
        )));
    }
    let caps = DVector::from_iterator(n, traces.datacenters.iter().map(|d| d.capacity));
    let total_cap = caps.sum();
    let mut steps = Vec::with_capacity(config.window);
    let mut sets = Vec::with_capacity(config.window);
    for t in start..end {
        let w = traces.workload[t];
        if w > total_cap * (1.0 + 1e-12) || w < 0.0 {
            return Err(Error::Infeasible(format!(
                "hour {t}: workload {w} outside [0, {total_cap}]"
            )));
        }
        let linear = DVector::from_iterator(
            n,
            traces.datacenters.iter().map(|d| d.electricity_price[t] * d.pue * config.q),
        );
        let health = DVector::from_iterator(n, traces.datacenters.iter().map(|d| d.pue * d.health_price[t] * config.q));
        let hitting = QuadraticHitting::new(DVector::zeros(n), 2.0 * config.u1, linear, 0.0)?;
        steps.push(ContextStep::new(hitting, DMatrix::from_diagonal(&health)));
        sets.push(FeasibleSet::capped_simplex(w.min(total_cap), caps.clone()));
    }
    let x0 = &caps * (traces.workload[start].min(total_cap) / total_cap);
    Episode::new(steps, x0, config.u2, FairnessSpec::new(config.u3, config.p)?, sets)
}

enum Outcome {
    Cost(CostBreakdown, Option<String>),
    Failed(WindowFailure),
}

fn run_window(config: &ExperimentConfig, traces: &Traces, start: usize, labels: &[String]) -> Vec<Outcome> {
    let episode = match build_episode(config, traces, start) {
        Ok(e) => e,
        Err(e) => return labels.iter().map(|_| Outcome::Failed(WindowFailure::new(start, &e))).collect(),
    };
    labels
        .iter()
        .map(|label| {
            let result = match label.as_str() {
                OPT => solve_offline_opt(&episode, &config.solver).map(|s| (s.cost, s.warning)),
                FAIR_OPT => solve_fair_opt(&episode, &config.solver).map(|s| (s.cost, s.warning)),
                name => name.parse::<PolicyKind>().and_then(|kind| {
                    let hyper = config.hyper_for(kind)?;
                    run_episode(kind, &episode, &hyper, &config.solver).map(|r| (r.cost, None))
                }),
            };
            match result {
                Ok((cost, warning)) => Outcome::Cost(cost, warning),
                Err(e) => Outcome::Failed(WindowFailure::new(start, &e)),
            }
        })
        .collect()
}

/// Runs every configured policy, plus the offline benchmarks when enabled, on
/// every window. Windows run in parallel; a failing window is recorded in the
/// report and does not stop the others.
pub fn run_experiment(config: &ExperimentConfig, traces: &Traces) -> Result<Report> {
    config.validate()?;
    traces.validate()?;
    let starts = windows(traces.horizon(), config.window, config.stride)?;
    let mut labels: Vec<String> = Vec::new();
    if config.offline {
        labels.push(OPT.into());
        labels.push(FAIR_OPT.into());
    }
    labels.extend(config.policies.iter().map(|k| k.name().to_string()));

    let outcomes: Vec<Vec<Outcome>> = starts
        .par_iter()
        .map(|&start| run_window(config, traces, start, &labels))
        .collect();

    let rows = labels
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let mut row = ReportRow::new(label);
            for (&start, window) in starts.iter().zip(&outcomes) {
                match &window[j] {
                    Outcome::Cost(cost, warning) => {
                        row.windows.push(WindowCost { start, cost: *cost });
                        if let Some(w) = warning {
                            row.warnings.push(format!("window {start}: {w}"));
                        }
                    }
                    Outcome::Failed(f) => row.failures.push(f.clone()),
                }
            }
            row.recompute_means();
            row
        })
        .collect();
    Report::new(config, traces.horizon(), starts.len(), rows)
}

/// One point of a hyperparameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub u3: f64,
    pub lambda2: f64,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub eta: Vec<f64>,
    pub u3: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            eta: vec![1e-2, 1e-3, 1e-4],
            u3: vec![3.5],
            lambda2: vec![30.0],
        }
    }
}

/// Runs the experiment on the Cartesian product of the grid. `η` and `λ₂`
/// apply to FairOBD and DMD.
pub fn run_sweep(config: &ExperimentConfig, traces: &Traces, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for &u3 in &grid.u3 {
        for &lambda2 in &grid.lambda2 {
            for &eta in &grid.eta {
                let mut cfg = config.clone().with_eta(eta);
                cfg.u3 = u3;
                cfg.fairobd.lambda2 = lambda2;
                cfg.dmd.lambda2 = lambda2;
                let report = run_experiment(&cfg, traces)?;
                points.push(SweepPoint {
                    eta,
                    u3,
                    lambda2,
                    report,
                });
            }
        }
    }
    Ok(points)
}

/// `λ₂` ROBD uses under the default experiment weights.
pub fn default_robd_lambda2(config: &ExperimentConfig) -> Result<f64> {
    optimal_lambdas(2.0 * config.u1, config.u2).map(|(_, l2)| l2)
}
