//! The data-center provisioning experiment: traces, episodes, sliding-window
//! runs and reports.

mod experiment;
mod report;
mod traces;

pub use experiment::{
    build_episode, default_robd_lambda2, run_experiment, run_sweep, windows, ExperimentConfig, SweepGrid,
    SweepPoint, TraceSource, FAIR_OPT, OPT,
};
pub use report::{Report, ReportRow, WindowCost, WindowFailure};
pub use traces::{
    load_traces, synth_trace, write_traces, DatacenterSpec, Traces, HEALTH_PRICE_RANGE, REFERENCE_SITES,
};
