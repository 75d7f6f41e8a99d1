use std::fs;
use std::path::Path;

use fairobd::bench::{load_traces, synth_trace, write_traces, ExperimentConfig, Report};
use fairobd::Error;

fn write_site(dir: &Path, name: &str, rows: &[(&str, f64, f64)]) {
    let mut text = String::from("timestamp,electricity_price,health_price\n");
    for (ts, e, h) in rows {
        text.push_str(&format!("{ts},{e},{h}\n"));
    }
    fs::write(dir.join(format!("{name}.csv")), text).unwrap();
}

fn write_list(dir: &Path, names: &[&str]) -> std::path::PathBuf {
    let mut text = String::new();
    for name in names {
        text.push_str(&format!(
            "[[datacenter]]\nname = \"{name}\"\npue = 1.2\ncapacity = 2.0\nseries_path = \"{name}.csv\"\n\n"
        ));
    }
    let path = dir.join("datacenters.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn week_of_hourly_data_for_seven_sites() {
    let dir = tempfile::tempdir().unwrap();
    let hours = 168;
    let stamps: Vec<String> = (0..hours).map(|h| format!("2024-01-{:02}T{:02}:00", 1 + h / 24, h % 24)).collect();
    let mut workload = String::from("timestamp,workload\n");
    for (h, ts) in stamps.iter().enumerate() {
        workload.push_str(&format!("{ts},{}\n", 1.0 + (h % 24) as f64));
    }
    fs::write(dir.path().join("workload.csv"), workload).unwrap();
    let names = ["az", "ia", "il", "tx", "va", "wa", "wy"];
    for (k, name) in names.iter().enumerate() {
        let rows: Vec<(&str, f64, f64)> = stamps.iter().map(|ts| (ts.as_str(), 30.0 + k as f64, 20.0 + 5.0 * k as f64)).collect();
        write_site(dir.path(), name, &rows);
    }
    let list = write_list(dir.path(), &names);
    let traces = load_traces(&dir.path().join("workload.csv"), &list).unwrap();
    assert_eq!(traces.horizon(), 168);
    assert_eq!(traces.datacenters.len(), 7);
    assert_eq!(traces.datacenters[3].name, "tx");
    assert_eq!(traces.datacenters[6].health_price[100], 50.0);
    // Peak workload is scaled to total capacity; ratios are kept.
    let peak = traces.workload.iter().copied().fold(0.0, f64::max);
    assert!((peak - 14.0).abs() < 1e-12);
    assert!((traces.workload[0] / traces.workload[23] - 1.0 / 24.0).abs() < 1e-12);
}

#[test]
fn bad_number_reports_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("workload.csv"), "timestamp,workload\nt0,1\nt1,2\n").unwrap();
    write_site(dir.path(), "a", &[("t0", 1.0, 2.0)]);
    fs::write(
        dir.path().join("a.csv"),
        "timestamp,electricity_price,health_price\nt0,1.0,2.0\nt1,oops,2.0\n",
    )
    .unwrap();
    let list = write_list(dir.path(), &["a"]);
    match load_traces(&dir.path().join("workload.csv"), &list) {
        Err(Error::Parse { row, column, file, .. }) => {
            assert_eq!(row, 3);
            assert_eq!(column, "electricity_price");
            assert!(file.ends_with("a.csv"));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn misaligned_series_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("workload.csv"), "timestamp,workload\nt0,1\nt1,2\n").unwrap();
    write_site(dir.path(), "short", &[("t0", 1.0, 2.0)]);
    write_site(dir.path(), "shifted", &[("t0", 1.0, 2.0), ("t2", 1.0, 2.0)]);

    let list = write_list(dir.path(), &["short"]);
    assert!(matches!(load_traces(&dir.path().join("workload.csv"), &list), Err(Error::Alignment(_))));
    let list = write_list(dir.path(), &["shifted"]);
    match load_traces(&dir.path().join("workload.csv"), &list) {
        Err(Error::Alignment(msg)) => assert!(msg.contains("t2")),
        other => panic!("expected an alignment error, got {other:?}"),
    }
}

#[test]
fn negative_workload_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("workload.csv"), "timestamp,workload\nt0,1\nt1,-2\n").unwrap();
    write_site(dir.path(), "a", &[("t0", 1.0, 2.0), ("t1", 1.0, 2.0)]);
    let list = write_list(dir.path(), &["a"]);
    match load_traces(&dir.path().join("workload.csv"), &list) {
        Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (3, "workload")),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(load_traces(&dir.path().join("nope.csv"), &list), Err(Error::Io(_))));
}

#[test]
fn synthetic_traces_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let traces = synth_trace(4, 2, 3);
    assert_eq!(synth_trace(4, 2, 3), traces);
    assert_ne!(synth_trace(5, 2, 3).workload, traces.workload);
    let (workload, list) = write_traces(&traces, dir.path()).unwrap();
    let back = load_traces(&workload, &list).unwrap();
    assert_eq!(back.timestamps, traces.timestamps);
    for (a, b) in back.workload.iter().zip(&traces.workload) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    for (a, b) in back.datacenters.iter().zip(&traces.datacenters) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.electricity_price, b.electricity_price);
        assert_eq!(a.health_price, b.health_price);
    }
}

#[test]
fn config_parses_and_rejects_bad_values() {
    let config = ExperimentConfig::from_toml("window = 48\np = \"inf\"\npolicies = [\"FairOBD\", \"DMD\"]\n").unwrap();
    assert_eq!(config.window, 48);
    assert!(config.p.is_infinite());
    assert!(ExperimentConfig::from_toml("window = \"wide\"").is_err());
    let bad = ExperimentConfig {
        u1: -1.0,
        ..ExperimentConfig::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn report_rejects_garbage() {
    assert!(matches!(Report::from_json("{ \"rows\": 3 }"), Err(Error::Parse { .. })));
}
