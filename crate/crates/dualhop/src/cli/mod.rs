//! Scenario files, sweeps, tables and validation reports.

mod config;
mod sweep;
mod tables;
mod validate;

pub use config::{
    parse_config, parse_config_str, FsoConfig, NamedModulation, RfConfig, ScenarioConfig, SnrReference,
    POINTING_PRESETS, TURBULENCE_PRESETS,
};
pub use sweep::{
    evaluate_point, read_csv, run_sweep, write_csv, MetricKind, OutputRow, PointFailure, SweepMethod, SweepOutput,
    SweepSpec, CSV_HEADER,
};
pub use tables::{
    cmd_tables, Table, TableRow, FTR_ROWS, TABLE1_PUBLISHED, TABLE2_PUBLISHED, TABLE3_C_R, TABLE3_EPSILON,
    TABLE3_PUBLISHED, TABLE3_ROWS, TABLE3_SNR_DB,
};
pub use validate::{cmd_validate, Check, ValidationBudget, ValidationReport, MC_SIGMAS, ORACLE_REL_TOL};

use std::path::PathBuf;

/// Directory of the shipped scenario files.
pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

/// The eight preset scenarios, sorted by file name.
pub fn preset_paths() -> Vec<PathBuf> {
    toml_files(scenarios_dir().join("presets"))
}

/// Figure scenarios, sorted by file name.
pub fn figure_paths() -> Vec<PathBuf> {
    toml_files(scenarios_dir().join("figures"))
}

fn toml_files(dir: PathBuf) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "toml")).collect())
        .unwrap_or_default();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Detection, TruncationMode, XI_INF};
    use crate::error::Error;
    use crate::link_metrics::RelayConfig;

    const MINIMAL: &str = "[fso]\nalpha = 4.0\nbeta = 2.0\n[rf]\nk = 10\nm = 2\ndelta = 0.5\n[relay]\nmode = \"df\"\n";

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            o => panic!("expected a config error, got {o:?}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config_str(MINIMAL, "min").unwrap();
        assert_eq!(c.id, "min");
        assert_eq!(c.gamma_th, 1.0);
        assert_eq!(c.truncation.mode, TruncationMode::TargetError(1e-6));
        assert_eq!(c.fso.xi, XI_INF);
        assert_eq!(c.fso.detection, Detection::Heterodyne);
        assert_eq!(c.relay, RelayConfig::Df);
        assert_eq!(c.modulations[0].name, "dbpsk");
    }

    #[test]
    fn af_without_gain_names_the_key() {
        let text = MINIMAL.replace("mode = \"df\"", "mode = \"af\"");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "relay.c_r");
    }

    #[test]
    fn df_with_gain_is_rejected() {
        let text = format!("{MINIMAL}c_r = 1.7\n");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "relay.c_r");
    }

    #[test]
    fn negative_gain_is_rejected() {
        let text = MINIMAL.replace("mode = \"df\"", "mode = \"af\"\nc_r = -1.7");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "relay.c_r");
    }

    #[test]
    fn presets_resolve() {
        let text = MINIMAL.replace("alpha = 4.0\nbeta = 2.0", "turbulence = \"moderate\"\npointing = \"strong\"\nr = 2");
        let c = parse_config_str(&text, "x").unwrap();
        assert_eq!((c.fso.alpha, c.fso.beta, c.fso.xi), (5.42, 3.8, 0.893));
        assert_eq!(c.fso.detection, Detection::ImDd);
    }

    #[test]
    fn unknown_and_mistyped_keys_are_named() {
        let text = format!("{MINIMAL}[mc]\nsampels = 10\n");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "mc.sampels");
        let text = MINIMAL.replace("k = 10", "k = \"ten\"");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "rf.k");
        let text = MINIMAL.replace("alpha = 4.0\n", "");
        assert_eq!(key_of(parse_config_str(&text, "x").unwrap_err()), "fso.alpha");
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let text = MINIMAL.replace("m = 2", "m = = 2");
        match parse_config_str(&text, "x").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn sweep_grid_and_validation() {
        let s = SweepSpec { snr_db_start: 0.0, snr_db_stop: 10.0, snr_db_step: 2.5, ..Default::default() };
        assert_eq!(s.grid(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert!(SweepSpec { snr_db_stop: 0.0, ..s.clone() }.validate().is_err());
        assert!(SweepSpec { snr_db_step: 0.0, ..s }.validate().is_err());
    }

    #[test]
    fn empty_metric_set_gives_header_only() {
        let c = parse_config_str(MINIMAL, "x").unwrap();
        let sweep = SweepSpec { metrics: vec![], ..Default::default() };
        let out = run_sweep(&c, &sweep).unwrap();
        assert!(out.rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&mut buf, &out.rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = parse_config_str(MINIMAL, "x").unwrap();
        let out = evaluate_point(&c, 10.0, &[MetricKind::Outage, MetricKind::Capacity], &[SweepMethod::Exact]);
        assert!(out.failures.is_empty());
        let mut buf = Vec::new();
        write_csv(&mut buf, &out.rows).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), out.rows);
    }

    #[test]
    fn asymptotic_rows_only_for_outage_and_ber() {
        let c = parse_config_str(MINIMAL, "x").unwrap();
        let out = evaluate_point(&c, 40.0, &MetricKind::ALL, &[SweepMethod::Asymptotic]);
        let labels: Vec<&str> = out.rows.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(labels, ["outage", "ber:dbpsk"]);
    }

    #[test]
    fn shipped_scenarios_parse() {
        let presets = preset_paths();
        assert_eq!(presets.len(), 8);
        for p in presets.iter().chain(&figure_paths()) {
            parse_config(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}
