//! Replays the checked-in fuzz corpora through the same entry points the
//! fuzz targets exercise.

use std::fs;
use std::path::PathBuf;

use maupertuis::io::{parse_diagnostics, read_loop_csv, read_orbit_csv, to_json, write_loop_csv, write_orbit_csv};
use maupertuis_cli::RunConfig;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut valid = 0;
    for (_, data) in seeds("config") {
        if let Ok(cfg) = RunConfig::parse(std::str::from_utf8(&data).unwrap()) {
            if cfg.validate().is_ok() {
                valid += 1;
            }
        }
    }
    assert!(valid >= 4);
}

#[test]
fn orbit_csv_seeds() {
    for (path, data) in seeds("orbit_csv") {
        let Ok(traj) = read_orbit_csv(data.as_slice()) else { continue };
        let mut buf = Vec::new();
        write_orbit_csv(&mut buf, &traj).unwrap();
        assert_eq!(read_orbit_csv(buf.as_slice()).unwrap(), traj, "{}", path.display());
    }
}

#[test]
fn loop_csv_seeds() {
    let mut accepted = 0;
    for (path, data) in seeds("loop_csv") {
        let Ok(lp) = read_loop_csv(data.as_slice()) else { continue };
        accepted += 1;
        let mut buf = Vec::new();
        write_loop_csv(&mut buf, &lp).unwrap();
        assert_eq!(read_loop_csv(buf.as_slice()).unwrap().half_nodes(), lp.half_nodes(), "{}", path.display());
    }
    assert_eq!(accepted, 1);
}

#[test]
fn diagnostics_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("diagnostics_json") {
        if let Ok(doc) = parse_diagnostics(std::str::from_utf8(&data).unwrap()) {
            accepted += 1;
            let again = parse_diagnostics(&to_json(&doc).unwrap()).unwrap();
            assert_eq!(again.records.len(), doc.records.len());
        }
    }
    assert_eq!(accepted, 1);
}
