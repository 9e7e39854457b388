use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use starflow_ffi::*;

fn last_error() -> String {
    let p = starflow_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn shape(preset: &str, p1: f64, p2: f64, n: u32, nodes: usize) -> (StarflowStatus, *mut StarflowShape) {
    let name = CString::new(preset).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { starflow_shape_new(name.as_ptr(), p1, p2, n, nodes, &mut out) };
    (status, out)
}

#[test]
fn shape_roundtrip() {
    let (status, s) = shape("flower", 0.3, 3.0, 1, 128);
    assert_eq!(status, StarflowStatus::Ok);
    unsafe {
        assert_eq!(starflow_shape_len(s), 128);
        let mut r = vec![0.0; 128];
        assert_eq!(starflow_shape_radius(s, r.as_mut_ptr(), r.len()), StarflowStatus::Ok);
        assert!((r[0] - 1.3).abs() < 1e-15);
        assert_eq!(starflow_shape_radius(s, r.as_mut_ptr(), 10), StarflowStatus::BufferTooSmall);
        let mut d = 0.0;
        assert_eq!(starflow_shape_diameter(s, &mut d), StarflowStatus::Ok);
        assert!(d > 2.3 && d < 2.4);
        starflow_shape_free(s);
        starflow_shape_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes() {
    let (status, s) = shape("flower", 0.9, 5.0, 1, 64);
    assert_eq!(status, StarflowStatus::NotStarShaped);
    assert!(s.is_null());
    assert!(last_error().contains("star-shaped"));

    assert_eq!(shape("blob", 1.0, 0.0, 1, 64).0, StarflowStatus::InvalidArgument);
    assert_eq!(shape("round", 1.0, 0.0, 3, 64).0, StarflowStatus::InvalidArgument);
    assert_eq!(shape("round", 1.0, 0.0, 1, 4).0, StarflowStatus::InvalidArgument);

    let status = unsafe { starflow_shape_new(ptr::null(), 1.0, 0.0, 1, 64, &mut ptr::null_mut()) };
    assert_eq!(status, StarflowStatus::NullPointer);
    let name = CString::new("round").unwrap();
    let status = unsafe { starflow_shape_new(name.as_ptr(), 1.0, 0.0, 1, 64, ptr::null_mut()) };
    assert_eq!(status, StarflowStatus::NullPointer);

    unsafe {
        assert_eq!(starflow_shape_len(ptr::null()), 0);
        assert_eq!(starflow_series_snapshot_count(ptr::null()), 0);
        assert_eq!(starflow_report_exit_code(ptr::null()), -1);
    }
}

#[test]
fn circle_flow_to_blowup() {
    let (_, s) = shape("round", 1.0, 0.0, 1, 64);
    let config = starflow_flow_config_default();
    assert_eq!(config.cfl_factor, 0.2);
    let mut series = ptr::null_mut();
    unsafe {
        assert_eq!(starflow_flow_run(s, &config, &mut series), StarflowStatus::Ok);
        let mut term = StarflowTermination::ReachedTEnd;
        assert_eq!(starflow_series_termination(series, &mut term), StarflowStatus::Ok);
        assert_eq!(term, StarflowTermination::BlowupDetected);
        let mut tc = 0.0;
        assert_eq!(starflow_series_blowup_time(series, &mut tc), StarflowStatus::Ok);
        assert!((tc - 0.5).abs() < 5e-3, "{tc}");
        assert!(starflow_series_snapshot_count(series) > 10);

        let bad = StarflowFlowConfig { cfl_factor: -1.0, ..config };
        let mut other = ptr::null_mut();
        assert_eq!(starflow_flow_run(s, &bad, &mut other), StarflowStatus::InvalidArgument);
        assert!(other.is_null());

        starflow_series_free(series);
        starflow_shape_free(s);
    }
}

#[test]
fn experiment_report_json_and_files() {
    let toml = CString::new("shape = \"round\"\nR0 = 1\ngrids = [32, 64]\n").unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(
            starflow_experiment_run(toml.as_ptr(), StarflowMode::Convergence, &mut report),
            StarflowStatus::Ok
        );
        assert_eq!(starflow_report_exit_code(report), 0);
        let mut needed = 0usize;
        assert_eq!(
            starflow_report_json(report, ptr::null_mut(), 0, &mut needed),
            StarflowStatus::BufferTooSmall
        );
        let mut buf = vec![0 as libc::c_char; needed];
        assert_eq!(
            starflow_report_json(report, buf.as_mut_ptr(), buf.len(), ptr::null_mut()),
            StarflowStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(text.contains("\"experiment_id\": \"round-n1\""));

        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(starflow_report_write(report, d.as_ptr()), StarflowStatus::Ok);
        assert!(dir.path().join("report.json").exists());
        starflow_report_free(report);
    }

    let bad = CString::new("shape = \"round\"\nR0 = 1\ngrids = [64, 32]\n").unwrap();
    let mut report = ptr::null_mut();
    let status = unsafe { starflow_experiment_run(bad.as_ptr(), StarflowMode::Full, &mut report) };
    assert_eq!(status, StarflowStatus::Config);
    assert!(last_error().contains("grids"));
}

fn target_dir() -> Option<PathBuf> {
    // .../target/<profile>/deps/c_api-<hash>
    let exe = std::env::current_exe().ok()?;
    Some(exe.parent()?.parent()?.to_path_buf())
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn header_compiles_and_links() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("starflow.h").exists());
    if !have("cc") {
        eprintln!("skipping: no C compiler");
        return;
    }
    let lib = target_dir().map(|d| d.join("libstarflow_ffi.a"));
    let Some(lib) = lib.filter(|p| p.exists()) else {
        eprintln!("skipping link step: static library not found");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("termination=0"));
}
