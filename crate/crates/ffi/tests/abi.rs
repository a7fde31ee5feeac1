use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use rilab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rilab_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn harmonic() -> *mut RilabModel {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { rilab_model_harmonic(0.0, &mut model) }, RilabStatus::Ok);
    model
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(rilab_version()) };
    assert_eq!(v.to_str().unwrap(), rilab::VERSION);
}

#[test]
fn model_lifecycle_and_dims() {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { rilab_model_charged(1.0, 2.0, &mut model) }, RilabStatus::Ok);
    let (mut s, mut n) = (0, 0);
    assert_eq!(unsafe { rilab_model_dims(model, &mut s, &mut n) }, RilabStatus::Ok);
    assert_eq!((s, n), (2, 1));
    unsafe { rilab_model_free(model) };
    unsafe { rilab_model_free(ptr::null_mut()) };
}

#[test]
fn invalid_parameters_report_errors() {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { rilab_model_charged(1.0, 0.0, &mut model) }, RilabStatus::InvalidArgument);
    assert!(model.is_null());
    assert!(last_error().contains("mass"), "{}", last_error());
    assert_eq!(unsafe { rilab_model_damped(-1.0, 1.0, &mut model) }, RilabStatus::InvalidArgument);
    assert_eq!(unsafe { rilab_model_harmonic(0.0, ptr::null_mut()) }, RilabStatus::NullPointer);
    let (mut s, mut n) = (0, 0);
    assert_eq!(unsafe { rilab_model_dims(ptr::null(), &mut s, &mut n) }, RilabStatus::NullPointer);
}

#[test]
fn step_matches_library() {
    let model = harmonic();
    let (x, y) = ([0.3, -0.2], [0.1, 0.05]);
    let mut out = [0.0; 2];
    let status = unsafe { rilab_step(model, 0.01, x.as_ptr(), 2, y.as_ptr(), 2, out.as_mut_ptr(), 2) };
    assert_eq!(status, RilabStatus::Ok);
    let lib = rilab::models::harmonic(rilab::models::HarmonicParams { rest_length: 0.0 });
    assert_eq!(out.to_vec(), rilab::interaction::step(&lib, 0.01, &x, &y).unwrap());

    let mut short = [0.0; 1];
    let status = unsafe { rilab_step(model, 0.01, x.as_ptr(), 2, y.as_ptr(), 2, short.as_mut_ptr(), 1) };
    assert_eq!(status, RilabStatus::BufferTooSmall);
    let status = unsafe { rilab_step(model, 0.01, x.as_ptr(), 1, y.as_ptr(), 2, out.as_mut_ptr(), 2) };
    assert_eq!(status, RilabStatus::DimensionMismatch);
    unsafe { rilab_model_free(model) };
}

#[test]
fn sampled_increments_drive_chain() {
    let model = harmonic();
    let mut inc = vec![0.0; 64 * 2];
    let mut n_steps = 0;
    let status = unsafe {
        rilab_sample_increments(9, 0, 2, 1.0 / 64.0, 1.0, 1.0, inc.as_mut_ptr(), inc.len(), &mut n_steps)
    };
    assert_eq!(status, RilabStatus::Ok);
    assert_eq!(n_steps, 64);
    let spec = rilab::NoiseSpec::new(9, 2, 1.0 / 64.0, 1.0, 1.0).unwrap();
    assert_eq!(inc, rilab::wiener::sample_increments(&spec, 0).unwrap().as_slice());

    let x0 = [1.0, 0.0];
    let mut states = vec![0.0; 65 * 2];
    let status = unsafe {
        rilab_run_chain(model, 1.0 / 64.0, x0.as_ptr(), 2, inc.as_ptr(), 64, states.as_mut_ptr(), states.len())
    };
    assert_eq!(status, RilabStatus::Ok);
    assert_eq!(&states[..2], &x0);
    assert!(states.iter().all(|v| v.is_finite()));
    unsafe { rilab_model_free(model) };
}

#[test]
fn exact_flow_and_lyapunov() {
    let state = [1.0, 0.0, 0.0, 0.0];
    let mut out = [0.0; 4];
    let t = std::f64::consts::PI / 2f64.sqrt();
    assert_eq!(unsafe { rilab_harmonic_exact_flow(state.as_ptr(), 0.0, t, out.as_mut_ptr()) }, RilabStatus::Ok);
    assert!((out[2] - 1.0).abs() < 1e-9 && out[0].abs() < 1e-9);

    let a = [0.0, 1.0, -1.0, -1.0];
    let sigma = [0.0, 1.0];
    let mut c = [0.0; 4];
    assert_eq!(unsafe { rilab_lyapunov_stationary(a.as_ptr(), 2, sigma.as_ptr(), 1, c.as_mut_ptr()) }, RilabStatus::Ok);
    for (v, e) in c.iter().zip([0.5, 0.0, 0.0, 0.5]) {
        assert!((v - e).abs() < 1e-10);
    }
    let rotation = [0.0, 1.0, -1.0, 0.0];
    let status = unsafe { rilab_lyapunov_stationary(rotation.as_ptr(), 2, sigma.as_ptr(), 1, c.as_mut_ptr()) };
    assert_eq!(status, RilabStatus::NotHurwitz);
}

#[test]
fn strong_error_report() {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { rilab_model_charged(1.0, 1.0, &mut model) }, RilabStatus::Ok);
    let h = [0.125, 0.0625, 0.03125];
    let p = [2.0, 4.0];
    let cfg = RilabExperimentConfig {
        tau: 1.0,
        h_list: h.as_ptr(),
        n_h: h.len(),
        n_paths: 200,
        p_list: p.as_ptr(),
        n_p: p.len(),
        master_seed: 42,
        oracle_refinement: 64,
        oracle_step: 0.0,
        temperature: 1.0,
    };
    let x0 = [0.0, 0.0];
    let mut report = ptr::null_mut();
    let status = unsafe { rilab_strong_error(model, RilabOracle::ExactCharged, &cfg, x0.as_ptr(), 2, &mut report) };
    assert_eq!(status, RilabStatus::Ok, "{}", last_error());
    let mut count = 0;
    assert_eq!(unsafe { rilab_report_row_count(report, &mut count) }, RilabStatus::Ok);
    assert_eq!(count, 6);
    let mut row = RilabErrorRow::default();
    assert_eq!(unsafe { rilab_report_row(report, 0, &mut row) }, RilabStatus::Ok);
    assert_eq!((row.h, row.p, row.n_paths), (0.125, 2.0, 200));
    assert!(row.ci_low <= row.error && row.error <= row.ci_high);
    assert_eq!(unsafe { rilab_report_row(report, 6, &mut row) }, RilabStatus::InvalidArgument);
    let mut fit = RilabFit::default();
    assert_eq!(unsafe { rilab_report_fit(report, 4.0, &mut fit) }, RilabStatus::Ok);
    assert!(fit.slope > 0.2 && fit.slope < 0.8, "{fit:?}");
    assert_eq!(unsafe { rilab_report_fit(report, 3.0, &mut fit) }, RilabStatus::InvalidArgument);
    unsafe { rilab_report_free(report) };

    let bad = RilabExperimentConfig { oracle_refinement: 8, ..cfg };
    let mut report = ptr::null_mut();
    let status = unsafe { rilab_strong_error(model, RilabOracle::Euler, &bad, x0.as_ptr(), 2, &mut report) };
    assert_eq!(status, RilabStatus::InvalidArgument);
    assert!(report.is_null());
    unsafe { rilab_model_free(model) };

    let h_model = harmonic();
    let status = unsafe { rilab_strong_error(h_model, RilabOracle::ExactCharged, &cfg, x0.as_ptr(), 2, &mut report) };
    assert_eq!(status, RilabStatus::InvalidArgument);
    unsafe { rilab_model_free(h_model) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rilab.h")).unwrap();
    for name in [
        "rilab_version",
        "rilab_last_error_message",
        "rilab_model_charged",
        "rilab_model_harmonic",
        "rilab_model_damped",
        "rilab_model_free",
        "rilab_model_dims",
        "rilab_step",
        "rilab_run_chain",
        "rilab_sample_increments",
        "rilab_harmonic_exact_flow",
        "rilab_lyapunov_stationary",
        "rilab_strong_error",
        "rilab_report_free",
        "rilab_report_row_count",
        "rilab_report_row",
        "rilab_report_fit",
        "typedef struct RilabModel RilabModel",
        "RILAB_STATUS_BUFFER_TOO_SMALL = 11",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"rilab.h\"\nint main(void) { RilabModel *m = 0; return rilab_model_harmonic(0.0, &m) == RILAB_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
