//! Exercise the C ABI exactly as a foreign caller would: through the
//! exported extern "C" functions, raw pointers, and status codes.

use fracsplit_capi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fs_last_error_message()) }.to_string_lossy().into_owned()
}

const FISHER_JSON: &str = r#"{
    "grid": {"extent": [40.0], "points": [64]},
    "kernel": [{"sigma": 1.0, "beta": 0.75}],
    "model": {"type": "fisher", "chi": 1.0},
    "schedule": {"h": 0.173286795139986, "steps": 4},
    "initial": {"type": "constant", "values": [0.5]}
}"#;

#[test]
fn version_is_non_empty() {
    let v = unsafe { CStr::from_ptr(fs_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

#[test]
fn config_roundtrip_and_simulation() {
    let json = CString::new(FISHER_JSON).unwrap();
    let mut cfg: *mut FsConfig = ptr::null_mut();
    let status = unsafe { fs_config_parse(json.as_ptr(), &mut cfg) };
    assert_eq!(status, FsStatus::FsOk, "{}", last_error());
    assert!(!cfg.is_null());

    let mut traj: *mut FsTrajectory = ptr::null_mut();
    let status = unsafe { fs_simulate(cfg, 0, 0, &mut traj) };
    assert_eq!(status, FsStatus::FsOk, "{}", last_error());

    let count = unsafe { fs_trajectory_snapshot_count(traj) };
    assert_eq!(count, 5);
    let len = unsafe { fs_trajectory_values_len(traj) };
    assert_eq!(len, 64);

    // Final time is 4h = ln 2 · ... and the constant field lands on the
    // logistic value 2/3 (constant data reduces to the ODE).
    let mut t_final = 0.0;
    assert_eq!(unsafe { fs_trajectory_time(traj, 4, &mut t_final) }, FsStatus::FsOk);
    assert!((t_final - 4.0 * 0.173286795139986).abs() < 1e-12);

    let mut buf = vec![0.0f64; len];
    let status = unsafe { fs_trajectory_copy_snapshot(traj, 4, buf.as_mut_ptr(), len) };
    assert_eq!(status, FsStatus::FsOk);
    let expect = 0.5 / (0.5 + 0.5 * (-t_final).exp());
    for v in &buf {
        assert!((v - expect).abs() < 1e-8, "{v} vs {expect}");
    }

    let mut sup = 0.0;
    assert_eq!(unsafe { fs_trajectory_sup_norm(traj, 4, &mut sup) }, FsStatus::FsOk);
    assert!((sup - expect).abs() < 1e-8);

    // Out-of-range access is a reported parameter error.
    let mut t_bad = 0.0;
    assert_eq!(
        unsafe { fs_trajectory_time(traj, 99, &mut t_bad) },
        FsStatus::FsInvalidParameter
    );
    assert!(last_error().contains("out of range"));

    unsafe {
        fs_trajectory_free(traj);
        fs_config_free(cfg);
    }
}

#[test]
fn bad_json_reports_config_error() {
    let json = CString::new("{\"grid\": 7}").unwrap();
    let mut cfg: *mut FsConfig = ptr::null_mut();
    let status = unsafe { fs_config_parse(json.as_ptr(), &mut cfg) };
    assert_eq!(status, FsStatus::FsConfigError);
    assert!(cfg.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { fs_stable_density(0.75, 1, ptr::null(), &mut out) },
        FsStatus::FsNullPointer
    );
    let json = CString::new(FISHER_JSON).unwrap();
    assert_eq!(
        unsafe { fs_config_parse(json.as_ptr(), ptr::null_mut()) },
        FsStatus::FsNullPointer
    );
    unsafe { fs_config_free(ptr::null_mut()) };
    unsafe { fs_trajectory_free(ptr::null_mut()) };
}

#[test]
fn kernel_functions_match_library_values() {
    let mut out = 0.0;
    // g_1(0) = (4π)^{−1/2}
    let x = [0.0f64];
    assert_eq!(unsafe { fs_stable_density(1.0, 1, x.as_ptr(), &mut out) }, FsStatus::FsOk);
    assert!((out - 0.28209479177387814).abs() < 1e-15);

    // Invalid beta is a parameter error.
    assert_eq!(
        unsafe { fs_stable_density(1.5, 1, x.as_ptr(), &mut out) },
        FsStatus::FsInvalidParameter
    );

    let x2 = [2.0f64];
    assert_eq!(
        unsafe { fs_heat_kernel(1.0, 1.0, 1, 1.0, x2.as_ptr(), &mut out) },
        FsStatus::FsOk
    );
    assert!((out - 0.28209479177387814 * (-1.0f64).exp()).abs() < 1e-15);

    assert_eq!(unsafe { fs_tau(0.1, 0.53, 0.03, &mut out) }, FsStatus::FsOk);
    assert!((out - 0.5).abs() < 1e-12);
    assert_eq!(unsafe { fs_alpha(0.1, 0.12, &mut out) }, FsStatus::FsOk);
    assert_eq!(out, 2.0);
    assert_eq!(unsafe { fs_tau(0.1, 0.0, 0.5, &mut out) }, FsStatus::FsInvalidParameter);

    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(
        unsafe { fs_fisher_envelopes(0.5, 2.0, 1.0, std::f64::consts::LN_2, &mut a, &mut b) },
        FsStatus::FsOk
    );
    assert!((b - 4.0 / 3.0).abs() < 1e-12);

    let (mut r1, mut r2, mut margin) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { fs_fhn_rectangle(0.5, 1.0, 1.0, &mut r1, &mut r2, &mut margin) },
        FsStatus::FsOk
    );
    assert!((r1 - 5.0).abs() < 1e-12);
    assert!((r2 - 33.75).abs() < 1e-12);
    assert!(margin < 0.0);

    assert_eq!(unsafe { fs_stable_tail_mass(0.75, 0.0, &mut out) }, FsStatus::FsOk);
    assert!((out - 1.0).abs() < 1e-12);
}

#[test]
fn seed_override_changes_random_initial_data() {
    let json = CString::new(
        r#"{
        "grid": {"extent": [6.283185307179586], "points": [32]},
        "kernel": [{"sigma": 1.0, "beta": 0.8}],
        "model": {"type": "cgl", "a": 0.5, "b": 1.5},
        "schedule": {"h": 0.125, "steps": 2},
        "initial": {"type": "random-phase", "modulus": 1.0},
        "seed": 11
    }"#,
    )
    .unwrap();
    let mut cfg: *mut FsConfig = ptr::null_mut();
    assert_eq!(unsafe { fs_config_parse(json.as_ptr(), &mut cfg) }, FsStatus::FsOk);

    let run = |use_override: i32, seed: u64| -> Vec<f64> {
        let mut traj: *mut FsTrajectory = ptr::null_mut();
        assert_eq!(unsafe { fs_simulate(cfg, use_override, seed, &mut traj) }, FsStatus::FsOk);
        let len = unsafe { fs_trajectory_values_len(traj) };
        let mut buf = vec![0.0f64; len];
        assert_eq!(
            unsafe { fs_trajectory_copy_snapshot(traj, 0, buf.as_mut_ptr(), len) },
            FsStatus::FsOk
        );
        unsafe { fs_trajectory_free(traj) };
        buf
    };

    let base = run(0, 0);
    let same = run(0, 0);
    let other = run(1, 12);
    assert_eq!(base, same, "same seed must reproduce bitwise");
    assert_ne!(base, other, "different seed must change the random field");
    unsafe { fs_config_free(cfg) };
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/fracsplit.h");
    for symbol in [
        "fs_config_parse",
        "fs_config_free",
        "fs_simulate",
        "fs_trajectory_free",
        "fs_trajectory_copy_snapshot",
        "fs_stable_density",
        "fs_heat_kernel",
        "fs_tau",
        "fs_alpha",
        "fs_fisher_envelopes",
        "fs_fhn_rectangle",
        "fs_last_error_message",
        "FsStatus",
        "FsConfig",
        "FsTrajectory",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
