use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use robust_la_ffi::*;

fn last_error() -> String {
    let p = rla_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bending(n: usize, eta: f64, gamma: f64) -> *mut RlaProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rla_problem_bending(n, eta, gamma, false, &mut p) }, RlaStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn bending_solves_through_the_abi() {
    let p = bending(4, 0.5, 4.0);
    unsafe {
        assert_eq!(rla_problem_set_dim(p), 4);
        let mut nominal = 0.0;
        assert_eq!(rla_solve_nominal(p, ptr::null(), &mut nominal), RlaStatus::Ok);
        assert!((nominal - 0.25).abs() < 1e-8, "{nominal}");

        let mut rc = 0.0;
        assert_eq!(rla_solve_static_rc(p, RlaMethod::Roos, ptr::null(), &mut rc), RlaStatus::Ok);
        assert!((rc - 0.125).abs() < 1e-7, "{rc}");

        let mut sol = ptr::null_mut();
        assert_eq!(rla_solve_aarc(p, RlaMethod::Roos, ptr::null(), &mut sol), RlaStatus::Ok);
        let lam = rla_aarc_lambda(sol);
        assert!((lam - 0.125).abs() < 1e-7, "{lam}");

        let mut vmin = 0.0;
        let mut argmin = usize::MAX;
        assert_eq!(rla_vertex_oracle(p, ptr::null(), &mut vmin, &mut argmin), RlaStatus::Ok);
        assert!(vmin >= lam - 1e-6 && argmin != usize::MAX);

        let mut smin = 0.0;
        assert_eq!(rla_sampling_oracle(p, 7, 20, ptr::null(), &mut smin), RlaStatus::Ok);
        assert!(smin >= lam - 1e-6);

        let m = rla_aarc_set_dim(sol);
        let k = rla_aarc_num_stresses(sol);
        assert_eq!(m, 4);
        assert_eq!(k, rla_problem_num_stresses(p));
        let zeta = vec![1.0, 0.0, 0.0, 0.0];
        let mut sigma = vec![0.0; k];
        let mut at = 0.0;
        assert_eq!(rla_aarc_rule_at(sol, zeta.as_ptr(), m, sigma.as_mut_ptr(), k, &mut at), RlaStatus::Ok);
        assert!(at >= lam - 1e-6);
        let mut direct = 0.0;
        assert_eq!(rla_evaluate_at(p, zeta.as_ptr(), m, ptr::null(), &mut direct), RlaStatus::Ok);
        assert!(direct >= at - 1e-6);

        let json = rla_aarc_to_json(sol);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        rla_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v.get("rule").is_some());

        rla_aarc_free(sol);
        rla_problem_free(p);
    }
}

#[test]
fn problems_round_trip_through_json() {
    let p = bending(3, 0.25, 1.0);
    unsafe {
        let json = rla_problem_to_json(p);
        assert!(!json.is_null());
        let mut q = ptr::null_mut();
        assert_eq!(rla_problem_from_json(json, &mut q), RlaStatus::Ok);
        rla_string_free(json);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(rla_solve_nominal(p, ptr::null(), &mut a), RlaStatus::Ok);
        assert_eq!(rla_solve_nominal(q, ptr::null(), &mut b), RlaStatus::Ok);
        assert_eq!(a, b);
        rla_problem_free(p);
        rla_problem_free(q);
    }
}

#[test]
fn failures_set_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("{ not json").unwrap();
        assert_eq!(rla_problem_from_json(bad.as_ptr(), &mut p), RlaStatus::InvalidInput);
        assert!(p.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(rla_problem_from_json(ptr::null(), &mut p), RlaStatus::NullPointer);
        assert!(last_error().contains("json"));

        let mut lam = 0.0;
        assert_eq!(rla_solve_nominal(ptr::null(), ptr::null(), &mut lam), RlaStatus::NullPointer);
        assert!(lam.is_nan());

        assert_eq!(rla_problem_bending(0, 0.5, 1.0, false, &mut p), RlaStatus::InvalidInput);

        let q = bending(4, 0.5, 1.0);
        let zeta = [0.0; 3];
        assert_eq!(rla_evaluate_at(q, zeta.as_ptr(), 3, ptr::null(), &mut lam), RlaStatus::InvalidInput);
        assert!(last_error().contains("zeta"));

        let bad_settings = RlaSettings { tol: 0.0, max_iter: 10 };
        assert_eq!(rla_solve_nominal(q, &bad_settings, &mut lam), RlaStatus::InvalidInput);

        let tight = RlaSettings { max_iter: 1, ..rla_settings_default() };
        assert_eq!(rla_solve_nominal(q, &tight, &mut lam), RlaStatus::SolverFailure);
        rla_problem_free(q);

        assert!(rla_aarc_lambda(ptr::null()).is_nan());
        rla_problem_free(ptr::null_mut());
        rla_aarc_free(ptr::null_mut());
        rla_string_free(ptr::null_mut());
    }
}

#[test]
fn collapsed_truss_reports_infeasible() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(rla_problem_truss(0.3, ptr::null(), &mut p), RlaStatus::Ok);
        let mut sol = ptr::null_mut();
        let st = rla_solve_aarc(p, RlaMethod::Roos, ptr::null(), &mut sol);
        assert_eq!(st, RlaStatus::Infeasible, "{}", last_error());
        assert!(sol.is_null());
        rla_problem_free(p);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rla_problem_from_json(ptr::null(), &mut p) }, RlaStatus::NullPointer);
    let other = std::thread::spawn(|| rla_last_error_message().is_null()).join().unwrap();
    assert!(other);
    assert!(!rla_last_error_message().is_null());
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header().join("robust_la.h")).unwrap();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 15);
    for name in exports {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "robust_la.h"

int main(void) {
    RlaProblem *p = NULL;
    if (rla_problem_bending(4, 0.5, 4.0, false, &p) != RLA_STATUS_OK) return 2;
    RlaSettings st = rla_settings_default();
    RlaAarc *sol = NULL;
    if (rla_solve_aarc(p, RLA_METHOD_ROOS, &st, &sol) != RLA_STATUS_OK) return 3;
    double lam = rla_aarc_lambda(sol);
    char *json = rla_aarc_to_json(sol);
    if (json == NULL) return 4;
    rla_string_free(json);
    RlaProblem *q = NULL;
    if (rla_problem_from_json("[", &q) != RLA_STATUS_INVALID_INPUT) return 5;
    if (rla_last_error_message() == NULL) return 6;
    rla_aarc_free(sol);
    rla_problem_free(p);
    printf("%.9f\n", lam);
    return fabs(lam - 0.125) < 1e-7 ? 0 : 7;
}
"#;

/// Compiles and links a C client against the static library. Skipped when
/// no C compiler or static library is around.
#[test]
fn c_client_links_against_the_static_library() {
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("librobust_la_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-c-client");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("client.c");
    let exe = dir.join("client");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(header())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stdout));
    let lam: f64 = String::from_utf8_lossy(&run.stdout).trim().parse().unwrap();
    assert!((lam - 0.125).abs() < 1e-7, "{lam}");
}
