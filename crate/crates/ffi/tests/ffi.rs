use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hhbound_ffi::*;

fn parse(spec: &str) -> *mut HhFunction {
    let spec = CString::new(spec).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hh_function_parse(spec.as_ptr(), &mut out) }, HhStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = hh_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parse_eval_free() {
    let f = parse("monomial:2");
    let mut v = 0.0;
    assert_eq!(unsafe { hh_function_eval(f, 3.0, &mut v) }, HhStatus::Ok);
    assert_eq!(v, 9.0);
    unsafe { hh_function_free(f) };
    unsafe { hh_function_free(ptr::null_mut()) };

    let bad = CString::new("nosuch:1").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hh_function_parse(bad.as_ptr(), &mut out) }, HhStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("nosuch"));

    let root = parse("monomial:1.5");
    assert_eq!(unsafe { hh_function_eval(root, -1.0, &mut v) }, HhStatus::OutsideDomain);
    unsafe { hh_function_free(root) };
}

#[test]
fn null_pointers_are_reported() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hh_function_parse(ptr::null(), &mut out) }, HhStatus::NullPointer);
    assert_eq!(unsafe { hh_function_eval(ptr::null(), 0.0, ptr::null_mut()) }, HhStatus::NullPointer);
    assert_eq!(unsafe { hh_constant_m(0.0, 1.0, 0.5, 1.0, ptr::null_mut()) }, HhStatus::NullPointer);
    assert!(last_error().contains("NULL"));
}

#[test]
fn constants_and_quadrature() {
    let (mut m, mut a) = (0.0, 0.0);
    assert_eq!(unsafe { hh_constant_m(0.0, 1.0, 0.0, 1.0, &mut m) }, HhStatus::Ok);
    assert!((m - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(unsafe { hh_constant_a(0.0, 1.0, 1.0, 0.5, &mut a) }, HhStatus::Ok);
    assert!(a > 0.0);
    assert_eq!(unsafe { hh_constant_m(0.0, 1.0, 0.5, 1.5, &mut m) }, HhStatus::InvalidArgument);
    assert_eq!(unsafe { hh_constant_m(1.0, 0.0, 0.5, 1.0, &mut m) }, HhStatus::InvalidArgument);

    let g = parse("poly:0:1:-1");
    let (mut v, mut e) = (0.0, -1.0);
    assert_eq!(unsafe { hh_integrate(g, 0.0, 1.0, 1e-12, 1e-12, &mut v, &mut e) }, HhStatus::Ok);
    assert!((v - 1.0 / 6.0).abs() < 1e-12 && e >= 0.0);
    assert_eq!(unsafe { hh_integrate(g, 0.0, 1.0, 1e-12, 1e-12, &mut v, ptr::null_mut()) }, HhStatus::Ok);
    assert_eq!(unsafe { hh_sup_norm(g, 0.0, 1.0, &mut v) }, HhStatus::Ok);
    assert!((v - 0.25).abs() < 1e-15);
    unsafe { hh_function_free(g) };
}

#[test]
fn verify_and_convexity() {
    let (f, g) = (parse("monomial:2"), parse("const:1"));
    let case = HhCase { a: 0.0, b: 1.0, x: 0.5, q: 1.0, alpha: 1.0, m: 1.0 };
    let mut r = HhReport::default();
    assert_eq!(unsafe { hh_verify(f, g, &case, HhTheorem::T21, &mut r) }, HhStatus::Ok);
    assert!(r.hypothesis_holds && r.holds);
    assert!((r.lhs - 1.0 / 6.0).abs() < 1e-9);
    assert_eq!(r.rhs, 0.25);

    let off = HhCase { x: 0.3, ..case };
    assert_eq!(unsafe { hh_verify(f, g, &off, HhTheorem::C21, &mut r) }, HhStatus::Precondition);

    let concave = parse("sin");
    assert_eq!(unsafe { hh_verify(concave, g, &case, HhTheorem::T22, &mut r) }, HhStatus::Ok);
    assert!(!r.hypothesis_holds && r.witness.present);

    let neg = parse("negmonomial:2");
    let (mut holds, mut w) = (true, HhWitness::default());
    assert_eq!(unsafe { hh_check_convexity(neg, 1.0, 1.0, 1.0, 51, 51, 51, &mut holds, &mut w) }, HhStatus::Ok);
    assert!(!holds);
    assert_eq!((w.x, w.y, w.t, w.gap), (0.0, 1.0, 0.5, 0.25));
    assert_eq!(unsafe { hh_check_convexity(f, 1.0, 1.0, 1.0, 1, 51, 51, &mut holds, ptr::null_mut()) }, HhStatus::InvalidArgument);
    for h in [f, g, concave, neg] {
        unsafe { hh_function_free(h) };
    }
}

#[test]
fn suite_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = CString::new(
        r#"{"grid": {"nx": 11, "ny": 11, "nt": 11}, "cases": [
            {"f": "monomial:2", "g": "const:1", "a": 0, "b": 1, "x": {"sweep": 3}, "theorems": ["T21", "T22"]}
        ]}"#,
    )
    .unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut s = HhSuiteSummary::default();
    assert_eq!(unsafe { hh_run_suite_json(config.as_ptr(), out.as_ptr(), &mut s) }, HhStatus::Ok);
    assert_eq!((s.reports, s.violations, s.errors), (6, 0, 0));
    assert!(dir.path().join("report.csv").exists());

    let empty = CString::new(r#"{"cases": []}"#).unwrap();
    assert_eq!(unsafe { hh_run_suite_json(empty.as_ptr(), out.as_ptr(), &mut s) }, HhStatus::InvalidArgument);
}

/// Compiles and runs a C program against the generated header and the
/// static library. Skipped when no C compiler is on the PATH.
#[test]
fn c_program_links_against_header() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap();
    let lib = target_dir.join("libhhbound_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "hhbound.h"
int main(void) {
    HhFunction *f = NULL, *g = NULL;
    if (hh_function_parse("monomial:2", &f) != HH_STATUS_OK) return 1;
    if (hh_function_parse("const:1", &g) != HH_STATUS_OK) return 1;
    HhCase c = {0.0, 1.0, 0.5, 1.0, 1.0, 1.0};
    HhReport r;
    if (hh_verify(f, g, &c, HH_THEOREM_T21, &r) != HH_STATUS_OK) return 2;
    HhFunction *bad = NULL;
    if (hh_function_parse("nosuch", &bad) != HH_STATUS_INVALID_ARGUMENT) return 3;
    if (hh_last_error_message() == NULL) return 4;
    printf("%.17g %.17g %d\n", r.lhs, r.rhs, (int)r.holds);
    hh_function_free(f);
    hh_function_free(g);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<f64> = text.split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert!((fields[0] - 1.0 / 6.0).abs() < 1e-9);
    assert_eq!(fields[1], 0.25);
    assert_eq!(fields[2], 1.0);
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
