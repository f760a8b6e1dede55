//! Exercises the C ABI from Rust: handle lifecycle, error reporting, and
//! agreement with the underlying library.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cvsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cvsim_last_error()).to_string_lossy().into_owned() }
}

fn make_coherent(x: f64, p: f64) -> *mut CvsimState {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cvsim_state_coherent(x, p, &mut s) }, CvsimStatus::CvsimOk);
    assert!(!s.is_null());
    s
}

#[test]
fn vacuum_roundtrip_moments() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cvsim_state_vacuum(2, &mut s) }, CvsimStatus::CvsimOk);
    assert_eq!(unsafe { cvsim_state_n_modes(s) }, 2);
    let mut mean = [f64::NAN; 4];
    let mut cov = [f64::NAN; 16];
    unsafe {
        assert_eq!(cvsim_state_mean(s, mean.as_mut_ptr(), 4), CvsimStatus::CvsimOk);
        assert_eq!(cvsim_state_cov(s, cov.as_mut_ptr(), 16), CvsimStatus::CvsimOk);
        cvsim_state_free(s);
    }
    assert!(mean.iter().all(|v| *v == 0.0));
    for r in 0..4 {
        for c in 0..4 {
            let want = if r == c { 1.0 } else { 0.0 };
            assert_eq!(cov[r * 4 + c], want);
        }
    }
}

#[test]
fn null_and_short_buffer_arguments_are_reported() {
    unsafe {
        assert_eq!(
            cvsim_state_vacuum(1, ptr::null_mut()),
            CvsimStatus::CvsimErrNullArgument
        );
        assert!(last_error().contains("null"));
        let s = make_coherent(0.0, 0.0);
        let mut buf = [0.0; 1];
        assert_eq!(
            cvsim_state_mean(s, buf.as_mut_ptr(), 1),
            CvsimStatus::CvsimErrBufferTooSmall
        );
        assert!(last_error().contains("2 doubles"));
        cvsim_state_free(s);
        assert_eq!(cvsim_state_n_modes(ptr::null()), 0);
        cvsim_state_free(ptr::null_mut()); // must be a no-op
    }
}

#[test]
fn unphysical_squeezing_is_rejected() {
    let mut s = ptr::null_mut();
    let status = unsafe { cvsim_state_squeezed(0.5, 0.5, 0.0, &mut s) };
    assert_ne!(status, CvsimStatus::CvsimOk);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn teleport_matches_closed_form_fidelity() {
    unsafe {
        let input = make_coherent(3.0, 3.0);
        let mut out = ptr::null_mut();
        assert_eq!(cvsim_teleport(input, 0.2048, 1.0, &mut out), CvsimStatus::CvsimOk);
        let mut f = 0.0;
        assert_eq!(cvsim_fidelity(input, out, &mut f), CvsimStatus::CvsimOk);
        assert!((f - 0.830).abs() < 1e-3, "fidelity {f}");
        cvsim_state_free(input);
        cvsim_state_free(out);
    }
}

#[test]
fn qnd_gate_couples_quadratures() {
    unsafe {
        let m1 = make_coherent(1.0, 0.0);
        let m2 = make_coherent(0.0, 0.0);
        let mut input = ptr::null_mut();
        assert_eq!(cvsim_state_tensor(m1, m2, &mut input), CvsimStatus::CvsimOk);
        let mut out = ptr::null_mut();
        let r = (3.0 - 5.0f64.sqrt()) / 2.0;
        assert_eq!(cvsim_qnd_offline(input, r, 0.25, &mut out), CvsimStatus::CvsimOk);
        let mut mean = [0.0; 4];
        assert_eq!(cvsim_state_mean(out, mean.as_mut_ptr(), 4), CvsimStatus::CvsimOk);
        // unity interaction gain writes the signal x onto the meter x
        assert!((mean[0] - 1.0).abs() < 1e-9 && (mean[2] - 1.0).abs() < 1e-9);
        for h in [m1, m2, input, out] {
            cvsim_state_free(h);
        }
    }
}

#[test]
fn cluster_shapes_have_expected_covariance_size() {
    for shape in [
        CvsimClusterShape::CvsimClusterLinear,
        CvsimClusterShape::CvsimClusterTShape,
        CvsimClusterShape::CvsimClusterDiamond,
    ] {
        let v = [0.25; 4];
        let mut s = ptr::null_mut();
        assert_eq!(
            unsafe { cvsim_cluster4(shape, v.as_ptr(), &mut s) },
            CvsimStatus::CvsimOk
        );
        assert_eq!(unsafe { cvsim_state_n_modes(s) }, 4);
        unsafe { cvsim_state_free(s) };
    }
}

#[test]
fn run_source_compiles_and_serializes() {
    let src = CString::new(
        "cvc 1\nmode a squeezed vsq=0.3 vanti=3.3333333333333335 angle=0\n\
         mode b squeezed vsq=0.3 vanti=3.3333333333333335 angle=90\nbs a b T=0.5\n",
    )
    .unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(cvsim_run_source(src.as_ptr(), &mut s), CvsimStatus::CvsimOk);
        assert_eq!(cvsim_state_n_modes(s), 2);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(cvsim_state_to_json(s, &mut json), CvsimStatus::CvsimOk);
        let text = CStr::from_ptr(json).to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["n_modes"], 2);
        assert_eq!(value["mean"].as_array().unwrap().len(), 4);
        assert_eq!(value["cov"].as_array().unwrap().len(), 4);
        cvsim_string_free(json);
        cvsim_state_free(s);
    }
}

#[test]
fn run_source_reports_diagnostics_with_spans() {
    let src = CString::new("cvc 1\nmode a vacuum\nmode a vacuum\n").unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(cvsim_run_source(src.as_ptr(), &mut s), CvsimStatus::CvsimErrParse);
        assert!(s.is_null());
    }
    let msg = last_error();
    assert!(msg.contains("E_DUP_MODE") && msg.starts_with("3:"), "got: {msg}");
}
