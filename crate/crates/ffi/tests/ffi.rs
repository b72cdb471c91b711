use std::ffi::CStr;
use std::ptr;

use singint_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(singint_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn curve_lifecycle_and_queries() {
    unsafe {
        let mut c: *mut SingintCurve = ptr::null_mut();
        assert_eq!(singint_curve_segment(0.0, 0.0, 2.0, 0.0, 65, &mut c), SingintStatus::Ok);
        let mut len = 0.0;
        assert_eq!(singint_curve_length(c, &mut len), SingintStatus::Ok);
        assert!((len - 2.0).abs() < 1e-15);
        let mut n = 0usize;
        assert_eq!(singint_curve_node_count(c, &mut n), SingintStatus::Ok);
        assert_eq!(n, 65);
        let mut k = 0.0;
        assert_eq!(singint_curve_carleson(c, 16, 16, &mut k), SingintStatus::Ok);
        assert!((k - 2.0).abs() < 0.1);
        singint_curve_free(c);
        singint_curve_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut c: *mut SingintCurve = ptr::null_mut();
        assert_eq!(singint_curve_spiral(0.5, 256, &mut c), SingintStatus::NotRectifiable);
        assert!(c.is_null());
        assert!(last_error().contains("not rectifiable"));
        assert_eq!(singint_curve_length(ptr::null(), ptr::null_mut()), SingintStatus::NullPointer);
        let xs = [0.0, 1.0, 1.0];
        let ys = [0.0, 0.0, 0.0];
        assert_eq!(singint_curve_polyline(xs.as_ptr(), ys.as_ptr(), 3, false, &mut c), SingintStatus::InvalidGeometry);
        let mut seg: *mut SingintCurve = ptr::null_mut();
        assert_eq!(singint_curve_segment(0.0, 0.0, 1.0, 0.0, 11, &mut seg), SingintStatus::Ok);
        let mut p: *mut SingintExponent = ptr::null_mut();
        assert_eq!(singint_exponent_constant(seg, 0.5, &mut p), SingintStatus::InvalidParameter);
        singint_curve_free(seg);
    }
}

#[test]
fn weights_indices_and_norms() {
    unsafe {
        let mut c: *mut SingintCurve = ptr::null_mut();
        assert_eq!(singint_curve_segment(0.0, 0.0, 1.0, 0.0, 101, &mut c), SingintStatus::Ok);
        let mut w: *mut SingintWeight = ptr::null_mut();
        assert_eq!(singint_weight_new(&mut w), SingintStatus::Ok);
        let mut p: *mut SingintExponent = ptr::null_mut();
        assert_eq!(singint_exponent_constant(c, 2.0, &mut p), SingintStatus::Ok);

        let ones = [1.0f64; 101];
        let mut norm = 0.0;
        assert_eq!(singint_luxemburg_norm(c, w, p, ones.as_ptr(), ptr::null(), 101, &mut norm), SingintStatus::Ok);
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(
            singint_luxemburg_norm(c, w, p, ones.as_ptr(), ptr::null(), 50, &mut norm),
            SingintStatus::DimensionMismatch
        );

        assert_eq!(singint_weight_add_power(w, 0.5, 0.0, 0.3), SingintStatus::Ok);
        assert_eq!(singint_weight_add_oscillating(w, 1.0, 0.0, 0.2, 0.1, 1.0), SingintStatus::Ok);
        assert_eq!(singint_weight_add_power(w, 0.5, 0.0, 0.1), SingintStatus::InvalidParameter);
        let mut count = 0usize;
        assert_eq!(singint_weight_factor_count(w, &mut count), SingintStatus::Ok);
        assert_eq!(count, 2);
        let (mut m, mut big_m) = (0.0, 0.0);
        assert_eq!(singint_mo_indices(w, 0, 1.0, &mut m, &mut big_m), SingintStatus::Ok);
        assert!((m - 0.3).abs() < 1e-9 && (big_m - 0.3).abs() < 1e-9);
        assert_eq!(singint_mo_indices(w, 5, 1.0, &mut m, &mut big_m), SingintStatus::InvalidParameter);

        singint_exponent_free(p);
        singint_weight_free(w);
        singint_curve_free(c);
    }
}

#[test]
fn ap_and_opnorm_on_unweighted_segment() {
    unsafe {
        let mut c: *mut SingintCurve = ptr::null_mut();
        assert_eq!(singint_curve_segment(-1.0, 0.0, 1.0, 0.0, 101, &mut c), SingintStatus::Ok);
        let mut w: *mut SingintWeight = ptr::null_mut();
        assert_eq!(singint_weight_new(&mut w), SingintStatus::Ok);
        let mut p: *mut SingintExponent = ptr::null_mut();
        assert_eq!(singint_exponent_constant(c, 2.0, &mut p), SingintStatus::Ok);
        let mut est = 0.0;
        let mut verdict = SingintVerdict::Inconclusive;
        assert_eq!(singint_ap_constant(c, p, w, 1, &mut est, &mut verdict), SingintStatus::Ok);
        assert_eq!(verdict, SingintVerdict::Finite);
        assert!((est - 2.0).abs() < 1e-6, "{est}");
        let mut norm = 0.0;
        assert_eq!(singint_opnorm(c, w, p, 128, 50, 0, &mut norm), SingintStatus::Ok);
        assert!(norm > 0.9 && norm < 1.05, "{norm}");
        assert_eq!(singint_opnorm(c, w, p, 128, 10, 0, &mut norm), SingintStatus::InvalidParameter);
        singint_exponent_free(p);
        singint_weight_free(w);
        singint_curve_free(c);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/singint.h")).unwrap();
    for name in [
        "typedef struct SingintCurve SingintCurve",
        "SINGINT_STATUS_NOT_RECTIFIABLE",
        "singint_curve_segment",
        "singint_weight_add_oscillating",
        "singint_luxemburg_norm",
        "singint_opnorm",
        "singint_last_error",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
