use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use mmwsim::channel::write_trace;
use mmwsim::config::dump_config;
use mmwsim::scenario::{build_synthetic_scenario, SyntheticSpec};
use mmwsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mmw_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn array_and_codebook_handles() {
    unsafe {
        let mut a: *mut MmwArray = ptr::null_mut();
        assert_eq!(mmw_array_new(4, 4, 0.5, 0.5, &mut a), MmwStatus::Ok);
        assert_eq!(mmw_array_num_elements(a), 16);
        let mut g = 0.0;
        assert_eq!(
            mmw_array_steered_gain_db(a, 80.0, 20.0, 80.0, 20.0, &mut g),
            MmwStatus::Ok
        );
        assert!((g - 10.0 * 16f64.log10()).abs() < 1e-9);

        assert_eq!(mmw_array_set_element_3gpp(a), MmwStatus::Ok);
        assert_eq!(
            mmw_array_steered_gain_db(a, 90.0, 0.0, 90.0, 0.0, &mut g),
            MmwStatus::Ok
        );
        assert!((g - (8.0 + 10.0 * 16f64.log10())).abs() < 1e-9);

        let mut cb: *mut MmwCodebook = ptr::null_mut();
        assert_eq!(mmw_codebook_generate(a, &mut cb), MmwStatus::Ok);
        assert_eq!(mmw_codebook_len(cb), 25);
        let (mut re, mut im) = ([0.0; 16], [0.0; 16]);
        assert_eq!(
            mmw_codebook_weights(cb, 3, re.as_mut_ptr(), im.as_mut_ptr(), 16),
            MmwStatus::Ok
        );
        for k in 0..16 {
            assert!((re[k].hypot(im[k]) - 0.25).abs() < 1e-12);
        }
        assert_eq!(
            mmw_codebook_weights(cb, 25, re.as_mut_ptr(), im.as_mut_ptr(), 16),
            MmwStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));
        assert_eq!(
            mmw_codebook_weights(cb, 0, re.as_mut_ptr(), im.as_mut_ptr(), 8),
            MmwStatus::InvalidArgument
        );
        mmw_codebook_free(cb);
        mmw_array_free(a);
    }
}

#[test]
fn invalid_arguments_and_nulls() {
    unsafe {
        let mut a: *mut MmwArray = ptr::null_mut();
        assert_eq!(
            mmw_array_new(0, 4, 0.5, 0.5, &mut a),
            MmwStatus::InvalidArgument
        );
        assert!(a.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            mmw_array_new(1, 1, 0.5, 0.5, ptr::null_mut()),
            MmwStatus::NullPointer
        );
        assert_eq!(
            mmw_array_set_element_3gpp(ptr::null_mut()),
            MmwStatus::NullPointer
        );
        assert_eq!(mmw_array_num_elements(ptr::null()), 0);
        mmw_array_free(ptr::null_mut());

        assert_eq!(mmw_array_new(2, 2, 0.5, 0.5, &mut a), MmwStatus::Ok);
        assert_eq!(
            mmw_array_set_element_cosine(a, 400.0, 90.0),
            MmwStatus::InvalidArgument
        );
        assert_eq!(mmw_array_set_element_cosine(a, 120.0, 120.0), MmwStatus::Ok);
        mmw_array_free(a);
    }
    let n = mmw_noise_power_dbm(400e6, 9.0, -174.0);
    assert!((n + 78.98).abs() < 0.01);
}

#[test]
fn scenario_run_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        duration_s: 2.0,
        ..SyntheticSpec::default()
    };
    let (config, trace) = build_synthetic_scenario(&spec).unwrap();
    std::fs::write(dir.path().join("two_cell.qd"), write_trace(&trace)).unwrap();
    std::fs::write(dir.path().join("scenario.cfg"), dump_config(&config)).unwrap();
    let cfg = CString::new(dir.path().join("scenario.cfg").to_str().unwrap()).unwrap();
    let qd = CString::new(dir.path().join("two_cell.qd").to_str().unwrap()).unwrap();
    unsafe {
        let mut t: *mut MmwTrace = ptr::null_mut();
        assert_eq!(mmw_trace_load(qd.as_ptr(), &mut t), MmwStatus::Ok);
        assert_eq!(mmw_trace_num_links(t), 4);
        let n = mmw_trace_num_samples(t);
        mmw_trace_free(t);

        let mut r: *mut MmwRun = ptr::null_mut();
        assert_eq!(
            mmw_run_config(cfg.as_ptr(), &mut r),
            MmwStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(mmw_run_num_series(r), 2);
        assert_eq!(mmw_run_num_samples(r), n);
        assert_eq!(mmw_run_num_searches(r), 21);
        let mut snr = vec![0.0; n];
        let mut sinr = vec![0.0; n];
        assert_eq!(
            mmw_run_metric(r, 0, MmwMetric::SnrDb, snr.as_mut_ptr(), n),
            MmwStatus::Ok
        );
        assert_eq!(
            mmw_run_metric(r, 0, MmwMetric::SinrDb, sinr.as_mut_ptr(), n),
            MmwStatus::Ok
        );
        assert!(snr.iter().zip(&sinr).all(|(a, b)| b <= a));
        assert_eq!(
            mmw_run_metric(r, 2, MmwMetric::SnrDb, snr.as_mut_ptr(), n),
            MmwStatus::InvalidArgument
        );
        mmw_run_free(r);

        let missing = CString::new("/nonexistent/scenario.cfg").unwrap();
        assert_eq!(mmw_run_config(missing.as_ptr(), &mut r), MmwStatus::Config);
        let bad = dir.path().join("bad.qd");
        std::fs::write(&bad, "QDTRACE v2\n").unwrap();
        let bad = CString::new(bad.to_str().unwrap()).unwrap();
        assert_eq!(mmw_trace_load(bad.as_ptr(), &mut t), MmwStatus::Parse);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/mmwsim.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "mmw_array_new",
        "mmw_codebook_weights",
        "mmw_run_metric",
        "mmw_last_error",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ MmwArray *a = 0; \
             return mmw_array_new(2, 2, 0.5, 0.5, &a) == MMW_STATUS_OK ? 0 : 1; }}\n"
        ),
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}
