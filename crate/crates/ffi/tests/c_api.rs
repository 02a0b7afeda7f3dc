use std::ffi::{CStr, CString};
use std::ptr;

use mermin3_ffi::*;

fn last_error() -> String {
    let p = mermin3_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn ghz_value_through_handles() {
    unsafe {
        let mut state = ptr::null_mut();
        let mut op = ptr::null_mut();
        assert_eq!(mermin3_state_ghz(&mut state), Mermin3Status::Ok);
        assert_eq!(mermin3_bell_mermin(&mut op), Mermin3Status::Ok);
        let mut v = 0.0;
        assert_eq!(mermin3_bell_value(state, op, &mut v), Mermin3Status::Ok);
        assert!((v - 4.0).abs() <= 1e-12);
        mermin3_bell_free(op);
        mermin3_state_free(state);
    }
}

#[test]
fn noisy_ghz_and_axis_sigma() {
    let axes: [f64; 18] = [
        1., 0., 0., 0., 1., 0., 1., 0., 0., 0., 1., 0., 1., 0., 0., 0., 1., 0.,
    ];
    unsafe {
        let mut state = ptr::null_mut();
        let mut op = ptr::null_mut();
        assert_eq!(
            mermin3_state_noisy_ghz(0.7075, &mut state),
            Mermin3Status::Ok
        );
        assert_eq!(
            mermin3_bell_sigma(axes.as_ptr(), &mut op),
            Mermin3Status::Ok
        );
        let mut v = 0.0;
        assert_eq!(mermin3_bell_value(state, op, &mut v), Mermin3Status::Ok);
        assert!((v - 2.83).abs() <= 1e-12);
        mermin3_bell_free(op);
        mermin3_state_free(state);
    }
}

#[test]
fn amplitudes_are_validated() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = [h, 0., 0., 0., 0., 0., 0., -h];
    let bad = [1.0, 1.0];
    unsafe {
        let mut state = ptr::null_mut();
        assert_eq!(
            mermin3_state_from_amplitudes(re.as_ptr(), ptr::null(), 8, &mut state),
            Mermin3Status::Ok
        );
        let mut op = ptr::null_mut();
        mermin3_bell_mermin(&mut op);
        let mut v = 0.0;
        mermin3_bell_value(state, op, &mut v);
        assert!((v + 4.0).abs() <= 1e-12);
        mermin3_state_free(state);
        mermin3_bell_free(op);

        let mut state = ptr::null_mut();
        assert_eq!(
            mermin3_state_from_amplitudes(bad.as_ptr(), ptr::null(), 2, &mut state),
            Mermin3Status::InvalidArgument
        );
        assert!(state.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            mermin3_state_ghz(ptr::null_mut()),
            Mermin3Status::NullPointer
        );
        assert!(last_error().contains("null pointer"));
    }
}

#[test]
fn record_estimate_and_verdict() {
    let path = CString::new(format!(
        "{}/../core/fixtures/pan2000.json",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    unsafe {
        let mut rec = ptr::null_mut();
        assert_eq!(
            mermin3_record_load(path.as_ptr(), &mut rec),
            Mermin3Status::Ok
        );
        assert_eq!(mermin3_record_len(rec), 4);
        let mut e = Mermin3Estimate::default();
        assert_eq!(mermin3_estimate_m3(rec, &mut e), Mermin3Status::Ok);
        assert!((e.value - 2.83).abs() <= 1e-12);
        assert!((e.std_error - 0.09).abs() <= 1e-12);
        let mut verdict = std::mem::MaybeUninit::<Mermin3Verdict>::uninit();
        assert_eq!(
            mermin3_classify(e.value, e.std_error, 3.0, verdict.as_mut_ptr()),
            Mermin3Status::Ok
        );
        let verdict = verdict.assume_init();
        assert!((verdict.sigma_above_2 - 9.22).abs() <= 0.01);
        assert_eq!(
            verdict.classification,
            Mermin3Classification::ViolatesLhvAndBiseparableOrthogonal
        );
        mermin3_record_free(rec);

        let missing = CString::new("/nonexistent/record.json").unwrap();
        let mut rec = ptr::null_mut();
        assert_eq!(
            mermin3_record_load(missing.as_ptr(), &mut rec),
            Mermin3Status::Io
        );
        let broken = CString::new("{\"entries\": [").unwrap();
        assert_eq!(
            mermin3_record_from_json(broken.as_ptr(), &mut rec),
            Mermin3Status::MalformedInput
        );
        assert!(rec.is_null());
    }
}

#[test]
fn simulate_then_estimate() {
    unsafe {
        let mut state = ptr::null_mut();
        mermin3_state_noisy_ghz(0.7075, &mut state);
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(
            mermin3_simulate_mermin(state, 25_000, 9, &mut a),
            Mermin3Status::Ok
        );
        assert_eq!(
            mermin3_simulate_mermin(state, 25_000, 9, &mut b),
            Mermin3Status::Ok
        );
        let (mut ea, mut eb) = (Mermin3Estimate::default(), Mermin3Estimate::default());
        mermin3_estimate_m3(a, &mut ea);
        mermin3_estimate_m3(b, &mut eb);
        assert_eq!(ea.value.to_bits(), eb.value.to_bits());
        assert!((ea.value - 2.83).abs() <= 5.0 * ea.std_error);
        mermin3_record_free(a);
        mermin3_record_free(b);
        let mut none = ptr::null_mut();
        assert_eq!(
            mermin3_simulate_mermin(state, 0, 9, &mut none),
            Mermin3Status::InvalidArgument
        );
        mermin3_state_free(state);
    }
}

#[test]
fn optimize_biseparable_mermin() {
    unsafe {
        let mut opt = Mermin3Optimum::default();
        let mut best = ptr::null_mut();
        assert_eq!(
            mermin3_optimize(
                Mermin3Class::Bisep12_3,
                Mermin3Functional::MerminFixed,
                false,
                8,
                1,
                &mut opt,
                &mut best
            ),
            Mermin3Status::Ok
        );
        assert!((opt.best_value - 2.0).abs() <= 1e-6);
        let mut op = ptr::null_mut();
        mermin3_bell_mermin(&mut op);
        let mut v = 0.0;
        mermin3_bell_value(best, op, &mut v);
        assert!((v.abs() - opt.best_value).abs() <= 1e-12);
        mermin3_bell_free(op);
        mermin3_state_free(best);
    }
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(mermin3_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
