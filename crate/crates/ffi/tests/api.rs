use std::ffi::CStr;
use std::ptr;

use chsim_ffi::*;

fn last_error() -> String {
    let p = chsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn sweep_rows_match_the_core_harness() {
    unsafe {
        let mut sweep = ptr::null_mut();
        assert_eq!(chsim_sweep_new(c"smooth-2ch".as_ptr(), c"lp2ch".as_ptr(), &mut sweep), ChsimStatus::Ok);
        assert_eq!(chsim_sweep_set_levels(sweep, 3, 5), ChsimStatus::Ok);
        assert_eq!(chsim_sweep_set_repeats(sweep, 1), ChsimStatus::Ok);
        assert_eq!(chsim_sweep_set_rho_interp(sweep, ChsimRhoInterp::Constant), ChsimStatus::Ok);
        let mut results = ptr::null_mut();
        assert_eq!(chsim_sweep_run(sweep, &mut results), ChsimStatus::Ok);

        let mut cfg = chsim::harness::ExperimentConfig::new(
            chsim::harness::ExperimentId::Smooth2ch,
            chsim::harness::SchemeId::Lp2ch,
        );
        (cfg.kmin, cfg.kmax, cfg.k0, cfg.repeats) = (3, 5, 7, 1);
        cfg.rho_interp = Some(chsim::metrics::RhoInterp::Constant);
        let expect = chsim::harness::run(&cfg).unwrap();

        assert_eq!(chsim_results_len(results), expect.len());
        for (i, e) in expect.iter().enumerate() {
            let mut row = std::mem::zeroed::<ChsimRow>();
            assert_eq!(chsim_results_row(results, i, &mut row), ChsimStatus::Ok);
            assert_eq!(row.n as usize, e.n);
            assert_eq!(row.failed, 0);
            assert!(chsim_results_failure(results, i).is_null());
            assert_eq!(Some(row.l2_error), e.l2_error);
            assert_eq!(Some(row.rho_l2_error), e.rho_l2_error);
            assert_eq!(Some(row.accepted_steps as u64), e.accepted_steps);
        }
        let mut row = std::mem::zeroed::<ChsimRow>();
        assert_eq!(chsim_results_row(results, expect.len(), &mut row), ChsimStatus::OutOfRange);
        chsim_results_free(results);
        chsim_sweep_free(sweep);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut sweep = ptr::null_mut();
        assert_eq!(chsim_sweep_new(c"smooth-2ch".as_ptr(), c"cmp".as_ptr(), &mut sweep), ChsimStatus::Incompatible);
        assert!(sweep.is_null());
        assert!(last_error().contains("cmp"));

        assert_eq!(chsim_sweep_new(c"nope".as_ptr(), c"vd".as_ptr(), &mut sweep), ChsimStatus::InvalidArgument);
        assert_eq!(chsim_sweep_new(ptr::null(), c"vd".as_ptr(), &mut sweep), ChsimStatus::NullPointer);
        assert_eq!(chsim_sweep_new(c"smooth-ch".as_ptr(), c"vd".as_ptr(), ptr::null_mut()), ChsimStatus::NullPointer);

        assert_eq!(chsim_sweep_new(c"smooth-ch".as_ptr(), c"vd".as_ptr(), &mut sweep), ChsimStatus::Ok);
        assert_eq!(chsim_sweep_set_tolerances(sweep, -1.0, 1e-6), ChsimStatus::InvalidArgument);
        assert_eq!(chsim_sweep_set_levels(sweep, 6, 3), ChsimStatus::Ok);
        let mut results = ptr::null_mut();
        assert_eq!(chsim_sweep_run(sweep, &mut results), ChsimStatus::Configuration);
        assert!(results.is_null());
        assert!(last_error().contains("kmin"));
        chsim_sweep_free(sweep);

        assert_eq!(chsim_results_len(ptr::null()), 0);
        assert_eq!(chsim_sweep_set_repeats(ptr::null_mut(), 1), ChsimStatus::NullPointer);
        chsim_sweep_free(ptr::null_mut());
        assert!(!chsim_status_string(ChsimStatus::Panic).is_null());
    }
}

#[test]
fn wave_matches_core_evaluation() {
    unsafe {
        let mut wave = ptr::null_mut();
        assert_eq!(chsim_wave_new(true, &mut wave), ChsimStatus::Ok);
        let core = chsim::reference_solutions::traveling_wave_2ch().unwrap();
        let (mut c, mut p) = (0.0, 0.0);
        assert_eq!(chsim_wave_info(wave, &mut c, &mut p), ChsimStatus::Ok);
        assert_eq!((c, p), (core.speed(), core.period));

        let x = [0.0, 0.3 * p, 0.77 * p, 2.5 * p];
        let (mut u, mut ux, mut rho) = ([0.0; 4], [0.0; 4], [0.0; 4]);
        let t = 0.4;
        let st = chsim_wave_eval(wave, t, x.as_ptr(), 4, u.as_mut_ptr(), ux.as_mut_ptr(), rho.as_mut_ptr());
        assert_eq!(st, ChsimStatus::Ok);
        for i in 0..4 {
            assert_eq!((u[i], ux[i]), core.solution(t, x[i]));
            assert_eq!(rho[i], core.density(x[i] - c * t));
        }
        assert_eq!(
            chsim_wave_eval(wave, t, x.as_ptr(), 4, u.as_mut_ptr(), ux.as_mut_ptr(), ptr::null_mut()),
            ChsimStatus::Ok
        );
        chsim_wave_free(wave);

        assert_eq!(chsim_wave_new(false, &mut wave), ChsimStatus::Ok);
        chsim_wave_eval(wave, 0.0, x.as_ptr(), 4, u.as_mut_ptr(), ux.as_mut_ptr(), rho.as_mut_ptr());
        assert!(rho.iter().all(|r| r.is_nan()));
        chsim_wave_free(wave);
    }
}

#[test]
fn single_peakon_translates_at_its_height() {
    unsafe {
        // A lone periodic peakon of height c moves rigidly with speed c.
        let (y, u, period) = ([1.0], [0.8], 5.0);
        let mut p = ptr::null_mut();
        assert_eq!(chsim_peakons_new(y.as_ptr(), u.as_ptr(), 1, period, &mut p), ChsimStatus::Ok);
        assert_eq!(chsim_peakons_len(p), 1);
        let (mut e0, mut m0) = (0.0, 0.0);
        chsim_peakons_invariants(p, &mut e0, &mut m0);
        assert_eq!(chsim_peakons_advance(p, 2.0, 1e-13, 1e-13), ChsimStatus::Ok);
        let (mut y1, mut u1, mut h1) = ([0.0], [0.0], [0.0]);
        assert_eq!(chsim_peakons_get(p, y1.as_mut_ptr(), u1.as_mut_ptr(), h1.as_mut_ptr()), ChsimStatus::Ok);
        assert!((y1[0] - (1.0 + 0.8 * 2.0)).abs() < 1e-10, "{}", y1[0]);
        assert!((u1[0] - 0.8).abs() < 1e-12);
        assert!((h1[0] - e0).abs() < 1e-12 * e0);

        let xs = [y1[0]];
        let (mut ue, mut uxe) = ([0.0], [0.0]);
        assert_eq!(chsim_peakons_eval(p, xs.as_ptr(), 1, ue.as_mut_ptr(), uxe.as_mut_ptr()), ChsimStatus::Ok);
        assert!((ue[0] - 0.8).abs() < 1e-12);
        assert_eq!(chsim_peakons_advance(p, -1.0, 1e-8, 1e-8), ChsimStatus::InvalidArgument);
        chsim_peakons_free(p);

        assert_eq!(chsim_peakons_new(y.as_ptr(), u.as_ptr(), 1, -1.0, &mut p), ChsimStatus::InvalidArgument);
        assert!(p.is_null());
        assert_eq!(chsim_peakons_new(ptr::null(), u.as_ptr(), 1, 1.0, &mut p), ChsimStatus::NullPointer);
    }
}
