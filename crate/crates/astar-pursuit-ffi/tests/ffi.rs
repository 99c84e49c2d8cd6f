//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use astar_pursuit_ffi::*;

fn generate(seed: u64) -> *mut ApProblem {
    let mut problem: *mut ApProblem = std::ptr::null_mut();
    let status = unsafe {
        ap_problem_generate(
            64,
            32,
            5,
            ApCoeffDist::Uniform,
            ApMatrixKind::Gaussian,
            seed,
            1,
            f64::NAN,
            &mut problem,
        )
    };
    assert_eq!(status, ApStatus::Ok);
    assert!(!problem.is_null());
    problem
}

#[test]
fn generate_recover_and_read_back() {
    let problem = generate(7);
    unsafe {
        assert_eq!(ap_problem_signal_len(problem), 64);

        let mut result: *mut ApResult = std::ptr::null_mut();
        let status = ap_recover_astar(problem, ap_search_params_default(), &mut result);
        assert_eq!(status, ApStatus::Ok);
        assert_eq!(ap_result_termination(result), ApTermination::CompletePath);
        assert_eq!(ap_result_support_len(result), 5);
        assert!(ap_result_iterations(result) >= 4);
        assert!(ap_result_residue_norm(result) <= 1e-8);

        let mut signal = vec![0.0f64; 64];
        assert_eq!(ap_result_copy_signal(result, signal.as_mut_ptr(), 64), ApStatus::Ok);
        let mut support = vec![0usize; 5];
        assert_eq!(ap_result_copy_support(result, support.as_mut_ptr(), 5), ApStatus::Ok);
        for &atom in &support {
            assert!(atom < 64);
            assert!(signal[atom] != 0.0);
        }
        // Short destination buffers are rejected.
        assert_eq!(
            ap_result_copy_signal(result, signal.as_mut_ptr(), 8),
            ApStatus::DimensionMismatch
        );

        ap_result_free(result);
        ap_problem_free(problem);
    }
}

#[test]
fn explicit_matrix_omp_and_sp() {
    // Columns e1, e2, e3 in R^3; y = 2 e2.
    let phi = [
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, //
        0.0, 0.0, 1.0,
    ];
    let y = [0.0, 2.0, 0.0];
    unsafe {
        let mut problem: *mut ApProblem = std::ptr::null_mut();
        let status = ap_problem_create(phi.as_ptr(), 3, 3, y.as_ptr(), 1, &mut problem);
        assert_eq!(status, ApStatus::Ok);

        for recover in [ap_recover_omp, ap_recover_sp] {
            let mut result: *mut ApResult = std::ptr::null_mut();
            assert_eq!(recover(problem, &mut result), ApStatus::Ok);
            assert_eq!(ap_result_support_len(result), 1);
            let mut support = [0usize; 1];
            assert_eq!(ap_result_copy_support(result, support.as_mut_ptr(), 1), ApStatus::Ok);
            assert_eq!(support[0], 1);
            let mut signal = [0.0f64; 3];
            assert_eq!(ap_result_copy_signal(result, signal.as_mut_ptr(), 3), ApStatus::Ok);
            assert!((signal[1] - 2.0).abs() <= 1e-12);
            ap_result_free(result);
        }
        ap_problem_free(problem);
    }
}

#[test]
fn ffi_matches_direct_library_call() {
    let problem = generate(21);
    unsafe {
        let mut result: *mut ApResult = std::ptr::null_mut();
        assert_eq!(ap_recover_omp(problem, &mut result), ApStatus::Ok);
        let len = ap_result_support_len(result);
        let mut support = vec![0usize; len];
        assert_eq!(ap_result_copy_support(result, support.as_mut_ptr(), len), ApStatus::Ok);

        // The same instance rebuilt through the library directly.
        let mut rng = astar_pursuit::synth::ensemble_rng(21, 1);
        let phi = astar_pursuit::synth::gen_matrix(
            32,
            64,
            astar_pursuit::synth::MatrixKind::Gaussian,
            false,
            &mut rng,
        );
        let x = astar_pursuit::synth::gen_sparse_signal(
            64,
            5,
            astar_pursuit::synth::CoeffDist::Uniform,
            &mut rng,
        );
        let y = astar_pursuit::synth::observe(&phi, &x, None, &mut rng).unwrap();
        let direct = astar_pursuit::baselines::recover_omp(
            &astar_pursuit::synth::ProblemInstance::new(phi, y, Some(x), 5).unwrap(),
            5,
        )
        .unwrap();
        assert_eq!(support, direct.support);

        ap_result_free(result);
        ap_problem_free(problem);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        let mut problem: *mut ApProblem = std::ptr::null_mut();
        assert_eq!(
            ap_problem_create(std::ptr::null(), 2, 2, std::ptr::null(), 1, &mut problem),
            ApStatus::NullArgument
        );
        let mut result: *mut ApResult = std::ptr::null_mut();
        assert_eq!(ap_recover_omp(std::ptr::null(), &mut result), ApStatus::NullArgument);
        // Invalid geometry.
        assert_eq!(
            ap_problem_generate(
                16,
                32,
                5,
                ApCoeffDist::Uniform,
                ApMatrixKind::Gaussian,
                0,
                1,
                f64::NAN,
                &mut problem,
            ),
            ApStatus::InvalidArgument
        );
        // Freeing null is a no-op.
        ap_problem_free(std::ptr::null_mut());
        ap_result_free(std::ptr::null_mut());
    }
}
