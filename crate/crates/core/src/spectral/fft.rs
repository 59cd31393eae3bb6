//! Thin 2D FFT layer over `rustfft` with a process-wide plan cache.
//!
//! Both directions are unnormalized here; normalization conventions live in
//! [`super::field`]. Plans are immutable once built and shared across threads.

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: LazyLock<Mutex<HashMap<usize, (Plan, Plan)>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plans_for(n: usize) -> (Plan, Plan) {
    let mut cache = PLANS.lock().unwrap();
    let (fwd, inv) = cache.entry(n).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
    });
    (Arc::clone(fwd), Arc::clone(inv))
}

fn transpose_square(a: &mut Array2<Complex<f64>>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let tmp = a[(i, j)];
            a[(i, j)] = a[(j, i)];
            a[(j, i)] = tmp;
        }
    }
}

fn fft2_square(a: &mut Array2<Complex<f64>>, plan: &Plan) {
    let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
    for mut row in a.rows_mut() {
        plan.process_with_scratch(row.as_slice_mut().expect("contiguous row"), &mut scratch);
    }
    transpose_square(a);
    for mut row in a.rows_mut() {
        plan.process_with_scratch(row.as_slice_mut().expect("contiguous row"), &mut scratch);
    }
    transpose_square(a);
}

/// In-place unnormalized forward transform (physical -> spectral).
pub(crate) fn forward(a: &mut Array2<Complex<f64>>) {
    let (fwd, _) = plans_for(a.nrows());
    fft2_square(a, &fwd);
}

/// In-place unnormalized inverse transform (spectral -> physical).
pub(crate) fn inverse(a: &mut Array2<Complex<f64>>) {
    let (_, inv) = plans_for(a.nrows());
    fft2_square(a, &inv);
}
