//! Square 2-D complex FFTs built from cached 1-D `rustfft` plans.
//!
//! Plans are shared through a process-wide mutex-guarded cache; each row
//! transform is independent, so results do not depend on the thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Plan>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Row count above which rows are transformed in parallel.
const PARALLEL_ROWS: usize = 128;

fn plan(n: usize, direction: FftDirection) -> Plan {
    let forward = matches!(direction, FftDirection::Forward);
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn rows(data: &mut [Complex64], n: usize, fft: &Plan) {
    let scratch_len = fft.get_inplace_scratch_len();
    if n >= PARALLEL_ROWS {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    } else {
        let mut scratch = vec![Complex64::default(); scratch_len];
        for row in data.chunks_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (ib..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                let j0 = if ib == jb { i + 1 } else { jb };
                for j in j0..(jb + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

fn transform(data: &mut [Complex64], n: usize, direction: FftDirection) {
    assert_eq!(data.len(), n * n, "fft2 buffer must be n x n");
    let fft = plan(n, direction);
    rows(data, n, &fft);
    transpose(data, n);
    rows(data, n, &fft);
    transpose(data, n);
}

/// Unnormalized forward transform: `X(k) = Σ_x x(j) e^{-i k·x_j}`.
pub fn forward(data: &mut [Complex64], n: usize) {
    transform(data, n, FftDirection::Forward);
}

/// Unnormalized inverse transform: `x(j) = Σ_k X(k) e^{+i k·x_j}`.
pub fn inverse(data: &mut [Complex64], n: usize) {
    transform(data, n, FftDirection::Inverse);
}
