use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place 2D FFT of an `m × m` row-major array. The inverse transform is
/// normalized by `1 / m²`.
pub(crate) fn fft2(data: &mut [Complex64], m: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m * m);
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    });
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, m);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, m);
    if inverse {
        let s = 1.0 / (m * m) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for ib in (0..m).step_by(B) {
        for jb in (ib..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                let j0 = if ib == jb { i + 1 } else { jb };
                for j in j0..(jb + B).min(m) {
                    data.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_single_mode() {
        let m = 16;
        let mut a: Vec<Complex64> = (0..m * m)
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let orig = a.clone();
        fft2(&mut a, m, false);
        fft2(&mut a, m, true);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-13);
        }
        // e^{2πi(2i + 3j)/m} has all its weight on bin (2, 3).
        let mut b: Vec<Complex64> = (0..m * m)
            .map(|k| {
                let (i, j) = ((k / m) as f64, (k % m) as f64);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (2.0 * i + 3.0 * j) / m as f64)
            })
            .collect();
        fft2(&mut b, m, false);
        assert!((b[2 * m + 3].re - (m * m) as f64).abs() < 1e-9);
        assert!(b[3 * m + 2].norm() < 1e-9);
    }
}
