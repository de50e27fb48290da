//! Multidimensional FFT over row-major arrays.
//!
//! Each axis is transformed while it is the contiguous (last) axis, then the
//! axes are rotated cyclically; after `d` rounds the layout is back in the
//! original order. Lines are processed in parallel in fixed-size blocks, so
//! results are bit-reproducible regardless of thread count.

use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.lock().unwrap().plan_fft(len, direction)
}

// Below this many elements the rayon dispatch overhead dominates.
const PAR_THRESHOLD: usize = 1 << 14;

/// In-place d-dimensional DFT. The forward transform is unnormalized; the
/// inverse divides by the total number of points.
pub fn fftn(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer does not match shape");
    let direction = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };

    let d = shape.len();
    let mut cur: Vec<usize> = shape.to_vec();
    let mut scratch: Vec<Complex64> = Vec::new();
    for _ in 0..d {
        let len = *cur.last().unwrap();
        fft_lines(data, len, direction);
        if d > 1 {
            rotate_last_axis_to_front(data, &mut scratch, total / len, len);
            cur.rotate_right(1);
        }
    }

    if inverse {
        let scale = 1.0 / total as f64;
        if total >= PAR_THRESHOLD {
            data.par_chunks_mut(1 << 12).for_each(|c| {
                for z in c {
                    *z *= scale;
                }
            });
        } else {
            for z in data.iter_mut() {
                *z *= scale;
            }
        }
    }
}

/// FFT of every contiguous line of length `len`.
fn fft_lines(data: &mut [Complex64], len: usize, direction: FftDirection) {
    let fft = plan(len, direction);
    let block = len * 32;
    if data.len() >= PAR_THRESHOLD {
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for line in chunk.chunks_exact_mut(len) {
                fft.process_with_scratch(line, &mut scratch);
            }
        });
    } else {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for line in data.chunks_exact_mut(len) {
            fft.process_with_scratch(line, &mut scratch);
        }
    }
}

/// Reinterpret `data` as a (rows × len) matrix and transpose it to
/// (len × rows), which moves the last axis of the nd-array to the front.
fn rotate_last_axis_to_front(
    data: &mut [Complex64],
    scratch: &mut Vec<Complex64>,
    rows: usize,
    len: usize,
) {
    scratch.clear();
    scratch.resize(data.len(), Complex64::default());
    {
        let src = &*data;
        if data.len() >= PAR_THRESHOLD {
            scratch
                .par_chunks_mut(rows)
                .enumerate()
                .for_each(|(k, out)| {
                    for (row, slot) in out.iter_mut().enumerate() {
                        *slot = src[row * len + k];
                    }
                });
        } else {
            for (k, out) in scratch.chunks_mut(rows).enumerate() {
                for (row, slot) in out.iter_mut().enumerate() {
                    *slot = src[row * len + k];
                }
            }
        }
    }
    data.copy_from_slice(scratch);
}

/// Apply a complex n×n matrix along the last (contiguous) axis of every line:
/// `out[.., i] = Σ_m mat[i*n + m] · in[.., m]`, then rotate that axis to the
/// front. Used for band-limited resampling, which is a dense transform per
/// axis rather than an FFT.
pub fn apply_matrix_last_axis_rotating(
    data: &mut [Complex64],
    scratch: &mut Vec<Complex64>,
    rows: usize,
    n: usize,
    mat: &[Complex64],
) {
    assert_eq!(data.len(), rows * n);
    assert_eq!(mat.len(), n * n);
    scratch.clear();
    scratch.resize(data.len(), Complex64::default());
    {
        let src = &*data;
        let fill = |(i, out): (usize, &mut [Complex64])| {
            let mrow = &mat[i * n..(i + 1) * n];
            for (row, slot) in out.iter_mut().enumerate() {
                let line = &src[row * n..(row + 1) * n];
                let mut acc = Complex64::default();
                for m in 0..n {
                    acc += mrow[m] * line[m];
                }
                *slot = acc;
            }
        };
        if data.len() >= PAR_THRESHOLD {
            scratch.par_chunks_mut(rows).enumerate().for_each(fill);
        } else {
            scratch.chunks_mut(rows).enumerate().for_each(fill);
        }
    }
    data.copy_from_slice(scratch);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let shape = [4usize, 8, 16];
        let total: usize = shape.iter().product();
        let orig: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = orig.clone();
        fftn(&mut buf, &shape, false);
        fftn(&mut buf, &shape, true);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_dft_2d() {
        let (n0, n1) = (4usize, 8usize);
        let src: Vec<Complex64> = (0..n0 * n1)
            .map(|i| Complex64::new((i as f64).sin(), 0.25 * i as f64))
            .collect();
        let mut buf = src.clone();
        fftn(&mut buf, &[n0, n1], false);
        for k0 in 0..n0 {
            for k1 in 0..n1 {
                let mut acc = Complex64::default();
                for j0 in 0..n0 {
                    for j1 in 0..n1 {
                        let ph = -2.0
                            * std::f64::consts::PI
                            * ((k0 * j0) as f64 / n0 as f64 + (k1 * j1) as f64 / n1 as f64);
                        acc += src[j0 * n1 + j1] * Complex64::new(ph.cos(), ph.sin());
                    }
                }
                assert!((buf[k0 * n1 + k1] - acc).norm() < 1e-9);
            }
        }
    }
}
