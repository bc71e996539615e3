//! In-place iterative radix-2 FFT on split real/imaginary buffers.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Precomputed twiddles for one power-of-two length.
#[derive(Debug, Clone)]
pub(crate) struct Fft {
    len: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Fft {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let half = len / 2;
        let mut cos = Vec::with_capacity(half);
        let mut sin = Vec::with_capacity(half);
        for j in 0..half {
            let angle = -2.0 * PI * (j as f64) / (len as f64);
            cos.push(angle.cos());
            sin.push(angle.sin());
        }
        Fft { len, cos, sin }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Forward transform `X_k = Σ_j x_j e^{-2πi jk/N}`.
    pub(crate) fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.len;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let (wr, wi) = (self.cos[k * stride], self.sin[k * stride]);
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive(re: &[f64], im: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = re.len();
        let mut out_re = vec![0.0; n];
        let mut out_im = vec![0.0; n];
        for k in 0..n {
            for j in 0..n {
                let a = -2.0 * PI * (j * k) as f64 / n as f64;
                out_re[k] += re[j] * a.cos() - im[j] * a.sin();
                out_im[k] += re[j] * a.sin() + im[j] * a.cos();
            }
        }
        (out_re, out_im)
    }

    #[test]
    fn matches_naive_dft() {
        for len in [1usize, 2, 4, 8, 64] {
            let re: Vec<f64> = (0..len).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let im: Vec<f64> = (0..len).map(|i| ((i * 5 + 1) % 13) as f64 * 0.25).collect();
            let (er, ei) = naive(&re, &im);
            let (mut r, mut i) = (re.clone(), im.clone());
            Fft::new(len).forward(&mut r, &mut i);
            for k in 0..len {
                assert!((r[k] - er[k]).abs() < 1e-9, "len {len} k {k}");
                assert!((i[k] - ei[k]).abs() < 1e-9, "len {len} k {k}");
            }
        }
    }
}
