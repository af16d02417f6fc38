//! Radix-2 complex FFT and Rader's prime-length DFT.
//!
//! [`rader_dft`] computes `X[k] = sum_n x[n] e(k n / p)` (positive kernel,
//! unnormalised) for prime `p` by rewriting the nonzero frequencies as a
//! cyclic convolution of length `p - 1` over a primitive-root ordering. The
//! convolution is evaluated by zero padding to a power of two and running
//! two forward transforms and one inverse.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{inv_mod, mul_mod, primitive_root};

/// Precomputed twiddles for an in-place iterative radix-2 transform.
pub struct Radix2Plan {
    n: usize,
    log_n: u32,
    /// `exp(-2 pi i k / n)` for `k < n/2`, each evaluated directly.
    twiddles: Vec<Complex64>,
}

impl Radix2Plan {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "radix-2 length must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Radix2Plan {
            n,
            log_n: n.trailing_zeros(),
            twiddles,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn bit_reverse(&self, data: &mut [Complex64]) {
        if self.n <= 2 {
            return;
        }
        let shift = usize::BITS - self.log_n;
        for i in 0..self.n {
            let j = i.reverse_bits() >> shift;
            if i < j {
                data.swap(i, j);
            }
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n);
        self.bit_reverse(data);
        let mut half = 1;
        while half < self.n {
            let stride = self.n / (2 * half);
            for start in (0..self.n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let u = data[start + k];
                    let v = data[start + k + half] * w;
                    data[start + k] = u + v;
                    data[start + k + half] = u - v;
                }
            }
            half *= 2;
        }
    }

    /// In place, kernel `exp(-2 pi i jk/n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// In place, kernel `exp(+2 pi i jk/n)`, scaled by `1/n`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// Cyclic convolution `out[r] = sum_q a[q] b[(r - q) mod L]` via a padded
/// linear convolution of length `>= 2L - 1`.
pub fn cyclic_convolution(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len();
    assert_eq!(len, b.len());
    if len == 0 {
        return Vec::new();
    }
    let n = (2 * len - 1).next_power_of_two();
    let plan = Radix2Plan::new(n);
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = fa.clone();
    fa[..len].copy_from_slice(a);
    fb[..len].copy_from_slice(b);
    plan.forward(&mut fa);
    plan.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    plan.inverse(&mut fa);
    (0..len)
        .map(|r| {
            if r + len < 2 * len - 1 {
                fa[r] + fa[r + len]
            } else {
                fa[r]
            }
        })
        .collect()
}

/// Precomputed Rader data for one prime length.
pub struct RaderPlan {
    p: u64,
    /// `g^{-q} mod p` for `q = 0..p-1`: input permutation.
    input_order: Vec<u64>,
    /// `g^r mod p`: output permutation.
    output_order: Vec<u64>,
    plan: Radix2Plan,
    /// Transformed kernel `b[q] = e(g^q / p)`, zero padded.
    kernel_hat: Vec<Complex64>,
}

impl RaderPlan {
    pub fn new(p: u64) -> Result<Self> {
        let g = primitive_root(p)?;
        let g_inv = inv_mod(g, p);
        let len = (p - 1) as usize;
        let mut input_order = Vec::with_capacity(len);
        let mut output_order = Vec::with_capacity(len);
        let (mut gi, mut go) = (1u64, 1u64);
        for _ in 0..len {
            input_order.push(gi);
            output_order.push(go);
            gi = mul_mod(gi, g_inv, p);
            go = mul_mod(go, g, p);
        }
        let n = (2 * len - 1).max(1).next_power_of_two();
        let plan = Radix2Plan::new(n);
        let mut kernel_hat = vec![Complex64::new(0.0, 0.0); n];
        for (q, &gq) in output_order.iter().enumerate() {
            let theta = 2.0 * PI * gq as f64 / p as f64;
            kernel_hat[q] = Complex64::new(theta.cos(), theta.sin());
        }
        plan.forward(&mut kernel_hat);
        Ok(RaderPlan {
            p,
            input_order,
            output_order,
            plan,
            kernel_hat,
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Length-p DFT with kernel `e(+kn/p)`.
    pub fn transform(&self, x: &[Complex64]) -> Vec<Complex64> {
        let p = self.p as usize;
        assert_eq!(x.len(), p);
        let len = p - 1;
        let n = self.plan.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (q, &idx) in self.input_order.iter().enumerate() {
            buf[q] = x[idx as usize];
        }
        self.plan.forward(&mut buf);
        for (z, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *z *= *k;
        }
        self.plan.inverse(&mut buf);

        let mut out = vec![Complex64::new(0.0, 0.0); p];
        out[0] = pairwise_sum(x);
        for r in 0..len {
            let conv = if r + len < n { buf[r] + buf[r + len] } else { buf[r] };
            out[self.output_order[r] as usize] = x[0] + conv;
        }
        out
    }
}

/// Prime-length DFT `X[k] = sum_n x[n] e(kn/p)` via Rader's algorithm.
pub fn rader_dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = RaderPlan::new(x.len() as u64)?;
    Ok(plan.transform(x))
}

/// Recursive pairwise summation.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
