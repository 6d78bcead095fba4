//! Fast solver for the constant-coefficient bulk operator, used to
//! precondition the Newton systems of the flow.
//!
//! Away from the interface `u ≈ ±1`, `W'' = 2` and the Jacobian of one
//! implicit step reduces to
//!
//! ```text
//! h² [ 1/τ + (2/(c₀ε)) (-εΔ + 2/ε)² + κ (-εΔ + 2/ε) ]
//! ```
//!
//! where the last term is the second-order part of the length penalty. With
//! homogeneous Dirichlet data on the square this operator is diagonalized by
//! the two-dimensional DST-I, so its inverse costs four batches of 1-D
//! transforms.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;
use crate::recovery::c0_constant;

pub struct BulkPreconditioner {
    n: usize,
    /// interior size `n - 2`
    inner: usize,
    /// transform size: `inner` padded with zeros so that `m + 1` factors
    /// into small primes
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    /// `1/λ` per mode, with the transform normalization folded in
    inv: Vec<f64>,
    buf: Vec<f64>,
    spare: Vec<f64>,
    /// odd extensions of row pairs, one FFT of length `2(m + 1)` each
    packed: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl BulkPreconditioner {
    /// `shift` is `1/τ`; `length_curvature` is the coefficient `κ` above.
    pub fn new(grid: &GridSpec, epsilon: f64, shift: f64, length_curvature: f64) -> Self {
        let n = grid.n();
        let inner = n.saturating_sub(2).max(1);
        let m = smooth_at_least(inner + 1) - 1;
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        let scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut out = Self {
            n,
            inner,
            m,
            fft,
            inv: vec![0.0; m * m],
            buf: vec![0.0; m * m],
            spare: vec![0.0; m * m],
            packed: vec![Complex::new(0.0, 0.0); m.div_ceil(2) * 2 * (m + 1)],
            scratch,
        };
        out.set_coefficients(grid.h(), epsilon, shift, length_curvature);
        out
    }

    /// Recomputes the spectrum for new coefficients without replanning.
    pub fn set_coefficients(&mut self, h: f64, epsilon: f64, shift: f64, length_curvature: f64) {
        let m = self.m;
        let c0 = c0_constant();
        let norm = (2.0 / (m as f64 + 1.0)).powi(2);
        // eigenvalues of the negated 1-D second difference
        let lam: Vec<f64> = (1..=m)
            .map(|p| {
                let s = (p as f64 * std::f64::consts::PI / (2.0 * (m as f64 + 1.0))).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        for q in 0..m {
            for p in 0..m {
                let x = epsilon * (lam[p] + lam[q]) + 2.0 / epsilon;
                let op = shift + 2.0 / (c0 * epsilon) * x * x + length_curvature * x;
                // the length term may be negative; never drop below the shift
                self.inv[q * m + p] = norm / (h * h * op.max(shift));
            }
        }
    }

    /// `z = P⁻¹ r` on the full grid; boundary entries of `z` are zero.
    /// Callers restrict the result to the nodes they solve for. When the
    /// transform is padded the Dirichlet wall moves out by a few nodes on two
    /// sides, which keeps the map symmetric positive definite.
    pub fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let (n, a, m) = (self.n, self.inner, self.m);
        if n < 3 {
            z.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        for j in 0..m {
            let row = &mut self.buf[j * m..(j + 1) * m];
            if j < a {
                row[..a].copy_from_slice(&r[(j + 1) * n + 1..(j + 1) * n + 1 + a]);
                row[a..].iter_mut().for_each(|v| *v = 0.0);
            } else {
                row.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        self.transform();
        // the spectrum is symmetric in its two indices, so the transposed
        // layout left by `transform` needs no special handling
        for (b, s) in self.buf.iter_mut().zip(&self.inv) {
            *b *= s;
        }
        self.transform();
        z[..n].iter_mut().for_each(|v| *v = 0.0);
        z[(n - 1) * n..].iter_mut().for_each(|v| *v = 0.0);
        for j in 0..a {
            let row = &mut z[(j + 1) * n..(j + 2) * n];
            row[0] = 0.0;
            row[n - 1] = 0.0;
            row[1..1 + a].copy_from_slice(&self.buf[j * m..j * m + a]);
        }
    }

    /// Unnormalized 2-D DST-I of `buf`, returned transposed.
    fn transform(&mut self) {
        self.rows();
        transpose(&self.buf, &mut self.spare, self.m);
        std::mem::swap(&mut self.buf, &mut self.spare);
        self.rows();
    }

    /// DST-I of every row of `buf`. Two real rows share one complex FFT:
    /// the transform of an odd extension is purely imaginary, so with
    /// `x + i y` packed in, the real part carries `y` and the imaginary
    /// part carries `x`.
    fn rows(&mut self) {
        let m = self.m;
        let len = 2 * (m + 1);
        let zero = Complex::new(0.0, 0.0);
        for (p, chunk) in self.packed.chunks_mut(len).enumerate() {
            let x = &self.buf[2 * p * m..(2 * p + 1) * m];
            let y = self.buf.get((2 * p + 1) * m..(2 * p + 2) * m);
            chunk[0] = zero;
            chunk[m + 1] = zero;
            for k in 0..m {
                let c = Complex::new(x[k], y.map_or(0.0, |y| y[k]));
                chunk[k + 1] = c;
                chunk[len - 1 - k] = -c;
            }
        }
        self.fft.process_with_scratch(&mut self.packed, &mut self.scratch);
        for (p, chunk) in self.packed.chunks(len).enumerate() {
            for k in 0..m {
                self.buf[2 * p * m + k] = -0.5 * chunk[k + 1].im;
            }
            if 2 * p + 1 < m {
                for k in 0..m {
                    self.buf[(2 * p + 1) * m + k] = 0.5 * chunk[k + 1].re;
                }
            }
        }
    }
}

fn transpose(src: &[f64], dst: &mut [f64], m: usize) {
    const B: usize = 32;
    for jb in (0..m).step_by(B) {
        for ib in (0..m).step_by(B) {
            for j in jb..(jb + B).min(m) {
                for i in ib..(ib + B).min(m) {
                    dst[i * m + j] = src[j * m + i];
                }
            }
        }
    }
}

/// Smallest integer `>= k` without prime factors above 7.
fn smooth_at_least(k: usize) -> usize {
    (k..)
        .find(|&c| {
            let mut c = c;
            for p in [2, 3, 5, 7] {
                while c % p == 0 {
                    c /= p;
                }
            }
            c == 1
        })
        .expect("smooth numbers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The same operator applied by finite differences with zero boundary.
    fn apply_operator(g: &GridSpec, eps: f64, shift: f64, kappa: f64, v: &[f64]) -> Vec<f64> {
        let n = g.n();
        let h2 = g.h() * g.h();
        let c0 = c0_constant();
        // x = -ε Δ v + 2 v / ε on the interior
        let neg_lap_shift = |v: &[f64]| {
            let mut out = vec![0.0; v.len()];
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    let k = j * n + i;
                    let lap = (v[k - 1] + v[k + 1] + v[k - n] + v[k + n] - 4.0 * v[k]) / h2;
                    out[k] = -eps * lap + 2.0 * v[k] / eps;
                }
            }
            out
        };
        let a = neg_lap_shift(v);
        let b = neg_lap_shift(&a);
        (0..v.len())
            .map(|k| h2 * (shift * v[k] + 2.0 / (c0 * eps) * b[k] + kappa * a[k]))
            .collect()
    }

    #[test]
    fn inverts_the_bulk_operator() {
        // 49 interior nodes: 50 = 2·5², no padding, so the inverse is exact
        let g = GridSpec::new(51, 1.1).unwrap();
        let n = g.n();
        let (eps, shift, kappa) = (0.05, 1e5, 300.0);
        let mut v = vec![0.0; n * n];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                v[j * n + i] = ((i * 7 + j * 3) % 11) as f64 - 5.0;
            }
        }
        let r = apply_operator(&g, eps, shift, kappa, &v);
        let mut pre = BulkPreconditioner::new(&g, eps, shift, kappa);
        let mut z = vec![0.0; n * n];
        pre.apply(&r, &mut z);
        let err = z.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        // repeated use must not depend on leftover state
        pre.apply(&r, &mut z);
        let again = z.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(again < 1e-9, "{again}");
    }

    #[test]
    fn padded_map_is_symmetric_positive() {
        let g = GridSpec::new(23, 1.1).unwrap();
        let n = g.n();
        let mut pre = BulkPreconditioner::new(&g, 0.05, 1e5, -200.0);
        assert!(pre.m > pre.inner);
        let field = |s: usize| -> Vec<f64> {
            (0..n * n)
                .map(|k| {
                    let (i, j) = (k % n, k / n);
                    if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                        0.0
                    } else {
                        (((i * s + j * 5) % 13) as f64 - 6.0) / 6.0
                    }
                })
                .collect()
        };
        let (v, w) = (field(3), field(7));
        let (mut pv, mut pw) = (vec![0.0; n * n], vec![0.0; n * n]);
        pre.apply(&v, &mut pv);
        pre.apply(&w, &mut pw);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (a, b) = (dot(&pv, &w), dot(&pw, &v));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{a} {b}");
        assert!(dot(&pv, &v) > 0.0);
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_at_least(191), 192);
        assert_eq!(smooth_at_least(11), 12);
        assert_eq!(smooth_at_least(64), 64);
    }
}
