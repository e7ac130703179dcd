//! Periodic grid on `[-L/2, L/2)^3` with 3D FFTs built from rustfft line transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{SimError, SimResult};

pub type C64 = Complex64;
/// Three components on the grid.
pub type Vector<T> = [Vec<T>; 3];

#[derive(Clone)]
pub struct Grid {
    pub n: usize,
    pub l: f64,
    m: Vec<i64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("l", &self.l).finish()
    }
}

impl Grid {
    pub fn new(n: usize, l: f64) -> SimResult<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(SimError::Config(format!("grid size {n} must be a power of two >= 4")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(SimError::Config(format!("box length {l} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let m = (0..n as i64).map(|i| if i < n as i64 / 2 { i } else { i - n as i64 }).collect();
        Ok(Self { n, l, m, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Quadrature weight of one cell.
    pub fn cell(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Integer wavenumbers of a spectral index.
    pub fn modes(&self, idx: usize) -> [i64; 3] {
        self.split(idx).map(|i| self.m[i])
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let s = std::f64::consts::TAU / self.l;
        self.modes(idx).map(|m| s * m as f64)
    }

    pub fn k2(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Spectral index of `-k`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let [i, j, k] = self.split(idx);
        self.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    /// Physical coordinates of a grid node.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let h = self.h();
        self.split(idx).map(|i| -0.5 * self.l + i as f64 * h)
    }

    /// Two-thirds rule: keep `|m| <= n/3` in every direction; the Nyquist plane is always dropped.
    pub fn keep(&self, idx: usize) -> bool {
        let cut = self.n as i64 / 3;
        self.modes(idx).iter().all(|&m| m.abs() <= cut && m != -(self.n as i64) / 2)
    }

    fn lines(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        // contiguous axis
        fft.process(data);
        let mut line = vec![C64::new(0.0, 0.0); n];
        for axis_stride in [n, n * n] {
            for base in 0..self.len() {
                // visit each line once: the coordinate along this axis must be zero
                if (base / axis_stride) % n != 0 {
                    continue;
                }
                for (t, v) in line.iter_mut().enumerate() {
                    *v = data[base + t * axis_stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * axis_stride] = *v;
                }
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [C64]) {
        self.lines(data, &self.fwd);
    }

    /// Inverse transform including the `1/n^3` factor.
    pub fn inverse(&self, data: &mut [C64]) {
        self.lines(data, &self.inv);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn to_spectral(&self, real: &[f64]) -> Vec<C64> {
        let mut d: Vec<C64> = real.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.forward(&mut d);
        d
    }

    pub fn to_physical(&self, spec: &[C64]) -> Vec<f64> {
        let mut d = spec.to_vec();
        self.inverse(&mut d);
        d.into_iter().map(|v| v.re).collect()
    }

    pub fn vector_to_physical(&self, v: &Vector<C64>) -> Vector<f64> {
        [0, 1, 2].map(|c| self.to_physical(&v[c]))
    }

    pub fn vector_to_spectral(&self, v: &Vector<f64>) -> Vector<C64> {
        [0, 1, 2].map(|c| self.to_spectral(&v[c]))
    }

    /// `w_hat <- w_hat - k (k . w_hat) / |k|^2`; the mean mode is untouched.
    pub fn leray(&self, v: &mut Vector<C64>) {
        for idx in 0..self.len() {
            let k2 = self.k2(idx);
            if k2 == 0.0 {
                continue;
            }
            let k = self.wavevector(idx);
            let dot = v[0][idx] * k[0] + v[1][idx] * k[1] + v[2][idx] * k[2];
            for c in 0..3 {
                v[c][idx] -= dot * (k[c] / k2);
            }
        }
    }

    pub fn dealias(&self, v: &mut Vector<C64>) {
        for idx in 0..self.len() {
            if !self.keep(idx) {
                for c in v.iter_mut() {
                    c[idx] = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// `sum |w|^p h^3` to the power `1/p` from nodal values.
    pub fn lp_norm(&self, phys: &Vector<f64>, p: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() {
            let m = (phys[0][i] * phys[0][i] + phys[1][i] * phys[1][i] + phys[2][i] * phys[2][i]).sqrt();
            s += m.powf(p);
        }
        (s * self.cell()).powf(1.0 / p)
    }

    pub fn sup_norm(&self, phys: &Vector<f64>) -> f64 {
        (0..self.len())
            .map(|i| (phys[0][i] * phys[0][i] + phys[1][i] * phys[1][i] + phys[2][i] * phys[2][i]).sqrt())
            .fold(0.0, f64::max)
    }

    /// `||w||_2^2` from coefficients (Parseval).
    pub fn energy2(&self, v: &Vector<C64>) -> f64 {
        let s: f64 = v.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        s * self.cell() / self.len() as f64
    }

    /// `||grad w||_2^2` from coefficients.
    pub fn dissipation(&self, v: &Vector<C64>) -> f64 {
        let mut s = 0.0;
        for idx in 0..self.len() {
            let k2 = self.k2(idx);
            s += k2 * (v[0][idx].norm_sqr() + v[1][idx].norm_sqr() + v[2][idx].norm_sqr());
        }
        s * self.cell() / self.len() as f64
    }

    /// Nodal values of `d w_c / d x_j` for all `c, j` (row-major `3c + j`).
    pub fn gradient(&self, v: &Vector<C64>) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(9);
        for c in 0..3 {
            for j in 0..3 {
                let d: Vec<C64> = (0..self.len()).map(|idx| v[c][idx] * C64::new(0.0, self.wavevector(idx)[j])).collect();
                out.push(self.to_physical(&d));
            }
        }
        out
    }

    /// Max nodal divergence `|div w|`.
    pub fn max_divergence(&self, v: &Vector<C64>) -> f64 {
        let d: Vec<C64> = (0..self.len())
            .map(|idx| {
                let k = self.wavevector(idx);
                (v[0][idx] * k[0] + v[1][idx] * k[1] + v[2][idx] * k[2]) * C64::new(0.0, 1.0)
            })
            .collect();
        self.to_physical(&d).iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Max `|w_hat(-k) - conj(w_hat(k))|` relative to the largest coefficient.
    pub fn reality_defect(&self, v: &Vector<C64>) -> f64 {
        let mut big: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for c in v {
            for idx in 0..self.len() {
                big = big.max(c[idx].norm());
                worst = worst.max((c[self.mirror(idx)] - c[idx].conj()).norm());
            }
        }
        if big == 0.0 {
            0.0
        } else {
            worst / big
        }
    }

    /// `-P div(S)` with `S_ij = sum a_i b_j` over the given pairs of nodal
    /// fields, optionally truncated by the two-thirds rule.
    pub fn flux(&self, pairs: &[(&Vector<f64>, &Vector<f64>)], dealias: bool) -> Vector<C64> {
        let len = self.len();
        let mut out: Vector<C64> = [vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len]];
        if pairs.is_empty() {
            return out;
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut s = vec![0.0; len];
                for (a, b) in pairs {
                    for (p, v) in s.iter_mut().enumerate() {
                        *v += a[i][p] * b[j][p];
                    }
                }
                let sh = self.to_spectral(&s);
                for idx in 0..len {
                    let kj = self.wavevector(idx)[j];
                    out[i][idx] -= sh[idx] * C64::new(0.0, kj);
                }
            }
        }
        self.leray(&mut out);
        if dealias {
            self.dealias(&mut out);
        }
        out
    }

    /// Multiply every coefficient by `exp(-|k|^2 t)`.
    pub fn heat(&self, v: &mut Vector<C64>, t: f64) {
        for idx in 0..self.len() {
            let f = (-self.k2(idx) * t).exp();
            for c in v.iter_mut() {
                c[idx] *= f;
            }
        }
    }
}

pub fn zeros(len: usize) -> Vector<C64> {
    [vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len]]
}

pub fn axpy(y: &mut Vector<C64>, a: f64, x: &Vector<C64>) {
    for c in 0..3 {
        for (yi, xi) in y[c].iter_mut().zip(&x[c]) {
            *yi += xi * a;
        }
    }
}
