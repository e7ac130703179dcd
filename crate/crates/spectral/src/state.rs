//! Spectral state and the binary checkpoint format.
//!
//! Checkpoint layout, all little-endian: `u64 N`, `f64 L`, `f64 t`, then for
//! each component `x, y, z` the `N^3` coefficients in row-major `k`-order, each
//! stored as `f64 re, f64 im`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::grid::{Grid, Vector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub w: Vector<C64>,
}

impl SpectralState {
    pub fn zero(grid: &Grid) -> Self {
        Self { t: 0.0, w: crate::grid::zeros(grid.len()) }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { t: self.t, w: self.w.clone().map(|c| c.into_iter().map(|z| z * a).collect()) }
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn write_checkpoint<W: Write>(&self, grid: &Grid, mut out: W) -> SimResult<()> {
        out.write_all(&(grid.n as u64).to_le_bytes())?;
        out.write_all(&grid.l.to_le_bytes())?;
        out.write_all(&self.t.to_le_bytes())?;
        let mut buf = Vec::with_capacity(3 * grid.len() * 16);
        for c in &self.w {
            for z in c {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Returns the grid described by the header together with the state.
    pub fn read_checkpoint<R: Read>(mut input: R) -> SimResult<(Grid, Self)> {
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        input.read_exact(&mut b8)?;
        let t = f64::from_le_bytes(b8);
        if n > 1024 {
            return Err(SimError::Checkpoint(format!("implausible grid size {n}")));
        }
        let grid = Grid::new(n, l)?;
        let mut bytes = vec![0u8; 3 * grid.len() * 16];
        input.read_exact(&mut bytes).map_err(|e| SimError::Checkpoint(format!("truncated coefficient block: {e}")))?;
        let mut it = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut w = crate::grid::zeros(grid.len());
        for c in w.iter_mut() {
            for z in c.iter_mut() {
                *z = C64::new(it.next().unwrap(), it.next().unwrap());
            }
        }
        Ok((grid, Self { t, w }))
    }
}

/// Initial perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Zero,
    /// Divergence-free random field, spectrum `|k|^2 exp(-|k|^2/k0^2)`, rescaled to `||w0||_3 = l3_norm`.
    Random { seed: u64, l3_norm: f64, k0: f64 },
    /// `amplitude * (sin(m y), 0, 0)`.
    SingleMode { amplitude: f64, m: i64 },
    /// Taylor-Green vortex `A (sin x cos y cos z, -cos x sin y cos z, 0)`.
    TaylorGreen { amplitude: f64 },
}

impl InitSpec {
    pub fn build(&self, grid: &Grid) -> SpectralState {
        let len = grid.len();
        let mut w = crate::grid::zeros(len);
        match *self {
            InitSpec::Zero => {}
            InitSpec::Random { seed, l3_norm, k0 } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for c in w.iter_mut() {
                    for (idx, z) in c.iter_mut().enumerate() {
                        let k2 = grid.k2(idx);
                        // per-mode variance exp(-k^2/k0^2); shell mode counts supply the k^2
                        let amp = (-(k2) / (2.0 * k0 * k0)).exp();
                        *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
                    }
                }
                // project onto real fields, then onto the constrained band
                let phys = grid.vector_to_physical(&w);
                w = grid.vector_to_spectral(&phys);
                for c in w.iter_mut() {
                    c[0] = C64::new(0.0, 0.0);
                }
                grid.leray(&mut w);
                grid.dealias(&mut w);
                let n3 = grid.lp_norm(&grid.vector_to_physical(&w), 3.0);
                if n3 > 0.0 {
                    let s = l3_norm / n3;
                    w = w.map(|c| c.into_iter().map(|z| z * s).collect());
                }
            }
            InitSpec::SingleMode { amplitude, m } => {
                let k = std::f64::consts::TAU / grid.l * m as f64;
                let phys: Vector<f64> = [
                    (0..len).map(|i| amplitude * (k * grid.coords(i)[1]).sin()).collect(),
                    vec![0.0; len],
                    vec![0.0; len],
                ];
                w = grid.vector_to_spectral(&phys);
            }
            InitSpec::TaylorGreen { amplitude } => {
                let s = std::f64::consts::TAU / grid.l;
                let f = |i: usize, c: usize| {
                    let [x, y, z] = grid.coords(i).map(|v| v * s);
                    match c {
                        0 => amplitude * x.sin() * y.cos() * z.cos(),
                        1 => -amplitude * x.cos() * y.sin() * z.cos(),
                        _ => 0.0,
                    }
                };
                let phys: Vector<f64> = [0, 1, 2].map(|c| (0..len).map(|i| f(i, c)).collect());
                w = grid.vector_to_spectral(&phys);
            }
        }
        SpectralState { t: 0.0, w }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid::new(8, 3.0).unwrap();
        let mut s = InitSpec::Random { seed: 5, l3_norm: 0.2, k0: 2.0 }.build(&g);
        s.t = 1.25;
        let mut bytes = Vec::new();
        s.write_checkpoint(&g, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 24 + 3 * 512 * 16);
        let (g2, s2) = SpectralState::read_checkpoint(&bytes[..]).unwrap();
        assert_eq!((g2.n, g2.l), (8, 3.0));
        assert_eq!(s2, s);
        assert!(SpectralState::read_checkpoint(&bytes[..100]).is_err());
    }

    #[test]
    fn random_init_is_admissible() {
        let g = Grid::new(16, std::f64::consts::TAU).unwrap();
        let s = InitSpec::Random { seed: 9, l3_norm: 0.3, k0: 2.0 }.build(&g);
        assert!(g.max_divergence(&s.w) < 1e-12);
        assert!(g.reality_defect(&s.w) < 1e-12);
        let n3 = g.lp_norm(&g.vector_to_physical(&s.w), 3.0);
        assert!((n3 - 0.3).abs() < 1e-12);
        assert!((0..g.len()).all(|i| g.keep(i) || s.w.iter().all(|c| c[i].norm() == 0.0)));
    }
}
