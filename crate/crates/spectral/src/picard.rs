//! Picard iteration for the linearized system, the discrete Duhamel map and a
//! generic fixed point solver for `x = a + N(x, x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::background::Background;
use crate::error::{SimError, SimResult};
use crate::grid::{axpy, zeros, Grid, Vector, C64};
use crate::sim::Operator;
use crate::state::{InitSpec, SpectralState};

/// Default cap on the bytes held by stored trajectories.
pub const TRAJECTORY_BUDGET: usize = 1 << 30;

/// Spectral slices at `t = n dt`, `n = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub slices: Vec<Vector<C64>>,
}

impl Trajectory {
    pub fn zero(grid: &Grid, dt: f64, steps: usize) -> Self {
        Self { dt, slices: vec![zeros(grid.len()); steps + 1] }
    }

    /// The same field at every time.
    pub fn constant(w: &Vector<C64>, dt: f64, steps: usize) -> Self {
        Self { dt, slices: vec![w.clone(); steps + 1] }
    }

    pub fn steps(&self) -> usize {
        self.slices.len() - 1
    }

    /// `sup_n ||w(t_n)||_3`.
    pub fn sup_l3(&self, grid: &Grid) -> f64 {
        self.slices.iter().map(|w| grid.lp_norm(&grid.vector_to_physical(w), 3.0)).fold(0.0, f64::max)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| {
                let mut c = a.clone();
                axpy(&mut c, s, b);
                c
            })
            .collect();
        Self { dt: self.dt, slices }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let slices = self.slices.iter().map(|w| w.clone().map(|c| c.into_iter().map(|z| z * s).collect())).collect();
        Self { dt: self.dt, slices }
    }
}

/// Bytes needed to hold `count` trajectories of `steps + 1` slices.
pub fn trajectory_bytes(grid: &Grid, steps: usize, count: usize) -> usize {
    count * (steps + 1) * 3 * grid.len() * std::mem::size_of::<C64>()
}

fn check_budget(grid: &Grid, steps: usize, count: usize, cap: usize) -> SimResult<()> {
    let bytes = trajectory_bytes(grid, steps, count);
    if bytes > cap {
        return Err(SimError::MemoryBudget { bytes, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub dt: f64,
    pub steps: usize,
    pub iterations: usize,
    pub memory_cap: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { dt: 0.02, steps: 50, iterations: 8, memory_cap: TRAJECTORY_BUDGET }
    }
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    /// `D(a_k, a_{k-1})` for `k = 1..=K`.
    pub differences: Vec<f64>,
    /// `D(a_{k+1}, a_k) / D(a_k, a_{k-1})`; 0 when the denominator vanishes.
    pub ratios: Vec<f64>,
    /// `sup_t ||a_k||_3` for `k = 1..=K`.
    pub norms: Vec<f64>,
    pub last: Trajectory,
}

impl PicardReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Iterates `a_k` of the forced heat system driven by the coupling terms of
/// `a_{k-1}`, with `a_0 = 0`. Each iterate is integrated by the exponential
/// trapezoid rule, so `a_1` is the exact discrete heat flow of `w0`.
pub fn picard_linear(grid: &Grid, w0: &SpectralState, background: &Background, config: &PicardConfig) -> SimResult<PicardReport> {
    if !(config.dt > 0.0) || config.steps == 0 || config.iterations == 0 {
        return Err(SimError::Config(format!("picard needs dt > 0, steps >= 1, iterations >= 1: {config:?}")));
    }
    let limit = 0.5 * grid.h() / background.report.sup_norm.max(f64::MIN_POSITIVE);
    if config.dt > limit {
        return Err(SimError::CflViolation { dt: config.dt, limit });
    }
    check_budget(grid, config.steps, 3, config.memory_cap)?;
    let op = Operator { grid, background, nonlinear: false, dealias: true };
    let dt = config.dt;
    let mut prev = Trajectory::zero(grid, dt, config.steps);
    let mut prev_force: Vec<Vector<C64>> = vec![zeros(grid.len()); config.steps + 1];
    let mut rep = PicardReport { differences: vec![], ratios: vec![], norms: vec![], last: prev.clone() };
    let mut above = 0;
    for k in 1..=config.iterations {
        let mut slices = Vec::with_capacity(config.steps + 1);
        slices.push(w0.w.clone());
        for n in 0..config.steps {
            let mut next = slices[n].clone();
            axpy(&mut next, 0.5 * dt, &prev_force[n]);
            grid.heat(&mut next, dt);
            axpy(&mut next, 0.5 * dt, &prev_force[n + 1]);
            grid.leray(&mut next);
            grid.dealias(&mut next);
            slices.push(next);
        }
        let cur = Trajectory { dt, slices };
        let d = cur.axpy(-1.0, &prev).sup_l3(grid);
        if let Some(&last) = rep.differences.last() {
            let ratio = if last > 0.0 { d / last } else { 0.0 };
            if !ratio.is_finite() {
                return Err(SimError::NaN { t: config.steps as f64 * dt, context: format!("picard iterate {k}") });
            }
            rep.ratios.push(ratio);
            above = if ratio > 1.0 { above + 1 } else { 0 };
            if above >= 3 {
                return Err(SimError::Divergence { k });
            }
        }
        rep.differences.push(d);
        rep.norms.push(cur.sup_l3(grid));
        prev_force = if background.is_zero() {
            vec![zeros(grid.len()); config.steps + 1]
        } else {
            cur.slices.iter().map(|w| op.rhs(w)).collect()
        };
        prev = cur;
    }
    rep.last = prev;
    Ok(rep)
}

/// Discrete `N(u, v)(t_n) = -sum_j w_j dt L^{n-j} P div(u(t_j) (x) v(t_j))`
/// with trapezoid weights `w_j` and `L` one step of the linearized evolution
/// around `background` (the heat flow when it vanishes).
pub fn duhamel_rhs(grid: &Grid, background: &Background, u: &Trajectory, v: &Trajectory, memory_cap: usize) -> SimResult<Trajectory> {
    if u.slices.len() != v.slices.len() || u.dt != v.dt || u.slices.is_empty() {
        return Err(SimError::Config("duhamel_rhs needs two trajectories on the same time grid".into()));
    }
    let steps = u.steps();
    check_budget(grid, steps, 4, memory_cap)?;
    let dt = u.dt;
    let force = |n: usize| {
        let pu = grid.vector_to_physical(&u.slices[n]);
        let pv = grid.vector_to_physical(&v.slices[n]);
        grid.flux(&[(&pu, &pv)], true)
    };
    let op = Operator { grid, background, nonlinear: false, dealias: true };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(zeros(grid.len()));
    let mut f_prev = force(0);
    for n in 0..steps {
        let mut z = out[n].clone();
        axpy(&mut z, 0.5 * dt, &f_prev);
        let mut z = if background.is_zero() {
            grid.heat(&mut z, dt);
            z
        } else {
            op.step(&z, dt)
        };
        let f_next = force(n + 1);
        axpy(&mut z, 0.5 * dt, &f_next);
        grid.leray(&mut z);
        grid.dealias(&mut z);
        out.push(z);
        f_prev = f_next;
    }
    Ok(Trajectory { dt, slices: out })
}

/// A bilinear map on a normed space, as used by [`bilinear_fixed_point`].
pub trait Bilinear {
    type Elem: Clone;

    fn apply(&self, u: &Self::Elem, v: &Self::Elem) -> SimResult<Self::Elem>;
    fn norm(&self, x: &Self::Elem) -> f64;
    /// `a + s * b`.
    fn axpy(&self, a: &Self::Elem, s: f64, b: &Self::Elem) -> Self::Elem;
    /// A random element of unit norm.
    fn random_unit(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Unit pairs sampled to estimate `||N||`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 200, samples: 16, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPoint<E> {
    pub x: E,
    pub iterations: usize,
    /// `||x_{k+1} - x_k||` per iteration.
    pub differences: Vec<f64>,
    pub norm_estimate: f64,
    /// `4 ||N|| ||a||`.
    pub smallness: f64,
}

/// Solve `x = a + N(x, x)` by iteration from `x_0 = a`.
pub fn bilinear_fixed_point<B: Bilinear>(a: &B::Elem, map: &B, opts: &FixedPointOptions) -> SimResult<FixedPoint<B::Elem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut norm_estimate: f64 = 0.0;
    for _ in 0..opts.samples {
        let u = map.random_unit(&mut rng);
        let v = map.random_unit(&mut rng);
        norm_estimate = norm_estimate.max(map.norm(&map.apply(&u, &v)?));
    }
    let a_norm = map.norm(a);
    let smallness = 4.0 * norm_estimate * a_norm;
    if !(smallness < 1.0) {
        return Err(SimError::SmallnessViolated { estimate: smallness });
    }
    let mut x = a.clone();
    let mut differences = Vec::new();
    for k in 1..=opts.max_iter {
        let nx = map.apply(&x, &x)?;
        let next = map.axpy(a, 1.0, &nx);
        let d = map.norm(&map.axpy(&next, -1.0, &x));
        if !d.is_finite() {
            return Err(SimError::NaN { t: 0.0, context: format!("fixed point iterate {k}") });
        }
        differences.push(d);
        x = next;
        if d < opts.tol {
            let xn = map.norm(&x);
            if xn > 2.0 * a_norm * (1.0 + 1e-12) {
                return Err(SimError::NoConverge(format!("limit norm {xn} leaves the ball of radius {}", 2.0 * a_norm)));
            }
            return Ok(FixedPoint { x, iterations: k, differences, norm_estimate, smallness });
        }
    }
    Err(SimError::NoConverge(format!("no fixed point after {} iterations, last difference {:?}", opts.max_iter, differences.last())))
}

/// `N(x, y) = x y` on the reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarProduct;

impl Bilinear for ScalarProduct {
    type Elem = f64;

    fn apply(&self, u: &f64, v: &f64) -> SimResult<f64> {
        Ok(u * v)
    }

    fn norm(&self, x: &f64) -> f64 {
        x.abs()
    }

    fn axpy(&self, a: &f64, s: f64, b: &f64) -> f64 {
        a + s * b
    }

    fn random_unit(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    }
}

/// The discrete Duhamel map on trajectories, normed by `sup_t ||.||_3`.
pub struct DuhamelMap<'a> {
    pub grid: &'a Grid,
    pub background: &'a Background,
    pub dt: f64,
    pub steps: usize,
    pub memory_cap: usize,
}

impl DuhamelMap<'_> {
    /// Linear evolution of `w0`, the free term of the mild formulation.
    pub fn free_term(&self, w0: &SpectralState) -> SimResult<Trajectory> {
        let op = Operator { grid: self.grid, background: self.background, nonlinear: false, dealias: true };
        let mut slices = vec![w0.w.clone()];
        for n in 0..self.steps {
            let next = op.step(&slices[n], self.dt);
            slices.push(next);
        }
        Ok(Trajectory { dt: self.dt, slices })
    }
}

impl Bilinear for DuhamelMap<'_> {
    type Elem = Trajectory;

    fn apply(&self, u: &Trajectory, v: &Trajectory) -> SimResult<Trajectory> {
        duhamel_rhs(self.grid, self.background, u, v, self.memory_cap)
    }

    fn norm(&self, x: &Trajectory) -> f64 {
        x.sup_l3(self.grid)
    }

    fn axpy(&self, a: &Trajectory, s: f64, b: &Trajectory) -> Trajectory {
        a.axpy(s, b)
    }

    fn random_unit(&self, rng: &mut ChaCha8Rng) -> Trajectory {
        let w = InitSpec::Random { seed: rng.gen(), l3_norm: 1.0, k0: 2.0 }.build(self.grid);
        Trajectory::constant(&w.w, self.dt, self.steps)
    }
}

#[cfg(test)]
mod tests {
    use homns_core::HomParams;

    use super::*;
    use crate::background::make_background;

    fn grid() -> Grid {
        Grid::new(16, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn scalar_oracle() {
        let fp = bilinear_fixed_point(&0.1, &ScalarProduct, &FixedPointOptions::default()).unwrap();
        let root = (1.0 - 0.6f64.sqrt()) / 2.0;
        assert!((fp.x - root).abs() < 1e-12, "{}", fp.x);
        assert!(fp.x.abs() <= 0.2);
        assert!((fp.smallness - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_map_returns_free_term() {
        struct Zero;
        impl Bilinear for Zero {
            type Elem = f64;
            fn apply(&self, _: &f64, _: &f64) -> SimResult<f64> {
                Ok(0.0)
            }
            fn norm(&self, x: &f64) -> f64 {
                x.abs()
            }
            fn axpy(&self, a: &f64, s: f64, b: &f64) -> f64 {
                a + s * b
            }
            fn random_unit(&self, _: &mut ChaCha8Rng) -> f64 {
                1.0
            }
        }
        let fp = bilinear_fixed_point(&3.0, &Zero, &FixedPointOptions::default()).unwrap();
        assert_eq!((fp.x, fp.iterations), (3.0, 1));
    }

    #[test]
    fn smallness_is_enforced() {
        assert!(matches!(
            bilinear_fixed_point(&0.3, &ScalarProduct, &FixedPointOptions::default()),
            Err(SimError::SmallnessViolated { .. })
        ));
    }

    #[test]
    fn duhamel_is_bilinear_and_quadratic() {
        let g = grid();
        let bg = Background::zero(&g);
        let u = Trajectory::constant(&InitSpec::Random { seed: 1, l3_norm: 0.3, k0: 2.0 }.build(&g).w, 0.05, 6);
        let v = Trajectory::constant(&InitSpec::Random { seed: 2, l3_norm: 0.3, k0: 2.0 }.build(&g).w, 0.05, 6);
        let base = duhamel_rhs(&g, &bg, &u, &v, TRAJECTORY_BUDGET).unwrap();
        let scaled = duhamel_rhs(&g, &bg, &u.scaled(2.5), &v, TRAJECTORY_BUDGET).unwrap();
        let d = scaled.axpy(-2.5, &base).sup_l3(&g);
        assert!(d < 1e-13 * base.sup_l3(&g).max(1.0), "{d}");
        let n1 = duhamel_rhs(&g, &bg, &u.scaled(0.01), &u.scaled(0.01), TRAJECTORY_BUDGET).unwrap().sup_l3(&g);
        let n2 = duhamel_rhs(&g, &bg, &u.scaled(0.02), &u.scaled(0.02), TRAJECTORY_BUDGET).unwrap().sup_l3(&g);
        assert!((n2 / n1 - 4.0).abs() < 1e-10);
        let z = Trajectory::zero(&g, 0.05, 6);
        assert_eq!(duhamel_rhs(&g, &bg, &z, &z, TRAJECTORY_BUDGET).unwrap(), z);
        assert!(matches!(duhamel_rhs(&g, &bg, &u, &v, 1000), Err(SimError::MemoryBudget { .. })));
    }

    #[test]
    fn picard_without_background_is_heat_flow() {
        let g = grid();
        let bg = Background::zero(&g);
        let w0 = InitSpec::Random { seed: 3, l3_norm: 0.2, k0: 2.0 }.build(&g);
        let cfg = PicardConfig { steps: 10, iterations: 4, ..PicardConfig::default() };
        let rep = picard_linear(&g, &w0, &bg, &cfg).unwrap();
        assert!(rep.ratios.iter().all(|&r| r == 0.0));
        let mut heat = w0.w.clone();
        g.heat(&mut heat, 10.0 * cfg.dt);
        let diff = Trajectory::constant(&heat, cfg.dt, 0).axpy(-1.0, &Trajectory::constant(rep.last.slices.last().unwrap(), cfg.dt, 0));
        assert!(diff.sup_l3(&g) < 1e-14);
    }

    #[test]
    fn picard_contracts_and_tracks_background_size() {
        let g = grid();
        let w0 = InitSpec::Random { seed: 4, l3_norm: 0.2, k0: 2.0 }.build(&g);
        let cfg = PicardConfig { steps: 25, iterations: 5, ..PicardConfig::default() };
        let first: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&c3| {
                let bg = make_background(&HomParams::new(0.0, 0.0, c3, 0.1), 1.0, 2.5, &g).unwrap();
                let rep = picard_linear(&g, &w0, &bg, &cfg).unwrap();
                assert!(rep.max_ratio() < 1.0, "{c3}: {:?}", rep.ratios);
                rep.ratios[0]
            })
            .collect();
        assert!(first[0] < first[1] && first[1] < first[2], "{first:?}");
    }

    #[test]
    fn duhamel_fixed_point_converges_geometrically() {
        let g = grid();
        let bg = Background::zero(&g);
        let map = DuhamelMap { grid: &g, background: &bg, dt: 0.05, steps: 10, memory_cap: TRAJECTORY_BUDGET };
        let w0 = InitSpec::Random { seed: 5, l3_norm: 0.05, k0: 2.0 }.build(&g);
        let a = map.free_term(&w0).unwrap();
        let fp = bilinear_fixed_point(&a, &map, &FixedPointOptions { tol: 1e-12, samples: 4, ..FixedPointOptions::default() }).unwrap();
        let d = &fp.differences;
        assert!(d.len() >= 3);
        for w in d.windows(2).take(4) {
            assert!(w[1] < 0.5 * w[0], "{d:?}");
        }
        assert!(map.norm(&fp.x) <= 2.0 * map.norm(&a));
    }
}
