//! Anisotropic weighted inequalities: admissibility of the CKN exponents,
//! empirical constants on bump families, power-weight `A_q` membership, and
//! the log-Sobolev / Lyapunov checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{graded_nodes, Rule};

/// Absolute tolerance of the equality clauses.
pub const EQ_TOL: f64 = 1e-12;

/// Exponents of `|| |x'|^a1 |x|^b1 u ||_{s1} <= C || |x'|^a2 |x|^b2 grad u ||_{s2}^theta
/// || |x'|^a3 |x|^b3 u ||_{s3}^{1-theta}` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknSpec {
    pub n: usize,
    pub theta: f64,
    pub s: [f64; 3],
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

impl CknSpec {
    pub fn new(n: usize, theta: f64, s: [f64; 3], alpha: [f64; 3], beta: [f64; 3]) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension {n} < 2")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta {theta} outside [0, 1]")));
        }
        if !(s[0] > 0.0 && s[2] > 0.0 && s[1] >= 1.0) {
            return Err(Error::Domain(format!("need s1, s3 > 0 and s2 >= 1, got {s:?}")));
        }
        if alpha.iter().chain(beta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite exponent".into()));
        }
        Ok(Self { n, theta, s, alpha, beta })
    }

    /// `L^2` Hardy-type family `|| |x'|^{-a} |x|^{a-1} u ||_2 <= C || grad u ||_2` in `R^3`.
    pub fn hardy_family(a: f64) -> Result<Self> {
        Self::new(3, 1.0, [2.0; 3], [-a, 0.0, 0.0], [a - 1.0, 0.0, 0.0])
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `1/s_i + (a_i + b_i)/n`, with the gradient shift on slot 2.
    fn scaling(&self, i: usize) -> f64 {
        let shift = if i == 1 { 1.0 } else { 0.0 };
        1.0 / self.s[i] + (self.alpha[i] + self.beta[i] - shift) / self.nf()
    }

    /// `1/s_i + a_i/(n-1)`, with the gradient shift on slot 2.
    fn axis_scaling(&self, i: usize) -> f64 {
        let shift = if i == 1 { 1.0 } else { 0.0 };
        1.0 / self.s[i] + (self.alpha[i] - shift) / (self.nf() - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Local integrability of each weighted slot.
    pub measure: [bool; 3],
    /// Scaling balance.
    pub balance: bool,
    pub beta_order: bool,
    pub total_order: bool,
    pub axis_order: bool,
    /// `1/s1 <= theta/s2 + (1-theta)/s3` in the borderline cases.
    pub exponent_order: bool,
    pub overall: bool,
}

impl ConditionReport {
    pub fn measure_ok(&self) -> bool {
        self.measure.iter().all(|&b| b)
    }

    /// Names of failing conditions.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.measure_ok() {
            v.push("measure");
        }
        for (ok, name) in [
            (self.balance, "balance"),
            (self.beta_order, "beta_order"),
            (self.total_order, "total_order"),
            (self.axis_order, "axis_order"),
            (self.exponent_order, "exponent_order"),
        ] {
            if !ok {
                v.push(name);
            }
        }
        v
    }
}

fn measure_slot(spec: &CknSpec, i: usize) -> bool {
    let (s, a, b) = (spec.s[i], spec.alpha[i], spec.beta[i]);
    let axis = 1.0 / s + a / (spec.nf() - 1.0) > 0.0;
    axis && (b >= 0.0 || 1.0 / s + (a + b) / spec.nf() > 0.0)
}

pub fn ckn_conditions(spec: &CknSpec) -> ConditionReport {
    let t = spec.theta;
    let mix = |f: &dyn Fn(usize) -> f64| t * f(1) + (1.0 - t) * f(2);
    let measure = [0, 1, 2].map(|i| measure_slot(spec, i));
    let balance = (spec.scaling(0) - mix(&|i| spec.scaling(i))).abs() <= EQ_TOL;
    let beta_order = spec.beta[0] <= mix(&|i| spec.beta[i]);
    let total_order = spec.alpha[0] + spec.beta[0] <= mix(&|i| spec.alpha[i] + spec.beta[i]);
    let axis_gap = spec.axis_scaling(0) - mix(&|i| spec.axis_scaling(i));
    let axis_order = axis_gap >= -EQ_TOL;
    let chain = (spec.scaling(0) - spec.scaling(1)).abs() <= EQ_TOL && (spec.scaling(1) - spec.scaling(2)).abs() <= EQ_TOL;
    let borderline = chain || t == 0.0 || t == 1.0 || axis_gap.abs() <= EQ_TOL;
    let exponent_order = !borderline || 1.0 / spec.s[0] <= t / spec.s[1] + (1.0 - t) / spec.s[2] + EQ_TOL;
    let overall = measure.iter().all(|&b| b) && balance && beta_order && total_order && axis_order && exponent_order;
    ConditionReport { measure, balance, beta_order, total_order, axis_order, exponent_order, overall }
}

/// Surface area of the unit sphere `S^k`.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => std::f64::consts::TAU,
        _ => std::f64::consts::TAU / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Axisymmetric compactly supported bump `exp(-d^2/2) (1 - d^2/R^2)^4` with
/// `d^2 = e_rho^2 + e_z^2`, `e_rho = (rho^2 - rho0^2)/(s_rho (2 rho0 + s_rho))`
/// smooth in `x'`, and `e_z = (z - z0)/s_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub rho0: f64,
    pub s_rho: f64,
    pub z0: f64,
    pub s_z: f64,
}

const BUMP_R: f64 = 3.0;

impl Bump {
    /// `u(lambda x)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self { rho0: self.rho0 / lambda, s_rho: self.s_rho / lambda, z0: self.z0 / lambda, s_z: self.s_z / lambda }
    }

    fn k(&self) -> f64 {
        self.s_rho * (2.0 * self.rho0 + self.s_rho)
    }

    /// Value and `(d/drho, d/dz)`.
    pub fn eval(&self, rho: f64, z: f64) -> (f64, f64, f64) {
        let k = self.k();
        let er = (rho * rho - self.rho0 * self.rho0) / k;
        let ez = (z - self.z0) / self.s_z;
        let d2 = er * er + ez * ez;
        let r2 = BUMP_R * BUMP_R;
        if d2 >= r2 {
            return (0.0, 0.0, 0.0);
        }
        let c = 1.0 - d2 / r2;
        let g = (-0.5 * d2).exp();
        let u = g * c.powi(4);
        // du/d(d2)
        let du = g * c.powi(3) * (-0.5 * c - 4.0 / r2);
        (u, du * 2.0 * er * 2.0 * rho / k, du * 2.0 * ez / self.s_z)
    }

    fn rho_support(&self) -> (f64, f64) {
        let k = self.k();
        let lo = self.rho0 * self.rho0 - BUMP_R * k;
        ((lo.max(0.0)).sqrt(), (self.rho0 * self.rho0 + BUMP_R * k).sqrt())
    }
}

/// Random bumps over four decades of scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BumpSampler {
    pub seed: u64,
}

impl BumpSampler {
    pub fn sample(&self, count: usize) -> Vec<Bump> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
                let s_rho = scale * 10f64.powf(rng.gen_range(-0.5..0.5));
                let s_z = scale * 10f64.powf(rng.gen_range(-0.5..0.5));
                let rho0 = if rng.gen_bool(0.5) { 0.0 } else { s_rho * rng.gen_range(0.0..3.0) };
                Bump { rho0, s_rho, z0: s_z * rng.gen_range(-4.0..4.0), s_z }
            })
            .collect()
    }
}

fn axis_nodes(rule: &Rule, lo: f64, hi: f64, graded: bool) -> Vec<(f64, f64)> {
    if graded {
        graded_nodes(rule, lo, hi, 28, 1.45)
    } else {
        graded_nodes(rule, lo, hi, 16, 1.0)
    }
}

/// Weighted `L^{s_i}` norms of `u` (slots 1, 3) and `|grad u|` (slot 2).
pub fn ckn_norms(spec: &CknSpec, bump: &Bump) -> [f64; 3] {
    let rule = Rule::new(10);
    let (rlo, rhi) = bump.rho_support();
    let on_axis = rlo == 0.0;
    let rho_nodes = axis_nodes(&rule, rlo, rhi, on_axis);
    let (zlo, zhi) = (bump.z0 - BUMP_R * bump.s_z, bump.z0 + BUMP_R * bump.s_z);
    let z_nodes: Vec<(f64, f64)> = if on_axis && zlo < 0.0 && zhi > 0.0 {
        let mut v: Vec<(f64, f64)> = axis_nodes(&rule, 0.0, -zlo, true).into_iter().map(|(z, w)| (-z, w)).collect();
        v.extend(axis_nodes(&rule, 0.0, zhi, true));
        v
    } else {
        axis_nodes(&rule, zlo, zhi, false)
    };
    let nm2 = spec.n as f64 - 2.0;
    let mut acc = [0.0; 3];
    for &(rho, wr) in &rho_nodes {
        let jac = wr * rho.powf(nm2);
        for &(z, wz) in &z_nodes {
            let (u, ur, uz) = bump.eval(rho, z);
            if u == 0.0 && ur == 0.0 && uz == 0.0 {
                continue;
            }
            let r = rho.hypot(z);
            let g = ur.hypot(uz);
            for i in 0..3 {
                let v = if i == 1 { g } else { u.abs() };
                if v == 0.0 {
                    continue;
                }
                let weighted = rho.powf(spec.alpha[i]) * r.powf(spec.beta[i]) * v;
                acc[i] += jac * wz * weighted.powf(spec.s[i]);
            }
        }
    }
    let area = sphere_area(spec.n - 2);
    [0, 1, 2].map(|i| (area * acc[i]).powf(1.0 / spec.s[i]))
}

/// `LHS / RHS` of the inequality for one bump.
pub fn ckn_ratio(spec: &CknSpec, bump: &Bump) -> f64 {
    let [a, b, c] = ckn_norms(spec, bump);
    let t = spec.theta;
    let rhs = if t == 1.0 {
        b
    } else if t == 0.0 {
        c
    } else {
        b.powf(t) * c.powf(1.0 - t)
    };
    a / rhs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    /// Observed maximum; a lower bound for the best constant.
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    /// Max relative change of the ratio under `u(x) -> u(lambda x)`, `lambda in {1/2, 2}`.
    pub dilation_defect: f64,
}

pub fn ckn_empirical(spec: &CknSpec, sampler: &BumpSampler, samples: usize) -> Result<EmpiricalReport> {
    let rep = ckn_conditions(spec);
    if !rep.overall {
        return Err(Error::ConditionsFail(rep.failures().join(", ")));
    }
    let mut ratios = Vec::with_capacity(samples);
    let mut defect: f64 = 0.0;
    for b in sampler.sample(samples) {
        let r = ckn_ratio(spec, &b);
        for lambda in [0.5, 2.0] {
            let rl = ckn_ratio(spec, &b.dilate(lambda));
            defect = defect.max((rl - r).abs() / r);
        }
        ratios.push(r);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(EmpiricalReport { max_ratio, ratios, dilation_defect: defect })
}

/// Power weight `|x'|^theta1 |x|^theta2` on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub theta1: f64,
    pub theta2: f64,
    pub q: f64,
    pub n: usize,
}

impl WeightSpec {
    pub fn new(theta1: f64, theta2: f64, q: f64, n: usize) -> Self {
        Self { theta1, theta2, q, n }
    }
}

pub fn aq_membership(w: &WeightSpec) -> bool {
    let n = w.n as f64;
    let (t1, t2) = (w.theta1, w.theta2);
    let a = t1 > -(n - 1.0) && t2 >= 0.0;
    let b = t1 > -(n - 1.0) && t2 < 0.0 && t1 + t2 > -n;
    let c = t1 < (n - 1.0) * (w.q - 1.0) && t2 <= 0.0;
    let d = t1 < (n - 1.0) * (w.q - 1.0) && t2 > 0.0 && t1 + t2 < n * (w.q - 1.0);
    (a || b) && (c || d)
}

/// Measure of `{ omega in S^{n-2} : omega . e >= t }`.
fn cap_measure(n: usize, t: f64) -> f64 {
    if n == 2 {
        return (t <= 1.0) as u8 as f64 + (t <= -1.0) as u8 as f64;
    }
    if t <= -1.0 {
        return sphere_area(n - 2);
    }
    if t > 1.0 {
        return 0.0;
    }
    let phi = t.acos();
    if n == 3 {
        return 2.0 * phi;
    }
    let rule = Rule::new(16);
    sphere_area(n - 3) * rule.integrate(0.0, phi, |p| p.sin().powi(n as i32 - 3))
}

/// Ball `B(c, r)` with centre `c = (rho_c e1, z_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub rho_c: f64,
    pub z_c: f64,
    pub r: f64,
}

/// `avg_B w * (avg_B w^{-1/(q-1)})^{q-1}` by cylindrical quadrature with exact
/// angular cap measure, graded toward the point of `B` nearest the axis / origin.
pub fn muckenhoupt_ball_ratio(w: &WeightSpec, ball: &Ball) -> f64 {
    let rule = Rule::new(8);
    let rho_lo = (ball.rho_c - ball.r).max(0.0);
    let rho_hi = ball.rho_c + ball.r;
    let rho_nodes = graded_nodes(&rule, rho_lo, rho_hi, 50, 1.45);
    // z grading toward the closest approach: the origin if the ball reaches near it, else the centre height
    let (zlo, zhi) = (ball.z_c - ball.r, ball.z_c + ball.r);
    let pivot = if ball.rho_c < ball.r && zlo >= 0.0 { zlo } else { ball.z_c.clamp(zlo, zhi) };
    let mut z_nodes: Vec<(f64, f64)> = Vec::new();
    if pivot > zlo {
        z_nodes.extend(graded_nodes(&rule, 0.0, pivot - zlo, 50, 1.45).into_iter().map(|(z, wz)| (pivot - z, wz)));
    }
    if pivot < zhi {
        z_nodes.extend(graded_nodes(&rule, pivot, zhi, 50, 1.45));
    }
    let nm2 = w.n as f64 - 2.0;
    let dual = -1.0 / (w.q - 1.0);
    let (mut vol, mut iw, mut idual) = (0.0, 0.0, 0.0);
    for &(rho, wr) in &rho_nodes {
        let jr = wr * rho.powf(nm2);
        for &(z, wz) in &z_nodes {
            let dz = z - ball.z_c;
            let rest = ball.r * ball.r - dz * dz;
            if rest <= 0.0 {
                continue;
            }
            let m = if ball.rho_c == 0.0 {
                if rho * rho <= rest { sphere_area(w.n - 2) } else { 0.0 }
            } else {
                cap_measure(w.n, (rho * rho + ball.rho_c * ball.rho_c - rest) / (2.0 * rho * ball.rho_c))
            };
            if m == 0.0 {
                continue;
            }
            let dv = jr * wz * m;
            let wt = rho.powf(w.theta1) * rho.hypot(z).powf(w.theta2);
            vol += dv;
            iw += dv * wt;
            idual += dv * wt.powf(dual);
        }
    }
    (iw / vol) * (idual / vol).powf(w.q - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuckenhouptReport {
    pub radii: Vec<f64>,
    /// Max ratio over the sampled balls at each radius.
    pub sup_by_radius: Vec<f64>,
    pub max_ratio: f64,
    /// `max_k sup_k / sup_0`.
    pub growth: f64,
}

impl MuckenhouptReport {
    /// Bounded means less than 2x growth across the radius sweep.
    pub fn bounded(&self) -> bool {
        self.growth < 2.0
    }
}

/// Sweep over radii `1, 0.1, ..., 1e-6`. At radius `r` the balls sit a gap of
/// `~r^2` away from the axis (at height `~1`) or from the origin (centre in the
/// plane `x_n = 0`), so the relative gap shrinks with the radius.
pub fn muckenhoupt_ratio(w: &WeightSpec, seed: u64, balls_per_radius: usize) -> MuckenhouptReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii: Vec<f64> = (0..=6).map(|k| 10f64.powi(-k)).collect();
    let mut sup_by_radius = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut sup: f64 = 0.0;
        for _ in 0..balls_per_radius.max(1) {
            let gap = r * r * rng.gen_range(0.5..1.5);
            let axis = Ball { rho_c: r + gap, z_c: rng.gen_range(1.0..2.0), r };
            let gap0 = r * r * rng.gen_range(0.5..1.5);
            let origin = Ball { rho_c: r + gap0, z_c: 0.0, r };
            sup = sup.max(muckenhoupt_ball_ratio(w, &axis)).max(muckenhoupt_ball_ratio(w, &origin));
        }
        sup_by_radius.push(sup);
    }
    let max_ratio = sup_by_radius.iter().cloned().fold(0.0, f64::max);
    let growth = max_ratio / sup_by_radius[0];
    MuckenhouptReport { radii, sup_by_radius, max_ratio, growth }
}

/// Curated weights in `R^3`: ten members and ten non-members.
pub fn curated_weights() -> Vec<WeightSpec> {
    [
        (0.0, 0.0, 2.0),
        (1.0, 0.0, 3.0),
        (0.5, 0.0, 2.0),
        (-0.5, 0.0, 2.0),
        (-1.0, 0.5, 3.0),
        (0.0, 1.0, 2.0),
        (0.0, -1.0, 2.0),
        (2.0, -1.0, 4.0),
        (0.5, -0.5, 3.0),
        (0.5, 0.5, 2.0),
        (5.0, 0.0, 2.0),
        (6.0, 0.0, 3.0),
        (-2.8, 0.0, 2.0),
        (-3.0, 1.0, 2.0),
        (0.0, -3.8, 2.0),
        (0.0, 3.8, 2.0),
        (0.0, 7.0, 3.0),
        (1.0, -4.5, 2.0),
        (-2.5, 0.5, 2.0),
        (5.0, 0.5, 3.0),
    ]
    .iter()
    .map(|&(a, b, q)| WeightSpec::new(a, b, q, 3))
    .collect()
}

/// Smooth positive test function on `R^3`: a sum of anisotropic Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussMix {
    pub centers: Vec<[f64; 3]>,
    pub scales: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl GaussMix {
    pub fn gaussian(scale: f64) -> Self {
        Self { centers: vec![[0.0; 3]], scales: vec![[scale; 3]], weights: vec![1.0] }
    }

    /// `f(lambda x)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            centers: self.centers.iter().map(|c| c.map(|v| v / lambda)).collect(),
            scales: self.scales.iter().map(|s| s.map(|v| v / lambda)).collect(),
            weights: self.weights.clone(),
        }
    }

    fn eval(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let mut f = 0.0;
        let mut g = [0.0; 3];
        for ((c, s), &w) in self.centers.iter().zip(&self.scales).zip(&self.weights) {
            let e: [f64; 3] = [0, 1, 2].map(|i| (x[i] - c[i]) / s[i]);
            let v = w * (-0.5 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2])).exp();
            f += v;
            for i in 0..3 {
                g[i] -= v * e[i] / s[i];
            }
        }
        (f, g)
    }

    fn bounding_box(&self) -> [(f64, f64); 3] {
        [0, 1, 2].map(|i| {
            let lo = self.centers.iter().zip(&self.scales).map(|(c, s)| c[i] - 9.0 * s[i]).fold(f64::INFINITY, f64::min);
            let hi = self.centers.iter().zip(&self.scales).map(|(c, s)| c[i] + 9.0 * s[i]).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
    }
}

/// `(int f^2 ln(f^2/||f||^2), ||f||_2^2, ||grad f||_2^2)` on a tensor Gauss grid.
pub fn log_sobolev_terms(f: &GaussMix) -> [f64; 3] {
    let rule = Rule::new(10);
    let boxes = f.bounding_box();
    let axes: Vec<Vec<(f64, f64)>> = boxes.iter().map(|&(lo, hi)| graded_nodes(&rule, lo, hi, 12, 1.0)).collect();
    let (mut m, mut d, mut e) = (0.0, 0.0, 0.0);
    for &(x, wx) in &axes[0] {
        for &(y, wy) in &axes[1] {
            for &(z, wz) in &axes[2] {
                let w = wx * wy * wz;
                let (v, g) = f.eval([x, y, z]);
                let v2 = v * v;
                m += w * v2;
                d += w * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                if v2 > 0.0 {
                    e += w * v2 * v2.ln();
                }
            }
        }
    }
    [e - m * m.ln(), m, d]
}

/// `(a^2/pi) ||grad f||^2 - 3(1 + ln a)||f||^2 - int f^2 ln(f^2/||f||^2)`, divided by `||f||^2`.
pub fn log_sobolev_margin(terms: &[f64; 3], a: f64) -> f64 {
    let [e, m, d] = *terms;
    (a * a / std::f64::consts::PI * d - 3.0 * (1.0 + a.ln()) * m - e) / m
}

/// `a` minimizing the margin.
pub fn log_sobolev_optimal_a(terms: &[f64; 3]) -> f64 {
    (1.5 * std::f64::consts::PI * terms[1] / terms[2]).sqrt()
}

/// Minimum normalized margin over `a_grid` and the optimal `a`.
pub fn log_sobolev_check(f: &GaussMix, a_grid: &[f64]) -> f64 {
    let t = log_sobolev_terms(f);
    a_grid
        .iter()
        .chain(std::iter::once(&log_sobolev_optimal_a(&t)))
        .map(|&a| log_sobolev_margin(&t, a))
        .fold(f64::INFINITY, f64::min)
}

/// Isotropic Gaussians across four scale decades followed by random two-term mixtures.
pub fn sample_log_sobolev_functions(count: usize, seed: u64) -> Vec<GaussMix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let iso = count.min(9);
    for k in 0..iso {
        out.push(GaussMix::gaussian(10f64.powf(-2.0 + 4.0 * k as f64 / (iso.max(2) - 1) as f64)));
    }
    while out.len() < count {
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let terms = rng.gen_range(1..=2);
        let mut g = GaussMix { centers: vec![], scales: vec![], weights: vec![] };
        for _ in 0..terms {
            g.centers.push([0, 1, 2].map(|_| scale * rng.gen_range(-2.0..2.0)));
            g.scales.push([0, 1, 2].map(|_| scale * 10f64.powf(rng.gen_range(-0.25..0.25))));
            g.weights.push(rng.gen_range(0.2..1.0));
        }
        out.push(g);
    }
    out
}

/// Best constant of the Hilbert/Riesz transform on `L^p`.
pub fn riesz_constant(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p must exceed 1, got {p}")));
    }
    Ok(1.0 / (std::f64::consts::PI / (2.0 * p)).tan())
}

fn discrete_norm(u: &[f64], w: &[f64], q: f64) -> f64 {
    u.iter().zip(w).map(|(v, w)| w * v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `||u||_{q0}^{1-l} ||u||_{q1}^l - ||u||_q` with `1/q = (1-l)/q0 + l/q1`, for
/// samples `u` with quadrature weights `w`.
pub fn lebesgue_interpolation_check(u: &[f64], w: &[f64], q0: f64, q1: f64, lambda: f64) -> Result<f64> {
    if !(q0 >= 1.0 && q1 >= 1.0 && (0.0..=1.0).contains(&lambda)) {
        return Err(Error::Domain(format!("need q0, q1 >= 1 and lambda in [0,1], got {q0}, {q1}, {lambda}")));
    }
    let q = 1.0 / ((1.0 - lambda) / q0 + lambda / q1);
    let rhs = discrete_norm(u, w, q0).powf(1.0 - lambda) * discrete_norm(u, w, q1).powf(lambda);
    Ok(rhs - discrete_norm(u, w, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_family_conditions() {
        for &a in &[0.0, 0.25, 0.5, 0.75, 0.99] {
            assert!(ckn_conditions(&CknSpec::hardy_family(a).unwrap()).overall, "{a}");
        }
        let r = ckn_conditions(&CknSpec::hardy_family(1.0).unwrap());
        assert!(!r.measure[0] && !r.overall);
        assert_eq!(r.failures(), vec!["measure"]);
    }

    #[test]
    fn identity_interpolation() {
        let s = CknSpec::new(3, 0.0, [2.0, 2.0, 2.0], [0.3, 0.0, 0.3], [0.1, 0.0, 0.1]).unwrap();
        assert!(ckn_conditions(&s).overall);
    }

    #[test]
    fn construction_checks() {
        assert!(CknSpec::new(3, 0.5, [2.0, 0.5, 2.0], [0.0; 3], [0.0; 3]).is_err());
        assert!(CknSpec::new(3, 1.5, [2.0; 3], [0.0; 3], [0.0; 3]).is_err());
        assert!(CknSpec::new(1, 0.5, [2.0; 3], [0.0; 3], [0.0; 3]).is_err());
    }

    #[test]
    fn unbalanced_spec_fails() {
        let s = CknSpec::new(3, 1.0, [2.0; 3], [0.0; 3], [0.0; 3]).unwrap();
        let r = ckn_conditions(&s);
        assert!(!r.balance && !r.overall);
        let err = ckn_empirical(&s, &BumpSampler { seed: 1 }, 2).unwrap_err();
        assert!(matches!(err, Error::ConditionsFail(_)));
    }

    #[test]
    fn bump_gradient_matches_difference() {
        let b = Bump { rho0: 0.7, s_rho: 0.3, z0: -0.2, s_z: 0.5 };
        let (rho, z, h) = (0.8, 0.1, 1e-6);
        let (_, ur, uz) = b.eval(rho, z);
        let fr = (b.eval(rho + h, z).0 - b.eval(rho - h, z).0) / (2.0 * h);
        let fz = (b.eval(rho, z + h).0 - b.eval(rho, z - h).0) / (2.0 * h);
        assert!((ur - fr).abs() < 1e-8 && (uz - fz).abs() < 1e-8);
    }

    #[test]
    fn hardy_constant_and_dilations() {
        let rep = ckn_empirical(&CknSpec::hardy_family(0.0).unwrap(), &BumpSampler { seed: 3 }, 12).unwrap();
        assert!(rep.max_ratio < 2.0 && rep.max_ratio > 0.1, "{rep:?}");
        assert!(rep.dilation_defect < 1e-10);
        let rep = ckn_empirical(&CknSpec::hardy_family(0.5).unwrap(), &BumpSampler { seed: 4 }, 12).unwrap();
        assert!(rep.max_ratio.is_finite() && rep.dilation_defect < 1e-10);
    }

    #[test]
    fn norms_of_a_gaussian_like_bump() {
        // unweighted L^2 norm against an independent product-rule oracle
        let spec = CknSpec::new(3, 0.5, [2.0; 3], [0.0; 3], [0.0; 3]).unwrap();
        let b = Bump { rho0: 0.0, s_rho: 1.0, z0: 0.0, s_z: 1.0 };
        let n = ckn_norms(&spec, &b)[0];
        let rule = Rule::new(20);
        let mut s = 0.0;
        for (rho, wr) in graded_nodes(&rule, 0.0, 1.8, 200, 1.0) {
            for (z, wz) in graded_nodes(&rule, -3.0, 3.0, 200, 1.0) {
                s += wr * wz * rho * b.eval(rho, z).0.powi(2);
            }
        }
        let want = (std::f64::consts::TAU * s).sqrt();
        assert!((n - want).abs() < 1e-6 * want, "{n} {want}");
    }

    #[test]
    fn aq_examples() {
        assert!(aq_membership(&WeightSpec::new(0.0, 0.0, 1.5, 4)));
        assert!(aq_membership(&WeightSpec::new(1.0, 0.0, 3.0, 3)));
        assert!(!aq_membership(&WeightSpec::new(5.0, 0.0, 2.0, 3)));
        let members = curated_weights().iter().filter(|w| aq_membership(w)).count();
        assert_eq!(members, 10);
    }

    #[test]
    fn constant_weight_ratio_is_one() {
        let rep = muckenhoupt_ratio(&WeightSpec::new(0.0, 0.0, 2.0, 3), 1, 2);
        for v in &rep.sup_by_radius {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_volume_quadrature() {
        let ball = Ball { rho_c: 0.4, z_c: 1.0, r: 0.9 };
        let v = muckenhoupt_ball_ratio(&WeightSpec::new(0.0, 2.0, 2.0, 3), &Ball { rho_c: 0.0, z_c: 0.0, r: 1.0 });
        // avg |x|^2 = 3/5, avg |x|^-2 = 3; the ball boundary kinks the integrand
        assert!((v - 1.8).abs() < 1e-4, "{v}");
        assert!(muckenhoupt_ball_ratio(&WeightSpec::new(0.0, 0.0, 2.0, 3), &ball) == 1.0);
    }

    #[test]
    fn aq_member_and_non_member() {
        assert!(muckenhoupt_ratio(&WeightSpec::new(1.0, 0.0, 3.0, 3), 2, 2).bounded());
        assert!(!muckenhoupt_ratio(&WeightSpec::new(5.0, 0.0, 2.0, 3), 2, 2).bounded());
    }

    #[test]
    fn cap_measures() {
        assert!((cap_measure(3, -1.0) - std::f64::consts::TAU).abs() < 1e-15);
        assert!((cap_measure(4, 0.0) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(cap_measure(2, 0.5), 1.0);
    }

    #[test]
    fn gaussian_log_sobolev_is_tight() {
        let f = GaussMix::gaussian(1.0);
        let t = log_sobolev_terms(&f);
        assert!(log_sobolev_margin(&t, log_sobolev_optimal_a(&t)).abs() < 1e-9);
        assert!(log_sobolev_check(&f, &[1.0]) >= -1e-10);
        assert!(log_sobolev_margin(&t, 1.0) > 0.0);
        for &l in &[0.25, 0.5, 2.0, 4.0] {
            let a = 1.0 / l;
            let tl = log_sobolev_terms(&f.dilate(l));
            assert!((log_sobolev_margin(&tl, a) - log_sobolev_margin(&t, 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn riesz_values() {
        assert!((riesz_constant(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((riesz_constant(3.0).unwrap() - 3f64.sqrt()).abs() < 1e-14);
        let v: Vec<f64> = [1.5, 1.1, 1.01, 1.001].iter().map(|&p| riesz_constant(p).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]) && v[3] > 0.0 && v[3] < 0.01);
        assert!(riesz_constant(1.0).is_err());
    }

    #[test]
    fn lyapunov_margins() {
        let u: Vec<f64> = (0..200).map(|i| (-((i as f64 - 100.0) / 20.0).powi(2)).exp()).collect();
        let w = vec![0.01; 200];
        assert!(lebesgue_interpolation_check(&u, &w, 2.0, 6.0, 0.0).unwrap().abs() < 1e-15);
        assert!(lebesgue_interpolation_check(&u, &w, 2.0, 6.0, 0.5).unwrap() >= 0.0);
        let flat = vec![2.0; 50];
        assert!(lebesgue_interpolation_check(&flat, &w[..50], 2.0, 6.0, 0.5).unwrap().abs() < 1e-14);
    }
}
