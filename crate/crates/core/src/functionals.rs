//! Scalar functionals of the stationary field: force coefficient `b`, the
//! cone sup-norm triple `K`, and the elementary log bound on the cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{frobenius, norm, VelocityField};
use crate::interp::ProfileInterpolant;
use crate::profile::{tanh_parts, ThetaProfile};
use crate::quad::Rule;

/// Quadrature for `b`: panels of a fixed Gauss-Legendre rule in `xi = atanh(y)`
/// on `|y| <= 1 - offset`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BQuadrature {
    pub offset: f64,
    pub panel_counts: [usize; 3],
    pub order: usize,
    /// Endpoint values below this count as zero.
    pub endpoint_tol: f64,
}

impl Default for BQuadrature {
    fn default() -> Self {
        Self { offset: 1e-10, panel_counts: [64, 128, 256], order: 8, endpoint_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BReport {
    pub value: f64,
    pub error_estimate: f64,
    /// Raw panel sums for the three panel counts.
    pub estimates: [f64; 3],
}

/// Integrand of `b` after `dy = (1 - y^2) dxi`:
/// `y U'^2 (1-y^2) - (2-y^2) U - y U^2`.
fn b_integrand(it: &ProfileInterpolant, xi: f64) -> f64 {
    let (y, om, op) = tanh_parts(xi);
    let j = it.eval_gap(y, om.min(op));
    let w = om * op;
    y * j.du * j.du * w - (1.0 + w) * j.u - y * j.u * j.u
}

/// Force coefficient `b` of an interior-branch profile.
pub fn compute_b(profile: &ThetaProfile, quad: &BQuadrature) -> Result<BReport> {
    let (m, p) = (profile.endpoint_minus, profile.endpoint_plus);
    if m.abs() > quad.endpoint_tol || p.abs() > quad.endpoint_tol {
        return Err(Error::Diverging { minus: m, plus: p });
    }
    let it = ProfileInterpolant::new(profile)?;
    let rule = Rule::new(quad.order);
    let xc = 0.5 * ((2.0 - quad.offset) / quad.offset).ln();
    let f = |xi: f64| b_integrand(&it, xi);
    let estimates = quad.panel_counts.map(|n| rule.composite(-xc, xc, n, f));
    let [_, q1, q2] = estimates;
    let ratio = (quad.panel_counts[2] as f64 / quad.panel_counts[1] as f64).powi(2 * quad.order as i32);
    let value = q2 + (q2 - q1) / (ratio - 1.0);
    // the integrand decays at least like xi^2 e^{-2 xi}; bound the truncated tails by their edge values
    let tail = f(-xc).abs() + f(xc).abs();
    Ok(BReport { value, error_estimate: (q2 - q1).abs() + tail, estimates })
}

/// Cone `{ |x'| <= rho |x| }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub rho: f64,
}

impl ConeSpec {
    pub fn contains(&self, x: [f64; 3]) -> bool {
        x[0].hypot(x[1]) <= self.rho * norm(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KReport {
    /// sup over the cone `sin(theta) <= 1/e` of `|x'|^{1/2} |x|^{1/2} |u|`.
    pub k_cone: f64,
    /// sup over the complement of `|x| |u|`.
    pub k_outer: f64,
    /// sup over all off-axis points of `|x'| |x| |grad u|`.
    pub k_grad: f64,
}

impl KReport {
    pub fn max(&self) -> f64 {
        self.k_cone.max(self.k_outer).max(self.k_grad)
    }
}

/// The three weighted magnitudes at `(r, theta)` in the `x1 x3` half-plane.
pub fn weighted_magnitudes(field: &VelocityField, r: f64, theta: f64) -> Result<[f64; 3]> {
    let x = [r * theta.sin(), 0.0, r * theta.cos()];
    let rho = x[0];
    let u = norm(&field.velocity(x)?);
    let g = frobenius(&field.gradient(x)?);
    Ok([(rho * r).sqrt() * u, r * u, rho * r * g])
}

fn sup_on<F: Fn(f64) -> f64>(f: &F, thetas: &[f64]) -> f64 {
    if thetas.is_empty() {
        return 0.0;
    }
    let vals: Vec<f64> = thetas.iter().map(|&t| f(t)).collect();
    let (k, &best) = vals.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if k == 0 || k + 1 == thetas.len() {
        return best;
    }
    // golden-section refinement between the neighbouring samples
    let (mut a, mut b) = (thetas[k - 1], thetas[k + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    best.max(fc).max(fd)
}

fn theta_samples(lo: f64, hi: f64, uniform: usize) -> Vec<f64> {
    // log-clustered toward whichever end touches the axis
    let mut v = Vec::new();
    let near0 = lo <= 0.0;
    let nearpi = hi >= std::f64::consts::PI;
    let (a, b) = (lo.max(0.0), hi.min(std::f64::consts::PI));
    for i in 0..uniform {
        let t = a + (b - a) * (i as f64 + 0.5) / uniform as f64;
        v.push(t);
    }
    for k in 0..80 {
        let e = 10f64.powf(-9.0 + 8.0 * k as f64 / 79.0);
        if near0 && e < b {
            v.push(e);
        }
        if nearpi && std::f64::consts::PI - e > a {
            v.push(std::f64::consts::PI - e);
        }
    }
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Sup-norm triple by reduction to `theta` on the unit sphere.
pub fn compute_k(field: &VelocityField) -> KReport {
    use std::f64::consts::PI;
    let edge = (1.0 / std::f64::consts::E).asin();
    let mag = |t: f64, i: usize| weighted_magnitudes(field, 1.0, t).map(|m| m[i]).unwrap_or(0.0);
    let cone_n = theta_samples(0.0, edge, 200);
    let cone_s = theta_samples(PI - edge, PI, 200);
    let outer = theta_samples(edge, PI - edge, 400);
    let all = theta_samples(0.0, PI, 800);
    let f0 = |t: f64| mag(t, 0);
    let f1 = |t: f64| mag(t, 1);
    let f2 = |t: f64| mag(t, 2);
    KReport {
        k_cone: sup_on(&f0, &cone_n).max(sup_on(&f0, &cone_s)),
        k_outer: sup_on(&f1, &outer),
        k_grad: sup_on(&f2, &all),
    }
}

/// `|t^alpha ln t|`, bounded by `1/(alpha e)` on `(0, 1]`.
pub fn t_alpha_log(t: f64, alpha: f64) -> f64 {
    (t.powf(alpha) * t.ln()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TLogReport {
    /// max of `1/|x| + ln(|x'|/|x|)/|x|`, scaled by `|x|`.
    pub lower: f64,
    /// max of `-ln(|x'|/|x|)/|x| - (2/e)|x'|^{-1/2}|x|^{-1/2}`, scaled by `|x|`.
    pub upper: f64,
    pub samples: usize,
}

impl TLogReport {
    pub fn max_violation(&self) -> f64 {
        self.lower.max(self.upper)
    }
}

/// Violations of the two-sided log bound at a cone point.
pub fn t_log_violations(x: [f64; 3]) -> (f64, f64) {
    let r = norm(&x);
    let rho = x[0].hypot(x[1]);
    let l = -(rho / r).ln() / r;
    let lower = 1.0 / r - l;
    let upper = l - 2.0 / std::f64::consts::E / (rho * r).sqrt();
    (lower * r, upper * r)
}

/// Sample the cone `|x'| <= |x|/e` (including its boundary) and report the worst violations.
pub fn t_log_check(samples: usize, seed: u64) -> TLogReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut push = |x: [f64; 3]| {
        let (a, b) = t_log_violations(x);
        lower = lower.max(a);
        upper = upper.max(b);
    };
    let t_edge = 1.0 / std::f64::consts::E;
    push([t_edge, 0.0, (1.0 - t_edge * t_edge).sqrt()]);
    for _ in 0..samples {
        let r = 10f64.powf(rng.gen_range(-3.0..3.0));
        let t = t_edge * 10f64.powf(rng.gen_range(-12.0..0.0));
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * (1.0 - t * t).sqrt();
        push([r * t * phi.cos(), r * t * phi.sin(), r * z]);
    }
    TLogReport { lower, upper, samples: samples + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HomParams;
    use crate::profile::{solve_profile, SolverOptions};

    fn profile(c1: f64, c2: f64, c3: f64, g: f64) -> ThetaProfile {
        solve_profile(&HomParams::new(c1, c2, c3, g), &SolverOptions::default(), 1e-8).unwrap()
    }

    #[test]
    fn b_of_zero_profile() {
        let b = compute_b(&profile(0.0, 0.0, 0.0, 0.0), &BQuadrature::default()).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn b_reflection_antisymmetry() {
        let q = BQuadrature::default();
        let a = compute_b(&profile(0.0, 0.0, 0.4, 0.3), &q).unwrap();
        let b = compute_b(&profile(0.0, 0.0, 0.4, -0.3), &q).unwrap();
        assert!(a.value.abs() > 1e-3);
        assert!((a.value + b.value).abs() < a.error_estimate + b.error_estimate + 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn b_shrinks_with_parameters() {
        let q = BQuadrature::default();
        let vals: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&s| compute_b(&profile(0.0, 0.0, 0.4 * s, 0.4 * s), &q).unwrap().value.abs())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
    }

    #[test]
    fn b_rejects_extremal_branch() {
        let nodes = ThetaProfile::grid(&SolverOptions::default());
        let u = nodes.iter().map(|&y| 2.0 * (1.0 - y)).collect();
        let p = ThetaProfile::from_samples(HomParams::new(0.0, 0.0, 0.0, 2.0), nodes, u).unwrap();
        assert!(matches!(compute_b(&p, &BQuadrature::default()), Err(Error::Diverging { .. })));
    }

    #[test]
    fn k_of_zero_field() {
        let f = VelocityField::new(&profile(0.0, 0.0, 0.0, 0.0)).unwrap();
        let k = compute_k(&f);
        assert_eq!((k.k_cone, k.k_outer, k.k_grad), (0.0, 0.0, 0.0));
    }

    #[test]
    fn k_is_r_independent_and_shrinks() {
        let f = VelocityField::new(&profile(0.0, 0.0, 1.0, 0.0)).unwrap();
        for &t in &[0.01, 0.3, 1.5, 3.0] {
            let a = weighted_magnitudes(&f, 1.0, t).unwrap();
            let b = weighted_magnitudes(&f, 2.0, t).unwrap();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() <= 1e-14 * a[i].abs().max(1.0));
            }
        }
        let ks: Vec<KReport> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&s| compute_k(&VelocityField::new(&profile(0.0, 0.0, s, 0.0)).unwrap()))
            .collect();
        for w in ks.windows(2) {
            assert!(w[0].k_cone > w[1].k_cone && w[0].k_outer > w[1].k_outer && w[0].k_grad > w[1].k_grad);
        }
    }

    #[test]
    fn t_log_bound_has_no_violations() {
        assert!((t_alpha_log(1.0 / std::f64::consts::E, 1.0) - 1.0 / std::f64::consts::E).abs() < 1e-16);
        let t = 1.0 / std::f64::consts::E;
        let (lo, up) = t_log_violations([t, 0.0, (1.0 - t * t).sqrt()]);
        assert!(lo.abs() < 1e-15 && up < 0.0);
        let rep = t_log_check(10_000, 7);
        assert!(rep.max_violation() <= 1e-14, "{rep:?}");
    }
}
