//! Velocity, pressure and gradient of the (-1)-homogeneous field.
//!
//! With `y = cos(theta) = x3/r` and `rho = |x'|`:
//!
//! ```text
//! u = U'(y) x / r^2 + U(y) (x3 x1 / (r rho^2), x3 x2 / (r rho^2), -1/r)
//! p = (U'(y) + c3) / r^2 - U(y)^2 / (2 rho^2)
//! ```
//!
//! i.e. `u_r = U'/r`, `u_theta = U/(r sin(theta))`, `u_phi = 0`, where `'` is
//! `d/dy` throughout. Chain-rule factors use `dy/dx_j = delta_j3/r - x3 x_j/r^3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{Jet, ProfileInterpolant};
use crate::params::HomParams;
use crate::profile::ThetaProfile;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn to_cartesian(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }

    pub fn from_cartesian(x: Vec3) -> Self {
        let rho = x[0].hypot(x[1]);
        Self { r: rho.hypot(x[2]), theta: rho.atan2(x[2]), phi: x[1].atan2(x[0]) }
    }
}

#[derive(Debug, Clone, Copy)]
struct Geom {
    r: f64,
    rho: f64,
    y: f64,
    gap: f64,
}

fn geometry(x: &Vec3) -> Result<Geom> {
    let rho2 = x[0] * x[0] + x[1] * x[1];
    if rho2 == 0.0 {
        return Err(Error::OnAxis);
    }
    let rho = rho2.sqrt();
    let r = rho.hypot(x[2]);
    // 1 - |y| = rho^2 / (r (r + |x3|)) avoids cancellation near the axis
    let gap = rho2 / (r * (r + x[2].abs()));
    Ok(Geom { r, rho, y: x[2] / r, gap })
}

/// Velocity field lifted from a profile; immutable after construction.
#[derive(Debug, Clone)]
pub struct VelocityField {
    interp: ProfileInterpolant,
}

impl VelocityField {
    pub fn new(profile: &ThetaProfile) -> Result<Self> {
        Ok(Self { interp: ProfileInterpolant::new(profile)? })
    }

    pub fn params(&self) -> &HomParams {
        self.interp.params()
    }

    pub fn profile_at(&self, y: f64) -> Jet {
        self.interp.eval(y)
    }

    fn jet(&self, g: &Geom) -> Jet {
        self.interp.eval_gap(g.y, g.gap)
    }

    pub fn velocity(&self, x: Vec3) -> Result<Vec3> {
        let g = geometry(&x)?;
        let j = self.jet(&g);
        Ok(assemble_velocity(&x, &g, &j))
    }

    /// `(u_r, u_theta, u_phi)`.
    pub fn spherical_components(&self, x: Vec3) -> Result<Vec3> {
        let g = geometry(&x)?;
        let j = self.jet(&g);
        Ok([j.du / g.r, j.u / g.rho, 0.0])
    }

    pub fn pressure(&self, x: Vec3) -> Result<f64> {
        let g = geometry(&x)?;
        let j = self.jet(&g);
        let c3 = self.params().c3;
        Ok((j.du + c3) / (g.r * g.r) - j.u * j.u / (2.0 * g.rho * g.rho))
    }

    /// `grad[i][j] = d u_i / d x_j`.
    pub fn gradient(&self, x: Vec3) -> Result<Mat3> {
        let g = geometry(&x)?;
        let jet = self.jet(&g);
        let (r, rho) = (g.r, g.rho);
        let r2 = r * r;
        let r3 = r2 * r;
        let rho2 = rho * rho;
        let x3 = x[2];
        let dy: Vec3 = [-x3 * x[0] / r3, -x3 * x[1] / r3, 1.0 / r - x3 * x3 / r3];
        let gv: Vec3 = [x3 * x[0] / (r * rho2), x3 * x[1] / (r * rho2), -1.0 / r];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let dij = if i == j { 1.0 } else { 0.0 };
                let dg = if i < 2 {
                    let dj3 = if j == 2 { 1.0 } else { 0.0 };
                    let planar = if j < 2 { 2.0 * x3 * x[i] * x[j] / (r * rho2 * rho2) } else { 0.0 };
                    (dj3 * x[i] + x3 * dij) / (r * rho2) - x3 * x[i] * x[j] / (r3 * rho2) - planar
                } else {
                    x[j] / r3
                };
                out[i][j] = jet.d2u * dy[j] * x[i] / r2
                    + jet.du * (dij / r2 - 2.0 * x[i] * x[j] / (r2 * r2))
                    + jet.du * dy[j] * gv[i]
                    + jet.u * dg;
            }
        }
        Ok(out)
    }

    /// Central-difference `-Δu + (u·∇)u + ∇p` at `x` with step `h`.
    pub fn nse_residual(&self, x: Vec3, h: f64) -> Result<Vec3> {
        let g = geometry(&x)?;
        if h >= g.rho / 4.0 {
            return Err(Error::StepTooLarge { h, rho: g.rho });
        }
        let u0 = self.velocity(x)?;
        let mut lap = [0.0; 3];
        let mut adv = [0.0; 3];
        let mut gp = [0.0; 3];
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let up = self.velocity(xp)?;
            let um = self.velocity(xm)?;
            for i in 0..3 {
                lap[i] += (up[i] - 2.0 * u0[i] + um[i]) / (h * h);
                adv[i] += u0[j] * (up[i] - um[i]) / (2.0 * h);
            }
            gp[j] = (self.pressure(xp)? - self.pressure(xm)?) / (2.0 * h);
        }
        Ok([0, 1, 2].map(|i| -lap[i] + adv[i] + gp[i]))
    }

    /// Central-difference divergence.
    pub fn divergence(&self, x: Vec3, h: f64) -> Result<f64> {
        let mut d = 0.0;
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            d += (self.velocity(xp)?[j] - self.velocity(xm)?[j]) / (2.0 * h);
        }
        Ok(d)
    }
}

fn assemble_velocity(x: &Vec3, g: &Geom, j: &Jet) -> Vec3 {
    let r2 = g.r * g.r;
    let w = x[2] / (g.r * g.rho * g.rho);
    [
        j.du * x[0] / r2 + j.u * w * x[0],
        j.du * x[1] / r2 + j.u * w * x[1],
        j.du * x[2] / r2 - j.u / g.r,
    ]
}

pub fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter().flat_map(|row| row.iter()).map(|a| a * a).sum::<f64>().sqrt()
}

/// Least-squares slope `A` of `|u| ≈ A ln(1/rho) + B` on `|x| = 1` at the given axis distances.
pub fn singularity_fit(field: &VelocityField, axis_distances: &[f64]) -> Result<f64> {
    let mut pts = Vec::with_capacity(axis_distances.len());
    for &rho in axis_distances {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("axis distance {rho} outside (0, 1)")));
        }
        let x = [rho, 0.0, (1.0 - rho * rho).sqrt()];
        pts.push(((1.0 / rho).ln(), norm(&field.velocity(x)?)));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx <= 1e-12 * n {
        return Err(Error::InsufficientSamples("need at least two distinct axis distances".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// `n` log-spaced axis distances in `[lo, hi]`.
pub fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
