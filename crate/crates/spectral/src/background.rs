//! Grid representation of the stationary singular flow.
//!
//! The field is the curl of `A = chi(rho) eta(r) Psi/rho^2 (-x2, x1, 0)` with
//! Stokes stream function `Psi = -r U(x3/r)`. `chi` caps the axis inside
//! `rho_m`, `eta` cuts off beyond `R_c`, and the curl is taken spectrally, so the
//! result is exactly divergence-free on the grid before band limiting.

use homns_core::field::VelocityField;
use homns_core::interp::ProfileInterpolant;
use homns_core::{is_admissible, solve_profile, Classification, HomParams, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::grid::{zeros, Grid, Vector, C64};

/// `6t^5 - 15t^4 + 10t^3` clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Axis cap: vanishes to third order on the axis, 1 for `rho >= rho_m`.
pub fn axis_cap(rho: f64, rho_m: f64) -> f64 {
    smoothstep(rho / rho_m)
}

/// Outer cutoff: 1 for `r <= 0.6 R_c`, 0 for `r >= R_c`.
pub fn outer_cutoff(r: f64, r_c: f64) -> f64 {
    1.0 - smoothstep((r - 0.6 * r_c) / (0.4 * r_c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundReport {
    pub sup_norm: f64,
    /// Grid sup of the cone triple `(k_cone, k_outer, k_grad)` of the mollified field.
    pub k_triple: [f64; 3],
    /// Sup of the exact field over grid nodes where both cutoffs equal 1.
    pub exact_sup_retained: f64,
    /// Max deviation from the exact field over those nodes.
    pub retained_error: f64,
    /// Max second-order finite-difference divergence over nodes outside the blending shells.
    pub fd_divergence: f64,
}

#[derive(Debug, Clone)]
pub struct Background {
    pub params: HomParams,
    pub u: Vector<f64>,
    pub u_hat: Vector<C64>,
    /// `d u_c / d x_j` at `3c + j`.
    pub grad: Vec<Vec<f64>>,
    pub report: BackgroundReport,
}

impl Background {
    pub fn zero(grid: &Grid) -> Self {
        let len = grid.len();
        Self {
            params: HomParams::new(0.0, 0.0, 0.0, 0.0),
            u: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            u_hat: zeros(len),
            grad: vec![vec![0.0; len]; 9],
            report: BackgroundReport { sup_norm: 0.0, k_triple: [0.0; 3], exact_sup_retained: 0.0, retained_error: 0.0, fd_divergence: 0.0 },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.report.sup_norm == 0.0
    }
}

pub fn make_background(params: &HomParams, rho_m: f64, r_c: f64, grid: &Grid) -> SimResult<Background> {
    match is_admissible(params) {
        Classification::InM => {}
        other => return Err(SimError::NotInM(format!("{params:?} classified {}", other.as_str()))),
    }
    if params.is_zero() {
        return Ok(Background::zero(grid));
    }
    let profile = solve_profile(params, &SolverOptions::default(), 1e-6)?;
    let interp = ProfileInterpolant::new(&profile)?;
    let len = grid.len();
    let mut a: Vector<f64> = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for idx in 0..len {
        let x = grid.coords(idx);
        let rho = x[0].hypot(x[1]);
        let r = rho.hypot(x[2]);
        let w = axis_cap(rho, rho_m) * outer_cutoff(r, r_c);
        if w == 0.0 {
            continue;
        }
        let psi = -r * interp.eval(x[2] / r).u;
        let s = w * psi / (rho * rho);
        a[0][idx] = -s * x[1];
        a[1][idx] = s * x[0];
    }
    let ah = grid.vector_to_spectral(&a);
    let mut u_hat = zeros(len);
    for idx in 0..len {
        let k = grid.wavevector(idx);
        let i = C64::new(0.0, 1.0);
        u_hat[0][idx] = i * (ah[2][idx] * k[1] - ah[1][idx] * k[2]);
        u_hat[1][idx] = i * (ah[0][idx] * k[2] - ah[2][idx] * k[0]);
        u_hat[2][idx] = i * (ah[1][idx] * k[0] - ah[0][idx] * k[1]);
    }
    grid.dealias(&mut u_hat);
    let u = grid.vector_to_physical(&u_hat);
    let grad = grid.gradient(&u_hat);
    let report = background_report(params, &u, &grad, grid, rho_m, r_c, &profile)?;
    Ok(Background { params: *params, u, u_hat, grad, report })
}

fn background_report(
    _params: &HomParams,
    u: &Vector<f64>,
    grad: &[Vec<f64>],
    grid: &Grid,
    rho_m: f64,
    r_c: f64,
    profile: &homns_core::ThetaProfile,
) -> SimResult<BackgroundReport> {
    let exact = VelocityField::new(profile)?;
    let inv_e = (-1.0f64).exp();
    let mut k = [0.0f64; 3];
    let (mut ex_sup, mut err) = (0.0f64, 0.0f64);
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        let rho = x[0].hypot(x[1]);
        let r = rho.hypot(x[2]);
        let mag = (u[0][idx].powi(2) + u[1][idx].powi(2) + u[2][idx].powi(2)).sqrt();
        let g: f64 = grad.iter().map(|d| d[idx] * d[idx]).sum::<f64>().sqrt();
        if rho > 0.0 {
            if rho <= inv_e * r {
                k[0] = k[0].max((rho * r).sqrt() * mag);
            } else {
                k[1] = k[1].max(r * mag);
            }
            k[2] = k[2].max(rho * r * g);
        }
        if rho >= rho_m && r <= 0.6 * r_c {
            let e = exact.velocity(x)?;
            let em = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
            ex_sup = ex_sup.max(em);
            err = err.max(((u[0][idx] - e[0]).powi(2) + (u[1][idx] - e[1]).powi(2) + (u[2][idx] - e[2]).powi(2)).sqrt());
        }
    }
    Ok(BackgroundReport {
        sup_norm: grid.sup_norm(u),
        k_triple: k,
        exact_sup_retained: ex_sup,
        retained_error: err,
        fd_divergence: fd_divergence(u, grid, rho_m, r_c),
    })
}

/// Central-difference divergence away from the axis cap and outer shell.
pub fn fd_divergence(u: &Vector<f64>, grid: &Grid, rho_m: f64, r_c: f64) -> f64 {
    let n = grid.n;
    let h = grid.h();
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        let rho = x[0].hypot(x[1]);
        let r = rho.hypot(x[2]);
        if rho < rho_m + 2.0 * h || r > 0.6 * r_c - 2.0 * h {
            continue;
        }
        let [i, j, l] = grid.split(idx);
        let d0 = u[0][grid.index((i + 1) % n, j, l)] - u[0][grid.index((i + n - 1) % n, j, l)];
        let d1 = u[1][grid.index(i, (j + 1) % n, l)] - u[1][grid.index(i, (j + n - 1) % n, l)];
        let d2 = u[2][grid.index(i, j, (l + 1) % n)] - u[2][grid.index(i, j, (l + n - 1) % n)];
        worst = worst.max(((d0 + d1 + d2) / (2.0 * h)).abs());
    }
    worst
}
