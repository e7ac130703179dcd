//! Shooting solver for the reduced ODE.
//!
//! With `y = tanh(xi)` the equation becomes regular on the whole line:
//! `dU/dxi = R(y) - 2 y U - U^2/2`, where `R` is the quadratic forcing and
//! `1 - y`, `1 + y` are evaluated from `xi` without cancellation. The solver
//! shoots from `xi = 0` with `U = gamma` toward `xi = ±atanh(1 - eps_bl)` on a
//! grid uniform in `xi` (so the export nodes cluster at `y = ±1`), then closes
//! each end with the boundary-layer asymptotics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layer::{left_threshold, right_threshold, EdgeLayer, Side};
use crate::ode::{Dopri5, Stepping, Stop};
use crate::params::{cbar3, Branch, Classification, HomParams};

/// Resolution and tolerances for [`solve_profile`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Width of the boundary layers at `y = ±1`.
    pub boundary_layer: f64,
    /// Node spacing in `xi = atanh(y)`.
    pub node_spacing: f64,
    /// `None` for one fixed Dormand-Prince step per node interval.
    pub rtol: Option<f64>,
    pub atol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { boundary_layer: 1e-6, node_spacing: 0.01, rtol: Some(1e-12), atol: 1e-13 }
    }
}

impl SolverOptions {
    pub fn fixed_step(node_spacing: f64) -> Self {
        Self { node_spacing, rtol: None, ..Self::default() }
    }

    fn stepping(&self) -> Stepping {
        match self.rtol {
            Some(rtol) => Stepping::Adaptive { rtol, atol: self.atol },
            None => Stepping::Fixed,
        }
    }

    fn xi_max(&self) -> f64 {
        let e = self.boundary_layer;
        0.5 * ((2.0 - e) / e).ln()
    }
}

/// Discretized profile on nodes strictly inside `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub params: HomParams,
    pub nodes: Vec<f64>,
    pub u_values: Vec<f64>,
    pub du_values: Vec<f64>,
    pub endpoint_minus: f64,
    pub endpoint_plus: f64,
    pub branch: Branch,
    pub max_residual: f64,
}

/// `(y, 1 - y, 1 + y)` from `xi` without cancellation.
pub(crate) fn tanh_parts(xi: f64) -> (f64, f64, f64) {
    let e = (-2.0 * xi.abs()).exp();
    let small = 2.0 * e / (1.0 + e);
    let big = 2.0 / (1.0 + e);
    if xi >= 0.0 {
        (big - 1.0, small, big)
    } else {
        (1.0 - big, big, small)
    }
}

fn rhs(params: &HomParams, xi: f64, u: f64) -> f64 {
    let (y, om, op) = tanh_parts(xi);
    params.forcing(om, op) - 2.0 * y * u - 0.5 * u * u
}

/// `U'(y)` from the equation at a point where `U` is known.
pub fn ode_slope(params: &HomParams, y: f64, u: f64) -> f64 {
    let (om, op) = (1.0 - y, 1.0 + y);
    (params.forcing(om, op) - 2.0 * y * u - 0.5 * u * u) / (om * op)
}

fn stop_to_error(stop: Stop) -> Error {
    match stop {
        Stop::Guard { t } => Error::BlowUp { y: t.tanh() },
        Stop::Stall { t } => Error::NoConverge(format!("step size collapsed at y = {}", t.tanh())),
    }
}

fn stepper(params: &HomParams, opts: &SolverOptions) -> Dopri5 {
    Dopri5::new(opts.stepping(), params.guard_bound(), opts.node_spacing)
}

/// Solve with `U(0) = gamma` and close both ends with the endpoint root nearest the trajectory.
///
/// Fails with `BlowUp` when the guard is exceeded before the boundary layers,
/// and with `NoConverge` when the recomputed residual exceeds `tol`.
pub fn solve_profile(params: &HomParams, opts: &SolverOptions, tol: f64) -> Result<ThetaProfile> {
    if !params.in_j(1e-12) {
        return Err(Error::OutsideJ(format!("{params:?}")));
    }
    let xi_max = opts.xi_max();
    let n = (xi_max / opts.node_spacing).ceil().max(4.0) as usize;
    let h = xi_max / n as f64;
    let f = |xi: f64, u: f64| rhs(params, xi, u);

    let mut right = vec![params.gamma; n + 1];
    let mut ode = stepper(params, opts);
    for k in 0..n {
        let t0 = k as f64 * h;
        let t1 = if k + 1 == n { xi_max } else { (k + 1) as f64 * h };
        right[k + 1] = ode.advance(&f, t0, right[k], t1).map_err(stop_to_error)?;
    }
    let mut left = vec![params.gamma; n + 1];
    let mut ode = stepper(params, opts);
    for k in 0..n {
        let t0 = -(k as f64) * h;
        let t1 = if k + 1 == n { -xi_max } else { -((k + 1) as f64) * h };
        left[k + 1] = ode.advance(&f, t0, left[k], t1).map_err(stop_to_error)?;
    }

    let mut nodes = Vec::with_capacity(2 * n + 1);
    let mut u_values = Vec::with_capacity(2 * n + 1);
    let mut du_values = Vec::with_capacity(2 * n + 1);
    for k in (0..=2 * n).map(|i| i as isize - n as isize) {
        let xi = if k.unsigned_abs() == n { xi_max.copysign(k as f64) } else { k as f64 * h };
        let u = if k < 0 { left[(-k) as usize] } else { right[k as usize] };
        let (y, om, op) = tanh_parts(xi);
        nodes.push(y);
        u_values.push(u);
        du_values.push((params.forcing(om, op) - 2.0 * y * u - 0.5 * u * u) / (om * op));
    }

    let s_left = 1.0 + nodes[0];
    let s_right = 1.0 - nodes[2 * n];
    let left_layer = EdgeLayer::new(params, Side::Left, s_left, u_values[0]);
    let right_layer = EdgeLayer::new(params, Side::Right, s_right, u_values[2 * n]);
    let branch = match (left_layer.repelling, right_layer.repelling) {
        (true, true) => Branch::Degenerate,
        (true, false) => Branch::PlusExtremal,
        (false, true) => Branch::MinusExtremal,
        (false, false) => Branch::Interior,
    };
    let mut profile = ThetaProfile {
        params: *params,
        nodes,
        u_values,
        du_values,
        endpoint_minus: left_layer.endpoint(),
        endpoint_plus: right_layer.endpoint(),
        branch,
        max_residual: 0.0,
    };
    profile.max_residual = ode_residual(&profile);
    if !(profile.max_residual <= tol) {
        return Err(Error::NoConverge(format!(
            "residual {:e} exceeds tolerance {:e}",
            profile.max_residual, tol
        )));
    }
    Ok(profile)
}

/// Largest ODE defect over the nodes, with `U'` recomputed from `u_values`
/// alone by 9-point finite differences in `xi = atanh(y)`.
pub fn ode_residual(profile: &ThetaProfile) -> f64 {
    let p = &profile.params;
    let ys = &profile.nodes;
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = ys.iter().map(|&y| atanh_exact(y)).collect();
    let width = 9.min(n);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let start = k.saturating_sub(width / 2).min(n - width);
        let w = fornberg_first(xs[k], &xs[start..start + width]);
        let u_xi: f64 = w.iter().zip(&profile.u_values[start..start + width]).map(|(a, b)| a * b).sum();
        let y = ys[k];
        let u = profile.u_values[k];
        let d = (u_xi + 2.0 * y * u + 0.5 * u * u - p.forcing(1.0 - y, 1.0 + y)).abs();
        worst = worst.max(d);
    }
    worst
}

/// `atanh` keeping full relative precision in `1 ± y` near the endpoints.
pub fn atanh_exact(y: f64) -> f64 {
    if y.abs() > 0.5 {
        0.5 * ((1.0 + y) / (1.0 - y)).ln()
    } else {
        y.atanh()
    }
}

/// Weights of the first derivative at `x0` on the stencil `xs` (Fornberg's recursion).
pub(crate) fn fornberg_first(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Admissible interval `[gamma_minus, gamma_plus]` of shooting values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRange {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub tol: f64,
}

impl GammaRange {
    pub fn width(&self) -> f64 {
        self.gamma_plus - self.gamma_minus
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.gamma_minus - self.tol && gamma <= self.gamma_plus + self.tol
    }
}

/// Integrate one side only; `true` when the trajectory reaches the layer and
/// is not committed to blow-up inside it.
fn side_ok(params: &HomParams, opts: &SolverOptions, side: Side) -> Result<bool> {
    let xi_max = opts.xi_max();
    let target = match side {
        Side::Left => -xi_max,
        Side::Right => xi_max,
    };
    let f = |xi: f64, u: f64| rhs(params, xi, u);
    let mut ode = stepper(params, opts);
    match ode.advance(&f, 0.0, params.gamma, target) {
        Ok(u) => {
            let (_, om, op) = tanh_parts(target);
            Ok(match side {
                Side::Left => u <= left_threshold(params, op),
                Side::Right => u >= right_threshold(params, om),
            })
        }
        Err(Stop::Guard { .. }) => Ok(false),
        Err(e @ Stop::Stall { .. }) => Err(stop_to_error(e)),
    }
}

/// Bracket `gamma^±(c)` by two monotone bisections.
///
/// `gamma^+` is the largest shooting value whose left half survives, `gamma^-`
/// the smallest whose right half survives. Both are reported from the
/// surviving side of their bracket, so they lie inside the true range.
pub fn gamma_range(c: [f64; 3], tol: f64) -> Result<GammaRange> {
    gamma_range_with(c, tol, &SolverOptions::default())
}

pub fn gamma_range_with(c: [f64; 3], tol: f64, opts: &SolverOptions) -> Result<GammaRange> {
    let base = HomParams::new(c[0], c[1], c[2], 0.0);
    if !base.in_j(1e-12) {
        return Err(Error::OutsideJ(format!("c = {c:?}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let ok = |g: f64, side: Side| side_ok(&HomParams { gamma: g, ..base }, opts, side);

    let mut bound = 4.0 + 2.0 * (1.0 + c[0]).sqrt() + 2.0 * (1.0 + c[1]).sqrt();
    let mut tries = 0;
    while !(ok(-bound, Side::Left)? && !ok(bound, Side::Left)? && ok(bound, Side::Right)? && !ok(-bound, Side::Right)?) {
        bound *= 2.0;
        tries += 1;
        if tries > 20 {
            return Err(Error::NoConverge("could not bracket the gamma range".into()));
        }
    }

    let (mut lo, mut hi) = (-bound, bound);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid, Side::Left)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut gamma_plus = lo;

    let (mut lo, mut hi) = (-bound, bound);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid, Side::Right)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut gamma_minus = hi;

    if gamma_minus > gamma_plus {
        if gamma_minus - gamma_plus <= 4.0 * tol {
            let mid = 0.5 * (gamma_minus + gamma_plus);
            gamma_minus = mid;
            gamma_plus = mid;
        } else {
            return Err(Error::NoConverge(format!(
                "empty gamma range: gamma- = {gamma_minus} > gamma+ = {gamma_plus}"
            )));
        }
    }
    Ok(GammaRange { gamma_minus, gamma_plus, tol })
}

pub const DEFAULT_GAMMA_TOL: f64 = 1e-8;

/// Membership in J and M. The M test runs a `gamma_range` bisection; a failed
/// bisection leaves the verdict at `InJ`.
pub fn is_admissible(params: &HomParams) -> Classification {
    let Ok(cb) = cbar3(params.c1, params.c2) else {
        return Classification::OutsideJ;
    };
    if !(params.c3 >= cb) {
        return Classification::OutsideJ;
    }
    if params.c1 == 0.0 && params.c2 == 0.0 && params.c3 > -4.0 {
        if let Ok(range) = gamma_range(params.c(), DEFAULT_GAMMA_TOL) {
            if range.gamma_minus < params.gamma && params.gamma < range.gamma_plus {
                return Classification::InM;
            }
        }
    }
    Classification::InJ
}

impl ThetaProfile {
    /// Closed-form profile sampled on the nodes of `opts` (no solving); endpoints from the
    /// nearest roots at the outermost nodes.
    pub fn from_samples(params: HomParams, nodes: Vec<f64>, u_values: Vec<f64>) -> Result<Self> {
        if nodes.len() != u_values.len() || nodes.len() < 2 {
            return Err(Error::Parse("nodes and values must have equal length >= 2".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes[0] <= -1.0 || nodes[nodes.len() - 1] >= 1.0 {
            return Err(Error::Parse("nodes must increase strictly inside (-1, 1)".into()));
        }
        let du_values = nodes.iter().zip(&u_values).map(|(&y, &u)| ode_slope(&params, y, u)).collect();
        let n = nodes.len();
        let left = EdgeLayer::new(&params, Side::Left, 1.0 + nodes[0], u_values[0]);
        let right = EdgeLayer::new(&params, Side::Right, 1.0 - nodes[n - 1], u_values[n - 1]);
        let branch = match (left.repelling, right.repelling) {
            (true, true) => Branch::Degenerate,
            (true, false) => Branch::PlusExtremal,
            (false, true) => Branch::MinusExtremal,
            (false, false) => Branch::Interior,
        };
        let mut p = Self {
            params,
            nodes,
            u_values,
            du_values,
            endpoint_minus: left.endpoint(),
            endpoint_plus: right.endpoint(),
            branch,
            max_residual: 0.0,
        };
        p.max_residual = ode_residual(&p);
        Ok(p)
    }

    /// Export nodes of [`solve_profile`] for the given options.
    pub fn grid(opts: &SolverOptions) -> Vec<f64> {
        let xi_max = opts.xi_max();
        let n = (xi_max / opts.node_spacing).ceil().max(4.0) as usize;
        let h = xi_max / n as f64;
        (0..=2 * n)
            .map(|i| {
                let k = i as isize - n as isize;
                let xi = if k.unsigned_abs() == n { xi_max.copysign(k as f64) } else { k as f64 * h };
                tanh_parts(xi).0
            })
            .collect()
    }

    /// CSV with header `y,U,dU`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,U,dU\n");
        for ((y, u), du) in self.nodes.iter().zip(&self.u_values).zip(&self.du_values) {
            s.push_str(&format!("{y:.16e},{u:.16e},{du:.16e}\n"));
        }
        s
    }

    /// Parse the CSV written by [`ThetaProfile::to_csv`].
    pub fn from_csv(params: HomParams, text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut u = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('y')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected y,U[,dU]", i + 1)));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)));
            nodes.push(parse(cols[0])?);
            u.push(parse(cols[1])?);
        }
        Self::from_samples(params, nodes, u)
    }

    /// Residual of the endpoint quadratics.
    pub fn endpoint_defects(&self) -> (f64, f64) {
        crate::params::endpoint_defects(&self.params, self.endpoint_minus, self.endpoint_plus)
    }
}
