//! Evaluation of a profile between and beyond its nodes.
//!
//! Between nodes the profile is continued by the Taylor series of the ODE
//! itself about the nearest node, so every evaluated point satisfies the
//! equation to series truncation. Inside the boundary layers the matched
//! endpoint asymptotics take over.

use crate::error::{Error, Result};
use crate::layer::{EdgeLayer, Side};
use crate::params::HomParams;
use crate::profile::ThetaProfile;

const SERIES_ORDER: usize = 24;

#[derive(Debug, Clone)]
pub struct ProfileInterpolant {
    params: HomParams,
    nodes: Vec<f64>,
    u: Vec<f64>,
    left: EdgeLayer,
    right: EdgeLayer,
}

/// `(U, U', U'')` at a point; primes are `d/dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

impl ProfileInterpolant {
    pub fn new(profile: &ThetaProfile) -> Result<Self> {
        let n = profile.nodes.len();
        if n < 2 || profile.u_values.len() != n {
            return Err(Error::Parse("profile needs at least two nodes with matching values".into()));
        }
        let y0 = profile.nodes[0];
        let y1 = profile.nodes[n - 1];
        let left = EdgeLayer::new(&profile.params, Side::Left, 1.0 + y0, profile.u_values[0]);
        let right = EdgeLayer::new(&profile.params, Side::Right, 1.0 - y1, profile.u_values[n - 1]);
        Ok(Self { params: profile.params, nodes: profile.nodes.clone(), u: profile.u_values.clone(), left, right })
    }

    pub fn params(&self) -> &HomParams {
        &self.params
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.left.endpoint(), self.right.endpoint())
    }

    /// Evaluate at `y` in `[-1, 1]`.
    pub fn eval(&self, y: f64) -> Jet {
        self.eval_gap(y, 1.0 - y.abs())
    }

    /// Evaluate at `y` given an accurately computed `gap = 1 - |y|`.
    pub fn eval_gap(&self, y: f64, gap: f64) -> Jet {
        if y >= 0.0 && gap < self.right.s0() {
            let (u, du, d2u) = self.right.eval(gap.max(0.0));
            return Jet { u, du, d2u };
        }
        if y < 0.0 && gap < self.left.s0() {
            let (u, du, d2u) = self.left.eval(gap.max(0.0));
            return Jet { u, du, d2u };
        }
        let k = self.nearest(y);
        let y0 = self.nodes[k];
        let a = series(&self.params, y0, self.u[k]);
        let t = if y >= 0.0 && y0 > 0.5 {
            // both near +1: difference of gaps keeps the small offsets exact
            (1.0 - y0) - gap
        } else if y < 0.0 && y0 < -0.5 {
            gap - (1.0 + y0)
        } else {
            y - y0
        };
        horner(&a, t)
    }

    fn nearest(&self, y: f64) -> usize {
        let i = self.nodes.partition_point(|&v| v < y);
        if i == 0 {
            0
        } else if i >= self.nodes.len() {
            self.nodes.len() - 1
        } else if y - self.nodes[i - 1] <= self.nodes[i] - y {
            i - 1
        } else {
            i
        }
    }
}

/// Taylor coefficients `a_j` of the solution through `(y0, u0)` in powers of `y - y0`.
pub fn series(params: &HomParams, y0: f64, u0: f64) -> [f64; SERIES_ORDER + 1] {
    let om = 1.0 - y0;
    let op = 1.0 + y0;
    let a0 = om * op;
    let r = [params.forcing(om, op), -params.c1 + params.c2 - 2.0 * params.c3 * y0, -params.c3];
    let mut a = [0.0; SERIES_ORDER + 1];
    a[0] = u0;
    for j in 0..SERIES_ORDER {
        let rj = if j < 3 { r[j] } else { 0.0 };
        let conv: f64 = (0..=j).map(|i| a[i] * a[j - i]).sum();
        let prev = if j >= 1 { a[j - 1] } else { 0.0 };
        let num = rj + 2.0 * y0 * (j as f64 - 1.0) * a[j] + (j as f64 - 3.0) * prev - 0.5 * conv;
        a[j + 1] = num / (a0 * (j as f64 + 1.0));
    }
    a
}

fn horner(a: &[f64], t: f64) -> Jet {
    let n = a.len() - 1;
    let mut u = a[n];
    let mut du = n as f64 * a[n];
    let mut d2u = (n * (n - 1)) as f64 * a[n];
    for j in (0..n).rev() {
        u = u * t + a[j];
        if j >= 1 {
            du = du * t + j as f64 * a[j];
        }
        if j >= 2 {
            d2u = d2u * t + (j * (j - 1)) as f64 * a[j];
        }
    }
    Jet { u, du, d2u }
}
