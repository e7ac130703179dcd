//! Asymptotics of the profile inside the boundary layers at `y = ±1`.
//!
//! Near `y = 1` write `s = 1 - y` and `U = r + v` with `r` an endpoint root.
//! Linearizing gives `-2 s v_s + (2 + r) v = kappa s` with
//! `kappa = c1 - c2 + 2 c3 + 2 r`. For the root `r = -2 + 2 mu`,
//! `mu = sqrt(1 + c2)`, the general solution is `p s + C s^mu`; at `mu = 1`
//! it degenerates to `a s ln s + C s`. The other root is repelling and only
//! the particular solution `p' s` reaches it. The left end is handled through
//! `V(y) = -U(-y)`, which solves the equation with `c1` and `c2` swapped.

use crate::params::{right_roots, HomParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// `v = -(kappa/2) s expm1(delta L)/delta + v0 (s/s0)^mu`, `L = ln(s/s0)`, `delta = mu - 1`.
    Attracting { mu: f64, kappa: f64 },
    /// `v = p s + (v0 - p s0) (s/s0)^2`.
    Repelling { p: f64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeLayer {
    side: Side,
    /// Root in the right-end frame (for `Side::Left` this is the root of `V`).
    root: f64,
    s0: f64,
    v0: f64,
    /// Coefficient of the `s (s - s0)` correction matching the slope at `s0`.
    d: f64,
    kind: Kind,
    pub(crate) repelling: bool,
}

/// `(mu, r_rep, r_att, kappa_att, p_rep)` for the linearization at `y = 1`.
fn right_data(p: &HomParams) -> (f64, f64, f64, f64, f64) {
    let mu = (1.0 + p.c2).max(0.0).sqrt();
    let (r_rep, r_att) = right_roots(p.c2);
    let base = p.c1 - p.c2 + 2.0 * p.c3;
    let kappa_att = base + 2.0 * r_att;
    let kappa_rep = base + 2.0 * r_rep;
    let p_rep = kappa_rep / (-2.0 * mu - 2.0);
    (mu, r_rep, r_att, kappa_att, p_rep)
}

/// Value at `s0` of the separatrix entering the repelling root, right-end frame.
fn right_separatrix(p: &HomParams, s0: f64) -> f64 {
    let (_, r_rep, _, _, p_rep) = right_data(p);
    r_rep + p_rep * s0
}

/// Threshold below which `U(1 - s0)` is committed to blow-up.
pub(crate) fn right_threshold(p: &HomParams, s0: f64) -> f64 {
    right_separatrix(p, s0)
}

/// Threshold above which `U(-1 + s0)` is committed to blow-up.
pub(crate) fn left_threshold(p: &HomParams, s0: f64) -> f64 {
    -right_separatrix(&p.reflected(), s0)
}

fn phi(delta: f64, l: f64) -> f64 {
    if delta == 0.0 {
        l
    } else {
        (delta * l).exp_m1() / delta
    }
}

impl EdgeLayer {
    /// Build the layer model matched to `u_edge = U(±(1 - s0))`.
    ///
    /// Picks the endpoint root nearest the incoming value.
    pub(crate) fn new(params: &HomParams, side: Side, s0: f64, u_edge: f64) -> Self {
        let (frame, w_edge) = match side {
            Side::Right => (*params, u_edge),
            Side::Left => (params.reflected(), -u_edge),
        };
        let (mu, r_rep, r_att, kappa_att, p_rep) = right_data(&frame);
        let repelling = (w_edge - r_rep).abs() < (w_edge - r_att).abs();
        let (root, kind) = if repelling {
            (r_rep, Kind::Repelling { p: p_rep })
        } else if mu < 1e-3 {
            // double root: the linearization is degenerate, keep the slope model
            (r_att, Kind::Repelling { p: kappa_att / (2.0 * mu - 2.0) })
        } else {
            (r_att, Kind::Attracting { mu, kappa: kappa_att })
        };
        let mut layer = Self { side, root, s0, v0: w_edge - root, d: 0.0, kind, repelling };
        let y = 1.0 - s0;
        let w_y = (frame.forcing(s0, 2.0 - s0) - 2.0 * y * w_edge - 0.5 * w_edge * w_edge) / (s0 * (2.0 - s0));
        let (_, vs_base, _) = layer.frame_eval(s0);
        layer.d = (-w_y - vs_base) / s0;
        layer
    }

    /// Endpoint value `U(±1)`.
    pub(crate) fn endpoint(&self) -> f64 {
        match self.side {
            Side::Right => self.root,
            Side::Left => -self.root,
        }
    }

    pub(crate) fn s0(&self) -> f64 {
        self.s0
    }

    /// `(v, v_s, v_ss)` in the right-end frame at distance `s` from the endpoint.
    fn frame_eval(&self, s: f64) -> (f64, f64, f64) {
        let (v, vs, vss) = self.base_eval(s);
        let d = self.d;
        (v + d * s * (s - self.s0), vs + d * (2.0 * s - self.s0), vss + 2.0 * d)
    }

    fn base_eval(&self, s: f64) -> (f64, f64, f64) {
        let s0 = self.s0;
        let v0 = self.v0;
        let x = s / s0;
        match self.kind {
            Kind::Attracting { mu, kappa } => {
                if s == 0.0 {
                    // derivatives are unbounded at the endpoint unless mu > 1
                    let vs = if mu > 1.0 { kappa / (2.0 * mu - 2.0) } else { f64::NAN };
                    return (0.0, vs, f64::NAN);
                }
                let delta = mu - 1.0;
                let l = x.ln();
                let e = (delta * l).exp();
                let ph = phi(delta, l);
                let v = -(kappa / 2.0) * s * ph + v0 * x.powf(mu);
                let vs = -(kappa / 2.0) * (ph + e) + mu * v0 * x.powf(mu - 1.0) / s0;
                let vss = -(kappa / 2.0) * (1.0 + delta) * e / s + mu * (mu - 1.0) * v0 * x.powf(mu - 2.0) / (s0 * s0);
                (v, vs, vss)
            }
            Kind::Repelling { p } => {
                let w0 = v0 - p * s0;
                (p * s + w0 * x * x, p + 2.0 * w0 * x / s0, 2.0 * w0 / (s0 * s0))
            }
        }
    }

    /// `(U, U', U'')` at distance `s` (`0 <= s <= s0`) from the endpoint; primes are `d/dy`.
    pub(crate) fn eval(&self, s: f64) -> (f64, f64, f64) {
        let (v, vs, vss) = self.frame_eval(s);
        let w = self.root + v;
        // right frame: y = 1 - s, so d/dy = -d/ds
        let (w_y, w_yy) = (-vs, vss);
        match self.side {
            Side::Right => (w, w_y, w_yy),
            // U(y) = -V(-y): U' = V'(-y), U'' = -V''(-y)
            Side::Left => (-w, w_y, -w_yy),
        }
    }
}
