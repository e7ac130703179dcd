//! Sharp decay constant `C_q` and the `L^3 -> L^q` decay envelope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{graded_nodes, Rule};

fn check(q: f64, tau: f64) -> Result<()> {
    if !(q > 3.0 && q.is_finite()) {
        return Err(Error::Domain(format!("q must be finite and > 3, got {q}")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    Ok(())
}

/// `1/3 - 1/q`.
fn gap(q: f64) -> f64 {
    1.0 / 3.0 - 1.0 / q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub q: f64,
    pub tau: f64,
    pub c_q: f64,
    pub exponent: f64,
}

impl DecayBound {
    pub fn new(q: f64, tau: f64) -> Result<Self> {
        Ok(Self { q, tau, c_q: sharp_constant(q, tau)?, exponent: 1.5 * gap(q) })
    }

    pub fn envelope(&self, w0_l3: f64, t: f64) -> f64 {
        let d = gap(self.q);
        self.c_q * d.powf(self.exponent) * t.powf(-self.exponent) * w0_l3
    }
}

/// The closed-form product as published.
pub fn sharp_constant(q: f64, tau: f64) -> Result<f64> {
    check(q, tau)?;
    let d = gap(q);
    let ln = -1.75 * 3f64.ln()
        + 3.0 / q * q.ln()
        + 1.5 / q * (q - 2.0).ln()
        + 0.75 * (q / (q - 2.0)).ln()
        - 1.5 * d * (4.0 * std::f64::consts::PI * (1.0 - tau)).ln()
        - 6.0 * d;
    Ok(ln.exp())
}

/// Product re-assembled from the integral definition.
pub fn corrected_closed_form(q: f64, tau: f64) -> Result<f64> {
    check(q, tau)?;
    let d = gap(q);
    let ln = 0.25 * 3f64.ln()
        + (0.75 - 3.0 / q) * q.ln()
        + (1.5 / q - 0.75) * (q - 2.0).ln()
        - 1.5 * d * (4.0 * std::f64::consts::PI * (1.0 - tau)).ln();
    Ok(ln.exp())
}

/// The three antiderivative pieces of `int_3^q ln(4 pi (r-2)(1-tau)/r^2) / r^2 dr`.
pub fn integral_pieces(q: f64, tau: f64) -> [f64; 3] {
    let d = gap(q);
    [
        d * (4.0 * std::f64::consts::PI * (1.0 - tau)).ln(),
        (0.5 - 1.0 / q) * (q - 2.0).ln() + 0.5 * (3.0 / q).ln(),
        -2.0 * ((1.0 + 3f64.ln()) / 3.0 - (1.0 + q.ln()) / q),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: f64,
    /// The r-integral.
    pub integral: f64,
    pub piece_sum: f64,
    /// Constant recomputed from the time integral at `T = 1` and `T = 2`.
    pub time_form: [f64; 2],
}

fn log_integral(q: f64, tau: f64, panels: usize) -> f64 {
    // s = 1/r turns the integrand into ln(4 pi (1-tau) s (1-2s)) on [1/q, 1/3]
    let k = (4.0 * std::f64::consts::PI * (1.0 - tau)).ln();
    let rule = Rule::new(12);
    graded_nodes(&rule, 1.0 / q, 1.0 / 3.0, panels, 1.3)
        .iter()
        .map(|&(s, w)| w * (k + s.ln() + (1.0 - 2.0 * s).ln()))
        .sum()
}

/// `C_q` from the time integral along the main ramp on `[0, T]`.
fn time_integral_constant(q: f64, tau: f64, t_end: f64) -> f64 {
    let spec = RampSpec { q, t_end, variant: RampVariant::Main };
    let k = 4.0 * std::f64::consts::PI * (1.0 - tau);
    let f = |t: f64| {
        let r = ramp(&spec, t).unwrap();
        3.0 + 1.5 * (k * (r - 2.0) / (r * r)).ln()
    };
    // ln r is nearly singular at t = T for large q; grade toward that end
    let i: f64 = graded_nodes(&Rule::new(16), 0.0, t_end, 80, 1.3).iter().map(|&(u, w)| w * f(t_end - u)).sum();
    (-gap(q) / t_end * i).exp()
}

pub fn constant_via_quadrature(q: f64, tau: f64) -> Result<f64> {
    constant_quadrature_report(q, tau).map(|r| r.value)
}

pub fn constant_quadrature_report(q: f64, tau: f64) -> Result<QuadratureReport> {
    check(q, tau)?;
    let mut prev = log_integral(q, tau, 40);
    let mut panels = 80;
    let integral = loop {
        let cur = log_integral(q, tau, panels);
        if (cur - prev).abs() <= 1e-14 * (1.0 + cur.abs()) {
            break cur;
        }
        if panels >= 2560 {
            return Err(Error::NoConverge(format!("C_q quadrature at q={q}: {prev} vs {cur}")));
        }
        prev = cur;
        panels *= 2;
    };
    let piece_sum: f64 = integral_pieces(q, tau).iter().sum();
    if (piece_sum - integral).abs() > 1e-10 * (1.0 + integral.abs()) {
        return Err(Error::NoConverge(format!("piece sum {piece_sum} vs integral {integral}")));
    }
    let value = (-3.0 * gap(q) - 1.5 * integral).exp();
    let time_form = [time_integral_constant(q, tau, 1.0), time_integral_constant(q, tau, 2.0)];
    Ok(QuadratureReport { value, integral, piece_sum, time_form })
}

pub fn decay_envelope(q: f64, tau: f64, w0_l3: f64, t: f64) -> Result<f64> {
    if !(w0_l3 >= 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("need w0 >= 0 and t > 0, got {w0_l3}, {t}")));
    }
    Ok(DecayBound::new(q, tau)?.envelope(w0_l3, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampVariant {
    Main,
    Step2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub q: f64,
    pub t_end: f64,
    pub variant: RampVariant,
}

pub fn ramp(spec: &RampSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= spec.t_end) {
        return Err(Error::Domain(format!("t={t} outside [0, {}]", spec.t_end)));
    }
    let s = t / spec.t_end;
    Ok(match spec.variant {
        RampVariant::Main => 1.0 / ((1.0 / spec.q - 1.0 / 3.0) * s + 1.0 / 3.0),
        RampVariant::Step2 => 1.0 / (-s / 15.0 + 0.4),
    })
}
