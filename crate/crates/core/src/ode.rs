//! Dormand-Prince 5(4) for scalar ODEs `dy/dt = f(t, y)`.
//!
//! The stepper lands exactly on requested output times, so a caller can walk
//! an export grid while the internal step size adapts freely in between.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Order of the propagated solution.
pub const ORDER: u32 = 5;

/// One Dormand-Prince step; returns `(y_new, error_estimate)`.
pub fn dopri_step<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, y + h * A21 * k1);
    let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = f(t + h, y_new);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y_new, err)
}

#[derive(Debug, Clone, Copy)]
pub enum Stepping {
    Adaptive { rtol: f64, atol: f64 },
    /// One step per requested output interval.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// `|y|` exceeded the guard at time `t`.
    Guard { t: f64 },
    /// Step size underflow or step budget exhausted at time `t`.
    Stall { t: f64 },
}

/// Stateful stepper carrying the adapted step size between output times.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub stepping: Stepping,
    pub guard: f64,
    pub h: f64,
    pub max_steps: usize,
    pub steps: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(stepping: Stepping, guard: f64, h0: f64) -> Self {
        Self { stepping, guard, h: h0, max_steps: 1_000_000, steps: 0, rejected: 0 }
    }

    /// Advance from `(t, y)` to exactly `t_end`.
    pub fn advance<F: Fn(f64, f64) -> f64>(&mut self, f: &F, t: f64, y: f64, t_end: f64) -> Result<f64, Stop> {
        let (rtol, atol) = match self.stepping {
            Stepping::Fixed => {
                let (y_new, _) = dopri_step(f, t, y, t_end - t);
                self.steps += 1;
                if !y_new.is_finite() || y_new.abs() > self.guard {
                    return Err(Stop::Guard { t: t_end });
                }
                return Ok(y_new);
            }
            Stepping::Adaptive { rtol, atol } => (rtol, atol),
        };
        let dir = (t_end - t).signum();
        let span = (t_end - t).abs();
        let mut t = t;
        let mut y = y;
        let h_min = 1e-14 * (1.0 + t.abs());
        loop {
            let remaining = (t_end - t).abs();
            if remaining <= 1e-15 * (1.0 + t_end.abs()) {
                return Ok(y);
            }
            if self.steps >= self.max_steps {
                return Err(Stop::Stall { t });
            }
            let mut h = self.h.abs().min(span.max(h_min)).max(h_min);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let (y_new, err) = dopri_step(f, t, y, dir * h);
            let scale = atol + rtol * y.abs().max(y_new.abs());
            let en = if y_new.is_finite() { err.abs() / scale } else { f64::INFINITY };
            if en <= 1.0 {
                self.steps += 1;
                t = if last { t_end } else { t + dir * h };
                y = y_new;
                if y.abs() > self.guard {
                    return Err(Stop::Guard { t });
                }
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                // a clipped final step says nothing about the natural step size
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
            } else {
                self.rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                self.h = h * fac;
                if self.h < h_min {
                    if y.abs() > 0.5 * self.guard || !en.is_finite() {
                        return Err(Stop::Guard { t });
                    }
                    return Err(Stop::Stall { t });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_adaptive() {
        let f = |_t: f64, y: f64| -y;
        let mut s = Dopri5::new(Stepping::Adaptive { rtol: 1e-12, atol: 1e-14 }, 1e9, 0.1);
        let y = s.advance(&f, 0.0, 1.0, 2.0).unwrap();
        assert!((y - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_integration() {
        let f = |t: f64, _y: f64| t.cos();
        let mut s = Dopri5::new(Stepping::Adaptive { rtol: 1e-12, atol: 1e-14 }, 1e9, 0.1);
        let y = s.advance(&f, 0.0, 0.0, -1.0).unwrap();
        assert!((y - (-1.0f64).sin()).abs() < 1e-11);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let f = |_t: f64, y: f64| y * y;
        let exact = |t: f64| 1.0 / (1.0 - t);
        let run = |n: usize| {
            let mut s = Dopri5::new(Stepping::Fixed, 1e9, 0.0);
            let h = 0.5 / n as f64;
            let mut y = 1.0;
            for i in 0..n {
                y = s.advance(&f, i as f64 * h, y, (i + 1) as f64 * h).unwrap();
            }
            (y - exact(0.5)).abs()
        };
        let ratio = run(40) / run(80);
        assert!(ratio > 16.0 && ratio < 40.0, "ratio {ratio}");
    }

    #[test]
    fn riccati_blowup_hits_guard() {
        let f = |_t: f64, y: f64| y * y;
        let mut s = Dopri5::new(Stepping::Adaptive { rtol: 1e-10, atol: 1e-12 }, 100.0, 0.1);
        match s.advance(&f, 0.0, 1.0, 2.0) {
            Err(Stop::Guard { t }) => assert!(t < 1.0 && t > 0.95),
            other => panic!("expected guard stop, got {other:?}"),
        }
    }
}
