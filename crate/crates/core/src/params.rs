//! Parameter tuple `(c1, c2, c3, gamma)` and the algebra of the endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the reduced ODE
/// `(1-y^2) U' + 2 y U + U^2/2 = c1 (1-y) + c2 (1+y) + c3 (1-y^2)` with `U(0) = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma: f64,
}

impl HomParams {
    pub fn new(c1: f64, c2: f64, c3: f64, gamma: f64) -> Self {
        Self { c1, c2, c3, gamma }
    }

    pub fn c(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Parameters of `V(y) = -U(-y)`.
    pub fn reflected(&self) -> Self {
        Self::new(self.c2, self.c1, self.c3, -self.gamma)
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0.0 && self.c2 == 0.0 && self.c3 == 0.0 && self.gamma == 0.0
    }

    pub fn norm(&self) -> f64 {
        (self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3 + self.gamma * self.gamma).sqrt()
    }

    /// Right-hand side `c1 (1-y) + c2 (1+y) + c3 (1-y^2)` given accurate `1-y` and `1+y`.
    pub fn forcing(&self, one_minus: f64, one_plus: f64) -> f64 {
        self.c1 * one_minus + self.c2 * one_plus + self.c3 * one_minus * one_plus
    }

    /// Membership in J, with `tol` slack on the `c3` bound.
    pub fn in_j(&self, tol: f64) -> bool {
        self.c1 >= -1.0
            && self.c2 >= -1.0
            && self.c3 >= cbar3(self.c1, self.c2).unwrap_or(f64::INFINITY) - tol
    }

    /// Magnitude above which a trajectory is declared blown up.
    pub fn guard_bound(&self) -> f64 {
        10.0 * (4.0
            + 2.0 * (1.0 + self.c1).max(0.0).sqrt()
            + 2.0 * (1.0 + self.c2).max(0.0).sqrt()
            + self.gamma.abs())
    }
}

/// Lower bound of `c3` for membership in J.
pub fn cbar3(c1: f64, c2: f64) -> Result<f64> {
    if !(c1 >= -1.0 && c2 >= -1.0) {
        return Err(Error::Domain(format!("cbar3 needs c1, c2 >= -1, got ({c1}, {c2})")));
    }
    let s = (1.0 + c1).sqrt() + (1.0 + c2).sqrt();
    Ok(-0.5 * s * (s + 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    OutsideJ,
    InJ,
    InM,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::OutsideJ => "outside_J",
            Classification::InJ => "in_J",
            Classification::InM => "in_M",
        }
    }
}

/// Which endpoint branch a profile realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `gamma = gamma^+`: `U(-1) = 2 + 2 sqrt(1+c1)`.
    PlusExtremal,
    /// `gamma = gamma^-`: `U(1) = -2 - 2 sqrt(1+c2)`.
    MinusExtremal,
    /// `gamma^- = gamma^+`: both extremal values at once.
    Degenerate,
    Interior,
}

/// Roots of `U^2 - 4U - 4c1 = 0` at `y = -1`: `(2 - 2 sqrt(1+c1), 2 + 2 sqrt(1+c1))`.
pub fn left_roots(c1: f64) -> (f64, f64) {
    let m = (1.0 + c1).max(0.0).sqrt();
    (2.0 - 2.0 * m, 2.0 + 2.0 * m)
}

/// Roots of `U^2 + 4U - 4c2 = 0` at `y = 1`: `(-2 - 2 sqrt(1+c2), -2 + 2 sqrt(1+c2))`.
pub fn right_roots(c2: f64) -> (f64, f64) {
    let m = (1.0 + c2).max(0.0).sqrt();
    (-2.0 - 2.0 * m, -2.0 + 2.0 * m)
}

/// `(U(-1), U(1))` on the given branch.
pub fn endpoint_values(params: &HomParams, branch: Branch) -> (f64, f64) {
    let (l_lo, l_hi) = left_roots(params.c1);
    let (r_lo, r_hi) = right_roots(params.c2);
    match branch {
        Branch::PlusExtremal => (l_hi, r_hi),
        Branch::MinusExtremal => (l_lo, r_lo),
        Branch::Degenerate => (l_hi, r_lo),
        Branch::Interior => (l_lo, r_hi),
    }
}

/// Endpoint quadratic defects `(U(-1)^2 - 4U(-1) - 4c1, U(1)^2 + 4U(1) - 4c2)`.
pub fn endpoint_defects(params: &HomParams, minus: f64, plus: f64) -> (f64, f64) {
    (
        minus * minus - 4.0 * minus - 4.0 * params.c1,
        plus * plus + 4.0 * plus - 4.0 * params.c2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbar3_values() {
        assert_eq!(cbar3(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(cbar3(-1.0, -1.0).unwrap(), 0.0);
        assert_eq!(cbar3(3.0, 0.0).unwrap(), -7.5);
        assert!(cbar3(-1.5, 0.0).is_err());
    }

    #[test]
    fn branch_values() {
        let p = HomParams::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(endpoint_values(&p, Branch::Interior), (0.0, 0.0));
        assert_eq!(endpoint_values(&p, Branch::PlusExtremal), (4.0, 0.0));
        let q = HomParams::new(3.0, 0.0, 0.0, 0.0);
        assert_eq!(endpoint_values(&q, Branch::MinusExtremal), (-2.0, -4.0));
    }

    #[test]
    fn roots_solve_quadratics() {
        for c in [-1.0, -0.3, 0.0, 2.5] {
            let p = HomParams::new(c, c, 0.0, 0.0);
            for b in [Branch::PlusExtremal, Branch::MinusExtremal, Branch::Interior, Branch::Degenerate] {
                let (m, pl) = endpoint_values(&p, b);
                let (dm, dp) = endpoint_defects(&p, m, pl);
                assert!(dm.abs() < 1e-12 && dp.abs() < 1e-12);
            }
        }
    }
}
