//! Stable-law parameters in the 1- and 0-parameterizations and the derived
//! scalars every formula branches on.
//!
//! `S(alpha, beta, gamma, delta; 1)` has characteristic function
//! `exp(-gamma^alpha [|u|^alpha + i beta eta(u, alpha)] + i u delta)`.
//! The 0-parameterization shares `alpha`, `beta`, `gamma` and differs only in
//! the location.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StableError};
use crate::special::tan_half_pi;

/// Indices within this distance of 1 are treated as exactly 1.
pub const ALPHA_ONE_SNAP: f64 = 1e-8;

/// True when `alpha` is (after snapping) the Cauchy-type index 1.
#[inline]
pub fn is_alpha_one(alpha: f64) -> bool {
    alpha == 1.0
}

fn snap_alpha(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_SNAP {
        1.0
    } else {
        alpha
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(StableError::domain(format!(
            "alpha = {alpha} violates 0 < alpha < 2"
        )));
    }
    Ok(snap_alpha(alpha))
}

pub(crate) fn check_beta(beta: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&beta) {
        return Err(StableError::domain(format!(
            "beta = {beta} violates -1 <= beta <= 1"
        )));
    }
    Ok(beta)
}

fn check_scale_location(gamma: f64, delta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(StableError::domain(format!(
            "gamma = {gamma} violates gamma > 0"
        )));
    }
    if !delta.is_finite() {
        return Err(StableError::domain(format!("delta = {delta} is not finite")));
    }
    Ok(())
}

/// Parameters of `S(alpha, beta, gamma, delta; 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams1 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Parameters of `S(alpha, beta, gamma, delta0; 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams0 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta0: f64,
}

/// Scalars derived from the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub delta_star: f64,
    /// `-beta tan(pi alpha / 2)`; `None` at `alpha = 1`.
    pub zeta: Option<f64>,
    pub theta0: f64,
}

impl StableParams1 {
    /// Validates the parameters and snaps `alpha` to 1 when within
    /// [`ALPHA_ONE_SNAP`].
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let alpha = check_alpha(alpha)?;
        let beta = check_beta(beta)?;
        check_scale_location(gamma, delta)?;
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// `S(alpha, beta, 1, 0; 1)`.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma, self.delta)
    }

    /// Parameters of `-X`.
    pub fn reflected(&self) -> Self {
        Self {
            beta: -self.beta,
            delta: -self.delta,
            ..*self
        }
    }

    /// Parameters of `X - a`.
    pub fn shifted(&self, a: f64) -> Self {
        Self {
            delta: self.delta - a,
            ..*self
        }
    }

    pub fn delta_star(&self) -> f64 {
        delta_star(self)
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities {
            delta_star: delta_star(self),
            zeta: zeta(self.alpha, self.beta),
            theta0: theta0(self.alpha, self.beta),
        }
    }

    /// The same law in the 0-parameterization.
    pub fn to_param0(&self) -> StableParams0 {
        let shift = if is_alpha_one(self.alpha) {
            FRAC_2_PI * self.beta * self.gamma * self.gamma.ln()
        } else {
            self.beta * self.gamma * tan_half_pi(self.alpha)
        };
        StableParams0 {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta0: self.delta + shift,
        }
    }

    /// True when the law is strictly stable with zero location, the
    /// setting of the closed-form moment.
    pub fn is_strictly_stable(&self) -> bool {
        self.delta == 0.0 && (!is_alpha_one(self.alpha) || self.beta == 0.0)
    }
}

impl StableParams0 {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta0: f64) -> Result<Self> {
        let alpha = check_alpha(alpha)?;
        let beta = check_beta(beta)?;
        check_scale_location(gamma, delta0)?;
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta0,
        })
    }

    /// The same law in the 1-parameterization.
    pub fn to_param1(&self) -> StableParams1 {
        let shift = if is_alpha_one(self.alpha) {
            FRAC_2_PI * self.beta * self.gamma * self.gamma.ln()
        } else {
            self.beta * self.gamma * tan_half_pi(self.alpha)
        };
        StableParams1 {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta0 - shift,
        }
    }
}

impl From<StableParams0> for StableParams1 {
    fn from(p: StableParams0) -> Self {
        p.to_param1()
    }
}

impl From<StableParams1> for StableParams0 {
    fn from(p: StableParams1) -> Self {
        p.to_param0()
    }
}

/// `eta(u, alpha)`: `-(sign u) tan(pi alpha/2) |u|^alpha` for `alpha != 1`,
/// `(2/pi) u ln|u|` for `alpha = 1` (0 at `u = 0`).
pub fn eta(u: f64, alpha: f64) -> Result<f64> {
    let alpha = check_alpha(alpha)?;
    if !u.is_finite() {
        return Err(StableError::domain(format!("u = {u} is not finite")));
    }
    Ok(eta_unchecked(u, alpha))
}

#[inline]
pub(crate) fn eta_unchecked(u: f64, alpha: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    if is_alpha_one(alpha) {
        FRAC_2_PI * u * u.abs().ln()
    } else {
        -u.signum() * tan_half_pi(alpha) * u.abs().powf(alpha)
    }
}

/// Standardized location `delta*`.
pub fn delta_star(p: &StableParams1) -> f64 {
    if is_alpha_one(p.alpha) {
        p.delta / p.gamma + FRAC_2_PI * p.beta * p.gamma.ln()
    } else {
        p.delta / p.gamma
    }
}

/// `zeta = -beta tan(pi alpha / 2)`, undefined at `alpha = 1`.
pub fn zeta(alpha: f64, beta: f64) -> Option<f64> {
    if is_alpha_one(alpha) {
        None
    } else if beta == 0.0 {
        Some(0.0)
    } else {
        Some(-beta * tan_half_pi(alpha))
    }
}

/// Zolotarev angle `alpha^{-1} arctan(beta tan(pi alpha/2))`.
///
/// At `alpha = 1` this returns the limit of the general formula,
/// `sign(beta) pi/2`, and 0 for `beta = 0`.
pub fn theta0(alpha: f64, beta: f64) -> f64 {
    let alpha = snap_alpha(alpha);
    if beta == 0.0 {
        return 0.0;
    }
    if is_alpha_one(alpha) {
        return FRAC_PI_2.copysign(beta);
    }
    (beta * tan_half_pi(alpha)).atan() / alpha
}

/// `cos(alpha theta0) = (1 + zeta^2)^{-1/2}` for `alpha != 1`.
pub(crate) fn cos_alpha_theta0(alpha: f64, beta: f64) -> f64 {
    match zeta(alpha, beta) {
        Some(z) => 1.0 / z.hypot(1.0),
        None => (alpha * theta0(alpha, beta)).cos(),
    }
}

/// Asymptotic tail constant: `P(X > x) ~ tail_constant(alpha) (1 + beta) gamma^alpha x^{-alpha}`.
pub fn tail_constant(alpha: f64) -> f64 {
    crate::special::gamma(alpha) * (PI * alpha / 2.0).sin() / PI
}
