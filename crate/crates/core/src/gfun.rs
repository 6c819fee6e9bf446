//! The special functions
//!
//! ```text
//! g_d(x|α,β) = ∫₀^∞ cos(xr + βη(r,α)) r^{d-1} e^{-r^α} dr          d > 0
//!            = ∫₀^∞ [cos(xr + βη(r,α)) - 1] r^{d-1} e^{-r^α} dr    -2min(1,α) < d ≤ 0
//! g̃_d(x|α,β) = ∫₀^∞ sin(xr + βη(r,α)) r^{d-1} e^{-r^α} dr          d > -min(1,α)
//!            = ∫₀^∞ [sin(xr + βη(r,α)) - xr] r^{d-1} e^{-r^α} dr   α > 1, -α < d ≤ -1
//! ```
//!
//! and their closed forms at `x = 0`.
//!
//! Near `r = 0` the weight `r^{d-1}` can overflow while the bracket
//! underflows, so the integrands fold the weight into the phase before
//! multiplying: `(cos φ - 1) r^{d-1} = -2 (sin(φ/2) r^{(d-1)/2})²` and so on,
//! with `φ r^k` assembled from single powers of `r`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StableError};
use crate::params::{check_alpha, check_beta, cos_alpha_theta0, is_alpha_one, theta0};
use crate::quad::{
    choose_cutoff, integrate_damped_oscillatory_with, integrate_decaying, integrate_near_zero,
    integrate_with_breaks, QuadConfig, QuadResult,
};
use crate::special::{gamma, sin_minus_id_over_cube, sinc, tan_half_pi};

/// Selects `g_d` (cosine transform) or `g̃_d` (sine transform).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GKind {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "gt")]
    GTilde,
}

/// Which defining integral applies for a given order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plain,
    /// The `- 1` (for `g`) or `- xr` (for `g̃`) subtracted integrand.
    Subtracted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunQuery {
    pub d: f64,
    pub x: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cfg: QuadConfig,
}

impl GFunQuery {
    pub fn new(d: f64, x: f64, alpha: f64, beta: f64) -> Self {
        Self {
            d,
            x,
            alpha,
            beta,
            cfg: QuadConfig::default(),
        }
    }

    pub fn with_cfg(mut self, cfg: QuadConfig) -> Self {
        self.cfg = cfg;
        self
    }
}

/// Branch of the definition used for `kind` at order `d`, or a domain error.
pub fn branch(kind: GKind, d: f64, alpha: f64) -> Result<Branch> {
    let alpha = check_alpha(alpha)?;
    if !d.is_finite() {
        return Err(StableError::domain(format!("order d = {d} is not finite")));
    }
    let m = alpha.min(1.0);
    match kind {
        GKind::G if d > 0.0 => Ok(Branch::Plain),
        GKind::G if d > -2.0 * m => Ok(Branch::Subtracted),
        GKind::G => Err(StableError::domain(format!(
            "g_d needs d > -2 min(1, alpha) = {}, got d = {d}",
            -2.0 * m
        ))),
        GKind::GTilde if d > -m => Ok(Branch::Plain),
        GKind::GTilde if alpha > 1.0 && d > -alpha && d <= -1.0 => Ok(Branch::Subtracted),
        GKind::GTilde => Err(StableError::domain(format!(
            "g~_d needs d > -min(1, alpha), or alpha > 1 and -alpha < d <= -1; got d = {d}, alpha = {alpha}"
        ))),
    }
}

/// Phase `φ(r) = x r + β η(r, α)` for `r > 0`.
#[derive(Debug, Clone, Copy)]
struct Phase {
    x: f64,
    beta: f64,
    alpha: f64,
    tan: f64,
    alpha_one: bool,
}

impl Phase {
    fn new(x: f64, alpha: f64, beta: f64) -> Self {
        let alpha_one = is_alpha_one(alpha);
        Self {
            x,
            beta,
            alpha,
            tan: if alpha_one { 0.0 } else { tan_half_pi(alpha) },
            alpha_one,
        }
    }

    /// `β η(r, α) r^k`
    #[inline]
    fn skew_times_pow(&self, r: f64, k: f64) -> f64 {
        if self.beta == 0.0 {
            0.0
        } else if self.alpha_one {
            self.beta * FRAC_2_PI * r.powf(1.0 + k) * r.ln()
        } else {
            -self.beta * self.tan * r.powf(self.alpha + k)
        }
    }

    #[inline]
    fn value(&self, r: f64) -> f64 {
        self.x * r + self.skew_times_pow(r, 0.0)
    }

    /// `φ(r) r^k`
    #[inline]
    fn times_pow(&self, r: f64, k: f64) -> f64 {
        let lin = if self.x == 0.0 {
            0.0
        } else {
            self.x * r.powf(1.0 + k)
        };
        lin + self.skew_times_pow(r, k)
    }

    /// `|φ'(r)|`
    #[inline]
    fn frequency(&self, r: f64) -> f64 {
        self.slope(r).abs()
    }

    /// `φ'(r)`
    #[inline]
    fn slope(&self, r: f64) -> f64 {
        let skew = if self.beta == 0.0 {
            0.0
        } else if self.alpha_one {
            self.beta * FRAC_2_PI * (r.ln() + 1.0)
        } else {
            -self.beta * self.alpha * self.tan * r.powf(self.alpha - 1.0)
        };
        self.x + skew
    }
}

/// Oscillation count past which `[RAY_START, ∞)` is integrated along a ray
/// in the complex plane instead of the real axis.
const RAY_MIN_CYCLES: f64 = 200.0;
const RAY_START: f64 = 1.0;
/// Shallower rays decay too slowly along their length to pay off.
const RAY_MIN_ANGLE: f64 = 0.05;
const RAY_PROBES: usize = 64;
/// Largest tolerated growth of `ln|integrand|` along the ray.
const RAY_MAX_RISE: f64 = 3.0;

/// Signed angle of a ray from `RAY_START` along which `e^{iφ(r) - r^α}`
/// decays without oscillating much, or `None` when the linear term does
/// not dominate the phase at large `r`.
fn ray_angle(phase: &Phase, cutoff: f64) -> Option<f64> {
    // turn towards the side where the phase grows at large r
    let sigma = phase.slope(cutoff).signum();
    if phase.slope(cutoff) == 0.0 {
        return None;
    }
    let cap = 0.45 * PI;
    if phase.alpha_one {
        // r ln r grows faster than r, so the skew must push the same way
        return (phase.beta * sigma >= 0.0).then_some(sigma * cap);
    }
    let alpha = phase.alpha;
    if alpha < 1.0 && phase.x * sigma <= 0.0 {
        // the linear term dominates far out and would grow along the ray
        return None;
    }
    // Re[(1 + iβT) e^{iαθ}] = cos αθ - βT sin αθ must stay positive for
    // 0 ≤ σθ ≤ σφ.
    let mut limit = cap.min(0.9 * 0.5 * PI / alpha);
    let push = phase.beta * phase.tan * sigma;
    if push > 0.0 {
        limit = limit.min(0.9 * (1.0 / push).atan() / alpha);
    }
    Some(sigma * limit)
}

/// `∫_{r0}^∞ r^{k-1} e^{-r^α} dr`, as `α⁻¹ ∫_{r0^α}^∞ t^{k/α-1} e^{-t} dt`.
fn power_exp_tail(k: f64, alpha: f64, r0: f64, cfg: &QuadConfig) -> QuadResult {
    let a = k / alpha;
    let t0 = r0.powf(alpha);
    let t1 = choose_cutoff(1.0, a, cfg.tail_epsilon).max(t0 + 1.0);
    let n = (t1 - t0).ceil() as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
    let mut res = integrate_with_breaks(|t: f64| t.powf(a - 1.0) * (-t).exp(), &breaks, cfg);
    res.value /= alpha;
    res.error_estimate /= alpha;
    res
}

/// `∫₀^∞` of the `kind`/`branch` integrand, with `[RAY_START, ∞)` moved
/// onto the ray `r = RAY_START + ρ e^{iθ}`. By Cauchy's theorem the two
/// agree whenever [`ray_angle`] gives an angle.
fn evaluate_on_ray(kind: GKind, br: Branch, d: f64, phase: Phase, cfg: &QuadConfig) -> Option<QuadResult> {
    let alpha = phase.alpha;
    let cutoff = choose_cutoff(alpha, d, cfg.tail_epsilon);
    if cutoff <= 2.0 * RAY_START {
        return None;
    }
    // total variation of the phase over [RAY_START, cutoff]
    let n = 64;
    let ratio = (cutoff / RAY_START).powf(1.0 / n as f64);
    let variation: f64 = (0..n)
        .map(|i| {
            let r = RAY_START * ratio.powi(i);
            (phase.value(r * ratio) - phase.value(r)).abs()
        })
        .sum();
    if variation / (2.0 * PI) < RAY_MIN_CYCLES {
        return None;
    }
    let theta = ray_angle(&phase, cutoff)?;
    if theta.abs() < RAY_MIN_ANGLE {
        return None;
    }
    let dir = Complex64::from_polar(1.0, theta);
    let exponent = move |r: Complex64| -> Complex64 {
        let i = Complex64::i();
        if phase.alpha_one {
            i * phase.x * r + i * phase.beta * FRAC_2_PI * r * r.ln() - r
        } else {
            i * phase.x * r - Complex64::new(1.0, phase.beta * phase.tan) * r.powf(alpha)
        }
    };
    let log_modulus = move |rho: f64| {
        let r = RAY_START + rho * dir;
        exponent(r).re + (d - 1.0) * r.norm().ln()
    };
    let ray = move |rho: f64| {
        let r = RAY_START + rho * dir;
        let v = (exponent(r) + (d - 1.0) * r.ln()).exp() * dir;
        match kind {
            GKind::G => v.re,
            GKind::GTilde => v.im,
        }
    };
    let step = PI / (phase.frequency(RAY_START).max(phase.frequency(cutoff)) + 1.0);
    // A transient rise along the ray would be cancelled in floating point.
    let start = log_modulus(0.0);
    let rise = (1..=RAY_PROBES)
        .map(|k| log_modulus(step * k as f64) - start)
        .fold(f64::NEG_INFINITY, f64::max);
    if rise > RAY_MAX_RISE {
        return None;
    }
    let outer = integrate_decaying(ray, step, cfg);
    let subtracted = match (kind, br) {
        (_, Branch::Plain) => None,
        (GKind::G, Branch::Subtracted) => Some((d, 1.0)),
        (GKind::GTilde, Branch::Subtracted) => Some((d + 1.0, phase.x)),
    }
    .map(|(k, scale)| {
        let mut t = power_exp_tail(k, alpha, RAY_START, cfg);
        t.value *= scale;
        t.error_estimate *= scale.abs();
        t
    });
    let inner = integrate_near_zero(integrand(kind, br, d, phase), |r| phase.frequency(r), RAY_START, cfg);
    let mut res = QuadResult {
        value: inner.value + outer.value,
        error_estimate: inner.error_estimate + outer.error_estimate,
        subdivisions_used: inner.subdivisions_used + outer.subdivisions_used,
        converged: inner.converged && outer.converged,
    };
    if let Some(t) = subtracted {
        res.value -= t.value;
        res.error_estimate += t.error_estimate;
        res.subdivisions_used += t.subdivisions_used;
        res.converged &= t.converged;
    }
    Some(res)
}

/// The integrand of `kind` on `branch`, including the envelope.
fn integrand(kind: GKind, branch: Branch, d: f64, phase: Phase) -> impl Fn(f64) -> f64 {
    let e = d - 1.0;
    let alpha = phase.alpha;
    move |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let env = (-r.powf(alpha)).exp();
        let phi = phase.value(r);
        let small = phi.abs() < 1.0;
        let bracket = match (kind, branch) {
            (GKind::G, Branch::Plain) => phi.cos() * r.powf(e),
            (GKind::G, Branch::Subtracted) => {
                let s = if small {
                    sinc(0.5 * phi) * 0.5 * phase.times_pow(r, 0.5 * e)
                } else {
                    (0.5 * phi).sin() * r.powf(0.5 * e)
                };
                -2.0 * s * s
            }
            (GKind::GTilde, Branch::Plain) => {
                if small {
                    sinc(phi) * phase.times_pow(r, e)
                } else {
                    phi.sin() * r.powf(e)
                }
            }
            (GKind::GTilde, Branch::Subtracted) => {
                // sin φ - xr = (sin φ - φ) + β η
                let cubic = if small {
                    let c = phase.times_pow(r, e / 3.0);
                    sin_minus_id_over_cube(phi) * c * c * c
                } else {
                    (phi.sin() - phi) * r.powf(e)
                };
                cubic + phase.skew_times_pow(r, e)
            }
        };
        bracket * env
    }
}

/// Evaluates `g_d` or `g̃_d` and returns the raw quadrature result.
pub fn evaluate(kind: GKind, q: &GFunQuery) -> Result<QuadResult> {
    q.cfg.validate()?;
    let alpha = check_alpha(q.alpha)?;
    let beta = check_beta(q.beta)?;
    if !q.x.is_finite() {
        return Err(StableError::domain(format!("x = {} is not finite", q.x)));
    }
    let br = branch(kind, q.d, alpha)?;
    let phase = Phase::new(q.x, alpha, beta);
    // Near the lower end of the plain ranges the weight r^{d-1} makes the
    // integral large and slowly convergent at 0. Integrate the subtracted
    // integrand instead and add back the subtracted term in closed form:
    // ∫ r^{d-1} e^{-r^α} = Γ(d/α)/α and ∫ x r^d e^{-r^α} = x Γ((d+1)/α)/α.
    let (br, extra) = match (kind, br) {
        (GKind::G, Branch::Plain) if q.d < 0.5 => {
            (Branch::Subtracted, gamma(q.d / alpha) / alpha)
        }
        (GKind::GTilde, Branch::Plain) if q.d < -0.5 => (
            Branch::Subtracted,
            if q.x == 0.0 {
                0.0
            } else {
                q.x * gamma((q.d + 1.0) / alpha) / alpha
            },
        ),
        _ => (br, 0.0),
    };
    let f = integrand(kind, br, q.d, phase);
    let run = |cfg: &QuadConfig| {
        let (mut res, rotated) = match evaluate_on_ray(kind, br, q.d, phase, cfg) {
            Some(res) if res.converged => (res, true),
            _ => (
                integrate_damped_oscillatory_with(&f, |r| phase.frequency(r), alpha, q.d, cfg),
                false,
            ),
        };
        res.value += extra;
        (res, rotated)
    };
    let (mut res, rotated) = run(&q.cfg);
    // Added or split-off terms may cancel most of the integral, so the
    // tolerance met by each piece can be too loose for the sum.
    let want = q.cfg.target(res.value);
    if (extra != 0.0 || rotated) && res.value.is_finite() && res.error_estimate > want {
        res = run(&QuadConfig {
            abs_tol: 0.5 * want,
            rel_tol: f64::MIN_POSITIVE,
            ..q.cfg
        })
        .0;
    }
    res.converged = res.value.is_finite() && res.error_estimate <= q.cfg.target(res.value);
    Ok(res)
}

/// `g_d(x|α,β)`. Non-convergence is an error carrying the best estimate.
pub fn g(q: &GFunQuery) -> Result<f64> {
    evaluate(GKind::G, q)?.into_result()
}

/// `g̃_d(x|α,β)`.
pub fn g_tilde(q: &GFunQuery) -> Result<f64> {
    evaluate(GKind::GTilde, q)?.into_result()
}

pub fn eval(kind: GKind, q: &GFunQuery) -> Result<f64> {
    evaluate(kind, q)?.into_result()
}

/// Closed forms of `g_d(0|α,β)` and `g̃_d(0|α,β)` for `α ≠ 1`.
pub fn closed_form_at_zero(d: f64, alpha: f64, beta: f64, kind: GKind) -> Result<f64> {
    let alpha = check_alpha(alpha)?;
    let beta = check_beta(beta)?;
    if is_alpha_one(alpha) {
        return Err(StableError::domain(
            "closed forms at x = 0 need alpha != 1",
        ));
    }
    if !(d > -alpha) || !d.is_finite() {
        return Err(StableError::domain(format!(
            "closed forms at x = 0 need d > -alpha = {}, got d = {d}",
            -alpha
        )));
    }
    let th = theta0(alpha, beta);
    let c = cos_alpha_theta0(alpha, beta);
    if d == 0.0 {
        return Ok(match kind {
            GKind::G => c.ln() / alpha,
            GKind::GTilde => -th,
        });
    }
    let scale = c.powf(d / alpha) * gamma(1.0 + d / alpha) / d;
    Ok(match kind {
        GKind::G if d > 0.0 => c.powf(d / alpha) * (d * th).cos() * gamma(1.0 + d / alpha) / d,
        GKind::G => (c.powf(d / alpha) * (d * th).cos() - 1.0) * gamma(1.0 + d / alpha) / d,
        GKind::GTilde => -scale * (d * th).sin(),
    })
}

/// `h(x|1,0) = ∫₀^∞ cos(xr) ln(r) e^{-r} dr`.
pub fn h(x: f64, cfg: &QuadConfig) -> Result<f64> {
    h_eval(x, cfg)?.into_result()
}

pub fn h_eval(x: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !x.is_finite() {
        return Err(StableError::domain(format!("x = {x} is not finite")));
    }
    let f = move |r: f64| {
        if r <= 0.0 {
            0.0
        } else {
            (x * r).cos() * r.ln() * (-r).exp()
        }
    };
    let xa = x.abs();
    Ok(integrate_damped_oscillatory_with(f, |_| xa, 1.0, 1.0, cfg))
}

/// `h` in closed form: `Re[-(γ_E + ln(1 - ix)) / (1 - ix)]`.
pub fn h_closed_form(x: f64) -> f64 {
    // -(γ + ln(1 - ix)) / (1 - ix), ln(1 - ix) = ½ln(1+x²) - i atan x
    let a = crate::special::EULER_GAMMA + 0.5 * (x * x).ln_1p();
    let b = -x.atan();
    // (a + ib)(1 + ix) / (1 + x²), real part (a - b x) / (1 + x²)
    -(a - b * x) / (1.0 + x * x)
}
