//! Truncated fractional moments `E X₊ᵖ` and the quantities built from them.
//!
//! With `δ*` the standardized location and `m^p = E X₊ᵖ`:
//!
//! ```text
//! p = 0          1/2 - g̃_0(-δ*)/π
//! 0 < p < 1∧α    γᵖ Γ(p+1)/π [ sin(πp/2)(Γ(1-p/α)/p - g_{-p}(-δ*)) - cos(πp/2) g̃_{-p}(-δ*) ]
//! p = 1 < α      γ [ δ*/2 + (Γ(1-1/α) - g_{-1}(-δ*))/π ]
//! 1 < p < α      γᵖ Γ(p+1)/π [ sin(πp/2)(Γ(1-p/α)/p - g_{-p}(-δ*))
//!                              + cos(πp/2)((δ*/α) Γ((1-p)/α) - g̃_{-p}(-δ*)) ]
//! ```
//!
//! `E X₋ᵖ` is `m^p` of `-X`. For `-1 < p < 0` the conjectured expression
//! `γᵖ Γ(p+1)/π [-sin(πp/2) g_{-p}(-δ*) - cos(πp/2) g̃_{-p}(-δ*)]` is
//! available, always flagged experimental.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dist::{self, TailSeries, TAIL_SERIES_THRESHOLD};
use crate::error::{Result, StableError};
use crate::gfun::{closed_form_at_zero, eval, GFunQuery, GKind};
use crate::params::{cos_alpha_theta0, is_alpha_one, theta0, StableParams1};
use crate::quad::QuadConfig;
use crate::special::gamma;

/// Exponents closer than this to `alpha` are rejected.
pub const POLE_MARGIN: f64 = 1e-6;

/// Exponents within this distance of 1 use the dedicated `p = 1` branch.
pub const P_ONE_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    /// `E X₊ᵖ`
    Plus,
    /// `E X₋ᵖ`
    Minus,
    /// `E |X|ᵖ`
    Abs,
    /// `E X^⟨p⟩ = E |X|ᵖ sign(X)`
    Signed,
}

/// Side of the origin for truncated moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub p: f64,
    pub kind: MomentKind,
    /// Shift `a` for `E (X - a)₊ᵖ`; 0 for plain moments.
    pub a: f64,
}

impl MomentQuery {
    pub fn new(p: f64, kind: MomentKind) -> Self {
        Self { p, kind, a: 0.0 }
    }

    pub fn shifted(mut self, a: f64) -> Self {
        self.a = a;
        self
    }
}

/// A moment together with whether it rests on the unproven `p < 0` formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub experimental: bool,
}

impl MomentValue {
    fn proven(value: f64) -> Self {
        Self {
            value,
            experimental: false,
        }
    }
}

/// Checks `-1 < p < alpha` away from the pole.
pub fn check_exponent(p: f64, alpha: f64) -> Result<()> {
    if !p.is_finite() {
        return Err(StableError::domain(format!("p = {p} is not finite")));
    }
    if p >= alpha {
        return Err(StableError::domain(format!(
            "moments need p < alpha, got p = {p}, alpha = {alpha}"
        )));
    }
    if p > alpha - POLE_MARGIN {
        return Err(StableError::PoleProximity {
            p,
            alpha,
            margin: POLE_MARGIN,
        });
    }
    if p <= -1.0 {
        return Err(StableError::domain(format!(
            "moments need p > -1, got p = {p}"
        )));
    }
    Ok(())
}

/// `g_d(x)` or `g̃_d(x)`, using the closed form at `x = 0` when `α ≠ 1`.
fn gfun_at(kind: GKind, d: f64, x: f64, p: &StableParams1, cfg: &QuadConfig) -> Result<f64> {
    if x == 0.0 && !is_alpha_one(p.alpha) && d > -p.alpha {
        return closed_form_at_zero(d, p.alpha, p.beta, kind);
    }
    eval(kind, &GFunQuery::new(d, x, p.alpha, p.beta).with_cfg(*cfg))
}

fn snapped_one(p: f64, alpha: f64) -> bool {
    alpha > 1.0 && (p - 1.0).abs() < P_ONE_SNAP
}

/// `E X₊ᵖ` for `0 ≤ p < α`.
pub fn truncated_moment_plus(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<f64> {
    let params = params.validate()?;
    let alpha = params.alpha;
    check_exponent(p, alpha)?;
    if p < 0.0 {
        return Err(StableError::domain(format!(
            "truncated moments need p >= 0, got p = {p}; negative orders use the conjectured formula"
        )));
    }
    if p == 0.0 {
        return dist::prob_positive(&params, cfg);
    }
    let ds = params.delta_star();
    let x = -ds;
    if x >= 0.0 && dist::outside_support(x + f64::MIN_POSITIVE, alpha, params.beta) {
        return Ok(0.0);
    }
    let scale = params.gamma.powf(p);
    if let Some(v) = far_tail_moment(params.alpha, params.beta, x, p) {
        return Ok(scale * v);
    }
    if snapped_one(p, alpha) {
        let g = gfun_at(GKind::G, -1.0, x, &params, cfg)?;
        return Ok(params.gamma * (0.5 * ds + (gamma(1.0 - 1.0 / alpha) - g) / PI));
    }
    let (s, c) = (FRAC_PI_2 * p).sin_cos();
    let g = gfun_at(GKind::G, -p, x, &params, cfg)?;
    let gt = gfun_at(GKind::GTilde, -p, x, &params, cfg)?;
    let even = s * (gamma(1.0 - p / alpha) / p - g);
    let odd = if p < 1.0 {
        -c * gt
    } else {
        c * (ds / alpha * gamma((1.0 - p) / alpha) - gt)
    };
    Ok(scale * gamma(p + 1.0) / PI * (even + odd))
}

/// `E (Z - z0)₊ᵖ` for standard `Z` when `|z0|` is beyond the tail-series
/// threshold, where the oscillatory integrals need `O(|z0|)` panels.
///
/// For `z0 > 0`, integrating the density expansion term by term gives
/// `∫_{z0}^∞ (z - z0)ᵖ z^{-e} dz = z0^{p+1-e} B(p+1, e-p-1)`. For `z0 < 0`
/// only `p = 1` is handled, through `E (Z - z0)₊ = -z0 + E (z0 - Z)₊`.
fn far_tail_moment(alpha: f64, beta: f64, z0: f64, p: f64) -> Option<f64> {
    if z0.abs() <= TAIL_SERIES_THRESHOLD {
        return None;
    }
    let beta_fn = |e: f64| gamma(p + 1.0) * gamma(e - p - 1.0) / gamma(e);
    if z0 > 0.0 {
        TailSeries::new(alpha, beta)?.sum_with(z0, p + 1.0, beta_fn)
    } else if snapped_one(p, alpha) {
        let w = TailSeries::new(alpha, -beta)?.sum_with(-z0, 2.0, |e| 1.0 / ((e - 1.0) * (e - 2.0)))?;
        Some(-z0 + w)
    } else {
        None
    }
}

/// `E X₋ᵖ = m^p(α, -β, γ, -δ)`.
pub fn truncated_moment_minus(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<f64> {
    truncated_moment_plus(&params.validate()?.reflected(), p, cfg)
}

fn truncated(params: &StableParams1, p: f64, side: Side, cfg: &QuadConfig) -> Result<MomentValue> {
    let params = match side {
        Side::Plus => *params,
        Side::Minus => params.reflected(),
    };
    if p < 0.0 {
        conjectured_negative_moment(&params, p, Side::Plus, cfg)
    } else {
        truncated_moment_plus(&params, p, cfg).map(MomentValue::proven)
    }
}

/// `E (X - a)₊` for `α > 1`.
pub fn shifted_positive_mean(params: &StableParams1, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let params = params.validate()?;
    if params.alpha <= 1.0 {
        return Err(StableError::domain(format!(
            "E(X - a)+ needs alpha > 1, got alpha = {}",
            params.alpha
        )));
    }
    if !a.is_finite() {
        return Err(StableError::domain(format!("a = {a} is not finite")));
    }
    truncated_moment_plus(&params.shifted(a), 1.0, cfg)
}

/// `E |X|ᵖ = E X₊ᵖ + E X₋ᵖ` for `-1 < p < α`.
pub fn abs_moment(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<MomentValue> {
    let plus = truncated(params, p, Side::Plus, cfg)?;
    let minus = truncated(params, p, Side::Minus, cfg)?;
    Ok(MomentValue {
        value: plus.value + minus.value,
        experimental: plus.experimental || minus.experimental,
    })
}

/// `E X^⟨p⟩ = E X₊ᵖ - E X₋ᵖ` for `-1 < p < α`.
pub fn signed_moment(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<MomentValue> {
    let plus = truncated(params, p, Side::Plus, cfg)?;
    let minus = truncated(params, p, Side::Minus, cfg)?;
    Ok(MomentValue {
        value: plus.value - minus.value,
        experimental: plus.experimental || minus.experimental,
    })
}

/// Closed form of `E X₊ᵖ` (or `E X₋ᵖ`) for a strictly stable law:
///
/// ```text
/// γᵖ (cos αθ₀)^{-p/α} Γ(1 - p/α) Γ(p) sin(p(π/2 ± θ₀)) / π
/// ```
///
/// which equals `Γ(1-p/α)/Γ(1-p) · sin p(π/2+θ₀)/sin pπ · (cos αθ₀)^{-p/α}`
/// by `Γ(p)Γ(1-p) = π/sin pπ`, and stays finite through `p = 1`.
/// Valid for `-1 < p < α`; `p = 0` gives `1/2 ± θ₀/π`.
pub fn strictly_stable_moment(params: &StableParams1, p: f64, side: Side) -> Result<f64> {
    let params = params.validate()?;
    if !params.is_strictly_stable() {
        return Err(StableError::domain(
            "closed form needs a strictly stable law: delta = 0, and beta = 0 when alpha = 1",
        ));
    }
    let alpha = params.alpha;
    check_exponent(p, alpha)?;
    let th = match side {
        Side::Plus => theta0(alpha, params.beta),
        Side::Minus => -theta0(alpha, params.beta),
    };
    let angle = FRAC_PI_2 + th;
    if p == 0.0 {
        return Ok(angle / PI);
    }
    let c = cos_alpha_theta0(alpha, params.beta);
    Ok(params.gamma.powf(p) * c.powf(-p / alpha) * gamma(1.0 - p / alpha) * gamma(p)
        * (p * angle).sin()
        / PI)
}

/// The conjectured `E X₊ᵖ` (or `E X₋ᵖ`) for `-1 < p < 0`. Always flagged
/// experimental.
pub fn conjectured_negative_moment(
    params: &StableParams1,
    p: f64,
    side: Side,
    cfg: &QuadConfig,
) -> Result<MomentValue> {
    let params = params.validate()?;
    if !(p > -1.0 && p < 0.0) {
        return Err(StableError::domain(format!(
            "the conjectured formula covers -1 < p < 0, got p = {p}"
        )));
    }
    let params = match side {
        Side::Plus => params,
        Side::Minus => params.reflected(),
    };
    let x = -params.delta_star();
    let (s, c) = (FRAC_PI_2 * p).sin_cos();
    let g = gfun_at(GKind::G, -p, x, &params, cfg)?;
    let gt = gfun_at(GKind::GTilde, -p, x, &params, cfg)?;
    Ok(MomentValue {
        value: params.gamma.powf(p) * gamma(p + 1.0) / PI * (-s * g - c * gt),
        experimental: true,
    })
}

/// Evaluates the moment described by `q`.
///
/// A nonzero shift `q.a` applies to `X - a`, so `Plus` with `p = 1` gives
/// `E (X - a)₊`.
pub fn moment(params: &StableParams1, q: &MomentQuery, cfg: &QuadConfig) -> Result<MomentValue> {
    let params = params.validate()?;
    if !q.a.is_finite() {
        return Err(StableError::domain(format!("a = {} is not finite", q.a)));
    }
    let shifted = params.shifted(q.a);
    match q.kind {
        MomentKind::Plus => truncated(&shifted, q.p, Side::Plus, cfg),
        MomentKind::Minus => truncated(&shifted, q.p, Side::Minus, cfg),
        MomentKind::Abs => abs_moment(&shifted, q.p, cfg),
        MomentKind::Signed => signed_moment(&shifted, q.p, cfg),
    }
}

/// Single-formula forms of `E |X|ᵖ` and `E X^⟨p⟩` exactly as printed,
/// kept to quantify how they differ from the two-sided sums.
pub mod printed {
    use super::*;

    /// `γᵖ (2Γ(p+1)/π) sin(πp/2) (δ* Γ(1-p/α)/p 1{p>0} - g_{-p}(-δ*))`.
    ///
    /// The `δ*` factor is absent from `E X₊ᵖ + E X₋ᵖ`; this disagrees with
    /// [`abs_moment`] unless `δ* = 1`.
    pub fn abs_moment(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<f64> {
        let params = params.validate()?;
        check_exponent(p, params.alpha)?;
        if p == 0.0 {
            return Ok(1.0);
        }
        let ds = params.delta_star();
        let g = gfun_at(GKind::G, -p, -ds, &params, cfg)?;
        let lead = if p > 0.0 {
            ds * gamma(1.0 - p / params.alpha) / p
        } else {
            0.0
        };
        Ok(params.gamma.powf(p) * 2.0 * gamma(p + 1.0) / PI * (FRAC_PI_2 * p).sin() * (lead - g))
    }

    /// `γᵖ (2Γ(p+1)/π) cos(πp/2) (δ* Γ((1-p)/α)/α 1{p>1} - g̃_{-p}(-δ*))`.
    pub fn signed_moment(params: &StableParams1, p: f64, cfg: &QuadConfig) -> Result<f64> {
        let params = params.validate()?;
        check_exponent(p, params.alpha)?;
        if snapped_one(p, params.alpha) {
            return Ok(params.gamma * params.delta_star());
        }
        let ds = params.delta_star();
        let gt = gfun_at(GKind::GTilde, -p, -ds, &params, cfg)?;
        let lead = if p > 1.0 {
            ds * gamma((1.0 - p) / params.alpha) / params.alpha
        } else {
            0.0
        };
        Ok(params.gamma.powf(p) * 2.0 * gamma(p + 1.0) / PI * (FRAC_PI_2 * p).cos() * (lead - gt))
    }

    /// `(δ-a)/2 + γ/π [Γ(1-1/α) - g_{-1}((δ-a)/γ)]`, with the argument sign
    /// as stated. The truncated-moment identity uses `(a-δ)/γ`; the two
    /// agree only when `β = 0` (by evenness of `g_{-1}` in `x` at `β = 0`).
    pub fn shifted_positive_mean(params: &StableParams1, a: f64, cfg: &QuadConfig) -> Result<f64> {
        let params = params.validate()?;
        if params.alpha <= 1.0 {
            return Err(StableError::domain("E(X - a)+ needs alpha > 1"));
        }
        let x = (params.delta - a) / params.gamma;
        let g = gfun_at(GKind::G, -1.0, x, &params, cfg)?;
        Ok(0.5 * (params.delta - a) + params.gamma / PI * (gamma(1.0 - 1.0 / params.alpha) - g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn sp(a: f64, b: f64, g: f64, d: f64) -> StableParams1 {
        StableParams1::new(a, b, g, d).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn plus_examples() {
        let cauchy = sp(1.0, 0.0, 1.0, 0.0);
        let v = truncated_moment_plus(&cauchy, 0.5, &cfg()).unwrap();
        assert!(close(v, FRAC_1_SQRT_2, 1e-9), "{v}");
        assert_eq!(truncated_moment_plus(&sp(0.7, 0.0, 2.0, 0.0), 0.0, &cfg()).unwrap(), 0.5);
        let v = truncated_moment_plus(&sp(1.5, 0.0, 1.0, 0.0), 1.0, &cfg()).unwrap();
        assert!(close(v, gamma(1.0 / 3.0) / PI, 1e-14));
        assert!((v - 0.852_732_620).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        let p = sp(1.5, 0.0, 1.0, 0.0);
        assert!(matches!(
            truncated_moment_plus(&p, 1.6, &cfg()),
            Err(StableError::Domain(_))
        ));
        assert!(matches!(
            truncated_moment_plus(&p, 1.5 - 1e-7, &cfg()),
            Err(StableError::PoleProximity { .. })
        ));
        assert!(truncated_moment_plus(&sp(0.9, 0.0, 1.0, 0.0), 1.0, &cfg()).is_err());
        assert!(truncated_moment_plus(&sp(1.0, 0.0, 1.0, 0.0), 1.0, &cfg()).is_err());
        assert!(shifted_positive_mean(&sp(1.0, 0.0, 1.0, 0.0), 0.0, &cfg()).is_err());
        assert!(abs_moment(&p, -1.0, &cfg()).is_err());
        assert!(strictly_stable_moment(&sp(1.5, 0.0, 1.0, 0.1), 0.5, Side::Plus).is_err());
        assert!(strictly_stable_moment(&sp(1.0, 0.3, 1.0, 0.0), 0.5, Side::Plus).is_err());
    }

    #[test]
    fn minus_examples() {
        let p = sp(1.2, 0.0, 1.0, 0.0);
        for &e in &[0.3, 0.9, 1.1] {
            assert_eq!(
                truncated_moment_minus(&p, e, &cfg()).unwrap(),
                truncated_moment_plus(&p, e, &cfg()).unwrap()
            );
        }
        let levy = sp(0.5, 1.0, 1.0, 0.0);
        assert!(truncated_moment_minus(&levy, 0.25, &cfg()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn shifted_mean_examples() {
        let p = sp(1.5, 0.0, 1.0, 0.0);
        let v = shifted_positive_mean(&p, 0.0, &cfg()).unwrap();
        assert!(close(v, gamma(1.0 / 3.0) / PI, 1e-14));
        let p = sp(1.8, 0.3, 2.0, 1.0);
        let up = shifted_positive_mean(&p, 0.4, &cfg()).unwrap();
        let down = shifted_positive_mean(&p.reflected(), -0.4, &cfg()).unwrap();
        assert!(close(up - down, 0.6, 1e-8), "{}", up - down);
        let far = shifted_positive_mean(&sp(1.5, 0.0, 1.0, 0.0), 1e6, &cfg()).unwrap();
        assert!((0.0..1e-2).contains(&far), "{far}");
    }

    #[test]
    fn abs_and_signed_examples() {
        let p = sp(1.3, 0.4, 1.0, 0.2);
        let v = abs_moment(&p, 1e-6, &cfg()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-4 && !v.experimental);
        let cauchy = sp(1.0, 0.0, 1.0, 0.0);
        let v = abs_moment(&cauchy, 0.5, &cfg()).unwrap().value;
        assert!(close(v, 2f64.sqrt(), 1e-9));
        let v = abs_moment(&sp(1.5, 0.0, 1.0, 0.0), 0.5, &cfg()).unwrap().value;
        let expect = gamma(2.0 / 3.0) / (gamma(0.5) * (PI / 4.0).cos());
        assert!(close(v, expect, 1e-12));
        assert!((v - 1.080_43).abs() < 1e-5);

        assert_eq!(signed_moment(&sp(0.8, 0.0, 3.0, 0.0), 0.4, &cfg()).unwrap().value, 0.0);
        let v = signed_moment(&sp(1.5, 0.3, 1.0, 0.7), 1.0, &cfg()).unwrap().value;
        assert!((v - 0.7).abs() < 1e-8, "{v}");
        let v = signed_moment(&sp(1.5, 1.0, 1.0, 0.0), 1e-6, &cfg()).unwrap().value;
        assert!((v + 1.0 / 3.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn strictly_stable_examples() {
        let cauchy = sp(1.0, 0.0, 1.0, 0.0);
        let v = strictly_stable_moment(&cauchy, 0.5, Side::Plus).unwrap();
        assert!(close(v, FRAC_1_SQRT_2, 1e-14));
        let v = strictly_stable_moment(&sp(0.5, 1.0, 1.0, 0.0), 0.25, Side::Plus).unwrap();
        let expect = 2f64.powf(0.25) * gamma(0.5) / gamma(0.75);
        assert!(close(v, expect, 1e-13), "{v} {expect}");
        assert!((v - 1.7201).abs() < 1e-4);
        let v = strictly_stable_moment(&sp(1.5, 0.0, 1.0, 0.0), 1.0, Side::Plus).unwrap();
        assert!(close(v, gamma(1.0 / 3.0) / PI, 1e-14));
    }

    #[test]
    fn conjecture_examples() {
        let cauchy = sp(1.0, 0.0, 1.0, 0.0);
        let v = conjectured_negative_moment(&cauchy, -0.5, Side::Plus, &cfg()).unwrap();
        assert!(v.experimental);
        assert!(close(v.value, FRAC_1_SQRT_2, 1e-8), "{}", v.value);
        let p = sp(0.9, 0.0, 1.0, 0.0);
        let half = conjectured_negative_moment(&p, -0.3, Side::Plus, &cfg()).unwrap().value;
        let abs = abs_moment(&p, -0.3, &cfg()).unwrap();
        assert!(abs.experimental);
        assert!(close(half, 0.5 * abs.value, 1e-14));
    }

    #[test]
    fn continuity_across_p_one() {
        for &(a, b, d) in &[(1.5, 0.5, 0.7), (1.8, -1.0, -0.3), (1.3, 0.0, 1.5)] {
            let p = sp(a, b, 1.3, d);
            let at = truncated_moment_plus(&p, 1.0, &cfg()).unwrap();
            for &e in &[1.0 - 1e-4, 1.0 + 1e-4] {
                let v = truncated_moment_plus(&p, e, &cfg()).unwrap();
                assert!((v - at).abs() < 1e-3, "{a} {b} {d} {e}: {v} vs {at}");
            }
        }
    }

    #[test]
    fn printed_abs_moment_differs_by_delta_star() {
        let p = sp(1.5, 0.5, 1.0, 2.0);
        let sum = abs_moment(&p, 0.7, &cfg()).unwrap().value;
        let printed = printed::abs_moment(&p, 0.7, &cfg()).unwrap();
        assert!((sum - printed).abs() > 0.1);
        let unit = sp(1.5, 0.5, 1.0, 1.0);
        let sum = abs_moment(&unit, 0.7, &cfg()).unwrap().value;
        let printed = printed::abs_moment(&unit, 0.7, &cfg()).unwrap();
        assert!(close(printed, sum, 1e-9));
        let s = signed_moment(&p, 1.3, &cfg()).unwrap().value;
        assert!(close(printed::signed_moment(&p, 1.3, &cfg()).unwrap(), s, 1e-9));
    }
}
