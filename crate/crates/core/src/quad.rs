//! Adaptive Gauss–Kronrod quadrature, specialised for integrals of the form
//! `∫₀^∞ w(r) r^{d-1} e^{-r^α} dr` with a bounded oscillatory factor `w`.
//!
//! The half line is cut at the envelope cutoff `R` (see [`choose_cutoff`]) and
//! split at `r = 1`:
//!
//! * `(0, 1]` is mapped by `r = e^{-t}`, which turns an algebraic endpoint
//!   singularity `r^{s-1}` into the smooth decay `e^{-st}`. Panels grow
//!   geometrically in `t` until the contributions have died out.
//! * `[1, R]` is cut into panels short enough that each sees at most one
//!   period of the phase. For `α < 1/2` this piece is first mapped by
//!   `t = r^α`, so the envelope becomes `e^{-t}`.
//!
//! All panels then enter a global adaptive bisection loop ordered by error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StableError};

/// Tolerance contract for the integral engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of adaptive bisections after the initial partition.
    pub max_subdivisions: usize,
    /// Relative envelope level at which the integration range is cut.
    pub tail_epsilon: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            tail_epsilon: 1e-16,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.tail_epsilon > 0.0
            && self.tail_epsilon < 1.0
            && self.max_subdivisions >= 1;
        if ok {
            Ok(())
        } else {
            Err(StableError::domain(format!(
                "invalid quadrature configuration {self:?}"
            )))
        }
    }

    /// Error level accepted for an integral of size `value`.
    #[inline]
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Number of panels in the final partition.
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl QuadResult {
    /// The value, or a [`StableError::NonConvergence`] carrying the best estimate.
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(StableError::NonConvergence {
                value: self.value,
                error_estimate: self.error_estimate,
            })
        }
    }
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Estimate {
    value: f64,
    error: f64,
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !err.is_finite() {
        return Estimate {
            value: f64::NAN,
            error: f64::INFINITY,
        };
    }
    Estimate { value, error: err }
}

/// Change of variable applied to a panel.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// `r = r0 e^{-t}`
    Log { r0: f64 },
    /// `r = t^{1/α}`
    Power { inv_alpha: f64 },
}

impl Map {
    #[inline]
    fn r(&self, t: f64) -> f64 {
        match *self {
            Map::Identity => t,
            Map::Log { r0 } => r0 * (-t).exp(),
            Map::Power { inv_alpha } => t.powf(inv_alpha),
        }
    }

    /// `|dr/dt|`
    #[inline]
    fn jacobian(&self, t: f64) -> f64 {
        match *self {
            Map::Identity => 1.0,
            Map::Log { r0 } => r0 * (-t).exp(),
            Map::Power { inv_alpha } => inv_alpha * t.powf(inv_alpha - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .error
            .total_cmp(&other.est.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn eval_panel<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, map: Map) -> Panel {
    let est = match map {
        Map::Identity => gk15(f, a, b),
        m => gk15(&|t: f64| f(m.r(t)) * m.jacobian(t), a, b),
    };
    Panel { a, b, map, est }
}

/// Global adaptive bisection over an initial partition.
fn adapt<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    panels: Vec<Panel>,
    extra: Estimate,
    cfg: &QuadConfig,
) -> QuadResult {
    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let mut frozen: Vec<Panel> = Vec::new();
    let total = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> (f64, f64) {
        let mut v = extra.value;
        let mut e = extra.error;
        for p in heap.iter().chain(frozen.iter()) {
            v += p.est.value;
            e += p.est.error;
        }
        (v, e)
    };
    let (mut value, mut error) = total(&heap, &frozen);
    let mut bisections = 0usize;
    while error > cfg.target(value) && bisections < cfg.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * worst.a.abs() {
            frozen.push(worst);
            continue;
        }
        let left = eval_panel(f, worst.a, mid, worst.map);
        let right = eval_panel(f, mid, worst.b, worst.map);
        value += left.est.value + right.est.value - worst.est.value;
        error += left.est.error + right.est.error - worst.est.error;
        heap.push(left);
        heap.push(right);
        bisections += 1;
        if bisections.is_multiple_of(256) {
            // refresh the running sums to stop drift
            (value, error) = total(&heap, &frozen);
        }
    }
    let (value, error) = total(&heap, &frozen);
    let converged = value.is_finite() && error <= cfg.target(value);
    QuadResult {
        value,
        error_estimate: if error.is_nan() { f64::INFINITY } else { error },
        subdivisions_used: heap.len() + frozen.len(),
        converged,
    }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Adaptive integration over `[breaks[0], breaks[last]]` starting from the
/// partition given by `breaks` (sorted ascending).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadConfig) -> QuadResult {
    let panels = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| eval_panel(&f, w[0], w[1], Map::Identity))
        .collect();
    adapt(
        &f,
        panels,
        Estimate {
            value: 0.0,
            error: 0.0,
        },
        cfg,
    )
}

/// Point `R` past which the envelope `r^{max(d-1,0)} e^{-r^α}` stays below
/// `tail_epsilon` times its maximum.
pub fn choose_cutoff(alpha: f64, d: f64, tail_epsilon: f64) -> f64 {
    let log_eps = tail_epsilon.ln();
    let m = (d - 1.0).max(0.0);
    if m == 0.0 {
        return (-log_eps).powf(1.0 / alpha);
    }
    // In u = r^α the log-envelope is (m/α) ln u - u, maximal at u* = m/α.
    let k = m / alpha;
    let u_star = k;
    let target = k * (u_star.ln() - 1.0) + log_eps;
    let mut u = u_star - 2.0 * log_eps;
    for _ in 0..100 {
        let g = k * u.ln() - u - target;
        let dg = k / u - 1.0;
        let step = g / dg;
        u -= step;
        if u <= u_star {
            u = u_star * 1.5 + 1.0;
        }
        if step.abs() < 1e-13 * u {
            break;
        }
    }
    u.powf(1.0 / alpha)
}

const LOG_MAP_T_MAX: f64 = 700.0;

/// `∫₀^∞ f(r) dr` for `f(r) = w(r) r^{d-1} e^{-r^α}` with a constant bound
/// `phase_frequency_hint` on the oscillation rate of `w`.
pub fn integrate_damped_oscillatory<F: Fn(f64) -> f64>(
    f: F,
    phase_frequency_hint: f64,
    alpha: f64,
    d: f64,
    cfg: &QuadConfig,
) -> QuadResult {
    let hint = phase_frequency_hint.abs();
    integrate_damped_oscillatory_with(f, |_| hint, alpha, d, cfg)
}

/// As [`integrate_damped_oscillatory`], with the oscillation rate of `w`
/// at `r` supplied by `local_frequency(r)`.
pub fn integrate_damped_oscillatory_with<F, W>(
    f: F,
    local_frequency: W,
    alpha: f64,
    d: f64,
    cfg: &QuadConfig,
) -> QuadResult
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let cutoff = choose_cutoff(alpha, d, cfg.tail_epsilon);
    let split = cutoff.min(1.0);
    let mut panels = Vec::new();

    // [split, cutoff]
    let (map, t_lo, t_hi) = if alpha < 0.5 {
        (
            Map::Power {
                inv_alpha: 1.0 / alpha,
            },
            split.powf(alpha),
            cutoff.powf(alpha),
        )
    } else {
        (Map::Identity, split, cutoff)
    };
    let freq_t = |t: f64| local_frequency(map.r(t)).abs() * map.jacobian(t);
    let mut t = t_lo;
    while t < t_hi {
        let h_max = match map {
            Map::Identity => (0.25 * t).max(1.0),
            _ => 1.0,
        };
        let mut h = h_max.min(2.0 * PI / freq_t(t).max(1e-300));
        h = h.min(2.0 * PI / freq_t((t + h).min(t_hi)).max(1e-300));
        h = h.max((t_hi - t_lo) * 1e-9);
        let b = (t + h).min(t_hi);
        if t_hi - b < 0.05 * h {
            panels.push(eval_panel(&f, t, t_hi, map));
            break;
        }
        panels.push(eval_panel(&f, t, b, map));
        t = b;
    }
    let outer: f64 = panels.iter().map(|p| p.est.value).sum();
    let (inner, extra) = near_zero_panels(&f, &local_frequency, split, outer, cfg);
    panels.extend(inner);
    adapt(&f, panels, extra, cfg)
}

/// `∫₀^upper f(r) dr` for `f` as in [`integrate_damped_oscillatory`].
pub fn integrate_near_zero<F, W>(f: F, local_frequency: W, upper: f64, cfg: &QuadConfig) -> QuadResult
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let (panels, extra) = near_zero_panels(&f, &local_frequency, upper, 0.0, cfg);
    adapt(&f, panels, extra, cfg)
}

/// Panels covering `(0, split]` in `t = ln(split / r)`, plus an analytic
/// estimate of whatever lies past the last panel.
fn near_zero_panels<F, W>(
    f: &F,
    local_frequency: &W,
    split: f64,
    outer: f64,
    cfg: &QuadConfig,
) -> (Vec<Panel>, Estimate)
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let mut panels = Vec::new();
    // (0, split] via r = split e^{-t}
    let log_map = Map::Log { r0: split };
    let mut t = 0.0;
    let mut quiet = 0;
    let mut prev = f64::INFINITY;
    let mut running = outer;
    let mut extra = Estimate {
        value: 0.0,
        error: 0.0,
    };
    loop {
        let r = log_map.r(t);
        let mut h = t.max(0.5).min(2.0 * PI / (local_frequency(r).abs() * r).max(1e-300));
        h = h.max(1e-3);
        let b = (t + h).min(LOG_MAP_T_MAX);
        let p = eval_panel(f, t, b, log_map);
        let mag = p.est.value.abs() + p.est.error;
        running += p.est.value;
        panels.push(p);
        let small = mag <= 1e-3 * cfg.target(running);
        let shrinking = p.est.value == 0.0 || p.est.value.abs() <= 0.5 * prev;
        quiet = if small && shrinking && t >= 1.0 { quiet + 1 } else { 0 };
        prev = p.est.value.abs();
        t = b;
        if quiet >= 2 {
            break;
        }
        if t >= LOG_MAP_T_MAX {
            // Remaining piece behaves like C e^{-s t}; integrate that
            // analytically. Fitting s on two windows bounds the model error.
            let g = |t: f64| f(log_map.r(t)) * log_map.jacobian(t);
            let (f0, f1, f2) = (
                g(LOG_MAP_T_MAX - 20.0),
                g(LOG_MAP_T_MAX - 10.0),
                g(LOG_MAP_T_MAX),
            );
            if f2 == 0.0 {
                break;
            }
            let s_far = (f1 / f2).ln() / 10.0;
            let s_near = (f0 / f1).ln() / 10.0;
            let valid = |s: f64| s > 0.0 && s.is_finite();
            if f0 * f1 > 0.0 && f1 * f2 > 0.0 && valid(s_far) && valid(s_near) {
                let tail = f2 / s_far;
                extra = Estimate {
                    value: tail,
                    error: 2.0 * (tail - f2 / s_near).abs() + 16.0 * f64::EPSILON * tail.abs(),
                };
            } else {
                extra = Estimate {
                    value: 0.0,
                    error: f64::INFINITY,
                };
            }
            break;
        }
    }

    (panels, extra)
}

const DECAY_MAX_PANELS: usize = 20_000;

/// `∫₀^∞ f(t) dt` for a smooth `f` that decays at least exponentially on the
/// scale `step`. Panels of width `step` are laid out until two successive
/// ones are negligible and shrinking, then refined adaptively.
pub fn integrate_decaying<F: Fn(f64) -> f64>(f: F, step: f64, cfg: &QuadConfig) -> QuadResult {
    let mut panels = Vec::new();
    let (mut running, mut prev, mut quiet) = (0.0, f64::INFINITY, 0);
    let mut t = 0.0;
    let mut tail = Estimate {
        value: 0.0,
        error: f64::INFINITY,
    };
    while panels.len() < DECAY_MAX_PANELS {
        let p = eval_panel(&f, t, t + step, Map::Identity);
        running += p.est.value;
        let mag = p.est.value.abs() + p.est.error;
        let shrinking = mag <= 0.5 * prev;
        quiet = if mag <= 1e-3 * cfg.target(running) && shrinking { quiet + 1 } else { 0 };
        prev = mag;
        panels.push(p);
        t += step;
        if quiet >= 2 {
            tail.error = 0.0;
            break;
        }
    }
    adapt(&f, panels, tail, cfg)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0, alpha in 0.6f64..1.9) {
            let cfg = QuadConfig::default();
            let f = move |r: f64| (w1 * r).cos() * (-r.powf(alpha)).exp();
            let g = move |r: f64| (w2 * r + 0.3).sin() * (-r.powf(alpha)).exp();
            let hint = w1.max(w2);
            let rf = integrate_damped_oscillatory(f, hint, alpha, 1.0, &cfg);
            let rg = integrate_damped_oscillatory(g, hint, alpha, 1.0, &cfg);
            let rs = integrate_damped_oscillatory(move |r| a * f(r) + b * g(r), hint, alpha, 1.0, &cfg);
            let bound = a.abs() * rf.error_estimate + b.abs() * rg.error_estimate + rs.error_estimate + 1e-12;
            prop_assert!((rs.value - (a * rf.value + b * rg.value)).abs() <= bound);
        }
    }
}
