//! `E(X₂ | X₁ = x)` for a jointly stable pair with zero shift and a discrete
//! spectral measure `Λ = Σ_j w_j δ_{s_j}` on the unit circle.
//!
//! The marginal of `X₁` is `S(α, β₁, γ₁, μ₁; 1)` with
//! `γ₁^α = Σ w|s₁|^α`, `β₁ = Σ w s₁^⟨α⟩ / γ₁^α`, and `μ₁ = 0` unless `α = 1`.

use std::f64::consts::{FRAC_2_PI, PI};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{self, stream_rng, Cms};
use crate::error::{Result, StableError};
use crate::gfun::{eval, h, GFunQuery, GKind};
use crate::params::{check_alpha, is_alpha_one, StableParams1};
use crate::quad::{integrate_with_breaks, QuadConfig};
use crate::special::{mirror_exact_sum, signed_pow, tan_half_pi};

/// Atoms must lie on the unit circle to within this tolerance.
pub const UNIT_CIRCLE_TOL: f64 = 1e-12;

/// `|β₁|` at or below this counts as `β₁ = 0`.
pub const BETA1_ZERO: f64 = 1e-14;

/// Densities below this are not used as divisors.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub s1: f64,
    pub s2: f64,
    pub weight: f64,
}

impl SpectralAtom {
    pub fn new(s1: f64, s2: f64, weight: f64) -> Result<Self> {
        let a = Self { s1, s2, weight };
        a.validate()?;
        Ok(a)
    }

    /// Atom at angle `theta` (radians).
    pub fn from_angle(theta: f64, weight: f64) -> Result<Self> {
        let (s2, s1) = theta.sin_cos();
        Self::new(s1, s2, weight)
    }

    /// The antipodal atom `-s` with the same weight.
    pub fn antipode(&self) -> Self {
        Self {
            s1: -self.s1,
            s2: -self.s2,
            weight: self.weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(StableError::domain(format!(
                "atom weight {} must be positive",
                self.weight
            )));
        }
        let norm = self.s1.hypot(self.s2);
        if !((norm - 1.0).abs() <= UNIT_CIRCLE_TOL) {
            return Err(StableError::domain(format!(
                "atom ({}, {}) is not on the unit circle (norm {norm})",
                self.s1, self.s2
            )));
        }
        Ok(())
    }
}

impl FromStr for SpectralAtom {
    type Err = StableError;

    /// Parses `s1,s2,weight`.
    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(StableError::Input(format!(
                "expected 's1,s2,weight', got '{line}'"
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| StableError::Input(format!("bad number '{s}': {e}")))
        };
        Self::new(num(fields[0])?, num(fields[1])?, num(fields[2])?)
    }
}

/// Parses an atom list, one `s1,s2,weight` per line. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_atoms(text: &str) -> Result<Vec<SpectralAtom>> {
    let atoms = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            l.parse::<SpectralAtom>().map_err(|e| match e {
                StableError::Input(m) => StableError::Input(format!("line {}: {m}", i + 1)),
                StableError::Domain(m) => StableError::Input(format!("line {}: {m}", i + 1)),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if atoms.is_empty() {
        return Err(StableError::Input("atom list is empty".into()));
    }
    Ok(atoms)
}

fn check_atoms(atoms: &[SpectralAtom], alpha: f64) -> Result<f64> {
    let alpha = check_alpha(alpha)?;
    if atoms.is_empty() {
        return Err(StableError::domain("spectral measure has no atoms"));
    }
    for a in atoms {
        a.validate()?;
    }
    Ok(alpha)
}

/// `[X₂, X₁]_α = Σ w s₂ s₁^⟨α-1⟩`, and `Σ w s₂ sign(s₁)` at `α = 1`.
pub fn alpha_covariation(atoms: &[SpectralAtom], alpha: f64) -> Result<f64> {
    let alpha = check_atoms(atoms, alpha)?;
    if alpha < 1.0 && atoms.iter().any(|a| a.s1 == 0.0) {
        return Err(StableError::domain(
            "alpha-covariation diverges: atom with s1 = 0 and alpha < 1",
        ));
    }
    Ok(mirror_exact_sum(
        atoms
            .iter()
            .map(|a| a.weight * a.s2 * signed_pow(a.s1, alpha - 1.0)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondExpCoefficients {
    pub alpha: f64,
    /// `-(2/π) Σ w s₂ ln|s₁|`; `None` when an atom has `s₁ = 0`.
    pub c0: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// `-(2/π) Σ w s₁ ln|s₁|`, the location of `X₁` at `α = 1`; `None`
    /// when an atom has `s₁ = 0`.
    pub mu1: Option<f64>,
    pub beta1: f64,
    pub gamma1: f64,
}

impl CondExpCoefficients {
    /// Law of `X₁` in the 1-parameterization.
    pub fn marginal(&self) -> Result<StableParams1> {
        let delta = if is_alpha_one(self.alpha) {
            self.mu1.unwrap_or(0.0)
        } else {
            0.0
        };
        StableParams1::new(self.alpha, self.beta1, self.gamma1, delta)
    }

    pub fn is_linear(&self) -> bool {
        self.c2 == 0.0 && self.c0.unwrap_or(0.0) == 0.0
    }
}

/// Coefficient set of the conditional-expectation formula.
pub fn cond_exp_coeffs(atoms: &[SpectralAtom], alpha: f64) -> Result<CondExpCoefficients> {
    let alpha = check_atoms(atoms, alpha)?;
    let has_axis_atom = atoms.iter().any(|a| a.s1 == 0.0);
    if alpha <= 1.0 && has_axis_atom {
        return Err(StableError::Existence(format!(
            "an atom with s1 = 0 is not allowed for alpha = {alpha} <= 1"
        )));
    }
    let sum = |f: &dyn Fn(&SpectralAtom) -> f64| mirror_exact_sum(atoms.iter().map(|a| a.weight * f(a)));
    let scale_a = sum(&|a| a.s1.abs().powf(alpha));
    if scale_a == 0.0 {
        return Err(StableError::DegenerateMarginal);
    }
    let gamma1 = scale_a.powf(1.0 / alpha);
    let beta1 = (sum(&|a| signed_pow(a.s1, alpha)) / scale_a).clamp(-1.0, 1.0);
    let kappa1 = alpha_covariation(atoms, alpha)?;
    let kappa2 = sum(&|a| if a.s1 == 0.0 { 0.0 } else { a.s2 * a.s1.abs().powf(alpha - 1.0) });
    let (c0, mu1) = if has_axis_atom {
        (None, None)
    } else {
        (
            Some(-FRAC_2_PI * sum(&|a| a.s2 * a.s1.abs().ln())),
            Some(-FRAC_2_PI * sum(&|a| a.s1 * a.s1.abs().ln())),
        )
    };
    let (c1, c2) = if is_alpha_one(alpha) {
        if beta1.abs() <= BETA1_ZERO {
            (kappa1, -2.0 * kappa2 / PI)
        } else {
            (kappa2 / beta1, (kappa2 - beta1 * kappa1) / beta1)
        }
    } else {
        let t = tan_half_pi(alpha);
        let denom = scale_a * (1.0 + beta1 * beta1 * t * t);
        (
            (kappa1 + beta1 * t * t * kappa2) / denom,
            t * (kappa2 - beta1 * kappa1) / denom,
        )
    };
    Ok(CondExpCoefficients {
        alpha,
        c0,
        c1,
        c2,
        kappa1,
        kappa2,
        mu1,
        beta1,
        gamma1,
    })
}

/// Form of the `α = 1` formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha1Variant {
    /// Density of `X₁` at its own standardized argument
    /// `z = (x - μ₁)/γ₁ - (2/π)β₁ ln γ₁`, and `-c₂` in front of the
    /// `g̃₁/g₁` ratio when `β₁ ≠ 0`. Agrees with simulation.
    #[default]
    ShiftConsistent,
    /// Denominator `g₁(x/γ₁|1,β₁)` and `+c₂`, as in the printed display.
    AsPrinted,
}

fn g1(kind: GKind, z: f64, alpha: f64, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    eval(kind, &GFunQuery::new(1.0, z, alpha, beta).with_cfg(*cfg))
}

fn density_divisor(v: f64) -> Result<f64> {
    if v.abs() < DENSITY_FLOOR || !v.is_finite() {
        Err(StableError::DensityUnderflow(v))
    } else {
        Ok(v)
    }
}

/// `E(X₂ | X₁ = x)`.
pub fn cond_exp(
    atoms: &[SpectralAtom],
    alpha: f64,
    x: f64,
    variant: Alpha1Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    let c = cond_exp_coeffs(atoms, alpha)?;
    cond_exp_with(&c, x, variant, cfg)
}

/// `E(X₂ | X₁ = x)` from precomputed coefficients.
pub fn cond_exp_with(
    c: &CondExpCoefficients,
    x: f64,
    variant: Alpha1Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !x.is_finite() {
        return Err(StableError::domain(format!("x = {x} is not finite")));
    }
    let (alpha, b1, g1s) = (c.alpha, c.beta1, c.gamma1);
    if !is_alpha_one(alpha) {
        let lin = c.c1 * x;
        if c.c2 == 0.0 {
            return Ok(lin);
        }
        let z = x / g1s;
        let den = density_divisor(g1(GKind::G, z, alpha, b1, cfg)?)?;
        let gt = g1(GKind::GTilde, z, alpha, b1, cfg)?;
        return Ok(lin + c.c2 * (1.0 - z * gt) / (den / g1s));
    }
    let (c0, mu1) = match (c.c0, c.mu1) {
        (Some(c0), Some(mu1)) => (c0, mu1),
        _ => {
            return Err(StableError::Existence(
                "alpha = 1 needs every atom off the s2 axis".into(),
            ))
        }
    };
    let u = (x - mu1) / g1s;
    let zc = u - FRAC_2_PI * b1 * g1s.ln();
    let lin = c0 + c.c1 * u;
    if c.c2 == 0.0 {
        return Ok(lin);
    }
    let den_arg = match variant {
        Alpha1Variant::ShiftConsistent => zc,
        Alpha1Variant::AsPrinted => x / g1s,
    };
    let den = density_divisor(g1(GKind::G, den_arg, 1.0, b1, cfg)?)?;
    if b1.abs() > BETA1_ZERO {
        let gt = g1(GKind::GTilde, zc, 1.0, b1, cfg)?;
        let sign = match variant {
            Alpha1Variant::ShiftConsistent => -1.0,
            Alpha1Variant::AsPrinted => 1.0,
        };
        Ok(lin + sign * c.c2 * gt / den)
    } else {
        let num = (1.0 - g1s.ln()) * g1(GKind::G, u, 1.0, 0.0, cfg)? + h(u, cfg)?;
        Ok(lin + c.c2 * num / den)
    }
}

/// Per-atom sampling terms `X = Σ_j (w_j^{1/α} A_j + [α=1](2/π) w_j ln w_j) s_j`
/// with `A_j ~ S(α, 1, 1, 0; 1)` i.i.d.
#[derive(Debug, Clone, Copy)]
struct AtomTerm {
    s1: f64,
    s2: f64,
    scale: f64,
    drift: f64,
}

fn atom_terms(atoms: &[SpectralAtom], alpha: f64) -> Vec<AtomTerm> {
    atoms
        .iter()
        .map(|a| AtomTerm {
            s1: a.s1,
            s2: a.s2,
            scale: a.weight.powf(1.0 / alpha),
            drift: if is_alpha_one(alpha) {
                FRAC_2_PI * a.weight * a.weight.ln()
            } else {
                0.0
            },
        })
        .collect()
}

const BIVARIATE_CHUNK: usize = 4096;

/// `n` draws of `(X₁, X₂)`, deterministic given `seed`.
pub fn sample_bivariate(
    atoms: &[SpectralAtom],
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let alpha = check_atoms(atoms, alpha)?;
    if n == 0 {
        return Err(StableError::domain("sample size n must be at least 1"));
    }
    let terms = atom_terms(atoms, alpha);
    let cms = Cms::new(alpha, 1.0);
    let mut out = vec![(0.0, 0.0); n];
    out.par_chunks_mut(BIVARIATE_CHUNK)
        .enumerate()
        .for_each(|(i, chunk)| {
            let mut rng = stream_rng(seed, i as u64);
            for v in chunk.iter_mut() {
                let (mut x1, mut x2) = (0.0, 0.0);
                for t in &terms {
                    let y = t.scale * cms.draw(&mut rng) + t.drift;
                    x1 += t.s1 * y;
                    x2 += t.s2 * y;
                }
                *v = (x1, x2);
            }
        });
    Ok(out)
}

/// Kernel-regression estimate of `E(X₂ | X₁ = x)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub bandwidth: f64,
    /// Kernel-weighted sample count.
    pub effective_n: f64,
}

/// Number of independent batches behind the standard error.
pub const REGRESSION_BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, Default)]
struct LocalLinear {
    s0: f64,
    s1: f64,
    s2: f64,
    t0: f64,
    t1: f64,
}

impl LocalLinear {
    fn add(&mut self, d: f64, k: f64, y: f64) {
        self.s0 += k;
        self.s1 += k * d;
        self.s2 += k * d * d;
        self.t0 += k * y;
        self.t1 += k * d * y;
    }

    fn merge(mut self, o: &Self) -> Self {
        self.s0 += o.s0;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.t0 += o.t0;
        self.t1 += o.t1;
        self
    }

    fn intercept(&self) -> f64 {
        (self.s2 * self.t0 - self.s1 * self.t1) / (self.s0 * self.s2 - self.s1 * self.s1)
    }
}

/// Local-linear Epanechnikov regression of `X₂` on `X₁` at `x` over `n`
/// simulated pairs.
///
/// Atoms with `s₁ = 0` are independent of `X₁`; their contribution to `X₂`
/// is replaced by its mean (0 for `α > 1`), which leaves the regression
/// function unchanged and keeps the conditional variance finite.
/// `bandwidth = None` picks `0.5 γ₁ n^{-1/5}`.
pub fn cond_exp_monte_carlo(
    atoms: &[SpectralAtom],
    alpha: f64,
    x: f64,
    n: usize,
    seed: u64,
    bandwidth: Option<f64>,
) -> Result<RegressionEstimate> {
    let c = cond_exp_coeffs(atoms, alpha)?;
    let alpha = c.alpha;
    if n < REGRESSION_BATCHES * BIVARIATE_CHUNK {
        return Err(StableError::domain(format!(
            "kernel regression needs n >= {}",
            REGRESSION_BATCHES * BIVARIATE_CHUNK
        )));
    }
    let h = bandwidth.unwrap_or(0.5 * c.gamma1 * (n as f64).powf(-0.2));
    if !(h > 0.0) {
        return Err(StableError::domain("bandwidth must be positive"));
    }
    let terms = atom_terms(atoms, alpha);
    let cms = Cms::new(alpha, 1.0);
    let chunks = n.div_ceil(BIVARIATE_CHUNK);
    let per_chunk: Vec<(usize, LocalLinear)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let len = BIVARIATE_CHUNK.min(n - i * BIVARIATE_CHUNK);
            let mut acc = LocalLinear::default();
            for _ in 0..len {
                let (mut x1, mut x2) = (0.0, 0.0);
                for t in &terms {
                    let y = t.scale * cms.draw(&mut rng) + t.drift;
                    x1 += t.s1 * y;
                    if t.s1 != 0.0 {
                        x2 += t.s2 * y;
                    }
                }
                let d = (x1 - x) / h;
                if d.abs() < 1.0 {
                    acc.add(d, 0.75 * (1.0 - d * d), x2);
                }
            }
            (i % REGRESSION_BATCHES, acc)
        })
        .collect();
    let mut batches = [LocalLinear::default(); REGRESSION_BATCHES];
    for (b, acc) in &per_chunk {
        batches[*b] = batches[*b].merge(acc);
    }
    let total = batches.iter().fold(LocalLinear::default(), |a, b| a.merge(b));
    let est: Vec<f64> = batches.iter().map(LocalLinear::intercept).collect();
    if est.iter().any(|v| !v.is_finite()) {
        return Err(StableError::domain(format!(
            "too few samples near x = {x} for bandwidth {h}"
        )));
    }
    let m = est.len() as f64;
    let mean = est.iter().sum::<f64>() / m;
    let var = est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(RegressionEstimate {
        estimate: total.intercept(),
        stderr: (var / m).sqrt(),
        bandwidth: h,
        effective_n: total.s0 / 0.75,
    })
}

/// `∫ E(X₂|X₁=x) f₁(x) dx` over `[-L, L]` with `L = span · γ₁`, plus
/// power-law tail corrections beyond `±L`. Zero when `E X₂ = 0`.
pub fn tower_integral(
    atoms: &[SpectralAtom],
    alpha: f64,
    span: f64,
    variant: Alpha1Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    let c = cond_exp_coeffs(atoms, alpha)?;
    let marginal = c.marginal()?;
    let l = span * c.gamma1;
    let f = |x: f64| -> Result<f64> {
        let density = dist::pdf(x, &marginal, cfg)?;
        // in a light tail the product vanishes with the density
        if density.abs() < DENSITY_FLOOR {
            return Ok(0.0);
        }
        Ok(cond_exp_with(&c, x, variant, cfg)? * density)
    };
    let err = std::cell::RefCell::new(None);
    let integrand = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let g = c.gamma1;
    let breaks = [-l, -10.0 * g, -g, 0.0, g, 10.0 * g, l];
    let res = integrate_with_breaks(integrand, &breaks, cfg);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let body = res.into_result()?;
    // Beyond L: m(x) f(x) ~ |x|^{-α} (C₁ + C₂ |x|^{-1} + C₃ |x|^{-α}), the
    // leading terms of the density expansion times a linear m, fitted at
    // L, 2L and 4L.
    let powers = [0.0, -1.0, -alpha];
    let tail = |sign: f64| -> Result<f64> {
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for (k, row) in m.iter_mut().enumerate() {
            let x = l * f64::from(1u32 << (2 * k));
            for (j, e) in powers.iter().enumerate() {
                row[j] = x.powf(*e);
            }
            rhs[k] = f(sign * x)? * x.powf(alpha);
        }
        let coef = solve3(m, rhs);
        Ok(powers
            .iter()
            .zip(coef)
            .map(|(e, c)| c * l.powf(1.0 - alpha + e) / (alpha - 1.0 - e))
            .sum())
    };
    let tails = if alpha > 1.0 { tail(1.0)? + tail(-1.0)? } else { 0.0 };
    Ok(body + tails)
}

/// Gaussian elimination with partial pivoting on a 3×3 system.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let top = m[col];
            for (v, t) in m[row].iter_mut().zip(top).skip(col) {
                *v -= f * t;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}
