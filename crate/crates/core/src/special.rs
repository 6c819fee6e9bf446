//! Small numerical helpers shared by the integrand code.

use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gamma function (musl `tgamma` port, relative error near 1 ulp).
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `sin(x)/x`, equal to 1 at 0.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `(sin(x) - x) / x^3`, accurate for small `x`.
#[inline]
pub fn sin_minus_id_over_cube(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // -1/6 + x^2/120 - x^4/5040 + x^6/362880 - x^8/39916800
        -1.0 / 6.0
            + x2 * (1.0 / 120.0
                + x2 * (-1.0 / 5040.0 + x2 * (1.0 / 362_880.0 - x2 / 39_916_800.0)))
    } else {
        (x.sin() - x) / (x * x * x)
    }
}

/// `expm1(-a) / (-a)`, i.e. `(1 - e^{-a}) / a`, equal to 1 at 0.
#[inline]
pub fn one_minus_exp_neg_over(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        -(-a).exp_m1() / a
    }
}

/// `tan(pi * alpha / 2)`.
#[inline]
pub fn tan_half_pi(alpha: f64) -> f64 {
    (PI * alpha / 2.0).tan()
}

/// Generalized binomial coefficient `C(p, j)`.
pub fn binomial(p: f64, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (p - i as f64) / (i as f64 + 1.0);
    }
    c
}

/// Signed power `|a|^q sign(a)`, with `0^q = 0`.
#[inline]
pub fn signed_pow(a: f64, q: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.abs().powf(q).copysign(a)
    }
}

/// Sum in which a term and its exact negation cancel regardless of order.
///
/// Positive and negative terms are sorted and summed separately, so
/// multisets that are mirror images of each other give exactly zero.
pub fn mirror_exact_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for t in terms {
        if t > 0.0 {
            pos.push(t);
        } else if t < 0.0 {
            neg.push(-t);
        }
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    pos.iter().sum::<f64>() - neg.iter().sum::<f64>()
}
