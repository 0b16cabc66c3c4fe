//! Scalar helpers shared by the solver and the RBM code.

/// Clamp window applied to Bernoulli means before logs or logits.
pub const MEAN_EPS: f64 = 1e-12;

/// Logistic sigmoid, evaluated without overflow for either sign of `x`.
/// `sigmoid(±inf)` is exactly 1 or 0.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln p - ln(1 - p)`; returns `-inf` at 0 and `+inf` at 1.
#[inline]
pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

#[inline]
pub fn clamp_mean(m: f64) -> f64 {
    m.clamp(MEAN_EPS, 1.0 - MEAN_EPS)
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
