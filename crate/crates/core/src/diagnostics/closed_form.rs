//! Closed-form expectations of jump-time functionals.
//!
//! Everything here follows from `E[e^{-alpha (T_j - T_i)}] = (1+alpha)^{-(j-i)}`
//! and `E[T e^{-alpha T}] = m (1+alpha)^{-(m+1)}` for `T ~ Gamma(m, 1)`.

use crate::error::{CoreError, Result};

/// `(1 + x)^{-m}` through `exp(-m ln1p(x))`.
fn inv_pow(x: f64, m: f64) -> f64 {
    (-m * x.ln_1p()).exp()
}

/// `1 - (1 + x)^{-m}` without cancellation for small `x`.
fn one_minus_inv_pow(x: f64, m: f64) -> f64 {
    -(-m * x.ln_1p()).exp_m1()
}

/// `E[e^{-alpha (T_j - T_i)}] = (1 + alpha)^{-(j - i)}` for `i <= j`.
pub fn exp_stopping_time(i: usize, j: usize, alpha: f64) -> f64 {
    assert!(i <= j);
    inv_pow(alpha, (j - i) as f64)
}

/// `E[T e^{-alpha T}] = m / (1 + alpha)^{m+1}` for `T ~ Gamma(m, 1)`.
pub fn gamma_law_deriv(m: usize, alpha: f64) -> f64 {
    m as f64 * inv_pow(alpha, m as f64 + 1.0)
}

/// `sum_{j=1}^i (1 + c alpha)^{-(i-j)} = (1 + c alpha - (1 + c alpha)^{-i+1}) / (c alpha)`.
pub fn sum_geometric(i: usize, c: f64, alpha: f64) -> f64 {
    assert!(i >= 1);
    let ca = c * alpha;
    // (1+ca)(1 - (1+ca)^{-i}) / ca, the same quantity in stable form
    (1.0 + ca) * one_minus_inv_pow(ca, i as f64) / ca
}

/// `sum_{k=1}^n k g^k = g (1 - (n+1) g^n + n g^{n+1}) / (1 - g)^2`, `g != 1`.
pub fn sum_deriv(n: usize, g: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let gn = g.powi(n as i32);
    g * (1.0 - (nf + 1.0) * gn + nf * gn * g) / ((1.0 - g) * (1.0 - g))
}

/// `sum_{k=l0}^n k g^k`, `g != 1`, `l0 <= n`.
pub fn sum_deriv_init(l0: usize, n: usize, g: f64) -> f64 {
    assert!(l0 <= n);
    let l = l0 as f64;
    let nf = n as f64;
    let one_m = 1.0 - g;
    g.powi(l0 as i32) / (one_m * one_m)
        * ((l - (nf + 1.0) * g.powi((n - l0 + 1) as i32)) * one_m + g - g.powi((n - l0 + 2) as i32))
}

/// Expectations of `(H0^i, H1^i, H2^i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedH {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Closed-form `E[H0^i]`, `E[H1^i]`, `E[H2^i]`:
///
/// - `E[H1^i] = sum_{m<i} (1+alpha)^{-m}`
/// - `E[H0^i] = sum_{m<i} m (1+alpha)^{-(m+1)}`
/// - `E[H2^i] = sum_{m<i} m (1+alpha)^{-m}`
pub fn expected_h(i: usize, alpha: f64) -> Result<ExpectedH> {
    if i < 1 {
        return Err(CoreError::Domain("index i must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let g = 1.0 / (1.0 + alpha);
    let h2 = sum_deriv(i - 1, g);
    Ok(ExpectedH { h0: g * h2, h1: sum_geometric(i, 1.0, alpha), h2 })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CoreError::Domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Exact `E[Delta_n]`:
///
/// `n (2+a)(1+2a)/2 + (1+2a)(1+3a/2)(1-(1+2a)^{-n})/(2a) - 2(1+a)(1+2a)(1-(1+a)^{-n})/a`.
pub fn expected_delta(n: usize, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(CoreError::Domain("n must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let a = alpha;
    let nf = n as f64;
    Ok(nf * (2.0 + a) * (1.0 + 2.0 * a) / 2.0
        + (1.0 + 2.0 * a) * (1.0 + 1.5 * a) * one_minus_inv_pow(2.0 * a, nf) / (2.0 * a)
        - 2.0 * (1.0 + a) * (1.0 + 2.0 * a) * one_minus_inv_pow(a, nf) / a)
}

/// Upper bound `(1 + 3 alpha/2)(1 + 2 alpha) n` on `E[Delta_n]`.
pub fn expected_delta_upper(n: usize, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(CoreError::Domain("n must be at least 1".into()));
    }
    check_alpha(alpha)?;
    Ok((1.0 + 1.5 * alpha) * (1.0 + 2.0 * alpha) * n as f64)
}

/// Per-index expectations for `i = 1..=n` and the `Delta_n` figures.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTable {
    pub alpha: f64,
    /// `h[i-1]` holds the expectations at index `i`.
    pub h: Vec<ExpectedH>,
    pub delta: f64,
    pub delta_upper: f64,
}

impl ExpectationTable {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let h = (1..=n).map(|i| expected_h(i, alpha)).collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, h, delta: expected_delta(n, alpha)?, delta_upper: expected_delta_upper(n, alpha)? })
    }

    pub fn at(&self, i: usize) -> ExpectedH {
        self.h[i - 1]
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}
