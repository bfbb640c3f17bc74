//! Jump-time functionals of the convergence analysis.
//!
//! For jump times `T_1 < ... < T_n` and `alpha > 0`:
//!
//! ```text
//! H0^i = sum_{j<=i} (T_i - T_j) e^{-alpha (T_i - T_j)}
//! H1^i = sum_{j<=i}             e^{-alpha (T_i - T_j)}
//! H2^i = sum_{j<=i} (i - j)     e^{-alpha (T_i - T_j)}
//! Delta_n = alpha^2 sum_{i<=n} (H1^i)^2
//! ```
//!
//! All four are computed in O(1) per index from the recurrences
//! `H1^i = 1 + e^{-alpha tau_i} H1^{i-1}`,
//! `H0^i = e^{-alpha tau_i} (H0^{i-1} + tau_i H1^{i-1})` and
//! `H2^i = e^{-alpha tau_i} (H2^{i-1} + H1^{i-1})`.
//! A realization belongs to the event `A_n(C)` when, for every `i <= n`,
//! `H0^i <= C E[H0^i]`, `H1^i <= C E[H1^i]` and `H2^i <= (C/alpha) E[H2^i]`.

mod closed_form;
mod monte_carlo;

pub use closed_form::{
    exp_stopping_time, expected_delta, expected_delta_upper, expected_h, gamma_law_deriv, sum_deriv, sum_deriv_init,
    sum_geometric, ExpectationTable, ExpectedH,
};
pub use monte_carlo::{monte_carlo_stats, monte_carlo_values, McStats, Quantity};

use crate::error::Result;
use crate::rng::JumpSchedule;
use closed_form::check_alpha;

/// Default constant of the `A_n` event.
pub const DEFAULT_C: f64 = 5.0;

/// The exponent used by the Lipschitz-Hessian schedule, `alpha = n^{-1/7}`.
pub fn default_alpha(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 7.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HKind {
    H0,
    H1,
    H2,
}

impl HKind {
    pub const ALL: [HKind; 3] = [HKind::H0, HKind::H1, HKind::H2];

    pub fn tag(self) -> &'static str {
        match self {
            HKind::H0 => "H0",
            HKind::H1 => "H1",
            HKind::H2 => "H2",
        }
    }

    pub fn select(self, h0: f64, h1: f64, h2: f64) -> f64 {
        match self {
            HKind::H0 => h0,
            HKind::H1 => h1,
            HKind::H2 => h2,
        }
    }
}

/// Streaming values of `H0^i`, `H1^i`, `H2^i` and `Delta_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagAccumulators {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    /// `alpha^2 sum_{j<=i} (H1^j)^2`.
    pub delta_partial: f64,
    pub i: usize,
    pub alpha: f64,
}

impl DiagAccumulators {
    pub fn new(alpha: f64) -> Self {
        Self { h0: 0.0, h1: 0.0, h2: 0.0, delta_partial: 0.0, i: 0, alpha }
    }

    /// Advance from index `i-1` to `i`, where `tau = T_i - T_{i-1}`. The
    /// first call ignores `tau`: index 1 has no earlier jump to discount.
    pub fn update(&mut self, tau: f64) {
        if self.i == 0 {
            self.h0 = 0.0;
            self.h1 = 1.0;
            self.h2 = 0.0;
        } else {
            let decay = (-self.alpha * tau).exp();
            let h1_prev = self.h1;
            self.h0 = decay * (self.h0 + tau * h1_prev);
            self.h2 = decay * (self.h2 + h1_prev);
            self.h1 = 1.0 + decay * h1_prev;
        }
        self.delta_partial += self.alpha * self.alpha * self.h1 * self.h1;
        self.i += 1;
    }

    pub fn get(&self, kind: HKind) -> f64 {
        kind.select(self.h0, self.h1, self.h2)
    }
}

/// Functional form of [`DiagAccumulators::update`].
pub fn diag_update(acc: &DiagAccumulators, tau: f64) -> DiagAccumulators {
    let mut next = *acc;
    next.update(tau);
    next
}

/// Realized `Delta_n` of a schedule.
pub fn delta_n(schedule: &JumpSchedule, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut acc = DiagAccumulators::new(alpha);
    for &tau in schedule.increments() {
        acc.update(tau);
    }
    Ok(acc.delta_partial)
}

/// One index of the `A_n` check: the realized values and their bounds
/// `C E[H0]`, `C E[H1]`, `(C/alpha) E[H2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRow {
    pub i: usize,
    pub h: [f64; 3],
    pub bound: [f64; 3],
}

impl ConditionRow {
    pub fn margin(&self, kind: HKind) -> f64 {
        let k = kind as usize;
        self.h[k] - self.bound[k]
    }

    pub fn first_violation(&self) -> Option<HKind> {
        HKind::ALL.into_iter().find(|&k| self.h[k as usize] > self.bound[k as usize])
    }

    pub fn violated(&self) -> bool {
        self.first_violation().is_some()
    }
}

/// Per-index realized values and bounds for every `i = 1..=n`.
pub fn condition_rows(schedule: &JumpSchedule, alpha: f64, c: f64) -> Result<Vec<ConditionRow>> {
    check_alpha(alpha)?;
    if !(c > 0.0) {
        return Err(crate::CoreError::Domain(format!("C must be positive, got {c}")));
    }
    let mut acc = DiagAccumulators::new(alpha);
    schedule
        .increments()
        .iter()
        .map(|&tau| {
            acc.update(tau);
            let e = expected_h(acc.i, alpha)?;
            Ok(ConditionRow { i: acc.i, h: [acc.h0, acc.h1, acc.h2], bound: [c * e.h0, c * e.h1, c / alpha * e.h2] })
        })
        .collect()
}

/// Outcome of the `A_n` membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnVerdict {
    pub member: bool,
    /// First index and quantity at which a bound fails.
    pub first_violation: Option<(usize, HKind)>,
    pub c: f64,
}

pub fn a_n_verdict(schedule: &JumpSchedule, alpha: f64, c: f64) -> Result<AnVerdict> {
    let first_violation =
        condition_rows(schedule, alpha, c)?.into_iter().find_map(|row| row.first_violation().map(|k| (row.i, k)));
    Ok(AnVerdict { member: first_violation.is_none(), first_violation, c })
}
