//! Monte Carlo estimators of the jump-time functionals.
//!
//! Trial `t` draws its schedule from `spawn_stream(seed, t)`. Trials run in
//! parallel but are collected in trial order, so every statistic is a
//! deterministic function of `(quantity, n, alpha, C, trials, seed)`.

use rayon::prelude::*;

use super::{a_n_verdict, expected_delta, expected_h, DiagAccumulators, HKind};
use crate::error::{CoreError, Result};
use crate::rng::{sample_increments, spawn_stream, Seed};
use crate::stats::{summarize, Histogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// `H_kind^i`, optionally centered by its closed-form expectation.
    H {
        kind: HKind,
        i: usize,
        centered: bool,
    },
    Delta,
    /// `Delta_n / E[Delta_n]`.
    DeltaRatio,
    /// Indicator of `A_n(C)`.
    AnMembership,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McStats {
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

fn h_value(kind: HKind, i: usize, alpha: f64, seed: Seed) -> Result<f64> {
    let schedule = sample_increments(seed, i)?;
    let mut acc = DiagAccumulators::new(alpha);
    for &tau in schedule.increments() {
        acc.update(tau);
    }
    Ok(acc.get(kind))
}

/// Per-trial values of `quantity`, in trial order.
pub fn monte_carlo_values(
    quantity: Quantity,
    n: usize,
    alpha: f64,
    c: f64,
    trials: usize,
    seed: Seed,
) -> Result<Vec<f64>> {
    super::check_alpha(alpha)?;
    if n == 0 {
        return Err(CoreError::EmptySchedule);
    }
    let centre = match quantity {
        Quantity::H { i, .. } if i == 0 || i > n => {
            return Err(CoreError::Domain(format!("index i = {i} must lie in 1..={n}")));
        }
        Quantity::H { kind, i, centered: true } => {
            let e = expected_h(i, alpha)?;
            kind.select(e.h0, e.h1, e.h2)
        }
        _ => 0.0,
    };
    let expected = expected_delta(n, alpha)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = spawn_stream(seed, t as u64);
            match quantity {
                Quantity::H { kind, i, .. } => Ok(h_value(kind, i, alpha, s)? - centre),
                Quantity::Delta => super::delta_n(&sample_increments(s, n)?, alpha),
                Quantity::DeltaRatio => Ok(super::delta_n(&sample_increments(s, n)?, alpha)? / expected),
                Quantity::AnMembership => {
                    let v = a_n_verdict(&sample_increments(s, n)?, alpha, c)?;
                    Ok(if v.member { 1.0 } else { 0.0 })
                }
            }
        })
        .collect()
}

/// Mean, standard error, range and Freedman-Diaconis histogram of
/// `quantity` over `trials >= 2` independent schedules.
pub fn monte_carlo_stats(
    quantity: Quantity,
    n: usize,
    alpha: f64,
    c: f64,
    trials: usize,
    seed: Seed,
) -> Result<McStats> {
    if trials < 2 {
        return Err(CoreError::Domain(format!("need at least 2 trials, got {trials}")));
    }
    let values = monte_carlo_values(quantity, n, alpha, c, trials, seed)?;
    let s = summarize(&values);
    Ok(McStats {
        mean: s.mean,
        stderr: s.stderr,
        min: s.min,
        max: s.max,
        histogram: Histogram::freedman_diaconis(&values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_single_jump_is_one() {
        let vals = monte_carlo_values(Quantity::DeltaRatio, 1, 0.5, 5.0, 20, Seed(3)).unwrap();
        assert!(vals.iter().all(|&v| (v - 1.0).abs() <= 1e-14));
    }

    #[test]
    fn rejects_bad_arguments() {
        let q = Quantity::H { kind: HKind::H0, i: 5, centered: false };
        assert!(monte_carlo_values(q, 4, 0.5, 5.0, 10, Seed(0)).is_err());
        assert!(monte_carlo_stats(Quantity::Delta, 4, 0.5, 5.0, 1, Seed(0)).is_err());
        assert!(monte_carlo_stats(Quantity::Delta, 4, -0.5, 5.0, 10, Seed(0)).is_err());
    }

    #[test]
    fn histogram_counts_every_trial() {
        let q = Quantity::H { kind: HKind::H2, i: 10, centered: true };
        let st = monte_carlo_stats(q, 100, 0.5, 5.0, 1000, Seed(8)).unwrap();
        assert_eq!(st.histogram.total(), 1000);
        assert!(st.min <= st.mean && st.mean <= st.max);
    }

    #[test]
    fn deterministic_under_parallelism() {
        let a = monte_carlo_values(Quantity::Delta, 50, 0.4, 5.0, 200, Seed(5)).unwrap();
        let b = monte_carlo_values(Quantity::Delta, 50, 0.4, 5.0, 200, Seed(5)).unwrap();
        assert_eq!(a, b);
    }
}
