//! Jump-time experiments: `A_n` conditions, `Delta_n` ratios, histograms.

use contnest_core::diagnostics::{
    condition_rows, default_alpha, expected_delta, monte_carlo_stats, ConditionRow, DiagAccumulators, HKind, Quantity,
};
use contnest_core::rng::{sample_increments, spawn_stream, Seed};
use contnest_core::stats::summarize;
use rayon::prelude::*;

use crate::config::{Preset, Settings};
use crate::error::CliError;
use crate::output::{fmt_f64, Outcome, Summary, Table};

pub const CONDITIONS_HEADER: &[&str] = &["trial", "i", "H0", "H1", "H2", "bound0", "bound1", "bound2", "violated"];
pub const CONDITIONS_MAX_HEADER: &[&str] = &["i", "max_margin0", "max_margin1", "max_margin2"];
pub const RATIO_HEADER: &[&str] = &["trial", "n", "delta", "expected_delta", "ratio"];
pub const ENVELOPE_HEADER: &[&str] = &["k", "min", "mean", "max"];
pub const HISTOGRAM_HEADER: &[&str] = &["quantity", "i", "bin_left", "bin_right", "count"];
pub const HISTOGRAM_SUMMARY_HEADER: &[&str] = &["quantity", "i", "mean", "stderr", "min", "max", "bins"];

/// Seed of trial `t`'s jump schedule.
pub fn trial_seed(seed: u64, t: usize) -> Seed {
    spawn_stream(Seed(seed), t as u64)
}

pub fn verify_conditions(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(match s.preset {
        Preset::Desk => 1000,
        Preset::Paper => 10_000,
    });
    let trials = s.trials.unwrap_or(100);
    let alpha = s.alpha.unwrap_or_else(|| default_alpha(n));
    let per_trial: Vec<Vec<ConditionRow>> = (0..trials)
        .into_par_iter()
        .map(|t| condition_rows(&sample_increments(trial_seed(s.seed, t), n)?, alpha, s.c))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new("conditions.csv", CONDITIONS_HEADER);
    let mut max_margin = vec![[f64::NEG_INFINITY; 3]; n];
    let mut members = 0usize;
    for (t, rows) in per_trial.iter().enumerate() {
        let mut member = true;
        for row in rows {
            let violated = row.violated();
            member &= !violated;
            for kind in HKind::ALL {
                let m = &mut max_margin[row.i - 1][kind as usize];
                *m = m.max(row.margin(kind));
            }
            table.push([
                t.to_string(),
                row.i.to_string(),
                fmt_f64(row.h[0]),
                fmt_f64(row.h[1]),
                fmt_f64(row.h[2]),
                fmt_f64(row.bound[0]),
                fmt_f64(row.bound[1]),
                fmt_f64(row.bound[2]),
                violated.to_string(),
            ]);
        }
        members += member as usize;
    }
    let mut max_table = Table::new("conditions_max.csv", CONDITIONS_MAX_HEADER);
    for (i, m) in max_margin.iter().enumerate() {
        max_table.push([(i + 1).to_string(), fmt_f64(m[0]), fmt_f64(m[1]), fmt_f64(m[2])]);
    }

    let mut summary = Summary::default();
    summary.add("experiment", "verify-conditions");
    summary.add("n", n.to_string());
    summary.add("trials", trials.to_string());
    summary.add("seed", s.seed.to_string());
    summary.add_f64("alpha", alpha);
    summary.add_f64("C", s.c);
    summary.add("members", members.to_string());
    summary.add_f64("membership_fraction", members as f64 / trials as f64);
    for kind in HKind::ALL {
        let worst = max_margin.iter().map(|m| m[kind as usize]).fold(f64::NEG_INFINITY, f64::max);
        summary.add_f64(format!("max_margin_{}", kind.tag()), worst);
    }
    Ok(Outcome { tables: vec![table, max_table], summary })
}

pub fn delta_ratio(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(1000);
    let trials = s.trials.unwrap_or(100);
    if trials < 2 {
        return Err(CliError::Config(format!("trials: delta-ratio needs at least 2, got {trials}")));
    }
    let alpha = s.alpha.unwrap_or_else(|| default_alpha(n));
    let expected: Vec<f64> = (1..=n).map(|k| expected_delta(k, alpha)).collect::<Result<_, _>>()?;

    // running ratio Delta_k / E[Delta_k] for every trial
    let running: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sched = sample_increments(trial_seed(s.seed, t), n)?;
            let mut acc = DiagAccumulators::new(alpha);
            Ok(sched
                .increments()
                .iter()
                .zip(&expected)
                .map(|(&tau, &e)| {
                    acc.update(tau);
                    acc.delta_partial / e
                })
                .collect())
        })
        .collect::<Result<_, contnest_core::CoreError>>()?;

    let e_n = expected[n - 1];
    let mut table = Table::new("ratio.csv", RATIO_HEADER);
    let mut finals = Vec::with_capacity(trials);
    for (t, r) in running.iter().enumerate() {
        let ratio = r[n - 1];
        finals.push(ratio);
        table.push([t.to_string(), n.to_string(), fmt_f64(ratio * e_n), fmt_f64(e_n), fmt_f64(ratio)]);
    }
    let mut envelope = Table::new("ratio_envelope.csv", ENVELOPE_HEADER);
    for k in 0..n {
        let col: Vec<f64> = running.iter().map(|r| r[k]).collect();
        let sm = summarize(&col);
        envelope.push([(k + 1).to_string(), fmt_f64(sm.min), fmt_f64(sm.mean), fmt_f64(sm.max)]);
    }

    let sm = summarize(&finals);
    let mut summary = Summary::default();
    summary.add("experiment", "delta-ratio");
    summary.add("n", n.to_string());
    summary.add("trials", trials.to_string());
    summary.add("seed", s.seed.to_string());
    summary.add_f64("alpha", alpha);
    summary.add_f64("expected_delta", e_n);
    summary.add_f64("mean_ratio", sm.mean);
    summary.add_f64("stderr_ratio", sm.stderr);
    summary.add_f64("min_ratio", sm.min);
    summary.add_f64("max_ratio", sm.max);
    Ok(Outcome { tables: vec![table, envelope], summary })
}

pub fn histograms(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(100);
    let trials = s.trials.unwrap_or(10_000);
    let alpha = s.alpha.unwrap_or_else(|| default_alpha(n));
    let indices = s.indices.clone().unwrap_or_else(|| vec![2, 10, 100]);
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
        return Err(CliError::Config(format!("indices: {bad} is outside 1..={n}")));
    }
    let mut table = Table::new("histogram.csv", HISTOGRAM_HEADER);
    let mut stats_table = Table::new("histogram_summary.csv", HISTOGRAM_SUMMARY_HEADER);
    for kind in HKind::ALL {
        for &i in &indices {
            let q = Quantity::H { kind, i, centered: true };
            let st = monte_carlo_stats(q, n, alpha, s.c, trials, Seed(s.seed))?;
            for bin in &st.histogram.bins {
                table.push([
                    kind.tag().to_string(),
                    i.to_string(),
                    fmt_f64(bin.left),
                    fmt_f64(bin.right),
                    bin.count.to_string(),
                ]);
            }
            stats_table.push([
                kind.tag().to_string(),
                i.to_string(),
                fmt_f64(st.mean),
                fmt_f64(st.stderr),
                fmt_f64(st.min),
                fmt_f64(st.max),
                st.histogram.len().to_string(),
            ]);
        }
    }
    let mut summary = Summary::default();
    summary.add("experiment", "histograms");
    summary.add("n", n.to_string());
    summary.add("trials", trials.to_string());
    summary.add("seed", s.seed.to_string());
    summary.add_f64("alpha", alpha);
    summary.add("indices", indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
    Ok(Outcome { tables: vec![table, stats_table], summary })
}
