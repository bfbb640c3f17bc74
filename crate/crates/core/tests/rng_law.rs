use contnest_core::rng::{sample_increments, spawn_stream, Seed};
use contnest_core::stats::summarize;

#[test]
fn exponential_ks_at_one_in_a_thousand() {
    let n = 100_000;
    let s = sample_increments(Seed(2024), n).unwrap();
    let mut x = s.increments().to_vec();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let cdf = -(-v).exp_m1();
            let lo = k as f64 / nf;
            let hi = (k + 1) as f64 / nf;
            (cdf - lo).abs().max((hi - cdf).abs())
        })
        .fold(0.0, f64::max);
    // asymptotic critical value of sqrt(n) D at level 0.001
    assert!(d * nf.sqrt() <= 1.9495, "KS statistic {}", d * nf.sqrt());
}

#[test]
fn increment_mean_is_one() {
    let s = sample_increments(Seed(11), 100_000).unwrap();
    let mean = s.increments().iter().sum::<f64>() / 1e5;
    assert!((mean - 1.0).abs() <= 3.0 / 1e5f64.sqrt(), "mean {mean}");
}

#[test]
fn thirty_step_windows_have_gamma_mean() {
    let s = sample_increments(Seed(12), 100_000).unwrap();
    let t = s.times();
    // disjoint windows, so the standard error is honest
    let windows: Vec<f64> = (1..t.len() / 30).map(|w| t[30 * w] - t[30 * (w - 1)]).collect();
    let sm = summarize(&windows);
    assert!((sm.mean - 30.0).abs() <= 3.0 * sm.stderr, "{sm:?}");

    // the sliding-window mean telescopes to (T_n - T_30) / (n - 30)
    let slide: f64 = (30..t.len()).map(|k| t[k] - t[k - 30]).sum::<f64>() / (t.len() - 30) as f64;
    assert!((slide - 30.0).abs() <= 3.0 * (30.0f64 / 3333.0).sqrt(), "{slide}");
}

#[test]
fn pooled_streams_have_unit_mean() {
    let base = Seed(99);
    let mut all = Vec::with_capacity(1_000_000);
    for i in 0..1000 {
        let s = sample_increments(spawn_stream(base, i), 1000).unwrap();
        all.extend_from_slice(s.increments());
    }
    let sm = summarize(&all);
    assert!((sm.mean - 1.0).abs() <= 3.0 * sm.stderr, "{sm:?}");
}

#[test]
fn spawned_seeds_are_distinct_and_stable() {
    let base = Seed(5);
    let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| spawn_stream(base, i).0).collect();
    assert_eq!(seeds.len(), 10_000);
    assert_eq!(spawn_stream(base, 7), spawn_stream(base, 7));
}

#[test]
fn discount_expectation_matches_closed_form() {
    let alpha = 0.4;
    let trials = 20_000;
    for &(i, j) in &[(1usize, 1usize), (1, 2), (3, 7), (2, 12)] {
        let vals: Vec<f64> = (0..trials)
            .map(|t| {
                let s = sample_increments(spawn_stream(Seed(77), t), j).unwrap();
                let tm = s.times();
                (-alpha * (tm[j - 1] - tm[i - 1])).exp()
            })
            .collect();
        let sm = summarize(&vals);
        let expect = (1.0 + alpha).powi(-((j - i) as i32));
        assert!((sm.mean - expect).abs() <= 4.0 * sm.stderr + 1e-15, "i={i} j={j}: {} vs {expect}", sm.mean);
    }
}
