//! Summary statistics for Monte Carlo samples.

/// Mean, standard error of the mean, and range of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(count)`.
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

/// Summarize a sample of at least two values. Summation runs in slice
/// order, so results are reproducible for a fixed input order.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    assert!(n >= 2, "need at least two samples");
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Summary { count: n, mean, stderr: (var / n as f64).sqrt(), min, max }
}

/// Linear-interpolation quantile of an already sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<Bin>,
}

impl Histogram {
    /// Histogram with Freedman-Diaconis bin width `2 IQR n^{-1/3}`.
    ///
    /// Degenerate samples (zero range or zero IQR) fall back to a single bin
    /// or to Sturges' rule respectively.
    pub fn freedman_diaconis(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let lo = sorted[0];
        let hi = *sorted.last().unwrap();
        let n = sorted.len();
        if hi <= lo {
            return Self { bins: vec![Bin { left: lo, right: hi, count: n as u64 }] };
        }
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let nbins = if iqr > 0.0 {
            let width = 2.0 * iqr / (n as f64).cbrt();
            ((hi - lo) / width).ceil().max(1.0) as usize
        } else {
            ((n as f64).log2().ceil() as usize + 1).max(1)
        };
        let width = (hi - lo) / nbins as f64;
        let mut bins: Vec<Bin> = (0..nbins)
            .map(|b| Bin {
                left: lo + b as f64 * width,
                right: if b + 1 == nbins { hi } else { lo + (b + 1) as f64 * width },
                count: 0,
            })
            .collect();
        for v in sorted {
            let idx = (((v - lo) / width) as usize).min(nbins - 1);
            bins[idx].count += 1;
        }
        Self { bins }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}
