//! Per-iteration traces shared by every optimizer.

use crate::oracle::Point;
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Cna,
    GradientDescent,
    NceMomentum,
    RestartedNm,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Cna => "cna",
            Algorithm::GradientDescent => "gd",
            Algorithm::NceMomentum => "nce",
            Algorithm::RestartedNm => "restarted-nm",
        }
    }
}

/// Which tracked point produced the best gradient norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BestKind {
    /// A gradient query point (`y~_k` for the continuized method, the
    /// evaluated iterate for the baselines).
    Query,
    /// A Poisson-weighted average `x_bar_k`.
    Average,
}

impl BestKind {
    pub fn tag(self) -> &'static str {
        match self {
            BestKind::Query => "ytilde",
            BestKind::Average => "xbar",
        }
    }
}

/// One gradient query of a run.
///
/// For the continuized method, row `iter = k` is the query at `y~_k`, made at
/// jump time `time = T_{k+1}` after the gap `tau = tau_{k+1}`. Deterministic
/// baselines leave `time` and `tau` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub time: Option<f64>,
    pub tau: Option<f64>,
    /// Objective value at the query point.
    pub f: f64,
    /// Norm of the (possibly stochastic) gradient used at the query point.
    pub grad_norm: f64,
    /// Deterministic gradient norm at the running average, when evaluated.
    pub grad_norm_avg: Option<f64>,
    /// Cumulative gradient evaluations after this row.
    pub grad_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub best_kind: BestKind,
    pub best_grad_norm: f64,
    pub best_point: Point,
    pub final_point: Point,
    pub grad_evals: u64,
    pub seed: Option<Seed>,
    pub params: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
}

impl RunRecord {
    pub fn f_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.f)
    }
}

/// Tracks the smallest gradient norm seen and where it was seen.
#[derive(Debug, Clone)]
pub(crate) struct BestTracker {
    pub norm: f64,
    pub point: Point,
    pub kind: BestKind,
}

impl BestTracker {
    pub fn new(start: Point) -> Self {
        Self { norm: f64::INFINITY, point: start, kind: BestKind::Query }
    }

    pub fn offer(&mut self, norm: f64, point: &Point, kind: BestKind) {
        if norm < self.norm {
            self.norm = norm;
            self.point.clone_from(point);
            self.kind = kind;
        }
    }
}

pub(crate) fn norm(v: &Point) -> f64 {
    v.dot(v).sqrt()
}

pub(crate) fn all_finite(v: &Point) -> bool {
    v.iter().all(|x| x.is_finite())
}
