//! Deterministic reference methods: gradient descent, Nesterov momentum with
//! negative-curvature exploitation, and restarted Nesterov momentum.

use crate::error::{CoreError, Result};
use crate::oracle::{ObjectiveHandle, Point};
use crate::trace::{all_finite, norm, Algorithm, BestKind, BestTracker, RunRecord, RunSummary, TraceRow};

fn check_start(h: &ObjectiveHandle, x0: &Point) -> Result<()> {
    if x0.len() != h.dim() {
        return Err(CoreError::Shape { expected: h.dim(), got: x0.len() });
    }
    if !all_finite(x0) {
        return Err(CoreError::Domain("starting point has non-finite entries".into()));
    }
    Ok(())
}

fn finite_or_fail(v: &Point, iteration: usize) -> Result<()> {
    if all_finite(v) {
        Ok(())
    } else {
        Err(CoreError::NumericalFailure { iteration })
    }
}

struct Recorder<'a> {
    h: &'a ObjectiveHandle,
    start_evals: u64,
    rows: Vec<TraceRow>,
    best: BestTracker,
}

impl<'a> Recorder<'a> {
    fn new(h: &'a ObjectiveHandle, x0: &Point) -> Self {
        Self { h, start_evals: h.grad_evals(), rows: Vec::new(), best: BestTracker::new(x0.clone()) }
    }

    /// Gradient at `x`, recorded as one trace row.
    fn query(&mut self, x: &Point) -> Result<Point> {
        let iter = self.rows.len();
        let g = self.h.eval_grad(x.view())?;
        finite_or_fail(&g, iter)?;
        let f = self.h.eval_f(x.view())?;
        let gn = norm(&g);
        self.best.offer(gn, x, BestKind::Query);
        self.rows.push(TraceRow {
            iter,
            time: None,
            tau: None,
            f,
            grad_norm: gn,
            grad_norm_avg: None,
            grad_evals: self.h.grad_evals() - self.start_evals,
        });
        Ok(g)
    }

    fn finish(self, algorithm: Algorithm, final_point: Point, params: Vec<(&'static str, f64)>) -> RunRecord {
        let grad_evals = self.h.grad_evals() - self.start_evals;
        RunRecord {
            algorithm,
            rows: self.rows,
            summary: RunSummary {
                best_kind: self.best.kind,
                best_grad_norm: self.best.norm,
                best_point: self.best.point,
                final_point,
                grad_evals,
                seed: None,
                params,
            },
        }
    }
}

/// `n` steps of `x_{k+1} = x_k - gamma grad f(x_k)`. Row `k` records the
/// query at `x_k`.
pub fn gd_run(h: &ObjectiveHandle, x0: &Point, gamma: f64, n: usize) -> Result<RunRecord> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(CoreError::Parameter(format!("step size must be positive, got {gamma}")));
    }
    check_start(h, x0)?;
    let mut rec = Recorder::new(h, x0);
    let mut x = x0.clone();
    for k in 0..n {
        let g = rec.query(&x)?;
        x.scaled_add(-gamma, &g);
        finite_or_fail(&x, k)?;
    }
    Ok(rec.finish(Algorithm::GradientDescent, x, vec![("gamma", gamma)]))
}

/// Parameters of momentum with negative-curvature exploitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NceParams {
    /// Step size.
    pub eta: f64,
    /// Momentum parameter; the velocity enters with weight `1 - theta`.
    pub theta: f64,
    /// Curvature threshold of the non-convexity test; `None` disables it.
    pub gamma_nc: Option<f64>,
    /// Radius of the negative-curvature step.
    pub s: f64,
}

impl NceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.s > 0.0) {
            return Err(CoreError::Parameter("eta and s must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(CoreError::Parameter(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        Ok(())
    }

    fn describe(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("eta", self.eta), ("theta", self.theta), ("s", self.s)];
        if let Some(g) = self.gamma_nc {
            v.push(("gamma_nc", g));
        }
        v
    }
}

/// Negative-curvature step from `(x, v)`: stays put if `|v| >= s`, otherwise
/// moves a distance `s` along `+-v`, whichever has the lower value (ties go
/// to `+v`). A zero velocity gives no direction, so `x` is returned. The
/// velocity is always reset.
pub fn negative_curvature_exploitation(h: &ObjectiveHandle, x: &Point, v: &Point, s: f64) -> Result<Point> {
    let vn = norm(v);
    if vn >= s || vn == 0.0 {
        return Ok(x.clone());
    }
    let delta = v * (s / vn);
    let plus = x + &delta;
    let minus = x - &delta;
    let fp = h.eval_f(plus.view())?;
    let fm = h.eval_f(minus.view())?;
    Ok(if fp <= fm { plus } else { minus })
}

/// Iterate-level state of momentum with negative-curvature exploitation.
#[derive(Debug, Clone, PartialEq)]
pub struct NceMomentum {
    pub x: Point,
    pub v: Point,
    pub t: usize,
}

/// What one momentum step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NceOutcome {
    Momentum,
    CurvatureStep,
}

impl NceMomentum {
    pub fn new(x0: Point) -> Self {
        let v = Point::zeros(x0.len());
        Self { x: x0, v, t: 0 }
    }

    fn step_with(&mut self, p: &NceParams, rec: &mut Recorder<'_>) -> Result<NceOutcome> {
        let h = rec.h;
        let y = &self.x + &(&self.v * (1.0 - p.theta));
        let g = rec.query(&y)?;
        let mut x_next = y.clone();
        x_next.scaled_add(-p.eta, &g);
        finite_or_fail(&x_next, self.t)?;

        // The test degenerates to f(x) <= f(x) when y = x, which carries no
        // curvature information; it only fires for x != y.
        let triggered = match p.gamma_nc {
            Some(gnc) if y != self.x => {
                let d = &self.x - &y;
                let fx = h.eval_f(self.x.view())?;
                let fy = h.eval_f(y.view())?;
                fx <= fy + g.dot(&d) - 0.5 * gnc * d.dot(&d)
            }
            _ => false,
        };
        let outcome = if triggered {
            let x_nc = negative_curvature_exploitation(h, &self.x, &self.v, p.s)?;
            self.v = Point::zeros(self.x.len());
            self.x = x_nc;
            NceOutcome::CurvatureStep
        } else {
            self.v = &x_next - &self.x;
            self.x = x_next;
            NceOutcome::Momentum
        };
        self.t += 1;
        Ok(outcome)
    }

    /// One iteration; returns which branch was taken.
    pub fn step(&mut self, h: &ObjectiveHandle, p: &NceParams) -> Result<NceOutcome> {
        p.validate()?;
        let mut rec = Recorder::new(h, &self.x);
        self.step_with(p, &mut rec)
    }
}

/// `n` iterations of momentum with negative-curvature exploitation from
/// `x0` with zero initial velocity.
pub fn nce_run(h: &ObjectiveHandle, x0: &Point, p: &NceParams, n: usize) -> Result<RunRecord> {
    p.validate()?;
    check_start(h, x0)?;
    let mut rec = Recorder::new(h, x0);
    let mut state = NceMomentum::new(x0.clone());
    let mut curvature_steps = 0usize;
    for _ in 0..n {
        if state.step_with(p, &mut rec)? == NceOutcome::CurvatureStep {
            curvature_steps += 1;
        }
    }
    let mut params = p.describe();
    params.push(("curvature_steps", curvature_steps as f64));
    Ok(rec.finish(Algorithm::NceMomentum, state.x, params))
}

/// Parameters of restarted Nesterov momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartParams {
    /// Restart threshold: restart when `k sum_{t<k} |x^{t+1} - x^t|^2 > B^2`.
    pub b: f64,
    /// Epoch length that ends the method.
    pub k: usize,
    pub eta: f64,
    pub theta: f64,
    /// Cap on total gradient evaluations. Restarts can otherwise prevent an
    /// epoch from ever reaching length `K`.
    pub max_grad_evals: usize,
}

impl RestartParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || self.k < 1 {
            return Err(CoreError::Parameter("need B > 0 and K >= 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(CoreError::Parameter("eta must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(CoreError::Parameter(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

/// State of restarted Nesterov momentum within the current epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartedNm {
    /// `x^0, ..., x^k` of the current epoch.
    xs: Vec<Point>,
    /// `y^0, ..., y^{k-1}` of the current epoch.
    ys: Vec<Point>,
    /// `x^{-1}`.
    x_before: Point,
    sum_sq: f64,
    pub restarts: usize,
}

impl RestartedNm {
    pub fn new(x0: Point) -> Self {
        Self { x_before: x0.clone(), xs: vec![x0], ys: Vec::new(), sum_sq: 0.0, restarts: 0 }
    }

    /// Epoch counter `k`.
    pub fn k(&self) -> usize {
        self.ys.len()
    }

    pub fn current(&self) -> &Point {
        self.xs.last().expect("epoch holds x^0")
    }

    /// `x^0, ..., x^k` of the current epoch.
    pub fn epoch_iterates(&self) -> &[Point] {
        &self.xs
    }

    /// `k sum_{t<k} |x^{t+1} - x^t|^2`, maintained incrementally.
    pub fn restart_statistic(&self) -> f64 {
        self.k() as f64 * self.sum_sq
    }

    fn step_with(&mut self, p: &RestartParams, rec: &mut Recorder<'_>) -> Result<bool> {
        let k = self.k();
        let x = self.current().clone();
        let prev = if k == 0 { &self.x_before } else { &self.xs[k - 1] };
        let y = &x + &((&x - prev) * (1.0 - p.theta));
        let g = rec.query(&y)?;
        let mut x_next = y.clone();
        x_next.scaled_add(-p.eta, &g);
        finite_or_fail(&x_next, rec.rows.len() - 1)?;
        let d = &x_next - &x;
        self.sum_sq += d.dot(&d);
        self.ys.push(y);
        self.xs.push(x_next);
        if self.restart_statistic() > p.b * p.b {
            let x_k = self.xs.pop().expect("nonempty");
            self.x_before = x_k.clone();
            self.xs.clear();
            self.xs.push(x_k);
            self.ys.clear();
            self.sum_sq = 0.0;
            self.restarts += 1;
            return Ok(true);
        }
        Ok(false)
    }

    /// One iteration; returns whether it triggered a restart.
    pub fn step(&mut self, h: &ObjectiveHandle, p: &RestartParams) -> Result<bool> {
        p.validate()?;
        let mut rec = Recorder::new(h, self.current());
        self.step_with(p, &mut rec)
    }

    /// Averaged output `(1/(K0+1)) sum_{k<=K0} y^k`, where `K0` minimizes
    /// `|x^{k+1} - x^k|` over `floor(m/2) <= k <= m-1` for the epoch length
    /// `m`. An empty epoch outputs the current point.
    pub fn output(&self) -> Point {
        let m = self.k();
        if m == 0 {
            return self.current().clone();
        }
        let mut k0 = m / 2;
        let mut best = f64::INFINITY;
        for k in (m / 2)..m {
            let d = norm(&(&self.xs[k + 1] - &self.xs[k]));
            if d < best {
                best = d;
                k0 = k;
            }
        }
        let mut acc = Point::zeros(self.current().len());
        for y in &self.ys[..=k0] {
            acc += y;
        }
        acc / (k0 + 1) as f64
    }
}

/// Restarted Nesterov momentum from `x^{-1} = x^0 = x0`, stopping when an
/// epoch reaches length `K` or the gradient budget runs out. Returns the
/// averaged output point and the trace; restarts reset the epoch counter but
/// not the trace's iteration index.
pub fn restarted_nm_run(h: &ObjectiveHandle, x0: &Point, p: &RestartParams) -> Result<(Point, RunRecord)> {
    p.validate()?;
    check_start(h, x0)?;
    let mut rec = Recorder::new(h, x0);
    let mut state = RestartedNm::new(x0.clone());
    while state.k() < p.k && rec.rows.len() < p.max_grad_evals {
        state.step_with(p, &mut rec)?;
    }
    let y_hat = state.output();
    let params =
        vec![("B", p.b), ("K", p.k as f64), ("eta", p.eta), ("theta", p.theta), ("restarts", state.restarts as f64)];
    let final_point = state.current().clone();
    Ok((y_hat, rec.finish(Algorithm::RestartedNm, final_point, params)))
}
