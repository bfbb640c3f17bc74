//! The continuized Nesterov algorithm.
//!
//! Between jump times the pair `(x, z)` follows the linear flow
//! `dx = eta (z - x) dt`, `dz = eta' (x - z) dt`; at each jump both take a
//! gradient step evaluated at the pre-jump `x`. Because the flow has a closed
//! form, the process is evaluated exactly at its jump times:
//!
//! ```text
//! y~_k     = x~_k + (eta/alpha) (1 - e^{-alpha tau}) (z~_k - x~_k)
//! x~_{k+1} = y~_k - gamma grad f(y~_k)
//! z~_{k+1} = z~_k + (eta'/alpha) (1 - e^{-alpha tau}) (x~_k - z~_k) - gamma' grad f(y~_k)
//! ```
//!
//! with `alpha = eta + eta'` and `tau = T_{k+1} - T_k`. The `z` update is
//! anchored at `(x~_k, z~_k)` rather than at `y~_k`: the two are equal, but
//! the `y~`-anchored coefficient has the denominator `eta' + eta e^{-alpha tau}`,
//! which vanishes for some `tau` when `eta' < 0`.

use crate::error::{CoreError, Result};
use crate::oracle::{ObjectiveHandle, Point};
use crate::rng::{sample_increments, spawn_stream, Seed};
use crate::trace::{all_finite, norm, Algorithm, BestKind, BestTracker, RunRecord, RunSummary, TraceRow};

/// Parameters `(gamma, gamma', eta, eta', alpha = eta + eta')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnaParams {
    gamma: f64,
    gamma_prime: f64,
    eta: f64,
    eta_prime: f64,
    alpha: f64,
}

impl CnaParams {
    /// Validated constructor. Requires `gamma > 0`, `gamma' >= gamma` and
    /// `eta + eta' > 0`.
    pub fn new(gamma: f64, gamma_prime: f64, eta: f64, eta_prime: f64) -> Result<Self> {
        Self::with_alpha(gamma, gamma_prime, eta, eta_prime, eta + eta_prime)
    }

    fn with_alpha(gamma: f64, gamma_prime: f64, eta: f64, eta_prime: f64, alpha: f64) -> Result<Self> {
        if ![gamma, gamma_prime, eta, eta_prime, alpha].iter().all(|v| v.is_finite()) {
            return Err(CoreError::Parameter("parameters must be finite".into()));
        }
        if !(gamma > 0.0) {
            return Err(CoreError::Parameter(format!("gamma must be positive, got {gamma}")));
        }
        if gamma_prime < gamma {
            return Err(CoreError::Parameter(format!("gamma' = {gamma_prime} must be at least gamma = {gamma}")));
        }
        if !(alpha > 0.0) || eta_prime <= -eta {
            return Err(CoreError::Parameter(format!("need eta' > -eta (eta = {eta}, eta' = {eta_prime})")));
        }
        if (alpha - (eta + eta_prime)).abs() > 1e-14 * alpha.max(1.0) {
            return Err(CoreError::Parameter("alpha must equal eta + eta'".into()));
        }
        Ok(Self { gamma, gamma_prime, eta, eta_prime, alpha })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_prime(&self) -> f64 {
        self.eta_prime
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn describe(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("gamma", self.gamma),
            ("gamma_prime", self.gamma_prime),
            ("eta", self.eta),
            ("eta_prime", self.eta_prime),
            ("alpha", self.alpha),
        ]
    }
}

fn check_lipschitz(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(CoreError::Parameter(format!("L must be positive, got {l}")));
    }
    Ok(())
}

/// Schedule for `L`-smooth objectives: `gamma <= 1/L` (default `1/L`),
/// `eta = sqrt(gamma/2)`, `gamma' = gamma + eta`, free `eta' > -eta`.
pub fn params_smooth(l: f64, gamma: Option<f64>, eta_prime: f64) -> Result<CnaParams> {
    check_lipschitz(l)?;
    let gamma = gamma.unwrap_or(1.0 / l);
    if gamma > 1.0 / l {
        return Err(CoreError::Parameter(format!("gamma = {gamma} exceeds 1/L = {}", 1.0 / l)));
    }
    let eta = (gamma / 2.0).sqrt();
    CnaParams::new(gamma, gamma + eta, eta, eta_prime)
}

/// Schedule of the Lipschitz-Hessian guarantee for a horizon of `n >= 8`
/// iterations: `gamma = 1/L`, `eta = sqrt(gamma/2)`, `gamma' = gamma + eta`,
/// `alpha = n^{-1/7}` and `eta' = alpha - eta`.
pub fn params_hessian(l: f64, n: usize) -> Result<CnaParams> {
    check_lipschitz(l)?;
    if n < 8 {
        return Err(CoreError::Parameter(format!("horizon n must be at least 8, got {n}")));
    }
    let gamma = 1.0 / l;
    let eta = (gamma / 2.0).sqrt();
    let alpha = (n as f64).powf(-1.0 / 7.0);
    CnaParams::with_alpha(gamma, gamma + eta, eta, alpha - eta, alpha)
}

/// Schedule under the strong growth condition with constant `rho >= 1`:
/// `gamma = 1/(rho L)`, `eta = sqrt(gamma/(2 rho))`, `gamma' = gamma + eta`.
pub fn params_sgc(l: f64, rho: f64, eta_prime: f64) -> Result<CnaParams> {
    check_lipschitz(l)?;
    if !(rho >= 1.0) {
        return Err(CoreError::Domain(format!("rho must be >= 1, got {rho}")));
    }
    let gamma = 1.0 / (rho * l);
    let eta = (gamma / (2.0 * rho)).sqrt();
    CnaParams::new(gamma, gamma + eta, eta, eta_prime)
}

/// `1 - e^{-alpha tau}`, computed with `expm1` so that it keeps full relative
/// precision as `alpha tau -> 0`.
pub fn flow_fraction(alpha: f64, tau: f64) -> f64 {
    -(-alpha * tau).exp_m1()
}

/// Coefficient `a_k` of `y~ = x~ + a_k (z~ - x~)`.
pub fn momentum_coefficient(p: &CnaParams, tau: f64) -> f64 {
    p.eta / p.alpha * flow_fraction(p.alpha, tau)
}

/// Coefficient `c_k` of the anchored flow `z_pre = z~ + c_k (x~ - z~)`.
pub fn z_flow_coefficient(p: &CnaParams, tau: f64) -> f64 {
    p.eta_prime / p.alpha * flow_fraction(p.alpha, tau)
}

/// Coefficient `beta_k` of the `y~`-anchored form `z_pre = z~ + beta_k (y~ - z~)`.
/// `None` where its denominator `eta' + eta e^{-alpha tau}` vanishes.
pub fn query_z_coefficient(p: &CnaParams, tau: f64) -> Option<f64> {
    let denom = p.eta_prime + p.eta * (-p.alpha * tau).exp();
    if denom == 0.0 {
        None
    } else {
        Some(p.eta_prime * flow_fraction(p.alpha, tau) / denom)
    }
}

/// Exact solution of the inter-jump flow after time `tau`.
///
/// `x_flow - z_flow = e^{-alpha tau} (x - z)` and the weighted mean
/// `eta' x + eta z` is conserved.
pub fn ode_flow_closed_form(x: &Point, z: &Point, p: &CnaParams, tau: f64) -> (Point, Point) {
    let a = momentum_coefficient(p, tau);
    let c = z_flow_coefficient(p, tau);
    let diff = z - x;
    let xf = x + &(&diff * a);
    let zf = z - &(&diff * c);
    (xf, zf)
}

/// Streaming Poisson-weighted average of the query points.
///
/// The weights `e^{alpha T_i} / sum_j e^{alpha T_j}` overflow for long runs,
/// so the state keeps `S'_k = sum_{j<=k} e^{alpha (T_j - T_k)}`, which lies
/// in `[1, k]`, and updates it with `S'_k = 1 + e^{-alpha tau} S'_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AvgState {
    pub s_prime: f64,
    pub xbar: Option<Point>,
    pub k: usize,
}

impl Default for AvgState {
    fn default() -> Self {
        Self::new()
    }
}

impl AvgState {
    pub fn new() -> Self {
        Self { s_prime: 0.0, xbar: None, k: 0 }
    }

    /// Fold in query point `y`, reached `tau` after the previous one.
    /// `tau` is ignored for the first point.
    pub fn update(&mut self, tau: f64, y: &Point, alpha: f64) {
        match self.xbar.as_mut() {
            None => {
                self.s_prime = 1.0;
                self.xbar = Some(y.clone());
            }
            Some(xbar) => {
                self.s_prime = 1.0 + (-alpha * tau).exp() * self.s_prime;
                // (w xbar + y) / (w + 1) with w + 1 = S'_k
                let inv = 1.0 / self.s_prime;
                xbar.zip_mut_with(y, |xb, &yi| *xb += (yi - *xb) * inv);
            }
        }
        self.k += 1;
    }

    /// Weight of the newest point, `lambda_{k,k} = 1 / S'_k`.
    pub fn newest_weight(&self) -> f64 {
        1.0 / self.s_prime
    }
}

/// Functional form of [`AvgState::update`].
pub fn streaming_average_update(avg: &AvgState, tau: f64, y: &Point, alpha: f64) -> AvgState {
    let mut next = avg.clone();
    next.update(tau, y, alpha);
    next
}

/// When to evaluate the gradient at the running average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSchedule {
    Never,
    Every,
    /// Every `m`-th iteration (iterations `m-1, 2m-1, ...`).
    Stride(usize),
    /// Only after the last iteration.
    Final,
}

impl EvalSchedule {
    /// Default: stride `ceil(n / 100)`.
    pub fn default_for(n: usize) -> Self {
        EvalSchedule::Stride(n.div_ceil(100).max(1))
    }

    pub fn evaluates(self, k: usize, n: usize) -> bool {
        match self {
            EvalSchedule::Never => false,
            EvalSchedule::Every => true,
            EvalSchedule::Stride(m) => (k + 1).is_multiple_of(m.max(1)),
            EvalSchedule::Final => k + 1 == n,
        }
    }
}

/// What one step observed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub f_query: f64,
    pub grad_norm_query: f64,
    pub grad_norm_avg: Option<f64>,
}

/// Optimizer state `(x~_k, z~_k)` plus the running average and the
/// best-gradient tracker.
#[derive(Debug, Clone)]
pub struct CnaState {
    pub x_tilde: Point,
    pub z_tilde: Point,
    pub avg: AvgState,
    pub k: usize,
    best: BestTracker,
}

impl CnaState {
    /// Start at `x~_0 = z~_0 = x0`.
    pub fn new(x0: Point) -> Self {
        Self::from_parts(x0.clone(), x0)
    }

    pub fn from_parts(x_tilde: Point, z_tilde: Point) -> Self {
        Self { best: BestTracker::new(x_tilde.clone()), x_tilde, z_tilde, avg: AvgState::new(), k: 0 }
    }

    pub fn best_grad_norm(&self) -> f64 {
        self.best.norm
    }

    pub fn best_point(&self) -> &Point {
        &self.best.point
    }

    pub fn best_kind(&self) -> BestKind {
        self.best.kind
    }

    /// Query point `y~_k` for a gap `tau`.
    pub fn query_point(&self, p: &CnaParams, tau: f64) -> Point {
        let a = momentum_coefficient(p, tau);
        &self.x_tilde + &((&self.z_tilde - &self.x_tilde) * a)
    }

    /// Advance by one jump of gap `tau`. With `noise_seed`, the stochastic
    /// gradient oracle of `h` is queried instead of the exact gradient. When
    /// `eval_avg` is set the exact gradient at the running average is also
    /// evaluated (and counted) for output selection.
    pub fn step(
        &mut self,
        p: &CnaParams,
        tau: f64,
        h: &ObjectiveHandle,
        eval_avg: bool,
        noise_seed: Option<Seed>,
    ) -> Result<StepReport> {
        let fail = CoreError::NumericalFailure { iteration: self.k };
        if self.x_tilde.len() != h.dim() || self.z_tilde.len() != h.dim() {
            return Err(CoreError::Shape { expected: h.dim(), got: self.x_tilde.len() });
        }
        let a = momentum_coefficient(p, tau);
        let c = z_flow_coefficient(p, tau);
        let diff = &self.z_tilde - &self.x_tilde;
        let y = &self.x_tilde + &(&diff * a);
        let g = match noise_seed {
            Some(s) => h.eval_stoch_grad(y.view(), s)?,
            None => h.eval_grad(y.view())?,
        };
        if !all_finite(&g) {
            return Err(fail);
        }
        let f_query = h.eval_f(y.view())?;

        // z~ + c (x~ - z~) - gamma' g, using the pre-step x~.
        let mut z_next = &self.z_tilde - &(&diff * c);
        z_next.scaled_add(-p.gamma_prime, &g);
        let mut x_next = y.clone();
        x_next.scaled_add(-p.gamma, &g);
        if !all_finite(&x_next) || !all_finite(&z_next) {
            return Err(fail);
        }
        self.x_tilde = x_next;
        self.z_tilde = z_next;

        self.avg.update(tau, &y, p.alpha);
        let grad_norm_query = norm(&g);
        self.best.offer(grad_norm_query, &y, BestKind::Query);

        let grad_norm_avg = if eval_avg {
            let xbar = self.avg.xbar.as_ref().expect("average holds at least one point");
            let ga = h.eval_grad(xbar.view())?;
            if !all_finite(&ga) {
                return Err(fail);
            }
            let na = norm(&ga);
            let xbar = xbar.clone();
            self.best.offer(na, &xbar, BestKind::Average);
            Some(na)
        } else {
            None
        };
        self.k += 1;
        Ok(StepReport { f_query, grad_norm_query, grad_norm_avg })
    }
}

/// Seed of the gradient noise at step `k` of a run seeded with `seed`.
pub fn noise_seed(seed: Seed, k: usize) -> Seed {
    spawn_stream(spawn_stream(seed, u64::MAX), k as u64)
}

/// Run `n` iterations from `x~_0 = z~_0 = x0` on the jump schedule drawn
/// from `seed`. Stochastic gradients are used whenever `h` carries a noise
/// model. The best point is the query point or running average with the
/// smallest observed gradient norm, with averages considered only on the
/// iterations selected by `schedule`.
pub fn run(
    h: &ObjectiveHandle,
    x0: &Point,
    n: usize,
    seed: Seed,
    p: &CnaParams,
    schedule: EvalSchedule,
) -> Result<RunRecord> {
    if n == 0 {
        return Err(CoreError::Domain("run length must be at least 1".into()));
    }
    if x0.len() != h.dim() {
        return Err(CoreError::Shape { expected: h.dim(), got: x0.len() });
    }
    if !all_finite(x0) {
        return Err(CoreError::Domain("starting point has non-finite entries".into()));
    }
    let jumps = sample_increments(seed, n)?;
    let stochastic = h.has_stochastic_gradient();
    let evals_at_start = h.grad_evals();
    let mut state = CnaState::new(x0.clone());
    let mut rows = Vec::with_capacity(n);
    for (k, (&tau, &time)) in jumps.increments().iter().zip(jumps.times()).enumerate() {
        let noise = stochastic.then(|| noise_seed(seed, k));
        let report = state.step(p, tau, h, schedule.evaluates(k, n), noise)?;
        rows.push(TraceRow {
            iter: k,
            time: Some(time),
            tau: Some(tau),
            f: report.f_query,
            grad_norm: report.grad_norm_query,
            grad_norm_avg: report.grad_norm_avg,
            grad_evals: h.grad_evals() - evals_at_start,
        });
    }
    let summary = RunSummary {
        best_kind: state.best_kind(),
        best_grad_norm: state.best_grad_norm(),
        best_point: state.best_point().clone(),
        final_point: state.x_tilde.clone(),
        grad_evals: h.grad_evals() - evals_at_start,
        seed: Some(seed),
        params: p.describe(),
    };
    Ok(RunRecord { algorithm: Algorithm::Cna, rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{quadratic_objective, Constant};
    use approx::assert_relative_eq;
    use ndarray::array;
    use std::sync::Arc;

    #[test]
    fn smooth_schedule() {
        let p = params_smooth(1.0, None, 0.0).unwrap();
        assert_eq!(p.gamma(), 1.0);
        assert_relative_eq!(p.gamma_prime(), 1.707_106_78, epsilon = 1e-8);
        assert_relative_eq!(p.eta(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(p.gamma_prime() - p.gamma(), p.eta(), epsilon = 1e-15);

        let p = params_smooth(2.0, Some(0.5), 0.0).unwrap();
        assert_eq!(p.eta(), 0.5);
        assert_eq!(p.alpha(), 0.5);

        assert!(matches!(params_smooth(1.0, Some(1.5), 0.0), Err(CoreError::Parameter(_))));
        assert!(matches!(params_smooth(1.0, None, -0.8), Err(CoreError::Parameter(_))));
    }

    #[test]
    fn hessian_schedule() {
        let p = params_hessian(1.0, 128).unwrap();
        assert_relative_eq!(p.alpha(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.eta(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(p.eta_prime(), -0.207_106_78, epsilon = 1e-8);
        assert!(p.eta_prime() >= -p.eta());
        assert!(matches!(params_hessian(1.0, 7), Err(CoreError::Parameter(_))));
        for &(l, n) in &[(0.3, 8), (1.0, 1000), (50.0, 10_000), (1e-3, 17)] {
            let p = params_hessian(l, n).unwrap();
            let expect = (n as f64).powf(-1.0 / 7.0);
            assert!((p.eta() + p.eta_prime() - expect).abs() <= 1e-14);
            assert_eq!(p.alpha(), expect);
        }
    }

    #[test]
    fn sgc_schedule() {
        let a = params_sgc(1.0, 1.0, 0.2).unwrap();
        let b = params_smooth(1.0, None, 0.2).unwrap();
        assert_eq!(a, b);
        let p = params_sgc(1.0, 2.0, 0.0).unwrap();
        assert_eq!(p.gamma(), 0.5);
        assert_relative_eq!(p.eta(), 0.353_553_39, epsilon = 1e-8);
        assert!(matches!(params_sgc(1.0, 0.5, 0.0), Err(CoreError::Domain(_))));
    }

    #[test]
    fn coefficient_limits() {
        let p = CnaParams::new(0.1, 0.2, 0.5, 0.5).unwrap();
        assert!(momentum_coefficient(&p, 1e-300).abs() < 1e-299);
        assert!(z_flow_coefficient(&p, 1e-300).abs() < 1e-299);
        assert_relative_eq!(momentum_coefficient(&p, std::f64::consts::LN_2), 0.25, epsilon = 1e-15);

        let p = params_hessian(1.0, 128).unwrap();
        assert_eq!(momentum_coefficient(&p, 1e6), p.eta() / p.alpha());

        let p = CnaParams::new(0.1, 0.2, 0.5, 0.0).unwrap();
        assert_eq!(z_flow_coefficient(&p, 3.0), 0.0);
    }

    #[test]
    fn anchored_z_update_survives_vanishing_denominator() {
        let p = params_hessian(1.0, 128).unwrap();
        // e^{-alpha tau} = -eta'/eta
        let tau_star = -(-p.eta_prime() / p.eta()).ln() / p.alpha();
        let c = z_flow_coefficient(&p, tau_star);
        assert!(c.is_finite());
        let x = array![1.0, -2.0];
        let z = array![0.5, 3.0];
        for &tau in &[tau_star * (1.0 - 1e-3), tau_star * (1.0 + 1e-3)] {
            let beta = query_z_coefficient(&p, tau).unwrap();
            let a = momentum_coefficient(&p, tau);
            let y = &x + &((&z - &x) * a);
            let query = &z + &((&y - &z) * beta);
            let anchored = &z + &((&x - &z) * z_flow_coefficient(&p, tau));
            for (u, v) in query.iter().zip(anchored.iter()) {
                assert!((u - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn average_two_points() {
        let mut avg = AvgState::new();
        avg.update(1.0, &array![0.0], 0.5);
        assert_eq!(avg.s_prime, 1.0);
        assert_eq!(avg.xbar.as_ref().unwrap()[0], 0.0);
        avg.update(1.0, &array![1.0], 0.5);
        assert_relative_eq!(avg.s_prime, 1.606_530_66, epsilon = 1e-8);
        let got = avg.xbar.as_ref().unwrap()[0];
        assert_relative_eq!(got, 0.622_459_33, epsilon = 1e-8);
        let direct = (0.5f64 * 2.0).exp() / ((0.5f64).exp() + (0.5f64 * 2.0).exp());
        assert_relative_eq!(got, direct, epsilon = 1e-15);
    }

    #[test]
    fn average_of_constant_points() {
        let v = array![1.5, -2.0, 7.0];
        let mut avg = AvgState::new();
        for tau in [0.3, 2.0, 0.01, 5.0, 1.0] {
            avg = streaming_average_update(&avg, tau, &v, 0.7);
            for (a, b) in avg.xbar.as_ref().unwrap().iter().zip(v.iter()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn first_step_from_rest_queries_start() {
        let h = quadratic_objective(&[1.0, 3.0]).unwrap();
        let p = params_smooth(3.0, None, 0.1).unwrap();
        let x0 = array![1.0, -1.0];
        for tau in [0.01, 1.0, 40.0] {
            let s = CnaState::new(x0.clone());
            assert_eq!(s.query_point(&p, tau), x0);
        }
        let mut s = CnaState::new(x0.clone());
        s.step(&p, 0.7, &h, false, None).unwrap();
        assert_eq!(s.avg.xbar.as_ref().unwrap(), &x0);
    }

    #[test]
    fn zero_gradient_is_pure_flow() {
        let h = ObjectiveHandle::new(Arc::new(Constant { dim: 2, value: 1.0 }), Default::default());
        let p = CnaParams::new(0.1, 0.3, 0.6, 0.4).unwrap();
        let x = array![1.0, 0.0];
        let z = array![-1.0, 2.0];
        let mut s = CnaState::from_parts(x.clone(), z.clone());
        s.step(&p, 0.8, &h, false, None).unwrap();
        let (xf, zf) = ode_flow_closed_form(&x, &z, &p, 0.8);
        assert_eq!(s.x_tilde, xf);
        for (a, b) in s.z_tilde.iter().zip(zf.iter()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn flow_fixed_point_and_equilibrium() {
        let p = CnaParams::new(0.1, 0.3, 0.7, 0.3).unwrap();
        let x = array![1.0, 2.0];
        let (xf, zf) = ode_flow_closed_form(&x, &x, &p, 2.0);
        assert_eq!(xf, x);
        assert_eq!(zf, x);
        let z = array![-3.0, 4.0];
        let (xf, zf) = ode_flow_closed_form(&x, &z, &p, 1e3);
        let eq = (&x * 0.3 + &z * 0.7) / 1.0;
        for i in 0..2 {
            assert_relative_eq!(xf[i], eq[i], epsilon = 1e-12);
            assert_relative_eq!(zf[i], eq[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn run_accounting() {
        let h = quadratic_objective(&[1.0; 4]).unwrap();
        let p = params_smooth(1.0, None, 0.1).unwrap();
        let x0 = array![1.0, 2.0, 3.0, 4.0];
        let rec = run(&h, &x0, 1, Seed(1), &p, EvalSchedule::Never).unwrap();
        assert_eq!(rec.summary.grad_evals, 1);
        assert_eq!(rec.summary.best_kind, BestKind::Query);

        let h = h.fresh();
        let rec = run(&h, &x0, 50, Seed(1), &p, EvalSchedule::Every).unwrap();
        assert_eq!(rec.summary.grad_evals, 100);
        assert_eq!(h.grad_evals(), 100);
        assert_eq!(rec.rows.len(), 50);
        assert!(rec.rows.windows(2).all(|w| w[0].grad_evals <= w[1].grad_evals));

        let h = h.fresh();
        let rec = run(&h, &x0, 250, Seed(1), &p, EvalSchedule::default_for(250)).unwrap();
        // stride ceil(250/100) = 3
        assert_eq!(rec.summary.grad_evals, 250 + 83);
        let h = h.fresh();
        let rec = run(&h, &x0, 20, Seed(1), &p, EvalSchedule::Final).unwrap();
        assert_eq!(rec.summary.grad_evals, 21);
        assert!(rec.rows[19].grad_norm_avg.is_some());
        assert!(rec.rows[18].grad_norm_avg.is_none());
    }

    #[test]
    fn run_is_deterministic() {
        let h = quadratic_objective(&[1.0, 0.5, 0.1]).unwrap();
        let p = params_smooth(1.0, None, 0.1).unwrap();
        let x0 = array![1.0, 1.0, 1.0];
        let a = run(&h, &x0, 100, Seed(9), &p, EvalSchedule::Every).unwrap();
        let b = run(&h.fresh(), &x0, 100, Seed(9), &p, EvalSchedule::Every).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_reports_divergence() {
        // gamma far above 1/L makes the iterates blow up.
        let h = quadratic_objective(&[1e3]).unwrap();
        let p = CnaParams::new(10.0, 10.0, 0.5, 0.5).unwrap();
        let err = run(&h, &array![1.0], 10_000, Seed(2), &p, EvalSchedule::Never).unwrap_err();
        assert!(matches!(err, CoreError::NumericalFailure { .. }));
    }
}
