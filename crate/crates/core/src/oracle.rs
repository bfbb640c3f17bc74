//! Objective functions and gradient access.
//!
//! An [`ObjectiveHandle`] wraps a problem implementing [`Objective`] together
//! with its known constants, an optional stochastic-gradient noise model and a
//! gradient-evaluation counter. Matrices are flattened column-major into a
//! [`Point`], so optimizers stay dimension-agnostic.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::rng::{spawn_stream, Seed};

pub type Point = Array1<f64>;

/// A differentiable objective `f: R^d -> R`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: ArrayView1<'_, f64>) -> f64;
    fn gradient(&self, x: ArrayView1<'_, f64>) -> Point;
}

/// Known constants of a problem. All optional.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProblemConstants {
    /// Lipschitz constant of the gradient, `L`.
    pub lipschitz_grad: Option<f64>,
    /// Lipschitz constant of the Hessian, `L2`.
    pub lipschitz_hess: Option<f64>,
    /// Optimal value `f*`.
    pub optimum_value: Option<f64>,
}

/// Multiplicative gradient noise: `g(x, xi) = grad f(x) * (1 + zeta)` with
/// `zeta ~ U[-a, a]`, so `E g = grad f` and `E|g|^2 = (1 + a^2/3) |grad f|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativeNoise {
    pub scale: f64,
    pub rho: f64,
}

impl MultiplicativeNoise {
    /// Exact second-moment ratio `E|g|^2 / |grad f|^2`.
    pub fn second_moment_ratio(&self) -> f64 {
        1.0 + self.scale * self.scale / 3.0
    }

    fn draw(&self, seed: Seed) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let mut rng = seed.rng();
        rng.random_range(-self.scale..=self.scale)
    }
}

pub struct ObjectiveHandle {
    problem: Arc<dyn Objective>,
    constants: ProblemConstants,
    noise: Option<MultiplicativeNoise>,
    grad_evals: AtomicU64,
}

impl std::fmt::Debug for ObjectiveHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObjectiveHandle")
            .field("dim", &self.dim())
            .field("constants", &self.constants)
            .field("noise", &self.noise)
            .field("grad_evals", &self.grad_evals())
            .finish()
    }
}

impl ObjectiveHandle {
    pub fn new(problem: Arc<dyn Objective>, constants: ProblemConstants) -> Self {
        Self { problem, constants, noise: None, grad_evals: AtomicU64::new(0) }
    }

    /// A handle on the same problem with a zeroed counter, for per-trial use.
    pub fn fresh(&self) -> Self {
        Self {
            problem: Arc::clone(&self.problem),
            constants: self.constants,
            noise: self.noise,
            grad_evals: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn constants(&self) -> ProblemConstants {
        self.constants
    }

    pub fn lipschitz_grad(&self) -> Option<f64> {
        self.constants.lipschitz_grad
    }

    pub fn lipschitz_hess(&self) -> Option<f64> {
        self.constants.lipschitz_hess
    }

    pub fn optimum_value(&self) -> Option<f64> {
        self.constants.optimum_value
    }

    pub fn noise(&self) -> Option<MultiplicativeNoise> {
        self.noise
    }

    /// Strong-growth constant, present iff a stochastic oracle is attached.
    pub fn sgc_rho(&self) -> Option<f64> {
        self.noise.map(|n| n.rho)
    }

    pub fn has_stochastic_gradient(&self) -> bool {
        self.noise.is_some()
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals.load(Ordering::Relaxed)
    }

    fn check_dim(&self, x: ArrayView1<'_, f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(CoreError::Shape { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn eval_f(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.problem.value(x))
    }

    /// Deterministic gradient. Counts one evaluation.
    pub fn eval_grad(&self, x: ArrayView1<'_, f64>) -> Result<Point> {
        self.check_dim(x)?;
        self.grad_evals.fetch_add(1, Ordering::Relaxed);
        Ok(self.problem.gradient(x))
    }

    /// Stochastic gradient with noise drawn from `seed`. Counts one evaluation.
    pub fn eval_stoch_grad(&self, x: ArrayView1<'_, f64>, seed: Seed) -> Result<Point> {
        let noise = self.noise.ok_or(CoreError::NoStochasticGradient)?;
        self.check_dim(x)?;
        self.grad_evals.fetch_add(1, Ordering::Relaxed);
        let zeta = noise.draw(seed);
        let mut g = self.problem.gradient(x);
        g *= 1.0 + zeta;
        Ok(g)
    }
}

/// Central-difference gradient, one pair of function evaluations per
/// coordinate. Does not touch the gradient counter.
pub fn finite_diff_grad(h: &ObjectiveHandle, x: ArrayView1<'_, f64>, step: f64) -> Result<Point> {
    if !(step > 0.0) {
        return Err(CoreError::Domain(format!("step must be positive, got {step}")));
    }
    h.check_dim(x)?;
    let mut probe = x.to_owned();
    let mut g = Array1::zeros(x.len());
    for i in 0..x.len() {
        let xi = probe[i];
        probe[i] = xi + step;
        let fp = h.problem.value(probe.view());
        probe[i] = xi - step;
        let fm = h.problem.value(probe.view());
        probe[i] = xi;
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Attach multiplicative noise of half-width `noise_scale` to `h`.
///
/// `rho` must be at least one and at least the exact second-moment ratio
/// `1 + noise_scale^2 / 3`, so the strong growth condition holds.
pub fn wrap_stochastic(h: &ObjectiveHandle, noise_scale: f64, rho: f64) -> Result<ObjectiveHandle> {
    if !(rho >= 1.0) {
        return Err(CoreError::Domain(format!("rho must be >= 1, got {rho}")));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(CoreError::Domain(format!("noise scale must be finite and nonnegative, got {noise_scale}")));
    }
    let noise = MultiplicativeNoise { scale: noise_scale, rho };
    if noise.second_moment_ratio() > rho {
        return Err(CoreError::Domain(format!(
            "noise scale {noise_scale} has second-moment ratio {} > rho = {rho}",
            noise.second_moment_ratio()
        )));
    }
    let mut out = h.fresh();
    out.noise = Some(noise);
    Ok(out)
}

/// Separable convex quadratic `f(x) = 1/2 sum lambda_i x_i^2`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    eigenvalues: Array1<f64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        0.5 * self.eigenvalues.iter().zip(x.iter()).map(|(l, xi)| l * xi * xi).sum::<f64>()
    }

    fn gradient(&self, x: ArrayView1<'_, f64>) -> Point {
        &self.eigenvalues * &x
    }
}

pub fn quadratic_objective(eigenvalues: &[f64]) -> Result<ObjectiveHandle> {
    if eigenvalues.is_empty() {
        return Err(CoreError::Domain("quadratic needs at least one eigenvalue".into()));
    }
    if let Some(bad) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(CoreError::Domain(format!("eigenvalues must be positive, got {bad}")));
    }
    let lmax = eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let problem = Quadratic { eigenvalues: Array1::from(eigenvalues.to_vec()) };
    Ok(ObjectiveHandle::new(
        Arc::new(problem),
        ProblemConstants { lipschitz_grad: Some(lmax), lipschitz_hess: None, optimum_value: Some(0.0) },
    ))
}

/// Symmetric low-rank factorization instance `min_U |U U^T - M*|_F^2`.
#[derive(Debug, Clone)]
pub struct MatFacProblem {
    pub d: usize,
    pub r: usize,
    pub mstar: Array2<f64>,
    /// Upper bound on the largest singular value of `M*`.
    pub gamma_cap: f64,
}

impl MatFacProblem {
    /// Build from a given symmetric target, with `gamma_cap` set to its
    /// largest singular value.
    pub fn new(mstar: Array2<f64>, r: usize) -> Result<Self> {
        let (rows, cols) = mstar.dim();
        if rows != cols {
            return Err(CoreError::Shape { expected: rows, got: cols });
        }
        if r == 0 || r > rows {
            return Err(CoreError::Domain(format!("rank must satisfy 1 <= r <= d, got r={r}, d={rows}")));
        }
        if mstar.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Domain("target matrix has non-finite entries".into()));
        }
        if (&mstar - &mstar.t()).iter().any(|v| *v != 0.0) {
            return Err(CoreError::Domain("target matrix must be symmetric".into()));
        }
        let gamma_cap = sigma_max_symmetric(mstar.view(), Seed(0x5eed));
        Ok(Self { d: rows, r, mstar, gamma_cap })
    }

    /// Smoothness constant `8 Gamma` on `{ |U|_F^2 < Gamma }`.
    pub fn lipschitz_grad(&self) -> f64 {
        8.0 * self.gamma_cap
    }

    /// Hessian Lipschitz constant `12 Gamma^{1/2}` on the same ball.
    pub fn lipschitz_hess(&self) -> f64 {
        12.0 * self.gamma_cap.sqrt()
    }

    /// Random starting factor with i.i.d. `N(0, std^2)` entries, flattened
    /// column-major.
    pub fn random_factor(&self, seed: Seed, std: f64) -> Point {
        let mut rng = seed.rng();
        (0..self.d * self.r).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    fn factor(&self, x: ArrayView1<'_, f64>) -> Array2<f64> {
        let flat = x.to_vec();
        Array2::from_shape_vec((self.d, self.r).f(), flat).expect("checked dimension")
    }
}

/// Gaussian target: a symmetric `r x r` block of `N(0,1)` entries (each
/// drawn once for `i <= j`) in the top-left corner, zero elsewhere.
pub fn build_mstar(seed: Seed, d: usize, r: usize) -> Result<MatFacProblem> {
    if r == 0 || r > d {
        return Err(CoreError::Domain(format!("rank must satisfy 1 <= r <= d, got r={r}, d={d}")));
    }
    let mut rng = seed.rng();
    let mut m = Array2::<f64>::zeros((d, d));
    for i in 0..r {
        for j in i..r {
            let g: f64 = rng.sample(StandardNormal);
            m[[i, j]] = g;
            m[[j, i]] = g;
        }
    }
    let gamma_cap = sigma_max_symmetric(m.view(), spawn_stream(seed, 1));
    Ok(MatFacProblem { d, r, mstar: m, gamma_cap })
}

/// Largest singular value of a symmetric matrix by power iteration on `M^2`,
/// tolerance `1e-10` on the relative change, at most `10^4` iterations.
pub fn sigma_max_symmetric(m: ArrayView2<'_, f64>, seed: Seed) -> f64 {
    const TOL: f64 = 1e-10;
    const MAX_ITERS: usize = 10_000;
    let n = m.nrows();
    let mut rng = seed.rng();
    let mut v: Array1<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    v /= norm;
    let mut sigma = 0.0;
    for _ in 0..MAX_ITERS {
        let mv = m.dot(&v);
        let w = m.dot(&mv);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        // Rayleigh quotient of M^2 at the current unit vector.
        let mv = m.dot(&v);
        let next = mv.dot(&mv).sqrt();
        let done = (next - sigma).abs() <= TOL * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

struct MatFac {
    problem: MatFacProblem,
}

impl Objective for MatFac {
    fn dim(&self) -> usize {
        self.problem.d * self.problem.r
    }

    fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        let u = self.problem.factor(x);
        let resid = u.dot(&u.t()) - &self.problem.mstar;
        resid.iter().map(|v| v * v).sum()
    }

    fn gradient(&self, x: ArrayView1<'_, f64>) -> Point {
        // 4 (U U^T - M*) U = 4 (U (U^T U) - M* U)
        let u = self.problem.factor(x);
        let utu = u.t().dot(&u);
        let g = (u.dot(&utu) - self.problem.mstar.dot(&u)) * 4.0;
        // Column-major flatten to match the input layout.
        g.t().iter().cloned().collect()
    }
}

pub fn matfac_objective(p: &MatFacProblem) -> ObjectiveHandle {
    let constants = ProblemConstants {
        lipschitz_grad: Some(p.lipschitz_grad()),
        lipschitz_hess: Some(p.lipschitz_hess()),
        optimum_value: None,
    };
    ObjectiveHandle::new(Arc::new(MatFac { problem: p.clone() }), constants)
}

/// Constant objective, used to exercise zero-gradient paths.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl Objective for Constant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: ArrayView1<'_, f64>) -> f64 {
        self.value
    }

    fn gradient(&self, _x: ArrayView1<'_, f64>) -> Point {
        Array1::zeros(self.dim)
    }
}

/// General quadratic `1/2 x^T A x + b^T x` with symmetric `A`; may be
/// indefinite.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
}

impl Objective for DenseQuadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        0.5 * x.dot(&self.a.dot(&x)) + self.b.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<'_, f64>) -> Point {
        self.a.dot(&x) + &self.b
    }
}
