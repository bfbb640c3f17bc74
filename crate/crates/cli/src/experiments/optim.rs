//! Optimizer experiments: matrix factorization, the smooth-rate check and
//! single configured runs.

use contnest_core::baselines::{gd_run, nce_run, restarted_nm_run, NceParams, RestartParams};
use contnest_core::cna::{self, params_hessian, params_sgc, params_smooth, CnaParams, EvalSchedule};
use contnest_core::oracle::{build_mstar, matfac_objective, quadratic_objective, wrap_stochastic, MatFacProblem};
use contnest_core::rng::{spawn_stream, Seed};
use contnest_core::stats::summarize;
use contnest_core::{ObjectiveHandle, Point, RunRecord};
use rayon::prelude::*;

use crate::config::{CnaSchedule, OptimizerKind, Preset, ProblemKind, Settings};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, Outcome, Summary, Table};

pub const TRACE_HEADER: &[&str] = &["algo", "seed", "iter", "grad_evals", "f", "grad_norm_y", "grad_norm_xbar"];
pub const TRACE_MEAN_HEADER: &[&str] = &["algo", "iter", "grad_evals", "mean_f", "min_f", "max_f"];
pub const SMOOTH_RATE_HEADER: &[&str] = &["k", "mean_min_grad_sq", "stderr", "bound", "holds"];

const DEFAULT_ETA_PRIME: f64 = 0.1;

/// A benchmark problem built from the settings.
pub struct Problem {
    pub kind: ProblemKind,
    pub handle: ObjectiveHandle,
    pub matfac: Option<MatFacProblem>,
}

impl Problem {
    pub fn build(s: &Settings, default_kind: ProblemKind) -> Result<Self, CliError> {
        let kind = s.problem.unwrap_or(default_kind);
        let (handle, matfac) = match kind {
            ProblemKind::Quadratic => {
                let ev = match &s.eigenvalues {
                    Some(ev) => ev.clone(),
                    None => vec![1.0; s.d.unwrap_or(10)],
                };
                (quadratic_objective(&ev)?, None)
            }
            ProblemKind::Matfac => {
                let (d0, r0) = match s.preset {
                    Preset::Desk => (60, 15),
                    Preset::Paper => (200, 50),
                };
                let d = s.d.unwrap_or(d0);
                let r = s.r.unwrap_or(r0.min(d));
                let p = build_mstar(spawn_stream(Seed(s.seed), 0), d, r)?;
                (matfac_objective(&p), Some(p))
            }
        };
        let handle = match s.noise {
            Some(a) => wrap_stochastic(&handle, a, s.rho.unwrap_or(1.0 + a * a / 3.0))?,
            None => handle,
        };
        Ok(Self { kind, handle, matfac })
    }

    pub fn lipschitz(&self) -> f64 {
        self.handle.lipschitz_grad().expect("benchmark problems know L")
    }

    /// Starting point of run `run_seed`: a constant vector for quadratics, a
    /// Gaussian factor for matrix factorization.
    pub fn start(&self, s: &Settings, run_seed: Seed) -> Point {
        match &self.matfac {
            None => Point::from_elem(self.handle.dim(), s.x0),
            Some(p) => {
                let std = s.init_std.unwrap_or_else(|| default_init_std(p));
                p.random_factor(spawn_stream(run_seed, 0), std)
            }
        }
    }
}

/// Entry scale with `E |U0|_F^2 = Gamma / 2`, inside the ball where the
/// smoothness constants hold.
pub fn default_init_std(p: &MatFacProblem) -> f64 {
    (p.gamma_cap / (2.0 * (p.d * p.r) as f64)).sqrt()
}

/// Seed of run `k` within an experiment seeded with `seed`. Stream 0 is
/// reserved for the problem instance.
pub fn run_seed(seed: u64, k: usize) -> Seed {
    spawn_stream(Seed(seed), 1 + k as u64)
}

fn need(key: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("{key}: required by cna_schedule = manual")))
}

pub fn cna_params(s: &Settings, p: &Problem, n: usize) -> Result<CnaParams, CliError> {
    let l = p.lipschitz();
    let eta_prime = s.eta_prime.unwrap_or(DEFAULT_ETA_PRIME);
    let schedule = match s.cna_schedule {
        CnaSchedule::Auto if p.handle.has_stochastic_gradient() => CnaSchedule::Sgc,
        CnaSchedule::Auto if p.kind == ProblemKind::Matfac => CnaSchedule::Hessian,
        CnaSchedule::Auto => CnaSchedule::Smooth,
        other => other,
    };
    let params = match schedule {
        CnaSchedule::Smooth => params_smooth(l, s.gamma, eta_prime)?,
        CnaSchedule::Hessian => params_hessian(l, n)?,
        CnaSchedule::Sgc => params_sgc(l, p.handle.sgc_rho().unwrap_or(1.0), eta_prime)?,
        CnaSchedule::Manual => CnaParams::new(
            need("gamma", s.gamma)?,
            need("gamma_prime", s.gamma_prime)?,
            need("eta", s.eta)?,
            need("eta_prime", s.eta_prime)?,
        )?,
        CnaSchedule::Auto => unreachable!("resolved above"),
    };
    Ok(params)
}

/// Append trace rows of `rec` for which `keep(iter)` holds.
pub fn push_trace(t: &mut Table, rec: &RunRecord, seed: Seed, keep: impl Fn(usize) -> bool) {
    for row in rec.rows.iter().filter(|r| keep(r.iter)) {
        t.push([
            rec.algorithm.tag().to_string(),
            seed.0.to_string(),
            row.iter.to_string(),
            row.grad_evals.to_string(),
            fmt_f64(row.f),
            fmt_f64(row.grad_norm),
            fmt_opt(row.grad_norm_avg),
        ]);
    }
}

/// Mean over runs of the last `f` recorded within `budget` gradient
/// evaluations.
fn mean_f_at_budget(runs: &[RunRecord], budget: u64) -> f64 {
    let vals: Vec<f64> = runs
        .iter()
        .map(|r| r.rows.iter().take_while(|row| row.grad_evals <= budget).last().map_or(f64::NAN, |row| row.f))
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

fn push_mean_trace(t: &mut Table, runs: &[RunRecord]) {
    let Some(first) = runs.first() else { return };
    for (k, row) in first.rows.iter().enumerate() {
        let fs: Vec<f64> = runs.iter().map(|r| r.rows[k].f).collect();
        let mean = fs.iter().sum::<f64>() / fs.len() as f64;
        let min = fs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        t.push([
            first.algorithm.tag().to_string(),
            k.to_string(),
            row.grad_evals.to_string(),
            fmt_f64(mean),
            fmt_f64(min),
            fmt_f64(max),
        ]);
    }
}

pub fn matfac(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(match s.preset {
        Preset::Desk => 500,
        Preset::Paper => 1000,
    });
    let trials = s.trials.unwrap_or(10);
    let problem = Problem::build(s, ProblemKind::Matfac)?;
    let Some(mf) = problem.matfac.as_ref() else {
        return Err(CliError::Config("problem: matfac experiment needs problem = \"matfac\"".into()));
    };
    let l = problem.lipschitz();
    let gamma = 1.0 / l;
    let params = params_hessian(l, n)?;
    let schedule = s.eval_schedule.unwrap_or(EvalSchedule::Never);

    let runs: Vec<(Seed, RunRecord, RunRecord)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let seed = run_seed(s.seed, k);
            let x0 = problem.start(s, seed);
            let gd = gd_run(&problem.handle.fresh(), &x0, gamma, n)?;
            let cna = cna::run(&problem.handle.fresh(), &x0, n, seed, &params, schedule)?;
            Ok((seed, gd, cna))
        })
        .collect::<Result<_, contnest_core::CoreError>>()?;

    let mut trace = Table::new("trace.csv", TRACE_HEADER);
    for (seed, gd, cna) in &runs {
        push_trace(&mut trace, gd, *seed, |_| true);
        push_trace(&mut trace, cna, *seed, |_| true);
    }
    let gd_runs: Vec<RunRecord> = runs.iter().map(|r| r.1.clone()).collect();
    let cna_runs: Vec<RunRecord> = runs.iter().map(|r| r.2.clone()).collect();
    let mut mean = Table::new("trace_mean.csv", TRACE_MEAN_HEADER);
    push_mean_trace(&mut mean, &gd_runs);
    push_mean_trace(&mut mean, &cna_runs);

    let budget = gd_runs.iter().chain(&cna_runs).map(|r| r.summary.grad_evals).min().unwrap_or(0);
    let f_gd = mean_f_at_budget(&gd_runs, budget);
    let f_cna = mean_f_at_budget(&cna_runs, budget);
    let gd_monotone = gd_runs.iter().all(|r| r.rows.windows(2).all(|w| w[1].f <= w[0].f));

    let mut summary = Summary::default();
    summary.add("experiment", "matfac");
    summary.add("preset", s.preset.tag());
    summary.add("d", mf.d.to_string());
    summary.add("r", mf.r.to_string());
    summary.add("n", n.to_string());
    summary.add("trials", trials.to_string());
    summary.add("seed", s.seed.to_string());
    summary.add_f64("sigma_max", mf.gamma_cap);
    summary.add_f64("L", l);
    summary.add_f64("gamma", gamma);
    summary.add_f64("alpha", params.alpha());
    summary.add("budget", budget.to_string());
    summary.add_f64("mean_f_gd", f_gd);
    summary.add_f64("mean_f_cna", f_cna);
    summary.add("cna_le_gd", (f_cna <= f_gd).to_string());
    summary.add("gd_monotone", gd_monotone.to_string());
    Ok(Outcome { tables: vec![trace, mean], summary })
}

/// About `points` log-spaced iteration counts in `1..=n`, always including
/// both ends.
pub fn log_grid(n: usize, points: usize) -> Vec<usize> {
    let points = points.max(2);
    let mut ks: Vec<usize> = (0..points)
        .map(|j| (n as f64).powf(j as f64 / (points - 1) as f64).round() as usize)
        .map(|k| k.clamp(1, n))
        .collect();
    ks.dedup();
    ks
}

pub fn smooth_rate(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(2000);
    let trials = s.trials.unwrap_or(200);
    if s.noise.is_some() {
        return Err(CliError::Config("noise: smooth-rate uses exact gradients".into()));
    }
    let problem = Problem::build(s, ProblemKind::Quadratic)?;
    let Some(fstar) = problem.handle.optimum_value() else {
        return Err(CliError::Config(format!(
            "problem: `{}` has no known optimum value; smooth-rate needs one",
            problem.kind.tag()
        )));
    };
    let p = params_smooth(problem.lipschitz(), s.gamma, s.eta_prime.unwrap_or(DEFAULT_ETA_PRIME))?;
    let x0 = problem.start(s, run_seed(s.seed, 0));
    let f0 = problem.handle.eval_f(x0.view())?;
    let grid = log_grid(n, s.grid_points.unwrap_or(30));

    let runs: Vec<(Seed, RunRecord)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let seed = run_seed(s.seed, k);
            let rec = cna::run(&problem.handle.fresh(), &x0, n, seed, &p, EvalSchedule::Never)?;
            Ok((seed, rec))
        })
        .collect::<Result<_, contnest_core::CoreError>>()?;

    // running min of |grad f(y_i)|^2 over i < k, per run
    let mins: Vec<Vec<f64>> = runs
        .iter()
        .map(|(_, rec)| {
            let mut m = f64::INFINITY;
            rec.rows
                .iter()
                .map(|r| {
                    m = m.min(r.grad_norm * r.grad_norm);
                    m
                })
                .collect()
        })
        .collect();

    let mut table = Table::new("smooth_rate.csv", SMOOTH_RATE_HEADER);
    let mut all_hold = true;
    let mut worst = 0.0f64;
    for &k in &grid {
        let col: Vec<f64> = mins.iter().map(|m| m[k - 1]).collect();
        let sm = summarize_or_single(&col);
        let bound = 4.0 * (f0 - fstar) / (p.gamma() * k as f64);
        let holds = sm.0 <= bound;
        all_hold &= holds;
        worst = worst.max(sm.0 / bound);
        table.push([k.to_string(), fmt_f64(sm.0), fmt_f64(sm.1), fmt_f64(bound), holds.to_string()]);
    }
    let mut trace = Table::new("trace.csv", TRACE_HEADER);
    for (seed, rec) in &runs {
        push_trace(&mut trace, rec, *seed, |iter| grid.binary_search(&(iter + 1)).is_ok());
    }

    let mut summary = Summary::default();
    summary.add("experiment", "smooth-rate");
    summary.add("d", problem.handle.dim().to_string());
    summary.add("n", n.to_string());
    summary.add("trials", trials.to_string());
    summary.add("seed", s.seed.to_string());
    summary.add_f64("gamma", p.gamma());
    summary.add_f64("eta_prime", p.eta_prime());
    summary.add_f64("f0", f0);
    summary.add_f64("fstar", fstar);
    summary.add_f64("max_mean_over_bound", worst);
    summary.add("all_hold", all_hold.to_string());
    Ok(Outcome { tables: vec![table, trace], summary })
}

fn summarize_or_single(v: &[f64]) -> (f64, f64) {
    if v.len() >= 2 {
        let s = summarize(v);
        (s.mean, s.stderr)
    } else {
        (v[0], 0.0)
    }
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    let n = s.n.unwrap_or(1000);
    let problem = Problem::build(s, ProblemKind::Quadratic)?;
    let seed = run_seed(s.seed, 0);
    let x0 = problem.start(s, seed);
    let h = problem.handle.fresh();
    let l = problem.lipschitz();
    let mut summary = Summary::default();
    summary.add("experiment", "run");
    summary.add("problem", problem.kind.tag());
    summary.add("optimizer", s.optimizer.tag());
    summary.add("n", n.to_string());
    summary.add("seed", seed.0.to_string());

    let rec = match s.optimizer {
        OptimizerKind::Cna => {
            let p = cna_params(s, &problem, n)?;
            cna::run(&h, &x0, n, seed, &p, s.eval_schedule.unwrap_or(EvalSchedule::default_for(n)))?
        }
        OptimizerKind::Gd => gd_run(&h, &x0, s.gamma.unwrap_or(1.0 / l), n)?,
        OptimizerKind::Nce => {
            let p = NceParams {
                eta: s.eta.unwrap_or(1.0 / l),
                theta: s.theta.unwrap_or(0.1),
                gamma_nc: s.gamma_nc,
                s: s.s.unwrap_or(0.1),
            };
            nce_run(&h, &x0, &p, n)?
        }
        OptimizerKind::RestartedNm => {
            let p = RestartParams {
                b: s.b.unwrap_or(1.0),
                k: s.k.unwrap_or(n),
                eta: s.eta.unwrap_or(1.0 / l),
                theta: s.theta.unwrap_or(0.1),
                max_grad_evals: s.max_grad_evals.unwrap_or(n),
            };
            let (y_hat, rec) = restarted_nm_run(&h, &x0, &p)?;
            summary.add_f64("f_output", h.eval_f(y_hat.view())?);
            rec
        }
    };
    let mut trace = Table::new("trace.csv", TRACE_HEADER);
    push_trace(&mut trace, &rec, seed, |_| true);

    let sm = &rec.summary;
    summary.add("grad_evals", sm.grad_evals.to_string());
    summary.add("best_kind", sm.best_kind.tag());
    summary.add_f64("best_grad_norm", sm.best_grad_norm);
    summary.add_f64("f_best", h.eval_f(sm.best_point.view())?);
    summary.add_f64("f_final", h.eval_f(sm.final_point.view())?);
    for (name, v) in &sm.params {
        summary.add_f64(format!("param.{name}"), *v);
    }
    Ok(Outcome { tables: vec![trace], summary })
}
