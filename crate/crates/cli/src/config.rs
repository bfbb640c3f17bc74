//! Experiment configuration: a flat TOML file overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use contnest_core::cna::EvalSchedule;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    VerifyConditions,
    DeltaRatio,
    Histograms,
    Matfac,
    SmoothRate,
    Run,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::VerifyConditions,
        Experiment::DeltaRatio,
        Experiment::Histograms,
        Experiment::Matfac,
        Experiment::SmoothRate,
        Experiment::Run,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::VerifyConditions => "verify-conditions",
            Experiment::DeltaRatio => "delta-ratio",
            Experiment::Histograms => "histograms",
            Experiment::Matfac => "matfac",
            Experiment::SmoothRate => "smooth-rate",
            Experiment::Run => "run",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

fn one_of<T: Copy>(key: &str, value: &str, all: &[T], tag: impl Fn(T) -> &'static str) -> Result<T, CliError> {
    all.iter().copied().find(|&t| tag(t) == value).ok_or_else(|| {
        let expected: Vec<_> = all.iter().map(|&t| tag(t)).collect();
        CliError::Config(format!("{key}: unknown value `{value}`, expected one of {}", expected.join(", ")))
    })
}

impl FromStr for Experiment {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        one_of("experiment", s, &Experiment::ALL, Experiment::tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    Desk,
    #[default]
    Paper,
}

impl Preset {
    pub fn tag(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        one_of("preset", s, &[Preset::Desk, Preset::Paper], Preset::tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Quadratic,
    Matfac,
}

impl ProblemKind {
    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::Matfac => "matfac",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Cna,
    Gd,
    Nce,
    RestartedNm,
}

impl OptimizerKind {
    pub fn tag(self) -> &'static str {
        match self {
            OptimizerKind::Cna => "cna",
            OptimizerKind::Gd => "gd",
            OptimizerKind::Nce => "nce",
            OptimizerKind::RestartedNm => "restarted-nm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnaSchedule {
    Auto,
    Smooth,
    Hessian,
    Sgc,
    Manual,
}

impl CnaSchedule {
    pub fn tag(self) -> &'static str {
        match self {
            CnaSchedule::Auto => "auto",
            CnaSchedule::Smooth => "smooth",
            CnaSchedule::Hessian => "hessian",
            CnaSchedule::Sgc => "sgc",
            CnaSchedule::Manual => "manual",
        }
    }
}

/// Raw contents of a config file. Every key is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub out_dir: Option<PathBuf>,

    pub problem: Option<String>,
    pub d: Option<usize>,
    pub r: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    pub x0: Option<f64>,
    pub init_std: Option<f64>,
    pub noise: Option<f64>,
    pub rho: Option<f64>,

    pub optimizer: Option<String>,
    pub cna_schedule: Option<String>,
    pub gamma: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub eta: Option<f64>,
    pub eta_prime: Option<f64>,
    pub theta: Option<f64>,
    pub gamma_nc: Option<f64>,
    pub s: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub max_grad_evals: Option<usize>,
    pub eval_schedule: Option<String>,

    pub indices: Option<Vec<usize>>,
    pub grid_points: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub preset: Option<Preset>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Fully validated settings for one experiment. Experiment-specific defaults
/// are applied by the experiment itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: Experiment,
    pub preset: Preset,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub c: f64,
    pub alpha: Option<f64>,
    pub out_dir: PathBuf,

    pub problem: Option<ProblemKind>,
    pub d: Option<usize>,
    pub r: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    pub x0: f64,
    pub init_std: Option<f64>,
    pub noise: Option<f64>,
    pub rho: Option<f64>,

    pub optimizer: OptimizerKind,
    pub cna_schedule: CnaSchedule,
    pub gamma: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub eta: Option<f64>,
    pub eta_prime: Option<f64>,
    pub theta: Option<f64>,
    pub gamma_nc: Option<f64>,
    pub s: Option<f64>,
    pub b: Option<f64>,
    pub k: Option<usize>,
    pub max_grad_evals: Option<usize>,
    pub eval_schedule: Option<EvalSchedule>,

    pub indices: Option<Vec<usize>>,
    pub grid_points: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 1;

fn parse_eval_schedule(s: &str) -> Result<EvalSchedule, CliError> {
    let bad =
        || CliError::Config(format!("eval_schedule: unknown value `{s}`, expected never, every, final or stride:<m>"));
    match s {
        "never" => Ok(EvalSchedule::Never),
        "every" => Ok(EvalSchedule::Every),
        "final" => Ok(EvalSchedule::Final),
        _ => {
            let m: usize = s.strip_prefix("stride:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            Ok(EvalSchedule::Stride(m))
        }
    }
}

fn positive(key: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(CliError::Config(format!("{key}: must be positive and finite, got {x}")))
        }
        _ => Ok(()),
    }
}

impl Settings {
    /// Merge a config file, flags and the experiment chosen on the command
    /// line.
    pub fn resolve(experiment: Experiment, file: ConfigFile, o: Overrides) -> Result<Self, CliError> {
        if let Some(tag) = &file.experiment {
            let from_file: Experiment = tag.parse()?;
            if from_file != experiment {
                return Err(CliError::Config(format!(
                    "experiment: config file is for `{from_file}` but `{experiment}` was requested"
                )));
            }
        }
        let preset = match (o.preset, &file.preset) {
            (Some(p), _) => p,
            (None, Some(t)) => t.parse()?,
            (None, None) => Preset::default(),
        };
        let problem = file
            .problem
            .as_deref()
            .map(|t| one_of("problem", t, &[ProblemKind::Quadratic, ProblemKind::Matfac], ProblemKind::tag))
            .transpose()?;
        let optimizer = file
            .optimizer
            .as_deref()
            .map(|t| {
                one_of(
                    "optimizer",
                    t,
                    &[OptimizerKind::Cna, OptimizerKind::Gd, OptimizerKind::Nce, OptimizerKind::RestartedNm],
                    OptimizerKind::tag,
                )
            })
            .transpose()?
            .unwrap_or(OptimizerKind::Cna);
        let cna_schedule = file
            .cna_schedule
            .as_deref()
            .map(|t| {
                one_of(
                    "cna_schedule",
                    t,
                    &[
                        CnaSchedule::Auto,
                        CnaSchedule::Smooth,
                        CnaSchedule::Hessian,
                        CnaSchedule::Sgc,
                        CnaSchedule::Manual,
                    ],
                    CnaSchedule::tag,
                )
            })
            .transpose()?
            .unwrap_or(CnaSchedule::Auto);
        let eval_schedule = file.eval_schedule.as_deref().map(parse_eval_schedule).transpose()?;

        let settings = Settings {
            experiment,
            preset,
            n: o.n.or(file.n),
            trials: o.trials.or(file.trials),
            seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            c: o.c.or(file.c).unwrap_or(contnest_core::diagnostics::DEFAULT_C),
            alpha: o.alpha.or(file.alpha),
            out_dir: o.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("out").join(experiment.tag())),
            problem,
            d: file.d,
            r: file.r,
            eigenvalues: file.eigenvalues,
            x0: file.x0.unwrap_or(1.0),
            init_std: file.init_std,
            noise: file.noise,
            rho: file.rho,
            optimizer,
            cna_schedule,
            gamma: file.gamma,
            gamma_prime: file.gamma_prime,
            eta: file.eta,
            eta_prime: file.eta_prime,
            theta: file.theta,
            gamma_nc: file.gamma_nc,
            s: file.s,
            b: file.b,
            k: file.k,
            max_grad_evals: file.max_grad_evals,
            eval_schedule,
            indices: file.indices,
            grid_points: file.grid_points,
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), CliError> {
        positive("C", Some(self.c))?;
        positive("alpha", self.alpha)?;
        positive("init_std", self.init_std)?;
        positive("gamma", self.gamma)?;
        positive("gamma_prime", self.gamma_prime)?;
        positive("eta", self.eta)?;
        positive("s", self.s)?;
        positive("B", self.b)?;
        positive("rho", self.rho)?;
        for (key, v) in [("n", self.n), ("trials", self.trials), ("d", self.d), ("r", self.r), ("K", self.k)] {
            if v == Some(0) {
                return Err(CliError::Config(format!("{key}: must be at least 1")));
            }
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t <= 1.0) {
                return Err(CliError::Config(format!("theta: must lie in (0, 1], got {t}")));
            }
        }
        if let Some(a) = self.noise {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!("noise: must be finite and nonnegative, got {a}")));
            }
        }
        if !self.x0.is_finite() {
            return Err(CliError::Config("x0: must be finite".into()));
        }
        if let Some(ev) = &self.eigenvalues {
            if ev.is_empty() || ev.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(CliError::Config("eigenvalues: must be a nonempty list of positive numbers".into()));
            }
            if let Some(d) = self.d {
                if d != ev.len() {
                    return Err(CliError::Config(format!("d: {d} does not match {} eigenvalues", ev.len())));
                }
            }
        }
        if let (Some(d), Some(r)) = (self.d, self.r) {
            if r > d {
                return Err(CliError::Config(format!("r: rank {r} exceeds d = {d}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<Settings, CliError> {
        Settings::resolve(Experiment::Run, ConfigFile::parse(text)?, Overrides::default())
    }

    #[test]
    fn empty_file_uses_defaults() {
        let s = resolve("").unwrap();
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.c, 5.0);
        assert_eq!(s.optimizer, OptimizerKind::Cna);
        assert_eq!(s.out_dir, PathBuf::from("out/run"));
        assert_eq!(s.preset, Preset::Paper);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = resolve("n = 3\nstep_size = 0.1\n").unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("step_size")), "{err}");
    }

    #[test]
    fn unknown_optimizer_is_named() {
        let err = resolve("optimizer = \"adam\"").unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("optimizer") && m.contains("adam")), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse("n = 10\nseed = 4\nC = 2.0\npreset = \"paper\"").unwrap();
        let o = Overrides { n: Some(20), c: Some(3.0), preset: Some(Preset::Desk), ..Default::default() };
        let s = Settings::resolve(Experiment::Matfac, file, o).unwrap();
        assert_eq!((s.n, s.seed, s.c, s.preset), (Some(20), 4, 3.0, Preset::Desk));
    }

    #[test]
    fn mismatched_experiment_is_rejected() {
        let file = ConfigFile::parse("experiment = \"matfac\"").unwrap();
        assert!(Settings::resolve(Experiment::Run, file, Overrides::default()).is_err());
    }

    #[test]
    fn eval_schedule_grammar() {
        assert_eq!(parse_eval_schedule("stride:7").unwrap(), EvalSchedule::Stride(7));
        assert_eq!(parse_eval_schedule("every").unwrap(), EvalSchedule::Every);
        assert!(parse_eval_schedule("stride:0").is_err());
        assert!(parse_eval_schedule("sometimes").is_err());
    }

    #[test]
    fn value_checks() {
        assert!(resolve("theta = 1.5").is_err());
        assert!(resolve("eigenvalues = [1.0, -2.0]").is_err());
        assert!(resolve("d = 3\nr = 4").is_err());
        assert!(resolve("n = 0").is_err());
        assert!(resolve("n = \"ten\"").is_err());
    }
}
