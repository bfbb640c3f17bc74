//! The six experiments. Each is a pure function of its [`Settings`]; trials
//! fan out over a thread pool but results are assembled in trial order, so
//! the output bytes depend only on the settings.

mod diag;
mod optim;

pub use diag::{
    delta_ratio, histograms, trial_seed, verify_conditions, CONDITIONS_HEADER, CONDITIONS_MAX_HEADER, ENVELOPE_HEADER,
    HISTOGRAM_HEADER, HISTOGRAM_SUMMARY_HEADER, RATIO_HEADER,
};
pub use optim::{
    cna_params, default_init_std, log_grid, matfac, push_trace, run, run_seed, smooth_rate, Problem,
    SMOOTH_RATE_HEADER, TRACE_HEADER, TRACE_MEAN_HEADER,
};

use crate::config::{Experiment, Settings};
use crate::error::CliError;
use crate::output::Outcome;

pub fn execute(s: &Settings) -> Result<Outcome, CliError> {
    match s.experiment {
        Experiment::VerifyConditions => verify_conditions(s),
        Experiment::DeltaRatio => delta_ratio(s),
        Experiment::Histograms => histograms(s),
        Experiment::Matfac => matfac(s),
        Experiment::SmoothRate => smooth_rate(s),
        Experiment::Run => run(s),
    }
}
