use std::cell::RefCell;
use std::f64::consts::PI;
use std::time::Instant;

use nlopt::{Algorithm, FailState, Nlopt, SuccessState, Target};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounded quadratic-model trust-region search (BOBYQA).
///
/// The search box is `x0 ± bound_radius` in every coordinate. Phase
/// parameters are 2π-periodic, so the default half-width of 2π never cuts
/// off a basin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSearchConfig {
    pub max_evaluations: usize,
    pub initial_radius: f64,
    /// Absolute parameter-step tolerance.
    pub xtol: f64,
    /// Absolute cost-change tolerance.
    pub ftol: f64,
    /// Stop as soon as the cost drops to this value.
    pub target: Option<f64>,
    pub bound_radius: f64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            max_evaluations: 100_000,
            initial_radius: 0.5,
            xtol: 1e-9,
            ftol: 1e-14,
            target: None,
            bound_radius: 2.0 * PI,
        }
    }
}

impl LocalSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.initial_radius) || !positive(self.xtol) || !positive(self.ftol) {
            return Err(Error::InvalidArgument(
                "local search radius and tolerances must be positive".into(),
            ));
        }
        if !positive(self.bound_radius) {
            return Err(Error::InvalidArgument("bound_radius must be positive".into()));
        }
        if self.target.is_some_and(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("target must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Target,
    ParameterTolerance,
    CostTolerance,
    Budget,
    RoundoffLimited,
    Failure,
}

/// Best-so-far cost after a given number of evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub best: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Number of objective values that came back NaN or infinite.
    pub non_finite: usize,
    pub trace: Vec<TracePoint>,
}

struct Tracker {
    best_x: Vec<f64>,
    best_f: f64,
    worst_finite: f64,
    evaluations: usize,
    non_finite: usize,
    trace: Vec<TracePoint>,
    start: Instant,
}

impl Tracker {
    fn record(&mut self, x: &[f64], value: f64) -> f64 {
        self.evaluations += 1;
        let value = if value.is_finite() {
            value
        } else {
            self.non_finite += 1;
            f64::INFINITY
        };
        if value < self.best_f || self.evaluations == 1 {
            self.best_f = value;
            self.best_x.copy_from_slice(x);
            self.trace.push(TracePoint {
                evaluation: self.evaluations,
                best: value,
                wall_time_s: self.start.elapsed().as_secs_f64(),
            });
        }
        if value.is_finite() {
            self.worst_finite = if self.worst_finite.is_finite() {
                self.worst_finite.max(value)
            } else {
                value
            };
            value
        } else {
            // BOBYQA's quadratic model cannot absorb an infinity, so the
            // optimizer sees a value just above the worst finite one.
            let w = if self.worst_finite.is_finite() {
                self.worst_finite
            } else {
                0.0
            };
            w + w.abs() + 1.0
        }
    }
}

/// Minimizes `f` from `x0`. The starting point is always evaluated, so the
/// result never reports a cost above `f(x0)`; with a zero budget that single
/// evaluation is the whole run.
pub fn minimize_local<F>(f: F, x0: &[f64], config: &LocalSearchConfig) -> Result<LocalResult>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let d = x0.len();
    if d == 0 {
        return Err(Error::InvalidArgument(
            "local search needs at least one parameter".into(),
        ));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("starting point must be finite".into()));
    }

    let tracker = RefCell::new(Tracker {
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
        worst_finite: f64::NAN,
        evaluations: 0,
        non_finite: 0,
        trace: Vec::new(),
        start: Instant::now(),
    });
    let f0 = f(x0);
    tracker.borrow_mut().record(x0, f0);

    let finish = |stop: StopReason, converged: bool| {
        let t = tracker.borrow();
        LocalResult {
            x: t.best_x.clone(),
            f: t.best_f,
            evaluations: t.evaluations,
            converged,
            stop,
            non_finite: t.non_finite,
            trace: t.trace.clone(),
        }
    };

    if config.target.is_some_and(|t| tracker.borrow().best_f <= t) {
        return Ok(finish(StopReason::Target, true));
    }
    if config.max_evaluations <= 1 {
        return Ok(finish(StopReason::Budget, false));
    }

    let objective = |x: &[f64], _grad: Option<&mut [f64]>, _: &mut ()| {
        let v = f(x);
        tracker.borrow_mut().record(x, v)
    };
    let mut opt = Nlopt::new(Algorithm::Bobyqa, d, objective, Target::Minimize, ());
    let lower: Vec<f64> = x0.iter().map(|v| v - config.bound_radius).collect();
    let upper: Vec<f64> = x0.iter().map(|v| v + config.bound_radius).collect();
    let setup = (|| -> std::result::Result<(), FailState> {
        opt.set_lower_bounds(&lower)?;
        opt.set_upper_bounds(&upper)?;
        // The starting evaluation above already spent one unit of budget.
        opt.set_maxeval(u32::try_from(config.max_evaluations - 1).unwrap_or(u32::MAX))?;
        opt.set_initial_step1(config.initial_radius.min(config.bound_radius))?;
        opt.set_xtol_abs1(config.xtol)?;
        opt.set_ftol_abs(config.ftol)?;
        if let Some(t) = config.target {
            opt.set_stopval(t)?;
        }
        Ok(())
    })();
    if let Err(e) = setup {
        return Err(Error::InvalidArgument(format!("local search setup rejected: {e:?}")));
    }

    let mut x = x0.to_vec();
    let outcome = opt.optimize(&mut x);
    drop(opt);
    let (stop, converged) = match outcome {
        Ok((SuccessState::StopValReached, _)) => (StopReason::Target, true),
        Ok((SuccessState::XtolReached | SuccessState::Success, _)) => (StopReason::ParameterTolerance, true),
        Ok((SuccessState::FtolReached, _)) => (StopReason::CostTolerance, true),
        Ok((SuccessState::MaxEvalReached | SuccessState::MaxTimeReached, _)) => (StopReason::Budget, false),
        Err((FailState::RoundoffLimited, _)) => (StopReason::RoundoffLimited, true),
        Err((FailState::InvalidArgs | FailState::OutOfMemory, _)) => {
            return Err(Error::InvalidArgument(format!("local search failed: {outcome:?}")))
        }
        Err(_) => (StopReason::Failure, false),
    };
    // Some hits of the target land on the budget edge; report them as such.
    let stop = match config.target {
        Some(t) if tracker.borrow().best_f <= t => StopReason::Target,
        _ => stop,
    };
    let converged = converged || stop == StopReason::Target;
    Ok(finish(stop, converged))
}
