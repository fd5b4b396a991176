//! The outer optimization loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{run_phase, Evaluator, Incumbent, Operator};
use crate::error::{Result, StaError};
use crate::operators::{BoundedDomain, StateVector};
use crate::rng::RandomSource;

/// Tunable constants of the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StaParams {
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Samples drawn per operator application.
    pub se: usize,
    /// Divisor applied to the rotation factor after every iteration.
    pub fc: f64,
    /// Number of outer iterations.
    pub max_iter: usize,
}

impl Default for StaParams {
    fn default() -> Self {
        StaParams {
            alpha_max: 1.0,
            alpha_min: 1e-4,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            se: 30,
            fc: 2.0,
            max_iter: 1000,
        }
    }
}

impl StaParams {
    pub fn with_max_iter(self, max_iter: usize) -> Self {
        StaParams { max_iter, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_min", self.alpha_min),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(StaError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.alpha_max.is_finite() && self.alpha_max > self.alpha_min) {
            return Err(StaError::InvalidParams(format!(
                "alpha_max ({}) must exceed alpha_min ({})",
                self.alpha_max, self.alpha_min
            )));
        }
        if !(self.fc.is_finite() && self.fc > 1.0) {
            return Err(StaError::InvalidParams(format!("fc must exceed 1, got {}", self.fc)));
        }
        if self.se == 0 {
            return Err(StaError::InvalidParams("se must be at least 1".into()));
        }
        Ok(())
    }

    /// Resets the rotation factor to `alpha_max` once it has decayed below
    /// `alpha_min`.
    pub fn reset_alpha(&self, alpha: f64) -> f64 {
        if alpha < self.alpha_min {
            self.alpha_max
        } else {
            alpha
        }
    }

    /// Number of iterations before the rotation factor repeats.
    pub fn alpha_period(&self) -> usize {
        let mut alpha = self.alpha_max;
        let mut period = 1;
        while alpha / self.fc >= self.alpha_min {
            alpha /= self.fc;
            period += 1;
        }
        period
    }
}

/// Rotation factor for the iteration following one that used `alpha`.
pub fn alpha_schedule(alpha: f64, params: &StaParams) -> f64 {
    params.reset_alpha(alpha / params.fc)
}

/// Result and history of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Fitness of the starting point.
    pub initial_fitness: f64,
    /// Best fitness after each completed iteration.
    pub per_iteration_best: Vec<f64>,
    /// Rotation factor used in each iteration.
    pub alphas: Vec<f64>,
    pub final_best: StateVector,
    pub final_fitness: f64,
    /// Objective calls, including the one for the starting point.
    pub evaluations: u64,
    pub seed: u64,
    /// Seconds; excluded from equality-based determinism checks by callers.
    pub wall_time: f64,
}

/// Minimizes `obj` over `dom`.
///
/// The starting point is `x0` (clamped into `dom`) or, when absent, a uniform
/// draw from `dom`. Each iteration runs the expansion, rotation and axesion
/// phases in that order.
pub fn sta_minimize<F>(
    obj: F,
    dom: &BoundedDomain,
    params: &StaParams,
    seed: u64,
    x0: Option<&[f64]>,
) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> f64,
{
    params.validate()?;
    let start = Instant::now();
    let mut rng = RandomSource::new(seed);
    let mut x = match x0 {
        Some(x0) => {
            if x0.len() != dom.dim() {
                return Err(StaError::DimensionMismatch {
                    expected: dom.dim(),
                    actual: x0.len(),
                });
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(StaError::InvalidParams("starting point must be finite".into()));
            }
            x0.to_vec()
        }
        None => rng.uniform_point(dom),
    };
    dom.project_in_place(&mut x);

    let mut eval = Evaluator::new(obj);
    let f0 = eval.evaluate(&x);
    let mut inc = Incumbent::new(StateVector::new(x), f0);

    let mut per_iteration_best = Vec::with_capacity(params.max_iter);
    let mut alphas = Vec::with_capacity(params.max_iter);
    let mut alpha = params.alpha_max;
    for _ in 0..params.max_iter {
        alpha = params.reset_alpha(alpha);
        alphas.push(alpha);
        inc = run_phase(inc, Operator::Expansion, params, dom, &mut rng, &mut eval)?;
        inc = run_phase(inc, Operator::Rotation { alpha }, params, dom, &mut rng, &mut eval)?;
        inc = run_phase(inc, Operator::Axesion, params, dom, &mut rng, &mut eval)?;
        alpha /= params.fc;
        per_iteration_best.push(inc.f_best);
    }

    Ok(RunTrace {
        initial_fitness: f0,
        per_iteration_best,
        alphas,
        final_fitness: inc.f_best,
        final_best: inc.best,
        evaluations: eval.evaluations(),
        seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
