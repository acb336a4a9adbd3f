//! Options and trace types shared by the frequency and severity EM fits.

use serde::{Deserialize, Serialize};

use crate::solver::SolveOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Stop when the largest absolute parameter change falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Stop when the observed-data log-likelihood changes by less than this
    /// (0 disables the check).
    pub loglik_tol: f64,
    pub solve: SolveOptions,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iters: 10_000,
            loglik_tol: 1e-9,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ParamTol,
    LoglikTol,
    MaxIters,
    /// The M-step could not improve the expected log-likelihood.
    Stalled,
    /// The sample carries no information for a mixture (e.g. constant counts).
    DegenerateSample,
}

/// Parameter and log-likelihood history of one EM run. Entry 0 is the
/// starting point; entry k is the state after k iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace<P> {
    pub params_path: Vec<P>,
    pub loglik_path: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Number of M-steps where the Newton root was rejected and a damped
    /// step toward it was taken instead.
    pub damped_steps: usize,
}

impl<P> EmTrace<P> {
    pub(crate) fn start(init: P, loglik: f64) -> Self {
        Self {
            params_path: vec![init],
            loglik_path: vec![loglik],
            converged: false,
            iterations: 0,
            stop_reason: StopReason::MaxIters,
            damped_steps: 0,
        }
    }

    pub(crate) fn finish(&mut self, reason: StopReason) {
        self.stop_reason = reason;
        self.converged = matches!(reason, StopReason::ParamTol | StopReason::LoglikTol);
    }

    pub fn final_loglik(&self) -> f64 {
        *self.loglik_path.last().expect("trace is never empty")
    }

    /// Largest drop in log-likelihood between consecutive iterations
    /// (0 for a monotone trace).
    pub fn max_loglik_decrease(&self) -> f64 {
        self.loglik_path
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_loglik_decrease() <= slack
    }
}

/// Expected complete-data log-likelihood contribution reached by the
/// M-step must not fall below the current value by more than this.
pub(crate) const Q_SLACK: f64 = 1e-10;

/// Moves from `old` toward `target` (both in log coordinates) and returns the
/// first point whose Q is at least `q_old`, halving the step up to 30 times.
pub(crate) fn damped_toward<F: Fn(&[f64]) -> f64>(
    q: F,
    old: &[f64],
    target: &[f64],
    q_old: f64,
) -> Option<Vec<f64>> {
    let mut t = 0.5;
    for _ in 0..30 {
        let x: Vec<f64> = old.iter().zip(target).map(|(a, b)| a + t * (b - a)).collect();
        let qx = q(&x);
        if qx.is_finite() && qx >= q_old - Q_SLACK {
            return Some(x);
        }
        t *= 0.5;
    }
    None
}
