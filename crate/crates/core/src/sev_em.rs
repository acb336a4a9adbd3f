//! EM estimation of the claim-size mixture ν·Exp(μ) + (1-ν)·Lomax(δ, σ).
//!
//! Claim sizes from all periods are pooled into one sample. The weight ν is
//! either fixed (usually from the frequency fit via [`nu_from_freq`]) or
//! re-estimated as the mean membership probability.

use crate::distributions::{
    exponential_log_pdf, ln_or_neg_inf, log_mix, lomax_log_pdf, severity_mixture_log_pdf, FreqParams,
    SevParams,
};
use crate::em::{damped_toward, EmOptions, EmTrace, StopReason, Q_SLACK};
use crate::error::{Error, Result};
use crate::solver::{solve_system, SolveOptions};

/// Pooled individual claim sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SeveritySample {
    values: Vec<f64>,
    sum: f64,
}

impl SeveritySample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "severity sample needs at least 2 claims, got {}",
                values.len()
            )));
        }
        if let Some((i, y)) = values.iter().enumerate().find(|(_, y)| !(y.is_finite() && **y > 0.0)) {
            return Err(Error::InvalidInput(format!("claim {i} has non-positive amount {y}")));
        }
        let sum = values.iter().sum();
        Ok(Self { values, sum })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m_star(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.m_star() as f64
    }
}

/// ν = p + (1-p)·B(α1+1, α2)/B(α1, α2) = p + (1-p)·α1/(α1+α2).
pub fn nu_from_freq(freq: &FreqParams) -> f64 {
    freq.p + (1.0 - freq.p) * freq.alpha1 / (freq.alpha1 + freq.alpha2)
}

/// Crude starting point: μ = 1/ȳ, δ = 3, σ = 2ȳ (Pareto mean ȳ), with the given ν.
pub fn default_init_sev(sample: &SeveritySample, nu: f64) -> Result<SevParams> {
    let mean = sample.mean();
    SevParams::new(1.0 / mean, 3.0, 2.0 * mean, nu)
}

/// Posterior probabilities τ_i that claim i is exponential (historical).
pub fn e_step_sev(params: &SevParams, sample: &SeveritySample) -> Vec<f64> {
    let ln_nu = ln_or_neg_inf(params.nu);
    let ln_rest = ln_or_neg_inf(1.0 - params.nu);
    sample
        .values
        .iter()
        .map(|&y| {
            if ln_nu == f64::NEG_INFINITY {
                return 0.0;
            }
            let le = exponential_log_pdf(y, params.mu);
            let lp = lomax_log_pdf(y, params.delta, params.sigma);
            (ln_nu + le - log_mix(ln_nu, le, ln_rest, lp)).exp().clamp(0.0, 1.0)
        })
        .collect()
}

/// Expected complete-data log-likelihood Q(ϑ | τ).
pub fn q_value_sev(params: &SevParams, sample: &SeveritySample, tau: &[f64]) -> f64 {
    let SevParams { mu, delta, sigma, nu } = *params;
    let mut q = 0.0;
    for (&y, &t) in sample.values.iter().zip(tau) {
        if t > 0.0 {
            q += t * (nu.ln() + mu.ln() - mu * y);
        }
        if t < 1.0 {
            q += (1.0 - t) * ((1.0 - nu).ln() + delta.ln() + delta * sigma.ln() - (delta + 1.0) * (sigma + y).ln());
        }
    }
    q
}

pub fn observed_loglik_sev(params: &SevParams, sample: &SeveritySample) -> f64 {
    sample
        .values
        .iter()
        .map(|&y| severity_mixture_log_pdf(params, y))
        .sum()
}

/// ∂Q/∂δ and ∂Q/∂σ multiplied by δ and σ respectively and divided by Σ(1-τ).
pub fn sev_score(params: &SevParams, sample: &SeveritySample, tau: &[f64]) -> [f64; 2] {
    let SevParams { delta, sigma, .. } = *params;
    let mut s0 = 0.0;
    let mut log_sum = 0.0;
    let mut inv_sum = 0.0;
    for (&y, &t) in sample.values.iter().zip(tau) {
        let w = 1.0 - t;
        s0 += w;
        log_sum += w * (sigma + y).ln();
        inv_sum += w / (sigma + y);
    }
    let g_delta = s0 / delta + s0 * sigma.ln() - log_sum;
    let g_sigma = s0 * delta / sigma - (delta + 1.0) * inv_sum;
    [delta * g_delta / s0, sigma * g_sigma / s0]
}

/// One M-step: μ and (optionally) ν in closed form, (δ, σ) by Newton in log
/// coordinates warm-started at `params`.
pub fn m_step_sev(
    params: &SevParams,
    sample: &SeveritySample,
    tau: &[f64],
    estimate_nu: bool,
    opts: &SolveOptions,
) -> Result<SevParams> {
    m_step_inner(params, sample, tau, estimate_nu, opts).map(|(p, _)| p)
}

fn m_step_inner(
    params: &SevParams,
    sample: &SeveritySample,
    tau: &[f64],
    estimate_nu: bool,
    opts: &SolveOptions,
) -> Result<(SevParams, bool)> {
    let m_star = sample.m_star();
    if tau.len() != m_star {
        return Err(Error::InvalidInput(format!(
            "tau has {} entries, sample has {m_star}",
            tau.len()
        )));
    }
    let s1: f64 = tau.iter().sum();
    let s0: f64 = tau.iter().map(|t| 1.0 - t).sum();
    let ty: f64 = sample.values.iter().zip(tau).map(|(y, t)| t * y).sum();
    if ty == 0.0 {
        return Err(Error::InvalidInput(
            "sum of tau_i * y_i is zero; exponential rate undefined".into(),
        ));
    }
    let mu = s1 / ty;
    let nu = if estimate_nu {
        (s1 / m_star as f64).clamp(0.0, 1.0)
    } else {
        params.nu
    };
    let base = SevParams { mu, nu, ..*params };
    if s0 <= 1e-10 * m_star as f64 {
        return Ok((base, false));
    }

    let to_params = |x: &[f64]| SevParams {
        delta: x[0].exp(),
        sigma: x[1].exp(),
        ..base
    };
    let q = |x: &[f64]| q_value_sev(&to_params(x), sample, tau);
    let x_old = [params.delta.ln(), params.sigma.ln()];
    let q_old = q(&x_old);

    match solve_system(|x| sev_score(&to_params(x), sample, tau).to_vec(), &x_old, opts) {
        Ok(rep) => {
            let qx = q(&rep.root);
            if qx.is_finite() && qx >= q_old - Q_SLACK {
                return Ok((to_params(&rep.root), false));
            }
            Ok(match damped_toward(q, &x_old, &rep.root, q_old) {
                Some(xd) => (to_params(&xd), true),
                None => (base, true),
            })
        }
        Err(Error::NonFiniteResidual { iteration: 0 }) => Err(Error::NonFiniteResidual { iteration: 0 }),
        Err(_) => Ok((base, true)),
    }
}

/// Runs EM from `init`. With `estimate_nu` false, ν stays at `init.nu`.
pub fn fit_sev(
    sample: &SeveritySample,
    init: &SevParams,
    estimate_nu: bool,
    opts: &EmOptions,
) -> Result<(SevParams, EmTrace<SevParams>)> {
    init.validate()?;
    let mut params = *init;
    let mut ll = observed_loglik_sev(&params, sample);
    let mut trace = EmTrace::start(params, ll);

    for iter in 1..=opts.max_iters {
        let tau = e_step_sev(&params, sample);
        let (next, damped) = m_step_inner(&params, sample, &tau, estimate_nu, &opts.solve).map_err(|e| {
            Error::MStep {
                iteration: iter,
                source: Box::new(e),
            }
        })?;
        let ll_next = observed_loglik_sev(&next, sample);
        let change = [
            (params.mu - next.mu).abs(),
            (params.delta - next.delta).abs(),
            (params.sigma - next.sigma).abs(),
            (params.nu - next.nu).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        trace.params_path.push(next);
        trace.loglik_path.push(ll_next);
        trace.iterations = iter;
        trace.damped_steps += damped as usize;
        params = next;

        if change < opts.tol {
            trace.finish(StopReason::ParamTol);
            return Ok((params, trace));
        }
        if (ll_next - ll).abs() < opts.loglik_tol {
            trace.finish(StopReason::LoglikTol);
            return Ok((params, trace));
        }
        ll = ll_next;
    }
    trace.finish(StopReason::MaxIters);
    Ok((params, trace))
}
