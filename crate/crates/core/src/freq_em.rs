//! EM estimation of the claim-count mixture p·NB(α1, β) + (1-p)·NB(α1+α2, β).
//!
//! The latent indicator Z_i marks whether period i's count came from the
//! historical-only component. The E-step computes τ_i = P[Z_i = 1 | n_i]; the
//! M-step sets p in closed form and solves the three digamma score equations
//! for (α1, α2, β) by damped Newton in log coordinates.

use crate::distributions::{ln_or_neg_inf, log_mix, nb_log_pmf, nb_mixture_log_pmf, FreqParams};
use crate::em::{damped_toward, EmOptions, EmTrace, StopReason, Q_SLACK};
use crate::error::{Error, Result};
use crate::solver::{solve_system, SolveOptions};
use crate::special::{lgamma, psi};

/// Per-period claim counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSample {
    counts: Vec<u64>,
    sum: u64,
}

impl CountSample {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "count sample needs at least 2 periods, got {}",
                counts.len()
            )));
        }
        let sum = counts.iter().sum();
        Ok(Self { counts, sum })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn sum(&self) -> u64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.m() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.counts
            .iter()
            .map(|&n| (n as f64 - mean).powi(2))
            .sum::<f64>()
            / (self.m() - 1) as f64
    }

    fn is_constant(&self) -> bool {
        self.counts.iter().all(|&n| n == self.counts[0])
    }
}

/// Posterior membership probabilities τ_i of the α1-only component.
pub fn e_step_freq(params: &FreqParams, sample: &CountSample) -> Vec<f64> {
    let lp = ln_or_neg_inf(params.p);
    let lq = ln_or_neg_inf(1.0 - params.p);
    let a12 = params.alpha1 + params.alpha2;
    sample
        .counts
        .iter()
        .map(|&n| {
            let l1 = nb_log_pmf(n, params.alpha1, params.beta);
            let l2 = nb_log_pmf(n, a12, params.beta);
            if lp == f64::NEG_INFINITY {
                return 0.0;
            }
            (lp + l1 - log_mix(lp, l1, lq, l2)).exp().clamp(0.0, 1.0)
        })
        .collect()
}

/// Expected complete-data log-likelihood Q(θ | τ).
pub fn q_value_freq(params: &FreqParams, sample: &CountSample, tau: &[f64]) -> f64 {
    let FreqParams {
        alpha1,
        alpha2,
        beta,
        p,
    } = *params;
    let m = sample.m() as f64;
    let s1: f64 = tau.iter().sum();
    let s0: f64 = tau.iter().map(|t| 1.0 - t).sum();
    let lb = (beta / (beta + 1.0)).ln();
    let mut binom1 = 0.0;
    let mut binom2 = 0.0;
    for (&n, &t) in sample.counts.iter().zip(tau) {
        let nf = n as f64;
        if t > 0.0 {
            binom1 += t * (lgamma(nf + alpha1) - lgamma(alpha1) - lgamma(nf + 1.0));
        }
        if t < 1.0 {
            binom2 += (1.0 - t) * (lgamma(nf + alpha1 + alpha2) - lgamma(alpha1 + alpha2) - lgamma(nf + 1.0));
        }
    }
    let weighted_log = |w: f64, prob: f64| if w == 0.0 { 0.0 } else { w * prob.ln() };
    weighted_log(s1, p) + binom1 + alpha1 * m * lb - beta.ln_1p() * sample.sum as f64
        + weighted_log(s0, 1.0 - p)
        + binom2
        + alpha2 * lb * s0
}

/// Σ_i ln P[N = n_i].
pub fn observed_loglik_freq(params: &FreqParams, sample: &CountSample) -> f64 {
    sample
        .counts
        .iter()
        .map(|&n| nb_mixture_log_pmf(params, n))
        .sum()
}

/// Score equations ∂Q/∂(α1, α2, β), each multiplied by its parameter and
/// divided by m so that the residual is the log-coordinate gradient per period.
pub fn freq_score(params: &FreqParams, sample: &CountSample, tau: &[f64]) -> [f64; 3] {
    let FreqParams {
        alpha1, alpha2, beta, ..
    } = *params;
    let m = sample.m() as f64;
    let a12 = alpha1 + alpha2;
    let (psi1, psi12) = (psi(alpha1), psi(a12));
    let lb = (beta / (1.0 + beta)).ln();
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut s0 = 0.0;
    for (&n, &t) in sample.counts.iter().zip(tau) {
        let nf = n as f64;
        if t > 0.0 {
            d1 += t * (psi(nf + alpha1) - psi1);
        }
        if t < 1.0 {
            d2 += (1.0 - t) * (psi(nf + a12) - psi12);
        }
        s0 += 1.0 - t;
    }
    let g_a1 = d1 + d2 + m * lb;
    let g_a2 = d2 + s0 * lb;
    let g_b = (alpha1 * m + alpha2 * s0 - beta * sample.sum as f64) / (beta * (1.0 + beta));
    [alpha1 * g_a1 / m, alpha2 * g_a2 / m, beta * g_b / m]
}

/// One M-step. `p` is closed form; (α1, α2, β) come from a Newton solve
/// warm-started at `params`. If the Newton root does not raise Q, a damped
/// step toward it is taken, or the shape/rate parameters are kept.
pub fn m_step_freq(
    params: &FreqParams,
    sample: &CountSample,
    tau: &[f64],
    opts: &SolveOptions,
) -> Result<FreqParams> {
    m_step_inner(params, sample, tau, opts).map(|o| o.params)
}

struct MStepOutcome {
    params: FreqParams,
    damped: bool,
    kept: bool,
}

fn m_step_inner(
    params: &FreqParams,
    sample: &CountSample,
    tau: &[f64],
    opts: &SolveOptions,
) -> Result<MStepOutcome> {
    let m = sample.m();
    if tau.len() != m {
        return Err(Error::InvalidInput(format!("tau has {} entries, sample has {m}", tau.len())));
    }
    if sample.sum == 0 {
        return Err(Error::InvalidInput("all counts are zero; beta is unbounded".into()));
    }
    let s1: f64 = tau.iter().sum();
    let s0: f64 = tau.iter().map(|t| 1.0 - t).sum();
    let p = (s1 / m as f64).clamp(0.0, 1.0);
    let base = FreqParams { p, ..*params };

    let to_params = |x: &[f64]| FreqParams {
        alpha1: x[0].exp(),
        alpha2: x[1].exp(),
        beta: x[2].exp(),
        p,
    };
    let q = |x: &[f64]| q_value_freq(&to_params(x), sample, tau);
    let x_old = [params.alpha1.ln(), params.alpha2.ln(), params.beta.ln()];
    let q_old = q(&x_old);

    let degenerate = m as f64 * 1e-10;
    let solved = if s0 <= degenerate {
        single_nb(sample, params.alpha1, opts).map(|(a, b)| vec![a.ln(), x_old[1], b.ln()])
    } else if s1 <= degenerate {
        let total = params.alpha1 + params.alpha2;
        single_nb(sample, total, opts).map(|(s, b)| {
            let share = params.alpha1 / total;
            vec![(s * share).ln(), (s * (1.0 - share)).ln(), b.ln()]
        })
    } else {
        solve_system(|x| freq_score(&to_params(x), sample, tau).to_vec(), &x_old, opts).map(|r| r.root)
    };

    let kept = |damped| MStepOutcome {
        params: base,
        damped,
        kept: true,
    };
    match solved {
        Ok(x) => {
            let qx = q(&x);
            if qx.is_finite() && qx >= q_old - Q_SLACK {
                return Ok(MStepOutcome {
                    params: to_params(&x),
                    damped: false,
                    kept: false,
                });
            }
            Ok(match damped_toward(q, &x_old, &x, q_old) {
                Some(xd) => MStepOutcome {
                    params: to_params(&xd),
                    damped: true,
                    kept: false,
                },
                None => kept(true),
            })
        }
        Err(Error::NonFiniteResidual { iteration: 0 }) => Err(Error::NonFiniteResidual { iteration: 0 }),
        Err(_) => Ok(kept(true)),
    }
}

/// Maximum-likelihood NB(r, β) on the whole sample with β profiled out:
/// β = r·m/Σn. Returns (r, β).
fn single_nb(sample: &CountSample, r0: f64, opts: &SolveOptions) -> Result<(f64, f64)> {
    let m = sample.m() as f64;
    let sum = sample.sum as f64;
    let residual = |x: &[f64]| {
        let r = x[0].exp();
        let d: f64 = sample.counts.iter().map(|&n| psi(n as f64 + r) - psi(r)).sum();
        vec![r * (d / m + (r * m / (r * m + sum)).ln())]
    };
    let rep = solve_system(residual, &[r0.ln()], opts)?;
    let r = rep.root[0].exp();
    Ok((r, r * m / sum))
}

/// Runs EM from `init` until the parameter or log-likelihood change drops
/// below tolerance. Non-convergence is reported in the trace.
pub fn fit_freq(
    sample: &CountSample,
    init: &FreqParams,
    opts: &EmOptions,
) -> Result<(FreqParams, EmTrace<FreqParams>)> {
    init.validate()?;
    let mut params = *init;
    let mut ll = observed_loglik_freq(&params, sample);
    let mut trace = EmTrace::start(params, ll);
    if sample.is_constant() || sample.sum == 0 {
        trace.finish(StopReason::DegenerateSample);
        return Ok((params, trace));
    }

    for iter in 1..=opts.max_iters {
        let tau = e_step_freq(&params, sample);
        let out = m_step_inner(&params, sample, &tau, &opts.solve).map_err(|e| Error::MStep {
            iteration: iter,
            source: Box::new(e),
        })?;
        let next = out.params;
        let ll_next = observed_loglik_freq(&next, sample);
        let change = max_change(&params, &next);
        trace.params_path.push(next);
        trace.loglik_path.push(ll_next);
        trace.iterations = iter;
        trace.damped_steps += out.damped as usize;
        params = next;

        if change < opts.tol {
            trace.finish(if out.kept {
                StopReason::Stalled
            } else {
                StopReason::ParamTol
            });
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

fn max_change(a: &FreqParams, b: &FreqParams) -> f64 {
    [
        (a.alpha1 - b.alpha1).abs(),
        (a.alpha2 - b.alpha2).abs(),
        (a.beta - b.beta).abs(),
        (a.p - b.p).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Method-of-moments starting point.
///
/// Candidate splits of the sorted sample are the midpoint between the two
/// tallest histogram peaks plus the 30/40/50/60/70% quantiles. For each, an
/// NB is fitted by moments to both parts with a shared rate β; α1 comes from
/// the low part, α2 = max(α_high - α1, 0.1) and p is the low part's share.
/// The candidate with the highest observed log-likelihood is returned.
pub fn moment_init_freq(sample: &CountSample) -> Result<FreqParams> {
    let m = sample.m();
    if m < 4 {
        return Err(Error::InvalidInput(format!("moment initialisation needs m >= 4, got {m}")));
    }
    let mean = sample.mean();
    let variance = sample.variance();
    if variance <= mean {
        return Err(Error::Underdispersed { mean, variance });
    }
    let global_beta = mean / (variance - mean);

    let mut sorted: Vec<f64> = sample.counts.iter().map(|&n| n as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let mut splits: Vec<f64> = histogram_valley(&sorted).into_iter().collect();
    splits.extend([0.3, 0.4, 0.5, 0.6, 0.7].map(|q| sorted[((q * m as f64) as usize).min(m - 1)]));

    let mut best: Option<(f64, FreqParams)> = None;
    for split in splits {
        let cut = sorted.partition_point(|&x| x <= split);
        if cut < 2 || m - cut < 2 {
            continue;
        }
        let params = split_moments(&sorted[..cut], &sorted[cut..], global_beta)?;
        let ll = observed_loglik_freq(&params, sample);
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            best = Some((ll, params));
        }
    }
    match best {
        Some((_, params)) => Ok(params),
        None => split_moments(&sorted[..m / 2], &sorted[m / 2..], global_beta),
    }
}

fn split_moments(lo: &[f64], hi: &[f64], global_beta: f64) -> Result<FreqParams> {
    let moments = |xs: &[f64]| {
        let k = xs.len() as f64;
        let mu = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (k - 1.0);
        (k, mu, var)
    };
    let (k_lo, mean_lo, var_lo) = moments(lo);
    let (k_hi, mean_hi, var_hi) = moments(hi);
    let num = k_lo * mean_lo + k_hi * mean_hi;
    let den = k_lo * (var_lo - mean_lo) + k_hi * (var_hi - mean_hi);
    let beta = if den > 0.0 { num / den } else { global_beta };

    let alpha1 = (mean_lo * beta).max(1e-3);
    let alpha2 = (mean_hi * beta - alpha1).max(0.1);
    FreqParams::new(alpha1, alpha2, beta, k_lo / (k_lo + k_hi))
}

/// Midpoint between the centres of the two tallest local maxima of a
/// histogram with ⌈√m⌉ equal-width bins.
fn histogram_valley(sorted: &[f64]) -> Option<f64> {
    let (min, max) = (sorted[0], *sorted.last()?);
    if max <= min {
        return None;
    }
    let bins = (sorted.len() as f64).sqrt().ceil().max(3.0) as usize;
    let width = (max - min) / bins as f64;
    let mut hist = vec![0usize; bins];
    for &x in sorted {
        let b = (((x - min) / width) as usize).min(bins - 1);
        hist[b] += 1;
    }
    let mut peaks: Vec<usize> = (0..bins)
        .filter(|&i| {
            let left = if i == 0 { 0 } else { hist[i - 1] };
            let right = if i + 1 == bins { 0 } else { hist[i + 1] };
            hist[i] > 0 && hist[i] >= left && hist[i] > right
        })
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|&a, &b| hist[b].cmp(&hist[a]).then(a.cmp(&b)));
    let (a, b) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
    let centre = |i: usize| min + (i as f64 + 0.5) * width;
    Some(0.5 * (centre(a) + centre(b)))
}
