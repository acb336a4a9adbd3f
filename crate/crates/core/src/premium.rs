//! Exact Bayesian posteriors and premiums.
//!
//! Given m periods with Σn claims, the intensity posterior is still a
//! two-component Gamma mixture with weight w = 1/(1+G) on shape Σn+α1.
//! Given m* claims totalling Σy, the claim-rate posterior is an atom at μ with
//! weight ω = 1/(1+φ) plus a Gamma(m*+δ, σ+Σy). Premiums depend on the data
//! only through (m, Σn, m*, Σy). G and φ are kept in log space because
//! e^{μΣy} overflows for realistic histories.

use serde::{Deserialize, Serialize};

use crate::distributions::{gamma_log_pdf, ln_or_neg_inf, log_mix, FreqParams, SevParams};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::special::{lbeta, lgamma};

/// One rating period: its claim count and, when recorded, the claim sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub count: u64,
    pub severities: Option<Vec<f64>>,
}

impl PeriodRecord {
    pub fn new(count: u64, severities: Vec<f64>) -> Self {
        Self {
            count,
            severities: Some(severities),
        }
    }

    pub fn count_only(count: u64) -> Self {
        Self {
            count,
            severities: None,
        }
    }
}

/// Sufficient statistics (m, Σn, m*, Σy).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HistoryStats {
    pub m: u64,
    pub sum_n: u64,
    pub m_star: u64,
    pub sum_y: f64,
}

/// Claim records plus their running sufficient statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClaimHistory {
    periods: Vec<PeriodRecord>,
    stats: HistoryStats,
    frequency_only: bool,
}

impl ClaimHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = PeriodRecord>) -> Result<Self> {
        let mut hist = Self::new();
        for r in records {
            hist.push(r)?;
        }
        Ok(hist)
    }

    /// Appends a period. Recorded severities must match the count and be positive.
    pub fn push(&mut self, record: PeriodRecord) -> Result<()> {
        let period = self.periods.len();
        match &record.severities {
            Some(ys) => {
                if ys.len() as u64 != record.count {
                    return Err(Error::InvalidInput(format!(
                        "period {period}: {} severities for {} claims",
                        ys.len(),
                        record.count
                    )));
                }
                if let Some(y) = ys.iter().find(|y| !(y.is_finite() && **y > 0.0)) {
                    return Err(Error::InvalidInput(format!("period {period}: non-positive severity {y}")));
                }
                self.stats.m_star += record.count;
                self.stats.sum_y += ys.iter().sum::<f64>();
            }
            None => self.frequency_only = true,
        }
        self.stats.m += 1;
        self.stats.sum_n += record.count;
        self.periods.push(record);
        Ok(())
    }

    pub fn periods(&self) -> &[PeriodRecord] {
        &self.periods
    }

    pub fn stats(&self) -> HistoryStats {
        self.stats
    }

    /// True when at least one period has no recorded severities.
    pub fn frequency_only(&self) -> bool {
        self.frequency_only
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorFreq {
    pub w: f64,
    pub shape_lo: f64,
    pub shape_hi: f64,
    pub rate: f64,
}

impl PosteriorFreq {
    pub fn mean(&self) -> f64 {
        (self.w * self.shape_lo + (1.0 - self.w) * self.shape_hi) / self.rate
    }

    pub fn log_pdf(&self, lambda: f64) -> f64 {
        log_mix(
            ln_or_neg_inf(self.w),
            gamma_log_pdf(lambda, self.shape_lo, self.rate),
            ln_or_neg_inf(1.0 - self.w),
            gamma_log_pdf(lambda, self.shape_hi, self.rate),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSev {
    pub omega: f64,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub atom: f64,
}

impl PosteriorSev {
    /// ω/μ + (1-ω)·(m*+δ)/(Σy+σ), the severity premium.
    pub fn premium(&self) -> f64 {
        self.omega / self.atom + (1.0 - self.omega) * self.gamma_shape / self.gamma_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumQuote {
    pub freq_component: f64,
    pub sev_component: f64,
    pub premium: f64,
    pub w: f64,
    pub omega: f64,
    /// Severity history was missing, so the prior severity component was used.
    pub frequency_only: bool,
}

/// 1/(1+e^x) without overflow.
fn logistic_complement(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        1.0
    } else if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// ln G with real-valued exposure, used for continuous-time premiums.
pub(crate) fn log_g_exposure(freq: &FreqParams, exposure: f64, sum_n: f64) -> Result<f64> {
    if freq.p == 0.0 {
        return Err(Error::InvalidParams(
            "p = 0 puts all prior mass on the unforeseeable component; G is undefined".into(),
        ));
    }
    if freq.p == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let FreqParams {
        alpha1, alpha2, beta, p,
    } = *freq;
    Ok(((1.0 - p) / p).ln() + lbeta(alpha1, alpha2) - lbeta(sum_n + alpha1, alpha2)
        + alpha2 * (beta.ln() - (beta + exposure).ln()))
}

/// ln G(p, α1, α2, β, n) = ln((1-p)/p) + ln B(α1, α2) - ln B(Σn+α1, α2) + α2·ln(β/(β+m)).
/// Returns -∞ when p = 1 and fails when p = 0.
pub fn log_g(freq: &FreqParams, m: u64, sum_n: u64) -> Result<f64> {
    log_g_exposure(freq, m as f64, sum_n as f64)
}

pub(crate) fn posterior_freq_exposure(freq: &FreqParams, exposure: f64, sum_n: f64) -> PosteriorFreq {
    let w = match log_g_exposure(freq, exposure, sum_n) {
        Ok(lg) => logistic_complement(lg),
        Err(_) => 0.0,
    };
    PosteriorFreq {
        w,
        shape_lo: sum_n + freq.alpha1,
        shape_hi: sum_n + freq.alpha1 + freq.alpha2,
        rate: freq.beta + exposure,
    }
}

/// Posterior of the intensity after m periods with Σn claims.
pub fn posterior_freq(freq: &FreqParams, m: u64, sum_n: u64) -> PosteriorFreq {
    posterior_freq_exposure(freq, m as f64, sum_n as f64)
}

/// Posterior mean intensity; returns (premium, w).
pub fn premium_freq(freq: &FreqParams, m: u64, sum_n: u64) -> (f64, f64) {
    let post = posterior_freq(freq, m, sum_n);
    (post.mean(), post.w)
}

/// Credibility factor Z = m/(β+m): each posterior branch mean equals
/// Z·(Σn/m) + (1-Z)·(α/β).
pub fn credibility_factor(beta: f64, m: u64) -> f64 {
    m as f64 / (beta + m as f64)
}

/// ln φ = ln((1-ν)/ν) + ln Γ(m*+δ) - ln Γ(δ) + δ ln σ - (m*+δ) ln(σ+Σy) - m* ln μ + μΣy.
/// Returns -∞ when ν = 1 and fails when ν = 0.
pub fn log_phi(sev: &SevParams, m_star: u64, sum_y: f64) -> Result<f64> {
    if sev.nu == 0.0 {
        return Err(Error::InvalidParams(
            "nu = 0 removes the exponential component; phi is undefined".into(),
        ));
    }
    if sev.nu == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if !(sum_y >= 0.0 && sum_y.is_finite()) {
        return Err(Error::InvalidInput(format!("sum of severities must be finite and >= 0: {sum_y}")));
    }
    let SevParams { mu, delta, sigma, nu } = *sev;
    let ms = m_star as f64;
    // Grouped so that each bracket vanishes exactly for an empty history.
    Ok(((1.0 - nu) / nu).ln()
        + (lgamma(ms + delta) - lgamma(delta))
        + (delta * sigma.ln() - (ms + delta) * (sigma + sum_y).ln())
        + (mu * sum_y - ms * mu.ln()))
}

/// Posterior of the claim rate after m* claims totalling Σy.
pub fn posterior_sev(sev: &SevParams, m_star: u64, sum_y: f64) -> PosteriorSev {
    let omega = match log_phi(sev, m_star, sum_y) {
        Ok(lp) => logistic_complement(lp),
        Err(_) => 0.0,
    };
    PosteriorSev {
        omega,
        gamma_shape: m_star as f64 + sev.delta,
        gamma_rate: sev.sigma + sum_y,
        atom: sev.mu,
    }
}

/// Severity premium ω/μ + (1-ω)·(m*+δ)/(Σy+σ); returns (premium, ω).
pub fn premium_sev(sev: &SevParams, m_star: u64, sum_y: f64) -> (f64, f64) {
    let post = posterior_sev(sev, m_star, sum_y);
    if post.omega == 1.0 {
        return (1.0 / sev.mu, 1.0);
    }
    (post.premium(), post.omega)
}

/// Frequency premium times severity premium at the history's statistics.
/// Without severity records the severity component is its prior value.
pub fn premium_combined(freq: &FreqParams, sev: &SevParams, hist: &ClaimHistory) -> PremiumQuote {
    quote_from_stats(freq, sev, &hist.stats(), hist.frequency_only())
}

pub(crate) fn quote_from_stats(
    freq: &FreqParams,
    sev: &SevParams,
    stats: &HistoryStats,
    frequency_only: bool,
) -> PremiumQuote {
    let (freq_component, w) = premium_freq(freq, stats.m, stats.sum_n);
    let (sev_component, omega) = if frequency_only {
        premium_sev(sev, 0, 0.0)
    } else {
        premium_sev(sev, stats.m_star, stats.sum_y)
    };
    PremiumQuote {
        freq_component,
        sev_component,
        premium: freq_component * sev_component,
        w,
        omega,
        frequency_only,
    }
}

const ORACLE_TOL: f64 = 1e-12;

/// Integrates exp(f) over [lo, hi] after subtracting `shift` in the exponent,
/// splitting the range into pieces so adaptive refinement sees the peak.
fn integrate_exp<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, shift: f64) -> Result<f64> {
    const PIECES: usize = 16;
    let width = (hi - lo) / PIECES as f64;
    let mut total = 0.0;
    for k in 0..PIECES {
        let a = lo + k as f64 * width;
        total += integrate(|x| (f(x) - shift).exp(), a, a + width, ORACLE_TOL, 0.0)?;
    }
    Ok(total)
}

/// Range holding all mass of Gamma(shape, rate) densities for the given shapes.
fn gamma_window(shapes: &[f64], rate: f64) -> (f64, f64) {
    let lo = shapes
        .iter()
        .map(|&a| (a - 40.0 * a.sqrt()) / rate)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let hi = shapes
        .iter()
        .map(|&a| (a + 40.0 * a.sqrt() + 40.0) / rate)
        .fold(0.0, f64::max);
    (lo, hi)
}

/// Posterior mean of the intensity by direct quadrature of
/// λ·π(λ)·λ^{Σn}e^{-mλ} against π(λ)·λ^{Σn}e^{-mλ}. Test oracle for
/// [`premium_freq`].
pub fn posterior_mean_quadrature(freq: &FreqParams, m: u64, sum_n: u64) -> Result<f64> {
    let (mf, nf) = (m as f64, sum_n as f64);
    let log_post = |l: f64| {
        if l <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let prior = log_mix(
            ln_or_neg_inf(freq.p),
            gamma_log_pdf(l, freq.alpha1, freq.beta),
            ln_or_neg_inf(1.0 - freq.p),
            gamma_log_pdf(l, freq.alpha1 + freq.alpha2, freq.beta),
        );
        prior + nf * l.ln() - mf * l
    };
    let rate = freq.beta + mf;
    let (lo, hi) = gamma_window(&[nf + freq.alpha1, nf + freq.alpha1 + freq.alpha2 + 1.0], rate);
    let shift = peak(&log_post, lo, hi);
    let den = integrate_exp(log_post, lo, hi, shift)?;
    let num = integrate_exp(|l| log_post(l) + l.ln(), lo, hi, shift)?;
    Ok(num / den)
}

/// Severity premium by quadrature: ω from the atom mass against the
/// integrated Gamma branch, and the Gamma branch's posterior mean rate from
/// a second integral. Test oracle for [`premium_sev`].
pub fn posterior_sev_premium_quadrature(sev: &SevParams, m_star: u64, sum_y: f64) -> Result<f64> {
    let ms = m_star as f64;
    let log_branch = |t: f64| {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        gamma_log_pdf(t, sev.delta, sev.sigma) + ms * t.ln() - t * sum_y
    };
    let rate = sev.sigma + sum_y;
    let (lo, hi) = gamma_window(&[ms + sev.delta, ms + sev.delta + 1.0], rate);
    let shift = peak(&log_branch, lo, hi);
    let mass = integrate_exp(log_branch, lo, hi, shift)?;
    let first = integrate_exp(|t| log_branch(t) + t.ln(), lo, hi, shift)?;
    let ln_atom = ln_or_neg_inf(sev.nu) + ms * sev.mu.ln() - sev.mu * sum_y;
    let ln_cont = ln_or_neg_inf(1.0 - sev.nu) + mass.ln() + shift;
    let omega = logistic_complement(ln_cont - ln_atom);
    Ok(omega / sev.mu + (1.0 - omega) * first / mass)
}

/// Largest value of `f` on a grid over [lo, hi].
fn peak<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    (0..=400)
        .map(|k| f(lo + (hi - lo) * k as f64 / 400.0))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max)
}
