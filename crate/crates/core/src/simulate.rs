//! Scenario generation for premium experiments and simulation of the surplus
//! process U(t) = u + c∫λ̂(s)ds - S(t) with a posterior-mean rate λ̂.

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_intensity, sample_severity, FreqParams, SevParams};
use crate::error::{Error, Result};
use crate::premium::{posterior_freq_exposure, premium_sev, quote_from_stats, HistoryStats, PeriodRecord, PremiumQuote};
use crate::rng::{Rng, RngSeed};

/// Smallest severity emitted by the noisy scenario mode.
pub const SEVERITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SeverityMode {
    /// Claim sizes drawn from the severity mixture.
    ModelDraw,
    /// Prior severity premium ν/μ + (1-ν)δ/σ plus Normal(0, noise_sd) noise,
    /// floored at [`SEVERITY_FLOOR`].
    PriorMeanPlusNoise { noise_sd: f64 },
}

/// Deterministic claim counts (pattern cycled over the periods) with
/// severities generated per `severity_mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub pattern: Vec<u64>,
    pub periods: usize,
    pub severity_mode: SeverityMode,
    pub seed: RngSeed,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pattern.is_empty() {
            return Err(Error::InvalidInput("scenario pattern is empty".into()));
        }
        if self.periods == 0 {
            return Err(Error::InvalidInput("scenario needs at least one period".into()));
        }
        if let SeverityMode::PriorMeanPlusNoise { noise_sd } = self.severity_mode {
            if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
                return Err(Error::InvalidInput(format!("noise_sd must be finite and >= 0: {noise_sd}")));
            }
        }
        Ok(())
    }
}

pub fn generate_scenario(sev: &SevParams, spec: &ScenarioSpec) -> Result<Vec<PeriodRecord>> {
    spec.validate()?;
    sev.validate()?;
    let mut rng = Rng::new(spec.seed);
    let prior_sev = premium_sev(sev, 0, 0.0).0;
    let records = (0..spec.periods)
        .map(|k| {
            let n = spec.pattern[k % spec.pattern.len()];
            let ys = (0..n)
                .map(|_| match spec.severity_mode {
                    SeverityMode::ModelDraw => sample_severity(sev, &mut rng),
                    SeverityMode::PriorMeanPlusNoise { noise_sd } => {
                        (prior_sev + noise_sd * rng.standard_normal()).max(SEVERITY_FLOOR)
                    }
                })
                .collect();
            PeriodRecord::new(n, ys)
        })
        .collect();
    Ok(records)
}

/// Quote k uses the statistics of periods 1..=k; quote 0 is the prior premium.
pub fn premium_evolution(freq: &FreqParams, sev: &SevParams, records: &[PeriodRecord]) -> Result<Vec<PremiumQuote>> {
    freq.validate()?;
    sev.validate()?;
    let mut stats = HistoryStats::default();
    let mut frequency_only = false;
    let mut quotes = Vec::with_capacity(records.len() + 1);
    quotes.push(quote_from_stats(freq, sev, &stats, frequency_only));
    for (k, r) in records.iter().enumerate() {
        stats.m += 1;
        stats.sum_n += r.count;
        match &r.severities {
            Some(ys) if ys.len() as u64 == r.count => {
                stats.m_star += r.count;
                stats.sum_y += ys.iter().sum::<f64>();
            }
            Some(ys) => {
                return Err(Error::InvalidInput(format!(
                    "period {}: {} severities for {} claims",
                    k + 1,
                    ys.len(),
                    r.count
                )))
            }
            None => frequency_only = true,
        }
        quotes.push(quote_from_stats(freq, sev, &stats, frequency_only));
    }
    Ok(quotes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurplusConfig {
    pub initial_surplus: f64,
    /// Safety loading θ in c = (1+θ)E[Y].
    pub loading: f64,
    pub horizon: f64,
    pub dt: f64,
}

impl SurplusConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_surplus >= 0.0
            && self.initial_surplus.is_finite()
            && self.loading >= 0.0
            && self.loading.is_finite()
            && self.horizon > 0.0
            && self.horizon.is_finite()
            && self.dt > 0.0
            && self.dt <= self.horizon / 100.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "surplus config needs u >= 0, loading >= 0, horizon > 0 and 0 < dt <= horizon/100: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusPath {
    /// Grid points and claim instants; the surplus at a claim instant is
    /// recorded after the claim is paid.
    pub times: Vec<f64>,
    pub surplus: Vec<f64>,
    pub lambda: f64,
    pub claim_times: Vec<f64>,
    pub claim_amounts: Vec<f64>,
    pub premium_income: f64,
    pub total_claims: f64,
    pub ruined: bool,
    pub ruin_time: Option<f64>,
}

impl SurplusPath {
    pub fn final_surplus(&self) -> f64 {
        *self.surplus.last().expect("path has at least one point")
    }
}

/// One path of the surplus process. λ is drawn from the prior, claims arrive
/// as a Poisson(λ) process with sizes from the severity mixture, and premium
/// accrues at c·λ̂(s), where λ̂(s) is the posterior mean intensity given N(s)
/// claims over exposure s. Income is integrated by the trapezoid rule at
/// step dt, split at claim instants.
pub fn simulate_surplus(freq: &FreqParams, sev: &SevParams, cfg: &SurplusConfig, seed: RngSeed) -> Result<SurplusPath> {
    freq.validate()?;
    sev.validate()?;
    cfg.validate()?;
    let c = (1.0 + cfg.loading) * sev.mean()?;
    let mut rng = Rng::new(seed);
    let lambda = sample_intensity(freq, &mut rng);

    let mut claim_times = Vec::new();
    let mut claim_amounts = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng.exponential(lambda);
        if t > cfg.horizon {
            break;
        }
        claim_times.push(t);
        claim_amounts.push(sample_severity(sev, &mut rng));
    }

    let rate = |s: f64, n: usize| posterior_freq_exposure(freq, s, n as f64).mean();
    let steps = (cfg.horizon / cfg.dt).ceil() as usize;
    let mut times = vec![0.0];
    let mut surplus = vec![cfg.initial_surplus];
    let mut premium_income = 0.0;
    let mut total_claims = 0.0;
    let mut ruin_time = None;
    let mut n = 0;
    let mut s = 0.0;
    let mut u = cfg.initial_surplus;
    let accrue = |from: f64, to: f64, n: usize, u: &mut f64, income: &mut f64| {
        let inc = c * 0.5 * (to - from) * (rate(from, n) + rate(to, n));
        *income += inc;
        *u += inc;
    };
    for k in 1..=steps {
        let grid = (k as f64 * cfg.dt).min(cfg.horizon);
        while n < claim_times.len() && claim_times[n] <= grid {
            let tc = claim_times[n];
            accrue(s, tc, n, &mut u, &mut premium_income);
            u -= claim_amounts[n];
            total_claims += claim_amounts[n];
            n += 1;
            s = tc;
            times.push(tc);
            surplus.push(u);
            if u < 0.0 && ruin_time.is_none() {
                ruin_time = Some(tc);
            }
        }
        if grid > s {
            accrue(s, grid, n, &mut u, &mut premium_income);
            s = grid;
            times.push(grid);
            surplus.push(u);
        }
    }

    Ok(SurplusPath {
        times,
        surplus,
        lambda,
        claim_times,
        claim_amounts,
        premium_income,
        total_claims,
        ruined: ruin_time.is_some(),
        ruin_time,
    })
}
