//! Evaluation of the global likelihood over counts and severities, and of the
//! joint density of an interarrival time paired with the claim it produces.
//!
//! Inside the split-rate integral the interarrival law for the ξ ≠ 1 branch is
//! the Lomax with shape α1+α2 (the total intensity Λ1+Λ2 is Gamma(α1+α2, β)
//! and independent of ξ); the atom ξ = 1 uses shape α1. Only evaluation is
//! provided, not maximisation.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    exponential_log_pdf, ln_or_neg_inf, log_mix, lomax_log_pdf, nb_mixture_log_pmf, severity_mixture_log_pdf,
    FreqParams, SevParams,
};
use crate::error::{Error, Result};
use crate::premium::PeriodRecord;
use crate::quadrature::GaussLegendre;
use crate::rng::{Rng, RngSeed};
use crate::sev_em::nu_from_freq;
use crate::special::lbeta;

/// All seven parameters (α1, α2, β, p, μ, δ, σ) plus the severity weight ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullParams {
    pub freq: FreqParams,
    pub sev: SevParams,
}

impl FullParams {
    pub fn new(freq: FreqParams, sev: SevParams) -> Result<Self> {
        freq.validate()?;
        sev.validate()?;
        Ok(Self { freq, sev })
    }

    /// Builds parameters whose ν is tied to the frequency side.
    pub fn linked(freq: FreqParams, mu: f64, delta: f64, sigma: f64) -> Result<Self> {
        let sev = SevParams::new(mu, delta, sigma, nu_from_freq(&freq))?;
        Self::new(freq, sev)
    }

    pub fn is_linked(&self, tol: f64) -> bool {
        (self.sev.nu - nu_from_freq(&self.freq)).abs() <= tol
    }
}

/// Σ_i ln P[N = n_i] + Σ_i Σ_j ln h_Y(y_ij).
pub fn global_loglik(params: &FullParams, data: &[PeriodRecord]) -> Result<f64> {
    let mut ll = 0.0;
    for (i, rec) in data.iter().enumerate() {
        let ys: &[f64] = rec.severities.as_deref().unwrap_or(&[]);
        if ys.len() as u64 != rec.count {
            return Err(Error::InvalidInput(format!(
                "period {i}: {} severities for {} claims",
                ys.len(),
                rec.count
            )));
        }
        ll += nb_mixture_log_pmf(&params.freq, rec.count);
        ll += ys.iter().map(|&y| severity_mixture_log_pdf(&params.sev, y)).sum::<f64>();
    }
    Ok(ll)
}

/// Default number of Gauss–Legendre nodes per half of the ξ-integral.
pub const DEFAULT_QUAD_NODES: usize = 64;

/// Log joint density of an interarrival time `t` and the severity `y` of the
/// claim ending it:
/// (1-p)·∫₀¹ h_ξ(y)·φ_{α1+α2}(t) Beta(ξ; α1, α2) dξ + p·f(y)·φ_{α1}(t),
/// with h_ξ = ξ·f + (1-ξ)·g and φ_a the Lomax(a, β) density.
///
/// The ξ-integral is split at 1/2 and each half mapped by ξ = ½v^{1/α1}
/// (resp. 1-ξ = ½v^{1/α2}), which absorbs the Beta endpoint singularities;
/// each half uses `quad_nodes` Gauss–Legendre nodes.
pub fn joint_ty_log_density(params: &FullParams, t: f64, y: f64, quad_nodes: usize) -> Result<f64> {
    if quad_nodes < 4 {
        return Err(Error::InvalidInput(format!(
            "quadrature needs at least 4 nodes, got {quad_nodes}"
        )));
    }
    let rule = GaussLegendre::new(quad_nodes);
    joint_with_rule(params, t, y, &rule)
}

fn joint_with_rule(params: &FullParams, t: f64, y: f64, rule: &GaussLegendre) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) || !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidInput(format!("need t >= 0 and y > 0, got t={t}, y={y}")));
    }
    let FreqParams {
        alpha1, alpha2, beta, p,
    } = params.freq;
    let lf = exponential_log_pdf(y, params.sev.mu);
    let lg = lomax_log_pdf(y, params.sev.delta, params.sev.sigma);
    let top = lf.max(lg);
    let (ef, eg) = ((lf - top).exp(), (lg - top).exp());
    let h = |xi: f64| xi * ef + (1.0 - xi) * eg;

    // ∫₀^½ h(ξ) ξ^{a-1}(1-ξ)^{b-1} dξ with ξ = ½v^{1/a}: the ξ^{a-1}dξ factor becomes (½)^a/a dv.
    let lower = rule.integrate(
        |v| {
            let xi = 0.5 * v.powf(1.0 / alpha1);
            h(xi) * (1.0 - xi).powf(alpha2 - 1.0)
        },
        0.0,
        1.0,
    ) * 0.5f64.powf(alpha1)
        / alpha1;
    let upper = rule.integrate(
        |v| {
            let eta = 0.5 * v.powf(1.0 / alpha2);
            h(1.0 - eta) * (1.0 - eta).powf(alpha1 - 1.0)
        },
        0.0,
        1.0,
    ) * 0.5f64.powf(alpha2)
        / alpha2;
    let ln_mix = (lower + upper).ln() - lbeta(alpha1, alpha2) + top;

    Ok(log_mix(
        ln_or_neg_inf(1.0 - p),
        ln_mix + lomax_log_pdf(t, alpha1 + alpha2, beta),
        ln_or_neg_inf(p),
        lf + lomax_log_pdf(t, alpha1, beta),
    ))
}

/// Σ over pairs of [`joint_ty_log_density`]; each pair carries its own
/// latent intensity, so the ξ-integral is taken per pair.
pub fn joint_sample_loglik(params: &FullParams, pairs: &[(f64, f64)], quad_nodes: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no (t, y) pairs".into()));
    }
    if quad_nodes < 4 {
        return Err(Error::InvalidInput(format!(
            "quadrature needs at least 4 nodes, got {quad_nodes}"
        )));
    }
    let rule = GaussLegendre::new(quad_nodes);
    pairs
        .iter()
        .map(|&(t, y)| joint_with_rule(params, t, y, &rule))
        .sum()
}

/// Independent (t, y) pairs: per pair, draw the stream intensities, the
/// waiting time to the first claim, and that claim's size given the split ξ.
pub fn sample_joint_pairs(params: &FullParams, count: usize, seed: RngSeed) -> Vec<(f64, f64)> {
    let mut rng = Rng::new(seed);
    let FreqParams {
        alpha1, alpha2, beta, p,
    } = params.freq;
    (0..count)
        .map(|_| {
            let l1 = rng.gamma(alpha1, beta);
            let (lambda, xi) = if rng.bernoulli(p) {
                (l1, 1.0)
            } else {
                let l2 = rng.gamma(alpha2, beta);
                (l1 + l2, l1 / (l1 + l2))
            };
            let t = rng.exponential(lambda);
            let y = if rng.bernoulli(xi) {
                rng.exponential(params.sev.mu)
            } else {
                rng.lomax(params.sev.delta, params.sev.sigma)
            };
            (t, y.max(f64::MIN_POSITIVE))
        })
        .collect()
}
