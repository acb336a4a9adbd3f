//! Densities, mass functions and seeded samplers for the two-stream model.
//!
//! Claim counts per period follow a two-component Negative Binomial mixture
//! (Poisson counts with a Gamma-mixture intensity). Claim sizes follow an
//! Exponential/Lomax-Pareto mixture. Everything that can overflow is
//! evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{Rng, RngSeed};
use crate::special::lgamma;

/// Frequency parameters: historical intensity Gamma(α1, β), unforeseeable
/// intensity Gamma(α2, β) with an atom of mass `p` at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub p: f64,
}

impl FreqParams {
    pub fn new(alpha1: f64, alpha2: f64, beta: f64, p: f64) -> Result<Self> {
        let params = Self {
            alpha1,
            alpha2,
            beta,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.alpha1) && pos(self.alpha2) && pos(self.beta)) {
            return Err(Error::InvalidParams(format!(
                "alpha1, alpha2, beta must be finite and > 0: {self:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParams(format!("p must lie in [0, 1]: {}", self.p)));
        }
        Ok(())
    }

    /// E[N] = E[Λ] = p·α1/β + (1-p)·(α1+α2)/β.
    pub fn mean(&self) -> f64 {
        (self.p * self.alpha1 + (1.0 - self.p) * (self.alpha1 + self.alpha2)) / self.beta
    }

    /// Var[Λ] for the Gamma-mixture intensity.
    pub fn intensity_variance(&self) -> f64 {
        let b2 = self.beta * self.beta;
        let within = (self.p * self.alpha1 + (1.0 - self.p) * (self.alpha1 + self.alpha2)) / b2;
        let between = self.p * (1.0 - self.p) * (self.alpha2 / self.beta).powi(2);
        within + between
    }

    /// Var[N] = E[Λ] + Var[Λ].
    pub fn variance(&self) -> f64 {
        self.mean() + self.intensity_variance()
    }
}

/// Severity parameters: historical claims Exponential(μ), unforeseeable
/// claims Lomax-Pareto(δ, σ), mixed with weight ν on the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SevParams {
    pub mu: f64,
    pub delta: f64,
    pub sigma: f64,
    pub nu: f64,
}

impl SevParams {
    pub fn new(mu: f64, delta: f64, sigma: f64, nu: f64) -> Result<Self> {
        let params = Self {
            mu,
            delta,
            sigma,
            nu,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.mu) && pos(self.delta) && pos(self.sigma)) {
            return Err(Error::InvalidParams(format!(
                "mu, delta, sigma must be finite and > 0: {self:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(Error::InvalidParams(format!("nu must lie in [0, 1]: {}", self.nu)));
        }
        Ok(())
    }

    /// E[Y] = ν/μ + (1-ν)·σ/(δ-1); infinite Pareto mean when δ ≤ 1.
    pub fn mean(&self) -> Result<f64> {
        if self.delta <= 1.0 {
            if self.nu == 1.0 {
                return Ok(1.0 / self.mu);
            }
            return Err(Error::InvalidParams(format!(
                "Pareto shape delta = {} <= 1 has no finite mean",
                self.delta
            )));
        }
        Ok(self.nu / self.mu + (1.0 - self.nu) * self.sigma / (self.delta - 1.0))
    }
}

/// Share Ξ = Λ1/(Λ1+Λ2) of the combined intensity belonging to the
/// historical stream; Ξ = 1 exactly when the unforeseeable stream is dormant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRate(f64);

impl SplitRate {
    pub fn new(xi: f64) -> Result<Self> {
        if xi > 0.0 && xi <= 1.0 {
            Ok(Self(xi))
        } else {
            Err(Error::InvalidParams(format!("split rate must lie in (0, 1]: {xi}")))
        }
    }

    pub fn from_intensities(historical: f64, unforeseeable: f64) -> Result<Self> {
        Self::new(historical / (historical + unforeseeable))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Draws Ξ: 1 with probability p, otherwise Beta(α1, α2).
    pub fn sample(freq: &FreqParams, rng: &mut Rng) -> Self {
        if rng.bernoulli(freq.p) {
            Self(1.0)
        } else {
            // Beta draws can round to exactly 0 for tiny α1.
            Self(rng.beta(freq.alpha1, freq.alpha2).max(f64::MIN_POSITIVE))
        }
    }
}

/// ln(w1·e^a + w2·e^b) given ln w1, ln w2; zero weights pass -∞.
pub(crate) fn log_mix(ln_w1: f64, a: f64, ln_w2: f64, b: f64) -> f64 {
    let x = ln_w1 + a;
    let y = ln_w2 + b;
    let hi = x.max(y);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + ((x - hi).exp() + (y - hi).exp()).ln()
}

/// ln of a probability that may be exactly zero.
pub(crate) fn ln_or_neg_inf(w: f64) -> f64 {
    if w <= 0.0 {
        f64::NEG_INFINITY
    } else {
        w.ln()
    }
}

/// Log mass of NB(n; shape r, success probability β/(1+β)), with a real-valued
/// binomial coefficient.
pub fn nb_log_pmf(n: u64, shape: f64, beta: f64) -> f64 {
    let nf = n as f64;
    lgamma(nf + shape) - lgamma(shape) - lgamma(nf + 1.0) + shape * (beta / (1.0 + beta)).ln()
        - nf * beta.ln_1p()
}

/// Log mass of the two-component Negative Binomial mixture
/// p·NB(n; α1, β) + (1-p)·NB(n; α1+α2, β).
pub fn nb_mixture_log_pmf(params: &FreqParams, n: u64) -> f64 {
    log_mix(
        ln_or_neg_inf(params.p),
        nb_log_pmf(n, params.alpha1, params.beta),
        ln_or_neg_inf(1.0 - params.p),
        nb_log_pmf(n, params.alpha1 + params.alpha2, params.beta),
    )
}

/// Zero-modified Negative Binomial: the unforeseeable stream's count alone.
/// Mass p is moved to zero; the rest is NB(α2, β).
pub fn zm_nb_log_pmf(n: u64, alpha2: f64, beta: f64, p: f64) -> f64 {
    let nb = nb_log_pmf(n, alpha2, beta);
    if n == 0 {
        log_mix(ln_or_neg_inf(p), 0.0, ln_or_neg_inf(1.0 - p), nb)
    } else {
        ln_or_neg_inf(1.0 - p) + nb
    }
}

/// P[N ≤ n] by direct summation of the mixture pmf.
pub fn nb_mixture_cdf(params: &FreqParams, n: u64) -> f64 {
    let mut sum = 0.0;
    for k in 0..=n {
        sum += nb_mixture_log_pmf(params, k).exp();
    }
    sum.min(1.0)
}

/// Cumulative distribution table for repeated CDF lookups over a count range.
#[derive(Debug, Clone)]
pub struct CountCdf {
    cdf: Vec<f64>,
}

impl CountCdf {
    /// Tabulates P[N ≤ k] for k = 0..=max_n.
    pub fn new(params: &FreqParams, max_n: u64) -> Self {
        let mut acc = 0.0;
        let cdf = (0..=max_n)
            .map(|k| {
                acc += nb_mixture_log_pmf(params, k).exp();
                acc.min(1.0)
            })
            .collect();
        Self { cdf }
    }

    /// P[N ≤ n]; 1 beyond the tabulated range.
    pub fn cdf(&self, n: u64) -> f64 {
        self.cdf.get(n as usize).copied().unwrap_or(1.0)
    }

    /// P[N ≤ n-1], i.e. the left limit at n.
    pub fn cdf_below(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.cdf(n - 1)
        }
    }

    /// Smallest n with P[N ≤ n] ≥ q.
    pub fn quantile(&self, q: f64) -> u64 {
        self.cdf.partition_point(|&c| c < q) as u64
    }

    pub fn max_n(&self) -> u64 {
        self.cdf.len() as u64 - 1
    }
}

/// Count beyond which the mixture has negligible mass: mean + 20 sd.
pub fn count_upper_bound(params: &FreqParams) -> u64 {
    (params.mean() + 20.0 * params.variance().sqrt()).ceil() as u64 + 20
}

pub fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - lgamma(shape)
}

/// Log density of the Gamma-mixture intensity prior
/// p·Gamma(λ; α1, β) + (1-p)·Gamma(λ; α1+α2, β).
pub fn gamma_mixture_prior_log_pdf(params: &FreqParams, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain("gamma_mixture_prior_log_pdf", format!("lambda must be > 0, got {lambda}")));
    }
    Ok(log_mix(
        ln_or_neg_inf(params.p),
        gamma_log_pdf(lambda, params.alpha1, params.beta),
        ln_or_neg_inf(1.0 - params.p),
        gamma_log_pdf(lambda, params.alpha1 + params.alpha2, params.beta),
    ))
}

pub fn exponential_log_pdf(y: f64, rate: f64) -> f64 {
    rate.ln() - rate * y
}

/// Log density δσ^δ/(σ+y)^{δ+1} on y ≥ 0.
pub fn lomax_log_pdf(y: f64, shape: f64, scale: f64) -> f64 {
    shape.ln() + shape * scale.ln() - (shape + 1.0) * (scale + y).ln()
}

/// Log density of the claim-size mixture ν·μe^{-μy} + (1-ν)·δσ^δ/(σ+y)^{δ+1}.
/// Returns -∞ for negative sizes.
pub fn severity_mixture_log_pdf(params: &SevParams, y: f64) -> f64 {
    if y < 0.0 {
        return f64::NEG_INFINITY;
    }
    log_mix(
        ln_or_neg_inf(params.nu),
        exponential_log_pdf(y, params.mu),
        ln_or_neg_inf(1.0 - params.nu),
        lomax_log_pdf(y, params.delta, params.sigma),
    )
}

/// Log density of an interarrival time: a p / (1-p) mixture of Lomax laws with
/// shapes α1 and α1+α2 and common scale β.
pub fn interarrival_mixture_log_pdf(params: &FreqParams, t: f64) -> f64 {
    if t < 0.0 {
        return f64::NEG_INFINITY;
    }
    log_mix(
        ln_or_neg_inf(params.p),
        lomax_log_pdf(t, params.alpha1, params.beta),
        ln_or_neg_inf(1.0 - params.p),
        lomax_log_pdf(t, params.alpha1 + params.alpha2, params.beta),
    )
}

/// Draws an intensity λ from the Gamma-mixture prior.
pub fn sample_intensity(params: &FreqParams, rng: &mut Rng) -> f64 {
    let shape = if rng.bernoulli(params.p) {
        params.alpha1
    } else {
        params.alpha1 + params.alpha2
    };
    rng.gamma(shape, params.beta)
}

/// Per-period claim counts: λ from the Gamma mixture, then Poisson(λ).
pub fn sample_counts(params: &FreqParams, periods: usize, seed: RngSeed) -> Vec<u64> {
    let mut rng = Rng::new(seed);
    sample_counts_with(params, periods, &mut rng)
}

pub fn sample_counts_with(params: &FreqParams, periods: usize, rng: &mut Rng) -> Vec<u64> {
    (0..periods)
        .map(|_| {
            let lambda = sample_intensity(params, rng);
            rng.poisson(lambda)
        })
        .collect()
}

/// Independent claim sizes from the Exponential/Pareto mixture.
pub fn sample_severities(params: &SevParams, count: usize, seed: RngSeed) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    sample_severities_with(params, count, &mut rng)
}

pub fn sample_severities_with(params: &SevParams, count: usize, rng: &mut Rng) -> Vec<f64> {
    (0..count).map(|_| sample_severity(params, rng)).collect()
}

pub(crate) fn sample_severity(params: &SevParams, rng: &mut Rng) -> f64 {
    if rng.bernoulli(params.nu) {
        rng.exponential(params.mu)
    } else {
        rng.lomax(params.delta, params.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn scenario() -> FreqParams {
        FreqParams::new(3.0, 1.0, 0.5, 0.6).unwrap()
    }

    fn portfolio_fit() -> FreqParams {
        FreqParams::new(97.5582, 30.1471, 0.019_780_7, 0.592_995_9).unwrap()
    }

    #[test]
    fn geometric_special_case() {
        let g = FreqParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((nb_mixture_log_pmf(&g, 0) - 0.5f64.ln()).abs() < 1e-14);
        for n in 0..20u64 {
            let want = -((n + 1) as f64) * std::f64::consts::LN_2;
            assert!((nb_mixture_log_pmf(&g, n) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_pmf_at_zero() {
        // 0.6·(1/3)³ + 0.4·(1/3)⁴
        let want: f64 = 0.6 / 27.0 + 0.4 / 81.0;
        assert!((nb_mixture_log_pmf(&scenario(), 0) - want.ln()).abs() < 1e-13);
        assert!((want - 0.027_160_5).abs() < 1e-7);
    }

    #[test]
    fn mixture_pmf_at_portfolio_scale_matches_reference() {
        // Poisson ∫ Gamma-mixture by mpmath quadrature at 40 digits.
        let got = nb_mixture_log_pmf(&portfolio_fit(), 5373);
        assert!(got.is_finite());
        assert!((got - (-7.967_993_482_240_651)).abs() < 1e-9, "{got}");
    }

    #[test]
    fn prior_reduces_and_integrates() {
        let pure = FreqParams::new(3.0, 1.0, 0.5, 1.0).unwrap();
        let lam = 2.0;
        assert!((gamma_mixture_prior_log_pdf(&pure, lam).unwrap() - gamma_log_pdf(lam, 3.0, 0.5)).abs() < 1e-14);

        let s = scenario();
        let g = |shape: f64| 0.5f64.powf(shape) * lam.powf(shape - 1.0) * (-0.5 * lam).exp() / lgamma(shape).exp();
        let want = (0.6 * g(3.0) + 0.4 * g(4.0)).ln();
        assert!((gamma_mixture_prior_log_pdf(&s, lam).unwrap() - want).abs() < 1e-13);

        let total = integrate_to_infinity(|l| gamma_mixture_prior_log_pdf(&s, l).map(f64::exp).unwrap_or(0.0), 0.0, 1e-12, 0.0).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
        assert!(gamma_mixture_prior_log_pdf(&s, 0.0).is_err());
        assert!(gamma_mixture_prior_log_pdf(&s, -1.0).is_err());
    }

    #[test]
    fn severity_density_values() {
        let exp_only = SevParams::new(1.0, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(severity_mixture_log_pdf(&exp_only, 0.0), 0.0);
        let mix = SevParams::new(1.0, 2.0, 0.5, 0.9).unwrap();
        assert!((severity_mixture_log_pdf(&mix, 0.0) - 1.3f64.ln()).abs() < 1e-14);
        // far tail is the Pareto branch alone
        let y = 100.0;
        let pareto_only = (0.1f64).ln() + lomax_log_pdf(y, 2.0, 0.5);
        assert!((severity_mixture_log_pdf(&mix, y) - pareto_only).abs() < 1e-12);
        assert_eq!(severity_mixture_log_pdf(&mix, -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn interarrival_density_values() {
        let s = scenario();
        assert!((interarrival_mixture_log_pdf(&s, 0.0) - 6.8f64.ln()).abs() < 1e-13);
        let pure = FreqParams::new(3.0, 1.0, 0.5, 1.0).unwrap();
        for t in [0.0, 0.3, 2.0, 40.0] {
            assert!((interarrival_mixture_log_pdf(&pure, t) - lomax_log_pdf(t, 3.0, 0.5)).abs() < 1e-14);
        }
        let total = integrate_to_infinity(|t| interarrival_mixture_log_pdf(&s, t).exp(), 0.0, 1e-12, 0.0).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn counts_sampler_is_deterministic_and_unbiased() {
        let pure = FreqParams::new(3.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(sample_counts(&pure, 50, RngSeed(3)), sample_counts(&pure, 50, RngSeed(3)));
        let n = 100_000;
        let xs = sample_counts(&pure, n, RngSeed(4));
        let mean = xs.iter().sum::<u64>() as f64 / n as f64;
        let se = (pure.variance() / n as f64).sqrt();
        assert!((mean - 6.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn counts_sampler_portfolio_scale_mean() {
        let f = FreqParams::new(97.558, 30.147, 0.019_781, 0.593).unwrap();
        let xs = sample_counts(&f, 180, RngSeed(2024));
        let mean = xs.iter().sum::<u64>() as f64 / 180.0;
        let se = (f.variance() / 180.0).sqrt();
        assert!((mean - f.mean()).abs() < 3.0 * se, "{mean} vs {}", f.mean());
    }

    #[test]
    fn severity_sampler_moments() {
        let s = SevParams::new(1.0, 2.0, 0.5, 0.9).unwrap();
        assert!(sample_severities(&s, 0, RngSeed(1)).is_empty());
        assert_eq!(sample_severities(&s, 10, RngSeed(1)), sample_severities(&s, 10, RngSeed(1)));

        let n = 100_000;
        let e = SevParams::new(1.0, 2.0, 0.5, 1.0).unwrap();
        let xs = sample_severities(&e, n, RngSeed(2));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());

        // δ = 2 has infinite variance, so use the sample sd rather than a formula.
        let xs = sample_severities(&s, n, RngSeed(3));
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((mean - 0.95).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean}");
        assert!((s.mean().unwrap() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn cdf_properties() {
        let s = scenario();
        assert!((nb_mixture_cdf(&s, 0) - nb_mixture_log_pmf(&s, 0).exp()).abs() < 1e-16);
        let mut prev = 0.0;
        for n in 0..100 {
            let c = nb_mixture_cdf(&s, n);
            assert!(c >= prev);
            prev = c;
        }
        let far = (10.0 * s.mean()) as u64;
        assert!(nb_mixture_cdf(&s, far) >= 1.0 - 1e-6);

        let table = CountCdf::new(&s, 200);
        for n in [0u64, 3, 17, 60] {
            assert!((table.cdf(n) - nb_mixture_cdf(&s, n)).abs() < 1e-14);
        }
        let median = table.quantile(0.5);
        assert!(table.cdf(median) >= 0.5 && table.cdf_below(median) < 0.5);
    }

    #[test]
    fn pmf_matches_poisson_gamma_quadrature() {
        let s = scenario();
        for n in [0u64, 1, 5, 12, 30] {
            let nf = n as f64;
            let integrand = |l: f64| {
                if l <= 0.0 {
                    return 0.0;
                }
                (-l + nf * l.ln() - lgamma(nf + 1.0) + gamma_mixture_prior_log_pdf(&s, l).unwrap()).exp()
            };
            let v = integrate(integrand, 0.0, 200.0, 1e-13, 1e-300).unwrap();
            assert!((v - nb_mixture_log_pmf(&s, n).exp()).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn split_rate_bounds() {
        assert!(SplitRate::new(0.0).is_err());
        assert!(SplitRate::new(1.2).is_err());
        assert_eq!(SplitRate::new(1.0).unwrap().value(), 1.0);
        assert!((SplitRate::from_intensities(3.0, 1.0).unwrap().value() - 0.75).abs() < 1e-15);
        let f = scenario();
        let mut rng = Rng::new(RngSeed(12));
        let n = 50_000;
        let draws: Vec<f64> = (0..n).map(|_| SplitRate::sample(&f, &mut rng).value()).collect();
        let ones = draws.iter().filter(|&&x| x == 1.0).count() as f64 / n as f64;
        assert!((ones - 0.6).abs() < 0.01);
        assert!(draws.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn params_validation() {
        assert!(FreqParams::new(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(FreqParams::new(1.0, 1.0, 1.0, 1.5).is_err());
        assert!(SevParams::new(1.0, 2.0, -0.5, 0.5).is_err());
        assert!(SevParams::new(1.0, 0.8, 0.5, 0.5).unwrap().mean().is_err());
    }

    #[test]
    fn mixture_is_nb_convolved_with_zero_modified_nb() {
        for f in [scenario(), FreqParams::new(0.7, 2.5, 0.3, 0.25).unwrap(), FreqParams::new(5.0, 0.4, 1.7, 0.9).unwrap()] {
            let a: Vec<f64> = (0..=50).map(|k| nb_log_pmf(k, f.alpha1, f.beta).exp()).collect();
            let b: Vec<f64> = (0..=50).map(|k| zm_nb_log_pmf(k, f.alpha2, f.beta, f.p).exp()).collect();
            for n in 0..=50usize {
                let conv: f64 = (0..=n).map(|k| a[k] * b[n - k]).sum();
                let direct = nb_mixture_log_pmf(&f, n as u64).exp();
                assert!((conv - direct).abs() < 1e-10, "n={n}: {conv} vs {direct}");
            }
        }
    }

    #[test]
    fn thinning_is_binomial() {
        // Two independent Poisson streams with rates ξλ and (1-ξ)λ; given the
        // total of 10 the first stream's count must be Binomial(10, ξ).
        let (xi, lambda, n) = (0.3, 10.0, 10u64);
        let mut rng = Rng::new(RngSeed(99));
        let mut observed = [0u64; 11];
        let mut kept = 0u64;
        while kept < 100_000 {
            let a = rng.poisson(xi * lambda);
            let b = rng.poisson((1.0 - xi) * lambda);
            if a + b == n {
                observed[a as usize] += 1;
                kept += 1;
            }
        }
        let binom = |k: u64| {
            (lgamma(11.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
                + k as f64 * xi.ln()
                + (n - k) as f64 * (1.0 - xi).ln())
            .exp()
        };
        // Pool the sparse upper tail so every expected count is ≥ 5.
        let mut obs = Vec::new();
        let mut exp = Vec::new();
        let (mut o_acc, mut e_acc) = (0.0, 0.0);
        for k in 0..=n {
            o_acc += observed[k as usize] as f64;
            e_acc += binom(k) * kept as f64;
            if e_acc >= 5.0 && k < 7 {
                obs.push(o_acc);
                exp.push(e_acc);
                o_acc = 0.0;
                e_acc = 0.0;
            }
        }
        obs.push(o_acc);
        exp.push(e_acc);
        let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
        let df = (obs.len() - 1) as f64;
        let pval = crate::special::reg_incomplete_gamma_upper(df / 2.0, stat / 2.0).unwrap();
        assert!(pval > 0.01, "chi-square {stat} on {df} df, p = {pval}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn pmf_mass_is_complete(a1 in 1.0f64..50.0, a2 in 0.2f64..50.0, b in 0.05f64..5.0, p in 0.0f64..=1.0) {
            let f = FreqParams::new(a1, a2, b, p).unwrap();
            let upper = (f.mean() + 20.0 * f.variance().sqrt()).ceil() as u64;
            let total: f64 = (0..=upper).map(|n| nb_mixture_log_pmf(&f, n).exp()).sum();
            prop_assert!(total >= 1.0 - 1e-8, "total {}", total);
            prop_assert!(total <= 1.0 + 1e-9);
        }
    }
}
