//! Goodness of fit of an NB mixture to count data: Kolmogorov–Smirnov and
//! Pearson chi-square.
//!
//! KS on discrete data uses the continuous-case asymptotic p-value, which is
//! conservative. The chi-square uses equiprobable bins cut at model
//! quantiles, merged rightward until each expected count is at least 5.

use serde::{Deserialize, Serialize};

use crate::distributions::{count_upper_bound, CountCdf, FreqParams};
use crate::error::{Error, Result};
use crate::freq_em::CountSample;
use crate::special::{kolmogorov_sf, reg_incomplete_gamma_upper};

/// Number of parameters of the frequency mixture, subtracted from the
/// chi-square degrees of freedom when the model was fitted to the same data.
pub const FREQ_PARAM_COUNT: usize = 4;

/// A chi-square cell covering counts `lo..=hi` (`hi = None` means unbounded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofBin {
    pub lo: u64,
    pub hi: Option<u64>,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    pub chisq_statistic: f64,
    pub chisq_df: usize,
    pub chisq_pvalue: f64,
    pub bins: Vec<GofBin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub pvalue: f64,
    pub bins: Vec<GofBin>,
}

/// D = sup |F_m - F| over the sample support (both sides of each jump) and
/// its asymptotic p-value kolmogorov_sf(√m·D).
pub fn ks_test(params: &FreqParams, sample: &CountSample) -> Result<(f64, f64)> {
    let m = sample.m();
    if m < 10 {
        return Err(Error::Gof(format!("KS test needs m >= 10, got {m}")));
    }
    let mut sorted = sample.counts().to_vec();
    sorted.sort_unstable();
    let table = CountCdf::new(params, *sorted.last().expect("m >= 10"));
    let mf = m as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < m {
        let x = sorted[i];
        let below = i as f64 / mf;
        while i < m && sorted[i] == x {
            i += 1;
        }
        let at = i as f64 / mf;
        d = d.max((at - table.cdf(x)).abs()).max((below - table.cdf_below(x)).abs());
    }
    let pvalue = kolmogorov_sf(mf.sqrt() * d)?;
    Ok((d, pvalue))
}

/// Pearson statistic, df and p-value for given cells.
pub fn chisq_from_bins(bins: Vec<GofBin>, fitted_param_count: usize) -> Result<ChiSquare> {
    if bins.len() < 3 {
        return Err(Error::Gof(format!("only {} bins after merging; need at least 3", bins.len())));
    }
    let df = bins.len() as i64 - 1 - fitted_param_count as i64;
    if df < 1 {
        return Err(Error::Gof(format!(
            "{} bins leave no degrees of freedom after {fitted_param_count} fitted parameters",
            bins.len()
        )));
    }
    let statistic: f64 = bins
        .iter()
        .map(|b| (b.observed as f64 - b.expected).powi(2) / b.expected)
        .sum();
    let pvalue = reg_incomplete_gamma_upper(df as f64 / 2.0, statistic / 2.0)?;
    Ok(ChiSquare {
        statistic,
        df: df as usize,
        pvalue,
        bins,
    })
}

/// Chi-square test with k = clamp(round(2·m^0.4), 3, m/5) equiprobable bins.
pub fn chisq_test(params: &FreqParams, sample: &CountSample, fitted_param_count: usize) -> Result<ChiSquare> {
    let m = sample.m();
    if m < 30 {
        return Err(Error::Gof(format!("chi-square test needs m >= 30, got {m}")));
    }
    let mf = m as f64;
    let k = ((2.0 * mf.powf(0.4)).round() as usize).clamp(3, m / 5);
    let max_n = count_upper_bound(params).max(*sample.counts().iter().max().expect("m >= 30"));
    let table = CountCdf::new(params, max_n);

    let mut edges: Vec<u64> = (1..k).map(|j| table.quantile(j as f64 / k as f64)).collect();
    edges.dedup();

    let mut cells: Vec<(u64, Option<u64>)> = Vec::with_capacity(edges.len() + 1);
    let mut lo = 0;
    for &e in &edges {
        if e >= lo {
            cells.push((lo, Some(e)));
            lo = e + 1;
        }
    }
    cells.push((lo, None));

    let expected = |lo: u64, hi: Option<u64>| {
        let upper = hi.map_or(1.0, |h| table.cdf(h));
        mf * (upper - table.cdf_below(lo)).max(0.0)
    };
    let observed = |lo: u64, hi: Option<u64>| {
        sample
            .counts()
            .iter()
            .filter(|&&n| n >= lo && hi.is_none_or(|h| n <= h))
            .count() as u64
    };

    let mut merged: Vec<GofBin> = Vec::new();
    let mut open: Option<u64> = None;
    for &(lo, hi) in &cells {
        let start = open.unwrap_or(lo);
        if expected(start, hi) >= 5.0 || hi.is_none() {
            merged.push(GofBin {
                lo: start,
                hi,
                observed: 0,
                expected: 0.0,
            });
            open = None;
        } else {
            open = Some(start);
        }
    }
    // A short tail is folded into its left neighbour.
    if merged.len() >= 2 && expected(merged[merged.len() - 1].lo, None) < 5.0 {
        let last = merged.pop().expect("len >= 2");
        merged.last_mut().expect("len >= 1").hi = last.hi;
    }
    for b in &mut merged {
        b.expected = expected(b.lo, b.hi);
        b.observed = observed(b.lo, b.hi);
    }
    chisq_from_bins(merged, fitted_param_count)
}

/// Both tests in one report.
pub fn gof_report(params: &FreqParams, sample: &CountSample, fitted_param_count: usize) -> Result<GofReport> {
    let (ks_statistic, ks_pvalue) = ks_test(params, sample)?;
    let chi = chisq_test(params, sample, fitted_param_count)?;
    Ok(GofReport {
        ks_statistic,
        ks_pvalue,
        chisq_statistic: chi.statistic,
        chisq_df: chi.df,
        chisq_pvalue: chi.pvalue,
        bins: chi.bins,
    })
}
