//! KS and chi-square tests against the true model and a mis-specified one.

use twostream::distributions::sample_counts;
use twostream::gof::gof_report;
use twostream::{CountSample, FreqParams, RngSeed};

fn main() -> twostream::Result<()> {
    let truth = FreqParams::new(97.558, 30.147, 0.019_781, 0.593)?;
    let wrong = FreqParams { beta: 2.0 * truth.beta, ..truth };
    let sample = CountSample::new(sample_counts(&truth, 180, RngSeed(5)))?;

    for (name, model) in [("true", truth), ("beta x2", wrong)] {
        let r = gof_report(&model, &sample, 0)?;
        println!(
            "{name:>8}: KS D={:.4} p={:.4} | chi2={:.2} df={} p={:.4}",
            r.ks_statistic, r.ks_pvalue, r.chisq_statistic, r.chisq_df, r.chisq_pvalue
        );
    }
    Ok(())
}
