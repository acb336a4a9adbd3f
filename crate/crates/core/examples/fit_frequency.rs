//! EM fit of the count mixture on 180 simulated periods.

use twostream::distributions::sample_counts;
use twostream::freq_em::observed_loglik_freq;
use twostream::{fit_freq, moment_init_freq, CountSample, EmOptions, FreqParams, RngSeed};

fn main() -> twostream::Result<()> {
    let truth = FreqParams::new(97.558, 30.147, 0.019_781, 0.593)?;
    let sample = CountSample::new(sample_counts(&truth, 180, RngSeed(7)))?;
    println!("sample mean {:.1}, variance {:.1}", sample.mean(), sample.variance());

    let init = moment_init_freq(&sample)?;
    println!("moment start: {init:?}");
    let (fit, trace) = fit_freq(&sample, &init, &EmOptions::default())?;
    println!("fitted:       {fit:?}");
    println!(
        "{} iterations, stop {:?}, loglik {:.4} (truth {:.4}), monotone {}",
        trace.iterations,
        trace.stop_reason,
        trace.final_loglik(),
        observed_loglik_freq(&truth, &sample),
        trace.is_monotone(1e-8)
    );
    Ok(())
}
