//! EM fit of the exponential/Pareto severity mixture, with ν held fixed and
//! with ν estimated.

use twostream::distributions::sample_severities;
use twostream::{fit_sev, EmOptions, RngSeed, SevParams, SeveritySample};

fn main() -> twostream::Result<()> {
    let truth = SevParams::new(1.0, 2.0, 0.5, 0.903_919_6)?;
    let sample = SeveritySample::new(sample_severities(&truth, 50_000, RngSeed(3)))?;
    let init = SevParams::new(1.5, 2.5, 0.2, truth.nu)?;
    let opts = EmOptions::default();

    let (fixed, trace) = fit_sev(&sample, &init, false, &opts)?;
    println!("nu fixed:     {fixed:?} after {} iterations", trace.iterations);

    let (free, trace) = fit_sev(&sample, &init, true, &opts)?;
    println!("nu estimated: {free:?} after {} iterations", trace.iterations);
    println!("loglik {:.3}", trace.final_loglik());
    Ok(())
}
