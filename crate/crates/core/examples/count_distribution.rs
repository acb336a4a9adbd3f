//! Mixture pmf, its moments, and a split of the total intensity between streams.

use twostream::distributions::{nb_mixture_cdf, nb_mixture_log_pmf, sample_counts, zm_nb_log_pmf};
use twostream::{FreqParams, Rng, RngSeed, SplitRate};

fn main() -> twostream::Result<()> {
    let freq = FreqParams::new(3.0, 1.0, 0.5, 0.6)?;
    println!("mean {:.4}  variance {:.4}", freq.mean(), freq.variance());
    println!("{:>3} {:>10} {:>10} {:>10}", "n", "pmf", "cdf", "zm_stream2");
    for n in 0..=15 {
        println!(
            "{:>3} {:>10.6} {:>10.6} {:>10.6}",
            n,
            nb_mixture_log_pmf(&freq, n).exp(),
            nb_mixture_cdf(&freq, n),
            zm_nb_log_pmf(n, freq.alpha2, freq.beta, freq.p).exp()
        );
    }

    let counts = sample_counts(&freq, 10_000, RngSeed(1));
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    println!("simulated mean over 10000 periods: {mean:.4}");

    let mut rng = Rng::new(RngSeed(2));
    let xi: Vec<f64> = (0..5).map(|_| SplitRate::sample(&freq, &mut rng).value()).collect();
    println!("split rates (share of the historical stream): {xi:.3?}");
    Ok(())
}
