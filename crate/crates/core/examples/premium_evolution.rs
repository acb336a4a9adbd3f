//! Premium after each period of a (0, 2, 1) claim pattern.

use twostream::{generate_scenario, premium_evolution, FreqParams, RngSeed, ScenarioSpec, SevParams, SeverityMode};

fn main() -> twostream::Result<()> {
    let freq = FreqParams::new(3.0, 1.0, 0.5, 0.6)?;
    let sev = SevParams::new(1.0, 2.0, 0.5, 0.9)?;
    let spec = ScenarioSpec {
        pattern: vec![0, 2, 1],
        periods: 12,
        severity_mode: SeverityMode::PriorMeanPlusNoise { noise_sd: 0.1 },
        seed: RngSeed(11),
    };
    let records = generate_scenario(&sev, &spec)?;
    let quotes = premium_evolution(&freq, &sev, &records)?;

    println!("{:>6} {:>6} {:>8} {:>8} {:>8}", "period", "n", "w", "omega", "premium");
    for (k, q) in quotes.iter().enumerate() {
        let n = if k == 0 { 0 } else { records[k - 1].count };
        println!("{k:>6} {n:>6} {:>8.4} {:>8.4} {:>8.4}", q.w, q.omega, q.premium);
    }
    Ok(())
}
