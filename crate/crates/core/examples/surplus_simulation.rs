//! Surplus paths with posterior-mean premium income; reports ruin frequency.

use twostream::{simulate_surplus, FreqParams, RngSeed, SevParams, SurplusConfig};

fn main() -> twostream::Result<()> {
    let freq = FreqParams::new(3.0, 1.0, 0.5, 0.6)?;
    let sev = SevParams::new(1.0, 2.0, 0.5, 0.9)?;
    let cfg = SurplusConfig {
        initial_surplus: 5.0,
        loading: 0.2,
        horizon: 10.0,
        dt: 0.01,
    };
    let paths = 1000;
    let mut ruined = 0;
    let mut income = 0.0;
    for seed in 0..paths {
        let path = simulate_surplus(&freq, &sev, &cfg, RngSeed(seed))?;
        ruined += path.ruined as usize;
        income += path.premium_income;
    }
    let expected = (1.0 + cfg.loading) * sev.mean()? * freq.mean() * cfg.horizon;
    println!("ruined {ruined}/{paths}");
    println!("mean premium income {:.3} (prior expectation {expected:.3})", income / paths as f64);
    Ok(())
}
