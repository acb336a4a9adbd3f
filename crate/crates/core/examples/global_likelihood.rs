//! Global log-likelihood of counts with severities, and the joint density of
//! an interarrival time with its claim size.

use twostream::likelihood::{joint_sample_loglik, sample_joint_pairs, DEFAULT_QUAD_NODES};
use twostream::{generate_scenario, global_loglik, joint_ty_log_density, FreqParams, FullParams, RngSeed, ScenarioSpec, SeverityMode};

fn main() -> twostream::Result<()> {
    let params = FullParams::linked(FreqParams::new(3.0, 1.0, 0.5, 0.6)?, 1.0, 2.0, 0.5)?;
    let spec = ScenarioSpec {
        pattern: vec![0, 2, 1],
        periods: 12,
        severity_mode: SeverityMode::ModelDraw,
        seed: RngSeed(4),
    };
    let records = generate_scenario(&params.sev, &spec)?;
    println!("global loglik over 12 periods: {:.4}", global_loglik(&params, &records)?);

    for (t, y) in [(0.1, 0.5), (0.5, 1.0), (2.0, 3.0)] {
        let ld = joint_ty_log_density(&params, t, y, DEFAULT_QUAD_NODES)?;
        println!("f(t={t}, y={y}) = {:.6}", ld.exp());
    }
    let pairs = sample_joint_pairs(&params, 2000, RngSeed(9));
    println!("joint loglik of 2000 pairs: {:.3}", joint_sample_loglik(&params, &pairs, DEFAULT_QUAD_NODES)?);
    Ok(())
}
