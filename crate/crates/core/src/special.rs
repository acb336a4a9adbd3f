//! Special functions used by every density, likelihood and posterior in the crate.
//!
//! The public functions validate their arguments and return [`Result`]; the
//! `pub(crate)` twins (`lgamma`, `psi`, ...) skip validation for hot loops whose
//! callers already hold validated parameters.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ζ(k) for k = 2..=31, used by the Taylor series of ln Γ(1 + z).
const ZETA: [f64; 30] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
    1.000_000_000_465_663,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain("ln_gamma", format!("argument must be finite and > 0, got {x}")));
    }
    Ok(lgamma(x))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    // Taylor series around the two roots keeps relative accuracy where ln Γ → 0.
    let z1 = x - 1.0;
    if z1.abs() <= 0.25 {
        return lgamma_1p_series(z1);
    }
    let z2 = x - 2.0;
    if z2.abs() <= 0.25 {
        return z2.ln_1p() + lgamma_1p_series(z2);
    }
    if x >= 15.0 {
        return stirling(x);
    }
    // ln Γ(x) = ln Γ(x + k) - ln(x (x+1) ... (x+k-1))
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < 15.0 {
        prod *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - prod.ln()
}

/// ln Γ(1 + z) = -γ z + Σ_{k≥2} (-1)^k ζ(k) z^k / k, valid for |z| < 1.
fn lgamma_1p_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = z;
    for (i, zeta) in ZETA.iter().enumerate() {
        zk *= z;
        let k = (i + 2) as f64;
        let term = zeta * zk / k;
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    -EULER_GAMMA * z + sum
}

fn stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Digamma ψ(x) = Γ'(x)/Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain("digamma", format!("argument must be finite and > 0, got {x}")));
    }
    Ok(psi(x))
}

pub(crate) fn psi(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = x;
    while z < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0))))));
    acc + z.ln() - 0.5 * r - tail
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
        return Err(domain("ln_beta", format!("arguments must be > 0, got ({a}, {b})")));
    }
    Ok(lbeta(a, b))
}

pub(crate) fn lbeta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Regularized upper incomplete gamma Q(s, x) = Γ(s, x) / Γ(s).
pub fn reg_incomplete_gamma_upper(s: f64, x: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 || x.is_nan() || x < 0.0 {
        return Err(domain(
            "reg_incomplete_gamma_upper",
            format!("need s > 0 and x >= 0, got ({s}, {x})"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let q = if x < s + 1.0 {
        1.0 - lower_series(s, x)
    } else {
        upper_continued_fraction(s, x)
    };
    Ok(q.clamp(0.0, 1.0))
}

/// P(s, x) by its power series; converges quickly for x < s + 1.
fn lower_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (s * x.ln() - x - lgamma(s)).exp()
}

/// Q(s, x) by the modified Lentz continued fraction; used for x ≥ s + 1.
fn upper_continued_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (s * x.ln() - x - lgamma(s)).exp() * h
}

/// Asymptotic Kolmogorov survival function P(K > t) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²t²}.
///
/// `t` is the KS statistic already scaled by √n. For t < 1 the equivalent
/// theta-function form of the CDF is summed instead, since the alternating
/// series needs many terms there.
pub fn kolmogorov_sf(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(domain("kolmogorov_sf", format!("argument must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if t < 1.0 {
        // K(t) = √(2π)/t Σ_{k≥1} exp(-(2k-1)² π² / (8t²))
        let mut cdf = 0.0;
        for k in 1..100 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * PI * PI / (8.0 * t * t)).exp();
            cdf += term;
            if term < 1e-17 {
                break;
            }
        }
        cdf *= (2.0 * PI).sqrt() / t;
        return Ok((1.0 - cdf).clamp(0.0, 1.0));
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < 1e-12 {
            break;
        }
    }
    Ok((2.0 * sum).clamp(0.0, 1.0))
}
