//! Closed-form allocations: equal received power per mode, and the
//! low-outage optimum from the small-argument behavior of the mode densities.

use serde::{Deserialize, Serialize};

use super::{distribution_from, DrawSource, MimoConfig, PowerAllocation};
use crate::error::{Error, Result};

/// Drive the top `k_active` modes with power ∝ 1/ν_k so each radiates the same.
pub fn equal_output_allocation(mode_strengths: &[f64], k_active: usize) -> Result<PowerAllocation> {
    if k_active == 0 || k_active > mode_strengths.len() {
        return Err(Error::validation(format!(
            "cannot activate {k_active} of {} modes",
            mode_strengths.len()
        )));
    }
    if mode_strengths.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::validation("mode strengths must be positive"));
    }
    let total: f64 = mode_strengths[..k_active].iter().map(|v| 1.0 / v).sum();
    let mut l: Vec<f64> = mode_strengths[..k_active].iter().map(|v| (1.0 / v) / total).collect();
    l.resize(mode_strengths.len(), 0.0);
    PowerAllocation::new(l)
}

/// Extra power, in dB, that equalizing the modes costs relative to the
/// average mode: `10·log₁₀(⟨ν⟩·⟨1/ν⟩)`.
pub fn equalization_penalty_db(mode_strengths: &[f64]) -> Result<f64> {
    if mode_strengths.is_empty() || mode_strengths.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::validation("mode strengths must be positive"));
    }
    let k = mode_strengths.len() as f64;
    let avg = mode_strengths.iter().sum::<f64>() / k;
    let avg_inv = mode_strengths.iter().map(|v| 1.0 / v).sum::<f64>() / k;
    Ok((10.0 * (avg * avg_inv).log10()).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub k_active: usize,
    pub allocation: PowerAllocation,
    pub quantile: f64,
    /// Quantile for each `k_active = 1..=K`.
    pub sweep: Vec<f64>,
}

/// Number of equal-output modes maximizing the outage quantile, every
/// truncation scored on the same draws.
pub fn best_truncation(config: &MimoConfig, trials: usize, seed: u64) -> Result<Truncation> {
    config.validate()?;
    let src = DrawSource::channel(seed, 0);
    let mut sweep = Vec::with_capacity(config.modes());
    for k in 1..=config.modes() {
        let a = equal_output_allocation(&config.mode_strengths, k)?;
        sweep.push(distribution_from(config, &a, trials, src)?.quantile(config.outage_q));
    }
    let mut best = 0;
    for (i, &v) in sweep.iter().enumerate() {
        if v > sweep[best] {
            best = i;
        }
    }
    Ok(Truncation {
        k_active: best + 1,
        allocation: equal_output_allocation(&config.mode_strengths, best + 1)?,
        quantile: sweep[best],
        sweep,
    })
}

/// Lowest-order exponents `l_k` of the mode densities near zero
/// (`p_k(x) ∝ x^{l_k}`); exponential variates have `l_k = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowOutageExponents {
    pub l: Vec<u32>,
}

impl LowOutageExponents {
    pub fn new(l: Vec<u32>) -> Result<Self> {
        if l.is_empty() {
            return Err(Error::validation("need at least one mode"));
        }
        Ok(Self { l })
    }

    pub fn exponential(k: usize) -> Result<Self> {
        Self::new(vec![0; k])
    }
}

/// `λ_k = (1 + l_k)/(K + Σ l_j)`.
pub fn low_outage_allocation(exponents: &LowOutageExponents) -> Result<PowerAllocation> {
    let k = exponents.l.len();
    if k == 0 {
        return Err(Error::validation("need at least one mode"));
    }
    let denom = k as f64 + exponents.l.iter().map(|&l| l as f64).sum::<f64>();
    PowerAllocation::new(exponents.l.iter().map(|&l| (1.0 + l as f64) / denom).collect())
}

/// Leading small-τ term of `P(Σ a_k E_k < τ)` for unit exponentials `E_k`
/// and `a_k = ν_k λ_k`: `τ^K/(K!·Π a_k)`, over modes with `a_k > 0`.
/// Accurate only for `τ ≪ min a_k`.
pub fn low_outage_cdf_leading_term(mode_strengths: &[f64], alloc: &PowerAllocation, tau: f64) -> Result<f64> {
    if mode_strengths.len() != alloc.len() {
        return Err(Error::validation("allocation and mode strengths differ in length"));
    }
    if !(tau >= 0.0) {
        return Err(Error::validation("τ must be non-negative"));
    }
    let mut value = 1.0;
    let mut k = 0;
    for (&nu, &l) in mode_strengths.iter().zip(alloc.lambdas()) {
        let a = nu * l;
        if a > 0.0 {
            k += 1;
            value *= tau / (a * k as f64);
        }
    }
    Ok(value)
}
