//! Outage capacity by Monte Carlo: iid Rayleigh channels, the LogDet
//! capacity of mode-driven transmissions, empirical quantiles, and the
//! power-allocation searches over the mode simplex.

mod allocation;
mod search;

pub use allocation::{
    best_truncation, equal_output_allocation, equalization_penalty_db, low_outage_allocation,
    low_outage_cdf_leading_term, LowOutageExponents, Truncation,
};
pub use search::{
    miso_grid_envelope, polytope_envelope_search, polytope_envelope_search_with, sample_simplex, write_trace_jsonl, CdfFamily, MisoEnvelope,
    SearchOptions, SearchOutcome, TraceEntry,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::logdet_hpd;
use crate::rng::{purpose, CounterRng, StreamKey};

/// Tolerance on `Σ λ_k = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Fractions of the total transmit power given to each mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PowerAllocation {
    lambdas: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::validation("allocation needs at least one mode"));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(Error::validation(format!("allocation entries must be finite and ≥ 0: {lambdas:?}")));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::validation(format!("allocation sums to {sum}, not 1")));
        }
        Ok(Self { lambdas })
    }

    /// Like [`new`](Self::new) but also requires `λ_1 ≥ λ_2 ≥ … ≥ λ_K`.
    pub fn new_ordered(lambdas: Vec<f64>) -> Result<Self> {
        let a = Self::new(lambdas)?;
        if !a.is_ordered() {
            return Err(Error::validation("ordered allocation must be non-increasing"));
        }
        Ok(a)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("allocation needs at least one mode"));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    /// All power on mode `mode` (0-based).
    pub fn vertex(k: usize, mode: usize) -> Result<Self> {
        if mode >= k {
            return Err(Error::validation(format!("mode {mode} out of range for {k} modes")));
        }
        let mut l = vec![0.0; k];
        l[mode] = 1.0;
        Self::new(l)
    }

    /// Beamforming: everything on the strongest mode.
    pub fn beamforming(k: usize) -> Result<Self> {
        Self::vertex(k, 0)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.lambdas.windows(2).all(|w| w[0] >= w[1])
    }
}

impl TryFrom<Vec<f64>> for PowerAllocation {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PowerAllocation> for Vec<f64> {
    fn from(a: PowerAllocation) -> Self {
        a.lambdas
    }
}

/// Transmit modes of strengths `ν_k` into `n_receive` uncorrelated antennas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoConfig {
    pub n_receive: usize,
    pub mode_strengths: Vec<f64>,
    pub snr_rho: f64,
    pub outage_q: f64,
}

impl MimoConfig {
    pub fn new(n_receive: usize, mode_strengths: Vec<f64>, snr_rho: f64, outage_q: f64) -> Result<Self> {
        let c = Self { n_receive, mode_strengths, snr_rho, outage_q };
        c.validate()?;
        Ok(c)
    }

    /// Mode strengths must be positive and non-increasing. Equal strengths
    /// are accepted so that symmetric cases can be posed.
    pub fn validate(&self) -> Result<()> {
        if self.n_receive == 0 {
            return Err(Error::validation("need at least one receive antenna"));
        }
        if self.mode_strengths.is_empty() {
            return Err(Error::validation("need at least one transmit mode"));
        }
        if self.mode_strengths.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::validation("mode strengths must be positive"));
        }
        if self.mode_strengths.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::validation("mode strengths must be sorted strongest first"));
        }
        if !(self.snr_rho > 0.0 && self.snr_rho.is_finite()) {
            return Err(Error::validation(format!("snr must be positive, got {}", self.snr_rho)));
        }
        if !(self.outage_q > 0.0 && self.outage_q < 1.0) {
            return Err(Error::validation(format!("outage level must lie in (0,1), got {}", self.outage_q)));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.mode_strengths.len()
    }

    /// The same system restricted to its strongest `k` modes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.modes() {
            return Err(Error::validation(format!("cannot keep {k} of {} modes", self.modes())));
        }
        Self::new(self.n_receive, self.mode_strengths[..k].to_vec(), self.snr_rho, self.outage_q)
    }

    /// Per-mode received power gains `ρ·ν_k·λ_k`.
    fn gains(&self, alloc: &PowerAllocation) -> Result<Vec<f64>> {
        if alloc.len() != self.modes() {
            return Err(Error::validation(format!(
                "allocation has {} entries for {} modes",
                alloc.len(),
                self.modes()
            )));
        }
        Ok(self.mode_strengths.iter().zip(alloc.lambdas()).map(|(&nu, &l)| self.snr_rho * nu * l).collect())
    }
}

/// An `n × K` channel, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_columns(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::validation("channel data does not match its shape"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.rows + row]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// iid unit-power complex Gaussian entries, drawn column by column so that
/// the leading columns do not depend on how many columns follow.
pub fn sample_h_iid(rows: usize, cols: usize, rng: &mut CounterRng) -> ChannelMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    fill_h_iid(&mut data, rows * cols, rng);
    ChannelMatrix { rows, cols, data }
}

fn fill_h_iid(out: &mut Vec<Complex64>, count: usize, rng: &mut CounterRng) {
    out.extend((0..count).map(|_| rng.complex_gaussian()));
}

/// `log₂ det(I + Σ_k g_k h_k h_k†)` for column-major `h` (`n × gains.len()`).
/// Modes with zero gain are skipped; the smaller of the two Sylvester forms
/// is factored.
pub(crate) fn capacity_bits(h: &[Complex64], n: usize, gains: &[f64]) -> f64 {
    let mut active = [0usize; 16];
    let mut active_vec = Vec::new();
    let act: &[usize] = if gains.len() <= active.len() {
        let mut m = 0;
        for (k, &g) in gains.iter().enumerate() {
            if g > 0.0 {
                active[m] = k;
                m += 1;
            }
        }
        &active[..m]
    } else {
        active_vec.extend(gains.iter().enumerate().filter(|(_, &g)| g > 0.0).map(|(k, _)| k));
        &active_vec
    };
    let m = act.len();
    if m == 0 {
        return 0.0;
    }
    let dim = m.min(n);
    let mut stack = [Complex64::new(0.0, 0.0); 64];
    let mut heap = Vec::new();
    let a: &mut [Complex64] = if dim * dim <= stack.len() {
        &mut stack[..dim * dim]
    } else {
        heap.resize(dim * dim, Complex64::new(0.0, 0.0));
        &mut heap
    };
    if m <= n {
        // I + D^{1/2} H_a† H_a D^{1/2}
        for (i, &ki) in act.iter().enumerate() {
            let si = gains[ki].sqrt();
            let ci = &h[ki * n..(ki + 1) * n];
            for (j, &kj) in act.iter().enumerate().take(i + 1) {
                let cj = &h[kj * n..(kj + 1) * n];
                let g: Complex64 = ci.iter().zip(cj).map(|(x, y)| x.conj() * y).sum();
                let v = g * (si * gains[kj].sqrt());
                a[i * dim + j] = v;
                a[j * dim + i] = v.conj();
            }
            a[i * dim + i] = Complex64::new(1.0 + a[i * dim + i].re, 0.0);
        }
    } else {
        // I + H_a D H_a†
        for r in 0..n {
            for c in 0..=r {
                let s: Complex64 = act.iter().map(|&k| h[k * n + r] * h[k * n + c].conj() * gains[k]).sum();
                a[r * dim + c] = s;
                a[c * dim + r] = s.conj();
            }
            a[r * dim + r] = Complex64::new(1.0 + a[r * dim + r].re, 0.0);
        }
    }
    match logdet_hpd(a, dim) {
        Some(l) => (l / std::f64::consts::LN_2).max(0.0),
        None => f64::NAN,
    }
}

/// Capacity in bits per symbol of one channel draw under `alloc`.
pub fn logdet_capacity(h: &ChannelMatrix, config: &MimoConfig, alloc: &PowerAllocation) -> Result<f64> {
    config.validate()?;
    if h.rows != config.n_receive || h.cols != config.modes() {
        return Err(Error::validation(format!(
            "channel is {}×{}, config expects {}×{}",
            h.rows,
            h.cols,
            config.n_receive,
            config.modes()
        )));
    }
    if h.data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::validation("channel has non-finite entries"));
    }
    let c = capacity_bits(&h.data, h.rows, &config.gains(alloc)?);
    if c.is_nan() {
        return Err(Error::NumericFailure { what: "LogDet factorization".into(), estimate: c });
    }
    Ok(c)
}

/// 0-based position of the lower empirical `q`-quantile: 1-based rank ⌈qN⌉.
pub fn quantile_index(q: f64, n: usize) -> usize {
    let x = q * n as f64;
    let r = x.round();
    // products such as 0.1·10⁴ may land a few ulps above an integer
    let rank = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    (rank as usize).clamp(1, n.max(1)) - 1
}

/// Capacity samples, one per channel draw, in draw order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityDistribution {
    pub samples: Vec<f64>,
    pub seed: u64,
    pub trial_count: usize,
}

impl CapacityDistribution {
    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut s = self.samples.clone();
        let i = quantile_index(q, s.len());
        *s.select_nth_unstable_by(i, f64::total_cmp).1
    }

    /// Standard error of the `q`-quantile from the order-statistic interval
    /// spanning one binomial standard deviation of rank on each side.
    pub fn quantile_standard_error(&self, q: f64) -> f64 {
        let s = self.sorted();
        order_statistic_se(&s, q)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Samples as CSV, one per row.
    pub fn write_samples_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["capacity_bits"])?;
        for s in &self.samples {
            w.write_record([s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Empirical CDF: `(capacity, P(C ≤ capacity))` at every sorted sample.
    pub fn write_cdf_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let s = self.sorted();
        let n = s.len() as f64;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["capacity_bits", "cumulative_probability"])?;
        for (i, c) in s.iter().enumerate() {
            w.write_record([c.to_string(), ((i + 1) as f64 / n).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn order_statistic_se(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let i = quantile_index(q, n);
    let d = ((n as f64 * q * (1.0 - q)).sqrt().ceil() as usize).max(1);
    let lo = i.saturating_sub(d);
    let hi = (i + d).min(n - 1);
    0.5 * (sorted[hi] - sorted[lo])
}

/// Where a family of channel draws comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DrawSource {
    pub seed: u64,
    pub purpose: u64,
    pub block: u64,
}

impl DrawSource {
    pub fn channel(seed: u64, block: u64) -> Self {
        Self { seed, purpose: purpose::CHANNEL, block }
    }

    pub fn holdout(seed: u64) -> Self {
        Self { seed, purpose: purpose::HOLDOUT, block: 0 }
    }

    pub fn rng(&self, trial: u64) -> CounterRng {
        StreamKey::new(self.seed, self.purpose, self.block, trial).rng()
    }

    /// All draws of a round, concatenated column-major per trial.
    pub fn materialize(&self, trials: usize, n: usize, k: usize) -> Vec<Complex64> {
        let per = n * k;
        let chunks: Vec<Vec<Complex64>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut v = Vec::with_capacity(per);
                fill_h_iid(&mut v, per, &mut self.rng(t));
                v
            })
            .collect();
        chunks.concat()
    }
}

pub(crate) fn distribution_from(
    config: &MimoConfig,
    alloc: &PowerAllocation,
    trials: usize,
    src: DrawSource,
) -> Result<CapacityDistribution> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let gains = config.gains(alloc)?;
    let (n, k) = (config.n_receive, config.modes());
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n * k),
            |buf, t| {
                buf.clear();
                fill_h_iid(buf, n * k, &mut src.rng(t));
                capacity_bits(buf, n, &gains)
            },
        )
        .collect();
    if samples.iter().any(|c| c.is_nan()) {
        return Err(Error::NumericFailure { what: "LogDet factorization".into(), estimate: f64::NAN });
    }
    Ok(CapacityDistribution { samples, seed: src.seed, trial_count: trials })
}

/// `trials` independent channel draws scored under `alloc`. Draw `t` comes
/// from its own keyed stream, so the result does not depend on scheduling.
pub fn capacity_distribution(
    config: &MimoConfig,
    alloc: &PowerAllocation,
    trials: usize,
    seed: u64,
) -> Result<CapacityDistribution> {
    distribution_from(config, alloc, trials, DrawSource::channel(seed, 0))
}

/// Like [`capacity_distribution`] but on the held-out draws used to re-score
/// search winners.
pub fn holdout_distribution(
    config: &MimoConfig,
    alloc: &PowerAllocation,
    trials: usize,
    seed: u64,
) -> Result<CapacityDistribution> {
    distribution_from(config, alloc, trials, DrawSource::holdout(seed))
}
