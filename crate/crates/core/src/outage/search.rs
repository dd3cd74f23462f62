//! Envelope searches over power allocations: the exhaustive two-mode grid
//! and the shrinking-polytope random search for K modes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    capacity_bits, distribution_from, quantile_index, DrawSource, MimoConfig, PowerAllocation,
};
use crate::error::{Error, Result};
use crate::rng::{purpose, CounterRng, StreamKey};

/// Uniform point on the simplex from the gaps of `K − 1` sorted uniforms;
/// `ordered` sorts it descending, which is uniform on the ordered polytope.
pub fn sample_simplex(k: usize, rng: &mut CounterRng, ordered: bool) -> Result<PowerAllocation> {
    if k == 0 {
        return Err(Error::validation("simplex needs at least one mode"));
    }
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.uniform()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut lambdas = Vec::with_capacity(k);
    let mut prev = 0.0;
    for &c in &cuts {
        lambdas.push(c - prev);
        prev = c;
    }
    lambdas.push(1.0 - prev);
    if ordered {
        lambdas.sort_by(|a, b| b.total_cmp(a));
    }
    PowerAllocation::new(lambdas)
}

/// Per-candidate samples over a shared set of materialized draws.
fn score(draws: &[Complex64], n: usize, k: usize, gains: &[f64]) -> Vec<f64> {
    draws.chunks_exact(n * k).map(|h| capacity_bits(h, n, gains)).collect()
}


fn quantile_of(mut samples: Vec<f64>, q: f64) -> Result<f64> {
    if samples.iter().any(|c| c.is_nan()) {
        return Err(Error::NumericFailure { what: "LogDet factorization".into(), estimate: f64::NAN });
    }
    let i = quantile_index(q, samples.len());
    Ok(*samples.select_nth_unstable_by(i, f64::total_cmp).1)
}

fn gains_of(config: &MimoConfig, alloc: &PowerAllocation) -> Vec<f64> {
    config
        .mode_strengths
        .iter()
        .zip(alloc.lambdas())
        .map(|(&nu, &l)| config.snr_rho * nu * l)
        .collect()
}

/// Sorted capacity samples of each candidate, read at a common grid of
/// cumulative probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfFamily {
    /// Power fraction on the strongest mode, per candidate.
    pub splits: Vec<f64>,
    pub levels: Vec<f64>,
    /// `values[c][i]`: capacity of candidate `c` at `levels[i]`.
    pub values: Vec<Vec<f64>>,
    /// Best candidate value at each level.
    pub envelope: Vec<f64>,
}

impl CdfFamily {
    /// Columns: `cumulative_probability`, `split_<λ1>` per candidate, `envelope`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["cumulative_probability".to_string()];
        header.extend(self.splits.iter().map(|s| format!("split_{s:.4}_bits")));
        header.push("envelope_bits".into());
        w.write_record(&header)?;
        for (i, p) in self.levels.iter().enumerate() {
            let mut rec = vec![p.to_string()];
            rec.extend(self.values.iter().map(|v| v[i].to_string()));
            rec.push(self.envelope[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisoEnvelope {
    pub best: PowerAllocation,
    pub best_quantile: f64,
    /// `(λ1, q-quantile)` for every grid split.
    pub candidates: Vec<(f64, f64)>,
    pub family: CdfFamily,
}

impl MisoEnvelope {
    /// Quantile of the candidate whose strongest-mode share is `split`.
    pub fn quantile_at(&self, split: f64) -> Option<f64> {
        self.candidates.iter().find(|(s, _)| (s - split).abs() < 1e-12).map(|c| c.1)
    }
}

/// Every two-mode split at `gradation` scored on common draws; the best
/// split at the configured outage wins, ties going to the more balanced one.
pub fn miso_grid_envelope(config: &MimoConfig, gradation: f64, trials: usize, seed: u64) -> Result<MisoEnvelope> {
    config.validate()?;
    if config.modes() != 2 {
        return Err(Error::validation("grid envelope is defined for two modes"));
    }
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    if !(gradation > 0.0 && gradation <= 1.0) {
        return Err(Error::validation("gradation must lie in (0, 1]"));
    }
    let steps = (1.0 / gradation).round() as usize;
    if (steps as f64 * gradation - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!("gradation {gradation} does not divide 1")));
    }
    let n = config.n_receive;
    let draws = DrawSource::channel(seed, 0).materialize(trials, n, 2);
    let splits: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let levels: Vec<f64> = (1..=1000).map(|i| i as f64 / 1000.0).collect();
    let q = config.outage_q;
    let scored: Vec<(f64, Vec<f64>)> = splits
        .par_iter()
        .map(|&s| -> Result<(f64, Vec<f64>)> {
            let alloc = PowerAllocation::new(vec![s, 1.0 - s])?;
            let mut v = score(&draws, n, 2, &gains_of(config, &alloc));
            if v.iter().any(|c| c.is_nan()) {
                return Err(Error::NumericFailure { what: "LogDet factorization".into(), estimate: f64::NAN });
            }
            v.sort_by(f64::total_cmp);
            let curve = levels.iter().map(|&p| v[quantile_index(p, v.len())]).collect();
            Ok((v[quantile_index(q, v.len())], curve))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (qv, _)) in scored.iter().enumerate() {
        let (bq, bs) = (scored[best].0, splits[best]);
        if *qv > bq || (*qv == bq && (splits[i] - 0.5).abs() < (bs - 0.5).abs()) {
            best = i;
        }
    }
    let values: Vec<Vec<f64>> = scored.iter().map(|s| s.1.clone()).collect();
    let envelope = (0..levels.len())
        .map(|i| values.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(MisoEnvelope {
        best: PowerAllocation::new(vec![splits[best], 1.0 - splits[best]])?,
        best_quantile: scored[best].0,
        candidates: splits.iter().zip(&scored).map(|(&s, r)| (s, r.0)).collect(),
        family: CdfFamily { splits, levels, values, envelope },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Fresh candidates per round.
    pub candidates: usize,
    /// Channel draws per round, shared by all candidates of the round.
    pub trials: usize,
    pub rounds: usize,
    /// Weight of the fresh simplex point in the blend around the incumbent.
    pub shrink: f64,
    /// Draws used to re-score the winner.
    pub holdout_trials: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { candidates: 1000, trials: 10_000, rounds: 3, shrink: 0.3, holdout_trials: 100_000, seed: 1 }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.candidates == 0 || self.rounds == 0 || self.trials == 0 || self.holdout_trials == 0 {
            return Err(Error::validation("candidates, rounds and trial counts must be ≥ 1"));
        }
        if !(self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(Error::validation("shrink must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub round: usize,
    pub candidate: usize,
    pub allocation: Vec<f64>,
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: PowerAllocation,
    /// Winner's quantile on the final round's draws (biased upward by selection).
    pub search_quantile: f64,
    /// Winner's quantile on held-out draws.
    pub quantile: f64,
    pub trace: Vec<TraceEntry>,
}

/// Random search over the ordered simplex in shrinking neighborhoods of the
/// incumbent. Each round scores the beamforming vertex, the incumbent and
/// `candidates` fresh points on one shared set of draws; the round's best
/// becomes the incumbent. The final winner is re-scored on held-out draws.
pub fn polytope_envelope_search(config: &MimoConfig, opts: &SearchOptions) -> Result<SearchOutcome> {
    polytope_envelope_search_with(config, opts, &[])
}

/// [`polytope_envelope_search`] with extra allocations scored in every
/// round alongside the beamforming vertex and the incumbent.
pub fn polytope_envelope_search_with(
    config: &MimoConfig,
    opts: &SearchOptions,
    anchors: &[PowerAllocation],
) -> Result<SearchOutcome> {
    config.validate()?;
    if anchors.iter().any(|a| a.len() != config.modes()) {
        return Err(Error::validation("anchor allocation length differs from the mode count"));
    }
    opts.validate()?;
    let k = config.modes();
    let n = config.n_receive;
    let q = config.outage_q;
    if k == 1 {
        let best = PowerAllocation::new(vec![1.0])?;
        let d = distribution_from(config, &best, opts.holdout_trials, DrawSource::holdout(opts.seed))?;
        let v = d.quantile(q);
        return Ok(SearchOutcome { best, search_quantile: v, quantile: v, trace: Vec::new() });
    }
    let mut incumbent: Option<PowerAllocation> = None;
    let mut incumbent_q = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    for round in 0..opts.rounds {
        let draws = DrawSource::channel(opts.seed, round as u64).materialize(opts.trials, n, k);
        let mut pool = vec![PowerAllocation::beamforming(k)?];
        if let Some(inc) = &incumbent {
            pool.push(inc.clone());
        }
        pool.extend(anchors.iter().cloned());
        let fresh: Vec<PowerAllocation> = (0..opts.candidates as u64)
            .map(|c| {
                let mut rng = StreamKey::new(opts.seed, purpose::CANDIDATE, round as u64, c).rng();
                let p = sample_simplex(k, &mut rng, true)?;
                match &incumbent {
                    None => Ok(p),
                    Some(inc) => {
                        let mut l: Vec<f64> = inc
                            .lambdas()
                            .iter()
                            .zip(p.lambdas())
                            .map(|(a, b)| (1.0 - opts.shrink) * a + opts.shrink * b)
                            .collect();
                        l.sort_by(|a, b| b.total_cmp(a));
                        PowerAllocation::new(l)
                    }
                }
            })
            .collect::<Result<_>>()?;
        pool.extend(fresh);
        let scores: Vec<f64> = pool
            .par_iter()
            .map(|a| quantile_of(score(&draws, n, k, &gains_of(config, a)), q))
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        for (i, (a, &s)) in pool.iter().zip(&scores).enumerate() {
            trace.push(TraceEntry { round, candidate: i, allocation: a.lambdas().to_vec(), quantile: s });
        }
        incumbent = Some(pool.swap_remove(best));
        incumbent_q = scores[best];
    }
    let best = incumbent.expect("at least one round");
    let held = distribution_from(config, &best, opts.holdout_trials, DrawSource::holdout(opts.seed))?;
    Ok(SearchOutcome { quantile: held.quantile(q), best, search_quantile: incumbent_q, trace })
}

/// Search trace as JSON lines.
pub fn write_trace_jsonl<W: std::io::Write>(trace: &[TraceEntry], mut out: W) -> Result<()> {
    for e in trace {
        let line = serde_json::to_string(e).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}
