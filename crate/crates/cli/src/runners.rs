//! One runner per experiment. Each returns typed results plus the files it
//! would write; nothing here touches the filesystem.


use bfmimo_core::apod::{
    mode_beam_pattern, spectrum_sweep, write_eigenvectors_csv, write_spectrum_csv, ApodSpectrum, ArrayLayout,
    PhysicalBinding, SpectrumTable, SweepKind,
};
use bfmimo_core::outage::{
    equal_output_allocation, holdout_distribution, miso_grid_envelope, polytope_envelope_search_with, MisoEnvelope,
};
use bfmimo_core::propagation::{
    correlation_asymptotic, correlation_numeric, pas_exponential_vs_lorentz, AngularSpreadSpec, AsymptoticForm,
};
use bfmimo_core::units::{db_to_linear, deg_to_rad, linear_to_db, rad_to_deg};
use bfmimo_core::{CorrelationKernel, MimoConfig, PowerAllocation};
use serde::{Deserialize, Serialize};

use crate::config::{ApertureUnit, McBudget, ScenarioConfig};
use crate::error::{CliError, CliResult};

/// A named output and its exact bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    fn json<T: Serialize>(name: &str, value: &T) -> CliResult<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self { name: name.into(), bytes })
    }

    fn csv(name: &str, write: impl FnOnce(&mut Vec<u8>) -> bfmimo_core::Result<()>) -> CliResult<Self> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        Ok(Self { name: name.into(), bytes })
    }
}

/// Plain numeric table written as CSV with a header row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    fn to_file(&self, name: &str) -> OutputFile {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| if v.is_nan() { String::new() } else { v.to_string() }).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        OutputFile { name: name.into(), bytes: s.into_bytes() }
    }
}

/// Spectrum of `count` antennas over `decorrelations` decorrelation lengths.
pub fn abstract_spectrum(count: usize, decorrelations: f64) -> CliResult<Vec<f64>> {
    let kernel = CorrelationKernel::broadside(1.0)?;
    let layout = ArrayLayout::in_decorrelations(count, decorrelations, &kernel)?;
    Ok(ApodSpectrum::compute(&kernel, &layout)?.eigenvalues().to_vec())
}

/// Optimized `(m, n)` MIMO against `(1, n)` beamforming at one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub mode_strengths: Vec<f64>,
    pub mimo_bits: f64,
    pub bf_bits: f64,
    /// Equal-output allocation over the same modes.
    pub lower_bound_bits: f64,
    pub gain_pct: f64,
    pub allocation: Vec<f64>,
}

/// Searches the allocation of the top `m` modes, then scores the winner,
/// the equal-output allocation and beamforming on one held-out draw set.
/// The reported optimum is the better of the first two, since both belong
/// to the enveloped family.
pub fn compare_point(
    spectrum: &[f64],
    shape: (usize, usize),
    snr_rho: f64,
    outage_q: f64,
    budget: &McBudget,
) -> CliResult<PointResult> {
    let m = shape.0.min(spectrum.len());
    let config = MimoConfig::new(shape.1, spectrum[..m].to_vec(), snr_rho, outage_q)?;
    let opts = budget.search_options();
    let bf_alloc = PowerAllocation::beamforming(m)?;
    let bf = holdout_distribution(&config, &bf_alloc, opts.holdout_trials, opts.seed)?.quantile(outage_q);
    let eq_alloc = equal_output_allocation(&config.mode_strengths, m)?;
    let lower = holdout_distribution(&config, &eq_alloc, opts.holdout_trials, opts.seed)?.quantile(outage_q);
    let search = polytope_envelope_search_with(&config, &opts, std::slice::from_ref(&eq_alloc))?;
    let (mimo, allocation) = if lower > search.quantile {
        (lower, eq_alloc.lambdas().to_vec())
    } else {
        (search.quantile, search.best.lambdas().to_vec())
    };
    Ok(PointResult {
        mode_strengths: config.mode_strengths.clone(),
        mimo_bits: mimo,
        bf_bits: bf,
        lower_bound_bits: lower,
        gain_pct: 100.0 * (mimo / bf - 1.0),
        allocation,
    })
}

// ---------------------------------------------------------------- spectra

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRun {
    pub figure: u8,
    pub table: SpectrumTable,
}

/// Spectrum sweeps of figures 4–7 and 9. `physical` binds the abstract
/// sweeps to the configured carrier and spread so that λ/2 caps apply.
pub fn run_fig_spectrum(figure: u8, physical: bool, config: &ScenarioConfig) -> CliResult<SpectrumRun> {
    let r = config.resolved()?;
    let kind = match figure {
        4 => SweepKind::fig4(),
        5 => SweepKind::fig5(),
        6 => SweepKind::fig6(),
        7 => SweepKind::fig7(),
        9 => {
            if physical {
                return Err(CliError::Validation(
                    "--physical conflicts with figure 9, whose array is already physical".into(),
                ));
            }
            let antennas = match config.antennas {
                crate::config::Antennas::Count(k) => k,
                crate::config::Antennas::Packing(_) => 18,
            };
            match SweepKind::fig9() {
                SweepKind::FixedPhysicalApertureVarySpread { spreads_deg, .. } => {
                    SweepKind::FixedPhysicalApertureVarySpread {
                        antennas,
                        carrier_frequency: r.carrier_frequency,
                        spreads_deg,
                    }
                }
                other => other,
            }
        }
        f => return Err(CliError::Validation(format!("figure {f} has no spectrum sweep (choose 4, 5, 6, 7 or 9)"))),
    };
    let binding = physical.then(|| PhysicalBinding {
        carrier_frequency: r.carrier_frequency,
        spread_3db_deg: config.spread_deg,
    });
    Ok(SpectrumRun { figure, table: spectrum_sweep(&kind, binding)? })
}

impl SpectrumRun {
    pub fn files(&self) -> CliResult<Vec<OutputFile>> {
        let name = format!("fig{}_spectrum.csv", self.figure);
        Ok(vec![OutputFile::csv(&name, |b| write_spectrum_csv(&self.table, b))?])
    }
}

/// Eigenvectors and eigenvalue-scaled beam patterns of the configured array.
#[derive(Debug, Clone)]
pub struct ModesRun {
    pub spectrum: ApodSpectrum,
    pub ky: Vec<f64>,
    pub patterns: Vec<Vec<f64>>,
}

pub fn run_modes(config: &ScenarioConfig, modes: usize) -> CliResult<ModesRun> {
    let kernel = config.kernel()?;
    let spectrum = ApodSpectrum::compute(&kernel, &config.layout()?)?;
    let k = bfmimo_core::units::wavenumber(config.carrier_ghz * 1e9);
    let ky: Vec<f64> = (0..=400).map(|i| -k + 2.0 * k * i as f64 / 400.0).collect();
    let patterns = (0..modes.min(spectrum.len()))
        .map(|m| mode_beam_pattern(&spectrum, m, &ky))
        .collect::<bfmimo_core::Result<_>>()?;
    Ok(ModesRun { spectrum, ky, patterns })
}

impl ModesRun {
    pub fn files(&self) -> CliResult<Vec<OutputFile>> {
        let mut header = vec!["ky_per_m".to_string()];
        header.extend((1..=self.patterns.len()).map(|m| format!("mode_{m}_power")));
        let rows = self
            .ky
            .iter()
            .enumerate()
            .map(|(i, &ky)| std::iter::once(ky).chain(self.patterns.iter().map(|p| p[i])).collect())
            .collect();
        Ok(vec![
            OutputFile::csv("fig3_modes.csv", |b| write_eigenvectors_csv(&self.spectrum, b))?,
            Table { header, rows }.to_file("fig3_patterns.csv"),
        ])
    }
}

// ---------------------------------------------------------------- envelope

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig8Summary {
    pub mode_strengths: [f64; 2],
    pub outage_q: f64,
    pub trials: usize,
    pub gradation: f64,
    pub seed: u64,
    pub optimum_split: f64,
    pub optimum_bits: f64,
    pub strongest_only_bits: f64,
    pub weaker_only_bits: f64,
    pub even_split_bits: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Fig8Run {
    pub summary: Fig8Summary,
    pub envelope: MisoEnvelope,
}

/// Two-mode MISO enveloping on the strongest modes of 18 antennas over six
/// decorrelation lengths.
pub fn run_fig8(config: &ScenarioConfig) -> CliResult<Fig8Run> {
    config.validate()?;
    let nu = abstract_spectrum(18, 6.0)?;
    let mimo = MimoConfig::new(1, nu[..2].to_vec(), config.resolved()?.snr_rho, config.outage_q)?;
    let env = miso_grid_envelope(&mimo, config.envelope.gradation, config.envelope.trials, config.mc.seed)?;
    let pick = |s: f64| env.quantile_at(s);
    let summary = Fig8Summary {
        mode_strengths: [nu[0], nu[1]],
        outage_q: config.outage_q,
        trials: config.envelope.trials,
        gradation: config.envelope.gradation,
        seed: config.mc.seed,
        optimum_split: env.best.lambdas()[0],
        optimum_bits: env.best_quantile,
        strongest_only_bits: pick(1.0).unwrap_or(f64::NAN),
        weaker_only_bits: pick(0.0).unwrap_or(f64::NAN),
        even_split_bits: pick(0.5),
    };
    Ok(Fig8Run { summary, envelope: env })
}

impl Fig8Run {
    pub fn files(&self) -> CliResult<Vec<OutputFile>> {
        let envelope = Table {
            header: vec!["split_strongest".into(), "quantile_bits".into()],
            rows: self.envelope.candidates.iter().map(|&(s, q)| vec![s, q]).collect(),
        };
        Ok(vec![
            OutputFile::csv("fig8_cdf_family.csv", |b| self.envelope.family.write_csv(b))?,
            envelope.to_file("fig8_envelope.csv"),
            OutputFile::json("fig8_summary.json", &self.summary)?,
        ])
    }
}

// ---------------------------------------------------------------- capacity sweeps

fn point_header(abscissa: &[&str]) -> Vec<String> {
    abscissa
        .iter()
        .map(|s| s.to_string())
        .chain(["antennas", "mimo_bits", "bf_bits", "lower_bound_bits", "gain_pct"].map(String::from))
        .collect()
}

/// MIMO against BF across angular spread for the fixed physical array of
/// figure 9 (the configured antenna count, or 18, at λ/2).
pub fn run_capacity_vs_spread(config: &ScenarioConfig) -> CliResult<Table> {
    let r = config.resolved()?;
    let antennas = match config.antennas {
        crate::config::Antennas::Count(k) => k,
        crate::config::Antennas::Packing(_) => 18,
    };
    let spreads = match SweepKind::fig9() {
        SweepKind::FixedPhysicalApertureVarySpread { spreads_deg, .. } => spreads_deg,
        _ => unreachable!("figure 9 sweeps spread"),
    };
    let kind = SweepKind::FixedPhysicalApertureVarySpread {
        antennas,
        carrier_frequency: r.carrier_frequency,
        spreads_deg: spreads,
    };
    let table = spectrum_sweep(&kind, None)?;
    let mut rows = Vec::new();
    for row in &table.rows {
        let p = compare_point(&row.eigenvalues, config.mimo_shape, r.snr_rho, config.outage_q, &config.mc)?;
        rows.push(vec![row.abscissa, antennas as f64, p.mimo_bits, p.bf_bits, p.lower_bound_bits, p.gain_pct]);
    }
    Ok(Table { header: point_header(&["spread_deg"]), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DecorrPacking {
    /// 18 antennas per decorrelation length (2° at 2 GHz), 1..30 lengths.
    HalfLambda,
    /// 4.5 antennas per decorrelation length (8° at 2 GHz), from 8/9 length.
    Per8degDensity,
}

/// Aperture grid `(decorrelations, antennas)` of each packing.
pub fn decorrelation_grid(packing: DecorrPacking) -> Vec<(f64, usize)> {
    match packing {
        DecorrPacking::HalfLambda => (1..=30).map(|l| (l as f64, 18 * l)).collect(),
        DecorrPacking::Per8degDensity => std::iter::once(8.0 / 9.0)
            .chain((1..=30).map(f64::from))
            .map(|l| (l, (4.5 * l + 1e-9).floor() as usize))
            .collect(),
    }
}

pub fn run_capacity_vs_decorrelations(config: &ScenarioConfig, packing: DecorrPacking) -> CliResult<Table> {
    let r = config.resolved()?;
    let mut rows = Vec::new();
    for (l, k) in decorrelation_grid(packing) {
        let nu = abstract_spectrum(k, l)?;
        let p = compare_point(&nu, config.mimo_shape, r.snr_rho, config.outage_q, &config.mc)?;
        rows.push(vec![l, k as f64, p.mimo_bits, p.bf_bits, p.lower_bound_bits, p.gain_pct]);
    }
    Ok(Table { header: point_header(&["aperture_decorrelations"]), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SnrPreset {
    /// 2°, one decorrelation length, 18 antennas; (4,n) and (2,n).
    Fig12,
    /// 6 antennas per decorrelation: 3 lengths (2 GHz) and 7.5 lengths (5 GHz).
    Fig13,
    /// 8°: 2, 4 and 8 decorrelation lengths at 4.5 antennas per length.
    Fig15,
}

struct SnrSeries {
    label: &'static str,
    antennas: usize,
    decorrelations: f64,
}

impl SnrPreset {
    fn series(self) -> (Vec<SnrSeries>, Vec<usize>) {
        let s = |label, antennas, decorrelations| SnrSeries { label, antennas, decorrelations };
        match self {
            SnrPreset::Fig12 => (vec![s("l1", 18, 1.0)], vec![4, 2]),
            SnrPreset::Fig13 => (vec![s("f2ghz", 18, 3.0), s("f5ghz", 45, 7.5)], vec![4]),
            SnrPreset::Fig15 => (vec![s("l2", 9, 2.0), s("l4", 18, 4.0), s("l8", 36, 8.0)], vec![4]),
        }
    }
}

/// SNR grid of the capacity-versus-SNR figures, dB.
pub fn snr_grid_db() -> Vec<f64> {
    (0..10).map(|i| -6.0 + 3.0 * i as f64).collect()
}

/// Outage capacity versus SNR for each aperture of the preset: BF, the
/// optimized MIMO orders and their gains, plus a single omni transmitter.
pub fn run_capacity_vs_snr(config: &ScenarioConfig, preset: SnrPreset) -> CliResult<Table> {
    config.validate()?;
    let n = config.mimo_shape.1;
    let (series, orders) = preset.series();
    let spectra: Vec<Vec<f64>> =
        series.iter().map(|s| abstract_spectrum(s.antennas, s.decorrelations)).collect::<CliResult<_>>()?;
    let mut header = vec!["snr_db".to_string()];
    for s in &series {
        header.push(format!("{}_bf_1x{n}_bits", s.label));
        for m in &orders {
            header.push(format!("{}_mimo_{m}x{n}_bits", s.label));
            header.push(format!("{}_mimo_{m}x{n}_gain_pct", s.label));
        }
    }
    header.push(format!("omni_1x{n}_bits"));
    let mut rows = Vec::new();
    for snr_db in snr_grid_db() {
        let rho = db_to_linear(snr_db);
        let mut row = vec![snr_db];
        for nu in &spectra {
            let bf = compare_point(nu, (1, n), rho, config.outage_q, &config.mc)?.bf_bits;
            row.push(bf);
            for &m in &orders {
                let p = compare_point(nu, (m, n), rho, config.outage_q, &config.mc)?;
                row.push(p.mimo_bits);
                row.push(p.gain_pct);
            }
        }
        let omni = MimoConfig::new(n, vec![1.0], rho, config.outage_q)?;
        let d = holdout_distribution(&omni, &PowerAllocation::beamforming(1)?, config.mc.holdout_trials, config.mc.seed)?;
        row.push(d.quantile(config.outage_q));
        rows.push(row);
    }
    Ok(Table { header, rows })
}

// ---------------------------------------------------------------- headline

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlinePoint {
    pub aperture_decorrelations: f64,
    pub aperture_m: f64,
    /// Length quoted for this aperture at 8° and 2 GHz, 0.42 m per
    /// decorrelation length.
    pub nominal_label: String,
    pub antennas: usize,
    pub result: PointResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub spread_deg: f64,
    pub carrier_ghz: f64,
    pub snr_db: f64,
    pub outage_q: f64,
    pub mimo_shape: (usize, usize),
    pub budget: McBudget,
    pub points: Vec<HeadlinePoint>,
}

/// `(m, n)` MIMO and `(1, n)` BF on the configured aperture and on twice
/// that aperture, with as many antennas as λ/2 allows, at the full budget.
pub fn run_headline(config: &ScenarioConfig) -> CliResult<Headline> {
    let r = config.resolved()?;
    let kernel = config.kernel()?;
    let mut points = Vec::new();
    for factor in [1.0, 2.0] {
        let mut c = config.clone();
        c.aperture.value *= factor;
        let layout = c.layout()?;
        let spectrum = ApodSpectrum::compute(&kernel.normalized(), &layout)?;
        let result = compare_point(spectrum.eigenvalues(), c.mimo_shape, r.snr_rho, c.outage_q, &c.headline_mc)?;
        let decorrelations = layout.aperture() / kernel.decorrelation_distance();
        points.push(HeadlinePoint {
            aperture_decorrelations: decorrelations,
            aperture_m: layout.aperture(),
            nominal_label: match c.aperture.unit {
                ApertureUnit::Decorrelations => format!("{:.2} m", 0.42 * decorrelations),
                ApertureUnit::Meters => format!("{:.2} m", layout.aperture()),
            },
            antennas: layout.antenna_count(),
            result,
        });
    }
    Ok(Headline {
        spread_deg: config.spread_deg,
        carrier_ghz: config.carrier_ghz,
        snr_db: config.snr_db,
        outage_q: config.outage_q,
        mimo_shape: config.mimo_shape,
        budget: config.headline_mc,
        points,
    })
}

// ---------------------------------------------------------------- propagation

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRun {
    pub correlation: Table,
    pub pas: Table,
}

/// Correlation magnitude versus base separation (numeric, K0 and
/// exponential forms) and the two angular spectrum shapes.
pub fn run_propagation(config: &ScenarioConfig) -> CliResult<PropagationRun> {
    let geom = config.link_geometry()?;
    let span = 5.0 / geom.alpha();
    let mut rows = Vec::new();
    for i in 0..=120 {
        let rd = span * i as f64 / 120.0;
        let numeric = correlation_numeric(&geom, rd)?.value.norm();
        let k0 = if rd > 0.0 {
            correlation_asymptotic(&geom, rd, AsymptoticForm::BesselK0)?.norm()
        } else {
            f64::NAN
        };
        let exp = correlation_asymptotic(&geom, rd, AsymptoticForm::Exponential)?.norm();
        rows.push(vec![rd, numeric, linear_to_db(numeric), k0, exp]);
    }
    let correlation = Table {
        header: ["separation_m", "numeric", "numeric_db", "k0_asymptote", "exponential"].map(String::from).to_vec(),
        rows,
    };
    let spread = AngularSpreadSpec::from_3db(deg_to_rad(config.spread_deg))?;
    let limit = (10.0 * config.spread_deg).min(89.0);
    let phi: Vec<f64> = (0..=400).map(|i| deg_to_rad(-limit + 2.0 * limit * i as f64 / 400.0)).collect();
    let cmp = pas_exponential_vs_lorentz(&spread, &phi)?;
    let pas = Table {
        header: ["phi_deg", "exponential_db", "lorentz_db"].map(String::from).to_vec(),
        rows: (0..phi.len()).map(|i| vec![rad_to_deg(phi[i]), cmp.exponential_db[i], cmp.lorentz_db[i]]).collect(),
    };
    Ok(PropagationRun { correlation, pas })
}

impl PropagationRun {
    pub fn files(&self) -> Vec<OutputFile> {
        vec![self.correlation.to_file("fig1_correlation.csv"), self.pas.to_file("fig2_pas.csv")]
    }
}

// ---------------------------------------------------------------- dispatch

/// A runnable experiment, as recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Spectrum { figure: u8, physical: bool },
    Modes,
    Envelope,
    CapacityVsSpread,
    CapacityVsDecorr { packing: DecorrPacking },
    CapacityVsSnr { preset: SnrPreset },
    Headline,
    Propagation,
}

impl Command {
    /// File-name stem of the run's manifest.
    pub fn slug(&self) -> String {
        match self {
            Command::Spectrum { figure, .. } => format!("spectrum-fig{figure}"),
            Command::Modes => "modes".into(),
            Command::Envelope => "envelope".into(),
            Command::CapacityVsSpread => "capacity-vs-spread".into(),
            Command::CapacityVsDecorr { packing } => match packing {
                DecorrPacking::HalfLambda => "capacity-vs-decorr-half-lambda".into(),
                DecorrPacking::Per8degDensity => "capacity-vs-decorr-per-8deg-density".into(),
            },
            Command::CapacityVsSnr { preset } => format!("capacity-vs-snr-{preset:?}").to_lowercase(),
            Command::Headline => "headline".into(),
            Command::Propagation => "propagation".into(),
        }
    }
}

/// Runs `command` and returns its output files in a fixed order.
pub fn execute(command: &Command, config: &ScenarioConfig) -> CliResult<Vec<OutputFile>> {
    config.validate()?;
    match command {
        Command::Spectrum { figure, physical } => run_fig_spectrum(*figure, *physical, config)?.files(),
        Command::Modes => run_modes(config, 4)?.files(),
        Command::Envelope => run_fig8(config)?.files(),
        Command::CapacityVsSpread => Ok(vec![run_capacity_vs_spread(config)?.to_file("fig10_capacity_vs_spread.csv")]),
        Command::CapacityVsDecorr { packing } => {
            let name = match packing {
                DecorrPacking::HalfLambda => "fig11_capacity_vs_decorrelations.csv",
                DecorrPacking::Per8degDensity => "fig14_capacity_vs_decorrelations.csv",
            };
            Ok(vec![run_capacity_vs_decorrelations(config, *packing)?.to_file(name)])
        }
        Command::CapacityVsSnr { preset } => {
            let name = format!("{}_capacity_vs_snr.csv", format!("{preset:?}").to_lowercase());
            Ok(vec![run_capacity_vs_snr(config, *preset)?.to_file(&name)])
        }
        Command::Headline => Ok(vec![OutputFile::json("headline.json", &run_headline(config)?)?]),
        Command::Propagation => Ok(run_propagation(config)?.files()),
    }
}
