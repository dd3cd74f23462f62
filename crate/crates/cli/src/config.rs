//! Scenario configuration: a flat JSON schema with defaults, overridable
//! from the command line. Degrees, GHz and dB are converted to radians,
//! hertz and linear power here and nowhere else.

use std::path::Path;

use bfmimo_core::apod::ArrayLayout;
use bfmimo_core::outage::SearchOptions;
use bfmimo_core::propagation::{kernel_from_spread, AngularSpreadSpec};
use bfmimo_core::units::{db_to_linear, deg_to_rad};
use bfmimo_core::{CorrelationKernel, LinkGeometry};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Link geometry without the carrier and azimuth, which live at top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub range_m: f64,
    pub base_height_m: f64,
    pub clutter_height_m: f64,
    pub mobile_height_m: f64,
    pub piazza_radius_m: f64,
    pub transmit_power_w: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = LinkGeometry::default();
        Self {
            range_m: g.range,
            base_height_m: g.base_height,
            clutter_height_m: g.clutter_height,
            mobile_height_m: g.mobile_height,
            piazza_radius_m: g.piazza_radius,
            transmit_power_w: g.transmit_power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureUnit {
    Meters,
    Decorrelations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aperture {
    pub value: f64,
    pub unit: ApertureUnit,
}

/// Antenna count, or as many as fit at half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Antennas {
    Count(usize),
    Packing(Packing),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Packing {
    MaxHalfLambda,
}

/// Monte Carlo budget of one envelope search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McBudget {
    pub candidates: usize,
    pub trials: usize,
    pub rounds: usize,
    pub shrink: f64,
    pub holdout_trials: usize,
    pub seed: u64,
}

impl McBudget {
    /// Reduced budget for sweep points.
    pub fn sweep() -> Self {
        Self { candidates: 300, trials: 3000, ..Self::full() }
    }

    pub fn full() -> Self {
        let d = SearchOptions::default();
        Self {
            candidates: d.candidates,
            trials: d.trials,
            rounds: d.rounds,
            shrink: d.shrink,
            holdout_trials: d.holdout_trials,
            seed: d.seed,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            candidates: self.candidates,
            trials: self.trials,
            rounds: self.rounds,
            shrink: self.shrink,
            holdout_trials: self.holdout_trials,
            seed: self.seed,
        }
    }
}

impl Default for McBudget {
    fn default() -> Self {
        Self::sweep()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub gradation: f64,
    pub trials: usize,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { gradation: 0.01, trials: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub spread_deg: f64,
    pub azimuth_deg: f64,
    pub carrier_ghz: f64,
    pub aperture: Aperture,
    pub antennas: Antennas,
    /// `(m, n)`: transmit modes, receive antennas.
    pub mimo_shape: (usize, usize),
    pub snr_db: f64,
    pub outage_q: f64,
    /// Budget for sweep points.
    pub mc: McBudget,
    /// Budget for the headline run.
    pub headline_mc: McBudget,
    pub envelope: EnvelopeConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            spread_deg: 8.0,
            azimuth_deg: 0.0,
            carrier_ghz: 2.0,
            aperture: Aperture { value: 4.0, unit: ApertureUnit::Decorrelations },
            antennas: Antennas::Packing(Packing::MaxHalfLambda),
            mimo_shape: (4, 4),
            snr_db: 0.0,
            outage_q: 0.1,
            mc: McBudget::sweep(),
            headline_mc: McBudget::full(),
            envelope: EnvelopeConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub candidates: Option<usize>,
    pub outage: Option<f64>,
}

/// SI/linear view of a validated config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub spread: AngularSpreadSpec,
    pub azimuth: f64,
    pub carrier_frequency: f64,
    pub snr_rho: f64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.mc.seed = s;
            self.headline_mc.seed = s;
        }
        if let Some(t) = o.trials {
            self.mc.trials = t;
            self.headline_mc.trials = t;
            self.envelope.trials = t;
        }
        if let Some(c) = o.candidates {
            self.mc.candidates = c;
            self.headline_mc.candidates = c;
        }
        if let Some(q) = o.outage {
            self.outage_q = q;
        }
    }

    /// Checks every field, reporting all offending fields at once.
    pub fn validate(&self) -> CliResult<()> {
        let mut bad = Vec::new();
        if let Err(e) = self.link_geometry() {
            bad.push(format!("geometry ({e})"));
        }
        if !(self.spread_deg > 0.0 && self.spread_deg < 180.0) {
            bad.push(format!("spread_deg = {}", self.spread_deg));
        }
        if !(self.azimuth_deg.abs() < 90.0) {
            bad.push(format!("azimuth_deg = {}", self.azimuth_deg));
        }
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz.is_finite()) {
            bad.push(format!("carrier_ghz = {}", self.carrier_ghz));
        }
        if !(self.aperture.value > 0.0 && self.aperture.value.is_finite()) {
            bad.push(format!("aperture.value = {}", self.aperture.value));
        }
        if self.antennas == Antennas::Count(0) {
            bad.push("antennas = 0".into());
        }
        let (m, n) = self.mimo_shape;
        if m == 0 || n == 0 {
            bad.push(format!("mimo_shape = ({m}, {n})"));
        }
        if !self.snr_db.is_finite() {
            bad.push("snr_db".into());
        }
        if !(self.outage_q > 0.0 && self.outage_q < 1.0) {
            bad.push(format!("outage_q = {}", self.outage_q));
        }
        for (name, b) in [("mc", &self.mc), ("headline_mc", &self.headline_mc)] {
            if let Err(e) = b.search_options().validate() {
                bad.push(format!("{name} ({e})"));
            }
        }
        if !(self.envelope.gradation > 0.0 && self.envelope.gradation <= 1.0) || self.envelope.trials == 0 {
            bad.push("envelope".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(format!("bad config fields: {}", bad.join(", "))))
        }
    }

    pub fn resolved(&self) -> CliResult<Resolved> {
        self.validate()?;
        Ok(Resolved {
            spread: AngularSpreadSpec::from_3db(deg_to_rad(self.spread_deg))?,
            azimuth: deg_to_rad(self.azimuth_deg),
            carrier_frequency: self.carrier_ghz * 1e9,
            snr_rho: db_to_linear(self.snr_db),
        })
    }

    pub fn link_geometry(&self) -> CliResult<LinkGeometry> {
        let g = LinkGeometry {
            carrier_frequency: self.carrier_ghz * 1e9,
            range: self.geometry.range_m,
            base_height: self.geometry.base_height_m,
            clutter_height: self.geometry.clutter_height_m,
            mobile_height: self.geometry.mobile_height_m,
            piazza_radius: self.geometry.piazza_radius_m,
            transmit_power: self.geometry.transmit_power_w,
            azimuth: deg_to_rad(self.azimuth_deg),
        };
        g.validate()?;
        Ok(g)
    }

    /// Normalized kernel of the configured spread, carrier and azimuth.
    pub fn kernel(&self) -> CliResult<CorrelationKernel> {
        let r = self.resolved()?;
        Ok(kernel_from_spread(&r.spread, r.carrier_frequency, r.azimuth)?)
    }

    pub fn aperture_m(&self, kernel: &CorrelationKernel) -> f64 {
        match self.aperture.unit {
            ApertureUnit::Meters => self.aperture.value,
            ApertureUnit::Decorrelations => self.aperture.value * kernel.decorrelation_distance(),
        }
    }

    /// The configured physical array, checked against λ/2.
    pub fn layout(&self) -> CliResult<ArrayLayout> {
        let kernel = self.kernel()?;
        let f = self.carrier_ghz * 1e9;
        let aperture = self.aperture_m(&kernel);
        let count = match self.antennas {
            Antennas::Count(k) => k,
            Antennas::Packing(Packing::MaxHalfLambda) => ArrayLayout::max_half_lambda_count(aperture, f),
        };
        Ok(ArrayLayout::new(count, aperture, Some(f))?)
    }
}
