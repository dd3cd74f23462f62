//! Base-array field correlation for a mobile in clutter: the piazza scattering
//! integral, its large-radius asymptotes, and the exponential kernel with its
//! Lorentzian power angular spectrum.

use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::{bessel_j0, bessel_k0};
use crate::units::{linear_to_db, wavelength, wavenumber};

/// Physical geometry of one base–mobile link. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub carrier_frequency: f64,
    /// Horizontal range R0 from base to mobile.
    pub range: f64,
    /// Base antenna height above the clutter.
    pub base_height: f64,
    pub clutter_height: f64,
    pub mobile_height: f64,
    /// Radius A of the scattering piazza around the mobile.
    pub piazza_radius: f64,
    pub transmit_power: f64,
    /// Mobile azimuth measured from array broadside, radians.
    #[serde(default)]
    pub azimuth: f64,
}

impl Default for LinkGeometry {
    /// 2 GHz at 1 km, 3 m above a 10 m clutter layer, 50 m piazza.
    fn default() -> Self {
        Self {
            carrier_frequency: 2e9,
            range: 1000.0,
            base_height: 3.0,
            clutter_height: 11.5,
            mobile_height: 1.5,
            piazza_radius: 50.0,
            transmit_power: 1.0,
            azimuth: 0.0,
        }
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("range", self.range),
            ("piazza_radius", self.piazza_radius),
            ("transmit_power", self.transmit_power),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.clutter_height > self.mobile_height) {
            return Err(Error::validation("clutter_height must exceed mobile_height"));
        }
        if !self.base_height.is_finite() || !self.azimuth.is_finite() {
            return Err(Error::validation("base_height and azimuth must be finite"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_frequency)
    }

    pub fn wavenumber(&self) -> f64 {
        wavenumber(self.carrier_frequency)
    }

    /// z_c − z_0
    pub fn clutter_depth(&self) -> f64 {
        self.clutter_height - self.mobile_height
    }

    /// Exponential decay rate k·(z_c − z_0)/R0 of the asymptotic correlation.
    pub fn alpha(&self) -> f64 {
        self.wavenumber() * self.clutter_depth() / self.range
    }

    pub fn steering_ky0(&self) -> f64 {
        self.wavenumber() * self.azimuth.sin()
    }

    fn prefactor(&self) -> f64 {
        let k = self.wavenumber();
        self.base_height.powi(2) / self.range.powi(4) * PI * self.transmit_power / (2.0 * k * k)
    }

    /// Received power at zero separation, closed form of the piazza integral.
    pub fn path_gain(&self) -> f64 {
        let ratio = self.piazza_radius / self.clutter_depth();
        0.5 * self.prefactor() * (ratio * ratio).ln_1p()
    }

    /// Scale of the correlation for unbounded piazza and non-zero separation:
    /// the radial integral tends to K0, multiplied by this factor.
    pub fn asymptotic_scale(&self) -> f64 {
        self.prefactor()
    }

    /// Exponential kernel implied by this geometry, scaled to the path gain.
    pub fn kernel(&self) -> Result<CorrelationKernel> {
        self.validate()?;
        CorrelationKernel::new(self.alpha(), self.steering_ky0(), self.path_gain())
    }
}

/// `R(y) = P_r · e^{i k_y0 y} · e^{−α|y|}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationKernel {
    alpha: f64,
    steering_ky0: f64,
    total_power: f64,
}

impl CorrelationKernel {
    pub fn new(alpha: f64, steering_ky0: f64, total_power: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::validation(format!("kernel decay rate must be positive, got {alpha}")));
        }
        if !steering_ky0.is_finite() || !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::validation("kernel steering and power must be finite, power positive"));
        }
        Ok(Self { alpha, steering_ky0, total_power })
    }

    /// Unit-power broadside kernel with the given decay rate.
    pub fn broadside(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn steering_ky0(&self) -> f64 {
        self.steering_ky0
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn decorrelation_distance(&self) -> f64 {
        1.0 / self.alpha
    }

    pub fn with_steering(self, ky0: f64) -> Self {
        Self { steering_ky0: ky0, ..self }
    }

    pub fn normalized(self) -> Self {
        Self { total_power: 1.0, ..self }
    }

    pub fn at(&self, separation: f64) -> Complex64 {
        Complex64::from_polar(
            self.total_power * (-self.alpha * separation.abs()).exp(),
            self.steering_ky0 * separation,
        )
    }
}

/// 3 dB full width of the power angular spectrum, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSpreadSpec {
    phi_3db: f64,
    rms_sigma: Option<f64>,
}

impl AngularSpreadSpec {
    pub fn from_3db(phi_3db: f64) -> Result<Self> {
        if !(phi_3db > 0.0 && phi_3db < PI) {
            return Err(Error::validation(format!("3 dB width must lie in (0, π), got {phi_3db}")));
        }
        Ok(Self { phi_3db, rms_sigma: None })
    }

    pub fn from_3db_deg(deg: f64) -> Result<Self> {
        Self::from_3db(deg.to_radians())
    }

    /// From the rms spread σ of a Laplacian spectrum `e^{−√2|φ|/σ}`, whose
    /// 3 dB full width is `√2·σ·ln 2`.
    pub fn from_rms(sigma: f64) -> Result<Self> {
        let mut s = Self::from_3db(SQRT_2 * sigma * LN_2)?;
        s.rms_sigma = Some(sigma);
        Ok(s)
    }

    pub fn phi_3db(&self) -> f64 {
        self.phi_3db
    }

    /// rms spread, either as given or inferred from the 3 dB width.
    pub fn rms_sigma(&self) -> f64 {
        self.rms_sigma.unwrap_or(self.phi_3db / (SQRT_2 * LN_2))
    }

    /// Number of λ/2 steps in one decorrelation length, `2/(π φ_3dB)`.
    pub fn half_wavelengths_per_decorrelation(&self) -> f64 {
        2.0 / (PI * self.phi_3db)
    }
}

/// Numeric correlation together with the quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericCorrelation {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// Correlation between base antennas `separation` meters apart along the
/// array, by quadrature of the J0-weighted piazza intensity.
pub fn correlation_numeric(geom: &LinkGeometry, separation: f64) -> Result<NumericCorrelation> {
    correlation_numeric_with(geom, separation, QuadOptions::default())
}

pub fn correlation_numeric_with(
    geom: &LinkGeometry,
    separation: f64,
    opts: QuadOptions,
) -> Result<NumericCorrelation> {
    geom.validate()?;
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::validation(format!("separation must be non-negative, got {separation}")));
    }
    let h2 = geom.clutter_depth().powi(2);
    let b = geom.wavenumber() * separation / geom.range;
    let radial = integrate(
        |r| bessel_j0(b * r) * r / (h2 + r * r),
        0.0,
        geom.piazza_radius,
        opts,
    )?;
    let scale = geom.prefactor();
    let phase = Complex64::from_polar(1.0, geom.steering_ky0() * separation);
    Ok(NumericCorrelation {
        value: phase * scale * radial.value,
        error_estimate: scale * radial.error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticForm {
    BesselK0,
    Exponential,
}

/// Large-piazza correlation. The K0 form is the exact unbounded-radius limit
/// and diverges at zero separation; the exponential form is scaled to the
/// path gain so that it equals `P_r` at zero.
pub fn correlation_asymptotic(
    geom: &LinkGeometry,
    separation: f64,
    form: AsymptoticForm,
) -> Result<Complex64> {
    geom.validate()?;
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::validation(format!("separation must be non-negative, got {separation}")));
    }
    let x = geom.alpha() * separation;
    let phase = Complex64::from_polar(1.0, geom.steering_ky0() * separation);
    match form {
        AsymptoticForm::BesselK0 => {
            if separation == 0.0 {
                return Err(Error::Domain("K0 asymptote is singular at zero separation".into()));
            }
            Ok(phase * geom.asymptotic_scale() * bessel_k0(x))
        }
        AsymptoticForm::Exponential => Ok(phase * geom.path_gain() * (-x).exp()),
    }
}

/// Normalized kernel for a given angular spread: `α = (π/λ)·φ_3dB`,
/// `k_y0 = k·sin φ0`.
pub fn kernel_from_spread(
    spread: &AngularSpreadSpec,
    carrier_frequency: f64,
    azimuth: f64,
) -> Result<CorrelationKernel> {
    if !(carrier_frequency > 0.0) {
        return Err(Error::validation("carrier frequency must be positive"));
    }
    let alpha = PI / wavelength(carrier_frequency) * spread.phi_3db();
    CorrelationKernel::new(alpha, wavenumber(carrier_frequency) * azimuth.sin(), 1.0)
}

/// Lorentzian power angular spectrum `P_r·2α/(α² + (k_y − k_y0)²)`.
pub fn power_angular_spectrum(kernel: &CorrelationKernel, ky: f64) -> f64 {
    let a = kernel.alpha();
    let d = ky - kernel.steering_ky0();
    kernel.total_power() * 2.0 * a / (a * a + d * d)
}

/// Side-by-side Laplacian and Cauchy–Lorentz angular spectra, 0 dB at φ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PasComparison {
    pub phi: Vec<f64>,
    pub exponential_db: Vec<f64>,
    pub lorentz_db: Vec<f64>,
}

pub fn pas_exponential_vs_lorentz(spread: &AngularSpreadSpec, phi_grid: &[f64]) -> Result<PasComparison> {
    if let Some(bad) = phi_grid.iter().find(|p| !(p.abs() < PI / 2.0)) {
        return Err(Error::validation(format!("azimuth {bad} outside (−π/2, π/2)")));
    }
    let sigma = spread.rms_sigma();
    let a = (spread.phi_3db() / 2.0).sin();
    let exponential_db = phi_grid
        .iter()
        .map(|p| linear_to_db((-SQRT_2 * p.abs() / sigma).exp()))
        .collect();
    let lorentz_db = phi_grid
        .iter()
        .map(|p| linear_to_db(a * a / (a * a + p.sin().powi(2))))
        .collect();
    Ok(PasComparison { phi: phi_grid.to_vec(), exponential_db, lorentz_db })
}
