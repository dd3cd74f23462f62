//! APOD (apodization) spectra: the sampled correlation kernel on a linear
//! array, its eigenmodes and strengths, Karhunen–Loève field synthesis, and
//! the spectrum sweeps over antenna count, aperture and angular spread.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, jacobi_eigen, ComplexMatrix, JacobiOptions, RealMatrix};
use crate::propagation::{kernel_from_spread, AngularSpreadSpec, CorrelationKernel};
use crate::rng::{purpose, StreamKey};
use crate::units::wavelength;

/// Relative slack when comparing a spacing against λ/2.
const SPACING_SLACK: f64 = 1e-9;

/// Equispaced linear array, cell-centered: `y_j = −L/2 + (j − ½)·L/K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    aperture: f64,
    positions: Vec<f64>,
    carrier_frequency: Option<f64>,
}

impl ArrayLayout {
    /// `count` antennas over `aperture` meters. With a carrier bound, spacing
    /// below λ/2 is rejected.
    pub fn new(count: usize, aperture: f64, carrier_frequency: Option<f64>) -> Result<Self> {
        if count == 0 {
            return Err(Error::validation("array needs at least one antenna"));
        }
        if !(aperture > 0.0 && aperture.is_finite()) {
            return Err(Error::validation(format!("aperture must be positive, got {aperture}")));
        }
        let spacing = aperture / count as f64;
        if let Some(f) = carrier_frequency {
            if !(f > 0.0) {
                return Err(Error::validation("carrier frequency must be positive"));
            }
            let half = wavelength(f) / 2.0;
            if count > 1 && spacing < half * (1.0 - SPACING_SLACK) {
                return Err(Error::validation(format!(
                    "spacing {spacing:.5} m is below λ/2 = {half:.5} m for {count} antennas"
                )));
            }
        }
        let positions = (0..count)
            .map(|j| -aperture / 2.0 + (j as f64 + 0.5) * spacing)
            .collect();
        Ok(Self { aperture, positions, carrier_frequency })
    }

    /// Aperture given in decorrelation lengths of `kernel`; no λ/2 check.
    pub fn in_decorrelations(count: usize, decorrelations: f64, kernel: &CorrelationKernel) -> Result<Self> {
        Self::new(count, decorrelations * kernel.decorrelation_distance(), None)
    }

    /// Largest antenna count whose spacing over `aperture` is at least λ/2.
    pub fn max_half_lambda_count(aperture: f64, carrier_frequency: f64) -> usize {
        let n = aperture / (wavelength(carrier_frequency) / 2.0);
        ((n * (1.0 + SPACING_SLACK)).floor() as usize).max(1)
    }

    pub fn antenna_count(&self) -> usize {
        self.positions.len()
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn spacing(&self) -> f64 {
        self.aperture / self.positions.len() as f64
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn carrier_frequency(&self) -> Option<f64> {
        self.carrier_frequency
    }
}

/// Unit-diagonal Hermitian matrix `e^{i k_y0 (y_i − y_j)} e^{−α|y_i − y_j|}`.
pub fn sample_kernel_matrix(kernel: &CorrelationKernel, layout: &ArrayLayout) -> ComplexMatrix {
    let k = kernel.normalized();
    let y = layout.positions();
    ComplexMatrix::from_fn(y.len(), |i, j| if i == j { Complex64::new(1.0, 0.0) } else { k.at(y[i] - y[j]) })
}

fn broadside_matrix(alpha: f64, layout: &ArrayLayout) -> RealMatrix {
    let y = layout.positions();
    RealMatrix::from_fn(y.len(), |i, j| if i == j { 1.0 } else { (-alpha * (y[i] - y[j]).abs()).exp() })
}

/// Eigenpairs of a Hermitian matrix, strongest first.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// General Hermitian eigendecomposition (cyclic Jacobi; complex input via
/// the real embedding).
pub fn eigendecompose(matrix: &ComplexMatrix) -> Result<Eigenpairs> {
    let e = hermitian_eigen(matrix, JacobiOptions::default())?;
    Ok(Eigenpairs { values: e.values, vectors: e.vectors })
}

/// Descending APOD strengths with their unit eigenvectors.
#[derive(Debug, Clone)]
pub struct ApodSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
    layout: ArrayLayout,
    kernel: CorrelationKernel,
}

impl ApodSpectrum {
    /// Spectrum of the sampled kernel. The steering ramp is a diagonal
    /// unitary similarity, so only the real broadside matrix is diagonalized
    /// and the ramp is applied to its eigenvectors.
    pub fn compute(kernel: &CorrelationKernel, layout: &ArrayLayout) -> Result<Self> {
        let e = jacobi_eigen(&broadside_matrix(kernel.alpha(), layout), JacobiOptions::default())?;
        let ky0 = kernel.steering_ky0();
        let ramp: Vec<Complex64> = layout.positions().iter().map(|&y| Complex64::from_polar(1.0, ky0 * y)).collect();
        let eigenvectors = e
            .vectors
            .into_iter()
            .map(|v| v.iter().zip(&ramp).map(|(x, r)| r * x).collect())
            .collect();
        Self::from_parts(e.values, eigenvectors, layout.clone(), *kernel)
    }

    /// Spectrum through the general Hermitian solver on the full steered matrix.
    pub fn compute_hermitian(kernel: &CorrelationKernel, layout: &ArrayLayout) -> Result<Self> {
        let e = eigendecompose(&sample_kernel_matrix(kernel, layout))?;
        Self::from_parts(e.values, e.vectors, layout.clone(), *kernel)
    }

    fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<Complex64>>,
        layout: ArrayLayout,
        kernel: CorrelationKernel,
    ) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > 0.0)) {
            return Err(Error::NumericFailure {
                what: "kernel matrix not positive definite".into(),
                estimate: *bad,
            });
        }
        Ok(Self { eigenvalues, eigenvectors, layout, kernel })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<Complex64>] {
        &self.eigenvectors
    }

    pub fn layout(&self) -> &ArrayLayout {
        &self.layout
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// The strongest `m` eigenvalues.
    pub fn top(&self, m: usize) -> &[f64] {
        &self.eigenvalues[..m.min(self.len())]
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }
}

/// Saturation value `(2/α)/Δy` of the top eigenvalue for an unbounded array
/// with spacing `spacing`.
pub fn saturation_gain_limit(kernel: &CorrelationKernel, spacing: f64) -> Result<f64> {
    if !(spacing > 0.0) {
        return Err(Error::validation("spacing must be positive"));
    }
    Ok(2.0 / kernel.alpha() / spacing)
}

/// Eigenvalue-scaled beam pattern `ν_k·|Σ_j φ_k(y_j) e^{−i k_y y_j}|²` of
/// mode `mode` (0-based).
pub fn mode_beam_pattern(spectrum: &ApodSpectrum, mode: usize, ky_grid: &[f64]) -> Result<Vec<f64>> {
    if mode >= spectrum.len() {
        return Err(Error::validation(format!("mode {mode} out of range for {} antennas", spectrum.len())));
    }
    let v = &spectrum.eigenvectors[mode];
    let y = spectrum.layout.positions();
    let nu = spectrum.eigenvalues[mode];
    Ok(ky_grid
        .iter()
        .map(|&ky| {
            let s: Complex64 = v.iter().zip(y).map(|(p, &yj)| p * Complex64::from_polar(1.0, -ky * yj)).sum();
            nu * s.norm_sqr()
        })
        .collect())
}

/// One Karhunen–Loève realization of the field at the array positions.
#[derive(Debug, Clone, PartialEq)]
pub struct KlField {
    pub samples: Vec<Complex64>,
    pub seed: u64,
    pub realization: u64,
}

pub fn synthesize_field(spectrum: &ApodSpectrum, seed: u64) -> KlField {
    synthesize_field_at(spectrum, seed, 0)
}

/// `G = Σ_k ν_k^{1/2} z_k φ_k` with `z_k` iid unit complex Gaussians drawn
/// from the stream `(seed, FIELD, 0, realization)`.
pub fn synthesize_field_at(spectrum: &ApodSpectrum, seed: u64, realization: u64) -> KlField {
    let mut rng = StreamKey::new(seed, purpose::FIELD, 0, realization).rng();
    let n = spectrum.layout.antenna_count();
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for (nu, phi) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors) {
        let z = rng.complex_gaussian() * nu.sqrt();
        for (g, p) in samples.iter_mut().zip(phi) {
            *g += z * p;
        }
    }
    KlField { samples, seed, realization }
}

/// Sign alternations along the aperture of a broadside mode (0-based).
pub fn sign_change_count(spectrum: &ApodSpectrum, mode: usize) -> Result<usize> {
    if spectrum.kernel.steering_ky0() != 0.0 {
        return Err(Error::validation("sign changes are defined for broadside (real) modes only"));
    }
    if mode >= spectrum.len() {
        return Err(Error::validation(format!("mode {mode} out of range")));
    }
    let v: Vec<f64> = spectrum.eigenvectors[mode].iter().map(|z| z.re).collect();
    let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut last = 0.0;
    let mut changes = 0;
    for &x in v.iter().filter(|x| x.abs() > 1e-10 * peak) {
        if last != 0.0 && x.signum() != last {
            changes += 1;
        }
        last = x.signum();
    }
    Ok(changes)
}

/// Spatial frequency at which the aperture transform of mode `mode` peaks,
/// i.e. the frequency of the best-fitting sinusoid.
pub fn sinusoid_fit_frequency(spectrum: &ApodSpectrum, mode: usize) -> Result<f64> {
    let ky0 = spectrum.kernel.steering_ky0();
    let span = 4.0 * PI / spectrum.layout.spacing().max(1e-300);
    let limit = (20.0 * PI * (mode as f64 + 1.0) / spectrum.layout.aperture()).min(span);
    let n = 4000;
    let grid: Vec<f64> = (0..=n).map(|i| ky0 + limit * i as f64 / n as f64).collect();
    let p = mode_beam_pattern(spectrum, mode, &grid)?;
    let (mut best, _) = p
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    // refine on a local grid
    let step = limit / n as f64;
    let lo = grid[best.saturating_sub(1)];
    let local: Vec<f64> = (0..=200).map(|i| lo + 2.0 * step * i as f64 / 200.0).collect();
    let lp = mode_beam_pattern(spectrum, mode, &local)?;
    best = lp
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    Ok(local[best] - ky0)
}

/// Which family of spectra to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepKind {
    /// Antenna counts over a fixed aperture (decorrelation lengths).
    FixedApertureVaryK { aperture_decorrelations: f64, counts: Vec<usize> },
    /// K antennas over K decorrelation lengths.
    OneAntennaPerDecorrelation { counts: Vec<usize> },
    /// `antennas_per_decorrelation · L` antennas over L decorrelation lengths.
    HalfLambdaPackingVaryAperture { antennas_per_decorrelation: usize, apertures: Vec<f64> },
    /// A fixed antenna count over growing apertures.
    FixedKVaryAperture { antennas: usize, apertures: Vec<f64> },
    /// A fixed physical array of `antennas` at λ/2, spread varied (degrees).
    FixedPhysicalApertureVarySpread { antennas: usize, carrier_frequency: f64, spreads_deg: Vec<f64> },
}

impl SweepKind {
    pub fn fig4() -> Self {
        Self::FixedApertureVaryK { aperture_decorrelations: 1.0, counts: (1..=18).collect() }
    }

    pub fn fig5() -> Self {
        Self::OneAntennaPerDecorrelation { counts: (1..=30).collect() }
    }

    pub fn fig6() -> Self {
        Self::HalfLambdaPackingVaryAperture {
            antennas_per_decorrelation: 18,
            apertures: (1..=30).map(f64::from).collect(),
        }
    }

    pub fn fig7() -> Self {
        Self::FixedKVaryAperture { antennas: 18, apertures: (1..=30).map(f64::from).collect() }
    }

    pub fn fig9() -> Self {
        Self::FixedPhysicalApertureVarySpread {
            antennas: 18,
            carrier_frequency: 2e9,
            spreads_deg: vec![0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0],
        }
    }

    pub fn abscissa_label(&self) -> &'static str {
        match self {
            Self::FixedApertureVaryK { .. } | Self::OneAntennaPerDecorrelation { .. } => "antennas",
            Self::HalfLambdaPackingVaryAperture { .. } | Self::FixedKVaryAperture { .. } => "aperture_decorrelations",
            Self::FixedPhysicalApertureVarySpread { .. } => "spread_deg",
        }
    }
}

/// Optional physical binding of an abstract sweep: with a carrier and spread
/// the λ/2 limit applies, and points exceeding it are capped and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalBinding {
    pub carrier_frequency: f64,
    pub spread_3db_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub abscissa: f64,
    pub eigenvalues: Vec<f64>,
    /// True when the requested antenna count violated λ/2 and was reduced.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub abscissa_label: String,
    pub rows: Vec<SpectrumRow>,
}

struct SweepPoint {
    abscissa: f64,
    count: usize,
    decorrelations: f64,
    spread_deg: Option<f64>,
}

fn sweep_points(kind: &SweepKind) -> Result<Vec<SweepPoint>> {
    let pt = |abscissa, count, decorrelations| SweepPoint { abscissa, count, decorrelations, spread_deg: None };
    let pts: Vec<SweepPoint> = match kind {
        SweepKind::FixedApertureVaryK { aperture_decorrelations, counts } => {
            counts.iter().map(|&k| pt(k as f64, k, *aperture_decorrelations)).collect()
        }
        SweepKind::OneAntennaPerDecorrelation { counts } => {
            counts.iter().map(|&k| pt(k as f64, k, k as f64)).collect()
        }
        SweepKind::HalfLambdaPackingVaryAperture { antennas_per_decorrelation, apertures } => apertures
            .iter()
            .map(|&l| pt(l, ((*antennas_per_decorrelation as f64 * l) + 1e-9).floor().max(1.0) as usize, l))
            .collect(),
        SweepKind::FixedKVaryAperture { antennas, apertures } => {
            apertures.iter().map(|&l| pt(l, *antennas, l)).collect()
        }
        SweepKind::FixedPhysicalApertureVarySpread { antennas, spreads_deg, .. } => spreads_deg
            .iter()
            .map(|&s| SweepPoint { abscissa: s, count: *antennas, decorrelations: f64::NAN, spread_deg: Some(s) })
            .collect(),
    };
    if pts.iter().any(|p| p.count == 0) {
        return Err(Error::validation("sweep point with zero antennas"));
    }
    Ok(pts)
}

/// Full descending spectrum at every abscissa point of the sweep.
pub fn spectrum_sweep(kind: &SweepKind, binding: Option<PhysicalBinding>) -> Result<SpectrumTable> {
    let points = sweep_points(kind)?;
    let rows: Result<Vec<SpectrumRow>> = points
        .par_iter()
        .map(|p| -> Result<SpectrumRow> {
            if let SweepKind::FixedPhysicalApertureVarySpread { carrier_frequency, .. } = kind {
                let spread = AngularSpreadSpec::from_3db_deg(p.spread_deg.unwrap_or(f64::NAN))?;
                let kernel = kernel_from_spread(&spread, *carrier_frequency, 0.0)?;
                let aperture = p.count as f64 * wavelength(*carrier_frequency) / 2.0;
                let layout = ArrayLayout::new(p.count, aperture, Some(*carrier_frequency))?;
                let s = ApodSpectrum::compute(&kernel, &layout)?;
                return Ok(SpectrumRow { abscissa: p.abscissa, eigenvalues: s.eigenvalues, capped: false });
            }
            let (kernel, carrier) = match binding {
                Some(b) => {
                    let spread = AngularSpreadSpec::from_3db_deg(b.spread_3db_deg)?;
                    (kernel_from_spread(&spread, b.carrier_frequency, 0.0)?, Some(b.carrier_frequency))
                }
                None => (CorrelationKernel::broadside(1.0)?, None),
            };
            let aperture = p.decorrelations * kernel.decorrelation_distance();
            let mut count = p.count;
            let mut capped = false;
            if let Some(f) = carrier {
                let max = ArrayLayout::max_half_lambda_count(aperture, f);
                if count > max {
                    count = max;
                    capped = true;
                }
            }
            let layout = ArrayLayout::new(count, aperture, carrier)?;
            let s = ApodSpectrum::compute(&kernel, &layout)?;
            Ok(SpectrumRow { abscissa: p.abscissa, eigenvalues: s.eigenvalues, capped })
        })
        .collect();
    Ok(SpectrumTable { abscissa_label: kind.abscissa_label().to_string(), rows: rows? })
}

/// Spectrum table as CSV: `abscissa_label, abscissa_value, eig_1..eig_K`,
/// short rows padded with empty cells. Capped rows carry a `[capped]` suffix
/// on their label.
pub fn write_spectrum_csv<W: std::io::Write>(table: &SpectrumTable, out: W) -> Result<()> {
    let width = table.rows.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["abscissa_label".to_string(), "abscissa_value".to_string()];
    header.extend((1..=width).map(|k| format!("eig_{k}")));
    w.write_record(&header)?;
    for row in &table.rows {
        let label = if row.capped { format!("{}[capped]", table.abscissa_label) } else { table.abscissa_label.clone() };
        let mut rec = vec![label, row.abscissa.to_string()];
        rec.extend(row.eigenvalues.iter().map(f64::to_string));
        rec.resize(width + 2, String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Eigenvectors as a CSV matrix: one row per antenna, real and imaginary
/// columns per mode.
pub fn write_eigenvectors_csv<W: std::io::Write>(spectrum: &ApodSpectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["position".to_string()];
    for k in 1..=spectrum.len() {
        header.push(format!("mode_{k}_re"));
        header.push(format!("mode_{k}_im"));
    }
    w.write_record(&header)?;
    for (j, y) in spectrum.layout.positions().iter().enumerate() {
        let mut rec = vec![y.to_string()];
        for v in &spectrum.eigenvectors {
            rec.push(v[j].re.to_string());
            rec.push(v[j].im.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
