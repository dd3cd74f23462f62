//! Beamforming versus MIMO in a scattering channel: the exponential
//! correlation kernel, APOD eigenmodes of a linear array, and Monte Carlo
//! outage capacity under power allocations over those modes.

pub mod apod;
pub mod error;
pub mod linalg;
pub mod outage;
pub mod propagation;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod units;

pub use apod::{ApodSpectrum, ArrayLayout, KlField, SpectrumTable, SweepKind};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix};
pub use propagation::{AngularSpreadSpec, CorrelationKernel, LinkGeometry};
pub use rng::{CounterRng, StreamKey};
pub use outage::{CapacityDistribution, MimoConfig, PowerAllocation};
