//! Quantum shot-noise reduction in atomic-scale point contacts, and the
//! analysis of light emitted from such contacts in a scanning tunneling
//! microscope.
//!
//! The crate is organised bottom-up:
//!
//! - [`transport`]: Landauer channels, the Fano factor and conductance
//!   decomposition models.
//! - [`noise`]: Schottky, reduced shot noise and finite-temperature noise
//!   densities, plus a Monte Carlo partition-noise estimator.
//! - [`spectra`]: spectral-map ingestion, band integration and 1e/2e bands.
//! - [`analysis`]: photon-yield curves, model comparison and the electron
//!   temperature fit.
//! - [`synth`]: deterministic synthetic traces and spectral maps.
//! - [`cli`]: the `shotlight` command-line surface.

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod error;
pub mod format;
pub mod noise;
pub mod spectra;
pub mod synth;
pub mod transport;

pub use analysis::{FitResult, NormWindow, YieldCurve, YieldPoint};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use noise::{NoiseDensity, NoiseEnvironment};
pub use spectra::{Band, SpectralMap, SpectralRecord, Spectrum};
pub use synth::{NoiseMode, SynthConfig};
pub use transport::{ChannelSet, DecompositionModel, Spacing};
