//! Synthetic tip approaches and spectral maps.
//!
//! The conductance grows exponentially while tunneling, reaches `contact_g` at
//! the jump to contact, then rises linearly until the model capacity at the
//! end of the approach. Each spectrum is flat across the 1e band with an
//! integral of `base_rate · I · y(g)`, where `y` is the normalized yield
//! model; the 2e band carries a toy shoulder that grows up to `g = 0.25` and
//! then follows the 1e level.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::analysis::{junction_current, YieldCurve};
use crate::error::{Error, Result};
use crate::format::round_sig;
use crate::noise::{normalized_yield_model, NoiseEnvironment};
use crate::spectra::{
    bins_in_band, default_bands, validate_grid, SpectralMap, SpectralRecord, Spectrum,
};
use crate::transport::DecompositionModel;

/// Ratio of the 2e to the 1e spectral level once the shoulder is saturated.
const SHOULDER_LEVEL: f64 = 0.1;
/// Conductance at which the 2e shoulder stops rising.
const SHOULDER_SATURATION_G: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    #[default]
    None,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Bias in volts.
    pub voltage: f64,
    /// Electron temperature in kelvin.
    pub temperature: f64,
    pub model: DecompositionModel,
    /// Start and end of the approach, nm.
    pub z_range: (f64, f64),
    pub n_steps: usize,
    /// Exponential length scale of the tunneling conductance, nm.
    pub tunneling_decay: f64,
    /// Conductance at the jump to contact, G0.
    pub contact_g: f64,
    /// Conductance at the start of the approach, G0.
    pub initial_g: f64,
    /// Spectrometer bin width, eV.
    pub bin_width: f64,
    /// First and last bin centers, eV.
    pub energy_range: (f64, f64),
    /// Detected 1e counts/s per ampere at unit yield.
    pub base_rate: f64,
    pub noise_mode: NoiseMode,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            voltage: 1.6,
            temperature: 2000.0,
            model: DecompositionModel::two_channel(),
            z_range: (0.0, 0.45),
            n_steps: 60,
            tunneling_decay: 0.045,
            contact_g: 0.93,
            initial_g: 1e-3,
            bin_width: 0.01,
            energy_range: (1.0, 2.2),
            base_rate: 1e11,
            noise_mode: NoiseMode::None,
            seed: 0,
        }
    }
}

/// One sample of a synthetic approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub z: f64,
    pub g: f64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.voltage > 0.0 && self.voltage.is_finite()) {
            return invalid(format!("voltage must be positive, got {}", self.voltage));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return invalid(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            ));
        }
        if self.n_steps < 2 {
            return invalid(format!("n_steps must be at least 2, got {}", self.n_steps));
        }
        let (z0, z1) = self.z_range;
        if !(z0 < z1 && z0.is_finite() && z1.is_finite()) {
            return invalid(format!("z_range must satisfy z0 < z1, got ({z0}, {z1})"));
        }
        if !(self.tunneling_decay > 0.0 && self.tunneling_decay.is_finite()) {
            return invalid("tunneling_decay must be positive".to_string());
        }
        let capacity = self.model.capacity();
        if !(self.contact_g > 0.0 && self.contact_g <= capacity) {
            return invalid(format!(
                "contact_g must lie in (0, {capacity}], got {}",
                self.contact_g
            ));
        }
        if !(self.initial_g > 0.0 && self.initial_g <= self.contact_g) {
            return invalid(format!(
                "initial_g must lie in (0, contact_g], got {}",
                self.initial_g
            ));
        }
        if self.contact_z() >= z1 {
            return invalid("the approach ends before reaching contact".to_string());
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return invalid("bin_width must be positive".to_string());
        }
        if !(self.base_rate > 0.0 && self.base_rate.is_finite()) {
            return invalid("base_rate must be positive".to_string());
        }
        let (e0, e1) = self.energy_range;
        if !(e0 > 0.0 && e0 < e1) {
            return invalid(format!(
                "energy_range must satisfy 0 < lo < hi, got ({e0}, {e1})"
            ));
        }
        let energies = self.energy_grid();
        validate_grid(&energies)?;
        let (b1, b2) = default_bands(self.voltage)?;
        for band in [b1, b2] {
            if band.lo() < energies[0] || band.hi() > energies[energies.len() - 1] {
                return invalid(format!(
                    "band [{}, {}] eV is not covered by the energy range",
                    band.lo(),
                    band.hi()
                ));
            }
        }
        Ok(())
    }

    /// Tip position of the jump to contact.
    pub fn contact_z(&self) -> f64 {
        self.z_range.0 + self.tunneling_decay * (self.contact_g / self.initial_g).ln()
    }

    /// Conductance at tip position `z`.
    pub fn conductance_at(&self, z: f64) -> f64 {
        let zc = self.contact_z();
        if z < zc {
            self.contact_g * ((z - zc) / self.tunneling_decay).exp()
        } else {
            let capacity = self.model.capacity();
            let slope = (capacity - self.contact_g) / (self.z_range.1 - zc);
            (self.contact_g + slope * (z - zc)).min(capacity)
        }
    }

    /// Bin centers from `energy_range.0` in steps of `bin_width`, up to and
    /// including `energy_range.1` when it falls on the grid.
    pub fn energy_grid(&self) -> Vec<f64> {
        let (e0, e1) = self.energy_range;
        let n = ((e1 - e0) / self.bin_width + 1e-9).floor() as usize + 1;
        (0..n).map(|i| e0 + self.bin_width * i as f64).collect()
    }
}

/// Samples the approach at `n_steps` evenly spaced tip positions.
pub fn synth_trace(config: &SynthConfig) -> Result<Vec<TracePoint>> {
    config.validate()?;
    let (z0, z1) = config.z_range;
    let last = (config.n_steps - 1) as f64;
    Ok((0..config.n_steps)
        .map(|i| {
            let z = if i + 1 == config.n_steps {
                z1
            } else {
                z0 + (z1 - z0) * i as f64 / last
            };
            TracePoint {
                z,
                g: config.conductance_at(z),
            }
        })
        .collect())
}

/// Generates the spectral map of a synthetic approach.
pub fn synth_map(config: &SynthConfig) -> Result<SpectralMap> {
    let trace = synth_trace(config)?;
    let env = NoiseEnvironment::new(config.voltage, config.temperature)?;
    let energies = config.energy_grid();
    let (band_1e, band_2e) = default_bands(config.voltage)?;
    let width_1e = bins_in_band(&energies, &band_1e) as f64 * config.bin_width;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut records = Vec::with_capacity(trace.len());
    for (step, point) in trace.iter().enumerate() {
        // record conductance at the precision the map is written with
        let g = round_sig(point.g).min(config.model.capacity());
        let y = normalized_yield_model(g, &config.model, &env)?;
        let level_1e = config.base_rate * junction_current(g, config.voltage) * y / width_1e;
        let level_2e =
            SHOULDER_LEVEL * (g.min(SHOULDER_SATURATION_G) / SHOULDER_SATURATION_G) * level_1e;
        let mut intensities: Vec<f64> = energies
            .iter()
            .map(|&e| {
                if band_1e.contains(e) {
                    level_1e
                } else if band_2e.contains(e) {
                    level_2e
                } else {
                    0.0
                }
            })
            .collect();
        if config.noise_mode == NoiseMode::Poisson {
            // one-second exposure per spectrum
            for v in intensities.iter_mut() {
                let mean = *v * config.bin_width;
                *v = if mean > 0.0 {
                    let counts: f64 = Poisson::new(mean)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?
                        .sample(&mut rng);
                    counts / config.bin_width
                } else {
                    0.0
                };
            }
        }
        records.push(SpectralRecord {
            step: step as u64,
            displacement_nm: point.z - config.z_range.0,
            conductance: g,
            spectrum: Spectrum::new(energies.clone(), intensities)?,
        });
    }
    SpectralMap::new(records)
}

/// Multiplies every 1e yield by `1 + relative·N(0, 1)`, clamped at zero.
pub fn perturb_yields(curve: &YieldCurve, relative: f64, seed: u64) -> Result<YieldCurve> {
    let normal = Normal::new(0.0, relative).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = curve.clone();
    for p in out.points.iter_mut() {
        p.yield_1e = (p.yield_1e * (1.0 + normal.sample(&mut rng))).max(0.0);
    }
    Ok(out)
}
