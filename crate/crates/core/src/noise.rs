//! Current-noise spectral densities of a quantum contact.
//!
//! All formulas are symmetric in the bias and use `|V|`. The finite-temperature
//! density is
//!
//! ```text
//! P_T = 2e|V| G0 coth(e|V| / 2kT) Σ T_i (1 - T_i) + 4kT G0 Σ T_i²
//! ```
//!
//! which reduces to the reduced shot noise `F · 2eI` as `T → 0` and to the
//! Johnson–Nyquist value `4kTG` as `V → 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{BOLTZMANN, CONDUCTANCE_QUANTUM, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::transport::{ChannelSet, DecompositionModel};

/// Above this argument `coth` is 1 to double precision.
const COTH_SATURATION: f64 = 20.0;

/// Bias voltage and electron temperature of the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEnvironment {
    voltage: f64,
    temperature: f64,
}

impl NoiseEnvironment {
    pub fn new(voltage: f64, temperature: f64) -> Result<Self> {
        if !voltage.is_finite() {
            return Err(Error::InvalidVoltage(voltage));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidTemperature(temperature));
        }
        Ok(Self {
            voltage,
            temperature,
        })
    }

    pub fn voltage(&self) -> f64 {
        self.voltage
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `2e|V| coth(e|V| / 2kT)` in joules, the factor multiplying
    /// `G0 Σ T_i (1 - T_i)`. Limits: `2e|V|` at `T = 0`, `4kT` at `V = 0`.
    pub fn partition_prefactor(&self) -> f64 {
        let v = self.voltage.abs();
        let t = self.temperature;
        match (v == 0.0, t == 0.0) {
            (true, true) => 0.0,
            (false, true) => 2.0 * ELEMENTARY_CHARGE * v,
            (true, false) => 4.0 * BOLTZMANN * t,
            (false, false) => {
                let x = ELEMENTARY_CHARGE * v / (2.0 * BOLTZMANN * t);
                2.0 * ELEMENTARY_CHARGE * v * coth(x)
            }
        }
    }
}

/// `coth(x)` for `x > 0`, written with `expm1` so small arguments keep their
/// precision.
pub fn coth(x: f64) -> f64 {
    if x > COTH_SATURATION {
        return 1.0;
    }
    let q = (-2.0 * x).exp();
    (1.0 + q) / -(-2.0 * x).exp_m1()
}

/// Current-noise spectral density in A²/Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct NoiseDensity(f64);

impl NoiseDensity {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Full Poissonian shot noise `2e|I|`.
pub fn schottky(current: f64) -> NoiseDensity {
    NoiseDensity(2.0 * ELEMENTARY_CHARGE * current.abs())
}

/// Shot noise reduced by the Fano factor of `channels`.
pub fn shot_noise(channels: &ChannelSet, current: f64) -> Result<NoiseDensity> {
    Ok(NoiseDensity(channels.fano()? * schottky(current).value()))
}

/// Finite-temperature noise density `P_T`.
pub fn thermal_noise(channels: &ChannelSet, env: &NoiseEnvironment) -> NoiseDensity {
    let partition = env.partition_prefactor() * channels.partition_sum();
    let thermal = 4.0 * BOLTZMANN * env.temperature() * channels.square_sum();
    NoiseDensity(CONDUCTANCE_QUANTUM * (partition + thermal))
}

/// `P_T` divided by its low-conductance form `2e|V| coth(e|V|/2kT) G0 g`.
///
/// Tends to 1 as `g → 0` and equals the Fano factor at `T = 0`.
pub fn normalized_yield(channels: &ChannelSet, env: &NoiseEnvironment) -> Result<f64> {
    let g = channels.total_transmission();
    if g <= 0.0 {
        return Err(Error::ZeroConductance);
    }
    let prefactor = env.partition_prefactor();
    if prefactor == 0.0 {
        return Err(Error::ZeroBias);
    }
    let fano = channels.partition_sum() / g;
    let thermal = 4.0 * BOLTZMANN * env.temperature() / prefactor * channels.square_sum() / g;
    Ok(fano + thermal)
}

/// [`normalized_yield`] of the channels a model assigns to conductance `g`.
pub fn normalized_yield_model(
    g: f64,
    model: &DecompositionModel,
    env: &NoiseEnvironment,
) -> Result<f64> {
    normalized_yield(&model.decompose(g)?, env)
}

/// Minimum number of attempts accepted by [`mc_fano`].
pub const MC_MIN_ATTEMPTS: u64 = 1000;
/// Attempts per independently seeded chunk.
pub const MC_CHUNK_SIZE: usize = 1 << 14;
/// Number of equal batches used for the standard error.
pub const MC_BATCHES: usize = 100;

/// Monte Carlo estimate of the Fano factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McFanoEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimates the Fano factor by partitioning electrons at the contact.
///
/// Each attempt sends one electron at every channel; channel `i` transmits it
/// with probability `T_i`. The estimate is the ratio of the unbiased sample
/// variance to the sample mean of the per-attempt transmitted count. Attempts
/// are generated in chunks of [`MC_CHUNK_SIZE`] seeded with
/// `seed + chunk_index`, so the result does not depend on the thread count.
pub fn mc_fano(channels: &ChannelSet, attempts: u64, seed: u64) -> Result<McFanoEstimate> {
    if attempts < MC_MIN_ATTEMPTS {
        return Err(Error::TooFewAttempts {
            got: attempts,
            min: MC_MIN_ATTEMPTS,
        });
    }
    if channels.total_transmission() <= 0.0 {
        return Err(Error::ZeroConductance);
    }
    let transmissions = channels.transmissions();
    let mut counts = vec![0u32; attempts as usize];
    counts
        .par_chunks_mut(MC_CHUNK_SIZE)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk as u64));
            for n in out.iter_mut() {
                let mut transmitted = 0;
                for &t in transmissions {
                    if rng.random::<f64>() < t {
                        transmitted += 1;
                    }
                }
                *n = transmitted;
            }
        });

    let estimate = variance_to_mean(&counts);
    let batch_len = counts.len() / MC_BATCHES;
    let batch_estimates: Vec<f64> = counts
        .chunks_exact(batch_len)
        .take(MC_BATCHES)
        .map(variance_to_mean)
        .filter(|f| f.is_finite())
        .collect();
    let std_error = standard_error(&batch_estimates);
    Ok(McFanoEstimate {
        estimate,
        std_error,
    })
}

fn variance_to_mean(counts: &[u32]) -> f64 {
    let n = counts.len() as f64;
    let (sum, sum_sq) = counts.iter().fold((0u64, 0u64), |(s, q), &c| {
        let c = u64::from(c);
        (s + c, q + c * c)
    });
    let mean = sum as f64 / n;
    let variance = (sum_sq as f64 - sum as f64 * mean) / (n - 1.0);
    variance.max(0.0) / mean
}

fn standard_error(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}
