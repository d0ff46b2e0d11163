//! Landauer channels and the Fano factor.
//!
//! A quantum conductor is described by the transmission probabilities of its
//! conduction channels. Its conductance in units of `G0` is the sum of the
//! transmissions, and the Fano factor measures how far the shot noise falls
//! below the Schottky value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when comparing a conductance against a model's capacity.
pub const CAPACITY_TOLERANCE: f64 = 1e-12;

/// Saturation of the first channel of a silver single-atom contact.
pub const SINGLE_ATOM_SATURATION: f64 = 0.93;

/// Ordered channel transmissions `T_i`, each in `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChannelSet(Vec<f64>);

impl ChannelSet {
    pub fn new(transmissions: Vec<f64>) -> Result<Self> {
        for (index, &value) in transmissions.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidTransmission { index, value });
            }
        }
        Ok(Self(transmissions))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn transmissions(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dimensionless conductance `g = G/G0 = Σ T_i`.
    pub fn total_transmission(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `Σ T_i (1 - T_i)`, the partition-noise weight.
    pub fn partition_sum(&self) -> f64 {
        self.0.iter().map(|t| t * (1.0 - t)).sum()
    }

    /// `Σ T_i²`.
    pub fn square_sum(&self) -> f64 {
        self.0.iter().map(|t| t * t).sum()
    }

    /// Fano factor `Σ T_i (1 - T_i) / Σ T_i`.
    pub fn fano(&self) -> Result<f64> {
        let g = self.total_transmission();
        if g <= 0.0 {
            return Err(Error::ZeroConductance);
        }
        Ok(self.partition_sum() / g)
    }
}

impl FromStr for ChannelSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelSet::new(parse_decimal_list(s)?)
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.0)
    }
}

pub fn total_transmission(channels: &ChannelSet) -> f64 {
    channels.total_transmission()
}

pub fn fano(channels: &ChannelSet) -> Result<f64> {
    channels.fano()
}

/// Maps a conductance onto channels by filling them in order, each up to its
/// saturation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct DecompositionModel {
    saturations: Vec<f64>,
    description: String,
}

#[derive(Deserialize)]
struct RawModel {
    saturations: Vec<f64>,
    #[serde(default)]
    description: String,
}

impl TryFrom<RawModel> for DecompositionModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        DecompositionModel::new(raw.saturations, raw.description)
    }
}

impl DecompositionModel {
    pub fn new(saturations: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        if saturations.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (index, &value) in saturations.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidSaturation { index, value });
            }
        }
        Ok(Self {
            saturations,
            description: description.into(),
        })
    }

    /// The single-atom silver contact: one channel saturating at 0.93 and a
    /// second, fully openable channel.
    pub fn two_channel() -> Self {
        Self {
            saturations: vec![SINGLE_ATOM_SATURATION, 1.0],
            description: "two-channel single-atom contact".to_string(),
        }
    }

    /// `n` channels saturating at 0.93 followed by one unit channel.
    pub fn atoms(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyModel);
        }
        let mut saturations = vec![SINGLE_ATOM_SATURATION; n];
        saturations.push(1.0);
        Self::new(saturations, format!("{n}-atom contact"))
    }

    pub fn saturations(&self) -> &[f64] {
        &self.saturations
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Largest conductance the model can carry, `Σ s_i`.
    pub fn capacity(&self) -> f64 {
        self.saturations.iter().sum()
    }

    pub fn check_conductance(&self, g: f64) -> Result<()> {
        if g.is_nan() || g < 0.0 {
            return Err(Error::NegativeConductance(g));
        }
        let capacity = self.capacity();
        if g > capacity + CAPACITY_TOLERANCE {
            return Err(Error::CapacityExceeded { g, capacity });
        }
        Ok(())
    }

    /// Sequential filling: channel 1 takes `min(g, s_1)`, the remainder spills
    /// into channel 2 up to `s_2`, and so on. Trailing empty channels are
    /// dropped, so `decompose(0)` is the empty set.
    pub fn decompose(&self, g: f64) -> Result<ChannelSet> {
        self.check_conductance(g)?;
        let mut remaining = g;
        let mut transmissions = Vec::with_capacity(self.saturations.len());
        for &saturation in &self.saturations {
            if remaining <= 0.0 {
                break;
            }
            let take = remaining.min(saturation);
            transmissions.push(take);
            remaining -= take;
        }
        Ok(ChannelSet(transmissions))
    }

    pub fn fano_at(&self, g: f64) -> Result<f64> {
        self.decompose(g)?.fano()
    }
}

impl Default for DecompositionModel {
    fn default() -> Self {
        Self::two_channel()
    }
}

impl FromStr for DecompositionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecompositionModel::new(parse_decimal_list(s)?, format!("saturations {}", s.trim()))
    }
}

impl fmt::Display for DecompositionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.saturations)
    }
}

pub fn decompose(g: f64, model: &DecompositionModel) -> Result<ChannelSet> {
    model.decompose(g)
}

/// Grid spacing for [`fano_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// `n_points` conductances from `g_min` to `g_max` inclusive.
pub fn conductance_grid(
    g_min: f64,
    g_max: f64,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    if !(g_min >= 0.0 && g_min < g_max && g_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "need 0 <= g_min < g_max, got g_min = {g_min}, g_max = {g_max}"
        )));
    }
    let last = (n_points - 1) as f64;
    let grid = match spacing {
        Spacing::Linear => (0..n_points)
            .map(|i| g_min + (g_max - g_min) * i as f64 / last)
            .collect::<Vec<_>>(),
        Spacing::Log => {
            if g_min <= 0.0 {
                return Err(Error::InvalidGrid(
                    "log spacing needs g_min > 0".to_string(),
                ));
            }
            let (lo, hi) = (g_min.ln(), g_max.ln());
            (0..n_points)
                .map(|i| (lo + (hi - lo) * i as f64 / last).exp())
                .collect()
        }
    };
    let mut grid = grid;
    grid[0] = g_min;
    grid[n_points - 1] = g_max;
    Ok(grid)
}

/// Fano factor of the decomposed conductance along a grid of `g`.
pub fn fano_curve(
    model: &DecompositionModel,
    g_min: f64,
    g_max: f64,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<(f64, f64)>> {
    model.check_conductance(g_max)?;
    conductance_grid(g_min, g_max, n_points, spacing)?
        .into_iter()
        .map(|g| Ok((g, model.fano_at(g)?)))
        .collect()
}

pub(crate) fn parse_decimal_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .enumerate()
        .map(|(i, item)| {
            item.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("item {} ({item:?}) is not a decimal number", i + 1),
                })
        })
        .collect()
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}
