//! Photon-yield curves and the electron-temperature fit.
//!
//! The yield of a band is its integrated intensity per unit current,
//! `I = g·G0·V`. The 1e yield is normalized by its low-conductance limit so
//! that it reads 1 in the tunneling regime; the 2e yield, which vanishes at low
//! conductance, is normalized to its peak.

use serde::Serialize;

use crate::constants::CONDUCTANCE_QUANTUM;
use crate::error::{Error, Result};
use crate::format::format_sig;
use crate::noise::{normalized_yield_model, NoiseEnvironment};
use crate::spectra::{band_integrate, Band, SpectralMap};
use crate::transport::DecompositionModel;

/// Minimum number of records inside the normalization window.
pub const MIN_WINDOW_POINTS: usize = 3;
/// Only points above this conductance (in G0) enter the temperature fit.
pub const FIT_MIN_CONDUCTANCE: f64 = 0.2;
pub const MIN_FIT_POINTS: usize = 5;
/// Absolute tolerance of the temperature fit, in kelvin.
pub const FIT_TOLERANCE_K: f64 = 1.0;
pub const FIT_MAX_ITERATIONS: usize = 200;

/// Quantum efficiencies corresponding to a yield of 1 in the measurement this
/// toolkit was built around, in photons per electron. Carried as metadata.
pub const QUANTUM_EFFICIENCY_1E: f64 = 3e-6;
pub const QUANTUM_EFFICIENCY_2E: f64 = 3e-7;

const YIELD_HEADER: &str = "conductance_G0,current_A,intensity_1e,intensity_2e,yield_1e,yield_2e";
const CURRENT_TOLERANCE: f64 = 1e-8;

/// Conductance range `[lo, hi]` (G0) over which intensity is taken to be
/// proportional to current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormWindow {
    pub lo: f64,
    pub hi: f64,
}

impl NormWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidBounds { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, g: f64) -> bool {
        g >= self.lo && g <= self.hi
    }
}

impl Default for NormWindow {
    fn default() -> Self {
        Self { lo: 1e-3, hi: 5e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldPoint {
    pub conductance: f64,
    pub current: f64,
    pub intensity_1e: f64,
    pub intensity_2e: f64,
    pub yield_1e: f64,
    pub yield_2e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    pub voltage: f64,
    pub points: Vec<YieldPoint>,
    /// Low-conductance 1e intensity per ampere, counts/s/A.
    pub normalization_1e: f64,
    /// Peak 2e intensity per ampere, counts/s/A.
    pub normalization_2e: f64,
}

/// Ohmic current through the junction, in amperes.
pub fn junction_current(g: f64, voltage: f64) -> f64 {
    g * CONDUCTANCE_QUANTUM * voltage.abs()
}

/// Builds the yield curve of a spectral map.
///
/// The 1e normalization is the `g → 0` intercept of a least-squares line
/// through `intensity / I` against `g` over the window, i.e. the leading
/// coefficient of `intensity = c·I + c'·I²` fitted there.
pub fn yield_curve(
    map: &SpectralMap,
    voltage: f64,
    band_1e: &Band,
    band_2e: &Band,
    window: NormWindow,
) -> Result<YieldCurve> {
    if !(voltage > 0.0 && voltage.is_finite()) {
        return Err(Error::NonPositiveVoltage(voltage));
    }
    let mut raw = Vec::with_capacity(map.len());
    for (index, record) in map.records().iter().enumerate() {
        let g = record.conductance;
        let current = junction_current(g, voltage);
        if current <= 0.0 {
            return Err(Error::ZeroCurrent { index, g });
        }
        let intensity_1e = band_integrate(&record.spectrum, band_1e)?;
        let intensity_2e = band_integrate(&record.spectrum, band_2e)?;
        raw.push((g, current, intensity_1e, intensity_2e));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = raw
        .iter()
        .filter(|p| window.contains(p.0))
        .map(|&(g, i, i1, _)| (g, i1 / i))
        .unzip();
    if xs.len() < MIN_WINDOW_POINTS {
        return Err(Error::InsufficientWindowPoints {
            found: xs.len(),
            required: MIN_WINDOW_POINTS,
        });
    }
    let (normalization_1e, _) = linear_fit(&xs, &ys);
    if normalization_1e.is_nan() || normalization_1e <= 0.0 {
        return Err(Error::NonPositiveNormalization(normalization_1e));
    }
    let normalization_2e = raw.iter().map(|p| p.3 / p.1).fold(0.0, f64::max);

    let points = raw
        .into_iter()
        .map(|(g, current, intensity_1e, intensity_2e)| YieldPoint {
            conductance: g,
            current,
            intensity_1e,
            intensity_2e,
            yield_1e: intensity_1e / current / normalization_1e,
            yield_2e: if normalization_2e > 0.0 {
                intensity_2e / current / normalization_2e
            } else {
                0.0
            },
        })
        .collect();
    Ok(YieldCurve {
        voltage,
        points,
        normalization_1e,
        normalization_2e,
    })
}

/// Least-squares `y = a + b·x`; returns `(a, b)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

impl YieldCurve {
    /// CSV with one row per point, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(YIELD_HEADER);
        out.push('\n');
        for p in &self.points {
            let row = [
                p.conductance,
                p.current,
                p.intensity_1e,
                p.intensity_2e,
                p.yield_1e,
                p.yield_2e,
            ]
            .map(format_sig)
            .join(",");
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Reads a yield-curve CSV taken at `voltage`.
    ///
    /// Currents must match `g·G0·V` to 1e-8 relative, which absorbs the
    /// rounding of both columns. The normalization constants are recovered from
    /// the first point with a positive yield in each band.
    pub fn from_csv(text: &str, voltage: f64) -> Result<Self> {
        if !(voltage > 0.0 && voltage.is_finite()) {
            return Err(Error::NonPositiveVoltage(voltage));
        }
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, header)) if header.trim() == YIELD_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {YIELD_HEADER}"),
                })
            }
        }
        let mut points = Vec::new();
        for (line, row) in lines {
            if row.trim().is_empty() {
                continue;
            }
            let values = row
                .split(',')
                .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::Parse {
                    line,
                    message: "row holds a value that is not a finite decimal".to_string(),
                })?;
            let [g, current, intensity_1e, intensity_2e, yield_1e, yield_2e] = values[..] else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 6 columns, found {}", values.len()),
                });
            };
            if g <= 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("conductance {g} must be positive"),
                });
            }
            if yield_1e < 0.0 || yield_2e < 0.0 || intensity_1e < 0.0 || intensity_2e < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: "negative intensity or yield".to_string(),
                });
            }
            let expected = junction_current(g, voltage);
            if ((current - expected) / expected).abs() > CURRENT_TOLERANCE {
                return Err(Error::Parse {
                    line,
                    message: format!("current {current} A does not match g·G0·V = {expected} A"),
                });
            }
            points.push(YieldPoint {
                conductance: g,
                current,
                intensity_1e,
                intensity_2e,
                yield_1e,
                yield_2e,
            });
        }
        let recover = |intensity: fn(&YieldPoint) -> (f64, f64)| {
            points
                .iter()
                .map(intensity)
                .find(|&(_, y)| y > 0.0)
                .map_or(0.0, |(per_amp, y)| per_amp / y)
        };
        let normalization_1e = recover(|p| (p.intensity_1e / p.current, p.yield_1e));
        let normalization_2e = recover(|p| (p.intensity_2e / p.current, p.yield_2e));
        Ok(Self {
            voltage,
            points,
            normalization_1e,
            normalization_2e,
        })
    }
}

/// A measured 1e yield next to the model prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelComparison {
    pub conductance: f64,
    pub measured: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn compare_to_model(
    curve: &YieldCurve,
    model: &DecompositionModel,
    env: &NoiseEnvironment,
) -> Result<Vec<ModelComparison>> {
    curve
        .points
        .iter()
        .map(|p| {
            let predicted = normalized_yield_model(p.conductance, model, env)?;
            Ok(ModelComparison {
                conductance: p.conductance,
                measured: p.yield_1e,
                predicted,
                residual: p.yield_1e - predicted,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub temperature: f64,
    pub residual_sum_squares: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits the electron temperature to the 1e yields above
/// [`FIT_MIN_CONDUCTANCE`] by golden-section search on `bounds`.
pub fn fit_temperature(
    curve: &YieldCurve,
    model: &DecompositionModel,
    voltage: f64,
    bounds: (f64, f64),
) -> Result<FitResult> {
    let (lo, hi) = bounds;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidBounds { lo, hi });
    }
    if !(voltage > 0.0 && voltage.is_finite()) {
        return Err(Error::NonPositiveVoltage(voltage));
    }
    let data: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.conductance > FIT_MIN_CONDUCTANCE)
        .map(|p| (p.conductance, p.yield_1e))
        .collect();
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientFitPoints {
            found: data.len(),
            required: MIN_FIT_POINTS,
            threshold: FIT_MIN_CONDUCTANCE,
        });
    }
    for &(g, _) in &data {
        model.check_conductance(g)?;
    }

    let objective = |temperature: f64| -> f64 {
        let env =
            NoiseEnvironment::new(voltage, temperature).expect("bounds are positive and finite");
        data.iter()
            .map(|&(g, y)| {
                let predicted = normalized_yield_model(g, model, &env)
                    .expect("conductances checked against model");
                (y - predicted).powi(2)
            })
            .sum()
    };
    let search = golden_section(objective, lo, hi, FIT_TOLERANCE_K, FIT_MAX_ITERATIONS);
    Ok(FitResult {
        temperature: search.x,
        residual_sum_squares: search.fx,
        iterations: search.iterations,
        converged: search.converged,
    })
}

/// Outcome of [`golden_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than
/// `tolerance`. The bracket midpoint is compared against both ends so that a
/// minimum on the boundary is returned exactly.
pub fn golden_section<F>(
    f: F,
    lo: f64,
    hi: f64,
    tolerance: f64,
    max_iterations: usize,
) -> GoldenSection
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > tolerance && iterations < max_iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let converged = b - a <= tolerance;
    let mid = 0.5 * (a + b);
    let (x, fx) = [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))].into_iter().fold(
        (mid, f64::INFINITY),
        |best, cand| if cand.1 < best.1 { cand } else { best },
    );
    GoldenSection {
        x,
        fx,
        iterations,
        converged,
    }
}
