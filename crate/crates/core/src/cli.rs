//! The `shotlight` command line.
//!
//! Data goes to standard output (or `--out`), diagnostics to standard error.
//! Exit codes: 0 on success, 1 on I/O failure, 2 on invalid input.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{fit_temperature, yield_curve, NormWindow, YieldCurve};
use crate::constants::CONDUCTANCE_QUANTUM;
use crate::error::Error;
use crate::format::{format_sig, round_sig};
use crate::noise::{
    mc_fano, normalized_yield, schottky, shot_noise, thermal_noise, NoiseEnvironment,
};
use crate::spectra::{default_bands, parse_map, serialize_map, Band};
use crate::synth::{synth_map, NoiseMode, SynthConfig};
use crate::transport::{fano_curve, parse_decimal_list, ChannelSet, DecompositionModel, Spacing};

#[derive(Debug, Parser)]
#[command(
    name = "shotlight",
    version,
    about = "Shot noise and light emission of atomic point contacts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpacingArg {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    None,
    Poisson,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fano factor of a decomposition model over a conductance grid (CSV).
    FanoCurve {
        /// Channel saturations, comma separated.
        #[arg(long, default_value = "0.93,1.0")]
        saturations: String,
        #[arg(long)]
        g_min: f64,
        #[arg(long)]
        g_max: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long, value_enum, default_value = "log")]
        spacing: SpacingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise densities and normalized yield of a channel set (JSON).
    Noise {
        /// Channel transmissions, comma separated.
        #[arg(long)]
        channels: String,
        /// Bias in volts.
        #[arg(long, allow_hyphen_values = true)]
        voltage: f64,
        /// Electron temperature in kelvin.
        #[arg(long)]
        temperature: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Yield curve of a spectral-map CSV (CSV).
    Analyze {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        voltage: f64,
        /// 1e band as `lo,hi` in eV.
        #[arg(long)]
        band_1e: Option<String>,
        /// 2e band as `lo,hi` in eV.
        #[arg(long)]
        band_2e: Option<String>,
        /// Normalization window as `lo,hi` in G0.
        #[arg(long)]
        norm_window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the electron temperature to a yield-curve CSV (JSON).
    FitTemperature {
        #[arg(long)]
        yields: PathBuf,
        #[arg(long)]
        voltage: f64,
        #[arg(long, default_value = "0.93,1.0")]
        saturations: String,
        /// Lower temperature bound in kelvin.
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        /// Upper temperature bound in kelvin.
        #[arg(long, default_value_t = 10_000.0)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic spectral map (CSV). Flags override the JSON config.
    Simulate {
        /// JSON file with synthesis settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        voltage: Option<f64>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        saturations: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        base_rate: Option<f64>,
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the Fano factor (JSON).
    McFano {
        #[arg(long)]
        channels: String,
        #[arg(long, default_value_t = 1_000_000)]
        attempts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Invalid(_) | CliError::Usage(_) => 2,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::FanoCurve {
            saturations,
            g_min,
            g_max,
            points,
            spacing,
            out,
        } => {
            let model: DecompositionModel = saturations.parse()?;
            let spacing = match spacing {
                SpacingArg::Log => Spacing::Log,
                SpacingArg::Linear => Spacing::Linear,
            };
            let curve = fano_curve(&model, g_min, g_max, points, spacing)?;
            let mut csv = String::from("conductance_G0,fano\n");
            for (g, f) in curve {
                csv.push_str(&format!("{},{}\n", format_sig(g), format_sig(f)));
            }
            emit(out.as_deref(), &csv, stdout)
        }
        Command::Noise {
            channels,
            voltage,
            temperature,
            out,
        } => {
            let channels: ChannelSet = channels.parse()?;
            let env = NoiseEnvironment::new(voltage, temperature)?;
            let fano = channels.fano()?;
            let current = channels.total_transmission() * CONDUCTANCE_QUANTUM * voltage.abs();
            let report = NoiseReport {
                fano: round_sig(fano),
                schottky: round_sig(schottky(current).value()),
                shot_noise: round_sig(shot_noise(&channels, current)?.value()),
                thermal_noise: round_sig(thermal_noise(&channels, &env).value()),
                normalized_yield: match normalized_yield(&channels, &env) {
                    Ok(y) => Some(round_sig(y)),
                    Err(Error::ZeroBias) => None,
                    Err(e) => return Err(e.into()),
                },
            };
            emit(out.as_deref(), &to_json(&report), stdout)
        }
        Command::Analyze {
            map,
            voltage,
            band_1e,
            band_2e,
            norm_window,
            out,
        } => {
            let text = read(&map)?;
            let map = parse_map(&text)?;
            let (default_1e, default_2e) = default_bands(voltage)?;
            let band_1e = band_1e
                .map(|s| parse_band(&s))
                .transpose()?
                .unwrap_or(default_1e);
            let band_2e = band_2e
                .map(|s| parse_band(&s))
                .transpose()?
                .unwrap_or(default_2e);
            let window = match norm_window {
                Some(s) => {
                    let (lo, hi) = parse_pair(&s)?;
                    NormWindow::new(lo, hi)?
                }
                None => NormWindow::default(),
            };
            let curve = yield_curve(&map, voltage, &band_1e, &band_2e, window)?;
            emit(out.as_deref(), &curve.to_csv(), stdout)
        }
        Command::FitTemperature {
            yields,
            voltage,
            saturations,
            t_min,
            t_max,
            out,
        } => {
            let model: DecompositionModel = saturations.parse()?;
            let text = read(&yields)?;
            let curve = YieldCurve::from_csv(&text, voltage)?;
            let fit = fit_temperature(&curve, &model, voltage, (t_min, t_max))?;
            let report = FitReport {
                temperature: round_sig(fit.temperature),
                residual_sum_squares: round_sig(fit.residual_sum_squares),
                iterations: fit.iterations,
                converged: fit.converged,
            };
            emit(out.as_deref(), &to_json(&report), stdout)
        }
        Command::Simulate {
            config,
            voltage,
            temperature,
            saturations,
            steps,
            base_rate,
            noise,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = read(&path)?;
                    serde_json::from_str::<SynthConfig>(&text)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
                }
                None => SynthConfig::default(),
            };
            if let Some(v) = voltage {
                cfg.voltage = v;
            }
            if let Some(t) = temperature {
                cfg.temperature = t;
            }
            if let Some(s) = saturations {
                cfg.model = s.parse()?;
            }
            if let Some(n) = steps {
                cfg.n_steps = n;
            }
            if let Some(r) = base_rate {
                cfg.base_rate = r;
            }
            if let Some(n) = noise {
                cfg.noise_mode = match n {
                    NoiseArg::None => NoiseMode::None,
                    NoiseArg::Poisson => NoiseMode::Poisson,
                };
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let map = synth_map(&cfg)?;
            emit(out.as_deref(), &serialize_map(&map), stdout)
        }
        Command::McFano {
            channels,
            attempts,
            seed,
            out,
        } => {
            let channels: ChannelSet = channels.parse()?;
            let est = mc_fano(&channels, attempts, seed)?;
            let report = McReport {
                estimate: round_sig(est.estimate),
                std_error: round_sig(est.std_error),
                closed_form: round_sig(channels.fano()?),
            };
            emit(out.as_deref(), &to_json(&report), stdout)
        }
    }
}

#[derive(Serialize)]
struct NoiseReport {
    fano: f64,
    schottky: f64,
    shot_noise: f64,
    thermal_noise: f64,
    normalized_yield: Option<f64>,
}

#[derive(Serialize)]
struct FitReport {
    temperature: f64,
    residual_sum_squares: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct McReport {
    estimate: f64,
    std_error: f64,
    closed_form: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    match parse_decimal_list(s)?[..] {
        [lo, hi] => Ok((lo, hi)),
        _ => Err(CliError::Usage(format!("expected `lo,hi`, got {s:?}"))),
    }
}

fn parse_band(s: &str) -> Result<Band, CliError> {
    let (lo, hi) = parse_pair(s)?;
    Ok(Band::new(lo, hi)?)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
