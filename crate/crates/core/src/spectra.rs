//! Luminescence spectra recorded along a tip approach.
//!
//! A [`SpectralMap`] is a series of spectra on one shared, uniform photon
//! energy grid, each tagged with its step index, tip displacement and junction
//! conductance. Maps are read from and written to a CSV layout:
//!
//! ```text
//! step,displacement_nm,conductance_G0,E:1.19,E:1.2,...
//! 0,0,0.001,12.5,13.1,...
//! ```
//!
//! Intensities are in counts·s⁻¹·eV⁻¹.

use crate::error::{Error, Result};
use crate::format::format_sig;

/// Largest deviation from uniform bin spacing accepted, and the slack on band
/// edges when deciding bin membership, in eV.
pub const GRID_TOLERANCE: f64 = 1e-9;

const HEADER_PREFIX: [&str; 3] = ["step", "displacement_nm", "conductance_G0"];
const ENERGY_PREFIX: &str = "E:";

/// Band edges relative to the cutoff energy `eV`.
const BAND_1E_FRACTIONS: (f64, f64) = (0.74375, 0.91875);
const BAND_2E_FRACTIONS: (f64, f64) = (1.0, 1.3);

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energies: Vec<f64>,
    intensities: Vec<f64>,
}

impl Spectrum {
    pub fn new(energies: Vec<f64>, intensities: Vec<f64>) -> Result<Self> {
        validate_grid(&energies)?;
        if intensities.len() != energies.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} intensities for {} energy bins",
                intensities.len(),
                energies.len()
            )));
        }
        if let Some((i, v)) = intensities
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidSpectrum(format!(
                "intensity {v} in bin {i} is negative or not finite"
            )));
        }
        Ok(Self {
            energies,
            intensities,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn bin_width(&self) -> f64 {
        bin_width(&self.energies)
    }

    /// Multiplies every intensity by `factor` (which must be non-negative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Spectrum::new(
            self.energies.clone(),
            self.intensities.iter().map(|v| v * factor).collect(),
        )
    }
}

fn bin_width(energies: &[f64]) -> f64 {
    (energies[energies.len() - 1] - energies[0]) / (energies.len() - 1) as f64
}

/// Checks that `energies` is a strictly ascending, uniform grid of at least
/// two bin centers.
pub fn validate_grid(energies: &[f64]) -> Result<()> {
    if energies.len() < 2 {
        return Err(Error::InvalidSpectrum(
            "energy grid needs at least 2 bins".to_string(),
        ));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidSpectrum(
            "energy grid contains a non-finite value".to_string(),
        ));
    }
    let width = bin_width(energies);
    for (i, pair) in energies.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if step <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "energies not ascending at bin {}",
                i + 1
            )));
        }
        if (step - width).abs() > GRID_TOLERANCE {
            return Err(Error::InvalidSpectrum(format!(
                "energy spacing {step} at bin {} differs from {width}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// A closed photon-energy interval `[lo, hi]` in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidBand { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, energy: f64) -> bool {
        energy >= self.lo - GRID_TOLERANCE && energy <= self.hi + GRID_TOLERANCE
    }
}

/// One spectrum of a map with its position along the approach.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRecord {
    pub step: u64,
    pub displacement_nm: f64,
    pub conductance: f64,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMap {
    records: Vec<SpectralRecord>,
}

impl SpectralMap {
    /// Builds a map, checking that the steps increase and that every spectrum
    /// sits on the grid of the first one.
    pub fn new(records: Vec<SpectralRecord>) -> Result<Self> {
        for (i, pair) in records.windows(2).enumerate() {
            if pair[1].spectrum.energies != pair[0].spectrum.energies {
                return Err(Error::GridMismatch {
                    line: i + 3,
                    message: "energy grid differs from the previous record".to_string(),
                });
            }
            if pair[1].step <= pair[0].step {
                return Err(Error::NonMonotoneStep {
                    line: i + 3,
                    step: pair[1].step,
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[SpectralRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn energies(&self) -> Option<&[f64]> {
        self.records.first().map(|r| r.spectrum.energies())
    }
}

/// Parses the spectral-map CSV layout.
pub fn parse_map(text: &str) -> Result<SpectralMap> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty input".to_string(),
    })?;
    let energies = parse_header(header)?;
    let columns = HEADER_PREFIX.len() + energies.len();

    let mut records: Vec<SpectralRecord> = Vec::new();
    for (line, row) in lines {
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != columns {
            return Err(Error::GridMismatch {
                line,
                message: format!("{} columns, header has {columns}", fields.len()),
            });
        }
        let step: u64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("step {:?} is not a non-negative integer", fields[0]),
        })?;
        let displacement_nm = parse_number(fields[1], line, "displacement_nm")?;
        let conductance = parse_number(fields[2], line, "conductance_G0")?;
        if conductance < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("negative conductance {conductance}"),
            });
        }
        let intensities = fields[3..]
            .iter()
            .map(|f| parse_number(f, line, "intensity"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = intensities.iter().find(|v| **v < 0.0) {
            return Err(Error::Parse {
                line,
                message: format!("negative intensity {v} in row for step {step}"),
            });
        }
        if let Some(prev) = records.last() {
            if step <= prev.step {
                return Err(Error::NonMonotoneStep { line, step });
            }
        }
        let spectrum = Spectrum::new(energies.clone(), intensities).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        records.push(SpectralRecord {
            step,
            displacement_nm,
            conductance,
            spectrum,
        });
    }
    SpectralMap::new(records)
}

fn parse_header(header: &str) -> Result<Vec<f64>> {
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < HEADER_PREFIX.len() || fields[..HEADER_PREFIX.len()] != HEADER_PREFIX {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must start with {}", HEADER_PREFIX.join(",")),
        });
    }
    let energies = fields[HEADER_PREFIX.len()..]
        .iter()
        .map(|f| {
            f.strip_prefix(ENERGY_PREFIX)
                .and_then(|e| e.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("energy column {f:?} is not of the form E:<eV>"),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    validate_grid(&energies).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(energies)
}

fn parse_number(field: &str, line: usize, column: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("{column} {field:?} is not a finite decimal"),
        })
}

/// Writes a map in the CSV layout with 9 significant digits.
pub fn serialize_map(map: &SpectralMap) -> String {
    let mut out = String::new();
    out.push_str(&HEADER_PREFIX.join(","));
    if let Some(energies) = map.energies() {
        for e in energies {
            out.push(',');
            out.push_str(ENERGY_PREFIX);
            out.push_str(&format_sig(*e));
        }
    }
    out.push('\n');
    for r in map.records() {
        out.push_str(&r.step.to_string());
        for v in [r.displacement_nm, r.conductance]
            .iter()
            .chain(r.spectrum.intensities())
        {
            out.push(',');
            out.push_str(&format_sig(*v));
        }
        out.push('\n');
    }
    out
}

/// Rectangle-rule integral of the bins whose centers lie in `band`, in
/// counts/s.
pub fn band_integrate(spectrum: &Spectrum, band: &Band) -> Result<f64> {
    let mut inside = false;
    let mut sum = 0.0;
    for (e, v) in spectrum.energies.iter().zip(&spectrum.intensities) {
        if band.contains(*e) {
            inside = true;
            sum += v;
        }
    }
    if !inside {
        return Err(Error::EmptyBandOverlap {
            lo: band.lo,
            hi: band.hi,
        });
    }
    Ok(sum * spectrum.bin_width())
}

/// Number of grid bins whose centers fall in `band`.
pub fn bins_in_band(energies: &[f64], band: &Band) -> usize {
    energies.iter().filter(|e| band.contains(**e)).count()
}

/// Photon energy `eV` of the quantum cutoff `ν = eV/h`, in eV.
pub fn cutoff_energy_ev(voltage: f64) -> f64 {
    // e·V in electronvolts is numerically V
    voltage.abs()
}

/// The 1e band below the cutoff and the 2e band above it.
///
/// At 1.6 V these are 1.19–1.47 eV and 1.60–2.08 eV; other voltages keep the
/// same fractions of the cutoff energy.
pub fn default_bands(voltage: f64) -> Result<(Band, Band)> {
    if !(voltage > 0.0 && voltage.is_finite()) {
        return Err(Error::NonPositiveVoltage(voltage));
    }
    let cutoff = cutoff_energy_ev(voltage);
    let one = Band::new(cutoff * BAND_1E_FRACTIONS.0, cutoff * BAND_1E_FRACTIONS.1)?;
    let two = Band::new(cutoff * BAND_2E_FRACTIONS.0, cutoff * BAND_2E_FRACTIONS.1)?;
    Ok((one, two))
}

/// Band-integrated intensity of every record, paired with its conductance.
pub fn intensity_trace(map: &SpectralMap, band: &Band) -> Result<Vec<(f64, f64)>> {
    map.records()
        .iter()
        .map(|r| Ok((r.conductance, band_integrate(&r.spectrum, band)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, width: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + width * i as f64).collect()
    }

    const SMALL: &str = "step,displacement_nm,conductance_G0,E:1.2,E:1.3,E:1.4\n\
                         0,0,0.001,1,2,3\n\
                         1,0.01,0.002,4,5,6\n";

    #[test]
    fn parses_small_map() {
        let map = parse_map(SMALL).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map.energies().unwrap(), &[1.2, 1.3, 1.4]);
        assert_eq!(map.records()[1].spectrum.intensities(), &[4.0, 5.0, 6.0]);
        assert_eq!(map.records()[1].conductance, 0.002);
        assert_eq!(serialize_map(&map), SMALL);
    }

    #[test]
    fn negative_intensity_names_the_row() {
        let text = SMALL.replace("4,5,6", "4,-5,6");
        let err = parse_map(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("negative intensity"));
    }

    #[test]
    fn rejects_malformed_maps() {
        assert!(matches!(parse_map(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_map("step,z,conductance_G0,E:1,E:2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        // non-uniform grid
        assert!(parse_map("step,displacement_nm,conductance_G0,E:1,E:2,E:4\n").is_err());
        // column count
        assert!(matches!(
            parse_map(&SMALL.replace("4,5,6", "4,5")),
            Err(Error::GridMismatch { line: 3, .. })
        ));
        // steps
        assert!(matches!(
            parse_map(&SMALL.replace("1,0.01", "0,0.01")),
            Err(Error::NonMonotoneStep { line: 3, step: 0 })
        ));
        assert!(matches!(
            parse_map(&SMALL.replace("0.002", "abc")),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn map_rejects_mixed_grids() {
        let a = Spectrum::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let b = Spectrum::new(vec![1.0, 3.0], vec![0.0, 0.0]).unwrap();
        let rec = |step, spectrum| SpectralRecord {
            step,
            displacement_nm: 0.0,
            conductance: 0.1,
            spectrum,
        };
        assert!(matches!(
            SpectralMap::new(vec![rec(0, a), rec(1, b)]),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![1.0], vec![1.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 1.1], vec![1.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 1.1], vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn flat_band_integral() {
        // 0.01 eV bins; the 1.19..=1.47 band holds 29 bin centers
        let energies = grid(1.0, 0.01, 121);
        let spectrum = Spectrum::new(energies.clone(), vec![100.0; 121]).unwrap();
        let band = Band::new(1.19, 1.47).unwrap();
        assert_eq!(bins_in_band(&energies, &band), 29);
        let total = band_integrate(&spectrum, &band).unwrap();
        assert!((total - 29.0).abs() < 1e-9);

        // bins centered exactly on a 0.28 eV wide band's interior
        let energies = grid(1.195, 0.01, 28);
        let spectrum = Spectrum::new(energies, vec![100.0; 28]).unwrap();
        let total = band_integrate(&spectrum, &Band::new(1.19, 1.47).unwrap()).unwrap();
        assert!((total - 28.0).abs() < 1e-9);
    }

    #[test]
    fn zero_spectrum_integrates_to_zero() {
        let spectrum = Spectrum::new(grid(1.0, 0.01, 50), vec![0.0; 50]).unwrap();
        assert_eq!(
            band_integrate(&spectrum, &Band::new(1.1, 1.3).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn band_outside_grid_is_an_error() {
        let spectrum = Spectrum::new(grid(1.0, 0.01, 50), vec![1.0; 50]).unwrap();
        assert!(matches!(
            band_integrate(&spectrum, &Band::new(2.0, 2.5).unwrap()),
            Err(Error::EmptyBandOverlap { .. })
        ));
    }

    #[test]
    fn band_validation() {
        assert!(Band::new(0.0, 1.0).is_err());
        assert!(Band::new(1.5, 1.2).is_err());
        assert!(Band::new(1.2, 1.2).is_err());
    }

    #[test]
    fn default_bands_at_measurement_voltage() {
        let (one, two) = default_bands(1.6).unwrap();
        for (got, want) in [
            (one.lo(), 1.19),
            (one.hi(), 1.47),
            (two.lo(), 1.6),
            (two.hi(), 2.08),
        ] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(one.hi() < 1.6 && 1.6 <= two.lo());
    }

    #[test]
    fn default_bands_scale_with_voltage() {
        let (one, two) = default_bands(0.8).unwrap();
        for (got, want) in [
            (one.lo(), 0.595),
            (one.hi(), 0.735),
            (two.lo(), 0.8),
            (two.hi(), 1.04),
        ] {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(matches!(
            default_bands(0.0),
            Err(Error::NonPositiveVoltage(_))
        ));
        assert!(default_bands(-1.0).is_err());
    }

    #[test]
    fn intensity_trace_single_record() {
        let text = "step,displacement_nm,conductance_G0,E:1.2,E:1.3,E:1.4\n7,0.1,0.5,10,10,10\n";
        let map = parse_map(text).unwrap();
        let trace = intensity_trace(&map, &Band::new(1.25, 1.45).unwrap()).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].0, 0.5);
        assert!((trace[0].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_trace_scales_linearly() {
        let map = parse_map(SMALL).unwrap();
        let band = Band::new(1.2, 1.35).unwrap();
        let scaled = SpectralMap::new(
            map.records()
                .iter()
                .map(|r| SpectralRecord {
                    spectrum: r.spectrum.scaled(3.5).unwrap(),
                    ..r.clone()
                })
                .collect(),
        )
        .unwrap();
        let a = intensity_trace(&map, &band).unwrap();
        let b = intensity_trace(&scaled, &band).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.0, y.0);
            assert!((3.5 * x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_bands_add_up() {
        let energies = grid(1.0, 0.01, 101);
        let intensities: Vec<f64> = (0..101).map(|i| (i * 7 % 13) as f64).collect();
        let spectrum = Spectrum::new(energies, intensities).unwrap();
        let b1 = Band::new(1.1, 1.3).unwrap();
        let b2 = Band::new(1.31, 1.6).unwrap();
        let union = Band::new(1.1, 1.6).unwrap();
        let sum = band_integrate(&spectrum, &b1).unwrap() + band_integrate(&spectrum, &b2).unwrap();
        assert!((band_integrate(&spectrum, &union).unwrap() - sum).abs() < 1e-9);
    }

    fn spectrum_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(0.0..1e6f64, 40),
            prop::collection::vec(0.0..1e6f64, 40),
        )
    }

    proptest! {
        #[test]
        fn band_integral_is_linear((s1, s2) in spectrum_pair(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
            let energies = grid(1.0, 0.02, 40);
            let mix: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
            let band = Band::new(1.15, 1.5).unwrap();
            let i1 = band_integrate(&Spectrum::new(energies.clone(), s1).unwrap(), &band).unwrap();
            let i2 = band_integrate(&Spectrum::new(energies.clone(), s2).unwrap(), &band).unwrap();
            let im = band_integrate(&Spectrum::new(energies, mix).unwrap(), &band).unwrap();
            prop_assert!(im >= 0.0);
            prop_assert!((im - (a * i1 + b * i2)).abs() <= 1e-9 * (1.0 + im));
        }

        #[test]
        fn default_bands_straddle_cutoff(v in 0.01..10.0f64) {
            let (one, two) = default_bands(v).unwrap();
            prop_assert!(one.hi() < v && v <= two.lo());
        }

        #[test]
        fn serialization_round_trips(
            rows in prop::collection::vec(
                (0.0..1.0f64, 0.0..2.0f64, prop::collection::vec(0.0..1e7f64, 5)),
                1..6,
            ),
            lo_milli in 500u32..2000,
        ) {
            use crate::format::round_sig;
            let energies: Vec<f64> = (0..5).map(|i| round_sig(lo_milli as f64 / 1000.0 + 0.01 * i as f64)).collect();
            let records = rows
                .into_iter()
                .enumerate()
                .map(|(i, (z, g, spec))| SpectralRecord {
                    step: 2 * i as u64,
                    displacement_nm: round_sig(z),
                    conductance: round_sig(g),
                    spectrum: Spectrum::new(energies.clone(), spec.into_iter().map(round_sig).collect()).unwrap(),
                })
                .collect();
            let map = SpectralMap::new(records).unwrap();
            let text = serialize_map(&map);
            let parsed = parse_map(&text).unwrap();
            prop_assert_eq!(&parsed, &map);
            prop_assert_eq!(serialize_map(&parsed), text);
        }
    }
}
