//! Interferometer configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! preset = fig3a_dip        # optional starting point
//! qr1_axis = V
//! analyzer2 = -45
//! pump_coherence_time = 6300
//! ```
//!
//! Keys are the [`ExperimentConfig`] field names, with the spectral fields
//! flattened and the grid fields prefixed `grid_`. Unknown and repeated keys
//! are errors.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::elements::{ElementChain, QuartzRod, RodAxis};
use crate::error::{Error, Result};
use crate::spectral::{build_grid, resolve_grid, FrequencyGrid, SpectralParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Minimum points per axis; the resolver may double it.
    pub n: usize,
    pub span_sigma: f64,
    /// Use exactly `n` points, never growing the grid.
    pub fixed: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 256,
            span_sigma: 6.0,
            fixed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub qr1_axis: RodAxis,
    pub qr2_axis: RodAxis,
    /// mm; 0 removes both rods.
    pub rod_length: f64,
    /// deg
    pub hwp_angle: f64,
    /// Analyzer A1 in front of D1 (deg).
    pub analyzer1: f64,
    /// Analyzer A2 in front of D2 (deg).
    pub analyzer2: f64,
    /// Trombone delay in arm 1 (fs).
    pub trombone_delay: f64,
    pub spectral: SpectralParams,
    pub grid: GridSpec,
    /// Relative phase of the |V⟩₁|H⟩₂ pair term (rad).
    pub pair_phase: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            qr1_axis: RodAxis::Vertical,
            qr2_axis: RodAxis::Vertical,
            rod_length: 20.0,
            hwp_angle: 45.0,
            analyzer1: 45.0,
            analyzer2: 45.0,
            trombone_delay: 0.0,
            spectral: SpectralParams::default(),
            grid: GridSpec::default(),
            pair_phase: 0.0,
        }
    }
}

/// Numeric keys accepted by the file format and by sweeps.
pub const NUMERIC_KEYS: &[&str] = &[
    "rod_length",
    "hwp_angle",
    "analyzer1",
    "analyzer2",
    "trombone_delay",
    "pair_phase",
    "pump_center_wavelength",
    "signal_center_wavelength",
    "pump_coherence_time",
    "filter_fwhm",
    "filter_center",
    "asymmetry_ratio",
    "grid_span_sigma",
];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("hwp_angle", self.hwp_angle),
            ("analyzer1", self.analyzer1),
            ("analyzer2", self.analyzer2),
            ("trombone_delay", self.trombone_delay),
            ("pair_phase", self.pair_phase),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return Err(Error::Config(format!("{key} must be finite, got {value}")));
            }
        }
        if !(self.rod_length >= 0.0) || !self.rod_length.is_finite() {
            return Err(Error::domain(
                "rod_length (mm)",
                "non-negative",
                self.rod_length,
            ));
        }
        self.spectral.validate()
    }

    pub fn with_delay(&self, delay: f64) -> ExperimentConfig {
        ExperimentConfig {
            trombone_delay: delay,
            ..self.clone()
        }
    }

    pub fn with_rod_axes(&self, qr1: RodAxis, qr2: RodAxis) -> ExperimentConfig {
        ExperimentConfig {
            qr1_axis: qr1,
            qr2_axis: qr2,
            ..self.clone()
        }
    }

    pub fn with_analyzers(&self, a1: f64, a2: f64) -> ExperimentConfig {
        ExperimentConfig {
            analyzer1: a1,
            analyzer2: a2,
            ..self.clone()
        }
    }

    /// Element layout. Port A feeds D2 (analyzer A2), port B feeds D1 (analyzer A1).
    pub fn chain(&self) -> Result<ElementChain> {
        self.validate()?;
        let rod = |axis| (self.rod_length > 0.0).then(|| QuartzRod::new(axis, self.rod_length));
        Ok(ElementChain {
            rod1: rod(self.qr1_axis),
            rod2: rod(self.qr2_axis),
            trombone_delay: self.trombone_delay,
            hwp_angle: self.hwp_angle,
            analyzer_a: self.analyzer2,
            analyzer_b: self.analyzer1,
        })
    }

    /// Grid for integrands carrying the given time shifts (fs).
    pub fn frequency_grid(&self, shifts: &[[f64; 2]]) -> Result<FrequencyGrid> {
        self.validate()?;
        if self.grid.fixed {
            build_grid(&self.spectral, self.grid.n, self.grid.span_sigma)
        } else {
            resolve_grid(&self.spectral, self.grid.n, self.grid.span_sigma, shifts)
        }
    }

    /// Sets a numeric parameter by key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "rod_length" => self.rod_length = value,
            "hwp_angle" => self.hwp_angle = value,
            "analyzer1" => self.analyzer1 = value,
            "analyzer2" => self.analyzer2 = value,
            "trombone_delay" => self.trombone_delay = value,
            "pair_phase" => self.pair_phase = value,
            "pump_center_wavelength" => self.spectral.pump_center_wavelength = value,
            "signal_center_wavelength" => self.spectral.signal_center_wavelength = value,
            "pump_coherence_time" => self.spectral.pump_coherence_time = value,
            "filter_fwhm" => self.spectral.filter_fwhm = value,
            "filter_center" => self.spectral.filter_center = value,
            "asymmetry_ratio" => self.spectral.asymmetry_ratio = value,
            "grid_span_sigma" => self.grid.span_sigma = value,
            _ => return Err(Error::Config(format!("unknown numeric key `{key}`"))),
        }
        Ok(())
    }

    /// Parses the `key = value` format, starting from defaults (or `preset`).
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    message: format!("key `{key}` given twice"),
                });
            }
            entries.push((line, key.to_string(), value.to_string()));
        }

        let mut config = match entries.iter().find(|(_, k, _)| k == "preset") {
            Some((line, _, name)) => crate::presets::preset(name).map_err(|e| Error::Parse {
                line: *line,
                message: e.to_string(),
            })?,
            None => ExperimentConfig::default(),
        };

        for (line, key, value) in &entries {
            let line = *line;
            let err = |message: String| Error::Parse { line, message };
            match key.as_str() {
                "preset" => {}
                "qr1_axis" | "qr2_axis" => {
                    let axis = parse_axis(value)
                        .ok_or_else(|| err(format!("`{key}` must be V or H, got `{value}`")))?;
                    if key == "qr1_axis" {
                        config.qr1_axis = axis;
                    } else {
                        config.qr2_axis = axis;
                    }
                }
                "grid_n" => {
                    config.grid.n = value
                        .parse()
                        .map_err(|_| err(format!("`grid_n` must be an integer, got `{value}`")))?;
                }
                "grid_fixed" => {
                    config.grid.fixed = value.parse().map_err(|_| {
                        err(format!("`grid_fixed` must be true or false, got `{value}`"))
                    })?;
                }
                k if NUMERIC_KEYS.contains(&k) => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| err(format!("`{key}` must be a number, got `{value}`")))?;
                    config.set(k, v).map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn parse_axis(value: &str) -> Option<RodAxis> {
    match value.to_ascii_lowercase().as_str() {
        "v" | "vertical" => Some(RodAxis::Vertical),
        "h" | "horizontal" => Some(RodAxis::Horizontal),
        _ => None,
    }
}
