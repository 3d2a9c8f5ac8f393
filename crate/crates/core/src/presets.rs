//! Named configurations of the experiment and parameter sweeps over them.

use serde::Serialize;

use crate::config::{ExperimentConfig, NUMERIC_KEYS};
use crate::elements::RodAxis;
use crate::error::{Error, Result};
use crate::scan::{scan_delay, ScanKind, ScanSettings};

pub const PRESET_NAMES: &[&str] = &[
    "fig3a_dip",
    "fig3a_peak",
    "fig3b_dip",
    "fig3b_peak",
    "fig4c",
];

/// Both rods vertical (`fig3a_*`), both horizontal (`fig3b_*`), or crossed
/// (`fig4c`); `*_dip` analyzers at 45°/45°, `*_peak` at 45°/−45°.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    let (qr1, qr2, a2) = match name {
        "fig3a_dip" => (RodAxis::Vertical, RodAxis::Vertical, 45.0),
        "fig3a_peak" => (RodAxis::Vertical, RodAxis::Vertical, -45.0),
        "fig3b_dip" => (RodAxis::Horizontal, RodAxis::Horizontal, 45.0),
        "fig3b_peak" => (RodAxis::Horizontal, RodAxis::Horizontal, -45.0),
        "fig4c" => (RodAxis::Vertical, RodAxis::Horizontal, 45.0),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(base.with_rod_axes(qr1, qr2).with_analyzers(45.0, a2))
}

/// A parameter that sweeps may vary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepAxis(String);

impl SweepAxis {
    pub fn parse(name: &str) -> Result<SweepAxis> {
        let canonical = match name {
            "rho" => "asymmetry_ratio",
            "tau_p" => "pump_coherence_time",
            other => other,
        };
        if NUMERIC_KEYS.contains(&canonical) && canonical != "trombone_delay" {
            Ok(SweepAxis(canonical.to_string()))
        } else {
            Err(Error::UnknownAxis {
                name: name.to_string(),
                valid: NUMERIC_KEYS
                    .iter()
                    .filter(|k| **k != "trombone_delay")
                    .map(|s| s.to_string())
                    .collect(),
            })
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub scan: ScanSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub visibility: f64,
    pub kind: ScanKind,
    pub extremum: f64,
    pub baseline: f64,
}

/// One delay scan per value, rows in input order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    spec.values
        .iter()
        .enumerate()
        .map(|(row, &value)| {
            let point = || -> Result<SweepRow> {
                let mut config = spec.base.clone();
                config.set(spec.axis.name(), value)?;
                let scan = scan_delay(&config, &spec.scan)?;
                Ok(SweepRow {
                    value,
                    visibility: scan.visibility,
                    kind: scan.kind,
                    extremum: scan.extremum,
                    baseline: scan.baseline,
                })
            };
            point().map_err(|source| Error::SweepRow {
                row,
                source: Box::new(source),
            })
        })
        .collect()
}

/// Visibility of `base` scans as the pump coherence time grows.
pub fn pump_coherence_sweep(
    base: &ExperimentConfig,
    coherence_times: &[f64],
    scan: &ScanSettings,
) -> Result<Vec<f64>> {
    if coherence_times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Config(
            "pump coherence times must be positive".into(),
        ));
    }
    if coherence_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "pump coherence times must be ascending".into(),
        ));
    }
    let spec = SweepSpec {
        base: base.clone(),
        axis: SweepAxis::parse("pump_coherence_time")?,
        values: coherence_times.to_vec(),
        scan: *scan,
    };
    Ok(run_sweep(&spec)?
        .into_iter()
        .map(|row| row.visibility)
        .collect())
}
