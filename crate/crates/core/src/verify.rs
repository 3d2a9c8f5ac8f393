//! The invariant suite behind `biphoton verify`.
//!
//! Every check reports its worst observed value against a fixed tolerance.
//! Reports contain no timings, so repeated runs are byte-identical.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::elements::{quartz_group_delay, QuartzRod, RodAxis};
use crate::error::Result;
use crate::oracle::oracle_rate;
use crate::pathsum::{enumerate_paths, incoherent_rate, path_overlap, PathSum};
use crate::presets::{preset, PRESET_NAMES};
use crate::scan::{
    analyze_scan, arrival_time_joint, rates_at, refine_check, scan_delay, ScanKind, ScanSettings,
};
use crate::spectral::{
    build_grid, coherence_time_from_filter, gaussian_jsa, JointSpectralAmplitude,
};

pub const ENGINE_ORACLE_TOL: f64 = 1e-3;
pub const INVARIANT_TOL: f64 = 1e-6;
pub const NORMALIZATION_INVARIANCE_TOL: f64 = 1e-12;
pub const ROD_SWAP_TOL: f64 = 1e-9;
pub const IDEAL_VISIBILITY_MIN: f64 = 0.99;
pub const NO_INTERFERENCE_MAX: f64 = 0.02;
pub const LONG_PUMP_VISIBILITY_MIN: f64 = 0.9;
pub const TIMING_TOL_FS: f64 = 5.0;

/// Lattice of the engine–oracle comparison.
pub const LATTICE_RHO: [f64; 3] = [0.5, 1.0, 2.0];
pub const LATTICE_PUMP_FS: [f64; 3] = [60.0, 120.0, 6300.0];
pub const LATTICE_FILTER_NM: [f64; 3] = [10.0, 20.0, 40.0];
pub const LATTICE_DELAYS: usize = 21;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Force every grid to exactly this many points per axis.
    pub grid_override: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub first_failure: Option<&'static str>,
    pub checks: Vec<CheckOutcome>,
}

/// Relative difference with a floor on the denominator.
pub fn relative_delta(value: f64, reference: f64, floor: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(floor).max(f64::MIN_POSITIVE)
}

struct Suite {
    options: VerifyOptions,
}

enum Bound {
    AtMost,
    AtLeast,
}

impl Suite {
    fn config(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        if let Some(n) = self.options.grid_override {
            config.grid.n = n;
            config.grid.fixed = true;
        }
        config
    }

    fn preset(&self, name: &str) -> Result<ExperimentConfig> {
        Ok(self.config(preset(name)?))
    }

    fn wing_floor(config: &ExperimentConfig) -> Result<f64> {
        Ok(INVARIANT_TOL * incoherent_rate(&enumerate_paths(config)?))
    }

    fn preset_visibility(&self) -> Result<(f64, String)> {
        let mut worst = f64::INFINITY;
        let mut detail = Vec::new();
        for name in ["fig3a_dip", "fig3a_peak", "fig3b_dip", "fig3b_peak"] {
            let scan = scan_delay(&self.preset(name)?, &ScanSettings::default())?;
            let expected = if name.ends_with("dip") {
                ScanKind::Dip
            } else {
                ScanKind::Peak
            };
            let v = if scan.kind == expected {
                scan.visibility
            } else {
                0.0
            };
            worst = worst.min(v);
            detail.push(format!(
                "{name}:{}:{:.6}",
                scan.kind.as_str(),
                scan.visibility
            ));
        }
        Ok((worst, detail.join(" ")))
    }

    fn fig4c_flat(&self) -> Result<(f64, String)> {
        let scan = scan_delay(&self.preset("fig4c")?, &ScanSettings::default())?;
        let v = if scan.kind == ScanKind::Flat {
            scan.visibility
        } else {
            f64::INFINITY
        };
        Ok((
            v,
            format!(
                "kind={} visibility={:.6}",
                scan.kind.as_str(),
                scan.visibility
            ),
        ))
    }

    fn long_pump(&self) -> Result<(f64, String)> {
        let mut config = self.preset("fig4c")?;
        config.spectral.pump_coherence_time = 6300.0;
        let scan = scan_delay(&config, &ScanSettings::default())?;
        Ok((scan.visibility, format!("kind={}", scan.kind.as_str())))
    }

    fn timing(&self) -> Result<(f64, String)> {
        let a = arrival_time_joint(&self.preset("fig3a_dip")?, 0.0)?.firing_delay();
        let b = arrival_time_joint(&self.preset("fig3b_dip")?, 0.0)?.firing_delay();
        let worst = (a - 630.0).abs().max((b + 630.0).abs());
        Ok((worst, format!("fig3a={a:.4} fig3b={b:.4}")))
    }

    fn rod_swap(&self) -> Result<(f64, String)> {
        let delays = ScanSettings::with_range(-1500.0, 1500.0, 31).delays()?;
        let mut worst: f64 = 0.0;
        for name in PRESET_NAMES {
            let config = self.preset(name)?;
            let swapped =
                config.with_rod_axes(config.qr1_axis.flipped(), config.qr2_axis.flipped());
            let floor = ROD_SWAP_TOL * incoherent_rate(&enumerate_paths(&config)?);
            let ra = rates_at(&config, &delays)?;
            let rb = rates_at(&swapped, &delays)?;
            for (x, y) in ra.iter().zip(&rb) {
                worst = worst.max(relative_delta(*y, *x, floor));
            }
        }
        Ok((worst, "all presets, rods flipped".into()))
    }

    fn engine_oracle(&self) -> Result<(f64, String)> {
        let delays = ScanSettings::with_range(-1500.0, 1500.0, LATTICE_DELAYS).delays()?;
        let mut worst: f64 = 0.0;
        let mut at = String::new();
        let mut points = 0usize;
        for name in PRESET_NAMES {
            for rho in LATTICE_RHO {
                for tau in LATTICE_PUMP_FS {
                    for fwhm in LATTICE_FILTER_NM {
                        let mut config = self.preset(name)?;
                        config.spectral.asymmetry_ratio = rho;
                        config.spectral.pump_coherence_time = tau;
                        config.spectral.filter_fwhm = fwhm;
                        let floor = Self::wing_floor(&config)?;
                        let engine = rates_at(&config, &delays)?;
                        for (&d, r) in delays.iter().zip(&engine) {
                            let delta = relative_delta(*r, oracle_rate(&config, d)?, floor);
                            points += 1;
                            if delta > worst {
                                worst = delta;
                                at = format!("{name} rho={rho} tau_p={tau} fwhm={fwhm} d={d}");
                            }
                        }
                    }
                }
            }
        }
        Ok((worst, format!("{points} points, worst at {at}")))
    }

    /// Spread of `values` relative to their mean.
    fn spread(values: &[f64]) -> f64 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values
            .iter()
            .map(|v| (v - mean).abs() / mean)
            .fold(0.0, f64::max)
    }

    fn completeness(&self) -> Result<(f64, String)> {
        let delays = [-600.0, -90.0, -20.0, 0.0, 45.0, 300.0];
        let mut worst: f64 = 0.0;
        for name in ["fig3a_dip", "fig4c"] {
            let base = self.preset(name)?;
            for (t1, t2) in [(45.0, 45.0), (30.0, -20.0), (10.0, 70.0)] {
                let mut totals = vec![0.0; delays.len()];
                for (a1, a2) in [
                    (t1, t2),
                    (t1, t2 + 90.0),
                    (t1 + 90.0, t2),
                    (t1 + 90.0, t2 + 90.0),
                ] {
                    for (t, r) in totals
                        .iter_mut()
                        .zip(rates_at(&base.with_analyzers(a1, a2), &delays)?)
                    {
                        *t += r;
                    }
                }
                worst = worst.max(Self::spread(&totals));
            }
        }
        Ok((worst, "fig3a/fig4c, three analyzer bases".into()))
    }

    fn complementarity(&self) -> Result<(f64, String)> {
        let delays = [-600.0, -90.0, -20.0, 0.0, 45.0, 300.0];
        let mut worst: f64 = 0.0;
        for (dip, peak) in [("fig3a_dip", "fig3a_peak"), ("fig3b_dip", "fig3b_peak")] {
            let a = rates_at(&self.preset(dip)?, &delays)?;
            let b = rates_at(&self.preset(peak)?, &delays)?;
            let sums: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            worst = worst.max(Self::spread(&sums));
        }
        Ok((worst, "45/45 + 45/-45".into()))
    }

    fn parseval(&self) -> Result<(f64, String)> {
        let mut worst: f64 = 0.0;
        for (name, d) in [("fig3a_peak", 0.0), ("fig3b_dip", 40.0), ("fig4c", 100.0)] {
            let density = arrival_time_joint(&self.preset(name)?, d)?;
            worst = worst.max(relative_delta(
                density.moments.total,
                density.frequency_rate,
                f64::MIN_POSITIVE,
            ));
        }
        Ok((worst, "time vs frequency totals".into()))
    }

    fn normalization(&self) -> Result<(f64, String)> {
        let config = self.preset("fig3a_dip")?;
        let mut asym = config.clone();
        asym.spectral.asymmetry_ratio = 1.5;
        let settings = ScanSettings::with_range(-900.0, 900.0, 31);
        let delays = settings.delays()?;
        let mut worst: f64 = 0.0;
        for config in [config, asym] {
            let grid = config.frequency_grid(&[])?;
            let jsa = gaussian_jsa(&config.spectral, &grid)?;
            let scaled =
                JointSpectralAmplitude::from_values(grid.clone(), jsa.values.mapv(|v| v * 37.25))?
                    .normalize()?;
            let floor = NORMALIZATION_INVARIANCE_TOL * incoherent_rate(&enumerate_paths(&config)?);
            let rates = |jsa: &JointSpectralAmplitude| -> Result<Vec<f64>> {
                let sum = PathSum::new(jsa)?;
                delays
                    .iter()
                    .map(|&d| Ok(sum.rate(&enumerate_paths(&config.with_delay(d))?)))
                    .collect()
            };
            let (ra, rb) = (rates(&jsa)?, rates(&scaled)?);
            for (x, y) in ra.iter().zip(&rb) {
                worst = worst.max(relative_delta(*y, *x, floor));
            }
            let sa = analyze_scan(delays.clone(), ra, &settings)?;
            let sb = analyze_scan(delays.clone(), rb, &settings)?;
            if sa.kind != sb.kind {
                worst = f64::INFINITY;
            }
            worst = worst.max((sa.visibility - sb.visibility).abs());
        }
        Ok((worst, "JSA scaled by 37.25 before normalizing".into()))
    }

    fn refinement(&self) -> Result<(f64, String)> {
        let mut worst: f64 = 0.0;
        for name in PRESET_NAMES {
            for d in [0.0, 60.0, 500.0] {
                worst = worst.max(refine_check(&self.preset(name)?, d)?);
            }
        }
        Ok((worst, "all presets at d = 0, 60, 500 fs".into()))
    }

    fn visibility_overlap(&self) -> Result<(f64, String)> {
        let mut worst: f64 = 0.0;
        let mut detail = Vec::new();
        for rho in [1.0, 1.5, 2.0] {
            let mut config = self.preset("fig3a_dip")?;
            config.spectral.asymmetry_ratio = rho;
            let scan = scan_delay(&config, &ScanSettings::default())?;
            let grid = config.frequency_grid(&[])?;
            let jsa = gaussian_jsa(&config.spectral, &grid)?;
            let overlap = path_overlap(&enumerate_paths(&config)?, &jsa, &grid)?.norm();
            worst = worst.max((scan.visibility - overlap).abs());
            detail.push(format!(
                "rho={rho}:V={:.9}:|overlap|={overlap:.9}",
                scan.visibility
            ));
        }
        Ok((worst, detail.join(" ")))
    }

    fn calibration(&self) -> Result<(f64, String)> {
        let t = quartz_group_delay(&QuartzRod::new(RodAxis::Vertical, 20.0))?;
        let tau = coherence_time_from_filter(20.0, 780.0)?;
        Ok((
            (t - 630.0).abs().max(((tau - 100.0).abs() - 2.0).max(0.0)),
            format!("T={t} tau={tau:.4}"),
        ))
    }

    fn convergence_guard(&self) -> Result<()> {
        // An override must still yield a usable grid for the default preset.
        let config = self.preset("fig3a_dip")?;
        build_grid(&config.spectral, config.grid.n, config.grid.span_sigma)?;
        Ok(())
    }
}

/// Runs every check. A check that errors counts as failed.
pub fn run(options: &VerifyOptions) -> VerifyReport {
    let suite = Suite {
        options: options.clone(),
    };
    type Check = fn(&Suite) -> Result<(f64, String)>;
    let checks: [(&'static str, Check, f64, Bound); 13] = [
        (
            "grid_usable",
            |s| s.convergence_guard().map(|_| (0.0, String::new())),
            0.0,
            Bound::AtMost,
        ),
        (
            "calibration_constants",
            Suite::calibration,
            0.0,
            Bound::AtMost,
        ),
        (
            "grid_refinement",
            Suite::refinement,
            INVARIANT_TOL,
            Bound::AtMost,
        ),
        (
            "ideal_dip_peak_visibility",
            Suite::preset_visibility,
            IDEAL_VISIBILITY_MIN,
            Bound::AtLeast,
        ),
        (
            "fig4c_no_interference",
            Suite::fig4c_flat,
            NO_INTERFERENCE_MAX,
            Bound::AtMost,
        ),
        (
            "long_pump_restores_interference",
            Suite::long_pump,
            LONG_PUMP_VISIBILITY_MIN,
            Bound::AtLeast,
        ),
        (
            "arrival_time_separation",
            Suite::timing,
            TIMING_TOL_FS,
            Bound::AtMost,
        ),
        (
            "rod_swap_symmetry",
            Suite::rod_swap,
            ROD_SWAP_TOL,
            Bound::AtMost,
        ),
        (
            "engine_oracle_equivalence",
            Suite::engine_oracle,
            ENGINE_ORACLE_TOL,
            Bound::AtMost,
        ),
        (
            "outcome_completeness",
            Suite::completeness,
            INVARIANT_TOL,
            Bound::AtMost,
        ),
        (
            "dip_peak_complementarity",
            Suite::complementarity,
            INVARIANT_TOL,
            Bound::AtMost,
        ),
        ("parseval", Suite::parseval, INVARIANT_TOL, Bound::AtMost),
        (
            "normalization_invariance",
            Suite::normalization,
            NORMALIZATION_INVARIANCE_TOL,
            Bound::AtMost,
        ),
    ];
    let mut outcomes: Vec<CheckOutcome> = checks
        .into_iter()
        .map(|(name, check, tolerance, bound)| match check(&suite) {
            Ok((value, detail)) => CheckOutcome {
                name,
                passed: match bound {
                    Bound::AtMost => value <= tolerance,
                    Bound::AtLeast => value >= tolerance,
                },
                value,
                tolerance,
                detail,
            },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                value: f64::NAN,
                tolerance,
                detail: e.to_string(),
            },
        })
        .collect();
    // the identity check is last: it reuses nothing but is the slowest to read
    outcomes.push(match suite.visibility_overlap() {
        Ok((value, detail)) => CheckOutcome {
            name: "visibility_overlap_identity",
            passed: value <= INVARIANT_TOL,
            value,
            tolerance: INVARIANT_TOL,
            detail,
        },
        Err(e) => CheckOutcome {
            name: "visibility_overlap_identity",
            passed: false,
            value: f64::NAN,
            tolerance: INVARIANT_TOL,
            detail: e.to_string(),
        },
    });
    let first_failure = outcomes.iter().find(|c| !c.passed).map(|c| c.name);
    VerifyReport {
        passed: first_failure.is_none(),
        first_failure,
        checks: outcomes,
    }
}
