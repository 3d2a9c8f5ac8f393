//! Coincidence rates, trombone-delay scans, visibility, and joint arrival-time densities.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::pathsum::{cross_shifts, enumerate_paths, incoherent_rate, PathLabel, PathSum};
use crate::spectral::{gaussian_jsa, FrequencyGrid, JointSpectralAmplitude};

/// Default relative deviation below which a scan counts as flat.
pub const FLAT_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Dip,
    Peak,
    Flat,
}

impl ScanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanKind::Dip => "dip",
            ScanKind::Peak => "peak",
            ScanKind::Flat => "flat",
        }
    }
}

/// How visibility is computed from a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum VisibilityEstimator {
    /// dip: (base − min)/base, peak: (max − base)/base.
    #[default]
    BaselineReferenced,
    /// (max − min)/(max + min).
    MaxMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSettings {
    pub d_min: f64,
    pub d_max: f64,
    pub steps: usize,
    /// Rates at |d| above this enter the baseline. `None` uses three widths
    /// (FWHM) of the interference feature estimated from the scan.
    pub wing_threshold: Option<f64>,
    pub flat_threshold: f64,
    pub estimator: VisibilityEstimator,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            d_min: -1500.0,
            d_max: 1500.0,
            steps: 151,
            wing_threshold: None,
            flat_threshold: FLAT_THRESHOLD,
            estimator: VisibilityEstimator::BaselineReferenced,
        }
    }
}

impl ScanSettings {
    pub fn with_range(d_min: f64, d_max: f64, steps: usize) -> ScanSettings {
        ScanSettings {
            d_min,
            d_max,
            steps,
            ..ScanSettings::default()
        }
    }

    pub fn delays(&self) -> Result<Vec<f64>> {
        if !(self.d_min < self.d_max) || !self.d_min.is_finite() || !self.d_max.is_finite() {
            return Err(Error::Config(format!(
                "scan needs d_min < d_max, got {} and {}",
                self.d_min, self.d_max
            )));
        }
        if self.steps < 3 {
            return Err(Error::Config(format!(
                "scan needs at least 3 steps, got {}",
                self.steps
            )));
        }
        let step = (self.d_max - self.d_min) / (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|k| {
                let d = self.d_min + k as f64 * step;
                // land exactly on zero when the range is symmetric
                if d.abs() < 1e-9 * step {
                    0.0
                } else {
                    d
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub delays: Vec<f64>,
    pub rates: Vec<f64>,
    pub baseline: f64,
    pub extremum: f64,
    pub visibility: f64,
    pub kind: ScanKind,
    /// The |d| cut actually used for the baseline.
    pub wing_threshold: f64,
    pub flat_threshold: f64,
    pub estimator: VisibilityEstimator,
}

/// Normalized amplitude for a configuration, on a grid resolved for `delays`.
pub(crate) struct Prepared {
    pub jsa: JointSpectralAmplitude,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig, delays: &[f64], extra: &[[f64; 2]]) -> Result<Self> {
        let mut shifts = extra.to_vec();
        for &d in delays {
            shifts.extend(cross_shifts(&enumerate_paths(&config.with_delay(d))?));
        }
        let grid = config.frequency_grid(&shifts)?;
        Self::on_grid(config, &grid)
    }

    pub fn on_grid(config: &ExperimentConfig, grid: &FrequencyGrid) -> Result<Self> {
        Ok(Prepared {
            jsa: gaussian_jsa(&config.spectral, grid)?,
        })
    }

    pub fn rates(&self, config: &ExperimentConfig, delays: &[f64]) -> Result<Vec<f64>> {
        let sum = PathSum::new(&self.jsa)?;
        let paths = delays
            .iter()
            .map(|&d| enumerate_paths(&config.with_delay(d)))
            .collect::<Result<Vec<_>>>()?;
        Ok(paths.par_iter().map(|p| sum.rate(p)).collect())
    }
}

/// `R(d) = Σ|A(ν_a, ν_b)|² w²` at trombone delay `d`.
pub fn coincidence_rate(config: &ExperimentConfig, delay: f64) -> Result<f64> {
    let prepared = Prepared::new(config, &[delay], &[])?;
    Ok(prepared.rates(config, &[delay])?[0])
}

/// Rates at the given delays, all on one grid.
pub fn rates_at(config: &ExperimentConfig, delays: &[f64]) -> Result<Vec<f64>> {
    Prepared::new(config, delays, &[])?.rates(config, delays)
}

pub fn scan_delay(config: &ExperimentConfig, settings: &ScanSettings) -> Result<ScanResult> {
    let delays = settings.delays()?;
    let rates = rates_at(config, &delays)?;
    analyze_scan(delays, rates, settings)
}

/// Full width at half height of the feature around `center`, in delay units.
fn feature_width(delays: &[f64], deviation: &[f64], center: usize) -> Option<f64> {
    let half = deviation[center].abs() / 2.0;
    if !(half > 0.0) {
        return None;
    }
    let crossing = |from: usize, to: usize| -> f64 {
        let (y0, y1) = (deviation[from].abs(), deviation[to].abs());
        let t = (y0 - half) / (y0 - y1);
        delays[from] + t * (delays[to] - delays[from])
    };
    let right = (center..delays.len() - 1)
        .find(|&k| deviation[k + 1].abs() < half)
        .map(|k| crossing(k, k + 1));
    let left = (1..=center)
        .rev()
        .find(|&k| deviation[k - 1].abs() < half)
        .map(|k| crossing(k, k - 1));
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (Some(l), None) => Some(2.0 * (delays[center] - l)),
        (None, Some(r)) => Some(2.0 * (r - delays[center])),
        (None, None) => None,
    }
}

/// Baseline, classification and visibility of a rate curve.
pub fn analyze_scan(
    delays: Vec<f64>,
    rates: Vec<f64>,
    settings: &ScanSettings,
) -> Result<ScanResult> {
    if delays.len() != rates.len() || delays.len() < 3 {
        return Err(Error::Contract(format!(
            "scan has {} delays and {} rates",
            delays.len(),
            rates.len()
        )));
    }
    if let Some(bad) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::Contract(format!(
            "rate {bad} is negative or not finite"
        )));
    }
    let last = rates.len() - 1;
    let provisional = 0.5 * (rates[0] + rates[last]);
    let deviation: Vec<f64> = rates.iter().map(|r| r - provisional).collect();
    let center = (0..rates.len())
        .max_by(|&a, &b| deviation[a].abs().total_cmp(&deviation[b].abs()))
        .unwrap();

    let wing_threshold = settings
        .wing_threshold
        .unwrap_or_else(|| feature_width(&delays, &deviation, center).map_or(0.0, |w| 3.0 * w));
    let wings: Vec<f64> = delays
        .iter()
        .zip(&rates)
        .filter(|(d, _)| d.abs() > wing_threshold)
        .map(|(_, r)| *r)
        .collect();
    let baseline = if wings.is_empty() {
        provisional
    } else {
        wings.iter().sum::<f64>() / wings.len() as f64
    };
    if !(baseline > 0.0) {
        return Err(Error::UndefinedVisibility);
    }

    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let largest = (max - baseline).abs().max((baseline - min).abs()) / baseline;
    let kind = if largest < settings.flat_threshold {
        ScanKind::Flat
    } else if baseline - min >= max - baseline {
        ScanKind::Dip
    } else {
        ScanKind::Peak
    };
    let extremum = match kind {
        ScanKind::Dip => min,
        ScanKind::Peak => max,
        ScanKind::Flat => {
            if baseline - min >= max - baseline {
                min
            } else {
                max
            }
        }
    };
    let mut result = ScanResult {
        delays,
        rates,
        baseline,
        extremum,
        visibility: 0.0,
        kind,
        wing_threshold,
        flat_threshold: settings.flat_threshold,
        estimator: settings.estimator,
    };
    result.visibility = visibility(&result)?;
    Ok(result)
}

/// Visibility of a scan under its estimator.
pub fn visibility(scan: &ScanResult) -> Result<f64> {
    if !(scan.baseline > 0.0) {
        return Err(Error::UndefinedVisibility);
    }
    Ok(match scan.estimator {
        VisibilityEstimator::BaselineReferenced => match scan.kind {
            ScanKind::Dip => (scan.baseline - scan.extremum) / scan.baseline,
            ScanKind::Peak => (scan.extremum - scan.baseline) / scan.baseline,
            ScanKind::Flat => (scan.extremum - scan.baseline).abs() / scan.baseline,
        },
        VisibilityEstimator::MaxMin => {
            let min = scan.rates.iter().copied().fold(f64::INFINITY, f64::min);
            let max = scan.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (max - min) / (max + min)
        }
    })
}

/// First moments of one density over (t_a, t_b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeMoments {
    pub total: f64,
    pub mean_ta: f64,
    pub mean_tb: f64,
}

impl TimeMoments {
    fn of(times: &[f64], density: &Array2<f64>, dt: f64) -> TimeMoments {
        let (mut total, mut sa, mut sb) = (0.0, 0.0, 0.0);
        for (row, &ta) in density.outer_iter().zip(times) {
            let mut row_total = 0.0;
            let mut row_b = 0.0;
            for (&p, &tb) in row.iter().zip(times) {
                row_total += p;
                row_b += p * tb;
            }
            total += row_total;
            sa += row_total * ta;
            sb += row_b;
        }
        let (mean_ta, mean_tb) = if total > 0.0 {
            (sa / total, sb / total)
        } else {
            (f64::NAN, f64::NAN)
        };
        TimeMoments {
            total: total * dt * dt,
            mean_ta,
            mean_tb,
        }
    }

    /// `⟨t_b⟩ − ⟨t_a⟩`: how long after D2 (port A) detector D1 (port B) fires.
    pub fn firing_delay(&self) -> f64 {
        self.mean_tb - self.mean_ta
    }

    /// Mean pair time `(⟨t_a⟩ + ⟨t_b⟩)/2`.
    pub fn pair_time(&self) -> f64 {
        0.5 * (self.mean_ta + self.mean_tb)
    }
}

#[derive(Debug, Clone)]
pub struct PathDensity {
    pub label: PathLabel,
    pub density: Array2<f64>,
    pub moments: TimeMoments,
}

/// `|A(t_a, t_b)|²` of the coincidence amplitude and of each path alone.
#[derive(Debug, Clone)]
pub struct TimeJointDensity {
    /// Time axis shared by t_a and t_b, centered on zero (fs).
    pub times: Vec<f64>,
    pub spacing: f64,
    pub density: Array2<f64>,
    pub moments: TimeMoments,
    pub paths: Vec<PathDensity>,
    /// Frequency-domain rate of the same amplitude.
    pub frequency_rate: f64,
}

/// Below this fraction of the incoherent total the combined density is
/// treated as empty and moments come from the path mixture.
pub const EMPTY_DENSITY_FRACTION: f64 = 1e-9;

impl TimeJointDensity {
    /// Moments of the incoherent mixture of the path densities.
    pub fn mixture_moments(&self) -> TimeMoments {
        let total: f64 = self.paths.iter().map(|p| p.moments.total).sum();
        let weighted = |f: fn(&TimeMoments) -> f64| {
            self.paths
                .iter()
                .filter(|p| p.moments.total > 0.0)
                .map(|p| p.moments.total * f(&p.moments))
                .sum::<f64>()
                / total
        };
        TimeMoments {
            total,
            mean_ta: weighted(|m| m.mean_ta),
            mean_tb: weighted(|m| m.mean_tb),
        }
    }

    /// `⟨t_b⟩ − ⟨t_a⟩` of the coincidences; at a perfect null, of the
    /// interfering paths instead.
    pub fn firing_delay(&self) -> f64 {
        let mixture = self.mixture_moments();
        if self.moments.total > EMPTY_DENSITY_FRACTION * mixture.total {
            self.moments.firing_delay()
        } else {
            mixture.firing_delay()
        }
    }
}

/// Unitary 2-D transform of a frequency-grid amplitude to (t_a, t_b).
fn to_time_density(values: &Array2<Complex64>, grid: &FrequencyGrid) -> Array2<f64> {
    let n = grid.n;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut work = values.as_standard_layout().into_owned();
    for mut row in work.outer_iter_mut() {
        fft.process(row.as_slice_mut().unwrap());
    }
    let mut cols = work.t().as_standard_layout().into_owned();
    for mut col in cols.outer_iter_mut() {
        fft.process(col.as_slice_mut().unwrap());
    }
    // cols[[b, a]] now holds the transform at FFT indices (a, b); reorder to centered times.
    let scale = grid.weight * grid.weight / (2.0 * PI);
    let half = n / 2;
    Array2::from_shape_fn((n, n), |(ka, kb)| {
        let ia = (ka + n - half) % n;
        let ib = (kb + n - half) % n;
        (cols[[ib, ia]] * scale).norm_sqr()
    })
}

/// Joint arrival-time density at trombone delay `d`.
pub fn arrival_time_joint(config: &ExperimentConfig, delay: f64) -> Result<TimeJointDensity> {
    let at_delay = config.with_delay(delay);
    let paths = enumerate_paths(&at_delay)?;
    // the centered window must hold every path's arrival times
    let extra: Vec<[f64; 2]> = paths
        .iter()
        .map(|p| [2.0 * p.delay_a, 2.0 * p.delay_b])
        .collect();
    let mut timing = at_delay.clone();
    timing.grid.n = timing.grid.n.max(128);
    let prepared = Prepared::new(&timing, &[delay], &extra)?;
    let grid = &prepared.jsa.grid;
    let sum = PathSum::new(&prepared.jsa)?;

    let n = grid.n;
    let spacing = grid.time_window() / n as f64;
    let times: Vec<f64> = (0..n)
        .map(|k| (k as f64 - (n / 2) as f64) * spacing)
        .collect();

    let amplitude = sum.amplitude(&paths);
    let frequency_rate = amplitude.integrated_rate();
    let density = to_time_density(&amplitude.values, grid);
    let moments = TimeMoments::of(&times, &density, spacing);
    let per_path = paths
        .iter()
        .map(|p| {
            let d = to_time_density(&sum.amplitude(std::slice::from_ref(p)).values, grid);
            PathDensity {
                label: p.label,
                moments: TimeMoments::of(&times, &d, spacing),
                density: d,
            }
        })
        .collect();
    Ok(TimeJointDensity {
        times,
        spacing,
        density,
        moments,
        paths: per_path,
        frequency_rate,
    })
}

/// `|R_n − R_2n| / max(R_2n, ε)` for the resolved grid and its doubling.
pub fn refine_check(config: &ExperimentConfig, delay: f64) -> Result<f64> {
    let coarse = Prepared::new(config, &[delay], &[])?;
    let fine_grid = coarse.jsa.grid.resampled(coarse.jsa.grid.n * 2)?;
    let fine = Prepared::on_grid(config, &fine_grid)?;
    let r_coarse = coarse.rates(config, &[delay])?[0];
    let r_fine = fine.rates(config, &[delay])?[0];
    let floor = (1e-12 * incoherent_rate(&enumerate_paths(&config.with_delay(delay))?))
        .max(f64::MIN_POSITIVE);
    Ok((r_coarse - r_fine).abs() / r_fine.max(floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::RodAxis;
    use approx::assert_relative_eq;

    fn fig3a() -> ExperimentConfig {
        ExperimentConfig::default()
    }

    #[test]
    fn delays_hit_zero() {
        let delays = ScanSettings::default().delays().unwrap();
        assert_eq!(delays.len(), 151);
        assert_eq!(delays[75], 0.0);
        assert!(ScanSettings::with_range(1.0, 1.0, 10).delays().is_err());
        assert!(ScanSettings::with_range(-1.0, 1.0, 2).delays().is_err());
    }

    #[test]
    fn dip_and_wings() {
        let config = fig3a();
        let base = 0.25;
        assert!(coincidence_rate(&config, 0.0).unwrap() < 1e-6 * base);
        let left = coincidence_rate(&config, -2000.0).unwrap();
        let right = coincidence_rate(&config, 2000.0).unwrap();
        assert_relative_eq!(left, right, max_relative = 1e-6);
        assert_relative_eq!(left, base, max_relative = 1e-6);
    }

    #[test]
    fn single_path_is_flat() {
        let config = fig3a().with_analyzers(0.0, 0.0);
        let rates = rates_at(&config, &[-800.0, -30.0, 0.0, 450.0]).unwrap();
        for r in &rates {
            assert_relative_eq!(*r, rates[0], max_relative = 1e-9);
        }
        let scan = scan_delay(&config, &ScanSettings::with_range(-500.0, 500.0, 21)).unwrap();
        assert_eq!(scan.kind, ScanKind::Flat);
        assert!(scan.visibility < 1e-9);
    }

    #[test]
    fn visibility_definitions() {
        let delays = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let settings = ScanSettings {
            wing_threshold: Some(1.5),
            ..ScanSettings::default()
        };
        let dip = analyze_scan(delays.clone(), vec![1.0, 1.0, 0.0, 1.0, 1.0], &settings).unwrap();
        assert_eq!((dip.kind, dip.visibility), (ScanKind::Dip, 1.0));
        let peak = analyze_scan(delays.clone(), vec![1.0, 1.0, 2.0, 1.0, 1.0], &settings).unwrap();
        assert_eq!((peak.kind, peak.visibility), (ScanKind::Peak, 1.0));
        let flat = analyze_scan(delays.clone(), vec![1.0; 5], &settings).unwrap();
        assert_eq!((flat.kind, flat.visibility), (ScanKind::Flat, 0.0));
        let zero = analyze_scan(delays.clone(), vec![0.0; 5], &settings);
        assert_eq!(zero.unwrap_err(), Error::UndefinedVisibility);
        let maxmin = ScanSettings {
            estimator: VisibilityEstimator::MaxMin,
            ..settings
        };
        let peak = analyze_scan(delays, vec![1.0, 1.0, 2.0, 1.0, 1.0], &maxmin).unwrap();
        assert_relative_eq!(peak.visibility, 1.0 / 3.0);
    }

    #[test]
    fn default_dip_scan() {
        let scan = scan_delay(&fig3a(), &ScanSettings::default()).unwrap();
        assert_eq!(scan.kind, ScanKind::Dip);
        assert!(scan.visibility >= 0.99, "{}", scan.visibility);
        assert!(scan.wing_threshold > 300.0 && scan.wing_threshold < 1000.0);
    }

    #[test]
    fn arrival_times_separate_by_rod_delay() {
        let peak = fig3a().with_analyzers(45.0, -45.0);
        let density = arrival_time_joint(&peak, 0.0).unwrap();
        assert!((density.firing_delay() - 630.0).abs() < 5.0);
        assert_relative_eq!(
            density.moments.total,
            density.frequency_rate,
            max_relative = 1e-6
        );
        assert!(density.density.iter().all(|&p| p >= 0.0));

        let dip = arrival_time_joint(&fig3a(), 0.0).unwrap();
        assert!((dip.firing_delay() - 630.0).abs() < 5.0);

        let reversed = arrival_time_joint(
            &fig3a().with_rod_axes(RodAxis::Horizontal, RodAxis::Horizontal),
            0.0,
        )
        .unwrap();
        assert!((reversed.firing_delay() + 630.0).abs() < 5.0);
    }

    #[test]
    fn refinement_converges() {
        assert!(refine_check(&fig3a(), 0.0).unwrap() < 1e-6);
        assert!(refine_check(&fig3a(), 120.0).unwrap() < 1e-6);
        let mut coarse = fig3a();
        coarse.grid.n = 64;
        assert!(refine_check(&coarse, 60.0).unwrap() < 1e-3);
    }
}
