//! Two-photon Feynman paths and the coincidence amplitude on the joint-frequency grid.
//!
//! A coincidence needs one photon at each PBS output port. For each pair term
//! exactly one route achieves that: both photons reflected (rr) or both
//! transmitted (tt). The coincidence amplitude, indexed by the detuning of the
//! photon at port A (`ν_a`, rows) and port B (`ν_b`, columns), is
//!
//! ```text
//! A(ν_a, ν_b) = Σ_paths c · f(·,·) · exp(i [ν_a δ_a + ν_b δ_b])
//! ```
//!
//! where `f` is evaluated as `f(ν_b, ν_a)` when photon 1 leaves by port B.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::config::ExperimentConfig;
use crate::elements::{analyzer_projection, pbs_action, Arm, Polarization, Port};
use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, JointSpectralAmplitude};

/// Which crystal ray a photon belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ray {
    Ordinary,
    Extraordinary,
}

/// `(|H_o⟩₁|V_e⟩₂ + e^{iφ} |V_e⟩₁|H_o⟩₂) / √2`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub phase: f64,
}

/// One term of the pair state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    /// (polarization, ray) of the photon in arm 1, then arm 2.
    pub photons: [(Polarization, Ray); 2],
    pub weight: Complex64,
}

impl PairState {
    pub fn terms(&self) -> [PairTerm; 2] {
        [
            PairTerm {
                photons: [
                    (Polarization::H, Ray::Ordinary),
                    (Polarization::V, Ray::Extraordinary),
                ],
                weight: Complex64::new(FRAC_1_SQRT_2, 0.0),
            },
            PairTerm {
                photons: [
                    (Polarization::V, Ray::Extraordinary),
                    (Polarization::H, Ray::Ordinary),
                ],
                weight: Complex64::from_polar(FRAC_1_SQRT_2, self.phase),
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathLabel {
    #[serde(rename = "rr")]
    BothReflected,
    #[serde(rename = "tt")]
    BothTransmitted,
}

impl PathLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PathLabel::BothReflected => "rr",
            PathLabel::BothTransmitted => "tt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathAmplitude {
    pub label: PathLabel,
    /// Index of the pair term this path starts from.
    pub term: usize,
    /// Pair weight × HWP × PBS × analyzer factors.
    pub coefficient: Complex64,
    /// Group delay of the photon reaching port A (fs).
    pub delay_a: f64,
    /// Group delay of the photon reaching port B (fs).
    pub delay_b: f64,
    /// Photon 1 exits port B, so the amplitude reads `f(ν_b, ν_a)`.
    pub swapped: bool,
    /// Polarization and ray of the photons as emitted, arm 1 then arm 2.
    pub emitted: [(Polarization, Ray); 2],
}

impl PathAmplitude {
    pub fn delays(&self) -> [f64; 2] {
        [self.delay_a, self.delay_b]
    }
}

/// The coincidence paths for `config`, in pair-term order.
///
/// Terms whose photons can only leave by the same port contribute no path.
pub fn enumerate_paths(config: &ExperimentConfig) -> Result<Vec<PathAmplitude>> {
    let chain = config.chain()?;
    let pair = PairState {
        phase: config.pair_phase,
    };
    let mut paths = Vec::with_capacity(2);
    for (index, term) in pair.terms().iter().enumerate() {
        let [(pol1, _), (pol2, _)] = term.photons;
        let (delay2, _) = chain.before_pbs(Arm::Two, pol2)?;
        let (port2, pbs2) = pbs_action(Arm::Two, pol2);
        let (delay1, components) = chain.before_pbs(Arm::One, pol1)?;
        for (pol1_out, hwp) in components {
            let (port1, pbs1) = pbs_action(Arm::One, pol1_out);
            if port1 == port2 {
                continue;
            }
            let (pol_a, pol_b, delay_a, delay_b) = match port1 {
                Port::A => (pol1_out, pol2, delay1, delay2),
                Port::B => (pol2, pol1_out, delay2, delay1),
            };
            let label = if pol1_out == Polarization::V {
                PathLabel::BothReflected
            } else {
                PathLabel::BothTransmitted
            };
            let coefficient = term.weight
                * hwp
                * pbs1
                * pbs2
                * analyzer_projection(pol_a, chain.analyzer(Port::A))
                * analyzer_projection(pol_b, chain.analyzer(Port::B));
            paths.push(PathAmplitude {
                label,
                term: index,
                coefficient,
                delay_a,
                delay_b,
                swapped: port1 == Port::B,
                emitted: term.photons,
            });
        }
    }
    Ok(paths)
}

/// Pairwise delay differences `δ_p − δ_q` of the paths: the time shifts of
/// their interference terms.
pub fn cross_shifts(paths: &[PathAmplitude]) -> Vec<[f64; 2]> {
    let mut shifts = Vec::new();
    for (p, first) in paths.iter().enumerate() {
        for second in &paths[p + 1..] {
            shifts.push([
                first.delay_a - second.delay_a,
                first.delay_b - second.delay_b,
            ]);
        }
    }
    shifts
}

/// Total rate with interference terms dropped, `Σ|c|²` for a normalized amplitude.
pub fn incoherent_rate(paths: &[PathAmplitude]) -> f64 {
    paths.iter().map(|p| p.coefficient.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceAmplitude {
    pub grid: FrequencyGrid,
    /// `values[[a, b]] = A(points[a], points[b])`.
    pub values: Array2<Complex64>,
}

impl CoincidenceAmplitude {
    pub fn integrated_rate(&self) -> f64 {
        let w2 = self.grid.weight * self.grid.weight;
        row_sums(self.values.view()).iter().sum::<f64>() * w2
    }
}

fn row_sums(values: ArrayView2<Complex64>) -> Vec<f64> {
    values
        .outer_iter()
        .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect()
}

/// Per-path separable phase factors on the grid.
struct PreparedPath {
    row: Vec<Complex64>,
    col: Vec<Complex64>,
    swapped: bool,
}

/// A normalized amplitude and its transpose, ready for repeated path sums.
pub struct PathSum<'a> {
    jsa: &'a JointSpectralAmplitude,
    swapped: Array2<Complex64>,
}

impl<'a> PathSum<'a> {
    pub fn new(jsa: &'a JointSpectralAmplitude) -> Result<Self> {
        jsa.require_normalized()?;
        Ok(PathSum {
            jsa,
            swapped: jsa.swapped_values(),
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.jsa.grid
    }

    fn prepare(&self, paths: &[PathAmplitude]) -> Vec<PreparedPath> {
        let nu = &self.jsa.grid.points;
        paths
            .iter()
            .map(|p| PreparedPath {
                row: nu
                    .iter()
                    .map(|&x| p.coefficient * Complex64::from_polar(1.0, x * p.delay_a))
                    .collect(),
                col: nu
                    .iter()
                    .map(|&x| Complex64::from_polar(1.0, x * p.delay_b))
                    .collect(),
                swapped: p.swapped,
            })
            .collect()
    }

    /// Row `a` of the coincidence amplitude, written into `out`.
    fn fill_row(&self, prepared: &[PreparedPath], a: usize, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for path in prepared {
            let table = if path.swapped {
                self.swapped.row(a)
            } else {
                self.jsa.values.row(a)
            };
            let r = path.row[a];
            for ((o, f), c) in out.iter_mut().zip(table.iter()).zip(&path.col) {
                *o += r * c * f;
            }
        }
    }

    /// `Σ|A|² w²` without materializing `A`.
    pub fn rate(&self, paths: &[PathAmplitude]) -> f64 {
        let prepared = self.prepare(paths);
        let n = self.jsa.grid.n;
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); n],
                |buf, a| {
                    self.fill_row(&prepared, a, buf);
                    buf.iter().map(|v| v.norm_sqr()).sum::<f64>()
                },
            )
            .collect();
        let w = self.jsa.grid.weight;
        rows.iter().sum::<f64>() * w * w
    }

    pub fn amplitude(&self, paths: &[PathAmplitude]) -> CoincidenceAmplitude {
        let prepared = self.prepare(paths);
        let n = self.jsa.grid.n;
        let mut values = Array2::zeros((n, n));
        values
            .outer_iter_mut()
            .into_par_iter()
            .enumerate()
            .for_each(|(a, mut row)| {
                let out = row.as_slice_mut().expect("standard layout");
                self.fill_row(&prepared, a, out);
            });
        CoincidenceAmplitude {
            grid: self.jsa.grid.clone(),
            values,
        }
    }
}

fn check_grid(jsa: &JointSpectralAmplitude, grid: &FrequencyGrid) -> Result<()> {
    if &jsa.grid != grid {
        return Err(Error::Contract(
            "amplitude and path sum use different grids".into(),
        ));
    }
    Ok(())
}

/// Sums the paths into the coincidence amplitude on `grid`.
pub fn assemble_amplitude(
    paths: &[PathAmplitude],
    jsa: &JointSpectralAmplitude,
    grid: &FrequencyGrid,
) -> Result<CoincidenceAmplitude> {
    check_grid(jsa, grid)?;
    Ok(PathSum::new(jsa)?.amplitude(paths))
}

/// Normalized overlap `⟨A₁|A₂⟩ / (‖A₁‖‖A₂‖)` of the two paths' amplitudes.
pub fn path_overlap(
    paths: &[PathAmplitude],
    jsa: &JointSpectralAmplitude,
    grid: &FrequencyGrid,
) -> Result<Complex64> {
    check_grid(jsa, grid)?;
    if paths.len() != 2 {
        return Err(Error::Contract(format!(
            "path overlap needs exactly two paths, got {}",
            paths.len()
        )));
    }
    let sum = PathSum::new(jsa)?;
    let first = sum.amplitude(&paths[..1]).values;
    let second = sum.amplitude(&paths[1..]).values;
    let (mut inner, mut n1, mut n2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for (x, y) in first.outer_iter().zip(second.outer_iter()) {
        let mut row = Complex64::new(0.0, 0.0);
        let (mut r1, mut r2) = (0.0, 0.0);
        for (u, v) in x.iter().zip(y.iter()) {
            row += u.conj() * v;
            r1 += u.norm_sqr();
            r2 += v.norm_sqr();
        }
        inner += row;
        n1 += r1;
        n2 += r2;
    }
    if !(n1 > 0.0) || !(n2 > 0.0) {
        return Err(Error::UndefinedOverlap(format!(
            "path norms are {n1:e} and {n2:e}"
        )));
    }
    Ok(inner / (n1 * n2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::RodAxis;
    use crate::spectral::{build_grid, gaussian_jsa, SpectralParams};
    use approx::assert_relative_eq;

    fn fig3a() -> ExperimentConfig {
        ExperimentConfig::default()
    }

    fn jsa_for(params: &SpectralParams) -> JointSpectralAmplitude {
        gaussian_jsa(params, &build_grid(params, 256, 6.0).unwrap()).unwrap()
    }

    #[test]
    fn fig3a_paths() {
        let paths = enumerate_paths(&fig3a()).unwrap();
        assert_eq!(paths.len(), 2);
        let (rr, tt) = (&paths[0], &paths[1]);
        assert_eq!(rr.label, PathLabel::BothReflected);
        assert_eq!(tt.label, PathLabel::BothTransmitted);
        // (1/√2) · i · i · (1/√2)(1/√2) and (1/√2) · 1 · 1 · (1/√2)(1/√2)
        let quarter = 0.5 * FRAC_1_SQRT_2;
        assert_relative_eq!(rr.coefficient.re, -quarter, max_relative = 1e-15);
        assert_relative_eq!(tt.coefficient.re, quarter, max_relative = 1e-15);
        assert_eq!(rr.coefficient.im, 0.0);
        assert_eq!((rr.delay_a, rr.delay_b, rr.swapped), (0.0, 630.0, false));
        assert_eq!((tt.delay_a, tt.delay_b, tt.swapped), (0.0, 630.0, true));
    }

    #[test]
    fn crossed_analyzer_flips_rr_sign() {
        let dip = enumerate_paths(&fig3a()).unwrap();
        let peak = enumerate_paths(&fig3a().with_analyzers(45.0, -45.0)).unwrap();
        assert_relative_eq!(peak[0].coefficient.re, -dip[0].coefficient.re);
        assert_relative_eq!(peak[1].coefficient.re, dip[1].coefficient.re);
    }

    #[test]
    fn horizontal_analyzers_kill_rr() {
        let paths = enumerate_paths(&fig3a().with_analyzers(0.0, 0.0)).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].coefficient.norm(), 0.0);
        assert!(paths[1].coefficient.norm() > 0.0);
    }

    #[test]
    fn aligned_hwp_leaves_no_coincidence() {
        let config = ExperimentConfig {
            hwp_angle: 0.0,
            ..fig3a()
        };
        assert!(enumerate_paths(&config).unwrap().is_empty());
    }

    #[test]
    fn firing_order_encoding() {
        for d in [-200.0, 0.0, 300.0] {
            let a = enumerate_paths(&fig3a().with_delay(d)).unwrap();
            let b = enumerate_paths(
                &fig3a()
                    .with_rod_axes(RodAxis::Horizontal, RodAxis::Horizontal)
                    .with_delay(d),
            )
            .unwrap();
            if d == 0.0 {
                for p in &a {
                    assert_eq!(p.delay_b - p.delay_a, 630.0);
                }
                for p in &b {
                    assert_eq!(p.delay_a - p.delay_b, 630.0);
                }
            }
            // interference shift is identical in both geometries
            assert_eq!(cross_shifts(&a), cross_shifts(&b));
        }
    }

    #[test]
    fn extraordinary_photon_is_always_vertical() {
        for (q1, q2) in [
            (RodAxis::Vertical, RodAxis::Vertical),
            (RodAxis::Horizontal, RodAxis::Vertical),
        ] {
            for p in enumerate_paths(&fig3a().with_rod_axes(q1, q2)).unwrap() {
                for (pol, ray) in p.emitted {
                    if ray == Ray::Extraordinary {
                        assert_eq!(pol, Polarization::V);
                    }
                }
            }
        }
    }

    #[test]
    fn single_path_rate_is_coefficient_squared() {
        let params = SpectralParams::default();
        let jsa = jsa_for(&params);
        let paths = enumerate_paths(&fig3a()).unwrap();
        let amp = assemble_amplitude(&paths[..1], &jsa, &jsa.grid).unwrap();
        assert_relative_eq!(
            amp.integrated_rate(),
            paths[0].coefficient.norm_sqr(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn identical_paths_add_constructively() {
        let params = SpectralParams::default();
        let jsa = jsa_for(&params);
        let path = enumerate_paths(&fig3a()).unwrap()[1].clone();
        let sum = PathSum::new(&jsa).unwrap();
        let one = sum.rate(std::slice::from_ref(&path));
        let two = sum.rate(&[path.clone(), path.clone()]);
        assert_relative_eq!(two, 4.0 * one, max_relative = 1e-12);
        let overlap = path_overlap(&[path.clone(), path], &jsa, &jsa.grid).unwrap();
        assert_eq!(overlap.norm(), 1.0);
    }

    #[test]
    fn dip_cancels_at_zero_delay() {
        let params = SpectralParams::default();
        let jsa = jsa_for(&params);
        let paths = enumerate_paths(&fig3a()).unwrap();
        let rate = assemble_amplitude(&paths, &jsa, &jsa.grid)
            .unwrap()
            .integrated_rate();
        assert!(rate < 1e-6 * incoherent_rate(&paths), "{rate}");
        let overlap = path_overlap(&paths, &jsa, &jsa.grid).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rate_matches_materialized_amplitude() {
        let params = SpectralParams {
            asymmetry_ratio: 1.7,
            ..SpectralParams::default()
        };
        let jsa = jsa_for(&params);
        let paths = enumerate_paths(&fig3a().with_delay(55.0)).unwrap();
        let fused = PathSum::new(&jsa).unwrap().rate(&paths);
        let explicit = assemble_amplitude(&paths, &jsa, &jsa.grid)
            .unwrap()
            .integrated_rate();
        assert_relative_eq!(fused, explicit, max_relative = 1e-13);
    }

    #[test]
    fn contract_errors() {
        let params = SpectralParams::default();
        let jsa = jsa_for(&params);
        let other = build_grid(&params, 128, 6.0).unwrap();
        let paths = enumerate_paths(&fig3a()).unwrap();
        assert!(matches!(
            assemble_amplitude(&paths, &jsa, &other),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            path_overlap(&paths[..1], &jsa, &jsa.grid),
            Err(Error::Contract(_))
        ));
        let dead = enumerate_paths(&fig3a().with_analyzers(0.0, 0.0)).unwrap();
        assert!(matches!(
            path_overlap(&dead, &jsa, &jsa.grid),
            Err(Error::UndefinedOverlap(_))
        ));
    }
}
