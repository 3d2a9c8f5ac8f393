//! Joint-frequency grids and the double-Gaussian joint spectral amplitude.
//!
//! Frequencies are angular detunings `ν = ω − ω₀` in rad/fs from the
//! degenerate signal frequency. The amplitude model is
//!
//! ```text
//! f(ν₁, ν₂) = N · exp(−(ν₁+ν₂)² τ_p² / 2) · exp(−ν₁² / 4σ₁²) · exp(−ν₂² / 4σ₂²)
//! ```
//!
//! with `σ₁ = ρ σ_f`, `σ₂ = σ_f / ρ`, where `σ_f = 1 / t_c` is derived from the
//! interference-filter coherence time. Slot 1 is the photon travelling in
//! arm 1, slot 2 the photon in arm 2.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792458;

/// Smallest accepted points-per-axis.
pub const MIN_GRID_POINTS: usize = 64;
/// Smallest accepted half-width, in units of the widest marginal sigma.
pub const MIN_SPAN_SIGMA: f64 = 4.0;
/// Largest grid the resolver will grow to.
pub const MAX_GRID_POINTS: usize = 8192;
/// Required Gaussian exponent of the nearest periodic image of every integrand
/// (e^-30 ≈ 1e-13 relative aliasing error).
pub const ALIAS_EXPONENT_MIN: f64 = 30.0;

/// Coherence time `λ² / (c Δλ)` of light passed by a filter of width `fwhm_nm`.
pub fn coherence_time_from_filter(fwhm_nm: f64, center_nm: f64) -> Result<f64> {
    if !(fwhm_nm > 0.0) {
        return Err(Error::domain("filter FWHM (nm)", "positive", fwhm_nm));
    }
    if !(center_nm > 0.0) {
        return Err(Error::domain("filter center (nm)", "positive", center_nm));
    }
    Ok(center_nm * center_nm / (SPEED_OF_LIGHT_NM_PER_FS * fwhm_nm))
}

/// Amplitude spectral width `σ = 1 / t_c`.
///
/// An amplitude spectrum `exp(−ν²/4σ²)` has first-order autocorrelation
/// `exp(−τ²/2t_c²)` under this convention.
pub fn sigma_from_coherence_time(t_c: f64) -> Result<f64> {
    if !(t_c > 0.0) {
        return Err(Error::domain("coherence time (fs)", "positive", t_c));
    }
    Ok(1.0 / t_c)
}

/// Angular frequency (rad/fs) of light with vacuum wavelength `nm`.
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS / wavelength_nm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    /// nm
    pub pump_center_wavelength: f64,
    /// nm
    pub signal_center_wavelength: f64,
    /// fs
    pub pump_coherence_time: f64,
    /// nm
    pub filter_fwhm: f64,
    /// nm
    pub filter_center: f64,
    /// Ratio of the photon-1 to photon-2 marginal sigma.
    pub asymmetry_ratio: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            pump_center_wavelength: 390.0,
            signal_center_wavelength: 780.0,
            pump_coherence_time: 120.0,
            filter_fwhm: 20.0,
            filter_center: 780.0,
            asymmetry_ratio: 1.0,
        }
    }
}

impl SpectralParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pump center wavelength (nm)", self.pump_center_wavelength),
            (
                "signal center wavelength (nm)",
                self.signal_center_wavelength,
            ),
            ("pump coherence time (fs)", self.pump_coherence_time),
            ("filter FWHM (nm)", self.filter_fwhm),
            ("filter center (nm)", self.filter_center),
            ("asymmetry ratio", self.asymmetry_ratio),
        ];
        for (quantity, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(quantity, "positive and finite", value));
            }
        }
        Ok(())
    }

    /// Coherence time of the filtered down-converted light (fs).
    pub fn filter_coherence_time(&self) -> Result<f64> {
        coherence_time_from_filter(self.filter_fwhm, self.filter_center)
    }

    /// Filter amplitude width `σ_f` (rad/fs).
    pub fn filter_sigma(&self) -> Result<f64> {
        sigma_from_coherence_time(self.filter_coherence_time()?)
    }

    /// Per-photon filter widths `(σ₁, σ₂)`.
    pub fn photon_sigmas(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let sigma = self.filter_sigma()?;
        Ok((self.asymmetry_ratio * sigma, sigma / self.asymmetry_ratio))
    }

    /// Width `1/(√2 τ_p)` of the pump envelope in the sum detuning, written in
    /// the same `exp(−x²/4σ²)` convention as the filters.
    pub fn pump_sigma(&self) -> f64 {
        1.0 / (2.0_f64.sqrt() * self.pump_coherence_time)
    }

    /// Quadratic form of `|f|²`, i.e. `|f|² ∝ exp(−νᵀQν)`.
    pub fn intensity_form(&self) -> Result<QuadraticForm> {
        let (s1, s2) = self.photon_sigmas()?;
        let p = self.pump_coherence_time * self.pump_coherence_time;
        let a = 1.0 / (2.0 * s1 * s1);
        let b = 1.0 / (2.0 * s2 * s2);
        Ok(QuadraticForm([[p + a, p], [p, p + b]]))
    }

    /// Quadratic form of `f(ν₁,ν₂)·f(ν₂,ν₁)`, the integrand of the exchange overlap.
    pub fn exchange_form(&self) -> Result<QuadraticForm> {
        let QuadraticForm([[qa, p], [_, qb]]) = self.intensity_form()?;
        let s = 0.5 * ((qa - p) + (qb - p));
        Ok(QuadraticForm([[p + s, p], [p, p + s]]))
    }

    /// Largest standard deviation of the two marginals of `|f|²` (rad/fs).
    pub fn widest_marginal_sigma(&self) -> Result<f64> {
        let form = self.intensity_form()?;
        Ok(form.marginal_std(0).max(form.marginal_std(1)))
    }
}

/// Symmetric positive-definite 2×2 matrix `Q` of a Gaussian `exp(−νᵀQν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm(pub [[f64; 2]; 2]);

impl QuadraticForm {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> QuadraticForm {
        let m = &self.0;
        let det = self.det();
        QuadraticForm([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ])
    }

    pub fn eval(&self, v: [f64; 2]) -> f64 {
        let m = &self.0;
        v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1])
    }

    /// Standard deviation of the normalized density `∝ exp(−νᵀQν)` along `axis`.
    pub fn marginal_std(&self, axis: usize) -> f64 {
        (self.inverse().0[axis][axis] / 2.0).sqrt()
    }

    pub fn swapped(&self) -> QuadraticForm {
        let m = &self.0;
        QuadraticForm([[m[1][1], m[1][0]], [m[0][1], m[0][0]]])
    }

    /// Gaussian exponent of the nearest periodic image produced by sampling
    /// `exp(−νᵀQν + i k·ν)` on a square lattice with period `window` in the
    /// conjugate (time) domain.
    pub fn alias_exponent(&self, window: f64, shift: [f64; 2]) -> f64 {
        let inv = self.inverse();
        let lattice: [[f64; 2]; 8] = [
            [1.0, 0.0],
            [-1.0, 0.0],
            [0.0, 1.0],
            [0.0, -1.0],
            [1.0, 1.0],
            [-1.0, -1.0],
            [1.0, -1.0],
            [-1.0, 1.0],
        ];
        lattice
            .iter()
            .map(|m| {
                let v = [window * m[0] - shift[0], window * m[1] - shift[1]];
                inv.eval(v) / 4.0
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Uniform symmetric grid of detunings shared by both frequency axes.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    /// Degenerate signal angular frequency ω₀ (rad/fs).
    pub center: f64,
    pub span_sigma: f64,
    pub n: usize,
    /// Detunings ν (rad/fs), strictly increasing.
    pub points: Vec<f64>,
    /// Spacing between points (rad/fs).
    pub weight: f64,
}

impl FrequencyGrid {
    fn symmetric(center: f64, span_sigma: f64, half_width: f64, n: usize) -> FrequencyGrid {
        let weight = 2.0 * half_width / (n - 1) as f64;
        let mid = (n - 1) as f64 / 2.0;
        // (j − mid) is exact, so points[n−1−j] == −points[j] bit for bit.
        let points = (0..n).map(|j| (j as f64 - mid) * weight).collect();
        FrequencyGrid {
            center,
            span_sigma,
            n,
            points,
            weight,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.points[self.n - 1]
    }

    /// Period `2π/Δν` of the conjugate time axis (fs).
    pub fn time_window(&self) -> f64 {
        2.0 * PI / self.weight
    }

    /// Same span, different point count.
    pub fn resampled(&self, n: usize) -> Result<FrequencyGrid> {
        check_grid_size(n)?;
        Ok(FrequencyGrid::symmetric(
            self.center,
            self.span_sigma,
            self.half_width(),
            n,
        ))
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < MIN_GRID_POINTS || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "grid needs a power of two ≥ {MIN_GRID_POINTS} points per axis, got {n}"
        )));
    }
    Ok(())
}

/// Grid centered on the signal frequency covering `±span_sigma` widest marginal sigmas.
pub fn build_grid(params: &SpectralParams, n: usize, span_sigma: f64) -> Result<FrequencyGrid> {
    check_grid_size(n)?;
    if !(span_sigma >= MIN_SPAN_SIGMA) || !span_sigma.is_finite() {
        return Err(Error::Config(format!(
            "grid span must be at least {MIN_SPAN_SIGMA} sigma, got {span_sigma}"
        )));
    }
    let sigma = params.widest_marginal_sigma()?;
    Ok(FrequencyGrid::symmetric(
        angular_frequency(params.signal_center_wavelength),
        span_sigma,
        span_sigma * sigma,
        n,
    ))
}

/// Smallest power-of-two grid, no smaller than `min_n`, on which every
/// integrand `f·f` and `f·f_swapped` displaced by the given time shifts is
/// free of periodic-image contamination.
pub fn resolve_grid(
    params: &SpectralParams,
    min_n: usize,
    span_sigma: f64,
    shifts: &[[f64; 2]],
) -> Result<FrequencyGrid> {
    let mut grid = build_grid(params, min_n, span_sigma)?;
    let intensity = params.intensity_form()?;
    let forms = [intensity, intensity.swapped(), params.exchange_form()?];
    let resolved = |g: &FrequencyGrid| {
        let window = g.time_window();
        forms.iter().all(|form| {
            std::iter::once(&[0.0, 0.0])
                .chain(shifts)
                .all(|&k| form.alias_exponent(window, k) >= ALIAS_EXPONENT_MIN)
        })
    };
    while !resolved(&grid) {
        let n = grid.n * 2;
        if n > MAX_GRID_POINTS {
            return Err(Error::Config(format!(
                "resolving this configuration needs more than {MAX_GRID_POINTS} grid points per axis"
            )));
        }
        grid = grid.resampled(n)?;
    }
    Ok(grid)
}

/// Where a joint spectral amplitude came from.
#[derive(Debug, Clone, PartialEq)]
pub enum JsaModel {
    DoubleGaussian(SpectralParams),
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub grid: FrequencyGrid,
    /// `values[[i, j]] = f(points[i], points[j])`.
    pub values: Array2<Complex64>,
    pub model: JsaModel,
}

/// Tolerance on `Σ|f|²w² = 1` for inputs that must be normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

impl JointSpectralAmplitude {
    /// Wraps an arbitrary amplitude table. Not normalized.
    pub fn from_values(grid: FrequencyGrid, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.n, grid.n) {
            return Err(Error::Contract(format!(
                "amplitude table is {:?}, grid has {} points per axis",
                values.dim(),
                grid.n
            )));
        }
        Ok(JointSpectralAmplitude {
            grid,
            values,
            model: JsaModel::Tabulated,
        })
    }

    /// `Σ|f|² w²`
    pub fn norm_sq(&self) -> f64 {
        let w2 = self.grid.weight * self.grid.weight;
        self.values
            .rows()
            .into_iter()
            .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * w2
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sq().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Contract(format!(
                "cannot normalize amplitude with norm {norm}"
            )));
        }
        self.values.mapv_inplace(|v| v / norm);
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "amplitude must be normalized, Σ|f|²w² = {}",
                self.norm_sq()
            )))
        }
    }

    /// `f_swapped(ν₁, ν₂) = f(ν₂, ν₁)` in row-major layout.
    pub fn swapped_values(&self) -> Array2<Complex64> {
        self.values.t().as_standard_layout().into_owned()
    }
}

/// Normalized double-Gaussian amplitude sampled on `grid`.
pub fn gaussian_jsa(
    params: &SpectralParams,
    grid: &FrequencyGrid,
) -> Result<JointSpectralAmplitude> {
    let (s1, s2) = params.photon_sigmas()?;
    let needed = MIN_SPAN_SIGMA * params.widest_marginal_sigma()?;
    if grid.half_width() < needed * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "grid half-width {:.4e} rad/fs does not cover ±{MIN_SPAN_SIGMA} marginal sigma ({needed:.4e} rad/fs)",
            grid.half_width()
        )));
    }
    let tp2 = params.pump_coherence_time * params.pump_coherence_time;
    let c1 = 1.0 / (4.0 * s1 * s1);
    let c2 = 1.0 / (4.0 * s2 * s2);
    let nu = &grid.points;
    let values = Array2::from_shape_fn((grid.n, grid.n), |(i, j)| {
        let (x, y) = (nu[i], nu[j]);
        let sum = x + y;
        Complex64::new(
            (-0.5 * sum * sum * tp2 - x * x * c1 - y * y * c2).exp(),
            0.0,
        )
    });
    let jsa = JointSpectralAmplitude {
        grid: grid.clone(),
        values,
        model: JsaModel::DoubleGaussian(*params),
    };
    jsa.normalize()
}

/// Exchange asymmetry `1 − |⟨f | f_swapped⟩|` of a normalized amplitude.
pub fn jsa_swap_distance(jsa: &JointSpectralAmplitude) -> Result<f64> {
    jsa.require_normalized()?;
    let n = jsa.grid.n;
    let v = &jsa.values;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += v[[i, j]].conj() * v[[j, i]];
        }
        acc += row;
    }
    let overlap = acc.norm() * jsa.grid.weight * jsa.grid.weight;
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_grid(params: &SpectralParams) -> FrequencyGrid {
        build_grid(params, 256, 6.0).unwrap()
    }

    #[test]
    fn filter_coherence_times() {
        let t = coherence_time_from_filter(20.0, 780.0).unwrap();
        assert_relative_eq!(t, 101.4702, epsilon = 1e-3);
        assert!((t - 100.0).abs() < 2.0);
        assert_relative_eq!(coherence_time_from_filter(40.0, 780.0).unwrap(), t / 2.0);
        // 390² / (299.792458 · 10) = 152100 / 2997.92458
        assert_relative_eq!(
            coherence_time_from_filter(10.0, 390.0).unwrap(),
            50.735_099,
            epsilon = 1e-5
        );
        assert!(coherence_time_from_filter(0.0, 780.0).is_err());
        assert!(coherence_time_from_filter(20.0, -1.0).is_err());
    }

    #[test]
    fn sigma_is_inverse_coherence_time() {
        assert_eq!(sigma_from_coherence_time(120.0).unwrap(), 1.0 / 120.0);
        assert_eq!(sigma_from_coherence_time(100.0).unwrap(), 0.01);
        assert!(sigma_from_coherence_time(0.0).is_err());
        assert!(sigma_from_coherence_time(-5.0).is_err());
    }

    #[test]
    fn sigma_convention_matches_sampled_autocorrelation() {
        // |g(τ)| of exp(−ν²/4σ²) sampled finely; find where it falls to e^{-1/2}.
        let t_c = 100.0;
        let sigma = sigma_from_coherence_time(t_c).unwrap();
        let h = sigma / 200.0;
        let nu: Vec<f64> = (-4000..=4000).map(|k| k as f64 * h).collect();
        let power: Vec<f64> = nu
            .iter()
            .map(|x| (-x * x / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = power.iter().sum();
        let g = |tau: f64| -> f64 {
            let re: f64 = nu
                .iter()
                .zip(&power)
                .map(|(x, p)| p * (x * tau).cos())
                .sum();
            let im: f64 = nu
                .iter()
                .zip(&power)
                .map(|(x, p)| p * (x * tau).sin())
                .sum();
            (re * re + im * im).sqrt() / total
        };
        let target = (-0.5f64).exp();
        let (mut lo, mut hi) = (0.0, 10.0 * t_c);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - t_c).abs() / t_c < 0.01, "recovered {lo}");
    }

    #[test]
    fn grid_construction() {
        let params = SpectralParams::default();
        let grid = default_grid(&params);
        let sigma = params.widest_marginal_sigma().unwrap();
        assert_eq!(grid.points.len(), 256);
        assert_relative_eq!(grid.weight, 2.0 * 6.0 * sigma / 255.0, max_relative = 1e-14);
        for j in 0..256 {
            assert_eq!(grid.points[255 - j], -grid.points[j]);
        }
        assert!(grid.points.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(grid.center, angular_frequency(780.0));

        assert!(build_grid(&params, 64, 4.0).is_ok());
        assert!(build_grid(&params, 50, 6.0).is_err());
        assert!(build_grid(&params, 96, 6.0).is_err());
        assert!(build_grid(&params, 256, 3.5).is_err());
    }

    #[test]
    fn symmetric_jsa_is_exactly_symmetric() {
        let params = SpectralParams::default();
        let jsa = gaussian_jsa(&params, &default_grid(&params)).unwrap();
        let max = (&jsa.values - &jsa.swapped_values())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(max <= 1e-12, "{max}");
        assert!(jsa.is_normalized());
    }

    #[test]
    fn difference_marginal_matches_closed_form() {
        // For short-pump + filters, |f|² along ν₋ = ν₁ − ν₂ is Gaussian with
        // variance (Q⁻¹ projected on (1,−1)) / 2; computed by hand for ρ = 1:
        // |f|² = exp(−p u² − a(ν₁² + ν₂²)), u = ν₁+ν₂, ν₁²+ν₂² = (u² + ν₋²)/2,
        // so the ν₋ marginal is ∝ exp(−a ν₋²/2): variance 1/a = 2σ_f².
        let params = SpectralParams::default();
        let grid = default_grid(&params);
        let jsa = gaussian_jsa(&params, &grid).unwrap();
        let sigma_f = params.filter_sigma().unwrap();
        let (mut m2, mut total) = (0.0, 0.0);
        for i in 0..grid.n {
            for j in 0..grid.n {
                let d = grid.points[i] - grid.points[j];
                let p = jsa.values[[i, j]].norm_sqr();
                m2 += d * d * p;
                total += p;
            }
        }
        assert_relative_eq!(m2 / total, 2.0 * sigma_f * sigma_f, max_relative = 1e-6);
    }

    #[test]
    fn continuous_pump_concentrates_on_antidiagonal() {
        let params = SpectralParams {
            pump_coherence_time: 1e5,
            ..SpectralParams::default()
        };
        let grid = default_grid(&params);
        let jsa = gaussian_jsa(&params, &grid).unwrap();
        let w2 = grid.weight * grid.weight;
        let mut off = 0.0;
        for i in 0..grid.n {
            for j in 0..grid.n {
                if i + j != grid.n - 1 {
                    off += jsa.values[[i, j]].norm_sqr() * w2;
                }
            }
        }
        assert!(off < 1e-12, "{off}");
    }

    #[test]
    fn swap_distance_tracks_asymmetry() {
        let distance = |rho: f64| {
            let params = SpectralParams {
                asymmetry_ratio: rho,
                ..SpectralParams::default()
            };
            // a wider span keeps the truncated tail below the comparison tolerance
            let grid = build_grid(&params, 256, 8.0).unwrap();
            jsa_swap_distance(&gaussian_jsa(&params, &grid).unwrap()).unwrap()
        };
        assert!(distance(1.0) < 1e-10);
        let d2 = distance(2.0);
        assert!(d2 > 0.0 && d2 < 1.0);
        // Closed form of the exchange overlap for this model:
        // |⟨f|f_s⟩| = sqrt(det Q0 / det Qx), with Q0, Qx as in `intensity_form`/`exchange_form`
        // written out by hand: Q0 = [[p+a, p],[p, p+b]], Qx = [[p+s, p],[p, p+s]], s = (a+b)/2.
        let sf = SpectralParams::default().filter_sigma().unwrap();
        let p = 120.0f64 * 120.0;
        let (s1, s2) = (2.0 * sf, sf / 2.0);
        let (a, b) = (1.0 / (2.0 * s1 * s1), 1.0 / (2.0 * s2 * s2));
        let s = 0.5 * (a + b);
        let det0 = (p + a) * (p + b) - p * p;
        let detx = (p + s) * (p + s) - p * p;
        assert_relative_eq!(1.0 - d2, (det0 / detx).sqrt(), max_relative = 1e-9);
        assert!(distance(1.5) < d2);
        assert!((distance(0.5) - d2).abs() < 1e-12);
        assert!(distance(3.0) > d2);
    }

    #[test]
    fn swap_distance_of_symmetric_table_is_zero() {
        let params = SpectralParams::default();
        let grid = build_grid(&params, 64, 6.0).unwrap();
        let values = Array2::from_shape_fn((64, 64), |(i, j)| {
            Complex64::new(1.0 / (1.0 + (i + j) as f64), 0.0)
        });
        let jsa = JointSpectralAmplitude::from_values(grid, values)
            .unwrap()
            .normalize()
            .unwrap();
        assert!(jsa_swap_distance(&jsa).unwrap() < 1e-15);
    }

    #[test]
    fn swap_distance_rejects_unnormalized() {
        let params = SpectralParams::default();
        let grid = build_grid(&params, 64, 6.0).unwrap();
        let values = Array2::from_elem((64, 64), Complex64::new(1.0, 0.0));
        let jsa = JointSpectralAmplitude::from_values(grid, values).unwrap();
        assert!(matches!(jsa_swap_distance(&jsa), Err(Error::Contract(_))));
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let narrow = SpectralParams::default();
        let grid = build_grid(&narrow, 64, 4.0).unwrap();
        let wide = SpectralParams {
            asymmetry_ratio: 2.0,
            pump_coherence_time: 10.0,
            ..narrow
        };
        assert!(matches!(gaussian_jsa(&wide, &grid), Err(Error::Config(_))));
    }

    #[test]
    fn resolver_grows_grid_for_long_pump() {
        let short = SpectralParams::default();
        assert_eq!(resolve_grid(&short, 256, 6.0, &[]).unwrap().n, 256);
        let long = SpectralParams {
            pump_coherence_time: 6300.0,
            ..short
        };
        let grid = resolve_grid(&long, 256, 6.0, &[[630.0, 630.0]]).unwrap();
        assert!(grid.n > 256);
        assert!(grid.time_window() > 10.0 * 6300.0);
    }
}
