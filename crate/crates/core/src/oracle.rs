//! Closed-form coincidence rate for the double-Gaussian amplitude.
//!
//! In sum/difference coordinates `u = ν_a + ν_b`, `v = ν_a − ν_b` every
//! integrand of `|A|²` is a two-dimensional Gaussian times a linear phase, so
//! each term integrates in closed form. The derivation is written out in
//! `docs/oracle.md`. Nothing here touches the frequency grid.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::pathsum::{enumerate_paths, PathAmplitude};
use crate::spectral::{JointSpectralAmplitude, JsaModel, SpectralParams};

/// What displaces the interference term relative to the direct terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Displacement {
    /// Only the difference frequency carries phase: the pump cannot tell the paths apart.
    Difference,
    /// Only the sum frequency carries phase: the pump envelope separates the paths.
    Sum,
    /// Both.
    Mixed,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleTerms {
    /// `|c_p|²` for each path.
    pub direct: Vec<f64>,
    /// `2 Re[c₁ c₂* G]`, zero with fewer than two paths.
    pub cross: f64,
    /// The Gaussian cross integral `G` (normalized so `|G| ≤ 1`).
    pub overlap: Option<f64>,
    pub displacement: Displacement,
}

impl OracleTerms {
    pub fn rate(&self) -> f64 {
        self.direct.iter().sum::<f64>() + self.cross
    }
}

/// Coefficients of `exp(−A u² − B v² − 2C uv)`.
#[derive(Debug, Clone, Copy)]
struct UvGaussian {
    a: f64,
    b: f64,
    c: f64,
}

impl UvGaussian {
    fn det(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    /// `exp(−(B κ_u² − 2C κ_u κ_v + A κ_v²) / 4 det)`: the Fourier factor of
    /// the phase `exp(i(κ_u u + κ_v v))`.
    fn phase_factor(&self, ku: f64, kv: f64) -> f64 {
        let q = self.b * ku * ku - 2.0 * self.c * ku * kv + self.a * kv * kv;
        (-q / (4.0 * self.det())).exp()
    }
}

/// Model exponents. With `α_i = 1/(4σ_i²)`,
/// `f = exp(−τ_p² u²/2 − [(α₁+α₂)(u²+v²) + 2(α₁−α₂)uv]/4)`.
struct Model {
    pump: f64,
    alpha_sum: f64,
    alpha_diff: f64,
}

impl Model {
    fn new(params: &SpectralParams) -> Result<Model> {
        let (s1, s2) = params.photon_sigmas()?;
        let (a1, a2) = (1.0 / (4.0 * s1 * s1), 1.0 / (4.0 * s2 * s2));
        Ok(Model {
            pump: params.pump_coherence_time * params.pump_coherence_time,
            alpha_sum: a1 + a2,
            alpha_diff: a1 - a2,
        })
    }

    /// Integrand of `F_p F_q*` where `F` is `f` or its transpose.
    fn product(&self, swapped_p: bool, swapped_q: bool) -> UvGaussian {
        let sign = |s: bool| if s { -1.0 } else { 1.0 };
        UvGaussian {
            a: self.pump + 0.5 * self.alpha_sum,
            b: 0.5 * self.alpha_sum,
            c: 0.25 * self.alpha_diff * (sign(swapped_p) + sign(swapped_q)),
        }
    }

    /// `∫ F_p F_q* e^{i k·ν} / ∫ |f|²`.
    fn cross_integral(&self, p: &PathAmplitude, q: &PathAmplitude) -> f64 {
        let k = [p.delay_a - q.delay_a, p.delay_b - q.delay_b];
        // k·ν = κ_u u + κ_v v
        let (ku, kv) = (0.5 * (k[0] + k[1]), 0.5 * (k[0] - k[1]));
        let integrand = self.product(p.swapped, q.swapped);
        let norm = self.product(false, false);
        (norm.det() / integrand.det()).sqrt() * integrand.phase_factor(ku, kv)
    }
}

fn displacement(p: &PathAmplitude, q: &PathAmplitude) -> Displacement {
    let k = [p.delay_a - q.delay_a, p.delay_b - q.delay_b];
    let scale = k[0].abs().max(k[1].abs()).max(1.0);
    let (sum, diff) = (k[0] + k[1], k[0] - k[1]);
    match (sum.abs() > 1e-12 * scale, diff.abs() > 1e-12 * scale) {
        (false, false) => Displacement::None,
        (false, true) => Displacement::Difference,
        (true, false) => Displacement::Sum,
        (true, true) => Displacement::Mixed,
    }
}

/// Closed-form terms of the rate for `paths` under the Gaussian model.
pub fn oracle_terms(params: &SpectralParams, paths: &[PathAmplitude]) -> Result<OracleTerms> {
    let model = Model::new(params)?;
    let direct = paths.iter().map(|p| p.coefficient.norm_sqr()).collect();
    let mut cross = 0.0;
    let mut overlap = None;
    let mut kind = Displacement::None;
    for (i, p) in paths.iter().enumerate() {
        for q in &paths[i + 1..] {
            let g = model.cross_integral(p, q);
            cross += 2.0 * (p.coefficient * q.coefficient.conj() * Complex64::new(g, 0.0)).re;
            overlap = Some(g);
            kind = displacement(p, q);
        }
    }
    Ok(OracleTerms {
        direct,
        cross,
        overlap,
        displacement: kind,
    })
}

/// Closed-form rate for a normalized amplitude of known model.
pub fn rate_for_jsa(jsa: &JointSpectralAmplitude, paths: &[PathAmplitude]) -> Result<f64> {
    match &jsa.model {
        JsaModel::DoubleGaussian(params) => Ok(oracle_terms(params, paths)?.rate()),
        JsaModel::Tabulated => Err(Error::UnsupportedModel),
    }
}

/// Closed-form `R(d)`.
pub fn oracle_rate(config: &ExperimentConfig, delay: f64) -> Result<f64> {
    let paths = enumerate_paths(&config.with_delay(delay))?;
    Ok(oracle_terms(&config.spectral, &paths)?.rate())
}

/// Closed-form visibility: `|cross| / Σ|c|²` at the delay where the
/// interference term is largest.
pub fn oracle_visibility(config: &ExperimentConfig) -> Result<f64> {
    let at = |d: f64| -> Result<OracleTerms> {
        oracle_terms(&config.spectral, &enumerate_paths(&config.with_delay(d))?)
    };
    let baseline: f64 = at(0.0)?.direct.iter().sum();
    if !(baseline > 0.0) {
        return Err(Error::UndefinedVisibility);
    }
    // ln|cross(d)| is quadratic in d; locate its vertex from three samples.
    let probe = 100.0;
    let (c0, cm, cp) = (at(0.0)?.cross, at(-probe)?.cross, at(probe)?.cross);
    if c0 == 0.0 || cm == 0.0 || cp == 0.0 {
        return Ok(c0.abs() / baseline);
    }
    let (l0, lm, lp) = (c0.abs().ln(), cm.abs().ln(), cp.abs().ln());
    let curvature = lp - 2.0 * l0 + lm;
    let best = if curvature < 0.0 {
        -probe * (lp - lm) / (2.0 * curvature)
    } else {
        0.0
    };
    Ok(at(best)?.cross.abs() / baseline)
}
