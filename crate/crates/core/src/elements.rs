//! Single-photon actions of the interferometer's optical elements.
//!
//! Each element acts on a photon's polarization and adds a group delay.
//! Delays common to both polarizations are gauged to zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::SPEED_OF_LIGHT_NM_PER_FS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flipped(self) -> Polarization {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

/// Orientation of a quartz rod's optic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RodAxis {
    Vertical,
    Horizontal,
}

impl RodAxis {
    pub fn flipped(self) -> RodAxis {
        match self {
            RodAxis::Vertical => RodAxis::Horizontal,
            RodAxis::Horizontal => RodAxis::Vertical,
        }
    }
}

impl fmt::Display for RodAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RodAxis::Vertical => "V",
            RodAxis::Horizontal => "H",
        })
    }
}

/// Quartz group-index difference calibrated so a 20 mm rod delays the slow
/// polarization by 630 fs.
const CALIBRATED_DELAY_FS: f64 = 630.0;
const CALIBRATED_LENGTH_MM: f64 = 20.0;
pub const QUARTZ_GROUP_INDEX_DIFFERENCE: f64 =
    CALIBRATED_DELAY_FS * SPEED_OF_LIGHT_NM_PER_FS / (CALIBRATED_LENGTH_MM * 1.0e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartzRod {
    pub axis: RodAxis,
    /// mm
    pub length: f64,
    pub group_index_difference: f64,
}

impl QuartzRod {
    pub fn new(axis: RodAxis, length_mm: f64) -> QuartzRod {
        QuartzRod {
            axis,
            length: length_mm,
            group_index_difference: QUARTZ_GROUP_INDEX_DIFFERENCE,
        }
    }
}

/// Slow-minus-fast group delay of a rod (fs).
pub fn quartz_group_delay(rod: &QuartzRod) -> Result<f64> {
    if !(rod.length > 0.0) || !rod.length.is_finite() {
        return Err(Error::domain(
            "quartz rod length (mm)",
            "positive",
            rod.length,
        ));
    }
    if !(rod.group_index_difference > 0.0) {
        return Err(Error::domain(
            "group index difference",
            "positive",
            rod.group_index_difference,
        ));
    }
    // length·Δn/c, written relative to the calibration point so the default
    // rod lands on the calibrated delay without rounding
    let scale = rod.group_index_difference / QUARTZ_GROUP_INDEX_DIFFERENCE;
    Ok(rod.length * (CALIBRATED_DELAY_FS / CALIBRATED_LENGTH_MM) * scale)
}

/// `(delay_H, delay_V)` through a rod. The polarization perpendicular to the
/// optic axis is fast.
pub fn rod_delays(rod: &QuartzRod) -> Result<(f64, f64)> {
    let t = quartz_group_delay(rod)?;
    Ok(match rod.axis {
        RodAxis::Vertical => (0.0, t),
        RodAxis::Horizontal => (t, 0.0),
    })
}

/// Half-wave plate at `angle_deg`: H → cos2θ H + sin2θ V, V → sin2θ H − cos2θ V.
///
/// Returns the component that leaves with the flipped polarization
/// (the only one that matters at 45°).
pub fn hwp_action(pol: Polarization, angle_deg: f64) -> (Polarization, f64) {
    let (out, coefficient) = hwp_component(pol, angle_deg)
        .into_iter()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    (out, coefficient)
}

/// Both output components of the half-wave plate, `[(H, c_H), (V, c_V)]`.
pub fn hwp_component(pol: Polarization, angle_deg: f64) -> [(Polarization, f64); 2] {
    let two_theta = (2.0 * angle_deg).to_radians();
    let (s, c) = exact_sin_cos(two_theta, 2.0 * angle_deg);
    match pol {
        Polarization::H => [(Polarization::H, c), (Polarization::V, s)],
        Polarization::V => [(Polarization::H, s), (Polarization::V, -c)],
    }
}

/// sin/cos that return exact zeros and ones on multiples of 90°.
fn exact_sin_cos(radians: f64, degrees: f64) -> (f64, f64) {
    let quarter = degrees / 90.0;
    if quarter.fract() == 0.0 {
        match (quarter as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        radians.sin_cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    A,
    B,
}

/// Polarizing beamsplitter: H transmits with amplitude 1, V reflects with amplitude i.
pub fn pbs_action(input: Arm, pol: Polarization) -> (Port, Complex64) {
    match (input, pol) {
        (Arm::One, Polarization::H) => (Port::B, Complex64::new(1.0, 0.0)),
        (Arm::Two, Polarization::H) => (Port::A, Complex64::new(1.0, 0.0)),
        (Arm::One, Polarization::V) => (Port::A, Complex64::new(0.0, 1.0)),
        (Arm::Two, Polarization::V) => (Port::B, Complex64::new(0.0, 1.0)),
    }
}

/// Amplitude for `pol` to pass a linear polarizer at `theta_deg` from horizontal.
pub fn analyzer_projection(pol: Polarization, theta_deg: f64) -> f64 {
    let (s, c) = exact_sin_cos(theta_deg.to_radians(), theta_deg);
    match pol {
        Polarization::H => c,
        Polarization::V => s,
    }
}

/// The fixed element layout: arm 1 = rod, trombone, HWP; arm 2 = rod;
/// both arms meet at the PBS, each output port has its own analyzer.
///
/// A rod of `None` is absent (zero-length rods in sweeps).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementChain {
    pub rod1: Option<QuartzRod>,
    pub rod2: Option<QuartzRod>,
    /// fs
    pub trombone_delay: f64,
    pub hwp_angle: f64,
    pub analyzer_a: f64,
    pub analyzer_b: f64,
}

impl ElementChain {
    fn rod_delay(rod: &Option<QuartzRod>, pol: Polarization) -> Result<f64> {
        match rod {
            None => Ok(0.0),
            Some(rod) => {
                let (h, v) = rod_delays(rod)?;
                Ok(match pol {
                    Polarization::H => h,
                    Polarization::V => v,
                })
            }
        }
    }

    /// Propagates a photon entering `arm` with polarization `pol` up to the
    /// PBS input: returns `(delay, [(pol_at_pbs, amplitude)])`.
    pub fn before_pbs(
        &self,
        arm: Arm,
        pol: Polarization,
    ) -> Result<(f64, Vec<(Polarization, f64)>)> {
        match arm {
            Arm::One => {
                let delay = Self::rod_delay(&self.rod1, pol)? + self.trombone_delay;
                let out = hwp_component(pol, self.hwp_angle)
                    .into_iter()
                    .filter(|(_, c)| *c != 0.0)
                    .collect();
                Ok((delay, out))
            }
            Arm::Two => Ok((Self::rod_delay(&self.rod2, pol)?, vec![(pol, 1.0)])),
        }
    }

    pub fn analyzer(&self, port: Port) -> f64 {
        match port {
            Port::A => self.analyzer_a,
            Port::B => self.analyzer_b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn calibrated_quartz_delay() {
        let rod = QuartzRod::new(RodAxis::Vertical, 20.0);
        assert_eq!(quartz_group_delay(&rod).unwrap(), 630.0);
        assert_relative_eq!(
            quartz_group_delay(&QuartzRod::new(RodAxis::Vertical, 10.0)).unwrap(),
            315.0,
            max_relative = 1e-14
        );
        assert!(quartz_group_delay(&QuartzRod::new(RodAxis::Vertical, 0.0)).is_err());
        assert!((QUARTZ_GROUP_INDEX_DIFFERENCE - 9.44e-3).abs() < 1e-5);
    }

    #[test]
    fn rod_axis_sets_fast_polarization() {
        let v = QuartzRod::new(RodAxis::Vertical, 20.0);
        let h = QuartzRod::new(RodAxis::Horizontal, 20.0);
        assert_eq!(rod_delays(&v).unwrap(), (0.0, 630.0));
        assert_eq!(rod_delays(&h).unwrap(), (630.0, 0.0));
        let (a, b) = rod_delays(&v).unwrap();
        assert_eq!(rod_delays(&h).unwrap(), (b, a));
    }

    #[test]
    fn half_wave_plate() {
        assert_eq!(hwp_action(Polarization::H, 45.0), (Polarization::V, 1.0));
        assert_eq!(hwp_action(Polarization::V, 45.0), (Polarization::H, 1.0));
        assert_eq!(hwp_action(Polarization::H, 0.0), (Polarization::H, 1.0));
        let [(_, hh), (_, hv)] = hwp_component(Polarization::H, 22.5);
        assert_relative_eq!(hh, FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(hv, FRAC_1_SQRT_2, max_relative = 1e-15);
    }

    #[test]
    fn beamsplitter_routing() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(pbs_action(Arm::One, Polarization::V), (Port::A, i));
        assert_eq!(pbs_action(Arm::One, Polarization::H), (Port::B, one));
        assert_eq!(pbs_action(Arm::Two, Polarization::V), (Port::B, i));
        assert_eq!(pbs_action(Arm::Two, Polarization::H), (Port::A, one));
        for arm in [Arm::One, Arm::Two] {
            for pol in [Polarization::H, Polarization::V] {
                assert_eq!(pbs_action(arm, pol).1.norm_sqr(), 1.0);
            }
        }
    }

    #[test]
    fn analyzer_values() {
        assert_relative_eq!(analyzer_projection(Polarization::V, 45.0), FRAC_1_SQRT_2);
        assert_relative_eq!(analyzer_projection(Polarization::V, -45.0), -FRAC_1_SQRT_2);
        assert_eq!(analyzer_projection(Polarization::H, 0.0), 1.0);
        assert_eq!(analyzer_projection(Polarization::V, 0.0), 0.0);
        assert_eq!(analyzer_projection(Polarization::H, 90.0), 0.0);
    }

    proptest! {
        #[test]
        fn analyzer_is_complete(theta in -90.0f64..90.0) {
            for pol in [Polarization::H, Polarization::V] {
                let a = analyzer_projection(pol, theta);
                let b = analyzer_projection(pol, theta + 90.0);
                prop_assert!((a * a + b * b - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn hwp_is_unitary(theta in -90.0f64..90.0) {
            for pol in [Polarization::H, Polarization::V] {
                let [(_, a), (_, b)] = hwp_component(pol, theta);
                prop_assert!((a * a + b * b - 1.0).abs() < 1e-12);
            }
        }
    }
}
