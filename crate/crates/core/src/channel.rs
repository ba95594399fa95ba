//! Propagation models: distance and angular frequency to a complex channel
//! transfer coefficient.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// A reciprocal point-to-point channel between isotropic antennas.
pub trait ChannelModel: Sync {
    /// Complex transfer coefficient at distance `distance` (m) and angular
    /// frequency `omega` (rad/s).
    fn transfer(&self, distance: f64, omega: f64) -> Result<Complex64>;

    /// True when `|transfer(d, omega)|` does not depend on `omega`.
    fn is_amplitude_flat(&self) -> bool;
}

/// Free-space line-of-sight propagation: `sqrt(beta(d)) * exp(-j omega d / c)`
/// with `beta(d) = lambda^2 / ((4 pi)^2 d^2)`.
///
/// No near-field correction is applied, so `beta` exceeds one for distances
/// below `lambda / (4 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpaceChannel {
    carrier_frequency: f64,
    speed_of_light: f64,
}

impl FreeSpaceChannel {
    pub fn new(carrier_frequency: f64) -> Result<Self> {
        Self::with_speed_of_light(carrier_frequency, SPEED_OF_LIGHT)
    }

    pub fn with_speed_of_light(carrier_frequency: f64, speed_of_light: f64) -> Result<Self> {
        if !(carrier_frequency > 0.0) || !carrier_frequency.is_finite() {
            return Err(Error::Config(format!(
                "carrier frequency must be positive and finite, got {carrier_frequency}"
            )));
        }
        if !(speed_of_light > 0.0) || !speed_of_light.is_finite() {
            return Err(Error::Config(format!(
                "speed of light must be positive and finite, got {speed_of_light}"
            )));
        }
        Ok(Self { carrier_frequency, speed_of_light })
    }

    /// Builds the model for a given wavelength rather than carrier.
    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::Config(format!("wavelength must be positive, got {wavelength}")));
        }
        Self::new(SPEED_OF_LIGHT / wavelength)
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn speed_of_light(&self) -> f64 {
        self.speed_of_light
    }

    pub fn wavelength(&self) -> f64 {
        self.speed_of_light / self.carrier_frequency
    }

    /// Power gain `beta(d)`.
    pub fn path_gain(&self, distance: f64) -> Result<f64> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::InvalidDistance(distance));
        }
        let k = self.wavelength() / (4.0 * PI);
        Ok(k * k / (distance * distance))
    }

    /// Amplitude gain `sqrt(beta(d))`, evaluated without squaring.
    pub fn amplitude(&self, distance: f64) -> Result<f64> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::InvalidDistance(distance));
        }
        Ok(self.wavelength() / (4.0 * PI * distance))
    }

    /// Propagation delay in seconds.
    pub fn delay(&self, distance: f64) -> f64 {
        distance / self.speed_of_light
    }
}

impl ChannelModel for FreeSpaceChannel {
    fn transfer(&self, distance: f64, omega: f64) -> Result<Complex64> {
        let amp = self.amplitude(distance)?;
        Ok(Complex64::from_polar(amp, -omega * self.delay(distance)))
    }

    fn is_amplitude_flat(&self) -> bool {
        true
    }
}
