//! Time-domain recursion of two facing repeaters.
//!
//! With a one-way delay of `D` samples the outputs obey
//! `y1[t] = a x1[t] + a sqrt(b) y2[t - D]` and the mirror equation for `y2`.
//! An impulse therefore bounces back and forth, gaining `a^2 b` per round trip.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoConfig {
    pub alpha: f64,
    pub beta: f64,
    pub delay: f64,
    pub sample_rate: f64,
    pub duration: f64,
}

impl EchoConfig {
    pub fn new(alpha: f64, beta: f64, delay: f64, sample_rate: f64, duration: f64) -> Result<Self> {
        let cfg = Self { alpha, beta, delay, sample_rate, duration };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("sample_rate", self.sample_rate), ("duration", self.duration), ("delay", self.delay)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.delay_samples()?;
        Ok(())
    }

    /// One-way delay in samples; must be a whole number (to 1e-9 relative).
    pub fn delay_samples(&self) -> Result<usize> {
        let exact = self.delay * self.sample_rate;
        let rounded = exact.round();
        if (exact - rounded).abs() > 1e-9 * exact.max(1.0) || rounded < 1.0 {
            return Err(Error::Config(format!(
                "delay {} s is {exact} samples at {} Hz; it must be a positive whole number of samples",
                self.delay, self.sample_rate
            )));
        }
        Ok(rounded as usize)
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    /// Per-round-trip echo factor `alpha^2 beta`.
    pub fn loop_gain(&self) -> f64 {
        self.alpha * self.alpha * self.beta
    }
}

/// Runs the coupled recursion over the full input length. Samples before
/// `t = 0` are zero and echoes past the last sample are dropped.
pub fn simulate_pair(cfg: &EchoConfig, x1: &[f64], x2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let delay = cfg.delay_samples()?;
    let n = cfg.n_samples();
    if x1.len() != n || x2.len() != n {
        return Err(Error::InvalidInput(format!(
            "signals must have {n} samples, got {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    let coupling = cfg.alpha * cfg.beta.sqrt();
    let mut y1 = vec![0.0; n];
    let mut y2 = vec![0.0; n];
    for t in 0..n {
        let (fb1, fb2) = if t >= delay { (y2[t - delay], y1[t - delay]) } else { (0.0, 0.0) };
        y1[t] = cfg.alpha * x1[t] + coupling * fb1;
        y2[t] = cfg.alpha * x2[t] + coupling * fb2;
    }
    Ok((y1, y2))
}

/// Weights `(alpha^2 beta)^k`, `k = 0..count`, of the round-trip impulse train.
pub fn impulse_train_coefficients(alpha: f64, beta: f64, count: usize) -> Vec<f64> {
    let ratio = alpha * alpha * beta;
    (0..count).map(|k| ratio.powi(k as i32)).collect()
}
