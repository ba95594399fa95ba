//! Coverage extension by an even ring of repeaters around the source.
//!
//! Without repeaters the source covers radius `R`. A destination at `R + delta`
//! on the bisector between two neighbouring repeaters is covered once the
//! repeated power brings its received level back to the cell-edge level
//! `beta(R)`.

use std::f64::consts::PI;

use crate::channel::FreeSpaceChannel;
use crate::deployment::Deployment;
use crate::error::{Error, Result};
use crate::numerics;
use crate::par;
use crate::stability::{self, FrequencyGrid};

/// How a dB gain limit maps onto the amplitude gain `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainConvention {
    /// The limit is a power gain: `alpha = 10^(dB / 20)`.
    #[default]
    Power,
    /// The limit applies to `alpha` read as a power ratio: `alpha = 10^(dB / 10)`.
    Amplitude,
}

impl GainConvention {
    pub fn alpha_from_db(self, db: f64) -> f64 {
        match self {
            GainConvention::Power => 10f64.powf(db / 20.0),
            GainConvention::Amplitude => 10f64.powf(db / 10.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitingConstraint {
    Power,
    Stability,
}

impl LimitingConstraint {
    pub fn name(&self) -> &'static str {
        match self {
            LimitingConstraint::Power => "power",
            LimitingConstraint::Stability => "stability",
        }
    }
}

/// Fixed parameters of a coverage study; the repeater count varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageScenario {
    pub radius: f64,
    pub gamma_db: f64,
    pub convention: GainConvention,
    /// Upper end of the extension search; `None` means `10 * radius`.
    pub delta_max: Option<f64>,
}

impl CoverageScenario {
    pub fn new(radius: f64, gamma_db: f64) -> Self {
        Self { radius, gamma_db, convention: GainConvention::Power, delta_max: None }
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max.unwrap_or(10.0 * self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRecord {
    pub n: usize,
    pub alpha_g: f64,
    pub alpha_power: f64,
    pub alpha_used: f64,
    pub limiting: LimitingConstraint,
    pub delta: f64,
}

fn check_even(n: usize) -> Result<usize> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("coverage needs an even repeater count >= 2, got {n}")));
    }
    Ok(n / 2)
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("radius must be positive, got {radius}")))
    }
}

/// Distances `L_1..L_K` from the destination to the repeater pairs, nearest
/// pair first. Each distance is shared by two repeaters.
pub fn destination_distances(n: usize, radius: f64, delta: f64) -> Result<Vec<f64>> {
    let half = check_even(n)?;
    check_radius(radius)?;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("extension must be >= 0, got {delta}")));
    }
    Ok((1..=half)
        .map(|k| {
            let half_angle = (2 * k - 1) as f64 * PI / (2 * n) as f64;
            let chord = 2.0 * radius * half_angle.sin();
            let theta = half_angle + PI / 2.0;
            (delta * delta + chord * chord - 2.0 * delta * chord * theta.cos()).sqrt()
        })
        .collect())
}

/// Smallest gain that restores cell-edge power at `radius + delta`:
/// `sqrt((beta(R) - beta(R + delta)) / (2 beta(R) sum_k beta(L_k)))`.
pub fn required_gain(n: usize, radius: f64, delta: f64, ch: &FreeSpaceChannel) -> Result<f64> {
    let distances = destination_distances(n, radius, delta)?;
    let edge = ch.path_gain(radius)?;
    let target = ch.path_gain(radius + delta)?;
    let mut relayed = 0.0;
    for l in distances {
        relayed += ch.path_gain(l)?;
    }
    Ok(((edge - target) / (2.0 * edge * relayed)).max(0.0).sqrt())
}

const EXTENSION_TOL_M: f64 = 1e-4;

/// Largest extension in `[0, delta_max]` reachable with gain `alpha`, found by
/// inverting [`required_gain`]. Saturates at `delta_max`.
pub fn achieved_extension(
    n: usize,
    radius: f64,
    alpha: f64,
    ch: &FreeSpaceChannel,
    delta_max: f64,
) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("gain must be >= 0, got {alpha}")));
    }
    if !(delta_max > 0.0) || !delta_max.is_finite() {
        return Err(Error::InvalidInput(format!("delta_max must be positive, got {delta_max}")));
    }
    check_even(n)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if required_gain(n, radius, delta_max, ch)? <= alpha {
        return Ok(delta_max);
    }
    let mut failure = None;
    let delta = numerics::bisect(
        |d| match required_gain(n, radius, d, ch) {
            Ok(g) => g - alpha,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        delta_max,
        EXTENSION_TOL_M,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    delta
}

/// Achieved extension for each repeater count, with the gain capped by both
/// the Gershgorin bound of the even ring and the power limit.
pub fn coverage_curve(
    counts: &[usize],
    scenario: &CoverageScenario,
    ch: &FreeSpaceChannel,
    grid: &FrequencyGrid,
) -> Result<Vec<CoverageRecord>> {
    check_radius(scenario.radius)?;
    for &n in counts {
        check_even(n)?;
    }
    let alpha_power = scenario.convention.alpha_from_db(scenario.gamma_db);
    let delta_max = scenario.delta_max();
    par::try_map_range(counts.len(), |i| {
        let n = counts[i];
        let ring = Deployment::ring_even(n, scenario.radius)?;
        let alpha_g = stability::gershgorin_bound(&ring, ch, grid)?;
        let (alpha_used, limiting) = if alpha_g <= alpha_power {
            (alpha_g, LimitingConstraint::Stability)
        } else {
            (alpha_power, LimitingConstraint::Power)
        };
        let delta = achieved_extension(n, scenario.radius, alpha_used, ch, delta_max)?;
        Ok(CoverageRecord { n, alpha_g, alpha_power, alpha_used, limiting, delta })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::Point;

    fn ch() -> FreeSpaceChannel {
        FreeSpaceChannel::new(2.0e9).unwrap()
    }

    /// Required gain from explicit coordinates: even ring from the deployment
    /// constructor, destination placed on the bisector of repeaters 0 and 1.
    fn required_gain_geometric(n: usize, radius: f64, delta: f64) -> f64 {
        let ch = ch();
        let ring = Deployment::ring_even(n, radius).unwrap();
        let bisector = PI / 2.0 - PI / n as f64;
        let dest = Point::new((radius + delta) * bisector.cos(), (radius + delta) * bisector.sin());
        let relayed: f64 = ring
            .positions()
            .iter()
            .map(|p| ch.path_gain(p.distance(&dest)).unwrap())
            .sum();
        let edge = ch.path_gain(radius).unwrap();
        ((edge - ch.path_gain(radius + delta).unwrap()) / (edge * relayed)).sqrt()
    }

    #[test]
    fn distances_at_zero_extension_are_chords() {
        let n = 8;
        let l = destination_distances(n, 1000.0, 0.0).unwrap();
        for (k, lk) in l.iter().enumerate() {
            let chord = 2000.0 * ((2 * k + 1) as f64 * PI / (2 * n) as f64).sin();
            assert!((lk - chord).abs() < 1e-9);
        }
    }

    #[test]
    fn distances_two_repeaters_by_hand() {
        let (r, delta) = (1000.0, 250.0);
        let l = destination_distances(2, r, delta).unwrap();
        let want = (delta * delta + 2.0 * r * r + 2.0 * delta * r).sqrt();
        assert_eq!(l.len(), 1);
        assert!((l[0] - want).abs() < 1e-9);
    }

    #[test]
    fn distances_obey_triangle_inequality() {
        for delta in [0.0, 10.0, 500.0, 5000.0] {
            let l = destination_distances(12, 1000.0, delta).unwrap();
            let d0 = destination_distances(12, 1000.0, 0.0).unwrap();
            for (lk, dk) in l.iter().zip(d0) {
                assert!(*lk <= delta + dk + 1e-9);
            }
        }
    }

    #[test]
    fn distances_reject_bad_input() {
        assert!(destination_distances(3, 1000.0, 1.0).is_err());
        assert!(destination_distances(0, 1000.0, 1.0).is_err());
        assert!(destination_distances(4, 1000.0, -1.0).is_err());
        assert!(required_gain(4, 1000.0, -1.0, &ch()).is_err());
    }

    #[test]
    fn required_gain_zero_and_monotone() {
        assert_eq!(required_gain(10, 1000.0, 0.0, &ch()).unwrap(), 0.0);
        let mut prev = 0.0;
        for delta in [1.0, 10.0, 100.0, 1000.0, 9000.0] {
            let g = required_gain(10, 1000.0, delta, &ch()).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn required_gain_matches_geometric_oracle() {
        for (n, delta) in [(10usize, 100.0), (2, 40.0), (24, 700.0)] {
            let got = required_gain(n, 1000.0, delta, &ch()).unwrap();
            let want = required_gain_geometric(n, 1000.0, delta);
            assert!((got - want).abs() <= 1e-9 * want, "N={n}: {got} vs {want}");
        }
    }

    #[test]
    fn power_balance_holds_at_required_gain() {
        let (n, r) = (10, 1000.0);
        let ch = ch();
        for delta in [5.0, 100.0, 2500.0] {
            let a = required_gain(n, r, delta, &ch).unwrap();
            let relayed: f64 = destination_distances(n, r, delta)
                .unwrap()
                .iter()
                .map(|l| ch.path_gain(*l).unwrap())
                .sum();
            let edge = ch.path_gain(r).unwrap();
            let lhs = ch.path_gain(r + delta).unwrap() + 2.0 * a * a * edge * relayed;
            assert!((lhs - edge).abs() <= 1e-9 * edge);
        }
    }

    #[test]
    fn extension_round_trip() {
        for target in [10.0, 100.0, 500.0] {
            let a = required_gain(10, 1000.0, target, &ch()).unwrap();
            let back = achieved_extension(10, 1000.0, a, &ch(), 10_000.0).unwrap();
            assert!((back - target).abs() < 0.01, "{target} -> {back}");
        }
    }

    #[test]
    fn extension_edges() {
        assert_eq!(achieved_extension(10, 1000.0, 0.0, &ch(), 1000.0).unwrap(), 0.0);
        assert_eq!(achieved_extension(10, 1000.0, 1e12, &ch(), 1000.0).unwrap(), 1000.0);
        assert!(achieved_extension(10, 1000.0, -1.0, &ch(), 1000.0).is_err());
        let small = achieved_extension(10, 1000.0, 1e3, &ch(), 1e4).unwrap();
        let large = achieved_extension(10, 1000.0, 1e4, &ch(), 1e4).unwrap();
        assert!(large > small);
    }

    #[test]
    fn two_repeaters_at_80_db_are_power_limited() {
        let grid = FrequencyGrid::default_band();
        let rec = coverage_curve(&[2], &CoverageScenario::new(1000.0, 80.0), &ch(), &grid).unwrap()[0];
        let beta = ch().path_gain(2000.0).unwrap();
        assert!((beta - 3.562e-11).abs() < 1e-14);
        assert!((rec.alpha_g - 1.0 / beta.sqrt()).abs() <= 1e-9 * rec.alpha_g);
        assert!((rec.alpha_power - 1.0e4).abs() < 1e-9);
        assert_eq!(rec.alpha_used, rec.alpha_power);
        assert_eq!(rec.limiting, LimitingConstraint::Power);
    }

    #[test]
    fn unconstrained_power_is_always_stability_limited() {
        let counts: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
        let recs = coverage_curve(&counts, &CoverageScenario::new(1000.0, 400.0), &ch(), &FrequencyGrid::default_band())
            .unwrap();
        assert!(recs.iter().all(|r| r.limiting == LimitingConstraint::Stability));
        assert!(recs.iter().all(|r| r.delta >= 0.0));
    }

    #[test]
    fn extension_non_decreasing_in_power_limit() {
        let grid = FrequencyGrid::default_band();
        for n in [4usize, 12, 30] {
            let mut prev = -1.0;
            for gamma in [50.0, 60.0, 70.0, 80.0, 90.0] {
                let rec = coverage_curve(&[n], &CoverageScenario::new(1000.0, gamma), &ch(), &grid).unwrap()[0];
                assert!(rec.delta >= prev);
                prev = rec.delta;
            }
        }
    }

    #[test]
    fn convention_conversion() {
        assert!((GainConvention::Power.alpha_from_db(80.0) - 1e4).abs() < 1e-9);
        assert!((GainConvention::Amplitude.alpha_from_db(40.0) - 1e4).abs() < 1e-9);
    }
}
