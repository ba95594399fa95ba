//! Feedback stability of a repeater network.
//!
//! With every repeater applying amplitude gain `alpha`, the closed loop is
//! `alpha (I - alpha H(jw))^-1`, where `H(jw)` holds the inter-repeater channel
//! coefficients and has a zero diagonal. The loop turns unstable at the
//! smallest `alpha` for which `I - alpha H(jw)` is singular at some frequency.
//!
//! This module provides:
//! - the Gershgorin lower bound on that gain, i.e. the reciprocal of the
//!   largest row sum of channel *amplitudes*;
//! - two numerical stability measures swept over a discrete frequency grid:
//!   `min_w |det(I - alpha H)|` for any deployment, and
//!   `min_w min_n |lambda_n - 1|` for odd rings, whose `H` is circulant;
//! - a threshold-based estimate of the transition gain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelModel;
use crate::deployment::{Deployment, DistanceMatrix};
use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use crate::par;

/// Evenly spaced frequencies `carrier - bandwidth/2 + i * spacing`, for
/// `i = 0 .. floor(bandwidth / spacing)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    carrier: f64,
    bandwidth: f64,
    spacing: f64,
}

impl FrequencyGrid {
    pub fn new(carrier: f64, bandwidth: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Config(format!("grid spacing must be positive, got {spacing}")));
        }
        if !(bandwidth >= 0.0) || !bandwidth.is_finite() {
            return Err(Error::Config(format!("bandwidth must be non-negative, got {bandwidth}")));
        }
        if !(carrier - bandwidth / 2.0 > 0.0) || !carrier.is_finite() {
            return Err(Error::Config(format!(
                "band [{}, {}] Hz must lie above zero",
                carrier - bandwidth / 2.0,
                carrier + bandwidth / 2.0
            )));
        }
        Ok(Self { carrier, bandwidth, spacing })
    }

    /// Single frequency at `carrier`.
    pub fn single(carrier: f64) -> Result<Self> {
        Self::new(carrier, 0.0, 1.0)
    }

    /// 20 MHz around 2 GHz at 10 kHz spacing.
    pub fn default_band() -> Self {
        Self { carrier: 2.0e9, bandwidth: 20.0e6, spacing: 1.0e4 }
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        (self.bandwidth / self.spacing * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.carrier - self.bandwidth / 2.0 + i as f64 * self.spacing
    }

    pub fn omega(&self, i: usize) -> f64 {
        2.0 * PI * self.frequency(i)
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.omega(i)).collect()
    }

    pub fn carrier_omega(&self) -> f64 {
        2.0 * PI * self.carrier
    }
}

/// Which stability measure a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// `min_w |det(I - alpha H(jw))|`
    Determinant,
    /// `min_w min_n |lambda_n(alpha, w) - 1|`, odd rings only.
    CirculantEigen,
}

impl MeasureKind {
    /// Circulant measure for odd rings, determinant otherwise.
    pub fn auto(dep: &Deployment) -> Self {
        if dep.odd_ring().is_some() {
            MeasureKind::CirculantEigen
        } else {
            MeasureKind::Determinant
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::Determinant => "determinant",
            MeasureKind::CirculantEigen => "circulant-eigen",
        }
    }
}

/// Inter-repeater transfer matrix `H(jw)`: zero diagonal, symmetric.
pub fn build_h<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    omega: f64,
) -> Result<ComplexMatrix> {
    build_h_from(&dep.distance_matrix()?, ch, omega)
}

pub(crate) fn build_h_from<C: ChannelModel + ?Sized>(
    dm: &DistanceMatrix,
    ch: &C,
    omega: f64,
) -> Result<ComplexMatrix> {
    let n = dm.len();
    let mut h = ComplexMatrix::zeros(n, n)?;
    for i in 0..n {
        for j in i + 1..n {
            let z = ch.transfer(dm.get(i, j), omega)?;
            h[(i, j)] = z;
            h[(j, i)] = z;
        }
    }
    Ok(h)
}

fn row_sums_from<C: ChannelModel + ?Sized>(
    dm: &DistanceMatrix,
    ch: &C,
    omega: f64,
) -> Result<Vec<f64>> {
    (0..dm.len())
        .map(|i| {
            (0..dm.len())
                .filter(|&j| j != i)
                .try_fold(0.0, |acc, j| Ok(acc + ch.transfer(dm.get(i, j), omega)?.norm()))
        })
        .collect()
}

/// Per-repeater interference amplitude sums `sum_{j != i} |h_ij(jw)|`.
pub fn row_amplitude_sums<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    omega: f64,
) -> Result<Vec<f64>> {
    row_sums_from(&dep.distance_matrix()?, ch, omega)
}

/// Gershgorin lower bound on the maximum stable gain,
/// `inf_w min_n 1 / sum_{j != n} |h_nj(jw)|`.
///
/// Amplitude-flat channels are evaluated at the grid carrier only. A single
/// repeater has no feedback path and yields `f64::INFINITY`.
pub fn gershgorin_bound<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    grid: &FrequencyGrid,
) -> Result<f64> {
    gershgorin_from(&dep.distance_matrix()?, ch, grid)
}

pub(crate) fn gershgorin_from<C: ChannelModel + ?Sized>(
    dm: &DistanceMatrix,
    ch: &C,
    grid: &FrequencyGrid,
) -> Result<f64> {
    let omegas = if ch.is_amplitude_flat() { vec![grid.carrier_omega()] } else { grid.omegas() };
    let worst = par::try_map_range(omegas.len(), |k| {
        Ok(row_sums_from(dm, ch, omegas[k])?.into_iter().fold(0.0, f64::max))
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(1.0 / worst)
}

/// `|det(I - alpha H)|` for every alpha, reusing one scratch buffer.
fn det_moduli(h: &ComplexMatrix, alphas: &[f64]) -> Vec<f64> {
    let n = h.rows();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
    alphas
        .iter()
        .map(|&a| {
            numerics::identity_minus_scaled_into(h.as_slice(), n, a, &mut scratch);
            numerics::det_in_place(&mut scratch, n).norm()
        })
        .collect()
}

/// Determinant measure for each gain in `alphas`; the frequency points are
/// evaluated in parallel and reduced with an element-wise minimum.
pub fn det_measure_curve<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alphas: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    det_curve_from(&dep.distance_matrix()?, ch, alphas, grid)
}

fn det_curve_from<C: ChannelModel + ?Sized>(
    dm: &DistanceMatrix,
    ch: &C,
    alphas: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    check_alphas(alphas)?;
    par::try_min_reduce(grid.len(), alphas.len(), |k| {
        let h = build_h_from(dm, ch, grid.omega(k))?;
        Ok(det_moduli(&h, alphas))
    })
}

/// `min_{w in grid} |det(I - alpha H(jw))|`.
pub fn stability_measure_det<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alpha: f64,
    grid: &FrequencyGrid,
) -> Result<f64> {
    Ok(det_measure_curve(dep, ch, &[alpha], grid)?[0])
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    match alphas.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        Some(a) => Err(Error::InvalidInput(format!("gain must be finite and >= 0, got {a}"))),
        None => Ok(()),
    }
}

/// Odd-ring data needed by the closed-form eigenvalues.
struct RingSpectrum {
    count: usize,
    /// Chord lengths `2 R sin(k pi / N)` for `k = 1..=K`.
    chords: Vec<f64>,
    /// `cos(2 pi k n / N)`, row `n`, column `k - 1`.
    cosines: Vec<f64>,
}

impl RingSpectrum {
    fn new(dep: &Deployment) -> Result<Self> {
        let (count, radius) = dep.odd_ring().ok_or_else(|| {
            Error::Structure(format!(
                "circulant eigenvalues need an odd ring deployment, got {}",
                dep.kind().name()
            ))
        })?;
        let half = (count - 1) / 2;
        let n = count as f64;
        let chords = (1..=half).map(|k| 2.0 * radius * (k as f64 * PI / n).sin()).collect();
        let cosines = (0..count)
            .flat_map(|row| {
                (1..=half).map(move |k| (2.0 * PI * ((k * row) % count) as f64 / n).cos())
            })
            .collect();
        Ok(Self { count, chords, cosines })
    }

    /// Eigenvalues of `H(jw)` itself (gain one).
    fn unit_gain_eigenvalues<C: ChannelModel + ?Sized>(
        &self,
        ch: &C,
        omega: f64,
    ) -> Result<Vec<Complex64>> {
        let hops: Vec<Complex64> =
            self.chords.iter().map(|&d| ch.transfer(d, omega)).collect::<Result<_>>()?;
        let half = hops.len();
        Ok((0..self.count)
            .map(|row| {
                let cos_row = &self.cosines[row * half..(row + 1) * half];
                hops.iter().zip(cos_row).map(|(h, c)| h * *c).sum::<Complex64>() * 2.0
            })
            .collect())
    }
}

/// Eigenvalues of `alpha H(jw)` for an odd ring,
/// `lambda_n = 2 alpha sum_{k=1..K} h_k cos(2 pi k n / N)`, `n = 0..N-1`,
/// where `h_k` is the channel over a `k`-hop chord.
pub fn circulant_eigenvalues<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alpha: f64,
    omega: f64,
) -> Result<Vec<Complex64>> {
    let spectrum = RingSpectrum::new(dep)?;
    Ok(spectrum.unit_gain_eigenvalues(ch, omega)?.into_iter().map(|z| z * alpha).collect())
}

/// Same eigenvalues obtained as the DFT of the first column of `alpha H(jw)`
/// assembled from the actual positions.
pub fn circulant_eigenvalues_dft<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alpha: f64,
    omega: f64,
) -> Result<Vec<Complex64>> {
    RingSpectrum::new(dep)?;
    let h = build_h(dep, ch, omega)?;
    let column: Vec<Complex64> = h.column(0).into_iter().map(|z| z * alpha).collect();
    numerics::dft(&column)
}

/// Circulant measure for each gain in `alphas`.
pub fn circulant_measure_curve<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alphas: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    check_alphas(alphas)?;
    let spectrum = RingSpectrum::new(dep)?;
    let one = Complex64::new(1.0, 0.0);
    par::try_min_reduce(grid.len(), alphas.len(), |k| {
        let eig = spectrum.unit_gain_eigenvalues(ch, grid.omega(k))?;
        Ok(alphas
            .iter()
            .map(|&a| eig.iter().map(|z| (z * a - one).norm()).fold(f64::INFINITY, f64::min))
            .collect())
    })
}

/// `min_{w in grid} min_n |lambda_n(alpha, w) - 1|` for an odd ring.
pub fn stability_measure_circulant<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    alpha: f64,
    grid: &FrequencyGrid,
) -> Result<f64> {
    Ok(circulant_measure_curve(dep, ch, &[alpha], grid)?[0])
}

/// Dispatches to the requested measure.
pub fn measure_curve<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    kind: MeasureKind,
    alphas: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    match kind {
        MeasureKind::Determinant => det_measure_curve(dep, ch, alphas, grid),
        MeasureKind::CirculantEigen => circulant_measure_curve(dep, ch, alphas, grid),
    }
}

/// `n` logarithmically spaced gains from `lo` to `hi`, both included.
/// A zero lower end is replaced by `hi * 1e-6`.
pub fn log_alpha_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo >= 0.0) || !(lo < hi) || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("gain range must satisfy 0 <= lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 gains, got {n}")));
    }
    let start = if lo > 0.0 { lo } else { hi * 1e-6 };
    let ratio = (hi / start).ln();
    let mut grid: Vec<f64> =
        (0..n).map(|i| start * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = start;
    grid[n - 1] = hi;
    Ok(grid)
}

/// Parameters of a gain sweep and of the transition estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSweep {
    pub lo: f64,
    pub hi: f64,
    pub n_alpha: usize,
    /// A gain counts as unstable once the measure falls below this value.
    /// Both measures equal 1 at zero gain.
    pub eps_stab: f64,
    /// Bisection stops when the bracket is narrower than `rel_tol` times the
    /// upper bracketing gain.
    pub rel_tol: f64,
    pub kind: MeasureKind,
}

impl AlphaSweep {
    pub fn new(lo: f64, hi: f64, n_alpha: usize) -> Self {
        Self { lo, hi, n_alpha, eps_stab: 1e-3, rel_tol: 1e-3, kind: MeasureKind::Determinant }
    }

    pub fn with_kind(mut self, kind: MeasureKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_eps(mut self, eps_stab: f64) -> Self {
        self.eps_stab = eps_stab;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_stab > 0.0) {
            return Err(Error::InvalidInput(format!("eps_stab must be positive, got {}", self.eps_stab)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Outcome of the transition search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxGainEstimate {
    Estimated(f64),
    /// No swept gain brought the measure below the threshold.
    StableOverRange,
}

impl MaxGainEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            MaxGainEstimate::Estimated(a) => Some(*a),
            MaxGainEstimate::StableOverRange => None,
        }
    }
}

/// Result of a full gain sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub alpha_grid: Vec<f64>,
    pub measure: Vec<f64>,
    pub measure_kind: MeasureKind,
    pub alpha_g: f64,
    pub alpha_max_estimate: MaxGainEstimate,
    pub frequency_grid: FrequencyGrid,
    pub eps_stab: f64,
}

/// Sweeps the gain grid, computes the Gershgorin bound and locates the
/// transition.
pub fn stability_sweep<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    grid: &FrequencyGrid,
    sweep: &AlphaSweep,
) -> Result<StabilityReport> {
    sweep.validate()?;
    let alpha_grid = log_alpha_grid(sweep.lo, sweep.hi, sweep.n_alpha)?;
    let measure_at = |alphas: &[f64]| measure_curve(dep, ch, sweep.kind, alphas, grid);
    let measure = measure_at(&alpha_grid)?;
    let alpha_max_estimate = refine_transition(&alpha_grid, &measure, sweep, |a| {
        measure_at(&[a]).map(|m| m[0])
    })?;
    Ok(StabilityReport {
        alpha_g: gershgorin_bound(dep, ch, grid)?,
        alpha_grid,
        measure,
        measure_kind: sweep.kind,
        alpha_max_estimate,
        frequency_grid: *grid,
        eps_stab: sweep.eps_stab,
    })
}

/// Estimates the transition gain: the smallest gain at which the measure
/// falls below `eps_stab`, located on the sweep and refined by bisection.
pub fn estimate_alpha_max<C: ChannelModel + ?Sized>(
    dep: &Deployment,
    ch: &C,
    grid: &FrequencyGrid,
    sweep: &AlphaSweep,
) -> Result<MaxGainEstimate> {
    Ok(stability_sweep(dep, ch, grid, sweep)?.alpha_max_estimate)
}

/// Locates the first swept transition.
///
/// Two kinds of crossing are considered, in order of increasing gain: a swept
/// point whose measure is already below `eps_stab`, and a local minimum of the
/// swept curve whose continuous minimum (golden-section search between the
/// neighbouring points) dips below `eps_stab`. Sharp dips such as the
/// two-repeater `|1 - alpha^2 beta|` usually fall between log-spaced points.
/// The crossing is then refined by bisection on `measure - eps_stab`.
fn refine_transition<F>(
    alphas: &[f64],
    measure: &[f64],
    sweep: &AlphaSweep,
    eval: F,
) -> Result<MaxGainEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let first = measure.iter().position(|&m| m < sweep.eps_stab);
    if first == Some(0) {
        return Ok(MaxGainEstimate::Estimated(alphas[0]));
    }
    let limit = first.unwrap_or(alphas.len());
    for i in 1..limit {
        if i + 1 >= alphas.len() || measure[i] > measure[i - 1] || measure[i] > measure[i + 1] {
            continue;
        }
        let (at, value) = golden_min(&eval, alphas[i - 1], alphas[i + 1], DIP_REL_TOL * alphas[i + 1])?;
        if value < sweep.eps_stab {
            return bisect_crossing(&eval, alphas[i - 1], at, sweep).map(MaxGainEstimate::Estimated);
        }
    }
    match first {
        Some(i) => bisect_crossing(&eval, alphas[i - 1], alphas[i], sweep).map(MaxGainEstimate::Estimated),
        None => Ok(MaxGainEstimate::StableOverRange),
    }
}

const DIP_REL_TOL: f64 = 1e-7;

fn golden_min<F>(eval: &F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

fn bisect_crossing<F>(eval: &F, lo: f64, hi: f64, sweep: &AlphaSweep) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut failure = None;
    let root = numerics::bisect(
        |a| match eval(a) {
            Ok(m) => m - sweep.eps_stab,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        sweep.rel_tol * hi,
    );
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}
