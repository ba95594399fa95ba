use std::fmt;
use std::path::Path;

use repeater_stability::coverage::coverage_curve;
use repeater_stability::echo::simulate_pair;
use repeater_stability::stability::{self, AlphaSweep, MaxGainEstimate, MeasureKind};
use repeater_stability::{Deployment, Error as CoreError};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::output::{db, num, Csv};
use crate::scenario::{AlphaRange, Scenario, ScenarioError};

#[derive(Debug)]
pub enum Failure {
    /// Unusable scenario or input; exit code 1.
    Invalid(String),
    /// The analysis itself failed; exit code 2.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid scenario: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Invalid(e.0)
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Failure>;

/// A parsed scenario together with the digest of its raw bytes.
pub struct Loaded {
    pub scenario: Scenario,
    pub hash: String,
    pub path: std::path::PathBuf,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Failure::Invalid(format!("{} is not UTF-8", path.display())))?;
        Ok(Self {
            scenario: Scenario::parse(&text)?,
            hash: format!("{:x}", Sha256::digest(&bytes)),
            path: path.to_owned(),
        })
    }

    fn csv(&self, command: &str) -> Csv {
        Csv::new(command, &self.hash, &self.scenario.canonical())
    }
}

fn bound_cell(alpha_g: f64) -> [String; 2] {
    if alpha_g.is_infinite() {
        ["unbounded".into(), "unbounded".into()]
    } else {
        [num(alpha_g), db(alpha_g)]
    }
}

pub fn bound(loaded: &Loaded) -> Result<String> {
    let s = &loaded.scenario;
    let ch = s.channel()?;
    let grid = s.frequency_grid()?;
    let mut csv = loaded.csv("bound");
    if let Some(sweep) = s.bound_sweep()? {
        csv.row(&["spacing_m", "cells", "n_repeaters", "alpha_g", "alpha_g_db"]);
        for &spacing in &sweep.spacings {
            for &cells in &sweep.cells {
                let dep = Deployment::multicell(cells, sweep.cell_width, spacing)?;
                let [a, a_db] = bound_cell(stability::gershgorin_bound(&dep, &ch, &grid)?);
                csv.row(&[num(spacing), cells.to_string(), dep.len().to_string(), a, a_db]);
            }
        }
    } else {
        let dep = s.deployment()?;
        let [a, a_db] = bound_cell(stability::gershgorin_bound(&dep, &ch, &grid)?);
        csv.row(&["kind", "n_repeaters", "alpha_g", "alpha_g_db"]);
        csv.row(&[dep.kind().name().to_string(), dep.len().to_string(), a, a_db]);
    }
    Ok(csv.finish())
}

/// Deployment, bound and sweep settings shared by `sweep` and `maxgain`.
fn sweep_setup(s: &Scenario) -> Result<(Deployment, f64, AlphaSweep)> {
    let dep = s.deployment()?;
    let ch = s.channel()?;
    let grid = s.frequency_grid()?;
    let params = s.analysis()?;
    let alpha_g = stability::gershgorin_bound(&dep, &ch, &grid)?;
    let (lo, hi) = match params.range {
        AlphaRange::Absolute(lo, hi) => (lo, hi),
        AlphaRange::RelativeToBound(lo, hi) => {
            if alpha_g.is_infinite() {
                return Err(Failure::Invalid(
                    "a single repeater has no finite bound; give alpha_min and alpha_max".into(),
                ));
            }
            (lo * alpha_g, hi * alpha_g)
        }
    };
    let kind = params.measure.unwrap_or_else(|| MeasureKind::auto(&dep));
    if kind == MeasureKind::CirculantEigen && dep.odd_ring().is_none() {
        return Err(Failure::Invalid("the circulant measure needs an odd ring deployment".into()));
    }
    let sweep = AlphaSweep::new(lo, hi, params.n_alpha)
        .with_kind(kind)
        .with_eps(params.eps_stab)
        .with_rel_tol(params.rel_tol);
    Ok((dep, alpha_g, sweep))
}

pub fn sweep(loaded: &Loaded) -> Result<String> {
    let s = &loaded.scenario;
    let (dep, alpha_g, sweep) = sweep_setup(s)?;
    let alphas = stability::log_alpha_grid(sweep.lo, sweep.hi, sweep.n_alpha)?;
    let measure = stability::measure_curve(&dep, &s.channel()?, sweep.kind, &alphas, &s.frequency_grid()?)?;
    let mut csv = loaded.csv("sweep");
    csv.comment("alpha_g", bound_cell(alpha_g)[0].as_str());
    csv.row(&["alpha", "measure", "measure_kind"]);
    for (a, m) in alphas.iter().zip(&measure) {
        csv.row(&[num(*a), num(*m), sweep.kind.name().to_string()]);
    }
    Ok(csv.finish())
}

pub fn maxgain(loaded: &Loaded) -> Result<String> {
    let s = &loaded.scenario;
    let (dep, alpha_g, sweep) = sweep_setup(s)?;
    let estimate = stability::estimate_alpha_max(&dep, &s.channel()?, &s.frequency_grid()?, &sweep)?;
    let mut csv = loaded.csv("maxgain");
    csv.comment("measure_kind", sweep.kind.name());
    csv.row(&["alpha_g", "alpha_max_estimate", "ratio", "status"]);
    let g = bound_cell(alpha_g)[0].clone();
    match estimate {
        MaxGainEstimate::Estimated(a) => {
            let ratio = if alpha_g.is_finite() { num(a / alpha_g) } else { String::new() };
            csv.row(&[g, num(a), ratio, "estimated".into()]);
        }
        MaxGainEstimate::StableOverRange => {
            csv.row(&[g, String::new(), String::new(), "stable-over-range".into()]);
        }
    }
    Ok(csv.finish())
}

pub fn coverage(loaded: &Loaded) -> Result<String> {
    let s = &loaded.scenario;
    let ch = s.channel()?;
    let grid = s.frequency_grid()?;
    let (scenario, counts) = s.coverage()?;
    let records = coverage_curve(&counts, &scenario, &ch, &grid)?;
    let mut csv = loaded.csv("coverage");
    csv.row(&["N", "alpha_g", "alpha_power", "alpha_used", "limiting", "delta_m"]);
    for r in records {
        csv.row(&[
            r.n.to_string(),
            num(r.alpha_g),
            num(r.alpha_power),
            num(r.alpha_used),
            r.limiting.name().to_string(),
            num(r.delta),
        ]);
    }
    Ok(csv.finish())
}

#[derive(Deserialize)]
struct SampleRow {
    x1: f64,
    x2: f64,
}

fn read_signals(path: &Path) -> Result<(Vec<f64>, Vec<f64>, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let (mut x1, mut x2) = (Vec::new(), Vec::new());
    for (i, row) in reader.deserialize::<SampleRow>().enumerate() {
        let row = row.map_err(|e| {
            Failure::Invalid(format!("{}: sample {}: {e} (expected columns x1,x2)", path.display(), i + 1))
        })?;
        x1.push(row.x1);
        x2.push(row.x2);
    }
    Ok((x1, x2, format!("{:x}", Sha256::digest(&bytes))))
}

/// `input` overrides the scenario's `echo.input`; relative scenario paths are
/// resolved against the scenario file's directory.
pub fn echo(loaded: &Loaded, input: Option<&Path>) -> Result<String> {
    let (cfg, scenario_input) = loaded.scenario.echo()?;
    let n = cfg.n_samples();
    let input_path = input.map(Path::to_path_buf).or_else(|| {
        scenario_input.map(|p| loaded.path.parent().unwrap_or(Path::new(".")).join(p))
    });
    let (x1, x2, input_hash) = match &input_path {
        Some(p) => read_signals(p)?,
        None => {
            let mut x1 = vec![0.0; n];
            if let Some(first) = x1.first_mut() {
                *first = 1.0;
            }
            (x1, vec![0.0; n], "unit-impulse".into())
        }
    };
    let (y1, y2) = simulate_pair(&cfg, &x1, &x2)?;
    let mut csv = loaded.csv("echo");
    csv.comment("input", input_hash);
    csv.comment("delay_samples", cfg.delay_samples()?.to_string());
    csv.row(&["t", "y1", "y2"]);
    for (i, (a, b)) in y1.iter().zip(&y2).enumerate() {
        csv.row(&[num(i as f64 / cfg.sample_rate), num(*a), num(*b)]);
    }
    Ok(csv.finish())
}
