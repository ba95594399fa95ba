//! Scenario files: a TOML document with one table per concern.
//!
//! Every table is optional at parse time; each command asks for the tables it
//! needs. Validation errors name the line of the offending table.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use repeater_stability::coverage::GainConvention;
use repeater_stability::stability::MeasureKind;
use repeater_stability::{
    CoverageScenario, Deployment, EchoConfig, FreeSpaceChannel, FrequencyGrid, Point,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError(pub String);

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSpec {
    pub kind: String,
    pub distance: Option<f64>,
    pub count: Option<usize>,
    pub radius: Option<f64>,
    pub cell_width: Option<f64>,
    pub spacing: Option<f64>,
    pub cells: Option<usize>,
    pub positions: Option<Vec<[f64; 2]>>,
    pub source: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub carrier_frequency: f64,
    pub speed_of_light: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub carrier: Option<f64>,
    pub bandwidth: Option<f64>,
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_min_rel: Option<f64>,
    pub alpha_max_rel: Option<f64>,
    pub n_alpha: Option<usize>,
    pub eps_stab: Option<f64>,
    pub rel_tol: Option<f64>,
    pub measure: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSweepSpec {
    pub cell_width: f64,
    pub spacings: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub radius: f64,
    pub gamma_db: f64,
    pub counts: Option<Vec<usize>>,
    pub count_min: Option<usize>,
    pub count_max: Option<usize>,
    pub count_step: Option<usize>,
    pub gain_convention: Option<String>,
    pub delta_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSpec {
    pub alpha: f64,
    pub beta: f64,
    pub delay: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub input: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub deployment: Option<Spanned<DeploymentSpec>>,
    pub channel: Option<Spanned<ChannelSpec>>,
    pub frequency_grid: Option<Spanned<GridSpec>>,
    pub analysis: Option<Spanned<AnalysisSpec>>,
    pub bound_sweep: Option<Spanned<BoundSweepSpec>>,
    pub coverage: Option<Spanned<CoverageSpec>>,
    pub echo: Option<Spanned<EchoSpec>>,
    #[serde(skip)]
    source: String,
}

/// Resolved gain-sweep settings. The range is either absolute or relative to
/// the Gershgorin bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub range: AlphaRange,
    pub n_alpha: usize,
    pub eps_stab: f64,
    pub rel_tol: f64,
    pub measure: Option<MeasureKind>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRange {
    Absolute(f64, f64),
    RelativeToBound(f64, f64),
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut scenario: Scenario =
            toml::from_str(text).map_err(|e| ScenarioError(e.to_string().trim_end().to_owned()))?;
        scenario.source = text.to_owned();
        Ok(scenario)
    }

    /// Canonical re-serialization, used for the parameter echo.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    fn line_of(&self, span: Range<usize>) -> usize {
        self.source[..span.start.min(self.source.len())].matches('\n').count() + 1
    }

    fn fail<T>(&self, table: &str, span: Range<usize>, msg: impl fmt::Display) -> Result<T> {
        Err(ScenarioError(format!("line {}: [{table}]: {msg}", self.line_of(span))))
    }

    fn require<'a, T>(&self, table: &'a Option<Spanned<T>>, name: &str) -> Result<&'a Spanned<T>> {
        table.as_ref().ok_or_else(|| ScenarioError(format!("missing [{name}] table")))
    }

    pub fn channel(&self) -> Result<FreeSpaceChannel> {
        let spec = self.require(&self.channel, "channel")?;
        let c = spec.get_ref();
        FreeSpaceChannel::with_speed_of_light(
            c.carrier_frequency,
            c.speed_of_light.unwrap_or(repeater_stability::channel::SPEED_OF_LIGHT),
        )
        .or_else(|e| self.fail("channel", spec.span(), e))
    }

    /// Frequency grid; missing keys fall back to the channel carrier, 20 MHz
    /// bandwidth and 10 kHz spacing.
    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        let default = FrequencyGrid::default_band();
        let carrier = self.channel()?.carrier_frequency();
        let Some(spec) = &self.frequency_grid else {
            return FrequencyGrid::new(carrier, default.bandwidth(), default.spacing())
                .map_err(|e| ScenarioError(format!("default frequency grid: {e}")));
        };
        let g = spec.get_ref();
        FrequencyGrid::new(
            g.carrier.unwrap_or(carrier),
            g.bandwidth.unwrap_or(default.bandwidth()),
            g.spacing.unwrap_or(default.spacing()),
        )
        .or_else(|e| self.fail("frequency_grid", spec.span(), e))
    }

    pub fn deployment(&self) -> Result<Deployment> {
        let spec = self.require(&self.deployment, "deployment")?;
        let span = spec.span();
        let d = spec.get_ref();
        let need_f = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| {
                ScenarioError(format!(
                    "line {}: [deployment]: kind \"{}\" requires `{key}`",
                    self.line_of(span.clone()),
                    d.kind
                ))
            })
        };
        let need_u = |v: Option<usize>, key: &str| need_f(v.map(|x| x as f64), key).map(|x| x as usize);
        let built = match d.kind.as_str() {
            "pair" => Deployment::pair(need_f(d.distance, "distance")?),
            "ring" => Deployment::ring(need_u(d.count, "count")?, need_f(d.radius, "radius")?),
            "ring_even" => Deployment::ring_even(need_u(d.count, "count")?, need_f(d.radius, "radius")?),
            "grid" => Deployment::grid(need_f(d.cell_width, "cell_width")?, need_f(d.spacing, "spacing")?),
            "multicell" => Deployment::multicell(
                need_u(d.cells, "cells")?,
                need_f(d.cell_width, "cell_width")?,
                need_f(d.spacing, "spacing")?,
            ),
            "custom" => {
                let positions = d.positions.as_ref().ok_or_else(|| {
                    ScenarioError(format!(
                        "line {}: [deployment]: kind \"custom\" requires `positions`",
                        self.line_of(span.clone())
                    ))
                })?;
                let source = d.source.unwrap_or([0.0, 0.0]);
                Deployment::custom(
                    positions.iter().map(|p| Point::new(p[0], p[1])).collect(),
                    Point::new(source[0], source[1]),
                )
            }
            other => {
                return self.fail(
                    "deployment",
                    span,
                    format!("unknown kind \"{other}\" (expected pair, ring, ring_even, grid, multicell or custom)"),
                )
            }
        };
        built.or_else(|e| self.fail("deployment", span, e))
    }

    pub fn analysis(&self) -> Result<AnalysisParams> {
        let (spec, span) = match &self.analysis {
            Some(s) => (s.get_ref().clone(), s.span()),
            None => (AnalysisSpec::default(), 0..0),
        };
        let range = match (spec.alpha_min, spec.alpha_max, spec.alpha_min_rel, spec.alpha_max_rel) {
            (Some(lo), Some(hi), None, None) => AlphaRange::Absolute(lo, hi),
            (None, None, lo, hi) => AlphaRange::RelativeToBound(lo.unwrap_or(0.1), hi.unwrap_or(10.0)),
            _ => {
                return self.fail(
                    "analysis",
                    span,
                    "give either both alpha_min and alpha_max, or alpha_min_rel/alpha_max_rel",
                )
            }
        };
        let (lo, hi) = match range {
            AlphaRange::Absolute(lo, hi) | AlphaRange::RelativeToBound(lo, hi) => (lo, hi),
        };
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return self.fail("analysis", span, format!("gain range must satisfy 0 <= min < max, got [{lo}, {hi}]"));
        }
        let n_alpha = spec.n_alpha.unwrap_or(200);
        if n_alpha < 2 {
            return self.fail("analysis", span, "n_alpha must be at least 2");
        }
        let eps_stab = spec.eps_stab.unwrap_or(1e-3);
        let rel_tol = spec.rel_tol.unwrap_or(1e-3);
        if !(eps_stab > 0.0) || !(rel_tol > 0.0) {
            return self.fail("analysis", span, "eps_stab and rel_tol must be positive");
        }
        let measure = match spec.measure.as_deref() {
            None | Some("auto") => None,
            Some("determinant") => Some(MeasureKind::Determinant),
            Some("circulant") | Some("circulant-eigen") => Some(MeasureKind::CirculantEigen),
            Some(other) => {
                return self.fail(
                    "analysis",
                    span,
                    format!("unknown measure \"{other}\" (expected auto, determinant or circulant)"),
                )
            }
        };
        Ok(AnalysisParams { range, n_alpha, eps_stab, rel_tol, measure })
    }

    pub fn bound_sweep(&self) -> Result<Option<BoundSweepSpec>> {
        let Some(spec) = &self.bound_sweep else { return Ok(None) };
        let b = spec.get_ref();
        if b.spacings.is_empty() || b.cells.is_empty() {
            return self.fail("bound_sweep", spec.span(), "spacings and cells must be non-empty");
        }
        for &s in &b.spacings {
            if let Err(e) = Deployment::grid(b.cell_width, s) {
                return self.fail("bound_sweep", spec.span(), e);
            }
        }
        if b.cells.contains(&0) {
            return self.fail("bound_sweep", spec.span(), "cell counts must be >= 1");
        }
        Ok(Some(b.clone()))
    }

    pub fn coverage(&self) -> Result<(CoverageScenario, Vec<usize>)> {
        let spec = self.require(&self.coverage, "coverage")?;
        let span = spec.span();
        let c = spec.get_ref();
        let counts = match (&c.counts, c.count_min, c.count_max) {
            (Some(list), None, None) => list.clone(),
            (None, Some(lo), Some(hi)) => {
                let step = c.count_step.unwrap_or(2);
                if step == 0 || lo > hi {
                    return self.fail("coverage", span, "count range needs count_min <= count_max and count_step > 0");
                }
                (lo..=hi).step_by(step).collect()
            }
            _ => return self.fail("coverage", span, "give either `counts` or `count_min` and `count_max`"),
        };
        if counts.is_empty() {
            return self.fail("coverage", span, "no repeater counts given");
        }
        if let Some(n) = counts.iter().find(|n| **n < 2 || **n % 2 != 0) {
            return self.fail("coverage", span, format!("repeater counts must be even and >= 2, got {n}"));
        }
        if !(c.radius > 0.0) || !c.radius.is_finite() {
            return self.fail("coverage", span, format!("radius must be positive, got {}", c.radius));
        }
        if !c.gamma_db.is_finite() {
            return self.fail("coverage", span, "gamma_db must be finite");
        }
        if let Some(dm) = c.delta_max {
            if !(dm > 0.0) || !dm.is_finite() {
                return self.fail("coverage", span, format!("delta_max must be positive, got {dm}"));
            }
        }
        let convention = match c.gain_convention.as_deref() {
            None | Some("power") => GainConvention::Power,
            Some("amplitude") => GainConvention::Amplitude,
            Some(other) => {
                return self.fail("coverage", span, format!("unknown gain_convention \"{other}\" (expected power or amplitude)"))
            }
        };
        Ok((
            CoverageScenario { radius: c.radius, gamma_db: c.gamma_db, convention, delta_max: c.delta_max },
            counts,
        ))
    }

    pub fn echo(&self) -> Result<(EchoConfig, Option<String>)> {
        let spec = self.require(&self.echo, "echo")?;
        let e = spec.get_ref();
        let cfg = EchoConfig::new(e.alpha, e.beta, e.delay, e.sample_rate, e.duration)
            .or_else(|err| self.fail("echo", spec.span(), err))?;
        Ok((cfg, e.input.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ring_scenario() {
        let s = Scenario::parse(
            r#"
[deployment]
kind = "ring"
count = 15
radius = 1000.0

[channel]
carrier_frequency = 2.0e9
"#,
        )
        .unwrap();
        assert_eq!(s.deployment().unwrap().len(), 15);
        assert_eq!(s.frequency_grid().unwrap().len(), 2001);
        let a = s.analysis().unwrap();
        assert_eq!(a.range, AlphaRange::RelativeToBound(0.1, 10.0));
        assert_eq!(a.n_alpha, 200);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let s = Scenario::parse("[channel]\ncarrier_frequency = 2e9\n\n[deployment]\nkind = \"ring\"\ncount = 4\nradius = 1.0\n")
            .unwrap();
        let err = s.deployment().unwrap_err().0;
        assert!(err.starts_with("line 4: [deployment]"), "{err}");
        let err = Scenario::parse("[channel]\ncarrier_frequency = 2e9\nfoo = 1\n").unwrap_err().0;
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn missing_keys_are_reported() {
        let s = Scenario::parse("[deployment]\nkind = \"grid\"\ncell_width = 100.0\n").unwrap();
        assert!(s.deployment().unwrap_err().0.contains("requires `spacing`"));
        let s = Scenario::parse("[deployment]\nkind = \"hexagon\"\n").unwrap();
        assert!(s.deployment().unwrap_err().0.contains("unknown kind"));
        let s = Scenario::parse("").unwrap();
        assert!(s.channel().unwrap_err().0.contains("missing [channel]"));
    }

    #[test]
    fn coverage_counts_from_range() {
        let s = Scenario::parse("[coverage]\nradius = 1000.0\ngamma_db = 80.0\ncount_min = 2\ncount_max = 10\n").unwrap();
        assert_eq!(s.coverage().unwrap().1, vec![2, 4, 6, 8, 10]);
        let s = Scenario::parse("[coverage]\nradius = 1000.0\ngamma_db = 80.0\ncounts = [2, 3]\n").unwrap();
        assert!(s.coverage().is_err());
    }

    #[test]
    fn analysis_range_must_be_consistent() {
        let s = Scenario::parse("[analysis]\nalpha_min = 1.0\nalpha_max_rel = 3.0\n").unwrap();
        assert!(s.analysis().is_err());
        let s = Scenario::parse("[analysis]\nalpha_min = 5.0\nalpha_max = 1.0\n").unwrap();
        assert!(s.analysis().is_err());
        let s = Scenario::parse("[analysis]\nalpha_min = 0.0\nalpha_max = 1.0\nmeasure = \"determinant\"\n").unwrap();
        assert_eq!(s.analysis().unwrap().measure, Some(MeasureKind::Determinant));
    }
}
