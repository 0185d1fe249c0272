//! Scenario files.
//!
//! A scenario is a TOML document; `docs/config.md` in the repository lists every key.
//! Random ingredients (perturbations, conformal factors, base points) are drawn from
//! ChaCha8 streams derived from `seed`, so a file and a seed fix a run completely.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartFamily, MetricChart};
use crate::error::{LabError, Result};
use crate::field::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Flat,
    ConformallyFlat,
    Sphere,
    Hyperbolic,
    Perturbed,
}

/// Shape of random fields: polynomials around the origin or trigonometric polynomials on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Polynomial,
    Trig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub family: ChartKind,
    /// `ε` of a perturbed chart, or the coefficient scale of a conformal factor.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_profile")]
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaKind {
    Polynomial,
    Trig,
    Zero,
}

/// Conformal rescalings `ĝ = e^{2σ} g` used by covariance checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    #[serde(default = "default_sigma_family")]
    pub family: SigmaKind,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_sigma_scale")]
    pub scale: f64,
    /// Number of independent draws.
    #[serde(default = "one")]
    pub count: usize,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig {
            family: SigmaKind::Polynomial,
            degree: 3,
            scale: 0.4,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    /// Coordinates are drawn uniformly from `[-radius, radius]`.
    #[serde(default = "default_sample_radius")]
    pub radius: f64,
    /// Explicit base points; when present they replace the random draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: default_count(),
            radius: default_sample_radius(),
            points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// `[p, q]`: numbers of timelike and spacelike directions.
    pub signature: [usize; 2],
    /// Optional restatement of `p + q`, checked when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Metric jet order `K` at every base point.
    pub jet_order: usize,
    #[serde(default)]
    pub seed: u64,
    pub suites: Vec<String>,
    /// Registered operators for the conformal-powers suite; all covariant ones by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<String>>,
    /// Points per axis of the torus quadrature grid.
    #[serde(default = "default_torus_grid")]
    pub torus_grid: usize,
    pub chart: ChartConfig,
    #[serde(default)]
    pub sigma: SigmaConfig,
    #[serde(default)]
    pub samples: SampleConfig,
    /// Per-suite tolerance overrides.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_amplitude() -> f64 {
    0.15
}
fn default_degree() -> usize {
    3
}
fn default_radius() -> f64 {
    1.0
}
fn default_profile() -> Profile {
    Profile::Polynomial
}
fn default_sigma_family() -> SigmaKind {
    SigmaKind::Polynomial
}

fn default_sigma_scale() -> f64 {
    0.4
}
fn one() -> usize {
    1
}
fn default_count() -> usize {
    3
}
fn default_sample_radius() -> f64 {
    0.3
}
fn default_torus_grid() -> usize {
    12
}

fn invalid(field: &str, msg: impl Into<String>) -> LabError {
    LabError::InvalidConfig {
        field: field.into(),
        msg: msg.into(),
    }
}

// independent random streams per ingredient
const CHART_STREAM: u64 = 1;
const SIGMA_STREAM: u64 = 2;
const POINT_STREAM: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<document>");
            invalid(field, e.to_string().trim())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn p(&self) -> usize {
        self.signature[0]
    }

    pub fn q(&self) -> usize {
        self.signature[1]
    }

    pub fn n(&self) -> usize {
        self.p() + self.q()
    }

    /// Field-level checks that do not depend on the suites.
    pub fn validate_fields(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(invalid("signature", "p + q must be at least 1"));
        }
        if n % 2 == 1 && self.q() == 0 {
            return Err(invalid(
                "signature",
                "odd dimensions need at least one spacelike direction",
            ));
        }
        if let Some(d) = self.dimension {
            if d != n {
                return Err(invalid("dimension", format!("{d} does not match signature sum {n}")));
            }
        }
        if self.suites.is_empty() {
            return Err(invalid("suites", "select at least one suite"));
        }
        let c = &self.chart;
        if !(c.amplitude.is_finite() && c.amplitude >= 0.0) {
            return Err(invalid("chart.amplitude", "must be a finite non-negative number"));
        }
        if !(c.radius.is_finite() && c.radius > 0.0) {
            return Err(invalid("chart.radius", "must be positive"));
        }
        if c.profile == Profile::Trig && !matches!(c.family, ChartKind::Perturbed | ChartKind::ConformallyFlat) {
            return Err(invalid(
                "chart.profile",
                "trig profiles apply to perturbed and conformally-flat charts",
            ));
        }
        if !(self.sigma.scale.is_finite()) {
            return Err(invalid("sigma.scale", "must be finite"));
        }
        if self.sigma.count == 0 {
            return Err(invalid("sigma.count", "must be at least 1"));
        }
        match &self.samples.points {
            Some(points) => {
                if points.is_empty() {
                    return Err(invalid("samples.points", "list is empty"));
                }
                if let Some(bad) = points.iter().position(|x| x.len() != n) {
                    return Err(invalid(
                        "samples.points",
                        format!("point {bad} does not have {n} coordinates"),
                    ));
                }
            }
            None => {
                if self.samples.count == 0 {
                    return Err(invalid("samples.count", "must be at least 1"));
                }
                if self.samples.radius.is_nan() || self.samples.radius <= 0.0 {
                    return Err(invalid("samples.radius", "must be positive"));
                }
            }
        }
        for key in self.tolerances.keys() {
            if !self.suites.contains(key) {
                return Err(invalid(&format!("tolerances.{key}"), "not a selected suite"));
            }
        }
        if let Some((key, _)) = self.tolerances.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid(&format!("tolerances.{key}"), "must be positive"));
        }
        Ok(())
    }

    /// The metric chart the scenario describes.
    pub fn build_chart(&self) -> MetricChart {
        let (p, q, n) = (self.p(), self.q(), self.n());
        let c = &self.chart;
        let mut rng = stream(self.seed, CHART_STREAM);
        let field = |rng: &mut ChaCha8Rng, scale: f64| match c.profile {
            Profile::Polynomial => ScalarField::random_real_polynomial(n, c.degree, scale, rng),
            Profile::Trig => ScalarField::random_trig(n, c.degree, scale, true, rng),
        };
        match c.family {
            ChartKind::Flat => MetricChart::flat(p, q),
            ChartKind::Sphere => MetricChart::sphere(p, q, c.radius),
            ChartKind::Hyperbolic => MetricChart::hyperbolic(p, q, c.radius),
            ChartKind::ConformallyFlat => MetricChart::conformally_flat(p, q, field(&mut rng, c.amplitude)),
            ChartKind::Perturbed => match c.profile {
                Profile::Polynomial => MetricChart::random_perturbed(p, q, c.amplitude, c.degree, &mut rng),
                Profile::Trig => {
                    let h = (0..n * (n + 1) / 2).map(|_| field(&mut rng, 1.0)).collect();
                    MetricChart::new(p, q, ChartFamily::Perturbed { eps: c.amplitude, h })
                }
            },
        }
    }

    /// The conformal factors `σ`.
    pub fn build_sigmas(&self) -> Vec<ScalarField> {
        let n = self.n();
        let s = &self.sigma;
        let mut rng = stream(self.seed, SIGMA_STREAM);
        (0..s.count)
            .map(|_| match s.family {
                SigmaKind::Zero => ScalarField::constant(n, 0.0),
                SigmaKind::Polynomial => ScalarField::random_real_polynomial(n, s.degree, s.scale, &mut rng),
                SigmaKind::Trig => ScalarField::random_trig(n, s.degree, s.scale, true, &mut rng),
            })
            .collect()
    }

    pub fn build_points(&self) -> Vec<Vec<f64>> {
        if let Some(points) = &self.samples.points {
            return points.clone();
        }
        let mut rng = stream(self.seed, POINT_STREAM);
        let r = self.samples.radius;
        (0..self.samples.count)
            .map(|_| (0..self.n()).map(|_| rng.gen_range(-r..r)).collect())
            .collect()
    }
}
