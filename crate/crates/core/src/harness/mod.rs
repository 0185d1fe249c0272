//! Scenario runner: configuration, suites, reports.

pub mod config;
pub mod suites;
pub mod torus;

use std::time::Instant;

use serde::{Serialize, Serializer};

pub use config::ScenarioConfig;
pub use suites::{find_suite, suites, Class, Suite};

use crate::error::{LabError, Result};
use suites::Context;

fn scientific<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.5e}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    #[serde(serialize_with = "scientific")]
    pub residual: f64,
    #[serde(serialize_with = "scientific")]
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub id: String,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioConfig,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub version: String,
    pub elapsed_s: f64,
}

impl ScenarioReport {
    pub fn suite(&self, id: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.id == id)
    }

    /// Checks whose id starts with `prefix`, over all suites.
    pub fn checks_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.suites
            .iter()
            .flat_map(|s| s.checks.iter())
            .filter(move |c| c.id.starts_with(prefix))
    }
}

/// Suites in the order the configuration lists them, duplicates dropped.
fn selected(config: &ScenarioConfig) -> Result<Vec<&'static Suite>> {
    let mut out: Vec<&'static Suite> = Vec::new();
    for id in &config.suites {
        let s = find_suite(id)?;
        if !out.iter().any(|o| o.id == s.id) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Full validation, before any computation.
pub fn validate(config: &ScenarioConfig) -> Result<()> {
    config.validate_fields()?;
    let chart = config.build_chart();
    for suite in selected(config)? {
        let demand = suite.demand(config);
        if config.jet_order < demand {
            return Err(LabError::InsufficientOrder {
                op: format!("suite {}", suite.id),
                demand,
                have: config.jet_order,
            });
        }
        suite.check_requirements(config, &chart)?;
    }
    Ok(())
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    validate(config)?;
    let start = Instant::now();
    let ctx = Context::new(config);
    let mut reports = Vec::new();
    for suite in selected(config)? {
        let override_tol = config.tolerances.get(suite.id).copied();
        let checks: Vec<CheckRecord> = suite
            .run(&ctx)?
            .into_iter()
            .map(|m| {
                let tolerance = override_tol.unwrap_or_else(|| m.class.default_tolerance());
                CheckRecord {
                    id: m.id(),
                    anchor: suite.anchor(m.kind).to_string(),
                    residual: m.residual,
                    tolerance,
                    pass: m.residual <= tolerance,
                    detail: m.detail,
                }
            })
            .collect();
        let pass = checks.iter().all(|c| c.pass);
        reports.push(SuiteReport {
            id: suite.id.to_string(),
            checks,
            pass,
        });
    }
    let pass = reports.iter().all(|s| s.pass);
    Ok(ScenarioReport {
        scenario: config.clone(),
        suites: reports,
        pass,
        version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

pub fn emit_report(report: &ScenarioReport, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| LabError::Io(e.to_string())),
        Format::Text => {
            let mut out = String::new();
            for suite in &report.suites {
                for c in &suite.checks {
                    out.push_str(&format!(
                        "{}/{}  {}  {:.5e}  {:.5e}  {}\n",
                        suite.id,
                        c.id,
                        c.anchor,
                        c.residual,
                        c.tolerance,
                        if c.pass { "PASS" } else { "FAIL" }
                    ));
                }
            }
            out.push_str(&format!(
                "scenario {}: {} ({:.1} s)\n",
                report.scenario.name,
                if report.pass { "PASS" } else { "FAIL" },
                report.elapsed_s
            ));
            Ok(out)
        }
    }
}
