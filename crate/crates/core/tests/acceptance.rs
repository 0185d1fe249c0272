//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Most criteria are read off harness scenarios; the rest call the library directly.
//! The process exits nonzero when a criterion fails, except for the L1 corner of criterion 10,
//! which is a documented discrepancy (see the decisions ledger) and is required to keep failing
//! in exactly that way until it is resolved.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use confdirac::chart::MetricChart;
use confdirac::confpower::leading_coefficient;
use confdirac::curvature::CurvaturePack;
use confdirac::harness::{run_scenario, ScenarioConfig, ScenarioReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One measured quantity against its acceptance tolerance.
struct Item {
    label: String,
    residual: f64,
    tolerance: f64,
    detail: Option<String>,
}

impl Item {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

struct Criterion {
    number: usize,
    title: &'static str,
    items: Vec<Item>,
}

impl Criterion {
    fn new(number: usize, title: &'static str) -> Criterion {
        Criterion {
            number,
            title,
            items: Vec::new(),
        }
    }

    fn add(&mut self, label: impl Into<String>, residual: f64, tolerance: f64) {
        self.items.push(Item {
            label: label.into(),
            residual,
            tolerance,
            detail: None,
        });
    }

    /// Every check of `report` whose id starts with `prefix`, with the scenario name in the label.
    fn take(&mut self, report: &ScenarioReport, suite: &str, prefix: &str, tolerance: f64) {
        let s = report
            .suite(suite)
            .unwrap_or_else(|| panic!("{} has no suite {suite}", report.scenario.name));
        let before = self.items.len();
        for c in s.checks.iter().filter(|c| c.id.starts_with(prefix)) {
            self.items.push(Item {
                label: format!("{}: {suite}/{}", report.scenario.name, c.id),
                residual: c.residual,
                tolerance,
                detail: c.detail.clone(),
            });
        }
        assert!(
            self.items.len() > before,
            "{}: no {suite}/{prefix}* checks",
            report.scenario.name
        );
    }

    fn pass(&self) -> bool {
        self.items.iter().all(Item::pass)
    }

    fn failures(&self) -> Vec<&Item> {
        self.items.iter().filter(|i| !i.pass()).collect()
    }

    fn print(&self) {
        let worst = self
            .items
            .iter()
            .max_by(|a, b| (a.residual / a.tolerance).total_cmp(&(b.residual / b.tolerance)))
            .expect("criterion has items");
        println!(
            "criterion {:>2} {:<58} {} ({} checks, worst {:.3e} vs {:.0e} at {})",
            self.number,
            self.title,
            if self.pass() { "PASS" } else { "FAIL" },
            self.items.len(),
            worst.residual,
            worst.tolerance,
            worst.label
        );
        for f in self.failures() {
            println!(
                "    failed: {} residual {:.5e} > {:.0e}{}",
                f.label,
                f.residual,
                f.tolerance,
                f.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
            );
        }
    }
}

fn scenario(text: &str) -> ScenarioReport {
    let cfg = ScenarioConfig::from_toml(text).unwrap();
    let t = Instant::now();
    let report = run_scenario(&cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
    eprintln!("  ran {} in {:.1} s", cfg.name, t.elapsed().as_secs_f64());
    report
}

const LOCAL_SUITES: &str = r#"["curvature-identities", "spinor-identities", "tractor-covariance", "casimir", "conformal-powers", "polynomial-structure", "L-family"]"#;

fn local(name: &str, signature: &str, seed: u64, chart: &str) -> ScenarioReport {
    scenario(&format!(
        "name = \"{name}\"\nsignature = {signature}\njet_order = 9\nseed = {seed}\nsuites = {LOCAL_SUITES}\n\
         [chart]\n{chart}\n[sigma]\ncount = 3\n[samples]\ncount = 10\n"
    ))
}

fn torus(name: &str, signature: &str, grid: usize, chart: &str) -> ScenarioReport {
    scenario(&format!(
        "name = \"{name}\"\nsignature = {signature}\njet_order = 7\nseed = 3\ntorus_grid = {grid}\n\
         suites = [\"adjointness-torus\"]\n[chart]\n{chart}\n"
    ))
}

fn curvature_directly(c: &mut Criterion) {
    for (p, q) in [(0, 3), (1, 3), (0, 5), (2, 2)] {
        let pack = CurvaturePack::new(&MetricChart::flat(p, q), &vec![0.3; p + q], 4).unwrap();
        let zero = [
            pack.christoffel.max_abs(),
            pack.riemann_cov.max_abs(),
            pack.ricci.max_abs(),
            pack.scalar.max_abs(),
            pack.schouten.max_abs(),
            pack.weyl.max_abs(),
            pack.cotton().unwrap().max_abs(),
            pack.bach().unwrap().max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        // exact zeros: any nonzero value at all fails
        c.add(format!("flat ({p},{q}) curvature"), zero, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let charts = [
        MetricChart::random_perturbed(0, 3, 0.15, 3, &mut rng),
        MetricChart::random_perturbed(1, 3, 0.1, 3, &mut rng),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let chart = &charts[i % charts.len()];
        let n = chart.n();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let pack = CurvaturePack::new(chart, &x, 2).unwrap();
        let fd = common::ricci_fd(chart, &x, 1e-4);
        let scale = fd.amax().max(1e-3);
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((pack.ricci.get(&[a, b]).value().re - fd[(a, b)]).abs() / scale);
            }
        }
        let gam = common::christoffel_fd(chart, &x, 1e-5);
        let gscale = gam.iter().fold(1e-3, |m: f64, g| m.max(g.abs()));
        for (j, g) in gam.iter().enumerate() {
            worst = worst.max((pack.christoffel.data[j].value().re - g).abs() / gscale);
        }
    }
    c.add("finite differences, 20 points", worst, 1e-5);
}

fn main() -> ExitCode {
    let start = Instant::now();
    eprintln!("acceptance: running scenarios");

    let generic3 = local("perturbed-03", "[0, 3]", 1, "family = \"perturbed\"\namplitude = 0.15");
    let conformal12 = local(
        "conformally-flat-12",
        "[1, 2]",
        2,
        "family = \"conformally-flat\"\namplitude = 0.3",
    );
    let sphere3 = scenario(
        "name = \"sphere-03\"\nsignature = [0, 3]\njet_order = 6\n\
         suites = [\"curvature-identities\", \"spinor-identities\", \"einstein\"]\n\
         [chart]\nfamily = \"sphere\"\n[samples]\ncount = 10\n",
    );
    let sphere5 = scenario(
        "name = \"sphere-05\"\nsignature = [0, 5]\njet_order = 6\nsuites = [\"curvature-identities\", \"einstein\"]\n\
         [chart]\nfamily = \"sphere\"\n[samples]\ncount = 10\n",
    );
    let fifth = |name: &str, seed: u64, chart: &str, extra: &str| {
        scenario(&format!(
            "name = \"{name}\"\nsignature = [0, 5]\njet_order = 9\nseed = {seed}\noperators = [\"D5\"]\n\
             suites = [\"conformal-powers\"{extra}]\n[chart]\n{chart}\n[sigma]\ncount = 3\n[samples]\ncount = 10\n"
        ))
    };
    let generic5 = fifth("perturbed-05", 4, "family = \"perturbed\"\namplitude = 0.1", "");
    let conformal5 = fifth(
        "conformally-flat-05",
        5,
        "family = \"conformally-flat\"\namplitude = 0.3",
        ", \"polynomial-structure\", \"L-family\"",
    );
    let trig = "family = \"conformally-flat\"\nprofile = \"trig\"\ndegree = 1\namplitude = 0.05";
    let tori = [
        torus("flat-torus-03", "[0, 3]", 8, "family = \"flat\""),
        torus("flat-torus-12", "[1, 2]", 8, "family = \"flat\""),
        torus("conformally-flat-torus-03", "[0, 3]", 12, trig),
        torus("conformally-flat-torus-12", "[1, 2]", 12, trig),
    ];
    let mut clifford = Vec::new();
    for n in 1..=8usize {
        for p in 0..=n {
            let q = n - p;
            if n % 2 == 1 && q == 0 {
                continue;
            }
            let cfg = ScenarioConfig::from_toml(&format!(
                "name = \"clifford-{p}{q}\"\nsignature = [{p}, {q}]\njet_order = 0\nsuites = [\"clifford-relations\"]\n\
                 [chart]\nfamily = \"flat\"\n"
            ))
            .unwrap();
            clifford.push(run_scenario(&cfg).unwrap());
        }
    }

    let mut criteria = Vec::new();

    let mut c = Criterion::new(1, "curvature stack");
    for r in [&sphere3, &sphere5] {
        c.take(r, "curvature-identities", "", 1e-9);
    }
    curvature_directly(&mut c);
    criteria.push(c);

    let mut c = Criterion::new(2, "Clifford relations, all signatures n <= 8");
    for r in &clifford {
        c.take(r, "clifford-relations", "anticommutator", 1e-14);
        c.take(r, "clifford-relations", "spin-invariance", 1e-12);
    }
    criteria.push(c);

    let mut c = Criterion::new(3, "spinor identities on three chart families");
    for r in [&generic3, &conformal12, &sphere3] {
        c.take(r, "spinor-identities", "", 1e-9);
    }
    criteria.push(c);

    let mut c = Criterion::new(4, "splitting-operator covariance and Casimir");
    for r in [&generic3, &conformal12] {
        c.take(r, "tractor-covariance", "", 1e-9);
        c.take(r, "casimir", "", 1e-9);
    }
    criteria.push(c);

    let mut c = Criterion::new(5, "splitting-operator adjoints on tori");
    for r in &tori {
        c.take(r, "adjointness-torus", "adjoint-", 1e-6);
    }
    criteria.push(c);

    let mut c = Criterion::new(6, "leading coefficient of P^S_2N");
    for (n, big_n) in [(3, 1), (3, 2), (5, 2), (6, 3)] {
        let lc = leading_coefficient(n, big_n, 60 + n as u64).unwrap();
        let residual = lc.error.max(if lc.expected != 0.0 { lc.proportionality } else { 0.0 });
        c.add(format!("(n, N) = ({n}, {big_n}), c = {}", lc.expected), residual, 1e-10);
    }
    criteria.push(c);

    let mut c = Criterion::new(7, "conformal covariance of the registered operators");
    for r in [&generic3, &conformal12] {
        for op in ["dirac", "D3", "P2S", "P4S", "L1", "L3"] {
            c.take(r, "conformal-powers", &format!("covariance/{op}"), 1e-8);
        }
    }
    for r in [&generic5, &conformal5] {
        c.take(r, "conformal-powers", "covariance/D5", 1e-8);
    }
    criteria.push(c);

    let mut c = Criterion::new(8, "Einstein factorization on spheres");
    for r in [&sphere3, &sphere5] {
        c.take(r, "einstein", "", 1e-8);
    }
    criteria.push(c);

    let mut c = Criterion::new(9, "polynomial structure in M_1, M_3, M_5");
    for r in [&generic3, &conformal12] {
        c.take(r, "polynomial-structure", "D3-structure", 1e-8);
    }
    c.take(&conformal5, "polynomial-structure", "D5-structure", 1e-8);
    criteria.push(c);

    let mut c = Criterion::new(10, "L_1 and L_3 against P^S_2 and P^S_4");
    for r in [&generic3, &conformal12] {
        c.take(r, "L-family", "L1-", 1e-9);
    }
    c.take(&conformal5, "L-family", "L3-", 1e-8);
    criteria.push(c);

    let mut c = Criterion::new(11, "operator adjoints and the divergence identity");
    for r in &tori {
        c.take(r, "adjointness-torus", "operator-adjoint/", 1e-6);
    }
    for r in [&generic3, &conformal12, &sphere3] {
        c.take(r, "spinor-identities", "divergence-identity", 1e-10);
    }
    criteria.push(c);

    let mut c = Criterion::new(12, "pipeline against explicit formulas");
    c.take(&generic3, "conformal-powers", "reconciliation/D3", 1e-9);
    c.take(&conformal5, "conformal-powers", "reconciliation/D5", 1e-7);
    criteria.push(c);

    println!();
    for c in &criteria {
        c.print();
    }
    for c in &criteria {
        for i in c
            .items
            .iter()
            .filter(|i| i.label.contains("reconciliation") || i.label.contains("corner"))
        {
            if let Some(d) = &i.detail {
                println!("  {}: {d}", i.label);
            }
        }
    }
    let passed = criteria.iter().filter(|c| c.pass()).count();
    println!(
        "{passed}/{} criteria pass ({:.1} s)",
        criteria.len(),
        start.elapsed().as_secs_f64()
    );

    let known = |i: &Item| i.label.ends_with("L-family/L1-corner");
    let unexpected: Vec<String> = criteria
        .iter()
        .flat_map(|c| {
            c.failures()
                .into_iter()
                .filter(|i| !known(i))
                .map(move |i| format!("{}: {}", c.number, i.label))
        })
        .collect();
    let corner_fails = criteria[9].items.iter().filter(|i| known(i)).all(|i| !i.pass());
    if !corner_fails {
        println!("the L1 corner now passes; update the decisions ledger");
    }
    if unexpected.is_empty() && corner_fails {
        println!("only the documented L1 corner discrepancy fails");
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected failure in criterion {u}");
        }
        ExitCode::FAILURE
    }
}
