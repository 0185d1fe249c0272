//! Explicit conformal powers `𝒟₁, 𝒟₃, 𝒟₅` of the Dirac operator, the first-order
//! operators `M_k`, a registry of every operator with its conformal bi-degree, and
//! the checks built on them: covariance, Einstein factorization, the leading
//! coefficient of `P^𝒮_{2N}`, and agreement with the tractor construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{add_sections, scale_section, scale_section_c, section_max_abs, sub_sections, Section};
use crate::chart::MetricChart;
use crate::curvature::square;
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::jet::{multi_indices, Jet};
use crate::spinor::{random_spinor_fields, SpinGeometry};
use crate::tensor::Tensor;
use crate::tractor::{Inner, TractorGeometry, WeightedOpSpec};

/// Which implementation of the brackets `(T,∇)` and `(∇,T·)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    /// Coordinate Clifford coefficients and the divergence identity.
    Coordinate,
    /// Orthonormal-frame double sum and the direct co-differential.
    Frame,
}

/// `(T,∇ψ) + (∇,T·ψ)`.
fn symmetric_bracket(spin: &SpinGeometry, t: &Tensor, psi: &[Jet], route: Route) -> Result<Section> {
    let (a, b) = match route {
        Route::Coordinate => (spin.bracket_t_nabla(t, psi)?, spin.bracket_nabla_t(t, psi)?),
        Route::Frame => (
            spin.bracket_t_nabla_frame(t, psi)?,
            spin.bracket_nabla_t_direct(t, psi)?,
        ),
    };
    Ok(add_sections(&a, &b))
}

fn require_not_four(op: &str, n: usize) -> Result<()> {
    if n == 4 {
        return Err(LabError::ExcludedDimension {
            op: op.into(),
            n,
            reason: "the formula divides by n − 4".into(),
        });
    }
    Ok(())
}

/// `2P² + B/(n−4)`.
pub fn fifth_order_tensor(spin: &SpinGeometry) -> Result<Tensor> {
    let n = spin.n();
    require_not_four("2P² + B/(n−4)", n)?;
    let pack = &spin.pack;
    let p2 = square(pack, &pack.schouten).scale(2.0);
    let b = pack.bach()?.scale(1.0 / (n as f64 - 4.0));
    p2.add(&b)
}

/// `𝒟₃ψ = D³ψ − (P,∇ψ) − (∇,P·ψ)`.
pub fn cal_d3(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    let d3 = spin.dirac_pow(psi, 3)?;
    let br = symmetric_bracket(spin, &spin.pack.schouten, psi, Route::Coordinate)?;
    Ok(sub_sections(&d3, &br))
}

/// `D₃(g) = −½𝒟₃`.
pub fn d3(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    Ok(scale_section_c(&cal_d3(spin, psi)?, -0.5))
}

/// `M₁ = ½(g,∇) + ½(∇,g·)`.
pub fn m1(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    Ok(scale_section_c(
        &symmetric_bracket(spin, &spin.pack.g, psi, Route::Frame)?,
        0.5,
    ))
}

/// `M₃ = −(P,∇) − (∇,P·)`.
pub fn m3(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    Ok(scale_section_c(
        &symmetric_bracket(spin, &spin.pack.schouten, psi, Route::Frame)?,
        -1.0,
    ))
}

fn m5_with(spin: &SpinGeometry, psi: &[Jet], route: Route) -> Result<Section> {
    let t = fifth_order_tensor(spin)?;
    let pack = &spin.pack;
    let c = pack.cotton()?;
    let main = scale_section_c(&symmetric_bracket(spin, &t, psi, route)?, 4.0);
    let cp = spin.bracket_cp(c, &pack.schouten, psi, true)?;
    let pc = spin.bracket_cp(c, &pack.schouten, psi, false)?;
    Ok(sub_sections(&main, &scale_section_c(&add_sections(&cp, &pc), 2.0)))
}

/// `M₅ = 4(2P²+B/(n−4),∇) + 4(∇,(2P²+B/(n−4))·) − 2(C,P·) − 2(P,C·)`.
pub fn m5(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    m5_with(spin, psi, Route::Frame)
}

/// `R^spin ψ = D(W·W·ψ) + W·W·Dψ + 4(C·W·ψ + W·C·ψ)`.
pub fn r_spin(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    let pack = &spin.pack;
    let w = &pack.weyl;
    let c = pack.cotton()?;
    let a = spin.dirac(&spin.weyl_weyl(w, psi)?)?;
    let b = spin.weyl_weyl(w, &spin.dirac(psi)?)?;
    let cw = spin.cotton_weyl(c, w, psi, true)?;
    let wc = spin.cotton_weyl(c, w, psi, false)?;
    let tail = scale_section_c(&add_sections(&cw, &wc), 4.0);
    Ok(add_sections(&add_sections(&a, &b), &tail))
}

/// `X D + 2(D² X + X D²) − 4D⁵ + M₅` for a third-order operator `X`, the bracket
/// shared by the printed `D₅` (with `X = D₃`) and by `𝒟₅` (with `X = 𝒟₃`).
fn fifth_order_core(
    spin: &SpinGeometry,
    psi: &[Jet],
    x: &dyn Fn(&SpinGeometry, &[Jet]) -> Result<Section>,
) -> Result<Section> {
    let dpsi = spin.dirac(psi)?;
    let dxd = spin.dirac(&x(spin, &dpsi)?)?;
    let ddx = spin.dirac_pow(&x(spin, psi)?, 2)?;
    let xdd = x(spin, &spin.dirac(&dpsi)?)?;
    let d5 = spin.dirac_pow(&dpsi, 4)?;
    let m5 = m5_with(spin, psi, Route::Coordinate)?;
    let mut out = add_sections(&dxd, &scale_section_c(&add_sections(&ddx, &xdd), 2.0));
    out = sub_sections(&out, &scale_section_c(&d5, 4.0));
    Ok(add_sections(&out, &m5))
}

/// `𝒟₅ = D𝒟₃D + 2(D²𝒟₃ + 𝒟₃D²) − 4D⁵ + M₅`, so that `D₅^red = (n−4)𝒟₅`.
pub fn cal_d5(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    require_not_four("𝒟₅", spin.n())?;
    fifth_order_core(spin, psi, &cal_d3)
}

/// `D₅^red = (n−4)𝒟₅`.
pub fn d5_red(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    let nf = spin.n() as f64;
    Ok(scale_section_c(&cal_d5(spin, psi)?, nf - 4.0))
}

/// `D₅ = D₅^red + R^spin`.
pub fn d5(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    Ok(add_sections(&d5_red(spin, psi)?, &r_spin(spin, psi)?))
}

/// The fifth-order formula with `D₃(g) = −½𝒟₃` substituted literally:
/// `(n−4)[D D₃ D + 2(D² D₃ + D₃ D²) − 4D⁵ + M₅] + R^spin`.
pub fn d5_printed(spin: &SpinGeometry, psi: &[Jet]) -> Result<Section> {
    let n = spin.n();
    require_not_four("D₅", n)?;
    let core = fifth_order_core(spin, psi, &d3)?;
    Ok(add_sections(
        &scale_section_c(&core, n as f64 - 4.0),
        &r_spin(spin, psi)?,
    ))
}

/// `𝓛₁`, the tractor lift of the Dirac operator.
pub fn l1(geo: &TractorGeometry, s: &[Jet]) -> Result<Section> {
    let nf = geo.n() as f64;
    let spec = WeightedOpSpec::new("dirac", (1.0 - nf) / 2.0, -(1.0 + nf) / 2.0);
    geo.l_k(s, 1, &spec, &|sp, x| sp.dirac(x))
}

/// `𝓛₃`, the tractor lift of `𝒟₃`.
pub fn l3(geo: &TractorGeometry, s: &[Jet]) -> Result<Section> {
    let nf = geo.n() as f64;
    let spec = WeightedOpSpec::new("D3", (3.0 - nf) / 2.0, -(3.0 + nf) / 2.0);
    geo.l_k(s, 3, &spec, &cal_d3)
}

/// Bundle an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Domain {
    Spinor,
    SpinTractor,
}

type Apply = fn(&TractorGeometry, &[Jet]) -> Result<Section>;

/// A registered operator.
#[derive(Clone, Copy)]
pub struct OpEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub domain: Domain,
    /// Weight `k` of the bi-degree `((k−n)/2, −(k+n)/2)`, if the operator is conformally covariant.
    pub weight_order: Option<u32>,
    /// Derivatives consumed, i.e. the jet order lost between input and output.
    pub demand: usize,
    /// Extra metric derivatives needed beyond the spinor order.
    pub metric_slack: usize,
    pub excludes_four: bool,
    apply: Apply,
}

impl std::fmt::Debug for OpEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpEntry").field("id", &self.id).finish()
    }
}

impl OpEntry {
    pub fn bi_degree(&self, n: usize) -> Option<(f64, f64)> {
        let nf = n as f64;
        self.weight_order.map(|k| {
            let k = k as f64;
            ((k - nf) / 2.0, -(k + nf) / 2.0)
        })
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if self.excludes_four {
            require_not_four(self.id, n)?;
        }
        Ok(())
    }

    /// Spinor jet order and metric jet order that leave an output of order `slack`.
    pub fn orders(&self, slack: usize) -> (usize, usize) {
        let k = self.demand + slack;
        (k, k + self.metric_slack)
    }

    pub fn apply(&self, geo: &TractorGeometry, s: &[Jet]) -> Result<Section> {
        self.check_dimension(geo.n())?;
        (self.apply)(geo, s)
    }

    pub fn input_len(&self, geo: &TractorGeometry) -> usize {
        match self.domain {
            Domain::Spinor => geo.spin.dim(),
            Domain::SpinTractor => geo.inner_dim(Inner::Spin),
        }
    }
}

const REGISTRY: &[OpEntry] = &[
    OpEntry {
        id: "dirac",
        description: "Dirac operator",
        domain: Domain::Spinor,
        weight_order: Some(1),
        demand: 1,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| g.spin.dirac(s),
    },
    OpEntry {
        id: "D3",
        description: "third conformal power D³ − (P,∇) − (∇,P·)",
        domain: Domain::Spinor,
        weight_order: Some(3),
        demand: 3,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| cal_d3(&g.spin, s),
    },
    OpEntry {
        id: "D5",
        description: "fifth-order operator including the Weyl terms R^spin",
        domain: Domain::Spinor,
        weight_order: Some(5),
        demand: 5,
        metric_slack: 1,
        excludes_four: true,
        apply: |g, s| d5(&g.spin, s),
    },
    OpEntry {
        id: "D5red",
        description: "fifth-order operator without the Weyl terms, (n−4)·𝒟₅",
        domain: Domain::Spinor,
        weight_order: Some(5),
        demand: 5,
        metric_slack: 1,
        excludes_four: true,
        apply: |g, s| d5_red(&g.spin, s),
    },
    OpEntry {
        id: "D5printed",
        description: "fifth-order formula with D₃(g) = −½𝒟₃ substituted literally",
        domain: Domain::Spinor,
        weight_order: Some(5),
        demand: 5,
        metric_slack: 1,
        excludes_four: true,
        apply: |g, s| d5_printed(&g.spin, s),
    },
    OpEntry {
        id: "M1",
        description: "½(g,∇) + ½(∇,g·)",
        domain: Domain::Spinor,
        weight_order: Some(1),
        demand: 1,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| m1(&g.spin, s),
    },
    OpEntry {
        id: "M3",
        description: "−(P,∇) − (∇,P·)",
        domain: Domain::Spinor,
        weight_order: None,
        demand: 1,
        metric_slack: 2,
        excludes_four: false,
        apply: |g, s| m3(&g.spin, s),
    },
    OpEntry {
        id: "M5",
        description: "4(2P²+B/(n−4),∇) + 4(∇,(2P²+B/(n−4))·) − 2(C,P·) − 2(P,C·)",
        domain: Domain::Spinor,
        weight_order: None,
        demand: 1,
        metric_slack: 4,
        excludes_four: true,
        apply: |g, s| m5(&g.spin, s),
    },
    OpEntry {
        id: "P2S",
        description: "Yamabe-type box on spin tractors",
        domain: Domain::SpinTractor,
        weight_order: Some(2),
        demand: 2,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| g.p2n(s, 1),
    },
    OpEntry {
        id: "P4S",
        description: "fourth-order operator on spin tractors from the curved translation principle",
        domain: Domain::SpinTractor,
        weight_order: Some(4),
        demand: 6,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| g.p2n(s, 2),
    },
    OpEntry {
        id: "L1",
        description: "tractor lift of the Dirac operator",
        domain: Domain::SpinTractor,
        weight_order: Some(2),
        demand: 3,
        metric_slack: 1,
        excludes_four: false,
        apply: l1,
    },
    OpEntry {
        id: "L3",
        description: "tractor lift of 𝒟₃",
        domain: Domain::SpinTractor,
        weight_order: Some(4),
        demand: 5,
        metric_slack: 1,
        excludes_four: false,
        apply: l3,
    },
    OpEntry {
        id: "D3pipeline",
        description: "C^spin ∘ P^𝒮₂ ∘ D^spin",
        domain: Domain::Spinor,
        weight_order: Some(3),
        demand: 4,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| g.d2n1(s, 1),
    },
    OpEntry {
        id: "D5pipeline",
        description: "C^spin ∘ P^𝒮₄ ∘ D^spin",
        domain: Domain::Spinor,
        weight_order: Some(5),
        demand: 8,
        metric_slack: 1,
        excludes_four: false,
        apply: |g, s| g.d2n1(s, 2),
    },
];

pub fn registry() -> &'static [OpEntry] {
    REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static OpEntry> {
    REGISTRY
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| LabError::UnregisteredOperator(id.into()))
}

/// Base points drawn uniformly from `[-r, r]^n`.
pub fn sample_points(n: usize, count: usize, radius: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-radius..radius)).collect())
        .collect()
}

/// Random input section for `entry` at the geometry's base point.
pub fn random_input(entry: &OpEntry, geo: &TractorGeometry, order: usize, rng: &mut impl Rng) -> Section {
    let len = entry.input_len(geo);
    let degree = entry.demand + 2;
    random_spinor_fields(len, geo.n(), degree, rng)
        .iter()
        .map(|f| f.jet_at(&geo.spin.x0, order))
        .collect()
}

/// Outcome of a conformal covariance check `D(ĝ)(e^{aσ}ψ̂) = e^{bσ}(D(g)ψ)^`.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub op: String,
    pub bi_degree: (f64, f64),
    pub chart: String,
    pub sigma: String,
    pub residuals: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn exp_weight(s: &[Jet], sigma: &Jet, w: f64) -> Result<Section> {
    Ok(scale_section(s, &sigma.scale(w).exp()?))
}

/// Residual of the covariance law at a single base point.
pub fn covariance_residual(
    entry: &OpEntry,
    chart: &MetricChart,
    sigma: &ScalarField,
    x0: &[f64],
    seed: u64,
) -> Result<f64> {
    let n = chart.n();
    entry.check_dimension(n)?;
    let (a, b) = entry
        .bi_degree(n)
        .ok_or_else(|| LabError::NoBiDegree(entry.id.into()))?;
    let (order, metric_order) = entry.orders(0);
    let g = TractorGeometry::new(SpinGeometry::new(chart, x0, metric_order)?);
    let h = TractorGeometry::new(SpinGeometry::new(&chart.rescaled(sigma.clone()), x0, metric_order)?);
    let sig = sigma.jet_at(x0, metric_order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_input(entry, &g, order, &mut rng);
    let transport = |s: &[Jet]| -> Result<Section> {
        match entry.domain {
            Domain::Spinor => Ok(s.to_vec()),
            Domain::SpinTractor => g.rescale_section(0, Inner::Spin, s, &sig),
        }
    };
    let lhs = entry.apply(&h, &exp_weight(&transport(&psi)?, &sig, a)?)?;
    let rhs = exp_weight(&transport(&entry.apply(&g, &psi)?)?, &sig, b)?;
    Ok(crate::bundle::relative_residual(&lhs, &rhs))
}

/// Covariance residuals over many base points, evaluated in parallel.
pub fn covariance_check(
    id: &str,
    chart: &MetricChart,
    sigma: &ScalarField,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<CovarianceReport> {
    let entry = lookup(id)?;
    let n = chart.n();
    entry.check_dimension(n)?;
    let bi = entry.bi_degree(n).ok_or_else(|| LabError::NoBiDegree(id.into()))?;
    let residuals = points
        .par_iter()
        .enumerate()
        .map(|(k, x0)| covariance_residual(entry, chart, sigma, x0, seed.wrapping_add(k as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let mean = residuals.iter().sum::<f64>() / residuals.len().max(1) as f64;
    Ok(CovarianceReport {
        op: id.into(),
        bi_degree: bi,
        chart: chart.label(),
        sigma: describe_sigma(sigma),
        residuals,
        max,
        mean,
        tolerance,
        pass: max <= tolerance,
    })
}

fn describe_sigma(sigma: &ScalarField) -> String {
    match sigma {
        ScalarField::Zero { .. } => "zero".into(),
        ScalarField::Polynomial { terms, .. } => {
            let deg = terms
                .iter()
                .map(|(e, _)| e.iter().map(|&d| d as usize).sum::<usize>())
                .max()
                .unwrap_or(0);
            format!("polynomial of degree {deg}")
        }
        ScalarField::Trig { .. } => format!("trigonometric of degree {}", sigma.trig_degree()),
        ScalarField::Sum(_) => "sum".into(),
    }
}

/// Residuals of the Einstein factorizations at one base point.
#[derive(Debug, Clone, Serialize)]
pub struct EinsteinResiduals {
    /// `a² = 2J/n = λ/(n−1)` from the chart's Einstein constant.
    pub a_squared: f64,
    /// `𝒟₃ − (D³ − a²D)`.
    pub d3_polynomial: f64,
    /// `𝒟₃ − (D−a)D(D+a)`, only when `a` is real.
    pub d3_product: Option<f64>,
    /// `𝒟₅ − (D⁵ − 5a²D³ + 4a⁴D)`, only for `n ≠ 4`.
    pub d5_polynomial: Option<f64>,
    /// `𝒟₅ − (D−b)(D−a)D(D+a)(D+b)` with `b = 2a`, only when `a` is real and `n ≠ 4`.
    pub d5_product: Option<f64>,
}

fn shifted_product(spin: &SpinGeometry, psi: &[Jet], shifts: &[f64]) -> Result<Section> {
    let mut out = psi.to_vec();
    for &s in shifts.iter().rev() {
        let d = spin.dirac(&out)?;
        out = if s == 0.0 {
            d
        } else {
            let trimmed: Section = out.iter().map(|x| x.truncate(d[0].order()).unwrap()).collect();
            add_sections(&d, &scale_section_c(&trimmed, s))
        };
    }
    Ok(out)
}

fn poly_in_dirac(spin: &SpinGeometry, psi: &[Jet], coeffs: &[(usize, f64)]) -> Result<Section> {
    let top = coeffs.iter().map(|c| c.0).max().unwrap_or(0);
    let mut powers = vec![psi.to_vec()];
    for _ in 0..top {
        let next = spin.dirac(powers.last().unwrap())?;
        powers.push(next);
    }
    let mut out = scale_section_c(&powers[top], 0.0);
    for &(k, c) in coeffs {
        out = add_sections(&out, &scale_section_c(&powers[k], c));
    }
    Ok(out)
}

/// Compares `𝒟₃` (and `𝒟₅` when `with_fifth`) with their Einstein factorizations.
pub fn einstein_check(chart: &MetricChart, x0: &[f64], with_fifth: bool, seed: u64) -> Result<EinsteinResiduals> {
    let n = chart.n();
    let lambda = chart
        .einstein_constant()
        .ok_or_else(|| LabError::NotEinstein(chart.label()))?;
    if with_fifth {
        require_not_four("𝒟₅", n)?;
    }
    let a2 = lambda / (n as f64 - 1.0);
    let order = if with_fifth { 5 } else { 3 };
    let spin = SpinGeometry::new(chart, x0, order + 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = spin.spinor_from_fields(&random_spinor_fields(spin.dim(), n, order + 2, &mut rng), order)?;
    let rel = crate::bundle::relative_residual;
    let d3 = cal_d3(&spin, &psi)?;
    let d3_polynomial = rel(&d3, &poly_in_dirac(&spin, &psi, &[(3, 1.0), (1, -a2)])?);
    let a = (a2 >= 0.0).then(|| a2.sqrt());
    let d3_product = match a {
        Some(a) => Some(rel(&d3, &shifted_product(&spin, &psi, &[-a, 0.0, a])?)),
        None => None,
    };
    let (mut d5_polynomial, mut d5_product) = (None, None);
    if with_fifth {
        let d5 = cal_d5(&spin, &psi)?;
        let poly = poly_in_dirac(&spin, &psi, &[(5, 1.0), (3, -5.0 * a2), (1, 4.0 * a2 * a2)])?;
        d5_polynomial = Some(rel(&d5, &poly));
        if let Some(a) = a {
            let b = 2.0 * a;
            d5_product = Some(rel(&d5, &shifted_product(&spin, &psi, &[-b, -a, 0.0, a, b])?));
        }
    }
    Ok(EinsteinResiduals {
        a_squared: a2,
        d3_polynomial,
        d3_product,
        d5_polynomial,
        d5_product,
    })
}

/// `c(n,N) = (−1)^{N−1} ∏_{k=1}^{N−1} k(2+2k−n)`.
pub fn leading_constant(n: usize, big_n: usize) -> f64 {
    let nf = n as f64;
    let mut c = if big_n % 2 == 1 { 1.0 } else { -1.0 };
    for k in 1..big_n {
        let k = k as f64;
        c *= k * (2.0 + 2.0 * k - nf);
    }
    // avoid reporting −0
    c + 0.0
}

/// Least-squares `c` with `a ≈ c·b` over all jet coefficients of all samples,
/// and the relative residual `|a − c b| / max(|a|, |b|, |c b|)`.
pub fn fit_constant(a: &[Section], b: &[Section]) -> (Complex64, f64) {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (sa, sb) in a.iter().zip(b) {
        for (x, y) in sa.iter().zip(sb) {
            let order = x.order().min(y.order());
            let (x, y) = (x.truncate(order).unwrap(), y.truncate(order).unwrap());
            for (u, v) in x.derivatives().iter().zip(y.derivatives()) {
                num += v.conj() * u;
                den += v.norm_sqr();
            }
        }
    }
    let c = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (sa, sb) in a.iter().zip(b) {
        let fit = scale_section_c(sb, c);
        for (x, y) in sa.iter().zip(&fit) {
            diff = diff.max(x.sub_min(y).max_abs());
            scale = scale.max(x.max_abs()).max(y.max_abs());
        }
        for y in sb {
            scale = scale.max(y.max_abs());
        }
    }
    (c, diff / scale.max(1e-30))
}

/// Flat-chart extraction of the coefficient of `Δ^N` in `P^𝒮_{2N}`.
#[derive(Debug, Clone, Serialize)]
pub struct LeadingCoefficient {
    pub n: usize,
    pub big_n: usize,
    pub measured: Complex64,
    pub expected: f64,
    /// How far `P^𝒮_{2N}s` is from a multiple of `Δ^N s` at the base point.
    pub proportionality: f64,
    pub error: f64,
}

/// Homogeneous random polynomial of exact degree `degree`.
fn homogeneous_polynomial(n: usize, degree: usize, rng: &mut impl Rng) -> ScalarField {
    let terms = multi_indices(n, degree)
        .into_iter()
        .filter(|e| e.iter().map(|&d| d as usize).sum::<usize>() == degree)
        .map(|e| (e, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    ScalarField::Polynomial { n, terms }
}

/// `Σ_μ η^{μμ} ∂_μ² f`, the flat Laplacian of signature `(p, q)`.
fn flat_laplacian(f: &Jet, p: usize) -> Result<Jet> {
    let n = f.n_vars();
    let mut acc: Option<Jet> = None;
    for mu in 0..n {
        let d = f.partial(mu)?.partial(mu)?;
        let d = if mu < p { d.scale(-1.0) } else { d };
        acc = Some(match acc {
            Some(a) => a.add_min(&d),
            None => d,
        });
    }
    Ok(acc.expect("dimension ≥ 1"))
}

/// On the flat chart of signature `(0, n)` the operator `P^𝒮_{2N}` has constant
/// coefficients, so on sections homogeneous of degree `2N` its value at the origin
/// sees only the top-order part. Compares it with `Δ^N` applied componentwise.
pub fn leading_coefficient(n: usize, big_n: usize, seed: u64) -> Result<LeadingCoefficient> {
    let chart = MetricChart::flat(0, n);
    let x0 = vec![0.0; n];
    let demand = 4 * big_n - 2;
    let geo = TractorGeometry::new(SpinGeometry::new(&chart, &x0, demand + 1)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = geo.inner_dim(Inner::Spin);
    let s: Section = (0..len)
        .map(|_| homogeneous_polynomial(n, 2 * big_n, &mut rng).jet_at(&x0, demand))
        .collect();
    let out = geo.p2n(&s, big_n)?;
    let mut reference = Vec::with_capacity(len);
    for c in &s {
        let mut f = c.clone();
        for _ in 0..big_n {
            f = flat_laplacian(&f, 0)?;
        }
        reference.push(f);
    }
    let out0: Section = out.iter().map(|x| x.truncate(0).unwrap()).collect();
    let ref0: Section = reference.iter().map(|x| x.truncate(0).unwrap()).collect();
    let (measured, proportionality) = fit_constant(&[out0], &[ref0]);
    let expected = leading_constant(n, big_n);
    Ok(LeadingCoefficient {
        n,
        big_n,
        measured,
        expected,
        proportionality,
        error: (measured - expected).norm(),
    })
}

/// Comparison of the tractor construction `D_{2N+1}` with the explicit formula
/// (`𝒟₃` for `N = 1`, the full `D₅` for `N = 2`).
#[derive(Debug, Clone, Serialize)]
pub struct Reconciliation {
    pub big_n: usize,
    pub n: usize,
    /// `c` with `pipeline = c · explicit`, fitted on the flat chart.
    pub constant: Complex64,
    pub flat_fit_residual: f64,
    pub chart: String,
    /// `|pipeline − c·explicit| / max(...)` on the curved chart, worst over base points.
    pub curved_residual: f64,
    /// For `N = 2`: `c'` with `pipeline = c'·D₅^printed` on the flat chart.
    pub printed_constant: Option<Complex64>,
    pub printed_fit_residual: Option<f64>,
}

type SpinApply = fn(&SpinGeometry, &[Jet]) -> Result<Section>;

fn explicit_for(big_n: usize) -> Result<SpinApply> {
    match big_n {
        1 => Ok(cal_d3),
        2 => Ok(d5),
        _ => Err(LabError::InvalidConfig {
            field: "N".into(),
            msg: format!("no explicit formula for D_{}", 2 * big_n + 1),
        }),
    }
}

/// Fits the constant between the pipeline and the explicit formula on the flat chart
/// of the same signature, then measures proportionality on `chart` at `points`.
pub fn pipeline_vs_explicit(
    big_n: usize,
    chart: &MetricChart,
    points: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<Reconciliation> {
    let n = chart.n();
    if big_n == 2 {
        require_not_four("D₅ reconciliation", n)?;
    }
    let explicit = explicit_for(big_n)?;
    let entry = lookup(if big_n == 1 { "D3pipeline" } else { "D5pipeline" })?;
    let (order, metric_order) = entry.orders(0);
    let flat = MetricChart::flat(chart.p, chart.q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_flat = vec![0.0; n];
    let gflat = TractorGeometry::new(SpinGeometry::new(&flat, &x_flat, metric_order)?);
    let mut pipe = Vec::new();
    let mut expl = Vec::new();
    let mut printed = Vec::new();
    for _ in 0..samples {
        let psi = random_input(entry, &gflat, order, &mut rng);
        pipe.push(entry.apply(&gflat, &psi)?);
        expl.push(explicit(&gflat.spin, &psi)?);
        if big_n == 2 {
            printed.push(d5_printed(&gflat.spin, &psi)?);
        }
    }
    let (constant, flat_fit_residual) = fit_constant(&pipe, &expl);
    let (printed_constant, printed_fit_residual) = if big_n == 2 {
        let (c, r) = fit_constant(&pipe, &printed);
        (Some(c), Some(r))
    } else {
        (None, None)
    };
    let seeds: Vec<u64> = (0..points.len()).map(|_| rng.gen()).collect();
    let residuals = points
        .par_iter()
        .zip(&seeds)
        .map(|(x0, &sd)| -> Result<f64> {
            let geo = TractorGeometry::new(SpinGeometry::new(chart, x0, metric_order)?);
            let mut rng = ChaCha8Rng::seed_from_u64(sd);
            let psi = random_input(entry, &geo, order, &mut rng);
            let p = entry.apply(&geo, &psi)?;
            let e = scale_section_c(&explicit(&geo.spin, &psi)?, constant);
            Ok(crate::bundle::relative_residual(&p, &e))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Reconciliation {
        big_n,
        n,
        constant,
        flat_fit_residual,
        chart: chart.label(),
        curved_residual: residuals.into_iter().fold(0.0, f64::max),
        printed_constant,
        printed_fit_residual,
    })
}

/// Structure of `A − B` for two spin-tractor operators, in the `(ψ, φ)` splitting.
#[derive(Debug, Clone, Serialize)]
pub struct LowerTriangular {
    /// Size of the upper row and of the dependence on `φ`, relative to the operators.
    pub off_corner: f64,
    /// `|corner − κ·reference| / max(...)` with the claimed `κ`.
    pub corner_residual: f64,
    /// Least-squares `κ` with `corner ≈ κ·reference`.
    pub fitted: Complex64,
    pub fitted_residual: f64,
}

/// Decomposes `A − B` applied to `(ψ, 0)` and `(0, φ)` and compares the lower-left
/// corner with `kappa · reference ψ`.
pub fn lower_triangular_difference(
    geo: &TractorGeometry,
    a: &dyn Fn(&TractorGeometry, &[Jet]) -> Result<Section>,
    b: &dyn Fn(&TractorGeometry, &[Jet]) -> Result<Section>,
    reference: &dyn Fn(&SpinGeometry, &[Jet]) -> Result<Section>,
    kappa: f64,
    psi: &[Jet],
    phi: &[Jet],
) -> Result<LowerTriangular> {
    let d = geo.spin.dim();
    let zero: Section = psi.iter().map(Jet::zero_like).collect();
    let s_psi: Section = psi.iter().chain(&zero).cloned().collect();
    let s_phi: Section = zero.iter().chain(phi).cloned().collect();
    let mut scale: f64 = 0.0;
    let mut diffs = Vec::new();
    for s in [&s_psi, &s_phi] {
        let x = a(geo, s)?;
        let y = b(geo, s)?;
        scale = scale.max(section_max_abs(&x)).max(section_max_abs(&y));
        diffs.push(sub_sections(&x, &y));
    }
    let upper = section_max_abs(&diffs[0][..d]).max(section_max_abs(&diffs[1]));
    let corner = diffs[0][d..].to_vec();
    let r = reference(&geo.spin, psi)?;
    let claimed = scale_section_c(&r, kappa);
    let corner_residual = crate::bundle::relative_residual(&corner, &claimed);
    let (fitted, fitted_residual) = fit_constant(&[corner], &[r]);
    Ok(LowerTriangular {
        off_corner: upper / scale.max(1e-30),
        corner_residual,
        fitted,
        fitted_residual,
    })
}
