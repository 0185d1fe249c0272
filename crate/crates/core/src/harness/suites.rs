//! Test suites the scenario runner can execute.
//!
//! A suite measures residuals; tolerances and pass/fail are applied by the runner.
//! Pointwise suites build the metric at the scenario's jet order `K` and draw field
//! inputs at order `K − 1`. The operator suites (conformal-powers, adjointness-torus)
//! use the exact orders the operator registry declares, and `K` only has to cover them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::torus::{operator_adjoint, splitting_adjoint, SplittingAdjoint, TorusGrid};
use crate::bundle::{
    add_sections, relative_residual, scale_section, scale_section_c, section_max_abs, sub_sections, Section,
};
use crate::chart::MetricChart;
use crate::clifford::{CliffordRep, Monomial, TractorCliffordRep};
use crate::confpower::{
    cal_d3, cal_d5, covariance_check, einstein_check, fifth_order_tensor, l1, l3, leading_coefficient, lookup,
    lower_triangular_difference, m1, m3, m5, pipeline_vs_explicit,
};
use crate::curvature::{cov_deriv, differential, divergence, kulkarni_nomizu, trace_g, CurvaturePack};
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::spinor::{random_spinor_fields, SpinGeometry};
use crate::tensor::{Tensor, Variance};
use crate::tractor::{Inner, TractorGeometry};

/// Which default tolerance a check falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Pointwise,
    FifthOrder,
    Quadrature,
}

impl Class {
    pub fn default_tolerance(self) -> f64 {
        match self {
            Class::Pointwise => 1e-9,
            Class::FifthOrder => 1e-8,
            Class::Quadrature => 1e-6,
        }
    }
}

/// One residual, before tolerances are applied.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub kind: &'static str,
    pub qualifier: Option<String>,
    pub residual: f64,
    pub class: Class,
    pub detail: Option<String>,
}

impl Measurement {
    fn new(kind: &'static str, residual: f64, class: Class) -> Measurement {
        Measurement {
            kind,
            qualifier: None,
            residual,
            class,
            detail: None,
        }
    }

    fn pointwise(kind: &'static str, residual: f64) -> Measurement {
        Measurement::new(kind, residual, Class::Pointwise)
    }

    fn qualified(mut self, q: impl Into<String>) -> Measurement {
        self.qualifier = Some(q.into());
        self
    }

    fn detailed(mut self, d: impl Into<String>) -> Measurement {
        self.detail = Some(d.into());
        self
    }

    pub fn id(&self) -> String {
        match &self.qualifier {
            Some(q) => format!("{}/{q}", self.kind),
            None => self.kind.to_string(),
        }
    }
}

/// Everything a suite needs, built once from the configuration.
pub struct Context {
    pub config: ScenarioConfig,
    pub chart: MetricChart,
    pub sigmas: Vec<ScalarField>,
    pub points: Vec<Vec<f64>>,
}

impl Context {
    pub fn new(config: &ScenarioConfig) -> Context {
        Context {
            config: config.clone(),
            chart: config.build_chart(),
            sigmas: config.build_sigmas(),
            points: config.build_points(),
        }
    }

    fn n(&self) -> usize {
        self.chart.n()
    }

    fn order(&self) -> usize {
        self.config.jet_order
    }

    fn rng(&self, salt: u64, k: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(salt.wrapping_mul(1 << 20).wrapping_add(k as u64));
        rng
    }

    /// Runs `f` at every base point in parallel and keeps the worst residual per check id.
    fn per_point<F>(&self, salt: u64, f: F) -> Result<Vec<Measurement>>
    where
        F: Fn(&[f64], &mut ChaCha8Rng) -> Result<Vec<Measurement>> + Sync,
    {
        let all = self
            .points
            .par_iter()
            .enumerate()
            .map(|(k, x)| f(x, &mut self.rng(salt, k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(worst(all.into_iter().flatten()))
    }
}

/// Merges measurements with the same id, keeping first-seen order and the largest residual.
fn worst(items: impl IntoIterator<Item = Measurement>) -> Vec<Measurement> {
    let mut out: Vec<Measurement> = Vec::new();
    for m in items {
        match out.iter_mut().find(|o| o.id() == m.id()) {
            Some(o) => {
                // NaN must not be hidden by a later finite value
                if m.residual > o.residual || m.residual.is_nan() {
                    o.residual = m.residual;
                }
            }
            None => out.push(m),
        }
    }
    out
}

type DemandFn = fn(&ScenarioConfig) -> usize;
type CheckFn = fn(&ScenarioConfig, &MetricChart) -> Result<()>;
type RunFn = fn(&Context) -> Result<Vec<Measurement>>;

/// A named group of checks.
pub struct Suite {
    pub id: &'static str,
    pub summary: &'static str,
    /// `(check kind, the identity it verifies)`.
    pub anchors: &'static [(&'static str, &'static str)],
    demand: DemandFn,
    requirements: CheckFn,
    run: RunFn,
}

impl Suite {
    /// Metric jet order the suite needs for this configuration.
    pub fn demand(&self, config: &ScenarioConfig) -> usize {
        (self.demand)(config)
    }

    /// Chart- and dimension-specific preconditions.
    pub fn check_requirements(&self, config: &ScenarioConfig, chart: &MetricChart) -> Result<()> {
        (self.requirements)(config, chart)
    }

    pub fn run(&self, ctx: &Context) -> Result<Vec<Measurement>> {
        (self.run)(ctx)
    }

    pub fn anchor(&self, kind: &str) -> &'static str {
        self.anchors
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, a)| *a)
            .unwrap_or("")
    }
}

pub fn suites() -> &'static [Suite] {
    SUITES
}

pub fn find_suite(id: &str) -> Result<&'static Suite> {
    SUITES
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| LabError::InvalidConfig {
            field: "suites".into(),
            msg: format!(
                "unknown suite `{id}`; known suites: {}",
                SUITES.iter().map(|s| s.id).collect::<Vec<_>>().join(", ")
            ),
        })
}

fn no_requirements(_: &ScenarioConfig, _: &MetricChart) -> Result<()> {
    Ok(())
}

fn fifth_allowed(config: &ScenarioConfig) -> bool {
    config.n() != 4
}

static SUITES: &[Suite] = &[
    Suite {
        id: "curvature-identities",
        summary: "Levi-Civita curvature stack: symmetries, Bianchi identities, Weyl/Cotton/Bach structure",
        anchors: &[
            (
                "riemann-symmetries",
                "𝓡(X,Y,Z,W) = −𝓡(Y,X,Z,W) = −𝓡(X,Y,W,Z) = 𝓡(Z,W,X,Y), cyclic sum in X,Y,Z = 0",
            ),
            ("ricci-symmetric", "Ric(X,Y) = Ric(Y,X)"),
            ("weyl-trace-free", "every g-trace of W vanishes"),
            ("metric-parallel", "∇g = 0"),
            ("contracted-bianchi", "div P = dJ"),
            ("cotton-structure", "C_abc = −C_bac, g^{bc} C_abc = 0"),
            ("bach-symmetric", "B_ab = B_ba"),
            (
                "constant-curvature",
                "Einstein charts: τ = nλ, P = λ/(2(n−1)) g, 𝓡 = −λ/(2(n−1)) g⊼g, W = C = B = 0",
            ),
            ("weyl-conformal-weight", "W(e^{2σ}g) = e^{2σ} W(g) as a (0,4) tensor"),
            ("weyl-vanishes", "W = 0 for n = 3 and for conformally flat metrics"),
        ],
        demand: |_| 4,
        requirements: no_requirements,
        run: run_curvature,
    },
    Suite {
        id: "clifford-relations",
        summary: "Kronecker-product Clifford representation, spin-invariant product, tractor splitting data",
        anchors: &[
            ("anticommutator", "Φ(e_i)Φ(e_j) + Φ(e_j)Φ(e_i) = −2 ε_i δ_ij Id"),
            ("product-hermitian", "(v, w)_Δ = conj (w, v)_Δ"),
            ("clifford-skew", "⟨X·v, w⟩ + (−1)^p ⟨v, X·w⟩ = 0"),
            (
                "spin-invariance",
                "(u·v, u·w)_Δ = (v, w)_Δ for u a product of unit vectors in Spin_0(p,q)",
            ),
            ("volume-square", "ω² = ±Id for ω = Φ(e_1)⋯Φ(e_n)"),
            ("null-generators", "f_±² = 0, f_+f_− + f_−f_+ = −2 Id"),
            ("kernel-dimension", "dim ker f_+ = 2^⌊n/2⌋"),
            (
                "intertwining",
                "Φ_{p+1,q+1}(e_j) restricted to W⁺ = ker f_+ is Φ_{p,q}(e_j)",
            ),
            ("split-join", "split ∘ (w_1, w_2 ↦ w_1 + f_−·w_2) = id"),
        ],
        demand: |_| 0,
        requirements: no_requirements,
        run: run_clifford,
    },
    Suite {
        id: "spinor-identities",
        summary: "Spinor calculus identities, the Bochner formula and the self-adjointness divergence identity",
        anchors: &[
            ("clifford-leibniz", "∇_X(Y·ψ) = ∇_X Y·ψ + Y·∇_X ψ"),
            ("spinor-metricity", "X⟨ψ, φ⟩ = ⟨∇_X ψ, φ⟩ + ⟨ψ, ∇_X φ⟩"),
            ("clifford-skew", "⟨X·ψ, φ⟩ + (−1)^p ⟨ψ, X·φ⟩ = 0"),
            ("spin-curvature", "R^S(X,Y)ψ = ½ 𝓡(X,Y)·ψ"),
            ("dirac-commutator", "D(fψ) − f Dψ = grad f·ψ"),
            ("contracted-curvature", "Σ_i ε_i s_i·R^S(s_i, X)ψ = ½ Ric(X)^♮·ψ"),
            ("bochner", "D²ψ = −Δψ + τ/4 ψ"),
            (
                "laplacian-routes",
                "divergence-form, coordinate and frame Bochner Laplacians agree",
            ),
            (
                "divergence-identity",
                "div⟨T(·)^♮·ψ, φ⟩ = ⟨(T,∇)ψ, φ⟩ − (−1)^p⟨ψ, (T,∇)φ⟩ + (−1)^p⟨ψ, (δT)^♮·φ⟩",
            ),
        ],
        demand: |_| 5,
        requirements: no_requirements,
        run: run_spinor,
    },
    Suite {
        id: "tractor-covariance",
        summary: "Tractor and spin tractor metrics, change of scale, splitting operators",
        anchors: &[
            (
                "metric-parallel",
                "g^T, g^𝒮 and g^T ⊗ g^𝒮 are parallel for the normal connections",
            ),
            (
                "scale-change-isometry",
                "the change-of-scale maps preserve the bundle metrics",
            ),
            ("split-covariance", "D^k(ĝ, w)(e^{wσ} ŝ) = e^{(w−1)σ} (D^k(g, w) s)^"),
            ("cosplit-covariance", "C^k(ĝ, w)(e^{wσ} t̂) = e^{(w−1)σ} (C^k(g, w) t)^"),
            (
                "spin-split-covariance",
                "D^𝒮(ĝ, η)(e^{ησ} ψ) = e^{(η−½)σ} (D^𝒮(g, η) ψ)^",
            ),
            (
                "spin-cosplit-covariance",
                "C^𝒮(ĝ, η)(e^{ησ} ŝ) = e^{(η−½)σ} C^𝒮(g, η) s",
            ),
            ("telescoping", "C^𝒮((2N−n)/2) ∘ D^𝒮((2N+1−n)/2) = 0"),
        ],
        demand: |_| 5,
        requirements: no_requirements,
        run: run_tractor,
    },
    Suite {
        id: "casimir",
        summary: "Curved Casimir operator on tractors and its factorization",
        anchors: &[
            (
                "casimir-definition",
                "component formula of the curved Casimir equals its definition",
            ),
            ("casimir-factorization", "(C − β_1)(C − β_2) on (0, 0, f) = 4 D^0(w) f"),
            (
                "spin-tractor-laplacian",
                "block form of the spin tractor Laplacian in a scale",
            ),
        ],
        demand: |_| 5,
        requirements: no_requirements,
        run: run_casimir,
    },
    Suite {
        id: "adjointness-torus",
        summary: "L² adjoint relations on a periodic chart by trapezoidal quadrature",
        anchors: &[
            ("adjoint-D^k", "(D^k(w))* = C^k(1−n−w)"),
            ("adjoint-C^k", "(C^k(w))* = D^k(1−n−w)"),
            ("adjoint-D^spin", "(D^𝒮(η))* = −2√2 i^p C^𝒮(½−n−η)"),
            ("adjoint-C^spin", "(C^𝒮(η))* = −(1/(2√2)) i^p D^𝒮(½−n−η)"),
            (
                "operator-adjoint",
                "⟨Aψ, φ⟩_{L²} = ±⟨ψ, Aφ⟩_{L²}: sign (−1)^p for 𝒟_1, 𝒟_3, D_5, +1 for P^𝒮_2, P^𝒮_4",
            ),
        ],
        demand: |_| 7,
        requirements: torus_requirements,
        run: run_torus,
    },
    Suite {
        id: "conformal-powers",
        summary: "Conformal covariance of registered operators, leading coefficients, pipeline reconciliation",
        anchors: &[
            (
                "covariance",
                "D(e^{2σ}g)(e^{aσ}ψ) = e^{bσ} D(g)ψ at bi-degree ((k−n)/2, −(k+n)/2)",
            ),
            (
                "leading-coefficient",
                "P^𝒮_{2N} = c(n,N) Δ^N + lower order, c(n,N) = (−1)^{N−1} ∏_{k<N} k(2+2k−n)",
            ),
            (
                "reconciliation",
                "C^𝒮 ∘ P^𝒮_{2N} ∘ D^𝒮 = c · explicit operator, c fitted on the flat chart",
            ),
        ],
        demand: powers_demand,
        requirements: powers_requirements,
        run: run_powers,
    },
    Suite {
        id: "einstein",
        summary: "Factorization of conformal Dirac powers on Einstein charts",
        anchors: &[
            ("D3-polynomial", "𝒟_3 = D³ − a² D, a² = λ/(n−1)"),
            ("D3-product", "𝒟_3 = (D − a) D (D + a)"),
            ("D5-polynomial", "𝒟_5 = D⁵ − 5a² D³ + 4a⁴ D"),
            ("D5-product", "𝒟_5 = (D − 2a)(D − a) D (D + a)(D + 2a)"),
        ],
        demand: |c| if fifth_allowed(c) { 6 } else { 4 },
        requirements: |_, chart| {
            if chart.einstein_constant().is_none() {
                return Err(LabError::InvalidConfig {
                    field: "chart.family".into(),
                    msg: "the einstein suite needs a flat, sphere or hyperbolic chart".into(),
                });
            }
            Ok(())
        },
        run: run_einstein,
    },
    Suite {
        id: "polynomial-structure",
        summary: "Conformal Dirac powers as polynomials in the first-order operators M_1, M_3, M_5",
        anchors: &[
            ("D3-structure", "𝒟_3 = M_1³ + M_3"),
            (
                "D5-structure",
                "𝒟_5 = M_1⁵ + M_1 M_3 M_1 + 2(M_1² M_3 + M_3 M_1²) + M_5",
            ),
            (
                "cotton-schouten-symmetry",
                "⟨((C,P·) + (P,C·))ψ, φ⟩ = (−1)^p ⟨ψ, ((C,P·) + (P,C·))φ⟩",
            ),
        ],
        demand: |c| if fifth_allowed(c) { 6 } else { 4 },
        requirements: no_requirements,
        run: run_polynomial,
    },
    Suite {
        id: "L-family",
        summary: "Tractor lifts 𝓛_1, 𝓛_3 against P^𝒮_2, P^𝒮_4",
        anchors: &[
            (
                "L1-lower-triangular",
                "𝓛_1 − P^𝒮_2 is strictly lower triangular in the (ψ, φ) splitting",
            ),
            ("L1-corner", "corner of 𝓛_1 − P^𝒮_2 equals 𝒟_3"),
            (
                "L3-lower-triangular",
                "4𝓛_3 − 4/(4−n) P^𝒮_4 is strictly lower triangular (conformally flat)",
            ),
            (
                "L3-corner",
                "corner of 4𝓛_3 − 4/(4−n) P^𝒮_4 equals 𝒟_5 (conformally flat)",
            ),
        ],
        demand: |c| if fifth_allowed(c) { 6 } else { 4 },
        requirements: no_requirements,
        run: run_l_family,
    },
];

fn rel_t(t: &Tensor, scale: f64) -> f64 {
    t.max_abs() / scale.max(1.0)
}

fn run_curvature(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    ctx.per_point(1, |x, _| {
        let pack = CurvaturePack::new(chart, x, k)?;
        let r = &pack.riemann_cov;
        let scale = r.max_abs().max(1.0);
        let mut out = Vec::new();
        let bianchi = Tensor::from_fn(n, 4, |ix| {
            let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
            r.get(&[a, b, c, d])
                .add_min(r.get(&[b, c, a, d]))
                .add_min(r.get(&[c, a, b, d]))
        });
        let sym = [
            rel_t(&r.add(&r.transpose(0, 1))?, scale),
            rel_t(&r.add(&r.transpose(2, 3))?, scale),
            rel_t(&r.sub(&r.transpose(0, 2).transpose(1, 3))?, scale),
            rel_t(&bianchi, scale),
        ];
        out.push(Measurement::pointwise(
            "riemann-symmetries",
            sym.into_iter().fold(0.0, f64::max),
        ));
        out.push(Measurement::pointwise(
            "ricci-symmetric",
            rel_t(&pack.ricci.sub(&pack.ricci.transpose(0, 1))?, scale),
        ));
        let w = &pack.weyl;
        let mut trace_worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let tr = Tensor::from_fn(n, 2, |ix| {
                let mut acc = Jet::zero(n, w.order());
                for a in 0..n {
                    for b in 0..n {
                        let mut idx = [0usize; 4];
                        let mut free = ix.iter();
                        for (s, slot) in idx.iter_mut().enumerate() {
                            *slot = if s == i {
                                a
                            } else if s == j {
                                b
                            } else {
                                *free.next().expect("two free slots")
                            };
                        }
                        acc = acc.add_min(&pack.g_inv.get(&[a, b]).mul_min(w.get(&idx)));
                    }
                }
                acc
            });
            trace_worst = trace_worst.max(rel_t(&tr, scale));
        }
        out.push(Measurement::pointwise("weyl-trace-free", trace_worst));
        let dg = cov_deriv(&pack, &pack.g, &[Variance::Lower, Variance::Lower])?;
        let gscale = pack.g.max_abs().max(pack.christoffel.max_abs()).max(1.0);
        out.push(Measurement::pointwise("metric-parallel", dg.max_abs() / gscale));
        let div = divergence(&pack, &pack.schouten)?;
        let dj = differential(&pack.j)?;
        let dscale = div.iter().chain(&dj).map(Jet::max_abs).fold(1.0, f64::max);
        let dres = div
            .iter()
            .zip(&dj)
            .map(|(a, b)| a.sub_min(b).max_abs())
            .fold(0.0, f64::max);
        out.push(Measurement::pointwise("contracted-bianchi", dres / dscale));
        let c = pack.cotton()?;
        let cscale = c.max_abs().max(1.0);
        let mut cres = rel_t(&c.add(&c.transpose(0, 1))?, cscale);
        for a in 0..n {
            let tr = Tensor::from_fn(n, 2, |ix| c.get(&[a, ix[0], ix[1]]).clone());
            cres = cres.max(trace_g(&pack.g_inv, &tr).max_abs() / cscale);
        }
        out.push(Measurement::pointwise("cotton-structure", cres));
        let b = pack.bach()?;
        out.push(Measurement::pointwise(
            "bach-symmetric",
            rel_t(&b.sub(&b.transpose(0, 1))?, b.max_abs()),
        ));
        if let Some(lambda) = chart.einstein_constant() {
            let nf = n as f64;
            let a = lambda / (2.0 * (nf - 1.0));
            let tau = (pack.scalar.add_constant(-nf * lambda)).max_abs();
            let p = rel_t(&pack.schouten.sub(&pack.g.scale(a))?, 1.0);
            let gg = kulkarni_nomizu(&pack.g, &pack.g)?.scale(-a);
            let rr = rel_t(&r.sub(&gg)?, scale);
            let rest = [pack.weyl.max_abs(), c.max_abs(), b.max_abs()]
                .into_iter()
                .fold(0.0, f64::max)
                / scale;
            let worst = [tau / nf.max(nf * lambda.abs()), p, rr, rest]
                .into_iter()
                .fold(0.0, f64::max);
            out.push(Measurement::pointwise("constant-curvature", worst));
        }
        if n == 3 || chart.is_conformally_flat_family() {
            out.push(Measurement::pointwise("weyl-vanishes", pack.weyl.max_abs() / scale));
        } else {
            for sigma in &ctx.sigmas {
                let hat = CurvaturePack::new(&chart.rescaled(sigma.clone()), x, k)?;
                let e2s = sigma.jet_at(x, k).scale(2.0).exp()?;
                let expect = Tensor {
                    n,
                    rank: 4,
                    data: pack.weyl.data.iter().map(|w| w.mul_min(&e2s)).collect(),
                };
                out.push(Measurement::pointwise(
                    "weyl-conformal-weight",
                    hat.weyl.relative_distance(&expect),
                ));
            }
        }
        Ok(out)
    })
}

fn max_abs_dense(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn run_clifford(ctx: &Context) -> Result<Vec<Measurement>> {
    let (p, q) = (ctx.config.p(), ctx.config.q());
    let rep = CliffordRep::new(p, q)?;
    let d = rep.dim();
    let mut rng = ctx.rng(2, 0);
    let dense: Vec<DMatrix<Complex64>> = rep.gammas.iter().map(Monomial::to_dense).collect();
    let id = DMatrix::<Complex64>::identity(d, d);
    let mut out = Vec::new();

    let mut anti: f64 = 0.0;
    for i in 0..rep.n {
        for j in 0..rep.n {
            let mut m = &dense[i] * &dense[j] + &dense[j] * &dense[i];
            if i == j {
                m += &id * Complex64::new(2.0 * rep.eps[i], 0.0);
            }
            anti = anti.max(max_abs_dense(&m));
        }
    }
    out.push(Measurement::pointwise("anticommutator", anti));

    let (mut herm, mut skew): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let v = random_vector(d, &mut rng);
        let w = random_vector(d, &mut rng);
        let vw = rep.spinor_product(&v, &w)?;
        let wv = rep.spinor_product(&w, &v)?;
        herm = herm.max((vw - wv.conj()).norm() / vw.norm().max(1.0));
        for g in &rep.gammas {
            let a = rep.spinor_product(&g.apply(&v), &w)?;
            let b = rep.spinor_product(&v, &g.apply(&w))?;
            skew = skew.max((a + b * rep.sign_p()).norm() / a.norm().max(1.0));
        }
    }
    out.push(Measurement::pointwise("product-hermitian", herm));
    out.push(Measurement::pointwise("clifford-skew", skew));

    let mut inv: f64 = 0.0;
    for _ in 0..20 {
        let spacelike = if q > 0 { 2 * rng.gen_range(0..=2usize) } else { 0 };
        let timelike = if p > 0 { 2 * rng.gen_range(0..=2usize) } else { 0 };
        let (spacelike, timelike) = match (spacelike + timelike, q > 0) {
            (0, true) => (2, 0),
            (0, false) => (0, 2),
            _ => (spacelike, timelike),
        };
        let mut u = id.clone();
        for k in 0..spacelike + timelike {
            let sign = if k < spacelike { 1.0 } else { -1.0 };
            let x = loop {
                let x: Vec<f64> = (0..rep.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm: f64 = x.iter().zip(&rep.eps).map(|(a, e)| e * a * a).sum();
                let euclid: f64 = x.iter().map(|a| a * a).sum();
                if norm * sign > 0.25 * euclid && norm * sign > 0.05 {
                    break x.iter().map(|a| a / norm.abs().sqrt()).collect::<Vec<f64>>();
                }
            };
            let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
            for (xi, g) in x.iter().zip(&dense) {
                m += g * Complex64::new(*xi, 0.0);
            }
            u *= m;
        }
        let v = random_vector(d, &mut rng);
        let w = random_vector(d, &mut rng);
        let uv: Vec<Complex64> = (&u * DVector::from_column_slice(&v)).iter().copied().collect();
        let uw: Vec<Complex64> = (&u * DVector::from_column_slice(&w)).iter().copied().collect();
        let before = rep.spinor_product(&v, &w)?;
        let after = rep.spinor_product(&uv, &uw)?;
        // relative to the spinors actually paired: boosts inflate components that the product cancels
        let size = |s: &[Complex64]| s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        inv = inv.max((before - after).norm() / (size(&uv) * size(&uw)).max(before.norm()).max(1.0));
    }
    out.push(Measurement::pointwise("spin-invariance", inv));

    let vol = rep.volume().to_dense();
    let sq = &vol * &vol;
    let s = sq[(0, 0)];
    let sign = if s.re >= 0.0 { 1.0 } else { -1.0 };
    out.push(Measurement::pointwise(
        "volume-square",
        max_abs_dense(&(sq - &id * Complex64::new(sign, 0.0))),
    ));

    let t = TractorCliffordRep::new(p, q)?;
    let big = t.inner.dim();
    let big_id = DMatrix::<Complex64>::identity(big, big);
    let null = [
        max_abs_dense(&(&t.f_plus * &t.f_plus)),
        max_abs_dense(&(&t.f_minus * &t.f_minus)),
        max_abs_dense(&(&t.f_plus * &t.f_minus + &t.f_minus * &t.f_plus + &big_id * Complex64::new(2.0, 0.0))),
    ];
    out.push(Measurement::pointwise(
        "null-generators",
        null.into_iter().fold(0.0, f64::max),
    ));
    let rank = t
        .f_plus
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > 1e-10)
        .count();
    out.push(Measurement::pointwise(
        "kernel-dimension",
        ((big - rank) as f64 - d as f64).abs(),
    ));
    let mut tw: f64 = max_abs_dense(&(&t.f_plus * &t.embed));
    for j in 1..=rep.n {
        let lhs = &t.gamma[j] * &t.embed;
        let rhs = &t.embed * &dense[j - 1];
        tw = tw.max(max_abs_dense(&(lhs - rhs)));
    }
    out.push(Measurement::pointwise("intertwining", tw));
    let mut sj: f64 = 0.0;
    for _ in 0..10 {
        let w1 = random_vector(d, &mut rng);
        let w2 = random_vector(d, &mut rng);
        let (a, b) = t.split_vector(&t.join(&w1, &w2));
        for (x, y) in a.iter().zip(&w1).chain(b.iter().zip(&w2)) {
            sj = sj.max((x - y).norm());
        }
    }
    out.push(Measurement::pointwise("split-join", sj));
    Ok(out)
}

fn spinor_input(geo: &SpinGeometry, order: usize, rng: &mut ChaCha8Rng) -> Result<Section> {
    let f = random_spinor_fields(geo.dim(), geo.n(), order + 2, rng);
    geo.spinor_from_fields(&f, order)
}

fn real_vector_field(n: usize, x: &[f64], order: usize, rng: &mut ChaCha8Rng) -> Vec<Jet> {
    (0..n)
        .map(|_| ScalarField::random_real_polynomial(n, 3, 1.0, rng).jet_at(x, order))
        .collect()
}

/// Difference relative to the larger side, or to `floor` when both sides are tiny (flat charts).
fn rel_floor(a: &[Jet], b: &[Jet], floor: f64) -> f64 {
    let diff = section_max_abs(&sub_sections(a, b));
    diff / section_max_abs(a).max(section_max_abs(b)).max(floor)
}

fn jet_rel(a: &Jet, b: &Jet) -> f64 {
    a.sub_min(b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

fn run_spinor(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    ctx.per_point(3, |x, rng| {
        let geo = SpinGeometry::new(chart, x, k)?;
        let psi = spinor_input(&geo, k - 1, rng)?;
        let phi = spinor_input(&geo, k - 1, rng)?;
        let y = real_vector_field(n, x, k - 1, rng);
        let mut out = Vec::new();

        let mut leib: f64 = 0.0;
        let mut metr: f64 = 0.0;
        for mu in 0..n {
            let lhs = geo.cov(&geo.clifford_vector(&y, &psi), mu)?;
            let dy: Vec<Jet> = (0..n)
                .map(|nu| {
                    let mut v = y[nu].partial(mu)?;
                    for lam in 0..n {
                        v = v.add_min(&geo.pack.christoffel.get(&[nu, mu, lam]).mul_min(&y[lam]));
                    }
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            let rhs = add_sections(
                &geo.clifford_vector(&dy, &psi),
                &geo.clifford_vector(&y, &geo.cov(&psi, mu)?),
            );
            leib = leib.max(relative_residual(&lhs, &rhs));
            let lhs = geo.product(&psi, &phi).partial(mu)?;
            let rhs = geo
                .product(&geo.cov(&psi, mu)?, &phi)
                .add_min(&geo.product(&psi, &geo.cov(&phi, mu)?));
            metr = metr.max(jet_rel(&lhs, &rhs));
        }
        out.push(Measurement::pointwise("clifford-leibniz", leib));
        out.push(Measurement::pointwise("spinor-metricity", metr));

        let a = geo.product(&geo.clifford_vector(&y, &psi), &phi);
        let b = geo
            .product(&psi, &geo.clifford_vector(&y, &phi))
            .scale(geo.rep.sign_p());
        out.push(Measurement::pointwise(
            "clifford-skew",
            a.add_min(&b).max_abs() / a.max_abs().max(1.0),
        ));

        let mut curv: f64 = 0.0;
        for mu in 0..n {
            for nu in mu + 1..n {
                let lhs = geo.conn.curvature_on(&psi, mu, nu)?;
                let rhs = geo.half_curvature_action(mu, nu, &psi)?;
                curv = curv.max(rel_floor(&lhs, &rhs, section_max_abs(&psi)));
            }
        }
        out.push(Measurement::pointwise("spin-curvature", curv));

        let f = ScalarField::random_polynomial(n, 3, 1.0, rng).jet_at(x, k - 1);
        let lhs = sub_sections(
            &geo.dirac(&scale_section(&psi, &f))?,
            &scale_section(&geo.dirac(&psi)?, &f),
        );
        let rhs = geo.clifford_vector(&geo.gradient_vector(&f)?, &psi);
        out.push(Measurement::pointwise(
            "dirac-commutator",
            relative_residual(&lhs, &rhs),
        ));

        let mut cc: f64 = 0.0;
        for mu in 0..n {
            let lhs = geo.contracted_curvature(mu, &psi)?;
            let rhs = scale_section_c(&geo.ricci_action(mu, &psi), 0.5);
            cc = cc.max(rel_floor(&lhs, &rhs, section_max_abs(&psi)));
        }
        out.push(Measurement::pointwise("contracted-curvature", cc));

        let lap = geo.laplacian(&psi)?;
        let d2 = geo.dirac_pow(&psi, 2)?;
        let tau4 = scale_section(&psi, &geo.pack.scalar.scale(0.25));
        out.push(Measurement::pointwise(
            "bochner",
            relative_residual(&d2, &sub_sections(&tau4, &lap)),
        ));
        let routes = relative_residual(&lap, &geo.conn.laplacian_coordinate(&geo.pack, &psi)?)
            .max(relative_residual(&lap, &geo.laplacian_frame(&psi)?));
        out.push(Measurement::pointwise("laplacian-routes", routes));

        let mut tensors = vec![("g", geo.pack.g.clone()), ("P", geo.pack.schouten.clone())];
        if n != 4 {
            tensors.push(("2P²+B/(n−4)", fifth_order_tensor(&geo)?));
        }
        for (name, t) in tensors {
            let (res, scale) = geo.divergence_identity(&t, &psi, &phi)?;
            out.push(Measurement::pointwise("divergence-identity", res.max_abs() / scale.max(1.0)).qualified(name));
        }
        Ok(out)
    })
}

fn random_section(len: usize, n: usize, x: &[f64], order: usize, rng: &mut ChaCha8Rng) -> Section {
    (0..len)
        .map(|_| ScalarField::random_polynomial(n, 4, 1.0, rng).jet_at(x, order))
        .collect()
}

fn exp_scale(s: &[Jet], sigma: &Jet, a: f64) -> Result<Section> {
    Ok(scale_section(s, &sigma.scale(a).exp()?))
}

fn inner_label(inner: Inner) -> &'static str {
    match inner {
        Inner::Scalar => "scalar",
        Inner::Spin => "spin",
    }
}

fn run_tractor(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    ctx.per_point(4, |x, rng| {
        let g = TractorGeometry::new(SpinGeometry::new(chart, x, k)?);
        let mut out = Vec::new();

        let t1 = random_section(n + 2, n, x, k - 1, rng);
        let t2 = random_section(n + 2, n, x, k - 1, rng);
        let s1 = random_section(g.inner_dim(Inner::Spin), n, x, k - 1, rng);
        let s2 = random_section(g.inner_dim(Inner::Spin), n, x, k - 1, rng);
        let k1 = random_section(g.section_len(1, Inner::Spin), n, x, k - 1, rng);
        let k2 = random_section(g.section_len(1, Inner::Spin), n, x, k - 1, rng);
        let conn = g.bundle(1, Inner::Spin);
        let mut par: f64 = 0.0;
        for mu in 0..n {
            let lhs = g.tractor_metric(&t1, &t2).partial(mu)?;
            let rhs = g
                .tractor_metric(&g.tractor.cov(&t1, mu)?, &t2)
                .add_min(&g.tractor_metric(&t1, &g.tractor.cov(&t2, mu)?));
            par = par.max(jet_rel(&lhs, &rhs));
            let lhs = g.spin_tractor_metric(&s1, &s2).partial(mu)?;
            let rhs = g
                .spin_tractor_metric(&g.spin_tractor.cov(&s1, mu)?, &s2)
                .add_min(&g.spin_tractor_metric(&s1, &g.spin_tractor.cov(&s2, mu)?));
            par = par.max(jet_rel(&lhs, &rhs));
            let lhs = g.bundle_metric(1, Inner::Spin, &k1, &k2)?.partial(mu)?;
            let rhs = g
                .bundle_metric(1, Inner::Spin, &conn.cov(&k1, mu)?, &k2)?
                .add_min(&g.bundle_metric(1, Inner::Spin, &k1, &conn.cov(&k2, mu)?)?);
            par = par.max(jet_rel(&lhs, &rhs));
        }
        out.push(Measurement::pointwise("metric-parallel", par));

        for sigma in &ctx.sigmas {
            let h = TractorGeometry::new(SpinGeometry::new(&chart.rescaled(sigma.clone()), x, k)?);
            let sig = sigma.jet_at(x, k);
            let mut iso: f64 = 0.0;
            for (kk, inner) in [
                (1, Inner::Scalar),
                (0, Inner::Spin),
                (1, Inner::Spin),
                (2, Inner::Scalar),
            ] {
                let len = g.section_len(kk, inner);
                let s = random_section(len, n, x, k - 1, rng);
                let t = random_section(len, n, x, k - 1, rng);
                let before = g.bundle_metric(kk, inner, &s, &t)?;
                let hs = g.rescale_section(kk, inner, &s, &sig)?;
                let ht = g.rescale_section(kk, inner, &t, &sig)?;
                let after = h.bundle_metric(kk, inner, &hs, &ht)?;
                iso = iso.max(jet_rel(&after, &before));
            }
            out.push(Measurement::pointwise("scale-change-isometry", iso));

            for (kk, inner) in [(0, Inner::Scalar), (0, Inner::Spin), (1, Inner::Spin)] {
                let w: f64 = rng.gen_range(-2.0..2.0);
                let label = format!("k={kk},{}", inner_label(inner));
                let s = random_section(g.section_len(kk, inner), n, x, k - 1, rng);
                let hs = exp_scale(&g.rescale_section(kk, inner, &s, &sig)?, &sig, w)?;
                let lhs = h.split_d(kk, inner, &hs, w)?;
                let rhs = g.split_d(kk, inner, &s, w)?;
                let rhs = exp_scale(&g.rescale_section(kk + 1, inner, &rhs, &sig)?, &sig, w - 1.0)?;
                out.push(Measurement::pointwise("split-covariance", relative_residual(&lhs, &rhs)).qualified(&label));

                let t = random_section(g.section_len(kk + 1, inner), n, x, k - 1, rng);
                let ht = exp_scale(&g.rescale_section(kk + 1, inner, &t, &sig)?, &sig, w)?;
                let lhs = h.cosplit_c(kk, inner, &ht, w)?;
                let rhs = g.cosplit_c(kk, inner, &t, w)?;
                let rhs = exp_scale(&g.rescale_section(kk, inner, &rhs, &sig)?, &sig, w - 1.0)?;
                out.push(Measurement::pointwise("cosplit-covariance", relative_residual(&lhs, &rhs)).qualified(label));
            }

            let eta: f64 = rng.gen_range(-2.0..2.0);
            let psi = random_section(g.spin.dim(), n, x, k - 1, rng);
            let lhs = h.split_spin(&exp_scale(&psi, &sig, eta)?, eta)?;
            let rhs = g.split_spin(&psi, eta)?;
            let rhs = exp_scale(&g.rescale_section(0, Inner::Spin, &rhs, &sig)?, &sig, eta - 0.5)?;
            out.push(Measurement::pointwise(
                "spin-split-covariance",
                relative_residual(&lhs, &rhs),
            ));

            let s = random_section(g.inner_dim(Inner::Spin), n, x, k - 1, rng);
            let hs = exp_scale(&g.rescale_section(0, Inner::Spin, &s, &sig)?, &sig, eta)?;
            let lhs = h.cosplit_spin(&hs, eta)?;
            let rhs = exp_scale(&g.cosplit_spin(&s, eta)?, &sig, eta - 0.5)?;
            out.push(Measurement::pointwise(
                "spin-cosplit-covariance",
                relative_residual(&lhs, &rhs),
            ));
        }

        let nf = n as f64;
        let psi = random_section(g.spin.dim(), n, x, k - 1, rng);
        let scale = section_max_abs(&psi);
        let mut tele: f64 = 0.0;
        for big_n in 1..=3 {
            let bn = big_n as f64;
            let s = g.split_spin(&psi, (2.0 * bn + 1.0 - nf) / 2.0)?;
            let z = g.cosplit_spin(&s, (2.0 * bn - nf) / 2.0)?;
            tele = tele.max(section_max_abs(&z) / scale);
        }
        out.push(Measurement::pointwise("telescoping", tele));
        Ok(out)
    })
}

fn run_casimir(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    let nf = n as f64;
    ctx.per_point(5, |x, rng| {
        let geo = TractorGeometry::new(SpinGeometry::new(chart, x, k)?);
        let mut out = Vec::new();
        let w: f64 = rng.gen_range(-2.0..2.0);
        let t = random_section(n + 2, n, x, k - 1, rng);
        let a = geo.casimir(&t, w)?;
        let b = geo.casimir_from_definition(&t, w)?;
        out.push(Measurement::pointwise("casimir-definition", relative_residual(&a, &b)));

        let base = w * (w + nf);
        let (b1, b2) = (base - 2.0 * (nf + 2.0 * w - 2.0), base - 2.0 * w);
        let mut t = vec![Jet::zero(n, k - 1); n + 2];
        t[n + 1] = ScalarField::random_polynomial(n, 4, 1.0, rng).jet_at(x, k - 1);
        let c1 = geo.casimir(&t, w)?;
        let step: Section = c1.iter().zip(&t).map(|(c, y)| c.sub_min(&y.scale(b2))).collect();
        let c2 = geo.casimir(&step, w)?;
        let lhs: Section = c2.iter().zip(&step).map(|(c, y)| c.sub_min(&y.scale(b1))).collect();
        let d = geo.split_d(0, Inner::Scalar, &t[n + 1..], w)?;
        out.push(Measurement::pointwise(
            "casimir-factorization",
            relative_residual(&lhs, &scale_section_c(&d, 4.0)),
        ));

        let dim = geo.spin.dim();
        let s = random_section(2 * dim, n, x, k - 1, rng);
        let lap = geo.bundle(0, Inner::Spin).laplacian(&geo.spin.pack, &s)?;
        let (psi, phi) = s.split_at(dim);
        let sp = &geo.spin;
        let jj = sp.pack.j.scale((nf - 2.0) / 2.0);
        let d2psi = sp.dirac_pow(psi, 2)?;
        let d2phi = sp.dirac_pow(phi, 2)?;
        let dphi = sp.dirac(phi)?;
        let ppsi = sp.bracket_t_nabla(&sp.pack.schouten, psi)?;
        let gj = sp.clifford_vector(&sp.gradient_vector(&sp.pack.j)?, psi);
        let mut expect = Vec::with_capacity(2 * dim);
        for r in 0..dim {
            expect.push(
                d2psi[r]
                    .scale(-1.0)
                    .add_min(&jj.mul_min(&psi[r]))
                    .add_min(&dphi[r].scale(2.0)),
            );
        }
        for r in 0..dim {
            expect.push(
                ppsi[r]
                    .add_min(&gj[r].scale(0.5))
                    .sub_min(&d2phi[r])
                    .add_min(&jj.mul_min(&phi[r])),
            );
        }
        out.push(Measurement::pointwise(
            "spin-tractor-laplacian",
            relative_residual(&lap, &expect),
        ));
        Ok(out)
    })
}

/// Degree of the random trigonometric test sections on the torus.
const TORUS_SECTION_DEGREE: usize = 1;

fn torus_requirements(config: &ScenarioConfig, chart: &MetricChart) -> Result<()> {
    TorusGrid::new(chart, config.torus_grid, TORUS_SECTION_DEGREE).map(|_| ())
}

fn torus_operators(n: usize) -> Vec<(&'static str, bool)> {
    // (id, pairs with the signature sign (−1)^p)
    let mut ops = vec![("dirac", true), ("D3", true)];
    if n != 4 {
        ops.push(("D5", true));
    }
    ops.extend([("P2S", false), ("P4S", false)]);
    ops
}

fn run_torus(ctx: &Context) -> Result<Vec<Measurement>> {
    let torus = TorusGrid::new(&ctx.chart, ctx.config.torus_grid, TORUS_SECTION_DEGREE)?;
    let mut rng = ctx.rng(6, 0);
    let mut out = Vec::new();
    let weight = 0.3;
    for which in SplittingAdjoint::ALL {
        let pair = splitting_adjoint(&torus, which, 0, weight, TORUS_SECTION_DEGREE, rng.gen())?;
        out.push(
            Measurement::new(which.label(), pair.residual, Class::Quadrature)
                .detailed(format!("lhs {:.6e}, rhs {:.6e}", pair.lhs, pair.rhs)),
        );
    }
    let sign_p = if ctx.config.p().is_multiple_of(2) { 1.0 } else { -1.0 };
    for (id, signed) in torus_operators(ctx.n()) {
        let entry = lookup(id)?;
        let sign = if signed { sign_p } else { 1.0 };
        let pair = operator_adjoint(&torus, entry, sign, TORUS_SECTION_DEGREE, rng.gen())?;
        out.push(
            Measurement::new("operator-adjoint", pair.residual, Class::Quadrature)
                .qualified(id)
                .detailed(format!("sign {sign:+}, lhs {:.6e}", pair.lhs)),
        );
    }
    Ok(out)
}

fn powers_operators(config: &ScenarioConfig) -> Vec<String> {
    match &config.operators {
        Some(ops) => ops.clone(),
        None => {
            let mut ops = vec!["dirac", "D3", "P2S", "P4S", "L1", "L3", "D3pipeline"];
            if config.n() != 4 {
                ops.insert(2, "D5");
            }
            ops.into_iter().map(String::from).collect()
        }
    }
}

fn powers_demand(config: &ScenarioConfig) -> usize {
    let mut demand = powers_operators(config)
        .iter()
        .filter_map(|id| lookup(id).ok())
        .map(|e| e.orders(0).1)
        .max()
        .unwrap_or(0);
    for (_, pipeline) in reconciled(config) {
        demand = demand.max(lookup(pipeline).map(|e| e.orders(0).1).unwrap_or(0));
    }
    demand
}

/// Explicit operators in the list that have a pipeline counterpart to reconcile against.
fn reconciled(config: &ScenarioConfig) -> Vec<(&'static str, &'static str)> {
    let ops = powers_operators(config);
    [("D3", "D3pipeline"), ("D5", "D5pipeline")]
        .into_iter()
        .filter(|(e, _)| ops.iter().any(|o| o == e))
        .collect()
}

fn powers_requirements(config: &ScenarioConfig, _: &MetricChart) -> Result<()> {
    let n = config.n();
    for id in powers_operators(config) {
        let entry = lookup(&id)?;
        entry.check_dimension(n)?;
        if entry.bi_degree(n).is_none() {
            return Err(LabError::NoBiDegree(id));
        }
    }
    Ok(())
}

fn run_powers(ctx: &Context) -> Result<Vec<Measurement>> {
    let n = ctx.n();
    let mut rng = ctx.rng(7, 0);
    let mut out = Vec::new();
    for id in powers_operators(&ctx.config) {
        let entry = lookup(&id)?;
        let class = if entry.weight_order.unwrap_or(0) >= 4 {
            Class::FifthOrder
        } else {
            Class::Pointwise
        };
        let mut worst: f64 = 0.0;
        for sigma in &ctx.sigmas {
            let rep = covariance_check(
                &id,
                &ctx.chart,
                sigma,
                &ctx.points,
                rng.gen(),
                class.default_tolerance(),
            )?;
            worst = worst.max(rep.max);
        }
        let (a, b) = entry.bi_degree(n).expect("checked in validation");
        out.push(
            Measurement::new("covariance", worst, class)
                .qualified(id.as_str())
                .detailed(format!("bi-degree ({a}, {b})")),
        );
    }
    for big_n in [1, 2] {
        let lc = leading_coefficient(n, big_n, rng.gen())?;
        out.push(
            Measurement::pointwise(
                "leading-coefficient",
                lc.error.max(if lc.expected != 0.0 { lc.proportionality } else { 0.0 }),
            )
            .qualified(format!("N={big_n}"))
            .detailed(format!("measured {:.12}, c(n,N) = {}", lc.measured.re, lc.expected)),
        );
    }
    let pts: Vec<Vec<f64>> = ctx.points.iter().take(3).cloned().collect();
    let recon = reconciled(&ctx.config);
    if recon.iter().any(|(e, _)| *e == "D3") {
        let r = pipeline_vs_explicit(1, &ctx.chart, &pts, 3, rng.gen())?;
        out.push(
            Measurement::pointwise("reconciliation", r.flat_fit_residual.max(r.curved_residual))
                .qualified("D3")
                .detailed(format!("pipeline = ({:.12}) · 𝒟_3", r.constant)),
        );
    }
    if recon.iter().any(|(e, _)| *e == "D5") {
        let r = pipeline_vs_explicit(2, &ctx.chart, &pts[..pts.len().min(2)], 2, rng.gen())?;
        let printed = r.printed_constant.unwrap_or_default();
        out.push(
            Measurement::new(
                "reconciliation",
                r.flat_fit_residual.max(r.curved_residual),
                Class::FifthOrder,
            )
            .qualified("D5")
            .detailed(format!(
                "pipeline = ({:.12}) · D_5; against the literal D_3(g) substitution the flat-chart constant is {:.12}",
                r.constant, printed
            )),
        );
    }
    Ok(out)
}

fn run_einstein(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let fifth = ctx.n() != 4;
    ctx.per_point(8, |x, rng| {
        let r = einstein_check(chart, x, fifth, rng.gen())?;
        let mut out = vec![Measurement::pointwise("D3-polynomial", r.d3_polynomial)];
        if let Some(v) = r.d3_product {
            out.push(Measurement::pointwise("D3-product", v));
        }
        if let Some(v) = r.d5_polynomial {
            out.push(Measurement::new("D5-polynomial", v, Class::FifthOrder));
        }
        if let Some(v) = r.d5_product {
            out.push(Measurement::new("D5-product", v, Class::FifthOrder));
        }
        Ok(out)
    })
}

fn run_polynomial(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    ctx.per_point(9, |x, rng| {
        let spin = SpinGeometry::new(chart, x, k)?;
        let psi = spinor_input(&spin, k - 1, rng)?;
        let phi = spinor_input(&spin, k - 1, rng)?;
        let m1p = |s: &[Jet]| m1(&spin, s);
        let m3p = |s: &[Jet]| m3(&spin, s);
        let m1k = |s: &[Jet], times: usize| (0..times).try_fold(s.to_vec(), |acc, _| m1p(&acc));
        let mut out = Vec::new();

        let rhs3 = add_sections(&m1k(&psi, 3)?, &m3p(&psi)?);
        out.push(Measurement::pointwise(
            "D3-structure",
            relative_residual(&cal_d3(&spin, &psi)?, &rhs3),
        ));
        if n != 4 {
            let mut rhs5 = m1k(&psi, 5)?;
            rhs5 = add_sections(&rhs5, &m1p(&m3p(&m1p(&psi)?)?)?);
            let two = add_sections(&m1k(&m3p(&psi)?, 2)?, &m3p(&m1k(&psi, 2)?)?);
            rhs5 = add_sections(&rhs5, &scale_section_c(&two, 2.0));
            rhs5 = add_sections(&rhs5, &m5(&spin, &psi)?);
            out.push(Measurement::new(
                "D5-structure",
                relative_residual(&cal_d5(&spin, &psi)?, &rhs5),
                Class::FifthOrder,
            ));
        }

        let c = spin.pack.cotton()?.clone();
        let p = spin.pack.schouten.clone();
        let x_op = |s: &[Jet]| -> Result<Section> {
            Ok(add_sections(
                &spin.bracket_cp(&c, &p, s, true)?,
                &spin.bracket_cp(&c, &p, s, false)?,
            ))
        };
        let lhs = spin.product(&x_op(&psi)?, &phi);
        let rhs = spin.product(&psi, &x_op(&phi)?).scale(spin.rep.sign_p());
        out.push(Measurement::pointwise("cotton-schouten-symmetry", jet_rel(&lhs, &rhs)));
        Ok(out)
    })
}

fn run_l_family(ctx: &Context) -> Result<Vec<Measurement>> {
    let chart = &ctx.chart;
    let k = ctx.order();
    let n = ctx.n();
    let nf = n as f64;
    let with_l3 = chart.is_conformally_flat_family() && n != 4;
    ctx.per_point(10, |x, rng| {
        let geo = TractorGeometry::new(SpinGeometry::new(chart, x, k)?);
        let psi = spinor_input(&geo.spin, k - 1, rng)?;
        let phi = spinor_input(&geo.spin, k - 1, rng)?;
        let mut out = Vec::new();
        let r = lower_triangular_difference(&geo, &l1, &|g, s| g.p2n(s, 1), &cal_d3, 1.0, &psi, &phi)?;
        out.push(Measurement::pointwise("L1-lower-triangular", r.off_corner));
        out.push(Measurement::pointwise("L1-corner", r.corner_residual).detailed(format!(
            "corner = ({:.12}) · 𝒟_3, fit residual {:.3e}",
            r.fitted, r.fitted_residual
        )));
        if with_l3 {
            let four_l3 = |g: &TractorGeometry, s: &[Jet]| Ok(scale_section_c(&l3(g, s)?, 4.0));
            let p4 = |g: &TractorGeometry, s: &[Jet]| Ok(scale_section_c(&g.p2n(s, 2)?, 4.0 / (4.0 - nf)));
            let r = lower_triangular_difference(&geo, &four_l3, &p4, &cal_d5, 1.0, &psi, &phi)?;
            out.push(Measurement::new("L3-lower-triangular", r.off_corner, Class::FifthOrder));
            out.push(
                Measurement::new("L3-corner", r.corner_residual, Class::FifthOrder)
                    .detailed(format!("corner = ({:.12}) · 𝒟_5", r.fitted)),
            );
        }
        Ok(out)
    })
}
