//! Trapezoidal L² quadrature on the torus `[0, 2π)^n` and the adjointness checks built on it.
//!
//! The rule is exact for trigonometric polynomials of wave number below the grid size,
//! and spectrally accurate for the smooth periodic integrands produced by conformal factors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{scale_section_c, Section};
use crate::chart::MetricChart;
use crate::confpower::{Domain, OpEntry};
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::spinor::SpinGeometry;
use crate::tractor::{Inner, TractorGeometry};

/// `Σ_x f(x) √|det g(x)| h^n` over grid samples.
pub fn torus_l2_pairing(values: &[Complex64], volume: &[f64], cell: f64) -> Result<Complex64> {
    if values.len() != volume.len() {
        return Err(LabError::Shape(format!(
            "{} samples against {} volume weights",
            values.len(),
            volume.len()
        )));
    }
    Ok(values.iter().zip(volume).map(|(v, w)| v * *w).sum::<Complex64>() * cell)
}

/// A uniform grid on the torus carrying a periodic metric chart.
#[derive(Debug, Clone)]
pub struct TorusGrid {
    pub chart: MetricChart,
    pub size: usize,
}

impl TorusGrid {
    /// `bandwidth` is the largest wave number of the sections that will be paired.
    pub fn new(chart: &MetricChart, size: usize, bandwidth: usize) -> Result<TorusGrid> {
        if !chart.is_periodic() {
            return Err(LabError::InvalidConfig {
                field: "chart".into(),
                msg: format!("{} is not 2π-periodic", chart.label()),
            });
        }
        let need = 2 * bandwidth.max(chart.trig_degree()) + 1;
        if size < need {
            return Err(LabError::InvalidConfig {
                field: "torus_grid".into(),
                msg: format!("grid {size} is below the Nyquist bound {need} for wave number {bandwidth}"),
            });
        }
        Ok(TorusGrid {
            chart: chart.clone(),
            size,
        })
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.size as f64).powi(self.n() as i32)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let h = 2.0 * std::f64::consts::PI / self.size as f64;
        (0..self.size.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let x = (code % self.size) as f64 * h;
                        code /= self.size;
                        x
                    })
                    .collect()
            })
            .collect()
    }

    /// Integrates several pointwise quantities at once; `f` sees the tractor geometry at each grid point,
    /// so `metric_order` must be at least 2.
    pub fn integrate<F>(&self, metric_order: usize, f: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&TractorGeometry, &[f64]) -> Result<Vec<Complex64>> + Sync,
    {
        let samples: Vec<(Vec<Complex64>, f64)> = self
            .points()
            .par_iter()
            .map(|x| {
                let geo = TractorGeometry::new(SpinGeometry::new(&self.chart, x, metric_order)?);
                let vol = volume_density(&geo.spin);
                Ok((f(&geo, x)?, vol))
            })
            .collect::<Result<_>>()?;
        let m = samples.first().map(|s| s.0.len()).unwrap_or(0);
        let volume: Vec<f64> = samples.iter().map(|s| s.1).collect();
        (0..m)
            .map(|i| {
                let vals: Vec<Complex64> = samples.iter().map(|s| s.0[i]).collect();
                torus_l2_pairing(&vals, &volume, self.cell_volume())
            })
            .collect()
    }
}

fn volume_density(spin: &SpinGeometry) -> f64 {
    let n = spin.n();
    let g = &spin.pack.g;
    DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]).value().re)
        .determinant()
        .abs()
        .sqrt()
}

/// Two L² pairings that an adjointness statement claims are equal.
#[derive(Debug, Clone, Serialize)]
pub struct AdjointPairing {
    pub id: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl AdjointPairing {
    fn new(id: String, lhs: Complex64, rhs: Complex64) -> AdjointPairing {
        let residual = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        AdjointPairing { id, lhs, rhs, residual }
    }
}

/// Random complex trigonometric section of the given length.
pub fn random_trig_section(len: usize, n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Vec<ScalarField> {
    (0..len)
        .map(|_| ScalarField::random_trig(n, degree, 1.0, false, rng))
        .collect()
}

fn jets(fields: &[ScalarField], x: &[f64], order: usize) -> Section {
    fields.iter().map(|f| f.jet_at(x, order)).collect()
}

fn values(s: &[Jet]) -> Section {
    s.iter().map(|j| j.truncate(0).expect("order ≥ 0")).collect()
}

/// Which of the four adjoint statements for splitting operators to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplittingAdjoint {
    /// `(D^k(g,w))* = C^k(g,1−n−w)`.
    TractorD,
    /// `(C^k(g,w))* = D^k(g,1−n−w)`.
    TractorC,
    /// `(D^spin(g,η))* = −2√2 i^p C^spin(g,½−n−η)`.
    SpinD,
    /// `(C^spin(g,η))* = −(1/(2√2)) i^p D^spin(g,½−n−η)`.
    SpinC,
}

impl SplittingAdjoint {
    pub const ALL: [SplittingAdjoint; 4] = [
        SplittingAdjoint::TractorD,
        SplittingAdjoint::TractorC,
        SplittingAdjoint::SpinD,
        SplittingAdjoint::SpinC,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SplittingAdjoint::TractorD => "adjoint-D^k",
            SplittingAdjoint::TractorC => "adjoint-C^k",
            SplittingAdjoint::SpinD => "adjoint-D^spin",
            SplittingAdjoint::SpinC => "adjoint-C^spin",
        }
    }
}

/// `⟨A s, t⟩_{L²}` against `⟨s, A* t⟩_{L²}` for one of the splitting-operator adjoint statements.
///
/// For the tractor statements `k` is the tensor rank of the input of `D^k`, with spin tractor inner factor.
pub fn splitting_adjoint(
    torus: &TorusGrid,
    which: SplittingAdjoint,
    k: usize,
    weight: f64,
    degree: usize,
    seed: u64,
) -> Result<AdjointPairing> {
    let n = torus.n();
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = TractorGeometry::new(SpinGeometry::new(&torus.chart, &vec![0.0; n], 3)?);
    let (len_small, len_big) = match which {
        SplittingAdjoint::TractorD | SplittingAdjoint::TractorC => {
            (probe.section_len(k, Inner::Spin), probe.section_len(k + 1, Inner::Spin))
        }
        SplittingAdjoint::SpinD | SplittingAdjoint::SpinC => (probe.spin.dim(), probe.inner_dim(Inner::Spin)),
    };
    let small = random_trig_section(len_small, n, degree, &mut rng);
    let big = random_trig_section(len_big, n, degree, &mut rng);
    let order = 2;
    let dual = 1.0 - nf - weight;
    let spin_dual = 0.5 - nf - weight;
    let sums = torus.integrate(order + 2, |geo, x| {
        let s = jets(&small, x, order);
        let t = jets(&big, x, order);
        let metric_big = |a: &[Jet], b: &[Jet]| -> Result<Complex64> {
            Ok(match which {
                SplittingAdjoint::TractorD | SplittingAdjoint::TractorC => {
                    geo.bundle_metric(k + 1, Inner::Spin, a, b)?.value()
                }
                _ => geo.spin_tractor_metric(a, b).value(),
            })
        };
        let metric_small = |a: &[Jet], b: &[Jet]| -> Result<Complex64> {
            Ok(match which {
                SplittingAdjoint::TractorD | SplittingAdjoint::TractorC => {
                    geo.bundle_metric(k, Inner::Spin, a, b)?.value()
                }
                _ => geo.spin.product(a, b).value(),
            })
        };
        let ip = geo.spin.rep.i_pow_p();
        let c_spin = ip * (-2.0 * std::f64::consts::SQRT_2);
        let c_spin_co = ip * (-1.0 / (2.0 * std::f64::consts::SQRT_2));
        let (lhs, rhs) = match which {
            SplittingAdjoint::TractorD => (
                metric_big(&values(&geo.split_d(k, Inner::Spin, &s, weight)?), &values(&t))?,
                metric_small(&values(&s), &values(&geo.cosplit_c(k, Inner::Spin, &t, dual)?))?,
            ),
            SplittingAdjoint::TractorC => (
                metric_small(&values(&geo.cosplit_c(k, Inner::Spin, &t, weight)?), &values(&s))?,
                metric_big(&values(&t), &values(&geo.split_d(k, Inner::Spin, &s, dual)?))?,
            ),
            SplittingAdjoint::SpinD => (
                metric_big(&values(&geo.split_spin(&s, weight)?), &values(&t))?,
                metric_small(
                    &values(&s),
                    &values(&scale_section_c(&geo.cosplit_spin(&t, spin_dual)?, c_spin)),
                )?,
            ),
            SplittingAdjoint::SpinC => (
                metric_small(&values(&geo.cosplit_spin(&t, weight)?), &values(&s))?,
                metric_big(
                    &values(&t),
                    &values(&scale_section_c(&geo.split_spin(&s, spin_dual)?, c_spin_co)),
                )?,
            ),
        };
        Ok(vec![lhs, rhs])
    })?;
    Ok(AdjointPairing::new(
        format!("{}[k={k},w={weight}]", which.label()),
        sums[0],
        sums[1],
    ))
}

/// `⟨A ψ, φ⟩_{L²}` against `sign ⟨ψ, A φ⟩_{L²}` for a registered operator.
///
/// Spinor operators use the product `⟨·,·⟩` and spin tractor operators the metric `g^𝒮`.
pub fn operator_adjoint(
    torus: &TorusGrid,
    entry: &OpEntry,
    sign: f64,
    degree: usize,
    seed: u64,
) -> Result<AdjointPairing> {
    let n = torus.n();
    entry.check_dimension(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = TractorGeometry::new(SpinGeometry::new(&torus.chart, &vec![0.0; n], 3)?);
    let len = entry.input_len(&probe);
    let psi_f = random_trig_section(len, n, degree, &mut rng);
    let phi_f = random_trig_section(len, n, degree, &mut rng);
    let (order, metric_order) = entry.orders(0);
    let sums = torus.integrate(metric_order, |geo, x| {
        let psi = jets(&psi_f, x, order);
        let phi = jets(&phi_f, x, order);
        let a_psi = values(&entry.apply(geo, &psi)?);
        let a_phi = values(&entry.apply(geo, &phi)?);
        let pair = |a: &[Jet], b: &[Jet]| match entry.domain {
            Domain::Spinor => geo.spin.product(a, b).value(),
            Domain::SpinTractor => geo.spin_tractor_metric(a, b).value(),
        };
        Ok(vec![pair(&a_psi, &values(&phi)), pair(&values(&psi), &a_phi) * sign])
    })?;
    Ok(AdjointPairing::new(entry.id.to_string(), sums[0], sums[1]))
}
