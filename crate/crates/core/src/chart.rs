//! Analytic semi-Riemannian metrics on a coordinate chart, evaluated as jets.
//!
//! The flat reference metric is `η = diag(−1,…,−1, +1,…,+1)` with the `p`
//! timelike directions first.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChartFamily {
    Flat,
    /// `e^{2σ} η`.
    ConformallyFlat {
        sigma: ScalarField,
    },
    /// `4 / (1 + η(x,x)/r²)² η`: round sphere of radius `r` in the Riemannian case.
    SphereStereographic {
        radius: f64,
    },
    /// `4 / (1 − η(x,x)/r²)² η`: hyperbolic ball of radius `r` in the Riemannian case.
    HyperbolicBall {
        radius: f64,
    },
    /// `η + ε h` with `h` given by its upper triangle (row-major, `i ≤ j`).
    Perturbed {
        eps: f64,
        h: Vec<ScalarField>,
    },
    /// `e^{2σ} g_base`.
    Rescaled {
        base: Box<MetricChart>,
        sigma: ScalarField,
    },
    /// Pullback of `base` along the linear map `x = R y` (`R` row-major).
    Rotated {
        base: Box<MetricChart>,
        rotation: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricChart {
    pub p: usize,
    pub q: usize,
    pub family: ChartFamily,
}

impl MetricChart {
    pub fn new(p: usize, q: usize, family: ChartFamily) -> MetricChart {
        MetricChart { p, q, family }
    }

    pub fn flat(p: usize, q: usize) -> MetricChart {
        MetricChart::new(p, q, ChartFamily::Flat)
    }

    pub fn conformally_flat(p: usize, q: usize, sigma: ScalarField) -> MetricChart {
        MetricChart::new(p, q, ChartFamily::ConformallyFlat { sigma })
    }

    pub fn sphere(p: usize, q: usize, radius: f64) -> MetricChart {
        MetricChart::new(p, q, ChartFamily::SphereStereographic { radius })
    }

    pub fn hyperbolic(p: usize, q: usize, radius: f64) -> MetricChart {
        MetricChart::new(p, q, ChartFamily::HyperbolicBall { radius })
    }

    /// `η + ε h` with `h_ij` random real polynomials of the given degree.
    pub fn random_perturbed(p: usize, q: usize, eps: f64, degree: usize, rng: &mut impl Rng) -> MetricChart {
        let n = p + q;
        let h = (0..n * (n + 1) / 2)
            .map(|_| {
                let mut f = ScalarField::random_real_polynomial(n, degree, 1.0, rng);
                if let ScalarField::Polynomial { terms, .. } = &mut f {
                    terms[0].1 = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                }
                f
            })
            .collect();
        MetricChart::new(p, q, ChartFamily::Perturbed { eps, h })
    }

    pub fn rescaled(&self, sigma: ScalarField) -> MetricChart {
        MetricChart::new(
            self.p,
            self.q,
            ChartFamily::Rescaled {
                base: Box::new(self.clone()),
                sigma,
            },
        )
    }

    pub fn rotated(&self, rotation: Vec<f64>) -> MetricChart {
        MetricChart::new(
            self.p,
            self.q,
            ChartFamily::Rotated {
                base: Box::new(self.clone()),
                rotation,
            },
        )
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Short human-readable family name with the signature, e.g. `sphere(0,3)`.
    pub fn label(&self) -> String {
        let fam = match &self.family {
            ChartFamily::Flat => "flat".to_string(),
            ChartFamily::ConformallyFlat { .. } => "conformally-flat".to_string(),
            ChartFamily::SphereStereographic { radius } => format!("sphere[r={radius}]"),
            ChartFamily::HyperbolicBall { radius } => format!("hyperbolic[r={radius}]"),
            ChartFamily::Perturbed { eps, .. } => format!("perturbed[eps={eps}]"),
            ChartFamily::Rescaled { base, .. } => return format!("rescaled {}", base.label()),
            ChartFamily::Rotated { base, .. } => return format!("rotated {}", base.label()),
        };
        format!("{fam}({},{})", self.p, self.q)
    }

    pub fn eta(&self, i: usize) -> f64 {
        if i < self.p {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_conformally_flat_family(&self) -> bool {
        match &self.family {
            ChartFamily::Flat
            | ChartFamily::ConformallyFlat { .. }
            | ChartFamily::SphereStereographic { .. }
            | ChartFamily::HyperbolicBall { .. } => true,
            ChartFamily::Perturbed { .. } => false,
            ChartFamily::Rescaled { base, .. } | ChartFamily::Rotated { base, .. } => base.is_conformally_flat_family(),
        }
    }

    /// Whether the metric is `2π`-periodic in every coordinate, so the chart descends to a torus.
    pub fn is_periodic(&self) -> bool {
        match &self.family {
            ChartFamily::Flat => true,
            ChartFamily::ConformallyFlat { sigma } => sigma.is_periodic(),
            ChartFamily::Perturbed { h, .. } => h.iter().all(ScalarField::is_periodic),
            ChartFamily::Rescaled { base, sigma } => base.is_periodic() && sigma.is_periodic(),
            ChartFamily::SphereStereographic { .. }
            | ChartFamily::HyperbolicBall { .. }
            | ChartFamily::Rotated { .. } => false,
        }
    }

    /// Largest wave number appearing in the metric data.
    pub fn trig_degree(&self) -> usize {
        match &self.family {
            ChartFamily::ConformallyFlat { sigma } => sigma.trig_degree(),
            ChartFamily::Perturbed { h, .. } => h.iter().map(ScalarField::trig_degree).max().unwrap_or(0),
            ChartFamily::Rescaled { base, sigma } => base.trig_degree().max(sigma.trig_degree()),
            ChartFamily::Rotated { base, .. } => base.trig_degree(),
            _ => 0,
        }
    }

    /// Constant `λ` with `Ric = λ g`, for the families that are Einstein by construction.
    pub fn einstein_constant(&self) -> Option<f64> {
        let n = self.n() as f64;
        match &self.family {
            ChartFamily::Flat => Some(0.0),
            ChartFamily::SphereStereographic { radius } => Some((n - 1.0) / (radius * radius)),
            ChartFamily::HyperbolicBall { radius } => Some(-(n - 1.0) / (radius * radius)),
            ChartFamily::Rotated { base, .. } => base.einstein_constant(),
            _ => None,
        }
    }

    /// Metric component jets `g_ij` at `x0`, truncated at `order`.
    pub fn metric_jets(&self, x0: &[f64], order: usize) -> Result<Tensor> {
        let n = self.n();
        if x0.len() != n {
            return Err(LabError::Shape(format!(
                "base point has {} coordinates, chart dimension {n}",
                x0.len()
            )));
        }
        let eta_tensor = |factor: &Jet| {
            Tensor::from_fn(n, 2, |ix| {
                if ix[0] == ix[1] {
                    factor.scale(self.eta(ix[0]))
                } else {
                    Jet::zero(n, order)
                }
            })
        };
        let eta_norm = || -> Jet {
            let mut s = Jet::zero(n, order);
            for (i, &x) in x0.iter().enumerate() {
                let v = Jet::variable(n, order, i, x).unwrap();
                s.fma_assign(&v.scale(self.eta(i)), &v).unwrap();
            }
            s
        };
        let g = match &self.family {
            ChartFamily::Flat => eta_tensor(&Jet::constant(n, order, 1.0)),
            ChartFamily::ConformallyFlat { sigma } => {
                let e = sigma.jet_at(x0, order).scale(2.0).exp()?;
                eta_tensor(&e)
            }
            ChartFamily::SphereStereographic { radius } | ChartFamily::HyperbolicBall { radius } => {
                let sign = if matches!(self.family, ChartFamily::SphereStereographic { .. }) {
                    1.0
                } else {
                    -1.0
                };
                let denom = eta_norm().scale(sign / (radius * radius)).add_constant(1.0);
                let inv = denom.recip()?;
                let f = (&inv * &inv).scale(4.0);
                eta_tensor(&f)
            }
            ChartFamily::Perturbed { eps, h } => {
                if h.len() != n * (n + 1) / 2 {
                    return Err(LabError::Shape(format!(
                        "perturbation needs {} components, got {}",
                        n * (n + 1) / 2,
                        h.len()
                    )));
                }
                let mut comps = vec![Jet::zero(n, order); n * n];
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        let mut v = h[k].jet_at(x0, order).scale(*eps);
                        if i == j {
                            v = v.add_constant(self.eta(i));
                        }
                        comps[i * n + j] = v.clone();
                        comps[j * n + i] = v;
                        k += 1;
                    }
                }
                Tensor {
                    n,
                    rank: 2,
                    data: comps,
                }
            }
            ChartFamily::Rescaled { base, sigma } => {
                let gb = base.metric_jets(x0, order)?;
                let e = sigma.jet_at(x0, order).scale(2.0).exp()?;
                Tensor {
                    n,
                    rank: 2,
                    data: gb.data.iter().map(|c| c * &e).collect(),
                }
            }
            ChartFamily::Rotated { base, rotation } => {
                if rotation.len() != n * n {
                    return Err(LabError::Shape("rotation must be n × n".into()));
                }
                let xb: Vec<f64> = (0..n)
                    .map(|r| (0..n).map(|c| rotation[r * n + c] * x0[c]).sum())
                    .collect();
                let gb = base.metric_jets(&xb, order)?;
                let pulled: Vec<Jet> = gb
                    .data
                    .iter()
                    .map(|c| c.linear_substitution(rotation))
                    .collect::<std::result::Result<_, _>>()?;
                Tensor::from_fn(n, 2, |ix| {
                    let (a, b) = (ix[0], ix[1]);
                    let mut acc = Jet::zero(n, order);
                    for mu in 0..n {
                        for nu in 0..n {
                            let c = rotation[mu * n + a] * rotation[nu * n + b];
                            if c != 0.0 {
                                acc.axpy(Complex64::new(c, 0.0), &pulled[mu * n + nu]).unwrap();
                            }
                        }
                    }
                    acc
                })
            }
        };
        Ok(g)
    }

    /// Verifies that the constant term of the metric has signature `(p, q)`.
    pub fn check_signature(&self, g: &Tensor) -> Result<()> {
        let n = self.n();
        let m = DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]).value().re);
        let eig = SymmetricEigen::new(m);
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if eig.eigenvalues.iter().any(|v| v.abs() <= 1e-12 * scale.max(1.0)) {
            return Err(LabError::DegenerateMetric(format!(
                "eigenvalues {:?}",
                eig.eigenvalues.as_slice()
            )));
        }
        let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
        if neg != self.p {
            return Err(LabError::Signature(format!(
                "metric has {neg} negative eigenvalues, expected p = {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// A proper rotation in the plane of coordinates `(a, b)` by angle `theta`, as an `n × n` row-major matrix.
pub fn plane_rotation(n: usize, a: usize, b: usize, theta: f64) -> Vec<f64> {
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        r[i * n + i] = 1.0;
    }
    let (s, c) = theta.sin_cos();
    r[a * n + a] = c;
    r[a * n + b] = -s;
    r[b * n + a] = s;
    r[b * n + b] = c;
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_is_eta() {
        let c = MetricChart::flat(1, 2);
        let g = c.metric_jets(&[0.1, 0.2, 0.3], 2).unwrap();
        assert_eq!(g.get(&[0, 0]).value().re, -1.0);
        assert_eq!(g.get(&[1, 1]).value().re, 1.0);
        assert_eq!(g.get(&[0, 1]).value().re, 0.0);
        c.check_signature(&g).unwrap();
    }

    #[test]
    fn sphere_conformal_factor_at_origin() {
        let c = MetricChart::sphere(0, 3, 1.0);
        let g = c.metric_jets(&[0.0; 3], 2).unwrap();
        assert!((g.get(&[0, 0]).value().re - 4.0).abs() < 1e-14);
        // 4 (1 + |x|²)^-2 has ∂₁² = -16 at 0
        assert!((g.get(&[0, 0]).derivative(&[2, 0, 0]).re + 16.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_signature_is_rejected() {
        let c = MetricChart::flat(1, 2);
        let g = MetricChart::flat(0, 3).metric_jets(&[0.0; 3], 0).unwrap();
        assert!(c.check_signature(&g).is_err());
    }
}
