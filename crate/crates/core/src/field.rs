//! Closed-form scalar fields that can be expanded into jets at any base point.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::jet::{multi_indices, Jet};

/// One term `a·cos(k·x) + b·sin(k·x)` of a trigonometric polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: Vec<i32>,
    pub cos: Complex64,
    pub sin: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalarField {
    Zero {
        n: usize,
    },
    /// Σ c_β x^β in absolute coordinates.
    Polynomial {
        n: usize,
        terms: Vec<(Vec<u8>, Complex64)>,
    },
    Trig {
        n: usize,
        terms: Vec<TrigTerm>,
    },
    Sum(Vec<ScalarField>),
}

impl ScalarField {
    pub fn n_vars(&self) -> usize {
        match self {
            ScalarField::Zero { n } | ScalarField::Polynomial { n, .. } | ScalarField::Trig { n, .. } => *n,
            ScalarField::Sum(parts) => parts.first().map(ScalarField::n_vars).unwrap_or(0),
        }
    }

    pub fn constant(n: usize, c: f64) -> ScalarField {
        ScalarField::Polynomial {
            n,
            terms: vec![(vec![0; n], Complex64::new(c, 0.0))],
        }
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        let c = Complex64::new(c, 0.0);
        match self {
            ScalarField::Zero { n } => ScalarField::Zero { n: *n },
            ScalarField::Polynomial { n, terms } => ScalarField::Polynomial {
                n: *n,
                terms: terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
            },
            ScalarField::Trig { n, terms } => ScalarField::Trig {
                n: *n,
                terms: terms
                    .iter()
                    .map(|t| TrigTerm {
                        k: t.k.clone(),
                        cos: t.cos * c,
                        sin: t.sin * c,
                    })
                    .collect(),
            },
            ScalarField::Sum(parts) => ScalarField::Sum(parts.iter().map(|p| p.scaled(c.re)).collect()),
        }
    }

    /// Largest wave number (max-norm) of any trigonometric term; polynomials report 0.
    pub fn trig_degree(&self) -> usize {
        match self {
            ScalarField::Trig { terms, .. } => terms
                .iter()
                .flat_map(|t| t.k.iter().map(|k| k.unsigned_abs() as usize))
                .max()
                .unwrap_or(0),
            ScalarField::Sum(parts) => parts.iter().map(ScalarField::trig_degree).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn is_periodic(&self) -> bool {
        match self {
            ScalarField::Zero { .. } | ScalarField::Trig { .. } => true,
            ScalarField::Polynomial { terms, .. } => terms.iter().all(|(e, _)| e.iter().all(|&a| a == 0)),
            ScalarField::Sum(parts) => parts.iter().all(ScalarField::is_periodic),
        }
    }

    /// Jet of the field at `x0` truncated at `order`.
    pub fn jet_at(&self, x0: &[f64], order: usize) -> Jet {
        let n = x0.len();
        match self {
            ScalarField::Zero { .. } => Jet::zero(n, order),
            ScalarField::Polynomial { terms, .. } => {
                // Taylor coefficient of h^γ in (x0 + h)^β is Π_v C(β_v, γ_v) x0_v^(β_v − γ_v)
                let index: HashMap<Vec<u8>, usize> = multi_indices(n, order)
                    .into_iter()
                    .enumerate()
                    .map(|(i, e)| (e, i))
                    .collect();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); index.len()];
                let mut gamma = vec![0u8; n];
                for (beta, c) in terms {
                    gamma.iter_mut().for_each(|g| *g = 0);
                    loop {
                        if let Some(&i) = index.get(&gamma) {
                            let mut w = *c;
                            for v in 0..n {
                                let (b, g) = (beta[v] as i32, gamma[v] as i32);
                                w *= binomial(b, g) * x0[v].powi(b - g);
                            }
                            coeffs[i] += w;
                        }
                        let mut v = 0;
                        while v < n {
                            if gamma[v] < beta[v] {
                                gamma[v] += 1;
                                break;
                            }
                            gamma[v] = 0;
                            v += 1;
                        }
                        if v == n {
                            break;
                        }
                    }
                }
                Jet::from_taylor_coefficients(n, order, coeffs).expect("coefficient count matches the shape")
            }
            ScalarField::Trig { terms, .. } => Jet::from_derivatives(n, order, |alpha| {
                let deg: usize = alpha.iter().map(|&a| a as usize).sum();
                let shift = deg as f64 * std::f64::consts::FRAC_PI_2;
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    let phase: f64 = t.k.iter().zip(x0).map(|(&k, &x)| k as f64 * x).sum();
                    let kpow: f64 =
                        t.k.iter()
                            .zip(alpha)
                            .map(|(&k, &a)| (k as f64).powi(a as i32))
                            .product();
                    // ∂^α cos(k·x) = k^α cos(k·x + |α|π/2), likewise for sin
                    acc += t.cos * (kpow * (phase + shift).cos()) + t.sin * (kpow * (phase + shift).sin());
                }
                acc
            }),
            ScalarField::Sum(parts) => {
                let mut out = Jet::zero(n, order);
                for p in parts {
                    out.axpy(Complex64::new(1.0, 0.0), &p.jet_at(x0, order)).unwrap();
                }
                out
            }
        }
    }

    /// Point value (order-0 jet).
    pub fn value_at(&self, x0: &[f64]) -> Complex64 {
        self.jet_at(x0, 0).value()
    }

    /// Random complex polynomial of total degree `≤ degree`, coefficients uniform in `[-1,1]²`.
    pub fn random_polynomial(n: usize, degree: usize, scale: f64, rng: &mut impl Rng) -> ScalarField {
        let terms = multi_indices(n, degree)
            .into_iter()
            .map(|e| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
                (e, c)
            })
            .collect();
        ScalarField::Polynomial { n, terms }
    }

    /// Random real polynomial with zero constant term, for conformal factors.
    pub fn random_real_polynomial(n: usize, degree: usize, scale: f64, rng: &mut impl Rng) -> ScalarField {
        let terms = multi_indices(n, degree)
            .into_iter()
            .skip(1)
            .map(|e| (e, Complex64::new(rng.gen_range(-1.0..1.0) * scale, 0.0)))
            .collect();
        ScalarField::Polynomial { n, terms }
    }

    /// Random trigonometric polynomial with wave numbers in `[-degree, degree]^n`.
    pub fn random_trig(n: usize, degree: usize, scale: f64, real: bool, rng: &mut impl Rng) -> ScalarField {
        let mut terms = Vec::new();
        let d = degree as i32;
        let side = (2 * d + 1) as usize;
        for code in 0..side.pow(n as u32) {
            let mut k = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                k.push((c % side) as i32 - d);
                c /= side;
            }
            // keep one representative of ±k
            let first_nonzero = k.iter().find(|&&v| v != 0).copied();
            if matches!(first_nonzero, Some(v) if v < 0) {
                continue;
            }
            let mut draw = || {
                if real {
                    Complex64::new(rng.gen_range(-1.0..1.0) * scale, 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
                }
            };
            let cos = draw();
            let sin = if first_nonzero.is_none() {
                Complex64::new(0.0, 0.0)
            } else {
                draw()
            };
            terms.push(TrigTerm { k, cos, sin });
        }
        ScalarField::Trig { n, terms }
    }
}

fn binomial(n: i32, k: i32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polynomial_shift_matches_direct_derivatives() {
        // f = x1^2 x2 at (1, 2): ∂1 f = 2 x1 x2 = 4, ∂2 f = x1^2 = 1, ∂1∂1 f = 2 x2 = 4
        let f = ScalarField::Polynomial {
            n: 2,
            terms: vec![(vec![2, 1], Complex64::new(1.0, 0.0))],
        };
        let j = f.jet_at(&[1.0, 2.0], 3);
        assert_eq!(j.value().re, 2.0);
        assert_eq!(j.derivative(&[1, 0]).re, 4.0);
        assert_eq!(j.derivative(&[0, 1]).re, 1.0);
        assert_eq!(j.derivative(&[2, 0]).re, 4.0);
        assert_eq!(j.derivative(&[2, 1]).re, 2.0);
        assert_eq!(j.derivative(&[3, 0]).re, 0.0);
    }

    #[test]
    fn trig_derivatives() {
        let f = ScalarField::Trig {
            n: 1,
            terms: vec![TrigTerm {
                k: vec![2],
                cos: Complex64::new(0.0, 0.0),
                sin: Complex64::new(1.0, 0.0),
            }],
        };
        let x = 0.3;
        let j = f.jet_at(&[x], 3);
        assert!((j.derivative(&[1]).re - 2.0 * (2.0 * x).cos()).abs() < 1e-14);
        assert!((j.derivative(&[3]).re + 8.0 * (2.0 * x).cos()).abs() < 1e-13);
    }

    #[test]
    fn random_trig_is_reproducible() {
        let a = ScalarField::random_trig(2, 1, 1.0, true, &mut ChaCha8Rng::seed_from_u64(3));
        let b = ScalarField::random_trig(2, 1, 1.0, true, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_eq!(a.trig_degree(), 1);
    }
}
