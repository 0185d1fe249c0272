//! Orthonormal frames, the spin connection, the Dirac operator and the
//! brackets and curvature products acting on spinor fields.
//!
//! A spinor field is a [`Section`] of `2^m` jets: its components with respect
//! to the frame `s_i` built here by signed Gram–Schmidt from the coordinate
//! vectors, and to the fixed matrices of a [`CliffordRep`].
//!
//! Clifford multiplication satisfies `X·Y + Y·X = −2g(X,Y)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::bundle::{add_sections, scale_section, scale_section_c, sub_sections, Connection, Section, SparseMatrix};
use crate::chart::MetricChart;
use crate::clifford::{CliffordRep, JetMatrix};
use crate::curvature::{self, CurvaturePack};
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::tensor::{dot_to, Tensor};

/// Frame `s_i = A_i^μ ∂_μ` with `g(s_i, s_j) = ε_i δ_ij`.
#[derive(Debug, Clone)]
pub struct Frame {
    /// `A_i^μ` indexed `[i][μ]`.
    pub a: Vec<Vec<Jet>>,
    /// `θ^i_μ = ε_i g(∂_μ, s_i)`, so that `∂_μ = θ^i_μ s_i`.
    pub theta: Vec<Vec<Jet>>,
    pub eps: Vec<f64>,
}

impl Frame {
    /// Signed Gram–Schmidt on `∂_1, …, ∂_n`. The resulting signs must be timelike-first.
    pub fn gram_schmidt(g: &Tensor, p: usize) -> Result<Frame> {
        let n = g.n;
        let order = g.order();
        let inner = |u: &[Jet], v: &[Jet]| -> Jet {
            let mut acc = Jet::zero(n, order);
            for a in 0..n {
                for b in 0..n {
                    let t = g.get(&[a, b]).mul_min(&u[a]);
                    acc.fma_assign(&t, &v[b]).unwrap();
                }
            }
            acc
        };
        let mut a: Vec<Vec<Jet>> = Vec::with_capacity(n);
        let mut eps = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<Jet> = (0..n)
                .map(|mu| Jet::constant(n, order, if mu == i { 1.0 } else { 0.0 }))
                .collect();
            for j in 0..i {
                let c = inner(&v, &a[j]).scale(eps[j]);
                for mu in 0..n {
                    v[mu] = v[mu].sub_min(&c.mul_min(&a[j][mu]));
                }
            }
            let norm2 = inner(&v, &v);
            let val = norm2.value();
            if val.norm() < 1e-12 {
                return Err(LabError::DegenerateMetric(format!(
                    "Gram–Schmidt pivot {i} is null at the base point"
                )));
            }
            let e = if val.re < 0.0 { -1.0 } else { 1.0 };
            let expected = if i < p { -1.0 } else { 1.0 };
            if e != expected {
                return Err(LabError::Signature(format!(
                    "coordinate vector ∂_{} has sign {e} but the timelike-first ordering needs {expected}",
                    i + 1
                )));
            }
            let inv = norm2.scale(e).sqrt()?.recip()?;
            a.push(v.iter().map(|x| x.mul_min(&inv)).collect());
            eps.push(e);
        }
        let theta = (0..n)
            .map(|i| {
                (0..n)
                    .map(|mu| {
                        dot_to((0..n).map(|nu| (g.get(&[mu, nu]).clone(), a[i][nu].clone())), n, order).scale(eps[i])
                    })
                    .collect()
            })
            .collect();
        Ok(Frame { a, theta, eps })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Frame components `T(s_{i₁}, …, s_{i_k})` of a covariant tensor.
    pub fn components(&self, t: &Tensor) -> Tensor {
        let n = t.n;
        let mut cur = t.clone();
        for slot in 0..t.rank {
            let src = cur.clone();
            cur = Tensor::from_fn(n, t.rank, |ix| {
                let mut j = ix.to_vec();
                let order = src.order().min(self.a[0][0].order());
                dot_to(
                    (0..n).map(|mu| {
                        j[slot] = mu;
                        (self.a[ix[slot]][mu].clone(), src.get(&j).clone())
                    }),
                    n,
                    order,
                )
            });
        }
        cur
    }

    /// Frame components `v^i = θ^i_μ v^μ` of a vector field.
    pub fn vector_components(&self, v: &[Jet]) -> Vec<Jet> {
        let n = self.n();
        let order = v
            .iter()
            .map(Jet::order)
            .min()
            .unwrap_or(0)
            .min(self.theta[0][0].order());
        (0..n)
            .map(|i| dot_to((0..n).map(|mu| (self.theta[i][mu].clone(), v[mu].clone())), n, order))
            .collect()
    }
}

/// Everything needed to act on spinor fields at one base point of one chart.
#[derive(Debug)]
pub struct SpinGeometry {
    pub chart: MetricChart,
    pub x0: Vec<f64>,
    pub pack: Arc<CurvaturePack>,
    pub rep: Arc<CliffordRep>,
    pub frame: Frame,
    /// `ω_{μ,ij} = g(∇_μ s_i, s_j)` indexed `[μ][i][j]`.
    pub omega: Tensor,
    /// Spin connection `∇_μ ψ = ∂_μ ψ + Ω_μ ψ`.
    pub conn: Connection,
    pub spin_conn: Vec<JetMatrix>,
    /// Clifford multiplication by `∂_μ`.
    pub coord_clifford: Vec<JetMatrix>,
    /// Clifford multiplication by `g^{μν}∂_ν`.
    pub dirac_coef: Vec<JetMatrix>,
}

impl SpinGeometry {
    pub fn new(chart: &MetricChart, x0: &[f64], metric_order: usize) -> Result<SpinGeometry> {
        let pack = Arc::new(CurvaturePack::new(chart, x0, metric_order)?);
        let rep = Arc::new(CliffordRep::new(chart.p, chart.q)?);
        SpinGeometry::from_parts(chart.clone(), x0.to_vec(), pack, rep)
    }

    pub fn from_parts(
        chart: MetricChart,
        x0: Vec<f64>,
        pack: Arc<CurvaturePack>,
        rep: Arc<CliffordRep>,
    ) -> Result<SpinGeometry> {
        let n = pack.n;
        let frame = Frame::gram_schmidt(&pack.g, chart.p)?;
        let order = pack.christoffel.order().min(frame.a[0][0].order().saturating_sub(1));
        // ∇_μ s_i in coordinates
        let mut omega = Tensor::zeros(n, 3, n, order);
        for mu in 0..n {
            for i in 0..n {
                let ds: Vec<Jet> = (0..n)
                    .map(|nu| {
                        let mut v = frame.a[i][nu].partial(mu).unwrap().truncate(order).unwrap();
                        for lam in 0..n {
                            v.fma_assign(pack.christoffel.get(&[nu, mu, lam]), &frame.a[i][lam])
                                .unwrap();
                        }
                        v
                    })
                    .collect();
                for j in 0..n {
                    let w = dot_to((0..n).map(|k| (ds[k].clone(), frame.theta[j][k].clone())), n, order)
                        .scale(frame.eps[j]);
                    omega.set(&[mu, i, j], w);
                }
            }
        }
        let spin_conn: Vec<JetMatrix> = (0..n)
            .map(|mu| {
                let mut m = JetMatrix::zero(rep.dim());
                for i in 0..n {
                    for j in i + 1..n {
                        let c = omega.get(&[mu, i, j]).scale(0.5 * frame.eps[i] * frame.eps[j]);
                        m.add_monomial(&c, &rep.product(&[i, j]));
                    }
                }
                m
            })
            .collect();
        let conn = Connection {
            dim: rep.dim(),
            a: spin_conn.iter().map(SparseMatrix::from_jet_matrix).collect(),
        };
        let coord_clifford = (0..n)
            .map(|mu| rep.vector_matrix(&(0..n).map(|i| frame.theta[i][mu].clone()).collect::<Vec<_>>()))
            .collect();
        let dirac_coef = (0..n)
            .map(|mu| rep.vector_matrix(&(0..n).map(|i| frame.a[i][mu].scale(frame.eps[i])).collect::<Vec<_>>()))
            .collect();
        Ok(SpinGeometry {
            chart,
            x0,
            pack,
            rep,
            frame,
            omega,
            conn,
            spin_conn,
            coord_clifford,
            dirac_coef,
        })
    }

    pub fn n(&self) -> usize {
        self.pack.n
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Spinor components of a field given by scalar component fields.
    pub fn spinor_from_fields(&self, fields: &[ScalarField], order: usize) -> Result<Section> {
        if fields.len() != self.dim() {
            return Err(LabError::Shape(format!(
                "{} component fields for spinors of rank {}",
                fields.len(),
                self.dim()
            )));
        }
        Ok(fields.iter().map(|f| f.jet_at(&self.x0, order)).collect())
    }

    /// `∇_μ ψ`.
    pub fn cov(&self, psi: &[Jet], mu: usize) -> Result<Section> {
        self.conn.cov(psi, mu)
    }

    /// `∇_{s_i} ψ`.
    pub fn frame_cov(&self, psi: &[Jet], i: usize) -> Result<Section> {
        let grad = self.conn.gradient(psi)?;
        Ok(self.frame_combination(&grad, i))
    }

    fn frame_combination(&self, grad: &[Section], i: usize) -> Section {
        let mut acc = scale_section(&grad[0], &self.frame.a[i][0]);
        for mu in 1..self.n() {
            acc = add_sections(&acc, &scale_section(&grad[mu], &self.frame.a[i][mu]));
        }
        acc
    }

    /// Clifford multiplication by a vector field with coordinate components `X^μ`.
    pub fn clifford_vector(&self, x: &[Jet], psi: &[Jet]) -> Section {
        let mut acc: Option<Section> = None;
        for (mu, xm) in x.iter().enumerate() {
            let t = scale_section(&self.coord_clifford[mu].apply(psi), xm);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &t),
                None => t,
            });
        }
        acc.expect("dimension ≥ 1")
    }

    /// Clifford multiplication by `ω^♮` for a 1-form with coordinate components `ω_μ`.
    pub fn clifford_one_form(&self, w: &[Jet], psi: &[Jet]) -> Section {
        let mut acc: Option<Section> = None;
        for (mu, wm) in w.iter().enumerate() {
            let t = scale_section(&self.dirac_coef[mu].apply(psi), wm);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &t),
                None => t,
            });
        }
        acc.expect("dimension ≥ 1")
    }

    /// `D ψ = Σ_i ε_i s_i·∇_{s_i}ψ`.
    pub fn dirac(&self, psi: &[Jet]) -> Result<Section> {
        let grad = self.conn.gradient(psi)?;
        let mut acc: Option<Section> = None;
        for (mu, gm) in grad.iter().enumerate() {
            let t = self.dirac_coef[mu].apply(gm);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &t),
                None => t,
            });
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    pub fn dirac_pow(&self, psi: &[Jet], k: usize) -> Result<Section> {
        let mut out = psi.to_vec();
        for _ in 0..k {
            out = self.dirac(&out)?;
        }
        Ok(out)
    }

    /// Spinor Laplacian `tr_g(∇∘∇)`.
    pub fn laplacian(&self, psi: &[Jet]) -> Result<Section> {
        self.conn.laplacian(&self.pack, psi)
    }

    /// The same Laplacian summed over the orthonormal frame:
    /// `Σ_i ε_i (∇_{s_i}∇_{s_i} − ∇_{∇_{s_i}s_i}) ψ`.
    pub fn laplacian_frame(&self, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let grad = self.conn.gradient(psi)?;
        let mut acc: Option<Section> = None;
        for i in 0..n {
            let first = self.frame_combination(&grad, i);
            let second = self.frame_combination(&self.conn.gradient(&first)?, i);
            // ∇_{s_i} s_i
            let mut term = second;
            for nu in 0..n {
                let mut v = Jet::zero(n, 0);
                let mut started = false;
                for mu in 0..n {
                    let mut d = self.frame.a[i][nu].partial(mu)?;
                    for lam in 0..n {
                        d = d.add_min(&self.pack.christoffel.get(&[nu, mu, lam]).mul_min(&self.frame.a[i][lam]));
                    }
                    let c = self.frame.a[i][mu].mul_min(&d);
                    v = if started { v.add_min(&c) } else { c };
                    started = true;
                }
                term = sub_sections(&term, &scale_section(&grad[nu], &v));
            }
            let term = scale_section_c(&term, self.frame.eps[i]);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &term),
                None => term,
            });
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// `M^μ = Σ_ρ T^{μρ} ∂_ρ·`, the coefficients of `(T, ∇ψ) = Σ_μ M^μ ∇_μψ`.
    fn bracket_coefficients(&self, t: &Tensor) -> Vec<JetMatrix> {
        let n = self.n();
        let up = curvature::raise_both(&self.pack, t);
        (0..n)
            .map(|mu| {
                let row: Vec<Jet> = (0..n).map(|rho| up.get(&[mu, rho]).clone()).collect();
                self.rep.vector_matrix(&self.frame.vector_components(&row))
            })
            .collect()
    }

    /// `(T, ∇ψ) = Σ_i ε_i T(s_i)^♮·∇_{s_i}ψ` for a symmetric 2-tensor `T`.
    pub fn bracket_t_nabla(&self, t: &Tensor, psi: &[Jet]) -> Result<Section> {
        let grad = self.conn.gradient(psi)?;
        let coefs = self.bracket_coefficients(t);
        let mut acc: Option<Section> = None;
        for (m, gm) in coefs.iter().zip(&grad) {
            let term = m.apply(gm);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &term),
                None => term,
            });
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// `(∇, T·ψ) = (T, ∇ψ) + (div T)^♮·ψ`.
    pub fn bracket_nabla_t(&self, t: &Tensor, psi: &[Jet]) -> Result<Section> {
        let a = self.bracket_t_nabla(t, psi)?;
        let div = curvature::divergence(&self.pack, t)?;
        Ok(add_sections(&a, &self.clifford_one_form(&div, psi)))
    }

    /// `−δ(T·ψ)` evaluated from the definition of the co-differential:
    /// `Σ g^{μν}(∇_μ η_ν − Γ^λ_{μν} η_λ)` with `η_ν = T(∂_ν)^♮·ψ`.
    pub fn bracket_nabla_t_direct(&self, t: &Tensor, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let eta: Vec<Section> = (0..n)
            .map(|nu| {
                let row: Vec<Jet> = (0..n).map(|l| t.get(&[nu, l]).clone()).collect();
                self.clifford_one_form(&row, psi)
            })
            .collect();
        let mut acc: Option<Section> = None;
        for mu in 0..n {
            for nu in 0..n {
                let mut term = self.cov(&eta[nu], mu)?;
                for lam in 0..n {
                    let c = self.pack.christoffel.get(&[lam, mu, nu]).scale(-1.0);
                    term = add_sections(&term, &scale_section(&eta[lam], &c));
                }
                let term = scale_section(&term, self.pack.g_inv.get(&[mu, nu]));
                acc = Some(match acc {
                    Some(a) => add_sections(&a, &term),
                    None => term,
                });
            }
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// `(T,∇ψ)` summed literally over the frame: `Σ_ij ε_iε_j T(s_i,s_j) s_j·∇_{s_i}ψ`.
    pub fn bracket_t_nabla_frame(&self, t: &Tensor, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let tf = self.frame.components(t);
        let grad = self.conn.gradient(psi)?;
        let mut acc: Option<Section> = None;
        for i in 0..n {
            let di = self.frame_combination(&grad, i);
            for j in 0..n {
                let c = tf.get(&[i, j]).scale(self.frame.eps[i] * self.frame.eps[j]);
                let term = scale_section(&apply_monomial(&self.rep.gammas[j], &di), &c);
                acc = Some(match acc {
                    Some(a) => add_sections(&a, &term),
                    None => term,
                });
            }
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// Clifford action of the 2-form with frame components `w[a][b]`.
    fn two_form(&self, w: Vec<Jet>, psi: &[Jet]) -> Result<Section> {
        Ok(self.rep.form_matrix(2, &w)?.apply(psi))
    }

    /// Clifford action of the frame vector `Σ_j ε_j v_j s_j` for covector frame components `v_j`.
    fn frame_covector(&self, v: &[Jet], psi: &[Jet]) -> Section {
        let comps: Vec<Jet> = v.iter().zip(&self.frame.eps).map(|(x, e)| x.scale(*e)).collect();
        self.rep.vector_matrix(&comps).apply(psi)
    }

    /// `(C, P·ψ) = Σ_i ε_i C(s_i)·P(s_i)·ψ` (or `(P, C·ψ)` with the factors swapped)
    /// where `C(X) = C(·,·,X)` is a 2-form and `P(X) = P(X,·)^♮`.
    pub fn bracket_cp(&self, c: &Tensor, p: &Tensor, psi: &[Jet], c_first: bool) -> Result<Section> {
        let n = self.n();
        let cf = self.frame.components(c);
        let pf = self.frame.components(p);
        let mut acc: Option<Section> = None;
        for i in 0..n {
            let form: Vec<Jet> = (0..n * n).map(|ab| cf.get(&[ab / n, ab % n, i]).clone()).collect();
            let pv: Vec<Jet> = (0..n).map(|j| pf.get(&[i, j]).clone()).collect();
            let term = if c_first {
                let inner = self.frame_covector(&pv, psi);
                self.two_form(form, &inner)?
            } else {
                let inner = self.two_form(form, psi)?;
                self.frame_covector(&pv, &inner)
            };
            let term = scale_section_c(&term, self.frame.eps[i]);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &term),
                None => term,
            });
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// `W·W·ψ = Σ_ij ε_iε_j W(s_i,s_j)·W(s_i,s_j)·ψ`.
    pub fn weyl_weyl(&self, w: &Tensor, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let wf = self.frame.components(w);
        let mut acc: Option<Section> = None;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let form: Vec<Jet> = (0..n * n).map(|ab| wf.get(&[i, j, ab / n, ab % n]).clone()).collect();
                let m = self.rep.form_matrix(2, &form)?;
                let term = m.apply(&m.apply(psi));
                let term = scale_section_c(&term, self.frame.eps[i] * self.frame.eps[j]);
                acc = Some(match acc {
                    Some(a) => add_sections(&a, &term),
                    None => term,
                });
            }
        }
        Ok(acc.unwrap_or_else(|| psi.iter().map(Jet::zero_like).collect()))
    }

    /// `C·W·ψ = Σ_ij ε_iε_j C(s_i,s_j,·)^♮·W(s_i,s_j)·ψ`, or `W·C·ψ` with the factors swapped.
    pub fn cotton_weyl(&self, c: &Tensor, w: &Tensor, psi: &[Jet], c_first: bool) -> Result<Section> {
        let n = self.n();
        let cf = self.frame.components(c);
        let wf = self.frame.components(w);
        let mut acc: Option<Section> = None;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let form: Vec<Jet> = (0..n * n).map(|ab| wf.get(&[i, j, ab / n, ab % n]).clone()).collect();
                let cv: Vec<Jet> = (0..n).map(|k| cf.get(&[i, j, k]).clone()).collect();
                let term = if c_first {
                    let inner = self.two_form(form, psi)?;
                    self.frame_covector(&cv, &inner)
                } else {
                    let inner = self.frame_covector(&cv, psi);
                    self.two_form(form, &inner)?
                };
                let term = scale_section_c(&term, self.frame.eps[i] * self.frame.eps[j]);
                acc = Some(match acc {
                    Some(a) => add_sections(&a, &term),
                    None => term,
                });
            }
        }
        Ok(acc.unwrap_or_else(|| psi.iter().map(Jet::zero_like).collect()))
    }

    /// `½ 𝓡(∂_μ,∂_ν)·ψ` with the curvature read as a 2-form in its last two slots.
    pub fn half_curvature_action(&self, mu: usize, nu: usize, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let r = &self.pack.riemann_cov;
        let two = Tensor::from_fn(n, 2, |ix| r.get(&[mu, nu, ix[0], ix[1]]).clone());
        let f = self.frame.components(&two);
        Ok(scale_section_c(&self.two_form(f.data, psi)?, 0.5))
    }

    /// `Σ_i ε_i s_i·𝓡^S(s_i, ∂_μ)ψ`, the contracted curvature of the spin connection.
    pub fn contracted_curvature(&self, mu: usize, psi: &[Jet]) -> Result<Section> {
        let n = self.n();
        let mut acc: Option<Section> = None;
        for nu in 0..n {
            let r = self.conn.curvature_on(psi, nu, mu)?;
            let term = self.dirac_coef[nu].apply(&r);
            acc = Some(match acc {
                Some(a) => add_sections(&a, &term),
                None => term,
            });
        }
        Ok(acc.expect("dimension ≥ 1"))
    }

    /// `Ric(∂_μ)^♮·ψ`.
    pub fn ricci_action(&self, mu: usize, psi: &[Jet]) -> Section {
        let n = self.n();
        let row: Vec<Jet> = (0..n).map(|l| self.pack.ricci.get(&[mu, l]).clone()).collect();
        self.clifford_one_form(&row, psi)
    }

    /// `grad f` in coordinates.
    pub fn gradient_vector(&self, f: &Jet) -> Result<Vec<Jet>> {
        Ok(curvature::sharp(&self.pack, &curvature::differential(f)?))
    }

    /// Pointwise product `⟨ψ, φ⟩`.
    pub fn product(&self, psi: &[Jet], phi: &[Jet]) -> Jet {
        self.rep.spinor_product_jets(psi, phi)
    }

    /// Residual of the pointwise divergence identity behind formal self-adjointness:
    /// `div(Y) − Σ_i ε_i[⟨T(s_i)^♮·∇_{s_i}ψ, φ⟩ − (−1)^p⟨ψ, T(s_i)^♮·∇_{s_i}φ⟩] − (−1)^p⟨ψ, (δT)^♮·φ⟩`
    /// where `Y = w^♮` and `w(X) = ⟨T(X)^♮·ψ, φ⟩`. Returned as a jet.
    pub fn divergence_identity(&self, t: &Tensor, psi: &[Jet], phi: &[Jet]) -> Result<(Jet, f64)> {
        let n = self.n();
        let sign = self.rep.sign_p();
        let w: Vec<Jet> = (0..n)
            .map(|nu| {
                let row: Vec<Jet> = (0..n).map(|l| t.get(&[nu, l]).clone()).collect();
                self.product(&self.clifford_one_form(&row, psi), phi)
            })
            .collect();
        let mut div: Option<Jet> = None;
        for mu in 0..n {
            for nu in 0..n {
                let mut d = w[nu].partial(mu)?;
                for lam in 0..n {
                    d = d.sub_min(&self.pack.christoffel.get(&[lam, mu, nu]).mul_min(&w[lam]));
                }
                let d = d.mul_min(self.pack.g_inv.get(&[mu, nu]));
                div = Some(match div {
                    Some(a) => a.add_min(&d),
                    None => d,
                });
            }
        }
        let div = div.expect("dimension ≥ 1");
        let tp = self.bracket_t_nabla(t, psi)?;
        let tphi = self.bracket_t_nabla(t, phi)?;
        let delta: Vec<Jet> = curvature::divergence(&self.pack, t)?
            .iter()
            .map(|x| x.scale(-1.0))
            .collect();
        let rhs = self
            .product(&tp, phi)
            .sub_min(&self.product(psi, &tphi).scale(sign))
            .add_min(&self.product(psi, &self.clifford_one_form(&delta, phi)).scale(sign));
        let scale = div.max_abs().max(rhs.max_abs());
        Ok((div.sub_min(&rhs), scale))
    }
}

fn apply_monomial(m: &crate::clifford::Monomial, psi: &[Jet]) -> Section {
    (0..psi.len()).map(|r| psi[m.col[r]].scale(m.phase[r])).collect()
}

/// Random spinor field with polynomial components of the given degree.
pub fn random_spinor_fields(dim: usize, n: usize, degree: usize, rng: &mut impl rand::Rng) -> Vec<ScalarField> {
    (0..dim)
        .map(|_| ScalarField::random_polynomial(n, degree, 1.0, rng))
        .collect()
}

/// Multiplies every spinor component by a complex constant.
pub fn scale_spinor(psi: &[Jet], c: Complex64) -> Section {
    scale_section_c(psi, c)
}
