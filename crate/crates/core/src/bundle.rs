//! Vector bundles over a chart with a connection given by coordinate matrices
//! `∇_μ s = ∂_μ s + A_μ s`. Sections are component vectors of jets.

use std::sync::Arc;

use num_complex::Complex64;

use crate::clifford::JetMatrix;
use crate::curvature::CurvaturePack;
use crate::error::{LabError, Result};
use crate::jet::Jet;

pub type Section = Vec<Jet>;

#[derive(Debug, Clone)]
pub enum Coef {
    Const(Complex64),
    Jet(Arc<Jet>),
}

impl Coef {
    fn apply(&self, x: &Jet) -> Jet {
        match self {
            Coef::Const(c) => x.scale(*c),
            Coef::Jet(j) => j.mul_min(x),
        }
    }

    fn scale(&self, c: Complex64) -> Coef {
        match self {
            Coef::Const(v) => Coef::Const(v * c),
            Coef::Jet(j) => Coef::Jet(Arc::new(j.scale(c))),
        }
    }
}

/// Sparse matrix, one entry list per row.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub rows: Vec<Vec<(usize, Coef)>>,
}

impl SparseMatrix {
    pub fn zero(dim: usize) -> SparseMatrix {
        SparseMatrix {
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, r: usize, c: usize, v: Coef) {
        self.rows[r].push((c, v));
    }

    /// Adds a jet entry unless it vanishes identically.
    pub fn push_jet(&mut self, r: usize, c: usize, v: Jet) {
        if v.max_abs() > 0.0 {
            self.rows[r].push((c, Coef::Jet(Arc::new(v))));
        }
    }

    pub fn from_jet_matrix(m: &JetMatrix) -> SparseMatrix {
        let mut s = SparseMatrix::zero(m.dim);
        for r in 0..m.dim {
            for c in 0..m.dim {
                if let Some(v) = m.get(r, c) {
                    s.push_jet(r, c, v.clone());
                }
            }
        }
        s
    }

    /// Places `m` as the block with top-left corner `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, m: &SparseMatrix) {
        for (r, row) in m.rows.iter().enumerate() {
            for (c, v) in row {
                self.rows[r0 + r].push((c0 + c, v.clone()));
            }
        }
    }

    pub fn apply(&self, s: &[Jet]) -> Section {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut acc: Option<Jet> = None;
                for (c, v) in row {
                    let t = v.apply(&s[*c]);
                    acc = Some(match acc {
                        Some(a) => a.add_min(&t),
                        None => t,
                    });
                }
                acc.unwrap_or_else(|| s[r].zero_like())
            })
            .collect()
    }

    /// `A ⊗ I_inner + I_outer ⊗ B` for row layout `outer_index * inner + inner_index`.
    pub fn kron_sum(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
        let (da, db) = (a.dim(), b.dim());
        let mut out = SparseMatrix::zero(da * db);
        for t in 0..da {
            for (c, v) in &a.rows[t] {
                for s in 0..db {
                    out.push(t * db + s, c * db + s, v.clone());
                }
            }
            for s in 0..db {
                for (c, v) in &b.rows[s] {
                    out.push(t * db + s, t * db + c, v.clone());
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> SparseMatrix {
        SparseMatrix {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(k, v)| (*k, v.scale(c))).collect())
                .collect(),
        }
    }
}

/// Connection coefficients `A_μ`, one matrix per coordinate direction.
#[derive(Debug, Clone)]
pub struct Connection {
    pub dim: usize,
    pub a: Vec<SparseMatrix>,
}

impl Connection {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    fn check(&self, s: &[Jet]) -> Result<()> {
        if s.len() != self.dim {
            return Err(LabError::Shape(format!(
                "section of length {} for bundle rank {}",
                s.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `∇_μ s`.
    pub fn cov(&self, s: &[Jet], mu: usize) -> Result<Section> {
        self.check(s)?;
        let mut out = Vec::with_capacity(self.dim);
        for c in s {
            out.push(c.partial(mu).map_err(|_| LabError::OrderExhausted {
                op: "covariant derivative".into(),
            })?);
        }
        let extra = self.a[mu].apply(s);
        Ok(out.iter().zip(&extra).map(|(x, y)| x.add_min(y)).collect())
    }

    pub fn gradient(&self, s: &[Jet]) -> Result<Vec<Section>> {
        (0..self.n()).map(|mu| self.cov(s, mu)).collect()
    }

    /// Connection Laplacian `tr_g(∇∘∇)` in divergence form:
    /// `Σ_μ ∇_μ(g^{μν}∇_ν s) + Γ^κ_{κμ} g^{μν} ∇_ν s`.
    pub fn laplacian(&self, pack: &CurvaturePack, s: &[Jet]) -> Result<Section> {
        let n = self.n();
        let grad = self.gradient(s)?;
        let raised = raise_sections(pack, &grad);
        let mut out: Option<Section> = None;
        for mu in 0..n {
            let d = self.cov(&raised[mu], mu)?;
            let trace = &pack.christoffel_trace[mu];
            let term = if trace.max_abs() == 0.0 {
                uniform_to(&d, trace.order())
            } else {
                add_sections(&d, &scale_section(&raised[mu], trace))
            };
            out = Some(match out {
                Some(o) => add_sections(&o, &term),
                None => term,
            });
        }
        Ok(out.expect("dimension ≥ 1"))
    }

    /// The literal coordinate formula `Σ g^{μν}(∇_μ∇_ν − Γ^λ_{μν}∇_λ) s`, kept as an independent check.
    pub fn laplacian_coordinate(&self, pack: &CurvaturePack, s: &[Jet]) -> Result<Section> {
        let n = self.n();
        let grad = self.gradient(s)?;
        let mut out: Option<Section> = None;
        for mu in 0..n {
            for nu in 0..n {
                let second = self.cov(&grad[nu], mu)?;
                let mut term = second;
                for lam in 0..n {
                    let g = pack.christoffel.get(&[lam, mu, nu]).scale(-1.0);
                    term = add_sections(&term, &scale_section(&grad[lam], &g));
                }
                let term = scale_section(&term, pack.g_inv.get(&[mu, nu]));
                out = Some(match out {
                    Some(o) => add_sections(&o, &term),
                    None => term,
                });
            }
        }
        Ok(out.expect("dimension ≥ 1"))
    }

    /// `[∇_μ, ∇_ν] s`.
    pub fn curvature_on(&self, s: &[Jet], mu: usize, nu: usize) -> Result<Section> {
        let a = self.cov(&self.cov(s, nu)?, mu)?;
        let b = self.cov(&self.cov(s, mu)?, nu)?;
        Ok(sub_sections(&a, &b))
    }
}

/// `g^{μν} ∇_ν s` for every `μ`.
pub fn raise_sections(pack: &CurvaturePack, grad: &[Section]) -> Vec<Section> {
    let n = grad.len();
    (0..n)
        .map(|mu| {
            let mut acc: Option<Section> = None;
            for nu in 0..n {
                let g = pack.g_inv.get(&[mu, nu]);
                if g.max_abs() == 0.0 && acc.is_some() {
                    continue;
                }
                let t = scale_section(&grad[nu], g);
                acc = Some(match acc {
                    Some(a) => add_sections(&a, &t),
                    None => t,
                });
            }
            acc.expect("dimension ≥ 1")
        })
        .collect()
}

pub fn add_sections(a: &[Jet], b: &[Jet]) -> Section {
    a.iter().zip(b).map(|(x, y)| x.add_min(y)).collect()
}

pub fn sub_sections(a: &[Jet], b: &[Jet]) -> Section {
    a.iter().zip(b).map(|(x, y)| x.sub_min(y)).collect()
}

pub fn scale_section(a: &[Jet], f: &Jet) -> Section {
    a.iter().map(|x| x.mul_min(f)).collect()
}

pub fn scale_section_c(a: &[Jet], c: impl Into<Complex64>) -> Section {
    let c = c.into();
    a.iter().map(|x| x.scale(c)).collect()
}

/// Truncates every component to at most `order`.
fn uniform_to(a: &[Jet], order: usize) -> Section {
    a.iter()
        .map(|x| {
            if x.order() > order {
                x.truncate(order).unwrap()
            } else {
                x.clone()
            }
        })
        .collect()
}

/// Truncates every component to the lowest order present.
pub fn uniform(a: &[Jet]) -> Section {
    let order = a.iter().map(Jet::order).min().unwrap_or(0);
    a.iter().map(|x| x.truncate(order).unwrap()).collect()
}

pub fn section_order(a: &[Jet]) -> usize {
    a.iter().map(Jet::order).min().unwrap_or(0)
}

pub fn section_max_abs(a: &[Jet]) -> f64 {
    a.iter().map(Jet::max_abs).fold(0.0, f64::max)
}

/// `|a − b| / max(|a|, |b|, 1e-30)` over all jet coefficients up to the common order.
pub fn relative_residual(a: &[Jet], b: &[Jet]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| x.sub_min(y).max_abs()).fold(0.0, f64::max);
    let order = section_order(a).min(section_order(b));
    let scale = a
        .iter()
        .chain(b)
        .map(|x| x.truncate(order).unwrap().max_abs())
        .fold(0.0, f64::max);
    diff / scale.max(1e-30)
}

/// Residual of `a` against zero, relative to a reference magnitude.
pub fn residual_vs(a: &[Jet], reference: f64) -> f64 {
    section_max_abs(a) / reference.max(1e-30)
}
