//! Standard and spin tractors in the decomposition determined by a metric,
//! their connections, metrics and changes of scale, and the splitting
//! operators built from them.
//!
//! Layout conventions:
//! * a standard tractor is `(α, X^1, …, X^n, β)` with coordinate components `X^ν`;
//! * a spin tractor is `(ψ, φ)`, each a spinor of rank `2^m`;
//! * a section of `𝒮^k = ⊗^k 𝒯 ⊗ 𝒮` is indexed `(t₁ … t_k, c)` row-major, where each
//!   `t_j ∈ 0..n+2` is a tractor slot and `c` a component of the inner bundle.
//!   The slot created by a splitting operator is appended last among the `t_j`.
//!
//! The inner bundle is either spin tractors or the trivial line (for the scalar
//! operators used by the Casimir identities).

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::bundle::{
    add_sections, scale_section, scale_section_c, sub_sections, Coef, Connection, Section, SparseMatrix,
};
use crate::curvature;
use crate::error::{LabError, Result};
use crate::jet::Jet;
use crate::spinor::SpinGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inner {
    Spin,
    Scalar,
}

/// Spin geometry together with the tractor connections of the same metric.
#[derive(Debug)]
pub struct TractorGeometry {
    pub spin: SpinGeometry,
    pub tractor: Connection,
    pub spin_tractor: Connection,
    bundles: Mutex<HashMap<(usize, Inner), Arc<Connection>>>,
}

impl TractorGeometry {
    pub fn new(spin: SpinGeometry) -> TractorGeometry {
        let n = spin.n();
        let pack = &spin.pack;
        let p_mixed = pack.schouten_mixed();
        let tractor = Connection {
            dim: n + 2,
            a: (0..n)
                .map(|mu| {
                    let mut m = SparseMatrix::zero(n + 2);
                    for nu in 0..n {
                        m.push_jet(0, 1 + nu, pack.schouten.get(&[mu, nu]).scale(-1.0));
                        m.push_jet(n + 1, 1 + nu, pack.g.get(&[mu, nu]).scale(-1.0));
                        for lam in 0..n {
                            m.push_jet(1 + nu, 1 + lam, pack.christoffel.get(&[nu, mu, lam]).clone());
                        }
                        m.push_jet(1 + nu, n + 1, p_mixed.get(&[mu, nu]).clone());
                    }
                    m.push(1 + mu, 0, Coef::Const(Complex64::new(1.0, 0.0)));
                    m
                })
                .collect(),
        };
        let d = spin.dim();
        let spin_tractor = Connection {
            dim: 2 * d,
            a: (0..n)
                .map(|mu| {
                    let mut m = SparseMatrix::zero(2 * d);
                    let omega = &spin.conn.a[mu];
                    m.add_block(0, 0, omega);
                    m.add_block(d, d, omega);
                    m.add_block(0, d, &SparseMatrix::from_jet_matrix(&spin.coord_clifford[mu]));
                    let row: Vec<Jet> = (0..n).map(|l| pack.schouten.get(&[mu, l]).scale(0.5)).collect();
                    let half_p = spin.rep.vector_matrix(&frame_vector_of_form(&spin, &row));
                    m.add_block(d, 0, &SparseMatrix::from_jet_matrix(&half_p));
                    m
                })
                .collect(),
        };
        TractorGeometry {
            spin,
            tractor,
            spin_tractor,
            bundles: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.spin.n()
    }

    pub fn inner_dim(&self, inner: Inner) -> usize {
        match inner {
            Inner::Spin => 2 * self.spin.dim(),
            Inner::Scalar => 1,
        }
    }

    pub fn section_len(&self, k: usize, inner: Inner) -> usize {
        (self.n() + 2).pow(k as u32) * self.inner_dim(inner)
    }

    /// Connection on `⊗^k 𝒯 ⊗ inner`, assembled slot by slot by the Leibniz rule.
    pub fn bundle(&self, k: usize, inner: Inner) -> Arc<Connection> {
        if let Some(c) = self.bundles.lock().unwrap().get(&(k, inner)) {
            return c.clone();
        }
        let n = self.n();
        let inner_conn = match inner {
            Inner::Spin => self.spin_tractor.clone(),
            Inner::Scalar => Connection {
                dim: 1,
                a: vec![SparseMatrix::zero(1); n],
            },
        };
        let conn = if k == 0 {
            inner_conn
        } else {
            let mut slots = self.tractor.clone();
            for _ in 1..k {
                slots = Connection {
                    dim: slots.dim * (n + 2),
                    a: (0..n)
                        .map(|mu| SparseMatrix::kron_sum(&slots.a[mu], &self.tractor.a[mu]))
                        .collect(),
                };
            }
            Connection {
                dim: slots.dim * inner_conn.dim,
                a: (0..n)
                    .map(|mu| SparseMatrix::kron_sum(&slots.a[mu], &inner_conn.a[mu]))
                    .collect(),
            }
        };
        let conn = Arc::new(conn);
        self.bundles.lock().unwrap().insert((k, inner), conn.clone());
        conn
    }

    fn check_len(&self, s: &[Jet], k: usize, inner: Inner, op: &str) -> Result<()> {
        let want = self.section_len(k, inner);
        if s.len() != want {
            return Err(LabError::Shape(format!(
                "{op}: section of length {} where 𝒮^{k} needs {want}",
                s.len()
            )));
        }
        Ok(())
    }

    /// `g^𝒯(t₁, t₂) = α₁β₂ + β₁α₂ + g(X₁, X₂)`.
    pub fn tractor_metric(&self, t1: &[Jet], t2: &[Jet]) -> Jet {
        let n = self.n();
        let g = &self.spin.pack.g;
        let mut acc = t1[0].mul_min(&t2[n + 1]).add_min(&t1[n + 1].mul_min(&t2[0]));
        for a in 0..n {
            for b in 0..n {
                acc = acc.add_min(&g.get(&[a, b]).mul_min(&t1[1 + a]).mul_min(&t2[1 + b]));
            }
        }
        acc
    }

    /// `g^𝒮(s₁, s₂) = −2√2 i^p (⟨φ₁, ψ₂⟩ + (−1)^p ⟨ψ₁, φ₂⟩)`.
    pub fn spin_tractor_metric(&self, s1: &[Jet], s2: &[Jet]) -> Jet {
        let d = self.spin.dim();
        let (psi1, phi1) = s1.split_at(d);
        let (psi2, phi2) = s2.split_at(d);
        let rep = &self.spin.rep;
        let a = self.spin.product(phi1, psi2);
        let b = self.spin.product(psi1, phi2).scale(rep.sign_p());
        a.add_min(&b).scale(rep.i_pow_p() * (-2.0 * SQRT_2))
    }

    /// The product metric on `⊗^k 𝒯 ⊗ inner`.
    pub fn bundle_metric(&self, k: usize, inner: Inner, s: &[Jet], t: &[Jet]) -> Result<Jet> {
        self.check_len(s, k, inner, "bundle metric")?;
        self.check_len(t, k, inner, "bundle metric")?;
        let n = self.n();
        let id = self.inner_dim(inner);
        let pairs = tractor_metric_entries(&self.spin.pack.g, n);
        let slots = (n + 2).pow(k as u32);
        let mut acc: Option<Jet> = None;
        let mut ia = vec![0usize; k];
        for a in 0..slots {
            crate::tensor::unflatten(n + 2, a, &mut ia);
            // all b with g^𝒯(a_j, b_j) ≠ 0 in every slot
            let mut partial: Vec<(usize, Option<Jet>)> = vec![(0, None)];
            for &aj in &ia {
                let mut next = Vec::new();
                for (b, w) in &partial {
                    for (bj, c) in &pairs[aj] {
                        let w2 = match (w, c) {
                            (None, None) => None,
                            (Some(x), None) => Some(x.clone()),
                            (None, Some(y)) => Some(y.clone()),
                            (Some(x), Some(y)) => Some(x.mul_min(y)),
                        };
                        next.push((b * (n + 2) + bj, w2));
                    }
                }
                partial = next;
            }
            let sa = &s[a * id..(a + 1) * id];
            for (b, w) in partial {
                let tb = &t[b * id..(b + 1) * id];
                let val = match inner {
                    Inner::Spin => self.spin_tractor_metric(sa, tb),
                    Inner::Scalar => sa[0].mul_min(&tb[0]),
                };
                let val = match w {
                    Some(w) => val.mul_min(&w),
                    None => val,
                };
                acc = Some(match acc {
                    Some(x) => x.add_min(&val),
                    None => val,
                });
            }
        }
        Ok(acc.expect("nonempty bundle"))
    }

    /// Change of decomposition `Φ^ĝ ∘ (Φ^g)^{-1}` for `ĝ = e^{2σ}g`.
    pub fn tractor_rescale(&self, sigma: &Jet) -> Result<SparseMatrix> {
        let n = self.n();
        let pack = &self.spin.pack;
        let em = sigma.scale(-1.0).exp()?;
        let ep = sigma.exp()?;
        let ds = curvature::differential(sigma)?;
        let grad = curvature::sharp(pack, &ds);
        let mut norm2 = ds[0].mul_min(&grad[0]);
        for mu in 1..n {
            norm2 = norm2.add_min(&ds[mu].mul_min(&grad[mu]));
        }
        let mut m = SparseMatrix::zero(n + 2);
        m.push_jet(0, 0, em.clone());
        for nu in 0..n {
            m.push_jet(0, 1 + nu, em.mul_min(&ds[nu]).scale(-1.0));
            m.push_jet(1 + nu, 1 + nu, em.clone());
            m.push_jet(1 + nu, n + 1, em.mul_min(&grad[nu]));
        }
        m.push_jet(0, n + 1, em.mul_min(&norm2).scale(-0.5));
        m.push_jet(n + 1, n + 1, ep);
        Ok(m)
    }

    /// `Ψ^ĝ ∘ (Ψ^g)^{-1}` on spinor components taken in the paired frames `ŝ_i = e^{−σ}s_i`.
    pub fn spin_tractor_rescale(&self, sigma: &Jet) -> Result<SparseMatrix> {
        let d = self.spin.dim();
        let eh = sigma.scale(0.5).exp()?;
        let emh = sigma.scale(-0.5).exp()?;
        let ds = curvature::differential(sigma)?;
        let half: Vec<Jet> = ds.iter().map(|x| x.mul_min(&emh).scale(0.5)).collect();
        let grad_cl = self.spin.rep.vector_matrix(&frame_vector_of_form(&self.spin, &half));
        let mut m = SparseMatrix::zero(2 * d);
        for r in 0..d {
            m.push_jet(r, r, eh.clone());
            m.push_jet(d + r, d + r, emh.clone());
        }
        m.add_block(d, 0, &SparseMatrix::from_jet_matrix(&grad_cl));
        Ok(m)
    }

    /// Applies the change of scale to every tractor slot and to the inner bundle of a section of `𝒮^k`.
    pub fn rescale_section(&self, k: usize, inner: Inner, s: &[Jet], sigma: &Jet) -> Result<Section> {
        self.check_len(s, k, inner, "rescale")?;
        let n = self.n();
        let id = self.inner_dim(inner);
        let t = self.tractor_rescale(sigma)?;
        let mut cur = s.to_vec();
        if inner == Inner::Spin {
            let ts = self.spin_tractor_rescale(sigma)?;
            let slots = (n + 2).pow(k as u32);
            let mut out = Vec::with_capacity(cur.len());
            for a in 0..slots {
                out.extend(ts.apply(&cur[a * id..(a + 1) * id]));
            }
            cur = out;
        }
        for slot in 0..k {
            let stride = (n + 2).pow((k - 1 - slot) as u32) * id;
            let block = stride * (n + 2);
            let mut out = cur.clone();
            for base in (0..cur.len()).step_by(block) {
                for off in 0..stride {
                    let v: Vec<Jet> = (0..n + 2).map(|t_| cur[base + t_ * stride + off].clone()).collect();
                    let w = t.apply(&v);
                    for (t_, x) in w.into_iter().enumerate() {
                        out[base + t_ * stride + off] = x;
                    }
                }
            }
            cur = out;
        }
        Ok(cur)
    }

    /// `□_w s = Δ^∇ s + wJ s` on `𝒮^k`.
    pub fn boxw(&self, k: usize, inner: Inner, s: &[Jet], w: f64) -> Result<Section> {
        self.check_len(s, k, inner, "box")?;
        let conn = self.bundle(k, inner);
        let lap = conn.laplacian(&self.spin.pack, s)?;
        let j = self.spin.pack.j.scale(w);
        Ok(add_sections(&lap, &scale_section(s, &j)))
    }

    /// `D^k(g,w) s = (−□_w s, (n−2+2w)(∇s)^♮, w(n−2+2w) s)` placed in a new last tractor slot.
    pub fn split_d(&self, k: usize, inner: Inner, s: &[Jet], w: f64) -> Result<Section> {
        self.check_len(s, k, inner, "D^k")?;
        let n = self.n();
        let nf = n as f64;
        let w1 = nf - 2.0 + 2.0 * w;
        let conn = self.bundle(k, inner);
        let top = scale_section_c(&self.boxw(k, inner, s, w)?, -1.0);
        let grad = conn.gradient(s)?;
        let raised = crate::bundle::raise_sections(&self.spin.pack, &grad);
        let bottom = scale_section_c(s, w * w1);
        let mut parts: Vec<Section> = Vec::with_capacity(n + 2);
        parts.push(top);
        for r in raised {
            parts.push(scale_section_c(&r, w1));
        }
        parts.push(bottom);
        let order = parts.iter().map(|p| crate::bundle::section_order(p)).min().unwrap_or(0);
        Ok(interleave(&parts, self.inner_dim(inner), order))
    }

    /// `C^k(g,w)(s₁, η, s₂) = (n + n w₁ + w₁ w) s₁ + (n+2w) diver(η) − (Δ^∇ + (1−n−w)J) s₂`, `w₁ = n−2+2w`.
    pub fn cosplit_c(&self, k: usize, inner: Inner, s: &[Jet], w: f64) -> Result<Section> {
        self.check_len(s, k + 1, inner, "C^k")?;
        let n = self.n();
        let nf = n as f64;
        let w1 = nf - 2.0 + 2.0 * w;
        let parts = deinterleave(s, n + 2, self.inner_dim(inner));
        let conn = self.bundle(k, inner);
        let pack = &self.spin.pack;
        let mut div: Option<Section> = None;
        for nu in 0..n {
            let term = add_sections(
                &conn.cov(&parts[1 + nu], nu)?,
                &scale_section(&parts[1 + nu], &pack.christoffel_trace[nu]),
            );
            div = Some(match div {
                Some(a) => add_sections(&a, &term),
                None => term,
            });
        }
        let div = div.expect("dimension ≥ 1");
        let first = scale_section_c(&parts[0], nf + nf * w1 + w1 * w);
        let second = scale_section_c(&div, nf + 2.0 * w);
        let third = self.boxw(k, inner, &parts[n + 1], 1.0 - nf - w)?;
        Ok(sub_sections(&add_sections(&first, &second), &third))
    }

    /// `D^spin(g,η) ψ = ((η + (n−1)/2) ψ, ½ D ψ)`.
    pub fn split_spin(&self, psi: &[Jet], eta: f64) -> Result<Section> {
        let nf = self.n() as f64;
        let top = scale_section_c(psi, eta + (nf - 1.0) / 2.0);
        let bottom = scale_section_c(&self.spin.dirac(psi)?, 0.5);
        let order = crate::bundle::section_order(&top).min(crate::bundle::section_order(&bottom));
        Ok(top
            .iter()
            .chain(&bottom)
            .map(|x| x.truncate(order.min(x.order())).unwrap())
            .collect())
    }

    /// `C^spin(g,η)(ψ, φ) = ½ D ψ − (η + n/2) φ`.
    pub fn cosplit_spin(&self, s: &[Jet], eta: f64) -> Result<Section> {
        let d = self.spin.dim();
        if s.len() != 2 * d {
            return Err(LabError::Shape(format!(
                "spin tractor of length {} (need {})",
                s.len(),
                2 * d
            )));
        }
        let nf = self.n() as f64;
        let (psi, phi) = s.split_at(d);
        Ok(sub_sections(
            &scale_section_c(&self.spin.dirac(psi)?, 0.5),
            &scale_section_c(phi, eta + nf / 2.0),
        ))
    }

    /// The curved Casimir on weight-`w` standard tractors, from its component formula.
    pub fn casimir(&self, t: &[Jet], w: f64) -> Result<Section> {
        let n = self.n();
        let pack = &self.spin.pack;
        let (b1, b2, b3) = casimir_scalars(n, w);
        let x = &t[1..=n];
        let beta = &t[n + 1];
        let mut div = x[0].partial(0)?.add_min(&pack.christoffel_trace[0].mul_min(&x[0]));
        for nu in 1..n {
            div = div
                .add_min(&x[nu].partial(nu)?)
                .add_min(&pack.christoffel_trace[nu].mul_min(&x[nu]));
        }
        let grad = curvature::sharp(pack, &curvature::differential(beta)?);
        let mut out = Vec::with_capacity(n + 2);
        out.push(
            t[0].scale(b1)
                .sub_min(&div.scale(2.0))
                .sub_min(&pack.j.mul_min(beta).scale(2.0)),
        );
        for nu in 0..n {
            out.push(x[nu].scale(b2).add_min(&grad[nu].scale(2.0)));
        }
        out.push(beta.scale(b3));
        Ok(out)
    }

    /// The curved Casimir from its defining formula
    /// `β(t) − 2 Σ_l ρ(dx^l)(∇^g_{∂_l} t − ρ(P(∂_l)) t)`, where `ρ(X)(α,Y,β) = (0, αX, −g(X,Y))`
    /// and `ρ(ω)(α,Y,β) = (ω(Y), −β ω^♮, 0)`.
    pub fn casimir_from_definition(&self, t: &[Jet], w: f64) -> Result<Section> {
        let n = self.n();
        let pack = &self.spin.pack;
        let (b1, b2, b3) = casimir_scalars(n, w);
        let x = &t[1..=n];
        let beta = &t[n + 1];
        let mut acc: Vec<Option<Jet>> = vec![None; n + 2];
        let mut add = |slot: usize, v: Jet| {
            acc[slot] = Some(match acc[slot].take() {
                Some(a) => a.add_min(&v),
                None => v,
            });
        };
        for l in 0..n {
            // u = ∇^g_l t − ρ(P(∂_l)) t; only its X and β parts reach ρ(dx^l)
            let mut ux_l = x[l].partial(l)?;
            for lam in 0..n {
                ux_l = ux_l.add_min(&pack.christoffel.get(&[l, l, lam]).mul_min(&x[lam]));
            }
            let p_up = curvature::sharp(
                pack,
                &(0..n).map(|c| pack.schouten.get(&[l, c]).clone()).collect::<Vec<_>>(),
            );
            ux_l = ux_l.add_min(&beta.mul_min(&p_up[l]));
            let ub = beta.partial(l)?;
            add(0, ux_l.scale(-2.0));
            for nu in 0..n {
                add(1 + nu, pack.g_inv.get(&[l, nu]).mul_min(&ub).scale(2.0));
            }
        }
        let mut out = Vec::with_capacity(n + 2);
        out.push(t[0].scale(b1).add_min(acc[0].as_ref().unwrap()));
        for nu in 0..n {
            out.push(x[nu].scale(b2).add_min(acc[1 + nu].as_ref().unwrap()));
        }
        out.push(beta.scale(b3));
        Ok(out)
    }

    /// `P^𝒮_{2N}` on spin tractors.
    pub fn p2n(&self, s: &[Jet], big_n: usize) -> Result<Section> {
        let pipeline = Pipeline::p2n(self.n(), big_n)?;
        pipeline.run(self, s)
    }

    /// `D_{2N+1} = C^spin(−(2N+n)/2) ∘ P^𝒮_{2N} ∘ D^spin((2N+1−n)/2)`.
    pub fn d2n1(&self, psi: &[Jet], big_n: usize) -> Result<Section> {
        let pipeline = Pipeline::d2n1(self.n(), big_n)?;
        pipeline.run(self, psi)
    }

    /// `𝓛_k = 4/(k+1) D^spin(−(k+n)/2) ∘ D_k ∘ C^spin((k+1−n)/2)` for a spinor operator `D_k`
    /// whose specification must have bi-degree `((k−n)/2, −(k+n)/2)`.
    pub fn l_k(
        &self,
        s: &[Jet],
        k: usize,
        dk_spec: &WeightedOpSpec,
        dk: &dyn Fn(&SpinGeometry, &[Jet]) -> Result<Section>,
    ) -> Result<Section> {
        let nf = self.n() as f64;
        let kf = k as f64;
        let want = ((kf - nf) / 2.0, -(kf + nf) / 2.0);
        if (dk_spec.weight_in - want.0).abs() > 1e-12 || (dk_spec.weight_out - want.1).abs() > 1e-12 {
            return Err(LabError::InvalidConfig {
                field: "L_k".into(),
                msg: format!(
                    "operator {} has bi-degree ({}, {}) but 𝓛_{k} needs ({}, {})",
                    dk_spec.id, dk_spec.weight_in, dk_spec.weight_out, want.0, want.1
                ),
            });
        }
        let a = self.cosplit_spin(s, (kf + 1.0 - nf) / 2.0)?;
        let b = dk(&self.spin, &a)?;
        let c = self.split_spin(&b, -(kf + nf) / 2.0)?;
        Ok(scale_section_c(&c, 4.0 / (kf + 1.0)))
    }
}

fn casimir_scalars(n: usize, w: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let base = w * (w + nf);
    (base - 2.0 * (nf + 2.0 * w - 2.0), base - 2.0 * w, base)
}

/// Frame components (as a vector) of `ω^♮` for a 1-form with coordinate components `ω_μ`.
fn frame_vector_of_form(spin: &SpinGeometry, w: &[Jet]) -> Vec<Jet> {
    let n = spin.n();
    (0..n)
        .map(|i| {
            let mut acc = w[0].mul_min(&spin.frame.a[i][0]);
            for mu in 1..n {
                acc = acc.add_min(&w[mu].mul_min(&spin.frame.a[i][mu]));
            }
            acc.scale(spin.frame.eps[i])
        })
        .collect()
}

/// Nonzero entries of the tractor metric per row: `(column, coefficient)` with `None` meaning 1.
fn tractor_metric_entries(g: &crate::tensor::Tensor, n: usize) -> Vec<Vec<(usize, Option<Jet>)>> {
    let mut rows = vec![Vec::new(); n + 2];
    rows[0].push((n + 1, None));
    rows[n + 1].push((0, None));
    for a in 0..n {
        for b in 0..n {
            let v = g.get(&[a, b]);
            if v.max_abs() > 0.0 {
                rows[1 + a].push((1 + b, Some(v.clone())));
            }
        }
    }
    rows
}

/// Places `parts[t]` (each a section of `𝒮^k`) in the new last tractor slot `t`.
fn interleave(parts: &[Section], inner_dim: usize, order: usize) -> Section {
    let slots = parts.len();
    let len = parts[0].len();
    let outer = len / inner_dim;
    let mut out = Vec::with_capacity(len * slots);
    for m in 0..outer {
        for part in parts {
            for c in 0..inner_dim {
                out.push(part[m * inner_dim + c].truncate(order).unwrap());
            }
        }
    }
    out
}

/// Inverse of [`interleave`].
fn deinterleave(s: &[Jet], slots: usize, inner_dim: usize) -> Vec<Section> {
    let outer = s.len() / (slots * inner_dim);
    (0..slots)
        .map(|t| {
            let mut part = Vec::with_capacity(outer * inner_dim);
            for m in 0..outer {
                for c in 0..inner_dim {
                    part.push(s[(m * slots + t) * inner_dim + c].clone());
                }
            }
            part
        })
        .collect()
}

/// An operator together with the conformal weights of its source and target.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOpSpec {
    pub id: String,
    pub weight_in: f64,
    pub weight_out: f64,
}

impl WeightedOpSpec {
    pub fn new(id: impl Into<String>, weight_in: f64, weight_out: f64) -> WeightedOpSpec {
        WeightedOpSpec {
            id: id.into(),
            weight_in,
            weight_out,
        }
    }
}

/// One factor of a composed tractor operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    SplitD { k: usize, w: f64 },
    CosplitC { k: usize, w: f64 },
    Box { k: usize, w: f64 },
    SplitSpin { eta: f64 },
    CosplitSpin { eta: f64 },
}

impl Stage {
    pub fn spec(&self) -> WeightedOpSpec {
        match *self {
            Stage::SplitD { k, w } => WeightedOpSpec::new(format!("D^{k}({w})"), w, w - 1.0),
            Stage::CosplitC { k, w } => WeightedOpSpec::new(format!("C^{k}({w})"), w, w - 1.0),
            Stage::Box { k, w } => WeightedOpSpec::new(format!("box^{k}({w})"), w, w - 2.0),
            Stage::SplitSpin { eta } => WeightedOpSpec::new(format!("D^spin({eta})"), eta, eta - 0.5),
            Stage::CosplitSpin { eta } => WeightedOpSpec::new(format!("C^spin({eta})"), eta, eta - 0.5),
        }
    }

    fn apply(&self, geo: &TractorGeometry, s: &[Jet]) -> Result<Section> {
        match *self {
            Stage::SplitD { k, w } => geo.split_d(k, Inner::Spin, s, w),
            Stage::CosplitC { k, w } => geo.cosplit_c(k, Inner::Spin, s, w),
            Stage::Box { k, w } => geo.boxw(k, Inner::Spin, s, w),
            Stage::SplitSpin { eta } => geo.split_spin(s, eta),
            Stage::CosplitSpin { eta } => geo.cosplit_spin(s, eta),
        }
    }
}

/// A composition of stages, applied first to last, whose weights are validated on construction.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub n: usize,
    pub stages: Vec<Stage>,
    pub spec: WeightedOpSpec,
}

impl Pipeline {
    pub fn new(id: &str, n: usize, stages: Vec<Stage>) -> Result<Pipeline> {
        let specs: Vec<WeightedOpSpec> = stages.iter().map(Stage::spec).collect();
        for pair in specs.windows(2) {
            if (pair[0].weight_out - pair[1].weight_in).abs() > 1e-12 {
                return Err(LabError::InvalidConfig {
                    field: id.into(),
                    msg: format!(
                        "{} produces weight {} but {} expects {}",
                        pair[0].id, pair[0].weight_out, pair[1].id, pair[1].weight_in
                    ),
                });
            }
        }
        let spec = WeightedOpSpec::new(id, specs[0].weight_in, specs.last().unwrap().weight_out);
        Ok(Pipeline { n, stages, spec })
    }

    /// Stages of `P^𝒮_{2N}`, first applied first.
    pub fn p2n_stages(n: usize, big_n: usize) -> Vec<Stage> {
        let nf = n as f64;
        let mut stages = Vec::new();
        for j in 0..big_n.saturating_sub(1) {
            stages.push(Stage::SplitD {
                k: j,
                w: (2.0 * (big_n - j) as f64 - nf) / 2.0,
            });
        }
        stages.push(Stage::Box {
            k: big_n - 1,
            w: (2.0 - nf) / 2.0,
        });
        for j in (0..big_n.saturating_sub(1)).rev() {
            stages.push(Stage::CosplitC {
                k: j,
                w: -(2.0 * (big_n - 1 - j) as f64 + nf) / 2.0,
            });
        }
        stages
    }

    pub fn p2n(n: usize, big_n: usize) -> Result<Pipeline> {
        if big_n == 0 {
            return Err(LabError::InvalidConfig {
                field: "N".into(),
                msg: "P_2N needs N ≥ 1".into(),
            });
        }
        Pipeline::new(&format!("P{}S", 2 * big_n), n, Pipeline::p2n_stages(n, big_n))
    }

    pub fn d2n1(n: usize, big_n: usize) -> Result<Pipeline> {
        let nf = n as f64;
        let bn = big_n as f64;
        let mut stages = vec![Stage::SplitSpin {
            eta: (2.0 * bn + 1.0 - nf) / 2.0,
        }];
        stages.extend(Pipeline::p2n_stages(n, big_n));
        stages.push(Stage::CosplitSpin {
            eta: -(2.0 * bn + nf) / 2.0,
        });
        Pipeline::new(&format!("D{}pipeline", 2 * big_n + 1), n, stages)
    }

    /// Number of derivatives the composition consumes.
    pub fn derivative_demand(&self) -> usize {
        self.stages
            .iter()
            .map(|s| match s {
                Stage::SplitD { .. } | Stage::CosplitC { .. } | Stage::Box { .. } => 2,
                Stage::SplitSpin { .. } | Stage::CosplitSpin { .. } => 1,
            })
            .sum()
    }

    pub fn run(&self, geo: &TractorGeometry, s: &[Jet]) -> Result<Section> {
        if geo.n() != self.n {
            return Err(LabError::Shape(format!(
                "pipeline built for n = {} applied in dimension {}",
                self.n,
                geo.n()
            )));
        }
        let mut cur = s.to_vec();
        for st in &self.stages {
            cur = st.apply(geo, &cur)?;
        }
        Ok(cur)
    }
}
