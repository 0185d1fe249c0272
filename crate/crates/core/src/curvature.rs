//! Levi-Civita connection and the curvature tensors built from it, as
//! coordinate-component jets.
//!
//! Conventions:
//! * `Γ^k_ij` are the Christoffel symbols, `∇_i ∂_j = Γ^k_ij ∂_k`.
//! * `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, stored as `R^l_{kij}` with
//!   `R(∂_i,∂_j)∂_k = R^l_{kij} ∂_l`.
//! * `𝓡(X,Y,Z,W) = g(R(X,Y)Z, W)`; `Ric(X,Y) = tr_g 𝓡(X,·,·,Y)`.
//! * `J = τ/(2(n−1))`, `P = (Ric − J g)/(n−2)`, `W = 𝓡 + P⊼g`,
//!   `C(X,Y,Z) = (∇_X P)(Y,Z) − (∇_Y P)(X,Z)`,
//!   `B(X,Y) = tr_g (∇_· C)(·,X,Y) + g(P, W(·,X,Y,·))`.
//!
//! A pack built from metric jets of order `K` has `Γ` at order `K−1`,
//! `𝓡, Ric, P, W` at `K−2`, `C` at `K−3` and `B` at `K−4`.

use std::sync::OnceLock;

use crate::chart::MetricChart;
use crate::error::{LabError, Result};
use crate::jet::Jet;
use crate::tensor::{dot_to, invert, Tensor, Variance};

#[derive(Debug)]
pub struct CurvaturePack {
    pub n: usize,
    pub metric_order: usize,
    pub g: Tensor,
    pub g_inv: Tensor,
    /// `Γ^k_ij` indexed `[k][i][j]`.
    pub christoffel: Tensor,
    /// `Γ^k_{kμ}`, the trace entering divergences.
    pub christoffel_trace: Vec<Jet>,
    /// `R^l_{kij}` indexed `[l][k][i][j]`.
    pub riemann: Tensor,
    /// `𝓡(∂_i,∂_j,∂_k,∂_l)` indexed `[i][j][k][l]`.
    pub riemann_cov: Tensor,
    pub ricci: Tensor,
    pub scalar: Jet,
    pub j: Jet,
    pub schouten: Tensor,
    pub weyl: Tensor,
    cotton: OnceLock<Result<Tensor>>,
    bach: OnceLock<Result<Tensor>>,
}

impl CurvaturePack {
    pub fn new(chart: &MetricChart, x0: &[f64], metric_order: usize) -> Result<CurvaturePack> {
        let g = chart.metric_jets(x0, metric_order)?;
        chart.check_signature(&g)?;
        CurvaturePack::from_metric(g, metric_order)
    }

    pub fn from_metric(g: Tensor, metric_order: usize) -> Result<CurvaturePack> {
        let n = g.n;
        if n < 3 {
            return Err(LabError::ExcludedDimension {
                op: "curvature pack".into(),
                n,
                reason: "the Schouten tensor divides by n − 2".into(),
            });
        }
        if metric_order < 2 {
            return Err(LabError::InsufficientOrder {
                op: "curvature pack".into(),
                demand: 2,
                have: metric_order,
            });
        }
        let nv = n;
        let k = metric_order;
        let g_inv = Tensor {
            n,
            rank: 2,
            data: invert(n, &g.data)?,
        };

        let dg = Tensor::from_fn(n, 3, |ix| g.get(&[ix[1], ix[2]]).partial(ix[0]).unwrap());
        // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let gamma_low = Tensor::from_fn(n, 3, |ix| {
            let (l, i, j) = (ix[0], ix[1], ix[2]);
            let s = dg
                .get(&[i, j, l])
                .add_min(dg.get(&[j, i, l]))
                .sub_min(dg.get(&[l, i, j]));
            s.scale(0.5)
        });
        let christoffel = Tensor::from_fn(n, 3, |ix| {
            let (kk, i, j) = (ix[0], ix[1], ix[2]);
            dot_to(
                (0..n).map(|l| (g_inv.get(&[kk, l]).clone(), gamma_low.get(&[l, i, j]).clone())),
                nv,
                k - 1,
            )
        });
        let christoffel_trace = (0..n)
            .map(|mu| {
                let mut acc = Jet::zero(nv, k - 1);
                for kk in 0..n {
                    acc.axpy_min(1.0, christoffel.get(&[kk, kk, mu]));
                }
                acc
            })
            .collect();

        // R^l_{kij} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}
        let mut riemann = Tensor::zeros(n, 4, nv, k - 2);
        for l in 0..n {
            for kk in 0..n {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let mut acc = christoffel
                            .get(&[l, j, kk])
                            .partial(i)?
                            .sub_min(&christoffel.get(&[l, i, kk]).partial(j)?);
                        for m in 0..n {
                            acc.fma_assign(christoffel.get(&[l, i, m]), christoffel.get(&[m, j, kk]))?;
                            acc.fma_assign(&christoffel.get(&[l, j, m]).scale(-1.0), christoffel.get(&[m, i, kk]))?;
                        }
                        riemann.set(&[l, kk, j, i], acc.scale(-1.0));
                        riemann.set(&[l, kk, i, j], acc);
                    }
                }
            }
        }
        let riemann_cov = Tensor::from_fn(n, 4, |ix| {
            let (i, j, kk, l) = (ix[0], ix[1], ix[2], ix[3]);
            dot_to(
                (0..n).map(|m| (g.get(&[l, m]).clone(), riemann.get(&[m, kk, i, j]).clone())),
                nv,
                k - 2,
            )
        });
        let ricci = Tensor::from_fn(n, 2, |ix| {
            let mut pairs = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    pairs.push((
                        g_inv.get(&[a, b]).clone(),
                        riemann_cov.get(&[ix[0], a, b, ix[1]]).clone(),
                    ));
                }
            }
            dot_to(pairs, nv, k - 2)
        });
        let scalar = trace_g(&g_inv, &ricci);
        let nf = n as f64;
        let j = scalar.scale(1.0 / (2.0 * (nf - 1.0)));
        let schouten = Tensor::from_fn(n, 2, |ix| {
            let gj = g.get(ix).mul_min(&j);
            ricci.get(ix).sub_min(&gj).scale(1.0 / (nf - 2.0))
        });
        let weyl = riemann_cov.add(&kulkarni_nomizu(&schouten, &g)?)?;
        Ok(CurvaturePack {
            n,
            metric_order,
            g,
            g_inv,
            christoffel,
            christoffel_trace,
            riemann,
            riemann_cov,
            ricci,
            scalar,
            j,
            schouten,
            weyl,
            cotton: OnceLock::new(),
            bach: OnceLock::new(),
        })
    }

    /// Jets in the chart variables (equal to the dimension).
    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn cotton(&self) -> Result<&Tensor> {
        self.cotton
            .get_or_init(|| {
                if self.metric_order < 3 {
                    return Err(LabError::InsufficientOrder {
                        op: "Cotton tensor".into(),
                        demand: 3,
                        have: self.metric_order,
                    });
                }
                let dp = cov_deriv(self, &self.schouten, &[Variance::Lower, Variance::Lower])?;
                Ok(Tensor::from_fn(self.n, 3, |ix| {
                    dp.get(&[ix[0], ix[1], ix[2]]).sub_min(dp.get(&[ix[1], ix[0], ix[2]]))
                }))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn bach(&self) -> Result<&Tensor> {
        self.bach
            .get_or_init(|| {
                if self.metric_order < 4 {
                    return Err(LabError::InsufficientOrder {
                        op: "Bach tensor".into(),
                        demand: 4,
                        have: self.metric_order,
                    });
                }
                let n = self.n;
                let c = self.cotton()?;
                let dc = cov_deriv(self, c, &[Variance::Lower; 3])?;
                let p_up = raise_both(self, &self.schouten);
                Ok(Tensor::from_fn(n, 2, |ix| {
                    let (x, y) = (ix[0], ix[1]);
                    let mut acc = Jet::zero(n, self.metric_order - 4);
                    for a in 0..n {
                        for b in 0..n {
                            acc.fma_assign(self.g_inv.get(&[a, b]), dc.get(&[a, b, x, y])).unwrap();
                            acc.fma_assign(p_up.get(&[a, b]), self.weyl.get(&[a, x, y, b])).unwrap();
                        }
                    }
                    acc
                }))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `P_μ^ν = g^{νλ} P_{μλ}` indexed `[μ][ν]`.
    pub fn schouten_mixed(&self) -> Tensor {
        mixed(self, &self.schouten)
    }
}

/// `T_μ^ν = g^{νλ} T_{μλ}`.
pub fn mixed(pack: &CurvaturePack, t: &Tensor) -> Tensor {
    let n = pack.n;
    let order = t.order().min(pack.g_inv.order());
    Tensor::from_fn(n, 2, |ix| {
        dot_to(
            (0..n).map(|l| (pack.g_inv.get(&[ix[1], l]).clone(), t.get(&[ix[0], l]).clone())),
            n,
            order,
        )
    })
}

/// `T^{ab} = g^{ai} g^{bj} T_ij`.
pub fn raise_both(pack: &CurvaturePack, t: &Tensor) -> Tensor {
    let n = pack.n;
    let m = mixed(pack, t);
    let order = m.order();
    Tensor::from_fn(n, 2, |ix| {
        dot_to(
            (0..n).map(|i| (pack.g_inv.get(&[ix[0], i]).clone(), m.get(&[i, ix[1]]).clone())),
            n,
            order,
        )
    })
}

/// `g^{ab} T_ab`.
pub fn trace_g(g_inv: &Tensor, t: &Tensor) -> Jet {
    let n = g_inv.n;
    let order = g_inv.order().min(t.order());
    let mut pairs = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            pairs.push((g_inv.get(&[a, b]).clone(), t.get(&[a, b]).clone()));
        }
    }
    dot_to(pairs, n, order)
}

/// `(A⊼B)(X,Y,Z,W) = A(X,Z)B(Y,W) + A(Y,W)B(X,Z) − A(X,W)B(Y,Z) − A(Y,Z)B(X,W)`.
pub fn kulkarni_nomizu(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.rank != 2 || b.rank != 2 || a.n != b.n {
        return Err(LabError::Shape(
            "Kulkarni–Nomizu product needs two 2-tensors of equal dimension".into(),
        ));
    }
    Ok(Tensor::from_fn(a.n, 4, |ix| {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        let t1 = a.get(&[x, z]).mul_min(b.get(&[y, w]));
        let t2 = a.get(&[y, w]).mul_min(b.get(&[x, z]));
        let t3 = a.get(&[x, w]).mul_min(b.get(&[y, z]));
        let t4 = a.get(&[y, z]).mul_min(b.get(&[x, w]));
        t1.add_min(&t2).sub_min(&t3).sub_min(&t4)
    }))
}

/// `∇T` with the derivative index first: `(∇T)[a, i₁…i_k] = (∇_a T)_{i₁…i_k}`.
pub fn cov_deriv(pack: &CurvaturePack, t: &Tensor, variance: &[Variance]) -> Result<Tensor> {
    if variance.len() != t.rank {
        return Err(LabError::Shape(format!(
            "variance list of length {} for a rank-{} tensor",
            variance.len(),
            t.rank
        )));
    }
    let n = t.n;
    let order = t.order().checked_sub(1).ok_or(LabError::OrderExhausted {
        op: "covariant derivative".into(),
    })?;
    let order = order.min(pack.christoffel.order());
    let mut out = Tensor::zeros(n, t.rank + 1, n, order);
    let mut idx = vec![0usize; t.rank + 1];
    for flat in 0..out.data.len() {
        crate::tensor::unflatten(n, flat, &mut idx);
        let a = idx[0];
        let slots = &idx[1..];
        let mut acc = t.get(slots).partial(a)?.truncate(order)?;
        let mut moved = slots.to_vec();
        for (s, var) in variance.iter().enumerate() {
            for m in 0..n {
                moved[s] = m;
                let comp = t.get(&moved);
                match var {
                    Variance::Lower => {
                        acc.fma_assign(&pack.christoffel.get(&[m, a, slots[s]]).scale(-1.0), comp)?;
                    }
                    Variance::Upper => {
                        acc.fma_assign(pack.christoffel.get(&[slots[s], a, m]), comp)?;
                    }
                }
            }
            moved[s] = slots[s];
        }
        out.data[flat] = acc;
    }
    Ok(out)
}

/// Divergence of a covariant 2-tensor, `(div T)(X) = Σ g^{ab} (∇_a T)(b, X)`.
pub fn divergence(pack: &CurvaturePack, t: &Tensor) -> Result<Vec<Jet>> {
    let n = pack.n;
    let dt = cov_deriv(pack, t, &[Variance::Lower, Variance::Lower])?;
    let order = dt.order().min(pack.g_inv.order());
    Ok((0..n)
        .map(|x| {
            let mut pairs = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    pairs.push((pack.g_inv.get(&[a, b]).clone(), dt.get(&[a, b, x]).clone()));
                }
            }
            dot_to(pairs, n, order)
        })
        .collect())
}

/// Raises a 1-form: `X^a = g^{ab} ω_b`.
pub fn sharp(pack: &CurvaturePack, omega: &[Jet]) -> Vec<Jet> {
    let n = pack.n;
    let order = omega.iter().map(Jet::order).min().unwrap_or(0).min(pack.g_inv.order());
    (0..n)
        .map(|a| {
            dot_to(
                (0..n).map(|b| (pack.g_inv.get(&[a, b]).clone(), omega[b].clone())),
                n,
                order,
            )
        })
        .collect()
}

/// Lowers a vector: `ω_a = g_ab X^b`.
pub fn flat(pack: &CurvaturePack, x: &[Jet]) -> Vec<Jet> {
    let n = pack.n;
    let order = x.iter().map(Jet::order).min().unwrap_or(0).min(pack.g.order());
    (0..n)
        .map(|a| dot_to((0..n).map(|b| (pack.g.get(&[a, b]).clone(), x[b].clone())), n, order))
        .collect()
}

/// Gradient of a scalar jet as a 1-form.
pub fn differential(f: &Jet) -> Result<Vec<Jet>> {
    (0..f.n_vars()).map(|i| f.partial(i).map_err(Into::into)).collect()
}

/// `T²(X,Y) = T(T(X)^♮, Y)`.
pub fn square(pack: &CurvaturePack, t: &Tensor) -> Tensor {
    let n = pack.n;
    let m = mixed(pack, t);
    let order = m.order().min(t.order());
    Tensor::from_fn(n, 2, |ix| {
        dot_to(
            (0..n).map(|a| (m.get(&[ix[0], a]).clone(), t.get(&[a, ix[1]]).clone())),
            n,
            order,
        )
    })
}
