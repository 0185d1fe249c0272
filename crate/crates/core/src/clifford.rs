//! Explicit complex Clifford representations built from Kronecker products of
//! 2×2 blocks, the spin-invariant hermitian product, and the splitting data
//! relating the representation of signature `(p+1, q+1)` to that of `(p, q)`.
//!
//! Every gamma matrix in this construction has exactly one nonzero entry per
//! row, so they are stored as [`Monomial`] matrices (a permutation plus phases).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::jet::Jet;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Matrix with one nonzero entry per row: `(M v)_r = phase[r] · v[col[r]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub col: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Monomial {
        Monomial {
            col: (0..dim).collect(),
            phase: vec![ONE; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.col.len()
    }

    /// `self · other`.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let col = self.col.iter().map(|&c| other.col[c]).collect();
        let phase = self
            .col
            .iter()
            .zip(&self.phase)
            .map(|(&c, &ph)| ph * other.phase[c])
            .collect();
        Monomial { col, phase }
    }

    pub fn scale(&self, c: Complex64) -> Monomial {
        Monomial {
            col: self.col.clone(),
            phase: self.phase.iter().map(|p| p * c).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Monomial) -> Monomial {
        let (a, b) = (self.dim(), other.dim());
        let mut col = Vec::with_capacity(a * b);
        let mut phase = Vec::with_capacity(a * b);
        for r in 0..a {
            for s in 0..b {
                col.push(self.col[r] * b + other.col[s]);
                phase.push(self.phase[r] * other.phase[s]);
            }
        }
        Monomial { col, phase }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.col.iter().zip(&self.phase).map(|(&c, &p)| p * v[c]).collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for r in 0..d {
            m[(r, self.col[r])] = self.phase[r];
        }
        m
    }
}

fn two_by_two(entries: [[Complex64; 2]; 2]) -> Monomial {
    let mut col = vec![0; 2];
    let mut phase = vec![ZERO; 2];
    for r in 0..2 {
        for c in 0..2 {
            if entries[r][c] != ZERO {
                col[r] = c;
                phase[r] = entries[r][c];
            }
        }
    }
    Monomial { col, phase }
}

/// The four 2×2 building blocks `g₁, g₂, T, E`.
pub fn blocks() -> [Monomial; 4] {
    [
        two_by_two([[I, ZERO], [ZERO, -I]]),
        two_by_two([[ZERO, I], [I, ZERO]]),
        two_by_two([[ZERO, -I], [I, ZERO]]),
        two_by_two([[ONE, ZERO], [ZERO, ONE]]),
    ]
}

/// Clifford representation of signature `(p, q)` on `ℂ^{2^m}`, `m = ⌊n/2⌋`.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub gammas: Vec<Monomial>,
    /// `i^{p(p-1)/2} Φ(e₁)⋯Φ(e_p)`.
    pub b: Monomial,
    pub eps: Vec<f64>,
}

impl CliffordRep {
    pub fn new(p: usize, q: usize) -> Result<CliffordRep> {
        let n = p + q;
        if n == 0 {
            return Err(LabError::Signature("dimension must be at least 1".into()));
        }
        if n % 2 == 1 && q == 0 {
            return Err(LabError::Signature(format!(
                "odd dimension needs a spacelike last direction, got ({p},{q})"
            )));
        }
        let m = n / 2;
        let [g1, g2, t, e] = blocks();
        let mut gammas = Vec::with_capacity(n);
        for j in 1..=2 * m {
            let trailing = (j - 1) / 2;
            let leading = m - 1 - trailing;
            let mut mat = Monomial::identity(1);
            for _ in 0..leading {
                mat = mat.kron(&e);
            }
            mat = mat.kron(if j % 2 == 1 { &g1 } else { &g2 });
            for _ in 0..trailing {
                mat = mat.kron(&t);
            }
            let tau = if j <= p { I } else { ONE };
            gammas.push(mat.scale(tau));
        }
        if n % 2 == 1 {
            let mut mat = Monomial::identity(1);
            for _ in 0..m {
                mat = mat.kron(&t);
            }
            gammas.push(mat.scale(I));
        }
        let dim = 1usize << m;
        let mut b = Monomial::identity(dim);
        for g in &gammas[..p] {
            b = b.mul(g);
        }
        let b = b.scale(I.powu((p * p.saturating_sub(1) / 2) as u32));
        let eps = (0..n).map(|i| if i < p { -1.0 } else { 1.0 }).collect();
        Ok(CliffordRep {
            p,
            q,
            n,
            m,
            gammas,
            b,
            eps,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    /// `i^p`.
    pub fn i_pow_p(&self) -> Complex64 {
        I.powu(self.p as u32)
    }

    /// `(−1)^p`.
    pub fn sign_p(&self) -> f64 {
        if self.p.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `(v, w)_Δ = (b v, w)`, linear in `v`, antilinear in `w`.
    pub fn spinor_product(&self, v: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        if v.len() != self.dim() || w.len() != self.dim() {
            return Err(LabError::Shape(format!(
                "spinor length {} / {} vs representation dimension {}",
                v.len(),
                w.len(),
                self.dim()
            )));
        }
        let bv = self.b.apply(v);
        Ok(bv.iter().zip(w).map(|(a, c)| a * c.conj()).sum())
    }

    /// Jet-valued hermitian product of spinor fields.
    pub fn spinor_product_jets(&self, v: &[Jet], w: &[Jet]) -> Jet {
        let mut acc = v[0].zero_like();
        for r in 0..self.dim() {
            let c = self.b.col[r];
            let term = v[c].mul_min(&w[r].conj());
            acc.axpy_min(self.b.phase[r], &term);
        }
        acc
    }

    /// Product of gammas `Φ(e_{i₁})⋯Φ(e_{i_k})`.
    pub fn product(&self, idx: &[usize]) -> Monomial {
        let mut m = Monomial::identity(self.dim());
        for &i in idx {
            m = m.mul(&self.gammas[i]);
        }
        m
    }

    /// Volume element `Φ(e₁)⋯Φ(e_n)`.
    pub fn volume(&self) -> Monomial {
        self.product(&(0..self.n).collect::<Vec<_>>())
    }

    /// Clifford action of a `k`-form with frame components `w[i₁…i_k]` (flattened, all index tuples):
    /// `Σ_{i₁<…<i_k} ε_{i₁}⋯ε_{i_k} w(s_{i₁},…,s_{i_k}) s_{i₁}⋯s_{i_k}`.
    pub fn form_matrix(&self, k: usize, w: &[Jet]) -> Result<JetMatrix> {
        let n = self.n;
        if w.len() != n.pow(k as u32) {
            return Err(LabError::Shape(format!(
                "{k}-form needs {} components, got {}",
                n.pow(k as u32),
                w.len()
            )));
        }
        if (2..=3).contains(&k) {
            check_antisymmetric(n, k, w)?;
        }
        let mut out = JetMatrix::zero(self.dim());
        let mut idx = vec![0usize; k];
        for_each_increasing(n, k, &mut idx, 0, 0, &mut |ix| {
            let flat = ix.iter().fold(0, |acc, &i| acc * n + i);
            let sign: f64 = ix.iter().map(|&i| self.eps[i]).product();
            out.add_monomial(&w[flat].scale(sign), &self.product(ix));
        });
        Ok(out)
    }

    /// Clifford multiplication by a vector with frame components `v^i`: `Σ v^i Φ(e_i)`.
    pub fn vector_matrix(&self, v: &[Jet]) -> JetMatrix {
        let mut out = JetMatrix::zero(self.dim());
        for (i, vi) in v.iter().enumerate() {
            out.add_monomial(vi, &self.gammas[i]);
        }
        out
    }
}

fn for_each_increasing(
    n: usize,
    k: usize,
    idx: &mut Vec<usize>,
    pos: usize,
    start: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    if pos == k {
        f(idx);
        return;
    }
    for i in start..n {
        idx[pos] = i;
        for_each_increasing(n, k, idx, pos + 1, i + 1, f);
    }
}

fn check_antisymmetric(n: usize, k: usize, w: &[Jet]) -> Result<()> {
    // floor at 1 so that forms which vanish up to rounding (Weyl in n = 3) pass
    let scale = w.iter().map(Jet::max_abs).fold(0.0, f64::max).max(1.0);
    let total = n.pow(k as u32);
    for flat in 0..total {
        let mut ix = vec![0; k];
        let mut c = flat;
        for slot in (0..k).rev() {
            ix[slot] = c % n;
            c /= n;
        }
        for a in 0..k - 1 {
            let mut sw = ix.clone();
            sw.swap(a, a + 1);
            let other = sw.iter().fold(0, |acc, &i| acc * n + i);
            let sum = w[flat].add_min(&w[other]);
            if sum.max_abs() > 1e-10 * scale {
                return Err(LabError::Shape(format!(
                    "form components are not antisymmetric at {ix:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Square matrix with (optional) jet entries, acting on spinor component vectors.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    pub dim: usize,
    pub entries: Vec<Option<Jet>>,
}

impl JetMatrix {
    pub fn zero(dim: usize) -> JetMatrix {
        JetMatrix {
            dim,
            entries: vec![None; dim * dim],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&Jet> {
        self.entries[r * self.dim + c].as_ref()
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: &Jet) {
        let slot = &mut self.entries[r * self.dim + c];
        match slot {
            Some(x) => *x = x.add_min(v),
            None => *slot = Some(v.clone()),
        }
    }

    /// `self += c · M` for a monomial matrix `M`.
    pub fn add_monomial(&mut self, c: &Jet, m: &Monomial) {
        for r in 0..self.dim {
            self.add_entry(r, m.col[r], &c.scale(m.phase[r]));
        }
    }

    pub fn add(&self, other: &JetMatrix) -> JetMatrix {
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                if let Some(v) = other.get(r, c) {
                    out.add_entry(r, c, v);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> JetMatrix {
        let c = c.into();
        JetMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.as_ref().map(|j| j.scale(c))).collect(),
        }
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        let d = self.dim;
        let mut out = JetMatrix::zero(d);
        for r in 0..d {
            for k in 0..d {
                let Some(a) = self.get(r, k) else { continue };
                for c in 0..d {
                    if let Some(b) = other.get(k, c) {
                        out.add_entry(r, c, &a.mul_min(b));
                    }
                }
            }
        }
        out
    }

    /// `M ψ`, truncated to the lowest participating order.
    pub fn apply(&self, psi: &[Jet]) -> Vec<Jet> {
        let d = self.dim;
        (0..d)
            .map(|r| {
                let mut acc: Option<Jet> = None;
                for c in 0..d {
                    if let Some(a) = self.get(r, c) {
                        let t = a.mul_min(&psi[c]);
                        acc = Some(match acc {
                            Some(x) => x.add_min(&t),
                            None => t,
                        });
                    }
                }
                acc.unwrap_or_else(|| psi[r].zero_like())
            })
            .collect()
    }

    /// Constant terms as a dense complex matrix.
    pub fn value(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            self.get(r, c).map(Jet::value).unwrap_or(ZERO)
        })
    }
}

/// The representation of signature `(p+1, q+1)` together with the null vectors
/// `f_± = (e_{n+1} ∓ e₀)/√2` and the identification of `ker f₊` with `Δ_{p,q}`.
///
/// Basis order of the big representation: index 0 is `e₀`, indices `1..=n`
/// are `e₁…e_n`, index `n+1` is `e_{n+1}`.
#[derive(Debug, Clone)]
pub struct TractorCliffordRep {
    pub base: CliffordRep,
    pub inner: CliffordRep,
    /// Dense matrices of `e₀, e₁, …, e_{n+1}` in the big representation.
    pub gamma: Vec<DMatrix<Complex64>>,
    pub f_plus: DMatrix<Complex64>,
    pub f_minus: DMatrix<Complex64>,
    /// Isometric intertwiner `Δ_{p,q} → W⁺ = ker f₊`.
    pub embed: DMatrix<Complex64>,
    /// Inverse of `(w₁, w₂) ↦ embed·w₁ + f₋·embed·w₂`.
    pub split: DMatrix<Complex64>,
    /// Whether `e₀` had to be represented by the negated matrix so that `W⁺` carries `Φ⁰`.
    pub e0_negated: bool,
}

impl TractorCliffordRep {
    pub fn new(p: usize, q: usize) -> Result<TractorCliffordRep> {
        let base = CliffordRep::new(p, q)?;
        let inner = CliffordRep::new(p + 1, q + 1)?;
        let n = p + q;
        for negate in [false, true] {
            let mut gamma: Vec<DMatrix<Complex64>> = inner.gammas.iter().map(Monomial::to_dense).collect();
            // the big basis puts e₀ first among the timelike directions; e₁…e_p follow
            let e0 = gamma.remove(0);
            let e0 = if negate { -e0 } else { e0 };
            let mut ordered = vec![e0];
            ordered.extend(gamma.drain(..n));
            ordered.push(gamma.remove(0));
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let f_plus = (&ordered[n + 1] - &ordered[0]) * Complex64::new(s, 0.0);
            let f_minus = (&ordered[n + 1] + &ordered[0]) * Complex64::new(s, 0.0);
            let kernel = kernel_basis(&f_plus);
            if kernel.ncols() != base.dim() {
                return Err(LabError::Signature(format!(
                    "ker f₊ has dimension {} instead of {}",
                    kernel.ncols(),
                    base.dim()
                )));
            }
            let kinv = kernel.adjoint();
            let restricted: Vec<DMatrix<Complex64>> = (1..=n).map(|j| &kinv * &ordered[j] * &kernel).collect();
            let base_dense: Vec<DMatrix<Complex64>> = base.gammas.iter().map(Monomial::to_dense).collect();
            let Some(s_mat) = intertwiner(&restricted, &base_dense) else {
                continue;
            };
            let embed = &kernel * s_mat;
            let mut joined = DMatrix::from_element(2 * base.dim(), 2 * base.dim(), ZERO);
            joined.view_mut((0, 0), (2 * base.dim(), base.dim())).copy_from(&embed);
            let lower = &f_minus * &embed;
            joined
                .view_mut((0, base.dim()), (2 * base.dim(), base.dim()))
                .copy_from(&lower);
            let split = joined
                .try_inverse()
                .ok_or_else(|| LabError::Signature("w₁ + f₋·w₂ splitting is singular".into()))?;
            return Ok(TractorCliffordRep {
                base,
                inner,
                gamma: ordered,
                f_plus,
                f_minus,
                embed,
                split,
                e0_negated: negate,
            });
        }
        Err(LabError::Signature(format!(
            "no intertwiner between ker f₊ and Δ_({p},{q})"
        )))
    }

    /// `(w₁, w₂) ↦ w₁ + f₋·w₂` in the big representation.
    pub fn join(&self, w1: &[Complex64], w2: &[Complex64]) -> Vec<Complex64> {
        let a = &self.embed * nalgebra::DVector::from_column_slice(w1);
        let b = &self.f_minus * (&self.embed * nalgebra::DVector::from_column_slice(w2));
        (a + b).iter().copied().collect()
    }

    pub fn split_vector(&self, v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let d = self.base.dim();
        let w = &self.split * nalgebra::DVector::from_column_slice(v);
        (
            w.rows(0, d).iter().copied().collect(),
            w.rows(d, d).iter().copied().collect(),
        )
    }
}

/// Orthonormal basis of the kernel, from reduced row echelon form with
/// deterministic (first maximal) column pivots.
fn kernel_basis(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[(i, c)].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val < 1e-12 {
            continue;
        }
        a.swap_rows(r, best);
        let piv = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != ZERO {
                    for j in 0..cols {
                        let sub = f * a[(r, j)];
                        a[(i, j)] -= sub;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = DMatrix::from_element(cols, free.len(), ZERO);
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = ONE;
        for (row, &pc) in pivots.iter().enumerate() {
            basis[(pc, k)] = -a[(row, f)];
        }
    }
    // modified Gram–Schmidt
    for k in 0..basis.ncols() {
        for j in 0..k {
            let proj = basis.column(j).dotc(&basis.column(k));
            let cj = basis.column(j).clone_owned();
            let mut ck = basis.column_mut(k);
            ck -= cj * proj;
        }
        let norm = basis.column(k).norm();
        let mut ck = basis.column_mut(k);
        ck /= Complex64::new(norm, 0.0);
    }
    basis
}

/// Unitary `S` with `A_j S = S B_j` for all `j`, by averaging over products of generators.
fn intertwiner(a: &[DMatrix<Complex64>], b: &[DMatrix<Complex64>]) -> Option<DMatrix<Complex64>> {
    let d = b[0].nrows();
    let k = a.len();
    // try a few fixed seeds matrices so that the average is not accidentally zero
    for seed in 0..d * d {
        let mut x = DMatrix::from_element(d, d, ZERO);
        x[(seed / d, seed % d)] = ONE;
        let mut s = DMatrix::from_element(d, d, ZERO);
        for mask in 0..(1usize << k) {
            let mut pa = DMatrix::<Complex64>::identity(d, d);
            let mut pb = DMatrix::<Complex64>::identity(d, d);
            for j in 0..k {
                if mask & (1 << j) != 0 {
                    pa *= &a[j];
                    pb *= &b[j];
                }
            }
            let pb_inv = pb.try_inverse()?;
            s += pa * &x * pb_inv;
        }
        let gram = s.adjoint() * &s;
        let c = gram[(0, 0)].re;
        if c < 1e-8 {
            continue;
        }
        let s = s / Complex64::new(c.sqrt(), 0.0);
        let ok = a.iter().zip(b).all(|(aj, bj)| (aj * &s - &s * bj).norm() < 1e-9);
        if ok {
            return Some(s);
        }
        return None;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_eq(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn riemannian_plane_uses_g1_g2() {
        let rep = CliffordRep::new(0, 2).unwrap();
        let [g1, g2, _, _] = blocks();
        assert_eq!(rep.gammas[0], g1);
        assert_eq!(rep.gammas[1], g2);
        let minus_id = -DMatrix::<Complex64>::identity(2, 2);
        assert!(dense_eq(&rep.gammas[0].mul(&rep.gammas[0]).to_dense(), &minus_id));
    }

    #[test]
    fn lorentzian_plane_first_gamma_squares_to_plus_one() {
        let rep = CliffordRep::new(1, 1).unwrap();
        let [g1, _, _, _] = blocks();
        assert_eq!(rep.gammas[0], g1.scale(I));
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!(dense_eq(&rep.gammas[0].mul(&rep.gammas[0]).to_dense(), &id));
    }

    #[test]
    fn odd_dimension_without_spacelike_direction_is_rejected() {
        assert!(CliffordRep::new(3, 0).is_err());
    }

    #[test]
    fn b_is_identity_for_riemannian() {
        let rep = CliffordRep::new(0, 4).unwrap();
        assert_eq!(rep.b, Monomial::identity(4));
    }
}
