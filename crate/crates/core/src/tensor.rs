//! Dense coordinate-component tensors with jet entries, and the index gymnastics
//! (raising, lowering, covariant derivatives, traces) that act on them.

use crate::error::{LabError, Result};
use crate::jet::Jet;

/// Coordinate components `T_{i₁…i_k}` (or any mix of upper/lower slots; the
/// variance is tracked by the caller), stored row-major.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub n: usize,
    pub rank: usize,
    pub data: Vec<Jet>,
}

/// Slot variance for covariant differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

impl Tensor {
    pub fn zeros(n: usize, rank: usize, n_vars: usize, order: usize) -> Tensor {
        Tensor {
            n,
            rank,
            data: vec![Jet::zero(n_vars, order); n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Tensor {
        let total = n.pow(rank as u32);
        let mut data = Vec::with_capacity(total);
        let mut idx = vec![0usize; rank];
        for flat in 0..total {
            unflatten(n, flat, &mut idx);
            data.push(f(&idx));
        }
        Tensor { n, rank, data }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Jet) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    /// Lowest order among the components.
    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|j| j.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        Ok(Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add_min(b)).collect(),
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        Ok(Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub_min(b)).collect(),
        })
    }

    fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.n != other.n || self.rank != other.rank {
            return Err(LabError::Shape(format!(
                "tensor (n={}, rank={}) vs (n={}, rank={})",
                self.n, self.rank, other.n, other.rank
            )));
        }
        Ok(())
    }

    /// Largest component of `self − other` relative to the larger of the two tensors.
    pub fn relative_distance(&self, other: &Tensor) -> f64 {
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub_min(b).max_abs())
            .fold(0.0, f64::max);
        diff / self.max_abs().max(other.max_abs()).max(1e-30)
    }

    /// Swaps two slots.
    pub fn transpose(&self, a: usize, b: usize) -> Tensor {
        Tensor::from_fn(self.n, self.rank, |idx| {
            let mut j = idx.to_vec();
            j.swap(a, b);
            self.get(&j).clone()
        })
    }
}

pub fn unflatten(n: usize, mut flat: usize, idx: &mut [usize]) {
    for slot in (0..idx.len()).rev() {
        idx[slot] = flat % n;
        flat /= n;
    }
}

/// Sum of products of jets truncated at `order`.
pub fn dot_to(pairs: impl IntoIterator<Item = (Jet, Jet)>, n_vars: usize, order: usize) -> Jet {
    let mut acc = Jet::zero(n_vars, order);
    for (a, b) in pairs {
        acc.fma_assign(&a, &b).expect("dot_to operands below target order");
    }
    acc
}

/// Inverse of an `n × n` matrix of jets (row-major), by Gauss–Jordan with
/// pivoting on the constant terms.
pub fn invert(n: usize, m: &[Jet]) -> Result<Vec<Jet>> {
    let order = m.iter().map(Jet::order).min().unwrap_or(0);
    let n_vars = m[0].n_vars();
    let mut a: Vec<Jet> = m.iter().map(|j| j.truncate(order).unwrap()).collect();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(n_vars, order, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].value().norm().total_cmp(&a[y * n + col].value().norm()))
            .unwrap();
        if a[piv * n + col].value().norm() < 1e-13 {
            return Err(LabError::DegenerateMetric("singular matrix at base point".into()));
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let r = a[col * n + col].recip()?;
        for j in 0..n {
            a[col * n + j] = &a[col * n + j] * &r;
            inv[col * n + j] = &inv[col * n + j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i * n + col].clone();
            for j in 0..n {
                let t = &f * &a[col * n + j];
                a[i * n + j] = &a[i * n + j] - &t;
                let t = &f * &inv[col * n + j];
                inv[i * n + j] = &inv[i * n + j] - &t;
            }
        }
    }
    Ok(inv)
}
