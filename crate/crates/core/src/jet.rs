//! Truncated multivariate Taylor arithmetic ("jets") with complex coefficients.
//!
//! A [`Jet`] of order `K` in `n` variables carries every partial derivative of
//! an analytic function up to total degree `K` at a fixed base point.
//!
//! # Conventions
//!
//! * Public coefficient accessors ([`Jet::derivative`], [`Jet::derivatives`],
//!   [`Jet::from_derivatives`]) use the *derivative convention*: the value
//!   stored for the multi-index `α` is `∂^α f` at the base point, i.e. the
//!   coefficient of `x^α / α!`.
//! * Internally coefficients are kept divided by `α!`, which turns
//!   multiplication into a plain truncated convolution.
//! * Multi-indices are enumerated in graded-lexicographic order: by total
//!   degree first, then lexicographically *descending* in the exponent tuple
//!   (so `x₁` precedes `x₂`, and `x₁²` precedes `x₁x₂`). The enumeration for
//!   order `K` is a prefix of the enumeration for any order `K' > K`; this
//!   order is part of the public contract (see [`multi_indices`]).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet shape mismatch: ({lhs_vars} vars, order {lhs_order}) vs ({rhs_vars} vars, order {rhs_order})")]
    ShapeMismatch {
        lhs_vars: usize,
        lhs_order: usize,
        rhs_vars: usize,
        rhs_order: usize,
    },
    #[error("jet order exhausted: an order-0 jet cannot be differentiated")]
    OrderExhausted,
    #[error("requested order {requested} exceeds available order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error("variable index {index} out of range for {n_vars} variables")]
    BadVariable { index: usize, n_vars: usize },
    #[error("{function} is not analytic at constant term {value}")]
    Domain { function: &'static str, value: Complex64 },
}

/// Enumeration tables shared by every jet with the same number of variables.
struct Shape {
    n_vars: usize,
    max_order: usize,
    /// Flattened exponents, `n_vars` entries per multi-index.
    exps: Vec<u8>,
    /// `count_upto[d]` = number of multi-indices with degree `< d`.
    count_upto: Vec<usize>,
    /// For output index `k`, the convolution pairs live in `pairs[pair_start[k]..pair_start[k+1]]`.
    pair_start: Vec<u32>,
    pairs: Vec<(u32, u32)>,
    /// `raise[v][idx]` = index of `α + e_v`, for every `idx` with degree `< max_order`.
    raise: Vec<Vec<u32>>,
    /// `α!` per index.
    factorial: Vec<f64>,
}

impl Shape {
    fn count(&self, order: usize) -> usize {
        self.count_upto[order + 1]
    }

    fn exponent(&self, idx: usize) -> &[u8] {
        &self.exps[idx * self.n_vars..(idx + 1) * self.n_vars]
    }

    fn build(n_vars: usize, max_order: usize) -> Shape {
        let mut exps = Vec::new();
        let mut count_upto = vec![0usize];
        let mut current = vec![0u8; n_vars];
        for d in 0..=max_order {
            push_degree(&mut exps, &mut current, 0, d);
            count_upto.push(exps.len() / n_vars.max(1));
        }
        let total = *count_upto.last().unwrap();
        let mut lookup: HashMap<Vec<u8>, u32> = HashMap::with_capacity(total);
        for idx in 0..total {
            lookup.insert(exps[idx * n_vars..(idx + 1) * n_vars].to_vec(), idx as u32);
        }

        let mut pair_start = Vec::with_capacity(total + 1);
        let mut pairs = Vec::new();
        let mut sub = vec![0u8; n_vars];
        let mut rest = vec![0u8; n_vars];
        for k in 0..total {
            pair_start.push(pairs.len() as u32);
            let alpha = &exps[k * n_vars..(k + 1) * n_vars];
            // enumerate every β ≤ α componentwise
            sub.iter_mut().for_each(|s| *s = 0);
            loop {
                for v in 0..n_vars {
                    rest[v] = alpha[v] - sub[v];
                }
                let i = lookup[&sub];
                let j = lookup[&rest];
                pairs.push((i, j));
                // odometer increment
                let mut v = 0;
                while v < n_vars {
                    if sub[v] < alpha[v] {
                        sub[v] += 1;
                        break;
                    }
                    sub[v] = 0;
                    v += 1;
                }
                if v == n_vars {
                    break;
                }
            }
        }
        pair_start.push(pairs.len() as u32);

        let below = if max_order == 0 { 0 } else { count_upto[max_order] };
        let mut raise = Vec::with_capacity(n_vars);
        for v in 0..n_vars {
            let mut table = Vec::with_capacity(below);
            for idx in 0..below {
                let mut e = exps[idx * n_vars..(idx + 1) * n_vars].to_vec();
                e[v] += 1;
                table.push(lookup[&e]);
            }
            raise.push(table);
        }

        let factorial = (0..total)
            .map(|idx| {
                exps[idx * n_vars..(idx + 1) * n_vars]
                    .iter()
                    .map(|&a| (1..=a as u32).map(f64::from).product::<f64>())
                    .product()
            })
            .collect();

        Shape {
            n_vars,
            max_order,
            exps,
            count_upto,
            pair_start,
            pairs,
            raise,
            factorial,
        }
    }
}

fn push_degree(out: &mut Vec<u8>, current: &mut [u8], var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    if current.is_empty() {
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_degree(out, current, var + 1, remaining - e);
    }
    current[var] = 0;
}

fn shape_for(n_vars: usize, order: usize) -> Arc<Shape> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Shape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet shape cache poisoned");
    if let Some(s) = guard.get(&n_vars) {
        if s.max_order >= order {
            return s.clone();
        }
    }
    let built = Arc::new(Shape::build(n_vars, order));
    guard.insert(n_vars, built.clone());
    built
}

/// Multi-indices with total degree `≤ order` in the contractual enumeration order.
pub fn multi_indices(n_vars: usize, order: usize) -> Vec<Vec<u8>> {
    let shape = shape_for(n_vars, order);
    (0..shape.count(order)).map(|i| shape.exponent(i).to_vec()).collect()
}

/// Number of coefficients of a jet in `n_vars` variables truncated at `order`.
pub fn coefficient_count(n_vars: usize, order: usize) -> usize {
    // C(n + K, n)
    let mut c: u128 = 1;
    for i in 0..n_vars as u128 {
        c = c * (order as u128 + i + 1) / (i + 1);
    }
    c as usize
}

/// Univariate analytic functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analytic {
    Reciprocal,
    Sqrt,
    Exp,
    Log,
    Pow(f64),
    Sin,
    Cos,
}

impl Analytic {
    fn name(self) -> &'static str {
        match self {
            Analytic::Reciprocal => "reciprocal",
            Analytic::Sqrt => "sqrt",
            Analytic::Exp => "exp",
            Analytic::Log => "log",
            Analytic::Pow(_) => "pow",
            Analytic::Sin => "sin",
            Analytic::Cos => "cos",
        }
    }

    /// `f^{(k)}(a) / k!` for `k = 0..=order`.
    fn taylor_coefficients(self, a: Complex64, order: usize) -> Result<Vec<Complex64>, JetError> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(JetError::Domain {
                    function: self.name(),
                    value: a,
                })
            }
        };
        let real_positive = a.re > 0.0 && a.im.abs() <= 1e-12 * a.re.max(1.0);
        let mut out = Vec::with_capacity(order + 1);
        match self {
            Analytic::Reciprocal => {
                domain(a != ZERO)?;
                let inv = ONE / a;
                let mut term = inv;
                for k in 0..=order {
                    out.push(if k % 2 == 0 { term } else { -term });
                    term *= inv;
                }
            }
            Analytic::Exp => {
                let e = a.exp();
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(e / fact);
                }
            }
            Analytic::Log => {
                domain(a != ZERO)?;
                out.push(a.ln());
                let inv = ONE / a;
                let mut p = ONE;
                for k in 1..=order {
                    p *= inv;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(p * (sign / k as f64));
                }
            }
            Analytic::Sqrt | Analytic::Pow(_) => {
                domain(real_positive)?;
                let r = if let Analytic::Pow(r) = self { r } else { 0.5 };
                let a = a.re;
                let mut binom = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        binom *= (r - (k as f64 - 1.0)) / k as f64;
                    }
                    out.push(Complex64::new(binom * a.powf(r - k as f64), 0.0));
                }
            }
            Analytic::Sin | Analytic::Cos => {
                let (s, c) = (a.sin(), a.cos());
                // derivatives of sin cycle through sin, cos, -sin, -cos
                let cycle = if self == Analytic::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(cycle[k % 4] / fact);
                }
            }
        }
        Ok(out)
    }
}

/// Truncated Taylor expansion of a complex analytic function of `n_vars` real variables.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<Shape>,
    order: usize,
    /// Taylor-normalized coefficients (`∂^α f / α!`), enumeration order.
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.shape.n_vars)
            .field("order", &self.order)
            .field("derivatives", &self.derivatives())
            .finish()
    }
}

impl Jet {
    pub fn zero(n_vars: usize, order: usize) -> Jet {
        let shape = shape_for(n_vars, order);
        let len = shape.count(order);
        Jet {
            shape,
            order,
            coeffs: vec![ZERO; len],
        }
    }

    pub fn constant(n_vars: usize, order: usize, value: impl Into<Complex64>) -> Jet {
        let mut j = Jet::zero(n_vars, order);
        j.coeffs[0] = value.into();
        j
    }

    /// The coordinate function `x_var`, expanded at a base point whose `var`-th coordinate is `at`.
    pub fn variable(n_vars: usize, order: usize, var: usize, at: f64) -> Result<Jet, JetError> {
        if var >= n_vars {
            return Err(JetError::BadVariable { index: var, n_vars });
        }
        let mut j = Jet::constant(n_vars, order, at);
        if order >= 1 {
            // degree-1 indices follow the constant, x₁ first
            j.coeffs[1 + var] = ONE;
        }
        Ok(j)
    }

    /// Builds a jet from a function returning `∂^α f` for each multi-index.
    pub fn from_derivatives(n_vars: usize, order: usize, mut derivative: impl FnMut(&[u8]) -> Complex64) -> Jet {
        let mut j = Jet::zero(n_vars, order);
        for idx in 0..j.coeffs.len() {
            j.coeffs[idx] = derivative(j.shape.exponent(idx)) / j.shape.factorial[idx];
        }
        j
    }

    /// Builds a jet from Taylor-normalized coefficients (`∂^α f / α!`) in enumeration order.
    pub fn from_taylor_coefficients(n_vars: usize, order: usize, coeffs: Vec<Complex64>) -> Result<Jet, JetError> {
        let shape = shape_for(n_vars, order);
        let expected = shape.count(order);
        if coeffs.len() != expected {
            return Err(JetError::ShapeMismatch {
                lhs_vars: n_vars,
                lhs_order: order,
                rhs_vars: n_vars,
                rhs_order: coeffs.len(),
            });
        }
        Ok(Jet { shape, order, coeffs })
    }

    pub fn n_vars(&self) -> usize {
        self.shape.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value at the base point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `∂^α f` at the base point; zero when `|α|` exceeds the order.
    pub fn derivative(&self, alpha: &[u8]) -> Complex64 {
        assert_eq!(alpha.len(), self.n_vars(), "multi-index length");
        let degree: usize = alpha.iter().map(|&a| a as usize).sum();
        if degree > self.order {
            return ZERO;
        }
        // linear scan within the degree block is fine for accessor use
        let start = self.shape.count_upto[degree];
        let end = self.shape.count_upto[degree + 1];
        (start..end)
            .find(|&i| self.shape.exponent(i) == alpha)
            .map(|i| self.coeffs[i] * self.shape.factorial[i])
            .unwrap_or(ZERO)
    }

    /// All derivatives in enumeration order (derivative convention).
    pub fn derivatives(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .zip(&self.shape.factorial)
            .map(|(c, f)| c * f)
            .collect()
    }

    pub fn taylor_coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Largest modulus among the derivative-convention coefficients.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.shape.factorial)
            .map(|(c, f)| c.norm() * f)
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &Jet) -> Result<(), JetError> {
        if self.n_vars() != other.n_vars() || self.order != other.order {
            return Err(self.mismatch(other));
        }
        Ok(())
    }

    fn mismatch(&self, other: &Jet) -> JetError {
        JetError::ShapeMismatch {
            lhs_vars: self.n_vars(),
            lhs_order: self.order,
            rhs_vars: other.n_vars(),
            rhs_order: other.order,
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(self.with_coeffs(self.order, coeffs))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(self.with_coeffs(self.order, coeffs))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.same_shape(other)?;
        self.mul_to(other, self.order)
    }

    /// Product truncated at an explicit `order`, which may not exceed either operand's order.
    pub fn mul_to(&self, other: &Jet, order: usize) -> Result<Jet, JetError> {
        if self.n_vars() != other.n_vars() {
            return Err(self.mismatch(other));
        }
        let available = self.order.min(other.order);
        if order > available {
            return Err(JetError::OrderTooHigh {
                requested: order,
                available,
            });
        }
        let shape = if self.shape.max_order >= other.shape.max_order {
            &self.shape
        } else {
            &other.shape
        };
        let len = shape.count(order);
        for (a, b) in [(self, other), (other, self)] {
            if a.coeffs[1..len].iter().all(|c| *c == ZERO) {
                let c = a.coeffs[0];
                return Ok(Jet {
                    shape: shape.clone(),
                    order,
                    coeffs: b.coeffs[..len].iter().map(|v| v * c).collect(),
                });
            }
        }
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let (s, e) = (shape.pair_start[k] as usize, shape.pair_start[k + 1] as usize);
            let mut acc = ZERO;
            for &(i, j) in &shape.pairs[s..e] {
                acc += self.coeffs[i as usize] * other.coeffs[j as usize];
            }
            out.push(acc);
        }
        Ok(Jet {
            shape: shape.clone(),
            order,
            coeffs: out,
        })
    }

    /// `self += a * b`, truncated at `self`'s order.
    pub fn fma_assign(&mut self, a: &Jet, b: &Jet) -> Result<(), JetError> {
        if a.n_vars() != self.n_vars() || b.n_vars() != self.n_vars() {
            return Err(self.mismatch(if a.n_vars() != self.n_vars() { a } else { b }));
        }
        let available = a.order.min(b.order);
        if self.order > available {
            return Err(JetError::OrderTooHigh {
                requested: self.order,
                available,
            });
        }
        let len = self.coeffs.len();
        for (x, y) in [(a, b), (b, a)] {
            if x.coeffs[1..len].iter().all(|c| *c == ZERO) {
                let c = x.coeffs[0];
                if c != ZERO {
                    for (s, v) in self.coeffs.iter_mut().zip(&y.coeffs[..len]) {
                        *s += v * c;
                    }
                }
                return Ok(());
            }
        }
        let shape = if a.shape.max_order >= self.order {
            &a.shape
        } else {
            &b.shape
        };
        for k in 0..self.coeffs.len() {
            let (s, e) = (shape.pair_start[k] as usize, shape.pair_start[k + 1] as usize);
            let mut acc = ZERO;
            for &(i, j) in &shape.pairs[s..e] {
                acc += a.coeffs[i as usize] * b.coeffs[j as usize];
            }
            self.coeffs[k] += acc;
        }
        Ok(())
    }

    /// `self += c * x`, reading `x` up to `self`'s order.
    pub fn axpy(&mut self, c: Complex64, x: &Jet) -> Result<(), JetError> {
        if x.n_vars() != self.n_vars() {
            return Err(self.mismatch(x));
        }
        if x.order < self.order {
            return Err(JetError::OrderTooHigh {
                requested: self.order,
                available: x.order,
            });
        }
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += c * v;
        }
        Ok(())
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Jet {
        let c = c.into();
        self.with_coeffs(self.order, self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn add_constant(&self, c: impl Into<Complex64>) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c.into();
        out
    }

    pub fn conj(&self) -> Jet {
        self.with_coeffs(self.order, self.coeffs.iter().map(|v| v.conj()).collect())
    }

    /// Drops every coefficient of degree above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        if order > self.order {
            return Err(JetError::OrderTooHigh {
                requested: order,
                available: self.order,
            });
        }
        let len = self.shape.count(order);
        Ok(self.with_coeffs(order, self.coeffs[..len].to_vec()))
    }

    /// `∂f/∂x_var`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.n_vars() {
            return Err(JetError::BadVariable {
                index: var,
                n_vars: self.n_vars(),
            });
        }
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let order = self.order - 1;
        let len = self.shape.count(order);
        let raise = &self.shape.raise[var];
        let coeffs = (0..len)
            .map(|idx| {
                let factor = self.shape.exponent(idx)[var] as f64 + 1.0;
                self.coeffs[raise[idx] as usize] * factor
            })
            .collect();
        Ok(self.with_coeffs(order, coeffs))
    }

    /// Composition `f ∘ self` with a univariate analytic function.
    pub fn apply(&self, f: Analytic) -> Result<Jet, JetError> {
        let a0 = self.coeffs[0];
        let taylor = f.taylor_coefficients(a0, self.order)?;
        let mut h = self.clone();
        h.coeffs[0] = ZERO;
        // Horner in the nilpotent part h: Σ t_k h^k, terms beyond the order vanish
        let mut acc = Jet::constant(self.n_vars(), self.order, taylor[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul_to(&h, self.order)?;
            acc.coeffs[0] += taylor[k];
        }
        Ok(acc)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Reciprocal)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Sqrt)
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Exp)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Log)
    }

    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        self.apply(Analytic::Pow(r))
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Sin)
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        self.apply(Analytic::Cos)
    }

    /// Substitutes `x = M y` (linear change of variables, `M` given row-major as `n × n`).
    pub fn linear_substitution(&self, m: &[f64]) -> Result<Jet, JetError> {
        let n = self.n_vars();
        assert_eq!(m.len(), n * n, "substitution matrix must be n × n");
        let lin: Vec<Jet> = (0..n)
            .map(|row| {
                let mut j = Jet::zero(n, self.order);
                if self.order >= 1 {
                    for col in 0..n {
                        j.coeffs[1 + col] = Complex64::new(m[row * n + col], 0.0);
                    }
                }
                j
            })
            .collect();
        // powers of each linear form, then monomials
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for l in &lin {
            let mut ps = vec![Jet::constant(n, self.order, 1.0)];
            for d in 1..=self.order {
                let next = ps[d - 1].mul_to(l, self.order)?;
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = Jet::zero(n, self.order);
        for idx in 0..self.coeffs.len() {
            let c = self.coeffs[idx];
            if c == ZERO {
                continue;
            }
            let alpha = self.shape.exponent(idx);
            let mut mono = Jet::constant(n, self.order, 1.0);
            for (v, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    mono = mono.mul_to(&powers[v][a as usize], self.order)?;
                }
            }
            out.axpy(c, &mono)?;
        }
        Ok(out)
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul_min(&self, other: &Jet) -> Jet {
        self.mul_to(other, self.order.min(other.order))
            .unwrap_or_else(|e| panic!("{e}"))
    }

    /// Sum truncated at the smaller of the two orders.
    pub fn add_min(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let len = self.shape.count(order);
        assert_eq!(self.n_vars(), other.n_vars(), "jet variable count mismatch");
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&other.coeffs[..len])
            .map(|(a, b)| a + b)
            .collect();
        self.with_coeffs(order, coeffs)
    }

    /// Difference truncated at the smaller of the two orders.
    pub fn sub_min(&self, other: &Jet) -> Jet {
        self.add_min(&other.scale(-1.0))
    }

    /// `self += c * x`, first truncating `self` to the order of `x` if that is lower.
    pub fn axpy_min(&mut self, c: impl Into<Complex64>, x: &Jet) {
        let c = c.into();
        if x.order < self.order {
            let len = self.shape.count(x.order);
            self.coeffs.truncate(len);
            self.order = x.order;
        }
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += c * v;
        }
    }

    /// Zero jet with the same shape.
    pub fn zero_like(&self) -> Jet {
        self.with_coeffs(self.order, vec![ZERO; self.coeffs.len()])
    }

    fn with_coeffs(&self, order: usize, coeffs: Vec<Complex64>) -> Jet {
        Jet {
            shape: self.shape.clone(),
            order,
            coeffs,
        }
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.n_vars() == other.n_vars() && self.order == other.order && self.coeffs == other.coeffs
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            /// Panics on shape mismatch; use the `try_*` form to handle it.
            fn $method(self, rhs: &Jet) -> Jet {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, try_add);
binary_op!(Sub, sub, try_sub);
binary_op!(Mul, mul, try_mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Smallest order among a collection of jets.
pub fn min_order<'a>(jets: impl IntoIterator<Item = &'a Jet>) -> Option<usize> {
    jets.into_iter().map(Jet::order).min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn enumeration_is_graded_and_prefix_stable() {
        let small = multi_indices(2, 2);
        assert_eq!(
            small,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        let big = multi_indices(2, 4);
        assert_eq!(&big[..small.len()], &small[..]);
        assert_eq!(coefficient_count(5, 10), 3003);
        assert_eq!(multi_indices(3, 5).len(), coefficient_count(3, 5));
    }

    #[test]
    fn constants_add() {
        let a = Jet::constant(2, 3, 2.0);
        let b = Jet::constant(2, 3, 3.0);
        assert_eq!((&a + &b).value(), c(5.0));
    }

    #[test]
    fn square_of_variable_has_second_derivative_two() {
        let x = Jet::variable(1, 2, 0, 0.0).unwrap();
        let sq = &x * &x;
        assert_eq!(sq.derivative(&[2]), c(2.0));
        assert_eq!(sq.derivative(&[1]), c(0.0));
    }

    #[test]
    fn one_plus_x_times_one_minus_x() {
        let one = Jet::constant(1, 3, 1.0);
        let x = Jet::variable(1, 3, 0, 0.0).unwrap();
        let p = (&one + &x) * (&one - &x);
        let d = p.derivatives();
        assert_eq!(d, vec![c(1.0), c(0.0), c(-2.0), c(0.0)]);
    }

    #[test]
    fn geometric_series() {
        let x = Jet::variable(1, 3, 0, 0.0).unwrap();
        let r = x.add_constant(1.0).recip().unwrap();
        // 1 - x + x² - x³ in derivative convention: 1, -1, 2, -6
        let d = r.derivatives();
        for (got, want) in d.iter().zip([1.0, -1.0, 2.0, -6.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = Jet::constant(3, 4, 0.0);
        let e = z.exp().unwrap();
        assert_eq!(e.value(), c(1.0));
        assert!(e.derivatives()[1..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn partial_of_product_and_constant() {
        let x1 = Jet::variable(2, 2, 0, 0.0).unwrap();
        let x2 = Jet::variable(2, 2, 1, 0.0).unwrap();
        let p = (&x1 * &x2).partial(0).unwrap();
        assert_eq!(p.order(), 1);
        assert_eq!(p.derivatives(), vec![c(0.0), c(0.0), c(1.0)]);
        let k = Jet::constant(2, 2, 7.0).partial(0).unwrap();
        assert!(k.derivatives().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn partial_of_order_zero_is_an_error() {
        let k = Jet::constant(2, 0, 1.0);
        assert_eq!(k.partial(0), Err(JetError::OrderExhausted));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = Jet::constant(2, 3, 1.0);
        let b = Jet::constant(2, 2, 1.0);
        assert!(matches!(a.try_add(&b), Err(JetError::ShapeMismatch { .. })));
        let c3 = Jet::constant(3, 3, 1.0);
        assert!(matches!(a.try_mul(&c3), Err(JetError::ShapeMismatch { .. })));
        assert!(a.mul_to(&b, 3).is_err());
        assert!(a.mul_to(&b, 2).is_ok());
    }

    #[test]
    fn domain_errors() {
        let z = Jet::constant(1, 2, 0.0);
        assert!(matches!(z.recip(), Err(JetError::Domain { .. })));
        assert!(matches!(z.ln(), Err(JetError::Domain { .. })));
        let neg = Jet::constant(1, 2, -1.0);
        assert!(matches!(neg.sqrt(), Err(JetError::Domain { .. })));
    }

    #[test]
    fn linear_substitution_of_product() {
        // f = x1 * x2 at origin, x = M y with M = [[1,1],[0,1]] -> (y1 + y2) y2
        let x1 = Jet::variable(2, 2, 0, 0.0).unwrap();
        let x2 = Jet::variable(2, 2, 1, 0.0).unwrap();
        let f = &x1 * &x2;
        let g = f.linear_substitution(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.derivative(&[1, 1]), c(1.0));
        assert_eq!(g.derivative(&[0, 2]), c(2.0));
        assert_eq!(g.derivative(&[2, 0]), c(0.0));
    }
}
