//! Dense complex operators on tensor-product spaces.
//!
//! Composite indices are row-major: the basis vector `|i> (x) |k>` of
//! `A (x) B` sits at flat index `i * dim(B) + k`, 0-based.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("data has {len} entries, expected {dim}x{dim}")]
    DataLength { len: usize, dim: usize },
    #[error("factor dimensions multiply to {product}, operator dimension is {dim}")]
    FactorProduct { product: usize, dim: usize },
    #[error("{roles} roles given for {factors} factors")]
    RoleCount { roles: usize, factors: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factor index {index} out of range for {count} factors")]
    FactorIndex { index: usize, count: usize },
    #[error("position {0} listed twice")]
    DuplicatePosition(usize),
    #[error("duplicate interpolation node {0}")]
    DuplicateNode(C64),
    #[error("interpolation of degree {degree} needs {needed} samples, got {got}")]
    TooFewSamples {
        degree: usize,
        needed: usize,
        got: usize,
    },
    #[error("held-out sample at u = {node} misses by {residual:.3e}; degree bound too low")]
    ExtraSampleMismatch { node: C64, residual: f64 },
    #[error("matrix is singular")]
    Singular,
}

/// Label for one tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Auxiliary,
    Quantum,
}

/// A square complex matrix together with the factorization of its space.
#[derive(Clone, PartialEq)]
pub struct SpectralOperator {
    dim: usize,
    data: Vec<C64>,
    factors: Vec<usize>,
    roles: Vec<Role>,
}

impl fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("dim", &self.dim)
            .field("factors", &self.factors)
            .field("roles", &self.roles)
            .finish_non_exhaustive()
    }
}

fn check_layout(dim: usize, factors: &[usize], roles: &[Role]) -> Result<(), TensorError> {
    let product: usize = factors.iter().product();
    if product != dim {
        return Err(TensorError::FactorProduct { product, dim });
    }
    if roles.len() != factors.len() {
        return Err(TensorError::RoleCount {
            roles: roles.len(),
            factors: factors.len(),
        });
    }
    Ok(())
}

impl SpectralOperator {
    pub fn new(data: Vec<C64>, factors: Vec<usize>, roles: Vec<Role>) -> Result<Self, TensorError> {
        let dim: usize = factors.iter().product();
        if data.len() != dim * dim {
            return Err(TensorError::DataLength {
                len: data.len(),
                dim,
            });
        }
        check_layout(dim, &factors, &roles)?;
        Ok(Self {
            dim,
            data,
            factors,
            roles,
        })
    }

    /// A single-factor quantum operator from row-major data.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self, TensorError> {
        Self::new(data, vec![dim], vec![Role::Quantum])
    }

    pub fn from_fn(factors: &[usize], roles: &[Role], mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let dim: usize = factors.iter().product();
        check_layout(dim, factors, roles).expect("roles must match factors");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self {
            dim,
            data,
            factors: factors.to_vec(),
            roles: roles.to_vec(),
        }
    }

    pub fn zeros(factors: &[usize], roles: &[Role]) -> Self {
        Self::from_fn(factors, roles, |_, _| C64::default())
    }

    pub fn identity(factors: &[usize], roles: &[Role]) -> Self {
        Self::from_fn(factors, roles, |i, j| if i == j { re(1.0) } else { C64::default() })
    }

    /// Identity on a space whose factors are all quantum.
    pub fn quantum_identity(factors: &[usize]) -> Self {
        Self::identity(factors, &vec![Role::Quantum; factors.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Reinterpret the same matrix with a different factorization.
    pub fn relabel(mut self, factors: Vec<usize>, roles: Vec<Role>) -> Result<Self, TensorError> {
        check_layout(self.dim, &factors, &roles)?;
        self.factors = factors;
        self.roles = roles;
        Ok(self)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.transpose();
        out.data.iter_mut().for_each(|x| *x = x.conj());
        out
    }

    /// Transpose in one tensor factor only.
    pub fn partial_transpose(&self, factor: usize) -> Result<Self, TensorError> {
        let count = self.factors.len();
        if factor >= count {
            return Err(TensorError::FactorIndex { index: factor, count });
        }
        let stride: usize = self.factors[factor + 1..].iter().product();
        let d = self.factors[factor];
        let digit = |i: usize| (i / stride) % d;
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            let di = digit(i);
            for j in 0..n {
                let dj = digit(j);
                let i2 = i - di * stride + dj * stride;
                let j2 = j - dj * stride + di * stride;
                out.data[i2 * n + j2] = self.data[i * n + j];
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Matrix product; the result keeps the factorization of `self`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![C64::default(); n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::default() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        });
        Self {
            dim: n,
            data: out,
            factors: self.factors.clone(),
            roles: self.roles.clone(),
        }
    }

    /// Applies `x -> self * x` to a vector.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// `embed(op, positions) * self`, computed without forming the embedding.
    pub fn left_apply(&self, op: &Self, positions: &[usize]) -> Result<Self, TensorError> {
        let map = FactorMap::new(&self.factors, positions, op)?;
        let n = self.dim;
        let ds = op.dim;
        let mut out = vec![C64::default(); n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let (s, rest) = map.split(i);
            for t in 0..ds {
                let a = op.data[s * ds + t];
                if a == C64::default() {
                    continue;
                }
                let src = rest + map.offsets[t];
                let srow = &self.data[src * n..(src + 1) * n];
                for (o, b) in row.iter_mut().zip(srow) {
                    *o += a * b;
                }
            }
        });
        Ok(Self {
            data: out,
            ..self.clone_layout()
        })
    }

    /// `self * embed(op, positions)`, computed without forming the embedding.
    pub fn right_apply(&self, op: &Self, positions: &[usize]) -> Result<Self, TensorError> {
        let map = FactorMap::new(&self.factors, positions, op)?;
        let n = self.dim;
        let ds = op.dim;
        let splits: Vec<(usize, usize)> = (0..n).map(|j| map.split(j)).collect();
        let mut out = vec![C64::default(); n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let srow = &self.data[i * n..(i + 1) * n];
            for (j, o) in row.iter_mut().enumerate() {
                let (s, rest) = splits[j];
                let mut acc = C64::default();
                for t in 0..ds {
                    let b = op.data[t * ds + s];
                    if b != C64::default() {
                        acc += srow[rest + map.offsets[t]] * b;
                    }
                }
                *o = acc;
            }
        });
        Ok(Self {
            data: out,
            ..self.clone_layout()
        })
    }

    fn clone_layout(&self) -> Self {
        Self {
            dim: self.dim,
            data: Vec::new(),
            factors: self.factors.clone(),
            roles: self.roles.clone(),
        }
    }
}

/// Index bookkeeping for an operator acting on selected factors.
struct FactorMap {
    strides: Vec<usize>,
    dims: Vec<usize>,
    positions: Vec<usize>,
    sub_dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl FactorMap {
    fn new(space: &[usize], positions: &[usize], op: &SpectralOperator) -> Result<Self, TensorError> {
        let count = space.len();
        for (k, &p) in positions.iter().enumerate() {
            if p >= count {
                return Err(TensorError::FactorIndex { index: p, count });
            }
            if positions[..k].contains(&p) {
                return Err(TensorError::DuplicatePosition(p));
            }
        }
        let sub_dims: Vec<usize> = positions.iter().map(|&p| space[p]).collect();
        let sub: usize = sub_dims.iter().product();
        if sub != op.dim {
            return Err(TensorError::DimensionMismatch(format!(
                "operator of dimension {} placed on factors of dimensions {:?}",
                op.dim, sub_dims
            )));
        }
        let mut strides = vec![1; count];
        for q in (0..count.saturating_sub(1)).rev() {
            strides[q] = strides[q + 1] * space[q + 1];
        }
        let mut offsets = Vec::with_capacity(sub);
        for s in 0..sub {
            let mut rem = s;
            let mut off = 0;
            for (t, &p) in positions.iter().enumerate().rev() {
                let d = sub_dims[t];
                off += (rem % d) * strides[p];
                rem /= d;
            }
            offsets.push(off);
        }
        Ok(Self {
            strides,
            dims: space.to_vec(),
            positions: positions.to_vec(),
            sub_dims,
            offsets,
        })
    }

    /// Splits a full index into (index on the selected factors, remainder).
    fn split(&self, i: usize) -> (usize, usize) {
        let mut s = 0;
        let mut rest = i;
        for (t, &p) in self.positions.iter().enumerate() {
            let digit = (i / self.strides[p]) % self.dims[p];
            s = s * self.sub_dims[t] + digit;
            rest -= digit * self.strides[p];
        }
        (s, rest)
    }
}

impl Add for &SpectralOperator {
    type Output = SpectralOperator;
    fn add(self, rhs: Self) -> SpectralOperator {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        let mut out = self.clone();
        out.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for &SpectralOperator {
    type Output = SpectralOperator;
    fn sub(self, rhs: Self) -> SpectralOperator {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        let mut out = self.clone();
        out.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
        out
    }
}

impl Mul for &SpectralOperator {
    type Output = SpectralOperator;
    fn mul(self, rhs: Self) -> SpectralOperator {
        self.matmul(rhs)
    }
}

/// Kronecker product; factor lists are concatenated.
pub fn kron(a: &SpectralOperator, b: &SpectralOperator) -> SpectralOperator {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut data = vec![C64::default(); n * n];
    for i in 0..na {
        for j in 0..na {
            let x = a.data[i * na + j];
            if x == C64::default() {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    data[(i * nb + k) * n + j * nb + l] = x * b.data[k * nb + l];
                }
            }
        }
    }
    let mut factors = a.factors.clone();
    factors.extend_from_slice(&b.factors);
    let mut roles = a.roles.clone();
    roles.extend_from_slice(&b.roles);
    SpectralOperator {
        dim: n,
        data,
        factors,
        roles,
    }
}

/// Places `a` on the listed factors of `space_dims` (in the given order) and
/// the identity elsewhere. Factors not covered by `a` are labelled quantum.
pub fn embed(
    a: &SpectralOperator,
    positions: &[usize],
    space_dims: &[usize],
) -> Result<SpectralOperator, TensorError> {
    let mut roles = vec![Role::Quantum; space_dims.len()];
    if positions.len() == a.factors.len() {
        for (&p, &r) in positions.iter().zip(&a.roles) {
            if p < roles.len() {
                roles[p] = r;
            }
        }
    }
    SpectralOperator::identity(space_dims, &roles).left_apply(a, positions)
}

/// Traces out one factor; the remaining factors keep their order.
pub fn partial_trace(a: &SpectralOperator, factor: usize) -> Result<SpectralOperator, TensorError> {
    let count = a.factors.len();
    if factor >= count {
        return Err(TensorError::FactorIndex { index: factor, count });
    }
    let d = a.factors[factor];
    let inner: usize = a.factors[factor + 1..].iter().product();
    let outer: usize = a.factors[..factor].iter().product();
    let m = outer * inner;
    let n = a.dim;
    let full = |o: usize, x: usize, i: usize| (o * d + x) * inner + i;
    let mut data = vec![C64::default(); m * m];
    data.par_chunks_mut(m).enumerate().for_each(|(r, row)| {
        let (ro, ri) = (r / inner, r % inner);
        for (c, out) in row.iter_mut().enumerate() {
            let (co, ci) = (c / inner, c % inner);
            let mut acc = C64::default();
            for x in 0..d {
                acc += a.data[full(ro, x, ri) * n + full(co, x, ci)];
            }
            *out = acc;
        }
    });
    let mut factors = a.factors.clone();
    factors.remove(factor);
    let mut roles = a.roles.clone();
    roles.remove(factor);
    if factors.is_empty() {
        factors.push(1);
        roles.push(Role::Quantum);
    }
    Ok(SpectralOperator {
        dim: m,
        data,
        factors,
        roles,
    })
}

/// The flip operator `|i> (x) |j> -> |j> (x) |i>` from `C^d1 (x) C^d2` to
/// `C^d2 (x) C^d1`. For `d1 == d2` it is the usual permutation.
pub fn flip(d1: usize, d2: usize) -> SpectralOperator {
    let n = d1 * d2;
    let mut p = SpectralOperator::quantum_identity(&[d1, d2]).scale(C64::default());
    for i in 0..d1 {
        for j in 0..d2 {
            p.data[(j * d1 + i) * n + i * d2 + j] = re(1.0);
        }
    }
    p
}

/// `max|A - B| / max(1, max|A|, max|B|)`.
pub fn rel_residual(a: &SpectralOperator, b: &SpectralOperator) -> Result<f64, TensorError> {
    if a.dim != b.dim {
        return Err(TensorError::DimensionMismatch(format!(
            "residual between {}x{0} and {}x{1}",
            a.dim, b.dim
        )));
    }
    let diff = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(diff / 1f64.max(a.max_abs()).max(b.max_abs()))
}

/// Scalar analogue of [`rel_residual`].
pub fn rel_diff(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// Residual of `a` against `c * Id`.
pub fn residual_to_scalar(a: &SpectralOperator, c: C64) -> f64 {
    let id = SpectralOperator::identity(a.factors(), a.roles()).scale(c);
    rel_residual(a, &id).expect("same layout")
}

/// A polynomial in the spectral parameter, coefficients in ascending degree.
/// Serializes as the bare coefficient list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyCurve {
    pub coeffs: Vec<C64>,
}

impl PolyCurve {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::default(), |acc, c| acc * u + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect::<Vec<_>>();
        Self {
            coeffs: if coeffs.is_empty() { vec![C64::default()] } else { coeffs },
        }
    }

    /// Coefficient of the top power allowed by the degree bound.
    pub fn top(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// The polynomial `u -> p(-u + shift)`.
    pub fn reflect(&self, shift: f64) -> Self {
        // Horner in the substituted variable.
        let mut out = vec![C64::default()];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![C64::default(); out.len() + 1];
            for (k, a) in out.iter().enumerate() {
                next[k] += a * shift;
                next[k + 1] -= a;
            }
            next[0] += c;
            out = next;
        }
        out.truncate(self.coeffs.len().max(1));
        Self { coeffs: out }
    }

    /// Largest coefficient difference, relative to the larger coefficient norm.
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let at = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        let scale = (0..n)
            .map(|k| at(self, k).norm().max(at(other, k).norm()))
            .fold(1.0, f64::max);
        (0..n).map(|k| (at(self, k) - at(other, k)).norm()).fold(0.0, f64::max) / scale
    }
}

/// Interpolation nodes `k + 1/4`, centred on zero, for a given degree.
pub fn interpolation_nodes(count: usize) -> Vec<f64> {
    let start = -((count / 2) as i64);
    (0..count as i64).map(|k| (start + k) as f64 + 0.25).collect()
}

/// `count` equispaced nodes on a circle, rotated off the real axis. Fits on
/// a circle are as well conditioned as a discrete Fourier transform.
pub fn circle_nodes(count: usize, radius: f64) -> Vec<C64> {
    (0..count)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.3) / count as f64))
        .collect()
}

/// Monomial coefficients of the interpolant of unit data at each node.
fn lagrange_weights(nodes: &[C64]) -> Result<Vec<Vec<C64>>, TensorError> {
    for (k, x) in nodes.iter().enumerate() {
        if nodes[..k].iter().any(|y| (x - y).norm() < 1e-14) {
            return Err(TensorError::DuplicateNode(*x));
        }
    }
    let n = nodes.len();
    // Master polynomial prod (u - x_k), ascending coefficients.
    let mut master = vec![re(1.0)];
    for x in nodes {
        let mut next = vec![C64::default(); master.len() + 1];
        for (k, a) in master.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * x;
        }
        master = next;
    }
    let mut weights = Vec::with_capacity(n);
    for (i, xi) in nodes.iter().enumerate() {
        // Synthetic division of the master polynomial by (u - x_i).
        let mut quot = vec![C64::default(); n];
        let mut carry = C64::default();
        for k in (0..n).rev() {
            carry = master[k + 1] + carry * xi;
            quot[k] = carry;
        }
        let denom: C64 = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, xj)| xi - xj)
            .product();
        weights.push(quot.into_iter().map(|q| q / denom).collect());
    }
    Ok(weights)
}

/// Lagrange interpolation of scalar samples with a degree bound. Samples past
/// the first `degree + 1` must be reproduced within `tol` (relative).
pub fn interpolate_poly(samples: &[(C64, C64)], degree: usize, tol: f64) -> Result<PolyCurve, TensorError> {
    let needed = degree + 1;
    if samples.len() < needed {
        return Err(TensorError::TooFewSamples {
            degree,
            needed,
            got: samples.len(),
        });
    }
    let nodes: Vec<C64> = samples.iter().map(|s| s.0).collect();
    lagrange_weights(&nodes)?;
    let weights = lagrange_weights(&nodes[..needed])?;
    let mut coeffs = vec![C64::default(); needed];
    for (w, (_, y)) in weights.iter().zip(samples) {
        for (c, wk) in coeffs.iter_mut().zip(w) {
            *c += wk * y;
        }
    }
    let curve = PolyCurve { coeffs };
    for &(x, y) in &samples[needed..] {
        let residual = rel_diff(curve.eval(x), y);
        if residual > tol {
            return Err(TensorError::ExtraSampleMismatch { node: x, residual });
        }
    }
    Ok(curve)
}

/// Entrywise interpolation of operator-valued samples; returns the
/// coefficient operators in ascending degree.
pub fn interpolate_operator(
    samples: &[(C64, SpectralOperator)],
    degree: usize,
    tol: f64,
) -> Result<Vec<SpectralOperator>, TensorError> {
    let needed = degree + 1;
    if samples.len() < needed {
        return Err(TensorError::TooFewSamples {
            degree,
            needed,
            got: samples.len(),
        });
    }
    let nodes: Vec<C64> = samples.iter().map(|s| s.0).collect();
    lagrange_weights(&nodes)?;
    let weights = lagrange_weights(&nodes[..needed])?;
    let template = &samples[0].1;
    let mut coeffs = vec![template.scale(C64::default()); needed];
    for (w, (_, m)) in weights.iter().zip(samples) {
        for (c, wk) in coeffs.iter_mut().zip(w) {
            c.data.iter_mut().zip(&m.data).for_each(|(a, b)| *a += wk * b);
        }
    }
    for (x, m) in &samples[needed..] {
        let mut value = template.scale(C64::default());
        for c in coeffs.iter().rev() {
            value = &value.scale(*x) + c;
        }
        let residual = rel_residual(&value, m)?;
        if residual > tol {
            return Err(TensorError::ExtraSampleMismatch { node: *x, residual });
        }
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis_ket(dims: &[usize], idx: &[usize]) -> Vec<C64> {
        let n: usize = dims.iter().product();
        let flat = dims.iter().zip(idx).fold(0, |acc, (d, i)| acc * d + i);
        let mut v = vec![C64::default(); n];
        v[flat] = re(1.0);
        v
    }

    fn sample_op(n: usize, seed: u64) -> SpectralOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralOperator::from_fn(&[n], &[Role::Quantum], |_, _| {
            C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        })
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(
            &SpectralOperator::quantum_identity(&[2]),
            &SpectralOperator::quantum_identity(&[3]),
        );
        assert_eq!(k, SpectralOperator::quantum_identity(&[2, 3]));
        assert_eq!(k.factors(), &[2, 3]);
    }

    #[test]
    fn kron_dimension_bookkeeping() {
        let k = kron(&sample_op(6, 1), &sample_op(6, 2));
        assert_eq!(k.dim(), 36);
        assert_eq!(k.factors(), &[6, 6]);
    }

    #[test]
    fn flip_then_identity_permutes_triples() {
        let op = kron(&flip(6, 6), &SpectralOperator::quantum_identity(&[6]));
        for (a, b, c) in [(0, 1, 2), (5, 5, 0), (3, 0, 4), (2, 4, 1), (1, 3, 5)] {
            let out = op.apply(&basis_ket(&[6, 6, 6], &[a, b, c]));
            assert_eq!(out, basis_ket(&[6, 6, 6], &[b, a, c]));
        }
    }

    #[test]
    fn embed_single_space_is_identity_map() {
        let x = sample_op(6, 3);
        let e = embed(&x, &[0], &[6]).unwrap();
        assert_eq!(rel_residual(&e, &x).unwrap(), 0.0);
    }

    #[test]
    fn embed_order_matches_relabelled_swap() {
        let p = sample_op(36, 4).relabel(vec![6, 6], vec![Role::Quantum; 2]).unwrap();
        let a = embed(&p, &[0, 2], &[6, 6, 6]).unwrap();
        let swapped = flip(6, 6).matmul(&p).matmul(&flip(6, 6));
        let b = embed(&swapped, &[2, 0], &[6, 6, 6]).unwrap();
        for k in 0..10 {
            let idx = [k % 6, (k * 5 + 1) % 6, (k * 7 + 3) % 6];
            let v = basis_ket(&[6, 6, 6], &idx);
            let (x, y) = (a.apply(&v), b.apply(&v));
            assert!(x.iter().zip(&y).all(|(p, q)| (p - q).norm() < 1e-14));
        }
    }

    #[test]
    fn embed_identity_gives_identity() {
        let e = embed(&SpectralOperator::quantum_identity(&[6]), &[1], &[6, 6]).unwrap();
        assert_eq!(e, SpectralOperator::quantum_identity(&[6, 6]));
    }

    #[test]
    fn embed_rejects_mismatched_factor() {
        let err = embed(&sample_op(4, 1), &[0], &[6, 6]).unwrap_err();
        assert!(matches!(err, TensorError::DimensionMismatch(_)));
        assert!(matches!(
            embed(&sample_op(36, 1), &[0, 0], &[6, 6]),
            Err(TensorError::DuplicatePosition(0))
        ));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let (a, b) = (sample_op(3, 5), sample_op(4, 6));
        let t = partial_trace(&kron(&a, &b), 0).unwrap();
        assert!(rel_residual(&t, &b.scale(a.trace())).unwrap() < 1e-14);
    }

    #[test]
    fn partial_trace_of_flip_is_identity() {
        let p = flip(6, 6);
        let t = partial_trace(&p, 0).unwrap();
        // Index-loop oracle: sum over i of <i a|P|i b> = delta(a,b).
        for a in 0..6 {
            for b in 0..6 {
                let mut acc = C64::default();
                for i in 0..6 {
                    acc += p.get(i * 6 + a, i * 6 + b);
                }
                assert_eq!(t.get(a, b), acc);
            }
        }
        assert_eq!(t, SpectralOperator::quantum_identity(&[6]));
    }

    #[test]
    fn partial_trace_of_identity_scales() {
        let t = partial_trace(&SpectralOperator::quantum_identity(&[6, 6]), 1).unwrap();
        assert_eq!(t, SpectralOperator::quantum_identity(&[6]).scale(re(6.0)));
    }

    #[test]
    fn interpolation_examples() {
        let sq: Vec<_> = (0..3).map(|k| (re(k as f64), re((k * k) as f64))).collect();
        let p = interpolate_poly(&sq, 2, 1e-12).unwrap();
        assert!(p.distance(&PolyCurve::new(vec![re(0.0), re(0.0), re(1.0)])) < 1e-14);

        let c: Vec<_> = (0..4).map(|k| (re(k as f64), re(7.0))).collect();
        let p = interpolate_poly(&c, 0, 1e-12).unwrap();
        assert_eq!(p.coeffs, vec![re(7.0)]);

        let a: Vec<_> = (0..3)
            .map(|k| {
                let u = k as f64;
                (re(u), re((u + 1.0) * (u + 2.0)))
            })
            .collect();
        let p = interpolate_poly(&a, 2, 1e-12).unwrap();
        assert!(p.distance(&PolyCurve::new(vec![re(2.0), re(3.0), re(1.0)])) < 1e-14);
    }

    #[test]
    fn interpolation_detects_low_degree_bound() {
        let s: Vec<_> = (0..4).map(|k| (re(k as f64), re((k * k * k) as f64))).collect();
        assert!(matches!(
            interpolate_poly(&s, 2, 1e-9),
            Err(TensorError::ExtraSampleMismatch { .. })
        ));
        let dup = vec![(re(1.0), re(1.0)), (re(1.0), re(2.0))];
        assert!(matches!(interpolate_poly(&dup, 1, 1e-9), Err(TensorError::DuplicateNode(_))));
        assert!(matches!(
            interpolate_poly(&dup[..1], 1, 1e-9),
            Err(TensorError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let a = sample_op(5, 9);
        assert_eq!(rel_residual(&a, &a).unwrap(), 0.0);
        let z = SpectralOperator::quantum_identity(&[3]).scale(C64::default());
        assert_eq!(rel_residual(&z, &z).unwrap(), 0.0);
        let id = SpectralOperator::quantum_identity(&[4]);
        assert_eq!(rel_residual(&id, &id.scale(re(2.0))).unwrap(), 0.5);
        assert!(rel_residual(&id, &sample_op(3, 1)).is_err());
    }

    #[test]
    fn left_and_right_apply_match_embedding() {
        let m = sample_op(96, 11).relabel(vec![4, 4, 6], vec![Role::Quantum; 3]).unwrap();
        let op = sample_op(24, 12).relabel(vec![4, 6], vec![Role::Quantum; 2]).unwrap();
        let e = embed(&op, &[1, 2], &[4, 4, 6]).unwrap();
        assert!(rel_residual(&m.left_apply(&op, &[1, 2]).unwrap(), &e.matmul(&m)).unwrap() < 1e-14);
        assert!(rel_residual(&m.right_apply(&op, &[1, 2]).unwrap(), &m.matmul(&e)).unwrap() < 1e-14);
    }

    #[test]
    fn partial_transpose_round_trip() {
        let m = sample_op(24, 13).relabel(vec![4, 6], vec![Role::Quantum; 2]).unwrap();
        let t = m.partial_transpose(0).unwrap().partial_transpose(1).unwrap();
        assert_eq!(t, m.transpose());
    }

    #[test]
    fn reflect_polynomial() {
        let p = PolyCurve::new(vec![re(1.0), re(2.0), re(3.0)]);
        let q = p.reflect(-2.0);
        for u in [0.3, -1.7, 2.2] {
            assert!((q.eval(re(u)) - p.eval(re(-u - 2.0))).norm() < 1e-12);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn kron_is_associative(seed in 0u64..1000) {
            // Small integer entries keep every product exact.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut int_op = |n: usize| {
                SpectralOperator::from_fn(&[n], &[Role::Quantum], |_, _| {
                    C64::new(rng.random_range(-4i32..=4) as f64, rng.random_range(-4i32..=4) as f64)
                })
            };
            let (a, b, c) = (int_op(2), int_op(3), int_op(2));
            proptest::prop_assert_eq!(rel_residual(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c))).unwrap(), 0.0);
            let (a, b, c) = (sample_op(2, seed), sample_op(3, seed + 1), sample_op(2, seed + 2));
            proptest::prop_assert!(rel_residual(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c))).unwrap() < 1e-15);
        }

        #[test]
        fn partial_trace_inverts_embedding(seed in 0u64..1000, j in 0usize..3) {
            let a = sample_op(3, seed);
            let dims = [3, 3, 3];
            let t = partial_trace(&embed(&a, &[j], &dims).unwrap(), j).unwrap();
            let expect = SpectralOperator::quantum_identity(&[3, 3]).scale(a.trace());
            proptest::prop_assert!(rel_residual(&t, &expect).unwrap() < 1e-12);
        }

        #[test]
        fn interpolation_is_exact(seed in 0u64..1000, degree in 0usize..=12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<C64> = (0..=degree)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let truth = PolyCurve::new(coeffs);
            let half = (degree as i64 + 2) / 2;
            let samples: Vec<_> = (-half..=degree as i64 + 1 - half)
                .map(|k| (re(k as f64), truth.eval(re(k as f64))))
                .collect();
            let fit = interpolate_poly(&samples, degree, 1e-9).unwrap();
            let scale = samples.iter().map(|s| s.1.norm()).fold(1.0, f64::max);
            for k in 0..40 {
                let u = re(-(half as f64) + 0.3 * k as f64);
                let miss = (fit.eval(u) - truth.eval(u)).norm() / scale;
                proptest::prop_assert!(miss < 1e-10, "miss {miss} at {u}");
            }
            proptest::prop_assert!(fit.distance(&truth) < 1e-8);
        }
    }
}
