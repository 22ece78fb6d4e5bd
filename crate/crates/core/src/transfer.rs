//! Monodromy and transfer matrices, Hamiltonians and operator identities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{k_spinor, k_spinor_dual, k_v, k_v_dual, BoundaryParams, Chirality};
use crate::linalg;
use crate::rmatrix::{r_eval, weights, RFamily};
use crate::tensor::{
    embed, flip, interpolate_operator, interpolation_nodes, partial_trace, re, rel_residual, residual_to_scalar, Role,
    SpectralOperator, TensorError, C64,
};

/// Points the inhomogeneities must avoid (differences, and sums for open chains).
const SPECIAL_POINTS: [f64; 9] = [0.0, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 2.0, -2.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("inhomogeneities {i} and {j} combine to {value}, too close to a degenerate point")]
    DegenerateTheta { i: usize, j: usize, value: f64 },
    #[error("chain needs at least one site")]
    Empty,
    #[error("periodic Hamiltonian needs at least two sites")]
    TooShort,
    #[error("Hamiltonian limit needs all inhomogeneities zero")]
    NotHomogeneous,
    #[error("transfer matrix at u = 0 is singular (c2 or c2' equals +-2)")]
    SingularAtZero,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "params")]
pub enum Boundary {
    Periodic,
    Open(BoundaryParams),
}

impl Boundary {
    pub fn is_open(&self) -> bool {
        matches!(self, Boundary::Open(_))
    }

    pub fn params(&self) -> Option<&BoundaryParams> {
        match self {
            Boundary::Periodic => None,
            Boundary::Open(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub theta: Vec<f64>,
    pub boundary: Boundary,
}

/// Default inhomogeneities `0.3 + 0.37 (j - 1)`.
pub fn default_theta(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.3 + 0.37 * j as f64).collect()
}

impl ChainSpec {
    pub fn new(theta: Vec<f64>, boundary: Boundary) -> Result<Self, TransferError> {
        let spec = Self { theta, boundary };
        spec.validate()?;
        Ok(spec)
    }

    /// Default inhomogeneities.
    pub fn with_defaults(n: usize, boundary: Boundary) -> Self {
        Self::new(default_theta(n), boundary).expect("default inhomogeneities are generic")
    }

    /// All inhomogeneities zero; used only for the Hamiltonian limit.
    pub fn homogeneous(n: usize, boundary: Boundary) -> Self {
        Self {
            theta: vec![0.0; n],
            boundary,
        }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<(), TransferError> {
        if self.theta.is_empty() {
            return Err(TransferError::Empty);
        }
        let near = |x: f64| SPECIAL_POINTS.iter().any(|s| (x - s).abs() < 1e-6);
        for i in 0..self.n() {
            for j in 0..self.n() {
                let diff = self.theta[i] - self.theta[j];
                if i != j && near(diff) {
                    return Err(TransferError::DegenerateTheta { i, j, value: diff });
                }
                let sum = self.theta[i] + self.theta[j];
                if self.boundary.is_open() && near(sum) {
                    return Err(TransferError::DegenerateTheta { i, j, value: sum });
                }
            }
        }
        Ok(())
    }

    pub fn quantum_dims(&self) -> Vec<usize> {
        vec![6; self.n()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Fundamental,
    Plus,
    Minus,
}

impl TransferKind {
    pub const ALL: [TransferKind; 3] = [TransferKind::Fundamental, TransferKind::Plus, TransferKind::Minus];

    pub fn family(self) -> RFamily {
        match self {
            TransferKind::Fundamental => RFamily::VV,
            TransferKind::Plus => RFamily::SpV,
            TransferKind::Minus => RFamily::SmV,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransferKind::Fundamental => "fundamental",
            TransferKind::Plus => "plus",
            TransferKind::Minus => "minus",
        }
    }

    fn chirality(self) -> Option<Chirality> {
        match self {
            TransferKind::Fundamental => None,
            TransferKind::Plus => Some(Chirality::Plus),
            TransferKind::Minus => Some(Chirality::Minus),
        }
    }
}

/// Polynomial degree of the transfer-matrix entries.
pub fn degree_bound(kind: TransferKind, spec: &ChainSpec) -> usize {
    let n = spec.n();
    match (kind, spec.boundary.is_open()) {
        (TransferKind::Fundamental, false) => 2 * n,
        (_, false) => n,
        (TransferKind::Fundamental, true) => 4 * n + 4,
        (_, true) => 2 * n + 2,
    }
}

fn aux_layout(kind: TransferKind, spec: &ChainSpec) -> (Vec<usize>, Vec<Role>) {
    let mut dims = vec![kind.family().aux_dim()];
    dims.extend(spec.quantum_dims());
    let mut roles = vec![Role::Auxiliary];
    roles.extend(vec![Role::Quantum; spec.n()]);
    (dims, roles)
}

/// Multiplies `acc` on the right by the monodromy factors.
fn extend_monodromy(
    mut acc: SpectralOperator,
    kind: TransferKind,
    hat: bool,
    u: C64,
    spec: &ChainSpec,
) -> Result<SpectralOperator, TensorError> {
    let n = spec.n();
    let sites: Vec<usize> = if hat { (0..n).rev().collect() } else { (0..n).collect() };
    for j in sites {
        let arg = if hat { u + spec.theta[j] } else { u - spec.theta[j] };
        acc = acc.right_apply(&r_eval(kind.family(), arg), &[0, j + 1])?;
    }
    Ok(acc)
}

/// Row-to-row monodromy, auxiliary factor first. `hat` selects the
/// reversed product with `u + theta`.
pub fn monodromy(kind: TransferKind, hat: bool, u: C64, spec: &ChainSpec) -> Result<SpectralOperator, TensorError> {
    let (dims, roles) = aux_layout(kind, spec);
    extend_monodromy(SpectralOperator::identity(&dims, &roles), kind, hat, u, spec)
}

fn reflection(kind: TransferKind, u: C64, params: &BoundaryParams) -> (SpectralOperator, SpectralOperator) {
    match kind.chirality() {
        None => (k_v(u, &params.left()), k_v_dual(u, params)),
        Some(ch) => (k_spinor(ch, u, &params.left()), k_spinor_dual(ch, u, params)),
    }
}

/// Transfer matrix on the quantum space.
pub fn transfer(kind: TransferKind, u: C64, spec: &ChainSpec) -> Result<SpectralOperator, TensorError> {
    let full = match spec.boundary {
        Boundary::Periodic => monodromy(kind, false, u, spec)?,
        Boundary::Open(params) => {
            let (k, k_dual) = reflection(kind, u, &params);
            let m = monodromy(kind, false, u, spec)?.right_apply(&k, &[0])?;
            extend_monodromy(m, kind, true, u, spec)?.left_apply(&k_dual, &[0])?
        }
    };
    partial_trace(&full, 0)
}

/// Transfer matrices at many points, evaluated in parallel.
pub fn transfer_at(kind: TransferKind, points: &[C64], spec: &ChainSpec) -> Result<Vec<SpectralOperator>, TensorError> {
    points.par_iter().map(|&u| transfer(kind, u, spec)).collect()
}

/// Operator coefficients in ascending degree plus the worst relative
/// mismatch at `held_out` extra nodes beyond the degree bound.
pub fn transfer_fit(
    kind: TransferKind,
    spec: &ChainSpec,
    held_out: usize,
) -> Result<(Vec<SpectralOperator>, f64), TensorError> {
    let degree = degree_bound(kind, spec);
    let nodes: Vec<C64> = interpolation_nodes(degree + 1 + held_out).into_iter().map(re).collect();
    let values = transfer_at(kind, &nodes, spec)?;
    let samples: Vec<_> = nodes.into_iter().zip(values).collect();
    let coeffs = interpolate_operator(&samples[..=degree], degree, 0.0)?;
    let mut worst: f64 = 0.0;
    for (x, m) in &samples[degree + 1..] {
        worst = worst.max(rel_residual(&eval_operator_poly(&coeffs, *x), m)?);
    }
    Ok((coeffs, worst))
}

/// Evaluates operator coefficients in ascending degree.
pub fn eval_operator_poly(coeffs: &[SpectralOperator], x: C64) -> SpectralOperator {
    let mut value = coeffs[0].scale(C64::default());
    for c in coeffs.iter().rev() {
        value = &value.scale(x) + c;
    }
    value
}

/// The Hamiltonian by two routes and the affine fit between them.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    /// `t'(0) t(0)^{-1}` from the polynomial coefficients.
    pub log_derivative: SpectralOperator,
    /// Sum of local terms built from `R'(0)` and `K'(0)`.
    pub local_sum: SpectralOperator,
    /// `log_derivative ~ scale * local_sum + shift * Id`.
    pub scale: C64,
    pub shift: C64,
    pub fit_residual: f64,
}

/// `P R'(0) / 2` on a pair of vector sites.
pub fn local_term() -> SpectralOperator {
    // R is quadratic, so the central difference is exact.
    let d = &r_eval(RFamily::VV, re(1.0)) - &r_eval(RFamily::VV, re(-1.0));
    flip(6, 6).matmul(&d).scale(re(0.25))
}

pub fn hamiltonian(spec: &ChainSpec) -> Result<Hamiltonian, TransferError> {
    if spec.theta.iter().any(|&t| t != 0.0) {
        return Err(TransferError::NotHomogeneous);
    }
    let n = spec.n();
    if n == 0 {
        return Err(TransferError::Empty);
    }
    let dims = spec.quantum_dims();
    let (coeffs, _) = transfer_fit(TransferKind::Fundamental, spec, 0)?;
    let t0 = transfer(TransferKind::Fundamental, re(0.0), spec)?;
    let inv = linalg::inverse(&t0).map_err(|_| TransferError::SingularAtZero)?;
    let log_derivative = coeffs[1].matmul(&inv);
    let h = local_term();
    let mut local_sum = SpectralOperator::quantum_identity(&dims).scale(C64::default());
    match spec.boundary {
        Boundary::Periodic => {
            if n < 2 {
                return Err(TransferError::TooShort);
            }
            for k in 0..n {
                local_sum = &local_sum + &embed(&h, &[k, (k + 1) % n], &dims)?;
            }
        }
        Boundary::Open(params) => {
            let left = params.left();
            for k in 0..n.saturating_sub(1) {
                local_sum = &local_sum + &embed(&h, &[k, k + 1], &dims)?;
            }
            let dk = (&k_v(re(1.0), &left) - &k_v(re(-1.0), &left)).scale(re(0.5));
            let xi = left.regular_value();
            if xi == 0.0 {
                return Err(TransferError::SingularAtZero);
            }
            local_sum = &local_sum + &embed(&dk.scale(re(1.0 / (2.0 * xi))), &[n - 1], &dims)?;
            let kb = k_v_dual(re(0.0), &params);
            let mut ext = dims.clone();
            ext.push(6);
            let bond = embed(&h, &[0, n], &ext)?.left_apply(&kb, &[n])?;
            local_sum = &local_sum + &partial_trace(&bond, n)?.scale(re(1.0) / kb.trace());
        }
    }
    let (scale, shift) = affine_fit(&log_derivative, &local_sum)?;
    let fitted = &local_sum.scale(scale) + &SpectralOperator::quantum_identity(&dims).scale(shift);
    let fit_residual = rel_residual(&log_derivative, &fitted)?;
    Ok(Hamiltonian {
        log_derivative,
        local_sum,
        scale,
        shift,
        fit_residual,
    })
}

/// Least-squares `(a, b)` with `target ~ a * basis + b * Id`.
fn affine_fit(target: &SpectralOperator, basis: &SpectralOperator) -> Result<(C64, C64), TensorError> {
    let n = target.dim();
    let ii = re(n as f64);
    let (mut hh, mut hi, mut th, mut ti) = (C64::default(), C64::default(), C64::default(), C64::default());
    for i in 0..n {
        for j in 0..n {
            let b = basis.get(i, j);
            let t = target.get(i, j);
            hh += b.conj() * b;
            th += b.conj() * t;
            if i == j {
                hi += b.conj();
                ti += t;
            }
        }
    }
    let sol = linalg::solve(&[vec![hh, hi], vec![hi.conj(), ii]], &[th, ti])?;
    Ok((sol[0], sol[1]))
}

/// One evaluated identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub id: String,
    pub residual: f64,
    pub samples: usize,
    pub description: String,
}

impl IdentityCheck {
    fn new(id: impl Into<String>, residual: f64, samples: usize, description: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            residual,
            samples,
            description: description.into(),
        }
    }
}

fn prod_over(theta: &[f64], f: impl Fn(f64) -> C64) -> C64 {
    theta.iter().map(|&t| f(t)).product()
}

/// Commutativity of the whole family at two generic points.
pub fn commutativity(spec: &ChainSpec, u: C64, v: C64) -> Result<f64, TensorError> {
    let at_u = TransferKind::ALL.map(|k| transfer(k, u, spec));
    let at_v = TransferKind::ALL.map(|k| transfer(k, v, spec));
    let mut worst: f64 = 0.0;
    for a in at_u.iter() {
        let a = a.as_ref().map_err(Clone::clone)?;
        for b in at_v.iter() {
            let b = b.as_ref().map_err(Clone::clone)?;
            worst = worst.max(rel_residual(&a.matmul(b), &b.matmul(a))?);
        }
    }
    Ok(worst)
}

/// Scalar coefficients of the four product identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductScalars {
    /// `t(x) t(x-2) = shift_two * Id`.
    pub shift_two: C64,
    /// `t(x) t(x-1) = shift_one * t+(x-1/2) t-(x-1/2)`.
    pub shift_one: C64,
    /// `t(x) t+-(x-3/2) = fused * t-+(x-1/2)`.
    pub fused: C64,
}

/// Points where the product identities hold: every `theta_j`, and for open
/// chains also every `-theta_j`.
pub fn identity_points(spec: &ChainSpec) -> Vec<f64> {
    let mut pts = spec.theta.clone();
    if spec.boundary.is_open() {
        pts.extend(spec.theta.iter().map(|t| -t));
    }
    pts
}

pub fn product_scalars(spec: &ChainSpec, x: C64) -> ProductScalars {
    match spec.boundary {
        Boundary::Periodic => {
            let pr = |f: &dyn Fn(C64) -> C64| prod_over(&spec.theta, |ti| f(x - ti));
            let fused = pr(&weights::fusion_prefactor);
            ProductScalars {
                shift_two: pr(&|y| weights::same(y) * weights::conjugate(y - 2.0)),
                shift_one: fused,
                fused,
            }
        }
        Boundary::Open(params) => {
            let (left, right) = (params.left(), params.right());
            let hh = |y: C64| left.fusion_scalar(y) * right.fusion_scalar(y);
            let pr = |f: &dyn Fn(C64) -> C64| prod_over(&spec.theta, |ti| f(x - ti) * f(x + ti));
            let ratio = (x - 2.0) * (x + 2.0) * (x - 1.5) * (x + 1.5) / ((x - 1.0) * (x + 1.0) * (x - 0.5) * (x + 0.5));
            let base = pr(&weights::fusion_prefactor) * hh(x);
            ProductScalars {
                shift_two: ratio / 16.0 * hh(x) * hh(-x) * pr(&|y| weights::same(y) * weights::conjugate(y - 2.0)),
                shift_one: (x - 1.0) * (x + 2.0) / ((x - 0.5) * (x + 1.5)) * base,
                fused: (x - 1.5) * (x + 2.0) / ((x - 0.5) * (x + 1.0)) / 4.0 * base,
            }
        }
    }
}

/// Open-chain special values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValues {
    /// `t(0)` is this multiple of the identity.
    pub at_zero: C64,
    /// `t(-1/2) = half_ratio * t+-(-1)`.
    pub half_ratio: C64,
    /// `t+-(0)` is this multiple of the identity.
    pub fused_at_zero: C64,
}

pub fn special_values(spec: &ChainSpec, params: &BoundaryParams) -> SpecialValues {
    let rho_v = prod_over(&spec.theta, |ti| weights::vector_unitarity(re(-ti)));
    let rho_s = prod_over(&spec.theta, |ti| weights::spinor_unitarity(re(-ti)));
    let (c2, c2p) = (params.c2, params.c2p);
    SpecialValues {
        at_zero: rho_v * (1.5 * (2.0 - c2) * (2.0 + c2) * (2.0 - c2p) * (2.0 + c2p)),
        half_ratio: rho_s * 6.0,
        fused_at_zero: rho_s * 4.0,
    }
}

/// Leading coefficient of the transfer polynomial (a multiple of the identity).
pub fn leading_coefficient(kind: TransferKind, spec: &ChainSpec) -> f64 {
    match (spec.boundary, kind) {
        (Boundary::Periodic, TransferKind::Fundamental) => 6.0,
        (Boundary::Periodic, _) => 4.0,
        (Boundary::Open(p), TransferKind::Fundamental) => p.open_leading(),
        (Boundary::Open(p), _) => p.open_fused_leading(),
    }
}

/// Relative miss of a leading coefficient; a vanishing expectation is
/// judged against the largest coefficient.
pub fn leading_miss(top_miss: f64, expect: f64, largest: f64) -> f64 {
    let scale = if expect.abs() > 1e-12 { expect.abs() } else { largest };
    top_miss / scale
}

/// All operator-level identities of the chain.
pub fn operator_identities(spec: &ChainSpec) -> Result<Vec<IdentityCheck>, TensorError> {
    let mut out = Vec::new();
    out.push(IdentityCheck::new(
        "commutativity",
        commutativity(spec, re(0.41), re(1.13))?.max(commutativity(spec, re(-0.73), re(0.29))?),
        2,
        "all pairs of t, t+, t- at (0.41, 1.13) and (-0.73, 0.29)",
    ));
    let id = SpectralOperator::quantum_identity(&spec.quantum_dims());
    let t = |k, u: C64| transfer(k, u, spec);
    use TransferKind::{Fundamental as F, Minus as M, Plus as P};

    if let Boundary::Open(params) = spec.boundary {
        let cross_points = [0.37, -0.81, 1.23];
        let mut cross = 0.0f64;
        let mut cross_fused = 0.0f64;
        for &u in &cross_points {
            let u = re(u);
            cross = cross.max(rel_residual(&t(F, -u - 2.0)?, &t(F, u)?)?);
            cross_fused = cross_fused.max(rel_residual(&t(P, -u - 2.0)?, &t(M, u)?)?);
            cross_fused = cross_fused.max(rel_residual(&t(M, -u - 2.0)?, &t(P, u)?)?);
        }
        out.push(IdentityCheck::new("crossing", cross, cross_points.len(), "t(-u-2) against t(u)"));
        out.push(IdentityCheck::new(
            "crossing_fused",
            cross_fused,
            cross_points.len(),
            "t+(-u-2) against t-(u) and t-(-u-2) against t+(u)",
        ));
        let sv = special_values(spec, &params);
        out.push(IdentityCheck::new(
            "special_value_zero",
            residual_to_scalar(&t(F, re(0.0))?, sv.at_zero),
            1,
            "t(0) against its scalar value",
        ));
        let half = t(F, re(-0.5))?;
        let mut special_half = 0.0f64;
        let mut special_fused = 0.0f64;
        for kind in [P, M] {
            special_half = special_half.max(rel_residual(&half, &t(kind, re(-1.0))?.scale(sv.half_ratio))?);
            special_fused = special_fused.max(residual_to_scalar(&t(kind, re(0.0))?, sv.fused_at_zero));
        }
        out.push(IdentityCheck::new("special_value_half", special_half, 2, "t(-1/2) against t+(-1) and t-(-1)"));
        out.push(IdentityCheck::new(
            "special_value_fused_zero",
            special_fused,
            2,
            "t+(0) and t-(0) against their scalar value",
        ));
    }

    let points = identity_points(spec);
    let mut worst = [0.0f64; 4];
    for &x in &points {
        let x = re(x);
        let c = product_scalars(spec, x);
        let tx = t(F, x)?;
        let tp = t(P, x - 0.5)?;
        let tm = t(M, x - 0.5)?;
        worst[0] = worst[0].max(rel_residual(&tx.matmul(&t(F, x - 2.0)?), &id.scale(c.shift_two))?);
        worst[1] = worst[1].max(rel_residual(&tx.matmul(&t(F, x - 1.0)?), &tp.matmul(&tm).scale(c.shift_one))?);
        worst[2] = worst[2].max(rel_residual(&tx.matmul(&t(P, x - 1.5)?), &tm.scale(c.fused))?);
        worst[3] = worst[3].max(rel_residual(&tx.matmul(&t(M, x - 1.5)?), &tp.scale(c.fused))?);
    }
    let names = ["product_shift_two", "product_shift_one", "product_plus", "product_minus"];
    for (name, w) in names.iter().zip(worst) {
        out.push(IdentityCheck::new(*name, w, points.len(), "operator identity at every identity point"));
    }

    for kind in TransferKind::ALL {
        let (coeffs, held_out) = transfer_fit(kind, spec, 2)?;
        let expect = leading_coefficient(kind, spec);
        let top = coeffs.last().expect("nonempty");
        let largest = coeffs.iter().map(SpectralOperator::max_abs).fold(0.0, f64::max);
        out.push(IdentityCheck::new(
            format!("leading_{}", kind.name()),
            leading_miss((top - &id.scale(re(expect))).max_abs(), expect, largest),
            degree_bound(kind, spec) + 3,
            format!("top coefficient relative to {expect:.6} Id"),
        ));
        out.push(IdentityCheck::new(
            format!("degree_{}", kind.name()),
            held_out,
            degree_bound(kind, spec) + 3,
            "two held-out nodes beyond the degree bound",
        ));
    }
    Ok(out)
}
