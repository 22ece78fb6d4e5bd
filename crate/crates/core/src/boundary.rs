//! Reflection matrices, their duals, reflection equations and K-fusion.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{projector, spinor_pair_intertwiner, ProjectorKind};
use crate::linalg;
use crate::rmatrix::{r_eval, RFamily};
use crate::tensor::{flip, re, rel_residual, Role, SpectralOperator, TensorError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("{field}: c2^2 - c1 c3 = {value} is negative; only real square roots are supported")]
    NegativeDiscriminant { field: &'static str, value: f64 },
    #[error("{0} must be nonzero")]
    ZeroCoupling(&'static str),
    #[error("{0} must be +1 or -1")]
    BadSign(&'static str),
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Free parameters of the two boundaries. Unprimed fields belong to the
/// reflection matrix, primed (`*p`) ones to the dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c1p: f64,
    pub c2p: f64,
    pub c3p: f64,
    pub sign_c: i8,
    pub sign_cp: i8,
}

/// One boundary: `(c, c1, c2, c3)` with `c^2 = c2^2 - c1 c3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySide {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BoundarySide {
    pub fn new(c1: f64, c2: f64, c3: f64, sign: i8) -> Self {
        let c = f64::from(sign) * (c2 * c2 - c1 * c3).max(0.0).sqrt();
        Self { c, c1, c2, c3 }
    }

    /// `(2 - c2 - 2 c2 u)(2 + c2 + 2 c2 u)`.
    pub fn fusion_scalar(&self, u: C64) -> C64 {
        let c2 = self.c2;
        (2.0 - c2 - u * (2.0 * c2)) * (2.0 + c2 + u * (2.0 * c2))
    }

    /// Value of `K^v(0)` as a multiple of the identity, `(4 - c2^2)/2`.
    pub fn regular_value(&self) -> f64 {
        (4.0 - self.c2 * self.c2) / 2.0
    }
}

impl BoundaryParams {
    /// The retained fixture `(0,1,1)` with `(0,2,1)`; signs `(+,+)` give a
    /// vanishing inhomogeneous coupling.
    pub fn fixture(sign_c: i8, sign_cp: i8) -> Self {
        Self {
            c1: 0.0,
            c2: 1.0,
            c3: 1.0,
            c1p: 0.0,
            c2p: 2.0,
            c3p: 1.0,
            sign_c,
            sign_cp,
        }
    }

    /// A generic parameter set with non-commuting `K` and its dual.
    pub fn generic() -> Self {
        Self {
            c1: 0.3,
            c2: 1.1,
            c3: 0.7,
            c1p: -0.4,
            c2p: 0.6,
            c3p: 1.3,
            sign_c: 1,
            sign_cp: -1,
        }
    }

    /// Random valid parameters, for sampling.
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut side = || loop {
            let (c1, c2, c3) = (rng.random_range(-1.0..1.0), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let c3: f64 = c3;
            if c3.abs() > 0.2 && c2 * c2 - c1 * c3 > 0.05 {
                break (c1, c2, c3, if rng.random_bool(0.5) { 1 } else { -1 });
            }
        };
        let (c1, c2, c3, sign_c) = side();
        let (c1p, c2p, c3p, sign_cp) = side();
        Self { c1, c2, c3, c1p, c2p, c3p, sign_c, sign_cp }
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c1p", self.c1p),
            ("c2p", self.c2p),
            ("c3p", self.c3p),
        ] {
            if !v.is_finite() {
                return Err(BoundaryError::NotFinite(name));
            }
        }
        for (name, s) in [("sign_c", self.sign_c), ("sign_cp", self.sign_cp)] {
            if s != 1 && s != -1 {
                return Err(BoundaryError::BadSign(name));
            }
        }
        for (field, value) in [
            ("c1, c2, c3", self.c2 * self.c2 - self.c1 * self.c3),
            ("c1p, c2p, c3p", self.c2p * self.c2p - self.c1p * self.c3p),
        ] {
            if value < 0.0 {
                return Err(BoundaryError::NegativeDiscriminant { field, value });
            }
        }
        if self.c3 == 0.0 {
            return Err(BoundaryError::ZeroCoupling("c3"));
        }
        if self.c3p == 0.0 {
            return Err(BoundaryError::ZeroCoupling("c3p"));
        }
        Ok(())
    }

    pub fn left(&self) -> BoundarySide {
        BoundarySide::new(self.c1, self.c2, self.c3, self.sign_c)
    }

    pub fn right(&self) -> BoundarySide {
        BoundarySide::new(self.c1p, self.c2p, self.c3p, self.sign_cp)
    }

    /// `1 + c2 u`.
    pub fn left_rising(&self, u: C64) -> C64 {
        1.0 + u * self.c2
    }

    /// `1 - c2 u`.
    pub fn left_falling(&self, u: C64) -> C64 {
        1.0 - u * self.c2
    }

    /// `1 - c2' u`.
    pub fn right_falling(&self, u: C64) -> C64 {
        1.0 - u * self.c2p
    }

    /// `1 + c2' u`.
    pub fn right_rising(&self, u: C64) -> C64 {
        1.0 + u * self.c2p
    }

    /// Coefficient of the inhomogeneous term of the open T-Q relation.
    pub fn inhomogeneous_coupling(&self) -> f64 {
        let (l, r) = (self.left(), self.right());
        let (c, c2, c3, cp, c2p, c3p) = (l.c, l.c2, l.c3, r.c, r.c2, r.c3);
        (cp * c3 - c3p * c - c2p * c3 - c3p * c2) * (cp * c3 - c3p * c + c2p * c3 + c3p * c2) / (c3 * c3p)
            + 4.0 * c2 * c2p
    }

    /// Leading coefficient of the open fundamental transfer matrix.
    pub fn open_leading(&self) -> f64 {
        let (l, r) = (self.left(), self.right());
        let (c, c2, c3, cp, c2p, c3p) = (l.c, l.c2, l.c3, r.c, r.c2, r.c3);
        -8.0 * c2
            * c2p
            * (c3p * c3p * c * c + cp * cp * c3 * c3 - c3 * c3 * c2p * c2p - c2 * c2 * c3p * c3p - 2.0 * c * cp * c3 * c3p
                - c2 * c3 * c2p * c3p)
            / (c3 * c3p)
    }

    /// Leading coefficient of the open fused transfer matrices.
    pub fn open_fused_leading(&self) -> f64 {
        let (l, r) = (self.left(), self.right());
        let (c, c2, c3, cp, c2p, c3p) = (l.c, l.c2, l.c3, r.c, r.c2, r.c3);
        (cp * c3 - c3p * c - c2p * c3 - c3p * c2) * (cp * c3 - c3p * c + c2p * c3 + c3p * c2) / (c3 * c3p)
    }
}

/// The 6 x 6 vector reflection matrix.
pub fn k_v(u: C64, side: &BoundarySide) -> SpectralOperator {
    let BoundarySide { c, c1, c2, c3 } = *side;
    let mut k = SpectralOperator::zeros(&[6], &[Role::Auxiliary]);
    let two = re(2.0);
    let plus = two + c2 + u * (2.0 * c2);
    let minus = two - c2 - u * (2.0 * c2);
    k.set(0, 0, minus * plus / 2.0);
    k.set(1, 1, (two - c2 - u * (2.0 * c)) * plus / 2.0);
    k.set(1, 3, -(u * c1) * plus);
    k.set(2, 2, (two + c2 - u * (2.0 * c)) * minus / 2.0);
    k.set(2, 4, u * c1 * minus);
    k.set(3, 1, -(u * c3) * plus);
    k.set(3, 3, (two - c2 + u * (2.0 * c)) * plus / 2.0);
    k.set(4, 2, -(u * c3) * (-two + c2 + u * (2.0 * c2)));
    k.set(4, 4, (two + c2 + u * (2.0 * c)) * minus / 2.0);
    k.set(5, 5, minus * plus / 2.0);
    k
}

/// Dual vector reflection matrix: `k_v(-u-2)` with the primed parameters.
pub fn k_v_dual(u: C64, params: &BoundaryParams) -> SpectralOperator {
    k_v(-u - 2.0, &params.right())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn flipped(self) -> Self {
        match self {
            Chirality::Plus => Chirality::Minus,
            Chirality::Minus => Chirality::Plus,
        }
    }

    pub fn family(self) -> RFamily {
        match self {
            Chirality::Plus => RFamily::SpV,
            Chirality::Minus => RFamily::SmV,
        }
    }

    pub fn projector(self) -> ProjectorKind {
        match self {
            Chirality::Plus => ProjectorKind::SpinorPlus,
            Chirality::Minus => ProjectorKind::SpinorMinus,
        }
    }
}

/// The 4 x 4 spinor reflection matrices.
pub fn k_spinor(chirality: Chirality, u: C64, side: &BoundarySide) -> SpectralOperator {
    let BoundarySide { c, c1, c2, c3 } = *side;
    let one = re(1.0);
    let zero = C64::default();
    let rows = match chirality {
        Chirality::Plus => [
            [one - u * c, u * c1, zero, zero],
            [u * c3, one + u * c, zero, zero],
            [zero, zero, one + u * c2, zero],
            [zero, zero, zero, one - u * c2],
        ],
        Chirality::Minus => [
            [one + u * c2, zero, zero, zero],
            [zero, one - u * c2, zero, zero],
            [zero, zero, one - u * c, u * c1],
            [zero, zero, u * c3, one + u * c],
        ],
    };
    SpectralOperator::from_fn(&[4], &[Role::Auxiliary], |i, j| rows[i][j])
}

pub fn k_spinor_dual(chirality: Chirality, u: C64, params: &BoundaryParams) -> SpectralOperator {
    k_spinor(chirality, -u - 2.0, &params.right())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionId {
    Vector,
    VectorDual,
    SpinorVector(Chirality),
    SpinorVectorDual(Chirality),
    SpinorSpinor,
}

impl ReflectionId {
    pub const ALL: [ReflectionId; 7] = [
        ReflectionId::Vector,
        ReflectionId::VectorDual,
        ReflectionId::SpinorVector(Chirality::Plus),
        ReflectionId::SpinorVector(Chirality::Minus),
        ReflectionId::SpinorVectorDual(Chirality::Plus),
        ReflectionId::SpinorVectorDual(Chirality::Minus),
        ReflectionId::SpinorSpinor,
    ];

    pub fn name(self) -> String {
        match self {
            ReflectionId::Vector => "vector".into(),
            ReflectionId::VectorDual => "vector_dual".into(),
            ReflectionId::SpinorVector(c) => format!("spinor_{}_vector", chirality_name(c)),
            ReflectionId::SpinorVectorDual(c) => format!("spinor_{}_vector_dual", chirality_name(c)),
            ReflectionId::SpinorSpinor => "spinor_spinor".into(),
        }
    }
}

pub(crate) fn chirality_name(c: Chirality) -> &'static str {
    match c {
        Chirality::Plus => "plus",
        Chirality::Minus => "minus",
    }
}

fn chain(dims: &[usize], ops: &[(&SpectralOperator, &[usize])]) -> Result<SpectralOperator, TensorError> {
    let mut acc = SpectralOperator::quantum_identity(dims);
    for (op, pos) in ops.iter().rev() {
        acc = acc.left_apply(op, pos)?;
    }
    Ok(acc)
}

/// Residual of `R(a) K1 R'(b) K2 = K2 R(b) K1 R'(a)` where `R'` is `R` with
/// its factors exchanged for equal spaces and `R` itself for mixed ones.
fn reflection_residual(
    family: RFamily,
    a: C64,
    b: C64,
    k1: &SpectralOperator,
    k2: &SpectralOperator,
) -> Result<f64, TensorError> {
    let dims = [family.aux_dim(), family.phys_dim()];
    let r = |x: C64| r_eval(family, x);
    let r_rev = |x: C64| {
        if dims[0] == dims[1] {
            flip(dims[0], dims[0]).matmul(&r_eval(family, x)).matmul(&flip(dims[0], dims[0]))
        } else {
            r_eval(family, x)
        }
    };
    let full: &[usize] = &[0, 1];
    let lhs = chain(&dims, &[(&r(a), full), (k1, &[0]), (&r_rev(b), full), (k2, &[1])])?;
    let rhs = chain(&dims, &[(k2, &[1]), (&r(b), full), (k1, &[0]), (&r_rev(a), full)])?;
    rel_residual(&lhs, &rhs)
}

pub fn check_reflection_equation(which: ReflectionId, u: C64, v: C64, params: &BoundaryParams) -> Result<f64, TensorError> {
    let left = params.left();
    match which {
        ReflectionId::Vector => reflection_residual(RFamily::VV, u - v, u + v, &k_v(u, &left), &k_v(v, &left)),
        ReflectionId::VectorDual => {
            reflection_residual(RFamily::VV, -u + v, -u - v - 4.0, &k_v_dual(u, params), &k_v_dual(v, params))
        }
        ReflectionId::SpinorVector(ch) => {
            reflection_residual(ch.family(), u - v, u + v, &k_spinor(ch, u, &left), &k_v(v, &left))
        }
        ReflectionId::SpinorVectorDual(ch) => reflection_residual(
            ch.family(),
            -u + v,
            -u - v - 4.0,
            &k_spinor_dual(ch, u, params),
            &k_v_dual(v, params),
        ),
        ReflectionId::SpinorSpinor => reflection_residual(
            RFamily::SS,
            u - v,
            u + v,
            &k_spinor(Chirality::Plus, u, &left),
            &k_spinor(Chirality::Plus, v, &left),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KFusionId {
    Singlet,
    SingletDual,
    Adjoint,
    AdjointDual,
    Spinor(Chirality),
    SpinorDual(Chirality),
    VectorFromSpinors,
}

impl KFusionId {
    pub const ALL: [KFusionId; 9] = [
        KFusionId::Singlet,
        KFusionId::SingletDual,
        KFusionId::Adjoint,
        KFusionId::AdjointDual,
        KFusionId::Spinor(Chirality::Plus),
        KFusionId::Spinor(Chirality::Minus),
        KFusionId::SpinorDual(Chirality::Plus),
        KFusionId::SpinorDual(Chirality::Minus),
        KFusionId::VectorFromSpinors,
    ];

    pub fn name(self) -> String {
        match self {
            KFusionId::Singlet => "singlet".into(),
            KFusionId::SingletDual => "singlet_dual".into(),
            KFusionId::Adjoint => "adjoint".into(),
            KFusionId::AdjointDual => "adjoint_dual".into(),
            KFusionId::Spinor(c) => format!("spinor_{}", chirality_name(c)),
            KFusionId::SpinorDual(c) => format!("spinor_{}_dual", chirality_name(c)),
            KFusionId::VectorFromSpinors => "vector_from_spinors".into(),
        }
    }
}

/// Both sides of a K-fusion identity at `u`, compressed to the fused space
/// where one appears.
pub fn k_fusion_sides(
    id: KFusionId,
    u: C64,
    params: &BoundaryParams,
) -> Result<(SpectralOperator, SpectralOperator), TensorError> {
    let (left, right) = (params.left(), params.right());
    let vv = |x: C64| r_eval(RFamily::VV, x);
    let vv_rev = |x: C64| flip(6, 6).matmul(&vv(x)).matmul(&flip(6, 6));
    let full: &[usize] = &[0, 1];
    let same_layout = |lhs: &SpectralOperator, rhs: SpectralOperator| rhs.relabel(lhs.factors().to_vec(), lhs.roles().to_vec());
    match id {
        KFusionId::Singlet => {
            let p = projector(ProjectorKind::Singlet).matrix;
            let lhs = chain(&[6, 6], &[(&p, full), (&k_v(u, &left), &[0]), (&vv(2.0 * u - 2.0), full), (&k_v(u - 2.0, &left), &[1]), (&p, full)])?;
            let scalar = (u - 2.0) * (u - 1.5) * left.fusion_scalar(u) * left.fusion_scalar(-u);
            let rhs = p.scale(scalar);
            Ok((lhs.clone(), same_layout(&lhs, rhs)?))
        }
        KFusionId::SingletDual => {
            let p = projector(ProjectorKind::Singlet).matrix;
            let lhs = chain(
                &[6, 6],
                &[(&p, full), (&k_v_dual(u - 2.0, params), &[0]), (&vv_rev(-2.0 * u - 2.0), full), (&k_v_dual(u, params), &[1]), (&p, full)],
            )?;
            let scalar = (u + 2.0) * (u + 1.5) * right.fusion_scalar(u) * right.fusion_scalar(-u);
            let rhs = p.scale(scalar);
            Ok((lhs.clone(), same_layout(&lhs, rhs)?))
        }
        KFusionId::Adjoint | KFusionId::AdjointDual => {
            let proj = projector(ProjectorKind::Adjoint);
            let p = &proj.matrix;
            let s = spinor_pair_intertwiner();
            let s_inv = linalg::inverse(&s)?;
            let pair: &[usize] = &[0, 1];
            let (full_lhs, rhs) = if id == KFusionId::Adjoint {
                let l = chain(&[6, 6], &[(p, full), (&k_v(u, &left), &[0]), (&vv_rev(2.0 * u - 1.0), full), (&k_v(u - 1.0, &left), &[1]), (p, full)])?;
                let r = chain(
                    &[4, 4],
                    &[
                        (&s, pair),
                        (&k_spinor(Chirality::Plus, u - 0.5, &left), &[0]),
                        (&r_eval(RFamily::SpSm, 2.0 * u - 1.0), pair),
                        (&k_spinor(Chirality::Minus, u - 0.5, &left), &[1]),
                        (&s_inv, pair),
                    ],
                )?
                .scale(2.0 * (u - 1.0) * left.fusion_scalar(u));
                (l, r)
            } else {
                let l = chain(
                    &[6, 6],
                    &[(p, full), (&k_v_dual(u - 1.0, params), &[1]), (&vv(-2.0 * u - 3.0), full), (&k_v_dual(u, params), &[0]), (p, full)],
                )?;
                let r = chain(
                    &[4, 4],
                    &[
                        (&s, pair),
                        (&k_spinor_dual(Chirality::Minus, u - 0.5, params), &[1]),
                        (&r_eval(RFamily::SpSm, -2.0 * u - 3.0), pair),
                        (&k_spinor_dual(Chirality::Plus, u - 0.5, params), &[0]),
                        (&s_inv, pair),
                    ],
                )?
                .scale(-2.0 * (u + 2.0) * right.fusion_scalar(u));
                (l, r)
            };
            let lhs = proj.compress(&full_lhs, 0)?;
            Ok((lhs.clone(), same_layout(&lhs, rhs)?))
        }
        KFusionId::Spinor(ch) | KFusionId::SpinorDual(ch) => {
            let proj = projector(ch.projector());
            let p = &proj.matrix;
            let f = ch.family();
            let (full_lhs, rhs) = if matches!(id, KFusionId::Spinor(_)) {
                let l = chain(
                    &[4, 6],
                    &[(p, full), (&k_v(u, &left), &[1]), (&r_eval(f, 2.0 * u - 1.5), full), (&k_spinor(ch, u - 1.5, &left), &[0]), (p, full)],
                )?;
                let r = k_spinor(ch.flipped(), u - 0.5, &left).scale((u - 1.5) * left.fusion_scalar(u));
                (l, r)
            } else {
                let l = chain(
                    &[4, 6],
                    &[
                        (p, full),
                        (&k_spinor_dual(ch, u - 1.5, params), &[0]),
                        (&r_eval(f, -2.0 * u - 2.5), full),
                        (&k_v_dual(u, params), &[1]),
                        (p, full),
                    ],
                )?;
                let r = k_spinor_dual(ch.flipped(), u - 0.5, params).scale(-(u + 2.0) * right.fusion_scalar(u));
                (l, r)
            };
            let lhs = proj.compress(&full_lhs, 0)?;
            let lhs = lhs.relabel(vec![4], vec![Role::Auxiliary])?;
            Ok((lhs.clone(), same_layout(&lhs, rhs)?))
        }
        KFusionId::VectorFromSpinors => {
            let proj = projector(ProjectorKind::Antisymmetric);
            let p = &proj.matrix;
            let full_lhs = chain(
                &[4, 4],
                &[
                    (p, full),
                    (&k_spinor(Chirality::Plus, u + 0.5, &left), &[1]),
                    (&r_eval(RFamily::SS, 2.0 * u), full),
                    (&k_spinor(Chirality::Plus, u - 0.5, &left), &[0]),
                    (p, full),
                ],
            )?;
            let lhs = proj.compress(&full_lhs, 0)?.relabel(vec![6], vec![Role::Auxiliary])?;
            let rhs = k_v(u, &left).scale(u - 0.5);
            Ok((lhs.clone(), same_layout(&lhs, rhs)?))
        }
    }
}

pub fn check_k_fusion(id: KFusionId, u: C64, params: &BoundaryParams) -> Result<f64, TensorError> {
    let (lhs, rhs) = k_fusion_sides(id, u, params)?;
    rel_residual(&lhs, &rhs)
}

/// `max |[K^v(u), K^v_dual(u)]|`.
pub fn commutator_witness(u: C64, params: &BoundaryParams) -> f64 {
    k_v(u, &params.left()).commutator(&k_v_dual(u, params)).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn regular_point_is_scalar() {
        let side = BoundarySide::new(0.0, 1.0, 1.0, 1);
        let k = k_v(re(0.0), &side);
        let expect = SpectralOperator::identity(&[6], &[Role::Auxiliary]).scale(re(1.5));
        assert_eq!(rel_residual(&k, &expect).unwrap(), 0.0);
        let g = BoundaryParams::generic().left();
        let expect = SpectralOperator::identity(&[6], &[Role::Auxiliary]).scale(re(g.regular_value()));
        assert!(rel_residual(&k_v(re(0.0), &g), &expect).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_when_off_couplings_vanish() {
        let side = BoundarySide { c: 1.3, c1: 0.0, c2: 1.3, c3: 0.0 };
        let k = k_v(re(0.7), &side);
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(k.get(i, j), C64::default());
                }
            }
        }
    }

    #[test]
    fn worked_entries() {
        let side = BoundarySide::new(0.0, 1.0, 1.0, 1);
        let k = k_v(re(1.0), &side);
        assert_eq!(k.get(1, 3), C64::default());
        assert_eq!(k.get(3, 1), re(-5.0));
        let side = BoundarySide { c: 1.0, c1: 2.0, c2: 1.0, c3: 0.5 };
        let ks = k_spinor(Chirality::Plus, re(1.0), &side);
        assert_eq!([ks.get(0, 0), ks.get(0, 1), ks.get(1, 0), ks.get(1, 1)], [re(0.0), re(2.0), re(0.5), re(2.0)]);
        assert_eq!(k_spinor(Chirality::Plus, re(0.0), &side), SpectralOperator::identity(&[4], &[Role::Auxiliary]));
        let km = k_spinor(Chirality::Minus, re(0.9), &side);
        assert_eq!(km.get(0, 1), C64::default());
        assert_ne!(km.get(2, 3), C64::default());
    }

    #[test]
    fn dual_substitution() {
        let p = BoundaryParams::generic();
        assert_eq!(k_v_dual(re(-1.0), &p), k_v(re(-1.0), &p.right()));
        let same = BoundaryParams { c1p: p.c1, c2p: p.c2, c3p: p.c3, sign_cp: p.sign_c, ..p };
        assert_eq!(k_v_dual(re(0.0), &same), k_v(re(-2.0), &same.left()));
        assert!(commutator_witness(re(0.4), &p) > 1e-3);
        assert!(commutator_witness(re(0.5), &p) > 1e-3);
    }

    #[test]
    fn fixture_couplings() {
        assert_eq!(BoundaryParams::fixture(1, 1).inhomogeneous_coupling(), 0.0);
        assert_eq!(BoundaryParams::fixture(-1, 1).inhomogeneous_coupling(), 8.0);
    }

    #[test]
    fn validation() {
        assert!(BoundaryParams::fixture(1, 1).validate().is_ok());
        let bad = BoundaryParams { c3: 0.0, ..BoundaryParams::generic() };
        assert_eq!(bad.validate(), Err(BoundaryError::ZeroCoupling("c3")));
        let bad = BoundaryParams { c1: 4.0, c3: 1.0, c2: 1.0, ..BoundaryParams::generic() };
        assert!(matches!(bad.validate(), Err(BoundaryError::NegativeDiscriminant { .. })));
        let bad = BoundaryParams { sign_c: 0, ..BoundaryParams::generic() };
        assert_eq!(bad.validate(), Err(BoundaryError::BadSign("sign_c")));
    }

    #[test]
    fn worked_reflection_points() {
        let p = BoundaryParams::generic();
        assert!(check_reflection_equation(ReflectionId::Vector, re(0.6), re(-0.2), &p).unwrap() < 1e-9);
        assert!(check_reflection_equation(ReflectionId::Vector, re(0.45), re(0.45), &p).unwrap() < 1e-12);
        assert!(check_reflection_equation(ReflectionId::VectorDual, re(0.3), re(0.8), &p).unwrap() < 1e-9);
    }

    #[test]
    fn worked_fusion_points() {
        let p = BoundaryParams::generic();
        let (lhs, _) = k_fusion_sides(KFusionId::Singlet, re(0.8), &p).unwrap();
        assert!(linalg::rank(&lhs, 1e-8) <= 1);
        assert!(check_k_fusion(KFusionId::Singlet, re(0.8), &p).unwrap() < 1e-10);
        assert!(check_k_fusion(KFusionId::Spinor(Chirality::Plus), re(1.1), &p).unwrap() < 1e-9);
        let (lhs, _) = k_fusion_sides(KFusionId::VectorFromSpinors, re(0.5), &p).unwrap();
        assert!(lhs.max_abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn reflection_equations_hold(seed in 0u64..10_000, u in -2.0f64..2.0, v in -2.0f64..2.0) {
            let p = BoundaryParams::random(&mut ChaCha8Rng::seed_from_u64(seed));
            for id in ReflectionId::ALL {
                let r = check_reflection_equation(id, re(u), re(v), &p).unwrap();
                prop_assert!(r < 1e-9, "{id:?} {p:?} ({u},{v}): {r}");
            }
        }

        #[test]
        fn k_fusion_identities_hold(seed in 0u64..10_000, u in -2.0f64..2.0) {
            let p = BoundaryParams::random(&mut ChaCha8Rng::seed_from_u64(seed));
            for id in KFusionId::ALL {
                let r = check_k_fusion(id, re(u), &p).unwrap();
                prop_assert!(r < 1e-9, "{id:?} {p:?} {u}: {r}");
            }
        }
    }
}
