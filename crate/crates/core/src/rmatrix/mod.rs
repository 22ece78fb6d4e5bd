//! The five R-matrix families, their scalar functions, and property checks.

mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::tensor::{flip, re, rel_residual, SpectralOperator, TensorError, C64, Role};
use tables::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RFamily {
    /// Vector-vector, 36 x 36.
    VV,
    /// Spinor(+)-vector, 24 x 24.
    SpV,
    /// Spinor(-)-vector, 24 x 24.
    SmV,
    /// Spinor(+)-spinor(-), 16 x 16.
    SpSm,
    /// Spinor-spinor, 16 x 16.
    SS,
}

impl RFamily {
    pub const ALL: [RFamily; 5] = [RFamily::VV, RFamily::SpV, RFamily::SmV, RFamily::SpSm, RFamily::SS];

    pub fn aux_dim(self) -> usize {
        match self {
            RFamily::VV => 6,
            _ => 4,
        }
    }

    pub fn phys_dim(self) -> usize {
        match self {
            RFamily::VV | RFamily::SpV | RFamily::SmV => 6,
            RFamily::SpSm | RFamily::SS => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RFamily::VV => "vv",
            RFamily::SpV => "spv",
            RFamily::SmV => "smv",
            RFamily::SpSm => "spsm",
            RFamily::SS => "ss",
        }
    }

    fn table(self) -> &'static [(u8, u8, Poly)] {
        match self {
            RFamily::VV => &tables::VV,
            RFamily::SpV => &tables::SPV,
            RFamily::SmV => &tables::SMV,
            RFamily::SpSm => &tables::SPSM,
            RFamily::SS => &tables::SS,
        }
    }
}

fn poly_at(p: &Poly, u: C64) -> C64 {
    re(p[0]) + u * p[1] + u * u * p[2]
}

/// The explicit R-matrix of a family, auxiliary factor first.
pub fn r_eval(kind: RFamily, u: C64) -> SpectralOperator {
    let (da, dp) = (kind.aux_dim(), kind.phys_dim());
    let mut r = SpectralOperator::zeros(&[da, dp], &[Role::Auxiliary, Role::Quantum]);
    for (i, j, p) in kind.table() {
        r.set(*i as usize, *j as usize, poly_at(p, u));
    }
    r
}

/// The same operator with its two factors exchanged.
pub fn r_swapped(kind: RFamily, u: C64) -> SpectralOperator {
    let (da, dp) = (kind.aux_dim(), kind.phys_dim());
    flip(da, dp)
        .matmul(&r_eval(kind, u))
        .matmul(&flip(dp, da))
        .relabel(vec![dp, da], vec![Role::Quantum, Role::Auxiliary])
        .expect("flip preserves dimension")
}

/// Anti-diagonal 6 x 6 matrix of ones.
pub fn crossing_matrix() -> SpectralOperator {
    SpectralOperator::from_fn(&[6], &[Role::Quantum], |i, j| if i + j == 5 { re(1.0) } else { C64::default() })
}

/// Change of basis on the spinor pair as listed, columns in s- (x) s+ order.
pub fn spinor_change_of_basis() -> SpectralOperator {
    let mut s = SpectralOperator::zeros(&[4, 4], &[Role::Auxiliary, Role::Auxiliary]);
    for (i, j, v) in tables::S_CHANGE {
        s.set(i as usize, j as usize, re(v));
    }
    s
}

/// Scalar weights of the explicit tables and the scalar functions built
/// from them.
pub mod weights {
    use super::C64;

    /// Vector diagonal weight `(u+1)(u+2)`.
    pub fn same(u: C64) -> C64 {
        (u + 1.0) * (u + 2.0)
    }

    /// Vector weight for distinct, non-conjugate indices, `u(u+2)`.
    pub fn distinct(u: C64) -> C64 {
        u * (u + 2.0)
    }

    /// Vector weight on conjugate pairs, `u(u+1)`.
    pub fn conjugate(u: C64) -> C64 {
        u * (u + 1.0)
    }

    /// Spinor-vector diagonal weight `u + 3/2`.
    pub fn spinor_same(u: C64) -> C64 {
        u + 1.5
    }

    /// Spinor-vector weight `u + 1/2`.
    pub fn spinor_mixed(u: C64) -> C64 {
        u + 0.5
    }

    /// Vector unitarity scalar `same(u) same(-u)`.
    pub fn vector_unitarity(u: C64) -> C64 {
        same(u) * same(-u)
    }

    /// Spinor-vector unitarity scalar `spinor_same(u) spinor_same(-u)`.
    pub fn spinor_unitarity(u: C64) -> C64 {
        spinor_same(u) * spinor_same(-u)
    }

    /// Crossing-unitarity scalar of the spinor pair, `-(u+1)(u+3)`.
    pub fn spinor_pair_crossing(u: C64) -> C64 {
        -(u + 1.0) * (u + 3.0)
    }

    /// Fusion prefactor `(u-1)(u+2)`.
    pub fn fusion_prefactor(u: C64) -> C64 {
        (u - 1.0) * (u + 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RProperty {
    Regularity,
    Unitarity,
    CrossingSymmetry,
    CrossingUnitarity,
    Ybe,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RMatrixError {
    #[error("property {property:?} is not defined for family {family:?}")]
    Unsupported { family: RFamily, property: RProperty },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `R21` as it enters unitarity: the swapped operator for the equal-space
/// families, the operator itself for the mixed ones.
fn reversed(kind: RFamily, u: C64) -> SpectralOperator {
    match kind {
        RFamily::VV | RFamily::SS => {
            let d = kind.aux_dim();
            flip(d, d).matmul(&r_eval(kind, u)).matmul(&flip(d, d))
        }
        _ => r_eval(kind, u),
    }
}

fn unitarity_scalar(kind: RFamily, u: C64) -> C64 {
    match kind {
        RFamily::VV => weights::vector_unitarity(u),
        RFamily::SpV | RFamily::SmV => weights::spinor_unitarity(u),
        RFamily::SpSm => (u + 2.0) * (2.0 - u),
        RFamily::SS => (u + 1.0) * (1.0 - u),
    }
}

fn crossing_unitarity_scalar(kind: RFamily, u: C64) -> C64 {
    match kind {
        RFamily::VV => weights::vector_unitarity(u + 2.0),
        RFamily::SpV | RFamily::SmV => weights::spinor_unitarity(u + 2.0),
        RFamily::SpSm => weights::spinor_pair_crossing(u),
        RFamily::SS => -u * (u + 4.0),
    }
}

/// The three families of a Yang-Baxter triple, placed on spaces
/// (1,2), (1,3), (2,3), and the three space dimensions.
pub fn ybe_triple(kind: RFamily) -> ([RFamily; 3], [usize; 3]) {
    match kind {
        RFamily::VV => ([RFamily::VV; 3], [6, 6, 6]),
        RFamily::SpV => ([RFamily::SpV, RFamily::SpV, RFamily::VV], [4, 6, 6]),
        RFamily::SmV => ([RFamily::SmV, RFamily::SmV, RFamily::VV], [4, 6, 6]),
        RFamily::SpSm => ([RFamily::SpSm, RFamily::SpV, RFamily::SmV], [4, 4, 6]),
        RFamily::SS => ([RFamily::SS; 3], [4, 4, 4]),
    }
}

/// Residual of `R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)`.
pub fn ybe_residual(kind: RFamily, u: C64, v: C64) -> Result<f64, TensorError> {
    let ([f12, f13, f23], dims) = ybe_triple(kind);
    let (r12, r13, r23) = (r_eval(f12, u - v), r_eval(f13, u), r_eval(f23, v));
    let id = SpectralOperator::quantum_identity(&dims);
    let lhs = id.left_apply(&r23, &[1, 2])?.left_apply(&r13, &[0, 2])?.left_apply(&r12, &[0, 1])?;
    let rhs = id.left_apply(&r12, &[0, 1])?.left_apply(&r13, &[0, 2])?.left_apply(&r23, &[1, 2])?;
    rel_residual(&lhs, &rhs)
}

/// Residual of one defining property at one sample `(u, v)`; `v` is used
/// only by the Yang-Baxter check.
pub fn check_r_property(kind: RFamily, property: RProperty, u: C64, v: C64) -> Result<f64, RMatrixError> {
    let unsupported = RMatrixError::Unsupported { family: kind, property };
    let n = kind.aux_dim() * kind.phys_dim();
    let scalar_id = |c: C64| SpectralOperator::quantum_identity(&[n]).scale(c);
    let res = match property {
        RProperty::Regularity => {
            if kind != RFamily::VV {
                return Err(unsupported);
            }
            rel_residual(&r_eval(kind, re(0.0)), &flip(6, 6).scale(re(2.0)))?
        }
        RProperty::Unitarity => {
            let prod = r_eval(kind, u).matmul(&reversed(kind, -u));
            rel_residual(&prod.relabel(vec![n], vec![Role::Quantum])?, &scalar_id(unitarity_scalar(kind, u)))?
        }
        RProperty::CrossingUnitarity => {
            let lhs = r_eval(kind, u).partial_transpose(0)?;
            let rhs = reversed(kind, -u - 4.0)
                .relabel(vec![kind.aux_dim(), kind.phys_dim()], vec![Role::Auxiliary, Role::Quantum])?
                .partial_transpose(0)?;
            let prod = lhs.matmul(&rhs);
            rel_residual(
                &prod.relabel(vec![n], vec![Role::Quantum])?,
                &scalar_id(crossing_unitarity_scalar(kind, u)),
            )?
        }
        RProperty::CrossingSymmetry => {
            if kind != RFamily::VV {
                return Err(unsupported);
            }
            let r = r_eval(kind, u);
            let crossed = r_eval(kind, -u - 2.0);
            let v = crossing_matrix();
            let one = crossed.partial_transpose(1)?.left_apply(&v, &[0])?.right_apply(&v, &[0])?;
            let two = crossed.partial_transpose(0)?.left_apply(&v, &[1])?.right_apply(&v, &[1])?;
            rel_residual(&r, &one)?.max(rel_residual(&r, &two)?)
        }
        RProperty::Ybe => ybe_residual(kind, u, v)?,
    };
    Ok(res)
}

/// Degeneration point of each family and the expected rank there.
pub fn degeneration(kind: RFamily) -> Option<(f64, usize)> {
    match kind {
        RFamily::VV => Some((-2.0, 1)),
        RFamily::SpV | RFamily::SmV => Some((-1.5, 4)),
        RFamily::SS => Some((-1.0, 6)),
        RFamily::SpSm => None,
    }
}

/// Rank with the relative singular-value threshold `1e-8`.
pub fn r_rank(kind: RFamily, u: f64) -> usize {
    linalg::rank(&r_eval(kind, re(u)), 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regular_point_is_twice_the_flip() {
        assert!(check_r_property(RFamily::VV, RProperty::Regularity, re(0.0), re(0.0)).unwrap() < 1e-15);
    }

    #[test]
    fn printed_entries_at_one() {
        let r = r_eval(RFamily::VV, re(1.0));
        assert_eq!(r.get(0, 0), re(6.0));
        assert_eq!(r.get(1, 1), re(3.0));
    }

    #[test]
    fn spinor_pair_at_zero_is_flip() {
        let r = r_eval(RFamily::SS, re(0.0));
        let p = flip(4, 4);
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(r.get(i, j), p.get(i, j), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn crossing_matrix_basics() {
        let v = crossing_matrix();
        assert_eq!(v.matmul(&v), SpectralOperator::quantum_identity(&[6]));
        assert_eq!(v.transpose(), v);
        let e1 = [re(1.0), re(0.0), re(0.0), re(0.0), re(0.0), re(0.0)];
        assert_eq!(v.apply(&e1)[5], re(1.0));
    }

    #[test]
    fn unitarity_at_seventenths() {
        assert!(check_r_property(RFamily::VV, RProperty::Unitarity, re(0.7), re(0.0)).unwrap() < 1e-10);
    }

    #[test]
    fn ybe_coincident_arguments() {
        assert!(ybe_residual(RFamily::VV, re(0.4), re(0.4)).unwrap() < 1e-14);
    }

    #[test]
    fn spinor_pair_crossing_unitarity_value() {
        assert!((weights::spinor_pair_crossing(re(0.3)) - re(-4.29)).norm() < 1e-12);
        assert!(check_r_property(RFamily::SpSm, RProperty::CrossingUnitarity, re(0.3), re(0.0)).unwrap() < 1e-10);
    }

    #[test]
    fn unsupported_properties() {
        assert!(check_r_property(RFamily::SS, RProperty::CrossingSymmetry, re(0.1), re(0.0)).is_err());
        assert!(check_r_property(RFamily::SpV, RProperty::Regularity, re(0.1), re(0.0)).is_err());
    }

    #[test]
    fn degeneration_ranks() {
        assert_eq!(r_rank(RFamily::VV, -2.0), 1);
        assert_eq!(r_rank(RFamily::VV, -1.0), 16);
        assert_eq!(r_rank(RFamily::SpV, -1.5), 4);
        assert_eq!(r_rank(RFamily::SmV, -1.5), 4);
        assert_eq!(r_rank(RFamily::SS, -1.0), 6);
    }

    #[test]
    fn change_of_basis_is_invertible() {
        let s = spinor_change_of_basis();
        let c = linalg::condition_number(&s);
        assert!(c < 100.0, "condition number {c}");
        let prod = s.matmul(&linalg::inverse(&s).unwrap());
        assert!(rel_residual(&prod, &SpectralOperator::identity(&[4, 4], &[Role::Auxiliary; 2])).unwrap() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitarity_all_families(u in -3.0f64..3.0) {
            for kind in RFamily::ALL {
                let r = check_r_property(kind, RProperty::Unitarity, re(u), re(0.0)).unwrap();
                prop_assert!(r < 1e-9, "{kind:?} residual {r}");
            }
        }

        #[test]
        fn crossing_unitarity_all_families(u in -3.0f64..3.0) {
            for kind in RFamily::ALL {
                let r = check_r_property(kind, RProperty::CrossingUnitarity, re(u), re(0.0)).unwrap();
                prop_assert!(r < 1e-9, "{kind:?} residual {r}");
            }
        }

        #[test]
        fn crossing_symmetry_vector(u in -3.0f64..3.0) {
            prop_assert!(check_r_property(RFamily::VV, RProperty::CrossingSymmetry, re(u), re(0.0)).unwrap() < 1e-10);
        }

        #[test]
        fn yang_baxter_all_triples(u in -3.0f64..3.0, v in -3.0f64..3.0) {
            for kind in RFamily::ALL {
                let r = ybe_residual(kind, re(u), re(v)).unwrap();
                prop_assert!(r < 1e-9, "{kind:?} residual {r}");
            }
        }
    }
}
