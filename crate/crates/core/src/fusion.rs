//! Projectors at the degeneration points and the fusion identities built on
//! them.

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::rmatrix::{r_eval, spinor_change_of_basis, weights, RFamily};
use crate::tensor::{flip, re, rel_residual, Role, SpectralOperator, TensorError, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorKind {
    /// Rank-1 singlet in vector (x) vector.
    Singlet,
    /// Rank-16 image of the vector R-matrix at `u = -1`.
    Adjoint,
    /// Rank-4 image of the spinor(+)-vector R-matrix at `u = -3/2`.
    SpinorPlus,
    /// Rank-4 image of the spinor(-)-vector R-matrix at `u = -3/2`.
    SpinorMinus,
    /// Rank-6 antisymmetric image of the spinor-spinor R-matrix at `u = -1`.
    Antisymmetric,
}

impl ProjectorKind {
    pub const ALL: [ProjectorKind; 5] = [
        ProjectorKind::Singlet,
        ProjectorKind::Adjoint,
        ProjectorKind::SpinorPlus,
        ProjectorKind::SpinorMinus,
        ProjectorKind::Antisymmetric,
    ];

    pub fn factors(self) -> [usize; 2] {
        match self {
            ProjectorKind::Singlet | ProjectorKind::Adjoint => [6, 6],
            ProjectorKind::SpinorPlus | ProjectorKind::SpinorMinus => [4, 6],
            ProjectorKind::Antisymmetric => [4, 4],
        }
    }

    /// The family and spectral point whose R-matrix degenerates onto this
    /// projector.
    pub fn degeneration(self) -> (RFamily, f64) {
        match self {
            ProjectorKind::Singlet => (RFamily::VV, -2.0),
            ProjectorKind::Adjoint => (RFamily::VV, -1.0),
            ProjectorKind::SpinorPlus => (RFamily::SpV, -1.5),
            ProjectorKind::SpinorMinus => (RFamily::SmV, -1.5),
            ProjectorKind::Antisymmetric => (RFamily::SS, -1.0),
        }
    }

    pub fn rank(self) -> usize {
        match self {
            ProjectorKind::Singlet => 1,
            ProjectorKind::Adjoint => 16,
            ProjectorKind::SpinorPlus | ProjectorKind::SpinorMinus => 4,
            ProjectorKind::Antisymmetric => 6,
        }
    }

    /// Basis vectors as lists of (coefficient, 1-based ket), unnormalized.
    fn listing(self) -> Vec<Vec<(f64, [usize; 2])>> {
        let anti = |i, j| vec![(1.0, [i, j]), (-1.0, [j, i])];
        let singlet = || vec![(1.0, [1, 6]), (1.0, [2, 5]), (1.0, [3, 4]), (1.0, [4, 3]), (1.0, [5, 2]), (1.0, [6, 1])];
        match self {
            ProjectorKind::Singlet => vec![singlet()],
            ProjectorKind::Adjoint => {
                let mut out: Vec<_> = [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (3, 6)]
                    .into_iter()
                    .map(|(i, j)| anti(i, j))
                    .collect();
                out.push(vec![(1.0, [3, 4]), (1.0, [4, 3]), (1.0, [2, 5]), (1.0, [5, 2]), (1.0, [1, 6]), (1.0, [6, 1])]);
                out.extend([(4, 5), (4, 6), (5, 6)].into_iter().map(|(i, j)| anti(i, j)));
                out
            }
            ProjectorKind::SpinorPlus => vec![
                vec![(1.0, [1, 4]), (1.0, [2, 2]), (1.0, [3, 1])],
                vec![(1.0, [1, 5]), (-1.0, [2, 3]), (1.0, [4, 1])],
                vec![(1.0, [1, 6]), (-1.0, [3, 3]), (-1.0, [4, 2])],
                vec![(1.0, [2, 6]), (-1.0, [3, 5]), (1.0, [4, 4])],
            ],
            ProjectorKind::SpinorMinus => vec![
                vec![(1.0, [1, 3]), (1.0, [2, 2]), (1.0, [3, 1])],
                vec![(1.0, [1, 5]), (-1.0, [2, 4]), (1.0, [4, 1])],
                vec![(1.0, [1, 6]), (-1.0, [3, 4]), (-1.0, [4, 2])],
                vec![(1.0, [2, 6]), (-1.0, [3, 5]), (1.0, [4, 3])],
            ],
            ProjectorKind::Antisymmetric => [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
                .into_iter()
                .map(|(i, j)| anti(i, j))
                .collect(),
        }
    }

    /// Signs applied to the listed basis vectors when they coordinatize the
    /// fused space. Only the 6-dim space needs one: its second vector is
    /// negated so that the fused operators reproduce the explicit tables.
    fn coordinate_signs(self) -> Vec<f64> {
        let mut s = vec![1.0; self.rank()];
        if self == ProjectorKind::Antisymmetric {
            s[1] = -1.0;
        }
        s
    }
}

/// An orthogonal projector with its listed orthonormal basis.
#[derive(Debug, Clone)]
pub struct Projector {
    pub kind: ProjectorKind,
    /// Orthonormal basis vectors in listing order.
    pub basis: Vec<Vec<f64>>,
    pub matrix: SpectralOperator,
}

pub fn projector(kind: ProjectorKind) -> Projector {
    let [d1, d2] = kind.factors();
    let basis: Vec<Vec<f64>> = kind
        .listing()
        .into_iter()
        .map(|terms| {
            let mut v = vec![0.0; d1 * d2];
            for (c, [i, j]) in terms {
                v[(i - 1) * d2 + (j - 1)] += c;
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let matrix = SpectralOperator::from_fn(&[d1, d2], &[Role::Auxiliary, Role::Auxiliary], |i, j| {
        re(basis.iter().map(|b| b[i] * b[j]).sum())
    });
    Projector { kind, basis, matrix }
}

impl Projector {
    /// Columns coordinatizing the fused space.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        self.basis
            .iter()
            .zip(self.kind.coordinate_signs())
            .map(|(b, s)| b.iter().map(|x| x * s).collect())
            .collect()
    }

    /// `W^T op W` with `W = I (x) B (x) I`, where `B` holds the fused-space
    /// coordinates and occupies the two factors starting at `start`. The
    /// fused factor keeps the role of the first projected factor.
    pub fn compress(&self, op: &SpectralOperator, start: usize) -> Result<SpectralOperator, TensorError> {
        let factors = op.factors();
        let [d1, d2] = self.kind.factors();
        if start + 1 >= factors.len() || factors[start] != d1 || factors[start + 1] != d2 {
            return Err(TensorError::DimensionMismatch(format!(
                "projector on [{d1}, {d2}] at factor {start} of {factors:?}"
            )));
        }
        let before: usize = factors[..start].iter().product();
        let after: usize = factors[start + 2..].iter().product();
        let cols = self.coordinates();
        let (r, s) = (cols.len(), d1 * d2);
        let m = before * r * after;
        // Sparse description of W: for fused index (b, k, a), list (row, weight).
        let w: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|idx| {
                let (b, rest) = (idx / (r * after), idx % (r * after));
                let (k, a) = (rest / after, rest % after);
                (0..s)
                    .filter(|&t| cols[k][t] != 0.0)
                    .map(|t| ((b * s + t) * after + a, cols[k][t]))
                    .collect()
            })
            .collect();
        let mut new_factors = factors[..start].to_vec();
        new_factors.push(r);
        new_factors.extend_from_slice(&factors[start + 2..]);
        let mut new_roles = op.roles()[..start].to_vec();
        new_roles.push(op.roles()[start]);
        new_roles.extend_from_slice(&op.roles()[start + 2..]);
        Ok(SpectralOperator::from_fn(&new_factors, &new_roles, |i, j| {
            let mut acc = C64::default();
            for &(p, x) in &w[i] {
                for &(q, y) in &w[j] {
                    acc += op.get(p, q) * (x * y);
                }
            }
            acc
        }))
    }
}

/// Intertwiner on the spinor pair: the listed change of basis composed with
/// the flip of the two spinor factors.
pub fn spinor_pair_intertwiner() -> SpectralOperator {
    spinor_change_of_basis().matmul(&flip(4, 4))
}

/// Outcome of a projector-image test at a degeneration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub kind: ProjectorKind,
    pub point: f64,
    pub rank_r: usize,
    pub rank_p: usize,
    /// `max |(Id - P) R(u*)|`, relative to `max(1, max |R(u*)|)`.
    pub residual: f64,
}

impl Degeneracy {
    pub fn holds(&self, tol: f64) -> bool {
        self.rank_r == self.rank_p && self.rank_p == self.kind.rank() && self.residual < tol
    }
}

pub fn verify_degeneracy(kind: ProjectorKind) -> Degeneracy {
    let (family, point) = kind.degeneration();
    let r = r_eval(family, re(point));
    let p = projector(kind).matrix;
    let complement = &SpectralOperator::identity(p.factors(), p.roles()) - &p;
    let leak = complement.matmul(&r);
    Degeneracy {
        kind,
        point,
        rank_r: linalg::rank(&r, 1e-8),
        rank_p: linalg::rank(&p, 1e-8),
        residual: leak.max_abs() / r.max_abs().max(1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionId {
    /// Two vector spaces fused to the singlet.
    Singlet,
    SingletMirror,
    /// Two vector spaces fused to the 16-dim space, split into two spinors.
    Adjoint,
    AdjointMirror,
    /// Spinor(+) with vector fused to spinor(-).
    SpinorPlus,
    SpinorPlusMirror,
    /// Spinor(-) with vector fused to spinor(+).
    SpinorMinus,
    SpinorMinusMirror,
    /// Two spinors fused to a vector quantum space, giving the spinor-vector matrix.
    SpinorVectorFromSpinors,
    /// Two spinor auxiliary spaces fused to a vector, giving the vector matrix.
    VectorFromSpinors,
}

impl FusionId {
    pub const ALL: [FusionId; 10] = [
        FusionId::Singlet,
        FusionId::SingletMirror,
        FusionId::Adjoint,
        FusionId::AdjointMirror,
        FusionId::SpinorPlus,
        FusionId::SpinorPlusMirror,
        FusionId::SpinorMinus,
        FusionId::SpinorMinusMirror,
        FusionId::SpinorVectorFromSpinors,
        FusionId::VectorFromSpinors,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FusionId::Singlet => "singlet",
            FusionId::SingletMirror => "singlet_mirror",
            FusionId::Adjoint => "adjoint",
            FusionId::AdjointMirror => "adjoint_mirror",
            FusionId::SpinorPlus => "spinor_plus",
            FusionId::SpinorPlusMirror => "spinor_plus_mirror",
            FusionId::SpinorMinus => "spinor_minus",
            FusionId::SpinorMinusMirror => "spinor_minus_mirror",
            FusionId::SpinorVectorFromSpinors => "spinor_vector_from_spinors",
            FusionId::VectorFromSpinors => "vector_from_spinors",
        }
    }

    /// Spectral points where the scalar prefactor of the identity vanishes.
    pub fn prefactor_zeros(self) -> &'static [f64] {
        match self {
            FusionId::Singlet | FusionId::SingletMirror => &[-2.0, -1.0, 1.0, 2.0],
            FusionId::SpinorVectorFromSpinors => &[0.5],
            FusionId::VectorFromSpinors => &[],
            _ => &[1.0, -2.0],
        }
    }
}

fn product(dims: &[usize], ops: &[(&SpectralOperator, &[usize])]) -> Result<SpectralOperator, TensorError> {
    let mut acc = SpectralOperator::quantum_identity(dims);
    for (op, pos) in ops.iter().rev() {
        acc = acc.left_apply(op, pos)?;
    }
    Ok(acc)
}

/// Both sides of a fusion identity at `u`, in the compressed coordinates
/// where a fused space appears.
pub fn fusion_sides(id: FusionId, u: C64) -> Result<(SpectralOperator, SpectralOperator), TensorError> {
    let vv = |x: C64| r_eval(RFamily::VV, x);
    let pre = weights::fusion_prefactor(u);
    match id {
        FusionId::Singlet | FusionId::SingletMirror => {
            let dims = [6, 6, 6];
            let p = projector(ProjectorKind::Singlet).matrix;
            let (a, b) = (vv(u), vv(u - 2.0));
            let (pa, pb): (&[usize], &[usize]) = if id == FusionId::Singlet { (&[0, 2], &[1, 2]) } else { (&[2, 0], &[2, 1]) };
            let lhs = product(&dims, &[(&p, &[0, 1]), (&a, pa), (&b, pb), (&p, &[0, 1])])?;
            let scalar = weights::same(u) * weights::conjugate(u - 2.0);
            let rhs = product(&dims, &[(&p.scale(scalar), &[0, 1])])?;
            Ok((lhs, rhs))
        }
        FusionId::Adjoint | FusionId::AdjointMirror => {
            let proj = projector(ProjectorKind::Adjoint);
            let p = &proj.matrix;
            let (a, b) = (vv(u), vv(u - 1.0));
            let (pa, pb): (&[usize], &[usize]) = if id == FusionId::Adjoint { (&[0, 2], &[1, 2]) } else { (&[2, 0], &[2, 1]) };
            let full = product(&[6, 6, 6], &[(p, &[0, 1]), (&a, pa), (&b, pb), (p, &[0, 1])])?;
            let lhs = proj.compress(&full, 0)?;
            let rhs = spinor_split(&r_eval(RFamily::SpV, u - 0.5), &r_eval(RFamily::SmV, u - 0.5))?.scale(pre);
            Ok((lhs.clone(), rhs.relabel(lhs.factors().to_vec(), lhs.roles().to_vec())?))
        }
        FusionId::SpinorPlus | FusionId::SpinorPlusMirror | FusionId::SpinorMinus | FusionId::SpinorMinusMirror => {
            let plus = matches!(id, FusionId::SpinorPlus | FusionId::SpinorPlusMirror);
            let mirror = matches!(id, FusionId::SpinorPlusMirror | FusionId::SpinorMinusMirror);
            let (kind, inner, outer) = if plus {
                (ProjectorKind::SpinorPlus, RFamily::SpV, RFamily::SmV)
            } else {
                (ProjectorKind::SpinorMinus, RFamily::SmV, RFamily::SpV)
            };
            let proj = projector(kind);
            let p = &proj.matrix;
            let a = vv(u);
            let b = r_eval(inner, u - 1.5);
            let pa: &[usize] = if mirror { &[2, 1] } else { &[1, 2] };
            let full = product(&[4, 6, 6], &[(p, &[0, 1]), (&a, pa), (&b, &[0, 2]), (p, &[0, 1])])?;
            let lhs = proj.compress(&full, 0)?;
            let rhs = r_eval(outer, u - 0.5).scale(pre);
            Ok((lhs.clone(), rhs.relabel(lhs.factors().to_vec(), lhs.roles().to_vec())?))
        }
        FusionId::SpinorVectorFromSpinors => {
            let proj = projector(ProjectorKind::Antisymmetric);
            let p = &proj.matrix;
            let (a, b) = (r_eval(RFamily::SS, u + 0.5), r_eval(RFamily::SS, u - 0.5));
            let full = product(&[4, 4, 4], &[(p, &[1, 2]), (&a, &[0, 1]), (&b, &[0, 2]), (p, &[1, 2])])?;
            let lhs = proj.compress(&full, 1)?;
            let rhs = r_eval(RFamily::SpV, u).scale(u - 0.5);
            Ok((lhs.clone(), rhs.relabel(lhs.factors().to_vec(), lhs.roles().to_vec())?))
        }
        FusionId::VectorFromSpinors => {
            let proj = projector(ProjectorKind::Antisymmetric);
            let p = &proj.matrix;
            let (a, b) = (r_eval(RFamily::SpV, u + 0.5), r_eval(RFamily::SpV, u - 0.5));
            let full = product(&[4, 4, 6], &[(p, &[0, 1]), (&a, &[1, 2]), (&b, &[0, 2]), (p, &[0, 1])])?;
            let lhs = proj.compress(&full, 0)?;
            let rhs = r_eval(RFamily::VV, u);
            Ok((lhs.clone(), rhs.relabel(lhs.factors().to_vec(), lhs.roles().to_vec())?))
        }
    }
}

/// `(S P) [X_{1'3} Y_{2'3}] (S P)^{-1}` on spinor(+) (x) spinor(-) (x) vector.
fn spinor_split(x: &SpectralOperator, y: &SpectralOperator) -> Result<SpectralOperator, TensorError> {
    let s = spinor_pair_intertwiner();
    let s_inv = linalg::inverse(&s)?;
    product(&[4, 4, 6], &[(&s, &[0, 1]), (x, &[0, 2]), (y, &[1, 2]), (&s_inv, &[0, 1])])
}

pub fn check_fusion_identity(id: FusionId, u: C64) -> Result<f64, TensorError> {
    let (lhs, rhs) = fusion_sides(id, u)?;
    rel_residual(&lhs, &rhs)
}

/// Residuals of the two reconstructions from the spinor-spinor matrix:
/// (spinor-vector, vector).
pub fn reconstruct_from_spinorial(u: C64) -> Result<(f64, f64), TensorError> {
    Ok((
        check_fusion_identity(FusionId::SpinorVectorFromSpinors, u)?,
        check_fusion_identity(FusionId::VectorFromSpinors, u)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projectors_are_orthogonal_with_listed_ranks() {
        for kind in ProjectorKind::ALL {
            let p = projector(kind).matrix;
            assert!(rel_residual(&p.matmul(&p), &p).unwrap() < 1e-12, "{kind:?}");
            assert!(rel_residual(&p.transpose(), &p).unwrap() < 1e-15, "{kind:?}");
            assert_eq!(linalg::rank(&p, 1e-8), kind.rank(), "{kind:?}");
            assert!((p.trace() - re(kind.rank() as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn singlet_support() {
        let p = projector(ProjectorKind::Singlet).matrix;
        let support = [5, 10, 15, 20, 25, 30];
        for i in 0..36 {
            for j in 0..36 {
                let expect = if support.contains(&i) && support.contains(&j) { 1.0 / 6.0 } else { 0.0 };
                assert!((p.get(i, j) - re(expect)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn degeneracies_hold() {
        for kind in ProjectorKind::ALL {
            let d = verify_degeneracy(kind);
            assert!(d.holds(1e-10), "{d:?}");
        }
    }

    #[test]
    fn intertwiner_is_invertible() {
        let s = spinor_pair_intertwiner();
        let prod = s.matmul(&linalg::inverse(&s).unwrap());
        assert!(rel_residual(&prod, &SpectralOperator::identity(&[4, 4], &[Role::Auxiliary; 2])).unwrap() < 1e-12);
    }

    #[test]
    fn worked_points() {
        assert!(check_fusion_identity(FusionId::Singlet, re(0.9)).unwrap() < 1e-10);
        assert!(check_fusion_identity(FusionId::Adjoint, re(1.3)).unwrap() < 1e-10);
        let (lhs, rhs) = fusion_sides(FusionId::SpinorPlus, re(0.0)).unwrap();
        let expect = r_eval(RFamily::SmV, re(-0.5)).scale(re(-2.0));
        assert!(rel_residual(&lhs, &rhs).unwrap() < 1e-10);
        assert!(rel_residual(&rhs.relabel(vec![4, 6], vec![Role::Auxiliary, Role::Quantum]).unwrap(), &expect).unwrap() < 1e-15);
    }

    #[test]
    fn reconstruction_at_fixed_point() {
        let (sv, vv) = reconstruct_from_spinorial(re(0.55)).unwrap();
        assert!(sv < 1e-9 && vv < 1e-9, "{sv} {vv}");
        let (lhs, _) = fusion_sides(FusionId::SpinorVectorFromSpinors, re(0.5)).unwrap();
        assert!(lhs.max_abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn all_fusion_identities(u in -2.5f64..2.5) {
            for id in FusionId::ALL {
                let r = check_fusion_identity(id, re(u)).unwrap();
                prop_assert!(r < 1e-9, "{id:?} at {u}: {r}");
            }
        }
    }
}
