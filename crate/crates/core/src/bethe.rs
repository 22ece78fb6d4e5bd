//! T-Q relations, Bethe ansatz equations, a damped Newton solver and
//! matching of T-Q curves against the spectrum oracle.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::BoundaryParams;
use crate::linalg;
use crate::rmatrix::weights;
use crate::spectrum::{scalar_residual, EigenCurve};
use crate::tensor::{interpolate_poly, interpolation_nodes, re, PolyCurve, SpectralOperator, TensorError, C64};
use crate::transfer::{degree_bound, Boundary, ChainSpec, TransferKind};

/// Converged states have scaled residual below this.
pub const CONVERGED: f64 = 1e-10;
/// States whose root multisets are closer than this are the same state.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// Roots closer than this within one list are treated as coincident.
pub const ROOT_SEPARATION: f64 = 1e-8;
/// Roots beyond this magnitude are treated as escaped to infinity.
pub const ROOT_ESCAPE: f64 = 1e6;
/// Relative singular-value floor of the scaled Jacobian at an isolated root.
pub const ISOLATION_GAP: f64 = 1e-7;
/// Held-out T-Q mismatch above this marks a singular solution.
pub const SINGULAR_MISS: f64 = 1e-4;
const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 40;
const FD_STEP: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("sector {sector} violates L1 = L2 + L3 + N with N = {n}")]
    OpenSector { sector: Sector, n: usize },
    #[error("cannot parse sector '{0}': expected L1,L2,L3")]
    SectorSyntax(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Numbers of roots of each type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
}

impl Sector {
    pub fn new(l1: usize, l2: usize, l3: usize) -> Self {
        Self { l1, l2, l3 }
    }

    pub fn total(&self) -> usize {
        self.l1 + self.l2 + self.l3
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<(), BetheError> {
        if spec.boundary.is_open() && self.l1 != self.l2 + self.l3 + spec.n() {
            return Err(BetheError::OpenSector { sector: *self, n: spec.n() });
        }
        Ok(())
    }

    /// Desk-scale sector sweep: periodic `L1 <= 3`, `L2, L3 <= 2`; open
    /// `L2 + L3 <= 2` with `L1` fixed by the chain length.
    pub fn sweep(spec: &ChainSpec) -> Vec<Sector> {
        let mut out = Vec::new();
        if spec.boundary.is_open() {
            for l2 in 0..=2 {
                for l3 in 0..=(2 - l2) {
                    out.push(Sector::new(l2 + l3 + spec.n(), l2, l3));
                }
            }
        } else {
            for l1 in 0..=3 {
                for l2 in 0..=2 {
                    for l3 in 0..=2 {
                        out.push(Sector::new(l1, l2, l3));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.l1, self.l2, self.l3)
    }
}

impl FromStr for Sector {
    type Err = BetheError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let parse = |p: &str| p.parse::<usize>().map_err(|_| BetheError::SectorSyntax(s.to_string()));
        match parts.as_slice() {
            [a, b, c] => Ok(Sector::new(parse(a)?, parse(b)?, parse(c)?)),
            _ => Err(BetheError::SectorSyntax(s.to_string())),
        }
    }
}

/// Roots of the three Q-polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheState {
    pub mu1: Vec<C64>,
    pub mu2: Vec<C64>,
    pub mu3: Vec<C64>,
    pub open: bool,
    /// Scaled residual of the Bethe equations at these roots.
    pub residual: f64,
}

impl BetheState {
    pub fn empty(open: bool) -> Self {
        Self {
            mu1: Vec::new(),
            mu2: Vec::new(),
            mu3: Vec::new(),
            open,
            residual: 0.0,
        }
    }

    pub fn sector(&self) -> Sector {
        Sector::new(self.mu1.len(), self.mu2.len(), self.mu3.len())
    }

    fn from_flat(z: &[C64], sector: Sector, open: bool) -> Self {
        let (a, rest) = z.split_at(sector.l1);
        let (b, c) = rest.split_at(sector.l2);
        Self {
            mu1: a.to_vec(),
            mu2: b.to_vec(),
            mu3: c.to_vec(),
            open,
            residual: f64::INFINITY,
        }
    }

    pub fn qpolys(&self) -> QPolys {
        QPolys {
            mu1: self.mu1.clone(),
            mu2: self.mu2.clone(),
            mu3: self.mu3.clone(),
            open: self.open,
        }
    }
}

/// Q-polynomial evaluators. Periodic: `prod (u - mu + s)`; open:
/// `prod (u - mu + s)(u + mu + s)`, with shift `s` = 1/2 for the first
/// type and 1 for the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct QPolys {
    pub mu1: Vec<C64>,
    pub mu2: Vec<C64>,
    pub mu3: Vec<C64>,
    pub open: bool,
}

impl QPolys {
    fn eval(&self, roots: &[C64], shift: f64, u: C64) -> C64 {
        roots
            .iter()
            .map(|m| {
                let f = u - m + shift;
                if self.open {
                    f * (u + m + shift)
                } else {
                    f
                }
            })
            .product()
    }

    pub fn q1(&self, u: C64) -> C64 {
        self.eval(&self.mu1, 0.5, u)
    }

    pub fn q2(&self, u: C64) -> C64 {
        self.eval(&self.mu2, 1.0, u)
    }

    pub fn q3(&self, u: C64) -> C64 {
        self.eval(&self.mu3, 1.0, u)
    }

    /// The two vector-type Q's, exchanged for the minus chirality.
    fn chiral(&self, kind: TransferKind) -> (Vec<C64>, Vec<C64>) {
        match kind {
            TransferKind::Minus => (self.mu3.clone(), self.mu2.clone()),
            _ => (self.mu2.clone(), self.mu3.clone()),
        }
    }
}

fn theta_product(spec: &ChainSpec, u: C64, f: impl Fn(C64) -> C64) -> C64 {
    spec.theta
        .iter()
        .map(|&t| if spec.boundary.is_open() { f(u - t) * f(u + t) } else { f(u - t) })
        .product()
}

/// T-Q eigenvalue of the selected transfer matrix at `u`.
pub fn lambda_tq(kind: TransferKind, u: C64, state: &BetheState, spec: &ChainSpec) -> C64 {
    let q = state.qpolys();
    match (spec.boundary, kind) {
        (Boundary::Periodic, TransferKind::Fundamental) => periodic_lambda(u, &q, spec),
        (Boundary::Periodic, _) => periodic_fused_lambda(kind, u, &q, spec),
        (Boundary::Open(p), TransferKind::Fundamental) => open_lambda(u, &q, spec, &p),
        (Boundary::Open(p), _) => open_fused_lambda(kind, u, &q, spec, &p),
    }
}

fn periodic_lambda(u: C64, q: &QPolys, spec: &ChainSpec) -> C64 {
    let pa = theta_product(spec, u, weights::same);
    let pb = theta_product(spec, u, weights::distinct);
    let pe = theta_product(spec, u, weights::conjugate);
    let (q1, q2, q3) = (|x| q.q1(x), |x| q.q2(x), |x| q.q3(x));
    let q23 = q2(u) * q3(u);
    pa * q1(u - 1.0) / q1(u)
        + pb * q1(u + 1.0) * q2(u - 1.0) * q3(u - 1.0) / (q1(u) * q23)
        + pb * q2(u - 1.0) * q3(u + 1.0) / q23
        + pb * q2(u + 1.0) * q3(u - 1.0) / q23
        + pb * q1(u) * q2(u + 1.0) * q3(u + 1.0) / (q1(u + 1.0) * q23)
        + pe * q1(u + 2.0) / q1(u + 1.0)
}

fn periodic_fused_lambda(kind: TransferKind, u: C64, q: &QPolys, spec: &ChainSpec) -> C64 {
    let (m2, m3) = q.chiral(kind);
    let q1 = |x| q.q1(x);
    let q2 = |x| q.eval(&m2, 1.0, x);
    let q3 = |x| q.eval(&m3, 1.0, x);
    let pa = theta_product(spec, u, weights::spinor_same);
    let pb = theta_product(spec, u, weights::spinor_mixed);
    pa * (q2(u - 1.5) / q2(u - 0.5) + q1(u - 0.5) * q2(u + 0.5) / (q1(u + 0.5) * q2(u - 0.5)))
        + pb * (q3(u + 1.5) / q3(u + 0.5) + q1(u + 1.5) * q3(u - 0.5) / (q1(u + 0.5) * q3(u + 0.5)))
}

fn open_lambda(u: C64, q: &QPolys, spec: &ChainSpec, p: &BoundaryParams) -> C64 {
    let x = p.inhomogeneous_coupling();
    let (h1, h2, ht1, ht2) = (
        |v| p.left_rising(v),
        |v| p.left_falling(v),
        |v| p.right_falling(v),
        |v| p.right_rising(v),
    );
    let (q1, q2, q3) = (|v| q.q1(v), |v| q.q2(v), |v| q.q3(v));
    let pa = theta_product(spec, u, weights::same);
    let pb = theta_product(spec, u, weights::distinct);
    let pe = theta_product(spec, u, weights::conjugate);
    let hh = h1(u + 0.5) * h2(u + 1.5) * ht1(u + 0.5) * ht2(u + 1.5);
    let q23 = q2(u) * q3(u);
    let w = u + 1.0;
    let z1 = (u + 2.0) * (u + 1.5) / (w * (u + 0.5)) * 4.0
        * pa
        * h1(u + 0.5)
        * h1(u - 0.5)
        * ht1(u + 0.5)
        * ht1(u - 0.5)
        * q1(u - 1.0)
        / q1(u);
    let z2 = u * (u + 2.0) * (u + 1.5) / (w * w * (u + 0.5)) * 4.0 * pb * hh * q1(u + 1.0) * q2(u - 1.0) * q3(u - 1.0)
        / (q1(u) * q23);
    let z3 = u * (u + 2.0) / (w * w) * 4.0 * pb * hh * q2(u - 1.0) * q3(u + 1.0) / q23;
    let z4 = u * (u + 2.0) / (w * w) * 4.0 * pb * hh * q2(u + 1.0) * q3(u - 1.0) / q23;
    let z5 = u * (u + 2.0) * (u + 0.5) / (w * w * (u + 1.5)) * 4.0 * pb * hh * q1(u) * q2(u + 1.0) * q3(u + 1.0)
        / (q1(u + 1.0) * q23);
    let z6 = u * (u + 0.5) / (w * (u + 1.5)) * 4.0
        * pe
        * h2(u + 2.5)
        * h2(u + 1.5)
        * ht2(u + 2.5)
        * ht2(u + 1.5)
        * q1(u + 2.0)
        / q1(u + 1.0);
    let pt = theta_product(spec, u, |v| weights::same(v) * v);
    let f1 = u * (u + 2.0) * (u + 1.5) / w * 4.0 * x * pt * h1(u + 0.5) * ht1(u + 0.5) * q2(u - 1.0) * q3(u - 1.0) / q1(u);
    let f2 = u * (u + 2.0) * (u + 0.5) / w * 4.0 * x * pt * h2(u + 1.5) * ht2(u + 1.5) * q2(u + 1.0) * q3(u + 1.0)
        / q1(u + 1.0);
    z1 + z2 + z3 + z4 + z5 + z6 + f1 + f2
}

fn open_fused_lambda(kind: TransferKind, u: C64, q: &QPolys, spec: &ChainSpec, p: &BoundaryParams) -> C64 {
    let x = p.inhomogeneous_coupling();
    let (m2, m3) = q.chiral(kind);
    let q1 = |v| q.q1(v);
    let q2 = |v| q.eval(&m2, 1.0, v);
    let q3 = |v| q.eval(&m3, 1.0, v);
    let pa = theta_product(spec, u, weights::spinor_same);
    let pb = theta_product(spec, u, weights::spinor_mixed);
    let w = u + 1.0;
    let first = pa
        * p.left_rising(u)
        * p.right_falling(u)
        * ((u + 2.0) / (u + 0.5) * q2(u - 1.5) / q2(u - 0.5)
            + u * (u + 2.0) / (w * (u + 0.5)) * q1(u - 0.5) * q2(u + 0.5) / (q1(u + 0.5) * q2(u - 0.5)));
    let second = pb
        * p.left_falling(u + 2.0)
        * p.right_rising(u + 2.0)
        * (u / (u + 1.5) * q3(u + 1.5) / q3(u + 0.5)
            + u * (u + 2.0) / (w * (u + 1.5)) * q1(u + 1.5) * q3(u - 0.5) / (q1(u + 0.5) * q3(u + 0.5)));
    let tail = u * (u + 2.0) * x * pa * pb * q2(u + 0.5) * q3(u - 0.5) / q1(u + 0.5);
    first + second + tail
}

/// Cleared Bethe equations: each entry is a sum of terms that must cancel,
/// returned as (sum, largest term magnitude).
fn cleared_equations(state: &BetheState, spec: &ChainSpec) -> Vec<(C64, f64)> {
    let q = state.qpolys();
    let mut out = Vec::with_capacity(state.sector().total());
    let push = |terms: &[C64], out: &mut Vec<(C64, f64)>| {
        let sum = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        out.push((sum, scale));
    };
    let q23 = |v| q.q2(v) * q.q3(v);
    match spec.boundary {
        Boundary::Periodic => {
            for &m in &state.mu1 {
                let below = spec.theta.iter().map(|t| m - 0.5 - t).product::<C64>();
                let above = spec.theta.iter().map(|t| m + 0.5 - t).product::<C64>();
                push(
                    &[q.q1(m - 1.5) * q23(m - 0.5) * above, q.q1(m + 0.5) * q23(m - 1.5) * below],
                    &mut out,
                );
            }
            for (roots, qv) in [(&state.mu2, 2), (&state.mu3, 3)] {
                for &m in roots {
                    let qq = |v| if qv == 2 { q.q2(v) } else { q.q3(v) };
                    push(&[q.q1(m) * qq(m - 2.0), q.q1(m - 1.0) * qq(m)], &mut out);
                }
            }
        }
        Boundary::Open(p) => {
            let x = p.inhomogeneous_coupling();
            for &m in &state.mu1 {
                let below: C64 = spec.theta.iter().map(|t| (m - 0.5 - t) * (m - 0.5 + t)).product();
                let above: C64 = spec.theta.iter().map(|t| (m + 0.5 - t) * (m + 0.5 + t)).product();
                let lower = q23(m - 1.5);
                let upper = q23(m - 0.5);
                push(
                    &[
                        (m + 0.5) * p.left_rising(m - 1.0) * p.right_falling(m - 1.0) * above * q.q1(m - 1.5) * upper,
                        (m - 0.5) * p.left_falling(m + 1.0) * p.right_rising(m + 1.0) * below * q.q1(m + 0.5) * lower,
                        m * (m - 0.5) * (m + 0.5) * x * below * above * lower * upper,
                    ],
                    &mut out,
                );
            }
            for (roots, qv) in [(&state.mu2, 2), (&state.mu3, 3)] {
                for &m in roots {
                    let qq = |v| if qv == 2 { q.q2(v) } else { q.q3(v) };
                    push(&[(m + 0.5) * q.q1(m) * qq(m - 2.0), (m - 0.5) * q.q1(m - 1.0) * qq(m)], &mut out);
                }
            }
        }
    }
    out
}

/// Bethe-equation residuals in cleared form, each scaled by its largest term.
pub fn bae_residuals(state: &BetheState, spec: &ChainSpec) -> Vec<C64> {
    cleared_equations(state, spec)
        .into_iter()
        .map(|(s, scale)| if scale > 0.0 { s / scale } else { s })
        .collect()
}

fn residual_norm(state: &BetheState, spec: &ChainSpec) -> f64 {
    bae_residuals(state, spec).iter().map(|r| r.norm()).fold(0.0, f64::max)
}

fn raw(z: &[C64], sector: Sector, spec: &ChainSpec) -> Vec<C64> {
    let st = BetheState::from_flat(z, sector, spec.boundary.is_open());
    cleared_equations(&st, spec).into_iter().map(|(s, _)| s).collect()
}

/// Damped Newton iteration from one starting point.
fn newton(start: Vec<C64>, sector: Sector, spec: &ChainSpec) -> Option<BetheState> {
    let open = spec.boundary.is_open();
    let mut z = start;
    let mut current = residual_norm(&BetheState::from_flat(&z, sector, open), spec);
    for _ in 0..MAX_ITERATIONS {
        if current < CONVERGED {
            break;
        }
        let f = raw(&z, sector, spec);
        let jac = jacobian(&z, sector, spec);
        let rhs: Vec<C64> = f.iter().map(|v| -v).collect();
        let step = linalg::solve(&jac, &rhs).ok()?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<C64> = z.iter().zip(&step).map(|(a, d)| a + d * lambda).collect();
            let r = residual_norm(&BetheState::from_flat(&trial, sector, open), spec);
            if r.is_finite() && r < current {
                z = trial;
                current = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if current >= CONVERGED {
        return None;
    }
    if !isolated(&z, sector, spec) {
        return None;
    }
    let mut state = BetheState::from_flat(&z, sector, open);
    state.residual = current;
    canonicalize(&mut state);
    (admissible(&state) && !singular(&state, spec)).then_some(state)
}

/// Cleared equations are polynomial in the roots, so a complex central
/// difference gives the holomorphic Jacobian.
fn jacobian(z: &[C64], sector: Sector, spec: &ChainSpec) -> Vec<Vec<C64>> {
    let n = z.len();
    let mut jac = vec![vec![C64::default(); n]; n];
    for j in 0..n {
        let h = FD_STEP * z[j].norm().max(1.0);
        let (mut zp, mut zm) = (z.to_vec(), z.to_vec());
        zp[j] += h;
        zm[j] -= h;
        let (fp, fm) = (raw(&zp, sector, spec), raw(&zm, sector, spec));
        for i in 0..n {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// A solution is isolated when the Jacobian, with each equation scaled by
/// its largest term, has its smallest singular value clear of zero.
/// Equations that hold identically (a lone root whose neighbours are
/// absent) leave free roots, which are not states.
fn isolated(z: &[C64], sector: Sector, spec: &ChainSpec) -> bool {
    let st = BetheState::from_flat(z, sector, spec.boundary.is_open());
    let scales: Vec<f64> = cleared_equations(&st, spec).into_iter().map(|(_, s)| s).collect();
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return false;
    }
    let n = z.len();
    let data: Vec<C64> = jacobian(z, sector, spec)
        .into_iter()
        .zip(&scales)
        .flat_map(|(row, s)| row.into_iter().map(move |x| x / *s))
        .collect();
    if data.iter().any(|x| !x.is_finite()) {
        return false;
    }
    SpectralOperator::from_rows(n, data).is_ok_and(|j| {
        let sv = linalg::singular_values(&j);
        let (hi, lo) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
        lo > ISOLATION_GAP * hi.max(1.0)
    })
}

/// Cleared equations also vanish where a pole of the T-Q relation meets a
/// zero (0/0); the T-Q curve is then not a polynomial.
fn singular(state: &BetheState, spec: &ChainSpec) -> bool {
    tq_curve(TransferKind::Fundamental, state, spec, 2).map_or(true, |(_, miss)| miss > SINGULAR_MISS)
}

/// Open Q's are even under `mu -> -mu`; choose `Re mu >= 0`.
fn canonicalize(state: &mut BetheState) {
    for list in [&mut state.mu1, &mut state.mu2, &mut state.mu3] {
        if state.open {
            for m in list.iter_mut() {
                if m.re < 0.0 || (m.re == 0.0 && m.im < 0.0) {
                    *m = -*m;
                }
            }
        }
        list.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    }
}

/// Distinct finite roots, none at the self-reflection point of an open Q.
fn admissible(state: &BetheState) -> bool {
    [&state.mu1, &state.mu2, &state.mu3].iter().all(|list| {
        list.iter().all(|m| m.norm() < ROOT_ESCAPE && m.is_finite())
            && (!state.open || list.iter().all(|m| m.norm() > ROOT_SEPARATION.sqrt()))
            && list
                .iter()
                .enumerate()
                .all(|(i, a)| list[..i].iter().all(|b| (a - b).norm() > ROOT_SEPARATION))
    })
}

/// Greedy multiset distance between two root lists of equal length.
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (x - *p).norm().total_cmp(&(x - *q).norm()));
        match best {
            Some((j, y)) => {
                used[j] = true;
                worst = worst.max((x - y).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

fn same_state(a: &BetheState, b: &BetheState) -> bool {
    multiset_distance(&a.mu1, &b.mu1).max(multiset_distance(&a.mu2, &b.mu2)).max(multiset_distance(&a.mu3, &b.mu3))
        < DEDUP_DISTANCE
}

/// Solves the Bethe equations in a sector from `restarts` random starts.
/// Starts are drawn up front from the seed, solved in parallel and
/// deduplicated in start order, so the result is deterministic.
pub fn solve_bae(sector: Sector, spec: &ChainSpec, restarts: usize, seed: u64) -> Result<Vec<BetheState>, BetheError> {
    sector.validate(spec)?;
    let open = spec.boundary.is_open();
    if sector.total() == 0 {
        return Ok(vec![BetheState::empty(open)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<C64>> = (0..restarts)
        .map(|_| {
            (0..sector.total())
                .map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    let solved: Vec<Option<BetheState>> = starts.into_par_iter().map(|z| newton(z, sector, spec)).collect();
    let mut out: Vec<BetheState> = Vec::new();
    for s in solved.into_iter().flatten() {
        if !out.iter().any(|o| same_state(o, &s)) {
            out.push(s);
        }
    }
    Ok(out)
}

/// T-Q curve of a state, interpolated at degree + 1 nodes, and the worst
/// relative mismatch at held-out nodes (zero iff all poles cancel).
pub fn tq_curve(kind: TransferKind, state: &BetheState, spec: &ChainSpec, held_out: usize) -> Result<(PolyCurve, f64), TensorError> {
    let degree = degree_bound(kind, spec);
    // Offset nodes keep clear of the half-integer poles of the prefactors.
    let samples: Vec<(C64, C64)> = interpolation_nodes(degree + 1 + held_out)
        .into_iter()
        .map(|x| {
            let u = re(x + 0.0137);
            (u, lambda_tq(kind, u, state, spec))
        })
        .collect();
    let curve = interpolate_poly(&samples[..=degree], degree, 0.0)?;
    let miss = samples[degree + 1..]
        .iter()
        .map(|&(x, y)| scalar_residual(curve.eval(x), y, 0.0))
        .fold(0.0, f64::max);
    Ok((curve, miss))
}

/// Outcome of matching one state against the oracle curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMatch {
    pub sector: Sector,
    pub state: BetheState,
    pub lambda: PolyCurve,
    pub lambda_plus: PolyCurve,
    pub lambda_minus: PolyCurve,
    /// Worst held-out mismatch of the three T-Q curves.
    pub regularity: f64,
    /// Index of the closest oracle curve and its coefficient distance
    /// (worst over the three transfer matrices).
    pub best_curve: Option<usize>,
    pub distance: f64,
    /// `d ln Lambda / du` at zero.
    pub energy: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matches: Vec<StateMatch>,
    /// Oracle curve indices matched by no state within the tolerance.
    pub unmatched_curves: Vec<usize>,
    pub tolerance: f64,
}

impl MatchReport {
    /// Distinct oracle curves matched within the tolerance.
    pub fn matched_curves(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .matches
            .iter()
            .filter(|m| m.distance <= self.tolerance)
            .filter_map(|m| m.best_curve)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn match_state(state: &BetheState, curves: &[EigenCurve], spec: &ChainSpec) -> Result<StateMatch, TensorError> {
    let (lambda, r0) = tq_curve(TransferKind::Fundamental, state, spec, 2)?;
    let (lambda_plus, r1) = tq_curve(TransferKind::Plus, state, spec, 2)?;
    let (lambda_minus, r2) = tq_curve(TransferKind::Minus, state, spec, 2)?;
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in curves.iter().enumerate() {
        let d = c
            .lambda
            .distance(&lambda)
            .max(c.lambda_plus.distance(&lambda_plus))
            .max(c.lambda_minus.distance(&lambda_minus));
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((k, d));
        }
    }
    let energy = lambda.derivative().eval(re(0.0)) / lambda.eval(re(0.0));
    Ok(StateMatch {
        sector: state.sector(),
        state: state.clone(),
        lambda,
        lambda_plus,
        lambda_minus,
        regularity: r0.max(r1).max(r2),
        best_curve: best.map(|b| b.0),
        distance: best.map_or(f64::INFINITY, |b| b.1),
        energy,
    })
}

/// Matches every state against the oracle curves. A curve counts as
/// matched when some state, or a curve identical to a matched one, lies
/// within the tolerance.
pub fn match_spectrum(states: &[BetheState], curves: &[EigenCurve], spec: &ChainSpec, tolerance: f64) -> Result<MatchReport, TensorError> {
    let matches: Vec<StateMatch> = states
        .iter()
        .map(|s| match_state(s, curves, spec))
        .collect::<Result<_, _>>()?;
    let unmatched_curves = (0..curves.len())
        .filter(|&k| {
            !matches.iter().any(|m| {
                m.lambda.distance(&curves[k].lambda) <= tolerance
                    && m.lambda_plus.distance(&curves[k].lambda_plus) <= tolerance
                    && m.lambda_minus.distance(&curves[k].lambda_minus) <= tolerance
            })
        })
        .collect();
    Ok(MatchReport {
        matches,
        unmatched_curves,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::joint_eigencurves;
    use proptest::prelude::*;

    fn periodic_homogeneous() -> ChainSpec {
        ChainSpec::homogeneous(1, Boundary::Periodic)
    }

    #[test]
    fn empty_periodic_curve() {
        let spec = periodic_homogeneous();
        let st = BetheState::empty(false);
        let (curve, miss) = tq_curve(TransferKind::Fundamental, &st, &spec, 2).unwrap();
        assert!(miss < 1e-12);
        assert!(curve.distance(&PolyCurve::new(vec![re(2.0), re(12.0), re(6.0)])) < 1e-12);
        let l0 = lambda_tq(TransferKind::Fundamental, re(0.0), &st, &spec);
        let l2 = lambda_tq(TransferKind::Fundamental, re(-2.0), &st, &spec);
        assert!((l0 * l2 - re(4.0)).norm() < 1e-12);
        let big = 1e4;
        assert!((lambda_tq(TransferKind::Fundamental, re(big), &st, &spec) / (big * big) - re(6.0)).norm() < 1e-2);
    }

    #[test]
    fn sector_parsing_and_validation() {
        assert_eq!("1, 0,2".parse::<Sector>().unwrap(), Sector::new(1, 0, 2));
        assert!("1,0".parse::<Sector>().is_err());
        assert!("a,b,c".parse::<Sector>().is_err());
        let open = ChainSpec::with_defaults(1, Boundary::Open(BoundaryParams::fixture(-1, 1)));
        assert!(Sector::new(0, 0, 0).validate(&open).is_err());
        assert!(Sector::new(2, 1, 0).validate(&open).is_ok());
        assert_eq!(Sector::sweep(&open).len(), 6);
        assert_eq!(Sector::sweep(&periodic_homogeneous()).len(), 36);
    }

    #[test]
    fn empty_sector_is_trivially_solved() {
        let spec = periodic_homogeneous();
        let states = solve_bae(Sector::new(0, 0, 0), &spec, 5, 1).unwrap();
        assert_eq!(states.len(), 1);
        assert!(bae_residuals(&states[0], &spec).is_empty());
    }

    #[test]
    fn periodic_type_two_residual_drops_after_solving() {
        let spec = ChainSpec::with_defaults(2, Boundary::Periodic);
        let trial = BetheState {
            mu1: vec![C64::new(0.4, 0.3)],
            mu2: vec![C64::new(-0.2, 0.7)],
            mu3: vec![],
            open: false,
            residual: f64::INFINITY,
        };
        let r = bae_residuals(&trial, &spec);
        assert_eq!(r.len(), 2);
        assert!(r[1].norm() > 1e-3);
    }

    #[test]
    fn periodic_single_site_first_sector_has_no_finite_roots() {
        // The cleared equation is the constant -1 for one site.
        let spec = periodic_homogeneous();
        let st = BetheState {
            mu1: vec![C64::new(0.3, -0.2)],
            mu2: vec![],
            mu3: vec![],
            open: false,
            residual: 0.0,
        };
        let eq = cleared_equations(&st, &spec);
        assert!((eq[0].0 - re(-1.0)).norm() < 1e-12);
        assert!(solve_bae(Sector::new(1, 0, 0), &spec, 10, 3).unwrap().is_empty());
    }

    #[test]
    fn free_and_non_isolated_roots_are_rejected() {
        // A lone second-type root satisfies its equation identically; a pair
        // of first-type roots symmetric about the inhomogeneity is a family.
        let spec = ChainSpec::with_defaults(1, Boundary::Periodic);
        for sector in [Sector::new(0, 1, 0), Sector::new(0, 0, 1), Sector::new(2, 0, 0)] {
            assert!(solve_bae(sector, &spec, 24, 5).unwrap().is_empty(), "{sector}");
        }
        let lone = BetheState {
            mu1: vec![],
            mu2: vec![],
            mu3: vec![C64::new(0.8, -0.1)],
            open: false,
            residual: 0.0,
        };
        assert!(bae_residuals(&lone, &spec)[0].norm() < 1e-15);
    }

    #[test]
    fn open_empty_chain_matches_boundary_trace() {
        use crate::boundary::{k_v, k_v_dual};
        for params in [BoundaryParams::generic(), BoundaryParams::fixture(-1, 1)] {
            let spec = ChainSpec {
                theta: vec![],
                boundary: Boundary::Open(params),
            };
            let st = BetheState::empty(true);
            for u in [0.37, 1.4] {
                let t = k_v_dual(re(u), &params).matmul(&k_v(re(u), &params.left())).trace();
                let l = lambda_tq(TransferKind::Fundamental, re(u), &st, &spec);
                assert!(scalar_residual(t, l, 0.0) < 1e-10, "{t} {l}");
            }
        }
    }

    #[test]
    fn open_nondegenerate_fixture_matches_oracle() {
        let spec = ChainSpec::with_defaults(1, Boundary::Open(BoundaryParams::fixture(-1, 1)));
        let curves = joint_eigencurves(&spec).unwrap();
        let states = solve_bae(Sector::new(1, 0, 0), &spec, 24, 7).unwrap();
        assert!(!states.is_empty());
        let report = match_spectrum(&states, &curves, &spec, 1e-5).unwrap();
        assert!(report.matches.iter().any(|m| m.distance < 1e-5), "{report:?}");
        for m in &report.matches {
            assert!(m.regularity < 1e-7);
            let l = &m.lambda;
            assert!(l.reflect(-2.0).distance(l) < 1e-7);
        }
    }

    #[test]
    fn open_degenerate_fixture_converges() {
        let spec = ChainSpec::with_defaults(1, Boundary::Open(BoundaryParams::fixture(1, 1)));
        let states = solve_bae(Sector::new(1, 0, 0), &spec, 16, 11).unwrap();
        assert!(!states.is_empty());
        assert!(states.iter().all(|s| s.residual < CONVERGED && s.mu1[0].re >= 0.0));
    }

    #[test]
    fn solver_is_deterministic() {
        let spec = ChainSpec::with_defaults(1, Boundary::Open(BoundaryParams::fixture(-1, 1)));
        let a = solve_bae(Sector::new(2, 1, 0), &spec, 12, 5).unwrap();
        let b = solve_bae(Sector::new(2, 1, 0), &spec, 12, 5).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn open_q_reflection_symmetry(r1 in -2.0..2.0f64, i1 in -2.0..2.0f64, r2 in -2.0..2.0f64, i2 in -2.0..2.0f64, u in -3.0..3.0f64, v in -3.0..3.0f64) {
            let q = QPolys { mu1: vec![C64::new(r1, i1)], mu2: vec![C64::new(r2, i2)], mu3: vec![C64::new(i1, r2)], open: true };
            let z = C64::new(u, v);
            prop_assert!(scalar_residual(q.q1(z), q.q1(-z - 1.0), 0.0) < 1e-12);
            prop_assert!(scalar_residual(q.q2(z), q.q2(-z - 2.0), 0.0) < 1e-12);
            prop_assert!(scalar_residual(q.q3(z), q.q3(-z - 2.0), 0.0) < 1e-12);
        }
    }
}
