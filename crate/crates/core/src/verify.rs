//! Check registry and suite runner behind the `verify` command.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{check_k_fusion, check_reflection_equation, commutator_witness, BoundaryParams, KFusionId, ReflectionId};
use crate::config::{ConfigError, RunConfig};
use crate::fusion::{check_fusion_identity, verify_degeneracy, FusionId, ProjectorKind};
use crate::report::{Bound, CheckEntry, VerificationReport};
use crate::rmatrix::{check_r_property, RFamily, RProperty};
use crate::spectrum::{check_eigen_relations, joint_eigencurves};
use crate::tensor::{re, C64};
use crate::transfer::{hamiltonian, operator_identities, Boundary, ChainSpec, IdentityCheck};

/// Random points per R-matrix property.
pub const R_SAMPLES: usize = 50;
/// Random points per fusion identity.
pub const FUSION_SAMPLES: usize = 15;
/// Boundary parameter sets per boundary identity.
pub const PARAM_SETS: usize = 5;
/// Threshold for the non-commutativity witness.
pub const WITNESS_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Rmatrix,
    Fusion,
    Boundary,
    Transfer,
    Spectrum,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Rmatrix, Suite::Fusion, Suite::Boundary, Suite::Transfer, Suite::Spectrum];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rmatrix => "rmatrix",
            Suite::Fusion => "fusion",
            Suite::Boundary => "boundary",
            Suite::Transfer => "transfer",
            Suite::Spectrum => "spectrum",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| ConfigError::new("suite", format!("unknown suite '{s}'")))
    }
}

type Task = Box<dyn Fn(&mut ChaCha8Rng) -> Vec<CheckEntry> + Send + Sync>;

/// A named unit of work; its random stream is derived from the name, so
/// sample points do not depend on which other jobs run.
pub struct Job {
    name: String,
    task: Task,
}

impl Job {
    fn new(name: impl Into<String>, task: impl Fn(&mut ChaCha8Rng) -> Vec<CheckEntry> + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            task: Box::new(task),
        }
    }
}

/// 64-bit FNV-1a, used to turn a job name into a stream id.
fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

pub fn job_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

/// Runs jobs in parallel and concatenates their entries in job order.
pub fn run_jobs(jobs: Vec<Job>, cfg: &RunConfig) -> Vec<CheckEntry> {
    let results: Vec<Vec<CheckEntry>> = jobs
        .into_par_iter()
        .map(|job| {
            let mut rng = job_rng(cfg.seed, &job.name);
            let start = Instant::now();
            let mut entries = (job.task)(&mut rng);
            if cfg.record_timings {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                entries.iter_mut().for_each(|e| e.wall_time_ms = Some(ms));
            }
            entries
        })
        .collect();
    results.concat()
}

/// A generic complex sample point.
pub fn sample_point(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-2.5..2.5), rng.random_range(-1.0..1.0))
}

fn property_name(p: RProperty) -> &'static str {
    match p {
        RProperty::Regularity => "regularity",
        RProperty::Unitarity => "unitarity",
        RProperty::CrossingSymmetry => "crossing_symmetry",
        RProperty::CrossingUnitarity => "crossing_unitarity",
        RProperty::Ybe => "ybe",
    }
}

fn property_anchor(p: RProperty) -> &'static str {
    match p {
        RProperty::Regularity => "r_matrix_regularity",
        RProperty::Unitarity => "r_matrix_unitarity",
        RProperty::CrossingSymmetry => "r_matrix_crossing_symmetry",
        RProperty::CrossingUnitarity => "r_matrix_crossing_unitarity",
        RProperty::Ybe => "yang_baxter_equation",
    }
}

fn rmatrix_jobs() -> Vec<Job> {
    let mut jobs = Vec::new();
    for family in RFamily::ALL {
        let mut props = vec![RProperty::Unitarity, RProperty::CrossingUnitarity, RProperty::Ybe];
        if family == RFamily::VV {
            props.insert(0, RProperty::Regularity);
            props.insert(2, RProperty::CrossingSymmetry);
        }
        for prop in props {
            let id = format!("rmatrix_{}_{}", property_name(prop), family.name());
            jobs.push(Job::new(id.clone(), move |rng| {
                let (count, points): (usize, Vec<(C64, C64)>) = if prop == RProperty::Regularity {
                    (1, vec![(re(0.0), re(0.0))])
                } else {
                    (R_SAMPLES, (0..R_SAMPLES).map(|_| (sample_point(rng), sample_point(rng))).collect())
                };
                let mut worst: f64 = 0.0;
                for (u, v) in points {
                    match check_r_property(family, prop, u, v) {
                        Ok(r) => worst = worst.max(r),
                        Err(e) => return vec![CheckEntry::failed(id.clone(), property_anchor(prop), 1e-9, e)],
                    }
                }
                let desc = if count == 1 {
                    "u = 0".to_string()
                } else {
                    format!("{count} random complex (u, v), Re in [-2.5, 2.5], Im in [-1, 1]")
                };
                vec![CheckEntry::residual(id.clone(), property_anchor(prop), worst, 1e-9, count, desc)]
            }));
        }
    }
    for kind in ProjectorKind::ALL {
        let id = format!("rmatrix_degeneracy_{}", projector_name(kind));
        jobs.push(Job::new(id.clone(), move |_| {
            let d = verify_degeneracy(kind);
            let (family, point) = kind.degeneration();
            let mut e = CheckEntry::residual(
                id.clone(),
                "r_matrix_degeneration",
                d.residual,
                1e-10,
                1,
                format!(
                    "{} at u = {point}: rank {} (expected {}), projector rank {}; residual is the image leak",
                    family.name(),
                    d.rank_r,
                    kind.rank(),
                    d.rank_p
                ),
            );
            e.pass = d.holds(1e-10);
            vec![e]
        }));
    }
    jobs
}

fn projector_name(kind: ProjectorKind) -> &'static str {
    match kind {
        ProjectorKind::Singlet => "singlet",
        ProjectorKind::Adjoint => "adjoint",
        ProjectorKind::SpinorPlus => "spinor_plus",
        ProjectorKind::SpinorMinus => "spinor_minus",
        ProjectorKind::Antisymmetric => "antisymmetric",
    }
}

fn fusion_jobs() -> Vec<Job> {
    FusionId::ALL
        .into_iter()
        .map(|fid| {
            let id = format!("fusion_{}", fid.name());
            let anchor = match fid {
                FusionId::SpinorVectorFromSpinors | FusionId::VectorFromSpinors => "fused_r_matrix_reconstruction",
                _ => "fusion_relations",
            };
            Job::new(id.clone(), move |rng| {
                let mut worst: f64 = 0.0;
                for _ in 0..FUSION_SAMPLES {
                    match check_fusion_identity(fid, sample_point(rng)) {
                        Ok(r) => worst = worst.max(r),
                        Err(e) => return vec![CheckEntry::failed(id.clone(), anchor, 1e-9, e)],
                    }
                }
                vec![CheckEntry::residual(
                    id.clone(),
                    anchor,
                    worst,
                    1e-9,
                    FUSION_SAMPLES,
                    format!("{FUSION_SAMPLES} random complex u"),
                )]
            })
        })
        .collect()
}

/// The configured parameters, the generic set, the `x = 0` fixture and two
/// random sets drawn from the seed.
pub fn boundary_param_sets(cfg: &RunConfig) -> Vec<BoundaryParams> {
    let mut rng = job_rng(cfg.seed, "boundary_param_sets");
    let mut sets = vec![cfg.boundary_params, BoundaryParams::generic(), BoundaryParams::fixture(1, 1)];
    while sets.len() < PARAM_SETS {
        sets.push(BoundaryParams::random(&mut rng));
    }
    sets
}

fn boundary_jobs(cfg: &RunConfig) -> Vec<Job> {
    let sets = boundary_param_sets(cfg);
    let samples = cfg.samples;
    let mut jobs = Vec::new();
    for which in ReflectionId::ALL {
        let id = format!("boundary_reflection_{}", which.name());
        let sets = sets.clone();
        jobs.push(Job::new(id.clone(), move |rng| {
            let mut worst: f64 = 0.0;
            for p in &sets {
                for _ in 0..samples {
                    match check_reflection_equation(which, sample_point(rng), sample_point(rng), p) {
                        Ok(r) => worst = worst.max(r),
                        Err(e) => return vec![CheckEntry::failed(id.clone(), "reflection_equation", 1e-9, e)],
                    }
                }
            }
            vec![CheckEntry::residual(
                id.clone(),
                "reflection_equation",
                worst,
                1e-9,
                samples * sets.len(),
                format!("{samples} random complex (u, v) for each of {} parameter sets", sets.len()),
            )]
        }));
    }
    for which in KFusionId::ALL {
        let id = format!("boundary_k_fusion_{}", which.name());
        let sets = sets.clone();
        jobs.push(Job::new(id.clone(), move |rng| {
            let mut worst: f64 = 0.0;
            for p in &sets {
                for _ in 0..samples {
                    match check_k_fusion(which, sample_point(rng), p) {
                        Ok(r) => worst = worst.max(r),
                        Err(e) => return vec![CheckEntry::failed(id.clone(), "k_matrix_fusion", 1e-9, e)],
                    }
                }
            }
            vec![CheckEntry::residual(
                id.clone(),
                "k_matrix_fusion",
                worst,
                1e-9,
                samples * sets.len(),
                format!("{samples} random complex u for each of {} parameter sets", sets.len()),
            )]
        }));
    }
    let generic: Vec<BoundaryParams> = std::iter::once(BoundaryParams::generic()).chain(sets[3..].iter().copied()).collect();
    jobs.push(Job::new("boundary_non_commutativity", move |rng| {
        let mut least = f64::INFINITY;
        for p in &generic {
            least = least.min(commutator_witness(sample_point(rng), p));
        }
        vec![CheckEntry::new(
            "boundary_non_commutativity",
            "boundary_non_commutativity",
            least,
            WITNESS_FLOOR,
            Bound::Lower,
            generic.len(),
            "smallest max |[K, K_dual]| over the generic and random parameter sets",
        )]
    }));
    jobs
}

/// Anchor and tolerance of an operator or eigenvalue identity.
pub fn identity_policy(id: &str, open: bool, default_tol: f64) -> (&'static str, f64) {
    let eigen = id.starts_with("eigen_");
    let core = id.trim_start_matches("eigen_");
    if eigen {
        let anchor = if core.starts_with("product") {
            "eigenvalue_functional_relations"
        } else if core.starts_with("leading") || core.starts_with("degree") {
            "eigenvalue_asymptotics"
        } else if core.starts_with("crossing") {
            "eigenvalue_crossing"
        } else if core.starts_with("special") {
            "eigenvalue_special_values"
        } else {
            "eigenvalue_trace"
        };
        let tol = if core.starts_with("crossing") || core == "trace" { default_tol } else { 1e-7 };
        return (anchor, tol);
    }
    if core == "commutativity" {
        ("transfer_commutativity", 1e-9)
    } else if core.starts_with("product") {
        ("transfer_product_identities", if open { 1e-7 } else { default_tol })
    } else if core.starts_with("crossing") {
        ("transfer_crossing", 1e-9)
    } else if core.starts_with("special") {
        ("transfer_special_values", default_tol)
    } else if core.starts_with("leading") {
        ("transfer_asymptotics", if open { 1e-6 } else { default_tol })
    } else {
        ("transfer_asymptotics", default_tol)
    }
}

pub fn identity_entries(prefix: &str, checks: Vec<IdentityCheck>, spec: &ChainSpec, default_tol: f64) -> Vec<CheckEntry> {
    checks
        .into_iter()
        .map(|c| {
            let (anchor, tol) = identity_policy(&c.id, spec.boundary.is_open(), default_tol);
            CheckEntry::residual(format!("{prefix}_{}", c.id), anchor, c.residual, tol, c.samples, c.description)
        })
        .collect()
}

fn chain_label(spec: &ChainSpec) -> String {
    format!("{} N={}", if spec.boundary.is_open() { "open" } else { "periodic" }, spec.n())
}

fn transfer_jobs(cfg: &RunConfig, spec: &ChainSpec) -> Vec<Job> {
    let tol = cfg.tolerance;
    let s = spec.clone();
    let mut jobs = vec![Job::new("transfer_identities", move |_| match operator_identities(&s) {
        Ok(checks) => identity_entries("transfer", checks, &s, tol),
        Err(e) => vec![CheckEntry::failed("transfer_identities", "transfer_product_identities", tol, e)],
    })];
    let homogeneous = cfg.homogeneous_spec();
    let defined = match homogeneous.boundary {
        Boundary::Periodic => homogeneous.n() >= 2,
        Boundary::Open(p) => (p.c2.abs() - 2.0).abs() > 1e-12 && (p.c2p.abs() - 2.0).abs() > 1e-12,
    };
    if defined {
        jobs.push(Job::new("transfer_hamiltonian", move |_| match hamiltonian(&homogeneous) {
            Ok(h) => vec![CheckEntry::residual(
                "transfer_hamiltonian",
                "hamiltonian_log_derivative",
                h.fit_residual,
                tol,
                1,
                format!(
                    "{} homogeneous: log-derivative = {:.12} x local sum + {:.12} Id",
                    chain_label(&homogeneous),
                    h.scale.re,
                    h.shift.re
                ),
            )],
            Err(e) => vec![CheckEntry::failed("transfer_hamiltonian", "hamiltonian_log_derivative", tol, e)],
        }));
    }
    jobs
}

fn spectrum_jobs(cfg: &RunConfig, spec: &ChainSpec) -> Vec<Job> {
    let tol = cfg.tolerance;
    let s = spec.clone();
    vec![Job::new("spectrum", move |_| {
        let checks = joint_eigencurves(&s).map_err(|e| e.to_string()).and_then(|curves| {
            check_eigen_relations(&curves, &s).map_err(|e| e.to_string())
        });
        match checks {
            Ok(c) => identity_entries("spectrum", c, &s, tol),
            Err(e) => vec![CheckEntry::failed("spectrum", "eigenvalue_functional_relations", tol, e)],
        }
    })]
}

pub fn suite_jobs(suite: Suite, cfg: &RunConfig, spec: &ChainSpec) -> Vec<Job> {
    match suite {
        Suite::Rmatrix => rmatrix_jobs(),
        Suite::Fusion => fusion_jobs(),
        Suite::Boundary => boundary_jobs(cfg),
        Suite::Transfer => transfer_jobs(cfg, spec),
        Suite::Spectrum => spectrum_jobs(cfg, spec),
        Suite::All => Suite::EACH.into_iter().flat_map(|s| suite_jobs(s, cfg, spec)).collect(),
    }
}

/// Runs a suite on a validated configuration.
pub fn run_verify(suite: Suite, cfg: &RunConfig) -> Result<VerificationReport, ConfigError> {
    cfg.validate()?;
    let spec = cfg.chain_spec()?;
    let entries = run_jobs(suite_jobs(suite, cfg, &spec), cfg);
    Ok(VerificationReport::new(format!("verify {suite}"), cfg, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::is_registered;

    #[test]
    fn rmatrix_registry_shape() {
        let report = run_verify(Suite::Rmatrix, &RunConfig::default()).unwrap();
        let count = |p: &str| report.entries.iter().filter(|e| e.check_id.starts_with(p)).count();
        assert_eq!(count("rmatrix_unitarity"), 5);
        assert_eq!(count("rmatrix_ybe"), 5);
        assert_eq!(count("rmatrix_crossing_symmetry"), 1);
        assert_eq!(count("rmatrix_degeneracy"), 5);
        assert!(report.summary.pass, "{report:#?}");
    }

    #[test]
    fn identity_policies_use_registered_anchors() {
        for id in [
            "commutativity",
            "product_plus",
            "crossing_fused",
            "special_value_half",
            "leading_minus",
            "degree_plus",
            "eigen_product_shift_one",
            "eigen_leading_plus",
            "eigen_degree",
            "eigen_trace",
            "eigen_crossing",
            "eigen_special_value_zero",
        ] {
            assert!(is_registered(identity_policy(id, true, 1e-8).0), "{id}");
        }
    }

    #[test]
    fn streams_depend_on_name_only() {
        let a: f64 = job_rng(3, "x").random();
        let b: f64 = job_rng(3, "x").random();
        let c: f64 = job_rng(3, "y").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
