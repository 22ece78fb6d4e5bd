//! The `spectrum`, `bae` and `compare` commands: reports plus data dumps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bethe::{match_spectrum, match_state, solve_bae, tq_curve, BetheError, BetheState, Sector, StateMatch};
use crate::config::{ConfigError, RunConfig};
use crate::linalg::eigen;
use crate::report::{Bound, CheckEntry, VerificationReport};
use crate::spectrum::{check_eigen_relations, joint_eigencurves, scalar_residual, EigenCurve, SpectrumError};
use crate::tensor::{re, PolyCurve, C64};
use crate::transfer::{hamiltonian, Boundary, ChainSpec, TransferKind};
use crate::verify::identity_entries;

/// Default number of random Newton starts per sector.
pub const DEFAULT_RESTARTS: usize = 64;
/// Held-out mismatch below which a T-Q curve is a polynomial.
pub const REGULARITY_TOL: f64 = 1e-7;
/// Coefficient distance for a state to count as matched.
pub const PERIODIC_MATCH_TOL: f64 = 1e-6;
pub const OPEN_MATCH_TOL: f64 = 1e-5;
/// Coefficient distance for the empty periodic state.
pub const EMPTY_MATCH_TOL: f64 = 1e-8;
/// Agreement between a Bethe energy and a Hamiltonian eigenvalue.
pub const ENERGY_TOL: f64 = 1e-7;
/// Non-empty matched states required from a compare sweep.
pub const PERIODIC_MATCHES_REQUIRED: usize = 3;
pub const OPEN_MATCHES_REQUIRED: usize = 1;

#[derive(Debug, Error)]
pub enum CommandError {
    /// Rejected input; maps to exit code 2.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A computation that could not be carried out; maps to exit code 1.
    #[error("{0}")]
    Failed(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Failed(_) => 1,
        }
    }
}

impl From<SpectrumError> for CommandError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::TooLarge { .. } => CommandError::Config(ConfigError::new("n_sites", e.to_string())),
            other => CommandError::Failed(other.to_string()),
        }
    }
}

impl From<BetheError> for CommandError {
    fn from(e: BetheError) -> Self {
        match e {
            BetheError::OpenSector { .. } | BetheError::SectorSyntax(_) => CommandError::Config(ConfigError::new("sector", e.to_string())),
            other => CommandError::Failed(other.to_string()),
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CommandError {
    CommandError::Failed(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDump {
    pub index: usize,
    pub multiplicity: usize,
    pub degree: usize,
    pub energy: C64,
    pub held_out_residual: f64,
    pub lambda: PolyCurve,
    pub lambda_plus: PolyCurve,
    pub lambda_minus: PolyCurve,
}

impl CurveDump {
    pub fn new(index: usize, c: &EigenCurve) -> Self {
        Self {
            index,
            multiplicity: c.multiplicity,
            degree: c.lambda.degree_bound(),
            energy: c.energy(),
            held_out_residual: c.held_out_residual,
            lambda: c.lambda.clone(),
            lambda_plus: c.lambda_plus.clone(),
            lambda_minus: c.lambda_minus.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub boundary: String,
    pub theta: Vec<f64>,
    pub curves: Vec<CurveDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorDump {
    pub sector: Sector,
    pub restarts: usize,
    pub seed: u64,
    pub states: Vec<StateMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareDump {
    pub spectrum: SpectrumDump,
    pub sectors: Vec<SectorDump>,
    pub matched_curves: Vec<usize>,
    pub unmatched_curves: Vec<usize>,
    pub match_tolerance: f64,
}

/// Overrides the boundary kind from the command line.
pub fn with_boundary(cfg: &RunConfig, boundary: Option<crate::config::BoundaryKind>) -> RunConfig {
    let mut cfg = cfg.clone();
    if let Some(b) = boundary {
        cfg.boundary = b;
    }
    cfg
}

fn spectrum_dump(spec: &ChainSpec, curves: &[EigenCurve]) -> SpectrumDump {
    SpectrumDump {
        boundary: if spec.boundary.is_open() { "open" } else { "periodic" }.into(),
        theta: spec.theta.clone(),
        curves: curves.iter().enumerate().map(|(k, c)| CurveDump::new(k, c)).collect(),
    }
}

fn spectrum_entries(cfg: &RunConfig, spec: &ChainSpec, curves: &[EigenCurve]) -> Result<Vec<CheckEntry>, CommandError> {
    let checks = check_eigen_relations(curves, spec)?;
    Ok(identity_entries("spectrum", checks, spec, cfg.tolerance))
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<(VerificationReport, SpectrumDump), CommandError> {
    cfg.validate()?;
    let spec = cfg.chain_spec()?;
    let curves = joint_eigencurves(&spec)?;
    let entries = spectrum_entries(cfg, &spec, &curves)?;
    Ok((VerificationReport::new("spectrum", cfg, entries), spectrum_dump(&spec, &curves)))
}

fn match_tolerance(spec: &ChainSpec) -> f64 {
    if spec.boundary.is_open() {
        OPEN_MATCH_TOL
    } else {
        PERIODIC_MATCH_TOL
    }
}

/// Oracle curves when the chain is small enough, otherwise none.
fn oracle(spec: &ChainSpec) -> Result<Option<Vec<EigenCurve>>, CommandError> {
    match joint_eigencurves(spec) {
        Ok(c) => Ok(Some(c)),
        Err(SpectrumError::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn state_entries(prefix: &str, m: &StateMatch, tolerance: Option<f64>) -> Vec<CheckEntry> {
    let roots = format!("sector {}", m.sector);
    let mut out = vec![
        CheckEntry::residual(
            format!("{prefix}_equations"),
            "bethe_equations",
            m.state.residual,
            crate::bethe::CONVERGED,
            1,
            format!("scaled Bethe equation residual, {roots}"),
        ),
        CheckEntry::residual(
            format!("{prefix}_t_q_regularity"),
            "t_q_relation",
            m.regularity,
            REGULARITY_TOL,
            6,
            "worst held-out mismatch of the three T-Q polynomials",
        ),
    ];
    if let Some(tol) = tolerance {
        out.push(CheckEntry::residual(
            format!("{prefix}_match"),
            "t_q_relation",
            m.distance,
            tol,
            3,
            format!("coefficient distance to oracle curve {:?}", m.best_curve),
        ));
    }
    out
}

pub fn run_bae(cfg: &RunConfig, sector: Sector, restarts: usize) -> Result<(VerificationReport, SectorDump), CommandError> {
    cfg.validate()?;
    let spec = cfg.chain_spec()?;
    sector.validate(&spec)?;
    let states = solve_bae(sector, &spec, restarts, cfg.seed)?;
    let curves = oracle(&spec)?;
    let tol = curves.as_ref().map(|_| match_tolerance(&spec));
    let matches: Vec<StateMatch> = states
        .iter()
        .map(|s| match_state(s, curves.as_deref().unwrap_or(&[]), &spec))
        .collect::<Result<_, _>>()
        .map_err(failed)?;
    let entries = matches
        .iter()
        .enumerate()
        .flat_map(|(k, m)| state_entries(&format!("bae_state_{k}"), m, tol))
        .collect();
    let report = VerificationReport::new(format!("bae {sector}"), cfg, entries);
    Ok((
        report,
        SectorDump {
            sector,
            restarts,
            seed: cfg.seed,
            states: matches,
        },
    ))
}

/// `6 (u - t)^2 + 12 (u - t) + 2`: the empty-state eigenvalue of a one-site
/// periodic chain with inhomogeneity `t`.
pub fn single_site_empty_curve(t: f64) -> PolyCurve {
    PolyCurve::new(vec![re(6.0 * t * t - 12.0 * t + 2.0), re(12.0 - 12.0 * t), re(6.0)])
}

/// Empty-state energy of the homogeneous periodic chain against the
/// nearest eigenvalue of the log-derivative Hamiltonian.
pub fn bethe_energy_check(n: usize) -> Result<CheckEntry, CommandError> {
    let spec = ChainSpec::homogeneous(n, Boundary::Periodic);
    let (lambda, _) = tq_curve(TransferKind::Fundamental, &BetheState::empty(false), &spec, 2).map_err(failed)?;
    let energy = lambda.derivative().eval(re(0.0)) / lambda.eval(re(0.0));
    let h = hamiltonian(&spec).map_err(failed)?;
    let (values, _) = eigen(&h.log_derivative).map_err(failed)?;
    let nearest = values
        .iter()
        .copied()
        .min_by(|a, b| (a - energy).norm().total_cmp(&(b - energy).norm()))
        .unwrap_or(C64::new(f64::NAN, 0.0));
    Ok(CheckEntry::residual(
        "compare_bethe_energy",
        "bethe_energy",
        scalar_residual(energy, nearest, 1.0),
        ENERGY_TOL,
        1,
        format!(
            "homogeneous periodic N={n}: empty-state energy {:.10} vs Hamiltonian eigenvalue {:.10}",
            energy.re, nearest.re
        ),
    ))
}

/// Class label per curve; curves whose three eigenvalue polynomials agree
/// within the tolerance share a label.
pub fn curve_classes(curves: &[EigenCurve], tol: f64) -> Vec<usize> {
    let mut labels: Vec<usize> = Vec::with_capacity(curves.len());
    let mut next = 0;
    for (k, c) in curves.iter().enumerate() {
        let same = (0..k).find(|&j| {
            let d = &curves[j];
            d.lambda.distance(&c.lambda) <= tol && d.lambda_plus.distance(&c.lambda_plus) <= tol && d.lambda_minus.distance(&c.lambda_minus) <= tol
        });
        labels.push(match same {
            Some(j) => labels[j],
            None => {
                next += 1;
                next - 1
            }
        });
    }
    labels
}

pub fn run_compare(cfg: &RunConfig, restarts: usize) -> Result<(VerificationReport, CompareDump), CommandError> {
    cfg.validate()?;
    let spec = cfg.chain_spec()?;
    let curves = joint_eigencurves(&spec)?;
    let mut entries = spectrum_entries(cfg, &spec, &curves)?;
    let tol = match_tolerance(&spec);
    let open = spec.boundary.is_open();

    let mut sectors = Vec::new();
    let mut all_states = Vec::new();
    for sector in Sector::sweep(&spec) {
        let states = solve_bae(sector, &spec, restarts, cfg.seed)?;
        all_states.extend(states.iter().cloned());
        let states = states.iter().map(|s| match_state(s, &curves, &spec)).collect::<Result<_, _>>().map_err(failed)?;
        sectors.push(SectorDump {
            sector,
            restarts,
            seed: cfg.seed,
            states,
        });
    }
    let report = match_spectrum(&all_states, &curves, &spec, tol).map_err(failed)?;

    if !open {
        let empty = report.matches.iter().find(|m| m.sector.total() == 0);
        entries.push(match empty {
            Some(m) => CheckEntry::residual(
                "compare_empty_state_match",
                "t_q_relation",
                m.distance,
                EMPTY_MATCH_TOL,
                3,
                format!("empty-state T-Q curves vs closest oracle curve {:?}", m.best_curve),
            ),
            None => CheckEntry::failed("compare_empty_state_match", "t_q_relation", EMPTY_MATCH_TOL, "empty state missing"),
        });
        if let (Some(m), [t]) = (empty, spec.theta.as_slice()) {
            entries.push(CheckEntry::residual(
                "compare_empty_state_closed_form",
                "t_q_relation",
                m.lambda.distance(&single_site_empty_curve(*t)),
                EMPTY_MATCH_TOL,
                3,
                "empty-state curve vs 6(u - t)^2 + 12(u - t) + 2",
            ));
        }
    }
    let regularity = report.matches.iter().map(|m| m.regularity).fold(0.0, f64::max);
    entries.push(CheckEntry::residual(
        "compare_t_q_regularity",
        "t_q_relation",
        regularity,
        REGULARITY_TOL,
        report.matches.len(),
        "worst held-out mismatch of the T-Q polynomials over all converged states",
    ));
    // Curves that coincide cannot be told apart by matching, so matches are
    // counted per class of equal curves, excluding the empty state's class.
    let classes = curve_classes(&curves, tol);
    let empty_class = report
        .matches
        .iter()
        .find(|m| m.sector.total() == 0 && m.distance <= tol)
        .and_then(|m| m.best_curve)
        .map(|c| classes[c]);
    let mut distinct: Vec<usize> = report
        .matches
        .iter()
        .filter(|m| m.sector.total() > 0 && m.distance <= tol)
        .filter_map(|m| m.best_curve.map(|c| classes[c]))
        .filter(|&c| Some(c) != empty_class)
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    let required = if open { OPEN_MATCHES_REQUIRED } else { PERIODIC_MATCHES_REQUIRED };
    entries.push(CheckEntry::new(
        "compare_matched_states",
        "bethe_equations",
        distinct.len() as f64,
        required as f64,
        Bound::Lower,
        report.matches.len(),
        format!(
            "distinct eigenvalue curves ({} classes among {} oracle curves) matched within {tol:e} by isolated states with at least one root, over {} sectors; the empty state's class is excluded",
            classes.iter().max().map_or(0, |c| c + 1),
            curves.len(),
            sectors.len()
        ),
    ));
    if !open && spec.n() >= 2 {
        entries.push(bethe_energy_check(spec.n())?);
    }

    let dump = CompareDump {
        spectrum: spectrum_dump(&spec, &curves),
        sectors,
        matched_curves: report.matched_curves(),
        unmatched_curves: report.unmatched_curves.clone(),
        match_tolerance: tol,
    };
    Ok((VerificationReport::new("compare", cfg, entries), dump))
}
