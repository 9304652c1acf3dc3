//! topology → predictions → h-sweep solve → diagnostics.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wk_field::{parse_field, DomainSpec, Grid, GridSpec, ScalarField};
use wk_kramers::{boundary_saddle_formula, BoundarySaddleVerdict, ErrorOrder, KramersError, Predictions};
use wk_quasimode::{
    build_all, dirichlet_energy, interaction_matrix, projector_diagnostics, CutoffProfile, InteractionMatrices,
    ProjectorReport, QuasiMode,
};
use wk_spectrum::{assemble, count_small_cluster, smallest_eigenpairs, ClusterCount, Method, SpectrumResult, Stencil};
use wk_topology::{
    analyze, CriticalPoint, HypothesisReport, SaddleSets, TieBreak, Tolerances, Topology, TopologyError, WellLabel,
};

use crate::config::RunConfig;
use crate::fit::{fit_rates, FitError, RateFit};
use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Topology,
    Predict,
    Solve,
    Validate,
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "topology" => Ok(Stage::Topology),
            "predict" => Ok(Stage::Predict),
            "solve" => Ok(Stage::Solve),
            "validate" => Ok(Stage::Validate),
            other => Err(PipelineError::Config(format!("unknown stage `{other}`"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Topology => "topology",
            Stage::Predict => "predict",
            Stage::Solve => "solve",
            Stage::Validate => "validate",
        };
        f.write_str(s)
    }
}

/// Requested stages closed under their dependencies, in pipeline order.
pub fn resolve_stages(requested: &[Stage]) -> Vec<Stage> {
    let mut out: Vec<Stage> = requested.to_vec();
    if out.contains(&Stage::Validate) {
        out.extend([Stage::Predict, Stage::Solve]);
    }
    if !out.is_empty() {
        out.push(Stage::Topology);
    }
    out.sort();
    out.dedup();
    out
}

pub fn parse_stages(list: &str) -> Result<Vec<Stage>, PipelineError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

pub const ALL_STAGES: [Stage; 4] = [Stage::Topology, Stage::Predict, Stage::Solve, Stage::Validate];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    HypothesisViolation,
    NumericFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisViolation => 2,
            Status::NumericFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologySummary {
    pub dimension: usize,
    pub m0: usize,
    pub tol_level: f64,
    pub critical_points: Vec<CriticalPoint>,
    pub saddles: SaddleSets,
    pub labels: Vec<WellLabel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub h: f64,
    pub grid: Vec<usize>,
    pub method: Method,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub norm: f64,
    pub floor: f64,
    pub cluster: ClusterCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub h: f64,
    pub grid: Vec<usize>,
    /// 1-based position in the ascending numeric spectrum.
    pub j: usize,
    pub lambda_numeric: f64,
    /// Prediction matched to branch j (none beyond m₀).
    pub minimum: Option<usize>,
    pub lambda_predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub residual: f64,
    pub below_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub branch: usize,
    pub minimum: usize,
    pub grid: Vec<usize>,
    pub h: Vec<f64>,
    pub energy_pred: f64,
    pub gamma_pred: f64,
    pub fit: Option<RateFit>,
    pub error: Option<FitError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeEnergy {
    pub minimum: usize,
    pub energy: f64,
    pub predicted: f64,
    pub relative_error: f64,
    pub collar_fraction: f64,
    pub log_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum QuasimodeRow {
    Computed {
        h: f64,
        grid: Vec<usize>,
        energies: Vec<QuasimodeEnergy>,
        interaction: Box<InteractionMatrices>,
        projector: ProjectorReport,
    },
    Failed {
        h: f64,
        grid: Vec<usize>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: RunConfig,
    pub stages: Vec<Stage>,
    pub status: Status,
    pub failure: Option<StageFailure>,
    pub topology: Option<TopologySummary>,
    pub hypotheses: Option<HypothesisReport>,
    pub predictions: Option<Predictions>,
    pub corollary: Option<BoundarySaddleVerdict>,
    pub spectra: Vec<SpectrumRow>,
    pub ratios: Vec<RatioRow>,
    pub rates: Vec<RateRow>,
    /// Prediction index (into `predictions.predictions`) of numeric branch j.
    pub branch_matching: Vec<usize>,
    pub quasimodes: Vec<QuasimodeRow>,
    pub verdicts: Vec<Verdict>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Vectors kept out of the report, for the binary dumps.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub eigenvectors: Vec<(f64, Vec<Vec<f64>>)>,
    pub quasimodes: Vec<(f64, Vec<QuasiMode>)>,
}

/// Relative band around 1 allowed for λ/Λ_h at one h.
pub fn ratio_band(order: ErrorOrder, h: f64) -> f64 {
    match order {
        ErrorOrder::H => 3.0 * h,
        ErrorOrder::SqrtH => 5.0 * h.sqrt(),
    }
}

pub const ENERGY_FIT_TOL: f64 = 0.05;
pub const GAMMA_FIT_TOL: f64 = 0.2;
pub const SINGULAR_MATCH_TOL: f64 = 0.15;
pub const COROLLARY_BAND: (f64, f64) = (0.5, 2.0);

pub fn run_pipeline(config: &RunConfig, stages: &[Stage]) -> Result<RunReport, PipelineError> {
    run_with_artifacts(config, stages).map(|(r, _)| r)
}

fn setup(config: &RunConfig) -> Result<(ScalarField, Grid), PipelineError> {
    config.validate()?;
    let field = parse_field(&config.potential, config.dimension).map_err(|e| PipelineError::Config(e.to_string()))?;
    let domain = DomainSpec::new(config.domain.lower.clone(), config.domain.upper.clone())
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let grid = Grid::new(domain, GridSpec { nodes: config.grid.clone() }).map_err(|e| PipelineError::Config(e.to_string()))?;
    Ok((field, grid))
}

fn topology_status(e: &TopologyError) -> Status {
    match e {
        TopologyError::Degenerate { .. } | TopologyError::NoMinima => Status::HypothesisViolation,
        _ => Status::NumericFailure,
    }
}

fn kramers_status(e: &KramersError) -> Status {
    match e {
        KramersError::Hypotheses(_) => Status::HypothesisViolation,
        _ => Status::NumericFailure,
    }
}

pub fn run_with_artifacts(config: &RunConfig, stages: &[Stage]) -> Result<(RunReport, Artifacts), PipelineError> {
    let (field, grid) = setup(config)?;
    let stages = resolve_stages(stages);
    let mut report = RunReport {
        schema: crate::config::SCHEMA,
        config: config.clone(),
        stages: stages.clone(),
        status: Status::Ok,
        failure: None,
        topology: None,
        hypotheses: None,
        predictions: None,
        corollary: None,
        spectra: Vec::new(),
        ratios: Vec::new(),
        rates: Vec::new(),
        branch_matching: Vec::new(),
        quasimodes: Vec::new(),
        verdicts: Vec::new(),
    };
    let mut artifacts = Artifacts::default();
    let fail = |report: &mut RunReport, status: Status, stage: Stage, message: String| {
        report.status = status;
        report.failure = Some(StageFailure { stage, message });
    };
    if stages.is_empty() {
        return Ok((report, artifacts));
    }

    // topology
    let topology = match analyze(&field, &grid, &Tolerances::default(), TieBreak::default()) {
        Ok(t) => t,
        Err(e) => {
            fail(&mut report, topology_status(&e), Stage::Topology, e.to_string());
            return Ok((report, artifacts));
        }
    };
    let m0 = topology.labeling.m0();
    report.topology = Some(TopologySummary {
        dimension: topology.dimension,
        m0,
        tol_level: topology.tol_level,
        critical_points: topology.critical_points.clone(),
        saddles: topology.saddles.clone(),
        labels: topology.labeling.labels.clone(),
    });
    report.hypotheses = Some(topology.hypotheses.clone());
    if !topology.hypotheses.pass() {
        let v = &topology.hypotheses.violations;
        fail(&mut report, Status::HypothesisViolation, Stage::Topology, format!("{} hypothesis violation(s): {}", v.len(), v.join("; ")));
        return Ok((report, artifacts));
    }
    let needs_k = stages.contains(&Stage::Solve);
    if needs_k && config.k < m0 + 2 {
        return Err(PipelineError::Config(format!("k = {} but the topology has m0 = {m0}; need k ≥ {}", config.k, m0 + 2)));
    }

    // predictions
    if stages.contains(&Stage::Predict) {
        match wk_kramers::predict(&topology) {
            Ok(p) => report.predictions = Some(p),
            Err(e) => {
                fail(&mut report, kramers_status(&e), Stage::Predict, e.to_string());
                return Ok((report, artifacts));
            }
        }
        if config.corollary {
            report.corollary = Some(boundary_saddle_formula(&topology));
        }
    }

    // h-sweep
    if !stages.contains(&Stage::Solve) {
        return Ok((report, artifacts));
    }
    let want_vectors = config.dump_vectors || (stages.contains(&Stage::Validate) && config.quasimode);
    let solved: Vec<Result<SpectrumResult, String>> = config
        .h
        .par_iter()
        .map(|&h| {
            let w = assemble(&field, &grid, h, Stencil::Factorized).map_err(|e| format!("h = {h}: {e}"))?;
            smallest_eigenpairs(&w, config.k, config.solver.tol, config.solver.method, want_vectors)
                .map_err(|e| format!("h = {h}: {e}"))
        })
        .collect();
    let mut spectra = Vec::with_capacity(solved.len());
    for s in solved {
        match s {
            Ok(s) => spectra.push(s),
            Err(m) => {
                fail(&mut report, Status::NumericFailure, Stage::Solve, m);
                return Ok((report, artifacts));
            }
        }
    }
    let scale = config.cluster_scale;
    report.spectra = spectra
        .iter()
        .map(|s| SpectrumRow {
            h: s.h,
            grid: config.grid.clone(),
            method: s.method,
            eigenvalues: s.eigenvalues.clone(),
            residuals: s.residuals.clone(),
            norm: s.norm,
            floor: s.floor,
            cluster: count_small_cluster(&s.eigenvalues, s.h, scale),
        })
        .collect();

    if let Some(pred) = &report.predictions {
        let (rates, matching) = fit_branches(config, &spectra, pred, m0);
        report.rates = rates;
        report.branch_matching = matching;
    }
    report.ratios = ratio_rows(config, &spectra, report.predictions.as_ref(), &report.branch_matching);

    if stages.contains(&Stage::Validate) {
        let pred = report.predictions.clone().expect("validate implies predict");
        if config.quasimode {
            let (rows, modes) = quasimode_rows(config, &topology, &field, &grid, &spectra, &pred, &report.spectra);
            report.quasimodes = rows;
            if config.dump_vectors {
                artifacts.quasimodes = modes;
            }
        }
        report.verdicts = verdicts(&report, &pred, m0);
    }
    if config.dump_vectors {
        artifacts.eigenvectors =
            spectra.iter().filter_map(|s| s.eigenvectors.clone().map(|v| (s.h, v))).collect();
    }
    Ok((report, artifacts))
}

/// Fits every numeric branch j ≤ m₀, then pairs branches with predictions
/// by the multiset of (E, γ) rather than by index; index order when some fit fails.
fn fit_branches(config: &RunConfig, spectra: &[SpectrumResult], pred: &Predictions, m0: usize) -> (Vec<RateRow>, Vec<usize>) {
    let floor = spectra.iter().map(|s| s.floor).fold(0.0, f64::max);
    let fits: Vec<Result<RateFit, FitError>> = (0..m0)
        .map(|j| {
            let pts: Vec<(f64, f64)> = spectra.iter().map(|s| (s.h, s.eigenvalues[j])).collect();
            fit_rates(&pts, floor)
        })
        .collect();
    let mut matching: Vec<usize> = (0..m0).collect();
    if fits.iter().all(Result::is_ok) && m0 <= 8 {
        let cost = |j: usize, p: usize| {
            let f = fits[j].as_ref().unwrap();
            let q = &pred.predictions[p];
            ((f.energy - q.energy) / q.energy.max(1e-300)).powi(2) + (f.gamma - q.gamma).powi(2)
        };
        let mut best = (f64::INFINITY, matching.clone());
        permutations(m0, &mut |perm: &[usize]| {
            // ties keep the earliest (index-order) permutation
            let c: f64 = perm.iter().enumerate().map(|(j, &p)| cost(j, p)).sum();
            if c < best.0 - 1e-12 {
                best = (c, perm.to_vec());
            }
        });
        matching = best.1;
    }
    let rows = fits
        .into_iter()
        .enumerate()
        .map(|(j, fit)| {
            let q = &pred.predictions[matching[j]];
            let (fit, error) = match fit {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e)),
            };
            RateRow {
                branch: j + 1,
                minimum: q.minimum,
                grid: config.grid.clone(),
                h: config.h.clone(),
                energy_pred: q.energy,
                gamma_pred: q.gamma,
                fit,
                error,
            }
        })
        .collect();
    (rows, matching)
}

/// Lexicographic permutations of 0..n.
fn permutations(n: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if prefix.len() == used.len() {
            visit(prefix);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, visit);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], visit);
}

fn ratio_rows(config: &RunConfig, spectra: &[SpectrumResult], pred: Option<&Predictions>, matching: &[usize]) -> Vec<RatioRow> {
    let mut rows = Vec::new();
    for s in spectra {
        for (j, (&l, &r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
            let q = pred.and_then(|pred| matching.get(j).map(|&p| &pred.predictions[p]));
            let lp = q.map(|q| q.lambda(s.h));
            rows.push(RatioRow {
                h: s.h,
                grid: config.grid.clone(),
                j: j + 1,
                lambda_numeric: l,
                minimum: q.map(|q| q.minimum),
                lambda_predicted: lp,
                ratio: lp.map(|p| l / p),
                residual: r,
                below_floor: l < s.floor,
            });
        }
    }
    rows
}

type ModeSets = Vec<(f64, Vec<QuasiMode>)>;

fn quasimode_rows(
    config: &RunConfig,
    topology: &Topology,
    field: &ScalarField,
    grid: &Grid,
    spectra: &[SpectrumResult],
    pred: &Predictions,
    rows: &[SpectrumRow],
) -> (Vec<QuasimodeRow>, ModeSets) {
    let profile = match CutoffProfile::from_topology(topology, &grid.domain) {
        Ok(p) => p,
        Err(e) => {
            let out = config
                .h
                .iter()
                .map(|&h| QuasimodeRow::Failed { h, grid: config.grid.clone(), message: e.to_string() })
                .collect();
            return (out, Vec::new());
        }
    };
    let mut out = Vec::with_capacity(spectra.len());
    let mut modes = Vec::new();
    for (s, row) in spectra.iter().zip(rows) {
        let h = s.h;
        let computed = (|| -> Result<(QuasimodeRow, Vec<QuasiMode>), wk_quasimode::QuasimodeError> {
            let qms = build_all(topology, field, grid, h, &profile)?;
            let mut energies = Vec::with_capacity(qms.len());
            for q in &qms {
                let e = dirichlet_energy(q, field, grid)?;
                let p = pred.predictions.iter().find(|p| p.minimum == q.minimum).map_or(f64::NAN, |p| p.lambda(h));
                energies.push(QuasimodeEnergy {
                    minimum: q.minimum,
                    energy: e.total,
                    predicted: p,
                    relative_error: (e.total / p - 1.0).abs(),
                    collar_fraction: e.collar_fraction(),
                    log_z: q.log_z,
                });
            }
            let im = interaction_matrix(&qms, field, grid)?;
            let projector = projector_diagnostics(&qms, &im, s, row.cluster.count);
            Ok((QuasimodeRow::Computed { h, grid: config.grid.clone(), energies, interaction: Box::new(im), projector }, qms))
        })();
        match computed {
            Ok((r, q)) => {
                out.push(r);
                modes.push((h, q));
            }
            Err(e) => out.push(QuasimodeRow::Failed { h, grid: config.grid.clone(), message: e.to_string() }),
        }
    }
    (out, modes)
}

fn verdict(name: impl Into<String>, pass: bool, detail: String) -> Verdict {
    Verdict { name: name.into(), pass, detail }
}

fn verdicts(report: &RunReport, pred: &Predictions, m0: usize) -> Vec<Verdict> {
    let mut out = Vec::new();
    let counts: Vec<Option<usize>> = report.spectra.iter().map(|s| s.cluster.count).collect();
    out.push(verdict(
        "cluster_count",
        counts.iter().all(|&c| c == Some(m0)),
        format!("m0 = {m0}, counts {counts:?}"),
    ));

    for j in 1..=m0 {
        let rows: Vec<&RatioRow> = report.ratios.iter().filter(|r| r.j == j && !r.below_floor).collect();
        let Some(p) = report.branch_matching.get(j - 1).map(|&i| &pred.predictions[i]) else { continue };
        let dev: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.ratio.map(|q| (r.h, q))).collect();
        let inside = !dev.is_empty() && dev.iter().all(|&(h, q)| (q - 1.0).abs() <= ratio_band(p.error_order, h));
        out.push(verdict(format!("ratio_band_{j}"), inside, format!("(h, ratio) = {dev:?}, order {:?}", p.error_order)));
        if dev.len() >= 2 {
            let mono = dev.windows(2).all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
            out.push(verdict(format!("ratio_monotone_{j}"), mono, "|ratio − 1| non-increasing as h decreases".into()));
        }
        // a sweep too short for the regression yields no verdict, only the error in `rates`
        let fitted = report.rates.iter().find(|r| r.branch == j && !matches!(r.error, Some(FitError::TooFew { .. })));
        if let Some(r) = fitted {
            let (pass, detail) = match (&r.fit, &r.error) {
                (Some(f), _) => (
                    ((f.energy - r.energy_pred) / r.energy_pred).abs() <= ENERGY_FIT_TOL
                        && (f.gamma - r.gamma_pred).abs() <= GAMMA_FIT_TOL,
                    format!("E_fit = {} vs {}, γ_fit = {} vs {}", f.energy, r.energy_pred, f.gamma, r.gamma_pred),
                ),
                (None, e) => (false, e.as_ref().map_or_else(String::new, ToString::to_string)),
            };
            out.push(verdict(format!("rate_fit_{j}"), pass, detail));
        }
    }

    // only an applicable closed form yields a verdict; the reasons otherwise stay in `corollary`
    if let Some(BoundarySaddleVerdict::Applicable(formula)) = &report.corollary {
        let r: Vec<f64> = report.spectra.iter().map(|s| s.eigenvalues[0] / formula.lambda(s.h)).collect();
        let ok = r.iter().all(|&q| (COROLLARY_BAND.0..=COROLLARY_BAND.1).contains(&q));
        out.push(verdict("corollary", ok, format!("λ₁/formula = {r:?}")));
    }

    if !report.quasimodes.is_empty() {
        let mut built = true;
        let (mut rayleigh, mut rayleigh_worst) = (true, 0.0f64);
        let (mut min_max, mut min_max_worst) = (true, f64::INFINITY);
        let mut zeros = true;
        let (mut singular, mut singular_worst) = (true, 0.0f64);
        let mut notes = Vec::new();
        let labels = &report.topology.as_ref().expect("topology ran").labels;
        for (row, s) in report.quasimodes.iter().zip(&report.spectra) {
            match row {
                QuasimodeRow::Failed { h, message, .. } => {
                    built = false;
                    notes.push(format!("h = {h}: {message}"));
                }
                QuasimodeRow::Computed { h, energies, interaction, .. } => {
                    for e in energies {
                        let order = pred.predictions.iter().find(|p| p.minimum == e.minimum).map(|p| p.error_order);
                        let band = order.map_or(3.0 * h, |o| ratio_band(o, *h));
                        rayleigh &= e.relative_error <= band;
                        rayleigh_worst = rayleigh_worst.max(e.relative_error / band);
                        min_max &= e.energy >= s.eigenvalues[0];
                        min_max_worst = min_max_worst.min(e.energy / s.eigenvalues[0]);
                    }
                    let js: Vec<&[usize]> = interaction
                        .minima
                        .iter()
                        .map(|m| labels.iter().find(|l| l.minimum == *m).map_or(&[][..], |l| &l.j[..]))
                        .collect();
                    for a in 0..js.len() {
                        for b in 0..js.len() {
                            if a != b && !js[a].iter().any(|z| js[b].contains(z)) {
                                zeros &= interaction.s[a][b] == 0.0;
                            }
                        }
                    }
                    for (sv, &l) in interaction.singular_values.iter().zip(&s.eigenvalues) {
                        let err = ((sv * sv - l) / l).abs();
                        singular &= err <= SINGULAR_MATCH_TOL;
                        singular_worst = singular_worst.max(err);
                    }
                }
            }
        }
        out.push(verdict("quasimode_construction", built, notes.join("; ")));
        if built {
            out.push(verdict(
                "quasimode_rayleigh",
                rayleigh,
                format!("‖dψ‖² within the O(h) band of Λ_h; worst |‖dψ‖²/Λ − 1|/band = {rayleigh_worst}"),
            ));
            out.push(verdict("quasimode_min_max", min_max, format!("‖dψ‖² ≥ λ₁; smallest ‖dψ‖²/λ₁ = {min_max_worst}")));
            out.push(verdict("interaction_zeros", zeros, "S exactly zero for disjoint saddle sets".into()));
            out.push(verdict(
                "singular_values",
                singular,
                format!("η_j(S)² within {SINGULAR_MATCH_TOL} of λ_j; worst relative error {singular_worst}"),
            ));
        }
    }
    out
}

/// Topology and hypotheses only.
pub fn check(config: &RunConfig) -> Result<RunReport, PipelineError> {
    run_pipeline(config, &[Stage::Topology])
}
