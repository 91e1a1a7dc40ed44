//! End-to-end elimination: super-essential subsystem, prolongation, generic algebraic
//! system, resultant matrices, determinants, specialization and bounds.

use serde::Serialize;

use crate::ags::{build_ags, Ags, AgsReport};
use crate::analysis::{analyze, build_ps, carra_ferro_bounds, prolong, support_gaps, AnalysisError, AnalysisReport, Prolongation};
use crate::frontend::{render_in, var_display};
use crate::poly::{render, MultiPoly, PolyError};
use crate::polytope::mixed_volumes_minus;
use crate::specialize::{algorithm_specialize, bounds_report, diff_generic_zero_eval, specialize, BoundsReport, Deflation};
use crate::sylvester::{build_sylvester, MatrixError, SylvesterMatrix};
use crate::system::{DiffSystem, Mode, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("every resultant formula vanished: {0}")]
    Vanished(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    /// Process exit code for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 2,
            PipelineError::Degenerate(_) => 3,
            PipelineError::Vanished(_) => 4,
            PipelineError::Stage { .. } => 1,
        }
    }

    fn stage(stage: &'static str, e: impl ToString) -> PipelineError {
        PipelineError::Stage { stage, message: e.to_string() }
    }
}

impl From<SystemError> for PipelineError {
    fn from(e: SystemError) -> Self {
        PipelineError::Validation(e.to_string())
    }
}

impl From<MatrixError> for PipelineError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Degenerate(_) | MatrixError::TightnessRetryExceeded(_) => PipelineError::Degenerate(e.to_string()),
            other => PipelineError::stage("matrix", other),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// 0-based distinguished polynomial; `None` builds every matrix.
    pub distinguished: Option<usize>,
    pub seed: u64,
    pub mode: Option<Mode>,
}

/// Artifacts up to the generic algebraic system.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// The system as given, after any mode change.
    pub original: DiffSystem,
    /// The super-essential subsystem the construction runs on.
    pub sys: DiffSystem,
    pub analysis: AnalysisReport,
    pub ps: Prolongation,
    pub ags: Ags,
}

/// Switches `sys` to the requested mode (only concrete to generic is a change).
pub fn with_mode(sys: DiffSystem, mode: Option<Mode>) -> DiffSystem {
    match mode {
        Some(Mode::Generic) if sys.mode != Mode::Generic => sys.to_generic(),
        Some(m) => DiffSystem { mode: m, ..sys },
        None => sys,
    }
}

pub fn prepare(sys: DiffSystem, mode: Option<Mode>) -> Result<Prepared, PipelineError> {
    let original = with_mode(sys, mode);
    let analysis = analyze(&original).map_err(|e| PipelineError::stage("analysis", e))?;
    let sys = if analysis.subsystem.indices.len() == original.n() {
        original.clone()
    } else {
        let idx: Vec<usize> = analysis.subsystem.indices.iter().map(|i| i - 1).collect();
        original.restrict(&idx)?
    };
    if let Some(i) = (0..sys.n()).find(|&i| sys.coefficient_terms(i).len() < 2) {
        return Err(PipelineError::Validation(format!("{} is a single monomial, so the system generates the unit ideal", sys.poly_names[i])));
    }
    let ps = build_ps(&sys).map_err(|e| match e {
        AnalysisError::NotSuperEssential(_) => PipelineError::Validation(e.to_string()),
        other => PipelineError::stage("prolongation", other),
    })?;
    let ags = build_ags(&ps);
    Ok(Prepared { original, sys, analysis, ps, ags })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PsEntryReport {
    pub index: usize,
    pub name: String,
    pub poly: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CarraFerroReport {
    pub orders: Vec<u32>,
    pub window: Vec<(i64, i64)>,
    /// Orders inside the window that no prolonged polynomial mentions, per indeterminate.
    pub gaps: Vec<Vec<i64>>,
    /// The same check for the prolongation used here.
    pub ps_gaps: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpecializationReport {
    /// Direct specialization of the determinant is zero.
    pub direct_vanished: bool,
    pub deflations: Vec<Deflation>,
    pub terms: usize,
    pub poly: String,
    /// Vanishing at the differential generic zero; `None` in concrete mode.
    pub verified: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixReport {
    pub distinguished: usize,
    pub seed: u64,
    pub attempts: u32,
    pub size: usize,
    pub rows_of_distinguished: usize,
    pub mixed_volume: Option<String>,
    pub determinant_terms: usize,
    pub determinant_vanishes_at_generic_zero: bool,
    pub specialization: Option<SpecializationReport>,
    pub bounds: Option<BoundsReport>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineReport {
    pub schema: u32,
    pub mode: Mode,
    pub analysis: AnalysisReport,
    pub carra_ferro: CarraFerroReport,
    pub ps: Vec<PsEntryReport>,
    pub ags: AgsReport,
    pub matrices: Vec<MatrixReport>,
    pub assumptions: Vec<String>,
}

/// Name of a ps entry, e.g. `d^2 f3`.
pub fn ps_entry_name(sys: &DiffSystem, source: usize, derivative: u32) -> String {
    match derivative {
        0 => sys.poly_names[source].clone(),
        1 => format!("d {}", sys.poly_names[source]),
        k => format!("d^{k} {}", sys.poly_names[source]),
    }
}

pub fn ps_report(p: &Prepared) -> Vec<PsEntryReport> {
    p.ps.entries
        .iter()
        .enumerate()
        .map(|(l, e)| PsEntryReport { index: l + 1, name: ps_entry_name(&p.sys, e.source, e.derivative), poly: render_in(&p.sys, &e.poly) })
        .collect()
}

pub fn ags_report(p: &Prepared) -> AgsReport {
    let sys = &p.sys;
    p.ags.report(&|v| var_display(sys, crate::poly::Var::new(v.clone())))
}

pub fn carra_ferro_report(p: &Prepared) -> Result<CarraFerroReport, PipelineError> {
    let (orders, window) = carra_ferro_bounds(&p.sys);
    let entries = prolong(&p.sys, &orders).map_err(|e| PipelineError::stage("prolongation", e))?;
    let gaps = support_gaps(&entries, &window);
    let ps_window: Vec<(i64, i64)> = p.ps.shape.gamma_per_var.iter().copied().zip(p.ps.shape.upper.iter().copied()).collect();
    Ok(CarraFerroReport { orders, window, gaps, ps_gaps: support_gaps(&p.ps.entries, &ps_window) })
}

/// One resultant matrix with its determinant and specialization.
#[derive(Clone, Debug)]
pub struct MatrixRun {
    pub matrix: SylvesterMatrix,
    pub determinant: MultiPoly,
    pub output: Option<MultiPoly>,
    pub report: MatrixReport,
}

pub fn run_matrix(p: &Prepared, distinguished: usize, seed: u64, mvs: &[Option<crate::poly::Coeff>]) -> Result<MatrixRun, PipelineError> {
    let (matrix, sub) = build_sylvester(&p.ags, distinguished, seed)?;
    let determinant = matrix.determinant()?;
    let stage = |e: PolyError| PipelineError::stage("determinant", e);
    let in_ideal = p.ags.vanishes_at_generic_zero(&determinant).map_err(stage)?;
    let mut output = None;
    let mut specialization = None;
    let mut bounds = None;
    if !determinant.is_zero() {
        let direct = specialize(&determinant, &p.ags).map_err(|e| PipelineError::stage("specialization", e))?;
        let (h, deflations, direct_vanished) = if direct.is_zero() {
            let (h, d) = algorithm_specialize(&determinant, &p.ags).map_err(|e| PipelineError::stage("specialization", e))?;
            (h, d, true)
        } else {
            (direct, vec![], false)
        };
        let verified = match p.sys.mode {
            Mode::Generic => Some(diff_generic_zero_eval(&h, &p.sys).map_err(|e| PipelineError::stage("verification", e))?.is_zero()),
            Mode::Concrete => None,
        };
        if p.sys.mode == Mode::Generic {
            bounds = Some(bounds_report(&p.sys, &p.ps.shape, &p.ags, mvs, &determinant, &h));
        }
        specialization =
            Some(SpecializationReport { direct_vanished, deflations, terms: h.len(), poly: render_in(&p.sys, &h), verified });
        output = Some(h);
    }
    let report = MatrixReport {
        distinguished: distinguished + 1,
        seed,
        attempts: sub.attempts,
        size: matrix.size(),
        rows_of_distinguished: matrix.rows_of(distinguished),
        mixed_volume: mvs.get(distinguished).cloned().flatten().map(|m| m.to_string()),
        determinant_terms: determinant.len(),
        determinant_vanishes_at_generic_zero: in_ideal,
        specialization,
        bounds,
    };
    Ok(MatrixRun { matrix, determinant, output, report })
}

pub fn run_pipeline(sys: DiffSystem, opts: &PipelineOptions) -> Result<(PipelineReport, Vec<MatrixRun>), PipelineError> {
    let p = prepare(sys, opts.mode)?;
    let targets: Vec<usize> = match opts.distinguished {
        Some(l) if l < p.ags.len() => vec![l],
        Some(l) => return Err(PipelineError::Validation(format!("no polynomial {} in ps(P) of size {}", l + 1, p.ags.len()))),
        None => (0..p.ags.len()).collect(),
    };
    let mvs = mixed_volumes_minus(&p.ags.supports());
    let mut runs = Vec::new();
    for l in targets {
        runs.push(run_matrix(&p, l, opts.seed, &mvs)?);
    }
    if runs.iter().all(|r| r.output.is_none()) {
        return Err(PipelineError::Vanished("all determinants are zero".into()));
    }
    let report = PipelineReport {
        schema: 1,
        mode: p.sys.mode,
        analysis: p.analysis.clone(),
        carra_ferro: carra_ferro_report(&p)?,
        ps: ps_report(&p),
        ags: ags_report(&p),
        matrices: runs.iter().map(|r| r.report.clone()).collect(),
        assumptions: vec!["the system is Laurent differentially essential (not checked)".into()],
    };
    Ok((report, runs))
}

/// Text of a polynomial over generic coefficients.
pub fn render_generic(p: &MultiPoly) -> String {
    render(p, &|v| v.to_string())
}
