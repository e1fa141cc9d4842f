//! End-to-end driver: scan → select → fold → map → solve → fit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activespace::{
    fold_core, iepa1_pair_energies, reference_energy, score_orbitals, select_active_space,
    select_minimal_basis, ActiveIntegrals, ActiveSpaceSpec, CorePreset, OrbitalScores, SelectionPolicy,
};
use crate::ansatz::{build_realamplitudes, build_uccsd, hf_bitstring, AnsatzKind, ParamCircuit};
use crate::chemdata::{reduced_mass, AtomicMassTable, GeometryScan, MolecularIntegrals};
use crate::fermion::build_fermion_hamiltonian;
use crate::qubitmap::{Mapping, PauliSum, QubitEncoding};
use crate::solver::{
    exact_ground_state_in_sector, vqe_sweep, GroundState, OptimizerProtocol, VqePoint, VqeResult,
};
use crate::spectro::{
    equilibrium_bond_length, fit_quadratic, harmonic_frequency, PecSample, PotentialEnergyCurve,
    QuadraticFit,
};
use crate::{Error, Result};

/// Largest register for which VQE runs also compute an ED reference state.
pub const VQE_REFERENCE_QUBITS: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ActiveSpacePolicy {
    /// Rank MOs by IEPA1 contribution and apply `rule`.
    Iepa1 { rule: SelectionPolicy },
    /// Occupied MOs plus the lowest virtuals, `target` MOs in total; when
    /// absent the preset's minimal-basis count is used.
    MinimalBasis { target: Option<usize> },
    /// Every MO outside the frozen core.
    Full,
}

impl ActiveSpacePolicy {
    pub fn tag(&self) -> &'static str {
        match self {
            ActiveSpacePolicy::Iepa1 { .. } => "IEPA1",
            ActiveSpacePolicy::MinimalBasis { .. } => "MB",
            ActiveSpacePolicy::Full => "FULL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenCore {
    Preset(CorePreset),
    Orbitals(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Ed,
    Vqe,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ed" | "edqc" => Ok(SolverKind::Ed),
            "vqe" => Ok(SolverKind::Vqe),
            other => Err(Error::Parse(format!("unknown solver '{other}'"))),
        }
    }
}

/// Settings shared by every geometry of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub selection: ActiveSpacePolicy,
    pub frozen: FrozenCore,
    pub mapping: Mapping,
    /// Remove the two parity-symmetry qubits (parity mapping only).
    pub taper: bool,
    pub solver: SolverKind,
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub optimizer: OptimizerProtocol,
    /// Index of the scan point whose orbital ranking fixes the active space
    /// for the whole scan; defaults to the middle point.
    pub selection_point: Option<usize>,
    /// Mass overrides in amu, keyed by element symbol.
    pub masses: std::collections::BTreeMap<String, f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            selection: ActiveSpacePolicy::Full,
            frozen: FrozenCore::Preset(CorePreset::None),
            mapping: Mapping::Parity,
            taper: true,
            solver: SolverKind::Ed,
            ansatz: AnsatzKind::Uccsd,
            reps: 1,
            optimizer: OptimizerProtocol::default(),
            selection_point: None,
            masses: Default::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taper && self.mapping != Mapping::Parity {
            return Err(Error::Parse("tapering requires the parity mapping".into()));
        }
        if self.solver == SolverKind::Vqe {
            self.optimizer.validate()?;
            if self.ansatz == AnsatzKind::RealAmplitudes && self.reps == 0 {
                return Err(Error::Parse("RealAmplitudes needs at least one repetition".into()));
            }
        }
        if let ActiveSpacePolicy::Iepa1 { rule } = self.selection {
            let bad = match rule {
                SelectionPolicy::TopK(k) => k == 0,
                SelectionPolicy::Threshold(t) | SelectionPolicy::Cumulative(t) => !(t > 0.0),
            };
            if bad {
                return Err(Error::Parse("selection rule must be positive".into()));
            }
        }
        Ok(())
    }

    /// `Method[selection]/FCIDUMP`, e.g. `EDQC[IEPA1]/FCIDUMP`.
    pub fn run_label(&self) -> String {
        let method = match (self.solver, self.ansatz) {
            (SolverKind::Ed, _) => "EDQC".to_string(),
            (SolverKind::Vqe, AnsatzKind::Uccsd) => "VQE-UCCSD".to_string(),
            (SolverKind::Vqe, AnsatzKind::RealAmplitudes) => format!("VQE-RA{}", self.reps),
        };
        format!("{method}[{}]/FCIDUMP", self.selection.tag())
    }

    pub fn mass_table(&self) -> Result<AtomicMassTable> {
        self.masses
            .iter()
            .try_fold(AtomicMassTable::default(), |t, (s, m)| t.with_mass(s.clone(), *m))
    }

    fn frozen_orbitals(&self, ints: &MolecularIntegrals, elements: &[&str]) -> Result<Vec<usize>> {
        match &self.frozen {
            FrozenCore::Preset(p) => p.frozen_orbitals(ints, elements),
            FrozenCore::Orbitals(list) => Ok(list.clone()),
        }
    }

    fn encoding(&self, spec: &ActiveSpaceSpec) -> QubitEncoding {
        let m = spec.n_active();
        let n_alpha = spec.n_active_electrons / 2;
        match (self.mapping, self.taper) {
            (Mapping::JordanWigner, _) => QubitEncoding::jordan_wigner(2 * m),
            (Mapping::Parity, false) => QubitEncoding::parity(2 * m),
            (Mapping::Parity, true) => QubitEncoding::tapered_parity(m, n_alpha, spec.n_active_electrons),
        }
    }
}

/// Orbital ranking and the resulting active space for one set of integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub spec: ActiveSpaceSpec,
    pub scores: Option<OrbitalScores>,
}

pub fn select(ints: &MolecularIntegrals, elements: &[&str], cfg: &PipelineConfig) -> Result<Selection> {
    let frozen = cfg.frozen_orbitals(ints, elements)?;
    match &cfg.selection {
        ActiveSpacePolicy::Iepa1 { rule } => {
            let table = iepa1_pair_energies(ints)?;
            let scores = score_orbitals(&table, ints)?;
            let spec = select_active_space(&scores, *rule, &frozen)?;
            Ok(Selection {
                spec,
                scores: Some(scores),
            })
        }
        ActiveSpacePolicy::MinimalBasis { target } => {
            let target = match (target, &cfg.frozen) {
                (Some(t), _) => *t,
                (None, FrozenCore::Preset(p)) => p.minimal_basis_count(elements)?,
                (None, FrozenCore::Orbitals(_)) => {
                    return Err(Error::Selection(
                        "minimal-basis selection with explicit frozen orbitals needs a target".into(),
                    ))
                }
            };
            Ok(Selection {
                spec: select_minimal_basis(ints, target, &frozen)?,
                scores: None,
            })
        }
        ActiveSpacePolicy::Full => {
            let m = ints.n_orbitals();
            let active = (0..m).filter(|x| !frozen.contains(x)).collect();
            Ok(Selection {
                spec: ActiveSpaceSpec::new(m, ints.n_electrons(), &ints.occupied(), frozen, active)?,
                scores: None,
            })
        }
    }
}

/// A geometry ready to solve: folded integrals and qubit Hamiltonian.
#[derive(Debug, Clone)]
pub struct PreparedGeometry {
    pub r: f64,
    pub active: ActiveIntegrals,
    pub encoding: QubitEncoding,
    pub hamiltonian: PauliSum,
    pub reference_energy: f64,
    pub hf_index: u64,
}

impl PreparedGeometry {
    pub fn spec(&self) -> &ActiveSpaceSpec {
        &self.active.spec
    }

    pub fn n_alpha(&self) -> usize {
        self.active.spec.n_active_electrons / 2
    }

    pub fn build_circuit(&self, cfg: &PipelineConfig) -> Result<ParamCircuit> {
        build_circuit(&self.active.spec, &self.encoding, cfg)
    }

    /// Lowest eigenpair within the reference determinant's electron sector.
    pub fn exact_ground_state(&self) -> Result<GroundState> {
        let n_alpha = self.n_alpha();
        exact_ground_state_in_sector(&self.hamiltonian, &self.encoding, n_alpha, n_alpha)
    }
}

/// The configured ansatz over `encoding`'s register.
pub fn build_circuit(spec: &ActiveSpaceSpec, encoding: &QubitEncoding, cfg: &PipelineConfig) -> Result<ParamCircuit> {
    match cfg.ansatz {
        AnsatzKind::Uccsd => build_uccsd(spec, encoding),
        AnsatzKind::RealAmplitudes => build_realamplitudes(encoding.n_qubits(), cfg.reps),
    }
}

/// Folds the core for `spec` and maps the active Hamiltonian to qubits.
pub fn prepare_geometry(ints: &MolecularIntegrals, spec: &ActiveSpaceSpec, cfg: &PipelineConfig) -> Result<PreparedGeometry> {
    if spec.n_active_electrons % 2 != 0 {
        return Err(Error::Selection("open-shell active spaces are not supported".into()));
    }
    let active = fold_core(ints, spec)?;
    let encoding = cfg.encoding(spec);
    let ham = build_fermion_hamiltonian(&active);
    let hamiltonian = encoding.map_hamiltonian(&ham)?;
    let hf_index = hf_bitstring(spec, &encoding)?;
    Ok(PreparedGeometry {
        r: ints.bond_length.unwrap_or(f64::NAN),
        reference_energy: reference_energy(&active),
        active,
        encoding,
        hamiltonian,
        hf_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// VQE still improving at the final consistency pass.
    Unsettled,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub r: f64,
    pub status: PointStatus,
    pub error: Option<String>,
    pub active_space: Option<String>,
    pub n_qubits: Option<usize>,
    pub n_pauli_terms: Option<usize>,
    pub reference_energy: Option<f64>,
    pub ed_energy: Option<f64>,
    pub degenerate: Option<bool>,
    pub energy: Option<f64>,
    pub vqe: Option<VqeResult>,
}

impl PointReport {
    fn failed(r: f64, e: &Error) -> Self {
        Self {
            r,
            status: PointStatus::Failed,
            error: Some(e.to_string()),
            active_space: None,
            n_qubits: None,
            n_pauli_terms: None,
            reference_energy: None,
            ed_energy: None,
            degenerate: None,
            energy: None,
            vqe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySummary {
    pub reduced_mass_amu: f64,
    pub equilibrium_bond_length: f64,
    pub harmonic_frequency_cm1: f64,
    pub expt_freq_cm1: Option<f64>,
    pub fit: QuadraticFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub elements: [String; 2],
    pub selection: Option<Selection>,
    pub points: Vec<PointReport>,
    pub passes: usize,
    pub frequency: Option<FrequencySummary>,
    pub frequency_error: Option<String>,
}

impl RunReport {
    /// Curve over the points that produced an energy.
    pub fn curve(&self) -> Result<PotentialEnergyCurve> {
        let samples = self
            .points
            .iter()
            .filter_map(|p| {
                p.energy.map(|energy| PecSample {
                    r: p.r,
                    energy,
                    flag: match p.status {
                        PointStatus::Ok => "ok".into(),
                        PointStatus::Unsettled => "unsettled".into(),
                        PointStatus::Failed => "failed".into(),
                    },
                })
            })
            .collect();
        let mut pec = PotentialEnergyCurve::new(self.label.clone(), samples)?;
        pec.elements = Some(self.elements.clone());
        Ok(pec)
    }

    pub fn all_ok(&self) -> bool {
        self.frequency.is_some() && self.points.iter().all(|p| p.status == PointStatus::Ok)
    }

    /// Plain-text summary for terminals and logs.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}  {}-{}", self.label, self.elements[0], self.elements[1]);
        if let Some(sel) = &self.selection {
            let _ = writeln!(
                out,
                "active space {}  frozen {:?}  active {:?}",
                sel.spec.label(),
                sel.spec.frozen,
                sel.spec.active
            );
        }
        let _ = writeln!(out, "{:>8}  {:>20}  {:>8}", "r/Å", "E/Ha", "status");
        for p in &self.points {
            let e = p.energy.map_or("-".to_string(), |e| format!("{e:.12}"));
            let _ = writeln!(out, "{:>8.4}  {:>20}  {:>8?}", p.r, e, p.status);
        }
        match (&self.frequency, &self.frequency_error) {
            (Some(f), _) => {
                let _ = writeln!(
                    out,
                    "r_e = {:.6} Å  ω = {:.3} cm⁻¹  μ = {:.6} amu",
                    f.equilibrium_bond_length, f.harmonic_frequency_cm1, f.reduced_mass_amu
                );
                if let Some(x) = f.expt_freq_cm1 {
                    let _ = writeln!(out, "expt ω = {x:.3} cm⁻¹  error = {:.3} cm⁻¹", f.harmonic_frequency_cm1 - x);
                }
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "no frequency: {e}");
            }
            (None, None) => {}
        }
        out
    }
}

/// Fits the curve and converts its curvature to a harmonic frequency.
pub fn frequency_summary(
    pec: &PotentialEnergyCurve,
    elements: &[String; 2],
    masses: &AtomicMassTable,
    expt_freq_cm1: Option<f64>,
) -> Result<FrequencySummary> {
    let mu = reduced_mass(&elements[0], &elements[1], masses)?;
    let fit = fit_quadratic(pec)?;
    Ok(FrequencySummary {
        reduced_mass_amu: mu,
        equilibrium_bond_length: equilibrium_bond_length(&fit)?,
        harmonic_frequency_cm1: harmonic_frequency(&fit, mu)?,
        expt_freq_cm1,
        fit,
    })
}

/// Everything produced for one scan, kept for artifact output.
#[derive(Debug, Clone)]
pub struct PecRun {
    pub report: RunReport,
    pub prepared: Vec<Option<PreparedGeometry>>,
    pub integrals: Vec<Option<MolecularIntegrals>>,
}

/// Solves every geometry of `scan` with the active space chosen at the
/// selection point, then fits the curve.
pub fn pec_sweep(scan: &GeometryScan, cfg: &PipelineConfig) -> Result<PecRun> {
    cfg.validate()?;
    scan.validate()?;
    let masses = cfg.mass_table()?;
    let elements: Vec<&str> = scan.elements.iter().map(String::as_str).collect();
    let n = scan.points.len();

    let integrals: Vec<Result<MolecularIntegrals>> = (0..n).into_par_iter().map(|i| scan.load_point(i)).collect();
    let sel_at = cfg.selection_point.unwrap_or(n / 2);
    if sel_at >= n {
        return Err(Error::IndexOutOfRange { index: sel_at, n });
    }
    let selection = match &integrals[sel_at] {
        Ok(ints) => select(ints, &elements, cfg)?,
        Err(e) => {
            return Err(Error::InvalidScan(format!(
                "selection point {sel_at} could not be loaded: {e}"
            )))
        }
    };
    log::info!(
        "{}: active space {} from point {sel_at} (r = {})",
        cfg.run_label(),
        selection.spec.label(),
        scan.points[sel_at].r
    );

    let prepared: Vec<Result<PreparedGeometry>> = integrals
        .par_iter()
        .map(|ints| {
            let ints = ints.as_ref().map_err(|e| Error::InvalidScan(e.to_string()))?;
            prepare_geometry(ints, &selection.spec, cfg)
        })
        .collect();

    let mut points: Vec<PointReport> = prepared
        .iter()
        .zip(&scan.points)
        .map(|(p, sp)| match p {
            Ok(g) => PointReport {
                r: sp.r,
                status: PointStatus::Ok,
                error: None,
                active_space: Some(g.spec().label()),
                n_qubits: Some(g.hamiltonian.n_qubits),
                n_pauli_terms: Some(g.hamiltonian.len()),
                reference_energy: Some(g.reference_energy),
                ed_energy: None,
                degenerate: None,
                energy: None,
                vqe: None,
            },
            Err(e) => PointReport::failed(sp.r, e),
        })
        .collect();

    let want_ed = |g: &PreparedGeometry| cfg.solver == SolverKind::Ed || g.hamiltonian.n_qubits <= VQE_REFERENCE_QUBITS;
    let ed: Vec<Option<Result<GroundState>>> = prepared
        .par_iter()
        .map(|p| p.as_ref().ok().filter(|g| want_ed(g)).map(|g| g.exact_ground_state()))
        .collect();
    let mut ed_states = Vec::with_capacity(n);
    for (i, res) in ed.into_iter().enumerate() {
        match res {
            Some(Ok(gs)) => {
                points[i].ed_energy = Some(gs.energy);
                points[i].degenerate = Some(gs.degenerate);
                ed_states.push(Some(gs.state));
            }
            Some(Err(e)) => {
                points[i] = PointReport {
                    error: Some(e.to_string()),
                    status: PointStatus::Failed,
                    ..points[i].clone()
                };
                ed_states.push(None);
            }
            None => ed_states.push(None),
        }
    }

    let mut passes = 0;
    match cfg.solver {
        SolverKind::Ed => {
            for p in &mut points {
                p.energy = p.ed_energy;
            }
        }
        SolverKind::Vqe => {
            let mut vqe_points = Vec::new();
            let mut which = Vec::new();
            for (i, p) in prepared.iter().enumerate() {
                let Ok(g) = p else { continue };
                if points[i].status == PointStatus::Failed {
                    continue;
                }
                match g.build_circuit(cfg) {
                    Ok(circuit) => {
                        vqe_points.push(VqePoint {
                            hamiltonian: g.hamiltonian.clone(),
                            circuit,
                            init: g.hf_index,
                            reference: ed_states[i].clone(),
                        });
                        which.push(i);
                    }
                    Err(e) => points[i] = PointReport::failed(points[i].r, &e),
                }
            }
            if !vqe_points.is_empty() {
                let outcome = vqe_sweep(&vqe_points, &cfg.optimizer)?;
                passes = outcome.passes;
                for ((i, res), flagged) in which.into_iter().zip(outcome.results).zip(outcome.flagged) {
                    points[i].energy = Some(res.energy);
                    if flagged || !res.converged {
                        points[i].status = PointStatus::Unsettled;
                    }
                    points[i].vqe = Some(res);
                }
            }
        }
    }

    let mut report = RunReport {
        label: cfg.run_label(),
        elements: scan.elements.clone(),
        selection: Some(selection),
        points,
        passes,
        frequency: None,
        frequency_error: None,
    };
    match report
        .curve()
        .and_then(|pec| frequency_summary(&pec, &scan.elements, &masses, scan.expt_freq_cm1))
    {
        Ok(f) => report.frequency = Some(f),
        Err(e) => report.frequency_error = Some(e.to_string()),
    }

    Ok(PecRun {
        report,
        prepared: prepared.into_iter().map(Result::ok).collect(),
        integrals: integrals.into_iter().map(Result::ok).collect(),
    })
}

/// Metadata written next to a Pauli Hamiltonian so it can be solved later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianArtifact {
    pub r: Option<f64>,
    pub spec: ActiveSpaceSpec,
    pub encoding: QubitEncoding,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub hf_index: u64,
    pub reference_energy: f64,
    pub core_energy: f64,
}

impl HamiltonianArtifact {
    pub fn from_prepared(g: &PreparedGeometry) -> Self {
        Self {
            r: g.r.is_finite().then_some(g.r),
            spec: g.active.spec.clone(),
            encoding: g.encoding,
            n_alpha: g.n_alpha(),
            n_beta: g.n_alpha(),
            hf_index: g.hf_index,
            reference_energy: g.reference_energy,
            core_energy: g.active.e_core(),
        }
    }
}

pub const HAMILTONIAN_TEXT: &str = "hamiltonian.txt";
pub const HAMILTONIAN_META: &str = "hamiltonian.json";

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `hamiltonian.txt` and `hamiltonian.json` into `dir`.
pub fn write_hamiltonian(dir: &Path, g: &PreparedGeometry) -> Result<()> {
    write_file(&dir.join(HAMILTONIAN_TEXT), g.hamiltonian.to_text())?;
    let meta = serde_json::to_string_pretty(&HamiltonianArtifact::from_prepared(g))?;
    write_file(&dir.join(HAMILTONIAN_META), meta + "\n")
}

pub fn read_hamiltonian(dir: &Path) -> Result<(PauliSum, HamiltonianArtifact)> {
    let text_path = dir.join(HAMILTONIAN_TEXT);
    let meta_path = dir.join(HAMILTONIAN_META);
    let text = std::fs::read_to_string(&text_path).map_err(|e| Error::io(&text_path, e))?;
    let meta = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let sum = PauliSum::from_text(&text)?;
    let meta: HamiltonianArtifact = serde_json::from_str(&meta)?;
    if sum.n_qubits != meta.encoding.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: meta.encoding.n_qubits(),
            found: sum.n_qubits,
        });
    }
    Ok((sum, meta))
}

/// Directory name for scan point `i`.
pub fn point_dir(i: usize, r: f64) -> String {
    format!("point_{i:03}_r{r:.4}")
}

/// Writes the full output bundle of a sweep into `out` and returns the
/// files written, sorted.
pub fn write_run_artifacts(out: &Path, run: &PecRun) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut put = |path: PathBuf, contents: String| -> Result<()> {
        write_file(&path, contents)?;
        files.push(path);
        Ok(())
    };
    let report = &run.report;
    if let Some(sel) = &report.selection {
        put(out.join("active_space.json"), serde_json::to_string_pretty(&sel.spec)? + "\n")?;
        if let Some(scores) = &sel.scores {
            put(out.join("orbital_scores.csv"), scores.to_csv()?)?;
        }
    }
    for (i, p) in report.points.iter().enumerate() {
        let dir = out.join(point_dir(i, p.r));
        if let Some(g) = &run.prepared[i] {
            put(dir.join(HAMILTONIAN_TEXT), g.hamiltonian.to_text())?;
            put(
                dir.join(HAMILTONIAN_META),
                serde_json::to_string_pretty(&HamiltonianArtifact::from_prepared(g))? + "\n",
            )?;
        }
        put(dir.join("result.json"), serde_json::to_string_pretty(p)? + "\n")?;
    }
    put(out.join("pec.csv"), report.curve()?.to_csv()?)?;
    put(out.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    put(out.join("summary.txt"), report.summary_text())?;
    files.sort();
    Ok(files)
}
