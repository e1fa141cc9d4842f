use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use aqvib::activespace::{
    iepa1_pair_energies, reference_energy, ActiveIntegrals, ActiveSpaceSpec, CorePreset, SelectionPolicy,
};
use aqvib::ansatz::AnsatzKind;
use aqvib::chemdata::{read_fcidump, AtomicMassTable, GeometryScan, MolecularIntegrals};
use aqvib::pipeline::{
    build_circuit, frequency_summary, pec_sweep, prepare_geometry, read_hamiltonian, select,
    write_hamiltonian, write_run_artifacts, ActiveSpacePolicy, FrozenCore, PipelineConfig, SolverKind,
    VQE_REFERENCE_QUBITS,
};
use aqvib::qubitmap::Mapping;
use aqvib::solver::{exact_ground_state_in_sector, vqe_minimize};
use aqvib::spectro::{
    benchmark_csv, benchmark_stats, join_benchmark, parse_reference_csv, parse_results_csv,
    PotentialEnergyCurve,
};

#[derive(Parser)]
#[command(name = "aqvib", version, about = "Active-space qubit Hamiltonians and harmonic frequencies for diatomics")]
struct Cli {
    /// Worker threads for geometry- and restart-level parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an FCIDUMP file or scan manifest and print a summary.
    Ingest {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank orbitals and choose the active space for one FCIDUMP.
    Select {
        fcidump: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fold the core and write the qubit Hamiltonian.
    Hamiltonian {
        fcidump: PathBuf,
        /// Active space JSON written by `select`.
        #[arg(long)]
        active: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a Hamiltonian directory written by `hamiltonian`.
    Solve {
        dir: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every geometry of a scan and write the potential-energy curve.
    Pec {
        scan: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a PEC CSV and report r_e and the harmonic frequency.
    Freq {
        pec: PathBuf,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        elements: Vec<String>,
        /// JSON object of mass overrides in amu.
        #[arg(long)]
        masses: Option<PathBuf>,
    },
    /// Error statistics of computed frequencies against references.
    Stats {
        results: PathBuf,
        reference: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline from a scan: artifacts, curve and frequency summary.
    Run {
        /// Scan manifest; overrides the config's `scan`.
        scan: Option<PathBuf>,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Iepa1,
    Mb,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum MappingArg {
    Jw,
    Parity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Ed,
    Vqe,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnsatzArg {
    Uccsd,
    Realamp,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoreArg {
    None,
    Pseudopotential,
}

/// Flags that override fields of the JSON config.
#[derive(Args, Default)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long)]
    topk: Option<usize>,
    /// Minimum percentage of the total IEPA1 energy.
    #[arg(long)]
    threshold: Option<f64>,
    /// Cumulative percentage to reach.
    #[arg(long)]
    cumulative: Option<f64>,
    /// Active MO count for the minimal-basis policy.
    #[arg(long)]
    target: Option<usize>,
    #[arg(long, value_enum)]
    frozen_core: Option<CoreArg>,
    /// Explicit frozen MOs (zero-based), comma separated.
    #[arg(long, value_delimiter = ',')]
    frozen: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    mapping: Option<MappingArg>,
    /// Keep all 2m qubits of the parity encoding.
    #[arg(long)]
    no_taper: bool,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long, value_enum)]
    ansatz: Option<AnsatzArg>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    elements: Option<Vec<String>>,
}

/// JSON config file: pipeline settings plus optional scan and output paths.
#[derive(Debug, Default, Serialize, Deserialize)]
struct RunConfig {
    scan: Option<PathBuf>,
    out: Option<PathBuf>,
    elements: Option<[String; 2]>,
    #[serde(flatten)]
    pipeline: PipelineConfig,
}

impl PipelineArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let mut cfg: RunConfig =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new("."));
                for p in [&mut cfg.scan, &mut cfg.out].into_iter().flatten() {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
                cfg
            }
            None => RunConfig::default(),
        };
        let p = &mut cfg.pipeline;
        let rule = match (self.topk, self.threshold, self.cumulative) {
            (Some(k), None, None) => Some(SelectionPolicy::TopK(k)),
            (None, Some(t), None) => Some(SelectionPolicy::Threshold(t)),
            (None, None, Some(c)) => Some(SelectionPolicy::Cumulative(c)),
            (None, None, None) => None,
            _ => bail!("--topk, --threshold and --cumulative are mutually exclusive"),
        };
        match (self.policy, rule) {
            (Some(PolicyArg::Iepa1), Some(rule)) => p.selection = ActiveSpacePolicy::Iepa1 { rule },
            (Some(PolicyArg::Iepa1), None) => match p.selection {
                ActiveSpacePolicy::Iepa1 { .. } => {}
                _ => bail!("--policy iepa1 needs --topk, --threshold or --cumulative"),
            },
            (None, Some(rule)) => p.selection = ActiveSpacePolicy::Iepa1 { rule },
            (Some(PolicyArg::Mb), None) => p.selection = ActiveSpacePolicy::MinimalBasis { target: self.target },
            (Some(PolicyArg::Full), None) => p.selection = ActiveSpacePolicy::Full,
            (Some(_), Some(_)) => bail!("selection thresholds apply to --policy iepa1 only"),
            (None, None) => {}
        }
        if let (Some(t), ActiveSpacePolicy::MinimalBasis { target }) = (self.target, &mut p.selection) {
            *target = Some(t);
        }
        match (self.frozen_core, &self.frozen) {
            (Some(_), Some(_)) => bail!("--frozen-core and --frozen are mutually exclusive"),
            (Some(CoreArg::None), None) => p.frozen = FrozenCore::Preset(CorePreset::None),
            (Some(CoreArg::Pseudopotential), None) => p.frozen = FrozenCore::Preset(CorePreset::Pseudopotential),
            (None, Some(list)) => p.frozen = FrozenCore::Orbitals(list.clone()),
            (None, None) => {}
        }
        match self.mapping {
            Some(MappingArg::Jw) => {
                p.mapping = Mapping::JordanWigner;
                p.taper = false;
            }
            Some(MappingArg::Parity) => p.mapping = Mapping::Parity,
            None => {}
        }
        if self.no_taper {
            p.taper = false;
        }
        if let Some(s) = self.solver {
            p.solver = match s {
                SolverArg::Ed => SolverKind::Ed,
                SolverArg::Vqe => SolverKind::Vqe,
            };
        }
        if let Some(a) = self.ansatz {
            p.ansatz = match a {
                AnsatzArg::Uccsd => AnsatzKind::Uccsd,
                AnsatzArg::Realamp => AnsatzKind::RealAmplitudes,
            };
        }
        if let Some(r) = self.reps {
            p.reps = r;
        }
        if let Some(s) = self.seed {
            p.optimizer.seed = s;
        }
        if let Some(e) = &self.elements {
            cfg.elements = Some([e[0].clone(), e[1].clone()]);
        }
        cfg.pipeline.validate()?;
        Ok(cfg)
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn elements_of(cfg: &RunConfig) -> Vec<String> {
    cfg.elements.clone().map(Vec::from).unwrap_or_default()
}

#[derive(Serialize)]
struct IntegralSummary {
    path: PathBuf,
    r: Option<f64>,
    n_orbitals: usize,
    n_electrons: usize,
    e_const: f64,
    e_reference: f64,
    e_mp2_correlation: Option<f64>,
}

fn summarize(path: &Path, ints: &MolecularIntegrals) -> Result<IntegralSummary> {
    let act = ActiveIntegrals::full(ints)?;
    Ok(IntegralSummary {
        path: path.to_path_buf(),
        r: ints.bond_length,
        n_orbitals: ints.n_orbitals(),
        n_electrons: ints.n_electrons(),
        e_const: ints.e_const(),
        e_reference: reference_energy(&act),
        e_mp2_correlation: iepa1_pair_energies(ints).ok().map(|t| t.total()),
    })
}

fn ingest(input: &Path, out: Option<&Path>) -> Result<()> {
    let is_manifest = input.extension().is_some_and(|e| e == "json");
    let summaries = if is_manifest {
        let scan = GeometryScan::load(input)?;
        (0..scan.points.len())
            .map(|i| summarize(&scan.points[i].fcidump, &scan.load_point(i)?))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![summarize(input, &read_fcidump(input)?)?]
    };
    let text = to_json(&summaries)?;
    match out {
        Some(dir) => write(&dir.join("ingest.json"), &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn select_cmd(fcidump: &Path, opts: &PipelineArgs, out: &Path) -> Result<()> {
    let cfg = opts.load()?;
    let ints = read_fcidump(fcidump)?;
    let elements = elements_of(&cfg);
    let refs: Vec<&str> = elements.iter().map(String::as_str).collect();
    let sel = select(&ints, &refs, &cfg.pipeline)?;
    write(&out.join("active_space.json"), to_json(&sel.spec)?)?;
    if let Some(scores) = &sel.scores {
        write(&out.join("orbital_scores.csv"), scores.to_csv()?)?;
    }
    println!(
        "{} frozen {:?} active {:?}",
        sel.spec.label(),
        sel.spec.frozen,
        sel.spec.active
    );
    Ok(())
}

fn hamiltonian_cmd(fcidump: &Path, active: &Path, opts: &PipelineArgs, out: &Path) -> Result<()> {
    let cfg = opts.load()?;
    let ints = read_fcidump(fcidump)?;
    let text = std::fs::read_to_string(active).with_context(|| format!("reading {}", active.display()))?;
    let spec: ActiveSpaceSpec = serde_json::from_str(&text)?;
    let checked = ActiveSpaceSpec::new(
        ints.n_orbitals(),
        ints.n_electrons(),
        &ints.occupied(),
        spec.frozen.clone(),
        spec.active.clone(),
    )?;
    let g = prepare_geometry(&ints, &checked, &cfg.pipeline)?;
    write_hamiltonian(out, &g)?;
    println!(
        "{} → {} qubits, {} Pauli terms, E_ref = {:.12} Ha",
        checked.label(),
        g.hamiltonian.n_qubits,
        g.hamiltonian.len(),
        g.reference_energy
    );
    Ok(())
}

fn solve_cmd(dir: &Path, opts: &PipelineArgs, out: Option<&Path>) -> Result<()> {
    let cfg = opts.load()?;
    let (p, meta) = read_hamiltonian(dir)?;
    let ed = if p.n_qubits <= VQE_REFERENCE_QUBITS || cfg.pipeline.solver == SolverKind::Ed {
        Some(exact_ground_state_in_sector(&p, &meta.encoding, meta.n_alpha, meta.n_beta)?)
    } else {
        None
    };
    let mut record = serde_json::json!({
        "n_qubits": p.n_qubits,
        "active_space": meta.spec.label(),
        "reference_energy": meta.reference_energy,
        "ed_energy": ed.as_ref().map(|g| g.energy),
        "degenerate": ed.as_ref().map(|g| g.degenerate),
    });
    let energy = match cfg.pipeline.solver {
        SolverKind::Ed => ed.as_ref().map(|g| g.energy),
        SolverKind::Vqe => {
            let circuit = build_circuit(&meta.spec, &meta.encoding, &cfg.pipeline)?;
            let res = vqe_minimize(&p, &circuit, meta.hf_index, &cfg.pipeline.optimizer, ed.as_ref().map(|g| &g.state))?;
            let e = res.energy;
            record["vqe"] = serde_json::to_value(&res)?;
            record["circuit_depth"] = circuit.depth().into();
            Some(e)
        }
    };
    record["energy"] = serde_json::to_value(energy)?;
    let text = to_json(&record)?;
    match out {
        Some(o) => write(&o.join("result.json"), &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn scan_path(arg: Option<&Path>, cfg: &RunConfig) -> Result<PathBuf> {
    arg.map(Path::to_path_buf)
        .or_else(|| cfg.scan.clone())
        .context("no scan manifest given (argument or config `scan`)")
}

fn pec_cmd(scan: &Path, opts: &PipelineArgs, out: &Path) -> Result<bool> {
    let cfg = opts.load()?;
    let scan = GeometryScan::load(scan)?;
    let run = pec_sweep(&scan, &cfg.pipeline)?;
    write(&out.join("pec.csv"), run.report.curve()?.to_csv()?)?;
    print!("{}", run.report.summary_text());
    Ok(run.report.points.iter().all(|p| p.error.is_none()))
}

fn run_cmd(scan: Option<&Path>, opts: &PipelineArgs, out: Option<&Path>) -> Result<bool> {
    let cfg = opts.load()?;
    let scan_file = scan_path(scan, &cfg)?;
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .context("no output directory given (--out or config `out`)")?;
    let scan = GeometryScan::load(&scan_file)?;
    let run = pec_sweep(&scan, &cfg.pipeline)?;
    let files = write_run_artifacts(&out, &run)?;
    write(&out.join("config.json"), to_json(&cfg.pipeline)?)?;
    log::info!("wrote {} files to {}", files.len() + 1, out.display());
    print!("{}", run.report.summary_text());
    Ok(run.report.all_ok())
}

fn freq_cmd(pec: &Path, elements: &[String], masses: Option<&Path>) -> Result<()> {
    if elements.len() != 2 {
        bail!("--elements needs two symbols");
    }
    let text = std::fs::read_to_string(pec).with_context(|| format!("reading {}", pec.display()))?;
    let curve = PotentialEnergyCurve::from_csv(pec.display().to_string(), &text)?;
    let table = match masses {
        Some(p) => AtomicMassTable::default().with_overrides_json(&std::fs::read_to_string(p)?)?,
        None => AtomicMassTable::default(),
    };
    let pair = [elements[0].clone(), elements[1].clone()];
    let f = frequency_summary(&curve, &pair, &table, None)?;
    print!("{}", to_json(&f)?);
    Ok(())
}

fn stats_cmd(results: &Path, reference: &Path, out: Option<&Path>) -> Result<()> {
    let rows = join_benchmark(
        &parse_results_csv(&std::fs::read_to_string(results)?)?,
        &parse_reference_csv(&std::fs::read_to_string(reference)?)?,
    )?;
    let stats = benchmark_stats(&rows)?;
    let text = format!(
        "n = {}\nRMSD = {:.3} cm-1\nMSD = {:.3} cm-1\nMAD = {:.3} cm-1\n",
        stats.count, stats.rmsd, stats.msd, stats.mad
    );
    if let Some(dir) = out {
        write(&dir.join("benchmark.csv"), benchmark_csv(&rows)?)?;
        write(&dir.join("stats.json"), to_json(&stats)?)?;
        write(&dir.join("stats.txt"), &text)?;
    }
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Ingest { input, out } => ingest(&input, out.as_deref()).map(|_| true),
        Command::Select { fcidump, opts, out } => select_cmd(&fcidump, &opts, &out).map(|_| true),
        Command::Hamiltonian {
            fcidump,
            active,
            opts,
            out,
        } => hamiltonian_cmd(&fcidump, &active, &opts, &out).map(|_| true),
        Command::Solve { dir, opts, out } => solve_cmd(&dir, &opts, out.as_deref()).map(|_| true),
        Command::Pec { scan, opts, out } => pec_cmd(&scan, &opts, &out),
        Command::Freq { pec, elements, masses } => freq_cmd(&pec, &elements, masses.as_deref()).map(|_| true),
        Command::Stats {
            results,
            reference,
            out,
        } => stats_cmd(&results, &reference, out.as_deref()).map(|_| true),
        Command::Run { scan, opts, out } => run_cmd(scan.as_deref(), &opts, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AQVIB_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", serde_json::json!({ "status": "incomplete", "error": "one or more geometries failed or did not settle" }));
            ExitCode::from(2)
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("{}", serde_json::json!({ "status": "error", "error": chain.join(": ") }));
            ExitCode::FAILURE
        }
    }
}
