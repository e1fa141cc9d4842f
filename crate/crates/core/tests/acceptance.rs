//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::time::Instant;

use aqvib::activespace::{
    iepa1_pair_energies, select_minimal_basis, ActiveIntegrals, CorePreset, SelectionPolicy,
};
use aqvib::ansatz::{build_realamplitudes, build_uccsd_for, uccsd_parameter_count};
use aqvib::chemdata::GeometryScan;
use aqvib::fermion::{build_fermion_hamiltonian, build_from_integrals, ci_oracle, mp2_oracle};
use aqvib::pipeline::{pec_sweep, prepare_geometry, select, ActiveSpacePolicy, FrozenCore, PipelineConfig, SolverKind};
use aqvib::qubitmap::{jordan_wigner, parity_map, PauliString, PauliSum, QubitEncoding};
use aqvib::simulator::pauli_sum_matrix;
use aqvib::solver::{exact_ground_state, exact_ground_state_in_sector, vqe_gradient, vqe_minimize_from, OptimizerProtocol};
use aqvib::spectro::{
    benchmark_stats, equilibrium_bond_length, fit_quadratic, join_benchmark, mayer_bond_order,
    parse_reference_csv, parse_results_csv, read_atom_assignment, read_matrix, PotentialEnergyCurve,
};
use common::{closed_shell_mp2, fixture, hermitian_spectrum, load, random_integrals, references, Ledger};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const TABLE_I_SPACES: &[(usize, usize)] = &[
    (2, 2),
    (2, 3),
    (4, 7),
    (4, 6),
    (4, 4),
    (6, 5),
    (6, 4),
    (6, 6),
    (8, 7),
    (8, 6),
    (8, 8),
    (2, 5),
    (10, 7),
];

fn uccsd_count(n_e: usize, m: usize) -> usize {
    let occupied: Vec<usize> = (0..n_e / 2).collect();
    let enc = QubitEncoding::tapered_parity(m, n_e / 2, n_e);
    build_uccsd_for(m, &occupied, &enc).expect("uccsd").n_params
}

fn criterion_1() -> Outcome {
    let cases = [((4, 4), 26), ((8, 6), 92), ((6, 6), 117)];
    let mut parts = Vec::new();
    let mut ok = true;
    for ((n, m), want) in cases {
        let built = uccsd_count(n, m);
        let counted = uccsd_parameter_count(n / 2, m - n / 2);
        ok &= built == want && counted == want;
        parts.push(format!("[{n},{m}]→{built}"));
    }
    check(ok, parts.join(", "))
}

fn criterion_2() -> Outcome {
    let cases = [((6, 10), 66), ((10, 25), 260), ((10, 30), 310)];
    let mut parts = Vec::new();
    let mut ok = true;
    for ((q, reps), want) in cases {
        let got = build_realamplitudes(q, reps).map_err(|e| e.to_string())?.n_params;
        ok &= got == want;
        parts.push(format!("({q},{reps})→{got}"));
    }
    check(ok, parts.join(", "))
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let (mut lo, mut hi) = (usize::MAX, 0);
    for (k, &(n, m)) in TABLE_I_SPACES.iter().enumerate() {
        let ints = random_integrals(m, n, 300 + k as u64);
        let act = ActiveIntegrals::full(&ints).map_err(|e| e.to_string())?;
        let ham = build_fermion_hamiltonian(&act);
        let enc = QubitEncoding::tapered_parity(m, n / 2, n);
        let q = enc.map_hamiltonian(&ham).map_err(|e| e.to_string())?.n_qubits;
        ok &= q == 2 * m - 2 && act.spec.tapered_qubits() == q;
        lo = lo.min(q);
        hi = hi.max(q);
        if q != 2 * m - 2 {
            parts.push(format!("[{n},{m}]→{q}"));
        }
    }
    check(ok, format!("{} spaces, {lo} to {hi} qubits {}", TABLE_I_SPACES.len(), parts.join(" ")))
}

fn table_stats(name: &str) -> Result<aqvib::spectro::ErrorStats, String> {
    let results = std::fs::read_to_string(fixture(&format!("benchmark/{name}"))).map_err(|e| e.to_string())?;
    let expt = std::fs::read_to_string(fixture("benchmark/expt.csv")).map_err(|e| e.to_string())?;
    let rows = join_benchmark(
        &parse_results_csv(&results).map_err(|e| e.to_string())?,
        &parse_reference_csv(&expt).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    benchmark_stats(&rows).map_err(|e| e.to_string())
}

fn criterion_4() -> Outcome {
    let edqc = table_stats("edqc_iepa1_pbe0.csv")?;
    let ccsdt = table_stats("ccsdt_hf.csv")?;
    let ok = (edqc.rmsd - 41.44).abs() <= 0.02
        && (edqc.msd + 9.75).abs() <= 0.02
        && (edqc.mad - 28.53).abs() <= 0.02
        && (ccsdt.rmsd - 41.73).abs() <= 0.02;
    check(
        ok,
        format!(
            "n={} RMSD {:.3} MSD {:.3} MAD {:.3}; CCSD(T)-HF RMSD {:.3}",
            edqc.count, edqc.rmsd, edqc.msd, edqc.mad, ccsdt.rmsd
        ),
    )
}

fn mayer(stem: &str) -> Result<f64, String> {
    let d = read_matrix(fixture(&format!("mayer/{stem}_density.txt"))).map_err(|e| e.to_string())?;
    let s = read_matrix(fixture(&format!("mayer/{stem}_overlap.txt"))).map_err(|e| e.to_string())?;
    let atoms = read_atom_assignment(fixture(&format!("mayer/{stem}_atoms.txt"))).map_err(|e| e.to_string())?;
    mayer_bond_order(&d, &s, &atoms).map_err(|e| e.to_string())
}

fn criterion_5() -> Outcome {
    let h2 = mayer("h2_rhf_sto3g")?;
    let co = mayer("co_pbe0_ccpvdz")?;
    check(
        (h2 - 1.00).abs() <= 0.005 && (co - 2.60).abs() <= 0.005,
        format!("H2 {h2:.4}, CO {co:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let refs = references();
    let h2 = load("h2_sto3g_0.7414.fcidump");
    let iepa = iepa1_pair_energies(&h2).map_err(|e| e.to_string())?.total();
    let mut worst = (iepa - mp2_oracle(&h2)).abs().max((iepa - closed_shell_mp2(&h2)).abs());
    let vs_pyscf = (iepa - refs["h2_sto3g_0.7414.fcidump"].e_mp2_corr).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..20 {
        let m = rng.random_range(2..=6);
        let n_e = 2 * rng.random_range(1..m);
        let ints = random_integrals(m, n_e, 600 + k);
        let iepa = iepa1_pair_energies(&ints).map_err(|e| e.to_string())?.total();
        worst = worst
            .max((iepa - mp2_oracle(&ints)).abs())
            .max((iepa - closed_shell_mp2(&ints)).abs());
    }
    check(
        worst <= 1e-10,
        format!("max |E_IEPA1 − E_MP2| = {worst:.2e} over 21 fixtures; H2 vs external MP2 {vs_pyscf:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut worst_spec: f64 = 0.0;
    let mut worst_taper: f64 = 0.0;
    let mut unrestricted_mismatch = 0;
    let mut cases = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..12u64 {
        let m = 1 + (k as usize % 3);
        let n_e = 2 * rng.random_range(1..=m);
        let ints = random_integrals(m, n_e, 700 + k);
        let ham = build_from_integrals(&ints);
        let jw = jordan_wigner(&ham).map_err(|e| e.to_string())?;
        let par = parity_map(&ham).map_err(|e| e.to_string())?;
        let sj = hermitian_spectrum(&pauli_sum_matrix(&jw).map_err(|e| e.to_string())?);
        let sp = hermitian_spectrum(&pauli_sum_matrix(&par).map_err(|e| e.to_string())?);
        for (a, b) in sj.iter().zip(&sp) {
            worst_spec = worst_spec.max((a - b).abs());
        }
        // every electron sector, not only the closed-shell one
        for na in 0..=m {
            for nb in 0..=m {
                let ne = na + nb;
                if m < 2 {
                    continue;
                }
                let tapered_enc = QubitEncoding::tapered_parity(m, na, ne);
                let tapered = tapered_enc.map_hamiltonian(&ham).map_err(|e| e.to_string())?;
                let full_enc = QubitEncoding::parity(2 * m);
                let e_sector = exact_ground_state_in_sector(&par, &full_enc, na, nb).map_err(|e| e.to_string())?.energy;
                let e_tap = exact_ground_state_in_sector(&tapered, &tapered_enc, na, nb)
                    .map_err(|e| e.to_string())?
                    .energy;
                worst_taper = worst_taper.max((e_sector - e_tap).abs());
                let e_free = exact_ground_state(&tapered).map_err(|e| e.to_string())?.energy;
                if (e_free - e_sector).abs() > 1e-10 {
                    unrestricted_mismatch += 1;
                }
                cases += 1;
            }
        }
    }
    check(
        worst_spec <= 1e-10 && worst_taper <= 1e-10,
        format!(
            "spectra Δ {worst_spec:.1e}; tapered vs sector ED Δ {worst_taper:.1e} over {cases} sectors \
             ({unrestricted_mismatch} sectors where the unrestricted tapered minimum lies in another N)"
        ),
    )
}

fn qubit_ed_vs_ci(label: &str, act: &ActiveIntegrals, worst: &mut f64, lines: &mut Vec<String>) -> Result<(), String> {
    let m = act.spec.n_active();
    let na = act.spec.n_active_electrons / 2;
    let ci = ci_oracle(act).map_err(|e| e.to_string())?;
    let ham = build_fermion_hamiltonian(act);
    for enc in [
        QubitEncoding::tapered_parity(m, na, 2 * na),
        QubitEncoding::jordan_wigner(2 * m),
    ] {
        let p = enc.map_hamiltonian(&ham).map_err(|e| e.to_string())?;
        let e = exact_ground_state_in_sector(&p, &enc, na, na).map_err(|e| e.to_string())?.energy;
        *worst = worst.max((e - ci).abs());
    }
    lines.push(format!("{label}{}", act.spec.label()));
    Ok(())
}

fn criterion_8() -> Outcome {
    let refs = references();
    let mut worst: f64 = 0.0;
    let mut external: f64 = 0.0;
    let mut lines = Vec::new();
    let mut full: Vec<String> = vec!["h2_sto3g_0.7414.fcidump".into(), "lih_sto3g_1.60.fcidump".into()];
    full.extend((0..9).map(|i| format!("h2_scan/h2_r0.{}.fcidump", 70 + i)));
    for name in &full {
        let ints = load(name);
        let act = ActiveIntegrals::full(&ints).map_err(|e| e.to_string())?;
        qubit_ed_vs_ci(name.split('_').next().unwrap_or(name), &act, &mut worst, &mut lines)?;
        if let Some(fci) = refs[name.as_str()].e_fci {
            external = external.max((ci_oracle(&act).map_err(|e| e.to_string())? - fci).abs());
        }
    }
    let n2 = load("n2_sto3g_1.10.fcidump");
    for rule in [SelectionPolicy::TopK(4), SelectionPolicy::TopK(6)] {
        let cfg = PipelineConfig {
            selection: ActiveSpacePolicy::Iepa1 { rule },
            frozen: FrozenCore::Preset(CorePreset::Pseudopotential),
            ..Default::default()
        };
        let sel = select(&n2, &["N", "N"], &cfg).map_err(|e| e.to_string())?;
        let g = prepare_geometry(&n2, &sel.spec, &cfg).map_err(|e| e.to_string())?;
        qubit_ed_vs_ci("N2", &g.active, &mut worst, &mut lines)?;
    }
    let frozen = CorePreset::Pseudopotential.frozen_orbitals(&n2, &["N", "N"]).map_err(|e| e.to_string())?;
    let spec = select_minimal_basis(&n2, 6, &frozen).map_err(|e| e.to_string())?;
    let act = aqvib::activespace::fold_core(&n2, &spec).map_err(|e| e.to_string())?;
    qubit_ed_vs_ci("N2(MB)", &act, &mut worst, &mut lines)?;
    lines.dedup();
    check(
        worst <= 1e-10,
        format!(
            "max |E_ED − E_CI| = {worst:.1e} on {} Hamiltonians; CI vs external FCI {external:.1e}",
            lines.len() + 8
        ),
    )
}

fn h2_scan() -> GeometryScan {
    GeometryScan::load(fixture("h2_scan/scan.json")).expect("scan")
}

fn criterion_9() -> Outcome {
    let scan = h2_scan();
    let ed_cfg = PipelineConfig::default();
    let vqe_cfg = PipelineConfig {
        solver: SolverKind::Vqe,
        ..Default::default()
    };
    let ed = pec_sweep(&scan, &ed_cfg).map_err(|e| e.to_string())?.report;
    let vqe = pec_sweep(&scan, &vqe_cfg).map_err(|e| e.to_string())?.report;
    let mut worst: f64 = 0.0;
    for (a, b) in ed.points.iter().zip(&vqe.points) {
        let (Some(ea), Some(eb)) = (a.energy, b.energy) else {
            return Err(format!("missing energy at r = {}", a.r));
        };
        worst = worst.max((ea - eb).abs());
    }
    let (Some(fe), Some(fv)) = (&ed.frequency, &vqe.frequency) else {
        return Err(format!("no frequency: {:?} {:?}", ed.frequency_error, vqe.frequency_error));
    };
    let dw = (fe.harmonic_frequency_cm1 - fv.harmonic_frequency_cm1).abs();
    let qubits = vqe.points[0].n_qubits.unwrap_or(0);
    check(
        worst <= 1e-8 && dw <= 0.1 && qubits == 2,
        format!(
            "{qubits} qubits, max |E_VQE − E_ED| = {worst:.1e} Ha, ω_ED = {:.3}, ω_VQE = {:.3} cm⁻¹ (Δ {dw:.1e})",
            fe.harmonic_frequency_cm1, fv.harmonic_frequency_cm1
        ),
    )
}

fn criterion_10() -> Outcome {
    let n2 = load("n2_sto3g_1.10.fcidump");
    let cfg = PipelineConfig {
        selection: ActiveSpacePolicy::Iepa1 {
            rule: SelectionPolicy::TopK(4),
        },
        frozen: FrozenCore::Preset(CorePreset::Pseudopotential),
        ..Default::default()
    };
    let sel = select(&n2, &["N", "N"], &cfg).map_err(|e| e.to_string())?;
    let g = prepare_geometry(&n2, &sel.spec, &cfg).map_err(|e| e.to_string())?;
    if g.hamiltonian.n_qubits != 6 {
        return Err(format!("fixture has {} qubits", g.hamiltonian.n_qubits));
    }
    let ed = g.exact_ground_state().map_err(|e| e.to_string())?;
    let proto = OptimizerProtocol::default();
    let single = OptimizerProtocol {
        restarts: 1,
        ..proto
    };
    let mut best = Vec::new();
    for reps in [1, 2, 4, 8, 10] {
        let circuit = build_realamplitudes(6, reps).map_err(|e| e.to_string())?;
        let zero = vec![0.0; circuit.n_params];
        let mut f_best: f64 = 0.0;
        for r in 0..proto.restarts {
            let start = proto.start_point(&zero, r);
            let res = vqe_minimize_from(&g.hamiltonian, &circuit, g.hf_index, &single, &start, Some(&ed.state))
                .map_err(|e| e.to_string())?;
            f_best = f_best.max(res.fidelity.unwrap_or(0.0));
        }
        best.push((reps, f_best));
    }
    // Fidelities are compared at the seven decimals used when reporting them;
    // once an ansatz saturates, the raw values differ only by optimizer
    // termination noise.
    let reported = |f: f64| (f * 1e7).round() / 1e7;
    let monotone = best.windows(2).all(|w| reported(w[1].1) >= reported(w[0].1));
    let raw_dips = best.windows(2).filter(|w| w[1].1 < w[0].1).count();
    let last = best.last().map_or(0.0, |b| b.1);
    let trail: Vec<String> = best.iter().map(|(r, f)| format!("{r}:{f:.10}")).collect();
    check(
        monotone && last >= 0.9999,
        format!(
            "N2 {} on 6 qubits, fidelity by reps {} ({raw_dips} raw inversions below 1e-7)",
            sel.spec.label(),
            trail.join(" ")
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut worst_k: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    for (k, r0) in [(0.37, 0.7414), (1.2, 1.1), (0.05, 2.3456), (3.0, 0.9)] {
        let start = (r0 * 100.0f64).round() / 100.0 - 0.04;
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let r = start + 0.01 * i as f64;
                (r, 0.5 * k * (r - r0) * (r - r0))
            })
            .collect();
        let fit = fit_quadratic(&PotentialEnergyCurve::from_points("p", &pts).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let re = equilibrium_bond_length(&fit).map_err(|e| e.to_string())?;
        worst_k = worst_k.max((2.0 * fit.c2 - k).abs() / k);
        worst_r = worst_r.max((re - r0).abs() / r0);
    }
    let mut worst_curv: f64 = 0.0;
    let mut worst_morse_r: f64 = 0.0;
    // (D / Ha, a / Å⁻¹, r0 / Å) with r0 on the sampling grid
    for (d, a, r0) in [(0.1745, 1.94, 0.74), (0.0924, 1.13, 1.6), (0.3640, 2.69, 1.10), (0.2, 1.0, 1.0)] {
        let pts: Vec<(f64, f64)> = (-6..=6)
            .map(|i| {
                let r = r0 + 0.01 * i as f64;
                (r, d * (1.0 - (-a * (r - r0)).exp()).powi(2))
            })
            .collect();
        let fit = fit_quadratic(&PotentialEnergyCurve::from_points("m", &pts).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let analytic = 2.0 * d * a * a;
        worst_curv = worst_curv.max((2.0 * fit.c2 - analytic).abs() / analytic);
        worst_morse_r = worst_morse_r.max((equilibrium_bond_length(&fit).map_err(|e| e.to_string())? - r0).abs());
    }
    check(
        worst_k <= 1e-12 && worst_r <= 1e-12 && worst_curv <= 5e-3 && worst_morse_r <= 1e-3,
        format!(
            "parabola k {worst_k:.1e}, r₀ {worst_r:.1e} rel; Morse curvature {:.3}%, r₀ {worst_morse_r:.1e} Å",
            100.0 * worst_curv
        ),
    )
}

fn random_pauli_sum(n: usize, rng: &mut ChaCha8Rng) -> PauliSum {
    let terms = (0..8)
        .map(|_| {
            let x = rng.random_range(0..1u64 << n);
            let z = rng.random_range(0..1u64 << n);
            (PauliString { x, z }, rng.random_range(-1.0..1.0))
        })
        .collect();
    PauliSum::from_terms(n, terms)
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for case in 0..50 {
        let (circuit, init, p) = if case % 2 == 0 {
            let n = rng.random_range(1..=6);
            let c = build_realamplitudes(n, rng.random_range(1..=3)).map_err(|e| e.to_string())?;
            let init = rng.random_range(0..1u64 << n);
            (c, init, random_pauli_sum(n, &mut rng))
        } else {
            let m = rng.random_range(2..=3);
            let enc = match case % 4 {
                1 => QubitEncoding::tapered_parity(m + 1, 1, 2),
                _ => QubitEncoding::jordan_wigner(2 * m),
            };
            let m_eff = enc.n_modes / 2;
            let c = build_uccsd_for(m_eff, &[0], &enc).map_err(|e| e.to_string())?;
            let init = enc.encode(1 | 1 << m_eff);
            let n = enc.n_qubits();
            (c, init, random_pauli_sum(n, &mut rng))
        };
        let theta: Vec<f64> = (0..circuit.n_params).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (_, grad) = vqe_gradient(&p, &circuit, init, &theta).map_err(|e| e.to_string())?;
        let mut fd = vec![0.0; theta.len()];
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let ep = aqvib::solver::vqe_energy(&p, &circuit, init, &tp).map_err(|e| e.to_string())?;
            let em = aqvib::solver::vqe_energy(&p, &circuit, init, &tm).map_err(|e| e.to_string())?;
            fd[k] = (ep - em) / (2.0 * h);
        }
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let diff = grad.iter().zip(&fd).fold(0.0f64, |a, (g, f)| a.max((g - f).abs()));
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        } else {
            worst = worst.max(diff);
        }
    }
    check(worst <= 1e-6, format!("50 cases, max ‖g − g_FD‖∞ / ‖g‖∞ = {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 12] = [
        ("1", "UCCSD parameter counts", criterion_1),
        ("2", "RealAmplitudes parameter counts", criterion_2),
        ("3", "tapered qubit counts 2m−2", criterion_3),
        ("4", "benchmark error statistics", criterion_4),
        ("5", "Mayer bond orders", criterion_5),
        ("6", "IEPA1 equals MP2", criterion_6),
        ("7", "mapping and tapering soundness", criterion_7),
        ("8", "qubit ED equals determinant CI", criterion_8),
        ("9", "H2 VQE-UCCSD versus ED", criterion_9),
        ("10", "RealAmplitudes fidelity trend", criterion_10),
        ("11", "frequency fit on analytic curves", criterion_11),
        ("12", "adjoint gradient versus finite differences", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut ledger = Ledger::default();
    for (id, title, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        ledger.record(id, &format!("{title} ({:.2} s)", t0.elapsed().as_secs_f64()), outcome);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        ledger.count - ledger.failures.len(),
        ledger.count
    );
    if !ledger.failures.is_empty() {
        println!("failed: {}", ledger.failures.join(", "));
        std::process::exit(1);
    }
}
