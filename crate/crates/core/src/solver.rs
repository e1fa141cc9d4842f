//! Ground-state solvers: exact diagonalization of qubit Hamiltonians and a
//! statevector VQE driver with a two-stage optimizer and cross-geometry
//! warm starts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::ParamCircuit;
use crate::linalg::{dense_lowest_hermitian, lanczos_lowest, LanczosOptions, LowestEigen};
use crate::optimize::{bfgs, lbfgs, OptimizeOptions, OptimizeResult};
use crate::qubitmap::{PauliSum, QubitEncoding};
use crate::simulator::{
    apply_gate, apply_pauli_string, fidelity, pauli_sum_matrix, CompiledPauliSum, StateVector,
};
use crate::{Error, Result};

/// Registers up to this size are diagonalized densely.
pub const DENSE_ED_QUBITS: usize = 8;
/// Largest register handled by the matrix-free eigensolver.
pub const MAX_ED_QUBITS: usize = 20;
/// Ground states closer than this to the next level are flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;
/// Largest accepted eigenpair residual `‖Hv − λv‖`.
pub const ED_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub degenerate: bool,
    pub residual: f64,
}

fn finish(eig: LowestEigen) -> Result<GroundState> {
    if eig.residual > ED_RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            residual: eig.residual,
        });
    }
    let degenerate = eig
        .next_value
        .is_some_and(|next| next - eig.value < DEGENERACY_GAP);
    Ok(GroundState {
        energy: eig.value,
        state: StateVector::from_amplitudes(eig.vector)?,
        degenerate,
        residual: eig.residual,
    })
}

fn ed_with_mask(p: &PauliSum, mask: Option<&[bool]>) -> Result<GroundState> {
    let n = p.n_qubits;
    if n > MAX_ED_QUBITS {
        return Err(Error::TooManyQubits {
            dim: n,
            limit: MAX_ED_QUBITS,
        });
    }
    let dim = 1usize << n;
    if n <= DENSE_ED_QUBITS {
        let full = pauli_sum_matrix(p)?;
        let keep: Vec<usize> = match mask {
            Some(m) => (0..dim).filter(|&k| m[k]).collect(),
            None => (0..dim).collect(),
        };
        if keep.is_empty() {
            return Err(Error::Dimension("empty symmetry sector".into()));
        }
        let sub = nalgebra::DMatrix::from_fn(keep.len(), keep.len(), |r, c| full[(keep[r], keep[c])]);
        let eig = dense_lowest_hermitian(&sub);
        let mut vector = vec![Complex64::new(0.0, 0.0); dim];
        for (k, &idx) in keep.iter().enumerate() {
            vector[idx] = eig.vector[k];
        }
        return finish(LowestEigen { vector, ..eig });
    }
    let compiled = CompiledPauliSum::new(p);
    let apply = |x: &[Complex64], y: &mut [Complex64]| compiled.apply_into(x, y);
    let eig = lanczos_lowest(dim, apply, None, mask, LanczosOptions::default())?;
    finish(eig)
}

/// Lowest eigenpair of a qubit Hamiltonian over its whole register.
pub fn exact_ground_state(p: &PauliSum) -> Result<GroundState> {
    ed_with_mask(p, None)
}

/// Lowest eigenpair among basis states that decode to `n_alpha` alpha and
/// `n_beta` beta electrons under `encoding`.
pub fn exact_ground_state_in_sector(
    p: &PauliSum,
    encoding: &QubitEncoding,
    n_alpha: usize,
    n_beta: usize,
) -> Result<GroundState> {
    if p.n_qubits != encoding.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: encoding.n_qubits(),
            found: p.n_qubits,
        });
    }
    let mask = sector_mask(encoding, n_alpha, n_beta);
    ed_with_mask(p, Some(&mask))
}

/// `mask[k]` is true when basis index `k` holds the requested electron counts.
pub fn sector_mask(encoding: &QubitEncoding, n_alpha: usize, n_beta: usize) -> Vec<bool> {
    let m = encoding.n_modes / 2;
    let alpha_bits = (1u64 << m) - 1;
    (0..1u64 << encoding.n_qubits())
        .map(|k| {
            let occ = encoding.decode(k);
            (occ & alpha_bits).count_ones() as usize == n_alpha
                && (occ >> m).count_ones() as usize == n_beta
        })
        .collect()
}

/// Final state of `circuit` bound to `theta` acting on `|init⟩`.
pub fn vqe_state(circuit: &ParamCircuit, init: u64, theta: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::basis(circuit.n_qubits, init)?;
    for g in circuit.bind(theta)? {
        apply_gate(&mut state, &g)?;
    }
    Ok(state)
}

fn check_dims(p: &PauliSum, circuit: &ParamCircuit) -> Result<()> {
    if p.n_qubits != circuit.n_qubits {
        return Err(Error::QubitMismatch {
            expected: circuit.n_qubits,
            found: p.n_qubits,
        });
    }
    Ok(())
}

/// `⟨ψ(θ)|H|ψ(θ)⟩`.
pub fn vqe_energy(p: &PauliSum, circuit: &ParamCircuit, init: u64, theta: &[f64]) -> Result<f64> {
    check_dims(p, circuit)?;
    let state = vqe_state(circuit, init, theta)?;
    Ok(CompiledPauliSum::new(p).expectation(&state))
}

/// Energy and its exact gradient via one forward and one reverse sweep.
pub fn vqe_gradient(
    p: &PauliSum,
    circuit: &ParamCircuit,
    init: u64,
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_dims(p, circuit)?;
    let ham = CompiledPauliSum::new(p);
    energy_and_gradient(&ham, circuit, init, theta)
}

fn energy_and_gradient(
    ham: &CompiledPauliSum,
    circuit: &ParamCircuit,
    init: u64,
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let gates = circuit.bind(theta)?;
    let mut psi = StateVector::basis(circuit.n_qubits, init)?;
    for g in &gates {
        apply_gate(&mut psi, g)?;
    }
    let mut lambda = ham.apply(&psi);
    let energy = psi.inner(&lambda).re;
    let mut grad = vec![0.0; circuit.n_params];
    for (template, gate) in circuit.templates.iter().zip(&gates).rev() {
        if let (Some(k), Some(gen)) = (template.param(), gate.generator()) {
            // dE/dθ = Im⟨λ|G|ψ⟩ with ψ the state just after this gate
            let g_psi = apply_pauli_string(&gen, &psi);
            grad[k] += template.scale() * lambda.inner(&g_psi).im;
        }
        let inv = gate.inverse();
        apply_gate(&mut psi, &inv)?;
        apply_gate(&mut lambda, &inv)?;
    }
    Ok((energy, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerProtocol {
    pub restarts: usize,
    pub sigma: f64,
    pub stage1_tol: f64,
    pub stage1_max_iter: usize,
    pub stage2_tol: f64,
    pub stage2_max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
    pub max_consistency_passes: usize,
    pub consistency_tol: f64,
}

impl Default for OptimizerProtocol {
    fn default() -> Self {
        Self {
            restarts: 8,
            sigma: 0.01,
            stage1_tol: 1e-6,
            stage1_max_iter: 200,
            stage2_tol: 1e-10,
            stage2_max_iter: 2000,
            grad_tol: 1e-8,
            seed: 7,
            max_consistency_passes: 3,
            consistency_tol: 1e-6,
        }
    }
}

impl OptimizerProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Parse("restart count must be at least 1".into()));
        }
        for (name, v) in [
            ("stage1_tol", self.stage1_tol),
            ("stage2_tol", self.stage2_tol),
            ("grad_tol", self.grad_tol),
            ("consistency_tol", self.consistency_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::Parse(format!("{name} must be positive")));
            }
        }
        if self.sigma < 0.0 {
            return Err(Error::Parse("sigma must be non-negative".into()));
        }
        Ok(())
    }

    fn stage1(&self) -> OptimizeOptions {
        OptimizeOptions {
            max_iter: self.stage1_max_iter,
            f_tol: self.stage1_tol,
            grad_tol: self.grad_tol.max(self.stage1_tol * 1e-2),
            memory: 10,
        }
    }

    fn stage2(&self) -> OptimizeOptions {
        OptimizeOptions {
            max_iter: self.stage2_max_iter,
            f_tol: self.stage2_tol,
            grad_tol: self.grad_tol,
            memory: 20,
        }
    }

    /// Starting point of restart `r`: the base point, perturbed for `r > 0`.
    pub fn start_point(&self, base: &[f64], restart: usize) -> Vec<f64> {
        if restart == 0 {
            return base.to_vec();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        base.iter()
            .map(|b| b + rng.random_range(-self.sigma..=self.sigma))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub energy: f64,
    pub params: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub best_restart: usize,
    pub fidelity: Option<f64>,
}

fn relabel_divergence(e: Error, restart: usize) -> Error {
    match e {
        Error::Diverged { .. } => Error::Diverged { restart },
        other => other,
    }
}

fn stage1_runs(
    ham: &CompiledPauliSum,
    circuit: &ParamCircuit,
    init: u64,
    proto: &OptimizerProtocol,
    base: &[f64],
) -> Result<Vec<OptimizeResult>> {
    (0..proto.restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = proto.start_point(base, r);
            let f = |x: &[f64]| energy_and_gradient(ham, circuit, init, x);
            bfgs(f, &x0, &proto.stage1()).map_err(|e| relabel_divergence(e, r))
        })
        .collect()
}

fn refine(
    ham: &CompiledPauliSum,
    circuit: &ParamCircuit,
    init: u64,
    proto: &OptimizerProtocol,
    x0: &[f64],
) -> Result<OptimizeResult> {
    let f = |x: &[f64]| energy_and_gradient(ham, circuit, init, x);
    lbfgs(f, x0, &proto.stage2())
}

/// Two-stage minimization starting from `θ = 0` (restart 0) and perturbed
/// copies.
pub fn vqe_minimize(
    p: &PauliSum,
    circuit: &ParamCircuit,
    init: u64,
    proto: &OptimizerProtocol,
    reference: Option<&StateVector>,
) -> Result<VqeResult> {
    vqe_minimize_from(p, circuit, init, proto, &vec![0.0; circuit.n_params], reference)
}

/// As [`vqe_minimize`] with restart 0 at `base` and perturbations around it.
pub fn vqe_minimize_from(
    p: &PauliSum,
    circuit: &ParamCircuit,
    init: u64,
    proto: &OptimizerProtocol,
    base: &[f64],
    reference: Option<&StateVector>,
) -> Result<VqeResult> {
    check_dims(p, circuit)?;
    circuit.check_params(base)?;
    proto.validate()?;
    let ham = CompiledPauliSum::new(p);
    let runs = stage1_runs(&ham, circuit, init, proto, base)?;
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let stage1_evals: usize = runs.iter().map(|r| r.evaluations).sum();
    let stage1_iters: usize = runs.iter().map(|r| r.iterations).sum();
    let refined = refine(&ham, circuit, init, proto, &best.x)
        .map_err(|e| relabel_divergence(e, best_restart))?;
    let (final_run, energy) = if refined.f <= best.f {
        (&refined, refined.f)
    } else {
        (best, best.f)
    };
    let fidelity = match reference {
        Some(r) => Some(fidelity(r, &vqe_state(circuit, init, &final_run.x)?)),
        None => None,
    };
    Ok(VqeResult {
        energy,
        params: final_run.x.clone(),
        iterations: stage1_iters + refined.iterations,
        evaluations: stage1_evals + refined.evaluations,
        grad_norm: final_run.grad_norm(),
        converged: refined.converged,
        best_restart,
        fidelity,
    })
}

/// One geometry of a VQE potential-energy scan.
#[derive(Debug, Clone)]
pub struct VqePoint {
    pub hamiltonian: PauliSum,
    pub circuit: ParamCircuit,
    pub init: u64,
    pub reference: Option<StateVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub results: Vec<VqeResult>,
    /// Points still improving by more than the tolerance in the final pass.
    pub flagged: Vec<bool>,
    pub passes: usize,
}

/// Independent VQE at every point, then the warm-start consistency pass.
pub fn vqe_sweep(points: &[VqePoint], proto: &OptimizerProtocol) -> Result<SweepOutcome> {
    let results = points
        .par_iter()
        .map(|pt| {
            vqe_minimize(
                &pt.hamiltonian,
                &pt.circuit,
                pt.init,
                proto,
                pt.reference.as_ref(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    consistency_pass(points, results, proto)
}

/// Re-optimizes each point from its neighbors' parameters, keeping only
/// improvements larger than `consistency_tol`, until no point improves or
/// the pass limit is reached.
pub fn consistency_pass(
    points: &[VqePoint],
    mut results: Vec<VqeResult>,
    proto: &OptimizerProtocol,
) -> Result<SweepOutcome> {
    let n = points.len();
    let mut flagged = vec![false; n];
    let mut passes = 0;
    while passes < proto.max_consistency_passes {
        passes += 1;
        let snapshot = results.clone();
        let updates: Vec<Option<VqeResult>> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<Option<VqeResult>> {
                let pt = &points[i];
                let ham = CompiledPauliSum::new(&pt.hamiltonian);
                let mut best: Option<VqeResult> = None;
                for d in [i.wrapping_sub(1), i + 1] {
                    let Some(donor) = snapshot.get(d) else {
                        continue;
                    };
                    if donor.params.len() != pt.circuit.n_params {
                        continue;
                    }
                    let run = refine(&ham, &pt.circuit, pt.init, proto, &donor.params)
                        .map_err(|e| relabel_divergence(e, i))?;
                    let current = best.as_ref().map_or(snapshot[i].energy, |b| b.energy);
                    if run.f < current - proto.consistency_tol {
                        let fidelity = match &pt.reference {
                            Some(r) => Some(fidelity(r, &vqe_state(&pt.circuit, pt.init, &run.x)?)),
                            None => None,
                        };
                        best = Some(VqeResult {
                            energy: run.f,
                            params: run.x.clone(),
                            iterations: snapshot[i].iterations + run.iterations,
                            evaluations: snapshot[i].evaluations + run.evaluations,
                            grad_norm: run.grad_norm(),
                            converged: run.converged,
                            best_restart: snapshot[i].best_restart,
                            fidelity,
                        });
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let mut changed = false;
        for (i, u) in updates.into_iter().enumerate() {
            flagged[i] = u.is_some();
            if let Some(u) = u {
                log::debug!(
                    "point {i}: warm start lowered energy {:.12} -> {:.12}",
                    results[i].energy,
                    u.energy
                );
                results[i] = u;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(SweepOutcome {
        results,
        flagged,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_realamplitudes;
    use crate::qubitmap::PauliString;

    fn sum(n: usize, terms: &[(&str, f64)]) -> PauliSum {
        PauliSum::from_terms(
            n,
            terms
                .iter()
                .map(|(l, c)| (PauliString::from_label(l).unwrap(), *c))
                .collect(),
        )
    }

    #[test]
    fn single_qubit_ground_states() {
        let z = exact_ground_state(&sum(1, &[("Z", 1.0)])).unwrap();
        assert!((z.energy + 1.0).abs() < 1e-14);
        assert!((z.state.amplitudes()[1].norm() - 1.0).abs() < 1e-14);
        let x = exact_ground_state(&sum(1, &[("X", 1.0)])).unwrap();
        assert!((x.energy + 1.0).abs() < 1e-14);
        let a = x.state.amplitudes();
        assert!((a[0] + a[1]).norm() < 1e-12);
        assert!(!x.degenerate);
        let deg = exact_ground_state(&sum(2, &[("ZI", 1.0)])).unwrap();
        assert!(deg.degenerate);
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        // a 9-qubit transverse-field chain is above the dense limit
        let n = 9;
        let mut terms = Vec::new();
        for q in 0..n {
            terms.push((PauliString::single(q, crate::qubitmap::Pauli::X), 0.7));
            if q + 1 < n {
                let zz = PauliString::single(q, crate::qubitmap::Pauli::Z)
                    .with(q + 1, crate::qubitmap::Pauli::Z);
                terms.push((zz, -1.0));
            }
        }
        let h = PauliSum::from_terms(n, terms);
        let lz = exact_ground_state(&h).unwrap();
        let m = pauli_sum_matrix(&h).unwrap();
        let dense = dense_lowest_hermitian(&m);
        assert!((lz.energy - dense.value).abs() < 1e-10);
        assert!(lz.residual <= ED_RESIDUAL_TOL);
        assert!(exact_ground_state(&PauliSum::zero(21)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = sum(3, &[("ZZI", 0.4), ("IXZ", -0.3), ("YYI", 0.2), ("IIZ", 0.9)]);
        let c = build_realamplitudes(3, 2).unwrap();
        let theta: Vec<f64> = (0..c.n_params).map(|k| 0.3 * (k as f64).sin()).collect();
        let (e, g) = vqe_gradient(&h, &c, 0b011, &theta).unwrap();
        assert!((e - vqe_energy(&h, &c, 0b011, &theta).unwrap()).abs() < 1e-14);
        for k in 0..c.n_params {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += 1e-5;
            tm[k] -= 1e-5;
            let fd = (vqe_energy(&h, &c, 0b011, &tp).unwrap() - vqe_energy(&h, &c, 0b011, &tm).unwrap()) / 2e-5;
            assert!((fd - g[k]).abs() <= 1e-6 * fd.abs().max(1e-3), "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn one_qubit_z_minimizes_to_minus_one() {
        let h = sum(1, &[("Z", 1.0)]);
        let c = build_realamplitudes(1, 1).unwrap();
        let r = vqe_minimize(&h, &c, 0, &OptimizerProtocol::default(), None).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-10, "{}", r.energy);
    }

    #[test]
    fn minimization_is_deterministic() {
        let h = sum(2, &[("ZZ", 0.5), ("XI", 0.3), ("IX", -0.2), ("YY", 0.1)]);
        let c = build_realamplitudes(2, 2).unwrap();
        let proto = OptimizerProtocol::default();
        let a = vqe_minimize(&h, &c, 0, &proto, None).unwrap();
        let b = vqe_minimize(&h, &c, 0, &proto, None).unwrap();
        assert_eq!(a.params, b.params);
        let ed = exact_ground_state(&h).unwrap();
        assert!(a.energy >= ed.energy - 1e-9);
    }

    #[test]
    fn start_points() {
        let p = OptimizerProtocol::default();
        assert_eq!(p.start_point(&[0.0; 4], 0), vec![0.0; 4]);
        let s = p.start_point(&[0.0; 4], 3);
        assert!(s.iter().all(|v| v.abs() <= p.sigma && *v != 0.0));
        assert_ne!(s, p.start_point(&[0.0; 4], 4));
        let bad = OptimizerProtocol {
            restarts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
