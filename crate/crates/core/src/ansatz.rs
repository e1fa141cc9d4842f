//! Parameterized circuits: trotterized UCCSD and the RealAmplitudes
//! hardware-efficient ansatz. The reference bitstring is prepared separately
//! as the simulator's initial basis state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::activespace::ActiveSpaceSpec;
use crate::qubitmap::{PauliString, QubitEncoding};
use crate::simulator::Gate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Uccsd,
    RealAmplitudes,
}

impl std::str::FromStr for AnsatzKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uccsd" => Ok(AnsatzKind::Uccsd),
            "realamp" | "realamplitudes" | "ry" => Ok(AnsatzKind::RealAmplitudes),
            _ => Err(Error::Parse(format!("unknown ansatz '{s}'"))),
        }
    }
}

/// A gate whose angle may be `scale · θ[param]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateTemplate {
    Fixed { gate: Gate },
    Ry { qubit: usize, param: usize },
    PauliRotation {
        label: String,
        #[serde(skip)]
        pauli: PauliString,
        param: usize,
        scale: f64,
    },
}

impl GateTemplate {
    pub fn param(&self) -> Option<usize> {
        match self {
            GateTemplate::Fixed { .. } => None,
            GateTemplate::Ry { param, .. } | GateTemplate::PauliRotation { param, .. } => {
                Some(*param)
            }
        }
    }

    /// `dθ_gate / dθ[param]`.
    pub fn scale(&self) -> f64 {
        match self {
            GateTemplate::PauliRotation { scale, .. } => *scale,
            _ => 1.0,
        }
    }

    pub fn bind(&self, theta: &[f64]) -> Gate {
        match self {
            GateTemplate::Fixed { gate } => gate.clone(),
            GateTemplate::Ry { qubit, param } => Gate::Ry {
                qubit: *qubit,
                theta: theta[*param],
            },
            GateTemplate::PauliRotation {
                pauli, param, scale, ..
            } => Gate::PauliRotation {
                pauli: *pauli,
                theta: scale * theta[*param],
            },
        }
    }
}

/// Spin-conserving excitation between spin orbitals (block ordering).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excitation {
    /// Occupied spin orbitals emptied.
    pub from: Vec<usize>,
    /// Virtual spin orbitals filled.
    pub to: Vec<usize>,
}

impl Excitation {
    /// `T − T†` as ladder products, written left to right.
    fn anti_hermitian_products(&self) -> Vec<(Complex64, Vec<(usize, bool)>)> {
        let mut t: Vec<(usize, bool)> = self.to.iter().map(|&a| (a, true)).collect();
        t.extend(self.from.iter().rev().map(|&i| (i, false)));
        let mut t_dag: Vec<(usize, bool)> = self.from.iter().map(|&i| (i, true)).collect();
        t_dag.extend(self.to.iter().rev().map(|&a| (a, false)));
        vec![
            (Complex64::new(1.0, 0.0), t),
            (Complex64::new(-1.0, 0.0), t_dag),
        ]
    }
}

/// Singles (alpha, then beta) followed by doubles (αα, αβ, ββ), each block
/// in lexicographic order of spin-orbital indices.
pub fn excitation_list(n_orbitals: usize, occupied: &[usize]) -> Vec<Excitation> {
    let m = n_orbitals;
    let occ: Vec<usize> = occupied.to_vec();
    let vir: Vec<usize> = (0..m).filter(|p| !occ.contains(p)).collect();
    let mut out = Vec::new();
    for shift in [0, m] {
        for &i in &occ {
            for &a in &vir {
                out.push(Excitation {
                    from: vec![i + shift],
                    to: vec![a + shift],
                });
            }
        }
    }
    let same_spin = |shift: usize, out: &mut Vec<Excitation>| {
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in vir.iter().enumerate() {
                    for &b in &vir[y + 1..] {
                        out.push(Excitation {
                            from: vec![i + shift, j + shift],
                            to: vec![a + shift, b + shift],
                        });
                    }
                }
            }
        }
    };
    same_spin(0, &mut out);
    for &i in &occ {
        for &j in &occ {
            for &a in &vir {
                for &b in &vir {
                    out.push(Excitation {
                        from: vec![i, j + m],
                        to: vec![a, b + m],
                    });
                }
            }
        }
    }
    same_spin(m, &mut out);
    out
}

/// `2ov + 2·C(o,2)·C(v,2) + o²v²`.
pub fn uccsd_parameter_count(n_occupied: usize, n_virtual: usize) -> usize {
    let (o, v) = (n_occupied, n_virtual);
    let c2 = |n: usize| n * n.saturating_sub(1) / 2;
    2 * o * v + 2 * c2(o) * c2(v) + o * o * v * v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamCircuit {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    pub n_params: usize,
    pub templates: Vec<GateTemplate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excitations: Vec<Excitation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
}

impl ParamCircuit {
    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::ParameterCount {
                expected: self.n_params,
                found: theta.len(),
            });
        }
        Ok(())
    }

    pub fn bind(&self, theta: &[f64]) -> Result<Vec<Gate>> {
        self.check_params(theta)?;
        Ok(self.templates.iter().map(|t| t.bind(theta)).collect())
    }

    /// Longest dependency path over the elementary (decomposed) gates.
    pub fn depth(&self) -> usize {
        let zeros = vec![0.0; self.n_params];
        let gates: Vec<Gate> = self
            .templates
            .iter()
            .flat_map(|t| t.bind(&zeros).decompose())
            .collect();
        gate_depth(self.n_qubits, &gates)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// DAG-layer depth: each gate sits one layer above the latest gate sharing
/// one of its qubits.
pub fn gate_depth(n_qubits: usize, gates: &[Gate]) -> usize {
    let mut level = vec![0usize; n_qubits];
    for g in gates {
        let qs = g.qubits();
        let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for q in qs {
            level[q] = l;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

/// Encoded reference determinant: the `N_e/2` occupied active MOs in both
/// spins.
pub fn hf_bitstring(spec: &ActiveSpaceSpec, encoding: &QubitEncoding) -> Result<u64> {
    let m = spec.n_active();
    if encoding.n_modes != 2 * m {
        return Err(Error::QubitMismatch {
            expected: 2 * m,
            found: encoding.n_modes,
        });
    }
    if let Some(t) = &encoding.taper {
        let half = spec.n_active_electrons / 2;
        if t.n_orbitals != m || t.n_alpha != half || t.n_electrons != spec.n_active_electrons {
            return Err(Error::Ansatz(
                "tapering context disagrees with the active space".into(),
            ));
        }
    }
    let occupation = spec
        .occupied_positions()
        .iter()
        .fold(0u64, |acc, &k| acc | (1 << k) | (1 << (k + m)));
    Ok(encoding.encode(occupation))
}

/// Trotterized UCCSD over the active space, mapped with `encoding`.
pub fn build_uccsd(spec: &ActiveSpaceSpec, encoding: &QubitEncoding) -> Result<ParamCircuit> {
    build_uccsd_for(spec.n_active(), &spec.occupied_positions(), encoding)
}

/// UCCSD for `n_orbitals` spatial orbitals with the given occupied positions.
pub fn build_uccsd_for(
    n_orbitals: usize,
    occupied: &[usize],
    encoding: &QubitEncoding,
) -> Result<ParamCircuit> {
    if encoding.n_modes != 2 * n_orbitals {
        return Err(Error::QubitMismatch {
            expected: 2 * n_orbitals,
            found: encoding.n_modes,
        });
    }
    let excitations = excitation_list(n_orbitals, occupied);
    if excitations.is_empty() {
        return Err(Error::Ansatz("empty excitation list".into()));
    }
    let n_qubits = encoding.n_qubits();
    let mut templates = Vec::new();
    for (k, exc) in excitations.iter().enumerate() {
        let mapped = encoding.map_products(&exc.anti_hermitian_products())?;
        // T − T† = i Σ c P  ⇒  exp(θ(T − T†)) = Π exp(−i(−2cθ)/2 · P)
        for (pauli, c) in mapped.anti_hermitian_part()? {
            templates.push(GateTemplate::PauliRotation {
                label: pauli.label(n_qubits),
                pauli,
                param: k,
                scale: -2.0 * c,
            });
        }
    }
    Ok(ParamCircuit {
        kind: AnsatzKind::Uccsd,
        n_qubits,
        n_params: excitations.len(),
        templates,
        excitations,
        reps: None,
    })
}

/// `reps` × [RY on every qubit; CNOT chain], then a final RY layer.
pub fn build_realamplitudes(n_qubits: usize, reps: usize) -> Result<ParamCircuit> {
    if n_qubits < 1 || reps < 1 {
        return Err(Error::Ansatz(format!(
            "RealAmplitudes needs at least one qubit and one repetition (got {n_qubits}, {reps})"
        )));
    }
    let mut templates = Vec::new();
    let mut param = 0;
    let mut ry_layer = |templates: &mut Vec<GateTemplate>| {
        for q in 0..n_qubits {
            templates.push(GateTemplate::Ry { qubit: q, param });
            param += 1;
        }
    };
    for _ in 0..reps {
        ry_layer(&mut templates);
        for q in 0..n_qubits.saturating_sub(1) {
            templates.push(GateTemplate::Fixed {
                gate: Gate::Cnot {
                    control: q,
                    target: q + 1,
                },
            });
        }
    }
    ry_layer(&mut templates);
    Ok(ParamCircuit {
        kind: AnsatzKind::RealAmplitudes,
        n_qubits,
        n_params: n_qubits * (reps + 1),
        templates,
        excitations: Vec::new(),
        reps: Some(reps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activespace::ActiveSpaceSpec;
    use crate::fermion::FermionHamiltonian;
    use crate::simulator::{apply_gate, expectation, fidelity, StateVector};
    use rand::{Rng, SeedableRng};

    fn spec(n_e: usize, m: usize) -> ActiveSpaceSpec {
        let occ: Vec<usize> = (0..n_e / 2).collect();
        ActiveSpaceSpec::new(m, n_e, &occ, vec![], (0..m).collect()).unwrap()
    }

    #[test]
    fn uccsd_counts_match_formula_and_enumeration() {
        for o in 1..=4 {
            for v in 1..=4 {
                let occ: Vec<usize> = (0..o).collect();
                let list = excitation_list(o + v, &occ);
                assert_eq!(list.len(), uccsd_parameter_count(o, v), "o={o} v={v}");
                let mut dedup = list.clone();
                dedup.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
                dedup.dedup();
                assert_eq!(dedup.len(), list.len());
            }
        }
        assert_eq!(uccsd_parameter_count(2, 2), 26);
        assert_eq!(uccsd_parameter_count(4, 2), 92);
        assert_eq!(uccsd_parameter_count(3, 3), 117);
    }

    #[test]
    fn realamplitudes_counts_and_depth() {
        assert_eq!(build_realamplitudes(6, 10).unwrap().n_params, 66);
        assert_eq!(build_realamplitudes(10, 25).unwrap().n_params, 260);
        assert_eq!(build_realamplitudes(10, 30).unwrap().n_params, 310);
        assert_eq!(build_realamplitudes(4, 1).unwrap().depth(), 5);
        let depths: Vec<usize> = (1..6).map(|r| build_realamplitudes(5, r).unwrap().depth()).collect();
        assert!(depths.windows(2).all(|w| w[0] <= w[1]));
        assert!(build_realamplitudes(3, 0).is_err());
        let ry_layer: Vec<Gate> = (0..4).map(|q| Gate::Ry { qubit: q, theta: 0.1 }).collect();
        assert_eq!(gate_depth(4, &ry_layer), 1);
    }

    #[test]
    fn hf_bitstrings() {
        let s = spec(2, 2);
        assert_eq!(hf_bitstring(&s, &QubitEncoding::jordan_wigner(4)).unwrap(), 0b0101);
        // parity of occupations 0101 -> prefix parities 1,1,0,0 => bits 0b0011
        assert_eq!(hf_bitstring(&s, &QubitEncoding::parity(4)).unwrap(), 0b0011);
        // removing qubits 1 and 3 leaves bits (q2, q0) = (0, 1)
        let tap = QubitEncoding::tapered_parity(2, 1, 2);
        assert_eq!(hf_bitstring(&s, &tap).unwrap(), 0b01);
        let wrong = QubitEncoding::tapered_parity(2, 0, 2);
        assert!(hf_bitstring(&s, &wrong).is_err());
    }

    #[test]
    fn uccsd_zero_is_reference_and_conserves_number() {
        let s = spec(4, 4);
        for enc in [QubitEncoding::jordan_wigner(8), QubitEncoding::tapered_parity(4, 2, 4)] {
            let c = build_uccsd(&s, &enc).unwrap();
            assert_eq!(c.n_params, 26);
            let hf = hf_bitstring(&s, &enc).unwrap();
            let start = StateVector::basis(enc.n_qubits(), hf).unwrap();
            let mut st = start.clone();
            for g in c.bind(&vec![0.0; 26]).unwrap() {
                apply_gate(&mut st, &g).unwrap();
            }
            assert!((fidelity(&st, &start) - 1.0).abs() < 1e-14);

            let number = enc.map_hamiltonian(&FermionHamiltonian::number_operator(8)).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            let theta: Vec<f64> = (0..26).map(|_| rng.random_range(-0.5..0.5)).collect();
            let mut st = start.clone();
            for g in c.bind(&theta).unwrap() {
                apply_gate(&mut st, &g).unwrap();
            }
            assert!((st.norm() - 1.0).abs() < 1e-12);
            assert!((expectation(&number, &st).unwrap() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn realamplitudes_stays_real() {
        let c = build_realamplitudes(4, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let theta: Vec<f64> = (0..c.n_params).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut st = StateVector::basis(4, 0b0011).unwrap();
        for g in c.bind(&theta).unwrap() {
            apply_gate(&mut st, &g).unwrap();
        }
        assert!(st.amplitudes().iter().all(|a| a.im.abs() < 1e-12));

        let mut st = StateVector::basis(4, 0).unwrap();
        for g in c.bind(&vec![0.0; c.n_params]).unwrap() {
            apply_gate(&mut st, &g).unwrap();
        }
        assert!((st.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert!(c.bind(&[0.0]).is_err());
    }

    #[test]
    fn every_parameter_is_used_and_json_exports() {
        let c = build_uccsd(&spec(2, 3), &QubitEncoding::tapered_parity(3, 1, 2)).unwrap();
        let mut used = vec![false; c.n_params];
        for t in &c.templates {
            if let Some(p) = t.param() {
                used[p] = true;
            }
        }
        assert!(used.iter().all(|&u| u));
        let json = c.to_json().unwrap();
        assert!(json.contains("\"kind\": \"uccsd\""));
        assert!(json.contains("\"pauli_rotation\""));
    }
}
