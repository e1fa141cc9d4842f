//! Dense statevector simulator. Qubit 0 is the least-significant bit of the
//! amplitude index.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qubitmap::{Pauli, PauliString, PauliSum};
use crate::{Error, Result};

/// Largest register the simulator allocates.
pub const MAX_QUBITS: usize = 26;
const PARALLEL_DIM: usize = 1 << 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                dim: n_qubits,
                limit: MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(Error::IndexOutOfRange {
                index: index as usize,
                n: dim,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("{dim} amplitudes is not a power of two")));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

pub fn init_basis_state(n_qubits: usize, index: u64) -> Result<StateVector> {
    StateVector::basis(n_qubits, index)
}

/// `|⟨a|b⟩|²` for normalized states.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr()
}

/// Gates; rotations are `exp(−iθ/2 G)` with `G` the named Pauli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    X { qubit: usize },
    H { qubit: usize },
    S { qubit: usize },
    Sdg { qubit: usize },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    PauliRotation {
        #[serde(with = "pauli_serde")]
        pauli: PauliString,
        theta: f64,
    },
}

mod pauli_serde {
    use super::PauliString;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Masks {
        x: u64,
        z: u64,
    }

    pub fn serialize<S: Serializer>(p: &PauliString, s: S) -> Result<S::Ok, S::Error> {
        Masks { x: p.x, z: p.z }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PauliString, D::Error> {
        let m = Masks::deserialize(d)?;
        Ok(PauliString { x: m.x, z: m.z })
    }
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X { qubit }
            | Gate::H { qubit }
            | Gate::S { qubit }
            | Gate::Sdg { qubit }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::PauliRotation { pauli, .. } => {
                let mut s = pauli.support();
                let mut v = Vec::new();
                while s != 0 {
                    v.push(s.trailing_zeros() as usize);
                    s &= s - 1;
                }
                v
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::S { qubit } => Gate::Sdg { qubit },
            Gate::Sdg { qubit } => Gate::S { qubit },
            Gate::Ry { qubit, theta } => Gate::Ry { qubit, theta: -theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit, theta: -theta },
            Gate::PauliRotation { pauli, theta } => Gate::PauliRotation { pauli, theta: -theta },
            g => g,
        }
    }

    /// Rotation generator `G` of `exp(−iθ/2 G)`, if the gate is a rotation.
    pub fn generator(&self) -> Option<PauliString> {
        match *self {
            Gate::Ry { qubit, .. } => Some(PauliString::single(qubit, Pauli::Y)),
            Gate::Rz { qubit, .. } => Some(PauliString::single(qubit, Pauli::Z)),
            Gate::PauliRotation { pauli, .. } => Some(pauli),
            _ => None,
        }
    }

    /// Elementary gates executed in hardware-style decomposition; a Pauli
    /// rotation becomes basis changes, a CNOT ladder onto its highest qubit,
    /// one `Rz`, and the mirror image.
    pub fn decompose(&self) -> Vec<Gate> {
        let Gate::PauliRotation { pauli, theta } = *self else {
            return vec![self.clone()];
        };
        let qubits = self.qubits();
        let Some(&last) = qubits.last() else {
            return vec![];
        };
        let mut pre = Vec::new();
        for &q in &qubits {
            match pauli.get(q) {
                Pauli::X => pre.push(Gate::H { qubit: q }),
                Pauli::Y => {
                    pre.push(Gate::Sdg { qubit: q });
                    pre.push(Gate::H { qubit: q });
                }
                _ => {}
            }
        }
        let ladder: Vec<Gate> = qubits
            .windows(2)
            .map(|w| Gate::Cnot {
                control: w[0],
                target: w[1],
            })
            .collect();
        let mut out = pre.clone();
        out.extend(ladder.iter().cloned());
        out.push(Gate::Rz { qubit: last, theta });
        out.extend(ladder.iter().rev().cloned());
        out.extend(pre.iter().rev().map(Gate::inverse));
        out
    }
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::InvalidGate(format!("qubit {q} outside a {n}-qubit register")));
    }
    Ok(())
}

fn apply_1q(state: &mut StateVector, q: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    let body = |chunk: &mut [Complex64]| {
        for lo in 0..bit {
            let a0 = chunk[lo];
            let a1 = chunk[lo + bit];
            chunk[lo] = m[0][0] * a0 + m[0][1] * a1;
            chunk[lo + bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    };
    if state.amps.len() >= PARALLEL_DIM {
        state.amps.par_chunks_mut(2 * bit).for_each(body);
    } else {
        state.amps.chunks_mut(2 * bit).for_each(body);
    }
}

/// Applies `exp(−iθ/2 P)`.
fn apply_pauli_rotation(state: &mut StateVector, pauli: &PauliString, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let minus_i_s = Complex64::new(0.0, -s);
    let phase_y = match pauli.n_y() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let x = pauli.x as usize;
    let z = pauli.z as usize;
    let sign = |k: usize| if (k & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    if x == 0 {
        // diagonal: exp(−iθ/2 · (±1))
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        let f = |(k, a): (usize, &mut Complex64)| {
            *a *= if sign(k) > 0.0 { plus } else { minus };
        };
        if state.amps.len() >= PARALLEL_DIM {
            state.amps.par_iter_mut().enumerate().for_each(f);
        } else {
            state.amps.iter_mut().enumerate().for_each(f);
        }
        return;
    }
    let old = state.amps.clone();
    let f = |(k, a): (usize, &mut Complex64)| {
        let j = k ^ x;
        // (Pψ)[k] = i^{nY} (−1)^{|j&z|} ψ[j]
        let p_psi = phase_y * sign(j) * old[j];
        *a = old[k] * c + minus_i_s * p_psi;
    };
    if state.amps.len() >= PARALLEL_DIM {
        state.amps.par_iter_mut().enumerate().for_each(f);
    } else {
        state.amps.iter_mut().enumerate().for_each(f);
    }
}

pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    let n = state.n_qubits;
    for q in gate.qubits() {
        check_qubit(q, n)?;
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match *gate {
        Gate::X { qubit } => apply_1q(state, qubit, [[ZERO, one], [one, ZERO]]),
        Gate::H { qubit } => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            apply_1q(state, qubit, [[h, h], [h, -h]])
        }
        Gate::S { qubit } => apply_1q(state, qubit, [[one, ZERO], [ZERO, i]]),
        Gate::Sdg { qubit } => apply_1q(state, qubit, [[one, ZERO], [ZERO, -i]]),
        Gate::Ry { qubit, theta } => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
            apply_1q(state, qubit, [[c, -s], [s, c]])
        }
        Gate::Rz { qubit, theta } => {
            let e = Complex64::from_polar(1.0, theta / 2.0);
            apply_1q(state, qubit, [[e.conj(), ZERO], [ZERO, e]])
        }
        Gate::Cnot { control, target } => {
            if control == target {
                return Err(Error::InvalidGate("CNOT control equals target".into()));
            }
            let (cb, tb) = (1usize << control, 1usize << target);
            for k in 0..state.amps.len() {
                if k & cb != 0 && k & tb == 0 {
                    state.amps.swap(k, k | tb);
                }
            }
        }
        Gate::PauliRotation { ref pauli, theta } => {
            if pauli.support() >> n != 0 {
                return Err(Error::InvalidGate(format!(
                    "Pauli rotation on qubits outside a {n}-qubit register"
                )));
            }
            apply_pauli_rotation(state, pauli, theta)
        }
    }
    Ok(())
}

/// Applies a single Pauli string: `P|ψ⟩`.
pub fn apply_pauli_string(pauli: &PauliString, state: &StateVector) -> StateVector {
    let mut out = state.clone();
    let x = pauli.x as usize;
    let z = pauli.z as usize;
    let phase_y = match pauli.n_y() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    for (k, a) in out.amps.iter_mut().enumerate() {
        let j = k ^ x;
        let s = if (j & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        *a = phase_y * s * state.amps[j];
    }
    out
}

/// Pauli sum grouped by X mask so each group is one permutation of the state.
#[derive(Debug, Clone)]
pub struct CompiledPauliSum {
    n_qubits: usize,
    groups: Vec<(usize, Vec<(usize, Complex64)>)>,
}

impl CompiledPauliSum {
    pub fn new(sum: &PauliSum) -> Self {
        let mut groups: BTreeMap<u64, Vec<(usize, Complex64)>> = BTreeMap::new();
        for &(p, c) in &sum.terms {
            let phase = match p.n_y() % 4 {
                0 => Complex64::new(c, 0.0),
                1 => Complex64::new(0.0, c),
                2 => Complex64::new(-c, 0.0),
                _ => Complex64::new(0.0, -c),
            };
            groups.entry(p.x).or_default().push((p.z as usize, phase));
        }
        Self {
            n_qubits: sum.n_qubits,
            groups: groups.into_iter().map(|(x, v)| (x as usize, v)).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `out = H ψ`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let f = |(k, o): (usize, &mut Complex64)| {
            let mut acc = ZERO;
            for (x, zs) in &self.groups {
                let j = k ^ x;
                let mut coef = ZERO;
                for &(z, c) in zs {
                    if (j & z).count_ones() % 2 == 1 {
                        coef -= c;
                    } else {
                        coef += c;
                    }
                }
                acc += coef * psi[j];
            }
            *o = acc;
        };
        if psi.len() >= PARALLEL_DIM {
            out.par_iter_mut().enumerate().for_each(f);
        } else {
            out.iter_mut().enumerate().for_each(f);
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = vec![ZERO; state.amps.len()];
        self.apply_into(&state.amps, &mut out);
        StateVector {
            n_qubits: state.n_qubits,
            amps: out,
        }
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        state.inner(&self.apply(state)).re
    }
}

pub fn apply_pauli_sum(sum: &PauliSum, state: &StateVector) -> Result<StateVector> {
    if sum.n_qubits != state.n_qubits {
        return Err(Error::QubitMismatch {
            expected: state.n_qubits,
            found: sum.n_qubits,
        });
    }
    Ok(CompiledPauliSum::new(sum).apply(state))
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(sum: &PauliSum, state: &StateVector) -> Result<f64> {
    Ok(state.inner(&apply_pauli_sum(sum, state)?).re)
}

/// Dense matrix of a Pauli sum in the computational basis.
pub fn pauli_sum_matrix(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    if sum.n_qubits > 12 {
        return Err(Error::TooManyQubits {
            dim: sum.n_qubits,
            limit: 12,
        });
    }
    let dim = 1usize << sum.n_qubits;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for &(p, c) in &sum.terms {
        for col in 0..dim {
            let (ph, row) = p.apply_to_basis(col as u64);
            m[(row as usize, col)] += ph * c;
        }
    }
    Ok(m)
}
