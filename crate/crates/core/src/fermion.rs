//! Second-quantized electronic Hamiltonian over spin orbitals and a
//! determinant-space CI reference solver.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::activespace::ActiveIntegrals;
use crate::chemdata::MolecularIntegrals;
use crate::linalg::{dense_lowest_real, lanczos_lowest, LanczosOptions};
use crate::{Error, Result};

/// Coefficients below this magnitude are dropped when enumerating terms.
pub const TERM_CUTOFF: f64 = 1e-14;

/// `H = c + Σ t_pq a†_p a_q + Σ V_pqrs a†_p a†_q a_r a_s` with `V`
/// antisymmetric under `p↔q` and under `r↔s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    n_modes: usize,
    pub constant: f64,
    one_body: DMatrix<f64>,
    two_body: Vec<f64>,
}

impl FermionHamiltonian {
    pub fn zeros(n_modes: usize) -> Self {
        Self {
            n_modes,
            constant: 0.0,
            one_body: DMatrix::zeros(n_modes, n_modes),
            two_body: vec![0.0; n_modes.pow(4)],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n_modes + q) * self.n_modes + r) * self.n_modes + s
    }

    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[(p, q)]
    }

    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body[self.idx(p, q, r, s)]
    }

    /// `⟨pq||rs⟩` such that `H₂ = ¼ Σ ⟨pq||rs⟩ a†_p a†_q a_s a_r`.
    pub fn antisymmetrized(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        4.0 * self.two_body(p, q, s, r)
    }

    pub fn add_one_body(&mut self, p: usize, q: usize, value: f64) {
        self.one_body[(p, q)] += value;
    }

    /// Adds `value · a†_p a†_q a_r a_s`, stored in antisymmetrized form.
    pub fn add_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let v = value / 4.0;
        for (a, b, c, d, sign) in [
            (p, q, r, s, 1.0),
            (q, p, r, s, -1.0),
            (p, q, s, r, -1.0),
            (q, p, s, r, 1.0),
        ] {
            let k = self.idx(a, b, c, d);
            self.two_body[k] += sign * v;
        }
    }

    /// Non-negligible one-body terms `(p, q, t_pq)`.
    pub fn one_body_terms(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_modes;
        (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .map(|(p, q)| (p, q, self.one_body[(p, q)]))
            .filter(|t| t.2.abs() > TERM_CUTOFF)
            .collect()
    }

    /// Non-negligible two-body terms with `p < q`, `r < s`, coefficient `4V`,
    /// which together equal the full antisymmetric sum.
    pub fn two_body_terms_ordered(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let n = self.n_modes;
        let mut out = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                for r in 0..n {
                    for s in r + 1..n {
                        let v = 4.0 * self.two_body(p, q, r, s);
                        if v.abs() > TERM_CUTOFF {
                            out.push((p, q, r, s, v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Total number operator `Σ a†_p a_p`.
    pub fn number_operator(n_modes: usize) -> Self {
        Self::number_operator_over(n_modes, 0..n_modes)
    }

    pub fn number_operator_over(n_modes: usize, modes: impl IntoIterator<Item = usize>) -> Self {
        let mut h = Self::zeros(n_modes);
        for p in modes {
            h.add_one_body(p, p, 1.0);
        }
        h
    }

    /// Applies `H` to a determinant, returning `(determinant, amplitude)`
    /// pairs (duplicates not merged). Used as an independent check of the
    /// Slater–Condon rules.
    pub fn apply_to_determinant(&self, det: u64) -> Vec<(u64, f64)> {
        let n = self.n_modes;
        let mut out = vec![(det, self.constant)];
        for (p, q, t) in self.one_body_terms() {
            if let Some((d, s)) = ladder(det, &[(q, false), (p, true)]) {
                out.push((d, s * t));
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two_body(p, q, r, s);
                        if v.abs() <= TERM_CUTOFF {
                            continue;
                        }
                        if let Some((d, sg)) =
                            ladder(det, &[(s, false), (r, false), (q, true), (p, true)])
                        {
                            out.push((d, sg * v));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Applies ladder operators right-to-left as listed (first element acts
/// first). `true` is creation. Returns the new bitstring and its sign.
pub fn ladder(mut det: u64, ops: &[(usize, bool)]) -> Option<(u64, f64)> {
    let mut sign = 1.0;
    for &(p, create) in ops {
        let bit = 1u64 << p;
        if ((det & bit) != 0) == create {
            return None;
        }
        if (det & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        det ^= bit;
    }
    Some((det, sign))
}

/// Spin-orbital Hamiltonian from active-space integrals (block spin order).
pub fn build_fermion_hamiltonian(act: &ActiveIntegrals) -> FermionHamiltonian {
    build_from_integrals(&act.integrals)
}

pub fn build_from_integrals(ints: &MolecularIntegrals) -> FermionHamiltonian {
    let m = ints.n_orbitals();
    let n = 2 * m;
    let mut ham = FermionHamiltonian::zeros(n);
    ham.constant = ints.e_const();
    let h = ints.h_one();
    for sigma in [0, m] {
        for p in 0..m {
            for q in 0..m {
                ham.one_body[(p + sigma, q + sigma)] = h[(p, q)];
            }
        }
    }
    // V_pqrs = ¼(h_pqrs − h_qprs) with spin-orbital h_pqrs
    let spin_h = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        if (p < m) != (s < m) || (q < m) != (r < m) {
            0.0
        } else {
            ints.phys(p % m, q % m, r % m, s % m)
        }
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut row = vec![0.0; n * n * n];
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        row[(q * n + r) * n + s] = 0.25 * (spin_h(p, q, r, s) - spin_h(q, p, r, s));
                    }
                }
            }
            row
        })
        .collect();
    ham.two_body = rows.concat();
    ham
}

/// Determinants with fixed alpha and beta electron counts, as bitstrings
/// over `2m` block-ordered spin orbitals.
#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    pub n_orbitals: usize,
    pub dets: Vec<u64>,
    index: HashMap<u64, usize>,
}

fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        return vec![0];
    }
    // Gosper's hack
    let mut c: u64 = (1 << k) - 1;
    let limit = 1u64 << n;
    while c < limit {
        out.push(c);
        let u = c & c.wrapping_neg();
        let v = c + u;
        c = v + (((v ^ c) / u) >> 2);
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl DeterminantBasis {
    pub fn new(n_orbitals: usize, n_alpha: usize, n_beta: usize, limit: usize) -> Result<Self> {
        Self::restricted(n_orbitals, n_alpha, n_beta, 0, 0, limit)
    }

    /// Only determinants where every bit of `always` is set and every bit of
    /// `never` is clear.
    pub fn restricted(
        n_orbitals: usize,
        n_alpha: usize,
        n_beta: usize,
        always: u64,
        never: u64,
        limit: usize,
    ) -> Result<Self> {
        let m = n_orbitals;
        if 2 * m > 64 {
            return Err(Error::TooManyQubits { dim: 2 * m, limit: 64 });
        }
        let size = binomial(m, n_alpha) * binomial(m, n_beta);
        if size > limit {
            return Err(Error::BasisTooLarge { size, limit });
        }
        let alphas = combinations(m, n_alpha);
        let betas = combinations(m, n_beta);
        let dets: Vec<u64> = betas
            .iter()
            .flat_map(|&b| alphas.iter().map(move |&a| a | (b << m)))
            .filter(|d| d & always == always && d & never == 0)
            .collect();
        let index = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        Ok(Self {
            n_orbitals,
            dets,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn position(&self, det: u64) -> Option<usize> {
        self.index.get(&det).copied()
    }
}

fn bits(mut x: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(x.count_ones() as usize);
    while x != 0 {
        out.push(x.trailing_zeros() as usize);
        x &= x - 1;
    }
    out
}

/// Slater–Condon matrix elements of `H` between determinants connected to
/// `det` within `basis`, as `(column, value)` pairs.
fn slater_condon_row(ham: &FermionHamiltonian, basis: &DeterminantBasis, det: u64) -> Vec<(usize, f64)> {
    let n = ham.n_modes();
    let occ = bits(det);
    let vir: Vec<usize> = (0..n).filter(|p| det & (1 << p) == 0).collect();
    let mut row = Vec::new();

    let mut diag = ham.constant;
    for &i in &occ {
        diag += ham.one_body(i, i);
        for &j in &occ {
            diag += 0.5 * ham.antisymmetrized(i, j, i, j);
        }
    }
    row.push((basis.position(det).expect("det in basis"), diag));

    for &i in &occ {
        for &a in &vir {
            let Some((d, sign)) = ladder(det, &[(i, false), (a, true)]) else {
                continue;
            };
            let Some(col) = basis.position(d) else {
                continue;
            };
            let mut v = ham.one_body(a, i);
            for &j in &occ {
                v += ham.antisymmetrized(a, j, i, j);
            }
            if v != 0.0 {
                row.push((col, sign * v));
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in vir.iter().enumerate() {
                for &b in &vir[y + 1..] {
                    let Some((d, sign)) =
                        ladder(det, &[(i, false), (j, false), (b, true), (a, true)])
                    else {
                        continue;
                    };
                    let Some(col) = basis.position(d) else {
                        continue;
                    };
                    let v = ham.antisymmetrized(a, b, i, j);
                    if v != 0.0 {
                        row.push((col, sign * v));
                    }
                }
            }
        }
    }
    row
}

/// Sparse CI Hamiltonian rows over `basis`.
pub fn ci_matrix_rows(ham: &FermionHamiltonian, basis: &DeterminantBasis) -> Vec<Vec<(usize, f64)>> {
    basis
        .dets
        .par_iter()
        .map(|&d| slater_condon_row(ham, basis, d))
        .collect()
}

/// Largest determinant space handled with a dense eigensolver.
pub const DENSE_CI_LIMIT: usize = 2000;
/// Default cap on the determinant-space size.
pub const CI_BASIS_LIMIT: usize = 100_000;

/// Lowest eigenvalue of `ham` in the `(n_alpha, n_beta)` determinant space.
pub fn ci_ground_energy(ham: &FermionHamiltonian, basis: &DeterminantBasis) -> Result<f64> {
    if basis.is_empty() {
        return Err(Error::Dimension("empty determinant basis".into()));
    }
    let rows = ci_matrix_rows(ham, basis);
    let dim = basis.len();
    if dim <= DENSE_CI_LIMIT {
        let mut m = DMatrix::zeros(dim, dim);
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        return Ok(dense_lowest_real(&m).value);
    }
    let apply = |x: &[Complex64], y: &mut [Complex64]| {
        y.par_iter_mut().zip(&rows).for_each(|(yi, row)| {
            *yi = row.iter().map(|&(c, v)| x[c] * v).sum();
        });
    };
    Ok(lanczos_lowest(dim, apply, None, None, LanczosOptions::default())?.value)
}

/// Full-CI energy of the active space at its reference electron count.
pub fn ci_oracle(act: &ActiveIntegrals) -> Result<f64> {
    let ham = build_fermion_hamiltonian(act);
    let half = act.n_electrons() / 2;
    let basis = DeterminantBasis::new(act.n_orbitals(), half, half, CI_BASIS_LIMIT)?;
    ci_ground_energy(&ham, &basis)
}

/// Closed-shell MP2 correlation energy
/// `Σ (ia|jb)[2(ia|jb) − (ib|ja)] / (ε_i + ε_j − ε_a − ε_b)` over spatial MOs.
pub fn mp2_oracle(ints: &MolecularIntegrals) -> f64 {
    let occ = ints.occupied();
    let vir = ints.virtuals();
    let eps = ints.orbital_energies();
    let mut e = 0.0;
    for &i in &occ {
        for &j in &occ {
            for &a in &vir {
                for &b in &vir {
                    let iajb = ints.chem(i, a, j, b);
                    let ibja = ints.chem(i, b, j, a);
                    e += iajb * (2.0 * iajb - ibja) / (eps[i] + eps[j] - eps[a] - eps[b]);
                }
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemdata::ChemEri;

    fn random_ints(m: usize, n_e: usize, seed: u64) -> MolecularIntegrals {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut eri = ChemEri::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                for k in 0..m {
                    for l in 0..=k {
                        eri.set(i, j, k, l, rng.random_range(-0.1..0.1));
                    }
                }
            }
        }
        let h = DMatrix::from_fn(m, m, |p, q| ((p + q) as f64 * 0.37).sin() * 0.2 + if p == q { p as f64 * 0.5 - 1.0 } else { 0.0 });
        let h = DMatrix::from_fn(m, m, |p, q| if p <= q { h[(p, q)] } else { h[(q, p)] });
        let eps = (0..m).map(|p| p as f64 * 0.5 - 1.0).collect();
        MolecularIntegrals::new(n_e, h, eri, eps, 0.7).unwrap()
    }

    #[test]
    fn ladder_signs() {
        // a_1 |0b011> picks up the sign of mode 0
        assert_eq!(ladder(0b011, &[(1, false)]), Some((0b001, -1.0)));
        assert_eq!(ladder(0b011, &[(0, false)]), Some((0b010, 1.0)));
        assert_eq!(ladder(0b011, &[(0, true)]), None);
        // a†_2 a_0 |011> : a_0 -> +|010>, a†_2 past one electron -> −
        assert_eq!(ladder(0b011, &[(0, false), (2, true)]), Some((0b110, -1.0)));
    }

    #[test]
    fn add_two_body_is_antisymmetric() {
        let mut h = FermionHamiltonian::zeros(4);
        h.add_two_body(0, 1, 2, 3, 1.0);
        assert_eq!(h.two_body(0, 1, 2, 3), 0.25);
        assert_eq!(h.two_body(1, 0, 2, 3), -0.25);
        assert_eq!(h.two_body(0, 1, 3, 2), -0.25);
        assert_eq!(h.two_body(1, 0, 3, 2), 0.25);
        let terms = h.two_body_terms_ordered();
        assert_eq!(terms, vec![(0, 1, 2, 3, 1.0)]);
    }

    #[test]
    fn slater_condon_matches_direct_application() {
        let ints = random_ints(3, 2, 11);
        let ham = build_from_integrals(&ints);
        let basis = DeterminantBasis::new(3, 1, 1, CI_BASIS_LIMIT).unwrap();
        let rows = ci_matrix_rows(&ham, &basis);
        for (c, &det) in basis.dets.iter().enumerate() {
            let mut col = vec![0.0; basis.len()];
            for (d, v) in ham.apply_to_determinant(det) {
                col[basis.position(d).unwrap()] += v;
            }
            for (r, row) in rows.iter().enumerate() {
                let sc: f64 = row.iter().filter(|x| x.0 == c).map(|x| x.1).sum();
                assert!((sc - col[r]).abs() < 1e-12, "({r},{c}) {sc} vs {}", col[r]);
            }
        }
    }

    #[test]
    fn number_operator_counts_electrons() {
        let n = FermionHamiltonian::number_operator(6);
        let basis = DeterminantBasis::new(3, 2, 1, 100).unwrap();
        for &d in &basis.dets {
            let out = n.apply_to_determinant(d);
            let total: f64 = out.iter().filter(|x| x.0 == d).map(|x| x.1).sum();
            assert_eq!(total, 3.0);
        }
    }

    #[test]
    fn basis_sizes_and_limits() {
        assert_eq!(DeterminantBasis::new(6, 2, 2, 1000).unwrap().len(), 225);
        assert!(matches!(
            DeterminantBasis::new(10, 5, 5, 1000),
            Err(Error::BasisTooLarge { size: 63504, .. })
        ));
        let r = DeterminantBasis::restricted(3, 1, 1, 0b001_001, 0, 100).unwrap();
        assert_eq!(r.dets, vec![0b001_001]);
    }

    #[test]
    fn two_electron_ci_against_explicit_matrix() {
        // m = 2, one alpha and one beta electron: the singlet and triplet
        // (Sz=0) combinations decouple, the singlet block has the closed-
        // shell determinants and the open-shell singlet
        let ints = random_ints(2, 2, 5);
        let act = ActiveIntegrals::full(&ints).unwrap();
        let e = ci_oracle(&act).unwrap();
        let h = ints.h_one();
        let j = |p, q| ints.chem(p, p, q, q);
        let k = |p, q| ints.chem(p, q, q, p);
        let c = ints.e_const();
        let e00 = c + 2.0 * h[(0, 0)] + j(0, 0);
        let e11 = c + 2.0 * h[(1, 1)] + j(1, 1);
        let eos = c + h[(0, 0)] + h[(1, 1)] + j(0, 1) + k(0, 1);
        let t01 = std::f64::consts::SQRT_2 * (h[(0, 1)] + ints.chem(0, 1, 0, 0));
        let t11 = std::f64::consts::SQRT_2 * (h[(0, 1)] + ints.chem(0, 1, 1, 1));
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[e00, t01, k(0, 1), t01, eos, t11, k(0, 1), t11, e11],
        );
        let reference = dense_lowest_real(&m).value;
        assert!((e - reference).abs() < 1e-12, "{e} vs {reference}");
    }
}
