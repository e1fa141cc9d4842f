//! Pauli-string algebra, Jordan–Wigner and parity mappings, and two-qubit
//! tapering of the parity encoding.
//!
//! Labels are written with qubit 0 as the rightmost character.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fermion::FermionHamiltonian;
use crate::{Error, Result};

/// Coefficients below this magnitude are removed by `simplify`.
pub const SIMPLIFY_TOL: f64 = 1e-12;
/// Largest tolerated imaginary part on a Hermitian operator's coefficients.
pub const IMAG_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis as `x`/`z` bitmasks; `Y` has both
/// bits set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: Self = Self { x: 0, z: 0 };

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self::IDENTITY.with(qubit, p)
    }

    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit
            }
            Pauli::Z => self.z |= bit,
        }
        self
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Returns `(k, R)` with `self · other = i^k R`.
    pub fn mul(&self, other: &Self) -> (u32, Self) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.n_y() + other.n_y() + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - (x & z).count_ones();
        (k % 4, Self { x, z })
    }

    pub fn commutes(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|k⟩ = phase · |k'⟩`.
    #[inline]
    pub fn apply_to_basis(&self, k: u64) -> (Complex64, u64) {
        let sign = if (k & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (i_pow(self.n_y()) * sign, k ^ self.x)
    }

    fn order_key(&self) -> u128 {
        // per qubit: I=0, X=1, Y=2, Z=3, most significant qubit first
        let lo = self.x ^ self.z;
        let hi = self.z;
        let mut key = 0u128;
        for q in 0..64 {
            key |= (((lo >> q) & 1) as u128) << (2 * q);
            key |= (((hi >> q) & 1) as u128) << (2 * q + 1);
        }
        key
    }

    /// Canonical order: compare from the highest qubit down, `I < X < Y < Z`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .rev()
            .map(|q| match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n > 64 {
            return Err(Error::Parse(format!("Pauli label longer than 64: {label}")));
        }
        let mut p = Self::IDENTITY;
        for (pos, c) in label.chars().enumerate() {
            let q = n - 1 - pos;
            let op = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli character '{other}'"))),
            };
            p = p.with(q, op);
        }
        Ok(p)
    }

    /// Deletes qubit `q`, shifting higher qubits down by one.
    fn remove_qubit(&self, q: usize) -> Self {
        let low = (1u64 << q) - 1;
        let squeeze = |v: u64| (v & low) | ((v >> 1) & !low);
        Self {
            x: squeeze(self.x),
            z: squeeze(self.z),
        }
    }
}

/// Hermitian operator `Σ c_k P_k` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<(PauliString, f64)>,
}

fn format_coefficient(c: f64) -> String {
    let s = format!("{:.12E}", c.abs());
    let (mant, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!(
        "{}{}E{}{:02}",
        if c.is_sign_negative() { '-' } else { '+' },
        mant,
        if exp < 0 { '-' } else { '+' },
        exp.abs()
    )
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(PauliString, f64)>) -> Self {
        let mut s = Self { n_qubits, terms };
        s.simplify();
        s
    }

    /// Merges duplicates, drops `|c| < 1e-12`, sorts canonically.
    pub fn simplify(&mut self) {
        let mut merged: HashMap<PauliString, f64> = HashMap::new();
        for &(p, c) in &self.terms {
            *merged.entry(p).or_insert(0.0) += c;
        }
        let mut terms: Vec<(PauliString, f64)> = merged
            .into_iter()
            .filter(|(_, c)| c.abs() >= SIMPLIFY_TOL)
            .collect();
        terms.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        self.terms = terms;
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.0.is_identity())
            .map(|t| t.1)
            .sum()
    }

    /// One term per line, `±c.ccccccccccccE±nn LABEL`, after a header line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n_qubits={}\n", self.n_qubits);
        for (p, c) in &self.terms {
            writeln!(out, "{} {}", format_coefficient(*c), p.label(self.n_qubits)).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("n_qubits=") {
                    n_qubits = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("line {}: bad n_qubits", lineno + 1)))?,
                    );
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(c), Some(label), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected '<coefficient> <label>'",
                    lineno + 1
                )));
            };
            let c: f64 = c
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient '{c}'", lineno + 1)))?;
            let n = label.chars().count();
            match n_qubits {
                Some(k) if k != n => {
                    return Err(Error::QubitMismatch {
                        expected: k,
                        found: n,
                    })
                }
                _ => n_qubits = Some(n),
            }
            terms.push((PauliString::from_label(label)?, c));
        }
        Ok(Self::from_terms(n_qubits.unwrap_or(0), terms))
    }

    pub fn to_complex(&self) -> ComplexPauliSum {
        let mut s = ComplexPauliSum::zero(self.n_qubits);
        for &(p, c) in &self.terms {
            s.add_term(p, Complex64::new(c, 0.0));
        }
        s
    }

    /// Largest absolute coefficient difference against another sum.
    pub fn max_difference(&self, other: &PauliSum) -> f64 {
        let mut d = self.to_complex();
        for &(p, c) in &other.terms {
            d.add_term(p, Complex64::new(-c, 0.0));
        }
        d.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `Σ c_k P_k` with complex coefficients, the intermediate of mappings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPauliSum {
    pub n_qubits: usize,
    pub terms: HashMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: HashMap::new(),
        }
    }

    pub fn scalar(n_qubits: usize, c: Complex64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::IDENTITY, c);
        s
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add(&mut self, other: &ComplexPauliSum) {
        for (&p, &c) in &other.terms {
            self.add_term(p, c);
        }
    }

    pub fn add_scaled(&mut self, other: &ComplexPauliSum, s: Complex64) {
        for (&p, &c) in &other.terms {
            self.add_term(p, c * s);
        }
    }

    pub fn mul(&self, other: &ComplexPauliSum) -> ComplexPauliSum {
        let mut out = ComplexPauliSum::zero(self.n_qubits.max(other.n_qubits));
        for (p, &a) in &self.terms {
            for (q, &b) in &other.terms {
                let (k, r) = p.mul(q);
                out.add_term(r, a * b * i_pow(k));
            }
        }
        out
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> ComplexPauliSum {
        ComplexPauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(&p, c)| (p, c.conj())).collect(),
        }
    }

    pub fn drop_small(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    /// Canonically sorted non-negligible terms.
    pub fn sorted_terms(&self) -> Vec<(PauliString, Complex64)> {
        let mut v: Vec<(PauliString, Complex64)> = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() >= SIMPLIFY_TOL)
            .map(|(&p, &c)| (p, c))
            .collect();
        v.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        v
    }

    /// Real part as a `PauliSum`; fails if any imaginary part exceeds `1e-10`.
    pub fn into_hermitian(self) -> Result<PauliSum> {
        let n = self.n_qubits;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (p, c) in self.sorted_terms() {
            if c.im.abs() > IMAG_TOL {
                return Err(Error::ImaginaryCoefficient {
                    term: p.label(n),
                    imag: c.im,
                });
            }
            terms.push((p, c.re));
        }
        Ok(PauliSum::from_terms(n, terms))
    }

    /// `i · Σ c_k P_k` → real `c_k`; fails if the operator is not anti-Hermitian.
    pub fn anti_hermitian_part(self) -> Result<Vec<(PauliString, f64)>> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        for (p, c) in self.sorted_terms() {
            if c.re.abs() > IMAG_TOL {
                return Err(Error::ImaginaryCoefficient {
                    term: p.label(n),
                    imag: c.re,
                });
            }
            out.push((p, c.im));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    JordanWigner,
    Parity,
}

impl std::str::FromStr for Mapping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "jw" | "jordanwigner" => Ok(Mapping::JordanWigner),
            "parity" => Ok(Mapping::Parity),
            _ => Err(Error::Parse(format!("unknown mapping '{s}'"))),
        }
    }
}

/// Pauli image of `a†_p` (`create`) or `a_p` over `n` modes.
pub fn ladder_operator(mapping: Mapping, n_modes: usize, mode: usize, create: bool) -> ComplexPauliSum {
    let half = Complex64::new(0.5, 0.0);
    let y_coef = if create { -I * 0.5 } else { I * 0.5 };
    let mut s = ComplexPauliSum::zero(n_modes);
    match mapping {
        Mapping::JordanWigner => {
            let lower = (1u64 << mode) - 1;
            let x_part = PauliString {
                x: 1 << mode,
                z: lower,
            };
            let y_part = PauliString {
                x: 1 << mode,
                z: lower | (1 << mode),
            };
            s.add_term(x_part, half);
            s.add_term(y_part, y_coef);
        }
        Mapping::Parity => {
            let upper = if mode + 1 >= 64 { 0 } else { !((1u64 << (mode + 1)) - 1) } & ((1u64 << n_modes) - 1);
            let below = if mode == 0 { 0 } else { 1u64 << (mode - 1) };
            let x_part = PauliString {
                x: upper | (1 << mode),
                z: below,
            };
            let y_part = PauliString {
                x: upper | (1 << mode),
                z: 1 << mode,
            };
            s.add_term(x_part, half);
            s.add_term(y_part, y_coef);
        }
    }
    s
}

/// Maps `coef · Π ops` (written left to right, `true` = creation).
pub fn map_ladder_product(
    mapping: Mapping,
    n_modes: usize,
    ops: &[(usize, bool)],
    coef: Complex64,
) -> ComplexPauliSum {
    let mut acc = ComplexPauliSum::scalar(n_modes, coef);
    for &(p, create) in ops {
        acc = acc.mul(&ladder_operator(mapping, n_modes, p, create));
    }
    acc
}

/// Qubit image of a fermionic Hamiltonian before any tapering.
pub fn map_fermion_hamiltonian(mapping: Mapping, ham: &FermionHamiltonian) -> Result<PauliSum> {
    let n = ham.n_modes();
    if n > 64 {
        return Err(Error::TooManyQubits { dim: n, limit: 64 });
    }
    let ladders: Vec<[ComplexPauliSum; 2]> = (0..n)
        .map(|p| {
            [
                ladder_operator(mapping, n, p, false),
                ladder_operator(mapping, n, p, true),
            ]
        })
        .collect();
    let op = |p: usize, create: bool| &ladders[p][create as usize];

    let mut total = ComplexPauliSum::scalar(n, Complex64::new(ham.constant, 0.0));
    for (p, q, t) in ham.one_body_terms() {
        total.add_scaled(&op(p, true).mul(op(q, false)), Complex64::new(t, 0.0));
    }
    let two = ham.two_body_terms_ordered();
    let mut by_pq: Vec<Vec<(usize, usize, usize, usize, f64)>> = vec![Vec::new(); n];
    for t in two {
        by_pq[t.0].push(t);
    }
    let partials: Vec<ComplexPauliSum> = by_pq
        .par_iter()
        .map(|terms| {
            let mut acc = ComplexPauliSum::zero(n);
            for &(p, q, r, s, v) in terms {
                let left = op(p, true).mul(op(q, true));
                let right = op(r, false).mul(op(s, false));
                acc.add_scaled(&left.mul(&right), Complex64::new(v, 0.0));
            }
            acc
        })
        .collect();
    for part in &partials {
        total.add(part);
    }
    total.into_hermitian()
}

/// Removal of the two qubits that store `N_alpha` and `N_e` parities in the
/// block-ordered parity encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaperingContext {
    pub n_orbitals: usize,
    pub n_alpha: usize,
    pub n_electrons: usize,
}

impl TaperingContext {
    pub fn new(n_orbitals: usize, n_alpha: usize, n_electrons: usize) -> Self {
        Self {
            n_orbitals,
            n_alpha,
            n_electrons,
        }
    }

    /// Removed qubit indices, ascending: `m − 1` and `2m − 1`.
    pub fn removed(&self) -> [usize; 2] {
        [self.n_orbitals - 1, 2 * self.n_orbitals - 1]
    }

    fn signs(&self) -> [f64; 2] {
        let s = |n: usize| if n % 2 == 0 { 1.0 } else { -1.0 };
        [s(self.n_alpha), s(self.n_electrons)]
    }

    pub fn taper(&self, op: &ComplexPauliSum) -> Result<ComplexPauliSum> {
        let n = 2 * self.n_orbitals;
        if op.n_qubits != n {
            return Err(Error::QubitMismatch {
                expected: n,
                found: op.n_qubits,
            });
        }
        let removed = self.removed();
        let signs = self.signs();
        let mut out = ComplexPauliSum::zero(n - 2);
        for (p, c) in op.sorted_terms() {
            let mut coef = c;
            for (&q, &s) in removed.iter().zip(&signs) {
                match p.get(q) {
                    Pauli::X | Pauli::Y => {
                        return Err(Error::Tapering(format!(
                            "term {} acts with X/Y on removed qubit {q}",
                            p.label(n)
                        )))
                    }
                    Pauli::Z => coef *= s,
                    Pauli::I => {}
                }
            }
            let reduced = p.remove_qubit(removed[1]).remove_qubit(removed[0]);
            out.add_term(reduced, coef);
        }
        Ok(out)
    }

    pub fn taper_hermitian(&self, op: &PauliSum) -> Result<PauliSum> {
        self.taper(&op.to_complex())?.into_hermitian()
    }
}

/// Parity mapping followed by removal of qubits `m − 1` and `2m − 1`.
pub fn taper_two_qubits(op: &PauliSum, ctx: &TaperingContext) -> Result<PauliSum> {
    ctx.taper_hermitian(op)
}

/// A fermion-to-qubit encoding, optionally tapered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitEncoding {
    pub mapping: Mapping,
    pub n_modes: usize,
    pub taper: Option<TaperingContext>,
}

impl QubitEncoding {
    pub fn jordan_wigner(n_modes: usize) -> Self {
        Self {
            mapping: Mapping::JordanWigner,
            n_modes,
            taper: None,
        }
    }

    pub fn parity(n_modes: usize) -> Self {
        Self {
            mapping: Mapping::Parity,
            n_modes,
            taper: None,
        }
    }

    /// Parity mapping tapered for `n_alpha` alpha and `n_electrons` total.
    pub fn tapered_parity(n_orbitals: usize, n_alpha: usize, n_electrons: usize) -> Self {
        Self {
            mapping: Mapping::Parity,
            n_modes: 2 * n_orbitals,
            taper: Some(TaperingContext::new(n_orbitals, n_alpha, n_electrons)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_modes - if self.taper.is_some() { 2 } else { 0 }
    }

    /// Qubit basis index of an occupation bitstring.
    pub fn encode(&self, occupation: u64) -> u64 {
        let full = match self.mapping {
            Mapping::JordanWigner => occupation,
            Mapping::Parity => {
                let mut out = 0;
                let mut parity = 0;
                for j in 0..self.n_modes {
                    parity ^= (occupation >> j) & 1;
                    out |= parity << j;
                }
                out
            }
        };
        match self.taper {
            None => full,
            Some(t) => {
                let [a, b] = t.removed();
                remove_bit(remove_bit(full, b), a)
            }
        }
    }

    /// Occupation bitstring of a qubit basis index; the tapered qubits are
    /// restored from the context's parities.
    pub fn decode(&self, index: u64) -> u64 {
        let full = match self.taper {
            None => index,
            Some(t) => {
                let [a, b] = t.removed();
                let with_a = insert_bit(index, a, (t.n_alpha % 2) as u64);
                insert_bit(with_a, b, (t.n_electrons % 2) as u64)
            }
        };
        match self.mapping {
            Mapping::JordanWigner => full,
            Mapping::Parity => {
                let mut out = 0;
                let mut prev = 0;
                for j in 0..self.n_modes {
                    let q = (full >> j) & 1;
                    out |= (q ^ prev) << j;
                    prev = q;
                }
                out
            }
        }
    }

    pub fn map_hamiltonian(&self, ham: &FermionHamiltonian) -> Result<PauliSum> {
        if ham.n_modes() != self.n_modes {
            return Err(Error::QubitMismatch {
                expected: self.n_modes,
                found: ham.n_modes(),
            });
        }
        let full = map_fermion_hamiltonian(self.mapping, ham)?;
        match &self.taper {
            None => Ok(full),
            Some(t) => taper_two_qubits(&full, t),
        }
    }

    /// Maps a sum of ladder-operator products, tapering if configured.
    pub fn map_products(&self, terms: &[(Complex64, Vec<(usize, bool)>)]) -> Result<ComplexPauliSum> {
        let mut acc = ComplexPauliSum::zero(self.n_modes);
        for (c, ops) in terms {
            acc.add(&map_ladder_product(self.mapping, self.n_modes, ops, *c));
        }
        acc.drop_small(SIMPLIFY_TOL);
        match &self.taper {
            None => Ok(acc),
            Some(t) => t.taper(&acc),
        }
    }
}

fn remove_bit(v: u64, q: usize) -> u64 {
    let low = (1u64 << q) - 1;
    (v & low) | ((v >> 1) & !low)
}

fn insert_bit(v: u64, q: usize, bit: u64) -> u64 {
    let low = (1u64 << q) - 1;
    (v & low) | (bit << q) | ((v & !low) << 1)
}

pub fn jordan_wigner(ham: &FermionHamiltonian) -> Result<PauliSum> {
    map_fermion_hamiltonian(Mapping::JordanWigner, ham)
}

pub fn parity_map(ham: &FermionHamiltonian) -> Result<PauliSum> {
    map_fermion_hamiltonian(Mapping::Parity, ham)
}
