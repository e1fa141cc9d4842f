//! Molecular integral data, FCIDUMP interchange, geometry-scan manifests and
//! atomic masses.
//!
//! Two-electron integrals are stored in chemists' notation `(ij|kl)`. The
//! physicists'-style `h_pqrs = <pq|sr>` used by the second-quantized
//! Hamiltonian is only exposed through [`MolecularIntegrals::phys_integral`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Magnitudes below this are written as exact zeros.
pub const WRITE_ZERO_THRESHOLD: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Rank-4 two-electron tensor `(ij|kl)` over real orbitals.
///
/// Every write goes through [`ChemEri::set`], which fills all eight
/// permutational images, so the 8-fold symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemEri {
    n: usize,
    data: Vec<f64>,
}

impl ChemEri {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    /// Builds the tensor from a function and checks it is 8-fold symmetric.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut eri = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = eri.index(i, j, k, l);
                        eri.data[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        eri.check_symmetry()?;
        Ok(eri)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.index(i, j, k, l)]
    }

    /// Stores `value` at `(ij|kl)` and all of its symmetry images.
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        for (a, b, c, d) in Self::images(i, j, k, l) {
            let idx = self.index(a, b, c, d);
            self.data[idx] = value;
        }
    }

    /// The eight index permutations that share a value for real orbitals.
    pub fn images(
        i: usize,
        j: usize,
        k: usize,
        l: usize,
    ) -> [(usize, usize, usize, usize); 8] {
        [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ]
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        if !v.is_finite() {
                            return Err(Error::InvalidIntegrals(format!(
                                "non-finite two-electron integral ({i}{j}|{k}{l})"
                            )));
                        }
                        for (a, b, c, d) in Self::images(i, j, k, l) {
                            if (self.get(a, b, c, d) - v).abs() > SYMMETRY_TOL {
                                return Err(Error::InvalidIntegrals(format!(
                                    "(ij|kl) not 8-fold symmetric at ({i}{j}|{k}{l})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Restriction of the tensor to the listed orbitals, in the given order.
    pub fn restrict(&self, orbitals: &[usize]) -> Self {
        let n = orbitals.len();
        let mut out = Self::zeros(n);
        for (a, &i) in orbitals.iter().enumerate() {
            for (b, &j) in orbitals.iter().enumerate() {
                for (c, &k) in orbitals.iter().enumerate() {
                    for (d, &l) in orbitals.iter().enumerate() {
                        let idx = out.index(a, b, c, d);
                        out.data[idx] = self.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }
}

/// Spatial-orbital integrals for one closed-shell geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    n_electrons: usize,
    h_one: DMatrix<f64>,
    eri: ChemEri,
    orbital_energies: Vec<f64>,
    e_const: f64,
    pub label: String,
    pub bond_length: Option<f64>,
}

impl MolecularIntegrals {
    /// Validates and assembles an integral set.
    pub fn new(
        n_electrons: usize,
        h_one: DMatrix<f64>,
        eri: ChemEri,
        orbital_energies: Vec<f64>,
        e_const: f64,
    ) -> Result<Self> {
        let m = h_one.nrows();
        if h_one.ncols() != m || eri.n() != m || orbital_energies.len() != m {
            return Err(Error::InvalidIntegrals(format!(
                "inconsistent orbital counts: h {}x{}, eri {}, energies {}",
                h_one.nrows(),
                h_one.ncols(),
                eri.n(),
                orbital_energies.len()
            )));
        }
        if m == 0 {
            return Err(Error::InvalidIntegrals("no orbitals".into()));
        }
        for p in 0..m {
            for q in 0..p {
                if (h_one[(p, q)] - h_one[(q, p)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidIntegrals(format!(
                        "one-electron matrix not symmetric at ({p},{q})"
                    )));
                }
            }
        }
        if h_one.iter().any(|v| !v.is_finite()) || !e_const.is_finite() {
            return Err(Error::InvalidIntegrals("non-finite one-electron data".into()));
        }
        if orbital_energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidIntegrals("non-finite orbital energy".into()));
        }
        if n_electrons == 0 || n_electrons % 2 != 0 || n_electrons > 2 * m {
            return Err(Error::InvalidIntegrals(format!(
                "need an even electron count in (0, {}], got {n_electrons}",
                2 * m
            )));
        }
        Ok(Self {
            n_electrons,
            h_one,
            eri,
            orbital_energies,
            e_const,
            label: String::new(),
            bond_length: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_bond_length(mut self, r: f64) -> Self {
        self.bond_length = Some(r);
        self
    }

    pub fn n_orbitals(&self) -> usize {
        self.h_one.nrows()
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn h_one(&self) -> &DMatrix<f64> {
        &self.h_one
    }

    pub fn eri(&self) -> &ChemEri {
        &self.eri
    }

    pub fn orbital_energies(&self) -> &[f64] {
        &self.orbital_energies
    }

    pub fn e_const(&self) -> f64 {
        self.e_const
    }

    /// Chemists' `(ij|kl)`.
    #[inline]
    pub fn chem(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.eri.get(i, j, k, l)
    }

    /// `h_pqrs = <pq|sr> = (ps|qr)`, without bounds reporting.
    #[inline]
    pub fn phys(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri.get(p, s, q, r)
    }

    /// `h_pqrs = ∫ψp*(1)ψq*(2)ψr(2)ψs(1)/r12`, i.e. `(ps|qr)`.
    pub fn phys_integral(&self, p: usize, q: usize, r: usize, s: usize) -> Result<f64> {
        let n = self.n_orbitals();
        if let Some(&index) = [p, q, r, s].iter().find(|&&x| x >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(self.phys(p, q, r, s))
    }

    /// Orbital indices sorted by ascending orbital energy, ties by index.
    pub fn energy_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n_orbitals()).collect();
        idx.sort_by(|&a, &b| {
            self.orbital_energies[a]
                .total_cmp(&self.orbital_energies[b])
                .then(a.cmp(&b))
        });
        idx
    }

    /// The `N_e/2` lowest-energy MOs, in ascending index order.
    pub fn occupied(&self) -> Vec<usize> {
        let mut occ: Vec<usize> = self.energy_order()[..self.n_electrons / 2].to_vec();
        occ.sort_unstable();
        occ
    }

    /// MOs outside [`Self::occupied`], in ascending index order.
    pub fn virtuals(&self) -> Vec<usize> {
        let mut vir: Vec<usize> = self.energy_order()[self.n_electrons / 2..].to_vec();
        vir.sort_unstable();
        vir
    }
}

struct Header {
    norb: usize,
    nelec: usize,
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let body = text
        .trim()
        .trim_start_matches(|c| c == '&' || c == '$')
        .trim_start();
    let body = body
        .strip_prefix("FCI")
        .or_else(|| body.strip_prefix("fci"))
        .ok_or_else(|| Error::Fcidump {
            line,
            msg: "header must start with &FCI".into(),
        })?;
    let body = body
        .replace("&END", " ")
        .replace("$END", " ")
        .replace("&end", " ")
        .replace('/', " ");

    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for token in body.split(|c: char| c == ',' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        if let Some((key, value)) = token.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let entry = values.entry(key.clone()).or_default();
            if !value.trim().is_empty() {
                entry.push(value.trim().to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            values.get_mut(key).unwrap().push(token.to_string());
        } else {
            return Err(Error::Fcidump {
                line,
                msg: format!("unexpected header token '{token}'"),
            });
        }
    }

    let scalar = |key: &str| -> Result<Option<i64>> {
        match values.get(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => v[0].parse::<i64>().map(Some).map_err(|_| Error::Fcidump {
                line,
                msg: format!("{key} is not an integer: '{}'", v[0]),
            }),
            Some(_) => Err(Error::Fcidump {
                line,
                msg: format!("{key} must have exactly one value"),
            }),
        }
    };
    let norb = scalar("NORB")?.ok_or_else(|| Error::Fcidump {
        line,
        msg: "missing NORB".into(),
    })?;
    let nelec = scalar("NELEC")?.ok_or_else(|| Error::Fcidump {
        line,
        msg: "missing NELEC".into(),
    })?;
    let ms2 = scalar("MS2")?.unwrap_or(0);
    if ms2 != 0 {
        return Err(Error::Fcidump {
            line,
            msg: format!("MS2={ms2}; only closed-shell (MS2=0) input is supported"),
        });
    }
    if scalar("UHF")?.unwrap_or(0) != 0 {
        return Err(Error::Fcidump {
            line,
            msg: "unrestricted integrals are not supported".into(),
        });
    }
    if norb <= 0 || nelec < 0 {
        return Err(Error::Fcidump {
            line,
            msg: format!("invalid NORB={norb} NELEC={nelec}"),
        });
    }
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
    })
}

/// Parses FCIDUMP text. Indices are 1-based; `i j 0 0` is a one-electron
/// element, `i 0 0 0` an orbital energy and `0 0 0 0` the constant.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let mut lines = text.lines().enumerate().peekable();

    let mut header = String::new();
    let mut header_start = 1;
    let mut closed = false;
    while let Some((no, raw)) = lines.next() {
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if header.is_empty() {
            header_start = no + 1;
        }
        header.push(' ');
        header.push_str(l);
        let upper = l.to_ascii_uppercase();
        if upper.contains("&END") || upper.contains("$END") || upper == "/" || upper.ends_with(" /") {
            closed = true;
            break;
        }
    }
    if !closed {
        return Err(Error::Fcidump {
            line: header_start,
            msg: "unterminated header (expected &END or /)".into(),
        });
    }
    let Header { norb, nelec } = parse_header(&header, header_start)?;

    let mut h = DMatrix::zeros(norb, norb);
    let mut eri = ChemEri::zeros(norb);
    let mut eps = vec![0.0; norb];
    let mut e_const = 0.0;

    for (no, raw) in lines {
        let line = no + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Fcidump {
                line,
                msg: format!("expected 'value i j k l', got '{l}'"),
            });
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::Fcidump {
                line,
                msg: format!("bad value '{}'", fields[0]),
            })?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            let v: i64 = f.parse().map_err(|_| Error::Fcidump {
                line,
                msg: format!("bad index '{f}'"),
            })?;
            if v < 0 || v as usize > norb {
                return Err(Error::Fcidump {
                    line,
                    msg: format!("index {v} outside [0, {norb}]"),
                });
            }
            *slot = v as usize;
        }
        match idx {
            [0, 0, 0, 0] => e_const = value,
            [i, 0, 0, 0] => eps[i - 1] = value,
            [i, j, 0, 0] if j > 0 => {
                h[(i - 1, j - 1)] = value;
                h[(j - 1, i - 1)] = value;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                eri.set(i - 1, j - 1, k - 1, l - 1, value)
            }
            _ => {
                return Err(Error::Fcidump {
                    line,
                    msg: format!("invalid index pattern {idx:?}"),
                })
            }
        }
    }

    MolecularIntegrals::new(nelec, h, eri, eps, e_const)
}

fn push_entry(out: &mut String, value: f64, idx: [usize; 4]) {
    let _ = writeln!(
        out,
        "{:>24.16E} {:4} {:4} {:4} {:4}",
        value, idx[0], idx[1], idx[2], idx[3]
    );
}

/// Writes one representative per symmetry class; magnitudes below
/// [`WRITE_ZERO_THRESHOLD`] are omitted. The constant line is always present.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_orbitals();
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={},NELEC={},MS2=0,\n  ORBSYM={}\n  ISYM=1,\n &END",
        n,
        ints.n_electrons(),
        "1,".repeat(n)
    );
    let pair = |i: usize, j: usize| i * (i + 1) / 2 + j;
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if pair(k, l) > pair(i, j) {
                        continue;
                    }
                    let v = ints.chem(i, j, k, l);
                    if v.abs() >= WRITE_ZERO_THRESHOLD {
                        push_entry(&mut out, v, [i + 1, j + 1, k + 1, l + 1]);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h_one()[(i, j)];
            if v.abs() >= WRITE_ZERO_THRESHOLD {
                push_entry(&mut out, v, [i + 1, j + 1, 0, 0]);
            }
        }
    }
    for (i, &e) in ints.orbital_energies().iter().enumerate() {
        if e.abs() >= WRITE_ZERO_THRESHOLD {
            push_entry(&mut out, e, [i + 1, 0, 0, 0]);
        }
    }
    push_entry(&mut out, ints.e_const(), [0, 0, 0, 0]);
    out
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularIntegrals> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_fcidump(&text)?.with_label(path.display().to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Bond length in Angstrom.
    pub r: f64,
    pub fcidump: PathBuf,
}

/// A bond-length scan: `{elements:[A,B], expt_freq_cm1?:x, points:[{r, fcidump}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryScan {
    pub elements: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expt_freq_cm1: Option<f64>,
    pub points: Vec<ScanPoint>,
}

impl GeometryScan {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidScan("no points".into()));
        }
        for w in self.points.windows(2) {
            if !(w[1].r > w[0].r) {
                return Err(Error::InvalidScan(format!(
                    "bond lengths must be strictly increasing ({} then {})",
                    w[0].r, w[1].r
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scan: Self = serde_json::from_str(text)?;
        scan.validate()?;
        Ok(scan)
    }

    /// Loads a manifest; relative integral paths are resolved against the
    /// manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scan = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in &mut scan.points {
            if p.fcidump.is_relative() {
                p.fcidump = base.join(&p.fcidump);
            }
        }
        Ok(scan)
    }

    pub fn load_point(&self, index: usize) -> Result<MolecularIntegrals> {
        let p = &self.points[index];
        Ok(read_fcidump(&p.fcidump)?.with_bond_length(p.r))
    }
}

/// Element symbol to isotope mass (amu).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMassTable {
    masses: BTreeMap<String, f64>,
}

impl Default for AtomicMassTable {
    /// Most-abundant-isotope masses.
    fn default() -> Self {
        const MASSES: &[(&str, f64)] = &[
            ("H", 1.007_825_032_23),
            ("He", 4.002_603_254_13),
            ("Li", 7.016_003_436_6),
            ("Be", 9.012_183_065),
            ("B", 11.009_305_36),
            ("C", 12.0),
            ("N", 14.003_074_004_43),
            ("O", 15.994_914_619_57),
            ("F", 18.998_403_162_73),
            ("Ne", 19.992_440_176_2),
            ("Na", 22.989_769_282_0),
            ("Mg", 23.985_041_697),
            ("Al", 26.981_538_53),
            ("Si", 27.976_926_534_65),
            ("P", 30.973_761_998_42),
            ("S", 31.972_071_174_4),
            ("Cl", 34.968_852_682),
            ("Ar", 39.962_383_123_7),
            ("K", 38.963_706_486_4),
            ("Ca", 39.962_590_863),
            ("Ga", 68.925_573_5),
            ("Ge", 73.921_177_761),
            ("As", 74.921_594_57),
            ("Se", 79.916_521_8),
            ("Br", 78.918_337_6),
            ("Kr", 83.911_497_728_2),
        ];
        Self {
            masses: MASSES.iter().map(|&(s, m)| (s.to_string(), m)).collect(),
        }
    }
}

impl AtomicMassTable {
    pub fn empty() -> Self {
        Self {
            masses: BTreeMap::new(),
        }
    }

    /// Adds or replaces one entry.
    pub fn with_mass(mut self, symbol: impl Into<String>, mass: f64) -> Result<Self> {
        let symbol = symbol.into();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidIntegrals(format!(
                "mass of {symbol} must be positive, got {mass}"
            )));
        }
        self.masses.insert(symbol, mass);
        Ok(self)
    }

    /// Overrides entries of the default table from a JSON object `{"H": 2.014, ...}`.
    pub fn with_overrides_json(self, text: &str) -> Result<Self> {
        let overrides: BTreeMap<String, f64> = serde_json::from_str(text)?;
        overrides
            .into_iter()
            .try_fold(self, |t, (s, m)| t.with_mass(s, m))
    }

    pub fn mass(&self, symbol: &str) -> Result<f64> {
        self.masses
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownElement(symbol.to_string()))
    }
}

/// `m_A m_B / (m_A + m_B)` in amu.
pub fn reduced_mass(a: &str, b: &str, table: &AtomicMassTable) -> Result<f64> {
    let ma = table.mass(a)?;
    let mb = table.mass(b)?;
    Ok(ma * mb / (ma + mb))
}
