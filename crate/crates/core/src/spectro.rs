//! Potential-energy-curve fitting, harmonic frequencies, Mayer bond orders
//! and benchmark error statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{AMU_KG, HARTREE_PER_ANGSTROM2_TO_SI, SPEED_OF_LIGHT_CM_S};
use crate::{Error, Result};

/// Grid spacing of the fit window in Angstrom.
pub const FIT_STEP: f64 = 0.01;
pub const FIT_STEP_TOL: f64 = 1e-6;
/// Curvatures at or below this (Ha/Å²) are treated as unbound.
pub const MIN_CURVATURE: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PecSample {
    pub r: f64,
    pub energy: f64,
    /// `ok`, or a short reason the point is suspect.
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialEnergyCurve {
    pub label: String,
    pub elements: Option<[String; 2]>,
    pub samples: Vec<PecSample>,
}

impl PotentialEnergyCurve {
    pub fn new(label: impl Into<String>, samples: Vec<PecSample>) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].r <= w[0].r) {
            return Err(Error::Fit("bond lengths must be strictly increasing".into()));
        }
        if samples.iter().any(|s| !s.r.is_finite() || !s.energy.is_finite()) {
            return Err(Error::Fit("non-finite sample".into()));
        }
        Ok(Self {
            label: label.into(),
            elements: None,
            samples,
        })
    }

    pub fn from_points(label: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            label,
            points
                .iter()
                .map(|&(r, energy)| PecSample {
                    r,
                    energy,
                    flag: "ok".into(),
                })
                .collect(),
        )
    }

    /// `r_angstrom,energy_hartree,flag` with full double precision.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r_angstrom", "energy_hartree", "flag"])?;
        for s in &self.samples {
            w.write_record([format!("{}", s.r), format!("{:.17e}", s.energy), s.flag.clone()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            r_angstrom: f64,
            energy_hartree: f64,
            #[serde(default)]
            flag: Option<String>,
        }
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            samples.push(PecSample {
                r: row.r_angstrom,
                energy: row.energy_hartree,
                flag: row.flag.unwrap_or_else(|| "ok".into()),
            });
        }
        Self::new(label, samples)
    }

    /// Index of the lowest energy; ties within 1e-12 Ha go to the shorter bond.
    pub fn minimum_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, s) in self.samples.iter().enumerate() {
            match best {
                Some(b) if s.energy >= self.samples[b].energy - TIE_TOL => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

/// Least-squares quadratic `E(r) = c2 r² + c1 r + c0` over five samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Center of the window; the fit is solved in `x = r − center`.
    pub center: f64,
    /// Coefficients in the centered variable: `a2 x² + a1 x + a0`.
    pub centered: [f64; 3],
    pub rms_residual: f64,
    pub window: Vec<f64>,
    pub bound: bool,
}

/// Fits the given samples (any count ≥ 3) without window checks.
pub fn fit_quadratic_points(rs: &[f64], es: &[f64]) -> Result<QuadraticFit> {
    if rs.len() != es.len() || rs.len() < 3 {
        return Err(Error::Fit("need at least three aligned samples".into()));
    }
    let n = rs.len();
    let center = rs[n / 2];
    let h = (rs[n - 1] - rs[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Fit("bond lengths must be increasing".into()));
    }
    // Solve in u = (r - center)/h so the design matrix is well conditioned.
    let e_ref = es[n / 2];
    let a = DMatrix::from_fn(n, 3, |i, j| ((rs[i] - center) / h).powi(2 - j as i32));
    let b = DVector::from_iterator(n, es.iter().map(|e| e - e_ref));
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &a * &sol - &b;
    let rms_residual = (resid.norm_squared() / n as f64).sqrt();
    let (a2, a1, a0) = (sol[0] / (h * h), sol[1] / h, sol[2] + e_ref);
    Ok(QuadraticFit {
        c2: a2,
        c1: a1 - 2.0 * a2 * center,
        c0: a0 - a1 * center + a2 * center * center,
        center,
        centered: [a2, a1, a0],
        rms_residual,
        window: rs.to_vec(),
        bound: a2 > MIN_CURVATURE,
    })
}

/// Five-point fit centered on the grid minimum, which needs two neighbors on
/// each side spaced by 0.01 Å.
pub fn fit_quadratic(pec: &PotentialEnergyCurve) -> Result<QuadraticFit> {
    let s = &pec.samples;
    let k = pec
        .minimum_index()
        .ok_or_else(|| Error::Fit("empty curve".into()))?;
    if k < 2 || k + 2 >= s.len() {
        return Err(Error::Fit(format!(
            "minimum at r = {} Å lacks two neighbors on each side",
            s[k].r
        )));
    }
    let window = &s[k - 2..=k + 2];
    for w in window.windows(2) {
        let step = w[1].r - w[0].r;
        if (step - FIT_STEP).abs() > FIT_STEP_TOL {
            return Err(Error::Fit(format!(
                "irregular spacing {step:.6} Å between {} and {}",
                w[0].r, w[1].r
            )));
        }
    }
    let rs: Vec<f64> = window.iter().map(|x| x.r).collect();
    let es: Vec<f64> = window.iter().map(|x| x.energy).collect();
    fit_quadratic_points(&rs, &es)
}

/// Vertex of the fitted parabola; must lie inside the window.
pub fn equilibrium_bond_length(fit: &QuadraticFit) -> Result<f64> {
    if !fit.bound {
        return Err(Error::Fit("non-positive curvature".into()));
    }
    let [a2, a1, _] = fit.centered;
    let r = fit.center - a1 / (2.0 * a2);
    let lo = fit.window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fit.window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if r < lo || r > hi {
        return Err(Error::Fit(format!(
            "vertex {r:.6} Å outside the window [{lo}, {hi}]"
        )));
    }
    Ok(r)
}

/// `ω̃ = √(k/μ) / (2πc)` in cm⁻¹ with `k = 2·c2`.
pub fn harmonic_frequency(fit: &QuadraticFit, reduced_mass_amu: f64) -> Result<f64> {
    if !fit.bound {
        return Err(Error::Fit("non-positive curvature".into()));
    }
    frequency_from_force_constant(2.0 * fit.c2, reduced_mass_amu)
}

/// Wavenumber for a force constant in Ha/Å² and a reduced mass in amu.
pub fn frequency_from_force_constant(k_hartree_per_a2: f64, reduced_mass_amu: f64) -> Result<f64> {
    if !(k_hartree_per_a2 > 0.0) || !(reduced_mass_amu > 0.0) {
        return Err(Error::Fit("force constant and reduced mass must be positive".into()));
    }
    let k_si = k_hartree_per_a2 * HARTREE_PER_ANGSTROM2_TO_SI;
    let mu = reduced_mass_amu * AMU_KG;
    Ok((k_si / mu).sqrt() / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_S))
}

/// `Σ_{μ∈A} Σ_{ν∈B} (DS)_{μν} (DS)_{νμ}` for the two atoms in `atom_of`.
pub fn mayer_bond_order(density: &DMatrix<f64>, overlap: &DMatrix<f64>, atom_of: &[usize]) -> Result<f64> {
    let n = density.nrows();
    if density.ncols() != n || overlap.nrows() != n || overlap.ncols() != n || atom_of.len() != n {
        return Err(Error::Dimension(format!(
            "density {}x{}, overlap {}x{}, {} atom labels",
            density.nrows(),
            density.ncols(),
            overlap.nrows(),
            overlap.ncols(),
            atom_of.len()
        )));
    }
    let atoms: BTreeSet<usize> = atom_of.iter().copied().collect();
    if atoms.len() != 2 {
        return Err(Error::Dimension(format!(
            "expected exactly two atoms, found {}",
            atoms.len()
        )));
    }
    let mut it = atoms.iter();
    let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
    let ds = density * overlap;
    let mut total = 0.0;
    for mu in (0..n).filter(|&i| atom_of[i] == a) {
        for nu in (0..n).filter(|&j| atom_of[j] == b) {
            total += ds[(mu, nu)] * ds[(nu, mu)];
        }
    }
    Ok(total)
}

/// Whitespace-separated square matrix, one row per line.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{v}'"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("matrix is not square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let p = path.as_ref();
    parse_matrix(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
}

/// One `atom_index [label]` line per basis function.
pub fn parse_atom_assignment(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let first = l.split_whitespace().next().unwrap_or_default();
            first
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad atom index '{first}'")))
        })
        .collect()
}

pub fn read_atom_assignment(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let p = path.as_ref();
    parse_atom_assignment(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub rmsd: f64,
    pub msd: f64,
    pub mad: f64,
    pub count: usize,
}

pub fn error_stats(calc: &[f64], expt: &[f64]) -> Result<ErrorStats> {
    if calc.len() != expt.len() || calc.is_empty() {
        return Err(Error::Dimension(format!(
            "{} calculated vs {} reference values",
            calc.len(),
            expt.len()
        )));
    }
    let n = calc.len() as f64;
    let d: Vec<f64> = calc.iter().zip(expt).map(|(c, e)| c - e).collect();
    Ok(ErrorStats {
        rmsd: (d.iter().map(|x| x * x).sum::<f64>() / n).sqrt(),
        msd: d.iter().sum::<f64>() / n,
        mad: d.iter().map(|x| x.abs()).sum::<f64>() / n,
        count: calc.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub molecule: String,
    pub active_space: String,
    pub freq_cm1: f64,
    pub expt_cm1: f64,
    pub error: f64,
}

/// Reads `molecule,active_space,freq_cm1` results.
pub fn parse_results_csv(text: &str) -> Result<Vec<(String, String, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        molecule: String,
        #[serde(default)]
        active_space: String,
        freq_cm1: f64,
    }
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map(|r: Row| (r.molecule, r.active_space, r.freq_cm1)).map_err(Error::from))
        .collect()
}

/// Reads `molecule,expt_cm1` references.
pub fn parse_reference_csv(text: &str) -> Result<BTreeMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        molecule: String,
        expt_cm1: f64,
    }
    let mut out = BTreeMap::new();
    for r in csv::Reader::from_reader(text.as_bytes()).deserialize() {
        let r: Row = r?;
        if out.insert(r.molecule.clone(), r.expt_cm1).is_some() {
            return Err(Error::Parse(format!("duplicate reference for {}", r.molecule)));
        }
    }
    Ok(out)
}

/// Joins results with references by molecule; every key must match.
pub fn join_benchmark(
    results: &[(String, String, f64)],
    reference: &BTreeMap<String, f64>,
) -> Result<Vec<BenchmarkRow>> {
    let missing: Vec<&str> = results
        .iter()
        .filter(|r| !reference.contains_key(&r.0))
        .map(|r| r.0.as_str())
        .collect();
    let have: BTreeSet<&str> = results.iter().map(|r| r.0.as_str()).collect();
    let unused: Vec<&str> = reference
        .keys()
        .map(String::as_str)
        .filter(|k| !have.contains(k))
        .collect();
    if !missing.is_empty() || !unused.is_empty() {
        return Err(Error::Parse(format!(
            "unmatched molecules: results only {missing:?}, reference only {unused:?}"
        )));
    }
    Ok(results
        .iter()
        .map(|(m, a, f)| {
            let e = reference[m];
            BenchmarkRow {
                molecule: m.clone(),
                active_space: a.clone(),
                freq_cm1: *f,
                expt_cm1: e,
                error: f - e,
            }
        })
        .collect())
}

pub fn benchmark_stats(rows: &[BenchmarkRow]) -> Result<ErrorStats> {
    let calc: Vec<f64> = rows.iter().map(|r| r.freq_cm1).collect();
    let expt: Vec<f64> = rows.iter().map(|r| r.expt_cm1).collect();
    error_stats(&calc, &expt)
}

/// `molecule,active_space,freq_cm1,expt_cm1,error`.
pub fn benchmark_csv(rows: &[BenchmarkRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
