#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use aqvib::chemdata::{read_fcidump, ChemEri, MolecularIntegrals};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn load(rel: &str) -> MolecularIntegrals {
    read_fcidump(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[derive(Debug, Deserialize)]
pub struct Reference {
    pub e_fci: Option<f64>,
    pub e_hf: f64,
    pub e_mp2_corr: f64,
}

pub fn references() -> BTreeMap<String, Reference> {
    let text = std::fs::read_to_string(fixture("reference.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Random real integrals with the 8-fold symmetry, a well separated
/// occupied/virtual orbital energy gap, and a symmetric one-electron matrix.
pub fn random_integrals(m: usize, n_electrons: usize, seed: u64) -> MolecularIntegrals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eri = ChemEri::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            for k in 0..m {
                for l in 0..=k {
                    let v = if i == j && k == l {
                        rng.random_range(0.2..0.8)
                    } else {
                        rng.random_range(-0.1..0.1)
                    };
                    eri.set(i, j, k, l, v);
                }
            }
        }
    }
    let mut h = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..=p {
            let v = if p == q {
                -2.0 + p as f64 * 0.6 + rng.random_range(-0.1..0.1)
            } else {
                rng.random_range(-0.15..0.15)
            };
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let n_occ = n_electrons / 2;
    let eps: Vec<f64> = (0..m)
        .map(|p| {
            let base = if p < n_occ { -1.0 } else { 0.3 };
            base + 0.2 * p as f64 + rng.random_range(0.0..0.05)
        })
        .collect();
    let e_nuc = rng.random_range(0.0..2.0);
    MolecularIntegrals::new(n_electrons, h, eri, eps, e_nuc).unwrap()
}

/// Spatial-orbital closed-shell MP2, written directly from the chemists'
/// notation integrals: Σ (ia|jb)[2(ia|jb) − (ib|ja)] / (εi+εj−εa−εb).
pub fn closed_shell_mp2(ints: &MolecularIntegrals) -> f64 {
    let occ = ints.occupied();
    let vir = ints.virtuals();
    let e = ints.orbital_energies();
    let mut total = 0.0;
    for &i in &occ {
        for &j in &occ {
            for &a in &vir {
                for &b in &vir {
                    let iajb = ints.chem(i, a, j, b);
                    let ibja = ints.chem(i, b, j, a);
                    total += iajb * (2.0 * iajb - ibja) / (e[i] + e[j] - e[a] - e[b]);
                }
            }
        }
    }
    total
}

/// Eigenvalues of a Hermitian matrix, ascending, via nalgebra directly.
pub fn hermitian_spectrum(m: &DMatrix<num_complex::Complex64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigenvalues();
    let mut v: Vec<f64> = DVector::from(eig).iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Collects one line per criterion and reports the overall verdict.
#[derive(Default)]
pub struct Ledger {
    pub failures: Vec<String>,
    pub count: usize,
}

impl Ledger {
    pub fn record(&mut self, id: &str, title: &str, outcome: Result<String, String>) {
        self.count += 1;
        match outcome {
            Ok(detail) => println!("PASS  {id:<4} {title}: {detail}"),
            Err(detail) => {
                println!("FAIL  {id:<4} {title}: {detail}");
                self.failures.push(id.to_string());
            }
        }
    }
}
