//! Active-space selection from first-order pair energies, minimal-basis
//! imitation, and frozen-core folding.
//!
//! Spin orbitals are block ordered: alpha `p`, beta `p + m`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chemdata::MolecularIntegrals;
use crate::{Error, Result};

/// Orbital-energy denominators smaller than this are rejected.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEnergy {
    /// Occupied spin orbitals, `i < j`.
    pub i: usize,
    pub j: usize,
    pub energy: f64,
}

/// First-order pair energies `e_ij` over occupied spin-orbital pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergyTable {
    n_orbitals: usize,
    occupied: Vec<usize>,
    virtuals: Vec<usize>,
    pairs: Vec<PairEnergy>,
    /// Sum of individual `(i,j,a,b)` terms touching each virtual MO.
    virtual_terms: Vec<f64>,
    total: f64,
}

impl PairEnergyTable {
    pub fn pairs(&self) -> &[PairEnergy] {
        &self.pairs
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn virtuals(&self) -> &[usize] {
        &self.virtuals
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|p| p.i == i && p.j == j)
            .map(|p| p.energy)
    }
}

/// Spin-orbital `h_pqrs` with spin deltas `σp = σs`, `σq = σr`.
#[inline]
pub(crate) fn spin_phys(ints: &MolecularIntegrals, p: usize, q: usize, r: usize, s: usize) -> f64 {
    let m = ints.n_orbitals();
    if (p < m) != (s < m) || (q < m) != (r < m) {
        return 0.0;
    }
    ints.phys(p % m, q % m, r % m, s % m)
}

fn spin_orbitals(mos: &[usize], m: usize) -> Vec<usize> {
    let mut so: Vec<usize> = mos.iter().copied().chain(mos.iter().map(|p| p + m)).collect();
    so.sort_unstable();
    so
}

/// `e_ij = Σ_{a<b} (h_ijab − h_ijba)² / (ε_i + ε_j − ε_a − ε_b)` for every
/// occupied spin-orbital pair `i < j`, occupied MOs being the `N_e/2`
/// lowest in orbital energy.
pub fn iepa1_pair_energies(ints: &MolecularIntegrals) -> Result<PairEnergyTable> {
    let m = ints.n_orbitals();
    let occupied = ints.occupied();
    let virtuals = ints.virtuals();
    if virtuals.is_empty() {
        return Err(Error::Selection("no virtual orbitals".into()));
    }
    let eps = ints.orbital_energies();
    let occ_so = spin_orbitals(&occupied, m);
    let vir_so = spin_orbitals(&virtuals, m);

    let pair_list: Vec<(usize, usize)> = occ_so
        .iter()
        .enumerate()
        .flat_map(|(x, &i)| occ_so[x + 1..].iter().map(move |&j| (i, j)))
        .collect();

    let per_pair: Vec<(f64, Vec<f64>)> = pair_list
        .par_iter()
        .map(|&(i, j)| {
            let mut vterms = vec![0.0; m];
            let mut e = 0.0;
            for (y, &a) in vir_so.iter().enumerate() {
                for &b in &vir_so[y + 1..] {
                    let same_spin_ij = (i < m) == (j < m);
                    let allowed = if same_spin_ij {
                        (a < m) == (i < m) && (b < m) == (i < m)
                    } else {
                        (a < m) != (b < m)
                    };
                    if !allowed {
                        continue;
                    }
                    let denom = eps[i % m] + eps[j % m] - eps[a % m] - eps[b % m];
                    if denom.abs() < DEGENERATE_DENOMINATOR {
                        return Err(Error::DegenerateDenominator {
                            i,
                            j,
                            a,
                            b,
                            value: denom,
                        });
                    }
                    let num = spin_phys(ints, i, j, a, b) - spin_phys(ints, i, j, b, a);
                    let t = num * num / denom;
                    e += t;
                    vterms[a % m] += t;
                    if b % m != a % m {
                        vterms[b % m] += t;
                    }
                }
            }
            Ok((e, vterms))
        })
        .collect::<Result<_>>()?;

    let mut virtual_terms = vec![0.0; m];
    let mut pairs = Vec::with_capacity(pair_list.len());
    for (&(i, j), (e, vt)) in pair_list.iter().zip(per_pair) {
        pairs.push(PairEnergy { i, j, energy: e });
        for (acc, v) in virtual_terms.iter_mut().zip(vt) {
            *acc += v;
        }
    }
    let total = pairs.iter().map(|p| p.energy).sum();
    Ok(PairEnergyTable {
        n_orbitals: m,
        occupied,
        virtuals,
        pairs,
        virtual_terms,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalScore {
    pub mo: usize,
    pub occupied: bool,
    pub epsilon: f64,
    /// Pair-energy contribution in Hartree (non-positive for normal orderings).
    pub score: f64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalScores {
    pub entries: Vec<OrbitalScore>,
    pub total: f64,
}

impl OrbitalScores {
    /// Assembles scores directly; percentages are recomputed from `total`.
    pub fn from_entries(mut entries: Vec<OrbitalScore>, total: f64) -> Result<Self> {
        if total == 0.0 {
            return Err(Error::Selection(
                "total pair energy is zero; percentages undefined".into(),
            ));
        }
        entries.sort_by_key(|e| e.mo);
        for e in &mut entries {
            e.percent = e.score / total * 100.0;
        }
        Ok(Self { entries, total })
    }

    pub fn n_orbitals(&self) -> usize {
        self.entries.len()
    }

    pub fn n_electrons(&self) -> usize {
        2 * self.entries.iter().filter(|e| e.occupied).count()
    }

    /// Score report: `mo_index,occ_vir,epsilon,score_Ha,percent`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["mo_index", "occ_vir", "epsilon", "score_Ha", "percent"])?;
        for e in &self.entries {
            w.write_record([
                e.mo.to_string(),
                if e.occupied { "occ" } else { "vir" }.to_string(),
                format!("{:.12e}", e.epsilon),
                format!("{:.12e}", e.score),
                format!("{:.6}", e.percent),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// MO indices ranked by descending |score|, ties by lower index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<&OrbitalScore> = self.entries.iter().collect();
        idx.sort_by(|a, b| {
            b.score
                .abs()
                .total_cmp(&a.score.abs())
                .then(a.mo.cmp(&b.mo))
        });
        idx.into_iter().map(|e| e.mo).collect()
    }
}

/// Per-MO contributions: an occupied MO collects every pair touching one of
/// its spin orbitals (pairs internal to it once); a virtual MO collects every
/// individual excitation term whose `a` or `b` belongs to it.
pub fn score_orbitals(table: &PairEnergyTable, ints: &MolecularIntegrals) -> Result<OrbitalScores> {
    let m = table.n_orbitals;
    let occ: BTreeSet<usize> = table.occupied.iter().copied().collect();
    let entries = (0..m)
        .map(|k| {
            let score = if occ.contains(&k) {
                table
                    .pairs
                    .iter()
                    .filter(|p| p.i % m == k || p.j % m == k)
                    .map(|p| p.energy)
                    .sum()
            } else {
                table.virtual_terms[k]
            };
            OrbitalScore {
                mo: k,
                occupied: occ.contains(&k),
                epsilon: ints.orbital_energies()[k],
                score,
                percent: 0.0,
            }
        })
        .collect();
    OrbitalScores::from_entries(entries, table.total)
}

/// Chosen frozen / active / discarded partition of the MOs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSpaceSpec {
    pub n_orbitals: usize,
    /// Doubly occupied MOs folded into the core.
    pub frozen: Vec<usize>,
    /// Active MOs in ascending index order.
    pub active: Vec<usize>,
    /// Active MOs that are occupied in the reference determinant.
    pub active_occupied: Vec<usize>,
    pub discarded: Vec<usize>,
    pub n_active_electrons: usize,
}

impl ActiveSpaceSpec {
    /// Checks the partition invariants against a total orbital/electron count.
    pub fn new(
        n_orbitals: usize,
        n_electrons: usize,
        occupied: &[usize],
        frozen: Vec<usize>,
        active: Vec<usize>,
    ) -> Result<Self> {
        let mut frozen = frozen;
        let mut active = active;
        frozen.sort_unstable();
        active.sort_unstable();
        let occ: BTreeSet<usize> = occupied.iter().copied().collect();
        let f: BTreeSet<usize> = frozen.iter().copied().collect();
        let a: BTreeSet<usize> = active.iter().copied().collect();
        if f.len() != frozen.len() || a.len() != active.len() {
            return Err(Error::Selection("duplicate orbital indices".into()));
        }
        if let Some(&x) = f.iter().chain(&a).find(|&&x| x >= n_orbitals) {
            return Err(Error::IndexOutOfRange {
                index: x,
                n: n_orbitals,
            });
        }
        if let Some(x) = f.intersection(&a).next() {
            return Err(Error::Selection(format!(
                "MO {x} is both frozen and active"
            )));
        }
        if let Some(x) = f.difference(&occ).next() {
            return Err(Error::Selection(format!(
                "frozen MO {x} is not doubly occupied"
            )));
        }
        let active_occupied: Vec<usize> = active.iter().copied().filter(|x| occ.contains(x)).collect();
        if let Some(x) = occ.iter().find(|x| !f.contains(x) && !a.contains(x)) {
            return Err(Error::Selection(format!(
                "occupied MO {x} is neither frozen nor active"
            )));
        }
        let discarded = (0..n_orbitals)
            .filter(|x| !f.contains(x) && !a.contains(x))
            .collect();
        let n_active_electrons = n_electrons - 2 * frozen.len();
        debug_assert_eq!(n_active_electrons, 2 * active_occupied.len());
        Ok(Self {
            n_orbitals,
            frozen,
            active,
            active_occupied,
            discarded,
            n_active_electrons,
        })
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    /// `[n,m]`: active electrons and active MOs.
    pub fn label(&self) -> String {
        format!("[{},{}]", self.n_active_electrons, self.active.len())
    }

    /// Positions of the reference-occupied MOs within the active list.
    pub fn occupied_positions(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, mo)| self.active_occupied.contains(mo))
            .map(|(k, _)| k)
            .collect()
    }

    /// Qubits after parity mapping and two-qubit tapering.
    pub fn tapered_qubits(&self) -> usize {
        2 * self.active.len() - 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// The k highest-ranked MOs.
    TopK(usize),
    /// Every MO whose percentage is at least this value.
    Threshold(f64),
    /// Ranked MOs until their cumulative percentage reaches this value.
    Cumulative(f64),
}

/// Applies `policy` to the non-frozen MOs. Occupied MOs that are not selected
/// join the frozen core; unselected virtuals are discarded.
pub fn select_active_space(
    scores: &OrbitalScores,
    policy: SelectionPolicy,
    frozen: &[usize],
) -> Result<ActiveSpaceSpec> {
    let frozen_set: BTreeSet<usize> = frozen.iter().copied().collect();
    let ranked: Vec<&OrbitalScore> = scores
        .ranked()
        .into_iter()
        .filter(|mo| !frozen_set.contains(mo))
        .map(|mo| &scores.entries[scores.entries.iter().position(|e| e.mo == mo).unwrap()])
        .collect();

    let selected: Vec<usize> = match policy {
        SelectionPolicy::TopK(k) => ranked.iter().take(k).map(|e| e.mo).collect(),
        SelectionPolicy::Threshold(tau) => ranked
            .iter()
            .filter(|e| e.percent >= tau)
            .map(|e| e.mo)
            .collect(),
        SelectionPolicy::Cumulative(target) => {
            let mut acc = 0.0;
            let mut out = Vec::new();
            for e in &ranked {
                if acc >= target {
                    break;
                }
                acc += e.percent;
                out.push(e.mo);
            }
            out
        }
    };

    let occupied: Vec<usize> = scores
        .entries
        .iter()
        .filter(|e| e.occupied)
        .map(|e| e.mo)
        .collect();
    let n_occ_sel = selected.iter().filter(|mo| occupied.contains(mo)).count();
    if n_occ_sel == 0 {
        return Err(Error::Selection("policy selects no occupied MO".into()));
    }
    if n_occ_sel == selected.len() {
        return Err(Error::Selection("policy selects no virtual MO".into()));
    }
    let mut all_frozen: Vec<usize> = frozen.to_vec();
    all_frozen.extend(occupied.iter().filter(|mo| !selected.contains(mo) && !frozen_set.contains(mo)));
    ActiveSpaceSpec::new(
        scores.n_orbitals(),
        scores.n_electrons(),
        &occupied,
        all_frozen,
        selected,
    )
}

/// All non-frozen occupied MOs plus the lowest-energy virtuals, `target_count`
/// MOs in total.
pub fn select_minimal_basis(
    ints: &MolecularIntegrals,
    target_count: usize,
    frozen: &[usize],
) -> Result<ActiveSpaceSpec> {
    let m = ints.n_orbitals();
    let occupied = ints.occupied();
    let active_occ: Vec<usize> = occupied
        .iter()
        .copied()
        .filter(|x| !frozen.contains(x))
        .collect();
    if target_count <= active_occ.len() {
        return Err(Error::Selection(format!(
            "target {target_count} leaves no virtual MO ({} active occupied)",
            active_occ.len()
        )));
    }
    if target_count + frozen.len() > m {
        return Err(Error::Selection(format!(
            "target {target_count} plus {} frozen exceeds {m} MOs",
            frozen.len()
        )));
    }
    let virtuals: Vec<usize> = ints
        .energy_order()
        .into_iter()
        .filter(|x| !occupied.contains(x))
        .take(target_count - active_occ.len())
        .collect();
    let mut active = active_occ;
    active.extend(virtuals);
    ActiveSpaceSpec::new(m, ints.n_electrons(), &occupied, frozen.to_vec(), active)
}

/// Named frozen-core conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorePreset {
    /// Nothing frozen.
    None,
    /// Freeze the shells a valence pseudopotential removes: first-row p-block
    /// 1s, Na/Mg 1s, second-row p-block 1s2s2p, fourth-row p-block up to 3d.
    /// Li and Be keep their 1s.
    Pseudopotential,
}

impl CorePreset {
    /// `(frozen MOs, minimal-basis active MOs)` contributed by one atom.
    pub fn element_counts(self, symbol: &str) -> Result<(usize, usize)> {
        let (frozen, mb) = match symbol {
            "H" | "He" => (0, 1),
            "Li" | "Be" => (0, 5),
            "B" | "C" | "N" | "O" | "F" | "Ne" => (1, 4),
            "Na" | "Mg" => (1, 8),
            "Al" | "Si" | "P" | "S" | "Cl" | "Ar" => (5, 4),
            "Ga" | "Ge" | "As" | "Se" | "Br" | "Kr" => (14, 4),
            other => return Err(Error::UnknownElement(other.to_string())),
        };
        Ok(match self {
            CorePreset::Pseudopotential => (frozen, mb),
            CorePreset::None => (0, mb + frozen),
        })
    }

    pub fn frozen_count(self, elements: &[&str]) -> Result<usize> {
        elements
            .iter()
            .map(|e| self.element_counts(e).map(|c| c.0))
            .sum()
    }

    pub fn minimal_basis_count(self, elements: &[&str]) -> Result<usize> {
        elements
            .iter()
            .map(|e| self.element_counts(e).map(|c| c.1))
            .sum()
    }

    /// The lowest-energy MOs that the preset freezes.
    pub fn frozen_orbitals(self, ints: &MolecularIntegrals, elements: &[&str]) -> Result<Vec<usize>> {
        let n = self.frozen_count(elements)?;
        if 2 * n > ints.n_electrons() {
            return Err(Error::Selection(format!(
                "preset freezes {n} MOs but only {} are occupied",
                ints.n_electrons() / 2
            )));
        }
        let mut f = ints.energy_order()[..n].to_vec();
        f.sort_unstable();
        Ok(f)
    }
}

/// Integrals over the active MOs with the frozen core folded in.
///
/// `integrals.e_const()` holds the core energy (nuclear repulsion plus
/// frozen-orbital energy).
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveIntegrals {
    pub integrals: MolecularIntegrals,
    pub spec: ActiveSpaceSpec,
}

impl ActiveIntegrals {
    /// The whole orbital space, nothing frozen or discarded.
    pub fn full(ints: &MolecularIntegrals) -> Result<Self> {
        let spec = ActiveSpaceSpec::new(
            ints.n_orbitals(),
            ints.n_electrons(),
            &ints.occupied(),
            vec![],
            (0..ints.n_orbitals()).collect(),
        )?;
        Ok(Self {
            integrals: ints.clone(),
            spec,
        })
    }

    pub fn e_core(&self) -> f64 {
        self.integrals.e_const()
    }

    pub fn n_orbitals(&self) -> usize {
        self.integrals.n_orbitals()
    }

    pub fn n_electrons(&self) -> usize {
        self.integrals.n_electrons()
    }

    /// Active positions occupied in the reference determinant.
    pub fn occupied(&self) -> Vec<usize> {
        self.spec.occupied_positions()
    }
}

/// Folds the frozen MOs of `spec` into a constant and an effective one-body
/// operator over the active MOs.
pub fn fold_core(ints: &MolecularIntegrals, spec: &ActiveSpaceSpec) -> Result<ActiveIntegrals> {
    if spec.n_orbitals != ints.n_orbitals() {
        return Err(Error::Dimension(format!(
            "spec covers {} MOs, integrals have {}",
            spec.n_orbitals,
            ints.n_orbitals()
        )));
    }
    let checked = ActiveSpaceSpec::new(
        ints.n_orbitals(),
        ints.n_electrons(),
        &ints.occupied(),
        spec.frozen.clone(),
        spec.active.clone(),
    )?;
    let h = ints.h_one();
    let frozen = &checked.frozen;

    let mut e_core = ints.e_const();
    for &i in frozen {
        e_core += 2.0 * h[(i, i)];
        for &j in frozen {
            e_core += 2.0 * ints.chem(i, i, j, j) - ints.chem(i, j, j, i);
        }
    }

    let act = &checked.active;
    let h_eff = DMatrix::from_fn(act.len(), act.len(), |a, b| {
        let (p, q) = (act[a], act[b]);
        let mut v = h[(p, q)];
        for &i in frozen {
            v += 2.0 * ints.chem(p, q, i, i) - ints.chem(p, i, i, q);
        }
        v
    });
    // exact symmetry for the constructor check
    let h_eff = DMatrix::from_fn(act.len(), act.len(), |a, b| {
        if a <= b {
            h_eff[(a, b)]
        } else {
            h_eff[(b, a)]
        }
    });
    let eps = act.iter().map(|&p| ints.orbital_energies()[p]).collect();
    let mut folded = MolecularIntegrals::new(
        checked.n_active_electrons,
        h_eff,
        ints.eri().restrict(act),
        eps,
        e_core,
    )?;
    folded.label = ints.label.clone();
    folded.bond_length = ints.bond_length;
    Ok(ActiveIntegrals {
        integrals: folded,
        spec: checked,
    })
}

/// Energy of the reference determinant:
/// `e_core + Σ_occ 2h̃_ii + Σ_{i,j occ} [2(ii|jj) − (ij|ji)]`.
pub fn reference_energy(act: &ActiveIntegrals) -> f64 {
    let ints = &act.integrals;
    let occ = act.occupied();
    let mut e = ints.e_const();
    for &i in &occ {
        e += 2.0 * ints.h_one()[(i, i)];
        for &j in &occ {
            e += 2.0 * ints.chem(i, i, j, j) - ints.chem(i, j, j, i);
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemdata::ChemEri;

    fn toy(m: usize, n_e: usize, eps: Vec<f64>, eri: ChemEri) -> MolecularIntegrals {
        let h = DMatrix::from_fn(m, m, |p, q| if p == q { eps[p] } else { 0.01 });
        MolecularIntegrals::new(n_e, h, eri, eps, 0.5).unwrap()
    }

    #[test]
    fn zero_two_electron_gives_zero_pairs() {
        let ints = toy(2, 2, vec![-0.5, 0.3], ChemEri::zeros(2));
        let t = iepa1_pair_energies(&ints).unwrap();
        assert_eq!(t.pairs().len(), 1);
        assert_eq!(t.total(), 0.0);
        assert!(t.pairs().iter().all(|p| p.energy == 0.0));
        assert!(score_orbitals(&t, &ints).is_err());
    }

    #[test]
    fn same_spin_pairs_only_see_exchange_channel() {
        // (ia|jb)-type integrals only: (02|13) couples MO0,MO1 -> MO2,MO3
        let mut eri = ChemEri::zeros(4);
        eri.set(0, 2, 1, 3, 0.1);
        let ints = toy(4, 4, vec![-1.0, -0.8, 0.2, 0.4], eri);
        let t = iepa1_pair_energies(&ints).unwrap();
        let m = 4;
        // alpha-alpha pair (0α,1α): h_ijab - h_ijba with a=2α,b=3α
        // h_{0,1,2,3} = (03|12) = 0, h_{0,1,3,2} = (02|13) = 0.1
        let d = -1.0 - 0.8 - 0.2 - 0.4;
        let expect_same = 0.1f64.powi(2) / d;
        assert!((t.pair(0, 1).unwrap() - expect_same).abs() < 1e-15);
        assert!((t.pair(m, m + 1).unwrap() - expect_same).abs() < 1e-15);
        // opposite-spin pair (0α,1β): only (a,b) = (2α,3β) survives h_ijab=(03|12)=0 and
        // (a,b)=(3α,2β) has h_ijba... total from the one allowed ordering
        let os = t.pair(0, m + 1).unwrap();
        assert!((os - expect_same).abs() < 1e-15, "{os}");
        // pair internal to MO0 sees nothing: (0α,0β) -> needs (0a|0b)
        assert_eq!(t.pair(0, m).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let mut eri = ChemEri::zeros(2);
        eri.set(0, 1, 0, 1, 0.2);
        let ints = toy(2, 2, vec![0.1, 0.1], eri);
        match iepa1_pair_energies(&ints) {
            Err(Error::DegenerateDenominator { i, j, a, b, .. }) => {
                assert_eq!((i, j, a, b), (0, 2, 1, 3))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_occupied_one_virtual_score_full() {
        let mut eri = ChemEri::zeros(2);
        eri.set(0, 1, 0, 1, 0.18);
        eri.set(0, 0, 0, 0, 0.67);
        let ints = toy(2, 2, vec![-0.58, 0.67], eri);
        let t = iepa1_pair_energies(&ints).unwrap();
        let s = score_orbitals(&t, &ints).unwrap();
        for e in &s.entries {
            assert!((e.percent - 100.0).abs() < 1e-12);
        }
        let spec = select_active_space(&s, SelectionPolicy::TopK(2), &[]).unwrap();
        assert_eq!(spec.label(), "[2,2]");
        assert_eq!(spec.tapered_qubits(), 2);
        let csv = s.to_csv().unwrap();
        assert!(csv.starts_with("mo_index,occ_vir,epsilon,score_Ha,percent\n0,occ,"));
    }

    fn synthetic(percents: &[f64], n_occ: usize) -> OrbitalScores {
        let total = -1.0;
        let entries = percents
            .iter()
            .enumerate()
            .map(|(k, p)| OrbitalScore {
                mo: k,
                occupied: k < n_occ,
                epsilon: k as f64,
                score: -p / 100.0,
                percent: 0.0,
            })
            .collect();
        OrbitalScores::from_entries(entries, total).unwrap()
    }

    #[test]
    fn threshold_policy_filters() {
        let s = synthetic(&[40.0, 30.0, 20.0, 6.0, 4.0], 2);
        let spec = select_active_space(&s, SelectionPolicy::Threshold(5.0), &[]).unwrap();
        assert_eq!(spec.active, vec![0, 1, 2, 3]);
        assert_eq!(spec.discarded, vec![4]);
        assert_eq!(spec.label(), "[4,4]");
    }

    #[test]
    fn top_k_drops_occupied_into_core_and_breaks_ties_by_index() {
        let s = synthetic(&[10.0, 50.0, 30.0, 30.0, 5.0], 2);
        let spec = select_active_space(&s, SelectionPolicy::TopK(3), &[]).unwrap();
        assert_eq!(spec.active, vec![1, 2, 3]);
        assert_eq!(spec.frozen, vec![0]);
        assert_eq!(spec.label(), "[2,3]");
        let again = select_active_space(&s, SelectionPolicy::TopK(3), &[]).unwrap();
        assert_eq!(spec, again);

        let spec = select_active_space(&s, SelectionPolicy::Cumulative(85.0), &[]).unwrap();
        assert_eq!(spec.active, vec![1, 2, 3]);
        assert!(select_active_space(&s, SelectionPolicy::TopK(1), &[]).is_err());
        // with MO 1 frozen the next occupied MO must be reached by the ranking
        assert!(select_active_space(&s, SelectionPolicy::TopK(2), &[1]).is_err());
        let spec = select_active_space(&s, SelectionPolicy::TopK(3), &[1]).unwrap();
        assert_eq!(spec.active, vec![0, 2, 3]);
        assert_eq!(spec.frozen, vec![1]);
    }

    #[test]
    fn full_space_top_k() {
        let s = synthetic(&[40.0, 30.0, 20.0, 6.0, 4.0], 2);
        let spec = select_active_space(&s, SelectionPolicy::TopK(5), &[]).unwrap();
        assert_eq!(spec.label(), "[4,5]");
        assert!(spec.frozen.is_empty());
    }

    #[test]
    fn minimal_basis_picks_ascending_energy_virtuals() {
        let eps = vec![-2.0, -1.0, 0.9, 0.1, 0.5, 0.3];
        let ints = toy(6, 4, eps, ChemEri::zeros(6));
        let spec = select_minimal_basis(&ints, 4, &[]).unwrap();
        assert_eq!(spec.active, vec![0, 1, 3, 5]);
        let spec = select_minimal_basis(&ints, 4, &[0]).unwrap();
        assert_eq!(spec.active, vec![1, 3, 4, 5]);
        assert_eq!(spec.label(), "[2,4]");
        assert!(select_minimal_basis(&ints, 2, &[]).is_err());
        assert!(select_minimal_basis(&ints, 6, &[0]).is_err());
    }

    #[test]
    fn preset_counts() {
        let p = CorePreset::Pseudopotential;
        assert_eq!(p.frozen_count(&["Li", "F"]).unwrap(), 1);
        assert_eq!(p.minimal_basis_count(&["Li", "F"]).unwrap(), 9);
        assert_eq!(p.minimal_basis_count(&["Na", "F"]).unwrap(), 12);
        assert_eq!(p.minimal_basis_count(&["Al", "H"]).unwrap(), 5);
        assert_eq!(p.frozen_count(&["Ga", "H"]).unwrap(), 14);
        assert!(p.frozen_count(&["Xe"]).is_err());
        assert_eq!(CorePreset::None.frozen_count(&["F"]).unwrap(), 0);
    }

    #[test]
    fn fold_with_nothing_frozen_is_identity() {
        let mut eri = ChemEri::zeros(3);
        eri.set(0, 1, 2, 1, 0.05);
        eri.set(0, 0, 1, 1, 0.4);
        let ints = toy(3, 2, vec![-0.5, 0.2, 0.6], eri);
        let spec = ActiveSpaceSpec::new(3, 2, &[0], vec![], vec![0, 1, 2]).unwrap();
        let act = fold_core(&ints, &spec).unwrap();
        assert_eq!(act.integrals.h_one(), ints.h_one());
        assert_eq!(act.e_core(), ints.e_const());
        assert_eq!(act.integrals.eri(), ints.eri());
    }

    #[test]
    fn fold_single_frozen_without_two_electron_terms() {
        let ints = toy(3, 4, vec![-1.5, -0.5, 0.6], ChemEri::zeros(3));
        let spec = ActiveSpaceSpec::new(3, 4, &[0, 1], vec![0], vec![1, 2]).unwrap();
        let act = fold_core(&ints, &spec).unwrap();
        assert_eq!(act.e_core(), 0.5 + 2.0 * -1.5);
        assert_eq!(act.n_electrons(), 2);
        assert_eq!(act.spec.label(), "[2,2]");
    }

    #[test]
    fn fold_rejects_inconsistent_partitions() {
        let ints = toy(3, 2, vec![-1.5, -0.5, 0.6], ChemEri::zeros(3));
        assert!(ActiveSpaceSpec::new(3, 2, &[0], vec![0], vec![0, 1]).is_err());
        assert!(ActiveSpaceSpec::new(3, 2, &[0], vec![1], vec![0, 2]).is_err());
        let bad = ActiveSpaceSpec {
            n_orbitals: 3,
            frozen: vec![0],
            active: vec![0, 1],
            active_occupied: vec![0],
            discarded: vec![2],
            n_active_electrons: 0,
        };
        assert!(fold_core(&ints, &bad).is_err());
    }

    #[test]
    fn reference_energy_of_empty_hamiltonian_is_core() {
        let m = 2;
        let ints = MolecularIntegrals::new(
            2,
            DMatrix::zeros(m, m),
            ChemEri::zeros(m),
            vec![-1.0, 1.0],
            0.25,
        )
        .unwrap();
        let act = ActiveIntegrals::full(&ints).unwrap();
        assert_eq!(reference_energy(&act), 0.25);
    }
}
