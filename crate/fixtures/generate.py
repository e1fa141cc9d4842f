"""Regenerate the shipped test fixtures.

Requires pyscf. Run from this directory: python3 generate.py
"""
import json
import os

import numpy as np
from pyscf import ao2mo, dft, fci, gto, mp, scf

HERE = os.path.dirname(os.path.abspath(__file__))


def write_fcidump(path, h1, eri, nelec, ecore, eps):
    n = h1.shape[0]
    eri = ao2mo.restore(1, eri, n)
    with open(path, "w") as f:
        f.write(f" &FCI NORB={n},NELEC={nelec},MS2=0,\n")
        f.write("  ORBSYM=" + "1," * n + "\n  ISYM=1,\n &END\n")
        for i in range(n):
            for j in range(i + 1):
                for k in range(n):
                    for l in range(k + 1):
                        if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                            continue
                        v = eri[i, j, k, l]
                        if abs(v) > 1e-14:
                            f.write(f"{v: .16E} {i+1:4d} {j+1:4d} {k+1:4d} {l+1:4d}\n")
        for i in range(n):
            for j in range(i + 1):
                if abs(h1[i, j]) > 1e-14:
                    f.write(f"{h1[i, j]: .16E} {i+1:4d} {j+1:4d}    0    0\n")
        for i in range(n):
            f.write(f"{eps[i]: .16E} {i+1:4d}    0    0    0\n")
        f.write(f"{ecore: .16E}    0    0    0    0\n")


def rhf_fixture(atom, basis, path):
    mol = gto.M(atom=atom, basis=basis, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-13
    mf.kernel()
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.kernel(mol, c)
    write_fcidump(path, h1, eri, mol.nelectron, mol.energy_nuc(), mf.mo_energy)
    e_mp2 = mp.MP2(mf).kernel()[0]
    e_fci = fci.FCI(mf).kernel()[0] if c.shape[1] <= 10 else None
    return {"e_hf": mf.e_tot, "e_mp2_corr": e_mp2, "e_fci": e_fci}


def mayer_fixture(mol, dm, stem):
    s = mol.intor("int1e_ovlp")
    np.savetxt(os.path.join(HERE, "mayer", stem + "_density.txt"), dm, fmt="%.16e")
    np.savetxt(os.path.join(HERE, "mayer", stem + "_overlap.txt"), s, fmt="%.16e")
    with open(os.path.join(HERE, "mayer", stem + "_atoms.txt"), "w") as f:
        for lab in mol.ao_labels(fmt=False):
            f.write(f"{lab[0]} {lab[1]}\n")



def main():
    refs = {}
    os.makedirs(os.path.join(HERE, "h2_scan"), exist_ok=True)
    points = []
    for i in range(9):
        r = 0.70 + 0.01 * i
        name = f"h2_r{r:.2f}.fcidump"
        refs["h2_scan/" + name] = rhf_fixture(
            f"H 0 0 0; H 0 0 {r:.2f}", "sto-3g", os.path.join(HERE, "h2_scan", name)
        )
        points.append({"r": round(r, 2), "fcidump": name})
    with open(os.path.join(HERE, "h2_scan", "scan.json"), "w") as f:
        json.dump({"elements": ["H", "H"], "expt_freq_cm1": 4401.21, "points": points}, f, indent=2)

    singles = {
        "h2_sto3g_0.7414.fcidump": "H 0 0 0; H 0 0 0.7414",
        "lih_sto3g_1.60.fcidump": "Li 0 0 0; H 0 0 1.60",
        "n2_sto3g_1.10.fcidump": "N 0 0 0; N 0 0 1.10",
        "lif_sto3g_1.56.fcidump": "Li 0 0 0; F 0 0 1.56",
    }
    for name, atom in singles.items():
        refs[name] = rhf_fixture(atom, "sto-3g", os.path.join(HERE, name))

    with open(os.path.join(HERE, "reference.json"), "w") as f:
        json.dump(refs, f, indent=2, sort_keys=True)

    os.makedirs(os.path.join(HERE, "mayer"), exist_ok=True)
    mol = gto.M(atom="H 0 0 0; H 0 0 0.74", basis="sto-3g", verbose=0)
    mf = scf.RHF(mol)
    mf.kernel()
    mayer_fixture(mol, mf.make_rdm1(), "h2_rhf_sto3g")
    # PBE0/cc-pVDZ equilibrium bond length
    mol = gto.M(atom="C 0 0 0; O 0 0 1.1321", basis="cc-pvdz", verbose=0)
    mf = dft.RKS(mol)
    mf.xc = "pbe0"
    mf.conv_tol = 1e-11
    mf.kernel()
    mayer_fixture(mol, mf.make_rdm1(), "co_pbe0_ccpvdz")



if __name__ == "__main__":
    main()
