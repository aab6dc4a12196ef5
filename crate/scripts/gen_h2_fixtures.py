"""Regenerate the H2 fixtures under crates/core/tests/fixtures.

Spin orbitals are interleaved (0a, 0b, 1a, 1b); STO-3G basis.
Writes, per bond length: a fermionic Hamiltonian text file, a low-rank
factor JSON, and a reference JSON with FCI and HF energies.
"""
import json
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, scf

OUT = sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures"


def spatial_integrals(bond):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond}", basis="sto-3g", unit="Angstrom")
    mf = scf.RHF(mol).run(verbose=0)
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])
    e_fci = fci.FCI(mf).kernel()[0]
    return mol.energy_nuc(), h1, eri, e_fci, mf.e_tot


def write_hamiltonian(path, bond, e_nuc, h1, eri):
    n = h1.shape[0]
    lines = [f"# H2 STO-3G, bond {bond} A, interleaved spin orbitals", f"{e_nuc:.16e}"]
    for p in range(n):
        for q in range(n):
            if abs(h1[p, q]) > 1e-12:
                for s in range(2):
                    lines.append(f"+{2*p+s} -{2*q+s} {h1[p, q]:.16e}")
    # 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    v = eri[p, q, r, s_]
                    if abs(v) < 1e-12:
                        continue
                    for a in range(2):
                        for b in range(2):
                            P, Q, R, S = 2*p+a, 2*q+a, 2*r+b, 2*s_+b
                            if P == R or Q == S:
                                continue
                            lines.append(f"+{P} +{R} -{S} -{Q} {0.5*v:.16e}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def spin_block(m):
    n = m.shape[0]
    out = np.zeros((2*n, 2*n))
    for s in range(2):
        out[s::2, s::2] = m
    return out


def write_low_rank(path, e_nuc, h1, eri):
    n = h1.shape[0]
    one_body = h1 - 0.5*np.einsum("pqqs->ps", eri)
    sup = eri.reshape(n*n, n*n)
    lam, vec = np.linalg.eigh(sup)
    factors = []
    for l in np.argsort(-lam):
        if lam[l] < 1e-12:
            continue
        t = spin_block(np.sqrt(lam[l]/2.0)*vec[:, l].reshape(n, n))
        eigs, basis = np.linalg.eigh(t)
        factors.append({"basis": basis.tolist(), "eigs": eigs.tolist()})
    doc = {"constant": e_nuc, "one_body": spin_block(one_body).tolist(), "factors": factors}
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)


def main():
    ref = {}
    for bond in ("0.7414", "2.0"):
        e_nuc, h1, eri, e_fci, e_hf = spatial_integrals(float(bond))
        write_hamiltonian(f"{OUT}/h2_{bond}.ham", bond, e_nuc, h1, eri)
        write_low_rank(f"{OUT}/h2_{bond}_lowrank.json", e_nuc, h1, eri)
        ref[bond] = {"fci_energy": e_fci, "hf_energy": e_hf}
    with open(f"{OUT}/h2_reference.json", "w") as f:
        json.dump(ref, f, indent=1)


if __name__ == "__main__":
    main()
