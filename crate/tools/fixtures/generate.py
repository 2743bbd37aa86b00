#!/usr/bin/env python3
"""Generate molecular FCIDUMP fixtures with reference energies.

Self-contained STO-3G integral pipeline (McMurchie-Davidson scheme), RHF,
and full CI in a fixed (N_up, N_dn) sector. The FCI code is validated
against a brute-force second-quantized builder on small systems before the
fixtures are written, and the resulting reference energies are stored in
reference.json next to the FCIDUMP files.

Outputs (relative to --out):
  h4_sto3g/h4_a<scaled>.fcidump   H4 square, side length a in Angstrom
  ozone_cas_12e9o.fcidump         ozone (12e, 9o) active space, STO-3G RHF orbitals
  reference.json                  RHF/FCI energies per fixture
"""

import argparse
import itertools
import json
import math
import os

import numpy as np
from scipy.special import gammainc, gamma as gamma_fn
import scipy.sparse as sp
import scipy.sparse.linalg as spla

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# ---------------------------------------------------------------------------
# STO-3G basis data (exponents, contraction coefficients for normalized
# primitives).
# ---------------------------------------------------------------------------

STO3G = {
    "H": [
        ("s", [3.42525091, 0.62391373, 0.16885540],
              [0.15432897, 0.53532814, 0.44463454]),
    ],
    "O": [
        ("s", [130.70932, 23.808861, 6.4436083],
              [0.15432897, 0.53532814, 0.44463454]),
        ("s", [5.0331513, 1.1695961, 0.38038896],
              [-0.09996723, 0.39951283, 0.70011547]),
        ("p", [5.0331513, 1.1695961, 0.38038896],
              [0.15591627, 0.60768372, 0.39195739]),
    ],
}

CHARGE = {"H": 1.0, "O": 8.0}

ANGMOM = {"s": [(0, 0, 0)], "p": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


def double_factorial(n):
    if n <= 0:
        return 1.0
    r = 1.0
    while n > 1:
        r *= n
        n -= 2
    return r


class Primitive:
    __slots__ = ("alpha", "coef", "lmn", "center")

    def __init__(self, alpha, coef, lmn, center):
        self.alpha = alpha
        self.coef = coef
        self.lmn = lmn
        self.center = center


def primitive_norm(alpha, lmn):
    l, m, n = lmn
    num = (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** ((l + m + n) / 2.0)
    den = math.sqrt(double_factorial(2 * l - 1)
                    * double_factorial(2 * m - 1)
                    * double_factorial(2 * n - 1))
    return num / den


def build_basis(atoms):
    """atoms: list of (symbol, xyz_bohr). Returns list of contracted functions,
    each a list of Primitive with normalized contraction."""
    funcs = []
    for sym, center in atoms:
        for shell, exps, coefs in STO3G[sym]:
            for lmn in ANGMOM[shell]:
                prims = [Primitive(a, c * primitive_norm(a, lmn), lmn, center)
                         for a, c in zip(exps, coefs)]
                funcs.append(prims)
    return funcs


# ---------------------------------------------------------------------------
# McMurchie-Davidson integrals.
# ---------------------------------------------------------------------------

def hermite_e(i, j, t, qx, a, b):
    """Hermite Gaussian expansion coefficient E_t^{ij} (1D)."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - q * qx / a * hermite_e(i - 1, j, t, qx, a, b)
                + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b))
    return (hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + q * qx / b * hermite_e(i, j - 1, t, qx, a, b)
            + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b))


def boys(n, t):
    if t < 1e-12:
        return 1.0 / (2 * n + 1)
    return gammainc(n + 0.5, t) * gamma_fn(n + 0.5) / (2.0 * t ** (n + 0.5))


def hermite_r(t, u, v, n, p, pc, dist2, cache):
    key = (t, u, v, n)
    if key in cache:
        return cache[key]
    if t == u == v == 0:
        val = (-2.0 * p) ** n * boys(n, p * dist2)
    elif t > 0:
        val = ((t - 1) * hermite_r(t - 2, u, v, n + 1, p, pc, dist2, cache) if t > 1 else 0.0) \
            + pc[0] * hermite_r(t - 1, u, v, n + 1, p, pc, dist2, cache)
    elif u > 0:
        val = ((u - 1) * hermite_r(t, u - 2, v, n + 1, p, pc, dist2, cache) if u > 1 else 0.0) \
            + pc[1] * hermite_r(t, u - 1, v, n + 1, p, pc, dist2, cache)
    else:
        val = ((v - 1) * hermite_r(t, u, v - 2, n + 1, p, pc, dist2, cache) if v > 1 else 0.0) \
            + pc[2] * hermite_r(t, u, v - 1, n + 1, p, pc, dist2, cache)
    cache[key] = val
    return val


def overlap_prim(pa, pb):
    a, b = pa.alpha, pb.alpha
    p = a + b
    s = 1.0
    for d in range(3):
        s *= hermite_e(pa.lmn[d], pb.lmn[d], 0, pa.center[d] - pb.center[d], a, b)
    return s * (math.pi / p) ** 1.5


def kinetic_prim(pa, pb):
    a, b = pa.alpha, pb.alpha
    p = a + b
    pref = (math.pi / p) ** 1.5

    def s1d(i, j, d):
        return hermite_e(i, j, 0, pa.center[d] - pb.center[d], a, b)

    def t1d(i, j, d):
        term = b * (2 * j + 1) * s1d(i, j, d)
        term -= 2.0 * b * b * s1d(i, j + 2, d)
        if j >= 2:
            term -= 0.5 * j * (j - 1) * s1d(i, j - 2, d)
        return term

    la, lb = pa.lmn, pb.lmn
    tx = t1d(la[0], lb[0], 0) * s1d(la[1], lb[1], 1) * s1d(la[2], lb[2], 2)
    ty = s1d(la[0], lb[0], 0) * t1d(la[1], lb[1], 1) * s1d(la[2], lb[2], 2)
    tz = s1d(la[0], lb[0], 0) * s1d(la[1], lb[1], 1) * t1d(la[2], lb[2], 2)
    return (tx + ty + tz) * pref


def nuclear_prim(pa, pb, atoms):
    a, b = pa.alpha, pb.alpha
    p = a + b
    pcenter = (a * np.asarray(pa.center) + b * np.asarray(pb.center)) / p
    la, lb = pa.lmn, pb.lmn
    qx = [pa.center[d] - pb.center[d] for d in range(3)]
    etab = [[hermite_e(la[d], lb[d], t, qx[d], a, b)
             for t in range(la[d] + lb[d] + 1)] for d in range(3)]
    val = 0.0
    for sym, center in atoms:
        pc = pcenter - np.asarray(center)
        dist2 = float(pc @ pc)
        cache = {}
        acc = 0.0
        for t in range(la[0] + lb[0] + 1):
            for u in range(la[1] + lb[1] + 1):
                for v in range(la[2] + lb[2] + 1):
                    acc += (etab[0][t] * etab[1][u] * etab[2][v]
                            * hermite_r(t, u, v, 0, p, pc, dist2, cache))
        val -= CHARGE[sym] * 2.0 * math.pi / p * acc
    return val


def eri_prim(pa, pb, pc, pd):
    a, b, c, d = pa.alpha, pb.alpha, pc.alpha, pd.alpha
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    pcen = (a * np.asarray(pa.center) + b * np.asarray(pb.center)) / p
    qcen = (c * np.asarray(pc.center) + d * np.asarray(pd.center)) / q
    pq = pcen - qcen
    dist2 = float(pq @ pq)
    la, lb, lc, ld = pa.lmn, pb.lmn, pc.lmn, pd.lmn
    eab = [[hermite_e(la[dd], lb[dd], t, pa.center[dd] - pb.center[dd], a, b)
            for t in range(la[dd] + lb[dd] + 1)] for dd in range(3)]
    ecd = [[hermite_e(lc[dd], ld[dd], t, pc.center[dd] - pd.center[dd], c, d)
            for t in range(lc[dd] + ld[dd] + 1)] for dd in range(3)]
    cache = {}
    val = 0.0
    for t in range(la[0] + lb[0] + 1):
        for u in range(la[1] + lb[1] + 1):
            for v in range(la[2] + lb[2] + 1):
                e1 = eab[0][t] * eab[1][u] * eab[2][v]
                if e1 == 0.0:
                    continue
                for tt in range(lc[0] + ld[0] + 1):
                    for uu in range(lc[1] + ld[1] + 1):
                        for vv in range(lc[2] + ld[2] + 1):
                            e2 = ecd[0][tt] * ecd[1][uu] * ecd[2][vv]
                            if e2 == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            val += e1 * e2 * sign * hermite_r(
                                t + tt, u + uu, v + vv, 0, alpha, pq, dist2, cache)
    return val * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def contracted(op, *funcs):
    val = 0.0
    for prims in itertools.product(*funcs):
        coef = 1.0
        for pr in prims:
            coef *= pr.coef
        val += coef * op(*prims)
    return val


def ao_integrals(atoms):
    basis = build_basis(atoms)
    n = len(basis)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = contracted(overlap_prim, basis[i], basis[j])
            t[i, j] = t[j, i] = contracted(kinetic_prim, basis[i], basis[j])
            vij = contracted(lambda pa, pb: nuclear_prim(pa, pb, atoms),
                             basis[i], basis[j])
            v[i, j] = v[j, i] = vij
    # Rescale so contracted functions are exactly normalized.
    scale = 1.0 / np.sqrt(np.diag(s))
    s = s * scale[:, None] * scale[None, :]
    t = t * scale[:, None] * scale[None, :]
    v = v * scale[:, None] * scale[None, :]

    eri = np.zeros((n, n, n, n))
    pair_list = [(i, j) for i in range(n) for j in range(i + 1)]
    for pi, (i, j) in enumerate(pair_list):
        for (k, l) in pair_list[: pi + 1]:
            val = contracted(eri_prim, basis[i], basis[j], basis[k], basis[l])
            val *= scale[i] * scale[j] * scale[k] * scale[l]
            for (a, b) in ((i, j), (j, i)):
                for (c, d) in ((k, l), (l, k)):
                    eri[a, b, c, d] = val
                    eri[c, d, a, b] = val
    e_nuc = 0.0
    for (s1, c1), (s2, c2) in itertools.combinations(atoms, 2):
        r = np.linalg.norm(np.asarray(c1) - np.asarray(c2))
        e_nuc += CHARGE[s1] * CHARGE[s2] / r
    return s, t + v, eri, e_nuc


# ---------------------------------------------------------------------------
# Closed-shell RHF with DIIS.
# ---------------------------------------------------------------------------

def rhf(s, hcore, eri, n_occ, max_iter=300, tol=1e-11):
    n = s.shape[0]
    sval, svec = np.linalg.eigh(s)
    x = svec @ np.diag(sval ** -0.5) @ svec.T

    def fock(dm):
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        return hcore + j - 0.5 * k

    # Core guess.
    f = hcore
    errs, focks = [], []
    e_old = 0.0
    dm = None
    for it in range(max_iter):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        cocc = c[:, :n_occ]
        dm = 2.0 * cocc @ cocc.T
        f = fock(dm)
        e_elec = 0.5 * np.einsum("pq,pq->", dm, hcore + f)
        err = f @ dm @ s - s @ dm @ f
        errs.append(err.ravel())
        focks.append(f.copy())
        if len(errs) > 8:
            errs.pop(0)
            focks.pop(0)
        if it > 0 and abs(e_elec - e_old) < tol and np.abs(err).max() < 1e-8:
            return e_elec, c, eps
        e_old = e_elec
        if len(errs) >= 2:
            m = len(errs)
            bmat = -np.ones((m + 1, m + 1))
            bmat[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    bmat[i, j] = errs[i] @ errs[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(bmat, rhs)[:m]
                f = sum(wi * fi for wi, fi in zip(w, focks))
            except np.linalg.LinAlgError:
                pass
    raise RuntimeError("RHF did not converge")


def mo_transform(hcore, eri, c):
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c, optimize=True)
    return h_mo, eri_mo


# ---------------------------------------------------------------------------
# FCI in the (n_up, n_dn) sector via Slater-Condon rules.
# ---------------------------------------------------------------------------

def sector_dets(norb, nel):
    return list(itertools.combinations(range(norb), nel))


def single_parity(occ, p, a):
    """Parity of a_p^dag a_a ... wait: excitation a (occ) -> p (virt):
    count occupied orbitals strictly between a and p."""
    lo, hi = (a, p) if a < p else (p, a)
    k = sum(1 for o in occ if lo < o < hi)
    return -1.0 if k % 2 else 1.0


def fci_sector(h, eri, norb, n_up, n_dn, use_sparse=None):
    ups = sector_dets(norb, n_up)
    dns = sector_dets(norb, n_dn)
    up_index = {d: i for i, d in enumerate(ups)}
    dn_index = {d: i for i, d in enumerate(dns)}
    nu, nd = len(ups), len(dns)
    dim = nu * nd
    if use_sparse is None:
        use_sparse = dim > 4000

    def diag(up, dn):
        e = sum(h[p, p] for p in up) + sum(h[p, p] for p in dn)
        for p, q in itertools.combinations(up, 2):
            e += eri[p, p, q, q] - eri[p, q, q, p]
        for p, q in itertools.combinations(dn, 2):
            e += eri[p, p, q, q] - eri[p, q, q, p]
        for p in up:
            for q in dn:
                e += eri[p, p, q, q]
        return e

    def singles(occ):
        """(new_occ_sorted, i_occ_removed, a_virt_added, parity)."""
        occ_set = set(occ)
        out = []
        for i in occ:
            for a in range(norb):
                if a in occ_set:
                    continue
                new = tuple(sorted(occ_set - {i} | {a}))
                out.append((new, i, a, single_parity(occ, a, i)))
        return out

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    def doubles(occ, index_map):
        """Precomputed same-spin double excitations: (new_index, value)."""
        occ_set = set(occ)
        out = []
        virt = [a for a in range(norb) if a not in occ_set]
        for i, j in itertools.combinations(occ, 2):
            rest = occ_set - {i, j}
            for a, b in itertools.combinations(virt, 2):
                new = tuple(sorted(rest | {a, b}))
                # Sequential singles i->a then j->b on the intermediate.
                par1 = single_parity(occ, a, i)
                inter = tuple(sorted(occ_set - {i} | {a}))
                par2 = single_parity(inter, b, j)
                val = par1 * par2 * (eri[i, a, j, b] - eri[i, b, j, a])
                out.append((index_map[new], val))
        return out

    # Precompute spin-resolved excitation tables (dn tables depend only on
    # the dn string, so this removes the dominant redundancy).
    up_singles = {d: singles(d) for d in ups}
    dn_singles = {d: singles(d) for d in dns}
    up_doubles = {d: doubles(d, up_index) for d in ups}
    dn_doubles = {d: doubles(d, dn_index) for d in dns}

    for iu, up in enumerate(ups):
        for idn, dn in enumerate(dns):
            row = iu * nd + idn
            add(row, row, diag(up, dn))
            # Same-spin singles in up.
            for new_up, i, a, par in up_singles[up]:
                col = up_index[new_up] * nd + idn
                if col <= row:
                    continue
                val = par * (h[i, a]
                             + sum(eri[i, a, r, r] - eri[i, r, r, a]
                                   for r in up if r != i)
                             + sum(eri[i, a, r, r] for r in dn))
                add(row, col, val)
                add(col, row, val)
            # Same-spin singles in dn.
            for new_dn, i, a, par in dn_singles[dn]:
                col = iu * nd + dn_index[new_dn]
                if col <= row:
                    continue
                val = par * (h[i, a]
                             + sum(eri[i, a, r, r] - eri[i, r, r, a]
                                   for r in dn if r != i)
                             + sum(eri[i, a, r, r] for r in up))
                add(row, col, val)
                add(col, row, val)
            # Same-spin doubles.
            for cu, val in up_doubles[up]:
                col = cu * nd + idn
                if col <= row:
                    continue
                add(row, col, val)
                add(col, row, val)
            for cd, val in dn_doubles[dn]:
                col = iu * nd + cd
                if col <= row:
                    continue
                add(row, col, val)
                add(col, row, val)
            # Mixed doubles: up single x dn single.
            for new_up, i, a, par_u in up_singles[up]:
                cu = up_index[new_up]
                for new_dn, j, b, par_d in dn_singles[dn]:
                    col = cu * nd + dn_index[new_dn]
                    if col <= row:
                        continue
                    val = par_u * par_d * eri[i, a, j, b]
                    add(row, col, val)
                    add(col, row, val)

    mat = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    if use_sparse:
        e, _ = spla.eigsh(mat, k=1, which="SA", tol=0,
                          v0=np.ones(dim) / math.sqrt(dim))
        return float(e[0]), dim
    w = np.linalg.eigvalsh(mat.toarray())
    return float(w[0]), dim


# ---------------------------------------------------------------------------
# Brute-force second-quantized sector Hamiltonian (validation only, small M).
# Mode ordering: up modes 0..M-1, then dn modes M..2M-1.
# ---------------------------------------------------------------------------

def bf_apply_ann(mode, bits):
    if not bits >> mode & 1:
        return None
    sign = -1.0 if bin(bits & ((1 << mode) - 1)).count("1") % 2 else 1.0
    return bits & ~(1 << mode), sign


def bf_apply_cre(mode, bits):
    if bits >> mode & 1:
        return None
    sign = -1.0 if bin(bits & ((1 << mode) - 1)).count("1") % 2 else 1.0
    return bits | (1 << mode), sign


def fci_bruteforce(h, eri, norb, n_up, n_dn):
    ups = sector_dets(norb, n_up)
    dns = sector_dets(norb, n_dn)

    def pack(up, dn):
        b = 0
        for p in up:
            b |= 1 << p
        for p in dn:
            b |= 1 << (norb + p)
        return b

    states = [pack(u, d) for u in ups for d in dns]
    index = {st: i for i, st in enumerate(states)}
    dim = len(states)
    mat = np.zeros((dim, dim))

    def modes(p, spin):
        return p + (norb if spin else 0)

    for col, st in enumerate(states):
        # One-body.
        for spin in (0, 1):
            for p in range(norb):
                for q in range(norb):
                    if h[p, q] == 0.0:
                        continue
                    r1 = bf_apply_ann(modes(q, spin), st)
                    if r1 is None:
                        continue
                    b1, s1 = r1
                    r2 = bf_apply_cre(modes(p, spin), b1)
                    if r2 is None:
                        continue
                    b2, s2 = r2
                    mat[index[b2], col] += h[p, q] * s1 * s2
        # Two-body: 0.5 * (pq|rs) a+_ps a+_rt a_st a_qs.
        for sp1 in (0, 1):
            for sp2 in (0, 1):
                for p in range(norb):
                    for q in range(norb):
                        for r in range(norb):
                            for s_ in range(norb):
                                g = eri[p, q, r, s_]
                                if g == 0.0:
                                    continue
                                r1 = bf_apply_ann(modes(q, sp1), st)
                                if r1 is None:
                                    continue
                                b1, s1 = r1
                                r2 = bf_apply_ann(modes(s_, sp2), b1)
                                if r2 is None:
                                    continue
                                b2, s2 = r2
                                r3 = bf_apply_cre(modes(r, sp2), b2)
                                if r3 is None:
                                    continue
                                b3, s3 = r3
                                r4 = bf_apply_cre(modes(p, sp1), b3)
                                if r4 is None:
                                    continue
                                b4, s4 = r4
                                mat[index[b4], col] += 0.5 * g * s1 * s2 * s3 * s4
    w = np.linalg.eigvalsh(mat)
    return float(w[0])


# ---------------------------------------------------------------------------
# FCIDUMP output.
# ---------------------------------------------------------------------------

def write_fcidump(path, h, eri, e_core, nelec, ms2, thresh=1e-12):
    norb = h.shape[0]
    with open(path, "w") as f:
        f.write(f"&FCI NORB={norb},NELEC={nelec},MS2={ms2},\n")
        f.write("  ORBSYM=" + "1," * norb + "\n")
        f.write("  ISYM=1,\n")
        f.write("&END\n")
        pair = [(i, j) for i in range(norb) for j in range(i + 1)]
        for pi, (i, j) in enumerate(pair):
            for (k, l) in pair[: pi + 1]:
                v = eri[i, j, k, l]
                if abs(v) > thresh:
                    f.write(f"{v: .16E} {i+1:4d} {j+1:4d} {k+1:4d} {l+1:4d}\n")
        for i in range(norb):
            for j in range(i + 1):
                if abs(h[i, j]) > thresh:
                    f.write(f"{h[i, j]: .16E} {i+1:4d} {j+1:4d} {0:4d} {0:4d}\n")
        f.write(f"{e_core: .16E} {0:4d} {0:4d} {0:4d} {0:4d}\n")


# ---------------------------------------------------------------------------
# Fixture drivers.
# ---------------------------------------------------------------------------

def h4_atoms(a_angstrom):
    a = a_angstrom * ANGSTROM_TO_BOHR
    return [("H", np.array([0.0, 0.0, 0.0])),
            ("H", np.array([0.0, 0.0, a])),
            ("H", np.array([a, 0.0, 0.0])),
            ("H", np.array([a, 0.0, a]))]


def ozone_atoms():
    return [("O", np.array([0.0, 0.0, 0.0]) * ANGSTROM_TO_BOHR),
            ("O", np.array([0.0, 0.0, 1.2717000]) * ANGSTROM_TO_BOHR),
            ("O", np.array([1.1383850, 0.0, 1.8385340]) * ANGSTROM_TO_BOHR)]


def make_h4(a, outdir, validate=False):
    atoms = h4_atoms(a)
    s, hcore, eri, e_nuc = ao_integrals(atoms)
    e_elec, c, _ = rhf(s, hcore, eri, n_occ=2)
    e_rhf = e_elec + e_nuc
    h_mo, eri_mo = mo_transform(hcore, eri, c)
    e_fci, dim = fci_sector(h_mo, eri_mo, 4, 2, 2)
    e_fci += e_nuc
    if validate:
        e_bf = fci_bruteforce(h_mo, eri_mo, 4, 2, 2) + e_nuc
        assert abs(e_bf - e_fci) < 1e-10, (e_bf, e_fci)
        print(f"  brute-force cross-check ok: {e_bf:.10f}")
    name = f"h4_a{int(round(a * 1000)):04d}.fcidump"
    write_fcidump(os.path.join(outdir, name), h_mo, eri_mo, e_nuc, 4, 0)
    print(f"H4 a={a:.2f} A  dim={dim}  E_RHF={e_rhf:.10f}  E_FCI={e_fci:.10f}")
    return {"a_angstrom": a, "file": f"h4_sto3g/{name}",
            "e_rhf": e_rhf, "e_fci": e_fci, "sector_dim": dim}


def make_ozone(outdir):
    atoms = ozone_atoms()
    s, hcore, eri, e_nuc = ao_integrals(atoms)
    n_occ = 12
    e_elec, c, _ = rhf(s, hcore, eri, n_occ=n_occ)
    e_rhf = e_elec + e_nuc
    h_mo, eri_mo = mo_transform(hcore, eri, c)

    # Active space: 9 highest of 15 MOs, 12 active electrons; 6 core MOs.
    core = list(range(6))
    active = list(range(6, 15))
    e_core = e_nuc
    for i in core:
        e_core += 2.0 * h_mo[i, i]
        for j in core:
            e_core += 2.0 * eri_mo[i, i, j, j] - eri_mo[i, j, j, i]
    nact = len(active)
    h_act = np.zeros((nact, nact))
    for pi, p in enumerate(active):
        for qi, q in enumerate(active):
            v = h_mo[p, q]
            for i in core:
                v += 2.0 * eri_mo[p, q, i, i] - eri_mo[p, i, i, q]
            h_act[pi, qi] = v
    eri_act = eri_mo[np.ix_(active, active, active, active)]

    e_casci, dim = fci_sector(h_act, eri_act, nact, 6, 6)
    e_casci += e_core
    name = "ozone_cas_12e9o.fcidump"
    write_fcidump(os.path.join(outdir, name), h_act, eri_act, e_core, 12, 0)
    print(f"Ozone (12e,9o)  dim={dim}  E_RHF={e_rhf:.10f}  E_CASCI={e_casci:.10f}")
    return {"file": name, "e_rhf_total": e_rhf, "e_casci": e_casci,
            "active_space": "12e9o", "sector_dim": dim,
            "geometry": "experimental"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=".")
    ap.add_argument("--skip-ozone", action="store_true")
    args = ap.parse_args()

    h4dir = os.path.join(args.out, "h4_sto3g")
    os.makedirs(h4dir, exist_ok=True)

    side_lengths = [0.85, 1.10, 1.23, 1.50, 1.80, 2.10, 2.50]
    ref = {"h4": [], "ozone_cas": None}
    for idx, a in enumerate(side_lengths):
        ref["h4"].append(make_h4(a, h4dir, validate=(idx == 2)))
    if not args.skip_ozone:
        ref["ozone_cas"] = make_ozone(args.out)

    with open(os.path.join(args.out, "reference.json"), "w") as f:
        json.dump(ref, f, indent=1)
    print("wrote reference.json")


if __name__ == "__main__":
    main()
