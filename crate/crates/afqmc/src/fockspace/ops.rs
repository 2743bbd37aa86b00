//! Second-quantized operators on occupation states and the sparse sector
//! Hamiltonian builder.

use super::basis::SectorBasis;
use crate::hamiltonians::{EriTensor, Hamiltonian};
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Apply `a_mode` to an occupation state, with the global fermionic parity
/// of the ascending-product convention. Modes `0..L` are up sites, `L..2L`
/// down sites.
#[inline]
pub fn annihilate(l: usize, up: u64, dn: u64, mode: usize) -> Option<((u64, u64), f64)> {
    if mode < l {
        if up >> mode & 1 == 0 {
            return None;
        }
        let below = (up & ((1u64 << mode) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some(((up & !(1u64 << mode), dn), sign))
    } else {
        let site = mode - l;
        if dn >> site & 1 == 0 {
            return None;
        }
        let below = up.count_ones() + (dn & ((1u64 << site) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some(((up, dn & !(1u64 << site)), sign))
    }
}

/// Apply `a^dag_mode`; see [`annihilate`] for conventions.
#[inline]
pub fn create(l: usize, up: u64, dn: u64, mode: usize) -> Option<((u64, u64), f64)> {
    if mode < l {
        if up >> mode & 1 == 1 {
            return None;
        }
        let below = (up & ((1u64 << mode) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some(((up | (1u64 << mode), dn), sign))
    } else {
        let site = mode - l;
        if dn >> site & 1 == 1 {
            return None;
        }
        let below = up.count_ones() + (dn & ((1u64 << site) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some(((up, dn | (1u64 << site)), sign))
    }
}

/// Compressed sparse rows over a sector basis; values are real because the
/// crate restricts to real integrals.
#[derive(Debug, Clone)]
pub struct SparseSectorMatrix {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSectorMatrix {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        });
    }

    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = Complex64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *out = acc;
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    /// Largest |H_ij - H_ji| over stored entries; zero for a faithfully
    /// hermitian build.
    pub fn hermiticity_defect(&self) -> f64 {
        let dense = self.to_dense();
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((dense[(i, j)] - dense[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Parity of a same-spin single excitation: occupied orbitals of `occ`
/// strictly between the two indices.
#[inline]
fn between_parity(occ: u64, a: usize, b: usize) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mask = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
    if (occ & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn bits(mut s: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let b = s.trailing_zeros() as usize;
            s &= s - 1;
            Some(b)
        }
    })
}

/// Per-spin single excitation: target string rank, orbital indices, parity,
/// and the dn-independent part of the matrix element.
struct Single {
    rank: u32,
    from: u8,
    to: u8,
    parity: f64,
    same_spin_part: f64,
}

/// Per-spin double excitation with its full matrix element.
struct Double {
    rank: u32,
    value: f64,
}

fn spin_singles(
    states: &[u64],
    rank_of: &dyn Fn(u64) -> u32,
    l: usize,
    h: &DMatrix<f64>,
    eri: &EriTensor,
) -> Vec<Vec<Single>> {
    states
        .iter()
        .map(|&s| {
            let mut out = Vec::new();
            for i in bits(s) {
                for a in 0..l {
                    if s >> a & 1 == 1 {
                        continue;
                    }
                    let new = s & !(1u64 << i) | (1u64 << a);
                    let mut part = h[(i, a)];
                    for r in bits(s) {
                        if r != i {
                            part += eri.at(i, a, r, r) - eri.at(i, r, r, a);
                        }
                    }
                    out.push(Single {
                        rank: rank_of(new),
                        from: i as u8,
                        to: a as u8,
                        parity: between_parity(s, i, a),
                        same_spin_part: part,
                    });
                }
            }
            out
        })
        .collect()
}

fn spin_doubles(
    states: &[u64],
    rank_of: &dyn Fn(u64) -> u32,
    l: usize,
    eri: &EriTensor,
) -> Vec<Vec<Double>> {
    states
        .iter()
        .map(|&s| {
            let occ: Vec<usize> = bits(s).collect();
            let virt: Vec<usize> = (0..l).filter(|&a| s >> a & 1 == 0).collect();
            let mut out = Vec::new();
            for (oi, &i) in occ.iter().enumerate() {
                for &j in &occ[oi + 1..] {
                    for (vi, &a) in virt.iter().enumerate() {
                        for &b in &virt[vi + 1..] {
                            let value = eri.at(i, a, j, b) - eri.at(i, b, j, a);
                            if value.abs() < 1e-14 {
                                continue;
                            }
                            let par1 = between_parity(s, i, a);
                            let inter = s & !(1u64 << i) | (1u64 << a);
                            let par2 = between_parity(inter, j, b);
                            let new = inter & !(1u64 << j) | (1u64 << b);
                            out.push(Double {
                                rank: rank_of(new),
                                value: par1 * par2 * value,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Build the sparse hermitian sector matrix of a Hamiltonian via
/// Slater-Condon rules over spin-resolved excitation tables.
pub fn build_sector_matrix(ham: &Hamiltonian, basis: &SectorBasis) -> Result<SparseSectorMatrix> {
    let l = basis.l;
    if ham.n_orbitals() != l {
        return Err(AfqmcError::Dimension(format!(
            "Hamiltonian has {} orbitals but basis has {l} sites",
            ham.n_orbitals()
        )));
    }
    let eri = ham.reconstruct_eri()?;
    let h = &ham.one_body;
    let core = ham.core_energy;

    let up_states = basis.up_states();
    let dn_states = basis.dn_states();
    let nd = dn_states.len();

    let up_rank = |s: u64| basis.up_rank(s).expect("closed under excitation") as u32;
    let dn_rank = |s: u64| basis.dn_rank(s).expect("closed under excitation") as u32;
    let up_singles = spin_singles(up_states, &up_rank, l, h, &eri);
    let dn_singles = spin_singles(dn_states, &dn_rank, l, h, &eri);
    let up_doubles = spin_doubles(up_states, &up_rank, l, &eri);
    let dn_doubles = spin_doubles(dn_states, &dn_rank, l, &eri);

    let dim = basis.len();
    let rows: Vec<Vec<(u32, f64)>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let iu = row / nd;
            let idn = row % nd;
            let up = up_states[iu];
            let dn = dn_states[idn];
            let mut entries: Vec<(u32, f64)> = Vec::with_capacity(16);

            // Diagonal.
            let mut diag = core;
            for p in bits(up) {
                diag += h[(p, p)];
            }
            for p in bits(dn) {
                diag += h[(p, p)];
            }
            let occ_up: Vec<usize> = bits(up).collect();
            let occ_dn: Vec<usize> = bits(dn).collect();
            for (i, &p) in occ_up.iter().enumerate() {
                for &q in &occ_up[i + 1..] {
                    diag += eri.at(p, p, q, q) - eri.at(p, q, q, p);
                }
            }
            for (i, &p) in occ_dn.iter().enumerate() {
                for &q in &occ_dn[i + 1..] {
                    diag += eri.at(p, p, q, q) - eri.at(p, q, q, p);
                }
            }
            for &p in &occ_up {
                for &q in &occ_dn {
                    diag += eri.at(p, p, q, q);
                }
            }
            entries.push((row as u32, diag));

            // Up singles (dn-dependent Coulomb tail added here).
            for s in &up_singles[iu] {
                let mut v = s.same_spin_part;
                for &r in &occ_dn {
                    v += eri.at(s.from as usize, s.to as usize, r, r);
                }
                v *= s.parity;
                if v.abs() > 1e-14 {
                    entries.push((s.rank * nd as u32 + idn as u32, v));
                }
            }
            // Dn singles.
            for s in &dn_singles[idn] {
                let mut v = s.same_spin_part;
                for &r in &occ_up {
                    v += eri.at(s.from as usize, s.to as usize, r, r);
                }
                v *= s.parity;
                if v.abs() > 1e-14 {
                    entries.push((iu as u32 * nd as u32 + s.rank, v));
                }
            }
            // Same-spin doubles.
            for d in &up_doubles[iu] {
                entries.push((d.rank * nd as u32 + idn as u32, d.value));
            }
            for d in &dn_doubles[idn] {
                entries.push((iu as u32 * nd as u32 + d.rank, d.value));
            }
            // Mixed doubles.
            for su in &up_singles[iu] {
                for sd in &dn_singles[idn] {
                    let v = eri.at(su.from as usize, su.to as usize, sd.from as usize, sd.to as usize);
                    if v.abs() > 1e-14 {
                        entries.push((su.rank * nd as u32 + sd.rank, su.parity * sd.parity * v));
                    }
                }
            }
            entries
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let mut total = 0;
    for r in &rows {
        total += r.len();
        row_ptr.push(total);
    }
    let mut cols = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    for r in rows {
        for (c, v) in r {
            cols.push(c);
            vals.push(v);
        }
    }
    Ok(SparseSectorMatrix {
        dim,
        row_ptr,
        cols,
        vals,
    })
}

/// Apply the spin-summed one-body operator `sum_pq A_pq sum_s a^dag_ps a_qs`
/// to a sector vector.
pub fn apply_one_body_spin_summed(
    basis: &SectorBasis,
    a: &DMatrix<f64>,
    x: &[Complex64],
) -> Vec<Complex64> {
    let l = basis.l;
    assert_eq!(a.nrows(), l);
    assert_eq!(x.len(), basis.len());
    let nd = basis.dn_states().len();
    let mut y = vec![Complex64::ZERO; x.len()];
    for (idx, &amp) in x.iter().enumerate() {
        if amp == Complex64::ZERO {
            continue;
        }
        let iu = idx / nd;
        let idn = idx % nd;
        let up = basis.up_states()[iu];
        let dn = basis.dn_states()[idn];
        // Diagonal: occupations.
        let mut diag = 0.0;
        for q in bits(up) {
            diag += a[(q, q)];
        }
        for q in bits(dn) {
            diag += a[(q, q)];
        }
        y[idx] += amp * diag;
        // Up hops.
        for q in bits(up) {
            for p in 0..l {
                if p == q || up >> p & 1 == 1 || a[(p, q)] == 0.0 {
                    continue;
                }
                let new = up & !(1u64 << q) | (1u64 << p);
                let sign = between_parity(up, p, q);
                let target = basis.up_rank(new).unwrap() * nd + idn;
                y[target] += amp * (a[(p, q)] * sign);
            }
        }
        // Dn hops.
        for q in bits(dn) {
            for p in 0..l {
                if p == q || dn >> p & 1 == 1 || a[(p, q)] == 0.0 {
                    continue;
                }
                let new = dn & !(1u64 << q) | (1u64 << p);
                let sign = between_parity(dn, p, q);
                let target = iu * nd + basis.dn_rank(new).unwrap();
                y[target] += amp * (a[(p, q)] * sign);
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::enumerate_sector;
    use crate::hamiltonians::{build_hubbard_chain, Boundary, HubbardChainParams};

    fn chain(l: usize, t: f64, u: f64) -> Hamiltonian {
        build_hubbard_chain(HubbardChainParams {
            t_x: t,
            t_xx: 0.0,
            t_xxx: 0.0,
            u,
            l,
            boundary: Boundary::Open,
        })
        .unwrap()
    }

    #[test]
    fn anticommutation_signs() {
        // a^dag_0 a^dag_1 |vac> = +|{0,1}>: rightmost operator acts first.
        let (s1, sign1) = create(2, 0, 0, 1).unwrap();
        let (s2, sign2) = create(2, s1.0, s1.1, 0).unwrap();
        assert_eq!(s2, (0b11, 0));
        assert_eq!(sign1 * sign2, 1.0);
        // Reversed order anticommutes: a^dag_1 a^dag_0 |vac> = -|{0,1}>.
        let (t1, sg1) = create(2, 0, 0, 0).unwrap();
        let (t2, sg2) = create(2, t1.0, t1.1, 1).unwrap();
        assert_eq!(t2, (0b11, 0));
        assert_eq!(sg1 * sg2, -1.0);
        // Annihilation undoes creation with a matching sign.
        let ((u, d), sa) = annihilate(2, 0b11, 0, 1).unwrap();
        assert_eq!((u, d), (0b01, 0));
        assert_eq!(sa, -1.0);
    }

    #[test]
    fn dn_parity_counts_all_up_bits() {
        // a^dag_{dn,0} on |up = {0,1}> crosses two up modes: sign +.
        let (_, s) = create(3, 0b11, 0, 3).unwrap();
        assert_eq!(s, 1.0);
        let (_, s) = create(3, 0b1, 0, 3).unwrap();
        assert_eq!(s, -1.0);
    }

    #[test]
    fn two_site_hubbard_spectrum() {
        // t=1, U=8, half filling. Ground singlet of the standard Hubbard
        // model is (U - sqrt(U^2 + 16 t^2))/2; the -U/2 sum_n term shifts
        // all (1,1)-sector energies by -U.
        let ham = chain(2, 1.0, 8.0);
        let basis = enumerate_sector(2, 1, 1).unwrap();
        let mat = build_sector_matrix(&ham, &basis).unwrap();
        let dense = mat.to_dense();
        assert!(mat.hermiticity_defect() < 1e-12);
        let eig = dense.symmetric_eigen();
        let e0 = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let expect = (8.0 - (64.0f64 + 16.0).sqrt()) / 2.0 - 8.0;
        assert!((e0 - expect).abs() < 1e-10, "{e0} vs {expect}");
    }

    #[test]
    fn free_chain_energies_are_orbital_sums() {
        let ham = chain(4, 1.0, 0.0);
        let basis = enumerate_sector(4, 1, 0).unwrap();
        let mat = build_sector_matrix(&ham, &basis).unwrap().to_dense();
        let eig = mat.symmetric_eigen();
        let mut got: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        got.sort_by(f64::total_cmp);
        let horb = ham.one_body.clone().symmetric_eigen();
        let mut orb: Vec<f64> = horb.eigenvalues.iter().cloned().collect();
        orb.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(orb.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_body_application_matches_sector_matrix_for_free_chain() {
        let ham = chain(4, 0.7, 0.0);
        let basis = enumerate_sector(4, 2, 1).unwrap();
        let mat = build_sector_matrix(&ham, &basis).unwrap();
        let dim = basis.len();
        let x: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let y1 = apply_one_body_spin_summed(&basis, &ham.one_body, &x);
        let mut y2 = vec![Complex64::ZERO; dim];
        mat.matvec_complex(&x, &mut y2);
        for (a, b) in y1.iter().zip(y2.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
