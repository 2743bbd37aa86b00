//! Ground states of sector Hamiltonians: dense below a size threshold,
//! Lanczos with full reorthogonalization above it.

use super::basis::SectorBasis;
use super::ops::{build_sector_matrix, SparseSectorMatrix};
use super::statevector::Statevector;
use crate::constants::{DENSE_EIGEN_CAP, DIMENSION_CAP};
use crate::hamiltonians::Hamiltonian;
use crate::{AfqmcError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct GroundStateOptions {
    pub dimension_cap: usize,
    pub dense_cap: usize,
    /// Deterministic start vector seed; fixed so E0 and the state are
    /// reproducible run to run.
    pub seed: u64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Residual target relative to |E0|.
    pub rtol: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions {
            dimension_cap: DIMENSION_CAP,
            dense_cap: DENSE_EIGEN_CAP,
            seed: 0x5ec7,
            max_krylov: 250,
            max_restarts: 40,
            rtol: 1e-10,
        }
    }
}

/// Lowest eigenpair of the sector Hamiltonian. The returned state has the
/// phase convention that its largest-magnitude amplitude is real positive,
/// and is normalized.
pub fn ground_state(ham: &Hamiltonian, basis: &Arc<SectorBasis>) -> Result<(f64, Statevector)> {
    ground_state_with(ham, basis, &GroundStateOptions::default())
}

pub fn ground_state_with(
    ham: &Hamiltonian,
    basis: &Arc<SectorBasis>,
    opts: &GroundStateOptions,
) -> Result<(f64, Statevector)> {
    let dim = basis.len();
    if dim > opts.dimension_cap {
        return Err(AfqmcError::Dimension(format!(
            "sector dimension {dim} exceeds cap {}",
            opts.dimension_cap
        )));
    }
    if dim == 0 {
        return Err(AfqmcError::Dimension("empty sector".into()));
    }
    let mat = build_sector_matrix(ham, basis)?;
    let (e0, vector) = if dim <= opts.dense_cap {
        dense_ground(&mat)
    } else {
        lanczos_ground(&mat, opts)?
    };

    // Explicit residual check: ||H psi - E0 psi|| <= rtol * max(1, |E0|).
    let mut hx = vec![0.0; dim];
    mat.matvec(&vector, &mut hx);
    let res: f64 = hx
        .iter()
        .zip(&vector)
        .map(|(h, v)| (h - e0 * v).powi(2))
        .sum::<f64>()
        .sqrt();
    let bound = 10.0 * opts.rtol * e0.abs().max(1.0);
    if res > bound {
        return Err(AfqmcError::Numerical(format!(
            "eigensolver residual {res:.3e} exceeds bound {bound:.3e}"
        )));
    }

    let mut amps: Vec<Complex64> = vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fix_phase(&mut amps);
    Ok((
        e0,
        Statevector {
            basis: Arc::clone(basis),
            amps,
        },
    ))
}

fn fix_phase(amps: &mut [Complex64]) {
    let mut best = 0;
    let mut mag = 0.0;
    for (i, a) in amps.iter().enumerate() {
        if a.norm_sqr() > mag {
            mag = a.norm_sqr();
            best = i;
        }
    }
    if mag == 0.0 {
        return;
    }
    let phase = amps[best] / amps[best].norm();
    let rot = phase.conj();
    for a in amps.iter_mut() {
        *a *= rot;
    }
}

fn dense_ground(mat: &SparseSectorMatrix) -> (f64, Vec<f64>) {
    let dense = mat.to_dense();
    let eig = dense.symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best);
    (eig.eigenvalues[best], v.iter().cloned().collect())
}

fn lanczos_ground(mat: &SparseSectorMatrix, opts: &GroundStateOptions) -> Result<(f64, Vec<f64>)> {
    let dim = mat.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v0);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _restart in 0..opts.max_restarts {
        let (theta, ritz, converged) = lanczos_sweep(mat, &v0, opts.max_krylov, opts.rtol)?;
        if converged {
            return Ok((theta, ritz));
        }
        match &best {
            Some((prev, _)) if *prev <= theta + 1e-14 => {
                // No progress between restarts; keep iterating from the
                // current Ritz vector anyway.
            }
            _ => best = Some((theta, ritz.clone())),
        }
        v0 = ritz;
    }
    Err(AfqmcError::Numerical(format!(
        "Lanczos did not converge within {} restarts of {} iterations",
        opts.max_restarts, opts.max_krylov
    )))
}

fn lanczos_sweep(
    mat: &SparseSectorMatrix,
    start: &[f64],
    max_krylov: usize,
    rtol: f64,
) -> Result<(f64, Vec<f64>, bool)> {
    let dim = mat.dim;
    let mut vs: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    for j in 0..max_krylov.min(dim) {
        mat.matvec(&vs[j], &mut w);
        if j > 0 {
            let b = betas[j - 1];
            let prev = &vs[j - 1];
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        let alpha = dot(&vs[j], &w);
        alphas.push(alpha);
        let vj = &vs[j];
        for (wi, vi) in w.iter_mut().zip(vj) {
            *wi -= alpha * vi;
        }
        // Full reorthogonalization, twice for numerical safety.
        for _ in 0..2 {
            for v in &vs {
                let c = dot(v, &w);
                if c != 0.0 {
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
        }
        let beta = norm(&w);
        let check_now = beta < 1e-13 || j + 1 == max_krylov.min(dim) || (j + 1) % 10 == 0;
        if check_now {
            let (theta, s) = tridiag_ground(&alphas, &betas);
            let resid = if beta < 1e-13 {
                0.0
            } else {
                (beta * s[s.len() - 1]).abs()
            };
            if resid <= rtol * theta.abs().max(1.0) || beta < 1e-13 {
                let ritz = assemble(&vs, &s);
                return Ok((theta, ritz, true));
            }
            if j + 1 == max_krylov.min(dim) {
                let ritz = assemble(&vs, &s);
                return Ok((theta, ritz, false));
            }
        }
        betas.push(beta);
        let mut next = w.clone();
        for x in next.iter_mut() {
            *x /= beta;
        }
        vs.push(next);
    }
    unreachable!("loop returns at the final iteration");
}

fn tridiag_ground(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (
        eig.eigenvalues[best],
        eig.eigenvectors.column(best).iter().cloned().collect(),
    )
}

fn assemble(vs: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
    let dim = vs[0].len();
    let mut out = vec![0.0; dim];
    for (v, &c) in vs.iter().zip(s) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    let mut v = DVector::from_vec(out);
    v /= v.norm();
    v.iter().cloned().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    for x in a.iter_mut() {
        *x /= n;
    }
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
    fn two_site_closed_form_to_1e10() {
        let ham = chain(2, 1.0, 8.0);
        let basis = Arc::new(enumerate_sector(2, 1, 1).unwrap());
        let (e0, psi) = ground_state(&ham, &basis).unwrap();
        let expect = (8.0 - 80.0f64.sqrt()) / 2.0 - 8.0;
        assert!((e0 - expect).abs() < 1e-10);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_sector_energy_is_core() {
        let ham = chain(3, 1.0, 2.0);
        let basis = Arc::new(enumerate_sector(3, 0, 0).unwrap());
        let (e0, _) = ground_state(&ham, &basis).unwrap();
        assert!((e0 - ham.core_energy).abs() < 1e-14);
    }

    #[test]
    fn two_electron_bonding_energy() {
        // t_x = 1, U = 0, L = 2: both electrons in the bonding orbital.
        let ham = chain(2, 1.0, 0.0);
        let basis = Arc::new(enumerate_sector(2, 1, 1).unwrap());
        let (e0, _) = ground_state(&ham, &basis).unwrap();
        assert!((e0 - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense_on_forced_small_problem() {
        let ham = chain(6, 1.0, 4.0);
        let basis = Arc::new(enumerate_sector(6, 3, 3).unwrap());
        let (e_dense, psi_dense) = ground_state(&ham, &basis).unwrap();
        let opts = GroundStateOptions {
            dense_cap: 10, // force the iterative path
            ..Default::default()
        };
        let (e_lanczos, psi_lanczos) = ground_state_with(&ham, &basis, &opts).unwrap();
        assert!((e_dense - e_lanczos).abs() < 1e-9, "{e_dense} vs {e_lanczos}");
        let ov = psi_dense.inner(&psi_lanczos).norm();
        assert!(ov > 1.0 - 1e-8, "overlap {ov}");
    }

    #[test]
    fn mirror_symmetry_of_open_chain_spectrum() {
        // Relabeling sites i -> L-1-i leaves the eigenvalues unchanged.
        let p = HubbardChainParams {
            t_x: 0.9,
            t_xx: 0.3,
            t_xxx: 0.1,
            u: 2.5,
            l: 5,
            boundary: Boundary::Open,
        };
        let ham = build_hubbard_chain(p).unwrap();
        let l = p.l;
        let mut rev = ham.clone();
        for i in 0..l {
            for j in 0..l {
                rev.one_body[(i, j)] = ham.one_body[(l - 1 - i, l - 1 - j)];
            }
        }
        let basis = Arc::new(enumerate_sector(5, 2, 2).unwrap());
        let (e0, _) = ground_state(&ham, &basis).unwrap();
        let (e1, _) = ground_state(&rev, &basis).unwrap();
        assert!((e0 - e1).abs() < 1e-10);
    }
}
