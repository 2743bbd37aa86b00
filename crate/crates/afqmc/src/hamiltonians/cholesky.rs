//! Pivoted incomplete Cholesky factorization of the ERI supermatrix.

use super::{EriTensor, Factor};
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;

/// Factorize a chemists'-notation (pq|rs) tensor, viewed as the positive
/// semidefinite matrix V[(pq),(rs)], into symmetric factors L^g with
/// `sum_g L^g_pq L^g_rs ~ (pq|rs)` and a maximal residual diagonal below
/// `tol`. Factor count is bounded by M^2.
pub fn cholesky_factorize_eri(eri: &EriTensor, tol: f64) -> Result<Vec<Factor>> {
    if tol <= 0.0 {
        return Err(AfqmcError::Input(format!(
            "cholesky tolerance must be positive, got {tol}"
        )));
    }
    let m = eri.n_orbitals();
    let n2 = m * m;
    let pair = |idx: usize| (idx / m, idx % m);

    let mut diag: Vec<f64> = (0..n2)
        .map(|i| {
            let (p, q) = pair(i);
            eri.at(p, q, p, q)
        })
        .collect();
    let mut factors: Vec<Vec<f64>> = Vec::new();

    loop {
        let (piv, &dmax) = diag
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty diagonal");
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmin < -tol {
            return Err(AfqmcError::Numerical(format!(
                "ERI supermatrix has negative diagonal {dmin:.3e}; input is not positive semidefinite"
            )));
        }
        if dmax <= tol || factors.len() >= n2 {
            break;
        }
        let (pp, pq) = pair(piv);
        let mut col: Vec<f64> = (0..n2)
            .map(|i| {
                let (r, s) = pair(i);
                eri.at(r, s, pp, pq)
            })
            .collect();
        for f in &factors {
            let fp = f[piv];
            if fp == 0.0 {
                continue;
            }
            for (c, fi) in col.iter_mut().zip(f.iter()) {
                *c -= fi * fp;
            }
        }
        let scale = 1.0 / dmax.sqrt();
        for c in col.iter_mut() {
            *c *= scale;
        }
        for (d, c) in diag.iter_mut().zip(col.iter()) {
            *d -= c * c;
        }
        factors.push(col);
    }

    Ok(factors
        .into_iter()
        .map(|f| {
            let mat = DMatrix::from_fn(m, m, |p, q| {
                // Symmetrize: roundoff can leave L_pq != L_qp at ~1e-16.
                0.5 * (f[p * m + q] + f[q * m + p])
            });
            Factor::Dense(mat).compact()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hubbard_eri(l: usize, u: f64) -> EriTensor {
        let mut eri = EriTensor::zeros(l);
        for i in 0..l {
            *eri.at_mut(i, i, i, i) = u;
        }
        eri
    }

    #[test]
    fn hubbard_interaction_gives_one_point_factor_per_site() {
        let eri = hubbard_eri(4, 2.25);
        let factors = cholesky_factorize_eri(&eri, 1e-12).unwrap();
        assert_eq!(factors.len(), 4);
        for f in &factors {
            match f {
                Factor::Diagonal(d) => {
                    let nonzero: Vec<_> = d.iter().filter(|x| **x != 0.0).collect();
                    assert_eq!(nonzero.len(), 1);
                    assert!((nonzero[0] - 1.5).abs() < 1e-14);
                }
                Factor::Dense(_) => panic!("expected compact diagonal factor"),
            }
        }
    }

    #[test]
    fn zero_tensor_gives_zero_factors() {
        let eri = EriTensor::zeros(3);
        let factors = cholesky_factorize_eri(&eri, 1e-12).unwrap();
        assert!(factors.is_empty());
    }

    #[test]
    fn rejects_indefinite_input() {
        let mut eri = EriTensor::zeros(2);
        *eri.at_mut(0, 0, 0, 0) = -1.0;
        assert!(cholesky_factorize_eri(&eri, 1e-10).is_err());
    }

    #[test]
    fn random_psd_tensor_reconstructs_within_tolerance() {
        // Gram tensor (pq|rs) = sum_k w_k A^k_pq A^k_rs from random symmetric
        // matrices is PSD by construction.
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = 4;
        let mut eri = EriTensor::zeros(m);
        for _ in 0..6 {
            let mut a = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            for p in 0..m {
                for q in 0..m {
                    for r in 0..m {
                        for s in 0..m {
                            *eri.at_mut(p, q, r, s) += a[(p, q)] * a[(r, s)];
                        }
                    }
                }
            }
        }
        let tol = 1e-10;
        let factors = cholesky_factorize_eri(&eri, tol).unwrap();
        let mut rebuilt = EriTensor::zeros(m);
        for f in &factors {
            let d = f.to_dense();
            for p in 0..m {
                for q in 0..m {
                    for r in 0..m {
                        for s in 0..m {
                            *rebuilt.at_mut(p, q, r, s) += d[(p, q)] * d[(r, s)];
                        }
                    }
                }
            }
        }
        assert!(rebuilt.max_abs_diff(&eri) < 100.0 * tol);
        assert!(factors.len() <= m * m);
    }
}
