//! Sector statevectors, determinant embedding, fidelities and truncation
//! into multi-determinant trials.

use super::basis::SectorBasis;
use crate::gaussian::SlaterDeterminant;
use crate::trials::{MultiDetTrial, TrialProvenance, TrialWavefunction};
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Complex amplitudes aligned to a [`SectorBasis`].
#[derive(Debug, Clone)]
pub struct Statevector {
    pub basis: Arc<SectorBasis>,
    pub amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let n = basis.len();
        Statevector {
            basis,
            amps: vec![Complex64::ZERO; n],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in self.amps.iter_mut() {
                *a /= n;
            }
        }
        self
    }

    /// <self|other>; both vectors must share a basis.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        assert_eq!(self.amps.len(), other.amps.len(), "basis mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Determinants of the row-submatrices of `phi` selected by each occupation
/// bitstring (rows ascending, columns in order).
pub fn minors_for_states(phi: &DMatrix<Complex64>, states: &[u64]) -> Vec<Complex64> {
    let n = phi.ncols();
    let mut buf = vec![Complex64::ZERO; n * n];
    states
        .iter()
        .map(|&bits| {
            let mut r = 0;
            let mut s = bits;
            while s != 0 {
                let row = s.trailing_zeros() as usize;
                s &= s - 1;
                for c in 0..n {
                    buf[r * n + c] = phi[(row, c)];
                }
                r += 1;
            }
            debug_assert_eq!(r, n);
            small_det(&mut buf, n)
        })
        .collect()
}

/// In-place LU determinant with partial pivoting; `buf` is n x n row-major
/// scratch that gets destroyed.
fn small_det(buf: &mut [Complex64], n: usize) -> Complex64 {
    if n == 0 {
        return Complex64::ONE;
    }
    let mut det = Complex64::ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = buf[k * n + k].norm_sqr();
        for r in k + 1..n {
            let m = buf[r * n + k].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::ZERO;
        }
        if piv != k {
            for c in 0..n {
                buf.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = buf[k * n + k];
        det *= pivot;
        for r in k + 1..n {
            let factor = buf[r * n + k] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for c in k + 1..n {
                let sub = factor * buf[k * n + c];
                buf[r * n + c] -= sub;
            }
        }
    }
    det
}

/// Expand a Slater determinant on the occupation basis: the amplitude on a
/// bitstring is the minor of the coefficient matrix selected by it, per
/// spin, scaled by the log-norm accumulator.
pub fn embed_determinant(det: &SlaterDeterminant, basis: &Arc<SectorBasis>) -> Result<Statevector> {
    if !basis.compatible(det.n_orbitals(), det.n_up(), det.n_dn()) {
        return Err(AfqmcError::Dimension(format!(
            "determinant shape ({},{},{}) does not match sector ({},{},{})",
            det.n_orbitals(),
            det.n_up(),
            det.n_dn(),
            basis.l,
            basis.n_up,
            basis.n_dn
        )));
    }
    let scale = Complex64::new(det.log_scale.exp(), 0.0);
    let up_minors = minors_for_states(&det.phi_up, basis.up_states());
    let dn_minors = minors_for_states(&det.phi_dn, basis.dn_states());
    let nd = dn_minors.len();
    let mut amps = vec![Complex64::ZERO; basis.len()];
    for (iu, &mu) in up_minors.iter().enumerate() {
        if mu == Complex64::ZERO {
            continue;
        }
        let base = iu * nd;
        for (idn, &md) in dn_minors.iter().enumerate() {
            amps[base + idn] = mu * md * scale;
        }
    }
    Ok(Statevector {
        basis: Arc::clone(basis),
        amps,
    })
}

/// |<trial|psi>|^2 / (<trial|trial><psi|psi>).
pub fn fidelity(trial: &TrialWavefunction, psi: &Statevector) -> Result<f64> {
    let tv = crate::trials::trial_to_statevector(trial, &psi.basis)?;
    let den = tv.norm_sqr() * psi.norm_sqr();
    if den == 0.0 {
        return Err(AfqmcError::Numerical("fidelity of a null state".into()));
    }
    Ok(tv.inner(psi).norm_sqr() / den)
}

/// Truncation rules for statevector-to-multideterminant conversion. The
/// threshold applies to amplitude magnitudes |c|, not |c|^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    Threshold(f64),
    TopK(usize),
}

impl std::fmt::Display for TruncationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruncationRule::Threshold(w) => write!(f, "threshold({w})"),
            TruncationRule::TopK(k) => write!(f, "top_k({k})"),
        }
    }
}

/// Keep the determinants selected by `rule`, renormalize their
/// coefficients, and record rule plus discarded weight as provenance.
/// Errors when the selection is empty.
pub fn truncate_statevector(psi: &Statevector, rule: TruncationRule) -> Result<MultiDetTrial> {
    let mut order: Vec<usize> = (0..psi.amps.len()).collect();
    order.sort_by(|&a, &b| {
        psi.amps[b]
            .norm_sqr()
            .total_cmp(&psi.amps[a].norm_sqr())
            .then(a.cmp(&b))
    });
    let selected: Vec<usize> = match rule {
        TruncationRule::Threshold(w) => order
            .into_iter()
            .take_while(|&i| psi.amps[i].norm() > w)
            .collect(),
        TruncationRule::TopK(k) => order
            .into_iter()
            .take(k)
            .filter(|&i| psi.amps[i] != Complex64::ZERO)
            .collect(),
    };
    if selected.is_empty() {
        return Err(AfqmcError::Input(format!(
            "truncation rule {rule} selects no determinants"
        )));
    }
    let total = psi.norm_sqr();
    let kept: f64 = selected.iter().map(|&i| psi.amps[i].norm_sqr()).sum();
    let renorm = kept.sqrt();
    let coeffs: Vec<Complex64> = selected.iter().map(|&i| psi.amps[i] / renorm).collect();
    let occs: Vec<(u64, u64)> = selected.iter().map(|&i| psi.basis.state(i)).collect();
    Ok(MultiDetTrial {
        l: psi.basis.l,
        n_up: psi.basis.n_up,
        n_dn: psi.basis.n_dn,
        coeffs,
        occs,
        provenance: TrialProvenance {
            source: "truncate_statevector".into(),
            rule: Some(rule.to_string()),
            discarded_weight: Some((total - kept).max(0.0) / total.max(f64::MIN_POSITIVE)),
            file_hash: None,
            bond_dimension: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::enumerate_sector;
    use crate::gaussian::random_determinant;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_occupation_embeds_to_unit_amplitude() {
        let basis = Arc::new(enumerate_sector(4, 2, 1).unwrap());
        let det = SlaterDeterminant::from_occupations(4, &[0, 1], &[2]);
        let v = embed_determinant(&det, &basis).unwrap();
        let idx = basis.index_of(0b0011, 0b0100).unwrap();
        for (i, a) in v.amps.iter().enumerate() {
            if i == idx {
                assert!((a - Complex64::ONE).norm() < 1e-14);
            } else {
                assert_eq!(*a, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn embedding_norm_is_one_for_orthonormal_determinants() {
        // Cauchy-Binet: the squared minors of an orthonormal matrix sum to 1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let det = random_determinant(&mut rng, 6, 3, 2);
            let basis = Arc::new(enumerate_sector(6, 3, 2).unwrap());
            let v = embed_determinant(&det, &basis).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_threshold_zero_keeps_all_nonzero() {
        let basis = Arc::new(enumerate_sector(4, 2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let det = random_determinant(&mut rng, 4, 2, 2);
        let v = embed_determinant(&det, &basis).unwrap().normalized();
        let trial = truncate_statevector(&v, TruncationRule::Threshold(0.0)).unwrap();
        assert!(trial.coeffs.len() <= basis.len());
        // Renormalized: unit norm.
        let n: f64 = trial.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(trial.provenance.discarded_weight.unwrap() < 1e-12);
    }

    #[test]
    fn truncation_with_impossible_threshold_fails() {
        let basis = Arc::new(enumerate_sector(3, 1, 1).unwrap());
        let det = SlaterDeterminant::from_occupations(3, &[0], &[0]);
        let v = embed_determinant(&det, &basis).unwrap();
        assert!(truncate_statevector(&v, TruncationRule::Threshold(1.1)).is_err());
    }

    #[test]
    fn small_det_agrees_with_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..6 {
            let m = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let mut buf: Vec<Complex64> = (0..n * n)
                .map(|i| m[(i / n, i % n)])
                .collect();
            let got = small_det(&mut buf, n);
            let want = m.lu().determinant();
            assert!((got - want).norm() < 1e-12);
        }
    }
}
